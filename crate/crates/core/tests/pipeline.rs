//! End-to-end checks that chain several engine layers: direct sums through
//! towers, atlas fan-out against its sequential twin, certificate
//! functoriality along ring maps, and a property test pinning the
//! diagonalizer to the dense univariate oracle in `common`.

mod common;

use std::sync::Arc;

use proptest::prelude::*;
use resolvent_core::blowup::{determinantal_tower, TowerOptions};
use resolvent_core::chart::{Atlas, Chart, RingMap};
use resolvent_core::diag::{diagonalize_on_chart, kernel_basis, verify_cert, DiagCert, DiagOptions};
use resolvent_core::hom::{pullback_hom, MatrixHom};
use resolvent_core::ideal::reduced_groebner;
use resolvent_core::order::MonomialOrder;
use resolvent_core::par;
use resolvent_core::poly::{rat_int, Poly, Rational};

const ORDER: MonomialOrder = MonomialOrder::GrevLex;

fn affine(name: &str, vars: &[&str]) -> Arc<Chart> {
    Arc::new(Chart::affine(name, vars))
}

fn mat(chart: &Arc<Chart>, rows: &[Vec<&str>]) -> MatrixHom {
    MatrixHom::parse(chart.clone(), rows).unwrap()
}

/// Diagonalizes the pullback of `phi` on every tower leaf and checks the
/// certificate, returning the certificates in leaf order.
fn certify_leaves(chart: &Arc<Chart>, phi: &MatrixHom, max_depth: usize) -> Vec<DiagCert> {
    let tower = determinantal_tower(
        chart,
        phi,
        &TowerOptions { max_depth, ..Default::default() },
    )
    .unwrap();
    assert!(!tower.leaves.is_empty());
    tower
        .leaves
        .iter()
        .map(|leaf| {
            let pulled = pullback_hom(&leaf.map, phi).unwrap();
            let cert = diagonalize_on_chart(&pulled, &DiagOptions::default()).unwrap();
            assert_eq!(verify_cert(&pulled, &cert), Ok(()));
            cert
        })
        .collect()
}

#[test]
fn direct_sum_resolves_with_additive_rank() {
    let a2 = affine("A2", &["x", "y"]);
    let left = mat(&a2, &[vec!["x", "0"], vec!["0", "y"]]);
    let right = mat(&a2, &[vec!["x"]]);
    let phi = left.direct_sum(&right).unwrap();
    assert_eq!((phi.rows(), phi.cols()), (3, 3));
    assert_eq!(
        phi.image_rank().unwrap(),
        left.image_rank().unwrap() + right.image_rank().unwrap()
    );

    for cert in certify_leaves(&a2, &phi, 3) {
        assert_eq!(cert.diag.len(), 3);
        assert_eq!(kernel_basis(&cert).rank, 0);
    }
}

#[test]
fn direct_sum_with_zero_block_keeps_kernel_direction() {
    let a2 = affine("A2", &["x", "y"]);
    let left = mat(&a2, &[vec!["x", "0"], vec!["0", "y"]]);
    let zero = mat(&a2, &[vec!["0"]]);
    let phi = left.direct_sum(&zero).unwrap();
    assert_eq!(phi.image_rank().unwrap(), 2);

    let tower = determinantal_tower(&a2, &phi, &TowerOptions::default()).unwrap();
    for leaf in &tower.leaves {
        let pulled = pullback_hom(&leaf.map, &phi).unwrap();
        let cert = diagonalize_on_chart(&pulled, &DiagOptions::default()).unwrap();
        assert_eq!(verify_cert(&pulled, &cert), Ok(()));
        let kernel = kernel_basis(&cert);
        assert_eq!(kernel.rank, 1);
        // Kernel vectors must annihilate the pulled matrix exactly.
        for v in &kernel.vectors {
            for row in 0..pulled.rows() {
                let mut acc = Poly::zero(leaf.chart.nvars());
                for (col, entry) in v.iter().enumerate() {
                    acc = &acc + &(pulled.entry(row, col) * entry);
                }
                assert!(leaf.chart.is_zero_mod(&acc, &ORDER));
            }
        }
    }
}

#[test]
fn atlas_parallel_fanout_matches_sequential_golden() {
    let a2 = affine("U0", &["x", "y"]);
    let tower = determinantal_tower(
        &a2,
        &mat(&a2, &[vec!["x", "0"], vec!["0", "y"]]),
        &TowerOptions::default(),
    )
    .unwrap();
    let rel = affine("scratch", &["x", "y", "t"]).parse("y^2 - x*t").unwrap();
    let cone = Arc::new(
        Chart::new("Q", vec!["x".into(), "y".into(), "t".into()], vec![rel]).unwrap(),
    );
    let mut charts: Vec<Arc<Chart>> = vec![a2.clone(), affine("U1", &["x", "y", "z"]), cone];
    charts.extend(tower.leaves.iter().map(|l| l.chart.clone()));
    let atlas = Atlas::new(charts).unwrap();

    // Per chart: a reduced Groebner basis rendered to strings plus the
    // reduction of a fixed polynomial, enough work to expose any
    // scheduling-dependent merge.
    let probe = |c: &Arc<Chart>| -> (String, Vec<String>) {
        let a = &c.vars()[0];
        let b = c.vars().last().unwrap();
        let f = c.parse(&format!("{a}^3 - {a}*{b} + 2*{b} - 2*{a}")).unwrap();
        let g = c.parse(&format!("{a}*{b} - {b}")).unwrap();
        let mut gens = vec![f.clone(), g.clone()];
        gens.extend(c.relations().gens().iter().cloned());
        let basis = reduced_groebner(&gens, &ORDER)
            .iter()
            .map(|b| c.render(b, &ORDER))
            .collect();
        (c.render(&c.reduce(&(&f * &g), &ORDER), &ORDER), basis)
    };

    let fanned = atlas.map_charts(probe);
    let golden = par::map_collect_seq(atlas.charts(), probe);
    assert_eq!(fanned, golden);
}

#[test]
fn certificates_pull_back_along_ring_maps() {
    // A certificate is transported through a ring map by mapping every
    // matrix entry; unit determinants stay units because they are nonzero
    // constants, and divisibility witnesses map along.
    fn pull_cert(m: &RingMap, cert: &DiagCert) -> DiagCert {
        DiagCert {
            chart: m.target().clone(),
            u: cert.u.map(|e| m.apply(e).unwrap()),
            v: cert.v.map(|e| m.apply(e).unwrap()),
            diag: cert.diag.iter().map(|e| m.apply(e).unwrap()).collect(),
            u_det: m.apply(&cert.u_det).unwrap(),
            v_det: m.apply(&cert.v_det).unwrap(),
            seed: cert.seed,
        }
    }

    let line = affine("L", &["t"]);
    let phi = mat(&line, &[vec!["t", "t^2"], vec!["t^2", "t^3 + t^2"]]);
    let cert = diagonalize_on_chart(&phi, &DiagOptions::default()).unwrap();
    assert_eq!(verify_cert(&phi, &cert), Ok(()));

    let a2 = affine("A2", &["x", "y"]);
    let into_plane =
        RingMap::new(line.clone(), a2.clone(), vec![a2.parse("x*y").unwrap()]).unwrap();
    let endo =
        RingMap::new(line.clone(), line.clone(), vec![line.parse("t^3 - t").unwrap()]).unwrap();

    for m in [&into_plane, &endo] {
        let pulled_phi = pullback_hom(m, &phi).unwrap();
        let pulled_cert = pull_cert(m, &cert);
        assert_eq!(verify_cert(&pulled_phi, &pulled_cert), Ok(()));
    }
}

fn upoly_strategy(max_deg: usize) -> impl Strategy<Value = common::UPoly> {
    proptest::collection::vec((-3i64..4).prop_map(rat_int), 0..=max_deg + 1)
        .prop_map(|coeffs| common::utrim(coeffs))
}

proptest::proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Over a one-variable chart the diagonalizer must reproduce the Smith
    /// invariant factors computed by the dense elementary-operations
    /// oracle: entries are emitted monic, so the match is exact equality.
    #[test]
    fn univariate_diagonal_matches_snf_oracle(
        entries in proptest::collection::vec(upoly_strategy(2), 4)
    ) {
        let line = affine("L", &["t"]);
        let polys: Vec<Poly> = entries.iter().map(|u| common::upoly_to(u)).collect();
        let phi = MatrixHom::from_rows(
            line.clone(),
            vec![polys[..2].to_vec(), polys[2..].to_vec()],
        )
        .unwrap();

        let cert = diagonalize_on_chart(&phi, &DiagOptions::default()).unwrap();
        prop_assert_eq!(verify_cert(&phi, &cert), Ok(()));

        let oracle = common::snf_invariant_factors(vec![
            entries[..2].to_vec(),
            entries[2..].to_vec(),
        ]);
        prop_assert_eq!(cert.diag.len(), oracle.len());
        for (mine, theirs) in cert.diag.iter().zip(&oracle) {
            let as_upoly = common::upoly_from(mine);
            prop_assert_eq!(&as_upoly, theirs);
        }
    }

    /// Exact rational rank of the constant part agrees between the plain
    /// Gaussian oracle and the library implementation.
    #[test]
    fn rational_rank_matches_oracle(
        cells in proptest::collection::vec(-5i64..6, 12)
    ) {
        let rows: Vec<Vec<Rational>> =
            cells.chunks(4).map(|ch| ch.iter().map(|&c| rat_int(c)).collect()).collect();
        prop_assert_eq!(
            resolvent_core::hom::rational_rank(rows.clone()),
            common::rational_rank(rows)
        );
    }
}
