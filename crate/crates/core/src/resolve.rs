use std::sync::Arc;

use crate::blowup::{determinantal_tower, BlowupStep, TowerOptions};
use crate::chart::{same_ring, Chart, RingMap};
use crate::diag::{diagonalize_on_chart, kernel_basis, DiagCert, DiagOptions, KernelBasis};
use crate::error::{Error, Result};
use crate::hom::{pullback_hom, ComplexOnChart, MatrixHom, PolyMat};
use crate::ideal::{ideal_equal, saturate, Ideal};
use crate::order::MonomialOrder;
use crate::poly::Poly;

const ORDER: MonomialOrder = MonomialOrder::GrevLex;

/// A two-sided presentation of a coherent sheaf on a chart: the cokernel of
/// `alpha`.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub alpha: MatrixHom,
}

impl Presentation {
    pub fn new(alpha: MatrixHom) -> Presentation {
        Presentation { alpha }
    }
}

/// The h-th Fitting ideal of the cokernel: the ideal of (m-h) x (m-h)
/// minors of alpha where m is the target rank, the unit ideal once h >= m.
/// The chain J_0 inside J_1 inside ... is increasing.
pub fn fitting_ideal(p: &Presentation, h: usize) -> Result<Ideal> {
    let m = p.alpha.rows();
    let chart = p.alpha.chart();
    if h >= m {
        return Ok(Ideal::new(chart.nvars(), vec![Poly::one(chart.nvars())]));
    }
    p.alpha.determinantal_ideal(m - h - 1)
}

/// True iff the two presentations have identical Fitting ideals in every
/// degree up to the larger target rank; isomorphic cokernels always do.
pub fn fitting_independence_check(p: &Presentation, q: &Presentation) -> Result<bool> {
    let bound = p.alpha.rows().max(q.alpha.rows());
    for h in 0..=bound {
        let a = fitting_ideal(p, h)?;
        let b = fitting_ideal(q, h)?;
        if !ideal_equal(&a, &b, &ORDER) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Resolution data on one terminal chart: the pulled-back complex, a
/// verifiable diagonalization certificate for every level map, the kernel
/// basis of the level-0 map, and the image rank at every level.
#[derive(Debug, Clone)]
pub struct LeafResolution {
    pub chart: Arc<Chart>,
    pub map: RingMap,
    pub pulled: ComplexOnChart,
    pub certs: Vec<DiagCert>,
    pub kernel: KernelBasis,
    pub image_ranks: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ResolutionResult {
    pub root: Arc<Chart>,
    pub complex: ComplexOnChart,
    pub steps: Vec<BlowupStep>,
    pub leaves: Vec<LeafResolution>,
    /// Generic ranks h^0 ... h^n, identical on every leaf.
    pub cohomology_ranks: Vec<usize>,
}

/// Inverse of a square matrix whose determinant is a unit on the chart:
/// the adjugate scaled by the determinant's inverse.
fn invert_unimodular(v: &PolyMat, chart: &Chart) -> Result<PolyMat> {
    let det = chart.reduce(&v.det()?, &ORDER);
    let inv = chart.unit_inverse(&det, &ORDER).ok_or_else(|| {
        Error::Internal("matrix determinant is not a unit on the chart".into())
    })?;
    let adj = v.adjugate()?;
    Ok(adj.map(|e| chart.reduce(&(&inv * e), &ORDER)))
}

/// Expresses `psi_prev` in the kernel coordinates of the diagonalized level
/// above: the top rows of V^{-1} psi_prev vanish because the composite is
/// zero and the chart is a domain; the bottom block is the induced map into
/// the free kernel.
fn induced_matrix(cert: &DiagCert, psi_prev: &MatrixHom) -> Result<MatrixHom> {
    let chart = &cert.chart;
    let vinv = invert_unimodular(&cert.v, chart)?;
    let prod = vinv.mul(psi_prev.mat())?.map(|e| chart.reduce(e, &ORDER));
    let m = cert.diag.len();
    for r in 0..m {
        for c in 0..prod.cols() {
            if !prod.get(r, c).is_zero() {
                return Err(Error::Internal(
                    "image does not land in the kernel of the level above".into(),
                ));
            }
        }
    }
    let rows: Vec<usize> = (m..prod.rows()).collect();
    let cols: Vec<usize> = (0..prod.cols()).collect();
    MatrixHom::new(chart.clone(), prod.submatrix(&rows, &cols))
}

/// Upgrades the certificate of the induced matrix M (psi in kernel
/// coordinates) to a certificate of psi itself:
/// U = P * blockdiag(I, U_M) * V_next^{-1} and V = V_M, where P lifts the
/// diagonal block to the leading rows.
fn assemble_cert(
    psi: &MatrixHom,
    cert_m: &DiagCert,
    v_next: &PolyMat,
    m_next: usize,
) -> Result<DiagCert> {
    let chart = psi.chart().clone();
    let nvars = chart.nvars();
    let q = psi.rows();
    let k = q - m_next;
    debug_assert_eq!(cert_m.u.rows(), k);

    let block = PolyMat::from_fn(q, q, nvars, |i, j| {
        if i < m_next && j < m_next {
            if i == j {
                Poly::one(nvars)
            } else {
                Poly::zero(nvars)
            }
        } else if i >= m_next && j >= m_next {
            cert_m.u.get(i - m_next, j - m_next).clone()
        } else {
            Poly::zero(nvars)
        }
    });
    let perm: Vec<usize> = (m_next..q).chain(0..m_next).collect();
    let p_mat = PolyMat::from_fn(q, q, nvars, |i, j| {
        if perm[i] == j {
            Poly::one(nvars)
        } else {
            Poly::zero(nvars)
        }
    });
    let vinv_next = invert_unimodular(v_next, &chart)?;
    let u = p_mat.mul(&block)?.mul(&vinv_next)?.map(|e| chart.reduce(e, &ORDER));
    let u_det = chart.reduce(&u.det()?, &ORDER);
    let v_det = cert_m.v_det.clone();
    Ok(DiagCert {
        chart,
        u,
        v: cert_m.v.clone(),
        diag: cert_m.diag.clone(),
        u_det,
        v_det,
        seed: cert_m.seed,
    })
}

/// Reruns the reduction chain on one terminal chart and packages the
/// verifiable data: certificates for every pulled level map, the kernel
/// basis of the level-0 map, and image ranks.
fn leaf_resolution(
    complex: &ComplexOnChart,
    chart: Arc<Chart>,
    map: RingMap,
    diag_opts: &DiagOptions,
) -> Result<LeafResolution> {
    let pulled = complex.pullback(&map)?;
    let n = pulled.terms().len();
    let mut certs: Vec<Option<DiagCert>> = vec![None; n];
    let mut image_ranks = vec![0usize; n];
    let mut current = pulled.terms()[n - 1].clone();
    let mut above: Option<(PolyMat, usize)> = None;
    for level in (0..n).rev() {
        let cert_m = diagonalize_on_chart(&current, diag_opts)?;
        let m = cert_m.diag.len();
        image_ranks[level] = m;
        let cert = match &above {
            None => cert_m.clone(),
            Some((v_next, m_next)) => {
                assemble_cert(&pulled.terms()[level], &cert_m, v_next, *m_next)?
            }
        };
        certs[level] = Some(cert);
        if level > 0 {
            current = induced_matrix(&cert_m, &pulled.terms()[level - 1])?;
            above = Some((cert_m.v.clone(), m));
        }
    }
    let certs: Vec<DiagCert> = certs.into_iter().map(|c| c.expect("every level visited")).collect();
    let kernel = kernel_basis(&certs[0]);
    Ok(LeafResolution { chart, map, pulled, certs, kernel, image_ranks })
}

/// Resolves a bounded complex of free modules: working from the top map
/// down, blow up until every stage ideal of the current level map is
/// principal, diagonalize, and present the next map in the free kernel's
/// coordinates. Terminal charts certify that the kernel of the level-0 map
/// (and hence H^0) is free of constant rank.
pub fn resolve_complex(complex: &ComplexOnChart, opts: &TowerOptions) -> Result<ResolutionResult> {
    let root = complex.chart().clone();
    let n = complex.terms().len();
    let diag_opts = DiagOptions { seed: opts.seed };

    struct WorkLeaf {
        chart: Arc<Chart>,
        map: RingMap,
        current: MatrixHom,
    }
    let mut work = vec![WorkLeaf {
        chart: root.clone(),
        map: RingMap::identity(root.clone()),
        current: complex.terms()[n - 1].clone(),
    }];
    let mut steps: Vec<BlowupStep> = Vec::new();

    for level in (0..n).rev() {
        let mut refined: Vec<WorkLeaf> = Vec::new();
        for leaf in &work {
            let tower = determinantal_tower(&leaf.chart, &leaf.current, opts)?;
            steps.extend(tower.steps);
            for tleaf in &tower.leaves {
                refined.push(WorkLeaf {
                    chart: tleaf.chart.clone(),
                    map: leaf.map.then(&tleaf.map)?,
                    current: pullback_hom(&tleaf.map, &leaf.current)?,
                });
            }
        }
        if level > 0 {
            let currents: Vec<MatrixHom> = crate::par::map_collect(&refined, |leaf| {
                let cert = diagonalize_on_chart(&leaf.current, &diag_opts)?;
                let psi_prev = pullback_hom(&leaf.map, &complex.terms()[level - 1])?;
                induced_matrix(&cert, &psi_prev)
            })
            .into_iter()
            .collect::<Result<_>>()?;
            for (leaf, current) in refined.iter_mut().zip(currents) {
                leaf.current = current;
            }
        }
        work = refined;
    }

    let leaves: Vec<LeafResolution> = crate::par::map_collect(&work, |leaf| {
        leaf_resolution(complex, leaf.chart.clone(), leaf.map.clone(), &diag_opts)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let ranks = complex.ranks();
    let reference = &leaves[0].image_ranks;
    for leaf in &leaves[1..] {
        if leaf.image_ranks != *reference {
            return Err(Error::Internal(format!(
                "image ranks differ across leaves: {:?} vs {:?}",
                reference, leaf.image_ranks
            )));
        }
    }
    let mut cohomology = Vec::with_capacity(n + 1);
    cohomology.push(ranks[0] - reference[0]);
    for i in 1..n {
        cohomology.push(ranks[i] - reference[i] - reference[i - 1]);
    }
    cohomology.push(ranks[n] - reference[n - 1]);

    Ok(ResolutionResult { root, complex: complex.clone(), steps, leaves, cohomology_ranks: cohomology })
}

/// True iff every higher cohomology sheaf has generic rank zero, i.e. is
/// torsion on integral charts.
pub fn torsion_check(r: &ResolutionResult) -> bool {
    r.cohomology_ranks.iter().skip(1).all(|&h| h == 0)
}

/// Decorates every variable name of `chart` with the first suffix making
/// them all disjoint from `taken`.
fn disjoint_names(chart: &Chart, taken: &[String]) -> Vec<String> {
    for d in 0u32.. {
        let names: Vec<String> = chart
            .vars()
            .iter()
            .map(|v| if d == 0 { format!("{v}_b") } else { format!("{v}_b{d}") })
            .collect();
        if names.iter().all(|n| !taken.contains(n)) {
            return names;
        }
    }
    unreachable!("some suffix level is always fresh")
}

/// The honest overlap chart of two terminal leaves: variables of both,
/// both relation ideals, one gluing equation per base variable, with the
/// components lying over the blown-up loci removed by saturating at every
/// exceptional equation. What remains is the closure of the graph of the
/// birational correspondence; None when that locus is empty.
fn fiber_chart(
    left: &Chart,
    left_map: &RingMap,
    right: &Chart,
    right_map: &RingMap,
) -> Result<Option<Arc<Chart>>> {
    let lw = left.nvars();
    let rw = right.nvars();
    let mut gens: Vec<Poly> = left.relations().gens().iter().map(|g| g.pad_back(rw)).collect();
    gens.extend(right.relations().gens().iter().map(|g| g.pad_front(lw)));
    let base = left_map.source();
    for v in 0..base.nvars() {
        let x = Poly::var(base.nvars(), v);
        let l = left_map.apply(&x)?.pad_back(rw);
        let r = right_map.apply(&x)?.pad_front(lw);
        gens.push(&l - &r);
    }
    let mut ideal = Ideal::new(lw + rw, gens);

    let mut excess = Poly::one(lw + rw);
    for (_, e) in left.exceptionals() {
        excess = &excess * &e.pad_back(rw);
    }
    for (_, e) in right.exceptionals() {
        excess = &excess * &e.pad_front(lw);
    }
    if !excess.is_constant() {
        let reduced = ideal.normal_form(&excess, &ORDER);
        if reduced.is_zero() {
            return Ok(None);
        }
        ideal = saturate(&ideal, &excess)?;
    }
    if ideal.is_unit_ideal(&ORDER) {
        return Ok(None);
    }
    let mut names: Vec<String> = left.vars().to_vec();
    names.extend(disjoint_names(right, left.vars()));
    let rel = ideal.basis(&ORDER).to_vec();
    Ok(Some(Arc::new(Chart::new("fiber", names, rel)?)))
}

/// True iff the recorded leaves are exactly the terminal charts of the
/// recorded steps, so a result with leaves dropped after the fact is
/// rejected instead of being compared leaf by leaf.
fn tower_is_complete(r: &ResolutionResult) -> bool {
    use std::collections::BTreeSet;
    let mut names: BTreeSet<&str> = BTreeSet::new();
    names.insert(r.root.name());
    let mut parents: BTreeSet<&str> = BTreeSet::new();
    for step in &r.steps {
        parents.insert(step.parent.name());
        for child in &step.children {
            names.insert(child.chart.name());
        }
    }
    let terminal: BTreeSet<&str> = names.difference(&parents).copied().collect();
    let leaves: BTreeSet<&str> = r.leaves.iter().map(|l| l.chart.name()).collect();
    leaves.len() == r.leaves.len() && leaves == terminal
}

/// Checks that two resolutions of the same complex along a dominant base
/// map agree: on every overlapping pair of leaves the two kernel bases
/// generate the same free submodule, witnessed by a unit-determinant
/// transition. Every leaf on each side must overlap at least one leaf on
/// the other, so truncated inputs fail instead of passing by omission.
pub fn base_change_verify(
    r: &ResolutionResult,
    g: &RingMap,
    r_other: &ResolutionResult,
) -> Result<bool> {
    if !same_ring(g.source(), &r.root) || !same_ring(g.target(), &r_other.root) {
        return Err(Error::ChartMismatch);
    }
    if !g.is_dominant() {
        return Err(Error::InvalidArgument("base map must be dominant".into()));
    }
    if r.complex.ranks() != r_other.complex.ranks() {
        return Ok(false);
    }
    if r.leaves.is_empty() || r_other.leaves.is_empty() {
        return Err(Error::NoCommonLeaf);
    }
    if !tower_is_complete(r) || !tower_is_complete(r_other) {
        return Ok(false);
    }

    let p0 = r.complex.ranks()[0];
    let mut matched = 0usize;
    let mut left_hit = vec![false; r.leaves.len()];
    let mut right_hit = vec![false; r_other.leaves.len()];
    for (li, leaf) in r.leaves.iter().enumerate() {
        for (ri, other) in r_other.leaves.iter().enumerate() {
            let right_map = g.then(&other.map)?;
            let Some(fiber) = fiber_chart(&leaf.chart, &leaf.map, &other.chart, &right_map)?
            else {
                continue;
            };
            matched += 1;
            left_hit[li] = true;
            right_hit[ri] = true;

            let m = leaf.certs[0].diag.len();
            let m_other = other.certs[0].diag.len();
            if m != m_other {
                return Ok(false);
            }
            let k = p0 - m;
            if k == 0 {
                continue;
            }
            let rw = other.chart.nvars();
            let lw = leaf.chart.nvars();
            let v_left = leaf.certs[0].v.map(|e| e.pad_back(rw));
            let v_right = other.certs[0].v.map(|e| e.pad_front(lw));
            let vinv_right = invert_unimodular(&v_right, &fiber)?;
            let t = vinv_right.mul(&v_left)?.map(|e| fiber.reduce(&e, &ORDER));
            for i in 0..m {
                for j in m..p0 {
                    if !t.get(i, j).is_zero() {
                        return Ok(false);
                    }
                }
            }
            let rows: Vec<usize> = (m..p0).collect();
            let transition = t.submatrix(&rows, &rows);
            let det = fiber.reduce(&transition.det()?, &ORDER);
            if !fiber.is_unit(&det, &ORDER) {
                return Ok(false);
            }
        }
    }
    if matched == 0 {
        return Err(Error::NoCommonLeaf);
    }
    Ok(left_hit.into_iter().all(|b| b) && right_hit.into_iter().all(|b| b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::CenterOrder;
    use crate::chart::pull_ideal;
    use crate::diag::verify_cert;

    fn affine(name: &str, vars: &[&str]) -> Arc<Chart> {
        Arc::new(Chart::affine(name, vars))
    }

    fn ideal(chart: &Chart, gens: &[&str]) -> Ideal {
        Ideal::new(chart.nvars(), gens.iter().map(|g| chart.parse(g).unwrap()).collect())
    }

    fn pres(chart: &Arc<Chart>, rows: &[Vec<&str>]) -> Presentation {
        Presentation::new(MatrixHom::parse(chart.clone(), rows).unwrap())
    }

    #[test]
    fn fitting_ideals_of_a_single_relation() {
        let a1 = affine("A1", &["x"]);
        let p = pres(&a1, &[vec!["x"]]);
        let j0 = fitting_ideal(&p, 0).unwrap();
        assert!(ideal_equal(&j0, &ideal(&a1, &["x"]), &ORDER));
        let j1 = fitting_ideal(&p, 1).unwrap();
        assert!(j1.is_unit_ideal(&ORDER));
        let j2 = fitting_ideal(&p, 2).unwrap();
        assert!(j2.is_unit_ideal(&ORDER));
    }

    #[test]
    fn fitting_ideals_of_a_diagonal_presentation() {
        let a2 = affine("A2", &["x", "y"]);
        let p = pres(&a2, &[vec!["x", "0"], vec!["0", "y"]]);
        assert!(ideal_equal(&fitting_ideal(&p, 0).unwrap(), &ideal(&a2, &["x*y"]), &ORDER));
        assert!(ideal_equal(&fitting_ideal(&p, 1).unwrap(), &ideal(&a2, &["x", "y"]), &ORDER));
        assert!(fitting_ideal(&p, 2).unwrap().is_unit_ideal(&ORDER));
    }

    #[test]
    fn fitting_chain_is_increasing() {
        let a2 = affine("A2", &["x", "y"]);
        let p = pres(&a2, &[vec!["x", "y"], vec!["y", "x"]]);
        let mut prev: Option<Ideal> = None;
        for h in 0..=2 {
            let j = fitting_ideal(&p, h).unwrap();
            if let Some(smaller) = prev {
                for g in smaller.gens() {
                    assert!(j.contains(g, &ORDER), "J_{} must contain J_{}", h, h - 1);
                }
            }
            prev = Some(j);
        }
    }

    #[test]
    fn fitting_ideals_ignore_presentation_choice() {
        let a1 = affine("A1", &["x"]);
        let small = pres(&a1, &[vec!["x"]]);
        let padded = pres(&a1, &[vec!["x", "0"], vec!["0", "1"]]);
        assert!(fitting_independence_check(&small, &padded).unwrap());

        let a2 = affine("A2", &["x", "y"]);
        let diag = pres(&a2, &[vec!["x", "0"], vec!["0", "y"]]);
        let augmented = pres(&a2, &[vec!["x", "0", "0"], vec!["0", "y", "0"]]);
        assert!(fitting_independence_check(&diag, &augmented).unwrap());

        let xs = pres(&a1, &[vec!["x"]]);
        let xsq = pres(&a1, &[vec!["x^2"]]);
        assert!(!fitting_independence_check(&xs, &xsq).unwrap());
    }

    #[test]
    fn fitting_ideals_commute_with_base_change() {
        let a2 = affine("A2", &["x", "y"]);
        let leaf = affine("A2_x", &["x", "t"]);
        let m = RingMap::new(
            a2.clone(),
            leaf.clone(),
            vec![leaf.parse("x").unwrap(), leaf.parse("x*t").unwrap()],
        )
        .unwrap();
        let p = pres(&a2, &[vec!["x", "0"], vec!["0", "y"]]);
        let pulled = Presentation::new(pullback_hom(&m, &p.alpha).unwrap());
        for h in 0..=2 {
            let route_a = pull_ideal(&m, &fitting_ideal(&p, h).unwrap()).unwrap();
            let route_b = fitting_ideal(&pulled, h).unwrap();
            assert!(ideal_equal(&route_a, &route_b, &ORDER), "h = {h}");
        }
    }

    fn complex(chart: &Arc<Chart>, mats: &[&[Vec<&str>]]) -> ComplexOnChart {
        let terms: Vec<MatrixHom> =
            mats.iter().map(|rows| MatrixHom::parse(chart.clone(), rows).unwrap()).collect();
        ComplexOnChart::new(chart.clone(), terms).unwrap()
    }

    #[test]
    fn resolving_an_injective_diagonal() {
        let a2 = affine("A2", &["x", "y"]);
        let c = complex(&a2, &[&[vec!["x", "0"], vec!["0", "y"]]]);
        let r = resolve_complex(&c, &TowerOptions::default()).unwrap();
        assert_eq!(r.steps.len(), 1);
        assert_eq!(r.leaves.len(), 2);
        assert_eq!(r.cohomology_ranks, vec![0, 0]);
        assert!(torsion_check(&r));
        for leaf in &r.leaves {
            assert_eq!(leaf.kernel.rank, 0);
            assert!(verify_cert(&leaf.pulled.terms()[0], &leaf.certs[0]).is_ok());
        }
    }

    #[test]
    fn resolving_a_row_of_coordinates() {
        let a3 = affine("A3", &["x", "y", "z"]);
        let c = complex(&a3, &[&[vec!["x", "y", "z"]]]);
        let r = resolve_complex(&c, &TowerOptions::default()).unwrap();
        assert_eq!(r.leaves.len(), 3);
        assert_eq!(r.cohomology_ranks, vec![2, 0]);
        assert!(torsion_check(&r));

        let leaf = &r.leaves[0];
        assert_eq!(leaf.chart.vars(), ["x".to_string(), "t1".to_string(), "t2".to_string()]);
        assert_eq!(leaf.kernel.rank, 2);
        let expected_a = vec![
            leaf.chart.parse("-t1").unwrap(),
            Poly::one(3),
            Poly::zero(3),
        ];
        let expected_b = vec![
            leaf.chart.parse("-t2").unwrap(),
            Poly::zero(3),
            Poly::one(3),
        ];
        assert_eq!(leaf.kernel.vectors, vec![expected_a, expected_b]);
    }

    #[test]
    fn resolving_the_koszul_complex_of_the_plane() {
        let a2 = affine("A2", &["x", "y"]);
        let c = complex(&a2, &[&[vec!["x"], vec!["y"]], &[vec!["-y", "x"]]]);
        let r = resolve_complex(&c, &TowerOptions::default()).unwrap();
        assert_eq!(r.steps.len(), 1, "one blowup at level 1 suffices");
        assert_eq!(r.leaves.len(), 2);
        assert_eq!(r.cohomology_ranks, vec![0, 0, 0]);
        assert!(torsion_check(&r));
        for leaf in &r.leaves {
            assert_eq!(leaf.image_ranks, vec![1, 1]);
            for (level, cert) in leaf.certs.iter().enumerate() {
                assert!(
                    verify_cert(&leaf.pulled.terms()[level], cert).is_ok(),
                    "level {level} certificate must verify"
                );
            }
        }
    }

    #[test]
    fn zero_map_has_free_cohomology_everywhere() {
        let a1 = affine("A1", &["x"]);
        let c = complex(&a1, &[&[vec!["0"]]]);
        let r = resolve_complex(&c, &TowerOptions::default()).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(r.leaves.len(), 1);
        assert_eq!(r.cohomology_ranks, vec![1, 1]);
        assert!(!torsion_check(&r));
        assert_eq!(r.leaves[0].kernel.rank, 1);
    }

    #[test]
    fn resolvable_input_is_left_alone() {
        let a2 = affine("A2", &["x", "y"]);
        let c = complex(&a2, &[&[vec!["1", "0"], vec!["0", "1"]]]);
        let r = resolve_complex(&c, &TowerOptions::default()).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(r.leaves.len(), 1);
        assert!(same_ring(&r.leaves[0].chart, &a2));
        assert_eq!(r.cohomology_ranks, vec![0, 0]);
        assert_eq!(r.leaves[0].kernel.rank, 0);
    }

    #[test]
    fn base_change_against_itself() {
        let a2 = affine("A2", &["x", "y"]);
        let c = complex(&a2, &[&[vec!["x", "0"], vec!["0", "y"]]]);
        let r = resolve_complex(&c, &TowerOptions::default()).unwrap();
        let id = RingMap::identity(a2.clone());
        assert!(base_change_verify(&r, &id, &r).unwrap());
    }

    #[test]
    fn base_change_across_center_orders() {
        let a3 = affine("A3", &["x", "y", "z"]);
        let c = complex(&a3, &[&[vec!["x", "y", "z"]]]);
        let r1 = resolve_complex(&c, &TowerOptions::default()).unwrap();
        let opts = TowerOptions { center_order: CenterOrder::Reversed, ..Default::default() };
        let r2 = resolve_complex(&c, &opts).unwrap();
        let id = RingMap::identity(a3.clone());
        assert!(base_change_verify(&r1, &id, &r2).unwrap());
    }

    #[test]
    fn truncated_results_never_pass_silently() {
        let a2 = affine("A2", &["x", "y"]);
        let c = complex(&a2, &[&[vec!["x", "0"], vec!["0", "y"]]]);
        let r = resolve_complex(&c, &TowerOptions::default()).unwrap();
        let id = RingMap::identity(a2.clone());

        let mut truncated = r.clone();
        truncated.leaves.truncate(1);
        assert!(!base_change_verify(&r, &id, &truncated).unwrap());

        let mut empty = r.clone();
        empty.leaves.clear();
        assert!(matches!(base_change_verify(&r, &id, &empty), Err(Error::NoCommonLeaf)));
    }
}
