use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chart::{same_ring, Chart, Principality};
use crate::error::{Error, Result};
use crate::hom::{MatrixHom, PolyMat};
use crate::ideal::{Ideal, TrackedBasis};
use crate::order::MonomialOrder;
use crate::poly::{canonical_cmp, divide_multivariate, Monomial, Poly, Rational};

/// Default seed for the randomized pivot-mixing fallback; recorded in every
/// certificate so runs are reproducible.
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagOptions {
    pub seed: u64,
}

impl Default for DiagOptions {
    fn default() -> Self {
        DiagOptions { seed: DEFAULT_SEED }
    }
}

/// Verifiable witness that U * phi * V is diagonal with a divisibility
/// chain: diag holds the nonzero diagonal entries p_0 | p_1 | ... and the
/// complement block is zero. Determinants of U and V are units, so the
/// transformation is invertible over the chart ring.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagCert {
    pub chart: Arc<Chart>,
    pub u: PolyMat,
    pub v: PolyMat,
    pub diag: Vec<Poly>,
    pub u_det: Poly,
    pub v_det: Poly,
    pub seed: u64,
}

/// Columns of the source spanning the kernel of the diagonalized map.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis {
    pub vectors: Vec<Vec<Poly>>,
    pub rank: usize,
}

/// Reason a certificate failed verification, in check order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyFailure {
    /// Wrong dimensions or mismatched chart ring.
    ShapeMismatch,
    /// A recomputed determinant differs from the recorded one or is not a unit.
    NonUnitDet,
    /// U * phi * V does not equal the claimed diagonal matrix.
    DiagMismatch,
    /// A claimed diagonal entry vanishes modulo relations.
    ZeroDiagEntry,
    /// Some p_{i+1} is not a multiple of p_i in the chart ring.
    BrokenChain,
}

impl std::fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerifyFailure::ShapeMismatch => "ShapeMismatch",
            VerifyFailure::NonUnitDet => "NonUnitDet",
            VerifyFailure::DiagMismatch => "DiagMismatch",
            VerifyFailure::ZeroDiagEntry => "ZeroDiagEntry",
            VerifyFailure::BrokenChain => "BrokenChain",
        };
        f.write_str(s)
    }
}

/// Outcome of the staged reduction: either a full certificate or the first
/// stage whose entry ideal is not principal, with that ideal as the
/// suggested blowup center.
#[derive(Debug, Clone)]
pub enum ReduceOutcome {
    Done(DiagCert),
    Stuck { stage: usize, center: Ideal },
}

const ORDER: MonomialOrder = MonomialOrder::GrevLex;

/// In-place elementary operations on a matrix; every operation is also
/// mirrored into the accumulated transform so `U * phi * V` stays exact.
struct Stage<'a> {
    chart: &'a Chart,
    /// Physical working matrix, kept reduced modulo relations.
    w: PolyMat,
    u: PolyMat,
    v: PolyMat,
    /// Deflated block of the current stage (principal factors divided out),
    /// kept reduced; its top-left corner corresponds to (offset, offset) of w.
    block: PolyMat,
    offset: usize,
}

impl<'a> Stage<'a> {
    fn red(&self, p: &Poly) -> Poly {
        self.chart.reduce(p, &ORDER)
    }

    /// row dst += c * row src, applied to block, w and u.
    fn row_op(&mut self, dst: usize, src: usize, c: &Poly) {
        debug_assert_ne!(dst, src);
        for j in 0..self.block.cols() {
            let val = self.red(&(self.block.get(dst, j) + &(c * self.block.get(src, j))));
            self.block.set(dst, j, val);
        }
        let (wd, ws) = (self.offset + dst, self.offset + src);
        for j in 0..self.w.cols() {
            let val = self.red(&(self.w.get(wd, j) + &(c * self.w.get(ws, j))));
            self.w.set(wd, j, val);
        }
        for j in 0..self.u.cols() {
            let val = self.u.get(wd, j) + &(c * self.u.get(ws, j));
            self.u.set(wd, j, val);
        }
    }

    /// col dst += c * col src, applied to block, w and v.
    fn col_op(&mut self, dst: usize, src: usize, c: &Poly) {
        debug_assert_ne!(dst, src);
        for i in 0..self.block.rows() {
            let val = self.red(&(self.block.get(i, dst) + &(c * self.block.get(i, src))));
            self.block.set(i, dst, val);
        }
        let (wd, ws) = (self.offset + dst, self.offset + src);
        for i in 0..self.w.rows() {
            let val = self.red(&(self.w.get(i, wd) + &(c * self.w.get(i, ws))));
            self.w.set(i, wd, val);
        }
        for i in 0..self.v.rows() {
            let val = self.v.get(i, wd) + &(c * self.v.get(i, ws));
            self.v.set(i, wd, val);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.block.swap_rows(a, b);
        self.w.swap_rows(self.offset + a, self.offset + b);
        self.u.swap_rows(self.offset + a, self.offset + b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.block.swap_cols(a, b);
        self.w.swap_cols(self.offset + a, self.offset + b);
        self.v.swap_cols(self.offset + a, self.offset + b);
    }

    /// Scales row `r` of the block by the unit `c`.
    fn scale_row(&mut self, r: usize, c: &Poly) {
        for j in 0..self.block.cols() {
            let val = self.red(&(c * self.block.get(r, j)));
            self.block.set(r, j, val);
        }
        let wr = self.offset + r;
        for j in 0..self.w.cols() {
            let val = self.red(&(c * self.w.get(wr, j)));
            self.w.set(wr, j, val);
        }
        for j in 0..self.u.cols() {
            let val = c * self.u.get(wr, j);
            self.u.set(wr, j, val);
        }
    }

    /// First block entry that is a unit of the chart ring, scanning
    /// constants before general units.
    fn find_unit(&self) -> Option<(usize, usize)> {
        for i in 0..self.block.rows() {
            for j in 0..self.block.cols() {
                let e = self.block.get(i, j);
                if !e.is_zero() && e.is_constant() {
                    return Some((i, j));
                }
            }
        }
        if self.chart.relations().gens().is_empty() {
            return None;
        }
        for i in 0..self.block.rows() {
            for j in 0..self.block.cols() {
                let e = self.block.get(i, j);
                if !e.is_zero() && self.chart.is_unit(e, &ORDER) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// True when the chart is a pure polynomial ring and every block entry
    /// involves at most one shared variable, so Euclidean division applies.
    fn effectively_univariate(&self) -> bool {
        if !self.chart.relations().gens().is_empty() {
            return false;
        }
        let mut used: Option<usize> = None;
        for e in self.block.entries() {
            for (idx, flag) in e.support().iter().enumerate() {
                if !flag {
                    continue;
                }
                match used {
                    None => used = Some(idx),
                    Some(u) if u == idx => {}
                    Some(_) => return false,
                }
            }
        }
        true
    }

    /// Deterministic gcd-style reduction for univariate blocks: repeatedly
    /// reduce entries against the minimal-degree entry until a nonzero
    /// constant appears. Succeeds whenever the entries generate the unit
    /// ideal, which the caller's factoring step guarantees.
    fn euclidean_pivot(&mut self) -> Option<(usize, usize)> {
        let fuel = 64
            + self
                .block
                .entries()
                .iter()
                .filter_map(|e| e.total_degree())
                .sum::<u64>() as usize
                * 4;
        for _ in 0..fuel {
            let mut min: Option<(usize, usize, u64)> = None;
            for i in 0..self.block.rows() {
                for j in 0..self.block.cols() {
                    let e = self.block.get(i, j);
                    if e.is_zero() {
                        continue;
                    }
                    let d = e.total_degree().unwrap();
                    if min.map(|(_, _, md)| d < md).unwrap_or(true) {
                        min = Some((i, j, d));
                    }
                }
            }
            let (a, b, deg) = min?;
            if deg == 0 {
                return Some((a, b));
            }
            let pivot = self.block.get(a, b).clone();
            // Reduce an entry sharing the pivot row.
            if let Some(j) = (0..self.block.cols())
                .find(|&j| j != b && !self.block.get(a, j).is_zero())
            {
                let (quo, _rem) =
                    divide_multivariate(self.block.get(a, j), &[pivot.clone()], &ORDER)
                        .expect("pivot nonzero");
                self.col_op(j, b, &-&quo[0]);
                continue;
            }
            // Reduce an entry sharing the pivot column.
            if let Some(i) = (0..self.block.rows())
                .find(|&i| i != a && !self.block.get(i, b).is_zero())
            {
                let (quo, _rem) =
                    divide_multivariate(self.block.get(i, b), &[pivot.clone()], &ORDER)
                        .expect("pivot nonzero");
                self.row_op(i, a, &-&quo[0]);
                continue;
            }
            // Pivot row and column are otherwise clear; fold in a remote
            // nonzero entry so the next pass can reduce it.
            let mut remote = None;
            'search: for i in 0..self.block.rows() {
                for j in 0..self.block.cols() {
                    if i != a && j != b && !self.block.get(i, j).is_zero() {
                        remote = Some(i);
                        break 'search;
                    }
                }
            }
            match remote {
                Some(i) => self.row_op(a, i, &Poly::one(self.chart.nvars())),
                // The pivot is the only nonzero entry: its ideal is (pivot),
                // not the unit ideal, so no unit pivot exists.
                None => return None,
            }
        }
        None
    }

    /// Deterministic completion: an entry with a nonzero constant term
    /// becomes a unit when its non-constant part is an exact multiple of a
    /// partner in the same row or column, because subtracting that multiple
    /// leaves just the constant. Applies the first such operation found.
    fn completion_pivot(&mut self) -> Option<(usize, usize)> {
        let nvars = self.chart.nvars();
        let rows = self.block.rows();
        let cols = self.block.cols();
        for i in 0..rows {
            for j in 0..cols {
                let a = self.block.get(i, j).clone();
                if a.is_zero() || a.is_constant() {
                    continue;
                }
                let c0 = constant_term(&a);
                if c0.is_zero() {
                    continue;
                }
                let n = &a - &Poly::constant(nvars, c0);
                for k in 0..rows {
                    if k == i || self.block.get(k, j).is_zero() {
                        continue;
                    }
                    if let Some(q) = self.exact_quotient(&n, self.block.get(k, j)) {
                        self.row_op(i, k, &-&q);
                        return Some((i, j));
                    }
                }
                for k in 0..cols {
                    if k == j || self.block.get(i, k).is_zero() {
                        continue;
                    }
                    let b = self.block.get(i, k).clone();
                    if let Some(q) = self.exact_quotient(&n, &b) {
                        self.col_op(j, k, &-&q);
                        return Some((i, j));
                    }
                }
            }
        }
        None
    }

    /// Quotient q with n = q * b modulo the chart relations, if one exists.
    fn exact_quotient(&self, n: &Poly, b: &Poly) -> Option<Poly> {
        let mut divisors = vec![b.clone()];
        divisors.extend(self.chart.relations().gens().iter().cloned());
        let tracked = TrackedBasis::new(&divisors, &ORDER);
        let (cof, rem) = tracked.reduce(n);
        if rem.is_zero() {
            Some(cof[0].clone())
        } else {
            None
        }
    }

    fn is_unit_entry(&self, e: &Poly) -> bool {
        if e.is_zero() {
            return false;
        }
        if e.is_constant() {
            return true;
        }
        !self.chart.relations().gens().is_empty() && self.chart.is_unit(e, &ORDER)
    }

    /// Exhaustive search over single row or column operations with small
    /// multipliers (integers up to 3, alone or times one variable). Each
    /// candidate entry is evaluated without mutating the block; the first
    /// operation that produces a unit entry is applied.
    fn single_op_pivot(&mut self) -> Option<(usize, usize)> {
        let nvars = self.chart.nvars();
        let mut multipliers = Vec::new();
        for mag in 1..=3i64 {
            for sign in [1i64, -1] {
                multipliers.push(Poly::constant(nvars, crate::poly::rat_int(sign * mag)));
            }
        }
        for v in 0..nvars {
            for mag in 1..=3i64 {
                for sign in [1i64, -1] {
                    let c = crate::poly::rat_int(sign * mag);
                    multipliers.push(Poly::term(Monomial::var(nvars, v), c));
                }
            }
        }
        let rows = self.block.rows();
        let cols = self.block.cols();
        for dst in 0..rows {
            for src in 0..rows {
                if src == dst {
                    continue;
                }
                for c in &multipliers {
                    for j in 0..cols {
                        let cand =
                            self.red(&(self.block.get(dst, j) + &(c * self.block.get(src, j))));
                        if self.is_unit_entry(&cand) {
                            self.row_op(dst, src, c);
                            return Some((dst, j));
                        }
                    }
                }
            }
        }
        for dst in 0..cols {
            for src in 0..cols {
                if src == dst {
                    continue;
                }
                for c in &multipliers {
                    for i in 0..rows {
                        let cand =
                            self.red(&(self.block.get(i, dst) + &(c * self.block.get(i, src))));
                        if self.is_unit_entry(&cand) {
                            self.col_op(dst, src, c);
                            return Some((i, dst));
                        }
                    }
                }
            }
        }
        None
    }
}

fn constant_term(p: &Poly) -> Rational {
    for (m, c) in p.terms() {
        if m.is_one() {
            return c.clone();
        }
    }
    Rational::zero()
}

/// Staged factor-and-pivot reduction of `phi` on its chart. Each stage
/// extracts the principal generator of the deflated block's entry ideal,
/// divides it out, pivots a unit of the quotient block to the corner and
/// clears its row and column. Stops with `Stuck` at the first stage whose
/// entry ideal is not principal.
pub fn reduce(phi: &MatrixHom, opts: &DiagOptions) -> Result<ReduceOutcome> {
    let chart = phi.chart().clone();
    let nvars = chart.nvars();
    let (q, p) = (phi.rows(), phi.cols());
    let mut stage = Stage {
        chart: &chart,
        w: phi.mat().clone(),
        u: PolyMat::identity(q, nvars),
        v: PolyMat::identity(p, nvars),
        block: phi.mat().clone(),
        offset: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut diag: Vec<Poly> = Vec::new();

    loop {
        let r = stage.offset;
        if stage.block.is_zero() {
            break;
        }
        let mut gens: Vec<Poly> =
            stage.block.entries().iter().filter(|e| !e.is_zero()).cloned().collect();
        gens.sort_by(|a, b| canonical_cmp(b, a, &ORDER));
        gens.dedup();
        let center = Ideal::new(nvars, gens);
        let g = match chart.principality(&center, &ORDER) {
            Principality::Zero => unreachable!("nonzero block has nonzero entry ideal"),
            // An undecided test is handled like a non-principal one: the
            // suggested blowup is valid for any nonzero center, and on each
            // child the pulled center becomes principal, so the tower still
            // progresses. An undecided center always prunes to at least two
            // generators, because a single surviving generator would have
            // passed the principality test.
            Principality::NotPrincipal | Principality::Undecided => {
                return Ok(ReduceOutcome::Stuck { stage: r, center })
            }
            Principality::Principal(g) => g,
        };

        // Divide the block by g with tracked cofactors; exact by principality.
        let mut divisors = vec![g.clone()];
        divisors.extend(chart.relations().gens().iter().cloned());
        let tracked = TrackedBasis::new(&divisors, &ORDER);
        let reduced_block = stage.block.map(|e| {
            if e.is_zero() {
                return e.clone();
            }
            let (cof, rem) = tracked.reduce(e);
            assert!(rem.is_zero(), "entry must lie in the principal stage ideal");
            chart.reduce(&cof[0], &ORDER)
        });
        stage.block = reduced_block;

        // Locate a unit pivot: direct scan, Euclidean reduction on
        // univariate blocks, deterministic completion, exhaustive
        // single-operation search, then seeded random row/column mixing.
        let mut pivot = stage.find_unit();
        if pivot.is_none() && stage.effectively_univariate() {
            pivot = stage.euclidean_pivot();
        }
        if pivot.is_none() {
            pivot = stage.completion_pivot();
        }
        if pivot.is_none() {
            pivot = stage.single_op_pivot();
        }
        let mut attempts = 0;
        while pivot.is_none() && attempts < 3 {
            attempts += 1;
            mix(&mut stage, &mut rng);
            pivot = stage.find_unit();
            if pivot.is_none() && stage.effectively_univariate() {
                pivot = stage.euclidean_pivot();
            }
            if pivot.is_none() {
                pivot = stage.completion_pivot();
            }
            if pivot.is_none() {
                pivot = stage.single_op_pivot();
            }
        }
        let Some((pi, pj)) = pivot else {
            return Err(Error::NoUnitPivot { stage: r });
        };

        stage.swap_rows(0, pi);
        stage.swap_cols(0, pj);
        let unit = stage.block.get(0, 0).clone();
        let inv = chart
            .unit_inverse(&unit, &ORDER)
            .expect("pivot search returned a unit");
        stage.scale_row(0, &inv);
        debug_assert!(chart.eq_mod(stage.block.get(0, 0), &Poly::one(nvars), &ORDER));
        for i in 1..stage.block.rows() {
            let m = stage.block.get(i, 0).clone();
            if !m.is_zero() {
                stage.row_op(i, 0, &-&m);
            }
        }
        for j in 1..stage.block.cols() {
            let m = stage.block.get(0, j).clone();
            if !m.is_zero() {
                stage.col_op(j, 0, &-&m);
            }
        }

        diag.push(stage.w.get(r, r).clone());
        // Deflate: the next stage works on the complement block, with the
        // principal factor of this stage divided out.
        let rows: Vec<usize> = (1..stage.block.rows()).collect();
        let cols: Vec<usize> = (1..stage.block.cols()).collect();
        stage.block = stage.block.submatrix(&rows, &cols);
        stage.offset += 1;
    }

    // The physical complement of the diagonal must vanish.
    let m = diag.len();
    for i in 0..q {
        for j in 0..p {
            if i == j && i < m {
                continue;
            }
            assert!(
                stage.w.get(i, j).is_zero(),
                "complement of the diagonal must be zero after reduction"
            );
        }
    }

    // Canonicalize: scale each diagonal entry monic through its U row.
    let mut u = stage.u.map(|e| chart.reduce(e, &ORDER));
    for (r, d) in diag.iter_mut().enumerate() {
        let lead = d.leading(&ORDER).expect("diagonal entries are nonzero").1.clone();
        if !lead.is_one() {
            let inv = Poly::constant(nvars, lead.recip());
            *d = chart.reduce(&(&inv * d), &ORDER);
            for j in 0..q {
                let val = &inv * u.get(r, j);
                u.set(r, j, val);
            }
        }
    }
    let v = stage.v.map(|e| chart.reduce(e, &ORDER));
    let u_det = chart.reduce(&u.det()?, &ORDER);
    let v_det = chart.reduce(&v.det()?, &ORDER);
    debug_assert!(chart.is_unit(&u_det, &ORDER) && chart.is_unit(&v_det, &ORDER));
    Ok(ReduceOutcome::Done(DiagCert {
        chart,
        u,
        v,
        diag,
        u_det,
        v_det,
        seed: opts.seed,
    }))
}

/// One random row operation and one random column operation with small
/// nonzero integer coefficients, driven by the seeded generator.
fn mix(stage: &mut Stage<'_>, rng: &mut ChaCha8Rng) {
    let nvars = stage.chart.nvars();
    let rows = stage.block.rows();
    let cols = stage.block.cols();
    if rows >= 2 {
        let a = rng.gen_range(0..rows);
        let mut b = rng.gen_range(0..rows - 1);
        if b >= a {
            b += 1;
        }
        let c = random_coeff(rng, nvars);
        stage.row_op(a, b, &c);
    }
    if cols >= 2 {
        let a = rng.gen_range(0..cols);
        let mut b = rng.gen_range(0..cols - 1);
        if b >= a {
            b += 1;
        }
        let c = random_coeff(rng, nvars);
        stage.col_op(a, b, &c);
    }
}

fn random_coeff(rng: &mut ChaCha8Rng, nvars: usize) -> Poly {
    let magnitude = rng.gen_range(1..=3i64);
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    let c = crate::poly::rat_int(sign * magnitude);
    // Half the draws carry a degree-1 monomial so mixing can cancel
    // non-constant parts instead of only rescaling them.
    if nvars > 0 && rng.gen_bool(0.5) {
        let v = rng.gen_range(0..nvars);
        Poly::term(Monomial::var(nvars, v), c)
    } else {
        Poly::constant(nvars, c)
    }
}

fn render_ideal(chart: &Chart, ideal: &Ideal) -> String {
    ideal
        .gens()
        .iter()
        .map(|g| chart.render(g, &ORDER))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Full diagonalization on a chart where every stage ideal is principal;
/// stages whose ideal is not principal abort with `NotPrincipal`.
pub fn diagonalize_on_chart(phi: &MatrixHom, opts: &DiagOptions) -> Result<DiagCert> {
    match reduce(phi, opts)? {
        ReduceOutcome::Done(cert) => Ok(cert),
        ReduceOutcome::Stuck { stage, center } => Err(Error::NotPrincipal {
            stage,
            ideal: render_ideal(phi.chart(), &center),
        }),
    }
}

/// Verdict of attempting diagonalization without blowing up.
#[derive(Debug, Clone)]
pub enum DiagVerdict {
    Yes(Box<DiagCert>),
    No { stage: usize, ideal: Ideal },
}

pub fn is_locally_diagonalizable(phi: &MatrixHom, opts: &DiagOptions) -> Result<DiagVerdict> {
    match reduce(phi, opts)? {
        ReduceOutcome::Done(cert) => Ok(DiagVerdict::Yes(Box::new(cert))),
        ReduceOutcome::Stuck { stage, center } => Ok(DiagVerdict::No { stage, ideal: center }),
    }
}

/// Re-derives every certificate invariant by exact computation. The reasons
/// are ordered: shape, unit determinants, the diagonalization identity,
/// nonzero diagonal, divisibility chain.
pub fn verify_cert(phi: &MatrixHom, cert: &DiagCert) -> std::result::Result<(), VerifyFailure> {
    let chart = phi.chart();
    if !same_ring(chart, &cert.chart) {
        return Err(VerifyFailure::ShapeMismatch);
    }
    let (q, p) = (phi.rows(), phi.cols());
    if cert.u.rows() != q || cert.u.cols() != q || cert.v.rows() != p || cert.v.cols() != p {
        return Err(VerifyFailure::ShapeMismatch);
    }
    if cert.diag.len() > q.min(p) {
        return Err(VerifyFailure::ShapeMismatch);
    }

    let u_det = cert.u.det().map_err(|_| VerifyFailure::ShapeMismatch)?;
    let v_det = cert.v.det().map_err(|_| VerifyFailure::ShapeMismatch)?;
    if !chart.eq_mod(&u_det, &cert.u_det, &ORDER) || !chart.eq_mod(&v_det, &cert.v_det, &ORDER) {
        return Err(VerifyFailure::NonUnitDet);
    }
    if !chart.is_unit(&u_det, &ORDER) || !chart.is_unit(&v_det, &ORDER) {
        return Err(VerifyFailure::NonUnitDet);
    }

    let product = cert
        .u
        .mul(phi.mat())
        .and_then(|m| m.mul(&cert.v))
        .map_err(|_| VerifyFailure::ShapeMismatch)?;
    for i in 0..q {
        for j in 0..p {
            let expected = if i == j && i < cert.diag.len() {
                cert.diag[i].clone()
            } else {
                Poly::zero(chart.nvars())
            };
            if !chart.eq_mod(product.get(i, j), &expected, &ORDER) {
                return Err(VerifyFailure::DiagMismatch);
            }
        }
    }

    for d in &cert.diag {
        if chart.is_zero_mod(d, &ORDER) {
            return Err(VerifyFailure::ZeroDiagEntry);
        }
    }

    for pair in cert.diag.windows(2) {
        let mut gens = vec![pair[0].clone()];
        gens.extend(chart.relations().gens().iter().cloned());
        let ideal = Ideal::new(chart.nvars(), gens);
        if !ideal.contains(&pair[1], &ORDER) {
            return Err(VerifyFailure::BrokenChain);
        }
    }
    Ok(())
}

/// The last p - m columns of V: a free basis of the kernel of the
/// diagonalized map on an integral chart.
pub fn kernel_basis(cert: &DiagCert) -> KernelBasis {
    let p = cert.v.cols();
    let m = cert.diag.len();
    let vectors: Vec<Vec<Poly>> = (m..p)
        .map(|j| (0..p).map(|i| cert.v.get(i, j).clone()).collect())
        .collect();
    KernelBasis { rank: p - m, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hom::pullback_hom;
    use crate::chart::RingMap;

    fn opts() -> DiagOptions {
        DiagOptions::default()
    }

    fn affine(name: &str, vars: &[&str]) -> Arc<Chart> {
        Arc::new(Chart::affine(name, vars))
    }

    #[test]
    fn identity_diagonalizes_trivially() {
        let c = affine("A2", &["x", "y"]);
        let phi = MatrixHom::new(c.clone(), PolyMat::identity(3, 2)).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
        assert_eq!(cert.u, PolyMat::identity(3, 2));
        assert_eq!(cert.v, PolyMat::identity(3, 2));
        assert_eq!(cert.diag, vec![Poly::one(2), Poly::one(2), Poly::one(2)]);
        assert!(verify_cert(&phi, &cert).is_ok());
    }

    #[test]
    fn leaf_matrix_diag_x_xt() {
        let c = affine("A2_x", &["x", "t"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["x", "0"], vec!["0", "x*t"]]).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
        assert_eq!(cert.diag, vec![c.parse("x").unwrap(), c.parse("x*t").unwrap()]);
        assert!(verify_cert(&phi, &cert).is_ok());
    }

    #[test]
    fn four_dim_leaf_produces_schur_complement() {
        let c = affine("A4_x", &["x", "a", "b", "c"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["x", "x*a"], vec!["x*b", "x*c"]]).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
        assert_eq!(
            cert.diag,
            vec![c.parse("x").unwrap(), c.parse("x*a*b - x*c").unwrap()]
        );
        assert!(cert.diag[1].associate_ratio(&c.parse("x*c - x*a*b").unwrap()).is_some());
        assert!(verify_cert(&phi, &cert).is_ok());
    }

    #[test]
    fn row_vector_kernel() {
        let c = affine("A2_x", &["x", "t"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["x", "x*t"]]).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
        assert_eq!(cert.diag, vec![c.parse("x").unwrap()]);
        let kernel = kernel_basis(&cert);
        assert_eq!(kernel.rank, 1);
        let v = &kernel.vectors[0];
        let image = &(phi.entry(0, 0) * &v[0]) + &(phi.entry(0, 1) * &v[1]);
        assert!(image.is_zero());
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let c = affine("A1", &["x"]);
        let phi = MatrixHom::new(c, PolyMat::zero(2, 3, 1)).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
        assert!(cert.diag.is_empty());
        let kernel = kernel_basis(&cert);
        assert_eq!(kernel.rank, 3);
        assert_eq!(kernel.vectors.len(), 3);
        assert!(verify_cert(&phi, &cert).is_ok());
    }

    #[test]
    fn nonprincipal_stage_reports_center() {
        let c = affine("A2", &["x", "y"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["x", "0"], vec!["0", "y"]]).unwrap();
        match reduce(&phi, &opts()).unwrap() {
            ReduceOutcome::Stuck { stage, center } => {
                assert_eq!(stage, 0);
                let expected =
                    Ideal::new(2, vec![c.parse("x").unwrap(), c.parse("y").unwrap()]);
                assert!(crate::ideal::ideal_equal(&center, &expected, &ORDER));
            }
            ReduceOutcome::Done(_) => panic!("diag(x, y) must be stuck at stage 0"),
        }
        assert!(matches!(
            diagonalize_on_chart(&phi, &opts()),
            Err(Error::NotPrincipal { stage: 0, .. })
        ));
    }

    #[test]
    fn univariate_chain() {
        let c = affine("A1", &["x"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["x", "0"], vec!["0", "x^2"]]).unwrap();
        let verdict = is_locally_diagonalizable(&phi, &opts()).unwrap();
        match verdict {
            DiagVerdict::Yes(cert) => {
                assert_eq!(cert.diag, vec![c.parse("x").unwrap(), c.parse("x^2").unwrap()]);
                assert!(verify_cert(&phi, &cert).is_ok());
            }
            DiagVerdict::No { .. } => panic!("univariate matrices always diagonalize"),
        }
    }

    #[test]
    fn coprime_entries_need_column_mixing() {
        let c = affine("A1", &["t"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["t", "0"], vec!["0", "t + 1"]]).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
        assert_eq!(cert.diag.len(), 2);
        // Invariant factors of diag(t, t+1) are 1 and t(t+1) up to units.
        assert!(cert.diag[0].is_constant());
        let product = c.parse("t^2 + t").unwrap();
        assert!(cert.diag[1].associate_ratio(&product).is_some());
        assert!(verify_cert(&phi, &cert).is_ok());
    }

    #[test]
    fn unit_entry_ideal_with_no_unit_entry() {
        let c = affine("A1", &["t"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["t", "t + 1"]]).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
        assert_eq!(cert.diag.len(), 1);
        assert!(cert.diag[0].is_constant());
        assert!(verify_cert(&phi, &cert).is_ok());
    }

    #[test]
    fn quotient_chart_units_are_found() {
        let rel = crate::parse::parse_poly("x*y - 1", &["x".into(), "y".into()]).unwrap();
        let torus =
            Arc::new(Chart::new("torus", vec!["x".into(), "y".into()], vec![rel]).unwrap());
        let phi = MatrixHom::parse(torus.clone(), &[vec!["x", "0"], vec!["0", "x"]]).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
        assert_eq!(cert.diag.len(), 2);
        for d in &cert.diag {
            assert!(torus.is_unit(d, &ORDER));
        }
        assert!(verify_cert(&phi, &cert).is_ok());
    }

    #[test]
    fn tampered_certificates_fail_with_ordered_reasons() {
        let c = affine("A2_x", &["x", "t"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["x", "0"], vec!["0", "x*t"]]).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();

        let mut diag_tampered = cert.clone();
        diag_tampered.diag[1] = c.parse("x*t + 1").unwrap();
        assert_eq!(verify_cert(&phi, &diag_tampered), Err(VerifyFailure::DiagMismatch));

        let mut u_tampered = cert.clone();
        let mut u = u_tampered.u.clone();
        u.set(0, 0, c.parse("x").unwrap());
        u_tampered.u = u;
        assert_eq!(verify_cert(&phi, &u_tampered), Err(VerifyFailure::NonUnitDet));

        let mut shape_tampered = cert.clone();
        shape_tampered.diag.push(c.parse("x").unwrap());
        shape_tampered.diag.push(c.parse("x").unwrap());
        shape_tampered.diag.push(c.parse("x").unwrap());
        assert_eq!(verify_cert(&phi, &shape_tampered), Err(VerifyFailure::ShapeMismatch));
    }

    #[test]
    fn broken_chain_is_detected() {
        // Hand-build a certificate for diag(x^2, x) with the chain reversed.
        let c = affine("A1", &["x"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["x^2", "0"], vec!["0", "x"]]).unwrap();
        let cert = DiagCert {
            chart: c.clone(),
            u: PolyMat::identity(2, 1),
            v: PolyMat::identity(2, 1),
            diag: vec![c.parse("x^2").unwrap(), c.parse("x").unwrap()],
            u_det: Poly::one(1),
            v_det: Poly::one(1),
            seed: DEFAULT_SEED,
        };
        assert_eq!(verify_cert(&phi, &cert), Err(VerifyFailure::BrokenChain));
    }

    #[test]
    fn pulled_back_certificates_stay_valid() {
        let c = affine("A2_x", &["x", "t"]);
        let phi = MatrixHom::parse(c.clone(), &[vec!["x", "0"], vec!["0", "x*t"]]).unwrap();
        let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
        let tgt = affine("A2_xt", &["x", "s"]);
        let m = RingMap::new(
            c,
            tgt.clone(),
            vec![tgt.parse("x").unwrap(), tgt.parse("x*s").unwrap()],
        )
        .unwrap();
        let pulled_phi = pullback_hom(&m, &phi).unwrap();
        let pulled_cert = DiagCert {
            chart: tgt.clone(),
            u: pull_mat(&m, &cert.u),
            v: pull_mat(&m, &cert.v),
            diag: cert.diag.iter().map(|d| m.apply(d).unwrap()).collect(),
            u_det: m.apply(&cert.u_det).unwrap(),
            v_det: m.apply(&cert.v_det).unwrap(),
            seed: cert.seed,
        };
        assert!(verify_cert(&pulled_phi, &pulled_cert).is_ok());
    }

    fn pull_mat(m: &RingMap, mat: &PolyMat) -> PolyMat {
        PolyMat::from_fn(mat.rows(), mat.cols(), m.target().nvars(), |r, c| {
            m.apply(mat.get(r, c)).unwrap()
        })
    }

    #[test]
    fn same_seed_reproduces_certificates() {
        let c = affine("A1", &["t"]);
        let phi = MatrixHom::parse(
            c,
            &[vec!["t^2 + 1", "t", "0"], vec!["t", "t + 3", "t^2"], vec!["1 - t", "2", "t^3"]],
        )
        .unwrap();
        let a = diagonalize_on_chart(&phi, &opts()).unwrap();
        let b = diagonalize_on_chart(&phi, &opts()).unwrap();
        assert_eq!(a, b);
        assert!(verify_cert(&phi, &a).is_ok());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(20))]

        /// Univariate matrices always diagonalize with a valid certificate
        /// whose diagonal obeys the divisibility chain.
        #[test]
        fn univariate_always_diagonalizes(entries in arb_univariate_entries(6)) {
            let c = affine("A1", &["t"]);
            let mat = PolyMat::new(2, 3, entries).unwrap();
            let phi = MatrixHom::new(c, mat).unwrap();
            let cert = diagonalize_on_chart(&phi, &opts()).unwrap();
            proptest::prop_assert!(verify_cert(&phi, &cert).is_ok());
            let kernel = kernel_basis(&cert);
            proptest::prop_assert_eq!(kernel.rank, 3 - cert.diag.len());
            for v in &kernel.vectors {
                for row in 0..phi.rows() {
                    let mut acc = Poly::zero(1);
                    for (col, entry) in v.iter().enumerate() {
                        acc = &acc + &(phi.entry(row, col) * entry);
                    }
                    proptest::prop_assert!(acc.is_zero());
                }
            }
        }
    }

    fn arb_univariate_entries(n: usize) -> impl proptest::strategy::Strategy<Value = Vec<Poly>> {
        use proptest::prelude::*;
        proptest::collection::vec(
            proptest::collection::vec((-3i64..4).prop_map(crate::poly::rat_int), 0..4).prop_map(
                |coeffs| {
                    Poly::from_terms(
                        1,
                        coeffs
                            .into_iter()
                            .enumerate()
                            .map(|(i, c)| (crate::poly::Monomial::new(vec![i as u32]), c)),
                    )
                },
            ),
            n..=n,
        )
    }
}
