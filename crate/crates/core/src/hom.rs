use std::sync::Arc;

use itertools::Itertools;
use num_traits::Zero;

use crate::chart::{pull_ideal, same_ring, Chart, RingMap};
use crate::error::{Error, Result};
use crate::ideal::{ideal_equal, Ideal};
use crate::order::MonomialOrder;
use crate::poly::{canonical_cmp, Poly, Rational};

/// Dense row-major matrix of polynomials in one ring context. Determinants
/// and adjugates are exact; intended for the small ranks of this kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMat {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Poly>,
}

impl PolyMat {
    pub fn new(rows: usize, cols: usize, entries: Vec<Poly>) -> Result<PolyMat> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let nvars = entries.first().map(Poly::nvars).unwrap_or(0);
        for e in &entries {
            if e.nvars() != nvars {
                return Err(Error::ContextMismatch { expected: nvars, found: e.nvars() });
            }
        }
        Ok(PolyMat { rows, cols, nvars, entries })
    }

    pub fn from_fn<F>(rows: usize, cols: usize, nvars: usize, f: F) -> PolyMat
    where
        F: Fn(usize, usize) -> Poly,
    {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let e = f(r, c);
                assert_eq!(e.nvars(), nvars);
                entries.push(e);
            }
        }
        PolyMat { rows, cols, nvars, entries }
    }

    pub fn zero(rows: usize, cols: usize, nvars: usize) -> PolyMat {
        PolyMat::from_fn(rows, cols, nvars, |_, _| Poly::zero(nvars))
    }

    pub fn identity(n: usize, nvars: usize) -> PolyMat {
        PolyMat::from_fn(n, n, nvars, |r, c| {
            if r == c {
                Poly::one(nvars)
            } else {
                Poly::zero(nvars)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Poly) {
        assert_eq!(p.nvars(), self.nvars);
        self.entries[r * self.cols + c] = p;
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn map<F>(&self, f: F) -> PolyMat
    where
        F: Fn(&Poly) -> Poly,
    {
        let entries: Vec<Poly> = self.entries.iter().map(f).collect();
        let nvars = entries.first().map(Poly::nvars).unwrap_or(self.nvars);
        PolyMat { rows: self.rows, cols: self.cols, nvars, entries }
    }

    pub fn transpose(&self) -> PolyMat {
        PolyMat::from_fn(self.cols, self.rows, self.nvars, |r, c| self.get(c, r).clone())
    }

    pub fn mul(&self, other: &PolyMat) -> Result<PolyMat> {
        if self.cols != other.rows {
            return Err(Error::InvalidArgument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.nvars != other.nvars && self.cols > 0 && other.cols > 0 {
            return Err(Error::ContextMismatch { expected: self.nvars, found: other.nvars });
        }
        Ok(PolyMat::from_fn(self.rows, other.cols, self.nvars, |r, c| {
            let mut acc = Poly::zero(self.nvars);
            for k in 0..self.cols {
                acc = &acc + &(self.get(r, k) * other.get(k, c));
            }
            acc
        }))
    }

    pub fn add(&self, other: &PolyMat) -> Result<PolyMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidArgument("matrix shape mismatch in add".into()));
        }
        Ok(PolyMat::from_fn(self.rows, self.cols, self.nvars, |r, c| {
            self.get(r, c) + other.get(r, c)
        }))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.entries.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// Submatrix on the given row and column indices, in the given order.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> PolyMat {
        PolyMat::from_fn(row_idx.len(), col_idx.len(), self.nvars, |r, c| {
            self.get(row_idx[r], col_idx[c]).clone()
        })
    }

    /// Exact determinant by cofactor expansion along the sparsest row.
    pub fn det(&self) -> Result<Poly> {
        if self.rows != self.cols {
            return Err(Error::InvalidArgument("determinant of a non-square matrix".into()));
        }
        Ok(det_inner(self))
    }

    /// Adjugate: `self * adjugate = det * identity`, exactly.
    pub fn adjugate(&self) -> Result<PolyMat> {
        if self.rows != self.cols {
            return Err(Error::InvalidArgument("adjugate of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(PolyMat::zero(0, 0, self.nvars));
        }
        let all: Vec<usize> = (0..n).collect();
        Ok(PolyMat::from_fn(n, n, self.nvars, |r, c| {
            // Entry (r, c) of the adjugate is the (c, r) cofactor.
            let rows: Vec<usize> = all.iter().copied().filter(|&i| i != c).collect();
            let cols: Vec<usize> = all.iter().copied().filter(|&j| j != r).collect();
            let minor = det_inner(&self.submatrix(&rows, &cols));
            if (r + c) % 2 == 0 {
                minor
            } else {
                -&minor
            }
        }))
    }

    /// All k x k minors, rows and columns enumerated in lexicographic index
    /// order. Empty when k exceeds either dimension. The determinants are
    /// independent, so they fan out across threads when the `parallel`
    /// feature is on; the output order is index order either way.
    pub fn minors(&self, k: usize) -> Vec<Poly> {
        if k == 0 || k > self.rows || k > self.cols {
            return Vec::new();
        }
        let mut picks = Vec::new();
        for row_idx in (0..self.rows).combinations(k) {
            for col_idx in (0..self.cols).combinations(k) {
                picks.push((row_idx.clone(), col_idx));
            }
        }
        crate::par::map_collect(&picks, |(rows, cols)| det_inner(&self.submatrix(rows, cols)))
    }
}

fn det_inner(m: &PolyMat) -> Poly {
    let n = m.rows();
    match n {
        0 => Poly::one(m.nvars()),
        1 => m.get(0, 0).clone(),
        2 => &(m.get(0, 0) * m.get(1, 1)) - &(m.get(0, 1) * m.get(1, 0)),
        _ => {
            // Expand along the row with the most zero entries.
            let best_row = (0..n)
                .max_by_key(|&r| (0..n).filter(|&c| m.get(r, c).is_zero()).count())
                .unwrap();
            let all: Vec<usize> = (0..n).collect();
            let sub_rows: Vec<usize> = all.iter().copied().filter(|&r| r != best_row).collect();
            let mut acc = Poly::zero(m.nvars());
            for c in 0..n {
                let pivot = m.get(best_row, c);
                if pivot.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> = all.iter().copied().filter(|&j| j != c).collect();
                let minor = det_inner(&m.submatrix(&sub_rows, &sub_cols));
                let signed = if (best_row + c) % 2 == 0 { minor } else { -&minor };
                acc = &acc + &(pivot * &signed);
            }
            acc
        }
    }
}

/// Exact rank of a rational matrix by Gaussian elimination.
pub fn rational_rank(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let pivot = (row..rows).find(|&r| !m[r][col].is_zero());
        let Some(p) = pivot else { continue };
        m.swap(row, p);
        let inv = m[row][col].clone().recip();
        for c in col..cols {
            let v = &m[row][c] * &inv;
            m[row][c] = v;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..cols {
                    let v = &m[r][c] - &(&factor * &m[row][c]);
                    m[r][c] = v;
                }
            }
        }
        row += 1;
        rank += 1;
    }
    rank
}

const MAX_MINOR: usize = 6;

/// Homomorphism of free modules over a chart, stored as a target-rank by
/// source-rank matrix; column i holds the image of source basis vector i.
/// Entries are kept reduced modulo the chart relations.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixHom {
    chart: Arc<Chart>,
    mat: PolyMat,
}

impl MatrixHom {
    pub fn new(chart: Arc<Chart>, mat: PolyMat) -> Result<MatrixHom> {
        if mat.nvars() != chart.nvars() && mat.entries().iter().any(|e| !e.is_zero()) {
            return Err(Error::ContextMismatch { expected: chart.nvars(), found: mat.nvars() });
        }
        let order = MonomialOrder::GrevLex;
        let reduced = PolyMat::from_fn(mat.rows(), mat.cols(), chart.nvars(), |r, c| {
            chart.reduce(mat.get(r, c), &order)
        });
        Ok(MatrixHom { chart, mat: reduced })
    }

    pub fn from_rows(chart: Arc<Chart>, rows: Vec<Vec<Poly>>) -> Result<MatrixHom> {
        let nrows = rows.len();
        let ncols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        let entries: Vec<Poly> = rows.into_iter().flatten().collect();
        let mat = PolyMat::new(nrows, ncols, entries)?;
        MatrixHom::new(chart, mat)
    }

    /// Parses a row-major grid of polynomial strings over the chart.
    pub fn parse(chart: Arc<Chart>, rows: &[Vec<&str>]) -> Result<MatrixHom> {
        let parsed: Vec<Vec<Poly>> = rows
            .iter()
            .map(|row| row.iter().map(|s| chart.parse(s)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        MatrixHom::from_rows(chart, parsed)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn mat(&self) -> &PolyMat {
        &self.mat
    }

    /// Target rank (number of rows).
    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    /// Source rank (number of columns).
    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    pub fn entry(&self, r: usize, c: usize) -> &Poly {
        self.mat.get(r, c)
    }

    /// Ideal of all (r+1) x (r+1) minors plus the chart relations. When no
    /// minors of that size exist the result is just the relations ideal.
    pub fn determinantal_ideal(&self, r: usize) -> Result<Ideal> {
        let size = r + 1;
        if size > MAX_MINOR {
            return Err(Error::MinorTooLarge { size });
        }
        let order = MonomialOrder::GrevLex;
        let mut gens: Vec<Poly> = self
            .mat
            .minors(size)
            .into_iter()
            .map(|m| self.chart.reduce(&m, &order))
            .filter(|m| !m.is_zero())
            .collect();
        gens.sort_by(|a, b| canonical_cmp(b, a, &order));
        gens.dedup();
        gens.extend(self.chart.relations().gens().iter().cloned());
        Ok(Ideal::new(self.chart.nvars(), gens))
    }

    /// Largest r such that some r x r minor is nonzero modulo relations;
    /// the generic pointwise rank on an integral chart.
    pub fn image_rank(&self) -> Result<usize> {
        let bound = self.mat.rows().min(self.mat.cols());
        if bound > MAX_MINOR {
            return Err(Error::MinorTooLarge { size: bound });
        }
        let order = MonomialOrder::GrevLex;
        for r in (1..=bound).rev() {
            let has_nonzero = self
                .mat
                .minors(r)
                .into_iter()
                .any(|m| !self.chart.is_zero_mod(&m, &order));
            if has_nonzero {
                return Ok(r);
            }
        }
        Ok(0)
    }

    /// True iff the evaluated matrix at the point has the generic rank.
    pub fn is_regular_point(&self, point: &[Rational]) -> Result<bool> {
        if !self.chart.contains_point(point)? {
            return Err(Error::PointOffChart);
        }
        let numeric: Vec<Vec<Rational>> = (0..self.mat.rows())
            .map(|r| (0..self.mat.cols()).map(|c| self.mat.get(r, c).eval(point)).collect())
            .collect();
        Ok(rational_rank(numeric) == self.image_rank()?)
    }

    /// Block-diagonal direct sum on a shared chart.
    pub fn direct_sum(&self, other: &MatrixHom) -> Result<MatrixHom> {
        if !same_ring(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        let (q1, p1) = (self.rows(), self.cols());
        let (q2, p2) = (other.rows(), other.cols());
        let nvars = self.chart.nvars();
        let mat = PolyMat::from_fn(q1 + q2, p1 + p2, nvars, |r, c| {
            if r < q1 && c < p1 {
                self.entry(r, c).clone()
            } else if r >= q1 && c >= p1 {
                other.entry(r - q1, c - p1).clone()
            } else {
                Poly::zero(nvars)
            }
        });
        MatrixHom::new(self.chart.clone(), mat)
    }
}

/// Entrywise image of the matrix under a ring map out of its chart.
pub fn pullback_hom(m: &RingMap, phi: &MatrixHom) -> Result<MatrixHom> {
    if !same_ring(phi.chart(), m.source()) {
        return Err(Error::ChartMismatch);
    }
    let mut entries = Vec::with_capacity(phi.rows() * phi.cols());
    for r in 0..phi.rows() {
        for c in 0..phi.cols() {
            entries.push(m.apply(phi.entry(r, c))?);
        }
    }
    let mat = PolyMat::new(phi.rows(), phi.cols(), entries)?;
    MatrixHom::new(m.target().clone(), mat)
}

/// The base-change identity for determinantal ideals: pulling back the
/// matrix and then taking minors agrees with pulling back the minor ideal.
pub fn base_change_check(m: &RingMap, phi: &MatrixHom, r: usize) -> Result<bool> {
    let pulled_hom = pullback_hom(m, phi)?;
    let lhs = pulled_hom.determinantal_ideal(r)?;
    let rhs = pull_ideal(m, &phi.determinantal_ideal(r)?)?;
    Ok(ideal_equal(&lhs, &rhs, &MonomialOrder::GrevLex))
}

/// Bounded complex of free modules on one chart: maps psi_0, ..., psi_{n-1}
/// with matching ranks and vanishing consecutive composites.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOnChart {
    chart: Arc<Chart>,
    terms: Vec<MatrixHom>,
}

impl ComplexOnChart {
    pub fn new(chart: Arc<Chart>, terms: Vec<MatrixHom>) -> Result<ComplexOnChart> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("complex needs at least one map".into()));
        }
        for t in &terms {
            if !same_ring(t.chart(), &chart) {
                return Err(Error::ChartMismatch);
            }
        }
        for w in terms.windows(2) {
            if w[1].cols() != w[0].rows() {
                return Err(Error::InvalidArgument(format!(
                    "rank mismatch in complex: map into rank {} followed by map from rank {}",
                    w[0].rows(),
                    w[1].cols()
                )));
            }
            let composite = w[1].mat().mul(w[0].mat())?;
            let order = MonomialOrder::GrevLex;
            if composite.entries().iter().any(|e| !chart.is_zero_mod(e, &order)) {
                return Err(Error::InvalidArgument(
                    "consecutive maps do not compose to zero".into(),
                ));
            }
        }
        Ok(ComplexOnChart { chart, terms })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn terms(&self) -> &[MatrixHom] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Ranks of the free modules F_0, ..., F_n.
    pub fn ranks(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.terms.iter().map(MatrixHom::cols).collect();
        out.push(self.terms.last().unwrap().rows());
        out
    }

    /// Entrywise pullback of the whole complex; re-checks the composite-zero
    /// invariant on the target chart.
    pub fn pullback(&self, m: &RingMap) -> Result<ComplexOnChart> {
        let terms: Vec<MatrixHom> =
            self.terms.iter().map(|t| pullback_hom(m, t)).collect::<Result<_>>()?;
        ComplexOnChart::new(m.target().clone(), terms)
    }
}
