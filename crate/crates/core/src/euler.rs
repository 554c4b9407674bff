//! Euler numbers of certified kernels on the toy geometries: graded kernel
//! splitting on the projective line, intersection arithmetic on the plane
//! and its point blowups, and the independence harness that replays a
//! problem under permuted inputs.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::hom::{MatrixHom, PolyMat};
use crate::ideal::{saturate, Ideal, TrackedBasis};
use crate::order::MonomialOrder;
use crate::poly::{Monomial, Poly, Rational};

const ORDER: MonomialOrder = MonomialOrder::GrevLex;

pub const DEFAULT_DEGREE_CAP: i64 = 40;

/// A map of graded free modules over the homogeneous coordinate ring of the
/// projective line: column i carries twist `source_twists[i]`, row j twist
/// `target_twists[j]`, and entry (j, i) is a form of degree
/// `target_twists[j] - source_twists[i]` (zero when that is negative).
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMatrix {
    source_twists: Vec<i64>,
    target_twists: Vec<i64>,
    mat: PolyMat,
}

fn homogeneous_degree(p: &Poly) -> Option<u64> {
    let mut deg = None;
    for (m, _) in p.terms() {
        match deg {
            None => deg = Some(m.deg()),
            Some(d) if d == m.deg() => {}
            Some(_) => return None,
        }
    }
    deg
}

impl GradedMatrix {
    pub fn new(source_twists: Vec<i64>, target_twists: Vec<i64>, mat: PolyMat) -> Result<GradedMatrix> {
        if source_twists.is_empty() || target_twists.is_empty() {
            return Err(Error::InvalidArgument("graded matrix needs at least one row and column".into()));
        }
        if mat.rows() != target_twists.len() || mat.cols() != source_twists.len() {
            return Err(Error::InvalidArgument("twist lists do not match the matrix shape".into()));
        }
        if mat.nvars() != 2 {
            return Err(Error::InvalidArgument("graded entries must live in two variables".into()));
        }
        for j in 0..mat.rows() {
            for i in 0..mat.cols() {
                let entry = mat.get(j, i);
                if entry.is_zero() {
                    continue;
                }
                let want = target_twists[j] - source_twists[i];
                match homogeneous_degree(entry) {
                    Some(d) if want >= 0 && d == want as u64 => {}
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "entry ({j}, {i}) is not homogeneous of degree {want}"
                        )))
                    }
                }
            }
        }
        Ok(GradedMatrix { source_twists, target_twists, mat })
    }

    pub fn parse(source_twists: Vec<i64>, target_twists: Vec<i64>, rows: &[Vec<&str>]) -> Result<GradedMatrix> {
        let chart = Arc::new(Chart::affine("P1", &["s", "t"]));
        let hom = MatrixHom::parse(chart, rows)?;
        GradedMatrix::new(source_twists, target_twists, hom.mat().clone())
    }

    pub fn source_twists(&self) -> &[i64] {
        &self.source_twists
    }

    pub fn target_twists(&self) -> &[i64] {
        &self.target_twists
    }

    pub fn mat(&self) -> &PolyMat {
        &self.mat
    }

    /// Generic rank, via the largest size of a nonvanishing minor.
    pub fn image_rank(&self) -> Result<usize> {
        let chart = Arc::new(Chart::affine("P1", &["s", "t"]));
        MatrixHom::new(chart, self.mat.clone())?.image_rank()
    }
}

fn piece_dim(d: i64) -> usize {
    if d < 0 {
        0
    } else {
        d as usize + 1
    }
}

/// Column labels of the degree-n piece of the graded source module: one
/// coordinate per column i and s-exponent e of a monomial of degree
/// n + source_twist(i).
fn source_layout(twists: &[i64], n: i64) -> Vec<(usize, u32)> {
    let mut layout = Vec::new();
    for (i, a) in twists.iter().enumerate() {
        let d = n + a;
        if d < 0 {
            continue;
        }
        for e in 0..=d as u32 {
            layout.push((i, e));
        }
    }
    layout
}

/// Matrix of the degree-n piece of the graded map, rows indexed by target
/// coordinates (j, s-exponent), columns by `source_layout`.
fn degree_matrix(m: &GradedMatrix, n: i64) -> (Vec<Vec<Rational>>, Vec<(usize, u32)>) {
    let layout = source_layout(&m.source_twists, n);
    let mut row_offset = Vec::with_capacity(m.target_twists.len());
    let mut total_rows = 0usize;
    for b in &m.target_twists {
        row_offset.push(total_rows);
        total_rows += piece_dim(n + b);
    }
    let mut rows = vec![vec![Rational::zero(); layout.len()]; total_rows];
    for (col, &(i, e)) in layout.iter().enumerate() {
        let d = (n + m.source_twists[i]) as u32;
        let mono = Poly::term(Monomial::new(vec![e, d - e]), Rational::one());
        for (j, b) in m.target_twists.iter().enumerate() {
            if n + b < 0 {
                continue;
            }
            let prod = &mono * m.mat.get(j, i);
            for (mon, c) in prod.terms() {
                let u = mon.exps()[0] as usize;
                rows[row_offset[j] + u][col] = c.clone();
            }
        }
    }
    (rows, layout)
}

/// In-place fraction-free-ish Gauss-Jordan; returns the pivot columns.
fn rref(rows: &mut Vec<Vec<Rational>>) -> Vec<usize> {
    let mut pivots = Vec::new();
    if rows.is_empty() {
        return pivots;
    }
    let width = rows[0].len();
    let mut r = 0usize;
    for c in 0..width {
        let Some(p) = (r..rows.len()).find(|&p| !rows[p][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = &*x / &lead;
        }
        for p in 0..rows.len() {
            if p != r && !rows[p][c].is_zero() {
                let f = rows[p][c].clone();
                for c2 in 0..width {
                    let delta = &f * &rows[r][c2];
                    rows[p][c2] = &rows[p][c2] - &delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut copy = rows.to_vec();
    rref(&mut copy).len()
}

/// Basis of the solution space of the homogeneous system given by `rows`.
fn nullspace(rows: &[Vec<Rational>], width: usize) -> Vec<Vec<Rational>> {
    let mut copy = rows.to_vec();
    let pivots = rref(&mut copy);
    let mut is_pivot = vec![false; width];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in 0..width {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![Rational::zero(); width];
        v[free] = Rational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -copy[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Image of a degree-(n-1) kernel vector under multiplication by s or t,
/// written in the degree-n source coordinates.
fn promote(
    v: &[Rational],
    prev: &[(usize, u32)],
    layout: &[(usize, u32)],
    by_s: bool,
) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); layout.len()];
    for (k, &(i, e)) in prev.iter().enumerate() {
        if v[k].is_zero() {
            continue;
        }
        let target = if by_s { (i, e + 1) } else { (i, e) };
        let pos = layout.iter().position(|&le| le == target).expect("multiplication raises degree by one");
        out[pos] = v[k].clone();
    }
    out
}

/// Twists of the free kernel sheaf of a graded map on the projective line,
/// sorted ascending: the kernel module is free, and new minimal generators
/// in degree n are counted as dim K_n minus the span multiplied up from
/// degree n-1. Fails with DegreeCapExceeded when generators are still
/// missing past degree `cap`.
pub fn splitting_type_p1(m: &GradedMatrix, cap: i64) -> Result<Vec<i64>> {
    let p = m.source_twists.len();
    let wanted = p - m.image_rank()?;
    if wanted == 0 {
        return Ok(Vec::new());
    }
    let n_min = -m.source_twists.iter().max().expect("nonempty twists");
    if n_min > cap {
        return Err(Error::DegreeCapExceeded { cap });
    }

    let mut twists = Vec::new();
    let mut prev_kernel: Vec<Vec<Rational>> = Vec::new();
    let mut prev_layout: Vec<(usize, u32)> = Vec::new();
    for n in n_min..=cap {
        let (rows, layout) = degree_matrix(m, n);
        let kernel = nullspace(&rows, layout.len());
        let mut span = Vec::new();
        for v in &prev_kernel {
            span.push(promote(v, &prev_layout, &layout, true));
            span.push(promote(v, &prev_layout, &layout, false));
        }
        let fresh = kernel.len() - rank(&span);
        for _ in 0..fresh {
            twists.push(-n);
        }
        if twists.len() > wanted {
            return Err(Error::Internal("more kernel generators than the rank allows".into()));
        }
        if twists.len() == wanted {
            twists.sort_unstable();
            return Ok(twists);
        }
        prev_kernel = kernel;
        prev_layout = layout;
    }
    Err(Error::DegreeCapExceeded { cap })
}

/// A divisor class h*H + sum e_i*E_i on the plane or a point blowup of it;
/// the exceptional part is empty on the plane itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorClass {
    pub h: i64,
    pub e: Vec<i64>,
}

impl DivisorClass {
    pub fn hyperplane(exceptionals: usize, mult: i64) -> DivisorClass {
        DivisorClass { h: mult, e: vec![0; exceptionals] }
    }

    pub fn exceptional(exceptionals: usize, idx: usize, mult: i64) -> DivisorClass {
        let mut e = vec![0; exceptionals];
        e[idx] = mult;
        DivisorClass { h: 0, e }
    }

    pub fn zero(exceptionals: usize) -> DivisorClass {
        DivisorClass::hyperplane(exceptionals, 0)
    }

    pub fn add(&self, other: &DivisorClass) -> DivisorClass {
        assert_eq!(self.e.len(), other.e.len(), "classes on different geometries");
        DivisorClass {
            h: self.h + other.h,
            e: self.e.iter().zip(&other.e).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> DivisorClass {
        self.scale(-1)
    }

    pub fn scale(&self, k: i64) -> DivisorClass {
        DivisorClass { h: self.h * k, e: self.e.iter().map(|x| x * k).collect() }
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        let mut push = |f: &mut fmt::Formatter<'_>, coeff: i64, sym: String| -> fmt::Result {
            if coeff == 0 {
                return Ok(());
            }
            if wrote {
                write!(f, " {} ", if coeff < 0 { "-" } else { "+" })?;
            } else if coeff < 0 {
                write!(f, "-")?;
            }
            let a = coeff.abs();
            if a != 1 {
                write!(f, "{a}")?;
            }
            write!(f, "{sym}")?;
            wrote = true;
            Ok(())
        };
        push(f, self.h, "H".to_string())?;
        for (i, &c) in self.e.iter().enumerate() {
            push(f, c, format!("E{}", i + 1))?;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The three toy geometries: the projective line, the projective plane, and
/// the plane blown up at finitely many pairwise distinct rational points.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    P1,
    P2,
    BlownP2 { points: Vec<[Rational; 3]> },
}

fn projectively_equal(p: &[Rational; 3], q: &[Rational; 3]) -> bool {
    for i in 0..3 {
        for j in (i + 1)..3 {
            if &p[i] * &q[j] != &p[j] * &q[i] {
                return false;
            }
        }
    }
    true
}

impl Geometry {
    /// Blowup of the plane at the given points; the points must be nonzero
    /// and pairwise distinct (infinitely near points are not expressible).
    pub fn blown_p2(points: Vec<[Rational; 3]>) -> Result<Geometry> {
        for p in &points {
            if p.iter().all(|c| c.is_zero()) {
                return Err(Error::InvalidArgument("(0 : 0 : 0) is not a point".into()));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if projectively_equal(&points[i], &points[j]) {
                    return Err(Error::DuplicatePoint);
                }
            }
        }
        Ok(Geometry::BlownP2 { points })
    }

    pub fn dim(&self) -> usize {
        match self {
            Geometry::P1 => 1,
            _ => 2,
        }
    }

    pub fn exceptional_count(&self) -> usize {
        match self {
            Geometry::BlownP2 { points } => points.len(),
            _ => 0,
        }
    }
}

/// Intersection number of two divisor classes on a surface geometry:
/// H.H = 1, E_i.E_i = -1, mixed products vanish.
pub fn intersection_pairing(g: &Geometry, d1: &DivisorClass, d2: &DivisorClass) -> Result<i64> {
    if g.dim() != 2 {
        return Err(Error::SurfaceOnly);
    }
    let k = g.exceptional_count();
    if d1.e.len() != k || d2.e.len() != k {
        return Err(Error::InvalidArgument(format!(
            "classes carry {} and {} exceptional coefficients, geometry has {k}",
            d1.e.len(),
            d2.e.len()
        )));
    }
    let mut out = d1.h * d2.h;
    for (a, b) in d1.e.iter().zip(&d2.e) {
        out -= a * b;
    }
    Ok(out)
}

/// Total Chern class truncated at surface dimension: 1 + c1 + c2, with c2
/// stored as its degree against the fundamental class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChernTotal {
    pub c1: DivisorClass,
    pub c2: i64,
}

impl ChernTotal {
    pub fn one(g: &Geometry) -> ChernTotal {
        ChernTotal { c1: DivisorClass::zero(g.exceptional_count()), c2: 0 }
    }

    pub fn of_line_bundle(class: DivisorClass) -> ChernTotal {
        ChernTotal { c1: class, c2: 0 }
    }

    pub fn mul(&self, other: &ChernTotal, g: &Geometry) -> Result<ChernTotal> {
        let cross = intersection_pairing(g, &self.c1, &other.c1)?;
        Ok(ChernTotal { c1: self.c1.add(&other.c1), c2: self.c2 + other.c2 + cross })
    }

    /// Inverse in the truncated ring: (1 + c1 + c2)^{-1} = 1 - c1 + (c1^2 - c2).
    pub fn inverse(&self, g: &Geometry) -> Result<ChernTotal> {
        let sq = intersection_pairing(g, &self.c1, &self.c1)?;
        Ok(ChernTotal { c1: self.c1.neg(), c2: sq - self.c2 })
    }
}

/// Total Chern class of a direct sum of line bundles with the given first
/// Chern classes: c1 is the sum, c2 the sum of pairwise products.
pub fn chern_of_split(g: &Geometry, classes: &[DivisorClass]) -> Result<ChernTotal> {
    let mut c1 = DivisorClass::zero(g.exceptional_count());
    let mut c2 = 0i64;
    for (i, a) in classes.iter().enumerate() {
        for b in &classes[i + 1..] {
            c2 += intersection_pairing(g, a, b)?;
        }
        c1 = c1.add(a);
    }
    if g.dim() != 2 {
        return Err(Error::SurfaceOnly);
    }
    Ok(ChernTotal { c1, c2 })
}

/// Total Chern class of the kernel of a map between sums of line bundles
/// with the given classes, by multiplicativity: product over the source
/// divided by the product over the target.
pub fn chern_of_kernel(g: &Geometry, source: &[DivisorClass], target: &[DivisorClass]) -> Result<ChernTotal> {
    let mut total = ChernTotal::one(g);
    for c in source {
        total = total.mul(&ChernTotal::of_line_bundle(c.clone()), g)?;
    }
    for c in target {
        total = total.mul(&ChernTotal::of_line_bundle(c.clone()).inverse(g)?, g)?;
    }
    Ok(total)
}

/// Chern class of the kernel of a row of degree-d forms on the plane. The
/// forms must be homogeneous of equal degree with empty common zero locus
/// (so the row is surjective and its kernel is a bundle of rank one less
/// than the number of forms); emptiness is certified by saturating the form
/// ideal at each coordinate.
pub fn chern_of_p2_row_kernel(forms: &[Poly], degree: i64) -> Result<ChernTotal> {
    if forms.len() < 2 {
        return Err(Error::InvalidArgument("a row kernel needs at least two forms".into()));
    }
    if degree < 1 {
        return Err(Error::InvalidArgument("form degree must be positive".into()));
    }
    for f in forms {
        if f.nvars() != 3 {
            return Err(Error::ContextMismatch { expected: 3, found: f.nvars() });
        }
        match homogeneous_degree(f) {
            Some(d) if d == degree as u64 => {}
            _ => return Err(Error::InvalidArgument("forms must be homogeneous of the stated degree".into())),
        }
    }
    let ideal = Ideal::new(3, forms.to_vec());
    for v in 0..3 {
        if !saturate(&ideal, &Poly::var(3, v))?.is_unit_ideal(&ORDER) {
            return Err(Error::BaseLocus);
        }
    }
    let g = Geometry::P2;
    ChernTotal::of_line_bundle(DivisorClass::hyperplane(0, degree)).inverse(&g)
}

/// Multiplicity of the exceptional divisor named `label` in the function f
/// on the chart: the number of exact divisions by the exceptional equation,
/// counted through cofactor-tracked membership.
pub fn exceptional_vanishing_order(chart: &Chart, f: &Poly, label: &str) -> Result<usize> {
    let eq = chart
        .exceptionals()
        .iter()
        .find(|(l, _)| l == label)
        .map(|(_, e)| e.clone())
        .ok_or_else(|| Error::InvalidArgument(format!("chart has no exceptional named {label}")))?;
    let eq = chart.reduce(&eq, &ORDER);
    if eq.is_zero() || chart.is_unit(&eq, &ORDER) {
        return Err(Error::InvalidArgument("exceptional equation is degenerate".into()));
    }
    let mut cur = chart.reduce(f, &ORDER);
    if cur.is_zero() {
        return Err(Error::InvalidArgument("the zero function vanishes to every order".into()));
    }
    let mut gens = vec![eq];
    gens.extend(chart.relations().gens().iter().cloned());
    let tracked = TrackedBasis::new(&gens, &ORDER);
    let mut ord = 0usize;
    loop {
        let (cofs, rem) = tracked.reduce(&cur);
        if !rem.is_zero() {
            return Ok(ord);
        }
        cur = chart.reduce(&cofs[0], &ORDER);
        if cur.is_zero() {
            return Err(Error::Internal("exact quotient reduced to zero".into()));
        }
        ord += 1;
        if ord > 256 {
            return Err(Error::InvalidArgument("vanishing order exceeds the supported bound".into()));
        }
    }
}

/// The resolved-kernel data the Euler number is computed from: splitting
/// twists on the line, split line-bundle classes on a surface, or a total
/// Chern class with its rank.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedKernel {
    TwistsP1(Vec<i64>),
    SplitClasses(Vec<DivisorClass>),
    Chern { rank: usize, total: ChernTotal },
}

/// Degree of the top Chern class of the resolved kernel against the
/// geometry: the splitting twist itself on the line, the c2 degree on a
/// surface. Rank above the dimension gives zero by dimension; rank below it
/// is a positive-dimensional class, reported as an error. Requires the
/// torsion hypothesis on higher cohomology.
pub fn euler_number(g: &Geometry, resolved: &ResolvedKernel, torsion_ok: bool) -> Result<i64> {
    if !torsion_ok {
        return Err(Error::TorsionHypothesis);
    }
    let dim = g.dim();
    match resolved {
        ResolvedKernel::TwistsP1(twists) => {
            if dim != 1 {
                return Err(Error::InvalidArgument("splitting twists describe a curve kernel".into()));
            }
            match twists.len() {
                0 => Err(Error::RankDimensionMismatch { rank: 0, dim }),
                1 => Ok(twists[0]),
                _ => Ok(0),
            }
        }
        ResolvedKernel::SplitClasses(classes) => {
            if dim != 2 {
                return Err(Error::SurfaceOnly);
            }
            match classes.len() {
                n if n < 2 => Err(Error::RankDimensionMismatch { rank: n, dim }),
                2 => Ok(chern_of_split(g, classes)?.c2),
                _ => Ok(0),
            }
        }
        ResolvedKernel::Chern { rank, total } => {
            if dim != 2 {
                return Err(Error::SurfaceOnly);
            }
            match *rank {
                r if r < 2 => Err(Error::RankDimensionMismatch { rank: r, dim }),
                2 => Ok(total.c2),
                _ => Ok(0),
            }
        }
    }
}

/// A problem the independence harness can replay: a graded matrix on the
/// line (permutations act on the source columns) or a surface with split
/// classes (permutations relabel the blown-up points).
#[derive(Debug, Clone)]
pub enum EulerProblem {
    Curve { matrix: GradedMatrix, degree_cap: i64 },
    Surface { geometry: Geometry, classes: Vec<DivisorClass> },
}

fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if perm.len() != len {
        return Err(Error::InvalidArgument(format!(
            "permutation of length {} applied to {len} items",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= len || seen[p] {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

fn curve_euler(matrix: &GradedMatrix, cap: i64) -> Result<i64> {
    let twists = splitting_type_p1(matrix, cap)?;
    let torsion_ok = matrix.image_rank()? == matrix.target_twists().len();
    euler_number(&Geometry::P1, &ResolvedKernel::TwistsP1(twists), torsion_ok)
}

fn permute_curve(matrix: &GradedMatrix, perm: &[usize]) -> Result<GradedMatrix> {
    let p = matrix.source_twists().len();
    check_permutation(perm, p)?;
    let source: Vec<i64> = perm.iter().map(|&i| matrix.source_twists()[i]).collect();
    let q = matrix.target_twists().len();
    let mat = PolyMat::from_fn(q, p, 2, |j, i| matrix.mat().get(j, perm[i]).clone());
    GradedMatrix::new(source, matrix.target_twists().to_vec(), mat)
}

fn permute_surface(g: &Geometry, classes: &[DivisorClass], perm: &[usize]) -> Result<(Geometry, Vec<DivisorClass>)> {
    let Geometry::BlownP2 { points } = g else {
        check_permutation(perm, 0)?;
        return Ok((g.clone(), classes.to_vec()));
    };
    check_permutation(perm, points.len())?;
    let new_points: Vec<[Rational; 3]> = perm.iter().map(|&i| points[i].clone()).collect();
    let new_classes: Vec<DivisorClass> = classes
        .iter()
        .map(|c| DivisorClass { h: c.h, e: perm.iter().map(|&i| c.e[i]).collect() })
        .collect();
    Ok((Geometry::blown_p2(new_points)?, new_classes))
}

/// Recomputes the Euler number under every listed permutation of the
/// problem's inputs and reports whether all runs agree with the unpermuted
/// one. Resolution errors propagate.
pub fn independence_harness(problem: &EulerProblem, permutations: &[Vec<usize>]) -> Result<bool> {
    match problem {
        EulerProblem::Curve { matrix, degree_cap } => {
            let baseline = curve_euler(matrix, *degree_cap)?;
            for perm in permutations {
                let permuted = permute_curve(matrix, perm)?;
                if curve_euler(&permuted, *degree_cap)? != baseline {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        EulerProblem::Surface { geometry, classes } => {
            let baseline =
                euler_number(geometry, &ResolvedKernel::SplitClasses(classes.clone()), true)?;
            for perm in permutations {
                let (g, cs) = permute_surface(geometry, classes, perm)?;
                if euler_number(&g, &ResolvedKernel::SplitClasses(cs), true)? != baseline {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}
