//! Shared test support: an independent dense univariate polynomial stack
//! with a textbook Smith-normal-form reduction (elementary operations over
//! the rationals), plus small exact linear algebra helpers. Nothing here
//! calls into the library's own reduction engine, so it can serve as an
//! oracle for it.

#![allow(dead_code)]

use num_traits::{One, Zero};
use resolvent_core::poly::{Monomial, Poly, Rational};

/// Dense univariate polynomial, coefficients ascending, no trailing zeros.
pub type UPoly = Vec<Rational>;

pub fn utrim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn uis_zero(p: &UPoly) -> bool {
    p.is_empty()
}

pub fn udeg(p: &UPoly) -> usize {
    assert!(!uis_zero(p), "degree of the zero polynomial");
    p.len() - 1
}

pub fn uadd(a: &UPoly, b: &UPoly) -> UPoly {
    let mut out = vec![Rational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] = &out[i] + c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] = &out[i] + c;
    }
    utrim(out)
}

pub fn uneg(a: &UPoly) -> UPoly {
    a.iter().map(|c| -c.clone()).collect()
}

pub fn usub(a: &UPoly, b: &UPoly) -> UPoly {
    uadd(a, &uneg(b))
}

pub fn umul(a: &UPoly, b: &UPoly) -> UPoly {
    if uis_zero(a) || uis_zero(b) {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    utrim(out)
}

/// Euclidean division: a = q*b + r with deg r < deg b.
pub fn udivmod(a: &UPoly, b: &UPoly) -> (UPoly, UPoly) {
    assert!(!uis_zero(b), "division by zero");
    let mut r = a.clone();
    let mut q = vec![Rational::zero(); a.len().saturating_sub(b.len()) + 1];
    while !uis_zero(&r) && r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() / b.last().unwrap();
        q[shift] = &q[shift] + &c;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &(&c * bc);
        }
        r = utrim(r);
    }
    (utrim(q), r)
}

pub fn umonic(p: &UPoly) -> UPoly {
    if uis_zero(p) {
        return Vec::new();
    }
    let lead = p.last().unwrap().clone();
    p.iter().map(|c| c / &lead).collect()
}

fn min_degree_entry(m: &[Vec<UPoly>], k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    for (i, row) in m.iter().enumerate().skip(k) {
        for (j, e) in row.iter().enumerate().skip(k) {
            if uis_zero(e) {
                continue;
            }
            let d = udeg(e);
            if best.map_or(true, |(bd, _, _)| d < bd) {
                best = Some((d, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Invariant factors of a univariate polynomial matrix by the classical
/// elementary-operations reduction: repeatedly move a minimal-degree entry
/// to the pivot, kill its row and column by division with remainder, and
/// fold in any entry the pivot fails to divide. Returns monic factors
/// d_1 | d_2 | ... (one per unit of rank).
pub fn snf_invariant_factors(mut m: Vec<Vec<UPoly>>) -> Vec<UPoly> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut factors: Vec<UPoly> = Vec::new();
    let mut k = 0usize;
    while k < rows.min(cols) {
        let Some((pi, pj)) = min_degree_entry(&m, k) else {
            break;
        };
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        let mut dirty = false;
        for i in (k + 1)..rows {
            if uis_zero(&m[i][k]) {
                continue;
            }
            let (q, _) = udivmod(&m[i][k], &m[k][k]);
            for j in k..cols {
                let t = umul(&q, &m[k][j]);
                m[i][j] = usub(&m[i][j], &t);
            }
            if !uis_zero(&m[i][k]) {
                dirty = true;
            }
        }
        for j in (k + 1)..cols {
            if uis_zero(&m[k][j]) {
                continue;
            }
            let (q, _) = udivmod(&m[k][j], &m[k][k]);
            for i in k..rows {
                let t = umul(&q, &m[i][k]);
                m[i][j] = usub(&m[i][j], &t);
            }
            if !uis_zero(&m[k][j]) {
                dirty = true;
            }
        }
        if dirty {
            continue;
        }
        let mut offender = None;
        'scan: for i in (k + 1)..rows {
            for j in (k + 1)..cols {
                if uis_zero(&m[i][j]) {
                    continue;
                }
                let (_, r) = udivmod(&m[i][j], &m[k][k]);
                if !uis_zero(&r) {
                    offender = Some(i);
                    break 'scan;
                }
            }
        }
        if let Some(i) = offender {
            for j in k..cols {
                let t = m[i][j].clone();
                m[k][j] = uadd(&m[k][j], &t);
            }
            continue;
        }
        factors.push(umonic(&m[k][k]));
        k += 1;
    }
    for w in factors.windows(2) {
        let (_, r) = udivmod(&w[1], &w[0]);
        assert!(uis_zero(&r), "oracle factors must form a divisibility chain");
    }
    factors
}

/// Converts a one-variable sparse library polynomial to the dense oracle
/// representation.
pub fn upoly_from(p: &Poly) -> UPoly {
    assert_eq!(p.nvars(), 1, "oracle polynomials are univariate");
    let mut out = Vec::new();
    for (m, c) in p.terms() {
        let e = m.exps()[0] as usize;
        if out.len() <= e {
            out.resize(e + 1, Rational::zero());
        }
        out[e] = c.clone();
    }
    utrim(out)
}

pub fn upoly_to(p: &UPoly) -> Poly {
    let mut out = Poly::zero(1);
    for (e, c) in p.iter().enumerate() {
        if !c.is_zero() {
            let term = Poly::term(Monomial::new(vec![e as u32]), c.clone());
            out = &out + &term;
        }
    }
    out
}

/// Rank of an exact rational matrix by plain Gaussian elimination.
pub fn rational_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let width = rows[0].len();
    let mut rank = 0usize;
    for c in 0..width {
        let Some(p) = (rank..rows.len()).find(|&p| !rows[p][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let lead = rows[rank][c].clone();
        for x in rows[rank].iter_mut() {
            *x = &*x / &lead;
        }
        for p in 0..rows.len() {
            if p != rank && !rows[p][c].is_zero() {
                let f = rows[p][c].clone();
                for c2 in 0..width {
                    let delta = &f * &rows[rank][c2];
                    rows[p][c2] = &rows[p][c2] - &delta;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

#[test]
fn oracle_self_checks() {
    let one = || vec![Rational::one()];
    let t = || vec![Rational::zero(), Rational::one()];
    let (q, r) = udivmod(&umul(&t(), &t()), &t());
    assert_eq!(q, t());
    assert!(uis_zero(&r));

    // diag(t, t+1) has invariant factors (1, t^2 + t).
    let tp1 = uadd(&t(), &one());
    let z = Vec::new();
    let m = vec![vec![t(), z.clone()], vec![z, tp1.clone()]];
    let factors = snf_invariant_factors(m);
    assert_eq!(factors.len(), 2);
    assert_eq!(factors[0], one());
    assert_eq!(factors[1], umul(&t(), &tp1));
}
