use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::order::MonomialOrder;

/// Arbitrary-precision rational scalar. Always stored reduced with a
/// positive denominator.
pub type Rational = BigRational;

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Exponent vector of a fixed width. The derived `Ord` (slot-wise
/// lexicographic) is only a structural order used for canonical storage;
/// ranking for algebra goes through [`MonomialOrder`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn one(width: usize) -> Self {
        Monomial { exps: vec![0; width] }
    }

    pub fn var(width: usize, idx: usize) -> Self {
        let mut exps = vec![0; width];
        exps[idx] = 1;
        Monomial { exps }
    }

    pub fn width(&self) -> usize {
        self.exps.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn deg(&self) -> u64 {
        self.exps.iter().map(|&e| e as u64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.width(), other.width());
        Monomial::new(self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// Quotient exponent vector; caller must ensure divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        debug_assert!(other.divides(self));
        Monomial::new(self.exps.iter().zip(&other.exps).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.exps.iter().zip(&other.exps).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| *a == 0 || *b == 0)
    }
}

/// Sparse multivariate polynomial over the rationals in a context of
/// `nvars` variables. No zero coefficients are stored; the zero polynomial
/// has an empty term map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(nvars), c);
        }
        Poly { nvars, terms }
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        assert!(idx < nvars, "variable index out of range");
        Poly::term(Monomial::var(nvars, idx), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let nvars = m.width();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { nvars, terms }
    }

    pub fn from_terms<I>(nvars: usize, iter: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Poly::zero(nvars);
        for (m, c) in iter {
            debug_assert_eq!(m.width(), nvars);
            p.accumulate(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(Monomial::deg).max()
    }

    fn accumulate(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn assert_context(&self, other: &Poly) {
        assert_eq!(
            self.nvars, other.nvars,
            "polynomial context mismatch: {} vs {} variables",
            self.nvars, other.nvars
        );
    }

    /// Context-checked arithmetic entry point; the operator impls panic on
    /// mismatched contexts instead.
    pub fn checked_binop(&self, other: &Poly, op: PolyOp) -> Result<Poly> {
        if self.nvars != other.nvars {
            return Err(Error::ContextMismatch { expected: self.nvars, found: other.nvars });
        }
        Ok(match op {
            PolyOp::Add => self + other,
            PolyOp::Sub => self - other,
            PolyOp::Mul => self * other,
        })
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(mm, a)| (mm.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn leading(&self, order: &MonomialOrder) -> Option<(&Monomial, &Rational)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| order.cmp(a, b))
    }

    pub fn leading_monomial(&self, order: &MonomialOrder) -> Option<&Monomial> {
        self.leading(order).map(|(m, _)| m)
    }

    /// Divides by the leading coefficient so the leading coefficient is 1.
    pub fn monic(&self, order: &MonomialOrder) -> Poly {
        match self.leading(order) {
            None => self.clone(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
        }
    }

    /// `Some(c)` iff `self == c * other` for a nonzero rational `c`.
    pub fn associate_ratio(&self, other: &Poly) -> Option<Rational> {
        if self.is_zero() || other.is_zero() {
            return None;
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut ratio: Option<Rational> = None;
        for ((ma, ca), (mb, cb)) in self.terms.iter().zip(other.terms.iter()) {
            if ma != mb {
                return None;
            }
            let r = ca / cb;
            match &ratio {
                None => ratio = Some(r),
                Some(prev) if *prev == r => {}
                _ => return None,
            }
        }
        ratio
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exps().iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitutes `images[i]` for variable `i`. All images must share one
    /// context, which becomes the context of the result.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars, "one image per source variable");
        let target_nvars = images.first().map(|p| p.nvars()).unwrap_or(0);
        let mut powers: Vec<Vec<Poly>> = images
            .iter()
            .map(|im| vec![Poly::one(target_nvars), im.clone()])
            .collect();
        let mut acc = Poly::zero(target_nvars);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target_nvars, c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[i];
                while cache.len() <= e as usize {
                    let next = &cache[cache.len() - 1] * &cache[1];
                    cache.push(next);
                }
                t = &t * &cache[e as usize];
            }
            acc = &acc + &t;
        }
        acc
    }

    /// True in slot `i` iff some term uses variable `i`.
    pub fn support(&self) -> Vec<bool> {
        let mut s = vec![false; self.nvars];
        for m in self.terms.keys() {
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    s[i] = true;
                }
            }
        }
        s
    }

    pub fn uses_var(&self, idx: usize) -> bool {
        self.terms.keys().any(|m| m.exps()[idx] > 0)
    }

    /// Extends the context by `k` fresh variables inserted at slot 0.
    pub fn pad_front(&self, k: usize) -> Poly {
        self.map_exps(self.nvars + k, |exps, out| {
            out[k..].copy_from_slice(exps);
        })
    }

    /// Extends the context by `k` fresh variables appended after the last slot.
    pub fn pad_back(&self, k: usize) -> Poly {
        self.map_exps(self.nvars + k, |exps, out| {
            out[..exps.len()].copy_from_slice(exps);
        })
    }

    /// Drops the first `k` variables; every term must be free of them.
    pub fn drop_front(&self, k: usize) -> Poly {
        debug_assert!(self.terms.keys().all(|m| m.exps()[..k].iter().all(|&e| e == 0)));
        self.map_exps(self.nvars - k, |exps, out| {
            out.copy_from_slice(&exps[k..]);
        })
    }

    /// Reindexes variables: slot `i` of the result reads old slot `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Poly {
        assert_eq!(perm.len(), self.nvars);
        self.map_exps(self.nvars, |exps, out| {
            for (i, &src) in perm.iter().enumerate() {
                out[i] = exps[src];
            }
        })
    }

    /// Removes variable `idx` from the context; terms must not use it.
    pub fn remove_var(&self, idx: usize) -> Poly {
        debug_assert!(!self.uses_var(idx));
        self.map_exps(self.nvars - 1, |exps, out| {
            out[..idx].copy_from_slice(&exps[..idx]);
            out[idx..].copy_from_slice(&exps[idx + 1..]);
        })
    }

    fn map_exps<F>(&self, new_width: usize, f: F) -> Poly
    where
        F: Fn(&[u32], &mut [u32]),
    {
        let mut p = Poly::zero(new_width);
        for (m, c) in &self.terms {
            let mut out = vec![0u32; new_width];
            f(m.exps(), &mut out);
            p.accumulate(Monomial::new(out), c.clone());
        }
        p
    }

    /// Canonical text form under `order`, re-parseable by the grammar.
    pub fn render(&self, vars: &[String], order: &MonomialOrder) -> String {
        assert_eq!(vars.len(), self.nvars);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<&Monomial> = self.terms.keys().collect();
        keys.sort_by(|a, b| order.cmp(b, a));
        let mut out = String::new();
        for (pos, m) in keys.iter().enumerate() {
            let c = &self.terms[*m];
            let neg = c.is_negative();
            let abs = c.abs();
            if pos == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (i, &e) in m.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(vars[i].clone()),
                    _ => factors.push(format!("{}^{}", vars[i], e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, other: &Poly) -> Poly {
        self.assert_context(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, other: &Poly) -> Poly {
        self.assert_context(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, other: &Poly) -> Poly {
        self.assert_context(other);
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.accumulate(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl fmt::Display for Poly {
    /// Context-free fallback rendering with `x0, x1, ...` names, for
    /// diagnostics only.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = (0..self.nvars).map(|i| format!("x{i}")).collect();
        f.write_str(&self.render(&vars, &MonomialOrder::GrevLex))
    }
}

/// Multivariate division with remainder: returns `(quotients, remainder)`
/// with `f == sum(q_i * d_i) + r` exactly and no remainder term divisible by
/// any divisor's leading monomial.
pub fn divide_multivariate(
    f: &Poly,
    divisors: &[Poly],
    order: &MonomialOrder,
) -> Result<(Vec<Poly>, Poly)> {
    if divisors.is_empty() {
        return Err(Error::InvalidArgument("empty divisor list".into()));
    }
    for d in divisors {
        if d.is_zero() {
            return Err(Error::InvalidArgument("zero divisor".into()));
        }
        if d.nvars() != f.nvars() {
            return Err(Error::ContextMismatch { expected: f.nvars(), found: d.nvars() });
        }
    }
    let leads: Vec<(&Monomial, &Rational)> =
        divisors.iter().map(|d| d.leading(order).unwrap()).collect();
    let mut quotients = vec![Poly::zero(f.nvars()); divisors.len()];
    let mut remainder = Poly::zero(f.nvars());
    let mut work = f.clone();
    while let Some((lm, lc)) = work.leading(order) {
        let lm = lm.clone();
        let lc = lc.clone();
        match leads.iter().position(|(dm, _)| dm.divides(&lm)) {
            Some(i) => {
                let qm = lm.div(leads[i].0);
                let qc = &lc / leads[i].1;
                quotients[i].accumulate(qm.clone(), qc.clone());
                let sub = divisors[i].mul_term(&qm, &qc);
                work = &work - &sub;
            }
            None => {
                remainder.accumulate(lm.clone(), lc.clone());
                work.terms.remove(&lm);
            }
        }
    }
    Ok((quotients, remainder))
}

/// Compares polynomials for canonical ordering of generator lists: by
/// leading monomial under `order`, then structurally.
pub fn canonical_cmp(a: &Poly, b: &Poly, order: &MonomialOrder) -> Ordering {
    match (a.leading_monomial(order), b.leading_monomial(order)) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(ma), Some(mb)) => match order.cmp(ma, mb) {
            Ordering::Equal => a.terms.cmp(&b.terms),
            other => other,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn p(text: &str, names: &[&str]) -> Poly {
        let vs = vars(names);
        parse_poly(text, &vs).unwrap()
    }

    #[test]
    fn sum_of_opposites_is_zero() {
        let xy = &["x", "y"];
        let a = p("x + y", xy);
        let b = p("-x - y", xy);
        assert!((&a + &b).is_zero());
    }

    #[test]
    fn binomial_square() {
        let xy = &["x", "y"];
        let a = p("x + y", xy);
        let sq = &a * &a;
        assert_eq!(sq, p("x^2 + 2*x*y + y^2", xy));
    }

    #[test]
    fn rational_coefficient_product() {
        let xs = &["x"];
        let a = p("1/2*x", xs);
        let b = p("2/3*x", xs);
        assert_eq!(&a * &b, p("1/3*x^2", xs));
    }

    #[test]
    fn context_mismatch_is_reported() {
        let a = Poly::var(2, 0);
        let b = Poly::var(3, 0);
        let err = a.checked_binop(&b, PolyOp::Add).unwrap_err();
        assert_eq!(err, Error::ContextMismatch { expected: 2, found: 3 });
    }

    #[test]
    fn division_reconstructs_input() {
        let xy = &["x", "y"];
        let order = MonomialOrder::GrevLex;
        let f = p("x^2*y + x*y^2 + y^2", xy);
        let d1 = p("x*y - 1", xy);
        let d2 = p("y^2 - 1", xy);
        let (q, r) = divide_multivariate(&f, &[d1.clone(), d2.clone()], &order).unwrap();
        let mut back = r.clone();
        back = &back + &(&q[0] * &d1);
        back = &back + &(&q[1] * &d2);
        assert_eq!(back, f);
        assert_eq!(r, p("x + y + 1", xy));
    }

    #[test]
    fn exact_single_divisor() {
        let xy = &["x", "y"];
        let order = MonomialOrder::GrevLex;
        let f = p("x^2 + x*y", xy);
        let d = p("x", xy);
        let (q, r) = divide_multivariate(&f, &[d], &order).unwrap();
        assert!(r.is_zero());
        assert_eq!(q[0], p("x + y", xy));
    }

    #[test]
    fn zero_divisor_rejected() {
        let f = Poly::var(1, 0);
        let err = divide_multivariate(&f, &[Poly::zero(1)], &MonomialOrder::GrevLex).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn render_is_canonical_and_round_trips() {
        let xy = &["x", "y"];
        let f = p("y^2 - 2*x*y + x^2", xy);
        let text = f.render(&vars(xy), &MonomialOrder::GrevLex);
        assert_eq!(text, "x^2 - 2*x*y + y^2");
        assert_eq!(p(&text, xy), f);
    }

    #[test]
    fn render_constants_and_signs() {
        let xy = &["x", "y"];
        assert_eq!(Poly::zero(2).render(&vars(xy), &MonomialOrder::GrevLex), "0");
        let f = p("-x - 3/4", xy);
        assert_eq!(f.render(&vars(xy), &MonomialOrder::GrevLex), "-x - 3/4");
        assert_eq!(p("-x - 3/4", xy), f);
    }

    #[test]
    fn associate_ratio_detects_constant_multiples() {
        let xy = &["x", "y"];
        let a = p("2*x + 2*y", xy);
        let b = p("x + y", xy);
        assert_eq!(a.associate_ratio(&b), Some(rat_int(2)));
        assert_eq!(a.associate_ratio(&p("x - y", xy)), None);
    }

    #[test]
    fn substitution_is_a_ring_map_on_samples() {
        let xy = &["x", "y"];
        let st = &["s", "t"];
        let f = p("x^2 + y", xy);
        let g = p("x*y - 1", xy);
        let images = vec![p("s + t", st), p("s*t", st)];
        let lhs = (&f * &g).substitute(&images);
        let rhs = &f.substitute(&images) * &g.substitute(&images);
        assert_eq!(lhs, rhs);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            let ab = &a + &b;
            let ba = &b + &a;
            proptest::prop_assert_eq!(&ab, &ba);
            proptest::prop_assert_eq!(&(&ab + &c), &(&a + &(&b + &c)));
            proptest::prop_assert_eq!(&(&a * &b), &(&b * &a));
            let dist = &a * &(&b + &c);
            let dist2 = &(&a * &b) + &(&a * &c);
            proptest::prop_assert_eq!(&dist, &dist2);
            proptest::prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn division_identity_holds(f in arb_poly(), d1 in arb_poly(), d2 in arb_poly()) {
            let order = MonomialOrder::GrevLex;
            let divisors: Vec<Poly> = [d1, d2].into_iter().filter(|d| !d.is_zero()).collect();
            proptest::prop_assume!(!divisors.is_empty());
            let (q, r) = divide_multivariate(&f, &divisors, &order).unwrap();
            let mut back = r.clone();
            for (qi, di) in q.iter().zip(&divisors) {
                back = &back + &(qi * di);
            }
            proptest::prop_assert_eq!(back, f);
            if let Some((rm, _)) = r.leading(&order) {
                for d in &divisors {
                    proptest::prop_assert!(!d.leading_monomial(&order).unwrap().divides(rm));
                }
            }
        }

        #[test]
        fn render_parse_round_trip(f in arb_poly()) {
            let names = vec!["x".to_string(), "y".to_string(), "z".to_string()];
            let text = f.render(&names, &MonomialOrder::GrevLex);
            let back = parse_poly(&text, &names).unwrap();
            proptest::prop_assert_eq!(back, f);
        }
    }

    fn arb_poly() -> impl proptest::strategy::Strategy<Value = Poly> {
        use proptest::prelude::*;
        proptest::collection::vec(
            ((0u32..3, 0u32..3, 0u32..2), -4i64..5),
            0..5,
        )
        .prop_map(|terms| {
            Poly::from_terms(
                3,
                terms.into_iter().map(|((a, b, c), coeff)| {
                    (Monomial::new(vec![a, b, c]), rat_int(coeff))
                }),
            )
        })
    }
}
