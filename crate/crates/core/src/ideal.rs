use std::sync::{Arc, OnceLock};

use num_traits::One;

use crate::error::{Error, Result};
use crate::order::MonomialOrder;
use crate::poly::{canonical_cmp, divide_multivariate, Monomial, Poly, Rational};

/// Finitely generated ideal in a fixed polynomial context. Carries a
/// write-once cache holding one reduced Groebner basis together with the
/// order it was computed under; the first computation wins and concurrent
/// recomputation is harmless because the reduced basis is unique.
#[derive(Debug)]
pub struct Ideal {
    nvars: usize,
    gens: Vec<Poly>,
    cache: OnceLock<(MonomialOrder, Arc<Vec<Poly>>)>,
}

impl Clone for Ideal {
    fn clone(&self) -> Self {
        let cache = OnceLock::new();
        if let Some(v) = self.cache.get() {
            let _ = cache.set(v.clone());
        }
        Ideal { nvars: self.nvars, gens: self.gens.clone(), cache }
    }
}

impl PartialEq for Ideal {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.gens == other.gens
    }
}

impl Eq for Ideal {}

impl Ideal {
    /// Zero generators are dropped; an empty list is the zero ideal.
    pub fn new(nvars: usize, gens: Vec<Poly>) -> Self {
        let gens: Vec<Poly> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        for g in &gens {
            assert_eq!(g.nvars(), nvars, "generator context mismatch");
        }
        Ideal { nvars, gens, cache: OnceLock::new() }
    }

    pub fn zero(nvars: usize) -> Self {
        Ideal::new(nvars, vec![])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn gens(&self) -> &[Poly] {
        &self.gens
    }

    /// Ideal generated by both generator lists.
    pub fn union(&self, other: &Ideal) -> Ideal {
        assert_eq!(self.nvars, other.nvars);
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        Ideal::new(self.nvars, gens)
    }

    /// Reduced Groebner basis under `order`: unique, monic, sorted by
    /// leading monomial descending.
    pub fn basis(&self, order: &MonomialOrder) -> Arc<Vec<Poly>> {
        if let Some((cached_order, basis)) = self.cache.get() {
            if cached_order == order {
                return basis.clone();
            }
            return Arc::new(reduced_groebner(&self.gens, order));
        }
        let computed = Arc::new(reduced_groebner(&self.gens, order));
        let _ = self.cache.set((*order, computed));
        self.cache.get().expect("cache just set").1.clone()
    }

    pub fn normal_form(&self, f: &Poly, order: &MonomialOrder) -> Poly {
        assert_eq!(f.nvars(), self.nvars);
        let basis = self.basis(order);
        normal_form(f, &basis, order)
    }

    pub fn contains(&self, f: &Poly, order: &MonomialOrder) -> bool {
        self.normal_form(f, order).is_zero()
    }

    pub fn is_zero_ideal(&self, order: &MonomialOrder) -> bool {
        self.basis(order).is_empty()
    }

    pub fn is_unit_ideal(&self, order: &MonomialOrder) -> bool {
        let basis = self.basis(order);
        basis.len() == 1 && basis[0].is_constant()
    }

    /// Membership with an exact cofactor expression over the original
    /// generators, or `None` when `f` is not in the ideal.
    pub fn member(&self, f: &Poly, order: &MonomialOrder) -> Option<MembershipCertificate> {
        assert_eq!(f.nvars(), self.nvars);
        let tracked = TrackedBasis::new(&self.gens, order);
        let (cofactors, remainder) = tracked.reduce(f);
        if remainder.is_zero() {
            Some(MembershipCertificate { cofactors })
        } else {
            None
        }
    }
}

/// Exact expression `f = sum(cofactors[i] * gens[i])` witnessing membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipCertificate {
    pub cofactors: Vec<Poly>,
}

impl MembershipCertificate {
    pub fn verify(&self, f: &Poly, gens: &[Poly]) -> bool {
        if self.cofactors.len() != gens.len() {
            return false;
        }
        let mut acc = Poly::zero(f.nvars());
        for (c, g) in self.cofactors.iter().zip(gens) {
            acc = &acc + &(c * g);
        }
        acc == *f
    }
}

/// True iff the two ideals are equal, decided by comparing reduced bases
/// under a common order (equivalent to mutual membership of generators).
pub fn ideal_equal(a: &Ideal, b: &Ideal, order: &MonomialOrder) -> bool {
    a.nvars() == b.nvars() && a.basis(order) == b.basis(order)
}

/// Remainder of `f` on full reduction against `basis`.
pub fn normal_form(f: &Poly, basis: &[Poly], order: &MonomialOrder) -> Poly {
    if basis.is_empty() {
        return f.clone();
    }
    let (_, r) = divide_multivariate(f, basis, order).expect("basis elements are nonzero");
    r
}

/// Intersection of the ideal with the subring on the kept variables,
/// computed with a block elimination order. The result lives in the same
/// context but its generators only use kept variables.
pub fn eliminate(ideal: &Ideal, keep: &[bool]) -> Ideal {
    assert_eq!(keep.len(), ideal.nvars());
    let elim: Vec<usize> = (0..keep.len()).filter(|&i| !keep[i]).collect();
    let kept: Vec<usize> = (0..keep.len()).filter(|&i| keep[i]).collect();
    if elim.is_empty() {
        return ideal.clone();
    }
    let split = elim.len();
    let perm: Vec<usize> = elim.iter().chain(kept.iter()).copied().collect();
    let mut inv = vec![0usize; perm.len()];
    for (new_idx, &old_idx) in perm.iter().enumerate() {
        inv[old_idx] = new_idx;
    }
    let permuted: Vec<Poly> = ideal.gens().iter().map(|g| g.permute(&perm)).collect();
    let basis = reduced_groebner(&permuted, &MonomialOrder::Block { split });
    let kept_gens: Vec<Poly> = basis
        .into_iter()
        .filter(|g| {
            let support = g.support();
            support[..split].iter().all(|&used| !used)
        })
        .map(|g| g.permute(&inv))
        .collect();
    Ideal::new(ideal.nvars(), kept_gens)
}

/// Saturation `I : g^infinity` via an inverse variable: adjoin `w`, add
/// `1 - w*g`, and eliminate `w`. Idempotent and contains `I`.
pub fn saturate(ideal: &Ideal, g: &Poly) -> Result<Ideal> {
    if g.is_zero() {
        return Err(Error::InvalidArgument("cannot saturate by zero".into()));
    }
    if g.nvars() != ideal.nvars() {
        return Err(Error::ContextMismatch { expected: ideal.nvars(), found: g.nvars() });
    }
    let n = ideal.nvars();
    let mut gens: Vec<Poly> = ideal.gens().iter().map(|p| p.pad_front(1)).collect();
    let w = Poly::var(n + 1, 0);
    let g_ext = g.pad_front(1);
    gens.push(&Poly::one(n + 1) - &(&w * &g_ext));
    let extended = Ideal::new(n + 1, gens);
    let mut keep = vec![true; n + 1];
    keep[0] = false;
    let eliminated = eliminate(&extended, &keep);
    let gens_back: Vec<Poly> = eliminated.gens().iter().map(|p| p.drop_front(1)).collect();
    Ok(Ideal::new(n, gens_back))
}

// ---------------------------------------------------------------------------
// Buchberger engine with optional cofactor tracking.

#[derive(Debug, Clone)]
struct Carrier {
    p: Poly,
    /// Exact coordinates of `p` over the original generator list, present
    /// only when the engine runs in tracking mode.
    coords: Option<Vec<Poly>>,
}

impl Carrier {
    fn scale(&mut self, c: &Rational) {
        self.p = self.p.scale(c);
        if let Some(coords) = &mut self.coords {
            for q in coords.iter_mut() {
                *q = q.scale(c);
            }
        }
    }

    /// `self -= (m, c) * other`
    fn sub_mul(&mut self, m: &Monomial, c: &Rational, other: &Carrier) {
        self.p = &self.p - &other.p.mul_term(m, c);
        if let (Some(coords), Some(other_coords)) = (&mut self.coords, &other.coords) {
            for (q, oq) in coords.iter_mut().zip(other_coords) {
                *q = &*q - &oq.mul_term(m, c);
            }
        }
    }
}

struct Engine<'a> {
    order: &'a MonomialOrder,
    basis: Vec<Carrier>,
    leads: Vec<(Monomial, Rational)>,
}

impl<'a> Engine<'a> {
    fn full_reduce(&self, mut work: Carrier) -> Carrier {
        // Standard full normal form: divide the leading term when possible,
        // otherwise freeze it into the remainder and continue on the tail.
        let mut remainder = Carrier {
            p: Poly::zero(work.p.nvars()),
            coords: work.coords.as_ref().map(|c| vec![Poly::zero(c[0].nvars()); c.len()]),
        };
        'outer: while let Some((lm, lc)) = work.p.leading(self.order) {
            let lm = lm.clone();
            let lc = lc.clone();
            for (i, (dm, dc)) in self.leads.iter().enumerate() {
                if dm.divides(&lm) {
                    let qm = lm.div(dm);
                    let qc = &lc / dc;
                    work.sub_mul(&qm, &qc, &self.basis[i]);
                    continue 'outer;
                }
            }
            remainder.p = &remainder.p + &Poly::term(lm.clone(), lc.clone());
            work.p = &work.p - &Poly::term(lm, lc);
        }
        if let (Some(rc), Some(wc)) = (&mut remainder.coords, &work.coords) {
            for (r, w) in rc.iter_mut().zip(wc) {
                *r = &*r + w;
            }
        }
        remainder
    }

    fn push(&mut self, carrier: Carrier) {
        let (lm, lc) = carrier.p.leading(self.order).expect("nonzero");
        self.leads.push((lm.clone(), lc.clone()));
        self.basis.push(carrier);
    }
}

fn run_buchberger(gens: &[Poly], order: &MonomialOrder, track: bool) -> Vec<Carrier> {
    let nvars = gens.first().map(Poly::nvars).unwrap_or(0);
    let coords_of = |k: usize| {
        let mut coords = vec![Poly::zero(nvars); gens.len()];
        coords[k] = Poly::one(nvars);
        coords
    };
    let mut engine = Engine { order, basis: Vec::new(), leads: Vec::new() };
    for (k, g) in gens.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let carrier = Carrier { p: g.clone(), coords: track.then(|| coords_of(k)) };
        let reduced = engine.full_reduce(carrier);
        if !reduced.p.is_zero() {
            engine.push(reduced);
        }
    }

    let mut pending: Vec<(usize, usize)> = Vec::new();
    let mut done: Vec<(usize, usize)> = Vec::new();
    for j in 0..engine.basis.len() {
        for i in 0..j {
            pending.push((i, j));
        }
    }

    while !pending.is_empty() {
        // Normal selection: smallest pair lcm under the order.
        let best = pending
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let la = engine.leads[a.0].0.lcm(&engine.leads[a.1].0);
                let lb = engine.leads[b.0].0.lcm(&engine.leads[b.1].0);
                order.cmp(&la, &lb).then(a.cmp(b))
            })
            .map(|(idx, _)| idx)
            .unwrap();
        let (i, j) = pending.swap_remove(best);
        done.push((i, j));

        let (li, lj) = (&engine.leads[i], &engine.leads[j]);
        // First criterion: coprime leading monomials reduce to zero.
        if li.0.coprime(&lj.0) {
            continue;
        }
        let lcm = li.0.lcm(&lj.0);
        // Second (chain) criterion: some third element divides the pair lcm
        // and both side pairs were already treated with strictly smaller lcms.
        let chain = (0..engine.basis.len()).any(|k| {
            if k == i || k == j {
                return false;
            }
            let lk = &engine.leads[k].0;
            if !lk.divides(&lcm) {
                return false;
            }
            let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
            let lik = engine.leads[i].0.lcm(lk);
            let ljk = engine.leads[j].0.lcm(lk);
            lik != lcm && ljk != lcm && done.contains(&key(i, k)) && done.contains(&key(j, k))
        });
        if chain {
            continue;
        }

        // S-pair, fully reduced.
        let mi = lcm.div(&li.0);
        let mj = lcm.div(&lj.0);
        let ci = Rational::one() / &li.1;
        let cj = Rational::one() / &lj.1;
        let mut s = Carrier {
            p: Poly::zero(nvars),
            coords: track.then(|| vec![Poly::zero(nvars); gens.len()]),
        };
        s.sub_mul(&mi, &-ci, &engine.basis[i]);
        s.sub_mul(&mj, &cj, &engine.basis[j]);
        let reduced = engine.full_reduce(s);
        if !reduced.p.is_zero() {
            let new_idx = engine.basis.len();
            engine.push(reduced);
            for k in 0..new_idx {
                pending.push((k, new_idx));
            }
        }
    }

    // Minimize: drop any element whose leading monomial another kept one divides.
    let n = engine.basis.len();
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..n {
        let lm_i = &engine.leads[i].0;
        let redundant = (0..n).any(|j| {
            j != i
                && engine.leads[j].0.divides(lm_i)
                && (engine.leads[j].0 != *lm_i || j < i)
        });
        if !redundant {
            kept.push(i);
        }
    }

    let mut minimal: Vec<Carrier> = kept.iter().map(|&i| engine.basis[i].clone()).collect();
    for c in &mut minimal {
        let lc = c.p.leading(order).unwrap().1.clone();
        c.scale(&lc.recip());
    }

    // Tail-reduce each element against the others to reach the reduced basis.
    let final_leads: Vec<(Monomial, Rational)> = minimal
        .iter()
        .map(|c| {
            let (m, q) = c.p.leading(order).unwrap();
            (m.clone(), q.clone())
        })
        .collect();
    let mut reduced_out: Vec<Carrier> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<Carrier> = minimal
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| c.clone())
            .collect();
        let other_leads: Vec<(Monomial, Rational)> = final_leads
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, l)| l.clone())
            .collect();
        let sub_engine = Engine { order, basis: others, leads: other_leads };
        reduced_out.push(sub_engine.full_reduce(minimal[i].clone()));
    }

    reduced_out.sort_by(|a, b| canonical_cmp(&b.p, &a.p, order));
    reduced_out
}

/// Reduced Groebner basis of the span of `gens` under `order`.
pub fn reduced_groebner(gens: &[Poly], order: &MonomialOrder) -> Vec<Poly> {
    run_buchberger(gens, order, false).into_iter().map(|c| c.p).collect()
}

/// Groebner basis with exact coordinates over the original generators, for
/// cofactor extraction. The tracked invariant `p == sum(coords[k] * gens[k])`
/// holds exactly in the ambient ring.
pub struct TrackedBasis {
    order: MonomialOrder,
    gens: Vec<Poly>,
    elems: Vec<(Poly, Vec<Poly>)>,
}

impl TrackedBasis {
    pub fn new(gens: &[Poly], order: &MonomialOrder) -> Self {
        let carriers = run_buchberger(gens, order, true);
        let elems = carriers
            .into_iter()
            .map(|c| (c.p, c.coords.expect("tracking enabled")))
            .collect();
        TrackedBasis { order: *order, gens: gens.to_vec(), elems }
    }

    pub fn basis_polys(&self) -> Vec<&Poly> {
        self.elems.iter().map(|(p, _)| p).collect()
    }

    /// Full reduction of `f`; returns cofactors over the ORIGINAL generators
    /// and the remainder, with `f == sum(cof[k] * gens[k]) + remainder`.
    pub fn reduce(&self, f: &Poly) -> (Vec<Poly>, Poly) {
        let nvars = f.nvars();
        let mut cof = vec![Poly::zero(nvars); self.gens.len()];
        if self.elems.is_empty() {
            return (cof, f.clone());
        }
        let basis: Vec<Poly> = self.elems.iter().map(|(p, _)| p.clone()).collect();
        let (q, r) = divide_multivariate(f, &basis, &self.order).expect("basis nonzero");
        for (qi, (_, coords)) in q.iter().zip(&self.elems) {
            if qi.is_zero() {
                continue;
            }
            for (k, ck) in coords.iter().enumerate() {
                if !ck.is_zero() {
                    cof[k] = &cof[k] + &(qi * ck);
                }
            }
        }
        (cof, r)
    }
}
