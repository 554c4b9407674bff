use std::cmp::Ordering;

use crate::poly::Monomial;

/// Monomial order on exponent vectors of a fixed width.
///
/// `Block { split }` is an elimination order for the first `split` variables:
/// it compares the leading block by graded reverse lexicographic order first,
/// so any monomial containing an eliminated variable sorts above every
/// monomial free of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    Lex,
    GrevLex,
    Block { split: usize },
}

impl Default for MonomialOrder {
    fn default() -> Self {
        MonomialOrder::GrevLex
    }
}

fn lex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    a.cmp(b)
}

fn grevlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {
            for (ea, eb) in a.iter().zip(b).rev() {
                match ea.cmp(eb) {
                    Ordering::Equal => continue,
                    // Smaller exponent in the last differing slot wins.
                    other => return other.reverse(),
                }
            }
            Ordering::Equal
        }
        other => other,
    }
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        debug_assert_eq!(a.width(), b.width());
        match *self {
            MonomialOrder::Lex => lex_cmp(a.exps(), b.exps()),
            MonomialOrder::GrevLex => grevlex_cmp(a.exps(), b.exps()),
            MonomialOrder::Block { split } => {
                let split = split.min(a.width());
                match grevlex_cmp(&a.exps()[..split], &b.exps()[..split]) {
                    Ordering::Equal => grevlex_cmp(&a.exps()[split..], &b.exps()[split..]),
                    other => other,
                }
            }
        }
    }
}
