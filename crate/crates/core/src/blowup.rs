use std::collections::BTreeSet;
use std::collections::VecDeque;
use std::sync::Arc;

use crate::chart::{same_ring, Chart, Principality, RingMap};
use crate::diag::{reduce, DiagOptions, ReduceOutcome, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::hom::{pullback_hom, MatrixHom};
use crate::ideal::{saturate, Ideal};
use crate::order::MonomialOrder;
use crate::poly::{canonical_cmp, Monomial, Poly, Rational};

const ORDER: MonomialOrder = MonomialOrder::GrevLex;

/// Order in which pruned center generators spawn child charts. `Reversed`
/// exists to demonstrate that final invariants do not depend on the chart
/// ordering, only intermediate presentations do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenterOrder {
    #[default]
    Canonical,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TowerOptions {
    pub max_depth: usize,
    pub center_order: CenterOrder,
    pub seed: u64,
}

impl Default for TowerOptions {
    fn default() -> Self {
        TowerOptions { max_depth: 8, center_order: CenterOrder::Canonical, seed: DEFAULT_SEED }
    }
}

/// One chart of a blowup: the chart ring, the ring map from the parent, and
/// the equation of the exceptional divisor on this chart (the image of the
/// center generator the chart belongs to).
#[derive(Debug, Clone)]
pub struct BlowupChild {
    pub chart: Arc<Chart>,
    pub map: RingMap,
    pub exceptional: Poly,
    pub label: String,
}

/// Blowup of one chart along one center: one child chart per pruned center
/// generator, covering the blown-up space.
#[derive(Debug, Clone)]
pub struct BlowupStep {
    pub parent: Arc<Chart>,
    pub center: Ideal,
    pub children: Vec<BlowupChild>,
}

/// Terminal chart of a tower with the composite map from the root; lineage
/// records the child index chosen at each level, so sorting by lineage gives
/// a canonical leaf order.
#[derive(Debug, Clone)]
pub struct TowerLeaf {
    pub chart: Arc<Chart>,
    pub map: RingMap,
    pub lineage: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BlowupTower {
    pub root: Arc<Chart>,
    pub steps: Vec<BlowupStep>,
    pub leaves: Vec<TowerLeaf>,
}

/// Reduces the center modulo relations, normalizes generators monic, sorts
/// them canonically (largest first) and drops any generator lying in the
/// ideal spanned by the others, so every child chart is necessary.
fn pruned_center(parent: &Chart, center: &Ideal) -> Result<Vec<Poly>> {
    if center.nvars() != parent.nvars() {
        return Err(Error::ContextMismatch { expected: parent.nvars(), found: center.nvars() });
    }
    let mut gens: Vec<Poly> = center
        .gens()
        .iter()
        .map(|g| parent.reduce(g, &ORDER).monic(&ORDER))
        .filter(|g| !g.is_zero())
        .collect();
    // Largest leading monomial first, longer polynomials before shorter ones
    // on ties: the greedy pass below then discards composite generators
    // before the simple ones they decompose into.
    gens.sort_by(|a, b| {
        let la = a.leading_monomial(&ORDER);
        let lb = b.leading_monomial(&ORDER);
        match (la, lb) {
            (Some(ma), Some(mb)) => ORDER
                .cmp(mb, ma)
                .then_with(|| b.term_count().cmp(&a.term_count()))
                .then_with(|| canonical_cmp(b, a, &ORDER)),
            _ => unreachable!("zero generators were filtered"),
        }
    });
    gens.dedup();
    if gens.is_empty() {
        return Err(Error::ZeroCenter);
    }
    let mut i = 0;
    while i < gens.len() && gens.len() > 1 {
        let mut others: Vec<Poly> = gens
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        others.extend(parent.relations().gens().iter().cloned());
        if Ideal::new(parent.nvars(), others).contains(&gens[i], &ORDER) {
            gens.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(gens)
}

/// Smallest decorated family `t1, t2, ...` (then `t1_1, ...`) that avoids
/// every variable name of the parent chart.
fn fresh_names(parent: &Chart, count: usize) -> Vec<String> {
    let taken: BTreeSet<&str> = parent.vars().iter().map(String::as_str).collect();
    for d in 0u32.. {
        let names: Vec<String> = (1..=count)
            .map(|j| if d == 0 { format!("t{j}") } else { format!("t{d}_{j}") })
            .collect();
        if names.iter().all(|n| !taken.contains(n.as_str())) {
            return names;
        }
    }
    unreachable!("some decoration level is always fresh")
}

/// If `g` contains a term c*x_v with constant c and x_v occurs in no other
/// monomial of `g`, returns the polynomial x_v is forced to equal.
fn linear_solution(g: &Poly, v: usize) -> Option<Poly> {
    let width = g.nvars();
    let target = Monomial::var(width, v);
    let mut coeff: Option<Rational> = None;
    for (m, c) in g.terms() {
        if *m == target {
            coeff = Some(c.clone());
        } else if m.exps()[v] > 0 {
            return None;
        }
    }
    let c = coeff?;
    let rest = g - &Poly::term(target, c.clone());
    Some(rest.scale(&(-c.recip())))
}

/// A chart presentation assembled during construction: variable names, the
/// relation generators, the parent-variable images, and exceptional
/// equations, all in one shrinking ambient context.
struct Presentation {
    names: Vec<String>,
    rel: Vec<Poly>,
    images: Vec<Poly>,
    inherited: Vec<Poly>,
    exceptional: Poly,
}

impl Presentation {
    /// Repeatedly eliminates any variable a relation solves linearly,
    /// rewriting every tracked polynomial, until no relation does.
    fn simplify(&mut self) {
        loop {
            let mut found = None;
            'scan: for (gidx, g) in self.rel.iter().enumerate() {
                for v in 0..self.names.len() {
                    if let Some(expr) = linear_solution(g, v) {
                        found = Some((gidx, v, expr));
                        break 'scan;
                    }
                }
            }
            let Some((gidx, v, expr)) = found else { break };
            let width = self.names.len();
            let subst: Vec<Poly> = (0..width)
                .map(|s| if s == v { expr.clone() } else { Poly::var(width, s) })
                .collect();
            let rewrite = |p: &Poly| p.substitute(&subst).remove_var(v);
            self.rel.remove(gidx);
            self.rel = self.rel.iter().map(rewrite).filter(|p| !p.is_zero()).collect();
            self.images = self.images.iter().map(rewrite).collect();
            self.inherited = self.inherited.iter().map(rewrite).collect();
            self.exceptional = rewrite(&self.exceptional);
            self.names.remove(v);
        }
    }
}

fn assemble_child(
    parent: &Arc<Chart>,
    mut pres: Presentation,
    child_name: &str,
    label: &str,
) -> Result<BlowupChild> {
    pres.simplify();
    let mut chart = Chart::new(child_name, pres.names, pres.rel)?;
    for ((lbl, _), img) in parent.exceptionals().iter().zip(&pres.inherited) {
        let reduced = chart.reduce(img, &ORDER);
        chart.push_exceptional(lbl.clone(), reduced)?;
    }
    let exceptional = chart.reduce(&pres.exceptional, &ORDER);
    chart.push_exceptional(label.to_string(), exceptional.clone())?;
    let chart = Arc::new(chart);
    let map = RingMap::new(parent.clone(), chart.clone(), pres.images)?;
    Ok(BlowupChild { chart, map, exceptional, label: label.to_string() })
}

/// The chart for generator `i`: adjoin one variable per other generator,
/// impose g_i * y_j = g_j, saturate away the locus g_i = 0, then present
/// the result minimally by eliminating linearly solved variables.
fn rees_child(
    parent: &Arc<Chart>,
    pruned: &[Poly],
    i: usize,
    child_name: &str,
    label: &str,
) -> Result<BlowupChild> {
    let extra = pruned.len() - 1;
    let t = parent.nvars();
    let total = t + extra;
    let mut names: Vec<String> = parent.vars().to_vec();
    names.extend(fresh_names(parent, extra));

    let gi = pruned[i].pad_back(extra);
    let mut gens: Vec<Poly> =
        parent.relations().gens().iter().map(|g| g.pad_back(extra)).collect();
    let mut slot = t;
    for (j, gj) in pruned.iter().enumerate() {
        if j == i {
            continue;
        }
        gens.push(&(&gi * &Poly::var(total, slot)) - &gj.pad_back(extra));
        slot += 1;
    }
    let sat = saturate(&Ideal::new(total, gens), &gi)?;
    let rel: Vec<Poly> = sat.basis(&ORDER).to_vec();

    let pres = Presentation {
        names,
        rel,
        images: (0..t).map(|v| Poly::var(total, v)).collect(),
        inherited: parent.exceptionals().iter().map(|(_, p)| p.pad_back(extra)).collect(),
        exceptional: gi,
    };
    assemble_child(parent, pres, child_name, label)
}

/// A principal center cuts a divisor that is already locally free, so the
/// blowup is an isomorphism: one child with the same ring.
fn trivial_child(
    parent: &Arc<Chart>,
    g: &Poly,
    child_name: &str,
    label: &str,
) -> Result<BlowupChild> {
    let pres = Presentation {
        names: parent.vars().to_vec(),
        rel: parent.relations().gens().to_vec(),
        images: (0..parent.nvars()).map(|v| Poly::var(parent.nvars(), v)).collect(),
        inherited: parent.exceptionals().iter().map(|(_, p)| p.clone()).collect(),
        exceptional: g.clone(),
    };
    // No simplification opportunity is lost here: the presentation equals
    // the parent's, which is assumed minimal.
    assemble_child(parent, pres, child_name, label)
}

pub fn blowup(parent: &Arc<Chart>, center: &Ideal) -> Result<BlowupStep> {
    blowup_with(parent, center, CenterOrder::Canonical)
}

pub fn blowup_with(
    parent: &Arc<Chart>,
    center: &Ideal,
    center_order: CenterOrder,
) -> Result<BlowupStep> {
    let mut pruned = pruned_center(parent, center)?;
    if center_order == CenterOrder::Reversed {
        pruned.reverse();
    }
    let label = format!("E{}", parent.exceptionals().len() + 1);
    let pruned_ideal = Ideal::new(parent.nvars(), pruned.clone());
    let children = match parent.principality(&pruned_ideal, &ORDER) {
        Principality::Zero => return Err(Error::ZeroCenter),
        Principality::Principal(g) => {
            let name = format!("{}.0", parent.name());
            vec![trivial_child(parent, &g, &name, &label)?]
        }
        // An undecided test is safe here: the Rees charts are valid for any
        // nonzero center, a missed principal case just adds an isomorphic
        // cover instead of a single chart.
        Principality::NotPrincipal | Principality::Undecided => {
            let mut children = Vec::with_capacity(pruned.len());
            for i in 0..pruned.len() {
                let name = format!("{}.{}", parent.name(), i);
                children.push(rees_child(parent, &pruned, i, &name, &label)?);
            }
            children
        }
    };
    Ok(BlowupStep { parent: parent.clone(), center: pruned_ideal, children })
}

/// Iterated blowup driven by the staged reduction: every leaf where the
/// reduction gets stuck is blown up along the stuck stage's entry ideal,
/// until the reduction runs to completion on every leaf.
pub fn determinantal_tower(
    chart: &Arc<Chart>,
    phi: &MatrixHom,
    opts: &TowerOptions,
) -> Result<BlowupTower> {
    if !same_ring(chart, phi.chart()) {
        return Err(Error::ChartMismatch);
    }
    struct Node {
        chart: Arc<Chart>,
        map: RingMap,
        phi: MatrixHom,
        lineage: Vec<usize>,
        depth: usize,
    }
    let diag_opts = DiagOptions { seed: opts.seed };
    let mut queue: VecDeque<Node> = VecDeque::new();
    queue.push_back(Node {
        chart: chart.clone(),
        map: RingMap::identity(chart.clone()),
        phi: phi.clone(),
        lineage: Vec::new(),
        depth: 0,
    });
    let mut steps = Vec::new();
    let mut leaves = Vec::new();
    while let Some(node) = queue.pop_front() {
        match reduce(&node.phi, &diag_opts)? {
            ReduceOutcome::Done(_) => {
                leaves.push(TowerLeaf { chart: node.chart, map: node.map, lineage: node.lineage })
            }
            ReduceOutcome::Stuck { stage: _, center } => {
                if node.depth == opts.max_depth {
                    return Err(Error::DepthExceeded { max_depth: opts.max_depth });
                }
                let step = blowup_with(&node.chart, &center, opts.center_order)?;
                for (idx, child) in step.children.iter().enumerate() {
                    let map = node.map.then(&child.map)?;
                    let pulled = pullback_hom(&child.map, &node.phi)?;
                    let mut lineage = node.lineage.clone();
                    lineage.push(idx);
                    queue.push_back(Node {
                        chart: child.chart.clone(),
                        map,
                        phi: pulled,
                        lineage,
                        depth: node.depth + 1,
                    });
                }
                steps.push(step);
            }
        }
    }
    leaves.sort_by(|a, b| a.lineage.cmp(&b.lineage));
    Ok(BlowupTower { root: chart.clone(), steps, leaves })
}

/// Composite root-to-leaf maps in canonical leaf order.
pub fn tower_leaf_maps(tower: &BlowupTower) -> Vec<RingMap> {
    tower.leaves.iter().map(|l| l.map.clone()).collect()
}
