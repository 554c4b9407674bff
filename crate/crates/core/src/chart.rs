use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ideal::{ideal_equal, reduced_groebner, Ideal, TrackedBasis};
use crate::order::MonomialOrder;
use crate::parse::parse_poly;
use crate::poly::{Poly, Rational};

/// Affine chart: a polynomial ring in named variables modulo a relation
/// ideal assumed prime, plus bookkeeping for exceptional divisor equations
/// accumulated by blowups. Immutable once shared.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    vars: Vec<String>,
    relations: Ideal,
    exceptionals: Vec<(String, Poly)>,
}

fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    /// Relation generators must live in the chart context and must not
    /// generate the unit ideal (the chart would be empty).
    pub fn new(name: &str, vars: Vec<String>, relation_gens: Vec<Poly>) -> Result<Chart> {
        let mut seen = std::collections::BTreeSet::new();
        for v in &vars {
            if !valid_identifier(v) {
                return Err(Error::InvalidArgument(format!("invalid variable name `{v}`")));
            }
            if !seen.insert(v.clone()) {
                return Err(Error::InvalidArgument(format!("duplicate variable name `{v}`")));
            }
        }
        for g in &relation_gens {
            if g.nvars() != vars.len() {
                return Err(Error::ContextMismatch { expected: vars.len(), found: g.nvars() });
            }
        }
        let relations = Ideal::new(vars.len(), relation_gens);
        if relations.is_unit_ideal(&MonomialOrder::GrevLex) {
            return Err(Error::InvalidArgument(format!(
                "relations of chart `{name}` generate the unit ideal"
            )));
        }
        Ok(Chart { name: name.to_string(), vars, relations, exceptionals: Vec::new() })
    }

    /// Pure polynomial chart with no relations.
    pub fn affine(name: &str, vars: &[&str]) -> Chart {
        Chart::new(name, vars.iter().map(|s| s.to_string()).collect(), vec![])
            .expect("affine chart construction cannot fail on valid names")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn relations(&self) -> &Ideal {
        &self.relations
    }

    pub fn exceptionals(&self) -> &[(String, Poly)] {
        &self.exceptionals
    }

    /// Records an exceptional divisor equation; rejects equations that
    /// vanish in the quotient.
    pub fn push_exceptional(&mut self, label: String, poly: Poly) -> Result<()> {
        if self.reduce(&poly, &MonomialOrder::GrevLex).is_zero() {
            return Err(Error::InvalidArgument(format!(
                "exceptional `{label}` vanishes modulo relations"
            )));
        }
        self.exceptionals.push((label, poly));
        Ok(())
    }

    pub fn parse(&self, text: &str) -> Result<Poly> {
        parse_poly(text, &self.vars)
    }

    pub fn render(&self, p: &Poly, order: &MonomialOrder) -> String {
        p.render(&self.vars, order)
    }

    /// Normal form modulo the chart relations: the canonical representative
    /// of the residue class of `f`.
    pub fn reduce(&self, f: &Poly, order: &MonomialOrder) -> Poly {
        self.relations.normal_form(f, order)
    }

    pub fn is_zero_mod(&self, f: &Poly, order: &MonomialOrder) -> bool {
        self.reduce(f, order).is_zero()
    }

    pub fn eq_mod(&self, a: &Poly, b: &Poly, order: &MonomialOrder) -> bool {
        self.is_zero_mod(&(a - b), order)
    }

    /// True iff the point satisfies every relation.
    pub fn contains_point(&self, point: &[Rational]) -> Result<bool> {
        if point.len() != self.nvars() {
            return Err(Error::ContextMismatch { expected: self.nvars(), found: point.len() });
        }
        Ok(self.relations.gens().iter().all(|g| g.eval(point).is_zero()))
    }

    /// True iff `u` is invertible in the chart ring, i.e. 1 lies in the
    /// ideal generated by `u` and the relations.
    pub fn is_unit(&self, u: &Poly, order: &MonomialOrder) -> bool {
        let r = self.reduce(u, order);
        if r.is_zero() {
            return false;
        }
        if self.relations.gens().is_empty() {
            return r.is_constant();
        }
        if r.is_constant() {
            return true;
        }
        let mut gens = vec![r];
        gens.extend(self.relations.gens().iter().cloned());
        Ideal::new(self.nvars(), gens).is_unit_ideal(order)
    }

    /// Multiplicative inverse of `u` in the chart ring, extracted from a
    /// cofactor expression of 1 over (u) + relations; `None` if not a unit.
    pub fn unit_inverse(&self, u: &Poly, order: &MonomialOrder) -> Option<Poly> {
        let r = self.reduce(u, order);
        if r.is_zero() {
            return None;
        }
        if let Some(c) = r.as_constant() {
            return Some(Poly::constant(self.nvars(), c.recip()));
        }
        if self.relations.gens().is_empty() {
            return None;
        }
        let mut gens = vec![r.clone()];
        gens.extend(self.relations.gens().iter().cloned());
        let tracked = TrackedBasis::new(&gens, order);
        let (cof, rem) = tracked.reduce(&Poly::one(self.nvars()));
        if !rem.is_zero() {
            return None;
        }
        let inv = self.reduce(&cof[0], order);
        debug_assert!(self.eq_mod(&(&inv * &r), &Poly::one(self.nvars()), order));
        Some(inv)
    }

    /// Decides whether the image of `ideal` in the chart ring is zero,
    /// principal (returning a monic generator), or not principal. In a pure
    /// polynomial ring the reduced basis settles the question exactly; in a
    /// proper quotient ring generators and basis elements are tried as
    /// candidates and failure is reported as `Undecided`, never guessed.
    pub fn principality(&self, ideal: &Ideal, order: &MonomialOrder) -> Principality {
        let reduced: Vec<Poly> = ideal
            .gens()
            .iter()
            .map(|g| self.reduce(g, order))
            .filter(|g| !g.is_zero())
            .collect();
        if reduced.is_empty() {
            return Principality::Zero;
        }
        if self.relations.gens().is_empty() {
            let basis = reduced_groebner(&reduced, order);
            return match basis.len() {
                0 => Principality::Zero,
                1 => Principality::Principal(basis.into_iter().next().unwrap()),
                _ => Principality::NotPrincipal,
            };
        }
        let mut combined = reduced.clone();
        combined.extend(self.relations.gens().iter().cloned());
        let full = Ideal::new(self.nvars(), combined);
        let mut candidates: Vec<Poly> = reduced.clone();
        for b in full.basis(order).iter() {
            let r = self.reduce(b, order);
            if !r.is_zero() && !candidates.contains(&r) {
                candidates.push(r);
            }
        }
        for c in candidates {
            let mut single = vec![c.clone()];
            single.extend(self.relations.gens().iter().cloned());
            let candidate_ideal = Ideal::new(self.nvars(), single);
            if ideal_equal(&candidate_ideal, &full, order) {
                let normalized = self.reduce(&c, order);
                let lc = normalized.leading(order).expect("nonzero").1.clone();
                return Principality::Principal(normalized.scale(&lc.recip()));
            }
        }
        Principality::Undecided
    }

    /// Joined description "name: vars / relations" used in diagnostics.
    pub fn describe(&self) -> String {
        let order = MonomialOrder::GrevLex;
        let rels: Vec<String> = self.relations.gens().iter().map(|g| self.render(g, &order)).collect();
        if rels.is_empty() {
            format!("{}[{}]", self.name, self.vars.join(", "))
        } else {
            format!("{}[{} | {}]", self.name, self.vars.join(", "), rels.join(", "))
        }
    }
}

/// Outcome of the chart-level principality test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Principality {
    /// The ideal vanishes in the chart ring.
    Zero,
    /// Principal with the given monic generator (canonical representative).
    Principal(Poly),
    /// Provably not principal (decided only in pure polynomial charts).
    NotPrincipal,
    /// Could not be decided by the candidate search in a quotient ring.
    Undecided,
}

/// Ring homomorphism between chart rings, given by an image polynomial per
/// source variable. Construction verifies that source relations land in the
/// target relation ideal, so the map is well defined on the quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct RingMap {
    source: Arc<Chart>,
    target: Arc<Chart>,
    images: Vec<Poly>,
}

impl RingMap {
    pub fn new(source: Arc<Chart>, target: Arc<Chart>, images: Vec<Poly>) -> Result<RingMap> {
        if images.len() != source.nvars() {
            return Err(Error::InvalidArgument(format!(
                "ring map needs {} images, got {}",
                source.nvars(),
                images.len()
            )));
        }
        let order = MonomialOrder::GrevLex;
        let images: Vec<Poly> = images
            .into_iter()
            .map(|im| {
                if im.nvars() != target.nvars() {
                    return Err(Error::ContextMismatch {
                        expected: target.nvars(),
                        found: im.nvars(),
                    });
                }
                Ok(target.reduce(&im, &order))
            })
            .collect::<Result<_>>()?;
        for rel in source.relations().gens() {
            let image = substitute_into(rel, &images, target.nvars());
            if !target.is_zero_mod(&image, &order) {
                return Err(Error::InvalidArgument(format!(
                    "ring map does not respect relation {} of chart {}",
                    source.render(rel, &order),
                    source.name()
                )));
            }
        }
        Ok(RingMap { source, target, images })
    }

    pub fn identity(chart: Arc<Chart>) -> RingMap {
        let images = (0..chart.nvars()).map(|i| Poly::var(chart.nvars(), i)).collect();
        RingMap { source: chart.clone(), target: chart, images }
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn images(&self) -> &[Poly] {
        &self.images
    }

    /// Substitution followed by reduction modulo target relations.
    pub fn apply(&self, f: &Poly) -> Result<Poly> {
        if f.nvars() != self.source.nvars() {
            return Err(Error::ContextMismatch { expected: self.source.nvars(), found: f.nvars() });
        }
        let image = substitute_into(f, &self.images, self.target.nvars());
        Ok(self.target.reduce(&image, &MonomialOrder::GrevLex))
    }

    /// Composite map `next . self` (self first). Requires the intermediate
    /// charts to agree as rings.
    pub fn then(&self, next: &RingMap) -> Result<RingMap> {
        if !same_ring(self.target(), next.source()) {
            return Err(Error::ChartMismatch);
        }
        let images: Vec<Poly> =
            self.images.iter().map(|im| next.apply(im)).collect::<Result<_>>()?;
        Ok(RingMap { source: self.source.clone(), target: next.target.clone(), images })
    }

    /// True iff the kernel of the induced map of quotient rings is contained
    /// in the source relations, i.e. the map of domains is injective. The
    /// kernel is computed by eliminating target variables from the graph
    /// ideal (target relations plus `source_var - image`).
    pub fn is_dominant(&self) -> bool {
        let s = self.source.nvars();
        let t = self.target.nvars();
        let total = t + s;
        let mut gens: Vec<Poly> = self
            .target
            .relations()
            .gens()
            .iter()
            .map(|g| g.pad_back(s))
            .collect();
        for (i, im) in self.images.iter().enumerate() {
            gens.push(&Poly::var(total, t + i) - &im.pad_back(s));
        }
        let graph = Ideal::new(total, gens);
        let mut keep = vec![false; total];
        for slot in keep.iter_mut().skip(t) {
            *slot = true;
        }
        let kernel = crate::ideal::eliminate(&graph, &keep);
        let order = MonomialOrder::GrevLex;
        kernel
            .gens()
            .iter()
            .map(|g| g.drop_front(t))
            .all(|g| self.source.is_zero_mod(&g, &order))
    }
}

fn substitute_into(f: &Poly, images: &[Poly], target_nvars: usize) -> Poly {
    if images.is_empty() {
        let c = f.as_constant().expect("zero-variable polynomial is constant");
        return Poly::constant(target_nvars, c);
    }
    f.substitute(images)
}

/// Same underlying ring: equal variable lists and equal relation ideals.
pub fn same_ring(a: &Chart, b: &Chart) -> bool {
    a.vars() == b.vars() && ideal_equal(a.relations(), b.relations(), &MonomialOrder::GrevLex)
}

/// Ideal generated by the images of the generators plus target relations,
/// in the target context.
pub fn pull_ideal(m: &RingMap, i: &Ideal) -> Result<Ideal> {
    if i.nvars() != m.source().nvars() {
        return Err(Error::ContextMismatch { expected: m.source().nvars(), found: i.nvars() });
    }
    let mut gens: Vec<Poly> = i.gens().iter().map(|g| m.apply(g)).collect::<Result<_>>()?;
    gens.extend(m.target().relations().gens().iter().cloned());
    Ok(Ideal::new(m.target().nvars(), gens))
}

/// Plain list of charts covering a geometry; no gluing data is carried and
/// every verification is chart-local.
#[derive(Debug, Clone)]
pub struct Atlas {
    charts: Vec<Arc<Chart>>,
}

impl Atlas {
    pub fn new(charts: Vec<Arc<Chart>>) -> Result<Atlas> {
        if charts.is_empty() {
            return Err(Error::InvalidArgument("atlas needs at least one chart".into()));
        }
        Ok(Atlas { charts })
    }

    pub fn charts(&self) -> &[Arc<Chart>] {
        &self.charts
    }

    /// Applies `f` to every chart; results are ordered by chart index
    /// regardless of execution schedule.
    pub fn map_charts<U, F>(&self, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(&Arc<Chart>) -> U + Sync + Send,
    {
        crate::par::map_collect(&self.charts, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::ideal_equal;

    const O: MonomialOrder = MonomialOrder::GrevLex;

    fn arc(c: Chart) -> Arc<Chart> {
        Arc::new(c)
    }

    fn plane() -> Arc<Chart> {
        arc(Chart::affine("A2", &["x", "y"]))
    }

    fn blowup_chart() -> Arc<Chart> {
        arc(Chart::affine("A2_x", &["x", "t"]))
    }

    fn blowup_map() -> RingMap {
        let src = plane();
        let tgt = blowup_chart();
        let images = vec![tgt.parse("x").unwrap(), tgt.parse("x*t").unwrap()];
        RingMap::new(src, tgt, images).unwrap()
    }

    #[test]
    fn chart_construction_validates_names_and_relations() {
        assert!(Chart::new("bad", vec!["x".into(), "x".into()], vec![]).is_err());
        assert!(Chart::new("bad", vec!["2x".into()], vec![]).is_err());
        let one = Poly::one(1);
        assert!(Chart::new("empty", vec!["x".into()], vec![one]).is_err());
    }

    #[test]
    fn identity_map_fixes_polynomials() {
        let c = plane();
        let m = RingMap::identity(c.clone());
        let f = c.parse("x^2*y - 3*x + 1/2").unwrap();
        assert_eq!(m.apply(&f).unwrap(), f);
    }

    #[test]
    fn substitution_map_squares_image() {
        let m = blowup_map();
        let f = m.source().parse("y^2").unwrap();
        assert_eq!(m.apply(&f).unwrap(), m.target().parse("x^2*t^2").unwrap());
    }

    #[test]
    fn application_reduces_modulo_target_relations() {
        let tgt =
            arc(Chart::new("hyp", vec!["x".into(), "y".into()], vec![]).unwrap());
        let rel = tgt.parse("x*y").unwrap();
        let tgt = arc(Chart::new("hyp", vec!["x".into(), "y".into()], vec![rel]).unwrap());
        let m = RingMap::identity(tgt.clone());
        let f = tgt.parse("x*y + 1").unwrap();
        assert_eq!(m.apply(&f).unwrap(), Poly::one(2));
    }

    #[test]
    fn map_must_respect_relations() {
        let cone_rel = parse_poly("x*y - z^2", &names(&["x", "y", "z"]));
        let src = arc(
            Chart::new("cone", names(&["x", "y", "z"]), vec![cone_rel.unwrap()]).unwrap(),
        );
        let tgt = arc(Chart::affine("A2", &["s", "t"]));
        let good = vec![
            tgt.parse("s^2").unwrap(),
            tgt.parse("t^2").unwrap(),
            tgt.parse("s*t").unwrap(),
        ];
        assert!(RingMap::new(src.clone(), tgt.clone(), good).is_ok());
        let bad = vec![
            tgt.parse("s^2").unwrap(),
            tgt.parse("t^2").unwrap(),
            tgt.parse("s").unwrap(),
        ];
        assert!(RingMap::new(src, tgt, bad).is_err());
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    use crate::parse::parse_poly;

    #[test]
    fn composition_matches_nested_application() {
        let m = blowup_map();
        let c2 = m.target().clone();
        let c3 = arc(Chart::affine("A2_xt2", &["x", "u"]));
        let n = RingMap::new(
            c2,
            c3.clone(),
            vec![c3.parse("x").unwrap(), c3.parse("x*u").unwrap()],
        )
        .unwrap();
        let composite = m.then(&n).unwrap();
        let f = m.source().parse("y^2 + x*y").unwrap();
        assert_eq!(
            composite.apply(&f).unwrap(),
            n.apply(&m.apply(&f).unwrap()).unwrap()
        );
    }

    #[test]
    fn blowup_map_is_dominant_constant_map_is_not() {
        assert!(blowup_map().is_dominant());
        let c = plane();
        let zero = Poly::zero(2);
        let constant = RingMap::new(c.clone(), c.clone(), vec![zero.clone(), zero]).unwrap();
        assert!(!constant.is_dominant());
        assert!(RingMap::identity(c).is_dominant());
    }

    #[test]
    fn pull_ideal_absorbs_redundant_generator() {
        let m = blowup_map();
        let src = m.source().clone();
        let i = Ideal::new(2, vec![src.parse("x").unwrap(), src.parse("y").unwrap()]);
        let pulled = pull_ideal(&m, &i).unwrap();
        let expected = Ideal::new(2, vec![m.target().parse("x").unwrap()]);
        assert!(ideal_equal(&pulled, &expected, &O));
    }

    #[test]
    fn pull_of_zero_ideal_is_relations() {
        let rel = parse_poly("x*y", &names(&["x", "y"])).unwrap();
        let tgt = arc(Chart::new("hyp", names(&["x", "y"]), vec![rel.clone()]).unwrap());
        let m = RingMap::new(plane(), tgt.clone(), vec![
            tgt.parse("x").unwrap(),
            tgt.parse("y").unwrap(),
        ])
        .unwrap();
        let pulled = pull_ideal(&m, &Ideal::zero(2)).unwrap();
        assert!(ideal_equal(&pulled, &Ideal::new(2, vec![rel]), &O));
    }

    #[test]
    fn units_of_pure_and_quotient_charts() {
        let pure = plane();
        assert!(pure.is_unit(&pure.parse("2").unwrap(), &O));
        assert!(!pure.is_unit(&pure.parse("x").unwrap(), &O));

        let rel = parse_poly("x*y", &names(&["x", "y"])).unwrap();
        let quot = arc(Chart::new("hyp", names(&["x", "y"]), vec![rel]).unwrap());
        assert!(quot.is_unit(&quot.parse("1 - x*y").unwrap(), &O));

        let torus_rel = parse_poly("x*y - 1", &names(&["x", "y"])).unwrap();
        let torus = arc(Chart::new("torus", names(&["x", "y"]), vec![torus_rel]).unwrap());
        let x = torus.parse("x").unwrap();
        assert!(torus.is_unit(&x, &O));
        let inv = torus.unit_inverse(&x, &O).unwrap();
        assert_eq!(inv, torus.parse("y").unwrap());
        assert!(pure.unit_inverse(&pure.parse("x").unwrap(), &O).is_none());
        assert_eq!(
            pure.unit_inverse(&pure.parse("-1/2").unwrap(), &O).unwrap(),
            pure.parse("-2").unwrap()
        );
    }

    #[test]
    fn principality_in_pure_charts() {
        let c = plane();
        let powers = Ideal::new(2, vec![c.parse("x^2").unwrap(), c.parse("x^3").unwrap()]);
        assert_eq!(
            c.principality(&powers, &O),
            Principality::Principal(c.parse("x^2").unwrap())
        );
        let maximal = Ideal::new(2, vec![c.parse("x").unwrap(), c.parse("y").unwrap()]);
        assert_eq!(c.principality(&maximal, &O), Principality::NotPrincipal);

        let leaf = blowup_chart();
        let pulled = Ideal::new(2, vec![leaf.parse("x").unwrap(), leaf.parse("x*t").unwrap()]);
        assert_eq!(
            leaf.principality(&pulled, &O),
            Principality::Principal(leaf.parse("x").unwrap())
        );
    }

    #[test]
    fn principality_in_quotient_charts() {
        let rel = parse_poly("x*y", &names(&["x", "y"])).unwrap();
        let quot = arc(Chart::new("hyp", names(&["x", "y"]), vec![rel.clone()]).unwrap());

        let zero = Ideal::new(2, vec![rel]);
        assert_eq!(quot.principality(&zero, &O), Principality::Zero);

        let gens = Ideal::new(2, vec![quot.parse("x^2").unwrap(), quot.parse("x*y").unwrap()]);
        assert_eq!(
            quot.principality(&gens, &O),
            Principality::Principal(quot.parse("x^2").unwrap())
        );

        let hard = Ideal::new(2, vec![quot.parse("x").unwrap(), quot.parse("y").unwrap()]);
        assert_eq!(quot.principality(&hard, &O), Principality::Undecided);
    }

    #[test]
    fn atlas_requires_charts_and_maps_in_order() {
        assert!(Atlas::new(vec![]).is_err());
        let atlas = Atlas::new(vec![plane(), blowup_chart()]).unwrap();
        let name_lens = atlas.map_charts(|c| c.nvars());
        assert_eq!(name_lens, vec![2, 2]);
    }

    #[test]
    fn point_membership_checks_relations() {
        let rel = parse_poly("x*y - 1", &names(&["x", "y"])).unwrap();
        let torus = Chart::new("torus", names(&["x", "y"]), vec![rel]).unwrap();
        let on = vec![crate::poly::rat_int(2), Rational::new(1.into(), 2.into())];
        let off = vec![crate::poly::rat_int(2), crate::poly::rat_int(2)];
        assert!(torus.contains_point(&on).unwrap());
        assert!(!torus.contains_point(&off).unwrap());
        assert!(torus.contains_point(&[crate::poly::rat_int(1)]).is_err());
    }
}
