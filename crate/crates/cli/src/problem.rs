//! Problem files: UTF-8 JSON with `ring`, `objects`, `geometry`, and
//! `params` stanzas. Polynomial entries are strings in the library's
//! expression grammar over the declared variables.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use resolvent_core::blowup::{CenterOrder, TowerOptions};
use resolvent_core::chart::Chart;
use resolvent_core::error::Error;
use resolvent_core::euler::{DivisorClass, Geometry, GradedMatrix, DEFAULT_DEGREE_CAP};
use resolvent_core::hom::{ComplexOnChart, MatrixHom};
use resolvent_core::order::MonomialOrder;
use resolvent_core::parse::parse_rational;
use resolvent_core::poly::Rational;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RingStanza {
    pub vars: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct ObjectsStanza {
    /// Named matrices, each a row-major grid of polynomial strings.
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub matrices: std::collections::BTreeMap<String, Vec<Vec<String>>>,
    /// Named complexes: list of matrices, differentials ordered from the
    /// map out of the rightmost term leftward (same convention as the
    /// library constructor).
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub complexes: std::collections::BTreeMap<String, Vec<Vec<Vec<String>>>>,
    /// Named graded matrices over the coordinate ring of the geometry.
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub graded_matrices: std::collections::BTreeMap<String, GradedStanza>,
    /// Named divisor-class lists for blown-plane splittings.
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub class_lists: std::collections::BTreeMap<String, Vec<ClassStanza>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GradedStanza {
    pub source_twists: Vec<i64>,
    pub target_twists: Vec<i64>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClassStanza {
    pub h: i64,
    #[serde(default)]
    pub e: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryStanza {
    P1,
    P2,
    BlownP2 { points: Vec<[String; 3]> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct ParamsStanza {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_order: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<RingStanza>,
    #[serde(default, skip_serializing_if = "is_default_objects")]
    pub objects: ObjectsStanza,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryStanza>,
    #[serde(default, skip_serializing_if = "is_default_params")]
    pub params: ParamsStanza,
}

fn is_default_objects(o: &ObjectsStanza) -> bool {
    *o == ObjectsStanza::default()
}

fn is_default_params(p: &ParamsStanza) -> bool {
    *p == ParamsStanza::default()
}

impl ProblemFile {
    pub fn from_str(text: &str) -> Result<ProblemFile, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Parse(format!("problem file is not valid JSON: {e}")))
    }

    /// Builds the chart declared by the ring stanza.
    pub fn chart(&self) -> Result<Arc<Chart>, CliError> {
        let ring = self
            .ring
            .as_ref()
            .ok_or_else(|| CliError::Parse("problem file has no ring stanza".into()))?;
        build_chart(ring)
    }

    /// The unique named matrix, parsed on the ring chart.
    pub fn single_matrix(&self) -> Result<(String, MatrixHom), CliError> {
        let chart = self.chart()?;
        let mut it = self.objects.matrices.iter();
        let (name, rows) = it
            .next()
            .ok_or_else(|| CliError::Parse("problem file declares no matrices".into()))?;
        if it.next().is_some() {
            return Err(CliError::Parse(
                "problem file declares several matrices; exactly one is expected".into(),
            ));
        }
        Ok((name.clone(), parse_matrix(&chart, rows)?))
    }

    /// The complex to resolve: a named complex if present, else the single
    /// matrix as a one-differential complex.
    pub fn complex(&self) -> Result<ComplexOnChart, CliError> {
        let chart = self.chart()?;
        let mut it = self.objects.complexes.iter();
        if let Some((_, terms)) = it.next() {
            if it.next().is_some() {
                return Err(CliError::Parse(
                    "problem file declares several complexes; exactly one is expected".into(),
                ));
            }
            let homs = terms
                .iter()
                .map(|rows| parse_matrix(&chart, rows))
                .collect::<Result<Vec<_>, _>>()?;
            return ComplexOnChart::new(chart, homs).map_err(CliError::engine);
        }
        let (_, phi) = self.single_matrix()?;
        ComplexOnChart::new(chart, vec![phi]).map_err(CliError::engine)
    }

    pub fn geometry(&self) -> Result<Geometry, CliError> {
        match &self.geometry {
            None => Err(CliError::Parse("problem file has no geometry stanza".into())),
            Some(GeometryStanza::P1) => Ok(Geometry::P1),
            Some(GeometryStanza::P2) => Ok(Geometry::P2),
            Some(GeometryStanza::BlownP2 { points }) => {
                let parsed: Vec<[Rational; 3]> = points
                    .iter()
                    .map(|p| -> Result<[Rational; 3], CliError> {
                        Ok([rat(&p[0])?, rat(&p[1])?, rat(&p[2])?])
                    })
                    .collect::<Result<_, _>>()?;
                Geometry::blown_p2(parsed).map_err(CliError::engine)
            }
        }
    }

    /// The unique graded stanza, not yet bound to a coordinate ring.
    pub fn single_graded_stanza(&self) -> Result<&GradedStanza, CliError> {
        let mut it = self.objects.graded_matrices.iter();
        let (_, g) = it
            .next()
            .ok_or_else(|| CliError::Parse("problem file declares no graded matrices".into()))?;
        if it.next().is_some() {
            return Err(CliError::Parse(
                "problem file declares several graded matrices; exactly one is expected".into(),
            ));
        }
        Ok(g)
    }

    /// The unique graded matrix, over the line's homogeneous coordinates.
    pub fn single_graded(&self) -> Result<GradedMatrix, CliError> {
        let g = self.single_graded_stanza()?;
        let rows: Vec<Vec<&str>> =
            g.rows.iter().map(|r| r.iter().map(|s| s.as_str()).collect()).collect();
        GradedMatrix::parse(g.source_twists.clone(), g.target_twists.clone(), &rows)
            .map_err(CliError::engine)
    }

    /// The unique divisor-class list for a blown-plane splitting.
    pub fn single_class_list(&self, exceptionals: usize) -> Result<Vec<DivisorClass>, CliError> {
        let mut it = self.objects.class_lists.iter();
        let (_, classes) = it
            .next()
            .ok_or_else(|| CliError::Parse("problem file declares no class lists".into()))?;
        if it.next().is_some() {
            return Err(CliError::Parse(
                "problem file declares several class lists; exactly one is expected".into(),
            ));
        }
        classes
            .iter()
            .map(|c| {
                let mut e = c.e.clone();
                if e.len() > exceptionals {
                    return Err(CliError::Parse(format!(
                        "class has {} exceptional coefficients but the geometry blows up {} points",
                        e.len(),
                        exceptionals
                    )));
                }
                e.resize(exceptionals, 0);
                Ok(DivisorClass { h: c.h, e })
            })
            .collect()
    }

    pub fn order(&self) -> Result<MonomialOrder, CliError> {
        match self.params.order.as_deref() {
            None | Some("grevlex") => Ok(MonomialOrder::GrevLex),
            Some("lex") => Ok(MonomialOrder::Lex),
            Some(other) => Err(CliError::Parse(format!(
                "unknown monomial order `{other}` (expected grevlex or lex)"
            ))),
        }
    }

    pub fn tower_options(&self) -> Result<TowerOptions, CliError> {
        let mut opts = TowerOptions::default();
        if let Some(d) = self.params.max_depth {
            opts.max_depth = d;
        }
        if let Some(s) = self.params.seed {
            opts.seed = s;
        }
        opts.center_order = match self.params.center_order.as_deref() {
            None | Some("canonical") => CenterOrder::Canonical,
            Some("reversed") => CenterOrder::Reversed,
            Some(other) => {
                return Err(CliError::Parse(format!(
                    "unknown center order `{other}` (expected canonical or reversed)"
                )))
            }
        };
        Ok(opts)
    }

    pub fn degree_cap(&self) -> i64 {
        self.params.degree_cap.unwrap_or(DEFAULT_DEGREE_CAP)
    }
}

pub fn build_chart(ring: &RingStanza) -> Result<Arc<Chart>, CliError> {
    let name = ring.name.clone().unwrap_or_else(|| "R".into());
    let scratch = Chart::new(&name, ring.vars.clone(), vec![]).map_err(CliError::engine)?;
    let rels = ring
        .relations
        .iter()
        .map(|s| scratch.parse(s).map_err(CliError::engine))
        .collect::<Result<Vec<_>, _>>()?;
    Chart::new(&name, ring.vars.clone(), rels).map(Arc::new).map_err(CliError::engine)
}

pub fn parse_matrix(chart: &Arc<Chart>, rows: &[Vec<String>]) -> Result<MatrixHom, CliError> {
    let borrowed: Vec<Vec<&str>> =
        rows.iter().map(|r| r.iter().map(|s| s.as_str()).collect()).collect();
    MatrixHom::parse(chart.clone(), &borrowed).map_err(CliError::engine)
}

fn rat(text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(CliError::engine)
}

/// Classifies engine errors into the CLI's exit-code families: malformed
/// input is a parse error (2), documented resolution limits are contract
/// violations (3), and broken invariants are verification failures (4).
pub fn classify(err: &Error) -> u8 {
    match err {
        Error::DepthExceeded { .. }
        | Error::NotPrincipal { .. }
        | Error::NoUnitPivot { .. }
        | Error::ZeroCenter
        | Error::MinorTooLarge { .. }
        | Error::DegreeCapExceeded { .. }
        | Error::RankDimensionMismatch { .. }
        | Error::TorsionHypothesis
        | Error::SurfaceOnly
        | Error::NoCommonLeaf
        | Error::BaseLocus => 3,
        Error::Internal(_) => 4,
        _ => 2,
    }
}
