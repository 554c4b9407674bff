//! Reports: one serde value rendered both as canonical JSON (stable field
//! order, no timing, byte-identical for equal input and seed) and as a
//! human-readable table (timing included). `verify_report` re-checks a
//! report from scratch: charts, maps, and matrices are re-parsed, each
//! certificate is re-verified against the matrix it certifies, level-0
//! matrices are tied back to the problem by recomputing the pullback, and
//! recomputable summaries (cohomology ranks, Fitting ideals, Euler data)
//! are recomputed and compared.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use resolvent_core::chart::{Chart, RingMap};
use resolvent_core::diag::{kernel_basis, verify_cert, DiagCert};
use resolvent_core::hom::{pullback_hom, MatrixHom, PolyMat};
use resolvent_core::order::MonomialOrder;

use crate::problem::{build_chart, parse_matrix, ProblemFile, RingStanza};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub order: String,
    pub seed: u64,
    pub max_depth: usize,
    pub problem: ProblemFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<TowerSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cohomology_ranks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitting: Option<Vec<FittingRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euler: Option<EulerRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TowerSummary {
    pub depth: usize,
    pub leaf_count: usize,
    pub steps: Vec<StepRecord>,
    pub leaves: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub parent: String,
    pub center: Vec<String>,
    pub children: Vec<ChildRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChildRecord {
    pub name: String,
    pub label: String,
    pub exceptional: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartRecord {
    pub name: String,
    pub vars: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exceptionals: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertRecord {
    pub leaf: String,
    pub level: usize,
    pub chart: ChartRecord,
    /// Images of the root variables under the composed blowup map.
    pub images: Vec<String>,
    /// The matrix this certificate diagonalizes, in leaf coordinates.
    pub matrix: Vec<Vec<String>>,
    pub u: Vec<Vec<String>>,
    pub v: Vec<Vec<String>>,
    pub diag: Vec<String>,
    pub u_det: String,
    pub v_det: String,
    pub seed: u64,
    pub kernel_rank: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittingRecord {
    pub h: usize,
    pub generators: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelRecord {
    Twists { twists: Vec<i64> },
    Classes { classes: Vec<(i64, Vec<i64>)> },
    Chern { rank: usize, c1_h: i64, c1_e: Vec<i64>, c2: i64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EulerRecord {
    pub geometry: String,
    pub kernel: KernelRecord,
    pub torsion: bool,
    pub number: i64,
}

impl Report {
    /// Canonical machine-readable form: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn from_str(text: &str) -> Result<Report, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Verify(format!("report is not valid JSON: {e}")))
    }

    /// Human-readable table; `elapsed` is appended because timing is kept
    /// out of the canonical JSON.
    pub fn to_text(&self, elapsed: std::time::Duration) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(&format!("{k:<18}{v}\n"));
        };
        line("command", self.command.clone());
        line("order", self.order.clone());
        line("seed", self.seed.to_string());
        line("max depth", self.max_depth.to_string());
        if let Some(t) = &self.tower {
            line("tower depth", t.depth.to_string());
            line("leaves", t.leaves.join(", "));
            for (i, s) in t.steps.iter().enumerate() {
                let kids: Vec<String> = s
                    .children
                    .iter()
                    .map(|c| format!("{} [{}: {}]", c.name, c.label, c.exceptional))
                    .collect();
                line(
                    &format!("step {i}"),
                    format!("{} along ({}) -> {}", s.parent, s.center.join(", "), kids.join("; ")),
                );
            }
        }
        for c in &self.certificates {
            line(
                &format!("cert {}.{}", c.leaf, c.level),
                format!("diag ({}), kernel rank {}", c.diag.join(", "), c.kernel_rank),
            );
        }
        if let Some(h) = &self.cohomology_ranks {
            let ranks: Vec<String> =
                h.iter().enumerate().map(|(i, r)| format!("h{i} = {r}")).collect();
            line("cohomology", ranks.join(", "));
        }
        if let Some(t) = self.torsion {
            line("torsion", t.to_string());
        }
        if let Some(fit) = &self.fitting {
            for f in fit {
                line(&format!("fitting J_{}", f.h), format!("({})", f.generators.join(", ")));
            }
        }
        if let Some(e) = &self.euler {
            line("geometry", e.geometry.clone());
            let kernel = match &e.kernel {
                KernelRecord::Twists { twists } => format!(
                    "splitting twists [{}]",
                    twists.iter().map(i64::to_string).collect::<Vec<_>>().join(", ")
                ),
                KernelRecord::Classes { classes } => format!(
                    "split classes [{}]",
                    classes
                        .iter()
                        .map(|(h, e)| format!("{h}H{}", e.iter().enumerate().map(|(i, m)| format!(" {} {}E{}", if *m < 0 { "-" } else { "+" }, m.abs(), i + 1)).collect::<String>()))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                KernelRecord::Chern { rank, c1_h, c1_e, c2 } => format!(
                    "chern rank {rank}, c1 = {c1_h}H{}, c2 deg = {c2}",
                    c1_e.iter().enumerate().map(|(i, m)| format!(" {} {}E{}", if *m < 0 { "-" } else { "+" }, m.abs(), i + 1)).collect::<String>()
                ),
            };
            line("kernel", kernel);
            line("euler number", e.number.to_string());
        }
        line("timing", format!("{} ms", elapsed.as_millis()));
        out
    }
}

pub fn render_mat(chart: &Chart, m: &PolyMat, order: &MonomialOrder) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| chart.render(m.get(r, c), order)).collect())
        .collect()
}

pub fn chart_record(chart: &Chart, order: &MonomialOrder) -> ChartRecord {
    ChartRecord {
        name: chart.name().to_string(),
        vars: chart.vars().to_vec(),
        relations: chart.relations().gens().iter().map(|g| chart.render(g, order)).collect(),
        exceptionals: chart
            .exceptionals()
            .iter()
            .map(|(l, p)| (l.clone(), chart.render(p, order)))
            .collect(),
    }
}

pub fn cert_record(
    leaf_name: &str,
    level: usize,
    map: &RingMap,
    certified: &MatrixHom,
    cert: &DiagCert,
    order: &MonomialOrder,
) -> CertRecord {
    let chart = certified.chart();
    CertRecord {
        leaf: leaf_name.to_string(),
        level,
        chart: chart_record(chart, order),
        images: map.images().iter().map(|p| chart.render(p, order)).collect(),
        matrix: render_mat(chart, certified.mat(), order),
        u: render_mat(chart, &cert.u, order),
        v: render_mat(chart, &cert.v, order),
        diag: cert.diag.iter().map(|p| chart.render(p, order)).collect(),
        u_det: chart.render(&cert.u_det, order),
        v_det: chart.render(&cert.v_det, order),
        seed: cert.seed,
        kernel_rank: kernel_basis(cert).rank,
    }
}

/// Rebuilds the chart a certificate record describes and the ring map from
/// the root; fails if the presentation or the map no longer validates.
fn rebuild_leaf(
    root: &Arc<Chart>,
    rec: &CertRecord,
) -> Result<(Arc<Chart>, RingMap), CliError> {
    let ring = RingStanza {
        vars: rec.chart.vars.clone(),
        relations: rec.chart.relations.clone(),
        name: Some(rec.chart.name.clone()),
    };
    let chart = build_chart(&ring)?;
    let images = rec
        .images
        .iter()
        .map(|s| chart.parse(s).map_err(CliError::engine))
        .collect::<Result<Vec<_>, _>>()?;
    let map = RingMap::new(root.clone(), chart.clone(), images).map_err(CliError::engine)?;
    Ok((chart, map))
}

fn parse_mat_on(chart: &Arc<Chart>, rows: &[Vec<String>]) -> Result<MatrixHom, CliError> {
    parse_matrix(chart, rows)
}

fn rebuild_cert(chart: &Arc<Chart>, rec: &CertRecord) -> Result<DiagCert, CliError> {
    let u = parse_mat_on(chart, &rec.u)?;
    let v = parse_mat_on(chart, &rec.v)?;
    let diag = rec
        .diag
        .iter()
        .map(|s| chart.parse(s).map_err(CliError::engine))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DiagCert {
        chart: chart.clone(),
        u: u.mat().clone(),
        v: v.mat().clone(),
        diag,
        u_det: chart.parse(&rec.u_det).map_err(CliError::engine)?,
        v_det: chart.parse(&rec.v_det).map_err(CliError::engine)?,
        seed: rec.seed,
    })
}

fn hom_eq(a: &MatrixHom, b: &MatrixHom, order: &MonomialOrder) -> bool {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return false;
    }
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            if !a.chart().eq_mod(a.entry(r, c), b.entry(r, c), order) {
                return false;
            }
        }
    }
    true
}

/// Certificate chain re-verification shared by `diagonalize` and `resolve`
/// reports. `expected_level0` maps a rebuilt leaf map to the matrix the
/// level-0 certificate must certify (tying the report to the problem);
/// higher levels are recomputed from the previous certificate by inverting
/// its V and restricting to kernel coordinates.
fn verify_cert_chain(
    root: &Arc<Chart>,
    records: &[CertRecord],
    order: &MonomialOrder,
    pulled_terms: impl Fn(&RingMap) -> Result<Vec<MatrixHom>, CliError>,
) -> Result<(), CliError> {
    let fail = |leaf: &str, level: usize, why: &str| {
        Err(CliError::Verify(format!("certificate {leaf}.{level}: {why}")))
    };

    // Group records by leaf, preserving order.
    let mut leaves: Vec<(&str, Vec<&CertRecord>)> = Vec::new();
    for rec in records {
        match leaves.last_mut() {
            Some((name, group)) if *name == rec.leaf => group.push(rec),
            _ => leaves.push((&rec.leaf, vec![rec])),
        }
    }

    for (leaf_name, group) in leaves {
        let (chart, map) = rebuild_leaf(root, group[0])?;
        let terms = pulled_terms(&map)?;
        if group.len() != terms.len() {
            return fail(leaf_name, 0, "level count does not match the problem complex");
        }
        for (level, rec) in group.iter().enumerate() {
            if rec.level != level {
                return fail(leaf_name, level, "levels are not consecutive from zero");
            }
            // Every level certificate targets the pulled differential of
            // that level, so the recorded matrix must match the recomputed
            // pullback exactly.
            let recorded = parse_mat_on(&chart, &rec.matrix)?;
            if !hom_eq(&recorded, &terms[level], order) {
                return fail(leaf_name, level, "recorded matrix differs from the recomputed one");
            }
            let cert = rebuild_cert(&chart, rec)?;
            if let Err(reason) = verify_cert(&recorded, &cert) {
                return fail(leaf_name, level, &format!("verification failed: {reason:?}"));
            }
            if kernel_basis(&cert).rank != rec.kernel_rank {
                return fail(leaf_name, level, "kernel rank differs from the certificate");
            }
        }
    }
    Ok(())
}

/// Checks that consecutive certificates are compatible as a chain: the
/// composite of the level map with the kernel inclusion of the level below
/// vanishes. Bottom rows of V^{-1} * psi are the induced map; the top rows
/// must be zero.
pub fn induced_on_kernel(cert: &DiagCert, psi: &MatrixHom) -> Result<MatrixHom, CliError> {
    let chart = &cert.chart;
    let order = MonomialOrder::GrevLex;
    let det = chart.reduce(&cert.v.det().map_err(CliError::engine)?, &order);
    let inv = chart
        .unit_inverse(&det, &order)
        .ok_or_else(|| CliError::Verify("certificate V has a non-unit determinant".into()))?;
    let adj = cert.v.adjugate().map_err(CliError::engine)?;
    let vinv = adj.map(|e| chart.reduce(&(&inv * e), &order));
    let prod = vinv.mul(psi.mat()).map_err(CliError::engine)?;
    let prod = prod.map(|e| chart.reduce(e, &order));
    let m = cert.diag.len();
    for r in 0..m {
        for c in 0..prod.cols() {
            if !prod.get(r, c).is_zero() {
                return Err(CliError::Verify(
                    "composite does not land in the kernel of the level above".into(),
                ));
            }
        }
    }
    let rows: Vec<usize> = (m..prod.rows()).collect();
    let cols: Vec<usize> = (0..prod.cols()).collect();
    MatrixHom::new(chart.clone(), prod.submatrix(&rows, &cols)).map_err(CliError::engine)
}

/// Full from-scratch verification of a report. `recompute_euler` and
/// `recompute_fitting` re-run the cheap derivations so recorded summaries
/// cannot drift from the problem.
pub fn verify_report(
    report: &Report,
    recompute_euler: impl Fn(&ProblemFile) -> Result<EulerRecord, CliError>,
    recompute_fitting: impl Fn(&ProblemFile) -> Result<Vec<FittingRecord>, CliError>,
) -> Result<(), CliError> {
    let order = match report.order.as_str() {
        "grevlex" => MonomialOrder::GrevLex,
        "lex" => MonomialOrder::Lex,
        other => return Err(CliError::Verify(format!("unknown order `{other}` in report"))),
    };

    match report.command.as_str() {
        "diagonalize" => {
            let root = report.problem.chart()?;
            let (_, phi) = report.problem.single_matrix()?;
            if report.certificates.is_empty() {
                return Err(CliError::Verify("diagonalize report carries no certificates".into()));
            }
            if let Some(t) = &report.tower {
                let cert_leaves: Vec<&str> =
                    report.certificates.iter().map(|c| c.leaf.as_str()).collect();
                let tower_leaves: Vec<&str> = t.leaves.iter().map(String::as_str).collect();
                if cert_leaves != tower_leaves {
                    return Err(CliError::Verify(
                        "tower leaves and certificate leaves disagree".into(),
                    ));
                }
            }
            verify_cert_chain(&root, &report.certificates, &order, |map| {
                Ok(vec![pullback_hom(map, &phi).map_err(CliError::engine)?])
            })
        }
        "resolve" => {
            let root = report.problem.chart()?;
            let complex = report.problem.complex()?;
            if report.certificates.is_empty() {
                return Err(CliError::Verify("resolve report carries no certificates".into()));
            }
            let complex_for_chain = complex.clone();
            verify_cert_chain(&root, &report.certificates, &order, move |map| {
                let pulled = complex_for_chain.pullback(map).map_err(CliError::engine)?;
                Ok(pulled.terms().to_vec())
            })?;

            // Cohomology ranks are recomputable from the certificate chain:
            // rank of level k equals the number of diagonal entries, and
            // h^k = p_k - rank_k - rank_{k+1}.
            let recorded = report
                .cohomology_ranks
                .as_ref()
                .ok_or_else(|| CliError::Verify("resolve report lacks cohomology ranks".into()))?;
            let p = complex.ranks();
            let levels = complex.terms().len();
            let mut leaf_start = 0usize;
            while leaf_start < report.certificates.len() {
                let group = &report.certificates[leaf_start..leaf_start + levels];
                let h: Vec<usize> = (0..=levels)
                    .map(|k| {
                        let rank_k = if k < levels { group[k].diag.len() } else { 0 };
                        let rank_above = if k == 0 { 0 } else { group[k - 1].diag.len() };
                        p[k] - rank_k - rank_above
                    })
                    .collect();
                if &h != recorded {
                    return Err(CliError::Verify(format!(
                        "cohomology ranks {recorded:?} do not match the certificates ({h:?})"
                    )));
                }
                let torsion = h.iter().skip(1).all(|&r| r == 0);
                if report.torsion != Some(torsion) {
                    return Err(CliError::Verify("torsion flag does not match the ranks".into()));
                }
                leaf_start += levels;
            }
            Ok(())
        }
        "fitting" => {
            let recorded = report
                .fitting
                .as_ref()
                .ok_or_else(|| CliError::Verify("fitting report lacks ideals".into()))?;
            let fresh = recompute_fitting(&report.problem)?;
            if fresh.len() != recorded.len() {
                return Err(CliError::Verify("fitting ideal count differs".into()));
            }
            for (a, b) in fresh.iter().zip(recorded) {
                if a.h != b.h || a.generators != b.generators {
                    return Err(CliError::Verify(format!(
                        "fitting ideal J_{} differs from the recomputation",
                        b.h
                    )));
                }
            }
            Ok(())
        }
        "euler" => {
            let recorded = report
                .euler
                .as_ref()
                .ok_or_else(|| CliError::Verify("euler report lacks a result".into()))?;
            let fresh = recompute_euler(&report.problem)?;
            if &fresh != recorded {
                return Err(CliError::Verify(
                    "euler record differs from the recomputation".into(),
                ));
            }
            Ok(())
        }
        other => Err(CliError::Verify(format!("unknown command `{other}` in report"))),
    }
}
