//! Report types and serialization.
//!
//! A run report echoes the resolved scenario (so a report is interpretable
//! without the config file), lists one entry per requested check, carries a
//! small table of scalar quantities, and ends with a provenance block. JSON
//! is the primary format; CSV flattens the check entries into one row each.
//!
//! Every number comes straight out of a library call — the CLI formats, it
//! does not compute. Floats are rendered by the same shortest round-trip
//! formatter in both formats, so JSON → CSV → parse preserves values
//! bit-exactly.

use std::collections::BTreeMap;

use serde::Serialize;
use subquantum::{IdentityReport, Side};

/// Resolved scenario echo embedded in every report.
#[derive(Debug, Serialize)]
pub struct ScenarioEcho {
    pub scenario_id: String,
    pub constants: ConstantsEcho,
    pub grid: GridEcho,
    pub density: serde_json::Value,
    pub evolution: Option<EvolutionEcho>,
    pub numerics: NumericsEcho,
    pub checks: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ConstantsEcho {
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
    #[serde(rename = "kT")]
    pub k_t: f64,
    pub alpha: f64,
    pub diffusion: f64,
}

#[derive(Debug, Serialize)]
pub struct GridEcho {
    pub dim: usize,
    pub bounds: Vec<[f64; 2]>,
    pub n: Vec<usize>,
    pub spacing: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct EvolutionEcho {
    pub dt: f64,
    pub steps: usize,
    pub snap_stride: usize,
}

#[derive(Debug, Serialize)]
pub struct NumericsEcho {
    pub stencil_order: u32,
    pub floor_rel: f64,
    pub quadrature: String,
    pub gauge: String,
}

/// One side of a checked relation: a scalar, or the sup/l2 summary of a
/// field.
#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SideEcho {
    Scalar { value: f64 },
    Field { sup: f64, l2: f64 },
}

impl SideEcho {
    fn from_side(side: &Side) -> Self {
        match *side {
            Side::Scalar(value) => SideEcho::Scalar { value },
            Side::Field { sup, l2 } => SideEcho::Field { sup, l2 },
        }
    }

    /// Single representative number for the CSV row.
    pub fn headline(&self) -> f64 {
        match *self {
            SideEcho::Scalar { value } => value,
            SideEcho::Field { sup, .. } => sup,
        }
    }
}

/// One requested check, flattened from the library's report.
#[derive(Debug, Serialize)]
pub struct CheckEcho {
    pub relation: String,
    pub classification: String,
    pub lhs: SideEcho,
    pub rhs: SideEcho,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub excluded_mass: f64,
    pub metadata: BTreeMap<String, String>,
}

impl CheckEcho {
    pub fn from_report(report: &IdentityReport) -> Self {
        CheckEcho {
            relation: report.relation.wire_name().to_owned(),
            classification: report.classification.wire_name().to_owned(),
            lhs: SideEcho::from_side(&report.lhs),
            rhs: SideEcho::from_side(&report.rhs),
            residual_sup: report.residual_sup,
            residual_l2: report.residual_l2,
            excluded_mass: report.excluded_mass,
            metadata: report.metadata.clone(),
        }
    }
}

/// Scalar quantities computed on the analysis frame.
#[derive(Debug, Serialize)]
pub struct Quantities {
    pub fisher_information: f64,
    pub fisher_excluded_mass: f64,
    pub mean_quantum_potential: f64,
    pub mean_total_energy: f64,
    pub boundary_fraction: f64,
}

/// Summary of a computed trajectory (evolve runs only).
#[derive(Debug, Serialize)]
pub struct TrajectorySummary {
    pub snapshots: usize,
    pub dt_snapshot: f64,
    pub final_time: f64,
    pub max_norm_drift: f64,
}

/// Version, timestamp, grid description, and the built-in guard thresholds.
#[derive(Debug, Serialize)]
pub struct Provenance {
    pub version: String,
    pub timestamp: String,
    pub grid: String,
    pub tolerances: BTreeMap<&'static str, f64>,
}

impl Provenance {
    pub fn new(grid: &subquantum::Grid) -> Self {
        let mut tolerances = BTreeMap::new();
        tolerances.insert("boundary_warn_rel", subquantum::BOUNDARY_TAIL_WARN_REL);
        tolerances.insert("boundary_escalation_rel", subquantum::BOUNDARY_ESCALATION_REL);
        tolerances.insert("negative_clamp_rel", subquantum::NEGATIVE_CLAMP_REL);
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            grid: grid.describe(),
            tolerances,
        }
    }
}

/// Full report for `analyze` and `evolve` runs.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioEcho,
    pub quantities: Quantities,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySummary>,
    pub checks: Vec<CheckEcho>,
    pub provenance: Provenance,
}

/// One relation's residuals across a resolution ladder.
#[derive(Debug, Serialize)]
pub struct StudyEcho {
    pub relation: String,
    pub fitted_order: f64,
    pub points: Vec<PointEcho>,
}

#[derive(Debug, Serialize)]
pub struct PointEcho {
    pub n: usize,
    pub h: f64,
    pub residual_sup: f64,
}

/// Full report for `convergence` runs.
#[derive(Debug, Serialize)]
pub struct ConvergenceReport {
    pub scenario: ScenarioEcho,
    pub refinements: usize,
    pub studies: Vec<StudyEcho>,
    pub provenance: Provenance,
}

/// Shortest round-trip float rendering, shared by the CSV emitters and (via
/// serde_json's own formatter, which uses the same algorithm) the JSON one.
pub fn fmt_f64(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    text
}

/// CSV rows for a run report: one row per check, LF line endings.
pub fn run_report_csv(report: &RunReport) -> String {
    let mut out = String::from(
        "scenario_id,relation,lhs,rhs,residual_sup,residual_l2,excluded_mass,classification\n",
    );
    for check in &report.checks {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            report.scenario.scenario_id,
            check.relation,
            fmt_f64(check.lhs.headline()),
            fmt_f64(check.rhs.headline()),
            fmt_f64(check.residual_sup),
            fmt_f64(check.residual_l2),
            fmt_f64(check.excluded_mass),
            check.classification,
        ));
    }
    out
}

/// CSV rows for a convergence report: one row per (relation, resolution).
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("scenario_id,relation,n,h,residual_sup,fitted_order\n");
    for study in &report.studies {
        for point in &study.points {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                report.scenario.scenario_id,
                study.relation,
                point.n,
                fmt_f64(point.h),
                fmt_f64(point.residual_sup),
                fmt_f64(study.fitted_order),
            ));
        }
    }
    out
}

/// Generic column-oriented CSV for field dumps.
pub fn fields_csv(columns: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    let names: Vec<&str> = columns.iter().map(|(name, _)| name.as_str()).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    let rows = columns.first().map_or(0, |(_, v)| v.len());
    for i in 0..rows {
        let row: Vec<String> = columns.iter().map(|(_, v)| fmt_f64(v[i])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
