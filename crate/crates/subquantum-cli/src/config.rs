//! Scenario configuration: JSON schema, defaults, and validation.
//!
//! Unknown keys and duplicate keys are hard errors — a silent typo in a
//! physics run is worse than a rejected file. Defaults follow the library:
//! natural constants with the thermal scale `kT = hbar * omega`, order-2
//! stencils, relative support floor `1e-12`, trapezoid quadrature, and the
//! fixed-zero heat-map gauge.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use subquantum::{
    CatalogDensity, DensityField, Gauge, Grid, Numerics, PhysicalConstants, Quadrature,
    RelationId, ScalarField, StencilScheme,
};

use crate::CliError;

/// Raw JSON shape of a scenario file. Every section except `grid` and
/// `density` may be omitted.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario_id: Option<String>,
    constants: Option<RawConstants>,
    grid: RawGrid,
    density: RawDensity,
    evolution: Option<RawEvolution>,
    checks: Option<Vec<String>>,
    numerics: Option<RawNumerics>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    hbar: Option<f64>,
    mass: Option<f64>,
    omega: Option<f64>,
    #[serde(rename = "kT")]
    k_t: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    bounds: Vec<[f64; 2]>,
    n: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawDensity {
    Gaussian {
        sigma: f64,
        x0: f64,
    },
    HoGround,
    HoCoherent {
        x0: f64,
        #[serde(default)]
        t: f64,
    },
    FreePacket {
        sigma0: f64,
        x0: f64,
        p0: f64,
        #[serde(default)]
        t: f64,
    },
    FromFile {
        path: String,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolution {
    dt: f64,
    steps: usize,
    snap_stride: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    stencil_order: Option<u32>,
    floor_rel: Option<f64>,
    quadrature: Option<RawQuadrature>,
    gauge: Option<RawGauge>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawQuadrature {
    Trapezoid,
    Simpson,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawGauge {
    ZeroC,
    MinZero,
}

/// Where the density comes from: a closed-form model evaluated at a fixed
/// time, or a file of samples.
#[derive(Debug, Clone)]
pub enum DensitySource {
    Catalog { model: CatalogDensity, t: f64 },
    File { path: PathBuf },
}

impl DensitySource {
    /// Whether time derivatives of this density are identically zero. File
    /// sources are single snapshots of unknown history, so they are *not*
    /// stationary (and cannot support time-derivative checks).
    pub fn is_stationary(&self) -> bool {
        match self {
            DensitySource::Catalog { model, .. } => model.is_stationary(),
            DensitySource::File { .. } => false,
        }
    }

    /// Structured echo of the source for reports.
    pub fn echo(&self) -> serde_json::Value {
        match self {
            DensitySource::Catalog { model, t } => match model {
                CatalogDensity::Gaussian { sigma, x0 } => {
                    serde_json::json!({"kind": "gaussian", "sigma": sigma, "x0": x0})
                }
                CatalogDensity::HarmonicGround => serde_json::json!({"kind": "ho_ground"}),
                CatalogDensity::HarmonicCoherent { x0 } => {
                    serde_json::json!({"kind": "ho_coherent", "x0": x0, "t": t})
                }
                CatalogDensity::FreePacket { sigma0, x0, p0 } => serde_json::json!({
                    "kind": "free_packet", "sigma0": sigma0, "x0": x0, "p0": p0, "t": t
                }),
            },
            DensitySource::File { path } => {
                serde_json::json!({"kind": "from_file", "path": path.display().to_string()})
            }
        }
    }

    /// Samples the density on `grid`.
    pub fn build(
        &self,
        grid: &Grid,
        constants: &PhysicalConstants,
        rule: Quadrature,
    ) -> Result<DensityField, CliError> {
        match self {
            DensitySource::Catalog { model, t } => model
                .density_on_grid(grid, *t, constants, rule)
                .map_err(|e| CliError::Numerical(format!("sampling catalog density: {e}"))),
            DensitySource::File { path } => load_density_file(path, grid, rule),
        }
    }
}

/// Fully validated scenario, with defaults applied.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub scenario_id: String,
    pub constants: PhysicalConstants,
    pub grid: Grid,
    pub density: DensitySource,
    pub evolution: Option<EvolutionSection>,
    pub checks: Vec<RelationId>,
    pub numerics: Numerics,
    pub gauge: Gauge,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolutionSection {
    pub dt: f64,
    pub steps: usize,
    pub snap_stride: usize,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses and validates a scenario from JSON text.
///
/// Deserializing straight into the typed structs makes serde reject both
/// unknown and duplicate keys with messages naming the offender.
pub fn parse_config(text: &str) -> Result<Scenario, CliError> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| config_err(format!("config: {e}")))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<Scenario, CliError> {
    let scenario_id = raw.scenario_id.unwrap_or_else(|| "scenario".to_owned());
    if scenario_id.is_empty() || scenario_id.contains(',') || scenario_id.contains('\n') {
        return Err(config_err(
            "scenario_id must be non-empty and free of commas and newlines (it is a csv field)",
        ));
    }

    let constants = {
        let c = raw.constants.unwrap_or(RawConstants {
            hbar: None,
            mass: None,
            omega: None,
            k_t: None,
        });
        let hbar = c.hbar.unwrap_or(1.0);
        let mass = c.mass.unwrap_or(1.0);
        let omega = c.omega.unwrap_or(1.0);
        match c.k_t {
            Some(k_t) => PhysicalConstants::new(hbar, mass, omega, k_t),
            None => PhysicalConstants::with_thermal_quantum(hbar, mass, omega),
        }
        .map_err(|e| config_err(format!("constants: {e}")))?
    };

    if raw.grid.bounds.len() != raw.grid.dim || raw.grid.n.len() != raw.grid.dim {
        return Err(config_err(format!(
            "grid: dim is {} but bounds has {} entries and n has {}",
            raw.grid.dim,
            raw.grid.bounds.len(),
            raw.grid.n.len()
        )));
    }
    let bounds: Vec<(f64, f64)> = raw.grid.bounds.iter().map(|b| (b[0], b[1])).collect();
    let grid =
        Grid::new(&bounds, &raw.grid.n).map_err(|e| config_err(format!("grid: {e}")))?;

    let density = resolve_density(raw.density, &grid)?;

    let numerics_raw = raw.numerics.unwrap_or(RawNumerics {
        stencil_order: None,
        floor_rel: None,
        quadrature: None,
        gauge: None,
    });
    let scheme = match numerics_raw.stencil_order.unwrap_or(2) {
        2 => StencilScheme::Order2,
        4 => StencilScheme::Order4,
        other => {
            return Err(config_err(format!(
                "numerics.stencil_order must be 2 or 4, got {other}"
            )))
        }
    };
    let floor_rel = numerics_raw.floor_rel.unwrap_or(1e-12);
    if !(floor_rel.is_finite() && floor_rel > 0.0 && floor_rel <= 1e-3) {
        return Err(config_err(format!(
            "numerics.floor_rel must lie in (0, 1e-3], got {floor_rel}"
        )));
    }
    let quadrature = match numerics_raw.quadrature.unwrap_or(RawQuadrature::Trapezoid) {
        RawQuadrature::Trapezoid => Quadrature::Trapezoid,
        RawQuadrature::Simpson => Quadrature::Simpson,
    };
    if quadrature == Quadrature::Simpson {
        for (d, &n) in raw.grid.n.iter().enumerate() {
            if n % 2 == 0 {
                return Err(config_err(format!(
                    "numerics.quadrature simpson needs an odd point count on every axis; axis {d} has {n}"
                )));
            }
        }
    }
    let gauge = match numerics_raw.gauge.unwrap_or(RawGauge::ZeroC) {
        RawGauge::ZeroC => Gauge::ZeroC,
        RawGauge::MinZero => Gauge::MinZero,
    };
    let numerics = Numerics { scheme, floor_rel, quadrature };

    let mut checks = Vec::new();
    let mut seen = HashSet::new();
    for token in raw.checks.unwrap_or_default() {
        let id: RelationId = token
            .parse()
            .map_err(|e| config_err(format!("checks: {e}")))?;
        if !seen.insert(id) {
            return Err(config_err(format!("checks: duplicate entry {}", id.wire_name())));
        }
        checks.push(id);
    }

    let evolution = match raw.evolution {
        None => None,
        Some(e) => {
            if !(e.dt.is_finite() && e.dt > 0.0) {
                return Err(config_err(format!("evolution.dt must be positive, got {}", e.dt)));
            }
            if e.snap_stride == 0 {
                return Err(config_err("evolution.snap_stride must be at least 1"));
            }
            if e.steps == 0 || e.steps % e.snap_stride != 0 || e.steps / e.snap_stride < 2 {
                return Err(config_err(format!(
                    "evolution.steps ({}) must be a positive multiple of snap_stride ({}) covering at least two strides",
                    e.steps, e.snap_stride
                )));
            }
            Some(EvolutionSection { dt: e.dt, steps: e.steps, snap_stride: e.snap_stride })
        }
    };

    // Time-derivative checks need either a stationary density (the
    // derivative is identically zero) or an evolution section that fixes
    // the snapshot spacing.
    let needs_history: Vec<&str> = checks
        .iter()
        .filter(|id| id.needs_history())
        .map(|id| id.wire_name())
        .collect();
    if !needs_history.is_empty() && !density.is_stationary() && evolution.is_none() {
        return Err(config_err(format!(
            "checks {} need time derivatives, the density is not stationary, and no evolution section fixes the snapshot spacing; add \"evolution\" or use a stationary density",
            needs_history.join(", ")
        )));
    }
    if !needs_history.is_empty() && matches!(density, DensitySource::File { .. }) {
        return Err(config_err(format!(
            "checks {} need time derivatives, which a file-sourced density snapshot cannot provide",
            needs_history.join(", ")
        )));
    }

    Ok(Scenario {
        scenario_id,
        constants,
        grid,
        density,
        evolution,
        checks,
        numerics,
        gauge,
    })
}

fn resolve_density(raw: RawDensity, grid: &Grid) -> Result<DensitySource, CliError> {
    let check_param = |name: &str, v: f64, positive: bool| -> Result<(), CliError> {
        if !v.is_finite() || (positive && v <= 0.0) {
            return Err(config_err(format!(
                "density.{name} must be {}finite, got {v}",
                if positive { "positive and " } else { "" }
            )));
        }
        Ok(())
    };
    let require_1d = |kind: &str| -> Result<(), CliError> {
        if grid.dim() != 1 {
            return Err(config_err(format!(
                "density kind {kind} is one-dimensional but the grid has dim {}",
                grid.dim()
            )));
        }
        Ok(())
    };
    match raw {
        RawDensity::Gaussian { sigma, x0 } => {
            check_param("sigma", sigma, true)?;
            check_param("x0", x0, false)?;
            Ok(DensitySource::Catalog {
                model: CatalogDensity::Gaussian { sigma, x0 },
                t: 0.0,
            })
        }
        RawDensity::HoGround => {
            require_1d("ho_ground")?;
            Ok(DensitySource::Catalog { model: CatalogDensity::HarmonicGround, t: 0.0 })
        }
        RawDensity::HoCoherent { x0, t } => {
            require_1d("ho_coherent")?;
            check_param("x0", x0, false)?;
            check_param("t", t, false)?;
            Ok(DensitySource::Catalog {
                model: CatalogDensity::HarmonicCoherent { x0 },
                t,
            })
        }
        RawDensity::FreePacket { sigma0, x0, p0, t } => {
            require_1d("free_packet")?;
            check_param("sigma0", sigma0, true)?;
            check_param("x0", x0, false)?;
            check_param("p0", p0, false)?;
            check_param("t", t, false)?;
            Ok(DensitySource::Catalog {
                model: CatalogDensity::FreePacket { sigma0, x0, p0 },
                t,
            })
        }
        RawDensity::FromFile { path } => Ok(DensitySource::File { path: PathBuf::from(path) }),
    }
}

/// Loads a density from a text file of whitespace/newline-separated sample
/// values in row-major grid order. The samples are validated and normalized.
fn load_density_file(
    path: &Path,
    grid: &Grid,
    rule: Quadrature,
) -> Result<DensityField, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading density file {}: {e}", path.display())))?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, token) in text.split_whitespace().enumerate() {
        let v: f64 = token.parse().map_err(|_| {
            CliError::Config(format!(
                "density file {}: entry {} ('{}') is not a number",
                path.display(),
                i,
                token
            ))
        })?;
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(CliError::Config(format!(
            "density file {} has {} samples but the grid has {} points",
            path.display(),
            values.len(),
            grid.len()
        )));
    }
    let raw = ScalarField::new(grid.clone(), values)
        .map_err(|e| CliError::Config(format!("density file {}: {e}", path.display())))?;
    DensityField::normalize(&raw, rule)
        .map_err(|e| CliError::Config(format!("density file {}: {e}", path.display())))
}
