//! Consistency relations between the derived quantities, packaged as
//! uniform reports.
//!
//! Each relation compares two evaluation routes for the same object. The
//! relations split into two classes:
//!
//! * **exact** relations hold identically for any smooth density and any
//!   discretization parameters; their residuals measure numerical error
//!   alone and are expected to sit at the discretization floor,
//! * **formal** relations encode model assumptions (a heat-flow reading of
//!   the quantum potential); their residual fields are physical outputs in
//!   their own right and are reported, never asserted to vanish.
//!
//! The string identifiers carried by [`RelationId`] ("EQ_1_1", "EQ_2_1",
//! "EQ_2_3_VS_2_7", "EQ_2_5", "EQ_2_6", "DELTA_P_EQ_M_U") are stable wire
//! labels used in reports and configuration files; they are opaque names,
//! fixed by the external interface.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::constants::PhysicalConstants;
use crate::diffops::{gradient, laplacian, log_density_score, mask_scalar};
use crate::error::{Result, SubquantumError};
use crate::field::{DensityField, ScalarField};
use crate::grid::Grid;
use crate::quadrature::{excluded_mass, integrate_masked_fn, l2_norm_masked};
use crate::quantities::{
    fisher_from_heat, fisher_information, heat_from_density, mean_quantum_potential,
    momentum_fluctuation, osmotic_velocity, quantum_potential_density_form, Gauge, HeatField,
    MaskedScalarField,
};
use crate::Numerics;

/// Boundary-density fraction above which integral checks refuse to run:
/// this much mass pressed against the box edge invalidates the quadrature.
pub const BOUNDARY_ESCALATION_REL: f64 = 1e-6;

/// Stable identifiers for the supported relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationId {
    /// Quantum potential against its diffusion/heat-flow expression.
    HeatFlow,
    /// Density score against the heat-map gradient.
    GradientRelation,
    /// Fisher information computed directly and through the heat map.
    FisherRepresentations,
    /// Mean quantum potential against the Fisher information.
    MeanQpFisher,
    /// Thermal Fisher functional against its closed consequence.
    ThermalFisher,
    /// Momentum fluctuation against mass times osmotic velocity.
    MomentumVelocity,
}

impl RelationId {
    pub const ALL: [RelationId; 6] = [
        RelationId::HeatFlow,
        RelationId::GradientRelation,
        RelationId::FisherRepresentations,
        RelationId::MeanQpFisher,
        RelationId::ThermalFisher,
        RelationId::MomentumVelocity,
    ];

    /// The wire label used in reports and configuration.
    pub fn wire_name(self) -> &'static str {
        match self {
            RelationId::HeatFlow => "EQ_1_1",
            RelationId::GradientRelation => "EQ_2_1",
            RelationId::FisherRepresentations => "EQ_2_3_VS_2_7",
            RelationId::MeanQpFisher => "EQ_2_5",
            RelationId::ThermalFisher => "EQ_2_6",
            RelationId::MomentumVelocity => "DELTA_P_EQ_M_U",
        }
    }

    pub fn classification(self) -> Classification {
        match self {
            RelationId::HeatFlow | RelationId::ThermalFisher => Classification::Formal,
            RelationId::GradientRelation
            | RelationId::FisherRepresentations
            | RelationId::MeanQpFisher
            | RelationId::MomentumVelocity => Classification::Exact,
        }
    }

    /// Whether checking the relation on a non-stationary density requires a
    /// time history (three snapshots) rather than a single frame.
    pub fn needs_history(self) -> bool {
        matches!(self, RelationId::HeatFlow | RelationId::ThermalFisher)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// Error produced when a relation label does not match any known relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRelationError {
    pub token: String,
}

impl fmt::Display for ParseRelationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown relation '{}'", self.token)
    }
}

impl std::error::Error for ParseRelationError {}

impl FromStr for RelationId {
    type Err = ParseRelationError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        RelationId::ALL
            .into_iter()
            .find(|id| id.wire_name() == s)
            .ok_or_else(|| ParseRelationError { token: s.to_owned() })
    }
}

/// How a relation's residual is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Holds identically; the residual is numerical error.
    Exact,
    /// Holds only under model assumptions; the residual is an output.
    Formal,
}

impl Classification {
    pub fn wire_name(self) -> &'static str {
        match self {
            Classification::Exact => "exact",
            Classification::Formal => "formal",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// One side of a relation: either a scalar value or a field summarized by
/// its masked sup and L2 norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Side {
    Scalar(f64),
    Field { sup: f64, l2: f64 },
}

impl Side {
    /// Single representative number for tabular output: the value itself
    /// for scalars, the sup norm for fields.
    pub fn headline(&self) -> f64 {
        match *self {
            Side::Scalar(v) => v,
            Side::Field { sup, .. } => sup,
        }
    }
}

/// Outcome of checking one relation on one density (or snapshot triple).
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub relation: RelationId,
    pub classification: Classification,
    pub lhs: Side,
    pub rhs: Side,
    /// Sup norm of the residual over the support mask (|lhs - rhs| for
    /// scalar relations).
    pub residual_sup: f64,
    /// L2 norm of the residual over the support mask (equal to
    /// `residual_sup` for scalar relations).
    pub residual_l2: f64,
    pub excluded_mass: f64,
    pub metadata: BTreeMap<String, String>,
}

impl IdentityReport {
    fn scalar(
        relation: RelationId,
        lhs: f64,
        rhs: f64,
        excluded_mass: f64,
        metadata: BTreeMap<String, String>,
    ) -> Self {
        let residual = (lhs - rhs).abs();
        Self {
            relation,
            classification: relation.classification(),
            lhs: Side::Scalar(lhs),
            rhs: Side::Scalar(rhs),
            residual_sup: residual,
            residual_l2: residual,
            excluded_mass,
            metadata,
        }
    }
}

/// Renders a metadata value compactly: plain decimal for ordinary
/// magnitudes, scientific notation for extreme ones.
fn fmt_meta(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e16) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// A density at one instant, optionally flanked by the neighboring
/// snapshots needed for a centered time derivative.
#[derive(Debug, Clone, Copy)]
pub enum DensitySnapshot<'a> {
    /// The density does not depend on time; time derivatives vanish.
    Stationary(&'a DensityField),
    /// Three uniformly spaced snapshots centered on the instant of
    /// interest.
    Centered {
        prev: &'a DensityField,
        mid: &'a DensityField,
        next: &'a DensityField,
        dt: f64,
    },
}

impl<'a> DensitySnapshot<'a> {
    pub fn mid(&self) -> &'a DensityField {
        match self {
            DensitySnapshot::Stationary(p) => p,
            DensitySnapshot::Centered { mid, .. } => mid,
        }
    }

    fn validate(&self) -> Result<()> {
        if let DensitySnapshot::Centered { prev, mid, next, dt } = self {
            if prev.grid() != mid.grid() || next.grid() != mid.grid() {
                return Err(SubquantumError::GridMismatch { context: "density snapshots" });
            }
            if !(dt.is_finite() && *dt > 0.0) {
                return Err(SubquantumError::InvalidTimeStep { value: *dt });
            }
        }
        Ok(())
    }
}

/// Time history of the heat map around one instant, for the low-level
/// right-hand-side assembly.
#[derive(Debug, Clone, Copy)]
pub enum HeatHistory<'a> {
    Stationary,
    Centered { prev: &'a HeatField, next: &'a HeatField, dt: f64 },
}

impl<'a> HeatHistory<'a> {
    fn ensure_consistent(&self, mid: &HeatField) -> Result<()> {
        if let HeatHistory::Centered { prev, next, dt } = self {
            if !(dt.is_finite() && *dt > 0.0) {
                return Err(SubquantumError::InvalidTimeStep { value: *dt });
            }
            for side in [prev, next] {
                if side.grid() != mid.grid() {
                    return Err(SubquantumError::GridMismatch { context: "heat history" });
                }
                if side.gauge() != mid.gauge() || side.alpha() != mid.alpha() {
                    return Err(SubquantumError::GaugeMismatch);
                }
            }
        }
        Ok(())
    }
}

/// Right-hand side of the heat-flow reading of the quantum potential:
/// `(hbar^2 / 4m) * [ lap(Qt) - (1/D) * dQt/dt ]` with `Qt = alpha * Q` and
/// the diffusion scale `D = hbar / 2m`. Every sample is returned; masking is
/// the caller's concern.
pub fn thermalized_qp_rhs(
    heat: &HeatField,
    history: HeatHistory,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<ScalarField> {
    history.ensure_consistent(heat)?;
    let alpha = heat.alpha();
    let q_tilde = heat.q_heat().map(|q| alpha * q)?;
    let lap = laplacian(&q_tilde, numerics.scheme)?;
    let coeff = constants.hbar() * constants.hbar() / (4.0 * constants.mass());
    let inv_diffusion = constants.diffusion().recip();
    match history {
        HeatHistory::Stationary => lap.map(|l| coeff * l),
        HeatHistory::Centered { prev, next, dt } => {
            let half = 0.5 / dt;
            let values = (0..heat.grid().len())
                .map(|i| {
                    let dq_dt =
                        alpha * (next.q_heat().values()[i] - prev.q_heat().values()[i]) * half;
                    coeff * (lap.values()[i] - inv_diffusion * dq_dt)
                })
                .collect();
            ScalarField::new(heat.grid().clone(), values)
        }
    }
}

fn heats_for_snapshot<'a>(
    snap: &DensitySnapshot<'a>,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<(HeatField, Option<(HeatField, HeatField, f64)>)> {
    snap.validate()?;
    let mid_heat = heat_from_density(snap.mid(), constants, numerics, gauge)?;
    match snap {
        DensitySnapshot::Stationary(_) => Ok((mid_heat, None)),
        DensitySnapshot::Centered { prev, next, dt, .. } => {
            let prev_heat = heat_from_density(prev, constants, numerics, gauge)?;
            let next_heat = heat_from_density(next, constants, numerics, gauge)?;
            Ok((mid_heat, Some((prev_heat, next_heat, *dt))))
        }
    }
}

/// Pointwise residual of the heat-flow relation: quantum potential (density
/// form) minus [`thermalized_qp_rhs`], zero outside the support mask.
///
/// This residual is *formal*: it vanishes for no ordinary density and is
/// reported as a field of interest, not an error estimate.
pub fn heat_flow_residual(
    snap: DensitySnapshot,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<MaskedScalarField> {
    let (mid_heat, flank) = heats_for_snapshot(&snap, constants, numerics, gauge)?;
    let q = quantum_potential_density_form(snap.mid(), constants, numerics)?;
    let history = match &flank {
        None => HeatHistory::Stationary,
        Some((prev, next, dt)) => HeatHistory::Centered { prev, next, dt: *dt },
    };
    let rhs = thermalized_qp_rhs(&mid_heat, history, constants, numerics)?;
    let raw = q.field.zip_map(&rhs, "heat-flow residual", |lhs, r| lhs - r)?;
    let field = mask_scalar(&raw, &q.mask)?;
    Ok(MaskedScalarField { field, mask: q.mask })
}

/// Checks the heat-flow relation and summarizes the residual field.
pub fn check_heat_flow(
    snap: DensitySnapshot,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<IdentityReport> {
    let (mid_heat, flank) = heats_for_snapshot(&snap, constants, numerics, gauge)?;
    let p = snap.mid();
    let q = quantum_potential_density_form(p, constants, numerics)?;
    let history = match &flank {
        None => HeatHistory::Stationary,
        Some((prev, next, dt)) => HeatHistory::Centered { prev, next, dt: *dt },
    };
    let rhs = thermalized_qp_rhs(&mid_heat, history, constants, numerics)?;
    let rhs_masked = mask_scalar(&rhs, &q.mask)?;
    let residual = q.field.zip_map(&rhs_masked, "heat-flow residual", |a, b| a - b)?;

    let mut metadata = BTreeMap::new();
    metadata.insert("gauge".into(), gauge.wire_name().into());
    metadata.insert("stationary".into(), flank.is_none().to_string());
    Ok(IdentityReport {
        relation: RelationId::HeatFlow,
        classification: Classification::Formal,
        lhs: Side::Field {
            sup: q.field.max_abs_masked(&q.mask),
            l2: l2_norm_masked(&q.field, &q.mask, numerics.quadrature)?,
        },
        rhs: Side::Field {
            sup: rhs_masked.max_abs_masked(&q.mask),
            l2: l2_norm_masked(&rhs_masked, &q.mask, numerics.quadrature)?,
        },
        residual_sup: residual.max_abs_masked(&q.mask),
        residual_l2: l2_norm_masked(&residual, &q.mask, numerics.quadrature)?,
        excluded_mass: excluded_mass(p, &q.mask, numerics.quadrature)?,
        metadata,
    })
}

/// Checks that the density score equals minus `alpha` times the heat-map
/// gradient. With a shared log evaluation route the two sides are the same
/// numbers up to round-off; the relation guards that consistency.
pub fn check_gradient_relation(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<IdentityReport> {
    let sf = log_density_score(p, numerics.scheme, numerics.floor_rel)?;
    let heat = heat_from_density(p, constants, numerics, gauge)?;
    let grad_q = gradient(heat.q_heat(), numerics.scheme)?;
    let alpha = heat.alpha();
    let grid = p.grid();
    let dim = grid.dim();
    let mask = &sf.mask;

    let mut res_mag = vec![0.0; grid.len()];
    let mut rhs_mag = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        if !mask.is_active(i) {
            continue;
        }
        let mut r2 = 0.0;
        let mut b2 = 0.0;
        for d in 0..dim {
            let lhs = sf.score.component(d)[i];
            let rhs = -alpha * grad_q.component(d)[i];
            r2 += (lhs - rhs) * (lhs - rhs);
            b2 += rhs * rhs;
        }
        res_mag[i] = r2.sqrt();
        rhs_mag[i] = b2.sqrt();
    }
    let res_field = ScalarField::new(grid.clone(), res_mag)?;
    let rhs_field = ScalarField::new(grid.clone(), rhs_mag)?;
    let score_mag = ScalarField::new(
        grid.clone(),
        (0..grid.len()).map(|i| sf.score.magnitude_sq(i).sqrt()).collect(),
    )?;

    let mut metadata = BTreeMap::new();
    metadata.insert("gauge".into(), gauge.wire_name().into());
    metadata.insert("alpha".into(), fmt_meta(alpha));
    Ok(IdentityReport {
        relation: RelationId::GradientRelation,
        classification: Classification::Exact,
        lhs: Side::Field {
            sup: score_mag.max_abs_masked(mask),
            l2: l2_norm_masked(&score_mag, mask, numerics.quadrature)?,
        },
        rhs: Side::Field {
            sup: rhs_field.max_abs_masked(mask),
            l2: l2_norm_masked(&rhs_field, mask, numerics.quadrature)?,
        },
        residual_sup: res_field.max_abs_masked(mask),
        residual_l2: l2_norm_masked(&res_field, mask, numerics.quadrature)?,
        excluded_mass: excluded_mass(p, mask, numerics.quadrature)?,
        metadata,
    })
}

/// Checks that the direct Fisher integral and its heat-map representation
/// produce the same number.
pub fn check_fisher_representations(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<IdentityReport> {
    let direct = fisher_information(p, numerics)?;
    let heat = heat_from_density(p, constants, numerics, gauge)?;
    let via_heat = fisher_from_heat(&heat, numerics)?;
    let mut metadata = BTreeMap::new();
    metadata.insert("gauge".into(), gauge.wire_name().into());
    metadata.insert("c_gauge".into(), fmt_meta(heat.c_gauge()));
    Ok(IdentityReport::scalar(
        RelationId::FisherRepresentations,
        direct.value,
        via_heat.value,
        direct.excluded_mass,
        metadata,
    ))
}

/// Checks that the mean quantum potential equals
/// `-(hbar^2 / 8m) * F` for the Fisher information `F`.
///
/// Fails with a boundary escalation if a non-negligible fraction of the
/// density presses against the box edge, since the underlying
/// integration-by-parts argument assumes vanishing boundary terms.
pub fn check_mean_qp_fisher(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<IdentityReport> {
    let fraction = p.boundary_fraction();
    if fraction > BOUNDARY_ESCALATION_REL {
        return Err(SubquantumError::BoundaryMass {
            fraction,
            threshold: BOUNDARY_ESCALATION_REL,
        });
    }
    let mean = mean_quantum_potential(p, constants, numerics)?;
    let fisher = fisher_information(p, numerics)?;
    let rhs = -constants.hbar() * constants.hbar() / (8.0 * constants.mass()) * fisher.value;
    let mut metadata = BTreeMap::new();
    metadata.insert("fisher".into(), fmt_meta(fisher.value));
    metadata.insert("boundary_fraction".into(), fmt_meta(fraction));
    Ok(IdentityReport::scalar(
        RelationId::MeanQpFisher,
        mean.value,
        rhs,
        mean.excluded_mass,
        metadata,
    ))
}

/// Checks that the momentum-fluctuation field equals mass times the osmotic
/// velocity.
pub fn check_momentum_velocity(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<IdentityReport> {
    let dp = momentum_fluctuation(p, constants, numerics)?;
    let u = osmotic_velocity(p, constants, numerics)?;
    let m = constants.mass();
    let grid = p.grid();
    let dim = grid.dim();
    let mask = &dp.mask;

    let mut res_mag = vec![0.0; grid.len()];
    let mut lhs_mag = vec![0.0; grid.len()];
    let mut rhs_mag = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        if !mask.is_active(i) {
            continue;
        }
        let mut r2 = 0.0;
        let mut a2 = 0.0;
        let mut b2 = 0.0;
        for d in 0..dim {
            let lhs = dp.field.component(d)[i];
            let rhs = m * u.field.component(d)[i];
            r2 += (lhs - rhs) * (lhs - rhs);
            a2 += lhs * lhs;
            b2 += rhs * rhs;
        }
        res_mag[i] = r2.sqrt();
        lhs_mag[i] = a2.sqrt();
        rhs_mag[i] = b2.sqrt();
    }
    let res_field = ScalarField::new(grid.clone(), res_mag)?;
    let lhs_field = ScalarField::new(grid.clone(), lhs_mag)?;
    let rhs_field = ScalarField::new(grid.clone(), rhs_mag)?;

    Ok(IdentityReport {
        relation: RelationId::MomentumVelocity,
        classification: Classification::Exact,
        lhs: Side::Field {
            sup: lhs_field.max_abs_masked(mask),
            l2: l2_norm_masked(&lhs_field, mask, numerics.quadrature)?,
        },
        rhs: Side::Field {
            sup: rhs_field.max_abs_masked(mask),
            l2: l2_norm_masked(&rhs_field, mask, numerics.quadrature)?,
        },
        residual_sup: res_field.max_abs_masked(mask),
        residual_l2: l2_norm_masked(&res_field, mask, numerics.quadrature)?,
        excluded_mass: excluded_mass(p, mask, numerics.quadrature)?,
        metadata: BTreeMap::new(),
    })
}

/// Pieces of the thermal Fisher evaluation, exposed for reporting.
#[derive(Debug, Clone, Copy)]
pub struct ThermalFisherParts {
    /// `-2 alpha * integral of P [ lap(Q) - (2m/hbar) dQ/dt ]`, evaluated
    /// with stencils and quadrature on the heat samples.
    pub f_thermal: f64,
    /// Centered-difference rate of the gauge constant `c` (zero for a
    /// stationary snapshot or the fixed-zero gauge).
    pub c_prime: f64,
    /// Direct-route Fisher information of the middle frame.
    pub fisher: f64,
    pub excluded_mass: f64,
    pub boundary_fraction: f64,
}

/// Evaluates the thermal Fisher functional
/// `-2 alpha * integral of P [ lap(Q) - (2m/hbar) dQ/dt ]`
/// by brute-force quadrature over the support mask, together with the
/// quantities its closed consequence is built from.
///
/// Fails with a boundary escalation if the density presses against the box
/// edge (the closed consequence relies on discarded boundary terms).
pub fn thermal_fisher_value(
    snap: DensitySnapshot,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<ThermalFisherParts> {
    let p = snap.mid();
    let boundary_fraction = p.boundary_fraction();
    if boundary_fraction > BOUNDARY_ESCALATION_REL {
        return Err(SubquantumError::BoundaryMass {
            fraction: boundary_fraction,
            threshold: BOUNDARY_ESCALATION_REL,
        });
    }
    let (mid_heat, flank) = heats_for_snapshot(&snap, constants, numerics, gauge)?;
    let lap_q = laplacian(mid_heat.q_heat(), numerics.scheme)?;
    let two_m_over_hbar = 2.0 * constants.mass() / constants.hbar();
    let alpha = mid_heat.alpha();
    let mask = mid_heat.mask();

    let dq_dt: Box<dyn Fn(usize) -> f64> = match &flank {
        None => Box::new(|_| 0.0),
        Some((prev, next, dt)) => {
            let half = 0.5 / dt;
            let prev_q = prev.q_heat().values();
            let next_q = next.q_heat().values();
            Box::new(move |i| (next_q[i] - prev_q[i]) * half)
        }
    };
    let integral = integrate_masked_fn(p.grid(), mask, numerics.quadrature, |i| {
        p.values()[i] * (lap_q.values()[i] - two_m_over_hbar * dq_dt(i))
    })?;
    let f_thermal = -2.0 * alpha * integral;

    let c_prime = match &flank {
        None => 0.0,
        Some((prev, next, dt)) => (next.c_gauge() - prev.c_gauge()) * 0.5 / dt,
    };
    let fisher = fisher_information(p, numerics)?;
    Ok(ThermalFisherParts {
        f_thermal,
        c_prime,
        fisher: fisher.value,
        excluded_mass: fisher.excluded_mass,
        boundary_fraction,
    })
}

/// Checks the thermal Fisher functional against its closed consequence
/// `-2 F + (4m/hbar) c'`, where `F` is the direct-route Fisher information
/// and `c'` the drift of the gauge constant.
pub fn check_thermal_fisher(
    snap: DensitySnapshot,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<IdentityReport> {
    let parts = thermal_fisher_value(snap, constants, numerics, gauge)?;
    let rhs =
        -2.0 * parts.fisher + 4.0 * constants.mass() / constants.hbar() * parts.c_prime;
    let mut metadata = BTreeMap::new();
    metadata.insert("gauge".into(), gauge.wire_name().into());
    metadata.insert("fisher".into(), fmt_meta(parts.fisher));
    metadata.insert("c_prime".into(), fmt_meta(parts.c_prime));
    metadata.insert(
        "f_thermal_minus_f".into(),
        fmt_meta(parts.f_thermal - parts.fisher),
    );
    metadata.insert("boundary_fraction".into(), fmt_meta(parts.boundary_fraction));
    Ok(IdentityReport::scalar(
        RelationId::ThermalFisher,
        parts.f_thermal,
        rhs,
        parts.excluded_mass,
        metadata,
    ))
}

/// Runs the check for `relation` on a single stationary density. Relations
/// needing a time history are evaluated in their stationary form.
pub fn check_relation_static(
    relation: RelationId,
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<IdentityReport> {
    match relation {
        RelationId::HeatFlow => {
            check_heat_flow(DensitySnapshot::Stationary(p), constants, numerics, gauge)
        }
        RelationId::GradientRelation => check_gradient_relation(p, constants, numerics, gauge),
        RelationId::FisherRepresentations => {
            check_fisher_representations(p, constants, numerics, gauge)
        }
        RelationId::MeanQpFisher => check_mean_qp_fisher(p, constants, numerics),
        RelationId::ThermalFisher => {
            check_thermal_fisher(DensitySnapshot::Stationary(p), constants, numerics, gauge)
        }
        RelationId::MomentumVelocity => check_momentum_velocity(p, constants, numerics),
    }
}

/// One resolution of a convergence study.
#[derive(Debug, Clone, Copy)]
pub struct ConvergencePoint {
    pub n: usize,
    pub h: f64,
    pub residual_sup: f64,
}

/// Residuals of one relation across grid refinements, with the least-squares
/// slope of `ln(residual)` against `ln(h)`.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub relation: RelationId,
    pub points: Vec<ConvergencePoint>,
    pub fitted_order: f64,
}

/// Substitute for exactly zero residuals so the log-log fit stays defined.
/// A study whose residuals sit at zero or at the round-off floor reports a
/// fitted order near zero — honestly signaling that there is no
/// h-dependent error left to converge.
const ZERO_RESIDUAL_FLOOR: f64 = 1e-300;

/// Evaluates one relation's residual on a family of grids over `[lo, hi]`
/// with point counts `n_list` (at least three), sampling the density with
/// `density_fn`, and fits the convergence order.
pub fn convergence_study(
    relation: RelationId,
    lo: f64,
    hi: f64,
    n_list: &[usize],
    density_fn: impl Fn(&Grid) -> Result<DensityField>,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<ConvergenceStudy> {
    if n_list.len() < 3 {
        return Err(SubquantumError::TooFewResolutions { got: n_list.len() });
    }
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let grid = Grid::line(lo, hi, n)?;
        let p = density_fn(&grid)?;
        let report = check_relation_static(relation, &p, constants, numerics, gauge)?;
        points.push(ConvergencePoint {
            n,
            h: grid.axis(0).spacing(),
            residual_sup: report.residual_sup,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.h.ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p.residual_sup.max(ZERO_RESIDUAL_FLOOR).ln())
        .collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let var: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let fitted_order = cov / var;
    Ok(ConvergenceStudy { relation, points, fitted_order })
}
