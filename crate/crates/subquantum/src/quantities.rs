//! Pointwise fields and integral functionals derived from a density.
//!
//! Every quantity here is a function of the logarithmic derivatives of `P`
//! computed by [`crate::diffops::log_derivatives`], so quantities that are
//! algebraically related (score, osmotic velocity, momentum fluctuation,
//! both quantum-potential forms, Fisher information) stay numerically
//! consistent with each other: they share one discretization of `ln P` and
//! one support mask.
//!
//! The heat-map representation writes the density as
//! `P = c_hat * exp(-alpha * Q)` for a scalar field `Q` with units of
//! energy and `alpha = 1 / (omega * hbar)`. The additive constant in `Q`
//! (equivalently the scale `c_hat`) is a gauge choice; see [`Gauge`].

use crate::constants::PhysicalConstants;
use crate::diffops::{gradient, log_density_score, log_derivatives, mask_scalar, safe_ln};
use crate::error::{Result, SubquantumError};
use crate::field::{DensityField, ScalarField, SupportMask, VectorField};
use crate::quadrature::{excluded_mass, integrate_masked_fn, pairwise_sum, Quadrature};
use crate::Numerics;

/// Fixes the additive constant of the heat map `Q`.
///
/// * `ZeroC` — the log-scale constant is zero (`c_hat = 1`), so
///   `Q = -ln(P) / alpha` directly.
/// * `MinZero` — the constant is chosen so that `min Q = 0` over the support
///   mask, i.e. the heat map vanishes at the density peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    ZeroC,
    MinZero,
}

impl Gauge {
    /// Stable label used in reports and configuration files.
    pub fn wire_name(self) -> &'static str {
        match self {
            Gauge::ZeroC => "zero_c",
            Gauge::MinZero => "min_zero",
        }
    }
}

impl std::fmt::Display for Gauge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// A scalar field together with the support mask on which it is meaningful.
/// Samples outside the mask are zero.
#[derive(Debug, Clone)]
pub struct MaskedScalarField {
    pub field: ScalarField,
    pub mask: SupportMask,
}

/// A vector field together with the support mask on which it is meaningful.
/// Samples outside the mask are zero.
#[derive(Debug, Clone)]
pub struct MaskedVectorField {
    pub field: VectorField,
    pub mask: SupportMask,
}

/// Result of an integral restricted to the support mask, together with the
/// probability mass of the excluded region (clamped to `[0, 1]`).
#[derive(Debug, Clone, Copy)]
pub struct MaskedIntegral {
    pub value: f64,
    pub excluded_mass: f64,
}

/// Heat-map representation of a density: `P = exp(c_gauge - alpha * Q)`.
///
/// `q_heat` carries the smooth logarithmic continuation of `Q` across the
/// whole grid (so stencils applied near the mask edge stay accurate); only
/// samples on `mask` correspond to trustworthy density values.
#[derive(Debug, Clone)]
pub struct HeatField {
    q_heat: ScalarField,
    c_gauge: f64,
    alpha: f64,
    gauge: Gauge,
    mask: SupportMask,
}

impl HeatField {
    /// Assembles a heat field from raw parts, validating the scale constant
    /// and grid agreement.
    pub fn from_parts(
        q_heat: ScalarField,
        c_gauge: f64,
        alpha: f64,
        gauge: Gauge,
        mask: SupportMask,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(SubquantumError::InvalidParameter { name: "alpha", value: alpha });
        }
        if !c_gauge.is_finite() {
            return Err(SubquantumError::InvalidParameter { name: "c_gauge", value: c_gauge });
        }
        if q_heat.grid() != mask.grid() {
            return Err(SubquantumError::GridMismatch { context: "heat field assembly" });
        }
        Ok(Self { q_heat, c_gauge, alpha, gauge, mask })
    }

    /// The heat map samples, including the off-mask continuation.
    pub fn q_heat(&self) -> &ScalarField {
        &self.q_heat
    }

    /// Log-scale gauge constant `c` with `c_hat = exp(c)`.
    pub fn c_gauge(&self) -> f64 {
        self.c_gauge
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn mask(&self) -> &SupportMask {
        &self.mask
    }

    pub fn grid(&self) -> &crate::grid::Grid {
        self.q_heat.grid()
    }
}

/// Density reconstructed from a heat field, with the normalization scale
/// `c_hat` that makes `P = c_hat * exp(-alpha * Q)` integrate to one.
#[derive(Debug, Clone)]
pub struct DensityFromHeat {
    pub density: DensityField,
    pub c_hat: f64,
}

/// Energy difference between two densities read off their ratio, reported on
/// the intersection of the two support masks (zero outside it).
#[derive(Debug, Clone)]
pub struct HeatDifference {
    pub delta_q: ScalarField,
    pub mask: SupportMask,
}

/// Osmotic velocity `u = -D * grad(P)/P` with the diffusion scale
/// `D = hbar / 2m`, zero outside the support mask.
pub fn osmotic_velocity(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<MaskedVectorField> {
    let sf = log_density_score(p, numerics.scheme, numerics.floor_rel)?;
    let d = constants.diffusion();
    let field = sf.score.map(|s| -d * s)?;
    Ok(MaskedVectorField { field, mask: sf.mask })
}

/// Momentum-fluctuation field `dp = -(hbar/2) * grad(P)/P`, zero outside the
/// support mask. Identical to `m * u` for the osmotic velocity `u`.
pub fn momentum_fluctuation(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<MaskedVectorField> {
    let sf = log_density_score(p, numerics.scheme, numerics.floor_rel)?;
    let half_hbar = 0.5 * constants.hbar();
    let field = sf.score.map(|s| -half_hbar * s)?;
    Ok(MaskedVectorField { field, mask: sf.mask })
}

/// Pointwise total energy `E = hbar * omega + |dp|^2 / 2m`. Outside the
/// support mask the fluctuation term is absent and the baseline
/// `hbar * omega` is reported.
pub fn total_energy_density(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<ScalarField> {
    let dp = momentum_fluctuation(p, constants, numerics)?;
    let base = constants.hbar() * constants.omega();
    let inv_2m = 0.5 / constants.mass();
    let values = (0..p.grid().len())
        .map(|i| base + inv_2m * dp.field.magnitude_sq(i))
        .collect();
    ScalarField::new(p.grid().clone(), values)
}

/// Quantum potential evaluated from density derivatives:
/// `Q = -(hbar^2/4m) * [ (1/2) |grad(P)/P|^2 - lap(P)/P ]`.
///
/// Expanded in logarithmic derivatives of `L = ln P` this is
/// `(hbar^2/4m) * [ lap(L) + (1/2) |grad(L)|^2 ]`, which is the form
/// evaluated here. Zero outside the support mask.
pub fn quantum_potential_density_form(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<MaskedScalarField> {
    let logs = log_derivatives(p, numerics.scheme, numerics.floor_rel)?;
    let coeff = constants.hbar() * constants.hbar() / (4.0 * constants.mass());
    let values = (0..p.grid().len())
        .map(|i| coeff * (logs.lap_log.values()[i] + 0.5 * logs.grad_log.magnitude_sq(i)))
        .collect();
    let raw = ScalarField::new(p.grid().clone(), values)?;
    let field = mask_scalar(&raw, &logs.mask)?;
    Ok(MaskedScalarField { field, mask: logs.mask })
}

/// Quantum potential evaluated from the amplitude `R = sqrt(P)`:
/// `Q_R = -(hbar^2/2m) * lap(R)/R`.
///
/// `lap(R)/R` is computed through logarithmic derivatives of `ln R`
/// (`lap(ln R) + |grad(ln R)|^2`), a separate evaluation route from
/// [`quantum_potential_density_form`]; analytically the two potentials are
/// exact negatives of each other. Zero outside the support mask.
pub fn quantum_potential_amplitude_form(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<MaskedScalarField> {
    let (mask, _) = SupportMask::from_relative_floor(p.field(), numerics.floor_rel)?;
    let amplitude = crate::field::amplitude_from_density(p)?;
    let ln_r = amplitude.map(safe_ln)?;
    let grad_ln_r = gradient(&ln_r, numerics.scheme)?;
    let lap_ln_r = crate::diffops::laplacian(&ln_r, numerics.scheme)?;
    let coeff = -(constants.hbar() * constants.hbar()) / (2.0 * constants.mass());
    let values = (0..p.grid().len())
        .map(|i| coeff * (lap_ln_r.values()[i] + grad_ln_r.magnitude_sq(i)))
        .collect();
    let raw = ScalarField::new(p.grid().clone(), values)?;
    let field = mask_scalar(&raw, &mask)?;
    Ok(MaskedScalarField { field, mask })
}

/// Fisher information `F = integral of P |grad(P)/P|^2` over the support
/// mask, with the excluded probability mass reported alongside.
pub fn fisher_information(p: &DensityField, numerics: Numerics) -> Result<MaskedIntegral> {
    let sf = log_density_score(p, numerics.scheme, numerics.floor_rel)?;
    let value = integrate_masked_fn(p.grid(), &sf.mask, numerics.quadrature, |i| {
        p.values()[i] * sf.score.magnitude_sq(i)
    })?;
    let lost = excluded_mass(p, &sf.mask, numerics.quadrature)?;
    Ok(MaskedIntegral { value, excluded_mass: lost })
}

/// Density-weighted mean of the density-form quantum potential over the
/// support mask.
pub fn mean_quantum_potential(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<MaskedIntegral> {
    let q = quantum_potential_density_form(p, constants, numerics)?;
    let value = integrate_masked_fn(p.grid(), &q.mask, numerics.quadrature, |i| {
        p.values()[i] * q.field.values()[i]
    })?;
    let lost = excluded_mass(p, &q.mask, numerics.quadrature)?;
    Ok(MaskedIntegral { value, excluded_mass: lost })
}

/// Density-weighted mean of the pointwise total energy over the support
/// mask.
pub fn mean_total_energy(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<MaskedIntegral> {
    let e = total_energy_density(p, constants, numerics)?;
    let sf = log_density_score(p, numerics.scheme, numerics.floor_rel)?;
    let value = integrate_masked_fn(p.grid(), &sf.mask, numerics.quadrature, |i| {
        p.values()[i] * e.values()[i]
    })?;
    let lost = excluded_mass(p, &sf.mask, numerics.quadrature)?;
    Ok(MaskedIntegral { value, excluded_mass: lost })
}

/// Extracts the heat map `Q = (c - ln P) / alpha` from a density, with the
/// gauge constant `c` fixed by `gauge`. Off-mask samples carry the safe-log
/// continuation rather than zeros, so derivative stencils near the mask edge
/// remain accurate.
pub fn heat_from_density(
    p: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
    gauge: Gauge,
) -> Result<HeatField> {
    let (mask, _) = SupportMask::from_relative_floor(p.field(), numerics.floor_rel)?;
    let alpha = constants.inv_action();
    let c_gauge = match gauge {
        Gauge::ZeroC => 0.0,
        // min Q = 0 over the mask <=> c = max of ln P over the mask.
        Gauge::MinZero => safe_ln(p.max_value()),
    };
    let inv_alpha = alpha.recip();
    let q_heat = p.field().map(|v| (c_gauge - safe_ln(v)) * inv_alpha)?;
    HeatField::from_parts(q_heat, c_gauge, alpha, gauge, mask)
}

/// Exponent above which `exp` would overflow into garbage; reconstruction
/// refuses to proceed past it.
const EXP_OVERFLOW_LIMIT: f64 = 700.0;

/// Reconstructs the normalized density `P = c_hat * exp(-alpha * Q)` from a
/// heat field. Fails if the exponent anywhere exceeds the overflow guard.
pub fn density_from_heat(heat: &HeatField, rule: Quadrature) -> Result<DensityFromHeat> {
    let alpha = heat.alpha();
    let c = heat.c_gauge();
    let mut max_exponent = f64::NEG_INFINITY;
    for &q in heat.q_heat().values() {
        max_exponent = max_exponent.max(c - alpha * q);
    }
    if max_exponent > EXP_OVERFLOW_LIMIT {
        return Err(SubquantumError::ExpOverflow { exponent: max_exponent });
    }
    let raw = heat.q_heat().map(|q| (c - alpha * q).exp())?;
    let density = DensityField::normalize(&raw, rule)?;
    // c_hat * exp(-alpha Q) must equal the *normalized* density, so the
    // gauge scale exp(c) is divided by the raw mass.
    let mass = crate::quadrature::integrate(&raw, rule)?;
    Ok(DensityFromHeat { density, c_hat: c.exp() / mass })
}

/// Fisher information evaluated through the heat-map representation:
/// `F = alpha^2 * integral of c_hat * exp(-alpha Q) * |grad Q|^2`, with the
/// gradient stencil applied to the heat samples themselves.
pub fn fisher_from_heat(heat: &HeatField, numerics: Numerics) -> Result<MaskedIntegral> {
    let grad_q = gradient(heat.q_heat(), numerics.scheme)?;
    let alpha = heat.alpha();
    let c = heat.c_gauge();
    let grid = heat.grid();
    let weight = |i: usize| (c - alpha * heat.q_heat().values()[i]).exp();
    let value = alpha
        * alpha
        * integrate_masked_fn(grid, heat.mask(), numerics.quadrature, |i| {
            weight(i) * grad_q.magnitude_sq(i)
        })?;
    // Excluded mass of the represented density, not of some external P.
    let kept = integrate_masked_fn(grid, heat.mask(), numerics.quadrature, weight)?;
    let lost = (1.0 - kept).clamp(0.0, 1.0);
    Ok(MaskedIntegral { value, excluded_mass: lost })
}

/// Heat-map difference between two densities on a shared grid, read off the
/// density ratio: `dQ = -kT * ln(P_t / P_0)`, evaluated on the intersection
/// of the two support masks and zero outside it.
pub fn heat_difference_from_ratio(
    p_t: &DensityField,
    p_0: &DensityField,
    constants: &PhysicalConstants,
    numerics: Numerics,
) -> Result<HeatDifference> {
    if p_t.grid() != p_0.grid() {
        return Err(SubquantumError::GridMismatch { context: "heat difference" });
    }
    let (mask_t, _) = SupportMask::from_relative_floor(p_t.field(), numerics.floor_rel)?;
    let (mask_0, _) = SupportMask::from_relative_floor(p_0.field(), numerics.floor_rel)?;
    let mask = mask_t.intersect(&mask_0)?;
    let kt = constants.kt();
    let values = p_t
        .values()
        .iter()
        .zip(p_0.values())
        .zip(mask.flags())
        .map(|((&pt, &p0), &keep)| {
            if keep {
                -kt * (safe_ln(pt) - safe_ln(p0))
            } else {
                0.0
            }
        })
        .collect();
    let delta_q = ScalarField::new(p_t.grid().clone(), values)?;
    Ok(HeatDifference { delta_q, mask })
}

/// Density-weighted mask statistics used by reporting layers: the largest
/// |value| over the mask for each component of a vector field.
pub fn sup_component_masked(v: &VectorField, mask: &SupportMask) -> Vec<f64> {
    (0..v.dim())
        .map(|d| {
            let mut m: f64 = 0.0;
            for (i, &x) in v.component(d).iter().enumerate() {
                if mask.is_active(i) {
                    m = m.max(x.abs());
                }
            }
            m
        })
        .collect()
}

/// Sum of samples over the mask (no quadrature weights); used for cheap
/// internal averages in diagnostics.
pub fn masked_sample_sum(values: &[f64], mask: &SupportMask) -> f64 {
    let kept: Vec<f64> = values
        .iter()
        .zip(mask.flags())
        .map(|(&v, &keep)| if keep { v } else { 0.0 })
        .collect();
    pairwise_sum(&kept)
}
