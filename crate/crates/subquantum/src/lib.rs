//! Density-based quantum potential, heat-map, and Fisher-information
//! diagnostics on uniform grids.
//!
//! The crate takes a probability density `P` sampled on a rectangular grid
//! (one to three dimensions) and computes the pointwise fields and integral
//! functionals built from its logarithmic derivatives: the score
//! `grad(P)/P`, the osmotic velocity and momentum-fluctuation fields, the
//! quantum potential in both its density form and its amplitude form, the
//! heat-map representation `P = c_hat * exp(-alpha * Q)`, and the Fisher
//! information together with the identities that tie these objects to each
//! other. A small Crank-Nicolson propagator evolves one-dimensional wave
//! functions so the same diagnostics can be run on time-dependent densities.
//!
//! Everything numerical is deterministic: fixed stencil tables, fixed
//! quadrature weights, pairwise summation. Given the same inputs, every
//! function here reproduces the same bits.

pub mod constants;
pub mod diffops;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod identity;
pub mod quadrature;
pub mod quantities;

pub use constants::PhysicalConstants;
pub use diffops::{
    gradient, laplacian, log_density_score, log_derivatives, safe_ln, time_derivative,
    LogDerivatives, ScoreField, StencilScheme,
};
pub use error::{Result, SubquantumError};
pub use evolution::{
    crank_nicolson_step, evolve, CatalogDensity, Evolution, EvolutionParams, Potential,
    Trajectory,
};
pub use field::{
    amplitude_from_density, DensityField, ScalarField, SupportMask, VectorField, WaveFunction,
    BOUNDARY_TAIL_WARN_REL, NEGATIVE_CLAMP_REL,
};
pub use grid::{Axis, Grid};
pub use identity::{
    check_fisher_representations, check_gradient_relation, check_heat_flow,
    check_mean_qp_fisher, check_momentum_velocity, check_relation_static, check_thermal_fisher,
    convergence_study, heat_flow_residual, thermal_fisher_value, thermalized_qp_rhs,
    Classification, ConvergencePoint, ConvergenceStudy, DensitySnapshot, HeatHistory,
    IdentityReport, RelationId, Side, ThermalFisherParts, BOUNDARY_ESCALATION_REL,
};
pub use quadrature::{
    excluded_mass, integrate, integrate_masked, integrate_masked_fn, l2_norm_masked, pairwise_sum,
    Quadrature,
};
pub use quantities::{
    density_from_heat, fisher_from_heat, fisher_information, heat_difference_from_ratio,
    heat_from_density, mean_quantum_potential, mean_total_energy, momentum_fluctuation,
    osmotic_velocity, quantum_potential_amplitude_form, quantum_potential_density_form,
    total_energy_density, DensityFromHeat, Gauge, HeatDifference, HeatField, MaskedIntegral,
    MaskedScalarField, MaskedVectorField,
};

/// Bundle of the numerical knobs shared by most computations: stencil order,
/// relative support floor for logarithmic derivatives, and quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub scheme: StencilScheme,
    pub floor_rel: f64,
    pub quadrature: Quadrature,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            scheme: StencilScheme::Order2,
            floor_rel: 1e-12,
            quadrature: Quadrature::Trapezoid,
        }
    }
}
