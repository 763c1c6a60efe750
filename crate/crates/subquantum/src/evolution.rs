//! Time evolution of one-dimensional wave functions and a catalog of
//! closed-form densities to evolve and compare against.
//!
//! The propagator is the Crank-Nicolson scheme
//! `(I + i dt H / 2 hbar) psi(t+dt) = (I - i dt H / 2 hbar) psi(t)`
//! with the Hamiltonian discretized by the standard three-point kinetic
//! stencil and hard-wall (Dirichlet) boundaries. The scheme is unconditionally
//! stable, second-order accurate in time, and exactly unitary in the discrete
//! l2 norm, so probability leaks only through round-off as long as the packet
//! stays away from the walls.

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{Result, SubquantumError};
use crate::field::{DensityField, WaveFunction};
use crate::grid::Grid;
use crate::quadrature::Quadrature;

/// External potential entering the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// V = 0 everywhere.
    Free,
    /// V = (1/2) m omega^2 x^2 with `m` and `omega` from the constants.
    Harmonic,
}

impl Potential {
    pub fn value(&self, constants: &PhysicalConstants, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Harmonic => {
                0.5 * constants.mass() * constants.omega() * constants.omega() * x * x
            }
        }
    }
}

/// A time-ordered sequence of density snapshots on one grid with uniform
/// spacing between snapshot times. Three consecutive frames are enough for a
/// centered time derivative, so a trajectory must hold at least three.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    frames: Vec<DensityField>,
}

impl Trajectory {
    /// Validates and wraps snapshots: at least three frames, one common
    /// grid, strictly increasing uniformly spaced times, and unit mass for
    /// every frame (to `1e-8` under `rule`).
    pub fn new(times: Vec<f64>, frames: Vec<DensityField>, rule: Quadrature) -> Result<Self> {
        if frames.len() < 3 {
            return Err(SubquantumError::InvalidTrajectory {
                reason: format!("need at least 3 frames, got {}", frames.len()),
            });
        }
        if times.len() != frames.len() {
            return Err(SubquantumError::InvalidTrajectory {
                reason: format!("{} times for {} frames", times.len(), frames.len()),
            });
        }
        let grid = frames[0].grid();
        if frames.iter().any(|f| f.grid() != grid) {
            return Err(SubquantumError::GridMismatch { context: "trajectory frames" });
        }
        let dt = times[1] - times[0];
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SubquantumError::InvalidTrajectory {
                reason: format!("snapshot spacing {dt} is not positive"),
            });
        }
        for w in times.windows(2) {
            let step = w[1] - w[0];
            if (step - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(SubquantumError::InvalidTrajectory {
                    reason: format!("snapshot spacing varies: {step} vs {dt}"),
                });
            }
        }
        for frame in &frames {
            frame.check_mass(rule, 1e-8)?;
        }
        Ok(Self { times, frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frame(&self, i: usize) -> &DensityField {
        &self.frames[i]
    }

    pub fn grid(&self) -> &Grid {
        self.frames[0].grid()
    }

    /// Uniform spacing between snapshot times.
    pub fn snapshot_dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// The frames `(i-1, i, i+1)` used for a centered time derivative at
    /// snapshot `i`; `i` must be an interior snapshot.
    pub fn centered_triple(&self, i: usize) -> Result<(&DensityField, &DensityField, &DensityField)> {
        if i == 0 || i + 1 >= self.frames.len() {
            return Err(SubquantumError::InvalidTrajectory {
                reason: format!(
                    "centered derivative needs an interior snapshot, got {i} of {}",
                    self.frames.len()
                ),
            });
        }
        Ok((&self.frames[i - 1], &self.frames[i], &self.frames[i + 1]))
    }
}

/// Solves a complex tridiagonal system with constant off-diagonals in place:
/// `off * x[j-1] + diag[j] * x[j] + off * x[j+1] = rhs[j]`.
///
/// The Crank-Nicolson left-hand matrix is strictly diagonally dominant for
/// nonnegative potentials, so the elimination needs no pivoting.
fn solve_constant_tridiagonal(
    diag: &[Complex64],
    off: Complex64,
    mut rhs: Vec<Complex64>,
) -> Vec<Complex64> {
    let n = diag.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    rhs[0] /= denom;
    for j in 1..n {
        scratch[j] = off / denom;
        denom = diag[j] - off * scratch[j];
        rhs[j] = (rhs[j] - off * rhs[j - 1]) / denom;
    }
    for j in (0..n - 1).rev() {
        let next = rhs[j + 1];
        rhs[j] -= scratch[j + 1] * next;
    }
    rhs
}

/// Advances a one-dimensional wavefunction by one Crank-Nicolson step of
/// size `dt` under `potential`. Boundary values couple to implicit zeros
/// beyond the box (hard walls).
pub fn crank_nicolson_step(
    psi: &WaveFunction,
    potential: Potential,
    constants: &PhysicalConstants,
    dt: f64,
) -> Result<Vec<Complex64>> {
    if psi.grid().dim() != 1 {
        return Err(SubquantumError::NotOneDimensional { context: "time evolution" });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SubquantumError::InvalidTimeStep { value: dt });
    }
    let grid = psi.grid();
    let axis = grid.axis(0);
    let n = axis.len();
    let h = axis.spacing();
    let hbar = constants.hbar();
    let kinetic = hbar * hbar / (constants.mass() * h * h); // diagonal part
    let off_real = -0.5 * kinetic; // off-diagonal part of H
    let lambda = Complex64::new(0.0, 0.5 * dt / hbar);

    // A = I + i dt H / 2 hbar (diag), B = I - i dt H / 2 hbar.
    let mut diag_a = Vec::with_capacity(n);
    let mut diag_b = Vec::with_capacity(n);
    for j in 0..n {
        let v = potential.value(constants, axis.coord(j));
        let h_jj = Complex64::new(kinetic + v, 0.0);
        diag_a.push(Complex64::new(1.0, 0.0) + lambda * h_jj);
        diag_b.push(Complex64::new(1.0, 0.0) - lambda * h_jj);
    }
    let off_a = lambda * off_real;
    let off_b = -lambda * off_real;

    let values = psi.values();
    let mut rhs = Vec::with_capacity(n);
    for j in 0..n {
        let left = if j > 0 { values[j - 1] } else { Complex64::new(0.0, 0.0) };
        let right = if j + 1 < n { values[j + 1] } else { Complex64::new(0.0, 0.0) };
        rhs.push(diag_b[j] * values[j] + off_b * (left + right));
    }
    Ok(solve_constant_tridiagonal(&diag_a, off_a, rhs))
}

/// Step count and snapshot cadence for [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct EvolutionParams {
    pub dt: f64,
    pub steps: usize,
    /// Number of steps between recorded snapshots.
    pub snapshot_stride: usize,
}

/// Result of an evolution run: the recorded density trajectory, the final
/// wavefunction, and the largest deviation of the squared norm from one seen
/// at any recorded snapshot.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub trajectory: Trajectory,
    pub final_wavefunction: WaveFunction,
    pub max_norm_drift: f64,
}

/// Evolves `psi0` for `params.steps` Crank-Nicolson steps, recording the
/// density every `params.snapshot_stride` steps (including the initial
/// state). The step count must be a positive multiple of the stride, with at
/// least two strides so the trajectory supports centered time derivatives.
pub fn evolve(
    psi0: &WaveFunction,
    potential: Potential,
    constants: &PhysicalConstants,
    params: EvolutionParams,
    rule: Quadrature,
) -> Result<Evolution> {
    let stride = params.snapshot_stride;
    if stride == 0 {
        return Err(SubquantumError::InvalidParameter {
            name: "snapshot_stride",
            value: 0.0,
        });
    }
    if params.steps == 0 || params.steps % stride != 0 || params.steps / stride < 2 {
        return Err(SubquantumError::InvalidTrajectory {
            reason: format!(
                "steps ({}) must be a positive multiple of the snapshot stride ({}) covering at least two strides",
                params.steps, stride
            ),
        });
    }
    let grid = psi0.grid().clone();
    let mut psi = psi0.clone();
    let mut times = vec![0.0];
    let mut frames = vec![psi.density(rule)?];
    let mut max_drift = (psi.norm_sq(rule)? - 1.0).abs();

    for step in 1..=params.steps {
        let next = crank_nicolson_step(&psi, potential, constants, params.dt)?;
        // The step is unitary up to round-off; carry the raw samples forward
        // and only *check* the norm, so drift stays observable.
        psi = WaveFunction::from_normalized(grid.clone(), next, rule, 1e-6)?;
        if step % stride == 0 {
            let drift = (psi.norm_sq(rule)? - 1.0).abs();
            max_drift = max_drift.max(drift);
            times.push(step as f64 * params.dt);
            frames.push(psi.density(rule)?);
        }
    }
    Ok(Evolution {
        trajectory: Trajectory::new(times, frames, rule)?,
        final_wavefunction: psi,
        max_norm_drift: max_drift,
    })
}

/// Closed-form densities with known Fisher information, used as references
/// and as initial conditions for evolution runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogDensity {
    /// Isotropic Gaussian of width `sigma` centered at `x0` on every axis.
    /// Time-independent.
    Gaussian { sigma: f64, x0: f64 },
    /// Harmonic-oscillator ground state: Gaussian with
    /// `sigma^2 = hbar / (2 m omega)`. Stationary.
    HarmonicGround,
    /// Coherent (displaced ground) state of the oscillator released from
    /// `x0`: the ground Gaussian with center `x0 cos(omega t)`.
    HarmonicCoherent { x0: f64 },
    /// Free Gaussian packet with initial width `sigma0`, center `x0`, and
    /// mean momentum `p0`; spreads as
    /// `sigma(t)^2 = sigma0^2 (1 + (hbar t / 2 m sigma0^2)^2)`.
    FreePacket { sigma0: f64, x0: f64, p0: f64 },
}

impl CatalogDensity {
    fn check_parameters(&self) -> Result<()> {
        match *self {
            CatalogDensity::Gaussian { sigma, x0 } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(SubquantumError::InvalidParameter { name: "sigma", value: sigma });
                }
                if !x0.is_finite() {
                    return Err(SubquantumError::InvalidParameter { name: "x0", value: x0 });
                }
            }
            CatalogDensity::HarmonicGround => {}
            CatalogDensity::HarmonicCoherent { x0 } => {
                if !x0.is_finite() {
                    return Err(SubquantumError::InvalidParameter { name: "x0", value: x0 });
                }
            }
            CatalogDensity::FreePacket { sigma0, x0, p0 } => {
                if !(sigma0.is_finite() && sigma0 > 0.0) {
                    return Err(SubquantumError::InvalidParameter {
                        name: "sigma0",
                        value: sigma0,
                    });
                }
                if !x0.is_finite() {
                    return Err(SubquantumError::InvalidParameter { name: "x0", value: x0 });
                }
                if !p0.is_finite() {
                    return Err(SubquantumError::InvalidParameter { name: "p0", value: p0 });
                }
            }
        }
        Ok(())
    }

    /// Whether the density is independent of time.
    pub fn is_stationary(&self) -> bool {
        match *self {
            CatalogDensity::Gaussian { .. } | CatalogDensity::HarmonicGround => true,
            CatalogDensity::HarmonicCoherent { x0 } => x0 == 0.0,
            CatalogDensity::FreePacket { .. } => false,
        }
    }

    /// Width and center of the Gaussian profile at time `t` (all catalog
    /// densities are Gaussian at every time).
    fn profile(&self, t: f64, constants: &PhysicalConstants) -> (f64, f64) {
        match *self {
            CatalogDensity::Gaussian { sigma, x0 } => (sigma, x0),
            CatalogDensity::HarmonicGround => {
                let sigma_sq = constants.hbar() / (2.0 * constants.mass() * constants.omega());
                (sigma_sq.sqrt(), 0.0)
            }
            CatalogDensity::HarmonicCoherent { x0 } => {
                let sigma_sq = constants.hbar() / (2.0 * constants.mass() * constants.omega());
                (sigma_sq.sqrt(), x0 * (constants.omega() * t).cos())
            }
            CatalogDensity::FreePacket { sigma0, x0, p0 } => {
                let tau = constants.hbar() * t / (2.0 * constants.mass() * sigma0 * sigma0);
                let sigma = sigma0 * (1.0 + tau * tau).sqrt();
                (sigma, x0 + p0 * t / constants.mass())
            }
        }
    }

    /// Unnormalized density value at a point. Isotropic Gaussians accept
    /// points of any dimension; the other models are one-dimensional.
    pub fn density_at(&self, x: &[f64], t: f64, constants: &PhysicalConstants) -> f64 {
        let (sigma, center) = self.profile(t, constants);
        let r_sq: f64 = x.iter().map(|&xi| (xi - center) * (xi - center)).sum();
        (-r_sq / (2.0 * sigma * sigma)).exp()
    }

    /// Samples the normalized density on `grid` at time `t`.
    pub fn density_on_grid(
        &self,
        grid: &Grid,
        t: f64,
        constants: &PhysicalConstants,
        rule: Quadrature,
    ) -> Result<DensityField> {
        self.check_parameters()?;
        if grid.dim() != 1 && !matches!(self, CatalogDensity::Gaussian { .. }) {
            return Err(SubquantumError::NotOneDimensional { context: "catalog density" });
        }
        DensityField::from_fn(grid.clone(), rule, |x| self.density_at(x, t, constants))
    }

    /// Exact Fisher information of the density at time `t` on a `dim`-
    /// dimensional grid: `dim / sigma(t)^2`.
    pub fn fisher_exact(&self, dim: usize, t: f64, constants: &PhysicalConstants) -> f64 {
        let (sigma, _) = self.profile(t, constants);
        dim as f64 / (sigma * sigma)
    }

    /// The wavefunction whose density this model describes at `t = 0`; used
    /// as the initial condition for evolution runs.
    pub fn initial_wavefunction(
        &self,
        grid: &Grid,
        constants: &PhysicalConstants,
        rule: Quadrature,
    ) -> Result<WaveFunction> {
        self.check_parameters()?;
        if grid.dim() != 1 {
            return Err(SubquantumError::NotOneDimensional { context: "initial wavefunction" });
        }
        let (sigma, center) = self.profile(0.0, constants);
        let momentum = match *self {
            CatalogDensity::FreePacket { p0, .. } => p0,
            _ => 0.0,
        };
        let inv_four_sigma_sq = 1.0 / (4.0 * sigma * sigma);
        let k = momentum / constants.hbar();
        let axis = grid.axis(0);
        let values = (0..axis.len())
            .map(|j| {
                let x = axis.coord(j);
                let envelope = (-(x - center) * (x - center) * inv_four_sigma_sq).exp();
                let phase = Complex64::new(0.0, k * x).exp();
                envelope * phase
            })
            .collect();
        WaveFunction::new(grid.clone(), values, rule)
    }
}
