use num_complex::Complex64;

use crate::error::{Result, SubquantumError};
use crate::grid::Grid;
use crate::quadrature::{integrate, Quadrature};

/// Real scalar samples on a [`Grid`], stored flat in the grid's row-major
/// order. Construction rejects non-finite values, so downstream numerics can
/// assume every sample is a normal (or zero) float.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SubquantumError::InvalidGrid {
                reason: format!(
                    "value buffer has {} entries for a grid of {} points",
                    values.len(),
                    grid.len()
                ),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(SubquantumError::NonFinite { context: "scalar field construction" });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut values = vec![0.0; grid.len()];
        grid.for_each_point(|flat, coords| values[flat] = f(coords));
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![value; n])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Applies `f` to every sample; the result is re-validated for finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Combines two fields sample-by-sample; the grids must match.
    pub fn zip_map(
        &self,
        other: &Self,
        context: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if self.grid != other.grid {
            return Err(SubquantumError::GridMismatch { context });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute sample among masked-in points (0 if none).
    pub fn max_abs_masked(&self, mask: &SupportMask) -> f64 {
        self.values
            .iter()
            .zip(mask.flags())
            .filter(|(_, &keep)| keep)
            .fold(0.0, |m, (v, _)| m.max(v.abs()))
    }
}

/// One real vector component per axis, each stored like a [`ScalarField`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(SubquantumError::InvalidGrid {
                reason: format!(
                    "{} components for a {}-dimensional grid",
                    components.len(),
                    grid.dim()
                ),
            });
        }
        for comp in &components {
            if comp.len() != grid.len() {
                return Err(SubquantumError::InvalidGrid {
                    reason: "component length does not match grid".into(),
                });
            }
            if !comp.iter().all(|v| v.is_finite()) {
                return Err(SubquantumError::NonFinite { context: "vector field construction" });
            }
        }
        Ok(Self { grid, components })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, d: usize) -> &[f64] {
        &self.components[d]
    }

    /// Squared Euclidean magnitude at flat index `i`.
    pub fn magnitude_sq(&self, i: usize) -> f64 {
        self.components.iter().map(|c| c[i] * c[i]).sum()
    }

    /// Largest per-point Euclidean magnitude among masked-in points.
    pub fn max_magnitude_masked(&self, mask: &SupportMask) -> f64 {
        let mut sup: f64 = 0.0;
        for (i, &keep) in mask.flags().iter().enumerate() {
            if keep {
                sup = sup.max(self.magnitude_sq(i));
            }
        }
        sup.sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.iter().map(|&v| f(v)).collect())
            .collect();
        Self::new(self.grid.clone(), components)
    }
}

/// Boolean support marker over a grid: `true` where a density is large enough
/// for logarithmic derivatives to be trustworthy.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportMask {
    grid: Grid,
    flags: Vec<bool>,
    active: usize,
}

impl SupportMask {
    pub fn new(grid: Grid, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != grid.len() {
            return Err(SubquantumError::InvalidGrid {
                reason: "mask length does not match grid".into(),
            });
        }
        let active = flags.iter().filter(|&&b| b).count();
        Ok(Self { grid, flags, active })
    }

    /// Marks points where `values >= floor_rel * max(values)`. Returns the
    /// mask together with the absolute floor it used.
    pub fn from_relative_floor(field: &ScalarField, floor_rel: f64) -> Result<(Self, f64)> {
        if !(floor_rel > 0.0 && floor_rel <= 1e-3) {
            return Err(SubquantumError::InvalidFloor { value: floor_rel });
        }
        let max = field.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        if !(max > 0.0) {
            return Err(SubquantumError::InvalidDensity {
                reason: "no positive values to anchor the support floor".into(),
            });
        }
        let floor_abs = floor_rel * max;
        let flags = field.values().iter().map(|&v| v >= floor_abs).collect();
        Ok((Self::new(field.grid().clone(), flags)?, floor_abs))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.flags[i]
    }

    pub fn active_count(&self) -> usize {
        self.active
    }

    /// Pointwise AND of two masks on the same grid.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(SubquantumError::GridMismatch { context: "mask intersection" });
        }
        let flags = self
            .flags
            .iter()
            .zip(&other.flags)
            .map(|(&a, &b)| a && b)
            .collect();
        Self::new(self.grid.clone(), flags)
    }

    /// Mask accepting every grid point.
    pub fn full(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, flags: vec![true; n], active: n }
    }
}

/// Relative size below which negative raw-density samples are treated as
/// quadrature noise and clamped to zero.
pub const NEGATIVE_CLAMP_REL: f64 = 1e-12;

/// Ratio of boundary to peak density above which a box is considered too
/// small for boundary-flux arguments to hold; reported, and escalated to an
/// error by checks that rely on vanishing boundary terms.
pub const BOUNDARY_TAIL_WARN_REL: f64 = 1e-10;

/// A nonnegative scalar field normalized to unit mass under a stated
/// quadrature rule. The wrapped field is only reachable immutably, so the
/// invariant survives construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    field: ScalarField,
}

impl DensityField {
    /// Normalizes a raw nonnegative field to unit mass.
    ///
    /// Slightly negative samples (down to `-NEGATIVE_CLAMP_REL * max`) are
    /// clamped to zero; anything more negative is rejected as data corruption
    /// rather than round-off.
    pub fn normalize(raw: &ScalarField, rule: Quadrature) -> Result<Self> {
        let max = raw.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        if !(max > 0.0) {
            return Err(SubquantumError::InvalidDensity {
                reason: "input has no positive values".into(),
            });
        }
        let clamp = NEGATIVE_CLAMP_REL * max;
        let mut values = Vec::with_capacity(raw.values().len());
        for &v in raw.values() {
            if v < 0.0 {
                if -v <= clamp {
                    values.push(0.0);
                } else {
                    return Err(SubquantumError::InvalidDensity {
                        reason: format!(
                            "negative sample {v:e} exceeds the round-off clamp {clamp:e}"
                        ),
                    });
                }
            } else {
                values.push(v);
            }
        }
        let clamped = ScalarField::new(raw.grid().clone(), values)?;
        let mass = integrate(&clamped, rule)?;
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(SubquantumError::InvalidDensity {
                reason: format!("total mass {mass} is not positive"),
            });
        }
        let field = clamped.map(|v| v / mass)?;
        Ok(Self { field })
    }

    /// Samples a nonnegative function and normalizes it.
    pub fn from_fn(grid: Grid, rule: Quadrature, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::normalize(&ScalarField::from_fn(grid, f)?, rule)
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn max_value(&self) -> f64 {
        self.field.values().iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Largest boundary sample divided by the global maximum; quantifies how
    /// much probability touches the edge of the box.
    pub fn boundary_fraction(&self) -> f64 {
        let grid = self.grid();
        let max = self.max_value();
        let mut edge: f64 = 0.0;
        for (i, &v) in self.values().iter().enumerate() {
            if grid.on_boundary(i) {
                edge = edge.max(v);
            }
        }
        edge / max
    }

    /// Verifies `|integral - 1| <= tol` under `rule`.
    pub fn check_mass(&self, rule: Quadrature, tol: f64) -> Result<()> {
        let mass = integrate(&self.field, rule)?;
        if (mass - 1.0).abs() <= tol {
            Ok(())
        } else {
            Err(SubquantumError::InvalidDensity {
                reason: format!("mass {mass} deviates from 1 by more than {tol:e}"),
            })
        }
    }
}

/// Complex wavefunction samples on a grid, normalized so that the quadrature
/// of |psi|^2 equals 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl WaveFunction {
    /// Builds and normalizes a wavefunction under `rule`.
    pub fn new(grid: Grid, values: Vec<Complex64>, rule: Quadrature) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SubquantumError::InvalidWaveFunction {
                reason: "value buffer length does not match grid".into(),
            });
        }
        if !values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(SubquantumError::NonFinite { context: "wavefunction construction" });
        }
        let norm_sq_field = ScalarField::new(
            grid.clone(),
            values.iter().map(|v| v.norm_sqr()).collect(),
        )?;
        let norm_sq = integrate(&norm_sq_field, rule)?;
        if !(norm_sq > 0.0 && norm_sq.is_finite()) {
            return Err(SubquantumError::InvalidWaveFunction {
                reason: format!("squared norm {norm_sq} is not positive"),
            });
        }
        let scale = norm_sq.sqrt().recip();
        let values = values.into_iter().map(|v| v * scale).collect();
        Ok(Self { grid, values })
    }

    /// Wraps already-normalized samples, verifying the norm to `tol`.
    pub fn from_normalized(
        grid: Grid,
        values: Vec<Complex64>,
        rule: Quadrature,
        tol: f64,
    ) -> Result<Self> {
        let wf = Self { grid, values };
        let norm_sq = wf.norm_sq(rule)?;
        if (norm_sq - 1.0).abs() > tol {
            return Err(SubquantumError::InvalidWaveFunction {
                reason: format!("squared norm {norm_sq} deviates from 1 by more than {tol:e}"),
            });
        }
        Ok(wf)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm_sq(&self, rule: Quadrature) -> Result<f64> {
        let f = ScalarField::new(
            self.grid.clone(),
            self.values.iter().map(|v| v.norm_sqr()).collect(),
        )?;
        integrate(&f, rule)
    }

    /// |psi|^2, renormalized to compensate round-off.
    pub fn density(&self, rule: Quadrature) -> Result<DensityField> {
        let raw = ScalarField::new(
            self.grid.clone(),
            self.values.iter().map(|v| v.norm_sqr()).collect(),
        )?;
        DensityField::normalize(&raw, rule)
    }
}

/// Amplitude R = sqrt(P) of a density.
pub fn amplitude_from_density(density: &DensityField) -> Result<ScalarField> {
    density.field().map(f64::sqrt)
}
