use crate::error::{Result, SubquantumError};

/// One axis of a uniform grid: `n` points including both endpoints, so the
/// spacing is `(hi - lo) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    lo: f64,
    hi: f64,
    n: usize,
    spacing: f64,
}

impl Axis {
    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn coord(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.lo + i as f64 * self.spacing
    }
}

/// Uniform tensor-product grid in 1 to 3 dimensions, endpoints included.
///
/// Values laid out on the grid use row-major order: the **last** axis is
/// contiguous, so the flat index of `(i0, i1, i2)` on shape `(n0, n1, n2)` is
/// `(i0 * n1 + i1) * n2 + i2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

pub const MIN_POINTS_PER_AXIS: usize = 8;

impl Grid {
    /// Builds a grid from per-axis bounds and point counts. The two slices
    /// must have equal length in `1..=3`, each axis needs `lo < hi` and at
    /// least [`MIN_POINTS_PER_AXIS`] points.
    pub fn new(bounds: &[(f64, f64)], points: &[usize]) -> Result<Self> {
        if bounds.len() != points.len() {
            return Err(SubquantumError::InvalidGrid {
                reason: format!(
                    "bounds ({}) and point counts ({}) differ in length",
                    bounds.len(),
                    points.len()
                ),
            });
        }
        if bounds.is_empty() || bounds.len() > 3 {
            return Err(SubquantumError::InvalidGrid {
                reason: format!("dimension {} outside 1..=3", bounds.len()),
            });
        }
        let mut axes = Vec::with_capacity(bounds.len());
        for (d, (&(lo, hi), &n)) in bounds.iter().zip(points).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SubquantumError::InvalidGrid {
                    reason: format!("axis {d}: bounds [{lo}, {hi}] must be finite with lo < hi"),
                });
            }
            if n < MIN_POINTS_PER_AXIS {
                return Err(SubquantumError::InvalidGrid {
                    reason: format!("axis {d}: {n} points < minimum {MIN_POINTS_PER_AXIS}"),
                });
            }
            let spacing = (hi - lo) / (n - 1) as f64;
            axes.push(Axis { lo, hi, n, spacing });
        }
        Ok(Self { axes })
    }

    /// Convenience constructor for a 1-d grid.
    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(&[(lo, hi)], &[n])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, d: usize) -> &Axis {
        &self.axes[d]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major stride of axis `d` (the last axis has stride 1).
    pub fn stride(&self, d: usize) -> usize {
        self.axes[d + 1..].iter().map(|a| a.n).product()
    }

    /// Axis index of `flat` along axis `d`.
    pub fn axis_index(&self, flat: usize, d: usize) -> usize {
        (flat / self.stride(d)) % self.axes[d].n
    }

    /// Writes the coordinates of the point with flat index `flat` into `out`
    /// (only the first `dim()` entries are touched).
    pub fn point(&self, flat: usize, out: &mut [f64; 3]) {
        let mut rest = flat;
        for d in (0..self.dim()).rev() {
            let n = self.axes[d].n;
            out[d] = self.axes[d].coord(rest % n);
            rest /= n;
        }
    }

    /// True when the point with flat index `flat` lies on the boundary of the
    /// box, i.e. sits at the first or last index of any axis.
    pub fn on_boundary(&self, flat: usize) -> bool {
        let mut rest = flat;
        for d in (0..self.dim()).rev() {
            let n = self.axes[d].n;
            let i = rest % n;
            if i == 0 || i == n - 1 {
                return true;
            }
            rest /= n;
        }
        false
    }

    /// Calls `f(flat, coords)` for every grid point in flat order.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[f64])) {
        let mut coords = [0.0_f64; 3];
        let dim = self.dim();
        for flat in 0..self.len() {
            self.point(flat, &mut coords);
            f(flat, &coords[..dim]);
        }
    }

    /// Short human-readable description, e.g. `[-20, 20] x 4096`.
    pub fn describe(&self) -> String {
        self.axes
            .iter()
            .map(|a| format!("[{}, {}] x {}", a.lo, a.hi, a.n))
            .collect::<Vec<_>>()
            .join(" * ")
    }
}
