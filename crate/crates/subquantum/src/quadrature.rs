//! Tensor-product quadrature over uniform grids.
//!
//! Both rules are separable: the weight of a grid point is the product of
//! per-axis coefficients times a global scale (`prod(h_d)` for the trapezoid
//! rule, `prod(h_d / 3)` for Simpson's rule). Keeping the coefficients as
//! small exact floats (0.5, 1, 2, 4) and applying the scale once at the end
//! avoids needless rounding; a constant field over `[0, 1]` integrates to
//! exactly 1.0.
//!
//! All reductions use pairwise summation, which keeps the error near
//! `O(eps * log n)` and — being a fixed tree independent of threading or
//! chunking — makes every integral bit-reproducible run to run.

use crate::error::{Result, SubquantumError};
use crate::field::{DensityField, ScalarField, SupportMask};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Composite trapezoid rule. Second order on generic integrands, but
    /// spectrally accurate for smooth integrands that decay below round-off
    /// before the box edge (all tails in the analytic catalog).
    Trapezoid,
    /// Composite Simpson rule; needs an odd point count per axis and is exact
    /// on cubics.
    Simpson,
}

impl Quadrature {
    /// Per-axis coefficient pattern and the per-axis scale factor.
    fn axis_coefficients(self, axis: usize, n: usize, spacing: f64) -> Result<(Vec<f64>, f64)> {
        match self {
            Quadrature::Trapezoid => {
                let mut c = vec![1.0; n];
                c[0] = 0.5;
                c[n - 1] = 0.5;
                Ok((c, spacing))
            }
            Quadrature::Simpson => {
                if n % 2 == 0 {
                    return Err(SubquantumError::SimpsonEvenPoints { axis, n });
                }
                let mut c = vec![0.0; n];
                c[0] = 1.0;
                c[n - 1] = 1.0;
                for (i, ci) in c.iter_mut().enumerate().take(n - 1).skip(1) {
                    *ci = if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                Ok((c, spacing / 3.0))
            }
        }
    }
}

/// Pairwise (cascade) summation. Deterministic for a given slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const SEQUENTIAL_CUTOFF: usize = 32;
    if values.len() <= SEQUENTIAL_CUTOFF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Per-point quadrature coefficients (scale excluded) and the global scale.
struct Weights {
    axis_coeffs: Vec<Vec<f64>>,
    scale: f64,
}

impl Weights {
    fn build(grid: &Grid, rule: Quadrature) -> Result<Self> {
        let mut axis_coeffs = Vec::with_capacity(grid.dim());
        let mut scale = 1.0;
        for d in 0..grid.dim() {
            let axis = grid.axis(d);
            let (c, s) = rule.axis_coefficients(d, axis.len(), axis.spacing())?;
            axis_coeffs.push(c);
            scale *= s;
        }
        Ok(Self { axis_coeffs, scale })
    }

    fn coefficient(&self, grid: &Grid, flat: usize) -> f64 {
        let mut c = 1.0;
        let mut rest = flat;
        for d in (0..grid.dim()).rev() {
            let n = self.axis_coeffs[d].len();
            c *= self.axis_coeffs[d][rest % n];
            rest /= n;
        }
        c
    }
}

fn weighted_reduce(
    grid: &Grid,
    rule: Quadrature,
    term: impl Fn(usize) -> Option<f64>,
) -> Result<f64> {
    let weights = Weights::build(grid, rule)?;
    let mut terms = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        if let Some(v) = term(flat) {
            terms.push(weights.coefficient(grid, flat) * v);
        }
    }
    Ok(weights.scale * pairwise_sum(&terms))
}

/// Integral of `f` over the whole box.
pub fn integrate(f: &ScalarField, rule: Quadrature) -> Result<f64> {
    let values = f.values();
    weighted_reduce(f.grid(), rule, |i| Some(values[i]))
}

/// Integral of `f` restricted to masked-in points. Off-mask points simply do
/// not contribute; the surviving points keep their full-box weights.
pub fn integrate_masked(f: &ScalarField, mask: &SupportMask, rule: Quadrature) -> Result<f64> {
    if f.grid() != mask.grid() {
        return Err(SubquantumError::GridMismatch { context: "masked integration" });
    }
    let values = f.values();
    weighted_reduce(f.grid(), rule, |i| mask.is_active(i).then(|| values[i]))
}

/// Integral of an arbitrary per-point expression restricted to the mask.
pub fn integrate_masked_fn(
    grid: &Grid,
    mask: &SupportMask,
    rule: Quadrature,
    term: impl Fn(usize) -> f64,
) -> Result<f64> {
    if grid != mask.grid() {
        return Err(SubquantumError::GridMismatch { context: "masked integration" });
    }
    weighted_reduce(grid, rule, |i| mask.is_active(i).then(|| term(i)))
}

/// Probability mass of `p` sitting on masked-out points.
pub fn excluded_mass(p: &DensityField, mask: &SupportMask, rule: Quadrature) -> Result<f64> {
    if p.grid() != mask.grid() {
        return Err(SubquantumError::GridMismatch { context: "excluded mass" });
    }
    let values = p.values();
    let m = weighted_reduce(p.grid(), rule, |i| (!mask.is_active(i)).then(|| values[i]))?;
    // Clamp round-off: the excluded mass is a probability.
    Ok(m.clamp(0.0, 1.0))
}

/// L2 norm sqrt(integral of f^2) over masked-in points.
pub fn l2_norm_masked(f: &ScalarField, mask: &SupportMask, rule: Quadrature) -> Result<f64> {
    let values = f.values();
    let sq = weighted_reduce(f.grid(), rule, |i| {
        mask.is_active(i).then(|| values[i] * values[i])
    })?;
    Ok(sq.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn trapezoid_integrates_a_constant_exactly() {
        let g = Grid::line(0.0, 1.0, 101).unwrap();
        let f = ScalarField::constant(g, 1.0).unwrap();
        assert_eq!(integrate(&f, Quadrature::Trapezoid).unwrap(), 1.0);
    }

    #[test]
    fn odd_integrand_cancels_to_round_off() {
        let g = Grid::line(-1.0, 1.0, 1001).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0]).unwrap();
        assert!(integrate(&f, Quadrature::Trapezoid).unwrap().abs() <= 1e-13);
    }

    #[test]
    fn gaussian_mass_is_spectrally_accurate() {
        let g = Grid::line(-20.0, 20.0, 4096).unwrap();
        let f = ScalarField::from_fn(g, |x| (-x[0] * x[0] / 2.0).exp() / (2.0 * PI).sqrt())
            .unwrap();
        let m = integrate(&f, Quadrature::Trapezoid).unwrap();
        assert!((m - 1.0).abs() <= 1e-12, "mass deviates: {}", m - 1.0);
    }

    #[test]
    fn simpson_is_exact_on_cubics_and_rejects_even_counts() {
        let g = Grid::line(0.0, 2.0, 201).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| {
            3.0 * x[0] * x[0] * x[0] - x[0] * x[0] + 2.0 * x[0] - 5.0
        })
        .unwrap();
        // antiderivative: (3/4)x^4 - x^3/3 + x^2 - 5x on [0, 2]
        let exact = 0.75 * 16.0 - 8.0 / 3.0 + 4.0 - 10.0;
        assert_relative_eq!(
            integrate(&f, Quadrature::Simpson).unwrap(),
            exact,
            max_relative = 1e-14
        );
        let even = Grid::line(0.0, 2.0, 200).unwrap();
        let f = ScalarField::constant(even, 1.0).unwrap();
        assert!(matches!(
            integrate(&f, Quadrature::Simpson),
            Err(SubquantumError::SimpsonEvenPoints { .. })
        ));
    }

    #[test]
    fn two_dimensional_product_gaussian_has_unit_mass() {
        let g = Grid::new(&[(-10.0, 10.0), (-10.0, 10.0)], &[257, 257]).unwrap();
        let f = ScalarField::from_fn(g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (-r2 / 2.0).exp() / (2.0 * PI)
        })
        .unwrap();
        for rule in [Quadrature::Trapezoid, Quadrature::Simpson] {
            assert_relative_eq!(integrate(&f, rule).unwrap(), 1.0, max_relative = 1e-11);
        }
    }

    #[test]
    fn masked_integral_plus_excluded_mass_recovers_unity() {
        let g = Grid::line(-20.0, 20.0, 2048).unwrap();
        let p = DensityField::from_fn(g, Quadrature::Trapezoid, |x| {
            (-x[0] * x[0] / 2.0).exp()
        })
        .unwrap();
        let (mask, _) = SupportMask::from_relative_floor(p.field(), 1e-12).unwrap();
        let inside = integrate_masked(p.field(), &mask, Quadrature::Trapezoid).unwrap();
        let outside = excluded_mass(&p, &mask, Quadrature::Trapezoid).unwrap();
        assert_relative_eq!(inside + outside, 1.0, max_relative = 1e-12);
        // Gaussian tails below a 1e-12 relative floor hold almost no mass.
        assert!(outside < 1e-10);
    }

    #[test]
    fn pairwise_sum_matches_exact_arithmetic_on_integers() {
        let values: Vec<f64> = (1..=10_000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&values), 50_005_000.0);
    }
}
