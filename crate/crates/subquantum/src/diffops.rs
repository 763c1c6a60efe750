//! Finite-difference operators on uniform grids.
//!
//! Interior points use centered stencils; points within the stencil radius of
//! a box edge fall back to one-sided (or biased) rows of the **same formal
//! order**, so the order of accuracy is uniform across the box:
//!
//! * order 2: 3-point centered rows; 3-point (first derivative) and 4-point
//!   (second derivative) edge rows,
//! * order 4: 5-point centered rows; 5-point (first derivative) and 6-point
//!   (second derivative) edge/biased rows.
//!
//! Logarithmic derivatives of densities are computed by differentiating
//! `ln P` directly rather than forming `grad(P)/P`. The two are analytically
//! identical, but the log route has strictly smaller truncation error
//! whenever `ln P` is closer to polynomial than `P` is — in particular it is
//! exact (to round-off) on every Gaussian, whose log is a quadratic. All
//! density-derived quantities in this crate share that single evaluation
//! route, so algebraic relations between them survive discretization instead
//! of picking up spurious stencil noise.

use crate::error::{Result, SubquantumError};
use crate::field::{DensityField, ScalarField, SupportMask, VectorField};
use crate::grid::Grid;

/// Formal order of accuracy of the difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilScheme {
    Order2,
    Order4,
}

impl StencilScheme {
    pub fn order(self) -> usize {
        match self {
            StencilScheme::Order2 => 2,
            StencilScheme::Order4 => 4,
        }
    }

    /// Number of points at each end of an axis that use one-sided rows.
    pub fn radius(self) -> usize {
        match self {
            StencilScheme::Order2 => 1,
            StencilScheme::Order4 => 2,
        }
    }
}

/// One axis worth of difference rows, already scaled by `1/h^m`.
struct StencilRows {
    radius: usize,
    /// Centered row over offsets `-radius ..= radius`.
    interior: Vec<f64>,
    /// `left[i]` applies at axis index `i < radius`; weights cover the first
    /// `left[i].len()` points of the line.
    left: Vec<Vec<f64>>,
    /// `right[k]` applies at axis index `n - 1 - k`; weights cover the last
    /// `right[k].len()` points of the line.
    right: Vec<Vec<f64>>,
}

impl StencilRows {
    fn scaled(raw_interior: &[f64], raw_left: &[&[f64]], h: f64, m: u32, odd: bool) -> Self {
        let scale = h.powi(m as i32).recip();
        let interior: Vec<f64> = raw_interior.iter().map(|w| w * scale).collect();
        let left: Vec<Vec<f64>> = raw_left
            .iter()
            .map(|row| row.iter().map(|w| w * scale).collect())
            .collect();
        // Mirror image: reverse the row; odd derivatives also flip sign.
        let right: Vec<Vec<f64>> = raw_left
            .iter()
            .map(|row| {
                row.iter()
                    .rev()
                    .map(|w| if odd { -w * scale } else { w * scale })
                    .collect()
            })
            .collect();
        Self { radius: (raw_interior.len() - 1) / 2, interior, left, right }
    }

    fn first_derivative(scheme: StencilScheme, h: f64) -> Self {
        match scheme {
            StencilScheme::Order2 => Self::scaled(
                &[-0.5, 0.0, 0.5],
                &[&[-1.5, 2.0, -0.5]],
                h,
                1,
                true,
            ),
            StencilScheme::Order4 => Self::scaled(
                &[1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
                &[
                    &[-25.0 / 12.0, 48.0 / 12.0, -36.0 / 12.0, 16.0 / 12.0, -3.0 / 12.0],
                    &[-3.0 / 12.0, -10.0 / 12.0, 18.0 / 12.0, -6.0 / 12.0, 1.0 / 12.0],
                ],
                h,
                1,
                true,
            ),
        }
    }

    fn second_derivative(scheme: StencilScheme, h: f64) -> Self {
        match scheme {
            StencilScheme::Order2 => Self::scaled(
                &[1.0, -2.0, 1.0],
                &[&[2.0, -5.0, 4.0, -1.0]],
                h,
                2,
                false,
            ),
            StencilScheme::Order4 => Self::scaled(
                &[-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
                &[
                    &[
                        45.0 / 12.0,
                        -154.0 / 12.0,
                        214.0 / 12.0,
                        -156.0 / 12.0,
                        61.0 / 12.0,
                        -10.0 / 12.0,
                    ],
                    &[
                        10.0 / 12.0,
                        -15.0 / 12.0,
                        -4.0 / 12.0,
                        14.0 / 12.0,
                        -6.0 / 12.0,
                        1.0 / 12.0,
                    ],
                ],
                h,
                2,
                false,
            ),
        }
    }
}

/// Applies `rows` along axis `d` of `values` laid out on `grid`.
fn apply_along_axis(grid: &Grid, values: &[f64], d: usize, rows: &StencilRows) -> Vec<f64> {
    let n = grid.axis(d).len();
    let stride = grid.stride(d);
    let radius = rows.radius;
    let mut out = vec![0.0; values.len()];
    for (flat, slot) in out.iter_mut().enumerate() {
        let i = grid.axis_index(flat, d);
        let line_start = flat - i * stride;
        let acc: f64 = if i < radius {
            rows.left[i]
                .iter()
                .enumerate()
                .map(|(j, w)| w * values[line_start + j * stride])
                .sum()
        } else if i >= n - radius {
            let k = n - 1 - i;
            let row = &rows.right[k];
            let base = n - row.len();
            row.iter()
                .enumerate()
                .map(|(j, w)| w * values[line_start + (base + j) * stride])
                .sum()
        } else {
            rows.interior
                .iter()
                .enumerate()
                .map(|(j, w)| w * values[line_start + (i - radius + j) * stride])
                .sum()
        };
        *slot = acc;
    }
    out
}

/// Per-axis first derivatives of `f`.
pub fn gradient(f: &ScalarField, scheme: StencilScheme) -> Result<VectorField> {
    let grid = f.grid();
    let mut components = Vec::with_capacity(grid.dim());
    for d in 0..grid.dim() {
        let rows = StencilRows::first_derivative(scheme, grid.axis(d).spacing());
        components.push(apply_along_axis(grid, f.values(), d, &rows));
    }
    VectorField::new(grid.clone(), components)
}

/// Sum of per-axis second derivatives of `f`.
pub fn laplacian(f: &ScalarField, scheme: StencilScheme) -> Result<ScalarField> {
    let grid = f.grid();
    let mut total = vec![0.0; grid.len()];
    for d in 0..grid.dim() {
        let rows = StencilRows::second_derivative(scheme, grid.axis(d).spacing());
        let part = apply_along_axis(grid, f.values(), d, &rows);
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    ScalarField::new(grid.clone(), total)
}

/// Centered time derivative from three snapshots at `t - dt`, `t`, `t + dt`.
/// The middle snapshot fixes the common grid but does not enter the value.
pub fn time_derivative(
    prev: &ScalarField,
    mid: &ScalarField,
    next: &ScalarField,
    dt: f64,
) -> Result<ScalarField> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SubquantumError::InvalidTimeStep { value: dt });
    }
    if prev.grid() != mid.grid() || next.grid() != mid.grid() {
        return Err(SubquantumError::GridMismatch { context: "time derivative" });
    }
    let half = 0.5 / dt;
    next.zip_map(prev, "time derivative", |n, p| (n - p) * half)
}

/// `ln(v)` guarded against zeros: exact wherever `v > 0`, and the log of the
/// smallest positive double where `v == 0`, so stencils that graze a clamped
/// point stay finite.
pub fn safe_ln(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::MIN_POSITIVE.ln()
    }
}

/// First and second logarithmic derivatives of a density, plus the support
/// mask on which they are trustworthy.
pub struct LogDerivatives {
    /// grad(ln P), unmasked raw samples.
    pub grad_log: VectorField,
    /// lap(ln P), unmasked raw samples.
    pub lap_log: ScalarField,
    pub mask: SupportMask,
    pub floor_abs: f64,
}

/// Differentiates `ln P` with the given scheme. The mask marks points with
/// `P >= floor_rel * max(P)`; derivative samples exist everywhere (via
/// [`safe_ln`]) but are only accurate on the mask.
pub fn log_derivatives(
    p: &DensityField,
    scheme: StencilScheme,
    floor_rel: f64,
) -> Result<LogDerivatives> {
    let (mask, floor_abs) = SupportMask::from_relative_floor(p.field(), floor_rel)?;
    let ln_p = p.field().map(safe_ln)?;
    Ok(LogDerivatives {
        grad_log: gradient(&ln_p, scheme)?,
        lap_log: laplacian(&ln_p, scheme)?,
        mask,
        floor_abs,
    })
}

/// Logarithmic density gradient `grad(P)/P = grad(ln P)`, zeroed off-mask.
pub struct ScoreField {
    pub score: VectorField,
    pub mask: SupportMask,
}

/// Computes the score of a density. `floor_rel` must lie in `(0, 1e-3]`;
/// points below the relative floor report a zero score and are excluded from
/// downstream integrals (callers account for the lost mass separately).
pub fn log_density_score(
    p: &DensityField,
    scheme: StencilScheme,
    floor_rel: f64,
) -> Result<ScoreField> {
    let logs = log_derivatives(p, scheme, floor_rel)?;
    let score = mask_vector(&logs.grad_log, &logs.mask)?;
    Ok(ScoreField { score, mask: logs.mask })
}

/// Zeroes the components of `v` outside `mask`.
pub fn mask_vector(v: &VectorField, mask: &SupportMask) -> Result<VectorField> {
    if v.grid() != mask.grid() {
        return Err(SubquantumError::GridMismatch { context: "vector masking" });
    }
    let components = (0..v.dim())
        .map(|d| {
            v.component(d)
                .iter()
                .zip(mask.flags())
                .map(|(&x, &keep)| if keep { x } else { 0.0 })
                .collect()
        })
        .collect();
    VectorField::new(v.grid().clone(), components)
}

/// Zeroes the samples of `f` outside `mask`.
pub fn mask_scalar(f: &ScalarField, mask: &SupportMask) -> Result<ScalarField> {
    if f.grid() != mask.grid() {
        return Err(SubquantumError::GridMismatch { context: "scalar masking" });
    }
    let values = f
        .values()
        .iter()
        .zip(mask.flags())
        .map(|(&x, &keep)| if keep { x } else { 0.0 })
        .collect();
    ScalarField::new(f.grid().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Quadrature;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Every stencil row must reproduce the derivative of monomials exactly
    /// up to its design degree: sum_j w_j (node_j - anchor)^k = m! * [k == m].
    #[test]
    fn all_rows_differentiate_monomials_exactly() {
        struct Case {
            rows: StencilRows,
            m: usize,
            degree: usize,
        }
        let cases = [
            Case { rows: StencilRows::first_derivative(StencilScheme::Order2, 1.0), m: 1, degree: 2 },
            Case { rows: StencilRows::second_derivative(StencilScheme::Order2, 1.0), m: 2, degree: 3 },
            Case { rows: StencilRows::first_derivative(StencilScheme::Order4, 1.0), m: 1, degree: 4 },
            Case { rows: StencilRows::second_derivative(StencilScheme::Order4, 1.0), m: 2, degree: 5 },
        ];
        let factorial = |m: usize| (1..=m).product::<usize>() as f64;
        for case in &cases {
            let radius = case.rows.radius;
            // (anchor offset, weights over nodes 0..len)
            let mut rows: Vec<(f64, &[f64])> = Vec::new();
            rows.push((radius as f64, &case.rows.interior));
            for (i, row) in case.rows.left.iter().enumerate() {
                rows.push((i as f64, row));
            }
            for (k, row) in case.rows.right.iter().enumerate() {
                rows.push(((row.len() - 1 - k) as f64, row));
            }
            for (anchor, weights) in rows {
                // centered interior rows only promise exactness through
                // degree (len - 1); symmetric rows gain one more for free,
                // which is covered by degree <= len - 1 here anyway.
                for k in 0..=case.degree.min(weights.len() - 1) {
                    let moment: f64 = weights
                        .iter()
                        .enumerate()
                        .map(|(j, w)| w * (j as f64 - anchor).powi(k as i32))
                        .sum();
                    let expect = if k == case.m { factorial(case.m) } else { 0.0 };
                    assert!(
                        (moment - expect).abs() < 1e-12,
                        "m={} k={} anchor={} moment={}",
                        case.m,
                        k,
                        anchor,
                        moment
                    );
                }
            }
        }
    }

    #[test]
    fn quadratics_differentiate_exactly_everywhere_including_edges() {
        let g = Grid::line(-2.0, 3.0, 41).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| 3.0 * x[0] * x[0] + 2.0 * x[0] + 1.0).unwrap();
        for scheme in [StencilScheme::Order2, StencilScheme::Order4] {
            let grad = gradient(&f, scheme).unwrap();
            let lap = laplacian(&f, scheme).unwrap();
            g.for_each_point(|i, x| {
                assert_relative_eq!(
                    grad.component(0)[i],
                    6.0 * x[0] + 2.0,
                    max_relative = 1e-12,
                    epsilon = 1e-11
                );
                assert_relative_eq!(lap.values()[i], 6.0, max_relative = 1e-12);
            });
        }
    }

    #[test]
    fn sine_gradient_interior_error_is_within_the_taylor_bound() {
        // h = 0.01 exactly: [0, 6.28] with 629 points.
        let g = Grid::line(0.0, 6.28, 629).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| x[0].sin()).unwrap();
        let grad = gradient(&f, StencilScheme::Order2).unwrap();
        let h = g.axis(0).spacing();
        let mut max_err: f64 = 0.0;
        g.for_each_point(|i, x| {
            if i >= 1 && i < g.len() - 1 {
                max_err = max_err.max((grad.component(0)[i] - x[0].cos()).abs());
            }
        });
        let bound = h * h / 6.0;
        assert!(max_err <= bound * (1.0 + 1e-9) + 1e-13, "{max_err} > {bound}");
        assert!(max_err > 0.5 * bound, "error suspiciously small: {max_err}");
    }

    #[test]
    fn halving_h_scales_errors_by_the_formal_order() {
        // max interior errors for f = exp(sin x) at two resolutions
        let errors = |scheme: StencilScheme, n: usize| -> (f64, f64) {
            let g = Grid::line(0.0, 2.0 * PI, n).unwrap();
            let f = ScalarField::from_fn(g.clone(), |x| x[0].sin().exp()).unwrap();
            let grad = gradient(&f, scheme).unwrap();
            let lap = laplacian(&f, scheme).unwrap();
            let r = scheme.radius();
            let mut eg: f64 = 0.0;
            let mut el: f64 = 0.0;
            g.for_each_point(|i, x| {
                if i >= r && i < g.len() - r {
                    let (s, c) = x[0].sin_cos();
                    let e = s.exp();
                    eg = eg.max((grad.component(0)[i] - c * e).abs());
                    el = el.max((lap.values()[i] - (c * c - s) * e).abs());
                }
            });
            (eg, el)
        };
        let (g1, l1) = errors(StencilScheme::Order2, 201);
        let (g2, l2) = errors(StencilScheme::Order2, 401);
        assert!((3.5..=4.5).contains(&(g1 / g2)), "order-2 gradient ratio {}", g1 / g2);
        assert!((3.5..=4.5).contains(&(l1 / l2)), "order-2 laplacian ratio {}", l1 / l2);
        let (g1, l1) = errors(StencilScheme::Order4, 201);
        let (g2, l2) = errors(StencilScheme::Order4, 401);
        assert!((14.0..=18.0).contains(&(g1 / g2)), "order-4 gradient ratio {}", g1 / g2);
        assert!((14.0..=18.0).contains(&(l1 / l2)), "order-4 laplacian ratio {}", l1 / l2);
    }

    #[test]
    fn gaussian_score_is_exact_to_round_off() {
        // ln P is quadratic, so the log-route score has no truncation error.
        let g = Grid::line(-20.0, 20.0, 4096).unwrap();
        for sigma in [0.5_f64, 1.0, 2.0] {
            let p = DensityField::from_fn(g.clone(), Quadrature::Trapezoid, |x| {
                (-x[0] * x[0] / (2.0 * sigma * sigma)).exp()
            })
            .unwrap();
            let sf = log_density_score(&p, StencilScheme::Order2, 1e-12).unwrap();
            let s2 = sigma * sigma;
            g.for_each_point(|i, x| {
                if sf.mask.is_active(i) {
                    let expect = -x[0] / s2;
                    assert!(
                        (sf.score.component(0)[i] - expect).abs() <= 1e-9 * (1.0 + expect.abs()),
                        "sigma={} x={} got={} want={}",
                        sigma,
                        x[0],
                        sf.score.component(0)[i],
                        expect
                    );
                } else {
                    assert_eq!(sf.score.component(0)[i], 0.0);
                }
            });
        }
    }

    #[test]
    fn gaussian_score_mask_excludes_negligible_mass() {
        let g = Grid::line(-20.0, 20.0, 4096).unwrap();
        let p = DensityField::from_fn(g.clone(), Quadrature::Trapezoid, |x| {
            (-x[0] * x[0] / 2.0).exp()
        })
        .unwrap();
        let sf = log_density_score(&p, StencilScheme::Order2, 1e-12).unwrap();
        let lost = crate::quadrature::excluded_mass(&p, &sf.mask, Quadrature::Trapezoid).unwrap();
        assert!(lost < 1e-10, "excluded mass {lost}");
    }

    #[test]
    fn two_dimensional_gradient_and_laplacian_on_a_quadratic() {
        let g = Grid::new(&[(-1.0, 1.0), (0.0, 2.0)], &[17, 23]).unwrap();
        let f =
            ScalarField::from_fn(g.clone(), |x| x[0] * x[0] + x[0] * x[1] - 2.0 * x[1] * x[1])
                .unwrap();
        let grad = gradient(&f, StencilScheme::Order2).unwrap();
        let lap = laplacian(&f, StencilScheme::Order2).unwrap();
        g.for_each_point(|i, x| {
            assert_relative_eq!(
                grad.component(0)[i],
                2.0 * x[0] + x[1],
                max_relative = 1e-11,
                epsilon = 1e-11
            );
            assert_relative_eq!(
                grad.component(1)[i],
                x[0] - 4.0 * x[1],
                max_relative = 1e-11,
                epsilon = 1e-11
            );
            assert_relative_eq!(lap.values()[i], 2.0 - 4.0, max_relative = 1e-11);
        });
    }

    #[test]
    fn centered_time_derivative_matches_the_analytic_rate() {
        let g = Grid::line(-5.0, 5.0, 128).unwrap();
        let shape = |x: &[f64]| (-x[0] * x[0] / 3.0).exp();
        let dt = 1e-3;
        let t = 0.5;
        let frame = |tt: f64| {
            ScalarField::from_fn(g.clone(), |x| tt.cos() * shape(x)).unwrap()
        };
        let (prev, mid, next) = (frame(t - dt), frame(t), frame(t + dt));
        let dot = time_derivative(&prev, &mid, &next, dt).unwrap();
        let mut max_err: f64 = 0.0;
        let mut max_g: f64 = 0.0;
        g.for_each_point(|i, x| {
            max_err = max_err.max((dot.values()[i] + t.sin() * shape(x)).abs());
            max_g = max_g.max(shape(x).abs());
        });
        assert!(max_err <= 1e-7 * max_g, "{max_err} vs {max_g}");
        assert!(time_derivative(&prev, &mid, &next, 0.0).is_err());
        assert!(time_derivative(&prev, &mid, &next, f64::NAN).is_err());
    }
}
