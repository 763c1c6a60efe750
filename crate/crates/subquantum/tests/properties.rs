//! Randomized invariants: algebraic properties that must hold for whole
//! families of inputs, not just the frozen reference cases.

use proptest::prelude::*;
use subquantum::{
    density_from_heat, fisher_from_heat, fisher_information, heat_from_density, integrate,
    CatalogDensity, DensityField, Gauge, Grid, Numerics, PhysicalConstants, Quadrature,
    ScalarField, WaveFunction,
};

fn natural() -> PhysicalConstants {
    PhysicalConstants::natural()
}

fn gaussian_on(grid: &Grid, sigma: f64, x0: f64) -> DensityField {
    let model = CatalogDensity::Gaussian { sigma, x0 };
    model
        .density_on_grid(grid, 0.0, &natural(), Quadrature::Trapezoid)
        .expect("gaussian density")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Quadrature is linear: `integral(a f + b g) = a integral(f) + b integral(g)`.
    #[test]
    fn quadrature_is_linear(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        seed_f in 0.1f64..2.0,
        seed_g in 0.1f64..2.0,
    ) {
        let grid = Grid::line(-5.0, 5.0, 257).unwrap();
        let f = ScalarField::from_fn(grid.clone(), |x| (seed_f * x[0]).sin()).unwrap();
        let g = ScalarField::from_fn(grid.clone(), |x| (-seed_g * x[0] * x[0]).exp()).unwrap();
        let combo = ScalarField::from_fn(grid.clone(), |x| {
            a * (seed_f * x[0]).sin() + b * (-seed_g * x[0] * x[0]).exp()
        })
        .unwrap();
        for rule in [Quadrature::Trapezoid, Quadrature::Simpson] {
            let lhs = integrate(&combo, rule).unwrap();
            let rhs = a * integrate(&f, rule).unwrap() + b * integrate(&g, rule).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    /// A global phase on the wavefunction leaves the density unchanged.
    #[test]
    fn global_phase_leaves_density_invariant(
        theta in 0.0f64..std::f64::consts::TAU,
        sigma in 0.5f64..2.0,
    ) {
        let grid = Grid::line(-10.0, 10.0, 513).unwrap();
        let values: Vec<num_complex::Complex64> = (0..grid.len())
            .map(|j| {
                let x = grid.axis(0).coord(j);
                num_complex::Complex64::new((-x * x / (4.0 * sigma * sigma)).exp(), 0.0)
            })
            .collect();
        let rotated: Vec<num_complex::Complex64> = values
            .iter()
            .map(|v| v * num_complex::Complex64::new(0.0, theta).exp())
            .collect();
        let psi = WaveFunction::new(grid.clone(), values, Quadrature::Trapezoid).unwrap();
        let psi_rot = WaveFunction::new(grid, rotated, Quadrature::Trapezoid).unwrap();
        let p = psi.density(Quadrature::Trapezoid).unwrap();
        let p_rot = psi_rot.density(Quadrature::Trapezoid).unwrap();
        for (u, v) in p.values().iter().zip(p_rot.values()) {
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
        }
    }

    /// Normalization is idempotent: renormalizing a normalized density is a
    /// no-op to round-off.
    #[test]
    fn normalization_is_idempotent(sigma in 0.4f64..2.5, x0 in -2.0f64..2.0) {
        let grid = Grid::line(-15.0, 15.0, 512).unwrap();
        let p = gaussian_on(&grid, sigma, x0);
        let again =
            DensityField::normalize(p.field(), Quadrature::Trapezoid).unwrap();
        for (u, v) in p.values().iter().zip(again.values()) {
            prop_assert!((u - v).abs() <= 1e-14 * (1.0 + u.abs()));
        }
    }

    /// Density -> heat map -> density is the identity on the support mask,
    /// in either gauge.
    #[test]
    fn heat_round_trip_restores_the_density(
        sigma in 0.4f64..2.5,
        x0 in -2.0f64..2.0,
        gauge_pick in 0usize..2,
    ) {
        let gauge = [Gauge::ZeroC, Gauge::MinZero][gauge_pick];
        let grid = Grid::line(-18.0, 18.0, 512).unwrap();
        let p = gaussian_on(&grid, sigma, x0);
        let numerics = Numerics::default();
        let heat = heat_from_density(&p, &natural(), numerics, gauge).unwrap();
        let back = density_from_heat(&heat, numerics.quadrature).unwrap();
        for i in 0..grid.len() {
            if heat.mask().is_active(i) {
                let u = p.values()[i];
                let v = back.density.values()[i];
                prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
            }
        }
    }

    /// Fisher information obeys the scale law `F(sigma) = 1 / sigma^2` for
    /// Gaussians, with the box widened in proportion so truncation never
    /// bites.
    #[test]
    fn fisher_tracks_the_inverse_square_width(sigma in 0.3f64..3.0) {
        let half_width = 16.0 * sigma;
        let grid = Grid::line(-half_width, half_width, 2049).unwrap();
        let p = gaussian_on(&grid, sigma, 0.0);
        let fisher = fisher_information(&p, Numerics::default()).unwrap();
        let exact = 1.0 / (sigma * sigma);
        prop_assert!(
            (fisher.value - exact).abs() <= 1e-6 * exact,
            "F = {}, expected {}", fisher.value, exact
        );
    }

    /// The heat-route Fisher integral does not depend on the gauge constant.
    #[test]
    fn heat_route_fisher_is_gauge_invariant(sigma in 0.4f64..2.5, x0 in -2.0f64..2.0) {
        let grid = Grid::line(-18.0, 18.0, 1025).unwrap();
        let p = gaussian_on(&grid, sigma, x0);
        let numerics = Numerics::default();
        let f_zero = fisher_from_heat(
            &heat_from_density(&p, &natural(), numerics, Gauge::ZeroC).unwrap(),
            numerics,
        )
        .unwrap();
        let f_min = fisher_from_heat(
            &heat_from_density(&p, &natural(), numerics, Gauge::MinZero).unwrap(),
            numerics,
        )
        .unwrap();
        prop_assert!(
            (f_zero.value - f_min.value).abs() <= 1e-12 * (1.0 + f_zero.value.abs())
        );
    }
}
