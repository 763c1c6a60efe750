//! Acceptance suite: ten numbered criteria, one test each, every test
//! printing a single `ACCEPTANCE n: PASS|FAIL` line before asserting.
//!
//! The standard setup is natural constants, a one-dimensional box
//! `[-20, 20]` with 4096 points, order-2 stencils, trapezoid quadrature,
//! relative support floor `1e-12`, and the fixed-zero gauge.
//!
//! Criterion 9 is expected-red: it demands a fitted convergence order near
//! two for residuals that this implementation leaves at round-off on
//! Gaussian inputs, so there is no h-dependent error to converge. The test
//! states the demand faithfully and fails honestly; the companion test
//! below it shows the same machinery finding genuine second-order behavior
//! the moment the log-density stops being quadratic. See the README's
//! "Convergence-order caveat" section.

use std::process::Command;

use subquantum::{
    check_gradient_relation, convergence_study, evolve, fisher_from_heat, fisher_information,
    heat_flow_residual, heat_from_density, mean_quantum_potential,
    quantum_potential_amplitude_form, quantum_potential_density_form, thermal_fisher_value,
    CatalogDensity, DensityField, DensitySnapshot, EvolutionParams, Gauge, Grid, Numerics,
    PhysicalConstants, Potential, Quadrature, RelationId, Side,
};

const GAUGE: Gauge = Gauge::ZeroC;

fn natural() -> PhysicalConstants {
    PhysicalConstants::natural()
}

fn numerics() -> Numerics {
    Numerics::default()
}

fn standard_grid() -> Grid {
    Grid::line(-20.0, 20.0, 4096).unwrap()
}

fn density(model: &CatalogDensity, grid: &Grid, t: f64) -> DensityField {
    model
        .density_on_grid(grid, t, &natural(), Quadrature::Trapezoid)
        .expect("catalog density")
}

/// Prints the one-line verdict for a criterion, then returns `pass` so the
/// caller can assert on it.
fn verdict(criterion: usize, pass: bool, detail: &str) -> bool {
    let word = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion:>2}: {word} — {detail}");
    pass
}

/// The analytic densities exercised by the whole-catalog criteria, each at
/// a representative instant.
fn catalog_cases() -> Vec<(&'static str, CatalogDensity, f64)> {
    vec![
        ("gaussian sigma=0.5", CatalogDensity::Gaussian { sigma: 0.5, x0: 0.0 }, 0.0),
        ("gaussian sigma=1", CatalogDensity::Gaussian { sigma: 1.0, x0: 0.0 }, 0.0),
        ("gaussian sigma=2", CatalogDensity::Gaussian { sigma: 2.0, x0: 0.0 }, 0.0),
        ("ho_ground", CatalogDensity::HarmonicGround, 0.0),
        (
            "ho_coherent x0=1 t=0.3",
            CatalogDensity::HarmonicCoherent { x0: 1.0 },
            0.3,
        ),
        (
            "free_packet t=0",
            CatalogDensity::FreePacket { sigma0: 1.0, x0: 0.0, p0: 0.0 },
            0.0,
        ),
        (
            "free_packet t=1",
            CatalogDensity::FreePacket { sigma0: 1.0, x0: 0.0, p0: 0.0 },
            1.0,
        ),
    ]
}

#[test]
fn criterion_01_gaussian_fisher_matches_the_inverse_square_width() {
    let grid = standard_grid();
    let mut worst = 0.0f64;
    for sigma in [0.5, 1.0, 2.0] {
        let p = density(&CatalogDensity::Gaussian { sigma, x0: 0.0 }, &grid, 0.0);
        let fisher = fisher_information(&p, numerics()).unwrap();
        let exact = 1.0 / (sigma * sigma);
        worst = worst.max((fisher.value - exact).abs() / exact);
    }
    let pass = worst <= 1e-6;
    assert!(
        verdict(1, pass, &format!("Fisher vs 1/sigma^2, worst rel err {worst:.3e} (tol 1e-6)")),
        "worst relative error {worst:.3e} exceeds 1e-6"
    );
}

#[test]
fn criterion_02_mean_quantum_potential_is_minus_an_eighth_of_fisher() {
    let grid = standard_grid();
    let cases = [
        ("gaussian sigma=1", CatalogDensity::Gaussian { sigma: 1.0, x0: 0.0 }, 0.0),
        ("ho_ground", CatalogDensity::HarmonicGround, 0.0),
        (
            "free_packet t=0.5",
            CatalogDensity::FreePacket { sigma0: 1.0, x0: 0.0, p0: 0.0 },
            0.5,
        ),
        (
            "free_packet t=1",
            CatalogDensity::FreePacket { sigma0: 1.0, x0: 0.0, p0: 0.0 },
            1.0,
        ),
    ];
    let c = natural();
    let eighth = c.hbar() * c.hbar() / (8.0 * c.mass());
    let mut worst = 0.0f64;
    for (_, model, t) in &cases {
        let p = density(model, &grid, *t);
        let mean = mean_quantum_potential(&p, &c, numerics()).unwrap();
        let fisher = fisher_information(&p, numerics()).unwrap();
        worst = worst.max((mean.value + eighth * fisher.value).abs() / (eighth * fisher.value));
    }
    let pass = worst <= 1e-5;
    assert!(
        verdict(
            2,
            pass,
            &format!("mean Q vs -(hbar^2/8m) F, worst rel err {worst:.3e} (tol 1e-5)")
        ),
        "worst relative error {worst:.3e} exceeds 1e-5"
    );
}

#[test]
fn criterion_03_both_fisher_routes_agree_on_every_catalog_density() {
    let grid = standard_grid();
    let c = natural();
    let mut worst_route = 0.0f64;
    let mut worst_gauge = 0.0f64;
    for (_, model, t) in &catalog_cases() {
        let p = density(model, &grid, *t);
        let direct = fisher_information(&p, numerics()).unwrap().value;
        let mut per_gauge = [0.0f64; 2];
        for (k, gauge) in [Gauge::ZeroC, Gauge::MinZero].into_iter().enumerate() {
            let heat = heat_from_density(&p, &c, numerics(), gauge).unwrap();
            per_gauge[k] = fisher_from_heat(&heat, numerics()).unwrap().value;
            worst_route = worst_route.max((per_gauge[k] - direct).abs() / direct);
        }
        worst_gauge = worst_gauge.max((per_gauge[0] - per_gauge[1]).abs() / direct);
    }
    let pass = worst_route <= 1e-6 && worst_gauge <= 1e-12;
    assert!(
        verdict(
            3,
            pass,
            &format!(
                "direct vs heat-route Fisher, worst rel err {worst_route:.3e} (tol 1e-6), \
                 gauge disagreement {worst_gauge:.3e} (tol 1e-12)"
            )
        ),
        "route err {worst_route:.3e} / gauge err {worst_gauge:.3e}"
    );
}

#[test]
fn criterion_04_score_equals_minus_alpha_times_heat_gradient() {
    let grid = standard_grid();
    let p = density(&CatalogDensity::Gaussian { sigma: 1.0, x0: 0.0 }, &grid, 0.0);
    let report = check_gradient_relation(&p, &natural(), numerics(), GAUGE).unwrap();
    let Side::Field { sup: score_sup, .. } = report.lhs else {
        panic!("gradient relation reports field sides")
    };
    let pass = report.residual_sup <= 1e-6 * score_sup;
    assert!(
        verdict(
            4,
            pass,
            &format!(
                "sup residual {:.3e} vs 1e-6 * sup|score| = {:.3e}",
                report.residual_sup,
                1e-6 * score_sup
            )
        ),
        "residual {:.3e} exceeds budget", report.residual_sup
    );
}

#[test]
fn criterion_05_the_two_quantum_potential_routes_are_negatives() {
    let grid = standard_grid();
    let c = natural();
    let mut worst = 0.0f64;
    for (_, model, t) in &catalog_cases() {
        let p = density(model, &grid, *t);
        let q_density = quantum_potential_density_form(&p, &c, numerics()).unwrap();
        let q_amplitude = quantum_potential_amplitude_form(&p, &c, numerics()).unwrap();
        let mut sup_sum = 0.0f64;
        let mut sup_ref = 0.0f64;
        for i in 0..grid.len() {
            if q_density.mask.is_active(i) {
                let qd = q_density.field.values()[i];
                let qa = q_amplitude.field.values()[i];
                sup_sum = sup_sum.max((qd + qa).abs());
                sup_ref = sup_ref.max(qd.abs());
            }
        }
        worst = worst.max(sup_sum / sup_ref);
    }
    let pass = worst <= 1e-5;
    assert!(
        verdict(
            5,
            pass,
            &format!("sup|Q_density + Q_amplitude| / sup|Q|, worst {worst:.3e} (tol 1e-5)")
        ),
        "worst ratio {worst:.3e} exceeds 1e-5"
    );
}

#[test]
fn criterion_06_crank_nicolson_reproduces_packet_dispersion() {
    let grid = Grid::line(-40.0, 40.0, 2048).unwrap();
    let c = natural();
    let model = CatalogDensity::FreePacket { sigma0: 1.0, x0: 0.0, p0: 0.0 };
    let psi0 = model.initial_wavefunction(&grid, &c, Quadrature::Trapezoid).unwrap();
    let params = EvolutionParams { dt: 1e-3, steps: 1000, snapshot_stride: 250 };
    let evolution = evolve(&psi0, Potential::Free, &c, params, Quadrature::Trapezoid).unwrap();
    let last = evolution.trajectory.len() - 1;
    let fisher = fisher_information(evolution.trajectory.frame(last), numerics()).unwrap();
    let exact = model.fisher_exact(1, 1.0, &c);
    let rel = (fisher.value - exact).abs() / exact;
    let drift = evolution.max_norm_drift;
    let pass = rel <= 1e-4 && drift <= 1e-10;
    assert!(
        verdict(
            6,
            pass,
            &format!(
                "F(t=1) rel err {rel:.3e} (tol 1e-4), norm drift {drift:.3e} (tol 1e-10)"
            )
        ),
        "rel {rel:.3e} / drift {drift:.3e}"
    );
}

#[test]
fn criterion_07_thermal_fisher_matches_its_closed_consequence() {
    let grid = standard_grid();
    let c = natural();
    let nm = numerics();
    let mut worst = 0.0f64;
    let mut worst_offset = 0.0f64;

    // Stationary trajectory: the oscillator ground state.
    let ground = density(&CatalogDensity::HarmonicGround, &grid, 0.0);
    let parts =
        thermal_fisher_value(DensitySnapshot::Stationary(&ground), &c, nm, GAUGE).unwrap();
    let rhs = -2.0 * parts.fisher + 4.0 * c.mass() / c.hbar() * parts.c_prime;
    worst = worst.max((parts.f_thermal - rhs).abs() / parts.fisher);
    // In the fixed-zero gauge the consequence collapses to
    // F_thermal - F = -3 F.
    worst_offset = worst_offset
        .max(((parts.f_thermal - parts.fisher) + 3.0 * parts.fisher).abs() / parts.fisher);

    // Swinging trajectory: a coherent state sampled around t = 0.4.
    let model = CatalogDensity::HarmonicCoherent { x0: 1.0 };
    let (t, dt) = (0.4, 0.01);
    let prev = density(&model, &grid, t - dt);
    let mid = density(&model, &grid, t);
    let next = density(&model, &grid, t + dt);
    let snap = DensitySnapshot::Centered { prev: &prev, mid: &mid, next: &next, dt };
    let parts = thermal_fisher_value(snap, &c, nm, GAUGE).unwrap();
    let rhs = -2.0 * parts.fisher + 4.0 * c.mass() / c.hbar() * parts.c_prime;
    worst = worst.max((parts.f_thermal - rhs).abs() / parts.fisher);
    worst_offset = worst_offset
        .max(((parts.f_thermal - parts.fisher) + 3.0 * parts.fisher).abs() / parts.fisher);

    let pass = worst <= 1e-3 && worst_offset <= 1e-3;
    assert!(
        verdict(
            7,
            pass,
            &format!(
                "F_thermal vs -2F + (4m/hbar) c', worst rel err {worst:.3e}; \
                 fixed-zero offset -3F, worst rel err {worst_offset:.3e} (tol 1e-3)"
            )
        ),
        "consequence err {worst:.3e} / offset err {worst_offset:.3e}"
    );
}

#[test]
fn criterion_08_ground_state_heat_flow_residual_is_a_fixed_parabola() {
    let c = natural();
    let nm = numerics();

    // On the standard grid the residual must match (x^2)/2 - 1 pointwise.
    let grid = standard_grid();
    let ground = density(&CatalogDensity::HarmonicGround, &grid, 0.0);
    let res =
        heat_flow_residual(DensitySnapshot::Stationary(&ground), &c, nm, GAUGE).unwrap();
    let mut sup_err = 0.0f64;
    for j in 0..grid.len() {
        let x = grid.axis(0).coord(j);
        if x.abs() <= 3.0 && res.mask.is_active(j) {
            let expected = 0.5 * x * x - 1.0;
            sup_err = sup_err.max((res.field.values()[j] - expected).abs());
        }
    }

    // And it must not fade under refinement: the center value stays at -1.
    let mut center_values = Vec::new();
    for n in [2049usize, 4097] {
        let fine = Grid::line(-20.0, 20.0, n).unwrap();
        let p = density(&CatalogDensity::HarmonicGround, &fine, 0.0);
        let r = heat_flow_residual(DensitySnapshot::Stationary(&p), &c, nm, GAUGE).unwrap();
        center_values.push(r.field.values()[(n - 1) / 2]);
    }
    let persists = center_values.iter().all(|v| (v + 1.0).abs() <= 1e-3);

    let pass = sup_err <= 1e-4 && persists;
    assert!(
        verdict(
            8,
            pass,
            &format!(
                "residual vs x^2/2 - 1 on |x|<=3, sup err {sup_err:.3e} (tol 1e-4); \
                 center value at n=2049/4097: {:.6}/{:.6} (stays at -1)",
                center_values[0], center_values[1]
            )
        ),
        "sup err {sup_err:.3e}, center values {center_values:?}"
    );
}

/// Expected-red: demands second-order convergence from residuals that this
/// implementation already leaves at round-off on Gaussian inputs.
///
/// All derivatives are evaluated by stencils acting on the log-density,
/// which is exactly quadratic for a Gaussian, so the order-2 stencils are
/// *exact*: the gradient-relation residual is bitwise zero, the two Fisher
/// routes agree to ~1e-16, and the mean-potential residual sits at the
/// quadrature round-off floor (~1.5e-12) at every resolution. A log-log fit
/// through resolution-independent noise has no slope to find, so no
/// implementation sharing this evaluation route can land in [1.8, 2.2]
/// here. The companion test below shows the same fit finding a genuine
/// order two on a density whose log is not quadratic.
#[test]
fn criterion_09_residual_convergence_orders_sit_near_two() {
    let c = natural();
    let nm = numerics();
    let n_list = [1025usize, 2049, 4097];
    let model = CatalogDensity::Gaussian { sigma: 1.0, x0: 0.0 };
    let relations = [
        RelationId::MeanQpFisher,
        RelationId::FisherRepresentations,
        RelationId::GradientRelation,
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for relation in relations {
        let study = convergence_study(
            relation,
            -20.0,
            20.0,
            &n_list,
            |grid| model.density_on_grid(grid, 0.0, &c, nm.quadrature),
            &c,
            nm,
            GAUGE,
        )
        .unwrap();
        let in_window = (1.8..=2.2).contains(&study.fitted_order);
        pass &= in_window;
        let residuals: Vec<String> =
            study.points.iter().map(|p| format!("{:.3e}", p.residual_sup)).collect();
        lines.push(format!(
            "{}: fitted order {:+.4} (residuals {} at n = 1025/2049/4097)",
            relation.wire_name(),
            study.fitted_order,
            residuals.join(" / ")
        ));
    }
    let detail = format!("fitted orders in [1.8, 2.2]? {}", lines.join("; "));
    assert!(
        verdict(9, pass, &detail),
        "residuals are resolution-independent round-off, not h^2 truncation: {}.\n\
         The shared log-evaluation route is exact on Gaussian densities, so these three\n\
         residuals have no h-dependent component to converge; a fitted order near two is\n\
         structurally unreachable on this input family. The companion test\n\
         `convergence_order_is_genuine_on_a_non_gaussian_density` shows the same fit\n\
         finding order two where truncation actually enters. See README,\n\
         \"Convergence-order caveat\".",
        lines.join("; ")
    );
}

/// Companion to criterion 9: on a density whose log-density is quartic the
/// mean-potential residual carries a real h^2 truncation term, and the
/// fitted order lands on two.
#[test]
fn convergence_order_is_genuine_on_a_non_gaussian_density() {
    let c = natural();
    let nm = numerics();
    let n_list = [513usize, 1025, 2049, 4097];
    let study = convergence_study(
        RelationId::MeanQpFisher,
        -8.0,
        8.0,
        &n_list,
        |grid| {
            DensityField::from_fn(grid.clone(), nm.quadrature, |x| {
                (-x[0] * x[0] * x[0] * x[0] / 4.0).exp()
            })
        },
        &c,
        nm,
        GAUGE,
    )
    .unwrap();
    println!(
        "companion to 9: quartic log-density fitted order {:+.4} (residuals {})",
        study.fitted_order,
        study
            .points
            .iter()
            .map(|p| format!("{:.3e}", p.residual_sup))
            .collect::<Vec<_>>()
            .join(" / ")
    );
    assert!(
        (1.8..=2.2).contains(&study.fitted_order),
        "fitted order {} outside [1.8, 2.2]",
        study.fitted_order
    );
}

#[test]
fn criterion_10_repeated_runs_are_byte_identical_modulo_timestamp() {
    let config = std::env::temp_dir()
        .join(format!("subq-acceptance-10-{}.json", std::process::id()));
    std::fs::write(
        &config,
        r#"{
          "scenario_id": "acceptance-10",
          "grid": {"dim": 1, "bounds": [[-20.0, 20.0]], "n": [4096]},
          "density": {"kind": "gaussian", "sigma": 1.0, "x0": 0.0},
          "checks": ["EQ_2_5", "EQ_2_1", "EQ_2_3_VS_2_7", "EQ_1_1", "EQ_2_6", "DELTA_P_EQ_M_U"]
        }"#,
    )
    .unwrap();
    let run = || {
        let output = Command::new(env!("CARGO_BIN_EXE_subq"))
            .args(["analyze", "--config"])
            .arg(&config)
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        String::from_utf8(output.stdout).unwrap()
    };
    let first = run();
    let second = run();
    std::fs::remove_file(&config).ok();
    let strip = |text: &str| -> Vec<String> {
        text.lines()
            .filter(|l| !l.contains("\"timestamp\""))
            .map(str::to_owned)
            .collect()
    };
    let timestamp_lines =
        |text: &str| text.lines().filter(|l| l.contains("\"timestamp\"")).count();
    let pass = strip(&first) == strip(&second)
        && timestamp_lines(&first) == 1
        && timestamp_lines(&second) == 1;
    assert!(
        verdict(
            10,
            pass,
            "two analyze runs differ only on the single timestamp line"
        ),
        "reports are not deterministic"
    );
}
