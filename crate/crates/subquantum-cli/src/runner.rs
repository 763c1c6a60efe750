//! Scenario execution: wiring configs to library calls and collecting the
//! results into reports.
//!
//! The runner stays out of the numbers: every reported value is the direct
//! output of one library call. Its job is sequencing — build the density,
//! run each requested check once, assemble the echo and provenance blocks.

use subquantum::{
    check_heat_flow, check_relation_static, check_thermal_fisher, convergence_study,
    evolve, fisher_information, heat_from_density, log_density_score, mean_quantum_potential,
    mean_total_energy, momentum_fluctuation, osmotic_velocity, quantum_potential_amplitude_form,
    quantum_potential_density_form, safe_ln, total_energy_density, CatalogDensity,
    DensityField, DensitySnapshot, EvolutionParams, Potential, Quadrature, RelationId,
    SubquantumError, BOUNDARY_TAIL_WARN_REL,
};

use crate::config::{DensitySource, Scenario};
use crate::report::{
    CheckEcho, ConstantsEcho, ConvergenceReport, EvolutionEcho, GridEcho, NumericsEcho,
    PointEcho, Provenance, Quantities, RunReport, ScenarioEcho, StudyEcho, TrajectorySummary,
};
use crate::CliError;

/// Largest supported refinement count: the resolution ladder doubles the
/// point count per refinement.
const MAX_REFINEMENTS: usize = 12;

fn numerical(scenario_id: &str, context: &str, e: SubquantumError) -> CliError {
    CliError::Numerical(format!("scenario '{scenario_id}': {context}: {e}"))
}

fn scenario_echo(s: &Scenario) -> ScenarioEcho {
    let grid = GridEcho {
        dim: s.grid.dim(),
        bounds: s.grid.axes().iter().map(|a| [a.lo(), a.hi()]).collect(),
        n: s.grid.axes().iter().map(|a| a.len()).collect(),
        spacing: s.grid.axes().iter().map(|a| a.spacing()).collect(),
    };
    ScenarioEcho {
        scenario_id: s.scenario_id.clone(),
        constants: ConstantsEcho {
            hbar: s.constants.hbar(),
            mass: s.constants.mass(),
            omega: s.constants.omega(),
            k_t: s.constants.kt(),
            alpha: s.constants.inv_action(),
            diffusion: s.constants.diffusion(),
        },
        grid,
        density: s.density.echo(),
        evolution: s.evolution.map(|e| EvolutionEcho {
            dt: e.dt,
            steps: e.steps,
            snap_stride: e.snap_stride,
        }),
        numerics: NumericsEcho {
            stencil_order: s.numerics.scheme.order() as u32,
            floor_rel: s.numerics.floor_rel,
            quadrature: match s.numerics.quadrature {
                Quadrature::Trapezoid => "trapezoid".to_owned(),
                Quadrature::Simpson => "simpson".to_owned(),
            },
            gauge: s.gauge.wire_name().to_owned(),
        },
        checks: s.checks.iter().map(|c| c.wire_name().to_owned()).collect(),
    }
}

fn warn_boundary(scenario_id: &str, p: &DensityField) {
    let fraction = p.boundary_fraction();
    if fraction > BOUNDARY_TAIL_WARN_REL {
        eprintln!(
            "warning: scenario '{scenario_id}': boundary density fraction {fraction:.3e} \
             exceeds {BOUNDARY_TAIL_WARN_REL:.0e}; the box may be truncating the state"
        );
    }
}

fn compute_quantities(s: &Scenario, p: &DensityField) -> Result<Quantities, CliError> {
    let fisher = fisher_information(p, s.numerics)
        .map_err(|e| numerical(&s.scenario_id, "fisher information", e))?;
    let mean_qp = mean_quantum_potential(p, &s.constants, s.numerics)
        .map_err(|e| numerical(&s.scenario_id, "mean quantum potential", e))?;
    let mean_e = mean_total_energy(p, &s.constants, s.numerics)
        .map_err(|e| numerical(&s.scenario_id, "mean total energy", e))?;
    Ok(Quantities {
        fisher_information: fisher.value,
        fisher_excluded_mass: fisher.excluded_mass,
        mean_quantum_potential: mean_qp.value,
        mean_total_energy: mean_e.value,
        boundary_fraction: p.boundary_fraction(),
    })
}

/// Runs one check on a centered analytic snapshot of a catalog density.
fn check_on_analytic_history(
    s: &Scenario,
    relation: RelationId,
    model: &CatalogDensity,
    t: f64,
    mid: &DensityField,
) -> Result<subquantum::IdentityReport, CliError> {
    let section = s
        .evolution
        .expect("config validation guarantees an evolution section here");
    let delta = section.dt * section.snap_stride as f64;
    let prev = model
        .density_on_grid(&s.grid, t - delta, &s.constants, s.numerics.quadrature)
        .map_err(|e| numerical(&s.scenario_id, "sampling earlier snapshot", e))?;
    let next = model
        .density_on_grid(&s.grid, t + delta, &s.constants, s.numerics.quadrature)
        .map_err(|e| numerical(&s.scenario_id, "sampling later snapshot", e))?;
    let snap = DensitySnapshot::Centered { prev: &prev, mid, next: &next, dt: delta };
    let label = relation.wire_name();
    match relation {
        RelationId::HeatFlow => check_heat_flow(snap, &s.constants, s.numerics, s.gauge),
        RelationId::ThermalFisher => {
            check_thermal_fisher(snap, &s.constants, s.numerics, s.gauge)
        }
        other => unreachable!("{} does not need a history", other.wire_name()),
    }
    .map_err(|e| numerical(&s.scenario_id, label, e))
}

/// Evaluates the scenario's checks on a fixed density snapshot, using
/// analytic flanking snapshots for time-derivative checks on
/// non-stationary densities. Returns the report and the analysis frame.
pub fn run_analyze(s: &Scenario) -> Result<(RunReport, DensityField), CliError> {
    let p = s.density.build(&s.grid, &s.constants, s.numerics.quadrature)?;
    warn_boundary(&s.scenario_id, &p);
    let quantities = compute_quantities(s, &p)?;

    let mut checks = Vec::with_capacity(s.checks.len());
    for &relation in &s.checks {
        let report = if relation.needs_history() && !s.density.is_stationary() {
            let DensitySource::Catalog { model, t } = &s.density else {
                unreachable!("config validation rejects file densities for history checks")
            };
            check_on_analytic_history(s, relation, model, *t, &p)?
        } else {
            check_relation_static(relation, &p, &s.constants, s.numerics, s.gauge)
                .map_err(|e| numerical(&s.scenario_id, relation.wire_name(), e))?
        };
        checks.push(CheckEcho::from_report(&report));
    }

    let report = RunReport {
        scenario: scenario_echo(s),
        quantities,
        trajectory: None,
        checks,
        provenance: Provenance::new(&s.grid),
    };
    Ok((report, p))
}

/// Evolves the initial state under Crank-Nicolson and evaluates the checks
/// on the computed trajectory: instantaneous checks and the quantities
/// table on the final frame, time-derivative checks on the last interior
/// snapshot triple. Returns the report and the final frame.
pub fn run_evolve(s: &Scenario) -> Result<(RunReport, DensityField), CliError> {
    let section = s.evolution.ok_or_else(|| {
        CliError::Config("the evolve subcommand needs an \"evolution\" section".into())
    })?;
    let DensitySource::Catalog { model, t } = &s.density else {
        return Err(CliError::Config(
            "evolve needs an analytic initial density; a sample file has no wavefunction".into(),
        ));
    };
    if *t != 0.0 {
        return Err(CliError::Config(format!(
            "evolve starts at t = 0 but the density is pinned at t = {t}; drop the t field"
        )));
    }
    if s.grid.dim() != 1 {
        return Err(CliError::Config(format!(
            "evolve supports one-dimensional grids, got dim {}",
            s.grid.dim()
        )));
    }

    let potential = match model {
        CatalogDensity::HarmonicGround | CatalogDensity::HarmonicCoherent { .. } => {
            Potential::Harmonic
        }
        CatalogDensity::Gaussian { .. } | CatalogDensity::FreePacket { .. } => Potential::Free,
    };
    let psi0 = model
        .initial_wavefunction(&s.grid, &s.constants, s.numerics.quadrature)
        .map_err(|e| numerical(&s.scenario_id, "initial wavefunction", e))?;
    let params = EvolutionParams {
        dt: section.dt,
        steps: section.steps,
        snapshot_stride: section.snap_stride,
    };
    let evolution = evolve(&psi0, potential, &s.constants, params, s.numerics.quadrature)
        .map_err(|e| numerical(&s.scenario_id, "evolution", e))?;

    let traj = &evolution.trajectory;
    let last = traj.len() - 1;
    let final_frame = traj.frame(last).clone();
    warn_boundary(&s.scenario_id, &final_frame);
    let quantities = compute_quantities(s, &final_frame)?;

    let mut checks = Vec::with_capacity(s.checks.len());
    for &relation in &s.checks {
        let report = if relation.needs_history() {
            let (prev, mid, next) = traj
                .centered_triple(last - 1)
                .map_err(|e| numerical(&s.scenario_id, "snapshot triple", e))?;
            let snap = DensitySnapshot::Centered {
                prev,
                mid,
                next,
                dt: traj.snapshot_dt(),
            };
            match relation {
                RelationId::HeatFlow => {
                    check_heat_flow(snap, &s.constants, s.numerics, s.gauge)
                }
                RelationId::ThermalFisher => {
                    check_thermal_fisher(snap, &s.constants, s.numerics, s.gauge)
                }
                other => unreachable!("{} does not need a history", other.wire_name()),
            }
        } else {
            check_relation_static(relation, &final_frame, &s.constants, s.numerics, s.gauge)
        }
        .map_err(|e| numerical(&s.scenario_id, relation.wire_name(), e))?;
        checks.push(CheckEcho::from_report(&report));
    }

    let report = RunReport {
        scenario: scenario_echo(s),
        quantities,
        trajectory: Some(TrajectorySummary {
            snapshots: traj.len(),
            dt_snapshot: traj.snapshot_dt(),
            final_time: traj.time(last),
            max_norm_drift: evolution.max_norm_drift,
        }),
        checks,
        provenance: Provenance::new(&s.grid),
    };
    Ok((report, final_frame))
}

/// Re-runs the scenario's checks across a ladder of refined grids
/// (`n -> 2n - 1`, halving the spacing) and fits each residual's
/// convergence order.
pub fn run_convergence(s: &Scenario, refinements: usize) -> Result<ConvergenceReport, CliError> {
    if !(2..=MAX_REFINEMENTS).contains(&refinements) {
        return Err(CliError::Config(format!(
            "refinements must lie in 2..={MAX_REFINEMENTS}, got {refinements}"
        )));
    }
    if s.grid.dim() != 1 {
        return Err(CliError::Config(format!(
            "convergence studies support one-dimensional grids, got dim {}",
            s.grid.dim()
        )));
    }
    let DensitySource::Catalog { model, t } = &s.density else {
        return Err(CliError::Config(
            "convergence studies need an analytic density; a sample file cannot be resampled \
             on refined grids"
                .into(),
        ));
    };
    if s.checks.is_empty() {
        return Err(CliError::Config("convergence needs at least one entry in checks".into()));
    }
    for id in &s.checks {
        if id.needs_history() && !s.density.is_stationary() {
            return Err(CliError::Config(format!(
                "convergence evaluates {} in stationary form, which is wrong for a \
                 non-stationary density; use a stationary density or drop the check",
                id.wire_name()
            )));
        }
    }
    if s.numerics.quadrature == Quadrature::Simpson {
        // n -> 2n - 1 preserves odd point counts, so the start decides.
        let n0 = s.grid.axis(0).len();
        if n0 % 2 == 0 {
            return Err(CliError::Config(format!(
                "simpson quadrature needs odd point counts; the ladder starts at {n0}"
            )));
        }
    }

    let axis = s.grid.axis(0);
    let n_list = refinement_ladder(axis.len(), refinements);

    let mut studies = Vec::with_capacity(s.checks.len());
    for &relation in &s.checks {
        let study = convergence_study(
            relation,
            axis.lo(),
            axis.hi(),
            &n_list,
            |grid| model.density_on_grid(grid, *t, &s.constants, s.numerics.quadrature),
            &s.constants,
            s.numerics,
            s.gauge,
        )
        .map_err(|e| numerical(&s.scenario_id, relation.wire_name(), e))?;
        studies.push(StudyEcho {
            relation: study.relation.wire_name().to_owned(),
            fitted_order: study.fitted_order,
            points: study
                .points
                .iter()
                .map(|p| PointEcho { n: p.n, h: p.h, residual_sup: p.residual_sup })
                .collect(),
        });
    }

    Ok(ConvergenceReport {
        scenario: scenario_echo(s),
        refinements,
        studies,
        provenance: Provenance::new(&s.grid),
    })
}

/// Plain-text listing of the analytic density models and their closed-form
/// reference values.
pub fn catalog_text() -> String {
    let mut out = String::new();
    out.push_str("analytic density catalog\n");
    out.push_str("\n");
    out.push_str("kind         parameters          stationary   width sigma(t)                              center(t)\n");
    out.push_str("gaussian     sigma > 0, x0       yes          sigma                                       x0\n");
    out.push_str("ho_ground    (none)              yes          sqrt(hbar / (2 m omega))                    0\n");
    out.push_str("ho_coherent  x0                  only x0 = 0  sqrt(hbar / (2 m omega))                    x0 cos(omega t)\n");
    out.push_str("free_packet  sigma0 > 0, x0, p0  no           sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)  x0 + p0 t / m\n");
    out.push_str("\n");
    out.push_str("every model is a Gaussian profile at each instant, so closed forms follow\n");
    out.push_str("from the width: fisher information F = dim / sigma(t)^2, quantum potential\n");
    out.push_str("Q(x) = (hbar^2 / 4 m) [ (x - center)^2 / (2 sigma^4) - 1 / sigma^2 ],\n");
    out.push_str("mean quantum potential = -(hbar^2 / 8 m) F.\n");
    out.push_str("\n");
    out.push_str("reference values at hbar = m = omega = 1:\n");
    out.push_str("  gaussian sigma in {0.5, 1, 2}:  F = {4, 1, 0.25}\n");
    out.push_str("  ho_ground:                      sigma^2 = 1/2, F = 2, mean Q = -1/4\n");
    out.push_str("  free_packet sigma0 = 1, t = 1:  sigma^2 = 5/4, F = 4/5\n");
    out.push_str("\n");
    out.push_str("a from_file density is a normalized sample snapshot; it has no closed\n");
    out.push_str("forms and supports no time-derivative checks or evolution runs.\n");
    out
}

/// Computes the full set of per-point diagnostic fields on the analysis
/// frame for `--dump-fields`. Columns hold exactly what the library
/// returns: masked fields are zero off-mask, the log density and heat map
/// carry their safe-log continuation, and the mask column says which rows
/// are trustworthy.
pub fn dump_columns(
    s: &Scenario,
    p: &DensityField,
) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let id = &s.scenario_id;
    let grid = p.grid();
    let dim = grid.dim();
    let len = grid.len();
    let name = |base: &str, d: usize| -> String {
        if dim == 1 {
            base.to_owned()
        } else {
            format!("{base}{d}")
        }
    };

    let sf = log_density_score(p, s.numerics.scheme, s.numerics.floor_rel)
        .map_err(|e| numerical(id, "score", e))?;
    let u = osmotic_velocity(p, &s.constants, s.numerics)
        .map_err(|e| numerical(id, "osmotic velocity", e))?;
    let dp = momentum_fluctuation(p, &s.constants, s.numerics)
        .map_err(|e| numerical(id, "momentum fluctuation", e))?;
    let e_tot = total_energy_density(p, &s.constants, s.numerics)
        .map_err(|e| numerical(id, "total energy", e))?;
    let q_density = quantum_potential_density_form(p, &s.constants, s.numerics)
        .map_err(|e| numerical(id, "quantum potential (density form)", e))?;
    let q_amplitude = quantum_potential_amplitude_form(p, &s.constants, s.numerics)
        .map_err(|e| numerical(id, "quantum potential (amplitude form)", e))?;
    let heat = heat_from_density(p, &s.constants, s.numerics, s.gauge)
        .map_err(|e| numerical(id, "heat map", e))?;

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for d in 0..dim {
        let coords = (0..len)
            .map(|i| grid.axis(d).coord(grid.axis_index(i, d)))
            .collect();
        columns.push((name("x", d), coords));
    }
    columns.push(("p".into(), p.values().to_vec()));
    columns.push(("log_p".into(), p.values().iter().map(|&v| safe_ln(v)).collect()));
    columns.push((
        "mask".into(),
        sf.mask.flags().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    ));
    for d in 0..dim {
        columns.push((name("score", d), sf.score.component(d).to_vec()));
    }
    for d in 0..dim {
        columns.push((name("u", d), u.field.component(d).to_vec()));
    }
    for d in 0..dim {
        columns.push((name("dp", d), dp.field.component(d).to_vec()));
    }
    columns.push(("e_tot".into(), e_tot.values().to_vec()));
    columns.push(("q_density_form".into(), q_density.field.values().to_vec()));
    columns.push(("q_amplitude_form".into(), q_amplitude.field.values().to_vec()));
    columns.push(("heat_q".into(), heat.q_heat().values().to_vec()));
    Ok(columns)
}

/// Point counts for a refinement ladder: `n -> 2n - 1` keeps every existing
/// grid point and halves the spacing, so residuals at successive levels are
/// comparable.
fn refinement_ladder(n0: usize, refinements: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(refinements + 1);
    let mut n = n0;
    out.push(n);
    for _ in 0..refinements {
        n = 2 * n - 1;
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_ladder_halves_the_spacing() {
        assert_eq!(refinement_ladder(1025, 2), vec![1025, 2049, 4097]);
    }

    #[test]
    fn catalog_lists_every_density_kind() {
        let text = catalog_text();
        for kind in ["gaussian", "ho_ground", "ho_coherent", "free_packet", "from_file"] {
            assert!(text.contains(kind), "catalog is missing {kind}");
        }
    }
}
