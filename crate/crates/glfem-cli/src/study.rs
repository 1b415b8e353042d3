//! Convergence and stability study runners.
//!
//! A convergence study does one solver run per mesh size with tau tied to
//! h, reports all three error columns at every snapshot time, and adds
//! observed orders from the second size onward. A stability study fixes
//! the mesh and sweeps the time-step multiplier k.
//!
//! Snapshot times in a convergence study are matched to the nearest time
//! step of each run (errors are evaluated at the actual step time); this
//! matters only when a requested time does not sit on a coarse run's
//! grid. Stability studies require exact divisibility.

use glfem_core::assembly::QuadratureRule;
use glfem_core::linalg::{SolverKind, SolverOptions};
use glfem_core::mesh::{
    build_dof_map, build_macro_patches, build_uniform_mesh, MacroPatchSet, Mesh,
};
use glfem_core::norms::{self, Q1Sample};
use glfem_core::problem::ProblemSpec;
use glfem_core::projections::postprocess;
use glfem_core::stepper::{CnStepper, FemField, StepperConfig};
use glfem_core::{DofMap, Error};

use crate::config::{ProblemKind, StudyConfig, TauRule};
use crate::report::{ErrorReport, ReportRow};
use crate::CliError;

fn problem_spec(kind: ProblemKind, t_final: f64) -> ProblemSpec {
    let mut spec = match kind {
        ProblemKind::Example1 => ProblemSpec::plane_wave(),
    };
    spec.t_final = t_final;
    spec
}

fn progress(msg: &str) {
    eprintln!("[glfem] {msg}");
}

struct RunErrors {
    requested_time: f64,
    h1: f64,
    superclose: f64,
    postprocessed: f64,
}

/// Drive one (mesh, tau) run and measure all error columns at each
/// requested snapshot; `exact_grid` demands on-grid snapshot times.
fn run_one(
    spec: &ProblemSpec,
    mesh: &Mesh,
    dofs: &DofMap,
    patches: &MacroPatchSet,
    tau: f64,
    snapshots: &[f64],
    cfg: &StudyConfig,
    exact_grid: bool,
) -> Result<Vec<RunErrors>, CliError> {
    let m = mesh.m;
    let n_steps_f = spec.t_final / tau;
    let n_steps = n_steps_f.round();
    if (n_steps_f - n_steps).abs() > 1e-9 || n_steps < 1.0 {
        return Err(CliError::Config(format!(
            "final time {} is not a positive multiple of tau = {tau}",
            spec.t_final
        )));
    }
    let n_steps = n_steps as usize;

    // Map each requested time onto the step grid.
    let mut grid_times = Vec::with_capacity(snapshots.len());
    for &t in snapshots {
        let step = (t / tau).round().max(1.0);
        let aligned = step * tau;
        if (aligned - t).abs() > 1e-9 {
            if exact_grid {
                return Err(CliError::Config(format!(
                    "snapshot time {t} is not a multiple of tau = {tau}"
                )));
            }
            progress(&format!(
                "M = {m}: snapshot t = {t} is off the tau = {tau} grid; using nearest step t = {aligned}"
            ));
        }
        if step > n_steps as f64 {
            return Err(CliError::Config(format!(
                "snapshot time {t} lies beyond the final time {}",
                spec.t_final
            )));
        }
        grid_times.push(aligned);
    }

    let mut config =
        StepperConfig::new(tau, n_steps).map_err(|e| CliError::Config(e.to_string()))?;
    config.quadrature = QuadratureRule::gauss(cfg.quad);
    config.solver = SolverOptions {
        kind: SolverKind::Direct,
        tol: cfg.solver_tol,
        ..SolverOptions::default()
    };

    let stepper =
        CnStepper::new(spec, mesh, dofs, &config).map_err(|e| CliError::Config(e.to_string()))?;
    let (fields, stats) = stepper.run_with_stats(&grid_times).map_err(|e| match e {
        Error::StepFailure { step, residual } => CliError::Solver {
            m,
            step,
            source: Error::StepFailure { step, residual },
        },
        other => CliError::Solver {
            m,
            step: 0,
            source: other,
        },
    })?;
    progress(&format!(
        "M = {m}, tau = {tau:.6}: {n_steps} steps, {} solves, max residual {:.2e}",
        stats.n_solves, stats.max_relative_residual
    ));

    let rule = QuadratureRule::gauss(cfg.quad);
    let mut out = Vec::with_capacity(fields.len());
    for (field, &requested_time) in fields.iter().zip(snapshots.iter()) {
        out.push(measure(
            spec,
            mesh,
            dofs,
            patches,
            field,
            requested_time,
            &rule,
        )?);
    }
    Ok(out)
}

fn measure(
    spec: &ProblemSpec,
    mesh: &Mesh,
    dofs: &DofMap,
    patches: &MacroPatchSet,
    field: &FemField,
    requested_time: f64,
    rule: &QuadratureRule,
) -> Result<RunErrors, CliError> {
    let t = field.time;
    let value = |x: f64, y: f64| {
        spec.eval_exact(x, y, t)
            .expect("benchmark has exact solution")
    };
    let grad = |x: f64, y: f64| {
        spec.eval_exact_gradient(x, y, t)
            .expect("benchmark has exact gradient")
    };
    let sample = Q1Sample { field, mesh, dofs };
    let h1 = norms::h1_error(value, grad, &sample, mesh, rule);
    let superclose = norms::superclose_error(value, field, mesh, dofs);
    let post =
        postprocess(field, patches, mesh, dofs).map_err(|e| CliError::Config(e.to_string()))?;
    let postprocessed = norms::h1_error(value, grad, &post, mesh, rule);
    Ok(RunErrors {
        requested_time,
        h1,
        superclose,
        postprocessed,
    })
}

/// Observed orders against the previous mesh size for matching times.
fn attach_orders(rows: &mut [ReportRow]) {
    // Rows are grouped per run in size order; compare rows with equal
    // requested time across consecutive sizes.
    let snapshot: Vec<ReportRow> = rows.to_vec();
    for row in rows.iter_mut() {
        let prev = snapshot
            .iter()
            .filter(|r| r.time == row.time && r.m < row.m)
            .max_by_key(|r| r.m);
        if let Some(prev) = prev {
            row.h1_order = norms::convergence_order(prev.h1, row.h1).ok();
            row.superclose_order = norms::convergence_order(prev.superclose, row.superclose).ok();
            row.postprocessed_order =
                norms::convergence_order(prev.postprocessed, row.postprocessed).ok();
        }
    }
}

/// One run per mesh size; all error columns with orders per snapshot time.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<ErrorReport, CliError> {
    cfg.validate()?;
    let spec = problem_spec(cfg.problem, cfg.t_final);
    let mut rows: Vec<ReportRow> = Vec::new();
    for &m in &cfg.sizes {
        let mesh =
            build_uniform_mesh(m, spec.domain).map_err(|e| CliError::Config(e.to_string()))?;
        let dofs = build_dof_map(&mesh);
        let patches = build_macro_patches(&mesh).map_err(|e| CliError::Config(e.to_string()))?;
        let tau = match cfg.tau_rule {
            TauRule::H => mesh.h,
            TauRule::Kh => cfg.k[0] as f64 * mesh.h,
        };
        let errors = run_one(
            &spec,
            &mesh,
            &dofs,
            &patches,
            tau,
            &cfg.snapshots,
            cfg,
            false,
        )?;
        for e in errors {
            rows.push(ReportRow {
                time: e.requested_time,
                m,
                tau,
                h1: e.h1,
                h1_order: None,
                superclose: e.superclose,
                superclose_order: None,
                postprocessed: e.postprocessed,
                postprocessed_order: None,
            });
        }
    }
    attach_orders(&mut rows);
    let mut report = ErrorReport { rows };
    report.sort();
    Ok(report)
}

/// Fixed mesh, one run per time-step multiplier k; no order columns.
pub fn run_stability_study(cfg: &StudyConfig) -> Result<ErrorReport, CliError> {
    cfg.validate()?;
    let spec = problem_spec(cfg.problem, cfg.t_final);
    let m = cfg.sizes[0];
    let mesh = build_uniform_mesh(m, spec.domain).map_err(|e| CliError::Config(e.to_string()))?;
    let dofs = build_dof_map(&mesh);
    let patches = build_macro_patches(&mesh).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rows: Vec<ReportRow> = Vec::new();
    for &k in &cfg.k {
        let tau = k as f64 * mesh.h;
        let errors = run_one(
            &spec,
            &mesh,
            &dofs,
            &patches,
            tau,
            &cfg.snapshots,
            cfg,
            true,
        )?;
        for e in errors {
            rows.push(ReportRow {
                time: e.requested_time,
                m,
                tau,
                h1: e.h1,
                h1_order: None,
                superclose: e.superclose,
                superclose_order: None,
                postprocessed: e.postprocessed,
                postprocessed_order: None,
            });
        }
    }
    let mut report = ErrorReport { rows };
    report.sort();
    Ok(report)
}
