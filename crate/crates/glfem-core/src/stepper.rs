//! The fully discrete scheme: a predictor-corrector bootstrap for the
//! first step and linearized Crank-Nicolson steps afterwards.
//!
//! Each step solves one complex linear system
//!
//! ```text
//!   [M/tau + (nu+i eta)/2 K + (kappa+i zeta)/2 W_n - gamma/2 M] U^n
//!     = [M/tau - (nu+i eta)/2 K - (kappa+i zeta)/2 W_n + gamma/2 M] U^{n-1}
//!       + G(t_{n-1/2})
//! ```
//!
//! where `W_n` is the mass matrix weighted by `f(|u*|^2)` and `u*` is the
//! step's frozen argument: the previous state for the predictor, the
//! predictor average for the corrector, and the two-step extrapolation
//! `(3/2) U^{n-1} - (1/2) U^{n-2}` for ordinary steps. The source is
//! evaluated at the interval midpoint, matching the Crank-Nicolson
//! averaging of every other term.
//!
//! When the reaction term is absent (`kappa = zeta = 0`) the left-hand
//! matrix is step-independent and its factorization is reused for the
//! whole run; with a nonlinearity the scheme refactors per step.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::assembly::{
    assemble_function_load, assemble_mass, assemble_stiffness, assemble_weighted_mass,
    gather_local, shape_gradients, shape_values, QuadratureRule,
};
use crate::error::{Error, Result};
use crate::linalg::{
    axpy_matrix, solve_bicgstab, solve_factored, BandLu, SolveReport, SolverKind, SolverOptions,
    SparseComplexMatrix,
};
use crate::mesh::{DofMap, Mesh};
use crate::problem::{ProblemSpec, ResolvedSource};

/// A member of the interior bilinear space: one complex coefficient per
/// interior node (boundary values are implicitly zero), tagged with the
/// time level it represents.
#[derive(Debug, Clone, PartialEq)]
pub struct FemField {
    pub coeffs: Vec<Complex64>,
    pub time: f64,
}

impl FemField {
    pub fn zeros(n_dofs: usize, time: f64) -> Self {
        FemField {
            coeffs: vec![Complex64::new(0.0, 0.0); n_dofs],
            time,
        }
    }

    /// Pointwise value of the underlying bilinear function.
    pub fn eval(&self, mesh: &Mesh, dofs: &DofMap, x: f64, y: f64) -> Complex64 {
        let (e, xi, eta) = mesh.locate(x, y);
        let local = gather_local(mesh, dofs, &self.coeffs, e);
        let shapes = shape_values(xi, eta);
        (0..4).map(|a| local[a] * shapes[a]).sum()
    }

    /// Pointwise gradient of the underlying bilinear function.
    pub fn eval_gradient(
        &self,
        mesh: &Mesh,
        dofs: &DofMap,
        x: f64,
        y: f64,
    ) -> (Complex64, Complex64) {
        let (e, xi, eta) = mesh.locate(x, y);
        let local = gather_local(mesh, dofs, &self.coeffs, e);
        let grads = shape_gradients(xi, eta);
        let mut gx = Complex64::new(0.0, 0.0);
        let mut gy = Complex64::new(0.0, 0.0);
        for a in 0..4 {
            gx += local[a] * (grads[a].0 / mesh.hx);
            gy += local[a] * (grads[a].1 / mesh.hy);
        }
        (gx, gy)
    }
}

/// Time-discretization parameters for one run.
#[derive(Debug, Clone)]
pub struct StepperConfig {
    pub tau: f64,
    /// Number of steps; `n_steps * tau` is the final time.
    pub n_steps: usize,
    pub quadrature: QuadratureRule,
    pub solver: SolverOptions,
    /// Refactor the constant matrix every step even on the linear path;
    /// only useful for checking that reuse is bit-identical.
    pub refactor_each_step: bool,
}

impl StepperConfig {
    pub fn new(tau: f64, n_steps: usize) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "time step must be positive, got {tau}"
            )));
        }
        if n_steps < 1 {
            return Err(Error::InvalidArgument("need at least one time step".into()));
        }
        Ok(StepperConfig {
            tau,
            n_steps,
            quadrature: QuadratureRule::gauss(3),
            solver: SolverOptions::default(),
            refactor_each_step: false,
        })
    }
}

/// Nodal interpolant of the initial datum: the starting state of a run.
pub fn initial_field(spec: &ProblemSpec, mesh: &Mesh, dofs: &DofMap) -> FemField {
    let coeffs = dofs
        .dof_to_node
        .iter()
        .map(|&node| {
            let (x, y) = mesh.nodes[node];
            (spec.initial)(x, y)
        })
        .collect();
    FemField { coeffs, time: 0.0 }
}

/// Statistics accumulated over the solves of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub n_solves: usize,
    pub max_relative_residual: f64,
}

impl RunStats {
    fn new() -> Self {
        RunStats {
            n_solves: 0,
            max_relative_residual: 0.0,
        }
    }

    fn record(&mut self, report: &SolveReport) {
        self.n_solves += 1;
        if report.relative_residual > self.max_relative_residual {
            self.max_relative_residual = report.relative_residual;
        }
    }
}

/// Assembled operators for one (problem, mesh, time step) combination.
pub struct CnStepper<'a> {
    spec: &'a ProblemSpec,
    mesh: &'a Mesh,
    dofs: &'a DofMap,
    config: &'a StepperConfig,
    reaction: Complex64,
    lhs_const: SparseComplexMatrix,
    rhs_const: SparseComplexMatrix,
    source: ResolvedSource<'a>,
    /// Factorization of `lhs_const`, reusable when the reaction term is
    /// absent (the matrix is then step-independent).
    linear_lu: Option<BandLu>,
}

impl<'a> CnStepper<'a> {
    pub fn new(
        spec: &'a ProblemSpec,
        mesh: &'a Mesh,
        dofs: &'a DofMap,
        config: &'a StepperConfig,
    ) -> Result<Self> {
        spec.validate()?;
        if dofs.n_dofs() == 0 {
            return Err(Error::InvalidArgument(
                "mesh has no interior nodes; need at least m = 2".into(),
            ));
        }
        let mass = assemble_mass(mesh, dofs);
        let stiffness = assemble_stiffness(mesh, dofs);
        let inv_tau = 1.0 / config.tau;
        let half_diffusion = Complex64::new(spec.nu / 2.0, spec.eta / 2.0);
        let lhs_const = axpy_matrix(
            Complex64::new(inv_tau - spec.gamma / 2.0, 0.0),
            &mass,
            half_diffusion,
            &stiffness,
        )?;
        let rhs_const = axpy_matrix(
            Complex64::new(inv_tau + spec.gamma / 2.0, 0.0),
            &mass,
            -half_diffusion,
            &stiffness,
        )?;
        let reaction = Complex64::new(spec.kappa, spec.zeta);
        let linear_lu = if reaction.norm_sqr() == 0.0 && config.solver.kind == SolverKind::Direct {
            Some(BandLu::factor(&lhs_const)?)
        } else {
            None
        };
        Ok(CnStepper {
            spec,
            mesh,
            dofs,
            config,
            reaction,
            lhs_const,
            rhs_const,
            source: spec.resolved_source()?,
            linear_lu,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    /// One solve of the common step structure: the previous state plus the
    /// frozen nonlinearity argument determine the new state at `t_new`.
    fn advance(
        &self,
        prev: &FemField,
        frozen: &[Complex64],
        t_new: f64,
    ) -> Result<(FemField, SolveReport)> {
        let n = self.n_dofs();
        if prev.coeffs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: prev.coeffs.len(),
            });
        }
        let mut rhs = self.rhs_const.matvec(&prev.coeffs)?;

        let nonlinear = self.reaction.norm_sqr() != 0.0;
        let lhs_owned;
        let lhs = if nonlinear {
            let weighted = assemble_weighted_mass(
                self.mesh,
                self.dofs,
                self.spec.nonlinearity,
                frozen,
                &self.config.quadrature,
            )?;
            let half_reaction = self.reaction * 0.5;
            let wp = weighted.matvec(&prev.coeffs)?;
            for i in 0..n {
                rhs[i] -= half_reaction * wp[i];
            }
            lhs_owned = axpy_matrix(
                Complex64::new(1.0, 0.0),
                &self.lhs_const,
                half_reaction,
                &weighted,
            )?;
            &lhs_owned
        } else {
            &self.lhs_const
        };

        if !self.source.is_zero() {
            let t_mid = 0.5 * (prev.time + t_new);
            let load = assemble_function_load(
                self.mesh,
                self.dofs,
                |x, y| self.source.eval(x, y, t_mid),
                &self.config.quadrature,
            );
            for i in 0..n {
                rhs[i] += load[i];
            }
        }

        let (coeffs, report) = match self.config.solver.kind {
            SolverKind::Direct => {
                if let (Some(lu), false) = (&self.linear_lu, self.config.refactor_each_step) {
                    solve_factored(lu, lhs, &rhs, self.config.solver.tol)?
                } else {
                    let lu = BandLu::factor(lhs)?;
                    solve_factored(&lu, lhs, &rhs, self.config.solver.tol)?
                }
            }
            SolverKind::BiCgStab => solve_bicgstab(
                lhs,
                &rhs,
                self.config.solver.tol,
                self.config.solver.max_iterations,
            )?,
        };
        Ok((
            FemField {
                coeffs,
                time: t_new,
            },
            report,
        ))
    }

    /// Predictor for the first step: the nonlinearity is frozen at the
    /// initial state.
    pub fn predictor_step(&self, u0: &FemField) -> Result<FemField> {
        Ok(self.predictor_step_reported(u0)?.0)
    }

    fn predictor_step_reported(&self, u0: &FemField) -> Result<(FemField, SolveReport)> {
        self.advance(u0, &u0.coeffs, u0.time + self.config.tau)
    }

    /// Corrector: the nonlinearity is frozen at the average of the
    /// predictor output and the initial state.
    pub fn corrector_step(&self, u0: &FemField, u10: &FemField) -> Result<FemField> {
        Ok(self.corrector_step_reported(u0, u10)?.0)
    }

    fn corrector_step_reported(
        &self,
        u0: &FemField,
        u10: &FemField,
    ) -> Result<(FemField, SolveReport)> {
        let n = self.n_dofs();
        if u10.coeffs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: u10.coeffs.len(),
            });
        }
        let frozen: Vec<Complex64> = (0..n)
            .map(|i| 0.5 * (u10.coeffs[i] + u0.coeffs[i]))
            .collect();
        self.advance(u0, &frozen, u0.time + self.config.tau)
    }

    /// Ordinary step `n >= 2`: the nonlinearity is frozen at the two-step
    /// extrapolation of the previous states.
    pub fn cn_step(&self, u_prev: &FemField, u_prev2: &FemField, n: usize) -> Result<FemField> {
        Ok(self.cn_step_reported(u_prev, u_prev2, n)?.0)
    }

    fn cn_step_reported(
        &self,
        u_prev: &FemField,
        u_prev2: &FemField,
        n: usize,
    ) -> Result<(FemField, SolveReport)> {
        if n < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "extrapolated steps need index >= 2, got {n}"
            )));
        }
        let nd = self.n_dofs();
        if u_prev2.coeffs.len() != nd {
            return Err(Error::DimensionMismatch {
                expected: nd,
                found: u_prev2.coeffs.len(),
            });
        }
        let frozen: Vec<Complex64> = (0..nd)
            .map(|i| 1.5 * u_prev.coeffs[i] - 0.5 * u_prev2.coeffs[i])
            .collect();
        self.advance(u_prev, &frozen, n as f64 * self.config.tau)
    }

    /// Drive the full trajectory, returning the states at the requested
    /// times (which must sit on the time grid) in request order.
    pub fn run(&self, snapshot_times: &[f64]) -> Result<Vec<FemField>> {
        Ok(self.run_with_stats(snapshot_times)?.0)
    }

    pub fn run_with_stats(&self, snapshot_times: &[f64]) -> Result<(Vec<FemField>, RunStats)> {
        let tau = self.config.tau;
        let n_steps = self.config.n_steps;
        let mut wanted: Vec<usize> = Vec::with_capacity(snapshot_times.len());
        for &t in snapshot_times {
            let n = (t / tau).round();
            let idx = if n < 0.0 { usize::MAX } else { n as usize };
            if idx > n_steps || (t - idx as f64 * tau).abs() > 1e-9 * tau.max(t.abs()) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "snapshot time {t} is not a step multiple within the run (tau = {tau}, {n_steps} steps)"
                )));
            }
            wanted.push(idx);
        }

        let mut stats = RunStats::new();
        let mut snapshots: Vec<Option<FemField>> = vec![None; wanted.len()];
        let capture = |field: &FemField, step: usize, snaps: &mut Vec<Option<FemField>>| {
            for (slot, &w) in wanted.iter().enumerate() {
                if w == step {
                    snaps[slot] = Some(field.clone());
                }
            }
        };

        let u0 = initial_field(self.spec, self.mesh, self.dofs);
        capture(&u0, 0, &mut snapshots);

        let step_err = |step: usize| {
            move |e: Error| match e {
                Error::SolverFailure { residual, .. } => Error::StepFailure { step, residual },
                other => other,
            }
        };

        let (u10, report) = self.predictor_step_reported(&u0).map_err(step_err(1))?;
        stats.record(&report);
        let (u1, report) = self
            .corrector_step_reported(&u0, &u10)
            .map_err(step_err(1))?;
        stats.record(&report);
        capture(&u1, 1, &mut snapshots);

        let mut prev2 = u0;
        let mut prev = u1;
        for n in 2..=n_steps {
            let (next, report) = self
                .cn_step_reported(&prev, &prev2, n)
                .map_err(step_err(n))?;
            stats.record(&report);
            capture(&next, n, &mut snapshots);
            prev2 = prev;
            prev = next;
        }

        let fields = snapshots
            .into_iter()
            .map(|s| s.expect("every requested index is <= n_steps"))
            .collect();
        Ok((fields, stats))
    }
}

/// Convenience wrapper: build the stepper and drive it to the end.
pub fn run(
    spec: &ProblemSpec,
    mesh: &Mesh,
    dofs: &DofMap,
    config: &StepperConfig,
    snapshot_times: &[f64],
) -> Result<Vec<FemField>> {
    CnStepper::new(spec, mesh, dofs, config)?.run(snapshot_times)
}
