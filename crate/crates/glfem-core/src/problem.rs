//! Problem definitions: PDE coefficients, nonlinearity, exact solution,
//! initial datum, and source term.
//!
//! The equation solved is
//!
//! ```text
//!     u_t - (nu + i*eta) Δu + (kappa + i*zeta) f(|u|^2) u - gamma u = g
//! ```
//!
//! with `u = 0` on the boundary. A problem may carry a closed-form exact
//! solution (value, gradient, time derivative, Laplacian); the manufactured
//! source is then derived from those closed forms rather than from runtime
//! differentiation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::Rect;

pub type ScalarFn = fn(f64) -> f64;
pub type SpaceFn = fn(f64, f64) -> Complex64;
pub type SpaceTimeFn = fn(f64, f64, f64) -> Complex64;
pub type SpaceTimeGradFn = fn(f64, f64, f64) -> (Complex64, Complex64);

/// Closed-form exact solution together with the derivatives the
/// manufactured source needs.
#[derive(Clone, Copy)]
pub struct ExactSolution {
    pub value: SpaceTimeFn,
    pub gradient: SpaceTimeGradFn,
    pub time_derivative: SpaceTimeFn,
    pub laplacian: SpaceTimeFn,
}

#[derive(Clone, Copy)]
pub enum SourceTerm {
    Zero,
    Function(SpaceTimeFn),
    /// Source defined by substituting the exact solution into the PDE.
    Manufactured,
}

/// One PDE instance.
#[derive(Clone, Copy)]
pub struct ProblemSpec {
    pub nu: f64,
    pub eta: f64,
    pub kappa: f64,
    pub zeta: f64,
    pub gamma: f64,
    /// Real nonlinearity `f(s)` applied to `s = |u|^2`.
    pub nonlinearity: ScalarFn,
    pub exact: Option<ExactSolution>,
    pub initial: SpaceFn,
    pub source: SourceTerm,
    pub domain: Rect,
    pub t_final: f64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "diffusion coefficient nu must be positive, got {}",
                self.nu
            )));
        }
        if !(self.domain.width() > 0.0) || !(self.domain.height() > 0.0) {
            return Err(Error::InvalidArgument("degenerate domain".into()));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "final time must be positive, got {}",
                self.t_final
            )));
        }
        if matches!(self.source, SourceTerm::Manufactured) && self.exact.is_none() {
            return Err(Error::MissingExactSolution);
        }
        Ok(())
    }

    pub fn eval_exact(&self, x: f64, y: f64, t: f64) -> Result<Complex64> {
        let exact = self.exact.as_ref().ok_or(Error::MissingExactSolution)?;
        Ok((exact.value)(x, y, t))
    }

    pub fn eval_exact_gradient(&self, x: f64, y: f64, t: f64) -> Result<(Complex64, Complex64)> {
        let exact = self.exact.as_ref().ok_or(Error::MissingExactSolution)?;
        Ok((exact.gradient)(x, y, t))
    }

    /// Source obtained by substituting the exact solution into the strong
    /// form; requires a closed-form exact solution.
    pub fn manufactured_source(&self) -> Result<ManufacturedSource<'_>> {
        if self.exact.is_none() {
            return Err(Error::MissingExactSolution);
        }
        Ok(ManufacturedSource { spec: self })
    }

    /// Resolve the source term into an infallible pointwise evaluator.
    pub fn resolved_source(&self) -> Result<ResolvedSource<'_>> {
        match self.source {
            SourceTerm::Zero => Ok(ResolvedSource::Zero),
            SourceTerm::Function(g) => Ok(ResolvedSource::Function(g)),
            SourceTerm::Manufactured => {
                Ok(ResolvedSource::Manufactured(self.manufactured_source()?))
            }
        }
    }

    /// The plane-wave benchmark problem: all coefficients 1, cubic
    /// nonlinearity `f(s) = s`, on the unit square, with exact solution
    /// `u = e^{i(t - 2x - 2y)} x y (1 - x)(1 - y)` and the matching
    /// manufactured source.
    pub fn plane_wave() -> ProblemSpec {
        ProblemSpec {
            nu: 1.0,
            eta: 1.0,
            kappa: 1.0,
            zeta: 1.0,
            gamma: 1.0,
            nonlinearity: identity_nonlinearity,
            exact: Some(ExactSolution {
                value: plane_wave_value,
                gradient: plane_wave_gradient,
                time_derivative: plane_wave_dt,
                laplacian: plane_wave_laplacian,
            }),
            initial: plane_wave_initial,
            source: SourceTerm::Manufactured,
            domain: Rect::unit_square(),
            t_final: 1.0,
        }
    }
}

/// Pointwise evaluator for the manufactured source of a problem.
#[derive(Clone, Copy)]
pub struct ManufacturedSource<'a> {
    spec: &'a ProblemSpec,
}

impl ManufacturedSource<'_> {
    pub fn eval(&self, x: f64, y: f64, t: f64) -> Complex64 {
        let exact = self.spec.exact.as_ref().expect("checked at construction");
        let u = (exact.value)(x, y, t);
        let ut = (exact.time_derivative)(x, y, t);
        let lap = (exact.laplacian)(x, y, t);
        let diffusion = Complex64::new(self.spec.nu, self.spec.eta);
        let reaction = Complex64::new(self.spec.kappa, self.spec.zeta);
        ut - diffusion * lap + reaction * (self.spec.nonlinearity)(u.norm_sqr()) * u
            - self.spec.gamma * u
    }
}

/// Source term resolved to a concrete evaluator.
#[derive(Clone, Copy)]
pub enum ResolvedSource<'a> {
    Zero,
    Function(SpaceTimeFn),
    Manufactured(ManufacturedSource<'a>),
}

impl ResolvedSource<'_> {
    pub fn is_zero(&self) -> bool {
        matches!(self, ResolvedSource::Zero)
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> Complex64 {
        match self {
            ResolvedSource::Zero => Complex64::new(0.0, 0.0),
            ResolvedSource::Function(g) => g(x, y, t),
            ResolvedSource::Manufactured(m) => m.eval(x, y, t),
        }
    }
}

fn identity_nonlinearity(s: f64) -> f64 {
    s
}

fn phase(x: f64, y: f64, t: f64) -> Complex64 {
    Complex64::new(0.0, t - 2.0 * x - 2.0 * y).exp()
}

fn plane_wave_value(x: f64, y: f64, t: f64) -> Complex64 {
    phase(x, y, t) * (x * (1.0 - x) * y * (1.0 - y))
}

fn plane_wave_initial(x: f64, y: f64) -> Complex64 {
    plane_wave_value(x, y, 0.0)
}

fn plane_wave_dt(x: f64, y: f64, t: f64) -> Complex64 {
    Complex64::new(0.0, 1.0) * plane_wave_value(x, y, t)
}

fn plane_wave_gradient(x: f64, y: f64, t: f64) -> (Complex64, Complex64) {
    let p = phase(x, y, t);
    let bx = x * (1.0 - x);
    let by = y * (1.0 - y);
    let dbx = 1.0 - 2.0 * x;
    let dby = 1.0 - 2.0 * y;
    let two_i = Complex64::new(0.0, 2.0);
    let ux = p * by * (Complex64::new(dbx, 0.0) - two_i * bx);
    let uy = p * bx * (Complex64::new(dby, 0.0) - two_i * by);
    (ux, uy)
}

fn plane_wave_laplacian(x: f64, y: f64, t: f64) -> Complex64 {
    let p = phase(x, y, t);
    let bx = x * (1.0 - x);
    let by = y * (1.0 - y);
    let dbx = 1.0 - 2.0 * x;
    let dby = 1.0 - 2.0 * y;
    let four_i = Complex64::new(0.0, 4.0);
    // Each second derivative of e^{-2i s} b(s) is e^{-2i s} (b'' - 4i b' - 4 b).
    let uxx = Complex64::new(-2.0 - 4.0 * bx, 0.0) - four_i * dbx;
    let uyy = Complex64::new(-2.0 - 4.0 * by, 0.0) - four_i * dby;
    p * (by * uxx + bx * uyy)
}
