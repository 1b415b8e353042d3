//! Quadrature-based L2/H1 error norms against exact solutions, the exact
//! H1 distance between two discrete fields, and convergence orders.
//!
//! Norms against a (generally non-polynomial) exact solution use the
//! caller's Gauss rule per element; distances between two bilinear fields
//! reduce to quadratic forms with the exactly integrated mass and
//! stiffness matrices.

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::assembly::{
    assemble_mass, assemble_stiffness, gather_local, shape_gradients, shape_values, QuadratureRule,
};
use crate::error::{Error, Result};
use crate::mesh::{DofMap, Mesh};
use crate::projections::{interpolate, PostprocessedField};
use crate::stepper::FemField;

/// Anything the error quadrature can sample element by element.
pub trait SampledField {
    fn value_and_gradient(
        &self,
        element: usize,
        xi: f64,
        eta: f64,
    ) -> (Complex64, (Complex64, Complex64));
}

/// A bilinear interior field viewed through its Q1 expansion.
pub struct Q1Sample<'a> {
    pub field: &'a FemField,
    pub mesh: &'a Mesh,
    pub dofs: &'a DofMap,
}

impl SampledField for Q1Sample<'_> {
    fn value_and_gradient(
        &self,
        element: usize,
        xi: f64,
        eta: f64,
    ) -> (Complex64, (Complex64, Complex64)) {
        let local = gather_local(self.mesh, self.dofs, &self.field.coeffs, element);
        let shapes = shape_values(xi, eta);
        let grads = shape_gradients(xi, eta);
        let mut v = Complex64::new(0.0, 0.0);
        let mut gx = Complex64::new(0.0, 0.0);
        let mut gy = Complex64::new(0.0, 0.0);
        for a in 0..4 {
            v += local[a] * shapes[a];
            gx += local[a] * (grads[a].0 / self.mesh.hx);
            gy += local[a] * (grads[a].1 / self.mesh.hy);
        }
        (v, (gx, gy))
    }
}

impl SampledField for PostprocessedField<'_> {
    fn value_and_gradient(
        &self,
        element: usize,
        xi: f64,
        eta: f64,
    ) -> (Complex64, (Complex64, Complex64)) {
        self.sample_in_element(element, xi, eta)
    }
}

/// Squared L2 and H1-seminorm errors between an exact solution and a
/// sampled field, accumulated elementwise with the given rule.
fn squared_errors<U, G, S>(
    u: U,
    grad_u: G,
    sample: &S,
    mesh: &Mesh,
    rule: &QuadratureRule,
) -> (f64, f64)
where
    U: Fn(f64, f64) -> Complex64,
    G: Fn(f64, f64) -> (Complex64, Complex64),
    S: SampledField + ?Sized,
{
    let jac = mesh.hx * mesh.hy;
    let mut acc_l2 = 0.0f64;
    let mut acc_semi = 0.0f64;
    for e in 0..mesh.n_elements() {
        let (ox, oy) = mesh.element_origin(e);
        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let x = ox + xi * mesh.hx;
            let y = oy + eta * mesh.hy;
            let w = jac * rule.weights[q];
            let (v, (gx, gy)) = sample.value_and_gradient(e, xi, eta);
            let dv = u(x, y) - v;
            let (ex, ey) = grad_u(x, y);
            acc_l2 += dv.norm_sqr() * w;
            acc_semi += ((ex - gx).norm_sqr() + (ey - gy).norm_sqr()) * w;
        }
    }
    (acc_l2, acc_semi)
}

/// Full H1 error `sqrt(||u - v||_0^2 + ||grad(u - v)||_0^2)`.
pub fn h1_error<U, G, S>(u: U, grad_u: G, sample: &S, mesh: &Mesh, rule: &QuadratureRule) -> f64
where
    U: Fn(f64, f64) -> Complex64,
    G: Fn(f64, f64) -> (Complex64, Complex64),
    S: SampledField + ?Sized,
{
    let (l2, semi) = squared_errors(u, grad_u, sample, mesh, rule);
    (l2 + semi).sqrt()
}

/// L2 error `||u - v||_0`.
pub fn l2_error<U, G, S>(u: U, grad_u: G, sample: &S, mesh: &Mesh, rule: &QuadratureRule) -> f64
where
    U: Fn(f64, f64) -> Complex64,
    G: Fn(f64, f64) -> (Complex64, Complex64),
    S: SampledField + ?Sized,
{
    squared_errors(u, grad_u, sample, mesh, rule).0.sqrt()
}

/// H1 distance between the nodal interpolant of `u` and a discrete field:
/// both live in the interior bilinear space, so the norm is the exact
/// quadratic form with the analytic mass and stiffness matrices.
pub fn superclose_error<U>(u: U, field: &FemField, mesh: &Mesh, dofs: &DofMap) -> f64
where
    U: Fn(f64, f64) -> Complex64,
{
    let interpolant = interpolate(u, mesh, dofs);
    let diff: alloc::vec::Vec<Complex64> = interpolant
        .coeffs
        .iter()
        .zip(field.coeffs.iter())
        .map(|(a, b)| a - b)
        .collect();
    let mass = assemble_mass(mesh, dofs);
    let stiffness = assemble_stiffness(mesh, dofs);
    let md = mass.matvec(&diff).expect("matching dimensions");
    let kd = stiffness.matvec(&diff).expect("matching dimensions");
    let mut acc = 0.0f64;
    for i in 0..diff.len() {
        acc += (diff[i].conj() * (md[i] + kd[i])).re;
    }
    acc.max(0.0).sqrt()
}

/// Observed order on a halving refinement: `log2(e_coarse / e_fine)`.
pub fn convergence_order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0) || !(e_fine > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "convergence order needs positive errors, got {e_coarse} and {e_fine}"
        )));
    }
    Ok((e_coarse / e_fine).ln() / core::f64::consts::LN_2)
}
