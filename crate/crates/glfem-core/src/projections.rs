//! Nodal interpolation, the Ritz (elliptic) projection, and biquadratic
//! postprocessing on 2x2 macro patches.
//!
//! The postprocessing operator takes the nine nodal values a bilinear
//! field attains on each macro cell (corners, edge midpoints, center) and
//! interpolates them with a tensor biquadratic. The result is evaluable
//! anywhere, with an analytic gradient that is smooth inside each patch
//! and generally discontinuous across patch interfaces.

use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::assembly::{assemble_stiffness, QuadratureRule};
use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::mesh::{DofMap, MacroPatchSet, Mesh};
use crate::stepper::FemField;

/// Nodal interpolant: coefficients are the function values at the interior
/// nodes.
pub fn interpolate<F>(u: F, mesh: &Mesh, dofs: &DofMap) -> FemField
where
    F: Fn(f64, f64) -> Complex64,
{
    let coeffs = dofs
        .dof_to_node
        .iter()
        .map(|&node| {
            let (x, y) = mesh.nodes[node];
            u(x, y)
        })
        .collect();
    FemField { coeffs, time: 0.0 }
}

/// Ritz projection: the interior field whose gradient is quadrature-
/// orthogonal to the gradient error, obtained by solving the stiffness
/// system with load entries `\int grad u . grad phi_i`.
pub fn ritz_project<G>(
    grad_u: G,
    mesh: &Mesh,
    dofs: &DofMap,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<FemField>
where
    G: Fn(f64, f64) -> (Complex64, Complex64),
{
    let stiffness = assemble_stiffness(mesh, dofs);
    let rhs = gradient_load(grad_u, mesh, dofs, rule);
    let (coeffs, _) = solve(&stiffness, &rhs, tol)?;
    Ok(FemField { coeffs, time: 0.0 })
}

/// Load vector with entries `\int grad u . grad phi_i` by elementwise
/// quadrature.
pub fn gradient_load<G>(
    grad_u: G,
    mesh: &Mesh,
    dofs: &DofMap,
    rule: &QuadratureRule,
) -> Vec<Complex64>
where
    G: Fn(f64, f64) -> (Complex64, Complex64),
{
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); dofs.n_dofs()];
    let jac = mesh.hx * mesh.hy;
    for e in 0..mesh.n_elements() {
        let (ox, oy) = mesh.element_origin(e);
        let nodes = mesh.elements[e];
        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let x = ox + xi * mesh.hx;
            let y = oy + eta * mesh.hy;
            let (gx, gy) = grad_u(x, y);
            let w = jac * rule.weights[q];
            let grads = crate::assembly::shape_gradients(xi, eta);
            for a in 0..4 {
                if let Some(d) = dofs.node_to_dof[nodes[a]] {
                    out[d] += (gx * (grads[a].0 / mesh.hx) + gy * (grads[a].1 / mesh.hy)) * w;
                }
            }
        }
    }
    out
}

/// Piecewise-biquadratic function defined patch by patch from the nine
/// nodal values of a bilinear field.
pub struct PostprocessedField<'a> {
    mesh: &'a Mesh,
    patches_per_axis: usize,
    /// Row-major 3x3 nodal values per patch.
    values: Vec<[Complex64; 9]>,
}

/// Quadratic Lagrange basis on [0, 1] with nodes {0, 1/2, 1}.
fn q2_values(s: f64) -> [f64; 3] {
    [
        2.0 * s * s - 3.0 * s + 1.0,
        4.0 * s - 4.0 * s * s,
        2.0 * s * s - s,
    ]
}

fn q2_derivatives(s: f64) -> [f64; 3] {
    [4.0 * s - 3.0, 4.0 - 8.0 * s, 4.0 * s - 1.0]
}

impl<'a> PostprocessedField<'a> {
    /// Macro-cell side lengths.
    fn cell_sizes(&self) -> (f64, f64) {
        (2.0 * self.mesh.hx, 2.0 * self.mesh.hy)
    }

    /// Patch index and local coordinates for a physical point (clamped to
    /// the domain).
    fn locate(&self, x: f64, y: f64) -> (usize, f64, f64) {
        let (cx, cy) = self.cell_sizes();
        let fx = ((x - self.mesh.domain.x0) / cx).floor();
        let fy = ((y - self.mesh.domain.y0) / cy).floor();
        let pi = (fx.max(0.0) as usize).min(self.patches_per_axis - 1);
        let pj = (fy.max(0.0) as usize).min(self.patches_per_axis - 1);
        let s = (x - self.mesh.domain.x0) / cx - pi as f64;
        let t = (y - self.mesh.domain.y0) / cy - pj as f64;
        (pj * self.patches_per_axis + pi, s, t)
    }

    /// Patch index and local coordinates for a point given by element
    /// index and element-local coordinates; exact at patch interfaces.
    pub fn locate_in_element(&self, e: usize, xi: f64, eta: f64) -> (usize, f64, f64) {
        let i = e % self.mesh.m;
        let j = e / self.mesh.m;
        let s = ((i % 2) as f64 + xi) / 2.0;
        let t = ((j % 2) as f64 + eta) / 2.0;
        (self.patches_per_axis * (j / 2) + i / 2, s, t)
    }

    fn eval_local(&self, patch: usize, s: f64, t: f64) -> Complex64 {
        let ls = q2_values(s);
        let lt = q2_values(t);
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..3 {
            for a in 0..3 {
                acc += self.values[patch][b * 3 + a] * (ls[a] * lt[b]);
            }
        }
        acc
    }

    fn eval_gradient_local(&self, patch: usize, s: f64, t: f64) -> (Complex64, Complex64) {
        let (cx, cy) = self.cell_sizes();
        let ls = q2_values(s);
        let lt = q2_values(t);
        let ds = q2_derivatives(s);
        let dt = q2_derivatives(t);
        let mut gx = Complex64::new(0.0, 0.0);
        let mut gy = Complex64::new(0.0, 0.0);
        for b in 0..3 {
            for a in 0..3 {
                let v = self.values[patch][b * 3 + a];
                gx += v * (ds[a] * lt[b] / cx);
                gy += v * (ls[a] * dt[b] / cy);
            }
        }
        (gx, gy)
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let (p, s, t) = self.locate(x, y);
        self.eval_local(p, s, t)
    }

    pub fn eval_gradient(&self, x: f64, y: f64) -> (Complex64, Complex64) {
        let (p, s, t) = self.locate(x, y);
        self.eval_gradient_local(p, s, t)
    }

    /// Value and gradient looked up through an element index, used by the
    /// error quadrature so interface points land in the right patch.
    pub fn sample_in_element(
        &self,
        e: usize,
        xi: f64,
        eta: f64,
    ) -> (Complex64, (Complex64, Complex64)) {
        let (p, s, t) = self.locate_in_element(e, xi, eta);
        (self.eval_local(p, s, t), self.eval_gradient_local(p, s, t))
    }
}

/// Biquadratic macro-patch interpolation of a bilinear field.
pub fn postprocess<'a>(
    field: &FemField,
    patches: &MacroPatchSet,
    mesh: &'a Mesh,
    dofs: &DofMap,
) -> Result<PostprocessedField<'a>> {
    if mesh.m % 2 != 0 {
        return Err(Error::UnsupportedMesh(alloc::format!(
            "postprocessing needs an even subdivision count, got {}",
            mesh.m
        )));
    }
    if field.coeffs.len() != dofs.n_dofs() {
        return Err(Error::DimensionMismatch {
            expected: dofs.n_dofs(),
            found: field.coeffs.len(),
        });
    }
    let values = patches
        .patches
        .iter()
        .map(|patch| {
            let mut local = [Complex64::new(0.0, 0.0); 9];
            for (k, &node) in patch.nodes.iter().enumerate() {
                if let Some(d) = dofs.node_to_dof[node] {
                    local[k] = field.coeffs[d];
                }
            }
            local
        })
        .collect();
    Ok(PostprocessedField {
        mesh,
        patches_per_axis: patches.patches_per_axis,
        values,
    })
}
