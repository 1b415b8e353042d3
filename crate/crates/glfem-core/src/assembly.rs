//! Reference-element bilinear basis, Gauss quadrature on the unit square,
//! and assembly of mass/stiffness/weighted-mass matrices and load vectors
//! over the interior degrees of freedom.
//!
//! Mass and stiffness come from exactly integrated element matrices;
//! everything involving a general integrand (sources, nonlinear weights,
//! error norms) goes through tensor Gauss-Legendre quadrature. Dirichlet
//! conditions are imposed by elimination: boundary nodes simply never
//! receive a dof, so assembled operators act on the interior space only.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::SparseComplexMatrix;
use crate::mesh::{DofMap, Mesh};

/// Tensor-product quadrature rule on the reference square `[0, 1]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    /// Largest per-axis polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    /// `n x n` Gauss-Legendre points, exact through degree `2n - 1` per axis.
    pub fn gauss(n: usize) -> Self {
        let (xs, ws) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push((xs[i], xs[j]));
                weights.push(ws[i] * ws[j]);
            }
        }
        QuadratureRule {
            points,
            weights,
            degree: 2 * n - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, by Newton iteration on the
/// Legendre polynomial.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut xs = vec![0.0f64; n];
    let mut ws = vec![0.0f64; n];
    for k in 0..n {
        // Chebyshev-style initial guess on [-1, 1].
        let mut x = (core::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..64 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map from [-1, 1] to [0, 1]; reverse so nodes come out ascending.
        xs[n - 1 - k] = 0.5 * (x + 1.0);
        ws[n - 1 - k] = 0.5 * w;
    }
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    if n == 0 {
        return (p0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Q1 shape function values at reference coordinates, nodes ordered
/// counterclockwise from the lower-left corner.
pub(crate) fn shape_values(xi: f64, eta: f64) -> [f64; 4] {
    [
        (1.0 - xi) * (1.0 - eta),
        xi * (1.0 - eta),
        xi * eta,
        (1.0 - xi) * eta,
    ]
}

/// Reference gradients (d/dxi, d/deta) of the Q1 shape functions.
pub(crate) fn shape_gradients(xi: f64, eta: f64) -> [(f64, f64); 4] {
    [
        (-(1.0 - eta), -(1.0 - xi)),
        (1.0 - eta, -xi),
        (eta, xi),
        (-eta, 1.0 - xi),
    ]
}

/// Value and reference gradient of one shape function.
pub fn basis_eval(local_index: usize, point: (f64, f64)) -> Result<(f64, (f64, f64))> {
    if local_index > 3 {
        return Err(Error::InvalidArgument(format!(
            "local basis index must be 0..=3, got {local_index}"
        )));
    }
    let (xi, eta) = point;
    Ok((
        shape_values(xi, eta)[local_index],
        shape_gradients(xi, eta)[local_index],
    ))
}

/// Exactly integrated Q1 element matrices for an `hx x hy` rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub mass: [[f64; 4]; 4],
    pub stiffness: [[f64; 4]; 4],
}

pub fn element_matrices(hx: f64, hy: f64) -> Result<ElementMatrices> {
    if !(hx > 0.0) || !(hy > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "element sizes must be positive, got {hx} x {hy}"
        )));
    }
    const MASS_PATTERN: [[f64; 4]; 4] = [
        [4.0, 2.0, 1.0, 2.0],
        [2.0, 4.0, 2.0, 1.0],
        [1.0, 2.0, 4.0, 2.0],
        [2.0, 1.0, 2.0, 4.0],
    ];
    const KXX: [[f64; 4]; 4] = [
        [2.0, -2.0, -1.0, 1.0],
        [-2.0, 2.0, 1.0, -1.0],
        [-1.0, 1.0, 2.0, -2.0],
        [1.0, -1.0, -2.0, 2.0],
    ];
    const KYY: [[f64; 4]; 4] = [
        [2.0, 1.0, -1.0, -2.0],
        [1.0, 2.0, -2.0, -1.0],
        [-1.0, -2.0, 2.0, 1.0],
        [-2.0, -1.0, 1.0, 2.0],
    ];
    let mut mass = [[0.0; 4]; 4];
    let mut stiffness = [[0.0; 4]; 4];
    let m_scale = hx * hy / 36.0;
    let sx = hy / hx / 6.0;
    let sy = hx / hy / 6.0;
    for i in 0..4 {
        for j in 0..4 {
            mass[i][j] = m_scale * MASS_PATTERN[i][j];
            stiffness[i][j] = sx * KXX[i][j] + sy * KYY[i][j];
        }
    }
    Ok(ElementMatrices { mass, stiffness })
}

fn scatter_element(
    mesh: &Mesh,
    dofs: &DofMap,
    e: usize,
    local: &[[f64; 4]; 4],
    triplets: &mut Vec<(usize, usize, Complex64)>,
) {
    let nodes = mesh.elements[e];
    for a in 0..4 {
        let Some(row) = dofs.node_to_dof[nodes[a]] else {
            continue;
        };
        for b in 0..4 {
            let Some(col) = dofs.node_to_dof[nodes[b]] else {
                continue;
            };
            triplets.push((row, col, Complex64::new(local[a][b], 0.0)));
        }
    }
}

/// Interior-dof mass matrix (real entries in complex storage).
pub fn assemble_mass(mesh: &Mesh, dofs: &DofMap) -> SparseComplexMatrix {
    let em = element_matrices(mesh.hx, mesh.hy).expect("mesh has positive element sizes");
    assemble_pattern(mesh, dofs, &em.mass)
}

/// Interior-dof stiffness matrix (real entries in complex storage).
pub fn assemble_stiffness(mesh: &Mesh, dofs: &DofMap) -> SparseComplexMatrix {
    let em = element_matrices(mesh.hx, mesh.hy).expect("mesh has positive element sizes");
    assemble_pattern(mesh, dofs, &em.stiffness)
}

fn assemble_pattern(mesh: &Mesh, dofs: &DofMap, local: &[[f64; 4]; 4]) -> SparseComplexMatrix {
    let mut triplets = Vec::with_capacity(16 * mesh.n_elements());
    for e in 0..mesh.n_elements() {
        scatter_element(mesh, dofs, e, local, &mut triplets);
    }
    SparseComplexMatrix::from_triplets(dofs.n_dofs(), triplets)
}

/// Load vector with entries `\int w(x, y) phi_i` by elementwise quadrature.
pub fn assemble_function_load<F>(
    mesh: &Mesh,
    dofs: &DofMap,
    w: F,
    rule: &QuadratureRule,
) -> Vec<Complex64>
where
    F: Fn(f64, f64) -> Complex64,
{
    let mut out = vec![Complex64::new(0.0, 0.0); dofs.n_dofs()];
    let jac = mesh.hx * mesh.hy;
    for e in 0..mesh.n_elements() {
        let (ox, oy) = mesh.element_origin(e);
        let nodes = mesh.elements[e];
        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let x = ox + xi * mesh.hx;
            let y = oy + eta * mesh.hy;
            let wv = w(x, y) * (jac * rule.weights[q]);
            let shapes = shape_values(xi, eta);
            for a in 0..4 {
                if let Some(d) = dofs.node_to_dof[nodes[a]] {
                    out[d] += wv * shapes[a];
                }
            }
        }
    }
    out
}

/// Gather the four nodal values of a coefficient vector on element `e`,
/// with zeros on boundary nodes.
pub(crate) fn gather_local(
    mesh: &Mesh,
    dofs: &DofMap,
    coeffs: &[Complex64],
    e: usize,
) -> [Complex64; 4] {
    let nodes = mesh.elements[e];
    let mut local = [Complex64::new(0.0, 0.0); 4];
    for a in 0..4 {
        if let Some(d) = dofs.node_to_dof[nodes[a]] {
            local[a] = coeffs[d];
        }
    }
    local
}

/// Load vector with entries `\int f(|u_hat|^2) u_tilde phi_i`, where both
/// fields are evaluated at quadrature points from their Q1 expansions.
pub fn assemble_nonlinear_load<F>(
    mesh: &Mesh,
    dofs: &DofMap,
    f: F,
    u_hat: &[Complex64],
    u_tilde: &[Complex64],
    rule: &QuadratureRule,
) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> f64,
{
    let n = dofs.n_dofs();
    if u_hat.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u_hat.len(),
        });
    }
    if u_tilde.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u_tilde.len(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let jac = mesh.hx * mesh.hy;
    for e in 0..mesh.n_elements() {
        let hat = gather_local(mesh, dofs, u_hat, e);
        let tilde = gather_local(mesh, dofs, u_tilde, e);
        let nodes = mesh.elements[e];
        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let shapes = shape_values(xi, eta);
            let mut hat_q = Complex64::new(0.0, 0.0);
            let mut tilde_q = Complex64::new(0.0, 0.0);
            for a in 0..4 {
                hat_q += hat[a] * shapes[a];
                tilde_q += tilde[a] * shapes[a];
            }
            let weight = f(hat_q.norm_sqr()) * jac * rule.weights[q];
            let contrib = tilde_q * weight;
            for a in 0..4 {
                if let Some(d) = dofs.node_to_dof[nodes[a]] {
                    out[d] += contrib * shapes[a];
                }
            }
        }
    }
    Ok(out)
}

/// Weighted mass matrix with entries `\int f(|u_hat|^2) phi_j phi_i`.
///
/// This is the operator the linearized scheme puts on both sides of each
/// step; its action on a coefficient vector matches
/// [`assemble_nonlinear_load`] under the same rule.
pub fn assemble_weighted_mass<F>(
    mesh: &Mesh,
    dofs: &DofMap,
    f: F,
    u_hat: &[Complex64],
    rule: &QuadratureRule,
) -> Result<SparseComplexMatrix>
where
    F: Fn(f64) -> f64,
{
    let n = dofs.n_dofs();
    if u_hat.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u_hat.len(),
        });
    }
    let jac = mesh.hx * mesh.hy;
    let mut triplets = Vec::with_capacity(16 * mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let hat = gather_local(mesh, dofs, u_hat, e);
        let mut local = [[0.0f64; 4]; 4];
        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let shapes = shape_values(xi, eta);
            let mut hat_q = Complex64::new(0.0, 0.0);
            for a in 0..4 {
                hat_q += hat[a] * shapes[a];
            }
            let weight = f(hat_q.norm_sqr()) * jac * rule.weights[q];
            for a in 0..4 {
                let wa = weight * shapes[a];
                for b in 0..4 {
                    local[a][b] += wa * shapes[b];
                }
            }
        }
        scatter_element(mesh, dofs, e, &local, &mut triplets);
    }
    Ok(SparseComplexMatrix::from_triplets(n, triplets))
}
