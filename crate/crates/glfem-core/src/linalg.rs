//! Complex sparse matrices in compressed sparse-row form and the linear
//! solvers used once per time step.
//!
//! The step matrices of the scheme are banded (nine-point stencil under
//! lexicographic dof order), so the direct path extracts the band and runs
//! an unpivoted LU there; every solve is verified against the requested
//! relative residual and fails loudly otherwise. An unpreconditioned
//! BiCGStab is available behind [`SolverKind::BiCgStab`] for large meshes
//! where the band factorization would not fit in memory.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Square complex matrix in CSR layout. Column indices are strictly
/// increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseComplexMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseComplexMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed in
    /// sorted order, so the result is independent of triplet order up to
    /// the usual floating-point non-associativity of equal keys.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_offsets = vec![0usize; n + 1];
        for &(r, _, _) in &merged {
            row_offsets[r + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = merged.iter().map(|t| t.1).collect();
        let values = merged.iter().map(|t| t.2).collect();
        SparseComplexMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseComplexMatrix {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as parallel (columns, values) slices.
    pub fn row(&self, i: usize) -> (&[usize], &[Complex64]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at (i, j), zero if the position is not in the pattern.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals.iter()) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// Largest |i - j| over stored entries.
    pub fn half_bandwidth(&self) -> usize {
        let mut b = 0usize;
        for i in 0..self.n {
            let (cols, _) = self.row(i);
            for &c in cols {
                b = b.max(i.abs_diff(c));
            }
        }
        b
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals.iter()) {
                if (v - self.get(j, i)).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Entrywise `alpha * A + beta * B` with merged sparsity.
pub fn axpy_matrix(
    alpha: Complex64,
    a: &SparseComplexMatrix,
    beta: Complex64,
    b: &SparseComplexMatrix,
) -> Result<SparseComplexMatrix> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            found: b.n,
        });
    }
    let n = a.n;
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(a.nnz().max(b.nnz()));
    let mut values = Vec::with_capacity(a.nnz().max(b.nnz()));
    row_offsets.push(0);
    for i in 0..n {
        let (ac, av) = a.row(i);
        let (bc, bv) = b.row(i);
        let (mut p, mut q) = (0usize, 0usize);
        while p < ac.len() || q < bc.len() {
            let ca = ac.get(p).copied().unwrap_or(usize::MAX);
            let cb = bc.get(q).copied().unwrap_or(usize::MAX);
            if ca < cb {
                col_indices.push(ca);
                values.push(alpha * av[p]);
                p += 1;
            } else if cb < ca {
                col_indices.push(cb);
                values.push(beta * bv[q]);
                q += 1;
            } else {
                col_indices.push(ca);
                values.push(alpha * av[p] + beta * bv[q]);
                p += 1;
                q += 1;
            }
        }
        row_offsets.push(col_indices.len());
    }
    Ok(SparseComplexMatrix {
        n,
        row_offsets,
        col_indices,
        values,
    })
}

/// Outcome of one linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// Iteration count; 0 for the direct path.
    pub iterations: usize,
    /// `||Ax - b|| / ||b||` (absolute residual when `b = 0`).
    pub relative_residual: f64,
    /// Elapsed seconds; 0 when built without `std`.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Direct,
    BiCgStab,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub kind: SolverKind,
    pub tol: f64,
    /// Iteration cap for the iterative path; ignored by the direct one.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kind: SolverKind::Direct,
            tol: 1e-10,
            max_iterations: 20_000,
        }
    }
}

/// Unpivoted LU factorization of the band of a sparse matrix.
///
/// The step matrices have a positive-definite real part for the
/// coefficient ranges the scheme accepts, which keeps the unpivoted
/// factorization benign; every solve re-checks the residual regardless.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    band: usize,
    /// Row-major band storage: row i holds columns i-band ..= i+band.
    data: Vec<Complex64>,
}

impl BandLu {
    pub fn factor(a: &SparseComplexMatrix) -> Result<Self> {
        let n = a.n();
        let band = a.half_bandwidth();
        let width = 2 * band + 1;
        let mut data = vec![Complex64::new(0.0, 0.0); n * width];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals.iter()) {
                data[i * width + (c + band - i)] = v;
            }
        }
        for k in 0..n {
            let pivot = data[k * width + band];
            if pivot.norm() == 0.0 {
                return Err(Error::SolverFailure {
                    residual: f64::INFINITY,
                    iterations: 0,
                });
            }
            let i_max = (k + band).min(n - 1);
            for i in (k + 1)..=i_max {
                // Column k sits at offset k - i + band in row i.
                let l = data[i * width + (k + band - i)] / pivot;
                data[i * width + (k + band - i)] = l;
                if l.norm() != 0.0 {
                    let j_max = (k + band).min(n - 1);
                    for j in (k + 1)..=j_max {
                        let upper = data[k * width + (j + band - k)];
                        data[i * width + (j + band - i)] -= l * upper;
                    }
                }
            }
        }
        Ok(BandLu { n, band, data })
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: rhs.len(),
            });
        }
        let width = 2 * self.band + 1;
        let mut x = rhs.to_vec();
        // Forward substitution with the unit lower factor.
        for i in 0..self.n {
            let j_lo = i.saturating_sub(self.band);
            let mut acc = x[i];
            for j in j_lo..i {
                acc -= self.data[i * width + (j + self.band - i)] * x[j];
            }
            x[i] = acc;
        }
        // Back substitution with the upper factor.
        for i in (0..self.n).rev() {
            let j_hi = (i + self.band).min(self.n - 1);
            let mut acc = x[i];
            for j in (i + 1)..=j_hi {
                acc -= self.data[i * width + (j + self.band - i)] * x[j];
            }
            x[i] = acc / self.data[i * width + self.band];
        }
        Ok(x)
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `||Ax - b||` relative to `||b||` (absolute for a zero right-hand side).
pub fn relative_residual(a: &SparseComplexMatrix, x: &[Complex64], b: &[Complex64]) -> Result<f64> {
    let ax = a.matvec(x)?;
    let mut diff = 0.0f64;
    for i in 0..b.len() {
        diff += (ax[i] - b[i]).norm_sqr();
    }
    let nb = norm2(b);
    Ok(if nb > 0.0 {
        diff.sqrt() / nb
    } else {
        diff.sqrt()
    })
}

#[cfg(feature = "std")]
fn wall_clock() -> Option<std::time::Instant> {
    Some(std::time::Instant::now())
}

#[cfg(not(feature = "std"))]
fn wall_clock() -> Option<core::convert::Infallible> {
    None
}

#[cfg(feature = "std")]
fn elapsed_seconds(start: Option<std::time::Instant>) -> f64 {
    start.map(|t| t.elapsed().as_secs_f64()).unwrap_or(0.0)
}

#[cfg(not(feature = "std"))]
fn elapsed_seconds(_start: Option<core::convert::Infallible>) -> f64 {
    0.0
}

/// Direct solve: factor the band, substitute, verify the residual.
pub fn solve(
    a: &SparseComplexMatrix,
    b: &[Complex64],
    tol: f64,
) -> Result<(Vec<Complex64>, SolveReport)> {
    let start = wall_clock();
    let lu = BandLu::factor(a)?;
    let x = lu.solve(b)?;
    finish_direct(a, x, b, tol, start)
}

/// Solve with a previously computed factorization of the same matrix.
pub fn solve_factored(
    lu: &BandLu,
    a: &SparseComplexMatrix,
    b: &[Complex64],
    tol: f64,
) -> Result<(Vec<Complex64>, SolveReport)> {
    let start = wall_clock();
    let x = lu.solve(b)?;
    finish_direct(a, x, b, tol, start)
}

#[cfg(feature = "std")]
type Clock = Option<std::time::Instant>;
#[cfg(not(feature = "std"))]
type Clock = Option<core::convert::Infallible>;

fn finish_direct(
    a: &SparseComplexMatrix,
    x: Vec<Complex64>,
    b: &[Complex64],
    tol: f64,
    start: Clock,
) -> Result<(Vec<Complex64>, SolveReport)> {
    let residual = relative_residual(a, &x, b)?;
    if !(residual <= tol) {
        return Err(Error::SolverFailure {
            residual,
            iterations: 0,
        });
    }
    Ok((
        x,
        SolveReport {
            iterations: 0,
            relative_residual: residual,
            wall_seconds: elapsed_seconds(start),
        },
    ))
}

/// Unpreconditioned BiCGStab; converges to `tol` or fails loudly with the
/// residual it reached.
pub fn solve_bicgstab(
    a: &SparseComplexMatrix,
    b: &[Complex64],
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<Complex64>, SolveReport)> {
    let start = wall_clock();
    let n = a.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let nb = norm2(b);
    if nb == 0.0 {
        let x = vec![Complex64::new(0.0, 0.0); n];
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                wall_seconds: elapsed_seconds(start),
            },
        ));
    }

    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut rho = Complex64::new(1.0, 0.0);
    let mut alpha = Complex64::new(1.0, 0.0);
    let mut omega = Complex64::new(1.0, 0.0);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut p = vec![Complex64::new(0.0, 0.0); n];
    let mut best = norm2(&r) / nb;

    for it in 1..=max_iterations {
        let rho_next = dotc(&r0, &r);
        if rho_next.norm() == 0.0 || omega.norm() == 0.0 {
            return Err(Error::SolverFailure {
                residual: best,
                iterations: it,
            });
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        v = a.matvec(&p)?;
        let denom = dotc(&r0, &v);
        if denom.norm() == 0.0 {
            return Err(Error::SolverFailure {
                residual: best,
                iterations: it,
            });
        }
        alpha = rho / denom;
        let mut s = r.clone();
        for i in 0..n {
            s[i] -= alpha * v[i];
        }
        if norm2(&s) / nb <= tol {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            let residual = relative_residual(a, &x, b)?;
            if residual <= tol {
                return Ok((
                    x,
                    SolveReport {
                        iterations: it,
                        relative_residual: residual,
                        wall_seconds: elapsed_seconds(start),
                    },
                ));
            }
            best = best.min(residual);
            r = s;
            continue;
        }
        let t = a.matvec(&s)?;
        let tt = dotc(&t, &t);
        if tt.norm() == 0.0 {
            return Err(Error::SolverFailure {
                residual: best,
                iterations: it,
            });
        }
        omega = dotc(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
        }
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm2(&r) / nb;
        best = best.min(rel);
        if rel <= tol {
            let residual = relative_residual(a, &x, b)?;
            if residual <= tol {
                return Ok((
                    x,
                    SolveReport {
                        iterations: it,
                        relative_residual: residual,
                        wall_seconds: elapsed_seconds(start),
                    },
                ));
            }
        }
    }
    Err(Error::SolverFailure {
        residual: best,
        iterations: max_iterations,
    })
}

/// Dispatch on [`SolverOptions::kind`].
pub fn solve_with_options(
    a: &SparseComplexMatrix,
    b: &[Complex64],
    options: &SolverOptions,
) -> Result<(Vec<Complex64>, SolveReport)> {
    match options.kind {
        SolverKind::Direct => solve(a, b, options.tol),
        SolverKind::BiCgStab => solve_bicgstab(a, b, options.tol, options.max_iterations),
    }
}
