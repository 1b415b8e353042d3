//! Finite element solver core for the generalized complex Ginzburg-Landau
//! equation
//!
//! ```text
//!     u_t - (nu + i*eta) Δu + (kappa + i*zeta) f(|u|^2) u - gamma u = g
//! ```
//!
//! on an axis-aligned rectangle with homogeneous Dirichlet boundary values.
//! Space is discretized with bilinear (Q1) elements on a uniform rectangular
//! partition; time with a linearized Crank-Nicolson scheme whose nonlinearity
//! is evaluated on a two-step extrapolation, so each step costs one complex
//! linear solve. A biquadratic macro-element postprocessing step lifts the
//! superclose nodal accuracy to a globally superconvergent gradient.
//!
//! The crate is `no_std`-compatible (with `alloc`); everything that touches
//! the file system or a clock lives in the companion CLI crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod assembly;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod norms;
pub mod problem;
pub mod projections;
pub mod stepper;

pub use error::{Error, Result};
pub use mesh::{
    build_dof_map, build_macro_patches, build_uniform_mesh, DofMap, MacroPatchSet, Mesh, Rect,
};
pub use problem::ProblemSpec;
pub use stepper::{FemField, StepperConfig};
