//! Numerical laboratory for scaled non-local dispersion operators.
//!
//! The operator under study is
//!
//! ```text
//! L_eps u(x) = int_Omega J_eps(x - y) (u(y) - u(x)) dy,
//! ```
//!
//! a bounded, self-adjoint, non-positive analogue of the Neumann Laplacian on
//! either a general bounded domain or the periodic torus `(-pi, pi)^n`. The
//! crate provides:
//!
//! * [`kernel`] — base kernels, scaling, truncation/periodization, Fourier
//!   coefficients;
//! * [`domain`] — uniform torus and masked box grids with midpoint quadrature;
//! * [`operator`] — dense assembly of the discrete operator plus a fast
//!   circular-convolution path on the torus;
//! * [`spectrum`] — analytic torus eigenpairs, essential range, numeric
//!   eigendecomposition and classification, limit-eigenvalue identities,
//!   small-epsilon asymptotics;
//! * [`dynamics`] — time integration of `u_t = L_eps u + f(u)` with extremum
//!   tracking, invariant-region monitoring, the mean-mass convergence
//!   criterion and the Lyapunov energy;
//! * [`equilibria`] — discontinuous steady states by contraction-certified
//!   fixed-point iteration, linear stability, and bifurcation branches by
//!   pseudo-arclength continuation;
//! * [`config`] / [`report`] — flat-text run configs and reproducible CSV
//!   output for the command-line front end.

pub mod config;
pub mod domain;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod force;
pub mod kernel;
pub mod operator;
pub mod quad;
pub mod report;
pub mod spectrum;

pub use error::{Error, Result};
