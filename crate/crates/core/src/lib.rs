//! Geometric machine-learning toolkit: Riemannian and divergence geometry of
//! SPD matrices, positive definite kernels on non-Euclidean spaces, RKHS
//! covariance-operator distances via Gram matrices, finite-space Markov
//! kernel calculus with correct loss functions, point-cloud Laplace operator
//! convergence experiments, and a desk-scale regularized ERM learner.

pub mod divergence;
pub mod erm;
pub mod error;
pub mod io;
pub mod kernel;
pub mod laplacian;
pub mod markov;
pub mod matfun;
pub mod rkhs;
pub mod sampling;
pub mod spd;

pub use error::{GeomError, Result};
