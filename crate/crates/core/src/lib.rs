//! Fundamental solutions, solvers and sharp pointwise gradient bounds for the
//! constant-coefficient parabolic Cauchy problem
//!
//! ```text
//! u_t = sum a_jk u_{x_j x_k} + sum b_j u_{x_j} + c u (+ f)   in R^n x (0, T)
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`mathcore`]: SPD eigendecomposition, Gamma functions, quadrature rules.
//! * [`kernel`]: the anisotropic heat kernel with drift and reaction.
//! * [`sharp`]: closed forms of the best constants in
//!   `|du/dl(x,t)| <= K * ||phi||_p` and `|du/dl(x,t)| <= C * ||f||_{p,t}`.
//! * [`solver`]: pointwise evaluation of `u` and `grad u` by quadrature.
//! * [`verify`]: independent oracles, extremal data and the check suite.
//! * [`cli`]: the `parabound` command line front end.

pub mod cli;
pub mod error;
pub mod kernel;
pub mod mathcore;
pub mod sharp;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

pub use kernel::{KernelWorkspace, ProblemSpec};
pub use mathcore::{SpdDecomposition, SpdMatrix};
pub use sharp::{BoundKind, BoundQuery, Direction, Exponent, SharpConstant};
pub use solver::{QuadratureConfig, Solution, SourceFunction};
pub use verify::{ExtremalSpec, VerificationReport};



