//! Runge–Kutta and time-Galerkin physics-informed neural networks for
//! parabolic and wave equations, plus a classical solver laboratory for
//! discrete maximal-regularity estimates.

pub mod error;
pub mod experiments;
pub mod maxreg;
pub mod net;
pub mod polybasis;
pub mod problem;
pub mod sobol;
pub mod timegrid;
pub mod trainer;

pub use error::{Error, Result};
pub use net::{init_dgm, loss_gradient, loss_value, DgmParams, EvalResult, GroupLoss, LossEval, OutputJet};
pub use polybasis::{make_scheme, CollocationScheme, Family, QuadratureRule};
pub use timegrid::{build_stencil, ResidualStencil, TimePartition};

/// Crate version, written into CSV metadata lines.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
