pub mod baselines;
pub mod covseq;
pub mod dgp;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod linalg;
pub mod optim;
pub mod panel;
pub mod penalty;
pub mod scalar;
mod serde_mat;
pub mod smoother;
pub mod var;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Real;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type ReturnPanelF64 = panel::ReturnPanel<f64>;
pub type ReturnPanelF32 = panel::ReturnPanel<f32>;
pub type MsvModelF64 = estimator::MsvModel<f64>;
pub type MsvModelF32 = estimator::MsvModel<f32>;
pub type MsvOptionsF64 = estimator::MsvOptions<f64>;
pub type MsvOptionsF32 = estimator::MsvOptions<f32>;
pub type CovSequenceF64 = covseq::CovSequence<f64>;
pub type CovSequenceF32 = covseq::CovSequence<f32>;
pub type BaselineModelF64 = baselines::BaselineModel<f64>;
pub type DgpSpecF64 = dgp::DgpSpec<f64>;
