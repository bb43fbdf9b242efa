pub mod baseline;
pub mod classifier;
pub mod cli;
pub mod connectivity;
pub mod dataset;
pub mod error;
pub mod pipeline;
pub mod qlinalg;
pub mod qpca;
pub mod quaternion;
pub mod search;
pub mod seed;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use qlinalg::{QSvdResult, QuaternionMatrix};
pub use quaternion::Quaternion;
