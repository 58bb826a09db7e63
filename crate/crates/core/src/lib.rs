pub mod airy;
pub mod caustics;
pub mod kernels;
pub mod layers;
pub mod marginals;
pub mod error;
pub mod eval;
pub mod model;
pub mod numeric;
pub mod region1;
pub mod region2;
pub mod verify;

pub use error::{Error, Result};
