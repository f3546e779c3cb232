//! Numerics for cone subequations on symmetric matrices, Gårding operators,
//! Grassmannian plane families, tangent flows and spherical 2-jets.

pub mod error;
pub mod extended;
pub mod flow;
pub mod garding;
pub mod grassmann;
pub mod linalg;
pub mod poly;
pub mod seed;
pub mod sphjet;
pub mod subeq;

pub use error::{Error, Result};
pub use nalgebra;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
