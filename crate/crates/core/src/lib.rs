pub mod body;
pub mod density;
pub mod directions;
pub mod error;
pub mod integrate;
pub mod io;
pub mod linalg;
pub mod minkowski;
pub mod mixed;
pub mod projection;
pub mod quadrature;
pub mod rng;
pub mod shephard;
pub mod suite;
pub mod surface;

pub use error::{Error, Result};
