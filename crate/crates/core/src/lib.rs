//! Swiss-cheese sets, exponential and square-root covering towers over them,
//! and certified boundary measures on the lifted boundaries.

pub mod certify;
pub mod cheese;
pub mod error;
pub mod io;
pub mod jet;
pub mod pipeline;
pub mod poly;
pub mod quadrature;
pub mod tower;

pub use error::{Error, Result};
