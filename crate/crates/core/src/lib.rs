pub mod design;
pub mod error;
pub mod geometry;
pub mod injection;
pub mod polygon;
pub mod quadrature;
pub mod region;
pub mod sim;
pub mod trajectory;

pub use error::{Error, Result};
