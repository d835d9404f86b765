pub mod bloch2;
pub mod cli;
pub mod error;
pub mod isomorphism;
pub mod lambda3;
pub mod ode;
pub mod shooting;
pub mod simplex;

pub use error::{Error, Result};
