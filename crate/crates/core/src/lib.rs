//! Computable torus and Heisenberg dynamics with finite-resolution checks of
//! minimality, higher-order regional proximality, suspensions and multiple
//! ergodic averages.

pub mod algebra;
pub mod averages;
pub mod cloud;
pub mod error;
pub mod proximality;
pub mod suspension;
pub mod systems;

pub use error::{Error, Result};
