//! Distribution constraints: dependencies over distributed atoms `R(x̄)@κ`.
pub mod chase;
pub mod classifier;
pub mod exec;
pub mod implication;
pub mod model;
pub mod parser;
pub mod pc;
pub mod schemes;
pub mod verify;

pub use model::*;
