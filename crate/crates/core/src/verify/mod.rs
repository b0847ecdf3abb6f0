//! Independent oracles used to cross-check the deciders.

mod atm;
mod family;
mod oracle;
pub mod random;

pub use atm::{gen_atm_instance, parse_atm, simulate_atm, Atm, AtmError, Move, Transition, STATE_SPACE_CAP};
pub use family::{machine_family, sampled_machines, systematic_machines, FamilyMember};
pub use oracle::{brute_force_refute, brute_force_refute_with, certain_oracle, OracleError, CLAUSE_BUDGET};
