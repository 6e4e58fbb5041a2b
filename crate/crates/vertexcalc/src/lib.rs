//! Exact symbolic engine for N-point local formal distributions, operator
//! product expansions and Fock-space fields.

pub mod cli;
pub mod deltacalc;
pub mod fields;
pub mod fock;
pub mod scalar;
pub mod series;
pub mod verify;
