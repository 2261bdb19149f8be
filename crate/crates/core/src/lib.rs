//! Executable possible-worlds semantics for a polymorphic language with
//! recursive types and higher-order references.
//!
//! Programs are evaluated into step-counted stateful computations, so every
//! heap read is visible as one abstract step. On top of that sit an
//! equation checker for the store laws and a depth-bounded weak
//! bisimulation checker.

pub mod bisim;
pub mod corpus;
pub mod kernel;
pub mod lang;
pub mod laws;
pub mod semantics;
pub mod typer;
