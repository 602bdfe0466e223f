//! Symbolic synthesis of safety controllers from extended AIGER specifications.

pub mod aiger;
pub mod bdd;
pub mod game;
pub mod harness;
pub mod oracle;
pub mod score;
pub mod strategy;
pub mod verify;
