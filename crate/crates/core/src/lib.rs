//! Orchestration of a guidance model and a specialized Lean 4 prover.
//!
//! The pipeline asks a general model for a natural-language proof, runs a
//! batch of summary-guided prover attempts, and if none verifies, harvests
//! `have` statements from the failed attempts, lets the guidance model pick
//! at most `k` of them, proves them one by one and splices the final proof.
//! Every prover call is charged against a fixed budget.

pub mod clock;
pub mod guidance;
pub mod harness;
pub mod lean;
pub mod model;
pub mod verifier;
pub mod orchestrator;
pub mod task;
