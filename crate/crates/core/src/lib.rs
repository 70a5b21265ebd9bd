//! Two-handed and staged tile self-assembly.
//!
//! `geometry` holds tiles, assemblies and stability; `twohanded` computes
//! bounded producible and terminal sets of a bin; `staged` runs mix graphs;
//! `verifiers` answers the unique assembly / unique shape questions;
//! `reductions` compiles formulas into gadget systems.

pub mod geometry;
pub mod reductions;
pub mod staged;
pub mod twohanded;
pub mod verifiers;

pub use geometry::*;
pub use twohanded::{Answer, Bin, BinError, ProductionResult};
pub use staged::{BinRef, MixGraph, StagedError, StagedRunResult, StagedSystem};
pub use verifiers::{Finding, Verdict, VerifyError};
