//! Investment and dispatch planning for offshore energy systems.
//!
//! The crate is organised around a single pipeline:
//!
//! 1. [`aggregation`] turns field records into hub-and-spoke clusters and
//!    hourly profiles into weighted representative time slices.
//! 2. [`system`] holds the domain data model (locations, technologies,
//!    branches, policy) and emits the investment block of the MILP.
//! 3. [`platform`] emits the operational constraints (electricity, heat,
//!    production, hydrogen) and the operational objective.
//! 4. [`milp`] is a self-contained desk-scale LP/MILP solver with MPS
//!    import/export and solution validation.
//! 5. [`analysis`] does post-solve accounting (energy losses, emissions)
//!    and drives the sensitivity sweeps.
//!
//! The `oehplan` binary wires the pipeline behind a small CLI; see
//! [`cli`] for the command implementations.

pub mod aggregation;
pub mod analysis;
pub mod cli;
pub mod milp;
pub mod platform;
pub mod system;
