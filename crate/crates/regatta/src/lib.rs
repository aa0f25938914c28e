//! A toolkit for sailing-league tournament scheduling.
//!
//! A sailing league runs a number of *flights*; in each flight the teams are
//! partitioned into equally sized *races*. The scheduling goal is a pairing
//! list in which the number of head-to-head meetings between any two teams
//! varies as little as possible, i.e. `lambda_max - lambda_min` is minimized.
//!
//! The crate is organized as follows:
//!
//! - [`core`]: league parameters, tournament plans, pairing matrices and the
//!   utility function.
//! - [`analysis`]: design-theoretic necessary conditions for perfect pairing
//!   lists and a nearby-parameter scan.
//! - [`catalog`]: a plain-text plan format plus a bundled library of known
//!   plans.
//! - [`transforms`]: flight removal/addition, repetition and a heuristic
//!   removal search.
//! - [`modelgen`]: boolean-quadratic and integer-linear model generation with
//!   LP-format export and solution import.
//! - [`solver`]: an internal exact branch-and-bound search, fixed-bound
//!   feasibility probing and a brute-force oracle.

pub mod analysis;
pub mod budget;
pub mod catalog;
pub mod core;
pub mod modelgen;
pub mod solver;
pub mod transforms;

pub use crate::core::{
    DerivedParams, LeagueParams, PairingMatrix, PlanMode, TournamentPlan, UtilityReport,
};
pub use budget::Budget;
