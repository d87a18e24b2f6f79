//! Difference-in-differences estimation under spatial spillover.
//!
//! Units are split into three exposure groups: treated, untreated neighbours
//! of treated units, and isolated controls. The crate estimates the effect on
//! the treated (ATT), the spillover onto neighbours (ATN), the offsetting
//! effect and the average effect on the treated net of spillover (AOTT) with
//! inverse-probability-weighted, outcome-regression and doubly-robust
//! estimators, and ships the Monte Carlo machinery used to check them.

pub mod analysis;
pub mod cli;
pub mod datamodel;
pub mod error;
pub mod estimators;
pub mod nuisance;
pub mod report;
pub mod simulation;

pub use error::{Error, Result};
