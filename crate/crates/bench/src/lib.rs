//! Scenario runner for closest-point particle redistancing: configuration,
//! experiment drivers and result files.

pub mod config;
pub mod report;
pub mod scenarios;
