pub mod amplitude;
pub mod analytic;
pub mod cavity;
pub mod compare;
pub mod config;
pub mod error;
pub mod hermite;
pub mod parallel;
pub mod runner;
pub mod schmidt;
pub mod state_builder;
