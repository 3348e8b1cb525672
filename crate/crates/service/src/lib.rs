//! Command line and HTTP front ends for `pitchfit-core`.

pub mod api;
pub mod cli;
pub mod error;
pub mod evaluate;
pub mod sessions;
