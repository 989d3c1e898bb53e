//! File formats, parallel runners, the evaluation harness and the
//! `branchlearn` command line.

pub mod cli;
pub mod evaluate;
pub mod io;
pub mod replay;
pub mod runner;
