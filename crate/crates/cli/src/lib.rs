//! Batch driver for the `depthbound` library: single bounds, parameter
//! scans, two-panel depth datasets and a quick self-test.

// `!(x > 0.0)` rejects NaN as well; that is the intent throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compute;
pub mod config;
pub mod error;
pub mod output;
pub mod scan;
pub mod selftest;

pub use compute::{compute_single_bound, Engine, Record};
pub use config::{ConfigArgs, ScanConfig};
pub use error::{CliError, CliResult};
pub use scan::{emit_fig2_dataset, run_scan};
