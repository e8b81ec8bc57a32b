//! Harness library: deterministic instance generators, the batch runner and
//! report types used by the `tkfree` binary and by the acceptance suite.

pub mod gen;
pub mod report;

pub use gen::{generate, parse_rational, parse_weights, InstanceSpec, XorShift64};
pub use report::{run_batch, run_item, to_json_lines, BatchConfig, BatchItem, RunReport};
