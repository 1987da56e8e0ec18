//! Experiment runner: JSON specs in, CSV/JSON tables and SVG plots out.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod presets;
pub mod run;
pub mod spec;
pub mod table;

pub use error::CliError;
pub use run::{run, Overrides};
pub use spec::{parse, ExperimentSpec};
pub use table::Table;
