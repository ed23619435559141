//! File formats, run directories, the pipeline and the `gazekit` command.
//!
//! The computation lives in `gazekit_core`; this crate reads and writes
//! corpora, feature tables, reports and run directories, and strings the
//! stages together.

pub mod cli;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod report;
pub mod run;
pub mod unified;

pub use error::{Error, ExitCode, Result};
pub use pipeline::{run_pipeline, Experiment};
pub use unified::{load_corpus, read_corpus, save_corpus, write_unified, UNIFIED_JSONL};
