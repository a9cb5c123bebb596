//! # nslab
//!
//! File formats and the batch driver around `nslab-core`:
//!
//! * [`cgns`]: CGNS1 spectral snapshots and CSV spectra.
//! * [`config`]: flat key-value configs, schema and content hash.
//! * [`report`]: CSV/JSON artifacts stamped with the resolved config.
//! * [`commands`] and [`cli`]: the `nslab` subcommands and exit codes.
//!
//! Exit codes: 0 success, 1 IO or file-format failure, 2 invalid input,
//! 3 solver blow-up (the blow-up report is still written), 4 the grid cannot
//! hold the requested data.

pub mod cgns;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use error::LabError;
