//! Social bot detection toolkit.
//!
//! - [`corpus`]: account/tweet records, labeled datasets, synthetic corpora
//! - [`features`]: the feature registry and extraction
//! - [`forest`]: random forests, cross-validation, AUC
//! - [`ensemble`]: specialized-classifier ensemble, display scores, CAP calibration
//! - [`lite`]: metadata-only classifier and training-set selection
//! - [`analysis`]: case-study statistics, threshold tooling, score time series
//! - [`casestudy`]: cashtag case-study fixtures
//!
//! Runnable walkthroughs live in this crate's `examples/` directory.

pub mod analysis;
pub mod casestudy;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod features;
pub mod forest;
pub mod lexicon;
pub mod lite;
pub mod stats;

pub use error::{Error, Result};
