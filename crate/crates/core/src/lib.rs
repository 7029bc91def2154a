//! Influence ranking for online social platforms.
//!
//! Users post at rate `lambda` and re-post what they see at rate `mu`. The
//! [`model`] module solves the resulting balance equations for the share of
//! each user's content on everybody's Wall, [`metrics`] turns those shares
//! into Ψ-scores and rankings, [`simulator`] runs the platform event by event
//! to check the model, [`emulator`] measures influence directly from a trace,
//! and [`ingest`] builds graphs and rates from traces.

pub mod cli;
pub mod emulator;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod model;
pub mod simulator;
pub mod trace;

pub use error::{Error, Result};
pub use graph::{SocialGraph, UserId};
pub use metrics::ScoreTable;
pub use model::{ActivityRates, InfluenceVectors, PropagationSystem};
pub use trace::TraceEvent;
