//! Agent-based model of peer assessment together with the peer prediction
//! mechanisms, reporting strategies, and metrics used to evaluate them.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs and an [`RngStream`] address, so results are
//! reproducible bit-for-bit and replications can run on any number of
//! threads. File formats, experiment orchestration, and the command-line
//! interface live in the `peerpred` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod error;
pub mod estimation;
pub mod graph;
pub mod mechanism;
pub mod metrics;
pub mod model;
pub mod phi;
pub mod rng;
pub mod semester;
pub mod strategy;

pub use error::{Error, Result};
pub use estimation::{estimate_pg1, Pg1Estimate, Pg1Hyperparams};
pub use graph::{GraphKind, GradingGraph};
pub use mechanism::{score_semester, Assessment, Mechanism, RewardTable};
pub use model::{EffortModel, GraderProfile, Score, Setting};
pub use phi::Divergence;
pub use rng::RngStream;
pub use semester::{SemesterData, SemesterSpec};
pub use strategy::{Strategy, StrategyContext};
