//! Dispatch optimization for two-sided ride-sharing and delivery markets.
//!
//! Drivers publish a working window between two locations; customers publish
//! tasks with pickup and drop-off deadlines and a price. Each driver's
//! feasible task sequences form a DAG (the driver's *task map*), and an assignment is
//! a set of node-disjoint source-to-destination paths, at most one per driver.
//!
//! The crate provides:
//!
//! * [`taskmap`]: task-map construction and maximum-profit paths,
//! * [`greedy`]: the offline greedy assignment with its `1/(D+1)` guarantee,
//! * [`online`]: an event-driven simulator with the Nearest and
//!   maximum-marginal-value dispatch rules,
//! * [`bounds`]: exact branch and bound for tiny markets and the LP
//!   relaxation bound by column generation,
//! * [`ingest`]: the Porto taxi trace format and driver-roster generators,
//! * [`experiment`]: driver-count sweeps with CSV/JSON reports.
//!
//! The guide in `book/` walks through each piece; its code snippets are
//! compiled and run as doc-tests of this crate.

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod greedy;
pub mod ingest;
pub mod instance_io;
pub mod market;
pub mod metrics;
pub mod online;
pub mod synth;
pub mod taskmap;

pub use error::{Error, Result};
pub use estimation::{CostModel, GeoPoint};
pub use market::{Driver, Instance, MarketOutcome, Objective, Schedule, Task};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/task-maps.md")]
    mod task_maps {}
    #[doc = include_str!("../../../book/src/greedy.md")]
    mod greedy {}
    #[doc = include_str!("../../../book/src/online.md")]
    mod online {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
