//! Deterministic discrete-event simulator.
//!
//! `run` validates the scenario, generates the file population, plays the
//! production phase (every pre-existing file materializes at the CAC at t=0
//! in tier order and its policy placements fan out as transfers), then drives
//! the regional job workload until `duration`. Identical scenarios, including
//! the seed, produce identical `Metrics`.

mod engine;
mod event;
mod metrics;
mod network;
mod scenario;

pub use engine::{run, run_with_catalog, run_with_options, RunOptions, SimError};
pub use event::{EventKind, EventQueue, Scheduled};
pub use metrics::{
    DanCounters, JobTimes, LinkClassMetrics, Metrics, StationMetrics, TierCounters, TransferRecord,
};
pub use network::{LinkState, Network};
pub use scenario::{
    validate_scenario, ArrivalSpec, DanConfig, JobKind, KindWeights, PopularityWeight, Scenario,
    TransportConfig, WorkloadSpec,
};
