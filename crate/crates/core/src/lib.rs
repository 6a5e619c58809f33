//! Core library for a hierarchical data-grid toolkit: the tiered placement
//! policy, a replica catalog with hierarchical source resolution, per-station
//! storage engines, a static capacity planner, and a deterministic
//! discrete-event simulator.
//!
//! The model is a four-level hierarchy: one central analysis center (CAC),
//! regional analysis centers (RACs), institutional centers (IACs), and
//! desktop stations (DASs). Data comes in eleven tiers with fixed per-event
//! sizes; a placement matrix decides what is archived at the center, what is
//! pre-emptively pinned on regional disks, and what stays fetch-on-demand.
//!
//! ```
//! use racsim_core::{run, DatasetSpec, Scenario, Station, StationKind, TierName, Topology};
//!
//! let station = |id: &str, kind, region: &str, parent: Option<&str>| Station {
//!     station_id: id.into(),
//!     kind,
//!     region_id: region.into(),
//!     disk_capacity: 50_000_000_000_000,
//!     tape_capacity: 500_000_000_000_000,
//!     cpu_power: 10.0,
//!     parent_id: parent.map(Into::into),
//! };
//! let topology = Topology::assemble(
//!     vec![
//!         station("cac", StationKind::Cac, "hub", None),
//!         station("rac", StationKind::Rac, "west", Some("cac")),
//!     ],
//!     vec![("cac".into(), "rac".into(), 1_000_000_000, 0.01)],
//! );
//! let mut scenario = Scenario::new(topology);
//! scenario.datasets.push(DatasetSpec::new("tmb-demo", TierName::Tmb, 1_000_000));
//!
//! let metrics = run(&scenario).unwrap();
//! // Thumbnails are pinned in full at every regional center.
//! assert_eq!(metrics.pinned_at_production_end["rac"], 10_000_000_000);
//! ```

pub mod catalog;
pub mod hash;
pub mod model;
pub mod planner;
pub mod policy;
pub mod sim;
pub mod station;

pub use catalog::{
    dan_query, resolve_source, CatalogError, DanProxy, Replica, ReplicaCatalog, ResolveOptions,
    ServedBy,
};
pub use model::{
    ancestors, classify_link, default_event_size, validate_topology, DataTier, DatasetSpec,
    FileRecord, LinkClass, Medium, ModelError, NetworkLink, Region, Station, StationKind, TierName,
    Topology, Violation, ALL_LINK_CLASSES, ALL_TIERS, DEFAULT_TARGET_FILE_BYTES,
};
pub use planner::{
    cpu_summary, event_counts, fit_check, growth_projection, predict_pinned_bytes, storage_totals,
    CpuSummary, ResourceEntry, SiteClass, StorageReport, TierBytes,
    DEFAULT_TAPE_GROWTH_BYTES_PER_YEAR,
};
pub use policy::{
    archival_targets, default_policy, on_demand_budget, partition_tier, pinned_set, DstPartition,
    PlacementPlan, PolicyError, PolicyTable, TierPlacement,
};
pub use sim::{
    run, run_with_catalog, run_with_options, validate_scenario, ArrivalSpec, DanConfig, JobKind,
    KindWeights, Metrics, PopularityWeight, RunOptions, Scenario, SimError, TransportConfig,
    WorkloadSpec,
};
pub use station::{
    tape_stage_time, CacheStats, DiskCache, RequestOutcome, StationError, TapeStore,
};
