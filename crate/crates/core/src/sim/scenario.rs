//! Scenario definition and validation: everything a simulation run needs.

use serde::{Deserialize, Serialize};

use crate::catalog::ResolveOptions;
use crate::model::{DatasetSpec, Topology, Violation};
use crate::policy::PolicyTable;
use crate::station::{DEFAULT_TAPE_MOUNT_LATENCY, DEFAULT_TAPE_STREAM_RATE};

/// Job classes carried by the workload. Labels for accounting; all classes
/// share the same mechanics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JobKind {
    #[serde(rename = "analysis")]
    Analysis,
    #[serde(rename = "reprocessing")]
    Reprocessing,
    #[serde(rename = "mc_production")]
    McProduction,
}

impl JobKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JobKind::Analysis => "analysis",
            JobKind::Reprocessing => "reprocessing",
            JobKind::McProduction => "mc_production",
        }
    }
}

/// Poisson arrival stream for one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSpec {
    pub region_id: String,
    pub rate_per_hour: f64,
}

/// Relative weight for picking a dataset when a job is created.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityWeight {
    pub dataset_id: String,
    pub weight: f64,
}

/// Relative weights of the three job kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindWeights {
    pub analysis: f64,
    pub reprocessing: f64,
    pub mc_production: f64,
}

impl Default for KindWeights {
    fn default() -> Self {
        KindWeights {
            analysis: 1.0,
            reprocessing: 0.0,
            mc_production: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub arrivals: Vec<ArrivalSpec>,
    pub popularity: Vec<PopularityWeight>,
    /// Distinct files sampled per job (with replacement, then deduplicated).
    pub files_per_job: u32,
    /// Seconds of compute per event on a 1-GHz slot.
    pub cpu_seconds_per_event: f64,
    pub db_queries_per_job: u32,
    pub kind_weights: KindWeights,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            arrivals: Vec::new(),
            popularity: Vec::new(),
            files_per_job: 8,
            cpu_seconds_per_event: 0.001,
            db_queries_per_job: 1,
            kind_weights: KindWeights::default(),
        }
    }
}

/// Database-proxy parameters shared by all regional proxies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DanConfig {
    pub cache_capacity: usize,
    pub proxy_latency: f64,
    pub central_latency: f64,
}

impl Default for DanConfig {
    fn default() -> Self {
        DanConfig {
            cache_capacity: 1024,
            proxy_latency: 0.01,
            central_latency: 0.5,
        }
    }
}

/// Tape-drive parameters shared by all tape stores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportConfig {
    pub tape_mount_latency: f64,
    pub tape_stream_rate: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            tape_mount_latency: DEFAULT_TAPE_MOUNT_LATENCY,
            tape_stream_rate: DEFAULT_TAPE_STREAM_RATE,
        }
    }
}

/// Full simulation input. Identical scenarios (same seed) produce identical
/// metrics, byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub topology: Topology,
    pub policy: PolicyTable,
    pub datasets: Vec<DatasetSpec>,
    pub workload: WorkloadSpec,
    /// Simulated seconds.
    pub duration: f64,
    pub rng_seed: u64,
    pub dan: DanConfig,
    pub transport: TransportConfig,
    pub resolve: ResolveOptions,
    /// When a region's CPU is saturated, jobs may spill to other regions.
    pub opportunistic_overflow: bool,
}

impl Scenario {
    pub fn new(topology: Topology) -> Self {
        Scenario {
            topology,
            policy: PolicyTable::default(),
            datasets: Vec::new(),
            workload: WorkloadSpec::default(),
            duration: 86_400.0,
            rng_seed: 1,
            dan: DanConfig::default(),
            transport: TransportConfig::default(),
            resolve: ResolveOptions::default(),
            opportunistic_overflow: true,
        }
    }
}

/// Structural validation: topology, policy sanity, reference integrity, and
/// workload feasibility. Pinned-set fit is checked separately (planner
/// fit_check and the simulator's pre-run check), not here.
pub fn validate_scenario(scenario: &Scenario) -> Vec<Violation> {
    let mut out = crate::model::validate_topology(&scenario.topology);
    for msg in scenario.policy.validate() {
        out.push(Violation::new("policy", msg));
    }

    if !(scenario.duration.is_finite() && scenario.duration > 0.0) {
        out.push(Violation::new("simulation", "duration must be > 0"));
    }
    if scenario.dan.cache_capacity == 0 {
        out.push(Violation::new("dan", "cache_capacity must be >= 1"));
    }
    for (label, v) in [
        ("dan.proxy_latency", scenario.dan.proxy_latency),
        ("dan.central_latency", scenario.dan.central_latency),
        (
            "transport.tape_mount_latency",
            scenario.transport.tape_mount_latency,
        ),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            out.push(Violation::new(label, "must be >= 0"));
        }
    }
    if !(scenario.transport.tape_stream_rate.is_finite()
        && scenario.transport.tape_stream_rate > 0.0)
    {
        out.push(Violation::new("transport.tape_stream_rate", "must be > 0"));
    }

    let mut dataset_ids = std::collections::BTreeSet::new();
    for ds in &scenario.datasets {
        if !dataset_ids.insert(ds.dataset_id.as_str()) {
            out.push(Violation::new(&ds.dataset_id, "duplicate dataset id"));
        }
        if ds.target_file_bytes == 0 {
            out.push(Violation::new(
                &ds.dataset_id,
                "target_file_bytes must be > 0",
            ));
        }
    }

    let w = &scenario.workload;
    if w.files_per_job == 0 {
        out.push(Violation::new("workload", "files_per_job must be >= 1"));
    }
    if !(w.cpu_seconds_per_event.is_finite() && w.cpu_seconds_per_event > 0.0) {
        out.push(Violation::new(
            "workload",
            "cpu_seconds_per_event must be > 0",
        ));
    }
    let kw = w.kind_weights;
    for (label, v) in [
        ("analysis", kw.analysis),
        ("reprocessing", kw.reprocessing),
        ("mc_production", kw.mc_production),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            out.push(Violation::new(
                "workload",
                format!("kind weight {label} must be >= 0"),
            ));
        }
    }
    if kw.analysis + kw.reprocessing + kw.mc_production <= 0.0 {
        out.push(Violation::new("workload", "kind weights must sum to > 0"));
    }

    let region_ids: std::collections::BTreeSet<&str> = scenario
        .topology
        .stations
        .iter()
        .map(|s| s.region_id.as_str())
        .collect();
    let mut active_rate = 0.0;
    for a in &w.arrivals {
        if !(a.rate_per_hour.is_finite() && a.rate_per_hour >= 0.0) {
            out.push(Violation::new(&a.region_id, "arrival rate must be >= 0"));
        }
        if !region_ids.contains(a.region_id.as_str()) {
            out.push(Violation::new(
                &a.region_id,
                "arrival region does not exist",
            ));
            continue;
        }
        if a.rate_per_hour > 0.0 {
            active_rate += a.rate_per_hour;
            let region_has_cpu = scenario
                .topology
                .stations
                .iter()
                .any(|s| s.region_id == a.region_id && s.cpu_power >= 1.0);
            if !region_has_cpu && !scenario.opportunistic_overflow {
                out.push(Violation::new(
                    &a.region_id,
                    "region has no CPU and opportunistic overflow is disabled",
                ));
            }
        }
    }
    if active_rate > 0.0 {
        let total_weight: f64 = w.popularity.iter().map(|p| p.weight.max(0.0)).sum();
        if total_weight <= 0.0 {
            out.push(Violation::new(
                "workload",
                "arrivals are active but no dataset has positive popularity weight",
            ));
        }
        if scenario.opportunistic_overflow
            && !scenario
                .topology
                .stations
                .iter()
                .any(|s| s.cpu_power >= 1.0)
        {
            out.push(Violation::new("workload", "no station has any CPU"));
        }
    }
    for p in &w.popularity {
        if !(p.weight.is_finite() && p.weight >= 0.0) {
            out.push(Violation::new(
                &p.dataset_id,
                "popularity weight must be >= 0",
            ));
        }
        if !scenario
            .datasets
            .iter()
            .any(|d| d.dataset_id == p.dataset_id)
        {
            out.push(Violation::new(
                &p.dataset_id,
                "popularity entry names an unknown dataset",
            ));
        }
    }

    out
}
