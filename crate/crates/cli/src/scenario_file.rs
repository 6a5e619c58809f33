//! The on-disk scenario format: TOML with sections {simulation, topology,
//! policy_overrides, dan, tape, datasets, workload, resources}.
//!
//! Parsing produces a core `Scenario` plus the planning inputs (the resource
//! registry and CPU claims). Capacities and rates accept exact quantity
//! strings; serialization writes plain byte integers, and
//! parse → serialize → parse is identity on the scenario.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use racsim_core::{
    ArrivalSpec, DanConfig, DatasetSpec, KindWeights, PolicyTable, PopularityWeight,
    ResolveOptions, ResourceEntry, Scenario, Station, StationKind, TierName, TierPlacement,
    Topology, TransportConfig, WorkloadSpec, DEFAULT_TARGET_FILE_BYTES,
};

use crate::quantity::Quantity;

/// Parse or semantic failure, with the field path where it happened.
#[derive(Debug)]
pub enum ScenarioFileError {
    /// TOML-level failure; the message carries line/column.
    Parse(String),
    /// Structurally valid TOML with a bad field value.
    Field { location: String, message: String },
}

impl fmt::Display for ScenarioFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioFileError::Parse(msg) => write!(f, "parse error: {msg}"),
            ScenarioFileError::Field { location, message } => {
                write!(f, "{location}: {message}")
            }
        }
    }
}

impl std::error::Error for ScenarioFileError {}

fn field_err(location: impl Into<String>, message: impl Into<String>) -> ScenarioFileError {
    ScenarioFileError::Field {
        location: location.into(),
        message: message.into(),
    }
}

// ── sections ────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub duration: f64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub opportunistic_overflow: bool,
    #[serde(default)]
    pub prefer_inter_rac_disk: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub few_percent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_demand_min_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tiers: BTreeMap<String, TierRow>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierRow {
    pub cac_tape: f64,
    pub cac_disk: f64,
    pub rac_tape: f64,
    pub rac_disk: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DanSection {
    #[serde(default = "default_dan_capacity")]
    pub cache_capacity: usize,
    #[serde(default = "default_proxy_latency")]
    pub proxy_latency: f64,
    #[serde(default = "default_central_latency")]
    pub central_latency: f64,
}

fn default_dan_capacity() -> usize {
    1024
}
fn default_proxy_latency() -> f64 {
    0.01
}
fn default_central_latency() -> f64 {
    0.5
}

impl Default for DanSection {
    fn default() -> Self {
        DanSection {
            cache_capacity: default_dan_capacity(),
            proxy_latency: default_proxy_latency(),
            central_latency: default_central_latency(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapeSection {
    #[serde(default = "default_mount_latency")]
    pub mount_latency: f64,
    #[serde(default = "default_stream_rate")]
    pub stream_rate: Quantity,
}

fn default_mount_latency() -> f64 {
    60.0
}
fn default_stream_rate() -> Quantity {
    Quantity::Bytes(30_000_000)
}

impl Default for TapeSection {
    fn default() -> Self {
        TapeSection {
            mount_latency: default_mount_latency(),
            stream_rate: default_stream_rate(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    #[serde(default)]
    pub stations: Vec<StationRow>,
    #[serde(default)]
    pub links: Vec<LinkRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationRow {
    pub id: String,
    pub kind: String,
    pub region: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    pub disk: Quantity,
    pub tape: Quantity,
    pub cpu_ghz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRow {
    pub a: String,
    pub b: String,
    pub bandwidth: Quantity,
    pub latency: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRow {
    pub id: String,
    pub tier: String,
    pub events: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_file_size: Option<Quantity>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSection {
    #[serde(default)]
    pub arrivals: Vec<ArrivalRow>,
    #[serde(default)]
    pub popularity: Vec<PopularityRow>,
    #[serde(default = "default_files_per_job")]
    pub files_per_job: u32,
    #[serde(default = "default_cpu_seconds")]
    pub cpu_seconds_per_event: f64,
    #[serde(default = "default_db_queries")]
    pub db_queries_per_job: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind_weights: Option<KindWeightsRow>,
}

fn default_files_per_job() -> u32 {
    8
}
fn default_cpu_seconds() -> f64 {
    0.001
}
fn default_db_queries() -> u32 {
    1
}

impl Default for WorkloadSection {
    fn default() -> Self {
        WorkloadSection {
            arrivals: Vec::new(),
            popularity: Vec::new(),
            files_per_job: default_files_per_job(),
            cpu_seconds_per_event: default_cpu_seconds(),
            db_queries_per_job: default_db_queries(),
            kind_weights: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalRow {
    pub region: String,
    pub rate_per_hour: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopularityRow {
    pub dataset: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindWeightsRow {
    #[serde(default)]
    pub analysis: f64,
    #[serde(default)]
    pub reprocessing: f64,
    #[serde(default)]
    pub mc_production: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcesSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_requirement_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_remote_allocated_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_remote_total_ghz: Option<f64>,
    #[serde(default)]
    pub entries: Vec<ResourceRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceRow {
    pub center: String,
    #[serde(default)]
    pub iacs: Vec<String>,
    pub cpu_allocated_ghz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_total_ghz: Option<f64>,
    pub disk_allocated_tb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk_total_tb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tape_tb: Option<f64>,
    #[serde(default)]
    pub schedule: String,
    #[serde(default)]
    pub is_cac: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub simulation: Option<SimulationSection>,
    pub topology: TopologySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_overrides: Option<PolicySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dan: Option<DanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tape: Option<TapeSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub datasets: Vec<DatasetRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workload: Option<WorkloadSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<ResourcesSection>,
}

/// Planning-side inputs that ride along with the scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanningInputs {
    pub registry: Vec<ResourceEntry>,
    pub cpu_requirement_ghz: Option<f64>,
    pub claimed_remote_allocated_ghz: Option<f64>,
    pub claimed_remote_total_ghz: Option<f64>,
}

/// Parse scenario text into the simulation scenario and planning inputs.
pub fn parse_scenario(text: &str) -> Result<(Scenario, PlanningInputs), ScenarioFileError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ScenarioFileError::Parse(e.to_string()))?;
    build_scenario(&file)
}

pub fn build_scenario(
    file: &ScenarioFile,
) -> Result<(Scenario, PlanningInputs), ScenarioFileError> {
    let simulation = file
        .simulation
        .as_ref()
        .ok_or_else(|| field_err("simulation", "section is required"))?;

    let mut stations = Vec::new();
    for row in &file.topology.stations {
        let location = format!("topology.stations[{}]", row.id);
        let kind = match row.kind.as_str() {
            "CAC" => StationKind::Cac,
            "RAC" => StationKind::Rac,
            "IAC" => StationKind::Iac,
            "DAS" => StationKind::Das,
            other => {
                return Err(field_err(
                    location,
                    format!("unknown station kind `{other}` (expected CAC/RAC/IAC/DAS)"),
                ))
            }
        };
        stations.push(Station {
            station_id: row.id.clone(),
            kind,
            region_id: row.region.clone(),
            disk_capacity: row
                .disk
                .bytes()
                .map_err(|m| field_err(format!("{location}.disk"), m))?,
            tape_capacity: row
                .tape
                .bytes()
                .map_err(|m| field_err(format!("{location}.tape"), m))?,
            cpu_power: row.cpu_ghz,
            parent_id: row.parent.clone(),
        });
    }
    let mut raw_links = Vec::new();
    for (i, row) in file.topology.links.iter().enumerate() {
        let location = format!("topology.links[{i}]");
        raw_links.push((
            row.a.clone(),
            row.b.clone(),
            row.bandwidth
                .bytes()
                .map_err(|m| field_err(format!("{location}.bandwidth"), m))?,
            row.latency,
        ));
    }
    let topology = Topology::assemble(stations, raw_links);

    let policy = match &file.policy_overrides {
        None => PolicyTable::default(),
        Some(section) => {
            let mut policy = PolicyTable::with_params(
                section
                    .few_percent
                    .unwrap_or(racsim_core::policy::DEFAULT_FEW_PERCENT),
                section
                    .on_demand_min_fraction
                    .unwrap_or(racsim_core::policy::DEFAULT_ON_DEMAND_MIN_FRACTION),
            );
            for (tier_name, row) in &section.tiers {
                let tier = TierName::parse(tier_name).ok_or_else(|| {
                    field_err(
                        format!("policy_overrides.tiers.{tier_name}"),
                        "unknown tier name",
                    )
                })?;
                policy.tiers.insert(
                    tier,
                    TierPlacement::new(row.cac_tape, row.cac_disk, row.rac_tape, row.rac_disk),
                );
            }
            policy
        }
    };

    let mut datasets = Vec::new();
    for row in &file.datasets {
        let location = format!("datasets[{}]", row.id);
        let tier = TierName::parse(&row.tier)
            .ok_or_else(|| field_err(format!("{location}.tier"), "unknown tier name"))?;
        let target_file_bytes = match &row.target_file_size {
            None => DEFAULT_TARGET_FILE_BYTES,
            Some(q) => q
                .bytes()
                .map_err(|m| field_err(format!("{location}.target_file_size"), m))?,
        };
        datasets.push(DatasetSpec {
            dataset_id: row.id.clone(),
            tier,
            events: row.events,
            target_file_bytes,
        });
    }

    let workload_section = file.workload.clone().unwrap_or_default();
    let workload = WorkloadSpec {
        arrivals: workload_section
            .arrivals
            .iter()
            .map(|a| ArrivalSpec {
                region_id: a.region.clone(),
                rate_per_hour: a.rate_per_hour,
            })
            .collect(),
        popularity: workload_section
            .popularity
            .iter()
            .map(|p| PopularityWeight {
                dataset_id: p.dataset.clone(),
                weight: p.weight,
            })
            .collect(),
        files_per_job: workload_section.files_per_job,
        cpu_seconds_per_event: workload_section.cpu_seconds_per_event,
        db_queries_per_job: workload_section.db_queries_per_job,
        kind_weights: workload_section
            .kind_weights
            .map(|k| KindWeights {
                analysis: k.analysis,
                reprocessing: k.reprocessing,
                mc_production: k.mc_production,
            })
            .unwrap_or_default(),
    };

    let dan_section = file.dan.clone().unwrap_or_default();
    let tape_section = file.tape.clone().unwrap_or_default();
    let scenario = Scenario {
        topology,
        policy,
        datasets,
        workload,
        duration: simulation.duration,
        rng_seed: simulation.seed,
        dan: DanConfig {
            cache_capacity: dan_section.cache_capacity,
            proxy_latency: dan_section.proxy_latency,
            central_latency: dan_section.central_latency,
        },
        transport: TransportConfig {
            tape_mount_latency: tape_section.mount_latency,
            tape_stream_rate: tape_section
                .stream_rate
                .bytes()
                .map_err(|m| field_err("tape.stream_rate", m))?
                as f64,
        },
        resolve: ResolveOptions {
            prefer_inter_rac_disk: simulation.prefer_inter_rac_disk,
        },
        opportunistic_overflow: simulation.opportunistic_overflow,
    };

    let planning = match &file.resources {
        None => PlanningInputs::default(),
        Some(section) => PlanningInputs {
            registry: section
                .entries
                .iter()
                .map(|r| ResourceEntry {
                    center: r.center.clone(),
                    iacs: r.iacs.clone(),
                    cpu_allocated_ghz: r.cpu_allocated_ghz,
                    cpu_total_ghz: r.cpu_total_ghz,
                    disk_allocated_tb: r.disk_allocated_tb,
                    disk_total_tb: r.disk_total_tb,
                    tape_tb: r.tape_tb,
                    schedule: r.schedule.clone(),
                    is_cac: r.is_cac,
                })
                .collect(),
            cpu_requirement_ghz: section.cpu_requirement_ghz,
            claimed_remote_allocated_ghz: section.claimed_remote_allocated_ghz,
            claimed_remote_total_ghz: section.claimed_remote_total_ghz,
        },
    };

    Ok((scenario, planning))
}

/// Render a scenario (plus planning inputs) back to canonical TOML.
pub fn to_toml(scenario: &Scenario, planning: &PlanningInputs) -> String {
    let file = ScenarioFile {
        simulation: Some(SimulationSection {
            duration: scenario.duration,
            seed: scenario.rng_seed,
            opportunistic_overflow: scenario.opportunistic_overflow,
            prefer_inter_rac_disk: scenario.resolve.prefer_inter_rac_disk,
        }),
        topology: TopologySection {
            stations: scenario
                .topology
                .stations
                .iter()
                .map(|s| StationRow {
                    id: s.station_id.clone(),
                    kind: s.kind.as_str().to_string(),
                    region: s.region_id.clone(),
                    parent: s.parent_id.clone(),
                    disk: Quantity::Bytes(s.disk_capacity),
                    tape: Quantity::Bytes(s.tape_capacity),
                    cpu_ghz: s.cpu_power,
                })
                .collect(),
            links: scenario
                .topology
                .links
                .iter()
                .map(|l| LinkRow {
                    a: l.endpoint_a.clone(),
                    b: l.endpoint_b.clone(),
                    bandwidth: Quantity::Bytes(l.bandwidth),
                    latency: l.latency,
                })
                .collect(),
        },
        policy_overrides: Some(PolicySection {
            few_percent: Some(scenario.policy.few_percent),
            on_demand_min_fraction: Some(scenario.policy.on_demand_min_fraction),
            tiers: scenario
                .policy
                .tiers
                .iter()
                .map(|(tier, p)| {
                    (
                        tier.as_str().to_string(),
                        TierRow {
                            cac_tape: p.cac_tape,
                            cac_disk: p.cac_disk,
                            rac_tape: p.rac_tape,
                            rac_disk: p.rac_disk,
                        },
                    )
                })
                .collect(),
        }),
        dan: Some(DanSection {
            cache_capacity: scenario.dan.cache_capacity,
            proxy_latency: scenario.dan.proxy_latency,
            central_latency: scenario.dan.central_latency,
        }),
        tape: Some(TapeSection {
            mount_latency: scenario.transport.tape_mount_latency,
            stream_rate: Quantity::Bytes(scenario.transport.tape_stream_rate as u64),
        }),
        datasets: scenario
            .datasets
            .iter()
            .map(|d| DatasetRow {
                id: d.dataset_id.clone(),
                tier: d.tier.as_str().to_string(),
                events: d.events,
                target_file_size: Some(Quantity::Bytes(d.target_file_bytes)),
            })
            .collect(),
        workload: Some(WorkloadSection {
            arrivals: scenario
                .workload
                .arrivals
                .iter()
                .map(|a| ArrivalRow {
                    region: a.region_id.clone(),
                    rate_per_hour: a.rate_per_hour,
                })
                .collect(),
            popularity: scenario
                .workload
                .popularity
                .iter()
                .map(|p| PopularityRow {
                    dataset: p.dataset_id.clone(),
                    weight: p.weight,
                })
                .collect(),
            files_per_job: scenario.workload.files_per_job,
            cpu_seconds_per_event: scenario.workload.cpu_seconds_per_event,
            db_queries_per_job: scenario.workload.db_queries_per_job,
            kind_weights: Some(KindWeightsRow {
                analysis: scenario.workload.kind_weights.analysis,
                reprocessing: scenario.workload.kind_weights.reprocessing,
                mc_production: scenario.workload.kind_weights.mc_production,
            }),
        }),
        resources: if planning.registry.is_empty()
            && planning.cpu_requirement_ghz.is_none()
            && planning.claimed_remote_allocated_ghz.is_none()
            && planning.claimed_remote_total_ghz.is_none()
        {
            None
        } else {
            Some(ResourcesSection {
                cpu_requirement_ghz: planning.cpu_requirement_ghz,
                claimed_remote_allocated_ghz: planning.claimed_remote_allocated_ghz,
                claimed_remote_total_ghz: planning.claimed_remote_total_ghz,
                entries: planning
                    .registry
                    .iter()
                    .map(|r| ResourceRow {
                        center: r.center.clone(),
                        iacs: r.iacs.clone(),
                        cpu_allocated_ghz: r.cpu_allocated_ghz,
                        cpu_total_ghz: r.cpu_total_ghz,
                        disk_allocated_tb: r.disk_allocated_tb,
                        disk_total_tb: r.disk_total_tb,
                        tape_tb: r.tape_tb,
                        schedule: r.schedule.clone(),
                        is_cac: r.is_cac,
                    })
                    .collect(),
            })
        },
    };
    toml::to_string_pretty(&file).expect("scenario serializes")
}
