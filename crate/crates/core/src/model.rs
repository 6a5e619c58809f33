//! Domain model: data tiers, stations, regions, links, and topology validation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The eleven data tiers, in production-chain order.
///
/// Detector tiers come first, Monte Carlo tiers after; the derived `Ord` follows
/// this declaration order and is used for production ordering and report layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TierName {
    #[serde(rename = "RAW")]
    Raw,
    #[serde(rename = "RECO")]
    Reco,
    #[serde(rename = "DST")]
    Dst,
    #[serde(rename = "TMB")]
    Tmb,
    #[serde(rename = "DERIVED")]
    Derived,
    #[serde(rename = "MC_D0STAR")]
    McD0star,
    #[serde(rename = "MC_D0SIM")]
    McD0sim,
    #[serde(rename = "MC_DST")]
    McDst,
    #[serde(rename = "MC_TMB")]
    McTmb,
    #[serde(rename = "MC_PMCS")]
    McPmcs,
    #[serde(rename = "MC_ROOTTUPLE")]
    McRoottuple,
}

pub const ALL_TIERS: [TierName; 11] = [
    TierName::Raw,
    TierName::Reco,
    TierName::Dst,
    TierName::Tmb,
    TierName::Derived,
    TierName::McD0star,
    TierName::McD0sim,
    TierName::McDst,
    TierName::McTmb,
    TierName::McPmcs,
    TierName::McRoottuple,
];

impl TierName {
    pub fn as_str(self) -> &'static str {
        match self {
            TierName::Raw => "RAW",
            TierName::Reco => "RECO",
            TierName::Dst => "DST",
            TierName::Tmb => "TMB",
            TierName::Derived => "DERIVED",
            TierName::McD0star => "MC_D0STAR",
            TierName::McD0sim => "MC_D0SIM",
            TierName::McDst => "MC_DST",
            TierName::McTmb => "MC_TMB",
            TierName::McPmcs => "MC_PMCS",
            TierName::McRoottuple => "MC_ROOTTUPLE",
        }
    }

    pub fn parse(s: &str) -> Option<TierName> {
        ALL_TIERS.iter().copied().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for TierName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Default per-event size in kilobytes (1 kB = 1000 bytes) for each tier.
pub fn default_event_size(tier: TierName) -> u64 {
    match tier {
        TierName::Raw => 250,
        TierName::Reco => 500,
        TierName::Dst => 150,
        TierName::Tmb => 10,
        TierName::Derived => 10,
        TierName::McD0star => 700,
        TierName::McD0sim => 300,
        TierName::McDst => 400,
        TierName::McTmb => 20,
        TierName::McPmcs => 20,
        TierName::McRoottuple => 20,
    }
}

/// A data tier together with its per-event size in kilobytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataTier {
    pub name: TierName,
    pub event_size_kb: u64,
}

impl DataTier {
    /// Tier with its default (catalog) event size.
    pub fn with_default_size(name: TierName) -> Self {
        DataTier {
            name,
            event_size_kb: default_event_size(name),
        }
    }

    pub fn event_size_bytes(&self) -> u64 {
        self.event_size_kb * 1000
    }
}

/// Storage medium at a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Medium {
    #[serde(rename = "disk")]
    Disk,
    #[serde(rename = "tape")]
    Tape,
}

impl Medium {
    pub fn as_str(self) -> &'static str {
        match self {
            Medium::Disk => "disk",
            Medium::Tape => "tape",
        }
    }
}

impl fmt::Display for Medium {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Station tiers of the hierarchy, ordered by depth: DAS < IAC < RAC < CAC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StationKind {
    #[serde(rename = "DAS")]
    Das,
    #[serde(rename = "IAC")]
    Iac,
    #[serde(rename = "RAC")]
    Rac,
    #[serde(rename = "CAC")]
    Cac,
}

impl StationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StationKind::Das => "DAS",
            StationKind::Iac => "IAC",
            StationKind::Rac => "RAC",
            StationKind::Cac => "CAC",
        }
    }
}

impl fmt::Display for StationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A storage/compute site in the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub station_id: String,
    pub kind: StationKind,
    pub region_id: String,
    pub disk_capacity: u64,
    pub tape_capacity: u64,
    /// GHz-equivalent compute; jobs occupy 1-GHz slots.
    pub cpu_power: f64,
    pub parent_id: Option<String>,
}

/// A RAC-rooted region: one RAC plus the institutional stations beneath it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub region_id: String,
    pub name: String,
    pub rac_id: String,
    pub members: BTreeSet<String>,
}

/// Link classes, derived from endpoint kinds/regions rather than declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkClass {
    #[serde(rename = "CAC_TO_RAC")]
    CacToRac,
    #[serde(rename = "INTER_RAC")]
    InterRac,
    #[serde(rename = "INTRA_REGION")]
    IntraRegion,
}

pub const ALL_LINK_CLASSES: [LinkClass; 3] = [
    LinkClass::CacToRac,
    LinkClass::InterRac,
    LinkClass::IntraRegion,
];

impl LinkClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkClass::CacToRac => "CAC_TO_RAC",
            LinkClass::InterRac => "INTER_RAC",
            LinkClass::IntraRegion => "INTRA_REGION",
        }
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLink {
    pub endpoint_a: String,
    pub endpoint_b: String,
    /// Bytes per second.
    pub bandwidth: u64,
    /// Propagation latency in seconds.
    pub latency: f64,
    pub class: LinkClass,
}

/// One catalogued file. Granularity is artificial: datasets are split into
/// files of a configurable target size by the scenario generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub file_id: String,
    pub tier: DataTier,
    pub dataset_id: String,
    pub size: u64,
    pub event_count: u64,
    pub created_at: f64,
}

/// The full site hierarchy. `regions` covers RAC-rooted regions only; the CAC
/// sits alone in its own region_id and belongs to no `Region` record.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Topology {
    pub stations: Vec<Station>,
    pub regions: Vec<Region>,
    pub links: Vec<NetworkLink>,
}

/// A violated invariant, reported as data rather than an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Offending station/link/region id.
    pub subject: String,
    pub message: String,
}

impl Violation {
    pub fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown station `{0}`")]
    UnknownStation(String),
}

/// Derive the link class for a pair of stations, if the pair is classifiable.
pub fn classify_link(a: &Station, b: &Station) -> Option<LinkClass> {
    use StationKind::*;
    match (a.kind, b.kind) {
        (Cac, Rac) | (Rac, Cac) => Some(LinkClass::CacToRac),
        (Rac, Rac) if a.region_id != b.region_id => Some(LinkClass::InterRac),
        _ if a.region_id == b.region_id && a.kind != Cac && b.kind != Cac => {
            Some(LinkClass::IntraRegion)
        }
        _ => None,
    }
}

impl Topology {
    /// Assemble a topology from stations and raw links: regions are grouped by
    /// `region_id` (named after it), link classes derived from the endpoints.
    /// Unclassifiable links are kept with a placeholder class so that
    /// `validate` can report them.
    pub fn assemble(stations: Vec<Station>, raw_links: Vec<(String, String, u64, f64)>) -> Self {
        let by_id: BTreeMap<&str, &Station> = stations
            .iter()
            .map(|s| (s.station_id.as_str(), s))
            .collect();
        let links = raw_links
            .into_iter()
            .map(|(a, b, bandwidth, latency)| {
                let class = match (by_id.get(a.as_str()), by_id.get(b.as_str())) {
                    (Some(sa), Some(sb)) => classify_link(sa, sb).unwrap_or(LinkClass::IntraRegion),
                    _ => LinkClass::IntraRegion,
                };
                NetworkLink {
                    endpoint_a: a,
                    endpoint_b: b,
                    bandwidth,
                    latency,
                    class,
                }
            })
            .collect();

        let mut regions: BTreeMap<String, Region> = BTreeMap::new();
        for s in &stations {
            if s.kind == StationKind::Cac {
                continue;
            }
            let region = regions
                .entry(s.region_id.clone())
                .or_insert_with(|| Region {
                    region_id: s.region_id.clone(),
                    name: s.region_id.clone(),
                    rac_id: String::new(),
                    members: BTreeSet::new(),
                });
            region.members.insert(s.station_id.clone());
            if s.kind == StationKind::Rac && region.rac_id.is_empty() {
                region.rac_id = s.station_id.clone();
            }
        }

        Topology {
            stations,
            regions: regions.into_values().collect(),
            links,
        }
    }

    pub fn station(&self, id: &str) -> Option<&Station> {
        self.stations.iter().find(|s| s.station_id == id)
    }

    /// The unique CAC. Call only on validated topologies.
    pub fn cac(&self) -> &Station {
        self.stations
            .iter()
            .find(|s| s.kind == StationKind::Cac)
            .expect("validated topology has a CAC")
    }

    /// RAC station ids in lexicographic order.
    pub fn rac_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .stations
            .iter()
            .filter(|s| s.kind == StationKind::Rac)
            .map(|s| s.station_id.clone())
            .collect();
        ids.sort();
        ids
    }

    pub fn region(&self, region_id: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.region_id == region_id)
    }

    /// The RAC of a station's region, if it has one (the CAC does not).
    pub fn home_rac(&self, station_id: &str) -> Option<&Station> {
        let st = self.station(station_id)?;
        if st.kind == StationKind::Rac {
            return Some(st);
        }
        let region = self.region(&st.region_id)?;
        self.station(&region.rac_id)
    }
}

/// Check every topology and station invariant; returns all violations found.
///
/// An empty list means the topology is valid. Violations are data, not errors:
/// callers decide whether to refuse or report.
pub fn validate_topology(topology: &Topology) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut by_id: BTreeMap<&str, &Station> = BTreeMap::new();
    for s in &topology.stations {
        if by_id.insert(s.station_id.as_str(), s).is_some() {
            out.push(Violation::new(&s.station_id, "duplicate station id"));
        }
    }

    let cacs: Vec<&Station> = topology
        .stations
        .iter()
        .filter(|s| s.kind == StationKind::Cac)
        .collect();
    if cacs.is_empty() {
        out.push(Violation::new("topology", "no CAC"));
    } else if cacs.len() > 1 {
        out.push(Violation::new("topology", "multiple CAC"));
    }

    for s in &topology.stations {
        match (&s.parent_id, s.kind) {
            (Some(_), StationKind::Cac) => {
                out.push(Violation::new(&s.station_id, "CAC must not have a parent"));
            }
            (None, k) if k != StationKind::Cac => {
                out.push(Violation::new(
                    &s.station_id,
                    "non-CAC station has no parent",
                ));
            }
            (Some(pid), _) => match by_id.get(pid.as_str()) {
                None => out.push(Violation::new(
                    &s.station_id,
                    format!("parent `{pid}` does not exist"),
                )),
                Some(parent) => {
                    if parent.kind <= s.kind {
                        out.push(Violation::new(&s.station_id, "parent kind not greater"));
                    }
                }
            },
            _ => {}
        }
        if s.kind == StationKind::Das && s.tape_capacity != 0 {
            out.push(Violation::new(
                &s.station_id,
                "DAS must have tape_capacity = 0",
            ));
        }
        if !s.cpu_power.is_finite() || s.cpu_power < 0.0 {
            out.push(Violation::new(&s.station_id, "cpu_power must be >= 0"));
        }
    }

    // Parent chains must terminate at the CAC (no cycles, no stray roots).
    for s in &topology.stations {
        if s.kind == StationKind::Cac {
            continue;
        }
        let mut seen = BTreeSet::new();
        let mut cur = s;
        loop {
            if !seen.insert(cur.station_id.clone()) {
                out.push(Violation::new(&s.station_id, "parent chain has a cycle"));
                break;
            }
            match cur.parent_id.as_deref().and_then(|p| by_id.get(p)) {
                Some(parent) if parent.kind == StationKind::Cac => break,
                Some(parent) => cur = parent,
                None => break, // already reported above
            }
        }
    }

    // Region records: exactly one RAC each, membership consistent.
    let mut member_of: BTreeMap<&str, &str> = BTreeMap::new();
    for region in &topology.regions {
        let racs_in_region: Vec<&String> = region
            .members
            .iter()
            .filter(|m| {
                by_id
                    .get(m.as_str())
                    .is_some_and(|s| s.kind == StationKind::Rac)
            })
            .collect();
        if racs_in_region.len() != 1 || !region.members.contains(&region.rac_id) {
            out.push(Violation::new(
                &region.region_id,
                "region must have exactly one RAC",
            ));
        }
        for m in &region.members {
            match by_id.get(m.as_str()) {
                None => out.push(Violation::new(
                    &region.region_id,
                    format!("member `{m}` does not exist"),
                )),
                Some(s) => {
                    if s.region_id != region.region_id {
                        out.push(Violation::new(m, "member region_id mismatch"));
                    }
                    if s.kind == StationKind::Cac {
                        out.push(Violation::new(m, "CAC must not be a region member"));
                    }
                    member_of.insert(m.as_str(), region.region_id.as_str());
                }
            }
        }
    }
    for s in &topology.stations {
        if s.kind != StationKind::Cac && !member_of.contains_key(s.station_id.as_str()) {
            out.push(Violation::new(
                &s.station_id,
                format!(
                    "station belongs to no declared region (region_id `{}`)",
                    s.region_id
                ),
            ));
        }
    }

    // Links: endpoints exist, bandwidth positive, class consistent.
    for link in &topology.links {
        let subject = format!("{}--{}", link.endpoint_a, link.endpoint_b);
        let (a, b) = (
            by_id.get(link.endpoint_a.as_str()),
            by_id.get(link.endpoint_b.as_str()),
        );
        let (a, b) = match (a, b) {
            (Some(a), Some(b)) => (*a, *b),
            _ => {
                out.push(Violation::new(subject, "link endpoint does not exist"));
                continue;
            }
        };
        if link.bandwidth == 0 {
            out.push(Violation::new(subject.clone(), "bandwidth must be > 0"));
        }
        if !link.latency.is_finite() || link.latency < 0.0 {
            out.push(Violation::new(subject.clone(), "latency must be >= 0"));
        }
        match classify_link(a, b) {
            Some(class) if class == link.class => {}
            Some(class) => out.push(Violation::new(
                subject,
                format!("link class should be {class}"),
            )),
            None => out.push(Violation::new(subject, "link endpoints not classifiable")),
        }
    }

    // Transfers route along parent edges, so each child-parent pair needs a link.
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for link in &topology.links {
        adjacency
            .entry(link.endpoint_a.as_str())
            .or_default()
            .push(link.endpoint_b.as_str());
        adjacency
            .entry(link.endpoint_b.as_str())
            .or_default()
            .push(link.endpoint_a.as_str());
    }
    for s in &topology.stations {
        if let Some(pid) = &s.parent_id {
            let linked = adjacency
                .get(s.station_id.as_str())
                .is_some_and(|peers| peers.contains(&pid.as_str()));
            if !linked && by_id.contains_key(pid.as_str()) {
                out.push(Violation::new(&s.station_id, "missing link to parent"));
            }
        }
    }

    // Everything must be reachable from the CAC over links.
    if let [cac] = cacs.as_slice() {
        let mut reached: BTreeSet<&str> = BTreeSet::new();
        let mut queue = VecDeque::from([cac.station_id.as_str()]);
        while let Some(id) = queue.pop_front() {
            if !reached.insert(id) {
                continue;
            }
            if let Some(peers) = adjacency.get(id) {
                for p in peers {
                    queue.push_back(p);
                }
            }
        }
        for s in &topology.stations {
            if !reached.contains(s.station_id.as_str()) {
                out.push(Violation::new(
                    &s.station_id,
                    "not reachable from CAC via links",
                ));
            }
        }
    }

    out
}

/// Parent chain from `station_id` (exclusive) up to and including the CAC.
/// Empty for the CAC itself.
pub fn ancestors(topology: &Topology, station_id: &str) -> Result<Vec<String>, ModelError> {
    let mut cur = topology
        .station(station_id)
        .ok_or_else(|| ModelError::UnknownStation(station_id.to_string()))?;
    let mut chain = Vec::new();
    while let Some(pid) = &cur.parent_id {
        let parent = topology
            .station(pid)
            .ok_or_else(|| ModelError::UnknownStation(pid.clone()))?;
        chain.push(parent.station_id.clone());
        cur = parent;
    }
    Ok(chain)
}

/// A dataset to generate: `events` of one tier split into
/// files of roughly `target_file_bytes` (default 1 GB), last file smaller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub dataset_id: String,
    pub tier: TierName,
    pub events: u64,
    pub target_file_bytes: u64,
}

pub const DEFAULT_TARGET_FILE_BYTES: u64 = 1_000_000_000;

impl DatasetSpec {
    pub fn new(dataset_id: impl Into<String>, tier: TierName, events: u64) -> Self {
        DatasetSpec {
            dataset_id: dataset_id.into(),
            tier,
            events,
            target_file_bytes: DEFAULT_TARGET_FILE_BYTES,
        }
    }

    /// Split the dataset into files. Total bytes equal `events * event_size`
    /// exactly; every file holds at least one event.
    pub fn generate_files(&self) -> Vec<FileRecord> {
        let tier = DataTier::with_default_size(self.tier);
        let event_bytes = tier.event_size_bytes();
        let events_per_file = (self.target_file_bytes / event_bytes).max(1);
        let mut files = Vec::new();
        let mut remaining = self.events;
        let mut index = 0u64;
        while remaining > 0 {
            let n = remaining.min(events_per_file);
            files.push(FileRecord {
                file_id: format!("{}-{:06}", self.dataset_id, index),
                tier,
                dataset_id: self.dataset_id.clone(),
                size: n * event_bytes,
                event_count: n,
                created_at: 0.0,
            });
            remaining -= n;
            index += 1;
        }
        files
    }
}
