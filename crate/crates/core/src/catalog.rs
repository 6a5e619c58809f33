//! Replica catalog with hierarchical source resolution and the regional
//! database-proxy model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ancestors, FileRecord, Medium, StationKind, Topology};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("file `{0}` is already registered")]
    DuplicateFile(String),
    #[error("file `{0}` is not registered")]
    UnknownFile(String),
    #[error("replica not found: {file_id} at {station_id} ({medium}, copy {copy_index})")]
    UnknownReplica {
        file_id: String,
        station_id: String,
        medium: Medium,
        copy_index: u32,
    },
    #[error("replica of `{0}` is pinned; removal requires the unpin flag")]
    PinnedRemovalRefused(String),
    #[error("file `{0}` has no replica")]
    NoReplica(String),
    #[error("dump line {line}: {message}")]
    MalformedDump { line: usize, message: String },
}

/// One physical copy of a file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Replica {
    pub file_id: String,
    pub station_id: String,
    pub medium: Medium,
    pub pinned: bool,
    /// Ordinal for multi-copy tape; 0 for the first copy.
    pub copy_index: u32,
}

impl Replica {
    pub fn disk(file_id: &str, station_id: &str, pinned: bool) -> Self {
        Replica {
            file_id: file_id.to_string(),
            station_id: station_id.to_string(),
            medium: Medium::Disk,
            pinned,
            copy_index: 0,
        }
    }

    pub fn tape(file_id: &str, station_id: &str, copy_index: u32) -> Self {
        Replica {
            file_id: file_id.to_string(),
            station_id: station_id.to_string(),
            medium: Medium::Tape,
            pinned: false,
            copy_index,
        }
    }

    fn key(&self) -> (String, Medium, u32) {
        (self.station_id.clone(), self.medium, self.copy_index)
    }
}

/// File registry plus replica index, with a maintained reverse index
/// (station, medium) → file ids. Mutations are serialized by `&mut self`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplicaCatalog {
    files: BTreeMap<String, FileRecord>,
    replicas: BTreeMap<String, BTreeMap<(String, Medium, u32), Replica>>,
    by_station: BTreeMap<(String, Medium), BTreeSet<String>>,
}

impl ReplicaCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn file_count(&self) -> usize {
        self.files.len()
    }

    pub fn file(&self, file_id: &str) -> Option<&FileRecord> {
        self.files.get(file_id)
    }

    pub fn register_file(&mut self, file: FileRecord) -> Result<(), CatalogError> {
        if self.files.contains_key(&file.file_id) {
            return Err(CatalogError::DuplicateFile(file.file_id));
        }
        self.replicas.insert(file.file_id.clone(), BTreeMap::new());
        self.files.insert(file.file_id.clone(), file);
        Ok(())
    }

    /// Replicas of a file, in (station, medium, copy) order.
    pub fn locate(&self, file_id: &str) -> Result<Vec<&Replica>, CatalogError> {
        self.replicas
            .get(file_id)
            .map(|m| m.values().collect())
            .ok_or_else(|| CatalogError::UnknownFile(file_id.to_string()))
    }

    /// File ids present at a station on a given medium.
    pub fn at_station(&self, station_id: &str, medium: Medium) -> Option<&BTreeSet<String>> {
        self.by_station.get(&(station_id.to_string(), medium))
    }

    pub fn add_replica(&mut self, replica: Replica) -> Result<(), CatalogError> {
        let slot = self
            .replicas
            .get_mut(&replica.file_id)
            .ok_or_else(|| CatalogError::UnknownFile(replica.file_id.clone()))?;
        self.by_station
            .entry((replica.station_id.clone(), replica.medium))
            .or_default()
            .insert(replica.file_id.clone());
        slot.insert(replica.key(), replica);
        Ok(())
    }

    /// Remove a replica. Pinned replicas are refused unless `unpin` is set.
    pub fn remove_replica(&mut self, replica: &Replica, unpin: bool) -> Result<(), CatalogError> {
        let slot = self
            .replicas
            .get_mut(&replica.file_id)
            .ok_or_else(|| CatalogError::UnknownFile(replica.file_id.clone()))?;
        let key = replica.key();
        let existing = slot.get(&key).ok_or_else(|| CatalogError::UnknownReplica {
            file_id: replica.file_id.clone(),
            station_id: replica.station_id.clone(),
            medium: replica.medium,
            copy_index: replica.copy_index,
        })?;
        if existing.pinned && !unpin {
            return Err(CatalogError::PinnedRemovalRefused(replica.file_id.clone()));
        }
        slot.remove(&key);
        // The reverse index entry stays while any copy remains on that medium.
        let any_left = slot
            .keys()
            .any(|(st, medium, _)| st == &replica.station_id && *medium == replica.medium);
        if !any_left {
            let rk = (replica.station_id.clone(), replica.medium);
            if let Some(set) = self.by_station.get_mut(&rk) {
                set.remove(&replica.file_id);
                if set.is_empty() {
                    self.by_station.remove(&rk);
                }
            }
        }
        Ok(())
    }

    /// Drop the disk replica of a file at a station (cache eviction path).
    pub fn drop_disk_replica(
        &mut self,
        file_id: &str,
        station_id: &str,
    ) -> Result<(), CatalogError> {
        let replica = Replica::disk(file_id, station_id, false);
        self.remove_replica(&replica, false)
    }

    /// Rebuild the reverse index from the replica index (test oracle).
    pub fn rebuild_reverse_index(&self) -> BTreeMap<(String, Medium), BTreeSet<String>> {
        let mut out: BTreeMap<(String, Medium), BTreeSet<String>> = BTreeMap::new();
        for (file_id, slots) in &self.replicas {
            for (station_id, medium, _) in slots.keys() {
                out.entry((station_id.clone(), *medium))
                    .or_default()
                    .insert(file_id.clone());
            }
        }
        out
    }

    pub fn reverse_index(&self) -> &BTreeMap<(String, Medium), BTreeSet<String>> {
        &self.by_station
    }

    /// One replica per line: `file_id TAB station TAB medium TAB pinned TAB copy`.
    /// Lines are sorted; the format round-trips bit-exactly.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for slots in self.replicas.values() {
            for r in slots.values() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    r.file_id, r.station_id, r.medium, r.pinned, r.copy_index
                )
                .expect("writing to String cannot fail");
            }
        }
        out
    }

    /// Load replicas from `dump` output into a catalog whose files are already
    /// registered.
    pub fn load_dump(&mut self, text: &str) -> Result<(), CatalogError> {
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let malformed = |message: &str| CatalogError::MalformedDump {
                line: i + 1,
                message: message.to_string(),
            };
            let [file_id, station_id, medium, pinned, copy_index] = fields.as_slice() else {
                return Err(malformed("expected 5 tab-separated fields"));
            };
            let medium = match *medium {
                "disk" => Medium::Disk,
                "tape" => Medium::Tape,
                other => return Err(malformed(&format!("bad medium `{other}`"))),
            };
            let pinned = match *pinned {
                "true" => true,
                "false" => false,
                other => return Err(malformed(&format!("bad pinned flag `{other}`"))),
            };
            let copy_index: u32 = copy_index
                .parse()
                .map_err(|_| malformed("bad copy_index"))?;
            self.add_replica(Replica {
                file_id: file_id.to_string(),
                station_id: station_id.to_string(),
                medium,
                pinned,
                copy_index,
            })?;
        }
        Ok(())
    }
}

/// Source-resolution options. The default prefers CAC disk over foreign-RAC
/// disk; `prefer_inter_rac_disk` swaps those two ranks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolveOptions {
    pub prefer_inter_rac_disk: bool,
}

/// Pick the best source replica for `requester`, walking the rank table:
/// own disk, region-ancestor disk (nearest first), CAC disk, foreign-RAC disk,
/// region-RAC tape, CAC tape, any tape. Ties inside a rank break on
/// lexicographic station id.
pub fn resolve_source(
    catalog: &ReplicaCatalog,
    topology: &Topology,
    file_id: &str,
    requester: &str,
    options: ResolveOptions,
) -> Result<(String, Medium), CatalogError> {
    let replicas = catalog.locate(file_id)?;
    if replicas.is_empty() {
        return Err(CatalogError::NoReplica(file_id.to_string()));
    }
    let requester_station = topology.station(requester).expect("requester in topology");
    let cac_id = topology.cac().station_id.as_str();
    let chain = ancestors(topology, requester).expect("requester in topology");
    let region_ancestors: Vec<&String> = chain
        .iter()
        .filter(|id| {
            topology.station(id).is_some_and(|s| {
                s.region_id == requester_station.region_id && s.kind != StationKind::Cac
            })
        })
        .collect();
    let home_rac = topology.home_rac(requester).map(|s| s.station_id.clone());

    // (rank, subrank, station_id), smallest wins.
    let mut best: Option<((u8, u32, &str), &Replica)> = None;
    for r in replicas {
        let station = match topology.station(&r.station_id) {
            Some(s) => s,
            None => continue,
        };
        let ranked: Option<(u8, u32)> = match r.medium {
            Medium::Disk => {
                if r.station_id == requester {
                    Some((1, 0))
                } else if let Some(pos) =
                    region_ancestors.iter().position(|id| **id == r.station_id)
                {
                    Some((2, pos as u32))
                } else if r.station_id == cac_id {
                    Some((if options.prefer_inter_rac_disk { 4 } else { 3 }, 0))
                } else if station.kind == StationKind::Rac
                    && station.region_id != requester_station.region_id
                {
                    Some((if options.prefer_inter_rac_disk { 3 } else { 4 }, 0))
                } else {
                    // Disk at an unrelated IAC/DAS is not served across sites.
                    None
                }
            }
            Medium::Tape => {
                if Some(&r.station_id) == home_rac.as_ref() {
                    Some((5, 0))
                } else if r.station_id == cac_id {
                    Some((6, 0))
                } else {
                    Some((7, 0))
                }
            }
        };
        if let Some((rank, sub)) = ranked {
            let key = (rank, sub, r.station_id.as_str());
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, r));
            }
        }
    }
    best.map(|(_, r)| (r.station_id.clone(), r.medium))
        .ok_or_else(|| CatalogError::NoReplica(file_id.to_string()))
}

/// Which side answered a database query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServedBy {
    Proxy,
    Central,
}

pub const DEFAULT_PROXY_LATENCY: f64 = 0.01;

/// Regional database proxy: an LRU cache of query keys standing in for the
/// calibration/metadata service each region fronts.
#[derive(Debug, Clone, PartialEq)]
pub struct DanProxy {
    pub region_id: String,
    capacity: NonZeroUsize,
    proxy_latency: f64,
    entries: BTreeMap<String, u64>,
    by_recency: BTreeMap<u64, String>,
    stamp: u64,
    pub hits: u64,
    pub misses: u64,
}

impl DanProxy {
    pub fn new(region_id: impl Into<String>, capacity: NonZeroUsize, proxy_latency: f64) -> Self {
        DanProxy {
            region_id: region_id.into(),
            capacity,
            proxy_latency,
            entries: BTreeMap::new(),
            by_recency: BTreeMap::new(),
            stamp: 0,
            hits: 0,
            misses: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Serve a query: hits answer at proxy latency, misses at `central_latency`
    /// and install the key, evicting the least recently used over capacity.
    pub fn query(&mut self, key: &str, central_latency: f64) -> (ServedBy, f64) {
        self.stamp += 1;
        if let Some(old) = self.entries.insert(key.to_string(), self.stamp) {
            self.by_recency.remove(&old);
            self.by_recency.insert(self.stamp, key.to_string());
            self.hits += 1;
            return (ServedBy::Proxy, self.proxy_latency);
        }
        self.by_recency.insert(self.stamp, key.to_string());
        if self.entries.len() > self.capacity.get() {
            let (&oldest, _) = self.by_recency.iter().next().expect("nonempty");
            let evicted = self.by_recency.remove(&oldest).expect("stamp present");
            self.entries.remove(&evicted);
        }
        self.misses += 1;
        (ServedBy::Central, central_latency)
    }
}

/// Standalone form of the proxy query contract.
pub fn dan_query(proxy: &mut DanProxy, central_latency: f64, key: &str) -> (ServedBy, f64) {
    proxy.query(key, central_latency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DataTier, Station, StationKind, TierName};

    fn record(id: &str) -> FileRecord {
        FileRecord {
            file_id: id.to_string(),
            tier: DataTier::with_default_size(TierName::Tmb),
            dataset_id: "ds".to_string(),
            size: 1_000,
            event_count: 1,
            created_at: 0.0,
        }
    }

    fn station(id: &str, kind: StationKind, region: &str, parent: Option<&str>) -> Station {
        Station {
            station_id: id.to_string(),
            kind,
            region_id: region.to_string(),
            disk_capacity: 1_000_000,
            tape_capacity: if kind == StationKind::Das {
                0
            } else {
                1_000_000
            },
            cpu_power: 1.0,
            parent_id: parent.map(str::to_string),
        }
    }

    /// cac / two regions; region a has an IAC and a DAS beneath it.
    fn two_region_topology() -> Topology {
        let stations = vec![
            station("cac", StationKind::Cac, "hub", None),
            station("rac-a", StationKind::Rac, "a", Some("cac")),
            station("rac-b", StationKind::Rac, "b", Some("cac")),
            station("iac-a1", StationKind::Iac, "a", Some("rac-a")),
            station("das-a1", StationKind::Das, "a", Some("iac-a1")),
        ];
        let links = vec![
            ("cac".into(), "rac-a".into(), 1_000, 0.0),
            ("cac".into(), "rac-b".into(), 1_000, 0.0),
            ("rac-a".into(), "iac-a1".into(), 1_000, 0.0),
            ("iac-a1".into(), "das-a1".into(), 1_000, 0.0),
        ];
        Topology::assemble(stations, links)
    }

    #[test]
    fn register_then_locate_is_empty() {
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f1")).unwrap();
        assert!(cat.locate("f1").unwrap().is_empty());
    }

    #[test]
    fn duplicate_registration_fails() {
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f1")).unwrap();
        assert_eq!(
            cat.register_file(record("f1")),
            Err(CatalogError::DuplicateFile("f1".into()))
        );
    }

    #[test]
    fn add_remove_roundtrip() {
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f1")).unwrap();
        let r = Replica::disk("f1", "rac-a", false);
        cat.add_replica(r.clone()).unwrap();
        assert_eq!(cat.locate("f1").unwrap().len(), 1);
        cat.remove_replica(&r, false).unwrap();
        assert!(cat.locate("f1").unwrap().is_empty());
        assert!(cat.at_station("rac-a", Medium::Disk).is_none());
    }

    #[test]
    fn pinned_removal_requires_flag() {
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f1")).unwrap();
        let r = Replica::disk("f1", "rac-a", true);
        cat.add_replica(r.clone()).unwrap();
        assert_eq!(
            cat.remove_replica(&r, false),
            Err(CatalogError::PinnedRemovalRefused("f1".into()))
        );
        cat.remove_replica(&r, true).unwrap();
        assert!(cat.locate("f1").unwrap().is_empty());
    }

    #[test]
    fn four_tape_copies_are_distinct() {
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f1")).unwrap();
        for copy in 0..4 {
            cat.add_replica(Replica::tape("f1", "cac", copy)).unwrap();
        }
        let located = cat.locate("f1").unwrap();
        assert_eq!(located.len(), 4);
        let copies: BTreeSet<u32> = located.iter().map(|r| r.copy_index).collect();
        assert_eq!(copies, BTreeSet::from([0, 1, 2, 3]));
    }

    #[test]
    fn unknown_file_and_replica_errors() {
        let mut cat = ReplicaCatalog::new();
        assert!(matches!(
            cat.add_replica(Replica::disk("ghost", "x", false)),
            Err(CatalogError::UnknownFile(_))
        ));
        cat.register_file(record("f1")).unwrap();
        assert!(matches!(
            cat.remove_replica(&Replica::disk("f1", "x", false), false),
            Err(CatalogError::UnknownReplica { .. })
        ));
    }

    #[test]
    fn resolve_prefers_own_disk() {
        let topo = two_region_topology();
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f")).unwrap();
        cat.add_replica(Replica::disk("f", "das-a1", false))
            .unwrap();
        cat.add_replica(Replica::disk("f", "rac-a", true)).unwrap();
        let got = resolve_source(&cat, &topo, "f", "das-a1", ResolveOptions::default()).unwrap();
        assert_eq!(got, ("das-a1".to_string(), Medium::Disk));
    }

    #[test]
    fn resolve_walks_region_ancestors_nearest_first() {
        let topo = two_region_topology();
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f")).unwrap();
        cat.add_replica(Replica::disk("f", "iac-a1", false))
            .unwrap();
        cat.add_replica(Replica::disk("f", "rac-a", true)).unwrap();
        let got = resolve_source(&cat, &topo, "f", "das-a1", ResolveOptions::default()).unwrap();
        assert_eq!(got, ("iac-a1".to_string(), Medium::Disk));
    }

    #[test]
    fn resolve_pinned_at_rac_serves_das() {
        let topo = two_region_topology();
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f")).unwrap();
        cat.add_replica(Replica::disk("f", "rac-a", true)).unwrap();
        cat.add_replica(Replica::disk("f", "rac-b", true)).unwrap();
        let got = resolve_source(&cat, &topo, "f", "das-a1", ResolveOptions::default()).unwrap();
        assert_eq!(got, ("rac-a".to_string(), Medium::Disk));
    }

    #[test]
    fn resolve_cac_disk_beats_foreign_rac_disk() {
        let topo = two_region_topology();
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f")).unwrap();
        cat.add_replica(Replica::disk("f", "cac", false)).unwrap();
        cat.add_replica(Replica::disk("f", "rac-b", false)).unwrap();
        let got = resolve_source(&cat, &topo, "f", "das-a1", ResolveOptions::default()).unwrap();
        assert_eq!(got, ("cac".to_string(), Medium::Disk));
        // The configurable swap flips ranks 3 and 4.
        let swapped = resolve_source(
            &cat,
            &topo,
            "f",
            "das-a1",
            ResolveOptions {
                prefer_inter_rac_disk: true,
            },
        )
        .unwrap();
        assert_eq!(swapped, ("rac-b".to_string(), Medium::Disk));
    }

    #[test]
    fn resolve_never_returns_tape_when_disk_exists() {
        let topo = two_region_topology();
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f")).unwrap();
        cat.add_replica(Replica::tape("f", "rac-a", 0)).unwrap();
        cat.add_replica(Replica::disk("f", "rac-b", false)).unwrap();
        let got = resolve_source(&cat, &topo, "f", "das-a1", ResolveOptions::default()).unwrap();
        assert_eq!(got, ("rac-b".to_string(), Medium::Disk));
    }

    #[test]
    fn resolve_tape_rank_order() {
        let topo = two_region_topology();
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f")).unwrap();
        cat.add_replica(Replica::tape("f", "rac-b", 0)).unwrap();
        cat.add_replica(Replica::tape("f", "cac", 0)).unwrap();
        cat.add_replica(Replica::tape("f", "rac-a", 0)).unwrap();
        // Home-region RAC tape first, then CAC tape, then any tape.
        let got = resolve_source(&cat, &topo, "f", "iac-a1", ResolveOptions::default()).unwrap();
        assert_eq!(got, ("rac-a".to_string(), Medium::Tape));
        cat.remove_replica(&Replica::tape("f", "rac-a", 0), false)
            .unwrap();
        let got = resolve_source(&cat, &topo, "f", "iac-a1", ResolveOptions::default()).unwrap();
        assert_eq!(got, ("cac".to_string(), Medium::Tape));
        cat.remove_replica(&Replica::tape("f", "cac", 0), false)
            .unwrap();
        let got = resolve_source(&cat, &topo, "f", "iac-a1", ResolveOptions::default()).unwrap();
        assert_eq!(got, ("rac-b".to_string(), Medium::Tape));
    }

    #[test]
    fn resolve_no_replica() {
        let topo = two_region_topology();
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("f")).unwrap();
        assert_eq!(
            resolve_source(&cat, &topo, "f", "das-a1", ResolveOptions::default()),
            Err(CatalogError::NoReplica("f".into()))
        );
    }

    #[test]
    fn dump_roundtrips_bit_exactly() {
        let mut cat = ReplicaCatalog::new();
        for id in ["a", "b", "c"] {
            cat.register_file(record(id)).unwrap();
        }
        cat.add_replica(Replica::disk("a", "rac-a", true)).unwrap();
        cat.add_replica(Replica::tape("a", "cac", 0)).unwrap();
        cat.add_replica(Replica::tape("a", "cac", 1)).unwrap();
        cat.add_replica(Replica::disk("c", "das-a1", false))
            .unwrap();
        let dump = cat.dump();

        let mut restored = ReplicaCatalog::new();
        for id in ["a", "b", "c"] {
            restored.register_file(record(id)).unwrap();
        }
        restored.load_dump(&dump).unwrap();
        assert_eq!(restored.dump(), dump);
        assert_eq!(restored.reverse_index(), cat.reverse_index());
    }

    #[test]
    fn malformed_dump_is_positioned() {
        let mut cat = ReplicaCatalog::new();
        cat.register_file(record("a")).unwrap();
        let err = cat
            .load_dump("a\trac-a\tdisk\ttrue\t0\nbroken line\n")
            .unwrap_err();
        assert!(matches!(err, CatalogError::MalformedDump { line: 2, .. }));
    }

    #[test]
    fn dan_repeat_key_hits() {
        let mut proxy = DanProxy::new("a", NonZeroUsize::new(8).unwrap(), 0.01);
        assert_eq!(proxy.query("k", 0.5), (ServedBy::Central, 0.5));
        assert_eq!(proxy.query("k", 0.5), (ServedBy::Proxy, 0.01));
        assert_eq!((proxy.hits, proxy.misses), (1, 1));
    }

    #[test]
    fn dan_lru_trace() {
        // capacity 2, keys A,B,C,A → final cache {C,A}; the second A misses.
        let mut proxy = DanProxy::new("a", NonZeroUsize::new(2).unwrap(), 0.01);
        assert_eq!(proxy.query("A", 1.0).0, ServedBy::Central);
        assert_eq!(proxy.query("B", 1.0).0, ServedBy::Central);
        assert_eq!(proxy.query("C", 1.0).0, ServedBy::Central); // evicts A
        assert_eq!(proxy.query("A", 1.0).0, ServedBy::Central); // evicts B
        assert_eq!(proxy.len(), 2);
        assert!(proxy.contains("C") && proxy.contains("A"));
    }

    #[test]
    fn dan_cyclic_sequence_converges() {
        let mut proxy = DanProxy::new("a", NonZeroUsize::new(4).unwrap(), 0.01);
        let keys = ["w", "x", "y", "z"];
        for cycle in 0..5 {
            for k in keys {
                let (served, _) = proxy.query(k, 1.0);
                if cycle > 0 {
                    assert_eq!(served, ServedBy::Proxy, "cycle {cycle} key {k}");
                }
            }
        }
        assert_eq!(proxy.misses, 4);
        assert_eq!(proxy.hits, 16);
    }
}
