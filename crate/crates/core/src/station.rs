//! Per-station storage engines: a disk split into a pinned area and an
//! on-demand LRU cache, plus tape with staging latency.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::apply_fraction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StationError {
    #[error("pinning {requested} B would exceed the pin budget ({pin_budget} B of {capacity} B)")]
    PinnedOverflow {
        requested: u64,
        pin_budget: u64,
        capacity: u64,
    },
    #[error("file of {size} B cannot fit the on-demand area ({max} B)")]
    FileLargerThanCache { size: u64, max: u64 },
}

/// Outcome of a cache lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestOutcome {
    DiskHit,
    Miss,
}

/// Running hit/miss/eviction counters for one cache.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
}

/// A station's disk: pinned bytes that never move plus an on-demand area
/// managed strictly LRU. Recency is an internal monotone stamp, bumped on
/// every admit and on every on-demand hit, so eviction order is total.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskCache {
    capacity: u64,
    /// Largest pinned_bytes allowed: capacity minus the on-demand reserve.
    pin_budget: u64,
    pinned_bytes: u64,
    on_demand_bytes: u64,
    pinned: BTreeMap<String, u64>,
    entries: BTreeMap<String, Entry>,
    by_recency: BTreeMap<u64, String>,
    stamp: u64,
    pub stats: CacheStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    size: u64,
    stamp: u64,
}

impl DiskCache {
    /// `on_demand_min_fraction` of the capacity stays reserved for the cache.
    pub fn new(capacity: u64, on_demand_min_fraction: f64) -> Self {
        let reserve = apply_fraction(capacity, on_demand_min_fraction);
        DiskCache {
            capacity,
            pin_budget: capacity.saturating_sub(reserve),
            pinned_bytes: 0,
            on_demand_bytes: 0,
            pinned: BTreeMap::new(),
            entries: BTreeMap::new(),
            by_recency: BTreeMap::new(),
            stamp: 0,
            stats: CacheStats::default(),
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn pinned_bytes(&self) -> u64 {
        self.pinned_bytes
    }

    pub fn occupancy(&self) -> u64 {
        self.pinned_bytes + self.on_demand_bytes
    }

    /// Bytes the on-demand area may grow to right now.
    pub fn on_demand_max(&self) -> u64 {
        self.capacity - self.pinned_bytes
    }

    pub fn contains(&self, file_id: &str) -> bool {
        self.pinned.contains_key(file_id) || self.entries.contains_key(file_id)
    }

    pub fn is_pinned(&self, file_id: &str) -> bool {
        self.pinned.contains_key(file_id)
    }

    fn next_stamp(&mut self) -> u64 {
        self.stamp += 1;
        self.stamp
    }

    fn evict_lru(&mut self) -> (String, u64) {
        let (&stamp, _) = self
            .by_recency
            .iter()
            .next()
            .expect("eviction from empty cache");
        let id = self.by_recency.remove(&stamp).expect("stamp present");
        let entry = self.entries.remove(&id).expect("entry present");
        self.on_demand_bytes -= entry.size;
        self.stats.evictions += 1;
        (id, entry.size)
    }

    /// Pin a file, evicting on-demand entries (LRU first) to make room.
    /// Fails without state change if the pin budget would be exceeded.
    pub fn pin(&mut self, file_id: &str, size: u64) -> Result<Vec<(String, u64)>, StationError> {
        if self.pinned.contains_key(file_id) {
            return Ok(Vec::new());
        }
        if self.pinned_bytes + size > self.pin_budget {
            return Err(StationError::PinnedOverflow {
                requested: size,
                pin_budget: self.pin_budget,
                capacity: self.capacity,
            });
        }
        // A file moving from the on-demand area into the pinned area is not an
        // eviction; drop the cache entry silently.
        if let Some(entry) = self.entries.remove(file_id) {
            self.by_recency.remove(&entry.stamp);
            self.on_demand_bytes -= entry.size;
        }
        let mut evicted = Vec::new();
        while self.occupancy() + size > self.capacity {
            evicted.push(self.evict_lru());
        }
        self.pinned.insert(file_id.to_string(), size);
        self.pinned_bytes += size;
        Ok(evicted)
    }

    /// Look a file up; refreshes recency for on-demand residents.
    pub fn request(&mut self, file_id: &str) -> RequestOutcome {
        if self.pinned.contains_key(file_id) {
            self.stats.hits += 1;
            return RequestOutcome::DiskHit;
        }
        if let Some(entry) = self.entries.get(file_id).copied() {
            self.by_recency.remove(&entry.stamp);
            let stamp = self.next_stamp();
            self.by_recency.insert(stamp, file_id.to_string());
            self.entries.insert(
                file_id.to_string(),
                Entry {
                    size: entry.size,
                    stamp,
                },
            );
            self.stats.hits += 1;
            return RequestOutcome::DiskHit;
        }
        self.stats.misses += 1;
        RequestOutcome::Miss
    }

    /// Insert a fetched file as most-recent, evicting LRU entries until it
    /// fits. Returns what was evicted so the catalog can drop replicas.
    pub fn admit(&mut self, file_id: &str, size: u64) -> Result<Vec<(String, u64)>, StationError> {
        if size > self.on_demand_max() {
            return Err(StationError::FileLargerThanCache {
                size,
                max: self.on_demand_max(),
            });
        }
        if self.pinned.contains_key(file_id) {
            return Ok(Vec::new());
        }
        // Re-admitting refreshes size and recency.
        if let Some(entry) = self.entries.remove(file_id) {
            self.by_recency.remove(&entry.stamp);
            self.on_demand_bytes -= entry.size;
        }
        let mut evicted = Vec::new();
        while self.occupancy() + size > self.capacity {
            evicted.push(self.evict_lru());
        }
        let stamp = self.next_stamp();
        self.entries
            .insert(file_id.to_string(), Entry { size, stamp });
        self.by_recency.insert(stamp, file_id.to_string());
        self.on_demand_bytes += size;
        Ok(evicted)
    }

    /// On-demand residents, least recently used first (diagnostics/tests).
    pub fn on_demand_lru_order(&self) -> Vec<(String, u64)> {
        self.by_recency
            .values()
            .map(|id| (id.clone(), self.entries[id].size))
            .collect()
    }
}

pub const DEFAULT_TAPE_MOUNT_LATENCY: f64 = 60.0;
pub const DEFAULT_TAPE_STREAM_RATE: f64 = 30_000_000.0;

/// Archival tape. Never evicts; overflow is a planning error, not a runtime one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapeStore {
    pub capacity: u64,
    pub occupancy: u64,
    /// Seconds to mount before streaming begins.
    pub mount_latency: f64,
    /// Bytes per second once streaming.
    pub stream_rate: f64,
}

impl TapeStore {
    pub fn new(capacity: u64) -> Self {
        TapeStore {
            capacity,
            occupancy: 0,
            mount_latency: DEFAULT_TAPE_MOUNT_LATENCY,
            stream_rate: DEFAULT_TAPE_STREAM_RATE,
        }
    }

    /// Seconds to stage `size` bytes off tape: mount plus streaming.
    pub fn stage_time(&self, size: u64) -> f64 {
        self.mount_latency + size as f64 / self.stream_rate
    }

    /// Record bytes written to tape. Capacity is a planner-enforced bound, so
    /// this only reports whether it was respected.
    pub fn store(&mut self, bytes: u64) -> bool {
        self.occupancy += bytes;
        self.occupancy <= self.capacity
    }
}

/// Convenience wrapper matching the staging-time contract.
pub fn tape_stage_time(tape: &TapeStore, size: u64) -> f64 {
    tape.stage_time(size)
}
