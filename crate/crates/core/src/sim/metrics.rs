//! Simulation output: per-station, per-link-class, per-job, and DAN counters,
//! plus the CSV renderings the CLI writes out.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{LinkClass, TierName, ALL_LINK_CLASSES, ALL_TIERS};
use crate::sim::scenario::JobKind;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierCounters {
    pub disk_hits: u64,
    pub disk_misses: u64,
    pub tape_stages: u64,
    pub evictions: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StationMetrics {
    pub per_tier: BTreeMap<TierName, TierCounters>,
}

impl StationMetrics {
    pub fn tier(&self, tier: TierName) -> TierCounters {
        self.per_tier.get(&tier).copied().unwrap_or_default()
    }

    pub fn totals(&self) -> TierCounters {
        let mut t = TierCounters::default();
        for c in self.per_tier.values() {
            t.disk_hits += c.disk_hits;
            t.disk_misses += c.disk_misses;
            t.tape_stages += c.tape_stages;
            t.evictions += c.evictions;
        }
        t
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkClassMetrics {
    pub bytes: u64,
    pub transfers: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobTimes {
    pub job_id: String,
    pub kind: JobKind,
    pub region_id: String,
    pub station_id: String,
    pub wait: f64,
    pub transfer: f64,
    pub compute: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DanCounters {
    pub hits: u64,
    pub misses: u64,
}

/// One completed transfer: its size and how many links of each class it
/// crossed (indexed by `LinkClass as usize`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub bytes: u64,
    pub class_crossings: [u32; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub stations: BTreeMap<String, StationMetrics>,
    pub links: BTreeMap<LinkClass, LinkClassMetrics>,
    pub jobs: Vec<JobTimes>,
    pub dan: BTreeMap<String, DanCounters>,
    /// When the last production-phase transfer completed, if it did.
    pub production_end: Option<f64>,
    /// Pinned bytes per station at the end of the production phase.
    pub pinned_at_production_end: BTreeMap<String, u64>,
    pub completed_transfers: Vec<TransferRecord>,
    pub events_processed: u64,
    pub jobs_submitted: u64,
    pub duration: f64,
}

impl Metrics {
    pub fn station(&self, id: &str) -> StationMetrics {
        self.stations.get(id).cloned().unwrap_or_default()
    }

    pub fn link(&self, class: LinkClass) -> LinkClassMetrics {
        self.links.get(&class).copied().unwrap_or_default()
    }

    /// Recompute per-class byte totals from the completed-transfer log
    /// (independent of the per-link counters; conservation oracle).
    pub fn expected_link_bytes(&self) -> BTreeMap<LinkClass, u64> {
        let mut out: BTreeMap<LinkClass, u64> = BTreeMap::new();
        for record in &self.completed_transfers {
            for class in ALL_LINK_CLASSES {
                let crossings = record.class_crossings[class as usize] as u64;
                if crossings > 0 {
                    *out.entry(class).or_default() += crossings * record.bytes;
                }
            }
        }
        out
    }

    /// `station,tier,disk_hits,disk_misses,tape_stages,evictions`: one row
    /// per station per tier, stations sorted, tiers in matrix order.
    pub fn stations_csv(&self) -> String {
        let mut out = String::from("station,tier,disk_hits,disk_misses,tape_stages,evictions\n");
        for (station, m) in &self.stations {
            for tier in ALL_TIERS {
                let c = m.tier(tier);
                writeln!(
                    out,
                    "{station},{tier},{},{},{},{}",
                    c.disk_hits, c.disk_misses, c.tape_stages, c.evictions
                )
                .expect("write to String");
            }
        }
        out
    }

    /// `link_class,bytes,transfers`: one row per class.
    pub fn links_csv(&self) -> String {
        let mut out = String::from("link_class,bytes,transfers\n");
        for class in ALL_LINK_CLASSES {
            let m = self.link(class);
            writeln!(out, "{class},{},{}", m.bytes, m.transfers).expect("write to String");
        }
        out
    }

    /// Percentile rows over completed jobs:
    /// `statistic,wait_s,transfer_s,compute_s,total_s`.
    pub fn jobs_csv(&self) -> String {
        let mut out = String::from("statistic,wait_s,transfer_s,compute_s,total_s\n");
        let n = self.jobs.len();
        writeln!(out, "count,{n},{n},{n},{n}").expect("write to String");
        let columns: [fn(&JobTimes) -> f64; 4] =
            [|j| j.wait, |j| j.transfer, |j| j.compute, |j| j.total];
        let sorted: Vec<Vec<f64>> = columns
            .iter()
            .map(|get| {
                let mut v: Vec<f64> = self.jobs.iter().map(get).collect();
                v.sort_by(f64::total_cmp);
                v
            })
            .collect();
        let mean = |v: &[f64]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        let percentile = |v: &[f64], p: f64| -> f64 {
            if v.is_empty() {
                return 0.0;
            }
            // Nearest-rank.
            let rank = ((p / 100.0) * v.len() as f64).ceil() as usize;
            v[rank.clamp(1, v.len()) - 1]
        };
        let mut row = |label: &str, f: &dyn Fn(&[f64]) -> f64| {
            writeln!(
                out,
                "{label},{:.6},{:.6},{:.6},{:.6}",
                f(&sorted[0]),
                f(&sorted[1]),
                f(&sorted[2]),
                f(&sorted[3])
            )
            .expect("write to String");
        };
        row("mean", &|v| mean(v));
        row("p50", &|v| percentile(v, 50.0));
        row("p90", &|v| percentile(v, 90.0));
        row("p99", &|v| percentile(v, 99.0));
        row("max", &|v| v.last().copied().unwrap_or(0.0));
        out
    }

    /// Human-readable run summary (deterministic, no wall-clock content).
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "simulation summary").expect("write");
        writeln!(out, "==================").expect("write");
        writeln!(out, "simulated duration: {:.3} s", self.duration).expect("write");
        match self.production_end {
            Some(t) => writeln!(out, "production phase completed at: {t:.3} s").expect("write"),
            None => writeln!(out, "production phase did not complete").expect("write"),
        }
        writeln!(out, "events processed: {}", self.events_processed).expect("write");
        writeln!(out, "jobs submitted: {}", self.jobs_submitted).expect("write");
        writeln!(out, "jobs completed: {}", self.jobs.len()).expect("write");
        writeln!(out).expect("write");

        writeln!(out, "stations (totals):").expect("write");
        for (station, m) in &self.stations {
            let t = m.totals();
            let requests = t.disk_hits + t.disk_misses;
            let rate = if requests > 0 {
                t.disk_hits as f64 / requests as f64
            } else {
                0.0
            };
            writeln!(
                out,
                "  {station}: hits {} misses {} (hit rate {:.4}) stages {} evictions {} pinned@prod {} B",
                t.disk_hits,
                t.disk_misses,
                rate,
                t.tape_stages,
                t.evictions,
                self.pinned_at_production_end.get(station).copied().unwrap_or(0)
            )
            .expect("write");
        }
        writeln!(out).expect("write");

        writeln!(out, "links:").expect("write");
        for class in ALL_LINK_CLASSES {
            let m = self.link(class);
            writeln!(out, "  {class}: {} B in {} transfers", m.bytes, m.transfers).expect("write");
        }
        writeln!(out).expect("write");

        writeln!(out, "database proxies:").expect("write");
        for (region, d) in &self.dan {
            writeln!(out, "  {region}: hits {} misses {}", d.hits, d.misses).expect("write");
        }
        out
    }
}
