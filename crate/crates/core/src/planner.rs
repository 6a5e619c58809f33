//! Static capacity planning: storage totals from the placement matrix, CPU
//! allocation accounting from the resource registry, growth projection, and
//! capacity fit checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{
    DataTier, FileRecord, Medium, StationKind, TierName, Topology, Violation, ALL_TIERS,
};
use crate::policy::{
    apply_fraction, on_demand_budget, pinned_set, PlacementPlan, PolicyError, PolicyTable,
};
use crate::sim::Scenario;

/// One surveyed center: what is allocated to the experiment and what exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceEntry {
    pub center: String,
    pub iacs: Vec<String>,
    pub cpu_allocated_ghz: f64,
    pub cpu_total_ghz: Option<f64>,
    pub disk_allocated_tb: f64,
    pub disk_total_tb: Option<f64>,
    pub tape_tb: Option<f64>,
    pub schedule: String,
    /// Marks the central site; everything else counts as remote.
    pub is_cac: bool,
}

/// Site classes a storage report covers. `PerRac` figures are per regional
/// center, not summed across them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SiteClass {
    Cac,
    PerRac,
}

impl SiteClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SiteClass::Cac => "CAC",
            SiteClass::PerRac => "PER_RAC",
        }
    }
}

/// Per-tier bytes for one (site class, medium) cell, with an exact total.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TierBytes {
    pub by_tier: BTreeMap<TierName, u64>,
    pub total: u64,
}

impl TierBytes {
    fn insert(&mut self, tier: TierName, bytes: u64) {
        if bytes > 0 {
            self.by_tier.insert(tier, bytes);
            self.total += bytes;
        }
    }
}

/// Storage demand implied by event counts and the placement matrix.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StorageReport {
    pub cac_tape: TierBytes,
    pub cac_disk: TierBytes,
    pub rac_tape: TierBytes,
    pub rac_disk: TierBytes,
    pub n_racs: u64,
}

impl StorageReport {
    pub fn cell(&self, site: SiteClass, medium: Medium) -> &TierBytes {
        match (site, medium) {
            (SiteClass::Cac, Medium::Tape) => &self.cac_tape,
            (SiteClass::Cac, Medium::Disk) => &self.cac_disk,
            (SiteClass::PerRac, Medium::Tape) => &self.rac_tape,
            (SiteClass::PerRac, Medium::Disk) => &self.rac_disk,
        }
    }

    /// `site_class,medium,tier,bytes` rows plus a TOTAL row per cell.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("site_class,medium,tier,bytes\n");
        for site in [SiteClass::Cac, SiteClass::PerRac] {
            for medium in [Medium::Tape, Medium::Disk] {
                let cell = self.cell(site, medium);
                for tier in ALL_TIERS {
                    if let Some(bytes) = cell.by_tier.get(&tier) {
                        writeln!(out, "{},{medium},{tier},{bytes}", site.as_str())
                            .expect("write to String");
                    }
                }
                writeln!(out, "{},{medium},TOTAL,{}", site.as_str(), cell.total)
                    .expect("write to String");
            }
        }
        out
    }
}

/// Storage demand per site class from per-tier event counts.
///
/// CAC cells scale by the CAC fractions; per-RAC cells scale by the RAC
/// fractions, which are already per-center figures (full-coverage tiers are
/// replicated at every RAC; fractional tiers are one partitioned share).
/// All arithmetic is exact integer bytes at ppm fraction resolution.
pub fn storage_totals(
    event_counts: &BTreeMap<TierName, u64>,
    policy: &PolicyTable,
    n_racs: u64,
) -> StorageReport {
    let mut report = StorageReport {
        n_racs,
        ..StorageReport::default()
    };
    for tier in ALL_TIERS {
        let events = event_counts.get(&tier).copied().unwrap_or(0);
        if events == 0 {
            continue;
        }
        let logical = events * DataTier::with_default_size(tier).event_size_bytes();
        let p = policy.placement(tier);
        report
            .cac_tape
            .insert(tier, apply_fraction(logical, p.cac_tape));
        report
            .cac_disk
            .insert(tier, apply_fraction(logical, p.cac_disk));
        report
            .rac_tape
            .insert(tier, apply_fraction(logical, p.rac_tape));
        report
            .rac_disk
            .insert(tier, apply_fraction(logical, p.rac_disk));
    }
    report
}

/// CPU accounting against a requirement, all in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpuSummary {
    pub allocated_remote: f64,
    pub total_remote: f64,
    pub cac: f64,
    pub requirement: f64,
    pub shortfall: f64,
}

/// Sum the registry: remote allocations, remote totals (falling back to the
/// allocation when no total is known), the central site, and the shortfall
/// against `requirement`.
pub fn cpu_summary(registry: &[ResourceEntry], requirement: f64) -> CpuSummary {
    let mut allocated_remote = 0.0;
    let mut total_remote = 0.0;
    let mut cac = 0.0;
    for e in registry {
        if e.is_cac {
            cac += e.cpu_allocated_ghz;
        } else {
            allocated_remote += e.cpu_allocated_ghz;
            total_remote += e.cpu_total_ghz.unwrap_or(e.cpu_allocated_ghz);
        }
    }
    CpuSummary {
        allocated_remote,
        total_remote,
        cac,
        requirement,
        shortfall: requirement - (allocated_remote + cac),
    }
}

/// Annual archive growth at the central site.
pub const DEFAULT_TAPE_GROWTH_BYTES_PER_YEAR: u64 = 1_000_000_000_000_000;

/// Scale a cell to exactly `target_total` bytes, apportioning the tier
/// breakdown proportionally (largest-remainder, ties in tier order) so the
/// breakdown still sums to the total exactly.
fn scale_cell_to(cell: &TierBytes, target_total: u64) -> TierBytes {
    let mut scaled = TierBytes::default();
    if cell.total == 0 || cell.by_tier.is_empty() {
        scaled.total = target_total;
        return scaled;
    }
    let den = cell.total as u128;
    let num = target_total as u128;
    let mut floors: Vec<(TierName, u64, u128)> = cell
        .by_tier
        .iter()
        .map(|(&tier, &bytes)| {
            let product = bytes as u128 * num;
            (tier, (product / den) as u64, product % den)
        })
        .collect();
    let assigned: u64 = floors.iter().map(|(_, f, _)| f).sum();
    let mut leftover = target_total - assigned;
    // Hand out the remaining bytes to the largest fractional remainders.
    let mut order: Vec<usize> = (0..floors.len()).collect();
    order.sort_by(|&a, &b| floors[b].2.cmp(&floors[a].2).then(a.cmp(&b)));
    for &i in &order {
        if leftover == 0 {
            break;
        }
        floors[i].1 += 1;
        leftover -= 1;
    }
    for (tier, bytes, _) in floors {
        scaled.insert(tier, bytes);
    }
    debug_assert_eq!(scaled.total, target_total);
    scaled
}

/// Project a report forward: CAC tape grows by exactly `rate` bytes per year
/// and every other cell keeps its ratio to CAC tape. Returns one report per
/// year, index 0 being the base. A report with no archive (zero CAC tape)
/// projects the tape growth alone.
pub fn growth_projection(base: &StorageReport, years: u64, rate: u64) -> Vec<StorageReport> {
    let base_tape = base.cac_tape.total;
    let mut out = Vec::with_capacity(years as usize + 1);
    out.push(base.clone());
    for year in 1..=years {
        let grown_tape = base_tape + rate * year;
        let ratio_total = |cell: &TierBytes| -> u64 {
            if base_tape == 0 {
                cell.total
            } else {
                ((cell.total as u128 * grown_tape as u128 + base_tape as u128 / 2)
                    / base_tape as u128) as u64
            }
        };
        out.push(StorageReport {
            cac_tape: scale_cell_to(&base.cac_tape, grown_tape),
            cac_disk: scale_cell_to(&base.cac_disk, ratio_total(&base.cac_disk)),
            rac_tape: scale_cell_to(&base.rac_tape, ratio_total(&base.rac_tape)),
            rac_disk: scale_cell_to(&base.rac_disk, ratio_total(&base.rac_disk)),
            n_racs: base.n_racs,
        });
    }
    out
}

/// Flag stations whose pinned-disk requirement breaks the on-demand budget or
/// whose tape requirement exceeds capacity, judging by the report's demand.
pub fn fit_check(
    report: &StorageReport,
    topology: &Topology,
    policy: &PolicyTable,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for station in &topology.stations {
        let (pinned_demand, tape_demand) = match station.kind {
            StationKind::Cac => {
                // Fractional CAC-disk placements live in the on-demand area,
                // so only full-coverage tiers count as pinned demand.
                let pinned: u64 = report
                    .cac_disk
                    .by_tier
                    .iter()
                    .filter(|(tier, _)| policy.placement(**tier).cac_disk >= 1.0)
                    .map(|(_, b)| b)
                    .sum();
                (pinned, report.cac_tape.total)
            }
            StationKind::Rac => (report.rac_disk.total, report.rac_tape.total),
            _ => continue,
        };
        match on_demand_budget(station, pinned_demand, policy) {
            Ok(_) => {}
            Err(PolicyError::PinnedOverflow { required_disk, .. }) => {
                out.push(Violation::new(
                    &station.station_id,
                    format!(
                        "pinned demand {pinned_demand} B breaks the on-demand budget on {} B disk (requires {required_disk} B)",
                        station.disk_capacity
                    ),
                ));
            }
            Err(PolicyError::EmptyRacList) => unreachable!("budget takes no rac list"),
        }
        if tape_demand > station.tape_capacity {
            out.push(Violation::new(
                &station.station_id,
                format!(
                    "tape demand {tape_demand} B exceeds tape_capacity {} B",
                    station.tape_capacity
                ),
            ));
        }
    }
    out
}

/// Exact pinned bytes per CAC/RAC station for a scenario's generated file
/// population. The simulator's end-of-production pinned bytes must equal this.
pub fn predict_pinned_bytes(scenario: &Scenario) -> Result<BTreeMap<String, u64>, PolicyError> {
    let mut files_by_tier: BTreeMap<TierName, Vec<FileRecord>> = BTreeMap::new();
    for ds in &scenario.datasets {
        files_by_tier
            .entry(ds.tier)
            .or_default()
            .extend(ds.generate_files());
    }
    let racs = scenario.topology.rac_ids();
    let plan = PlacementPlan::build(&files_by_tier, &scenario.policy, &racs)?;
    let sizes: BTreeMap<&str, u64> = files_by_tier
        .values()
        .flatten()
        .map(|f| (f.file_id.as_str(), f.size))
        .collect();
    let mut out = BTreeMap::new();
    for station in &scenario.topology.stations {
        if !matches!(station.kind, StationKind::Cac | StationKind::Rac) {
            out.insert(station.station_id.clone(), 0);
            continue;
        }
        let pins = pinned_set(station, &files_by_tier, &scenario.policy, &plan);
        let bytes = pins.iter().map(|id| sizes[id.as_str()]).sum();
        out.insert(station.station_id.clone(), bytes);
    }
    Ok(out)
}

/// Event counts per tier implied by a scenario's datasets.
pub fn event_counts(scenario: &Scenario) -> BTreeMap<TierName, u64> {
    let mut out = BTreeMap::new();
    for ds in &scenario.datasets {
        *out.entry(ds.tier).or_insert(0) += ds.events;
    }
    out
}
