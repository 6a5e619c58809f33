//! Placement policy: the per-tier placement matrix, pre-emptive pinning rules,
//! deterministic partitioning of fractional tiers across RACs, and the
//! on-demand cache budget.
//!
//! Fractions are copies × coverage: 4.0 on tape means four archival copies of
//! every file, 0.1 on disk means a deterministically selected 10% of files.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::stable_hash64;
use crate::model::{FileRecord, Medium, Station, StationKind, TierName, Topology, ALL_TIERS};

/// Placement fractions for one tier: {CAC tape, CAC disk, RAC tape, RAC disk}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierPlacement {
    pub cac_tape: f64,
    pub cac_disk: f64,
    pub rac_tape: f64,
    pub rac_disk: f64,
}

impl TierPlacement {
    pub const fn new(cac_tape: f64, cac_disk: f64, rac_tape: f64, rac_disk: f64) -> Self {
        TierPlacement {
            cac_tape,
            cac_disk,
            rac_tape,
            rac_disk,
        }
    }

    pub const ZERO: TierPlacement = TierPlacement::new(0.0, 0.0, 0.0, 0.0);
}

pub const DEFAULT_FEW_PERCENT: f64 = 0.05;
pub const DEFAULT_ON_DEMAND_MIN_FRACTION: f64 = 0.10;

/// The full placement matrix plus the two tunables that shape it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    pub tiers: BTreeMap<TierName, TierPlacement>,
    /// Substituted wherever the matrix reads "a few percent".
    pub few_percent: f64,
    /// Fraction of each station's disk reserved for the on-demand cache.
    pub on_demand_min_fraction: f64,
}

impl PolicyTable {
    /// Build the default matrix with a custom few-percent substitution.
    pub fn with_params(few_percent: f64, on_demand_min_fraction: f64) -> Self {
        use TierName::*;
        let few = few_percent;
        let rows: [(TierName, TierPlacement); 11] = [
            (Raw, TierPlacement::new(1.0, 0.1, 0.0, 0.0)),
            (Reco, TierPlacement::new(1.0, 0.1, 0.01, 0.0)),
            (Dst, TierPlacement::new(1.0, 1.0, 0.1, 0.1)),
            (Tmb, TierPlacement::new(4.0, 1.0, 1.0, 1.0)),
            (Derived, TierPlacement::new(4.0, 1.0, 1.0, 1.0)),
            (McD0star, TierPlacement::ZERO),
            (McD0sim, TierPlacement::ZERO),
            (McDst, TierPlacement::new(1.0, few, few, few)),
            (McTmb, TierPlacement::new(1.0, 1.0, 0.0, 0.1)),
            (McPmcs, TierPlacement::new(1.0, 1.0, 0.0, 0.1)),
            (McRoottuple, TierPlacement::new(1.0, 0.0, 0.1, 0.0)),
        ];
        PolicyTable {
            tiers: rows.into_iter().collect(),
            few_percent,
            on_demand_min_fraction,
        }
    }

    pub fn placement(&self, tier: TierName) -> TierPlacement {
        self.tiers
            .get(&tier)
            .copied()
            .unwrap_or(TierPlacement::ZERO)
    }

    /// Sanity checks on fractions; multi-copy (>1) is only meaningful on tape.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (tier, p) in &self.tiers {
            for (label, v) in [
                ("cac_tape", p.cac_tape),
                ("cac_disk", p.cac_disk),
                ("rac_tape", p.rac_tape),
                ("rac_disk", p.rac_disk),
            ] {
                if !v.is_finite() || v < 0.0 {
                    out.push(format!("{tier}.{label} must be >= 0"));
                } else if v > 1.0 && label.ends_with("disk") {
                    out.push(format!(
                        "{tier}.{label}: fractions > 1 are only permitted on tape"
                    ));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.few_percent) {
            out.push("few_percent must be within [0, 1]".into());
        }
        if !(0.0..1.0).contains(&self.on_demand_min_fraction) {
            out.push("on_demand_min_fraction must be within [0, 1)".into());
        }
        out
    }
}

impl Default for PolicyTable {
    fn default() -> Self {
        PolicyTable::with_params(DEFAULT_FEW_PERCENT, DEFAULT_ON_DEMAND_MIN_FRACTION)
    }
}

/// The default placement matrix.
pub fn default_policy() -> PolicyTable {
    PolicyTable::default()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("rac list must not be empty")]
    EmptyRacList,
    #[error(
        "pinned set overflows station `{station_id}`: pinned {pinned_bytes} B of {disk_capacity} B disk leaves less than the on-demand reserve; raise disk to at least {required_disk} B"
    )]
    PinnedOverflow {
        station_id: String,
        pinned_bytes: u64,
        disk_capacity: u64,
        /// Smallest disk capacity that would satisfy the budget rule.
        required_disk: u64,
    },
}

// Fractions are resolved at parts-per-million so byte arithmetic stays exact.
pub(crate) fn fraction_ppm(fraction: f64) -> u64 {
    (fraction * 1_000_000.0).round() as u64
}

/// bytes × fraction, rounded half-up at ppm resolution.
pub(crate) fn apply_fraction(bytes: u64, fraction: f64) -> u64 {
    let ppm = fraction_ppm(fraction) as u128;
    ((bytes as u128 * ppm + 500_000) / 1_000_000) as u64
}

fn ceil_div(num: u128, den: u128) -> u128 {
    num.div_ceil(den)
}

/// Files ordered by (stable hash, id): the canonical order every fractional
/// selection draws from.
fn hash_order(files: &[FileRecord]) -> Vec<&FileRecord> {
    let mut keyed: Vec<(u64, &FileRecord)> = files
        .iter()
        .map(|f| (stable_hash64(&f.file_id), f))
        .collect();
    keyed.sort_by(|(ha, fa), (hb, fb)| ha.cmp(hb).then_with(|| fa.file_id.cmp(&fb.file_id)));
    keyed.into_iter().map(|(_, f)| f).collect()
}

/// How many of `n` files a coverage fraction selects.
fn covered_count(n: usize, coverage: f64) -> usize {
    ((n as f64) * coverage.clamp(0.0, 1.0)).round() as usize
}

/// A disjoint assignment of one tier's files to RACs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DstPartition {
    pub shares: BTreeMap<String, BTreeSet<String>>,
    owners: BTreeMap<String, String>,
}

impl DstPartition {
    pub fn share(&self, rac_id: &str) -> Option<&BTreeSet<String>> {
        self.shares.get(rac_id)
    }

    /// The RAC that owns a file, if the file is covered at all.
    pub fn owner(&self, file_id: &str) -> Option<&str> {
        self.owners.get(file_id).map(String::as_str)
    }

    pub fn covered_files(&self) -> usize {
        self.owners.len()
    }
}

/// Deterministically partition one tier's files across RACs.
///
/// Files are taken in stable-hash order; the covered prefix
/// (round(min(1, n_racs × fraction) × n_files) files) is dealt round-robin to
/// the RAC list, so shares are pairwise disjoint and balanced within one file.
pub fn partition_tier(
    files: &[FileRecord],
    racs: &[String],
    fraction: f64,
) -> Result<DstPartition, PolicyError> {
    if racs.is_empty() {
        return Err(PolicyError::EmptyRacList);
    }
    assert!(
        (0.0..=1.0).contains(&fraction),
        "per-RAC fraction must be within [0, 1], got {fraction}"
    );
    debug_assert!(
        files.windows(2).all(|w| w[0].tier.name == w[1].tier.name),
        "partition_tier expects files of a single tier"
    );

    let coverage = (racs.len() as f64 * fraction).min(1.0);
    let covered = covered_count(files.len(), coverage);
    let mut partition = DstPartition::default();
    for rac in racs {
        partition.shares.entry(rac.clone()).or_default();
    }
    for (i, file) in hash_order(files).into_iter().take(covered).enumerate() {
        let rac = &racs[i % racs.len()];
        partition
            .shares
            .get_mut(rac)
            .expect("share pre-created")
            .insert(file.file_id.clone());
        partition.owners.insert(file.file_id.clone(), rac.clone());
    }
    Ok(partition)
}

/// Covered-file selection for a single site (CAC-side fractional placements).
fn coverage_select(files: &[FileRecord], fraction: f64) -> BTreeSet<String> {
    let covered = covered_count(files.len(), fraction);
    hash_order(files)
        .into_iter()
        .take(covered)
        .map(|f| f.file_id.clone())
        .collect()
}

/// All fractional-placement selections for a file population, computed once
/// per scenario and shared by the planner and the simulator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlacementPlan {
    /// Fractional rac_disk tiers → per-RAC pinned shares.
    pub disk_partitions: BTreeMap<TierName, DstPartition>,
    /// Fractional rac_tape tiers → per-RAC archival ownership.
    pub tape_partitions: BTreeMap<TierName, DstPartition>,
    /// Fractional cac_disk tiers → covered files.
    pub cac_disk_cover: BTreeMap<TierName, BTreeSet<String>>,
    /// Fractional cac_tape tiers → covered files.
    pub cac_tape_cover: BTreeMap<TierName, BTreeSet<String>>,
}

fn is_fractional(f: f64) -> bool {
    f > 0.0 && f < 1.0
}

impl PlacementPlan {
    pub fn build(
        files_by_tier: &BTreeMap<TierName, Vec<FileRecord>>,
        policy: &PolicyTable,
        racs: &[String],
    ) -> Result<PlacementPlan, PolicyError> {
        let mut plan = PlacementPlan::default();
        for (&tier, files) in files_by_tier {
            let p = policy.placement(tier);
            if !racs.is_empty() {
                if is_fractional(p.rac_disk) {
                    plan.disk_partitions
                        .insert(tier, partition_tier(files, racs, p.rac_disk)?);
                }
                if is_fractional(p.rac_tape) {
                    plan.tape_partitions
                        .insert(tier, partition_tier(files, racs, p.rac_tape)?);
                }
            }
            if is_fractional(p.cac_disk) {
                plan.cac_disk_cover
                    .insert(tier, coverage_select(files, p.cac_disk));
            }
            if is_fractional(p.cac_tape) {
                plan.cac_tape_cover
                    .insert(tier, coverage_select(files, p.cac_tape));
            }
        }
        Ok(plan)
    }
}

/// Files that must sit pinned on `station`'s disk under `policy`.
///
/// RACs pin every file of full-coverage tiers plus their partition share of
/// fractional tiers; the CAC pins full-coverage CAC-disk tiers; IAC/DAS pin
/// nothing (they hold only on-demand cache).
pub fn pinned_set(
    station: &Station,
    files_by_tier: &BTreeMap<TierName, Vec<FileRecord>>,
    policy: &PolicyTable,
    plan: &PlacementPlan,
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    match station.kind {
        StationKind::Rac => {
            for (&tier, files) in files_by_tier {
                let p = policy.placement(tier);
                if p.rac_disk >= 1.0 {
                    out.extend(files.iter().map(|f| f.file_id.clone()));
                } else if let Some(partition) = plan.disk_partitions.get(&tier) {
                    if let Some(share) = partition.share(&station.station_id) {
                        out.extend(share.iter().cloned());
                    }
                }
            }
        }
        StationKind::Cac => {
            for (&tier, files) in files_by_tier {
                if policy.placement(tier).cac_disk >= 1.0 {
                    out.extend(files.iter().map(|f| f.file_id.clone()));
                }
            }
        }
        StationKind::Iac | StationKind::Das => {}
    }
    out
}

/// Every placement target for one file: (station, medium, copy count).
///
/// Full-coverage fractions place at every site of the class; fractional ones
/// place only if the file is covered (CAC) or owned (RAC partition).
pub fn archival_targets(
    file: &FileRecord,
    policy: &PolicyTable,
    topology: &Topology,
    plan: &PlacementPlan,
) -> Vec<(String, Medium, u32)> {
    let p = policy.placement(file.tier.name);
    let cac_id = topology.cac().station_id.clone();
    let mut out = Vec::new();

    if p.cac_tape >= 1.0 {
        out.push((cac_id.clone(), Medium::Tape, p.cac_tape.ceil() as u32));
    } else if is_fractional(p.cac_tape)
        && plan
            .cac_tape_cover
            .get(&file.tier.name)
            .is_some_and(|cover| cover.contains(&file.file_id))
    {
        out.push((cac_id.clone(), Medium::Tape, 1));
    }

    if p.cac_disk >= 1.0 {
        out.push((cac_id.clone(), Medium::Disk, 1));
    } else if is_fractional(p.cac_disk)
        && plan
            .cac_disk_cover
            .get(&file.tier.name)
            .is_some_and(|cover| cover.contains(&file.file_id))
    {
        out.push((cac_id, Medium::Disk, 1));
    }

    for rac in topology.rac_ids() {
        let owns_disk_share = is_fractional(p.rac_disk)
            && plan
                .disk_partitions
                .get(&file.tier.name)
                .and_then(|part| part.owner(&file.file_id))
                == Some(rac.as_str());
        if p.rac_disk >= 1.0 || owns_disk_share {
            out.push((rac.clone(), Medium::Disk, 1));
        }
        if p.rac_tape >= 1.0 {
            out.push((rac.clone(), Medium::Tape, p.rac_tape.ceil() as u32));
        } else if is_fractional(p.rac_tape)
            && plan
                .tape_partitions
                .get(&file.tier.name)
                .and_then(|part| part.owner(&file.file_id))
                == Some(rac.as_str())
        {
            out.push((rac, Medium::Tape, 1));
        }
    }
    out
}

/// On-demand cache budget left after pinning, or an overflow diagnosis.
pub fn on_demand_budget(
    station: &Station,
    pinned_bytes: u64,
    policy: &PolicyTable,
) -> Result<u64, PolicyError> {
    let reserve = apply_fraction(station.disk_capacity, policy.on_demand_min_fraction);
    let pin_budget = station.disk_capacity.saturating_sub(reserve);
    if pinned_bytes > pin_budget {
        let keep_ppm = 1_000_000 - fraction_ppm(policy.on_demand_min_fraction) as u128;
        let required_disk = ceil_div(pinned_bytes as u128 * 1_000_000, keep_ppm) as u64;
        return Err(PolicyError::PinnedOverflow {
            station_id: station.station_id.clone(),
            pinned_bytes,
            disk_capacity: station.disk_capacity,
            required_disk,
        });
    }
    Ok(station.disk_capacity - pinned_bytes)
}

/// The canonical tier order of the placement matrix.
pub fn matrix_tiers() -> [TierName; 11] {
    ALL_TIERS
}
