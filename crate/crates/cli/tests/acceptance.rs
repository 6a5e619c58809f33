//! Acceptance suite: every shipping criterion as one test, each printing a
//! pass line with its measured runtime (visible with `--nocapture`):
//!
//!   cargo test -p racsim-cli --test acceptance -- --nocapture
//!
//! Criteria cover the default placement matrix, the reference capacity plan,
//! CPU accounting, growth projection, full thumbnail coverage at a regional
//! center, LRU-oracle equivalence, bundle determinism, conservation sweeps,
//! partition properties, and planner/simulator agreement.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use racsim_cli::commands::{cmd_plan, cmd_simulate, PlanFlags, SimulateFlags};
use racsim_core::{
    default_policy, growth_projection, partition_tier, predict_pinned_bytes, run_with_options,
    ArrivalSpec, DataTier, DatasetSpec, DiskCache, FileRecord, PopularityWeight, RequestOutcome,
    RunOptions, Scenario, Station, StationError, StationKind, TierName, Topology,
    DEFAULT_TAPE_GROWTH_BYTES_PER_YEAR,
};

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn pass(criterion: u32, label: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= budget,
        "criterion {criterion} ({label}) exceeded its {budget:?} budget: took {elapsed:?}"
    );
    println!(
        "acceptance: criterion {criterion:2} ({label}): PASS in {:.3}s (budget {:.0}s)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
}

// ── 1: placement-matrix fidelity ─────────────────────────────────────────

#[test]
fn criterion_01_placement_matrix_fidelity() {
    let t = Instant::now();
    let policy = default_policy();
    let expect: [(TierName, [f64; 4]); 11] = [
        (TierName::Raw, [1.0, 0.1, 0.0, 0.0]),
        (TierName::Reco, [1.0, 0.1, 0.01, 0.0]),
        (TierName::Dst, [1.0, 1.0, 0.1, 0.1]),
        (TierName::Tmb, [4.0, 1.0, 1.0, 1.0]),
        (TierName::Derived, [4.0, 1.0, 1.0, 1.0]),
        (TierName::McD0star, [0.0, 0.0, 0.0, 0.0]),
        (TierName::McD0sim, [0.0, 0.0, 0.0, 0.0]),
        (TierName::McDst, [1.0, 0.05, 0.05, 0.05]),
        (TierName::McTmb, [1.0, 1.0, 0.0, 0.1]),
        (TierName::McPmcs, [1.0, 1.0, 0.0, 0.1]),
        (TierName::McRoottuple, [1.0, 0.0, 0.1, 0.0]),
    ];
    assert_eq!(policy.tiers.len(), 11);
    for (tier, [cac_tape, cac_disk, rac_tape, rac_disk]) in expect {
        let p = policy.placement(tier);
        assert_eq!(
            [p.cac_tape, p.cac_disk, p.rac_tape, p.rac_disk],
            [cac_tape, cac_disk, rac_tape, rac_disk],
            "{tier}"
        );
    }
    pass(1, "placement matrix fidelity", t, Duration::from_secs(1));
}

// ── 2–4: the reference capacity plan ─────────────────────────────────────

#[test]
fn criterion_02_central_tape_total() {
    let t = Instant::now();
    let bundle = cmd_plan(&scenario_path("run2a.toml"), &PlanFlags::default()).unwrap();
    let storage = bundle.report.storage.as_ref().unwrap();
    assert_eq!(storage.cac_tape.total, 1_470_000_000_000_000);
    let relative = (storage.cac_tape.total as f64 - 1.5e15).abs() / 1.5e15;
    assert!(
        relative <= 0.05,
        "CAC tape {} vs 1.5 PB: {relative:.4}",
        storage.cac_tape.total
    );
    pass(2, "central tape total 1.47 PB", t, Duration::from_secs(1));
}

#[test]
fn criterion_03_per_rac_pinned_disk() {
    let t = Instant::now();
    let bundle = cmd_plan(&scenario_path("run2a.toml"), &PlanFlags::default()).unwrap();
    let storage = bundle.report.storage.as_ref().unwrap();
    assert_eq!(storage.rac_disk.total, 52_500_000_000_000);
    let relative = (storage.rac_disk.total as f64 - 50.0e12).abs() / 50.0e12;
    assert!(
        relative <= 0.25,
        "per-RAC disk {} vs ~50 TB: {relative:.4}",
        storage.rac_disk.total
    );
    pass(3, "per-RAC pinned disk 52.5 TB", t, Duration::from_secs(1));
}

#[test]
fn criterion_04_cpu_accounting() {
    let t = Instant::now();
    let bundle = cmd_plan(&scenario_path("run2a.toml"), &PlanFlags::default()).unwrap();
    let cpu = bundle.report.cpu.as_ref().unwrap();
    assert_eq!(
        cpu.allocated_remote, 358.0,
        "remote allocation must be exact"
    );
    assert_eq!(cpu.requirement, 4000.0);
    assert_eq!(cpu.shortfall, 4000.0 - (358.0 + 1800.0));
    let summary = bundle.summary();
    assert!(
        summary.contains("about 360 GHz"),
        "summary must cite the survey estimate"
    );
    assert!(summary.contains("358 GHz"));
    assert!(summary.contains("shortfall 1842 GHz"));
    pass(
        4,
        "cpu accounting 358 GHz / shortfall",
        t,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_05_growth_projection() {
    let t = Instant::now();
    let bundle = cmd_plan(
        &scenario_path("run2a.toml"),
        &PlanFlags {
            years: 3,
            ..PlanFlags::default()
        },
    )
    .unwrap();
    let projection = &bundle.report.projection;
    assert_eq!(projection.len(), 4);
    for (year, report) in projection.iter().enumerate() {
        let expect = 1_470_000_000_000_000 + year as u64 * DEFAULT_TAPE_GROWTH_BYTES_PER_YEAR;
        assert_eq!(report.cac_tape.total, expect, "year {year}");
    }
    // The unit-level contract, independent of the bundled scenario.
    let base = projection[0].clone();
    let again = growth_projection(&base, 5, DEFAULT_TAPE_GROWTH_BYTES_PER_YEAR);
    for (year, report) in again.iter().enumerate() {
        assert_eq!(
            report.cac_tape.total - base.cac_tape.total,
            year as u64 * 1_000_000_000_000_000
        );
    }
    pass(
        5,
        "growth adds exactly 1 PB/year",
        t,
        Duration::from_secs(1),
    );
}

// ── 6: full thumbnail coverage at the RAC ────────────────────────────────

#[test]
fn criterion_06_tmb_full_coverage() {
    let t = Instant::now();
    let bundle = cmd_simulate(&scenario_path("gridka.toml"), &SimulateFlags::default()).unwrap();
    let metrics = bundle.report.metrics.as_ref().unwrap();
    assert!(metrics.production_end.is_some(), "production must finish");
    let tmb = metrics.station("gridka").tier(TierName::Tmb);
    let requests = tmb.disk_hits + tmb.disk_misses;
    assert!(
        requests >= 1_000,
        "need at least 1e3 thumbnail requests, got {requests}"
    );
    assert_eq!(
        tmb.disk_misses, 0,
        "every thumbnail request at the RAC must hit disk"
    );
    let hit_rate = tmb.disk_hits as f64 / requests as f64;
    assert_eq!(hit_rate, 1.0);
    pass(
        6,
        "thumbnail full coverage at RAC",
        t,
        Duration::from_secs(10),
    );
}

// ── 7: LRU oracle equivalence ────────────────────────────────────────────

/// Naive reference cache: flat lists, timestamp-scan eviction.
struct NaiveLru {
    capacity: u64,
    pin_budget: u64,
    clock: u64,
    pinned: Vec<(String, u64)>,
    entries: Vec<(String, u64, u64)>, // (id, size, last_used)
}

#[derive(Debug, PartialEq, Eq)]
enum NaiveOutcome {
    Hit,
    Miss,
    Admitted(Vec<(String, u64)>),
    Pinned(Vec<(String, u64)>),
    TooLarge,
    PinOverflow,
}

impl NaiveLru {
    fn new(capacity: u64, min_fraction_ppm: u64) -> Self {
        let reserve = (capacity as u128 * min_fraction_ppm as u128 + 500_000) / 1_000_000;
        NaiveLru {
            capacity,
            pin_budget: capacity - reserve as u64,
            clock: 0,
            pinned: Vec::new(),
            entries: Vec::new(),
        }
    }

    fn occupancy(&self) -> u64 {
        self.pinned.iter().map(|(_, s)| s).sum::<u64>()
            + self.entries.iter().map(|(_, s, _)| s).sum::<u64>()
    }

    fn pinned_bytes(&self) -> u64 {
        self.pinned.iter().map(|(_, s)| s).sum()
    }

    fn evict_oldest(&mut self) -> (String, u64) {
        let i = self
            .entries
            .iter()
            .enumerate()
            .min_by_key(|(_, (_, _, used))| *used)
            .map(|(i, _)| i)
            .expect("eviction from empty reference cache");
        let (id, size, _) = self.entries.remove(i);
        (id, size)
    }

    fn request(&mut self, id: &str) -> NaiveOutcome {
        if self.pinned.iter().any(|(p, _)| p == id) {
            return NaiveOutcome::Hit;
        }
        if let Some(e) = self.entries.iter_mut().find(|(e, _, _)| e == id) {
            self.clock += 1;
            e.2 = self.clock;
            return NaiveOutcome::Hit;
        }
        NaiveOutcome::Miss
    }

    fn admit(&mut self, id: &str, size: u64) -> NaiveOutcome {
        if size > self.capacity - self.pinned_bytes() {
            return NaiveOutcome::TooLarge;
        }
        if self.pinned.iter().any(|(p, _)| p == id) {
            return NaiveOutcome::Admitted(Vec::new());
        }
        self.entries.retain(|(e, _, _)| e != id);
        let mut evicted = Vec::new();
        while self.occupancy() + size > self.capacity {
            evicted.push(self.evict_oldest());
        }
        self.clock += 1;
        self.entries.push((id.to_string(), size, self.clock));
        NaiveOutcome::Admitted(evicted)
    }

    fn pin(&mut self, id: &str, size: u64) -> NaiveOutcome {
        if self.pinned.iter().any(|(p, _)| p == id) {
            return NaiveOutcome::Pinned(Vec::new());
        }
        if self.pinned_bytes() + size > self.pin_budget {
            return NaiveOutcome::PinOverflow;
        }
        self.entries.retain(|(e, _, _)| e != id);
        let mut evicted = Vec::new();
        while self.occupancy() + size > self.capacity {
            evicted.push(self.evict_oldest());
        }
        self.pinned.push((id.to_string(), size));
        NaiveOutcome::Pinned(evicted)
    }
}

#[test]
fn criterion_07_lru_oracle_equivalence() {
    let t = Instant::now();
    for trace in 0..100u64 {
        let mut rng = Pcg64::seed_from_u64(0x10c4 + trace);
        let capacity = 40 + rng.next_u64() % 120;
        let mut cache = DiskCache::new(capacity, 0.10);
        let mut oracle = NaiveLru::new(capacity, 100_000);
        let pool: Vec<String> = (0..60).map(|i| format!("f{i:02}")).collect();
        for step in 0..10_000u64 {
            let id = &pool[(rng.next_u64() % pool.len() as u64) as usize];
            let op = rng.next_u64() % 10;
            let (got, want) = if op < 6 {
                let got = match cache.request(id) {
                    RequestOutcome::DiskHit => NaiveOutcome::Hit,
                    RequestOutcome::Miss => NaiveOutcome::Miss,
                };
                (got, oracle.request(id))
            } else if op < 9 {
                let size = 1 + rng.next_u64() % 8;
                let got = match cache.admit(id, size) {
                    Ok(evicted) => NaiveOutcome::Admitted(evicted),
                    Err(StationError::FileLargerThanCache { .. }) => NaiveOutcome::TooLarge,
                    Err(e) => panic!("unexpected admit error {e}"),
                };
                (got, oracle.admit(id, size))
            } else {
                let size = 1 + rng.next_u64() % 4;
                let got = match cache.pin(id, size) {
                    Ok(evicted) => NaiveOutcome::Pinned(evicted),
                    Err(StationError::PinnedOverflow { .. }) => NaiveOutcome::PinOverflow,
                    Err(e) => panic!("unexpected pin error {e}"),
                };
                (got, oracle.pin(id, size))
            };
            assert_eq!(got, want, "trace {trace} step {step} id {id}");
            assert_eq!(
                cache.occupancy(),
                oracle.occupancy(),
                "trace {trace} step {step}"
            );
            assert!(cache.occupancy() <= capacity);
        }
        // Final on-demand contents and order must agree.
        let residents: Vec<(String, u64)> = cache.on_demand_lru_order();
        let mut oracle_order = oracle.entries.clone();
        oracle_order.sort_by_key(|(_, _, used)| *used);
        let oracle_residents: Vec<(String, u64)> = oracle_order
            .into_iter()
            .map(|(id, size, _)| (id, size))
            .collect();
        assert_eq!(residents, oracle_residents, "trace {trace} final state");
    }
    pass(7, "LRU oracle equivalence", t, Duration::from_secs(30));
}

// ── 8: bundle determinism ────────────────────────────────────────────────

#[test]
fn criterion_08_bundle_determinism() {
    let t = Instant::now();
    let budget_per_run = Duration::from_secs(60);
    let path = scenario_path("toy2region.toml");

    let first_started = Instant::now();
    let first = cmd_simulate(&path, &SimulateFlags::default()).unwrap();
    assert!(
        first_started.elapsed() <= budget_per_run,
        "run 1 over budget"
    );

    let second_started = Instant::now();
    let second = cmd_simulate(&path, &SimulateFlags::default()).unwrap();
    assert!(
        second_started.elapsed() <= budget_per_run,
        "run 2 over budget"
    );

    let metrics = first.report.metrics.as_ref().unwrap();
    let files: u64 = metrics.completed_transfers.len() as u64;
    assert!(files > 0);
    assert!(
        metrics.jobs_submitted >= 10_000,
        "workload too small: {}",
        metrics.jobs_submitted
    );
    // ≥ 1e5 files: the catalog dump has one line per replica, and every file
    // has at least one; count distinct file ids instead of trusting a field.
    let dump = first.files["catalog.dump"].as_str();
    let distinct: BTreeSet<&str> = dump.lines().filter_map(|l| l.split('\t').next()).collect();
    assert!(
        distinct.len() >= 100_000,
        "file population too small: {}",
        distinct.len()
    );

    assert_eq!(first.files.len(), second.files.len());
    for (name, contents) in &first.files {
        assert_eq!(
            Some(contents),
            second.files.get(name),
            "{name} differs between identical runs"
        );
    }
    pass(8, "byte-identical bundles", t, Duration::from_secs(120));
}

// ── 9: conservation sweep ────────────────────────────────────────────────

fn random_conservation_scenario(seed: u64) -> Scenario {
    const GB: u64 = 1_000_000_000;
    const TB: u64 = 1_000_000_000_000;
    let mut rng = Pcg64::seed_from_u64(seed);
    let n_regions = 1 + (rng.next_u64() % 3) as usize;
    let mut stations = vec![Station {
        station_id: "cac".into(),
        kind: StationKind::Cac,
        region_id: "hub".into(),
        disk_capacity: 400 * TB,
        tape_capacity: 4_000 * TB,
        cpu_power: 50.0,
        parent_id: None,
    }];
    let mut links = Vec::new();
    for i in 0..n_regions {
        let region = format!("region-{i}");
        let rac = format!("rac-{i}");
        let iac = format!("iac-{i}");
        stations.push(Station {
            station_id: rac.clone(),
            kind: StationKind::Rac,
            region_id: region.clone(),
            disk_capacity: 40 * TB,
            tape_capacity: 400 * TB,
            cpu_power: 4.0 + (rng.next_u64() % 8) as f64,
            parent_id: Some("cac".into()),
        });
        stations.push(Station {
            station_id: iac.clone(),
            kind: StationKind::Iac,
            region_id: region.clone(),
            disk_capacity: 2 * GB + rng.next_u64() % (10 * GB),
            tape_capacity: 0,
            cpu_power: 2.0,
            parent_id: Some(rac.clone()),
        });
        links.push((
            "cac".to_string(),
            rac.clone(),
            500_000_000 + rng.next_u64() % GB,
            0.01,
        ));
        links.push((rac, iac, GB, 0.001));
    }
    let mut sc = Scenario::new(Topology::assemble(stations, links));
    sc.rng_seed = seed ^ 0x9e37;
    sc.duration = 300_000.0;
    let tier_pool = [
        TierName::Raw,
        TierName::Reco,
        TierName::Dst,
        TierName::Tmb,
        TierName::Derived,
        TierName::McDst,
        TierName::McTmb,
        TierName::McRoottuple,
    ];
    for tier in tier_pool {
        if rng.next_u64() % 3 == 0 {
            continue;
        }
        let events = 20_000 + rng.next_u64() % 300_000;
        let id = format!("{}-ds", tier.as_str().to_lowercase());
        sc.datasets.push(DatasetSpec::new(id.clone(), tier, events));
        sc.workload.popularity.push(PopularityWeight {
            dataset_id: id,
            weight: 1.0 + (rng.next_u64() % 3) as f64,
        });
    }
    for i in 0..n_regions {
        sc.workload.arrivals.push(ArrivalSpec {
            region_id: format!("region-{i}"),
            rate_per_hour: 10.0 + (rng.next_u64() % 40) as f64,
        });
    }
    sc.workload.files_per_job = 1 + (rng.next_u64() % 6) as u32;
    sc.workload.db_queries_per_job = (rng.next_u64() % 3) as u32;
    sc.workload.cpu_seconds_per_event = 0.0005;
    sc
}

#[test]
fn criterion_09_conservation_sweep() {
    let t = Instant::now();
    for round in 0..20u64 {
        let sc = random_conservation_scenario(0xc0de + round);
        if sc.datasets.is_empty() {
            continue;
        }
        // Audit mode asserts occupancy ≤ capacity after every event and that
        // planned pins are never evicted.
        let m = run_with_options(
            &sc,
            RunOptions {
                audit_invariants: true,
            },
        )
        .unwrap_or_else(|e| panic!("round {round}: {e}"));
        let expected = m.expected_link_bytes();
        let mut total_expected = 0u64;
        for (class, link) in &m.links {
            let want = expected.get(class).copied().unwrap_or(0);
            assert_eq!(link.bytes, want, "round {round} class {class}");
            total_expected += want;
        }
        let total: u64 = m.links.values().map(|l| l.bytes).sum();
        assert_eq!(total, total_expected, "round {round} total");
    }
    pass(9, "conservation sweep", t, Duration::from_secs(120));
}

// ── 10: partition properties ─────────────────────────────────────────────

#[test]
fn criterion_10_partition_properties() {
    let t = Instant::now();
    let mut rng = Pcg64::seed_from_u64(0x9a57);
    for round in 0..200 {
        let n_files = 1 + (rng.next_u64() % 4_000) as usize;
        let n_racs = 1 + (rng.next_u64() % 12) as usize;
        // Full coverage requires n_racs × fraction ≥ 1.
        let span = 1.0 - 1.0 / n_racs as f64;
        let fraction =
            1.0 / n_racs as f64 + span * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let files: Vec<FileRecord> = (0..n_files)
            .map(|i| FileRecord {
                file_id: format!("r{round}-f{i:05}"),
                tier: DataTier::with_default_size(TierName::Dst),
                dataset_id: "ds".into(),
                size: 1,
                event_count: 1,
                created_at: 0.0,
            })
            .collect();
        let racs: Vec<String> = (0..n_racs).map(|i| format!("rac-{i:02}")).collect();
        let partition = partition_tier(&files, &racs, fraction.min(1.0)).unwrap();

        let mut union: BTreeSet<&String> = BTreeSet::new();
        let mut sizes = Vec::new();
        for rac in &racs {
            let share = partition.share(rac).unwrap();
            for id in share {
                assert!(union.insert(id), "round {round}: shares overlap on {id}");
            }
            sizes.push(share.len());
        }
        assert_eq!(
            union.len(),
            n_files,
            "round {round}: union must cover the tier"
        );
        let (min, max) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        assert!(max - min <= 1, "round {round}: unbalanced shares {sizes:?}");
    }
    pass(
        10,
        "partition disjoint/exhaustive/balanced",
        t,
        Duration::from_secs(10),
    );
}

// ── 11: planner/simulator consistency ────────────────────────────────────

#[test]
fn criterion_11_planner_simulator_consistency() {
    let t = Instant::now();
    for name in ["gridka.toml", "toy2region.toml"] {
        let text = std::fs::read_to_string(scenario_path(name)).unwrap();
        let (scenario, _) = racsim_cli::parse_scenario(&text).unwrap();
        let predicted = predict_pinned_bytes(&scenario).unwrap();
        let metrics = run_with_options(&scenario, RunOptions::default()).unwrap();
        assert!(
            metrics.production_end.is_some(),
            "{name}: production must finish"
        );
        assert_eq!(
            metrics.pinned_at_production_end, predicted,
            "{name}: simulated pinned bytes must equal the planner's prediction exactly"
        );
    }
    pass(
        11,
        "planner/simulator pinned-byte agreement",
        t,
        Duration::from_secs(60),
    );
}
