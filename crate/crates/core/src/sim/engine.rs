//! The discrete-event engine: production, policy-driven distribution,
//! region-local jobs, transfers, database queries, and metrics.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::num::NonZeroUsize;

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use thiserror::Error;

use crate::catalog::{resolve_source, CatalogError, DanProxy, Replica, ReplicaCatalog};
use crate::model::{FileRecord, Medium, StationKind, TierName, Violation};
use crate::policy::{archival_targets, on_demand_budget, pinned_set, PlacementPlan, PolicyError};
use crate::sim::event::{EventKind, EventQueue};
use crate::sim::metrics::{
    DanCounters, JobTimes, LinkClassMetrics, Metrics, StationMetrics, TransferRecord,
};
use crate::sim::network::Network;
use crate::sim::scenario::{validate_scenario, JobKind, Scenario};
use crate::station::{DiskCache, RequestOutcome, StationError, TapeStore};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("scenario validation failed ({} violation(s)):\n{}", violations.len(),
        violations.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    ValidationFailed { violations: Vec<Violation> },
    #[error(
        "pinned set overflows station `{station_id}`: {pinned_bytes} B pinned on {disk_capacity} B disk; raise disk to at least {required_disk} B"
    )]
    PinnedOverflow {
        station_id: String,
        pinned_bytes: u64,
        disk_capacity: u64,
        required_disk: u64,
    },
    #[error("region `{region_id}` has no CPU and opportunistic overflow is disabled")]
    NoCpuInRegion { region_id: String },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Check storage invariants after every event (tests).
    pub audit_invariants: bool,
}

/// Run a scenario to completion (or `duration`, whichever first).
pub fn run(scenario: &Scenario) -> Result<Metrics, SimError> {
    run_with_options(scenario, RunOptions::default())
}

pub fn run_with_options(scenario: &Scenario, options: RunOptions) -> Result<Metrics, SimError> {
    run_with_catalog(scenario, options).map(|(metrics, _)| metrics)
}

/// Like `run`, additionally returning the final replica catalog (for dumps).
pub fn run_with_catalog(
    scenario: &Scenario,
    options: RunOptions,
) -> Result<(Metrics, ReplicaCatalog), SimError> {
    let mut sim = Sim::build(scenario, options)?;
    sim.run_loop();
    Ok(sim.finish())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TransferPurpose {
    /// Production placement pinned at the destination's disk.
    Pin,
    /// Production placement written to the destination's tape.
    TapeCopies(u32),
    /// On-demand fetch feeding jobs waiting at the destination.
    Fetch,
}

#[derive(Debug, Clone)]
struct TransferRt {
    file: u32,
    size: u64,
    dest: u32,
    purpose: TransferPurpose,
    path: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
struct StageRt {
    file: u32,
    at: u32,
    dest: u32,
}

#[derive(Debug)]
struct StationRt {
    id: String,
    kind: StationKind,
    region: u32,
    disk: DiskCache,
    tape: TapeStore,
    slots_total: u32,
    slots_free: u32,
    queue: VecDeque<u32>,
    /// Dataset → bytes of that dataset on this disk (job-locality index).
    locality: BTreeMap<u32, u64>,
    metrics: StationMetrics,
}

#[derive(Debug)]
struct RegionRt {
    id: String,
    stations: Vec<u32>,
    proxy: Option<DanProxy>,
    arrival_rate_per_sec: f64,
}

#[derive(Debug)]
struct JobRt {
    id: String,
    kind: JobKind,
    region: u32,
    dataset: u32,
    files: Vec<u32>,
    station: u32,
    outstanding: u32,
    compute_events: u64,
    submitted: f64,
    started: f64,
    data_ready: f64,
}

struct Sim<'a> {
    scenario: &'a Scenario,
    options: RunOptions,
    now: f64,
    queue: EventQueue,
    rng: Pcg64,

    files: Vec<FileRecord>,
    file_index: BTreeMap<String, u32>,
    file_dataset: Vec<u32>,
    /// Interned placement targets per file: (station, medium, copies).
    targets: Vec<Vec<(u32, Medium, u32)>>,
    /// Whether the file's tier pins on CAC disk (full coverage) or caches on demand.
    cac_disk_pinned: Vec<bool>,
    planned_pins: Vec<BTreeSet<u32>>,

    stations: Vec<StationRt>,
    station_index: BTreeMap<String, u32>,
    regions: Vec<RegionRt>,
    cac: u32,
    network: Network,
    catalog: ReplicaCatalog,
    dataset_files: Vec<Vec<u32>>,
    popularity: Vec<(u32, f64)>,

    transfers: Vec<TransferRt>,
    stages: Vec<StageRt>,
    pending_fetch: BTreeMap<(u32, u32), Vec<u32>>,
    jobs: Vec<JobRt>,

    production_files_remaining: u64,
    production_outstanding: u64,
    production_end: Option<f64>,
    pinned_at_production_end: BTreeMap<String, u64>,
    completed_transfers: Vec<TransferRecord>,
    job_times: Vec<JobTimes>,
    jobs_submitted: u64,
    events_processed: u64,
}

impl<'a> Sim<'a> {
    fn build(scenario: &'a Scenario, options: RunOptions) -> Result<Sim<'a>, SimError> {
        let violations = validate_scenario(scenario);
        if !violations.is_empty() {
            return Err(SimError::ValidationFailed { violations });
        }

        // Generate the file population in tier order, then dataset order.
        let mut dataset_index = BTreeMap::new();
        for (i, ds) in scenario.datasets.iter().enumerate() {
            dataset_index.insert(ds.dataset_id.clone(), i as u32);
        }
        let mut ordered_datasets: Vec<usize> = (0..scenario.datasets.len()).collect();
        ordered_datasets.sort_by_key(|&i| (scenario.datasets[i].tier, i));

        let mut files = Vec::new();
        let mut file_index = BTreeMap::new();
        let mut file_dataset = Vec::new();
        let mut dataset_files = vec![Vec::new(); scenario.datasets.len()];
        let mut files_by_tier: BTreeMap<TierName, Vec<FileRecord>> = BTreeMap::new();
        for &di in &ordered_datasets {
            let ds = &scenario.datasets[di];
            for file in ds.generate_files() {
                let idx = files.len() as u32;
                file_index.insert(file.file_id.clone(), idx);
                file_dataset.push(di as u32);
                dataset_files[di].push(idx);
                files_by_tier.entry(ds.tier).or_default().push(file.clone());
                files.push(file);
            }
        }

        let rac_ids = scenario.topology.rac_ids();
        let plan = PlacementPlan::build(&files_by_tier, &scenario.policy, &rac_ids)
            .expect("rac list nonempty when partitions requested");

        let mut station_index = BTreeMap::new();
        for (i, s) in scenario.topology.stations.iter().enumerate() {
            station_index.insert(s.station_id.clone(), i as u32);
        }

        // Regions, including the CAC's own, sorted by id.
        let region_ids: BTreeSet<String> = scenario
            .topology
            .stations
            .iter()
            .map(|s| s.region_id.clone())
            .collect();
        let region_list: Vec<String> = region_ids.into_iter().collect();
        let region_of = |rid: &str| region_list.iter().position(|r| r == rid).unwrap() as u32;
        let mut regions: Vec<RegionRt> = region_list
            .iter()
            .map(|rid| {
                let mut members: Vec<u32> = scenario
                    .topology
                    .stations
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| &s.region_id == rid)
                    .map(|(i, _)| i as u32)
                    .collect();
                members.sort_by(|&a, &b| {
                    scenario.topology.stations[a as usize]
                        .station_id
                        .cmp(&scenario.topology.stations[b as usize].station_id)
                });
                let has_rac = members
                    .iter()
                    .any(|&m| scenario.topology.stations[m as usize].kind == StationKind::Rac);
                let proxy = has_rac.then(|| {
                    DanProxy::new(
                        rid.clone(),
                        NonZeroUsize::new(scenario.dan.cache_capacity).expect("validated >= 1"),
                        scenario.dan.proxy_latency,
                    )
                });
                RegionRt {
                    id: rid.clone(),
                    stations: members,
                    proxy,
                    arrival_rate_per_sec: 0.0,
                }
            })
            .collect();
        for a in &scenario.workload.arrivals {
            let r = region_of(&a.region_id) as usize;
            regions[r].arrival_rate_per_sec += a.rate_per_hour / 3600.0;
        }

        let stations: Vec<StationRt> = scenario
            .topology
            .stations
            .iter()
            .map(|s| {
                let mut tape = TapeStore::new(s.tape_capacity);
                tape.mount_latency = scenario.transport.tape_mount_latency;
                tape.stream_rate = scenario.transport.tape_stream_rate;
                let slots = s.cpu_power.floor().max(0.0).min(u32::MAX as f64) as u32;
                StationRt {
                    id: s.station_id.clone(),
                    kind: s.kind,
                    region: region_of(&s.region_id),
                    disk: DiskCache::new(s.disk_capacity, scenario.policy.on_demand_min_fraction),
                    tape,
                    slots_total: slots,
                    slots_free: slots,
                    queue: VecDeque::new(),
                    locality: BTreeMap::new(),
                    metrics: StationMetrics::default(),
                }
            })
            .collect();

        let cac = station_index[&scenario.topology.cac().station_id];

        // Intern placement targets once; also derive pinned/tape demand.
        let mut targets = Vec::with_capacity(files.len());
        let mut tape_demand = vec![0u64; stations.len()];
        for file in &files {
            let t: Vec<(u32, Medium, u32)> =
                archival_targets(file, &scenario.policy, &scenario.topology, &plan)
                    .into_iter()
                    .map(|(sid, medium, copies)| (station_index[&sid], medium, copies))
                    .collect();
            for &(st, medium, copies) in &t {
                if medium == Medium::Tape {
                    tape_demand[st as usize] += file.size * copies as u64;
                }
            }
            targets.push(t);
        }
        let cac_disk_pinned: Vec<bool> = files
            .iter()
            .map(|f| scenario.policy.placement(f.tier.name).cac_disk >= 1.0)
            .collect();

        // Pre-run fit checks: pinned sets against the budget rule, tape
        // demand against tape capacity (tape never evicts).
        let mut planned_pins = vec![BTreeSet::new(); stations.len()];
        let mut tape_violations = Vec::new();
        for (i, s) in scenario.topology.stations.iter().enumerate() {
            if matches!(s.kind, StationKind::Cac | StationKind::Rac) {
                let pins = pinned_set(s, &files_by_tier, &scenario.policy, &plan);
                let bytes: u64 = pins
                    .iter()
                    .map(|id| files[file_index[id] as usize].size)
                    .sum();
                match on_demand_budget(s, bytes, &scenario.policy) {
                    Ok(_) => {}
                    Err(PolicyError::PinnedOverflow {
                        station_id,
                        pinned_bytes,
                        disk_capacity,
                        required_disk,
                    }) => {
                        return Err(SimError::PinnedOverflow {
                            station_id,
                            pinned_bytes,
                            disk_capacity,
                            required_disk,
                        })
                    }
                    Err(PolicyError::EmptyRacList) => unreachable!("budget takes no rac list"),
                }
                planned_pins[i] = pins.iter().map(|id| file_index[id]).collect();
            }
            if tape_demand[i] > s.tape_capacity {
                tape_violations.push(Violation::new(
                    &s.station_id,
                    format!(
                        "tape requirement {} B exceeds tape_capacity {} B",
                        tape_demand[i], s.tape_capacity
                    ),
                ));
            }
        }
        if !tape_violations.is_empty() {
            return Err(SimError::ValidationFailed {
                violations: tape_violations,
            });
        }

        let network = Network::build(&scenario.topology, &station_index);

        let popularity: Vec<(u32, f64)> = scenario
            .workload
            .popularity
            .iter()
            .filter(|p| p.weight > 0.0)
            .map(|p| (dataset_index[&p.dataset_id], p.weight))
            .collect();

        let production_files = files.len() as u64;
        let mut sim = Sim {
            scenario,
            options,
            now: 0.0,
            queue: EventQueue::new(),
            rng: Pcg64::seed_from_u64(scenario.rng_seed),
            files,
            file_index,
            file_dataset,
            targets,
            cac_disk_pinned,
            planned_pins,
            stations,
            station_index,
            regions,
            cac,
            network,
            catalog: ReplicaCatalog::new(),
            dataset_files,
            popularity,
            transfers: Vec::new(),
            stages: Vec::new(),
            pending_fetch: BTreeMap::new(),
            jobs: Vec::new(),
            production_files_remaining: production_files,
            production_outstanding: 0,
            production_end: None,
            pinned_at_production_end: BTreeMap::new(),
            completed_transfers: Vec::new(),
            job_times: Vec::new(),
            jobs_submitted: 0,
            events_processed: 0,
        };

        for fi in 0..sim.files.len() {
            sim.queue
                .push(0.0, 0.0, EventKind::FileProduced { file: fi as u32 });
        }
        if sim.files.is_empty() {
            sim.maybe_finish_production();
        }
        Ok(sim)
    }

    fn run_loop(&mut self) {
        while let Some(ev) = self.queue.pop() {
            if ev.time > self.scenario.duration {
                break;
            }
            debug_assert!(ev.time >= self.now, "event time went backwards");
            self.now = ev.time;
            self.events_processed += 1;
            match ev.kind {
                EventKind::FileProduced { file } => self.on_file_produced(file),
                EventKind::JobSubmitted { region } => self.on_job_submitted(region),
                EventKind::DbQuery { job, remaining } => self.on_db_query(job, remaining),
                EventKind::JobDataPhase { job } => self.begin_fetches(job),
                EventKind::TransferComplete { transfer } => self.on_transfer_complete(transfer),
                EventKind::StageComplete { stage } => self.on_stage_complete(stage),
                EventKind::JobCompleted { job } => self.on_job_completed(job),
            }
            if self.options.audit_invariants {
                self.audit();
            }
        }
    }

    fn audit(&self) {
        for s in &self.stations {
            assert!(
                s.disk.occupancy() <= s.disk.capacity(),
                "{}: disk occupancy above capacity",
                s.id
            );
            assert!(
                s.tape.occupancy <= s.tape.capacity,
                "{}: tape occupancy above capacity",
                s.id
            );
        }
    }

    // ── production ──────────────────────────────────────────────────────

    fn on_file_produced(&mut self, fi: u32) {
        let file = self.files[fi as usize].clone();
        self.catalog
            .register_file(file.clone())
            .expect("generator ids are unique");
        for (st, medium, copies) in self.targets[fi as usize].clone() {
            if st == self.cac {
                match medium {
                    Medium::Tape => self.write_tape_copies(self.cac, fi, copies),
                    Medium::Disk => {
                        if self.cac_disk_pinned[fi as usize] {
                            self.apply_pin(self.cac, fi);
                        } else {
                            self.apply_admit(self.cac, fi);
                        }
                    }
                }
            } else {
                let purpose = match medium {
                    Medium::Disk => TransferPurpose::Pin,
                    Medium::Tape => TransferPurpose::TapeCopies(copies),
                };
                self.schedule_transfer(fi, self.cac, st, purpose);
                self.production_outstanding += 1;
            }
        }
        self.production_files_remaining -= 1;
        self.maybe_finish_production();
    }

    fn maybe_finish_production(&mut self) {
        if self.production_files_remaining == 0
            && self.production_outstanding == 0
            && self.production_end.is_none()
        {
            self.production_end = Some(self.now);
            self.pinned_at_production_end = self
                .stations
                .iter()
                .map(|s| (s.id.clone(), s.disk.pinned_bytes()))
                .collect();
            // Workload begins once the pre-emptive placements are in place.
            for r in 0..self.regions.len() {
                let rate = self.regions[r].arrival_rate_per_sec;
                if rate > 0.0 {
                    let dt = self.exp_draw(rate);
                    self.queue.push(
                        self.now,
                        self.now + dt,
                        EventKind::JobSubmitted { region: r as u32 },
                    );
                }
            }
        }
    }

    // ── storage actions ─────────────────────────────────────────────────

    fn write_tape_copies(&mut self, st: u32, fi: u32, copies: u32) {
        let (file_id, size) = {
            let f = &self.files[fi as usize];
            (f.file_id.clone(), f.size)
        };
        let station_id = self.stations[st as usize].id.clone();
        for copy in 0..copies {
            self.catalog
                .add_replica(Replica::tape(&file_id, &station_id, copy))
                .expect("file registered");
        }
        let fits = self.stations[st as usize].tape.store(size * copies as u64);
        debug_assert!(fits, "tape demand pre-checked");
    }

    fn apply_pin(&mut self, st: u32, fi: u32) {
        let (file_id, size) = {
            let f = &self.files[fi as usize];
            (f.file_id.clone(), f.size)
        };
        if self.stations[st as usize].disk.is_pinned(&file_id) {
            return;
        }
        // An on-demand resident moving into the pinned area is already in the
        // locality index; the pinned replica row simply replaces the cached one.
        let was_resident = self.stations[st as usize].disk.contains(&file_id);
        let station_id = self.stations[st as usize].id.clone();
        let evicted = self.stations[st as usize]
            .disk
            .pin(&file_id, size)
            .expect("pinned fit verified before the run");
        self.process_evictions(st, &evicted);
        self.catalog
            .add_replica(Replica::disk(&file_id, &station_id, true))
            .expect("file registered");
        if !was_resident {
            self.bump_locality(st, fi, size as i64);
        }
    }

    /// Admit into the on-demand area; files larger than the area stream
    /// through without being cached.
    fn apply_admit(&mut self, st: u32, fi: u32) -> bool {
        let (file_id, size) = {
            let f = &self.files[fi as usize];
            (f.file_id.clone(), f.size)
        };
        let station_id = self.stations[st as usize].id.clone();
        if self.stations[st as usize].disk.contains(&file_id) {
            return true;
        }
        match self.stations[st as usize].disk.admit(&file_id, size) {
            Ok(evicted) => {
                self.process_evictions(st, &evicted);
                self.catalog
                    .add_replica(Replica::disk(&file_id, &station_id, false))
                    .expect("file registered");
                self.bump_locality(st, fi, size as i64);
                true
            }
            Err(StationError::FileLargerThanCache { .. }) => false,
            Err(other) => panic!("unexpected admit failure: {other}"),
        }
    }

    fn process_evictions(&mut self, st: u32, evicted: &[(String, u64)]) {
        for (file_id, size) in evicted {
            let fi = self.file_index[file_id];
            let pin_evicted = self.planned_pins[st as usize].contains(&fi);
            if self.options.audit_invariants {
                assert!(
                    !pin_evicted,
                    "planned pin evicted at {}",
                    self.stations[st as usize].id
                );
            }
            debug_assert!(
                !pin_evicted,
                "planned pin evicted at {}",
                self.stations[st as usize].id
            );
            let tier = self.files[fi as usize].tier.name;
            self.stations[st as usize]
                .metrics
                .per_tier
                .entry(tier)
                .or_default()
                .evictions += 1;
            self.catalog
                .drop_disk_replica(file_id, &self.stations[st as usize].id)
                .expect("evicted file had a disk replica");
            self.bump_locality(st, fi, -(*size as i64));
        }
    }

    fn bump_locality(&mut self, st: u32, fi: u32, delta: i64) {
        let ds = self.file_dataset[fi as usize];
        let slot = self.stations[st as usize].locality.entry(ds).or_default();
        *slot = slot
            .checked_add_signed(delta)
            .expect("locality bytes underflow");
        if *slot == 0 {
            self.stations[st as usize].locality.remove(&ds);
        }
    }

    // ── transfers ───────────────────────────────────────────────────────

    fn schedule_transfer(&mut self, fi: u32, source: u32, dest: u32, purpose: TransferPurpose) {
        let size = self.files[fi as usize].size;
        if source == dest {
            // Degenerate same-station transfer: immediate, no bytes counted.
            let tid = self.transfers.len() as u32;
            self.transfers.push(TransferRt {
                file: fi,
                size,
                dest,
                purpose,
                path: Vec::new(),
            });
            self.queue.push(
                self.now,
                self.now,
                EventKind::TransferComplete { transfer: tid },
            );
            return;
        }
        let path = self
            .network
            .route(source, dest)
            .expect("validated topologies are fully routable");
        let eta = self.network.schedule_transfer(&path, size, self.now);
        let tid = self.transfers.len() as u32;
        self.transfers.push(TransferRt {
            file: fi,
            size,
            dest,
            purpose,
            path,
        });
        self.queue
            .push(self.now, eta, EventKind::TransferComplete { transfer: tid });
    }

    fn on_transfer_complete(&mut self, tid: u32) {
        let t = self.transfers[tid as usize].clone();
        let crossings = self.network.record_completion(&t.path, t.size);
        self.completed_transfers.push(TransferRecord {
            bytes: if t.path.is_empty() { 0 } else { t.size },
            class_crossings: crossings,
        });
        match t.purpose {
            TransferPurpose::Pin => {
                self.apply_pin(t.dest, t.file);
                self.production_outstanding -= 1;
                self.maybe_finish_production();
            }
            TransferPurpose::TapeCopies(copies) => {
                self.write_tape_copies(t.dest, t.file, copies);
                self.production_outstanding -= 1;
                self.maybe_finish_production();
            }
            TransferPurpose::Fetch => {
                self.apply_admit(t.dest, t.file);
                self.complete_fetch(t.dest, t.file);
            }
        }
    }

    fn complete_fetch(&mut self, st: u32, fi: u32) {
        if let Some(waiters) = self.pending_fetch.remove(&(st, fi)) {
            for job in waiters {
                let j = &mut self.jobs[job as usize];
                j.outstanding -= 1;
                if j.outstanding == 0 {
                    self.finish_data_phase(job);
                }
            }
        }
    }

    fn on_stage_complete(&mut self, sid: u32) {
        let s = self.stages[sid as usize];
        let tier = self.files[s.file as usize].tier.name;
        self.stations[s.at as usize]
            .metrics
            .per_tier
            .entry(tier)
            .or_default()
            .tape_stages += 1;
        // Staged reads pass through the tape station's disk cache when they fit.
        self.apply_admit(s.at, s.file);
        if s.at == s.dest {
            self.complete_fetch(s.dest, s.file);
        } else {
            self.schedule_transfer(s.file, s.at, s.dest, TransferPurpose::Fetch);
        }
    }

    // ── jobs ────────────────────────────────────────────────────────────

    fn uniform01(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn exp_draw(&mut self, rate_per_sec: f64) -> f64 {
        let u = self.uniform01();
        -(1.0 - u).ln() / rate_per_sec
    }

    fn pick_index(&mut self, n: usize) -> usize {
        (self.rng.next_u64() % n as u64) as usize
    }

    fn pick_weighted(&mut self, weights: &[(u32, f64)]) -> u32 {
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        let mut x = self.uniform01() * total;
        for &(item, w) in weights {
            if x < w {
                return item;
            }
            x -= w;
        }
        weights.last().expect("nonempty weights").0
    }

    fn pick_kind(&mut self) -> JobKind {
        let kw = self.scenario.workload.kind_weights;
        let choices = [
            (JobKind::Analysis, kw.analysis),
            (JobKind::Reprocessing, kw.reprocessing),
            (JobKind::McProduction, kw.mc_production),
        ];
        let total: f64 = choices.iter().map(|(_, w)| w).sum();
        let mut x = self.uniform01() * total;
        for (kind, w) in choices {
            if x < w {
                return kind;
            }
            x -= w;
        }
        JobKind::Analysis
    }

    fn on_job_submitted(&mut self, region: u32) {
        // Draw the job's composition, then chain the next arrival.
        let dataset = self.pick_weighted(&self.popularity.clone());
        let kind = self.pick_kind();
        let population_len = self.dataset_files[dataset as usize].len();
        let mut picked = BTreeSet::new();
        if population_len > 0 {
            for _ in 0..self.scenario.workload.files_per_job {
                let i = self.pick_index(population_len);
                picked.insert(self.dataset_files[dataset as usize][i]);
            }
        }
        let job_idx = self.jobs.len() as u32;
        self.jobs.push(JobRt {
            id: format!("job-{:06}", job_idx),
            kind,
            region,
            dataset,
            files: picked.into_iter().collect(),
            station: u32::MAX,
            outstanding: 0,
            compute_events: 0,
            submitted: self.now,
            started: self.now,
            data_ready: self.now,
        });
        self.jobs_submitted += 1;

        let next = self.now + self.exp_draw(self.regions[region as usize].arrival_rate_per_sec);
        self.queue
            .push(self.now, next, EventKind::JobSubmitted { region });

        match self.choose_station(job_idx) {
            Some(st) => {
                self.jobs[job_idx as usize].station = st;
                if self.stations[st as usize].slots_free > 0 {
                    self.stations[st as usize].slots_free -= 1;
                    self.start_job(job_idx);
                } else {
                    self.stations[st as usize].queue.push_back(job_idx);
                }
            }
            None => {
                // Validation rejects active arrivals into CPU-less regions, so
                // this is unreachable in a validated run.
                unreachable!("no eligible station for job");
            }
        }
    }

    /// Locality score: dataset bytes on the candidate's disk, or on its home
    /// RAC's disk for IAC/DAS candidates.
    fn locality_bytes(&self, st: u32, dataset: u32) -> u64 {
        let station = &self.stations[st as usize];
        let probe = match station.kind {
            StationKind::Rac | StationKind::Cac => st,
            StationKind::Iac | StationKind::Das => match self.home_rac_index(st) {
                Some(r) => r,
                None => st,
            },
        };
        self.stations[probe as usize]
            .locality
            .get(&dataset)
            .copied()
            .unwrap_or(0)
    }

    fn home_rac_index(&self, st: u32) -> Option<u32> {
        let region = self.stations[st as usize].region;
        self.regions[region as usize]
            .stations
            .iter()
            .copied()
            .find(|&m| self.stations[m as usize].kind == StationKind::Rac)
    }

    /// Pick the best station for a job: in-region by (locality, free slots,
    /// id); spill to other regions only when no in-region slot is free and
    /// overflow is enabled.
    fn choose_station(&self, job_idx: u32) -> Option<u32> {
        let job = &self.jobs[job_idx as usize];
        let in_region: Vec<u32> = self.regions[job.region as usize]
            .stations
            .iter()
            .copied()
            .filter(|&s| self.stations[s as usize].slots_total >= 1)
            .collect();

        let best_of = |candidates: &[u32]| -> Option<u32> {
            candidates.iter().copied().max_by(|&a, &b| {
                let ka = (
                    self.locality_bytes(a, job.dataset),
                    self.stations[a as usize].slots_free,
                );
                let kb = (
                    self.locality_bytes(b, job.dataset),
                    self.stations[b as usize].slots_free,
                );
                // Ties resolve to the lexicographically smaller id.
                ka.cmp(&kb).then_with(|| {
                    self.stations[b as usize]
                        .id
                        .cmp(&self.stations[a as usize].id)
                })
            })
        };

        if !in_region.is_empty() {
            let any_free = in_region
                .iter()
                .any(|&s| self.stations[s as usize].slots_free > 0);
            if !any_free && self.scenario.opportunistic_overflow {
                let foreign_free: Vec<u32> = (0..self.stations.len() as u32)
                    .filter(|&s| {
                        self.stations[s as usize].region != job.region
                            && self.stations[s as usize].slots_total >= 1
                            && self.stations[s as usize].slots_free > 0
                    })
                    .collect();
                if let Some(st) = best_of(&foreign_free) {
                    return Some(st);
                }
            }
            return best_of(&in_region);
        }

        if self.scenario.opportunistic_overflow {
            let foreign: Vec<u32> = (0..self.stations.len() as u32)
                .filter(|&s| self.stations[s as usize].slots_total >= 1)
                .collect();
            return best_of(&foreign);
        }
        None
    }

    fn start_job(&mut self, job_idx: u32) {
        self.jobs[job_idx as usize].started = self.now;
        let q = self.scenario.workload.db_queries_per_job;
        if q > 0 {
            self.queue.push(
                self.now,
                self.now,
                EventKind::DbQuery {
                    job: job_idx,
                    remaining: q,
                },
            );
        } else {
            self.begin_fetches(job_idx);
        }
    }

    fn on_db_query(&mut self, job_idx: u32, remaining: u32) {
        let st = self.jobs[job_idx as usize].station;
        let region = self.stations[st as usize].region;
        let key = self.scenario.datasets[self.jobs[job_idx as usize].dataset as usize]
            .dataset_id
            .clone();
        let latency = match self.regions[region as usize].proxy.as_mut() {
            Some(proxy) => proxy.query(&key, self.scenario.dan.central_latency).1,
            // CAC-side jobs reach the central database directly.
            None => self.scenario.dan.central_latency,
        };
        let at = self.now + latency;
        if remaining > 1 {
            self.queue.push(
                self.now,
                at,
                EventKind::DbQuery {
                    job: job_idx,
                    remaining: remaining - 1,
                },
            );
        } else {
            self.queue
                .push(self.now, at, EventKind::JobDataPhase { job: job_idx });
        }
    }

    fn begin_fetches(&mut self, job_idx: u32) {
        let (st, file_list) = {
            let j = &self.jobs[job_idx as usize];
            (j.station, j.files.clone())
        };
        let station_id = self.stations[st as usize].id.clone();
        for fi in file_list {
            let (file_id, events) = {
                let f = &self.files[fi as usize];
                (f.file_id.clone(), f.event_count)
            };
            let tier = self.files[fi as usize].tier.name;
            let outcome = self.stations[st as usize].disk.request(&file_id);
            let counters = self.stations[st as usize]
                .metrics
                .per_tier
                .entry(tier)
                .or_default();
            match outcome {
                RequestOutcome::DiskHit => {
                    counters.disk_hits += 1;
                    self.jobs[job_idx as usize].compute_events += events;
                }
                RequestOutcome::Miss => {
                    counters.disk_misses += 1;
                    if let Some(waiters) = self.pending_fetch.get_mut(&(st, fi)) {
                        waiters.push(job_idx);
                        self.jobs[job_idx as usize].outstanding += 1;
                        self.jobs[job_idx as usize].compute_events += events;
                        continue;
                    }
                    match resolve_source(
                        &self.catalog,
                        &self.scenario.topology,
                        &file_id,
                        &station_id,
                        self.scenario.resolve,
                    ) {
                        Ok((source_id, Medium::Disk)) => {
                            let src = self.station_index[&source_id];
                            debug_assert_ne!(src, st, "miss implies no local disk replica");
                            self.pending_fetch.insert((st, fi), vec![job_idx]);
                            self.jobs[job_idx as usize].outstanding += 1;
                            self.jobs[job_idx as usize].compute_events += events;
                            self.schedule_transfer(fi, src, st, TransferPurpose::Fetch);
                        }
                        Ok((source_id, Medium::Tape)) => {
                            let src = self.station_index[&source_id];
                            let size = self.files[fi as usize].size;
                            let eta = self.now + self.stations[src as usize].tape.stage_time(size);
                            let sid = self.stages.len() as u32;
                            self.stages.push(StageRt {
                                file: fi,
                                at: src,
                                dest: st,
                            });
                            self.pending_fetch.insert((st, fi), vec![job_idx]);
                            self.jobs[job_idx as usize].outstanding += 1;
                            self.jobs[job_idx as usize].compute_events += events;
                            self.queue
                                .push(self.now, eta, EventKind::StageComplete { stage: sid });
                        }
                        Err(CatalogError::NoReplica(_)) => {
                            // No copy exists anywhere (all-zero placement rows);
                            // the job simply proceeds without this file.
                        }
                        Err(other) => panic!("resolve failed: {other}"),
                    }
                }
            }
        }
        if self.jobs[job_idx as usize].outstanding == 0 {
            self.finish_data_phase(job_idx);
        }
    }

    fn finish_data_phase(&mut self, job_idx: u32) {
        let (events, cps) = (
            self.jobs[job_idx as usize].compute_events,
            self.scenario.workload.cpu_seconds_per_event,
        );
        self.jobs[job_idx as usize].data_ready = self.now;
        let compute = events as f64 * cps;
        self.queue.push(
            self.now,
            self.now + compute,
            EventKind::JobCompleted { job: job_idx },
        );
    }

    fn on_job_completed(&mut self, job_idx: u32) {
        let (st, times) = {
            let j = &self.jobs[job_idx as usize];
            (
                j.station,
                JobTimes {
                    job_id: j.id.clone(),
                    kind: j.kind,
                    region_id: self.regions[j.region as usize].id.clone(),
                    station_id: self.stations[j.station as usize].id.clone(),
                    wait: j.started - j.submitted,
                    transfer: j.data_ready - j.started,
                    compute: self.now - j.data_ready,
                    total: self.now - j.submitted,
                },
            )
        };
        self.job_times.push(times);
        self.stations[st as usize].slots_free += 1;
        debug_assert!(
            self.stations[st as usize].slots_free <= self.stations[st as usize].slots_total
        );
        if let Some(next) = self.stations[st as usize].queue.pop_front() {
            self.stations[st as usize].slots_free -= 1;
            self.start_job(next);
        }
    }

    // ── finalization ────────────────────────────────────────────────────

    fn finish(mut self) -> (Metrics, ReplicaCatalog) {
        let mut links: BTreeMap<_, LinkClassMetrics> = BTreeMap::new();
        for l in self.network.links() {
            let slot = links.entry(l.class).or_default();
            slot.bytes += l.bytes;
            slot.transfers += l.transfers;
        }
        let mut dan = BTreeMap::new();
        for r in &self.regions {
            if let Some(p) = &r.proxy {
                dan.insert(
                    r.id.clone(),
                    DanCounters {
                        hits: p.hits,
                        misses: p.misses,
                    },
                );
            }
        }
        let metrics = Metrics {
            stations: self
                .stations
                .iter_mut()
                .map(|s| (s.id.clone(), std::mem::take(&mut s.metrics)))
                .collect(),
            links,
            jobs: self.job_times,
            dan,
            production_end: self.production_end,
            pinned_at_production_end: self.pinned_at_production_end,
            completed_transfers: self.completed_transfers,
            events_processed: self.events_processed,
            jobs_submitted: self.jobs_submitted,
            duration: self.scenario.duration,
        };
        (metrics, self.catalog)
    }
}
