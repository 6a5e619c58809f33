//! Input builders shared by the benchmarks.

use racsim_core::{
    ArrivalSpec, DataTier, DatasetSpec, FileRecord, PopularityWeight, Scenario, Station,
    StationKind, TierName, Topology,
};

pub const GB: u64 = 1_000_000_000;
pub const TB: u64 = 1_000_000_000_000;

/// `n` synthetic one-tier file records.
pub fn file_population(n: usize, tier: TierName) -> Vec<FileRecord> {
    (0..n)
        .map(|i| FileRecord {
            file_id: format!("bench-{i:07}"),
            tier: DataTier::with_default_size(tier),
            dataset_id: "bench".to_string(),
            size: GB,
            event_count: 1_000,
            created_at: 0.0,
        })
        .collect()
}

fn station(
    id: &str,
    kind: StationKind,
    region: &str,
    parent: Option<&str>,
    disk: u64,
    tape: u64,
    cpu: f64,
) -> Station {
    Station {
        station_id: id.to_string(),
        kind,
        region_id: region.to_string(),
        disk_capacity: disk,
        tape_capacity: tape,
        cpu_power: cpu,
        parent_id: parent.map(str::to_string),
    }
}

/// CAC plus `n_regions` RAC+IAC regions with uniform gigabit links.
pub fn bench_topology(n_regions: usize) -> Topology {
    let mut stations = vec![station(
        "cac",
        StationKind::Cac,
        "hub",
        None,
        400 * TB,
        4_000 * TB,
        100.0,
    )];
    let mut links = Vec::new();
    for i in 0..n_regions {
        let region = format!("region-{i}");
        let rac = format!("rac-{i}");
        let iac = format!("iac-{i}");
        stations.push(station(
            &rac,
            StationKind::Rac,
            &region,
            Some("cac"),
            50 * TB,
            500 * TB,
            12.0,
        ));
        stations.push(station(
            &iac,
            StationKind::Iac,
            &region,
            Some(&rac),
            2 * TB,
            0,
            6.0,
        ));
        links.push(("cac".to_string(), rac.clone(), GB, 0.01));
        links.push((rac, iac, GB, 0.001));
    }
    Topology::assemble(stations, links)
}

/// A mid-sized runnable scenario: a few thousand files, an hour of jobs.
pub fn bench_scenario(n_regions: usize, seed: u64) -> Scenario {
    let mut sc = Scenario::new(bench_topology(n_regions));
    sc.rng_seed = seed;
    sc.duration = 400_000.0;
    for (tier, events) in [
        (TierName::Dst, 4_000_000u64),
        (TierName::Tmb, 20_000_000),
        (TierName::Reco, 2_000_000),
    ] {
        let id = format!("{}-bench", tier.as_str().to_lowercase());
        sc.datasets.push(DatasetSpec::new(id.clone(), tier, events));
        sc.workload.popularity.push(PopularityWeight {
            dataset_id: id,
            weight: 1.0,
        });
    }
    for i in 0..n_regions {
        sc.workload.arrivals.push(ArrivalSpec {
            region_id: format!("region-{i}"),
            rate_per_hour: 40.0,
        });
    }
    sc.workload.files_per_job = 4;
    sc.workload.cpu_seconds_per_event = 0.0005;
    sc
}
