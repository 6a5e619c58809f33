//! Shared builders for integration tests: toy topologies, scenarios, and a
//! seeded random-scenario generator.

// Each test binary compiles this module separately and uses a subset of it.
#![allow(dead_code)]

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use racsim_core::{
    ArrivalSpec, DatasetSpec, PopularityWeight, Scenario, Station, StationKind, TierName, Topology,
};

pub const GB: u64 = 1_000_000_000;
pub const TB: u64 = 1_000_000_000_000;

pub fn station(
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

/// CAC plus `n_regions` regions, each a RAC with one IAC and one DAS below it.
/// All links share one bandwidth/latency.
pub fn tiered_topology(n_regions: usize, bandwidth: u64, latency: f64) -> Topology {
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
        let das = format!("das-{i}");
        stations.push(station(
            &rac,
            StationKind::Rac,
            &region,
            Some("cac"),
            60 * TB,
            400 * TB,
            20.0,
        ));
        stations.push(station(
            &iac,
            StationKind::Iac,
            &region,
            Some(&rac),
            2 * TB,
            0,
            4.0,
        ));
        stations.push(station(
            &das,
            StationKind::Das,
            &region,
            Some(&iac),
            200 * GB,
            0,
            1.0,
        ));
        links.push(("cac".to_string(), rac.clone(), bandwidth, latency));
        links.push((rac.clone(), iac.clone(), bandwidth, latency));
        links.push((iac, das, bandwidth, latency));
    }
    Topology::assemble(stations, links)
}

/// A ready-to-run scenario over `tiered_topology` with one dataset per listed
/// tier and a uniform workload on every region.
pub fn scenario_with(
    n_regions: usize,
    tiers: &[(TierName, u64)],
    rate_per_hour: f64,
    duration: f64,
    seed: u64,
) -> Scenario {
    let mut sc = Scenario::new(tiered_topology(n_regions, GB, 0.001));
    for (tier, events) in tiers {
        let id = format!("{}-ds", tier.as_str().to_lowercase());
        sc.datasets
            .push(DatasetSpec::new(id.clone(), *tier, *events));
        sc.workload.popularity.push(PopularityWeight {
            dataset_id: id,
            weight: 1.0,
        });
    }
    for i in 0..n_regions {
        sc.workload.arrivals.push(ArrivalSpec {
            region_id: format!("region-{i}"),
            rate_per_hour,
        });
    }
    sc.workload.files_per_job = 4;
    sc.workload.cpu_seconds_per_event = 0.0001;
    sc.duration = duration;
    sc.rng_seed = seed;
    sc
}

/// Seeded random small scenario for property sweeps.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut rng = Pcg64::seed_from_u64(seed);
    let n_regions = 1 + (rng.next_u64() % 3) as usize;
    let tier_pool = [
        TierName::Raw,
        TierName::Reco,
        TierName::Dst,
        TierName::Tmb,
        TierName::Derived,
        TierName::McDst,
        TierName::McTmb,
    ];
    let n_tiers = 2 + (rng.next_u64() % 4) as usize;
    let mut tiers = Vec::new();
    for i in 0..n_tiers {
        let tier = tier_pool[(rng.next_u64() as usize) % tier_pool.len()];
        if tiers.iter().any(|(t, _)| *t == tier) {
            continue;
        }
        let events = 50_000 + rng.next_u64() % 400_000;
        let _ = i;
        tiers.push((tier, events));
    }
    let rate = 2.0 + (rng.next_u64() % 50) as f64;
    let mut sc = scenario_with(n_regions, &tiers, rate, 400_000.0, seed ^ 0xabcd);
    sc.workload.files_per_job = 1 + (rng.next_u64() % 6) as u32;
    sc.workload.db_queries_per_job = (rng.next_u64() % 3) as u32;
    // Small on-demand areas at the edge stations force eviction churn.
    for s in sc.topology.stations.iter_mut() {
        if s.kind == StationKind::Das {
            s.disk_capacity = 2 * GB + rng.next_u64() % (4 * GB);
        }
        if s.kind == StationKind::Iac {
            s.disk_capacity = 4 * GB + rng.next_u64() % (8 * GB);
        }
    }
    sc
}
