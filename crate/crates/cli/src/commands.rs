//! The four commands behind the binary: validate, plan, simulate, report.
//!
//! Exit codes: 0 success, 1 validation/fit failure, 2 parse or I/O failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use racsim_core::{
    cpu_summary, event_counts, fit_check, growth_projection, predict_pinned_bytes,
    run_with_catalog, storage_totals, validate_scenario, RunOptions, Scenario, SimError,
    StorageReport, TierName, Violation, DEFAULT_TAPE_GROWTH_BYTES_PER_YEAR,
};

use crate::bundle::{
    ReportBundle, CATALOG_DUMP, METRICS_JOBS, METRICS_LINKS, METRICS_STATIONS, STORAGE_REPORT,
    SUMMARY,
};
use crate::scenario_file::{parse_scenario, PlanningInputs, ScenarioFileError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "RACSIM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "racsim-out";

#[derive(Debug)]
pub enum CommandError {
    /// Unreadable or unparseable input (exit 2).
    Input(String),
    /// Structurally valid input that fails validation or fit (exit 1).
    Invalid(Vec<Violation>),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Input(_) => EXIT_PARSE,
            CommandError::Invalid(_) => EXIT_INVALID,
        }
    }

    pub fn render(&self) -> String {
        match self {
            CommandError::Input(msg) => msg.clone(),
            CommandError::Invalid(violations) => violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }
}

fn read_and_parse(path: &Path) -> Result<(Scenario, PlanningInputs), CommandError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CommandError::Input(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| match e {
        ScenarioFileError::Parse(msg) => CommandError::Input(format!("{}: {msg}", path.display())),
        ScenarioFileError::Field { location, message } => {
            CommandError::Input(format!("{}: {location}: {message}", path.display()))
        }
    })
}

/// Resolve the output directory: explicit flag, else env override, else default.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// `validate`: structural checks only; prints one violation per line.
pub fn cmd_validate(path: &Path) -> Result<String, CommandError> {
    let (scenario, _) = read_and_parse(path)?;
    let violations = validate_scenario(&scenario);
    if violations.is_empty() {
        Ok(format!("{}: ok\n", path.display()))
    } else {
        Err(CommandError::Invalid(violations))
    }
}

#[derive(Debug, Clone, Default)]
pub struct PlanFlags {
    /// Project CAC tape growth this many years beyond the base report.
    pub years: u64,
    /// Bytes of annual CAC-tape growth (defaults to the standard rate).
    pub growth_rate: Option<u64>,
    /// Per-tier event-count overrides, e.g. DST=1000000.
    pub events_override: Vec<(TierName, u64)>,
    /// Fail (exit 1) when fit violations are found.
    pub strict: bool,
}

/// `plan`: storage totals, CPU accounting, fit check, optional projection.
pub fn cmd_plan(path: &Path, flags: &PlanFlags) -> Result<ReportBundle, CommandError> {
    let (scenario, planning) = read_and_parse(path)?;
    let violations = validate_scenario(&scenario);
    if !violations.is_empty() {
        return Err(CommandError::Invalid(violations));
    }

    let mut counts = event_counts(&scenario);
    for (tier, events) in &flags.events_override {
        counts.insert(*tier, *events);
    }
    let n_racs = scenario.topology.rac_ids().len() as u64;
    let report = storage_totals(&counts, &scenario.policy, n_racs.max(1));
    let projection = if flags.years > 0 {
        growth_projection(
            &report,
            flags.years,
            flags
                .growth_rate
                .unwrap_or(DEFAULT_TAPE_GROWTH_BYTES_PER_YEAR),
        )
    } else {
        Vec::new()
    };
    let fit = fit_check(&report, &scenario.topology, &scenario.policy);
    let cpu = planning
        .cpu_requirement_ghz
        .map(|req| cpu_summary(&planning.registry, req))
        .or_else(|| (!planning.registry.is_empty()).then(|| cpu_summary(&planning.registry, 0.0)));

    let mut bundle = ReportBundle::default();
    bundle.insert(STORAGE_REPORT, report.to_csv());
    bundle.insert(
        SUMMARY,
        plan_summary(
            &scenario,
            &planning,
            &report,
            &projection,
            &fit,
            cpu.as_ref(),
        ),
    );
    bundle.report.storage = Some(report);
    bundle.report.projection = projection;
    bundle.report.cpu = cpu;
    bundle.report.fit_violations = fit.clone();

    if flags.strict && !fit.is_empty() {
        return Err(CommandError::Invalid(fit));
    }
    Ok(bundle)
}

fn human_bytes(bytes: u64) -> String {
    const SCALES: [(u64, &str); 4] = [
        (1_000_000_000_000_000, "PB"),
        (1_000_000_000_000, "TB"),
        (1_000_000_000, "GB"),
        (1_000_000, "MB"),
    ];
    for (scale, unit) in SCALES {
        if bytes >= scale {
            return format!("{:.2} {unit}", bytes as f64 / scale as f64);
        }
    }
    format!("{bytes} B")
}

fn plan_summary(
    scenario: &Scenario,
    planning: &PlanningInputs,
    report: &StorageReport,
    projection: &[StorageReport],
    fit: &[Violation],
    cpu: Option<&racsim_core::CpuSummary>,
) -> String {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "capacity plan").unwrap();
    writeln!(w, "=============").unwrap();
    writeln!(w, "regions with a RAC: {}", report.n_racs).unwrap();
    writeln!(w).unwrap();

    writeln!(w, "storage demand by placement matrix:").unwrap();
    writeln!(
        w,
        "  {:<14} {:>16} {:>16} {:>16} {:>16}",
        "tier", "CAC tape", "CAC disk", "per-RAC tape", "per-RAC disk"
    )
    .unwrap();
    let tier_cell = |cell: &BTreeMap<TierName, u64>, tier: TierName| {
        cell.get(&tier)
            .map(|b| human_bytes(*b))
            .unwrap_or_else(|| "-".to_string())
    };
    for tier in racsim_core::ALL_TIERS {
        let row = [
            tier_cell(&report.cac_tape.by_tier, tier),
            tier_cell(&report.cac_disk.by_tier, tier),
            tier_cell(&report.rac_tape.by_tier, tier),
            tier_cell(&report.rac_disk.by_tier, tier),
        ];
        if row.iter().all(|c| c == "-") {
            continue;
        }
        writeln!(
            w,
            "  {:<14} {:>16} {:>16} {:>16} {:>16}",
            tier.as_str(),
            row[0],
            row[1],
            row[2],
            row[3]
        )
        .unwrap();
    }
    writeln!(
        w,
        "  {:<14} {:>16} {:>16} {:>16} {:>16}",
        "TOTAL",
        human_bytes(report.cac_tape.total),
        human_bytes(report.cac_disk.total),
        human_bytes(report.rac_tape.total),
        human_bytes(report.rac_disk.total)
    )
    .unwrap();
    writeln!(
        w,
        "  exact bytes: CAC tape {} | CAC disk {} | per-RAC tape {} | per-RAC disk {}",
        report.cac_tape.total, report.cac_disk.total, report.rac_tape.total, report.rac_disk.total
    )
    .unwrap();
    writeln!(w).unwrap();

    // Provisioned CAC disk is an input, not a derivable target; show how far
    // the matrix demand departs from it instead of reconciling silently.
    let cac = scenario.topology.cac();
    if report.cac_disk.total > cac.disk_capacity {
        writeln!(
            w,
            "note: CAC disk demand {} exceeds provisioned {}; the matrix and the provisioned figure disagree, capacity is treated as the input",
            human_bytes(report.cac_disk.total),
            human_bytes(cac.disk_capacity)
        )
        .unwrap();
        writeln!(w).unwrap();
    }

    if !projection.is_empty() {
        writeln!(w, "growth projection (CAC tape):").unwrap();
        for (year, r) in projection.iter().enumerate() {
            writeln!(
                w,
                "  year {year}: CAC tape {} ({} B)",
                human_bytes(r.cac_tape.total),
                r.cac_tape.total
            )
            .unwrap();
        }
        writeln!(w).unwrap();
    }

    if let Some(cpu) = cpu {
        writeln!(w, "cpu accounting:").unwrap();
        let claimed = planning
            .claimed_remote_allocated_ghz
            .map(|c| format!(" (survey estimate: about {c:.0} GHz)"))
            .unwrap_or_default();
        writeln!(
            w,
            "  remote allocated: {:.0} GHz{claimed}",
            cpu.allocated_remote
        )
        .unwrap();
        let claimed_total = planning
            .claimed_remote_total_ghz
            .map(|c| format!(" (survey estimate: over {c:.0} GHz)"))
            .unwrap_or_default();
        writeln!(
            w,
            "  remote total: {:.0} GHz{claimed_total}",
            cpu.total_remote
        )
        .unwrap();
        writeln!(w, "  central: {:.0} GHz", cpu.cac).unwrap();
        if planning.cpu_requirement_ghz.is_some() {
            writeln!(
                w,
                "  requirement: {:.0} GHz → shortfall {:.0} GHz",
                cpu.requirement, cpu.shortfall
            )
            .unwrap();
        }
        writeln!(w).unwrap();
    }

    if fit.is_empty() {
        writeln!(
            w,
            "fit check: all stations hold their pinned and tape demand"
        )
        .unwrap();
    } else {
        writeln!(w, "fit check: {} violation(s)", fit.len()).unwrap();
        for v in fit {
            writeln!(w, "  {v}").unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct SimulateFlags {
    /// Override the scenario's seed.
    pub seed: Option<u64>,
    /// Check storage invariants after every event.
    pub audit: bool,
}

/// `simulate`: run the scenario, emit metrics CSVs and the catalog dump.
pub fn cmd_simulate(path: &Path, flags: &SimulateFlags) -> Result<ReportBundle, CommandError> {
    let (mut scenario, _) = read_and_parse(path)?;
    if let Some(seed) = flags.seed {
        scenario.rng_seed = seed;
    }
    let options = RunOptions {
        audit_invariants: flags.audit,
    };
    let (metrics, catalog) = run_with_catalog(&scenario, options).map_err(|e| match e {
        SimError::ValidationFailed { violations } => CommandError::Invalid(violations),
        SimError::PinnedOverflow { ref station_id, .. } => {
            CommandError::Invalid(vec![Violation::new(station_id.clone(), e.to_string())])
        }
        SimError::NoCpuInRegion { ref region_id } => {
            CommandError::Invalid(vec![Violation::new(region_id.clone(), e.to_string())])
        }
    })?;

    // Planner/simulator agreement, checked in debug builds only: the pure
    // policy path and the event-driven one must land on the same pinned bytes.
    if cfg!(debug_assertions) && metrics.production_end.is_some() {
        if let Ok(predicted) = predict_pinned_bytes(&scenario) {
            assert_eq!(predicted, metrics.pinned_at_production_end);
        }
    }

    let mut bundle = ReportBundle::default();
    bundle.insert(METRICS_STATIONS, metrics.stations_csv());
    bundle.insert(METRICS_LINKS, metrics.links_csv());
    bundle.insert(METRICS_JOBS, metrics.jobs_csv());
    bundle.insert(SUMMARY, metrics.summary_text());
    bundle.insert(CATALOG_DUMP, catalog.dump());
    bundle.report.metrics = Some(metrics);
    Ok(bundle)
}

/// `report`: re-print the summary of an existing bundle directory.
pub fn cmd_report(dir: &Path) -> Result<String, CommandError> {
    let summary = dir.join(SUMMARY);
    let text = fs::read_to_string(&summary)
        .map_err(|e| CommandError::Input(format!("{}: {e}", summary.display())))?;
    let mut listing = String::new();
    for name in [
        METRICS_STATIONS,
        METRICS_LINKS,
        METRICS_JOBS,
        STORAGE_REPORT,
        SUMMARY,
        CATALOG_DUMP,
    ] {
        let path = dir.join(name);
        if let Ok(meta) = fs::metadata(&path) {
            writeln!(listing, "{} ({} B)", name, meta.len()).unwrap();
        }
    }
    Ok(format!("{listing}\n{text}"))
}
