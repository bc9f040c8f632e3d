use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use ridemarket::bounds::{brute_force_opt, lp_bound, ExactOptions, LpOptions};
use ridemarket::experiment::{read_report, run_experiment, verify_report, write_outputs, Config, RunReport};
use ridemarket::ingest::{
    filter_date, gen_drivers, parse_date, parse_porto, roster_from_trips, synth_trips, trips_to_tasks, write_porto,
    DriverModel, GeneratorConfig, SynthTraceConfig, TaskConversion,
};
use ridemarket::instance_io::{load_instance, save_instance};
use ridemarket::{CostModel, Error, Instance, Objective};

#[derive(Parser)]
#[command(name = "ridemarket", version, about = "Ride-sharing dispatch experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RosterModel {
    Hitchhiking,
    HomeWorkHome,
    /// One driver per taxi and day, taken from the trace itself.
    Roster,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a Porto trace into an instance file.
    Ingest {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        drivers: usize,
        #[arg(long, value_enum, default_value = "hitchhiking")]
        model: RosterModel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep only trips starting on this UTC day (YYYY-MM-DD).
        #[arg(long)]
        date: Option<String>,
        /// Keep the first N trips by start time.
        #[arg(long)]
        tasks: Option<usize>,
        #[arg(long, default_value_t = 8.0)]
        shift_hours: f64,
        #[arg(long, default_value = "driver-profit")]
        objective: String,
    },
    /// Write a synthetic trace in the Porto format.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trips: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a sweep and write report.json, results.csv and summary.csv.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated modes; overrides the config.
        #[arg(long)]
        mode: Option<String>,
        /// Driver counts as a:b:step or a comma list.
        #[arg(long)]
        drivers: Option<String>,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Extra `key=value` settings, applied last.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// LP upper bound for one instance.
    Bound {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tolerance: f64,
    },
    /// Exact optimum for one (small) instance.
    Exact {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
    },
    /// Re-emit CSV tables from a report, optionally re-checking every number.
    Report {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        verify: bool,
    },
}

// Exit code 1: bad configuration or inputs; 2: the run finished but some
// cells failed.
enum Failure {
    Config(anyhow::Error),
    Cells(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.into())
    }
}

fn ingest(
    trace: PathBuf,
    out: PathBuf,
    drivers: usize,
    model: RosterModel,
    seed: u64,
    date: Option<String>,
    tasks: Option<usize>,
    shift_hours: f64,
    objective: String,
) -> anyhow::Result<()> {
    let objective: Objective = objective.parse()?;
    let (mut trips, report) = parse_porto(File::open(&trace).with_context(|| format!("opening {}", trace.display()))?)?;
    eprintln!(
        "parsed {} rows: kept {}, dropped {} (missing_data {}, short_polyline {}, malformed {})",
        report.rows,
        report.kept,
        report.dropped.len(),
        report.count(ridemarket::ingest::DropReason::MissingData),
        report.count(ridemarket::ingest::DropReason::ShortPolyline),
        report.count(ridemarket::ingest::DropReason::Malformed),
    );
    if let Some(d) = date {
        trips = filter_date(&trips, parse_date(&d)?);
    }
    trips.sort_by(|a, b| a.start_timestamp.cmp(&b.start_timestamp).then_with(|| a.trip_id.cmp(&b.trip_id)));
    if let Some(n) = tasks {
        trips.truncate(n);
    }
    let cm = CostModel::default();
    let task_list = trips_to_tasks(&trips, &cm, &TaskConversion { seed, ..TaskConversion::default() })?;
    let roster = match model {
        RosterModel::Roster => roster_from_trips(&trips),
        RosterModel::Hitchhiking | RosterModel::HomeWorkHome => {
            let driver_model = if matches!(model, RosterModel::Hitchhiking) { DriverModel::Hitchhiking } else { DriverModel::HomeWorkHome };
            let gen = GeneratorConfig { driver_model, n_drivers: drivers, shift_length_s: shift_hours * 3600.0, seed, ..GeneratorConfig::default() };
            gen_drivers(&gen, &task_list)?
        }
    };
    let inst = Instance::admit(roster, task_list, cm, objective)?;
    save_instance(&inst, &out)?;
    eprintln!("wrote {} drivers and {} tasks to {}", inst.drivers.len(), inst.tasks.len(), out.display());
    Ok(())
}

fn run(
    config: Option<PathBuf>,
    mode: Option<String>,
    drivers: Option<String>,
    seeds: Option<u64>,
    out: PathBuf,
    set: Vec<String>,
) -> Result<(), Failure> {
    let mut cfg = match &config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            // Validation waits until command-line overrides are applied.
            Config::from_text(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => Config::default(),
    };
    if let Some(m) = mode {
        cfg.set("modes", &m)?;
    }
    if let Some(d) = drivers {
        cfg.set("drivers", &d)?;
    }
    if let Some(s) = seeds {
        cfg.set("seeds", &s.to_string())?;
    }
    for kv in &set {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(Failure::Config(anyhow::anyhow!("--set expects key=value, got {kv:?}")));
        };
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    let report = run_experiment(&cfg)?;
    write_outputs(&report, &out)?;
    print_summary(&report);
    eprintln!("wrote {}/report.json, results.csv, summary.csv", out.display());
    check_failures(&report)
}

fn print_summary(report: &RunReport) {
    println!("{:<18} {:>9} {:>14} {:>14} {:>8} {:>10}", "mode", "n_drivers", "revenue", "profit", "served", "ratio");
    for r in &report.summary {
        let ratio = r.perf_ratio.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<18} {:>9} {:>14.2} {:>14.2} {:>8.3} {:>10}",
            r.mode.name(),
            r.n_drivers,
            r.total_revenue,
            r.drivers_profit,
            r.service_rate,
            ratio
        );
    }
}

fn check_failures(report: &RunReport) -> Result<(), Failure> {
    if report.failures.is_empty() {
        return Ok(());
    }
    for f in &report.failures {
        eprintln!("cell {} n={} seed={} failed: {}", f.mode, f.n_drivers, f.seed, f.error);
    }
    Err(Failure::Cells(format!("{} cell(s) failed", report.failures.len())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), Failure> = match cli.command {
        Command::Ingest { trace, out, drivers, model, seed, date, tasks, shift_hours, objective } => {
            ingest(trace, out, drivers, model, seed, date, tasks, shift_hours, objective).map_err(Failure::Config)
        }
        Command::Synth { out, trips, seed } => (|| -> anyhow::Result<()> {
            let records = synth_trips(&SynthTraceConfig { n_trips: trips, seed, ..SynthTraceConfig::default() })?;
            write_porto(&records, File::create(&out)?)?;
            Ok(())
        })()
        .map_err(Failure::Config),
        Command::Run { config, mode, drivers, seeds, out, set } => run(config, mode, drivers, seeds, out, set),
        Command::Bound { instance, tolerance } => (|| -> Result<(), Failure> {
            let inst = load_instance(&instance)?;
            let sol = lp_bound(&inst, LpOptions { tolerance, ..LpOptions::default() }).map_err(|e| Failure::Cells(e.to_string()))?;
            let out = serde_json::json!({
                "objective": sol.objective,
                "rounds": sol.rounds,
                "columns_generated": sol.columns_generated,
                "max_reduced_cost": sol.max_reduced_cost,
                "columns": sol.columns,
            });
            println!("{}", serde_json::to_string_pretty(&out).map_err(anyhow::Error::from)?);
            Ok(())
        })(),
        Command::Exact { instance, budget } => (|| -> Result<(), Failure> {
            let inst = load_instance(&instance)?;
            let sol = brute_force_opt(&inst, ExactOptions { node_budget: budget, prune: true })
                .map_err(|e| Failure::Cells(e.to_string()))?;
            let out = serde_json::json!({
                "objective": sol.objective,
                "nodes_explored": sol.nodes,
                "schedules": sol.outcome.schedules,
            });
            println!("{}", serde_json::to_string_pretty(&out).map_err(anyhow::Error::from)?);
            Ok(())
        })(),
        Command::Report { report, out, verify } => (|| -> Result<(), Failure> {
            let rep = read_report(&report)?;
            if let Some(dir) = out {
                write_outputs(&rep, dir)?;
            }
            print_summary(&rep);
            if verify {
                let problems = verify_report(&rep)?;
                for p in &problems {
                    eprintln!("mismatch: {p}");
                }
                if !problems.is_empty() {
                    return Err(Failure::Cells(format!("{} mismatch(es)", problems.len())));
                }
                eprintln!("all {} cells recomputed identically", rep.cells.len());
            }
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Cells(msg)) => {
            eprintln!("error: {msg}");
            let _ = std::io::stderr().flush();
            ExitCode::from(2)
        }
    }
}
