//! Driver-count sweeps: build a market per (driver count, seed), run each
//! solver mode on it, and collect metrics into a JSON report and CSV tables.
//!
//! Configuration is a flat `key = value` file; `#` starts a comment. Every
//! key has a default and the full resolved configuration is echoed into the
//! report, so a report alone is enough to rebuild each market and recompute
//! its numbers ([`verify_report`]).
//!
//! For a given seed the task set is fixed and driver rosters nest, so moving
//! along the sweep only adds drivers.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{brute_force_opt, lp_bound, ExactOptions, LpOptions};
use crate::error::{Error, Result};
use crate::estimation::CostModel;
use crate::greedy::{greedy_assign, GreedyTrace};
use crate::ingest::{
    filter_date, gen_drivers, parse_date, parse_porto, synth_trips, trips_to_tasks, DriverModel, GeneratorConfig, LocationSource,
    SynthTraceConfig, TaskConversion,
};
use crate::instance_io::load_instance;
use crate::market::{Instance, MarketOutcome, Objective, Schedule, Task};
use crate::metrics::{compute_metrics, MarketMetrics};
use crate::online::{simulate, Policy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OfflineGreedy,
    OnlineNearest,
    OnlineMaxmargin,
    Exact,
    LpBound,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::OfflineGreedy, Mode::OnlineNearest, Mode::OnlineMaxmargin, Mode::Exact, Mode::LpBound];

    pub fn name(self) -> &'static str {
        match self {
            Mode::OfflineGreedy => "offline-greedy",
            Mode::OnlineNearest => "online-nearest",
            Mode::OnlineMaxmargin => "online-maxmargin",
            Mode::Exact => "exact",
            Mode::LpBound => "lp-bound",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown mode {s:?}")))
    }
}

/// Parses `a:b:step` (inclusive of `b` when it lies on the grid) or a
/// comma-separated list.
pub fn parse_sweep(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidInput(format!("bad driver sweep {s:?}"));
    let nums = |parts: &[&str]| parts.iter().map(|p| p.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<Vec<_>>>();
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.len() {
        1 => nums(&s.split(',').collect::<Vec<_>>())?,
        3 => {
            let v = nums(&parts)?;
            if v[2] == 0 || v[0] > v[1] {
                return Err(bad());
            }
            (v[0]..=v[1]).step_by(v[2]).collect()
        }
        _ => return Err(bad()),
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Porto CSV to draw tasks from.
    pub trace: Option<PathBuf>,
    /// Instance file; its tasks (and, without a `drivers` sweep, its drivers)
    /// are used as given.
    pub instance: Option<PathBuf>,
    /// Keep only trips starting on this UTC day.
    pub date: Option<NaiveDate>,
    /// Number of tasks: the first trips by start time, or the size of the
    /// synthetic trace when neither `trace` nor `instance` is set.
    pub tasks: usize,
    pub modes: Vec<Mode>,
    pub drivers: Option<Vec<usize>>,
    pub seeds: u64,
    pub base_seed: u64,
    pub objective: Objective,
    pub driver_model: DriverModel,
    pub locations: LocationSource,
    pub shift_hours: f64,
    pub cost_model: CostModel,
    pub publish_lead_s: f64,
    pub wtp_markup_max: f64,
    pub exact_max_tasks: usize,
    pub exact_node_budget: u64,
    pub lp_tolerance: f64,
    pub record_timings: bool,
    pub include_logs: bool,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            trace: None,
            instance: None,
            date: None,
            tasks: 1000,
            modes: vec![Mode::OfflineGreedy, Mode::OnlineNearest, Mode::OnlineMaxmargin, Mode::LpBound],
            drivers: None,
            seeds: 1,
            base_seed: 0,
            objective: Objective::DriverProfit,
            driver_model: DriverModel::Hitchhiking,
            locations: LocationSource::Uniform,
            shift_hours: 8.0,
            cost_model: CostModel::default(),
            publish_lead_s: 300.0,
            wtp_markup_max: 0.5,
            exact_max_tasks: 14,
            exact_node_budget: 2_000_000,
            lp_tolerance: 1e-7,
            record_timings: false,
            include_logs: false,
            threads: 0,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidInput(format!("{key}: cannot parse {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::InvalidInput(format!("{key}: expected true or false, got {v:?}"))),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let cfg = Config::from_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies every line of `text` to the defaults without validating the
    /// result, so that further overrides can follow.
    pub fn from_text(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| Error::InvalidInput(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let cm = &mut self.cost_model;
        let opt_path = |v: &str| (!v.is_empty()).then(|| PathBuf::from(v));
        match key {
            "trace" => self.trace = opt_path(v),
            "instance" => self.instance = opt_path(v),
            "date" => {
                self.date = if v.is_empty() {
                    None
                } else {
                    Some(parse_date(v)?)
                }
            }
            "tasks" => self.tasks = parse_num(key, v)?,
            "modes" => self.modes = v.split(',').map(|m| m.trim().parse()).collect::<Result<_>>()?,
            "drivers" => self.drivers = if v.is_empty() { None } else { Some(parse_sweep(v)?) },
            "seeds" => self.seeds = parse_num(key, v)?,
            "seed" => self.base_seed = parse_num(key, v)?,
            "objective" => self.objective = v.parse()?,
            "driver_model" => self.driver_model = v.parse()?,
            "locations" => {
                self.locations = match v {
                    "uniform" => LocationSource::Uniform,
                    "task-endpoints" => LocationSource::TaskEndpoints,
                    _ => return Err(Error::InvalidInput(format!("locations: unknown value {v:?}"))),
                }
            }
            "shift_hours" => self.shift_hours = parse_num(key, v)?,
            "speed_kmh" => cm.speed_kmh = parse_num(key, v)?,
            "fuel_unit_price" => cm.fuel_unit_price = parse_num(key, v)?,
            "detour_factor" => cm.detour_factor = parse_num(key, v)?,
            "beta1" => cm.beta1 = parse_num(key, v)?,
            "beta2" => cm.beta2 = parse_num(key, v)?,
            "default_surge" => cm.default_surge = parse_num(key, v)?,
            "publish_lead_s" => self.publish_lead_s = parse_num(key, v)?,
            "wtp_markup_max" => self.wtp_markup_max = parse_num(key, v)?,
            "exact_max_tasks" => self.exact_max_tasks = parse_num(key, v)?,
            "exact_node_budget" => self.exact_node_budget = parse_num(key, v)?,
            "lp_tolerance" => self.lp_tolerance = parse_num(key, v)?,
            "record_timings" => self.record_timings = parse_bool(key, v)?,
            "include_logs" => self.include_logs = parse_bool(key, v)?,
            "threads" => self.threads = parse_num(key, v)?,
            _ => return Err(Error::InvalidInput(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.cost_model.validate()?;
        let fail = |m: String| Err(Error::InvalidInput(m));
        if self.trace.is_some() && self.instance.is_some() {
            return fail("set at most one of trace and instance".into());
        }
        if self.modes.is_empty() {
            return fail("no modes selected".into());
        }
        if self.seeds == 0 {
            return fail("seeds must be at least 1".into());
        }
        if self.instance.is_none() && self.drivers.is_none() {
            return fail("a drivers sweep is required unless an instance file supplies the drivers".into());
        }
        if !(self.shift_hours > 0.0 && self.shift_hours.is_finite()) {
            return fail(format!("shift_hours must be positive, got {}", self.shift_hours));
        }
        if !(self.publish_lead_s > 0.0) || !(self.wtp_markup_max >= 0.0) || !(self.lp_tolerance > 0.0) {
            return fail("publish_lead_s and lp_tolerance must be positive and wtp_markup_max nonnegative".into());
        }
        Ok(())
    }

    /// Every setting, as `key -> value` text.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let cm = &self.cost_model;
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let pairs: [(&str, String); 25] = [
            ("trace", path(&self.trace)),
            ("instance", path(&self.instance)),
            ("date", self.date.map(|d| d.to_string()).unwrap_or_default()),
            ("tasks", self.tasks.to_string()),
            ("modes", self.modes.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")),
            (
                "drivers",
                self.drivers
                    .as_ref()
                    .map(|d| d.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
                    .unwrap_or_default(),
            ),
            ("seeds", self.seeds.to_string()),
            ("seed", self.base_seed.to_string()),
            ("objective", self.objective.to_string()),
            ("driver_model", self.driver_model.to_string()),
            (
                "locations",
                match self.locations {
                    LocationSource::Uniform => "uniform",
                    LocationSource::TaskEndpoints => "task-endpoints",
                }
                .into(),
            ),
            ("shift_hours", self.shift_hours.to_string()),
            ("speed_kmh", cm.speed_kmh.to_string()),
            ("fuel_unit_price", cm.fuel_unit_price.to_string()),
            ("detour_factor", cm.detour_factor.to_string()),
            ("beta1", cm.beta1.to_string()),
            ("beta2", cm.beta2.to_string()),
            ("default_surge", cm.default_surge.to_string()),
            ("publish_lead_s", self.publish_lead_s.to_string()),
            ("wtp_markup_max", self.wtp_markup_max.to_string()),
            ("exact_max_tasks", self.exact_max_tasks.to_string()),
            ("exact_node_budget", self.exact_node_budget.to_string()),
            ("lp_tolerance", self.lp_tolerance.to_string()),
            ("record_timings", self.record_timings.to_string()),
            ("include_logs", self.include_logs.to_string()),
        ];
        let mut out: BTreeMap<String, String> = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        out.insert("threads".into(), self.threads.to_string());
        out
    }

    /// Rebuilds a configuration from its echo.
    pub fn from_echo(echo: &BTreeMap<String, String>) -> Result<Config> {
        let mut cfg = Config::default();
        for (k, v) in echo {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn task_seed(&self, seed: u64) -> u64 {
        self.base_seed.wrapping_mul(1_000_003).wrapping_add(seed)
    }
}

/// Tasks and (optionally) fixed drivers shared by every cell with the same
/// seed.
struct Source {
    fixed: Option<Instance>,
    trips: Option<Vec<crate::ingest::TripRecord>>,
}

fn load_source(cfg: &Config) -> Result<Source> {
    if let Some(path) = &cfg.instance {
        return Ok(Source { fixed: Some(load_instance(path)?), trips: None });
    }
    let Some(path) = &cfg.trace else {
        return Ok(Source { fixed: None, trips: None });
    };
    let (mut trips, _) = parse_porto(File::open(path)?)?;
    if let Some(d) = cfg.date {
        trips = filter_date(&trips, d);
    }
    trips.sort_by(|a, b| a.start_timestamp.cmp(&b.start_timestamp).then_with(|| a.trip_id.cmp(&b.trip_id)));
    trips.truncate(cfg.tasks);
    Ok(Source { fixed: None, trips: Some(trips) })
}

fn seed_tasks(cfg: &Config, src: &Source, seed: u64) -> Result<Vec<Task>> {
    if let Some(inst) = &src.fixed {
        return Ok(inst.tasks.clone());
    }
    let conv = TaskConversion {
        publish_lead_s: cfg.publish_lead_s,
        wtp_markup_max: cfg.wtp_markup_max,
        seed: cfg.task_seed(seed),
    };
    match &src.trips {
        Some(trips) => trips_to_tasks(trips, &cfg.cost_model, &conv),
        None => {
            let trips = synth_trips(&SynthTraceConfig { n_trips: cfg.tasks, seed: cfg.task_seed(seed), ..Default::default() })?;
            trips_to_tasks(&trips, &cfg.cost_model, &conv)
        }
    }
}

fn cell_instance(cfg: &Config, src: &Source, tasks: &[Task], n_drivers: Option<usize>, seed: u64) -> Result<Instance> {
    let (cm, objective) = match &src.fixed {
        Some(inst) => (inst.cost_model, inst.objective),
        None => (cfg.cost_model, cfg.objective),
    };
    let drivers = match (n_drivers, &src.fixed) {
        (None, Some(inst)) => inst.drivers.clone(),
        (Some(n), _) => {
            let gen = GeneratorConfig {
                driver_model: cfg.driver_model,
                n_drivers: n,
                locations: cfg.locations,
                shift_length_s: cfg.shift_hours * 3600.0,
                seed: cfg.task_seed(seed) ^ 0x5eed_d217,
                ..GeneratorConfig::default()
            };
            gen_drivers(&gen, tasks)?
        }
        (None, None) => return Err(Error::InvalidInput("no drivers".into())),
    };
    Instance::admit(drivers, tasks.to_vec(), cm, objective)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpCertificate {
    pub objective: f64,
    pub rounds: usize,
    pub columns_generated: usize,
    pub max_reduced_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub mode: Mode,
    pub n_drivers: usize,
    pub seed: u64,
    pub n_tasks: usize,
    pub metrics: MarketMetrics,
    pub wallclock_ms: Option<f64>,
    pub schedules: Vec<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greedy_trace: Option<GreedyTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_log: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp: Option<LpCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub mode: Mode,
    pub n_drivers: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mode: Mode,
    pub n_drivers: usize,
    pub seeds: usize,
    pub total_revenue: f64,
    pub drivers_profit: f64,
    pub service_rate: f64,
    pub avg_rev_per_driver: f64,
    pub avg_tasks_per_driver: f64,
    pub ir_violations: f64,
    pub perf_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: BTreeMap<String, String>,
    pub cells: Vec<CellReport>,
    pub failures: Vec<CellFailure>,
    pub summary: Vec<SummaryRow>,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed().as_secs_f64() * 1e3)
}

fn run_cell_group(cfg: &Config, src: &Source, tasks: &[Task], n: Option<usize>, seed: u64) -> (Vec<CellReport>, Vec<CellFailure>) {
    let inst = match cell_instance(cfg, src, tasks, n, seed) {
        Ok(i) => i,
        Err(e) => {
            let fails = cfg
                .modes
                .iter()
                .map(|&mode| CellFailure { mode, n_drivers: n.unwrap_or(0), seed, error: e.to_string() })
                .collect();
            return (Vec::new(), fails);
        }
    };
    let n_drivers = inst.drivers.len();
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let fail = |mode, e: Error| CellFailure { mode, n_drivers, seed, error: e.to_string() };

    let mut bound = None;
    if cfg.modes.contains(&Mode::LpBound) {
        let (res, ms) = timed(|| lp_bound(&inst, LpOptions { tolerance: cfg.lp_tolerance, ..LpOptions::default() }));
        match res {
            Ok(sol) => {
                bound = Some(sol.objective);
                cells.push(CellReport {
                    mode: Mode::LpBound,
                    n_drivers,
                    seed,
                    n_tasks: inst.tasks.len(),
                    metrics: MarketMetrics {
                        drivers_profit: sol.objective,
                        performance_ratio: (sol.objective > crate::estimation::MONEY_EPS).then_some(1.0),
                        ..MarketMetrics::default()
                    },
                    wallclock_ms: cfg.record_timings.then_some(ms),
                    schedules: Vec::new(),
                    greedy_trace: None,
                    event_log: None,
                    lp: Some(LpCertificate {
                        objective: sol.objective,
                        rounds: sol.rounds,
                        columns_generated: sol.columns_generated,
                        max_reduced_cost: sol.max_reduced_cost,
                    }),
                });
            }
            Err(e) => failures.push(fail(Mode::LpBound, e)),
        }
    }

    for &mode in &cfg.modes {
        let (res, ms): (Result<(MarketOutcome, Option<GreedyTrace>, Option<Vec<String>>)>, f64) = match mode {
            Mode::LpBound => continue,
            Mode::OfflineGreedy => timed(|| greedy_assign(&inst).map(|(o, t)| (o, Some(t), None))),
            Mode::OnlineNearest | Mode::OnlineMaxmargin => {
                let policy = if mode == Mode::OnlineNearest { Policy::Nearest } else { Policy::MaxMargin };
                timed(|| simulate(&inst, policy, seed).map(|r| {
                    let log = cfg.include_logs.then(|| r.event_log());
                    (r.outcome, None, log)
                }))
            }
            Mode::Exact => {
                if inst.tasks.len() > cfg.exact_max_tasks {
                    failures.push(fail(
                        mode,
                        Error::InvalidInput(format!("{} tasks exceed exact_max_tasks = {}", inst.tasks.len(), cfg.exact_max_tasks)),
                    ));
                    continue;
                }
                let opts = ExactOptions { node_budget: cfg.exact_node_budget, prune: true };
                timed(|| brute_force_opt(&inst, opts).map(|s| (s.outcome, None, None)))
            }
        };
        match res {
            Ok((outcome, trace, log)) => cells.push(CellReport {
                mode,
                n_drivers,
                seed,
                n_tasks: inst.tasks.len(),
                metrics: compute_metrics(&inst, &outcome, bound),
                wallclock_ms: cfg.record_timings.then_some(ms),
                schedules: outcome.schedules,
                greedy_trace: trace,
                event_log: log,
                lp: None,
            }),
            Err(e) => failures.push(fail(mode, e)),
        }
    }
    (cells, failures)
}

fn summarize(cells: &[CellReport]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Mode, usize), Vec<&CellReport>> = BTreeMap::new();
    for c in cells {
        groups.entry((c.mode, c.n_drivers)).or_default().push(c);
    }
    groups
        .into_iter()
        .map(|((mode, n_drivers), cs)| {
            let k = cs.len() as f64;
            let mean = |f: &dyn Fn(&MarketMetrics) -> f64| cs.iter().map(|c| f(&c.metrics)).sum::<f64>() / k;
            let ratios: Vec<f64> = cs.iter().filter_map(|c| c.metrics.performance_ratio).collect();
            SummaryRow {
                mode,
                n_drivers,
                seeds: cs.len(),
                total_revenue: mean(&|m| m.total_revenue),
                drivers_profit: mean(&|m| m.drivers_profit),
                service_rate: mean(&|m| m.service_rate),
                avg_rev_per_driver: mean(&|m| m.avg_revenue_per_driver),
                avg_tasks_per_driver: mean(&|m| m.avg_tasks_per_driver),
                ir_violations: mean(&|m| m.ir_violations as f64),
                perf_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
            }
        })
        .collect()
}

/// Runs the whole sweep. Cell failures are recorded in the report; only
/// configuration and input errors are returned as `Err`.
pub fn run_experiment(cfg: &Config) -> Result<RunReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| {
        let src = load_source(cfg)?;
        let seeds: Vec<u64> = (0..cfg.seeds).collect();
        let task_sets: Vec<Vec<Task>> = seeds.par_iter().map(|&s| seed_tasks(cfg, &src, s)).collect::<Result<_>>()?;
        let sweep: Vec<Option<usize>> = match &cfg.drivers {
            Some(d) => d.iter().map(|&n| Some(n)).collect(),
            None => vec![None],
        };
        let jobs: Vec<(Option<usize>, u64)> = sweep.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
        let results: Vec<(Vec<CellReport>, Vec<CellFailure>)> = jobs
            .par_iter()
            .map(|&(n, s)| run_cell_group(cfg, &src, &task_sets[s as usize], n, s))
            .collect();
        let (mut cells, mut failures): (Vec<CellReport>, Vec<CellFailure>) =
            results.into_iter().fold((Vec::new(), Vec::new()), |(mut c, mut f), (c2, f2)| {
                c.extend(c2);
                f.extend(f2);
                (c, f)
            });
        cells.sort_by_key(|c| (c.mode, c.n_drivers, c.seed));
        failures.sort_by_key(|f| (f.mode, f.n_drivers, f.seed));
        Ok(RunReport { config: cfg.echo(), summary: summarize(&cells), cells, failures })
    })
}

const CSV_HEADER: [&str; 11] = [
    "mode",
    "n_drivers",
    "seed",
    "total_revenue",
    "drivers_profit",
    "service_rate",
    "avg_rev_per_driver",
    "avg_tasks_per_driver",
    "ir_violations",
    "perf_ratio",
    "wallclock_ms",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per (mode, driver count, seed).
pub fn write_cells_csv<W: Write>(report: &RunReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for c in &report.cells {
        let m = &c.metrics;
        out.write_record([
            c.mode.name().to_string(),
            c.n_drivers.to_string(),
            c.seed.to_string(),
            m.total_revenue.to_string(),
            m.drivers_profit.to_string(),
            m.service_rate.to_string(),
            m.avg_revenue_per_driver.to_string(),
            m.avg_tasks_per_driver.to_string(),
            m.ir_violations.to_string(),
            opt(m.performance_ratio),
            opt(c.wallclock_ms),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Seed-averaged rows, one per (mode, driver count).
pub fn write_summary_csv<W: Write>(report: &RunReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "mode",
        "n_drivers",
        "seeds",
        "total_revenue",
        "drivers_profit",
        "service_rate",
        "avg_rev_per_driver",
        "avg_tasks_per_driver",
        "ir_violations",
        "perf_ratio",
    ])?;
    for r in &report.summary {
        out.write_record([
            r.mode.name().to_string(),
            r.n_drivers.to_string(),
            r.seeds.to_string(),
            r.total_revenue.to_string(),
            r.drivers_profit.to_string(),
            r.service_rate.to_string(),
            r.avg_rev_per_driver.to_string(),
            r.avg_tasks_per_driver.to_string(),
            r.ir_violations.to_string(),
            opt(r.perf_ratio),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `report.json`, `results.csv` and `summary.csv` into `dir`.
pub fn write_outputs(report: &RunReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(File::create(dir.join("report.json"))?), report)?;
    write_cells_csv(report, File::create(dir.join("results.csv"))?)?;
    write_summary_csv(report, File::create(dir.join("summary.csv"))?)?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<RunReport> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

/// Rebuilds every market of a report from its configuration echo and
/// checks each stored schedule set and metric row against a fresh
/// computation. Returns one message per discrepancy.
pub fn verify_report(report: &RunReport) -> Result<Vec<String>> {
    let cfg = Config::from_echo(&report.config)?;
    let src = load_source(&cfg)?;
    let mut problems = Vec::new();
    let mut tasks: BTreeMap<u64, Vec<Task>> = BTreeMap::new();
    let bounds: BTreeMap<(usize, u64), f64> = report
        .cells
        .iter()
        .filter(|c| c.mode == Mode::LpBound)
        .map(|c| ((c.n_drivers, c.seed), c.metrics.drivers_profit))
        .collect();
    for c in report.cells.iter().filter(|c| c.mode != Mode::LpBound) {
        if !tasks.contains_key(&c.seed) {
            tasks.insert(c.seed, seed_tasks(&cfg, &src, c.seed)?);
        }
        let n = cfg.drivers.as_ref().map(|_| c.n_drivers);
        let inst = cell_instance(&cfg, &src, &tasks[&c.seed], n, c.seed)?;
        let assignment = c.schedules.iter().map(|s| (s.driver_id, s.task_ids.clone())).collect();
        let label = format!("{} n={} seed={}", c.mode, c.n_drivers, c.seed);
        let outcome = match MarketOutcome::from_assignment(&inst, &assignment) {
            Ok(o) => o,
            Err(e) => {
                problems.push(format!("{label}: {e}"));
                continue;
            }
        };
        let fresh = compute_metrics(&inst, &outcome, bounds.get(&(c.n_drivers, c.seed)).copied());
        if fresh != c.metrics {
            problems.push(format!("{label}: stored metrics {:?} differ from recomputed {:?}", c.metrics, fresh));
        }
        if let Some(trace) = &c.greedy_trace {
            if (trace.total_profit() - c.metrics.drivers_profit).abs() > 1e-6 {
                problems.push(format!("{label}: greedy trace sums to {} but profit is {}", trace.total_profit(), c.metrics.drivers_profit));
            }
        }
    }
    Ok(problems)
}

/// Spearman rank correlation with average ranks for ties; `None` when
/// either side is constant or lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Config {
        Config::parse("tasks = 60\ndrivers = 4:8:4\nseeds = 2\nmodes = offline-greedy, online-nearest, online-maxmargin, lp-bound\n").unwrap()
    }

    #[test]
    fn sweep_syntax() {
        assert_eq!(parse_sweep("20:300:40").unwrap(), vec![20, 60, 100, 140, 180, 220, 260, 300]);
        assert_eq!(parse_sweep("20,40").unwrap(), vec![20, 40]);
        assert!(parse_sweep("5:1:1").is_err());
        assert!(parse_sweep("1:5:0").is_err());
        assert!(parse_sweep("x").is_err());
    }

    #[test]
    fn config_errors_name_the_line() {
        let e = Config::parse("drivers = 5\nspeed = 3\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(Config::parse("seeds = 1\n").is_err());
        assert!(Config::parse("drivers = 5\nmodes = greedy\n").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = tiny();
        assert_eq!(Config::from_echo(&cfg.echo()).unwrap(), cfg);
    }

    #[test]
    fn cell_cardinality_and_ratios() {
        let rep = run_experiment(&tiny()).unwrap();
        assert!(rep.failures.is_empty(), "{:?}", rep.failures);
        assert_eq!(rep.cells.len(), 2 * 2 * 4);
        let mut csv = Vec::new();
        write_cells_csv(&rep, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        for c in &rep.cells {
            let r = c.metrics.performance_ratio.expect("bound available");
            assert!(r <= 1.0 + 1e-6, "{} {r}", c.mode);
            if let Some(t) = &c.greedy_trace {
                assert!((t.total_profit() - c.metrics.drivers_profit).abs() < 1e-9);
            }
        }
        assert!(verify_report(&rep).unwrap().is_empty());
        let keys: Vec<_> = rep.cells.iter().map(|c| (c.mode, c.n_drivers, c.seed)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn exact_mode_refuses_large_markets() {
        let mut cfg = tiny();
        cfg.modes = vec![Mode::Exact];
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.failures.len(), 4);
        cfg.tasks = 8;
        let rep = run_experiment(&cfg).unwrap();
        assert!(rep.failures.is_empty());
        assert_eq!(rep.cells.len(), 4);
    }

    #[test]
    fn tampered_report_is_caught() {
        let mut rep = run_experiment(&tiny()).unwrap();
        rep.cells[0].metrics.total_revenue += 1.0;
        assert_eq!(verify_report(&rep).unwrap().len(), 1);
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]), None);
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }
}
