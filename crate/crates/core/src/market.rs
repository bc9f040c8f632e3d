//! Drivers, tasks, schedules and the per-driver profit function.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{leg_unchecked, CostModel, GeoPoint, Leg, MONEY_EPS};
use crate::metrics::{compute_metrics, MarketMetrics};

pub type DriverId = u64;
pub type TaskId = u64;

/// Slack (seconds) allowed when chaining realized times, so that arcs
/// accepted at equality survive a different summation order.
pub const TIME_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Driver {
    pub id: DriverId,
    pub source: GeoPoint,
    pub dest: GeoPoint,
    pub start_time: f64,
    pub end_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub publish_time: f64,
    pub source: GeoPoint,
    pub dest: GeoPoint,
    pub start_deadline: f64,
    pub end_deadline: f64,
    pub price: f64,
    pub wtp: f64,
    /// Road distance of the trip itself when it was measured (e.g. along a
    /// recorded trajectory). Absent means "estimate from the endpoints".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trip_distance_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surge: Option<f64>,
}

impl Driver {
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.dest.validate()?;
        if !(self.start_time.is_finite() && self.end_time.is_finite()) || self.start_time >= self.end_time {
            return Err(Error::InvalidInput(format!(
                "driver {}: start_time must precede end_time",
                self.id
            )));
        }
        Ok(())
    }
}

impl Task {
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.dest.validate()?;
        let times = [self.publish_time, self.start_deadline, self.end_deadline];
        if times.iter().any(|t| !t.is_finite())
            || !(self.publish_time < self.start_deadline && self.start_deadline < self.end_deadline)
        {
            return Err(Error::InvalidInput(format!(
                "task {}: need publish_time < start_deadline < end_deadline",
                self.id
            )));
        }
        if !self.price.is_finite() || self.price < 0.0 || !self.wtp.is_finite() {
            return Err(Error::InvalidInput(format!("task {}: bad price/wtp", self.id)));
        }
        if let Some(d) = self.trip_distance_km {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidInput(format!("task {}: bad trip distance", self.id)));
            }
        }
        if let Some(a) = self.surge {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidInput(format!("task {}: bad surge", self.id)));
            }
        }
        Ok(())
    }

    /// The loaded leg from pickup to drop-off.
    pub fn in_task_leg(&self, cm: &CostModel) -> Leg {
        match self.trip_distance_km {
            Some(d) => Leg::from_road_km(d, cm),
            None => leg_unchecked(self.source, self.dest, cm),
        }
    }

    pub fn window_s(&self) -> f64 {
        self.end_deadline - self.start_deadline
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Task value is the price paid to the driver.
    #[default]
    DriverProfit,
    /// Task value is the customer's willingness to pay.
    SocialWelfare,
}

impl Objective {
    pub fn task_value(self, task: &Task) -> f64 {
        match self {
            Objective::DriverProfit => task.price,
            Objective::SocialWelfare => task.wtp,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::DriverProfit => "driver-profit",
            Objective::SocialWelfare => "social-welfare",
        })
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "driver-profit" => Ok(Objective::DriverProfit),
            "social-welfare" => Ok(Objective::SocialWelfare),
            other => Err(Error::InvalidInput(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub drivers: Vec<Driver>,
    pub tasks: Vec<Task>,
    pub cost_model: CostModel,
    pub objective: Objective,
    /// Per-(driver, task) value replacing the objective's task value.
    ///
    /// Only used to build adversarial fixtures where a task is worth
    /// different amounts to different drivers; never read from files.
    #[serde(skip)]
    pub value_overrides: BTreeMap<(DriverId, TaskId), f64>,
}

impl Instance {
    pub fn new(drivers: Vec<Driver>, tasks: Vec<Task>, cost_model: CostModel, objective: Objective) -> Result<Self> {
        let inst = Instance {
            drivers,
            tasks,
            cost_model,
            objective,
            value_overrides: BTreeMap::new(),
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Like [`Instance::new`], but in social-welfare mode silently drops
    /// tasks whose willingness to pay is below their price.
    pub fn admit(drivers: Vec<Driver>, mut tasks: Vec<Task>, cost_model: CostModel, objective: Objective) -> Result<Self> {
        if objective == Objective::SocialWelfare {
            tasks.retain(|t| t.wtp >= t.price);
        }
        Self::new(drivers, tasks, cost_model, objective)
    }

    pub fn validate(&self) -> Result<()> {
        self.cost_model.validate()?;
        let mut seen = HashSet::new();
        for d in &self.drivers {
            d.validate()?;
            if !seen.insert(d.id) {
                return Err(Error::InvalidInput(format!("duplicate driver id {}", d.id)));
            }
        }
        seen.clear();
        for t in &self.tasks {
            t.validate()?;
            if !seen.insert(t.id) {
                return Err(Error::InvalidInput(format!("duplicate task id {}", t.id)));
            }
            if self.objective == Objective::SocialWelfare && t.wtp < t.price {
                return Err(Error::InvalidInput(format!(
                    "task {}: wtp below price is not admissible under social welfare",
                    t.id
                )));
            }
        }
        Ok(())
    }

    /// Value of `task` when served by `driver`.
    pub fn task_value(&self, driver: DriverId, task: &Task) -> f64 {
        self.value_overrides
            .get(&(driver, task.id))
            .copied()
            .unwrap_or_else(|| self.objective.task_value(task))
    }

    pub fn driver(&self, id: DriverId) -> Option<&Driver> {
        self.drivers.iter().find(|d| d.id == id)
    }

    pub fn task_index(&self) -> BTreeMap<TaskId, &Task> {
        self.tasks.iter().map(|t| (t.id, t)).collect()
    }

    /// Profit of a driver serving `task_ids` in order.
    pub fn schedule_profit(&self, driver: &Driver, task_ids: &[TaskId]) -> Result<f64> {
        let index = self.task_index();
        let tasks = task_ids
            .iter()
            .map(|id| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("unknown task id {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        profit_with(driver, &tasks, &self.cost_model, |t| self.task_value(driver.id, t))
    }
}

/// Profit of one driver: task values minus the excess travel cost of the
/// schedule over driving straight home. An empty schedule is worth exactly 0.
pub fn path_profit(driver: &Driver, ordered_tasks: &[&Task], cm: &CostModel, objective: Objective) -> Result<f64> {
    profit_with(driver, ordered_tasks, cm, |t| objective.task_value(t))
}

fn profit_with(driver: &Driver, tasks: &[&Task], cm: &CostModel, value: impl Fn(&Task) -> f64) -> Result<f64> {
    check_sequence(driver, tasks, cm)?;
    if tasks.is_empty() {
        return Ok(0.0);
    }
    let revenue: f64 = tasks.iter().map(|t| value(t)).sum();
    let loaded: f64 = tasks.iter().map(|t| t.in_task_leg(cm).cost).sum();
    let mut empty = 0.0;
    let mut at = driver.source;
    for t in tasks {
        empty += leg_unchecked(at, t.source, cm).cost;
        at = t.dest;
    }
    empty += leg_unchecked(at, driver.dest, cm).cost;
    let baseline = leg_unchecked(driver.source, driver.dest, cm).cost;
    Ok(revenue - loaded - (empty - baseline))
}

/// Checks that `driver` can serve `tasks` in order.
///
/// Times are chained from the driver's start: each pickup must be reached
/// by the task's start deadline, service begins on arrival and lasts the
/// in-task travel time, and the driver must reach the destination by the
/// end time. Every path of a task map passes this check, as does every
/// schedule realized by the online simulator.
pub fn check_sequence(driver: &Driver, tasks: &[&Task], cm: &CostModel) -> Result<()> {
    let infeasible = |leg: String, reason: String| Error::Infeasible {
        driver_id: driver.id,
        leg,
        reason,
    };
    let mut seen = HashSet::new();
    let mut t = driver.start_time;
    let mut at = driver.source;
    let mut prev = "0".to_string();
    for task in tasks {
        if !seen.insert(task.id) {
            return Err(infeasible(format!("{prev}->{}", task.id), "task repeated".into()));
        }
        let in_task = task.in_task_leg(cm);
        if in_task.time_s > task.window_s() {
            return Err(infeasible(
                format!("task {}", task.id),
                format!("in-task travel {:.1}s exceeds window {:.1}s", in_task.time_s, task.window_s()),
            ));
        }
        let arrive = t + leg_unchecked(at, task.source, cm).time_s;
        if arrive > task.start_deadline + TIME_EPS {
            return Err(infeasible(
                format!("{prev}->{}", task.id),
                format!("arrives at {arrive:.1}, start deadline {:.1}", task.start_deadline),
            ));
        }
        t = arrive + in_task.time_s;
        at = task.dest;
        prev = task.id.to_string();
    }
    let arrive = t + leg_unchecked(at, driver.dest, cm).time_s;
    if arrive > driver.end_time + TIME_EPS {
        return Err(infeasible(
            format!("{prev}->-1"),
            format!("reaches destination at {arrive:.1}, shift ends {:.1}", driver.end_time),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub driver_id: DriverId,
    pub task_ids: Vec<TaskId>,
    pub profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketOutcome {
    pub schedules: Vec<Schedule>,
    pub served_task_ids: BTreeSet<TaskId>,
    pub rejected_task_ids: BTreeSet<TaskId>,
    pub total_profit: f64,
    pub metrics: MarketMetrics,
}

impl MarketOutcome {
    /// Builds an outcome from task lists keyed by driver; drivers without an
    /// entry get an empty schedule. Profits are recomputed from scratch.
    pub fn from_assignment(inst: &Instance, assignment: &BTreeMap<DriverId, Vec<TaskId>>) -> Result<Self> {
        let mut schedules = Vec::with_capacity(inst.drivers.len());
        for d in &inst.drivers {
            let task_ids = assignment.get(&d.id).cloned().unwrap_or_default();
            let profit = inst.schedule_profit(d, &task_ids)?;
            schedules.push(Schedule {
                driver_id: d.id,
                task_ids,
                profit,
            });
        }
        for id in assignment.keys() {
            if inst.driver(*id).is_none() {
                return Err(Error::InvalidInput(format!("unknown driver id {id}")));
            }
        }
        Ok(Self::from_schedules(inst, schedules))
    }

    pub fn from_schedules(inst: &Instance, schedules: Vec<Schedule>) -> Self {
        let served: BTreeSet<TaskId> = schedules.iter().flat_map(|s| s.task_ids.iter().copied()).collect();
        let rejected = inst.tasks.iter().map(|t| t.id).filter(|id| !served.contains(id)).collect();
        let total_profit = schedules.iter().map(|s| s.profit).sum();
        let mut out = MarketOutcome {
            schedules,
            served_task_ids: served,
            rejected_task_ids: rejected,
            total_profit,
            metrics: MarketMetrics::default(),
        };
        out.metrics = compute_metrics(inst, &out, None);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// A task appears in more than one schedule (5a).
    DuplicateAssignment { task_id: TaskId, driver_ids: Vec<DriverId> },
    UnknownTask { driver_id: DriverId, task_id: TaskId },
    UnknownDriver { driver_id: DriverId },
    MultipleSchedules { driver_id: DriverId },
    /// The schedule cannot be driven in time (flow/time constraints).
    Infeasible { driver_id: DriverId, detail: String },
    /// Revenue does not cover excess cost (5b); strict mode only.
    IndividualRationality { driver_id: DriverId, profit: f64 },
    ProfitMismatch { driver_id: DriverId, stored: f64, recomputed: f64 },
    PartitionMismatch { detail: String },
    TotalMismatch { stored: f64, recomputed: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateAssignment { task_id, driver_ids } => {
                write!(f, "task {task_id} assigned to several drivers {driver_ids:?}")
            }
            Violation::UnknownTask { driver_id, task_id } => {
                write!(f, "driver {driver_id} schedules unknown task {task_id}")
            }
            Violation::UnknownDriver { driver_id } => write!(f, "unknown driver {driver_id}"),
            Violation::MultipleSchedules { driver_id } => write!(f, "driver {driver_id} has several schedules"),
            Violation::Infeasible { driver_id, detail } => write!(f, "driver {driver_id}: {detail}"),
            Violation::IndividualRationality { driver_id, profit } => {
                write!(f, "driver {driver_id} earns {profit} < 0")
            }
            Violation::ProfitMismatch { driver_id, stored, recomputed } => {
                write!(f, "driver {driver_id}: stored profit {stored} != {recomputed}")
            }
            Violation::PartitionMismatch { detail } => write!(f, "served/rejected sets: {detail}"),
            Violation::TotalMismatch { stored, recomputed } => {
                write!(f, "total profit {stored} != {recomputed}")
            }
        }
    }
}

/// Lists every constraint the outcome breaks. With `strict_ir`, nonempty
/// schedules must also have nonnegative profit.
pub fn validate_outcome(inst: &Instance, out: &MarketOutcome, strict_ir: bool) -> Vec<Violation> {
    let mut violations = Vec::new();
    let index = inst.task_index();
    let mut holders: BTreeMap<TaskId, Vec<DriverId>> = BTreeMap::new();
    let mut seen_drivers = HashSet::new();
    let mut total = 0.0;

    for s in &out.schedules {
        total += s.profit;
        if !seen_drivers.insert(s.driver_id) {
            violations.push(Violation::MultipleSchedules { driver_id: s.driver_id });
        }
        let Some(driver) = inst.driver(s.driver_id) else {
            violations.push(Violation::UnknownDriver { driver_id: s.driver_id });
            continue;
        };
        let mut tasks = Vec::with_capacity(s.task_ids.len());
        for id in &s.task_ids {
            holders.entry(*id).or_default().push(s.driver_id);
            match index.get(id) {
                Some(t) => tasks.push(*t),
                None => violations.push(Violation::UnknownTask {
                    driver_id: s.driver_id,
                    task_id: *id,
                }),
            }
        }
        if tasks.len() != s.task_ids.len() {
            continue;
        }
        match profit_with(driver, &tasks, &inst.cost_model, |t| inst.task_value(driver.id, t)) {
            Ok(p) => {
                if (p - s.profit).abs() > MONEY_EPS * (1.0 + p.abs()) {
                    violations.push(Violation::ProfitMismatch {
                        driver_id: s.driver_id,
                        stored: s.profit,
                        recomputed: p,
                    });
                }
                if strict_ir && !s.task_ids.is_empty() && p < -MONEY_EPS {
                    violations.push(Violation::IndividualRationality {
                        driver_id: s.driver_id,
                        profit: p,
                    });
                }
            }
            Err(e) => violations.push(Violation::Infeasible {
                driver_id: s.driver_id,
                detail: e.to_string(),
            }),
        }
    }

    for (task_id, driver_ids) in &holders {
        if driver_ids.len() > 1 {
            violations.push(Violation::DuplicateAssignment {
                task_id: *task_id,
                driver_ids: driver_ids.clone(),
            });
        }
    }

    let served: BTreeSet<TaskId> = holders.keys().copied().collect();
    let all: BTreeSet<TaskId> = inst.tasks.iter().map(|t| t.id).collect();
    let rejected: BTreeSet<TaskId> = all.difference(&served).copied().collect();
    if served != out.served_task_ids {
        violations.push(Violation::PartitionMismatch {
            detail: "served set differs from the scheduled tasks".into(),
        });
    }
    if rejected != out.rejected_task_ids {
        violations.push(Violation::PartitionMismatch {
            detail: "rejected set is not the complement of the served set".into(),
        });
    }
    if (total - out.total_profit).abs() > MONEY_EPS * (1.0 + total.abs()) {
        violations.push(Violation::TotalMismatch {
            stored: out.total_profit,
            recomputed: total,
        });
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::leg_estimate;
    use proptest::prelude::*;

    fn at(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint { lat, lon }
    }

    fn driver(id: u64, src: GeoPoint, dst: GeoPoint, start: f64, end: f64) -> Driver {
        Driver {
            id,
            source: src,
            dest: dst,
            start_time: start,
            end_time: end,
        }
    }

    fn task(id: u64, src: GeoPoint, dst: GeoPoint, start: f64, end: f64, price: f64) -> Task {
        Task {
            id,
            publish_time: start - 300.0,
            source: src,
            dest: dst,
            start_deadline: start,
            end_deadline: end,
            price,
            wtp: price,
            trip_distance_km: None,
            surge: None,
        }
    }

    #[test]
    fn empty_schedule_is_worth_zero() {
        let cm = CostModel::default();
        let d = driver(1, at(41.1, -8.6), at(41.2, -8.5), 0.0, 36_000.0);
        assert_eq!(path_profit(&d, &[], &cm, Objective::DriverProfit).unwrap(), 0.0);
    }

    // Geometry chosen so each leg cost is a round number: with fuel = 1 per
    // km and detour = 1, costs equal great-circle kilometres along a
    // meridian, where 1 degree = 111.19492664455873 km.
    #[test]
    fn one_task_profit_matches_hand_evaluation() {
        let km_per_deg = std::f64::consts::PI / 180.0 * 6371.0;
        let deg = |km: f64| km / km_per_deg;
        let cm = CostModel {
            fuel_unit_price: 1.0,
            detour_factor: 1.0,
            speed_kmh: 1000.0,
            ..CostModel::default()
        };
        // source at 0, task pickup at 2 km, drop-off at 7 km, driver home at 4 km.
        let s = at(0.0, 0.0);
        let pickup = at(deg(2.0), 0.0);
        let drop = at(deg(7.0), 0.0);
        let home = at(deg(4.0), 0.0);
        let d = driver(1, s, home, 0.0, 10_000.0);
        let t = task(7, pickup, drop, 1000.0, 5000.0, 18.0);
        // p - c_hat - (c_0m + c_m,-1) + c_0,-1 = 18 - 5 - (2 + 3) + 4
        let p = path_profit(&d, &[&t], &cm, Objective::DriverProfit).unwrap();
        assert!((p - 12.0).abs() < 1e-9, "{p}");
        let c_hat = leg_estimate(pickup, drop, &cm).unwrap().cost;
        assert!((c_hat - 5.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_sequence_names_leg() {
        let cm = CostModel::default();
        let p = at(41.15, -8.61);
        let far = at(41.30, -8.61);
        let d = driver(3, p, p, 0.0, 36_000.0);
        let t = task(9, far, far, 60.0, 600.0, 5.0);
        match path_profit(&d, &[&t], &cm, Objective::DriverProfit) {
            Err(Error::Infeasible { leg, .. }) => assert_eq!(leg, "0->9"),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    fn small_instance() -> Instance {
        let p = at(41.15, -8.61);
        let q = at(41.16, -8.60);
        let drivers = vec![driver(1, p, p, 0.0, 20_000.0), driver(2, q, q, 0.0, 20_000.0)];
        let tasks = vec![
            task(10, p, q, 1000.0, 2000.0, 10.0),
            task(11, q, p, 5000.0, 6000.0, 10.0),
        ];
        Instance::new(drivers, tasks, CostModel::default(), Objective::DriverProfit).unwrap()
    }

    #[test]
    fn vacuous_outcome_is_valid() {
        let inst = small_instance();
        let out = MarketOutcome::from_assignment(&inst, &BTreeMap::new()).unwrap();
        assert!(validate_outcome(&inst, &out, true).is_empty());
        assert_eq!(out.rejected_task_ids.len(), 2);
    }

    #[test]
    fn duplicate_assignment_reported_once() {
        let inst = small_instance();
        let mut out = MarketOutcome::from_assignment(&inst, &BTreeMap::from([(1, vec![10])])).unwrap();
        let extra = inst.schedule_profit(&inst.drivers[1], &[10]).unwrap();
        out.schedules[1].task_ids = vec![10];
        out.schedules[1].profit = extra;
        out.total_profit += extra;
        let v = validate_outcome(&inst, &out, true);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(matches!(&v[0], Violation::DuplicateAssignment { task_id: 10, .. }));
    }

    #[test]
    fn social_welfare_admission_drops_low_wtp() {
        let mut inst = small_instance();
        inst.tasks[0].wtp = 1.0;
        assert!(Instance::new(
            inst.drivers.clone(),
            inst.tasks.clone(),
            inst.cost_model,
            Objective::SocialWelfare
        )
        .is_err());
        let admitted = Instance::admit(inst.drivers, inst.tasks, inst.cost_model, Objective::SocialWelfare).unwrap();
        assert_eq!(admitted.tasks.len(), 1);
    }

    // Random feasible chains along a small area of Porto.
    fn chain() -> impl Strategy<Value = (Driver, Vec<Task>)> {
        let pt = || (41.10..41.20f64, -8.68..-8.56f64).prop_map(|(a, b)| at(a, b));
        (pt(), pt(), prop::collection::vec((pt(), pt(), 0.0..600.0f64, 1.0..30.0f64, 1.0..1.5f64), 1..7)).prop_map(
            |(src, dst, raw)| {
                let cm = CostModel::default();
                let mut t = 0.0;
                let mut loc = src;
                let mut tasks = Vec::new();
                for (i, (a, b, slack, price, markup)) in raw.into_iter().enumerate() {
                    let arrive = t + leg_unchecked(loc, a, &cm).time_s;
                    let start = arrive + slack;
                    let len = leg_unchecked(a, b, &cm).time_s;
                    let end = start + len + slack + 1.0;
                    let mut tk = task(i as u64 + 1, a, b, start, end, price);
                    tk.wtp = price * markup;
                    tasks.push(tk);
                    t = arrive + len;
                    loc = b;
                }
                let end = t + leg_unchecked(loc, dst, &cm).time_s + 10.0;
                (driver(1, src, dst, 0.0, end), tasks)
            },
        )
    }

    proptest! {
        #[test]
        fn dropping_a_task_keeps_feasibility((d, tasks) in chain(), k in 0usize..8) {
            let cm = CostModel::default();
            let refs: Vec<&Task> = tasks.iter().collect();
            prop_assert!(check_sequence(&d, &refs, &cm).is_ok());
            let k = k % refs.len();
            let mut fewer = refs.clone();
            fewer.remove(k);
            prop_assert!(check_sequence(&d, &fewer, &cm).is_ok());
        }

        #[test]
        fn welfare_dominates_profit((d, tasks) in chain()) {
            let cm = CostModel::default();
            let refs: Vec<&Task> = tasks.iter().collect();
            let p = path_profit(&d, &refs, &cm, Objective::DriverProfit).unwrap();
            let w = path_profit(&d, &refs, &cm, Objective::SocialWelfare).unwrap();
            prop_assert!(p <= w + 1e-9);
            let flat: Vec<Task> = tasks.iter().cloned().map(|mut t| { t.wtp = t.price; t }).collect();
            let refs: Vec<&Task> = flat.iter().collect();
            let p = path_profit(&d, &refs, &cm, Objective::DriverProfit).unwrap();
            let w = path_profit(&d, &refs, &cm, Objective::SocialWelfare).unwrap();
            prop_assert_eq!(p, w);
        }
    }
}
