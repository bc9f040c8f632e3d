//! Offline greedy assignment.
//!
//! Repeatedly commit the single most profitable driver path in the market,
//! then delete that driver and the tasks on the path, until no remaining
//! driver has a path with strictly positive profit. Each committed path can
//! block at most `D + 1` optimal paths (its `D` task nodes plus its driver),
//! which gives the `1/(D+1)` approximation guarantee; [`make_tightness_instance`]
//! builds a market where that ratio is attained.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{CostModel, GeoPoint};
use crate::market::{Driver, DriverId, Instance, MarketOutcome, Objective, Task, TaskId};
use crate::taskmap::{BestPath, TaskGraph, TaskMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub driver_id: DriverId,
    pub task_ids: Vec<TaskId>,
    pub profit: f64,
    /// Unassigned tasks left after this step.
    pub remaining_tasks: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub iterations: Vec<GreedyStep>,
    /// Largest number of tasks on any path of any driver's map (`D`).
    pub max_path_tasks: usize,
}

impl GreedyTrace {
    pub fn total_profit(&self) -> f64 {
        self.iterations.iter().map(|s| s.profit).sum()
    }
}

/// Builds every driver's task map over one shared task graph.
pub fn build_maps(inst: &Instance) -> Vec<TaskMap> {
    let graph = Arc::new(TaskGraph::new(&inst.tasks, &inst.cost_model));
    inst.drivers
        .par_iter()
        .map(|d| TaskMap::for_instance(graph.clone(), inst, d))
        .collect()
}

pub fn greedy_assign(inst: &Instance) -> Result<(MarketOutcome, GreedyTrace)> {
    let maps = build_maps(inst);
    let n_tasks = inst.tasks.len();
    let mut removed = vec![false; n_tasks];
    let mut active = vec![true; maps.len()];
    let mut best: Vec<BestPath> = maps.par_iter().map(|m| m.best_path_with(Some(&removed), None)).collect();
    let mut trace = GreedyTrace {
        iterations: Vec::new(),
        max_path_tasks: maps.par_iter().map(TaskMap::max_tasks_on_path).max().unwrap_or(0),
    };
    let mut assignment: BTreeMap<DriverId, Vec<TaskId>> = BTreeMap::new();
    let mut remaining = n_tasks;

    loop {
        // Highest profit; equal profits go to the lower driver id.
        let pick = (0..maps.len()).filter(|&i| active[i]).max_by(|&a, &b| {
            best[a]
                .profit
                .total_cmp(&best[b].profit)
                .then(maps[b].driver().id.cmp(&maps[a].driver().id))
        });
        let Some(i) = pick else { break };
        if best[i].profit <= 0.0 {
            break;
        }
        let chosen = std::mem::replace(&mut best[i], BestPath::empty());
        active[i] = false;
        for &p in &chosen.positions {
            removed[p] = true;
        }
        remaining -= chosen.positions.len();
        let driver_id = maps[i].driver().id;
        trace.iterations.push(GreedyStep {
            driver_id,
            task_ids: chosen.task_ids.clone(),
            profit: chosen.profit,
            remaining_tasks: remaining,
        });
        assignment.insert(driver_id, chosen.task_ids);

        // A cached path that avoids every removed node is still optimal on
        // the smaller graph; only re-price the others.
        let stale: Vec<usize> = (0..maps.len())
            .filter(|&j| active[j] && best[j].positions.iter().any(|&p| removed[p]))
            .collect();
        let fresh: Vec<BestPath> = stale
            .par_iter()
            .map(|&j| maps[j].best_path_with(Some(&removed), None))
            .collect();
        for (j, path) in stale.into_iter().zip(fresh) {
            best[j] = path;
        }
    }

    let outcome = MarketOutcome::from_assignment(inst, &assignment)?;
    Ok((outcome, trace))
}

const GADGET_SPOT: GeoPoint = GeoPoint { lat: 41.15, lon: -8.61 };

/// Market on which the greedy collects exactly 1 while the optimum is
/// `(D+1)(1-eps)`.
///
/// Everything sits at one spot, so every leg is free. Driver 1 can chain
/// tasks `1..=D` (worth `1/D` each to that driver) or take task `D+1`, whose window
/// overlaps the whole chain; driver `k+1` can only fit task `k`. All other
/// task values are `1 - eps`. The greedy grabs driver 1's chain first and
/// strands everyone else.
pub fn make_tightness_instance(d: usize, eps: f64) -> Result<Instance> {
    if d == 0 || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("need D >= 1 and 0 < eps < 1, got D={d}, eps={eps}")));
    }
    let big_d = d as f64;
    let task = |id: u64, start: f64, end: f64| Task {
        id,
        publish_time: start - 5.0,
        source: GADGET_SPOT,
        dest: GADGET_SPOT,
        start_deadline: start,
        end_deadline: end,
        price: 1.0 - eps,
        wtp: 1.0 - eps,
        trip_distance_km: None,
        surge: None,
    };
    let driver = |id: u64, start: f64, end: f64| Driver {
        id,
        source: GADGET_SPOT,
        dest: GADGET_SPOT,
        start_time: start,
        end_time: end,
    };
    let mut tasks: Vec<Task> = (1..=d as u64).map(|k| task(k, 100.0 * k as f64, 100.0 * k as f64 + 50.0)).collect();
    tasks.push(task(d as u64 + 1, 95.0, 100.0 * big_d + 200.0));
    let mut drivers = vec![driver(1, 0.0, 100.0 * big_d + 300.0)];
    drivers.extend((1..=d as u64).map(|k| driver(k + 1, 100.0 * k as f64 - 20.0, 100.0 * k as f64 + 70.0)));
    let mut inst = Instance::new(drivers, tasks, CostModel::default(), Objective::DriverProfit)?;
    for k in 1..=d as u64 {
        inst.value_overrides.insert((1, k), 1.0 / big_d);
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::validate_outcome;
    use crate::synth::{small_market, SmallMarket};

    // Reference greedy that re-prices every driver at every step.
    fn naive_greedy(inst: &Instance) -> Vec<(DriverId, Vec<TaskId>)> {
        let maps = build_maps(inst);
        let mut removed = vec![false; inst.tasks.len()];
        let mut active = vec![true; maps.len()];
        let mut out = Vec::new();
        loop {
            let mut pick: Option<(usize, BestPath)> = None;
            for i in (0..maps.len()).filter(|&i| active[i]) {
                let p = maps[i].best_path_with(Some(&removed), None);
                let better = match &pick {
                    None => true,
                    Some((j, q)) => p.profit > q.profit || (p.profit == q.profit && maps[i].driver().id < maps[*j].driver().id),
                };
                if better {
                    pick = Some((i, p));
                }
            }
            match pick {
                Some((i, p)) if p.profit > 0.0 => {
                    active[i] = false;
                    p.positions.iter().for_each(|&k| removed[k] = true);
                    out.push((maps[i].driver().id, p.task_ids));
                }
                _ => return out,
            }
        }
    }

    #[test]
    fn single_profitable_task_is_taken() {
        let p = GeoPoint { lat: 41.15, lon: -8.61 };
        let q = GeoPoint { lat: 41.16, lon: -8.60 };
        let d = Driver { id: 4, source: p, dest: p, start_time: 0.0, end_time: 10_000.0 };
        let t = Task {
            id: 11,
            publish_time: 100.0,
            source: p,
            dest: q,
            start_deadline: 1000.0,
            end_deadline: 2000.0,
            price: 12.0,
            wtp: 12.0,
            trip_distance_km: None,
            surge: None,
        };
        let inst = Instance::new(vec![d.clone()], vec![t.clone()], CostModel::default(), Objective::DriverProfit).unwrap();
        let (out, trace) = greedy_assign(&inst).unwrap();
        assert_eq!(out.schedules[0].task_ids, vec![11]);
        let expect = crate::market::path_profit(&d, &[&t], &inst.cost_model, Objective::DriverProfit).unwrap();
        assert!((out.total_profit - expect).abs() < 1e-9);
        assert_eq!(trace.iterations.len(), 1);
    }

    #[test]
    fn tightness_gadget_greedy_collects_one() {
        for (d, eps) in [(1, 0.5), (2, 0.1), (3, 0.1), (5, 0.05)] {
            let inst = make_tightness_instance(d, eps).unwrap();
            assert_eq!(inst.drivers.len(), d + 1);
            assert_eq!(inst.tasks.len(), d + 1);
            let (out, trace) = greedy_assign(&inst).unwrap();
            assert!((out.total_profit - 1.0).abs() < 1e-9, "D={d}: {}", out.total_profit);
            assert_eq!(trace.iterations.len(), 1);
            assert_eq!(trace.iterations[0].driver_id, 1);
            assert_eq!(trace.max_path_tasks, d);
            assert!(validate_outcome(&inst, &out, true).is_empty());
        }
        assert!(make_tightness_instance(0, 0.1).is_err());
        assert!(make_tightness_instance(2, 1.0).is_err());
    }

    #[test]
    fn random_markets_feasible_monotone_and_match_reference() {
        for seed in 0..60 {
            let cfg = SmallMarket { n_drivers: 4, n_tasks: 12, ..SmallMarket::default() };
            let inst = small_market(&cfg, seed);
            let (out, trace) = greedy_assign(&inst).unwrap();
            assert!(validate_outcome(&inst, &out, true).is_empty(), "seed {seed}");
            for w in trace.iterations.windows(2) {
                assert!(w[0].profit >= w[1].profit);
            }
            assert!(trace.iterations.iter().all(|s| s.profit > 0.0));
            assert!((trace.total_profit() - out.total_profit).abs() < 1e-9);
            let reference = naive_greedy(&inst);
            let ours: Vec<_> = trace.iterations.iter().map(|s| (s.driver_id, s.task_ids.clone())).collect();
            assert_eq!(ours, reference, "seed {seed}");
        }
    }

    #[test]
    fn same_trace_for_any_thread_count() {
        let inst = small_market(&SmallMarket { n_drivers: 8, n_tasks: 40, ..SmallMarket::default() }, 7);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| greedy_assign(&inst).unwrap().1)
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(3));
    }
}
