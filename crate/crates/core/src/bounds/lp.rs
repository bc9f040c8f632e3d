//! Upper bound on the optimal total profit from the path-formulation LP.
//!
//! The master problem has one variable per (driver, path) and packs at most
//! one unit of path per driver and at most one unit of coverage per task.
//! Columns are generated lazily: with row duals `mu` (drivers) and
//! `lambda` (tasks), the most attractive column for a driver is the
//! maximum-profit path in that driver's task map with every node value
//! reduced by its `lambda`, which the task-map dynamic program solves
//! exactly. Generation stops once no driver prices out above the
//! tolerance, and that last pricing round is kept as a certificate.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simplex::{PivotRule, RevisedSimplex, SparseColumn};
use crate::error::{Error, Result};
use crate::greedy::{build_maps, greedy_assign};
use crate::market::{DriverId, Instance, TaskId};
use crate::taskmap::TaskMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// A column enters only if its reduced cost exceeds this.
    pub tolerance: f64,
    pub max_rounds: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions { tolerance: 1e-7, max_rounds: 5_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathColumn {
    pub driver_id: DriverId,
    pub task_ids: Vec<TaskId>,
    pub profit: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub objective: f64,
    /// Columns with positive weight in the final master solution.
    pub columns: Vec<PathColumn>,
    pub driver_duals: BTreeMap<DriverId, f64>,
    pub task_duals: BTreeMap<TaskId, f64>,
    pub rounds: usize,
    pub columns_generated: usize,
    pub pivots: usize,
    /// Largest reduced cost found by the final pricing round.
    pub max_reduced_cost: f64,
}

impl LpSolution {
    /// Largest reduced cost of any path under this solution's duals,
    /// recomputed from scratch.
    pub fn certificate(&self, inst: &Instance) -> f64 {
        let maps = build_maps(inst);
        let penalty = task_penalties(&maps, &self.task_duals);
        pricing(&maps, &penalty, |id| self.driver_duals.get(&id).copied().unwrap_or(0.0))
            .into_iter()
            .map(|(rc, _)| rc)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn task_penalties(maps: &[TaskMap], duals: &BTreeMap<TaskId, f64>) -> Vec<f64> {
    let Some(first) = maps.first() else { return Vec::new() };
    first.graph().tasks().iter().map(|t| duals.get(&t.id).copied().unwrap_or(0.0)).collect()
}

// Reduced cost and path positions of each driver's best column.
fn pricing(maps: &[TaskMap], penalty: &[f64], mu: impl Fn(DriverId) -> f64 + Sync) -> Vec<(f64, Vec<usize>)> {
    maps.par_iter()
        .map(|m| {
            let p = m.best_path_with(None, Some(penalty));
            (p.profit - mu(m.driver().id), p.positions)
        })
        .collect()
}

// Weight of the stability center when smoothing the pricing duals.
const SMOOTHING: f64 = 0.7;
const COLUMNS_PER_DRIVER: usize = 3;
const SUBGRADIENT_ITERATIONS: usize = 600;
const SUBGRADIENT_PATIENCE: usize = 5;
// Subgradient paths kept for the first master: at most this many per
// driver, each within `POOL_SLACK` of the best reduced cost at the final
// multipliers.
const POOL_PER_DRIVER: usize = 20;
const POOL_SLACK: f64 = 5.0;

// Up to `k` task-disjoint paths per driver: the best one, then the best
// avoiding every task already returned for that driver.
fn pricing_many(maps: &[TaskMap], penalty: &[f64], k: usize) -> Vec<Vec<(f64, Vec<usize>)>> {
    maps.par_iter()
        .map(|m| {
            let mut removed = vec![false; penalty.len()];
            let mut out = Vec::with_capacity(k);
            for _ in 0..k {
                let p = m.best_path_with(Some(&removed), Some(penalty));
                let done = p.positions.is_empty();
                for &pos in &p.positions {
                    removed[pos] = true;
                }
                out.push((p.profit, p.positions));
                if done {
                    break;
                }
            }
            out
        })
        .collect()
}

struct Subgradient {
    // Best Lagrangian bound and the task multipliers attaining it.
    bound: f64,
    lambda: Vec<f64>,
    // Every best-response path seen, as (driver index, positions).
    paths: Vec<(usize, Vec<usize>)>,
}

// Projected subgradient descent on the Lagrangian dual with Polyak steps
// aimed at `lower`, halving the step scale whenever a few iterations pass
// without a new best bound.
fn subgradient(maps: &[TaskMap], lower: f64, iterations: usize) -> Subgradient {
    let m = maps[0].graph().len();
    let mut lambda = vec![0.0; m];
    let mut best = Subgradient { bound: f64::INFINITY, lambda: lambda.clone(), paths: Vec::new() };
    let mut scale = 2.0;
    let mut since = 0;
    for _ in 0..iterations {
        let priced = pricing(maps, &lambda, |_| 0.0);
        let value = priced.iter().map(|(p, _)| p).sum::<f64>() + lambda.iter().sum::<f64>();
        if value < best.bound {
            best.bound = value;
            best.lambda.clone_from(&lambda);
            since = 0;
        } else {
            since += 1;
            if since >= SUBGRADIENT_PATIENCE {
                scale /= 2.0;
                since = 0;
            }
        }
        let mut g = vec![1.0; m];
        for (i, (_, positions)) in priced.into_iter().enumerate() {
            for &k in &positions {
                g[k] -= 1.0;
            }
            if !positions.is_empty() {
                best.paths.push((i, positions));
            }
        }
        for (gk, l) in g.iter_mut().zip(&lambda) {
            if *l <= 0.0 && *gk > 0.0 {
                *gk = 0.0;
            }
        }
        let norm: f64 = g.iter().map(|x| x * x).sum();
        if norm == 0.0 || scale < 1e-4 {
            break;
        }
        let step = scale * (value - lower).max(0.0) / norm;
        for (l, gk) in lambda.iter_mut().zip(&g) {
            *l = (*l - step * gk).max(0.0);
        }
    }
    best.paths.sort();
    best.paths.dedup();
    best
}

/// Solves the LP relaxation of the assignment problem by column generation.
///
/// Subgradient steps on the Lagrangian dual first give task prices close
/// to optimal; the master starts from the greedy schedules plus the best
/// paths met along the way. Later pricing rounds use master duals smoothed
/// towards the best Lagrangian point seen so far, falling back to the plain
/// master duals when that yields no improving column. Generation stops when
/// a plain-dual round finds nothing above the tolerance, and that round is
/// kept as the certificate.
pub fn lp_bound(inst: &Instance, opts: LpOptions) -> Result<LpSolution> {
    let maps = build_maps(inst);
    let n = maps.len();
    let m = inst.tasks.len();
    let mut lp = RevisedSimplex::new(vec![1.0; n + m], PivotRule::Devex)?;
    let mut columns: Vec<(usize, Vec<usize>, f64)> = Vec::new();
    let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();

    let mut add = |lp: &mut RevisedSimplex, columns: &mut Vec<(usize, Vec<usize>, f64)>, i: usize, positions: Vec<usize>| -> Result<bool> {
        if positions.is_empty() || !seen.insert((i, positions.clone())) {
            return Ok(false);
        }
        let profit = maps[i]
            .path_value(&positions)
            .ok_or_else(|| Error::Invariant("priced path is not a path of its map".into()))?;
        let col = SparseColumn::new(std::iter::once((i, 1.0)).chain(positions.iter().map(|&k| (n + k, 1.0))));
        lp.add_column(profit, col)?;
        columns.push((i, positions, profit));
        Ok(true)
    };

    let mut center: Option<(f64, Vec<f64>)> = None;
    if n > 0 && m > 0 {
        let (greedy, _) = greedy_assign(inst)?;
        let graph = maps[0].graph();
        for s in &greedy.schedules {
            let Some(i) = maps.iter().position(|mp| mp.driver().id == s.driver_id) else { continue };
            let positions: Option<Vec<usize>> = s.task_ids.iter().map(|&t| graph.position(t)).collect();
            if let Some(p) = positions {
                add(&mut lp, &mut columns, i, p)?;
            }
        }
        let sg = subgradient(&maps, greedy.total_profit, SUBGRADIENT_ITERATIONS);
        let best = pricing(&maps, &sg.lambda, |_| 0.0);
        let mut pool: Vec<(usize, f64, Vec<usize>)> = sg
            .paths
            .into_iter()
            .filter_map(|(i, positions)| {
                let value = maps[i].path_value(&positions)?;
                let rc = value - positions.iter().map(|&k| sg.lambda[k]).sum::<f64>() - best[i].0;
                (rc >= -POOL_SLACK).then_some((i, rc, positions))
            })
            .collect();
        pool.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)).then_with(|| a.2.cmp(&b.2)));
        let mut kept = vec![0usize; n];
        for (i, _, positions) in pool {
            if kept[i] < POOL_PER_DRIVER && add(&mut lp, &mut columns, i, positions)? {
                kept[i] += 1;
            }
        }
        center = Some((sg.bound, sg.lambda));
    }

    let mut rounds = 0;
    loop {
        if rounds >= opts.max_rounds {
            lp.solve()?;
            return Err(Error::NonConvergence { rounds, bound: lp.objective() });
        }
        rounds += 1;
        lp.solve()?;
        let y = lp.duals().to_vec();
        let mut smooth = center.is_some();
        let (added, max_rc) = loop {
            let point: Vec<f64> = match (&center, smooth) {
                (Some((_, c)), true) => c.iter().zip(&y[n..]).map(|(a, b)| SMOOTHING * a + (1.0 - SMOOTHING) * b).collect(),
                _ => y[n..].to_vec(),
            };
            let priced = pricing_many(&maps, &point, COLUMNS_PER_DRIVER);
            let lagrangian = priced.iter().map(|p| p[0].0).sum::<f64>() + point.iter().sum::<f64>();
            if center.as_ref().is_none_or(|(best, _)| lagrangian < *best) {
                center = Some((lagrangian, point.clone()));
            }
            let mut max_rc = f64::NEG_INFINITY;
            let mut added = 0;
            for (i, (_, positions)) in priced.into_iter().enumerate().flat_map(|(i, ps)| ps.into_iter().map(move |p| (i, p))) {
                let value = if positions.is_empty() {
                    0.0
                } else {
                    maps[i].path_value(&positions).unwrap_or(f64::NEG_INFINITY)
                };
                let rc = value - y[i] - positions.iter().map(|&k| y[n + k]).sum::<f64>();
                max_rc = max_rc.max(rc);
                if rc > opts.tolerance && add(&mut lp, &mut columns, i, positions)? {
                    added += 1;
                }
            }
            if added > 0 || !smooth {
                break (added, max_rc);
            }
            smooth = false;
        };
        if added == 0 {
            let x = lp.primal_values();
            let graph_tasks = maps.first().map(|mp| mp.graph().tasks()).unwrap_or(&[]);
            let y = lp.duals();
            return Ok(LpSolution {
                objective: lp.objective(),
                columns: columns
                    .iter()
                    .zip(&x)
                    .filter(|(_, w)| **w > 1e-12)
                    .map(|((i, pos, profit), w)| PathColumn {
                        driver_id: maps[*i].driver().id,
                        task_ids: pos.iter().map(|&k| graph_tasks[k].id).collect(),
                        profit: *profit,
                        weight: *w,
                    })
                    .collect(),
                driver_duals: maps.iter().zip(y).map(|(mp, v)| (mp.driver().id, *v)).collect(),
                task_duals: graph_tasks.iter().zip(&y[n..]).map(|(t, v)| (t.id, *v)).collect(),
                rounds,
                columns_generated: columns.len(),
                pivots: lp.pivots(),
                max_reduced_cost: if n == 0 { 0.0 } else { max_rc },
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::arc_lp::arc_lp_bound;
    use crate::greedy::make_tightness_instance;
    use crate::synth::{small_market, SmallMarket};

    #[test]
    fn empty_market_has_zero_bound() {
        let inst = small_market(&SmallMarket { n_drivers: 2, n_tasks: 0, ..SmallMarket::default() }, 1);
        let sol = lp_bound(&inst, LpOptions::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.columns.is_empty());
    }

    #[test]
    fn tightness_gadget_bound_equals_optimum() {
        for (d, eps) in [(1, 0.5), (2, 0.1), (4, 0.05)] {
            let inst = make_tightness_instance(d, eps).unwrap();
            let sol = lp_bound(&inst, LpOptions::default()).unwrap();
            let opt = (d as f64 + 1.0) * (1.0 - eps);
            assert!((sol.objective - opt).abs() < 1e-9, "D={d}: {}", sol.objective);
        }
    }

    #[test]
    fn matches_arc_formulation_and_certifies() {
        for seed in 0..25 {
            let cfg = SmallMarket { n_drivers: 3, n_tasks: 7, ..SmallMarket::default() };
            let inst = small_market(&cfg, seed);
            let sol = lp_bound(&inst, LpOptions::default()).unwrap();
            let arc = arc_lp_bound(&inst).unwrap();
            assert!((sol.objective - arc).abs() < 1e-6, "seed {seed}: {} vs {arc}", sol.objective);
            let (greedy, _) = greedy_assign(&inst).unwrap();
            assert!(greedy.total_profit <= sol.objective + 1e-9);
            assert!(sol.certificate(&inst) <= 1e-7);
            assert!(sol.max_reduced_cost <= 1e-7);
            // Complementary slackness on the columns in the basis.
            for c in &sol.columns {
                let lam: f64 = c.task_ids.iter().map(|t| sol.task_duals[t]).sum();
                assert!((c.profit - sol.driver_duals[&c.driver_id] - lam).abs() < 1e-6);
            }
            let weight: f64 = sol.columns.iter().map(|c| c.profit * c.weight).sum();
            assert!((weight - sol.objective).abs() < 1e-9);
        }
    }
}
