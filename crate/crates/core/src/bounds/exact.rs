//! Exact optimum for small markets by depth-first branch and bound.
//!
//! Drivers are branched in id order; at each level every path of the
//! current driver that avoids the tasks already taken is tried, best first,
//! followed by the empty path. The bound at a node is the profit so far
//! plus each remaining driver's best path on the remaining tasks, ignoring
//! conflicts between them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::build_maps;
use crate::market::{DriverId, Instance, MarketOutcome, TaskId};
use crate::taskmap::{PathGraph, TaskMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    pub node_budget: u64,
    /// Without pruning every assignment is enumerated.
    pub prune: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { node_budget: 5_000_000, prune: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactSolution {
    pub objective: f64,
    pub outcome: MarketOutcome,
    pub nodes: u64,
}

// All complete paths of `map` avoiding `removed`, as (profit, positions).
fn enumerate_paths(map: &TaskMap, removed: &[bool]) -> Vec<(f64, Vec<usize>)> {
    fn extend(map: &TaskMap, removed: &[bool], path: &mut Vec<usize>, value: f64, out: &mut Vec<(f64, Vec<usize>)>) {
        let last = *path.last().expect("nonempty path");
        if let Some(c) = map.sink_cost(last) {
            out.push((value - c + map.baseline(), path.clone()));
        }
        let mut next = Vec::new();
        map.for_each_successor(last, |j, c| {
            if !removed[j] {
                next.push((j, c));
            }
        });
        for (j, c) in next {
            path.push(j);
            extend(map, removed, path, value - c + map.node_value(j), out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for i in map.scan_range() {
        if removed[i] {
            continue;
        }
        if let Some(c) = map.source_cost(i) {
            let mut path = vec![i];
            extend(map, removed, &mut path, -c + map.node_value(i), &mut out);
        }
    }
    out
}

struct Search<'a> {
    maps: &'a [TaskMap],
    opts: ExactOptions,
    removed: Vec<bool>,
    choice: Vec<Vec<usize>>,
    best: f64,
    best_choice: Vec<Vec<usize>>,
    nodes: u64,
}

impl Search<'_> {
    fn run(&mut self, k: usize, current: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.opts.node_budget {
            return Err(Error::BudgetExceeded {
                budget: self.opts.node_budget,
                nodes: self.nodes,
                incumbent: self.best,
            });
        }
        if k == self.maps.len() {
            if current > self.best {
                self.best = current;
                self.best_choice = self.choice.clone();
            }
            return Ok(());
        }
        if self.opts.prune {
            let optimistic: f64 = self.maps[k..]
                .iter()
                .map(|m| m.best_path_with(Some(&self.removed), None).profit)
                .sum();
            if current + optimistic <= self.best {
                return Ok(());
            }
        }
        let mut paths = enumerate_paths(&self.maps[k], &self.removed);
        if self.opts.prune {
            // A path worth at most nothing never beats leaving the driver idle.
            paths.retain(|(v, _)| *v > 0.0);
        }
        paths.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        for (v, path) in paths {
            for &p in &path {
                self.removed[p] = true;
            }
            self.choice[k] = path;
            let res = self.run(k + 1, current + v);
            for &p in &self.choice[k] {
                self.removed[p] = false;
            }
            self.choice[k].clear();
            res?;
        }
        self.run(k + 1, current)
    }
}

/// Maximum total profit over all feasible assignments.
///
/// Fails with [`Error::BudgetExceeded`] once more than `node_budget` search
/// nodes have been visited; the error carries the best value found so far.
pub fn brute_force_opt(inst: &Instance, opts: ExactOptions) -> Result<ExactSolution> {
    let maps = build_maps(inst);
    let mut search = Search {
        maps: &maps,
        opts,
        removed: vec![false; inst.tasks.len()],
        choice: vec![Vec::new(); maps.len()],
        best: 0.0,
        best_choice: vec![Vec::new(); maps.len()],
        nodes: 0,
    };
    search.run(0, 0.0)?;
    let tasks = maps.first().map(|m| m.graph().tasks()).unwrap_or(&[]);
    let assignment: BTreeMap<DriverId, Vec<TaskId>> = maps
        .iter()
        .zip(&search.best_choice)
        .filter(|(_, c)| !c.is_empty())
        .map(|(m, c)| (m.driver().id, c.iter().map(|&p| tasks[p].id).collect()))
        .collect();
    let outcome = MarketOutcome::from_assignment(inst, &assignment)?;
    Ok(ExactSolution { objective: search.best, outcome, nodes: search.nodes })
}
