//! The same LP relaxation written over arcs instead of paths.
//!
//! One flow variable per (driver, arc), unit supply at each driver's source,
//! conservation at every task node and unit capacity per task across all
//! drivers. Flows on a DAG decompose into paths, so the optimum equals the
//! path formulation; the dense model is only practical for small markets
//! and serves as an independent check on column generation.

use std::collections::HashMap;

use super::simplex::simplex_solve;
use crate::error::Result;
use crate::greedy::build_maps;
use crate::market::{Instance, TaskId};
use crate::taskmap::Node;

pub fn arc_lp_bound(inst: &Instance) -> Result<f64> {
    let maps = build_maps(inst);
    let task_row: HashMap<TaskId, usize> = inst.tasks.iter().enumerate().map(|(k, t)| (t.id, k)).collect();
    let m = inst.tasks.len();
    let n = maps.len();
    // Rows: driver supply, then (driver, task) in-out and out-in, then task
    // coverage.
    let rows = n + 2 * n * m + m;
    let mut cols: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    for (i, map) in maps.iter().enumerate() {
        let flow_row = |id: TaskId| n + 2 * (i * m + task_row[&id]);
        for (a, b) in map.arcs() {
            let cost = map.arc_cost(a, b).expect("listed arc has a cost");
            let mut entries = Vec::new();
            let mut weight = -cost;
            match a {
                Node::Source => {
                    weight += map.baseline_cost();
                    entries.push((i, 1.0));
                }
                Node::Task(u) => {
                    entries.push((flow_row(u), -1.0));
                    entries.push((flow_row(u) + 1, 1.0));
                }
                Node::Sink => unreachable!("no arc leaves the destination"),
            }
            if let Node::Task(v) = b {
                weight += map.node_value_of(v).expect("task of the map");
                entries.push((flow_row(v), 1.0));
                entries.push((flow_row(v) + 1, -1.0));
                entries.push((n + 2 * n * m + task_row[&v], 1.0));
            }
            cols.push((weight, entries));
        }
    }
    let mut a = vec![vec![0.0; cols.len()]; rows];
    for (j, (_, entries)) in cols.iter().enumerate() {
        for &(r, v) in entries {
            a[r][j] += v;
        }
    }
    let mut b = vec![0.0; rows];
    b[..n].fill(1.0);
    b[n + 2 * n * m..].fill(1.0);
    let c: Vec<f64> = cols.iter().map(|(w, _)| *w).collect();
    Ok(simplex_solve(&a, &b, &c)?.objective)
}
