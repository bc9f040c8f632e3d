//! Per-driver task maps and maximum-profit paths through them.
//!
//! A driver's task map is a DAG whose nodes are the driver's source (`0`),
//! destination (`-1`) and every task that fits into the shift. An arc
//! `m -> m'` means the driver can finish `m` and still reach the pickup of `m'` by
//! its start deadline. Because arcs strictly increase start deadlines, sorting
//! tasks by `(start_deadline, id)` is a topological order, and the best path
//! falls out of a single forward dynamic program.
//!
//! The task-to-task part of the graph does not depend on the driver (there is
//! a single cost model), so it is built once per market as a [`TaskGraph`] and
//! shared by every driver's [`TaskMap`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::estimation::{leg_unchecked, CostModel, Leg};
use crate::market::{Driver, Instance, Objective, Task, TaskId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Source,
    Task(TaskId),
    Sink,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Source => f.write_str("0"),
            Node::Task(id) => write!(f, "t{id}"),
            Node::Sink => f.write_str("-1"),
        }
    }
}

/// The driver can complete the trip itself inside its time window.
pub fn can_serve(_driver: &Driver, task: &Task, cm: &CostModel) -> bool {
    task.in_task_leg(cm).time_s <= task.window_s()
}

fn reaches_home(driver: &Driver, task: &Task, cm: &CostModel) -> bool {
    leg_unchecked(task.dest, driver.dest, cm).time_s <= driver.end_time - task.end_deadline
}

/// Arc `0 -> m`: the driver can reach the pickup by its start deadline and get
/// home after the drop-off deadline. All comparisons are non-strict.
pub fn source_arc(driver: &Driver, task: &Task, cm: &CostModel) -> bool {
    can_serve(driver, task, cm)
        && leg_unchecked(driver.source, task.source, cm).time_s <= task.start_deadline - driver.start_time
        && reaches_home(driver, task, cm)
}

/// Arc `m -> m2`: both tasks servable, the driver gets home after `m2`, and
/// the empty leg between them fits between the two deadlines.
pub fn pair_arc(driver: &Driver, m: &Task, m2: &Task, cm: &CostModel) -> bool {
    m.id != m2.id
        && can_serve(driver, m, cm)
        && can_serve(driver, m2, cm)
        && reaches_home(driver, m2, cm)
        && leg_unchecked(m.dest, m2.source, cm).time_s <= m2.start_deadline - m.end_deadline
}

/// Read-only view of a task map, indexed by topological position.
///
/// Implemented by [`TaskMap`] and by [`ExplicitMap`] (hand-built fixtures).
pub trait PathGraph {
    fn node_count(&self) -> usize;
    fn task_id(&self, i: usize) -> TaskId;
    /// Task value net of the in-task cost.
    fn node_value(&self, i: usize) -> f64;
    fn source_cost(&self, i: usize) -> Option<f64>;
    fn sink_cost(&self, i: usize) -> Option<f64>;
    /// Cost of driving straight from source to destination.
    fn baseline(&self) -> f64;
    /// Calls `f(j, cost)` for every arc `i -> j`; always `j > i`.
    fn for_each_successor<F: FnMut(usize, f64)>(&self, i: usize, f: F);
    /// Positions that can possibly lie on a path.
    fn scan_range(&self) -> Range<usize> {
        0..self.node_count()
    }
}

/// Task nodes of a path, in order, with its profit.
#[derive(Debug, Clone, PartialEq)]
pub struct BestPath {
    pub positions: Vec<usize>,
    pub task_ids: Vec<TaskId>,
    /// Path value after subtracting node penalties.
    pub profit: f64,
}

impl BestPath {
    pub fn empty() -> Self {
        BestPath {
            positions: Vec::new(),
            task_ids: Vec::new(),
            profit: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

const NO_PRED: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Label {
    value: f64,
    count: u32,
    pred: u32,
}

fn sequence(labels: &[Option<Label>], mut at: u32) -> Vec<usize> {
    let mut seq = Vec::new();
    while at != NO_PRED {
        seq.push(at as usize);
        at = labels[at as usize].expect("labelled predecessor").pred;
    }
    seq.reverse();
    seq
}

fn lex_cmp<G: PathGraph>(g: &G, a: &[usize], b: &[usize]) -> Ordering {
    a.iter().map(|&i| g.task_id(i)).cmp(b.iter().map(|&i| g.task_id(i)))
}

// Is the path (value, count, ending at `a_end`) strictly preferred to the
// path ending at `b_end`? Higher value, then fewer tasks, then the
// lexicographically smaller id sequence.
fn prefer<G: PathGraph>(
    g: &G,
    labels: &[Option<Label>],
    (av, ac, a_end): (f64, u32, u32),
    (bv, bc, b_end): (f64, u32, u32),
) -> bool {
    if av != bv {
        return av > bv;
    }
    if ac != bc {
        return ac < bc;
    }
    lex_cmp(g, &sequence(labels, a_end), &sequence(labels, b_end)) == Ordering::Less
}

/// Maximum-profit source-to-destination path by one pass over the
/// topological order.
///
/// `removed[i]` hides node `i`; `penalty[i]` is subtracted from its value.
/// The empty path (profit exactly 0) is always a candidate, so with zero
/// penalties the result is never negative.
pub fn best_path_in<G: PathGraph>(g: &G, removed: Option<&[bool]>, penalty: Option<&[f64]>) -> BestPath {
    let n = g.node_count();
    let hidden = |i: usize| removed.is_some_and(|r| r[i]);
    let pen = |i: usize| penalty.map_or(0.0, |p| p[i]);
    let mut labels: Vec<Option<Label>> = vec![None; n];
    // (value, count, end) of the best complete path; end == NO_PRED is empty.
    let mut best = (0.0f64, 0u32, NO_PRED);

    for i in g.scan_range() {
        if hidden(i) {
            continue;
        }
        if let Some(c) = g.source_cost(i) {
            let v = -c + g.node_value(i) - pen(i);
            // The direct start is the only one-task path ending here.
            let replace = labels[i].is_none_or(|l| v > l.value || (v == l.value && l.count > 1));
            if replace {
                labels[i] = Some(Label { value: v, count: 1, pred: NO_PRED });
            }
        }
        let Some(here) = labels[i] else { continue };

        if let Some(c) = g.sink_cost(i) {
            let total = here.value - c + g.baseline();
            let cand = (total, here.count, i as u32);
            let better = if best.2 == NO_PRED {
                total > 0.0
            } else {
                prefer(g, &labels, cand, best)
            };
            if better {
                best = cand;
            }
        }

        g.for_each_successor(i, |j, cost| {
            if hidden(j) {
                return;
            }
            let cand = Label {
                value: here.value - cost + g.node_value(j) - pen(j),
                count: here.count + 1,
                pred: i as u32,
            };
            let replace = match labels[j] {
                None => true,
                Some(old) if cand.value != old.value => cand.value > old.value,
                Some(old) if cand.count != old.count => cand.count < old.count,
                // Same length, so comparing the prefixes decides.
                Some(old) => lex_cmp(g, &sequence(&labels, cand.pred), &sequence(&labels, old.pred)) == Ordering::Less,
            };
            if replace {
                labels[j] = Some(cand);
            }
        });
    }

    if best.2 == NO_PRED {
        return BestPath::empty();
    }
    let positions = sequence(&labels, best.2);
    BestPath {
        task_ids: positions.iter().map(|&i| g.task_id(i)).collect(),
        positions,
        profit: best.0,
    }
}

/// Profit of an explicit path, accumulated in the same order as the dynamic
/// program. Returns `None` if a required arc is missing.
pub fn path_value_in<G: PathGraph>(g: &G, positions: &[usize]) -> Option<f64> {
    let Some((&first, _)) = positions.split_first() else {
        return Some(0.0);
    };
    let mut v = -g.source_cost(first)? + g.node_value(first) - 0.0;
    for w in positions.windows(2) {
        let mut cost = None;
        g.for_each_successor(w[0], |j, c| {
            if j == w[1] {
                cost = Some(c);
            }
        });
        v = v - cost? + g.node_value(w[1]) - 0.0;
    }
    Some(v - g.sink_cost(*positions.last()?)? + g.baseline())
}

/// Largest number of task nodes on any complete path.
pub fn max_tasks_on_path<G: PathGraph>(g: &G) -> usize {
    let n = g.node_count();
    let mut depth: Vec<Option<usize>> = vec![None; n];
    let mut best = 0;
    for i in g.scan_range() {
        if g.source_cost(i).is_some() {
            depth[i] = Some(depth[i].unwrap_or(0).max(1));
        }
        let Some(d) = depth[i] else { continue };
        if g.sink_cost(i).is_some() {
            best = best.max(d);
        }
        let mut next = Vec::new();
        g.for_each_successor(i, |j, _| next.push(j));
        for j in next {
            depth[j] = Some(depth[j].map_or(d + 1, |x| x.max(d + 1)));
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub struct PairArc {
    pub to: u32,
    pub cost: f64,
}

/// Driver-independent part of every task map in a market: tasks in
/// topological order and the time-feasible task-to-task arcs.
#[derive(Debug)]
pub struct TaskGraph {
    tasks: Vec<Task>,
    position: HashMap<TaskId, usize>,
    loaded: Vec<Leg>,
    servable: Vec<bool>,
    // Sorted by the target's end deadline so a driver can stop scanning
    // once targets end after the shift.
    succ: Vec<Vec<PairArc>>,
    has_pred: Vec<bool>,
    cost_model: CostModel,
    pair_checks: u64,
}

impl TaskGraph {
    pub fn new(tasks: &[Task], cm: &CostModel) -> Self {
        let mut tasks = tasks.to_vec();
        tasks.sort_by(|a, b| a.start_deadline.total_cmp(&b.start_deadline).then(a.id.cmp(&b.id)));
        let position = tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
        let loaded: Vec<Leg> = tasks.iter().map(|t| t.in_task_leg(cm)).collect();
        let servable: Vec<bool> = tasks.iter().zip(&loaded).map(|(t, l)| l.time_s <= t.window_s()).collect();
        let n = tasks.len();
        let mut succ = vec![Vec::new(); n];
        let mut has_pred = vec![false; n];
        let mut pair_checks = 0u64;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                pair_checks += 1;
                if !(servable[i] && servable[j]) {
                    continue;
                }
                let (a, b) = (&tasks[i], &tasks[j]);
                let slack = b.start_deadline - a.end_deadline;
                if slack < 0.0 {
                    continue;
                }
                let leg = leg_unchecked(a.dest, b.source, cm);
                if leg.time_s <= slack {
                    succ[i].push(PairArc { to: j as u32, cost: leg.cost });
                    has_pred[j] = true;
                }
            }
            succ[i].sort_by(|x, y| {
                tasks[x.to as usize]
                    .end_deadline
                    .total_cmp(&tasks[y.to as usize].end_deadline)
                    .then(x.to.cmp(&y.to))
            });
        }
        TaskGraph {
            tasks,
            position,
            loaded,
            servable,
            succ,
            has_pred,
            cost_model: *cm,
            pair_checks,
        }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Tasks in topological order.
    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn position(&self, id: TaskId) -> Option<usize> {
        self.position.get(&id).copied()
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost_model
    }

    pub fn arc_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Number of task pairs examined while building.
    pub fn pair_checks(&self) -> u64 {
        self.pair_checks
    }
}

/// One driver's task map over a shared [`TaskGraph`].
#[derive(Debug, Clone)]
pub struct TaskMap {
    graph: Arc<TaskGraph>,
    driver: Driver,
    values: Vec<f64>,
    source: Vec<Option<f64>>,
    end_ok: Vec<bool>,
    sink: Vec<Option<f64>>,
    baseline: f64,
    range: Range<usize>,
    checks: u64,
}

impl TaskMap {
    /// Builds the map with task values given by `value(task)` (before the
    /// in-task cost is subtracted).
    pub fn new(graph: Arc<TaskGraph>, driver: &Driver, value: impl Fn(&Task) -> f64) -> Self {
        let cm = graph.cost_model;
        let n = graph.len();
        let tasks = &graph.tasks;
        let lo = tasks.partition_point(|t| t.start_deadline < driver.start_time);
        let hi = tasks.partition_point(|t| t.start_deadline <= driver.end_time);
        let mut values = vec![0.0; n];
        let mut source = vec![None; n];
        let mut end_ok = vec![false; n];
        let mut home = vec![0.0; n];
        let mut checks = 0;
        for i in 0..n {
            let t = &tasks[i];
            values[i] = value(t) - graph.loaded[i].cost;
            checks += 2;
            if !graph.servable[i] {
                continue;
            }
            let back = leg_unchecked(t.dest, driver.dest, &cm);
            home[i] = back.cost;
            end_ok[i] = back.time_s <= driver.end_time - t.end_deadline;
            if end_ok[i] {
                let out = leg_unchecked(driver.source, t.source, &cm);
                if out.time_s <= t.start_deadline - driver.start_time {
                    source[i] = Some(out.cost);
                }
            }
        }
        let sink = (0..n)
            .map(|i| (source[i].is_some() || (end_ok[i] && graph.has_pred[i])).then_some(home[i]))
            .collect();
        let baseline = leg_unchecked(driver.source, driver.dest, &cm).cost;
        TaskMap {
            graph,
            driver: driver.clone(),
            values,
            source,
            end_ok,
            sink,
            baseline,
            range: lo..hi.max(lo),
            checks,
        }
    }

    /// Map for `driver` with task values taken from the instance.
    pub fn for_instance(graph: Arc<TaskGraph>, inst: &Instance, driver: &Driver) -> Self {
        TaskMap::new(graph, driver, |t| inst.task_value(driver.id, t))
    }

    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    pub fn graph(&self) -> &Arc<TaskGraph> {
        &self.graph
    }

    /// Feasibility evaluations spent on this map, including the shared
    /// pairwise pass.
    pub fn operation_count(&self) -> u64 {
        self.checks + self.graph.pair_checks
    }

    pub fn best_path(&self) -> BestPath {
        best_path_in(self, None, None)
    }

    pub fn best_path_with(&self, removed: Option<&[bool]>, penalty: Option<&[f64]>) -> BestPath {
        best_path_in(self, removed, penalty)
    }

    pub fn path_value(&self, positions: &[usize]) -> Option<f64> {
        path_value_in(self, positions)
    }

    pub fn max_tasks_on_path(&self) -> usize {
        max_tasks_on_path(self)
    }

    /// Every arc of the map.
    pub fn arcs(&self) -> Vec<(Node, Node)> {
        let ids = |i: usize| Node::Task(self.graph.tasks[i].id);
        let mut arcs = vec![(Node::Source, Node::Sink)];
        for i in 0..self.graph.len() {
            if self.source[i].is_some() {
                arcs.push((Node::Source, ids(i)));
            }
        }
        for i in 0..self.graph.len() {
            if !self.graph.servable[i] {
                continue;
            }
            for a in &self.graph.succ[i] {
                if self.end_ok[a.to as usize] {
                    arcs.push((ids(i), ids(a.to as usize)));
                }
            }
        }
        for i in 0..self.graph.len() {
            if self.sink[i].is_some() {
                arcs.push((ids(i), Node::Sink));
            }
        }
        arcs
    }

    /// Empty-leg cost of an arc, if it exists.
    pub fn arc_cost(&self, from: Node, to: Node) -> Option<f64> {
        let pos = |n: Node| match n {
            Node::Task(id) => self.graph.position(id),
            _ => None,
        };
        match (from, to) {
            (Node::Source, Node::Sink) => Some(self.baseline),
            (Node::Source, t) => self.source[pos(t)?],
            (t, Node::Sink) => self.sink[pos(t)?],
            (a, b) => {
                let (i, j) = (pos(a)?, pos(b)?);
                let mut found = None;
                self.for_each_successor(i, |k, c| {
                    if k == j {
                        found = Some(c);
                    }
                });
                found
            }
        }
    }

    /// Cost of driving straight from source to destination.
    pub fn baseline_cost(&self) -> f64 {
        self.baseline
    }

    /// Value net of in-task cost for a task node.
    pub fn node_value_of(&self, id: TaskId) -> Option<f64> {
        self.graph.position(id).map(|i| self.values[i])
    }

    /// Nodes of the map in topological order: source, the tasks incident to
    /// some arc sorted by `(start_deadline, id)`, destination. Fails if an
    /// arc points backwards.
    pub fn topo_order(&self) -> Result<Vec<Node>> {
        let arcs = self.arcs();
        let mut present = vec![false; self.graph.len()];
        for (a, b) in &arcs {
            for n in [a, b] {
                if let Node::Task(id) = n {
                    present[self.graph.position[id]] = true;
                }
            }
        }
        let mut order = vec![Node::Source];
        order.extend((0..self.graph.len()).filter(|&i| present[i]).map(|i| Node::Task(self.graph.tasks[i].id)));
        order.push(Node::Sink);
        let rank: HashMap<Node, usize> = order.iter().enumerate().map(|(k, n)| (*n, k)).collect();
        for (a, b) in &arcs {
            if rank[a] >= rank[b] {
                return Err(Error::Invariant(format!("arc {a} -> {b} goes backwards in topological order")));
            }
        }
        Ok(order)
    }

    /// Graphviz rendering, for inspection.
    pub fn to_dot(&self) -> String {
        let mut s = format!("digraph taskmap_driver_{} {{\n  rankdir=LR;\n", self.driver.id);
        for (a, b) in self.arcs() {
            let cost = self.arc_cost(a, b).unwrap_or(f64::NAN);
            let _ = writeln!(s, "  \"{a}\" -> \"{b}\" [label=\"{cost:.3}\"];");
        }
        s.push_str("}\n");
        s
    }
}

impl PathGraph for TaskMap {
    fn node_count(&self) -> usize {
        self.graph.len()
    }

    fn task_id(&self, i: usize) -> TaskId {
        self.graph.tasks[i].id
    }

    fn node_value(&self, i: usize) -> f64 {
        self.values[i]
    }

    fn source_cost(&self, i: usize) -> Option<f64> {
        self.source[i]
    }

    fn sink_cost(&self, i: usize) -> Option<f64> {
        self.sink[i]
    }

    fn baseline(&self) -> f64 {
        self.baseline
    }

    fn for_each_successor<F: FnMut(usize, f64)>(&self, i: usize, mut f: F) {
        if !self.graph.servable[i] {
            return;
        }
        for a in &self.graph.succ[i] {
            let j = a.to as usize;
            if self.graph.tasks[j].end_deadline > self.driver.end_time {
                break;
            }
            if self.end_ok[j] {
                f(j, a.cost);
            }
        }
    }

    fn scan_range(&self) -> Range<usize> {
        self.range.clone()
    }
}

/// Builds one driver's task map from scratch; task values are prices.
pub fn build_task_map(driver: &Driver, tasks: &[Task], cm: &CostModel) -> TaskMap {
    let graph = Arc::new(TaskGraph::new(tasks, cm));
    TaskMap::new(graph, driver, |t| Objective::DriverProfit.task_value(t))
}

/// A task map given directly by its weights, for fixtures and examples.
///
/// Nodes must be listed in topological order and successors must point
/// forward.
#[derive(Debug, Clone, Default)]
pub struct ExplicitMap {
    pub ids: Vec<TaskId>,
    pub values: Vec<f64>,
    pub source: Vec<Option<f64>>,
    pub sink: Vec<Option<f64>>,
    pub succ: Vec<Vec<(usize, f64)>>,
    pub baseline: f64,
}

impl ExplicitMap {
    pub fn best_path(&self) -> BestPath {
        best_path_in(self, None, None)
    }
}

impl PathGraph for ExplicitMap {
    fn node_count(&self) -> usize {
        self.ids.len()
    }
    fn task_id(&self, i: usize) -> TaskId {
        self.ids[i]
    }
    fn node_value(&self, i: usize) -> f64 {
        self.values[i]
    }
    fn source_cost(&self, i: usize) -> Option<f64> {
        self.source[i]
    }
    fn sink_cost(&self, i: usize) -> Option<f64> {
        self.sink[i]
    }
    fn baseline(&self) -> f64 {
        self.baseline
    }
    fn for_each_successor<F: FnMut(usize, f64)>(&self, i: usize, mut f: F) {
        for &(j, c) in &self.succ[i] {
            f(j, c);
        }
    }
}
