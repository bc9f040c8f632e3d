//! Primal simplex for `max c·x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The slack basis is feasible from the start, so there is no phase one.
//! The basis inverse is kept in product form: a sparse LU factorization of
//! the basic columns, refreshed every hundred pivots, followed by one eta
//! column per pivot since. Columns may be appended between solves, which is
//! what a column-generation master needs.
//!
//! Entering variables come from Bland's rule or from Devex pricing. Under
//! Devex a long run of degenerate pivots shifts the right-hand side by a
//! small random amount; the shift is removed at the optimum and a few dual
//! simplex pivots restore feasibility for the original `b`. If stalls
//! persist the solver falls back to Bland's rule.

use crate::error::{Error, Result};

/// Reduced costs above this are considered improving.
pub const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-7;
const HARRIS_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
// Pivot candidates must be at least this fraction of their column's largest
// entry.
const LU_THRESHOLD: f64 = 0.1;
// Columns of minimum count searched for a Markowitz pivot.
const MARKOWITZ_COLUMNS: usize = 4;
const FEASIBILITY_TOL: f64 = 1e-9;
const REFRESH_EVERY: usize = 64;
const REINVERT_EVERY: usize = 100;
// Consecutive degenerate pivots counted as a stall.
const STALL_LIMIT: usize = 25;
// Relative size of the right-hand-side perturbation applied on a stall.
const PERTURBATION: f64 = 1e-3;
const MAX_PERTURBATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest-index entering and leaving variables; never cycles.
    Bland,
    /// Largest reduced cost, falling back to Bland on degenerate stalls.
    Dantzig,
    /// Largest reduced cost scaled by Devex reference weights, with the
    /// same fallback.
    Devex,
}

#[derive(Debug, Clone, Default)]
pub struct SparseColumn {
    pub rows: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseColumn {
    pub fn new(entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let (rows, vals) = entries.into_iter().filter(|(_, v)| *v != 0.0).unzip();
        SparseColumn { rows, vals }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Slack(usize),
    Col(usize),
}

// Elementary column transform: identity except at column `pos`, built from
// the transformed entering column `alpha` (entries other than `pos` stored
// sparsely).
#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Eta {
    fn new(pos: usize, alpha: &[f64]) -> Self {
        let (idx, val) = alpha
            .iter()
            .enumerate()
            .filter(|&(i, v)| i != pos && v.abs() > DROP_TOL)
            .map(|(i, v)| (i, *v))
            .unzip();
        Eta { pos, pivot: alpha[pos], idx, val }
    }
}

#[derive(Debug, Clone)]
pub struct RevisedSimplex {
    // Right-hand side in use; differs from `base_rhs` while perturbed.
    rhs: Vec<f64>,
    base_rhs: Vec<f64>,
    perturbed: bool,
    obj: Vec<f64>,
    cols: Vec<SparseColumn>,
    // Basis inverse in product form: B^-1 = E_k ... E_1.
    etas: Vec<Eta>,
    basis: Vec<Var>,
    col_basic: Vec<bool>,
    slack_basic: Vec<bool>,
    xb: Vec<f64>,
    duals: Vec<f64>,
    rule: PivotRule,
    pivots: usize,
    since_refresh: usize,
    since_reinvert: usize,
    slack_weight: Vec<f64>,
    col_weight: Vec<f64>,
}

impl RevisedSimplex {
    pub fn new(rhs: Vec<f64>, rule: PivotRule) -> Result<Self> {
        if rhs.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidInput("simplex needs a finite right-hand side b >= 0".into()));
        }
        let m = rhs.len();
        Ok(RevisedSimplex {
            xb: rhs.clone(),
            base_rhs: rhs.clone(),
            rhs,
            perturbed: false,
            obj: Vec::new(),
            cols: Vec::new(),
            etas: Vec::new(),
            basis: (0..m).map(Var::Slack).collect(),
            col_basic: Vec::new(),
            slack_basic: vec![true; m],
            duals: vec![0.0; m],
            rule,
            pivots: 0,
            since_refresh: 0,
            since_reinvert: 0,
            slack_weight: vec![1.0; m],
            col_weight: Vec::new(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn columns(&self) -> usize {
        self.cols.len()
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Appends a nonbasic column; the current basis stays primal feasible.
    pub fn add_column(&mut self, cost: f64, col: SparseColumn) -> Result<usize> {
        if !cost.is_finite() || col.vals.iter().any(|v| !v.is_finite()) || col.rows.iter().any(|&r| r >= self.rows()) {
            return Err(Error::InvalidInput("bad simplex column".into()));
        }
        self.obj.push(cost);
        self.cols.push(col);
        self.col_basic.push(false);
        self.col_weight.push(1.0);
        Ok(self.cols.len() - 1)
    }

    /// Replaces `b`, keeping the current basis. If the basic solution
    /// becomes infeasible, dual simplex pivots restore feasibility while
    /// keeping reduced costs nonpositive, so a following [`solve`] starts
    /// from (nearly) where the previous one ended.
    ///
    /// [`solve`]: RevisedSimplex::solve
    pub fn set_rhs(&mut self, rhs: Vec<f64>) -> Result<()> {
        if rhs.len() != self.rows() || rhs.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidInput("simplex needs a finite right-hand side b >= 0".into()));
        }
        self.base_rhs = rhs.clone();
        self.rhs = rhs;
        self.perturbed = false;
        self.reinvert()?;
        self.dual_cleanup()
    }

    fn dual_cleanup(&mut self) -> Result<()> {
        let cap = 10_000 + 50 * (self.rows() + self.cols.len());
        for _ in 0..cap {
            if self.since_reinvert >= REINVERT_EVERY {
                self.reinvert()?;
            }
            let leave = (0..self.rows())
                .filter(|&r| self.xb[r] < -FEASIBILITY_TOL)
                .min_by(|&a, &b| self.xb[a].total_cmp(&self.xb[b]).then(a.cmp(&b)));
            let Some(r) = leave else { return Ok(()) };
            let row = self.row_of(r);
            let m = self.rows();
            let entering = (0..m)
                .filter(|&i| !self.slack_basic[i])
                .map(|i| (Var::Slack(i), row[i], -self.duals[i]))
                .chain((0..self.cols.len()).filter(|&j| !self.col_basic[j]).map(|j| {
                    let c = &self.cols[j];
                    let a: f64 = c.rows.iter().zip(&c.vals).map(|(&k, &v)| row[k] * v).sum();
                    (Var::Col(j), a, self.reduced_cost(j))
                }))
                .filter(|(_, a, _)| *a < -PIVOT_TOL)
                .map(|(v, a, d)| (v, d, d.min(0.0) / a))
                .min_by(|x, y| x.2.total_cmp(&y.2).then(self.key(x.0).cmp(&self.key(y.0))));
            let Some((q, d_q, _)) = entering else {
                return Err(Error::Invariant("no feasible basis for the right-hand side".into()));
            };
            let alpha = self.column_of(q);
            let theta = self.xb[r] / alpha[r];
            self.pivot(q, d_q, r, theta, &alpha, &row);
        }
        Err(Error::CyclingGuard(cap))
    }

    // Shifts the right-hand side by `B e` for a small positive `e`, which
    // moves every basic variable up by `e` and so keeps the basis feasible
    // while breaking the ties behind degenerate pivots.
    fn perturb(&mut self) {
        for r in 0..self.rows() {
            let u = ((r + self.pivots) as f64 * 0.618_033_988_749_895).fract();
            let e = PERTURBATION * (1.0 + self.xb[r].abs()) * (0.5 + 0.5 * u);
            match self.basis[r] {
                Var::Slack(i) => self.rhs[i] += e,
                Var::Col(j) => {
                    for (&k, &v) in self.cols[j].rows.iter().zip(&self.cols[j].vals) {
                        self.rhs[k] += e * v;
                    }
                }
            }
            self.xb[r] += e;
        }
        self.perturbed = true;
    }

    fn reset_weights(&mut self) {
        self.slack_weight.iter_mut().for_each(|w| *w = 1.0);
        self.col_weight.iter_mut().for_each(|w| *w = 1.0);
    }

    fn key(&self, v: Var) -> usize {
        match v {
            Var::Slack(i) => i,
            Var::Col(j) => self.rows() + j,
        }
    }

    fn cost(&self, v: Var) -> f64 {
        match v {
            Var::Slack(_) => 0.0,
            Var::Col(j) => self.obj[j],
        }
    }

    pub fn reduced_cost(&self, j: usize) -> f64 {
        let c = &self.cols[j];
        self.obj[j] - c.rows.iter().zip(&c.vals).map(|(&r, &v)| self.duals[r] * v).sum::<f64>()
    }

    fn ftran(&self, x: &mut [f64]) {
        for e in &self.etas {
            let xp = x[e.pos];
            if xp == 0.0 {
                continue;
            }
            let xr = xp / e.pivot;
            x[e.pos] = xr;
            for (&i, &v) in e.idx.iter().zip(&e.val) {
                x[i] -= v * xr;
            }
        }
    }

    fn btran(&self, y: &mut [f64]) {
        for e in self.etas.iter().rev() {
            let s: f64 = e.idx.iter().zip(&e.val).map(|(&i, &v)| y[i] * v).sum();
            y[e.pos] = (y[e.pos] - s) / e.pivot;
        }
    }

    // Row `r` of the basis inverse.
    fn row_of(&self, r: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.rows()];
        y[r] = 1.0;
        self.btran(&mut y);
        y
    }

    fn refresh(&mut self) {
        let mut y: Vec<f64> = self.basis.iter().map(|&v| self.cost(v)).collect();
        self.btran(&mut y);
        self.duals = y;
        let mut x = self.rhs.clone();
        self.ftran(&mut x);
        self.xb = x;
        self.since_refresh = 0;
    }

    fn entering(&self, use_bland: bool) -> Option<(Var, f64)> {
        let m = self.rows();
        let candidates = (0..m)
            .filter(|&i| !self.slack_basic[i])
            .map(|i| (Var::Slack(i), -self.duals[i]))
            .chain(
                (0..self.cols.len())
                    .filter(|&j| !self.col_basic[j])
                    .map(|j| (Var::Col(j), self.reduced_cost(j))),
            )
            .filter(|(_, d)| *d > REDUCED_COST_TOL);
        if use_bland {
            candidates.min_by_key(|(v, _)| self.key(*v))
        } else if self.rule == PivotRule::Devex {
            candidates
                .map(|(v, d)| (v, d, d * d / self.weight(v)))
                .max_by(|a, b| a.2.total_cmp(&b.2).then(self.key(b.0).cmp(&self.key(a.0))))
                .map(|(v, d, _)| (v, d))
        } else {
            candidates.max_by(|a, b| a.1.total_cmp(&b.1).then(self.key(b.0).cmp(&self.key(a.0))))
        }
    }

    fn weight(&self, v: Var) -> f64 {
        match v {
            Var::Slack(i) => self.slack_weight[i],
            Var::Col(j) => self.col_weight[j],
        }
    }

    // Devex reference weights, updated from the pivot row before the basis
    // changes.
    fn update_weights(&mut self, q: Var, r: usize, alpha_rq: f64, row: &[f64]) {
        let wq = self.weight(q) / (alpha_rq * alpha_rq);
        for i in 0..self.rows() {
            if !self.slack_basic[i] && row[i] != 0.0 {
                let w = row[i] * row[i] * wq;
                if w > self.slack_weight[i] {
                    self.slack_weight[i] = w;
                }
            }
        }
        for (j, c) in self.cols.iter().enumerate() {
            if self.col_basic[j] {
                continue;
            }
            let a: f64 = c.rows.iter().zip(&c.vals).map(|(&k, &v)| row[k] * v).sum();
            if a != 0.0 {
                let w = a * a * wq;
                if w > self.col_weight[j] {
                    self.col_weight[j] = w;
                }
            }
        }
        let leaving = wq.max(1.0);
        match self.basis[r] {
            Var::Slack(i) => self.slack_weight[i] = leaving,
            Var::Col(j) => self.col_weight[j] = leaving,
        }
    }

    fn column_of(&self, v: Var) -> Vec<f64> {
        let mut alpha = vec![0.0; self.rows()];
        match v {
            Var::Slack(k) => alpha[k] = 1.0,
            Var::Col(j) => {
                let c = &self.cols[j];
                for (&r, &v) in c.rows.iter().zip(&c.vals) {
                    alpha[r] = v;
                }
            }
        }
        self.ftran(&mut alpha);
        alpha
    }

    /// Pivots until no reduced cost exceeds [`REDUCED_COST_TOL`].
    ///
    /// Under the Dantzig and Devex rules a run of degenerate pivots
    /// triggers a temporary perturbation of `b`; once the perturbed problem
    /// is optimal the original `b` is restored and dual simplex pivots
    /// repair feasibility, so the returned basis is optimal for the
    /// problem as stated.
    pub fn solve(&mut self) -> Result<()> {
        let cap = 10_000 + 50 * (self.rows() + self.cols.len());
        let mut stalled = 0usize;
        let mut steps = 0usize;
        let mut perturbations = 0usize;
        self.reset_weights();
        loop {
            if self.since_reinvert >= REINVERT_EVERY {
                self.reinvert()?;
            } else if self.since_refresh >= REFRESH_EVERY {
                self.refresh();
            }
            if stalled >= STALL_LIMIT && self.rule != PivotRule::Bland && !self.perturbed && perturbations < MAX_PERTURBATIONS {
                self.perturb();
                perturbations += 1;
                stalled = 0;
            }
            let use_bland = self.rule == PivotRule::Bland || stalled >= STALL_LIMIT;
            let Some((q, d_q)) = self.entering(use_bland) else {
                if self.since_reinvert > 0 {
                    self.reinvert()?;
                }
                // Drift can hide an improving column until the refresh.
                if self.entering(true).is_some() {
                    continue;
                }
                if !self.perturbed {
                    return Ok(());
                }
                self.rhs = self.base_rhs.clone();
                self.perturbed = false;
                self.reinvert()?;
                self.dual_cleanup()?;
                continue;
            };
            let alpha = self.column_of(q);
            let leave = if use_bland { self.ratio_bland(&alpha) } else { self.ratio_harris(&alpha) };
            let Some((r, theta)) = leave else {
                return Err(Error::Unbounded);
            };
            stalled = if theta <= 1e-12 { stalled + 1 } else { 0 };
            let row = self.row_of(r);
            if self.rule == PivotRule::Devex {
                self.update_weights(q, r, alpha[r], &row);
            }
            self.pivot(q, d_q, r, theta, &alpha, &row);
            steps += 1;
            if steps > cap {
                return Err(Error::CyclingGuard(cap));
            }
        }
    }

    // Minimum ratio, ties to the smallest basis key (Bland's leaving rule).
    fn ratio_bland(&self, alpha: &[f64]) -> Option<(usize, f64)> {
        let mut leave: Option<(usize, f64)> = None;
        for (r, &a) in alpha.iter().enumerate() {
            if a <= PIVOT_TOL {
                continue;
            }
            let theta = self.xb[r].max(0.0) / a;
            leave = match leave {
                None => Some((r, theta)),
                Some((_, t)) if theta < t - 1e-12 => Some((r, theta)),
                Some((s, t)) if theta <= t + 1e-12 && self.key(self.basis[r]) < self.key(self.basis[s]) => {
                    Some((r, theta.min(t)))
                }
                keep => keep,
            };
        }
        leave
    }

    // Two-pass Harris test: among rows whose ratio fits under the relaxed
    // minimum, take the largest pivot element.
    fn ratio_harris(&self, alpha: &[f64]) -> Option<(usize, f64)> {
        let bound = alpha
            .iter()
            .zip(&self.xb)
            .filter(|(a, _)| **a > PIVOT_TOL)
            .map(|(a, x)| (x.max(0.0) + HARRIS_TOL) / a)
            .fold(f64::INFINITY, f64::min);
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<usize> = None;
        for (r, &a) in alpha.iter().enumerate() {
            if a > PIVOT_TOL && self.xb[r].max(0.0) / a <= bound && best.is_none_or(|b| a > alpha[b]) {
                best = Some(r);
            }
        }
        best.map(|r| (r, self.xb[r].max(0.0) / alpha[r]))
    }

    // Refactors the basis. Basic slacks are unit columns, so only the block
    // of structural columns on the rows without a basic slack is factored,
    // by sparse LU with Markowitz pivot choice and threshold partial
    // pivoting. The factors are stored as etas: L in pivot order, then U for
    // a column-oriented back substitution, then one eta per structural
    // column that removes its contribution from the slack rows.
    fn reinvert(&mut self) -> Result<()> {
        let m = self.rows();
        let structural: Vec<usize> = self
            .basis
            .iter()
            .filter_map(|v| match v {
                Var::Col(j) => Some(*j),
                Var::Slack(_) => None,
            })
            .collect();
        let rows: Vec<usize> = (0..m).filter(|&i| !self.slack_basic[i]).collect();
        let k = structural.len();
        if rows.len() != k {
            return Err(Error::Invariant("basis size mismatch".into()));
        }
        let mut local = vec![usize::MAX; m];
        for (p, &r) in rows.iter().enumerate() {
            local[r] = p;
        }
        let mut a: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
        let mut pattern: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (c, &j) in structural.iter().enumerate() {
            for (&r, &v) in self.cols[j].rows.iter().zip(&self.cols[j].vals) {
                if local[r] != usize::MAX {
                    a[local[r]].push((c, v));
                    pattern[c].push(local[r]);
                }
            }
        }
        let mut count: Vec<usize> = pattern.iter().map(Vec::len).collect();
        let mut row_live = vec![true; k];
        let mut col_live = vec![true; k];
        let mut mark = vec![0usize; k];
        let mut lower: Vec<(usize, Vec<(usize, f64)>)> = Vec::with_capacity(k);
        let mut upper: Vec<(usize, usize, f64, Vec<(usize, f64)>)> = Vec::with_capacity(k);
        for _ in 0..k {
            let mut best: Option<(usize, usize, f64, usize)> = None;
            let consider = |best: &mut Option<(usize, usize, f64, usize)>, i: usize, c: usize, v: f64, big: f64, rc: usize, cc: usize| {
                if v.abs() < LU_THRESHOLD * big || v.abs() < 1e-11 {
                    return;
                }
                let cost = (rc - 1) * (cc.max(1) - 1);
                if best.is_none_or(|b| cost < b.3 || (cost == b.3 && v.abs() > b.2.abs())) {
                    *best = Some((i, c, v, cost));
                }
            };
            let column = |c: usize, a: &[Vec<(usize, f64)>]| -> Vec<(usize, f64)> {
                pattern[c]
                    .iter()
                    .filter(|&&i| row_live[i])
                    .filter_map(|&i| a[i].iter().find(|e| e.0 == c).map(|e| (i, e.1)))
                    .collect()
            };
            let min_col = (0..k).filter(|&c| col_live[c]).map(|c| count[c]).min().unwrap_or(0);
            for c in (0..k).filter(|&c| col_live[c] && count[c] == min_col).take(MARKOWITZ_COLUMNS) {
                let entries = column(c, &a);
                let big = entries.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
                for &(i, v) in &entries {
                    consider(&mut best, i, c, v, big, a[i].len(), count[c]);
                }
            }
            let min_row = (0..k).filter(|&i| row_live[i]).map(|i| a[i].len()).min().unwrap_or(0);
            if best.is_none_or(|b| b.3 > 0) && min_row == 1 {
                for i in (0..k).filter(|&i| row_live[i] && a[i].len() == min_row).take(MARKOWITZ_COLUMNS) {
                    for &(c, v) in &a[i] {
                        let big = column(c, &a).iter().map(|e| e.1.abs()).fold(0.0, f64::max);
                        consider(&mut best, i, c, v, big, a[i].len(), count[c]);
                    }
                }
            }
            let Some((p, c, piv, _)) = best else {
                return Err(Error::Invariant("singular basis".into()));
            };
            let prow: Vec<(usize, f64)> = a[p].iter().copied().filter(|e| e.0 != c).collect();
            let mut l = Vec::new();
            let targets: Vec<usize> = pattern[c].iter().copied().filter(|&i| row_live[i] && i != p).collect();
            for i in targets {
                let Some(t) = a[i].iter().position(|e| e.0 == c) else { continue };
                let f = a[i].swap_remove(t).1 / piv;
                l.push((rows[i], f));
                for (t, e) in a[i].iter().enumerate() {
                    mark[e.0] = t + 1;
                }
                for &(cc, v) in &prow {
                    if mark[cc] > 0 {
                        a[i][mark[cc] - 1].1 -= f * v;
                    } else {
                        a[i].push((cc, -f * v));
                        pattern[cc].push(i);
                        count[cc] += 1;
                    }
                }
                for e in &a[i] {
                    mark[e.0] = 0;
                    if e.1.abs() <= DROP_TOL {
                        count[e.0] -= 1;
                    }
                }
                a[i].retain(|e| e.1.abs() > DROP_TOL);
            }
            for &(cc, _) in &prow {
                count[cc] -= 1;
            }
            row_live[p] = false;
            col_live[c] = false;
            lower.push((rows[p], l));
            upper.push((rows[p], c, piv, prow));
        }

        self.etas.clear();
        for (pos, l) in lower {
            if !l.is_empty() {
                let (idx, val) = l.into_iter().filter(|e| e.1.abs() > DROP_TOL).unzip();
                self.etas.push(Eta { pos, pivot: 1.0, idx, val });
            }
        }
        let mut ucols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
        for &(pos, _, _, ref prow) in &upper {
            for &(cc, v) in prow {
                if v.abs() > DROP_TOL {
                    ucols[cc].push((pos, v));
                }
            }
        }
        let mut basis: Vec<Var> = (0..m).map(Var::Slack).collect();
        for &(pos, c, piv, _) in upper.iter().rev() {
            let (idx, val) = std::mem::take(&mut ucols[c]).into_iter().unzip();
            self.etas.push(Eta { pos, pivot: piv, idx, val });
            basis[pos] = Var::Col(structural[c]);
        }
        for &(pos, c, _, _) in &upper {
            let col = &self.cols[structural[c]];
            let (idx, val): (Vec<usize>, Vec<f64>) =
                col.rows.iter().zip(&col.vals).filter(|(r, _)| local[**r] == usize::MAX).map(|(r, v)| (*r, *v)).unzip();
            if !idx.is_empty() {
                self.etas.push(Eta { pos, pivot: 1.0, idx, val });
            }
        }
        self.basis = basis;
        self.since_reinvert = 0;
        self.reset_weights();
        self.refresh();
        Ok(())
    }

    fn pivot(&mut self, q: Var, d_q: f64, r: usize, theta: f64, alpha: &[f64], row: &[f64]) {
        let ar = alpha[r];
        for (i, &a) in alpha.iter().enumerate() {
            if i != r && a != 0.0 {
                self.xb[i] -= theta * a;
            }
        }
        for (y, &v) in self.duals.iter_mut().zip(row) {
            if v != 0.0 {
                *y += d_q * v / ar;
            }
        }
        self.etas.push(Eta::new(r, alpha));
        self.xb[r] = theta;
        match self.basis[r] {
            Var::Slack(i) => self.slack_basic[i] = false,
            Var::Col(j) => self.col_basic[j] = false,
        }
        match q {
            Var::Slack(i) => self.slack_basic[i] = true,
            Var::Col(j) => self.col_basic[j] = true,
        }
        self.basis[r] = q;
        self.pivots += 1;
        self.since_refresh += 1;
        self.since_reinvert += 1;
    }

    /// Value of column `j` in the current basic solution.
    pub fn primal(&self, j: usize) -> f64 {
        self.basis
            .iter()
            .position(|v| *v == Var::Col(j))
            .map_or(0.0, |r| self.xb[r].max(0.0))
    }

    pub fn primal_values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cols.len()];
        for (r, v) in self.basis.iter().enumerate() {
            if let Var::Col(j) = v {
                x[*j] = self.xb[r].max(0.0);
            }
        }
        x
    }

    pub fn is_basic(&self, j: usize) -> bool {
        self.col_basic[j]
    }

    /// Row duals `y = c_B B^-1`.
    pub fn duals(&self) -> &[f64] {
        &self.duals
    }

    pub fn objective(&self) -> f64 {
        self.primal_values().iter().zip(&self.obj).map(|(x, c)| x * c).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub objective: f64,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub pivots: usize,
}

/// Solves `max c·x  s.t.  A x <= b, x >= 0` (dense `A`, row-major) with
/// Bland's rule.
pub fn simplex_solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpResult> {
    simplex_solve_with(a, b, c, PivotRule::Bland)
}

pub fn simplex_solve_with(a: &[Vec<f64>], b: &[f64], c: &[f64], rule: PivotRule) -> Result<LpResult> {
    if a.len() != b.len() || a.iter().any(|row| row.len() != c.len()) {
        return Err(Error::InvalidInput("constraint matrix shape does not match b and c".into()));
    }
    let mut lp = RevisedSimplex::new(b.to_vec(), rule)?;
    for (j, &cj) in c.iter().enumerate() {
        lp.add_column(cj, SparseColumn::new(a.iter().enumerate().map(|(i, row)| (i, row[j]))))?;
    }
    lp.solve()?;
    Ok(LpResult {
        objective: lp.objective(),
        primal: lp.primal_values(),
        duals: lp.duals().to_vec(),
        pivots: lp.pivots(),
    })
}
