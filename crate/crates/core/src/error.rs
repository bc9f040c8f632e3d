use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A task sequence that a driver cannot complete in time.
    #[error("driver {driver_id}: infeasible leg {leg}: {reason}")]
    Infeasible {
        driver_id: u64,
        leg: String,
        reason: String,
    },

    #[error("format error: {0}")]
    Format(String),

    /// Exact search gave up. `incumbent` is the best value found so far and
    /// is NOT proven optimal.
    #[error("node budget of {budget} exhausted after {nodes} nodes (non-optimal incumbent {incumbent})")]
    BudgetExceeded {
        budget: u64,
        nodes: u64,
        incumbent: f64,
    },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration cap of {0} reached (cycling guard)")]
    CyclingGuard(usize),

    /// Column generation stopped before the pricing problem certified
    /// optimality. `bound` is the last restricted-master objective.
    #[error("column generation did not converge within {rounds} rounds (last master objective {bound})")]
    NonConvergence { rounds: usize, bound: f64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
