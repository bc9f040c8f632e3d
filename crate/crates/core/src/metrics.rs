//! Market-level summary statistics for one outcome.

use serde::{Deserialize, Serialize};

use crate::estimation::MONEY_EPS;
use crate::market::{Instance, MarketOutcome};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MarketMetrics {
    /// Sum of prices of served tasks.
    pub total_revenue: f64,
    /// Objective value: sum of schedule profits.
    pub drivers_profit: f64,
    pub service_rate: f64,
    pub avg_revenue_per_driver: f64,
    pub avg_tasks_per_driver: f64,
    /// Nonempty schedules whose profit is negative.
    pub ir_violations: usize,
    /// `drivers_profit / Z_f*`; absent when no positive bound is known.
    pub performance_ratio: Option<f64>,
}

/// Averages divide by the full driver count, idle drivers included.
pub fn compute_metrics(inst: &Instance, out: &MarketOutcome, bound: Option<f64>) -> MarketMetrics {
    let index = inst.task_index();
    let total_revenue: f64 = out
        .served_task_ids
        .iter()
        .filter_map(|id| index.get(id))
        .map(|t| t.price)
        .sum();
    let served = out.served_task_ids.len() as f64;
    let n_tasks = inst.tasks.len() as f64;
    let n_drivers = inst.drivers.len() as f64;
    let per_driver = |x: f64| if n_drivers > 0.0 { x / n_drivers } else { 0.0 };
    MarketMetrics {
        total_revenue,
        drivers_profit: out.total_profit,
        service_rate: if n_tasks > 0.0 { served / n_tasks } else { 0.0 },
        avg_revenue_per_driver: per_driver(total_revenue),
        avg_tasks_per_driver: per_driver(served),
        ir_violations: out
            .schedules
            .iter()
            .filter(|s| !s.task_ids.is_empty() && s.profit < -MONEY_EPS)
            .count(),
        performance_ratio: bound.filter(|z| *z > MONEY_EPS).map(|z| out.total_profit / z),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{CostModel, GeoPoint};
    use crate::market::{Driver, Objective, Schedule, Task};
    use std::collections::BTreeSet;

    fn inst(n_drivers: u64, n_tasks: u64) -> Instance {
        let p = GeoPoint { lat: 41.15, lon: -8.61 };
        let drivers = (1..=n_drivers)
            .map(|id| Driver {
                id,
                source: p,
                dest: p,
                start_time: 0.0,
                end_time: 1e5,
            })
            .collect();
        let tasks = (1..=n_tasks)
            .map(|id| Task {
                id,
                publish_time: 0.0,
                source: p,
                dest: p,
                start_deadline: 100.0 * id as f64,
                end_deadline: 100.0 * id as f64 + 50.0,
                price: 2.0,
                wtp: 2.0,
                trip_distance_km: None,
                surge: None,
            })
            .collect();
        Instance::new(drivers, tasks, CostModel::default(), Objective::DriverProfit).unwrap()
    }

    #[test]
    fn service_rate_is_served_fraction() {
        let inst = inst(4, 10);
        let schedules = vec![Schedule {
            driver_id: 1,
            task_ids: vec![1, 2, 3],
            profit: 6.0,
        }];
        let out = MarketOutcome::from_schedules(&inst, schedules);
        let m = compute_metrics(&inst, &out, Some(12.0));
        assert!((m.service_rate - 0.3).abs() < 1e-12);
        assert!((m.total_revenue - 6.0).abs() < 1e-12);
        assert!((m.avg_tasks_per_driver - 0.75).abs() < 1e-12);
        assert_eq!(m.performance_ratio, Some(0.5));
    }

    #[test]
    fn idle_market_is_all_zero() {
        let inst = inst(3, 5);
        let out = MarketOutcome::from_schedules(&inst, vec![]);
        let m = compute_metrics(&inst, &out, Some(0.0));
        assert_eq!(m.total_revenue, 0.0);
        assert_eq!(m.drivers_profit, 0.0);
        assert_eq!(m.avg_revenue_per_driver, 0.0);
        assert_eq!(m.avg_tasks_per_driver, 0.0);
        assert_eq!(m.performance_ratio, None);
        assert_eq!(out.rejected_task_ids, (1..=5).collect::<BTreeSet<_>>());
    }
}
