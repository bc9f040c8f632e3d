//! Small random markets for tests, examples and exact-solver comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::estimation::{leg_unchecked, surge_price, CostModel, GeoPoint};
use crate::market::{Driver, Instance, Objective, Task};

#[derive(Debug, Clone, Copy)]
pub struct SmallMarket {
    pub n_drivers: usize,
    pub n_tasks: usize,
    pub horizon_s: f64,
    /// Half-width of the square service area, in km.
    pub radius_km: f64,
    /// Task surge multipliers are drawn from this range; values well below
    /// 1 make some tasks unprofitable.
    pub surge_range: (f64, f64),
    pub objective: Objective,
}

impl Default for SmallMarket {
    fn default() -> Self {
        SmallMarket {
            n_drivers: 3,
            n_tasks: 8,
            horizon_s: 7200.0,
            radius_km: 3.0,
            surge_range: (0.2, 1.5),
            objective: Objective::DriverProfit,
        }
    }
}

const CENTER: GeoPoint = GeoPoint { lat: 41.15, lon: -8.61 };

fn random_point(rng: &mut ChaCha8Rng, radius_km: f64) -> GeoPoint {
    let dlat = radius_km / 111.195;
    let dlon = dlat / CENTER.lat.to_radians().cos();
    GeoPoint {
        lat: CENTER.lat + rng.gen_range(-dlat..=dlat),
        lon: CENTER.lon + rng.gen_range(-dlon..=dlon),
    }
}

/// A compact random market; identical `(cfg, seed)` give identical markets.
pub fn small_market(cfg: &SmallMarket, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cm = CostModel::default();
    let mut tasks = Vec::with_capacity(cfg.n_tasks);
    for id in 1..=cfg.n_tasks as u64 {
        let source = random_point(&mut rng, cfg.radius_km);
        let dest = random_point(&mut rng, cfg.radius_km);
        let ride = leg_unchecked(source, dest, &cm);
        let start = rng.gen_range(600.0..(cfg.horizon_s - 1200.0).max(601.0));
        let window = ride.time_s * rng.gen_range(1.0..1.6) + 60.0;
        let alpha = rng.gen_range(cfg.surge_range.0..=cfg.surge_range.1);
        let price = surge_price(ride.distance_km, window, alpha, &cm).expect("nonnegative trip");
        tasks.push(Task {
            id,
            publish_time: start - rng.gen_range(60.0..600.0),
            source,
            dest,
            start_deadline: start,
            end_deadline: start + window,
            price,
            wtp: price * (1.0 + rng.gen_range(0.0..0.5)),
            trip_distance_km: None,
            surge: Some(alpha),
        });
    }
    let mut drivers = Vec::with_capacity(cfg.n_drivers);
    for id in 1..=cfg.n_drivers as u64 {
        let start = rng.gen_range(0.0..cfg.horizon_s / 2.0);
        drivers.push(Driver {
            id,
            source: random_point(&mut rng, cfg.radius_km),
            dest: random_point(&mut rng, cfg.radius_km),
            start_time: start,
            end_time: start + rng.gen_range(cfg.horizon_s / 2.0..cfg.horizon_s),
        });
    }
    Instance::new(drivers, tasks, cm, cfg.objective).expect("generated market is valid")
}
