//! Distances, travel times, travel costs and surge pricing.
//!
//! Every leg in the market is estimated the same way: great-circle distance
//! stretched by a constant detour factor, driven at one mean speed, paid for
//! at a constant fuel price per kilometre. Trip-internal distances may come
//! from a recorded trajectory instead (see [`crate::market::Task::trip_distance_km`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Absolute tolerance used for every money comparison.
pub const MONEY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        let p = GeoPoint { lat, lon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lat.is_finite() || !self.lon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite coordinate ({}, {})",
                self.lat, self.lon
            )));
        }
        if !(-90.0..=90.0).contains(&self.lat) || !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::InvalidInput(format!(
                "coordinate out of range ({}, {})",
                self.lat, self.lon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Mean driving speed in km/h.
    pub speed_kmh: f64,
    /// Currency per driven kilometre.
    pub fuel_unit_price: f64,
    /// Multiplier (>= 1) applied to great-circle distances.
    pub detour_factor: f64,
    /// Fare per kilometre.
    pub beta1: f64,
    /// Fare per second.
    pub beta2: f64,
    pub default_surge: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            speed_kmh: 30.0,
            fuel_unit_price: 0.2,
            detour_factor: 1.3,
            beta1: 1.0,
            beta2: 0.005,
            default_surge: 1.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("speed_kmh", self.speed_kmh),
            ("fuel_unit_price", self.fuel_unit_price),
            ("detour_factor", self.detour_factor),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("default_surge", self.default_surge),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("cost model {name} is not finite")));
            }
        }
        if self.speed_kmh <= 0.0 {
            return Err(Error::InvalidInput("speed_kmh must be > 0".into()));
        }
        if self.detour_factor < 1.0 {
            return Err(Error::InvalidInput("detour_factor must be >= 1".into()));
        }
        if self.fuel_unit_price < 0.0 {
            return Err(Error::InvalidInput("fuel_unit_price must be >= 0".into()));
        }
        if self.default_surge < 1.0 {
            return Err(Error::InvalidInput("default_surge must be >= 1".into()));
        }
        Ok(())
    }

    /// Driving time in seconds for a road distance.
    pub fn drive_time_s(&self, distance_km: f64) -> f64 {
        distance_km / self.speed_kmh * 3600.0
    }

    pub fn drive_cost(&self, distance_km: f64) -> f64 {
        distance_km * self.fuel_unit_price
    }
}

/// Estimated road leg between two points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub distance_km: f64,
    pub time_s: f64,
    pub cost: f64,
}

impl Leg {
    pub const ZERO: Leg = Leg {
        distance_km: 0.0,
        time_s: 0.0,
        cost: 0.0,
    };

    /// A leg of known road length (e.g. measured along a trajectory).
    pub fn from_road_km(distance_km: f64, cm: &CostModel) -> Leg {
        Leg {
            distance_km,
            time_s: cm.drive_time_s(distance_km),
            cost: cm.drive_cost(distance_km),
        }
    }
}

/// Great-circle distance in kilometres.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    Ok(haversine_unchecked(a, b))
}

pub(crate) fn haversine_unchecked(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

pub fn leg_estimate(a: GeoPoint, b: GeoPoint, cm: &CostModel) -> Result<Leg> {
    a.validate()?;
    b.validate()?;
    Ok(leg_unchecked(a, b, cm))
}

pub(crate) fn leg_unchecked(a: GeoPoint, b: GeoPoint, cm: &CostModel) -> Leg {
    Leg::from_road_km(haversine_unchecked(a, b) * cm.detour_factor, cm)
}

/// Fare of a trip: `alpha * (beta1 * distance + beta2 * duration)`.
pub fn surge_price(distance_km: f64, duration_s: f64, alpha: f64, cm: &CostModel) -> Result<f64> {
    for (name, v) in [("distance", distance_km), ("duration", duration_s), ("alpha", alpha)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    Ok(alpha * (cm.beta1 * distance_km + cm.beta2 * duration_s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    // Spherical law of cosines, an independent route to the same distance.
    fn cosine_law_km(a: GeoPoint, b: GeoPoint) -> f64 {
        let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
        let dl = (b.lon - a.lon).to_radians();
        let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
        EARTH_RADIUS_KM * c.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn haversine_examples() {
        let p = pt(41.15, -8.61);
        assert_eq!(haversine_km(p, p).unwrap(), 0.0);
        let d = haversine_km(pt(0.0, 0.0), pt(0.0, 1.0)).unwrap();
        assert!((d - 111.1949).abs() < 1e-3, "{d}");
        let (a, b) = (pt(41.1496, -8.6110), pt(41.1621, -8.6220));
        let h = haversine_km(a, b).unwrap();
        let c = cosine_law_km(a, b);
        assert!(((h - c) / c).abs() < 1e-6, "{h} vs {c}");
    }

    #[test]
    fn rejects_non_finite() {
        let bad = GeoPoint { lat: f64::NAN, lon: 0.0 };
        assert!(haversine_km(bad, pt(0.0, 0.0)).is_err());
        assert!(GeoPoint::new(91.0, 0.0).is_err());
    }

    #[test]
    fn leg_examples() {
        let cm = CostModel::default();
        let p = pt(41.0, -8.0);
        assert_eq!(leg_estimate(p, p, &cm).unwrap(), Leg::ZERO);

        let cm = CostModel {
            speed_kmh: 30.0,
            fuel_unit_price: 0.5,
            detour_factor: 1.3,
            ..CostModel::default()
        };
        let leg = Leg::from_road_km(10.0 * cm.detour_factor, &cm);
        assert!((leg.distance_km - 13.0).abs() < 1e-12);
        assert!((leg.time_s - 1560.0).abs() < 1e-9);
        assert!((leg.cost - 6.5).abs() < 1e-12);
    }

    #[test]
    fn surge_examples() {
        let mut cm = CostModel { beta1: 1.0, beta2: 0.0, ..CostModel::default() };
        assert_eq!(surge_price(10.0, 600.0, 1.0, &cm).unwrap(), 10.0);
        cm.beta2 = 0.01;
        assert!((surge_price(10.0, 1200.0, 1.5, &cm).unwrap() - 33.0).abs() < 1e-12);
        assert_eq!(surge_price(7.0, 99.0, 0.0, &cm).unwrap(), 0.0);
        assert!(surge_price(-1.0, 0.0, 1.0, &cm).is_err());
    }

    fn porto() -> impl Strategy<Value = GeoPoint> {
        (41.0..41.3f64, -8.8..-8.4f64).prop_map(|(lat, lon)| GeoPoint { lat, lon })
    }

    proptest! {
        #[test]
        fn haversine_metric(a in porto(), b in porto(), c in porto()) {
            let ab = haversine_km(a, b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - haversine_km(b, a).unwrap()).abs() < 1e-9);
            let ac = haversine_km(a, c).unwrap();
            let cb = haversine_km(c, b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-9);
        }

        #[test]
        fn leg_round_trip(a in porto(), b in porto(), speed in 5.0..80.0f64, fuel in 0.01..2.0f64) {
            let cm = CostModel { speed_kmh: speed, fuel_unit_price: fuel, ..CostModel::default() };
            let leg = leg_estimate(a, b, &cm).unwrap();
            prop_assert!(leg.distance_km >= 0.0 && leg.time_s >= 0.0 && leg.cost >= 0.0);
            prop_assert!((leg.time_s * speed / 3600.0 - leg.distance_km).abs() < 1e-9);
            prop_assert!((leg.cost / fuel - leg.distance_km).abs() < 1e-9);
            let h = haversine_km(a, b).unwrap();
            prop_assert!((leg.distance_km - h * cm.detour_factor).abs() < 1e-9);
        }

        #[test]
        fn surge_is_linear(d in 0.0..50.0f64, t in 0.0..5000.0f64, alpha in 0.0..3.0f64, k in 0.1..4.0f64) {
            let cm = CostModel { beta1: 0.8, beta2: 0.004, ..CostModel::default() };
            let base = surge_price(d, t, alpha, &cm).unwrap();
            let scaled_alpha = surge_price(d, t, alpha * k, &cm).unwrap();
            prop_assert!((scaled_alpha - k * base).abs() < 1e-9 * (1.0 + base.abs() * k));
            let cm1 = CostModel { beta1: cm.beta1 * k, beta2: 0.0, ..cm };
            let cm0 = CostModel { beta2: 0.0, ..cm };
            let lhs = surge_price(d, t, alpha, &cm1).unwrap();
            let rhs = k * surge_price(d, t, alpha, &cm0).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
            let cm2 = CostModel { beta1: 0.0, beta2: cm.beta2 * k, ..cm };
            let cm3 = CostModel { beta1: 0.0, ..cm };
            let lhs = surge_price(d, t, alpha, &cm2).unwrap();
            let rhs = k * surge_price(d, t, alpha, &cm3).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
