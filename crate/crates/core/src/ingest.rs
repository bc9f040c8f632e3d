//! Porto taxi traces, their conversion into tasks, and driver rosters.
//!
//! The trace is the public Porto CSV: one trip per row, with the route as a
//! JSON array of `[lon, lat]` points sampled every 15 seconds. Rows with
//! missing GPS data, fewer than two points, or unparsable fields are dropped
//! and counted in a [`DropReport`]; only a missing header aborts parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{haversine_unchecked, surge_price, CostModel, GeoPoint};
use crate::market::{Driver, Task};

/// Seconds between consecutive polyline points.
pub const SAMPLE_INTERVAL_S: f64 = 15.0;

const COLUMNS: [&str; 9] = [
    "TRIP_ID",
    "CALL_TYPE",
    "ORIGIN_CALL",
    "ORIGIN_STAND",
    "TAXI_ID",
    "TIMESTAMP",
    "DAY_TYPE",
    "MISSING_DATA",
    "POLYLINE",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CallType {
    A,
    B,
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripRecord {
    pub trip_id: String,
    pub call_type: CallType,
    pub origin_call: String,
    pub origin_stand: String,
    pub taxi_id: u64,
    pub start_timestamp: i64,
    pub day_type: String,
    pub polyline: Vec<GeoPoint>,
}

impl TripRecord {
    pub fn duration_s(&self) -> f64 {
        self.polyline.len().saturating_sub(1) as f64 * SAMPLE_INTERVAL_S
    }

    pub fn end_timestamp(&self) -> f64 {
        self.start_timestamp as f64 + self.duration_s()
    }

    /// Great-circle length of the recorded route.
    pub fn distance_km(&self) -> f64 {
        self.polyline.windows(2).map(|w| haversine_unchecked(w[0], w[1])).sum()
    }

    pub fn source(&self) -> GeoPoint {
        self.polyline[0]
    }

    pub fn dest(&self) -> GeoPoint {
        self.polyline[self.polyline.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    MissingData,
    ShortPolyline,
    Malformed,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropReason::MissingData => "missing_data",
            DropReason::ShortPolyline => "short_polyline",
            DropReason::Malformed => "malformed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRow {
    /// 1-based data row number (the header is row 0).
    pub row: usize,
    pub trip_id: String,
    pub reason: DropReason,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub rows: usize,
    pub kept: usize,
    pub dropped: Vec<DroppedRow>,
}

impl DropReport {
    pub fn count(&self, reason: DropReason) -> usize {
        self.dropped.iter().filter(|d| d.reason == reason).count()
    }
}

fn parse_row(rec: &csv::StringRecord, idx: &[usize; 9]) -> std::result::Result<TripRecord, (DropReason, String)> {
    let field = |k: usize| rec.get(idx[k]).ok_or((DropReason::Malformed, format!("missing field {}", COLUMNS[k])));
    let malformed = |what: &str, v: &str| (DropReason::Malformed, format!("bad {what}: {v:?}"));

    match field(7)?.trim().to_ascii_lowercase().as_str() {
        "true" => return Err((DropReason::MissingData, String::new())),
        "false" => {}
        other => return Err(malformed("MISSING_DATA", other)),
    }
    let call_type = match field(1)?.trim() {
        "A" => CallType::A,
        "B" => CallType::B,
        "C" => CallType::C,
        other => return Err(malformed("CALL_TYPE", other)),
    };
    let taxi_id = field(4)?.trim().parse().map_err(|_| malformed("TAXI_ID", rec.get(idx[4]).unwrap_or("")))?;
    let start_timestamp: i64 = field(5)?.trim().parse().map_err(|_| malformed("TIMESTAMP", rec.get(idx[5]).unwrap_or("")))?;
    if start_timestamp <= 0 {
        return Err(malformed("TIMESTAMP", field(5)?));
    }
    let raw: Vec<[f64; 2]> = serde_json::from_str(field(8)?).map_err(|e| (DropReason::Malformed, format!("bad POLYLINE: {e}")))?;
    let polyline = raw
        .iter()
        .map(|&[lon, lat]| GeoPoint::new(lat, lon))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| (DropReason::Malformed, e.to_string()))?;
    if polyline.len() < 2 {
        return Err((DropReason::ShortPolyline, format!("{} points", polyline.len())));
    }
    Ok(TripRecord {
        trip_id: field(0)?.to_string(),
        call_type,
        origin_call: field(2)?.to_string(),
        origin_stand: field(3)?.to_string(),
        taxi_id,
        start_timestamp,
        day_type: field(6)?.to_string(),
        polyline,
    })
}

/// Parses a Porto CSV stream, keeping rows in file order.
pub fn parse_porto<R: Read>(r: R) -> Result<(Vec<TripRecord>, DropReport)> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(r);
    let headers = reader.headers().map_err(|e| Error::Format(format!("unreadable header: {e}")))?.clone();
    let mut idx = [0usize; 9];
    for (k, name) in COLUMNS.iter().enumerate() {
        idx[k] = headers
            .iter()
            .position(|h| h.trim() == *name)
            .ok_or_else(|| Error::Format(format!("header lacks column {name}")))?;
    }
    let mut trips = Vec::new();
    let mut report = DropReport::default();
    for (n, rec) in reader.records().enumerate() {
        report.rows += 1;
        let row = n + 1;
        let outcome = match rec {
            Ok(rec) => parse_row(&rec, &idx).map_err(|e| (rec.get(idx[0]).unwrap_or("").to_string(), e)),
            Err(e) => Err((String::new(), (DropReason::Malformed, e.to_string()))),
        };
        match outcome {
            Ok(t) => trips.push(t),
            Err((trip_id, (reason, detail))) => report.dropped.push(DroppedRow { row, trip_id, reason, detail }),
        }
    }
    report.kept = trips.len();
    Ok((trips, report))
}

/// Writes records in the Porto CSV layout; [`parse_porto`] reads them back
/// unchanged.
pub fn write_porto<W: Write>(trips: &[TripRecord], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().quote_style(csv::QuoteStyle::Always).from_writer(w);
    out.write_record(COLUMNS)?;
    for t in trips {
        let pts: Vec<[f64; 2]> = t.polyline.iter().map(|p| [p.lon, p.lat]).collect();
        out.write_record([
            t.trip_id.as_str(),
            match t.call_type {
                CallType::A => "A",
                CallType::B => "B",
                CallType::C => "C",
            },
            &t.origin_call,
            &t.origin_stand,
            &t.taxi_id.to_string(),
            &t.start_timestamp.to_string(),
            &t.day_type,
            "False",
            &serde_json::to_string(&pts)?,
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a `YYYY-MM-DD` day.
pub fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| Error::InvalidInput(format!("expected a YYYY-MM-DD date, got {s:?}")))
}

/// Trips whose start falls on `date` (UTC).
pub fn filter_date(trips: &[TripRecord], date: NaiveDate) -> Vec<TripRecord> {
    trips.iter().filter(|t| utc_day(t.start_timestamp) == Some(date)).cloned().collect()
}

fn utc_day(ts: i64) -> Option<NaiveDate> {
    DateTime::from_timestamp(ts, 0).map(|d| d.date_naive())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskConversion {
    /// Seconds between publication and the pickup deadline.
    pub publish_lead_s: f64,
    /// Willingness to pay is `price * (1 + U[0, wtp_markup_max))`.
    pub wtp_markup_max: f64,
    pub seed: u64,
}

impl Default for TaskConversion {
    fn default() -> Self {
        TaskConversion { publish_lead_s: 300.0, wtp_markup_max: 0.5, seed: 0 }
    }
}

/// One task per trip: pickup deadline at the trip start, drop-off deadline
/// at its recorded end, priced from the route length and duration.
pub fn trips_to_tasks(trips: &[TripRecord], cm: &CostModel, conv: &TaskConversion) -> Result<Vec<Task>> {
    cm.validate()?;
    if !(conv.publish_lead_s > 0.0 && conv.publish_lead_s.is_finite()) {
        return Err(Error::InvalidInput(format!("publish lead must be positive, got {}", conv.publish_lead_s)));
    }
    if !(conv.wtp_markup_max >= 0.0 && conv.wtp_markup_max.is_finite()) {
        return Err(Error::InvalidInput(format!("wtp markup must be >= 0, got {}", conv.wtp_markup_max)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(conv.seed);
    let mut tasks = Vec::with_capacity(trips.len());
    for t in trips {
        let duration = t.duration_s();
        if duration <= 0.0 {
            continue;
        }
        let distance = t.distance_km();
        let price = surge_price(distance, duration, cm.default_surge, cm)?;
        let markup = if conv.wtp_markup_max > 0.0 { rng.gen_range(0.0..conv.wtp_markup_max) } else { 0.0 };
        let start = t.start_timestamp as f64;
        tasks.push(Task {
            id: tasks.len() as u64 + 1,
            publish_time: start - conv.publish_lead_s,
            source: t.source(),
            dest: t.dest(),
            start_deadline: start,
            end_deadline: start + duration,
            price,
            wtp: price * (1.0 + markup),
            trip_distance_km: Some(distance),
            surge: None,
        });
    }
    Ok(tasks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverModel {
    /// Every driver ends the shift where it started.
    HomeWorkHome,
    /// Source and destination are drawn independently.
    Hitchhiking,
}

impl std::str::FromStr for DriverModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "home-work-home" => Ok(DriverModel::HomeWorkHome),
            "hitchhiking" => Ok(DriverModel::Hitchhiking),
            _ => Err(Error::InvalidInput(format!("unknown driver model {s:?}"))),
        }
    }
}

impl fmt::Display for DriverModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DriverModel::HomeWorkHome => "home-work-home",
            DriverModel::Hitchhiking => "hitchhiking",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    /// Central Porto.
    pub const PORTO: BoundingBox = BoundingBox { min_lat: 41.10, max_lat: 41.20, min_lon: -8.70, max_lon: -8.55 };

    pub fn validate(&self) -> Result<()> {
        let ok = self.min_lat < self.max_lat
            && self.min_lon < self.max_lon
            && GeoPoint::new(self.min_lat, self.min_lon).is_ok()
            && GeoPoint::new(self.max_lat, self.max_lon).is_ok();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate bounding box {self:?}")))
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> GeoPoint {
        GeoPoint {
            lat: rng.gen_range(self.min_lat..self.max_lat),
            lon: rng.gen_range(self.min_lon..self.max_lon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocationSource {
    /// Uniform over the bounding box.
    Uniform,
    /// A random pickup or drop-off point of the reference tasks.
    TaskEndpoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub driver_model: DriverModel,
    pub n_drivers: usize,
    pub bounding_box: BoundingBox,
    pub locations: LocationSource,
    pub shift_length_s: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            driver_model: DriverModel::Hitchhiking,
            n_drivers: 20,
            bounding_box: BoundingBox::PORTO,
            locations: LocationSource::Uniform,
            shift_length_s: 8.0 * 3600.0,
            seed: 0,
        }
    }
}

/// Synthetic drivers with shifts placed uniformly over the tasks' time span.
///
/// Driver `k` is drawn from its own random stream, so the first `n` drivers
/// of a larger roster equal the roster of size `n` for the same seed.
pub fn gen_drivers(cfg: &GeneratorConfig, tasks: &[Task]) -> Result<Vec<Driver>> {
    cfg.bounding_box.validate()?;
    if !(cfg.shift_length_s > 0.0 && cfg.shift_length_s.is_finite()) {
        return Err(Error::InvalidInput(format!("shift length must be positive, got {}", cfg.shift_length_s)));
    }
    if cfg.locations == LocationSource::TaskEndpoints && tasks.is_empty() {
        return Err(Error::InvalidInput("task-endpoint sampling needs reference tasks".into()));
    }
    let span_start = tasks.iter().map(|t| t.start_deadline).fold(f64::INFINITY, f64::min);
    let span_end = tasks.iter().map(|t| t.end_deadline).fold(f64::NEG_INFINITY, f64::max);
    let (span_start, span_end) = if tasks.is_empty() { (0.0, cfg.shift_length_s) } else { (span_start, span_end) };
    let latest_start = (span_end - cfg.shift_length_s).max(span_start);

    let mut drivers = Vec::with_capacity(cfg.n_drivers);
    for k in 0..cfg.n_drivers {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        let place = |rng: &mut ChaCha8Rng| match cfg.locations {
            LocationSource::Uniform => cfg.bounding_box.sample(rng),
            LocationSource::TaskEndpoints => {
                let t = &tasks[rng.gen_range(0..tasks.len())];
                if rng.gen_bool(0.5) {
                    t.source
                } else {
                    t.dest
                }
            }
        };
        let source = place(&mut rng);
        let dest = match cfg.driver_model {
            DriverModel::HomeWorkHome => source,
            DriverModel::Hitchhiking => place(&mut rng),
        };
        let start = if latest_start > span_start { rng.gen_range(span_start..=latest_start) } else { span_start };
        drivers.push(Driver {
            id: k as u64 + 1,
            source,
            dest,
            start_time: start,
            end_time: start + cfg.shift_length_s,
        });
    }
    Ok(drivers)
}

/// One driver per taxi per UTC day, working from the first pickup to the
/// last drop-off of that day.
pub fn roster_from_trips(trips: &[TripRecord]) -> Vec<Driver> {
    let mut days: BTreeMap<(u64, NaiveDate), Vec<&TripRecord>> = BTreeMap::new();
    for t in trips {
        if let Some(day) = utc_day(t.start_timestamp) {
            days.entry((t.taxi_id, day)).or_default().push(t);
        }
    }
    days.into_values()
        .enumerate()
        .map(|(k, mut ts)| {
            ts.sort_by(|a, b| a.end_timestamp().total_cmp(&b.end_timestamp()));
            let first = ts.iter().min_by_key(|t| t.start_timestamp).expect("nonempty day");
            let last = ts[ts.len() - 1];
            Driver {
                id: k as u64 + 1,
                source: first.source(),
                dest: last.dest(),
                start_time: first.start_timestamp as f64,
                end_time: last.end_timestamp(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthTraceConfig {
    pub n_trips: usize,
    pub n_taxis: u64,
    /// Epoch second of the first possible pickup.
    pub day_start: i64,
    pub span_s: f64,
    pub bounding_box: BoundingBox,
    pub trip_km: (f64, f64),
    pub speed_kmh: (f64, f64),
    pub seed: u64,
}

impl Default for SynthTraceConfig {
    fn default() -> Self {
        SynthTraceConfig {
            n_trips: 1000,
            n_taxis: 100,
            // 2013-09-02 00:00:00 UTC.
            day_start: 1_378_080_000,
            span_s: 16.0 * 3600.0,
            bounding_box: BoundingBox::PORTO,
            trip_km: (1.0, 8.0),
            speed_kmh: (15.0, 28.0),
            seed: 0,
        }
    }
}

/// A Porto-format trace of straight-line trips, for experiments without the
/// real dataset.
pub fn synth_trips(cfg: &SynthTraceConfig) -> Result<Vec<TripRecord>> {
    cfg.bounding_box.validate()?;
    let ok = |(a, b): (f64, f64)| a > 0.0 && a <= b && b.is_finite();
    if !ok(cfg.trip_km) || !ok(cfg.speed_kmh) || cfg.n_taxis == 0 || !(cfg.span_s > 0.0) {
        return Err(Error::InvalidInput(format!("bad synthetic trace config {cfg:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bb = &cfg.bounding_box;
    let km_per_deg_lat = 111.195;
    let mut trips = Vec::with_capacity(cfg.n_trips);
    for k in 0..cfg.n_trips {
        let source = bb.sample(&mut rng);
        let km = rng.gen_range(cfg.trip_km.0..=cfg.trip_km.1);
        let heading = rng.gen_range(0.0..std::f64::consts::TAU);
        let dlat = km * heading.cos() / km_per_deg_lat;
        let dlon = km * heading.sin() / (km_per_deg_lat * source.lat.to_radians().cos());
        let dest = GeoPoint {
            lat: (source.lat + dlat).clamp(bb.min_lat, bb.max_lat),
            lon: (source.lon + dlon).clamp(bb.min_lon, bb.max_lon),
        };
        let speed = rng.gen_range(cfg.speed_kmh.0..=cfg.speed_kmh.1);
        let straight = haversine_unchecked(source, dest);
        let steps = ((straight / speed * 3600.0 / SAMPLE_INTERVAL_S).ceil() as usize).max(1);
        let polyline = (0..=steps)
            .map(|i| {
                let f = i as f64 / steps as f64;
                GeoPoint {
                    lat: source.lat + f * (dest.lat - source.lat),
                    lon: source.lon + f * (dest.lon - source.lon),
                }
            })
            .collect();
        trips.push(TripRecord {
            trip_id: format!("S{:06}", k + 1),
            call_type: CallType::C,
            origin_call: String::new(),
            origin_stand: String::new(),
            taxi_id: rng.gen_range(1..=cfg.n_taxis),
            start_timestamp: cfg.day_start + rng.gen_range(0.0..cfg.span_s) as i64,
            day_type: "A".into(),
            polyline,
        });
    }
    trips.sort_by(|a, b| a.start_timestamp.cmp(&b.start_timestamp).then_with(|| a.trip_id.cmp(&b.trip_id)));
    Ok(trips)
}

/// Equal-width bin counts starting at 0; values beyond the last bin land in
/// it, so the counts always sum to `values.len()`.
pub fn histogram(values: &[f64], bin_width: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins.max(1)];
    let last = counts.len() - 1;
    for v in values {
        let b = (v.max(0.0) / bin_width).floor();
        counts[if b.is_finite() { (b as usize).min(last) } else { last }] += 1;
    }
    counts
}

pub fn duration_histogram(trips: &[TripRecord], bin_s: f64, bins: usize) -> Vec<usize> {
    histogram(&trips.iter().map(TripRecord::duration_s).collect::<Vec<_>>(), bin_s, bins)
}

pub fn distance_histogram(trips: &[TripRecord], bin_km: f64, bins: usize) -> Vec<usize> {
    histogram(&trips.iter().map(TripRecord::distance_km).collect::<Vec<_>>(), bin_km, bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str = "TRIP_ID,CALL_TYPE,ORIGIN_CALL,ORIGIN_STAND,TAXI_ID,TIMESTAMP,DAY_TYPE,MISSING_DATA,POLYLINE\n";

    fn parse(body: &str) -> (Vec<TripRecord>, DropReport) {
        parse_porto(format!("{HEADER}{body}").as_bytes()).unwrap()
    }

    #[test]
    fn lon_lat_swap_and_duration() {
        let (trips, rep) = parse("\"1\",\"C\",\"\",\"\",\"20000001\",\"1372636858\",\"A\",\"False\",\"[[-8.61,41.14],[-8.62,41.15]]\"\n");
        assert_eq!(rep.kept, 1);
        assert_eq!(trips[0].source(), GeoPoint { lat: 41.14, lon: -8.61 });
        assert_eq!(trips[0].dest(), GeoPoint { lat: 41.15, lon: -8.62 });
        assert_eq!(trips[0].duration_s(), 15.0);
        let five = "\"2\",\"A\",\"1\",\"\",\"7\",\"1372636858\",\"A\",\"False\",\"[[-8.61,41.14],[-8.61,41.14],[-8.61,41.14],[-8.61,41.14],[-8.61,41.14]]\"\n";
        assert_eq!(parse(five).0[0].duration_s(), 60.0);
    }

    #[test]
    fn drop_rules() {
        let (trips, rep) = parse(concat!(
            "\"1\",\"C\",\"\",\"\",\"5\",\"1372636858\",\"A\",\"True\",\"[[-8.61,41.14],[-8.62,41.15]]\"\n",
            "\"2\",\"C\",\"\",\"\",\"5\",\"1372636858\",\"A\",\"False\",\"[[-8.61,41.14]]\"\n",
            "\"3\",\"C\",\"\",\"\",\"5\",\"1372636858\",\"A\",\"False\",\"[[-8.61,41.14\"\n",
            "\"4\",\"Q\",\"\",\"\",\"5\",\"1372636858\",\"A\",\"False\",\"[]\"\n",
            "\"5\",\"C\"\n",
        ));
        assert!(trips.is_empty());
        assert_eq!(rep.rows, 5);
        let reasons: Vec<DropReason> = rep.dropped.iter().map(|d| d.reason).collect();
        use DropReason::*;
        assert_eq!(reasons, vec![MissingData, ShortPolyline, Malformed, Malformed, Malformed]);
        assert_eq!(rep.count(Malformed), 3);
    }

    #[test]
    fn missing_header_is_fatal() {
        assert!(matches!(parse_porto(&b"a,b,c\n1,2,3\n"[..]), Err(Error::Format(_))));
        assert!(matches!(parse_porto(&b""[..]), Err(Error::Format(_))));
    }

    #[test]
    fn one_km_trip_price() {
        let trip = TripRecord {
            trip_id: "x".into(),
            call_type: CallType::B,
            origin_call: String::new(),
            origin_stand: "15".into(),
            taxi_id: 1,
            start_timestamp: 1_000_000,
            day_type: "A".into(),
            polyline: vec![GeoPoint { lat: 0.0, lon: 0.0 }, GeoPoint { lat: 1.0 / 111.19492664455873, lon: 0.0 }],
        };
        let cm = CostModel { beta1: 1.0, beta2: 0.0, ..CostModel::default() };
        let conv = TaskConversion { wtp_markup_max: 0.0, ..TaskConversion::default() };
        let t = &trips_to_tasks(&[trip], &cm, &conv).unwrap()[0];
        assert!((t.price - 1.0).abs() < 1e-9);
        assert_eq!(t.end_deadline - t.start_deadline, 15.0);
        assert_eq!(t.publish_time, t.start_deadline - 300.0);
        assert_eq!(t.wtp, t.price);
        assert!(trips_to_tasks(&[], &cm, &TaskConversion { publish_lead_s: 0.0, ..conv }).is_err());
    }

    #[test]
    fn driver_models() {
        let tasks = trips_to_tasks(&synth_trips(&SynthTraceConfig { n_trips: 50, ..Default::default() }).unwrap(), &CostModel::default(), &TaskConversion::default()).unwrap();
        let hwh = GeneratorConfig { driver_model: DriverModel::HomeWorkHome, n_drivers: 30, ..Default::default() };
        assert!(gen_drivers(&hwh, &tasks).unwrap().iter().all(|d| d.source == d.dest));
        let hh = GeneratorConfig { n_drivers: 30, ..Default::default() };
        let a = gen_drivers(&hh, &tasks).unwrap();
        assert!(a.iter().all(|d| haversine_unchecked(d.source, d.dest) > 0.0));
        assert_eq!(a, gen_drivers(&hh, &tasks).unwrap());
        let small = gen_drivers(&GeneratorConfig { n_drivers: 10, ..hh }, &tasks).unwrap();
        assert_eq!(&a[..10], &small[..]);
        let lo = tasks.iter().map(|t| t.start_deadline).fold(f64::INFINITY, f64::min);
        assert!(a.iter().all(|d| d.start_time >= lo && d.end_time - d.start_time == hh.shift_length_s));
        let ends = GeneratorConfig { locations: LocationSource::TaskEndpoints, ..hh };
        let b = gen_drivers(&ends, &tasks).unwrap();
        assert!(b.iter().all(|d| tasks.iter().any(|t| t.source == d.source || t.dest == d.source)));
        assert!(gen_drivers(&ends, &[]).is_err());
        let flat = BoundingBox { max_lat: 41.10, ..BoundingBox::PORTO };
        assert!(gen_drivers(&GeneratorConfig { bounding_box: flat, ..hh }, &tasks).is_err());
    }

    #[test]
    fn roster_per_taxi_day() {
        let mut trips = synth_trips(&SynthTraceConfig { n_trips: 40, n_taxis: 3, span_s: 2.0 * 86_400.0, ..Default::default() }).unwrap();
        trips.sort_by_key(|t| t.taxi_id);
        let roster = roster_from_trips(&trips);
        assert!(roster.len() <= 6 && roster.len() >= 3);
        for d in &roster {
            assert!(d.start_time < d.end_time);
        }
        let day = utc_day(trips[0].start_timestamp).unwrap();
        assert!(filter_date(&trips, day).iter().all(|t| utc_day(t.start_timestamp) == Some(day)));
    }

    #[test]
    fn histograms_sum_to_count() {
        let trips = synth_trips(&SynthTraceConfig { n_trips: 200, ..Default::default() }).unwrap();
        assert_eq!(duration_histogram(&trips, 300.0, 8).iter().sum::<usize>(), 200);
        assert_eq!(distance_histogram(&trips, 1.0, 5).iter().sum::<usize>(), 200);
        assert_eq!(histogram(&[0.5, 1.5, 99.0], 1.0, 2), vec![1, 2]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn tasks_respect_invariants(seed in 0u64..1000, markup in 0.0..2.0f64) {
            let trips = synth_trips(&SynthTraceConfig { n_trips: 60, seed, ..Default::default() }).unwrap();
            let cm = CostModel::default();
            let tasks = trips_to_tasks(&trips, &cm, &TaskConversion { wtp_markup_max: markup, seed, ..Default::default() }).unwrap();
            prop_assert_eq!(tasks.len(), trips.len());
            for (t, r) in tasks.iter().zip(&trips) {
                prop_assert!(t.validate().is_ok());
                prop_assert!(t.publish_time < t.start_deadline && t.start_deadline < t.end_deadline);
                prop_assert!(t.wtp >= t.price);
                prop_assert!(r.distance_km() >= haversine_unchecked(r.source(), r.dest()) - 1e-9);
                // Synthetic speeds stay below the model speed, so every trip fits its window.
                prop_assert!(t.in_task_leg(&cm).time_s <= t.window_s());
            }
        }

        #[test]
        fn write_then_parse_is_lossless(seed in 0u64..1000) {
            let trips = synth_trips(&SynthTraceConfig { n_trips: 25, seed, ..Default::default() }).unwrap();
            let mut buf = Vec::new();
            write_porto(&trips, &mut buf).unwrap();
            let (back, rep) = parse_porto(&buf[..]).unwrap();
            prop_assert_eq!(rep.dropped.len(), 0);
            prop_assert_eq!(back, trips);
        }
    }
}
