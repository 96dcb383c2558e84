//! Earthquake catalogs: parsing, validation, region filtering and CSV output.
//!
//! Times are fractional days since 1970-01-01T00:00Z, built from whole
//! milliseconds so that a serialize/parse cycle reproduces them exactly.
//! Magnitudes live on the 0.1 grid; values within 0.005 of it are snapped,
//! anything farther off is rejected.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const MS_PER_DAY: f64 = 86_400_000.0;
const GRID_SNAP: f64 = 0.005;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("empty input: no header row")]
    Empty,
    #[error("schema error: column '{0}' not found in header")]
    MissingColumn(String),
    #[error("line {line}: field '{field}' = '{value}': {reason}")]
    Row {
        line: u64,
        field: String,
        value: String,
        reason: String,
    },
    #[error("invalid region bounds: {0}")]
    InvalidBounds(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockRecord {
    pub id: u64,
    /// Days since 1970-01-01T00:00Z.
    pub time: f64,
    pub latitude: f64,
    pub longitude: f64,
    pub depth: Option<f64>,
    pub magnitude: f64,
}

/// Closed latitude/longitude box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Region {
    pub fn new(lat_min: f64, lat_max: f64, lon_min: f64, lon_max: f64) -> Result<Self, CatalogError> {
        let r = Self {
            lat_min,
            lat_max,
            lon_min,
            lon_max,
        };
        r.validate()?;
        Ok(r)
    }

    /// The study area used for the North Anatolian Fault Zone:
    /// 39–42°N, 26–40°E.
    pub fn nafz() -> Self {
        Self {
            lat_min: 39.0,
            lat_max: 42.0,
            lon_min: 26.0,
            lon_max: 40.0,
        }
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        if !(self.lat_min < self.lat_max) {
            return Err(CatalogError::InvalidBounds(format!(
                "lat_min {} must be below lat_max {}",
                self.lat_min, self.lat_max
            )));
        }
        if !(self.lon_min < self.lon_max) {
            return Err(CatalogError::InvalidBounds(format!(
                "lon_min {} must be below lon_max {}",
                self.lon_min, self.lon_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }
}

/// Column names used to read and write catalog CSV files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub time: String,
    pub latitude: String,
    pub longitude: String,
    pub magnitude: String,
    pub depth: Option<String>,
    pub id: Option<String>,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            time: "time".into(),
            latitude: "latitude".into(),
            longitude: "longitude".into(),
            magnitude: "magnitude".into(),
            depth: None,
            id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Catalog {
    /// Sorted by time, ties by id.
    pub shocks: Vec<ShockRecord>,
    pub bounds: Option<Region>,
    pub min_magnitude: Option<f64>,
}

impl Catalog {
    /// Builds a catalog, sorting shocks by (time, id).
    pub fn new(mut shocks: Vec<ShockRecord>) -> Self {
        shocks.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.id.cmp(&b.id)));
        Self {
            shocks,
            bounds: None,
            min_magnitude: None,
        }
    }

    pub fn len(&self) -> usize {
        self.shocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shocks.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.shocks
            .windows(2)
            .all(|w| (w[0].time, w[0].id) <= (w[1].time, w[1].id))
    }

    /// Rows sharing (time, latitude, longitude, magnitude) with an earlier row.
    /// Duplicates are kept; this only counts them.
    pub fn duplicate_count(&self) -> usize {
        let mut keys: Vec<[u64; 4]> = self
            .shocks
            .iter()
            .map(|s| {
                [
                    s.time.to_bits(),
                    s.latitude.to_bits(),
                    s.longitude.to_bits(),
                    s.magnitude.to_bits(),
                ]
            })
            .collect();
        keys.sort_unstable();
        keys.windows(2).filter(|w| w[0] == w[1]).count()
    }
}

/// Keeps the shocks inside the closed box with magnitude at least `min_magnitude`.
pub fn filter_region(c: &Catalog, bounds: Region, min_magnitude: f64) -> Result<Catalog, CatalogError> {
    bounds.validate()?;
    let shocks = c
        .shocks
        .iter()
        .filter(|s| bounds.contains(s.latitude, s.longitude) && s.magnitude >= min_magnitude)
        .cloned()
        .collect();
    Ok(Catalog {
        shocks,
        bounds: Some(bounds),
        min_magnitude: Some(c.min_magnitude.map_or(min_magnitude, |m| m.max(min_magnitude))),
    })
}

/// Snaps a magnitude onto the 0.1 grid, or explains why it cannot be.
pub fn snap_magnitude(m: f64) -> Result<f64, String> {
    if !m.is_finite() {
        return Err("not a finite number".into());
    }
    if m < 0.0 {
        return Err("magnitude must be non-negative".into());
    }
    let tenths = (m * 10.0).round();
    if (m - tenths / 10.0).abs() > GRID_SNAP + 1e-12 {
        return Err("magnitude is not on the 0.1 grid".into());
    }
    Ok(tenths / 10.0)
}

/// Parses an ISO-8601 timestamp into days since the Unix epoch, at millisecond
/// resolution. Times without an offset are taken as UTC.
pub fn parse_time(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let millis = if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        dt.timestamp_millis()
    } else if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f") {
        dt.and_utc().timestamp_millis()
    } else if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f") {
        dt.and_utc().timestamp_millis()
    } else if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        d.and_hms_opt(0, 0, 0)
            .expect("midnight exists")
            .and_utc()
            .timestamp_millis()
    } else {
        return Err("not an ISO-8601 timestamp".into());
    };
    Ok(millis as f64 / MS_PER_DAY)
}

/// Formats days since the epoch as `YYYY-MM-DDTHH:MM:SS.sssZ`.
pub fn format_time(days: f64) -> String {
    let millis = (days * MS_PER_DAY).round() as i64;
    match DateTime::from_timestamp_millis(millis) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string(),
        None => format!("{days}"),
    }
}

struct Columns {
    time: usize,
    lat: usize,
    lon: usize,
    mag: usize,
    depth: Option<usize>,
    id: Option<usize>,
}

fn locate(headers: &csv::StringRecord, schema: &Schema) -> Result<Columns, CatalogError> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CatalogError::MissingColumn(name.to_string()))
    };
    Ok(Columns {
        time: find(&schema.time)?,
        lat: find(&schema.latitude)?,
        lon: find(&schema.longitude)?,
        mag: find(&schema.magnitude)?,
        depth: schema.depth.as_deref().map(find).transpose()?,
        id: schema.id.as_deref().map(find).transpose()?,
    })
}

/// Parses comma-separated text with a header row. Lines starting with `#`
/// are comments.
///
/// When the schema maps no id column, ids are assigned 1.. in sorted order so
/// that re-reading a serialized catalog reproduces them.
pub fn parse_catalog<R: Read>(input: R, schema: &Schema) -> Result<Catalog, CatalogError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CatalogError::Empty);
    }
    let cols = locate(&headers, schema)?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |idx: usize, name: &str| -> Result<&str, CatalogError> {
            record.get(idx).ok_or_else(|| CatalogError::Row {
                line,
                field: name.to_string(),
                value: String::new(),
                reason: "missing field".into(),
            })
        };
        let bad = |name: &str, value: &str, reason: String| CatalogError::Row {
            line,
            field: name.to_string(),
            value: value.to_string(),
            reason,
        };
        let number = |idx: usize, name: &str| -> Result<f64, CatalogError> {
            let raw = field(idx, name)?;
            raw.parse::<f64>()
                .map_err(|e| bad(name, raw, e.to_string()))
        };

        let raw_time = field(cols.time, &schema.time)?;
        let time = parse_time(raw_time).map_err(|r| bad(&schema.time, raw_time, r))?;
        let latitude = number(cols.lat, &schema.latitude)?;
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(bad(&schema.latitude, &latitude.to_string(), "outside [-90, 90]".into()));
        }
        let longitude = number(cols.lon, &schema.longitude)?;
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(bad(&schema.longitude, &longitude.to_string(), "outside [-180, 180]".into()));
        }
        let raw_mag = field(cols.mag, &schema.magnitude)?;
        let magnitude = raw_mag
            .parse::<f64>()
            .map_err(|e| e.to_string())
            .and_then(snap_magnitude)
            .map_err(|r| bad(&schema.magnitude, raw_mag, r))?;
        let depth = match (cols.depth, schema.depth.as_deref()) {
            (Some(idx), Some(name)) if !field(idx, name)?.is_empty() => Some(number(idx, name)?),
            _ => None,
        };
        let id = match (cols.id, schema.id.as_deref()) {
            (Some(idx), Some(name)) => {
                let raw = field(idx, name)?;
                Some(raw.parse::<u64>().map_err(|e| bad(name, raw, e.to_string()))?)
            }
            _ => None,
        };
        rows.push((
            id,
            ShockRecord {
                id: 0,
                time,
                latitude,
                longitude,
                depth,
                magnitude,
            },
        ));
    }

    if cols.id.is_some() {
        let shocks = rows
            .into_iter()
            .map(|(id, mut s)| {
                s.id = id.expect("id column mapped");
                s
            })
            .collect();
        return Ok(Catalog::new(shocks));
    }
    // stable sort keeps file order for simultaneous rows
    rows.sort_by(|a, b| a.1.time.total_cmp(&b.1.time));
    let shocks = rows
        .into_iter()
        .enumerate()
        .map(|(i, (_, mut s))| {
            s.id = i as u64 + 1;
            s
        })
        .collect();
    Ok(Catalog::new(shocks))
}

/// Writes a catalog with the given schema: ISO-8601 times, one-decimal magnitudes.
pub fn write_catalog<W: Write>(c: &Catalog, schema: &Schema, out: W) -> Result<(), CatalogError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = Vec::new();
    if let Some(id) = &schema.id {
        header.push(id);
    }
    header.extend([
        schema.time.as_str(),
        schema.latitude.as_str(),
        schema.longitude.as_str(),
    ]);
    if let Some(depth) = &schema.depth {
        header.push(depth);
    }
    header.push(&schema.magnitude);
    w.write_record(&header)?;

    for s in &c.shocks {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        if schema.id.is_some() {
            row.push(s.id.to_string());
        }
        row.push(format_time(s.time));
        row.push(s.latitude.to_string());
        row.push(s.longitude.to_string());
        if schema.depth.is_some() {
            row.push(s.depth.map(|d| d.to_string()).unwrap_or_default());
        }
        row.push(format!("{:.1}", s.magnitude));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
