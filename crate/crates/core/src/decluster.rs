//! Window-based declustering into mainshock events, and extraction of
//! (mainshock, largest aftershock) pairs with left-censored aftershocks.
//!
//! For each shock of magnitude at least `min_mainshock` (in time order) the
//! forward space-time window `(L(m), T(m))` is scanned. If it holds a strictly
//! larger shock the scan moves to the largest one and repeats; magnitude grows
//! on every move, so the chase terminates. A shock whose window holds nothing
//! larger becomes a mainshock and claims every still-unclaimed shock in its
//! window as an aftershock. Windows only look forward in time, equal
//! magnitudes do not move the scan, and a shock already claimed by an earlier
//! event is never relabelled.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, ShockRecord};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

const BIN_WIDTH: f64 = 0.5;
const EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DeclusterError {
    #[error("catalog is not sorted by time")]
    Unsorted,
    #[error("magnitude {mag} is below the first window bin ({lowest})")]
    BelowTable { mag: f64, lowest: f64 },
    #[error("invalid window table: {0}")]
    InvalidTable(String),
    #[error("invalid pair on line {line}: {reason}")]
    InvalidPair { line: u64, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Space-time extent of an aftershock window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    #[serde(rename = "L")]
    pub length_km: f64,
    #[serde(rename = "T")]
    pub duration_days: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub mag_lo: f64,
    pub mag_hi: f64,
    #[serde(rename = "L_km")]
    pub length_km: f64,
    #[serde(rename = "T_days")]
    pub duration_days: f64,
}

/// Magnitude-binned window law, bins 0.5 wide and contiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowTable {
    rows: Vec<WindowRow>,
}

impl WindowTable {
    /// The Gardner–Knopoff windows for magnitudes 5.0 through 8.4.
    pub fn gardner_knopoff() -> Self {
        let raw = [
            (5.0, 5.4, 40.0, 155.0),
            (5.5, 5.9, 47.0, 290.0),
            (6.0, 6.4, 54.0, 510.0),
            (6.5, 6.9, 61.0, 790.0),
            (7.0, 7.4, 70.0, 915.0),
            (7.5, 7.9, 81.0, 960.0),
            (8.0, 8.4, 94.0, 985.0),
        ];
        Self {
            rows: raw
                .iter()
                .map(|&(mag_lo, mag_hi, length_km, duration_days)| WindowRow {
                    mag_lo,
                    mag_hi,
                    length_km,
                    duration_days,
                })
                .collect(),
        }
    }

    pub fn new(rows: Vec<WindowRow>) -> Result<Self, DeclusterError> {
        if rows.is_empty() {
            return Err(DeclusterError::InvalidTable("no rows".into()));
        }
        for r in &rows {
            if !(r.mag_hi >= r.mag_lo && r.mag_hi < r.mag_lo + BIN_WIDTH) {
                return Err(DeclusterError::InvalidTable(format!(
                    "bin [{}, {}] is not within a {BIN_WIDTH} wide bin",
                    r.mag_lo, r.mag_hi
                )));
            }
            if !(r.length_km > 0.0 && r.duration_days > 0.0) {
                return Err(DeclusterError::InvalidTable(format!(
                    "non-positive window at magnitude {}",
                    r.mag_lo
                )));
            }
        }
        for w in rows.windows(2) {
            if ((w[1].mag_lo - w[0].mag_lo) - BIN_WIDTH).abs() > EPS {
                return Err(DeclusterError::InvalidTable(format!(
                    "bins at {} and {} are not contiguous",
                    w[0].mag_lo, w[1].mag_lo
                )));
            }
            if !(w[1].length_km > w[0].length_km && w[1].duration_days > w[0].duration_days) {
                return Err(DeclusterError::InvalidTable(format!(
                    "L and T must increase strictly (bin {})",
                    w[1].mag_lo
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Reads a table with columns `mag_lo,mag_hi,L_km,T_days`.
    pub fn from_csv<R: Read>(input: R) -> Result<Self, DeclusterError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let rows = reader
            .deserialize::<WindowRow>()
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rows)
    }

    pub fn rows(&self) -> &[WindowRow] {
        &self.rows
    }

    /// Window for a magnitude; magnitudes past the last bin use the last row.
    pub fn lookup(&self, mag: f64) -> Result<Window, DeclusterError> {
        let first = self.rows[0].mag_lo;
        if !(mag >= first - EPS) {
            return Err(DeclusterError::BelowTable { mag, lowest: first });
        }
        let idx = (((mag - first) / BIN_WIDTH) + EPS).floor() as usize;
        let row = &self.rows[idx.min(self.rows.len() - 1)];
        Ok(Window {
            length_km: row.length_km,
            duration_days: row.duration_days,
        })
    }
}

impl Default for WindowTable {
    fn default() -> Self {
        Self::gardner_knopoff()
    }
}

/// Great-circle distance between epicenters (haversine, R = 6371 km).
pub fn epicentral_distance(a: &ShockRecord, b: &ShockRecord) -> f64 {
    haversine_km(a.latitude, a.longitude, b.latitude, b.longitude)
}

pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainshockEvent {
    pub mainshock: ShockRecord,
    pub aftershocks: Vec<ShockRecord>,
    pub window: Window,
}

impl MainshockEvent {
    pub fn max_aftershock(&self) -> Option<f64> {
        self.aftershocks.iter().map(|s| s.magnitude).reduce(f64::max)
    }

    /// Largest aftershock magnitude, or `None` (censored) when no aftershock
    /// reaches `censor_threshold`.
    pub fn largest_aftershock(&self, censor_threshold: f64) -> Option<f64> {
        self.max_aftershock().filter(|&m| m >= censor_threshold)
    }
}

/// JSON form of an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub mainshock: ShockRecord,
    pub aftershock_count: usize,
    pub largest_aftershock: Option<f64>,
    pub window: Window,
}

impl EventRecord {
    pub fn new(e: &MainshockEvent, censor_threshold: f64) -> Self {
        Self {
            mainshock: e.mainshock.clone(),
            aftershock_count: e.aftershocks.len(),
            largest_aftershock: e.largest_aftershock(censor_threshold),
            window: e.window,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Free,
    Mainshock,
    Aftershock,
}

/// Indices in the forward window of shock `i`.
fn forward_window<'a>(
    shocks: &'a [ShockRecord],
    i: usize,
    w: Window,
) -> impl Iterator<Item = usize> + 'a {
    let origin = &shocks[i];
    shocks[i + 1..]
        .iter()
        .enumerate()
        .take_while(move |(_, s)| s.time - origin.time <= w.duration_days)
        .filter(move |(_, s)| epicentral_distance(origin, s) <= w.length_km)
        .map(move |(k, _)| i + 1 + k)
}

/// Labels mainshocks of magnitude at least `min_mainshock` and attaches their
/// aftershocks. Events come back in mainshock time order.
pub fn decluster(
    c: &Catalog,
    table: &WindowTable,
    min_mainshock: f64,
) -> Result<Vec<MainshockEvent>, DeclusterError> {
    if !c.is_sorted() {
        return Err(DeclusterError::Unsorted);
    }
    let shocks = &c.shocks;
    let mut labels = vec![Label::Free; shocks.len()];
    let mut events = Vec::new();

    for i in 0..shocks.len() {
        if labels[i] != Label::Free || shocks[i].magnitude < min_mainshock {
            continue;
        }
        let mut current = i;
        let window = loop {
            let w = table.lookup(shocks[current].magnitude)?;
            let larger = forward_window(shocks, current, w)
                .filter(|&j| shocks[j].magnitude > shocks[current].magnitude)
                .fold(None, |best: Option<usize>, j| match best {
                    Some(b) if shocks[b].magnitude >= shocks[j].magnitude => Some(b),
                    _ => Some(j),
                });
            match larger {
                Some(j) => current = j,
                None => break w,
            }
        };
        if labels[current] != Label::Free {
            continue;
        }
        labels[current] = Label::Mainshock;
        let members: Vec<usize> = forward_window(shocks, current, window)
            .filter(|&j| labels[j] == Label::Free)
            .collect();
        for &j in &members {
            labels[j] = Label::Aftershock;
        }
        events.push(MainshockEvent {
            mainshock: shocks[current].clone(),
            aftershocks: members.iter().map(|&j| shocks[j].clone()).collect(),
            window,
        });
    }

    events.sort_by(|a, b| {
        a.mainshock
            .time
            .total_cmp(&b.mainshock.time)
            .then(a.mainshock.id.cmp(&b.mainshock.id))
    });
    Ok(events)
}

/// One (mainshock, largest aftershock) pair; `y == None` means the largest
/// aftershock was below the censoring threshold or absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub x: f64,
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoredPairs {
    pub pairs: Vec<Pair>,
    pub censor_threshold: f64,
}

impl CensoredPairs {
    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn n_observed(&self) -> usize {
        self.pairs.iter().filter(|p| p.y.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.x).collect()
    }

    pub fn observed_ys(&self) -> Vec<f64> {
        self.pairs.iter().filter_map(|p| p.y).collect()
    }
}

/// One pair per event with the largest aftershock censored below `censor_threshold`.
pub fn extract_pairs(events: &[MainshockEvent], censor_threshold: f64) -> CensoredPairs {
    CensoredPairs {
        pairs: events
            .iter()
            .map(|e| Pair {
                x: e.mainshock.magnitude,
                y: e.largest_aftershock(censor_threshold),
            })
            .collect(),
        censor_threshold,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PairRow {
    x: f64,
    y: Option<f64>,
}

/// Writes pairs as `x,y` with an empty `y` for censored entries.
pub fn write_pairs<W: Write>(pairs: &CensoredPairs, out: W) -> Result<(), DeclusterError> {
    let mut w = csv::Writer::from_writer(out);
    for p in &pairs.pairs {
        w.serialize(PairRow { x: p.x, y: p.y })?;
    }
    if pairs.pairs.is_empty() {
        w.write_record(["x", "y"])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `x,y` pairs file; observed `y` must satisfy `threshold <= y <= x`.
pub fn read_pairs<R: Read>(input: R, censor_threshold: f64) -> Result<CensoredPairs, DeclusterError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut pairs = Vec::new();
    for row in reader.deserialize::<PairRow>() {
        let row = row?;
        let line = pairs.len() as u64 + 2;
        if !row.x.is_finite() {
            return Err(DeclusterError::InvalidPair {
                line,
                reason: "x is not finite".into(),
            });
        }
        if let Some(y) = row.y {
            if !(y >= censor_threshold - EPS && y <= row.x + EPS) {
                return Err(DeclusterError::InvalidPair {
                    line,
                    reason: format!("observed y = {y} must lie in [{censor_threshold}, x = {}]", row.x),
                });
            }
        }
        pairs.push(Pair { x: row.x, y: row.y });
    }
    Ok(CensoredPairs {
        pairs,
        censor_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KM_PER_DEG: f64 = 111.194_926_644_558_73;

    fn shock(id: u64, day: f64, km_north: f64, mag: f64) -> ShockRecord {
        ShockRecord {
            id,
            time: day,
            latitude: 40.0 + km_north / KM_PER_DEG,
            longitude: 30.0,
            depth: None,
            magnitude: mag,
        }
    }

    #[test]
    fn table_lookup_examples() {
        let t = WindowTable::gardner_knopoff();
        let w = t.lookup(6.0).unwrap();
        assert_eq!((w.length_km, w.duration_days), (54.0, 510.0));
        let w = t.lookup(5.0).unwrap();
        assert_eq!((w.length_km, w.duration_days), (40.0, 155.0));
        let w = t.lookup(8.7).unwrap();
        assert_eq!((w.length_km, w.duration_days), (94.0, 985.0));
        let w = t.lookup(5.4).unwrap();
        assert_eq!(w.duration_days, 155.0);
        let w = t.lookup(5.5).unwrap();
        assert_eq!(w.duration_days, 290.0);
        assert!(matches!(t.lookup(4.9), Err(DeclusterError::BelowTable { .. })));
    }

    #[test]
    fn table_lookup_is_monotone() {
        let t = WindowTable::gardner_knopoff();
        let mut prev = t.lookup(5.0).unwrap();
        for i in 0..=50 {
            let w = t.lookup(5.0 + 0.1 * i as f64).unwrap();
            assert!(w.length_km >= prev.length_km && w.duration_days >= prev.duration_days);
            prev = w;
        }
    }

    #[test]
    fn table_validation() {
        let mut rows = WindowTable::gardner_knopoff().rows().to_vec();
        rows[3].duration_days = 100.0;
        assert!(WindowTable::new(rows).is_err());
        let mut rows = WindowTable::gardner_knopoff().rows().to_vec();
        rows.remove(2);
        assert!(WindowTable::new(rows).is_err());
        assert!(WindowTable::new(vec![]).is_err());
    }

    #[test]
    fn table_csv_round_trip() {
        let text = "mag_lo,mag_hi,L_km,T_days\n5.0,5.4,40,155\n5.5,5.9,47,290\n";
        let t = WindowTable::from_csv(text.as_bytes()).unwrap();
        assert_eq!(t.rows().len(), 2);
        assert_eq!(t.lookup(7.0).unwrap().length_km, 47.0);
    }

    #[test]
    fn distance_examples() {
        let a = shock(1, 0.0, 0.0, 5.0);
        assert_eq!(epicentral_distance(&a, &a), 0.0);
        let d = haversine_km(0.0, 0.0, 0.0, 1.0);
        assert!((d - 111.195).abs() < 0.01, "{d}");
        let b = ShockRecord {
            latitude: -12.0,
            longitude: 100.0,
            ..a.clone()
        };
        assert_eq!(epicentral_distance(&a, &b), epicentral_distance(&b, &a));
    }

    #[test]
    fn toy_catalog_time_window() {
        let c = Catalog::new(vec![
            shock(1, 0.0, 0.0, 5.5),
            shock(2, 10.0, 5.0, 4.2),
            shock(3, 400.0, 5.0, 4.0),
        ]);
        let events = decluster(&c, &WindowTable::default(), 5.0).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].mainshock.magnitude, 5.5);
        assert_eq!(events[0].aftershocks.len(), 1);
        assert_eq!(events[0].aftershocks[0].magnitude, 4.2);
    }

    #[test]
    fn toy_catalog_pointer_chase() {
        let c = Catalog::new(vec![
            shock(1, 0.0, 0.0, 5.2),
            shock(2, 50.0, 10.0, 6.1),
            shock(3, 100.0, 10.0, 4.5),
        ]);
        let events = decluster(&c, &WindowTable::default(), 5.0).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].mainshock.magnitude, 6.1);
        let mags: Vec<f64> = events[0].aftershocks.iter().map(|s| s.magnitude).collect();
        assert_eq!(mags, vec![4.5]);
    }

    #[test]
    fn equal_magnitude_does_not_chase() {
        let c = Catalog::new(vec![shock(1, 0.0, 0.0, 5.5), shock(2, 5.0, 1.0, 5.5)]);
        let events = decluster(&c, &WindowTable::default(), 5.0).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].mainshock.id, 1);
        assert_eq!(events[0].aftershocks[0].id, 2);
    }

    #[test]
    fn empty_catalog() {
        let events = decluster(&Catalog::default(), &WindowTable::default(), 5.0).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn unsorted_catalog_rejected() {
        let c = Catalog {
            shocks: vec![shock(1, 5.0, 0.0, 5.0), shock(2, 1.0, 0.0, 5.0)],
            ..Catalog::default()
        };
        assert!(matches!(
            decluster(&c, &WindowTable::default(), 5.0),
            Err(DeclusterError::Unsorted)
        ));
    }

    fn event_with(aftershocks: &[f64]) -> MainshockEvent {
        MainshockEvent {
            mainshock: shock(0, 0.0, 0.0, 6.5),
            aftershocks: aftershocks
                .iter()
                .enumerate()
                .map(|(i, &m)| shock(i as u64 + 1, 1.0, 0.0, m))
                .collect(),
            window: WindowTable::default().lookup(6.5).unwrap(),
        }
    }

    #[test]
    fn extract_pairs_examples() {
        let events = vec![
            event_with(&[4.2, 5.8, 3.1]),
            event_with(&[3.1, 3.9]),
            event_with(&[]),
        ];
        let p = extract_pairs(&events, 4.0);
        assert_eq!(p.pairs[0], Pair { x: 6.5, y: Some(5.8) });
        assert_eq!(p.pairs[1].y, None);
        assert_eq!(p.pairs[2].y, None);
        assert_eq!(p.n(), 3);
        assert_eq!(p.n_observed(), 1);
    }

    #[test]
    fn event_record_json_shape() {
        let e = event_with(&[4.2]);
        let json = serde_json::to_value(EventRecord::new(&e, 4.0)).unwrap();
        assert_eq!(json["aftershock_count"], 1);
        assert_eq!(json["largest_aftershock"], 4.2);
        assert_eq!(json["window"]["L"], 61.0);
        assert_eq!(json["window"]["T"], 790.0);
        let censored = serde_json::to_value(EventRecord::new(&event_with(&[3.0]), 4.0)).unwrap();
        assert!(censored["largest_aftershock"].is_null());
    }

    #[test]
    fn pairs_csv_round_trip() {
        let p = CensoredPairs {
            pairs: vec![Pair { x: 6.0, y: Some(5.2) }, Pair { x: 5.1, y: None }],
            censor_threshold: 4.0,
        };
        let mut buf = Vec::new();
        write_pairs(&p, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "x,y\n6.0,5.2\n5.1,\n");
        assert_eq!(read_pairs(buf.as_slice(), 4.0).unwrap(), p);
    }

    #[test]
    fn pairs_csv_rejects_inconsistent_rows() {
        assert!(read_pairs("x,y\n6.0,3.5\n".as_bytes(), 4.0).is_err());
        assert!(read_pairs("x,y\n6.0,6.5\n".as_bytes(), 4.0).is_err());
    }

    fn arb_catalog() -> impl Strategy<Value = Catalog> {
        proptest::collection::vec((0.0f64..2000.0, -60.0f64..60.0, 40u32..75), 0..80).prop_map(|v| {
            Catalog::new(
                v.into_iter()
                    .enumerate()
                    .map(|(i, (day, km, tenths))| shock(i as u64, day.floor(), km, tenths as f64 / 10.0))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn mainshocks_have_no_larger_shock_in_window(c in arb_catalog()) {
            let table = WindowTable::default();
            let events = decluster(&c, &table, 5.0).unwrap();
            for e in &events {
                let w = table.lookup(e.mainshock.magnitude).unwrap();
                let pos = c.shocks.iter().position(|s| s == &e.mainshock).unwrap();
                for s in &c.shocks[pos + 1..] {
                    if s.time - e.mainshock.time <= w.duration_days
                        && epicentral_distance(&e.mainshock, s) <= w.length_km
                    {
                        prop_assert!(s.magnitude <= e.mainshock.magnitude);
                    }
                }
                for a in &e.aftershocks {
                    prop_assert!(a.time >= e.mainshock.time);
                    prop_assert!(a.time - e.mainshock.time <= w.duration_days);
                    prop_assert!(epicentral_distance(&e.mainshock, a) <= w.length_km);
                }
                prop_assert!(e.mainshock.magnitude >= 5.0);
            }
        }

        #[test]
        fn events_partition_a_subset(c in arb_catalog()) {
            let events = decluster(&c, &WindowTable::default(), 5.0).unwrap();
            let mut ids: Vec<u64> = events
                .iter()
                .flat_map(|e| std::iter::once(e.mainshock.id).chain(e.aftershocks.iter().map(|a| a.id)))
                .collect();
            let total = ids.len();
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), total);
            prop_assert!(total <= c.len());
            for w in events.windows(2) {
                prop_assert!(w[0].mainshock.time <= w[1].mainshock.time);
            }
        }
    }
}
