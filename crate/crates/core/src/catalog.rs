//! Event catalogs: the CSV listing of tornado and null events, the 5-degree
//! region snapping used to group events, and the minimum-gap rule that keeps
//! null events temporally distant from tornadoes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::Label;

/// Exact header required in catalog files.
pub const CATALOG_HEADER: [&str; 5] = ["event_id", "date", "lat", "lon", "label"];

/// One catalog row: an event with its date, location and label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub event_id: String,
    pub date: NaiveDate,
    pub lat: f64,
    pub lon: f64,
    pub label: Label,
}

/// South-west corner of the 5x5 degree grid containing a point, snapped to
/// multiples of 5 degrees. Two events share a region iff their snapped
/// origins match.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionOrigin {
    pub lat0: i32,
    pub lon0: i32,
}

impl RegionOrigin {
    /// Canonical region id used in snapshot files and file names.
    pub fn id(&self) -> String {
        format!("{}_{}", self.lat0, self.lon0)
    }
}

impl fmt::Display for RegionOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.lat0, self.lon0)
    }
}

/// Snap a point to the origin of its containing 5x5 degree grid.
pub fn region_origin(lat: f64, lon: f64) -> RegionOrigin {
    RegionOrigin {
        lat0: (5.0 * (lat / 5.0).floor()) as i32,
        lon0: (5.0 * (lon / 5.0).floor()) as i32,
    }
}

/// Parse a catalog file. The header must be exactly
/// `event_id,date,lat,lon,label`; rows are returned in file order.
pub fn parse_event_catalog(bytes: &[u8]) -> Result<Vec<CatalogEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);

    let headers = reader
        .headers()
        .map_err(|e| syntax(Some(1), format!("unreadable header: {e}")))?;
    if headers.iter().ne(CATALOG_HEADER) {
        return Err(syntax(
            Some(1),
            format!(
                "header must be `{}`, got `{}`",
                CATALOG_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut entries = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(csv::Position::line);
            syntax(line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.len() != CATALOG_HEADER.len() {
            return Err(syntax(
                Some(line),
                format!("expected {} fields, got {}", CATALOG_HEADER.len(), record.len()),
            ));
        }

        let event_id = record[0].to_string();
        if event_id.is_empty() {
            return Err(syntax(Some(line), "empty event_id".into()));
        }
        if let Some(&first_line) = seen.get(&event_id) {
            return Err(Error::DuplicateId {
                event_id,
                first_line,
                second_line: line,
            });
        }
        seen.insert(event_id.clone(), line);

        let date = NaiveDate::parse_from_str(&record[1], "%Y-%m-%d")
            .map_err(|e| syntax(Some(line), format!("bad date `{}`: {e}", &record[1])))?;
        let lat: f64 = record[2]
            .parse()
            .map_err(|e| syntax(Some(line), format!("bad lat `{}`: {e}", &record[2])))?;
        let lon: f64 = record[3]
            .parse()
            .map_err(|e| syntax(Some(line), format!("bad lon `{}`: {e}", &record[3])))?;
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::CoordRange {
                line,
                field: "lat",
                value: lat,
            });
        }
        if !(-180.0..180.0).contains(&lon) {
            return Err(Error::CoordRange {
                line,
                field: "lon",
                value: lon,
            });
        }
        let label: Label = record[4]
            .parse()
            .map_err(|e: String| syntax(Some(line), e))?;

        entries.push(CatalogEntry {
            event_id,
            date,
            lat,
            lon,
            label,
        });
    }
    Ok(entries)
}

/// Serialize a catalog back to CSV (LF line endings). Parse-serialize-parse
/// is a fixed point.
pub fn serialize_catalog(entries: &[CatalogEntry]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(CATALOG_HEADER).expect("in-memory write");
        for e in entries {
            w.write_record([
                e.event_id.as_str(),
                &e.date.format("%Y-%m-%d").to_string(),
                &e.lat.to_string(),
                &e.lon.to_string(),
                e.label.as_str(),
            ])
            .expect("in-memory write");
        }
        w.flush().expect("in-memory flush");
    }
    out
}

/// Collect the dates of tornado events per region.
pub fn tornado_dates_by_region(
    entries: &[CatalogEntry],
) -> BTreeMap<RegionOrigin, BTreeSet<NaiveDate>> {
    let mut map: BTreeMap<RegionOrigin, BTreeSet<NaiveDate>> = BTreeMap::new();
    for e in entries {
        if e.label == Label::Tornado {
            map.entry(region_origin(e.lat, e.lon)).or_default().insert(e.date);
        }
    }
    map
}

/// Keep exactly the null-event candidates whose date differs by at least
/// `min_gap_days` whole days from every tornado date in the same region.
/// "At least" is inclusive: a gap of exactly `min_gap_days` is kept. Input
/// order is preserved. Candidates are expected to be null-labeled.
pub fn select_negatives(
    candidates: &[CatalogEntry],
    tornado_dates: &BTreeMap<RegionOrigin, BTreeSet<NaiveDate>>,
    min_gap_days: u32,
) -> Vec<CatalogEntry> {
    candidates
        .iter()
        .filter(|c| {
            debug_assert_eq!(c.label, Label::NullEvent);
            match tornado_dates.get(&region_origin(c.lat, c.lon)) {
                None => true,
                Some(dates) => dates
                    .iter()
                    .all(|&t| (c.date - t).num_days().unsigned_abs() >= u64::from(min_gap_days)),
            }
        })
        .cloned()
        .collect()
}

/// Apply the gap rule to a whole catalog: tornado entries are always kept,
/// null entries must clear `min_gap_days` from every same-region tornado.
/// Returns the surviving entries in input order and the number filtered out.
pub fn apply_negative_rule(
    entries: &[CatalogEntry],
    min_gap_days: u32,
) -> (Vec<CatalogEntry>, usize) {
    let tornado_dates = tornado_dates_by_region(entries);
    let mut kept = Vec::with_capacity(entries.len());
    let mut filtered = 0usize;
    for e in entries {
        let keep = match e.label {
            Label::Tornado => true,
            Label::NullEvent => {
                !select_negatives(std::slice::from_ref(e), &tornado_dates, min_gap_days)
                    .is_empty()
            }
        };
        if keep {
            kept.push(e.clone());
        } else {
            filtered += 1;
        }
    }
    (kept, filtered)
}

fn syntax(line: Option<u64>, msg: String) -> Error {
    Error::Syntax { line, msg }
}
