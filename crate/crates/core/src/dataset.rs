//! File formats and dataset assembly.
//!
//! Snapshot file: one JSON document per region-day,
//! `{"format_version":1,"region_id":...,"date":"YYYY-MM-DD","lat0":..,"lon0":..,
//!   "resolution":0.25,"shape":[19,19],"variables":{"temperature":[[..]],...}}`
//! with row 0 the southernmost row and column 0 the westernmost column.
//!
//! Dataset file: one JSON document bundling labeled windows with their
//! snapshots inlined, format version 1.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogEntry, RegionOrigin};
use crate::error::{Error, Result};
use crate::grid::{GridSnapshot, Layer, GRID_SIZE};
use crate::scalar::Real;
use crate::schema::{Label, Variable};
use crate::window::EventWindow;

pub const SNAPSHOT_FORMAT_VERSION: u64 = 1;
pub const DATASET_FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDoc<R> {
    format_version: u64,
    region_id: String,
    date: NaiveDate,
    lat0: f64,
    lon0: f64,
    resolution: f64,
    shape: [usize; 2],
    variables: LayerDoc<R>,
}

/// The seven layers, all required; optional here only so a missing layer can
/// be reported precisely instead of as a generic parse failure.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc<R> {
    temperature: Option<Layer<R>>,
    wind_u: Option<Layer<R>>,
    wind_v: Option<Layer<R>>,
    precipitation: Option<Layer<R>>,
    column_rain_water: Option<Layer<R>>,
    large_scale_rain_rate: Option<Layer<R>>,
    cloud_cover: Option<Layer<R>>,
}

impl<R: Real> LayerDoc<R> {
    fn into_map(self) -> Result<BTreeMap<Variable, Layer<R>>> {
        let fields = [
            (Variable::Temperature, self.temperature),
            (Variable::WindU, self.wind_u),
            (Variable::WindV, self.wind_v),
            (Variable::Precipitation, self.precipitation),
            (Variable::ColumnRainWater, self.column_rain_water),
            (Variable::LargeScaleRainRate, self.large_scale_rain_rate),
            (Variable::CloudCover, self.cloud_cover),
        ];
        let mut map = BTreeMap::new();
        for (variable, layer) in fields {
            let layer =
                layer.ok_or_else(|| Error::MissingVariable(variable.key().to_string()))?;
            map.insert(variable, layer);
        }
        Ok(map)
    }

    fn from_snapshot(s: &GridSnapshot<R>) -> Result<Self> {
        Ok(LayerDoc {
            temperature: Some(s.layer(Variable::Temperature)?.clone()),
            wind_u: Some(s.layer(Variable::WindU)?.clone()),
            wind_v: Some(s.layer(Variable::WindV)?.clone()),
            precipitation: Some(s.layer(Variable::Precipitation)?.clone()),
            column_rain_water: Some(s.layer(Variable::ColumnRainWater)?.clone()),
            large_scale_rain_rate: Some(s.layer(Variable::LargeScaleRainRate)?.clone()),
            cloud_cover: Some(s.layer(Variable::CloudCover)?.clone()),
        })
    }
}

fn snapshot_from_doc<R: Real>(doc: SnapshotDoc<R>) -> Result<GridSnapshot<R>> {
    if doc.format_version != SNAPSHOT_FORMAT_VERSION {
        return Err(Error::Version {
            found: doc.format_version,
            expected: SNAPSHOT_FORMAT_VERSION,
        });
    }
    if doc.shape != [GRID_SIZE, GRID_SIZE] {
        return Err(Error::Shape {
            variable: "shape".into(),
            rows: doc.shape[0],
            cols: doc.shape[1],
        });
    }
    let snapshot = GridSnapshot::new(
        doc.region_id,
        doc.date,
        doc.lat0,
        doc.lon0,
        doc.resolution,
        doc.variables.into_map()?,
    );
    snapshot.validate()?;
    Ok(snapshot)
}

fn snapshot_to_doc<R: Real>(s: &GridSnapshot<R>) -> Result<SnapshotDoc<R>> {
    Ok(SnapshotDoc {
        format_version: SNAPSHOT_FORMAT_VERSION,
        region_id: s.region_id.clone(),
        date: s.date,
        lat0: s.lat0,
        lon0: s.lon0,
        resolution: s.resolution,
        shape: [GRID_SIZE, GRID_SIZE],
        variables: LayerDoc::from_snapshot(s)?,
    })
}

/// Parse and validate one snapshot file.
pub fn parse_snapshot_file<R: Real>(bytes: &[u8]) -> Result<GridSnapshot<R>> {
    let doc: SnapshotDoc<R> = serde_json::from_slice(bytes).map_err(json_syntax)?;
    snapshot_from_doc(doc)
}

/// Serialize a snapshot to the snapshot file format (UTF-8 JSON, trailing
/// newline). Errors if a layer is missing.
pub fn serialize_snapshot<R: Real>(s: &GridSnapshot<R>) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec(&snapshot_to_doc(s)?).expect("snapshot serializes");
    bytes.push(b'\n');
    Ok(bytes)
}

fn json_syntax(e: serde_json::Error) -> Error {
    Error::Syntax {
        line: Some(e.line() as u64),
        msg: e.to_string(),
    }
}

/// A labeled collection of event windows, all with the same day count.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<R> {
    windows: Vec<EventWindow<R>>,
    pub provenance: BTreeMap<String, String>,
}

impl<R: Real> Dataset<R> {
    /// Builds a dataset, enforcing a uniform day count and unique event ids.
    /// Empty datasets are allowed (year splits can produce them).
    pub fn new(
        windows: Vec<EventWindow<R>>,
        provenance: BTreeMap<String, String>,
    ) -> Result<Self> {
        if let Some(first) = windows.first() {
            let d = first.window_days();
            for w in &windows {
                if w.window_days() != d {
                    return Err(Error::Window {
                        event_id: w.event_id.clone(),
                        reason: format!("window has {} days, dataset uses {d}", w.window_days()),
                    });
                }
            }
        }
        let mut ids: Vec<&str> = windows.iter().map(|w| w.event_id.as_str()).collect();
        ids.sort_unstable();
        if let Some(pair) = ids.windows(2).find(|p| p[0] == p[1]) {
            return Err(Error::Window {
                event_id: pair[0].to_string(),
                reason: "duplicate event id in dataset".into(),
            });
        }
        Ok(Dataset {
            windows,
            provenance,
        })
    }

    pub fn windows(&self) -> &[EventWindow<R>] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn window_days(&self) -> Option<usize> {
        self.windows.first().map(EventWindow::window_days)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.windows.iter().map(|w| w.label).collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let doc = DatasetDoc {
            format_version: DATASET_FORMAT_VERSION,
            window_days: self.window_days().unwrap_or(0),
            schema: Variable::ALL.iter().map(|v| v.key().to_string()).collect(),
            provenance: self.provenance.clone(),
            windows: self
                .windows
                .iter()
                .map(|w| {
                    Ok(WindowDoc {
                        event_id: w.event_id.clone(),
                        label: w.label,
                        target_date: w.target_date,
                        snapshots: w
                            .snapshots()
                            .iter()
                            .map(snapshot_to_doc)
                            .collect::<Result<_>>()?,
                    })
                })
                .collect::<Result<_>>()?,
        };
        let mut bytes = serde_json::to_vec(&doc).expect("dataset serializes");
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let doc: DatasetDoc<R> = serde_json::from_slice(bytes).map_err(json_syntax)?;
        if doc.format_version != DATASET_FORMAT_VERSION {
            return Err(Error::Version {
                found: doc.format_version,
                expected: DATASET_FORMAT_VERSION,
            });
        }
        let expected: Vec<String> = Variable::ALL.iter().map(|v| v.key().to_string()).collect();
        if doc.schema != expected {
            return Err(Error::Syntax {
                line: None,
                msg: format!("dataset schema {:?} does not match {:?}", doc.schema, expected),
            });
        }
        let windows = doc
            .windows
            .into_iter()
            .map(|w| {
                let snapshots = w
                    .snapshots
                    .into_iter()
                    .map(snapshot_from_doc)
                    .collect::<Result<Vec<_>>>()?;
                EventWindow::new(w.event_id, w.label, w.target_date, snapshots)
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(windows, doc.provenance)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetDoc<R> {
    format_version: u64,
    window_days: usize,
    schema: Vec<String>,
    provenance: BTreeMap<String, String>,
    windows: Vec<WindowDoc<R>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowDoc<R> {
    event_id: String,
    label: Label,
    target_date: NaiveDate,
    snapshots: Vec<SnapshotDoc<R>>,
}

/// Where assembly gets its snapshots: lookup by snapped region and date.
/// `Ok(None)` means the snapshot is genuinely absent; errors mean the data
/// exists but is unreadable.
pub trait SnapshotSource<R: Real> {
    fn fetch(&self, region: RegionOrigin, date: NaiveDate) -> Result<Option<GridSnapshot<R>>>;

    /// Short description for provenance records.
    fn describe(&self) -> String;
}

/// Conventional on-disk name for one region-day snapshot.
pub fn snapshot_file_name(region_id: &str, date: NaiveDate) -> String {
    format!("{}_{}.json", region_id, date.format("%Y-%m-%d"))
}

/// Reads snapshots from a directory of `{region_id}_{date}.json` files.
pub struct DirectorySource {
    dir: PathBuf,
}

impl DirectorySource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DirectorySource { dir: dir.into() }
    }

    pub fn path_for(&self, region: RegionOrigin, date: NaiveDate) -> PathBuf {
        self.dir.join(snapshot_file_name(&region.id(), date))
    }
}

impl<R: Real> SnapshotSource<R> for DirectorySource {
    fn fetch(&self, region: RegionOrigin, date: NaiveDate) -> Result<Option<GridSnapshot<R>>> {
        let path = self.path_for(region, date);
        if !path.exists() {
            return Ok(None);
        }
        parse_snapshot_file(&fs::read(path)?).map(Some)
    }

    fn describe(&self) -> String {
        format!("dir:{}", self.dir.display())
    }
}

/// In-memory source used by the synthetic generator and tests.
#[derive(Default)]
pub struct MemorySource<R> {
    map: BTreeMap<(RegionOrigin, NaiveDate), GridSnapshot<R>>,
}

impl<R: Real> MemorySource<R> {
    pub fn new() -> Self {
        MemorySource {
            map: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, region: RegionOrigin, snapshot: GridSnapshot<R>) {
        self.map.insert((region, snapshot.date), snapshot);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(RegionOrigin, NaiveDate), &GridSnapshot<R>)> {
        self.map.iter()
    }
}

impl<R: Real> SnapshotSource<R> for MemorySource<R> {
    fn fetch(&self, region: RegionOrigin, date: NaiveDate) -> Result<Option<GridSnapshot<R>>> {
        Ok(self.map.get(&(region, date)).cloned())
    }

    fn describe(&self) -> String {
        format!("memory:{} snapshots", self.map.len())
    }
}

/// Build one labeled window per catalog entry from `window_days` consecutive
/// snapshots ending the day before the event. Entries with any missing
/// snapshot are skipped and counted in provenance under
/// `skipped_incomplete`; an entirely empty result is an error.
pub fn assemble_dataset<R: Real>(
    catalog: &[CatalogEntry],
    source: &dyn SnapshotSource<R>,
    window_days: usize,
    mut provenance: BTreeMap<String, String>,
) -> Result<Dataset<R>> {
    if window_days == 0 || window_days > crate::window::MAX_WINDOW_DAYS {
        return Err(Error::DayRange {
            days: window_days,
            max: crate::window::MAX_WINDOW_DAYS,
        });
    }
    let mut windows = Vec::new();
    let mut skipped = 0usize;
    for entry in catalog {
        let region = crate::catalog::region_origin(entry.lat, entry.lon);
        let mut snapshots = Vec::with_capacity(window_days);
        for back in (1..=window_days).rev() {
            let date = entry
                .date
                .checked_sub_days(Days::new(back as u64))
                .ok_or_else(|| Error::Window {
                    event_id: entry.event_id.clone(),
                    reason: "event date underflows the calendar".into(),
                })?;
            match source.fetch(region, date)? {
                Some(s) => snapshots.push(s),
                None => break,
            }
        }
        if snapshots.len() != window_days {
            skipped += 1;
            continue;
        }
        windows.push(EventWindow::new(
            entry.event_id.clone(),
            entry.label,
            entry.date,
            snapshots,
        )?);
    }
    provenance.insert("source".into(), source.describe());
    provenance.insert("skipped_incomplete".into(), skipped.to_string());
    provenance.insert("window_days".into(), window_days.to_string());
    if windows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(windows, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::test_support::benign_snapshot;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2017, 5, day).unwrap()
    }

    fn valid_bytes() -> Vec<u8> {
        serialize_snapshot(&benign_snapshot("35_-100", d(1))).unwrap()
    }

    #[test]
    fn parses_what_it_serializes() {
        let snap = benign_snapshot("35_-100", d(1));
        let bytes = serialize_snapshot(&snap).unwrap();
        let parsed: GridSnapshot<f64> = parse_snapshot_file(&bytes).unwrap();
        assert_eq!(parsed, snap);
    }

    #[test]
    fn missing_layer_names_the_variable() {
        let mut doc: serde_json::Value = serde_json::from_slice(&valid_bytes()).unwrap();
        doc["variables"].as_object_mut().unwrap().remove("cloud_cover");
        let bytes = serde_json::to_vec(&doc).unwrap();
        match parse_snapshot_file::<f64>(&bytes) {
            Err(Error::MissingVariable(v)) => assert_eq!(v, "cloud_cover"),
            other => panic!("expected MissingVariable, got {other:?}"),
        }
    }

    #[test]
    fn layer_with_one_value_deleted_is_a_shape_error() {
        let mut doc: serde_json::Value = serde_json::from_slice(&valid_bytes()).unwrap();
        let last_row = doc["variables"]["temperature"][18].as_array_mut().unwrap();
        last_row.pop(); // 360 values left
        let bytes = serde_json::to_vec(&doc).unwrap();
        assert!(matches!(
            parse_snapshot_file::<f64>(&bytes),
            Err(Error::Shape { cols: 18, .. })
        ));
    }

    #[test]
    fn unknown_keys_and_malformed_json_are_syntax_errors() {
        let mut doc: serde_json::Value = serde_json::from_slice(&valid_bytes()).unwrap();
        doc["variables"]["vorticity"] = serde_json::json!([[0.0]]);
        let bytes = serde_json::to_vec(&doc).unwrap();
        assert!(matches!(
            parse_snapshot_file::<f64>(&bytes),
            Err(Error::Syntax { .. })
        ));

        assert!(matches!(
            parse_snapshot_file::<f64>(b"{not json"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn wrong_version_is_rejected() {
        let mut doc: serde_json::Value = serde_json::from_slice(&valid_bytes()).unwrap();
        doc["format_version"] = serde_json::json!(9);
        let bytes = serde_json::to_vec(&doc).unwrap();
        assert!(matches!(
            parse_snapshot_file::<f64>(&bytes),
            Err(Error::Version { found: 9, .. })
        ));
    }

    fn catalog_entry(id: &str, day: u32, label: Label) -> CatalogEntry {
        CatalogEntry {
            event_id: id.into(),
            date: d(day),
            lat: 35.2,
            lon: -97.4,
            label,
        }
    }

    fn filled_source(days: std::ops::RangeInclusive<u32>) -> MemorySource<f64> {
        let region = crate::catalog::region_origin(35.2, -97.4);
        let mut source = MemorySource::new();
        for day in days {
            source.insert(region, benign_snapshot(&region.id(), d(day)));
        }
        source
    }

    #[test]
    fn assembles_window_oldest_first() {
        let source = filled_source(5..=9);
        let ds = assemble_dataset(
            &[catalog_entry("e1", 10, Label::Tornado)],
            &source,
            5,
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(ds.len(), 1);
        let w = &ds.windows()[0];
        assert_eq!(w.window_days(), 5);
        assert_eq!(w.snapshots()[0].date, d(5));
        assert_eq!(w.snapshots()[4].date, d(9));
        assert_eq!(ds.provenance["skipped_incomplete"], "0");
    }

    #[test]
    fn missing_day_skips_entry_and_empty_result_errors() {
        let region = crate::catalog::region_origin(35.2, -97.4);
        let mut source = filled_source(5..=9);
        source.map.remove(&(region, d(7))); // day i-3
        let err = assemble_dataset(
            &[catalog_entry("e1", 10, Label::Tornado)],
            &source,
            5,
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn one_day_windows_hold_only_day_before() {
        let source = filled_source(5..=9);
        let catalog = vec![
            catalog_entry("e1", 7, Label::Tornado),
            catalog_entry("e2", 8, Label::NullEvent),
            catalog_entry("e3", 9, Label::NullEvent),
        ];
        let ds = assemble_dataset(&catalog, &source, 1, BTreeMap::new()).unwrap();
        assert_eq!(ds.len(), 3);
        for (w, entry) in ds.windows().iter().zip(&catalog) {
            assert_eq!(w.window_days(), 1);
            assert_eq!(w.snapshots()[0].date, entry.date.pred_opt().unwrap());
        }
    }

    #[test]
    fn dataset_round_trips_through_bytes() {
        let source = filled_source(5..=9);
        let ds = assemble_dataset(
            &[
                catalog_entry("e1", 8, Label::Tornado),
                catalog_entry("e2", 10, Label::NullEvent),
            ],
            &source,
            3,
            BTreeMap::new(),
        )
        .unwrap();
        let bytes = ds.to_bytes().unwrap();
        let back = Dataset::<f64>::from_bytes(&bytes).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn dataset_saves_and_loads_from_disk() {
        let source = filled_source(5..=9);
        let ds = assemble_dataset(
            &[catalog_entry("e1", 8, Label::Tornado), catalog_entry("e2", 9, Label::NullEvent)],
            &source,
            2,
            BTreeMap::new(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.json");
        ds.save(&path).unwrap();
        assert_eq!(Dataset::<f64>::load(&path).unwrap(), ds);
    }

    #[test]
    fn duplicate_event_ids_rejected() {
        let source = filled_source(5..=9);
        let err = assemble_dataset(
            &[
                catalog_entry("e1", 8, Label::Tornado),
                catalog_entry("e1", 9, Label::NullEvent),
            ],
            &source,
            2,
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Window { .. }));
    }
}
