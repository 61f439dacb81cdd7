//! Quadrant mean/std featurization of event windows.
//!
//! Each 19x19 layer is split into four quadrants after row and column index
//! 9, so the center row and column belong to the low-index (NW/NE and
//! NW/SW) quadrants. Quadrant names follow matrix index order: NW is rows
//! 0..=9, cols 0..=9. Per quadrant the arithmetic mean and the population
//! (divide by N) standard deviation are computed, giving
//! `days * 7 variables * 4 quadrants * 2 statistics` features per window.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::{GridSnapshot, Layer, GRID_SIZE};
use crate::scalar::{r64, Real};
use crate::schema::{Variable, VARIABLE_COUNT};
use crate::window::EventWindow;

pub const QUADRANT_COUNT: usize = 4;
pub const STAT_COUNT: usize = 2;

/// Features contributed by one day of one window.
pub const FEATURES_PER_DAY: usize = VARIABLE_COUNT * QUADRANT_COUNT * STAT_COUNT;

/// Scale floor applied when standardizing, so constant features do not
/// divide by zero.
pub const SCALE_EPSILON: f64 = 1e-9;

/// Quadrants in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadrantId {
    Nw,
    Ne,
    Sw,
    Se,
}

impl QuadrantId {
    pub const ALL: [QuadrantId; QUADRANT_COUNT] =
        [QuadrantId::Nw, QuadrantId::Ne, QuadrantId::Sw, QuadrantId::Se];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Cell values of one layer grouped by quadrant (row-major within each).
pub struct QuadrantCells<R> {
    cells: [Vec<R>; QUADRANT_COUNT],
}

impl<R: Real> QuadrantCells<R> {
    pub fn get(&self, q: QuadrantId) -> &[R] {
        &self.cells[q.index()]
    }
}

/// Split a 19x19 layer into the four quadrants. Sizes are NW 10x10,
/// NE 10x9, SW 9x10, SE 9x9; together they partition all 361 cells.
pub fn split_quadrants<R: Real>(layer: &Layer<R>) -> Result<QuadrantCells<R>> {
    if let Err((rows, cols)) = layer.check_shape() {
        return Err(Error::Shape {
            variable: "layer".into(),
            rows,
            cols,
        });
    }
    const SPLIT: usize = GRID_SIZE / 2 + 1; // first row/col of the high-index half
    let mut cells: [Vec<R>; QUADRANT_COUNT] = [
        Vec::with_capacity(SPLIT * SPLIT),
        Vec::with_capacity(SPLIT * (GRID_SIZE - SPLIT)),
        Vec::with_capacity((GRID_SIZE - SPLIT) * SPLIT),
        Vec::with_capacity((GRID_SIZE - SPLIT) * (GRID_SIZE - SPLIT)),
    ];
    for (r, row) in layer.rows().iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let q = match (r < SPLIT, c < SPLIT) {
                (true, true) => QuadrantId::Nw,
                (true, false) => QuadrantId::Ne,
                (false, true) => QuadrantId::Sw,
                (false, false) => QuadrantId::Se,
            };
            cells[q.index()].push(v);
        }
    }
    Ok(QuadrantCells { cells })
}

/// Arithmetic mean and population standard deviation of a cell set, via
/// Welford's online recurrence with a fixed index-ascending accumulation
/// order.
pub fn quadrant_stats<R: Real>(cells: &[R]) -> Result<(R, R)> {
    if cells.is_empty() {
        return Err(Error::EmptyQuadrant);
    }
    let mut mean = R::zero();
    let mut m2 = R::zero();
    let mut count = R::zero();
    for &v in cells {
        count += R::one();
        let delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }
    Ok((mean, (m2 / count).sqrt()))
}

/// Index layout of a feature vector: day-major (oldest day first), then
/// variable in schema order, then quadrant, then statistic (mean, std).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub window_days: usize,
}

impl FeatureLayout {
    pub fn len(&self) -> usize {
        self.window_days * FEATURES_PER_DAY
    }

    pub fn is_empty(&self) -> bool {
        self.window_days == 0
    }

    pub fn index(&self, day: usize, variable: Variable, quadrant: QuadrantId, stat: usize) -> usize {
        ((day * VARIABLE_COUNT + variable.index()) * QUADRANT_COUNT + quadrant.index())
            * STAT_COUNT
            + stat
    }
}

/// A window's features in the canonical layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<R> {
    pub values: Vec<R>,
    pub layout: FeatureLayout,
}

/// Featurize a run of snapshots (oldest first). This is the single
/// featurization path shared by batch evaluation and the streaming monitor.
pub fn features_from_snapshots<R: Real>(snapshots: &[GridSnapshot<R>]) -> Result<FeatureVector<R>> {
    let layout = FeatureLayout {
        window_days: snapshots.len(),
    };
    let mut values = Vec::with_capacity(layout.len());
    for snap in snapshots {
        for variable in Variable::ALL {
            let quads = split_quadrants(snap.layer(variable)?)?;
            for q in QuadrantId::ALL {
                let (mean, std) = quadrant_stats(quads.get(q))?;
                values.push(mean);
                values.push(std);
            }
        }
    }
    Ok(FeatureVector { values, layout })
}

/// Featurize one event window.
pub fn build_feature_vector<R: Real>(window: &EventWindow<R>) -> Result<FeatureVector<R>> {
    features_from_snapshots(window.snapshots())
}

/// Featurize a whole dataset, windows in input order.
pub fn featurize_dataset<R: Real>(dataset: &Dataset<R>) -> Result<Vec<Vec<R>>> {
    dataset
        .windows()
        .iter()
        .map(|w| Ok(build_feature_vector(w)?.values))
        .collect()
}

/// Per-dimension mean and scale fitted on training data; scales are floored
/// at [`SCALE_EPSILON`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams<R> {
    pub mean: Vec<R>,
    pub scale: Vec<R>,
}

/// Fit per-column mean and population standard deviation, flooring the
/// scale at [`SCALE_EPSILON`].
pub fn fit_standardizer<R: Real>(rows: &[Vec<R>]) -> Result<StandardizationParams<R>> {
    let first = rows.first().ok_or(Error::EmptyInput)?;
    let dim = first.len();
    for row in rows {
        if row.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    let n = r64::<R>(rows.len() as f64);
    let eps = r64::<R>(SCALE_EPSILON);
    let mut mean = vec![R::zero(); dim];
    for row in rows {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut scale = vec![R::zero(); dim];
    for row in rows {
        for ((s, &v), &m) in scale.iter_mut().zip(row).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    for s in &mut scale {
        *s = (*s / n).sqrt().max(eps);
    }
    Ok(StandardizationParams { mean, scale })
}

/// Standardize one vector: `(x - mean) / scale` per dimension.
pub fn apply_standardizer<R: Real>(params: &StandardizationParams<R>, x: &[R]) -> Result<Vec<R>> {
    if x.len() != params.mean.len() {
        return Err(Error::LengthMismatch {
            expected: params.mean.len(),
            got: x.len(),
        });
    }
    Ok(x.iter()
        .zip(&params.mean)
        .zip(&params.scale)
        .map(|((&v, &m), &s)| (v - m) / s)
        .collect())
}

/// Write the dataset's feature matrix as CSV with header
/// `event_id,label,f0,...,f{n-1}`, features in canonical layout order.
pub fn export_features_csv<R: Real, W: Write>(dataset: &Dataset<R>, mut out: W) -> Result<()> {
    let features = featurize_dataset(dataset)?;
    let width = features.first().map_or(0, Vec::len);
    let mut header = String::from("event_id,label");
    for j in 0..width {
        header.push_str(&format!(",f{j}"));
    }
    header.push('\n');
    out.write_all(header.as_bytes())?;
    for (w, row) in dataset.windows().iter().zip(&features) {
        let mut line = format!("{},{}", w.event_id, w.label);
        for v in row {
            line.push_str(&format!(",{v}"));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::test_support::benign_snapshot;
    use crate::schema::Label;
    use chrono::NaiveDate;
    use std::collections::BTreeMap;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2017, 5, day).unwrap()
    }

    #[test]
    fn quadrant_sizes_partition_the_grid() {
        let layer = Layer::from_fn(|r, c| (r * GRID_SIZE + c) as f64);
        let quads = split_quadrants(&layer).unwrap();
        let sizes: Vec<usize> = QuadrantId::ALL.iter().map(|&q| quads.get(q).len()).collect();
        assert_eq!(sizes, [100, 90, 90, 81]);
        assert_eq!(sizes.iter().sum::<usize>(), 361);
        assert!(quads.get(QuadrantId::Nw).contains(&0.0));
        assert!(quads.get(QuadrantId::Se).contains(&360.0));
    }

    #[test]
    fn split_rejects_bad_shape() {
        let layer = Layer::new(vec![vec![0.0; GRID_SIZE]; GRID_SIZE - 1]);
        assert!(matches!(split_quadrants(&layer), Err(Error::Shape { .. })));
    }

    #[test]
    fn stats_match_hand_arithmetic() {
        let (mean, std) = quadrant_stats(&[5.0f64; 12]).unwrap();
        assert_eq!((mean, std), (5.0, 0.0));

        let (mean, std) = quadrant_stats(&[1.0f64, 3.0]).unwrap();
        assert_eq!(mean, 2.0);
        assert_eq!(std, 1.0); // population std: sqrt(((1-2)^2 + (3-2)^2)/2)

        assert!(matches!(
            quadrant_stats::<f64>(&[]),
            Err(Error::EmptyQuadrant)
        ));
    }

    fn constant_window(day_values: &[f64]) -> EventWindow<f64> {
        // each day: every variable constant at day_values[k] (cloud cover
        // needs [0,1]; keep values within it in callers)
        let target = d(10);
        let snaps = day_values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let date = d(10 - day_values.len() as u32 + k as u32);
                let mut layers = BTreeMap::new();
                for var in Variable::ALL {
                    layers.insert(var, Layer::constant(v));
                }
                GridSnapshot::new("35_-100", date, 35.0, -100.0, 0.25, layers)
            })
            .collect();
        EventWindow::new("w", Label::Tornado, target, snaps).unwrap()
    }

    #[test]
    fn five_day_window_has_280_features() {
        let snaps: Vec<_> = (5..=9).map(|day| benign_snapshot("35_-100", d(day))).collect();
        let w = EventWindow::new("w", Label::Tornado, d(10), snaps).unwrap();
        let fv = build_feature_vector(&w).unwrap();
        assert_eq!(fv.values.len(), 280);
        assert_eq!(fv.layout.len(), 280);
    }

    #[test]
    fn constant_layers_give_constant_means_and_zero_stds() {
        let w = constant_window(&[0.5]);
        let fv = build_feature_vector(&w).unwrap();
        assert_eq!(fv.values.len(), 56);
        for pair in fv.values.chunks(2) {
            assert_eq!(pair[0], 0.5);
            assert_eq!(pair[1], 0.0);
        }
    }

    #[test]
    fn two_day_window_is_day_major_oldest_first() {
        let w = constant_window(&[0.0, 1.0]);
        let fv = build_feature_vector(&w).unwrap();
        assert_eq!(fv.values.len(), 112);
        for pair in fv.values[..56].chunks(2) {
            assert_eq!((pair[0], pair[1]), (0.0, 0.0));
        }
        for pair in fv.values[56..].chunks(2) {
            assert_eq!((pair[0], pair[1]), (1.0, 0.0));
        }
    }

    #[test]
    fn layout_index_is_consistent() {
        let layout = FeatureLayout { window_days: 5 };
        assert_eq!(layout.index(0, Variable::Temperature, QuadrantId::Nw, 0), 0);
        assert_eq!(layout.index(0, Variable::Temperature, QuadrantId::Nw, 1), 1);
        assert_eq!(layout.index(4, Variable::CloudCover, QuadrantId::Se, 1), 279);
    }

    #[test]
    fn standardizer_single_vector_floors_scale() {
        let p = fit_standardizer(&[vec![2.0f64, -3.0]]).unwrap();
        assert_eq!(p.mean, vec![2.0, -3.0]);
        assert_eq!(p.scale, vec![SCALE_EPSILON, SCALE_EPSILON]);
    }

    #[test]
    fn standardizer_symmetric_pair() {
        let v = vec![1.5f64, -2.0, 0.0];
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let p = fit_standardizer(&[v.clone(), neg]).unwrap();
        assert_eq!(p.mean, vec![0.0, 0.0, 0.0]);
        assert_eq!(p.scale, vec![1.5, 2.0, SCALE_EPSILON]);
    }

    #[test]
    fn apply_standardizer_identities() {
        let p = StandardizationParams {
            mean: vec![1.0f64, 2.0],
            scale: vec![1.0, 1.0],
        };
        assert_eq!(apply_standardizer(&p, &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);

        let id = StandardizationParams {
            mean: vec![0.0f64, 0.0],
            scale: vec![1.0, 1.0],
        };
        assert_eq!(apply_standardizer(&id, &[3.5, -1.25]).unwrap(), vec![3.5, -1.25]);

        assert!(matches!(
            apply_standardizer(&id, &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn csv_export_has_expected_header_and_rows() {
        let w = constant_window(&[0.5]);
        let ds = Dataset::new(vec![w], BTreeMap::new()).unwrap();
        let mut out = Vec::new();
        export_features_csv(&ds, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("event_id,label,f0,f1,"));
        assert!(header.ends_with(",f55"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("w,tornado,0.5,0,"));
    }
}
