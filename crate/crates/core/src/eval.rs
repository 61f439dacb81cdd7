//! Forecast verification: confusion accounting, POD/FAR, the year-based
//! train/test split, and the day-window ablation.
//!
//! POD = tp / (tp + fn), FAR = fp / (tp + fp), both as fractions in [0, 1].
//! Zero denominators yield an explicit undefined marker (`None` here, null
//! in report files, `n/a` in tables), never a silent zero. True negatives
//! never enter either score; they are tracked so the four counts always sum
//! to the number of evaluated windows.

use std::collections::BTreeMap;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ModelSpec, TrainedModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::featurize::featurize_dataset;
use crate::scalar::{r64, Real};
use crate::schema::Label;
use crate::window::EventWindow;

pub const REPORT_FORMAT_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, truth: Label, decision: Label) {
        match (truth, decision) {
            (Label::Tornado, Label::Tornado) => self.tp += 1,
            (Label::NullEvent, Label::Tornado) => self.fp += 1,
            (Label::NullEvent, Label::NullEvent) => self.tn += 1,
            (Label::Tornado, Label::NullEvent) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Probability of detection: tp / (tp + fn); `None` when undefined (0/0).
pub fn pod<R: Real>(c: &ConfusionCounts) -> Option<R> {
    let denom = c.tp + c.fn_;
    (denom > 0).then(|| r64::<R>(c.tp as f64) / r64(denom as f64))
}

/// False alarm rate: fp / (tp + fp); `None` when undefined (0/0).
pub fn far<R: Real>(c: &ConfusionCounts) -> Option<R> {
    let denom = c.tp + c.fp;
    (denom > 0).then(|| r64::<R>(c.fp as f64) / r64(denom as f64))
}

/// Split by target year: windows dated `test_year` go to test, earlier
/// years to train; later years are an error. Windows keep their input
/// order; provenance is inherited with a `split` note.
pub fn split_by_year<R: Real>(
    dataset: &Dataset<R>,
    test_year: i32,
) -> Result<(Dataset<R>, Dataset<R>)> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for w in dataset.windows() {
        let year = w.target_date.year();
        if year > test_year {
            return Err(Error::FutureEvent {
                event_id: w.event_id.clone(),
                year,
                test_year,
            });
        }
        if year == test_year {
            test.push(w.clone());
        } else {
            train.push(w.clone());
        }
    }
    let side = |windows: Vec<EventWindow<R>>, name: &str| {
        let mut provenance = dataset.provenance.clone();
        provenance.insert("split".into(), format!("{name} of test_year={test_year}"));
        Dataset::new(windows, provenance)
    };
    Ok((side(train, "train")?, side(test, "test")?))
}

/// Keep the `days` most recent snapshots (nearest the target date); label
/// and metadata are unchanged.
pub fn truncate_window<R: Real>(w: &EventWindow<R>, days: usize) -> Result<EventWindow<R>> {
    let d = w.window_days();
    if days == 0 || days > d {
        return Err(Error::DayRange { days, max: d });
    }
    let snapshots = w.snapshots()[d - days..].to_vec();
    EventWindow::new(w.event_id.clone(), w.label, w.target_date, snapshots)
}

/// Truncate every window of a dataset.
pub fn truncate_dataset<R: Real>(dataset: &Dataset<R>, days: usize) -> Result<Dataset<R>> {
    let windows = dataset
        .windows()
        .iter()
        .map(|w| truncate_window(w, days))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(windows, dataset.provenance.clone())
}

/// One evaluated (classifier, window size) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportCell<R> {
    pub kind: classifiers::ModelKind,
    pub rng_seed: u64,
    pub window_days: usize,
    pub counts: ConfusionCounts,
    pub pod: Option<R>,
    pub far: Option<R>,
}

/// The ablation report: one cell per (spec, window size), cells ordered by
/// spec order then descending window size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<R> {
    pub format_version: u64,
    pub threshold: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub provenance: BTreeMap<String, String>,
    pub specs: Vec<ModelSpec>,
    pub cells: Vec<ReportCell<R>>,
}

impl<R: Real> EvalReport<R> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec(self).expect("report serializes");
        bytes.push(b'\n');
        bytes
    }
}

/// Evaluate one trained model on featurized test rows.
pub fn evaluate_model<R: Real>(
    model: &TrainedModel<R>,
    x_test: &[Vec<R>],
    y_test: &[Label],
    threshold: R,
) -> Result<ConfusionCounts> {
    let mut counts = ConfusionCounts::default();
    for (row, &truth) in x_test.iter().zip(y_test) {
        let prediction = classifiers::predict(model, row, threshold)?;
        counts.record(truth, prediction.decision);
    }
    Ok(counts)
}

/// Run the ablation: for each spec and each window size, truncate both
/// sides to the most recent days, featurize, fit on train, evaluate on
/// test. Window sizes are visited in descending order. Deterministic given
/// the specs' seeds.
pub fn run_ablation<R: Real>(
    train: &Dataset<R>,
    test: &Dataset<R>,
    specs: &[ModelSpec],
    windows: &[usize],
    threshold: f64,
) -> Result<EvalReport<R>> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sizes: Vec<usize> = windows.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    sizes.reverse();

    let max_days = train.window_days().unwrap_or(0).min(test.window_days().unwrap_or(0));
    if let Some(&too_big) = sizes.iter().find(|&&d| d == 0 || d > max_days) {
        return Err(Error::DayRange {
            days: too_big,
            max: max_days,
        });
    }

    // featurize once per window size, shared across specs
    let mut per_size = Vec::new();
    for &days in &sizes {
        let x_train = featurize_dataset(&truncate_dataset(train, days)?)?;
        let x_test = featurize_dataset(&truncate_dataset(test, days)?)?;
        per_size.push((days, x_train, x_test));
    }
    let y_train = train.labels();
    let y_test = test.labels();
    let tau = r64::<R>(threshold);

    let mut cells = Vec::with_capacity(specs.len() * sizes.len());
    for spec in specs {
        for (days, x_train, x_test) in &per_size {
            let annotate = |e: Error| {
                Error::DegenerateInput(format!(
                    "cell (kind={}, window_days={days}) failed: {e}",
                    spec.kind
                ))
            };
            let model = classifiers::fit(spec, x_train, &y_train).map_err(annotate)?;
            let counts = evaluate_model(&model, x_test, &y_test, tau).map_err(annotate)?;
            cells.push(ReportCell {
                kind: spec.kind,
                rng_seed: spec.rng_seed,
                window_days: *days,
                counts,
                pod: pod(&counts),
                far: far(&counts),
            });
        }
    }

    let mut provenance = train.provenance.clone();
    for (k, v) in &test.provenance {
        provenance.entry(format!("test_{k}")).or_insert_with(|| v.clone());
    }
    Ok(EvalReport {
        format_version: REPORT_FORMAT_VERSION,
        threshold,
        train_size: train.len(),
        test_size: test.len(),
        provenance,
        specs: specs.to_vec(),
        cells,
    })
}

/// Render the plain-text grid: classifiers down the rows, window sizes
/// across the columns, POD and FAR per cell rounded to two decimals.
pub fn render_table<R: Real>(report: &EvalReport<R>) -> String {
    let mut sizes: Vec<usize> = report.cells.iter().map(|c| c.window_days).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes.reverse();

    let mut kinds = Vec::new();
    for c in &report.cells {
        if !kinds.contains(&c.kind) {
            kinds.push(c.kind);
        }
    }

    let fmt = |v: &Option<R>| match v {
        Some(x) => format!("{:.2}", x.to_f64().unwrap_or(f64::NAN)),
        None => "n/a".to_string(),
    };

    let name_width = kinds
        .iter()
        .map(|k| k.as_str().len())
        .max()
        .unwrap_or(10)
        .max("classifier".len());
    let mut out = String::new();
    out.push_str(&format!("{:<name_width$}", "classifier"));
    for d in &sizes {
        let label = if *d == 1 { "1 day".to_string() } else { format!("{d} days") };
        out.push_str(&format!(" | {label:^12}"));
    }
    out.push('\n');
    out.push_str(&format!("{:<name_width$}", ""));
    for _ in &sizes {
        out.push_str(&format!(" | {:>5} {:>6}", "POD", "FAR"));
    }
    out.push('\n');
    out.push_str(&"-".repeat(name_width + sizes.len() * 15));
    out.push('\n');
    for kind in &kinds {
        out.push_str(&format!("{:<name_width$}", kind.as_str()));
        for d in &sizes {
            let cell = report
                .cells
                .iter()
                .find(|c| c.kind == *kind && c.window_days == *d);
            match cell {
                Some(c) => out.push_str(&format!(" | {:>5} {:>6}", fmt(&c.pod), fmt(&c.far))),
                None => out.push_str(&format!(" | {:>5} {:>6}", "-", "-")),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::test_support::benign_snapshot;
    use chrono::NaiveDate;

    fn counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    #[test]
    fn pod_far_hand_values() {
        assert_eq!(pod::<f64>(&counts(84, 0, 0, 16)), Some(0.84));
        assert_eq!(pod::<f64>(&counts(0, 3, 7, 5)), Some(0.0));
        assert_eq!(pod::<f64>(&counts(0, 3, 7, 0)), None);

        assert_eq!(far::<f64>(&counts(94, 6, 0, 0)), Some(0.06));
        assert_eq!(far::<f64>(&counts(10, 0, 4, 2)), Some(0.0));
        assert_eq!(far::<f64>(&counts(0, 0, 9, 4)), None);
    }

    #[test]
    fn pod_far_are_scale_free() {
        let base = counts(7, 3, 11, 2);
        for m in [2u64, 5, 40] {
            let scaled = counts(base.tp * m, base.fp * m, base.tn * m, base.fn_ * m);
            assert_eq!(pod::<f64>(&scaled), pod::<f64>(&base));
            assert_eq!(far::<f64>(&scaled), far::<f64>(&base));
        }
    }

    fn window_in_year(id: &str, year: i32) -> EventWindow<f64> {
        let target = NaiveDate::from_ymd_opt(year, 6, 10).unwrap();
        let snaps = (1..=2)
            .rev()
            .map(|back| {
                benign_snapshot("35_-100", target - chrono::Days::new(back))
            })
            .collect();
        EventWindow::new(id, Label::Tornado, target, snaps).unwrap()
    }

    #[test]
    fn year_split_partitions_and_rejects_the_future() {
        let ds = Dataset::new(
            vec![
                window_in_year("a", 1995),
                window_in_year("b", 2016),
                window_in_year("c", 2017),
            ],
            BTreeMap::new(),
        )
        .unwrap();
        let (train, test) = split_by_year(&ds, 2017).unwrap();
        assert_eq!(
            train.windows().iter().map(|w| w.event_id.as_str()).collect::<Vec<_>>(),
            ["a", "b"]
        );
        assert_eq!(test.windows()[0].event_id, "c");
        assert_eq!(train.len() + test.len(), ds.len());

        assert!(matches!(
            split_by_year(&ds, 2016),
            Err(Error::FutureEvent { year: 2017, .. })
        ));

        let empty = Dataset::<f64>::new(vec![], BTreeMap::new()).unwrap();
        let (tr, te) = split_by_year(&empty, 2017).unwrap();
        assert!(tr.is_empty() && te.is_empty());
    }

    fn five_day_window(id: &str) -> EventWindow<f64> {
        let target = NaiveDate::from_ymd_opt(2017, 5, 10).unwrap();
        let snaps = (1..=5)
            .rev()
            .map(|back| benign_snapshot("35_-100", target - chrono::Days::new(back)))
            .collect();
        EventWindow::new(id, Label::Tornado, target, snaps).unwrap()
    }

    #[test]
    fn truncation_keeps_most_recent_days_and_composes() {
        let w = five_day_window("w");
        let one = truncate_window(&w, 1).unwrap();
        assert_eq!(one.window_days(), 1);
        assert_eq!(
            one.snapshots()[0].date,
            NaiveDate::from_ymd_opt(2017, 5, 9).unwrap()
        );

        let five = truncate_window(&w, 5).unwrap();
        assert_eq!(five, w);

        let via_three = truncate_window(&truncate_window(&w, 3).unwrap(), 2).unwrap();
        assert_eq!(via_three, truncate_window(&w, 2).unwrap());

        assert!(matches!(truncate_window(&w, 0), Err(Error::DayRange { .. })));
        assert!(matches!(truncate_window(&w, 6), Err(Error::DayRange { .. })));
    }

    #[test]
    fn table_renders_undefined_as_na() {
        let report = EvalReport::<f64> {
            format_version: REPORT_FORMAT_VERSION,
            threshold: 0.5,
            train_size: 1,
            test_size: 1,
            provenance: BTreeMap::new(),
            specs: vec![],
            cells: vec![ReportCell {
                kind: classifiers::ModelKind::RandomForest,
                rng_seed: 0,
                window_days: 5,
                counts: counts(0, 0, 1, 0),
                pod: None,
                far: None,
            }],
        };
        let table = render_table(&report);
        assert!(table.contains("random_forest"));
        assert!(table.contains("n/a"));
        assert!(table.contains("5 days"));
    }
}
