//! Rolling-buffer monitor: validated snapshots stream in per region, and
//! whenever a region holds enough consecutive days an alert record for the
//! next day is emitted.

use std::collections::{HashMap, VecDeque};

use chrono::NaiveDate;
use serde::Serialize;
use twister_core::classifiers::{self, TrainedModel};
use twister_core::featurize::features_from_snapshots;
use twister_core::grid::GridSnapshot;
use twister_core::window::MAX_WINDOW_DAYS;

/// One monitor output line.
#[derive(Clone, Debug, Serialize)]
pub struct AlertRecord {
    pub region_id: String,
    pub target_date: NaiveDate,
    pub probability: f64,
    pub alert: bool,
    pub model_id: String,
    pub window_days: usize,
}

/// Why a snapshot was dropped from the stream.
#[derive(Debug)]
pub struct MonitorSkip(pub String);

impl From<twister_core::Error> for MonitorSkip {
    fn from(e: twister_core::Error) -> Self {
        MonitorSkip(e.to_string())
    }
}

/// Per-region ring buffers of up to five validated snapshots plus the
/// loaded model. Buffered dates are strictly increasing: a forward date
/// gap flushes the region's buffer rather than interpolating, and a stale
/// (non-increasing) arrival is rejected so each (region, target date) pair
/// alerts at most once.
pub struct MonitorState {
    model: TrainedModel<f64>,
    model_id: String,
    window_days: usize,
    threshold: f64,
    buffers: HashMap<String, VecDeque<GridSnapshot<f64>>>,
}

impl MonitorState {
    pub fn new(
        model: TrainedModel<f64>,
        model_id: String,
        window_days: usize,
        threshold: f64,
    ) -> Self {
        MonitorState {
            model,
            model_id,
            window_days,
            threshold,
            buffers: HashMap::new(),
        }
    }

    /// Ingest one validated snapshot; at most one alert per call, for
    /// `(region, snapshot date + 1)`.
    pub fn ingest(
        &mut self,
        snapshot: GridSnapshot<f64>,
    ) -> Result<Option<AlertRecord>, MonitorSkip> {
        let region = snapshot.region_id.clone();
        let buffer = self.buffers.entry(region.clone()).or_default();
        if let Some(last) = buffer.back() {
            if snapshot.date <= last.date {
                return Err(MonitorSkip(format!(
                    "snapshot for {region} dated {} is not after the buffered {}",
                    snapshot.date, last.date
                )));
            }
            let consecutive = snapshot
                .date
                .pred_opt()
                .is_some_and(|prev| prev == last.date);
            if !consecutive {
                buffer.clear();
            }
        }
        buffer.push_back(snapshot);
        while buffer.len() > MAX_WINDOW_DAYS {
            buffer.pop_front();
        }
        if buffer.len() < self.window_days {
            return Ok(None);
        }

        let recent: Vec<GridSnapshot<f64>> = buffer
            .iter()
            .skip(buffer.len() - self.window_days)
            .cloned()
            .collect();
        let features = features_from_snapshots(&recent)?;
        let prediction =
            classifiers::predict(&self.model, &features.values, self.threshold)?;
        let newest = recent.last().expect("window is non-empty").date;
        Ok(Some(AlertRecord {
            region_id: region,
            target_date: newest.succ_opt().expect("date fits the calendar"),
            probability: prediction.probability,
            alert: prediction.decision == twister_core::Label::Tornado,
            model_id: self.model_id.clone(),
            window_days: self.window_days,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use twister_core::classifiers::{fit, ModelKind, ModelSpec};
    use twister_core::grid::Layer;
    use twister_core::schema::{Label, Variable};

    fn snapshot(region: &str, day: u32, level: f64) -> GridSnapshot<f64> {
        let date = NaiveDate::from_ymd_opt(2017, 3, day).unwrap();
        let mut layers = BTreeMap::new();
        for v in Variable::ALL {
            let value = if v == Variable::CloudCover { 0.5 } else { level };
            layers.insert(v, Layer::constant(value));
        }
        GridSnapshot::new(region, date, 35.0, -100.0, 0.25, layers)
    }

    fn trained_model(window_days: usize) -> TrainedModel<f64> {
        // train on featurized constant snapshots so monitor queries live in
        // the same space
        let row = |level: f64| {
            let snaps: Vec<GridSnapshot<f64>> = (0..window_days)
                .map(|k| snapshot("train", 1 + k as u32, level))
                .collect();
            features_from_snapshots(&snaps).unwrap().values
        };
        let x = vec![row(0.0), row(0.1), row(0.9), row(1.0)];
        let y = vec![
            Label::NullEvent,
            Label::NullEvent,
            Label::Tornado,
            Label::Tornado,
        ];
        fit(&ModelSpec::new(ModelKind::GaussianNb, 0), &x, &y).unwrap()
    }

    #[test]
    fn emits_only_once_buffer_is_full() {
        let mut state = MonitorState::new(trained_model(5), "m".into(), 5, 0.5);
        for day in 1..=4 {
            assert!(state.ingest(snapshot("r", day, 1.0)).unwrap().is_none());
        }
        let alert = state.ingest(snapshot("r", 5, 1.0)).unwrap().unwrap();
        assert_eq!(alert.target_date, NaiveDate::from_ymd_opt(2017, 3, 6).unwrap());
        assert_eq!(alert.window_days, 5);
    }

    #[test]
    fn date_gap_flushes_and_counting_restarts() {
        let mut state = MonitorState::new(trained_model(5), "m".into(), 5, 0.5);
        for day in 1..=3 {
            assert!(state.ingest(snapshot("r", day, 1.0)).unwrap().is_none());
        }
        // day 4 skipped: buffer flushes, counting restarts at day 5
        for day in 5..=8 {
            assert!(state.ingest(snapshot("r", day, 1.0)).unwrap().is_none());
        }
        assert!(state.ingest(snapshot("r", 9, 1.0)).unwrap().is_some());
    }

    #[test]
    fn regions_buffer_independently() {
        let mut state = MonitorState::new(trained_model(2), "m".into(), 2, 0.5);
        assert!(state.ingest(snapshot("a", 1, 1.0)).unwrap().is_none());
        assert!(state.ingest(snapshot("b", 1, 1.0)).unwrap().is_none());
        assert!(state.ingest(snapshot("a", 2, 1.0)).unwrap().is_some());
        assert!(state.ingest(snapshot("b", 2, 1.0)).unwrap().is_some());
    }

    #[test]
    fn threshold_controls_the_alert_flag() {
        // knn with k=3: the query at level 0.6 sees neighbors 0.7, 0.4, 1.0,
        // so the probability is exactly 2/3
        let row = |level: f64| {
            features_from_snapshots(std::slice::from_ref(&snapshot("t", 1, level)))
                .unwrap()
                .values
        };
        let x = vec![row(0.0), row(0.4), row(0.7), row(1.0)];
        let y = vec![
            Label::NullEvent,
            Label::NullEvent,
            Label::Tornado,
            Label::Tornado,
        ];
        let mut spec = ModelSpec::new(ModelKind::Knn, 0);
        spec.hyper.k = 3;
        let model = fit(&spec, &x, &y).unwrap();

        let mut high = MonitorState::new(model.clone(), "m".into(), 1, 0.9);
        let record = high.ingest(snapshot("r", 1, 0.6)).unwrap().unwrap();
        assert_eq!(record.probability, 2.0 / 3.0);
        assert!(!record.alert);

        let mut low = MonitorState::new(model, "m".into(), 1, 0.5);
        let record = low.ingest(snapshot("r", 1, 0.6)).unwrap().unwrap();
        assert!(record.alert);
    }

    #[test]
    fn stale_dates_are_rejected_without_disturbing_the_buffer() {
        let mut state = MonitorState::new(trained_model(2), "m".into(), 2, 0.5);
        assert!(state.ingest(snapshot("r", 3, 1.0)).unwrap().is_none());
        // same date again: rejected, buffer untouched
        assert!(state.ingest(snapshot("r", 3, 1.0)).is_err());
        assert!(state.ingest(snapshot("r", 2, 1.0)).is_err());
        assert!(state.ingest(snapshot("r", 4, 1.0)).unwrap().is_some());
    }
}
