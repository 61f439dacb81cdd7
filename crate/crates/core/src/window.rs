//! The classification unit: an event plus the consecutive daily snapshots
//! leading up to it.

use chrono::{Days, NaiveDate};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSnapshot;
use crate::scalar::Real;
use crate::schema::Label;

/// Maximum days of history per event window.
pub const MAX_WINDOW_DAYS: usize = 5;

/// An event window: the D consecutive daily snapshots for days
/// `target_date - D .. target_date - 1`, oldest first, plus the label of the
/// target day. Snapshots are private so the invariants (consecutive dates
/// ending the day before the target, shared region metadata, 1..=5 days)
/// hold for every constructed value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventWindow<R> {
    pub event_id: String,
    pub label: Label,
    pub target_date: NaiveDate,
    snapshots: Vec<GridSnapshot<R>>,
}

impl<R: Real> EventWindow<R> {
    pub fn new(
        event_id: impl Into<String>,
        label: Label,
        target_date: NaiveDate,
        snapshots: Vec<GridSnapshot<R>>,
    ) -> Result<Self> {
        let event_id = event_id.into();
        let d = snapshots.len();
        if d == 0 || d > MAX_WINDOW_DAYS {
            return Err(Error::Window {
                event_id,
                reason: format!("window holds {d} snapshots, expected 1..={MAX_WINDOW_DAYS}"),
            });
        }
        for (k, snap) in snapshots.iter().enumerate() {
            let expected = target_date
                .checked_sub_days(Days::new((d - k) as u64))
                .ok_or_else(|| Error::Window {
                    event_id: event_id.clone(),
                    reason: "target date underflows the calendar".into(),
                })?;
            if snap.date != expected {
                return Err(Error::Window {
                    event_id,
                    reason: format!(
                        "snapshot {k} dated {}, expected {expected} (consecutive days ending at {} - 1)",
                        snap.date, target_date
                    ),
                });
            }
        }
        let first = &snapshots[0];
        for snap in &snapshots[1..] {
            if snap.region_id != first.region_id
                || snap.lat0 != first.lat0
                || snap.lon0 != first.lon0
                || snap.resolution != first.resolution
            {
                return Err(Error::Window {
                    event_id,
                    reason: format!(
                        "snapshot {} does not share region metadata with {}",
                        snap.date, first.date
                    ),
                });
            }
        }
        Ok(EventWindow {
            event_id,
            label,
            target_date,
            snapshots,
        })
    }

    /// Snapshots oldest first.
    pub fn snapshots(&self) -> &[GridSnapshot<R>] {
        &self.snapshots
    }

    pub fn window_days(&self) -> usize {
        self.snapshots.len()
    }

    pub fn region_id(&self) -> &str {
        &self.snapshots[0].region_id
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::test_support::benign_snapshot;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2017, 5, day).unwrap()
    }

    fn snaps(days: &[u32]) -> Vec<GridSnapshot<f64>> {
        days.iter().map(|&day| benign_snapshot("35_-100", d(day))).collect()
    }

    #[test]
    fn accepts_consecutive_window_ending_day_before_target() {
        let w = EventWindow::new("e1", Label::Tornado, d(10), snaps(&[5, 6, 7, 8, 9])).unwrap();
        assert_eq!(w.window_days(), 5);
        assert_eq!(w.snapshots()[0].date, d(5));
        assert_eq!(w.region_id(), "35_-100");
    }

    #[test]
    fn rejects_gap_wrong_end_and_empty() {
        assert!(EventWindow::new("e", Label::Tornado, d(10), snaps(&[5, 6, 8, 9])).is_err());
        assert!(EventWindow::new("e", Label::Tornado, d(10), snaps(&[6, 7, 8, 10])).is_err());
        // ends at target, not target - 1
        assert!(EventWindow::new("e", Label::Tornado, d(10), snaps(&[7, 8, 9, 10])).is_err());
        assert!(EventWindow::new("e", Label::Tornado, d(10), snaps(&[])).is_err());
        assert!(EventWindow::new("e", Label::Tornado, d(10), snaps(&[4, 5, 6, 7, 8, 9])).is_err());
    }

    #[test]
    fn rejects_mixed_regions() {
        let mut s = snaps(&[8, 9]);
        s[1] = benign_snapshot("40_-100", d(9));
        assert!(matches!(
            EventWindow::new("e", Label::NullEvent, d(10), s),
            Err(Error::Window { .. })
        ));
    }
}
