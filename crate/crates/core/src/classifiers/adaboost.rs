//! Discrete AdaBoost over depth-1 decision stumps.

use serde::{Deserialize, Serialize};

use crate::scalar::{r64, Real};
use crate::schema::Label;

use super::{sigmoid, ModelSpec};

/// Weighted-error clamp bounds for the alpha computation.
const EPS_LO: f64 = 1e-10;

/// A depth-1 split: with `polarity` +1 the side `x[feature] > threshold`
/// votes tornado (+1); with -1 the sides swap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stump<R> {
    pub feature: usize,
    pub threshold: R,
    pub polarity: i8,
}

impl<R: Real> Stump<R> {
    /// Signed vote for one point: +1 tornado, -1 null.
    pub fn classify(&self, x: &[R]) -> i8 {
        if x[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedStump<R> {
    pub feature: usize,
    pub threshold: R,
    pub polarity: i8,
    pub alpha: R,
}

impl<R: Real> WeightedStump<R> {
    pub fn stump(&self) -> Stump<R> {
        Stump {
            feature: self.feature,
            threshold: self.threshold,
            polarity: self.polarity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel<R> {
    pub stumps: Vec<WeightedStump<R>>,
}

impl<R: Real> AdaBoostModel<R> {
    /// Signed ensemble margin `sum_t alpha_t h_t(x)`.
    pub fn margin(&self, x: &[R]) -> R {
        let mut acc = R::zero();
        for s in &self.stumps {
            acc += s.alpha * r64(f64::from(s.stump().classify(x)));
        }
        acc
    }

    /// Logistic squashing of twice the ensemble margin (the additive
    /// logistic view of discrete boosting).
    pub fn predict_proba(&self, x: &[R]) -> R {
        let m = self.margin(x);
        sigmoid(m + m)
    }
}

/// One boosting round, or the stop signal.
#[derive(Clone, Debug, PartialEq)]
pub enum RoundOutcome<R> {
    Continue {
        stump: Stump<R>,
        alpha: R,
        new_weights: Vec<R>,
        /// Weighted error before clamping.
        error: R,
    },
    Stop,
}

/// Minimum-weighted-error stump over midpoint thresholds and both
/// polarities; ties keep the earliest candidate (lowest feature, lowest
/// threshold, polarity +1 first).
#[allow(clippy::needless_range_loop)]
fn best_stump<R: Real>(x: &[Vec<R>], y_signed: &[i8], weights: &[R]) -> Option<(Stump<R>, R)> {
    let n = x.len();
    let dim = x[0].len();
    let mut best: Option<(Stump<R>, R)> = None;
    let mut sorted: Vec<(R, R, i8)> = Vec::with_capacity(n); // value, weight, label

    for feature in 0..dim {
        sorted.clear();
        sorted.extend((0..n).map(|i| (x[i][feature], weights[i], y_signed[i])));
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));

        // err(polarity +1) = sum of tornado weight left of the threshold
        // plus null weight right of it
        let total_pos: R = sorted
            .iter()
            .filter(|&&(_, _, l)| l > 0)
            .map(|&(_, w, _)| w)
            .sum();
        let total_neg: R = sorted
            .iter()
            .filter(|&&(_, _, l)| l < 0)
            .map(|&(_, w, _)| w)
            .sum();

        let mut left_pos = R::zero();
        let mut left_neg = R::zero();
        for i in 0..n - 1 {
            let (v, w, l) = sorted[i];
            if l > 0 {
                left_pos += w;
            } else {
                left_neg += w;
            }
            if v == sorted[i + 1].0 {
                continue;
            }
            let err_plus = left_pos + (total_neg - left_neg);
            for (polarity, err) in [(1i8, err_plus), (-1, (total_pos + total_neg) - err_plus)] {
                let better = match &best {
                    None => true,
                    Some((_, e)) => err < *e,
                };
                if better {
                    let half = r64::<R>(0.5);
                    best = Some((
                        Stump {
                            feature,
                            threshold: (v + sorted[i + 1].0) * half,
                            polarity,
                        },
                        err,
                    ));
                }
            }
        }
    }
    best
}

/// Run one round: pick the minimum weighted-error stump, stop if its error
/// reaches 0.5 (or no stump exists), otherwise compute alpha with the error
/// clamped into `[1e-10, 0.5 - 1e-10]` and return the renormalized weights.
pub fn adaboost_round<R: Real>(
    weights: &[R],
    x: &[Vec<R>],
    y_signed: &[i8],
) -> RoundOutcome<R> {
    let Some((stump, error)) = best_stump(x, y_signed, weights) else {
        return RoundOutcome::Stop;
    };
    let half = r64::<R>(0.5);
    if error >= half {
        return RoundOutcome::Stop;
    }
    let eps = error.max(r64(EPS_LO)).min(half - r64(EPS_LO));
    let alpha = half * ((R::one() - eps) / eps).ln();

    let mut new_weights: Vec<R> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let h = r64::<R>(f64::from(stump.classify(&x[i])));
            let yi = r64::<R>(f64::from(y_signed[i]));
            w * (-alpha * yi * h).exp()
        })
        .collect();
    let total: R = new_weights.iter().copied().sum();
    for w in &mut new_weights {
        *w /= total;
    }
    RoundOutcome::Continue {
        stump,
        alpha,
        new_weights,
        error,
    }
}

pub(super) fn fit<R: Real>(x: &[Vec<R>], y: &[Label], spec: &ModelSpec) -> AdaBoostModel<R> {
    let y_signed: Vec<i8> = y.iter().map(|l| l.signum()).collect();
    let n = x.len();
    let mut weights = vec![r64::<R>(1.0 / n as f64); n];
    let mut stumps = Vec::new();
    for _ in 0..spec.hyper.rounds {
        match adaboost_round(&weights, x, &y_signed) {
            RoundOutcome::Stop => break,
            RoundOutcome::Continue {
                stump,
                alpha,
                new_weights,
                error,
            } => {
                stumps.push(WeightedStump {
                    feature: stump.feature,
                    threshold: stump.threshold,
                    polarity: stump.polarity,
                    alpha,
                });
                weights = new_weights;
                // a perfect stump leaves nothing for later rounds to reweight
                if error <= R::zero() {
                    break;
                }
            }
        }
    }
    AdaBoostModel { stumps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{ModelKind, ModelSpec};

    const P: i8 = 1;
    const M: i8 = -1;

    fn col(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn separable_data_stops_after_one_perfect_stump() {
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let y = vec![
            Label::NullEvent,
            Label::NullEvent,
            Label::Tornado,
            Label::Tornado,
        ];
        let m = fit(&x, &y, &ModelSpec::new(ModelKind::AdaBoost, 0));
        assert_eq!(m.stumps.len(), 1);
        assert!(m.stumps[0].alpha > 10.0); // clamped error 1e-10 gives a large vote
        for (row, label) in x.iter().zip(&y) {
            let decided = if m.predict_proba(row) >= 0.5 {
                Label::Tornado
            } else {
                Label::NullEvent
            };
            assert_eq!(decided, *label);
        }
    }

    #[test]
    fn xor_like_duplicate_values_stop_immediately() {
        // both labels live at each x value: every stump has error 1/2
        let x = col(&[0.0, 0.0, 1.0, 1.0]);
        let y_signed = [P, M, P, M];
        let weights = vec![0.25f64; 4];
        assert_eq!(adaboost_round(&weights, &x, &y_signed), RoundOutcome::Stop);
    }

    #[test]
    fn constant_feature_has_no_stump() {
        let x = col(&[2.0, 2.0, 2.0]);
        let y_signed = [P, M, P];
        let weights = vec![1.0f64 / 3.0; 3];
        assert_eq!(adaboost_round(&weights, &x, &y_signed), RoundOutcome::Stop);
    }

    #[test]
    fn round_weights_renormalize_and_upweight_mistakes() {
        // one stump cannot fix index 3; its weight must grow
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let y_signed = [M, M, P, M];
        let weights = vec![0.25f64; 4];
        match adaboost_round(&weights, &x, &y_signed) {
            RoundOutcome::Continue {
                new_weights, error, ..
            } => {
                assert!((new_weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert_eq!(error, 0.25);
                assert!(new_weights[3] > 0.25);
            }
            RoundOutcome::Stop => panic!("expected a round"),
        }
    }

    #[test]
    fn training_error_respects_the_product_bound() {
        let x = col(&[0.1, 0.9, 1.3, 2.0, 2.2, 3.1, 4.0, 4.4]);
        let y = vec![
            Label::NullEvent,
            Label::Tornado,
            Label::NullEvent,
            Label::Tornado,
            Label::Tornado,
            Label::NullEvent,
            Label::Tornado,
            Label::NullEvent,
        ];
        let mut spec = ModelSpec::new(ModelKind::AdaBoost, 0);
        spec.hyper.rounds = 12;
        let m = fit(&x, &y, &spec);
        assert!(m.stumps.len() > 1);

        // replay the weight recurrence to recover each round's error
        let y_signed: Vec<i8> = y.iter().map(|l| l.signum()).collect();
        let n = x.len();
        let mut weights = vec![1.0f64 / n as f64; n];
        let mut bound = 1.0f64;
        for ws in &m.stumps {
            let stump = ws.stump();
            let err: f64 = weights
                .iter()
                .enumerate()
                .filter(|&(i, _)| stump.classify(&x[i]) != y_signed[i])
                .map(|(_, &w)| w)
                .sum();
            bound *= 2.0 * (err * (1.0 - err)).sqrt();
            let mut next: Vec<f64> = weights
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    (-ws.alpha * f64::from(y_signed[i]) * f64::from(stump.classify(&x[i]))).exp() * w
                })
                .collect();
            let total: f64 = next.iter().sum();
            for w in &mut next {
                *w /= total;
            }
            weights = next;
        }

        let train_error = x
            .iter()
            .zip(&y_signed)
            .filter(|(row, &yi)| {
                let margin = m.margin(row);
                let pred = if margin > 0.0 { 1 } else { -1 };
                pred != yi
            })
            .count() as f64
            / n as f64;
        assert!(
            train_error <= bound + 1e-12,
            "error {train_error} exceeds bound {bound}"
        );
    }
}
