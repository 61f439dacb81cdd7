//! Gaussian naive Bayes with per-class diagonal variances.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::{r64, Real};
use crate::schema::Label;

/// Relative variance floor: per-feature variances are floored at
/// `1e-9 * max pooled feature variance` (absolute 1e-9 when all features
/// are constant) so log densities stay finite.
const VAR_FLOOR_RATIO: f64 = 1e-9;

/// Class order everywhere: index 0 null, index 1 tornado.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel<R> {
    pub priors: [R; 2],
    pub means: [Vec<R>; 2],
    pub variances: [Vec<R>; 2],
}

#[allow(clippy::needless_range_loop)]
pub(super) fn fit<R: Real>(x: &[Vec<R>], y: &[Label]) -> Result<GaussianNbModel<R>> {
    let dim = x[0].len();
    let n = x.len();

    let mut counts = [0usize; 2];
    let mut sums = [vec![R::zero(); dim], vec![R::zero(); dim]];
    for (row, label) in x.iter().zip(y) {
        let c = label.class_index();
        counts[c] += 1;
        for (s, &v) in sums[c].iter_mut().zip(row) {
            *s += v;
        }
    }
    let mut means = sums;
    for c in 0..2 {
        let m = r64::<R>(counts[c] as f64);
        for v in &mut means[c] {
            *v /= m;
        }
    }

    let mut variances = [vec![R::zero(); dim], vec![R::zero(); dim]];
    for (row, label) in x.iter().zip(y) {
        let c = label.class_index();
        for ((s, &v), &m) in variances[c].iter_mut().zip(row).zip(&means[c]) {
            let d = v - m;
            *s += d * d;
        }
    }
    for c in 0..2 {
        let m = r64::<R>(counts[c] as f64);
        for v in &mut variances[c] {
            *v /= m;
        }
    }

    // Pooled per-feature variance fixes the floor's scale.
    let mut pooled_mean = vec![R::zero(); dim];
    for row in x {
        for (s, &v) in pooled_mean.iter_mut().zip(row) {
            *s += v;
        }
    }
    let nn = r64::<R>(n as f64);
    for v in &mut pooled_mean {
        *v /= nn;
    }
    let mut max_var = R::zero();
    for j in 0..dim {
        let mut acc = R::zero();
        for row in x {
            let d = row[j] - pooled_mean[j];
            acc += d * d;
        }
        max_var = max_var.max(acc / nn);
    }
    let floor = if max_var > R::zero() {
        r64::<R>(VAR_FLOOR_RATIO) * max_var
    } else {
        r64::<R>(VAR_FLOOR_RATIO)
    };
    for c in 0..2 {
        for v in &mut variances[c] {
            *v = v.max(floor);
        }
    }

    Ok(GaussianNbModel {
        priors: [
            r64::<R>(counts[0] as f64) / nn,
            r64::<R>(counts[1] as f64) / nn,
        ],
        means,
        variances,
    })
}

impl<R: Real> GaussianNbModel<R> {
    /// Normalized posterior of the tornado class. The two class posteriors
    /// share one denominator, so they sum to 1 up to a final rounding.
    pub fn predict_proba(&self, x: &[R]) -> R {
        let [l_null, l_tornado] = self.log_joint(x);
        let m = l_null.max(l_tornado);
        let e_null = (l_null - m).exp();
        let e_tornado = (l_tornado - m).exp();
        e_tornado / (e_null + e_tornado)
    }

    /// Log prior plus log likelihood per class.
    #[allow(clippy::needless_range_loop)]
    pub fn log_joint(&self, x: &[R]) -> [R; 2] {
        let two_pi = r64::<R>(std::f64::consts::TAU);
        let half = r64::<R>(0.5);
        let mut out = [R::zero(); 2];
        for c in 0..2 {
            let mut acc = self.priors[c].ln();
            for ((&v, &m), &var) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                let d = v - m;
                acc = acc - half * (two_pi * var).ln() - d * d / (var + var);
            }
            out[c] = acc;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> GaussianNbModel<f64> {
        let x = vec![vec![0.0], vec![2.0], vec![4.0], vec![6.0]];
        let y = vec![
            Label::NullEvent,
            Label::NullEvent,
            Label::Tornado,
            Label::Tornado,
        ];
        fit(&x, &y).unwrap()
    }

    #[test]
    fn fit_matches_hand_arithmetic() {
        let m = fixture();
        assert_eq!(m.priors, [0.5, 0.5]);
        assert_eq!(m.means[0], vec![1.0]);
        assert_eq!(m.means[1], vec![5.0]);
        // population variance of {0,2} and {4,6} is 1; the floor
        // (1e-9 * pooled variance 5) never reaches it
        assert_eq!(m.variances[0], vec![1.0]);
        assert_eq!(m.variances[1], vec![1.0]);
    }

    #[test]
    fn midpoint_is_exactly_half() {
        let m = fixture();
        assert_eq!(m.predict_proba(&[3.0]), 0.5);
    }

    #[test]
    fn posterior_matches_closed_form() {
        let m = fixture();
        // equal priors and unit variances: posterior(tornado | x) reduces to
        // 1 / (1 + exp(((x-5)^2 - (x-1)^2) / 2))
        for &x in &[1.0f64, 0.0, 2.5, 4.0, 7.0] {
            let expected = 1.0 / (1.0 + (((x - 5.0).powi(2) - (x - 1.0).powi(2)) / 2.0).exp());
            assert!((m.predict_proba(&[x]) - expected).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn posteriors_sum_to_one() {
        let m = fixture();
        for &x in &[-3.0f64, 0.0, 1.0, 3.0, 5.0, 9.0] {
            let p = m.predict_proba(&[x]);
            let [l0, l1] = m.log_joint(&[x]);
            let shift = l0.max(l1);
            let q = (l0 - shift).exp() / ((l0 - shift).exp() + (l1 - shift).exp());
            assert!((p + q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_features_fall_back_to_absolute_floor() {
        let x = vec![vec![1.0f64], vec![1.0], vec![1.0]];
        let y = vec![Label::NullEvent, Label::Tornado, Label::Tornado];
        let m = fit(&x, &y).unwrap();
        assert_eq!(m.variances[0], vec![1e-9]);
        let p = m.predict_proba(&[1.0]);
        assert!(p.is_finite());
        // identical likelihoods, so the posterior is the prior
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
    }
}
