//! Linear soft-margin SVM trained by averaged projected subgradient descent
//! (Pegasos-style) on the hinge loss.
//!
//! Objective: `lambda * ||w||^2 / 2 + mean_i hinge(y_i * (w.x_i + b))`.
//! Examples are visited in a seed-shuffled order each epoch, the step size
//! is `1 / (lambda * (t + t0))` with a one-epoch burn-in offset, the weight
//! vector is projected onto the `1/sqrt(lambda)` ball after each step, and
//! the returned model is the average of all iterates. The bias is updated
//! by the subgradient but not regularized or projected.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::seeded_stream;
use crate::scalar::{r64, Real};
use crate::schema::Label;

use super::{sigmoid, ModelSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel<R> {
    pub weights: Vec<R>,
    pub bias: R,
}

impl<R: Real> SvmModel<R> {
    pub fn margin(&self, x: &[R]) -> R {
        let mut acc = self.bias;
        for (&w, &v) in self.weights.iter().zip(x) {
            acc += w * v;
        }
        acc
    }

    /// Logistic squashing of the signed margin.
    pub fn predict_proba(&self, x: &[R]) -> R {
        sigmoid(self.margin(x))
    }
}

/// Regularized hinge objective on a dataset, for convergence checks.
pub fn svm_objective<R: Real>(model: &SvmModel<R>, x: &[Vec<R>], y: &[Label], lambda: R) -> R {
    let half = r64::<R>(0.5);
    let mut norm = R::zero();
    for &w in &model.weights {
        norm += w * w;
    }
    let mut hinge = R::zero();
    for (row, &label) in x.iter().zip(y) {
        let yi = r64::<R>(f64::from(label.signum()));
        let slack = R::one() - yi * model.margin(row);
        hinge += slack.max(R::zero());
    }
    lambda * half * norm + hinge / r64(x.len() as f64)
}

pub(super) fn fit<R: Real>(x: &[Vec<R>], y: &[Label], spec: &ModelSpec) -> SvmModel<R> {
    let n = x.len();
    let dim = x[0].len();
    let lambda = r64::<R>(spec.hyper.lambda);
    let radius = R::one() / lambda.sqrt();

    let mut rng = seeded_stream(spec.rng_seed, 0);
    let mut order: Vec<usize> = (0..n).collect();

    let mut w = vec![R::zero(); dim];
    let mut b = R::zero();
    let mut w_sum = vec![R::zero(); dim];
    let mut b_sum = R::zero();

    let t0 = r64::<R>(n as f64);
    let mut t = R::zero();
    for _ in 0..spec.hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += R::one();
            let eta = R::one() / (lambda * (t + t0));
            let yi = r64::<R>(f64::from(y[i].signum()));

            let mut margin = b;
            for (&wj, &v) in w.iter().zip(&x[i]) {
                margin += wj * v;
            }
            let decay = R::one() - eta * lambda;
            if yi * margin < R::one() {
                for (wj, &v) in w.iter_mut().zip(&x[i]) {
                    *wj = *wj * decay + eta * yi * v;
                }
                b += eta * yi;
            } else {
                for wj in &mut w {
                    *wj *= decay;
                }
            }

            let mut norm_sq = R::zero();
            for &wj in &w {
                norm_sq += wj * wj;
            }
            if norm_sq > radius * radius {
                let shrink = radius / norm_sq.sqrt();
                for wj in &mut w {
                    *wj *= shrink;
                }
            }

            for (s, &wj) in w_sum.iter_mut().zip(&w) {
                *s += wj;
            }
            b_sum += b;
        }
    }

    let steps = t;
    SvmModel {
        weights: w_sum.into_iter().map(|s| s / steps).collect(),
        bias: b_sum / steps,
    }
}
