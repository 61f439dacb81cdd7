//! k-nearest neighbors over standardized features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schema::Label;

use super::{fraction, ModelSpec};

/// Stores the (standardized) training matrix; prediction is the tornado
/// fraction among the k nearest rows by Euclidean distance, with distance
/// ties broken by lower training-row index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel<R> {
    pub k: usize,
    pub train_x: Vec<Vec<R>>,
    pub train_y: Vec<Label>,
}

pub(super) fn fit<R: Real>(x: &[Vec<R>], y: &[Label], spec: &ModelSpec) -> Result<KnnModel<R>> {
    if spec.hyper.k > x.len() {
        return Err(Error::InvalidSpec(format!(
            "k = {} exceeds the {} training rows",
            spec.hyper.k,
            x.len()
        )));
    }
    Ok(KnnModel {
        k: spec.hyper.k,
        train_x: x.to_vec(),
        train_y: y.to_vec(),
    })
}

impl<R: Real> KnnModel<R> {
    pub fn predict_proba(&self, x: &[R]) -> R {
        // squared distances order identically to rooted ones, ties included
        let mut order: Vec<(R, usize)> = self
            .train_x
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut acc = R::zero();
                for (&a, &b) in row.iter().zip(x) {
                    let d = a - b;
                    acc += d * d;
                }
                (acc, i)
            })
            .collect();
        order.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        });
        let tornado = order[..self.k]
            .iter()
            .filter(|&&(_, i)| self.train_y[i] == Label::Tornado)
            .count() as u32;
        fraction(tornado, self.k as u32)
    }
}
