//! CART decision trees on Gini impurity, and bagged forests of them.
//!
//! Split search compares impurity decreases with exact integer arithmetic
//! (i128 cross-multiplication), so "no positive gain" and tie-breaking
//! (lowest feature index, then lowest threshold) are never at the mercy of
//! floating-point rounding.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::seeded_stream;
use crate::scalar::{r64, Real};
use crate::schema::Label;

use super::{fraction, ModelSpec};

/// One tree node; index 0 is the root. Points with `x[feature] <= threshold`
/// go left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode<R> {
    Split {
        feature: usize,
        threshold: R,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Class counts at the leaf: [null, tornado].
        counts: [u32; 2],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel<R> {
    pub nodes: Vec<TreeNode<R>>,
}

impl<R: Real> TreeModel<R> {
    /// Tornado fraction at the leaf the point falls into.
    pub fn predict_proba(&self, x: &[R]) -> R {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { counts } => {
                    return fraction(counts[1], counts[0] + counts[1]);
                }
            }
        }
    }
}

/// The best split over the candidate features, if any has positive gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitCandidate<R> {
    pub feature: usize,
    pub threshold: R,
    /// Gini impurity decrease, for reporting; comparisons use exact
    /// integer arithmetic internally.
    pub gain: f64,
}

/// Exact gain comparator: gain = A/(n*nl) + B/(n*nr) - C/n^2 with
/// A, B, C the sums of squared class counts of left, right, parent. Stored
/// as the integer numerator over denominator n^2 * nl * nr (n fixed per
/// search), so candidates compare by cross-multiplication.
#[derive(Clone, Copy, PartialEq, Eq)]
struct ExactGain {
    num: i128,
    nl: i128,
    nr: i128,
}

impl ExactGain {
    fn compute(left: [u32; 2], right: [u32; 2], n: i128) -> ExactGain {
        let nl = i128::from(left[0]) + i128::from(left[1]);
        let nr = i128::from(right[0]) + i128::from(right[1]);
        let a = i128::from(left[0]).pow(2) + i128::from(left[1]).pow(2);
        let b = i128::from(right[0]).pow(2) + i128::from(right[1]).pow(2);
        let c0 = i128::from(left[0]) + i128::from(right[0]);
        let c1 = i128::from(left[1]) + i128::from(right[1]);
        let c = c0.pow(2) + c1.pow(2);
        ExactGain {
            num: a * n * nr + b * n * nl - c * nl * nr,
            nl,
            nr,
        }
    }

    fn is_positive(&self) -> bool {
        self.num > 0
    }

    fn beats(&self, other: &ExactGain) -> bool {
        // strict: equal gains keep the earlier (lower feature, threshold)
        self.num * other.nl * other.nr > other.num * self.nl * self.nr
    }

    fn as_f64(&self, n: i128) -> f64 {
        self.num as f64 / (n * n * self.nl * self.nr) as f64
    }
}

/// Best (feature, threshold) over midpoints between consecutive distinct
/// sorted values, maximizing Gini impurity decrease. Ties break toward the
/// lowest feature index, then the lowest threshold. `None` iff no candidate
/// split has strictly positive gain.
pub fn find_best_split<R: Real>(
    x: &[Vec<R>],
    y: &[Label],
    rows: &[usize],
    candidate_features: &[usize],
) -> Option<SplitCandidate<R>> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let mut parent = [0u32; 2];
    for &r in rows {
        parent[y[r].class_index()] += 1;
    }
    if parent[0] == 0 || parent[1] == 0 {
        return None;
    }
    let n_i = n as i128;

    let mut best: Option<(usize, R, ExactGain)> = None;
    let mut sorted: Vec<(R, usize)> = Vec::with_capacity(n);
    for &feature in candidate_features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (x[r][feature], y[r].class_index())));
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));

        let mut left = [0u32; 2];
        for i in 0..n - 1 {
            left[sorted[i].1] += 1;
            let (v, next) = (sorted[i].0, sorted[i + 1].0);
            if v == next {
                continue;
            }
            let right = [parent[0] - left[0], parent[1] - left[1]];
            let gain = ExactGain::compute(left, right, n_i);
            if !gain.is_positive() {
                continue;
            }
            let better = match &best {
                None => true,
                Some((_, _, b)) => gain.beats(b),
            };
            if better {
                let half = r64::<R>(0.5);
                best = Some((feature, (v + next) * half, gain));
            }
        }
    }
    best.map(|(feature, threshold, gain)| SplitCandidate {
        feature,
        threshold,
        gain: gain.as_f64(n_i),
    })
}

struct TreeBuilder<'a, R> {
    x: &'a [Vec<R>],
    y: &'a [Label],
    max_depth: Option<u32>,
    min_samples_split: usize,
    /// Features drawn per split for forests; `None` uses all features.
    max_features: Option<usize>,
    nodes: Vec<TreeNode<R>>,
}

impl<R: Real> TreeBuilder<'_, R> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let mut counts = [0u32; 2];
        for &r in rows {
            counts[self.y[r].class_index()] += 1;
        }
        self.nodes.push(TreeNode::Leaf { counts });
        self.nodes.len() - 1
    }

    fn build(&mut self, rows: Vec<usize>, depth: u32, rng: &mut Option<&mut ChaCha8Rng>) -> usize {
        let at_depth_limit = self.max_depth.is_some_and(|d| depth >= d);
        if rows.len() < self.min_samples_split || at_depth_limit {
            return self.leaf(&rows);
        }
        let dim = self.x[0].len();
        let features: Vec<usize> = match (self.max_features, rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < dim => sample_features(rng, dim, m),
            _ => (0..dim).collect(),
        };
        let Some(split) = find_best_split(self.x, self.y, &rows, &features) else {
            return self.leaf(&rows);
        };

        let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
        for r in rows {
            if self.x[r][split.feature] <= split.threshold {
                left_rows.push(r);
            } else {
                right_rows.push(r);
            }
        }
        let index = self.nodes.len();
        self.nodes.push(TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left = self.build(left_rows, depth + 1, rng);
        let right = self.build(right_rows, depth + 1, rng);
        if let TreeNode::Split {
            left: l, right: r, ..
        } = &mut self.nodes[index]
        {
            *l = left;
            *r = right;
        }
        index
    }
}

/// Sample `m` distinct feature indices, returned in ascending order so the
/// split search's tie-break stays well-defined.
fn sample_features(rng: &mut ChaCha8Rng, dim: usize, m: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..dim).collect();
    for i in 0..m {
        let j = rng.random_range(i..dim);
        pool.swap(i, j);
    }
    let mut chosen = pool[..m].to_vec();
    chosen.sort_unstable();
    chosen
}

/// n draws with replacement from `0..n`.
pub fn bootstrap_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

pub(super) fn fit_tree<R: Real>(
    x: &[Vec<R>],
    y: &[Label],
    max_depth: Option<u32>,
    min_samples_split: usize,
) -> TreeModel<R> {
    let mut builder = TreeBuilder {
        x,
        y,
        max_depth,
        min_samples_split,
        max_features: None,
        nodes: Vec::new(),
    };
    let rows: Vec<usize> = (0..x.len()).collect();
    builder.build(rows, 0, &mut None);
    TreeModel {
        nodes: builder.nodes,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel<R> {
    pub trees: Vec<TreeModel<R>>,
}

impl<R: Real> ForestModel<R> {
    /// Arithmetic mean of the member trees' tornado fractions, accumulated
    /// in tree order.
    pub fn predict_proba(&self, x: &[R]) -> R {
        let mut acc = R::zero();
        for tree in &self.trees {
            acc += tree.predict_proba(x);
        }
        acc / r64(self.trees.len() as f64)
    }
}

/// Fit a bagged forest. Each tree's RNG is the ChaCha8 stream
/// `(rng_seed, tree_index)`, consumed bootstrap-first then per-node feature
/// draws, so parallel and serial fits build identical trees.
pub(super) fn fit_forest<R: Real>(
    x: &[Vec<R>],
    y: &[Label],
    spec: &ModelSpec,
) -> Result<ForestModel<R>> {
    let dim = x[0].len();
    let mtry = spec
        .hyper
        .max_features
        .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
        .min(dim);
    let trees: Vec<TreeModel<R>> = (0..spec.hyper.n_trees)
        .into_par_iter()
        .map(|tree_index| {
            let mut rng = seeded_stream(spec.rng_seed, tree_index as u64);
            let rows = if spec.hyper.bootstrap {
                bootstrap_sample(&mut rng, x.len())
            } else {
                (0..x.len()).collect()
            };
            let mut builder = TreeBuilder {
                x,
                y,
                max_depth: spec.hyper.max_depth,
                min_samples_split: spec.hyper.min_samples_split,
                max_features: Some(mtry),
                nodes: Vec::new(),
            };
            builder.build(rows, 0, &mut Some(&mut rng));
            TreeModel {
                nodes: builder.nodes,
            }
        })
        .collect();
    Ok(ForestModel { trees })
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: Label = Label::NullEvent;
    const T: Label = Label::Tornado;

    fn col(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn best_split_matches_hand_enumeration() {
        // candidates 1.5, 2.5, 3.5; gains 1/6, 1/2, 1/6
        let x = col(&[1.0, 2.0, 3.0, 4.0]);
        let y = [N, N, T, T];
        let rows = [0, 1, 2, 3];
        let s = find_best_split(&x, &y, &rows, &[0]).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.5);
        assert!((s.gain - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_labels_have_no_split() {
        let x = col(&[1.0, 2.0, 3.0]);
        let y = [T, T, T];
        assert_eq!(find_best_split(&x, &y, &[0, 1, 2], &[0]), None);
    }

    #[test]
    fn proportional_split_has_zero_gain_and_is_rejected() {
        // left (1 null, 2 tornado), right (3 null, 6 tornado): same class
        // proportions as the parent, gain exactly zero
        let x = col(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let y = [N, T, T, N, N, N, T, T, T, T, T, T];
        let rows: Vec<usize> = (0..12).collect();
        assert_eq!(find_best_split(&x, &y, &rows, &[0]), None);
    }

    #[test]
    fn duplicated_column_breaks_tie_to_lower_index() {
        let x: Vec<Vec<f64>> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&v| vec![v, v])
            .collect();
        let y = [N, N, T, T];
        let s = find_best_split(&x, &y, &[0, 1, 2, 3], &[0, 1]).unwrap();
        assert_eq!(s.feature, 0);
    }

    #[test]
    fn threshold_tie_breaks_low_within_feature() {
        // two thresholds (0.5 and 2.5) both separate one pure pair with
        // equal gain; the lower must win
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let y = [N, T, N, T];
        // gains: t=0.5 splits {N}|{T,N,T}; t=1.5 splits {N,T}|{N,T}; t=2.5 {N,T,N}|{T}
        let s = find_best_split(&x, &y, &[0, 1, 2, 3], &[0]).unwrap();
        assert_eq!(s.threshold, 0.5);
    }

    #[test]
    fn unlimited_tree_reaches_zero_training_error() {
        let x = col(&[0.3, 1.7, 2.2, 5.0, 6.1, 7.9]);
        let y = [N, T, N, T, T, N];
        let tree = fit_tree(&x, &y, None, 2);
        for (row, label) in x.iter().zip(&y) {
            let p = tree.predict_proba(row);
            let decided = if p >= 0.5 { T } else { N };
            assert_eq!(decided, *label);
        }
    }

    #[test]
    fn max_depth_zero_is_a_single_leaf() {
        let x = col(&[0.0, 1.0]);
        let y = [N, T];
        let tree = fit_tree(&x, &y, Some(0), 2);
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict_proba(&[0.0]), 0.5);
    }

    #[test]
    fn bootstrap_is_deterministic_and_n_one_is_zero() {
        let mut rng = seeded_stream(9, 0);
        assert_eq!(bootstrap_sample(&mut rng, 1), vec![0]);

        let a = bootstrap_sample(&mut seeded_stream(9, 3), 50);
        let b = bootstrap_sample(&mut seeded_stream(9, 3), 50);
        assert_eq!(a, b);
        assert!(a.iter().all(|&i| i < 50));
    }

    #[test]
    fn bootstrap_frequencies_within_five_sigma() {
        // 10 resamples of n=1000: each index expects 10 hits,
        // sigma = sqrt(10000 * p * (1-p)) with p = 1/1000
        let n = 1000usize;
        let mut hits = vec![0u32; n];
        for round in 0..10 {
            let mut rng = seeded_stream(123, round);
            for i in bootstrap_sample(&mut rng, n) {
                hits[i] += 1;
            }
        }
        let expected = 10.0;
        let sigma = (10_000.0 * (1.0 / n as f64) * (1.0 - 1.0 / n as f64)).sqrt();
        for (i, &h) in hits.iter().enumerate() {
            assert!(
                (f64::from(h) - expected).abs() <= 5.0 * sigma,
                "index {i} hit {h} times"
            );
        }
    }

    #[test]
    fn sampled_features_are_distinct_sorted_and_in_range() {
        let mut rng = seeded_stream(4, 0);
        for _ in 0..50 {
            let f = sample_features(&mut rng, 17, 5);
            assert_eq!(f.len(), 5);
            assert!(f.windows(2).all(|w| w[0] < w[1]));
            assert!(f.iter().all(|&i| i < 17));
        }
    }
}
