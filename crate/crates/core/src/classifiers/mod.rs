//! The six classifiers behind one fit/predict interface, with versioned
//! JSON serialization.
//!
//! All six are built here rather than wrapped from an ML crate: trees and
//! forests on exact integer Gini arithmetic, Gaussian naive Bayes, averaged
//! subgradient linear SVM, k-nearest neighbors, and AdaBoost over decision
//! stumps. Margin and distance methods (SVM, k-NN) train and predict in
//! standardized feature space; tree and Gaussian models consume raw
//! features. Fitting is fully deterministic given `(spec, data)`: the only
//! randomness is ChaCha8 streams derived from `rng_seed`, and accumulation
//! order is fixed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::{apply_standardizer, fit_standardizer, StandardizationParams};
use crate::scalar::{r64, Real};
use crate::schema::Label;

mod adaboost;
mod gaussian_nb;
mod knn;
mod svm;
mod tree;

pub use adaboost::{adaboost_round, AdaBoostModel, RoundOutcome, Stump, WeightedStump};
pub use gaussian_nb::GaussianNbModel;
pub use knn::KnnModel;
pub use svm::{svm_objective, SvmModel};
pub use tree::{find_best_split, ForestModel, SplitCandidate, TreeModel, TreeNode};

pub use tree::bootstrap_sample;

pub const MODEL_FORMAT_VERSION: u64 = 1;

/// Default decision threshold on the tornado probability.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    GaussianNb,
    DecisionTree,
    RandomForest,
    LinearSvm,
    Knn,
    AdaBoost,
}

impl ModelKind {
    /// All kinds, in the order reports list them.
    pub const ALL: [ModelKind; 6] = [
        ModelKind::GaussianNb,
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::LinearSvm,
        ModelKind::Knn,
        ModelKind::AdaBoost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::GaussianNb => "gaussian_nb",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
            ModelKind::LinearSvm => "linear_svm",
            ModelKind::Knn => "knn",
            ModelKind::AdaBoost => "adaboost",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown classifier kind `{s}`"))
    }
}

/// Hyperparameters for every kind, flat so partial model files stay
/// readable; each kind reads only its own fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyper {
    /// Random forest: number of trees.
    pub n_trees: usize,
    /// Trees: maximum depth, `None` for unlimited.
    pub max_depth: Option<u32>,
    /// Trees: minimum samples required to split a node.
    pub min_samples_split: usize,
    /// Random forest: candidate features per split, `None` for ceil(sqrt(d)).
    pub max_features: Option<usize>,
    /// Random forest: bootstrap resampling of rows.
    pub bootstrap: bool,
    /// k-NN: neighbor count.
    pub k: usize,
    /// AdaBoost: boosting rounds.
    pub rounds: usize,
    /// Linear SVM: L2 regularization strength.
    pub lambda: f64,
    /// Linear SVM: training epochs.
    pub epochs: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
            bootstrap: true,
            k: 5,
            rounds: 50,
            lambda: 1e-4,
            epochs: 20,
        }
    }
}

/// What to train: kind, hyperparameters and the seed that fixes every
/// random choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub rng_seed: u64,
    #[serde(default)]
    pub hyper: Hyper,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, rng_seed: u64) -> Self {
        ModelSpec {
            kind,
            rng_seed,
            hyper: Hyper::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.hyper;
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        match self.kind {
            ModelKind::RandomForest => {
                if h.n_trees < 1 {
                    return fail("n_trees must be >= 1".into());
                }
                if h.min_samples_split < 2 {
                    return fail("min_samples_split must be >= 2".into());
                }
                if h.max_features == Some(0) {
                    return fail("max_features must be >= 1".into());
                }
            }
            ModelKind::DecisionTree => {
                if h.min_samples_split < 2 {
                    return fail("min_samples_split must be >= 2".into());
                }
            }
            ModelKind::Knn => {
                if h.k < 1 {
                    return fail("k must be >= 1".into());
                }
            }
            ModelKind::AdaBoost => {
                if h.rounds < 1 {
                    return fail("rounds must be >= 1".into());
                }
            }
            ModelKind::LinearSvm => {
                if h.lambda.is_nan() || h.lambda <= 0.0 {
                    return fail("lambda must be > 0".into());
                }
                if h.epochs < 1 {
                    return fail("epochs must be >= 1".into());
                }
            }
            ModelKind::GaussianNb => {}
        }
        Ok(())
    }
}

/// The six specs compared in reports, in report order, all at `seed`.
pub fn default_specs(seed: u64) -> Vec<ModelSpec> {
    ModelKind::ALL.into_iter().map(|k| ModelSpec::new(k, seed)).collect()
}

/// Kind-specific fitted parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams<R> {
    GaussianNb(GaussianNbModel<R>),
    DecisionTree(TreeModel<R>),
    RandomForest(ForestModel<R>),
    LinearSvm(SvmModel<R>),
    Knn(KnnModel<R>),
    AdaBoost(AdaBoostModel<R>),
}

impl<R> ModelParams<R> {
    fn kind(&self) -> ModelKind {
        match self {
            ModelParams::GaussianNb(_) => ModelKind::GaussianNb,
            ModelParams::DecisionTree(_) => ModelKind::DecisionTree,
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
            ModelParams::LinearSvm(_) => ModelKind::LinearSvm,
            ModelParams::Knn(_) => ModelKind::Knn,
            ModelParams::AdaBoost(_) => ModelKind::AdaBoost,
        }
    }
}

/// A fitted classifier; immutable after `fit`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel<R> {
    pub spec: ModelSpec,
    pub feature_length: usize,
    pub standardizer: Option<StandardizationParams<R>>,
    pub params: ModelParams<R>,
}

/// Probability of the tornado class plus the thresholded decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction<R> {
    pub probability: R,
    pub decision: Label,
}

/// Fit a model. Deterministic: the same `(spec, x, y)` always produces the
/// same model, bit for bit, independent of thread count.
pub fn fit<R: Real>(spec: &ModelSpec, x: &[Vec<R>], y: &[Label]) -> Result<TrainedModel<R>> {
    spec.validate()?;
    if x.is_empty() {
        return Err(Error::DegenerateInput("zero training rows".into()));
    }
    let dim = x[0].len();
    if dim == 0 {
        return Err(Error::DegenerateInput("zero-length feature vectors".into()));
    }
    for row in x {
        if row.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    if y.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let positives = y.iter().filter(|&&l| l == Label::Tornado).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::SingleClass);
    }

    // Margin and distance methods see standardized features.
    let standardizer = match spec.kind {
        ModelKind::LinearSvm | ModelKind::Knn => Some(fit_standardizer(x)?),
        _ => None,
    };
    let scaled: Option<Vec<Vec<R>>> = match &standardizer {
        Some(p) => Some(
            x.iter()
                .map(|row| apply_standardizer(p, row))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let x_fit: &[Vec<R>] = scaled.as_deref().unwrap_or(x);

    let params = match spec.kind {
        ModelKind::GaussianNb => ModelParams::GaussianNb(gaussian_nb::fit(x_fit, y)?),
        ModelKind::DecisionTree => ModelParams::DecisionTree(tree::fit_tree(
            x_fit,
            y,
            spec.hyper.max_depth,
            spec.hyper.min_samples_split,
        )),
        ModelKind::RandomForest => {
            ModelParams::RandomForest(tree::fit_forest(x_fit, y, spec)?)
        }
        ModelKind::LinearSvm => ModelParams::LinearSvm(svm::fit(x_fit, y, spec)),
        ModelKind::Knn => ModelParams::Knn(knn::fit(x_fit, y, spec)?),
        ModelKind::AdaBoost => ModelParams::AdaBoost(adaboost::fit(x_fit, y, spec)),
    };

    Ok(TrainedModel {
        spec: spec.clone(),
        feature_length: dim,
        standardizer,
        params,
    })
}

/// Probability of the tornado class for one feature vector.
pub fn predict_proba<R: Real>(model: &TrainedModel<R>, x: &[R]) -> Result<R> {
    if x.len() != model.feature_length {
        return Err(Error::LengthMismatch {
            expected: model.feature_length,
            got: x.len(),
        });
    }
    let scaled;
    let x = match &model.standardizer {
        Some(p) => {
            scaled = apply_standardizer(p, x)?;
            scaled.as_slice()
        }
        None => x,
    };
    let p = match &model.params {
        ModelParams::GaussianNb(m) => m.predict_proba(x),
        ModelParams::DecisionTree(m) => m.predict_proba(x),
        ModelParams::RandomForest(m) => m.predict_proba(x),
        ModelParams::LinearSvm(m) => m.predict_proba(x),
        ModelParams::Knn(m) => m.predict_proba(x),
        ModelParams::AdaBoost(m) => m.predict_proba(x),
    };
    Ok(p.max(R::zero()).min(R::one()))
}

/// Probability plus decision at threshold `tau`: tornado iff p >= tau.
pub fn predict<R: Real>(model: &TrainedModel<R>, x: &[R], tau: R) -> Result<Prediction<R>> {
    let probability = predict_proba(model, x)?;
    let decision = if probability >= tau {
        Label::Tornado
    } else {
        Label::NullEvent
    };
    Ok(Prediction {
        probability,
        decision,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc<R> {
    format_version: u64,
    kind: ModelKind,
    spec: ModelSpec,
    params: ModelParams<R>,
    standardizer: Option<StandardizationParams<R>>,
    feature_length: usize,
}

/// Serialize a model to its versioned JSON file format. Numbers keep full
/// round-trip precision, so deserializing reproduces predictions bit for
/// bit.
pub fn serialize_model<R: Real>(model: &TrainedModel<R>) -> Vec<u8> {
    let doc = ModelDoc {
        format_version: MODEL_FORMAT_VERSION,
        kind: model.spec.kind,
        spec: model.spec.clone(),
        params: model.params.clone(),
        standardizer: model.standardizer.clone(),
        feature_length: model.feature_length,
    };
    let mut bytes = serde_json::to_vec(&doc).expect("model serializes");
    bytes.push(b'\n');
    bytes
}

pub fn deserialize_model<R: Real>(bytes: &[u8]) -> Result<TrainedModel<R>> {
    let doc: ModelDoc<R> = serde_json::from_slice(bytes)
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    if doc.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Version {
            found: doc.format_version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    if doc.kind != doc.spec.kind || doc.kind != doc.params.kind() {
        return Err(Error::CorruptModel(format!(
            "kind `{}` does not match spec/params",
            doc.kind
        )));
    }
    doc.spec.validate().map_err(|e| Error::CorruptModel(e.to_string()))?;
    Ok(TrainedModel {
        spec: doc.spec,
        feature_length: doc.feature_length,
        standardizer: doc.standardizer,
        params: doc.params,
    })
}

/// Tornado probability as an R scalar from integer class counts.
pub(crate) fn fraction<R: Real>(tornado: u32, total: u32) -> R {
    if total == 0 {
        return r64(0.5);
    }
    r64::<R>(f64::from(tornado)) / r64::<R>(f64::from(total))
}

/// Logistic squashing of a signed margin.
pub(crate) fn sigmoid<R: Real>(margin: R) -> R {
    R::one() / (R::one() + (-margin).exp())
}
