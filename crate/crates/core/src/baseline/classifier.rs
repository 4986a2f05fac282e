//! One-vs-rest weighted logistic regression over the prefix catalog.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, Vocabulary};
use crate::error::BaselineError;
use crate::model::Prefix;

pub const DEFAULT_THRESHOLD: f64 = 0.3;

const MODEL_FORMAT: &str = "qadisc-prefix-model";
const MODEL_VERSION: u32 = 1;

/// Weight of a label's positive examples: the number of instances without
/// the label over the number with it. The epsilon only stands in for a zero
/// count, keeping unseen labels finite.
pub fn class_weight(count: usize, total: usize) -> f64 {
    (total as f64 - count as f64) / (count as f64).max(1e-5)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { iterations: 200, learning_rate: 0.1, threshold: DEFAULT_THRESHOLD, seed: 0 }
    }
}

/// A training instance: the features of one target and its gold prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub features: FeatureVector,
    pub prefixes: BTreeSet<Prefix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixModel {
    format: String,
    version: u32,
    pub vocabulary: Vocabulary,
    /// One dense weight row per catalog prefix.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub threshold: f64,
    pub class_weights: Vec<f64>,
}

fn check_threshold(t: f64) -> Result<(), BaselineError> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(BaselineError::InvalidThreshold(t))
    }
}

impl PrefixModel {
    /// Builds a model from explicit parameters.
    pub fn from_parts(
        vocabulary: Vocabulary,
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
        threshold: f64,
    ) -> Result<Self, BaselineError> {
        check_threshold(threshold)?;
        for got in [weights.len(), biases.len()] {
            if got != Prefix::COUNT {
                return Err(BaselineError::Shape { expected: Prefix::COUNT, got });
            }
        }
        let dim = vocabulary.dim();
        if let Some(row) = weights.iter().find(|r| r.len() != dim) {
            return Err(BaselineError::Shape { expected: dim, got: row.len() });
        }
        Ok(PrefixModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            vocabulary,
            weights,
            biases,
            threshold,
            class_weights: vec![1.0; Prefix::COUNT],
        })
    }

    /// Threshold for inference. Accepts the closed interval so that the
    /// edge settings 0 and 1 can be exercised.
    pub fn set_threshold(&mut self, threshold: f64) -> Result<(), BaselineError> {
        check_threshold(threshold)?;
        self.threshold = threshold;
        Ok(())
    }

    fn logit(&self, p: usize, fv: &FeatureVector) -> f64 {
        let row = &self.weights[p];
        self.biases[p] + fv.iter().filter_map(|(id, v)| row.get(id as usize).map(|w| w * v)).sum::<f64>()
    }

    /// Sigmoid score per catalog prefix.
    pub fn scores(&self, fv: &FeatureVector) -> [f64; Prefix::COUNT] {
        let mut out = [0.0; Prefix::COUNT];
        for (p, s) in out.iter_mut().enumerate() {
            *s = sigmoid(self.logit(p, fv));
        }
        out
    }

    /// Prefixes whose score reaches the threshold.
    pub fn predict(&self, fv: &FeatureVector) -> BTreeSet<Prefix> {
        self.predict_at(fv, self.threshold)
    }

    pub fn predict_at(&self, fv: &FeatureVector, threshold: f64) -> BTreeSet<Prefix> {
        self.scores(fv).iter().zip(Prefix::ALL).filter(|(s, _)| **s >= threshold).map(|(_, p)| p).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, BaselineError> {
        let model: PrefixModel = serde_json::from_str(text).map_err(|e| BaselineError::ModelFormat(e.to_string()))?;
        if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
            return Err(BaselineError::ModelFormat(format!(
                "expected {MODEL_FORMAT} v{MODEL_VERSION}, found {} v{}",
                model.format, model.version
            )));
        }
        let mut class_weights = model.class_weights.clone();
        let mut checked = PrefixModel::from_parts(model.vocabulary, model.weights, model.biases, model.threshold)?;
        if class_weights.len() != Prefix::COUNT {
            class_weights = vec![1.0; Prefix::COUNT];
        }
        checked.class_weights = class_weights;
        Ok(checked)
    }

    pub fn save(&self, path: &Path) -> Result<(), BaselineError> {
        fs::write(path, self.to_json()).map_err(|source| BaselineError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, BaselineError> {
        let text = fs::read_to_string(path).map_err(|source| BaselineError::Io { path: path.to_path_buf(), source })?;
        PrefixModel::from_json(&text)
    }
}

/// Trains 17 independent binary classifiers with full-batch gradient descent
/// on the class-weighted logistic loss.
pub fn train_prefix_classifier(
    vocabulary: Vocabulary,
    examples: &[TrainingExample],
    config: &TrainConfig,
) -> Result<PrefixModel, BaselineError> {
    if examples.is_empty() {
        return Err(BaselineError::EmptyTrainingSet);
    }
    check_threshold(config.threshold)?;
    let n = examples.len();
    let dim = vocabulary.dim();

    let mut counts = [0usize; Prefix::COUNT];
    for ex in examples {
        for p in &ex.prefixes {
            counts[p.index()] += 1;
        }
    }
    let class_weights: Vec<f64> = counts.iter().map(|&c| class_weight(c, n)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights: Vec<Vec<f64>> =
        (0..Prefix::COUNT).map(|_| (0..dim).map(|_| rng.gen_range(-0.01..0.01)).collect()).collect();
    let mut biases = vec![0.0; Prefix::COUNT];

    let step = config.learning_rate / n as f64;
    for _ in 0..config.iterations {
        for p in 0..Prefix::COUNT {
            let prefix = Prefix::ALL[p];
            let mut grad = vec![0.0; dim];
            let mut grad_b = 0.0;
            for ex in examples {
                let z = biases[p]
                    + ex.features.iter().filter_map(|(id, v)| weights[p].get(id as usize).map(|w| w * v)).sum::<f64>();
                let positive = ex.prefixes.contains(&prefix);
                let (y, w) = if positive { (1.0, class_weights[p]) } else { (0.0, 1.0) };
                let g = w * (sigmoid(z) - y);
                grad_b += g;
                for (id, v) in ex.features.iter() {
                    if let Some(slot) = grad.get_mut(id as usize) {
                        *slot += g * v;
                    }
                }
            }
            biases[p] -= step * grad_b;
            for (w, g) in weights[p].iter_mut().zip(&grad) {
                *w -= step * g;
            }
        }
    }

    let mut model = PrefixModel::from_parts(vocabulary, weights, biases, config.threshold)?;
    model.class_weights = class_weights;
    Ok(model)
}
