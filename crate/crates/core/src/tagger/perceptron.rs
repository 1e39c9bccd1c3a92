//! Averaged multiclass perceptron over sparse string features.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Trained (averaged) linear classifier over a closed label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    labels: Vec<String>,
    weights: BTreeMap<String, Vec<f64>>,
}

impl Classifier {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn feature_count(&self) -> usize {
        self.weights.len()
    }

    pub fn scores<S: AsRef<str>>(&self, features: &[S]) -> Vec<f64> {
        let mut scores = vec![0.0; self.labels.len()];
        for f in features {
            if let Some(w) = self.weights.get(f.as_ref()) {
                for (s, x) in scores.iter_mut().zip(w) {
                    *s += x;
                }
            }
        }
        scores
    }

    /// Softmax of the scores.
    pub fn probabilities<S: AsRef<str>>(&self, features: &[S]) -> Vec<f64> {
        softmax(&self.scores(features))
    }
}

pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| libm::exp(s - max)).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Feature string interner shared by the classifiers of one model.
#[derive(Debug, Default)]
pub(crate) struct FeatureIndex {
    ids: BTreeMap<String, usize>,
    names: Vec<String>,
}

impl FeatureIndex {
    pub(crate) fn intern(&mut self, feature: &str) -> usize {
        if let Some(&id) = self.ids.get(feature) {
            return id;
        }
        let id = self.names.len();
        self.ids.insert(feature.into(), id);
        self.names.push(feature.into());
        id
    }

    pub(crate) fn intern_all<S: AsRef<str>>(&mut self, features: &[S]) -> Vec<usize> {
        features.iter().map(|f| self.intern(f.as_ref())).collect()
    }

    pub(crate) fn name(&self, id: usize) -> &str {
        &self.names[id]
    }
}

/// Mutable training state with lazy weight averaging. An update made while
/// processing instance `t` counts from `t` on, so the last instance still
/// contributes to the average.
#[derive(Debug, Clone)]
pub(crate) struct Trainer {
    labels: Vec<String>,
    label_index: BTreeMap<String, usize>,
    weights: Vec<Vec<f64>>,
    totals: Vec<Vec<f64>>,
    stamps: Vec<Vec<u64>>,
    steps: u64,
}

impl Trainer {
    /// `labels` must be sorted and unique. Weights of `init` seed the model.
    pub(crate) fn new(
        labels: Vec<String>,
        init: Option<&Classifier>,
        index: &mut FeatureIndex,
    ) -> Self {
        let label_index: BTreeMap<String, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        let mut t = Trainer {
            labels,
            label_index,
            weights: Vec::new(),
            totals: Vec::new(),
            stamps: Vec::new(),
            steps: 0,
        };
        if let Some(init) = init {
            let remap: Vec<usize> = init.labels.iter().map(|l| t.label_index[l]).collect();
            for (feature, w) in &init.weights {
                let id = index.intern(feature);
                t.ensure(id);
                for (old, x) in w.iter().enumerate() {
                    t.weights[id][remap[old]] = *x;
                }
            }
        }
        t
    }

    fn ensure(&mut self, id: usize) {
        let n = self.labels.len();
        if id >= self.weights.len() {
            self.weights.resize_with(id + 1, || vec![0.0; n]);
            self.totals.resize_with(id + 1, || vec![0.0; n]);
            self.stamps.resize_with(id + 1, || vec![0; n]);
        }
    }

    pub(crate) fn label_id(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    pub(crate) fn scores(&self, features: &[usize]) -> Vec<f64> {
        let mut scores = vec![0.0; self.labels.len()];
        for &f in features {
            if let Some(w) = self.weights.get(f) {
                for (s, x) in scores.iter_mut().zip(w) {
                    *s += x;
                }
            }
        }
        scores
    }

    /// Predicts one training instance and updates the weights unless `truth`
    /// strictly outscores every other label. Returns the prediction made
    /// before the update.
    pub(crate) fn learn(&mut self, truth: usize, features: &[usize]) -> usize {
        let scores = self.scores(features);
        let guess = argmax(&scores);
        let rival = (0..scores.len())
            .filter(|&l| l != truth)
            .max_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a)));
        if let Some(rival) = rival.filter(|&r| scores[r] >= scores[truth]) {
            for &f in features {
                self.ensure(f);
                for (label, delta) in [(truth, 1.0), (rival, -1.0)] {
                    let elapsed = (self.steps - self.stamps[f][label]) as f64;
                    self.totals[f][label] += elapsed * self.weights[f][label];
                    self.stamps[f][label] = self.steps;
                    self.weights[f][label] += delta;
                }
            }
        }
        self.steps += 1;
        guess
    }

    /// Averaged weights at the current step; exact zeros are dropped.
    pub(crate) fn averaged(&self, index: &FeatureIndex) -> Classifier {
        let mut weights = BTreeMap::new();
        for (f, w) in self.weights.iter().enumerate() {
            let avg: Vec<f64> = if self.steps == 0 {
                w.clone()
            } else {
                w.iter()
                    .enumerate()
                    .map(|(l, x)| {
                        let elapsed = (self.steps - self.stamps[f][l]) as f64;
                        (self.totals[f][l] + elapsed * x) / self.steps as f64
                    })
                    .collect()
            };
            if avg.iter().any(|x| *x != 0.0) {
                weights.insert(String::from(index.name(f)), avg);
            }
        }
        Classifier {
            labels: self.labels.clone(),
            weights,
        }
    }
}
