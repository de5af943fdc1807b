//! Built-in classifiers with fixed hyperparameters and accuracy evaluation.
//!
//! * Naive Bayes: Gaussian conditionals for continuous attributes (variance floor
//!   1e-9), Laplace-smoothed (α = 1) frequency tables for nominal ones.
//! * k-NN (k = 3): Euclidean distance over min-max scaled continuous features and
//!   one-hot nominals.
//! * Logistic regression: softmax over the same encoding plus a bias, full-batch
//!   gradient descent from zero weights (500 steps of 0.1, L2 1e-4 on non-bias weights).
//!
//! Argmax ties resolve to the earlier class in domain order.

use std::fmt;
use std::str::FromStr;

use crate::data::{Column, Dataset};
use crate::error::{Error, Result};

pub const KNN_K: usize = 3;
pub const VARIANCE_FLOOR: f64 = 1e-9;
pub const LAPLACE_ALPHA: f64 = 1.0;
pub const LOGISTIC_ITERATIONS: usize = 500;
pub const LOGISTIC_STEP: f64 = 0.1;
pub const LOGISTIC_L2: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    NaiveBayes,
    Knn,
    Logistic,
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::Knn => "knn3",
            ClassifierKind::Logistic => "logistic",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nb" => Ok(ClassifierKind::NaiveBayes),
            "knn3" | "knn" => Ok(ClassifierKind::Knn),
            "logistic" => Ok(ClassifierKind::Logistic),
            other => Err(Error::Config(format!("unknown classifier `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnSig {
    Continuous,
    Nominal(usize),
}

fn signature(ds: &Dataset) -> Vec<ColumnSig> {
    ds.columns()
        .iter()
        .map(|c| match c {
            Column::Continuous(_) => ColumnSig::Continuous,
            Column::Nominal { symbols, .. } => ColumnSig::Nominal(symbols.len()),
        })
        .collect()
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Min-max scaling of continuous columns and one-hot coding of nominal ones, learned
/// from training data. Constant or all-missing continuous columns are dropped;
/// missing values and symbols unseen in training encode as zeros.
#[derive(Debug, Clone, PartialEq)]
struct Encoder {
    parts: Vec<Part>,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Part {
    Skip,
    Scaled { offset: usize, min: f64, range: f64 },
    OneHot { slots: Vec<Option<usize>> },
}

impl Encoder {
    fn fit(ds: &Dataset) -> Encoder {
        let mut dim = 0;
        let parts = ds
            .columns()
            .iter()
            .map(|col| match col {
                Column::Continuous(v) => {
                    let (lo, hi) = v
                        .iter()
                        .flatten()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                            (lo.min(x), hi.max(x))
                        });
                    if hi > lo {
                        dim += 1;
                        Part::Scaled {
                            offset: dim - 1,
                            min: lo,
                            range: hi - lo,
                        }
                    } else {
                        Part::Skip
                    }
                }
                Column::Nominal { symbols, codes } => {
                    let mut seen = vec![false; symbols.len()];
                    for &c in codes.iter().flatten() {
                        seen[c] = true;
                    }
                    let slots = seen
                        .into_iter()
                        .map(|s| {
                            s.then(|| {
                                dim += 1;
                                dim - 1
                            })
                        })
                        .collect();
                    Part::OneHot { slots }
                }
            })
            .collect();
        Encoder { parts, dim }
    }

    fn encode(&self, ds: &Dataset, row: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (part, col) in self.parts.iter().zip(ds.columns()) {
            match (part, col) {
                (Part::Scaled { offset, min, range }, Column::Continuous(v)) => {
                    if let Some(value) = v[row] {
                        x[*offset] = (value - min) / range;
                    }
                }
                (Part::OneHot { slots }, Column::Nominal { codes, .. }) => {
                    if let Some(slot) = codes[row].and_then(|c| slots.get(c).copied().flatten()) {
                        x[slot] = 1.0;
                    }
                }
                _ => {}
            }
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
enum NbAttribute {
    Skip,
    /// Per class `(mean, variance)`.
    Gaussian(Vec<(f64, f64)>),
    /// Per class log P(symbol | class); `None` for symbols never seen in training.
    Categorical(Vec<Vec<Option<f64>>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    /// Log prior per class in the domain; `None` for classes absent from training.
    log_prior: Vec<Option<f64>>,
    attributes: Vec<NbAttribute>,
}

impl NaiveBayes {
    fn fit(ds: &Dataset) -> NaiveBayes {
        let n_classes = ds.n_classes();
        let mut class_n = vec![0usize; n_classes];
        for &l in ds.labels() {
            class_n[l] += 1;
        }
        let n = ds.n_rows() as f64;
        let log_prior = class_n
            .iter()
            .map(|&c| (c > 0).then(|| (c as f64 / n).ln()))
            .collect();
        let present: Vec<usize> = (0..n_classes).filter(|&c| class_n[c] > 0).collect();

        let attributes = ds
            .columns()
            .iter()
            .map(|col| match col {
                Column::Continuous(v) => {
                    let mut sums = vec![(0usize, 0.0f64); n_classes];
                    for (x, &l) in v.iter().zip(ds.labels()) {
                        if let Some(x) = x {
                            sums[l].0 += 1;
                            sums[l].1 += x;
                        }
                    }
                    if present.iter().any(|&c| sums[c].0 == 0) {
                        return NbAttribute::Skip;
                    }
                    let means: Vec<f64> = sums
                        .iter()
                        .map(|&(k, s)| if k > 0 { s / k as f64 } else { 0.0 })
                        .collect();
                    let mut sq = vec![0.0f64; n_classes];
                    for (x, &l) in v.iter().zip(ds.labels()) {
                        if let Some(x) = x {
                            sq[l] += (x - means[l]).powi(2);
                        }
                    }
                    NbAttribute::Gaussian(
                        (0..n_classes)
                            .map(|c| {
                                let k = sums[c].0.max(1) as f64;
                                (means[c], (sq[c] / k).max(VARIANCE_FLOOR))
                            })
                            .collect(),
                    )
                }
                Column::Nominal { symbols, codes } => {
                    let mut counts = vec![vec![0usize; symbols.len()]; n_classes];
                    for (code, &l) in codes.iter().zip(ds.labels()) {
                        if let Some(c) = code {
                            counts[l][*c] += 1;
                        }
                    }
                    let seen: Vec<bool> = (0..symbols.len())
                        .map(|s| counts.iter().any(|row| row[s] > 0))
                        .collect();
                    let vocabulary = seen.iter().filter(|&&s| s).count() as f64;
                    NbAttribute::Categorical(
                        counts
                            .iter()
                            .map(|row| {
                                let total = row.iter().sum::<usize>() as f64;
                                row.iter()
                                    .zip(&seen)
                                    .map(|(&k, &s)| {
                                        s.then(|| {
                                            ((k as f64 + LAPLACE_ALPHA)
                                                / (total + LAPLACE_ALPHA * vocabulary))
                                                .ln()
                                        })
                                    })
                                    .collect()
                            })
                            .collect(),
                    )
                }
            })
            .collect();
        NaiveBayes {
            log_prior,
            attributes,
        }
    }

    /// Unnormalized log posteriors; `-inf` for classes absent from training.
    pub fn log_scores(&self, ds: &Dataset, row: usize) -> Vec<f64> {
        let mut scores: Vec<f64> = self
            .log_prior
            .iter()
            .map(|p| p.unwrap_or(f64::NEG_INFINITY))
            .collect();
        for (attr, col) in self.attributes.iter().zip(ds.columns()) {
            match (attr, col) {
                (NbAttribute::Gaussian(params), Column::Continuous(v)) => {
                    if let Some(x) = v[row] {
                        for (s, &(mean, var)) in scores.iter_mut().zip(params) {
                            *s += -0.5 * (2.0 * std::f64::consts::PI * var).ln()
                                - (x - mean).powi(2) / (2.0 * var);
                        }
                    }
                }
                (NbAttribute::Categorical(table), Column::Nominal { codes, .. }) => {
                    if let Some(code) = codes[row] {
                        if table
                            .first()
                            .and_then(|t| t.get(code))
                            .copied()
                            .flatten()
                            .is_some()
                        {
                            for (s, t) in scores.iter_mut().zip(table) {
                                *s += t[code].unwrap_or(0.0);
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        scores
    }

    /// Posterior probabilities over the class domain.
    pub fn posterior(&self, ds: &Dataset, row: usize) -> Vec<f64> {
        let scores = self.log_scores(ds, row);
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / z).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    encoder: Encoder,
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl Knn {
    fn fit(ds: &Dataset) -> Knn {
        let encoder = Encoder::fit(ds);
        let points = (0..ds.n_rows()).map(|r| encoder.encode(ds, r)).collect();
        Knn {
            encoder,
            points,
            labels: ds.labels().to_vec(),
            n_classes: ds.n_classes(),
        }
    }

    fn predict(&self, ds: &Dataset, row: usize) -> usize {
        let x = self.encoder.encode(ds, row);
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0.0; self.n_classes];
        for &(_, i) in dist.iter().take(KNN_K) {
            votes[self.labels[i]] += 1.0;
        }
        argmax(&votes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Logistic {
    encoder: Encoder,
    /// Class ids present in training, ascending.
    classes: Vec<usize>,
    /// `classes.len()` rows of `dim + 1` weights; the last entry is the bias.
    weights: Vec<Vec<f64>>,
}

impl Logistic {
    /// Trains for `iterations` steps. With `traced`, also returns the training loss
    /// before the first step and after each one.
    fn fit(ds: &Dataset, iterations: usize, traced: bool) -> (Logistic, Vec<f64>) {
        let encoder = Encoder::fit(ds);
        let mut classes: Vec<usize> = ds.labels().to_vec();
        classes.sort_unstable();
        classes.dedup();
        let xs: Vec<Vec<f64>> = (0..ds.n_rows())
            .map(|r| {
                let mut x = encoder.encode(ds, r);
                x.push(1.0);
                x
            })
            .collect();
        let ys: Vec<usize> = ds
            .labels()
            .iter()
            .map(|l| {
                classes
                    .binary_search(l)
                    .expect("label among training classes")
            })
            .collect();
        let width = encoder.dim + 1;
        let mut model = Logistic {
            encoder,
            weights: vec![vec![0.0; width]; classes.len()],
            classes,
        };
        let mut trace = Vec::new();
        if traced {
            trace.push(model.loss(&xs, &ys));
        }
        for _ in 0..iterations {
            model.step(&xs, &ys);
            if traced {
                trace.push(model.loss(&xs, &ys));
            }
        }
        (model, trace)
    }

    fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let logits: Vec<f64> = self
            .weights
            .iter()
            .map(|w| w.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / z).collect()
    }

    fn penalty(&self) -> f64 {
        let sq: f64 = self
            .weights
            .iter()
            .map(|w| w[..w.len() - 1].iter().map(|v| v * v).sum::<f64>())
            .sum();
        0.5 * LOGISTIC_L2 * sq
    }

    fn loss(&self, xs: &[Vec<f64>], ys: &[usize]) -> f64 {
        let ce: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, &y)| -self.probabilities(x)[y].max(f64::MIN_POSITIVE).ln())
            .sum();
        ce / xs.len() as f64 + self.penalty()
    }

    fn step(&mut self, xs: &[Vec<f64>], ys: &[usize]) {
        let width = self.weights[0].len();
        let mut grad = vec![vec![0.0; width]; self.classes.len()];
        for (x, &y) in xs.iter().zip(ys) {
            let p = self.probabilities(x);
            for (k, g) in grad.iter_mut().enumerate() {
                let err = p[k] - f64::from(u8::from(k == y));
                for (gj, xj) in g.iter_mut().zip(x) {
                    *gj += err * xj;
                }
            }
        }
        let n = xs.len() as f64;
        for (w, g) in self.weights.iter_mut().zip(&grad) {
            for j in 0..width {
                let reg = if j + 1 < width {
                    LOGISTIC_L2 * w[j]
                } else {
                    0.0
                };
                w[j] -= LOGISTIC_STEP * (g[j] / n + reg);
            }
        }
    }

    fn predict(&self, ds: &Dataset, row: usize) -> usize {
        let mut x = self.encoder.encode(ds, row);
        x.push(1.0);
        let scores: Vec<f64> = self
            .weights
            .iter()
            .map(|w| w.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();
        self.classes[argmax(&scores)]
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Learned {
    /// Training data held a single class.
    Constant(usize),
    NaiveBayes(NaiveBayes),
    Knn(Knn),
    Logistic(Logistic),
}

/// A trained, immutable classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    kind: ClassifierKind,
    schema: Vec<ColumnSig>,
    learned: Learned,
}

impl Model {
    pub fn train(kind: ClassifierKind, train: &Dataset) -> Model {
        let schema = signature(train);
        let first = train.label(0);
        let learned = if train.labels().iter().all(|&l| l == first) {
            Learned::Constant(first)
        } else {
            match kind {
                ClassifierKind::NaiveBayes => Learned::NaiveBayes(NaiveBayes::fit(train)),
                ClassifierKind::Knn => Learned::Knn(Knn::fit(train)),
                ClassifierKind::Logistic => {
                    Learned::Logistic(Logistic::fit(train, LOGISTIC_ITERATIONS, false).0)
                }
            }
        };
        Model {
            kind,
            schema,
            learned,
        }
    }

    /// Logistic regression with a custom iteration count, plus the training loss
    /// before the first and after every step.
    pub fn train_logistic_traced(train: &Dataset, iterations: usize) -> (Model, Vec<f64>) {
        let (lr, trace) = Logistic::fit(train, iterations, true);
        let model = Model {
            kind: ClassifierKind::Logistic,
            schema: signature(train),
            learned: Learned::Logistic(lr),
        };
        (model, trace)
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    /// True when training saw one class and the model always predicts it.
    pub fn is_trivial(&self) -> bool {
        matches!(self.learned, Learned::Constant(_))
    }

    pub fn naive_bayes(&self) -> Option<&NaiveBayes> {
        match &self.learned {
            Learned::NaiveBayes(nb) => Some(nb),
            _ => None,
        }
    }

    fn check_schema(&self, ds: &Dataset) -> Result<()> {
        if signature(ds) == self.schema {
            Ok(())
        } else {
            Err(Error::Schema(
                "row layout differs from the training data".into(),
            ))
        }
    }

    fn predict_unchecked(&self, ds: &Dataset, row: usize) -> usize {
        match &self.learned {
            Learned::Constant(c) => *c,
            Learned::NaiveBayes(nb) => argmax(&nb.log_scores(ds, row)),
            Learned::Knn(knn) => knn.predict(ds, row),
            Learned::Logistic(lr) => lr.predict(ds, row),
        }
    }

    pub fn predict(&self, ds: &Dataset, row: usize) -> Result<usize> {
        self.check_schema(ds)?;
        if row >= ds.n_rows() {
            return Err(Error::Schema(format!("row {row} out of range")));
        }
        Ok(self.predict_unchecked(ds, row))
    }

    pub fn predict_all(&self, ds: &Dataset) -> Result<Vec<usize>> {
        self.check_schema(ds)?;
        Ok((0..ds.n_rows())
            .map(|r| self.predict_unchecked(ds, r))
            .collect())
    }
}

/// Fraction of exact matches.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyTestFold);
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / truth.len() as f64)
}

pub fn evaluate(kind: ClassifierKind, train: &Dataset, test: &Dataset) -> Result<f64> {
    if !train.same_schema(test) {
        return Err(Error::Schema(
            "train and test tables differ in schema".into(),
        ));
    }
    let model = Model::train(kind, train);
    accuracy(&model.predict_all(test)?, test.labels())
}
