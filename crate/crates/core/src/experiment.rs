//! Batch harness: load datasets, split into stratified folds, fit every feature
//! source on the training rows, compose variants and score each classifier.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::augment::{assemble, fit_blocks, Block, FittedBlocks, VariantSpec};
use crate::classify::{accuracy, ClassifierKind, Model};
use crate::data::{load, stratified_kfold, Dataset, FoldPair};
use crate::discretize::{parse_schemes, Discretizer};
use crate::dmiat::{format_cuts, DmiatConfig};
use crate::error::{Error, Result};

/// The five composition strategies. `D`, `A+D` and `A+D+DMIAT` expand to one variant
/// per discretizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantKind {
    Original,
    OriginalDmiat,
    Discretized,
    OriginalDiscretized,
    OriginalDiscretizedDmiat,
}

impl VariantKind {
    pub const ALL: [VariantKind; 5] = [
        VariantKind::Original,
        VariantKind::OriginalDmiat,
        VariantKind::Discretized,
        VariantKind::OriginalDiscretized,
        VariantKind::OriginalDiscretizedDmiat,
    ];

    fn uses_discretizer(self) -> bool {
        matches!(
            self,
            VariantKind::Discretized
                | VariantKind::OriginalDiscretized
                | VariantKind::OriginalDiscretizedDmiat
        )
    }

    fn uses_dmiat(self) -> bool {
        matches!(
            self,
            VariantKind::OriginalDmiat | VariantKind::OriginalDiscretizedDmiat
        )
    }

    fn include_original(self) -> bool {
        self != VariantKind::Discretized
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariantKind::Original => "A",
            VariantKind::OriginalDmiat => "A+DMIAT",
            VariantKind::Discretized => "D",
            VariantKind::OriginalDiscretized => "A+D",
            VariantKind::OriginalDiscretizedDmiat => "A+D+DMIAT",
        })
    }
}

impl FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace("D-MIAT", "DMIAT");
        VariantKind::ALL
            .into_iter()
            .find(|v| v.to_string() == key)
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: Vec<PathBuf>,
    pub folds: usize,
    pub seed: u64,
    pub dmiat: DmiatConfig,
    pub discretizers: Vec<Discretizer>,
    pub variants: Vec<VariantKind>,
    pub classifiers: Vec<ClassifierKind>,
    /// Directory of `<dataset>.<method>.fold<i>.txt` scheme files.
    pub import_schemes: Option<PathBuf>,
    pub export_cuts: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: Vec::new(),
            folds: 10,
            seed: 7,
            dmiat: DmiatConfig::standard(),
            discretizers: vec![
                Discretizer::EqualWidth(10),
                Discretizer::EqualFrequency(10),
                Discretizer::Iem,
            ],
            variants: VariantKind::ALL.to_vec(),
            classifiers: vec![
                ClassifierKind::NaiveBayes,
                ClassifierKind::Knn,
                ClassifierKind::Logistic,
            ],
            import_schemes: None,
            export_cuts: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::Config("no variants selected".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("no classifiers selected".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "need at least 2 folds, got {}",
                self.folds
            )));
        }
        if self.discretizers.is_empty()
            && self.import_schemes.is_none()
            && self.variants.iter().any(|v| v.uses_discretizer())
        {
            return Err(Error::Config(
                "discretized variants requested but no discretizer or imported schemes given"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// One concrete variant after expansion, e.g. `A+D[iem]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: String,
    pub kind: VariantKind,
    /// Index into the block list for discretized variants.
    pub block: Option<usize>,
}

pub fn expand_variants(kinds: &[VariantKind], blocks: &[Block]) -> Vec<Variant> {
    let mut out = Vec::new();
    for &kind in kinds {
        if kind.uses_discretizer() {
            for (i, b) in blocks.iter().enumerate() {
                out.push(Variant {
                    name: format!("{kind}[{}]", b.tag()),
                    kind,
                    block: Some(i),
                });
            }
        } else {
            out.push(Variant {
                name: kind.to_string(),
                kind,
                block: None,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRecord {
    pub dataset: String,
    pub variant: String,
    pub classifier: ClassifierKind,
    pub fold: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub variant: String,
    pub classifier: ClassifierKind,
    pub folds: usize,
    pub mean: f64,
    /// Sample standard deviation over folds; 0 for a single fold.
    pub std: f64,
}

/// D-MIAT cut counts for one fold, split by criterion in configuration order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCount {
    pub dataset: String,
    pub fold: usize,
    pub per_criterion: Vec<usize>,
}

impl FeatureCount {
    pub fn total(&self) -> usize {
        self.per_criterion.iter().sum()
    }
}

/// A (dataset, variant, fold) combination that produced no columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skip {
    pub dataset: String,
    pub variant: String,
    pub fold: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub dataset: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultsTable {
    pub criteria: Vec<String>,
    pub records: Vec<AccuracyRecord>,
    pub feature_counts: Vec<FeatureCount>,
    pub skipped: Vec<Skip>,
    pub failures: Vec<Failure>,
    /// `(dataset, fold, exported cut text)`, filled when cut export is on.
    pub cut_exports: Vec<(String, usize, String)>,
}

impl ResultsTable {
    /// Mean and sample standard deviation per (dataset, variant, classifier), in
    /// record order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut groups: Vec<(String, String, ClassifierKind, Vec<f64>)> = Vec::new();
        for r in &self.records {
            match groups
                .iter_mut()
                .find(|g| g.0 == r.dataset && g.1 == r.variant && g.2 == r.classifier)
            {
                Some(g) => g.3.push(r.accuracy),
                None => groups.push((
                    r.dataset.clone(),
                    r.variant.clone(),
                    r.classifier,
                    vec![r.accuracy],
                )),
            }
        }
        groups
            .into_iter()
            .map(|(dataset, variant, classifier, acc)| {
                let n = acc.len() as f64;
                let mean = acc.iter().sum::<f64>() / n;
                let std = if acc.len() > 1 {
                    (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
                SummaryRow {
                    dataset,
                    variant,
                    classifier,
                    folds: acc.len(),
                    mean,
                    std,
                }
            })
            .collect()
    }

    pub fn mean_accuracy(
        &self,
        dataset: &str,
        variant: &str,
        classifier: ClassifierKind,
    ) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.dataset == dataset && s.variant == variant && s.classifier == classifier)
            .map(|s| s.mean)
    }

    pub fn results_csv(&self) -> String {
        let mut out = String::from("dataset,variant,classifier,fold,accuracy\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{:.6}\n",
                r.dataset, r.variant, r.classifier, r.fold, r.accuracy
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("dataset,variant,classifier,folds,mean,std\n");
        for s in self.summary() {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.6}\n",
                s.dataset, s.variant, s.classifier, s.folds, s.mean, s.std
            ));
        }
        out
    }

    pub fn feature_counts_csv(&self) -> String {
        let mut out = String::from("dataset,fold");
        for c in &self.criteria {
            out.push(',');
            out.push_str(c);
        }
        out.push_str(",total\n");
        for f in &self.feature_counts {
            out.push_str(&format!("{},{}", f.dataset, f.fold));
            for c in &f.per_criterion {
                out.push_str(&format!(",{c}"));
            }
            out.push_str(&format!(",{}\n", f.total()));
        }
        out
    }

    pub fn skipped_csv(&self) -> String {
        let mut out = String::from("dataset,variant,fold\n");
        for s in &self.skipped {
            out.push_str(&format!("{},{},{}\n", s.dataset, s.variant, s.fold));
        }
        out
    }

    pub fn failures_csv(&self) -> String {
        let mut out = String::from("dataset,message\n");
        for f in &self.failures {
            out.push_str(&format!(
                "{},\"{}\"\n",
                f.dataset,
                f.message.replace('"', "\"\"")
            ));
        }
        out
    }
}

/// Writes `results.csv`, `summary.csv`, `feature_counts.csv`, `skipped.csv`,
/// `failures.csv` and, when present, `cuts/<dataset>.fold<i>.tsv` under `dir`.
pub fn emit_results(table: &ResultsTable, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), table.results_csv())?;
    fs::write(dir.join("summary.csv"), table.summary_csv())?;
    fs::write(dir.join("feature_counts.csv"), table.feature_counts_csv())?;
    fs::write(dir.join("skipped.csv"), table.skipped_csv())?;
    fs::write(dir.join("failures.csv"), table.failures_csv())?;
    if !table.cut_exports.is_empty() {
        let cuts = dir.join("cuts");
        fs::create_dir_all(&cuts)?;
        for (dataset, fold, text) in &table.cut_exports {
            fs::write(cuts.join(format!("{dataset}.fold{fold}.tsv")), text)?;
        }
    }
    Ok(())
}

/// Expands each pattern: glob patterns to their sorted matches, directories to the
/// `.csv`, `.dat` and `.keel` files they hold, anything else verbatim.
pub fn resolve_data(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in patterns {
        let path = Path::new(p);
        if p.contains(['*', '?', '[']) {
            let paths =
                glob::glob(p).map_err(|e| Error::Config(format!("bad pattern `{p}`: {e}")))?;
            let mut found: Vec<PathBuf> = paths
                .filter_map(|r| r.ok())
                .filter(|p| p.is_file())
                .collect();
            if found.is_empty() {
                return Err(Error::Config(format!("pattern `{p}` matched no files")));
            }
            found.sort();
            out.extend(found);
        } else if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.is_file()
                        && matches!(
                            p.extension().and_then(|e| e.to_str()),
                            Some("csv" | "dat" | "keel")
                        )
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(path.to_path_buf());
        }
    }
    Ok(out)
}

/// Imported scheme blocks for one dataset: one block per method found as
/// `<dataset>.<method>.fold0.txt`, each holding the schemes of every fold.
fn imported_blocks(dir: &Path, dataset: &str, k: usize) -> Result<Vec<(String, Vec<Block>)>> {
    let prefix = format!("{dataset}.");
    let mut methods: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter_map(|name| {
            name.strip_prefix(&prefix)?
                .strip_suffix(".fold0.txt")
                .filter(|m| !m.is_empty() && !m.contains('.'))
                .map(str::to_string)
        })
        .collect();
    methods.sort();
    methods
        .into_iter()
        .map(|m| {
            let per_fold = (0..k)
                .map(|i| {
                    let path = dir.join(format!("{dataset}.{m}.fold{i}.txt"));
                    let text = fs::read_to_string(&path).map_err(|e| {
                        Error::Config(format!("cannot read {}: {e}", path.display()))
                    })?;
                    Ok(Block::Imported {
                        name: m.clone(),
                        schemes: parse_schemes(&text)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((m, per_fold))
        })
        .collect()
}

/// What a single fold learned from its training rows: shared feature sources and
/// one model per (variant, classifier). Nothing here may depend on test labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldFit {
    pub fitted: FittedBlocks,
    /// Indexed `[variant][classifier]`; `None` for an empty variant.
    pub models: Vec<Option<Vec<Model>>>,
    /// Variant test tables, aligned with `models`.
    tests: Vec<Option<Dataset>>,
}

pub fn fit_fold(
    ds: &Dataset,
    fold: &FoldPair,
    blocks: &[Block],
    variants: &[Variant],
    dmiat: &DmiatConfig,
    classifiers: &[ClassifierKind],
) -> Result<FoldFit> {
    let all = VariantSpec {
        include_original: true,
        discretizers: blocks.to_vec(),
        dmiat: variants
            .iter()
            .any(|v| v.kind.uses_dmiat())
            .then(|| dmiat.clone()),
    };
    let fitted = fit_blocks(ds, &fold.train, &all)?;
    let mut models = Vec::with_capacity(variants.len());
    let mut tests = Vec::with_capacity(variants.len());
    for v in variants {
        let view = FittedBlocks {
            schemes: v
                .block
                .map(|b| vec![fitted.schemes[b].clone()])
                .unwrap_or_default(),
            cuts: if v.kind.uses_dmiat() {
                fitted.cuts.clone()
            } else {
                Vec::new()
            },
        };
        let train = match assemble(ds, &fold.train, v.kind.include_original(), &view) {
            Ok(t) => t,
            Err(Error::EmptyVariant) => {
                models.push(None);
                tests.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let test = assemble(ds, &fold.test, v.kind.include_original(), &view)?;
        models.push(Some(
            classifiers
                .iter()
                .map(|&c| Model::train(c, &train))
                .collect(),
        ));
        tests.push(Some(test));
    }
    Ok(FoldFit {
        fitted,
        models,
        tests,
    })
}

impl FoldFit {
    /// Test accuracy per `[variant][classifier]`.
    pub fn score(&self) -> Result<Vec<Option<Vec<f64>>>> {
        self.models
            .iter()
            .zip(&self.tests)
            .map(|(models, test)| match (models, test) {
                (Some(models), Some(test)) => models
                    .iter()
                    .map(|m| accuracy(&m.predict_all(test)?, test.labels()))
                    .collect::<Result<Vec<_>>>()
                    .map(Some),
                _ => Ok(None),
            })
            .collect()
    }
}

struct FoldOutcome {
    fold: usize,
    scores: Vec<Option<Vec<f64>>>,
    fitted: FittedBlocks,
}

struct DatasetOutcome {
    name: String,
    domain: Vec<String>,
    variants: Vec<Variant>,
    folds: Vec<FoldOutcome>,
}

fn run_dataset(config: &ExperimentConfig, path: &Path) -> Result<DatasetOutcome> {
    let ds = load(path)?;
    let folds = stratified_kfold(&ds, config.folds, config.seed)?;
    let mut blocks: Vec<Vec<Block>> =
        vec![config.discretizers.iter().map(|d| Block::Fit(*d)).collect(); folds.len()];
    if let Some(dir) = &config.import_schemes {
        for (_, per_fold) in imported_blocks(dir, ds.name(), folds.len())? {
            for (fold_blocks, b) in blocks.iter_mut().zip(per_fold) {
                fold_blocks.push(b);
            }
        }
    }
    let variants = expand_variants(&config.variants, &blocks[0]);
    let outcomes = folds
        .par_iter()
        .zip(blocks.par_iter())
        .enumerate()
        .map(|(i, (fold, fold_blocks))| {
            let fit = fit_fold(
                &ds,
                fold,
                fold_blocks,
                &variants,
                &config.dmiat,
                &config.classifiers,
            )?;
            Ok(FoldOutcome {
                fold: i,
                scores: fit.score()?,
                fitted: fit.fitted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetOutcome {
        name: ds.name().to_string(),
        domain: ds.class_domain().to_vec(),
        variants,
        folds: outcomes,
    })
}

/// Runs every dataset. Per-dataset errors land in `failures` and drop that dataset's
/// records; the rest of the batch continues. Output order is fixed: datasets by
/// name, then variant, classifier and fold in configuration order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultsTable> {
    config.validate()?;
    let outcomes: Vec<(String, Result<DatasetOutcome>)> = config
        .data
        .par_iter()
        .map(|p| {
            let label = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            (label, run_dataset(config, p))
        })
        .collect();

    let mut by_name: BTreeMap<String, Vec<Result<DatasetOutcome>>> = BTreeMap::new();
    for (label, outcome) in outcomes {
        by_name.entry(label).or_default().push(outcome);
    }

    let mut table = ResultsTable {
        criteria: config
            .dmiat
            .criteria()
            .iter()
            .map(|c| c.to_string())
            .collect(),
        ..ResultsTable::default()
    };
    let count_cuts = config.variants.iter().any(|v| v.uses_dmiat());
    for (label, outcomes) in by_name {
        for outcome in outcomes {
            let d = match outcome {
                Ok(d) => d,
                Err(e) => {
                    table.failures.push(Failure {
                        dataset: label.clone(),
                        message: e.to_string(),
                    });
                    continue;
                }
            };
            for (vi, v) in d.variants.iter().enumerate() {
                for (ci, &classifier) in config.classifiers.iter().enumerate() {
                    for f in &d.folds {
                        if let Some(scores) = &f.scores[vi] {
                            table.records.push(AccuracyRecord {
                                dataset: d.name.clone(),
                                variant: v.name.clone(),
                                classifier,
                                fold: f.fold,
                                accuracy: scores[ci],
                            });
                        }
                    }
                }
                for f in &d.folds {
                    if f.scores[vi].is_none() {
                        table.skipped.push(Skip {
                            dataset: d.name.clone(),
                            variant: v.name.clone(),
                            fold: f.fold,
                        });
                    }
                }
            }
            if count_cuts {
                for f in &d.folds {
                    let per_criterion = config
                        .dmiat
                        .criteria()
                        .iter()
                        .map(|c| {
                            f.fitted
                                .cuts
                                .iter()
                                .filter(|cut| cut.criterion == *c)
                                .count()
                        })
                        .collect();
                    table.feature_counts.push(FeatureCount {
                        dataset: d.name.clone(),
                        fold: f.fold,
                        per_criterion,
                    });
                    if config.export_cuts {
                        table.cut_exports.push((
                            d.name.clone(),
                            f.fold,
                            format_cuts(&f.fitted.cuts, &d.domain),
                        ));
                    }
                }
            }
        }
    }
    Ok(table)
}
