//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero when
//! a criterion fails, except for those listed in `KNOWN_FAILURES`, which are
//! reported but tolerated.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dmiat::augment::Block;
use dmiat::classify::ClassifierKind;
use dmiat::data::{load, stratified_kfold, Column, Dataset};
use dmiat::discretize::{iem_mdl, Discretizer};
use dmiat::dmiat::{generate_cuts, Criterion, CutFeature, Direction, DmiatConfig};
use dmiat::experiment::{
    emit_results, expand_variants, fit_fold, run_experiment, ExperimentConfig, VariantKind,
};

/// Criteria whose measured outcome misses the target; see the project notes.
const KNOWN_FAILURES: &[u32] = &[6];

const SEED: u64 = 7;
const FOLDS: usize = 10;

type Check = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn glass() -> Dataset {
    load(&data_path("glass.csv")).expect("glass.csv")
}

fn iris() -> Dataset {
    load(&data_path("iris.csv")).expect("iris.csv")
}

fn attr_index(ds: &Dataset, name: &str) -> usize {
    ds.attributes()
        .iter()
        .position(|a| a.name == name)
        .expect("attribute")
}

fn entropy_bits(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

fn support_floor(supp: f64, n: usize) -> usize {
    (1..=n)
        .find(|&m| m as f64 >= supp * n as f64 - 1e-9)
        .unwrap_or(n)
        .max(1)
}

type CutKey = (usize, Direction, u64, String, usize, usize, usize);

fn key(
    attr: usize,
    dir: Direction,
    t: f64,
    c: Criterion,
    class: usize,
    size: usize,
    hits: usize,
) -> CutKey {
    (attr, dir, t.to_bits(), c.to_string(), class, size, hits)
}

/// Exhaustive search over every threshold value in the training column.
fn oracle_cuts(ds: &Dataset, train: &[usize], supp: f64, criteria: &[Criterion]) -> Vec<CutKey> {
    let min_support = support_floor(supp, train.len());
    let mut out: Vec<CutKey> = Vec::new();
    for attr in 0..ds.n_attributes() {
        let Ok(values) = ds.continuous(attr) else {
            continue;
        };
        let pts: Vec<(f64, usize)> = train
            .iter()
            .filter_map(|&r| values[r].map(|v| (v, ds.label(r))))
            .collect();
        let n = pts.len();
        let mut distinct: Vec<f64> = pts.iter().map(|p| p.0).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 2 {
            continue;
        }
        for target in 0..ds.n_classes() {
            let class_total = pts.iter().filter(|p| p.1 == target).count();
            if class_total == 0 {
                continue;
            }
            for dir in [Direction::Low, Direction::High] {
                let thresholds: Vec<f64> = match dir {
                    Direction::Low => distinct[..distinct.len() - 1]
                        .iter()
                        .rev()
                        .copied()
                        .collect(),
                    Direction::High => distinct[1..].to_vec(),
                };
                for &crit in criteria {
                    for &t in &thresholds {
                        let inside: Vec<usize> = pts
                            .iter()
                            .filter(|p| match dir {
                                Direction::Low => p.0 <= t,
                                Direction::High => p.0 >= t,
                            })
                            .map(|p| p.1)
                            .collect();
                        let size = inside.len();
                        let hits = inside.iter().filter(|&&c| c == target).count();
                        if hits < min_support {
                            continue;
                        }
                        let ok = match crit {
                            Criterion::EntropyZero => hits == size,
                            Criterion::Lift(th) => {
                                (hits as f64 / size as f64) / (class_total as f64 / n as f64) >= th
                            }
                        };
                        if ok {
                            if !out
                                .iter()
                                .any(|k| k.0 == attr && k.1 == dir && k.2 == t.to_bits())
                            {
                                out.push(key(attr, dir, t, crit, target, size, hits));
                            }
                            break;
                        }
                    }
                }
            }
        }
    }
    out
}

fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let n = rng.gen_range(5..=200);
    let n_attrs = rng.gen_range(1..=8);
    let n_classes = rng.gen_range(2..=5);
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
    let columns = (0..n_attrs)
        .map(|a| {
            let levels = rng.gen_range(2..40);
            let shift: f64 = rng.gen_range(0.0..3.0);
            let p_missing = if rng.gen_bool(0.3) { 0.08 } else { 0.0 };
            let col = labels
                .iter()
                .map(|&l| {
                    if rng.gen_bool(p_missing) {
                        None
                    } else {
                        let base = f64::from(rng.gen_range(0..levels)) / 4.0;
                        Some(base + shift * l as f64)
                    }
                })
                .collect();
            (format!("a{a}"), Column::Continuous(col))
        })
        .collect();
    let domain = (0..n_classes).map(|c| format!("c{c}")).collect();
    Dataset::new("synthetic", "class", columns, labels, domain).expect("valid synthetic dataset")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut mismatches, mut total_cuts) = (0usize, 0usize);
    let runs = 60;
    for _ in 0..runs {
        let ds = random_dataset(&mut rng);
        let supp = [0.05, 0.1, 0.2][rng.gen_range(0..3)];
        let mut criteria = vec![
            Criterion::EntropyZero,
            Criterion::Lift(1.5),
            Criterion::Lift(2.0),
        ];
        if rng.gen_bool(0.3) {
            criteria.push(Criterion::Lift(1.2));
        }
        let train: Vec<usize> = (0..ds.n_rows()).filter(|_| rng.gen_bool(0.9)).collect();
        if train.is_empty() {
            continue;
        }
        let config = DmiatConfig::new(supp, criteria.clone()).unwrap();
        let mut got: Vec<CutKey> = generate_cuts(&ds, &train, &config)
            .iter()
            .map(|c| {
                key(
                    c.attr,
                    c.direction,
                    c.threshold,
                    c.criterion,
                    c.target_class,
                    c.evidence.subset_size,
                    c.evidence.subset_class_count,
                )
            })
            .collect();
        let mut want = oracle_cuts(&ds, &train, supp, &criteria);
        total_cuts += want.len();
        got.sort();
        want.sort();
        if got != want {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 60.0,
        format!("{runs} datasets, {total_cuts} oracle cuts, {mismatches} mismatches, {secs:.2}s"),
    )
}

/// Recomputes a cut's evidence from the training rows.
fn check_cut(
    ds: &Dataset,
    train: &[usize],
    cut: &CutFeature,
    min_support: usize,
) -> Result<(), String> {
    let values = ds.continuous(cut.attr).unwrap();
    let present: Vec<(f64, usize)> = train
        .iter()
        .filter_map(|&r| values[r].map(|v| (v, ds.label(r))))
        .collect();
    let inside: Vec<usize> = present
        .iter()
        .filter(|p| match cut.direction {
            Direction::Low => p.0 <= cut.threshold,
            Direction::High => p.0 >= cut.threshold,
        })
        .map(|p| p.1)
        .collect();
    let hits = inside.iter().filter(|&&c| c == cut.target_class).count();
    let class_total = present.iter().filter(|p| p.1 == cut.target_class).count();
    if hits < min_support {
        return Err(format!("support {hits} < {min_support}"));
    }
    if inside.len() == present.len() {
        return Err("subset spans the whole column".into());
    }
    if !present.iter().any(|p| p.0 == cut.threshold) {
        return Err("threshold is not a training value".into());
    }
    // Rows tied with the innermost included value must all be inside, and the first
    // excluded value must differ from it.
    let outside = present
        .iter()
        .filter(|p| match cut.direction {
            Direction::Low => p.0 > cut.threshold,
            Direction::High => p.0 < cut.threshold,
        })
        .count();
    if outside + inside.len() != present.len() {
        return Err("tie split".into());
    }
    match cut.criterion {
        Criterion::EntropyZero => {
            let mut counts = vec![0; ds.n_classes()];
            for &c in &inside {
                counts[c] += 1;
            }
            if entropy_bits(&counts) != 0.0 {
                return Err("impure entropy-zero subset".into());
            }
        }
        Criterion::Lift(t) => {
            let lift =
                (hits as f64 / inside.len() as f64) / (class_total as f64 / present.len() as f64);
            if lift < t - 1e-9 {
                return Err(format!("lift {lift} < {t}"));
            }
        }
    }
    if cut.evidence.subset_size != inside.len() || cut.evidence.subset_class_count != hits {
        return Err("reported evidence differs from recomputation".into());
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    let config = DmiatConfig::standard();
    let (mut checked, mut bad) = (0usize, Vec::new());
    for ds in [glass(), iris()] {
        for (i, fold) in stratified_kfold(&ds, FOLDS, SEED)
            .unwrap()
            .iter()
            .enumerate()
        {
            let min_support = support_floor(0.1, fold.train.len());
            for cut in generate_cuts(&ds, &fold.train, &config) {
                checked += 1;
                if let Err(e) = check_cut(&ds, &fold.train, &cut, min_support) {
                    bad.push(format!("{} fold {i}: {e}", ds.name()));
                }
            }
        }
    }
    outcome(
        bad.is_empty() && checked > 0,
        format!(
            "{checked} cuts checked, {} violations {:?}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn criterion_3() -> Outcome {
    let ds = glass();
    let config = DmiatConfig::new(0.1, vec![Criterion::Lift(1.5)]).unwrap();
    let (ba, ca) = (attr_index(&ds, "Ba"), attr_index(&ds, "Ca"));
    let class7 = ds.class_id("7").unwrap();
    let class2 = ds.class_id("2").unwrap();
    let mut hits = Vec::new();
    let mut best_ba_lift = 0.0f64;
    for (i, fold) in stratified_kfold(&ds, FOLDS, SEED)
        .unwrap()
        .iter()
        .enumerate()
    {
        let cuts = generate_cuts(&ds, &fold.train, &config);
        let recomputed_lift = |c: &CutFeature| {
            let values = ds.continuous(c.attr).unwrap();
            let n = fold.train.len() as f64;
            let total = fold
                .train
                .iter()
                .filter(|&&r| ds.label(r) == c.target_class)
                .count() as f64;
            let inside: Vec<usize> = fold
                .train
                .iter()
                .copied()
                .filter(|&r| c.contains(values[r].unwrap()))
                .collect();
            let in_class = inside
                .iter()
                .filter(|&&r| ds.label(r) == c.target_class)
                .count();
            (
                (in_class as f64 / inside.len() as f64) / (total / n),
                in_class,
            )
        };
        let ba_ok = cuts.iter().any(|c| {
            if c.attr != ba || c.direction != Direction::High || c.target_class != class7 {
                return false;
            }
            let (lift, in_class) = recomputed_lift(c);
            best_ba_lift = best_ba_lift.max(lift);
            c.threshold > 0.05 && c.threshold < 0.45 && in_class >= 20 && lift >= 5.0
        });
        let ca_ok = cuts.iter().any(|c| {
            c.attr == ca
                && c.direction == Direction::Low
                && c.threshold > 8.0
                && c.threshold < 8.8
                && recomputed_lift(c).0 >= 1.5
        });
        let ca_class2 = cuts
            .iter()
            .any(|c| c.attr == ca && c.direction == Direction::Low && c.target_class == class2);
        if ba_ok && ca_ok {
            hits.push((i, ca_class2));
        }
    }
    outcome(
        !hits.is_empty(),
        format!("folds with both cuts (fold, Ca cut targets class 2): {hits:?}; best Ba lift {best_ba_lift:.3}"),
    )
}

fn criterion_4() -> Outcome {
    let config = DmiatConfig::standard();
    let data = [(glass(), 8, 20), (iris(), 12, 28)];
    let splits: Vec<_> = data
        .iter()
        .map(|(ds, _, _)| stratified_kfold(ds, FOLDS, SEED).unwrap())
        .collect();
    let start = Instant::now();
    let counts: Vec<Vec<usize>> = data
        .iter()
        .zip(&splits)
        .map(|((ds, _, _), folds)| {
            folds
                .iter()
                .map(|f| generate_cuts(ds, &f.train, &config).len())
                .collect()
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let in_range = data
        .iter()
        .zip(&counts)
        .all(|((_, lo, hi), c)| c.iter().all(|n| (*lo..=*hi).contains(n)));
    let mean = |c: &[usize]| c.iter().sum::<usize>() as f64 / c.len() as f64;
    outcome(
        in_range && secs < 5.0,
        format!(
            "glass {:?} (mean {:.1}), iris {:?} (mean {:.1}), {secs:.3}s",
            counts[0],
            mean(&counts[0]),
            counts[1],
            mean(&counts[1])
        ),
    )
}

/// Exhaustive entropy minimization over every split between distinct values.
fn oracle_iem(pairs: &[(f64, usize)], n_classes: usize, cuts: &mut Vec<f64>) {
    let n = pairs.len();
    let counts = |s: &[(f64, usize)]| {
        let mut c = vec![0usize; n_classes];
        for p in s {
            c[p.1] += 1;
        }
        c
    };
    let whole = counts(pairs);
    let k = whole.iter().filter(|&&c| c > 0).count();
    if n < 2 || k < 2 {
        return;
    }
    let mut best: Option<(f64, usize)> = None;
    for m in 1..n {
        if pairs[m - 1].0 == pairs[m].0 {
            continue;
        }
        let e = (m as f64 * entropy_bits(&counts(&pairs[..m]))
            + (n - m) as f64 * entropy_bits(&counts(&pairs[m..])))
            / n as f64;
        if best.is_none_or(|(b, _)| e < b - 1e-12) {
            best = Some((e, m));
        }
    }
    let Some((e_split, m)) = best else { return };
    let (l, r) = (counts(&pairs[..m]), counts(&pairs[m..]));
    let (e, e1, e2) = (entropy_bits(&whole), entropy_bits(&l), entropy_bits(&r));
    let k1 = l.iter().filter(|&&c| c > 0).count() as f64;
    let k2 = r.iter().filter(|&&c| c > 0).count() as f64;
    let k = k as f64;
    let delta = (3f64.powf(k) - 2.0).log2() - (k * e - k1 * e1 - k2 * e2);
    let nf = n as f64;
    if e - e_split <= ((nf - 1.0).log2() + delta) / nf {
        return;
    }
    cuts.push((pairs[m - 1].0 + pairs[m].0) / 2.0);
    oracle_iem(&pairs[..m], n_classes, cuts);
    oracle_iem(&pairs[m..], n_classes, cuts);
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let single = iem_mdl(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0; 5]).is_empty();
    notes.push(format!("single-class empty: {single}"));
    let values: Vec<f64> = (1..=20).map(f64::from).collect();
    let labels: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
    let sep = iem_mdl(&values, &labels);
    let separable = sep == vec![10.5];
    notes.push(format!("separable cuts {sep:?}"));

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut mismatches = 0;
    let mut oracle_total = 0;
    for _ in 0..20 {
        let n = rng.gen_range(2..=100);
        let n_classes = rng.gen_range(2..=4);
        let levels = rng.gen_range(3..30);
        let shift = rng.gen_range(0..20);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
        let values: Vec<f64> = labels
            .iter()
            .map(|&l| f64::from(rng.gen_range(0..levels) + shift * l as u32))
            .collect();
        let got = iem_mdl(&values, &labels);
        let mut pairs: Vec<(f64, usize)> =
            values.iter().copied().zip(labels.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut want = Vec::new();
        oracle_iem(&pairs, n_classes, &mut want);
        want.sort_by(f64::total_cmp);
        oracle_total += want.len();
        if got.len() != want.len() || got.iter().zip(&want).any(|(a, b)| (a - b).abs() > 1e-9) {
            mismatches += 1;
        }
    }
    notes.push(format!(
        "random columns: {oracle_total} oracle cuts, {mismatches} mismatches"
    ));

    let ds = glass();
    let fe = attr_index(&ds, "Fe");
    let empty_folds = stratified_kfold(&ds, FOLDS, SEED)
        .unwrap()
        .iter()
        .filter(|f| {
            Discretizer::Iem
                .fit(&ds, fe, &f.train)
                .unwrap()
                .cut_points
                .is_empty()
        })
        .count();
    notes.push(format!("glass Fe without cuts on {empty_folds}/10 folds"));
    outcome(
        single && separable && mismatches == 0 && empty_folds >= 8,
        notes.join("; "),
    )
}

fn nb_means(ds_names: &[&str]) -> BTreeMap<(String, String), f64> {
    let config = ExperimentConfig {
        data: ds_names.iter().map(|n| data_path(n)).collect(),
        discretizers: vec![Discretizer::Iem],
        variants: vec![
            VariantKind::Original,
            VariantKind::OriginalDmiat,
            VariantKind::Discretized,
            VariantKind::OriginalDiscretized,
        ],
        classifiers: vec![ClassifierKind::NaiveBayes],
        ..ExperimentConfig::default()
    };
    let table = run_experiment(&config).unwrap();
    assert!(table.failures.is_empty(), "{:?}", table.failures);
    table
        .summary()
        .into_iter()
        .map(|s| ((s.dataset, s.variant), s.mean))
        .collect()
}

fn criterion_6() -> Outcome {
    let means = nb_means(&["glass.csv", "iris.csv"]);
    let mut pass = true;
    let mut notes = Vec::new();
    for ds in ["glass", "iris"] {
        let m = |v: &str| means[&(ds.to_string(), v.to_string())];
        let (a, a_dm, d, a_d) = (m("A"), m("A+DMIAT"), m("D[iem]"), m("A+D[iem]"));
        let ok_dm = a_dm >= a - 0.005;
        let ok_d = a_d >= d - 0.005;
        pass &= ok_dm && ok_d;
        notes.push(format!(
            "{ds}: A {a:.4} vs A+DMIAT {a_dm:.4} [{}], IEM {d:.4} vs A+IEM {a_d:.4} [{}]",
            if ok_dm { "ok" } else { "miss" },
            if ok_d { "ok" } else { "miss" }
        ));
    }
    outcome(pass, notes.join("; "))
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for ds in [glass(), iris()] {
        let blocks: Vec<Block> = ExperimentConfig::default()
            .discretizers
            .into_iter()
            .map(Block::Fit)
            .collect();
        let variants = expand_variants(&VariantKind::ALL, &blocks);
        let classifiers = [
            ClassifierKind::NaiveBayes,
            ClassifierKind::Knn,
            ClassifierKind::Logistic,
        ];
        let dmiat = DmiatConfig::standard();
        let (mut same, mut changed_scores) = (0, 0);
        let folds = stratified_kfold(&ds, FOLDS, SEED).unwrap();
        for fold in &folds {
            let mut corrupted = ds.labels().to_vec();
            for &r in &fold.test {
                corrupted[r] = (corrupted[r] + 1) % ds.n_classes();
            }
            let bad = ds.with_labels(corrupted).unwrap();
            let clean = fit_fold(&ds, fold, &blocks, &variants, &dmiat, &classifiers).unwrap();
            let dirty = fit_fold(&bad, fold, &blocks, &variants, &dmiat, &classifiers).unwrap();
            if clean.fitted == dirty.fitted && clean.models == dirty.models {
                same += 1;
            }
            if clean.score().unwrap() != dirty.score().unwrap() {
                changed_scores += 1;
            }
        }
        pass &= same == folds.len() && changed_scores > 0;
        notes.push(format!(
            "{}: artifacts identical on {same}/{} folds, accuracies changed on {changed_scores}",
            ds.name(),
            folds.len()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn read_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let config = ExperimentConfig {
        data: vec![data_path("glass.csv"), data_path("iris.csv")],
        export_cuts: true,
        ..ExperimentConfig::default()
    };
    let tmp = tempfile::tempdir().unwrap();
    let mut trees = Vec::new();
    for run in ["one", "two"] {
        let dir = tmp.path().join(run);
        emit_results(&run_experiment(&config).unwrap(), &dir).unwrap();
        trees.push(read_tree(&dir));
    }
    let files = trees[0].len();
    let records = trees[0].get(Path::new("results.csv")).map_or(0, |b| {
        b.iter().filter(|&&c| c == b'\n').count().saturating_sub(1)
    });
    outcome(
        trees[0] == trees[1] && files > 5,
        format!(
            "{files} files, {records} records, identical: {}",
            trees[0] == trees[1]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 8] = [
        (1, "cut generation matches exhaustive oracle", criterion_1),
        (2, "cut soundness on real data", criterion_2),
        (3, "glass Ba/Ca worked example", criterion_3),
        (4, "cut counts and runtime", criterion_4),
        (5, "IEM golden behaviour", criterion_5),
        (6, "direction of effect with naive Bayes", criterion_6),
        (7, "no test-fold leakage", criterion_7),
        (8, "deterministic harness output", criterion_8),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let known = !o.pass && KNOWN_FAILURES.contains(&id);
        if !o.pass && !known {
            unexpected += 1;
        }
        println!(
            "criterion {id} {tag}{}: {name} | {}",
            if known { " (known)" } else { "" },
            o.detail
        );
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
