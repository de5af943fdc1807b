//! Baseline discretizers: equal-width, equal-frequency and recursive entropy
//! minimization with MDL stopping (IEM). Each fits a [`DiscretizationScheme`] on a
//! training column; [`apply_scheme`] maps values to interval ids.
//!
//! `k` cut points define `k + 1` intervals `[-inf, d1], (d1, d2], ..., (dk, +inf]`.

use std::fmt;
use std::str::FromStr;

use crate::data::{ClassDistribution, Dataset};
use crate::dmiat::entropy;
use crate::error::{Error, Result};

pub const DEFAULT_INTERVALS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SchemeMethod {
    EqualWidth,
    EqualFrequency,
    Iem,
    /// Produced outside this crate and imported from a scheme file.
    External(String),
}

impl fmt::Display for SchemeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeMethod::EqualWidth => f.write_str("ew"),
            SchemeMethod::EqualFrequency => f.write_str("ef"),
            SchemeMethod::Iem => f.write_str("iem"),
            SchemeMethod::External(name) => f.write_str(name),
        }
    }
}

impl From<&str> for SchemeMethod {
    fn from(s: &str) -> Self {
        match s {
            "ew" => SchemeMethod::EqualWidth,
            "ef" => SchemeMethod::EqualFrequency,
            "iem" => SchemeMethod::Iem,
            other => SchemeMethod::External(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationScheme {
    pub attr: usize,
    /// Strictly increasing. Empty means a single "All" interval.
    pub cut_points: Vec<f64>,
    pub method: SchemeMethod,
}

impl DiscretizationScheme {
    pub fn n_intervals(&self) -> usize {
        self.cut_points.len() + 1
    }

    /// Interval id of a value: the number of cut points strictly below it.
    pub fn interval_of(&self, value: f64) -> usize {
        self.cut_points.partition_point(|&c| c < value)
    }
}

/// A discretizer to fit on training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Discretizer {
    EqualWidth(usize),
    EqualFrequency(usize),
    Iem,
}

impl Discretizer {
    pub fn method(&self) -> SchemeMethod {
        match self {
            Discretizer::EqualWidth(_) => SchemeMethod::EqualWidth,
            Discretizer::EqualFrequency(_) => SchemeMethod::EqualFrequency,
            Discretizer::Iem => SchemeMethod::Iem,
        }
    }

    /// Short tag used in variant and column names, e.g. `ew10`, `iem`.
    pub fn tag(&self) -> String {
        match self {
            Discretizer::EqualWidth(k) => format!("ew{k}"),
            Discretizer::EqualFrequency(k) => format!("ef{k}"),
            Discretizer::Iem => "iem".into(),
        }
    }

    /// Fits one scheme on the non-missing training values of a continuous attribute.
    pub fn fit(
        &self,
        ds: &Dataset,
        attr: usize,
        train_rows: &[usize],
    ) -> Result<DiscretizationScheme> {
        let values = ds.continuous(attr)?;
        let (xs, labels): (Vec<f64>, Vec<usize>) = train_rows
            .iter()
            .filter_map(|&r| values[r].map(|v| (v, ds.label(r))))
            .unzip();
        let cut_points = match self {
            Discretizer::EqualWidth(k) => equal_width(&xs, *k),
            Discretizer::EqualFrequency(k) => equal_frequency(&xs, *k),
            Discretizer::Iem => iem_mdl(&xs, &labels),
        };
        Ok(DiscretizationScheme {
            attr,
            cut_points,
            method: self.method(),
        })
    }
}

impl fmt::Display for Discretizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Discretizer::EqualWidth(k) => write!(f, "ew:{k}"),
            Discretizer::EqualFrequency(k) => write!(f, "ef:{k}"),
            Discretizer::Iem => f.write_str("iem"),
        }
    }
}

impl FromStr for Discretizer {
    type Err = Error;

    /// `ew[:k]`, `ef[:k]` or `iem`; `k` defaults to [`DEFAULT_INTERVALS`].
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, k) = match s.split_once(':') {
            Some((name, k)) => {
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::Config(format!("bad interval count in `{s}`")))?;
                if k < 2 {
                    return Err(Error::Config(format!(
                        "interval count must be >= 2 in `{s}`"
                    )));
                }
                (name, Some(k))
            }
            None => (s, None),
        };
        match (name, k) {
            ("ew", k) => Ok(Discretizer::EqualWidth(k.unwrap_or(DEFAULT_INTERVALS))),
            ("ef", k) => Ok(Discretizer::EqualFrequency(k.unwrap_or(DEFAULT_INTERVALS))),
            ("iem", None) => Ok(Discretizer::Iem),
            _ => Err(Error::Config(format!("unknown discretizer `{s}`"))),
        }
    }
}

fn dedup_increasing(mut cuts: Vec<f64>) -> Vec<f64> {
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// `k - 1` cut points at `min + i * (max - min) / k`. Fewer than two intervals, or a
/// constant column, yields no cuts.
pub fn equal_width(values: &[f64], k: usize) -> Vec<f64> {
    if k < 2 || values.is_empty() {
        return Vec::new();
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo >= hi {
        return Vec::new();
    }
    let width = (hi - lo) / k as f64;
    dedup_increasing(
        (1..k)
            .map(|i| lo + i as f64 * width)
            .filter(|&c| c > lo && c < hi)
            .collect(),
    )
}

/// Cuts at the legal split position nearest each rank `n * i / k`, placed at the
/// midpoint of the adjacent distinct values. Tie runs are never split.
pub fn equal_frequency(values: &[f64], k: usize) -> Vec<f64> {
    if k < 2 || values.len() < 2 {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let legal: Vec<usize> = (1..n).filter(|&p| sorted[p - 1] < sorted[p]).collect();
    if legal.is_empty() {
        return Vec::new();
    }
    let mut positions: Vec<usize> = (1..k)
        .map(|i| {
            let target = (n * i) as f64 / k as f64;
            // `legal` is ascending, so the first minimum is the smaller position on ties.
            *legal
                .iter()
                .min_by(|&&a, &&b| {
                    (a as f64 - target)
                        .abs()
                        .total_cmp(&(b as f64 - target).abs())
                })
                .expect("non-empty")
        })
        .collect();
    positions.dedup();
    dedup_increasing(
        positions
            .into_iter()
            .map(|p| (sorted[p - 1] + sorted[p]) / 2.0)
            .collect(),
    )
}

fn distribution(labels: &[usize], n_classes: usize) -> ClassDistribution {
    let mut counts = vec![0; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    ClassDistribution::new(counts)
}

fn entropy_of(d: &ClassDistribution) -> f64 {
    entropy(d).unwrap_or(0.0)
}

fn distinct_classes(d: &ClassDistribution) -> usize {
    d.counts().iter().filter(|&&c| c > 0).count()
}

/// MDL acceptance test for splitting a segment of `n` rows into `left`/`right`.
pub(crate) fn mdl_accepts(
    whole: &ClassDistribution,
    left: &ClassDistribution,
    right: &ClassDistribution,
) -> bool {
    let n = whole.total() as f64;
    let (e, e1, e2) = (entropy_of(whole), entropy_of(left), entropy_of(right));
    let weighted = (left.total() as f64 * e1 + right.total() as f64 * e2) / n;
    let gain = e - weighted;
    let (k, k1, k2) = (
        distinct_classes(whole) as f64,
        distinct_classes(left) as f64,
        distinct_classes(right) as f64,
    );
    let delta = (3f64.powf(k) - 2.0).log2() - (k * e - k1 * e1 - k2 * e2);
    gain > ((n - 1.0).log2() + delta) / n
}

/// Recursive entropy-minimizing discretization with MDL stopping.
///
/// Candidate cuts are midpoints between adjacent distinct values, restricted to
/// boundary points (skipped when both neighbouring value groups are pure and of the
/// same class). Ties in weighted entropy go to the smaller cut value.
pub fn iem_mdl(values: &[f64], labels: &[usize]) -> Vec<f64> {
    assert_eq!(values.len(), labels.len(), "values and labels must align");
    if values.len() < 2 {
        return Vec::new();
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut pairs: Vec<(f64, usize)> = values.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cuts = Vec::new();
    split_segment(&pairs, n_classes, &mut cuts);
    dedup_increasing(cuts)
}

/// Class of a value group if every row in it shares one class.
fn group_class(seg: &[(f64, usize)], start: usize) -> (usize, Option<usize>) {
    let v = seg[start].0;
    let mut end = start;
    let mut class = Some(seg[start].1);
    while end < seg.len() && seg[end].0 == v {
        if Some(seg[end].1) != class {
            class = None;
        }
        end += 1;
    }
    (end, class)
}

fn split_segment(seg: &[(f64, usize)], n_classes: usize, cuts: &mut Vec<f64>) {
    let n = seg.len();
    if n < 2 {
        return;
    }
    let whole = distribution(&seg.iter().map(|p| p.1).collect::<Vec<_>>(), n_classes);
    if distinct_classes(&whole) < 2 {
        return;
    }
    // Value groups with their single class, if pure.
    let mut groups: Vec<(usize, usize, Option<usize>)> = Vec::new();
    let mut start = 0;
    while start < n {
        let (end, class) = group_class(seg, start);
        groups.push((start, end, class));
        start = end;
    }

    let mut left = ClassDistribution::new(vec![0; n_classes]);
    let mut right = whole.clone();
    let mut best: Option<(f64, usize)> = None;
    for w in 0..groups.len().saturating_sub(1) {
        let (s, e, class) = groups[w];
        for p in &seg[s..e] {
            left.add(p.1);
            right.remove(p.1);
        }
        let next = groups[w + 1].2;
        if class.is_some() && class == next {
            continue;
        }
        let m = e;
        let weighted =
            (m as f64 * entropy_of(&left) + (n - m) as f64 * entropy_of(&right)) / n as f64;
        if best.is_none_or(|(b, _)| weighted < b - 1e-12) {
            best = Some((weighted, m));
        }
    }
    let Some((_, m)) = best else { return };
    let l = distribution(&seg[..m].iter().map(|p| p.1).collect::<Vec<_>>(), n_classes);
    let r = distribution(&seg[m..].iter().map(|p| p.1).collect::<Vec<_>>(), n_classes);
    if !mdl_accepts(&whole, &l, &r) {
        return;
    }
    cuts.push((seg[m - 1].0 + seg[m].0) / 2.0);
    split_segment(&seg[..m], n_classes, cuts);
    split_segment(&seg[m..], n_classes, cuts);
}

/// Interval ids for `rows`; `None` marks a missing value.
pub fn apply_scheme(
    scheme: &DiscretizationScheme,
    ds: &Dataset,
    rows: &[usize],
) -> Result<Vec<Option<usize>>> {
    let values = ds.continuous(scheme.attr)?;
    rows.iter()
        .map(|&r| {
            values
                .get(r)
                .map(|v| v.map(|x| scheme.interval_of(x)))
                .ok_or_else(|| Error::Schema(format!("row {r} out of range")))
        })
        .collect()
}

/// `attr_index<TAB>method<TAB>cut1,cut2,...`, with `All` for an empty cut list.
pub fn format_schemes(schemes: &[DiscretizationScheme]) -> String {
    schemes
        .iter()
        .map(|s| {
            let cuts = if s.cut_points.is_empty() {
                "All".to_string()
            } else {
                s.cut_points
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            format!("{}\t{}\t{}\n", s.attr, s.method, cuts)
        })
        .collect()
}

pub fn parse_schemes(text: &str) -> Result<Vec<DiscretizationScheme>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            let f: Vec<&str> = l.split('\t').map(str::trim).collect();
            if f.len() != 3 {
                return Err(Error::parse(
                    line,
                    format!("expected 3 fields, found {}", f.len()),
                ));
            }
            let attr = f[0]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad attribute index `{}`", f[0])))?;
            let cut_points = if f[2] == "All" || f[2].is_empty() {
                Vec::new()
            } else {
                f[2].split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| Error::parse(line, format!("bad cut point `{c}`")))
                    })
                    .collect::<Result<Vec<f64>>>()?
            };
            if cut_points.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::parse(line, "cut points must be strictly increasing"));
            }
            Ok(DiscretizationScheme {
                attr,
                cut_points,
                method: SchemeMethod::from(f[1]),
            })
        })
        .collect()
}
