//! Extreme-interval cut features gated by support and confidence.
//!
//! For every continuous attribute and every class, the training values are sorted
//! and two candidate subsets are examined: a prefix anchored at the minimum and a
//! suffix anchored at the maximum. The widest subset that holds at least
//! `min_support` rows of the target class and satisfies the confidence criterion
//! becomes a binary indicator feature.

use std::fmt;
use std::str::FromStr;

use crate::data::{sorted_order, ClassDistribution, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// The subset must contain only the target class.
    EntropyZero,
    /// The target's share of the subset over its share of the column must reach the threshold.
    Lift(f64),
}

impl Criterion {
    pub fn lift(threshold: f64) -> Result<Criterion> {
        if threshold.is_finite() && threshold > 1.0 {
            Ok(Criterion::Lift(threshold))
        } else {
            Err(Error::Config(format!(
                "lift threshold must be > 1, got {threshold}"
            )))
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::EntropyZero => f.write_str("entropy0"),
            Criterion::Lift(t) => {
                if t.fract() == 0.0 {
                    write!(f, "lift{t:.1}")
                } else {
                    write!(f, "lift{t}")
                }
            }
        }
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "entropy0" || s == "entropy(0)" {
            return Ok(Criterion::EntropyZero);
        }
        let body = s
            .strip_prefix("lift")
            .ok_or_else(|| Error::Config(format!("unknown criterion `{s}`")))?;
        let body = body.trim_start_matches('(').trim_end_matches(')');
        let t: f64 = body
            .parse()
            .map_err(|_| Error::Config(format!("bad lift threshold in `{s}`")))?;
        Criterion::lift(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmiatConfig {
    supp_fraction: f64,
    criteria: Vec<Criterion>,
}

impl DmiatConfig {
    /// Validates `supp_fraction` ∈ (0, 1] and drops repeated criteria, keeping first occurrences.
    pub fn new(supp_fraction: f64, criteria: Vec<Criterion>) -> Result<Self> {
        if !(supp_fraction > 0.0 && supp_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "support fraction must be in (0, 1], got {supp_fraction}"
            )));
        }
        let mut unique: Vec<Criterion> = Vec::with_capacity(criteria.len());
        for c in criteria {
            if let Criterion::Lift(t) = c {
                Criterion::lift(t)?;
            }
            if !unique.contains(&c) {
                unique.push(c);
            }
        }
        if unique.is_empty() {
            return Err(Error::Config("at least one criterion is required".into()));
        }
        Ok(DmiatConfig {
            supp_fraction,
            criteria: unique,
        })
    }

    /// 10% support with Entropy(0), Lift(1.5) and Lift(2.0).
    pub fn standard() -> Self {
        DmiatConfig::new(
            0.1,
            vec![
                Criterion::EntropyZero,
                Criterion::Lift(1.5),
                Criterion::Lift(2.0),
            ],
        )
        .expect("valid defaults")
    }

    pub fn supp_fraction(&self) -> f64 {
        self.supp_fraction
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    /// ceil(supp_fraction × n), never below 1. A 1e-9 slack keeps products such as
    /// 0.1 × 190 from rounding up past the integer.
    pub fn min_support(&self, n_train: usize) -> usize {
        ((self.supp_fraction * n_train as f64 - 1e-9).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Low,
    High,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Low => "low",
            Direction::High => "high",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Direction::Low),
            "high" => Ok(Direction::High),
            other => Err(Error::Config(format!("unknown direction `{other}`"))),
        }
    }
}

/// Training statistics of the subset behind a cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub subset_size: usize,
    pub subset_class_count: usize,
    /// Achieved lift, or subset entropy (always 0) for [`Criterion::EntropyZero`].
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutFeature {
    pub attr: usize,
    pub direction: Direction,
    /// Innermost included training value; membership is `v <= threshold` (low) or
    /// `v >= threshold` (high).
    pub threshold: f64,
    pub criterion: Criterion,
    pub target_class: usize,
    pub evidence: Evidence,
}

impl CutFeature {
    pub fn contains(&self, value: f64) -> bool {
        match self.direction {
            Direction::Low => value <= self.threshold,
            Direction::High => value >= self.threshold,
        }
    }
}

/// Shannon entropy in bits.
pub fn entropy(dist: &ClassDistribution) -> Result<f64> {
    let total = dist.total();
    if total == 0 {
        return Err(Error::Domain("entropy of an empty distribution".into()));
    }
    let n = total as f64;
    Ok(dist
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

/// `(subset[target] / |subset|) / (whole[target] / |whole|)`.
pub fn lift(subset: &ClassDistribution, whole: &ClassDistribution, target: usize) -> Result<f64> {
    if subset.total() == 0 {
        return Err(Error::Domain("lift of an empty subset".into()));
    }
    if whole.count(target) == 0 {
        return Err(Error::Domain(format!(
            "class {target} absent from the reference set"
        )));
    }
    Ok(lift_ratio(
        subset.count(target),
        subset.total(),
        whole.count(target),
        whole.total(),
    ))
}

fn lift_ratio(hits: usize, size: usize, class_total: usize, n: usize) -> f64 {
    (hits as f64 / size as f64) / (class_total as f64 / n as f64)
}

/// Location of a qualifying subset within a sorted column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    /// Last included position (low) or first included position (high).
    pub index: usize,
    pub evidence: Evidence,
}

/// Searches one end of a sorted column for the widest qualifying subset.
///
/// `column` holds `(value, class)` pairs in non-decreasing value order. A subset may
/// only end between two distinct values, must hold at least `min_support` rows of
/// `target`, must satisfy `criterion`, and may not span the whole column.
pub fn find_boundary(
    column: &[(f64, usize)],
    target: usize,
    direction: Direction,
    criterion: Criterion,
    min_support: usize,
) -> Option<Boundary> {
    let n = column.len();
    if n < 2 {
        return None;
    }
    // Orient so the anchored end is at position 0; `hits[m]` counts target rows among
    // the first `m` oriented rows.
    let at = |i: usize| match direction {
        Direction::Low => column[i],
        Direction::High => column[n - 1 - i],
    };
    let mut hits = Vec::with_capacity(n + 1);
    hits.push(0usize);
    for i in 0..n {
        hits.push(hits[i] + usize::from(at(i).1 == target));
    }
    let class_total = hits[n];
    if class_total == 0 {
        return None;
    }
    let legal = |m: usize| at(m - 1).0 != at(m).0;

    let size = match criterion {
        Criterion::EntropyZero => {
            // Purity of the first m rows is monotone in m, so bisect for the longest
            // pure prefix and step back to the nearest legal boundary.
            let (mut lo, mut hi) = (0usize, n);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if hits[mid] == mid {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            (min_support..=lo.min(n - 1))
                .rev()
                .find(|&m| m >= 1 && legal(m))?
        }
        Criterion::Lift(threshold) => (1..n).rev().find(|&m| {
            hits[m] >= min_support
                && legal(m)
                && lift_ratio(hits[m], m, class_total, n) >= threshold
        })?,
    };
    if hits[size] < min_support {
        return None;
    }
    let score = match criterion {
        Criterion::EntropyZero => 0.0,
        Criterion::Lift(_) => lift_ratio(hits[size], size, class_total, n),
    };
    let index = match direction {
        Direction::Low => size - 1,
        Direction::High => n - size,
    };
    Some(Boundary {
        index,
        evidence: Evidence {
            subset_size: size,
            subset_class_count: hits[size],
            score,
        },
    })
}

/// Generates cut features from the training rows.
///
/// Output order: attribute index, class-domain order, low before high, criterion
/// order. A cut whose (attribute, direction, threshold) repeats an earlier one is
/// dropped. Nominal attributes are skipped; rows missing the attribute take no part
/// in its search.
pub fn generate_cuts(ds: &Dataset, train_rows: &[usize], config: &DmiatConfig) -> Vec<CutFeature> {
    let mut cuts: Vec<CutFeature> = Vec::new();
    if train_rows.is_empty() {
        return cuts;
    }
    let min_support = config.min_support(train_rows.len());
    let attrs: Vec<usize> = ds.continuous_attributes().collect();
    for attr in attrs {
        let Ok(values) = ds.continuous(attr) else {
            continue;
        };
        let Ok(sorted) = sorted_order(ds, attr, train_rows) else {
            continue;
        };
        let column: Vec<(f64, usize)> = sorted
            .order
            .iter()
            .map(|&r| (values[r].unwrap_or_default(), ds.label(r)))
            .collect();
        for target in 0..ds.n_classes() {
            for direction in [Direction::Low, Direction::High] {
                for &criterion in config.criteria() {
                    let Some(b) = find_boundary(&column, target, direction, criterion, min_support)
                    else {
                        continue;
                    };
                    let threshold = column[b.index].0;
                    let duplicate = cuts.iter().any(|c| {
                        c.attr == attr && c.direction == direction && c.threshold == threshold
                    });
                    if !duplicate {
                        cuts.push(CutFeature {
                            attr,
                            direction,
                            threshold,
                            criterion,
                            target_class: target,
                            evidence: b.evidence,
                        });
                    }
                }
            }
        }
    }
    cuts
}

/// Indicator columns, one `Vec<u8>` per cut, aligned with `rows`.
pub fn apply_cuts(cuts: &[CutFeature], ds: &Dataset, rows: &[usize]) -> Result<Vec<Vec<u8>>> {
    cuts.iter()
        .map(|cut| {
            let values = ds.continuous(cut.attr)?;
            rows.iter()
                .map(|&r| {
                    let v = values
                        .get(r)
                        .ok_or_else(|| Error::Schema(format!("row {r} out of range")))?;
                    Ok(u8::from(v.is_some_and(|x| cut.contains(x))))
                })
                .collect()
        })
        .collect()
}

/// Tab-separated export, one cut per line:
/// `attr_index direction threshold criterion target_class subset_size class_count`.
pub fn format_cuts(cuts: &[CutFeature], class_domain: &[String]) -> String {
    cuts.iter()
        .map(|c| {
            format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                c.attr,
                c.direction,
                c.threshold,
                c.criterion,
                class_domain[c.target_class],
                c.evidence.subset_size,
                c.evidence.subset_class_count
            )
        })
        .collect()
}

/// Reads the export format back. The score is not part of the format and comes back as NaN.
pub fn parse_cuts(text: &str, class_domain: &[String]) -> Result<Vec<CutFeature>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 7 {
                return Err(Error::parse(
                    line,
                    format!("expected 7 fields, found {}", f.len()),
                ));
            }
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(line, format!("bad integer `{s}`")))
            };
            let target_class = class_domain
                .iter()
                .position(|c| c == f[4])
                .ok_or_else(|| Error::parse(line, format!("unknown class `{}`", f[4])))?;
            Ok(CutFeature {
                attr: num(f[0])?,
                direction: f[1]
                    .parse()
                    .map_err(|_| Error::parse(line, "bad direction"))?,
                threshold: f[2]
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad threshold `{}`", f[2])))?,
                criterion: f[3]
                    .parse()
                    .map_err(|_| Error::parse(line, "bad criterion"))?,
                target_class,
                evidence: Evidence {
                    subset_size: num(f[5])?,
                    subset_class_count: num(f[6])?,
                    score: f64::NAN,
                },
            })
        })
        .collect()
}
