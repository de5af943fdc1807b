//! Tabular datasets, file ingestion, fold construction and sorted column access.
//!
//! A [`Dataset`] is stored column-wise. Continuous columns hold `Option<f64>`
//! (`None` is the `?` missing marker); nominal columns hold codes into a per-column
//! symbol list. Class labels are indices into [`Dataset::class_domain`], which is
//! ordered by first appearance in the source file.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MISSING: &str = "?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttrKind {
    Continuous,
    Nominal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttrKind,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Continuous(Vec<Option<f64>>),
    Nominal {
        symbols: Vec<String>,
        codes: Vec<Option<usize>>,
    },
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Continuous(v) => v.len(),
            Column::Nominal { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> AttrKind {
        match self {
            Column::Continuous(_) => AttrKind::Continuous,
            Column::Nominal { .. } => AttrKind::Nominal,
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Continuous(v) => Column::Continuous(rows.iter().map(|&r| v[r]).collect()),
            Column::Nominal { symbols, codes } => Column::Nominal {
                symbols: symbols.clone(),
                codes: rows.iter().map(|&r| codes[r]).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Keel,
}

impl Format {
    /// `.dat` and `.keel` files are KEEL, everything else is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("dat") || ext.eq_ignore_ascii_case("keel") => {
                Format::Keel
            }
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    class_name: String,
    attributes: Vec<Attribute>,
    columns: Vec<Column>,
    labels: Vec<usize>,
    class_domain: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from named columns, validating every table invariant.
    pub fn new(
        name: impl Into<String>,
        class_name: impl Into<String>,
        columns: Vec<(String, Column)>,
        labels: Vec<usize>,
        class_domain: Vec<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let ds = Self::from_parts_unchecked(name, class_name, columns, labels, class_domain);
        ds.validate()?;
        Ok(ds)
    }

    pub(crate) fn from_parts_unchecked(
        name: impl Into<String>,
        class_name: impl Into<String>,
        columns: Vec<(String, Column)>,
        labels: Vec<usize>,
        class_domain: Vec<String>,
    ) -> Self {
        let (attributes, columns) = columns
            .into_iter()
            .enumerate()
            .map(|(index, (name, col))| {
                (
                    Attribute {
                        name,
                        kind: col.kind(),
                        index,
                    },
                    col,
                )
            })
            .unzip();
        Dataset {
            name: name.into(),
            class_name: class_name.into(),
            attributes,
            columns,
            labels,
            class_domain,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if self.class_domain.len() < 2 {
            return Err(Error::Domain(format!(
                "need at least two classes, found {}",
                self.class_domain.len()
            )));
        }
        if let Some(bad) = self.labels.iter().find(|&&l| l >= self.class_domain.len()) {
            return Err(Error::Domain(format!(
                "label id {bad} outside class domain"
            )));
        }
        let mut seen = HashSet::new();
        for (attr, col) in self.attributes.iter().zip(&self.columns) {
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate attribute name `{}`",
                    attr.name
                )));
            }
            if col.len() != n {
                return Err(Error::Schema(format!(
                    "column `{}` has {} values, expected {n}",
                    attr.name,
                    col.len()
                )));
            }
            match col {
                Column::Continuous(v) => {
                    if v.iter().flatten().any(|x| !x.is_finite()) {
                        return Err(Error::Domain(format!(
                            "non-finite value in continuous attribute `{}`",
                            attr.name
                        )));
                    }
                }
                Column::Nominal { symbols, codes } => {
                    if codes.iter().flatten().any(|&c| c >= symbols.len()) {
                        return Err(Error::Schema(format!(
                            "nominal code outside symbol list in `{}`",
                            attr.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, attr: usize) -> Option<&Column> {
        self.columns.get(attr)
    }

    /// Values of a continuous attribute, or an error for nominal/out-of-range indices.
    pub fn continuous(&self, attr: usize) -> Result<&[Option<f64>]> {
        match self.columns.get(attr) {
            Some(Column::Continuous(v)) => Ok(v),
            Some(Column::Nominal { .. }) => Err(Error::NotContinuous(attr)),
            None => Err(Error::Schema(format!(
                "attribute index {attr} out of range ({} attributes)",
                self.attributes.len()
            ))),
        }
    }

    pub fn continuous_attributes(&self) -> impl Iterator<Item = usize> + '_ {
        self.attributes
            .iter()
            .filter(|a| a.kind == AttrKind::Continuous)
            .map(|a| a.index)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> usize {
        self.labels[row]
    }

    pub fn class_domain(&self) -> &[String] {
        &self.class_domain
    }

    pub fn n_classes(&self) -> usize {
        self.class_domain.len()
    }

    pub fn class_symbol(&self, class: usize) -> &str {
        &self.class_domain[class]
    }

    pub fn class_id(&self, symbol: &str) -> Option<usize> {
        self.class_domain.iter().position(|s| s == symbol)
    }

    pub fn all_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).collect()
    }

    /// Restricts the table to `rows` (in the given order). Schema, symbol lists and
    /// class domain are kept.
    pub fn select(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return Err(Error::Schema(format!("row {bad} out of range")));
        }
        Ok(Dataset {
            name: self.name.clone(),
            class_name: self.class_name.clone(),
            attributes: self.attributes.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            class_domain: self.class_domain.clone(),
        })
    }

    /// Returns a copy with the given labels, used to audit fitting for leakage.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset> {
        if labels.len() != self.n_rows() {
            return Err(Error::Schema(
                "label vector length differs from row count".into(),
            ));
        }
        let ds = Dataset {
            labels,
            ..self.clone()
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn same_schema(&self, other: &Dataset) -> bool {
        self.attributes == other.attributes
            && self.class_domain == other.class_domain
            && self
                .columns
                .iter()
                .zip(&other.columns)
                .all(|(a, b)| match (a, b) {
                    (Column::Continuous(_), Column::Continuous(_)) => true,
                    (Column::Nominal { symbols: x, .. }, Column::Nominal { symbols: y, .. }) => {
                        x == y
                    }
                    _ => false,
                })
    }

    fn cell(&self, attr: usize, row: usize) -> String {
        match &self.columns[attr] {
            Column::Continuous(v) => v[row].map_or_else(|| MISSING.to_string(), |x| x.to_string()),
            Column::Nominal { symbols, codes } => {
                codes[row].map_or_else(|| MISSING.to_string(), |c| symbols[c].clone())
            }
        }
    }

    /// CSV rendering: header row, comma separated, class last.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for a in &self.attributes {
            out.push_str(&a.name);
            out.push(',');
        }
        out.push_str(&self.class_name);
        out.push('\n');
        for row in 0..self.n_rows() {
            for attr in 0..self.n_attributes() {
                out.push_str(&self.cell(attr, row));
                out.push(',');
            }
            out.push_str(&self.class_domain[self.labels[row]]);
            out.push('\n');
        }
        out
    }

    /// KEEL `.dat` rendering. Unlike CSV this preserves nominal kinds for numeric-looking
    /// symbols.
    pub fn to_keel(&self) -> String {
        let mut out = String::new();
        let relation = if self.name.is_empty() {
            "data"
        } else {
            &self.name
        };
        let _ = writeln!(out, "@relation {relation}");
        for (attr, col) in self.attributes.iter().zip(&self.columns) {
            match col {
                Column::Continuous(v) => {
                    let mut it = v.iter().flatten();
                    match it.next() {
                        Some(&first) => {
                            let (lo, hi) =
                                it.fold((first, first), |(lo, hi), &x| (lo.min(x), hi.max(x)));
                            let _ = writeln!(out, "@attribute {} real [{lo}, {hi}]", attr.name);
                        }
                        None => {
                            let _ = writeln!(out, "@attribute {} real", attr.name);
                        }
                    }
                }
                Column::Nominal { symbols, .. } => {
                    let _ = writeln!(out, "@attribute {} {{{}}}", attr.name, symbols.join(","));
                }
            }
        }
        let _ = writeln!(
            out,
            "@attribute {} {{{}}}",
            self.class_name,
            self.class_domain.join(",")
        );
        let inputs: Vec<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        let _ = writeln!(out, "@inputs {}", inputs.join(", "));
        let _ = writeln!(out, "@outputs {}", self.class_name);
        out.push_str("@data\n");
        for row in 0..self.n_rows() {
            for attr in 0..self.n_attributes() {
                out.push_str(&self.cell(attr, row));
                out.push_str(", ");
            }
            out.push_str(&self.class_domain[self.labels[row]]);
            out.push('\n');
        }
        out
    }
}

/// Reads a CSV or KEEL file (chosen by extension) and names the dataset after the file stem.
pub fn load(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let ds = parse_table(&text, Format::from_path(path))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    Ok(ds.with_name(stem))
}

pub fn parse_table(text: &str, format: Format) -> Result<Dataset> {
    match format {
        Format::Csv => parse_csv(text),
        Format::Keel => parse_keel(text),
    }
}

struct ClassInterner {
    domain: Vec<String>,
    ids: HashMap<String, usize>,
}

impl ClassInterner {
    fn new() -> Self {
        ClassInterner {
            domain: Vec::new(),
            ids: HashMap::new(),
        }
    }

    fn intern(&mut self, symbol: &str, line: usize) -> Result<usize> {
        if symbol.is_empty() || symbol == MISSING {
            return Err(Error::parse(line, "missing class label"));
        }
        if let Some(&id) = self.ids.get(symbol) {
            return Ok(id);
        }
        let id = self.domain.len();
        self.domain.push(symbol.to_string());
        self.ids.insert(symbol.to_string(), id);
        Ok(id)
    }
}

fn is_missing(cell: &str) -> bool {
    cell == MISSING || cell.is_empty()
}

fn parse_finite(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_csv(text: &str) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or(Error::EmptyDataset)?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if names.len() < 2 {
        return Err(Error::parse(
            1,
            "need at least one attribute and a class column",
        ));
    }
    let width = names.len();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); width - 1];
    let mut classes = ClassInterner::new();
    let mut labels = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(Error::parse(
                line,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        labels.push(classes.intern(fields[width - 1], line)?);
        for (col, field) in cells.iter_mut().zip(&fields) {
            col.push((*field).to_string());
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let columns = names[..width - 1]
        .iter()
        .cloned()
        .zip(cells)
        .map(|(name, raw)| (name, infer_column(raw)))
        .collect();
    Dataset::new(
        "",
        names[width - 1].clone(),
        columns,
        labels,
        classes.domain,
    )
}

/// Continuous iff every non-missing cell parses as a finite real.
fn infer_column(raw: Vec<String>) -> Column {
    let numeric = raw
        .iter()
        .filter(|c| !is_missing(c))
        .all(|c| parse_finite(c).is_some());
    if numeric {
        Column::Continuous(
            raw.iter()
                .map(|c| if is_missing(c) { None } else { parse_finite(c) })
                .collect(),
        )
    } else {
        let mut symbols: Vec<String> = Vec::new();
        let mut ids: HashMap<String, usize> = HashMap::new();
        let codes = raw
            .into_iter()
            .map(|c| {
                if is_missing(&c) {
                    return None;
                }
                let next = symbols.len();
                let id = *ids.entry(c.clone()).or_insert_with(|| {
                    symbols.push(c);
                    next
                });
                Some(id)
            })
            .collect();
        Column::Nominal { symbols, codes }
    }
}

enum KeelType {
    Real,
    Nominal(Vec<String>),
}

fn strip_quotes(s: &str) -> &str {
    s.trim_matches(|c| c == '\'' || c == '"')
}

fn parse_keel_attribute(rest: &str, line: usize) -> Result<(String, KeelType)> {
    let rest = rest.trim();
    let (name, spec) = if let Some(stripped) = rest.strip_prefix('\'') {
        let end = stripped
            .find('\'')
            .ok_or_else(|| Error::parse(line, "unterminated quoted attribute name"))?;
        (stripped[..end].to_string(), stripped[end + 1..].trim())
    } else {
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '{')
            .ok_or_else(|| Error::parse(line, "attribute declaration without a type"))?;
        (rest[..end].to_string(), rest[end..].trim())
    };
    if let Some(body) = spec.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| Error::parse(line, "unterminated nominal domain"))?;
        let symbols = body
            .split(',')
            .map(|s| strip_quotes(s.trim()).to_string())
            .filter(|s| !s.is_empty())
            .collect();
        return Ok((name, KeelType::Nominal(symbols)));
    }
    let ty = spec
        .split(|c: char| c.is_whitespace() || c == '[')
        .next()
        .unwrap_or_default()
        .to_ascii_lowercase();
    match ty.as_str() {
        "real" | "integer" | "numeric" => Ok((name, KeelType::Real)),
        other => Err(Error::parse(
            line,
            format!("unknown attribute type `{other}`"),
        )),
    }
}

fn parse_keel(text: &str) -> Result<Dataset> {
    let mut relation = String::new();
    let mut decls: Vec<(String, KeelType)> = Vec::new();
    let mut outputs: Option<String> = None;
    let mut in_data = false;
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('%') {
            continue;
        }
        if in_data {
            rows.push((
                line,
                l.split(',')
                    .map(|s| strip_quotes(s.trim()).to_string())
                    .collect(),
            ));
            continue;
        }
        let (directive, rest) = match l.find(char::is_whitespace) {
            Some(p) => (&l[..p], &l[p..]),
            None => (l, ""),
        };
        match directive.to_ascii_lowercase().as_str() {
            "@relation" => relation = strip_quotes(rest.trim()).to_string(),
            "@attribute" => decls.push(parse_keel_attribute(rest, line)?),
            "@inputs" | "@input" => {}
            "@outputs" | "@output" => {
                outputs = rest.split(',').next().map(|s| s.trim().to_string())
            }
            "@data" => in_data = true,
            other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
        }
    }
    if decls.len() < 2 {
        return Err(Error::parse(
            0,
            "need at least one attribute and a class attribute",
        ));
    }
    let class_idx = match &outputs {
        Some(name) => decls
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::parse(0, format!("@outputs names unknown attribute `{name}`")))?,
        None => decls.len() - 1,
    };
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let width = decls.len();
    // A declared class domain fixes class order, including classes absent from the data.
    let mut classes = ClassInterner::new();
    if let KeelType::Nominal(symbols) = &decls[class_idx].1 {
        for (i, s) in symbols.iter().enumerate() {
            classes.intern(s, i)?;
        }
    }
    let mut labels = Vec::with_capacity(rows.len());
    let mut columns: Vec<Column> = decls
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != class_idx)
        .map(|(_, (_, ty))| match ty {
            KeelType::Real => Column::Continuous(Vec::with_capacity(rows.len())),
            KeelType::Nominal(symbols) => Column::Nominal {
                symbols: symbols.clone(),
                codes: Vec::with_capacity(rows.len()),
            },
        })
        .collect();

    for (line, fields) in &rows {
        if fields.len() != width {
            return Err(Error::parse(
                *line,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        let mut col_iter = columns.iter_mut();
        for (i, cell) in fields.iter().enumerate() {
            if i == class_idx {
                if let KeelType::Nominal(symbols) = &decls[i].1 {
                    if !symbols.is_empty() && !symbols.contains(cell) && !is_missing(cell) {
                        return Err(Error::parse(*line, format!("class `{cell}` not declared")));
                    }
                }
                labels.push(classes.intern(cell, *line)?);
                continue;
            }
            let Some(col) = col_iter.next() else {
                unreachable!("one column per non-class declaration")
            };
            match col {
                Column::Continuous(v) => {
                    if is_missing(cell) {
                        v.push(None);
                    } else {
                        let x = parse_finite(cell).ok_or_else(|| {
                            Error::parse(*line, format!("`{cell}` is not a real number"))
                        })?;
                        v.push(Some(x));
                    }
                }
                Column::Nominal { symbols, codes } => {
                    if is_missing(cell) {
                        codes.push(None);
                    } else {
                        let code = symbols.iter().position(|s| s == cell).ok_or_else(|| {
                            Error::parse(*line, format!("`{cell}` not in declared nominal domain"))
                        })?;
                        codes.push(Some(code));
                    }
                }
            }
        }
    }

    let class_name = decls[class_idx].0.clone();
    let named = decls
        .into_iter()
        .enumerate()
        .filter(|(i, _)| *i != class_idx)
        .map(|(_, (name, _))| name)
        .zip(columns)
        .collect();
    Dataset::new(relation, class_name, named, labels, classes.domain)
}

/// One train/test split; both index sets are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPair {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold split.
///
/// Rows of each class (in class-domain order) are shuffled with a ChaCha8 stream
/// seeded by `seed` and dealt round-robin into folds, continuing the deal position
/// across classes so overall fold sizes also differ by at most one.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<FoldPair>> {
    let n = ds.n_rows();
    if k < 2 {
        return Err(Error::Config(format!(
            "fold count must be at least 2, got {k}"
        )));
    }
    if k > n {
        return Err(Error::Config(format!("{k} folds requested for {n} rows")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; n];
    let mut offset = 0;
    for class in 0..ds.n_classes() {
        let mut rows: Vec<usize> = (0..n).filter(|&r| ds.label(r) == class).collect();
        rows.shuffle(&mut rng);
        for (i, &r) in rows.iter().enumerate() {
            fold_of[r] = (offset + i) % k;
        }
        offset += rows.len();
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&r| fold_of[r] == f);
            FoldPair { train, test }
        })
        .collect())
}

/// Non-missing rows in ascending value order plus the rows whose value is missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedRows {
    pub order: Vec<usize>,
    pub missing: Vec<usize>,
}

/// Stable ascending order of `rows` by attribute value; equal values keep ascending
/// row-index order.
pub fn sorted_order(ds: &Dataset, attr: usize, rows: &[usize]) -> Result<SortedRows> {
    let values = ds.continuous(attr)?;
    let (mut present, missing): (Vec<usize>, Vec<usize>) =
        rows.iter().copied().partition(|&r| values[r].is_some());
    present.sort_by(|&a, &b| {
        let (x, y) = (values[a].unwrap_or_default(), values[b].unwrap_or_default());
        x.total_cmp(&y).then(a.cmp(&b))
    });
    Ok(SortedRows {
        order: present,
        missing,
    })
}

/// Per-class row counts, indexed by class id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassDistribution {
    counts: Vec<usize>,
}

impl ClassDistribution {
    pub fn new(counts: Vec<usize>) -> Self {
        ClassDistribution { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn count(&self, class: usize) -> usize {
        self.counts.get(class).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn add(&mut self, class: usize) {
        if class >= self.counts.len() {
            self.counts.resize(class + 1, 0);
        }
        self.counts[class] += 1;
    }

    pub fn remove(&mut self, class: usize) {
        self.counts[class] -= 1;
    }
}

pub fn class_counts(ds: &Dataset, rows: &[usize]) -> ClassDistribution {
    let mut counts = vec![0; ds.n_classes()];
    for &r in rows {
        counts[ds.label(r)] += 1;
    }
    ClassDistribution { counts }
}
