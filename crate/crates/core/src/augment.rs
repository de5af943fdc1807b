//! Composition of dataset variants: original attributes, discretized columns and
//! cut-feature indicators, fitted on a training fold and applied to both sides.

use crate::data::{Column, Dataset, FoldPair};
use crate::discretize::{apply_scheme, DiscretizationScheme, Discretizer};
use crate::dmiat::{apply_cuts, generate_cuts, CutFeature, DmiatConfig};
use crate::error::{Error, Result};

/// A source of discretized columns.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Fit(Discretizer),
    /// Schemes computed elsewhere for this fold. Continuous attributes without a
    /// scheme collapse to a single interval.
    Imported {
        name: String,
        schemes: Vec<DiscretizationScheme>,
    },
}

impl Block {
    pub fn tag(&self) -> String {
        match self {
            Block::Fit(d) => d.tag(),
            Block::Imported { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSpec {
    pub include_original: bool,
    pub discretizers: Vec<Block>,
    pub dmiat: Option<DmiatConfig>,
}

impl VariantSpec {
    pub fn original() -> Self {
        VariantSpec {
            include_original: true,
            discretizers: Vec::new(),
            dmiat: None,
        }
    }
}

/// Everything a variant learns from the training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedBlocks {
    /// One entry per block: its tag and one scheme per continuous attribute.
    pub schemes: Vec<(String, Vec<DiscretizationScheme>)>,
    pub cuts: Vec<CutFeature>,
}

pub fn fit_blocks(ds: &Dataset, train_rows: &[usize], spec: &VariantSpec) -> Result<FittedBlocks> {
    let continuous: Vec<usize> = ds.continuous_attributes().collect();
    let schemes = spec
        .discretizers
        .iter()
        .map(|block| {
            let fitted = match block {
                Block::Fit(d) => continuous
                    .iter()
                    .map(|&a| d.fit(ds, a, train_rows))
                    .collect::<Result<Vec<_>>>()?,
                Block::Imported { name, schemes } => {
                    if let Some(bad) = schemes.iter().find(|s| ds.continuous(s.attr).is_err()) {
                        return Err(Error::Schema(format!(
                            "imported `{name}` scheme targets attribute {} which is not continuous",
                            bad.attr
                        )));
                    }
                    continuous
                        .iter()
                        .map(|&a| {
                            schemes.iter().find(|s| s.attr == a).cloned().unwrap_or(
                                DiscretizationScheme {
                                    attr: a,
                                    cut_points: Vec::new(),
                                    method: name.as_str().into(),
                                },
                            )
                        })
                        .collect()
                }
            };
            Ok((block.tag(), fitted))
        })
        .collect::<Result<Vec<_>>>()?;
    let cuts = match &spec.dmiat {
        Some(config) => generate_cuts(ds, train_rows, config),
        None => Vec::new(),
    };
    Ok(FittedBlocks { schemes, cuts })
}

/// Builds the variant table for `rows` from already fitted blocks.
///
/// Column order: original attributes (all of them when `include_original`, else
/// only nominal ones), then discretized columns in block then attribute order, then
/// one indicator column per cut.
pub fn assemble(
    ds: &Dataset,
    rows: &[usize],
    include_original: bool,
    fitted: &FittedBlocks,
) -> Result<Dataset> {
    let picked = ds.select(rows)?;
    let mut columns: Vec<(String, Column)> = picked
        .attributes()
        .iter()
        .zip(picked.columns())
        .filter(|(_, col)| include_original || matches!(col, Column::Nominal { .. }))
        .map(|(attr, col)| (attr.name.clone(), col.clone()))
        .collect();
    for (tag, schemes) in &fitted.schemes {
        for scheme in schemes {
            let ids = apply_scheme(scheme, ds, rows)?;
            let symbols = (0..scheme.n_intervals()).map(|i| i.to_string()).collect();
            columns.push((
                format!("{}__{tag}", ds.attributes()[scheme.attr].name),
                Column::Nominal {
                    symbols,
                    codes: ids,
                },
            ));
        }
    }
    let indicators = apply_cuts(&fitted.cuts, ds, rows)?;
    for (cut, values) in fitted.cuts.iter().zip(indicators) {
        columns.push((
            format!(
                "{}__dmiat_{}_{}_{}",
                ds.attributes()[cut.attr].name,
                cut.direction,
                cut.criterion,
                ds.class_symbol(cut.target_class)
            ),
            Column::Nominal {
                symbols: vec!["0".into(), "1".into()],
                codes: values.into_iter().map(|v| Some(usize::from(v))).collect(),
            },
        ));
    }
    if columns.is_empty() {
        return Err(Error::EmptyVariant);
    }
    let labels = rows.iter().map(|&r| ds.label(r)).collect();
    Dataset::new(
        ds.name(),
        ds.class_name(),
        columns,
        labels,
        ds.class_domain().to_vec(),
    )
}

/// Fits every block on `fold.train` and returns the (train, test) variant tables.
pub fn compose(ds: &Dataset, fold: &FoldPair, spec: &VariantSpec) -> Result<(Dataset, Dataset)> {
    let fitted = fit_blocks(ds, &fold.train, spec)?;
    let train = assemble(ds, &fold.train, spec.include_original, &fitted)?;
    let test = assemble(ds, &fold.test, spec.include_original, &fitted)?;
    Ok((train, test))
}
