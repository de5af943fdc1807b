//! Extreme-interval cut features (D-MIAT), classic discretizers and a k-fold harness
//! that measures how augmenting a dataset with them changes classifier accuracy.
//!
//! Typical flow: [`data::load`] a table, split it with [`data::stratified_kfold`], fit
//! [`dmiat::generate_cuts`] or a [`discretize::Discretizer`] on the training rows,
//! [`augment::compose`] the variant tables and score them with [`classify::evaluate`].
//! [`experiment::run_experiment`] does all of that in batch.

pub mod augment;
pub mod classify;
pub mod data;
pub mod discretize;
pub mod dmiat;
pub mod error;
pub mod experiment;

pub use error::{Error, Result};
