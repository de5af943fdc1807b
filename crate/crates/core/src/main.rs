use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use dmiat::classify::ClassifierKind;
use dmiat::discretize::Discretizer;
use dmiat::dmiat::{Criterion, DmiatConfig};
use dmiat::experiment::{
    emit_results, resolve_data, run_experiment, ExperimentConfig, VariantKind,
};

/// Run the k-fold feature-augmentation experiment over one or more datasets.
#[derive(Debug, Parser)]
#[command(name = "dmiat", version)]
struct Args {
    /// Dataset file, directory or glob (CSV or KEEL); repeatable.
    #[arg(long, required = true)]
    data: Vec<String>,

    #[arg(long, default_value_t = 10)]
    folds: usize,

    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Minimum support as a fraction of the training fold.
    #[arg(long, default_value_t = 0.1)]
    supp: f64,

    #[arg(
        long,
        value_delimiter = ',',
        default_value = "entropy0,lift1.5,lift2.0"
    )]
    conf: Vec<Criterion>,

    #[arg(long, value_delimiter = ',', default_value = "ew:10,ef:10,iem")]
    disc: Vec<Discretizer>,

    #[arg(
        long,
        value_delimiter = ',',
        default_value = "A,A+DMIAT,D,A+D,A+D+DMIAT"
    )]
    variants: Vec<VariantKind>,

    #[arg(long, value_delimiter = ',', default_value = "nb,knn3,logistic")]
    classifiers: Vec<ClassifierKind>,

    #[arg(long, default_value = "results")]
    out: PathBuf,

    /// Write the cuts of every fold to `<out>/cuts/`.
    #[arg(long)]
    export_cuts: bool,

    /// Directory with `<dataset>.<method>.fold<i>.txt` scheme files.
    #[arg(long)]
    import_schemes: Option<PathBuf>,
}

fn run(args: Args) -> dmiat::Result<bool> {
    let config = ExperimentConfig {
        data: resolve_data(&args.data)?,
        folds: args.folds,
        seed: args.seed,
        dmiat: DmiatConfig::new(args.supp, args.conf)?,
        discretizers: args.disc,
        variants: args.variants,
        classifiers: args.classifiers,
        import_schemes: args.import_schemes,
        export_cuts: args.export_cuts,
    };
    let table = run_experiment(&config)?;
    emit_results(&table, &args.out)?;
    for f in &table.failures {
        eprintln!("dmiat: {}: {}", f.dataset, f.message);
    }
    eprintln!(
        "dmiat: {} records, {} skipped, {} failed datasets -> {}",
        table.records.len(),
        table.skipped.len(),
        table.failures.len(),
        args.out.display()
    );
    Ok(table.failures.is_empty())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dmiat: {e}");
            ExitCode::from(2)
        }
    }
}
