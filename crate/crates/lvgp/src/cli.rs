//! Command-line front end. The binary in `src/main.rs` is a thin shim
//! over [`run`], so every subcommand is also callable from library code
//! and integration tests.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 numerical
//! failure. The `LVGP_THREADS` environment variable caps fit parallelism.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Print to stdout, ignoring a closed pipe so `lvgp ... | head` does not
/// abort mid-command.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Same pipe tolerance for stderr diagnostics.
macro_rules! errln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stderr(), $($arg)*);
    }};
}

use crate::benchmarks::{
    generate_ackley, generate_parabola, AckleyCounts, ParabolaCounts, TrainDesign,
};
use crate::dataset::{load_points_csv, MultiSourceDataset, VariableSchema};
use crate::error::{Error, Result};
use crate::evaluation::{
    fit_model, parity_export, run_cv, surface_export, Model, ModelKind, SurfaceSpec,
};
use crate::gp::FitOptions;
use crate::lvgp::{filter_sources, LatentMap};
use crate::model_file::{load_model, save_model};

#[derive(Parser)]
#[command(
    name = "lvgp",
    about = "Multi-source data fusion with latent-variable Gaussian processes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FitFlags {
    /// Seed for every random draw made by the command.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent optimizer restarts.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Diagonal nugget added to the training correlation matrix.
    #[arg(long, default_value_t = 1e-6)]
    nugget: f64,
}

impl FitFlags {
    fn options(&self) -> FitOptions {
        FitOptions {
            restarts: self.restarts,
            seed: self.seed,
            nugget: self.nugget,
            ..FitOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multi-source benchmark dataset.
    Benchmark {
        /// Benchmark family.
        #[arg(value_parser = ["parabola", "ackley"])]
        family: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving train.csv, test.csv and schema.cfg.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Training rows for the ground source (parabola default 3,
        /// ackley default 20).
        #[arg(long)]
        ground_train: Option<usize>,
        /// Training rows per perturbed source (parabola default 10,
        /// ackley default 50).
        #[arg(long)]
        perturbed_train: Option<usize>,
        /// Testing rows per source (parabola default 30, ackley
        /// default 100).
        #[arg(long)]
        test_per_source: Option<usize>,
        /// Training input design for the parabola family.
        #[arg(long, default_value = "grid", value_parser = ["grid", "uniform"])]
        train_design: String,
    },
    /// Fit a model and persist it as a JSON model file.
    Fit {
        /// Model kind.
        #[arg(value_parser = ["gp", "lvgp"])]
        kind: String,
        /// Training data CSV.
        #[arg(long)]
        data: PathBuf,
        /// Schema config file.
        #[arg(long)]
        schema: PathBuf,
        #[command(flatten)]
        fit: FitFlags,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict mean and std at the rows of a points CSV.
    Predict {
        /// Model file produced by `fit`.
        #[arg(long)]
        model: PathBuf,
        /// Points CSV; needs the model's input columns (and its source
        /// column for lvgp models). A response column is ignored.
        #[arg(long)]
        data: PathBuf,
        /// Output CSV with columns mean,std (original units).
        #[arg(long)]
        out: PathBuf,
    },
    /// Stratified k-fold cross-validation.
    Cv {
        #[arg(value_parser = ["gp", "lvgp"])]
        kind: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Number of folds.
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        fit: FitFlags,
        /// Directory receiving report.csv and parity.csv.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Export the latent coordinates of one categorical variable.
    Latent {
        #[arg(long)]
        model: PathBuf,
        /// Categorical variable to export (e.g. the source column).
        #[arg(long)]
        variable: String,
        /// Level to recenter on; D values are computed relative to it.
        #[arg(long)]
        reference: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep only rows whose source is within a dissimilarity threshold.
    Filter {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Latent map CSV produced by `latent`.
        #[arg(long)]
        latent: PathBuf,
        /// Reference source level.
        #[arg(long)]
        reference: String,
        /// Keep sources with D <= threshold.
        #[arg(long)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a response-surface grid for fixed categorical levels.
    Surface {
        #[arg(long)]
        model: PathBuf,
        /// Surface spec config file (sweep/fix/level lines).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse `std::env::args`, dispatch, and map errors to exit codes.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful exits.
            use std::io::Write;
            if e.use_stderr() {
                let _ = write!(std::io::stderr(), "{e}");
                return ExitCode::from(1);
            }
            let _ = write!(std::io::stdout(), "{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            errln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Benchmark {
            family,
            seed,
            out_dir,
            ground_train,
            perturbed_train,
            test_per_source,
            train_design,
        } => cmd_benchmark(
            &family,
            seed,
            &out_dir,
            ground_train,
            perturbed_train,
            test_per_source,
            &train_design,
        ),
        Command::Fit {
            kind,
            data,
            schema,
            fit,
            out,
        } => cmd_fit(kind.parse()?, &data, &schema, &fit.options(), &out),
        Command::Predict { model, data, out } => cmd_predict(&model, &data, &out),
        Command::Cv {
            kind,
            data,
            schema,
            k,
            fit,
            out_dir,
        } => cmd_cv(kind.parse()?, &data, &schema, k, &fit.options(), &out_dir),
        Command::Latent {
            model,
            variable,
            reference,
            out,
        } => cmd_latent(&model, &variable, reference.as_deref(), &out),
        Command::Filter {
            data,
            schema,
            latent,
            reference,
            threshold,
            out,
        } => cmd_filter(&data, &schema, &latent, &reference, threshold, &out),
        Command::Surface { model, spec, out } => cmd_surface(&model, &spec, &out),
    }
}

fn cmd_benchmark(
    family: &str,
    seed: u64,
    out_dir: &Path,
    ground_train: Option<usize>,
    perturbed_train: Option<usize>,
    test_per_source: Option<usize>,
    train_design: &str,
) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let design = match train_design {
        "uniform" => TrainDesign::Uniform,
        _ => TrainDesign::Grid,
    };
    let (train, test) = match family {
        "parabola" => {
            let defaults = ParabolaCounts::default();
            generate_parabola(
                seed,
                &ParabolaCounts {
                    ground_train: ground_train.unwrap_or(defaults.ground_train),
                    perturbed_train: perturbed_train.unwrap_or(defaults.perturbed_train),
                    test_per_source: test_per_source.unwrap_or(defaults.test_per_source),
                    design,
                },
            )
        }
        "ackley" => {
            let defaults = AckleyCounts::default();
            generate_ackley(
                seed,
                &AckleyCounts {
                    ground_train: ground_train.unwrap_or(defaults.ground_train),
                    perturbed_train: perturbed_train.unwrap_or(defaults.perturbed_train),
                    test_per_source: test_per_source.unwrap_or(defaults.test_per_source),
                },
            )
        }
        other => return Err(Error::InvalidArgument(format!("unknown family '{other}'"))),
    };
    train.write_csv(&out_dir.join("train.csv"))?;
    test.write_csv(&out_dir.join("test.csv"))?;
    train.schema().save_config(&out_dir.join("schema.cfg"))?;
    outln!("train.csv: {} rows", train.n());
    for (label, count) in train.per_source_counts() {
        outln!("  {label}: {count}");
    }
    outln!("test.csv: {} rows", test.n());
    outln!("schema.cfg written to {}", out_dir.display());
    Ok(())
}

fn cmd_fit(
    kind: ModelKind,
    data_path: &Path,
    schema_path: &Path,
    opts: &FitOptions,
    out: &Path,
) -> Result<()> {
    let schema = VariableSchema::load_config(schema_path)?;
    let data = MultiSourceDataset::load_csv(data_path, &schema)?;
    let data = match kind {
        ModelKind::Gp if data.schema().source_column().is_some() => {
            errln!(
                "warning: source column '{}' is ignored by the gp fit",
                data.schema().source_column().unwrap()
            );
            strip_source(&data)?
        }
        _ => data,
    };
    let model = fit_model(kind, &data, opts)?;
    let summary = match &model {
        Model::Gp(m) => m.fit_summary(),
        Model::Lvgp(m) => m.fit_summary(),
    };
    outln!(
        "fitted {kind} on {} rows; best objective {:.6} (restart {})",
        data.n(),
        summary.best_objective,
        summary.best_restart
    );
    for record in &summary.records {
        outln!(
            "  restart {}: {:.6} -> {:.6} in {} iterations{}",
            record.restart,
            record.initial_objective,
            record.objective,
            record.iterations,
            if record.converged { "" } else { " (iteration cap)" }
        );
    }
    save_model(&model, out)?;
    outln!("model written to {}", out.display());
    Ok(())
}

/// Drop the source column so a plain GP can consume source-tagged data.
fn strip_source(data: &MultiSourceDataset) -> Result<MultiSourceDataset> {
    let schema = data.schema();
    let stripped = VariableSchema::new(
        schema.numeric_inputs.clone(),
        schema.categorical_inputs.clone(),
        None,
        &schema.response_column,
    )?;
    let numeric = (0..schema.n_numeric())
        .map(|c| data.numeric_column(c).to_vec())
        .collect();
    let categorical = (0..schema.n_categorical())
        .map(|v| {
            (0..data.n())
                .map(|r| {
                    let idx = data.categorical_row(r)[v];
                    schema.categorical_inputs[v].levels[idx].clone()
                })
                .collect()
        })
        .collect();
    MultiSourceDataset::from_columns(
        stripped,
        numeric,
        categorical,
        None,
        data.response().to_vec(),
    )
}

fn cmd_predict(model_path: &Path, data_path: &Path, out: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let points = load_points_csv(data_path, model.schema())?;
    let mut writer = csv::Writer::from_path(out)
        .map_err(|e| Error::io(out, std::io::Error::other(e.to_string())))?;
    writer
        .write_record(["mean", "std"])
        .map_err(|e| Error::io(out, std::io::Error::other(e.to_string())))?;
    for (numeric, levels) in &points {
        let pred = model.predict_point(numeric, levels)?;
        writer
            .write_record([format!("{}", pred.mean), format!("{}", pred.std())])
            .map_err(|e| Error::io(out, std::io::Error::other(e.to_string())))?;
    }
    writer.flush().map_err(|e| Error::io(out, e))?;
    outln!("wrote {} predictions to {}", points.len(), out.display());
    Ok(())
}

fn cmd_cv(
    kind: ModelKind,
    data_path: &Path,
    schema_path: &Path,
    k: usize,
    opts: &FitOptions,
    out_dir: &Path,
) -> Result<()> {
    let schema = VariableSchema::load_config(schema_path)?;
    let data = MultiSourceDataset::load_csv(data_path, &schema)?;
    if kind == ModelKind::Gp && data.schema().source_column().is_some() {
        // Folds are still stratified by source; only the model ignores it.
        errln!(
            "warning: gp folds are stratified by '{}' but the model ignores it",
            data.schema().source_column().unwrap()
        );
    }
    let report = run_cv(&data, kind, k, opts.seed, opts)?;

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let report_path = out_dir.join("report.csv");
    let detail = report.cv.as_ref().expect("cv report has fold detail");
    let mut writer = csv::Writer::from_path(&report_path)
        .map_err(|e| Error::io(&report_path, std::io::Error::other(e.to_string())))?;
    writer
        .write_record(["fold", "train_nrmse", "val_nrmse"])
        .map_err(|e| Error::io(&report_path, std::io::Error::other(e.to_string())))?;
    for (idx, (t, v)) in detail
        .fold_train_nrmse
        .iter()
        .zip(&detail.fold_val_nrmse)
        .enumerate()
    {
        writer
            .write_record([format!("{}", idx + 1), format!("{t}"), format!("{v}")])
            .map_err(|e| Error::io(&report_path, std::io::Error::other(e.to_string())))?;
    }
    writer
        .write_record([
            "mean".to_string(),
            format!("{}", detail.mean_train_nrmse),
            format!("{}", report.nrmse),
        ])
        .map_err(|e| Error::io(&report_path, std::io::Error::other(e.to_string())))?;
    writer.flush().map_err(|e| Error::io(&report_path, e))?;

    parity_export(&report, &out_dir.join("parity.csv"))?;
    outln!(
        "{k}-fold cv ({kind}): mean training nrmse {:.6}, mean cv nrmse {:.6}",
        detail.mean_train_nrmse, report.nrmse
    );
    outln!("report.csv and parity.csv written to {}", out_dir.display());
    Ok(())
}

fn cmd_latent(model_path: &Path, variable: &str, reference: Option<&str>, out: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let lvgp = model.as_lvgp().ok_or_else(|| {
        Error::InvalidArgument("gp models have no latent coordinates; fit an lvgp model".into())
    })?;
    let map = lvgp.latent_map(variable, reference)?;
    map.write_csv(out)?;
    outln!(
        "latent map for '{variable}' ({} levels) written to {}",
        map.levels.len(),
        out.display()
    );
    if reference.is_some() {
        for (level, d) in map.dissimilarity()? {
            outln!("  D({level}) = {d:.6}");
        }
    }
    Ok(())
}

fn cmd_filter(
    data_path: &Path,
    schema_path: &Path,
    latent_path: &Path,
    reference: &str,
    threshold: f64,
    out: &Path,
) -> Result<()> {
    let schema = VariableSchema::load_config(schema_path)?;
    let data = MultiSourceDataset::load_csv(data_path, &schema)?;
    let map = LatentMap::read_csv(latent_path)?.with_reference(reference)?;
    let filtered = filter_sources(&data, &map, threshold)?;
    filtered.write_csv(out)?;
    outln!(
        "kept {} of {} rows (D <= {threshold} from '{reference}')",
        filtered.n(),
        data.n()
    );
    for (label, count) in filtered.per_source_counts() {
        outln!("  {label}: {count}");
    }
    Ok(())
}

fn cmd_surface(model_path: &Path, spec_path: &Path, out: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let spec = SurfaceSpec::from_config_str(&text)?;
    surface_export(&model, &spec, out)?;
    let rows: usize = spec.sweeps.iter().map(|s| s.steps).product();
    outln!("surface grid ({rows} rows) written to {}", out.display());
    Ok(())
}
