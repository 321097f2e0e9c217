//! Scoring and study orchestration: NRMSE, k-fold cross-validation,
//! parity exports and response-surface grids.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{MultiSourceDataset, VariableSchema};
use crate::error::{Error, Result};
use crate::gp::{fit_gp, FitOptions, GpModel, Prediction};
use crate::lvgp::{fit_lvgp, LvgpModel, QueryPoint};

/// Root-mean-square error divided by the range of the true values.
pub fn nrmse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    if truth.is_empty() || truth.len() != pred.len() {
        return Err(Error::InvalidArgument(format!(
            "nrmse needs equal nonzero lengths, got {} and {}",
            truth.len(),
            pred.len()
        )));
    }
    let min = truth.iter().copied().fold(f64::INFINITY, f64::min);
    let max = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Err(Error::InvalidArgument(
            "nrmse is undefined when the true values have zero range".into(),
        ));
    }
    let mse = truth
        .iter()
        .zip(pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum::<f64>()
        / truth.len() as f64;
    Ok(mse.sqrt() / (max - min))
}

/// Which model family to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Gp,
    Lvgp,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gp" => Ok(ModelKind::Gp),
            "lvgp" => Ok(ModelKind::Lvgp),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind '{other}', expected 'gp' or 'lvgp'"
            ))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Gp => write!(f, "gp"),
            ModelKind::Lvgp => write!(f, "lvgp"),
        }
    }
}

/// A fitted model of either kind, predictable over datasets row by row.
#[derive(Debug, Clone)]
pub enum Model {
    Gp(GpModel),
    Lvgp(LvgpModel),
}

/// Fit the requested model kind to `data`.
pub fn fit_model(kind: ModelKind, data: &MultiSourceDataset, opts: &FitOptions) -> Result<Model> {
    match kind {
        ModelKind::Gp => fit_gp(data, opts).map(Model::Gp),
        ModelKind::Lvgp => fit_lvgp(data, opts).map(Model::Lvgp),
    }
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Gp(_) => ModelKind::Gp,
            Model::Lvgp(_) => ModelKind::Lvgp,
        }
    }

    pub fn schema(&self) -> &VariableSchema {
        match self {
            Model::Gp(m) => m.schema(),
            Model::Lvgp(m) => m.schema(),
        }
    }

    pub fn as_lvgp(&self) -> Option<&LvgpModel> {
        match self {
            Model::Lvgp(m) => Some(m),
            Model::Gp(_) => None,
        }
    }

    /// Predict every row of a dataset whose columns match the model's
    /// schema by name. A GP model reads numeric inputs only; the
    /// latent-variable model also needs the categorical and source labels.
    pub fn predict_dataset(&self, data: &MultiSourceDataset) -> Result<Vec<Prediction>> {
        let expected = &self.schema().numeric_inputs;
        let got = &data.schema().numeric_inputs;
        if expected != got {
            return Err(Error::Schema(format!(
                "numeric columns {got:?} do not match the model's {expected:?}"
            )));
        }
        match self {
            Model::Gp(m) => {
                let rows: Vec<Vec<f64>> = (0..data.n()).map(|r| data.numeric_row(r)).collect();
                m.predict(&rows)
            }
            Model::Lvgp(m) => {
                let model_vars: Vec<&str> = m
                    .schema()
                    .categorical_with_source()
                    .iter()
                    .map(|v| v.name.as_str())
                    .collect();
                let data_vars: Vec<&str> = data
                    .schema()
                    .categorical_with_source()
                    .iter()
                    .map(|v| v.name.as_str())
                    .collect();
                if model_vars != data_vars {
                    return Err(Error::Schema(format!(
                        "categorical columns {data_vars:?} do not match the model's {model_vars:?}"
                    )));
                }
                let queries: Vec<QueryPoint> = (0..data.n())
                    .map(|r| QueryPoint {
                        numeric: data.numeric_row(r),
                        levels: data.level_row(r),
                    })
                    .collect();
                m.predict(&queries)
            }
        }
    }

    /// Predict one point given raw numeric values and level labels
    /// (ignored by GP models).
    pub fn predict_point(&self, numeric: &[f64], levels: &[String]) -> Result<Prediction> {
        match self {
            Model::Gp(m) => Ok(m.predict(&[numeric.to_vec()])?[0]),
            Model::Lvgp(m) => Ok(m.predict(&[QueryPoint {
                numeric: numeric.to_vec(),
                levels: levels.to_vec(),
            }])?[0]),
        }
    }
}

/// One scored point: the true response and the model's mean and standard
/// deviation, all in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityRecord {
    pub split: String,
    pub truth: f64,
    pub mean: f64,
    pub std: f64,
}

/// Per-fold detail of a cross-validation run.
#[derive(Debug, Clone, PartialEq)]
pub struct CvDetail {
    pub fold_train_nrmse: Vec<f64>,
    pub fold_val_nrmse: Vec<f64>,
    /// Average of the per-fold training scores.
    pub mean_train_nrmse: f64,
}

/// Scores of one evaluation split; for cross-validation runs `nrmse` is
/// the mean validation score and `cv` carries the fold detail.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub split: String,
    pub nrmse: f64,
    pub parity: Vec<ParityRecord>,
    pub cv: Option<CvDetail>,
}

/// Score a fitted model on a labeled dataset.
pub fn evaluate(model: &Model, data: &MultiSourceDataset, split: &str) -> Result<EvalReport> {
    evaluate_with_fallback_range(model, data, split, None)
}

/// As [`evaluate`], but when the split's own true values have zero range
/// (single-row folds in leave-one-out-style CV) the given range
/// normalizes the RMSE instead of failing.
fn evaluate_with_fallback_range(
    model: &Model,
    data: &MultiSourceDataset,
    split: &str,
    fallback_range: Option<f64>,
) -> Result<EvalReport> {
    let preds = model.predict_dataset(data)?;
    let means: Vec<f64> = preds.iter().map(|p| p.mean).collect();
    let score = match nrmse(data.response(), &means) {
        Ok(score) => score,
        Err(e) => {
            let Some(range) = fallback_range.filter(|r| *r > 0.0) else {
                return Err(e);
            };
            let mse = data
                .response()
                .iter()
                .zip(&means)
                .map(|(t, p)| (t - p) * (t - p))
                .sum::<f64>()
                / data.n() as f64;
            mse.sqrt() / range
        }
    };
    let parity = preds
        .iter()
        .zip(data.response())
        .map(|(p, t)| ParityRecord {
            split: split.to_string(),
            truth: *t,
            mean: p.mean,
            std: p.std(),
        })
        .collect();
    Ok(EvalReport {
        split: split.to_string(),
        nrmse: score,
        parity,
        cv: None,
    })
}

fn annotate_fold(e: Error, fold: usize) -> Error {
    let msg = format!("fold {fold}: {e}");
    match e {
        Error::Schema(_) => Error::Schema(msg),
        Error::InvalidArgument(_) => Error::InvalidArgument(msg),
        Error::SingularMatrix(_) => Error::SingularMatrix(msg),
        Error::NumericalDegeneracy(_) => Error::NumericalDegeneracy(msg),
        Error::Unfittable(_) => Error::Unfittable(msg),
        other => other,
    }
}

/// Stratified k-fold cross-validation: fit on each fold's training rows,
/// score NRMSE on both halves, and collect validation parity records.
/// Deterministic in `(data, kind, k, seed, opts)`.
///
/// Folds small enough that their true values have zero range (the k = n
/// edge) are scored against the full dataset's response range instead.
pub fn run_cv(
    data: &MultiSourceDataset,
    kind: ModelKind,
    k: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<EvalReport> {
    let folds = data.stratified_kfold(k, seed)?;
    let mut fold_train_nrmse = Vec::with_capacity(k);
    let mut fold_val_nrmse = Vec::with_capacity(k);
    let mut parity = Vec::new();
    let full_range = {
        let y = data.response();
        let min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        max - min
    };

    for (idx, (train, val)) in folds.iter().enumerate() {
        let fold = idx + 1;
        let model = fit_model(kind, train, opts).map_err(|e| annotate_fold(e, fold))?;
        let train_report = evaluate_with_fallback_range(
            &model,
            train,
            &format!("fold{fold}-train"),
            Some(full_range),
        )
        .map_err(|e| annotate_fold(e, fold))?;
        let val_report =
            evaluate_with_fallback_range(&model, val, &format!("fold{fold}"), Some(full_range))
                .map_err(|e| annotate_fold(e, fold))?;
        fold_train_nrmse.push(train_report.nrmse);
        fold_val_nrmse.push(val_report.nrmse);
        parity.extend(val_report.parity);
    }

    let mean_train = fold_train_nrmse.iter().sum::<f64>() / k as f64;
    let mean_cv = fold_val_nrmse.iter().sum::<f64>() / k as f64;
    Ok(EvalReport {
        split: "cv".into(),
        nrmse: mean_cv,
        parity,
        cv: Some(CvDetail {
            fold_train_nrmse,
            fold_val_nrmse,
            mean_train_nrmse: mean_train,
        }),
    })
}

/// Write parity records as `split,truth,mean,std` CSV rows.
pub fn parity_export(report: &EvalReport, path: &Path) -> Result<()> {
    if report.parity.is_empty() {
        return Err(Error::InvalidArgument("report has no parity records".into()));
    }
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    writer
        .write_record(["split", "truth", "mean", "std"])
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    for record in &report.parity {
        writer
            .write_record([
                record.split.as_str(),
                &format!("{}", record.truth),
                &format!("{}", record.mean),
                &format!("{}", record.std),
            ])
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// One numeric variable swept over an inclusive range.
#[derive(Debug, Clone, PartialEq)]
pub struct SweptVar {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

/// A response-surface request: one or two swept numeric variables, fixed
/// values for every other numeric input, and a fixed level per
/// categorical variable (the source included), which is what makes the
/// exported surface source-specific.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurfaceSpec {
    pub sweeps: Vec<SweptVar>,
    pub fixed_numeric: Vec<(String, f64)>,
    pub fixed_levels: Vec<(String, String)>,
}

impl SurfaceSpec {
    /// Parse from key-value config text with repeatable keys:
    ///
    /// ```text
    /// sweep = x, -10, 10, 41
    /// sweep = y, -5, 5, 21
    /// fix = temperature, 475
    /// level = source, Ground Source
    /// ```
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut spec = SurfaceSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Schema(format!(
                    "surface spec line {} is not 'key = value': '{line}'",
                    lineno + 1
                )));
            };
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            match key.trim() {
                "sweep" => {
                    if parts.len() != 4 {
                        return Err(Error::Schema(format!(
                            "sweep needs 'name, min, max, steps' on line {}",
                            lineno + 1
                        )));
                    }
                    let parse = |s: &str| -> Result<f64> {
                        s.parse().map_err(|_| {
                            Error::Schema(format!("cannot parse '{s}' on line {}", lineno + 1))
                        })
                    };
                    spec.sweeps.push(SweptVar {
                        name: parts[0].to_string(),
                        min: parse(parts[1])?,
                        max: parse(parts[2])?,
                        steps: parts[3].parse().map_err(|_| {
                            Error::Schema(format!(
                                "cannot parse steps '{}' on line {}",
                                parts[3],
                                lineno + 1
                            ))
                        })?,
                    });
                }
                "fix" => {
                    if parts.len() != 2 {
                        return Err(Error::Schema(format!(
                            "fix needs 'name, value' on line {}",
                            lineno + 1
                        )));
                    }
                    let value = parts[1].parse().map_err(|_| {
                        Error::Schema(format!("cannot parse '{}' on line {}", parts[1], lineno + 1))
                    })?;
                    spec.fixed_numeric.push((parts[0].to_string(), value));
                }
                "level" => {
                    let Some((var, level)) = value.split_once(',') else {
                        return Err(Error::Schema(format!(
                            "level needs 'variable, level' on line {}",
                            lineno + 1
                        )));
                    };
                    spec.fixed_levels
                        .push((var.trim().to_string(), level.trim().to_string()));
                }
                other => {
                    return Err(Error::Schema(format!("unknown surface spec key '{other}'")));
                }
            }
        }
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps.is_empty() || self.sweeps.len() > 2 {
            return Err(Error::InvalidArgument(format!(
                "surface spec needs 1 or 2 swept variables, got {}",
                self.sweeps.len()
            )));
        }
        if self.sweeps.len() == 2 && self.sweeps[0].name == self.sweeps[1].name {
            return Err(Error::InvalidArgument("swept variables must be distinct".into()));
        }
        for sweep in &self.sweeps {
            if sweep.steps < 2 {
                return Err(Error::InvalidArgument(format!(
                    "sweep over '{}' needs at least 2 steps",
                    sweep.name
                )));
            }
        }
        Ok(())
    }
}

/// One evaluated surface grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceRow {
    pub v1: f64,
    pub v2: Option<f64>,
    pub mean: f64,
    pub std: f64,
}

fn level_labels_for(model: &Model, spec: &SurfaceSpec) -> Result<Vec<String>> {
    match model {
        Model::Gp(_) => Ok(Vec::new()),
        Model::Lvgp(m) => m
            .schema()
            .categorical_with_source()
            .iter()
            .map(|var| {
                spec.fixed_levels
                    .iter()
                    .find(|(name, _)| *name == var.name)
                    .map(|(_, level)| level.clone())
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "surface spec fixes no level for categorical variable '{}'",
                            var.name
                        ))
                    })
            })
            .collect(),
    }
}

/// Evaluate the surface grid: a pure function of the model and the
/// surface request.
pub fn surface_grid(model: &Model, spec: &SurfaceSpec) -> Result<Vec<SurfaceRow>> {
    spec.validate()?;
    let numeric_names = &model.schema().numeric_inputs;
    let mut sweep_cols = Vec::with_capacity(spec.sweeps.len());
    for sweep in &spec.sweeps {
        let col = numeric_names
            .iter()
            .position(|n| *n == sweep.name)
            .ok_or_else(|| {
                Error::Schema(format!("swept variable '{}' is not a numeric input", sweep.name))
            })?;
        sweep_cols.push(col);
    }

    // All remaining numeric inputs must be pinned.
    let mut base = vec![0.0; numeric_names.len()];
    for (col, name) in numeric_names.iter().enumerate() {
        if sweep_cols.contains(&col) {
            continue;
        }
        let value = spec
            .fixed_numeric
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("surface spec fixes no value for numeric input '{name}'"))
            })?;
        base[col] = value;
    }
    let levels = level_labels_for(model, spec)?;

    let grid_of = |sweep: &SweptVar| -> Vec<f64> {
        (0..sweep.steps)
            .map(|i| sweep.min + (sweep.max - sweep.min) * i as f64 / (sweep.steps - 1) as f64)
            .collect()
    };
    let grid1 = grid_of(&spec.sweeps[0]);
    let grid2: Vec<Option<f64>> = match spec.sweeps.get(1) {
        Some(sweep) => grid_of(sweep).into_iter().map(Some).collect(),
        None => vec![None],
    };

    let mut rows = Vec::with_capacity(grid1.len() * grid2.len());
    for &v1 in &grid1 {
        for &v2 in &grid2 {
            let mut numeric = base.clone();
            numeric[sweep_cols[0]] = v1;
            if let (Some(v), Some(&col)) = (v2, sweep_cols.get(1)) {
                numeric[col] = v;
            }
            let pred = model.predict_point(&numeric, &levels)?;
            rows.push(SurfaceRow {
                v1,
                v2,
                mean: pred.mean,
                std: pred.std(),
            });
        }
    }
    Ok(rows)
}

/// Evaluate and write a surface grid as CSV. Columns are the swept
/// variable names followed by `mean,std`.
pub fn surface_export(model: &Model, spec: &SurfaceSpec, path: &Path) -> Result<()> {
    let rows = surface_grid(model, spec)?;
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    let mut header: Vec<String> = spec.sweeps.iter().map(|s| s.name.clone()).collect();
    header.push("mean".into());
    header.push("std".into());
    writer
        .write_record(&header)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    for row in &rows {
        let mut record = vec![format!("{}", row.v1)];
        if let Some(v2) = row.v2 {
            record.push(format!("{v2}"));
        }
        record.push(format!("{}", row.mean));
        record.push(format!("{}", row.std));
        writer
            .write_record(&record)
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
