//! Latent-variable GP over mixed inputs, with source-aware prediction,
//! latent-space inspection and dissimilarity-based source filtering.
//!
//! Each level of every categorical variable (the source column included)
//! is mapped to a learned 2-D coordinate; the kernel then sees only
//! ordinary Euclidean distances. Coordinates are estimated jointly with
//! the lengthscales by maximum likelihood under box bounds [-3, 3].
//!
//! The gauge freedom of the likelihood (any rigid motion of a variable's
//! latent points leaves it unchanged) is removed during fitting by
//! anchoring: the first level of each variable is pinned at the origin
//! and the second to the nonnegative half of the z1 axis. Reporting
//! relative to a chosen reference level is done afterwards by rigid
//! translation, which preserves all distances.

use std::path::Path;

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::dataset::{MultiSourceDataset, Standardizer, VariableSchema};
use crate::error::{Error, Result};
use crate::gp::{
    draw_theta, neg_log_likelihood, summarize_restarts, FitOptions, FitSummary, FittedCore,
    Prediction,
};
use crate::kernel::{LatentConfig, LatentVar, Lengthscales, MixedPoint};
use crate::optimize::{best_restart, multi_start, Bounds, OptimOptions, PENALTY};

/// Latent coordinates live in this box, per axis.
pub const LATENT_BOUND: f64 = 3.0;

/// Normalizer of the dissimilarity metric: the distance from the box
/// center to a corner, `3 * sqrt(2)`.
pub const D_NORMALIZER: f64 = 4.242640687119285;

/// One prediction input: raw numeric values plus a level label per
/// categorical variable, declared inputs first and the source label last.
#[derive(Debug, Clone)]
pub struct QueryPoint {
    pub numeric: Vec<f64>,
    pub levels: Vec<String>,
}

/// A latent-variable GP fitted to mixed inputs.
#[derive(Debug, Clone)]
pub struct LvgpModel {
    pub(crate) core: FittedCore,
    pub(crate) latents: LatentConfig,
}

/// Number of free coordinates for a variable with `levels` levels under
/// origin/half-axis anchoring.
fn free_coord_count(levels: usize) -> usize {
    match levels {
        0 | 1 => 0,
        l => 2 * l - 3,
    }
}

/// Decode one variable's anchored coordinates from its free values.
fn decode_var(levels: usize, values: &[f64]) -> Vec<[f64; 2]> {
    debug_assert_eq!(values.len(), free_coord_count(levels));
    let mut coords = Vec::with_capacity(levels);
    if levels >= 1 {
        coords.push([0.0, 0.0]);
    }
    if levels >= 2 {
        coords.push([values[0], 0.0]);
    }
    for level in 2..levels {
        let base = 1 + 2 * (level - 2);
        coords.push([values[base], values[base + 1]]);
    }
    coords
}

fn decode_latents(level_counts: &[usize], values: &[f64]) -> Vec<Vec<[f64; 2]>> {
    let mut offset = 0;
    level_counts
        .iter()
        .map(|&count| {
            let take = free_coord_count(count);
            let coords = decode_var(count, &values[offset..offset + take]);
            offset += take;
            coords
        })
        .collect()
}

/// Fit a latent-variable GP by joint seeded multi-start maximum
/// likelihood over log10 lengthscales and free latent coordinates.
pub fn fit_lvgp(data: &MultiSourceDataset, opts: &FitOptions) -> Result<LvgpModel> {
    opts.validate()?;
    if data.n() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 training rows, got {}",
            data.n()
        )));
    }
    let cat_vars: Vec<_> = data.schema().categorical_with_source();
    if cat_vars.is_empty() {
        return Err(Error::InvalidArgument(
            "no categorical variables; fit a plain GP instead".into(),
        ));
    }
    let m = data.schema().n_numeric();
    if m == 0 {
        return Err(Error::InvalidArgument("no numeric input columns".into()));
    }

    // Every registered level must be backed by data, or its coordinate
    // would be unidentifiable.
    let level_counts: Vec<usize> = cat_vars.iter().map(|v| v.levels.len()).collect();
    let cat_rows: Vec<Vec<usize>> = (0..data.n()).map(|r| data.categorical_row(r)).collect();
    for (v, var) in cat_vars.iter().enumerate() {
        let mut seen = vec![false; var.levels.len()];
        for row in &cat_rows {
            seen[row[v]] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Schema(format!(
                "level '{}' of variable '{}' has no rows",
                var.levels[missing], var.name
            )));
        }
    }
    let var_names: Vec<String> = cat_vars.iter().map(|v| v.name.clone()).collect();
    let var_levels: Vec<Vec<String>> = cat_vars.iter().map(|v| v.levels.clone()).collect();

    let (scaled, standardizer) = data.standardize()?;
    let numeric_rows: Vec<Vec<f64>> = (0..scaled.n()).map(|r| scaled.numeric_row(r)).collect();
    let y = DVector::from_vec(scaled.response().to_vec());

    let substitute = |coords: &[Vec<[f64; 2]>]| -> Vec<MixedPoint> {
        numeric_rows
            .iter()
            .zip(&cat_rows)
            .map(|(numeric, cats)| {
                let mut latent = Vec::with_capacity(2 * cats.len());
                for (v, &level) in cats.iter().enumerate() {
                    let [z1, z2] = coords[v][level];
                    latent.push(z1);
                    latent.push(z2);
                }
                MixedPoint::new(numeric.clone(), latent)
            })
            .collect()
    };

    if standardizer.constant_response {
        let coords: Vec<Vec<[f64; 2]>> = level_counts.iter().map(|&c| vec![[0.0, 0.0]; c]).collect();
        let points = substitute(&coords);
        let latents = latent_config(&var_names, &var_levels, &coords);
        let core = FittedCore::constant(
            data.schema().clone(),
            standardizer,
            m,
            points,
            cat_rows,
            y,
            opts.seed,
        );
        return Ok(LvgpModel { core, latents });
    }

    // Parameter vector: log10 lengthscales, then each variable's free
    // coordinates. The second level's z1 is bounded to [0, LATENT_BOUND];
    // all other coordinates to [-LATENT_BOUND, LATENT_BOUND].
    let free_total: usize = level_counts.iter().map(|&c| free_coord_count(c)).sum();
    let mut lower = vec![opts.theta_bounds.0; m];
    let mut upper = vec![opts.theta_bounds.1; m];
    for &count in &level_counts {
        for i in 0..free_coord_count(count) {
            lower.push(if i == 0 { 0.0 } else { -LATENT_BOUND });
            upper.push(LATENT_BOUND);
        }
    }
    let bounds = Bounds::new(lower, upper);

    let objective = |params: &[f64]| {
        let coords = decode_latents(&level_counts, &params[m..]);
        let points = substitute(&coords);
        neg_log_likelihood(&points, &y, &params[..m], opts.nugget)
    };

    // Initial latent coordinates stay small so early correlations are
    // informative; the half-axis coordinate draws from its feasible side.
    let draw = |rng: &mut ChaCha12Rng| {
        let mut params = draw_theta(rng, m, opts.theta_bounds);
        for &count in &level_counts {
            for i in 0..free_coord_count(count) {
                let lo = if i == 0 { 0.0 } else { -1.0 };
                params.push(rng.random_range(lo..1.0));
            }
        }
        params
    };

    let records = multi_start(
        &objective,
        &draw,
        opts.restarts,
        opts.seed,
        &bounds,
        &OptimOptions::default(),
    );
    let best = best_restart(&records);
    if best.result.value >= PENALTY {
        return Err(Error::Unfittable(
            "every restart ended on the infeasible penalty plateau".into(),
        ));
    }
    let fit = summarize_restarts(opts.seed, &records);
    debug_assert_eq!(best.result.x.len(), m + free_total);

    let phi = Lengthscales::from_log10(&best.result.x[..m]);
    let coords = decode_latents(&level_counts, &best.result.x[m..]);
    let points = substitute(&coords);
    let latents = latent_config(&var_names, &var_levels, &coords);
    let core = FittedCore::build(
        data.schema().clone(),
        standardizer,
        phi,
        opts.nugget,
        points,
        cat_rows,
        y,
        fit,
    )?;
    Ok(LvgpModel { core, latents })
}

fn latent_config(names: &[String], levels: &[Vec<String>], coords: &[Vec<[f64; 2]>]) -> LatentConfig {
    LatentConfig::new(
        names
            .iter()
            .zip(levels)
            .zip(coords)
            .map(|((name, levels), coords)| LatentVar {
                name: name.clone(),
                levels: levels.clone(),
                coords: coords.clone(),
            })
            .collect(),
    )
}

impl LvgpModel {
    /// Predict mean and variance, in original units, at mixed query points.
    pub fn predict(&self, points: &[QueryPoint]) -> Result<Vec<Prediction>> {
        points
            .iter()
            .map(|q| {
                let numeric = self.core.scale_numeric_row(&q.numeric)?;
                let vars = self.latents.vars();
                if q.levels.len() != vars.len() {
                    return Err(Error::DimensionMismatch {
                        expected: vars.len(),
                        actual: q.levels.len(),
                    });
                }
                let mut indices = Vec::with_capacity(vars.len());
                for (var, label) in vars.iter().zip(&q.levels) {
                    let idx = var
                        .levels
                        .iter()
                        .position(|l| l == label)
                        .ok_or_else(|| Error::UnknownLevel {
                            variable: var.name.clone(),
                            level: label.clone(),
                        })?;
                    indices.push(idx);
                }
                let latent = self.latents.substitute(&indices);
                self.core.predict_point(&MixedPoint::new(numeric, latent))
            })
            .collect()
    }

    /// Fitted latent coordinates of one categorical variable, optionally
    /// recentered so `reference` sits at the origin.
    pub fn latent_map(&self, variable: &str, reference: Option<&str>) -> Result<LatentMap> {
        let var = self.latents.var(variable).ok_or_else(|| {
            Error::Schema(format!("'{variable}' is not a categorical variable of this model"))
        })?;
        let map = LatentMap {
            variable: var.name.clone(),
            levels: var.levels.clone(),
            coords: var.coords.clone(),
            reference: None,
            d: None,
        };
        match reference {
            Some(level) => map.with_reference(level),
            None => Ok(map),
        }
    }

    pub fn latents(&self) -> &LatentConfig {
        &self.latents
    }

    /// Constant prior mean, standardized units.
    pub fn mu(&self) -> f64 {
        self.core.mu
    }

    /// Process variance, standardized units.
    pub fn sigma2(&self) -> f64 {
        self.core.sigma2
    }

    pub fn phi(&self) -> &Lengthscales {
        &self.core.phi
    }

    pub fn nugget(&self) -> f64 {
        self.core.nugget
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.core.standardizer
    }

    pub fn fit_summary(&self) -> &FitSummary {
        &self.core.fit
    }

    pub fn schema(&self) -> &VariableSchema {
        &self.core.schema
    }

    pub fn n_train(&self) -> usize {
        self.core.points.len()
    }
}

/// Latent coordinates of one categorical variable with, optionally, the
/// dissimilarity of each level from a reference level.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentMap {
    pub variable: String,
    pub levels: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    pub reference: Option<String>,
    d: Option<Vec<f64>>,
}

impl LatentMap {
    pub fn level_index(&self, level: &str) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| l == level)
            .ok_or_else(|| Error::UnknownLevel {
                variable: self.variable.clone(),
                level: level.to_string(),
            })
    }

    /// Rigidly translate all coordinates so `level` sits at the origin,
    /// and compute `D = |z| / (3 sqrt 2)` for every level. Distances are
    /// unchanged; D can exceed 1 when the recentered configuration leaves
    /// the original box.
    pub fn with_reference(&self, level: &str) -> Result<LatentMap> {
        let ref_idx = self.level_index(level)?;
        let [rx, ry] = self.coords[ref_idx];
        let coords: Vec<[f64; 2]> = self
            .coords
            .iter()
            .map(|[x, y]| [x - rx, y - ry])
            .collect();
        let d = coords
            .iter()
            .map(|[x, y]| (x * x + y * y).sqrt() / D_NORMALIZER)
            .collect();
        Ok(LatentMap {
            variable: self.variable.clone(),
            levels: self.levels.clone(),
            coords,
            reference: Some(level.to_string()),
            d: Some(d),
        })
    }

    /// Dissimilarity of every level from the reference, in level order.
    pub fn dissimilarity(&self) -> Result<Vec<(String, f64)>> {
        let d = self.d.as_ref().ok_or_else(|| {
            Error::InvalidArgument("latent map has no reference level set".into())
        })?;
        Ok(self.levels.iter().cloned().zip(d.iter().copied()).collect())
    }

    pub fn d_of(&self, level: &str) -> Result<f64> {
        let idx = self.level_index(level)?;
        let d = self.d.as_ref().ok_or_else(|| {
            Error::InvalidArgument("latent map has no reference level set".into())
        })?;
        Ok(d[idx])
    }

    /// All pairwise Euclidean distances between level coordinates.
    pub fn pairwise_distances(&self) -> Vec<Vec<f64>> {
        self.coords
            .iter()
            .map(|[x1, y1]| {
                self.coords
                    .iter()
                    .map(|[x2, y2]| ((x1 - x2) * (x1 - x2) + (y1 - y2) * (y1 - y2)).sqrt())
                    .collect()
            })
            .collect()
    }

    /// Write `variable,level,z1,z2,D` rows; D is blank without a reference.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        writer
            .write_record(["variable", "level", "z1", "z2", "D"])
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        for (i, level) in self.levels.iter().enumerate() {
            let d = match &self.d {
                Some(d) => format!("{}", d[i]),
                None => String::new(),
            };
            writer
                .write_record([
                    self.variable.as_str(),
                    level.as_str(),
                    &format!("{}", self.coords[i][0]),
                    &format!("{}", self.coords[i][1]),
                    &d,
                ])
                .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }

    /// Read a map previously written by [`LatentMap::write_csv`]. The D
    /// column is ignored; recenter with [`LatentMap::with_reference`] to
    /// recompute it.
    pub fn read_csv(path: &Path) -> Result<LatentMap> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        let mut variable: Option<String> = None;
        let mut levels = Vec::new();
        let mut coords = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let row = idx + 1;
            let record = record.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            if record.len() < 4 {
                return Err(Error::Parse {
                    row,
                    message: "expected columns variable,level,z1,z2,D".into(),
                });
            }
            let var = record[0].to_string();
            match &variable {
                None => variable = Some(var),
                Some(existing) if *existing != var => {
                    return Err(Error::Schema(format!(
                        "latent map mixes variables '{existing}' and '{var}'"
                    )));
                }
                _ => {}
            }
            levels.push(record[1].to_string());
            let parse = |i: usize| -> Result<f64> {
                record[i].parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    message: format!("cannot parse '{}' as a number", &record[i]),
                })
            };
            coords.push([parse(2)?, parse(3)?]);
        }
        let variable =
            variable.ok_or_else(|| Error::EmptyDataset("latent map file has no rows".into()))?;
        Ok(LatentMap {
            variable,
            levels,
            coords,
            reference: None,
            d: None,
        })
    }
}

/// Keep only the rows whose source has `D <= threshold` in the recentered
/// map (the reference itself has D = 0 and is always kept). Row order is
/// preserved and the pruned source registry contains only the survivors,
/// so the result can be refitted directly.
pub fn filter_sources(
    data: &MultiSourceDataset,
    map: &LatentMap,
    threshold: f64,
) -> Result<MultiSourceDataset> {
    if threshold < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "threshold must be nonnegative, got {threshold}"
        )));
    }
    let source_column = data
        .schema()
        .source_column()
        .ok_or_else(|| Error::Schema("dataset has no source column".into()))?;
    if map.variable != source_column {
        return Err(Error::Schema(format!(
            "latent map is for '{}', not the source column '{source_column}'",
            map.variable
        )));
    }
    let d_by_level = map.dissimilarity()?;
    let d_of = |label: &str| -> Result<f64> {
        d_by_level
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, d)| *d)
            .ok_or_else(|| Error::UnknownLevel {
                variable: map.variable.clone(),
                level: label.to_string(),
            })
    };
    let mut keep = Vec::new();
    for (label, _) in data.per_source_counts() {
        if d_of(&label)? <= threshold {
            keep.push(label);
        }
    }
    data.retain_sources(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CategoricalVar, VariableSchema};
    use crate::gp::fit_gp;
    use approx::assert_relative_eq;

    fn two_source_dataset() -> MultiSourceDataset {
        let schema =
            VariableSchema::new(vec!["x".into()], vec![], Some("source"), "y").unwrap();
        let x: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let mut numeric = Vec::new();
        let mut source = Vec::new();
        let mut y = Vec::new();
        for &v in &x {
            numeric.push(v);
            source.push("a".to_string());
            y.push(v * v);
        }
        for &v in &x {
            numeric.push(v);
            source.push("b".to_string());
            y.push(v * v + 2.0);
        }
        MultiSourceDataset::from_columns(schema, vec![numeric], vec![], Some(source), y).unwrap()
    }

    #[test]
    fn decode_var_anchors_levels() {
        assert_eq!(decode_var(1, &[]), vec![[0.0, 0.0]]);
        assert_eq!(decode_var(2, &[1.5]), vec![[0.0, 0.0], [1.5, 0.0]]);
        assert_eq!(
            decode_var(4, &[1.5, -0.3, 0.7, 2.0, -2.0]),
            vec![[0.0, 0.0], [1.5, 0.0], [-0.3, 0.7], [2.0, -2.0]]
        );
    }

    #[test]
    fn free_counts() {
        assert_eq!(free_coord_count(1), 0);
        assert_eq!(free_coord_count(2), 1);
        assert_eq!(free_coord_count(4), 5);
    }

    #[test]
    fn fit_produces_anchored_bounded_latents() {
        let data = two_source_dataset();
        let model = fit_lvgp(&data, &FitOptions::default()).unwrap();
        let var = model.latents().var("source").unwrap();
        assert_eq!(var.coords[0], [0.0, 0.0]);
        assert_eq!(var.coords[1][1], 0.0);
        assert!(var.coords[1][0] >= 0.0);
        for c in &var.coords {
            assert!(c[0].abs() <= LATENT_BOUND && c[1].abs() <= LATENT_BOUND);
        }
        // The winning restart never sits above any restart's start.
        let summary = model.fit_summary();
        for record in &summary.records {
            assert!(summary.best_objective <= record.initial_objective + 1e-12);
        }
    }

    #[test]
    fn interpolates_training_rows() {
        let data = two_source_dataset();
        let opts = FitOptions {
            nugget: 0.0,
            ..FitOptions::default()
        };
        let model = fit_lvgp(&data, &opts).unwrap();
        let range = 3.0; // response range of the dataset
        for row in [0usize, 5, 12, 19] {
            let q = QueryPoint {
                numeric: data.numeric_row(row),
                levels: data.level_row(row),
            };
            let pred = model.predict(&[q]).unwrap()[0];
            assert!(
                (pred.mean - data.response()[row]).abs() <= 1e-6 * range,
                "row {row}: {} vs {}",
                pred.mean,
                data.response()[row]
            );
        }
    }

    #[test]
    fn single_level_model_matches_plain_gp() {
        let schema =
            VariableSchema::new(vec!["x".into()], vec![], Some("source"), "y").unwrap();
        let x: Vec<f64> = (0..7).map(|i| i as f64 / 6.0).collect();
        let y: Vec<f64> = x.iter().map(|v| (4.0 * v).sin()).collect();
        let source = vec!["only".to_string(); x.len()];
        let data =
            MultiSourceDataset::from_columns(schema, vec![x.clone()], vec![], Some(source), y.clone())
                .unwrap();
        let lvgp = fit_lvgp(&data, &FitOptions::default()).unwrap();

        let gp_schema = VariableSchema::new(vec!["x".into()], vec![], None, "y").unwrap();
        let gp_data =
            MultiSourceDataset::from_columns(gp_schema, vec![x], vec![], None, y).unwrap();
        let gp = fit_gp(&gp_data, &FitOptions::default()).unwrap();

        for xq in [0.07, 0.33, 0.85] {
            let lv = lvgp
                .predict(&[QueryPoint {
                    numeric: vec![xq],
                    levels: vec!["only".into()],
                }])
                .unwrap()[0];
            let g = gp.predict(&[vec![xq]]).unwrap()[0];
            assert_relative_eq!(lv.mean, g.mean, epsilon = 1e-8);
            assert_relative_eq!(lv.variance, g.variance, epsilon = 1e-8);
        }
    }

    #[test]
    fn unseen_level_is_rejected() {
        let data = two_source_dataset();
        let model = fit_lvgp(&data, &FitOptions::default()).unwrap();
        let err = model
            .predict(&[QueryPoint {
                numeric: vec![0.5],
                levels: vec!["zzz".into()],
            }])
            .unwrap_err();
        assert!(matches!(err, Error::UnknownLevel { .. }));
    }

    #[test]
    fn zero_row_level_is_rejected() {
        let schema = VariableSchema::new(
            vec!["x".into()],
            vec![],
            Some("source"),
            "y",
        )
        .unwrap();
        let mut data = MultiSourceDataset::from_columns(
            schema,
            vec![vec![0.0, 1.0]],
            vec![],
            Some(vec!["a".into(), "a".into()]),
            vec![1.0, 2.0],
        )
        .unwrap();
        // Register an extra level by splitting off a view with it absent.
        data = {
            let schema = VariableSchema {
                source: Some(CategoricalVar::with_levels("source", vec!["a", "ghost"])),
                ..data.schema().clone()
            };
            MultiSourceDataset::from_columns(
                schema,
                vec![vec![0.0, 1.0]],
                vec![],
                Some(vec!["a".into(), "a".into()]),
                vec![1.0, 2.0],
            )
            .unwrap()
        };
        let err = fit_lvgp(&data, &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err:?}");
    }

    #[test]
    fn coinciding_latents_give_identical_predictions() {
        // Build a model by hand with two levels at the same coordinate.
        let schema =
            VariableSchema::new(vec!["x".into()], vec![], Some("source"), "y").unwrap();
        let data = MultiSourceDataset::from_columns(
            schema.clone(),
            vec![vec![0.0, 0.5, 1.0, 0.25]],
            vec![],
            Some(vec!["a".into(), "a".into(), "b".into(), "b".into()]),
            vec![0.0, 1.0, 2.0, 0.5],
        )
        .unwrap();
        let (scaled, standardizer) = data.standardize().unwrap();
        let coords = [vec![[0.7, -0.3], [0.7, -0.3]]];
        let cat_rows: Vec<Vec<usize>> = (0..scaled.n()).map(|r| scaled.categorical_row(r)).collect();
        let points: Vec<MixedPoint> = (0..scaled.n())
            .map(|r| {
                let level = cat_rows[r][0];
                MixedPoint::new(scaled.numeric_row(r), vec![coords[0][level][0], coords[0][level][1]])
            })
            .collect();
        let y = DVector::from_vec(scaled.response().to_vec());
        let core = FittedCore::build(
            schema,
            standardizer,
            Lengthscales::new(vec![1.0]).unwrap(),
            1e-6,
            points,
            cat_rows,
            y,
            FitSummary {
                seed: 0,
                restarts: 0,
                best_restart: 0,
                best_objective: 0.0,
                records: vec![],
            },
        )
        .unwrap();
        let model = LvgpModel {
            core,
            latents: LatentConfig::new(vec![LatentVar {
                name: "source".into(),
                levels: vec!["a".into(), "b".into()],
                coords: coords[0].clone(),
            }]),
        };
        let pa = model
            .predict(&[QueryPoint {
                numeric: vec![0.4],
                levels: vec!["a".into()],
            }])
            .unwrap()[0];
        let pb = model
            .predict(&[QueryPoint {
                numeric: vec![0.4],
                levels: vec!["b".into()],
            }])
            .unwrap()[0];
        assert_eq!(pa.mean.to_bits(), pb.mean.to_bits());
        assert_eq!(pa.variance.to_bits(), pb.variance.to_bits());
    }

    #[test]
    fn constant_response_short_circuits() {
        let schema =
            VariableSchema::new(vec!["x".into()], vec![], Some("source"), "y").unwrap();
        let data = MultiSourceDataset::from_columns(
            schema,
            vec![vec![0.0, 0.5, 1.0]],
            vec![],
            Some(vec!["a".into(), "b".into(), "a".into()]),
            vec![4.0, 4.0, 4.0],
        )
        .unwrap();
        let model = fit_lvgp(&data, &FitOptions::default()).unwrap();
        let pred = model
            .predict(&[QueryPoint {
                numeric: vec![0.7],
                levels: vec!["b".into()],
            }])
            .unwrap()[0];
        assert_eq!(pred.mean, 4.0);
        assert_eq!(pred.variance, 0.0);
    }

    #[test]
    fn cloned_source_lands_nearest_to_its_original() {
        // Duplicate one source's rows under a fresh label and refit: the
        // clone sees identical data, so its latent point should be the
        // nearest neighbor of the original. The exact duplicate rows also
        // exercise the nugget path during the search.
        let (train, _) = crate::benchmarks::generate_parabola(
            0,
            &crate::benchmarks::ParabolaCounts::default(),
        );
        let schema = train.schema();
        let mut x: Vec<f64> = (0..train.n()).map(|r| train.numeric_row(r)[0]).collect();
        let mut src: Vec<String> = (0..train.n())
            .map(|r| train.source_label(r).unwrap().to_string())
            .collect();
        let mut y = train.response().to_vec();
        let original = "Perturbed Source 2";
        let clone = "Perturbed Source 2 copy";
        for row in train.rows_of_source(original).unwrap() {
            x.push(train.numeric_row(row)[0]);
            src.push(clone.to_string());
            y.push(train.response()[row]);
        }
        let cloned = MultiSourceDataset::from_columns(
            schema.clone(),
            vec![x],
            vec![],
            Some(src),
            y,
        )
        .unwrap();

        let opts = FitOptions {
            restarts: 4,
            ..FitOptions::default()
        };
        let model = fit_lvgp(&cloned, &opts).unwrap();
        let map = model.latent_map("source", None).unwrap();
        let distances = map.pairwise_distances();
        let clone_idx = map.level_index(clone).unwrap();
        let nearest = distances[clone_idx]
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != clone_idx)
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(j, _)| map.levels[j].clone())
            .unwrap();
        assert_eq!(nearest, original, "latent map: {:?}", map.coords);
    }

    #[test]
    fn latent_map_reference_semantics() {
        let map = LatentMap {
            variable: "source".into(),
            levels: vec!["a".into(), "b".into(), "c".into()],
            coords: vec![[0.0, 0.0], [1.0, 1.0], [3.0, 3.0]],
            reference: None,
            d: None,
        };
        // Reference already at the origin: coordinates unchanged.
        let at_origin = map.with_reference("a").unwrap();
        assert_eq!(at_origin.coords, map.coords);
        assert_eq!(at_origin.d_of("a").unwrap(), 0.0);
        assert_relative_eq!(at_origin.d_of("c").unwrap(), 1.0, epsilon = 1e-12);

        // Any reference gets D = 0 and distances are preserved.
        let at_b = map.with_reference("b").unwrap();
        assert_eq!(at_b.d_of("b").unwrap(), 0.0);
        let before = map.pairwise_distances();
        let after = at_b.pairwise_distances();
        for (ri, ro) in before.iter().zip(&after) {
            for (a, b) in ri.iter().zip(ro) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dissimilarity_hand_values() {
        let map = LatentMap {
            variable: "source".into(),
            levels: vec!["ref".into(), "corner".into(), "axis".into()],
            coords: vec![[0.0, 0.0], [3.0, 3.0], [3.0, 0.0]],
            reference: None,
            d: None,
        };
        let with_ref = map.with_reference("ref").unwrap();
        assert_relative_eq!(with_ref.d_of("corner").unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            with_ref.d_of("axis").unwrap(),
            1.0 / std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        assert_eq!(with_ref.d_of("ref").unwrap(), 0.0);
    }

    #[test]
    fn dissimilarity_requires_reference() {
        let map = LatentMap {
            variable: "source".into(),
            levels: vec!["a".into()],
            coords: vec![[0.0, 0.0]],
            reference: None,
            d: None,
        };
        assert!(map.dissimilarity().is_err());
    }

    #[test]
    fn filter_identity_and_reference_only() {
        let data = two_source_dataset();
        let map = LatentMap {
            variable: "source".into(),
            levels: vec!["a".into(), "b".into()],
            coords: vec![[0.0, 0.0], [2.0, 0.0]],
            reference: None,
            d: None,
        }
        .with_reference("a")
        .unwrap();
        let all = filter_sources(&data, &map, f64::INFINITY).unwrap();
        assert_eq!(all.n(), data.n());
        let only_ref = filter_sources(&data, &map, 0.0).unwrap();
        assert_eq!(only_ref.n(), 10);
        assert!(only_ref.rows_of_source("b").is_err());
        assert!(filter_sources(&data, &map, -0.1).is_err());
    }

    #[test]
    fn latent_map_csv_round_trip() {
        let map = LatentMap {
            variable: "source".into(),
            levels: vec!["a".into(), "b".into()],
            coords: vec![[0.25, -1.5], [2.0, 0.125]],
            reference: None,
            d: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("latent.csv");
        map.write_csv(&path).unwrap();
        let back = LatentMap::read_csv(&path).unwrap();
        assert_eq!(back.variable, map.variable);
        assert_eq!(back.levels, map.levels);
        assert_eq!(back.coords, map.coords);
    }
}
