//! Interpolating Gaussian-process regression over numeric inputs.
//!
//! The constant mean and process variance are profiled out of the
//! likelihood in closed form, leaving a bounded search over log10
//! lengthscales. Everything runs through the Cholesky factor of the
//! training correlation matrix; no matrix is ever inverted explicitly.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{MultiSourceDataset, Standardizer, VariableSchema};
use crate::error::{Error, Result};
use crate::kernel::{corr_matrix, corr_matrix_attempt, cross_corr, CorrFactor, Lengthscales, MixedPoint};
use crate::optimize::{best_restart, multi_start, Bounds, OptimOptions, PENALTY};

/// Degenerate-variance cutoff for the profiled process variance, in
/// standardized response units.
const SIGMA2_FLOOR: f64 = 1e-12;

/// Knobs of the maximum-likelihood fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub seed: u64,
    pub nugget: f64,
    /// Bounds on log10 lengthscales.
    pub theta_bounds: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 8,
            seed: 0,
            nugget: 1e-6,
            theta_bounds: (-4.0, 4.0),
        }
    }
}

impl FitOptions {
    pub fn with_seed(seed: u64) -> Self {
        FitOptions {
            seed,
            ..FitOptions::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if self.nugget < 0.0 {
            return Err(Error::InvalidArgument("nugget must be nonnegative".into()));
        }
        if self.theta_bounds.0 >= self.theta_bounds.1 {
            return Err(Error::InvalidArgument("theta bounds must be an interval".into()));
        }
        Ok(())
    }
}

/// Outcome of one restart of the likelihood search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub initial_objective: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// What the multi-start search did and which restart won.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub seed: u64,
    pub restarts: usize,
    pub best_restart: usize,
    pub best_objective: f64,
    pub records: Vec<RestartSummary>,
}

/// Predicted mean and variance in original response units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Closed-form profile estimates of the mean and process variance given a
/// factorized correlation matrix: `mu = (1' C^-1 y) / (1' C^-1 1)` and
/// `sigma2 = (y - mu 1)' C^-1 (y - mu 1) / n`.
pub fn profile_estimates(factor: &CorrFactor, y: &DVector<f64>) -> Result<(f64, f64)> {
    let (mu, sigma2) = profile_parts(factor, y);
    if sigma2 <= SIGMA2_FLOOR {
        return Err(Error::NumericalDegeneracy(format!(
            "profiled process variance {sigma2:.3e} is not positive"
        )));
    }
    Ok((mu, sigma2))
}

fn profile_parts(factor: &CorrFactor, y: &DVector<f64>) -> (f64, f64) {
    let n = y.len();
    let ones = DVector::from_element(n, 1.0);
    let ci_y = factor.solve(y);
    let ci_1 = factor.solve(&ones);
    let mu = ones.dot(&ci_y) / ones.dot(&ci_1);
    // C^-1 (y - mu 1) = C^-1 y - mu C^-1 1, so no second solve is needed.
    let ci_r = &ci_y - mu * &ci_1;
    let r = y - mu * &ones;
    let sigma2 = r.dot(&ci_r) / n as f64;
    (mu, sigma2)
}

pub(crate) fn nll_from_factor(factor: &CorrFactor, y: &DVector<f64>) -> Option<f64> {
    let (_, sigma2) = profile_parts(factor, y);
    if !sigma2.is_finite() || sigma2 <= SIGMA2_FLOOR {
        return None;
    }
    let n = y.len() as f64;
    let value = 0.5 * n * (2.0 * std::f64::consts::PI * sigma2).ln() + 0.5 * factor.log_det() + 0.5 * n;
    value.is_finite().then_some(value)
}

/// Negative profiled log-likelihood at log10 lengthscales `theta` for
/// fixed training points. Returns a large penalty instead of failing when
/// the matrix cannot be factorized or the variance degenerates, so
/// optimizers retreat rather than abort.
pub fn neg_log_likelihood(
    points: &[MixedPoint],
    y: &DVector<f64>,
    theta: &[f64],
    nugget: f64,
) -> f64 {
    let phi = Lengthscales::from_log10(theta);
    match corr_matrix_attempt(points, &phi, nugget) {
        Some(factor) => nll_from_factor(&factor, y).unwrap_or(PENALTY),
        None => PENALTY,
    }
}

/// Shared state of a fitted model: hyperparameters, factorized training
/// correlations and the standardizer that maps back to original units.
#[derive(Debug, Clone)]
pub(crate) struct FittedCore {
    pub schema: VariableSchema,
    pub standardizer: Standardizer,
    pub phi: Lengthscales,
    /// Effective nugget in the stored factor (after any escalation).
    pub nugget: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub points: Vec<MixedPoint>,
    /// Level indices per training row (categorical inputs then source);
    /// empty for numeric-only models. Kept for persistence.
    pub cat_rows: Vec<Vec<usize>>,
    pub y: DVector<f64>,
    pub factor: Option<CorrFactor>,
    pub alpha: Option<DVector<f64>>,
    pub fit: FitSummary,
}

impl FittedCore {
    /// Assemble the core at chosen hyperparameters (nugget may escalate).
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        schema: VariableSchema,
        standardizer: Standardizer,
        phi: Lengthscales,
        requested_nugget: f64,
        points: Vec<MixedPoint>,
        cat_rows: Vec<Vec<usize>>,
        y: DVector<f64>,
        fit: FitSummary,
    ) -> Result<Self> {
        let factor = corr_matrix(&points, &phi, requested_nugget)?;
        let (mu, sigma2) = profile_estimates(&factor, &y)?;
        let ones = DVector::from_element(y.len(), 1.0);
        let alpha = factor.solve(&(&y - mu * &ones));
        Ok(FittedCore {
            schema,
            standardizer,
            phi,
            nugget: factor.nugget(),
            mu,
            sigma2,
            points,
            cat_rows,
            y,
            factor: Some(factor),
            alpha: Some(alpha),
            fit,
        })
    }

    /// Rebuild a core from persisted hyperparameters: the factor and the
    /// prediction weights are recomputed, the estimates are not.
    #[allow(clippy::too_many_arguments)]
    pub fn restore(
        schema: VariableSchema,
        standardizer: Standardizer,
        phi: Lengthscales,
        nugget: f64,
        mu: f64,
        sigma2: f64,
        points: Vec<MixedPoint>,
        cat_rows: Vec<Vec<usize>>,
        y: DVector<f64>,
        fit: FitSummary,
    ) -> Result<Self> {
        let (factor, alpha) = if standardizer.constant_response {
            (None, None)
        } else {
            let factor = corr_matrix(&points, &phi, nugget)?;
            let ones = DVector::from_element(y.len(), 1.0);
            let alpha = factor.solve(&(&y - mu * &ones));
            (Some(factor), Some(alpha))
        };
        Ok(FittedCore {
            schema,
            standardizer,
            phi,
            nugget,
            mu,
            sigma2,
            points,
            cat_rows,
            y,
            factor,
            alpha,
            fit,
        })
    }

    /// Degenerate core for constant-response training data: predictions
    /// return the constant with zero variance.
    pub fn constant(
        schema: VariableSchema,
        standardizer: Standardizer,
        m: usize,
        points: Vec<MixedPoint>,
        cat_rows: Vec<Vec<usize>>,
        y: DVector<f64>,
        seed: u64,
    ) -> Self {
        FittedCore {
            schema,
            standardizer,
            phi: Lengthscales::from_log10(&vec![0.0; m]),
            nugget: 0.0,
            mu: 0.0,
            sigma2: 0.0,
            points,
            cat_rows,
            y,
            factor: None,
            alpha: None,
            fit: FitSummary {
                seed,
                restarts: 0,
                best_restart: 0,
                best_objective: 0.0,
                records: Vec::new(),
            },
        }
    }

    pub fn predict_point(&self, w: &MixedPoint) -> Result<Prediction> {
        if self.standardizer.constant_response {
            return Ok(Prediction {
                mean: self.standardizer.response_mean,
                variance: 0.0,
            });
        }
        let factor = self.factor.as_ref().expect("non-constant model has a factor");
        let alpha = self.alpha.as_ref().expect("non-constant model has weights");
        let c = cross_corr(w, &self.points, &self.phi)?;
        let mean_std = self.mu + c.dot(alpha);
        let u = factor.solve(&c);
        // Negative values from cancellation clamp to zero.
        let var_std = (self.sigma2 * (1.0 - c.dot(&u))).max(0.0);
        Ok(Prediction {
            mean: self.standardizer.unstandardize_mean(mean_std),
            variance: self.standardizer.unstandardize_variance(var_std),
        })
    }

    /// Scale one raw numeric input row into model space.
    pub fn scale_numeric_row(&self, raw: &[f64]) -> Result<Vec<f64>> {
        let m = self.schema.n_numeric();
        if raw.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: raw.len(),
            });
        }
        Ok(raw
            .iter()
            .enumerate()
            .map(|(col, v)| self.standardizer.scale_numeric(col, *v))
            .collect())
    }
}

/// Draw the initial log10 lengthscales of one restart.
pub(crate) fn draw_theta(rng: &mut ChaCha12Rng, m: usize, bounds: (f64, f64)) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(bounds.0..bounds.1)).collect()
}

pub(crate) fn summarize_restarts(
    seed: u64,
    records: &[crate::optimize::RestartRecord],
) -> FitSummary {
    let best = best_restart(records);
    FitSummary {
        seed,
        restarts: records.len(),
        best_restart: best.restart,
        best_objective: best.result.value,
        records: records
            .iter()
            .map(|r| RestartSummary {
                restart: r.restart,
                initial_objective: r.result.initial_value,
                objective: r.result.value,
                iterations: r.result.iterations,
                converged: r.result.converged,
            })
            .collect(),
    }
}

/// A Gaussian-process model over numeric inputs only.
#[derive(Debug, Clone)]
pub struct GpModel {
    pub(crate) core: FittedCore,
}

/// Fit a GP to the numeric inputs of `data` by seeded multi-start
/// maximum likelihood. Categorical input columns are rejected; a source
/// column, if present, is ignored.
pub fn fit_gp(data: &MultiSourceDataset, opts: &FitOptions) -> Result<GpModel> {
    opts.validate()?;
    if data.n() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 training rows, got {}",
            data.n()
        )));
    }
    if data.schema().n_categorical() > 0 {
        return Err(Error::InvalidArgument(
            "data has categorical inputs; fit a latent-variable model instead".into(),
        ));
    }
    let m = data.schema().n_numeric();
    if m == 0 {
        return Err(Error::InvalidArgument("no numeric input columns".into()));
    }

    let (scaled, standardizer) = data.standardize()?;
    let points: Vec<MixedPoint> = (0..scaled.n())
        .map(|r| MixedPoint::numeric_only(scaled.numeric_row(r)))
        .collect();
    let y = DVector::from_vec(scaled.response().to_vec());

    if standardizer.constant_response {
        let core = FittedCore::constant(
            data.schema().clone(),
            standardizer,
            m,
            points,
            Vec::new(),
            y,
            opts.seed,
        );
        return Ok(GpModel { core });
    }

    let objective = |theta: &[f64]| neg_log_likelihood(&points, &y, theta, opts.nugget);
    let bounds = Bounds::new(vec![opts.theta_bounds.0; m], vec![opts.theta_bounds.1; m]);
    let draw = |rng: &mut ChaCha12Rng| draw_theta(rng, m, opts.theta_bounds);
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
    let phi = Lengthscales::from_log10(&best.result.x);
    let core = FittedCore::build(
        data.schema().clone(),
        standardizer,
        phi,
        opts.nugget,
        points,
        Vec::new(),
        y,
        fit,
    )?;
    Ok(GpModel { core })
}

impl GpModel {
    /// Predict mean and variance, in original units, at raw numeric points.
    pub fn predict(&self, points: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        points
            .iter()
            .map(|x| {
                let scaled = self.core.scale_numeric_row(x)?;
                self.core.predict_point(&MixedPoint::numeric_only(scaled))
            })
            .collect()
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
