//! Gaussian correlation over mixed inputs.
//!
//! Numeric coordinates contribute `phi_i * (x_i - x'_i)^2` to the squared
//! distance; categorical levels contribute the squared Euclidean distance
//! between their 2-D latent coordinates with unit weight. The correlation
//! is `exp(-distance^2)`, so it reduces bit-for-bit to the plain Gaussian
//! kernel when no categorical variables are present.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum nugget tried when escalating after a failed factorization.
pub const MAX_NUGGET: f64 = 1e-2;

/// Positive per-dimension scale parameters of the Gaussian kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lengthscales(Vec<f64>);

impl Lengthscales {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if phi.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::InvalidArgument(
                "lengthscales must be finite and positive".into(),
            ));
        }
        Ok(Lengthscales(phi))
    }

    /// Decode from the log10 parameterization used by the optimizer.
    pub fn from_log10(theta: &[f64]) -> Self {
        Lengthscales(theta.iter().map(|t| 10f64.powf(*t)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// One model-space input: scaled numeric coordinates plus the latent pair
/// substituted for each categorical level (inputs first, source last).
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPoint {
    pub numeric: Vec<f64>,
    pub latent: Vec<f64>,
}

impl MixedPoint {
    pub fn numeric_only(numeric: Vec<f64>) -> Self {
        MixedPoint {
            numeric,
            latent: Vec::new(),
        }
    }

    pub fn new(numeric: Vec<f64>, latent: Vec<f64>) -> Self {
        MixedPoint { numeric, latent }
    }

    pub fn dim(&self) -> usize {
        self.numeric.len() + self.latent.len()
    }
}

/// Fitted latent coordinates, per categorical variable and level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentConfig {
    vars: Vec<LatentVar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentVar {
    pub name: String,
    pub levels: Vec<String>,
    pub coords: Vec<[f64; 2]>,
}

impl LatentConfig {
    pub fn new(vars: Vec<LatentVar>) -> Self {
        for var in &vars {
            assert_eq!(var.levels.len(), var.coords.len());
        }
        LatentConfig { vars }
    }

    pub fn vars(&self) -> &[LatentVar] {
        &self.vars
    }

    pub fn var(&self, name: &str) -> Option<&LatentVar> {
        self.vars.iter().find(|v| v.name == name)
    }

    /// Concatenated latent coordinates for one combination of level
    /// indices (one index per variable, in config order).
    pub fn substitute(&self, level_indices: &[usize]) -> Vec<f64> {
        debug_assert_eq!(level_indices.len(), self.vars.len());
        let mut latent = Vec::with_capacity(2 * self.vars.len());
        for (var, &idx) in self.vars.iter().zip(level_indices) {
            let [z1, z2] = var.coords[idx];
            latent.push(z1);
            latent.push(z2);
        }
        latent
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            actual: b,
        })
    }
}

/// Squared distance in the exponent: phi-weighted numeric terms first,
/// then unit-weight latent terms. Shared by both kernels so the reduction
/// to the numeric-only case is exact.
#[inline]
fn sq_distance(w: &MixedPoint, w2: &MixedPoint, phi: &Lengthscales) -> f64 {
    let mut total = 0.0;
    for ((a, b), p) in w.numeric.iter().zip(&w2.numeric).zip(phi.values()) {
        let d = a - b;
        total += p * d * d;
    }
    for (a, b) in w.latent.iter().zip(&w2.latent) {
        let d = a - b;
        total += d * d;
    }
    total
}

/// Gaussian correlation of two numeric points: `exp(-sum phi_i (x_i - x'_i)^2)`.
pub fn gaussian_corr(x: &[f64], x2: &[f64], phi: &Lengthscales) -> Result<f64> {
    check_dims(x.len(), x2.len())?;
    check_dims(phi.len(), x.len())?;
    let w = MixedPoint::numeric_only(x.to_vec());
    let w2 = MixedPoint::numeric_only(x2.to_vec());
    Ok((-sq_distance(&w, &w2, phi)).exp())
}

/// Correlation of two mixed points: numeric terms are phi-weighted, latent
/// pairs contribute their full squared Euclidean distance.
pub fn mixed_corr(w: &MixedPoint, w2: &MixedPoint, phi: &Lengthscales) -> Result<f64> {
    check_dims(w.numeric.len(), w2.numeric.len())?;
    check_dims(w.latent.len(), w2.latent.len())?;
    check_dims(phi.len(), w.numeric.len())?;
    Ok((-sq_distance(w, w2, phi)).exp())
}

/// Cholesky factor of a training correlation matrix, with the nugget that
/// made it factorize and the log-determinant read off the factor diagonal.
#[derive(Debug, Clone)]
pub struct CorrFactor {
    chol: Cholesky<f64, Dyn>,
    n: usize,
    nugget: f64,
    log_det: f64,
}

impl CorrFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The diagonal addition actually used (may exceed the requested
    /// nugget after escalation).
    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Solve `C v = b` through the triangular factor.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}

pub(crate) fn build_dense(points: &[MixedPoint], phi: &Lengthscales, nugget: f64) -> DMatrix<f64> {
    let n = points.len();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        c[(i, i)] = 1.0 + nugget;
        for j in 0..i {
            let v = (-sq_distance(&points[i], &points[j], phi)).exp();
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// Single factorization attempt at a fixed nugget. Used by likelihood
/// evaluations, which penalize failure instead of escalating.
pub(crate) fn corr_matrix_attempt(
    points: &[MixedPoint],
    phi: &Lengthscales,
    nugget: f64,
) -> Option<CorrFactor> {
    let n = points.len();
    let dense = build_dense(points, phi, nugget);
    let chol = dense.cholesky()?;
    let log_det: f64 = {
        let l = chol.l_dirty();
        let mut sum = 0.0;
        for i in 0..n {
            let d = l[(i, i)];
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            sum += d.ln();
        }
        2.0 * sum
    };
    Some(CorrFactor {
        chol,
        n,
        nugget,
        log_det,
    })
}

fn find_duplicate(points: &[MixedPoint]) -> Option<(usize, usize)> {
    for i in 0..points.len() {
        for j in 0..i {
            if points[i] == points[j] {
                return Some((j, i));
            }
        }
    }
    None
}

/// Assemble and factorize the training correlation matrix.
///
/// On Cholesky failure the nugget escalates tenfold per step up to
/// [`MAX_NUGGET`]; if every attempt fails the error names duplicate rows
/// when any are detected.
pub fn corr_matrix(points: &[MixedPoint], phi: &Lengthscales, nugget: f64) -> Result<CorrFactor> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("correlation matrix of zero points".into()));
    }
    if nugget < 0.0 {
        return Err(Error::InvalidArgument("nugget must be nonnegative".into()));
    }
    let mut candidates = vec![nugget];
    let mut eta = if nugget > 0.0 { nugget * 10.0 } else { 1e-6 };
    while eta <= MAX_NUGGET * (1.0 + 1e-12) {
        candidates.push(eta);
        eta *= 10.0;
    }
    for eta in candidates {
        if let Some(factor) = corr_matrix_attempt(points, phi, eta) {
            return Ok(factor);
        }
    }
    let detail = match find_duplicate(points) {
        Some((i, j)) => format!("rows {i} and {j} are identical"),
        None => "no exact duplicate rows detected".into(),
    };
    Err(Error::SingularMatrix(format!(
        "factorization failed at maximum nugget {MAX_NUGGET}; {detail}"
    )))
}

/// Correlations between a prediction point and every training point. No
/// nugget is added.
pub fn cross_corr(
    wstar: &MixedPoint,
    training: &[MixedPoint],
    phi: &Lengthscales,
) -> Result<DVector<f64>> {
    if training.is_empty() {
        return Err(Error::InvalidArgument("cross-correlation with no training points".into()));
    }
    let mut out = DVector::zeros(training.len());
    for (i, w) in training.iter().enumerate() {
        out[i] = mixed_corr(wstar, w, phi)?;
    }
    Ok(out)
}
