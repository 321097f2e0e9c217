//! Versioned on-disk model format.
//!
//! A model file is a self-contained JSON document: loading one requires no
//! other file. It embeds the schema, the standardizer, the fitted
//! hyperparameters, the latent coordinates (for latent-variable models)
//! and the scaled training rows, because GP prediction conditions on the
//! training data. On load the correlation factor and prediction weights
//! are rebuilt from the stored values, which reproduces in-memory
//! predictions exactly.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dataset::{Standardizer, VariableSchema};
use crate::error::{Error, Result};
use crate::evaluation::Model;
use crate::gp::{FitSummary, FittedCore, GpModel};
use crate::kernel::{LatentConfig, LatentVar, Lengthscales, MixedPoint};
use crate::lvgp::LvgpModel;

pub const FORMAT_VERSION: u32 = 1;

/// Serialized form of a fitted model.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    /// "gp" or "lvgp".
    pub kind: String,
    pub schema: VariableSchema,
    pub standardizer: Standardizer,
    /// Constant mean, standardized response units.
    pub mu: f64,
    /// Process variance, standardized response units.
    pub sigma2: f64,
    pub phi: Vec<f64>,
    /// Effective diagonal nugget of the stored factorization.
    pub nugget: f64,
    /// Latent coordinates per categorical variable; empty for GP models.
    pub latents: Vec<LatentVar>,
    /// Scaled numeric inputs, one row per training sample.
    pub train_numeric_scaled: Vec<Vec<f64>>,
    /// Level indices per training row (categorical inputs then source);
    /// empty for GP models.
    pub train_levels: Vec<Vec<usize>>,
    /// Standardized training responses.
    pub train_response_std: Vec<f64>,
    pub fit: FitSummary,
}

impl ModelFile {
    pub fn from_model(model: &Model) -> Self {
        let (core, latents): (&FittedCore, Vec<LatentVar>) = match model {
            Model::Gp(m) => (&m.core, Vec::new()),
            Model::Lvgp(m) => (&m.core, m.latents().vars().to_vec()),
        };
        ModelFile {
            format_version: FORMAT_VERSION,
            kind: model.kind().to_string(),
            schema: core.schema.clone(),
            standardizer: core.standardizer.clone(),
            mu: core.mu,
            sigma2: core.sigma2,
            phi: core.phi.values().to_vec(),
            nugget: core.nugget,
            latents,
            train_numeric_scaled: core.points.iter().map(|p| p.numeric.clone()).collect(),
            train_levels: core.cat_rows.clone(),
            train_response_std: core.y.iter().copied().collect(),
            fit: core.fit.clone(),
        }
    }

    pub fn into_model(self) -> Result<Model> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported format version {}, this build reads version {FORMAT_VERSION}",
                self.format_version
            )));
        }
        let n = self.train_response_std.len();
        if self.train_numeric_scaled.len() != n {
            return Err(Error::ModelFile(
                "training input and response row counts disagree".into(),
            ));
        }
        let phi = Lengthscales::new(self.phi).map_err(|e| Error::ModelFile(e.to_string()))?;
        let y = DVector::from_vec(self.train_response_std);

        match self.kind.as_str() {
            "gp" => {
                let points: Vec<MixedPoint> = self
                    .train_numeric_scaled
                    .into_iter()
                    .map(MixedPoint::numeric_only)
                    .collect();
                let core = FittedCore::restore(
                    self.schema,
                    self.standardizer,
                    phi,
                    self.nugget,
                    self.mu,
                    self.sigma2,
                    points,
                    Vec::new(),
                    y,
                    self.fit,
                )?;
                Ok(Model::Gp(GpModel { core }))
            }
            "lvgp" => {
                if self.latents.is_empty() {
                    return Err(Error::ModelFile(
                        "latent-variable model file has no latent coordinates".into(),
                    ));
                }
                if self.train_levels.len() != n {
                    return Err(Error::ModelFile(
                        "training level rows do not match the sample count".into(),
                    ));
                }
                let latents = LatentConfig::new(self.latents);
                let points: Vec<MixedPoint> = self
                    .train_numeric_scaled
                    .into_iter()
                    .zip(&self.train_levels)
                    .map(|(numeric, levels)| MixedPoint::new(numeric, latents.substitute(levels)))
                    .collect();
                let core = FittedCore::restore(
                    self.schema,
                    self.standardizer,
                    phi,
                    self.nugget,
                    self.mu,
                    self.sigma2,
                    points,
                    self.train_levels,
                    y,
                    self.fit,
                )?;
                Ok(Model::Lvgp(LvgpModel { core, latents }))
            }
            other => Err(Error::ModelFile(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Persist a fitted model as pretty-printed JSON.
pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let file = ModelFile::from_model(model);
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::ModelFile(format!("serialization failed: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Load a model file and rebuild the fitted model.
pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::ModelFile(format!("cannot parse {}: {e}", path.display())))?;
    file.into_model()
}
