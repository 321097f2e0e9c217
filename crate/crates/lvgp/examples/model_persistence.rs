//! Save a fitted model and get identical predictions back from disk. The
//! model file is self-contained JSON; nothing else is needed to predict.
//!
//! ```bash
//! cargo run --release -p lvgp --example model_persistence
//! ```

use lvgp::benchmarks::{generate_parabola, ParabolaCounts};
use lvgp::evaluation::{fit_model, ModelKind};
use lvgp::gp::FitOptions;
use lvgp::model_file::{load_model, save_model};
use lvgp::Result;

fn main() -> Result<()> {
    let (train, test) = generate_parabola(0, &ParabolaCounts::default());
    let model = fit_model(ModelKind::Lvgp, &train, &FitOptions::default())?;

    let dir = std::env::temp_dir().join("lvgp_model_persistence");
    std::fs::create_dir_all(&dir).ok();
    let path = dir.join("model.json");
    save_model(&model, &path)?;
    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("saved {} ({bytes} bytes)", path.display());

    let loaded = load_model(&path)?;
    let before = model.predict_dataset(&test)?;
    let after = loaded.predict_dataset(&test)?;
    let worst = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a.mean - b.mean).abs().max((a.variance - b.variance).abs()))
        .fold(0.0f64, f64::max);
    println!("largest save/load prediction difference over {} points: {worst:e}", after.len());
    Ok(())
}
