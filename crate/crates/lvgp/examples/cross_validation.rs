//! Stratified k-fold cross-validation with per-fold detail and a parity
//! export.
//!
//! ```bash
//! cargo run --release -p lvgp --example cross_validation
//! ```

use lvgp::benchmarks::{generate_parabola, ParabolaCounts};
use lvgp::evaluation::{parity_export, run_cv, ModelKind};
use lvgp::gp::FitOptions;
use lvgp::Result;

fn main() -> Result<()> {
    let (train, _) = generate_parabola(0, &ParabolaCounts::default());
    let opts = FitOptions::default();

    for kind in [ModelKind::Gp, ModelKind::Lvgp] {
        let report = run_cv(&train, kind, 5, 0, &opts)?;
        let detail = report.cv.as_ref().unwrap();
        println!("{kind}: mean cv nrmse {:.4}", report.nrmse);
        for (fold, (t, v)) in detail
            .fold_train_nrmse
            .iter()
            .zip(&detail.fold_val_nrmse)
            .enumerate()
        {
            println!("  fold {}: train {t:.4}, validation {v:.4}", fold + 1);
        }
        println!("  mean training nrmse {:.4}\n", detail.mean_train_nrmse);

        if kind == ModelKind::Lvgp {
            let dir = std::env::temp_dir().join("lvgp_cross_validation");
            std::fs::create_dir_all(&dir).ok();
            let path = dir.join("parity.csv");
            parity_export(&report, &path)?;
            println!("validation parity records written to {}", path.display());
        }
    }
    Ok(())
}
