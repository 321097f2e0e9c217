//! Ackley variants as four information sources: cross-validated
//! comparison of a pooled GP against the latent-variable model, plus a
//! single-source baseline fitted on the sparse ground source alone.
//!
//! ```bash
//! cargo run --release -p lvgp --example ackley_study
//! ```

use lvgp::benchmarks::{generate_ackley, AckleyCounts};
use lvgp::evaluation::{evaluate, fit_model, run_cv, ModelKind};
use lvgp::gp::FitOptions;
use lvgp::Result;

fn main() -> Result<()> {
    let start = std::time::Instant::now();
    let (train, test) = generate_ackley(0, &AckleyCounts::default());
    println!(
        "training rows: {} ({} ground), testing rows: {}\n",
        train.n(),
        train.rows_of_source("Ground Source")?.len(),
        test.n()
    );
    let opts = FitOptions::default();

    // 5-fold stratified cross-validation for both model kinds.
    let gp_cv = run_cv(&train, ModelKind::Gp, 5, 0, &opts)?;
    println!(
        "gp   cv: mean training nrmse {:.4}, mean cv nrmse {:.4}",
        gp_cv.cv.as_ref().unwrap().mean_train_nrmse,
        gp_cv.nrmse
    );
    let lvgp_cv = run_cv(&train, ModelKind::Lvgp, 5, 0, &opts)?;
    println!(
        "lvgp cv: mean training nrmse {:.4}, mean cv nrmse {:.4}\n",
        lvgp_cv.cv.as_ref().unwrap().mean_train_nrmse,
        lvgp_cv.nrmse
    );

    // Full-data fits, scored on the held-out testing split.
    let gp = fit_model(ModelKind::Gp, &train, &opts)?;
    let lvgp = fit_model(ModelKind::Lvgp, &train, &opts)?;
    let gp_test = evaluate(&gp, &test, "test")?;
    let lvgp_test = evaluate(&lvgp, &test, "test")?;
    println!("gp   testing nrmse: {:.4}", gp_test.nrmse);
    println!("lvgp testing nrmse: {:.4}\n", lvgp_test.nrmse);

    // Single-source baseline: a GP fitted on the 20 ground rows alone,
    // compared on the ground-source slice of the testing split.
    let ground_train = train.subset(&train.rows_of_source("Ground Source")?);
    let gp_gs = fit_model(ModelKind::Gp, &ground_train, &opts)?;
    let ground_test = test.subset(&test.rows_of_source("Ground Source")?);
    let gs_report = evaluate(&gp_gs, &ground_test, "ground-test")?;
    let lvgp_ground = evaluate(&lvgp, &ground_test, "ground-test")?;

    let mean_std = |report: &lvgp::EvalReport| {
        report.parity.iter().map(|p| p.std).sum::<f64>() / report.parity.len() as f64
    };
    println!("ground-source testing split ({} rows):", ground_test.n());
    println!(
        "  gp-gs: nrmse {:.4}, mean predictive std {:.4}",
        gs_report.nrmse,
        mean_std(&gs_report)
    );
    println!(
        "  lvgp:  nrmse {:.4}, mean predictive std {:.4}",
        lvgp_ground.nrmse,
        mean_std(&lvgp_ground)
    );
    println!("\nelapsed: {:.1?}", start.elapsed());
    Ok(())
}
