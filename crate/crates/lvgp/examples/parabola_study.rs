//! Four parabola sources, one model: fuse them with a latent-variable GP
//! and compare against a source-unaware GP on the same rows.
//!
//! ```bash
//! cargo run --release -p lvgp --example parabola_study
//! ```

use lvgp::benchmarks::{generate_parabola, ParabolaCounts};
use lvgp::evaluation::{evaluate, fit_model, Model, ModelKind};
use lvgp::gp::FitOptions;
use lvgp::Result;

fn main() -> Result<()> {
    let start = std::time::Instant::now();
    let (train, test) = generate_parabola(0, &ParabolaCounts::default());
    println!("training rows: {}", train.n());
    for (label, count) in train.per_source_counts() {
        println!("  {label}: {count}");
    }
    println!("testing rows:  {}\n", test.n());

    let opts = FitOptions::default();

    // The source-unaware model pools all rows over x alone.
    let gp = fit_model(ModelKind::Gp, &train, &opts)?;
    let gp_train = evaluate(&gp, &train, "train")?;
    let gp_test = evaluate(&gp, &test, "test")?;

    // The latent-variable model embeds each source in a 2-D latent space.
    let lvgp = fit_model(ModelKind::Lvgp, &train, &opts)?;
    let lvgp_train = evaluate(&lvgp, &train, "train")?;
    let lvgp_test = evaluate(&lvgp, &test, "test")?;

    println!("model  training nrmse  testing nrmse");
    println!("gp     {:<15.6} {:.6}", gp_train.nrmse, gp_test.nrmse);
    println!("lvgp   {:<15.6} {:.6}", lvgp_train.nrmse, lvgp_test.nrmse);
    println!(
        "\nlvgp beats the pooled gp by {:.1}x on the testing split",
        gp_test.nrmse / lvgp_test.nrmse
    );

    if let Model::Lvgp(model) = &lvgp {
        let map = model.latent_map("source", Some("Ground Source"))?;
        println!("\ndissimilarity from the ground source:");
        for (level, d) in map.dissimilarity()? {
            println!("  D({level}) = {d:.4}");
        }
    }
    println!("\nelapsed: {:.1?}", start.elapsed());
    Ok(())
}
