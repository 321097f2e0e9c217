//! Targeted source selection: use the dissimilarity metric to drop
//! sources far from the one you control, then refit on the survivors.
//!
//! ```bash
//! cargo run --release -p lvgp --example targeted_filtering
//! ```

use lvgp::benchmarks::{generate_parabola, ParabolaCounts};
use lvgp::evaluation::{evaluate, Model};
use lvgp::gp::FitOptions;
use lvgp::lvgp::{filter_sources, fit_lvgp};
use lvgp::Result;

fn main() -> Result<()> {
    let (train, test) = generate_parabola(0, &ParabolaCounts::default());
    let ground_test = test.subset(&test.rows_of_source("Ground Source")?);
    let opts = FitOptions::default();

    let full = fit_lvgp(&train, &opts)?;
    let map = full.latent_map("source", Some("Ground Source"))?;
    println!("dissimilarity from the ground source:");
    for (level, d) in map.dissimilarity()? {
        println!("  D({level}) = {d:.4}");
    }

    // Keep the reference and its closest neighbor: threshold halfway
    // between the nearest and the second-nearest perturbed source.
    let mut ds: Vec<f64> = map
        .dissimilarity()?
        .iter()
        .filter(|(level, _)| level != "Ground Source")
        .map(|(_, d)| *d)
        .collect();
    ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let threshold = 0.5 * (ds[0] + ds[1]);
    println!("\nfiltering with threshold D <= {threshold:.4}");

    let filtered = filter_sources(&train, &map, threshold)?;
    println!("kept {} of {} rows:", filtered.n(), train.n());
    for (label, count) in filtered.per_source_counts() {
        println!("  {label}: {count}");
    }

    let refit = fit_lvgp(&filtered, &opts)?;
    let full_report = evaluate(&Model::Lvgp(full), &ground_test, "ground-test")?;
    let refit_report = evaluate(&Model::Lvgp(refit), &ground_test, "ground-test")?;
    println!("\nground-source testing nrmse:");
    println!("  all sources:      {:.6}", full_report.nrmse);
    println!("  filtered sources: {:.6}", refit_report.nrmse);
    Ok(())
}
