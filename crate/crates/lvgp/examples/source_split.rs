//! Latent-space sanity check: split one source's rows into two new
//! labels and refit. Both halves come from the same data-generating
//! process, so their latent points should land next to each other.
//!
//! ```bash
//! cargo run --release -p lvgp --example source_split
//! ```

use lvgp::benchmarks::{generate_ackley, AckleyCounts};
use lvgp::gp::FitOptions;
use lvgp::lvgp::fit_lvgp;
use lvgp::Result;

fn main() -> Result<()> {
    let (train, _) = generate_ackley(0, &AckleyCounts::default());
    let split = train.split_source("Ground Source", 0)?;
    println!("after the split:");
    for (label, count) in split.per_source_counts() {
        println!("  {label}: {count}");
    }

    let model = fit_lvgp(&split, &FitOptions::default())?;
    let map = model.latent_map("source", None)?;
    println!("\nlatent coordinates:");
    for (level, [z1, z2]) in map.levels.iter().zip(&map.coords) {
        println!("  {level:<22} ({z1:+.4}, {z2:+.4})");
    }

    // Nearest neighbor of each clone among all levels.
    let distances = map.pairwise_distances();
    let nearest = |level: &str| -> Result<String> {
        let i = map.level_index(level)?;
        let (j, _) = distances[i]
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        Ok(map.levels[j].clone())
    };
    let n1 = nearest("Ground Source_1")?;
    let n2 = nearest("Ground Source_2")?;
    println!("\nnearest neighbor of Ground Source_1: {n1}");
    println!("nearest neighbor of Ground Source_2: {n2}");
    if n1 == "Ground Source_2" && n2 == "Ground Source_1" {
        println!("the two halves are mutual nearest neighbors, as expected");
    }
    Ok(())
}
