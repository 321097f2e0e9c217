//! Ingest your own multi-source data: write a schema config and a CSV,
//! load them, fit, and predict at new points.
//!
//! ```bash
//! cargo run --release -p lvgp --example custom_csv
//! ```

use lvgp::dataset::{MultiSourceDataset, VariableSchema};
use lvgp::gp::FitOptions;
use lvgp::lvgp::{fit_lvgp, QueryPoint};
use lvgp::Result;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("lvgp_custom_csv");
    std::fs::create_dir_all(&dir).ok();

    // The schema names the columns; levels are registered from the data.
    let schema_text = "\
numeric_inputs = temperature
categorical_inputs =
source_column = lab
response_column = hardness
";
    let schema_path = dir.join("schema.cfg");
    std::fs::write(&schema_path, schema_text).unwrap();

    // Two labs measured overlapping temperature ranges with an offset.
    let mut csv = String::from("temperature,lab,hardness\n");
    for i in 0..12 {
        let t = 300.0 + 40.0 * i as f64;
        csv.push_str(&format!("{t},lab_a,{}\n", 0.01 * t + 2.0));
    }
    for i in 0..6 {
        let t = 320.0 + 80.0 * i as f64;
        csv.push_str(&format!("{t},lab_b,{}\n", 0.01 * t + 3.5));
    }
    let data_path = dir.join("data.csv");
    std::fs::write(&data_path, csv).unwrap();

    let schema = VariableSchema::load_config(&schema_path)?;
    let data = MultiSourceDataset::load_csv(&data_path, &schema)?;
    println!("loaded {} rows from {}", data.n(), data_path.display());
    for (label, count) in data.per_source_counts() {
        println!("  {label}: {count}");
    }

    let model = fit_lvgp(&data, &FitOptions::default())?;
    println!("\npredictions at temperature 500:");
    for lab in ["lab_a", "lab_b"] {
        let pred = model.predict(&[QueryPoint {
            numeric: vec![500.0],
            levels: vec![lab.into()],
        }])?[0];
        println!("  {lab}: mean {:.3}, std {:.3}", pred.mean, pred.std());
    }

    let map = model.latent_map("lab", Some("lab_a"))?;
    println!("\nD(lab_b) relative to lab_a: {:.4}", map.d_of("lab_b")?);
    Ok(())
}
