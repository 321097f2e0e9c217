//! Deterministic generators for two synthetic multi-source families.
//!
//! Both families derive several information sources from one base
//! function, so the sources share structure but disagree in ways a
//! source-aware model can learn.
//!
//! Parabola family over `x` in [-10, 10]:
//!
//! ```text
//! y = (x + x_shift - a) * (x + x_shift - b) + y_shift,  a = 1, b = 2
//! Ground Source:       x_shift = 0,  y_shift = 0
//! Perturbed Source 1:  x_shift = 8,  y_shift = 0
//! Perturbed Source 2:  x_shift = 0,  y_shift = 100
//! Perturbed Source 3:  x_shift = 12, y_shift = 120
//! ```
//!
//! Ackley family over `(x, y)` in [-5, 5]^2 with a = 20, b = 0.2, c = 2,
//! writing `r = sqrt((x^2 + y^2) / 2)` and `s = (cos(c x) + cos(c y)) / 2`:
//!
//! ```text
//! Ground Source:       -a e^(-b r) - e^s + a + e
//! Perturbed Source 1:  -a e^(-b r) + 10
//! Perturbed Source 2:   e^s + 5
//! Perturbed Source 3:  -(a/4) e^(-b r) - (3/4) e^s + a + e
//! ```

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::dataset::{MultiSourceDataset, VariableSchema};
use crate::error::{Error, Result};

/// Parameters of one parabola source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolaParams {
    pub a: f64,
    pub b: f64,
    pub x_shift: f64,
    pub y_shift: f64,
}

/// Shared constants of the Ackley family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AckleyParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for AckleyParams {
    fn default() -> Self {
        AckleyParams {
            a: 20.0,
            b: 0.2,
            c: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParabolaSource {
    Ground,
    Perturbed1,
    Perturbed2,
    Perturbed3,
}

impl ParabolaSource {
    pub const ALL: [ParabolaSource; 4] = [
        ParabolaSource::Ground,
        ParabolaSource::Perturbed1,
        ParabolaSource::Perturbed2,
        ParabolaSource::Perturbed3,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ParabolaSource::Ground => "Ground Source",
            ParabolaSource::Perturbed1 => "Perturbed Source 1",
            ParabolaSource::Perturbed2 => "Perturbed Source 2",
            ParabolaSource::Perturbed3 => "Perturbed Source 3",
        }
    }

    pub fn from_label(label: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.label() == label)
            .ok_or_else(|| Error::UnknownLevel {
                variable: "source".into(),
                level: label.to_string(),
            })
    }

    pub fn params(self) -> ParabolaParams {
        let (x_shift, y_shift) = match self {
            ParabolaSource::Ground => (0.0, 0.0),
            ParabolaSource::Perturbed1 => (8.0, 0.0),
            ParabolaSource::Perturbed2 => (0.0, 100.0),
            ParabolaSource::Perturbed3 => (12.0, 120.0),
        };
        ParabolaParams {
            a: 1.0,
            b: 2.0,
            x_shift,
            y_shift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AckleySource {
    Ground,
    Perturbed1,
    Perturbed2,
    Perturbed3,
}

impl AckleySource {
    pub const ALL: [AckleySource; 4] = [
        AckleySource::Ground,
        AckleySource::Perturbed1,
        AckleySource::Perturbed2,
        AckleySource::Perturbed3,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AckleySource::Ground => "Ground Source",
            AckleySource::Perturbed1 => "Perturbed Source 1",
            AckleySource::Perturbed2 => "Perturbed Source 2",
            AckleySource::Perturbed3 => "Perturbed Source 3",
        }
    }

    pub fn from_label(label: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.label() == label)
            .ok_or_else(|| Error::UnknownLevel {
                variable: "source".into(),
                level: label.to_string(),
            })
    }
}

/// Parabola response of one source at `x`.
pub fn parabola_value(source: ParabolaSource, x: f64) -> f64 {
    let p = source.params();
    (x + p.x_shift - p.a) * (x + p.x_shift - p.b) + p.y_shift
}

/// Ackley-family response of one source at `(x, y)`.
pub fn ackley_value(source: AckleySource, x: f64, y: f64) -> f64 {
    let p = AckleyParams::default();
    let radial = -p.a * (-p.b * ((x * x + y * y) / 2.0).sqrt()).exp();
    let cosine = (0.5 * ((p.c * x).cos() + (p.c * y).cos())).exp();
    let offset = p.a + std::f64::consts::E;
    match source {
        AckleySource::Ground => radial - cosine + offset,
        AckleySource::Perturbed1 => radial + 10.0,
        AckleySource::Perturbed2 => cosine + 5.0,
        AckleySource::Perturbed3 => 0.25 * radial - 0.75 * cosine + offset,
    }
}

/// How training inputs are placed over the input interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainDesign {
    /// Evenly spaced grid per source (a single point sits at the center).
    Grid,
    /// Seeded uniform draws per source.
    Uniform,
}

/// Per-source sample counts for the parabola generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolaCounts {
    pub ground_train: usize,
    pub perturbed_train: usize,
    pub test_per_source: usize,
    pub design: TrainDesign,
}

impl Default for ParabolaCounts {
    fn default() -> Self {
        ParabolaCounts {
            ground_train: 3,
            perturbed_train: 10,
            test_per_source: 30,
            design: TrainDesign::Grid,
        }
    }
}

/// Per-source sample counts for the Ackley generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AckleyCounts {
    pub ground_train: usize,
    pub perturbed_train: usize,
    pub test_per_source: usize,
}

impl Default for AckleyCounts {
    fn default() -> Self {
        AckleyCounts {
            ground_train: 20,
            perturbed_train: 50,
            test_per_source: 100,
        }
    }
}

pub fn parabola_schema() -> VariableSchema {
    VariableSchema::new(vec!["x".into()], vec![], Some("source"), "y").unwrap()
}

pub fn ackley_schema() -> VariableSchema {
    VariableSchema::new(vec!["x".into(), "y".into()], vec![], Some("source"), "z").unwrap()
}

const PARABOLA_RANGE: (f64, f64) = (-10.0, 10.0);
const ACKLEY_RANGE: (f64, f64) = (-5.0, 5.0);

fn grid(count: usize, range: (f64, f64)) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (range.0 + range.1)],
        _ => (0..count)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Generate parabola training and testing datasets.
///
/// Training inputs follow `counts.design` per source; testing inputs are
/// seeded uniform draws, `counts.test_per_source` per source. Rows are
/// grouped by source in registry order. Pure in `(seed, counts)`.
pub fn generate_parabola(
    seed: u64,
    counts: &ParabolaCounts,
) -> (MultiSourceDataset, MultiSourceDataset) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut train_x = Vec::new();
    let mut train_src = Vec::new();
    let mut train_y = Vec::new();
    let mut test_x = Vec::new();
    let mut test_src = Vec::new();
    let mut test_y = Vec::new();

    for source in ParabolaSource::ALL {
        let n_train = match source {
            ParabolaSource::Ground => counts.ground_train,
            _ => counts.perturbed_train,
        };
        let xs = match counts.design {
            TrainDesign::Grid => grid(n_train, PARABOLA_RANGE),
            TrainDesign::Uniform => (0..n_train)
                .map(|_| rng.random_range(PARABOLA_RANGE.0..PARABOLA_RANGE.1))
                .collect(),
        };
        for x in xs {
            train_x.push(x);
            train_src.push(source.label().to_string());
            train_y.push(parabola_value(source, x));
        }
    }
    for source in ParabolaSource::ALL {
        for _ in 0..counts.test_per_source {
            let x = rng.random_range(PARABOLA_RANGE.0..PARABOLA_RANGE.1);
            test_x.push(x);
            test_src.push(source.label().to_string());
            test_y.push(parabola_value(source, x));
        }
    }

    let train = MultiSourceDataset::from_columns(
        parabola_schema(),
        vec![train_x],
        vec![],
        Some(train_src),
        train_y,
    )
    .expect("generator produces a valid dataset");
    let test = MultiSourceDataset::from_columns(
        parabola_schema(),
        vec![test_x],
        vec![],
        Some(test_src),
        test_y,
    )
    .expect("generator produces a valid dataset");
    (train, test)
}

/// Generate Ackley training and testing datasets: seeded uniform draws in
/// the square input domain for both splits. Pure in `(seed, counts)`.
pub fn generate_ackley(
    seed: u64,
    counts: &AckleyCounts,
) -> (MultiSourceDataset, MultiSourceDataset) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut draw_block = |source: AckleySource, n: usize| {
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut src = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for _ in 0..n {
            let x = rng.random_range(ACKLEY_RANGE.0..ACKLEY_RANGE.1);
            let y = rng.random_range(ACKLEY_RANGE.0..ACKLEY_RANGE.1);
            xs.push(x);
            ys.push(y);
            src.push(source.label().to_string());
            z.push(ackley_value(source, x, y));
        }
        (xs, ys, src, z)
    };

    let mut train = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for source in AckleySource::ALL {
        let n = match source {
            AckleySource::Ground => counts.ground_train,
            _ => counts.perturbed_train,
        };
        let (xs, ys, src, z) = draw_block(source, n);
        train.0.extend(xs);
        train.1.extend(ys);
        train.2.extend(src);
        train.3.extend(z);
    }
    let mut test = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for source in AckleySource::ALL {
        let (xs, ys, src, z) = draw_block(source, counts.test_per_source);
        test.0.extend(xs);
        test.1.extend(ys);
        test.2.extend(src);
        test.3.extend(z);
    }

    let build = |(xs, ys, src, z): (Vec<f64>, Vec<f64>, Vec<String>, Vec<f64>)| {
        MultiSourceDataset::from_columns(ackley_schema(), vec![xs, ys], vec![], Some(src), z)
            .expect("generator produces a valid dataset")
    };
    (build(train), build(test))
}
