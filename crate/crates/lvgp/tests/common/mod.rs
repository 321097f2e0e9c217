//! Shared brute-force oracles for integration tests. Everything here is
//! explicit-loop arithmetic with a hand-rolled matrix inverse, so it
//! stays independent of the library's Cholesky-based implementation path.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use lvgp::dataset::{MultiSourceDataset, Standardizer};
use lvgp::evaluation::Model;

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut work: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut extended = row.clone();
            extended.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            extended
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| work[i][col].abs().partial_cmp(&work[j][col].abs()).unwrap())
            .unwrap();
        work.swap(col, pivot);
        let diag = work[col][col];
        assert!(diag.abs() > 1e-300, "oracle matrix is singular");
        for v in work[col].iter_mut() {
            *v /= diag;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = work[row][col];
            if factor == 0.0 {
                continue;
            }
            let (pivot_row, target_row) = if row < col {
                let (head, tail) = work.split_at_mut(col);
                (&tail[0], &mut head[row])
            } else {
                let (head, tail) = work.split_at_mut(row);
                (&head[col], &mut tail[0])
            };
            for k in 0..2 * n {
                target_row[k] -= factor * pivot_row[k];
            }
        }
    }
    work.iter().map(|row| row[n..].to_vec()).collect()
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn corr(w: &[f64], w2: &[f64], weights: &[f64]) -> f64 {
    let mut s = 0.0;
    for ((a, b), p) in w.iter().zip(w2).zip(weights) {
        let d = a - b;
        s += p * d * d;
    }
    (-s).exp()
}

/// Full-inverse GP prediction in standardized units over generic feature
/// rows: correlation `exp(-sum weights_k (w_k - w'_k)^2)` plus a diagonal
/// nugget, profiled mean and variance, then the predictive equations.
pub fn oracle_predict(
    w_train: &[Vec<f64>],
    weights: &[f64],
    y_std: &[f64],
    nugget: f64,
    w_star: &[f64],
) -> (f64, f64) {
    let n = w_train.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            c[i][j] = corr(&w_train[i], &w_train[j], weights) + if i == j { nugget } else { 0.0 };
        }
    }
    let c_inv = invert(&c);
    let ones = vec![1.0; n];
    let ci_y = mat_vec(&c_inv, y_std);
    let ci_1 = mat_vec(&c_inv, &ones);
    let mu = dot(&ones, &ci_y) / dot(&ones, &ci_1);
    let r: Vec<f64> = y_std.iter().map(|y| y - mu).collect();
    let ci_r = mat_vec(&c_inv, &r);
    let sigma2 = dot(&r, &ci_r) / n as f64;

    let c_star: Vec<f64> = w_train.iter().map(|w| corr(w_star, w, weights)).collect();
    let ci_c = mat_vec(&c_inv, &c_star);
    let mean = mu + dot(&c_star, &ci_r);
    let variance = sigma2 * (1.0 - dot(&c_star, &ci_c));
    (mean, variance)
}

fn scale_row(standardizer: &Standardizer, raw: &[f64]) -> Vec<f64> {
    raw.iter()
        .enumerate()
        .map(|(col, v)| {
            let (min, max) = standardizer.numeric[col];
            (v - min) / (max - min)
        })
        .collect()
}

/// Oracle feature rows, kernel weights and standardized responses for a
/// fitted model over its own training data.
pub fn oracle_inputs(model: &Model, train: &MultiSourceDataset) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let (standardizer, phi, latents) = match model {
        Model::Gp(m) => (m.standardizer(), m.phi(), None),
        Model::Lvgp(m) => (m.standardizer(), m.phi(), Some(m.latents())),
    };
    let mut weights = phi.values().to_vec();
    let rows: Vec<Vec<f64>> = (0..train.n())
        .map(|r| {
            let mut w = scale_row(standardizer, &train.numeric_row(r));
            if let Some(latents) = latents {
                w.extend(latents.substitute(&train.categorical_row(r)));
            }
            w
        })
        .collect();
    if let Some(latents) = latents {
        weights.extend(std::iter::repeat_n(1.0, 2 * latents.vars().len()));
    }
    let y_std: Vec<f64> = train
        .response()
        .iter()
        .map(|y| (y - standardizer.response_mean) / standardizer.response_std)
        .collect();
    (rows, weights, y_std)
}

/// Map one raw query to an oracle feature row for this model.
pub fn oracle_query(model: &Model, numeric: &[f64], levels: &[String]) -> Vec<f64> {
    match model {
        Model::Gp(m) => scale_row(m.standardizer(), numeric),
        Model::Lvgp(m) => {
            let mut w = scale_row(m.standardizer(), numeric);
            for (var, label) in m.latents().vars().iter().zip(levels) {
                let idx = var.levels.iter().position(|l| l == label).unwrap();
                w.push(var.coords[idx][0]);
                w.push(var.coords[idx][1]);
            }
            w
        }
    }
}

/// Original-units conversion for oracle outputs.
pub fn to_original(standardizer: &Standardizer, mean_std: f64, var_std: f64) -> (f64, f64) {
    let s = standardizer.response_std;
    (
        mean_std * s + standardizer.response_mean,
        var_std.max(0.0) * s * s,
    )
}
