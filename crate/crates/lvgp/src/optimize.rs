//! Bounded quasi-Newton minimization with numerical gradients.
//!
//! The likelihood surfaces fitted in this crate are smooth but have no
//! cheap analytic gradient, so the search uses BFGS with central
//! finite-difference gradients and projection onto box bounds. Multi-start
//! restarts draw their initial points from independent streams of one
//! seeded counter-based generator (ChaCha12), which makes fits
//! reproducible bit-for-bit regardless of how many worker threads run.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// Objective values at or above this level mark an infeasible evaluation
/// (failed factorization, degenerate variance). Line searches treat such
/// points as unacceptable and retreat.
pub const PENALTY: f64 = 1e10;

/// Box constraints, one closed interval per coordinate.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(lower.iter().zip(&upper).all(|(l, u)| l <= u));
        Bounds { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimOptions {
    pub max_iters: usize,
    /// Stop when the relative objective change per accepted step falls
    /// below this.
    pub rel_tol: f64,
    /// Central-difference step for the internal gradient.
    pub fd_step: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            max_iters: 200,
            rel_tol: 1e-8,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub initial_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
///
/// The objective must be evaluable slightly outside the feasible box;
/// every objective in this crate is defined on all of R^d.
pub fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let fp = f(&probe);
        probe[i] = xi - h;
        let fm = f(&probe);
        probe[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Minimize `f` over the box `bounds` starting from `x0`.
///
/// BFGS on the inverse Hessian with a backtracking Armijo line search;
/// trial points are projected onto the box, so iterates stay feasible
/// while the finite-difference probes may step just outside it.
pub fn minimize_bounded<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &OptimOptions,
) -> OptimResult {
    let dim = x0.len();
    assert_eq!(dim, bounds.dim());
    let mut x = x0.to_vec();
    bounds.clamp(&mut x);
    let mut fx = f(&x);
    let initial_value = fx;

    if !fx.is_finite() || fx >= PENALTY {
        // Dead start: the surrounding plateau carries no gradient signal.
        return OptimResult {
            x,
            value: fx,
            initial_value,
            iterations: 0,
            converged: false,
        };
    }

    let mut inv_hessian = DMatrix::<f64>::identity(dim, dim);
    let mut grad = DVector::from_vec(central_gradient(f, &x, opts.fd_step));
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..opts.max_iters {
        iterations += 1;
        let mut direction = -(&inv_hessian * &grad);
        if direction.dot(&grad) >= 0.0 {
            // Curvature information went stale; fall back to steepest descent.
            inv_hessian = DMatrix::identity(dim, dim);
            direction = -grad.clone();
        }

        // Backtracking line search with projection onto the box.
        let c1 = 1e-4;
        let mut step = 1.0;
        let mut accepted: Option<(Vec<f64>, f64)> = None;
        for _ in 0..40 {
            let mut trial: Vec<f64> = (0..dim).map(|i| x[i] + step * direction[i]).collect();
            bounds.clamp(&mut trial);
            let actual_step: Vec<f64> = (0..dim).map(|i| trial[i] - x[i]).collect();
            if actual_step.iter().all(|s| *s == 0.0) {
                break;
            }
            let ft = f(&trial);
            let directional: f64 = actual_step
                .iter()
                .zip(grad.iter())
                .map(|(s, g)| s * g)
                .sum();
            if ft.is_finite() && ft < PENALTY && ft <= fx + c1 * directional {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }

        let Some((x_new, f_new)) = accepted else {
            converged = true;
            break;
        };

        let s = DVector::from_iterator(dim, x_new.iter().zip(&x).map(|(a, b)| a - b));
        let grad_new = DVector::from_vec(central_gradient(f, &x_new, opts.fd_step));
        let yv = &grad_new - &grad;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            // Standard BFGS inverse update.
            let rho = 1.0 / sy;
            let identity = DMatrix::<f64>::identity(dim, dim);
            let left = &identity - rho * (&s * yv.transpose());
            let right = &identity - rho * (&yv * s.transpose());
            inv_hessian = &left * inv_hessian * &right + rho * (&s * s.transpose());
        }

        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        grad = grad_new;

        if improvement <= opts.rel_tol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    OptimResult {
        x,
        value: fx,
        initial_value,
        iterations,
        converged,
    }
}

/// One multi-start restart: where it began and where it ended.
#[derive(Debug, Clone)]
pub struct RestartRecord {
    pub restart: usize,
    pub result: OptimResult,
}

/// Run `restarts` independent bounded minimizations and return all records.
///
/// Restart `r` draws its initial point from stream `r` of a ChaCha12
/// generator seeded with `seed`, then minimizes; records come back ordered
/// by restart index, so the outcome does not depend on thread scheduling.
pub fn multi_start<F, I>(
    f: &F,
    draw_initial: &I,
    restarts: usize,
    seed: u64,
    bounds: &Bounds,
    opts: &OptimOptions,
) -> Vec<RestartRecord>
where
    F: Fn(&[f64]) -> f64 + Sync,
    I: Fn(&mut ChaCha12Rng) -> Vec<f64> + Sync,
{
    let run = |restart: usize| {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let x0 = draw_initial(&mut rng);
        let result = minimize_bounded(f, &x0, bounds, opts);
        RestartRecord { restart, result }
    };
    fit_pool().install(|| (0..restarts).into_par_iter().map(run).collect())
}

/// Pick the best restart: lowest final value, ties broken by index.
pub fn best_restart(records: &[RestartRecord]) -> &RestartRecord {
    records
        .iter()
        .min_by(|a, b| {
            a.result
                .value
                .partial_cmp(&b.result.value)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.restart.cmp(&b.restart))
        })
        .expect("at least one restart")
}

/// Worker pool for fit parallelism, sized by the LVGP_THREADS environment
/// variable when set.
pub(crate) fn fit_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("LVGP_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|n| *n > 0)
        {
            builder = builder.num_threads(n);
        }
        builder.build().expect("failed to build fit thread pool")
    })
}
