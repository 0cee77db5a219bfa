//! Grid seeding plus Nelder-Mead refinement on unconstrained coordinates.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;

use crate::error::{Error, Result};

struct Objective<'a, F: Fn(&[f64]) -> f64> {
    f: &'a F,
}

impl<F: Fn(&[f64]) -> f64> CostFunction for Objective<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let v = (self.f)(p);
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LocalMin {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: u64,
}

/// Nelder-Mead from `x0` with an axis-aligned initial simplex of edge `step`.
/// Stops when the standard deviation of the simplex values drops below `f_tol`.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: &[f64],
    f_tol: f64,
    max_iters: u64,
) -> Result<LocalMin> {
    let mut simplex = vec![x0.to_vec()];
    for (i, &h) in step.iter().enumerate() {
        let mut v = x0.to_vec();
        v[i] += h;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(f_tol)
        .map_err(|e| Error::numerical(format!("simplex setup failed: {e}")))?;
    let res = Executor::new(Objective { f }, solver)
        .configure(|s| s.max_iters(max_iters))
        .run()
        .map_err(|e| Error::numerical(format!("simplex refinement failed: {e}")))?;
    let state = res.state();
    let x = state
        .get_best_param()
        .cloned()
        .ok_or_else(|| Error::numerical("simplex refinement produced no iterate"))?;
    Ok(LocalMin { f: state.get_best_cost(), x, iterations: state.get_iter() })
}

/// Row-major evaluation of `f` on the Cartesian product of `axes`.
pub(crate) fn grid_values<F: Fn(&[f64]) -> f64>(f: &F, axes: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    let mut x: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    for _ in 0..total {
        for (k, a) in axes.iter().enumerate() {
            x[k] = a[idx[k]];
        }
        let v = f(&x);
        out.push((if v.is_nan() { f64::INFINITY } else { v }, x.clone()));
        for k in (0..axes.len()).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// `n` evenly spaced points covering `[a, b]`.
pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Indices of the `k` smallest values, ascending, ties broken by index.
pub(crate) fn best_k(values: &[(f64, Vec<f64>)], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].0.total_cmp(&values[b].0).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Central-difference gradient norm.
pub(crate) fn gradient_norm<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> f64 {
    let mut y = x.to_vec();
    let mut sq = 0.0;
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let up = f(&y);
        y[i] = x[i] - h;
        let down = f(&y);
        y[i] = x[i];
        let d = (up - down) / (2.0 * h);
        if d.is_finite() {
            sq += d * d;
        }
    }
    sq.sqrt()
}
