//! Three-mode `(S, W1, W2)` maximization for the permutation-invariant constraint.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channels::{complementary_output_matrix, output_photon_number, ChannelModel, EncodingSpec};
use crate::error::{Error, Result};
use crate::gaussian::{is_physical, nu_entropy, symplectic_eigenvalues, thermal_entropy, CovarianceMatrix, MomentBuilder, SourceSpec};
use crate::optimize::{best_k, gradient_norm, grid_values, linspace, nelder_mead};

/// `c1 = κ_S N_S cos²τ_r`, `a1 = sqrt(K_f) C_S cos τ1`,
/// `b1 = sqrt(K_f) C_S sin τ1 cos τ2`, `a2 = sqrt(K_f) C_S sin τ1 sin τ2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Parameters {
    pub tau_r: f64,
    pub tau_1: f64,
    pub tau_2: f64,
    pub theta: f64,
    /// `<a_S²>`
    pub c1: f64,
    /// `<a_S a_W1>`
    pub a1: f64,
    /// `|<a_S† a_W1>|`, with phase `theta`
    pub b1: f64,
    /// `<a_S a_W2>`
    pub a2: f64,
}

impl Theorem2Parameters {
    pub fn new(src: &SourceSpec, kappa_s: f64, k_f: f64, tau_r: f64, tau_1: f64, tau_2: f64, theta: f64) -> Result<Self> {
        if !(k_f >= 0.0) || !(kappa_s >= 0.0) {
            return Err(Error::domain(format!("need kappa_S, K_f >= 0, got {kappa_s}, {k_f}")));
        }
        let amp = k_f.sqrt() * src.c_s();
        let b1 = amp * tau_1.sin() * tau_2.cos();
        Ok(Self {
            tau_r,
            tau_1,
            tau_2,
            theta: if b1 < 0.0 { (theta + PI).rem_euclid(2.0 * PI) } else { theta.rem_euclid(2.0 * PI) },
            c1: kappa_s * src.n_s() * tau_r.cos().powi(2),
            a1: amp * tau_1.cos(),
            b1: b1.abs(),
            a2: amp * tau_1.sin() * tau_2.sin(),
        })
    }
}

/// Covariance of `(S, W1, W2)` with independent thermal `W` modes.
pub fn theorem2_covariance(src: &SourceSpec, kappa_s: f64, p: &Theorem2Parameters) -> CovarianceMatrix {
    let zero = Complex64::new(0.0, 0.0);
    MomentBuilder::new(3)
        .mode(0, kappa_s * src.n_s(), Complex64::new(p.c1, 0.0))
        .mode(1, src.n_s(), zero)
        .mode(2, src.n_s(), zero)
        .cross(0, 1, Complex64::new(p.a1, 0.0), Complex64::from_polar(p.b1, p.theta))
        .cross(0, 2, Complex64::new(p.a2, 0.0), zero)
        .build()
}

fn gain6(src: &SourceSpec, kappa_s: f64, channel: &ChannelModel, p: &Theorem2Parameters) -> f64 {
    let cov = theorem2_covariance(src, kappa_s, p);
    if !is_physical(&cov).physical {
        return f64::INFINITY;
    }
    let Ok(mu) = symplectic_eigenvalues(&cov) else { return f64::INFINITY };
    let out: DMatrix<f64> = complementary_output_matrix(cov.matrix(), channel);
    let Ok(out) = CovarianceMatrix::new(out) else { return f64::INFINITY };
    let Ok(nu) = symplectic_eigenvalues(&out) else { return f64::INFINITY };
    let e: f64 = nu.iter().map(|&v| nu_entropy(v)).sum::<f64>() - mu.iter().map(|&v| nu_entropy(v)).sum::<f64>();
    if e.is_finite() {
        e
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Options {
    /// Grid points for each of `τ_r`, `τ1`, `τ2`.
    pub tau_grid: usize,
    /// Grid points for `θ` over `[0, 2π)`.
    pub theta_grid: usize,
    pub starts: usize,
    pub tolerance: f64,
    pub max_iters: u64,
}

impl Default for Theorem2Options {
    fn default() -> Self {
        Self { tau_grid: 9, theta_grid: 64, starts: 4, tolerance: 1e-15, max_iters: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiEPrime {
    pub chi: f64,
    pub n_b: f64,
    /// Minimum three-mode entropy gain.
    pub e_star: f64,
    pub argmax: Theorem2Parameters,
    pub iterations: u64,
    pub gradient_norm: f64,
}

pub fn chi_e_prime(src: &SourceSpec, enc: &EncodingSpec, kappa_s: f64, k_f: f64, channel: &ChannelModel) -> Result<ChiEPrime> {
    chi_e_prime_with(src, enc, kappa_s, k_f, channel, &Theorem2Options::default())
}

/// `χ'_E = g(N_B) - min E` over the four angles.
pub fn chi_e_prime_with(
    src: &SourceSpec,
    enc: &EncodingSpec,
    kappa_s: f64,
    k_f: f64,
    channel: &ChannelModel,
    opts: &Theorem2Options,
) -> Result<ChiEPrime> {
    channel.require_quantum_limited()?;
    if opts.tau_grid < 2 || opts.theta_grid < 1 || opts.starts == 0 {
        return Err(Error::argument("theorem-2 grid needs >= 2 tau points, >= 1 theta point and one start"));
    }
    let params = |x: &[f64]| Theorem2Parameters::new(src, kappa_s, k_f, x[0], x[1], x[2], x[3]);
    let f = |x: &[f64]| match params(x) {
        Ok(p) => gain6(src, kappa_s, channel, &p),
        Err(_) => f64::INFINITY,
    };
    let dtheta = 2.0 * PI / opts.theta_grid as f64;
    let axes = vec![
        linspace(0.0, FRAC_PI_2, opts.tau_grid),
        linspace(0.0, FRAC_PI_2, opts.tau_grid),
        linspace(0.0, PI, opts.tau_grid),
        (0..opts.theta_grid).map(|k| k as f64 * dtheta).collect(),
    ];
    let values = grid_values(&f, &axes);
    let starts = best_k(&values, opts.starts);
    if !values[starts[0]].0.is_finite() {
        return Err(Error::domain(format!(
            "no physical three-mode state reaches kappa_S = {kappa_s}, K_f = {k_f}"
        )));
    }
    let h = FRAC_PI_2 / (opts.tau_grid - 1) as f64;
    let step = [h, h, 2.0 * h, dtheta];
    let (mut best_x, mut best_f) = (values[starts[0]].1.clone(), values[starts[0]].0);
    let mut iterations = 0;
    for &i in &starts {
        let local = nelder_mead(&f, &values[i].1, &step, opts.tolerance, opts.max_iters)?;
        iterations += local.iterations;
        if local.f < best_f {
            best_f = local.f;
            best_x = local.x;
        }
    }
    let n_b = output_photon_number(kappa_s * src.n_s(), channel, enc)?;
    Ok(ChiEPrime {
        chi: thermal_entropy(n_b) - best_f,
        n_b,
        e_star: best_f,
        argmax: params(&best_x)?,
        iterations,
        gradient_norm: gradient_norm(&f, &best_x, 1e-6),
    })
}
