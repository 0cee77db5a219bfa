//! Entropy-gain minimization and the resulting bounds on Eve's Holevo information.

mod scan;
mod theorem2;

pub use scan::{convexity_scan, first_order_check, monotonicity_scan, ConvexityReport, ConvexityViolation, FirstOrderReport, ScanGrid};
pub use theorem2::{chi_e_prime, chi_e_prime_with, theorem2_covariance, ChiEPrime, Theorem2Options, Theorem2Parameters};

use std::f64::consts::{FRAC_PI_2, PI};

use crate::attacks::{attack_matrix4, feasible_zeta, gamma_window, AttackParameters};
use crate::channels::{complementary_output4, complementary_output_cov, output_photon_number, ChannelModel, EncodingSpec};
use crate::error::{Error, Result};
use crate::gaussian::{entropy_from_eigenvalues, nu_entropy, symplectic_eigenvalues, thermal_entropy, two_mode_nu_robust, CovarianceMatrix, SourceSpec};
use crate::optimize::{best_k, gradient_norm, grid_values, linspace, nelder_mead};

/// Symplectic spectra behind one entropy-gain evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyGainBreakdown {
    /// Symplectic eigenvalues of `Λ_N'W`.
    pub nu: Vec<f64>,
    /// Symplectic eigenvalues of `Λ_SW`.
    pub mu: Vec<f64>,
    /// `S(N'W) - S(SW)` in bits.
    pub e: f64,
}

/// `S(ρ_N'W) - S(ρ_SW)` for `S` as mode 0 and one or more `W` modes.
pub fn entropy_gain(lambda_sw: &CovarianceMatrix, channel: &ChannelModel) -> Result<EntropyGainBreakdown> {
    channel.require_quantum_limited()?;
    let out = complementary_output_cov(lambda_sw, channel)?;
    let nu = symplectic_eigenvalues(&out)?;
    let mu = symplectic_eigenvalues(lambda_sw)?;
    let e = entropy_from_eigenvalues(&nu)? - entropy_from_eigenvalues(&mu)?;
    Ok(EntropyGainBreakdown { nu, mu, e })
}

/// Grid and refinement settings for the three-angle search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Points per axis of the seeding grid.
    pub grid: usize,
    /// Number of grid points refined by the simplex method.
    pub starts: usize,
    /// Simplex stopping threshold on the spread of vertex values, in bits.
    pub tolerance: f64,
    pub max_iters: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { grid: 33, starts: 4, tolerance: 1e-15, max_iters: 2000 }
    }
}

/// How a minimum was found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub grid: usize,
    pub iterations: u64,
    /// Central-difference gradient norm at the argmin, in search coordinates.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizationResult {
    pub e_star: f64,
    pub argmin: AttackParameters,
    pub certificate: Certificate,
}

/// Fast entropy gain for a two-mode attack state.
#[inline]
pub(crate) fn gain4(src: &SourceSpec, channel: &ChannelModel, kappa_s: f64, kappa_f: f64, cos_g: f64, cos_d: f64, xi: f64) -> f64 {
    let m = attack_matrix4(src, kappa_s, kappa_f, cos_g, cos_d, xi);
    let (mp, mm) = two_mode_nu_robust(&m);
    let n = complementary_output4(&m, channel);
    let (np, nm) = two_mode_nu_robust(&n);
    let e = nu_entropy(np) + nu_entropy(nm) - nu_entropy(mp) - nu_entropy(mm);
    if e.is_finite() {
        e
    } else {
        f64::INFINITY
    }
}

/// Entropy gain at explicit attack parameters.
pub fn gain_at(src: &SourceSpec, params: &AttackParameters, channel: &ChannelModel) -> Result<f64> {
    channel.require_quantum_limited()?;
    Ok(gain4(
        src,
        channel,
        params.kappa_s(),
        params.kappa_f(),
        params.cos_gamma(src),
        params.delta().cos(),
        params.xi(),
    ))
}

/// Search coordinates `(t, d, ξ)`: `cos γ = sgn(cos t) sqrt(lo + (hi - lo) cos² t)`, `cos δ = cos d`.
struct Search<'a> {
    src: &'a SourceSpec,
    channel: &'a ChannelModel,
    kappa_s: f64,
    kappa_f: f64,
    lo: f64,
    hi: f64,
}

impl Search<'_> {
    #[inline]
    fn cos_gamma(&self, t: f64) -> f64 {
        let ct = t.cos();
        (self.lo + (self.hi - self.lo) * ct * ct).max(0.0).sqrt().copysign(ct)
    }

    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        gain4(self.src, self.channel, self.kappa_s, self.kappa_f, self.cos_gamma(x[0]), x[1].cos(), x[2])
    }
}

fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        PI
    } else {
        y
    }
}

/// `E*(κ_S, κ_f)` with default search settings.
pub fn min_entropy_gain(src: &SourceSpec, kappa_s: f64, kappa_f: f64, channel: &ChannelModel) -> Result<MinimizationResult> {
    min_entropy_gain_with(src, kappa_s, kappa_f, channel, &SearchOptions::default())
}

/// Global minimum of the entropy gain over `(ζ, δ, ξ)`: grid seeding, then simplex refinement.
pub fn min_entropy_gain_with(
    src: &SourceSpec,
    kappa_s: f64,
    kappa_f: f64,
    channel: &ChannelModel,
    opts: &SearchOptions,
) -> Result<MinimizationResult> {
    channel.require_quantum_limited()?;
    if opts.grid < 2 || opts.starts == 0 {
        return Err(Error::argument("search grid needs at least 2 points per axis and one start"));
    }
    feasible_zeta(src, kappa_s, kappa_f)?;
    let w = gamma_window(src, kappa_s, kappa_f);
    let search = Search { src, channel, kappa_s, kappa_f, lo: w.lo, hi: w.hi.max(w.lo) };
    let f = |x: &[f64]| search.eval(x);

    // E is even in ξ, so half the circle suffices for seeding
    let axes = vec![
        linspace(0.0, FRAC_PI_2, opts.grid),
        linspace(0.0, FRAC_PI_2, opts.grid),
        linspace(0.0, PI, opts.grid),
    ];
    let values = grid_values(&f, &axes);
    let starts = best_k(&values, opts.starts);
    let step = [
        FRAC_PI_2 / (opts.grid - 1) as f64,
        FRAC_PI_2 / (opts.grid - 1) as f64,
        PI / (opts.grid - 1) as f64,
    ];
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
    if !best_f.is_finite() {
        return Err(Error::numerical(format!(
            "entropy gain is not finite anywhere on the search grid (kappa_S = {kappa_s}, kappa_f = {kappa_f})"
        )));
    }
    let gradient = gradient_norm(&f, &best_x, 1e-6);
    let mut argmin = canonical(&search, &best_x);
    // ties go to the beam splitter: on the red line δ has no effect at ζ = π/2
    if (argmin.zeta(), argmin.delta()) != (FRAC_PI_2, FRAC_PI_2) {
        let bs = AttackParameters::trusted(kappa_s, kappa_f, FRAC_PI_2, FRAC_PI_2, argmin.xi());
        let e = gain_at(src, &bs, channel)?;
        if e <= best_f + 1e-12 {
            argmin = bs;
            best_f = best_f.min(e);
        }
    }
    Ok(MinimizationResult {
        e_star: best_f,
        argmin,
        certificate: Certificate { grid: opts.grid, iterations, gradient_norm: gradient },
    })
}

fn canonical(search: &Search, x: &[f64]) -> AttackParameters {
    let w = gamma_window(search.src, search.kappa_s, search.kappa_f);
    let c = search.cos_gamma(x[0]);
    let cd = x[1].cos();
    let zeta = if w.r > 0.0 && search.kappa_f > 0.0 { (c.abs() / w.r.sqrt()).min(1.0).acos() } else { FRAC_PI_2 };
    let n = search.src.n_s();
    let (ks, kf) = (search.kappa_s, search.kappa_f);
    let c2 = c * c;
    let uu = (ks - kf) * n + 1.0 - kf + kf * c2;
    let vv = (ks - kf) * n - kf * c2;
    if uu * vv <= 0.0 {
        return AttackParameters::trusted(ks, kf, zeta, FRAC_PI_2, 0.0);
    }
    let mut xi = x[2];
    if c < 0.0 {
        xi += PI;
    }
    if cd < 0.0 {
        xi += PI;
    }
    AttackParameters::trusted(ks, kf, zeta, cd.abs().min(1.0).acos(), wrap_angle(xi))
}

/// `χ_E` together with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiE {
    pub chi: f64,
    /// Mean photon number of the return mode.
    pub n_b: f64,
    pub minimization: MinimizationResult,
}

/// `χ_E = g(N_B) - E*` in bits per mode. Not clamped at zero.
pub fn chi_e(src: &SourceSpec, enc: &EncodingSpec, kappa_s: f64, kappa_f: f64, channel: &ChannelModel) -> Result<f64> {
    Ok(chi_e_with(src, enc, kappa_s, kappa_f, channel, &SearchOptions::default())?.chi)
}

pub fn chi_e_with(
    src: &SourceSpec,
    enc: &EncodingSpec,
    kappa_s: f64,
    kappa_f: f64,
    channel: &ChannelModel,
    opts: &SearchOptions,
) -> Result<ChiE> {
    let minimization = min_entropy_gain_with(src, kappa_s, kappa_f, channel, opts)?;
    let n_b = output_photon_number(kappa_s * src.n_s(), channel, enc)?;
    Ok(ChiE { chi: thermal_entropy(n_b) - minimization.e_star, n_b, minimization })
}

#[cfg(test)]
mod tests;
