//! Eve's Gaussian attack on the signal mode, in the reduced `(ζ, δ, ξ)` form.
//!
//! The attacked signal is `a_S = u0 a_Y + v0* a_Y† + Σ (u_k e_k + v_k* e_k†)`
//! with vacuum ancillas `e_k`. Fixing the photon number `κ_S N_S` and the
//! correlation strength `κ_f C_S²` leaves three free angles.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::channels::{complementary_output_cov, ChannelKind, ChannelModel};
use crate::error::{Error, Result};
use crate::gaussian::{symplectic_eigenvalues, CovarianceMatrix, SourceSpec};

const FEASIBILITY_SLACK: f64 = 1e-12;

/// `[0, min(κ_S, (1 + 2κ_S N_S)/(1 + 2N_S))]`, the correlation strengths any state can reach.
pub fn kappa_f_range(kappa_s: f64, src: &SourceSpec) -> (f64, f64) {
    let n = src.n_s();
    (0.0, kappa_s.min((1.0 + 2.0 * kappa_s * n) / (1.0 + 2.0 * n)))
}

/// `(1 + κ_S N_S)/(1 + N_S)`: largest `κ_f` for which the beam-splitter attack exists.
pub fn red_line(kappa_s: f64, src: &SourceSpec) -> f64 {
    (1.0 + kappa_s * src.n_s()) / (1.0 + src.n_s())
}

fn check_pair(kappa_s: f64, kappa_f: f64, src: &SourceSpec) -> Result<()> {
    if !(kappa_s >= 0.0) || !kappa_s.is_finite() {
        return Err(Error::domain(format!("kappa_S must be finite and >= 0, got {kappa_s}")));
    }
    let (_, hi) = kappa_f_range(kappa_s, src);
    if !(kappa_f >= 0.0) || kappa_f > hi + FEASIBILITY_SLACK {
        return Err(Error::domain(format!(
            "kappa_f = {kappa_f} outside [0, {hi}] for kappa_S = {kappa_s}"
        )));
    }
    Ok(())
}

/// `cos²γ = r cos²ζ` must lie in `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GammaWindow {
    pub r: f64,
    pub lo: f64,
    pub hi: f64,
}

pub(crate) fn gamma_window(src: &SourceSpec, kappa_s: f64, kappa_f: f64) -> GammaWindow {
    if kappa_f <= 0.0 {
        return GammaWindow { r: 0.0, lo: 0.0, hi: 0.0 };
    }
    let n = src.n_s();
    let r = ((kappa_s - kappa_f) * n / kappa_f).max(0.0);
    let lo = 1.0 - 1.0 / kappa_f - (kappa_s / kappa_f - 1.0) * n;
    // on the red line lo vanishes; round-off must not shut out cos²γ = 0
    let lo = if lo <= 1e-12 { 0.0 } else { lo };
    GammaWindow { r, lo, hi: r.min(1.0) }
}

/// Feasible `ζ` interval for the intrusion pair; domain error when empty.
pub fn feasible_zeta(src: &SourceSpec, kappa_s: f64, kappa_f: f64) -> Result<(f64, f64)> {
    check_pair(kappa_s, kappa_f, src)?;
    let w = gamma_window(src, kappa_s, kappa_f);
    if w.lo > w.hi + FEASIBILITY_SLACK {
        return Err(Error::domain(format!(
            "no attack reaches kappa_S = {kappa_s}, kappa_f = {kappa_f}"
        )));
    }
    if w.r <= 0.0 {
        return Ok((FRAC_PI_2, FRAC_PI_2));
    }
    let zeta_of = |c2: f64| (c2 / w.r).clamp(0.0, 1.0).sqrt().acos();
    Ok((zeta_of(w.hi), zeta_of(w.lo.min(w.hi))))
}

/// Reduced attack parameters. `ξ` is the sum of the `v0` and `v†u` phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackParameters {
    kappa_s: f64,
    kappa_f: f64,
    zeta: f64,
    delta: f64,
    xi: f64,
}

/// Bogoliubov data implied by [`AttackParameters`], with `θ_v = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bogoliubov {
    pub u0: f64,
    pub v0: f64,
    pub u_norm_sq: f64,
    pub v_norm_sq: f64,
    pub v_dag_u: Complex64,
}

impl AttackParameters {
    pub fn new(src: &SourceSpec, kappa_s: f64, kappa_f: f64, zeta: f64, delta: f64, xi: f64) -> Result<Self> {
        let (zlo, zhi) = feasible_zeta(src, kappa_s, kappa_f)?;
        if !(0.0..=FRAC_PI_2).contains(&delta) {
            return Err(Error::domain(format!("delta must lie in [0, pi/2], got {delta}")));
        }
        if !(-PI..=PI).contains(&xi) {
            return Err(Error::domain(format!("xi must lie in [-pi, pi], got {xi}")));
        }
        let zeta = if kappa_f == 0.0 { FRAC_PI_2 } else { zeta };
        if !(0.0..=FRAC_PI_2).contains(&zeta) || zeta < zlo - 1e-9 || zeta > zhi + 1e-9 {
            return Err(Error::domain(format!(
                "zeta = {zeta} outside the feasible interval [{zlo}, {zhi}]"
            )));
        }
        Ok(Self { kappa_s, kappa_f: kappa_f.max(0.0), zeta: zeta.clamp(zlo, zhi), delta, xi })
    }

    /// The beam-splitter injection attack, `ζ = δ = π/2`.
    pub fn beam_splitter(src: &SourceSpec, kappa_s: f64, kappa_f: f64) -> Result<Self> {
        Self::new(src, kappa_s, kappa_f, FRAC_PI_2, FRAC_PI_2, 0.0)
    }

    pub(crate) fn trusted(kappa_s: f64, kappa_f: f64, zeta: f64, delta: f64, xi: f64) -> Self {
        Self { kappa_s, kappa_f, zeta, delta, xi }
    }

    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }
    pub fn kappa_f(&self) -> f64 {
        self.kappa_f
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn cos_gamma(&self, src: &SourceSpec) -> f64 {
        let w = gamma_window(src, self.kappa_s, self.kappa_f);
        (w.r * self.zeta.cos().powi(2)).clamp(w.lo, w.hi).sqrt()
    }

    pub fn bogoliubov(&self, src: &SourceSpec) -> Bogoliubov {
        bogoliubov(src, self.kappa_s, self.kappa_f, self.cos_gamma(src), self.delta.cos(), self.xi)
    }
}

#[inline]
fn bogoliubov(src: &SourceSpec, kappa_s: f64, kappa_f: f64, cos_g: f64, cos_d: f64, xi: f64) -> Bogoliubov {
    let n = src.n_s();
    let c2 = cos_g * cos_g;
    let u_norm_sq = ((kappa_s - kappa_f) * n + 1.0 - kappa_f + kappa_f * c2).max(0.0);
    let v_norm_sq = ((kappa_s - kappa_f) * n - kappa_f * c2).max(0.0);
    let mag = (u_norm_sq * v_norm_sq).sqrt() * cos_d;
    Bogoliubov {
        u0: (kappa_f * (1.0 - c2).max(0.0)).sqrt(),
        v0: kappa_f.sqrt() * cos_g,
        u_norm_sq,
        v_norm_sq,
        v_dag_u: Complex64::from_polar(1.0, xi) * mag,
    }
}

/// `Λ_SW` for a signed `cos γ` and `cos δ`; the optimizer's hot path.
#[inline]
pub(crate) fn attack_matrix4(src: &SourceSpec, kappa_s: f64, kappa_f: f64, cos_g: f64, cos_d: f64, xi: f64) -> Matrix4<f64> {
    let b = bogoliubov(src, kappa_s, kappa_f, cos_g, cos_d, xi);
    let n = src.n_s();
    let w = b.v_dag_u + (2.0 * n + 1.0) * b.v0 * b.u0;
    let ns = 1.0 + 2.0 * kappa_s * n;
    let (ca, cb) = (b.u0 * src.c_s(), b.v0 * src.c_s());
    let aw = 2.0 * n + 1.0;
    Matrix4::new(
        ns + 2.0 * w.re, 2.0 * w.im, 2.0 * (ca + cb), 0.0,
        2.0 * w.im, ns - 2.0 * w.re, 0.0, 2.0 * (cb - ca),
        2.0 * (ca + cb), 0.0, aw, 0.0,
        0.0, 2.0 * (cb - ca), 0.0, aw,
    )
}

/// Covariance of `(S, W)` under the attack.
pub fn attack_covariance(src: &SourceSpec, params: &AttackParameters) -> CovarianceMatrix {
    let m = attack_matrix4(
        src,
        params.kappa_s,
        params.kappa_f,
        params.cos_gamma(src),
        params.delta.cos(),
        params.xi,
    );
    CovarianceMatrix::from_matrix4(&m)
}

/// Closed-form input and complementary-output covariances of the beam-splitter attack.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalAttackPoint {
    pub lambda_sw: CovarianceMatrix,
    pub lambda_nw: CovarianceMatrix,
    /// Symplectic eigenvalues of `lambda_sw`, descending.
    pub mu: [f64; 2],
    /// Symplectic eigenvalues of `lambda_nw`, descending.
    pub nu: [f64; 2],
}

fn two_block(a: f64, c: Matrix2<f64>, w: f64) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(Matrix2::identity() * a));
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&c);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&c.transpose());
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&(Matrix2::identity() * w));
    m
}

pub fn optimal_attack_point(
    src: &SourceSpec,
    kappa_s: f64,
    kappa_f: f64,
    channel: &ChannelModel,
) -> Result<OptimalAttackPoint> {
    check_pair(kappa_s, kappa_f, src)?;
    channel.require_quantum_limited()?;
    let red = red_line(kappa_s, src);
    if kappa_f > red + FEASIBILITY_SLACK {
        return Err(Error::domain(format!(
            "beam-splitter attack needs kappa_f <= {red}, got {kappa_f}"
        )));
    }
    let n = src.n_s();
    let k = kappa_f.max(0.0);
    let aw = 2.0 * n + 1.0;
    let corr = 2.0 * src.c_s();
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let sw = two_block(1.0 + 2.0 * kappa_s * n, z * (k.sqrt() * corr), aw);
    let nw = match channel.kind() {
        ChannelKind::Amplifier(g) => two_block(
            1.0 + 2.0 * (g - 1.0) * (1.0 + kappa_s * n),
            Matrix2::identity() * ((k * (g - 1.0)).sqrt() * corr),
            aw,
        ),
        ChannelKind::Loss(eta) => two_block(
            1.0 + 2.0 * (1.0 - eta) * kappa_s * n,
            z * ((k * (1.0 - eta)).sqrt() * corr),
            aw,
        ),
        ChannelKind::ContraAmplifier(g) => two_block(
            -1.0 + 2.0 * g * (1.0 + kappa_s * n),
            z * ((g * k).sqrt() * corr),
            aw,
        ),
    };
    let lambda_sw = CovarianceMatrix::from_matrix4(&sw);
    let lambda_nw = CovarianceMatrix::from_matrix4(&nw);
    let pair = |c: &CovarianceMatrix| -> Result<[f64; 2]> {
        let v = symplectic_eigenvalues(c)?;
        Ok([v[0], v[1]])
    };
    Ok(OptimalAttackPoint { mu: pair(&lambda_sw)?, nu: pair(&lambda_nw)?, lambda_sw, lambda_nw })
}

/// Generic-dilation counterpart of [`optimal_attack_point`]'s output block.
pub fn optimal_output_via_dilation(
    src: &SourceSpec,
    kappa_s: f64,
    kappa_f: f64,
    channel: &ChannelModel,
) -> Result<CovarianceMatrix> {
    let p = AttackParameters::beam_splitter(src, kappa_s, kappa_f)?;
    complementary_output_cov(&attack_covariance(src, &p), channel)
}
