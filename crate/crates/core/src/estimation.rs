//! Synthetic heterodyne records from a Gaussian attack, and intrusion-parameter estimators.

use std::io::{BufRead, Write};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{attack_covariance, AttackParameters, OptimalAttackPoint};
use crate::error::{Error, Result};
use crate::gaussian::{is_physical, CovarianceMatrix, SourceSpec};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 16;

/// Minimum record count accepted by [`estimate_intrusion`].
pub const MIN_RECORDS: usize = 100;

/// One heterodyne outcome on a signal/reference pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub pair_index: u64,
    #[serde(rename = "alpha_S")]
    pub alpha_s: Complex64,
    #[serde(rename = "alpha_W")]
    pub alpha_w: Complex64,
}

/// Fraction `τ` of the entangled source's output that reaches the reference measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcTap {
    tau: f64,
}

impl SpdcTap {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::domain(format!("tap fraction must lie in (0, 1], got {tau}")));
        }
        Ok(Self { tau })
    }

    pub fn full() -> Self {
        Self { tau: 1.0 }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Reference mode after the tap: `Λ_W -> τ Λ_W + (1-τ) I`, cross block scaled by `sqrt(τ)`.
    fn apply(&self, m: &Matrix4<f64>) -> Matrix4<f64> {
        let mut out = *m;
        let r = self.tau.sqrt();
        for i in 0..2 {
            for j in 2..4 {
                out[(i, j)] *= r;
                out[(j, i)] *= r;
            }
        }
        for i in 2..4 {
            for j in 2..4 {
                out[(i, j)] = self.tau * m[(i, j)] + if i == j { 1.0 - self.tau } else { 0.0 };
            }
        }
        out
    }
}

/// The attacked signal/reference state to sample from.
#[derive(Debug, Clone)]
pub enum AttackModel {
    Parameters(AttackParameters),
    Optimal(OptimalAttackPoint),
    Covariance(CovarianceMatrix),
}

impl AttackModel {
    pub fn covariance(&self, src: &SourceSpec) -> CovarianceMatrix {
        match self {
            AttackModel::Parameters(p) => attack_covariance(src, p),
            AttackModel::Optimal(o) => o.lambda_sw.clone(),
            AttackModel::Covariance(c) => c.clone(),
        }
    }
}

pub fn simulate_attack_records(src: &SourceSpec, attack: &AttackModel, n_pairs: usize, seed: u64) -> Result<Vec<MeasurementRecord>> {
    simulate_tapped_records(src, attack, SpdcTap::full(), n_pairs, seed)
}

/// Husimi samples of the `(S, W)` state: `(Re α, Im α)` per mode is Gaussian with covariance `(Λ + I)/4`.
///
/// Pair `k` draws from a ChaCha8 stream keyed by `(seed, k)`, so the output does not
/// depend on thread scheduling.
pub fn simulate_tapped_records(
    src: &SourceSpec,
    attack: &AttackModel,
    tap: SpdcTap,
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<MeasurementRecord>> {
    if n_pairs == 0 {
        return Err(Error::argument("n_pairs must be at least 1"));
    }
    let cov = attack.covariance(src);
    if cov.n_modes() != 2 {
        return Err(Error::argument(format!("expected a two-mode state, got {} modes", cov.n_modes())));
    }
    let phys = is_physical(&cov);
    if !phys.physical {
        return Err(Error::domain(format!("attack state is unphysical (min symplectic eigenvalue {})", phys.min_eigenvalue)));
    }
    let husimi = (tap.apply(&cov.to_matrix4()) + Matrix4::identity()) * 0.25;
    let chol = husimi
        .cholesky()
        .ok_or_else(|| Error::numerical("Husimi covariance is not positive definite"))?
        .l();
    let base = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_pairs as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = base.clone();
            rng.set_stream(k);
            let z = Vector4::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let x = chol * z;
            MeasurementRecord {
                pair_index: k,
                alpha_s: Complex64::new(x[0], x[1]),
                alpha_w: Complex64::new(x[2], x[3]),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdErrors {
    pub kappa_s: f64,
    pub kappa_f: f64,
    pub k_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrusionEstimate {
    pub kappa_s_bar: f64,
    pub kappa_f_lower: f64,
    pub k_f_lower: f64,
    pub n_samples: usize,
    pub std_errors: StdErrors,
}

/// Averaged moments of a run of records.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    photons: f64,
    sens: Complex64,
    insens: Complex64,
}

impl Moments {
    fn of(records: &[MeasurementRecord]) -> Self {
        let mut m = Moments::default();
        for r in records {
            m.photons += r.alpha_s.norm_sqr();
            m.sens += r.alpha_s * r.alpha_w;
            m.insens += r.alpha_s.conj() * r.alpha_w;
        }
        let k = records.len() as f64;
        m.photons /= k;
        m.sens /= k;
        m.insens /= k;
        m
    }

    fn kappa_s(&self, src: &SourceSpec) -> f64 {
        (self.photons - 1.0) / src.n_s()
    }

    fn kappa_f(&self, src: &SourceSpec, tap: SpdcTap) -> f64 {
        (self.sens.norm_sqr() + self.insens.norm_sqr()) / (tap.tau() * src.c_s().powi(2))
    }
}

/// Cross-pair contribution `Σ_{1 ≤ ℓ ≤ L} (|<α_S[m] α_W[m+ℓ]>|² + |<α_S[m]* α_W[m+ℓ]>|²) / (τ C_S²)`.
fn lagged(records: &[MeasurementRecord], src: &SourceSpec, tap: SpdcTap, max_lag: usize) -> f64 {
    (1..=max_lag.min(records.len().saturating_sub(1)))
        .map(|lag| {
            let (mut s, mut i) = (Complex64::default(), Complex64::default());
            for w in records.windows(lag + 1) {
                s += w[0].alpha_s * w[lag].alpha_w;
                i += w[0].alpha_s.conj() * w[lag].alpha_w;
            }
            let k = (records.len() - lag) as f64;
            ((s / k).norm_sqr() + (i / k).norm_sqr()) / (tap.tau() * src.c_s().powi(2))
        })
        .sum()
}

/// `κ̄_S`, and lower bounds on `κ̄_f` and `K̄_f`, from averaged heterodyne moments.
pub fn estimate_intrusion(records: &[MeasurementRecord], src: &SourceSpec, tap: SpdcTap) -> Result<IntrusionEstimate> {
    estimate_intrusion_with_lags(records, src, tap, 0)
}

/// As [`estimate_intrusion`], adding cross-pair correlations at lags `1..=max_lag`
/// (in record order) to the `K̄_f` bound.
pub fn estimate_intrusion_with_lags(
    records: &[MeasurementRecord],
    src: &SourceSpec,
    tap: SpdcTap,
    max_lag: usize,
) -> Result<IntrusionEstimate> {
    if records.len() < MIN_RECORDS {
        return Err(Error::argument(format!("need at least {MIN_RECORDS} records, got {}", records.len())));
    }
    if src.n_s() <= 0.0 {
        return Err(Error::domain("estimation needs N_S > 0"));
    }
    if records.iter().any(|r| !r.alpha_s.is_finite() || !r.alpha_w.is_finite()) {
        return Err(Error::argument("records contain non-finite amplitudes"));
    }
    let n = records.len();
    let all = Moments::of(records);
    let batch_stats: Vec<(f64, f64, f64)> = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let chunk = &records[b * n / BATCHES..(b + 1) * n / BATCHES];
            let m = Moments::of(chunk);
            let kf = m.kappa_f(src, tap);
            (m.kappa_s(src), kf, kf + lagged(chunk, src, tap, max_lag))
        })
        .collect();
    let se = |f: fn(&(f64, f64, f64)) -> f64| {
        let vals: Vec<f64> = batch_stats.iter().map(f).collect();
        let mean = vals.iter().sum::<f64>() / BATCHES as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        (var / BATCHES as f64).sqrt()
    };
    let kappa_f_lower = all.kappa_f(src, tap);
    Ok(IntrusionEstimate {
        kappa_s_bar: all.kappa_s(src),
        kappa_f_lower,
        k_f_lower: kappa_f_lower + lagged(records, src, tap, max_lag),
        n_samples: n,
        std_errors: StdErrors { kappa_s: se(|t| t.0), kappa_f: se(|t| t.1), k_f: se(|t| t.2) },
    })
}

/// Writes one JSON object per line.
pub fn write_jsonl<W: Write>(records: &[MeasurementRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Parse(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads records written by [`write_jsonl`]; blank lines are skipped.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<MeasurementRecord>> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: MeasurementRecord =
            serde_json::from_str(&line).map_err(|e| Error::Parse(format!("record line {}: {e}", i + 1)))?;
        records.push(r);
    }
    Ok(records)
}
