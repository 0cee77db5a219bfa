//! Beam-splitter cascade that concentrates `M` signal-reference correlations into three entries.
//!
//! Entry `n` of a profile refers to reference mode `W_{n+1}`, which sits at covariance
//! mode index `n + 1` (the signal mode is index 0). Logged operations use covariance indices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{apply_symplectic, CovarianceMatrix, SymplecticTransform};

/// Cross-correlations between `S` and each reference mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    /// `<a_S† a_Wn>`
    pub phase_insensitive: Vec<Complex64>,
    /// `<a_S a_Wn>`
    pub phase_sensitive: Vec<Complex64>,
}

/// One passive unitary on the reference modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum UnitaryOp {
    /// `a -> e^{iθ} a`
    PhaseShift { mode: usize, angle: f64 },
    /// `a' = sqrt(1-η) a + sqrt(η) b`, `b' = sqrt(η) a - sqrt(1-η) b`. `η = 1` swaps the modes.
    BeamSplitter { mode_a: usize, mode_b: usize, eta: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitaryLog {
    pub ops: Vec<UnitaryOp>,
}

impl CorrelationProfile {
    pub fn new(phase_insensitive: Vec<Complex64>, phase_sensitive: Vec<Complex64>) -> Result<Self> {
        if phase_insensitive.is_empty() || phase_insensitive.len() != phase_sensitive.len() {
            return Err(Error::argument(format!(
                "profile families must be non-empty and of equal length, got {} and {}",
                phase_insensitive.len(),
                phase_sensitive.len()
            )));
        }
        if phase_insensitive.iter().chain(&phase_sensitive).any(|z| !z.is_finite()) {
            return Err(Error::argument("profile entries must be finite"));
        }
        Ok(Self { phase_insensitive, phase_sensitive })
    }

    /// Reads the profile of mode 0 against modes `1..n` of a covariance matrix.
    pub fn from_covariance(cov: &CovarianceMatrix) -> Result<Self> {
        if cov.n_modes() < 2 {
            return Err(Error::argument("need a signal mode and at least one reference mode"));
        }
        let (ps, pi): (Vec<_>, Vec<_>) = (1..cov.n_modes()).map(|k| cov.cross_moments(0, k)).unzip();
        Self::new(pi, ps)
    }

    pub fn len(&self) -> usize {
        self.phase_insensitive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase_insensitive.is_empty()
    }

    /// `(Σ|<a_S a_Wn>|², Σ|<a_S† a_Wn>|²)`
    pub fn correlation_sums(&self) -> (f64, f64) {
        let s = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum();
        (s(&self.phase_sensitive), s(&self.phase_insensitive))
    }

    /// Transforms the profile by one logged operation.
    pub fn apply(&mut self, op: &UnitaryOp) -> Result<()> {
        let m = self.len();
        let idx = |mode: usize| -> Result<usize> {
            if mode == 0 || mode > m {
                Err(Error::argument(format!("reference mode {mode} outside 1..={m}")))
            } else {
                Ok(mode - 1)
            }
        };
        match *op {
            UnitaryOp::PhaseShift { mode, angle } => {
                let k = idx(mode)?;
                let rot = Complex64::from_polar(1.0, angle);
                self.phase_insensitive[k] *= rot;
                self.phase_sensitive[k] *= rot;
            }
            UnitaryOp::BeamSplitter { mode_a, mode_b, eta } => {
                let (a, b) = (idx(mode_a)?, idx(mode_b)?);
                if a == b || !(0.0..=1.0).contains(&eta) {
                    return Err(Error::argument(format!("bad beam splitter ({mode_a}, {mode_b}, {eta})")));
                }
                let (t, r) = ((1.0 - eta).sqrt(), eta.sqrt());
                for v in [&mut self.phase_insensitive, &mut self.phase_sensitive] {
                    let (x, y) = (v[a], v[b]);
                    v[a] = x * t + y * r;
                    v[b] = x * r - y * t;
                }
            }
        }
        Ok(())
    }
}

impl UnitaryOp {
    fn modes(&self) -> Vec<usize> {
        match *self {
            UnitaryOp::PhaseShift { mode, .. } => vec![mode],
            UnitaryOp::BeamSplitter { mode_a, mode_b, .. } => vec![mode_a, mode_b],
        }
    }

    /// Quadrature symplectic of the operation on its own modes.
    pub fn symplectic(&self) -> Result<SymplecticTransform> {
        match *self {
            UnitaryOp::PhaseShift { angle, .. } => Ok(SymplecticTransform::phase_shift(angle)),
            UnitaryOp::BeamSplitter { eta, .. } => {
                let (t, r) = ((1.0 - eta).sqrt(), eta.sqrt());
                let mut s = DMatrix::zeros(4, 4);
                for q in 0..2 {
                    s[(q, q)] = t;
                    s[(q, 2 + q)] = r;
                    s[(2 + q, q)] = r;
                    s[(2 + q, 2 + q)] = -t;
                }
                SymplecticTransform::new(s)
            }
        }
    }
}

/// Phases every entry of `family` from `first` on to the non-negative real axis,
/// then moves the largest entry to `first` and folds the rest into it.
fn concentrate(profile: &mut CorrelationProfile, log: &mut UnitaryLog, insensitive: bool, first: usize) {
    let m = profile.len();
    let get = |p: &CorrelationProfile, k: usize| if insensitive { p.phase_insensitive[k] } else { p.phase_sensitive[k] };
    let mut record = |p: &mut CorrelationProfile, op: UnitaryOp| {
        p.apply(&op).expect("reduction emits in-range operations");
        log.ops.push(op);
    };
    // entries made real or zero by construction are stored exactly, so a second pass is a no-op
    let set = |p: &mut CorrelationProfile, k: usize, v: f64| {
        let z = Complex64::new(v, 0.0);
        if insensitive {
            p.phase_insensitive[k] = z;
        } else {
            p.phase_sensitive[k] = z;
        }
    };
    for k in first..m {
        let z = get(profile, k);
        if z.im != 0.0 || z.re < 0.0 {
            record(profile, UnitaryOp::PhaseShift { mode: k + 1, angle: -z.arg() });
            set(profile, k, z.norm());
        }
    }
    let pivot = (first..m).fold(first, |best, k| if get(profile, k).re > get(profile, best).re { k } else { best });
    if pivot != first {
        record(profile, UnitaryOp::BeamSplitter { mode_a: first + 1, mode_b: pivot + 1, eta: 1.0 });
    }
    for k in first + 1..m {
        let (x, y) = (get(profile, first).re, get(profile, k).re);
        if y == 0.0 {
            continue;
        }
        let eta = y * y / (x * x + y * y);
        record(profile, UnitaryOp::BeamSplitter { mode_a: first + 1, mode_b: k + 1, eta });
        set(profile, first, x.hypot(y));
        set(profile, k, 0.0);
    }
}

/// Reduces the profile so only `<a_S† a_W1>`, `<a_S a_W1>` and `<a_S a_W2>` survive.
///
/// `<a_S† a_W1>` and `<a_S a_W2>` end real and non-negative; `<a_S a_W1>` keeps its phase.
pub fn reduce_correlations(profile: &CorrelationProfile) -> (CorrelationProfile, UnitaryLog) {
    let mut out = profile.clone();
    let mut log = UnitaryLog::default();
    if out.len() >= 2 {
        concentrate(&mut out, &mut log, true, 0);
        concentrate(&mut out, &mut log, false, 1);
    }
    (out, log)
}

/// Applies the logged unitaries to a covariance matrix over `S` and the reference modes.
pub fn replay_log(cov: &CovarianceMatrix, log: &UnitaryLog) -> Result<CovarianceMatrix> {
    let mut out = cov.clone();
    for op in &log.ops {
        let modes = op.modes();
        if modes.iter().any(|&k| k == 0 || k >= cov.n_modes()) {
            return Err(Error::argument(format!(
                "operation {op:?} touches a mode outside the reference modes 1..{}",
                cov.n_modes()
            )));
        }
        out = apply_symplectic(&out, &op.symplectic()?, &modes)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{is_physical, symplectic_eigenvalues, MomentBuilder};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_profile(rng: &mut ChaCha8Rng, m: usize) -> CorrelationProfile {
        let mut z = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let pi = (0..m).map(|_| z()).collect();
        let ps = (0..m).map(|_| z()).collect();
        CorrelationProfile::new(pi, ps).unwrap()
    }

    fn assert_sparse(p: &CorrelationProfile) {
        for (k, z) in p.phase_insensitive.iter().enumerate().skip(1) {
            assert_eq!(*z, c(0.0, 0.0), "insensitive entry {k}");
        }
        for (k, z) in p.phase_sensitive.iter().enumerate().skip(2) {
            assert_eq!(*z, c(0.0, 0.0), "sensitive entry {k}");
        }
        assert!(p.phase_insensitive[0].im == 0.0 && p.phase_insensitive[0].re >= 0.0);
        if p.len() > 1 {
            assert!(p.phase_sensitive[1].im == 0.0 && p.phase_sensitive[1].re >= 0.0);
        }
    }

    #[test]
    fn two_equal_entries_merge() {
        let a = 0.3;
        let p = CorrelationProfile::new(vec![c(a, 0.0), c(a, 0.0)], vec![c(0.0, 0.0); 2]).unwrap();
        let (r, log) = reduce_correlations(&p);
        assert!((r.phase_insensitive[0].re - 2f64.sqrt() * a).abs() < 1e-15);
        assert_eq!(r.phase_insensitive[1], c(0.0, 0.0));
        assert_eq!(log.ops, vec![UnitaryOp::BeamSplitter { mode_a: 1, mode_b: 2, eta: 0.5 }]);
    }

    #[test]
    fn zero_profile_is_untouched() {
        let p = CorrelationProfile::new(vec![c(0.0, 0.0); 5], vec![c(0.0, 0.0); 5]).unwrap();
        let (r, log) = reduce_correlations(&p);
        assert_eq!(r, p);
        assert!(log.ops.is_empty());
    }

    #[test]
    fn single_mode_passes_through() {
        let p = CorrelationProfile::new(vec![c(0.1, -0.4)], vec![c(0.3, 0.2)]).unwrap();
        assert_eq!(reduce_correlations(&p), (p, UnitaryLog::default()));
    }

    #[test]
    fn zero_pivot_gets_swapped_in() {
        let p = CorrelationProfile::new(vec![c(0.0, 0.0), c(0.0, 0.2), c(0.1, 0.0)], vec![c(0.5, 0.0); 3]).unwrap();
        let (r, log) = reduce_correlations(&p);
        assert!(log.ops.contains(&UnitaryOp::BeamSplitter { mode_a: 1, mode_b: 2, eta: 1.0 }));
        assert_sparse(&r);
        assert!((r.phase_insensitive[0].re - 0.05f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn random_profiles_sparse_and_conserved_stepwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let m = rng.random_range(2..=32);
            let p = random_profile(&mut rng, m);
            let (r, log) = reduce_correlations(&p);
            assert_sparse(&r);
            let (s0, i0) = p.correlation_sums();
            let mut q = p.clone();
            for op in &log.ops {
                q.apply(op).unwrap();
                let (s, i) = q.correlation_sums();
                assert!((s - s0).abs() < 1e-12 && (i - i0).abs() < 1e-12);
            }
            let (s, i) = r.correlation_sums();
            assert!((s - s0).abs() < 1e-12 && (i - i0).abs() < 1e-12);
            for (a, b) in q.phase_insensitive.iter().zip(&r.phase_insensitive).chain(q.phase_sensitive.iter().zip(&r.phase_sensitive)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reduction_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let m = rng.random_range(2..=12);
            let (r, _) = reduce_correlations(&random_profile(&mut rng, m));
            let (rr, log) = reduce_correlations(&r);
            assert!(log.ops.is_empty(), "{log:?}");
            assert_eq!(rr, r);
        }
    }

    #[test]
    fn replay_matches_profile_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n_w = 0.4;
        for _ in 0..20 {
            let m = rng.random_range(2..=8);
            let mut p = random_profile(&mut rng, m);
            let scale = 0.5 / (p.correlation_sums().0 + p.correlation_sums().1).sqrt();
            for z in p.phase_insensitive.iter_mut().chain(p.phase_sensitive.iter_mut()) {
                *z *= scale;
            }
            let mut b = MomentBuilder::new(m + 1).mode(0, 2.0, c(0.0, 0.0));
            for k in 0..m {
                b = b.mode(k + 1, n_w, c(0.0, 0.0)).cross(0, k + 1, p.phase_sensitive[k], p.phase_insensitive[k]);
            }
            let cov = b.build();
            assert!(is_physical(&cov).physical);
            let extracted = CorrelationProfile::from_covariance(&cov).unwrap();
            let (r, log) = reduce_correlations(&extracted);
            let out = replay_log(&cov, &log).unwrap();
            let got = CorrelationProfile::from_covariance(&out).unwrap();
            for (a, b) in got.phase_insensitive.iter().zip(&r.phase_insensitive).chain(got.phase_sensitive.iter().zip(&r.phase_sensitive)) {
                assert!((a - b).norm() < 1e-10);
            }
            let w: Vec<usize> = (1..=m).collect();
            let before = cov.select_modes(&w).unwrap();
            let after = out.select_modes(&w).unwrap();
            assert!((before.matrix() - after.matrix()).amax() < 1e-12, "thermal W block changed");
            let (e0, e1) = (symplectic_eigenvalues(&cov).unwrap(), symplectic_eigenvalues(&out).unwrap());
            for (a, b) in e0.iter().zip(&e1) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn replay_empty_log_and_bad_index() {
        let cov = MomentBuilder::new(3).mode(1, 0.3, c(0.0, 0.0)).build();
        assert_eq!(replay_log(&cov, &UnitaryLog::default()).unwrap(), cov);
        let bad = UnitaryLog { ops: vec![UnitaryOp::PhaseShift { mode: 3, angle: 0.1 }] };
        assert!(matches!(replay_log(&cov, &bad), Err(Error::Argument(_))));
        let bad = UnitaryLog { ops: vec![UnitaryOp::PhaseShift { mode: 0, angle: 0.1 }] };
        assert!(replay_log(&cov, &bad).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (r, log) = reduce_correlations(&random_profile(&mut rng, 4));
        let s = serde_json::to_string(&(r.clone(), log.clone())).unwrap();
        let back: (CorrelationProfile, UnitaryLog) = serde_json::from_str(&s).unwrap();
        assert_eq!(back, (r, log));
    }
}
