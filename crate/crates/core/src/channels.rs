//! Bob's single-mode Gaussian channel and its complementary channel.
//!
//! Every channel is realized as a two-mode symplectic dilation acting on the
//! signal `S` and an environment mode `N`. The direct output `B` and the
//! complementary output `N'` are the two dilation outputs.

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::gaussian::{apply_symplectic, is_physical, CovarianceMatrix, SymplecticTransform};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    /// Phase-insensitive amplifier, gain `G >= 1`.
    Amplifier(f64),
    /// Pure loss, transmissivity `eta` in `[0, 1]`.
    Loss(f64),
    /// Contravariant amplifier: `B = sqrt(G-1) S† + sqrt(G) N`.
    ContraAmplifier(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    kind: ChannelKind,
    env_photons: f64,
}

impl ChannelModel {
    pub fn amplifier(gain: f64) -> Result<Self> {
        check_gain(gain)?;
        Ok(Self { kind: ChannelKind::Amplifier(gain), env_photons: 0.0 })
    }

    pub fn loss(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::domain(format!("loss transmissivity must be in [0,1], got {eta}")));
        }
        Ok(Self { kind: ChannelKind::Loss(eta), env_photons: 0.0 })
    }

    pub fn contra_amplifier(gain: f64) -> Result<Self> {
        check_gain(gain)?;
        Ok(Self { kind: ChannelKind::ContraAmplifier(gain), env_photons: 0.0 })
    }

    /// The identity channel, as a unit-gain amplifier.
    pub fn identity() -> Self {
        Self { kind: ChannelKind::Amplifier(1.0), env_photons: 0.0 }
    }

    /// Same channel with a thermal environment of `n0` mean photons.
    pub fn with_env_photons(self, n0: f64) -> Result<Self> {
        if !(n0 >= 0.0) || !n0.is_finite() {
            return Err(Error::domain(format!("environment photon number must be >= 0, got {n0}")));
        }
        Ok(Self { env_photons: n0, ..self })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn env_photons(&self) -> f64 {
        self.env_photons
    }

    pub fn is_quantum_limited(&self) -> bool {
        self.env_photons == 0.0
    }

    pub(crate) fn require_quantum_limited(&self) -> Result<()> {
        if self.is_quantum_limited() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "bounds assume a vacuum environment, got N0 = {}",
                self.env_photons
            )))
        }
    }

    /// Dilation on `(S, N)`; output mode 0 is `B` for the amplifier and loss
    /// channels and `N'` for the contravariant amplifier.
    pub fn dilation(&self) -> SymplecticTransform {
        match self.kind {
            ChannelKind::Amplifier(g) | ChannelKind::ContraAmplifier(g) => {
                SymplecticTransform::two_mode_squeezer(g).expect("gain validated")
            }
            ChannelKind::Loss(eta) => SymplecticTransform::beam_splitter(eta).expect("eta validated"),
        }
    }

    /// Indices of `(B, N')` among the dilation outputs.
    fn output_roles(&self) -> (usize, usize) {
        match self.kind {
            ChannelKind::ContraAmplifier(_) => (1, 0),
            _ => (0, 1),
        }
    }

    /// Quadrature map `(X, Y)` of the complementary channel with vacuum
    /// environment: `Λ_S -> X Λ_S Xᵀ + Y`, cross blocks `C -> X C`.
    #[inline]
    pub(crate) fn complementary_map(&self) -> (Matrix2<f64>, f64) {
        match self.kind {
            ChannelKind::Amplifier(g) => {
                let s = (g - 1.0).sqrt();
                (Matrix2::new(s, 0.0, 0.0, -s), g)
            }
            ChannelKind::Loss(eta) => (Matrix2::identity() * (1.0 - eta).sqrt(), eta),
            ChannelKind::ContraAmplifier(g) => (Matrix2::identity() * g.sqrt(), g - 1.0),
        }
    }
}

fn check_gain(gain: f64) -> Result<()> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::domain(format!("amplifier gain must be >= 1, got {gain}")));
    }
    Ok(())
}

/// Bob's displacement encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingSpec {
    e_x: f64,
    m_e: u32,
}

impl EncodingSpec {
    pub fn new(e_x: f64, m_e: u32) -> Result<Self> {
        if !(e_x >= 0.0) || !e_x.is_finite() {
            return Err(Error::domain(format!("encoding photon number must be >= 0, got {e_x}")));
        }
        if m_e == 0 {
            return Err(Error::domain("modes per symbol must be >= 1"));
        }
        Ok(Self { e_x, m_e })
    }

    /// Mean encoding photon number `E_X`.
    pub fn e_x(&self) -> f64 {
        self.e_x
    }

    /// Modes per symbol `M_E`.
    pub fn m_e(&self) -> u32 {
        self.m_e
    }
}

/// Mean photon number of the return mode `B` for `n_in` signal photons before encoding.
pub fn output_photon_number(n_in: f64, channel: &ChannelModel, enc: &EncodingSpec) -> Result<f64> {
    if !(n_in >= 0.0) {
        return Err(Error::domain(format!("input photon number must be >= 0, got {n_in}")));
    }
    let n = n_in + enc.e_x();
    let n0 = channel.env_photons();
    Ok(match channel.kind() {
        ChannelKind::Amplifier(g) => g * n + (g - 1.0) * (1.0 + n0),
        ChannelKind::Loss(eta) => eta * n + (1.0 - eta) * n0,
        ChannelKind::ContraAmplifier(g) => (g - 1.0) * (n + 1.0) + g * n0,
    })
}

fn dilate(lambda: &CovarianceMatrix, channel: &ChannelModel) -> Result<(CovarianceMatrix, usize)> {
    if !is_physical(lambda).physical {
        return Err(Error::domain("input covariance is not physical"));
    }
    let n = lambda.n_modes();
    let env = CovarianceMatrix::thermal(&[channel.env_photons()])?;
    let joint = apply_symplectic(&lambda.direct_sum(&env), &channel.dilation(), &[0, n])?;
    Ok((joint, n))
}

fn keep(joint: &CovarianceMatrix, first: usize, n: usize) -> Result<CovarianceMatrix> {
    let modes: Vec<usize> = std::iter::once(first).chain(1..n).collect();
    joint.select_modes(&modes)
}

/// Covariance of `(N', W...)` given `Λ_SW` with `S` as mode 0.
pub fn complementary_output_cov(lambda_sw: &CovarianceMatrix, channel: &ChannelModel) -> Result<CovarianceMatrix> {
    let (joint, n) = dilate(lambda_sw, channel)?;
    let (_, n_prime) = channel.output_roles();
    keep(&joint, if n_prime == 0 { 0 } else { n }, n)
}

/// Covariance of `(B, W...)` given `Λ_SW` with `S` as mode 0.
pub fn direct_output_cov(lambda_sw: &CovarianceMatrix, channel: &ChannelModel) -> Result<CovarianceMatrix> {
    let (joint, n) = dilate(lambda_sw, channel)?;
    let (b, _) = channel.output_roles();
    keep(&joint, if b == 0 { 0 } else { n }, n)
}

/// Complementary output for a two-mode `Λ_SW` without dilation bookkeeping.
#[inline]
pub(crate) fn complementary_output4(m: &Matrix4<f64>, channel: &ChannelModel) -> Matrix4<f64> {
    let (x, y) = channel.complementary_map();
    let a = m.fixed_view::<2, 2>(0, 0).into_owned();
    let c = m.fixed_view::<2, 2>(0, 2).into_owned();
    let a2 = x * a * x.transpose() + Matrix2::identity() * y;
    let c2 = x * c;
    let mut out = *m;
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(&a2);
    out.fixed_view_mut::<2, 2>(0, 2).copy_from(&c2);
    out.fixed_view_mut::<2, 2>(2, 0).copy_from(&c2.transpose());
    out
}

/// Complementary output of an arbitrary `Λ` with `S` as mode 0, without dilation bookkeeping.
pub(crate) fn complementary_output_matrix(m: &DMatrix<f64>, channel: &ChannelModel) -> DMatrix<f64> {
    let (x, y) = channel.complementary_map();
    let dim = m.nrows();
    let mut out = m.clone();
    let a = m.fixed_view::<2, 2>(0, 0).into_owned();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(&(x * a * x.transpose() + Matrix2::identity() * y));
    for col in (2..dim).step_by(2) {
        let c = x * m.fixed_view::<2, 2>(0, col).into_owned();
        out.fixed_view_mut::<2, 2>(0, col).copy_from(&c);
        out.fixed_view_mut::<2, 2>(col, 0).copy_from(&c.transpose());
    }
    out
}

/// How far the thermal-environment channel differs from its claimed decomposition
/// into quantum-limited channels, as the max-norm of the covariance difference on `sample`.
///
/// Amplifier: `A^{N0}_G` against `L^{N0'}_{1/G'} ∘ A_{G'} ∘ A_G` with
/// `G' = sqrt(1+N0') / sqrt(1+N0'-N0(G²-1))`.
/// Loss: `L^{N0}_η` against `A_{1/η'} ∘ L_{η'} ∘ L_η` with `η' = 1/sqrt(1+N0(1-η²))`.
pub fn thermal_decomposition_residual(
    channel: &ChannelModel,
    n0_prime: Option<f64>,
    sample: &CovarianceMatrix,
) -> Result<f64> {
    let n0 = channel.env_photons();
    let thermal = direct_output_cov(sample, channel)?;
    let composed = match channel.kind() {
        ChannelKind::Amplifier(g) => {
            let n0p = n0_prime
                .ok_or_else(|| Error::argument("amplifier decomposition needs the auxiliary photon number N0'"))?;
            if !(n0p > n0 * (g * g - 1.0)) && !(n0 == 0.0 && n0p >= 0.0) {
                return Err(Error::argument(format!(
                    "decomposition requires N0' > N0 (G² - 1), got N0' = {n0p}"
                )));
            }
            let g_aux = (1.0 + n0p).sqrt() / (1.0 + n0p - n0 * (g * g - 1.0)).sqrt();
            let s1 = direct_output_cov(sample, &ChannelModel::amplifier(g)?)?;
            let s2 = direct_output_cov(&s1, &ChannelModel::amplifier(g_aux)?)?;
            direct_output_cov(&s2, &ChannelModel::loss(1.0 / g_aux)?.with_env_photons(n0p)?)?
        }
        ChannelKind::Loss(eta) => {
            let eta_aux = 1.0 / (1.0 + n0 * (1.0 - eta * eta)).sqrt();
            let s1 = direct_output_cov(sample, &ChannelModel::loss(eta)?)?;
            let s2 = direct_output_cov(&s1, &ChannelModel::loss(eta_aux)?)?;
            direct_output_cov(&s2, &ChannelModel::amplifier(1.0 / eta_aux)?)?
        }
        ChannelKind::ContraAmplifier(_) => {
            return Err(Error::argument("no thermal decomposition is defined for the contravariant amplifier"))
        }
    };
    Ok((thermal.matrix() - composed.matrix()).amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{state_entropy, tmsv_covariance, MomentBuilder, SourceSpec};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Attack-parameterized Λ_SW from the Bogoliubov moments; `v0` complex, `u0` real.
    fn moment_state(src: &SourceSpec, k_s: f64, u0: f64, v0: Complex64, w: Complex64) -> CovarianceMatrix {
        MomentBuilder::new(2)
            .mode(0, k_s * src.n_s(), w)
            .mode(1, src.n_s(), Complex64::new(0.0, 0.0))
            .cross(0, 1, Complex64::new(u0 * src.c_s(), 0.0), v0 * src.c_s())
            .build()
    }

    fn block_state(a: Matrix2<f64>, c: Matrix2<f64>, n_s: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&a);
        m.view_mut((0, 2), (2, 2)).copy_from(&c);
        m.view_mut((2, 0), (2, 2)).copy_from(&c.transpose());
        m.view_mut((2, 2), (2, 2)).copy_from(&(Matrix2::identity() * (2.0 * n_s + 1.0)));
        m
    }

    #[test]
    fn photon_numbers() {
        let enc = EncodingSpec::new(1e4, 1).unwrap();
        let id = ChannelModel::identity();
        assert!(close(output_photon_number(0.063, &id, &enc).unwrap(), 0.063 + 1e4, 1e-9));
        let zero = EncodingSpec::new(3.0, 1).unwrap();
        assert_eq!(output_photon_number(0.4, &ChannelModel::loss(0.0).unwrap(), &zero).unwrap(), 0.0);
        assert_eq!(output_photon_number(0.4, &ChannelModel::contra_amplifier(1.0).unwrap(), &zero).unwrap(), 0.0);
        assert!(output_photon_number(-1.0, &id, &zero).is_err());
    }

    #[test]
    fn identity_channels_leave_state_alone() {
        let cov = tmsv_covariance(&SourceSpec::new(0.3).unwrap());
        for ch in [ChannelModel::identity(), ChannelModel::loss(1.0).unwrap()] {
            let direct = direct_output_cov(&cov, &ch).unwrap();
            assert!((direct.matrix() - cov.matrix()).amax() < 1e-14);
            let comp = complementary_output_cov(&cov, &ch).unwrap();
            let expected = CovarianceMatrix::vacuum(1).direct_sum(&cov.select_modes(&[1]).unwrap());
            assert!((comp.matrix() - expected.matrix()).amax() < 1e-14);
        }
    }

    #[test]
    fn amplifier_on_vacuum() {
        let out = direct_output_cov(&CovarianceMatrix::vacuum(2), &ChannelModel::amplifier(2.0).unwrap()).unwrap();
        assert!((out.block(0, 0) - Matrix2::identity() * 3.0).amax() < 1e-14);
    }

    #[test]
    fn loss_complement_eigenvalues() {
        let src = SourceSpec::new(0.1).unwrap();
        let out = complementary_output_cov(&tmsv_covariance(&src), &ChannelModel::loss(0.2).unwrap()).unwrap();
        let nu = crate::gaussian::symplectic_eigenvalues(&out).unwrap();
        assert!(close(nu[0], 1.0 + 2.0 * 0.2 * 0.1, 1e-12) && close(nu[1], 1.0, 1e-12), "{nu:?}");
    }

    #[test]
    fn complementary_outputs_match_block_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n_s = rng.random_range(0.01..2.0);
            let src = SourceSpec::new(n_s).unwrap();
            // a random physical state of the attack form: pick Bogoliubov data directly
            let k_s = rng.random_range(0.05..2.0);
            let red = (1.0 + k_s * n_s) / (1.0 + n_s);
            let k_f = rng.random_range(0.0..1.0) * k_s.min(red);
            let r = if k_f > 0.0 { (k_s - k_f) * n_s / k_f } else { 0.0 };
            let lo = if k_f > 0.0 { (1.0 - 1.0 / k_f - (k_s / k_f - 1.0) * n_s).max(0.0) } else { 0.0 };
            let hi = r.min(1.0);
            let cg2 = lo + (hi - lo) * rng.random_range(0.0..1.0);
            let theta_v: f64 = rng.random_range(-3.0..3.0);
            let u0 = (k_f * (1.0 - cg2)).sqrt();
            let v0 = Complex64::from_polar((k_f * cg2).sqrt(), theta_v);
            let uu = (k_s - k_f) * n_s + 1.0 - k_f + k_f * cg2;
            let vv = ((k_s - k_f) * n_s - k_f * cg2).max(0.0);
            let vu = Complex64::from_polar((uu * vv).sqrt() * rng.random_range(0.0f64..1.0), rng.random_range(-3.0..3.0));
            let w = vu + v0.conj() * u0 * (2.0 * n_s + 1.0);
            let cov = moment_state(&src, k_s, u0, v0, w);
            assert!(is_physical(&cov).physical);

            let c_sw = Matrix2::new(u0 + v0.re, v0.im, -v0.im, -u0 + v0.re) * (2.0 * src.c_s());

            let g = rng.random_range(1.0..4.0);
            let eta = rng.random_range(0.0..1.0);

            let amp_a = 0.5 + (g - 1.0) * (k_s * n_s + 1.0);
            let x = w * (g - 1.0);
            let amp = block_state(
                Matrix2::new(amp_a + x.re, -x.im, -x.im, amp_a - x.re) * 2.0,
                Matrix2::new(u0 + v0.re, v0.im, v0.im, u0 - v0.re) * (2.0 * (g - 1.0).sqrt() * src.c_s()),
                n_s,
            );
            let loss_a = 0.5 + (1.0 - eta) * k_s * n_s;
            let x = w * (1.0 - eta);
            let loss = block_state(
                Matrix2::new(loss_a + x.re, x.im, x.im, loss_a - x.re) * 2.0,
                c_sw * (1.0 - eta).sqrt(),
                n_s,
            );
            let con_a = 0.5 + g * k_s * n_s + (g - 1.0);
            let x = w * g;
            let con = block_state(
                Matrix2::new(con_a + x.re, x.im, x.im, con_a - x.re) * 2.0,
                c_sw * g.sqrt(),
                n_s,
            );
            for (ch, expected) in [
                (ChannelModel::amplifier(g).unwrap(), amp),
                (ChannelModel::loss(eta).unwrap(), loss),
                (ChannelModel::contra_amplifier(g).unwrap(), con),
            ] {
                let got = complementary_output_cov(&cov, &ch).unwrap();
                assert!((got.matrix() - &expected).amax() < 1e-10, "{ch:?}");
                let fast = complementary_output4(&cov.to_matrix4(), &ch);
                assert!((CovarianceMatrix::from_matrix4(&fast).matrix() - &expected).amax() < 1e-10);
            }
            let direct = direct_output_cov(&cov, &ChannelModel::amplifier(g).unwrap()).unwrap();
            let enc = EncodingSpec::new(0.0, 1).unwrap();
            let n_b = output_photon_number(k_s * n_s, &ChannelModel::amplifier(g).unwrap(), &enc).unwrap();
            assert!(close(direct.photon_number(0), n_b, 1e-10));
        }
    }

    #[test]
    fn pure_inputs_balance_entropies() {
        // the dilated state on (B, N', W) is pure, so S(BW) = S(N') and S(N'W) = S(B)
        let src = SourceSpec::new(0.6).unwrap();
        let cov = tmsv_covariance(&src);
        for ch in [
            ChannelModel::amplifier(1.7).unwrap(),
            ChannelModel::loss(0.35).unwrap(),
            ChannelModel::contra_amplifier(2.2).unwrap(),
        ] {
            let bw = direct_output_cov(&cov, &ch).unwrap();
            let nw = complementary_output_cov(&cov, &ch).unwrap();
            let s = |c: &CovarianceMatrix| state_entropy(c).unwrap();
            let b = bw.select_modes(&[0]).unwrap();
            let n = nw.select_modes(&[0]).unwrap();
            assert!(close(s(&bw), s(&n), 1e-8), "{ch:?}");
            assert!(close(s(&nw), s(&b), 1e-8), "{ch:?}");
        }
    }

    #[test]
    fn encoded_photons_match_direct_output() {
        let n_s = 0.2;
        let e_x = 0.7;
        for ch in [
            ChannelModel::amplifier(1.3).unwrap(),
            ChannelModel::loss(0.6).unwrap(),
            ChannelModel::contra_amplifier(1.9).unwrap(),
        ] {
            let input = CovarianceMatrix::thermal(&[0.5 * n_s + e_x, n_s]).unwrap();
            let out = direct_output_cov(&input, &ch).unwrap();
            let enc = EncodingSpec::new(e_x, 1).unwrap();
            let n_b = output_photon_number(0.5 * n_s, &ch, &enc).unwrap();
            assert!(close(out.photon_number(0), n_b, 1e-10));
        }
    }

    #[test]
    fn unphysical_input_rejected() {
        let bad = CovarianceMatrix::new(DMatrix::identity(4, 4) * 0.5).unwrap();
        assert!(matches!(complementary_output_cov(&bad, &ChannelModel::identity()), Err(Error::Domain(_))));
    }

    #[test]
    fn decomposition_residuals() {
        let vac = CovarianceMatrix::vacuum(1);
        let amp = ChannelModel::amplifier(1.5).unwrap();
        assert!(thermal_decomposition_residual(&amp, Some(1.0), &vac).unwrap() < 1e-14);
        let loss = ChannelModel::loss(0.4).unwrap();
        assert!(thermal_decomposition_residual(&loss, None, &vac).unwrap() < 1e-14);

        let unit = ChannelModel::amplifier(1.0).unwrap().with_env_photons(0.7).unwrap();
        assert!(thermal_decomposition_residual(&unit, Some(0.3), &vac).unwrap() < 1e-14);

        // both sides act as Λ -> G Λ + Y on vacuum; only the added noise differs
        let hot = amp.with_env_photons(0.2).unwrap();
        let g_aux = 2.0f64.sqrt() / (2.0 - 0.2 * 1.25f64).sqrt();
        let composed = 1.5 - 1.0 + (1.0 - 1.0 / g_aux) * (2.0 * 1.0 + 2.0);
        let thermal = 0.5 * 1.4;
        let r = thermal_decomposition_residual(&hot, Some(1.0), &vac).unwrap();
        assert!(close(r, (composed - thermal).abs(), 1e-12), "{r}");

        assert!(matches!(thermal_decomposition_residual(&hot, Some(0.1), &vac), Err(Error::Argument(_))));
        assert!(matches!(thermal_decomposition_residual(&hot, None, &vac), Err(Error::Argument(_))));
    }
}
