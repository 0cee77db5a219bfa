//! Covariance-matrix algebra for multimode Gaussian states.
//!
//! Quadratures are ordered `(q1, p1, q2, p2, ...)` with `q = a + a†` and
//! `p = -i(a - a†)`, so the vacuum covariance is the identity and a thermal
//! mode with mean photon number `N` has covariance `(2N + 1) I`.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symplectic eigenvalues this far below 1 are clamped to 1.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;
const SYMPLECTIC_TOLERANCE: f64 = 1e-10;
const LN2: f64 = std::f64::consts::LN_2;

/// Von Neumann entropy, in bits, of a thermal state with mean photon number `n`.
pub fn g_entropy(n: f64) -> Result<f64> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::domain(format!(
            "thermal entropy needs a finite photon number >= 0, got {n}"
        )));
    }
    Ok(thermal_entropy(n))
}

/// Unchecked `g`; callers guarantee `n >= 0`.
#[inline]
pub(crate) fn thermal_entropy(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    ((n + 1.0) * n.ln_1p() - n * n.ln()) / LN2
}

/// Alice's two-mode squeezed vacuum source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    n_s: f64,
    c_s: f64,
}

impl SourceSpec {
    pub fn new(n_s: f64) -> Result<Self> {
        if !(n_s >= 0.0) || !n_s.is_finite() {
            return Err(Error::domain(format!("source photon number must be >= 0, got {n_s}")));
        }
        Ok(Self { n_s, c_s: (n_s * (n_s + 1.0)).sqrt() })
    }

    /// Mean photon number per mode.
    pub fn n_s(&self) -> f64 {
        self.n_s
    }

    /// Signal-reference correlation amplitude `sqrt(N_S (N_S + 1))`.
    pub fn c_s(&self) -> f64 {
        self.c_s
    }
}

/// Real `2n x 2n` Wigner covariance matrix in vacuum-normalized units.
///
/// Construction symmetrizes the input. Physicality is not enforced here, so that
/// [`is_physical`] can report on arbitrary candidates; operations that need a
/// physical state (entropies, channel actions) check it themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::argument(format!(
                "covariance matrix must be square with even positive dimension, got {r}x{c}"
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("covariance matrix has non-finite entries"));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { matrix: sym })
    }

    pub(crate) fn from_matrix4(m: &Matrix4<f64>) -> Self {
        let d = DMatrix::from_fn(4, 4, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        Self { matrix: d }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    /// Product of thermal states with the given mean photon numbers.
    pub fn thermal(photons: &[f64]) -> Result<Self> {
        if photons.is_empty() {
            return Err(Error::argument("thermal state needs at least one mode"));
        }
        let mut m = DMatrix::zeros(2 * photons.len(), 2 * photons.len());
        for (k, &n) in photons.iter().enumerate() {
            if !(n >= 0.0) {
                return Err(Error::domain(format!("thermal photon number must be >= 0, got {n}")));
            }
            m[(2 * k, 2 * k)] = 2.0 * n + 1.0;
            m[(2 * k + 1, 2 * k + 1)] = 2.0 * n + 1.0;
        }
        Ok(Self { matrix: m })
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub(crate) fn to_matrix4(&self) -> Matrix4<f64> {
        debug_assert_eq!(self.matrix.nrows(), 4);
        Matrix4::from_fn(|i, j| self.matrix[(i, j)])
    }

    /// `2 x 2` block coupling modes `j` (rows) and `k` (columns).
    pub fn block(&self, j: usize, k: usize) -> Matrix2<f64> {
        Matrix2::from_fn(|r, c| self.matrix[(2 * j + r, 2 * k + c)])
    }

    pub fn direct_sum(&self, other: &CovarianceMatrix) -> CovarianceMatrix {
        let (a, b) = (self.matrix.nrows(), other.matrix.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.matrix);
        m.view_mut((a, a), (b, b)).copy_from(&other.matrix);
        CovarianceMatrix { matrix: m }
    }

    /// Reduced state on the listed modes, in the listed order.
    pub fn select_modes(&self, modes: &[usize]) -> Result<CovarianceMatrix> {
        let n = self.n_modes();
        if modes.is_empty() {
            return Err(Error::argument("mode selection is empty"));
        }
        if let Some(&bad) = modes.iter().find(|&&m| m >= n) {
            return Err(Error::argument(format!("mode index {bad} out of range for {n} modes")));
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let k = idx.len();
        let m = DMatrix::from_fn(k, k, |r, c| self.matrix[(idx[r], idx[c])]);
        Ok(CovarianceMatrix { matrix: m })
    }

    /// Mean photon number `<a_j† a_j>` of mode `j`.
    pub fn photon_number(&self, j: usize) -> f64 {
        let b = self.block(j, j);
        (b[(0, 0)] + b[(1, 1)] - 2.0) / 4.0
    }

    /// Phase-sensitive single-mode moment `<a_j²>`.
    pub fn squeezing_moment(&self, j: usize) -> Complex64 {
        let b = self.block(j, j);
        Complex64::new((b[(0, 0)] - b[(1, 1)]) / 4.0, b[(0, 1)] / 2.0)
    }

    /// Cross moments `(<a_j a_k>, <a_j† a_k>)` for `j != k`.
    pub fn cross_moments(&self, j: usize, k: usize) -> (Complex64, Complex64) {
        let b = self.block(j, k);
        let (qq, qp, pq, pp) = (b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]);
        let phase_sensitive = Complex64::new((qq - pp) / 4.0, (qp + pq) / 4.0);
        let phase_insensitive = Complex64::new((qq + pp) / 4.0, (qp - pq) / 4.0);
        (phase_sensitive, phase_insensitive)
    }

    /// Largest absolute deviation from symmetry.
    pub fn symmetry_residual(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }
}

/// Assembles a zero-mean Gaussian covariance matrix from its second moments.
#[derive(Debug, Clone)]
pub struct MomentBuilder {
    matrix: DMatrix<f64>,
}

impl MomentBuilder {
    /// Starts from vacuum on `n_modes` modes.
    pub fn new(n_modes: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    /// Sets `<a_j† a_j> = photons` and `<a_j²> = squeezing`.
    pub fn mode(mut self, j: usize, photons: f64, squeezing: Complex64) -> Self {
        let m = &mut self.matrix;
        m[(2 * j, 2 * j)] = 1.0 + 2.0 * photons + 2.0 * squeezing.re;
        m[(2 * j + 1, 2 * j + 1)] = 1.0 + 2.0 * photons - 2.0 * squeezing.re;
        m[(2 * j, 2 * j + 1)] = 2.0 * squeezing.im;
        m[(2 * j + 1, 2 * j)] = 2.0 * squeezing.im;
        self
    }

    /// Sets `<a_j a_k> = phase_sensitive` and `<a_j† a_k> = phase_insensitive`.
    pub fn cross(mut self, j: usize, k: usize, phase_sensitive: Complex64, phase_insensitive: Complex64) -> Self {
        let (a, b) = (phase_sensitive, phase_insensitive);
        let block = Matrix2::new(
            2.0 * (a.re + b.re),
            2.0 * (a.im + b.im),
            2.0 * (a.im - b.im),
            2.0 * (b.re - a.re),
        );
        for r in 0..2 {
            for c in 0..2 {
                self.matrix[(2 * j + r, 2 * k + c)] = block[(r, c)];
                self.matrix[(2 * k + c, 2 * j + r)] = block[(r, c)];
            }
        }
        self
    }

    pub fn build(self) -> CovarianceMatrix {
        CovarianceMatrix { matrix: self.matrix }
    }
}

/// Two-mode squeezed vacuum with mean photon number `N_S` per mode.
pub fn tmsv_covariance(src: &SourceSpec) -> CovarianceMatrix {
    let a = 2.0 * src.n_s() + 1.0;
    let c = 2.0 * src.c_s();
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            a, 0.0, c, 0.0, //
            0.0, a, 0.0, -c, //
            c, 0.0, a, 0.0, //
            0.0, -c, 0.0, a,
        ],
    );
    CovarianceMatrix { matrix: m }
}

/// Standard symplectic form on `n` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        o[(2 * k, 2 * k + 1)] = 1.0;
        o[(2 * k + 1, 2 * k)] = -1.0;
    }
    o
}

/// Real symplectic matrix acting on the quadratures of a set of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::argument(format!("symplectic matrix must be 2n x 2n, got {r}x{c}")));
        }
        let o = symplectic_form(r / 2);
        let residual = (&matrix * &o * matrix.transpose() - &o).amax();
        if residual > SYMPLECTIC_TOLERANCE * matrix.amax().max(1.0).powi(2) {
            return Err(Error::domain(format!("matrix is not symplectic (residual {residual:e})")));
        }
        Ok(Self { matrix })
    }

    fn trusted(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self::trusted(DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `a -> exp(i theta) a` on one mode.
    pub fn phase_shift(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::trusted(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    /// Single-mode squeezer: `q -> exp(-r) q`, `p -> exp(r) p`.
    pub fn squeezer(r: f64) -> Self {
        Self::trusted(DMatrix::from_row_slice(2, 2, &[(-r).exp(), 0.0, 0.0, r.exp()]))
    }

    /// Two-mode beam splitter with power transmissivity `eta`:
    /// `a1' = sqrt(eta) a1 + sqrt(1-eta) a2`, `a2' = sqrt(1-eta) a1 - sqrt(eta) a2`.
    pub fn beam_splitter(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::domain(format!("beam splitter transmissivity must be in [0,1], got {eta}")));
        }
        let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
        let mut m = DMatrix::zeros(4, 4);
        for quad in 0..2 {
            m[(quad, quad)] = t;
            m[(quad, 2 + quad)] = r;
            m[(2 + quad, quad)] = r;
            m[(2 + quad, 2 + quad)] = -t;
        }
        Ok(Self::trusted(m))
    }

    /// Two-mode squeezer with gain `g >= 1`:
    /// `a1' = sqrt(g) a1 + sqrt(g-1) a2†`, `a2' = sqrt(g-1) a1† + sqrt(g) a2`.
    pub fn two_mode_squeezer(gain: f64) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::domain(format!("two-mode squeezer gain must be >= 1, got {gain}")));
        }
        let (a, b) = (gain.sqrt(), (gain - 1.0).sqrt());
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                a, 0.0, b, 0.0, //
                0.0, a, 0.0, -b, //
                b, 0.0, a, 0.0, //
                0.0, -b, 0.0, a,
            ],
        );
        Ok(Self::trusted(m))
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &SymplecticTransform) -> Result<SymplecticTransform> {
        if self.n_modes() != next.n_modes() {
            return Err(Error::argument("cannot compose symplectic maps of different sizes"));
        }
        Ok(Self::trusted(&next.matrix * &self.matrix))
    }

    /// Embeds this transform on `modes` of an `n_modes`-mode system.
    pub fn embed(&self, n_modes: usize, modes: &[usize]) -> Result<SymplecticTransform> {
        check_subset(n_modes, modes, self.n_modes())?;
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let idx: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        for (r, &ir) in idx.iter().enumerate() {
            for (c, &ic) in idx.iter().enumerate() {
                m[(ir, ic)] = self.matrix[(r, c)];
            }
        }
        Ok(Self::trusted(m))
    }
}

fn check_subset(n_modes: usize, modes: &[usize], expected: usize) -> Result<()> {
    if modes.len() != expected {
        return Err(Error::argument(format!(
            "transform acts on {expected} modes but {} were given",
            modes.len()
        )));
    }
    for (i, &m) in modes.iter().enumerate() {
        if m >= n_modes {
            return Err(Error::argument(format!("mode index {m} out of range for {n_modes} modes")));
        }
        if modes[..i].contains(&m) {
            return Err(Error::argument(format!("mode index {m} repeated")));
        }
    }
    Ok(())
}

/// Applies `S` to the listed modes: `Λ -> S Λ Sᵀ` with `S` embedded as identity elsewhere.
pub fn apply_symplectic(
    cov: &CovarianceMatrix,
    s: &SymplecticTransform,
    modes: &[usize],
) -> Result<CovarianceMatrix> {
    let n = cov.n_modes();
    check_subset(n, modes, s.n_modes())?;
    let idx: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
    let k = idx.len();
    let dim = 2 * n;
    let sm = &s.matrix;

    // rows: M = S_embedded * Λ only changes the rows in idx
    let mut m = cov.matrix.clone();
    for (r, &ir) in idx.iter().enumerate() {
        for col in 0..dim {
            let mut acc = 0.0;
            for c in 0..k {
                acc += sm[(r, c)] * cov.matrix[(idx[c], col)];
            }
            m[(ir, col)] = acc;
        }
    }
    // columns: M * S_embeddedᵀ only changes the columns in idx
    let mut out = m.clone();
    for row in 0..dim {
        for (r, &ir) in idx.iter().enumerate() {
            let mut acc = 0.0;
            for c in 0..k {
                acc += m[(row, idx[c])] * sm[(r, c)];
            }
            out[(row, ir)] = acc;
        }
    }
    CovarianceMatrix::new(out)
}

/// Symplectic eigenvalues in descending order, clamped up to 1 within tolerance.
///
/// Two-mode states use the closed-form symplectic invariants unless the two
/// eigenvalues nearly coincide; other states use the symmetric eigenproblem of
/// `Λ^{1/2} Ω Λ^{1/2}`. Matrices that are not positive definite fall back to the
/// spectrum of `ΩΛ`.
pub fn symplectic_eigenvalues(cov: &CovarianceMatrix) -> Result<Vec<f64>> {
    let fast = match cov.n_modes() {
        1 => {
            let det = cov.matrix.determinant();
            (det > 0.0).then(|| vec![det.sqrt()])
        }
        2 => two_mode_nu(&cov.to_matrix4()).map(|(p, m)| vec![p, m]),
        _ => None,
    };
    let mut nu = match fast.or_else(|| williamson(&cov.matrix)) {
        Some(v) => v,
        None => symplectic_eigenvalues_spectral(cov)?,
    };
    for v in nu.iter_mut() {
        *v = clamp_unit(*v);
    }
    Ok(nu)
}

/// Symplectic spectrum from `K Kᵀ` with `K = Λ^{1/2} Ω Λ^{1/2}`; `None` unless `Λ > 0`.
fn williamson(m: &DMatrix<f64>) -> Option<Vec<f64>> {
    let n = m.nrows() / 2;
    let eig = nalgebra::linalg::SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let root_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * root_diag * eig.eigenvectors.transpose();
    let k = &root * symplectic_form(n) * &root;
    let p = &k * k.transpose();
    let mut sq: Vec<f64> = nalgebra::linalg::SymmetricEigen::new((&p + p.transpose()) * 0.5)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    Some(sq.chunks(2).map(|c| (0.5 * (c[0] + c[1])).max(0.0).sqrt()).collect())
}

/// Symplectic eigenvalues from the eigenvalues of `ΩΛ` (no closed-form shortcut).
pub fn symplectic_eigenvalues_spectral(cov: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = cov.n_modes();
    let m = symplectic_form(n) * &cov.matrix;
    let scale = cov.matrix.amax().max(1.0);
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or_else(|| {
        Error::numerical(format!(
            "eigensolve of ΩΛ did not converge ({n} modes, max |entry| {scale:e})"
        ))
    })?;
    let mut mods: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    mods.sort_by(|a, b| b.total_cmp(a));
    let mut nu = Vec::with_capacity(n);
    for pair in mods.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a - b).abs() > PHYSICALITY_TOLERANCE * a.max(1.0) * 1e3 {
            return Err(Error::numerical(format!(
                "unpaired spectrum of ΩΛ: {a} vs {b} (max |entry| {scale:e})"
            )));
        }
        nu.push(clamp_unit(0.5 * (a + b)));
    }
    Ok(nu)
}

#[inline]
fn clamp_unit(v: f64) -> f64 {
    if v < 1.0 && v >= 1.0 - PHYSICALITY_TOLERANCE {
        1.0
    } else {
        v
    }
}

/// `(ν+, ν-)` of a two-mode covariance from `Δ = det A + det B + 2 det C` and `det Λ`.
///
/// `None` when `det Λ <= 0` or when the eigenvalues nearly coincide, where the
/// discriminant loses half the significant digits.
#[inline]
pub(crate) fn two_mode_nu(m: &Matrix4<f64>) -> Option<(f64, f64)> {
    let det2 = |r: usize, c: usize| m[(r, c)] * m[(r + 1, c + 1)] - m[(r, c + 1)] * m[(r + 1, c)];
    let delta = det2(0, 0) + det2(2, 2) + 2.0 * det2(0, 2);
    let det = m.determinant();
    let disc = delta * delta - 4.0 * det;
    if !(det > 0.0) || !(delta > 0.0) || !(disc > 1e-6 * delta * delta) {
        return None;
    }
    let plus_sq = 0.5 * (delta + disc.sqrt());
    Some((plus_sq.sqrt(), (det / plus_sq).sqrt()))
}

/// `two_mode_nu` with the well-conditioned fallback; NaN for matrices that are not positive definite.
#[inline]
pub(crate) fn two_mode_nu_robust(m: &Matrix4<f64>) -> (f64, f64) {
    if let Some(pair) = two_mode_nu(m) {
        return pair;
    }
    let d = DMatrix::from_fn(4, 4, |i, j| m[(i, j)]);
    match williamson(&d) {
        Some(v) => (v[0], v[1]),
        None => (f64::NAN, f64::NAN),
    }
}

/// Entropy contribution `g((ν - 1)/2)` of one symplectic eigenvalue.
#[inline]
pub(crate) fn nu_entropy(nu: f64) -> f64 {
    thermal_entropy(0.5 * (nu - 1.0))
}

/// Von Neumann entropy in bits: `Σ_k g((ν_k - 1)/2)`.
pub fn state_entropy(cov: &CovarianceMatrix) -> Result<f64> {
    let nu = symplectic_eigenvalues(cov)?;
    entropy_from_eigenvalues(&nu)
}

pub(crate) fn entropy_from_eigenvalues(nu: &[f64]) -> Result<f64> {
    if let Some(&bad) = nu.iter().find(|&&v| v < 1.0) {
        return Err(Error::domain(format!("unphysical state: symplectic eigenvalue {bad} < 1")));
    }
    Ok(nu.iter().map(|&v| nu_entropy(v)).sum())
}

/// Outcome of a physicality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub physical: bool,
    pub min_eigenvalue: f64,
}

/// Physical iff `Λ` is positive definite and every symplectic eigenvalue is at least `1 - tol`.
/// Indefinite matrices can have `ΩΛ` spectra above 1, so definiteness is checked separately.
pub fn is_physical(cov: &CovarianceMatrix) -> Physicality {
    match symplectic_eigenvalues(cov) {
        Ok(nu) => {
            let min = nu.iter().copied().fold(f64::INFINITY, f64::min);
            let definite = cov.matrix.clone().cholesky().is_some();
            Physicality { physical: definite && min >= 1.0 - PHYSICALITY_TOLERANCE, min_eigenvalue: min }
        }
        Err(_) => Physicality { physical: false, min_eigenvalue: f64::NAN },
    }
}
