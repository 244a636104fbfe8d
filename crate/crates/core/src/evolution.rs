//! Unitary evolution of pure states under a Hermitian generator, arbitrary
//! phase-shifted evolution, mixed-state evolution, and canonical purification.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::linalg::{self, inner, spectral_function, vec_norm, ComplexMatrix, Config, Generator};
use crate::{Error, Result};

/// Normalized pure state in a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Accepts amplitudes already normalized to unit norm within `1e-10`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes arbitrary finite amplitudes.
    pub fn from_unnormalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm = vec_norm(&amplitudes);
        if norm <= 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub(crate) fn new_unchecked(amplitudes: Vec<Complex64>) -> Self {
        debug_assert!((vec_norm(&amplitudes) - 1.0).abs() <= 1e-10);
        Self { amplitudes }
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[index] = Complex64::ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Projector `|self><self|`.
    pub fn projector(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, self.amplitudes[i] * self.amplitudes[j].conj());
            }
        }
        m
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    density: ComplexMatrix,
}

impl MixedState {
    pub fn new(density: ComplexMatrix) -> Result<Self> {
        let scale = density.max_abs().max(1.0);
        if density.hermiticity_residual() > 1e-12 * scale {
            return Err(Error::NotDensityMatrix("not Hermitian".into()));
        }
        let trace = density.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::NotDensityMatrix(format!("trace {trace} != 1")));
        }
        let spectrum =
            linalg::eig_hermitian(&density).map_err(|e| Error::NotDensityMatrix(e.to_string()))?;
        if spectrum.k_min() < -1e-10 {
            return Err(Error::NotDensityMatrix(format!(
                "negative eigenvalue {}",
                spectrum.k_min()
            )));
        }
        Ok(Self { density })
    }

    pub(crate) fn new_unchecked(density: ComplexMatrix) -> Self {
        Self { density }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            density: psi.projector(),
        }
    }

    /// Convex mixture of pure states; weights are renormalized.
    pub fn from_mixture(components: &[(f64, PureState)]) -> Result<Self> {
        let dim = components
            .first()
            .ok_or_else(|| Error::NotDensityMatrix("empty mixture".into()))?
            .1
            .dim();
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if total <= 0.0 || components.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::NotDensityMatrix("invalid mixture weights".into()));
        }
        let mut density = ComplexMatrix::zeros(dim);
        for (w, psi) in components {
            check_dims(dim, psi.dim())?;
            let p = psi.projector();
            for i in 0..dim {
                for j in 0..dim {
                    let val = density.get(i, j) + (w / total) * p.get(i, j);
                    density.set(i, j, val);
                }
            }
        }
        Ok(Self { density })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut density = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            density.set(i, i, Complex64::new(1.0 / dim as f64, 0.0));
        }
        Self { density }
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }
}

/// Phase freedom `e^{i(h(K) + g(theta))}` applied on top of the plain
/// evolution. `h` acts eigenvalue-wise on the generator, `g` depends on the
/// parameter only; either way overlap magnitudes are unchanged. `kappa`
/// records the constant for the choice `g(theta) = kappa * theta / hbar`.
#[derive(Clone)]
pub struct PhaseShift {
    h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    kappa: f64,
}

impl PhaseShift {
    pub fn new(
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            h: Arc::new(h),
            g: Arc::new(g),
            kappa: 0.0,
        }
    }

    /// No rephasing: `h = g = 0`.
    pub fn none() -> Self {
        Self::new(|_| 0.0, |_| 0.0)
    }

    /// The choice `g(theta) = kappa * theta / hbar`, which turns the plain
    /// evolution into one generated by `K - kappa`.
    pub fn constant_shift(kappa: f64, hbar: f64) -> Self {
        Self {
            h: Arc::new(|_| 0.0),
            g: Arc::new(move |theta| kappa * theta / hbar),
            kappa,
        }
    }

    /// `constant_shift` at the smallest eigenvalue of the generator.
    pub fn ground_shift(g: &Generator, hbar: f64) -> Self {
        Self::constant_shift(g.k_min(), hbar)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn h(&self, lambda: f64) -> f64 {
        (self.h)(lambda)
    }

    pub fn g(&self, theta: f64) -> f64 {
        (self.g)(theta)
    }
}

impl fmt::Debug for PhaseShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseShift")
            .field("kappa", &self.kappa)
            .finish_non_exhaustive()
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// `|psi_theta> = exp(-i K theta / hbar) |psi_0>`, evaluated in the
/// eigenbasis of the generator.
pub fn evolve(g: &Generator, psi0: &PureState, theta: f64, cfg: &Config) -> Result<PureState> {
    check_dims(g.dim(), psi0.dim())?;
    let coefficients = g.eigenbasis_coefficients(psi0.amplitudes());
    let d = g.dim();
    let mut amplitudes = vec![Complex64::ZERO; d];
    for (i, c) in coefficients.iter().enumerate() {
        let phase = (-Complex64::i() * g.eigenvalue(i) * theta / cfg.hbar).exp();
        let weight = phase * c;
        let v = g.eigenvector(i);
        for (a, vi) in amplitudes.iter_mut().zip(v) {
            *a += weight * vi;
        }
    }
    Ok(PureState::new_unchecked(amplitudes))
}

/// Phase-shifted evolution
/// `|psi'_theta> = e^{i(h(K) + g(theta))} exp(-i K theta / hbar) |psi_0>`.
///
/// With `h = 0` and `g(theta) = k_min * theta / hbar` this equals
/// `exp(-i (K - k_min) theta / hbar) |psi_0>`.
pub fn evolve_shifted(
    g: &Generator,
    psi0: &PureState,
    theta: f64,
    shift: &PhaseShift,
    cfg: &Config,
) -> Result<PureState> {
    check_dims(g.dim(), psi0.dim())?;
    let coefficients = g.eigenbasis_coefficients(psi0.amplitudes());
    let d = g.dim();
    let global = (Complex64::i() * shift.g(theta)).exp();
    let mut amplitudes = vec![Complex64::ZERO; d];
    for (i, c) in coefficients.iter().enumerate() {
        let lambda = g.eigenvalue(i);
        let phase = (Complex64::i() * (shift.h(lambda) - lambda * theta / cfg.hbar)).exp();
        let weight = global * phase * c;
        let v = g.eigenvector(i);
        for (a, vi) in amplitudes.iter_mut().zip(v) {
            *a += weight * vi;
        }
    }
    Ok(PureState::new_unchecked(amplitudes))
}

/// `rho_theta = U rho_0 U^dagger` with `U = exp(-i K theta / hbar)`.
pub fn evolve_mixed(
    g: &Generator,
    rho0: &MixedState,
    theta: f64,
    cfg: &Config,
) -> Result<MixedState> {
    check_dims(g.dim(), rho0.dim())?;
    let u = spectral_function(g, |x| (-Complex64::i() * x * theta / cfg.hbar).exp());
    let rotated = u.mul(rho0.density())?.mul(&u.adjoint())?;
    Ok(MixedState::new_unchecked(rotated))
}

/// Eigenvalues below this are dropped from the purification sum.
const PURIFY_CUTOFF: f64 = 1e-14;

/// Canonical purification `|Psi> = sum_i sqrt(lambda_i) |i> (x) |i>` in the
/// eigenbasis of `rho`, eigenvalues descending (ties keep the ascending
/// eigenvector order). The result lives in dimension `d^2`; tracing out the
/// second factor recovers `rho`.
pub fn purify(rho: &MixedState) -> Result<PureState> {
    let d = rho.dim();
    let spectrum =
        linalg::eig_hermitian(rho.density()).map_err(|e| Error::NotDensityMatrix(e.to_string()))?;
    if spectrum.k_min() < -1e-10 {
        return Err(Error::NotDensityMatrix(format!(
            "negative eigenvalue {}",
            spectrum.k_min()
        )));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        spectrum
            .eigenvalue(j)
            .partial_cmp(&spectrum.eigenvalue(i))
            .unwrap()
    });

    let mut amplitudes = vec![Complex64::ZERO; d * d];
    for &idx in &order {
        // Round-off can push eigenvalues slightly outside [0, 1].
        let lambda = spectrum.eigenvalue(idx).clamp(0.0, 1.0);
        if lambda < PURIFY_CUTOFF {
            continue;
        }
        let weight = lambda.sqrt();
        let v = spectrum.eigenvector(idx);
        for a in 0..d {
            for b in 0..d {
                amplitudes[a * d + b] += weight * v[a] * v[b];
            }
        }
    }
    PureState::from_unnormalized(amplitudes)
}

/// Lifts the generator to the purified space as `K (x) I`. The spectral
/// decomposition is built directly from the tensor structure: each
/// eigenvalue of `K` appears with multiplicity `d`.
pub fn lift_generator(g: &Generator) -> Generator {
    let d = g.dim();
    let matrix = g.matrix().kron(&ComplexMatrix::identity(d));
    let mut eigenvalues = Vec::with_capacity(d * d);
    let mut eigenvectors = Vec::with_capacity(d * d);
    for i in 0..d {
        let lambda = g.eigenvalue(i);
        let v = g.eigenvector(i);
        for b in 0..d {
            let mut vec = vec![Complex64::ZERO; d * d];
            for (a, va) in v.iter().enumerate() {
                vec[a * d + b] = *va;
            }
            eigenvalues.push(lambda);
            eigenvectors.push(vec);
        }
    }
    Generator::from_parts(matrix, eigenvalues, eigenvectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, random_hermitian, random_pure_state};
    use std::f64::consts::FRAC_PI_2;

    fn qubit() -> Generator {
        eig_hermitian(&ComplexMatrix::from_diag(&[-1.0, 1.0])).unwrap()
    }

    fn plus_state() -> PureState {
        PureState::from_unnormalized(vec![Complex64::ONE, Complex64::ONE]).unwrap()
    }

    /// Partial trace over the second factor of a `d^2`-dimensional pure
    /// state; test-side oracle for the purification.
    fn partial_trace(psi: &PureState, d: usize) -> ComplexMatrix {
        assert_eq!(psi.dim(), d * d);
        let amp = psi.amplitudes();
        let mut rho = ComplexMatrix::zeros(d);
        for a in 0..d {
            for b in 0..d {
                let mut acc = Complex64::ZERO;
                for c in 0..d {
                    acc += amp[a * d + c] * amp[b * d + c].conj();
                }
                rho.set(a, b, acc);
            }
        }
        rho
    }

    fn max_entry_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                worst = worst.max((a.get(i, j) - b.get(i, j)).norm());
            }
        }
        worst
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let cfg = Config::default();
        let psi = plus_state();
        let out = evolve(&qubit(), &psi, 0.0, &cfg).unwrap();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() <= 1e-14);
        }
    }

    #[test]
    fn evolve_qubit_closed_form() {
        // exp(-i K pi/2) (1,1)/sqrt(2) = (i, -i)/sqrt(2) for K = diag(-1, 1).
        let cfg = Config::default();
        let out = evolve(&qubit(), &plus_state(), FRAC_PI_2, &cfg).unwrap();
        let w = 1.0 / 2.0f64.sqrt();
        assert!((out.amplitudes()[0] - Complex64::new(0.0, w)).norm() <= 1e-12);
        assert!((out.amplitudes()[1] - Complex64::new(0.0, -w)).norm() <= 1e-12);
    }

    #[test]
    fn evolve_eigenstate_gains_global_phase_only() {
        let cfg = Config::default();
        let g = random_hermitian(4, 5);
        let psi = PureState::new(g.eigenvector(0).to_vec()).unwrap();
        let theta = 0.83;
        let out = evolve(&g, &psi, theta, &cfg).unwrap();
        let phase = (-Complex64::i() * g.k_min() * theta).exp();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - phase * b).norm() <= 1e-10);
        }
    }

    #[test]
    fn evolve_preserves_norm_and_composes() {
        let cfg = Config::default();
        for seed in 0..20u64 {
            let g = random_hermitian(3 + (seed % 4) as usize, seed);
            let psi = random_pure_state(g.dim(), seed + 1000);
            let a = evolve(&g, &psi, 0.7, &cfg).unwrap();
            assert!((vec_norm(a.amplitudes()) - 1.0).abs() <= 1e-10);
            let b = evolve(&g, &a, 0.55, &cfg).unwrap();
            let direct = evolve(&g, &psi, 1.25, &cfg).unwrap();
            for (x, y) in b.amplitudes().iter().zip(direct.amplitudes()) {
                assert!((x - y).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn evolve_rejects_dimension_mismatch() {
        let cfg = Config::default();
        let g = qubit();
        let psi = PureState::basis(3, 0);
        assert!(matches!(
            evolve(&g, &psi, 0.1, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn shifted_with_zero_phase_matches_plain() {
        let cfg = Config::default();
        let g = random_hermitian(3, 8);
        let psi = random_pure_state(3, 9);
        let plain = evolve(&g, &psi, 0.4, &cfg).unwrap();
        let shifted = evolve_shifted(&g, &psi, 0.4, &PhaseShift::none(), &cfg).unwrap();
        for (a, b) in shifted.amplitudes().iter().zip(plain.amplitudes()) {
            assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn shifted_ground_choice_closed_form() {
        // K = diag(-1, 1), kappa = k_min = -1: the shifted evolution is
        // exp(-i (K + 1) theta) = diag(1, e^{-2 i theta}).
        let cfg = Config::default();
        let g = qubit();
        let shift = PhaseShift::ground_shift(&g, cfg.hbar);
        assert_eq!(shift.kappa(), -1.0);
        let out = evolve_shifted(&g, &plus_state(), FRAC_PI_2, &shift, &cfg).unwrap();
        let w = 1.0 / 2.0f64.sqrt();
        assert!((out.amplitudes()[0] - Complex64::new(w, 0.0)).norm() <= 1e-12);
        assert!((out.amplitudes()[1] - Complex64::new(-w, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn shifted_ground_choice_satisfies_generalized_schrodinger() {
        // i hbar d/dtheta |psi'> = (K - k_min) |psi'>, checked by a central
        // difference.
        let cfg = Config::default();
        let g = random_hermitian(4, 21);
        let psi = random_pure_state(4, 22);
        let shift = PhaseShift::ground_shift(&g, cfg.hbar);
        let theta = 0.37;
        let h = 1e-6;
        let fwd = evolve_shifted(&g, &psi, theta + h, &shift, &cfg).unwrap();
        let bwd = evolve_shifted(&g, &psi, theta - h, &shift, &cfg).unwrap();
        let mid = evolve_shifted(&g, &psi, theta, &shift, &cfg).unwrap();
        let shifted_k = spectral_function(&g, |x| Complex64::new(x - g.k_min(), 0.0));
        let rhs = shifted_k.mul_vec(mid.amplitudes()).unwrap();
        for (i, rhs_i) in rhs.iter().enumerate() {
            let lhs =
                Complex64::i() * cfg.hbar * (fwd.amplitudes()[i] - bwd.amplitudes()[i]) / (2.0 * h);
            assert!((lhs - rhs_i).norm() <= 1e-8, "component {i}");
        }
    }

    #[test]
    fn phase_shift_preserves_overlap_magnitudes() {
        // 100 random affine (h, g) pairs leave |<psi'_0|psi'_theta>|
        // unchanged.
        let cfg = Config::default();
        let g = random_hermitian(4, 31);
        let psi = random_pure_state(4, 32);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        for trial in 0..100 {
            let (a, b): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (c, e): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let shift = PhaseShift::new(move |l| a * l + b, move |t| c * t + e);
            let theta = rng.random_range(0.0..3.0);
            let plain0 = evolve(&g, &psi, 0.0, &cfg).unwrap();
            let plain = evolve(&g, &psi, theta, &cfg).unwrap();
            let shifted0 = evolve_shifted(&g, &psi, 0.0, &shift, &cfg).unwrap();
            let shifted = evolve_shifted(&g, &psi, theta, &shift, &cfg).unwrap();
            let lhs = shifted0.inner(&shifted).unwrap().norm();
            let rhs = plain0.inner(&plain).unwrap().norm();
            assert!((lhs - rhs).abs() <= 1e-12, "trial {trial}");
        }
    }

    #[test]
    fn mixed_evolution_trivial_and_pure_consistency() {
        let cfg = Config::default();
        let g = random_hermitian(3, 40);
        let psi = random_pure_state(3, 41);
        let rho = MixedState::from_pure(&psi);

        let frozen = evolve_mixed(&g, &rho, 0.0, &cfg).unwrap();
        assert!(max_entry_diff(frozen.density(), rho.density()) <= 1e-12);

        let theta = 0.9;
        let rho_t = evolve_mixed(&g, &rho, theta, &cfg).unwrap();
        let psi_t = evolve(&g, &psi, theta, &cfg).unwrap();
        assert!(max_entry_diff(rho_t.density(), &psi_t.projector()) <= 1e-10);
        assert!((rho_t.density().trace().re - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn maximally_mixed_is_fixed_point() {
        let cfg = Config::default();
        let g = random_hermitian(4, 50);
        let rho = MixedState::maximally_mixed(4);
        let rho_t = evolve_mixed(&g, &rho, 1.7, &cfg).unwrap();
        assert!(max_entry_diff(rho_t.density(), rho.density()) <= 1e-10);
    }

    #[test]
    fn purify_rank_one() {
        let psi = random_pure_state(3, 60);
        let rho = MixedState::from_pure(&psi);
        let purified = purify(&rho).unwrap();
        assert_eq!(purified.dim(), 9);
        assert!(max_entry_diff(&partial_trace(&purified, 3), rho.density()) <= 1e-8);
    }

    #[test]
    fn purify_maximally_mixed_qubit_gives_bell_pair() {
        let rho = MixedState::maximally_mixed(2);
        let purified = purify(&rho).unwrap();
        let w = 1.0 / 2.0f64.sqrt();
        assert!((purified.amplitudes()[0] - Complex64::new(w, 0.0)).norm() <= 1e-12);
        assert!(purified.amplitudes()[1].norm() <= 1e-12);
        assert!(purified.amplitudes()[2].norm() <= 1e-12);
        assert!((purified.amplitudes()[3] - Complex64::new(w, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn purify_recovers_random_mixture() {
        let states: Vec<(f64, PureState)> = (0..3)
            .map(|k| (1.0 + k as f64, random_pure_state(3, 70 + k)))
            .collect();
        let rho = MixedState::from_mixture(&states).unwrap();
        let purified = purify(&rho).unwrap();
        assert!(max_entry_diff(&partial_trace(&purified, 3), rho.density()) <= 1e-8);
    }

    #[test]
    fn purify_rejects_non_density() {
        let m = ComplexMatrix::from_diag(&[0.9, 0.3]);
        assert!(MixedState::new(m).is_err());
    }

    #[test]
    fn lift_moments_match_traces() {
        let g = qubit();
        let rho = MixedState::maximally_mixed(2);
        let purified = purify(&rho).unwrap();
        let lifted = lift_generator(&g);
        let k_psi = lifted.matrix().mul_vec(purified.amplitudes()).unwrap();
        let first = inner(purified.amplitudes(), &k_psi).re;
        assert!(first.abs() <= 1e-12);

        let g2 = eig_hermitian(&ComplexMatrix::from_diag(&[0.0, 1.0])).unwrap();
        let mut diag = ComplexMatrix::zeros(2);
        diag.set(0, 0, Complex64::new(0.25, 0.0));
        diag.set(1, 1, Complex64::new(0.75, 0.0));
        let rho2 = MixedState::new(diag).unwrap();
        let purified2 = purify(&rho2).unwrap();
        let lifted2 = lift_generator(&g2);
        let k_psi2 = lifted2.matrix().mul_vec(purified2.amplitudes()).unwrap();
        let mean = inner(purified2.amplitudes(), &k_psi2).re;
        let trace_oracle = rho2.density().mul(g2.matrix()).unwrap().trace().re;
        assert!((mean - 0.75).abs() <= 1e-10);
        assert!((mean - trace_oracle).abs() <= 1e-10);
    }

    #[test]
    fn lift_spectrum_has_multiplicity_d() {
        let g = random_hermitian(3, 80);
        let lifted = lift_generator(&g);
        assert_eq!(lifted.dim(), 9);
        for (i, lambda) in g.eigenvalues().iter().enumerate() {
            for b in 0..3 {
                assert_eq!(lifted.eigenvalue(3 * i + b), *lambda);
            }
        }
        // Tensor eigenvectors stay orthonormal.
        for i in 0..9 {
            for j in 0..9 {
                let dot = inner(lifted.eigenvector(i), lifted.eigenvector(j));
                let expected = if i == j {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                assert!((dot - expected).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn lift_second_moment_matches_trace() {
        let g = random_hermitian(3, 90);
        let states: Vec<(f64, PureState)> = (0..3)
            .map(|k| (1.0, random_pure_state(3, 91 + k)))
            .collect();
        let rho = MixedState::from_mixture(&states).unwrap();
        let purified = purify(&rho).unwrap();
        let lifted = lift_generator(&g);
        let k_psi = lifted.matrix().mul_vec(purified.amplitudes()).unwrap();
        let second = inner(&k_psi, &k_psi).re;
        let k2 = g.matrix().mul(g.matrix()).unwrap();
        let oracle = rho.density().mul(&k2).unwrap().trace().re;
        assert!((second - oracle).abs() <= 1e-10);
    }
}
