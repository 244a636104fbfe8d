//! Overlap, Wootters distance, statistical distance, their derivatives in the
//! evolution parameter, and the Fubini-Study path length.
//!
//! The statistical distance between pure states is twice the Wootters angle,
//! `s = 2 arccos |<psi_0|psi_theta>|`, with `s` in `[0, pi]`. Its analytic
//! rate is singular at both ends of that interval, so sweeps record a central
//! finite difference everywhere and the analytic form only on the admissible
//! band `(sing_margin, pi - sing_margin)`.

use num_complex::Complex64;

use crate::evolution::{evolve, PureState};
use crate::linalg::{Config, Generator};
use crate::{Error, Result};

/// Clamp to `[0, 1]` and absorb round-off at unit overlap: one ulp below 1
/// would otherwise pass through arccos as ~1e-8 of spurious distance, which
/// the finite-difference step amplifies into percent-level rate noise for
/// stationary states.
fn clamp_overlap(x: f64) -> f64 {
    let ov = x.clamp(0.0, 1.0);
    if ov > 1.0 - 1e-15 {
        1.0
    } else {
        ov
    }
}

/// Overlap magnitude `|<a|b>|`, clamped to `[0, 1]`.
pub fn overlap(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(clamp_overlap(a.inner(b)?.norm()))
}

/// Wootters angle `arccos |<a|b>|` in `[0, pi/2]`.
pub fn wootters_distance(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(overlap(a, b)?.acos())
}

/// Statistical distance `2 arccos |<a|b>|` in `[0, pi]`.
pub fn statistical_distance(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(2.0 * wootters_distance(a, b)?)
}

/// Statistical distance between `psi_0` and its evolution at `theta`.
pub fn distance_at(g: &Generator, psi0: &PureState, theta: f64, cfg: &Config) -> Result<f64> {
    statistical_distance(psi0, &evolve(g, psi0, theta, cfg)?)
}

/// Spectral weights of a `(generator, state)` pair, precomputed once so that
/// overlap, distance, and rate evaluations cost `O(d)` per theta. Sweeps and
/// campaigns evaluate thousands of parameter values per instance through
/// this.
#[derive(Debug, Clone)]
pub struct OverlapProfile {
    /// `(lambda_i, |<v_i|psi_0>|^2)` pairs.
    weights: Vec<(f64, f64)>,
    k_min: f64,
}

impl OverlapProfile {
    pub fn new(g: &Generator, psi0: &PureState) -> Result<Self> {
        Ok(Self {
            weights: g.spectral_weights(psi0)?,
            k_min: g.k_min(),
        })
    }

    fn z(&self, theta: f64, hbar: f64) -> Complex64 {
        self.weights
            .iter()
            .map(|(lambda, p)| p * (-Complex64::i() * lambda * theta / hbar).exp())
            .sum()
    }

    /// `|<psi_0|psi_theta>|`, clamped to `[0, 1]`.
    pub fn overlap(&self, theta: f64, hbar: f64) -> f64 {
        clamp_overlap(self.z(theta, hbar).norm())
    }

    /// Statistical distance at `theta`.
    pub fn distance(&self, theta: f64, hbar: f64) -> f64 {
        2.0 * self.overlap(theta, hbar).acos()
    }

    /// Central finite difference of the statistical distance.
    pub fn rate_fd(&self, theta: f64, cfg: &Config) -> f64 {
        let h = cfg.fd_step;
        (self.distance(theta + h, cfg.hbar) - self.distance(theta - h, cfg.hbar)) / (2.0 * h)
    }

    /// Exact derivative of `theta -> |<psi_0|psi_theta>|`:
    /// `Im(<psi_0|K|psi_theta> <psi_theta|psi_0>) / (hbar |z|)`.
    /// Fails when `|z| <= 1e-10`.
    pub fn overlap_derivative(&self, theta: f64, hbar: f64) -> Result<f64> {
        let mut z = Complex64::ZERO;
        let mut kz = Complex64::ZERO;
        for (lambda, p) in &self.weights {
            let phase = (-Complex64::i() * lambda * theta / hbar).exp();
            z += p * phase;
            kz += lambda * p * phase;
        }
        let magnitude = z.norm();
        if magnitude <= 1e-10 {
            return Err(Error::SingularOverlap(magnitude));
        }
        Ok((kz * z.conj()).im / (hbar * magnitude))
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().map(|(l, p)| l * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.weights.iter().map(|(l, p)| l * l * p).sum()
    }

    pub fn delta_k(&self) -> f64 {
        let mean = self.mean();
        (self.second_moment() - mean * mean).max(0.0).sqrt()
    }

    /// `<K> - k_min`, clipped at zero.
    pub fn energy_above_ground(&self) -> f64 {
        (self.mean() - self.k_min).max(0.0)
    }

    /// `<|K - kappa|>`.
    pub fn abs_spread(&self, kappa: f64) -> f64 {
        self.weights
            .iter()
            .map(|(l, p)| (l - kappa).abs() * p)
            .sum()
    }
}

/// Exact derivative of `theta -> |<psi_0|psi_theta>|`:
/// `Im(<psi_0|K|psi_theta> <psi_theta|psi_0>) / (hbar |z|)` with
/// `z = <psi_0|psi_theta>`. Fails when `|z| <= 1e-10`.
pub fn overlap_derivative(
    g: &Generator,
    psi0: &PureState,
    theta: f64,
    cfg: &Config,
) -> Result<f64> {
    OverlapProfile::new(g, psi0)?.overlap_derivative(theta, cfg.hbar)
}

/// Analytic rate of change of the statistical distance,
/// `-2 d|z|/dtheta / sqrt(1 - |z|^2)`. Only defined on the admissible band;
/// the prefactor is 0/0 at `s = 0` and divides by zero at `s = pi`.
pub fn distance_rate_analytic(
    g: &Generator,
    psi0: &PureState,
    theta: f64,
    cfg: &Config,
) -> Result<f64> {
    let s = distance_at(g, psi0, theta, cfg)?;
    let lo = cfg.sing_margin;
    let hi = std::f64::consts::PI - cfg.sing_margin;
    if s <= lo || s >= hi {
        return Err(Error::NearSingular { s, lo, hi });
    }
    let ov = overlap(psi0, &evolve(g, psi0, theta, cfg)?)?;
    let derivative = overlap_derivative(g, psi0, theta, cfg)?;
    Ok(-2.0 * derivative / (1.0 - ov * ov).sqrt())
}

/// Central finite difference of the statistical distance,
/// `[s(theta + h) - s(theta - h)] / (2 h)` with `h = cfg.fd_step`. Defined
/// everywhere; this is the measured rate used in bound comparisons.
pub fn distance_rate_fd(g: &Generator, psi0: &PureState, theta: f64, cfg: &Config) -> Result<f64> {
    let h = cfg.fd_step;
    let fwd = distance_at(g, psi0, theta + h, cfg)?;
    let bwd = distance_at(g, psi0, theta - h, cfg)?;
    Ok((fwd - bwd) / (2.0 * h))
}

fn variance(g: &Generator, psi: &PureState) -> Result<f64> {
    let terms = g.spectral_weights(psi)?;
    let mean: f64 = terms.iter().map(|(l, p)| l * p).sum();
    let second: f64 = terms.iter().map(|(l, p)| l * l * p).sum();
    Ok((second - mean * mean).max(0.0))
}

/// Fubini-Study length of the evolution path up to `theta`. The standard
/// deviation of the generator is conserved along the path, so the length is
/// the closed form `2 DeltaK(psi_0) theta / hbar`; conservation is checked at
/// the sampled `theta` before the closed form is used. The check compares
/// variances: near a stationary state the standard deviation itself carries
/// sqrt-of-round-off noise (~1e-8) that the variance does not.
pub fn fs_path_length(g: &Generator, psi0: &PureState, theta: f64, cfg: &Config) -> Result<f64> {
    let var0 = variance(g, psi0)?;
    let evolved = evolve(g, psi0, theta, cfg)?;
    let var_theta = variance(g, &evolved)?;
    let scale = g.k_max().abs().max(g.k_min().abs());
    debug_assert!(
        (var_theta - var0).abs() <= 1e-10 * (1.0 + scale * scale),
        "generator variance not conserved: {var0} -> {var_theta}"
    );
    Ok(2.0 * var0.sqrt() * theta / cfg.hbar)
}

/// Per-theta record of the distances and rates along a sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DistanceSample {
    pub theta: f64,
    pub overlap: f64,
    pub s_w: f64,
    pub s: f64,
    /// `None` where the analytic formula is singular.
    pub ds_dtheta_analytic: Option<f64>,
    pub ds_dtheta_fd: f64,
    pub path_length: f64,
}

impl DistanceSample {
    pub fn compute(g: &Generator, psi0: &PureState, theta: f64, cfg: &Config) -> Result<Self> {
        let evolved = evolve(g, psi0, theta, cfg)?;
        let ov = overlap(psi0, &evolved)?;
        let s_w = ov.acos();
        let s = 2.0 * s_w;
        let ds_dtheta_analytic = match distance_rate_analytic(g, psi0, theta, cfg) {
            Ok(rate) => Some(rate),
            Err(Error::NearSingular { .. }) | Err(Error::SingularOverlap(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            theta,
            overlap: ov,
            s_w,
            s,
            ds_dtheta_analytic,
            ds_dtheta_fd: distance_rate_fd(g, psi0, theta, cfg)?,
            path_length: fs_path_length(g, psi0, theta, cfg)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, random_hermitian, random_pure_state, ComplexMatrix};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

    fn qubit() -> Generator {
        eig_hermitian(&ComplexMatrix::from_diag(&[-1.0, 1.0])).unwrap()
    }

    fn qutrit() -> Generator {
        eig_hermitian(&ComplexMatrix::from_diag(&[0.0, 1.0, 2.0])).unwrap()
    }

    fn plus_state() -> PureState {
        PureState::from_unnormalized(vec![Complex64::ONE, Complex64::ONE]).unwrap()
    }

    fn uniform_qutrit() -> PureState {
        PureState::from_unnormalized(vec![Complex64::ONE; 3]).unwrap()
    }

    #[test]
    fn overlap_trivial_cases() {
        let a = PureState::basis(3, 0);
        let b = PureState::basis(3, 1);
        assert_eq!(overlap(&a, &a).unwrap(), 1.0);
        assert_eq!(overlap(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn overlap_qubit_oracle_is_cos_theta() {
        // K = diag(-1, 1), psi_0 = (1, 1)/sqrt(2): |<psi_0|psi_theta>| = |cos theta|.
        let cfg = Config::default();
        let g = qubit();
        let psi = plus_state();
        for theta in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let evolved = evolve(&g, &psi, theta, &cfg).unwrap();
            let got = overlap(&psi, &evolved).unwrap();
            assert!((got - theta.cos().abs()).abs() <= 1e-12, "theta {theta}");
        }
    }

    #[test]
    fn wootters_qubit_oracle() {
        let cfg = Config::default();
        let g = qubit();
        let psi = plus_state();
        let evolved = evolve(&g, &psi, FRAC_PI_6, &cfg).unwrap();
        assert!((wootters_distance(&psi, &evolved).unwrap() - FRAC_PI_6).abs() <= 1e-12);
        // arccos amplifies one-ulp overlap round-off to ~1e-8.
        assert!(wootters_distance(&psi, &psi).unwrap() <= 1e-7);
        let orth = PureState::basis(2, 0);
        let other = PureState::basis(2, 1);
        assert!((wootters_distance(&orth, &other).unwrap() - FRAC_PI_2).abs() <= 1e-15);
    }

    #[test]
    fn statistical_distance_is_twice_wootters() {
        let cfg = Config::default();
        let g = qubit();
        let psi = plus_state();
        let evolved = evolve(&g, &psi, FRAC_PI_4, &cfg).unwrap();
        assert!((statistical_distance(&psi, &evolved).unwrap() - FRAC_PI_2).abs() <= 1e-12);
        let orth = PureState::basis(2, 0);
        let other = PureState::basis(2, 1);
        assert!((statistical_distance(&orth, &other).unwrap() - PI).abs() <= 1e-15);
    }

    #[test]
    fn metric_axioms_on_samples() {
        let cfg = Config::default();
        for seed in 0..30u64 {
            let g = random_hermitian(2 + (seed % 5) as usize, 200 + seed);
            let a = random_pure_state(g.dim(), 300 + seed);
            let b = evolve(&g, &a, 0.3 + 0.1 * seed as f64, &cfg).unwrap();
            let s_ab = statistical_distance(&a, &b).unwrap();
            let s_ba = statistical_distance(&b, &a).unwrap();
            assert!(statistical_distance(&a, &a).unwrap() <= 1e-7);
            assert!((s_ab - s_ba).abs() <= 1e-12);
            assert!((0.0..=PI).contains(&s_ab));
        }
    }

    #[test]
    fn overlap_derivative_small_theta_is_negative() {
        // d|cos theta|/dtheta = -sin theta on (0, pi/2).
        let cfg = Config::default();
        let got = overlap_derivative(&qubit(), &plus_state(), 0.001, &cfg).unwrap();
        assert!((got - (-0.001f64.sin())).abs() <= 1e-12);
        assert!(got < 0.0);
    }

    #[test]
    fn overlap_derivative_eigenstate_is_zero() {
        let cfg = Config::default();
        let g = random_hermitian(4, 77);
        let psi = PureState::new(g.eigenvector(2).to_vec()).unwrap();
        for theta in [0.2, 1.1, 2.9] {
            assert!(overlap_derivative(&g, &psi, theta, &cfg).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn overlap_derivative_turns_positive_past_half_pi() {
        // |cos theta| rises again past theta = pi/2.
        let cfg = Config::default();
        let theta = 3.0 * FRAC_PI_4;
        let got = overlap_derivative(&qubit(), &plus_state(), theta, &cfg).unwrap();
        assert!((got - theta.sin()).abs() <= 1e-12);
        assert!(got > 0.0);
    }

    #[test]
    fn analytic_rate_qubit_is_two() {
        let cfg = Config::default();
        let got = distance_rate_analytic(&qubit(), &plus_state(), FRAC_PI_4, &cfg).unwrap();
        assert!((got - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn analytic_rate_rejects_eigenstate() {
        let cfg = Config::default();
        let g = qubit();
        let psi = PureState::basis(2, 0);
        assert!(matches!(
            distance_rate_analytic(&g, &psi, 0.4, &cfg),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn analytic_rate_matches_fd_on_qutrit() {
        let cfg = Config::default();
        let analytic = distance_rate_analytic(&qutrit(), &uniform_qutrit(), 1.0, &cfg).unwrap();
        let fd = distance_rate_fd(&qutrit(), &uniform_qutrit(), 1.0, &cfg).unwrap();
        assert!((analytic - fd).abs() <= 1e-5, "{analytic} vs {fd}");
    }

    #[test]
    fn fd_rate_qubit_and_eigenstate() {
        let cfg = Config::default();
        let got = distance_rate_fd(&qubit(), &plus_state(), 0.5, &cfg).unwrap();
        assert!((got - 2.0).abs() <= 1e-6);
        let psi = PureState::basis(2, 1);
        assert!(distance_rate_fd(&qubit(), &psi, 0.5, &cfg).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn analytic_and_fd_agree_on_random_admissible_samples() {
        let cfg = Config::default();
        let mut accepted = 0;
        let mut seed = 0u64;
        while accepted < 100 {
            seed += 1;
            let g = random_hermitian(2 + (seed % 7) as usize, 400 + seed);
            let psi = random_pure_state(g.dim(), 500 + seed);
            let theta = 0.05 + 0.013 * (seed % 100) as f64;
            match distance_rate_analytic(&g, &psi, theta, &cfg) {
                Ok(analytic) => {
                    let fd = distance_rate_fd(&g, &psi, theta, &cfg).unwrap();
                    let tol = 1e-5f64.max(1e-4 * fd.abs());
                    assert!(
                        (analytic - fd).abs() <= tol,
                        "seed {seed}: {analytic} vs {fd}"
                    );
                    accepted += 1;
                }
                Err(Error::NearSingular { .. }) => continue,
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
    }

    #[test]
    fn path_length_qubit_matches_geodesic() {
        let cfg = Config::default();
        let got = fs_path_length(&qubit(), &plus_state(), FRAC_PI_4, &cfg).unwrap();
        assert!((got - FRAC_PI_2).abs() <= 1e-12);
        let evolved = evolve(&qubit(), &plus_state(), FRAC_PI_4, &cfg).unwrap();
        let s = statistical_distance(&plus_state(), &evolved).unwrap();
        assert!((got - s).abs() <= 1e-10);
    }

    #[test]
    fn path_length_eigenstate_is_zero() {
        let cfg = Config::default();
        let psi = PureState::basis(2, 0);
        for theta in [0.3, 1.0, 2.5] {
            assert!(fs_path_length(&qubit(), &psi, theta, &cfg).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn path_length_qutrit_dominates_distance() {
        let cfg = Config::default();
        let got = fs_path_length(&qutrit(), &uniform_qutrit(), 1.0, &cfg).unwrap();
        let expected = 2.0 * (2.0f64 / 3.0).sqrt();
        assert!((got - expected).abs() <= 1e-12);
        let s = distance_at(&qutrit(), &uniform_qutrit(), 1.0, &cfg).unwrap();
        assert!(got >= s - 1e-8);
    }

    #[test]
    fn path_length_never_below_distance() {
        let cfg = Config::default();
        for seed in 0..40u64 {
            let g = random_hermitian(2 + (seed % 6) as usize, 600 + seed);
            let psi = random_pure_state(g.dim(), 700 + seed);
            for k in 1..=16 {
                let theta = 0.2 * k as f64;
                let length = fs_path_length(&g, &psi, theta, &cfg).unwrap();
                let s = distance_at(&g, &psi, theta, &cfg).unwrap();
                assert!(length >= s - 1e-8, "seed {seed} theta {theta}");
            }
        }
    }

    #[test]
    fn delta_k_is_conserved_under_evolution() {
        let cfg = Config::default();
        for seed in 0..20u64 {
            let g = random_hermitian(2 + (seed % 5) as usize, 800 + seed);
            let psi = random_pure_state(g.dim(), 900 + seed);
            let before = variance(&g, &psi).unwrap().sqrt();
            for theta in [0.4, 1.9, 5.3] {
                let evolved = evolve(&g, &psi, theta, &cfg).unwrap();
                assert!((variance(&g, &evolved).unwrap().sqrt() - before).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn sign_observation_on_random_instances() {
        // Every non-stationary state loses overlap at small theta.
        let cfg = Config::default();
        for seed in 0..50u64 {
            let g = random_hermitian(2 + (seed % 7) as usize, 1000 + seed);
            let psi = random_pure_state(g.dim(), 1100 + seed);
            if variance(&g, &psi).unwrap().sqrt() <= 1e-6 {
                continue;
            }
            let derivative = overlap_derivative(&g, &psi, 1e-4, &cfg).unwrap();
            assert!(derivative < 0.0, "seed {seed}: {derivative}");
        }
    }

    #[test]
    fn profile_agrees_with_state_based_routes() {
        // The precomputed-weights path must reproduce the explicit
        // evolve-and-project path.
        let cfg = Config::default();
        for seed in 0..10u64 {
            let g = random_hermitian(2 + (seed % 6) as usize, 1200 + seed);
            let psi = random_pure_state(g.dim(), 1250 + seed);
            let profile = OverlapProfile::new(&g, &psi).unwrap();
            for k in 0..12 {
                let theta = 0.3 * k as f64 + 0.05;
                let evolved = evolve(&g, &psi, theta, &cfg).unwrap();
                let direct = overlap(&psi, &evolved).unwrap();
                assert!((profile.overlap(theta, cfg.hbar) - direct).abs() <= 1e-12);
                let fd = distance_rate_fd(&g, &psi, theta, &cfg).unwrap();
                // Near overlap extrema the arccos round-off of the two
                // routes differs by ~1e-8, which the 1e-6 step divides out.
                assert!((profile.rate_fd(theta, &cfg) - fd).abs() <= 1e-5);
            }
        }
    }

    #[test]
    fn sample_invariants_hold() {
        let cfg = Config::default();
        let sample = DistanceSample::compute(&qutrit(), &uniform_qutrit(), 0.8, &cfg).unwrap();
        assert!((sample.s - 2.0 * sample.s_w).abs() <= 1e-12);
        assert!((sample.overlap - (sample.s / 2.0).cos()).abs() <= 1e-10);
        assert!(sample.path_length >= sample.s - 1e-8);
    }
}
