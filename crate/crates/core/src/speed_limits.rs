//! Minimum-time bounds for unitary evolution: the standard-deviation limit
//! `(pi/2) hbar / DeltaK`, the mean-energy limits `hbar / E` and
//! `(pi/2) hbar / E`, the distance-resolved generalization
//! `2 sin^2(s_max/4) hbar / E`, optimal-state construction, orthogonality
//! search, and saturation checks.

use serde::Serialize;

use crate::bounds::{mean_above_ground, std_dev};
use crate::evolution::{evolve, PureState};
use crate::linalg::{Config, Generator};
use crate::metrics::{distance_at, distance_rate_fd, fs_path_length, overlap};
use crate::{Complex64, Error, Result};

use std::f64::consts::{FRAC_PI_2, PI};

/// Variance / energy below this counts as zero for the time bounds.
const ZERO_TOL: f64 = 1e-12;

/// Overlap a grid point must reach before a minimum is refined.
const GRID_TRIGGER: f64 = 1e-3;

/// Refined overlap below which a minimum counts as orthogonality.
const REFINED_ACCEPT: f64 = 1e-6;

/// `(pi/2) hbar / DeltaK`: minimum parameter span to reach an orthogonal
/// state, in terms of the standard deviation of the generator.
pub fn mt_time(g: &Generator, psi: &PureState, cfg: &Config) -> Result<f64> {
    let dk = std_dev(g, psi)?;
    if dk <= ZERO_TOL {
        return Err(Error::ZeroVariance);
    }
    Ok(FRAC_PI_2 * cfg.hbar / dk)
}

/// `hbar / E` with `E = <K> - k_min`.
pub fn new_qsl_time(g: &Generator, psi: &PureState, cfg: &Config) -> Result<f64> {
    let energy = mean_above_ground(g, psi)?;
    if energy <= ZERO_TOL {
        return Err(Error::ZeroEnergy);
    }
    Ok(cfg.hbar / energy)
}

/// `(pi/2) hbar / E`: the reference mean-energy limit, a factor `pi/2`
/// stronger than [`new_qsl_time`].
pub fn ml_time(g: &Generator, psi: &PureState, cfg: &Config) -> Result<f64> {
    Ok(FRAC_PI_2 * new_qsl_time(g, psi, cfg)?)
}

/// `2 sin^2(s_max/4) hbar / E`: minimum parameter span to traverse a
/// statistical distance `s_max` in `(0, pi]`. At `s_max = pi` this equals
/// [`new_qsl_time`].
pub fn generalized_qsl(g: &Generator, psi: &PureState, s_max: f64, cfg: &Config) -> Result<f64> {
    if !(s_max > 0.0 && s_max <= PI) {
        return Err(Error::InvalidDistance(s_max));
    }
    let energy = mean_above_ground(g, psi)?;
    if energy <= ZERO_TOL {
        return Err(Error::ZeroEnergy);
    }
    let half_sin = (s_max / 4.0).sin();
    Ok(2.0 * half_sin * half_sin * cfg.hbar / energy)
}

/// Equal-weight superposition of the extreme eigenvectors,
/// `(|k_min> + e^{i phi} |k_max>) / sqrt(2)`. These states saturate both
/// rate bounds and move along geodesics. Degenerate extreme eigenvalues are
/// rejected; pre-rotate the basis to select eigenvectors in that case.
pub fn optimal_state(g: &Generator, phi: f64) -> Result<PureState> {
    let d = g.dim();
    let gap = g.k_max() - g.k_min();
    if gap <= 1e-12 {
        return Err(Error::DegenerateSpectrum(gap));
    }
    if d > 2 {
        let ground_gap = g.eigenvalue(1) - g.eigenvalue(0);
        let top_gap = g.eigenvalue(d - 1) - g.eigenvalue(d - 2);
        if ground_gap <= 1e-12 || top_gap <= 1e-12 {
            return Err(Error::DegenerateSpectrum(ground_gap.min(top_gap)));
        }
    }
    let phase = (Complex64::i() * phi).exp();
    let w = 1.0 / 2.0f64.sqrt();
    let lo = g.eigenvector(0);
    let hi = g.eigenvector(d - 1);
    let amplitudes: Vec<Complex64> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| w * (a + phase * b))
        .collect();
    Ok(PureState::new_unchecked(amplitudes))
}

fn golden_minimize<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let tol = 1e-11 * b.abs().max(1.0);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while b - a > tol && iterations < 300 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let theta = 0.5 * (a + b);
    (theta, f(theta))
}

/// Scans the overlap on a uniform grid over `[0, theta_max]` and
/// golden-section refines grid minima that reach below `1e-3`; a refined
/// minimum below `1e-6` counts as orthogonality. Returns `None` when no
/// grid point triggers, which is a valid outcome: not every state reaches
/// an orthogonal one.
pub fn orthogonality_time(
    g: &Generator,
    psi0: &PureState,
    theta_max: f64,
    grid_points: usize,
    cfg: &Config,
) -> Result<Option<f64>> {
    assert!(theta_max > 0.0, "theta_max must be positive");
    assert!(grid_points >= 16, "grid must have at least 16 points");
    // Surface dimension mismatches before the scan loop unwraps.
    g.spectral_weights(psi0)?;
    let overlap_at = |theta: f64| -> f64 {
        let evolved = evolve(g, psi0, theta, cfg).expect("dims checked above");
        overlap(psi0, &evolved).expect("dims checked above")
    };

    let n = grid_points;
    let thetas: Vec<f64> = (0..n)
        .map(|j| theta_max * j as f64 / (n - 1) as f64)
        .collect();
    let values: Vec<f64> = thetas.iter().map(|&t| overlap_at(t)).collect();

    for j in 1..n {
        if values[j] >= GRID_TRIGGER {
            continue;
        }
        let left_ok = values[j] <= values[j - 1];
        let right_ok = j + 1 >= n || values[j] <= values[j + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let hi = if j + 1 < n { thetas[j + 1] } else { thetas[j] };
        let (theta, refined) = golden_minimize(&overlap_at, thetas[j - 1], hi);
        if refined < REFINED_ACCEPT {
            return Ok(Some(theta));
        }
    }
    Ok(None)
}

/// Result of [`check_saturation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationCheck {
    /// The measured rate equals `2 DeltaK / hbar` across the grid.
    pub saturates_mt: bool,
    /// The path length equals the statistical distance across the grid:
    /// the state moves along a geodesic.
    pub geodesic: bool,
}

/// Checks rate-bound saturation and geodesic motion on a 64-point grid
/// strictly inside `(0, (pi/2) hbar / DeltaK)`.
pub fn check_saturation(g: &Generator, psi0: &PureState, cfg: &Config) -> Result<SaturationCheck> {
    let dk = std_dev(g, psi0)?;
    if dk <= ZERO_TOL {
        return Err(Error::ZeroVariance);
    }
    let span = FRAC_PI_2 * cfg.hbar / dk;
    let bound = 2.0 * dk / cfg.hbar;
    let mut saturates_mt = true;
    let mut geodesic = true;
    for j in 0..64 {
        let theta = span * (j + 1) as f64 / 65.0;
        let rate = distance_rate_fd(g, psi0, theta, cfg)?;
        if (rate - bound).abs() > 1e-5 {
            saturates_mt = false;
        }
        let s = distance_at(g, psi0, theta, cfg)?;
        let length = fs_path_length(g, psi0, theta, cfg)?;
        if (length - s).abs() > 1e-6 {
            geodesic = false;
        }
    }
    Ok(SaturationCheck {
        saturates_mt,
        geodesic,
    })
}

/// All time bounds for one `(K, psi)` instance. Fields are `None`, with the
/// reason recorded, when the controlling quantity vanishes.
#[derive(Debug, Clone, Serialize)]
pub struct SpeedLimitReport {
    pub t_mt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_mt_reason: Option<String>,
    pub t_new: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_new_reason: Option<String>,
    pub t_ml: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_ml_reason: Option<String>,
    /// `t_ml / t_new`, identically `pi/2` whenever both exist.
    pub ratio_ml_over_new: Option<f64>,
    /// Generalized limit evaluated at `s_max`.
    pub t_generalized: Option<f64>,
    pub s_max: f64,
    pub t_orthogonal: Option<f64>,
    pub saturates_mt: bool,
    pub saturates_ml: bool,
}

impl SpeedLimitReport {
    /// Computes every limit plus the orthogonality search over
    /// `[0, theta_max]` (default: four standard-deviation periods).
    pub fn compute(
        g: &Generator,
        psi: &PureState,
        theta_max: Option<f64>,
        grid_points: usize,
        cfg: &Config,
    ) -> Result<Self> {
        let dk = std_dev(g, psi)?;
        let (t_mt, t_mt_reason) = match mt_time(g, psi, cfg) {
            Ok(t) => (Some(t), None),
            Err(Error::ZeroVariance) => (None, Some("zero variance".to_string())),
            Err(e) => return Err(e),
        };
        let zero_energy = Some("zero energy above ground".to_string());
        let (t_new, t_new_reason) = match new_qsl_time(g, psi, cfg) {
            Ok(t) => (Some(t), None),
            Err(Error::ZeroEnergy) => (None, zero_energy.clone()),
            Err(e) => return Err(e),
        };
        let (t_ml, t_ml_reason) = match ml_time(g, psi, cfg) {
            Ok(t) => (Some(t), None),
            Err(Error::ZeroEnergy) => (None, zero_energy),
            Err(e) => return Err(e),
        };
        let s_max = PI;
        let t_generalized = match generalized_qsl(g, psi, s_max, cfg) {
            Ok(t) => Some(t),
            Err(Error::ZeroEnergy) => None,
            Err(e) => return Err(e),
        };

        let t_orthogonal = if dk > ZERO_TOL {
            let span = theta_max.unwrap_or(4.0 * FRAC_PI_2 * cfg.hbar / dk);
            orthogonality_time(g, psi, span, grid_points, cfg)?
        } else {
            None
        };

        let saturates_mt = if dk > ZERO_TOL {
            check_saturation(g, psi, cfg)?.saturates_mt
        } else {
            false
        };
        let saturates_ml = match (t_orthogonal, t_ml) {
            (Some(t), Some(limit)) => (t - limit).abs() <= 1e-6,
            _ => false,
        };

        Ok(Self {
            t_mt,
            t_mt_reason,
            t_new,
            t_new_reason,
            t_ml,
            t_ml_reason,
            ratio_ml_over_new: t_ml.zip(t_new).map(|(a, b)| a / b),
            t_generalized,
            s_max,
            t_orthogonal,
            saturates_mt,
            saturates_ml,
        })
    }
}
