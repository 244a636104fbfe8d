//! The two upper bounds on the rate of change of the statistical distance:
//! `2 DeltaK / hbar` from the standard deviation of the generator, and
//! `(2 / sin(s/2)) (<K> - k_min) / hbar` from its expectation value above the
//! ground state, together with the latter's generalization to an arbitrary
//! reference constant `kappa`.

use serde::{Serialize, Serializer};

use crate::evolution::PureState;
use crate::linalg::{Config, Generator};
use crate::metrics::{distance_at, distance_rate_fd};
use crate::Result;

/// A rate bound that may carry an explicit infinity flag where the
/// `1/sin(s/2)` prefactor blows up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue {
    Finite(f64),
    Infinite,
}

impl BoundValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            BoundValue::Finite(x) => Some(x),
            BoundValue::Infinite => None,
        }
    }

    /// Whether `rate <= bound + tol`; an infinite bound always holds.
    pub fn admits(self, rate: f64, tol: f64) -> bool {
        match self {
            BoundValue::Finite(x) => rate <= x + tol,
            BoundValue::Infinite => true,
        }
    }
}

impl Serialize for BoundValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BoundValue::Finite(x) => serializer.serialize_f64(*x),
            BoundValue::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Standard deviation `sqrt(<K^2> - <K>^2)` of the generator in a state,
/// computed in the eigenbasis; negative round-off is clipped at zero.
pub fn std_dev(g: &Generator, psi: &PureState) -> Result<f64> {
    let weights = g.spectral_weights(psi)?;
    let mean: f64 = weights.iter().map(|(l, p)| l * p).sum();
    let second: f64 = weights.iter().map(|(l, p)| l * l * p).sum();
    Ok((second - mean * mean).max(0.0).sqrt())
}

/// Expectation value of the generator above its ground state,
/// `<K> - lambda_min >= 0`.
pub fn mean_above_ground(g: &Generator, psi: &PureState) -> Result<f64> {
    let weights = g.spectral_weights(psi)?;
    let mean: f64 = weights.iter().map(|(l, p)| l * p).sum();
    Ok((mean - g.k_min()).max(0.0))
}

/// Standard-deviation bound `2 DeltaK / hbar`, valid at every theta.
pub fn mt_rate_bound(g: &Generator, psi: &PureState, cfg: &Config) -> Result<f64> {
    Ok(2.0 * std_dev(g, psi)? / cfg.hbar)
}

/// Scalar core of the `1/sin` bounds: `(2 / sin(s/2)) numerator / hbar`,
/// flagged infinite below the singularity margin.
pub(crate) fn sin_prefactor_bound(s: f64, numerator: f64, cfg: &Config) -> BoundValue {
    if s < cfg.sing_margin {
        BoundValue::Infinite
    } else {
        BoundValue::Finite(2.0 / (s / 2.0).sin() * numerator / cfg.hbar)
    }
}

/// Mean-energy bound `(2 / sin(s(theta)/2)) (<K> - k_min) / hbar`. Flagged
/// infinite when `s(theta) < sing_margin`.
pub fn ml_rate_bound(
    g: &Generator,
    psi0: &PureState,
    theta: f64,
    cfg: &Config,
) -> Result<BoundValue> {
    let s = distance_at(g, psi0, theta, cfg)?;
    Ok(sin_prefactor_bound(s, mean_above_ground(g, psi0)?, cfg))
}

/// Generalized bound `(2 / sin(s(theta)/2)) <|K - kappa|> / hbar` for an
/// arbitrary real `kappa`; reduces to [`ml_rate_bound`] at `kappa = k_min`.
pub fn generalized_rate_bound(
    g: &Generator,
    psi0: &PureState,
    theta: f64,
    kappa: f64,
    cfg: &Config,
) -> Result<BoundValue> {
    let s = distance_at(g, psi0, theta, cfg)?;
    let weights = g.spectral_weights(psi0)?;
    let spread: f64 = weights.iter().map(|(l, p)| (l - kappa).abs() * p).sum();
    Ok(sin_prefactor_bound(s, spread, cfg))
}

/// One comparison of the measured rate against the bounds at a fixed theta.
/// The measured rate is the central finite difference, which is defined
/// everywhere along the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub theta: f64,
    pub rate: f64,
    pub mt_bound: f64,
    pub ml_bound: BoundValue,
    pub generalized_bound: BoundValue,
    pub kappa: f64,
    pub holds_mt: bool,
    pub holds_ml: bool,
}

impl BoundReport {
    pub fn compute(
        g: &Generator,
        psi0: &PureState,
        theta: f64,
        kappa: f64,
        cfg: &Config,
    ) -> Result<Self> {
        let rate = distance_rate_fd(g, psi0, theta, cfg)?;
        let mt_bound = mt_rate_bound(g, psi0, cfg)?;
        let ml_bound = ml_rate_bound(g, psi0, theta, cfg)?;
        let generalized_bound = generalized_rate_bound(g, psi0, theta, kappa, cfg)?;
        Ok(Self {
            theta,
            rate,
            mt_bound,
            ml_bound,
            generalized_bound,
            kappa,
            holds_mt: rate <= mt_bound + cfg.tol_bound,
            holds_ml: ml_bound.admits(rate, cfg.tol_bound),
        })
    }
}
