//! Problem-instance files: a generator matrix, an optional initial state,
//! and sweep settings, stored as JSON with complex numbers as `[re, im]`
//! pairs. Unknown fields are rejected.

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};
use std::path::Path;

use qsl_core::evolution::PureState;
use qsl_core::linalg::{eig_hermitian, random_pure_state, vec_norm, ComplexMatrix};
use qsl_core::speed_limits::optimal_state;
use qsl_core::{Complex64, Generator};

/// Hermiticity tolerance applied on load, relative to the largest entry.
const LOAD_HERMITICITY_TOL: f64 = 1e-10;

/// States whose norm deviates from unity by more than this are rejected
/// instead of renormalized.
const NORM_SLACK: f64 = 1e-6;

fn default_hbar() -> f64 {
    1.0
}

/// Initial-state field of a problem file: explicit amplitudes, the literal
/// string `"optimal"`, or a seed for a random state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Amplitudes(Vec<[f64; 2]>),
    Named(String),
    Seeded { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub dim: usize,
    /// Row-major `dim x dim` complex entries as `[re, im]` pairs.
    pub k: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi0: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

/// A validated problem instance.
pub struct Problem {
    pub hbar: f64,
    pub generator: Generator,
    pub psi0: Option<PureState>,
    pub theta_max: Option<f64>,
    pub grid_points: Option<usize>,
}

impl ProblemFile {
    pub fn matrix(&self) -> anyhow::Result<ComplexMatrix> {
        if self.dim < 2 {
            bail!("dim must be at least 2, got {}", self.dim);
        }
        if self.k.len() != self.dim || self.k.iter().any(|row| row.len() != self.dim) {
            bail!("k must be a {dim} x {dim} matrix", dim = self.dim);
        }
        let entries: Vec<Complex64> = self
            .k
            .iter()
            .flatten()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let matrix = ComplexMatrix::new(self.dim, entries)
            .map_err(|e| anyhow!("invalid generator matrix: {e}"))?;
        let tolerance = LOAD_HERMITICITY_TOL * matrix.max_abs();
        let residual = matrix.hermiticity_residual();
        if residual > tolerance {
            bail!("k is not Hermitian: residual {residual:.3e} exceeds {tolerance:.3e}");
        }
        Ok(matrix)
    }

    /// Validates the file and resolves the state specification.
    pub fn resolve(&self, hbar_override: Option<f64>) -> anyhow::Result<Problem> {
        let hbar = hbar_override.unwrap_or(self.hbar);
        if !(hbar > 0.0 && hbar.is_finite()) {
            bail!("hbar must be positive and finite, got {hbar}");
        }
        let generator = eig_hermitian(&self.matrix()?)?;
        let psi0 = match &self.psi0 {
            None => None,
            Some(StateSpec::Amplitudes(pairs)) => {
                if pairs.len() != self.dim {
                    bail!("psi0 has {} amplitudes, expected {}", pairs.len(), self.dim);
                }
                let amplitudes: Vec<Complex64> = pairs
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect();
                let norm = vec_norm(&amplitudes);
                if (norm - 1.0).abs() > NORM_SLACK {
                    bail!("psi0 norm {norm} deviates from 1 by more than {NORM_SLACK:e}");
                }
                Some(PureState::from_unnormalized(amplitudes)?)
            }
            Some(StateSpec::Named(name)) if name == "optimal" => {
                Some(optimal_state(&generator, 0.0)?)
            }
            Some(StateSpec::Named(name)) => {
                bail!("unknown psi0 keyword `{name}` (only \"optimal\" is supported)")
            }
            Some(StateSpec::Seeded { seed }) => Some(random_pure_state(self.dim, *seed)),
        };
        if let Some(theta_max) = self.theta_max {
            if !(theta_max > 0.0 && theta_max.is_finite()) {
                bail!("theta_max must be positive and finite, got {theta_max}");
            }
        }
        if let Some(grid_points) = self.grid_points {
            if grid_points < 2 {
                bail!("grid_points must be at least 2, got {grid_points}");
            }
        }
        Ok(Problem {
            hbar,
            generator,
            psi0,
            theta_max: self.theta_max,
            grid_points: self.grid_points,
        })
    }
}

pub fn load_problem(path: &Path, hbar_override: Option<f64>) -> anyhow::Result<Problem> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read problem file {}", path.display()))?;
    let file: ProblemFile = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse problem file {}", path.display()))?;
    file.resolve(hbar_override)
}

/// Problem-file echo of a generator and a concrete state, suitable for
/// feeding back into any command.
pub fn echo_problem(generator: &Generator, psi: &PureState, hbar: f64) -> ProblemFile {
    let dim = generator.dim();
    let k: Vec<Vec<[f64; 2]>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let z = generator.matrix().get(i, j);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect();
    ProblemFile {
        hbar,
        dim,
        k,
        psi0: Some(StateSpec::Amplitudes(
            psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        )),
        theta_max: None,
        grid_points: None,
    }
}
