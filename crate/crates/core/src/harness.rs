//! Randomized verification campaigns over seeded ensembles of generators and
//! states: rate-bound sweeps, the sign of the overlap derivative at small
//! theta, and bound checks on purified mixed states.
//!
//! Instances are independent, per-instance random streams are derived from
//! the campaign seed and the instance index, and aggregates are keyed by
//! instance index, so results are identical whether instances run
//! sequentially or on any number of threads.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{sin_prefactor_bound, BoundReport, BoundValue};
use crate::evolution::{lift_generator, purify, MixedState, PureState};
use crate::linalg::{random_hermitian, random_pure_state, Config, Generator};
use crate::metrics::OverlapProfile;
use crate::{Error, Result};

/// Theta value at which the sign of the overlap derivative is recorded.
const SMALL_THETA: f64 = 1e-4;

/// Instances with a smaller standard deviation are skipped by the
/// counterexample campaign.
const STATIONARY_TOL: f64 = 1e-6;

/// How the per-instance sweep span is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaSpan {
    /// `theta_max = (pi/2) hbar / DeltaK`, the standard-deviation period.
    MtPeriod,
    Fixed(f64),
}

/// Reference constant for the generalized rate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaChoice {
    KMin,
    Zero,
    Mean,
    KMax,
    Value(f64),
}

impl KappaChoice {
    fn resolve(self, g: &Generator, mean: f64) -> f64 {
        match self {
            KappaChoice::KMin => g.k_min(),
            KappaChoice::Zero => 0.0,
            KappaChoice::Mean => mean,
            KappaChoice::KMax => g.k_max(),
            KappaChoice::Value(v) => v,
        }
    }
}

impl fmt::Display for KappaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KappaChoice::KMin => write!(f, "k_min"),
            KappaChoice::Zero => write!(f, "zero"),
            KappaChoice::Mean => write!(f, "mean"),
            KappaChoice::KMax => write!(f, "k_max"),
            KappaChoice::Value(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for KappaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k_min" => Ok(KappaChoice::KMin),
            "zero" => Ok(KappaChoice::Zero),
            "mean" => Ok(KappaChoice::Mean),
            "k_max" => Ok(KappaChoice::KMax),
            other => other
                .parse::<f64>()
                .map(KappaChoice::Value)
                .map_err(|_| Error::InvalidSpec(format!("unknown kappa anchor `{other}`"))),
        }
    }
}

/// Parameters of a randomized campaign.
#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub n_instances: usize,
    /// Instance `i` uses `dims[i % dims.len()]`.
    pub dims: Vec<usize>,
    pub grid_points: usize,
    pub theta_span: ThetaSpan,
    pub kappa_choices: Vec<KappaChoice>,
    pub seed: u64,
}

impl Default for CampaignSpec {
    fn default() -> Self {
        Self {
            n_instances: 500,
            dims: (2..=8).collect(),
            grid_points: 256,
            theta_span: ThetaSpan::MtPeriod,
            kappa_choices: vec![
                KappaChoice::KMin,
                KappaChoice::Zero,
                KappaChoice::Mean,
                KappaChoice::KMax,
            ],
            seed: 42,
        }
    }
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_instances < 1 {
            return Err(Error::InvalidSpec("n_instances must be >= 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidSpec(
                "dims must be non-empty, each >= 2".into(),
            ));
        }
        if self.grid_points < 16 {
            return Err(Error::InvalidSpec("grid_points must be >= 16".into()));
        }
        if let ThetaSpan::Fixed(v) = self.theta_span {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(
                    "fixed theta span must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    fn dim_for(&self, index: usize) -> usize {
        self.dims[index % self.dims.len()]
    }
}

/// SplitMix64 step, used to derive independent per-instance streams from the
/// campaign seed.
fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Streams per instance: 0 generator, 1 state, 2..=4 mixture components,
/// 5 mixture weights.
fn instance_stream(index: usize, purpose: u64) -> u64 {
    (index as u64) * 8 + purpose
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Mt,
    Ml,
    Generalized(f64),
}

/// A bound comparison that failed: `margin = rate - bound > tol_bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub instance: usize,
    pub theta: f64,
    pub kind: BoundKind,
    pub margin: f64,
}

/// Overlap derivative recorded at one `(instance, theta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRecord {
    pub instance: usize,
    pub theta: f64,
    pub derivative: f64,
}

/// Per-instance record of a campaign.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceReport {
    pub index: usize,
    pub dim: usize,
    pub delta_k: f64,
    pub energy_above_ground: f64,
    pub theta_max: f64,
    /// Largest deviation of the purified moments from the density-matrix
    /// traces; only set by the purified campaign.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moment_residual: Option<f64>,
    pub reports: Vec<BoundReport>,
}

/// Aggregate counters and worst margins of a campaign. Margins are
/// `rate - bound`, so negative values mean slack.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CampaignSummary {
    pub n_instances: usize,
    pub n_comparisons: usize,
    pub violation_count: usize,
    pub worst_mt_margin: Option<f64>,
    pub worst_ml_margin: Option<f64>,
    pub worst_generalized_margin: Option<f64>,
    pub counterexample_total: usize,
    pub counterexample_negative: usize,
    pub positive_example: Option<CounterexampleRecord>,
    pub worst_moment_residual: Option<f64>,
}

/// Full output of a campaign, keyed by instance index.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignResult {
    pub instances: Vec<InstanceReport>,
    pub violations: Vec<Violation>,
    pub counterexample_records: Vec<CounterexampleRecord>,
    pub summary: CampaignSummary,
}

fn map_instances<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

fn max_option(current: Option<f64>, candidate: f64) -> Option<f64> {
    Some(match current {
        Some(x) => x.max(candidate),
        None => candidate,
    })
}

struct InstanceOutcome {
    report: InstanceReport,
    violations: Vec<Violation>,
    n_comparisons: usize,
    worst_mt: Option<f64>,
    worst_ml: Option<f64>,
    worst_generalized: Option<f64>,
}

/// Sweeps one `(generator, state)` pair across its theta grid and compares
/// the measured rate against every bound. The grid lies strictly inside
/// `(0, theta_max)`; the mean-energy bounds are enforced only on the
/// admissible band `sing_margin < s < pi - sing_margin`.
fn check_instance(
    index: usize,
    g: &Generator,
    psi: &PureState,
    moment_residual: Option<f64>,
    spec: &CampaignSpec,
    cfg: &Config,
) -> InstanceOutcome {
    let profile = OverlapProfile::new(g, psi).expect("instance dims are consistent");
    let delta_k = profile.delta_k();
    let energy = profile.energy_above_ground();
    let theta_max = match spec.theta_span {
        ThetaSpan::MtPeriod => {
            if delta_k > 1e-12 {
                FRAC_PI_2 * cfg.hbar / delta_k
            } else {
                PI
            }
        }
        ThetaSpan::Fixed(v) => v,
    };
    let mt_bound = 2.0 * delta_k / cfg.hbar;
    let kappas: Vec<f64> = spec
        .kappa_choices
        .iter()
        .map(|choice| choice.resolve(g, profile.mean()))
        .collect();
    let spreads: Vec<f64> = kappas.iter().map(|&k| profile.abs_spread(k)).collect();

    let mut outcome = InstanceOutcome {
        report: InstanceReport {
            index,
            dim: g.dim(),
            delta_k,
            energy_above_ground: energy,
            theta_max,
            moment_residual,
            reports: Vec::with_capacity(spec.grid_points * kappas.len().max(1)),
        },
        violations: Vec::new(),
        n_comparisons: 0,
        worst_mt: None,
        worst_ml: None,
        worst_generalized: None,
    };

    let n = spec.grid_points;
    for j in 0..n {
        let theta = theta_max * (j + 1) as f64 / (n + 1) as f64;
        let rate = profile.rate_fd(theta, cfg);
        let s = profile.distance(theta, cfg.hbar);
        let in_band = s > cfg.sing_margin && s < PI - cfg.sing_margin;

        outcome.n_comparisons += 1;
        let mt_margin = rate - mt_bound;
        outcome.worst_mt = max_option(outcome.worst_mt, mt_margin);
        if mt_margin > cfg.tol_bound {
            outcome.violations.push(Violation {
                instance: index,
                theta,
                kind: BoundKind::Mt,
                margin: mt_margin,
            });
        }

        let ml_bound = sin_prefactor_bound(s, energy, cfg);
        if in_band {
            if let BoundValue::Finite(bound) = ml_bound {
                outcome.n_comparisons += 1;
                let margin = rate - bound;
                outcome.worst_ml = max_option(outcome.worst_ml, margin);
                if margin > cfg.tol_bound {
                    outcome.violations.push(Violation {
                        instance: index,
                        theta,
                        kind: BoundKind::Ml,
                        margin,
                    });
                }
            }
        }

        for (&kappa, &spread) in kappas.iter().zip(&spreads) {
            let generalized = sin_prefactor_bound(s, spread, cfg);
            if in_band {
                if let BoundValue::Finite(bound) = generalized {
                    outcome.n_comparisons += 1;
                    let margin = rate - bound;
                    outcome.worst_generalized = max_option(outcome.worst_generalized, margin);
                    if margin > cfg.tol_bound {
                        outcome.violations.push(Violation {
                            instance: index,
                            theta,
                            kind: BoundKind::Generalized(kappa),
                            margin,
                        });
                    }
                }
            }
            outcome.report.reports.push(BoundReport {
                theta,
                rate,
                mt_bound,
                ml_bound,
                generalized_bound: generalized,
                kappa,
                holds_mt: rate <= mt_bound + cfg.tol_bound,
                holds_ml: ml_bound.admits(rate, cfg.tol_bound),
            });
        }
    }
    outcome
}

fn collect_bound_outcomes(outcomes: Vec<InstanceOutcome>) -> CampaignResult {
    let mut summary = CampaignSummary {
        n_instances: outcomes.len(),
        ..CampaignSummary::default()
    };
    let mut instances = Vec::with_capacity(outcomes.len());
    let mut violations = Vec::new();
    for outcome in outcomes {
        summary.n_comparisons += outcome.n_comparisons;
        if let Some(margin) = outcome.worst_mt {
            summary.worst_mt_margin = max_option(summary.worst_mt_margin, margin);
        }
        if let Some(margin) = outcome.worst_ml {
            summary.worst_ml_margin = max_option(summary.worst_ml_margin, margin);
        }
        if let Some(margin) = outcome.worst_generalized {
            summary.worst_generalized_margin = max_option(summary.worst_generalized_margin, margin);
        }
        if let Some(residual) = outcome.report.moment_residual {
            summary.worst_moment_residual = max_option(summary.worst_moment_residual, residual);
        }
        violations.extend(outcome.violations);
        instances.push(outcome.report);
    }
    summary.violation_count = violations.len();
    CampaignResult {
        instances,
        violations,
        counterexample_records: Vec::new(),
        summary,
    }
}

fn bound_campaign(spec: &CampaignSpec, cfg: &Config, parallel: bool) -> CampaignResult {
    spec.validate().expect("campaign spec is valid");
    cfg.validate().expect("config is valid");
    let outcomes = map_instances(spec.n_instances, parallel, |index| {
        let dim = spec.dim_for(index);
        let g = random_hermitian(dim, derive_seed(spec.seed, instance_stream(index, 0)));
        let psi = random_pure_state(dim, derive_seed(spec.seed, instance_stream(index, 1)));
        check_instance(index, &g, &psi, None, spec, cfg)
    });
    collect_bound_outcomes(outcomes)
}

/// Checks both rate bounds on random pure-state instances. Violations are
/// empty unless the implementation itself is broken: the inequalities are
/// theorems.
pub fn run_bound_campaign(spec: &CampaignSpec, cfg: &Config) -> CampaignResult {
    bound_campaign(spec, cfg, true)
}

/// Sequential variant of [`run_bound_campaign`], for baseline comparison.
pub fn run_bound_campaign_sequential(spec: &CampaignSpec, cfg: &Config) -> CampaignResult {
    bound_campaign(spec, cfg, false)
}

struct CounterexampleOutcome {
    record: Option<CounterexampleRecord>,
    positive: Option<CounterexampleRecord>,
}

fn counterexample_instance(
    index: usize,
    spec: &CampaignSpec,
    cfg: &Config,
) -> CounterexampleOutcome {
    let dim = spec.dim_for(index);
    let g = random_hermitian(dim, derive_seed(spec.seed, instance_stream(index, 0)));
    let psi = random_pure_state(dim, derive_seed(spec.seed, instance_stream(index, 1)));
    let profile = OverlapProfile::new(&g, &psi).expect("instance dims are consistent");
    if profile.delta_k() <= STATIONARY_TOL {
        return CounterexampleOutcome {
            record: None,
            positive: None,
        };
    }
    let record = CounterexampleRecord {
        instance: index,
        theta: SMALL_THETA,
        derivative: profile
            .overlap_derivative(SMALL_THETA, cfg.hbar)
            .expect("overlap is near unity at small theta"),
    };

    let theta_max = match spec.theta_span {
        ThetaSpan::MtPeriod => FRAC_PI_2 * cfg.hbar / profile.delta_k(),
        ThetaSpan::Fixed(v) => v,
    };
    // The overlap is almost periodic, so a positive stretch occurs once the
    // scan reaches far enough; four spans suffice in practice.
    let mut positive = None;
    'search: for multiplier in [1.0, 4.0] {
        let n = spec.grid_points;
        for j in 0..n {
            let theta = multiplier * theta_max * (j + 1) as f64 / (n + 1) as f64;
            if let Ok(derivative) = profile.overlap_derivative(theta, cfg.hbar) {
                if derivative > 0.0 {
                    positive = Some(CounterexampleRecord {
                        instance: index,
                        theta,
                        derivative,
                    });
                    break 'search;
                }
            }
        }
    }
    CounterexampleOutcome {
        record: Some(record),
        positive,
    }
}

fn counterexample_campaign(spec: &CampaignSpec, cfg: &Config, parallel: bool) -> CampaignResult {
    spec.validate().expect("campaign spec is valid");
    cfg.validate().expect("config is valid");
    let outcomes = map_instances(spec.n_instances, parallel, |index| {
        counterexample_instance(index, spec, cfg)
    });

    let mut summary = CampaignSummary {
        n_instances: spec.n_instances,
        ..CampaignSummary::default()
    };
    let mut records = Vec::new();
    for outcome in outcomes {
        if let Some(record) = outcome.record {
            summary.counterexample_total += 1;
            if record.derivative < 0.0 {
                summary.counterexample_negative += 1;
            }
            records.push(record);
        }
        if summary.positive_example.is_none() {
            summary.positive_example = outcome.positive;
        }
    }
    CampaignResult {
        instances: Vec::new(),
        violations: Vec::new(),
        counterexample_records: records,
        summary,
    }
}

/// Records the overlap derivative at `theta = 1e-4` for every non-stationary
/// instance (always negative: the overlap starts at unity and must fall) and
/// exhibits at least one `(instance, theta)` where it is positive.
pub fn run_counterexample_campaign(spec: &CampaignSpec, cfg: &Config) -> CampaignResult {
    counterexample_campaign(spec, cfg, true)
}

/// Sequential variant of [`run_counterexample_campaign`].
pub fn run_counterexample_campaign_sequential(spec: &CampaignSpec, cfg: &Config) -> CampaignResult {
    counterexample_campaign(spec, cfg, false)
}

/// Random full-support mixture of three seeded pure states with
/// exponential-normalized (flat Dirichlet) weights.
fn random_mixture(dim: usize, spec: &CampaignSpec, index: usize) -> MixedState {
    let states: Vec<PureState> = (0..3)
        .map(|j| {
            random_pure_state(
                dim,
                derive_seed(spec.seed, instance_stream(index, 2 + j as u64)),
            )
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, instance_stream(index, 5)));
    let weights: Vec<f64> = (0..3)
        .map(|_| -f64::ln(1.0 - rng.random::<f64>()))
        .collect();
    let components: Vec<(f64, PureState)> = weights.into_iter().zip(states).collect();
    MixedState::from_mixture(&components).expect("mixture weights are positive")
}

fn purified_instance(index: usize, spec: &CampaignSpec, cfg: &Config) -> InstanceOutcome {
    let dim = spec.dim_for(index);
    let g = random_hermitian(dim, derive_seed(spec.seed, instance_stream(index, 0)));
    let rho = random_mixture(dim, spec, index);
    let psi = purify(&rho).expect("random mixture is a density matrix");
    let lifted = lift_generator(&g);

    // Moment identities: <K (x) I> = Tr(rho K), same for the second moment.
    let profile = OverlapProfile::new(&lifted, &psi).expect("purification has dimension d^2");
    let first_trace = rho
        .density()
        .mul(g.matrix())
        .expect("dims match")
        .trace()
        .re;
    let k_squared = g.matrix().mul(g.matrix()).expect("dims match");
    let second_trace = rho
        .density()
        .mul(&k_squared)
        .expect("dims match")
        .trace()
        .re;
    let residual = (profile.mean() - first_trace)
        .abs()
        .max((profile.second_moment() - second_trace).abs());

    check_instance(index, &lifted, &psi, Some(residual), spec, cfg)
}

fn purified_campaign(spec: &CampaignSpec, cfg: &Config, parallel: bool) -> CampaignResult {
    spec.validate().expect("campaign spec is valid");
    cfg.validate().expect("config is valid");
    let outcomes = map_instances(spec.n_instances, parallel, |index| {
        purified_instance(index, spec, cfg)
    });
    collect_bound_outcomes(outcomes)
}

/// Purifies random mixed states, lifts the generator to the doubled space,
/// and re-runs the bound checks there; also verifies that the first and
/// second moments of the lifted generator match the density-matrix traces.
pub fn run_purified_campaign(spec: &CampaignSpec, cfg: &Config) -> CampaignResult {
    purified_campaign(spec, cfg, true)
}

/// Sequential variant of [`run_purified_campaign`].
pub fn run_purified_campaign_sequential(spec: &CampaignSpec, cfg: &Config) -> CampaignResult {
    purified_campaign(spec, cfg, false)
}

/// Largest admissible deviation of the purified moment identities.
const MOMENT_TOL: f64 = 1e-10;

/// Combined summary of the three campaigns, serialized by the `verify`
/// command.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n_instances: usize,
    pub dims: Vec<usize>,
    pub grid_points: usize,
    pub kappa_choices: Vec<String>,
    pub bound: CampaignSummary,
    pub counterexample: CampaignSummary,
    pub purified: CampaignSummary,
    pub bound_violations: Vec<Violation>,
    pub purified_violations: Vec<Violation>,
    pub passed: bool,
}

/// Runs the bound, counterexample, and purified campaigns under one spec.
/// `passed` requires zero violations, a negative derivative at small theta
/// for every recorded instance, at least one positive derivative elsewhere,
/// and purified moment residuals within `1e-10`.
pub fn run_verify(spec: &CampaignSpec, cfg: &Config) -> VerifyReport {
    let bound = run_bound_campaign(spec, cfg);
    let counterexample = run_counterexample_campaign(spec, cfg);
    let purified = run_purified_campaign(spec, cfg);

    let completeness = counterexample.summary.counterexample_negative
        == counterexample.summary.counterexample_total
        && counterexample.summary.positive_example.is_some();
    let moments_ok = purified
        .summary
        .worst_moment_residual
        .is_none_or(|r| r <= MOMENT_TOL);
    let passed = bound.summary.violation_count == 0
        && purified.summary.violation_count == 0
        && completeness
        && moments_ok;

    VerifyReport {
        seed: spec.seed,
        n_instances: spec.n_instances,
        dims: spec.dims.clone(),
        grid_points: spec.grid_points,
        kappa_choices: spec.kappa_choices.iter().map(|k| k.to_string()).collect(),
        bound: bound.summary,
        counterexample: counterexample.summary,
        purified: purified.summary,
        bound_violations: bound.violations,
        purified_violations: purified.violations,
        passed,
    }
}
