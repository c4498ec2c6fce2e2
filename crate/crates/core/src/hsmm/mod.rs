//! Supervised hidden semi-Markov model over joint receiver/giver features.
//!
//! Each state carries a joint Gaussian over `[obs; out]`, partitioned at the
//! split index, and a discretized Gaussian duration model. Online inference
//! runs the forward recursion on the observed block only and conditions the
//! output block on the observation (Gaussian mixture regression).

mod fit;
mod forward;
mod gaussian;
mod io;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Distances, PhaseLabel};
use crate::error::{Error, Result};

pub use fit::{fit_supervised, fit_supervised_indexed, train_model, FitOptions, TrainOptions};
pub use forward::{normalize_log_weights, ForwardState};
pub use gaussian::{log_sum_exp, GaussianNd};
pub use io::{load_model, model_from_json, model_to_json, save_model, FORMAT_VERSION};

/// Default covariance regularization added to every state covariance.
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;
/// Tolerance on probability vectors summing to one.
pub const PROB_TOL: f64 = 1e-12;

/// Which forward recursion to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardMode {
    /// The duration sum multiplies the plain HMM recursion; with normalized
    /// duration probabilities this reduces to the HMM forward pass.
    Literal,
    /// Explicit-duration recursion over segment end times.
    #[default]
    ExplicitDuration,
}

impl std::str::FromStr for ForwardMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(ForwardMode::Literal),
            "explicit_duration" => Ok(ForwardMode::ExplicitDuration),
            other => Err(Error::InvalidArgument(format!(
                "unknown forward mode {other:?}"
            ))),
        }
    }
}

/// Joint Gaussian partitioned into an observed block (first `split` dims)
/// and an output block.
#[derive(Debug, Clone)]
pub struct BlockGaussian {
    joint: GaussianNd,
    split: usize,
    obs: GaussianNd,
    /// `Σ²¹ (Σ¹¹)⁻¹`
    regression: DMatrix<f64>,
    /// `Σ²² − Σ²¹ (Σ¹¹)⁻¹ Σ¹²`
    cond_cov: DMatrix<f64>,
}

impl BlockGaussian {
    pub fn new(joint: GaussianNd, split: usize) -> Result<Self> {
        let d = joint.dim();
        if split == 0 || split >= d {
            return Err(Error::InvalidArgument(format!(
                "split index {split} out of range for dimension {d}"
            )));
        }
        let out = d - split;
        let mean = joint.mean();
        let cov = joint.cov();
        let obs = GaussianNd::new(
            mean.rows(0, split).into_owned(),
            cov.view((0, 0), (split, split)).into_owned(),
        )?;
        let s12 = cov.view((0, split), (split, out)).into_owned();
        // X = (Σ¹¹)⁻¹ Σ¹², so Σ²¹ (Σ¹¹)⁻¹ = Xᵀ
        let x = obs.solve(&s12);
        let regression = x.transpose();
        let mut cond_cov = cov.view((split, split), (out, out)) - s12.transpose() * &x;
        cond_cov = (&cond_cov + cond_cov.transpose()) * 0.5;
        Ok(Self {
            joint,
            split,
            obs,
            regression,
            cond_cov,
        })
    }

    pub fn joint(&self) -> &GaussianNd {
        &self.joint
    }

    pub fn split(&self) -> usize {
        self.split
    }

    /// Marginal over the observed block.
    pub fn observed(&self) -> &GaussianNd {
        &self.obs
    }

    pub fn out_mean(&self) -> DVector<f64> {
        self.joint
            .mean()
            .rows(self.split, self.joint.dim() - self.split)
            .into_owned()
    }

    pub fn regression(&self) -> &DMatrix<f64> {
        &self.regression
    }

    pub fn conditional_cov(&self) -> &DMatrix<f64> {
        &self.cond_cov
    }

    /// Conditional mean `μ² + Σ²¹(Σ¹¹)⁻¹(y − μ¹)`.
    pub fn conditional_mean(&self, y_obs: &[f64]) -> DVector<f64> {
        let innovation = DVector::from_iterator(
            self.split,
            y_obs.iter().zip(self.obs.mean().iter()).map(|(y, m)| y - m),
        );
        self.out_mean() + &self.regression * innovation
    }
}

/// Gaussian over segment length in steps, discretized on `1..=max_duration`.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationModel {
    mean: f64,
    std: f64,
    max_duration: usize,
    log_probs: Vec<f64>,
}

impl DurationModel {
    pub fn new(mean: f64, std: f64, max_duration: usize) -> Result<Self> {
        if !mean.is_finite() || !(std > 0.0) || !std.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "duration model needs finite mean and positive std, got mean={mean} std={std}"
            )));
        }
        if max_duration == 0 {
            return Err(Error::InvalidArgument("max duration must be >= 1".into()));
        }
        // computed in the log domain so far tails stay finite
        let raw: Vec<f64> = (1..=max_duration)
            .map(|d| {
                let z = (d as f64 - mean) / std;
                -0.5 * z * z
            })
            .collect();
        let norm = log_sum_exp(&raw);
        let log_probs = raw.iter().map(|v| v - norm).collect();
        Ok(Self {
            mean,
            std,
            max_duration,
            log_probs,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn max_duration(&self) -> usize {
        self.max_duration
    }

    /// `ln p(d)` for `d` in `1..=max_duration`, `-inf` outside.
    pub fn log_prob(&self, d: usize) -> f64 {
        if d == 0 || d > self.max_duration {
            f64::NEG_INFINITY
        } else {
            self.log_probs[d - 1]
        }
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|v| v.exp()).collect()
    }

    pub(crate) fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }
}

/// One hidden state: its phase label, joint emission, and duration model.
#[derive(Debug, Clone)]
pub struct StateModel {
    pub phase: PhaseLabel,
    pub emission: BlockGaussian,
    pub duration: DurationModel,
}

/// Fitted model. Immutable after construction.
#[derive(Debug, Clone)]
pub struct HsmmModel {
    dt: f64,
    split: usize,
    regularization: f64,
    initial: Vec<f64>,
    transition: DMatrix<f64>,
    states: Vec<StateModel>,
    distance_refs: Distances,
    default_mode: ForwardMode,
    log_initial: Vec<f64>,
    log_transition: DMatrix<f64>,
}

impl HsmmModel {
    pub fn new(
        dt: f64,
        initial: Vec<f64>,
        transition: DMatrix<f64>,
        states: Vec<StateModel>,
        distance_refs: Distances,
        regularization: f64,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "model needs at least one state".into(),
            ));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if initial.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: initial.len(),
            });
        }
        if transition.nrows() != n || transition.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: transition.nrows(),
            });
        }
        check_distribution("initial distribution", &initial)?;
        for (i, row) in transition.row_iter().enumerate() {
            let row: Vec<f64> = row.iter().copied().collect();
            check_distribution(&format!("transition row {i}"), &row)?;
        }
        let split = states[0].emission.split();
        let dim = states[0].emission.joint().dim();
        for s in &states {
            if s.emission.split() != split || s.emission.joint().dim() != dim {
                return Err(Error::InvalidArgument(
                    "all states must share the same block layout".into(),
                ));
            }
        }
        let log_initial = initial.iter().map(|p| p.ln()).collect();
        let log_transition = transition.map(|p| p.ln());
        Ok(Self {
            dt,
            split,
            regularization,
            initial,
            transition,
            states,
            distance_refs,
            default_mode: ForwardMode::default(),
            log_initial,
            log_transition,
        })
    }

    /// Replaces the stored online reference distances.
    pub fn with_distance_refs(mut self, refs: Distances) -> Self {
        self.distance_refs = refs;
        self
    }

    /// Forward recursion a controller uses unless configured otherwise.
    pub fn with_default_mode(mut self, mode: ForwardMode) -> Self {
        self.default_mode = mode;
        self
    }

    pub fn default_mode(&self) -> ForwardMode {
        self.default_mode
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn joint_dim(&self) -> usize {
        self.states[0].emission.joint().dim()
    }

    pub fn out_dim(&self) -> usize {
        self.joint_dim() - self.split
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn states(&self) -> &[StateModel] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &StateModel {
        &self.states[i]
    }

    /// Mean mid-transfer reference distances over the training set.
    pub fn distance_refs(&self) -> Distances {
        self.distance_refs
    }

    pub fn max_duration(&self) -> usize {
        self.states
            .iter()
            .map(|s| s.duration.max_duration())
            .max()
            .unwrap_or(1)
    }

    pub(crate) fn log_initial(&self) -> &[f64] {
        &self.log_initial
    }

    pub(crate) fn log_transition(&self) -> &DMatrix<f64> {
        &self.log_transition
    }

    /// Log-densities of `y_obs` under each state's observed-block marginal.
    pub fn observed_logpdfs(&self, y_obs: &[f64]) -> Result<Vec<f64>> {
        if y_obs.len() != self.split {
            return Err(Error::DimensionMismatch {
                expected: self.split,
                got: y_obs.len(),
            });
        }
        self.states
            .iter()
            .map(|s| s.emission.observed().logpdf(y_obs))
            .collect()
    }

    /// Mixture conditional of the output block given `y_obs`, weighted by `h`.
    ///
    /// The covariance is the `h`-weighted average of per-state conditional
    /// covariances; spread between the per-state means is not included.
    pub fn condition(&self, h: &[f64], y_obs: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n_states();
        if h.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: h.len(),
            });
        }
        if y_obs.len() != self.split {
            return Err(Error::DimensionMismatch {
                expected: self.split,
                got: y_obs.len(),
            });
        }
        let out = self.out_dim();
        let mut mean = DVector::zeros(out);
        let mut cov = DMatrix::zeros(out, out);
        for (w, s) in h.iter().zip(&self.states) {
            if *w == 0.0 {
                continue;
            }
            mean += s.emission.conditional_mean(y_obs) * *w;
            cov += s.emission.conditional_cov() * *w;
        }
        Ok((mean, cov))
    }
}

fn check_distribution(what: &str, p: &[f64]) -> Result<()> {
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{what} has negative or non-finite entries"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() >= PROB_TOL {
        return Err(Error::InvalidArgument(format!(
            "{what} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}
