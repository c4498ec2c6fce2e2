use std::collections::VecDeque;

use super::{log_sum_exp, ForwardMode, HsmmModel};
use crate::error::{Error, Result};

/// Normalizes log-weights. Returns the probabilities and the log of the
/// normalizer; adding a constant to every input leaves the probabilities
/// unchanged.
pub fn normalize_log_weights(log_w: &[f64]) -> (Vec<f64>, f64) {
    let c = log_sum_exp(log_w);
    (log_w.iter().map(|a| (a - c).exp()).collect(), c)
}

#[derive(Debug, Clone)]
struct StepRecord {
    /// ln α at this step, shifted so that its log-sum-exp is zero.
    log_alpha: Vec<f64>,
    /// Observed-block log-densities of this step's observation.
    log_emission: Vec<f64>,
    /// Log normalizer removed from α at this step.
    log_norm: f64,
    /// `ln Σ_j 𝒯(j,i) α_j` for each target state `i`, same scale as `log_alpha`.
    log_into: Vec<f64>,
}

/// Running forward variable for one online session.
///
/// The history keeps the last `D` steps (`D` = the model's largest maximum
/// duration). α is stored normalized per step together with that step's log
/// normalizer, which is enough to rebuild the relative scale of any α in the
/// window.
#[derive(Debug, Clone, Default)]
pub struct ForwardState {
    h: Vec<f64>,
    history: VecDeque<StepRecord>,
    t: usize,
}

impl ForwardState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Normalized forward weights. Empty before the first step.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Normalized ln α of the latest step.
    pub fn log_alpha(&self) -> Option<&[f64]> {
        self.history.back().map(|r| r.log_alpha.as_slice())
    }

    /// Advances by one observation with the chosen recursion.
    pub fn step(&mut self, model: &HsmmModel, y_obs: &[f64], mode: ForwardMode) -> Result<&[f64]> {
        match mode {
            ForwardMode::Literal => self.step_literal(model, y_obs),
            ForwardMode::ExplicitDuration => self.step_explicit_duration(model, y_obs),
        }
    }

    /// Plain HMM forward step.
    pub fn step_hmm(&mut self, model: &HsmmModel, y_obs: &[f64]) -> Result<&[f64]> {
        let n = model.n_states();
        let log_e = model.observed_logpdfs(y_obs)?;
        let log_a: Vec<f64> = (0..n)
            .map(|i| log_e[i] + self.hmm_predict(model, i))
            .collect();
        self.commit(model, log_a, log_e)
    }

    /// Duration sum times the HMM recursion.
    pub fn step_literal(&mut self, model: &HsmmModel, y_obs: &[f64]) -> Result<&[f64]> {
        let n = model.n_states();
        let log_e = model.observed_logpdfs(y_obs)?;
        let first = self.t == 0;
        let log_a: Vec<f64> = (0..n)
            .map(|i| {
                let base = log_e[i] + self.hmm_predict(model, i);
                if first {
                    base
                } else {
                    base + log_sum_exp(model.state(i).duration.log_probs())
                }
            })
            .collect();
        self.commit(model, log_a, log_e)
    }

    /// Explicit-duration step:
    /// `α_i(t) = Σ_j Σ_{d ≤ min(D_i, t)} p_i(d) 𝒯(j,i) α_j(t−d) Π_{s=t−d+1..t} N(y_s; i)`,
    /// where the `d = t` term uses the initial distribution instead of
    /// `Σ_j 𝒯(j,i) α_j(0)`.
    pub fn step_explicit_duration(&mut self, model: &HsmmModel, y_obs: &[f64]) -> Result<&[f64]> {
        let n = model.n_states();
        let log_e = model.observed_logpdfs(y_obs)?;
        let t_new = self.t + 1;
        let len = self.history.len();

        let mut log_a = Vec::with_capacity(n);
        let mut terms = Vec::new();
        for (i, state) in model.states().iter().enumerate() {
            let dur = &state.duration;
            let d_max = dur.max_duration().min(t_new);
            terms.clear();
            // segment emissions relative to the scale of step t_new − 1
            let mut acc = log_e[i];
            for d in 1..=d_max {
                if d > 1 {
                    let rec = &self.history[len - (d - 1)];
                    acc += rec.log_emission[i] - rec.log_norm;
                }
                let start = if d == t_new {
                    model.log_initial()[i]
                } else {
                    self.history[len - d].log_into[i]
                };
                terms.push(dur.log_prob(d) + acc + start);
            }
            log_a.push(log_sum_exp(&terms));
        }
        self.commit(model, log_a, log_e)
    }

    /// ln of the predicted weight of state `i` before the emission.
    fn hmm_predict(&self, model: &HsmmModel, i: usize) -> f64 {
        match self.history.back() {
            Some(prev) => prev.log_into[i],
            None => model.log_initial()[i],
        }
    }

    fn commit(&mut self, model: &HsmmModel, log_a: Vec<f64>, log_e: Vec<f64>) -> Result<&[f64]> {
        // Rows of 𝒯 sum to one and emissions are finite, so some path always
        // has positive weight; a non-finite normalizer means corrupted input.
        let log_norm = log_sum_exp(&log_a);
        if !log_norm.is_finite() {
            return Err(Error::ControllerFault(
                "forward recursion produced no finite weights".into(),
            ));
        }
        let log_alpha: Vec<f64> = log_a.iter().map(|a| a - log_norm).collect();
        let n = log_alpha.len();
        let log_t = model.log_transition();
        let mut terms = vec![0.0; n];
        let log_into = (0..n)
            .map(|i| {
                for (j, term) in terms.iter_mut().enumerate() {
                    *term = log_alpha[j] + log_t[(j, i)];
                }
                log_sum_exp(&terms)
            })
            .collect();
        self.h = log_alpha.iter().map(|a| a.exp()).collect();
        let cap = model.max_duration().max(1);
        while self.history.len() >= cap {
            self.history.pop_front();
        }
        self.history.push_back(StepRecord {
            log_alpha,
            log_emission: log_e,
            log_norm,
            log_into,
        });
        self.t += 1;
        Ok(&self.h)
    }
}
