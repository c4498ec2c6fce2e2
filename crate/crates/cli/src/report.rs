use serde::{Deserialize, Serialize};

use handover_core::metrics;
use handover_core::{HandPair, Replay};

/// Objective metrics of one replayed trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Giver-hand position RMSE against the recorded trajectory, meters.
    pub rmse: f64,
    /// Largest deviation of the commanded hand separation from the initial grip width, meters.
    pub max_grip_deviation: f64,
    /// Mean jerk magnitude of the commanded hands, m/s³.
    pub mean_abs_jerk: f64,
    /// Fraction of ticks whose phase estimate does not step backwards (1 for the baseline).
    pub phase_monotone_fraction: f64,
    pub ik_residual_mean: f64,
    pub ik_residual_max: f64,
    pub faults: usize,
}

impl Metrics {
    /// Output `k` is the hand target for frame `k + 1`, so it is compared
    /// against the recorded giver hands one frame later.
    pub fn compute(replay: &Replay, truth: &[HandPair], grip_width: f64, dt: f64) -> Self {
        let x = replay.x_opt();
        let n = x.len().min(truth.len());
        let rmse = if n > 1 {
            metrics::trajectory_rmse(&x[..n - 1], &truth[1..n])
        } else {
            0.0
        };
        let phases: Vec<usize> = replay
            .outputs
            .iter()
            .filter_map(|o| o.phase.map(|p| p.index()))
            .collect();
        let residuals: Vec<f64> = replay
            .outputs
            .iter()
            .flat_map(|o| [o.ik_residual_left, o.ik_residual_right])
            .collect();
        let ik_residual_mean = if residuals.is_empty() {
            0.0
        } else {
            residuals.iter().sum::<f64>() / residuals.len() as f64
        };
        Self {
            rmse,
            max_grip_deviation: metrics::max_grip_deviation(&x, grip_width),
            mean_abs_jerk: metrics::mean_abs_jerk(&x, dt),
            phase_monotone_fraction: metrics::monotone_fraction(&phases),
            ik_residual_mean,
            ik_residual_max: residuals.iter().copied().fold(0.0, f64::max),
            faults: replay.faults,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub index: usize,
    pub file: String,
    pub frames: usize,
    pub hsmm: Metrics,
    pub baseline: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: SummaryRow,
    pub median: SummaryRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub rmse: f64,
    pub max_grip_deviation: f64,
    pub mean_abs_jerk: f64,
    pub phase_monotone_fraction: f64,
    pub ik_residual_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub trials: Vec<TrialReport>,
    pub hsmm: Summary,
    pub baseline: Summary,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    match s.len() {
        0 => 0.0,
        n if n % 2 == 1 => s[n / 2],
        n => 0.5 * (s[n / 2 - 1] + s[n / 2]),
    }
}

fn summarize(ms: &[&Metrics]) -> Summary {
    let col = |f: fn(&Metrics) -> f64| ms.iter().map(|m| f(m)).collect::<Vec<_>>();
    let cols = [
        col(|m| m.rmse),
        col(|m| m.max_grip_deviation),
        col(|m| m.mean_abs_jerk),
        col(|m| m.phase_monotone_fraction),
        col(|m| m.ik_residual_mean),
    ];
    let row = |agg: fn(&[f64]) -> f64| SummaryRow {
        rmse: agg(&cols[0]),
        max_grip_deviation: agg(&cols[1]),
        mean_abs_jerk: agg(&cols[2]),
        phase_monotone_fraction: agg(&cols[3]),
        ik_residual_mean: agg(&cols[4]),
    };
    Summary {
        mean: row(mean),
        median: row(median),
    }
}

impl EvalReport {
    pub fn new(trials: Vec<TrialReport>) -> Self {
        let h: Vec<&Metrics> = trials.iter().map(|t| &t.hsmm).collect();
        let b: Vec<&Metrics> = trials.iter().map(|t| &t.baseline).collect();
        Self {
            hsmm: summarize(&h),
            baseline: summarize(&b),
            trials,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Fixed-width summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:<7} {:>10} {:>12} {:>12} {:>10} {:>10}\n",
            "controller", "stat", "rmse[m]", "grip_dev[m]", "jerk[m/s3]", "phase_mono", "ik_res[m]"
        ));
        for (name, s) in [("hsmm", &self.hsmm), ("baseline", &self.baseline)] {
            for (stat, r) in [("mean", &s.mean), ("median", &s.median)] {
                out.push_str(&format!(
                    "{:<10} {:<7} {:>10.5} {:>12.3e} {:>12.3} {:>10.3} {:>10.3e}\n",
                    name,
                    stat,
                    r.rmse,
                    r.max_grip_deviation,
                    r.mean_abs_jerk,
                    r.phase_monotone_fraction,
                    r.ik_residual_mean
                ));
            }
        }
        out.push_str(&format!("trials: {}\n", self.trials.len()));
        out
    }
}
