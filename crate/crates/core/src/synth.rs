//! Synthetic handover demonstrations.
//!
//! Hand midpoints follow minimum-jerk segments between keypoints: both agents
//! reach toward their handover keypoints, hold during the transfer, and retreat.
//! Giver hands sit at `midpoint ± g/2` with a fixed grip vector `g`, so the
//! giver grip width is constant by construction. The object rides on the giver
//! grip midpoint up to the middle of the transfer and on the receiver grip
//! midpoint afterwards.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Demonstration, Frame, PhaseLabel, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub dt: f64,
    /// Phase durations in seconds.
    pub reach_duration: f64,
    pub transfer_duration: f64,
    pub retreat_duration: f64,
    /// Relative standard deviation applied to each phase duration per demonstration.
    pub duration_jitter: f64,
    /// Grip width in meters and the (unnormalized) direction of the grip vector.
    pub grip_width: f64,
    pub grip_axis: [f64; 3],
    /// Grip midpoint keypoints, meters.
    pub giver_start: [f64; 3],
    pub giver_handover: [f64; 3],
    pub giver_retreat: [f64; 3],
    pub receiver_start: [f64; 3],
    pub receiver_handover: [f64; 3],
    pub receiver_retreat: [f64; 3],
    /// Standard deviation of the per-demonstration keypoint perturbation, meters.
    pub keypoint_jitter: f64,
    /// Standard deviation of per-frame position noise, meters. Giver noise
    /// shifts both hands together and leaves the grip vector untouched.
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            reach_duration: 2.4,
            transfer_duration: 1.2,
            retreat_duration: 2.4,
            duration_jitter: 0.08,
            grip_width: 0.3,
            grip_axis: [0.0, 1.0, 0.0],
            giver_start: [0.35, 0.0, 1.0],
            giver_handover: [0.6, 0.0, 1.1],
            giver_retreat: [0.35, 0.0, 0.95],
            receiver_start: [1.4, 0.0, 1.0],
            receiver_handover: [0.72, 0.0, 1.1],
            receiver_retreat: [1.45, 0.0, 1.0],
            keypoint_jitter: 0.03,
            noise: 0.0005,
        }
    }
}

impl SynthConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("generator config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("reach_duration", self.reach_duration),
            ("transfer_duration", self.transfer_duration),
            ("retreat_duration", self.retreat_duration),
            ("grip_width", self.grip_width),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("noise", self.noise),
            ("keypoint_jitter", self.keypoint_jitter),
            ("duration_jitter", self.duration_jitter),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if !(Vec3::from(self.grip_axis).norm() > 1e-12) {
            return Err(Error::InvalidArgument("grip_axis must be non-zero".into()));
        }
        for d in [
            self.reach_duration,
            self.transfer_duration,
            self.retreat_duration,
        ] {
            if d < self.dt {
                return Err(Error::InvalidArgument(format!(
                    "phase duration {d} is shorter than dt {}",
                    self.dt
                )));
            }
        }
        Ok(())
    }
}

/// Minimum-jerk blend `s(τ) = 10τ³ − 15τ⁴ + 6τ⁵` and its derivative `ds/dτ`,
/// with `τ` clamped to `[0, 1]`.
pub fn min_jerk(tau: f64) -> (f64, f64) {
    let t = tau.clamp(0.0, 1.0);
    let t2 = t * t;
    let s = t2 * t * (10.0 - 15.0 * t + 6.0 * t2);
    let ds = if (0.0..=1.0).contains(&tau) {
        30.0 * t2 * (1.0 - t) * (1.0 - t)
    } else {
        0.0
    };
    (s, ds)
}

fn segment(from: &Vec3, to: &Vec3, t: f64, t0: f64, t1: f64) -> Vec3 {
    let (s, _) = min_jerk((t - t0) / (t1 - t0));
    from + (to - from) * s
}

/// Generates one demonstration, deterministic in `seed`.
pub fn synth_demo(config: &SynthConfig, seed: u64) -> Result<Demonstration> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut gauss = |scale: f64| scale * std_normal.sample(&mut rng);

    let mut key = |p: [f64; 3]| {
        let j = config.keypoint_jitter;
        Vec3::new(p[0] + gauss(j), p[1] + gauss(j), p[2] + gauss(j))
    };
    let g_start = key(config.giver_start);
    let g_hand = key(config.giver_handover);
    let g_ret = key(config.giver_retreat);
    let r_start = key(config.receiver_start);
    let r_hand = key(config.receiver_handover);
    let r_ret = key(config.receiver_retreat);

    let dt = config.dt;
    let mut steps = |d: f64| {
        let scaled = d * (1.0 + gauss(config.duration_jitter)).max(0.25);
        ((scaled / dt).round() as usize).max(2)
    };
    let n_reach = steps(config.reach_duration);
    let n_transfer = steps(config.transfer_duration);
    let n_retreat = steps(config.retreat_duration);
    let total = n_reach + n_transfer + n_retreat;

    let grip = Vec3::from(config.grip_axis).normalize() * config.grip_width;
    let half = grip * 0.5;
    let reach_end = n_reach as f64 * dt;
    let retreat_start = (n_reach + n_transfer - 1) as f64 * dt;
    let end = (total - 1) as f64 * dt;
    let mid_transfer = n_reach + (n_transfer - 1) / 2;

    let noise = config.noise;
    let mut frames = Vec::with_capacity(total);
    for k in 0..total {
        let t = k as f64 * dt;
        let (phase, giver_mid, receiver_mid) = if k < n_reach {
            (
                PhaseLabel::Reach,
                segment(&g_start, &g_hand, t, 0.0, reach_end),
                segment(&r_start, &r_hand, t, 0.0, reach_end),
            )
        } else if k < n_reach + n_transfer {
            (PhaseLabel::Transfer, g_hand, r_hand)
        } else {
            (
                PhaseLabel::Retreat,
                segment(&g_hand, &g_ret, t, retreat_start, end),
                segment(&r_hand, &r_ret, t, retreat_start, end),
            )
        };
        let mut jitter = || Vec3::new(gauss(noise), gauss(noise), gauss(noise));
        let giver_mid = giver_mid + jitter();
        let receiver_left = receiver_mid + half + jitter();
        let receiver_right = receiver_mid - half + jitter();
        let object = if k <= mid_transfer {
            giver_mid
        } else {
            (receiver_left + receiver_right) * 0.5
        } + jitter();
        frames.push(Frame {
            t,
            giver_left: giver_mid + half,
            giver_right: giver_mid - half,
            receiver_left,
            receiver_right,
            object,
            phase,
        });
    }
    Demonstration::new(frames)
}
