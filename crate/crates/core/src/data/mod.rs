//! Demonstration data: frames, validation, resampling, and featurization.

mod features;
mod io;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use features::{
    build_features, build_features_with_refs, compute_velocities, frame_distances,
    transfer_reference_distances, Distances, FeatureFrame,
};
pub use io::{
    demonstration_files, load_demonstration, load_demonstrations, save_demonstration,
    write_demonstration, HEADER,
};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Tolerance on frame spacing for a demonstration to count as uniformly sampled.
pub const UNIFORM_TOL: f64 = 1e-9;

/// Handover phase. Also the default state labelling of the HSMM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLabel {
    Reach,
    Transfer,
    Retreat,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 3] = [PhaseLabel::Reach, PhaseLabel::Transfer, PhaseLabel::Retreat];

    pub fn index(self) -> usize {
        match self {
            PhaseLabel::Reach => 0,
            PhaseLabel::Transfer => 1,
            PhaseLabel::Retreat => 2,
        }
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        Self::ALL.get(idx).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::Reach => "reach",
            PhaseLabel::Transfer => "transfer",
            PhaseLabel::Retreat => "retreat",
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "reach" => Ok(PhaseLabel::Reach),
            "transfer" => Ok(PhaseLabel::Transfer),
            "retreat" => Ok(PhaseLabel::Retreat),
            other => Err(Error::InvalidArgument(format!(
                "unknown phase label {other:?}"
            ))),
        }
    }
}

/// Left and right hand positions of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandPair {
    pub left: Vec3,
    pub right: Vec3,
}

impl HandPair {
    pub fn new(left: Vec3, right: Vec3) -> Self {
        Self { left, right }
    }

    /// Grip vector, pointing from the right hand to the left hand.
    pub fn grip(&self) -> Vec3 {
        self.left - self.right
    }

    pub fn midpoint(&self) -> Vec3 {
        (self.left + self.right) * 0.5
    }

    pub fn is_finite(&self) -> bool {
        finite3(&self.left) && finite3(&self.right)
    }

    /// Stacked `[left; right]` 6-vector.
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.left.x,
            self.left.y,
            self.left.z,
            self.right.x,
            self.right.y,
            self.right.z,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            left: Vec3::new(v[0], v[1], v[2]),
            right: Vec3::new(v[3], v[4], v[5]),
        }
    }
}

pub(crate) fn finite3(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// One time-stamped sample of a bimanual handover.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub giver_left: Vec3,
    pub giver_right: Vec3,
    pub receiver_left: Vec3,
    pub receiver_right: Vec3,
    pub object: Vec3,
    pub phase: PhaseLabel,
}

impl Frame {
    pub fn giver(&self) -> HandPair {
        HandPair::new(self.giver_left, self.giver_right)
    }

    pub fn receiver(&self) -> HandPair {
        HandPair::new(self.receiver_left, self.receiver_right)
    }

    fn positions(&self) -> [&Vec3; 5] {
        [
            &self.giver_left,
            &self.giver_right,
            &self.receiver_left,
            &self.receiver_right,
            &self.object,
        ]
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite() && self.positions().iter().all(|p| finite3(p))
    }
}

/// A recorded (or synthesized) handover.
///
/// `dt` is the mean frame spacing; it equals the exact spacing once the
/// demonstration has been through [`resample_uniform`].
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    pub frames: Vec<Frame>,
    pub dt: f64,
}

impl Demonstration {
    /// Builds a demonstration, enforcing all invariants: at least three frames,
    /// finite values, strictly increasing time, and one contiguous segment per
    /// phase in Reach, Transfer, Retreat order.
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        if frames.len() < 3 {
            return Err(Error::InvalidDemonstration(format!(
                "need at least 3 frames, got {}",
                frames.len()
            )));
        }
        check_frames(&frames)?;
        check_phase_segments(&frames)?;
        let dt = mean_spacing(&frames);
        Ok(Self { frames, dt })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.frames.last().map_or(0.0, |l| l.t) - self.frames.first().map_or(0.0, |f| f.t)
    }

    pub fn is_uniform(&self, dt: f64) -> bool {
        self.frames
            .windows(2)
            .all(|w| (w[1].t - w[0].t - dt).abs() < UNIFORM_TOL)
    }

    pub fn labels(&self) -> Vec<PhaseLabel> {
        self.frames.iter().map(|f| f.phase).collect()
    }

    /// Inclusive index range of the frames labelled `phase`, if any.
    pub fn phase_range(&self, phase: PhaseLabel) -> Option<(usize, usize)> {
        let first = self.frames.iter().position(|f| f.phase == phase)?;
        let last = self.frames.iter().rposition(|f| f.phase == phase)?;
        Some((first, last))
    }
}

fn mean_spacing(frames: &[Frame]) -> f64 {
    let n = frames.len();
    if n < 2 {
        return 0.0;
    }
    (frames[n - 1].t - frames[0].t) / (n - 1) as f64
}

fn check_frames(frames: &[Frame]) -> Result<()> {
    for (k, f) in frames.iter().enumerate() {
        if !f.is_finite() {
            return Err(Error::InvalidDemonstration(format!(
                "frame {k} has non-finite values"
            )));
        }
    }
    for (k, w) in frames.windows(2).enumerate() {
        if w[1].t <= w[0].t {
            return Err(Error::InvalidDemonstration(format!(
                "time not strictly increasing at frame {} (t={} after t={})",
                k + 1,
                w[1].t,
                w[0].t
            )));
        }
    }
    Ok(())
}

fn check_phase_segments(frames: &[Frame]) -> Result<()> {
    // labels must be nondecreasing in phase order, and every phase present
    for (k, w) in frames.windows(2).enumerate() {
        if w[1].phase < w[0].phase {
            return Err(Error::InvalidDemonstration(format!(
                "phase {} follows {} at frame {}; expected reach -> transfer -> retreat",
                w[1].phase,
                w[0].phase,
                k + 1
            )));
        }
    }
    for phase in PhaseLabel::ALL {
        if !frames.iter().any(|f| f.phase == phase) {
            return Err(Error::InvalidDemonstration(format!(
                "missing {phase} segment"
            )));
        }
    }
    Ok(())
}

fn lerp(a: &Vec3, b: &Vec3, s: f64) -> Vec3 {
    a + (b - a) * s
}

/// Resamples `demo` onto the grid `t_0, t_0 + dt, ...` by linear interpolation
/// of all positions. Phase labels come from the nearest original frame (the
/// earlier one on ties).
pub fn resample_uniform(demo: &Demonstration, dt: f64) -> Result<Demonstration> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let src = &demo.frames;
    if src.len() < 2 {
        return Err(Error::InvalidDemonstration(
            "need at least 2 frames to resample".into(),
        ));
    }
    check_frames(src)?;
    let t0 = src[0].t;
    let span = src[src.len() - 1].t - t0;
    if dt > span {
        return Err(Error::InvalidArgument(format!(
            "dt {dt} exceeds demonstration span {span}"
        )));
    }
    let count = (span / dt + 1e-9).floor() as usize + 1;
    let mut frames = Vec::with_capacity(count);
    let mut seg = 0;
    for k in 0..count {
        let t = t0 + k as f64 * dt;
        while seg + 2 < src.len() && src[seg + 1].t < t {
            seg += 1;
        }
        let (a, b) = (&src[seg], &src[seg + 1]);
        let s = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        let phase = if (t - a.t) <= (b.t - t) {
            a.phase
        } else {
            b.phase
        };
        frames.push(Frame {
            t,
            giver_left: lerp(&a.giver_left, &b.giver_left, s),
            giver_right: lerp(&a.giver_right, &b.giver_right, s),
            receiver_left: lerp(&a.receiver_left, &b.receiver_left, s),
            receiver_right: lerp(&a.receiver_right, &b.receiver_right, s),
            object: lerp(&a.object, &b.object, s),
            phase,
        });
    }
    for phase in PhaseLabel::ALL {
        let before = src.iter().any(|f| f.phase == phase);
        let after = frames.iter().any(|f| f.phase == phase);
        if before && !after {
            return Err(Error::InvalidDemonstration(format!(
                "{phase} segment is shorter than dt={dt} and vanished in resampling"
            )));
        }
    }
    Ok(Demonstration { frames, dt })
}
