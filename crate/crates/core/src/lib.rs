//! Learned bimanual robot-to-human handover trajectories.
//!
//! The pipeline runs once per control tick:
//!
//! 1. featurize the observed receiver (human) hands and the object,
//! 2. advance the forward variable of a supervised hidden semi-Markov model,
//! 3. condition the per-state joint Gaussians on the observation to obtain
//!    giver (robot) hand velocities and integrate them,
//! 4. project the predicted hand pair onto the constant-grip-width set with an
//!    equality-constrained QP,
//! 5. resolve each hand target to joint angles with damped least squares.
//!
//! A straight-line baseline controller is provided for comparison.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod data;
pub mod error;
pub mod grip;
pub mod hsmm;
pub mod kinematics;
pub mod metrics;
pub mod qp;
pub mod synth;

pub use controller::{
    replay, BaselineParams, Controller, ControllerConfig, ControllerKind, ControllerState,
    ReferenceSource, Replay, StepOutput,
};
pub use data::{Demonstration, FeatureFrame, Frame, HandPair, PhaseLabel, Vec3};
pub use error::{Error, Result};
pub use grip::GripState;
pub use hsmm::{ForwardMode, ForwardState, HsmmModel};
pub use kinematics::{IkParams, IkSolution, KinematicChain};
pub use synth::SynthConfig;

/// Observed (receiver) block dimension of the joint feature vector.
pub const OBS_DIM: usize = 15;
/// Predicted (giver) block dimension of the joint feature vector.
pub const OUT_DIM: usize = 6;
/// Full joint feature dimension.
pub const JOINT_DIM: usize = OBS_DIM + OUT_DIM;
