//! Per-tick handover controllers: the learned HSMM pipeline and the
//! straight-line baseline.

use std::sync::Arc;

use crate::data::{frame_distances, Distances, FeatureFrame, HandPair, PhaseLabel, Vec3};
use crate::error::{Error, Result};
use crate::grip::{project_grip, GripState};
use crate::hsmm::{ForwardMode, ForwardState, HsmmModel};
use crate::kinematics::{IkParams, KinematicChain};
use crate::{OBS_DIM, OUT_DIM};

/// Tolerance on the controller dt matching the model's training dt.
pub const DT_TOL: f64 = 1e-9;

/// Where online distance references come from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ReferenceSource {
    /// Mean of the per-demonstration mid-transfer references stored in the model.
    #[default]
    TrainingMean,
    Provided(Distances),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    /// Speed cap of each giver hand, m/s.
    pub v_max: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self { v_max: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct ControllerConfig {
    pub model: Arc<HsmmModel>,
    pub left_arm: KinematicChain,
    pub right_arm: KinematicChain,
    pub dt: f64,
    pub mode: ForwardMode,
    pub references: ReferenceSource,
    pub ik: IkParams,
    /// IK residuals above this are flagged in the step diagnostics.
    pub ik_residual_threshold: f64,
    pub baseline: BaselineParams,
}

impl ControllerConfig {
    /// Defaults: the model's forward mode, training-mean references,
    /// default IK parameters, dt taken from the model.
    pub fn new(model: Arc<HsmmModel>, left_arm: KinematicChain, right_arm: KinematicChain) -> Self {
        let ik = IkParams::default();
        Self {
            dt: model.dt(),
            mode: model.default_mode(),
            model,
            left_arm,
            right_arm,
            references: ReferenceSource::default(),
            ik,
            ik_residual_threshold: ik.tol,
            baseline: BaselineParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if (self.dt - self.model.dt()).abs() >= DT_TOL {
            return Err(Error::InvalidArgument(format!(
                "controller dt {} does not match model dt {}",
                self.dt,
                self.model.dt()
            )));
        }
        if self.model.split() != OBS_DIM || self.model.out_dim() != OUT_DIM {
            return Err(Error::InvalidArgument(format!(
                "model layout {}+{} does not match the {OBS_DIM}+{OUT_DIM} handover features",
                self.model.split(),
                self.model.out_dim()
            )));
        }
        if !(self.baseline.v_max > 0.0) {
            return Err(Error::InvalidArgument(
                "baseline v_max must be positive".into(),
            ));
        }
        self.ik.validate()
    }

    pub fn reference_distances(&self) -> Distances {
        match self.references {
            ReferenceSource::TrainingMean => self.model.distance_refs(),
            ReferenceSource::Provided(d) => d,
        }
    }
}

/// Result of one control tick.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub step: usize,
    pub q_left: Vec<f64>,
    pub q_right: Vec<f64>,
    pub x_pred: HandPair,
    pub x_opt: HandPair,
    /// Forward weights; `None` for the baseline.
    pub h: Option<Vec<f64>>,
    /// Estimated phase; `None` for the baseline.
    pub phase: Option<PhaseLabel>,
    /// `|‖x_opt.left − x_opt.right‖ − ‖g0‖|`.
    pub grip_error: f64,
    pub ik_residual_left: f64,
    pub ik_residual_right: f64,
    /// Either IK residual exceeded the configured threshold.
    pub ik_flagged: bool,
}

#[derive(Debug, Clone)]
pub struct ControllerState {
    pub forward: ForwardState,
    pub grip: GripState,
    /// Giver hand positions after the last step.
    pub x_prev: HandPair,
    pub q_left: Vec<f64>,
    pub q_right: Vec<f64>,
    pub receiver_prev: Option<HandPair>,
    pub step: usize,
    /// Most recent successful output.
    pub last_output: Option<StepOutput>,
}

/// Controller bound to an immutable configuration. Sessions are separate
/// [`ControllerState`] values.
#[derive(Debug, Clone)]
pub struct Controller {
    config: ControllerConfig,
}

impl Controller {
    pub fn new(config: ControllerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn model(&self) -> &HsmmModel {
        &self.config.model
    }

    /// Starts a session at the robot's initial hand positions. The initial
    /// grip vector is `left − right`; joint angles come from IK seeded at each
    /// arm's home configuration.
    pub fn init(&self, giver_start: HandPair, object_start: Vec3) -> Result<ControllerState> {
        if !object_start.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "object position must be finite".into(),
            ));
        }
        let grip = GripState::new(giver_start)?;
        let c = &self.config;
        let left = c
            .left_arm
            .ik_solve(&c.left_arm.home, &giver_start.left, &c.ik)?;
        let right = c
            .right_arm
            .ik_solve(&c.right_arm.home, &giver_start.right, &c.ik)?;
        Ok(ControllerState {
            forward: ForwardState::new(),
            grip,
            x_prev: giver_start,
            q_left: left.q,
            q_right: right.q,
            receiver_prev: None,
            step: 0,
            last_output: None,
        })
    }

    /// Builds the observation vector for the current tick. Receiver velocity is
    /// a backward difference (zero on the first tick).
    pub fn observation(
        &self,
        state: &ControllerState,
        receiver: &HandPair,
        object: &Vec3,
    ) -> [f64; OBS_DIM] {
        let dt = self.config.dt;
        let (vl, vr) = match &state.receiver_prev {
            Some(prev) => (
                (receiver.left - prev.left) / dt,
                (receiver.right - prev.right) / dt,
            ),
            None => (Vec3::zeros(), Vec3::zeros()),
        };
        let raw = frame_distances(
            &state.x_prev.left,
            &state.x_prev.right,
            &receiver.left,
            &receiver.right,
            object,
        );
        let refs = self.config.reference_distances();
        let rel = Distances {
            giver_receiver: raw.giver_receiver - refs.giver_receiver,
            object_giver: raw.object_giver - refs.object_giver,
            object_receiver: raw.object_receiver - refs.object_receiver,
        };
        FeatureFrame::observation(&receiver.left, &receiver.right, &vl, &vr, rel)
    }

    /// One tick of the learned controller.
    ///
    /// On a fault (collapsed grip prediction or non-finite velocities) the
    /// observation is still absorbed by the forward state, while the giver
    /// hands, grip state, and joint commands keep their last good values.
    pub fn observe_and_step(
        &self,
        state: &mut ControllerState,
        receiver: &HandPair,
        object: &Vec3,
    ) -> Result<StepOutput> {
        check_inputs(receiver, object)?;
        let c = &self.config;
        let obs = self.observation(state, receiver, object);
        state.forward.step(&c.model, &obs, c.mode)?;
        state.receiver_prev = Some(*receiver);
        let h = state.forward.h().to_vec();

        let (vel, _) = c.model.condition(&h, &obs)?;
        if vel.iter().any(|v| !v.is_finite()) {
            return Err(Error::ControllerFault(
                "non-finite predicted velocity".into(),
            ));
        }
        let step_vec = HandPair::from_slice(vel.as_slice());
        let x_pred = HandPair::new(
            state.x_prev.left + step_vec.left * c.dt,
            state.x_prev.right + step_vec.right * c.dt,
        );
        let g = state.grip.propagate(&x_pred)?;
        let x_opt = project_grip(&x_pred, &g)?;
        state.grip.advance(g, x_opt);

        let phase = self.phase_of(&h)?;
        let out = self.finish(state, x_pred, x_opt, Some(h), Some(phase))?;
        Ok(out)
    }

    /// One tick of the baseline: each giver hand moves straight toward the
    /// matching receiver hand, at most `v_max · dt` per tick. No learning and no
    /// grip projection.
    pub fn baseline_step(
        &self,
        state: &mut ControllerState,
        receiver: &HandPair,
    ) -> Result<StepOutput> {
        if !receiver.is_finite() {
            return Err(Error::InvalidArgument(
                "receiver positions must be finite".into(),
            ));
        }
        let max_step = self.config.baseline.v_max * self.config.dt;
        let toward = |from: &Vec3, to: &Vec3| {
            let d = to - from;
            let dist = d.norm();
            if dist <= max_step {
                *to
            } else {
                from + d * (max_step / dist)
            }
        };
        let target = HandPair::new(
            toward(&state.x_prev.left, &receiver.left),
            toward(&state.x_prev.right, &receiver.right),
        );
        state.receiver_prev = Some(*receiver);
        self.finish(state, target, target, None, None)
    }

    fn finish(
        &self,
        state: &mut ControllerState,
        x_pred: HandPair,
        x_opt: HandPair,
        h: Option<Vec<f64>>,
        phase: Option<PhaseLabel>,
    ) -> Result<StepOutput> {
        let c = &self.config;
        let left = c.left_arm.ik_solve(&state.q_left, &x_opt.left, &c.ik)?;
        let right = c.right_arm.ik_solve(&state.q_right, &x_opt.right, &c.ik)?;
        state.x_prev = x_opt;
        state.q_left = left.q.clone();
        state.q_right = right.q.clone();
        state.step += 1;
        let out = StepOutput {
            step: state.step,
            q_left: left.q,
            q_right: right.q,
            x_pred,
            x_opt,
            h,
            phase,
            grip_error: (x_opt.grip().norm() - state.grip.width()).abs(),
            ik_residual_left: left.residual,
            ik_residual_right: right.residual,
            ik_flagged: left.residual > c.ik_residual_threshold
                || right.residual > c.ik_residual_threshold,
        };
        state.last_output = Some(out.clone());
        Ok(out)
    }

    /// Phase of the most probable state; ties go to the earlier phase.
    pub fn phase_estimate(&self, state: &ControllerState) -> Result<PhaseLabel> {
        if state.forward.t() == 0 {
            return Err(Error::ControllerFault(
                "phase estimate requested before any observation".into(),
            ));
        }
        self.phase_of(state.forward.h())
    }

    fn phase_of(&self, h: &[f64]) -> Result<PhaseLabel> {
        phase_argmax(self.model(), h)
    }
}

/// Phase label of `argmax h`, breaking exact ties toward the earlier phase.
pub fn phase_argmax(model: &HsmmModel, h: &[f64]) -> Result<PhaseLabel> {
    if h.len() != model.n_states() {
        return Err(Error::DimensionMismatch {
            expected: model.n_states(),
            got: h.len(),
        });
    }
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    h.iter()
        .zip(model.states())
        .filter(|(w, _)| **w == max)
        .map(|(_, s)| s.phase)
        .min()
        .ok_or_else(|| Error::ControllerFault("forward weights are not comparable".into()))
}

fn check_inputs(receiver: &HandPair, object: &Vec3) -> Result<()> {
    if !receiver.is_finite() || !object.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument(
            "receiver and object positions must be finite".into(),
        ));
    }
    Ok(())
}

/// Which controller a replay drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    Hsmm,
    Baseline,
}

/// Outputs of a full replay plus the number of ticks that faulted.
#[derive(Debug, Clone)]
pub struct Replay {
    pub outputs: Vec<StepOutput>,
    pub faults: usize,
}

impl Replay {
    pub fn x_opt(&self) -> Vec<HandPair> {
        self.outputs.iter().map(|o| o.x_opt).collect()
    }
}

/// Feeds every frame's receiver hands and object through a fresh session
/// started at the first frame's giver hands. One output per frame; faulted
/// ticks repeat the last good output.
pub fn replay(
    controller: &Controller,
    demo: &crate::data::Demonstration,
    kind: ControllerKind,
) -> Result<Replay> {
    let first = demo
        .frames
        .first()
        .ok_or_else(|| Error::InvalidDemonstration("empty stream".into()))?;
    let mut state = controller.init(first.giver(), first.object)?;
    let mut outputs = Vec::with_capacity(demo.frames.len());
    let mut faults = 0;
    for f in &demo.frames {
        let receiver = f.receiver();
        let res = match kind {
            ControllerKind::Hsmm => controller.observe_and_step(&mut state, &receiver, &f.object),
            ControllerKind::Baseline => controller.baseline_step(&mut state, &receiver),
        };
        match res {
            Ok(out) => outputs.push(out),
            Err(Error::PredictionCollapse | Error::ControllerFault(_)) => {
                faults += 1;
                let held = match &state.last_output {
                    Some(o) => o.clone(),
                    None => StepOutput {
                        step: state.step,
                        q_left: state.q_left.clone(),
                        q_right: state.q_right.clone(),
                        x_pred: state.x_prev,
                        x_opt: state.x_prev,
                        h: None,
                        phase: None,
                        grip_error: (state.x_prev.grip().norm() - state.grip.width()).abs(),
                        ik_residual_left: 0.0,
                        ik_residual_right: 0.0,
                        ik_flagged: false,
                    },
                };
                outputs.push(held);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Replay { outputs, faults })
}
