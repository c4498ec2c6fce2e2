//! Serial revolute chains: forward kinematics, position Jacobian, and
//! damped least-squares inverse kinematics (position only).

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::Deserialize;

use crate::data::{finite3, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RevoluteJoint {
    /// Fixed transform from the previous joint frame (or the base).
    pub origin: Isometry3<f64>,
    pub axis: Unit<Vector3<f64>>,
    pub lower: f64,
    pub upper: f64,
}

impl RevoluteJoint {
    pub fn new(origin: Isometry3<f64>, axis: Vector3<f64>, lower: f64, upper: f64) -> Result<Self> {
        if !(axis.norm() > 1e-12) || !finite3(&axis) {
            return Err(Error::ChainFormat("joint axis must be non-zero".into()));
        }
        if !(lower < upper) {
            return Err(Error::ChainFormat(format!(
                "joint limits must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            origin,
            axis: Unit::new_normalize(axis),
            lower,
            upper,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain {
    pub base: Isometry3<f64>,
    pub joints: Vec<RevoluteJoint>,
    /// Tip offset in the last joint frame.
    pub tip: Vec3,
    /// Default configuration used to seed IK.
    pub home: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkParams {
    /// Damping λ in `Jᵀ(JJᵀ + λ²I)⁻¹ e`.
    pub damping: f64,
    /// Position tolerance in meters.
    pub tol: f64,
    pub max_iters: usize,
    /// Fraction of the DLS step applied per iteration, in `(0, 1]`.
    pub step_scale: f64,
}

impl Default for IkParams {
    fn default() -> Self {
        Self {
            damping: 0.05,
            tol: 1e-4,
            max_iters: 200,
            step_scale: 0.5,
        }
    }
}

impl IkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0)
            || !(self.tol > 0.0)
            || self.max_iters == 0
            || !(self.step_scale > 0.0 && self.step_scale <= 1.0)
        {
            return Err(Error::InvalidArgument(format!(
                "invalid IK parameters {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkSolution {
    pub q: Vec<f64>,
    /// `‖target − FK(q)‖` at the returned configuration.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn axis_angle(v: [f64; 4]) -> Result<UnitQuaternion<f64>> {
    let axis = Vector3::new(v[0], v[1], v[2]);
    if v[3] == 0.0 {
        return Ok(UnitQuaternion::identity());
    }
    if !(axis.norm() > 1e-12) {
        return Err(Error::ChainFormat("rotation axis must be non-zero".into()));
    }
    Ok(UnitQuaternion::from_axis_angle(
        &Unit::new_normalize(axis),
        v[3],
    ))
}

fn pose(translation: [f64; 3], rotation: [f64; 4]) -> Result<Isometry3<f64>> {
    Ok(Isometry3::from_parts(
        Translation3::new(translation[0], translation[1], translation[2]),
        axis_angle(rotation)?,
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    base: PoseFile,
    #[serde(rename = "joint")]
    joints: Vec<JointFile>,
    tip: Option<TipFile>,
    home: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseFile {
    translation: [f64; 3],
    #[serde(default = "no_rotation")]
    rotation: [f64; 4],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    translation: [f64; 3],
    #[serde(default = "no_rotation")]
    rotation: [f64; 4],
    axis: [f64; 3],
    limits: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TipFile {
    translation: [f64; 3],
}

fn no_rotation() -> [f64; 4] {
    [0.0, 0.0, 1.0, 0.0]
}

impl KinematicChain {
    pub fn new(base: Isometry3<f64>, joints: Vec<RevoluteJoint>, tip: Vec3) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::ChainFormat("chain needs at least one joint".into()));
        }
        let home = joints
            .iter()
            .map(|j| 0.0f64.clamp(j.lower, j.upper))
            .collect();
        Ok(Self {
            base,
            joints,
            tip,
            home,
        })
    }

    pub fn with_home(mut self, mut home: Vec<f64>) -> Result<Self> {
        self.check_dim(&home)?;
        self.clamp(&mut home);
        self.home = home;
        Ok(self)
    }

    /// Parses the TOML chain description (see the crate README for the format).
    pub fn from_toml(text: &str) -> Result<Self> {
        let f: ChainFile = toml::from_str(text).map_err(|e| Error::ChainFormat(e.to_string()))?;
        let joints = f
            .joints
            .iter()
            .map(|j| {
                RevoluteJoint::new(
                    pose(j.translation, j.rotation)?,
                    Vector3::from(j.axis),
                    j.limits[0],
                    j.limits[1],
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let tip = f.tip.map_or(Vec3::zeros(), |t| Vec3::from(t.translation));
        let chain = Self::new(pose(f.base.translation, f.base.rotation)?, joints, tip)?;
        match f.home {
            Some(h) => chain.with_home(h),
            None => Ok(chain),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::ChainFormat(format!("{}: {e}", path.display())))
    }

    /// Seven-joint arm with link offsets close to a common collaborative
    /// 7-DoF research arm (modified DH geometry, approximate). The tip sits
    /// at the gripper center.
    pub fn seven_dof_arm(base: Isometry3<f64>) -> Self {
        // (a, d, alpha, lower, upper) per joint
        let table = [
            (0.0, 0.333, 0.0, -2.8973, 2.8973),
            (0.0, 0.0, -FRAC_PI_2, -1.7628, 1.7628),
            (0.0, 0.316, FRAC_PI_2, -2.8973, 2.8973),
            (0.0825, 0.0, FRAC_PI_2, -3.0718, -0.0698),
            (-0.0825, 0.384, -FRAC_PI_2, -2.8973, 2.8973),
            (0.0, 0.0, FRAC_PI_2, -0.0175, 3.7525),
            (0.088, 0.0, FRAC_PI_2, -2.8973, 2.8973),
        ];
        let joints = table
            .iter()
            .map(|&(a, d, alpha, lo, hi)| {
                let rot = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), alpha);
                let trans = Vector3::new(a, 0.0, 0.0) + rot * Vector3::new(0.0, 0.0, d);
                RevoluteJoint::new(
                    Isometry3::from_parts(Translation3::from(trans), rot),
                    Vector3::z(),
                    lo,
                    hi,
                )
                .expect("static joint table is valid")
            })
            .collect();
        let chain = Self::new(base, joints, Vec3::new(0.0, 0.0, 0.2104)).expect("non-empty");
        chain
            .with_home(vec![
                0.0,
                -PI / 4.0,
                0.0,
                -3.0 * PI / 4.0,
                0.0,
                PI / 2.0,
                PI / 4.0,
            ])
            .expect("home has seven entries")
    }

    /// Left and right arms of the default bimanual setup: bases 0.5 m apart
    /// along y at 0.8 m height, both facing +x.
    pub fn default_arms() -> (Self, Self) {
        let base = |y: f64| Isometry3::translation(0.0, y, 0.8);
        (
            Self::seven_dof_arm(base(0.25)),
            Self::seven_dof_arm(base(-0.25)),
        )
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn clamp(&self, q: &mut [f64]) {
        for (v, j) in q.iter_mut().zip(&self.joints) {
            *v = v.clamp(j.lower, j.upper);
        }
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        q.iter()
            .zip(&self.joints)
            .all(|(v, j)| *v >= j.lower && *v <= j.upper)
    }

    fn check_dim(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                got: q.len(),
            });
        }
        Ok(())
    }

    /// World-frame joint origins and axes, plus the tip position.
    fn frames(&self, q: &[f64]) -> (Vec<(Vec3, Vec3)>, Vec3) {
        let mut pose = self.base;
        let mut out = Vec::with_capacity(self.dof());
        for (j, &angle) in self.joints.iter().zip(q) {
            pose *= j.origin;
            out.push((pose.translation.vector, pose.rotation * j.axis.into_inner()));
            pose *= Isometry3::from_parts(
                Translation3::identity(),
                UnitQuaternion::from_axis_angle(&j.axis, angle),
            );
        }
        (out, (pose * nalgebra::Point3::from(self.tip)).coords)
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Vec3> {
        self.check_dim(q)?;
        Ok(self.frames(q).1)
    }

    /// Geometric position Jacobian, column `j = axis_j × (tip − origin_j)`.
    pub fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(q)?;
        let (frames, tip) = self.frames(q);
        let mut jac = DMatrix::zeros(3, self.dof());
        for (c, (origin, axis)) in frames.iter().enumerate() {
            jac.set_column(c, &axis.cross(&(tip - origin)));
        }
        Ok(jac)
    }

    /// Damped least squares: `Δq = s · Jᵀ(JJᵀ + λ²I)⁻¹ e`, clamped to limits
    /// after every iteration. Returns the best configuration seen.
    pub fn ik_solve(&self, q_init: &[f64], target: &Vec3, params: &IkParams) -> Result<IkSolution> {
        self.check_dim(q_init)?;
        params.validate()?;
        if !finite3(target) {
            return Err(Error::InvalidArgument("IK target must be finite".into()));
        }
        let mut q = q_init.to_vec();
        self.clamp(&mut q);
        let mut best = (f64::INFINITY, q.clone());
        let damp = params.damping * params.damping;
        for iter in 0..=params.max_iters {
            let (frames, tip) = self.frames(&q);
            let err = target - tip;
            let residual = err.norm();
            if residual < best.0 {
                best = (residual, q.clone());
            }
            if residual < params.tol {
                return Ok(IkSolution {
                    q,
                    residual,
                    iterations: iter,
                    converged: true,
                });
            }
            if iter == params.max_iters {
                break;
            }
            let mut jjt = Matrix3::identity() * damp;
            let cols: Vec<Vec3> = frames.iter().map(|(o, a)| a.cross(&(tip - o))).collect();
            for c in &cols {
                jjt += c * c.transpose();
            }
            let Some(chol) = jjt.cholesky() else { break };
            let w = chol.solve(&err);
            for (v, c) in q.iter_mut().zip(&cols) {
                *v += params.step_scale * c.dot(&w);
            }
            self.clamp(&mut q);
        }
        let (residual, q) = best;
        Ok(IkSolution {
            converged: residual < params.tol,
            q,
            residual,
            iterations: params.max_iters,
        })
    }
}

/// Dense helper for tests and diagnostics: singular values of the Jacobian.
pub fn jacobian_singular_values(jac: &DMatrix<f64>) -> DVector<f64> {
    jac.clone().svd(false, false).singular_values
}
