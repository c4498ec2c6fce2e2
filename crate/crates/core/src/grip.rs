//! Constant grip-width enforcement.
//!
//! The grip vector (right hand to left hand) is carried along by rotating it
//! with the change in direction of the predicted hands, then the predicted
//! hand pair is projected onto `left − right = g` with an equality QP.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::data::{finite3, HandPair, Vec3};
use crate::error::{Error, Result};
use crate::qp::EqualityQp;

/// Inputs shorter than this are treated as zero-length.
pub const MIN_VECTOR_NORM: f64 = 1e-9;
/// Cosine below `-1 + ANTIPARALLEL_TOL` takes the fixed-axis half-turn branch.
pub const ANTIPARALLEL_TOL: f64 = 1e-9;
/// Below this cross-product norm (with positive cosine) the rotation is the identity.
const PARALLEL_TOL: f64 = 1e-14;

fn skew(k: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0)
}

/// Minimal rotation taking the direction of `u` onto the direction of `v`.
///
/// Near-anti-parallel inputs first rotate by π about the normalized larger of
/// `x̂ × û` and `ŷ × û`, then by the small remaining rotation from `−û` onto
/// `v̂`, so the direction mapping stays exact inside the tolerance band.
pub fn rotation_between(u: &Vec3, v: &Vec3) -> Result<Matrix3<f64>> {
    let (nu, nv) = (u.norm(), v.norm());
    if !(nu > MIN_VECTOR_NORM) || !(nv > MIN_VECTOR_NORM) {
        return Err(Error::InvalidArgument(format!(
            "rotation_between needs non-zero vectors, got norms {nu:e} and {nv:e}"
        )));
    }
    let (u, v) = (u / nu, v / nv);
    if u.dot(&v) < -1.0 + ANTIPARALLEL_TOL {
        let a = Vec3::x().cross(&u);
        let b = Vec3::y().cross(&u);
        let k = if a.norm() >= b.norm() { a } else { b }.normalize();
        let half_turn = 2.0 * k * k.transpose() - Matrix3::identity();
        return Ok(unit_rotation(&-u, &v) * half_turn);
    }
    Ok(unit_rotation(&u, &v))
}

/// Rodrigues rotation between unit vectors that are not anti-parallel.
fn unit_rotation(u: &Vec3, v: &Vec3) -> Matrix3<f64> {
    let cos = u.dot(v);
    let cross = u.cross(v);
    let sin = cross.norm();
    if sin < PARALLEL_TOL && cos > 0.0 {
        return Matrix3::identity();
    }
    let mut k = cross / sin;
    k -= u * k.dot(u);
    let k = k.normalize();
    let theta = sin.atan2(cos);
    let (s, c) = theta.sin_cos();
    Matrix3::identity() * c + skew(&k) * s + k * k.transpose() * (1.0 - c)
}

/// Grip bookkeeping for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct GripState {
    /// Initial grip vector.
    pub g0: Vec3,
    /// Grip vector used at the last step.
    pub g_prev: Vec3,
    /// Last optimized hand positions.
    pub x_opt_prev: HandPair,
}

impl GripState {
    /// Starts from the initial hand positions, which count as both predicted
    /// and optimized.
    pub fn new(start: HandPair) -> Result<Self> {
        let g0 = start.grip();
        if !start.is_finite() || !(g0.norm() > MIN_VECTOR_NORM) {
            return Err(Error::InvalidArgument(
                "initial giver hands must be finite and not coincident".into(),
            ));
        }
        Ok(Self {
            g0,
            g_prev: g0,
            x_opt_prev: start,
        })
    }

    pub fn width(&self) -> f64 {
        self.g0.norm()
    }

    /// `T_i g_{i−1}`, with `T_i` the minimal rotation from the previous
    /// optimized grip vector to the predicted one.
    pub fn propagate(&self, x_pred: &HandPair) -> Result<Vec3> {
        let pred = x_pred.grip();
        if !finite3(&pred) || !(pred.norm() > MIN_VECTOR_NORM) {
            return Err(Error::PredictionCollapse);
        }
        let rot = rotation_between(&self.x_opt_prev.grip(), &pred)?;
        Ok(rot * self.g_prev)
    }

    /// Records the grip vector and optimized hands of the step just taken.
    pub fn advance(&mut self, g: Vec3, x_opt: HandPair) {
        self.g_prev = g;
        self.x_opt_prev = x_opt;
    }

    /// Propagates, projects, and advances in one go.
    pub fn step(&mut self, x_pred: &HandPair) -> Result<HandPair> {
        let g = self.propagate(x_pred)?;
        let x_opt = project_grip(x_pred, &g)?;
        self.advance(g, x_opt);
        Ok(x_opt)
    }
}

/// Closest hand pair to `x_pred` (squared Euclidean distance) with
/// `left − right = g`, solved as an equality-constrained QP.
pub fn project_grip(x_pred: &HandPair, g: &Vec3) -> Result<HandPair> {
    if !x_pred.is_finite() || !finite3(g) {
        return Err(Error::InvalidArgument(
            "project_grip needs finite inputs".into(),
        ));
    }
    let p = DVector::from_row_slice(&x_pred.to_array());
    let mut a = DMatrix::zeros(3, 6);
    for k in 0..3 {
        a[(k, k)] = 1.0;
        a[(k, k + 3)] = -1.0;
    }
    let qp = EqualityQp::new(
        DMatrix::identity(6, 6) * 2.0,
        p * -2.0,
        a,
        DVector::from_row_slice(g.as_slice()),
    )?;
    let sol = qp.solve()?;
    Ok(HandPair::from_slice(sol.x.as_slice()))
}
