use nalgebra::DVector;

use super::{Demonstration, Frame, PhaseLabel, Vec3, UNIFORM_TOL};
use crate::error::{Error, Result};
use crate::{JOINT_DIM, OBS_DIM, OUT_DIM};

/// The three scalar relative-distance features.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Distances {
    /// Mean of left-left and right-right giver/receiver hand distances.
    pub giver_receiver: f64,
    /// Mean distance from the object to each giver hand.
    pub object_giver: f64,
    /// Mean distance from the object to each receiver hand.
    pub object_receiver: f64,
}

impl Distances {
    pub fn to_array(self) -> [f64; 3] {
        [self.giver_receiver, self.object_giver, self.object_receiver]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            giver_receiver: a[0],
            object_giver: a[1],
            object_receiver: a[2],
        }
    }
}

/// Per-frame model input (`obs`, receiver side) and output (`out`, giver side).
///
/// `obs = [receiver_left, receiver_right, receiver_left vel, receiver_right vel,
/// d_gr, d_og, d_or]`, `out = [giver_left vel, giver_right vel]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureFrame {
    pub obs: [f64; OBS_DIM],
    pub out: [f64; OUT_DIM],
}

impl FeatureFrame {
    /// `[obs; out]` as a 21-vector.
    pub fn joint(&self) -> DVector<f64> {
        DVector::from_iterator(JOINT_DIM, self.obs.iter().chain(&self.out).copied())
    }

    /// Assembles the observation block from receiver kinematics and distance
    /// features already made relative to their references.
    pub fn observation(
        receiver_left: &Vec3,
        receiver_right: &Vec3,
        vel_left: &Vec3,
        vel_right: &Vec3,
        rel: Distances,
    ) -> [f64; OBS_DIM] {
        let mut obs = [0.0; OBS_DIM];
        obs[0..3].copy_from_slice(receiver_left.as_slice());
        obs[3..6].copy_from_slice(receiver_right.as_slice());
        obs[6..9].copy_from_slice(vel_left.as_slice());
        obs[9..12].copy_from_slice(vel_right.as_slice());
        obs[12..15].copy_from_slice(&rel.to_array());
        obs
    }
}

/// Velocities by central differences at interior samples and first-order
/// one-sided differences at both ends.
pub fn compute_velocities(positions: &[Vec3], dt: f64) -> Result<Vec<Vec3>> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples for velocities, got {n}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let mut vel = Vec::with_capacity(n);
    vel.push((positions[1] - positions[0]) / dt);
    for k in 1..n - 1 {
        vel.push((positions[k + 1] - positions[k - 1]) / (2.0 * dt));
    }
    vel.push((positions[n - 1] - positions[n - 2]) / dt);
    Ok(vel)
}

/// Raw (absolute) distance features of one configuration.
pub fn frame_distances(
    giver_left: &Vec3,
    giver_right: &Vec3,
    receiver_left: &Vec3,
    receiver_right: &Vec3,
    object: &Vec3,
) -> Distances {
    Distances {
        giver_receiver: 0.5
            * ((giver_left - receiver_left).norm() + (giver_right - receiver_right).norm()),
        object_giver: 0.5 * ((object - giver_left).norm() + (object - giver_right).norm()),
        object_receiver: 0.5 * ((object - receiver_left).norm() + (object - receiver_right).norm()),
    }
}

fn distances_of(f: &Frame) -> Distances {
    frame_distances(
        &f.giver_left,
        &f.giver_right,
        &f.receiver_left,
        &f.receiver_right,
        &f.object,
    )
}

/// Distance features at the middle frame of the Transfer segment (lower
/// median index for even-length segments).
pub fn transfer_reference_distances(demo: &Demonstration) -> Result<Distances> {
    let (first, last) = demo
        .phase_range(PhaseLabel::Transfer)
        .ok_or_else(|| Error::InvalidDemonstration("no transfer frames".into()))?;
    Ok(distances_of(&demo.frames[(first + last) / 2]))
}

/// Featurizes a uniformly sampled demonstration against its own mid-transfer
/// reference distances.
pub fn build_features(demo: &Demonstration) -> Result<Vec<FeatureFrame>> {
    let refs = transfer_reference_distances(demo)?;
    build_features_with_refs(demo, refs)
}

/// Featurizes against externally supplied reference distances.
pub fn build_features_with_refs(
    demo: &Demonstration,
    refs: Distances,
) -> Result<Vec<FeatureFrame>> {
    if !demo.is_uniform(demo.dt) {
        return Err(Error::InvalidDemonstration(format!(
            "demonstration is not uniformly sampled at dt={} (tolerance {UNIFORM_TOL})",
            demo.dt
        )));
    }
    let dt = demo.dt;
    let track = |sel: fn(&Frame) -> Vec3| -> Result<Vec<Vec3>> {
        let p: Vec<Vec3> = demo.frames.iter().map(sel).collect();
        compute_velocities(&p, dt)
    };
    let v_rl = track(|f| f.receiver_left)?;
    let v_rr = track(|f| f.receiver_right)?;
    let v_gl = track(|f| f.giver_left)?;
    let v_gr = track(|f| f.giver_right)?;

    Ok(demo
        .frames
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let d = distances_of(f);
            let rel = Distances {
                giver_receiver: d.giver_receiver - refs.giver_receiver,
                object_giver: d.object_giver - refs.object_giver,
                object_receiver: d.object_receiver - refs.object_receiver,
            };
            let obs = FeatureFrame::observation(
                &f.receiver_left,
                &f.receiver_right,
                &v_rl[k],
                &v_rr[k],
                rel,
            );
            let mut out = [0.0; OUT_DIM];
            out[0..3].copy_from_slice(v_gl[k].as_slice());
            out[3..6].copy_from_slice(v_gr[k].as_slice());
            FeatureFrame { obs, out }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::test_util::linear_demo;
    use super::*;

    #[test]
    fn constant_positions_have_zero_velocity() {
        let p = vec![Vec3::new(1.0, 2.0, 3.0); 5];
        for v in compute_velocities(&p, 0.1).unwrap() {
            assert_eq!(v, Vec3::zeros());
        }
    }

    #[test]
    fn linear_motion_velocity_is_exact() {
        let dt = 0.1;
        let p: Vec<Vec3> = (0..20)
            .map(|k| Vec3::new(k as f64 * dt, 0.0, 0.0))
            .collect();
        for v in compute_velocities(&p, dt).unwrap() {
            assert!((v - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn quadratic_motion_interior_velocity_is_exact() {
        let dt = 0.01;
        let p: Vec<Vec3> = (0..101)
            .map(|k| {
                let t = k as f64 * dt;
                Vec3::new(t * t, 0.0, 0.0)
            })
            .collect();
        let v = compute_velocities(&p, dt).unwrap();
        for (k, vk) in v.iter().enumerate().take(100).skip(1) {
            let t = k as f64 * dt;
            assert!((vk.x - 2.0 * t).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn velocities_need_two_samples() {
        assert!(compute_velocities(&[Vec3::zeros()], 0.1).is_err());
    }

    #[test]
    fn reference_uses_lower_median_transfer_frame() {
        let demo = linear_demo(30, 0.1);
        let (first, last) = demo.phase_range(PhaseLabel::Transfer).unwrap();
        assert_eq!((first, last), (10, 19));
        let refs = transfer_reference_distances(&demo).unwrap();
        assert_eq!(refs, distances_of(&demo.frames[14]));
    }

    #[test]
    fn single_frame_transfer_reference() {
        let mut demo = linear_demo(30, 0.1);
        for (k, f) in demo.frames.iter_mut().enumerate() {
            f.phase = match k {
                0..=11 => PhaseLabel::Reach,
                12 => PhaseLabel::Transfer,
                _ => PhaseLabel::Retreat,
            };
        }
        let refs = transfer_reference_distances(&demo).unwrap();
        assert_eq!(refs, distances_of(&demo.frames[12]));
    }

    #[test]
    fn known_geometry_reference() {
        let f = Frame {
            t: 0.0,
            giver_left: Vec3::new(0.1, 0.0, 0.0),
            giver_right: Vec3::new(-0.1, 0.0, 0.0),
            receiver_left: Vec3::new(1.1, 0.0, 0.0),
            receiver_right: Vec3::new(0.9, 0.0, 0.0),
            object: Vec3::zeros(),
            phase: PhaseLabel::Transfer,
        };
        let d = distances_of(&f);
        assert!((d.object_giver - 0.1).abs() < 1e-15);
        assert!((d.giver_receiver - 1.0).abs() < 1e-15);
        assert!((d.object_receiver - 1.0).abs() < 1e-15);
    }

    #[test]
    fn no_transfer_is_an_error() {
        let mut demo = linear_demo(9, 0.1);
        for f in &mut demo.frames {
            f.phase = PhaseLabel::Reach;
        }
        assert!(transfer_reference_distances(&demo).is_err());
        assert!(build_features(&demo).is_err());
    }

    #[test]
    fn distance_features_vanish_at_mid_transfer() {
        let demo = linear_demo(31, 0.05);
        let feats = build_features(&demo).unwrap();
        let (first, last) = demo.phase_range(PhaseLabel::Transfer).unwrap();
        let mid = &feats[(first + last) / 2];
        for k in 12..15 {
            assert!(mid.obs[k].abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_demo_has_zero_velocity_features() {
        let mut demo = linear_demo(12, 0.1);
        let first = demo.frames[0].clone();
        for f in &mut demo.frames {
            let (t, phase) = (f.t, f.phase);
            *f = Frame {
                t,
                phase,
                ..first.clone()
            };
        }
        for ff in build_features(&demo).unwrap() {
            assert!(ff.obs[6..12].iter().all(|v| *v == 0.0));
            assert!(ff.out.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn non_uniform_demo_is_rejected() {
        let mut demo = linear_demo(12, 0.1);
        demo.frames[5].t += 0.01;
        assert!(build_features(&demo).is_err());
    }
}
