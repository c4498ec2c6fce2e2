//! Objective trajectory metrics used to compare controllers.

use crate::data::{HandPair, Vec3};

/// Root mean square of the per-hand position error, averaged over both hands
/// and all steps.
pub fn trajectory_rmse(generated: &[HandPair], truth: &[HandPair]) -> f64 {
    let n = generated.len().min(truth.len());
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = generated
        .iter()
        .zip(truth)
        .map(|(g, t)| (g.left - t.left).norm_squared() + (g.right - t.right).norm_squared())
        .sum();
    (sum / (2 * n) as f64).sqrt()
}

/// Mean jerk magnitude (third finite difference over `dt³`) of both hands.
pub fn mean_abs_jerk(traj: &[HandPair], dt: f64) -> f64 {
    if traj.len() < 4 {
        return 0.0;
    }
    let jerk = |a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3| ((d - c * 3.0) + b * 3.0 - a).norm();
    let sum: f64 = traj
        .windows(4)
        .map(|w| {
            jerk(&w[0].left, &w[1].left, &w[2].left, &w[3].left)
                + jerk(&w[0].right, &w[1].right, &w[2].right, &w[3].right)
        })
        .sum();
    sum / (2 * (traj.len() - 3)) as f64 / dt.powi(3)
}

/// Largest deviation of the hand separation from `width`.
pub fn max_grip_deviation(traj: &[HandPair], width: f64) -> f64 {
    traj.iter()
        .map(|p| (p.grip().norm() - width).abs())
        .fold(0.0, f64::max)
}

/// Fraction of consecutive pairs whose phase index does not decrease.
pub fn monotone_fraction(phases: &[usize]) -> f64 {
    if phases.len() < 2 {
        return 1.0;
    }
    let ok = phases.windows(2).filter(|w| w[1] >= w[0]).count();
    ok as f64 / (phases.len() - 1) as f64
}
