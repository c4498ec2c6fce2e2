//! Acceptance gate. Each check runs against an independent oracle, is timed
//! against its budget, and prints one `[PASS]`/`[FAIL]` line. Exits nonzero
//! if any check fails.

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, Isometry3, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use handover_cli::{cmd_eval, cmd_generate, cmd_synth, cmd_train, ControllerChoice, TrainFlags};
use handover_core::data::{load_demonstration, Distances};
use handover_core::grip::{project_grip, rotation_between};
use handover_core::hsmm::{
    fit_supervised_indexed, BlockGaussian, DurationModel, FitOptions, GaussianNd, StateModel,
};
use handover_core::synth::synth_demo;
use handover_core::{
    replay, Controller, ControllerConfig, ControllerKind, ForwardMode, ForwardState, HandPair,
    HsmmModel, IkParams, KinematicChain, PhaseLabel, SynthConfig, Vec3,
};

type Outcome = Result<String, String>;
type Check = (&'static str, u64, fn() -> Outcome);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

fn random_vec3(r: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(normal(r), normal(r), normal(r)) * scale
}

fn random_spd(r: &mut ChaCha8Rng, d: usize, floor: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| normal(r) / (d as f64).sqrt());
    let s = &a * a.transpose() + DMatrix::identity(d, d) * floor;
    // exact symmetry
    (&s + s.transpose()) * 0.5
}

fn random_simplex(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|v| v / s).collect();
    // push rounding into the last entry so the sum is 1 to the last bit
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    p
}

/// Small random model: observed dimension 2, output dimension 1.
fn random_model(r: &mut ChaCha8Rng, n: usize, d_max: usize) -> HsmmModel {
    let states = (0..n)
        .map(|i| {
            let mean = DVector::from_fn(3, |_, _| r.random_range(-1.0..1.0));
            let cov = random_spd(r, 3, 0.3);
            let max_d = r.random_range(1..=d_max);
            StateModel {
                phase: PhaseLabel::from_index(i).unwrap(),
                emission: BlockGaussian::new(GaussianNd::new(mean, cov).unwrap(), 2).unwrap(),
                duration: DurationModel::new(
                    r.random_range(1.0..=max_d as f64),
                    r.random_range(0.5..2.0),
                    max_d,
                )
                .unwrap(),
            }
        })
        .collect();
    let initial = random_simplex(r, n);
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        for (j, p) in random_simplex(r, n).into_iter().enumerate() {
            t[(i, j)] = p;
        }
    }
    HsmmModel::new(0.1, initial, t, states, Distances::default(), 1e-6).unwrap()
}

fn random_obs(r: &mut ChaCha8Rng) -> Vec<f64> {
    vec![r.random_range(-1.5..1.5), r.random_range(-1.5..1.5)]
}

fn check_forward_normalization() -> Outcome {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    let mut steps = 0;
    for case in 0..20 {
        let n = 1 + case % 3;
        let model = random_model(&mut r, n, 6);
        for mode in [ForwardMode::ExplicitDuration, ForwardMode::Literal] {
            let mut fwd = ForwardState::new();
            for _ in 0..25 {
                let h = fwd
                    .step(&model, &random_obs(&mut r), mode)
                    .map_err(|e| e.to_string())?;
                if h.iter().any(|v| v.is_nan() || *v < 0.0) {
                    return Err(format!("negative or NaN weight {h:?}"));
                }
                worst = worst.max((h.iter().sum::<f64>() - 1.0).abs());
                steps += 1;
            }
        }
    }
    if worst < 1e-12 {
        Ok(format!("{steps} steps, max |sum h - 1| = {worst:.1e}"))
    } else {
        Err(format!("max |sum h - 1| = {worst:.3e}"))
    }
}

/// Exhaustive sum over every segmentation of `1..=t` whose last segment ends
/// at `t`, in the linear domain. Returns the normalized end-state weights.
fn brute_force_hsmm(model: &HsmmModel, ys: &[Vec<f64>]) -> Vec<f64> {
    let n = model.n_states();
    let t_len = ys.len();
    let emis: Vec<Vec<f64>> = ys
        .iter()
        .map(|y| {
            model
                .states()
                .iter()
                .map(|s| {
                    let g = s.emission.observed();
                    let diff = DVector::from_column_slice(y) - g.mean();
                    let inv = g.cov().clone().try_inverse().unwrap();
                    let q = (diff.transpose() * inv * &diff)[(0, 0)];
                    let det = g.cov().determinant();
                    (-0.5 * q).exp() / ((2.0 * PI).powi(y.len() as i32) * det).sqrt()
                })
                .collect()
        })
        .collect();
    let dur = |i: usize, d: usize| {
        let p = model.state(i).duration.probs();
        if d >= 1 && d <= p.len() {
            p[d - 1]
        } else {
            0.0
        }
    };
    let seg =
        |i: usize, start: usize, end: usize| (start..end).map(|s| emis[s][i]).product::<f64>();

    // recursive enumeration: (previous state, frames consumed, weight so far)
    fn walk(
        prev: Option<usize>,
        used: usize,
        w: f64,
        total: usize,
        out: &mut Vec<f64>,
        ctx: &dyn Fn(Option<usize>, usize, usize, usize) -> f64,
        n: usize,
    ) {
        for i in 0..n {
            for d in 1..=(total - used) {
                let f = ctx(prev, i, used, d);
                if f == 0.0 {
                    continue;
                }
                if used + d == total {
                    out[i] += w * f;
                } else {
                    walk(Some(i), used + d, w * f, total, out, ctx, n);
                }
            }
        }
    }
    let ctx = |prev: Option<usize>, i: usize, used: usize, d: usize| {
        let enter = match prev {
            None => model.initial()[i],
            Some(j) => model.transition()[(j, i)],
        };
        enter * dur(i, d) * seg(i, used, used + d)
    };
    let mut alpha = vec![0.0; n];
    walk(None, 0, 1.0, t_len, &mut alpha, &ctx, n);
    let z: f64 = alpha.iter().sum();
    alpha.iter().map(|a| a / z).collect()
}

/// Textbook linear-domain HMM forward, normalized at every step.
fn hmm_oracle(model: &HsmmModel, ys: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = model.n_states();
    let mut out = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    for (t, y) in ys.iter().enumerate() {
        let e: Vec<f64> = model
            .observed_logpdfs(y)
            .unwrap()
            .iter()
            .map(|v| v.exp())
            .collect();
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let prior = if t == 0 {
                    model.initial()[i]
                } else {
                    (0..n).map(|j| alpha[j] * model.transition()[(j, i)]).sum()
                };
                prior * e[i]
            })
            .collect();
        let z: f64 = next.iter().sum();
        alpha = next.iter().map(|v| v / z).collect();
        out.push(alpha.clone());
    }
    out
}

fn check_forward_oracles() -> Outcome {
    let mut r = rng(23);
    let (mut worst_ed, mut worst_lit) = (0.0f64, 0.0f64);
    for case in 0..30 {
        let n = 1 + case % 3;
        let model = random_model(&mut r, n, 4);
        let len = r.random_range(1..=6);
        let ys: Vec<Vec<f64>> = (0..len).map(|_| random_obs(&mut r)).collect();

        let mut ed = ForwardState::new();
        let mut lit = ForwardState::new();
        let hmm = hmm_oracle(&model, &ys);
        for t in 0..len {
            let h = ed
                .step(&model, &ys[t], ForwardMode::ExplicitDuration)
                .map_err(|e| e.to_string())?
                .to_vec();
            let oracle = brute_force_hsmm(&model, &ys[..=t]);
            for (a, b) in h.iter().zip(&oracle) {
                worst_ed = worst_ed.max((a - b).abs());
            }
            let hl = lit
                .step(&model, &ys[t], ForwardMode::Literal)
                .map_err(|e| e.to_string())?;
            for (a, b) in hl.iter().zip(&hmm[t]) {
                worst_lit = worst_lit.max((a - b).abs());
            }
        }
    }
    if worst_ed < 1e-10 && worst_lit < 1e-12 {
        Ok(format!(
            "30 cases, explicit-duration err {worst_ed:.1e}, literal err {worst_lit:.1e}"
        ))
    } else {
        Err(format!(
            "explicit-duration err {worst_ed:.3e} (tol 1e-10), literal err {worst_lit:.3e} (tol 1e-12)"
        ))
    }
}

fn single_state_model(mean: DVector<f64>, cov: DMatrix<f64>, split: usize) -> HsmmModel {
    let state = StateModel {
        phase: PhaseLabel::Reach,
        emission: BlockGaussian::new(GaussianNd::new(mean, cov).unwrap(), split).unwrap(),
        duration: DurationModel::new(1.0, 1.0, 1).unwrap(),
    };
    HsmmModel::new(
        0.1,
        vec![1.0],
        DMatrix::from_element(1, 1, 1.0),
        vec![state],
        Distances::default(),
        1e-6,
    )
    .unwrap()
}

fn check_conditioning() -> Outcome {
    let model = single_state_model(
        DVector::zeros(2),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
        1,
    );
    let (m, c) = model.condition(&[1.0], &[1.0]).map_err(|e| e.to_string())?;
    if (m[0] - 0.5).abs() >= 1e-12 || (c[(0, 0)] - 0.75).abs() >= 1e-12 {
        return Err(format!("scalar case gave mean {} var {}", m[0], c[(0, 0)]));
    }

    let mut r = rng(37);
    let (d, k) = (21, 15);
    let (mut worst_m, mut worst_c) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let mean = DVector::from_fn(d, |_, _| normal(&mut r));
        let cov = random_spd(&mut r, d, 1.0);
        let y: Vec<f64> = (0..k).map(|i| mean[i] + normal(&mut r)).collect();
        let model = single_state_model(mean.clone(), cov.clone(), k);
        let (m, c) = model.condition(&[1.0], &y).map_err(|e| e.to_string())?;

        let s11 = cov.view((0, 0), (k, k)).into_owned();
        let s21 = cov.view((k, 0), (d - k, k)).into_owned();
        let s12 = cov.view((0, k), (k, d - k)).into_owned();
        let s22 = cov.view((k, k), (d - k, d - k)).into_owned();
        let inv = s11.try_inverse().ok_or("singular test covariance")?;
        let dy = DVector::from_vec(y) - mean.rows(0, k);
        let want_m = mean.rows(k, d - k) + &s21 * &inv * dy;
        let want_c = &s22 - &s21 * &inv * &s12;
        worst_m = worst_m.max((m - want_m).amax());
        worst_c = worst_c.max((c - want_c).amax());
    }
    if worst_m < 1e-12 && worst_c < 1e-12 {
        Ok(format!(
            "scalar exact, 100 x 21-d: mean err {worst_m:.1e}, cov err {worst_c:.1e}"
        ))
    } else {
        Err(format!("mean err {worst_m:.3e}, cov err {worst_c:.3e}"))
    }
}

fn check_projection() -> Outcome {
    let mut r = rng(41);
    let (mut worst, mut worst_res) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let x = HandPair::new(random_vec3(&mut r, 1.0), random_vec3(&mut r, 1.0));
        let g = random_vec3(&mut r, 0.3);
        let p = project_grip(&x, &g).map_err(|e| e.to_string())?;
        let mid = (x.left + x.right) * 0.5;
        let (l, rr) = (mid + g * 0.5, mid - g * 0.5);
        worst = worst.max((p.left - l).amax()).max((p.right - rr).amax());
        worst_res = worst_res.max(((p.left - p.right) - g).norm());
    }
    if worst < 1e-9 && worst_res < 1e-9 {
        Ok(format!(
            "10000 inputs, err {worst:.1e}, residual {worst_res:.1e}"
        ))
    } else {
        Err(format!("err {worst:.3e}, residual {worst_res:.3e}"))
    }
}

fn synth_stream_model(cfg: &SynthConfig, n_train: usize, seed: u64) -> Result<HsmmModel, String> {
    let demos: Vec<_> = (0..n_train as u64)
        .map(|s| synth_demo(cfg, seed + s))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    handover_core::hsmm::train_model(&demos, Default::default()).map_err(|e| e.to_string())
}

fn check_grip_invariant() -> Outcome {
    let cfg = SynthConfig {
        reach_duration: 8.0,
        transfer_duration: 4.0,
        retreat_duration: 8.0,
        ..SynthConfig::default()
    };
    let model = synth_stream_model(&cfg, 8, 100)?;
    let stream = synth_demo(&cfg, 999).map_err(|e| e.to_string())?;
    let (l, rarm) = KinematicChain::default_arms();
    let ctl = Controller::new(ControllerConfig::new(Arc::new(model), l, rarm))
        .map_err(|e| e.to_string())?;
    let rep = replay(&ctl, &stream, ControllerKind::Hsmm).map_err(|e| e.to_string())?;
    let g0 = stream.frames[0].giver().grip().norm();
    let worst = rep
        .x_opt()
        .iter()
        .map(|x| (x.grip().norm() - g0).abs())
        .fold(0.0, f64::max);
    let steps = rep.outputs.len();
    if steps < 1000 {
        return Err(format!("stream only has {steps} steps"));
    }
    if worst < 1e-6 && rep.faults == 0 {
        Ok(format!("{steps} steps, max grip deviation {worst:.1e}"))
    } else {
        Err(format!(
            "max grip deviation {worst:.3e}, {} faults",
            rep.faults
        ))
    }
}

fn check_rotations() -> Outcome {
    let mut r = rng(53);
    let (mut orth, mut det, mut map) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..10_000 {
        let scale = r.random_range(0.1..3.0);
        let u = random_vec3(&mut r, scale);
        let v = match k % 10 {
            0 => -u * r.random_range(0.5..2.0),
            1 => -u + random_vec3(&mut r, 1e-11),
            2 => u * 2.0,
            _ => random_vec3(&mut r, 1.0),
        };
        let rot: Matrix3<f64> = rotation_between(&u, &v).map_err(|e| e.to_string())?;
        orth = orth.max((rot * rot.transpose() - Matrix3::identity()).amax());
        det = det.max((rot.determinant() - 1.0).abs());
        map = map.max((rot * u.normalize() - v.normalize()).norm());
    }
    if orth < 1e-12 && det < 1e-12 && map < 1e-10 {
        Ok(format!(
            "10000 calls, orth {orth:.1e}, det {det:.1e}, map {map:.1e}"
        ))
    } else {
        Err(format!("orth {orth:.3e}, det {det:.3e}, map {map:.3e}"))
    }
}

const TWO_LINK: &str = r#"
[base]
translation = [0.0, 0.0, 0.0]

[[joint]]
translation = [0.0, 0.0, 0.0]
axis = [0.0, 0.0, 1.0]
limits = [-3.14159, 3.14159]

[[joint]]
translation = [1.0, 0.0, 0.0]
axis = [0.0, 0.0, 1.0]
limits = [-3.14159, 3.14159]

[tip]
translation = [1.0, 0.0, 0.0]
"#;

fn random_q(r: &mut ChaCha8Rng, chain: &KinematicChain, margin: f64) -> Vec<f64> {
    chain
        .joints
        .iter()
        .map(|j| r.random_range(j.lower + margin..j.upper - margin))
        .collect()
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Elbow-up and elbow-down solutions of a planar two-link arm.
fn two_link_solutions(l1: f64, l2: f64, p: &Vec3) -> [[f64; 2]; 2] {
    let c2 = ((p.x * p.x + p.y * p.y - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    [1.0, -1.0].map(|sign| {
        let q2 = sign * c2.acos();
        let q1 = p.y.atan2(p.x) - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos());
        [q1, q2]
    })
}

fn check_kinematics() -> Outcome {
    let mut r = rng(67);
    let two = KinematicChain::from_toml(TWO_LINK).map_err(|e| e.to_string())?;
    let (left, right) = KinematicChain::default_arms();
    let tilted = KinematicChain::seven_dof_arm(Isometry3::new(
        Vec3::new(0.1, 0.0, 0.5),
        Vec3::new(0.3, -0.2, 0.4),
    ));

    // Jacobian against central differences
    let mut jac_err = 0.0f64;
    for chain in [&two, &left, &right, &tilted] {
        for _ in 0..100 {
            let q = random_q(&mut r, chain, 1e-3);
            let jac = chain.jacobian(&q).map_err(|e| e.to_string())?;
            let step = 1e-6;
            for k in 0..q.len() {
                let (mut qp, mut qm) = (q.clone(), q.clone());
                qp[k] += step;
                qm[k] -= step;
                let fd = (chain.forward_kinematics(&qp).unwrap()
                    - chain.forward_kinematics(&qm).unwrap())
                    / (2.0 * step);
                jac_err = jac_err.max((jac.column(k) - fd).amax());
            }
        }
    }

    // reachable targets from the home configuration
    let params = IkParams::default();
    let mut ik_worst = 0.0f64;
    for k in 0..100 {
        let chain = if k % 2 == 0 { &left } else { &right };
        let target = chain
            .forward_kinematics(&random_q(&mut r, chain, 0.0))
            .map_err(|e| e.to_string())?;
        let sol = chain
            .ik_solve(&chain.home, &target, &params)
            .map_err(|e| e.to_string())?;
        ik_worst = ik_worst.max(sol.residual);
    }

    // planar two-link against the closed-form solutions. The solver stops at
    // 1e-4 m, so joint agreement is bounded by conditioning: random targets
    // keep the elbow bent by at least 0.5 rad.
    let mut ang_err = 0.0f64;
    let mut cases = vec![([0.1, 0.1], Vec3::new(1.0, 1.0, 0.0))];
    for _ in 0..100 {
        let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let q_true = [r.random_range(-2.5..2.5), sign * r.random_range(0.5..2.5)];
        let p = two.forward_kinematics(&q_true).unwrap();
        cases.push(([q_true[0] + 0.2, q_true[1] * 0.7], p));
    }
    for (q_init, p) in cases {
        let sol = two
            .ik_solve(&q_init, &p, &params)
            .map_err(|e| e.to_string())?;
        if sol.residual >= 1e-4 {
            return Err(format!("two-link IK residual {:.3e}", sol.residual));
        }
        let err = two_link_solutions(1.0, 1.0, &p)
            .iter()
            .map(|q| wrap(sol.q[0] - q[0]).abs().max(wrap(sol.q[1] - q[1]).abs()))
            .fold(f64::INFINITY, f64::min);
        ang_err = ang_err.max(err);
    }

    if jac_err < 1e-6 && ik_worst < 1e-4 && ang_err < 1e-3 {
        Ok(format!(
            "jacobian err {jac_err:.1e}, IK worst residual {ik_worst:.1e} m, two-link err {ang_err:.1e} rad"
        ))
    } else {
        Err(format!(
            "jacobian err {jac_err:.3e}, IK worst residual {ik_worst:.3e} m, two-link err {ang_err:.3e} rad"
        ))
    }
}

fn check_parameter_recovery() -> Outcome {
    let mut r = rng(79);
    let d = 21;
    let means: Vec<DVector<f64>> = (0..3)
        .map(|i| DVector::from_fn(d, |k, _| 1.0 + i as f64 + 0.1 * k as f64))
        .collect();
    let covs: Vec<DMatrix<f64>> = (0..3).map(|_| random_spd(&mut r, d, 0.05) * 0.05).collect();
    let chols: Vec<_> = covs
        .iter()
        .map(|c| c.clone().cholesky().unwrap().l())
        .collect();
    let dur_mean = [40.0, 20.0, 35.0];
    let dur_std = [4.0, 2.0, 3.0];

    let mut seqs = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..50 {
        let mut seq = Vec::new();
        let mut lab = Vec::new();
        for s in 0..3 {
            let len = (dur_mean[s] + dur_std[s] * normal(&mut r)).round().max(1.0) as usize;
            for _ in 0..len {
                let z = DVector::from_fn(d, |_, _| normal(&mut r));
                seq.push(&means[s] + &chols[s] * z);
                lab.push(s);
            }
        }
        seqs.push(seq);
        labels.push(lab);
    }
    let model = fit_supervised_indexed(&seqs, &labels, &PhaseLabel::ALL, FitOptions::new(0.02))
        .map_err(|e| e.to_string())?;
    let (mut mean_err, mut dur_err) = (0.0f64, 0.0f64);
    for s in 0..3 {
        let st = model.state(s);
        let m = st.emission.joint().mean();
        mean_err = mean_err.max(((m - &means[s]).component_div(&means[s])).amax());
        dur_err = dur_err.max((st.duration.mean() - dur_mean[s]).abs() / dur_mean[s]);
    }
    if mean_err < 0.05 && dur_err < 0.10 {
        Ok(format!(
            "50 demos, mean rel err {mean_err:.2e}, duration rel err {dur_err:.2e}"
        ))
    } else {
        Err(format!(
            "mean rel err {mean_err:.3e}, duration rel err {dur_err:.3e}"
        ))
    }
}

fn check_superiority() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let synth_cfg = dir.path().join("synth.toml");
    fs::write(&synth_cfg, SynthConfig::default().to_toml()).map_err(|e| e.to_string())?;
    let demos = dir.path().join("demos");
    cmd_synth(&synth_cfg, 20, 2024, &demos).map_err(|e| format!("{e:#}"))?;
    let eval_cfg = dir.path().join("eval.toml");
    fs::write(&eval_cfg, "").map_err(|e| e.to_string())?;
    let report = cmd_eval(&eval_cfg, &demos, &dir.path().join("report.json"), 0)
        .map_err(|e| format!("{e:#}"))?;
    let (h, b) = (&report.hsmm.mean, &report.baseline.mean);
    let line = format!(
        "rmse {:.4} vs {:.4} m, jerk {:.1} vs {:.1} m/s^3",
        h.rmse, b.rmse, h.mean_abs_jerk, b.mean_abs_jerk
    );
    if h.rmse < b.rmse && h.mean_abs_jerk <= b.mean_abs_jerk {
        Ok(line)
    } else {
        Err(line)
    }
}

fn check_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = dir.path();
    let synth_cfg = p.join("synth.toml");
    fs::write(&synth_cfg, SynthConfig::default().to_toml()).map_err(|e| e.to_string())?;
    cmd_synth(&synth_cfg, 6, 7, &p.join("demos")).map_err(|e| format!("{e:#}"))?;
    let stream = p.join("demos").join("demo_0000.csv");
    load_demonstration(&stream).map_err(|e| e.to_string())?;

    let mut outputs = Vec::new();
    for run in 0..2 {
        let model = p.join(format!("model{run}.json"));
        cmd_train(&p.join("demos"), &model, TrainFlags::default()).map_err(|e| format!("{e:#}"))?;
        let hs = p.join(format!("hsmm{run}.csv"));
        let bl = p.join(format!("baseline{run}.csv"));
        cmd_generate(&model, &stream, ControllerChoice::Hsmm, &hs).map_err(|e| format!("{e:#}"))?;
        cmd_generate(&model, &stream, ControllerChoice::Baseline, &bl)
            .map_err(|e| format!("{e:#}"))?;
        outputs.push([model, hs, bl].map(|f| fs::read(f).unwrap()));
    }
    if outputs[0] == outputs[1] {
        let bytes: usize = outputs[0].iter().map(Vec::len).sum();
        Ok(format!(
            "model and two step files identical ({bytes} bytes)"
        ))
    } else {
        Err("rerun produced different bytes".into())
    }
}

fn main() -> ExitCode {
    let checks: [Check; 10] = [
        ("forward normalization", 5, check_forward_normalization),
        ("forward vs brute force", 10, check_forward_oracles),
        ("conditioning oracle", 5, check_conditioning),
        ("grip projection oracle", 5, check_projection),
        ("grip invariant end-to-end", 30, check_grip_invariant),
        ("rotation properties", 5, check_rotations),
        ("kinematics", 20, check_kinematics),
        ("parameter recovery", 60, check_parameter_recovery),
        ("hsmm beats baseline", 120, check_superiority),
        ("determinism", 30, check_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in checks.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (tag, detail) = match (&res, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "[{tag}] {:>2} {name}: {detail} ({:.2} s)",
            i + 1,
            took.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
