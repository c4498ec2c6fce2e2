//! Per-step CSV written by `generate`.
//!
//! Columns: `step,t,phase`, predicted and optimized hand positions
//! (`xpred_lx..xpred_rz`, `xopt_lx..xopt_rz`), forward weights `h0..h{N-1}`
//! (empty for the baseline), joint commands `ql0..`, `qr0..`, then
//! `grip_error,ik_residual_left,ik_residual_right,ik_flagged`.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use handover_core::StepOutput;

const HAND_COLS: [&str; 6] = ["lx", "ly", "lz", "rx", "ry", "rz"];

pub fn header(n_states: usize, dof_left: usize, dof_right: usize) -> Vec<String> {
    let mut h = vec!["step".to_string(), "t".into(), "phase".into()];
    h.extend(HAND_COLS.iter().map(|c| format!("xpred_{c}")));
    h.extend(HAND_COLS.iter().map(|c| format!("xopt_{c}")));
    h.extend((0..n_states).map(|i| format!("h{i}")));
    h.extend((0..dof_left).map(|i| format!("ql{i}")));
    h.extend((0..dof_right).map(|i| format!("qr{i}")));
    h.extend(
        [
            "grip_error",
            "ik_residual_left",
            "ik_residual_right",
            "ik_flagged",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

pub fn write_steps<W: Write>(
    out: W,
    n_states: usize,
    times: &[f64],
    steps: &[StepOutput],
) -> Result<()> {
    let (dl, dr) = steps
        .first()
        .map_or((0, 0), |s| (s.q_left.len(), s.q_right.len()));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(n_states, dl, dr))?;
    for (s, t) in steps.iter().zip(times) {
        let mut row = vec![
            s.step.to_string(),
            t.to_string(),
            s.phase.map_or(String::new(), |p| p.to_string()),
        ];
        row.extend(s.x_pred.to_array().iter().map(f64::to_string));
        row.extend(s.x_opt.to_array().iter().map(f64::to_string));
        match &s.h {
            Some(h) => row.extend(h.iter().map(f64::to_string)),
            None => row.extend(std::iter::repeat_n(String::new(), n_states)),
        }
        row.extend(s.q_left.iter().map(f64::to_string));
        row.extend(s.q_right.iter().map(f64::to_string));
        row.push(s.grip_error.to_string());
        row.push(s.ik_residual_left.to_string());
        row.push(s.ik_residual_right.to_string());
        row.push(u8::from(s.ik_flagged).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of a step CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub step: usize,
    pub t: f64,
    pub phase: Option<String>,
    pub x_pred: [f64; 6],
    pub x_opt: [f64; 6],
    pub h: Option<Vec<f64>>,
    pub q_left: Vec<f64>,
    pub q_right: Vec<f64>,
    pub grip_error: f64,
    pub ik_residual_left: f64,
    pub ik_residual_right: f64,
    pub ik_flagged: bool,
}

pub fn read_steps(path: &Path) -> Result<Vec<StepRow>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let count = |prefix: &str| {
        header
            .iter()
            .filter(|c| {
                c.strip_prefix(prefix).is_some_and(|rest| {
                    !rest.is_empty() && rest.chars().all(|ch| ch.is_ascii_digit())
                })
            })
            .count()
    };
    let (n, dl, dr) = (count("h"), count("ql"), count("qr"));
    if header != self::header(n, dl, dr) {
        bail!("{}: unexpected step CSV header", path.display());
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .with_context(|| format!("{}: line {line}: column {}", path.display(), header[k]))
        };
        let arr6 = |start: usize| -> Result<[f64; 6]> {
            let mut a = [0.0; 6];
            for (i, v) in a.iter_mut().enumerate() {
                *v = num(start + i)?;
            }
            Ok(a)
        };
        let h_start = 15;
        let h = if n > 0 && rec[h_start].is_empty() {
            None
        } else {
            Some(
                (0..n)
                    .map(|i| num(h_start + i))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        let q_start = h_start + n;
        let tail = q_start + dl + dr;
        rows.push(StepRow {
            step: rec[0]
                .parse()
                .with_context(|| format!("line {line}: step"))?,
            t: num(1)?,
            phase: (!rec[2].is_empty()).then(|| rec[2].to_string()),
            x_pred: arr6(3)?,
            x_opt: arr6(9)?,
            h,
            q_left: (0..dl).map(|i| num(q_start + i)).collect::<Result<_>>()?,
            q_right: (0..dr)
                .map(|i| num(q_start + dl + i))
                .collect::<Result<_>>()?,
            grip_error: num(tail)?,
            ik_residual_left: num(tail + 1)?,
            ik_residual_right: num(tail + 2)?,
            ik_flagged: &rec[tail + 3] == "1",
        });
    }
    Ok(rows)
}
