use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use handover_core::data::{
    demonstration_files, load_demonstration, resample_uniform, save_demonstration,
};
use handover_core::hsmm::{load_model, save_model, train_model, TrainOptions};
use handover_core::synth::synth_demo;
use handover_core::{
    replay, BaselineParams, Controller, ControllerConfig, ControllerKind, Demonstration,
    ForwardMode, HsmmModel, SynthConfig,
};

use crate::config::{load_arms, EvalConfig};
use crate::report::{EvalReport, Metrics, TrialReport};
use crate::steps::write_steps;

#[derive(Debug, Clone, Copy, Default)]
pub struct TrainFlags {
    pub mode: ForwardMode,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerChoice {
    Hsmm,
    Baseline,
}

impl From<ControllerChoice> for ControllerKind {
    fn from(c: ControllerChoice) -> Self {
        match c {
            ControllerChoice::Hsmm => ControllerKind::Hsmm,
            ControllerChoice::Baseline => ControllerKind::Baseline,
        }
    }
}

fn load_dir(dir: &Path) -> Result<Vec<(PathBuf, Demonstration)>> {
    let files = demonstration_files(dir)?;
    if files.is_empty() {
        bail!("no demonstrations found in {}", dir.display());
    }
    files
        .into_iter()
        .map(|p| {
            let d = load_demonstration(&p)?;
            Ok((p, d))
        })
        .collect()
}

fn train(demos: &[(PathBuf, Demonstration)], opts: TrainOptions) -> Result<HsmmModel> {
    // resample up front so a failure can name its file
    let dt = opts.dt.unwrap_or(demos[0].1.dt);
    for (p, d) in demos {
        resample_uniform(d, dt).with_context(|| format!("{}", p.display()))?;
    }
    let plain: Vec<Demonstration> = demos.iter().map(|(_, d)| d.clone()).collect();
    Ok(train_model(&plain, opts)?)
}

/// Fits a model on every demonstration in `data_dir` and writes it to `out`.
/// Returns the fitted model; duration means are printed to stdout.
pub fn cmd_train(data_dir: &Path, out: &Path, flags: TrainFlags) -> Result<HsmmModel> {
    let demos = load_dir(data_dir)?;
    let model = train(
        &demos,
        TrainOptions {
            dt: flags.dt,
            ..TrainOptions::default()
        },
    )?
    .with_default_mode(flags.mode);
    save_model(&model, out)?;
    println!(
        "trained on {} demonstrations, dt = {}",
        demos.len(),
        model.dt()
    );
    for s in model.states() {
        println!(
            "  {:<9} duration mean {:.2} steps ({:.3} s)",
            s.phase.as_str(),
            s.duration.mean(),
            s.duration.mean() * model.dt()
        );
    }
    Ok(model)
}

/// Replays a receiver/object stream through one controller and writes the
/// per-step CSV.
pub fn cmd_generate(
    model_path: &Path,
    stream: &Path,
    controller: ControllerChoice,
    out: &Path,
) -> Result<()> {
    let model = load_model(model_path)?;
    let demo = load_demonstration(stream)?;
    if !demo.is_uniform(model.dt()) {
        bail!(
            "{}: stream spacing {} does not match model dt {}",
            stream.display(),
            demo.dt,
            model.dt()
        );
    }
    let (l, r) = load_arms(None, None)?;
    let n_states = model.n_states();
    let ctl = Controller::new(ControllerConfig::new(Arc::new(model), l, r))?;
    let rep = replay(&ctl, &demo, controller.into())?;
    let times: Vec<f64> = demo.frames.iter().map(|f| f.t).collect();
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_steps(BufWriter::new(file), n_states, &times, &rep.outputs)?;
    if rep.faults > 0 {
        eprintln!(
            "warning: {} faulted ticks held the previous command",
            rep.faults
        );
    }
    Ok(())
}

fn run_fold(
    cfg: &EvalConfig,
    demos: &[(PathBuf, Demonstration)],
    held: usize,
) -> Result<TrialReport> {
    let train_set: Vec<(PathBuf, Demonstration)> = demos
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != held)
        .map(|(_, d)| d.clone())
        .collect();
    let model = train(
        &train_set,
        TrainOptions {
            dt: cfg.dt,
            regularization: cfg.regularization,
        },
    )?
    .with_default_mode(cfg.mode);
    let (path, demo) = &demos[held];
    let demo = resample_uniform(demo, model.dt()).with_context(|| format!("{}", path.display()))?;
    let (l, r) = cfg.arms()?;
    let mut cc = ControllerConfig::new(Arc::new(model), l, r);
    cc.ik = (&cfg.ik).into();
    cc.ik_residual_threshold = cc.ik.tol;
    cc.baseline = BaselineParams { v_max: cfg.v_max };
    let dt = cc.dt;
    let ctl = Controller::new(cc)?;
    let truth: Vec<_> = demo.frames.iter().map(|f| f.giver()).collect();
    let width = truth[0].grip().norm();
    let run = |kind| -> Result<Metrics> {
        let rep = replay(&ctl, &demo, kind)?;
        Ok(Metrics::compute(&rep, &truth, width, dt))
    };
    let (h, b) = (run(ControllerKind::Hsmm)?, run(ControllerKind::Baseline)?);
    Ok(TrialReport {
        index: held,
        file: path.file_name().map_or_else(
            || path.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        ),
        frames: demo.frames.len(),
        hsmm: h,
        baseline: b,
    })
}

/// Path of the human-readable table written next to the JSON report.
pub fn summary_path(report: &Path) -> PathBuf {
    let stem = report
        .file_stem()
        .map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    report.with_file_name(format!("{stem}.summary.txt"))
}

/// Leave-one-out evaluation of both controllers. `jobs = 0` uses rayon's default.
pub fn cmd_eval(
    model_config: &Path,
    data_dir: &Path,
    out: &Path,
    jobs: usize,
) -> Result<EvalReport> {
    let cfg = EvalConfig::load(model_config)?;
    let demos = load_dir(data_dir)?;
    if demos.len() < 2 {
        bail!(
            "leave-one-out needs at least 2 demonstrations, found {}",
            demos.len()
        );
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building thread pool")?;
    let trials: Vec<TrialReport> = pool.install(|| {
        (0..demos.len())
            .into_par_iter()
            .map(|i| run_fold(&cfg, &demos, i))
            .collect::<Result<_>>()
    })?;
    let report = EvalReport::new(trials);
    fs::write(out, report.to_json()).with_context(|| format!("writing {}", out.display()))?;
    let table = report.table();
    let summary = summary_path(out);
    fs::write(&summary, &table).with_context(|| format!("writing {}", summary.display()))?;
    print!("{table}");
    Ok(report)
}

/// Writes `count` synthetic demonstrations named `demo_NNNN.csv`.
pub fn cmd_synth(config: &Path, count: usize, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let cfg = SynthConfig::load(config)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut written = Vec::with_capacity(count);
    for i in 0..count {
        let demo = synth_demo(&cfg, seed.wrapping_add(i as u64))?;
        let path = out_dir.join(format!("demo_{i:04}.csv"));
        save_demonstration(&demo, &path)?;
        written.push(path);
    }
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "wrote {count} demonstrations to {}",
        out_dir.display()
    )?;
    Ok(written)
}
