use nalgebra::{DMatrix, DVector};

use super::{
    BlockGaussian, DurationModel, GaussianNd, HsmmModel, StateModel, DEFAULT_REGULARIZATION,
};
use crate::data::{
    build_features, resample_uniform, transfer_reference_distances, Demonstration, Distances,
    FeatureFrame, PhaseLabel,
};
use crate::error::{Error, Result};
use crate::OBS_DIM;

/// Floor on fitted duration standard deviations, in steps.
pub const MIN_DURATION_STD: f64 = 0.5;
/// Maximum duration is this factor times the longest observed segment.
pub const MAX_DURATION_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Index splitting observed and output blocks.
    pub split: usize,
    pub dt: f64,
    /// Added to every covariance diagonal.
    pub regularization: f64,
}

impl FitOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            split: OBS_DIM,
            dt,
            regularization: DEFAULT_REGULARIZATION,
        }
    }
}

/// Fits a supervised HSMM from labelled joint vectors.
///
/// `phases[i]` is the phase reported for state `i`; labels index into it.
/// Self-transitions are excluded from the transition counts since dwell time
/// is carried by the duration models. A state that is never left in the data
/// gets a self-transition of one.
pub fn fit_supervised_indexed(
    sequences: &[Vec<DVector<f64>>],
    labels: &[Vec<usize>],
    phases: &[PhaseLabel],
    opts: FitOptions,
) -> Result<HsmmModel> {
    let n = phases.len();
    if sequences.is_empty() || sequences.iter().all(|s| s.is_empty()) {
        return Err(Error::Fit("no training data".into()));
    }
    if n == 0 {
        return Err(Error::Fit("need at least one state".into()));
    }
    if sequences.len() != labels.len() {
        return Err(Error::Fit(format!(
            "{} feature sequences but {} label sequences",
            sequences.len(),
            labels.len()
        )));
    }
    let dim = sequences
        .iter()
        .find_map(|s| s.first())
        .map(|v| v.len())
        .unwrap_or(0);

    let mut members: Vec<Vec<&DVector<f64>>> = vec![Vec::new(); n];
    let mut first_counts = vec![0.0; n];
    let mut trans_counts = DMatrix::<f64>::zeros(n, n);
    let mut seg_lengths: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut n_seqs = 0usize;

    for (k, (seq, lab)) in sequences.iter().zip(labels).enumerate() {
        if seq.len() != lab.len() {
            return Err(Error::Fit(format!(
                "sequence {k}: {} frames but {} labels",
                seq.len(),
                lab.len()
            )));
        }
        if seq.is_empty() {
            continue;
        }
        n_seqs += 1;
        for (v, &l) in seq.iter().zip(lab) {
            if l >= n {
                return Err(Error::Fit(format!("sequence {k}: label {l} out of range")));
            }
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            members[l].push(v);
        }
        first_counts[lab[0]] += 1.0;
        let mut run = 1;
        for w in lab.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                trans_counts[(w[0], w[1])] += 1.0;
                seg_lengths[w[0]].push(run);
                run = 1;
            }
        }
        seg_lengths[*lab.last().unwrap()].push(run);
    }

    let initial: Vec<f64> = first_counts.iter().map(|c| c / n_seqs as f64).collect();
    let mut transition = DMatrix::zeros(n, n);
    for i in 0..n {
        let total: f64 = trans_counts.row(i).sum();
        if total > 0.0 {
            for j in 0..n {
                transition[(i, j)] = trans_counts[(i, j)] / total;
            }
        } else {
            transition[(i, i)] = 1.0;
        }
    }

    let mut states = Vec::with_capacity(n);
    for (i, vecs) in members.iter().enumerate() {
        if vecs.len() < 2 {
            return Err(Error::Fit(format!(
                "state {i} ({}) has {} frames, need at least 2",
                phases[i],
                vecs.len()
            )));
        }
        let (mean, cov) = sample_moments(vecs, opts.regularization);
        let joint = GaussianNd::new(mean, cov)?;
        let emission = BlockGaussian::new(joint, opts.split)?;

        let lens = &seg_lengths[i];
        let m = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
        let std = if lens.len() > 1 {
            let ss: f64 = lens.iter().map(|&l| (l as f64 - m).powi(2)).sum();
            (ss / (lens.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        let longest = *lens.iter().max().unwrap();
        let max_d = (longest as f64 * MAX_DURATION_FACTOR).ceil() as usize;
        let duration = DurationModel::new(m, std.max(MIN_DURATION_STD), max_d)?;
        states.push(StateModel {
            phase: phases[i],
            emission,
            duration,
        });
    }

    HsmmModel::new(
        opts.dt,
        initial,
        transition,
        states,
        Distances::default(),
        opts.regularization,
    )
}

/// Sample mean and unbiased covariance plus `reg * I`, symmetric by construction.
fn sample_moments(vecs: &[&DVector<f64>], reg: f64) -> (DVector<f64>, DMatrix<f64>) {
    let d = vecs[0].len();
    let count = vecs.len() as f64;
    let mut mean = DVector::zeros(d);
    for v in vecs {
        mean += *v;
    }
    mean /= count;
    let mut cov = DMatrix::zeros(d, d);
    for v in vecs {
        let c = *v - &mean;
        for r in 0..d {
            for q in r..d {
                cov[(r, q)] += c[r] * c[q];
            }
        }
    }
    for r in 0..d {
        for q in r..d {
            let val = cov[(r, q)] / (count - 1.0);
            cov[(r, q)] = val;
            cov[(q, r)] = val;
        }
        cov[(r, r)] += reg;
    }
    (mean, cov)
}

/// Three-state (reach, transfer, retreat) supervised fit on feature frames.
pub fn fit_supervised(
    features: &[Vec<FeatureFrame>],
    labels: &[Vec<PhaseLabel>],
    opts: FitOptions,
) -> Result<HsmmModel> {
    let seqs: Vec<Vec<DVector<f64>>> = features
        .iter()
        .map(|s| s.iter().map(FeatureFrame::joint).collect())
        .collect();
    let idx: Vec<Vec<usize>> = labels
        .iter()
        .map(|s| s.iter().map(|p| p.index()).collect())
        .collect();
    fit_supervised_indexed(&seqs, &idx, &PhaseLabel::ALL, opts)
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    /// Resampling step; defaults to the first demonstration's mean spacing.
    pub dt: Option<f64>,
    pub regularization: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            dt: None,
            regularization: DEFAULT_REGULARIZATION,
        }
    }
}

/// Full training pipeline: resample, featurize, fit, and record the mean
/// mid-transfer reference distances for online use.
pub fn train_model(demos: &[Demonstration], opts: TrainOptions) -> Result<HsmmModel> {
    let first = demos
        .first()
        .ok_or_else(|| Error::Fit("no demonstrations".into()))?;
    let dt = opts.dt.unwrap_or(first.dt);
    let mut features = Vec::with_capacity(demos.len());
    let mut labels = Vec::with_capacity(demos.len());
    let mut ref_sum = [0.0; 3];
    for demo in demos {
        let demo = resample_uniform(demo, dt)?;
        let refs = transfer_reference_distances(&demo)?.to_array();
        for (s, r) in ref_sum.iter_mut().zip(refs) {
            *s += r;
        }
        features.push(build_features(&demo)?);
        labels.push(demo.labels());
    }
    let refs = ref_sum.map(|s| s / demos.len() as f64);
    let model = fit_supervised(
        &features,
        &labels,
        FitOptions {
            split: OBS_DIM,
            dt,
            regularization: opts.regularization,
        },
    )?;
    Ok(model.with_distance_refs(Distances::from_array(refs)))
}
