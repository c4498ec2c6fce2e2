//! Versioned JSON model file.
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "n_states": 3,
//!   "dt": 0.02,
//!   "split_index": 15,
//!   "joint_dim": 21,
//!   "regularization": 1e-6,
//!   "inference_mode": "explicit_duration",  // or "literal"; optional
//!   "initial": [..N],
//!   "transition": [[..N], ..N],            // rows sum to 1
//!   "distance_refs": {"giver_receiver": .., "object_giver": .., "object_receiver": ..},
//!   "states": [
//!     {"phase": "reach", "mean": [..joint_dim],
//!      "covariance": [..joint_dim^2],         // row-major
//!      "duration": {"mean": .., "std": .., "max_duration": ..}},
//!     ...
//!   ]
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, so a save/load cycle is
//! bit-exact.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{BlockGaussian, DurationModel, ForwardMode, GaussianNd, HsmmModel, StateModel};
use crate::data::{Distances, PhaseLabel};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    n_states: usize,
    dt: f64,
    split_index: usize,
    joint_dim: usize,
    regularization: f64,
    #[serde(default)]
    inference_mode: ForwardMode,
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    distance_refs: RefsFile,
    states: Vec<StateFile>,
}

#[derive(Serialize, Deserialize)]
struct RefsFile {
    giver_receiver: f64,
    object_giver: f64,
    object_receiver: f64,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    phase: PhaseLabel,
    mean: Vec<f64>,
    covariance: Vec<f64>,
    duration: DurationFile,
}

#[derive(Serialize, Deserialize)]
struct DurationFile {
    mean: f64,
    std: f64,
    max_duration: usize,
}

fn shape_err(msg: String) -> Error {
    Error::ModelFormat(msg)
}

pub fn model_to_json(model: &HsmmModel) -> String {
    let n = model.n_states();
    let refs = model.distance_refs();
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        n_states: n,
        dt: model.dt(),
        split_index: model.split(),
        joint_dim: model.joint_dim(),
        regularization: model.regularization(),
        inference_mode: model.default_mode(),
        initial: model.initial().to_vec(),
        transition: (0..n)
            .map(|i| model.transition().row(i).iter().copied().collect())
            .collect(),
        distance_refs: RefsFile {
            giver_receiver: refs.giver_receiver,
            object_giver: refs.object_giver,
            object_receiver: refs.object_receiver,
        },
        states: model
            .states()
            .iter()
            .map(|s| {
                let g = s.emission.joint();
                let d = g.dim();
                StateFile {
                    phase: s.phase,
                    mean: g.mean().iter().copied().collect(),
                    covariance: (0..d * d).map(|k| g.cov()[(k / d, k % d)]).collect(),
                    duration: DurationFile {
                        mean: s.duration.mean(),
                        std: s.duration.std(),
                        max_duration: s.duration.max_duration(),
                    },
                }
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
    text.push('\n');
    text
}

pub fn model_from_json(text: &str) -> Result<HsmmModel> {
    #[derive(Deserialize)]
    struct Version {
        format_version: u32,
    }
    let v: Version = serde_json::from_str(text)
        .map_err(|e| Error::ModelFormat(format!("missing or bad format_version: {e}")))?;
    if v.format_version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format_version {}, expected {FORMAT_VERSION}",
            v.format_version
        )));
    }
    let f: ModelFile = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let n = f.n_states;
    let d = f.joint_dim;
    if f.initial.len() != n || f.states.len() != n {
        return Err(shape_err(format!(
            "n_states = {n} but {} initial entries and {} states",
            f.initial.len(),
            f.states.len()
        )));
    }
    if f.transition.len() != n || f.transition.iter().any(|r| r.len() != n) {
        return Err(shape_err(format!("transition is not {n}x{n}")));
    }
    let transition = DMatrix::from_fn(n, n, |i, j| f.transition[i][j]);
    let mut states = Vec::with_capacity(n);
    for (i, s) in f.states.into_iter().enumerate() {
        if s.mean.len() != d || s.covariance.len() != d * d {
            return Err(shape_err(format!(
                "state {i}: mean has {} entries and covariance {}, expected {d} and {}",
                s.mean.len(),
                s.covariance.len(),
                d * d
            )));
        }
        let joint = GaussianNd::new(
            DVector::from_vec(s.mean),
            DMatrix::from_row_slice(d, d, &s.covariance),
        )?;
        states.push(StateModel {
            phase: s.phase,
            emission: BlockGaussian::new(joint, f.split_index)?,
            duration: DurationModel::new(s.duration.mean, s.duration.std, s.duration.max_duration)?,
        });
    }
    let refs = Distances {
        giver_receiver: f.distance_refs.giver_receiver,
        object_giver: f.distance_refs.object_giver,
        object_receiver: f.distance_refs.object_receiver,
    };
    Ok(
        HsmmModel::new(f.dt, f.initial, transition, states, refs, f.regularization)?
            .with_default_mode(f.inference_mode),
    )
}

pub fn save_model(model: &HsmmModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<HsmmModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
