use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use handover_core::hsmm::ForwardMode;
use handover_core::{IkParams, KinematicChain};

/// Settings shared by training and controller construction, read from the
/// `--model-config` TOML file of `eval`. Every field is optional.
///
/// ```toml
/// dt = 0.02                   # resampling step; default: first demo's spacing
/// regularization = 1e-6
/// mode = "explicit_duration"  # or "literal"
/// v_max = 0.5                 # baseline speed cap, m/s
/// left_chain = "left.toml"    # default: built-in 7-joint arms
/// right_chain = "right.toml"
///
/// [ik]
/// damping = 0.05
/// tol = 1e-4
/// max_iters = 200
/// step_scale = 0.5
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub dt: Option<f64>,
    pub regularization: f64,
    pub mode: ForwardMode,
    pub v_max: f64,
    pub left_chain: Option<PathBuf>,
    pub right_chain: Option<PathBuf>,
    pub ik: IkConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IkConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub step_scale: f64,
}

impl Default for IkConfig {
    fn default() -> Self {
        let p = IkParams::default();
        Self {
            damping: p.damping,
            tol: p.tol,
            max_iters: p.max_iters,
            step_scale: p.step_scale,
        }
    }
}

impl From<&IkConfig> for IkParams {
    fn from(c: &IkConfig) -> Self {
        IkParams {
            damping: c.damping,
            tol: c.tol,
            max_iters: c.max_iters,
            step_scale: c.step_scale,
        }
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            dt: None,
            regularization: handover_core::hsmm::DEFAULT_REGULARIZATION,
            mode: ForwardMode::default(),
            v_max: 0.5,
            left_chain: None,
            right_chain: None,
            ik: IkConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        // chain paths are relative to the config file
        let dir = path.parent().unwrap_or(Path::new("."));
        for chain in [&mut cfg.left_chain, &mut cfg.right_chain]
            .into_iter()
            .flatten()
        {
            if chain.is_relative() {
                *chain = dir.join(&*chain);
            }
        }
        Ok(cfg)
    }

    pub fn arms(&self) -> Result<(KinematicChain, KinematicChain)> {
        load_arms(self.left_chain.as_deref(), self.right_chain.as_deref())
    }
}

/// Loads chain files, falling back to the built-in arms for missing ones.
pub fn load_arms(
    left: Option<&Path>,
    right: Option<&Path>,
) -> Result<(KinematicChain, KinematicChain)> {
    let (dl, dr) = KinematicChain::default_arms();
    let l = match left {
        Some(p) => KinematicChain::load(p)?,
        None => dl,
    };
    let r = match right {
        Some(p) => KinematicChain::load(p)?,
        None => dr,
    };
    Ok((l, r))
}
