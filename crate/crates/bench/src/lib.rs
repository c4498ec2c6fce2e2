//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use handover_core::hsmm::{train_model, TrainOptions};
use handover_core::synth::synth_demo;
use handover_core::{
    Controller, ControllerConfig, Demonstration, HsmmModel, KinematicChain, SynthConfig,
};

/// Model trained on `n` default synthetic demonstrations.
pub fn trained_model(n: u64) -> HsmmModel {
    let cfg = SynthConfig::default();
    let demos: Vec<Demonstration> = (0..n)
        .map(|s| synth_demo(&cfg, s).expect("default config is valid"))
        .collect();
    train_model(&demos, TrainOptions::default()).expect("synthetic demos train")
}

pub fn controller(model: HsmmModel) -> Controller {
    let (l, r) = KinematicChain::default_arms();
    Controller::new(ControllerConfig::new(Arc::new(model), l, r)).expect("model dt matches")
}

/// A held-out stream from the same generator.
pub fn stream(seed: u64) -> Demonstration {
    synth_demo(&SynthConfig::default(), seed).expect("default config is valid")
}
