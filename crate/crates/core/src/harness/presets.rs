//! Named experiment presets reproducing the standard sweeps.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::harness::spec::{ExperimentSpec, ModelSelection, OptimizerOverrides, Scenario, TrialPolicy, Trials};
use crate::scattering::Architecture;

pub const PRESET_SEED: u64 = 1;
pub const RICIAN_K_GRID: [f64; 5] = [0.0, 1.0, 3.0, 10.0, 30.0];
const N_I_GRID: [usize; 5] = [8, 16, 32, 64, 128];
const RICIAN_N_I: usize = 32;

pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: [PresetInfo; 8] = [
    PresetInfo {
        name: "los-gain",
        description: "LoS optimized gain of both models versus N_I, L in {2, 4}",
    },
    PresetInfo {
        name: "los-diff",
        description: "LoS relative difference between the models versus N_I, L in {2, 4}",
    },
    PresetInfo {
        name: "los-rho",
        description: "LoS normalized gain of widely-used-optimized RISs versus N_I, L in {2, 4}",
    },
    PresetInfo {
        name: "fading-gain",
        description: "Rayleigh optimized gain and bounds, diagonal and unitary RISs",
    },
    PresetInfo {
        name: "fading-diff",
        description: "Rayleigh relative difference between the models, diagonal and unitary RISs",
    },
    PresetInfo {
        name: "fading-rho",
        description: "Rayleigh normalized gain, diagonal and unitary RISs",
    },
    PresetInfo {
        name: "rician-diff",
        description: "Rician K sweep of the relative difference at N_I = 32",
    },
    PresetInfo {
        name: "rician-rho",
        description: "Rician K sweep of the normalized gain at N_I = 32",
    },
];

fn both() -> Vec<ModelSelection> {
    vec![ModelSelection::Physics, ModelSelection::WidelyUsed]
}

fn with_cross() -> Vec<ModelSelection> {
    vec![ModelSelection::Physics, ModelSelection::WidelyUsed, ModelSelection::SuboptimalCross]
}

fn spec(
    scenario: Scenario,
    n_i_grid: Vec<usize>,
    trials: Trials,
    models: Vec<ModelSelection>,
    architectures: Vec<Architecture>,
) -> ExperimentSpec {
    ExperimentSpec {
        scenario,
        l: vec![2, 4],
        n_i_grid,
        n_t: 2,
        n_r: 2,
        trials,
        seed: PRESET_SEED,
        models,
        architectures,
        optimizer: OptimizerOverrides::default(),
        output: None,
    }
}

/// Multipath points at `N_I = 128` run 100 trials, all others 1000.
fn fading_trials() -> Trials {
    Trials::PerElementCount(TrialPolicy {
        default: 1000,
        per_n_i: BTreeMap::from([(128, 100)]),
    })
}

pub fn figure_preset(name: &str) -> Result<ExperimentSpec> {
    let both_arch = vec![Architecture::Diagonal, Architecture::Unitary];
    let rician = || Scenario::Rician { k: RICIAN_K_GRID.to_vec() };
    let s = match name {
        "los-gain" | "los-diff" => spec(Scenario::Los, N_I_GRID.to_vec(), Trials::Fixed(1000), both(), vec![Architecture::Diagonal]),
        "los-rho" => spec(Scenario::Los, N_I_GRID.to_vec(), Trials::Fixed(1000), with_cross(), vec![Architecture::Diagonal]),
        "fading-gain" | "fading-diff" => spec(Scenario::Rayleigh, N_I_GRID.to_vec(), fading_trials(), both(), both_arch),
        "fading-rho" => spec(Scenario::Rayleigh, N_I_GRID.to_vec(), fading_trials(), with_cross(), both_arch),
        "rician-diff" => spec(rician(), vec![RICIAN_N_I], Trials::Fixed(500), both(), both_arch),
        "rician-rho" => spec(rician(), vec![RICIAN_N_I], Trials::Fixed(500), with_cross(), both_arch),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(s)
}
