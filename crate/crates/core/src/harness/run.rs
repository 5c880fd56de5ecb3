//! Monte Carlo campaign execution.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_gen::{gen_cascade, FadingSpec, RandomStream};
use crate::error::{Error, Result};
use crate::harness::spec::{ExperimentSpec, ModelSelection, Scenario};
use crate::models::{ChannelModel, PhysicsCompliant, WidelyUsed};
use crate::multiport::Dimensions;
use crate::optimizer::{
    alg1_optimize, los_optimal_phases_physics, los_optimal_phases_widely, upper_bound_physics, upper_bound_widely,
    ModelKind,
};
use crate::scaling::{mc_normalized_gain, mc_relative_difference};
use crate::scattering::{Architecture, CascadeChannels, ScatteringStack};

/// Aggregated statistics of one (scenario, model, architecture, L, N_I, K) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainStats {
    pub scenario: String,
    pub model: String,
    pub architecture: String,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N_I")]
    pub n_i: usize,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub trials: usize,
    pub mean_gain: f64,
    pub std_err: f64,
    pub bound_mean: f64,
    pub eta: Option<f64>,
    pub rho: Option<f64>,
    pub converged_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainTable {
    pub spec: ExperimentSpec,
    pub rows: Vec<GainStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for trial-level parallelism; 1 runs sequentially.
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 1 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    gain: f64,
    bound: f64,
    converged: bool,
}

/// Results of one trial for one architecture.
#[derive(Debug, Clone, Copy, Default)]
struct ArchTrial {
    physics: Option<Outcome>,
    widely: Option<Outcome>,
    cross: Option<f64>,
}

struct Point<'a> {
    spec: &'a ExperimentSpec,
    dims: Dimensions,
    fading: FadingSpec,
    stream: RandomStream,
}

impl Point<'_> {
    fn optimize(
        &self,
        ch: &CascadeChannels,
        model: ModelKind,
        arch: Architecture,
        init_seed: u64,
    ) -> Result<(ScatteringStack, bool)> {
        if self.spec.scenario == Scenario::Los {
            // Rank-one links: the diagonal closed form is also optimal over unitary matrices.
            let stack = match model {
                ModelKind::Physics => los_optimal_phases_physics(ch)?,
                ModelKind::WidelyUsed => los_optimal_phases_widely(ch)?,
            };
            return Ok((stack, true));
        }
        let cfg = self.spec.optimizer.config(model, arch, init_seed);
        let r = alg1_optimize(ch, &cfg)?;
        Ok((r.stack, r.converged))
    }

    fn trial(&self, t: usize) -> Result<Vec<ArchTrial>> {
        let stream = self.stream.child(format_args!("trial={t}"));
        let ch = gen_cascade(&self.dims, &[self.fading], &stream)?;
        let init_seed: u64 = stream.child("init").rng().random();
        let physics_bound = if self.spec.needs_physics() {
            upper_bound_physics(&ch)?
        } else {
            0.0
        };
        let widely_bound = upper_bound_widely(&ch);
        let mut out = Vec::with_capacity(self.spec.architectures.len());
        for &arch in &self.spec.architectures {
            let mut r = ArchTrial::default();
            if self.spec.needs_physics() {
                let (stack, converged) = self.optimize(&ch, ModelKind::Physics, arch, init_seed)?;
                r.physics = Some(Outcome {
                    gain: PhysicsCompliant.gain(&ch, &stack)?,
                    bound: physics_bound,
                    converged,
                });
            }
            if self.spec.needs_widely() {
                let (stack, converged) = self.optimize(&ch, ModelKind::WidelyUsed, arch, init_seed)?;
                r.widely = Some(Outcome {
                    gain: WidelyUsed.gain(&ch, &stack)?,
                    bound: widely_bound,
                    converged,
                });
                r.cross = Some(PhysicsCompliant.gain(&ch, &stack)?);
            }
            out.push(r);
        }
        Ok(out)
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn std_err(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

fn frac(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut yes, mut n) = (0usize, 0usize);
    for f in flags {
        n += 1;
        yes += usize::from(f);
    }
    yes as f64 / n as f64
}

fn fading_for(scenario: &Scenario, k: Option<f64>) -> FadingSpec {
    match scenario {
        Scenario::Los => FadingSpec::los(1.0),
        Scenario::Rayleigh => FadingSpec::rayleigh(1.0),
        Scenario::Rician { .. } => FadingSpec::rician(k.unwrap_or(0.0), 1.0),
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<GainTable> {
    run_experiment_with(spec, RunOptions::default())
}

/// Runs every grid point. Each trial draws one cascade from the stream
/// `l=<L>/n_i=<N_I>/trial=<t>`, shared by all models, architectures and
/// Rician factors at that point; results are reduced in trial order.
pub fn run_experiment_with(spec: &ExperimentSpec, opts: RunOptions) -> Result<GainTable> {
    spec.validate()?;
    if opts.threads == 0 {
        return Err(Error::InvalidInput("thread count must be at least 1".into()));
    }
    let pool = if opts.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.threads)
                .build()
                .map_err(|e| Error::InvalidInput(e.to_string()))?,
        )
    } else {
        None
    };
    let ks: Vec<Option<f64>> = match &spec.scenario {
        Scenario::Rician { k } => k.iter().map(|&x| Some(x)).collect(),
        _ => vec![None],
    };
    let root = RandomStream::new(spec.seed, "");
    let mut rows = Vec::new();
    for &l in &spec.l {
        for &n_i in &spec.n_i_grid {
            let trials = spec.trials.for_n_i(n_i);
            for &k in &ks {
                let point = Point {
                    spec,
                    dims: Dimensions::new(spec.n_t, spec.n_r, n_i, l)?,
                    fading: fading_for(&spec.scenario, k),
                    stream: root.child(format_args!("l={l}")).child(format_args!("n_i={n_i}")),
                };
                let results: Vec<Vec<ArchTrial>> = match &pool {
                    Some(p) => p.install(|| (0..trials).into_par_iter().map(|t| point.trial(t)).collect::<Result<_>>())?,
                    None => (0..trials).map(|t| point.trial(t)).collect::<Result<_>>()?,
                };
                aggregate(spec, l, n_i, k, &results, &mut rows)?;
            }
        }
    }
    Ok(GainTable {
        spec: spec.clone(),
        rows,
    })
}

fn aggregate(
    spec: &ExperimentSpec,
    l: usize,
    n_i: usize,
    k: Option<f64>,
    results: &[Vec<ArchTrial>],
    rows: &mut Vec<GainStats>,
) -> Result<()> {
    for (a, arch) in spec.architectures.iter().enumerate() {
        let col: Vec<ArchTrial> = results.iter().map(|r| r[a]).collect();
        let physics: Vec<Outcome> = col.iter().filter_map(|r| r.physics).collect();
        let widely: Vec<Outcome> = col.iter().filter_map(|r| r.widely).collect();
        let cross: Vec<f64> = col.iter().filter_map(|r| r.cross).collect();
        let gains = |o: &[Outcome]| o.iter().map(|x| x.gain).collect::<Vec<_>>();
        let (pg, wg) = (gains(&physics), gains(&widely));
        let (eta, rho) = if !pg.is_empty() && !wg.is_empty() {
            (Some(mc_relative_difference(&pg, &wg)?), Some(mc_normalized_gain(&cross, &pg)?))
        } else {
            (None, None)
        };
        for &m in &spec.models {
            let (samples, outcomes) = match m {
                ModelSelection::Physics => (pg.clone(), &physics),
                ModelSelection::WidelyUsed => (wg.clone(), &widely),
                ModelSelection::SuboptimalCross => (cross.clone(), &widely),
            };
            let bound_mean = match m {
                ModelSelection::WidelyUsed => mean(&widely.iter().map(|o| o.bound).collect::<Vec<_>>()),
                _ => mean(&physics.iter().map(|o| o.bound).collect::<Vec<_>>()),
            };
            rows.push(GainStats {
                scenario: spec.scenario.name().to_string(),
                model: m.name().to_string(),
                architecture: arch.name().to_string(),
                l,
                n_i,
                k,
                trials: samples.len(),
                mean_gain: mean(&samples),
                std_err: std_err(&samples),
                bound_mean,
                eta,
                rho,
                converged_frac: frac(outcomes.iter().map(|o| o.converged)),
            });
        }
    }
    Ok(())
}
