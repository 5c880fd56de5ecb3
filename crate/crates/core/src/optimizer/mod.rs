//! Channel-gain maximization over RIS configurations.

mod bounds;
mod inner;
mod los;
mod spectral;

pub use bounds::{upper_bound_physics, upper_bound_physics_capped, upper_bound_widely, DEFAULT_MAX_BOUND_L};
pub use inner::{
    inner_solve_diagonal, inner_solve_unitary, inner_solver_registry, solver_for, DiagonalSolver, InnerProblemData,
    InnerSolver, UnitarySolver,
};
pub use los::{los_optimal_phases_physics, los_optimal_phases_widely, rank_one_factor, RankOne};
pub use spectral::{channel_gain, dominant_singular_pair, spectral_norm, SingularPair};

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::models::{ChannelModel, PhysicsCompliant, WidelyUsed};
use crate::scattering::{shifted, Architecture, CascadeChannels, ScatteringStack};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Physics,
    WidelyUsed,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Physics => "physics",
            ModelKind::WidelyUsed => "widely_used",
        }
    }

    pub fn model(&self) -> &'static dyn ChannelModel {
        match self {
            ModelKind::Physics => &PhysicsCompliant,
            ModelKind::WidelyUsed => &WidelyUsed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Identity,
    RandomPhase { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    pub rel_tol: f64,
    pub init: Init,
    pub architecture: Architecture,
    pub model: ModelKind,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 100,
            max_inner_iters: 50,
            rel_tol: 1e-6,
            init: Init::RandomPhase { seed: 0 },
            architecture: Architecture::Diagonal,
            model: ModelKind::Physics,
        }
    }
}

impl OptimizerConfig {
    pub fn new(model: ModelKind, architecture: Architecture, init: Init) -> Self {
        Self {
            model,
            architecture,
            init,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return Err(Error::InvalidInput("iteration caps must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidInput(format!("rel_tol {} must be positive", self.rel_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub stack: ScatteringStack,
    /// Objective before the first sweep followed by its value after each sweep.
    pub gain_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl OptimizationResult {
    pub fn final_gain(&self) -> f64 {
        *self.gain_trace.last().unwrap()
    }
}

fn initial_thetas(sizes: &[usize], init: Init) -> Vec<CMat> {
    match init {
        Init::Identity => sizes.iter().map(|&n| linalg::identity(n)).collect(),
        Init::RandomPhase { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sizes
                .iter()
                .map(|&n| {
                    let phases: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
                    linalg::phase_diagonal(&phases)
                })
                .collect()
        }
    }
}

pub fn alg1_optimize(ch: &CascadeChannels, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    alg1_optimize_with(ch, cfg.model.model(), &*solver_for(cfg.architecture), cfg)
}

/// Alternating optimization: sweeps `ℓ = 1..L`, each time maximizing the
/// gain of `A(Θ_ℓ + c·I)B` where `A` and `B` collect the rest of the cascade.
/// The inner loop alternates a global `Θ_ℓ` update with the dominant
/// singular pair `(u, v)`; a candidate is kept only if it does not lower the
/// gain, so the trace is non-decreasing.
pub fn alg1_optimize_with(
    ch: &CascadeChannels,
    model: &dyn ChannelModel,
    solver: &dyn InnerSolver,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    let l = ch.l();
    let c = model.structural_offset();
    let mut thetas = initial_thetas(&ch.ris_sizes(), cfg.init);

    let mut gain = model.gain(ch, &ScatteringStack::unconstrained(thetas.clone()))?;
    let mut trace = vec![gain];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_outer_iters {
        iterations += 1;
        let start = gain;

        // left[ℓ] = C_L F_L ⋯ F_{ℓ+1} C_ℓ with the pre-sweep Θ_{ℓ+1..L}
        let mut left = vec![CMat::zeros(0, 0); l + 1];
        left[l] = ch.hop(l).clone();
        for ell in (1..l).rev() {
            left[ell] = &left[ell + 1] * shifted(&thetas[ell], c) * ch.hop(ell);
        }
        let mut right = ch.hop(0).clone();

        for ell in 1..=l {
            let (a, b) = (&left[ell], &right);
            let ab = a * b;
            let equivalent = |theta: &CMat| a * theta * b + &ab * linalg::c(c, 0.0);

            let mut pair = dominant_singular_pair(&equivalent(&thetas[ell - 1]));
            let mut current = pair.sigma * pair.sigma;
            for _ in 0..cfg.max_inner_iters {
                let data = InnerProblemData::from_equivalent(a, b, c, pair.u.clone(), pair.v.clone())?;
                let candidate = match solver.solve(&data) {
                    Ok(t) => t,
                    Err(Error::ZeroVector) => break,
                    Err(e) => return Err(e),
                };
                let next = dominant_singular_pair(&equivalent(&candidate));
                let value = next.sigma * next.sigma;
                if value < current {
                    break;
                }
                thetas[ell - 1] = candidate;
                pair = next;
                let improvement = value - current;
                current = value;
                if improvement <= cfg.rel_tol * current {
                    break;
                }
            }
            gain = current;
            if ell < l {
                right = ch.hop(ell) * (shifted(&thetas[ell - 1], c) * right);
            }
        }
        trace.push(gain);
        if gain - start <= cfg.rel_tol * start.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let stack = ScatteringStack::new(solver.architecture(), thetas)?;
    Ok(OptimizationResult {
        stack,
        gain_trace: trace,
        converged,
        iterations,
    })
}
