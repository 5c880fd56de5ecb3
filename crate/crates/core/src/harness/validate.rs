//! Self-check suite run by `multiris validate`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel_gen::{gen_cascade, FadingSpec, LosLink, RandomStream};
use crate::error::Result;
use crate::linalg::{self, CMat, CVec, C64};
use crate::models::{ChannelModel, PhysicsCompliant, WidelyUsed};
use crate::multiport::{
    assemble_blocks, block_subdiagonal_inverse, channel_z_cascade, channel_z_general, channel_z_matched,
    channel_z_pure_cascade, loads_to_stack, network_to_channels, Assumptions, Dimensions, DEFAULT_Z0,
};
use crate::optimizer::{
    alg1_optimize, inner_solver_registry, los_optimal_phases_physics, upper_bound_physics,
    upper_bound_widely, Init, InnerProblemData, ModelKind, OptimizerConfig,
};
use crate::scattering::{
    assemble_full_physics, assemble_multisector, Architecture, CascadeChannels, MultiSectorSpec, ScatteringStack,
    SectorConfig,
};
use crate::synth;

const SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub measured: f64,
    pub tol: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<28} measured={:.3e} tol={:.1e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tol,
                c.detail
            )?;
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "validation FAILED" })
    }
}

/// Error-valued checks pass when the worst error stays below `tol`.
fn below(name: &'static str, measured: Result<f64>, tol: f64, detail: impl Into<String>) -> CheckResult {
    match measured {
        Ok(m) => CheckResult {
            name,
            passed: m.is_finite() && m < tol,
            measured: m,
            tol,
            detail: detail.into(),
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            measured: f64::NAN,
            tol,
            detail: format!("error: {e}"),
        },
    }
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ tag)
}

fn block_inverse_oracle() -> Result<f64> {
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    for t in 0..200 {
        let (l, n) = (1 + t % 6, 1 + (t / 6) % 8);
        let (d, s) = synth::random_bidiagonal(&mut rng, l, n);
        let fast = assemble_blocks(&block_subdiagonal_inverse(&d, &s)?);
        let mut m = vec![vec![linalg::zeros(n, n); l]; l];
        for k in 0..l {
            m[k][k] = d[k].clone();
            if k > 0 {
                m[k][k - 1] = s[k - 1].clone();
            }
        }
        let dense = linalg::inverse(&assemble_blocks(&m), "dense block matrix")?;
        worst = worst.max(linalg::rel_error(&fast, &dense));
    }
    Ok(worst)
}

/// Impedance-domain chain against the scattering-domain models.
fn z_s_equivalence(model: &dyn ChannelModel) -> Result<f64> {
    let mut rng = rng(2);
    let mut worst: f64 = 0.0;
    for t in 0..40 {
        let l = 1 + t % 4;
        let dims = Dimensions::new(2, 3, 3, l)?;
        let loads = synth::random_lossless_loads(&mut rng, &dims, DEFAULT_Z0, t % 2 == 0);
        let stack = loads_to_stack(&loads, DEFAULT_Z0)?;

        let net = synth::random_network(&mut rng, dims, DEFAULT_Z0, Assumptions::through(5));
        let general = channel_z_general(&net, &loads)?;
        let cascade = channel_z_cascade(&net, &loads)?;
        let matched = channel_z_matched(&net, &loads)?;
        let full = assemble_full_physics(&network_to_channels(&net)?, &stack)?;
        worst = worst
            .max(linalg::rel_error(&cascade, &general))
            .max(linalg::rel_error(&matched, &general))
            .max(linalg::rel_error(&full, &general));

        let pure = synth::random_network(&mut rng, dims, DEFAULT_Z0, Assumptions::through(6));
        let z = channel_z_pure_cascade(&pure, &loads)?;
        let s = model.assemble(&network_to_channels(&pure)?, &stack)?;
        worst = worst.max(linalg::rel_error(&s, &z));
    }
    Ok(worst)
}

fn random_pure(rng: &mut ChaCha8Rng, n_t: usize, n_r: usize, sizes: &[usize]) -> Result<CascadeChannels> {
    let l = sizes.len();
    let inter = (1..l).map(|k| synth::gaussian_matrix(rng, sizes[k], sizes[k - 1], 1.0)).collect();
    CascadeChannels::pure(
        synth::gaussian_matrix(rng, sizes[0], n_t, 1.0),
        inter,
        synth::gaussian_matrix(rng, n_r, sizes[l - 1], 1.0),
    )
}

fn random_phases(rng: &mut ChaCha8Rng, sizes: &[usize]) -> ScatteringStack {
    let phases: Vec<Vec<f64>> = sizes
        .iter()
        .map(|&n| (0..n).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect())
        .collect();
    ScatteringStack::from_phases(&phases)
}

/// Reflective sectors reproduce the model, transmissive sectors the widely used one.
fn multisector_equivalence(model: &dyn ChannelModel) -> Result<f64> {
    let mut rng = rng(3);
    let mut worst: f64 = 0.0;
    for t in 0..40 {
        let l = 1 + t % 4;
        let sectors = 1 + t % 3;
        let n_s = 2 + t % 3;
        let sizes = vec![n_s; l];
        let ch = random_pure(&mut rng, 2, 2, &sizes)?;
        let stack = random_phases(&mut rng, &sizes);
        let reflective = MultiSectorSpec::new(n_s * sectors, vec![SectorConfig { sectors, arrival: 1, departure: 1 }; l])?;
        let r = assemble_multisector(&ch, &stack, &reflective)?;
        worst = worst.max(linalg::rel_error(&r, &model.assemble(&ch, &stack)?));
        if sectors > 1 {
            let through = MultiSectorSpec::new(n_s * sectors, vec![SectorConfig { sectors, arrival: 1, departure: 2 }; l])?;
            let m = assemble_multisector(&ch, &stack, &through)?;
            worst = worst.max(linalg::rel_error(&m, &WidelyUsed.assemble(&ch, &stack)?));
        }
    }
    Ok(worst)
}

fn identity_nullifies(model: &dyn ChannelModel) -> Result<f64> {
    let mut rng = rng(4);
    let mut worst: f64 = 0.0;
    for l in 1..=4 {
        let sizes = vec![4; l];
        let ch = random_pure(&mut rng, 2, 2, &sizes)?;
        let h = model.assemble(&ch, &ScatteringStack::identity(&sizes))?;
        worst = worst.max(linalg::frobenius(&h));
    }
    Ok(worst)
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    let v = synth::gaussian_matrix(rng, n, 1, 1.0).column(0).into_owned();
    let norm = v.norm();
    v / C64::from(norm)
}

/// Each solver attains its analytic optimum and no feasible draw beats it.
fn inner_solver_optimality() -> Result<f64> {
    let mut rng = rng(5);
    let reg = inner_solver_registry();
    let mut worst: f64 = 0.0;
    for name in reg.names() {
        let solver = reg.get(name)?;
        for t in 0..50 {
            let n = 2 + t % 6;
            let a = synth::gaussian_matrix(&mut rng, 3, n, 1.0);
            let b = synth::gaussian_matrix(&mut rng, n, 2, 1.0);
            let offset = if t % 2 == 0 { -1.0 } else { 0.0 };
            let (u, v) = (unit(&mut rng, 3), unit(&mut rng, 2));
            let data = InnerProblemData::from_equivalent(&a, &b, offset, u, v)?;
            let theta = solver.solve(&data)?;
            solver.architecture().check(&theta)?;
            let opt = solver.optimum(&data);
            let got = data.objective(&theta);
            worst = worst.max((opt - got).abs() / opt.max(f64::MIN_POSITIVE));
            for _ in 0..20 {
                let probe = random_phases(&mut rng, &[n]).thetas()[0].clone();
                worst = worst.max((data.objective(&probe) - got) / got.max(f64::MIN_POSITIVE));
            }
        }
    }
    Ok(worst)
}

/// Largest relative excess of an optimized gain over its bound, or of a
/// trace decrease, across small Rayleigh instances.
fn bound_compliance() -> Result<f64> {
    let root = RandomStream::new(SEED, "validate/bounds");
    let mut worst: f64 = 0.0;
    for t in 0..6 {
        let l = 1 + t % 3;
        let dims = Dimensions::new(2, 2, 4, l)?;
        let ch = gen_cascade(&dims, &[FadingSpec::rayleigh(1.0)], &root.child(t))?;
        for model in [ModelKind::Physics, ModelKind::WidelyUsed] {
            let bound = match model {
                ModelKind::Physics => upper_bound_physics(&ch)?,
                ModelKind::WidelyUsed => upper_bound_widely(&ch),
            };
            for arch in [Architecture::Diagonal, Architecture::Unitary] {
                let cfg = OptimizerConfig::new(model, arch, Init::RandomPhase { seed: t as u64 });
                let r = alg1_optimize(&ch, &cfg)?;
                worst = worst.max((r.final_gain() - bound) / bound);
                for w in r.gain_trace.windows(2) {
                    worst = worst.max((w[0] - w[1]) / w[0].max(f64::MIN_POSITIVE));
                }
            }
        }
    }
    Ok(worst)
}

/// Closed-form LoS phases against `∏(|bᵀa| + Σ|b_n||a_n|)² ‖a_L‖² ‖b_0‖²`.
fn los_formula() -> Result<f64> {
    let root = RandomStream::new(SEED, "validate/los");
    let mut worst: f64 = 0.0;
    for t in 0..20 {
        let l = 1 + t % 4;
        let s = root.child(t);
        let mut links = vec![LosLink::draw(8, 2, 1.0, &s.child(0))];
        links.extend((1..l).map(|k| LosLink::draw(8, 8, 1.0, &s.child(k))));
        links.push(LosLink::draw(3, 8, 1.0, &s.child(l)));
        let m: Vec<CMat> = links.iter().map(LosLink::matrix).collect();
        let ch = CascadeChannels::pure(m[0].clone(), m[1..l].to_vec(), m[l].clone())?;
        let gain = PhysicsCompliant.gain(&ch, &los_optimal_phases_physics(&ch)?)?;
        let mut expected = links[l].a.norm_squared() * links[0].b.norm_squared();
        for ell in 1..=l {
            let (b, a) = (&links[ell].b, &links[ell - 1].a);
            let sum: f64 = b.iter().zip(a.iter()).map(|(x, y)| x.norm() * y.norm()).sum();
            expected *= (b.dot(a).norm() + sum).powi(2);
        }
        worst = worst.max((gain - expected).abs() / expected);
    }
    Ok(worst)
}

/// Runs the suite against the built-in physics-compliant model.
pub fn validate() -> ValidationReport {
    validate_with(&PhysicsCompliant)
}

/// Runs the suite with `model` standing in for the physics-compliant model.
pub fn validate_with(model: &dyn ChannelModel) -> ValidationReport {
    let checks = vec![
        below("block_inverse_oracle", block_inverse_oracle(), 1e-10, "200 instances, L 1..6, blocks 1..8"),
        below("z_s_equivalence", z_s_equivalence(model), 1e-10, "general = cascade = matched = S domain"),
        below(
            "multisector_equivalence",
            multisector_equivalence(model),
            1e-12,
            "reflective = model, transmissive = widely used",
        ),
        below("identity_nullifies", identity_nullifies(model), 1e-300, "Theta = I"),
        below("inner_solver_optimality", inner_solver_optimality(), 1e-9, "diagonal and unitary solvers"),
        below("bound_compliance", bound_compliance(), 1e-9, "optimizer gains and traces vs bounds"),
        below("los_closed_form", los_formula(), 1e-9, "closed-form LoS phases"),
    ];
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct SignFlipped;

    impl ChannelModel for SignFlipped {
        fn name(&self) -> &'static str {
            "sign_flipped"
        }

        fn structural_offset(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn fresh_build_passes() {
        let r = validate();
        assert!(r.passed(), "{r}");
        assert!(r.get("block_inverse_oracle").unwrap().measured < 1e-10);
    }

    #[test]
    fn sign_mutation_is_caught() {
        let r = validate_with(&SignFlipped);
        assert!(!r.passed());
        for name in ["z_s_equivalence", "multisector_equivalence", "identity_nullifies"] {
            assert!(!r.get(name).unwrap().passed, "{name}");
        }
    }
}
