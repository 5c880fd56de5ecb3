//! Closed-form line-of-sight scaling laws and model-discrepancy metrics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel_gen::{gen_link, FadingSpec, RandomStream};
use crate::error::{Error, Result};

/// Draw count used when estimating mean squared singular values.
pub const DEFAULT_SPECTRUM_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingInputs {
    pub n_i: usize,
    pub l: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub path_gain: f64,
}

impl ScalingInputs {
    pub fn new(n_i: usize, l: usize, n_t: usize, n_r: usize, path_gain: f64) -> Result<Self> {
        if n_i == 0 || l == 0 || n_t == 0 || n_r == 0 {
            return Err(Error::InvalidInput("counts must be at least 1".into()));
        }
        if !(path_gain >= 0.0 && path_gain.is_finite()) {
            return Err(Error::InvalidInput(format!("path gain {path_gain}")));
        }
        Ok(Self {
            n_i,
            l,
            n_t,
            n_r,
            path_gain,
        })
    }

    fn prefactor(&self) -> f64 {
        self.path_gain.powi(2) * (self.n_r * self.n_t) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMetrics {
    pub eta: f64,
    pub rho: f64,
    pub s: f64,
}

fn guarded(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::RangeExceeded(what.to_string()))
    }
}

fn per_ris_power(base: f64, inp: &ScalingInputs, what: &str) -> Result<f64> {
    let n = inp.n_i as f64;
    guarded((n * n).powi(inp.l as i32), what)?;
    guarded(inp.prefactor() * base.powi(inp.l as i32), what)
}

/// `Λ²(N_I² + √(πN_I)N_I + N_I)^L N_R N_T`.
pub fn expected_gain_physics_los(inp: &ScalingInputs) -> Result<f64> {
    let n = inp.n_i as f64;
    per_ris_power(n * n + (PI * n).sqrt() * n + n, inp, "physics LoS scaling law")
}

/// `Λ² N_I^{2L} N_R N_T`.
pub fn gain_widely_los(inp: &ScalingInputs) -> Result<f64> {
    let n = inp.n_i as f64;
    per_ris_power(n * n, inp, "widely used LoS gain")
}

/// `Λ²(N_I² + N_I)^L N_R N_T`.
pub fn expected_gain_suboptimal_los(inp: &ScalingInputs) -> Result<f64> {
    let n = inp.n_i as f64;
    per_ris_power(n * n + n, inp, "suboptimal LoS gain")
}

/// `((N_I + √(πN_I) + 1)^L − N_I^L) / N_I^L`, evaluated as
/// `(1 + √(π/N_I) + 1/N_I)^L − 1` to avoid cancellation at large `N_I`.
pub fn relative_difference_los(n_i: usize, l: usize) -> Result<f64> {
    let n = n_i as f64;
    let x = (PI / n).sqrt() + 1.0 / n;
    guarded((l as f64 * x.ln_1p()).exp_m1(), "LoS relative difference")
}

/// `((N_I + 1)/(N_I + √(πN_I) + 1))^L`.
pub fn normalized_gain_los(n_i: usize, l: usize) -> f64 {
    let n = n_i as f64;
    ((n + 1.0) / (n + (PI * n).sqrt() + 1.0)).powi(l as i32)
}

fn mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

fn positive_mean(samples: &[f64]) -> Result<f64> {
    let m = mean(samples)?;
    if !(m > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(m)
}

/// `(mean(physics) − mean(widely)) / mean(widely)`.
pub fn mc_relative_difference(physics_gains: &[f64], widely_gains: &[f64]) -> Result<f64> {
    let w = positive_mean(widely_gains)?;
    Ok((mean(physics_gains)? - w) / w)
}

/// `mean(suboptimal) / mean(optimal)`.
pub fn mc_normalized_gain(suboptimal_gains: &[f64], optimal_gains: &[f64]) -> Result<f64> {
    let o = positive_mean(optimal_gains)?;
    Ok(mean(suboptimal_gains)? / o)
}

/// `s = (1/N²)(1 + Σ_{n≥2} λ̄_n/λ̄_1)` for a nonincreasing sequence `λ̄`.
pub fn structural_scattering_strength(mean_sq_singular_values: &[f64]) -> Result<f64> {
    let Some(&first) = mean_sq_singular_values.first() else {
        return Err(Error::EmptySequence);
    };
    if !(first > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    let n = mean_sq_singular_values.len() as f64;
    let tail: f64 = mean_sq_singular_values[1..].iter().map(|x| x / first).sum();
    Ok((1.0 + tail) / (n * n))
}

/// Sample means of the ordered squared singular values of `n × n` links.
pub fn estimate_mean_sq_singular_values(n: usize, spec: &FadingSpec, draws: usize, stream: &RandomStream) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    for t in 0..draws {
        let h = gen_link(n, n, spec, &stream.child(t));
        let mut sv: Vec<f64> = h.singular_values().iter().map(|s| s * s).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        for (a, s) in acc.iter_mut().zip(sv) {
            *a += s;
        }
    }
    acc.iter().map(|a| a / draws as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(n_i: usize, l: usize) -> ScalingInputs {
        ScalingInputs::new(n_i, l, 2, 2, 1.0).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let v = expected_gain_physics_los(&inputs(1, 2)).unwrap();
        let expected = (2.0 + PI.sqrt()).powi(2) * 4.0;
        assert!((v - expected).abs() < 1e-12 * expected);
        assert!((v - 56.92).abs() < 0.01);
        let zero = ScalingInputs::new(4, 2, 2, 2, 0.0).unwrap();
        assert_eq!(expected_gain_physics_los(&zero).unwrap(), 0.0);

        assert_eq!(gain_widely_los(&inputs(16, 2)).unwrap(), 262_144.0);
        assert_eq!(gain_widely_los(&ScalingInputs::new(1, 1, 1, 1, 3.0).unwrap()).unwrap(), 9.0);
        assert_eq!(expected_gain_suboptimal_los(&inputs(16, 4)).unwrap(), 272f64.powi(4) * 4.0);
    }

    #[test]
    fn suboptimal_power_law() {
        let two = expected_gain_suboptimal_los(&inputs(16, 2)).unwrap();
        let four = expected_gain_suboptimal_los(&inputs(16, 4)).unwrap();
        assert!((two * two / 4.0 - four).abs() < 1e-9 * four);
    }

    #[test]
    fn eta_and_rho_reference_points() {
        assert!((relative_difference_los(16, 4).unwrap() - 4.1387).abs() < 1e-3);
        assert!((relative_difference_los(128, 4).unwrap() - 0.8388).abs() < 1e-3);
        assert!((normalized_gain_los(16, 4) - 0.2480).abs() < 1e-3);
        assert!((normalized_gain_los(128, 4) - 0.5610).abs() < 1e-3);
        assert_eq!(normalized_gain_los(16, 0), 1.0);
    }

    #[test]
    fn eta_literal_form_agrees() {
        for (n, l) in [(8usize, 2usize), (32, 3), (128, 4)] {
            let nf = n as f64;
            let literal = ((nf + (PI * nf).sqrt() + 1.0).powi(l as i32) - nf.powi(l as i32)) / nf.powi(l as i32);
            assert!((relative_difference_los(n, l).unwrap() - literal).abs() < 1e-12 * literal);
        }
    }

    #[test]
    fn eta_monotone_on_grid() {
        for l in 1..=6 {
            for n in 1..300 {
                assert!(relative_difference_los(n + 1, l).unwrap() < relative_difference_los(n, l).unwrap());
                assert!(relative_difference_los(n, l + 1).unwrap() > relative_difference_los(n, l).unwrap());
            }
        }
    }

    #[test]
    fn eta_vanishes_asymptotically() {
        let n = 1_000_000usize;
        for l in 1..=4 {
            let eta = relative_difference_los(n, l).unwrap();
            let approx = l as f64 * (PI / n as f64).sqrt();
            assert!((eta - approx).abs() < 0.01 * approx, "{eta} vs {approx}");
        }
    }

    #[test]
    fn overflow_is_reported() {
        let big = ScalingInputs::new(1 << 20, 40, 2, 2, 1.0).unwrap();
        assert!(matches!(expected_gain_physics_los(&big), Err(Error::RangeExceeded(_))));
        assert!(matches!(gain_widely_los(&big), Err(Error::RangeExceeded(_))));
    }

    #[test]
    fn mc_metrics() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(mc_relative_difference(&a, &a).unwrap(), 0.0);
        assert_eq!(mc_relative_difference(&[2.0, 4.0, 6.0], &a).unwrap(), 1.0);
        assert_eq!(mc_normalized_gain(&a, &a).unwrap(), 1.0);
        assert!(matches!(mc_relative_difference(&[], &a), Err(Error::EmptySample)));
        assert!(matches!(mc_normalized_gain(&a, &[0.0]), Err(Error::DegenerateDenominator)));
    }

    #[test]
    fn strength_special_cases() {
        let mut rank_one = vec![0.0; 16];
        rank_one[0] = 5.0;
        assert_eq!(structural_scattering_strength(&rank_one).unwrap(), 1.0 / 256.0);
        assert!((structural_scattering_strength(&[2.0; 16]).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        assert!(matches!(structural_scattering_strength(&[]), Err(Error::EmptySequence)));
    }

    #[test]
    fn rayleigh_strength_is_between_extremes() {
        let n = 32;
        let lam = estimate_mean_sq_singular_values(n, &FadingSpec::rayleigh(1.0), DEFAULT_SPECTRUM_DRAWS, &RandomStream::new(3, "s"));
        let s = structural_scattering_strength(&lam).unwrap();
        let nf = n as f64;
        assert!(s > 1.0 / (nf * nf) && s < 1.0 / nf, "s = {s}");
    }

    #[test]
    fn strength_nonincreasing_in_rician_k() {
        let n = 8;
        let stream = RandomStream::new(4, "s-k");
        let s: Vec<f64> = [0.0, 1.0, 3.0, 10.0, 30.0]
            .iter()
            .map(|&k| {
                let lam = estimate_mean_sq_singular_values(n, &FadingSpec::rician(k, 1.0), 2000, &stream);
                structural_scattering_strength(&lam).unwrap()
            })
            .collect();
        for w in s.windows(2) {
            assert!(w[1] <= w[0], "{s:?}");
        }
    }

    proptest! {
        #[test]
        fn consistency_triple(n_i in 1usize..512, l in 1usize..8, n_t in 1usize..5, n_r in 1usize..5) {
            let inp = ScalingInputs::new(n_i, l, n_t, n_r, 1.3).unwrap();
            let ratio = expected_gain_suboptimal_los(&inp).unwrap() / expected_gain_physics_los(&inp).unwrap();
            prop_assert!((ratio - normalized_gain_los(n_i, l)).abs() <= 1e-12 * ratio);
        }

        #[test]
        fn metric_ranges(n_i in 1usize..100_000, l in 0usize..10) {
            let rho = normalized_gain_los(n_i, l);
            prop_assert!(rho > 0.0 && rho <= 1.0);
            prop_assert!(relative_difference_los(n_i, l).unwrap() >= -1.0);
        }
    }
}
