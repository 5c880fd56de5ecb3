//! Dominant singular pair and channel gain.
//!
//! The pair comes from the smaller Gram matrix by repeated squaring: the
//! normalized powers `G^(2^k)` collapse onto the dominant eigenspace, so
//! even nearly degenerate spectra converge in a few dozen steps. A short
//! plain power refinement on `G` then polishes the vector.

use crate::linalg::{self, CMat, CVec, C64};

const TOL: f64 = 1e-10;
const MAX_SQUARINGS: usize = 64;
const MAX_REFINEMENTS: usize = 200;

#[derive(Debug, Clone)]
pub struct SingularPair {
    pub sigma: f64,
    /// Unit left singular vector.
    pub u: CVec,
    /// Unit right singular vector; its largest-magnitude entry is real positive.
    pub v: CVec,
}

fn start_vector(n: usize) -> CVec {
    CVec::from_fn(n, |i, _| {
        let e = if i == 0 { 1.0 } else { 0.0 };
        let k = (i + 1) as f64;
        C64::new(e + 1e-3 * k, 5e-4 * k)
    })
}

fn normalize(x: CVec) -> Option<CVec> {
    let n = x.norm();
    (n > 0.0 && n.is_finite()).then(|| x / C64::from(n))
}

fn rayleigh(g: &CMat, x: &CVec) -> f64 {
    (x.adjoint() * g * x)[(0, 0)].re
}

/// Dominant eigenpair of a Hermitian positive semidefinite matrix.
fn dominant_eigenpair(g: &CMat) -> (f64, CVec) {
    let n = g.nrows();
    let x0 = normalize(start_vector(n)).unwrap();
    let scale = linalg::frobenius(g);
    if scale == 0.0 || !scale.is_finite() {
        return (0.0, x0);
    }
    if n == 1 {
        return (g[(0, 0)].re, x0);
    }
    let mut p = g / C64::from(scale);
    for _ in 0..MAX_SQUARINGS {
        let q = &p * &p;
        let qn = linalg::frobenius(&q);
        if qn == 0.0 {
            break;
        }
        let q = q / C64::from(qn);
        let delta = linalg::frobenius(&(&q - &p));
        p = q;
        if delta < TOL {
            break;
        }
    }
    let mut x = match normalize(&p * &x0) {
        Some(x) if (&p * &x0).norm() > 1e-8 => x,
        _ => {
            let j = (0..n)
                .max_by(|&a, &b| p.column(a).norm().total_cmp(&p.column(b).norm()))
                .unwrap();
            normalize(p.column(j).into_owned()).unwrap_or(x0)
        }
    };
    let mut lambda = rayleigh(g, &x);
    for _ in 0..MAX_REFINEMENTS {
        let Some(next) = normalize(g * &x) else { break };
        let l = rayleigh(g, &next);
        x = next;
        let done = (l - lambda).abs() <= TOL * l.abs();
        lambda = l;
        if done {
            break;
        }
    }
    (lambda.max(0.0), x)
}

pub fn dominant_singular_pair(h: &CMat) -> SingularPair {
    let (m, n) = h.shape();
    let (sigma, mut u, mut v) = if n <= m {
        let (lambda, v) = dominant_eigenpair(&(h.adjoint() * h));
        let sigma = lambda.sqrt();
        let u = normalize(h * &v).unwrap_or_else(|| normalize(start_vector(m)).unwrap());
        (sigma, u, v)
    } else {
        let (lambda, u) = dominant_eigenpair(&(h * h.adjoint()));
        let sigma = lambda.sqrt();
        let v = normalize(h.adjoint() * &u).unwrap_or_else(|| normalize(start_vector(n)).unwrap());
        (sigma, u, v)
    };
    let k = linalg::argmax_modulus(&v);
    let phase = C64::from_polar(1.0, -linalg::arg0(v[k]));
    v *= phase;
    u *= phase;
    v[k] = C64::new(v[k].norm(), 0.0);
    SingularPair { sigma, u, v }
}

/// Squared spectral norm `‖H‖²`.
pub fn channel_gain(h: &CMat) -> f64 {
    let (m, n) = h.shape();
    if m == 0 || n == 0 {
        return 0.0;
    }
    if m == 1 || n == 1 {
        return h.iter().map(|z| z.norm_sqr()).sum();
    }
    if m == 2 || n == 2 {
        let g = if n == 2 { h.adjoint() * h } else { h * h.adjoint() };
        let (a, c, b) = (g[(0, 0)].re, g[(1, 1)].re, g[(0, 1)].norm());
        let half = 0.5 * (a - c);
        return 0.5 * (a + c) + half.hypot(b);
    }
    dominant_singular_pair(h).sigma.powi(2)
}

pub fn spectral_norm(h: &CMat) -> f64 {
    channel_gain(h).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::synth::gaussian_matrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn svd_max(h: &CMat) -> f64 {
        h.singular_values().max()
    }

    #[test]
    fn rank_one_gain() {
        let a = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
        let b = CVec::from_vec(vec![c(0.6, 0.8), c(1.0, 0.0)]);
        let h = &a * b.transpose() * c(3.0, 0.0);
        assert!((channel_gain(&h) - 9.0 * 3.0 * 2.0).abs() < 1e-12);
        assert!((dominant_singular_pair(&h).sigma.powi(2) - 54.0).abs() < 1e-10);
    }

    #[test]
    fn identity_gain_is_one() {
        for n in 1..6 {
            assert!((channel_gain(&linalg::identity(n)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix() {
        let p = dominant_singular_pair(&linalg::zeros(3, 2));
        assert_eq!(p.sigma, 0.0);
        assert!((p.u.norm() - 1.0).abs() < 1e-14 && (p.v.norm() - 1.0).abs() < 1e-14);
        assert_eq!(channel_gain(&linalg::zeros(4, 4)), 0.0);
    }

    #[test]
    fn matches_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (m, n) in [(2, 2), (3, 7), (8, 5), (16, 16), (2, 64), (64, 2), (40, 40)] {
            for _ in 0..10 {
                let h = gaussian_matrix(&mut rng, m, n, 1.0);
                let s = svd_max(&h);
                let p = dominant_singular_pair(&h);
                assert!((p.sigma - s).abs() <= 1e-10 * s, "{m}x{n}: {} vs {s}", p.sigma);
                assert!((channel_gain(&h) - s * s).abs() <= 1e-10 * s * s);
                let uhv = (p.u.adjoint() * &h * &p.v)[(0, 0)];
                assert!((uhv - c(s, 0.0)).norm() <= 1e-9 * s);
            }
        }
    }

    #[test]
    fn near_degenerate_spectrum() {
        let d = CVec::from_vec(vec![c(1.0, 0.0), c(1.0 - 1e-7, 0.0), c(0.5, 0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = gaussian_matrix(&mut rng, 3, 3, 1.0).qr().q();
        let h = &q * CMat::from_diagonal(&d) * q.adjoint();
        assert!((channel_gain(&h) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phase_convention_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = gaussian_matrix(&mut rng, 4, 3, 1.0);
        let p = dominant_singular_pair(&h);
        let k = linalg::argmax_modulus(&p.v);
        assert!(p.v[k].im == 0.0 && p.v[k].re > 0.0);
        let q = dominant_singular_pair(&(h * C64::from_polar(1.0, 1.1)));
        assert!((&p.v - &q.v).norm() < 1e-8);
    }

    proptest! {
        #[test]
        fn gain_agrees_with_svd(seed: u64, m in 1usize..7, n in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = gaussian_matrix(&mut rng, m, n, 1.0);
            let s = svd_max(&h);
            prop_assert!((channel_gain(&h) - s * s).abs() <= 1e-10 * s * s);
            let p = dominant_singular_pair(&h);
            prop_assert!((p.u.norm() - 1.0).abs() < 1e-12);
            prop_assert!((p.v.norm() - 1.0).abs() < 1e-12);
        }
    }
}
