//! Closed-form optimal phases for rank-one (line-of-sight) cascades.
//!
//! With `C_k = a_k b_kᵀ`, the pure cascade collapses to
//! `H = a_L (∏_ℓ K_ℓ) b_0ᵀ` where `K_ℓ = b_ℓᵀ F_ℓ a_{ℓ−1}`, so every RIS can
//! be optimized on its own scalar.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};
use crate::scattering::{CascadeChannels, ScatteringStack};

const RANK_ONE_TOL: f64 = 1e-9;

/// `h = a bᵀ`.
#[derive(Debug, Clone)]
pub struct RankOne {
    pub a: CVec,
    pub b: CVec,
}

pub fn rank_one_factor(h: &CMat, link: &str) -> Result<RankOne> {
    let total = linalg::frobenius(h);
    if total == 0.0 {
        return Ok(RankOne {
            a: CVec::zeros(h.nrows()),
            b: CVec::zeros(h.ncols()),
        });
    }
    let j = (0..h.ncols())
        .max_by(|&x, &y| h.column(x).norm().total_cmp(&h.column(y).norm()))
        .unwrap();
    let a: CVec = h.column(j).into_owned();
    let i = linalg::argmax_modulus(&a);
    let b: CVec = h.row(i).transpose() / a[i];
    let residual = linalg::frobenius(&(h - &a * b.transpose())) / total;
    if residual > RANK_ONE_TOL {
        return Err(Error::NotRankOne {
            link: link.to_string(),
            residual,
        });
    }
    Ok(RankOne { a, b })
}

fn hop_name(k: usize, l: usize) -> String {
    if k == 0 {
        "H_IT,1".into()
    } else if k == l {
        format!("H_RI,{l}")
    } else {
        format!("H_{{{},{}}}", k + 1, k)
    }
}

fn factors(ch: &CascadeChannels) -> Result<Vec<RankOne>> {
    let l = ch.l();
    (0..=l).map(|k| rank_one_factor(ch.hop(k), &hop_name(k, l))).collect()
}

fn per_ris_phases(ch: &CascadeChannels, rule: impl Fn(&CVec, &CVec) -> Vec<f64>) -> Result<ScatteringStack> {
    let f = factors(ch)?;
    let phases: Vec<Vec<f64>> = (1..=ch.l()).map(|ell| rule(&f[ell].b, &f[ell - 1].a)).collect();
    Ok(ScatteringStack::from_phases(&phases))
}

/// Makes `b_ℓᵀ Θ_ℓ a_{ℓ−1}` antiparallel to `b_ℓᵀ a_{ℓ−1}`, so that
/// `|K_ℓ| = |b_ℓᵀ a_{ℓ−1}| + Σ|b_n||a_n|`.
pub fn los_optimal_phases_physics(ch: &CascadeChannels) -> Result<ScatteringStack> {
    per_ris_phases(ch, |b, a| {
        let cross: C64 = b.dot(a);
        let base = PI + linalg::arg0(cross);
        b.iter()
            .zip(a.iter())
            .map(|(bn, an)| base - linalg::arg0(*bn) - linalg::arg0(*an))
            .collect()
    })
}

/// Co-phases every term of `b_ℓᵀ Θ_ℓ a_{ℓ−1}`.
pub fn los_optimal_phases_widely(ch: &CascadeChannels) -> Result<ScatteringStack> {
    per_ris_phases(ch, |b, a| {
        b.iter()
            .zip(a.iter())
            .map(|(bn, an)| -linalg::arg0(*bn) - linalg::arg0(*an))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_gen::{LosLink, RandomStream};
    use crate::linalg::c;
    use crate::optimizer::channel_gain;
    use crate::scattering::{assemble_physics_channel, assemble_widely_used};

    struct Draw {
        links: Vec<LosLink>,
        ch: CascadeChannels,
    }

    fn draw(n_t: usize, n_r: usize, n_i: usize, l: usize, stream: &RandomStream) -> Draw {
        let mut links = vec![LosLink::draw(n_i, n_t, 1.0, &stream.child(0))];
        for k in 1..l {
            links.push(LosLink::draw(n_i, n_i, 1.0, &stream.child(k)));
        }
        links.push(LosLink::draw(n_r, n_i, 1.0, &stream.child(l)));
        let m: Vec<CMat> = links.iter().map(LosLink::matrix).collect();
        let ch = CascadeChannels::pure(m[0].clone(), m[1..l].to_vec(), m[l].clone()).unwrap();
        Draw { links, ch }
    }

    #[test]
    fn all_ones_gives_pi_phases() {
        let one = CMat::from_element(1, 1, c(1.0, 0.0));
        let ch = CascadeChannels::pure(one.clone(), vec![one.clone()], one).unwrap();
        let stack = los_optimal_phases_physics(&ch).unwrap();
        for t in stack.thetas() {
            assert!((t[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);
        }
        assert!((channel_gain(&assemble_physics_channel(&ch, &stack).unwrap()) - 16.0).abs() < 1e-12);

        let ones4 = CMat::from_element(4, 4, c(1.0, 0.0));
        let ch = CascadeChannels::pure(ones4.clone(), vec![], CMat::from_element(1, 4, c(1.0, 0.0))).unwrap();
        let stack = los_optimal_phases_physics(&ch).unwrap();
        // |K| = 2 N_I
        let h = assemble_physics_channel(&ch, &stack).unwrap();
        assert!((channel_gain(&h) - 64.0 * 4.0).abs() < 1e-9);
    }

    #[test]
    fn physics_gain_matches_inner_product_formula() {
        let base = RandomStream::new(5, "los-physics");
        for t in 0..100 {
            let l = 1 + t % 4;
            let d = draw(2, 3, 8, l, &base.child(t));
            let n_i = 8.0;
            let expected: f64 = (1..=l)
                .map(|ell| (d.links[ell].b.dot(&d.links[ell - 1].a).norm() + n_i).powi(2))
                .product::<f64>()
                * 3.0
                * 2.0;
            let stack = los_optimal_phases_physics(&d.ch).unwrap();
            let gain = channel_gain(&assemble_physics_channel(&d.ch, &stack).unwrap());
            assert!((gain - expected).abs() <= 1e-9 * expected, "{gain} vs {expected}");
        }
    }

    #[test]
    fn widely_gain_is_deterministic() {
        let base = RandomStream::new(6, "los-widely");
        for t in 0..50 {
            let l = 1 + t % 4;
            let d = draw(2, 2, 16, l, &base.child(t));
            let stack = los_optimal_phases_widely(&d.ch).unwrap();
            let gain = channel_gain(&assemble_widely_used(&d.ch, &stack).unwrap());
            let expected = 16f64.powi(2 * l as i32) * 4.0;
            assert!((gain - expected).abs() <= 1e-9 * expected);
        }
        let one = CMat::from_element(1, 1, c(0.6, 0.8));
        let ch = CascadeChannels::pure(one.clone(), vec![one.clone()], one).unwrap();
        let s = los_optimal_phases_widely(&ch).unwrap();
        assert!((channel_gain(&assemble_widely_used(&ch, &s).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_rank_two_links() {
        let h = linalg::identity(3);
        let ch = CascadeChannels::pure(h.clone(), vec![], CMat::from_element(1, 3, c(1.0, 0.0))).unwrap();
        match los_optimal_phases_physics(&ch) {
            Err(Error::NotRankOne { link, .. }) => assert_eq!(link, "H_IT,1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_search_never_beats_closed_form() {
        let base = RandomStream::new(8, "los-grid");
        let levels = 64;
        for t in 0..3 {
            let d = draw(2, 2, 2, 2, &base.child(t));
            let closed = channel_gain(&assemble_physics_channel(&d.ch, &los_optimal_phases_physics(&d.ch).unwrap()).unwrap());
            // RISs decouple under LoS, so the 64^4 grid factorizes into two 64^2 grids.
            let mut best = 1.0;
            for ell in 1..=2 {
                let (b, a) = (&d.links[ell].b, &d.links[ell - 1].a);
                let cross = b.dot(a);
                let mut m: f64 = 0.0;
                for i in 0..levels {
                    for j in 0..levels {
                        let p = [i, j].map(|k| C64::from_polar(1.0, k as f64 * std::f64::consts::TAU / levels as f64));
                        let k = b[0] * p[0] * a[0] + b[1] * p[1] * a[1] - cross;
                        m = m.max(k.norm_sqr());
                    }
                }
                best *= m;
            }
            best *= 4.0;
            assert!(best <= closed * (1.0 + 1e-12));
            assert!(closed - best <= 0.02 * closed);
        }
    }
}
