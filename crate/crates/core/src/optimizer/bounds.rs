//! Spectral-norm upper bounds on the optimized channel gain.

use crate::error::{Error, Result};
use crate::optimizer::spectral_norm;
use crate::scattering::CascadeChannels;

/// Largest cascade for which the physics bound is evaluated (`2^L` terms).
pub const DEFAULT_MAX_BOUND_L: usize = 16;

/// `norms[lo][hi] = ‖C_hi ⋯ C_lo‖` for `0 ≤ lo ≤ hi ≤ L`.
fn segment_norms(ch: &CascadeChannels) -> Vec<Vec<f64>> {
    let l = ch.l();
    let mut norms = vec![vec![0.0; l + 1]; l + 1];
    for lo in 0..=l {
        let mut p = ch.hop(lo).clone();
        norms[lo][lo] = spectral_norm(&p);
        for hi in lo + 1..=l {
            p = ch.hop(hi) * p;
            norms[lo][hi] = spectral_norm(&p);
        }
    }
    norms
}

pub fn upper_bound_physics(ch: &CascadeChannels) -> Result<f64> {
    upper_bound_physics_capped(ch, DEFAULT_MAX_BOUND_L)
}

/// `(Σ_b ∏ ‖segment‖)²` over all `2^L` subsets of RISs whose `Θ_ℓ` is kept:
/// the channel splits at every kept RIS and each segment between kept RISs
/// is a plain channel product. The subset sum is accumulated by a recursion
/// on the start of the current segment, which visits every subset once.
pub fn upper_bound_physics_capped(ch: &CascadeChannels, max_l: usize) -> Result<f64> {
    let l = ch.l();
    if l > max_l {
        return Err(Error::CascadeTooLong { l, cap: max_l });
    }
    let norms = segment_norms(ch);
    // tail[s]: summed term bounds for hops s..=L given a split right before hop s
    let mut tail = vec![0.0; l + 1];
    for s in (0..=l).rev() {
        let mut t = norms[s][l];
        for split in s + 1..=l {
            t += norms[s][split - 1] * tail[split];
        }
        tail[s] = t;
    }
    Ok(tail[0].powi(2))
}

pub fn upper_bound_widely(ch: &CascadeChannels) -> f64 {
    (0..=ch.l()).map(|k| spectral_norm(ch.hop(k)).powi(2)).product()
}
