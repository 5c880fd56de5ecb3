//! Statistical synthesis of impedance matrices for model cross-checks.
//!
//! Blocks are complex Gaussian with magnitudes on the order of the reference
//! impedance; asserted assumptions zero (or match) the corresponding blocks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, CMat, C64};
use crate::multiport::{Assumptions, Dimensions, MultiportNetwork, RisLoadStack, ZBlocks};

const COUPLING_SCALE: f64 = 0.3;

/// Complex Gaussian matrix with per-entry standard deviation `scale`.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> CMat {
    let s = scale / std::f64::consts::SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * s, im * s)
    })
}

/// Random diagonal/subdiagonal blocks of a well-conditioned block bidiagonal matrix.
pub fn random_bidiagonal<R: Rng + ?Sized>(rng: &mut R, l: usize, n: usize) -> (Vec<CMat>, Vec<CMat>) {
    let shift = C64::new(2.0 * (n as f64).sqrt(), 0.0);
    let diagonal = (0..l)
        .map(|_| gaussian_matrix(rng, n, n, 1.0) + linalg::identity(n) * shift)
        .collect();
    let sub = (1..l).map(|_| gaussian_matrix(rng, n, n, 1.0)).collect();
    (diagonal, sub)
}

/// Draws a network satisfying exactly the asserted `assumptions`.
pub fn random_network<R: Rng + ?Sized>(
    rng: &mut R,
    dims: Dimensions,
    z0: f64,
    assumptions: Assumptions,
) -> MultiportNetwork {
    let (t, r, n, l) = (dims.n_t, dims.n_r, dims.n_i, dims.l);
    let z0c = C64::from(z0);
    let coupling = COUPLING_SCALE * z0;
    let mut b = ZBlocks::zeros(&dims);

    let endpoint = |rng: &mut R, k: usize| {
        let mut m = linalg::identity(k) * z0c;
        if !assumptions.matched_endpoints {
            m += gaussian_matrix(rng, k, k, 0.2 * z0);
        }
        m
    };
    b.tt = endpoint(rng, t);
    b.rr = endpoint(rng, r);

    for i in 0..l {
        for j in 0..l {
            let block = if i == j {
                let mut m = linalg::identity(n) * z0c;
                if !assumptions.matched_ris {
                    m += gaussian_matrix(rng, n, n, 0.2 * z0);
                }
                m
            } else if i == j + 1 {
                gaussian_matrix(rng, n, n, coupling)
            } else if j > i {
                if assumptions.unilateral_ris {
                    continue;
                }
                gaussian_matrix(rng, n, n, 0.1 * coupling)
            } else {
                if assumptions.cascade_obstruction {
                    continue;
                }
                gaussian_matrix(rng, n, n, 0.3 * coupling)
            };
            b.ii.view_mut((i * n, j * n), (n, n)).copy_from(&block);
        }
    }

    for k in 0..l {
        if !(assumptions.pure_cascade && k > 0) {
            b.it.view_mut((k * n, 0), (n, t)).copy_from(&gaussian_matrix(rng, n, t, coupling));
        }
        if !(assumptions.pure_cascade && k + 1 < l) {
            b.ri.view_mut((0, k * n), (r, n)).copy_from(&gaussian_matrix(rng, r, n, coupling));
        }
    }
    if !assumptions.pure_cascade {
        b.rt = gaussian_matrix(rng, r, t, coupling);
    }
    if !assumptions.unilateral_endpoints {
        b.ti = gaussian_matrix(rng, t, l * n, 0.1 * coupling);
        b.tr = gaussian_matrix(rng, t, r, 0.1 * coupling);
        b.ir = gaussian_matrix(rng, l * n, r, 0.1 * coupling);
    }
    MultiportNetwork::new(dims, z0, b, assumptions).expect("synthesized network satisfies its assumptions")
}

/// Purely reactive symmetric loads; `diagonal` restricts them to single-port loads.
pub fn random_lossless_loads<R: Rng + ?Sized>(rng: &mut R, dims: &Dimensions, z0: f64, diagonal: bool) -> RisLoadStack {
    let n = dims.n_i;
    let loads = (0..dims.l)
        .map(|_| {
            let mut x = CMat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    if diagonal && i != j {
                        continue;
                    }
                    let v: f64 = StandardNormal.sample(rng);
                    x[(i, j)] = C64::new(0.0, v * z0);
                    x[(j, i)] = x[(i, j)];
                }
            }
            x
        })
        .collect();
    RisLoadStack::new(n, loads).expect("load shapes match dims")
}
