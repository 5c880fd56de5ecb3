//! Seeded random channel realizations.
//!
//! Every draw comes from a [`RandomStream`]: a master seed plus a
//! hierarchical label such as `fading-gain/n_i=32/trial=7/link2`. The label
//! selects an independent ChaCha stream, so a trial's channels do not depend
//! on which other trials ran or in what order.

use std::f64::consts::TAU;
use std::fmt::Display;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};
use crate::multiport::Dimensions;
use crate::scattering::CascadeChannels;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
    label: String,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl RandomStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        Self {
            seed,
            label: label.into(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn child(&self, part: impl Display) -> Self {
        let label = if self.label.is_empty() {
            part.to_string()
        } else {
            format!("{}/{}", self.label, part)
        };
        Self { seed: self.seed, label }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a(self.label.as_bytes()));
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingKind {
    Los,
    Rayleigh,
    Rician,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSpec {
    pub kind: FadingKind,
    #[serde(default)]
    pub rician_k: f64,
    #[serde(default = "unit_gain")]
    pub path_gain: f64,
}

fn unit_gain() -> f64 {
    1.0
}

impl FadingSpec {
    pub fn los(path_gain: f64) -> Self {
        Self {
            kind: FadingKind::Los,
            rician_k: 0.0,
            path_gain,
        }
    }

    pub fn rayleigh(path_gain: f64) -> Self {
        Self {
            kind: FadingKind::Rayleigh,
            rician_k: 0.0,
            path_gain,
        }
    }

    pub fn rician(k: f64, path_gain: f64) -> Self {
        Self {
            kind: FadingKind::Rician,
            rician_k: k,
            path_gain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.path_gain.is_finite() && self.path_gain >= 0.0) {
            return Err(Error::InvalidInput(format!("path gain {} must be finite and nonnegative", self.path_gain)));
        }
        if self.kind == FadingKind::Rician && !(self.rician_k.is_finite() && self.rician_k >= 0.0) {
            return Err(Error::InvalidInput(format!("Rician factor {} must be finite and nonnegative", self.rician_k)));
        }
        Ok(())
    }
}

/// Rank-one line-of-sight link `Λ·a bᵀ` with unit-modulus steering vectors;
/// `a` spans the rows and `b` the columns of the realized matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LosLink {
    pub path_gain: f64,
    pub a: CVec,
    pub b: CVec,
}

fn random_phasors(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| C64::from_polar(1.0, rng.random::<f64>() * TAU))
}

impl LosLink {
    pub fn draw(rows: usize, cols: usize, path_gain: f64, stream: &RandomStream) -> Self {
        let mut rng = stream.rng();
        let a = random_phasors(&mut rng, rows);
        let b = random_phasors(&mut rng, cols);
        Self { path_gain, a, b }
    }

    pub fn matrix(&self) -> CMat {
        &self.a * self.b.transpose() * C64::from(self.path_gain)
    }
}

pub fn gen_los_link(rows: usize, cols: usize, path_gain: f64, stream: &RandomStream) -> CMat {
    LosLink::draw(rows, cols, path_gain, stream).matrix()
}

/// I.i.d. circularly symmetric complex Gaussian entries of variance `Λ²`.
pub fn gen_rayleigh_link(rows: usize, cols: usize, path_gain: f64, stream: &RandomStream) -> CMat {
    let mut rng = stream.rng();
    let s = path_gain / std::f64::consts::SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re * s, im * s)
    })
}

/// `Λ(√(K/(K+1))·H_los + √(1/(K+1))·H_nlos)`. The two components come from
/// child streams that do not depend on `K`, so sweeping `K` on one stream
/// reuses the same underlying draws.
pub fn gen_rician_link(rows: usize, cols: usize, spec: &FadingSpec, stream: &RandomStream) -> CMat {
    let k = spec.rician_k;
    let los = gen_los_link(rows, cols, 1.0, &stream.child("los"));
    let nlos = gen_rayleigh_link(rows, cols, 1.0, &stream.child("nlos"));
    let w_los = (k / (k + 1.0)).sqrt();
    let w_nlos = (1.0 / (k + 1.0)).sqrt();
    (los * C64::from(w_los) + nlos * C64::from(w_nlos)) * C64::from(spec.path_gain)
}

pub fn gen_link(rows: usize, cols: usize, spec: &FadingSpec, stream: &RandomStream) -> CMat {
    match spec.kind {
        FadingKind::Los => gen_los_link(rows, cols, spec.path_gain, stream),
        FadingKind::Rayleigh => gen_rayleigh_link(rows, cols, spec.path_gain, stream),
        FadingKind::Rician => gen_rician_link(rows, cols, spec, stream),
    }
}

/// Draws a pure cascade. `links` holds one spec shared by every hop or one
/// per hop in the order `H_IT,1, H_{2,1}, …, H_RI,L`. Hop `k` uses the child
/// stream `link{k}`.
pub fn gen_cascade(dims: &Dimensions, links: &[FadingSpec], stream: &RandomStream) -> Result<CascadeChannels> {
    dims.validate()?;
    let l = dims.l;
    if links.len() != 1 && links.len() != l + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} fading specs for {} hops",
            links.len(),
            l + 1
        )));
    }
    for s in links {
        s.validate()?;
    }
    let spec = |k: usize| &links[if links.len() == 1 { 0 } else { k }];
    let draw = |k: usize, rows, cols| gen_link(rows, cols, spec(k), &stream.child(format_args!("link{k}")));
    let h_it_1 = draw(0, dims.n_i, dims.n_t);
    let inter = (1..l).map(|k| draw(k, dims.n_i, dims.n_i)).collect();
    let h_ri_l = draw(l, dims.n_r, dims.n_i);
    CascadeChannels::pure(h_it_1, inter, h_ri_l)
}
