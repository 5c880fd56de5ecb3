//! Impedance-parameter description of a multi-RIS aided MIMO link.
//!
//! The link is an `N`-port network with `N = n_t + l·n_i + n_r` ports. Its
//! impedance matrix is stored as nine partitions (transmitter `T`, RIS ports
//! `I`, receiver `R`). The channel formulas below are valid only under the
//! modeling assumptions they name; those assumptions travel with the network as
//! explicit flags and are checked against the actual blocks at construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, matrix_json, matrix_vec_json, CMat, C64};
use crate::scattering::{CascadeChannels, ScatteringStack, SideLinks};

/// Default reference impedance in ohms.
pub const DEFAULT_Z0: f64 = 50.0;

/// Relative tolerance used when checking that an asserted-zero block is zero.
const ASSUMPTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimensions {
    pub n_t: usize,
    pub n_r: usize,
    pub n_i: usize,
    pub l: usize,
}

impl Dimensions {
    pub fn new(n_t: usize, n_r: usize, n_i: usize, l: usize) -> Result<Self> {
        let d = Self { n_t, n_r, n_i, l };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_r == 0 || self.n_i == 0 || self.l == 0 {
            return Err(Error::InvalidInput(format!(
                "all port counts must be positive, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn total_ports(&self) -> usize {
        self.n_t + self.l * self.n_i + self.n_r
    }

    /// Row/column count of the stacked RIS partition.
    pub fn ris_ports(&self) -> usize {
        self.l * self.n_i
    }
}

/// Modeling assumptions asserted for a network.
///
/// 1. unilateral endpoints: `Z_TI = Z_TR = Z_IR = 0`
/// 2. unilateral RIS chain: supradiagonal blocks of `Z_II` vanish
/// 3. cascade obstruction: `Z_{i,j} = 0` for `i − j ≥ 2`
/// 4. matched endpoints: `Z_TT = Z_RR = Z_0 I`
/// 5. matched RISs: `Z_{II,ℓ} = Z_0 I`
/// 6. pure cascade: only `Z_IT,1`, `Z_RI,L` and the inter-RIS hops survive
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assumptions {
    pub unilateral_endpoints: bool,
    pub unilateral_ris: bool,
    pub cascade_obstruction: bool,
    pub matched_endpoints: bool,
    pub matched_ris: bool,
    pub pure_cascade: bool,
}

impl Assumptions {
    pub fn none() -> Self {
        Self::default()
    }

    /// Assumptions 1 through `n` (inclusive).
    pub fn through(n: u8) -> Self {
        Self {
            unilateral_endpoints: n >= 1,
            unilateral_ris: n >= 2,
            cascade_obstruction: n >= 3,
            matched_endpoints: n >= 4,
            matched_ris: n >= 5,
            pure_cascade: n >= 6,
        }
    }

    fn asserted(&self, n: u8) -> bool {
        match n {
            1 => self.unilateral_endpoints,
            2 => self.unilateral_ris,
            3 => self.cascade_obstruction,
            4 => self.matched_endpoints,
            5 => self.matched_ris,
            6 => self.pure_cascade,
            _ => false,
        }
    }
}

/// The nine partitions of the network impedance matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZBlocks {
    #[serde(with = "matrix_json")]
    pub tt: CMat,
    #[serde(with = "matrix_json")]
    pub ti: CMat,
    #[serde(with = "matrix_json")]
    pub tr: CMat,
    #[serde(with = "matrix_json")]
    pub it: CMat,
    #[serde(with = "matrix_json")]
    pub ii: CMat,
    #[serde(with = "matrix_json")]
    pub ir: CMat,
    #[serde(with = "matrix_json")]
    pub rt: CMat,
    #[serde(with = "matrix_json")]
    pub ri: CMat,
    #[serde(with = "matrix_json")]
    pub rr: CMat,
}

impl ZBlocks {
    /// All-zero partitions sized for `dims`.
    pub fn zeros(dims: &Dimensions) -> Self {
        let (t, r, i) = (dims.n_t, dims.n_r, dims.ris_ports());
        Self {
            tt: linalg::zeros(t, t),
            ti: linalg::zeros(t, i),
            tr: linalg::zeros(t, r),
            it: linalg::zeros(i, t),
            ii: linalg::zeros(i, i),
            ir: linalg::zeros(i, r),
            rt: linalg::zeros(r, t),
            ri: linalg::zeros(r, i),
            rr: linalg::zeros(r, r),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiportNetwork {
    dims: Dimensions,
    z0: f64,
    assumptions: Assumptions,
    blocks: ZBlocks,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    dims: Dimensions,
    z0: f64,
    assumptions: Assumptions,
    blocks: ZBlocks,
}

impl MultiportNetwork {
    /// Validates partition shapes and every asserted assumption.
    pub fn new(dims: Dimensions, z0: f64, blocks: ZBlocks, assumptions: Assumptions) -> Result<Self> {
        dims.validate()?;
        if !(z0.is_finite() && z0 > 0.0) {
            return Err(Error::InvalidInput(format!("reference impedance must be positive, got {z0}")));
        }
        let (t, r, i) = (dims.n_t, dims.n_r, dims.ris_ports());
        let b = &blocks;
        linalg::ensure_shape(&b.tt, t, t, "Z_TT")?;
        linalg::ensure_shape(&b.ti, t, i, "Z_TI")?;
        linalg::ensure_shape(&b.tr, t, r, "Z_TR")?;
        linalg::ensure_shape(&b.it, i, t, "Z_IT")?;
        linalg::ensure_shape(&b.ii, i, i, "Z_II")?;
        linalg::ensure_shape(&b.ir, i, r, "Z_IR")?;
        linalg::ensure_shape(&b.rt, r, t, "Z_RT")?;
        linalg::ensure_shape(&b.ri, r, i, "Z_RI")?;
        linalg::ensure_shape(&b.rr, r, r, "Z_RR")?;
        let net = Self {
            dims,
            z0,
            assumptions,
            blocks,
        };
        for n in 1..=6 {
            if assumptions.asserted(n) {
                net.check_assumption(n)?;
            }
        }
        Ok(net)
    }

    /// Parses the JSON dump produced by `serde_json::to_string(&net)`.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawNetwork = serde_json::from_str(s)?;
        Self::new(raw.dims, raw.z0, raw.blocks, raw.assumptions)
    }

    pub fn dims(&self) -> &Dimensions {
        &self.dims
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn assumptions(&self) -> &Assumptions {
        &self.assumptions
    }

    pub fn blocks(&self) -> &ZBlocks {
        &self.blocks
    }

    /// `Z_{i,j}` (1-based RIS indices), the block of `Z_II` from RIS `j` to RIS `i`.
    pub fn z_ii_block(&self, i: usize, j: usize) -> CMat {
        let n = self.dims.n_i;
        self.blocks.ii.view(((i - 1) * n, (j - 1) * n), (n, n)).into_owned()
    }

    /// `Z_{IT,ℓ}` (1-based).
    pub fn z_it_block(&self, l: usize) -> CMat {
        let n = self.dims.n_i;
        self.blocks.it.view(((l - 1) * n, 0), (n, self.dims.n_t)).into_owned()
    }

    /// `Z_{RI,ℓ}` (1-based).
    pub fn z_ri_block(&self, l: usize) -> CMat {
        let n = self.dims.n_i;
        self.blocks.ri.view((0, (l - 1) * n), (self.dims.n_r, n)).into_owned()
    }

    fn zero_tol(&self) -> f64 {
        let scale = [
            &self.blocks.tt,
            &self.blocks.it,
            &self.blocks.ii,
            &self.blocks.rt,
            &self.blocks.ri,
            &self.blocks.rr,
        ]
        .iter()
        .flat_map(|m| m.iter())
        .map(|z| z.norm())
        .fold(self.z0, f64::max);
        ASSUMPTION_TOL * scale
    }

    fn check_assumption(&self, n: u8) -> Result<()> {
        let tol = self.zero_tol();
        let b = &self.blocks;
        let l = self.dims.l;
        let violated = |what: String| Err(Error::AssumptionViolated(what));
        match n {
            1 => {
                for (m, name) in [(&b.ti, "Z_TI"), (&b.tr, "Z_TR"), (&b.ir, "Z_IR")] {
                    if !linalg::is_zero(m, tol) {
                        return violated(format!("assumption 1: feedback block {name} is nonzero"));
                    }
                }
            }
            2 => {
                for i in 1..=l {
                    for j in (i + 1)..=l {
                        if !linalg::is_zero(&self.z_ii_block(i, j), tol) {
                            return violated(format!("assumption 2: Z_{{{i},{j}}} above the diagonal is nonzero"));
                        }
                    }
                }
            }
            3 => {
                for i in 1..=l {
                    for j in 1..=l {
                        if i >= j + 2 && !linalg::is_zero(&self.z_ii_block(i, j), tol) {
                            return violated(format!("assumption 3: non-adjacent Z_{{{i},{j}}} is nonzero"));
                        }
                    }
                }
            }
            4 => {
                let target_t = linalg::identity(self.dims.n_t) * C64::from(self.z0);
                let target_r = linalg::identity(self.dims.n_r) * C64::from(self.z0);
                if !linalg::is_zero(&(&b.tt - target_t), tol) || !linalg::is_zero(&(&b.rr - target_r), tol) {
                    return violated("assumption 4: Z_TT or Z_RR differs from Z_0 I".into());
                }
            }
            5 => {
                let target = linalg::identity(self.dims.n_i) * C64::from(self.z0);
                for k in 1..=l {
                    if !linalg::is_zero(&(self.z_ii_block(k, k) - &target), tol) {
                        return violated(format!("assumption 5: Z_II,{k} differs from Z_0 I"));
                    }
                }
            }
            6 => {
                if !linalg::is_zero(&b.rt, tol) {
                    return violated("assumption 6: direct link Z_RT is nonzero".into());
                }
                for k in 1..l {
                    if !linalg::is_zero(&self.z_ri_block(k), tol) {
                        return violated(format!("assumption 6: Z_RI,{k} is nonzero"));
                    }
                }
                for k in 2..=l {
                    if !linalg::is_zero(&self.z_it_block(k), tol) {
                        return violated(format!("assumption 6: Z_IT,{k} is nonzero"));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Requires assumptions `1..=n` to be asserted and satisfied.
    fn require(&self, n: u8) -> Result<()> {
        for k in 1..=n {
            if !self.assumptions.asserted(k) {
                return Err(Error::AssumptionViolated(format!("assumption {k} is not asserted for this network")));
            }
            self.check_assumption(k)?;
        }
        Ok(())
    }
}

/// Reconfigurable impedance matrices `Z_{I,ℓ}` of the `l` RISs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RisLoadStack {
    #[serde(with = "matrix_vec_json")]
    loads: Vec<CMat>,
}

impl RisLoadStack {
    pub fn new(n_i: usize, loads: Vec<CMat>) -> Result<Self> {
        if loads.is_empty() {
            return Err(Error::DimensionMismatch("load stack is empty".into()));
        }
        for (k, z) in loads.iter().enumerate() {
            linalg::ensure_shape(z, n_i, n_i, &format!("Z_I,{}", k + 1))?;
        }
        Ok(Self { loads })
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    pub fn get(&self, l: usize) -> &CMat {
        &self.loads[l - 1]
    }

    pub fn loads(&self) -> &[CMat] {
        &self.loads
    }

    /// Purely reactive loads (real part zero entrywise, relative to the largest entry).
    pub fn is_lossless(&self, tol: f64) -> bool {
        self.loads.iter().all(|z| {
            let scale = z.iter().map(|x| x.norm()).fold(1.0, f64::max);
            z.iter().all(|x| x.re.abs() <= tol * scale)
        })
    }

    /// Block-diagonal `Z_I = diag(Z_{I,1}, …, Z_{I,L})`.
    pub fn block_diagonal(&self) -> CMat {
        let n = self.loads[0].nrows();
        let mut out = linalg::zeros(n * self.loads.len(), n * self.loads.len());
        for (k, z) in self.loads.iter().enumerate() {
            out.view_mut((k * n, k * n), (n, n)).copy_from(z);
        }
        out
    }

    fn check_against(&self, dims: &Dimensions) -> Result<()> {
        if self.loads.len() != dims.l || self.loads[0].nrows() != dims.n_i {
            return Err(Error::DimensionMismatch(format!(
                "load stack has {} loads of size {}, network expects {} of size {}",
                self.loads.len(),
                self.loads[0].nrows(),
                dims.l,
                dims.n_i
            )));
        }
        Ok(())
    }
}

/// Inverse of a block lower-bidiagonal matrix, block by block.
///
/// `diagonal` holds `D_1..D_L`, `subdiagonal` holds `S_{2,1}..S_{L,L−1}`. The
/// result is indexed `[i][j]` (0-based) with exact zero blocks above the
/// diagonal, `D_i^{-1}` on it and
/// `(−1)^{i−j} D_i^{-1} (S_{i,i−1} D_{i−1}^{-1}) ⋯ (S_{j+1,j} D_j^{-1})` below.
pub fn block_subdiagonal_inverse(diagonal: &[CMat], subdiagonal: &[CMat]) -> Result<Vec<Vec<CMat>>> {
    let l = diagonal.len();
    if l == 0 {
        return Err(Error::DimensionMismatch("no diagonal blocks".into()));
    }
    if subdiagonal.len() != l - 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} diagonal blocks need {} subdiagonal blocks, got {}",
            l,
            l - 1,
            subdiagonal.len()
        )));
    }
    let n = diagonal[0].nrows();
    for (k, d) in diagonal.iter().enumerate() {
        linalg::ensure_shape(d, n, n, &format!("D_{}", k + 1))?;
    }
    for (k, s) in subdiagonal.iter().enumerate() {
        linalg::ensure_shape(s, n, n, &format!("S_{},{}", k + 2, k + 1))?;
    }

    let d_inv = diagonal
        .iter()
        .enumerate()
        .map(|(k, d)| {
            linalg::guarded_inverse(d).map_err(|condition| Error::SingularDiagonalBlock { index: k + 1, condition })
        })
        .collect::<Result<Vec<_>>>()?;
    // S_{k+1,k} D_k^{-1}, indexed by k (0-based).
    let hops: Vec<CMat> = subdiagonal.iter().zip(&d_inv).map(|(s, di)| s * di).collect();

    let mut out = vec![vec![linalg::zeros(n, n); l]; l];
    for i in 0..l {
        out[i][i] = d_inv[i].clone();
        for j in 0..i {
            let mut acc = d_inv[i].clone();
            for k in (j..i).rev() {
                acc *= &hops[k];
            }
            if (i - j) % 2 == 1 {
                acc.neg_mut();
            }
            out[i][j] = acc;
        }
    }
    Ok(out)
}

/// Assembles an `L×L` grid of equally sized square blocks into one matrix.
pub fn assemble_blocks(blocks: &[Vec<CMat>]) -> CMat {
    let l = blocks.len();
    let n = blocks[0][0].nrows();
    let mut out = linalg::zeros(l * n, l * n);
    for (i, row) in blocks.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            out.view_mut((i * n, j * n), (n, n)).copy_from(b);
        }
    }
    out
}

fn endpoint_factors(net: &MultiportNetwork) -> Result<(CMat, CMat)> {
    let z0 = C64::from(net.z0);
    let rx = linalg::identity(net.dims.n_r) * z0 + &net.blocks.rr;
    let rx_inv = linalg::inverse(&rx, "Z_0 I + Z_RR")? * z0;
    let tx_inv = linalg::inverse(&net.blocks.tt, "Z_TT")?;
    Ok((rx_inv, tx_inv))
}

/// General channel under the unilateral endpoint approximation:
/// `H = Z_0 (Z_0 I + Z_RR)^{-1} (Z_RT − Z_RI (Z_I + Z_II)^{-1} Z_IT) Z_TT^{-1}`.
pub fn channel_z_general(net: &MultiportNetwork, loads: &RisLoadStack) -> Result<CMat> {
    net.require(1)?;
    loads.check_against(&net.dims)?;
    let (rx, tx) = endpoint_factors(net)?;
    let y = linalg::inverse(&(loads.block_diagonal() + &net.blocks.ii), "Z_I + Z_II")?;
    let inner = &net.blocks.rt - &net.blocks.ri * y * &net.blocks.it;
    Ok(rx * inner * tx)
}

/// Cascade channel (assumptions 1–3) written as per-RIS terms and multi-hop
/// products, with the block inverse of `Z_I + Z_II` taken block-wise.
pub fn channel_z_cascade(net: &MultiportNetwork, loads: &RisLoadStack) -> Result<CMat> {
    net.require(3)?;
    loads.check_against(&net.dims)?;
    let l = net.dims.l;
    let diagonal: Vec<CMat> = (1..=l).map(|k| loads.get(k) + net.z_ii_block(k, k)).collect();
    let subdiagonal: Vec<CMat> = (1..l).map(|k| net.z_ii_block(k + 1, k)).collect();
    let y = block_subdiagonal_inverse(&diagonal, &subdiagonal).map_err(|e| match e {
        Error::SingularDiagonalBlock { index, condition } => Error::SingularMatrix {
            what: format!("Z_I,{index} + Z_II,{index}"),
            condition,
        },
        other => other,
    })?;

    let mut inner = net.blocks.rt.clone();
    for ell in 1..=l {
        let z_ri = net.z_ri_block(ell);
        inner -= &z_ri * &y[ell - 1][ell - 1] * net.z_it_block(ell);
        for k in 1..ell {
            inner -= &z_ri * &y[ell - 1][k - 1] * net.z_it_block(k);
        }
    }
    let (rx, tx) = endpoint_factors(net)?;
    Ok(rx * inner * tx)
}

fn matched_load_inverses(net: &MultiportNetwork, loads: &RisLoadStack) -> Result<Vec<CMat>> {
    let z0 = C64::from(net.z0);
    (1..=net.dims.l)
        .map(|k| {
            let m = loads.get(k) + linalg::identity(net.dims.n_i) * z0;
            linalg::inverse(&m, &format!("Z_I,{k} + Z_0 I"))
        })
        .collect()
}

/// Channel with perfect matching and no mutual coupling (assumptions 1–5).
pub fn channel_z_matched(net: &MultiportNetwork, loads: &RisLoadStack) -> Result<CMat> {
    net.require(5)?;
    loads.check_against(&net.dims)?;
    let l = net.dims.l;
    let y = matched_load_inverses(net, loads)?;

    let mut inner = net.blocks.rt.clone();
    for ell in 1..=l {
        let z_ri = net.z_ri_block(ell);
        inner -= &z_ri * &y[ell - 1] * net.z_it_block(ell);
        for k in 1..ell {
            // (−1)^{ℓ−k} Y_ℓ ∏_{p=ℓ−1..k} Z_{p+1,p} Y_p
            let mut path = y[ell - 1].clone();
            for p in (k..ell).rev() {
                path = path * net.z_ii_block(p + 1, p) * &y[p - 1];
            }
            if (ell - k) % 2 == 1 {
                path.neg_mut();
            }
            inner -= &z_ri * path * net.z_it_block(k);
        }
    }
    Ok(inner / C64::from(2.0 * net.z0))
}

/// Pure-cascade channel (assumptions 1–6):
/// `H = −(−1)^{L−1}/(2Z_0) · Z_RI,L Y_L ∏_{ℓ=L−1..1}(Z_{ℓ+1,ℓ} Y_ℓ) Z_IT,1`
/// with `Y_ℓ = (Z_I,ℓ + Z_0 I)^{-1}`.
pub fn channel_z_pure_cascade(net: &MultiportNetwork, loads: &RisLoadStack) -> Result<CMat> {
    net.require(6)?;
    loads.check_against(&net.dims)?;
    let l = net.dims.l;
    let y = matched_load_inverses(net, loads)?;
    let mut acc = net.z_ri_block(l) * &y[l - 1];
    for ell in (1..l).rev() {
        acc = acc * net.z_ii_block(ell + 1, ell) * &y[ell - 1];
    }
    acc *= net.z_it_block(1);
    // −(−1)^{L−1} = (−1)^L
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(acc * C64::from(sign / (2.0 * net.z0)))
}

/// `Θ = (Z + Z_0 I)^{-1} (Z − Z_0 I)`.
pub fn z_to_scattering(z_load: &CMat, z0: f64) -> Result<CMat> {
    if !z_load.is_square() {
        return Err(Error::DimensionMismatch("load impedance must be square".into()));
    }
    let shift = linalg::identity(z_load.nrows()) * C64::from(z0);
    let inv = linalg::inverse(&(z_load + &shift), "Z + Z_0 I")?;
    Ok(inv * (z_load - shift))
}

/// `Z = Z_0 (I + Θ)(I − Θ)^{-1}`.
pub fn scattering_to_z(theta: &CMat, z0: f64) -> Result<CMat> {
    if !theta.is_square() {
        return Err(Error::DimensionMismatch("scattering matrix must be square".into()));
    }
    let eye = linalg::identity(theta.nrows());
    let inv = linalg::guarded_inverse(&(&eye - theta)).map_err(|_| Error::OpenCircuitSingularity)?;
    Ok((eye + theta) * inv * C64::from(z0))
}

/// `Z / (2 Z_0)`: transmission impedance to normalized channel block.
pub fn normalize_z_to_channel(z_block: &CMat, z0: f64) -> CMat {
    z_block / C64::from(2.0 * z0)
}

/// Converts a matched network (assumptions 1–5) to the normalized channel
/// set. Side links are attached unless assumption 6 is asserted.
pub fn network_to_channels(net: &MultiportNetwork) -> Result<CascadeChannels> {
    net.require(5)?;
    let l = net.dims.l;
    let z0 = net.z0;
    let h_it_1 = normalize_z_to_channel(&net.z_it_block(1), z0);
    let h_ri_l = normalize_z_to_channel(&net.z_ri_block(l), z0);
    let inter = (1..l)
        .map(|k| normalize_z_to_channel(&net.z_ii_block(k + 1, k), z0))
        .collect();
    let side = if net.assumptions.pure_cascade {
        None
    } else {
        Some(SideLinks {
            h_rt: normalize_z_to_channel(&net.blocks.rt, z0),
            h_ri: (1..l).map(|k| normalize_z_to_channel(&net.z_ri_block(k), z0)).collect(),
            h_it: (2..=l).map(|k| normalize_z_to_channel(&net.z_it_block(k), z0)).collect(),
        })
    };
    CascadeChannels::new(h_it_1, inter, h_ri_l, side)
}

/// Scattering matrices of a load stack, without an architecture constraint.
pub fn loads_to_stack(loads: &RisLoadStack, z0: f64) -> Result<ScatteringStack> {
    let thetas = loads
        .loads()
        .iter()
        .map(|z| z_to_scattering(z, z0))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScatteringStack::unconstrained(thetas))
}
