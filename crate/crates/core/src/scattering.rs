//! Scattering-domain channel assembly.
//!
//! Channels are normalized blocks (`H = Z / 2Z_0`). The cascade is stored as
//! the chain `C_0 = H_IT,1`, `C_ℓ = H_{ℓ+1,ℓ}`, `C_L = H_RI,L`, and every
//! product over RISs is evaluated from the receiver side in strictly
//! decreasing RIS index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, matrix_json, matrix_vec_json, CMat, C64};

const DIAGONAL_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

/// Links that bypass part of the cascade (direct path and RIS-skipping hops).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideLinks {
    #[serde(with = "matrix_json")]
    pub h_rt: CMat,
    /// `H_RI,ℓ` for `ℓ = 1..L−1`.
    #[serde(with = "matrix_vec_json")]
    pub h_ri: Vec<CMat>,
    /// `H_IT,ℓ` for `ℓ = 2..L`.
    #[serde(with = "matrix_vec_json")]
    pub h_it: Vec<CMat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CascadeChannels {
    #[serde(with = "matrix_json")]
    h_it_1: CMat,
    #[serde(with = "matrix_vec_json")]
    inter: Vec<CMat>,
    #[serde(with = "matrix_json")]
    h_ri_l: CMat,
    side: Option<SideLinks>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCascade {
    #[serde(with = "matrix_json")]
    h_it_1: CMat,
    #[serde(with = "matrix_vec_json")]
    inter: Vec<CMat>,
    #[serde(with = "matrix_json")]
    h_ri_l: CMat,
    side: Option<SideLinks>,
}

impl<'de> Deserialize<'de> for CascadeChannels {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCascade::deserialize(d)?;
        CascadeChannels::new(raw.h_it_1, raw.inter, raw.h_ri_l, raw.side).map_err(serde::de::Error::custom)
    }
}

impl CascadeChannels {
    /// Checks that the hop dimensions chain. RIS sizes may differ per hop
    /// (reduced multi-sector channels); the side set must match those sizes.
    pub fn new(h_it_1: CMat, inter: Vec<CMat>, h_ri_l: CMat, side: Option<SideLinks>) -> Result<Self> {
        let n_t = h_it_1.ncols();
        let n_r = h_ri_l.nrows();
        let mut sizes = vec![h_it_1.nrows()];
        for (k, h) in inter.iter().enumerate() {
            if h.ncols() != *sizes.last().unwrap() {
                return Err(Error::DimensionMismatch(format!(
                    "H_{{{},{}}} has {} columns, RIS {} has {} elements",
                    k + 2,
                    k + 1,
                    h.ncols(),
                    k + 1,
                    sizes.last().unwrap()
                )));
            }
            sizes.push(h.nrows());
        }
        if h_ri_l.ncols() != *sizes.last().unwrap() {
            return Err(Error::DimensionMismatch(format!(
                "H_RI,L has {} columns, last RIS has {} elements",
                h_ri_l.ncols(),
                sizes.last().unwrap()
            )));
        }
        if n_t == 0 || n_r == 0 || sizes.contains(&0) {
            return Err(Error::DimensionMismatch("empty channel block".into()));
        }
        if let Some(s) = &side {
            let l = sizes.len();
            linalg::ensure_shape(&s.h_rt, n_r, n_t, "H_RT")?;
            if s.h_ri.len() != l - 1 || s.h_it.len() != l - 1 {
                return Err(Error::DimensionMismatch(format!(
                    "side links need {} H_RI and {} H_IT blocks",
                    l - 1,
                    l - 1
                )));
            }
            for (k, h) in s.h_ri.iter().enumerate() {
                linalg::ensure_shape(h, n_r, sizes[k], &format!("H_RI,{}", k + 1))?;
            }
            for (k, h) in s.h_it.iter().enumerate() {
                linalg::ensure_shape(h, sizes[k + 1], n_t, &format!("H_IT,{}", k + 2))?;
            }
        }
        Ok(Self {
            h_it_1,
            inter,
            h_ri_l,
            side,
        })
    }

    pub fn pure(h_it_1: CMat, inter: Vec<CMat>, h_ri_l: CMat) -> Result<Self> {
        Self::new(h_it_1, inter, h_ri_l, None)
    }

    pub fn l(&self) -> usize {
        self.inter.len() + 1
    }

    pub fn n_t(&self) -> usize {
        self.h_it_1.ncols()
    }

    pub fn n_r(&self) -> usize {
        self.h_ri_l.nrows()
    }

    /// Element count of each RIS along the cascade.
    pub fn ris_sizes(&self) -> Vec<usize> {
        std::iter::once(self.h_it_1.nrows())
            .chain(self.inter.iter().map(|h| h.nrows()))
            .collect()
    }

    pub fn h_it_1(&self) -> &CMat {
        &self.h_it_1
    }

    pub fn inter(&self) -> &[CMat] {
        &self.inter
    }

    pub fn h_ri_l(&self) -> &CMat {
        &self.h_ri_l
    }

    pub fn side(&self) -> Option<&SideLinks> {
        self.side.as_ref()
    }

    pub fn is_full(&self) -> bool {
        self.side.is_some()
    }

    /// Hop `k` of the chain: `C_0 = H_IT,1`, `C_k = H_{k+1,k}`, `C_L = H_RI,L`.
    pub fn hop(&self, k: usize) -> &CMat {
        let l = self.l();
        if k == 0 {
            &self.h_it_1
        } else if k == l {
            &self.h_ri_l
        } else {
            &self.inter[k - 1]
        }
    }

    /// Drops the side set, keeping only the pure cascade.
    pub fn without_side(&self) -> Self {
        Self {
            side: None,
            ..self.clone()
        }
    }

    /// `H_RI,ℓ` for any `ℓ` (1-based); zero when not in the side set.
    fn h_ri(&self, ell: usize) -> Option<&CMat> {
        if ell == self.l() {
            Some(&self.h_ri_l)
        } else {
            self.side.as_ref().map(|s| &s.h_ri[ell - 1])
        }
    }

    fn h_it(&self, ell: usize) -> Option<&CMat> {
        if ell == 1 {
            Some(&self.h_it_1)
        } else {
            self.side.as_ref().map(|s| &s.h_it[ell - 2])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// One independent phase per element.
    Diagonal,
    /// Fully connected beyond-diagonal RIS, any unitary matrix.
    Unitary,
}

impl Architecture {
    pub fn name(&self) -> &'static str {
        match self {
            Architecture::Diagonal => "diagonal",
            Architecture::Unitary => "unitary",
        }
    }

    pub fn check(&self, theta: &CMat) -> Result<()> {
        if !theta.is_square() {
            return Err(Error::InvalidScattering("scattering matrix is not square".into()));
        }
        match self {
            Architecture::Diagonal => {
                for i in 0..theta.nrows() {
                    for j in 0..theta.ncols() {
                        let z = theta[(i, j)];
                        let bad = if i == j {
                            (z.norm() - 1.0).abs() > DIAGONAL_TOL
                        } else {
                            z.norm() > DIAGONAL_TOL
                        };
                        if bad {
                            return Err(Error::InvalidScattering(format!(
                                "diagonal architecture violated at ({i}, {j}): {z}"
                            )));
                        }
                    }
                }
            }
            Architecture::Unitary => {
                let defect = linalg::unitarity_defect(theta);
                if defect > UNITARY_TOL {
                    return Err(Error::InvalidScattering(format!("ΘᴴΘ deviates from I by {defect:e}")));
                }
            }
        }
        Ok(())
    }
}

/// RIS scattering matrices `Θ_1..Θ_L`, tagged by the architecture they satisfy.
/// An untagged stack holds arbitrary (for instance lossy) scattering matrices.
#[derive(Debug, Clone, Serialize)]
pub struct ScatteringStack {
    architecture: Option<Architecture>,
    #[serde(with = "matrix_vec_json")]
    thetas: Vec<CMat>,
}

impl ScatteringStack {
    pub fn new(architecture: Architecture, thetas: Vec<CMat>) -> Result<Self> {
        for t in &thetas {
            architecture.check(t)?;
        }
        Ok(Self {
            architecture: Some(architecture),
            thetas,
        })
    }

    pub fn unconstrained(thetas: Vec<CMat>) -> Self {
        Self {
            architecture: None,
            thetas,
        }
    }

    /// Diagonal stack `Θ_ℓ = diag(e^{jθ_{ℓ,n}})`.
    pub fn from_phases(phases: &[Vec<f64>]) -> Self {
        Self {
            architecture: Some(Architecture::Diagonal),
            thetas: phases.iter().map(|p| linalg::phase_diagonal(p)).collect(),
        }
    }

    pub fn identity(sizes: &[usize]) -> Self {
        Self {
            architecture: Some(Architecture::Diagonal),
            thetas: sizes.iter().map(|&n| linalg::identity(n)).collect(),
        }
    }

    pub fn architecture(&self) -> Option<Architecture> {
        self.architecture
    }

    pub fn thetas(&self) -> &[CMat] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// Replaces `Θ_ℓ` (0-based) and re-checks the architecture.
    pub fn set(&mut self, index: usize, theta: CMat) -> Result<()> {
        if let Some(a) = self.architecture {
            a.check(&theta)?;
        }
        self.thetas[index] = theta;
        Ok(())
    }

    fn check_against(&self, ch: &CascadeChannels) -> Result<()> {
        let sizes = ch.ris_sizes();
        if self.thetas.len() != sizes.len() {
            return Err(Error::DimensionMismatch(format!(
                "stack has {} scattering matrices, cascade has {} RISs",
                self.thetas.len(),
                sizes.len()
            )));
        }
        for (k, (t, &n)) in self.thetas.iter().zip(&sizes).enumerate() {
            linalg::ensure_shape(t, n, n, &format!("Θ_{}", k + 1))?;
        }
        Ok(())
    }
}

/// `Θ + offset·I`.
pub fn shifted(theta: &CMat, offset: f64) -> CMat {
    let mut m = theta.clone();
    if offset != 0.0 {
        for i in 0..m.nrows() {
            m[(i, i)] += C64::from(offset);
        }
    }
    m
}

/// `C_L F_L C_{L−1} ⋯ F_1 C_0` for per-RIS factors `F_ℓ`.
pub fn cascade_product(ch: &CascadeChannels, factors: &[CMat]) -> CMat {
    let l = ch.l();
    let mut acc = ch.hop(l).clone();
    for ell in (1..=l).rev() {
        acc = acc * &factors[ell - 1] * ch.hop(ell - 1);
    }
    acc
}

/// Pure cascade with every RIS contributing `Θ_ℓ + offset·I`.
pub fn assemble_with_offset(ch: &CascadeChannels, stack: &ScatteringStack, offset: f64) -> Result<CMat> {
    stack.check_against(ch)?;
    let factors: Vec<CMat> = stack.thetas.iter().map(|t| shifted(t, offset)).collect();
    Ok(cascade_product(ch, &factors))
}

/// Physics-compliant pure cascade: `H_RI,L (Θ_L − I) ∏ (H_{ℓ+1,ℓ}(Θ_ℓ − I)) H_IT,1`.
pub fn assemble_physics_channel(ch: &CascadeChannels, stack: &ScatteringStack) -> Result<CMat> {
    assemble_with_offset(ch, stack, -1.0)
}

/// Widely used cascade: `H_RI,L Θ_L ∏ (H_{ℓ+1,ℓ} Θ_ℓ) H_IT,1`.
pub fn assemble_widely_used(ch: &CascadeChannels, stack: &ScatteringStack) -> Result<CMat> {
    assemble_with_offset(ch, stack, 0.0)
}

/// Physics-compliant channel including the direct path and every RIS-skipping
/// path. The signal arriving at RIS `ℓ` is accumulated as
/// `X_ℓ = H_IT,ℓ + H_{ℓ,ℓ−1}(Θ_{ℓ−1} − I) X_{ℓ−1}`.
pub fn assemble_full_physics(ch: &CascadeChannels, stack: &ScatteringStack) -> Result<CMat> {
    let side = ch.side().ok_or(Error::MissingSideLinks)?;
    stack.check_against(ch)?;
    let l = ch.l();
    let mut h = side.h_rt.clone();
    let mut arriving = ch.h_it_1().clone();
    for ell in 1..=l {
        let factor = shifted(&stack.thetas[ell - 1], -1.0);
        h += ch.h_ri(ell).unwrap() * &factor * &arriving;
        if ell < l {
            arriving = ch.h_it(ell + 1).unwrap() + ch.hop(ell) * factor * arriving;
        }
    }
    Ok(h)
}

/// The individual additive path terms of the full physics-compliant model:
/// the direct path followed by, for each exit RIS `ℓ`, the paths entering at
/// RIS `k ≤ ℓ`. There are `1 + L(L+1)/2` of them.
pub fn full_physics_path_terms(ch: &CascadeChannels, stack: &ScatteringStack) -> Result<Vec<CMat>> {
    let side = ch.side().ok_or(Error::MissingSideLinks)?;
    stack.check_against(ch)?;
    let l = ch.l();
    let factors: Vec<CMat> = stack.thetas.iter().map(|t| shifted(t, -1.0)).collect();
    let mut terms = vec![side.h_rt.clone()];
    for ell in 1..=l {
        for k in 1..=ell {
            let mut acc = ch.h_ri(ell).unwrap() * &factors[ell - 1];
            for p in (k..ell).rev() {
                acc = acc * ch.hop(p) * &factors[p - 1];
            }
            terms.push(acc * ch.h_it(k).unwrap());
        }
    }
    Ok(terms)
}

pub fn path_term_count(l: usize) -> usize {
    1 + l * (l + 1) / 2
}

/// Sector layout of one RIS (1-based sector indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorConfig {
    pub sectors: usize,
    pub arrival: usize,
    pub departure: usize,
}

impl SectorConfig {
    pub fn reflective() -> Self {
        Self {
            sectors: 1,
            arrival: 1,
            departure: 1,
        }
    }

    pub fn is_transmissive(&self) -> bool {
        self.arrival != self.departure
    }

    fn delta(&self) -> f64 {
        if self.arrival == self.departure {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiSectorSpec {
    n_i: usize,
    configs: Vec<SectorConfig>,
}

impl MultiSectorSpec {
    pub fn new(n_i: usize, configs: Vec<SectorConfig>) -> Result<Self> {
        for (k, c) in configs.iter().enumerate() {
            if c.sectors == 0 || !n_i.is_multiple_of(c.sectors) {
                return Err(Error::InvalidSectorSpec(format!(
                    "RIS {}: {} sectors do not divide {} elements",
                    k + 1,
                    c.sectors,
                    n_i
                )));
            }
            for (what, s) in [("arrival", c.arrival), ("departure", c.departure)] {
                if s == 0 || s > c.sectors {
                    return Err(Error::SectorIndexOutOfRange(format!(
                        "RIS {}: {what} sector {s} not in 1..={}",
                        k + 1,
                        c.sectors
                    )));
                }
            }
        }
        Ok(Self { n_i, configs })
    }

    pub fn configs(&self) -> &[SectorConfig] {
        &self.configs
    }

    /// Elements per sector, `N_S = N_I / S_ℓ`, for each RIS.
    pub fn reduced_sizes(&self) -> Vec<usize> {
        self.configs.iter().map(|c| self.n_i / c.sectors).collect()
    }
}

/// Multi-sector cascade on reduced (arrival/departure sector) blocks: each RIS
/// contributes `Θ̄_ℓ − δ(s_D, s_A) I`, so transmissive RISs carry no
/// structural term.
pub fn assemble_multisector(ch: &CascadeChannels, stack: &ScatteringStack, spec: &MultiSectorSpec) -> Result<CMat> {
    if spec.configs.len() != ch.l() {
        return Err(Error::DimensionMismatch(format!(
            "sector spec covers {} RISs, cascade has {}",
            spec.configs.len(),
            ch.l()
        )));
    }
    if ch.ris_sizes() != spec.reduced_sizes() {
        return Err(Error::DimensionMismatch(format!(
            "reduced RIS sizes {:?} differ from sector sizes {:?}",
            ch.ris_sizes(),
            spec.reduced_sizes()
        )));
    }
    stack.check_against(ch)?;
    let factors: Vec<CMat> = stack
        .thetas
        .iter()
        .zip(&spec.configs)
        .map(|(t, c)| shifted(t, -c.delta()))
        .collect();
    Ok(cascade_product(ch, &factors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::synth::gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ones(r: usize, cc: usize) -> CMat {
        CMat::from_element(r, cc, c(1.0, 0.0))
    }

    fn random_cascade(rng: &mut ChaCha8Rng, n_t: usize, n_r: usize, sizes: &[usize], side: bool) -> CascadeChannels {
        let l = sizes.len();
        let inter = (1..l).map(|k| gaussian_matrix(rng, sizes[k], sizes[k - 1], 1.0)).collect();
        let side = side.then(|| SideLinks {
            h_rt: gaussian_matrix(rng, n_r, n_t, 1.0),
            h_ri: (0..l - 1).map(|k| gaussian_matrix(rng, n_r, sizes[k], 1.0)).collect(),
            h_it: (1..l).map(|k| gaussian_matrix(rng, sizes[k], n_t, 1.0)).collect(),
        });
        CascadeChannels::new(
            gaussian_matrix(rng, sizes[0], n_t, 1.0),
            inter,
            gaussian_matrix(rng, n_r, sizes[l - 1], 1.0),
            side,
        )
        .unwrap()
    }

    fn random_phases(rng: &mut ChaCha8Rng, sizes: &[usize]) -> ScatteringStack {
        use rand::Rng;
        ScatteringStack::from_phases(
            &sizes
                .iter()
                .map(|&n| (0..n).map(|_| rng.random::<f64>() * 2.0 * PI).collect())
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn identity_nullifies_physics_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = random_cascade(&mut rng, 2, 3, &[4, 4, 4], false);
        let h = assemble_physics_channel(&ch, &ScatteringStack::identity(&[4, 4, 4])).unwrap();
        assert!(h.iter().all(|z| *z == c(0.0, 0.0)));
        let hw = assemble_widely_used(&ch, &ScatteringStack::identity(&[4, 4, 4])).unwrap();
        let plain = ch.h_ri_l() * &ch.inter()[1] * &ch.inter()[0] * ch.h_it_1();
        assert!(linalg::rel_error(&hw, &plain) < 1e-14);
        assert!(linalg::frobenius(&hw) > 0.0);
    }

    #[test]
    fn siso_two_ris_scalar_cases() {
        let ch = CascadeChannels::pure(ones(1, 1), vec![ones(1, 1)], ones(1, 1)).unwrap();
        let stack = ScatteringStack::from_phases(&[vec![PI], vec![PI]]);
        let h = assemble_physics_channel(&ch, &stack).unwrap();
        assert!((h[(0, 0)] - c(4.0, 0.0)).norm() < 1e-14);
        let hw = assemble_widely_used(&ch, &stack).unwrap();
        assert!((hw[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn physics_minus_widely_is_structural_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = random_cascade(&mut rng, 2, 2, &[3, 3], false);
        let stack = random_phases(&mut rng, &[3, 3]);
        let (t1, t2) = (&stack.thetas()[0], &stack.thetas()[1]);
        let (hri, h21, hit) = (ch.h_ri_l(), &ch.inter()[0], ch.h_it_1());
        let diff = assemble_physics_channel(&ch, &stack).unwrap() - assemble_widely_used(&ch, &stack).unwrap();
        let expected = -(hri * t2 * h21 * hit) - hri * h21 * t1 * hit + hri * h21 * hit;
        assert!(linalg::rel_error(&diff, &expected) < 1e-13);
    }

    #[test]
    fn full_model_degenerates_to_pure_cascade() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pure = random_cascade(&mut rng, 2, 2, &[3, 3, 3], false);
        let zero_side = SideLinks {
            h_rt: linalg::zeros(2, 2),
            h_ri: vec![linalg::zeros(2, 3); 2],
            h_it: vec![linalg::zeros(3, 2); 2],
        };
        let full = CascadeChannels::new(
            pure.h_it_1().clone(),
            pure.inter().to_vec(),
            pure.h_ri_l().clone(),
            Some(zero_side),
        )
        .unwrap();
        let stack = random_phases(&mut rng, &[3, 3, 3]);
        let a = assemble_full_physics(&full, &stack).unwrap();
        let b = assemble_physics_channel(&pure, &stack).unwrap();
        assert!(linalg::rel_error(&a, &b) < 1e-14);
        assert!(matches!(assemble_full_physics(&pure, &stack), Err(Error::MissingSideLinks)));
    }

    #[test]
    fn full_model_two_ris_four_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = random_cascade(&mut rng, 2, 2, &[3, 3], true);
        let stack = random_phases(&mut rng, &[3, 3]);
        let s = ch.side().unwrap();
        let f1 = shifted(&stack.thetas()[0], -1.0);
        let f2 = shifted(&stack.thetas()[1], -1.0);
        let expected = &s.h_rt
            + &s.h_ri[0] * &f1 * ch.h_it_1()
            + ch.h_ri_l() * &f2 * &s.h_it[0]
            + ch.h_ri_l() * &f2 * &ch.inter()[0] * &f1 * ch.h_it_1();
        let h = assemble_full_physics(&ch, &stack).unwrap();
        assert!(linalg::rel_error(&h, &expected) < 1e-13);
    }

    #[test]
    fn path_terms_count_and_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = random_cascade(&mut rng, 2, 2, &[2, 2, 2, 2], true);
        let stack = random_phases(&mut rng, &[2, 2, 2, 2]);
        let terms = full_physics_path_terms(&ch, &stack).unwrap();
        assert_eq!(terms.len(), 11);
        assert_eq!(path_term_count(4), 11);
        let sum = terms.iter().fold(linalg::zeros(2, 2), |acc, t| acc + t);
        assert!(linalg::rel_error(&sum, &assemble_full_physics(&ch, &stack).unwrap()) < 1e-12);
    }

    #[test]
    fn multisector_reflective_and_transmissive() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = random_cascade(&mut rng, 2, 2, &[4, 4], false);
        let stack = random_phases(&mut rng, &[4, 4]);

        let reflective = MultiSectorSpec::new(4, vec![SectorConfig::reflective(); 2]).unwrap();
        let h = assemble_multisector(&ch, &stack, &reflective).unwrap();
        assert!(linalg::rel_error(&h, &assemble_physics_channel(&ch, &stack).unwrap()) < 1e-15);

        let t = SectorConfig {
            sectors: 2,
            arrival: 1,
            departure: 2,
        };
        let transmissive = MultiSectorSpec::new(8, vec![t, t]).unwrap();
        let h = assemble_multisector(&ch, &stack, &transmissive).unwrap();
        assert!(linalg::rel_error(&h, &assemble_widely_used(&ch, &stack).unwrap()) < 1e-15);

        // RIS 1 reflective (4 elements), RIS 2 transmissive hybrid (8 elements, 4 per side)
        let mixed = MultiSectorSpec::new(4, vec![SectorConfig::reflective(), SectorConfig { sectors: 1, ..t }]);
        assert!(matches!(mixed, Err(Error::SectorIndexOutOfRange(_))));
        let mixed = MultiSectorSpec::new(
            8,
            vec![
                SectorConfig {
                    sectors: 2,
                    arrival: 2,
                    departure: 2,
                },
                t,
            ],
        )
        .unwrap();
        let h = assemble_multisector(&ch, &stack, &mixed).unwrap();
        let (t1, t2) = (&stack.thetas()[0], &stack.thetas()[1]);
        let expected = ch.h_ri_l() * t2 * &ch.inter()[0] * shifted(t1, -1.0) * ch.h_it_1();
        assert!(linalg::rel_error(&h, &expected) < 1e-15);
    }

    #[test]
    fn multisector_spec_validation() {
        assert!(matches!(
            MultiSectorSpec::new(
                6,
                vec![SectorConfig {
                    sectors: 4,
                    arrival: 1,
                    departure: 1
                }]
            ),
            Err(Error::InvalidSectorSpec(_))
        ));
        let ch = CascadeChannels::pure(ones(2, 1), vec![], ones(1, 2)).unwrap();
        let spec = MultiSectorSpec::new(
            4,
            vec![SectorConfig {
                sectors: 4,
                arrival: 1,
                departure: 3,
            }],
        )
        .unwrap();
        let stack = ScatteringStack::identity(&[2]);
        assert!(matches!(assemble_multisector(&ch, &stack, &spec), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn dimension_checks() {
        assert!(CascadeChannels::pure(ones(3, 2), vec![ones(3, 4)], ones(1, 3)).is_err());
        let ch = CascadeChannels::pure(ones(3, 2), vec![ones(3, 3)], ones(1, 3)).unwrap();
        let err = assemble_physics_channel(&ch, &ScatteringStack::identity(&[3])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn architecture_checks() {
        let d = linalg::phase_diagonal(&[0.3, 1.2]);
        assert!(Architecture::Diagonal.check(&d).is_ok());
        assert!(Architecture::Unitary.check(&d).is_ok());
        let mut bad = d.clone();
        bad[(0, 1)] = c(0.1, 0.0);
        assert!(Architecture::Diagonal.check(&bad).is_err());
        assert!(Architecture::Unitary.check(&bad).is_err());
    }

    #[test]
    fn cascade_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ch = random_cascade(&mut rng, 2, 2, &[2, 2], true);
        let s = serde_json::to_string(&ch).unwrap();
        let back: CascadeChannels = serde_json::from_str(&s).unwrap();
        assert_eq!(back.h_ri_l(), ch.h_ri_l());
        assert_eq!(back.side().unwrap().h_it[0], ch.side().unwrap().h_it[0]);
    }

    #[test]
    fn global_phase_invariance_only_for_widely_used() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ch = random_cascade(&mut rng, 2, 2, &[3, 3], false);
        let stack = random_phases(&mut rng, &[3, 3]);
        let mut rotated = stack.thetas().to_vec();
        rotated[0] *= C64::from_polar(1.0, 0.9);
        let rotated = ScatteringStack::new(Architecture::Diagonal, rotated).unwrap();
        let g = |h: CMat| h.singular_values()[0];
        let w0 = g(assemble_widely_used(&ch, &stack).unwrap());
        let w1 = g(assemble_widely_used(&ch, &rotated).unwrap());
        assert!((w0 - w1).abs() < 1e-12 * w0);
        let p0 = g(assemble_physics_channel(&ch, &stack).unwrap());
        let p1 = g(assemble_physics_channel(&ch, &rotated).unwrap());
        assert!((p0 - p1).abs() > 1e-6 * p0);
    }
}
