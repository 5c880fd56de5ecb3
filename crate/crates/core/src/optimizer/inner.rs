//! Single-RIS subproblem `max |g_RT + g_RI Θ g_IT|²` for a fixed pair of
//! auxiliary vectors.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};
use crate::registry::Registry;
use crate::scattering::Architecture;

const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct InnerProblemData {
    pub g_rt: C64,
    /// Entries of the row vector `g_RI = uᴴ A`.
    pub g_ri: CVec,
    /// Column vector `g_IT = B v`.
    pub g_it: CVec,
    pub u: CVec,
    pub v: CVec,
}

impl InnerProblemData {
    pub fn new(g_rt: C64, g_ri: CVec, g_it: CVec, u: CVec, v: CVec) -> Result<Self> {
        if g_ri.len() != g_it.len() {
            return Err(Error::DimensionMismatch(format!(
                "g_RI has {} entries, g_IT has {}",
                g_ri.len(),
                g_it.len()
            )));
        }
        for (name, x) in [("u", &u), ("v", &v)] {
            if (x.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidInput(format!("auxiliary vector {name} has norm {}", x.norm())));
            }
        }
        Ok(Self {
            g_rt,
            g_ri,
            g_it,
            u,
            v,
        })
    }

    /// Builds the data for `M(Θ) = A(Θ + c·I)B` at the auxiliary pair `(u, v)`.
    pub fn from_equivalent(a: &CMat, b: &CMat, offset: f64, u: CVec, v: CVec) -> Result<Self> {
        let g_ri = (u.adjoint() * a).transpose();
        let g_it = b * &v;
        let g_rt = C64::from(offset) * g_ri.dot(&g_it);
        Self::new(g_rt, g_ri, g_it, u, v)
    }

    pub fn n(&self) -> usize {
        self.g_it.len()
    }

    /// `|g_RT + g_RI Θ g_IT|²`.
    pub fn objective(&self, theta: &CMat) -> f64 {
        (self.g_rt + (self.g_ri.transpose() * theta * &self.g_it)[(0, 0)]).norm_sqr()
    }
}

pub trait InnerSolver: Send + Sync {
    fn architecture(&self) -> Architecture;

    fn solve(&self, data: &InnerProblemData) -> Result<CMat>;

    /// Analytic optimum of the subproblem.
    fn optimum(&self, data: &InnerProblemData) -> f64;
}

pub fn inner_solve_diagonal(data: &InnerProblemData) -> CMat {
    let phi = linalg::arg0(data.g_rt);
    let phases: Vec<f64> = data
        .g_ri
        .iter()
        .zip(data.g_it.iter())
        .map(|(r, t)| phi - linalg::arg0(*r) - linalg::arg0(*t))
        .collect();
    linalg::phase_diagonal(&phases)
}

/// Unitary `U` with `U e_1 = x` for a unit vector `x` (scaled Householder reflection).
fn householder_completion(x: &CVec) -> CMat {
    let n = x.len();
    let alpha = -C64::from_polar(1.0, linalg::arg0(x[0]));
    let mut w = x.clone();
    w[0] -= alpha;
    let ww = w.norm_squared();
    let p = linalg::identity(n) - (&w * w.adjoint()) * C64::from(2.0 / ww);
    p * alpha
}

pub fn inner_solve_unitary(data: &InnerProblemData) -> Result<CMat> {
    let (nr, nt) = (data.g_ri.norm(), data.g_it.norm());
    if nr == 0.0 || nt == 0.0 {
        return Err(Error::ZeroVector);
    }
    let x = &data.g_it / C64::from(nt);
    let y = data.g_ri.conjugate() * (C64::from_polar(1.0, linalg::arg0(data.g_rt)) / nr);
    Ok(householder_completion(&y) * householder_completion(&x).adjoint())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DiagonalSolver;

impl InnerSolver for DiagonalSolver {
    fn architecture(&self) -> Architecture {
        Architecture::Diagonal
    }

    fn solve(&self, data: &InnerProblemData) -> Result<CMat> {
        Ok(inner_solve_diagonal(data))
    }

    fn optimum(&self, data: &InnerProblemData) -> f64 {
        let s: f64 = data.g_ri.iter().zip(data.g_it.iter()).map(|(r, t)| r.norm() * t.norm()).sum();
        (data.g_rt.norm() + s).powi(2)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UnitarySolver;

impl InnerSolver for UnitarySolver {
    fn architecture(&self) -> Architecture {
        Architecture::Unitary
    }

    fn solve(&self, data: &InnerProblemData) -> Result<CMat> {
        inner_solve_unitary(data)
    }

    fn optimum(&self, data: &InnerProblemData) -> f64 {
        (data.g_rt.norm() + data.g_ri.norm() * data.g_it.norm()).powi(2)
    }
}

pub fn solver_for(architecture: Architecture) -> Arc<dyn InnerSolver> {
    match architecture {
        Architecture::Diagonal => Arc::new(DiagonalSolver),
        Architecture::Unitary => Arc::new(UnitarySolver),
    }
}

pub fn inner_solver_registry() -> Registry<dyn InnerSolver> {
    let mut reg: Registry<dyn InnerSolver> = Registry::new("architecture");
    reg.register("diagonal", solver_for(Architecture::Diagonal));
    reg.register("unitary", solver_for(Architecture::Unitary));
    reg
}
