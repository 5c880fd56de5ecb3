//! Dense complex matrix helpers shared by the channel models and optimizers.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Condition-number cap above which a matrix is treated as singular.
pub const CONDITION_CAP: f64 = 1e12;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative Frobenius distance `‖a − b‖ / max(‖b‖, tiny)`.
pub fn rel_error(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "rel_error on mismatched shapes");
    let diff = frobenius(&(a - b));
    let scale = frobenius(b);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn norm_one(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverts `m`, rejecting it when the 1-norm condition estimate exceeds
/// [`CONDITION_CAP`]. On failure the estimate is returned (infinite when LU fails).
pub fn guarded_inverse(m: &CMat) -> std::result::Result<CMat, f64> {
    if !m.is_square() {
        return Err(f64::INFINITY);
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let inv = m.clone().lu().try_inverse().ok_or(f64::INFINITY)?;
    let cond = norm_one(m) * norm_one(&inv);
    if !cond.is_finite() || cond > CONDITION_CAP {
        return Err(cond);
    }
    Ok(inv)
}

pub fn inverse(m: &CMat, what: &str) -> Result<CMat> {
    guarded_inverse(m).map_err(|condition| Error::SingularMatrix {
        what: what.to_string(),
        condition,
    })
}

pub fn is_zero(m: &CMat, tol: f64) -> bool {
    m.iter().all(|z| z.norm() <= tol)
}

pub fn ensure_shape(m: &CMat, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Diagonal matrix `diag(e^{jθ_1}, …, e^{jθ_n})`.
pub fn phase_diagonal(phases: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        phases.len(),
        phases.iter().map(|&t| C64::from_polar(1.0, t)),
    ))
}

/// `‖AᴴA − I‖_F` measured entrywise against the identity.
pub fn unitarity_defect(m: &CMat) -> f64 {
    let g = m.adjoint() * m;
    frobenius(&(g - identity(m.ncols())))
}

/// Index of the largest-modulus entry (first one on ties).
pub fn argmax_modulus(v: &CVec) -> usize {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() {
            best = i;
        }
    }
    best
}

/// Argument with the tie-break `arg(0) = 0`.
pub fn arg0(z: C64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        z.arg()
    }
}

/// Serde adapter: a matrix as `{ "rows", "cols", "data": [[re, im], …] }` in
/// row-major order.
pub mod matrix_json {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Repr {
        rows: usize,
        cols: usize,
        data: Vec<[f64; 2]>,
    }

    pub fn to_repr(m: &CMat) -> impl Serialize {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Repr {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_repr(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let r = Repr::deserialize(d)?;
        if r.data.len() != r.rows * r.cols {
            return Err(D::Error::custom(format!(
                "matrix data has {} entries, expected {}",
                r.data.len(),
                r.rows * r.cols
            )));
        }
        Ok(CMat::from_row_iterator(
            r.rows,
            r.cols,
            r.data.into_iter().map(|[re, im]| C64::new(re, im)),
        ))
    }
}

pub mod matrix_vec_json {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Wrap(#[serde(with = "matrix_json")] CMat);

    pub fn serialize<S: Serializer>(v: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let wrapped: Vec<Wrap> = v.iter().cloned().map(Wrap).collect();
        wrapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_rejects_singular() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(matches!(inverse(&m, "m"), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn inverse_rejects_ill_conditioned() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(1e-13, 0.0)]));
        assert!(guarded_inverse(&m).is_err());
        let ok = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(1e-6, 0.0)]));
        assert!(guarded_inverse(&ok).is_ok());
    }

    #[test]
    fn json_is_row_major_pairs() {
        #[derive(Serialize, Deserialize)]
        struct W(#[serde(with = "matrix_json")] CMat);
        let m = CMat::from_row_slice(1, 2, &[c(1.0, 2.0), c(3.0, -4.0)]);
        let s = serde_json::to_string(&W(m.clone())).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"data":[[1.0,2.0],[3.0,-4.0]]}"#);
        let back: W = serde_json::from_str(&s).unwrap();
        assert_eq!(back.0, m);
    }
}
