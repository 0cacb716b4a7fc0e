//! Complex vector and Hermitian matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Real part of `vᴴ M v`. For Hermitian `M` the imaginary part is rounding noise.
pub fn quad_form(v: &CVector, m: &CMatrix) -> f64 {
    bilinear(v, m, v).re
}

/// `uᴴ M v` without allocating.
pub fn bilinear(u: &CVector, m: &CMatrix, v: &CVector) -> Complex64 {
    let n = m.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for col in 0..n {
        let vc = v[col];
        let mut inner = Complex64::new(0.0, 0.0);
        for row in 0..n {
            inner += u[row].conj() * m[(row, col)];
        }
        acc += inner * vc;
    }
    acc
}

/// `v vᴴ` scaled by `scale`.
pub fn outer_scaled(v: &CVector, scale: f64) -> CMatrix {
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() * scale)
}

pub fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let n = m.nrows();
    (0..n).all(|i| (i..n).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in ascending order.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.first().copied().unwrap_or(0.0)
}

/// Multiplies `v` by a unit phase so its first non-negligible entry is real positive.
pub fn normalize_phase(v: &mut CVector) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

/// Largest eigenvalue and a unit eigenvector of a Hermitian matrix.
///
/// When the top eigenvalue is repeated, the eigenvector whose phase-normalized
/// real parts are lexicographically largest is returned, so the choice is
/// reproducible.
pub fn top_eigenpair(m: &CMatrix) -> (f64, CVector) {
    let (values, vectors) = hermitian_eigen(m);
    let n = values.len();
    let top = values[n - 1];
    let tie_tol = 1e-10 * top.abs().max(f64::MIN_POSITIVE);
    let mut best: Option<CVector> = None;
    for c in (0..n).rev() {
        if top - values[c] > tie_tol {
            break;
        }
        let mut v: CVector = vectors.column(c).into_owned();
        let norm = v.norm();
        v.unscale_mut(norm);
        normalize_phase(&mut v);
        best = match best {
            None => Some(v),
            Some(b) => {
                let ord = v
                    .iter()
                    .zip(b.iter())
                    .map(|(x, y)| x.re.total_cmp(&y.re))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal);
                if ord.is_gt() {
                    Some(v)
                } else {
                    Some(b)
                }
            }
        };
    }
    (top, best.expect("non-empty matrix"))
}

/// Hermitian square root `S` with `S S = R`. Eigenvalues below
/// `1e-12 * trace` are clamped to zero.
pub fn hermitian_sqrt(r: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(r);
    let floor = 1e-12 * trace_re(r).abs();
    let n = values.len();
    let mut out = CMatrix::zeros(n, n);
    for (c, &lam) in values.iter().enumerate() {
        if lam <= floor {
            continue;
        }
        let v: CVector = vectors.column(c).into_owned();
        out += outer_scaled(&v, lam.sqrt());
    }
    out
}

/// Checks Hermitian symmetry and `λ_min ≥ -1e-10 · tr`.
pub fn check_psd(r: &CMatrix) -> Result<()> {
    if r.nrows() != r.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let scale = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !is_hermitian(r, 1e-12 * scale.max(1.0)) {
        return Err(Error::InfeasibleCovariance("matrix is not Hermitian".into()));
    }
    let lam = min_eigenvalue(r);
    if lam < -1e-10 * trace_re(r).abs() {
        return Err(Error::NotPsd { min_eigenvalue: lam });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quad_form_of_identity_is_squared_norm() {
        let v = CVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.0)]);
        let id = CMatrix::identity(2, 2);
        assert!((quad_form(&v, &id) - 5.25).abs() < 1e-15);
    }

    #[test]
    fn top_eigenpair_of_rank_one() {
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
        let m = outer_scaled(&v, 2.0);
        let (lam, u) = top_eigenpair(&m);
        assert!((lam - 6.0).abs() < 1e-12);
        let overlap = u.dotc(&v).norm() / v.norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        assert!(u[0].im.abs() < 1e-14 && u[0].re > 0.0);
    }

    #[test]
    fn tie_breaking_is_deterministic() {
        let m = CMatrix::identity(3, 3);
        let (lam, u) = top_eigenpair(&m);
        assert!((lam - 1.0).abs() < 1e-15);
        let (_, u2) = top_eigenpair(&m);
        assert_eq!(u, u2);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = CMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, i as f64 - j as f64));
        let r = &a * a.adjoint();
        let s = hermitian_sqrt(&r);
        let back = &s * &s;
        assert!((back - &r).norm() < 1e-9 * r.norm());
    }

    #[test]
    fn psd_check_rejects_negative() {
        let mut m = CMatrix::identity(2, 2);
        m[(1, 1)] = c(-1.0, 0.0);
        assert!(matches!(check_psd(&m), Err(Error::NotPsd { .. })));
        assert!(check_psd(&CMatrix::identity(2, 2)).is_ok());
    }
}
