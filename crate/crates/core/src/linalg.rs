//! Thin layer over `faer` for the dense complex algebra used everywhere else.
//!
//! `faer` is built without its `rayon` feature, so every factorization and
//! product here runs sequentially and gives bit-identical results no matter
//! how many worker threads the caller uses.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMat = Mat<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest entrywise deviation `|m_ij - conj(m_ji)|`.
pub fn hermitian_defect(m: MatRef<'_, C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Returns `(m + m†) / 2`.
pub fn hermitian_part(m: MatRef<'_, C64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * 0.5
    })
}

pub fn is_real(m: MatRef<'_, C64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0))
}

pub fn frobenius_norm(m: MatRef<'_, C64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Dense `m · v`.
pub fn matvec(m: MatRef<'_, C64>, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols(), v.len());
    let mut out = vec![ZERO; m.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj == ZERO {
            continue;
        }
        let col = m.col(j);
        for (o, &a) in out.iter_mut().zip(col.iter()) {
            *o += a * vj;
        }
    }
    out
}

/// Dense `m† · v`.
pub fn adjoint_matvec(m: MatRef<'_, C64>, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.nrows(), v.len());
    (0..m.ncols())
        .map(|j| m.col(j).iter().zip(v).map(|(a, b)| a.conj() * b).sum())
        .collect()
}

/// `⟨a|b⟩` with the first argument conjugated.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Purely real input goes through the real symmetric solver, which is
/// several times faster and yields real eigenvectors.
pub fn eigh(m: MatRef<'_, C64>) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    if is_real(m) {
        let re = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let evd = re
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;
        let values = (0..n).map(|k| evd.S()[k]).collect();
        let u = evd.U();
        Ok((values, Mat::from_fn(n, n, |i, j| C64::new(u[(i, j)], 0.0))))
    } else {
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;
        let values = (0..n).map(|k| evd.S()[k].re).collect();
        Ok((values, evd.U().to_owned()))
    }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if is_real(m) {
        let re = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        re.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))
    } else {
        m.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))
    }
}

/// Largest singular value of a Hermitian matrix, i.e. its largest |eigenvalue|.
pub fn hermitian_operator_norm(m: MatRef<'_, C64>) -> Result<f64> {
    let ev = eigvalsh(m)?;
    Ok(ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

/// `a† · b`.
pub fn adjoint_mul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    a.adjoint() * b
}

/// `u · m · u†`.
pub fn conjugate(u: MatRef<'_, C64>, m: MatRef<'_, C64>) -> CMat {
    let um = u * m;
    &um * u.adjoint()
}

/// `u† · m · u`.
pub fn conjugate_adjoint(u: MatRef<'_, C64>, m: MatRef<'_, C64>) -> CMat {
    let mu = m * u;
    u.adjoint() * &mu
}

/// `s · m`.
pub fn scaled(m: MatRef<'_, C64>, s: f64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

/// Sample mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Ordinary least squares `y = slope·x + intercept`; returns
/// `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - slope * x - intercept).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}
