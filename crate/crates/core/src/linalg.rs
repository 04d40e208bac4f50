//! Small dense solvers for the normal equations used by ridge fits.

use crate::error::{Error, Result};

/// Solves `a x = b` in place for symmetric positive-definite `a` (row-major,
/// `n × n`) via Cholesky. `b` is overwritten with `x`.
pub fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    let tol = scale * 1e-12;
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > tol) {
            return Err(Error::SingularSystem);
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    // L y = b
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    // Lᵀ x = y
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(())
}

/// Ridge solution with an unpenalized intercept: centres the design and
/// target, then solves `(XcᵀXc + λI) w = Xcᵀyc`. Returns `(weights, intercept)`.
pub fn ridge_centered(rows: &[&[f64]], y: &[f64], penalty: f64) -> Result<(Vec<f64>, f64)> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyData("ridge fit with zero rows".into()));
    }
    let p = rows[0].len();
    let mut mean = vec![0.0; p];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut centred = vec![0.0; p];
    for (r, &yi) in rows.iter().zip(y) {
        for j in 0..p {
            centred[j] = r[j] - mean[j];
        }
        let yc = yi - y_mean;
        for i in 0..p {
            let ci = centred[i];
            rhs[i] += ci * yc;
            let row = &mut gram[i * p..i * p + i + 1];
            for (g, cj) in row.iter_mut().zip(&centred[..=i]) {
                *g += ci * cj;
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            gram[j * p + i] = gram[i * p + j];
        }
        gram[i * p + i] += penalty;
    }
    if p > 0 {
        cholesky_solve(&mut gram, &mut rhs, p)?;
    }
    let intercept = y_mean - rhs.iter().zip(&mean).map(|(w, m)| w * m).sum::<f64>();
    Ok((rhs, intercept))
}
