//! Ordinary least squares with symmetric residual trimming, sized for the
//! handful of regressors used in log-log exponent fits.

use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    /// Intercept first, then one slope per regressor.
    pub coefficients: Vec<f64>,
    pub stderr: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub r_squared: f64,
    /// Indices of the observations kept in the final fit.
    pub used: Vec<usize>,
}

impl LinearFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn slope(&self, k: usize) -> f64 {
        self.coefficients[k + 1]
    }

    pub fn slope_stderr(&self, k: usize) -> f64 {
        self.stderr[k + 1]
    }

    pub fn slope_covariance(&self, a: usize, b: usize) -> f64 {
        self.covariance[a + 1][b + 1]
    }
}

fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Least squares of `y` on `[1, x_1, ..., x_k]`; `rows[i]` holds the regressors of observation `i`.
pub fn ols(rows: &[Vec<f64>], y: &[f64]) -> Result<LinearFit> {
    let idx: Vec<usize> = (0..y.len()).collect();
    ols_subset(rows, y, &idx)
}

fn ols_subset(rows: &[Vec<f64>], y: &[f64], idx: &[usize]) -> Result<LinearFit> {
    if rows.len() != y.len() {
        return input("regression rows and responses differ in length");
    }
    let k = rows.first().map_or(0, Vec::len);
    let p = k + 1;
    if idx.len() < p {
        return input(format!("need at least {p} observations, have {}", idx.len()));
    }
    let design = |i: usize, c: usize| if c == 0 { 1.0 } else { rows[i][c - 1] };
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for &i in idx {
        for a in 0..p {
            xty[a] += design(i, a) * y[i];
            for b in 0..p {
                xtx[a][b] += design(i, a) * design(i, b);
            }
        }
    }
    let inv = invert(xtx).ok_or_else(|| crate::Error::Input("regression design is singular".into()))?;
    let coefficients: Vec<f64> = (0..p).map(|a| (0..p).map(|b| inv[a][b] * xty[b]).sum()).collect();
    let predict = |i: usize| (0..p).map(|c| coefficients[c] * design(i, c)).sum::<f64>();
    let rss: f64 = idx.iter().map(|&i| (y[i] - predict(i)).powi(2)).sum();
    let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
    let tss: f64 = idx.iter().map(|&i| (y[i] - mean).powi(2)).sum();
    let dof = idx.len() - p;
    let sigma2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let covariance: Vec<Vec<f64>> = inv.iter().map(|row| row.iter().map(|v| v * sigma2).collect()).collect();
    let stderr = (0..p).map(|a| covariance[a][a].max(0.0).sqrt()).collect();
    let r_squared = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 1.0 };
    Ok(LinearFit { coefficients, stderr, covariance, r_squared, used: idx.to_vec() })
}

/// Fits once, drops the `trim` fraction of largest and of smallest residuals, and refits.
pub fn trimmed_ols(rows: &[Vec<f64>], y: &[f64], trim: f64) -> Result<LinearFit> {
    let full = ols(rows, y)?;
    let n = y.len();
    let drop = (trim * n as f64).floor() as usize;
    let p = full.coefficients.len();
    if drop == 0 || n - 2 * drop < p + 1 {
        return Ok(full);
    }
    let resid = |i: usize| {
        y[i] - full.coefficients[0] - (1..p).map(|c| full.coefficients[c] * rows[i][c - 1]).sum::<f64>()
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| resid(a).total_cmp(&resid(b)).then(a.cmp(&b)));
    let mut keep: Vec<usize> = order[drop..n - drop].to_vec();
    keep.sort_unstable();
    ols_subset(rows, y, &keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_plane() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 0.5 - 2.0 * r[0] + 0.25 * r[1]).collect();
        let fit = trimmed_ols(&rows, &y, 0.1).unwrap();
        assert!((fit.slope(0) + 2.0).abs() < 1e-12);
        assert!((fit.slope(1) - 0.25).abs() < 1e-12);
        assert!(fit.slope_stderr(0) < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trimming_rejects_an_outlier() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let mut y: Vec<f64> = rows.iter().map(|r| 1.0 + 3.0 * r[0]).collect();
        y[4] += 50.0;
        let fit = trimmed_ols(&rows, &y, 0.1).unwrap();
        assert!(!fit.used.contains(&4));
        assert!((fit.slope(0) - 3.0).abs() < 0.5);
    }

    #[test]
    fn singular_design_errors() {
        let rows = vec![vec![1.0], vec![1.0], vec![1.0]];
        assert!(ols(&rows, &[1.0, 2.0, 3.0]).is_err());
    }
}
