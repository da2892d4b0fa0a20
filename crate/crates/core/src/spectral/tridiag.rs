//! Eigenvalues of symmetric tridiagonal matrices by implicit QL.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// All eigenvalues, ascending. `diag` has length `n`, `off` length `n − 1`
/// with `off[i]` coupling rows `i` and `i + 1`.
pub fn symmetric_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::Argument(format!("tridiagonal shape mismatch: {} and {}", n, off.len())));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::Numeric(format!(
                    "QL iteration did not converge for eigenvalue {l}, residual coupling {:e}",
                    e[l]
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite eigenvalue".into()));
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_laplacian() {
        // Dirichlet second difference: 2 − 2cos(kπ/(n+1))
        let n = 50;
        let ev = symmetric_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        assert_eq!(symmetric_eigenvalues(&[3.0], &[]).unwrap(), vec![3.0]);
        assert!(symmetric_eigenvalues(&[1.0, 2.0], &[]).is_err());
    }
}
