//! Preconditioned conjugate gradients and restarted GMRES on plain vectors.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KrylovError {
    #[error("operator is not positive definite (curvature {curvature:.3e} at iteration {iteration})")]
    Indefinite { iteration: usize, curvature: f64 },
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    Stagnation { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖b - Ax‖ / ‖b‖`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Solves `A x = b` for symmetric positive definite `A` with SPD preconditioner `M⁻¹`.
pub fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<KrylovSolution, KrylovError> {
    let bn = norm(b);
    let mut x = vec![0.0; b.len()];
    if bn == 0.0 {
        return Ok(KrylovSolution {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        // Also catches NaN curvature.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(pap > 0.0) {
            return Err(KrylovError::Indefinite {
                iteration: it,
                curvature: pap / dot(&p, &p),
            });
        }
        let alpha = rz / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let res = norm(&r) / bn;
        if res <= tol {
            return Ok(KrylovSolution {
                x,
                iterations: it,
                residual: res,
            });
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(KrylovError::Stagnation {
        iterations: max_iter,
        residual: norm(&r) / bn,
    })
}

/// Restarted GMRES with right preconditioning.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<KrylovSolution, KrylovError> {
    let n = b.len();
    let bn = norm(b);
    let mut x = vec![0.0; n];
    if bn == 0.0 {
        return Ok(KrylovSolution {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let m = restart.max(1);
    let mut total = 0;
    while total < max_iter {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let res = beta / bn;
        if res <= tol {
            return Ok(KrylovSolution {
                x,
                iterations: total,
                residual: res,
            });
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            if total >= max_iter {
                break;
            }
            total += 1;
            let z = precond(&v[k]);
            let mut w = apply(&z);
            zs.push(z);
            for i in 0..=k {
                h[i][k] = dot(&w, &v[i]);
                axpy(&mut w, -h[i][k], &v[i]);
            }
            let w_norm = norm(&w);
            h[k + 1][k] = w_norm;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() / bn <= tol || w_norm == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / w_norm).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            axpy(&mut x, *yi, &zs[i]);
        }
    }
    let ax = apply(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let final_res = norm(&r) / bn;
    if final_res <= tol {
        return Ok(KrylovSolution {
            x,
            iterations: total,
            residual: final_res,
        });
    }
    Err(KrylovError::Stagnation {
        iterations: total,
        residual: final_res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(x: &[f64], diag: f64) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = diag * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                v
            })
            .collect()
    }

    #[test]
    fn cg_solves_spd_system() {
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let sol = pcg(|x| tridiag(x, 2.5), |r| r.to_vec(), &b, 1e-12, 200).unwrap();
        let r = tridiag(&sol.x, 2.5);
        let err: f64 = r.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn cg_detects_indefinite_operator() {
        let b = vec![1.0; 10];
        let out = pcg(|x| x.iter().map(|v| -v).collect(), |r| r.to_vec(), &b, 1e-12, 20);
        assert!(matches!(out, Err(KrylovError::Indefinite { .. })));
    }

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let n = 40;
        let op = |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut v = 3.0 * x[i];
                    if i > 0 {
                        v -= 1.5 * x[i - 1];
                    }
                    if i + 1 < n {
                        v -= 0.5 * x[i + 1];
                    }
                    v
                })
                .collect()
        };
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64).cos()).collect();
        let sol = gmres(op, |r| r.iter().map(|v| v / 3.0).collect(), &b, 1e-12, 10, 500).unwrap();
        let r = op(&sol.x);
        let err: f64 = r.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn zero_rhs_is_immediate() {
        let b = vec![0.0; 5];
        assert_eq!(pcg(|x| x.to_vec(), |r| r.to_vec(), &b, 1e-12, 5).unwrap().iterations, 0);
        assert_eq!(gmres(|x| x.to_vec(), |r| r.to_vec(), &b, 1e-12, 5, 5).unwrap().iterations, 0);
    }
}
