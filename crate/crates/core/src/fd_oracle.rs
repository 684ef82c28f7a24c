//! Second-order finite-difference solve of the strip Laplace problem.
//!
//! This is a reference solver, deliberately built on a different
//! discretization than [`crate::strip`]: the divergence form
//! `μ∂x(h φx - ε(z+1)ζx φz) + ∂z(-με(z+1)ζx φx + q φz) = 0`,
//! `q = (1 + με²(z+1)²ζx²)/h`, on a uniform `nx × nz` grid with centered
//! differences, evaluated from analytic `ζ`, `ζx`, `ψ`. The linear system is
//! solved by GMRES preconditioned with the constant-coefficient operator.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::krylov::{gmres, KrylovError};
use crate::multipliers::Params;
use crate::spectral::{forward_in_place, inverse_in_place};

/// Analytic surface data for the reference solve.
pub struct FdProblem<'a> {
    pub length: f64,
    pub params: Params,
    pub zeta: &'a dyn Fn(f64) -> f64,
    pub zeta_x: &'a dyn Fn(f64) -> f64,
    pub psi: &'a dyn Fn(f64) -> f64,
}

/// Potential on the uniform grid `x_j = jL/nx`, `z_k = -k/nz`, `k = 0..=nz`.
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub nx: usize,
    pub nz: usize,
    pub values: Vec<f64>,
    pub iterations: usize,
}

impl FdSolution {
    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.nx + j]
    }

    pub fn z(&self, k: usize) -> f64 {
        -(k as f64) / self.nz as f64
    }
}

struct Coefficients {
    nx: usize,
    nz: usize,
    dx: f64,
    dz: f64,
    mu: f64,
    eps: f64,
    zx: Vec<f64>,
    /// `h` at `x_{j+1/2}`.
    h_half: Vec<f64>,
    /// `q` at `(x_j, z_{k+1/2})`, index `k * nx + j` for `k = 0..nz`.
    q_half: Vec<f64>,
}

impl Coefficients {
    fn new(p: &FdProblem, nx: usize, nz: usize) -> Self {
        let dx = p.length / nx as f64;
        let dz = 1.0 / nz as f64;
        let (mu, eps) = (p.params.mu(), p.params.eps());
        let x: Vec<f64> = (0..nx).map(|j| j as f64 * dx).collect();
        let zx: Vec<f64> = x.iter().map(|&x| (p.zeta_x)(x)).collect();
        let h: Vec<f64> = x.iter().map(|&x| 1.0 + eps * (p.zeta)(x)).collect();
        let h_half = x.iter().map(|&x| 1.0 + eps * (p.zeta)(x + dx / 2.0)).collect();
        let mut q_half = vec![0.0; nz * nx];
        for k in 0..nz {
            let zp1 = 1.0 - (k as f64 + 0.5) * dz;
            for j in 0..nx {
                q_half[k * nx + j] = (1.0 + mu * eps * eps * zp1 * zp1 * zx[j] * zx[j]) / h[j];
            }
        }
        Self {
            nx,
            nz,
            dx,
            dz,
            mu,
            eps,
            zx,
            h_half,
            q_half,
        }
    }

    /// Applies the operator to a full field (`nz + 1` rows, row 0 the surface).
    fn apply_full(&self, phi: &[f64]) -> Vec<f64> {
        let (nx, nz, dx, dz, mu, eps) = (self.nx, self.nz, self.dx, self.dz, self.mu, self.eps);
        let at = |k: usize, j: usize| -> f64 {
            let k = if k > nz { 2 * nz - k } else { k };
            phi[k * nx + j]
        };
        let zp1 = |k: usize| 1.0 - k as f64 * dz;
        let mut out = vec![0.0; nz * nx];
        for k in 1..=nz {
            for j in 0..nx {
                let jp = (j + 1) % nx;
                let jm = (j + nx - 1) % nx;
                let c = at(k, j);
                let xx = self.h_half[j] * (at(k, jp) - c) - self.h_half[jm] * (c - at(k, jm));
                let mut v = mu * xx / (dx * dx);
                // μ ∂x(b φz), b = -ε(z+1)ζx
                let phiz = |jj: usize| (at(k - 1, jj) - at(k + 1, jj)) / (2.0 * dz);
                let b = |jj: usize| -eps * zp1(k) * self.zx[jj];
                v += mu * (b(jp) * phiz(jp) - b(jm) * phiz(jm)) / (2.0 * dx);
                // ∂z(-με(z+1)ζx φx); the flux is odd about the bottom.
                let flux = |kk: usize| {
                    let (kr, sign) = if kk > nz { (2 * nz - kk, -1.0) } else { (kk, 1.0) };
                    let phix = (phi[kr * nx + jp] - phi[kr * nx + jm]) / (2.0 * dx);
                    sign * (-mu * eps * zp1(kr) * self.zx[j] * phix)
                };
                v += (flux(k - 1) - flux(k + 1)) / (2.0 * dz);
                // ∂z(q φz)
                let q_up = self.q_half[(k - 1) * nx + j];
                let q_dn = if k < nz { self.q_half[k * nx + j] } else { q_up };
                v += (q_up * (at(k - 1, j) - c) - q_dn * (c - at(k + 1, j))) / (dz * dz);
                out[(k - 1) * nx + j] = v;
            }
        }
        out
    }

    /// Exact inverse of the constant-coefficient operator `μ δxx + δzz`.
    fn flat_inverse(&self, r: &[f64]) -> Vec<f64> {
        let (nx, nz, dx, dz) = (self.nx, self.nz, self.dx, self.dz);
        let mut rows: Vec<Vec<Complex64>> = (0..nz)
            .map(|k| {
                let mut row: Vec<Complex64> =
                    r[k * nx..(k + 1) * nx].iter().map(|&v| Complex64::new(v, 0.0)).collect();
                forward_in_place(&mut row);
                row
            })
            .collect();
        let idz2 = 1.0 / (dz * dz);
        let mut cp = vec![0.0; nz];
        let mut dp = vec![Complex64::new(0.0, 0.0); nz];
        #[allow(clippy::needless_range_loop)]
        for m in 0..nx {
            let lam = -4.0 * self.mu * (PI * m as f64 / nx as f64).sin().powi(2) / (dx * dx);
            // Rows i = 0..nz correspond to k = 1..=nz.
            for i in 0..nz {
                let lower = if i == nz - 1 { 2.0 * idz2 } else { idz2 };
                let diag = -2.0 * idz2 + lam;
                let upper = if i + 1 < nz { idz2 } else { 0.0 };
                let rhs = rows[i][m];
                if i == 0 {
                    cp[i] = upper / diag;
                    dp[i] = rhs / diag;
                } else {
                    let den = diag - lower * cp[i - 1];
                    cp[i] = upper / den;
                    dp[i] = (rhs - dp[i - 1] * lower) / den;
                }
            }
            rows[nz - 1][m] = dp[nz - 1];
            for i in (0..nz - 1).rev() {
                rows[i][m] = dp[i] - rows[i + 1][m] * cp[i];
            }
        }
        let mut out = vec![0.0; nz * nx];
        for (k, row) in rows.iter_mut().enumerate() {
            inverse_in_place(row);
            for j in 0..nx {
                out[k * nx + j] = row[j].re;
            }
        }
        out
    }
}

/// Solves on an `nx × nz` grid to relative residual `tol`.
pub fn solve_fd(p: &FdProblem, nx: usize, nz: usize, tol: f64) -> Result<FdSolution, KrylovError> {
    let c = Coefficients::new(p, nx, nz);
    let dx = p.length / nx as f64;
    let surface: Vec<f64> = (0..nx).map(|j| (p.psi)(j as f64 * dx)).collect();
    let mut base = vec![0.0; (nz + 1) * nx];
    base[..nx].copy_from_slice(&surface);
    let b: Vec<f64> = c.apply_full(&base).iter().map(|v| -v).collect();
    let apply = |u: &[f64]| {
        let mut full = vec![0.0; (nz + 1) * nx];
        full[nx..].copy_from_slice(u);
        c.apply_full(&full)
    };
    let sol = gmres(apply, |r| c.flat_inverse(r), &b, tol, 60, 2000)?;
    let mut values = base;
    values[nx..].copy_from_slice(&sol.x);
    Ok(FdSolution {
        nx,
        nz,
        values,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_case_matches_cosh_profile() {
        let params = Params::new(0.5, 0.0, 0.1).unwrap();
        let zero = |_: f64| 0.0;
        let psi = |x: f64| x.sin();
        let prob = FdProblem {
            length: 2.0 * PI,
            params,
            zeta: &zero,
            zeta_x: &zero,
            psi: &psi,
        };
        let mut errs = Vec::new();
        for (nx, nz) in [(32, 16), (64, 32)] {
            let sol = solve_fd(&prob, nx, nz, 1e-12).unwrap();
            let s = params.sqrt_mu();
            let mut err: f64 = 0.0;
            for k in 0..=nz {
                for j in 0..nx {
                    let x = j as f64 * 2.0 * PI / nx as f64;
                    let exact = ((sol.z(k) + 1.0) * s).cosh() / s.cosh() * x.sin();
                    err = err.max((sol.value(k, j) - exact).abs());
                }
            }
            errs.push(err);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{errs:?}");
    }
}
