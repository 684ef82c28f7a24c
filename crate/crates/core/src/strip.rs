//! Velocity potential in the straightened fluid strip `torus × [-1, 0]`.
//!
//! The variable-coefficient Laplace problem `∇^μ·P∇^μ φ = 0`, `φ(z=0) = ψ`,
//! `∂zφ(z=-1) = 0` is split as `(∂z² + μ∂x²)φ = -μεA[φ]` and solved by fixed
//! point iteration on the flat operator. Each flat solve is Fourier in `x` and
//! Chebyshev collocation in `z`.

use std::sync::Arc;

use log::debug;
use nalgebra::{DMatrix, DVector, Dyn, LU};
use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::chebyshev;
use crate::multipliers::{one_minus_f0_of_x, ParamError, Params, SymbolKind};
use crate::spectral::{forward_in_place, inverse_in_place, Grid1D, RealField};

pub const DEFAULT_NZ: usize = 24;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StripError {
    #[error("nz = {0} must be at least 8")]
    TooFewLevels(usize),
    #[error("non-cavitation violated: min depth {min_depth} < h_min {h_min}")]
    NonCavitation { min_depth: f64, h_min: f64 },
    #[error("surface fields live on different grids")]
    GridMismatch,
    #[error("strip iteration did not converge in {iterations} iterations (last increment {increment:.3e})")]
    NonConvergence { iterations: usize, increment: f64 },
    #[error("invalid tolerance {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Fourier × Chebyshev grid on the flat strip.
#[derive(Debug, Clone)]
pub struct StripGrid {
    horizontal: Grid1D,
    nz: usize,
    z: Vec<f64>,
    dz: DMatrix<f64>,
    dzz: DMatrix<f64>,
    weights: Vec<f64>,
}

impl StripGrid {
    pub fn new(horizontal: Grid1D, nz: usize) -> Result<Arc<Self>, StripError> {
        if nz < 8 {
            return Err(StripError::TooFewLevels(nz));
        }
        let dz = chebyshev::diff_matrix(nz);
        let dzz = &dz * &dz;
        Ok(Arc::new(Self {
            horizontal,
            nz,
            z: chebyshev::nodes(nz),
            dz,
            dzz,
            weights: chebyshev::clenshaw_curtis(nz),
        }))
    }

    pub fn horizontal(&self) -> &Grid1D {
        &self.horizontal
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn n(&self) -> usize {
        self.horizontal.n()
    }

    /// Vertical nodes, surface first.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Clenshaw–Curtis weights on `[-1, 0]`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dz(&self) -> &DMatrix<f64> {
        &self.dz
    }
}

/// `φ(x_j, z_m)` stored as an `nz × n` matrix.
#[derive(Debug, Clone)]
pub struct StripField {
    grid: Arc<StripGrid>,
    values: DMatrix<f64>,
}

impl StripField {
    pub fn from_matrix(grid: Arc<StripGrid>, values: DMatrix<f64>) -> Self {
        assert_eq!(values.shape(), (grid.nz, grid.n()), "strip field shape");
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<StripGrid> {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn level(&self, m: usize) -> RealField {
        RealField::new(
            *self.grid.horizontal(),
            self.values.row(m).iter().copied().collect(),
        )
        .expect("finite strip values")
    }

    pub fn surface(&self) -> RealField {
        self.level(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.amax()
    }

    pub fn sub(&self, other: &StripField) -> StripField {
        StripField::from_matrix(self.grid.clone(), &self.values - &other.values)
    }

    /// `‖∇^μ f‖₂` over the strip with Clenshaw–Curtis weights in `z`.
    pub fn grad_mu_norm(&self, mu: f64) -> f64 {
        let fx = dx_rows(&self.values, self.grid.horizontal());
        let fz = &self.grid.dz * &self.values;
        let dx = self.grid.horizontal().dx();
        let mut acc = 0.0;
        for m in 0..self.grid.nz {
            let w = self.grid.weights[m];
            for j in 0..self.grid.n() {
                acc += w * dx * (mu * fx[(m, j)].powi(2) + fz[(m, j)].powi(2));
            }
        }
        acc.sqrt()
    }
}

/// Surface elevation and potential trace at one instant.
#[derive(Debug, Clone)]
pub struct SurfaceData {
    zeta: RealField,
    psi: RealField,
    params: Params,
}

impl SurfaceData {
    pub fn new(zeta: RealField, psi: RealField, params: Params) -> Result<Self, StripError> {
        if zeta.grid() != psi.grid() {
            return Err(StripError::GridMismatch);
        }
        check_depth(&zeta, &params)?;
        Ok(Self { zeta, psi, params })
    }

    pub fn zeta(&self) -> &RealField {
        &self.zeta
    }

    pub fn psi(&self) -> &RealField {
        &self.psi
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn grid(&self) -> &Grid1D {
        self.zeta.grid()
    }

    /// `h = 1 + εζ`.
    pub fn depth(&self) -> RealField {
        depth(&self.zeta, &self.params)
    }
}

pub fn depth(zeta: &RealField, p: &Params) -> RealField {
    zeta.map(|z| 1.0 + p.eps() * z)
}

/// Fails when `1 + ε min ζ < h_min`.
pub fn check_depth(zeta: &RealField, p: &Params) -> Result<(), StripError> {
    let min_depth = 1.0 + p.eps() * zeta.min();
    if min_depth < p.h_min() {
        return Err(StripError::NonCavitation {
            min_depth,
            h_min: p.h_min(),
        });
    }
    Ok(())
}

/// Convergence record of one potential solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Last relative max-norm change between iterates.
    pub increment: f64,
    /// Relative max-norm residual of `h∇^μ·P∇^μφ` at interior nodes, scaled by `μ‖ψ_xx‖∞`.
    pub residual: f64,
    pub theta: f64,
}

fn apply_rows(m: &DMatrix<f64>, f: impl Fn(usize, Complex64) -> Complex64) -> DMatrix<f64> {
    let (rows, n) = m.shape();
    let mut out = DMatrix::zeros(rows, n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for r in 0..rows {
        for j in 0..n {
            buf[j] = Complex64::new(m[(r, j)], 0.0);
        }
        forward_in_place(&mut buf);
        for (j, c) in buf.iter_mut().enumerate() {
            *c = f(j, *c);
        }
        inverse_in_place(&mut buf);
        for j in 0..n {
            out[(r, j)] = buf[j].re;
        }
    }
    out
}

/// Spectral `∂x` of every row.
pub(crate) fn dx_rows(m: &DMatrix<f64>, grid: &Grid1D) -> DMatrix<f64> {
    apply_rows(m, |j, c| {
        if grid.is_nyquist(j) {
            Complex64::new(0.0, 0.0)
        } else {
            c * Complex64::new(0.0, grid.wavenumber(j))
        }
    })
}

fn dxx_rows(m: &DMatrix<f64>, grid: &Grid1D) -> DMatrix<f64> {
    apply_rows(m, |j, c| c * -grid.wavenumber(j).powi(2))
}

/// Multiplies every row pointwise by `f`.
fn scale_rows(m: &DMatrix<f64>, f: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= f[j];
    }
    out
}

/// Multiplies row `m` by `g[m]`.
fn scale_levels(m: &DMatrix<f64>, g: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (r, mut row) in out.row_iter_mut().enumerate() {
        row *= g[r];
    }
    out
}

/// Cached flat-strip solver for fixed grid and `μ`.
#[derive(Debug, Clone)]
pub struct StripSolver {
    grid: Arc<StripGrid>,
    mu: f64,
    lus: Vec<LU<f64, Dyn, Dyn>>,
}

impl StripSolver {
    pub fn new(grid: Arc<StripGrid>, mu: f64) -> Self {
        let nz = grid.nz;
        let lus = (0..=grid.n() / 2)
            .map(|j| {
                let xi = grid.horizontal.wavenumber(j);
                let mut a = grid.dzz.clone();
                for i in 0..nz {
                    a[(i, i)] -= mu * xi * xi;
                }
                for c in 0..nz {
                    a[(0, c)] = if c == 0 { 1.0 } else { 0.0 };
                    a[(nz - 1, c)] = grid.dz[(nz - 1, c)];
                }
                a.lu()
            })
            .collect();
        Self { grid, mu, lus }
    }

    pub fn grid(&self) -> &Arc<StripGrid> {
        &self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Solves `(∂z² + μ∂x²)φ = rhs` with `φ(0) = ψ`, `∂zφ(-1) = 0`. The top
    /// and bottom rows of `rhs` are ignored.
    pub fn flat_solve(&self, psi: &RealField, rhs: Option<&DMatrix<f64>>) -> DMatrix<f64> {
        let g = &self.grid;
        let (nz, n) = (g.nz, g.n());
        let mut hat = vec![vec![Complex64::new(0.0, 0.0); n]; nz];
        hat[0] = psi.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        forward_in_place(&mut hat[0]);
        if let Some(r) = rhs {
            for (m, row) in hat.iter_mut().enumerate().take(nz - 1).skip(1) {
                for j in 0..n {
                    row[j] = Complex64::new(r[(m, j)], 0.0);
                }
                forward_in_place(row);
            }
        }
        let mut re = DVector::zeros(nz);
        let mut im = DVector::zeros(nz);
        for j in 0..=n / 2 {
            for m in 0..nz {
                re[m] = hat[m][j].re;
                im[m] = hat[m][j].im;
            }
            re[nz - 1] = 0.0;
            im[nz - 1] = 0.0;
            let lu = &self.lus[j];
            lu.solve_mut(&mut re);
            lu.solve_mut(&mut im);
            for m in 0..nz {
                hat[m][j] = Complex64::new(re[m], im[m]);
                if j != 0 && j != n / 2 {
                    hat[m][n - j] = Complex64::new(re[m], -im[m]);
                }
            }
        }
        let mut out = DMatrix::zeros(nz, n);
        for (m, row) in hat.iter_mut().enumerate() {
            inverse_in_place(row);
            for j in 0..n {
                out[(m, j)] = row[j].re;
            }
        }
        out
    }

    /// `A[φ]` of the splitting `h∇^μ·P∇^μφ = (∂z² + μ∂x²)φ + μεA[φ]`.
    fn perturbation(&self, phi: &DMatrix<f64>, data: &SurfaceData) -> DMatrix<f64> {
        let g = &self.grid;
        let hg = g.horizontal();
        let eps = data.params.eps();
        let zeta = data.zeta.samples();
        let zx_field = data.zeta.derivative(1);
        let zx = zx_field.samples();
        let h = data.depth();
        let h = h.samples();
        let zp1: Vec<f64> = g.z.iter().map(|z| z + 1.0).collect();
        let zp1_sq: Vec<f64> = zp1.iter().map(|v| v * v).collect();

        let phi_x = dx_rows(phi, hg);
        let phi_z = &g.dz * phi;
        let phi_zz = &g.dzz * phi;
        let phi_xz = &g.dz * &phi_x;

        let t1 = dx_rows(&scale_rows(&phi_x, zeta), hg);
        let t2 = scale_rows(&dx_rows(&scale_rows(&phi_x, h), hg), zeta);
        let zx2: Vec<f64> = zx.iter().map(|v| eps * v * v).collect();
        let t3 = scale_rows(
            &(scale_levels(&phi_zz, &zp1_sq) + scale_levels(&phi_z, &zp1) * 2.0),
            &zx2,
        );
        let h_neg: Vec<f64> = h.iter().map(|v| -v).collect();
        let t4 = scale_levels(
            &scale_rows(&dx_rows(&scale_rows(&phi_z, zx), hg), &h_neg),
            &zp1,
        );
        let hzx: Vec<f64> = h.iter().zip(zx).map(|(a, b)| -a * b).collect();
        let t5 = scale_rows(&(&phi_x + scale_levels(&phi_xz, &zp1)), &hzx);
        t1 + t2 + t3 + t4 + t5
    }

    /// Fixed-point solve of the strip problem.
    pub fn solve(
        &self,
        data: &SurfaceData,
        tol: f64,
        max_iter: usize,
    ) -> Result<(StripField, SolveStats), StripError> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(StripError::BadTolerance(tol));
        }
        if data.grid() != self.grid.horizontal() {
            return Err(StripError::GridMismatch);
        }
        check_depth(&data.zeta, &data.params)?;
        let me = self.mu * data.params.eps();
        let mut phi = self.flat_solve(&data.psi, None);
        let mut stats = SolveStats {
            iterations: 0,
            increment: 0.0,
            residual: 0.0,
            theta: 1.0,
        };
        let scale = data.psi.max_abs();
        if me == 0.0 || scale == 0.0 {
            stats.residual = self.residual(&phi, data);
            return Ok((StripField::from_matrix(self.grid.clone(), phi), stats));
        }
        let mut theta = 1.0;
        let mut best = (phi.clone(), f64::INFINITY);
        let mut prev = f64::INFINITY;
        let mut slow = 0usize;
        for it in 1..=max_iter {
            let rhs = self.perturbation(&phi, data) * (-me);
            let cand = self.flat_solve(&data.psi, Some(&rhs));
            let next = &cand * theta + &phi * (1.0 - theta);
            let inc = (&next - &phi).amax() / scale.max(next.amax());
            phi = next;
            if !inc.is_finite() {
                break;
            }
            if inc <= tol {
                stats = SolveStats {
                    iterations: it,
                    increment: inc,
                    residual: self.residual(&phi, data),
                    theta,
                };
                debug!("strip solve converged: {stats:?}");
                return Ok((StripField::from_matrix(self.grid.clone(), phi), stats));
            }
            if inc < best.1 {
                best = (phi.clone(), inc);
            }
            slow = if inc > 0.9 * prev { slow + 1 } else { 0 };
            prev = inc;
            if slow >= 3 {
                theta = if theta == 1.0 { 0.7 } else { theta * 0.5 };
                if theta < 0.05 {
                    break;
                }
                debug!("strip iteration slow at {it}; relaxing to theta = {theta}");
                phi = best.0.clone();
                slow = 0;
                prev = f64::INFINITY;
            }
        }
        Err(StripError::NonConvergence {
            iterations: max_iter,
            increment: best.1,
        })
    }

    fn residual(&self, phi: &DMatrix<f64>, data: &SurfaceData) -> f64 {
        let g = &self.grid;
        let lap = &g.dzz * phi + dxx_rows(phi, g.horizontal()) * self.mu;
        let full = lap + self.perturbation(phi, data) * (self.mu * data.params.eps());
        let nz = g.nz;
        let interior = full.rows(1, nz - 2).amax();
        let scale = self.mu * data.psi.derivative(2).max_abs();
        if scale > 0.0 {
            interior / scale
        } else {
            interior
        }
    }
}

/// Solves for the potential on `grid`.
pub fn solve_potential(
    data: &SurfaceData,
    grid: &Arc<StripGrid>,
    tol: f64,
    max_iter: usize,
) -> Result<StripField, StripError> {
    StripSolver::new(grid.clone(), data.params.mu())
        .solve(data, tol, max_iter)
        .map(|(phi, _)| phi)
}

/// `V̄ = ∫ ∂xφ dz - (ε ∂xζ / h) ∫ (z+1) ∂zφ dz`.
pub fn compute_vbar(phi: &StripField, data: &SurfaceData) -> RealField {
    let g = phi.grid();
    let eps = data.params.eps();
    let phi_x = dx_rows(&phi.values, g.horizontal());
    let phi_z = &g.dz * &phi.values;
    let zx = data.zeta.derivative(1);
    let h = data.depth();
    let n = g.n();
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let mut a = 0.0;
        let mut b = 0.0;
        for m in 0..g.nz {
            let w = g.weights[m];
            a += w * phi_x[(m, j)];
            b += w * (g.z[m] + 1.0) * phi_z[(m, j)];
        }
        *o = a - eps * zx.samples()[j] / h.samples()[j] * b;
    }
    RealField::new(*g.horizontal(), out).expect("finite vbar")
}

/// `𝒢^μψ = -μ ∂x(h V̄)` from a converged potential.
pub fn dtn_from_potential(phi: &StripField, data: &SurfaceData) -> RealField {
    let vbar = compute_vbar(phi, data);
    (&data.depth() * &vbar).derivative(1).scale(-data.params.mu())
}

pub fn compute_dtn(
    data: &SurfaceData,
    grid: &Arc<StripGrid>,
    tol: f64,
) -> Result<RealField, StripError> {
    let phi = solve_potential(data, grid, tol, DEFAULT_MAX_ITER)?;
    Ok(dtn_from_potential(&phi, data))
}

fn per_level(grid: &Arc<StripGrid>, f: impl Fn(usize, f64) -> RealField) -> StripField {
    let (nz, n) = (grid.nz, grid.n());
    let mut values = DMatrix::zeros(nz, n);
    for m in 0..nz {
        let row = f(m, grid.z[m]);
        for j in 0..n {
            values[(m, j)] = row.samples()[j];
        }
    }
    StripField::from_matrix(grid.clone(), values)
}

fn f0_level(psi: &RealField, z: f64, p: &Params) -> RealField {
    psi.apply_table(&SymbolKind::F0 { z }.table(psi.grid(), p))
}

/// `(F0 - 1)ψ` at depth `z`.
fn f0_minus_one_level(psi: &RealField, z: f64, p: &Params) -> RealField {
    let table: Vec<f64> = psi
        .grid()
        .wavenumbers()
        .iter()
        .map(|&xi| -one_minus_f0_of_x(z, p.x(xi)))
        .collect();
    psi.apply_table(&table)
}

/// `φ0 = F0ψ`.
pub fn phi0(data: &SurfaceData, grid: &Arc<StripGrid>) -> StripField {
    per_level(grid, |_, z| f0_level(&data.psi, z, &data.params))
}

/// `φ_app = F0ψ - μεζ(1+h)(z²/2 + z)∂x²ψ`.
pub fn phi_app(data: &SurfaceData, grid: &Arc<StripGrid>) -> StripField {
    let p = &data.params;
    let h = data.depth();
    let corr = &(&data.zeta * &h.map(|v| 1.0 + v)) * &data.psi.derivative(2);
    per_level(grid, |_, z| {
        f0_level(&data.psi, z, p).axpy(-p.mu() * p.eps() * (z * z / 2.0 + z), &corr)
    })
}

/// `φ̃_app = ψ + h²(F0 - 1)ψ`.
pub fn phi_tilde_app(data: &SurfaceData, grid: &Arc<StripGrid>) -> StripField {
    let h = data.depth();
    let h2 = &h * &h;
    per_level(grid, |_, z| {
        &data.psi + &(&h2 * &f0_minus_one_level(&data.psi, z, &data.params))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VbarApprox {
    /// `F1 ∂xψ`.
    F1Grad,
    /// `F1∂xψ + (με/3)[h ∂xζ ∂x²ψ + ∂x(ζ(1+h)∂x²ψ)]`.
    Vapp,
    /// `∂xψ + (μ/(3h)) ∂x(h³ F2 ∂x²ψ)`.
    VtildeApp,
}

pub fn vbar_approx(kind: VbarApprox, data: &SurfaceData) -> RealField {
    let p = &data.params;
    let g = data.grid();
    let psi_x = data.psi.derivative(1);
    let psi_xx = data.psi.derivative(2);
    let h = data.depth();
    match kind {
        VbarApprox::F1Grad => psi_x.apply_table(&SymbolKind::F1.table(g, p)),
        VbarApprox::Vapp => {
            let base = psi_x.apply_table(&SymbolKind::F1.table(g, p));
            let a = (&(&h * &data.zeta.derivative(1)) * &psi_xx).dealias();
            let b = (&(&data.zeta * &h.map(|v| 1.0 + v)) * &psi_xx)
                .dealias()
                .derivative(1);
            base.axpy(p.mu() * p.eps() / 3.0, &(&a + &b))
        }
        VbarApprox::VtildeApp => {
            let h3 = h.map(|v| v * v * v);
            let inner = (&h3 * &psi_xx.apply_table(&SymbolKind::F2.table(g, p)))
                .dealias()
                .derivative(1);
            psi_x.axpy(p.mu() / 3.0, &inner.zip_map(&h, |a, b| a / b).dealias())
        }
    }
}

/// `V̄ - (μ/(3h)) ∂x(h³ F3 ∂xV̄)`, the recovery of `∂xψ` from `V̄`.
pub fn gradpsi_from_vbar(vbar: &RealField, zeta: &RealField, p: &Params) -> RealField {
    let h = depth(zeta, p);
    let h3 = h.map(|v| v * v * v);
    let inner = (&h3 * &vbar.derivative(1).apply_table(&SymbolKind::F3.table(vbar.grid(), p)))
        .dealias()
        .derivative(1);
    vbar.axpy(-p.mu() / 3.0, &inner.zip_map(&h, |a, b| a / b).dealias())
}
