//! Numerical experiments behind the CLI subcommands and the acceptance suite.
//!
//! Each function returns raw measurements; pass/fail thresholds live with the caller.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fulldisp_core::chebyshev;
use fulldisp_core::conserved::{
    grad_app1, grad_app2, grad_wb, hamiltonian_app1, hamiltonian_app2, hamiltonian_wb,
    hamiltonian_ww, random_directions, random_smooth, variational_check,
};
use fulldisp_core::fd_oracle::{solve_fd, FdProblem};
use fulldisp_core::krylov::KrylovError;
use fulldisp_core::models::{
    apply_dit, apply_i, consistency_residual, measured_omega_squared, solve_i,
    ConsistencyResidual, Dispersion, Model, ModelError, ModelKind, Ops, StateForm, StripSettings,
    WaveStatePsi, WaveStateV,
};
use fulldisp_core::multipliers::{
    check_taylor_bounds, f1_of_x, f2_of_x, f2_bound_scan, f3_bound_scan, f3_of_x,
    inv_f1_bound_scan, log_grid, BoundScan, ParamError, Params, SymbolKind, TaylorReport,
};
use fulldisp_core::spectral::{Grid1D, RealField, SpectralError};
use fulldisp_core::strip::{
    compute_vbar, dtn_from_potential, gradpsi_from_vbar, vbar_approx, StripError, StripGrid,
    StripSolver, SurfaceData, VbarApprox,
};
use fulldisp_core::timeint::{integrate, NullSink, PsiDynamics, StepperConfig, TimeIntError, VDynamics};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Strip(#[from] StripError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(transparent)]
    Time(#[from] TimeIntError),
}

type Result<T> = std::result::Result<T, CheckError>;

/// `(μ, ε)` pairs in μ-major order.
pub fn sweep_points(mus: &[f64], epss: &[f64]) -> Vec<(f64, f64)> {
    mus.iter()
        .flat_map(|&m| epss.iter().map(move |&e| (m, e)))
        .collect()
}

/// Evaluates `f` at every point on the current rayon pool, keeping input order.
pub fn par_map<T: Send>(
    points: &[(f64, f64)],
    f: impl Fn(f64, f64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    points.par_iter().map(|&(m, e)| f(m, e)).collect()
}

/// `ζ = a cos x`, `ψ = sin x` on the unit-wavenumber torus.
pub fn cosine_reference(grid: Grid1D, a: f64) -> (RealField, RealField) {
    let k = 2.0 * PI / grid.length();
    (
        RealField::from_fn(grid, |x| a * (k * x).cos()),
        RealField::from_fn(grid, |x| (k * x).sin()),
    )
}

/// `ζ = a (cos x + cos 2x)`, `ψ = sin x`.
///
/// With a single-mode `ζ`, the cubic term `∫ζ Q(ψ, ψ)` of any energy vanishes
/// because `Q(sin x, sin x)` only holds modes 0 and 2; this state avoids that.
pub fn two_mode_reference(grid: Grid1D, a: f64) -> (RealField, RealField) {
    let k = 2.0 * PI / grid.length();
    (
        RealField::from_fn(grid, |x| a * ((k * x).cos() + (2.0 * k * x).cos())),
        RealField::from_fn(grid, |x| (k * x).sin()),
    )
}

// ---------------------------------------------------------------------------
// Strip solver

/// Largest `√μ|ξ|` whose surface boundary layer a 24-level Chebyshev column resolves to 1e-10.
pub const FLAT_RESOLUTION_LIMIT: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct FlatDtn {
    pub mu: f64,
    pub modes_checked: usize,
    pub k_max: usize,
    pub max_rel_err: f64,
    pub elapsed: Duration,
}

/// Single-mode flat-bottom DtN against `√μ|ξ| tanh(√μ|ξ|)` for every grid mode
/// with `√μ|ξ| ≤ FLAT_RESOLUTION_LIMIT`.
pub fn flat_dtn(mu: f64, n: usize, nz: usize, tol: f64) -> Result<FlatDtn> {
    let start = Instant::now();
    let grid = Grid1D::periodic(n)?;
    let p = Params::new(mu, 0.0, 0.1)?;
    let solver = StripSolver::new(StripGrid::new(grid, nz)?, mu);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut k_max = 0;
    for k in 1..n / 2 {
        let xi = k as f64;
        let x = p.sqrt_mu() * xi;
        if x > FLAT_RESOLUTION_LIMIT {
            break;
        }
        let psi = RealField::from_fn(grid, |t| (xi * t + 0.3).cos());
        let data = SurfaceData::new(RealField::zeros(grid), psi.clone(), p)?;
        let (phi, _) = solver.solve(&data, tol, 50)?;
        let g = dtn_from_potential(&phi, &data);
        let symbol = x * x.tanh();
        worst = worst.max((&g - &psi.scale(symbol)).max_abs() / symbol);
        checked += 1;
        k_max = k;
    }
    Ok(FlatDtn {
        mu,
        modes_checked: checked,
        k_max,
        max_rel_err: worst,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone)]
pub struct FdEquivalence {
    pub resolutions: Vec<(usize, usize)>,
    pub gaps: Vec<f64>,
    /// `log2(gap_i / gap_{i+1})`.
    pub orders: Vec<f64>,
    pub fd_iterations: Vec<usize>,
}

/// Max-norm gap between the spectral strip potential and second-order finite
/// differences at each `(nx, nz)` in `levels` (each level doubling the last).
pub fn fd_equivalence(
    mu: f64,
    eps: f64,
    n: usize,
    nz: usize,
    levels: &[(usize, usize)],
) -> Result<FdEquivalence> {
    let grid = Grid1D::periodic(n)?;
    let p = Params::new(mu, eps, 0.1)?;
    let zeta_f = |x: f64| 0.5 * x.cos() + 0.2 * (2.0 * x).sin();
    let zeta_x = |x: f64| -0.5 * x.sin() + 0.4 * (2.0 * x).cos();
    let psi_f = |x: f64| x.sin() + 0.3 * (2.0 * x).cos();
    let data = SurfaceData::new(RealField::from_fn(grid, zeta_f), RealField::from_fn(grid, psi_f), p)?;
    let sg = StripGrid::new(grid, nz)?;
    let (phi, _) = StripSolver::new(sg.clone(), mu).solve(&data, 1e-13, 400)?;
    let levels_spec: Vec<_> = (0..nz).map(|m| phi.level(m).to_spectral()).collect();
    let problem = FdProblem {
        length: 2.0 * PI,
        params: p,
        zeta: &zeta_f,
        zeta_x: &zeta_x,
        psi: &psi_f,
    };
    let mut gaps = Vec::new();
    let mut iters = Vec::new();
    for &(nx, nzf) in levels {
        let fd = solve_fd(&problem, nx, nzf, 1e-12)?;
        let mut gap: f64 = 0.0;
        for j in 0..nx {
            let x = j as f64 * 2.0 * PI / nx as f64;
            let column: Vec<f64> = levels_spec.iter().map(|s| s.eval_at(x)).collect();
            for k in 0..=nzf {
                let cheb = chebyshev::interpolate(&column, fd.z(k));
                gap = gap.max((fd.value(k, j) - cheb).abs());
            }
        }
        gaps.push(gap);
        iters.push(fd.iterations);
    }
    let orders = gaps.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(FdEquivalence {
        resolutions: levels.to_vec(),
        gaps,
        orders,
        fd_iterations: iters,
    })
}

/// The four `V̄` approximation errors (L² norms) at one sweep point.
#[derive(Debug, Clone, Copy)]
pub struct VbarPoint {
    pub mu: f64,
    pub eps: f64,
    pub f1_grad: f64,
    pub vapp: f64,
    pub vtilde: f64,
    pub recovery: f64,
}

impl VbarPoint {
    pub const NAMES: [&'static str; 4] = ["vbar-f1grad", "vbar-app", "vbar-tilde-app", "gradpsi-recovery"];

    pub fn values(&self) -> [f64; 4] {
        [self.f1_grad, self.vapp, self.vtilde, self.recovery]
    }
}

pub fn vbar_point(mu: f64, eps: f64, amplitude: f64, n: usize, strip: StripSettings) -> Result<VbarPoint> {
    let grid = Grid1D::periodic(n)?;
    let p = Params::new(mu, eps, 0.1)?;
    let (zeta, psi) = cosine_reference(grid, amplitude);
    let data = SurfaceData::new(zeta.clone(), psi.clone(), p)?;
    let (phi, _) = StripSolver::new(StripGrid::new(grid, strip.nz)?, mu).solve(&data, strip.tol, strip.max_iter)?;
    let vbar = compute_vbar(&phi, &data);
    let err = |k| (&vbar - &vbar_approx(k, &data)).l2_norm();
    Ok(VbarPoint {
        mu,
        eps,
        f1_grad: err(VbarApprox::F1Grad),
        vapp: err(VbarApprox::Vapp),
        vtilde: err(VbarApprox::VtildeApp),
        recovery: (&gradpsi_from_vbar(&vbar, &zeta, &p) - &psi.derivative(1)).l2_norm(),
    })
}

// ---------------------------------------------------------------------------
// Consistency

#[derive(Debug, Clone, Copy)]
pub struct ConsistencyPoint {
    pub model: ModelKind,
    pub mu: f64,
    pub eps: f64,
    pub residual: ConsistencyResidual,
}

/// Residuals of every model in `models` at the cosine reference state.
pub fn consistency_point(
    models: &[ModelKind],
    mu: f64,
    eps: f64,
    amplitude: f64,
    n: usize,
    strip: StripSettings,
    differencing_dt: f64,
) -> Result<Vec<ConsistencyPoint>> {
    let grid = Grid1D::periodic(n)?;
    let p = Params::new(mu, eps, 0.1)?;
    let ops = Ops::new(grid, p);
    let reference = Model::new(ModelKind::WwRef, ops.clone(), strip)?;
    let (zeta, psi) = cosine_reference(grid, amplitude);
    let data = SurfaceData::new(zeta, psi, p)?;
    models
        .iter()
        .map(|&kind| {
            let m = Model::new(kind, ops.clone(), strip)?;
            let residual = consistency_residual(&m, &reference, &data, differencing_dt)?;
            Ok(ConsistencyPoint {
                model: kind,
                mu,
                eps,
                residual,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Hamiltonians

#[derive(Debug, Clone, Copy)]
pub struct HamiltonianPoint {
    pub mu: f64,
    pub eps: f64,
    pub ww: f64,
    pub app1: f64,
    pub app2: f64,
}

pub fn hamiltonian_point(
    mu: f64,
    eps: f64,
    zeta: &RealField,
    psi: &RealField,
    strip: StripSettings,
) -> Result<HamiltonianPoint> {
    let grid = *zeta.grid();
    let p = Params::new(mu, eps, 0.1)?;
    let ops = Ops::new(grid, p);
    let data = SurfaceData::new(zeta.clone(), psi.clone(), p)?;
    let solver = StripSolver::new(StripGrid::new(grid, strip.nz)?, mu);
    let s = WaveStatePsi {
        zeta: zeta.clone(),
        psi: psi.clone(),
    };
    Ok(HamiltonianPoint {
        mu,
        eps,
        ww: hamiltonian_ww(&data, &solver, strip.tol, strip.max_iter)?,
        app1: hamiltonian_app1(&ops, &s, Dispersion::Full),
        app2: hamiltonian_app2(&ops, &s, Dispersion::Full)?,
    })
}

// ---------------------------------------------------------------------------
// Dispersion

#[derive(Debug, Clone, Copy)]
pub struct DispersionRow {
    pub model: ModelKind,
    pub k: i64,
    pub xi: f64,
    pub omega_measured: f64,
    /// `|ξ|√F1(ξ)`.
    pub omega_exact: f64,
    pub rel_err: f64,
}

/// Signed square root, so that unstable branches (`ω² < 0`) stay visible.
fn signed_sqrt(v: f64) -> f64 {
    v.signum() * v.abs().sqrt()
}

fn dispersion_row(model: &Model, k: i64, delta: f64) -> Result<DispersionRow> {
    let g = model.ops().grid();
    let xi = 2.0 * PI * k as f64 / g.length();
    let measured = signed_sqrt(measured_omega_squared(model, k, delta)?);
    let exact = xi * SymbolKind::F1.eval(xi, model.params()).sqrt();
    Ok(DispersionRow {
        model: model.kind(),
        k,
        xi,
        omega_measured: measured,
        omega_exact: exact,
        rel_err: (measured - exact).abs() / exact,
    })
}

/// Measured against exact frequency at every dealiased mode `1 ≤ k ≤ n/3`.
pub fn dispersion_rows(
    kind: ModelKind,
    n: usize,
    mu: f64,
    eps: f64,
    delta: f64,
    strip: StripSettings,
) -> Result<Vec<DispersionRow>> {
    let grid = Grid1D::periodic(n)?;
    let p = Params::new(mu, eps, 0.1)?;
    let model = Model::new(kind, Ops::new(grid, p), strip)?;
    let mut rows = Vec::new();
    for k in 1..=grid.dealias_cutoff() {
        if kind == ModelKind::WwRef && p.sqrt_mu() * k as f64 > FLAT_RESOLUTION_LIMIT {
            break;
        }
        rows.push(dispersion_row(&model, k, delta)?);
    }
    Ok(rows)
}

/// Frequency at `√μ|ξ| = 3`, measured on a torus of length `2π√μ/3` at `k = 1`.
pub fn dispersion_at_x3(kind: ModelKind, mu: f64, delta: f64, strip: StripSettings) -> Result<DispersionRow> {
    let grid = Grid1D::new(16, 2.0 * PI * mu.sqrt() / 3.0)?;
    let p = Params::new(mu, 0.1, 0.1)?;
    let model = Model::new(kind, Ops::new(grid, p), strip)?;
    dispersion_row(&model, 1, delta)
}

// ---------------------------------------------------------------------------
// Time integration

#[derive(Debug, Clone)]
pub struct ConservationRun {
    pub model: ModelKind,
    pub steps: usize,
    /// `max_t |M(t) - M(0)| / ∫|ζ0|`.
    pub mass_drift: f64,
    /// `max_t |E(t) - E(0)| / |E(0)|`.
    pub energy_drift: f64,
    pub elapsed: Duration,
}

fn v_state(model: &Model, zeta: &RealField, vbar: &RealField) -> WaveStateV {
    WaveStateV {
        zeta: zeta.clone(),
        w: model.w_from_v(zeta, vbar),
    }
}

/// Runs `steps` RK4 steps of size `dt` recording diagnostics every `record_every` steps.
pub fn conservation_run(
    model: &Model,
    zeta: &RealField,
    second: &RealField,
    dt: f64,
    steps: usize,
    record_every: usize,
) -> Result<ConservationRun> {
    let start = Instant::now();
    let cfg = StepperConfig::new(dt, dt * steps as f64, record_every)?;
    let mut rows = Vec::new();
    match model.kind().form() {
        StateForm::Psi => {
            let s = WaveStatePsi {
                zeta: zeta.clone(),
                psi: second.clone(),
            };
            integrate(&PsiDynamics(model), s, 0.0, &cfg, &mut rows).map_err(|f| f.error)?;
        }
        StateForm::V => {
            integrate(&VDynamics(model), v_state(model, zeta, second), 0.0, &cfg, &mut rows)
                .map_err(|f| f.error)?;
        }
    }
    let scale = zeta.map(f64::abs).integrate();
    let (m0, e0) = (rows[0].mass, rows[0].energy);
    Ok(ConservationRun {
        model: model.kind(),
        steps,
        mass_drift: rows.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max) / scale,
        energy_drift: rows.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max) / e0.abs(),
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone)]
pub struct SelfConvergence {
    pub model: ModelKind,
    pub dt: f64,
    /// `‖u_dt - u_dt/2‖`, `‖u_dt/2 - u_dt/4‖`.
    pub diffs: [f64; 2],
    pub order: f64,
}

/// RK4 order from a `dt`, `dt/2`, `dt/4` triple up to `t_end`.
pub fn self_convergence(
    model: &Model,
    zeta: &RealField,
    second: &RealField,
    dt: f64,
    t_end: f64,
) -> Result<SelfConvergence> {
    let run = |h: f64| -> Result<(RealField, RealField)> {
        let cfg = StepperConfig::new(h, t_end, usize::MAX)?;
        Ok(match model.kind().form() {
            StateForm::Psi => {
                let s = WaveStatePsi {
                    zeta: zeta.clone(),
                    psi: second.clone(),
                };
                let o = integrate(&PsiDynamics(model), s, 0.0, &cfg, &mut NullSink).map_err(|f| f.error)?;
                (o.state.zeta, o.state.psi)
            }
            StateForm::V => {
                let o = integrate(&VDynamics(model), v_state(model, zeta, second), 0.0, &cfg, &mut NullSink)
                    .map_err(|f| f.error)?;
                (o.state.zeta, o.state.w)
            }
        })
    };
    let a = run(dt)?;
    let b = run(dt / 2.0)?;
    let c = run(dt / 4.0)?;
    let d = |x: &(RealField, RealField), y: &(RealField, RealField)| (&x.0 - &y.0).l2_norm() + (&x.1 - &y.1).l2_norm();
    let diffs = [d(&a, &b), d(&b, &c)];
    Ok(SelfConvergence {
        model: model.kind(),
        dt,
        diffs,
        order: (diffs[0] / diffs[1]).log2(),
    })
}

// ---------------------------------------------------------------------------
// Gradients and operator algebra

fn gradient_state(grid: Grid1D) -> WaveStatePsi {
    WaveStatePsi {
        zeta: RealField::from_fn(grid, |x| 0.5 * x.cos() + 0.1 * (2.0 * x).sin()),
        psi: RealField::from_fn(grid, |x| x.sin() + 0.2 * (3.0 * x).cos()),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GradientCheck {
    pub app1: f64,
    pub app2: f64,
    pub wb: f64,
}

/// Worst relative gradient error of each approximate Hamiltonian, dealiasing off.
pub fn gradient_check(
    n: usize,
    mu: f64,
    eps: f64,
    seed: u64,
    directions: usize,
    h_fd: f64,
) -> Result<GradientCheck> {
    let grid = Grid1D::periodic(n)?;
    let ops = Ops::new(grid, Params::new(mu, eps, 0.1)?).with_dealias(false);
    let s = gradient_state(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = random_directions(grid, directions, &mut rng);
    let d = Dispersion::Full;
    let app1 = variational_check(
        |u| Ok::<_, ModelError>(hamiltonian_app1(&ops, u, d)),
        &grad_app1(&ops, &s, d),
        &s,
        &dirs,
        h_fd,
    )?;
    let app2 = variational_check(|u| hamiltonian_app2(&ops, u, d), &grad_app2(&ops, &s, d)?, &s, &dirs, h_fd)?;
    let wb = variational_check(
        |u| Ok::<_, ModelError>(hamiltonian_wb(&ops, u, d)),
        &grad_wb(&ops, &s, d),
        &s,
        &dirs,
        h_fd,
    )?;
    Ok(GradientCheck { app1, app2, wb })
}

#[derive(Debug, Clone)]
pub struct OperatorAlgebra {
    /// Worst `|⟨IV1,V2⟩ - ⟨V1,IV2⟩| / (‖IV1‖‖V2‖)`.
    pub i_asymmetry: f64,
    /// Worst `‖solve_I(apply(V)) - V‖ / (tol ‖V‖)`.
    pub round_trip_over_tol: f64,
    pub dit_min_rayleigh: f64,
    pub h_min: f64,
    /// `(μ, ‖2√F3 h³ √F3 V - (h³F3V + F3 h³V)‖)`.
    pub symmetrization_gap: Vec<(f64, f64)>,
}

pub fn operator_algebra(
    n: usize,
    mu: f64,
    eps: f64,
    gap_mus: &[f64],
    seed: u64,
    samples: usize,
    tol: f64,
) -> Result<OperatorAlgebra> {
    let grid = Grid1D::periodic(n)?;
    let p = Params::new(mu, eps, 0.1)?;
    let ops = Ops::new(grid, p).with_krylov(tol, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = n / 4;
    let zeta = random_smooth(grid, 4, &mut rng).scale(1.5);
    let h = ops.depth(&zeta);
    let mut asym: f64 = 0.0;
    let mut trip: f64 = 0.0;
    let mut rayleigh = f64::INFINITY;
    for _ in 0..samples {
        let v1 = random_smooth(grid, kmax, &mut rng);
        let v2 = random_smooth(grid, kmax, &mut rng);
        let a = apply_i(&ops, &h, &v1, Dispersion::Full);
        let b = apply_i(&ops, &h, &v2, Dispersion::Full);
        asym = asym.max((a.dot(&v2) - v1.dot(&b)).abs() / (a.l2_norm() * v2.l2_norm()));
        let w = a.zip_map(&h, |x, y| x / y);
        let back = solve_i(&ops, &h, &w, Dispersion::Full)?;
        trip = trip.max((&back - &v1).l2_norm() / (tol * v1.l2_norm()));
        let high = RealField::from_fn(grid, |x| (kmax as f64 * x).sin()).axpy(1.0, &v1);
        for v in [&v1, &v2, &high] {
            rayleigh = rayleigh.min(v.dot(&apply_dit(&ops, &h, v)) / v.dot(v));
        }
    }
    let v = random_smooth(grid, kmax, &mut rng);
    let mut gap = Vec::new();
    for &m in gap_mus {
        let q = Params::new(m, eps, 0.1)?;
        let f3 = SymbolKind::F3.table(&grid, &q);
        let sf3 = SymbolKind::SqrtF3.table(&grid, &q);
        let h3 = h.map(|x| x * x * x);
        let sym = (&h3 * &v.apply_table(&sf3)).apply_table(&sf3).scale(2.0);
        let pair = &(&h3 * &v.apply_table(&f3)) + &(&h3 * &v).apply_table(&f3);
        gap.push((m, (&sym - &pair).l2_norm()));
    }
    Ok(OperatorAlgebra {
        i_asymmetry: asym,
        round_trip_over_tol: trip,
        dit_min_rayleigh: rayleigh,
        h_min: h.min(),
        symmetrization_gap: gap,
    })
}

// ---------------------------------------------------------------------------
// Multipliers

#[derive(Debug, Clone)]
pub struct MultiplierReport {
    /// `max |F1 - (1 - (x²/3) F2)|`.
    pub f2_identity: f64,
    /// `max |F3 F1 - F2|`.
    pub f3_product: f64,
    pub f3_bound: BoundScan,
    pub f2_bound: BoundScan,
    pub inv_f1_bound: BoundScan,
    pub taylor: TaylorReport,
}

pub const BOUND_MUS: [f64; 4] = [0.01, 0.1, 1.0, 4.0];

pub fn multiplier_report() -> Result<MultiplierReport> {
    let xs = log_grid(1e-6, 1e4, 4001);
    let f2_identity = xs
        .iter()
        .map(|&x| (f1_of_x(x) - (1.0 - x * x / 3.0 * f2_of_x(x))).abs())
        .fold(0.0, f64::max);
    let f3_product = xs
        .iter()
        .map(|&x| (f3_of_x(x) * f1_of_x(x) - f2_of_x(x)).abs())
        .fold(0.0, f64::max);
    let xis = log_grid(1e-6, 1e4, 2001);
    let p = Params::new(1.0, 0.0, 0.1)?;
    Ok(MultiplierReport {
        f2_identity,
        f3_product,
        f3_bound: f3_bound_scan(&BOUND_MUS, &xis),
        f2_bound: f2_bound_scan(&BOUND_MUS, &xis),
        inv_f1_bound: inv_f1_bound_scan(&BOUND_MUS, &xis),
        taylor: check_taylor_bounds(&p, 2.0, 200)?,
    })
}
