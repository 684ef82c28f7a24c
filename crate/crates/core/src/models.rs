//! Right-hand sides of the evolution systems.
//!
//! Every system is written in one space dimension with `h = 1 + εζ`.
//! Classical baselines reuse the same code with the multipliers replaced by
//! the identity ([`Dispersion::Classical`]).

use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::krylov::{gmres, pcg, KrylovError};
use crate::multipliers::{Params, SymbolKind};
use crate::spectral::{Grid1D, RealField};
use crate::strip::{
    check_depth, compute_vbar, dtn_from_potential, StripError, StripGrid, StripSolver, SurfaceData,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("operator Id + μT[h] not invertible at mu = {mu}, eps = {eps}, |zeta|_inf = {zeta_inf}: {source}")]
    Invertibility {
        mu: f64,
        eps: f64,
        zeta_inf: f64,
        source: KrylovError,
    },
    #[error("DIT operator solve failed: {0}")]
    DitSolve(KrylovError),
    #[error(transparent)]
    Strip(#[from] StripError),
    #[error("model {kind} does not evolve a {form:?}-form state")]
    WrongForm { kind: ModelKind, form: StateForm },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    WwRef,
    Fdgn1,
    Fdgn2,
    FdgnDit,
    Wb,
    Gn1Classical,
    Gn2Classical,
    WbClassical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateForm {
    /// `(ζ, ψ)`.
    Psi,
    /// `(ζ, W)` with `W = (Id + μT[h])V̄`.
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispersion {
    Full,
    /// Every `F1`, `F2`, `F3` replaced by the identity.
    Classical,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::WwRef,
        ModelKind::Fdgn1,
        ModelKind::Fdgn2,
        ModelKind::FdgnDit,
        ModelKind::Wb,
        ModelKind::Gn1Classical,
        ModelKind::Gn2Classical,
        ModelKind::WbClassical,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            ModelKind::WwRef => "WW-ref",
            ModelKind::Fdgn1 => "FDGN1",
            ModelKind::Fdgn2 => "FDGN2",
            ModelKind::FdgnDit => "FDGN-DIT",
            ModelKind::Wb => "WB",
            ModelKind::Gn1Classical => "GN1-classical",
            ModelKind::Gn2Classical => "GN2-classical",
            ModelKind::WbClassical => "WB-classical",
        }
    }

    pub fn form(&self) -> StateForm {
        match self {
            ModelKind::Fdgn2 | ModelKind::FdgnDit | ModelKind::Gn2Classical => StateForm::V,
            _ => StateForm::Psi,
        }
    }

    pub fn dispersion(&self) -> Dispersion {
        match self {
            ModelKind::Gn1Classical | ModelKind::Gn2Classical | ModelKind::WbClassical => {
                Dispersion::Classical
            }
            _ => Dispersion::Full,
        }
    }

    pub fn is_classical(&self) -> bool {
        self.dispersion() == Dispersion::Classical
    }

    /// `ω(ξ)²` of the linearization about rest.
    pub fn omega_squared(&self, xi: f64, p: &Params) -> f64 {
        let xi2 = xi * xi;
        let mu = p.mu();
        match self {
            ModelKind::Gn1Classical => xi2 * (1.0 - mu * xi2 / 3.0),
            ModelKind::Gn2Classical => xi2 / (1.0 + mu * xi2 / 3.0),
            ModelKind::WbClassical => xi2,
            _ => xi2 * SymbolKind::F1.eval(xi, p),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown model '{0}'")]
pub struct UnknownModel(pub String);

impl FromStr for ModelKind {
    type Err = UnknownModel;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownModel(s.to_string()))
    }
}

/// Common interface of the two prognostic forms.
pub trait WaveState: Clone + Send + Sync {
    fn zeta(&self) -> &RealField;
    fn second(&self) -> &RealField;
    fn from_parts(zeta: RealField, second: RealField) -> Self;

    /// `self + a * other`.
    fn axpy(&self, a: f64, other: &Self) -> Self {
        Self::from_parts(
            self.zeta().axpy(a, other.zeta()),
            self.second().axpy(a, other.second()),
        )
    }

    fn is_finite(&self) -> bool {
        self.zeta().is_finite() && self.second().is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveStatePsi {
    pub zeta: RealField,
    pub psi: RealField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveStateV {
    pub zeta: RealField,
    pub w: RealField,
}

impl WaveState for WaveStatePsi {
    fn zeta(&self) -> &RealField {
        &self.zeta
    }
    fn second(&self) -> &RealField {
        &self.psi
    }
    fn from_parts(zeta: RealField, psi: RealField) -> Self {
        Self { zeta, psi }
    }
}

impl WaveState for WaveStateV {
    fn zeta(&self) -> &RealField {
        &self.zeta
    }
    fn second(&self) -> &RealField {
        &self.w
    }
    fn from_parts(zeta: RealField, w: RealField) -> Self {
        Self { zeta, w }
    }
}

#[derive(Debug, Clone, Copy)]
enum Sym {
    F1,
    F2,
    F3,
    SqrtF3,
}

/// Grid, parameters, and tabulated multipliers shared by all right-hand sides.
#[derive(Debug, Clone)]
pub struct Ops {
    grid: Grid1D,
    params: Params,
    dealias: bool,
    krylov_tol: f64,
    krylov_max_iter: usize,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    sqrt_f3: Vec<f64>,
    xi: Vec<f64>,
}

impl Ops {
    pub fn new(grid: Grid1D, params: Params) -> Self {
        Self {
            grid,
            params,
            dealias: true,
            krylov_tol: 1e-12,
            krylov_max_iter: 500,
            f1: SymbolKind::F1.table(&grid, &params),
            f2: SymbolKind::F2.table(&grid, &params),
            f3: SymbolKind::F3.table(&grid, &params),
            sqrt_f3: SymbolKind::SqrtF3.table(&grid, &params),
            xi: grid.wavenumbers(),
        }
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn with_krylov(mut self, tol: f64, max_iter: usize) -> Self {
        self.krylov_tol = tol;
        self.krylov_max_iter = max_iter;
        self
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn dealias_enabled(&self) -> bool {
        self.dealias
    }

    pub fn krylov_tol(&self) -> f64 {
        self.krylov_tol
    }

    pub fn depth(&self, zeta: &RealField) -> RealField {
        crate::strip::depth(zeta, &self.params)
    }

    fn filter(&self, f: RealField) -> RealField {
        if self.dealias {
            f.dealias()
        } else {
            f
        }
    }

    fn prod(&self, a: &RealField, b: &RealField) -> RealField {
        self.filter(a * b)
    }

    fn sym(&self, s: Sym, d: Dispersion, f: &RealField) -> RealField {
        if d == Dispersion::Classical {
            return f.clone();
        }
        let table = match s {
            Sym::F1 => &self.f1,
            Sym::F2 => &self.f2,
            Sym::F3 => &self.f3,
            Sym::SqrtF3 => &self.sqrt_f3,
        };
        f.apply_table(table)
    }

    /// Inverse of the constant-depth symbol `1 + (μξ²/3)F3`.
    fn flat_inverse(&self, d: Dispersion, r: &[f64]) -> Vec<f64> {
        let mu = self.params.mu();
        let table: Vec<f64> = self
            .xi
            .iter()
            .zip(&self.f3)
            .map(|(&xi, &f3)| {
                let f = if d == Dispersion::Classical { 1.0 } else { f3 };
                1.0 / (1.0 + mu * xi * xi / 3.0 * f)
            })
            .collect();
        RealField::new(self.grid, r.to_vec())
            .expect("finite residual")
            .apply_table(&table)
            .into_samples()
    }

    fn field(&self, v: Vec<f64>) -> RealField {
        RealField::new(self.grid, v).expect("finite Krylov vector")
    }

    fn zeta_inf_from_depth(&self, h: &RealField) -> f64 {
        let eps = self.params.eps();
        if eps > 0.0 {
            h.map(|v| (v - 1.0) / eps).max_abs()
        } else {
            0.0
        }
    }
}

fn cube(h: &RealField) -> RealField {
    h.map(|v| v * v * v)
}

/// `(ζ_t, ψ_t)` of the first full-dispersion Green-Naghdi system.
pub fn rhs_fdgn1(ops: &Ops, s: &WaveStatePsi, d: Dispersion) -> WaveStatePsi {
    let (mu, eps) = (ops.params.mu(), ops.params.eps());
    let h = ops.depth(&s.zeta);
    let h3 = cube(&h);
    let psi_x = s.psi.derivative(1);
    let psi_xx = s.psi.derivative(2);
    let f2_psi_xx = ops.sym(Sym::F2, d, &psi_xx);
    let t1 = ops.sym(Sym::F2, d, &ops.prod(&h3, &psi_xx));
    let t2 = ops.prod(&h3, &f2_psi_xx);
    let zeta_t = ops
        .prod(&h, &psi_x)
        .derivative(1)
        .scale(-1.0)
        .axpy(-mu / 6.0, &(&t1 + &t2).derivative(2));
    let h2 = &h * &h;
    let psi_t = s
        .zeta
        .scale(-1.0)
        .axpy(-eps / 2.0, &ops.prod(&psi_x, &psi_x))
        .axpy(mu * eps / 2.0, &ops.filter(&(&h2 * &f2_psi_xx) * &psi_xx));
    WaveStatePsi {
        zeta: zeta_t,
        psi: psi_t,
    }
}

/// `(ζ_t, ψ_t)` of the Whitham-Boussinesq system.
pub fn rhs_wb(ops: &Ops, s: &WaveStatePsi, d: Dispersion) -> WaveStatePsi {
    let eps = ops.params.eps();
    let f1_psi_x = ops.sym(Sym::F1, d, &s.psi.derivative(1));
    let flux = ops.prod(&s.zeta, &f1_psi_x).derivative(1);
    let zeta_t = ops
        .sym(Sym::F1, d, &s.psi.derivative(2))
        .scale(-1.0)
        .axpy(-eps, &ops.sym(Sym::F1, d, &flux));
    let psi_t = s
        .zeta
        .scale(-1.0)
        .axpy(-eps / 2.0, &ops.prod(&f1_psi_x, &f1_psi_x));
    WaveStatePsi {
        zeta: zeta_t,
        psi: psi_t,
    }
}

/// `∂x(h³F3[Vx]) + ∂x(F3[h³Vx])`, without dealiasing so that the operator
/// stays exactly symmetric.
fn dispersive_pair(ops: &Ops, h3: &RealField, v: &RealField, d: Dispersion) -> RealField {
    let vx = v.derivative(1);
    let a = h3 * &ops.sym(Sym::F3, d, &vx);
    let b = ops.sym(Sym::F3, d, &(h3 * &vx));
    (&a + &b).derivative(1)
}

/// `T[h]V = -(1/(6h))(∂x(h³F3[Vx]) + ∂x(F3[h³Vx]))`.
pub fn apply_t(ops: &Ops, h: &RealField, v: &RealField, d: Dispersion) -> RealField {
    dispersive_pair(ops, &cube(h), v, d).zip_map(h, |a, hv| -a / (6.0 * hv))
}

/// `I[h]V = h(V + μT[h]V)`.
pub fn apply_i(ops: &Ops, h: &RealField, v: &RealField, d: Dispersion) -> RealField {
    (h * v).axpy(-ops.params.mu() / 6.0, &dispersive_pair(ops, &cube(h), v, d))
}

/// Solves `(Id + μT[h])V = W`, i.e. `I[h]V = hW`.
pub fn solve_i(ops: &Ops, h: &RealField, w: &RealField, d: Dispersion) -> Result<RealField, ModelError> {
    let h3 = cube(h);
    let mu = ops.params.mu();
    let apply = |x: &[f64]| -> Vec<f64> {
        let v = ops.field(x.to_vec());
        (h * &v).axpy(-mu / 6.0, &dispersive_pair(ops, &h3, &v, d)).into_samples()
    };
    let rhs = (h * w).into_samples();
    let pre = |r: &[f64]| ops.flat_inverse(d, r);
    let out = match pcg(apply, pre, &rhs, ops.krylov_tol, ops.krylov_max_iter) {
        Ok(sol) => Ok(sol),
        Err(KrylovError::Indefinite { .. }) => gmres(
            apply,
            pre,
            &rhs,
            ops.krylov_tol,
            60,
            ops.krylov_max_iter,
        ),
        Err(e) => Err(e),
    };
    out.map(|sol| ops.field(sol.x))
        .map_err(|source| ModelError::Invertibility {
            mu,
            eps: ops.params.eps(),
            zeta_inf: ops.zeta_inf_from_depth(h),
            source,
        })
}

/// `hV - (μ/3)∂x(√F3[h³√F3[Vx]])`, symmetric positive definite.
pub fn apply_dit(ops: &Ops, h: &RealField, v: &RealField) -> RealField {
    let inner = &cube(h) * &ops.sym(Sym::SqrtF3, Dispersion::Full, &v.derivative(1));
    (h * v).axpy(
        -ops.params.mu() / 3.0,
        &ops.sym(Sym::SqrtF3, Dispersion::Full, &inner).derivative(1),
    )
}

/// Solves `apply_dit(V) = hW` by conjugate gradients.
pub fn solve_dit(ops: &Ops, h: &RealField, w: &RealField) -> Result<RealField, ModelError> {
    let apply = |x: &[f64]| apply_dit(ops, h, &ops.field(x.to_vec())).into_samples();
    let rhs = (h * w).into_samples();
    pcg(
        apply,
        |r| ops.flat_inverse(Dispersion::Full, r),
        &rhs,
        ops.krylov_tol,
        ops.krylov_max_iter,
    )
    .map(|sol| ops.field(sol.x))
    .map_err(ModelError::DitSolve)
}

/// `W_t` of the second full-dispersion system, given `V̄`.
pub fn fdgn2_forcing(ops: &Ops, zeta: &RealField, v: &RealField, d: Dispersion) -> RealField {
    let (mu, eps) = (ops.params.mu(), ops.params.eps());
    let h = ops.depth(zeta);
    let h3 = cube(&h);
    let vx = v.derivative(1);
    let f3_vx = ops.sym(Sym::F3, d, &vx);
    let pair = &ops.prod(&h3, &f3_vx) + &ops.sym(Sym::F3, d, &ops.prod(&h3, &vx));
    let v_over_h = ops.prod(v, &h.map(|x| 1.0 / x));
    let third = ops.prod(&v_over_h, &pair.derivative(1)).derivative(1);
    let fourth = ops.filter(&(&h * &h) * &ops.prod(&f3_vx, &vx)).derivative(1);
    zeta.derivative(1)
        .scale(-1.0)
        .axpy(-eps / 2.0, &ops.prod(v, v).derivative(1))
        .axpy(mu * eps / 6.0, &third)
        .axpy(mu * eps / 2.0, &fourth)
}

/// `W_t` of the DIT variant, given `V̄`.
pub fn dit_forcing(ops: &Ops, zeta: &RealField, v: &RealField) -> RealField {
    let (mu, eps) = (ops.params.mu(), ops.params.eps());
    let d = Dispersion::Full;
    let h = ops.depth(zeta);
    let h3 = cube(&h);
    let vx = v.derivative(1);
    let f3_vx = ops.sym(Sym::F3, d, &vx);
    let sym_term = ops.sym(Sym::SqrtF3, d, &ops.prod(&h3, &ops.sym(Sym::SqrtF3, d, &vx)));
    let v_over_h = ops.prod(v, &h.map(|x| 1.0 / x));
    let third = ops.prod(&v_over_h, &sym_term.derivative(1)).derivative(1);
    let fourth = ops.filter(&(&h * &h) * &ops.prod(&f3_vx, &vx)).derivative(1);
    zeta.derivative(1)
        .scale(-1.0)
        .axpy(-eps / 2.0, &ops.prod(v, v).derivative(1))
        .axpy(mu * eps / 3.0, &third)
        .axpy(mu * eps / 2.0, &fourth)
}

/// `ζ_t = -∂x(hV̄)`.
fn mass_flux(ops: &Ops, zeta: &RealField, v: &RealField) -> RealField {
    ops.prod(&ops.depth(zeta), v).derivative(1).scale(-1.0)
}

pub fn rhs_fdgn2(ops: &Ops, s: &WaveStateV, d: Dispersion) -> Result<WaveStateV, ModelError> {
    check_depth(&s.zeta, &ops.params)?;
    let h = ops.depth(&s.zeta);
    let v = solve_i(ops, &h, &s.w, d)?;
    Ok(WaveStateV {
        zeta: mass_flux(ops, &s.zeta, &v),
        w: fdgn2_forcing(ops, &s.zeta, &v, d),
    })
}

pub fn rhs_fdgn_dit(ops: &Ops, s: &WaveStateV) -> Result<WaveStateV, ModelError> {
    check_depth(&s.zeta, &ops.params)?;
    let h = ops.depth(&s.zeta);
    let v = solve_dit(ops, &h, &s.w)?;
    Ok(WaveStateV {
        zeta: mass_flux(ops, &s.zeta, &v),
        w: dit_forcing(ops, &s.zeta, &v),
    })
}

/// Water-waves right-hand side from the dimensionless Dirichlet-to-Neumann operator.
pub fn ww_rhs_from_dtn(ops: &Ops, s: &WaveStatePsi, dtn: &RealField) -> WaveStatePsi {
    let (mu, eps) = (ops.params.mu(), ops.params.eps());
    let psi_x = s.psi.derivative(1);
    let zeta_x = s.zeta.derivative(1);
    let num = dtn.axpy(eps * mu, &(&zeta_x * &psi_x));
    let den = zeta_x.map(|zx| 2.0 * (1.0 + eps * eps * mu * zx * zx));
    let last = ops.filter(&(&num * &num) * &den.map(|v| 1.0 / v));
    WaveStatePsi {
        zeta: dtn.scale(1.0 / mu),
        psi: s
            .zeta
            .scale(-1.0)
            .axpy(-eps / 2.0, &ops.prod(&psi_x, &psi_x))
            .axpy(eps / mu, &last),
    }
}

pub fn rhs_ww_ref(
    ops: &Ops,
    solver: &StripSolver,
    s: &WaveStatePsi,
    tol: f64,
    max_iter: usize,
) -> Result<WaveStatePsi, ModelError> {
    let data = SurfaceData::new(s.zeta.clone(), s.psi.clone(), ops.params)?;
    let (phi, _) = solver.solve(&data, tol, max_iter)?;
    Ok(ww_rhs_from_dtn(ops, s, &dtn_from_potential(&phi, &data)))
}

/// Strip settings used by the water-waves reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripSettings {
    pub nz: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StripSettings {
    fn default() -> Self {
        Self {
            nz: crate::strip::DEFAULT_NZ,
            tol: crate::strip::DEFAULT_TOL,
            max_iter: crate::strip::DEFAULT_MAX_ITER,
        }
    }
}

/// A model instance: kind, operators, and the strip solver when needed.
#[derive(Debug, Clone)]
pub struct Model {
    kind: ModelKind,
    ops: Ops,
    strip: Option<(StripSolver, StripSettings)>,
}

impl Model {
    pub fn new(kind: ModelKind, ops: Ops, strip: StripSettings) -> Result<Self, ModelError> {
        let solver = if kind == ModelKind::WwRef {
            let grid = StripGrid::new(*ops.grid(), strip.nz)?;
            Some((StripSolver::new(grid, ops.params.mu()), strip))
        } else {
            None
        };
        Ok(Self {
            kind,
            ops,
            strip: solver,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn ops(&self) -> &Ops {
        &self.ops
    }

    pub fn params(&self) -> &Params {
        &self.ops.params
    }

    pub fn strip_solver(&self) -> Option<&StripSolver> {
        self.strip.as_ref().map(|(s, _)| s)
    }

    pub fn strip_settings(&self) -> Option<StripSettings> {
        self.strip.as_ref().map(|(_, s)| *s)
    }

    pub fn rhs_psi(&self, s: &WaveStatePsi) -> Result<WaveStatePsi, ModelError> {
        let d = self.kind.dispersion();
        match self.kind {
            ModelKind::Fdgn1 | ModelKind::Gn1Classical => {
                check_depth(&s.zeta, self.params())?;
                Ok(rhs_fdgn1(&self.ops, s, d))
            }
            ModelKind::Wb | ModelKind::WbClassical => {
                check_depth(&s.zeta, self.params())?;
                Ok(rhs_wb(&self.ops, s, d))
            }
            ModelKind::WwRef => {
                let (solver, st) = self.strip.as_ref().expect("strip solver for WW-ref");
                rhs_ww_ref(&self.ops, solver, s, st.tol, st.max_iter)
            }
            _ => Err(ModelError::WrongForm {
                kind: self.kind,
                form: StateForm::Psi,
            }),
        }
    }

    pub fn rhs_v(&self, s: &WaveStateV) -> Result<WaveStateV, ModelError> {
        match self.kind {
            ModelKind::Fdgn2 | ModelKind::Gn2Classical => {
                rhs_fdgn2(&self.ops, s, self.kind.dispersion())
            }
            ModelKind::FdgnDit => rhs_fdgn_dit(&self.ops, s),
            _ => Err(ModelError::WrongForm {
                kind: self.kind,
                form: StateForm::V,
            }),
        }
    }

    /// Recovers `V̄` from a V-form state.
    pub fn recover_v(&self, s: &WaveStateV) -> Result<RealField, ModelError> {
        let h = self.ops.depth(&s.zeta);
        match self.kind {
            ModelKind::FdgnDit => solve_dit(&self.ops, &h, &s.w),
            ModelKind::Fdgn2 | ModelKind::Gn2Classical => {
                solve_i(&self.ops, &h, &s.w, self.kind.dispersion())
            }
            _ => Err(ModelError::WrongForm {
                kind: self.kind,
                form: StateForm::V,
            }),
        }
    }

    /// Prognostic `W` of a V-form model for given `(ζ, V̄)`.
    pub fn w_from_v(&self, zeta: &RealField, v: &RealField) -> RealField {
        let h = self.ops.depth(zeta);
        let hw = match self.kind {
            ModelKind::FdgnDit => apply_dit(&self.ops, &h, v),
            _ => apply_i(&self.ops, &h, v, self.kind.dispersion()),
        };
        hw.zip_map(&h, |a, b| a / b)
    }

    /// `W_t` of a V-form model for given `(ζ, V̄)`.
    pub fn v_forcing(&self, zeta: &RealField, v: &RealField) -> RealField {
        match self.kind {
            ModelKind::FdgnDit => dit_forcing(&self.ops, zeta, v),
            _ => fdgn2_forcing(&self.ops, zeta, v, self.kind.dispersion()),
        }
    }
}

/// Consistency residual norms of one model at one water-waves state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyResidual {
    /// `‖R₁‖₂`, mass equation.
    pub r1: f64,
    /// `‖R₂‖₂`, second equation (ψ or W).
    pub r2: f64,
    /// Second residual recomputed with half the differencing step (V-form only).
    pub r2_half_step: Option<f64>,
    /// Set when halving the differencing step changes `r2` by more than 10%.
    pub differencing_warning: bool,
}

impl ConsistencyResidual {
    pub fn combined(&self) -> f64 {
        self.r1.hypot(self.r2)
    }
}

/// Substitutes the exact water-waves time derivatives at `data` into `model`.
/// For V-form models `∂t W` is obtained by centered differencing along the
/// water-waves flow with step `dt`.
pub fn consistency_residual(
    model: &Model,
    reference: &Model,
    data: &SurfaceData,
    dt: f64,
) -> Result<ConsistencyResidual, ModelError> {
    let ww_solver = reference.strip_solver().expect("reference must be WW-ref");
    let st = reference.strip_settings().unwrap_or_default();
    let ops = model.ops();
    let state = WaveStatePsi {
        zeta: data.zeta().clone(),
        psi: data.psi().clone(),
    };
    let (phi, _) = ww_solver.solve(data, st.tol, st.max_iter)?;
    let ww = ww_rhs_from_dtn(ops, &state, &dtn_from_potential(&phi, data));
    match model.kind().form() {
        StateForm::Psi => {
            let m = model.rhs_psi(&state)?;
            Ok(ConsistencyResidual {
                r1: (&ww.zeta - &m.zeta).l2_norm(),
                r2: (&ww.psi - &m.psi).l2_norm(),
                r2_half_step: None,
                differencing_warning: false,
            })
        }
        StateForm::V => {
            let vbar = compute_vbar(&phi, data);
            let r1 = (&ww.zeta - &mass_flux(ops, data.zeta(), &vbar)).l2_norm();
            let forcing = model.v_forcing(data.zeta(), &vbar);
            let w_at = |sign: f64, step: f64| -> Result<RealField, ModelError> {
                let moved = state.axpy(sign * step, &ww);
                let d = SurfaceData::new(moved.zeta.clone(), moved.psi.clone(), *data.params())?;
                let (p, _) = ww_solver.solve(&d, st.tol, st.max_iter)?;
                Ok(model.w_from_v(&moved.zeta, &compute_vbar(&p, &d)))
            };
            let r2_for = |step: f64| -> Result<f64, ModelError> {
                let wt = (&w_at(1.0, step)? - &w_at(-1.0, step)?).scale(1.0 / (2.0 * step));
                Ok((&wt - &forcing).l2_norm())
            };
            let r2 = r2_for(dt)?;
            let r2_half = r2_for(dt / 2.0)?;
            Ok(ConsistencyResidual {
                r1,
                r2,
                r2_half_step: Some(r2_half),
                differencing_warning: (r2 - r2_half).abs() > 0.1 * r2_half,
            })
        }
    }
}

/// Numerical `ω²` of `model` at grid mode `k`, from two right-hand-side
/// evaluations on states of amplitude `delta` about rest.
///
/// With `u = δ(cos kx, s(kx))`, where `s = cos` for ψ-form and `sin` for V-form,
/// the linear system reads `ζ_t = α s`, `s_t = β ζ` and `ω² = -αβ`.
pub fn measured_omega_squared(model: &Model, k: i64, delta: f64) -> Result<f64, ModelError> {
    let g = *model.ops().grid();
    let xi = 2.0 * std::f64::consts::PI * k as f64 / g.length();
    let cos = RealField::from_fn(g, |x| (xi * x).cos());
    let zero = RealField::zeros(g);
    let project = |f: &RealField, basis: &RealField| f.dot(basis) / basis.dot(basis) / delta;
    match model.kind().form() {
        StateForm::Psi => {
            let a = model.rhs_psi(&WaveStatePsi {
                zeta: zero.clone(),
                psi: cos.scale(delta),
            })?;
            let b = model.rhs_psi(&WaveStatePsi {
                zeta: cos.scale(delta),
                psi: zero,
            })?;
            Ok(-project(&a.zeta, &cos) * project(&b.psi, &cos))
        }
        StateForm::V => {
            let sin = RealField::from_fn(g, |x| (xi * x).sin());
            let a = model.rhs_v(&WaveStateV {
                zeta: zero.clone(),
                w: sin.scale(delta),
            })?;
            let b = model.rhs_v(&WaveStateV {
                zeta: cos.scale(delta),
                w: zero,
            })?;
            Ok(-project(&a.zeta, &cos) * project(&b.w, &sin))
        }
    }
}
