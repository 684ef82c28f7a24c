//! Dispersion multipliers `F0 .. F3` and their pointwise properties.
//!
//! All symbols are functions of `x = √μ |ξ|`. Small arguments use truncated
//! Taylor series; moderate arguments use the Lambert continued fraction of
//! `tanh`, which gives `1 - tanh(x)/x` without cancellation.

use thiserror::Error;

use crate::spectral::Grid1D;

pub const DEFAULT_MU_MAX: f64 = 4.0;

/// Below this argument the Taylor branches are used.
pub const TAYLOR_SWITCH: f64 = 1e-4;

/// Up to this argument the continued fraction is used.
const CF_SWITCH: f64 = 1.0;
const CF_DEPTH: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("mu = {mu} must lie in (0, {mu_max}]")]
    Mu { mu: f64, mu_max: f64 },
    #[error("eps = {0} must lie in [0, 1]")]
    Eps(f64),
    #[error("h_min = {0} must lie in (0, 1)")]
    HMin(f64),
    #[error("z = {0} must lie in [-1, 0]")]
    Depth(f64),
    #[error("xi_max = {xi_max} must be positive and n_samples = {n_samples} at least 100")]
    Sampling { xi_max: f64, n_samples: usize },
}

/// Regime parameters: shallowness `mu`, nonlinearity `eps`, depth floor `h_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    mu: f64,
    eps: f64,
    h_min: f64,
}

impl Params {
    pub fn new(mu: f64, eps: f64, h_min: f64) -> Result<Self, ParamError> {
        Self::with_mu_max(mu, eps, h_min, DEFAULT_MU_MAX)
    }

    pub fn with_mu_max(mu: f64, eps: f64, h_min: f64, mu_max: f64) -> Result<Self, ParamError> {
        if !(mu > 0.0 && mu <= mu_max) {
            return Err(ParamError::Mu { mu, mu_max });
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(ParamError::Eps(eps));
        }
        if !(h_min > 0.0 && h_min < 1.0) {
            return Err(ParamError::HMin(h_min));
        }
        Ok(Self { mu, eps, h_min })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn sqrt_mu(&self) -> f64 {
        self.mu.sqrt()
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self, ParamError> {
        Self::new(self.mu, eps, self.h_min)
    }

    /// Scaled argument `x = √μ |ξ|`.
    pub fn x(&self, xi: f64) -> f64 {
        self.sqrt_mu() * xi.abs()
    }
}

/// `R = 3 + t/(5 + t/(7 + ...))` with `t = x²`; then
/// `tanh(x)/x = R/(R+t)`, `F2 = 3/(R+t)`, `F3 = 3/R`.
fn lambert_tail(t: f64) -> f64 {
    let mut r = (2 * CF_DEPTH + 3) as f64;
    for m in (1..=CF_DEPTH).rev() {
        r = (2 * m + 1) as f64 + t / r;
    }
    r
}

/// `tanh(x)/x`.
pub fn f1_of_x(x: f64) -> f64 {
    let x = x.abs();
    let t = x * x;
    if x < TAYLOR_SWITCH {
        1.0 - t / 3.0 + 2.0 * t * t / 15.0 - 17.0 * t * t * t / 315.0
    } else if x < CF_SWITCH {
        let r = lambert_tail(t);
        r / (r + t)
    } else {
        x.tanh() / x
    }
}

/// `(3/x²)(1 - tanh(x)/x)`.
pub fn f2_of_x(x: f64) -> f64 {
    let x = x.abs();
    let t = x * x;
    if x < TAYLOR_SWITCH {
        1.0 - 2.0 * t / 5.0 + 17.0 * t * t / 105.0 - 62.0 * t * t * t / 945.0
    } else if x < CF_SWITCH {
        3.0 / (lambert_tail(t) + t)
    } else {
        3.0 / t * (1.0 - x.tanh() / x)
    }
}

/// `(3/x²)(x/tanh(x) - 1)`.
pub fn f3_of_x(x: f64) -> f64 {
    let x = x.abs();
    let t = x * x;
    if x < TAYLOR_SWITCH {
        1.0 - t / 15.0 + 2.0 * t * t / 315.0 - t * t * t / 1575.0
    } else if x < CF_SWITCH {
        3.0 / lambert_tail(t)
    } else {
        3.0 / t * (x / x.tanh() - 1.0)
    }
}

/// `x/tanh(x)`.
pub fn inv_f1_of_x(x: f64) -> f64 {
    let x = x.abs();
    let t = x * x;
    if x < TAYLOR_SWITCH {
        1.0 + t / 3.0 - t * t / 45.0 + 2.0 * t * t * t / 945.0
    } else if x < CF_SWITCH {
        1.0 + t / lambert_tail(t)
    } else {
        x / x.tanh()
    }
}

/// `cosh((z+1)x)/cosh(x)` without overflow.
pub fn f0_of_x(z: f64, x: f64) -> f64 {
    let x = x.abs();
    (z * x).exp() * (1.0 + (-2.0 * (z + 1.0) * x).exp()) / (1.0 + (-2.0 * x).exp())
}

/// `1 - F0(z, x)` without cancellation for small `x` or `z` near 0.
pub fn one_minus_f0_of_x(z: f64, x: f64) -> f64 {
    let x = x.abs();
    if x < 20.0 {
        2.0 * ((2.0 + z) * x / 2.0).sinh() * (-z * x / 2.0).sinh() / x.cosh()
    } else {
        let d = (-2.0 * x).exp();
        (-(z * x).exp_m1() + d - (-(z + 2.0) * x).exp()) / (1.0 + d)
    }
}

pub fn eval_f1(xi: f64, p: &Params) -> f64 {
    f1_of_x(p.x(xi))
}

pub fn eval_f2(xi: f64, p: &Params) -> f64 {
    f2_of_x(p.x(xi))
}

pub fn eval_f3(xi: f64, p: &Params) -> f64 {
    f3_of_x(p.x(xi))
}

pub fn eval_sqrt_f3(xi: f64, p: &Params) -> f64 {
    eval_f3(xi, p).sqrt()
}

pub fn eval_inv_f1(xi: f64, p: &Params) -> f64 {
    inv_f1_of_x(p.x(xi))
}

pub fn eval_f0(z: f64, xi: f64, p: &Params) -> Result<f64, ParamError> {
    check_depth(z)?;
    Ok(f0_of_x(z, p.x(xi)))
}

/// `|ξ| / (1 + √μ|ξ|)^{1/2}`.
pub fn eval_p(xi: f64, p: &Params) -> f64 {
    xi.abs() / (1.0 + p.x(xi)).sqrt()
}

fn check_depth(z: f64) -> Result<(), ParamError> {
    if (-1.0..=0.0).contains(&z) {
        Ok(())
    } else {
        Err(ParamError::Depth(z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolKind {
    F0 { z: f64 },
    F1,
    F2,
    F3,
    SqrtF3,
    P,
    InvF1,
}

impl SymbolKind {
    pub fn f0(z: f64) -> Result<Self, ParamError> {
        check_depth(z)?;
        Ok(SymbolKind::F0 { z })
    }

    pub fn eval(&self, xi: f64, p: &Params) -> f64 {
        match *self {
            SymbolKind::F0 { z } => f0_of_x(z, p.x(xi)),
            SymbolKind::F1 => eval_f1(xi, p),
            SymbolKind::F2 => eval_f2(xi, p),
            SymbolKind::F3 => eval_f3(xi, p),
            SymbolKind::SqrtF3 => eval_sqrt_f3(xi, p),
            SymbolKind::P => eval_p(xi, p),
            SymbolKind::InvF1 => eval_inv_f1(xi, p),
        }
    }

    /// Symbol values per FFT slot of `grid`.
    pub fn table(&self, grid: &Grid1D, p: &Params) -> Vec<f64> {
        grid.wavenumbers().iter().map(|&xi| self.eval(xi, p)).collect()
    }
}

/// One fitted constant `sup |residual| / x^order`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorBound {
    pub name: &'static str,
    pub order: i32,
    pub constant: f64,
    pub constant_doubled: f64,
}

impl TaylorBound {
    pub fn relative_change(&self) -> f64 {
        (self.constant_doubled - self.constant).abs() / self.constant.abs()
    }

    pub fn is_stable(&self) -> bool {
        self.constant.is_finite() && self.constant_doubled.is_finite() && self.relative_change() < 0.05
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorReport {
    pub entries: Vec<TaylorBound>,
}

impl TaylorReport {
    pub fn get(&self, name: &str) -> Option<&TaylorBound> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn all_stable(&self) -> bool {
        self.entries.iter().all(TaylorBound::is_stable)
    }
}

const DEPTH_SAMPLES: usize = 21;

fn depth_samples() -> impl Iterator<Item = f64> {
    (0..DEPTH_SAMPLES).map(|i| -(i as f64) / (DEPTH_SAMPLES - 1) as f64)
}

type Residual = fn(f64) -> f64;

fn taylor_residuals() -> Vec<(&'static str, i32, Residual)> {
    vec![
        ("tanh-order-2", 2, |x| (f1_of_x(x) - 1.0).abs()),
        ("f2-order-2", 2, |x| (f2_of_x(x) - 1.0).abs()),
        ("f3-order-2", 2, |x| (f3_of_x(x) - 1.0).abs()),
        ("tanh-order-4", 4, |x| (f1_of_x(x) - 1.0 + x * x / 3.0).abs()),
        ("f0-expansion", 2, |x| {
            depth_samples()
                .map(|z| (one_minus_f0_of_x(z, x) / (x * x) + z * z / 2.0 + z).abs())
                .fold(0.0, f64::max)
        }),
        ("f0-weighted", 2, |x| {
            depth_samples()
                .map(|z| ((z + 1.0).powi(2) * one_minus_f0_of_x(z, x)).abs())
                .fold(0.0, f64::max)
        }),
    ]
}

fn sup_ratio(residual: Residual, order: i32, sqrt_mu: f64, xi_max: f64, n: usize) -> f64 {
    (1..=n)
        .map(|k| {
            let x = sqrt_mu * xi_max * k as f64 / n as f64;
            residual(x) / x.powi(order)
        })
        .fold(0.0, f64::max)
}

/// Fits the constants of the pointwise Taylor estimates on `xi ∈ (0, xi_max]`,
/// once with `n_samples` points and once with twice as many.
pub fn check_taylor_bounds(
    p: &Params,
    xi_max: f64,
    n_samples: usize,
) -> Result<TaylorReport, ParamError> {
    if !(xi_max > 0.0 && xi_max.is_finite()) || n_samples < 100 {
        return Err(ParamError::Sampling { xi_max, n_samples });
    }
    let entries = taylor_residuals()
        .into_iter()
        .map(|(name, order, residual)| TaylorBound {
            name,
            order,
            constant: sup_ratio(residual, order, p.sqrt_mu(), xi_max, n_samples),
            constant_doubled: sup_ratio(residual, order, p.sqrt_mu(), xi_max, 2 * n_samples),
        })
        .collect();
    Ok(TaylorReport { entries })
}

/// Result of scanning `symbol(x) * weight(x) - 1` over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundScan {
    /// Largest value of `symbol * weight - 1`; nonpositive iff the bound holds.
    pub max_residual: f64,
    /// Argument `x = √μ ξ` where the maximum is attained.
    pub argmax_x: f64,
    /// Smallest `C` with `symbol <= C / weight` on the grid.
    pub sharp_constant: f64,
}

/// Logarithmic grid of `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn scan(mus: &[f64], xis: &[f64], f: impl Fn(f64) -> f64) -> BoundScan {
    let mut out = BoundScan {
        max_residual: f64::NEG_INFINITY,
        argmax_x: 0.0,
        sharp_constant: 0.0,
    };
    for &mu in mus {
        for &xi in xis {
            let x = mu.sqrt() * xi;
            let v = f(x);
            if v - 1.0 > out.max_residual {
                out.max_residual = v - 1.0;
                out.argmax_x = x;
            }
            out.sharp_constant = out.sharp_constant.max(v);
        }
    }
    out
}

/// `F3(x) (1 + x/3) - 1` over the grid.
pub fn f3_bound_scan(mus: &[f64], xis: &[f64]) -> BoundScan {
    scan(mus, xis, |x| f3_of_x(x) * (1.0 + x / 3.0))
}

/// `F2(x) (1 + x²/3) - 1` over the grid.
pub fn f2_bound_scan(mus: &[f64], xis: &[f64]) -> BoundScan {
    scan(mus, xis, |x| f2_of_x(x) * (1.0 + x * x / 3.0))
}

/// `F1⁻¹(x) / (1 + x) - 1` over the grid.
pub fn inv_f1_bound_scan(mus: &[f64], xis: &[f64]) -> BoundScan {
    scan(mus, xis, |x| inv_f1_of_x(x) / (1.0 + x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Params {
        Params::new(1.0, 0.1, 0.1).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(0.0, 0.1, 0.1).is_err());
        assert!(Params::new(4.5, 0.1, 0.1).is_err());
        assert!(Params::new(4.0, 1.0, 0.5).is_ok());
        assert!(Params::new(0.1, -0.1, 0.1).is_err());
        assert!(Params::new(0.1, 0.1, 1.0).is_err());
        assert!(Params::with_mu_max(8.0, 0.1, 0.1, 10.0).is_ok());
    }

    #[test]
    fn values_at_zero() {
        let p = unit();
        assert_eq!(eval_f1(0.0, &p), 1.0);
        assert_eq!(eval_f2(0.0, &p), 1.0);
        assert_eq!(eval_f3(0.0, &p), 1.0);
        assert_eq!(eval_sqrt_f3(0.0, &p), 1.0);
        assert_eq!(eval_inv_f1(0.0, &p), 1.0);
        for z in [-1.0, -0.3, 0.0] {
            assert_eq!(eval_f0(z, 0.0, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn reference_values() {
        let p = unit();
        assert!((eval_f1(1.0, &p) - 0.761_594_155_955_764_9).abs() < 1e-15);
        assert!((eval_f2(1.0, &p) - 0.715_217_532_132_705_3).abs() < 1e-15);
        assert!((eval_f3(1.0, &p) - 0.939_105_856_497_993_9).abs() < 1e-15);
        assert!((eval_f2(2.0, &p) - 0.388_489_657_471_568_7).abs() < 1e-15);
        assert!((eval_f2(2.0, &p) - 0.75 * (1.0 - 2f64.tanh() / 2.0)).abs() < 1e-15);
        let half = [0.924_234_314_520_019_5, 0.909_188_225_759_765_8, 0.983_720_482_431_917_1];
        assert!((f1_of_x(0.5) - half[0]).abs() < 1e-15);
        assert!((f2_of_x(0.5) - half[1]).abs() < 1e-15);
        assert!((f3_of_x(0.5) - half[2]).abs() < 1e-15);
    }

    #[test]
    fn f0_bottom_value_and_overflow() {
        let p = unit();
        let v = eval_f0(-1.0, 10.0, &p).unwrap();
        assert!((v - 9.079_985_933_781_724e-5).abs() < 1e-18);
        let far = eval_f0(-1.0, 1000.0, &p).unwrap();
        assert!(far.is_finite() && far >= 0.0);
        for xi in [0.5, 3.0, 1000.0] {
            assert_eq!(eval_f0(0.0, xi, &p).unwrap(), 1.0);
        }
        assert!(eval_f0(0.1, 1.0, &p).is_err());
        assert!(eval_f0(-1.1, 1.0, &p).is_err());
    }

    #[test]
    fn one_minus_f0_matches_direct_form() {
        for &x in &[1e-3, 0.1, 1.0, 5.0, 50.0, 400.0] {
            for z in depth_samples() {
                let a = one_minus_f0_of_x(z, x);
                let b = 1.0 - f0_of_x(z, x);
                assert!((a - b).abs() < 1e-13, "x={x} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn large_mu_asymptote_and_monotonicity() {
        let p = Params::new(4.0, 0.0, 0.1).unwrap();
        let v = eval_f1(50.0, &p);
        assert!((v * 100.0 - 1.0).abs() < 1e-12);
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.05).collect();
        for w in xs.windows(2) {
            assert!(eval_f1(w[1], &p) < eval_f1(w[0], &p));
            assert!(eval_sqrt_f3(w[1], &p) < eval_sqrt_f3(w[0], &p));
        }
    }

    #[test]
    fn branch_switches_are_smooth() {
        for switch in [TAYLOR_SWITCH, CF_SWITCH] {
            let below = switch * (1.0 - 1e-12);
            let fs: [fn(f64) -> f64; 4] = [f1_of_x, f2_of_x, f3_of_x, inv_f1_of_x];
            for f in fs {
                let (a, b) = (f(below), f(switch));
                assert!((a - b).abs() / b.abs() < 1e-11, "switch {switch}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn symbols_are_even() {
        let p = Params::new(0.3, 0.1, 0.1).unwrap();
        for xi in [0.0, 1e-5, 0.7, 3.0, 40.0] {
            for kind in [SymbolKind::F1, SymbolKind::F2, SymbolKind::F3, SymbolKind::P] {
                assert_eq!(kind.eval(xi, &p), kind.eval(-xi, &p));
            }
        }
    }

    #[test]
    fn ranges_on_dense_grid() {
        let p = Params::new(1.0, 0.0, 0.1).unwrap();
        for xi in log_grid(1e-6, 1e4, 4001) {
            for v in [eval_f1(xi, &p), eval_f2(xi, &p), eval_f3(xi, &p)] {
                assert!(v > 0.0 && v < 1.0, "xi={xi} v={v}");
            }
        }
    }

    #[test]
    fn taylor_constants() {
        let p = Params::new(1.0, 0.0, 0.1).unwrap();
        let report = check_taylor_bounds(&p, 2.0, 200).unwrap();
        assert!(report.all_stable(), "{report:?}");
        let c4 = report.get("tanh-order-4").unwrap().constant;
        assert!((0.08..=0.14).contains(&c4));
        assert!((report.get("tanh-order-2").unwrap().constant - 1.0 / 3.0).abs() < 1e-3);
        assert!((report.get("f3-order-2").unwrap().constant - 1.0 / 15.0).abs() < 1e-3);
        assert!(check_taylor_bounds(&p, 2.0, 50).is_err());
    }

    #[test]
    fn f3_linear_bound_constant_exceeds_one() {
        // F3(x)(1 + x/3) tends to 1 + 2/x - ... as x grows, so the sharp
        // constant in F3 <= C/(1 + x/3) is about 1.35, not 1.
        let s = f3_bound_scan(&[0.01, 0.1, 1.0, 4.0], &log_grid(1e-6, 1e4, 2001));
        assert!((s.sharp_constant - 1.35).abs() < 0.01, "{s:?}");
        assert!((s.argmax_x - 2.45).abs() < 0.1);
    }

    #[test]
    fn quadratic_bounds_hold() {
        let mus = [0.01, 0.1, 1.0, 4.0];
        let xis = log_grid(1e-6, 1e4, 2001);
        assert!(f2_bound_scan(&mus, &xis).max_residual <= 1e-14);
        assert!(inv_f1_bound_scan(&mus, &xis).max_residual <= 1e-14);
    }
}
