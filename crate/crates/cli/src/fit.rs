//! Least-squares slopes in log-log coordinates.

use nalgebra::{Matrix3, Vector3};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("slope fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("x and y have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("value {value} at index {index} is not positive")]
    NonPositive { index: usize, value: f64 },
    /// A measured error of exactly zero: the quantity hit solver tolerance.
    #[error("value at index {index} is exactly zero (floored at solver tolerance)")]
    Floored { index: usize },
    #[error("abscissae are degenerate")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Half-width of the 95% confidence interval on the slope.
    pub half_width: f64,
}

impl SlopeFit {
    /// Whether `|slope - expected| <= tol`.
    pub fn within(&self, expected: f64, tol: f64) -> bool {
        (self.slope - expected).abs() <= tol
    }
}

fn check_positive(name_offset: usize, v: &[f64]) -> Result<Vec<f64>, FitError> {
    v.iter()
        .enumerate()
        .map(|(i, &y)| {
            if y == 0.0 {
                Err(FitError::Floored { index: i + name_offset })
            } else if !(y > 0.0 && y.is_finite()) {
                Err(FitError::NonPositive {
                    index: i + name_offset,
                    value: y,
                })
            } else {
                Ok(y.ln())
            }
        })
        .collect()
}

fn t_quantile(dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .map(|t| t.inverse_cdf(0.975))
        .unwrap_or(f64::INFINITY)
}

/// Fits `ln y = intercept + slope ln x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit, FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 4 {
        return Err(FitError::TooFewPoints(n));
    }
    let lx = check_positive(0, xs)?;
    let ly = check_positive(0, ys)?;
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FitError::Degenerate);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
        half_width: t_quantile(n - 2) * se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub half_width: f64,
}

impl SlopeEstimate {
    pub fn within(&self, expected: f64, tol: f64) -> bool {
        (self.slope - expected).abs() <= tol
    }
}

/// Two-parameter power law `y ≈ C μ^a ε^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointFit {
    pub mu: SlopeEstimate,
    pub eps: SlopeEstimate,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits `ln y = c + a ln μ + b ln ε` over scattered `(μ, ε, y)` points.
pub fn fit_power_law(mus: &[f64], epss: &[f64], ys: &[f64]) -> Result<JointFit, FitError> {
    if mus.len() != ys.len() || epss.len() != ys.len() {
        return Err(FitError::LengthMismatch(mus.len(), ys.len()));
    }
    let n = ys.len();
    if n < 4 {
        return Err(FitError::TooFewPoints(n));
    }
    let lm = check_positive(0, mus)?;
    let le = check_positive(0, epss)?;
    let ly = check_positive(0, ys)?;
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for i in 0..n {
        let row = Vector3::new(1.0, lm[i], le[i]);
        ata += row * row.transpose();
        atb += row * ly[i];
    }
    let inv = ata.try_inverse().ok_or(FitError::Degenerate)?;
    let beta = inv * atb;
    let my = ly.iter().sum::<f64>() / n as f64;
    let mut sse = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let pred = beta[0] + beta[1] * lm[i] + beta[2] * le[i];
        sse += (ly[i] - pred).powi(2);
        syy += (ly[i] - my).powi(2);
    }
    let dof = n.saturating_sub(3).max(1);
    let s2 = sse / dof as f64;
    let t = t_quantile(dof);
    Ok(JointFit {
        mu: SlopeEstimate {
            slope: beta[1],
            half_width: t * (s2 * inv[(1, 1)]).sqrt(),
        },
        eps: SlopeEstimate {
            slope: beta[2],
            half_width: t * (s2 * inv[(2, 2)]).sqrt(),
        },
        intercept: beta[0],
        r2: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
    })
}
