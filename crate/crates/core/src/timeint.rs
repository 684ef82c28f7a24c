//! Classical fourth-order Runge-Kutta integration with diagnostics.

use thiserror::Error;

use crate::conserved::{diagnostics_psi, diagnostics_v, Diagnostics};
use crate::models::{Model, ModelError, ModelKind, WaveState, WaveStatePsi, WaveStateV};
use crate::multipliers::Params;
use crate::spectral::Grid1D;
use crate::strip::{check_depth, StripError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub scheme: Scheme,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64, record_every: usize) -> Result<Self, TimeIntError> {
        let cfg = Self {
            dt,
            t_end,
            record_every,
            scheme: Scheme::Rk4,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), TimeIntError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(TimeIntError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(TimeIntError::Config(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(TimeIntError::Config("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        let n = self.t_end / self.dt;
        let r = n.round();
        if (n - r).abs() < 1e-9 * r.max(1.0) {
            r as usize
        } else {
            n.ceil() as usize
        }
    }
}

/// `0.5 / ω_max` over the retained wavenumbers of `grid`.
pub fn default_dt(kind: ModelKind, grid: &Grid1D, p: &Params) -> f64 {
    let w_max = grid
        .wavenumbers()
        .iter()
        .map(|&xi| kind.omega_squared(xi, p).abs().sqrt())
        .fold(0.0, f64::max);
    if w_max > 0.0 {
        0.5 / w_max
    } else {
        0.5
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeIntError {
    #[error("invalid stepper configuration: {0}")]
    Config(String),
    #[error("non-finite value in RK4 stage at t = {t}")]
    BlowUp { t: f64 },
    #[error("domain error at t = {t}: {source}")]
    Domain { t: f64, source: StripError },
    #[error("right-hand side failed at t = {t}: {source}")]
    Model { t: f64, source: ModelError },
}

impl TimeIntError {
    fn from_model(t: f64, e: ModelError) -> Self {
        match e {
            ModelError::Strip(s @ StripError::NonCavitation { .. }) => {
                TimeIntError::Domain { t, source: s }
            }
            other => TimeIntError::Model { t, source: other },
        }
    }
}

/// An evolution equation `u_t = F(u)` with diagnostics.
pub trait Dynamics {
    type State: WaveState;
    fn rhs(&self, s: &Self::State) -> Result<Self::State, ModelError>;
    fn diagnostics(&self, s: &Self::State, t: f64) -> Result<Diagnostics, ModelError>;
    fn params(&self) -> &Params;
}

/// ψ-form model adapter.
pub struct PsiDynamics<'a>(pub &'a Model);

/// V-form model adapter.
pub struct VDynamics<'a>(pub &'a Model);

impl Dynamics for PsiDynamics<'_> {
    type State = WaveStatePsi;
    fn rhs(&self, s: &WaveStatePsi) -> Result<WaveStatePsi, ModelError> {
        self.0.rhs_psi(s)
    }
    fn diagnostics(&self, s: &WaveStatePsi, t: f64) -> Result<Diagnostics, ModelError> {
        diagnostics_psi(self.0, s, t)
    }
    fn params(&self) -> &Params {
        self.0.params()
    }
}

impl Dynamics for VDynamics<'_> {
    type State = WaveStateV;
    fn rhs(&self, s: &WaveStateV) -> Result<WaveStateV, ModelError> {
        self.0.rhs_v(s)
    }
    fn diagnostics(&self, s: &WaveStateV, t: f64) -> Result<Diagnostics, ModelError> {
        diagnostics_v(self.0, s, t)
    }
    fn params(&self) -> &Params {
        self.0.params()
    }
}

/// Receives diagnostics rows in time order.
pub trait DiagnosticsSink {
    fn record(&mut self, d: &Diagnostics);
}

impl DiagnosticsSink for Vec<Diagnostics> {
    fn record(&mut self, d: &Diagnostics) {
        self.push(*d);
    }
}

/// Sink that drops every row.
pub struct NullSink;

impl DiagnosticsSink for NullSink {
    fn record(&mut self, _: &Diagnostics) {}
}

/// One RK4 step from time `t`.
pub fn step<D: Dynamics>(sys: &D, s: &D::State, t: f64, dt: f64) -> Result<D::State, TimeIntError> {
    let stage = |u: &D::State, tt: f64| -> Result<D::State, TimeIntError> {
        let k = sys.rhs(u).map_err(|e| TimeIntError::from_model(tt, e))?;
        if !k.is_finite() {
            return Err(TimeIntError::BlowUp { t: tt });
        }
        Ok(k)
    };
    let k1 = stage(s, t)?;
    let k2 = stage(&s.axpy(dt / 2.0, &k1), t + dt / 2.0)?;
    let k3 = stage(&s.axpy(dt / 2.0, &k2), t + dt / 2.0)?;
    let k4 = stage(&s.axpy(dt, &k3), t + dt)?;
    let next = s
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4);
    if !next.is_finite() {
        return Err(TimeIntError::BlowUp { t: t + dt });
    }
    check_depth(next.zeta(), sys.params()).map_err(|source| TimeIntError::Domain { t: t + dt, source })?;
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct Outcome<S> {
    pub state: S,
    pub time: f64,
    pub steps: usize,
}

/// Error together with the last accepted state.
#[derive(Debug, Clone)]
pub struct Failure<S> {
    pub error: TimeIntError,
    pub last: Outcome<S>,
}

/// Integrates from `t0` to `t0 + cfg.t_end`, recording diagnostics at the start,
/// every `record_every` steps, and at the end.
pub fn integrate<D: Dynamics>(
    sys: &D,
    state0: D::State,
    t0: f64,
    cfg: &StepperConfig,
    sink: &mut dyn DiagnosticsSink,
) -> Result<Outcome<D::State>, Failure<D::State>> {
    let mut cur = Outcome {
        state: state0,
        time: t0,
        steps: 0,
    };
    macro_rules! bail {
        ($e:expr) => {
            return Err(Failure { error: $e, last: cur })
        };
    }
    if let Err(e) = cfg.validate() {
        bail!(e);
    }
    let record = |o: &Outcome<D::State>, sink: &mut dyn DiagnosticsSink| -> Result<(), TimeIntError> {
        let d = sys
            .diagnostics(&o.state, o.time)
            .map_err(|e| TimeIntError::from_model(o.time, e))?;
        sink.record(&d);
        Ok(())
    };
    if let Err(e) = check_depth(cur.state.zeta(), sys.params()) {
        bail!(TimeIntError::Domain { t: t0, source: e });
    }
    if let Err(e) = record(&cur, sink) {
        bail!(e);
    }
    let n = cfg.steps();
    let t_final = t0 + cfg.t_end;
    for i in 1..=n {
        let dt = if i == n { t_final - cur.time } else { cfg.dt };
        match step(sys, &cur.state, cur.time, dt) {
            Ok(next) => {
                cur.state = next;
                cur.time = if i == n { t_final } else { cur.time + dt };
                cur.steps = i;
            }
            Err(e) => bail!(e),
        }
        if i % cfg.record_every == 0 || i == n {
            log::debug!("t = {:.6} after {} steps", cur.time, i);
            if let Err(e) = record(&cur, sink) {
                bail!(e);
            }
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Ops, StripSettings};
    use crate::spectral::RealField;
    use std::f64::consts::PI;

    fn model(kind: ModelKind, n: usize, mu: f64, eps: f64) -> Model {
        let g = Grid1D::periodic(n).unwrap();
        Model::new(kind, Ops::new(g, Params::new(mu, eps, 0.1).unwrap()), StripSettings::default())
            .unwrap()
    }

    #[test]
    fn step_count_lands_on_t_end() {
        assert_eq!(StepperConfig::new(0.1, 1.0, 1).unwrap().steps(), 10);
        assert_eq!(StepperConfig::new(0.3, 1.0, 1).unwrap().steps(), 4);
        assert_eq!(StepperConfig::new(0.1, 0.0, 1).unwrap().steps(), 0);
        assert!(StepperConfig::new(0.0, 1.0, 1).is_err());
        assert!(StepperConfig::new(0.1, 1.0, 0).is_err());
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let m = model(ModelKind::Fdgn1, 32, 0.3, 0.1);
        let g = *m.ops().grid();
        let s = WaveStatePsi {
            zeta: RealField::from_fn(g, |x| 0.2 * x.cos()),
            psi: RealField::from_fn(g, |x| x.sin()),
        };
        let mut rows = Vec::new();
        let out = integrate(&PsiDynamics(&m), s.clone(), 0.0, &StepperConfig::new(0.1, 0.0, 1).unwrap(), &mut rows)
            .unwrap();
        assert_eq!(out.state, s);
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn zero_state_stays_zero() {
        let m = model(ModelKind::Wb, 16, 0.3, 0.1);
        let g = *m.ops().grid();
        let s = WaveStatePsi {
            zeta: RealField::zeros(g),
            psi: RealField::zeros(g),
        };
        let out = integrate(&PsiDynamics(&m), s.clone(), 0.0, &StepperConfig::new(0.1, 1.0, 5).unwrap(), &mut NullSink)
            .unwrap();
        assert_eq!(out.state, s);
    }

    #[test]
    fn linear_oscillator_period_error_is_fourth_order() {
        let m = model(ModelKind::Wb, 16, 1.0, 0.0);
        let g = *m.ops().grid();
        let omega = m.kind().omega_squared(1.0, m.params()).sqrt();
        let period = 2.0 * PI / omega;
        let s0 = WaveStatePsi {
            zeta: RealField::from_fn(g, |x| x.cos()),
            psi: RealField::from_fn(g, |x| x.sin() / omega),
        };
        let err = |steps: usize| {
            let cfg = StepperConfig::new(period / steps as f64, period, steps).unwrap();
            let out = integrate(&PsiDynamics(&m), s0.clone(), 0.0, &cfg, &mut NullSink).unwrap();
            (&out.state.zeta - &s0.zeta).max_abs() + (&out.state.psi - &s0.psi).max_abs()
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn cavitation_stops_with_partial_output() {
        let m = model(ModelKind::Fdgn1, 32, 0.3, 0.8);
        let g = *m.ops().grid();
        let s = WaveStatePsi {
            zeta: RealField::from_fn(g, |x| -1.05 * x.cos()),
            psi: RealField::from_fn(g, |x| 2.0 * x.sin()),
        };
        let mut rows = Vec::new();
        let cfg = StepperConfig::new(0.01, 5.0, 1).unwrap();
        let err = integrate(&PsiDynamics(&m), s, 0.0, &cfg, &mut rows).unwrap_err();
        assert!(matches!(
            err.error,
            TimeIntError::Domain { .. } | TimeIntError::BlowUp { .. }
        ));
        assert_eq!(rows.len(), err.last.steps + 1);
    }

    #[test]
    fn default_dt_resolves_fastest_mode() {
        let g = Grid1D::periodic(64).unwrap();
        let p = Params::new(0.3, 0.1, 0.1).unwrap();
        let dt_full = default_dt(ModelKind::Fdgn1, &g, &p);
        let dt_wbc = default_dt(ModelKind::WbClassical, &g, &p);
        assert!((dt_wbc - 0.5 / 32.0).abs() < 1e-15);
        assert!(dt_full > dt_wbc);
    }
}
