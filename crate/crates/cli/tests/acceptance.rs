//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stdout
//! (uncaptured) before asserting.

use std::io::Write;
use std::time::{Duration, Instant};

use fulldisp_cli::checks::{self, FLAT_RESOLUTION_LIMIT};
use fulldisp_cli::config::{RunConfig, DEFAULT_SWEEP};
use fulldisp_cli::fit::fit_slope;
use fulldisp_cli::sweep::{Axis, Expectation, SweepReport};
use fulldisp_core::models::{Model, ModelKind, Ops, StripSettings};
use fulldisp_core::multipliers::Params;
use fulldisp_core::spectral::Grid1D;

const SWEEP_AMPLITUDE: f64 = 0.25;
const SLOPE_TOL: f64 = 0.3;

fn strip() -> StripSettings {
    StripSettings {
        nz: 24,
        tol: 1e-13,
        max_iter: 400,
    }
}

fn verdict(id: u32, title: &str, failures: &[String], detail: &str) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[criterion {id:2}] {status} {title}: {detail}");
    for f in failures {
        let _ = writeln!(out, "[criterion {id:2}]      {f}");
    }
    let _ = out.flush();
    assert!(failures.is_empty(), "criterion {id} ({title}) failed: {failures:?}");
}

fn slope_failures(r: &SweepReport) -> Vec<String> {
    let mut out: Vec<String> = r
        .slopes
        .iter()
        .filter(|s| !s.pass)
        .map(|s| format!("{} slope in {} = {:.3}, expected {} ± {}", s.name, s.axis.label(), s.slope, s.expected, s.tol))
        .collect();
    out.extend(r.fit_errors.iter().map(|(n, e)| format!("{n}: {e}")));
    out
}

fn slope_summary(r: &SweepReport) -> String {
    r.slopes
        .iter()
        .map(|s| format!("{}[{}]={:.2}", s.name, s.axis.label(), s.slope))
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn criterion_01_flat_dtn_oracle() {
    let mut failures = Vec::new();
    let mut detail = Vec::new();
    for mu in [0.01, 0.1, 1.0] {
        let r = checks::flat_dtn(mu, 128, 24, 1e-13).unwrap();
        assert!(r.modes_checked > 0);
        if r.max_rel_err > 1e-10 {
            failures.push(format!("mu={mu}: rel err {:.2e} > 1e-10", r.max_rel_err));
        }
        if r.elapsed >= Duration::from_secs(1) {
            failures.push(format!("mu={mu}: took {:?}", r.elapsed));
        }
        detail.push(format!(
            "mu={mu} {:.1e} ({} modes, sqrt(mu)k <= {FLAT_RESOLUTION_LIMIT}, {:.0} ms)",
            r.max_rel_err,
            r.modes_checked,
            r.elapsed.as_secs_f64() * 1e3
        ));
    }
    verdict(1, "flat DtN matches sqrt(mu)|xi| tanh to 1e-10", &failures, &detail.join("; "));
}

#[test]
fn criterion_02_fd_oracle_equivalence() {
    let r = checks::fd_equivalence(0.3, 0.1, 64, 24, &[(128, 64), (256, 128), (512, 256)]).unwrap();
    let failures: Vec<String> = r
        .orders
        .iter()
        .filter(|o| (**o - 2.0).abs() > 0.3)
        .map(|o| format!("order {o:.3} outside 2.0 ± 0.3"))
        .collect();
    let detail = format!("gaps {:.3e} {:.3e} {:.3e}, orders {:.3} {:.3}", r.gaps[0], r.gaps[1], r.gaps[2], r.orders[0], r.orders[1]);
    verdict(2, "spectral vs FD converge at order 2", &failures, &detail);
}

#[test]
fn criterion_03_vbar_scaling_slopes() {
    let start = Instant::now();
    let points = checks::sweep_points(&DEFAULT_SWEEP, &DEFAULT_SWEEP);
    let rows = checks::par_map(&points, |mu, eps| checks::vbar_point(mu, eps, SWEEP_AMPLITUDE, 64, strip())).unwrap();
    let mut r = SweepReport::default();
    for p in &rows {
        for (name, v) in checks::VbarPoint::NAMES.iter().zip(p.values()) {
            r.push(p.mu, p.eps, name, v);
        }
    }
    r.fit("vbar-f1grad", Expectation::both(1.0, 1.0, SLOPE_TOL));
    for name in &checks::VbarPoint::NAMES[1..] {
        r.fit(name, Expectation::both(2.0, 1.0, SLOPE_TOL));
    }
    let mut failures = slope_failures(&r);
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(300) {
        failures.push(format!("sweep took {elapsed:?}"));
    }
    let detail = format!("{} ({:.2} s)", slope_summary(&r), elapsed.as_secs_f64());
    verdict(3, "V-bar approximation slopes", &failures, &detail);
}

#[test]
fn criterion_04_consistency_slopes() {
    let models = [ModelKind::Fdgn1, ModelKind::Fdgn2, ModelKind::FdgnDit, ModelKind::Wb, ModelKind::Gn1Classical];
    let points = checks::sweep_points(&DEFAULT_SWEEP, &DEFAULT_SWEEP);
    let rows = checks::par_map(&points, |mu, eps| {
        checks::consistency_point(&models, mu, eps, SWEEP_AMPLITUDE, 64, strip(), 1e-4)
    })
    .unwrap();
    let mut r = SweepReport::default();
    for p in rows.iter().flatten() {
        r.push(p.mu, p.eps, p.model.tag(), p.residual.combined());
    }
    for m in [ModelKind::Fdgn1, ModelKind::Fdgn2, ModelKind::FdgnDit] {
        r.fit(m.tag(), Expectation::both(2.0, 1.0, SLOPE_TOL));
    }
    r.fit(ModelKind::Wb.tag(), Expectation::both(1.0, 1.0, SLOPE_TOL));
    let mut failures = slope_failures(&r);
    let full = r.series(ModelKind::Fdgn1.tag());
    let classic = r.series(ModelKind::Gn1Classical.tag());
    let mut compared = 0;
    for (a, b) in full.iter().zip(&classic) {
        assert_eq!((a.mu, a.eps), (b.mu, b.eps));
        if a.mu >= 0.2 {
            compared += 1;
            if a.value >= b.value {
                failures.push(format!("FDGN1 {:.3e} >= GN1-classical {:.3e} at mu={}, eps={}", a.value, b.value, a.mu, a.eps));
            }
        }
    }
    assert!(compared >= 8);
    verdict(4, "consistency residual slopes and FDGN1 < GN1-classical", &failures, &slope_summary(&r));
}

#[test]
fn criterion_05_dispersion_exactness() {
    let mut failures = Vec::new();
    let mut detail = Vec::new();
    for m in [ModelKind::Fdgn1, ModelKind::Fdgn2, ModelKind::FdgnDit, ModelKind::Wb] {
        let rows = checks::dispersion_rows(m, 64, 0.3, 0.1, 1e-8, strip()).unwrap();
        assert_eq!(rows.len(), 21);
        let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
        if worst > 1e-6 {
            failures.push(format!("{m}: max rel err {worst:.2e}"));
        }
        detail.push(format!("{m} {worst:.1e}"));
    }
    for m in [ModelKind::Gn1Classical, ModelKind::Gn2Classical, ModelKind::WbClassical] {
        let r = checks::dispersion_at_x3(m, 0.3, 1e-8, strip()).unwrap();
        assert!((0.3f64.sqrt() * r.xi - 3.0).abs() < 1e-12);
        if r.rel_err <= 0.05 {
            failures.push(format!("{m}: deviation {:.3} at sqrt(mu)xi = 3", r.rel_err));
        }
        detail.push(format!("{m} {:.1}%", 100.0 * r.rel_err));
    }
    verdict(5, "full models exact to 1e-6, classical off by > 5% at x=3", &failures, &detail.join(", "));
}

#[test]
fn criterion_06_conservation_and_rk4_order() {
    let mut failures = Vec::new();
    let grid = Grid1D::periodic(128).unwrap();
    let p = Params::new(0.3, 0.1, 0.1).unwrap();
    let model = Model::new(ModelKind::Fdgn1, Ops::new(grid, p), strip()).unwrap();
    let (zeta, psi) = checks::cosine_reference(grid, 0.5);
    let run = checks::conservation_run(&model, &zeta, &psi, 1e-3, 1000, 10).unwrap();
    if run.mass_drift >= 1e-12 {
        failures.push(format!("mass drift {:.2e}", run.mass_drift));
    }
    if run.energy_drift >= 1e-8 {
        failures.push(format!("H_app1 drift {:.2e}", run.energy_drift));
    }
    let cfg = RunConfig::parse("", "defaults").unwrap();
    let orders = fulldisp_cli::commands::self_convergence_all(&cfg).unwrap();
    assert_eq!(orders.len(), ModelKind::ALL.len());
    for o in &orders {
        if (o.order - 4.0).abs() > 0.2 {
            failures.push(format!("{} RK4 order {:.3}", o.model, o.order));
        }
    }
    let (lo, hi) = orders
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), o| (a.min(o.order), b.max(o.order)));
    let detail = format!(
        "mass {:.1e}, H_app1 {:.1e}, RK4 orders in [{lo:.3}, {hi:.3}] over {} models",
        run.mass_drift,
        run.energy_drift,
        orders.len()
    );
    verdict(6, "conservation over 1000 steps and RK4 order 4", &failures, &detail);
}

#[test]
fn criterion_07_gradient_check() {
    let g = checks::gradient_check(64, 0.3, 0.1, 7, 5, 1e-5).unwrap();
    let mut failures = Vec::new();
    for (name, v) in [("H_app1", g.app1), ("H_app2", g.app2)] {
        if v >= 1e-6 {
            failures.push(format!("{name} gradient rel err {v:.2e}"));
        }
    }
    verdict(7, "variational gradients of H_app1, H_app2", &failures, &format!("H_app1 {:.1e}, H_app2 {:.1e}", g.app1, g.app2));
}

#[test]
fn criterion_08_multiplier_suite() {
    let r = checks::multiplier_report().unwrap();
    let mut failures = Vec::new();
    if r.f2_identity > 1e-13 {
        failures.push(format!("F1 = 1 - (x^2/3)F2 residual {:.2e}", r.f2_identity));
    }
    if r.f3_product > 1e-13 {
        failures.push(format!("F3 F1 = F2 residual {:.2e}", r.f3_product));
    }
    if r.f3_bound.max_residual > 0.0 {
        failures.push(format!(
            "F3 <= 1/(1 + x/3) violated: max residual {:.4} at x = {:.3} (sharp constant {:.4})",
            r.f3_bound.max_residual, r.f3_bound.argmax_x, r.f3_bound.sharp_constant
        ));
    }
    for e in &r.taylor.entries {
        if !e.is_stable() {
            failures.push(format!("{} constant {:.4e} -> {:.4e} not stable", e.name, e.constant, e.constant_doubled));
        }
    }
    let c4 = r.taylor.get("tanh-order-4").unwrap().constant;
    if !(0.08..=0.14).contains(&c4) {
        failures.push(format!("tanh fourth-order constant {c4:.4} outside [0.08, 0.14]"));
    }
    let detail = format!(
        "identities {:.1e}/{:.1e}, F3 bound residual {:.3}, {} Taylor constants, tanh4 {c4:.4}",
        r.f2_identity,
        r.f3_product,
        r.f3_bound.max_residual,
        r.taylor.entries.len()
    );
    verdict(8, "multiplier identities, bounds and Taylor constants", &failures, &detail);
}

#[test]
fn criterion_09_operator_algebra() {
    let tol = 1e-12;
    let a = checks::operator_algebra(64, 0.3, 0.2, &DEFAULT_SWEEP, 7, 8, tol).unwrap();
    let h_min = 0.1;
    let mut failures = Vec::new();
    if a.i_asymmetry > 1e-9 {
        failures.push(format!("I[h] asymmetry {:.2e}", a.i_asymmetry));
    }
    if a.round_trip_over_tol > 10.0 {
        failures.push(format!("solve_I round trip {:.2} x tol", a.round_trip_over_tol));
    }
    if a.dit_min_rayleigh < h_min {
        failures.push(format!("DIT min Rayleigh quotient {:.4} < h_min {h_min}", a.dit_min_rayleigh));
    }
    let mus: Vec<f64> = a.symmetrization_gap.iter().map(|g| g.0).collect();
    let gaps: Vec<f64> = a.symmetrization_gap.iter().map(|g| g.1).collect();
    let slope = fit_slope(&mus, &gaps).unwrap().slope;
    if slope < 1.0 {
        failures.push(format!("symmetrization gap slope {slope:.3} < 1"));
    }
    let detail = format!(
        "asym {:.1e}, round trip {:.2}x tol, min Rayleigh {:.3} (min h {:.3}), gap slope {slope:.2}",
        a.i_asymmetry, a.round_trip_over_tol, a.dit_min_rayleigh, a.h_min
    );
    verdict(9, "I[h] symmetry, solve_I, DIT SPD, symmetrization gap", &failures, &detail);
}

#[test]
fn criterion_10_hamiltonian_order() {
    let grid = Grid1D::periodic(64).unwrap();
    let (zeta, psi) = checks::two_mode_reference(grid, SWEEP_AMPLITUDE);
    let points = checks::sweep_points(&DEFAULT_SWEEP, &DEFAULT_SWEEP);
    let rows = checks::par_map(&points, |mu, eps| checks::hamiltonian_point(mu, eps, &zeta, &psi, strip())).unwrap();
    let mut r = SweepReport::default();
    for p in &rows {
        r.push(p.mu, p.eps, "H_app1", (p.app1 - p.ww).abs());
        r.push(p.mu, p.eps, "H_app2", (p.app2 - p.ww).abs());
    }
    r.fit("H_app1", Expectation::both(2.0, 1.0, SLOPE_TOL));
    r.fit("H_app2", Expectation::both(2.0, 1.0, SLOPE_TOL));
    let mut failures = slope_failures(&r);
    let mut worst: f64 = 0.0;
    for mu in DEFAULT_SWEEP {
        let p = checks::hamiltonian_point(mu, 0.0, &zeta, &psi, strip()).unwrap();
        worst = worst.max((p.app1 - p.ww).abs().max((p.app2 - p.ww).abs()) / p.ww.abs());
    }
    if worst > 1e-12 {
        failures.push(format!("eps = 0 disagreement {worst:.2e}"));
    }
    assert!(r.slope("H_app1", Axis::Mu).is_some());
    let detail = format!("{}, eps=0 agreement {worst:.1e}", slope_summary(&r));
    verdict(10, "Hamiltonian approximation slopes", &failures, &detail);
}

