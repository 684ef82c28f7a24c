//! The six subcommands. Each writes CSV tables under the output directory and
//! returns the list of assertions it evaluated.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fulldisp_core::conserved::Diagnostics;
use fulldisp_core::models::{Model, ModelError, ModelKind, Ops, StateForm, StripSettings, WaveStatePsi, WaveStateV};
use fulldisp_core::multipliers::{eval_f0, log_grid, Params, SymbolKind};
use fulldisp_core::spectral::{Grid1D, RealField};
use fulldisp_core::timeint::{default_dt, integrate, PsiDynamics, StepperConfig, VDynamics};
use log::{info, warn};
use thiserror::Error;

use crate::checks::{self, CheckError};
use crate::config::{RunConfig, TimeStep};
use crate::ic::initial_fields;
use crate::snapshot::{check_resume, read_snapshot, write_snapshot, Snapshot, SnapshotError, SnapshotMeta};
use crate::sweep::{Expectation, SweepReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    DtnCheck,
    ConsistencySweep,
    DispersionCheck,
    MultiplierCheck,
    EnergyCheck,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Simulate,
        Command::DtnCheck,
        Command::ConsistencySweep,
        Command::DispersionCheck,
        Command::MultiplierCheck,
        Command::EnergyCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::DtnCheck => "dtn-check",
            Command::ConsistencySweep => "consistency-sweep",
            Command::DispersionCheck => "dispersion-check",
            Command::MultiplierCheck => "multiplier-check",
            Command::EnergyCheck => "energy-check",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand '{s}'"))
    }
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl From<ModelError> for CommandError {
    fn from(e: ModelError) -> Self {
        CommandError::Check(e.into())
    }
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub out_dir: PathBuf,
    pub emit_gnuplot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub table: PathBuf,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub verdicts: Vec<Verdict>,
    pub tables: Vec<PathBuf>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failing_tables(&self) -> Vec<&Path> {
        let mut out: Vec<&Path> = Vec::new();
        for v in self.verdicts.iter().filter(|v| !v.pass) {
            if !out.contains(&v.table.as_path()) {
                out.push(&v.table);
            }
        }
        out
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>, table: &Path) {
        self.verdicts.push(Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
            table: table.to_path_buf(),
        });
    }

    fn table(&mut self, path: &Path, content: &str) -> Result<(), CommandError> {
        fs::write(path, content).map_err(io_at(path))?;
        self.tables.push(path.to_path_buf());
        Ok(())
    }

    /// Folds a sweep's slope checks and assertions in, pointing at its fits table.
    fn absorb(&mut self, sweep: &SweepReport, files: Vec<PathBuf>) {
        let fits = files
            .iter()
            .find(|p| p.to_string_lossy().ends_with("_fits.csv"))
            .cloned()
            .unwrap_or_default();
        for s in &sweep.slopes {
            if s.expected.is_nan() {
                continue;
            }
            self.check(
                format!("{} slope in {}", s.name, s.axis.label()),
                s.pass,
                format!("{:.3} ± {:.3}, expected {} ± {}", s.slope, s.half_width, s.expected, s.tol),
                &fits,
            );
        }
        for (name, e) in &sweep.fit_errors {
            self.check(format!("{name} fit"), false, e.to_string(), &fits);
        }
        for a in &sweep.assertions {
            self.check(a.name.clone(), a.pass, a.detail.clone(), &fits);
        }
        self.tables.extend(files);
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, opts: &Options) -> Result<Report, CommandError> {
    fs::create_dir_all(&opts.out_dir).map_err(io_at(&opts.out_dir))?;
    info!("{} -> {}", cmd.name(), opts.out_dir.display());
    match cmd {
        Command::Simulate => simulate(cfg, opts),
        Command::DtnCheck => dtn_check(cfg, opts),
        Command::ConsistencySweep => consistency_sweep(cfg, opts),
        Command::DispersionCheck => dispersion_check(cfg, opts),
        Command::MultiplierCheck => multiplier_check(cfg, opts),
        Command::EnergyCheck => energy_check(cfg, opts),
    }
}

fn grid_of(cfg: &RunConfig) -> Result<Grid1D, CommandError> {
    Ok(Grid1D::new(cfg.n, cfg.length).map_err(CheckError::from)?)
}

fn ops_of(cfg: &RunConfig, grid: Grid1D, p: Params) -> Ops {
    Ops::new(grid, p)
        .with_dealias(cfg.solver.dealias)
        .with_krylov(cfg.solver.krylov_tol, cfg.solver.krylov_max_iter)
}

fn strip_of(cfg: &RunConfig) -> StripSettings {
    cfg.solver.strip
}

// ---------------------------------------------------------------------------
// simulate

fn diagnostics_csv(rows: &[Diagnostics]) -> String {
    let mut s = String::from("t,mass,momentum,energy\n");
    for d in rows {
        let m = d.momentum.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let _ = writeln!(s, "{:.16e},{:.16e},{},{:.16e}", d.time, d.mass, m, d.energy);
    }
    s
}

fn snapshot_of(cfg: &RunConfig, grid: &Grid1D, t: f64, zeta: &RealField, second: &RealField) -> Snapshot {
    Snapshot {
        meta: SnapshotMeta {
            model: cfg.model,
            n: cfg.n,
            nz: cfg.nz,
            length: cfg.length,
            mu: cfg.mu,
            eps: cfg.eps,
            t,
        },
        x: grid.nodes(),
        zeta: zeta.samples().to_vec(),
        second: second.samples().to_vec(),
    }
}

fn simulate(cfg: &RunConfig, opts: &Options) -> Result<Report, CommandError> {
    let grid = grid_of(cfg)?;
    let p = cfg.params();
    let model = Model::new(cfg.model, ops_of(cfg, grid, p), strip_of(cfg))?;
    let (zeta, second, t0) = match &cfg.resume {
        Some(path) => {
            let snap = read_snapshot(path)?;
            check_resume(&snap.meta, cfg)?;
            let f = |v: Vec<f64>| RealField::new(grid, v).map_err(CheckError::from);
            info!("resuming from {} at t = {}", path.display(), snap.meta.t);
            (f(snap.zeta)?, f(snap.second)?, snap.meta.t)
        }
        None => {
            let (z, s) = initial_fields(&cfg.initial, grid);
            let s = match cfg.model.form() {
                StateForm::Psi => s,
                StateForm::V => model.w_from_v(&z, &s),
            };
            (z, s, 0.0)
        }
    };
    let dt = match cfg.stepper.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => default_dt(cfg.model, &grid, &p),
    };
    let total = (cfg.stepper.t_end - t0).max(0.0);
    let chunk = match cfg.stepper.snapshot_every {
        0 => total,
        k => k as f64 * dt,
    };
    info!("{}: dt = {dt:.3e}, t0 = {t0}, t_end = {}", cfg.model, cfg.stepper.t_end);

    let mut report = Report::default();
    let mut rows: Vec<Diagnostics> = Vec::new();
    let mut state = (zeta, second);
    let mut t = t0;
    let mut index = 0;
    let mut failure = None;
    while failure.is_none() {
        let span = chunk.min(t0 + total - t);
        let mut chunk_rows: Vec<Diagnostics> = Vec::new();
        if span > 1e-12 * total.max(1.0) {
            let scfg = StepperConfig::new(dt.min(span), span, cfg.stepper.record_every).map_err(CheckError::from)?;
            let result = match cfg.model.form() {
                StateForm::Psi => {
                    let s = WaveStatePsi {
                        zeta: state.0.clone(),
                        psi: state.1.clone(),
                    };
                    integrate(&PsiDynamics(&model), s, t, &scfg, &mut chunk_rows)
                        .map(|o| (o.state.zeta, o.state.psi, o.time))
                        .map_err(|f| (f.error, f.last.state.zeta, f.last.state.psi, f.last.time))
                }
                StateForm::V => {
                    let s = WaveStateV {
                        zeta: state.0.clone(),
                        w: state.1.clone(),
                    };
                    integrate(&VDynamics(&model), s, t, &scfg, &mut chunk_rows)
                        .map(|o| (o.state.zeta, o.state.w, o.time))
                        .map_err(|f| (f.error, f.last.state.zeta, f.last.state.w, f.last.time))
                }
            };
            match result {
                Ok((z, s, tt)) => {
                    state = (z, s);
                    t = tt;
                }
                Err((e, z, s, tt)) => {
                    state = (z, s);
                    t = tt;
                    failure = Some(e);
                }
            }
        } else if rows.is_empty() {
            chunk_rows.push(Diagnostics {
                time: t,
                mass: state.0.integrate(),
                momentum: None,
                energy: f64::NAN,
            });
        }
        let skip = usize::from(!rows.is_empty() && !chunk_rows.is_empty());
        rows.extend(chunk_rows.into_iter().skip(skip));
        let done = t >= t0 + total - 1e-12 * total.max(1.0);
        if cfg.stepper.snapshot_every > 0 && !done && failure.is_none() {
            let path = opts.out_dir.join(format!("snapshot_{index:05}.csv"));
            write_snapshot(&path, &snapshot_of(cfg, &grid, t, &state.0, &state.1))?;
            report.tables.push(path);
            index += 1;
        }
        if done {
            break;
        }
    }

    let diag_path = opts.out_dir.join("diagnostics.csv");
    report.table(&diag_path, &diagnostics_csv(&rows))?;
    let snap_path = opts.out_dir.join("snapshot_final.csv");
    write_snapshot(&snap_path, &snapshot_of(cfg, &grid, t, &state.0, &state.1))?;
    report.tables.push(snap_path.clone());
    match failure {
        Some(e) => report.check("integration", false, e.to_string(), &snap_path),
        None => report.check("integration", true, format!("reached t = {t}"), &snap_path),
    }
    let finite = rows.iter().all(|d| d.time.is_finite() && d.mass.is_finite());
    report.check("diagnostics finite", finite, format!("{} rows", rows.len()), &diag_path);
    Ok(report)
}

// ---------------------------------------------------------------------------
// dtn-check

pub const FLAT_MUS: [f64; 3] = [0.01, 0.1, 1.0];
pub const FLAT_TOL: f64 = 1e-10;
pub const FD_LEVELS: [(usize, usize); 3] = [(128, 64), (256, 128), (512, 256)];

fn dtn_check(cfg: &RunConfig, opts: &Options) -> Result<Report, CommandError> {
    let mut report = Report::default();
    let strip = strip_of(cfg);

    let flat_path = opts.out_dir.join("dtn_flat.csv");
    let mut s = String::from("mu,modes,k_max,max_rel_err,seconds\n");
    let mut flat = Vec::new();
    for &mu in &FLAT_MUS {
        let r = checks::flat_dtn(mu, cfg.n, cfg.nz, strip.tol.min(1e-13))?;
        let _ = writeln!(s, "{},{},{},{:.3e},{:.4}", mu, r.modes_checked, r.k_max, r.max_rel_err, r.elapsed.as_secs_f64());
        flat.push(r);
    }
    report.table(&flat_path, &s)?;
    for r in &flat {
        report.check(
            format!("flat DtN mu={}", r.mu),
            r.max_rel_err <= FLAT_TOL,
            format!("max rel err {:.2e} over {} modes", r.max_rel_err, r.modes_checked),
            &flat_path,
        );
    }

    let fd_path = opts.out_dir.join("dtn_fd_equivalence.csv");
    let fd = checks::fd_equivalence(cfg.mu, cfg.eps.max(1e-3), cfg.n, cfg.nz, &FD_LEVELS)?;
    let mut s = String::from("nx,nz,gap,order,fd_iterations\n");
    for (i, (nx, nz)) in fd.resolutions.iter().enumerate() {
        let order = if i == 0 { String::new() } else { format!("{:.4}", fd.orders[i - 1]) };
        let _ = writeln!(s, "{nx},{nz},{:.6e},{order},{}", fd.gaps[i], fd.fd_iterations[i]);
    }
    report.table(&fd_path, &s)?;
    for (i, o) in fd.orders.iter().enumerate() {
        report.check(
            format!("FD equivalence order {}", i + 1),
            (o - 2.0).abs() <= 0.3,
            format!("{o:.3}"),
            &fd_path,
        );
    }

    let points = checks::sweep_points(&cfg.sweep.mu, &cfg.sweep.eps);
    let rows = checks::par_map(&points, |mu, eps| checks::vbar_point(mu, eps, cfg.sweep.amplitude, cfg.n, strip))?;
    let mut sweep = SweepReport::default();
    for r in &rows {
        for (name, v) in checks::VbarPoint::NAMES.iter().zip(r.values()) {
            sweep.push(r.mu, r.eps, name, v);
        }
    }
    sweep.fit("vbar-f1grad", Expectation::both(1.0, 1.0, 0.3));
    for name in &checks::VbarPoint::NAMES[1..] {
        sweep.fit(name, Expectation::both(2.0, 1.0, 0.3));
    }
    let files = sweep
        .write(&opts.out_dir, "dtn_sweep", opts.emit_gnuplot)
        .map_err(io_at(&opts.out_dir))?;
    report.absorb(&sweep, files);
    Ok(report)
}

// ---------------------------------------------------------------------------
// consistency-sweep

pub const DEFAULT_CONSISTENCY_MODELS: [ModelKind; 5] = [
    ModelKind::Fdgn1,
    ModelKind::Fdgn2,
    ModelKind::FdgnDit,
    ModelKind::Wb,
    ModelKind::Gn1Classical,
];

/// Expected `(μ, ε)` consistency exponents; `None` for baselines that are only reported.
pub fn consistency_exponents(kind: ModelKind) -> Option<(f64, f64)> {
    match kind {
        ModelKind::Fdgn1 | ModelKind::Fdgn2 | ModelKind::FdgnDit => Some((2.0, 1.0)),
        ModelKind::Wb => Some((1.0, 1.0)),
        _ => None,
    }
}

fn consistency_sweep(cfg: &RunConfig, opts: &Options) -> Result<Report, CommandError> {
    let models: Vec<ModelKind> = if cfg.sweep.models.is_empty() {
        DEFAULT_CONSISTENCY_MODELS.to_vec()
    } else {
        cfg.sweep.models.iter().copied().filter(|&m| m != ModelKind::WwRef).collect()
    };
    let strip = strip_of(cfg);
    let points = checks::sweep_points(&cfg.sweep.mu, &cfg.sweep.eps);
    let rows = checks::par_map(&points, |mu, eps| {
        checks::consistency_point(&models, mu, eps, cfg.sweep.amplitude, cfg.n, strip, cfg.sweep.differencing_dt)
    })?;
    let mut sweep = SweepReport::default();
    for r in rows.iter().flatten() {
        if r.residual.differencing_warning {
            warn!("{} at mu={}, eps={}: time-differencing estimate moved by more than 10%", r.model, r.mu, r.eps);
        }
        sweep.push(r.mu, r.eps, r.model.tag(), r.residual.combined());
    }
    for &m in &models {
        let expect = match consistency_exponents(m) {
            Some((a, b)) => Expectation::both(a, b, 0.3),
            None => Expectation::REPORT_ONLY,
        };
        sweep.fit(m.tag(), expect);
    }
    if models.contains(&ModelKind::Fdgn1) && models.contains(&ModelKind::Gn1Classical) {
        let full = sweep.series(ModelKind::Fdgn1.tag());
        let classic = sweep.series(ModelKind::Gn1Classical.tag());
        let mut violations = Vec::new();
        let mut compared = 0;
        for (a, b) in full.iter().zip(&classic) {
            if a.mu >= 0.2 {
                compared += 1;
                if a.value >= b.value {
                    violations.push(format!("(mu={}, eps={})", a.mu, a.eps));
                }
            }
        }
        let pass = violations.is_empty() && compared > 0;
        let detail = if pass {
            format!("{compared} points with mu >= 0.2")
        } else {
            format!("not strictly smaller at {}", violations.join(" "))
        };
        sweep.assert("FDGN1 below GN1-classical", pass, detail);
    }
    let files = sweep
        .write(&opts.out_dir, "consistency_sweep", opts.emit_gnuplot)
        .map_err(io_at(&opts.out_dir))?;
    let mut report = Report::default();
    report.absorb(&sweep, files);

    let ham = hamiltonian_sweep(cfg, &points)?;
    let files = ham
        .write(&opts.out_dir, "hamiltonian_sweep", opts.emit_gnuplot)
        .map_err(io_at(&opts.out_dir))?;
    report.absorb(&ham, files);
    Ok(report)
}

/// `|H_app - H_ww|` on the two-mode reference state, plus agreement at ε = 0.
pub fn hamiltonian_sweep(cfg: &RunConfig, points: &[(f64, f64)]) -> Result<SweepReport, CommandError> {
    let grid = grid_of(cfg)?;
    let (zeta, psi) = checks::two_mode_reference(grid, cfg.sweep.amplitude);
    let strip = strip_of(cfg);
    let rows = checks::par_map(points, |mu, eps| checks::hamiltonian_point(mu, eps, &zeta, &psi, strip))?;
    let mut sweep = SweepReport::default();
    for r in &rows {
        sweep.push(r.mu, r.eps, "H_app1", (r.app1 - r.ww).abs());
        sweep.push(r.mu, r.eps, "H_app2", (r.app2 - r.ww).abs());
    }
    sweep.fit("H_app1", Expectation::both(2.0, 1.0, 0.3));
    sweep.fit("H_app2", Expectation::both(2.0, 1.0, 0.3));
    let mut worst: f64 = 0.0;
    for &mu in &cfg.sweep.mu {
        let r = checks::hamiltonian_point(mu, 0.0, &zeta, &psi, strip)?;
        worst = worst.max((r.app1 - r.ww).abs().max((r.app2 - r.ww).abs()) / r.ww.abs());
    }
    sweep.assert("Hamiltonians agree at eps = 0", worst <= 1e-12, format!("max rel diff {worst:.2e}"));
    Ok(sweep)
}

// ---------------------------------------------------------------------------
// dispersion-check

pub const DEFAULT_DISPERSION_MODELS: [ModelKind; 7] = [
    ModelKind::Fdgn1,
    ModelKind::Fdgn2,
    ModelKind::FdgnDit,
    ModelKind::Wb,
    ModelKind::Gn1Classical,
    ModelKind::Gn2Classical,
    ModelKind::WbClassical,
];
pub const DISPERSION_TOL: f64 = 1e-6;
pub const CLASSICAL_MIN_DEVIATION: f64 = 0.05;

fn dispersion_check(cfg: &RunConfig, opts: &Options) -> Result<Report, CommandError> {
    let models: Vec<ModelKind> = if cfg.sweep.models.is_empty() {
        DEFAULT_DISPERSION_MODELS.to_vec()
    } else {
        cfg.sweep.models.clone()
    };
    let strip = strip_of(cfg);
    let mut report = Report::default();
    let path = opts.out_dir.join("dispersion.csv");
    let mut s = String::from("model,k,xi,x,omega_measured,omega_exact,rel_err\n");
    let sqrt_mu = cfg.mu.sqrt();
    let mut verdicts = Vec::new();
    for &m in &models {
        if m.is_classical() {
            let r = checks::dispersion_at_x3(m, cfg.mu, cfg.check.delta, strip)?;
            let _ = writeln!(s, "{},{},{:.6},{:.6},{:.12e},{:.12e},{:.3e}", m, r.k, r.xi, sqrt_mu * r.xi, r.omega_measured, r.omega_exact, r.rel_err);
            verdicts.push((
                format!("{m} deviates at x=3"),
                r.rel_err > CLASSICAL_MIN_DEVIATION,
                format!("rel deviation {:.3}", r.rel_err),
            ));
        } else {
            let rows = checks::dispersion_rows(m, cfg.n, cfg.mu, cfg.eps, cfg.check.delta, strip)?;
            let mut worst: f64 = 0.0;
            for r in &rows {
                let _ = writeln!(s, "{},{},{:.6},{:.6},{:.12e},{:.12e},{:.3e}", m, r.k, r.xi, sqrt_mu * r.xi, r.omega_measured, r.omega_exact, r.rel_err);
                worst = worst.max(r.rel_err);
            }
            verdicts.push((
                format!("{m} dispersion exact"),
                worst <= DISPERSION_TOL,
                format!("max rel err {worst:.2e} over {} modes", rows.len()),
            ));
        }
    }
    report.table(&path, &s)?;
    for (name, pass, detail) in verdicts {
        report.check(name, pass, detail, &path);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// multiplier-check

pub const IDENTITY_TOL: f64 = 1e-13;
pub const TANH4_RANGE: (f64, f64) = (0.08, 0.14);

fn multiplier_check(cfg: &RunConfig, opts: &Options) -> Result<Report, CommandError> {
    let p = cfg.params();
    let mut report = Report::default();

    let table_path = opts.out_dir.join("multiplier_symbols.csv");
    let mut s = String::from("xi,F1,F2,F3,sqrtF3,F0(z=-1)\n");
    for xi in log_grid(1e-3, 1e3, 241) {
        let _ = writeln!(
            s,
            "{:.10e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            xi,
            SymbolKind::F1.eval(xi, &p),
            SymbolKind::F2.eval(xi, &p),
            SymbolKind::F3.eval(xi, &p),
            SymbolKind::SqrtF3.eval(xi, &p),
            eval_f0(-1.0, xi, &p).map_err(CheckError::from)?,
        );
    }
    report.table(&table_path, &s)?;

    let r = checks::multiplier_report()?;
    let path = opts.out_dir.join("multiplier_checks.csv");
    let mut s = String::from("check,value,threshold,status\n");
    let mut rows: Vec<(String, f64, String, bool)> = vec![
        ("F1 = 1 - (x^2/3) F2".into(), r.f2_identity, format!("<= {IDENTITY_TOL:e}"), r.f2_identity <= IDENTITY_TOL),
        ("F3 F1 = F2".into(), r.f3_product, format!("<= {IDENTITY_TOL:e}"), r.f3_product <= IDENTITY_TOL),
    ];
    for (name, scan) in [
        ("F3 <= 1/(1 + x/3)", r.f3_bound),
        ("F2 <= 1/(1 + x^2/3)", r.f2_bound),
        ("1/F1 <= 1 + x", r.inv_f1_bound),
    ] {
        rows.push((
            format!("{name} max residual (argmax x = {:.4}, sharp constant {:.6})", scan.argmax_x, scan.sharp_constant),
            scan.max_residual,
            "<= 0".into(),
            scan.max_residual <= 0.0,
        ));
    }
    for e in &r.taylor.entries {
        rows.push((
            format!("{} constant (order {}), doubled grid {:.6e}", e.name, e.order, e.constant_doubled),
            e.constant,
            "finite, change < 5%".into(),
            e.is_stable(),
        ));
    }
    let c4 = r.taylor.get("tanh-order-4").map_or(f64::NAN, |e| e.constant);
    rows.push((
        "tanh fourth-order constant".into(),
        c4,
        format!("in [{}, {}]", TANH4_RANGE.0, TANH4_RANGE.1),
        (TANH4_RANGE.0..=TANH4_RANGE.1).contains(&c4),
    ));
    for (name, v, thr, pass) in &rows {
        let _ = writeln!(s, "\"{name}\",{v:.6e},{thr},{}", if *pass { "PASS" } else { "FAIL" });
    }
    report.table(&path, &s)?;
    for (name, v, thr, pass) in rows {
        report.check(name, pass, format!("{v:.3e} (need {thr})"), &path);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// energy-check

pub const MASS_DRIFT_TOL: f64 = 1e-12;
pub const ENERGY_DRIFT_TOL: f64 = 1e-8;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const ORDER_TOL: f64 = 0.2;

fn energy_check(cfg: &RunConfig, opts: &Options) -> Result<Report, CommandError> {
    let grid = grid_of(cfg)?;
    let p = cfg.params();
    let strip = strip_of(cfg);
    let mut report = Report::default();

    let path = opts.out_dir.join("energy_conservation.csv");
    let model = Model::new(cfg.model, ops_of(cfg, grid, p), strip)?;
    let (zeta, second) = initial_fields(&cfg.initial, grid);
    let dt = cfg.check.dt;
    let run = checks::conservation_run(&model, &zeta, &second, dt, cfg.check.steps, cfg.stepper.record_every)?;
    report.table(
        &path,
        &format!(
            "model,steps,dt,mass_drift,energy_drift,seconds\n{},{},{},{:.3e},{:.3e},{:.3}\n",
            run.model,
            run.steps,
            dt,
            run.mass_drift,
            run.energy_drift,
            run.elapsed.as_secs_f64()
        ),
    )?;
    report.check("mass drift", run.mass_drift < MASS_DRIFT_TOL, format!("{:.2e}", run.mass_drift), &path);
    report.check("energy drift", run.energy_drift < ENERGY_DRIFT_TOL, format!("{:.2e}", run.energy_drift), &path);

    let path = opts.out_dir.join("energy_rk4_order.csv");
    let rows = self_convergence_all(cfg)?;
    let mut s = String::from("model,dt,diff_1,diff_2,order\n");
    for r in &rows {
        let _ = writeln!(s, "{},{:.6e},{:.6e},{:.6e},{:.4}", r.model, r.dt, r.diffs[0], r.diffs[1], r.order);
    }
    report.table(&path, &s)?;
    for r in &rows {
        report.check(
            format!("{} RK4 order", r.model),
            (r.order - 4.0).abs() <= ORDER_TOL,
            format!("{:.3}", r.order),
            &path,
        );
    }

    let path = opts.out_dir.join("energy_gradients.csv");
    let g = checks::gradient_check(cfg.n, cfg.mu, cfg.eps, cfg.check.seed, cfg.check.directions, cfg.check.h_fd)?;
    report.table(
        &path,
        &format!("functional,max_rel_err\nH_app1,{:.3e}\nH_app2,{:.3e}\nH_wb,{:.3e}\n", g.app1, g.app2, g.wb),
    )?;
    for (name, v) in [("H_app1", g.app1), ("H_app2", g.app2), ("H_wb", g.wb)] {
        report.check(format!("{name} gradient"), v < GRADIENT_TOL, format!("{v:.2e}"), &path);
    }

    let path = opts.out_dir.join("operator_algebra.csv");
    let tol = cfg.solver.krylov_tol;
    let a = checks::operator_algebra(cfg.n, cfg.mu, cfg.eps.max(0.2), &cfg.sweep.mu, cfg.check.seed, 8, tol)?;
    let gap_mus: Vec<f64> = a.symmetrization_gap.iter().map(|g| g.0).collect();
    let gap_vals: Vec<f64> = a.symmetrization_gap.iter().map(|g| g.1).collect();
    let gap_fit = crate::fit::fit_slope(&gap_mus, &gap_vals);
    let gap_slope = gap_fit.as_ref().map_or(f64::NAN, |f| f.slope);
    let mut s = format!(
        "check,value\ni_asymmetry,{:.3e}\nsolve_i_round_trip_over_tol,{:.3}\ndit_min_rayleigh,{:.6}\nh_min,{:.6}\nsymmetrization_gap_slope_mu,{:.4}\n",
        a.i_asymmetry, a.round_trip_over_tol, a.dit_min_rayleigh, a.h_min, gap_slope
    );
    for (m, g) in &a.symmetrization_gap {
        let _ = writeln!(s, "symmetrization_gap(mu={m}),{g:.6e}");
    }
    report.table(&path, &s)?;
    report.check("I[h] symmetry", a.i_asymmetry <= 1e-9, format!("{:.2e}", a.i_asymmetry), &path);
    report.check(
        "solve_I round trip",
        a.round_trip_over_tol <= 10.0,
        format!("{:.2} x tol", a.round_trip_over_tol),
        &path,
    );
    report.check(
        "DIT operator SPD",
        a.dit_min_rayleigh >= a.h_min,
        format!("min Rayleigh {:.4} vs h_min {:.4}", a.dit_min_rayleigh, a.h_min),
        &path,
    );
    report.check("symmetrization gap slope", gap_slope >= 1.0, format!("{gap_slope:.3}"), &path);
    Ok(report)
}

/// RK4 self-convergence of every model on a coarse grid with `dt`, `dt/2`, `dt/4`.
pub fn self_convergence_all(cfg: &RunConfig) -> Result<Vec<checks::SelfConvergence>, CommandError> {
    let grid = Grid1D::periodic(32).map_err(CheckError::from)?;
    let t_end = 0.5;
    let strip = StripSettings { nz: 16, ..strip_of(cfg) };
    let (zeta, second) = checks::cosine_reference(grid, 0.5);
    ModelKind::ALL
        .iter()
        .map(|&kind| {
            let mu = if kind == ModelKind::Gn1Classical { 0.01 } else { cfg.mu };
            let p = Params::new(mu, cfg.eps, cfg.h_min).map_err(CheckError::from)?;
            let model = Model::new(kind, Ops::new(grid, p), strip)?;
            let base = 2.0 * default_dt(kind, &grid, &p);
            let dt = t_end / (t_end / base).ceil();
            Ok(checks::self_convergence(&model, &zeta, &second, dt, t_end)?)
        })
        .collect()
}

/// Subcommand report as `PASS name: detail` lines.
pub fn summary(report: &Report) -> String {
    let mut s = String::new();
    for v in &report.verdicts {
        let _ = writeln!(s, "{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    s
}
