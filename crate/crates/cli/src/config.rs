//! Run configuration: `[section]` headers followed by `key = value` lines.
//!
//! `#` and `;` start comments. Every key is recorded with its line number so
//! that validation errors can point back into the file.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fulldisp_core::models::{ModelKind, StripSettings};
use fulldisp_core::multipliers::{Params, DEFAULT_MU_MAX};
use fulldisp_core::spectral::Grid1D;

/// A single problem located in the configuration text. Line 0 means "whole file".
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

/// Every problem found in one configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source_name: String,
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} problem(s) in {}", self.issues.len(), self.source_name)?;
        for i in &self.issues {
            write!(f, "\n  {i}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

/// Raw parsed document.
#[derive(Debug, Clone, Default)]
pub struct Document {
    sections: BTreeMap<String, (usize, BTreeMap<String, Entry>)>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, Vec<ConfigIssue>> {
        let mut doc = Document::default();
        let mut issues = Vec::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                match rest.strip_suffix(']') {
                    Some(name) if !name.trim().is_empty() => {
                        let name = name.trim().to_ascii_lowercase();
                        if doc.sections.contains_key(&name) {
                            issues.push(ConfigIssue {
                                line,
                                message: format!("duplicate section [{name}]"),
                            });
                        } else {
                            doc.sections.insert(name.clone(), (line, BTreeMap::new()));
                        }
                        current = Some(name);
                    }
                    _ => issues.push(ConfigIssue {
                        line,
                        message: format!("malformed section header '{content}'"),
                    }),
                }
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                issues.push(ConfigIssue {
                    line,
                    message: format!("expected 'key = value', found '{content}'"),
                });
                continue;
            };
            let Some(sec) = current.as_ref() else {
                issues.push(ConfigIssue {
                    line,
                    message: "key outside of any [section]".into(),
                });
                continue;
            };
            let key = key.trim().to_ascii_lowercase();
            let map = &mut doc.sections.get_mut(sec).expect("section exists").1;
            if map.contains_key(&key) {
                issues.push(ConfigIssue {
                    line,
                    message: format!("duplicate key '{key}' in [{sec}]"),
                });
                continue;
            }
            map.insert(
                key,
                Entry {
                    value: value.trim().to_string(),
                    line,
                    used: false,
                },
            );
        }
        if issues.is_empty() {
            Ok(doc)
        } else {
            Err(issues)
        }
    }
}

/// Typed reader over a [`Document`] that accumulates issues instead of stopping.
struct Reader {
    doc: Document,
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn raw(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let (_, map) = self.doc.sections.get_mut(section)?;
        let e = map.get_mut(key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.doc
            .sections
            .get(section)
            .and_then(|(l, m)| m.get(key).map(|e| e.line).or(Some(*l)))
            .unwrap_or(0)
    }

    fn issue(&mut self, line: usize, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            message: message.into(),
        });
    }

    fn get<T: FromStr>(&mut self, section: &str, key: &str, default: T) -> T {
        match self.raw(section, key) {
            None => default,
            Some((v, line)) => match v.parse() {
                Ok(x) => x,
                Err(_) => {
                    self.issue(line, format!("[{section}] {key}: cannot parse '{v}'"));
                    default
                }
            },
        }
    }

    fn get_opt<T: FromStr>(&mut self, section: &str, key: &str) -> Option<T> {
        let (v, line) = self.raw(section, key)?;
        match v.parse() {
            Ok(x) => Some(x),
            Err(_) => {
                self.issue(line, format!("[{section}] {key}: cannot parse '{v}'"));
                None
            }
        }
    }

    fn get_list<T: FromStr>(&mut self, section: &str, key: &str, default: Vec<T>) -> Vec<T> {
        let Some((v, line)) = self.raw(section, key) else {
            return default;
        };
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.parse() {
                Ok(x) => out.push(x),
                Err(_) => self.issue(line, format!("[{section}] {key}: cannot parse list item '{item}'")),
            }
        }
        out
    }

    fn finish_unknown_keys(&mut self) {
        let mut found = Vec::new();
        for (sec, (sline, map)) in &self.doc.sections {
            if !KNOWN_SECTIONS.contains(&sec.as_str()) {
                found.push(ConfigIssue {
                    line: *sline,
                    message: format!("unknown section [{sec}]"),
                });
                continue;
            }
            for (k, e) in map {
                if !e.used {
                    found.push(ConfigIssue {
                        line: e.line,
                        message: format!("unknown key '{k}' in [{sec}]"),
                    });
                }
            }
        }
        self.issues.extend(found);
    }
}

const KNOWN_SECTIONS: [&str; 9] = [
    "model", "grid", "params", "initial", "stepper", "solver", "sweep", "output", "check",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `ζ = a cos(k(x - x0))`, `second = b sin(m(x - x0))`.
    Cosine,
    /// Periodized Gaussian `ζ`, `second = b sin(m(x - x0))`.
    GaussianPeriodic,
}

impl FromStr for Family {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cosine" => Ok(Family::Cosine),
            "gaussian-periodic" => Ok(Family::GaussianPeriodic),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub family: Family,
    pub amplitude: f64,
    pub zeta_mode: u32,
    pub second_amplitude: f64,
    pub second_mode: u32,
    pub width: f64,
    pub center: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

impl FromStr for TimeStep {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        if s.trim().eq_ignore_ascii_case("auto") {
            Ok(TimeStep::Auto)
        } else {
            s.trim().parse().map(TimeStep::Fixed).map_err(|_| ())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperSpec {
    pub dt: TimeStep,
    pub t_end: f64,
    pub record_every: usize,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub strip: StripSettings,
    pub krylov_tol: f64,
    pub krylov_max_iter: usize,
    pub dealias: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mu: Vec<f64>,
    pub eps: Vec<f64>,
    pub models: Vec<ModelKind>,
    /// Amplitude `a` of the reference state `ζ = a cos x`, `ψ = sin x`.
    pub amplitude: f64,
    pub differencing_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    pub seed: u64,
    pub h_fd: f64,
    pub directions: usize,
    pub delta: f64,
    /// Time step of the energy-check conservation run.
    pub dt: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub n: usize,
    pub nz: usize,
    pub length: f64,
    pub mu: f64,
    pub eps: f64,
    pub h_min: f64,
    pub initial: InitialSpec,
    pub stepper: StepperSpec,
    pub solver: SolverSpec,
    pub sweep: SweepSpec,
    pub check: CheckSpec,
    pub out_dir: PathBuf,
    pub resume: Option<PathBuf>,
}

pub const DEFAULT_SWEEP: [f64; 4] = [0.05, 0.1, 0.2, 0.4];

impl RunConfig {
    pub fn params(&self) -> Params {
        Params::new(self.mu, self.eps, self.h_min).expect("validated parameters")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source_name: name.clone(),
            issues: vec![ConfigIssue {
                line: 0,
                message: format!("cannot read file: {e}"),
            }],
        })?;
        Self::parse(&text, &name)
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, ConfigError> {
        let wrap = |issues| ConfigError {
            source_name: source_name.to_string(),
            issues,
        };
        let doc = Document::parse(text).map_err(wrap)?;
        let mut r = Reader {
            doc,
            issues: Vec::new(),
        };
        let model = match r.raw("model", "name") {
            None => ModelKind::Fdgn1,
            Some((v, line)) => v.parse().unwrap_or_else(|_| {
                r.issue(line, format!("[model] name: unknown model '{v}'"));
                ModelKind::Fdgn1
            }),
        };
        let n = r.get("grid", "n", 64usize);
        let nz = r.get("grid", "nz", fulldisp_core::strip::DEFAULT_NZ);
        let length = r.get("grid", "length", 2.0 * PI);
        let mu = r.get("params", "mu", 0.3);
        let eps = r.get("params", "eps", 0.1);
        let h_min = r.get("params", "h_min", 0.1);
        let family = match r.raw("initial", "family") {
            None => Family::Cosine,
            Some((v, line)) => v.parse().unwrap_or_else(|_| {
                r.issue(line, format!("[initial] family: expected cosine or gaussian-periodic, got '{v}'"));
                Family::Cosine
            }),
        };
        let initial = InitialSpec {
            family,
            amplitude: r.get("initial", "amplitude", 0.5),
            zeta_mode: r.get("initial", "zeta_mode", 1),
            second_amplitude: r.get("initial", "second_amplitude", 1.0),
            second_mode: r.get("initial", "second_mode", 1),
            width: r.get("initial", "width", 0.5),
            center: r.get("initial", "center", PI),
            phase: r.get("initial", "phase", 0.0),
        };
        let stepper = StepperSpec {
            dt: match r.raw("stepper", "dt") {
                None => TimeStep::Auto,
                Some((v, line)) => v.parse().unwrap_or_else(|_| {
                    r.issue(line, format!("[stepper] dt: expected a number or 'auto', got '{v}'"));
                    TimeStep::Auto
                }),
            },
            t_end: r.get("stepper", "t_end", 1.0),
            record_every: r.get("stepper", "record_every", 10),
            snapshot_every: r.get("stepper", "snapshot_every", 0),
        };
        let defaults = StripSettings::default();
        let solver = SolverSpec {
            strip: StripSettings {
                nz,
                tol: r.get("solver", "strip_tol", defaults.tol),
                max_iter: r.get("solver", "strip_max_iter", defaults.max_iter),
            },
            krylov_tol: r.get("solver", "krylov_tol", 1e-12),
            krylov_max_iter: r.get("solver", "krylov_max_iter", 500),
            dealias: r.get("solver", "dealias", true),
        };
        let models: Vec<String> = r.get_list("sweep", "models", Vec::new());
        let models_line = r.line_of("sweep", "models");
        let mut kinds = Vec::new();
        for m in models {
            match m.parse::<ModelKind>() {
                Ok(k) => kinds.push(k),
                Err(e) => r.issue(models_line, format!("[sweep] models: {e}")),
            }
        }
        let sweep = SweepSpec {
            mu: r.get_list("sweep", "mu", DEFAULT_SWEEP.to_vec()),
            eps: r.get_list("sweep", "eps", DEFAULT_SWEEP.to_vec()),
            models: kinds,
            amplitude: r.get("sweep", "amplitude", 0.25),
            differencing_dt: r.get("sweep", "differencing_dt", 1e-4),
        };
        let check = CheckSpec {
            seed: r.get("check", "seed", 7),
            h_fd: r.get("check", "h_fd", 1e-5),
            directions: r.get("check", "directions", 5),
            delta: r.get("check", "delta", 1e-8),
            dt: r.get("check", "dt", 1e-3),
            steps: r.get("check", "steps", 1000),
        };
        let out_dir = r.get("output", "dir", PathBuf::from("out"));
        let resume = r.get_opt("output", "resume");
        r.finish_unknown_keys();
        let cfg = RunConfig {
            model,
            n,
            nz,
            length,
            mu,
            eps,
            h_min,
            initial,
            stepper,
            solver,
            sweep,
            check,
            out_dir,
            resume,
        };
        cfg.validate(&mut r);
        if r.issues.is_empty() {
            Ok(cfg)
        } else {
            r.issues.sort_by_key(|i| i.line);
            Err(wrap(r.issues))
        }
    }

    fn validate(&self, r: &mut Reader) {
        let mut check = |ok: bool, sec: &str, key: &str, msg: String| {
            if !ok {
                let line = r.line_of(sec, key);
                r.issue(line, format!("[{sec}] {key}: {msg}"));
            }
        };
        check(self.n >= 8 && self.n.is_multiple_of(2), "grid", "n", format!("must be even and at least 8, got {}", self.n));
        check((8..=64).contains(&self.nz), "grid", "nz", format!("must lie in [8, 64], got {}", self.nz));
        check(self.length > 0.0 && self.length.is_finite(), "grid", "length", format!("must be positive, got {}", self.length));
        check(
            self.mu > 0.0 && self.mu <= DEFAULT_MU_MAX,
            "params",
            "mu",
            format!("must lie in (0, {DEFAULT_MU_MAX}], got {}", self.mu),
        );
        check((0.0..=1.0).contains(&self.eps), "params", "eps", format!("must lie in [0, 1], got {}", self.eps));
        check(self.h_min > 0.0 && self.h_min < 1.0, "params", "h_min", format!("must lie in (0, 1), got {}", self.h_min));
        if let Ok(grid) = Grid1D::new(self.n, self.length) {
            if self.initial.width > 0.0 {
                let (zeta, _) = crate::ic::initial_fields(&self.initial, grid);
                let depth = 1.0 + self.eps * zeta.min();
                check(
                    depth >= self.h_min,
                    "initial",
                    "amplitude",
                    format!("initial depth falls to {depth:.4} < h_min = {} (non-cavitation)", self.h_min),
                );
            }
        }
        check(self.initial.width > 0.0, "initial", "width", "must be positive".into());
        if let TimeStep::Fixed(dt) = self.stepper.dt {
            check(dt > 0.0 && dt.is_finite(), "stepper", "dt", format!("must be positive, got {dt}"));
        }
        check(
            self.stepper.t_end >= 0.0 && self.stepper.t_end.is_finite(),
            "stepper",
            "t_end",
            format!("must be nonnegative, got {}", self.stepper.t_end),
        );
        check(self.stepper.record_every >= 1, "stepper", "record_every", "must be at least 1".into());
        check(
            self.solver.strip.tol > 0.0 && self.solver.strip.tol < 1e-3,
            "solver",
            "strip_tol",
            format!("must lie in (0, 1e-3), got {}", self.solver.strip.tol),
        );
        check(
            self.solver.krylov_tol > 0.0 && self.solver.krylov_tol < 1e-3,
            "solver",
            "krylov_tol",
            format!("must lie in (0, 1e-3), got {}", self.solver.krylov_tol),
        );
        for (key, vals, hi) in [("mu", &self.sweep.mu, DEFAULT_MU_MAX), ("eps", &self.sweep.eps, 1.0)] {
            check(
                vals.len() >= 4,
                "sweep",
                key,
                format!("slope fits need at least 4 values, got {}", vals.len()),
            );
            check(
                vals.iter().all(|&v| v > 0.0 && v <= hi),
                "sweep",
                key,
                format!("values must lie in (0, {hi}]"),
            );
        }
        let eps_max = self.sweep.eps.iter().cloned().fold(0.0, f64::max);
        check(
            1.0 - eps_max * self.sweep.amplitude.abs() >= self.h_min,
            "sweep",
            "amplitude",
            format!("reference state violates non-cavitation at eps = {eps_max}"),
        );
        check(self.sweep.differencing_dt > 0.0, "sweep", "differencing_dt", "must be positive".into());
        check(self.check.h_fd > 0.0, "check", "h_fd", "must be positive".into());
        check(self.check.dt > 0.0 && self.check.dt.is_finite(), "check", "dt", "must be positive".into());
        check(self.check.directions >= 1, "check", "directions", "must be at least 1".into());
        check(self.check.delta > 0.0 && self.check.delta < 1e-3, "check", "delta", "must lie in (0, 1e-3)".into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_file() {
        let c = RunConfig::parse("", "t").unwrap();
        assert_eq!(c.model, ModelKind::Fdgn1);
        assert_eq!(c.sweep.mu, DEFAULT_SWEEP.to_vec());
        assert_eq!(c.stepper.dt, TimeStep::Auto);
    }

    #[test]
    fn parses_sections_and_comments() {
        let text = "# comment\n[model]\nname = WB ; trailing\n[params]\nmu = 0.5\neps=0.2\n[sweep]\nmodels = FDGN1, GN1-classical\n";
        let c = RunConfig::parse(text, "t").unwrap();
        assert_eq!(c.model, ModelKind::Wb);
        assert_eq!(c.mu, 0.5);
        assert_eq!(c.eps, 0.2);
        assert_eq!(c.sweep.models, vec![ModelKind::Fdgn1, ModelKind::Gn1Classical]);
    }

    #[test]
    fn errors_are_line_anchored_and_aggregated() {
        let text = "[params]\nmu = -1\neps = abc\n[grid]\nn = 7\nbogus = 1\n[nope]\n";
        let e = RunConfig::parse(text, "t").unwrap_err();
        let lines: Vec<usize> = e.issues.iter().map(|i| i.line).collect();
        assert!(lines.contains(&2), "{e}");
        assert!(lines.contains(&3), "{e}");
        assert!(lines.contains(&5), "{e}");
        assert!(lines.contains(&6), "{e}");
        assert!(lines.contains(&7), "{e}");
    }

    #[test]
    fn syntax_errors_are_reported() {
        let e = RunConfig::parse("mu = 1\n[grid\n[grid]\nn 64\n", "t").unwrap_err();
        assert_eq!(e.issues.len(), 3, "{e}");
    }

    #[test]
    fn cavitating_initial_data_is_rejected() {
        let e = RunConfig::parse("[params]\neps = 0.9\nh_min = 0.2\n[initial]\namplitude = 1.0\n", "t").unwrap_err();
        assert_eq!(e.issues[0].line, 5, "{e}");
    }
}
