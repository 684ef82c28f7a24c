//! Parameter-sweep tables, slope fits and their CSV/gnuplot output.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::fit::{fit_power_law, FitError, JointFit};

#[derive(Debug, Clone, PartialEq)]
pub struct PointRow {
    pub mu: f64,
    pub eps: f64,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Mu,
    Eps,
}

impl Axis {
    pub fn label(&self) -> &'static str {
        match self {
            Axis::Mu => "mu",
            Axis::Eps => "eps",
        }
    }
}

/// A fitted exponent compared against `expected ± tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeCheck {
    pub name: String,
    pub axis: Axis,
    pub slope: f64,
    /// Half-width of the 95% band on `slope`.
    pub half_width: f64,
    pub r2: f64,
    pub points: usize,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

/// A named boolean assertion that is not a slope (orderings, thresholds).
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub points: Vec<PointRow>,
    pub slopes: Vec<SlopeCheck>,
    pub assertions: Vec<Assertion>,
    /// Errors that could not be fitted, e.g. a series floored at solver tolerance.
    pub fit_errors: Vec<(String, FitError)>,
}

/// What to expect from one error series: `(expected, tol)` per axis, `None` to report only.
#[derive(Debug, Clone, Copy)]
pub struct Expectation {
    pub mu: Option<(f64, f64)>,
    pub eps: Option<(f64, f64)>,
}

impl Expectation {
    pub const REPORT_ONLY: Expectation = Expectation { mu: None, eps: None };

    pub fn both(mu: f64, eps: f64, tol: f64) -> Self {
        Expectation {
            mu: Some((mu, tol)),
            eps: Some((eps, tol)),
        }
    }
}

impl SweepReport {
    pub fn push(&mut self, mu: f64, eps: f64, name: &str, value: f64) {
        self.points.push(PointRow {
            mu,
            eps,
            name: name.to_string(),
            value,
        });
    }

    pub fn assert(&mut self, name: &str, pass: bool, detail: String) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            detail,
            pass,
        });
    }

    /// Series names in first-appearance order.
    pub fn names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.points {
            if !out.contains(&p.name) {
                out.push(p.name.clone());
            }
        }
        out
    }

    pub fn series(&self, name: &str) -> Vec<&PointRow> {
        self.points.iter().filter(|p| p.name == name).collect()
    }

    /// Joint fit `value ≈ C μ^a ε^b` of series `name`; records slope checks or the fit error.
    pub fn fit(&mut self, name: &str, expect: Expectation) -> Option<JointFit> {
        let rows = self.series(name);
        let mus: Vec<f64> = rows.iter().map(|r| r.mu).collect();
        let epss: Vec<f64> = rows.iter().map(|r| r.eps).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.value).collect();
        match fit_power_law(&mus, &epss, &ys) {
            Ok(fit) => {
                for (axis, est, exp) in [(Axis::Mu, fit.mu, expect.mu), (Axis::Eps, fit.eps, expect.eps)] {
                    let (expected, tol) = exp.unwrap_or((f64::NAN, f64::NAN));
                    self.slopes.push(SlopeCheck {
                        name: name.to_string(),
                        axis,
                        slope: est.slope,
                        half_width: est.half_width,
                        r2: fit.r2,
                        points: ys.len(),
                        expected,
                        tol,
                        pass: exp.is_none() || est.within(expected, tol),
                    });
                }
                Some(fit)
            }
            Err(e) => {
                self.fit_errors.push((name.to_string(), e));
                None
            }
        }
    }

    pub fn slope(&self, name: &str, axis: Axis) -> Option<&SlopeCheck> {
        self.slopes.iter().find(|s| s.name == name && s.axis == axis)
    }

    pub fn passed(&self) -> bool {
        self.fit_errors.is_empty()
            && self.slopes.iter().all(|s| s.pass)
            && self.assertions.iter().all(|a| a.pass)
    }

    /// Long-format table: `mu,eps,err_name,value`.
    pub fn points_csv(&self) -> String {
        let mut s = String::from("mu,eps,err_name,value\n");
        for p in &self.points {
            let _ = writeln!(s, "{},{},{},{:.10e}", p.mu, p.eps, p.name, p.value);
        }
        s
    }

    /// One row per `(mu, eps)` with one `err_<name>` column per series, then
    /// `#`-prefixed slope lines.
    pub fn wide_csv(&self) -> String {
        let names = self.names();
        let mut keys: Vec<(f64, f64)> = Vec::new();
        for p in &self.points {
            if !keys.contains(&(p.mu, p.eps)) {
                keys.push((p.mu, p.eps));
            }
        }
        let mut s = String::from("mu,eps");
        for n in &names {
            let _ = write!(s, ",err_{n}");
        }
        s.push('\n');
        for (mu, eps) in keys {
            let _ = write!(s, "{mu},{eps}");
            for n in &names {
                match self.points.iter().find(|p| p.mu == mu && p.eps == eps && &p.name == n) {
                    Some(p) => {
                        let _ = write!(s, ",{:.10e}", p.value);
                    }
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        for c in &self.slopes {
            let _ = writeln!(
                s,
                "# slope {} {} = {:.4} ± {:.4} (r2 {:.4}){}",
                c.name,
                c.axis.label(),
                c.slope,
                c.half_width,
                c.r2,
                if c.expected.is_nan() {
                    String::new()
                } else {
                    format!(" expected {} ± {} {}", c.expected, c.tol, pass_word(c.pass))
                }
            );
        }
        s
    }

    /// `err_name,axis,slope,half_width_95,r2,points,expected,tol,status`.
    pub fn fits_csv(&self) -> String {
        let mut s = String::from("err_name,axis,slope,half_width_95,r2,points,expected,tol,status\n");
        for c in &self.slopes {
            let status = if c.expected.is_nan() { "REPORT" } else { pass_word(c.pass) };
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6},{},{},{},{}",
                c.name,
                c.axis.label(),
                c.slope,
                c.half_width,
                c.r2,
                c.points,
                opt(c.expected),
                opt(c.tol),
                status
            );
        }
        for (name, e) in &self.fit_errors {
            let _ = writeln!(s, "{name},,,,,,,,FAIL ({e})");
        }
        for a in &self.assertions {
            let _ = writeln!(s, "{},,,,,,,,{} ({})", a.name, pass_word(a.pass), a.detail);
        }
        s
    }

    /// Log-log plot of every series against μ, one curve per ε.
    pub fn gnuplot(&self, points_file: &str, title: &str) -> String {
        let mut epss: Vec<f64> = Vec::new();
        for p in &self.points {
            if !epss.contains(&p.eps) {
                epss.push(p.eps);
            }
        }
        let mut s = String::new();
        let _ = writeln!(s, "set datafile separator ','");
        let _ = writeln!(s, "set logscale xy");
        let _ = writeln!(s, "set xlabel 'mu'");
        let _ = writeln!(s, "set key outside");
        for (i, name) in self.names().iter().enumerate() {
            let _ = writeln!(s, "set title '{title}: {name}'");
            let _ = writeln!(s, "set term pngcairo size 900,600");
            let _ = writeln!(s, "set output '{title}_{i}.png'");
            let curves: Vec<String> = epss
                .iter()
                .map(|e| {
                    format!(
                        "'{points_file}' every ::1 using ($2=={e} && strcol(3) eq '{name}' ? $1 : 1/0):4 with linespoints title 'eps={e}'"
                    )
                })
                .collect();
            let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
        }
        s
    }

    /// Writes `<stem>_points.csv`, `<stem>.csv`, `<stem>_fits.csv` and optionally `<stem>.gp`.
    pub fn write(&self, dir: &Path, stem: &str, gnuplot: bool) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let points = dir.join(format!("{stem}_points.csv"));
        let wide = dir.join(format!("{stem}.csv"));
        let fits = dir.join(format!("{stem}_fits.csv"));
        fs::write(&points, self.points_csv())?;
        fs::write(&wide, self.wide_csv())?;
        fs::write(&fits, self.fits_csv())?;
        let mut out = vec![points.clone(), wide, fits];
        if gnuplot {
            let gp = dir.join(format!("{stem}.gp"));
            let name = points.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            fs::write(&gp, self.gnuplot(&name, stem))?;
            out.push(gp);
        }
        Ok(out)
    }
}

fn pass_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn opt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}
