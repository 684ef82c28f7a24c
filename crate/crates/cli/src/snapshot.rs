//! State snapshots: `#key=value` header lines followed by `x,zeta,<second>` rows.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fulldisp_core::models::{ModelKind, StateForm};
use thiserror::Error;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

const REQUIRED: [&str; 8] = ["model", "n", "nz", "L", "mu", "eps", "t", "schema-version"];

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing header key '{0}'")]
    MissingKey(&'static str),
    #[error("schema version {found} is not supported (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: String },
    #[error("refusing to resume: snapshot has {key} = {found}, run config has {expected}")]
    Mismatch {
        key: &'static str,
        found: String,
        expected: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMeta {
    pub model: ModelKind,
    pub n: usize,
    pub nz: usize,
    pub length: f64,
    pub mu: f64,
    pub eps: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub meta: SnapshotMeta,
    pub x: Vec<f64>,
    pub zeta: Vec<f64>,
    pub second: Vec<f64>,
}

fn second_name(kind: ModelKind) -> &'static str {
    match kind.form() {
        StateForm::Psi => "psi",
        StateForm::V => "w",
    }
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<(), SnapshotError> {
    let io_err = |source| SnapshotError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    let m = &snap.meta;
    let mut body = || -> io::Result<()> {
        writeln!(w, "#model={}", m.model)?;
        writeln!(w, "#n={}", m.n)?;
        writeln!(w, "#nz={}", m.nz)?;
        writeln!(w, "#L={:.16e}", m.length)?;
        writeln!(w, "#mu={:.16e}", m.mu)?;
        writeln!(w, "#eps={:.16e}", m.eps)?;
        writeln!(w, "#t={:.16e}", m.t)?;
        writeln!(w, "#schema-version={SCHEMA_VERSION}")?;
        writeln!(w, "x,zeta,{}", second_name(m.model))?;
        for i in 0..snap.zeta.len() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", snap.x[i], snap.zeta[i], snap.second[i])?;
        }
        w.flush()
    };
    body().map_err(io_err)
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    let text = fs::read_to_string(path).map_err(|source| SnapshotError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_snapshot(&text)
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot, SnapshotError> {
    let mut header: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut x = Vec::new();
    let mut zeta = Vec::new();
    let mut second = Vec::new();
    let mut seen_columns = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let bad = |message: String| SnapshotError::Malformed { line, message };
        if let Some(h) = raw.strip_prefix('#') {
            let (k, v) = h
                .split_once('=')
                .ok_or_else(|| bad(format!("header line without '=': '{raw}'")))?;
            header.insert(k.trim().to_string(), (v.trim().to_string(), line));
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        if !seen_columns {
            seen_columns = true;
            let cols: Vec<&str> = raw.split(',').map(str::trim).collect();
            if cols.len() != 3 || cols[0] != "x" || cols[1] != "zeta" {
                return Err(bad(format!("unexpected column header '{raw}'")));
            }
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected 3 columns, found {}", fields.len())));
        }
        let mut vals = [0.0; 3];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("cannot parse '{}'", f.trim())))?;
            if !v.is_finite() {
                return Err(bad(format!("non-finite value '{}'", f.trim())));
            }
        }
        x.push(vals[0]);
        zeta.push(vals[1]);
        second.push(vals[2]);
    }
    for key in REQUIRED {
        if !header.contains_key(key) {
            return Err(SnapshotError::MissingKey(key));
        }
    }
    let version = &header["schema-version"].0;
    if version.parse::<u32>() != Ok(SCHEMA_VERSION) {
        return Err(SnapshotError::SchemaVersion {
            found: version.clone(),
        });
    }
    fn field<T: std::str::FromStr>(
        h: &BTreeMap<String, (String, usize)>,
        key: &'static str,
    ) -> Result<T, SnapshotError> {
        let (v, line) = &h[key];
        v.parse().map_err(|_| SnapshotError::Malformed {
            line: *line,
            message: format!("cannot parse header {key} = '{v}'"),
        })
    }
    let meta = SnapshotMeta {
        model: field(&header, "model")?,
        n: field(&header, "n")?,
        nz: field(&header, "nz")?,
        length: field(&header, "L")?,
        mu: field(&header, "mu")?,
        eps: field(&header, "eps")?,
        t: field(&header, "t")?,
    };
    if zeta.len() != meta.n {
        return Err(SnapshotError::Malformed {
            line: header["n"].1,
            message: format!("header n = {} but file has {} rows", meta.n, zeta.len()),
        });
    }
    Ok(Snapshot {
        meta,
        x,
        zeta,
        second,
    })
}

/// Refuses to resume from a snapshot whose header disagrees with `cfg`.
pub fn check_resume(meta: &SnapshotMeta, cfg: &RunConfig) -> Result<(), SnapshotError> {
    let mismatch = |key, found: String, expected: String| {
        Err(SnapshotError::Mismatch {
            key,
            found,
            expected,
        })
    };
    if meta.model != cfg.model {
        return mismatch("model", meta.model.to_string(), cfg.model.to_string());
    }
    if meta.n != cfg.n {
        return mismatch("n", meta.n.to_string(), cfg.n.to_string());
    }
    if meta.model == ModelKind::WwRef && meta.nz != cfg.nz {
        return mismatch("nz", meta.nz.to_string(), cfg.nz.to_string());
    }
    for (key, a, b) in [("L", meta.length, cfg.length), ("mu", meta.mu, cfg.mu), ("eps", meta.eps, cfg.eps)] {
        if a != b {
            return mismatch(key, a.to_string(), b.to_string());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let n = 8;
        Snapshot {
            meta: SnapshotMeta {
                model: ModelKind::Fdgn2,
                n,
                nz: 24,
                length: 2.0 * std::f64::consts::PI,
                mu: 0.3,
                eps: 0.1,
                t: 1.0 / 3.0,
            },
            x: (0..n).map(|i| i as f64 * std::f64::consts::FRAC_PI_4).collect(),
            zeta: (0..n).map(|i| (i as f64 * 0.1).sin() / 3.0).collect(),
            second: (0..n).map(|i| (i as f64).exp() * 1e-7).collect(),
        }
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = sample();
        write_snapshot(&p, &s).unwrap();
        let back = read_snapshot(&p).unwrap();
        assert_eq!(back, s);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("x,zeta,w"));
    }

    #[test]
    fn missing_key_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_snapshot(&p, &sample()).unwrap();
        let text: String = fs::read_to_string(&p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("#mu="))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(parse_snapshot(&text), Err(SnapshotError::MissingKey("mu"))));
    }

    #[test]
    fn schema_and_row_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_snapshot(&p, &sample()).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let bumped = text.replace("#schema-version=1", "#schema-version=2");
        assert!(matches!(parse_snapshot(&bumped), Err(SnapshotError::SchemaVersion { .. })));
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[11] = "1.0,NaN,2.0".into();
        match parse_snapshot(&lines.join("\n")) {
            Err(SnapshotError::Malformed { line, .. }) => assert_eq!(line, 12),
            other => panic!("{other:?}"),
        }
        lines[11] = "1.0,2.0".into();
        assert!(matches!(
            parse_snapshot(&lines.join("\n")),
            Err(SnapshotError::Malformed { line: 12, .. })
        ));
    }

    #[test]
    fn resume_guard_rejects_changed_mu() {
        let cfg = RunConfig::parse("[model]\nname = FDGN2\n[grid]\nn = 8\n[params]\nmu = 0.3\neps = 0.1\n", "t").unwrap();
        let mut meta = sample().meta;
        assert!(check_resume(&meta, &cfg).is_ok());
        meta.mu = 0.30000000000000004;
        assert!(matches!(check_resume(&meta, &cfg), Err(SnapshotError::Mismatch { key: "mu", .. })));
    }
}
