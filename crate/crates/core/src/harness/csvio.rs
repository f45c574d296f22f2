//! Two-column `t,value` CSV files.
//!
//! Files are UTF-8 with LF line endings and a mandatory `t,value` header.
//! Numbers are written in the shortest form that parses back to the same
//! `f64`: plain decimal for magnitudes in `[1e-5, 1e16)` (and zero),
//! exponent form (`1.5e-7`) otherwise.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signals::SampledSignal;

pub const HEADER: &str = "t,value";

/// Shortest round-trip text for `x`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Time column and values as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

pub fn write_pairs(path: &Path, rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{HEADER}").map_err(io)?;
    for (t, v) in rows {
        writeln!(w, "{},{}", format_f64(t), format_f64(v)).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_signal(path: &Path, s: &SampledSignal) -> Result<()> {
    write_pairs(path, s.times().zip(s.values().iter().copied()))
}

pub fn write_series(path: &Path, t: &[f64], values: &[f64]) -> Result<()> {
    if t.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: t.len(),
            actual: values.len(),
        });
    }
    write_pairs(path, t.iter().copied().zip(values.iter().copied()))
}

/// Reads a `t,value` file. Row numbers in errors are 1-based file lines.
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let malformed = |row: u64, reason: String| Error::MalformedCsv {
        path: path.to_path_buf(),
        row: row as usize,
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => malformed(1, format!("{other:?}")),
        })?;
    let header = rdr.headers().map_err(|e| malformed(1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != ["t", "value"] {
        return Err(malformed(1, format!("expected header `{HEADER}`")));
    }
    let mut out = TimeSeries {
        t: Vec::new(),
        values: Vec::new(),
    };
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| malformed(line, format!("cannot parse {name} `{}`", &rec[i])))
        };
        let t = field(0, "t")?;
        let v = field(1, "value")?;
        if !t.is_finite() {
            return Err(malformed(line, format!("time {t} is not finite")));
        }
        if let Some(&prev) = out.t.last() {
            if !(t > prev) {
                return Err(malformed(line, format!("time {t} does not increase (previous {prev})")));
            }
        }
        out.t.push(t);
        out.values.push(v);
    }
    if out.is_empty() {
        return Err(Error::EmptySignal {
            path: path.to_path_buf(),
        });
    }
    Ok(out)
}

/// Reads a uniformly sampled signal; needs at least two rows to fix `dt`.
pub fn read_signal(path: &Path) -> Result<SampledSignal> {
    let ts = read_series(path)?;
    if ts.len() < 2 {
        return Err(Error::MalformedCsv {
            path: path.to_path_buf(),
            row: 2,
            reason: "a sampled signal needs at least two rows".into(),
        });
    }
    let t0 = ts.t[0];
    let dt = (ts.t[ts.len() - 1] - t0) / (ts.len() - 1) as f64;
    for (i, &t) in ts.t.iter().enumerate() {
        let expected = t0 + i as f64 * dt;
        if (t - expected).abs() > 1e-9 * dt.max(expected.abs()) {
            return Err(Error::MalformedCsv {
                path: path.to_path_buf(),
                row: i + 2,
                reason: format!("time {t} is off the uniform grid (expected {expected})"),
            });
        }
    }
    SampledSignal::new(t0, dt, ts.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_f64(0.0), "0");
        assert_eq!(format_f64(1.5), "1.5");
        assert_eq!(format_f64(-0.003), "-0.003");
        assert_eq!(format_f64(1.5e-7), "1.5e-7");
        assert_eq!(format_f64(2e20), "2e20");
        assert_eq!(format_f64(0.1 + 0.2), "0.30000000000000004");
        for x in [1e-300, -2.5e-6, 123456.789, 1.0 / 3.0, f64::MAX, f64::MIN_POSITIVE] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn single_row_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("one.csv");
        write_pairs(&p, [(0.0, 1.5)]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "t,value\n0,1.5\n");
        let ts = read_series(&p).unwrap();
        assert_eq!((ts.t, ts.values), (vec![0.0], vec![1.5]));
    }

    #[test]
    fn header_only_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        fs::write(&p, "t,value\n").unwrap();
        assert!(matches!(read_series(&p), Err(Error::EmptySignal { .. })));
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "t,value\n0,1\n0.1,abc\n").unwrap();
        match read_series(&p) {
            Err(Error::MalformedCsv { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        fs::write(&p, "t,value\n0,1\n0.1,2,3\n").unwrap();
        assert!(matches!(read_series(&p), Err(Error::MalformedCsv { row: 3, .. })));
        fs::write(&p, "t,value\n0,1\n0.2,2\n0.1,3\n").unwrap();
        assert!(matches!(read_series(&p), Err(Error::MalformedCsv { row: 4, .. })));
        fs::write(&p, "time,v\n0,1\n").unwrap();
        assert!(matches!(read_series(&p), Err(Error::MalformedCsv { row: 1, .. })));
    }

    #[test]
    fn signal_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = crate::signals::sample_expression(&crate::SignalExpr::ExpSin, 0.0, 1e-3, 500).unwrap();
        write_signal(&p, &s).unwrap();
        let back = read_signal(&p).unwrap();
        assert_eq!(back.values(), s.values());
        assert_eq!(back.len(), s.len());
        assert!((back.dt() - 1e-3).abs() < 1e-15);
        let bytes = fs::read(&p).unwrap();
        assert!(!bytes.contains(&b'\r'));
    }
}
