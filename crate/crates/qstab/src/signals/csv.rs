//! Trajectory CSV interchange.
//!
//! Layout: header `t,x1..xn,u1..um[,xdot1..xdotn][,w1..wn]`, one row per
//! grid point in increasing time, plain decimal floats, `#` starts a comment
//! line. Values are written with Rust's shortest round-trip float formatting
//! so a write→read cycle is lossless. On load the grid is validated to be
//! uniform (maximum deviation `1e-9·h`) and to start at `t = 0`.

use super::{derivative_estimate, GriddedSignal, SignalError, TrajectoryData};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajectoryCsvError {
    #[error("{path}:{line}: {msg}")]
    Format { path: String, line: usize, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// A trajectory read from disk, together with the optional noise column and
/// a flag recording whether the derivative had to be estimated from x.
#[derive(Debug)]
pub struct LoadedTrajectory {
    pub traj: TrajectoryData,
    pub noise: Option<GriddedSignal>,
    pub xdot_estimated: bool,
}

pub fn write_trajectory(
    path: &Path,
    traj: &TrajectoryData,
    noise: Option<&GriddedSignal>,
) -> Result<(), TrajectoryCsvError> {
    let io_err = |source| TrajectoryCsvError::Io { path: path.display().to_string(), source };
    let mut out = String::new();
    let n = traj.state_dim();
    let m = traj.input_dim();
    out.push('t');
    for i in 1..=n {
        write!(out, ",x{i}").unwrap();
    }
    for i in 1..=m {
        write!(out, ",u{i}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",xdot{i}").unwrap();
    }
    if noise.is_some() {
        for i in 1..=n {
            write!(out, ",w{i}").unwrap();
        }
    }
    out.push('\n');
    for k in 0..traj.x.len() {
        write!(out, "{}", traj.x.time(k)).unwrap();
        for v in traj.x.sample(k) {
            write!(out, ",{v}").unwrap();
        }
        for v in traj.u.sample(k) {
            write!(out, ",{v}").unwrap();
        }
        for v in traj.xdot.sample(k) {
            write!(out, ",{v}").unwrap();
        }
        if let Some(w) = noise {
            for v in w.sample(k) {
                write!(out, ",{v}").unwrap();
            }
        }
        out.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(io_err)?;
    f.write_all(out.as_bytes()).map_err(io_err)?;
    Ok(())
}

/// Count a run of columns named `{prefix}1..{prefix}k` starting at `from`.
fn count_prefixed(cols: &[&str], from: usize, prefix: &str) -> usize {
    let mut k = 0;
    while from + k < cols.len() && cols[from + k] == format!("{prefix}{}", k + 1) {
        k += 1;
    }
    k
}

pub fn read_trajectory(path: &Path) -> Result<LoadedTrajectory, TrajectoryCsvError> {
    let pstr = path.display().to_string();
    let fmt_err = |line: usize, msg: String| TrajectoryCsvError::Format {
        path: pstr.clone(),
        line,
        msg,
    };
    let file = std::fs::File::open(path).map_err(|source| TrajectoryCsvError::Io {
        path: pstr.clone(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut header: Option<(usize, usize, bool, bool)> = None; // n, m, has_xdot, has_w
    let mut times: Vec<f64> = Vec::new();
    let mut x_vals: Vec<f64> = Vec::new();
    let mut u_vals: Vec<f64> = Vec::new();
    let mut xdot_vals: Vec<f64> = Vec::new();
    let mut w_vals: Vec<f64> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| TrajectoryCsvError::Io { path: pstr.clone(), source })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        match header {
            None => {
                if cols.first() != Some(&"t") {
                    return Err(fmt_err(lineno, "header must start with column 't'".into()));
                }
                let n = count_prefixed(&cols, 1, "x");
                if n == 0 {
                    return Err(fmt_err(lineno, "expected state columns x1..xn".into()));
                }
                let m = count_prefixed(&cols, 1 + n, "u");
                if m == 0 {
                    return Err(fmt_err(lineno, "expected input columns u1..um".into()));
                }
                let mut pos = 1 + n + m;
                let d = count_prefixed(&cols, pos, "xdot");
                let has_xdot = d == n;
                if d != 0 && d != n {
                    return Err(fmt_err(lineno, format!("expected {n} xdot columns, found {d}")));
                }
                pos += d;
                let wn = count_prefixed(&cols, pos, "w");
                let has_w = wn == n;
                if wn != 0 && wn != n {
                    return Err(fmt_err(lineno, format!("expected {n} w columns, found {wn}")));
                }
                pos += wn;
                if pos != cols.len() {
                    return Err(fmt_err(
                        lineno,
                        format!("unrecognized trailing column '{}'", cols[pos]),
                    ));
                }
                header = Some((n, m, has_xdot, has_w));
            }
            Some((n, m, has_xdot, has_w)) => {
                let expected = 1 + n + m + if has_xdot { n } else { 0 } + if has_w { n } else { 0 };
                if cols.len() != expected {
                    return Err(fmt_err(
                        lineno,
                        format!("expected {expected} fields, found {}", cols.len()),
                    ));
                }
                let mut parsed = Vec::with_capacity(expected);
                for c in &cols {
                    let v: f64 = c.parse().map_err(|_| {
                        fmt_err(lineno, format!("cannot parse '{c}' as a number"))
                    })?;
                    if !v.is_finite() {
                        return Err(fmt_err(lineno, format!("non-finite value '{c}'")));
                    }
                    parsed.push(v);
                }
                if let Some(prev) = times.last() {
                    if parsed[0] <= *prev {
                        return Err(fmt_err(lineno, "time must be strictly increasing".into()));
                    }
                }
                times.push(parsed[0]);
                x_vals.extend_from_slice(&parsed[1..1 + n]);
                u_vals.extend_from_slice(&parsed[1 + n..1 + n + m]);
                let mut pos = 1 + n + m;
                if has_xdot {
                    xdot_vals.extend_from_slice(&parsed[pos..pos + n]);
                    pos += n;
                }
                if has_w {
                    w_vals.extend_from_slice(&parsed[pos..pos + n]);
                }
            }
        }
    }

    let (n, m, has_xdot, has_w) =
        header.ok_or_else(|| fmt_err(0, "file contains no header".into()))?;
    if times.len() < 2 {
        return Err(fmt_err(0, "need at least two data rows".into()));
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if h <= 0.0 {
        return Err(fmt_err(0, "non-positive grid step".into()));
    }
    if times[0].abs() > 1e-9 * h {
        return Err(fmt_err(0, format!("grid must start at t = 0, got {}", times[0])));
    }
    for (k, t) in times.iter().enumerate() {
        let dev = (t - k as f64 * h).abs();
        if dev > 1e-9 * h {
            return Err(fmt_err(
                0,
                format!("grid is not uniform at sample {k}: t = {t}, expected {}", k as f64 * h),
            ));
        }
    }
    let horizon = (times.len() - 1) as f64 * h;

    let x = GriddedSignal::new(n, h, horizon, x_vals)?;
    let u = GriddedSignal::new(m, h, horizon, u_vals)?;
    let (xdot, xdot_estimated) = if has_xdot {
        (GriddedSignal::new(n, h, horizon, xdot_vals)?, false)
    } else {
        (derivative_estimate(&x)?, true)
    };
    let noise = if has_w {
        Some(GriddedSignal::new(n, h, horizon, w_vals)?)
    } else {
        None
    };
    Ok(LoadedTrajectory {
        traj: TrajectoryData::new(x, u, xdot)?,
        noise,
        xdot_estimated,
    })
}
