//! Tiny per-channel signal grammar for `simulate`:
//!
//! ```text
//!   const:v                value v everywhere
//!   ramp:v0,slope          v0 + slope·t
//!   sin:amp,omega,phase    amp·sin(omega·t + phase)
//!   pwl:t0,v0,t1,v1,...    piecewise-linear through the knots, clamped
//! ```
//!
//! Channels are joined with `|`.

use super::CliError;
use crate::signals::GriddedSignal;

enum Channel {
    Const(f64),
    Ramp { v0: f64, slope: f64 },
    Sin { amp: f64, omega: f64, phase: f64 },
    Pwl { knots: Vec<(f64, f64)> },
}

impl Channel {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Channel::Const(v) => *v,
            Channel::Ramp { v0, slope } => v0 + slope * t,
            Channel::Sin { amp, omega, phase } => amp * (omega * t + phase).sin(),
            Channel::Pwl { knots } => {
                if t <= knots[0].0 {
                    return knots[0].1;
                }
                for pair in knots.windows(2) {
                    let (t0, v0) = pair[0];
                    let (t1, v1) = pair[1];
                    if t <= t1 {
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                    }
                }
                knots.last().unwrap().1
            }
        }
    }
}

fn parse_numbers(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError(format!("{what}: cannot parse number '{s}'")))
        })
        .collect()
}

fn parse_channel(spec: &str) -> Result<Channel, CliError> {
    let spec = spec.trim();
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| CliError(format!("signal spec '{spec}' must look like kind:args")))?;
    let nums = parse_numbers(args, spec)?;
    match (kind.trim(), nums.as_slice()) {
        ("const", [v]) => Ok(Channel::Const(*v)),
        ("ramp", [v0, slope]) => Ok(Channel::Ramp { v0: *v0, slope: *slope }),
        ("sin", [amp, omega, phase]) => Ok(Channel::Sin { amp: *amp, omega: *omega, phase: *phase }),
        ("pwl", vals) if vals.len() >= 4 && vals.len() % 2 == 0 => {
            let knots: Vec<(f64, f64)> =
                vals.chunks_exact(2).map(|pair| (pair[0], pair[1])).collect();
            if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(CliError(format!("pwl knots must have increasing times: '{spec}'")));
            }
            Ok(Channel::Pwl { knots })
        }
        _ => Err(CliError(format!(
            "unrecognized signal spec '{spec}' (expected const:v, ramp:v0,slope, sin:amp,omega,phase or pwl:t0,v0,t1,v1,...)"
        ))),
    }
}

/// Materialize a '|'-joined channel spec on the grid.
pub fn materialize(spec: &str, h: f64, horizon: f64) -> Result<GriddedSignal, CliError> {
    let channels: Vec<Channel> =
        spec.split('|').map(parse_channel).collect::<Result<_, _>>()?;
    let dim = channels.len();
    GriddedSignal::from_fn(dim, h, horizon, |t, out| {
        for (o, ch) in out.iter_mut().zip(&channels) {
            *o = ch.eval(t);
        }
    })
    .map_err(CliError::from)
}
