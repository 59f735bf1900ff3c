//! Trajectory representation and data acquisition: uniform-grid signals,
//! LTI simulation for data generation, derivative estimation, quadrature of
//! the continuous data Gramian, and decimation into sampled data matrices.
//!
//! Signals are uniform-grid samples rather than symbolic functions; closed
//! form test signals are materialized onto the grid. Decimation refuses
//! stepsizes that do not land on grid points — sample values are not robust
//! to pointwise changes of the underlying signal, so silent interpolation
//! would change the analysis outcome.

use crate::linalg::{Mat, SymMatrix};
use thiserror::Error;

pub mod csv;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("grid error: {0}")]
    Grid(String),
    #[error("simulation diverged near t = {t:.6}")]
    Diverged { t: f64 },
    #[error("resampling error: {0}")]
    Resampling(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Roundoff slack for grid-ratio checks (`T/h`, `δ/h`, `T/δ`).
const GRID_REL_TOL: f64 = 1e-9;

/// `value/step` as an exact positive integer, or `None` if it is not one
/// within relative tolerance.
pub(crate) fn exact_ratio(value: f64, step: f64) -> Option<usize> {
    if !(step > 0.0) || !(value > 0.0) {
        return None;
    }
    let ratio = value / step;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > GRID_REL_TOL * ratio.max(1.0) {
        return None;
    }
    Some(rounded as usize)
}

/// A vector-valued signal sampled on the uniform grid `t = 0, h, …, T`.
#[derive(Debug, Clone)]
pub struct GriddedSignal {
    dim: usize,
    step: f64,
    horizon: f64,
    values: Vec<f64>, // flat, sample-major: values[k*dim .. (k+1)*dim]
}

impl GriddedSignal {
    pub fn new(dim: usize, step: f64, horizon: f64, values: Vec<f64>) -> Result<Self, SignalError> {
        if dim == 0 {
            return Err(SignalError::Dimension("signal dimension must be positive".into()));
        }
        let steps = exact_ratio(horizon, step).ok_or_else(|| {
            SignalError::Grid(format!("horizon {horizon} is not an integer multiple of step {step}"))
        })?;
        let expected = (steps + 1) * dim;
        if values.len() != expected {
            return Err(SignalError::Grid(format!(
                "expected {expected} values ({} samples of dim {dim}), got {}",
                steps + 1,
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(SignalError::Grid("signal contains non-finite values".into()));
        }
        Ok(GriddedSignal { dim, step, horizon, values })
    }

    pub fn from_fn(
        dim: usize,
        step: f64,
        horizon: f64,
        mut f: impl FnMut(f64, &mut [f64]),
    ) -> Result<Self, SignalError> {
        let steps = exact_ratio(horizon, step).ok_or_else(|| {
            SignalError::Grid(format!("horizon {horizon} is not an integer multiple of step {step}"))
        })?;
        let mut values = vec![0.0; (steps + 1) * dim];
        for k in 0..=steps {
            f(k as f64 * step, &mut values[k * dim..(k + 1) * dim]);
        }
        GriddedSignal::new(dim, step, horizon, values)
    }

    pub fn constant(dim: usize, step: f64, horizon: f64, value: &[f64]) -> Result<Self, SignalError> {
        assert_eq!(value.len(), dim);
        GriddedSignal::from_fn(dim, step, horizon, |_, out| out.copy_from_slice(value))
    }

    pub fn zero(dim: usize, step: f64, horizon: f64) -> Result<Self, SignalError> {
        GriddedSignal::constant(dim, step, horizon, &vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of grid points, `T/h + 1`.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // a valid signal always has at least two grid points
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn same_grid(&self, other: &GriddedSignal) -> bool {
        self.len() == other.len()
            && (self.step - other.step).abs() <= GRID_REL_TOL * self.step
            && (self.horizon - other.horizon).abs() <= GRID_REL_TOL * self.horizon.max(1.0)
    }
}

/// Measured data: state, input and state derivative on a shared grid.
#[derive(Debug, Clone)]
pub struct TrajectoryData {
    pub x: GriddedSignal,
    pub u: GriddedSignal,
    pub xdot: GriddedSignal,
}

impl TrajectoryData {
    pub fn new(x: GriddedSignal, u: GriddedSignal, xdot: GriddedSignal) -> Result<Self, SignalError> {
        if !x.same_grid(&u) || !x.same_grid(&xdot) {
            return Err(SignalError::Grid("x, u, xdot must share the same grid".into()));
        }
        if x.dim() != xdot.dim() {
            return Err(SignalError::Dimension("x and xdot must have equal dimension".into()));
        }
        Ok(TrajectoryData { x, u, xdot })
    }

    pub fn state_dim(&self) -> usize {
        self.x.dim()
    }

    pub fn input_dim(&self) -> usize {
        self.u.dim()
    }

    pub fn step(&self) -> f64 {
        self.x.step()
    }

    pub fn horizon(&self) -> f64 {
        self.x.horizon()
    }
}

/// The (unknown, to-be-identified) plant `ẋ = Ax + Bu + w`.
#[derive(Debug, Clone)]
pub struct LtiSystem {
    a: Mat,
    b: Mat,
}

impl LtiSystem {
    pub fn new(a: Mat, b: Mat) -> Result<Self, SignalError> {
        if a.rows() != a.cols() {
            return Err(SignalError::Dimension("state matrix must be square".into()));
        }
        if b.rows() != a.rows() {
            return Err(SignalError::Dimension("input matrix row count must match state dimension".into()));
        }
        Ok(LtiSystem { a, b })
    }

    pub fn scalar(a: f64, b: f64) -> Self {
        LtiSystem {
            a: Mat::from_rows(1, 1, &[a]),
            b: Mat::from_rows(1, 1, &[b]),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }
}

/// Decimated measurements: columns are the signal values at
/// `t = 0, δ, …, T − δ`.
#[derive(Debug, Clone)]
pub struct SampledData {
    pub delta: f64,
    pub horizon: f64,
    pub xdot: Mat,
    pub x: Mat,
    pub u: Mat,
}

impl SampledData {
    pub fn state_dim(&self) -> usize {
        self.x.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.u.rows()
    }

    pub fn num_samples(&self) -> usize {
        self.x.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GramianKind {
    Continuous,
    Discrete { delta: f64 },
}

/// Integral (or δ-weighted sum) of outer products of the stacked signal
/// `(ẋ; −x; −u)`; the data half of the consistency matrix.
#[derive(Debug, Clone)]
pub struct Gramian {
    matrix: SymMatrix,
    kind: GramianKind,
    horizon: f64,
    state_dim: usize,
    input_dim: usize,
}

impl Gramian {
    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> GramianKind {
        self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }
}

/// Simulate `ẋ = Ax + Bu + w` with classical fourth-order Runge–Kutta,
/// interpolating `u` and `w` linearly inside each grid step. The returned
/// derivative signal is evaluated exactly as `Ax + Bu + w` on grid points,
/// so the residual `ẋ − Ax − Bu` reproduces `w` exactly there.
pub fn simulate_lti(
    sys: &LtiSystem,
    x0: &[f64],
    u: &GriddedSignal,
    w: &GriddedSignal,
) -> Result<TrajectoryData, SignalError> {
    let n = sys.state_dim();
    let m = sys.input_dim();
    if x0.len() != n {
        return Err(SignalError::Dimension("initial state dimension mismatch".into()));
    }
    if u.dim() != m {
        return Err(SignalError::Dimension("input signal dimension mismatch".into()));
    }
    if w.dim() != n {
        return Err(SignalError::Dimension("noise signal dimension mismatch".into()));
    }
    if !u.same_grid(w) {
        return Err(SignalError::Grid("u and w must share the same grid".into()));
    }

    let h = u.step();
    let steps = u.len() - 1;
    let blowup = 1e12 * (1.0 + x0.iter().map(|v| v * v).sum::<f64>().sqrt());

    let deriv = |x: &[f64], uk: &[f64], wk: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let mut s = wk[i];
            for j in 0..n {
                s += sys.a[(i, j)] * x[j];
            }
            for j in 0..m {
                s += sys.b[(i, j)] * uk[j];
            }
            out[i] = s;
        }
    };
    let midpoint = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect()
    };

    let mut xs = vec![0.0; (steps + 1) * n];
    xs[..n].copy_from_slice(x0);
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    for k in 0..steps {
        let (u0, u1) = (u.sample(k), u.sample(k + 1));
        let (w0, w1) = (w.sample(k), w.sample(k + 1));
        let um = midpoint(u0, u1);
        let wm = midpoint(w0, w1);
        let xk: Vec<f64> = xs[k * n..(k + 1) * n].to_vec();

        deriv(&xk, u0, w0, &mut k1);
        for i in 0..n {
            stage[i] = xk[i] + 0.5 * h * k1[i];
        }
        deriv(&stage, &um, &wm, &mut k2);
        for i in 0..n {
            stage[i] = xk[i] + 0.5 * h * k2[i];
        }
        deriv(&stage, &um, &wm, &mut k3);
        for i in 0..n {
            stage[i] = xk[i] + h * k3[i];
        }
        deriv(&stage, u1, w1, &mut k4);

        let next = &mut xs[(k + 1) * n..(k + 2) * n];
        for i in 0..n {
            next[i] = xk[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if !next[i].is_finite() || next[i].abs() > blowup {
                return Err(SignalError::Diverged { t: (k + 1) as f64 * h });
            }
        }
    }

    let x = GriddedSignal::new(n, h, u.horizon(), xs)?;
    let mut xdot_vals = vec![0.0; x.values.len()];
    for k in 0..=steps {
        let mut out = vec![0.0; n];
        deriv(x.sample(k), u.sample(k), w.sample(k), &mut out);
        xdot_vals[k * n..(k + 1) * n].copy_from_slice(&out);
    }
    let xdot = GriddedSignal::new(n, h, u.horizon(), xdot_vals)?;
    TrajectoryData::new(x, u.clone(), xdot)
}

/// Central differences in the interior, second-order one-sided stencils at
/// the endpoints. Exact for polynomials up to degree two. Used when a
/// trajectory file carries no derivative column.
pub fn derivative_estimate(x: &GriddedSignal) -> Result<GriddedSignal, SignalError> {
    let len = x.len();
    if len < 3 {
        return Err(SignalError::Grid("derivative estimation needs at least 3 samples".into()));
    }
    let n = x.dim();
    let h = x.step();
    let mut d = vec![0.0; len * n];
    for i in 0..n {
        d[i] = (-3.0 * x.sample(0)[i] + 4.0 * x.sample(1)[i] - x.sample(2)[i]) / (2.0 * h);
        d[(len - 1) * n + i] = (3.0 * x.sample(len - 1)[i] - 4.0 * x.sample(len - 2)[i]
            + x.sample(len - 3)[i])
            / (2.0 * h);
    }
    for k in 1..len - 1 {
        for i in 0..n {
            d[k * n + i] = (x.sample(k + 1)[i] - x.sample(k - 1)[i]) / (2.0 * h);
        }
    }
    GriddedSignal::new(n, h, x.horizon(), d)
}

/// Composite-trapezoid quadrature of `∫ (ẋ;−x;−u)(ẋ;−x;−u)ᵀ dt` on the grid.
pub fn gramian_cont(traj: &TrajectoryData) -> Gramian {
    let n = traj.state_dim();
    let m = traj.input_dim();
    let dim = 2 * n + m;
    let h = traj.step();
    let len = traj.x.len();
    let mut g = SymMatrix::zeros(dim);
    let mut v = vec![0.0; dim];
    for k in 0..len {
        let weight = if k == 0 || k == len - 1 { 0.5 * h } else { h };
        stack_signed(traj.xdot.sample(k), traj.x.sample(k), traj.u.sample(k), &mut v);
        g.add_assign_outer(&v, weight);
    }
    Gramian {
        matrix: g,
        kind: GramianKind::Continuous,
        horizon: traj.horizon(),
        state_dim: n,
        input_dim: m,
    }
}

fn stack_signed(xdot: &[f64], x: &[f64], u: &[f64], out: &mut [f64]) {
    let n = xdot.len();
    let m = u.len();
    out[..n].copy_from_slice(xdot);
    for i in 0..n {
        out[n + i] = -x[i];
    }
    for i in 0..m {
        out[2 * n + i] = -u[i];
    }
}

/// Decimate a trajectory to stepsize `δ`. Requires `T/δ` integer and `δ` an
/// exact multiple of the grid step; no interpolation is ever performed.
pub fn sample(traj: &TrajectoryData, delta: f64) -> Result<SampledData, SignalError> {
    let horizon = traj.horizon();
    let count = exact_ratio(horizon, delta).ok_or_else(|| {
        SignalError::Resampling(format!(
            "horizon {horizon} is not an integer multiple of stepsize {delta}"
        ))
    })?;
    let stride = exact_ratio(delta, traj.step()).ok_or_else(|| {
        SignalError::Resampling(format!(
            "stepsize {delta} is not an integer multiple of the grid step {}",
            traj.step()
        ))
    })?;
    let n = traj.state_dim();
    let m = traj.input_dim();
    let mut xdot_cols = Vec::with_capacity(count);
    let mut x_cols = Vec::with_capacity(count);
    let mut u_cols = Vec::with_capacity(count);
    for k in 0..count {
        let idx = k * stride;
        xdot_cols.push(traj.xdot.sample(idx).to_vec());
        x_cols.push(traj.x.sample(idx).to_vec());
        u_cols.push(traj.u.sample(idx).to_vec());
    }
    let _ = (n, m);
    Ok(SampledData {
        delta,
        horizon,
        xdot: Mat::from_columns(&xdot_cols),
        x: Mat::from_columns(&x_cols),
        u: Mat::from_columns(&u_cols),
    })
}

/// δ-weighted outer product of the stacked sample matrix `(Ẋ; −X; −U)`.
pub fn gramian_disc(s: &SampledData) -> Gramian {
    let n = s.state_dim();
    let m = s.input_dim();
    let dim = 2 * n + m;
    let mut g = SymMatrix::zeros(dim);
    let mut v = vec![0.0; dim];
    for k in 0..s.num_samples() {
        stack_signed(&s.xdot.column(k), &s.x.column(k), &s.u.column(k), &mut v);
        g.add_assign_outer(&v, s.delta);
    }
    Gramian {
        matrix: g,
        kind: GramianKind::Discrete { delta: s.delta },
        horizon: s.horizon,
        state_dim: n,
        input_dim: m,
    }
}

/// The benchmark scalar dataset: `ẋ = −x + u/10 + w` on `[0, 1]` with
/// `x(0) = 1`, `u ≡ 1` and the piecewise-linear noise `w(t) = 0` for
/// `t ≤ 1/2`, `w(t) = 2 − 4t` for `t > 1/2`, all materialized from closed
/// forms. The noise kink sits at `t = 1/2`, so the grid must contain that
/// point (`1/h` even) for the trapezoid quadrature to keep its order.
pub fn paper_example_signals(h: f64) -> Result<(TrajectoryData, GriddedSignal), SignalError> {
    let steps = exact_ratio(1.0, h)
        .ok_or_else(|| SignalError::Grid(format!("1/h must be an integer, got h = {h}")))?;
    if steps % 2 != 0 {
        return Err(SignalError::Grid(format!(
            "grid must contain t = 1/2: 1/h = {steps} is odd"
        )));
    }
    let sqrt_e = std::f64::consts::E.sqrt();
    let x_fn = |t: f64| -> f64 {
        if t <= 0.5 {
            0.1 * (-t).exp() * (9.0 + t.exp())
        } else {
            0.1 * (-t).exp() * (9.0 - 40.0 * sqrt_e + t.exp() * (61.0 - 40.0 * t))
        }
    };
    let w_fn = |t: f64| -> f64 { if t <= 0.5 { 0.0 } else { 2.0 - 4.0 * t } };

    let x = GriddedSignal::from_fn(1, h, 1.0, |t, out| out[0] = x_fn(t))?;
    let u = GriddedSignal::constant(1, h, 1.0, &[1.0])?;
    let w = GriddedSignal::from_fn(1, h, 1.0, |t, out| out[0] = w_fn(t))?;
    let xdot = GriddedSignal::from_fn(1, h, 1.0, |t, out| out[0] = -x_fn(t) + 0.1 + w_fn(t))?;
    Ok((TrajectoryData::new(x, u, xdot)?, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn constant_state_without_dynamics() {
        let h = 0.1;
        let u = GriddedSignal::zero(1, h, 1.0).unwrap();
        let w = GriddedSignal::zero(2, h, 1.0).unwrap();
        let sys = LtiSystem::new(Mat::zeros(2, 2), Mat::zeros(2, 1)).unwrap();
        let traj = simulate_lti(&sys, &[3.0, -1.0], &u, &w).unwrap();
        for k in 0..traj.x.len() {
            assert_eq!(traj.x.sample(k), &[3.0, -1.0]);
            assert_eq!(traj.xdot.sample(k), &[0.0, 0.0]);
        }
    }

    #[test]
    fn scalar_exponential_decay() {
        let h = 1e-3;
        let u = GriddedSignal::zero(1, h, 1.0).unwrap();
        let w = GriddedSignal::zero(1, h, 1.0).unwrap();
        let sys = LtiSystem::scalar(-1.0, 0.0);
        let traj = simulate_lti(&sys, &[1.0], &u, &w).unwrap();
        let x1 = traj.x.sample(traj.x.len() - 1)[0];
        assert!((x1 - (-1.0_f64).exp()).abs() < 1e-8, "x(1) = {x1}");
    }

    #[test]
    fn benchmark_system_matches_closed_form() {
        let h = 1e-3;
        let (exact, w) = paper_example_signals(h).unwrap();
        let sys = LtiSystem::scalar(-1.0, 0.1);
        let traj = simulate_lti(&sys, &[1.0], &exact.u, &w).unwrap();
        let last = traj.x.len() - 1;
        // closed form at t = 1
        let e = std::f64::consts::E;
        let expected = 0.1 * (9.0 / e - 40.0 / e.sqrt() + 21.0);
        assert!((traj.x.sample(last)[0] - expected).abs() < 1e-6);
        assert!((exact.x.sample(last)[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn simulation_residual_reproduces_noise_exactly() {
        let h = 0.01;
        let u = GriddedSignal::from_fn(1, h, 1.0, |t, out| out[0] = (2.0 * t).cos()).unwrap();
        let w = GriddedSignal::from_fn(2, h, 1.0, |t, out| {
            out[0] = 0.1 * (3.0 * t).sin();
            out[1] = 0.05 * t;
        })
        .unwrap();
        let sys = LtiSystem::new(
            Mat::from_rows(2, 2, &[-1.0, 0.5, 0.0, -2.0]),
            Mat::from_rows(2, 1, &[1.0, 0.5]),
        )
        .unwrap();
        let traj = simulate_lti(&sys, &[0.2, -0.1], &u, &w).unwrap();
        // xdot is built as Ax + Bu + w on grid points, so the residual is
        // free of discretization error; only reassociation roundoff remains
        for k in 0..traj.x.len() {
            let ax = sys.a().matvec(traj.x.sample(k));
            let bu = sys.b().matvec(traj.u.sample(k));
            for i in 0..2 {
                let resid = traj.xdot.sample(k)[i] - ax[i] - bu[i];
                let scale = 1.0 + ax[i].abs() + bu[i].abs();
                assert!((resid - w.sample(k)[i]).abs() <= 1e-14 * scale);
            }
        }
    }

    #[test]
    fn derivative_estimate_handles_polynomials() {
        let h = 0.125;
        let c = GriddedSignal::constant(1, h, 1.0, &[4.0]).unwrap();
        for s in derivative_estimate(&c).unwrap().samples() {
            assert!(s[0].abs() < 1e-12);
        }
        let ramp = GriddedSignal::from_fn(1, h, 1.0, |t, out| out[0] = t).unwrap();
        for s in derivative_estimate(&ramp).unwrap().samples() {
            assert!((s[0] - 1.0).abs() < 1e-12);
        }
        let quad = GriddedSignal::from_fn(1, 1e-3, 1.0, |t, out| out[0] = t * t).unwrap();
        let d = derivative_estimate(&quad).unwrap();
        for k in 1..d.len() - 1 {
            assert!((d.sample(k)[0] - 2.0 * d.time(k)).abs() < 1e-6);
        }
    }

    #[test]
    fn derivative_estimate_rejects_short_signals() {
        let two = GriddedSignal::new(1, 1.0, 1.0, vec![0.0, 1.0]).unwrap();
        assert!(matches!(derivative_estimate(&two), Err(SignalError::Grid(_))));
    }

    #[test]
    fn zero_trajectory_gives_zero_gramian() {
        let h = 0.1;
        let z = GriddedSignal::zero(1, h, 1.0).unwrap();
        let traj = TrajectoryData::new(z.clone(), z.clone(), z).unwrap();
        let g = gramian_cont(&traj);
        assert_eq!(g.matrix().dim(), 3);
        assert!(g.matrix().to_mat().max_abs() == 0.0);
    }

    #[test]
    fn constant_state_gramian_single_entry() {
        let h = 0.001;
        let x = GriddedSignal::constant(1, h, 1.0, &[1.0]).unwrap();
        let u = GriddedSignal::zero(1, h, 1.0).unwrap();
        let xdot = GriddedSignal::zero(1, h, 1.0).unwrap();
        let traj = TrajectoryData::new(x, u, xdot).unwrap();
        let g = gramian_cont(&traj);
        assert!((g.matrix().get(1, 1) - 1.0).abs() < 1e-12);
        for (i, j) in [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2)] {
            assert!(g.matrix().get(i, j).abs() < 1e-12 || (i, j) == (1, 1));
        }
    }

    #[test]
    fn sampling_keeps_exact_grid_values() {
        let h = 0.25;
        let (traj, _) = paper_example_signals(h).unwrap();
        let s = sample(&traj, h).unwrap();
        assert_eq!(s.num_samples(), 4); // all grid columns except t = T
        for k in 0..4 {
            assert_eq!(s.x[(0, k)], traj.x.sample(k)[0]);
        }
        let single = sample(&traj, 1.0).unwrap();
        assert_eq!(single.num_samples(), 1);
        assert_eq!(single.x[(0, 0)], 1.0);
    }

    #[test]
    fn sampling_benchmark_at_half() {
        let (traj, _) = paper_example_signals(0.25).unwrap();
        let s = sample(&traj, 0.5).unwrap();
        let expected = 0.1 * (-0.5_f64).exp() * (9.0 + 0.5_f64.exp());
        assert_eq!(s.x[(0, 0)], 1.0);
        assert!((s.x[(0, 1)] - expected).abs() < 1e-15);
    }

    #[test]
    fn sampling_refuses_off_grid_stepsizes() {
        let (traj, _) = paper_example_signals(0.25).unwrap();
        assert!(matches!(sample(&traj, 0.3), Err(SignalError::Resampling(_))));
        assert!(matches!(sample(&traj, 0.125), Err(SignalError::Resampling(_))));
    }

    #[test]
    fn discrete_gramian_matches_by_hand() {
        let h = 0.5;
        let x = GriddedSignal::new(1, h, 1.0, vec![2.0, 0.0, 0.0]).unwrap();
        let u = GriddedSignal::new(1, h, 1.0, vec![1.0, 0.0, 0.0]).unwrap();
        let xdot = GriddedSignal::new(1, h, 1.0, vec![-1.0, 0.0, 0.0]).unwrap();
        let traj = TrajectoryData::new(x, u, xdot).unwrap();
        let s = sample(&traj, 1.0).unwrap(); // single column (ẋ;−x;−u) = (−1;−2;−1)
        let g = gramian_disc(&s);
        let v = [-1.0, -2.0, -1.0];
        for i in 0..3 {
            for j in 0..3 {
                assert!((g.matrix().get(i, j) - 1.0 * v[i] * v[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn discrete_gramian_invariant_to_fine_grid() {
        let (coarse, _) = paper_example_signals(0.125).unwrap();
        let (fine, _) = paper_example_signals(0.015625).unwrap();
        let g1 = gramian_disc(&sample(&coarse, 0.25).unwrap());
        let g2 = gramian_disc(&sample(&fine, 0.25).unwrap());
        let diff = g1.matrix().sub(g2.matrix());
        assert!(diff.to_mat().max_abs() < 1e-14);
    }

    #[test]
    fn gramians_are_psd() {
        let (traj, _) = paper_example_signals(0.01).unwrap();
        for g in [gramian_cont(&traj), gramian_disc(&sample(&traj, 0.25).unwrap())] {
            let scale = 1.0 + linalg::spectral_norm(g.matrix()).unwrap();
            assert!(linalg::min_eig(g.matrix()).unwrap() >= -1e-10 * scale);
        }
    }

    #[test]
    fn benchmark_requires_midpoint_on_grid() {
        assert!(paper_example_signals(1.0 / 3.0).is_err());
        assert!(matches!(paper_example_signals(0.2), Err(SignalError::Grid(_))));
        assert!(paper_example_signals(0.25).is_ok());
    }

    #[test]
    fn benchmark_initial_condition_and_noise_energy() {
        let (traj, w) = paper_example_signals(1e-4).unwrap();
        assert_eq!(traj.x.sample(0)[0], 1.0);
        assert_eq!(traj.x.len(), 10001);
        // trapezoid of w² on this grid must sit close to the exact 2/3
        let h = w.step();
        let mut acc = 0.0;
        for (k, s) in w.samples().enumerate() {
            let weight = if k == 0 || k == w.len() - 1 { 0.5 * h } else { h };
            acc += weight * s[0] * s[0];
        }
        assert!((acc - 2.0 / 3.0).abs() < 1e-6, "∫w² = {acc}");
    }
}
