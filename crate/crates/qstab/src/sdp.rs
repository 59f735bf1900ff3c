//! A small deterministic interior-point solver for dense linear matrix
//! inequality problems with a linear objective:
//!
//! ```text
//!   maximize    cᵀy
//!   subject to  F₀ᵏ + y₁F₁ᵏ + … + yₚFₚᵏ ⪰ 0   for every block k
//! ```
//!
//! The method is log-det barrier path-following on this form: for a
//! decreasing sequence of barrier weights μ it maximizes
//! `cᵀy + μ Σₖ log det Fᵏ(y)` with damped Newton steps, shrinking μ by a
//! fixed factor until the barrier duality bound `μ·Σₖ dim(Fᵏ)` is below the
//! gap tolerance. Strict feasibility is decided first by a homogeneous
//! t-shift (`phase1_margin`): the largest t such that `Fᵏ(y) ⪰ t·I` holds on
//! every block, capped so that problems with unbounded interior stay bounded.
//!
//! Problem sizes here are tiny (≤ ~10 variables, blocks ≤ ~60×60), so every
//! factorization is dense and no warm-starting is attempted. A single solve
//! is single-threaded and deterministic; independent solves may run
//! concurrently.

use crate::linalg::{self, LinalgError, Mat, SymMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One affine matrix constraint `F₀ + Σ yᵢFᵢ ⪰ 0`.
#[derive(Debug, Clone)]
pub struct LmiBlock {
    constant: SymMatrix,
    coeffs: Vec<SymMatrix>,
}

impl LmiBlock {
    pub fn new(constant: SymMatrix, coeffs: Vec<SymMatrix>) -> Self {
        for c in &coeffs {
            assert_eq!(c.dim(), constant.dim(), "coefficient dimension mismatch");
        }
        LmiBlock { constant, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn constant(&self) -> &SymMatrix {
        &self.constant
    }

    pub fn coeffs(&self) -> &[SymMatrix] {
        &self.coeffs
    }

    pub fn eval(&self, y: &[f64]) -> SymMatrix {
        let mut f = self.constant.clone();
        for (yi, fi) in y.iter().zip(&self.coeffs) {
            if *yi != 0.0 {
                f = f.add(&fi.scale(*yi));
            }
        }
        f
    }
}

/// A multi-block LMI feasibility/optimization problem.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub num_vars: usize,
    pub blocks: Vec<LmiBlock>,
    /// Linear objective, maximized. All zeros means pure feasibility.
    pub objective: Vec<f64>,
    pub var_names: Vec<String>,
}

impl SdpProblem {
    pub fn new(num_vars: usize, blocks: Vec<LmiBlock>, objective: Vec<f64>) -> Self {
        let var_names = (0..num_vars).map(|i| format!("y{i}")).collect();
        SdpProblem { num_vars, blocks, objective, var_names }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        self.var_names = names;
        self
    }

    fn validate(&self) -> Result<(), SdpError> {
        if self.blocks.is_empty() {
            return Err(SdpError::InvalidProblem("at least one block required".into()));
        }
        if self.objective.len() != self.num_vars {
            return Err(SdpError::InvalidProblem(format!(
                "objective length {} != num_vars {}",
                self.objective.len(),
                self.num_vars
            )));
        }
        if self.var_names.len() != self.num_vars {
            return Err(SdpError::InvalidProblem("var_names length mismatch".into()));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if b.coeffs.len() != self.num_vars {
                return Err(SdpError::InvalidProblem(format!(
                    "block {k} has {} coefficient matrices, expected {}",
                    b.coeffs.len(),
                    self.num_vars
                )));
            }
            if !b.constant.is_finite() || b.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(SdpError::InvalidProblem(format!("block {k} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// `1 + maxₖ ‖F₀ᵏ‖₂`, the scale used by tolerances and the phase-1 cap.
    pub fn scale(&self) -> f64 {
        let mut m = 0.0_f64;
        for b in &self.blocks {
            m = m.max(linalg::spectral_norm(&b.constant).unwrap_or(f64::INFINITY));
        }
        1.0 + m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    /// Strict feasibility established (phase-1 margin above tolerance) and
    /// the returned point keeps a strict margin on every block.
    StrictlyFeasible,
    /// Feasible within tolerance; the optimizer sits on the boundary of some
    /// block (common when the objective pushes against a constraint).
    Feasible,
    Infeasible,
    /// Marginal or unconverged problems; never silently rounded to a verdict.
    NumericalFailure,
}

impl SdpStatus {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SdpStatus::StrictlyFeasible | SdpStatus::Feasible)
    }
}

#[derive(Debug, Clone)]
pub struct SdpReport {
    pub status: SdpStatus,
    pub y: Vec<f64>,
    pub objective_value: f64,
    /// min over blocks of the smallest eigenvalue at `y`.
    pub feasibility_margin: f64,
    /// Barrier duality bound `μ_final · Σ dim` at termination.
    pub duality_gap: f64,
    /// Total Newton steps across both phases.
    pub iterations: usize,
    /// Attained phase-1 shift t (strict feasibility margin of the problem).
    pub phase1_margin: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub eps_feas: f64,
    pub gap_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub mu_shrink: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps_feas: 1e-7,
            gap_tol: 1e-8,
            max_outer: 200,
            max_inner: 80,
            mu_shrink: 0.2,
        }
    }
}

enum GapRule {
    Absolute(f64),
    RelativeToObjective(f64),
}

struct BarrierOutcome {
    y: Vec<f64>,
    newton_steps: usize,
    gap: f64,
    converged: bool,
}

/// `L⁻¹ B` by forward substitution on columns.
fn forward_solve_matrix(l: &Mat, b: &Mat) -> Mat {
    let n = l.rows();
    let cols = b.cols();
    let mut x = b.clone();
    for j in 0..cols {
        for i in 0..n {
            let mut s = x[(i, j)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / l[(i, i)];
        }
    }
    x
}

/// Scaled coefficient matrices `Wᵢ = L⁻¹ Fᵢ L⁻ᵀ` for one block; these give
/// the barrier gradient `tr(Wᵢ)` and Hessian `⟨Wᵢ, Wⱼ⟩` directly.
fn scaled_coeffs(l: &Mat, coeffs: &[SymMatrix]) -> Vec<Mat> {
    coeffs
        .iter()
        .map(|f| {
            let x = forward_solve_matrix(l, &f.to_mat());
            let w = forward_solve_matrix(l, &x.transpose());
            // symmetrize to suppress roundoff skew
            let wt = w.transpose();
            w.add(&wt).scale(0.5)
        })
        .collect()
}

fn log_det_from_chol(l: &Mat) -> f64 {
    let mut s = 0.0;
    for i in 0..l.rows() {
        s += l[(i, i)].ln();
    }
    2.0 * s
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn frob_dot(a: &Mat, b: &Mat) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

/// Solve the (PSD) Newton system `H d = g`, escalating a diagonal ridge and
/// falling back to a pseudo-inverse if the system is numerically singular.
fn solve_newton_system(h: &SymMatrix, g: &[f64]) -> Vec<f64> {
    let n = h.dim();
    let base = (h.trace() / n as f64).abs().max(1.0);
    for k in 0..7 {
        let ridge = if k == 0 { 0.0 } else { base * 1e-14 * 10f64.powi(k as i32) };
        let reg = h.add_scaled_identity(ridge);
        if let Ok(l) = linalg::cholesky(&reg) {
            let d = linalg::cholesky_solve(&l, g);
            if d.iter().all(|v| v.is_finite()) {
                return d;
            }
        }
    }
    match linalg::sym_pinv(h, 1e-12) {
        Ok(pinv) => pinv.to_mat().matvec(g),
        Err(_) => vec![0.0; g.len()],
    }
}

/// Largest `α ∈ (0, 1]` keeping every block positive definite at `y + α d`,
/// found by backtracking Cholesky tests. Returns `None` if even a tiny step
/// leaves the cone.
fn feasible_step(blocks: &[LmiBlock], y: &[f64], d: &[f64]) -> Option<f64> {
    let mut alpha = 1.0_f64;
    'outer: for _ in 0..120 {
        let trial: Vec<f64> = y.iter().zip(d).map(|(yi, di)| yi + alpha * di).collect();
        for b in blocks {
            if linalg::cholesky(&b.eval(&trial)).is_err() {
                alpha *= 0.7;
                continue 'outer;
            }
        }
        return Some(alpha);
    }
    None
}

fn barrier_value(blocks: &[LmiBlock], c: &[f64], y: &[f64], mu: f64) -> Option<f64> {
    let mut val = dot(c, y);
    for b in blocks {
        let l = linalg::cholesky(&b.eval(y)).ok()?;
        val += mu * log_det_from_chol(&l);
    }
    Some(val)
}

/// Damped Newton centering of `cᵀy + μ Σ log det Fᵏ(y)`.
/// Returns `(reached_tolerance, steps_taken)`.
fn center(
    blocks: &[LmiBlock],
    c: &[f64],
    y: &mut [f64],
    mu: f64,
    total_dim: f64,
    opts: &SolverOptions,
) -> Result<(bool, usize), SdpError> {
    let p = y.len();
    // centering error must stay well below the claimed gap μ·ν
    let decrement_tol = 0.02 * mu * total_dim;
    for step in 0..opts.max_inner {
        let mut grad = c.to_vec();
        let mut hess = SymMatrix::zeros(p.max(1));
        for b in blocks {
            let f = b.eval(y);
            let l = linalg::cholesky(&f).map_err(|_| {
                SdpError::InvalidProblem("interior point left the cone".into())
            })?;
            let w = scaled_coeffs(&l, &b.coeffs);
            for i in 0..p {
                let mut tr = 0.0;
                for a in 0..w[i].rows() {
                    tr += w[i][(a, a)];
                }
                grad[i] += mu * tr;
                for j in i..p {
                    let hij = mu * frob_dot(&w[i], &w[j]);
                    hess.set_sym(i, j, hess.get(i, j) + hij);
                }
            }
        }
        if p == 0 {
            return Ok((true, step));
        }
        let d = solve_newton_system(&hess, &grad);
        let lambda2 = dot(&grad, &d);
        if !lambda2.is_finite() {
            return Ok((false, step));
        }
        if lambda2 <= decrement_tol {
            return Ok((true, step));
        }
        let Some(mut alpha) = feasible_step(blocks, y, &d) else {
            return Ok((false, step));
        };
        alpha *= 0.999; // stay strictly interior
        let phi0 = match barrier_value(blocks, c, y, mu) {
            Some(v) => v,
            None => return Ok((false, step)),
        };
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = y.iter().zip(&d).map(|(yi, di)| yi + alpha * di).collect();
            if let Some(phi) = barrier_value(blocks, c, &trial, mu) {
                if phi >= phi0 + 0.1 * alpha * lambda2 {
                    y.copy_from_slice(&trial);
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-16 {
                break;
            }
        }
        if !accepted {
            return Ok((false, step));
        }
    }
    Ok((false, opts.max_inner))
}

fn barrier_maximize(
    blocks: &[LmiBlock],
    c: &[f64],
    mut y: Vec<f64>,
    rule: GapRule,
    opts: &SolverOptions,
) -> Result<BarrierOutcome, SdpError> {
    let total_dim: f64 = blocks.iter().map(|b| b.dim() as f64).sum();
    let mut mu = 1.0 + dot(c, &y).abs();
    let mut steps = 0usize;
    let mut converged = false;

    for _outer in 0..opts.max_outer {
        let (centered, inner_steps) = center(blocks, c, &mut y, mu, total_dim, opts)?;
        steps += inner_steps;
        let gap = mu * total_dim;
        let target = match rule {
            GapRule::Absolute(g) => g,
            GapRule::RelativeToObjective(r) => r * (1.0 + dot(c, &y).abs()),
        };
        if gap <= target {
            converged = centered;
            break;
        }
        if !centered {
            // cannot trust the path from an uncentered point
            return Ok(BarrierOutcome { y, newton_steps: steps, gap, converged: false });
        }
        mu *= opts.mu_shrink;
    }
    let gap = mu * total_dim;
    Ok(BarrierOutcome { y, newton_steps: steps, gap, converged })
}

struct Phase1 {
    t_attained: f64,
    gap: f64,
    y: Vec<f64>,
    newton_steps: usize,
    converged: bool,
}

/// Build and solve the t-shifted problem: maximize t subject to
/// `Fᵏ(y) − t·I ⪰ 0` on every block and `t ≤ t_cap`. The y variables are
/// additionally confined to a wide trust box: with the shift objective
/// capped, an LMI whose feasible set has unbounded rays would otherwise
/// leave the barrier subproblems without a maximizer.
fn run_phase1(p: &SdpProblem, opts: &SolverOptions) -> Result<Phase1, SdpError> {
    let t_cap = 10.0 * p.scale();
    let box_radius = 1e6 * p.scale();
    let mut blocks: Vec<LmiBlock> = Vec::with_capacity(p.blocks.len() + 1 + 2 * p.num_vars);
    for b in &p.blocks {
        let mut coeffs = b.coeffs.clone();
        coeffs.push(SymMatrix::scaled_identity(b.dim(), -1.0));
        blocks.push(LmiBlock::new(b.constant.clone(), coeffs));
    }
    // cap block: t_cap − t ⪰ 0
    let mut cap_coeffs = vec![SymMatrix::zeros(1); p.num_vars];
    cap_coeffs.push(SymMatrix::scaled_identity(1, -1.0));
    blocks.push(LmiBlock::new(SymMatrix::scaled_identity(1, t_cap), cap_coeffs));
    // trust box: box_radius ± yᵢ − t ⪰ 0
    for i in 0..p.num_vars {
        for sign in [1.0, -1.0] {
            let mut coeffs = vec![SymMatrix::zeros(1); p.num_vars + 1];
            coeffs[i] = SymMatrix::scaled_identity(1, sign);
            coeffs[p.num_vars] = SymMatrix::scaled_identity(1, -1.0);
            blocks.push(LmiBlock::new(SymMatrix::scaled_identity(1, box_radius), coeffs));
        }
    }

    let mut min_eig0 = f64::INFINITY;
    for b in &p.blocks {
        min_eig0 = min_eig0.min(linalg::min_eig(&b.constant)?);
    }
    let mut y0 = vec![0.0; p.num_vars + 1];
    y0[p.num_vars] = min_eig0 - 1.0;

    let mut c = vec![0.0; p.num_vars + 1];
    c[p.num_vars] = 1.0;

    // the ± band around t* that separates verdicts is eps_feas; resolve it
    // with two orders of magnitude to spare
    let gap_target = (0.01 * opts.eps_feas * p.scale()).min(opts.gap_tol * p.scale());
    let out = barrier_maximize(&blocks, &c, y0, GapRule::Absolute(gap_target), opts)?;

    let t_attained = out.y[p.num_vars];
    let y = out.y[..p.num_vars].to_vec();
    Ok(Phase1 { t_attained, gap: out.gap, y, newton_steps: out.newton_steps, converged: out.converged })
}

/// Largest t with `Fᵏ(y) ⪰ t·I` feasible on every block, capped at
/// `10·(1 + maxₖ‖F₀ᵏ‖)`. Strict feasibility holds iff the result exceeds
/// the feasibility tolerance. The cap scales with the problem's own data,
/// so capped values are not comparable across different problems; below the
/// cap the margin is the geometric optimum and shrinks as blocks are added.
pub fn phase1_margin(p: &SdpProblem) -> Result<f64, SdpError> {
    phase1_margin_with(p, &SolverOptions::default())
}

pub fn phase1_margin_with(p: &SdpProblem, opts: &SolverOptions) -> Result<f64, SdpError> {
    p.validate()?;
    Ok(run_phase1(p, opts)?.t_attained)
}

fn margin_at(blocks: &[LmiBlock], y: &[f64]) -> f64 {
    let mut m = f64::INFINITY;
    for b in blocks {
        m = m.min(linalg::min_eig(&b.eval(y)).unwrap_or(f64::NEG_INFINITY));
    }
    m
}

pub fn solve(p: &SdpProblem) -> Result<SdpReport, SdpError> {
    solve_with(p, &SolverOptions::default(), None)
}

/// Solve with explicit options and an optional starting guess for phase 1
/// (the default start is the origin). The guess only seeds the interior
/// search; results are identical up to solver tolerances.
pub fn solve_with(
    p: &SdpProblem,
    opts: &SolverOptions,
    start: Option<&[f64]>,
) -> Result<SdpReport, SdpError> {
    p.validate()?;
    if let Some(s) = start {
        if s.len() != p.num_vars {
            return Err(SdpError::InvalidProblem("start length mismatch".into()));
        }
    }
    let scale = p.scale();

    let phase1 = {
        let mut shifted = p.clone();
        if let Some(s) = start {
            // translate the problem so the guess becomes the origin
            for b in &mut shifted.blocks {
                b.constant = b.eval(s);
            }
            let mut ph = run_phase1(&shifted, opts)?;
            for (yi, si) in ph.y.iter_mut().zip(s) {
                *yi += si;
            }
            ph
        } else {
            run_phase1(p, opts)?
        }
    };

    let mut report = SdpReport {
        status: SdpStatus::NumericalFailure,
        y: phase1.y.clone(),
        objective_value: dot(&p.objective, &phase1.y),
        feasibility_margin: margin_at(&p.blocks, &phase1.y),
        duality_gap: phase1.gap,
        iterations: phase1.newton_steps,
        phase1_margin: phase1.t_attained,
    };

    if !phase1.converged {
        return Ok(report);
    }
    if phase1.t_attained <= opts.eps_feas {
        if phase1.t_attained + phase1.gap < -opts.eps_feas {
            report.status = SdpStatus::Infeasible;
        }
        return Ok(report);
    }

    let pure_feasibility = p.objective.iter().all(|c| *c == 0.0);
    if pure_feasibility {
        report.status = SdpStatus::StrictlyFeasible;
        return Ok(report);
    }

    let out = barrier_maximize(
        &p.blocks,
        &p.objective,
        phase1.y,
        GapRule::RelativeToObjective(opts.gap_tol),
        opts,
    )?;
    report.iterations += out.newton_steps;
    report.duality_gap = out.gap;
    report.objective_value = dot(&p.objective, &out.y);
    report.feasibility_margin = margin_at(&p.blocks, &out.y);
    report.y = out.y;
    report.status = if !out.converged {
        SdpStatus::NumericalFailure
    } else if report.feasibility_margin > opts.eps_feas * scale {
        SdpStatus::StrictlyFeasible
    } else {
        SdpStatus::Feasible
    };
    Ok(report)
}
