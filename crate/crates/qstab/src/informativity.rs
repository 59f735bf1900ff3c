//! Consistency sets and informativity for quadratic stabilization.
//!
//! The data matrix `N = diag(Q, 0, 0) − G` (budget minus Gramian) defines
//! the set of systems consistent with the measurements,
//! `Z(N) = {(A, B) : [I A B] N [I A B]ᵀ ⪰ 0}`. The data are informative for
//! quadratic stabilization exactly when there are `P ≻ 0`, a gain `K` and a
//! margin `β > 0` making
//!
//! ```text
//!   −N − [βI  P  Lᵀ]
//!        [P   0  0 ]  ⪰ 0        with L = K P
//!        [L   0  0 ]
//! ```
//!
//! hold; the same matrix inequality covers both continuous-data and
//! sampled-data matrices. On top of feasibility this module provides margin
//! maximization, the tightened margin floor `β > ½δTL` that transfers a
//! sampled-data certificate to every consistent continuous-time system under
//! an L-square-Lipschitz (or bounded-variation) noise assumption, admissible
//! stepsize and sample-coarsening bounds, a data-driven bound on consistent
//! system norms (the λ certificate), and scalar region scans.

use crate::linalg::{self, LinalgError, Mat, SymMatrix};
use crate::noise::{BudgetKind, NoiseBudget, RegularityCertificate, RegularityKind};
use crate::sdp::{self, LmiBlock, SdpProblem, SdpReport, SdpStatus, SolverOptions};
use crate::signals::{Gramian, GramianKind};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InformativityError {
    #[error("provenance mismatch: {0}")]
    Provenance(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("solver error: {0}")]
    Solver(#[from] sdp::SdpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Where a data matrix came from: the integral Gramian of continuous
/// measurements, or δ-weighted samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Continuous,
    Sampled { delta: f64 },
}

/// The symmetric data matrix `N = diag(Q,0,0) − G` of size `2n+m` together
/// with its partition sizes, provenance and the budget it was built from.
#[derive(Debug, Clone)]
pub struct DataQmi {
    n: usize,
    m: usize,
    matrix: SymMatrix,
    provenance: Provenance,
    budget: NoiseBudget,
}

/// Relative PSD tolerance used for the structural checks at assembly.
const ASSEMBLY_TOL: f64 = 1e-8;

impl DataQmi {
    /// Assemble from a Gramian and a budget of matching kind and horizon.
    pub fn assemble(g: &Gramian, b: &NoiseBudget) -> Result<Self, InformativityError> {
        let provenance = match (g.kind(), b.kind()) {
            (GramianKind::Continuous, BudgetKind::ContinuousIntegral) => Provenance::Continuous,
            (GramianKind::Discrete { delta: dg }, BudgetKind::Discrete { delta: db }) => {
                if (dg - db).abs() > 1e-9 * dg.max(db) {
                    return Err(InformativityError::Provenance(format!(
                        "gramian stepsize {dg} != budget stepsize {db}"
                    )));
                }
                Provenance::Sampled { delta: dg }
            }
            (gk, bk) => {
                return Err(InformativityError::Provenance(format!(
                    "gramian kind {gk:?} incompatible with budget kind {bk:?}"
                )));
            }
        };
        if (g.horizon() - b.horizon()).abs() > 1e-9 * g.horizon().max(1.0) {
            return Err(InformativityError::Provenance(format!(
                "gramian horizon {} != budget horizon {}",
                g.horizon(),
                b.horizon()
            )));
        }
        let n = g.state_dim();
        let m = g.input_dim();
        if b.dim() != n {
            return Err(InformativityError::Dimension(format!(
                "budget dimension {} != state dimension {n}",
                b.dim()
            )));
        }
        let dim = 2 * n + m;
        let mut matrix = g.matrix().scale(-1.0);
        for i in 0..n {
            for j in i..n {
                matrix.set_sym(i, j, matrix.get(i, j) + b.q().get(i, j));
            }
        }
        debug_assert_eq!(matrix.dim(), dim);

        // The trailing block is minus a sum of outer products of (x; u), so
        // it can never be positive: anything else signals corrupted data.
        let qmi = DataQmi { n, m, matrix, provenance, budget: b.clone() };
        let n22 = qmi.n22();
        let scale = 1.0 + linalg::spectral_norm(&n22)?;
        if linalg::max_eig(&n22)? > ASSEMBLY_TOL * scale {
            return Err(InformativityError::InvalidArgument(
                "trailing block of the data matrix is not negative semidefinite".into(),
            ));
        }
        Ok(qmi)
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn budget(&self) -> &NoiseBudget {
        &self.budget
    }

    pub fn horizon(&self) -> f64 {
        self.budget.horizon()
    }

    /// Leading n×n block (budget minus derivative Gramian).
    pub fn n11(&self) -> SymMatrix {
        self.matrix.submatrix(&(0..self.n).collect::<Vec<_>>())
    }

    /// Off-diagonal block coupling the derivative rows to the (x, u) rows.
    pub fn n12(&self) -> Mat {
        self.matrix.block(0..self.n, self.n..2 * self.n + self.m)
    }

    /// Trailing (n+m)×(n+m) block; equals minus the excitation Gramian.
    pub fn n22(&self) -> SymMatrix {
        self.matrix.submatrix(&(self.n..2 * self.n + self.m).collect::<Vec<_>>())
    }

    /// `∫ (x;u)(x;u)ᵀ dt` (or its δ-weighted sum): the excitation Gramian.
    pub fn excitation_gramian(&self) -> SymMatrix {
        self.n22().scale(-1.0)
    }

    /// Generalized Schur complement `N11 − N12 N22† N21`; the consistency
    /// set is nonempty iff this is PSD.
    pub fn consistency_schur(&self) -> Result<SymMatrix, InformativityError> {
        let n12 = self.n12();
        let pinv = linalg::sym_pinv(&self.n22(), 1e-12)?;
        let correction = n12.matmul(&pinv.to_mat()).matmul(&n12.transpose());
        Ok(SymMatrix::from_mat(&self.n11().to_mat().sub(&correction)))
    }

    pub fn is_consistent_set_nonempty(&self, tol: f64) -> Result<bool, InformativityError> {
        Ok(linalg::is_psd(&self.consistency_schur()?, tol)?)
    }

    /// `1 + ‖N‖₂`, the scale for floors and normalization.
    fn scale(&self) -> f64 {
        1.0 + linalg::spectral_norm(&self.matrix).expect("assembled matrix is finite")
    }
}

/// Membership test `[I A B] N [I A B]ᵀ ⪰ −tol·scale`.
pub fn membership(a: &Mat, b: &Mat, q: &DataQmi, tol: f64) -> Result<bool, InformativityError> {
    let n = q.state_dim();
    let m = q.input_dim();
    if a.rows() != n || a.cols() != n || b.rows() != n || b.cols() != m {
        return Err(InformativityError::Dimension(format!(
            "expected A {n}×{n} and B {n}×{m}, got {}×{} and {}×{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if n == 1 && m == 1 {
        return Ok(membership_form_scalar(a[(0, 0)], b[(0, 0)], q) >= -tol * q.scale());
    }
    // S = [I A B], n×(2n+m)
    let mut s = Mat::zeros(n, 2 * n + m);
    for i in 0..n {
        s[(i, i)] = 1.0;
        for j in 0..n {
            s[(i, n + j)] = a[(i, j)];
        }
        for j in 0..m {
            s[(i, 2 * n + j)] = b[(i, j)];
        }
    }
    let form = SymMatrix::from_mat(&s.matmul(&q.matrix().to_mat()).matmul(&s.transpose()));
    Ok(linalg::is_psd(&form, tol)?)
}

/// Scalar-system quadratic form `[1 a b] N [1 a b]ᵀ`.
pub fn membership_form_scalar(a: f64, b: f64, q: &DataQmi) -> f64 {
    debug_assert!(q.state_dim() == 1 && q.input_dim() == 1);
    q.matrix.quadratic_form(&[1.0, a, b])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// Continuous data, integral noise budget.
    ContinuousData,
    /// Sampled data, discrete noise budget.
    SampledData,
    /// Sampled data with the regularity margin floor `β > ½δTL`; certifies
    /// stabilization of every consistent continuous-time system.
    SampledSufficient,
}

/// Summary of the solver run that produced a certificate.
#[derive(Debug, Clone, Copy)]
pub struct SolverSummary {
    pub iterations: usize,
    pub phase1_margin: f64,
    pub feasibility_margin: f64,
    pub duality_gap: f64,
}

impl SolverSummary {
    fn from_report(r: &SdpReport) -> Self {
        SolverSummary {
            iterations: r.iterations,
            phase1_margin: r.phase1_margin,
            feasibility_margin: r.feasibility_margin,
            duality_gap: r.duality_gap,
        }
    }
}

/// A `(P, K, β)` triple witnessing one of the stabilization inequalities.
#[derive(Debug, Clone)]
pub struct StabilizationCertificate {
    pub p: SymMatrix,
    pub k: Mat,
    pub beta: f64,
    pub theorem: Theorem,
    pub p_floor: f64,
    pub b_floor: f64,
    /// Condition number of P (ratio of extreme eigenvalues).
    pub p_condition: f64,
    pub solver: SolverSummary,
}

#[derive(Debug, Clone)]
pub enum SynthesisVerdict {
    Informative(Box<StabilizationCertificate>),
    /// The strict-feasibility margin was decisively negative.
    NotInformative { phase1_margin: f64 },
    /// Marginal or unconverged; never claimed either way.
    Indeterminate { phase1_margin: f64 },
}

impl SynthesisVerdict {
    pub fn certificate(&self) -> Option<&StabilizationCertificate> {
        match self {
            SynthesisVerdict::Informative(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SufficiencyVerdict {
    Certified(Box<StabilizationCertificate>),
    /// The LMI with the tightened floor is infeasible: the data are not
    /// rich enough at this stepsize/regularity to certify the true system.
    Insufficient { phase1_margin: f64 },
    Indeterminate { phase1_margin: f64 },
}

impl SufficiencyVerdict {
    pub fn certificate(&self) -> Option<&StabilizationCertificate> {
        match self {
            SufficiencyVerdict::Certified(c) => Some(c),
            _ => None,
        }
    }
}

/// Result of maximizing the margin β over the stabilization LMI.
#[derive(Debug, Clone)]
pub struct MarginReport {
    pub beta_hat: f64,
    pub p: SymMatrix,
    pub k: Mat,
    /// The normalization `trace(P) ≤ n·scale` under which β̂ was computed.
    pub trace_cap: f64,
    pub trace_cap_active: bool,
    pub provenance: Provenance,
    pub horizon: f64,
    pub solver: SolverSummary,
}

#[derive(Debug, Clone)]
pub enum MarginVerdict {
    Feasible(Box<MarginReport>),
    NotInformative { phase1_margin: f64 },
    Indeterminate { phase1_margin: f64 },
}

impl MarginVerdict {
    pub fn report(&self) -> Option<&MarginReport> {
        match self {
            MarginVerdict::Feasible(r) => Some(r),
            _ => None,
        }
    }
}

/// Data-driven bound on consistent systems: `AAᵀ + BBᵀ ≺ (λ−1)I` for every
/// `(A, B)` in the consistency set, witnessed by multipliers `(α, β)`.
#[derive(Debug, Clone, Copy)]
pub struct LambdaCertificate {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub excitation_ok: bool,
    pub excitation_min_eig: f64,
}

#[derive(Debug, Clone)]
pub enum LambdaVerdict {
    Certified(LambdaCertificate),
    /// The excitation Gramian `∫(x;u)(x;u)ᵀdt` is singular; no finite λ
    /// bounds the consistency set.
    NoExcitation { min_eig: f64 },
    Indeterminate { phase1_margin: f64 },
}

/// Variable layout of the stabilization LMI: the upper triangle of P
/// column-by-column, then L row-major, then β.
struct VarLayout {
    n: usize,
    m: usize,
}

impl VarLayout {
    fn p_vars(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    fn count(&self) -> usize {
        self.p_vars() + self.m * self.n + 1
    }

    fn p_index(&self, i: usize, j: usize) -> usize {
        // upper triangle (i ≤ j), row-major
        debug_assert!(i <= j && j < self.n);
        i * self.n + j - i * (i + 1) / 2
    }

    fn l_index(&self, k: usize, j: usize) -> usize {
        self.p_vars() + k * self.n + j
    }

    fn beta_index(&self) -> usize {
        self.p_vars() + self.m * self.n
    }

    fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.count());
        for i in 0..self.n {
            for j in i..self.n {
                names.push(format!("p_{}{}", i + 1, j + 1));
            }
        }
        for k in 0..self.m {
            for j in 0..self.n {
                names.push(format!("l_{}{}", k + 1, j + 1));
            }
        }
        names.push("beta".into());
        names
    }

    fn extract_p(&self, y: &[f64]) -> SymMatrix {
        let mut p = SymMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                p.set_sym(i, j, y[self.p_index(i, j)]);
            }
        }
        p
    }

    fn extract_l(&self, y: &[f64]) -> Mat {
        let mut l = Mat::zeros(self.m, self.n);
        for k in 0..self.m {
            for j in 0..self.n {
                l[(k, j)] = y[self.l_index(k, j)];
            }
        }
        l
    }
}

/// The matrix `−N − [βI P Lᵀ; P 0 0; L 0 0]` evaluated at given values.
fn stability_matrix(q: &DataQmi, p: &SymMatrix, l: &Mat, beta: f64) -> SymMatrix {
    let n = q.state_dim();
    let m = q.input_dim();
    let mut t = q.matrix().scale(-1.0);
    for i in 0..n {
        t.set_sym(i, i, t.get(i, i) - beta);
        for j in 0..n {
            if j >= i {
                t.set_sym(i, n + j, t.get(i, n + j) - p.get(i, j));
                if j != i {
                    t.set_sym(j, n + i, t.get(j, n + i) - p.get(j, i));
                }
            }
        }
        for k in 0..m {
            t.set_sym(i, 2 * n + k, t.get(i, 2 * n + k) - l[(k, i)]);
        }
    }
    t
}

/// Build the stabilization LMI in variables (P upper triangle, L, β):
/// main block plus floors `P ⪰ p_floor·I`, `β ≥ beta_floor`, and optionally
/// the normalization `trace(P) ≤ cap`.
fn build_stability_problem(
    q: &DataQmi,
    beta_floor: f64,
    p_floor: f64,
    trace_cap: Option<f64>,
    maximize_beta_obj: bool,
) -> SdpProblem {
    let n = q.state_dim();
    let m = q.input_dim();
    let dim = 2 * n + m;
    let layout = VarLayout { n, m };
    let nv = layout.count();

    // main block
    let mut coeffs = Vec::with_capacity(nv);
    for i in 0..n {
        for j in i..n {
            let mut f = SymMatrix::zeros(dim);
            f.set_sym(i, n + j, -1.0);
            if i != j {
                f.set_sym(j, n + i, -1.0);
            }
            coeffs.push(f);
        }
    }
    for k in 0..m {
        for j in 0..n {
            let mut f = SymMatrix::zeros(dim);
            f.set_sym(j, 2 * n + k, -1.0);
            coeffs.push(f);
        }
    }
    let mut f_beta = SymMatrix::zeros(dim);
    for i in 0..n {
        f_beta.set_sym(i, i, -1.0);
    }
    coeffs.push(f_beta);
    let main = LmiBlock::new(q.matrix().scale(-1.0), coeffs);

    // P ⪰ p_floor·I
    let mut p_coeffs = Vec::with_capacity(nv);
    for i in 0..n {
        for j in i..n {
            let mut f = SymMatrix::zeros(n);
            f.set_sym(i, j, 1.0);
            p_coeffs.push(f);
        }
    }
    for _ in 0..(m * n + 1) {
        p_coeffs.push(SymMatrix::zeros(n));
    }
    let p_block = LmiBlock::new(SymMatrix::scaled_identity(n, -p_floor), p_coeffs);

    // β ≥ beta_floor
    let mut b_coeffs = vec![SymMatrix::zeros(1); nv];
    b_coeffs[layout.beta_index()] = SymMatrix::scaled_identity(1, 1.0);
    let b_block = LmiBlock::new(SymMatrix::scaled_identity(1, -beta_floor), b_coeffs);

    let mut blocks = vec![main, p_block, b_block];
    if let Some(cap) = trace_cap {
        let mut t_coeffs = vec![SymMatrix::zeros(1); nv];
        for i in 0..n {
            t_coeffs[layout.p_index(i, i)] = SymMatrix::scaled_identity(1, -1.0);
        }
        blocks.push(LmiBlock::new(SymMatrix::scaled_identity(1, cap), t_coeffs));
    }

    let mut objective = vec![0.0; nv];
    if maximize_beta_obj {
        objective[layout.beta_index()] = 1.0;
    }
    SdpProblem::new(nv, blocks, objective).with_names(layout.names())
}

fn floors(q: &DataQmi) -> (f64, f64) {
    let scale = q.scale();
    (1e-6 * scale, 1e-6 * scale)
}

fn extract_certificate(
    q: &DataQmi,
    report: &SdpReport,
    theorem: Theorem,
    p_floor: f64,
    b_floor: f64,
) -> Result<StabilizationCertificate, InformativityError> {
    let layout = VarLayout { n: q.state_dim(), m: q.input_dim() };
    let p = layout.extract_p(&report.y);
    let l = layout.extract_l(&report.y);
    let beta = report.y[layout.beta_index()];
    let chol = linalg::cholesky(&p)?;
    // K = L P⁻¹, i.e. K P = L; solve column-wise against the rows of L
    let mut k = Mat::zeros(q.input_dim(), q.state_dim());
    for r in 0..q.input_dim() {
        let row: Vec<f64> = (0..q.state_dim()).map(|c| l[(r, c)]).collect();
        let sol = linalg::cholesky_solve(&chol, &row);
        for c in 0..q.state_dim() {
            k[(r, c)] = sol[c];
        }
    }
    let eig = linalg::sym_eig(&p)?;
    let p_condition = eig.eigenvalues.last().unwrap() / eig.eigenvalues[0];
    Ok(StabilizationCertificate {
        p,
        k,
        beta,
        theorem,
        p_floor,
        b_floor,
        p_condition,
        solver: SolverSummary::from_report(report),
    })
}

/// Verdict + residual from evaluating the stabilization inequality at given
/// values (no optimization).
#[derive(Debug, Clone, Copy)]
pub struct CertificateCheck {
    pub holds: bool,
    /// Smallest eigenvalue of the main LMI matrix at the given values.
    pub lmi_min_eig: f64,
    pub p_min_eig: f64,
    pub beta: f64,
}

pub fn check_certificate(
    q: &DataQmi,
    p: &SymMatrix,
    k: &Mat,
    beta: f64,
) -> Result<CertificateCheck, InformativityError> {
    let n = q.state_dim();
    let m = q.input_dim();
    if p.dim() != n || k.rows() != m || k.cols() != n {
        return Err(InformativityError::Dimension(format!(
            "expected P {n}×{n} and K {m}×{n}"
        )));
    }
    let l = k.matmul(&p.to_mat());
    let t = stability_matrix(q, p, &l, beta);
    let lmi_min_eig = linalg::min_eig(&t)?;
    let p_min_eig = linalg::min_eig(p)?;
    let scale = 1.0 + linalg::spectral_norm(&t)?;
    let eps = SolverOptions::default().eps_feas;
    let holds = lmi_min_eig >= -eps * scale && p_min_eig > 0.0 && beta > 0.0;
    Ok(CertificateCheck { holds, lmi_min_eig, p_min_eig, beta })
}

fn synthesize_with_floor(
    q: &DataQmi,
    beta_floor: f64,
    theorem: Theorem,
) -> Result<SynthesisVerdict, InformativityError> {
    let (p_floor, b_floor) = floors(q);
    let problem = build_stability_problem(q, beta_floor, p_floor, None, false);
    let report = sdp::solve(&problem)?;
    match report.status {
        SdpStatus::StrictlyFeasible => {
            let cert = extract_certificate(q, &report, theorem, p_floor, b_floor)?;
            // certificates are self-verifying; a failed re-check means the
            // solver tolerance was not actually met
            let check = check_certificate(q, &cert.p, &cert.k, cert.beta)?;
            if check.holds {
                Ok(SynthesisVerdict::Informative(Box::new(cert)))
            } else {
                Ok(SynthesisVerdict::Indeterminate { phase1_margin: report.phase1_margin })
            }
        }
        SdpStatus::Infeasible => {
            Ok(SynthesisVerdict::NotInformative { phase1_margin: report.phase1_margin })
        }
        SdpStatus::Feasible | SdpStatus::NumericalFailure => {
            Ok(SynthesisVerdict::Indeterminate { phase1_margin: report.phase1_margin })
        }
    }
}

/// Decide informativity for quadratic stabilization and synthesize a gain.
/// Continuous-provenance data certify every consistent system directly;
/// sampled-provenance data certify every system consistent with the sampled
/// matrices (not yet the underlying continuous-time plant — see
/// [`sampled_sufficient`] for that step).
pub fn synthesize(q: &DataQmi) -> Result<SynthesisVerdict, InformativityError> {
    let (_, b_floor) = floors(q);
    let theorem = match q.provenance() {
        Provenance::Continuous => Theorem::ContinuousData,
        Provenance::Sampled { .. } => Theorem::SampledData,
    };
    synthesize_with_floor(q, b_floor, theorem)
}

/// Maximize the margin β subject to the stabilization LMI under the
/// normalization `trace(P) ≤ n·(1 + ‖N‖₂)` (the margin supremum over the
/// unnormalized open set need not be attained; the cap keeps the optimum
/// bounded and reproducible, and the report flags when it binds).
pub fn maximize_beta(q: &DataQmi) -> Result<MarginVerdict, InformativityError> {
    let (p_floor, b_floor) = floors(q);
    let cap = q.state_dim() as f64 * q.scale();
    let problem = build_stability_problem(q, b_floor, p_floor, Some(cap), true);
    let report = sdp::solve(&problem)?;
    if !report.status.is_feasible() {
        return Ok(match report.status {
            SdpStatus::Infeasible => {
                MarginVerdict::NotInformative { phase1_margin: report.phase1_margin }
            }
            _ => MarginVerdict::Indeterminate { phase1_margin: report.phase1_margin },
        });
    }
    let layout = VarLayout { n: q.state_dim(), m: q.input_dim() };
    let p = layout.extract_p(&report.y);
    let cert = extract_certificate(q, &report, Theorem::ContinuousData, p_floor, b_floor)?;
    let trace_cap_active = p.trace() >= cap * (1.0 - 1e-6);
    Ok(MarginVerdict::Feasible(Box::new(MarginReport {
        beta_hat: report.objective_value,
        p,
        k: cert.k,
        trace_cap: cap,
        trace_cap_active,
        provenance: q.provenance(),
        horizon: q.horizon(),
        solver: SolverSummary::from_report(&report),
    })))
}

/// Sampled-data certificate for the continuous-time plant: solves the
/// stabilization LMI with the tightened floor `β ≥ ½δTL + b_floor` (or
/// `δV + b_floor` for a variation certificate). Success certifies quadratic
/// stabilization of every system consistent with the *continuous* data whose
/// noise realization satisfies the regularity assumption — in particular the
/// true plant. A grid-estimated constant is rejected: the guarantee is
/// vacuous without a true upper bound.
pub fn sampled_sufficient(
    q: &DataQmi,
    reg: &RegularityCertificate,
) -> Result<SufficiencyVerdict, InformativityError> {
    let Provenance::Sampled { delta } = q.provenance() else {
        return Err(InformativityError::Provenance(
            "sampled-data sufficiency needs sampled provenance".into(),
        ));
    };
    if !reg.is_upper_bound() {
        return Err(InformativityError::InvalidArgument(
            "regularity constant must be an assumed or derived upper bound, not a grid estimate"
                .into(),
        ));
    }
    let (_, b_floor) = floors(q);
    let floor = deviation_floor(reg, delta, q.horizon()) + b_floor;
    match synthesize_with_floor(q, floor, Theorem::SampledSufficient)? {
        SynthesisVerdict::Informative(c) => Ok(SufficiencyVerdict::Certified(c)),
        SynthesisVerdict::NotInformative { phase1_margin } => {
            Ok(SufficiencyVerdict::Insufficient { phase1_margin })
        }
        SynthesisVerdict::Indeterminate { phase1_margin } => {
            Ok(SufficiencyVerdict::Indeterminate { phase1_margin })
        }
    }
}

/// The margin floor `½δTL` (Lipschitz) or `δV` (variation).
pub fn deviation_floor(reg: &RegularityCertificate, delta: f64, horizon: f64) -> f64 {
    match reg.kind {
        RegularityKind::SquareLipschitz(l) => 0.5 * delta * horizon * l,
        RegularityKind::TotalSquareVariation(v) => delta * v,
    }
}

/// Largest admissible stepsize `δ_max = β̂/(TL)`: for any δ below it the
/// sampled-data LMI holds with margin `β̂ − ½δTL > ½δTL`. Returns +∞ when
/// L = 0 (noiseless-regularity limit).
pub fn stepsize_bound(margin: &MarginReport, horizon: f64, l: f64) -> f64 {
    assert!(l >= 0.0);
    if l == 0.0 {
        return f64::INFINITY;
    }
    margin.beta_hat / (horizon * l)
}

/// Largest coarsening factor: the data sampled at `γ = (ℓ+1)δ` stay
/// informative for every `ℓ < 2β̂/(δTL)`; returns the largest such ℓ that
/// also keeps `T/γ` an integer, or 0 when no coarsening is admissible.
pub fn coarsening_bound(
    margin: &MarginReport,
    horizon: f64,
    l: f64,
) -> Result<usize, InformativityError> {
    let Provenance::Sampled { delta } = margin.provenance else {
        return Err(InformativityError::Provenance(
            "coarsening applies to sampled-provenance margins".into(),
        ));
    };
    if l <= 0.0 {
        return Err(InformativityError::InvalidArgument(
            "coarsening bound needs a positive regularity constant".into(),
        ));
    }
    let bound = 2.0 * margin.beta_hat / (delta * horizon * l);
    // largest integer strictly below the bound
    let mut ell = if bound <= 0.0 {
        0
    } else {
        let c = bound.ceil();
        (if c == bound { bound - 1.0 } else { c - 1.0 }).max(0.0) as usize
    };
    while ell > 0 {
        let gamma = (ell + 1) as f64 * delta;
        if crate::signals::exact_ratio(horizon, gamma).is_some() {
            break;
        }
        ell -= 1;
    }
    Ok(ell)
}

/// Tolerance for the excitation positive-definiteness test.
const EXCITATION_TOL: f64 = 1e-8;

/// Minimize λ subject to the multiplier LMI certifying
/// `AAᵀ + BBᵀ ≺ (λ−1)I` over the whole consistency set. Requires continuous
/// provenance and a positive definite excitation Gramian.
pub fn certify_lambda(q: &DataQmi) -> Result<LambdaVerdict, InformativityError> {
    if q.provenance() != Provenance::Continuous {
        return Err(InformativityError::Provenance(
            "λ certification is defined for continuous-provenance data".into(),
        ));
    }
    let n = q.state_dim();
    let m = q.input_dim();
    let dim = 2 * n + m;
    let excitation = q.excitation_gramian();
    let exc_scale = 1.0 + linalg::spectral_norm(&excitation)?;
    let exc_min = linalg::min_eig(&excitation)?;
    if exc_min <= EXCITATION_TOL * exc_scale {
        return Ok(LambdaVerdict::NoExcitation { min_eig: exc_min });
    }

    let (_, b_floor) = floors(q);
    // variables (λ, α, β): block
    //   diag((λ−1−β)Iₙ, −Iₙ, −I_m) + α(G − diag(Q,0,0)) ⪰ 0
    // and G − diag(Q,0,0) = −N.
    let mut f0 = SymMatrix::zeros(dim);
    for i in 0..dim {
        f0.set_sym(i, i, -1.0);
    }
    let mut c_lambda = SymMatrix::zeros(dim);
    let mut c_beta = SymMatrix::zeros(dim);
    for i in 0..n {
        c_lambda.set_sym(i, i, 1.0);
        c_beta.set_sym(i, i, -1.0);
    }
    let c_alpha = q.matrix().scale(-1.0);
    let main = LmiBlock::new(f0, vec![c_lambda, c_alpha, c_beta]);
    let lambda_floor = LmiBlock::new(
        SymMatrix::scaled_identity(1, -1.0),
        vec![
            SymMatrix::scaled_identity(1, 1.0),
            SymMatrix::zeros(1),
            SymMatrix::zeros(1),
        ],
    );
    let alpha_floor = LmiBlock::new(
        SymMatrix::zeros(1),
        vec![
            SymMatrix::zeros(1),
            SymMatrix::scaled_identity(1, 1.0),
            SymMatrix::zeros(1),
        ],
    );
    let beta_floor = LmiBlock::new(
        SymMatrix::scaled_identity(1, -b_floor),
        vec![
            SymMatrix::zeros(1),
            SymMatrix::zeros(1),
            SymMatrix::scaled_identity(1, 1.0),
        ],
    );
    let problem = SdpProblem::new(
        3,
        vec![main, lambda_floor, alpha_floor, beta_floor],
        vec![-1.0, 0.0, 0.0], // minimize λ
    )
    .with_names(vec!["lambda".into(), "alpha".into(), "beta".into()]);

    let report = sdp::solve(&problem)?;
    if !report.status.is_feasible() {
        return Ok(LambdaVerdict::Indeterminate { phase1_margin: report.phase1_margin });
    }
    Ok(LambdaVerdict::Certified(LambdaCertificate {
        lambda: report.y[0],
        alpha: report.y[1],
        beta: report.y[2],
        excitation_ok: true,
        excitation_min_eig: exc_min,
    }))
}

/// Lyapunov decrease test `(A+BK)P + P(A+BK)ᵀ ≺ 0` for a given closed loop.
pub fn lyapunov_check(
    a: &Mat,
    b: &Mat,
    k: &Mat,
    p: &SymMatrix,
) -> Result<bool, InformativityError> {
    if linalg::min_eig(p)? <= 0.0 {
        return Err(InformativityError::InvalidArgument(
            "Lyapunov test needs P positive definite".into(),
        ));
    }
    let acl = a.add(&b.matmul(k));
    let m = acl.matmul(&p.to_mat());
    let sym = SymMatrix::from_mat(&m.add(&m.transpose()));
    Ok(linalg::max_eig(&sym)? < 0.0)
}

/// Membership grid of a scalar consistency set over a rectangle.
#[derive(Debug, Clone)]
pub struct RegionGrid {
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    /// Row-major over (a, b): `inside[i * b_values.len() + j]`.
    pub inside: Vec<bool>,
}

impl RegionGrid {
    pub fn at(&self, i: usize, j: usize) -> bool {
        self.inside[i * self.b_values.len() + j]
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Scan membership of scalar systems `(a, b)` over a rectangular window.
/// `workers` > 1 splits the rows across threads (cells are independent).
pub fn region_scan(
    q: &DataQmi,
    a_range: (f64, f64),
    b_range: (f64, f64),
    counts: (usize, usize),
    tol: f64,
    workers: usize,
) -> Result<RegionGrid, InformativityError> {
    if q.state_dim() != 1 || q.input_dim() != 1 {
        return Err(InformativityError::Dimension(format!(
            "region scan is defined for scalar systems, got n = {}, m = {}",
            q.state_dim(),
            q.input_dim()
        )));
    }
    if counts.0 == 0 || counts.1 == 0 {
        return Err(InformativityError::InvalidArgument("grid counts must be positive".into()));
    }
    let a_values = linspace(a_range.0, a_range.1, counts.0);
    let b_values = linspace(b_range.0, b_range.1, counts.1);
    let threshold = -tol * q.scale();
    let row = |a: f64| -> Vec<bool> {
        b_values
            .iter()
            .map(|&b| membership_form_scalar(a, b, q) >= threshold)
            .collect()
    };
    let inside = if workers <= 1 || a_values.len() == 1 {
        a_values.iter().flat_map(|&a| row(a)).collect()
    } else {
        let chunk = a_values.len().div_ceil(workers);
        let mut parts: Vec<Vec<bool>> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = a_values
                .chunks(chunk)
                .map(|as_chunk| scope.spawn(move || as_chunk.iter().flat_map(|&a| row(a)).collect::<Vec<bool>>()))
                .collect();
            for h in handles {
                parts.push(h.join().expect("region worker panicked"));
            }
        });
        parts.concat()
    };
    Ok(RegionGrid { a_values, b_values, inside })
}

/// Symmetric matrix power via eigendecomposition, clamping negative
/// eigenvalues to zero first (used for `C^{1/2}` and `R^{−1/2}`).
fn psd_power(a: &SymMatrix, exponent: f64) -> Result<SymMatrix, LinalgError> {
    let eig = linalg::sym_eig(a)?;
    let n = a.dim();
    let v = &eig.eigenvectors;
    let mut out = Mat::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k].max(0.0);
        let w = if lam == 0.0 && exponent < 0.0 { 0.0 } else { lam.powf(exponent) };
        for i in 0..n {
            let vik = v[(i, k)] * w;
            for j in 0..n {
                out[(i, j)] += vik * v[(j, k)];
            }
        }
    }
    Ok(SymMatrix::from_mat(&out))
}

/// Draw systems from the consistency set. When the excitation Gramian
/// `R = −N22` is definite the set is exactly the matrix ball
/// `S = S₀ + C^{1/2} Z R^{−1/2}` with `S₀ = N12R⁻¹`, `C` the consistency
/// Schur complement and `‖Z‖₂ ≤ 1`, so members are drawn by sampling that
/// ball directly (radii biased toward the boundary); each draw is still
/// re-checked through `membership`. A degenerate `R` falls back to
/// box rejection. Coverage is heuristic, not uniform.
pub fn sample_members(
    q: &DataQmi,
    count: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<Vec<(Mat, Mat)>, InformativityError> {
    let n = q.state_dim();
    let m = q.input_dim();
    let r = q.excitation_gramian();
    let r_min = linalg::min_eig(&r)?;
    let definite = r_min > 1e-10 * (1.0 + linalg::spectral_norm(&r)?);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let tol = 1e-9;

    if definite {
        let r_inv_sqrt = psd_power(&r, -0.5)?;
        let center = q.n12().matmul(&linalg::spd_inverse(&r)?.to_mat());
        let c_sqrt = psd_power(&q.consistency_schur()?, 0.5)?;
        for _ in 0..max_attempts {
            if out.len() >= count {
                break;
            }
            let mut z = Mat::zeros(n, n + m);
            for i in 0..n {
                for j in 0..(n + m) {
                    z[(i, j)] = rng.gen_range(-1.0..1.0);
                }
            }
            let znorm = linalg::max_eig(&SymMatrix::from_mat(&z.matmul(&z.transpose())))?
                .max(0.0)
                .sqrt();
            if znorm == 0.0 {
                continue;
            }
            let radius: f64 = rng.gen_range(0.0..1.0_f64).powf(0.25) * 0.9999;
            let s = center.add(
                &c_sqrt
                    .to_mat()
                    .matmul(&z.scale(radius / znorm))
                    .matmul(&r_inv_sqrt.to_mat()),
            );
            let (a, b) = split_system(&s, n, m);
            if membership(&a, &b, q, tol)? {
                out.push((a, b));
            }
        }
        return Ok(out);
    }

    let half_width = 10.0 * q.scale();
    for _ in 0..max_attempts {
        if out.len() >= count {
            break;
        }
        let mut s = Mat::zeros(n, n + m);
        for i in 0..n {
            for j in 0..(n + m) {
                s[(i, j)] = rng.gen_range(-1.0..1.0) * half_width;
            }
        }
        let (a, b) = split_system(&s, n, m);
        if membership(&a, &b, q, tol)? {
            out.push((a, b));
        }
    }
    Ok(out)
}

fn split_system(s: &Mat, n: usize, m: usize) -> (Mat, Mat) {
    let mut a = Mat::zeros(n, n);
    let mut b = Mat::zeros(n, m);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = s[(i, j)];
        }
        for j in 0..m {
            b[(i, j)] = s[(i, n + j)];
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseBudget;
    use crate::signals::{gramian_cont, gramian_disc, paper_example_signals, sample};

    fn benchmark_cont(h: f64) -> DataQmi {
        let (traj, _) = paper_example_signals(h).unwrap();
        let g = gramian_cont(&traj);
        let b = NoiseBudget::continuous(SymMatrix::scaled_identity(1, 1.0), 1.0).unwrap();
        DataQmi::assemble(&g, &b).unwrap()
    }

    fn benchmark_sampled(delta: f64) -> DataQmi {
        // materialize the closed forms directly on the δ-grid: decimation
        // then uses exact values regardless of any finer measurement grid
        let (traj, _) = paper_example_signals(delta).unwrap();
        let g = gramian_disc(&sample(&traj, delta).unwrap());
        let b = NoiseBudget::discrete(SymMatrix::scaled_identity(1, 1.0), 1.0, delta).unwrap();
        DataQmi::assemble(&g, &b).unwrap()
    }

    #[test]
    fn assemble_zero_gramian() {
        let z = crate::signals::GriddedSignal::zero(1, 0.25, 1.0).unwrap();
        let traj = crate::signals::TrajectoryData::new(z.clone(), z.clone(), z).unwrap();
        let g = gramian_cont(&traj);
        let b = NoiseBudget::continuous(SymMatrix::identity(1), 1.0).unwrap();
        let q = DataQmi::assemble(&g, &b).unwrap();
        assert_eq!(q.matrix().get(0, 0), 1.0);
        for (i, j) in [(0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
            assert_eq!(q.matrix().get(i, j), 0.0);
        }
    }

    #[test]
    fn assemble_rejects_kind_mismatch() {
        let (traj, _) = paper_example_signals(0.25).unwrap();
        let g = gramian_cont(&traj);
        let b = NoiseBudget::discrete(SymMatrix::identity(1), 1.0, 0.25).unwrap();
        assert!(matches!(
            DataQmi::assemble(&g, &b),
            Err(InformativityError::Provenance(_))
        ));
    }

    #[test]
    fn benchmark_matrix_matches_reference() {
        let q = benchmark_cont(1e-4);
        let reference = [
            [-0.154, -0.500, -0.995],
            [-0.500, -0.422, -0.595],
            [-0.995, -0.595, -1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (q.matrix().get(i, j) - reference[i][j]).abs() < 2e-3,
                    "entry ({i},{j}) = {}",
                    q.matrix().get(i, j)
                );
            }
        }
    }

    #[test]
    fn membership_of_origin_tracks_leading_block() {
        for (delta, expect) in [(0.5, true), (0.25, true), (0.125, true), (0.0625, false)] {
            let q = benchmark_sampled(delta);
            let a = Mat::from_rows(1, 1, &[0.0]);
            let b = Mat::from_rows(1, 1, &[0.0]);
            let inside = membership(&a, &b, &q, 1e-9).unwrap();
            assert_eq!(inside, expect, "delta = {delta}");
            assert_eq!(
                inside,
                linalg::is_psd(&q.n11(), 1e-9).unwrap(),
                "origin membership must equal N11 ⪰ 0"
            );
        }
    }

    #[test]
    fn membership_of_true_system() {
        let q = benchmark_cont(1e-4);
        let form = membership_form_scalar(-1.0, 0.1, &q);
        // the residual of the true system is exactly the noise, so the form
        // equals Q − ∫w² = 1/3
        assert!((form - 1.0 / 3.0).abs() < 1e-5, "form = {form}");
        assert!(membership(
            &Mat::from_rows(1, 1, &[-1.0]),
            &Mat::from_rows(1, 1, &[0.1]),
            &q,
            1e-9
        )
        .unwrap());
    }

    #[test]
    fn indistinguishable_system_separates_models() {
        let q_cont = benchmark_cont(1e-4);
        assert!((membership_form_scalar(4.35, -3.0, &q_cont) - 0.00242).abs() < 5e-4);
        for delta in [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625] {
            let q = benchmark_sampled(delta);
            assert!(
                membership_form_scalar(4.35, -3.0, &q) < 0.0,
                "delta = {delta}"
            );
        }
    }

    #[test]
    fn paper_triple_passes_certificate_check() {
        let q = benchmark_cont(1e-4);
        let p = SymMatrix::scaled_identity(1, 0.5);
        let k = Mat::from_rows(1, 1, &[2.0]);
        let check = check_certificate(&q, &p, &k, 0.1).unwrap();
        assert!(check.holds, "residual {}", check.lmi_min_eig);
        assert!((check.lmi_min_eig - 0.0486).abs() < 2e-3);
    }

    #[test]
    fn oversized_beta_fails_certificate_check() {
        let q = benchmark_cont(1e-4);
        let p = SymMatrix::scaled_identity(1, 0.5);
        let k = Mat::from_rows(1, 1, &[2.0]);
        assert!(!check_certificate(&q, &p, &k, 10.0).unwrap().holds);
    }

    #[test]
    fn zero_data_zero_budget_never_certifies() {
        let z = crate::signals::GriddedSignal::zero(1, 0.25, 1.0).unwrap();
        let traj = crate::signals::TrajectoryData::new(z.clone(), z.clone(), z).unwrap();
        let g = gramian_cont(&traj);
        let b = NoiseBudget::continuous(SymMatrix::zeros(1), 1.0).unwrap();
        let q = DataQmi::assemble(&g, &b).unwrap();
        let p = SymMatrix::scaled_identity(1, 1.0);
        let k = Mat::from_rows(1, 1, &[0.0]);
        assert!(!check_certificate(&q, &p, &k, 0.5).unwrap().holds);
    }

    #[test]
    fn continuous_benchmark_is_informative() {
        let q = benchmark_cont(1e-4);
        let verdict = synthesize(&q).unwrap();
        let cert = verdict.certificate().expect("expected informative");
        assert_eq!(cert.theorem, Theorem::ContinuousData);
        let check = check_certificate(&q, &cert.p, &cert.k, cert.beta).unwrap();
        assert!(check.holds);
        // closed loop of the true system
        assert!(-1.0 + 0.1 * cert.k[(0, 0)] < 0.0);
    }

    #[test]
    fn sampled_verdicts_split_at_one_sixteenth() {
        for delta in [0.5, 0.25, 0.125] {
            let verdict = synthesize(&benchmark_sampled(delta)).unwrap();
            assert!(
                matches!(verdict, SynthesisVerdict::NotInformative { .. }),
                "delta = {delta}: {verdict:?}"
            );
        }
        for delta in [0.0625, 0.03125, 0.015625] {
            let verdict = synthesize(&benchmark_sampled(delta)).unwrap();
            let cert = verdict.certificate().unwrap_or_else(|| panic!("delta = {delta}"));
            assert!(check_certificate(&benchmark_sampled(delta), &cert.p, &cert.k, cert.beta)
                .unwrap()
                .holds);
        }
    }

    #[test]
    fn margin_matches_reference_interval() {
        let q = benchmark_cont(1e-4);
        let verdict = maximize_beta(&q).unwrap();
        let report = verdict.report().expect("feasible");
        let ratio = report.beta_hat / 16.0;
        assert!(
            (0.0090..=0.0102).contains(&ratio),
            "β̂/16 = {ratio} (β̂ = {})",
            report.beta_hat
        );
        assert!(!report.trace_cap_active);
        // β̂ dominates the feasibility-only margin
        let cert = synthesize(&q).unwrap();
        assert!(report.beta_hat >= cert.certificate().unwrap().beta - 1e-9);
    }

    #[test]
    fn margin_grows_when_budget_shrinks() {
        let (traj, _) = paper_example_signals(1e-3).unwrap();
        let g = gramian_cont(&traj);
        let b1 = NoiseBudget::continuous(SymMatrix::scaled_identity(1, 1.0), 1.0).unwrap();
        let b0 = NoiseBudget::continuous(SymMatrix::scaled_identity(1, 0.7), 1.0).unwrap();
        let beta1 = maximize_beta(&DataQmi::assemble(&g, &b1).unwrap())
            .unwrap()
            .report()
            .unwrap()
            .beta_hat;
        let beta0 = maximize_beta(&DataQmi::assemble(&g, &b0).unwrap())
            .unwrap()
            .report()
            .unwrap()
            .beta_hat;
        assert!(beta0 > beta1, "smaller budget must not shrink the margin");
    }

    #[test]
    fn margin_rejects_sets_containing_origin() {
        let q = benchmark_sampled(0.5);
        assert!(matches!(
            maximize_beta(&q).unwrap(),
            MarginVerdict::NotInformative { .. }
        ));
    }

    #[test]
    fn sufficiency_certified_at_the_finest_stepsize() {
        let q = benchmark_sampled(1.0 / 64.0);
        let reg = RegularityCertificate::assumed_square_lipschitz(16.0);
        let verdict = sampled_sufficient(&q, &reg).unwrap();
        let cert = verdict.certificate().expect("certified");
        assert_eq!(cert.theorem, Theorem::SampledSufficient);
        assert!(cert.beta > 0.125, "β = {}", cert.beta);
        assert!(-1.0 + 0.1 * cert.k[(0, 0)] < 0.0);
    }

    #[test]
    fn sufficiency_insufficient_at_coarse_stepsize() {
        let q = benchmark_sampled(0.0625);
        let reg = RegularityCertificate::assumed_square_lipschitz(16.0);
        // floor ½·(1/16)·16 = 0.5 exceeds any attainable margin (β̂ ≤ 0.068)
        let beta_hat = maximize_beta(&q).unwrap().report().unwrap().beta_hat;
        assert!(beta_hat < 0.5);
        assert!(matches!(
            sampled_sufficient(&q, &reg).unwrap(),
            SufficiencyVerdict::Insufficient { .. }
        ));
    }

    #[test]
    fn sufficiency_with_zero_constant_reduces_to_synthesis() {
        let q = benchmark_sampled(1.0 / 64.0);
        let reg = RegularityCertificate::assumed_square_lipschitz(0.0);
        let suff = sampled_sufficient(&q, &reg).unwrap();
        let plain = synthesize(&q).unwrap();
        let (c1, c2) = (suff.certificate().unwrap(), plain.certificate().unwrap());
        assert!((c1.beta - c2.beta).abs() <= 1e-6 * (1.0 + c1.beta.abs()));
    }

    #[test]
    fn sufficiency_rejects_grid_estimates() {
        let q = benchmark_sampled(1.0 / 64.0);
        let (_, w) = paper_example_signals(1e-3).unwrap();
        let est = crate::noise::estimate_square_lipschitz(&w);
        assert!(matches!(
            sampled_sufficient(&q, &est),
            Err(InformativityError::InvalidArgument(_))
        ));
    }

    #[test]
    fn stepsize_bound_formula() {
        let q = benchmark_cont(1e-4);
        let report = maximize_beta(&q).unwrap();
        let report = report.report().unwrap();
        let bound = stepsize_bound(report, 1.0, 16.0);
        assert!((0.0090..=0.0102).contains(&bound), "δ_max = {bound}");
        assert_eq!(stepsize_bound(report, 1.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn coarsening_from_the_finest_stepsize() {
        let delta = 1.0 / 64.0;
        let q = benchmark_sampled(delta);
        let report = maximize_beta(&q).unwrap();
        let report = report.report().unwrap();
        let ell = coarsening_bound(report, 1.0, 16.0).unwrap();
        assert_eq!(ell, 1, "2β̂/(δTL) = {}", 2.0 * report.beta_hat / (delta * 16.0));
        // the coarsened data must stay informative
        let gamma = (ell + 1) as f64 * delta;
        let verdict = synthesize(&benchmark_sampled(gamma)).unwrap();
        assert!(verdict.certificate().is_some());
    }

    #[test]
    fn coarsening_requires_sampled_provenance() {
        let q = benchmark_cont(1e-3);
        let report = maximize_beta(&q).unwrap();
        assert!(matches!(
            coarsening_bound(report.report().unwrap(), 1.0, 16.0),
            Err(InformativityError::Provenance(_))
        ));
    }

    #[test]
    fn lambda_certificate_on_benchmark() {
        let q = benchmark_cont(1e-3);
        let exc = q.excitation_gramian();
        assert!((exc.get(0, 0) - 0.422).abs() < 2e-3);
        assert!((exc.get(0, 1) - 0.595).abs() < 2e-3);
        assert!((exc.get(1, 1) - 1.0).abs() < 2e-3);
        let det = exc.get(0, 0) * exc.get(1, 1) - exc.get(0, 1) * exc.get(0, 1);
        assert!((det - 0.068).abs() < 2e-3);

        let LambdaVerdict::Certified(cert) = certify_lambda(&q).unwrap() else {
            panic!("expected certificate");
        };
        assert!(cert.lambda >= 1.0);
        assert!(cert.alpha >= 0.0);
        // every sampled member satisfies a² + b² ≤ λ − 1
        let members = sample_members(&q, 200, 7, 400_000).unwrap();
        assert_eq!(members.len(), 200);
        for (a, b) in &members {
            let norm2 = a[(0, 0)] * a[(0, 0)] + b[(0, 0)] * b[(0, 0)];
            assert!(
                norm2 <= cert.lambda - 1.0 + 1e-6,
                "member ({}, {}) violates the λ bound {}",
                a[(0, 0)],
                b[(0, 0)],
                cert.lambda
            );
        }
    }

    #[test]
    fn lambda_needs_excitation() {
        let z = crate::signals::GriddedSignal::zero(1, 0.25, 1.0).unwrap();
        let traj = crate::signals::TrajectoryData::new(z.clone(), z.clone(), z).unwrap();
        let g = gramian_cont(&traj);
        let b = NoiseBudget::continuous(SymMatrix::identity(1), 1.0).unwrap();
        let q = DataQmi::assemble(&g, &b).unwrap();
        assert!(matches!(
            certify_lambda(&q).unwrap(),
            LambdaVerdict::NoExcitation { .. }
        ));
    }

    #[test]
    fn lyapunov_check_basics() {
        let p = SymMatrix::identity(2);
        let stable = lyapunov_check(
            &Mat::from_rows(2, 2, &[-1.0, 0.0, 0.0, -1.0]),
            &Mat::zeros(2, 1),
            &Mat::zeros(1, 2),
            &p,
        )
        .unwrap();
        assert!(stable);
        let zero = lyapunov_check(&Mat::zeros(2, 2), &Mat::zeros(2, 1), &Mat::zeros(1, 2), &p)
            .unwrap();
        assert!(!zero);
        assert!(lyapunov_check(
            &Mat::zeros(1, 1),
            &Mat::zeros(1, 1),
            &Mat::zeros(1, 1),
            &SymMatrix::diag(&[-1.0])
        )
        .is_err());
    }

    #[test]
    fn region_scan_trivial_budget() {
        let z = crate::signals::GriddedSignal::zero(1, 0.25, 1.0).unwrap();
        let traj = crate::signals::TrajectoryData::new(z.clone(), z.clone(), z).unwrap();
        let g = gramian_cont(&traj);
        let b = NoiseBudget::continuous(SymMatrix::identity(1), 1.0).unwrap();
        let q = DataQmi::assemble(&g, &b).unwrap();
        let grid = region_scan(&q, (-2.0, 2.0), (-2.0, 2.0), (5, 5), 1e-9, 1).unwrap();
        assert!(grid.inside.iter().all(|&v| v), "form ≡ 1 ⪰ 0 everywhere");
    }

    #[test]
    fn region_scan_marks_true_system() {
        let q = benchmark_cont(1e-3);
        let grid = region_scan(&q, (-1.0, -1.0), (0.1, 0.1), (1, 1), 1e-9, 1).unwrap();
        assert_eq!(grid.inside.len(), 1);
        assert!(grid.at(0, 0));
    }

    #[test]
    fn region_scan_parallel_agrees_with_serial() {
        let q = benchmark_cont(1e-3);
        let serial = region_scan(&q, (-6.0, 6.0), (-6.0, 6.0), (41, 41), 1e-9, 1).unwrap();
        let parallel = region_scan(&q, (-6.0, 6.0), (-6.0, 6.0), (41, 41), 1e-9, 4).unwrap();
        assert_eq!(serial.inside, parallel.inside);
    }

    #[test]
    fn certificates_stabilize_sampled_members() {
        let q = benchmark_cont(1e-3);
        let cert = synthesize(&q).unwrap();
        let cert = cert.certificate().unwrap();
        let members = sample_members(&q, 200, 42, 400_000).unwrap();
        assert_eq!(members.len(), 200);
        for (a, b) in &members {
            assert!(
                lyapunov_check(a, b, &cert.k, &cert.p).unwrap(),
                "member ({}, {}) not stabilized",
                a[(0, 0)],
                b[(0, 0)]
            );
        }
    }
}
