//! The published scalar benchmark: `ẋ = −x + u/10 + w` on `[0, 1]` with
//! `x(0) = 1`, `u ≡ 1`, unit noise budget and the piecewise-linear noise of
//! [`crate::signals::paper_example_signals`] (16-square Lipschitz, noise
//! energy 2/3). Reference data matrices are reproduced here to the three
//! decimals they were published with; `reproduce` reruns the whole pipeline
//! and compares every number, which is what the `reproduce-paper` CLI
//! command prints.

use crate::informativity::{
    check_certificate, maximize_beta, membership_form_scalar, sampled_sufficient, synthesize,
    CertificateCheck, DataQmi, InformativityError, MarginVerdict, SufficiencyVerdict,
    SynthesisVerdict,
};
use crate::linalg::{Mat, SymMatrix};
use crate::noise::{
    discrete_noise_matrix, integral_noise_matrix, NoiseBudget, RegularityCertificate,
};
use crate::signals::{gramian_cont, gramian_disc, paper_example_signals, sample};
use std::time::{Duration, Instant};

pub const HORIZON: f64 = 1.0;
/// Square-Lipschitz constant of the benchmark noise (`sup |d(w²)/dt| = 16`).
pub const LIPSCHITZ: f64 = 16.0;
/// Scalar noise budget `∫ w² dt ≤ 1`.
pub const BUDGET: f64 = 1.0;
/// Exact noise energy `∫ w² dt = 2/3`.
pub const NOISE_ENERGY: f64 = 2.0 / 3.0;
pub const TRUE_SYSTEM: (f64, f64) = (-1.0, 0.1);
/// A system indistinguishable from the true one on the continuous data but
/// inconsistent with every sampled version of it.
pub const INDISTINGUISHABLE_SYSTEM: (f64, f64) = (4.35, -3.0);
/// Default reproduction grid; fine enough for three-decimal agreement with
/// the reference matrices, with margin.
pub const DEFAULT_GRID_STEP: f64 = 1e-4;
/// The reference matrices are printed to three decimals.
pub const MATRIX_TOL: f64 = 2e-3;

/// Reference continuous data matrix for unit budget.
pub const REFERENCE_N_CONT: [[f64; 3]; 3] = [
    [-0.154, -0.500, -0.995],
    [-0.500, -0.422, -0.595],
    [-0.995, -0.595, -1.0],
];

/// The six benchmark stepsizes `2⁻¹ … 2⁻⁶`.
pub const STEPSIZES: [f64; 6] = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];

/// Reference sampled data matrices for unit budget, one per stepsize.
pub const REFERENCE_N_DELTA: [[[f64; 3]; 3]; 6] = [
    [[0.446, -0.626, -0.723], [-0.626, -0.709, -0.823], [-0.723, -0.823, -1.0]],
    [[0.171, -0.588, -0.864], [-0.588, -0.557, -0.714], [-0.864, -0.714, -1.0]],
    [[0.0152, -0.550, -0.931], [-0.550, -0.487, -0.656], [-0.931, -0.656, -1.0]],
    [[-0.068, -0.526, -0.963], [-0.526, -0.454, -0.626], [-0.963, -0.626, -1.0]],
    [[-0.111, -0.514, -0.979], [-0.514, -0.438, -0.610], [-0.979, -0.610, -1.0]],
    [[-0.132, -0.507, -0.987], [-0.507, -0.430, -0.603], [-0.987, -0.603, -1.0]],
];

/// Whether the sampled consistency set contains the origin at each reference
/// stepsize (equivalently, whether the leading entry of the sampled data
/// matrix is nonnegative), which rules out informativity.
pub const ORIGIN_CONSISTENT: [bool; 6] = [true, true, true, false, false, false];

/// Expected sampled-data verdicts at the reference stepsizes.
pub const INFORMATIVE: [bool; 6] = [false, false, false, true, true, true];

/// Reference interval for `β̂/(T·L)`, the admissible-stepsize bound.
pub const STEPSIZE_BOUND_RANGE: (f64, f64) = (0.0090, 0.0102);

/// Sufficiency floor at the finest stepsize: `½·(1/64)·1·16`.
pub const SUFFICIENCY_FLOOR: f64 = 0.125;

pub fn scalar_budget_continuous() -> NoiseBudget {
    NoiseBudget::continuous(SymMatrix::scaled_identity(1, BUDGET), HORIZON)
        .expect("unit budget is valid")
}

pub fn scalar_budget_sampled(delta: f64) -> NoiseBudget {
    NoiseBudget::discrete(SymMatrix::scaled_identity(1, BUDGET), HORIZON, delta)
        .expect("unit budget is valid")
}

/// Continuous-data consistency matrix at grid step `h`.
pub fn continuous_qmi(h: f64) -> Result<DataQmi, InformativityError> {
    let (traj, _) = paper_example_signals(h)
        .map_err(|e| InformativityError::InvalidArgument(e.to_string()))?;
    DataQmi::assemble(&gramian_cont(&traj), &scalar_budget_continuous())
}

/// Sampled-data consistency matrix at stepsize δ. The closed forms are
/// materialized directly on the δ-grid, so the sample columns are exact
/// regardless of any measurement grid.
pub fn sampled_qmi(delta: f64) -> Result<DataQmi, InformativityError> {
    let (traj, _) = paper_example_signals(delta)
        .map_err(|e| InformativityError::InvalidArgument(e.to_string()))?;
    let sampled =
        sample(&traj, delta).map_err(|e| InformativityError::InvalidArgument(e.to_string()))?;
    DataQmi::assemble(&gramian_disc(&sampled), &scalar_budget_sampled(delta))
}

pub fn max_deviation(computed: &SymMatrix, reference: &[[f64; 3]; 3]) -> f64 {
    let mut dev = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            dev = dev.max((computed.get(i, j) - reference[i][j]).abs());
        }
    }
    dev
}

/// Endpoint-robustness regression: three step noises on `[0, 3]` that agree
/// except at the endpoints of the step interval. Any grid avoiding `t = 1`
/// and `t = 2` materializes them identically (the integral cannot see
/// measure-zero sets), while the samples at `t = 0, 1, 2` give `W Wᵀ`
/// values 0, 1 and 2.
#[derive(Debug, Clone, Copy)]
pub struct EndpointRegression {
    pub integrals: [f64; 3],
    pub max_integral_spread: f64,
    pub discrete: [f64; 3],
}

pub fn endpoint_regression() -> EndpointRegression {
    let supports: [fn(f64) -> bool; 3] = [
        |t| t > 1.0 && t < 2.0,
        |t| t > 1.0 && t <= 2.0,
        |t| (1.0..=2.0).contains(&t),
    ];
    // 3/1000 keeps every grid multiple off the integers 1 and 2
    let h = 3.0 / 1000.0;
    let mut integrals = [0.0; 3];
    let mut discrete = [0.0; 3];
    for (idx, on) in supports.iter().enumerate() {
        let w = crate::signals::GriddedSignal::from_fn(1, h, 3.0, |t, out| {
            out[0] = if on(t) { 1.0 } else { 0.0 };
        })
        .expect("valid grid");
        integrals[idx] = integral_noise_matrix(&w).get(0, 0);
        let cols: Vec<Vec<f64>> =
            [0.0, 1.0, 2.0].iter().map(|&t| vec![if on(t) { 1.0 } else { 0.0 }]).collect();
        discrete[idx] = discrete_noise_matrix(&Mat::from_columns(&cols), 1.0).get(0, 0);
    }
    let mut spread = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            spread = spread.max((integrals[i] - integrals[j]).abs());
        }
    }
    EndpointRegression { integrals, max_integral_spread: spread, discrete }
}

#[derive(Debug)]
pub struct DeltaReproduction {
    pub delta: f64,
    pub matrix: SymMatrix,
    pub max_deviation: f64,
    pub origin_member: bool,
    pub informative: Option<bool>,
    pub beta_hat: Option<f64>,
    pub indistinguishable_member: bool,
}

#[derive(Debug)]
pub struct ReproduceReport {
    pub grid_step: f64,
    pub n_cont: SymMatrix,
    pub n_cont_deviation: f64,
    pub n_cont_elapsed: Duration,
    pub noise_energy: f64,
    pub continuous_informative: Option<bool>,
    pub reference_triple: CertificateCheck,
    pub beta_hat: f64,
    pub stepsize_bound: f64,
    pub indistinguishable_in_cont: bool,
    pub per_delta: Vec<DeltaReproduction>,
    pub sufficiency_beta: Option<f64>,
    pub sufficiency_closed_loop: Option<f64>,
    pub endpoint: EndpointRegression,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct Criterion {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn verdict_flag(v: &SynthesisVerdict) -> Option<bool> {
    match v {
        SynthesisVerdict::Informative(_) => Some(true),
        SynthesisVerdict::NotInformative { .. } => Some(false),
        SynthesisVerdict::Indeterminate { .. } => None,
    }
}

/// Rerun the benchmark pipeline end to end at grid step `h` and collect
/// every comparison against the reference values.
pub fn reproduce(h: f64) -> Result<ReproduceReport, InformativityError> {
    let started = Instant::now();

    let cont_start = Instant::now();
    let q_cont = continuous_qmi(h)?;
    let n_cont_elapsed = cont_start.elapsed();
    let n_cont = q_cont.matrix().clone();
    let n_cont_deviation = max_deviation(&n_cont, &REFERENCE_N_CONT);

    let (_, w) = paper_example_signals(h)
        .map_err(|e| InformativityError::InvalidArgument(e.to_string()))?;
    let noise_energy = integral_noise_matrix(&w).get(0, 0);

    let continuous_verdict = synthesize(&q_cont)?;
    let reference_triple = check_certificate(
        &q_cont,
        &SymMatrix::scaled_identity(1, 0.5),
        &Mat::from_rows(1, 1, &[2.0]),
        0.1,
    )?;

    let beta_hat = match maximize_beta(&q_cont)? {
        MarginVerdict::Feasible(r) => r.beta_hat,
        _ => f64::NAN,
    };
    let stepsize_bound = beta_hat / (HORIZON * LIPSCHITZ);
    let indistinguishable_in_cont = membership_form_scalar(
        INDISTINGUISHABLE_SYSTEM.0,
        INDISTINGUISHABLE_SYSTEM.1,
        &q_cont,
    ) >= 0.0;

    let mut per_delta = Vec::with_capacity(STEPSIZES.len());
    for (idx, &delta) in STEPSIZES.iter().enumerate() {
        let q = sampled_qmi(delta)?;
        let matrix = q.matrix().clone();
        let max_dev = max_deviation(&matrix, &REFERENCE_N_DELTA[idx]);
        let origin_member = membership_form_scalar(0.0, 0.0, &q) >= 0.0;
        let verdict = synthesize(&q)?;
        let beta = match maximize_beta(&q)? {
            MarginVerdict::Feasible(r) => Some(r.beta_hat),
            _ => None,
        };
        let indist = membership_form_scalar(
            INDISTINGUISHABLE_SYSTEM.0,
            INDISTINGUISHABLE_SYSTEM.1,
            &q,
        ) >= 0.0;
        per_delta.push(DeltaReproduction {
            delta,
            matrix,
            max_deviation: max_dev,
            origin_member,
            informative: verdict_flag(&verdict),
            beta_hat: beta,
            indistinguishable_member: indist,
        });
    }

    // sampled-data sufficiency at the finest reference stepsize
    let finest = *STEPSIZES.last().unwrap();
    let reg = RegularityCertificate::assumed_square_lipschitz(LIPSCHITZ);
    let (sufficiency_beta, sufficiency_closed_loop) =
        match sampled_sufficient(&sampled_qmi(finest)?, &reg)? {
            SufficiencyVerdict::Certified(cert) => {
                let closed_loop = TRUE_SYSTEM.0 + TRUE_SYSTEM.1 * cert.k[(0, 0)];
                (Some(cert.beta), Some(closed_loop))
            }
            _ => (None, None),
        };

    let endpoint = endpoint_regression();

    Ok(ReproduceReport {
        grid_step: h,
        n_cont,
        n_cont_deviation,
        n_cont_elapsed,
        noise_energy,
        continuous_informative: verdict_flag(&continuous_verdict),
        reference_triple,
        beta_hat,
        stepsize_bound,
        indistinguishable_in_cont,
        per_delta,
        sufficiency_beta,
        sufficiency_closed_loop,
        endpoint,
        elapsed: started.elapsed(),
    })
}

impl ReproduceReport {
    /// Pass/fail breakdown, one entry per reproduction criterion.
    /// `matrix_tol` is the comparison tolerance against the printed
    /// reference matrices (they carry three decimals, so 2e-3 by default).
    pub fn criteria(&self, matrix_tol: f64) -> Vec<Criterion> {
        let mut out = Vec::new();
        out.push(Criterion {
            name: "continuous data matrix within 2e-3 of reference, under 1 s",
            pass: self.n_cont_deviation <= matrix_tol
                && self.n_cont_elapsed < Duration::from_secs(1),
            detail: format!(
                "max deviation {:.2e}, elapsed {:?}",
                self.n_cont_deviation, self.n_cont_elapsed
            ),
        });
        let worst_delta =
            self.per_delta.iter().map(|d| d.max_deviation).fold(0.0_f64, f64::max);
        out.push(Criterion {
            name: "all six sampled matrices within 2e-3 of reference",
            pass: worst_delta <= matrix_tol,
            detail: format!("worst deviation {worst_delta:.2e}"),
        });
        out.push(Criterion {
            name: "continuous data informative; (P, K, β) = (1/2, 2, 1/10) certifies",
            pass: self.continuous_informative == Some(true) && self.reference_triple.holds,
            detail: format!(
                "verdict {:?}, triple residual {:.4e}",
                self.continuous_informative, self.reference_triple.lmi_min_eig
            ),
        });
        let verdicts_ok = self
            .per_delta
            .iter()
            .zip(INFORMATIVE)
            .all(|(d, expect)| d.informative == Some(expect));
        out.push(Criterion {
            name: "sampled verdicts split: not informative above 1/16, informative from 1/16",
            pass: verdicts_ok,
            detail: self
                .per_delta
                .iter()
                .map(|d| format!("δ={}: {:?}", d.delta, d.informative))
                .collect::<Vec<_>>()
                .join(", "),
        });
        let suff_ok = match (self.sufficiency_beta, self.sufficiency_closed_loop) {
            (Some(beta), Some(cl)) => beta > SUFFICIENCY_FLOOR && cl < 0.0,
            _ => false,
        };
        out.push(Criterion {
            name: "sampled-data sufficiency at δ = 1/64: β > 0.125 and true plant stabilized",
            pass: suff_ok,
            detail: format!(
                "β = {:?}, closed loop {:?}",
                self.sufficiency_beta, self.sufficiency_closed_loop
            ),
        });
        let in_range = self.stepsize_bound >= STEPSIZE_BOUND_RANGE.0
            && self.stepsize_bound <= STEPSIZE_BOUND_RANGE.1;
        out.push(Criterion {
            name: "stepsize bound β̂/16 within the reference interval",
            pass: in_range,
            detail: format!("β̂ = {:.6}, bound {:.6}", self.beta_hat, self.stepsize_bound),
        });
        let origin_ok = self
            .per_delta
            .iter()
            .zip(ORIGIN_CONSISTENT)
            .all(|(d, expect)| d.origin_member == expect);
        let indist_ok = self.indistinguishable_in_cont
            && self.per_delta.iter().all(|d| !d.indistinguishable_member);
        out.push(Criterion {
            name: "membership geometry of (0,0) and (4.35, -3)",
            pass: origin_ok && indist_ok,
            detail: format!(
                "origin per δ: {:?}; (4.35,-3) in continuous set: {}, in sampled sets: {:?}",
                self.per_delta.iter().map(|d| d.origin_member).collect::<Vec<_>>(),
                self.indistinguishable_in_cont,
                self.per_delta
                    .iter()
                    .map(|d| d.indistinguishable_member)
                    .collect::<Vec<_>>()
            ),
        });
        let ep = &self.endpoint;
        let endpoint_ok = ep.max_integral_spread <= 1e-6
            && ep.discrete[0] == 0.0
            && (ep.discrete[1] - 1.0).abs() < 1e-12
            && (ep.discrete[2] - 2.0).abs() < 1e-12;
        out.push(Criterion {
            name: "endpoint-differing step noises: equal integrals, samples 0/1/2",
            pass: endpoint_ok,
            detail: format!(
                "integral spread {:.2e}, discrete {:?}",
                ep.max_integral_spread, ep.discrete
            ),
        });
        out.push(Criterion {
            name: "noise energy 2/3 within 1e-6",
            pass: (self.noise_energy - NOISE_ENERGY).abs() <= 1e-6,
            detail: format!("energy {:.9}", self.noise_energy),
        });
        out.push(Criterion {
            name: "full reproduction under 60 s",
            pass: self.elapsed < Duration::from_secs(60),
            detail: format!("elapsed {:?}", self.elapsed),
        });
        out
    }

    pub fn all_pass(&self, matrix_tol: f64) -> bool {
        self.criteria(matrix_tol).iter().all(|c| c.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_regression_values() {
        let ep = endpoint_regression();
        assert_eq!(ep.max_integral_spread, 0.0);
        assert_eq!(ep.discrete, [0.0, 1.0, 2.0]);
        for v in ep.integrals {
            assert!((v - 1.0).abs() < 5e-3, "integral {v}");
        }
    }

    #[test]
    fn reference_constants_are_symmetric() {
        for m in REFERENCE_N_DELTA.iter().chain([&REFERENCE_N_CONT]) {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(m[i][j], m[j][i]);
                }
            }
        }
    }

    #[test]
    fn reproduction_at_coarse_grid_still_passes_matrices() {
        // h = 1e-3 loses a little quadrature accuracy but stays within the
        // print tolerance of the reference values
        let q = continuous_qmi(1e-3).unwrap();
        assert!(max_deviation(q.matrix(), &REFERENCE_N_CONT) < MATRIX_TOL);
    }
}
