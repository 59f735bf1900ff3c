//! Noise models and regularity certificates.
//!
//! A noise budget is a PSD matrix `Q` bounding either the integral
//! `∫₀ᵀ wwᵀ dt ⪯ Q` of the disturbance or its sampled counterpart
//! `δ WδWδᵀ ⪯ Q`. Changing `w` on a measure-zero set leaves the integral
//! untouched but can change individual samples, so the two models are
//! incomparable in general; regularity certificates (square Lipschitzness of
//! `t ↦ w(t)w(t)ᵀ`, or bounded total square variation) quantify how far the
//! two sides can drift apart and drive every continuous↔discrete bound in
//! this crate.
//!
//! Grid-based estimators deliberately yield *lower* bounds of the true
//! regularity constants and are labeled as such: downstream margin floors
//! are vacuous with an underestimated constant, so certificates record their
//! provenance and assumed constants are never silently replaced by
//! estimates.

use crate::linalg::{self, Mat, SymMatrix};
use crate::signals::GriddedSignal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("incompatible stepsizes: {0}")]
    Stepsize(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetKind {
    /// Bound on `∫₀ᵀ wwᵀ dt`.
    ContinuousIntegral,
    /// Bound on `δ WδWδᵀ` at stepsize δ.
    Discrete { delta: f64 },
}

/// PSD bound on the disturbance energy over a horizon.
#[derive(Debug, Clone)]
pub struct NoiseBudget {
    q: SymMatrix,
    horizon: f64,
    kind: BudgetKind,
}

impl NoiseBudget {
    pub fn continuous(q: SymMatrix, horizon: f64) -> Result<Self, NoiseError> {
        Self::validate(&q, horizon)?;
        Ok(NoiseBudget { q, horizon, kind: BudgetKind::ContinuousIntegral })
    }

    pub fn discrete(q: SymMatrix, horizon: f64, delta: f64) -> Result<Self, NoiseError> {
        Self::validate(&q, horizon)?;
        if crate::signals::exact_ratio(horizon, delta).is_none() {
            return Err(NoiseError::InvalidBudget(format!(
                "horizon {horizon} is not an integer multiple of stepsize {delta}"
            )));
        }
        Ok(NoiseBudget { q, horizon, kind: BudgetKind::Discrete { delta } })
    }

    fn validate(q: &SymMatrix, horizon: f64) -> Result<(), NoiseError> {
        if !(horizon > 0.0) {
            return Err(NoiseError::InvalidBudget("horizon must be positive".into()));
        }
        if !linalg::is_psd(q, 1e-8).map_err(|e| NoiseError::InvalidBudget(e.to_string()))? {
            return Err(NoiseError::InvalidBudget("Q must be positive semidefinite".into()));
        }
        Ok(())
    }

    pub fn q(&self) -> &SymMatrix {
        &self.q
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kind(&self) -> BudgetKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    /// Reinterpret the same bound under the other model (used after
    /// inflating; the deviation bounds justify the direction switch).
    pub fn with_kind(&self, kind: BudgetKind) -> Result<Self, NoiseError> {
        match kind {
            BudgetKind::ContinuousIntegral => NoiseBudget::continuous(self.q.clone(), self.horizon),
            BudgetKind::Discrete { delta } => {
                NoiseBudget::discrete(self.q.clone(), self.horizon, delta)
            }
        }
    }
}

/// How a regularity constant was obtained. Grid estimates are lower bounds
/// of the true constant; the sampled-data guarantees require upper bounds,
/// i.e. `Assumed`, `Lemma1` or `Lemma5` provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegularitySource {
    Assumed,
    GridEstimate,
    /// `2·L1·L2` from a value bound `‖w‖ ≤ L1` and derivative bound `‖ẇ‖ ≤ L2`.
    Lemma1 { l1: f64, l2: f64 },
    /// Consistency-set scaling `λ·L_base` of a measured-signal constant.
    Lemma5 { lambda: f64, base: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegularityKind {
    /// `‖w(t₁)w(t₁)ᵀ − w(t₂)w(t₂)ᵀ‖ ≤ L·|t₁ − t₂|`.
    SquareLipschitz(f64),
    /// Supremum over partitions of summed increments of `wwᵀ`.
    TotalSquareVariation(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityCertificate {
    pub kind: RegularityKind,
    pub source: RegularitySource,
}

impl RegularityCertificate {
    pub fn assumed_square_lipschitz(l: f64) -> Self {
        assert!(l >= 0.0);
        RegularityCertificate {
            kind: RegularityKind::SquareLipschitz(l),
            source: RegularitySource::Assumed,
        }
    }

    pub fn assumed_total_square_variation(v: f64) -> Self {
        assert!(v >= 0.0);
        RegularityCertificate {
            kind: RegularityKind::TotalSquareVariation(v),
            source: RegularitySource::Assumed,
        }
    }

    pub fn from_value_and_derivative_bounds(l1: f64, l2: f64) -> Self {
        RegularityCertificate {
            kind: RegularityKind::SquareLipschitz(lemma1_constant(l1, l2)),
            source: RegularitySource::Lemma1 { l1, l2 },
        }
    }

    /// Scale the constant by a consistency-set factor λ ≥ 1: if the measured
    /// stacked signal is L-square Lipschitz, every system consistent with
    /// the data has an L·λ-square Lipschitz residual.
    pub fn scaled_by_lambda(&self, lambda: f64) -> Self {
        assert!(lambda >= 1.0);
        let base = self.constant();
        let kind = match self.kind {
            RegularityKind::SquareLipschitz(l) => RegularityKind::SquareLipschitz(lambda * l),
            RegularityKind::TotalSquareVariation(v) => {
                RegularityKind::TotalSquareVariation(lambda * v)
            }
        };
        RegularityCertificate { kind, source: RegularitySource::Lemma5 { lambda, base } }
    }

    pub fn constant(&self) -> f64 {
        match self.kind {
            RegularityKind::SquareLipschitz(l) => l,
            RegularityKind::TotalSquareVariation(v) => v,
        }
    }

    /// Whether the constant is a guaranteed upper bound (as opposed to a
    /// grid-based lower estimate).
    pub fn is_upper_bound(&self) -> bool {
        !matches!(self.source, RegularitySource::GridEstimate)
    }
}

/// Trapezoid quadrature of `∫ wwᵀ dt` on the grid.
pub fn integral_noise_matrix(w: &GriddedSignal) -> SymMatrix {
    let n = w.dim();
    let h = w.step();
    let len = w.len();
    let mut acc = SymMatrix::zeros(n);
    for (k, s) in w.samples().enumerate() {
        let weight = if k == 0 || k == len - 1 { 0.5 * h } else { h };
        acc.add_assign_outer(s, weight);
    }
    acc
}

/// `δ W Wᵀ` for a sample matrix with one column per sampling instant.
pub fn discrete_noise_matrix(w_samples: &Mat, delta: f64) -> SymMatrix {
    assert!(delta > 0.0);
    let n = w_samples.rows();
    let mut acc = SymMatrix::zeros(n);
    for k in 0..w_samples.cols() {
        acc.add_assign_outer(&w_samples.column(k), delta);
    }
    acc
}

/// Lift a pointwise bound `w(t)w(t)ᵀ ⪯ Q̄` (almost everywhere) to the
/// integral budget `Q = T·Q̄`.
pub fn pointwise_to_budget(qbar: &SymMatrix, horizon: f64) -> Result<NoiseBudget, NoiseError> {
    if !linalg::is_psd(qbar, 1e-8).map_err(|e| NoiseError::InvalidBudget(e.to_string()))? {
        return Err(NoiseError::InvalidBudget(
            "pointwise bound must be positive semidefinite".into(),
        ));
    }
    NoiseBudget::continuous(qbar.scale(horizon), horizon)
}

/// Spectral norm of `w₁w₁ᵀ − w₂w₂ᵀ` without forming the n×n matrix: the
/// difference has rank ≤ 2, and its nonzero eigenvalues depend only on
/// ‖w₁‖², ‖w₂‖² and w₁ᵀw₂.
fn square_increment_norm(w1: &[f64], w2: &[f64]) -> f64 {
    let a: f64 = w1.iter().map(|v| v * v).sum();
    let b: f64 = w2.iter().map(|v| v * v).sum();
    let c: f64 = w1.iter().zip(w2).map(|(p, q)| p * q).sum();
    let disc = ((a + b) * (a + b) - 4.0 * c * c).max(0.0);
    0.5 * ((a - b).abs() + disc.sqrt())
}

/// Pairs examined by `estimate_square_lipschitz`: everything for short
/// grids, adjacent plus stride-10 pairs beyond this length (windowing keeps
/// the cost near-linear at the price of a documented approximation).
const FULL_PAIRWISE_LIMIT: usize = 2000;

/// Largest observed difference quotient of `t ↦ w(t)w(t)ᵀ` over grid pairs.
/// This is a lower bound on the true square-Lipschitz constant; the
/// certificate records `GridEstimate` provenance accordingly.
pub fn estimate_square_lipschitz(w: &GriddedSignal) -> RegularityCertificate {
    let len = w.len();
    assert!(len >= 2, "need at least two samples");
    let h = w.step();
    let mut best = 0.0_f64;
    if len <= FULL_PAIRWISE_LIMIT {
        for i in 0..len {
            for j in (i + 1)..len {
                let dt = (j - i) as f64 * h;
                best = best.max(square_increment_norm(w.sample(i), w.sample(j)) / dt);
            }
        }
    } else {
        for i in 0..len - 1 {
            best = best.max(square_increment_norm(w.sample(i), w.sample(i + 1)) / h);
            let j = i + 10;
            if j < len {
                best = best.max(square_increment_norm(w.sample(i), w.sample(j)) / (10.0 * h));
            }
        }
    }
    RegularityCertificate {
        kind: RegularityKind::SquareLipschitz(best),
        source: RegularitySource::GridEstimate,
    }
}

/// Square-Lipschitz constant `2·L1·L2` for a signal bounded by `L1` with
/// derivative bounded by `L2`.
pub fn lemma1_constant(l1: f64, l2: f64) -> f64 {
    assert!(l1 >= 0.0 && l2 >= 0.0);
    2.0 * l1 * l2
}

/// Sum of adjacent increments of `wwᵀ` along the grid: a lower bound of the
/// total square variation (the grid is one particular partition, and the
/// quantity only grows under refinement).
pub fn estimate_total_square_variation(w: &GriddedSignal) -> RegularityCertificate {
    let len = w.len();
    assert!(len >= 2, "need at least two samples");
    let mut acc = 0.0;
    for i in 0..len - 1 {
        acc += square_increment_norm(w.sample(i), w.sample(i + 1));
    }
    RegularityCertificate {
        kind: RegularityKind::TotalSquareVariation(acc),
        source: RegularitySource::GridEstimate,
    }
}

/// Worst-case spectral-norm deviation between `∫ wwᵀ dt` and `δ WδWδᵀ`:
/// `½δTL` under L-square Lipschitzness, `δV` under total square variation V.
pub fn deviation_bound(reg: &RegularityCertificate, delta: f64, horizon: f64) -> f64 {
    debug_assert!(
        crate::signals::exact_ratio(horizon, delta).is_some(),
        "stepsize must divide the horizon"
    );
    match reg.kind {
        RegularityKind::SquareLipschitz(l) => 0.5 * delta * horizon * l,
        RegularityKind::TotalSquareVariation(v) => delta * v,
    }
}

/// `Q ← Q + margin·I`. The kind is unchanged; callers switch it explicitly
/// (continuous→discrete or vice versa) when crossing between the models.
pub fn inflate_budget(b: &NoiseBudget, margin: f64) -> NoiseBudget {
    assert!(margin >= 0.0);
    NoiseBudget {
        q: b.q.add_scaled_identity(margin),
        horizon: b.horizon,
        kind: b.kind,
    }
}

/// Deviation bound `½(γ−δ)TL` between noise matrices sampled at δ and at a
/// coarser multiple γ = (ℓ+1)δ.
pub fn cross_stepsize_bound(
    delta: f64,
    gamma: f64,
    horizon: f64,
    l: f64,
) -> Result<f64, NoiseError> {
    if crate::signals::exact_ratio(horizon, delta).is_none()
        || crate::signals::exact_ratio(horizon, gamma).is_none()
    {
        return Err(NoiseError::Stepsize(format!(
            "both stepsizes must divide the horizon (δ = {delta}, γ = {gamma}, T = {horizon})"
        )));
    }
    let ratio = gamma / delta;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio || ratio.round() < 1.0 {
        return Err(NoiseError::Stepsize(format!(
            "γ = {gamma} must be an integer multiple of δ = {delta}"
        )));
    }
    Ok(0.5 * (gamma - delta) * horizon * l)
}
