//! Shared fixtures for the integration suites.

use qstab::informativity::DataQmi;
use qstab::linalg::{Mat, SymMatrix};
use qstab::noise::{integral_noise_matrix, NoiseBudget};
use qstab::signals::{
    gramian_cont, gramian_disc, sample, simulate_lti, GriddedSignal, LtiSystem, TrajectoryData,
};

pub const TWO_STATE_A: [f64; 4] = [-1.0, 0.5, 0.0, -2.0];
pub const TWO_STATE_B: [f64; 2] = [1.0, 0.5];
/// Noise amplitude of the two-state fixture.
pub const TWO_STATE_NOISE_AMP: f64 = 0.05;

/// Square-Lipschitz constant of the two-state noise via the
/// value/derivative bound: ‖w‖ ≤ amp·√2, ‖ẇ‖ ≤ amp·√13 → L = 2·L1·L2.
pub fn two_state_lipschitz() -> f64 {
    2.0 * (TWO_STATE_NOISE_AMP * 2.0_f64.sqrt()) * (TWO_STATE_NOISE_AMP * 13.0_f64.sqrt())
}

pub fn two_state_noise(h: f64, horizon: f64) -> GriddedSignal {
    GriddedSignal::from_fn(2, h, horizon, |t, out| {
        out[0] = TWO_STATE_NOISE_AMP * (3.0 * t).sin();
        out[1] = TWO_STATE_NOISE_AMP * (2.0 * t).cos();
    })
    .unwrap()
}

pub fn two_state_trajectory(h: f64, horizon: f64) -> (TrajectoryData, GriddedSignal) {
    let sys = LtiSystem::new(
        Mat::from_rows(2, 2, &TWO_STATE_A),
        Mat::from_rows(2, 1, &TWO_STATE_B),
    )
    .unwrap();
    let u = GriddedSignal::from_fn(1, h, horizon, |t, out| out[0] = (1.5 * t).sin() + 0.5).unwrap();
    let w = two_state_noise(h, horizon);
    let traj = simulate_lti(&sys, &[0.3, -0.2], &u, &w).unwrap();
    (traj, w)
}

/// Budget that the realized noise satisfies with a little headroom.
pub fn two_state_budget(w: &GriddedSignal, horizon: f64) -> SymMatrix {
    let energy = integral_noise_matrix(w);
    let _ = horizon;
    energy.add_scaled_identity(1e-3)
}

pub fn two_state_qmi_continuous(h: f64, horizon: f64) -> DataQmi {
    let (traj, w) = two_state_trajectory(h, horizon);
    let q = two_state_budget(&w, horizon);
    let budget = NoiseBudget::continuous(q, horizon).unwrap();
    DataQmi::assemble(&gramian_cont(&traj), &budget).unwrap()
}

pub fn two_state_qmi_sampled(h: f64, horizon: f64, delta: f64) -> DataQmi {
    let (traj, w) = two_state_trajectory(h, horizon);
    let q = two_state_budget(&w, horizon);
    let budget = NoiseBudget::discrete(q, horizon, delta).unwrap();
    DataQmi::assemble(&gramian_disc(&sample(&traj, delta).unwrap()), &budget).unwrap()
}
