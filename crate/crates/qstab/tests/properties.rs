//! Property suites: randomized invariants for the matrix kernels and the
//! solver, plus the data-driven inclusion and consistency properties that
//! tie the sampled and continuous noise models together.

mod common;

use proptest::prelude::*;
use qstab::informativity::{
    maximize_beta, membership, membership_form_scalar, sample_members, synthesize, DataQmi,
    MarginVerdict, SynthesisVerdict,
};
use qstab::linalg::{self, Mat, SymMatrix};
use qstab::noise::{estimate_square_lipschitz, NoiseBudget};
use qstab::sdp::{self, LmiBlock, SdpProblem};
use qstab::signals::{gramian_cont, gramian_disc, paper_example_signals, sample, GriddedSignal};

fn sym_strategy(max_dim: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_dim).prop_flat_map(|dim| {
        proptest::collection::vec(-10.0..10.0_f64, dim * dim)
            .prop_map(move |data| SymMatrix::from_rows(dim, &data))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_reconstruction_and_orthogonality(a in sym_strategy(12)) {
        let eig = linalg::sym_eig(&a).unwrap();
        let norm = linalg::spectral_norm(&a).unwrap();
        let recon = eig.reconstruct();
        let err = recon.sub(&a).to_mat().max_abs();
        prop_assert!(err <= 1e-10 * (1.0 + norm), "reconstruction error {err}");

        let v = &eig.eigenvectors;
        let vtv = v.transpose().matmul(v);
        let id = Mat::identity(a.dim());
        prop_assert!(vtv.sub(&id).max_abs() <= 1e-10, "orthogonality defect");

        for pair in eig.eigenvalues.windows(2) {
            prop_assert!(pair[0] <= pair[1], "eigenvalues not ascending");
        }
    }

    #[test]
    fn spectral_norm_is_extreme_eigenvalue(a in sym_strategy(10)) {
        let eig = linalg::sym_eig(&a).unwrap();
        let expect = eig.eigenvalues[0].abs().max(eig.eigenvalues.last().unwrap().abs());
        let got = linalg::spectral_norm(&a).unwrap();
        prop_assert!((got - expect).abs() <= 1e-12 * (1.0 + expect));
    }

    #[test]
    fn cholesky_succeeds_iff_positive_definite(a in sym_strategy(9)) {
        let min = linalg::min_eig(&a).unwrap();
        let scale = 1.0 + linalg::spectral_norm(&a).unwrap();
        // outside the cross-tolerance band the two tests must agree
        if min.abs() > 1e-10 * scale {
            let chol = linalg::cholesky(&a);
            prop_assert_eq!(chol.is_ok(), min > 0.0, "min_eig = {}", min);
            if let Ok(l) = chol {
                let recon = SymMatrix::from_mat(&l.matmul(&l.transpose()));
                let err = recon.sub(&a).to_mat().max_abs();
                prop_assert!(err <= 1e-10 * scale, "LLᵀ error {err}");
            }
        }
    }

    // Monotonicity of the shift optimum is a statement about the geometry,
    // so the instances must keep t* below the (problem-scaled) phase-1 cap:
    // a constant block bounds t* by 1 on both sides of the comparison.
    #[test]
    fn phase1_margin_monotone_under_extra_block(
        c0 in proptest::collection::vec(-3.0..3.0_f64, 2),
        c1 in proptest::collection::vec(-3.0..3.0_f64, 2),
        extra in -3.0..3.0_f64,
    ) {
        let block = |constant: f64, coeffs: &[f64]| {
            LmiBlock::new(
                SymMatrix::scaled_identity(1, constant),
                coeffs.iter().map(|c| SymMatrix::scaled_identity(1, *c)).collect(),
            )
        };
        let base = SdpProblem::new(
            2,
            vec![block(1.0, &[0.0, 0.0]), block(1.0, &c0), block(1.0, &c1)],
            vec![0.0, 0.0],
        );
        let mut tighter = base.clone();
        tighter.blocks.push(block(extra, &[1.0, -1.0]));
        let t_base = sdp::phase1_margin(&base).unwrap();
        let t_tight = sdp::phase1_margin(&tighter).unwrap();
        prop_assert!(t_tight <= t_base + 1e-6, "{} > {}", t_tight, t_base);
    }

    #[test]
    fn solver_points_pass_independent_eigenvalue_check(
        coeffs in proptest::collection::vec(-2.0..2.0_f64, 8),
        obj in proptest::collection::vec(-1.0..1.0_f64, 2),
    ) {
        // two 2×2 blocks, strictly feasible at the origin by construction
        let mut blocks = Vec::new();
        for chunk in coeffs.chunks(4) {
            let f1 = SymMatrix::from_rows(2, &[chunk[0], chunk[1], chunk[1], chunk[2]]);
            let mut f2 = SymMatrix::zeros(2);
            f2.set_sym(0, 1, chunk[3]);
            blocks.push(LmiBlock::new(SymMatrix::identity(2), vec![f1, f2]));
        }
        let p = SdpProblem::new(2, blocks, obj);
        let r = sdp::solve(&p).unwrap();
        if r.status.is_feasible() {
            for b in &p.blocks {
                let f = b.eval(&r.y);
                let scale = 1.0 + linalg::spectral_norm(&f).unwrap();
                prop_assert!(
                    linalg::min_eig(&f).unwrap() >= -1e-7 * scale,
                    "block violated at reported point"
                );
            }
        }
    }

    #[test]
    fn trajectory_csv_roundtrip_is_exact(
        rows in 3usize..20,
        n in 1usize..3,
        m in 1usize..3,
        seed_vals in proptest::collection::vec(-1e6..1e6_f64, 200),
    ) {
        let h = 0.125;
        let horizon = h * (rows - 1) as f64;
        let mut it = seed_vals.into_iter().cycle();
        let mut grab = |dim: usize| -> GriddedSignal {
            let vals: Vec<f64> = (0..rows * dim).map(|_| it.next().unwrap()).collect();
            GriddedSignal::new(dim, h, horizon, vals).unwrap()
        };
        let x = grab(n);
        let u = grab(m);
        let xdot = grab(n);
        let traj = qstab::signals::TrajectoryData::new(x, u, xdot).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        qstab::signals::csv::write_trajectory(&path, &traj, None).unwrap();
        let loaded = qstab::signals::csv::read_trajectory(&path).unwrap();
        for k in 0..rows {
            prop_assert_eq!(loaded.traj.x.sample(k), traj.x.sample(k));
            prop_assert_eq!(loaded.traj.u.sample(k), traj.u.sample(k));
            prop_assert_eq!(loaded.traj.xdot.sample(k), traj.xdot.sample(k));
        }
    }
}

#[test]
fn origin_membership_equals_leading_block_psd() {
    for delta in qstab::benchmark::STEPSIZES {
        let q = qstab::benchmark::sampled_qmi(delta).unwrap();
        let origin = membership(
            &Mat::from_rows(1, 1, &[0.0]),
            &Mat::from_rows(1, 1, &[0.0]),
            &q,
            1e-9,
        )
        .unwrap();
        assert_eq!(origin, linalg::is_psd(&q.n11(), 1e-9).unwrap(), "delta {delta}");
    }
}

/// Members of the sampled consistency set whose (grid-estimated) residual
/// regularity passes the chosen constant must belong to the continuous set
/// with the matching inflated budget.
fn inclusion_with_regularity_filter(
    q_sampled: &DataQmi,
    traj: &qstab::signals::TrajectoryData,
    q_matrix: &SymMatrix,
    lipschitz_filter: f64,
    seed: u64,
) -> (usize, usize) {
    let delta = match q_sampled.provenance() {
        qstab::informativity::Provenance::Sampled { delta } => delta,
        _ => panic!("sampled provenance required"),
    };
    let horizon = traj.horizon();
    let n = traj.state_dim();
    let margin = 0.5 * delta * horizon * lipschitz_filter;
    let inflated = NoiseBudget::continuous(q_matrix.add_scaled_identity(margin), horizon).unwrap();
    let q_cont = DataQmi::assemble(&gramian_cont(traj), &inflated).unwrap();

    let members = sample_members(q_sampled, 120, seed, 500_000).unwrap();
    assert!(members.len() >= 100, "only {} members sampled", members.len());
    let mut passed = 0;
    let mut checked = 0;
    for (a, b) in &members {
        // residual of this candidate system on the measurement grid
        let mut vals = Vec::with_capacity(traj.x.len() * n);
        for k in 0..traj.x.len() {
            let ax = a.matvec(traj.x.sample(k));
            let bu = b.matvec(traj.u.sample(k));
            for i in 0..n {
                vals.push(traj.xdot.sample(k)[i] - ax[i] - bu[i]);
            }
        }
        let residual = GriddedSignal::new(n, traj.step(), horizon, vals).unwrap();
        let estimate = estimate_square_lipschitz(&residual).constant();
        if estimate <= lipschitz_filter {
            passed += 1;
            checked += 1;
            assert!(
                membership(a, b, &q_cont, 1e-6).unwrap(),
                "regular member escaped the inflated continuous set (estimate {estimate})"
            );
        }
    }
    (passed, checked)
}

#[test]
fn inclusion_filter_scalar_benchmark() {
    let delta = 0.125;
    let q_sampled = qstab::benchmark::sampled_qmi(delta).unwrap();
    let (traj, _) = paper_example_signals(1e-3).unwrap();
    let (passed, _) = inclusion_with_regularity_filter(
        &q_sampled,
        &traj,
        &SymMatrix::scaled_identity(1, 1.0),
        16.0,
        23,
    );
    assert!(passed >= 10, "filter must keep a meaningful sample, kept {passed}");
}

#[test]
fn inclusion_filter_two_state() {
    let h = 1.0 / 512.0;
    let horizon = 2.0;
    let delta = 0.25;
    let q_sampled = common::two_state_qmi_sampled(h, horizon, delta);
    let (traj, w) = common::two_state_trajectory(h, horizon);
    let q_matrix = common::two_state_budget(&w, horizon);

    // pick the filter from the member population so that it is selective:
    // residual regularity of consistent systems is dominated by how far the
    // member sits from the true plant, not by the true noise itself
    let members = sample_members(&q_sampled, 60, 5, 500_000).unwrap();
    let mut estimates: Vec<f64> = members
        .iter()
        .map(|(a, b)| {
            let mut vals = Vec::new();
            for k in 0..traj.x.len() {
                let ax = a.matvec(traj.x.sample(k));
                let bu = b.matvec(traj.u.sample(k));
                for i in 0..2 {
                    vals.push(traj.xdot.sample(k)[i] - ax[i] - bu[i]);
                }
            }
            let residual = GriddedSignal::new(2, h, horizon, vals).unwrap();
            estimate_square_lipschitz(&residual).constant()
        })
        .collect();
    estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let filter = estimates[estimates.len() / 2];

    let (passed, _) =
        inclusion_with_regularity_filter(&q_sampled, &traj, &q_matrix, filter, 29);
    assert!(passed >= 20, "median filter must keep about half, kept {passed}");
}

/// Below the admissible stepsize bound, sampling keeps informativity and
/// loses at most `½δTL` of margin.
#[test]
fn margin_survives_sampling_below_the_bound() {
    let q_cont = qstab::benchmark::continuous_qmi(1e-4).unwrap();
    let MarginVerdict::Feasible(report) = maximize_beta(&q_cont).unwrap() else {
        panic!("continuous margin must be feasible");
    };
    let beta_hat = report.beta_hat;
    let bound = beta_hat / 16.0;
    let delta = 1.0 / 128.0;
    assert!(delta < bound, "1/128 must sit below the bound {bound}");

    let (traj, _) = paper_example_signals(delta).unwrap();
    let q_samp = DataQmi::assemble(
        &gramian_disc(&sample(&traj, delta).unwrap()),
        &qstab::benchmark::scalar_budget_sampled(delta),
    )
    .unwrap();
    let verdict = synthesize(&q_samp).unwrap();
    assert!(matches!(verdict, SynthesisVerdict::Informative(_)));
    let MarginVerdict::Feasible(sampled_report) = maximize_beta(&q_samp).unwrap() else {
        panic!("sampled margin must be feasible below the bound");
    };
    let floor = beta_hat - 0.5 * delta * 16.0 - 1e-7;
    assert!(
        sampled_report.beta_hat >= floor,
        "sampled margin {} fell below {floor}",
        sampled_report.beta_hat
    );
}

#[test]
fn scalar_form_matches_matrix_membership() {
    let q = qstab::benchmark::continuous_qmi(1e-3).unwrap();
    for (a, b) in [(-1.0, 0.1), (4.35, -3.0), (0.0, 0.0), (2.0, -1.0)] {
        let by_form = membership_form_scalar(a, b, &q) >= 0.0;
        let by_matrix = {
            // bypass the scalar fast path by checking the PSD test directly
            let s = Mat::from_rows(1, 3, &[1.0, a, b]);
            let f = SymMatrix::from_mat(&s.matmul(&q.matrix().to_mat()).matmul(&s.transpose()));
            linalg::min_eig(&f).unwrap() >= 0.0
        };
        assert_eq!(by_form, by_matrix, "at ({a}, {b})");
    }
}
