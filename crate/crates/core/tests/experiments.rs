use idfsim::experiments::*;
use idfsim::propagator::RampProtocol;
use idfsim::*;

fn params() -> ModelParams {
    ModelParams::new(0.2, 0.1).unwrap()
}

#[test]
fn sweep_directions_pick_mirror_branches() {
    let p = params();
    let fwd = run_sweep(&p, -0.25, 0.25, 1e-5, 0.05, InitialMode::OnFixedPoint).unwrap();
    let bwd = run_sweep(&p, 0.25, -0.25, -1e-5, 0.05, InitialMode::OnFixedPoint).unwrap();
    assert_eq!(fwd.branch, Branch::Left);
    assert_eq!(bwd.branch, Branch::Right);
    let eta0 = bifurcation_points(&p).eta(0.0).unwrap();
    assert!((fwd.q_at_r0.unwrap() + eta0).abs() < 1e-2);
    assert!((bwd.q_at_r0.unwrap() - eta0).abs() < 1e-2);
}

#[test]
fn idf_shifted_sweep_selects_the_same_branch() {
    let p = params();
    let res = run_sweep(&p, -0.25, 0.25, 1e-5, 0.05, InitialMode::IdfShifted).unwrap();
    assert_eq!(res.branch, Branch::Left);
}

#[test]
fn state_keeps_clear_of_the_saddle() {
    let p = params();
    let res = run_sweep(&p, -0.25, 0.25, 1e-5, 0.05, InitialMode::OnFixedPoint).unwrap();
    let scale = closed_form_mean_dq(bifurcation_points(&p).r1 - 0.01, 1e-5, &p)
        .unwrap()
        .abs();
    let d = min_saddle_distance(&res.trajectory, &p).unwrap();
    assert!(d > scale, "{d} vs {scale}");
}

#[test]
fn deviation_series_follows_the_selected_branch() {
    let p = params();
    let res = run_sweep(&p, -0.25, 0.25, 1e-5, 0.05, InitialMode::OnFixedPoint).unwrap();
    let worst = res
        .deviation_series
        .iter()
        .map(|d| d.dq.abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.1, "{worst}");
    let at0 = res.deviation_series.iter().find(|d| d.r == 0.0).unwrap();
    assert!(at0.dq.abs() < 1e-2);
}

#[test]
fn hysteresis_loop_mirrors_and_closes() {
    let p = params();
    let res = run_hysteresis(&p, -0.25, 0.25, 1e-5, 0.05).unwrap();
    assert_eq!(
        (res.forward.branch, res.backward.branch),
        (Branch::Left, Branch::Right)
    );
    assert!(mirror_error(&res, &p, 400) < 1e-2);
    assert!(res.guiding_center_gap.unwrap() < 1e-3);
    assert!(res.loop_area > 0.5, "{}", res.loop_area);
    let first = res.forward.trajectory.first();
    let last = res.backward.trajectory.last();
    assert_eq!(first.r, last.r);
}

#[test]
fn berry_phase_at_half_pi() {
    let p = params();
    let (report, _) = berry_phase_experiment(&p, 1e-5, 0.05).unwrap();
    assert!(report.relative_error() < 0.02, "{report:?}");
    assert!((report.quadrature - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    assert!((report.numeric - report.quadrature).abs() < report.numeric.abs());
}

#[test]
fn berry_numeric_ignores_sample_gauge() {
    let p = params();
    let res = run_hysteresis(&p, -0.25, 0.25, 1e-4, 0.05).unwrap();
    let states = loop_states_on_grid(&res, BERRY_GRID_STEP);
    let base = berry_phase_numeric(&states, LOOP_CLOSURE_TOL).unwrap();
    let rephased: Vec<_> = states
        .iter()
        .enumerate()
        .map(|(k, s)| s.rephased(0.37 * k as f64))
        .collect();
    let other = berry_phase_numeric(&rephased, LOOP_CLOSURE_TOL).unwrap();
    assert!((base - other).abs() < 1e-12);
}

#[test]
fn scans_are_ordered_and_reproducible() {
    let a = berry_scan(&[0.25, 0.2], 0.1, 1e-4, 0.05).unwrap();
    let b = berry_scan(&[0.25, 0.2], 0.1, 1e-4, 0.05).unwrap();
    assert_eq!(a, b);
    assert_eq!((a[0].c, a[1].c), (0.25, 0.2));
}

#[test]
fn tracking_signs_agree_near_the_bifurcation() {
    let p = params();
    let r1 = bifurcation_points(&p).r1;
    for mode in [InitialMode::IdfShifted, InitialMode::OnFixedPoint] {
        let res = idf_tracking_experiment(&p, -0.25, -0.19, 1e-5, 0.05, mode, None).unwrap();
        for pt in res.points.iter().filter(|pt| pt.r > r1 - 0.02) {
            assert_eq!(
                pt.dq_actual.signum(),
                pt.dq_theory.signum(),
                "{mode:?} {pt:?}"
            );
        }
    }
}

#[test]
fn fixed_point_start_amplitude_matches_initial_offset() {
    let p = params();
    let res = idf_tracking_experiment(
        &p,
        -0.25,
        -0.245,
        1e-6,
        0.05,
        InitialMode::OnFixedPoint,
        None,
    )
    .unwrap();
    let amp = res
        .points
        .iter()
        .map(|pt| (pt.dq_actual - pt.dq_theory).abs())
        .fold(0.0, f64::max);
    let d0 = res.points[0].dq_theory.abs();
    assert!((amp / d0 - 1.0).abs() < 0.05, "{amp} vs {d0}");
}

#[test]
fn ensemble_is_insensitive_to_size_and_radius() {
    let p = params();
    let cfg = |n, radius| EnsembleConfig {
        r: -0.25,
        speed: 1e-6,
        n_samples: n,
        radius,
        seed: 11,
        periods: 4,
        dt: 0.05,
    };
    let results: Vec<_> = [16, 64, 256]
        .iter()
        .map(|&n| ensemble_average_oracle(&p, &cfg(n, 1e-4)).unwrap())
        .collect();
    for r in &results {
        assert!((r.mean_dq / results[0].mean_dq - 1.0).abs() < 1e-3);
        assert!((r.mean_dq / r.predicted_dq - 1.0).abs() < 0.1);
        assert!(r.mean_dp.abs() < 1e-6);
    }
    let point = ensemble_average_oracle(&p, &cfg(4, 0.0)).unwrap();
    let shifted = idf_tracking_experiment(
        &p,
        -0.25,
        -0.25 + 1e-6 * point.window,
        1e-6,
        0.05,
        InitialMode::IdfShifted,
        Some(1),
    )
    .unwrap();
    let mean: f64 =
        shifted.points.iter().map(|pt| pt.dq_actual).sum::<f64>() / shifted.points.len() as f64;
    assert!(
        (point.mean_dq / mean - 1.0).abs() < 0.01,
        "{} {mean}",
        point.mean_dq
    );
}

#[test]
fn quantum_run_matches_classical_over_a_loop() {
    let p = params();
    let start = fixed_points(-0.25, &p)[0].state();
    let proto = RampProtocol::through(&[-0.25, 0.0, 0.25, 0.0, -0.25], 1e-4).unwrap();
    let (rep, _, _) = quantum_classical_equivalence(start, &proto, &p, 0.05, 50, 1.3).unwrap();
    assert!(rep.sup_norm() < 1e-6, "{rep:?}");
    assert!(rep.max_norm_drift < 1e-8);
}

#[test]
fn selection_is_robust_to_rate_and_step() {
    let p = params();
    let out = branch_selection_scan(&p, 0.25, &[1e-4, 3e-5], &[0.02, 0.05, 0.1]).unwrap();
    for o in out {
        assert_eq!(
            (o.forward, o.backward),
            (Branch::Left, Branch::Right),
            "{o:?}"
        );
    }
}
