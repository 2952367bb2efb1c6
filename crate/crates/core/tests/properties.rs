use idfsim::idf::gamma_matrix;
use idfsim::model::{branch_phase, hamiltonian};
use idfsim::propagator::{classical_to_quantum, quantum_to_classical};
use idfsim::*;
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (0.02f64..0.5, 0.05f64..0.95)
        .prop_map(|(delta, ratio)| ModelParams::new(delta / ratio, delta).unwrap())
}

fn interior_state() -> impl Strategy<Value = PhaseState> {
    (-0.95f64..0.95, -std::f64::consts::PI..std::f64::consts::PI)
        .prop_map(|(q, p)| PhaseState::new(q, p))
}

fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fixed_point_residual(params in params_strategy(), r in -0.8f64..0.8) {
        for fp in fixed_points(r, &params) {
            let g = gradient(fp.state(), r, &params).unwrap();
            prop_assert!(g.norm() < 1e-12, "R={r} {params:?} {fp:?} {g:?}");
        }
    }

    #[test]
    fn fixed_points_sorted_and_counted(params in params_strategy(), r in -0.8f64..0.8) {
        let fps = fixed_points(r, &params);
        let loci = bifurcation_points(&params);
        let expect = if loci.r1 < r && r < loci.r2 { 3 } else { 1 };
        prop_assert_eq!(fps.len(), expect);
        prop_assert!(fps.windows(2).all(|w| w[0].q_bar < w[1].q_bar));
    }

    #[test]
    fn parity_in_q(params in params_strategy(), s in interior_state(), r in -0.5f64..0.5) {
        let minus = PhaseState::new(-s.q, s.p);
        prop_assert_eq!(hamiltonian(s, r, &params).unwrap(), hamiltonian(minus, r, &params).unwrap());
    }

    #[test]
    fn gradient_matches_finite_differences(params in params_strategy(), s in interior_state(), r in -0.5f64..0.5) {
        let h = 1e-5;
        let g = gradient(s, r, &params).unwrap();
        let hq = |q: f64| hamiltonian(PhaseState::new(q, s.p), r, &params).unwrap();
        let hp = |p: f64| hamiltonian(PhaseState::new(s.q, p), r, &params).unwrap();
        let (fq, fp) = (central_diff(hq, s.q, h), central_diff(hp, s.p, h));
        let scale = 1.0 + g.dq.abs().max(g.dp.abs());
        prop_assert!((g.dq - fq).abs() < 1e-8 * scale, "{} {}", g.dq, fq);
        prop_assert!((g.dp - fp).abs() < 1e-8 * scale, "{} {}", g.dp, fp);
    }

    #[test]
    fn hessian_matches_finite_differences(params in params_strategy(), s in interior_state(), r in -0.5f64..0.5) {
        let h = 1e-5;
        let hs = hessian(s, r, &params).unwrap();
        let gq = |q: f64| gradient(PhaseState::new(q, s.p), r, &params).unwrap();
        let gp = |p: f64| gradient(PhaseState::new(s.q, p), r, &params).unwrap();
        let qq = central_diff(|q| gq(q).dq, s.q, h);
        let qp = central_diff(|p| gp(p).dq, s.p, h);
        let pq = central_diff(|q| gq(q).dp, s.q, h);
        let pp = central_diff(|p| gp(p).dp, s.p, h);
        let scale = 1.0 + hs.qq.abs().max(hs.pp.abs()).max(hs.qp.abs());
        prop_assert!((hs.qq - qq).abs() < 1e-6 * scale);
        prop_assert!((hs.qp - qp).abs() < 1e-6 * scale);
        prop_assert!((hs.qp - pq).abs() < 1e-6 * scale);
        prop_assert!((hs.pp - pp).abs() < 1e-6 * scale);
    }

    #[test]
    fn gamma_matches_finite_differences(params in params_strategy(), depth in 0.01f64..0.5) {
        let r = bifurcation_points(&params).r1 - depth;
        let fp = fixed_points(r, &params)[0];
        let g = gamma_matrix(&fp, r, &params).unwrap();
        let h = 1e-4;
        let s = fp.state();
        let hval = |q: f64, p: f64| hamiltonian(PhaseState::new(q, p), r, &params).unwrap();
        let hqq = (hval(s.q + h, s.p) - 2.0 * hval(s.q, s.p) + hval(s.q - h, s.p)) / (h * h);
        let hpp = (hval(s.q, s.p + h) - 2.0 * hval(s.q, s.p) + hval(s.q, s.p - h)) / (h * h);
        let hqp = (hval(s.q + h, s.p + h) - hval(s.q + h, s.p - h) - hval(s.q - h, s.p + h)
            + hval(s.q - h, s.p - h)) / (4.0 * h * h);
        let fd = [[-hqp, -hqq], [hpp, hqp]];
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((g.m[i][j] - fd[i][j]).abs() < 1e-6, "{:?} {:?}", g.m, fd);
            }
        }
        prop_assert_eq!(g.m[0][0], 0.0);
        prop_assert_eq!(g.m[1][1], 0.0);
    }

    #[test]
    fn prediction_is_linear_in_speed(params in params_strategy(), depth in 0.01f64..0.5, v in 1e-8f64..1e-4, k in -8i32..8) {
        let r = bifurcation_points(&params).r1 - depth;
        let base = idf_prediction(r, v, &params).unwrap();
        let scaled = idf_prediction(r, f64::from(k) * v, &params).unwrap();
        let expect = f64::from(k) * base.mean_dq;
        prop_assert!((scaled.mean_dq - expect).abs() <= 4.0 * f64::EPSILON * expect.abs());
        prop_assert!(base.mean_dp.abs() < 1e-15);
        let closed = closed_form_mean_dq(r, v, &params).unwrap();
        prop_assert!(((closed - base.mean_dq) / closed).abs() < 1e-12);
    }

    #[test]
    fn mapping_round_trip(s in interior_state(), gauge in -10.0f64..10.0) {
        let back = quantum_to_classical(&classical_to_quantum(s, gauge)).unwrap();
        prop_assert!((back.q - s.q).abs() < 1e-15);
        prop_assert!(idfsim::model::wrap_angle(back.p - s.p).abs() < 1e-14);
    }

    #[test]
    fn mapping_gauge_independent(s in interior_state(), g1 in -10.0f64..10.0, g2 in -10.0f64..10.0) {
        let a = quantum_to_classical(&classical_to_quantum(s, g1)).unwrap();
        let b = quantum_to_classical(&classical_to_quantum(s, g2)).unwrap();
        prop_assert!((a.q - b.q).abs() < 1e-15);
        prop_assert!(idfsim::model::wrap_angle(a.p - b.p).abs() < 1e-14);
    }

    #[test]
    fn branch_phase_continuous_through_zero(params in params_strategy(), eps in 1e-12f64..1e-6) {
        let left = branch_phase(-eps, &params);
        let right = branch_phase(eps, &params);
        prop_assert!((left - right).abs() <= 2.0 * eps / params.delta() + 1e-15);
        prop_assert!((branch_phase(0.0, &params) + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}

#[test]
fn stability_flip_is_at_the_loci() {
    let params = ModelParams::new(0.2, 0.1).unwrap();
    let loci = bifurcation_points(&params);
    let centre_det = |r: f64| {
        hessian(PhaseState::new(0.0, branch_phase(r, &params)), r, &params)
            .unwrap()
            .det()
    };
    for (mut stable, mut saddle, edge) in [(-0.3, -0.1, loci.r1), (0.3, 0.1, loci.r2)] {
        let fp = |r: f64| {
            fixed_points(r, &params)
                .into_iter()
                .find(|f| f.q_bar == 0.0)
                .unwrap()
        };
        assert_eq!(
            classify_stability(&fp(stable), stable, &params).unwrap(),
            Stability::StableCenter
        );
        assert_eq!(
            classify_stability(&fp(saddle), saddle, &params).unwrap(),
            Stability::UnstableSaddle
        );
        while (stable - saddle).abs() > 1e-13 {
            let mid = 0.5 * (stable + saddle);
            if centre_det(mid) > 0.0 {
                stable = mid;
            } else {
                saddle = mid;
            }
        }
        assert!((stable - edge).abs() < 1e-10, "{stable} vs {edge}");
    }
}
