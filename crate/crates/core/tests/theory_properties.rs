use proptest::prelude::*;
use rladder_core::theory::*;

fn ls(v: f64) -> LogScalar<f64> {
    LogScalar::from_ln(v)
}

fn inputs(q: f64, a: f64, ba: f64, bq: f64, r: f64, ratio: f64, d: usize, tau: f64, rho: f64) -> ReldBoundInputs<f64> {
    ReldBoundInputs { q: ls(q), a: ls(a), big_a: ls(ba), big_q: ls(bq), big_r: r * ratio, r, d, tau, rho }
}

fn kappa(i: ReldBoundInputs<f64>) -> f64 {
    kappa_reld_bound(i).unwrap().kappa.ln_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reld_bound_is_monotone(
        q in -5.0f64..30.0, a in -5.0f64..30.0, ba in 0.0f64..40.0, bq in 0.0f64..50.0,
        r in 0.05f64..5.0, ratio in 1.0f64..30.0, d in 1usize..6,
        tau in 0.01f64..1e4, rho in 0.01f64..1e4, bump in 1.0f64..10.0,
    ) {
        let base = kappa(inputs(q, a, ba, bq, r, ratio, d, tau, rho));
        let eps = 1e-12 * base.abs().max(1.0);
        prop_assert!(kappa(inputs(q, a, ba, bq, r, ratio, d, tau * bump, rho)) <= base + eps);
        prop_assert!(kappa(inputs(q, a, ba, bq, r, ratio, d, tau, rho * bump)) <= base + eps);
        let up = bump.ln();
        prop_assert!(kappa(inputs(q + up, a, ba, bq, r, ratio, d, tau, rho)) >= base - eps);
        prop_assert!(kappa(inputs(q, a + up, ba, bq, r, ratio, d, tau, rho)) >= base - eps);
        prop_assert!(kappa(inputs(q, a, ba + up, bq, r, ratio, d, tau, rho)) >= base - eps);
        prop_assert!(kappa(inputs(q, a, ba, bq + up, r, ratio, d, tau, rho)) >= base - eps);
        prop_assert!(kappa(inputs(q, a, ba, bq, r, ratio * bump, d, tau, rho)) >= base - eps);
    }

    #[test]
    fn ladders_are_valid(lm in 0.005f64..0.95, k in 1usize..8, d in 1usize..9, alpha in 0.0f64..1.0) {
        let m = 2.0;
        let mut built = vec![build_ladder(Scenario::FlatTop { alpha }, lm, d, k, m).unwrap()];
        if d <= 2 {
            let s2 = build_ladder(Scenario::Synchronized, lm, d, k, m).unwrap();
            for (t, b) in s2.taus.iter().zip(&s2.betas) {
                prop_assert!((t * b - 1.0).abs() <= f64::EPSILON, "tau*beta = {}", t * b);
            }
            built.push(s2);
        }
        if d >= 3 {
            built.push(build_ladder(Scenario::HighDim, lm, d, k, m).unwrap());
        } else {
            prop_assert!(build_ladder(Scenario::HighDim, lm, d, k, m).is_err());
        }
        if k == 1 || d <= 2 {
            built.push(build_ladder(Scenario::Geometric, lm, d, k, m).unwrap());
        }
        for schedule in &built {
            prop_assert!(schedule.validate().is_ok());
            prop_assert_eq!(schedule.taus.len(), k + 1);
            prop_assert!(schedule.rho >= 1.0);
        }
    }

    #[test]
    fn single_level_ladder_matches_reld_prescription(eps in 0.01f64..0.9, d in 1usize..6) {
        let t = build_ladder(Scenario::Geometric, eps, d, 1, 2.0).unwrap();
        let s = build_ladder(Scenario::FlatTop { alpha: 0.0 }, eps, d, 1, 2.0).unwrap();
        let want = -(d as f64);
        prop_assert!((t.rho.ln() / eps.ln() - want).abs() < 1e-12);
        prop_assert!((s.rho.ln() / eps.ln() - want).abs() < 1e-12);
        prop_assert!((s.taus[1].ln() / eps.ln() - want).abs() < 1e-12);
        prop_assert!((t.betas[1].ln() / eps.ln() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn certificate_q_is_its_own_poincare_constant(c in 0.01f64..100.0, ratio in 1.0f64..5.0, d in 1usize..10) {
        let (cert, p) = lyapunov_cert_log_concave(c, c * ratio, d).unwrap();
        let q = cert.poincare_constant();
        prop_assert!((q.ln_abs() - p.q.ln_abs()).abs() <= 1e-12 * p.q.ln_abs().abs().max(1.0));
    }

    #[test]
    fn holder_optimum_never_worse(
        lq in proptest::collection::vec(-2.0f64..20.0, 3..6),
        taus in proptest::collection::vec(1.0f64..100.0, 6),
        rho in 0.1f64..100.0,
    ) {
        let n = lq.len();
        let levels = (0..n)
            .map(|k| LevelConstants { q: ls(lq[k]), a: ls(1.0 + k as f64), r: 1.0 + k as f64, tau: taus[k] })
            .collect();
        let inp = MreldBoundInputs { levels, rho, d: 1, two_components: false, xi_y: XiYConvention::NextLevel };
        let def = kappa_mreld_bound_default(inp.clone()).unwrap().kappa;
        let opt = optimize_holder(inp).unwrap().kappa;
        prop_assert!(opt.ln_abs() <= def.ln_abs() + 1e-12);
    }
}
