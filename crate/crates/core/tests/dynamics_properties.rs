use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rladder_core::densities::{make_gaussian_mixture, GaussianReference, MixtureDensity, Target, TemperedDensity};
use rladder_core::diagnostics::{integrated_autocorr_time, ks_one_sample, ks_two_sample, pearson_chisq, IatMethod};
use rladder_core::dynamics::*;
use statrs::distribution::{ContinuousCDF, Normal};
use std::sync::Arc;

fn random_mixture(r: &mut ChaCha8Rng, d: usize) -> Arc<MixtureDensity<f64>> {
    let n = r.random_range(1..=4);
    let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let modes: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
    let scales: Vec<f64> = (0..n).map(|_| r.random_range(0.2..1.0)).collect();
    Arc::new(make_gaussian_mixture(&weights, &modes, &scales).unwrap())
}

fn random_ladder(r: &mut ChaCha8Rng) -> Vec<LevelDensity<f64>> {
    let d = r.random_range(1..=3);
    let pi = random_mixture(r, d);
    let k = r.random_range(1..=4);
    let mut beta = 1.0;
    let mut out = vec![LevelDensity::Mixture(pi.clone())];
    for _ in 1..k {
        beta *= r.random_range(0.2..0.9);
        out.push(LevelDensity::Tempered(TemperedDensity::new(pi.clone(), beta, None).unwrap()));
    }
    out.push(LevelDensity::Tempered(TemperedDensity::new(pi.clone(), beta * 0.5, Some(2.0)).unwrap()));
    out.push(LevelDensity::Gaussian(GaussianReference::new(d, 2.0).unwrap()));
    out
}

/// `log π_k(x) + log π_{k+1}(y) + log s_k(x, y)` minus the same at `(y, x)`.
fn balance_residual(lo: &LevelDensity<f64>, hi: &LevelDensity<f64>, x: &[f64], y: &[f64]) -> (f64, f64) {
    let (kx, ky, k1x, k1y) =
        (lo.log_density_unchecked(x), lo.log_density_unchecked(y), hi.log_density_unchecked(x), hi.log_density_unchecked(y));
    let s_xy = swap_probability(kx, ky, k1x, k1y).unwrap();
    let s_yx = swap_probability(ky, kx, k1y, k1x).unwrap();
    let lhs = kx + k1y + s_xy.ln();
    let rhs = ky + k1x + s_yx.ln();
    (lhs - rhs, lhs.abs().max(rhs.abs()).max(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn swaps_satisfy_detailed_balance(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let levels = random_ladder(&mut r);
        let d = levels[0].dim();
        for _ in 0..1000 {
            let k = r.random_range(0..levels.len() - 1);
            let x: Vec<f64> = (0..d).map(|_| r.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| r.random_range(-3.0..3.0)).collect();
            let (res, scale) = balance_residual(&levels[k], &levels[k + 1], &x, &y);
            prop_assert!(res.abs() <= 1e-12 * scale, "residual {res}");
        }
    }
}

fn exact_ou_system(levels: usize, rho: f64, seed: u64) -> ReplicaSystem<f64> {
    let g = LevelDensity::Gaussian(GaussianReference::new(1, 1.0).unwrap());
    let lv = (0..levels).map(|_| Level::new(g.clone(), 1.0, Kernel::ExactOu).unwrap()).collect();
    ReplicaSystem::new(lv, rho, vec![vec![0.0]; levels], SystemOptions::new(1.0, seed)).unwrap()
}

#[test]
fn superposed_clock_is_exponential_with_uniform_pairs() {
    let (levels, rho) = (4, 10.0);
    let pairs = levels - 1;
    let mut sys = exact_ou_system(levels, rho, 11);
    sys.enable_event_log();
    while sys.event_log().unwrap().len() < 100_000 {
        sys.step().unwrap();
    }
    let log = sys.event_log().unwrap();
    let gaps: Vec<f64> = std::iter::once(log[0].0).chain(log.windows(2).map(|w| w[1].0 - w[0].0)).collect();
    let rate = rho * pairs as f64;
    let ks = ks_one_sample(&gaps, |t| 1.0 - (-rate * t).exp()).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
    let mut counts = vec![0.0; pairs];
    for &(_, k) in log {
        counts[k] += 1.0;
    }
    let expected = vec![log.len() as f64 / pairs as f64; pairs];
    let chi = pearson_chisq(&counts, &expected, 0).unwrap();
    assert!(chi.p_value > 0.01, "{chi:?}");
    // The swap statistics see the same proposals.
    assert!(sys.swap_stats().total_proposals() >= log.len() as u64);
}

#[test]
fn exact_ou_composes() {
    let (tau, m, dt, y0) = (3.0, 1.5, 0.2, 2.0);
    let n = 20_000;
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let one: Vec<f64> = (0..n).map(|_| ou_exact_step(&[y0], tau, m, dt, &mut r).unwrap()[0]).collect();
    let two: Vec<f64> = (0..n)
        .map(|_| {
            let mid = ou_exact_step(&[y0], tau, m, dt / 2.0, &mut r).unwrap();
            ou_exact_step(&mid, tau, m, dt / 2.0, &mut r).unwrap()[0]
        })
        .collect();
    let rate = tau / (m * m);
    let law = Normal::new(y0 * (-rate * dt).exp(), m * (1.0 - (-2.0 * rate * dt).exp()).sqrt()).unwrap();
    assert!(ks_one_sample(&two, |x| law.cdf(x)).unwrap().p_value > 0.01);
    assert!(ks_two_sample(&one, &two).unwrap().p_value > 0.01);
}

fn em_variance(eps: f64, h: f64, steps: u64, seed: u64) -> (f64, f64) {
    let pi = Arc::new(make_gaussian_mixture(&[1.0f64], &[vec![0.0]], &[eps]).unwrap());
    let traj = run_ld(LevelDensity::Mixture(pi), vec![0.0], h * steps as f64, SystemOptions::new(h, seed), 1).unwrap();
    let sq: Vec<f64> = traj.coordinate(0, 0).iter().skip(1000).map(|x| x * x).collect();
    let mean = sq.iter().sum::<f64>() / sq.len() as f64;
    let sd = (sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / sq.len() as f64).sqrt();
    let iat = integrated_autocorr_time(&sq, IatMethod::GeyerIps).unwrap().iat;
    (mean, sd * (iat / sq.len() as f64).sqrt())
}

#[test]
fn euler_maruyama_stationary_bias() {
    let eps: f64 = 0.5;
    let mut errs = Vec::new();
    for (a, steps) in [(0.2, 1_000_000u64), (0.02, 4_000_000)] {
        let h = a * eps * eps;
        let (var, se) = em_variance(eps, h, steps, 9);
        // x' = (1 - a) x + √(2h) ξ has stationary variance 2ε² / (2 - a).
        let want = 2.0 * eps * eps / (2.0 - a);
        assert!((var - want).abs() < 4.0 * se, "a = {a}: {var} vs {want} (se {se})");
        errs.push((var - eps * eps).abs());
    }
    assert!(errs[1] < errs[0]);
}

#[test]
fn trajectories_do_not_depend_on_thread_count() {
    let pi = Arc::new(make_gaussian_mixture(&[0.5f64, 0.5], &[vec![-1.0], vec![1.0]], &[0.3, 0.3]).unwrap());
    let piy = LevelDensity::Gaussian(GaussianReference::new(1, 2.0).unwrap());
    let run = |threads: usize| -> Vec<Vec<f64>> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            use rayon::prelude::*;
            (0..6u64)
                .into_par_iter()
                .map(|chain| {
                    let opts = SystemOptions::new(0.005, 42).chain(chain);
                    run_reld(pi.clone(), piy.clone(), 5.0, 5.0, vec![-1.0], vec![0.0], 20.0, opts, 10, RecordPolicy::All, Kernel::ExactOu)
                        .unwrap()
                        .samples
                })
                .collect()
        })
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a, b);
    assert_ne!(a[0], a[1]);
}
