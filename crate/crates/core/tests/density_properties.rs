use proptest::prelude::*;
use rladder_core::densities::*;
use rladder_core::diagnostics::{grad_check, normalization_1d};
use std::sync::Arc;

fn bimodal(eps: f64) -> Arc<MixtureDensity<f64>> {
    Arc::new(make_gaussian_mixture(&[0.3f64, 0.7], &[vec![-1.0], vec![1.0]], &[eps, 2.0 * eps]).unwrap())
}

#[test]
fn gradients_of_every_kind() {
    let mix2 = make_gaussian_mixture(&[0.5f64, 0.5], &[vec![-1.0, 0.5], vec![1.0, -0.5]], &[0.4, 0.6]).unwrap();
    let diag = MixtureDensity::new(
        vec![0.4, 0.6],
        vec![
            Component::gaussian_diag(vec![0.0, 1.0], vec![0.3, 0.8]).unwrap(),
            Component::gaussian_diag(vec![1.0, -1.0], vec![0.5, 0.4]).unwrap(),
        ],
    )
    .unwrap();
    let base = bimodal(0.3);
    let tempered = TemperedDensity::new(base.clone(), 0.4, None).unwrap();
    let regularized = TemperedDensity::new(base.clone(), 0.4, Some(2.0)).unwrap();
    let reference = GaussianReference::new(3, 1.5).unwrap();
    let custom = MixtureDensity::new(
        vec![0.5, 0.5],
        vec![Component::custom(vec![0.0], base.clone(), None).unwrap(), Component::gaussian(vec![2.0], 0.5).unwrap()],
    )
    .unwrap();
    let h = 1e-4;
    assert!(grad_check(base.as_ref(), 100, h, (-2.0, 2.0), 1).unwrap() <= 1e-6);
    assert!(grad_check(&mix2, 100, h, (-2.0, 2.0), 2).unwrap() <= 1e-6);
    assert!(grad_check(&diag, 100, h, (-2.0, 2.0), 3).unwrap() <= 1e-6);
    assert!(grad_check(&tempered, 100, h, (-2.0, 2.0), 4).unwrap() <= 1e-6);
    assert!(grad_check(&regularized, 100, h, (-2.0, 2.0), 5).unwrap() <= 1e-6);
    assert!(grad_check(&reference, 100, h, (-3.0, 3.0), 6).unwrap() <= 1e-6);
    assert!(grad_check(&custom, 100, h, (-2.0, 3.0), 7).unwrap() <= 1e-6);
    // The double well is smooth on each half-line.
    let dw = make_double_well(2.0f64, 1.0).unwrap();
    assert!(grad_check(&dw, 100, h, (0.1, 2.0), 8).unwrap() <= 1e-6);
    assert!(grad_check(&dw, 100, h, (-2.0, -0.1), 9).unwrap() <= 1e-6);
}

#[test]
fn gaussian_mixture_integrates_to_total_weight() {
    for eps in [0.05, 0.2, 0.5] {
        let pi = bimodal(eps);
        let (a, b) = pi.support_interval();
        let z = normalization_1d(pi.as_ref(), (a, b), &[-1.0, 1.0], 1e-12).unwrap();
        assert!((z.value - 1.0).abs() < 1e-8, "eps {eps}: {}", z.value);
    }
}

proptest! {
    #[test]
    fn unit_temperature_shifts_by_a_constant(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let base = bimodal(0.3);
        let t = TemperedDensity::new(base.clone(), 1.0, None).unwrap();
        let dx = t.log_density(&[x]).unwrap() - base.log_density(&[x]).unwrap();
        let dy = t.log_density(&[y]).unwrap() - base.log_density(&[y]).unwrap();
        prop_assert!((dx - dy).abs() < 1e-12);
    }

    #[test]
    fn reflection_symmetry(s in -2.0f64..2.0, off in 0.1f64..2.0, eps in 0.1f64..1.0, x in -4.0f64..4.0) {
        let pi = make_gaussian_mixture(&[0.5f64, 0.5], &[vec![s / 2.0 - off], vec![s / 2.0 + off]], &[eps, eps]).unwrap();
        let a = pi.log_density(&[x]).unwrap();
        let b = pi.log_density(&[s - x]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}
