//! Adaptive 7/15-point Gauss–Kronrod quadrature on finite intervals.

use super::DiagnosticsError;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Panel { a, b, value: k * h, error: ((k - g) * h).abs() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// `∫_a^b f` to `max(abs_tol, rel_tol |I|)`. The interval starts as
/// `initial_panels` equal pieces plus any `breakpoints` inside it, so narrow
/// peaks at known locations are resolved.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    breakpoints: &[f64],
) -> Result<QuadratureResult, DiagnosticsError> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(DiagnosticsError::InvalidParameter(format!("integration interval [{a}, {b}] is not valid")));
    }
    const INITIAL: usize = 32;
    const MAX_PANELS: usize = 20_000;
    let mut cuts: Vec<f64> = (0..=INITIAL).map(|i| a + (b - a) * i as f64 / INITIAL as f64).collect();
    cuts.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in cuts.windows(2) {
        heap.push(gk15(&mut f, w[0], w[1]));
        evals += 15;
    }
    // Running sums drift under repeated subtraction, so they only decide
    // when to stop looking; the returned totals are summed afresh.
    let mut total: f64 = heap.iter().map(|p| p.value).sum();
    let mut err: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        if !total.is_finite() {
            return Err(DiagnosticsError::Numerical("integrand is not finite on the interval".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
            if err <= abs_tol.max(rel_tol * total.abs()) {
                return Ok(QuadratureResult { value: total, error: err, evaluations: evals });
            }
        }
        if heap.len() >= MAX_PANELS {
            return Err(DiagnosticsError::Numerical(format!(
                "quadrature did not converge: estimate {total}, error {err}"
            )));
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        let l = gk15(&mut f, worst.a, mid);
        let r = gk15(&mut f, mid, worst.b);
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        evals += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_gaussians() {
        let r = integrate(|x| x * x, 0.0, 3.0, 1e-13, 1e-13, &[]).unwrap();
        assert!((r.value - 9.0).abs() < 1e-12);
        let s = 0.01;
        let g = |x: f64| (-(x - 0.3) * (x - 0.3) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let r = integrate(g, -3.0, 3.0, 1e-12, 1e-12, &[0.3]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bad_interval() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-10, 1e-10, &[]).is_err());
    }
}
