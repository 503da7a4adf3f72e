//! Poincaré-constant bounds for replica exchange and the Langevin lower bound.

use super::certs::positive;
use super::log_scalar::LogScalar;
use super::TheoryError;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    Reld,
    MreldGeneral,
    #[serde(rename = "mreld_I2")]
    MreldI2,
}

/// Which branch of the outer `max` attains `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "term")]
pub enum BindingTerm {
    /// ReLD `3(56A+1)q`.
    Component,
    /// ReLD `(3/τ)(57Q + ...)`.
    Temperature,
    /// ReLD `(7aA/ρ)(R/r)^d`.
    Exchange,
    /// mReLD diffusion branch at level `k`.
    LevelDiffusion { level: usize },
    /// mReLD swap branch at level `k`.
    LevelExchange { level: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReldBoundInputs<T> {
    pub q: LogScalar<T>,
    pub a: LogScalar<T>,
    pub big_a: LogScalar<T>,
    pub big_q: LogScalar<T>,
    pub big_r: T,
    pub r: T,
    pub d: usize,
    pub tau: T,
    pub rho: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelConstants<T> {
    pub q: LogScalar<T>,
    pub a: LogScalar<T>,
    pub r: T,
    pub tau: T,
}

/// Which `q` enters the first term of `Ξ_{y_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiYConvention {
    /// `28 q_{k+1}`, the default.
    #[default]
    NextLevel,
    /// `28 q_k`, the alternative reading.
    SameLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MreldBoundInputs<T> {
    pub levels: Vec<LevelConstants<T>>,
    pub rho: T,
    pub d: usize,
    pub two_components: bool,
    pub xi_y: XiYConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundInputs<T> {
    Reld(ReldBoundInputs<T>),
    Mreld(MreldBoundInputs<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBound<T> {
    pub kappa: LogScalar<T>,
    pub argmax_term: BindingTerm,
    /// Every branch of the outer max, in evaluation order.
    pub terms: Vec<(BindingTerm, LogScalar<T>)>,
    pub inputs: BoundInputs<T>,
    pub alpha: Option<T>,
    pub gamma: Option<T>,
    pub variant: BoundVariant,
    /// How ambiguous parts of the printed formula were read.
    pub notes: Vec<String>,
}

fn argmax<T: Real>(terms: &[(BindingTerm, LogScalar<T>)]) -> (BindingTerm, LogScalar<T>) {
    let mut best = terms[0];
    for t in &terms[1..] {
        if t.1 > best.1 {
            best = *t;
        }
    }
    best
}

/// `log(R/r)` when `d = 1`, else `1`.
fn log_factor<T: Real>(ratio: T, d: usize) -> LogScalar<T> {
    if d == 1 {
        LogScalar::from_real(ratio.ln())
    } else {
        LogScalar::one()
    }
}

fn check_log_positive<T: Real>(name: &'static str, v: LogScalar<T>) -> Result<(), TheoryError> {
    if v.is_positive() && v.ln_abs().is_finite() {
        Ok(())
    } else {
        Err(TheoryError::InvalidInput { name, value: v.to_real().as_f64(), reason: "must be positive and finite" })
    }
}

/// Poincaré constant of ReLD:
/// `κ = max{3(56A+1)q, (3/τ)(57Q + 14aA R^{d+1}/r^{d-1} (log R/r)^{1[d=1]}), (7aA/ρ)(R/r)^d}`.
pub fn kappa_reld_bound<T: Real>(inp: ReldBoundInputs<T>) -> Result<GapBound<T>, TheoryError> {
    check_log_positive("q", inp.q)?;
    check_log_positive("a", inp.a)?;
    check_log_positive("A", inp.big_a)?;
    check_log_positive("Q", inp.big_q)?;
    positive("R", inp.big_r)?;
    positive("r", inp.r)?;
    positive("tau", inp.tau)?;
    positive("rho", inp.rho)?;
    if inp.d < 1 {
        return Err(TheoryError::InvalidDimension(inp.d));
    }
    if inp.big_r < inp.r {
        return Err(TheoryError::RadiusOrder { outer: inp.big_r.as_f64(), inner: inp.r.as_f64() });
    }
    let l = LogScalar::from_real;
    let df = T::from_usize_lossy(inp.d);
    let aa = inp.a * inp.big_a;
    let ratio = inp.big_r / inp.r;

    let t1 = l(T::lit(3.0)) * (l(T::lit(56.0)) * inp.big_a + LogScalar::one()) * inp.q;
    let geom = LogScalar::from_ln((df + T::one()) * inp.big_r.ln() - (df - T::one()) * inp.r.ln());
    let t2 = l(T::lit(3.0) / inp.tau)
        * (l(T::lit(57.0)) * inp.big_q + l(T::lit(14.0)) * aa * geom * log_factor(ratio, inp.d));
    let t3 = l(T::lit(7.0) / inp.rho) * aa * LogScalar::from_ln(df * ratio.ln());

    let terms = vec![
        (BindingTerm::Component, t1),
        (BindingTerm::Temperature, t2),
        (BindingTerm::Exchange, t3),
    ];
    let (arg, kappa) = argmax(&terms);
    Ok(GapBound {
        kappa,
        argmax_term: arg,
        terms,
        inputs: BoundInputs::Reld(inp),
        alpha: None,
        gamma: None,
        variant: BoundVariant::Reld,
        notes: vec!["kappa is the Poincare constant: var(f) <= kappa * E(f)".into()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiConstants<T> {
    pub xi_x: LogScalar<T>,
    pub xi_y: LogScalar<T>,
    pub xi_e: LogScalar<T>,
}

/// `Ξ_x = 28 q_k a_{k+1}`,
/// `Ξ_y = 28 q_y + 7 r_{k+1}^{d+1}/r_k^{d-1} a_k a_{k+1} (log r_{k+1}/r_k)^{1[d=1]}`,
/// `Ξ_e = 7 (r_{k+1}/r_k)^d a_k a_{k+1}`.
///
/// `q_y` is normally `q_{k+1}`; pass `q_k` for the other reading.
pub fn xi_constants<T: Real>(
    q_k: LogScalar<T>,
    q_y: LogScalar<T>,
    a_k: LogScalar<T>,
    a_k1: LogScalar<T>,
    r_k: T,
    r_k1: T,
    d: usize,
) -> Result<XiConstants<T>, TheoryError> {
    positive("r_k", r_k)?;
    positive("r_k1", r_k1)?;
    if d < 1 {
        return Err(TheoryError::InvalidDimension(d));
    }
    if r_k1 < r_k {
        return Err(TheoryError::RadiusOrder { outer: r_k1.as_f64(), inner: r_k.as_f64() });
    }
    let l = LogScalar::from_real;
    let df = T::from_usize_lossy(d);
    let aa = a_k * a_k1;
    let ratio = r_k1 / r_k;
    let geom = LogScalar::from_ln((df + T::one()) * r_k1.ln() - (df - T::one()) * r_k.ln());
    Ok(XiConstants {
        xi_x: l(T::lit(28.0)) * q_k * a_k1,
        xi_y: l(T::lit(28.0)) * q_y + l(T::lit(7.0)) * geom * aa * log_factor(ratio, d),
        xi_e: l(T::lit(7.0)) * LogScalar::from_ln(df * ratio.ln()) * aa,
    })
}

/// `Σ_{j=lo}^{hi} base^j`, empty when `lo > hi`.
fn geometric_sum<T: Real>(base: T, lo: i64, hi: i64) -> LogScalar<T> {
    if lo > hi {
        return LogScalar::zero();
    }
    let lb = LogScalar::from_real(base);
    (lo..=hi).map(|j| lb.powf(T::lit(j as f64))).sum()
}

/// Poincaré constant of mReLD for a given Hölder split.
///
/// The inner sums `Σ_{h=2}^{k-2} (4α)^{k-h+1}` and `Σ_{h=0}^{k} (4α)^{k-h+2}`
/// are evaluated literally: `h` enters through the exponent, and the first
/// sum is empty for `k < 4`.
pub fn kappa_mreld_bound<T: Real>(inp: MreldBoundInputs<T>, alpha: T, gamma: T) -> Result<GapBound<T>, TheoryError> {
    if !(alpha > T::one()) || !alpha.is_finite() {
        return Err(TheoryError::InvalidInput { name: "alpha", value: alpha.as_f64(), reason: "must exceed 1" });
    }
    if !(gamma > T::one()) || !gamma.is_finite() {
        return Err(TheoryError::InvalidInput { name: "gamma", value: gamma.as_f64(), reason: "must exceed 1" });
    }
    if (alpha.recip() + gamma.recip() - T::one()).abs().as_f64() > 1e-12 {
        return Err(TheoryError::InvalidInput {
            name: "gamma",
            value: gamma.as_f64(),
            reason: "1/alpha + 1/gamma must equal 1",
        });
    }
    let n = inp.levels.len();
    if n < 2 {
        return Err(TheoryError::MalformedLevels("need at least two levels (K >= 1)".into()));
    }
    if inp.d < 1 {
        return Err(TheoryError::InvalidDimension(inp.d));
    }
    positive("rho", inp.rho)?;
    for (k, lv) in inp.levels.iter().enumerate() {
        check_log_positive("q_k", lv.q)?;
        check_log_positive("a_k", lv.a)?;
        positive("r_k", lv.r)?;
        positive("tau_k", lv.tau)?;
        if k > 0 && lv.r < inp.levels[k - 1].r {
            return Err(TheoryError::RadiusOrder { outer: lv.r.as_f64(), inner: inp.levels[k - 1].r.as_f64() });
        }
    }
    let xis = (0..n - 1)
        .map(|k| {
            let (lo, hi) = (&inp.levels[k], &inp.levels[k + 1]);
            let q_y = match inp.xi_y {
                XiYConvention::NextLevel => hi.q,
                XiYConvention::SameLevel => lo.q,
            };
            xi_constants(lo.q, q_y, lo.a, hi.a, lo.r, hi.r, inp.d)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let l = LogScalar::from_real;
    let (base, x_coef) = if inp.two_components {
        (alpha, T::lit(2.0) * alpha * gamma)
    } else {
        (T::lit(4.0) * alpha, T::lit(8.0) * alpha * gamma)
    };
    let two_gamma = l(T::lit(2.0) * gamma);
    let three = l(T::lit(3.0));
    let mut terms = Vec::with_capacity(2 * (n - 1));
    for k in 0..n - 1 {
        let lv = &inp.levels[k];
        let xi_y_prev = if k == 0 { LogScalar::zero() } else { xis[k - 1].xi_y };
        let xi = &xis[k];
        let ki = k as i64;
        // Σ_{h=2}^{k-2} base^{k-h+1} = Σ_{j=3}^{k-1} base^j
        let s1 = geometric_sum(base, 3, ki - 1);
        let inner = l(x_coef) * xi.xi_x + two_gamma * xi_y_prev;
        let tail = l(x_coef + T::lit(2.0) * gamma) * xi.xi_x + two_gamma * xi_y_prev + l(T::lit(2.0)) * lv.q;
        let diffusion = three / l(lv.tau) * (s1 * inner + tail);
        // Σ_{h=0}^{k} base^{k-h+2} = Σ_{j=2}^{k+2} base^j
        let s2 = geometric_sum(base, 2, ki + 2);
        let exchange = three / l(inp.rho) * s2 * l(gamma) * xi.xi_e;
        terms.push((BindingTerm::LevelDiffusion { level: k }, diffusion));
        terms.push((BindingTerm::LevelExchange { level: k }, exchange));
    }
    let (arg, kappa) = argmax(&terms);
    let mut notes = vec![
        "kappa is the Poincare constant: var(f) <= kappa * E(f)".to_string(),
        "inner sums over h evaluated literally with h in the exponent; sum_{h=2}^{k-2} is empty for k < 4".to_string(),
        "Xi_{y,-1} = 0".to_string(),
    ];
    notes.push(match inp.xi_y {
        XiYConvention::NextLevel => "Xi_y first term uses q_{k+1}".to_string(),
        XiYConvention::SameLevel => "Xi_y first term uses q_k".to_string(),
    });
    let variant = if inp.two_components { BoundVariant::MreldI2 } else { BoundVariant::MreldGeneral };
    Ok(GapBound {
        kappa,
        argmax_term: arg,
        terms,
        inputs: BoundInputs::Mreld(inp),
        alpha: Some(alpha),
        gamma: Some(gamma),
        variant,
        notes,
    })
}

/// Default split `α = γ = 2`.
pub fn kappa_mreld_bound_default<T: Real>(inp: MreldBoundInputs<T>) -> Result<GapBound<T>, TheoryError> {
    kappa_mreld_bound(inp, T::lit(2.0), T::lit(2.0))
}

/// Minimizes the mReLD bound over `α ∈ (1, 10]` by a log-spaced grid
/// followed by golden-section refinement on `ln κ`.
pub fn optimize_holder<T: Real>(inp: MreldBoundInputs<T>) -> Result<GapBound<T>, TheoryError> {
    let eval = |a: f64| -> Result<GapBound<T>, TheoryError> {
        let alpha = T::lit(a);
        let gamma = alpha / (alpha - T::one());
        kappa_mreld_bound(inp.clone(), alpha, gamma)
    };
    let grid: Vec<f64> = (1..=64).map(|i| 1.0 + 9.0 * (i as f64 / 64.0).powi(2)).collect();
    let mut best_i = 0;
    let mut best = eval(grid[0])?;
    for (i, &a) in grid.iter().enumerate().skip(1) {
        let b = eval(a)?;
        if b.kappa < best.kappa {
            best = b;
            best_i = i;
        }
    }
    let mut lo = if best_i == 0 { 1.0 + 1e-9 } else { grid[best_i - 1] };
    let mut hi = if best_i + 1 < grid.len() { grid[best_i + 1] } else { 10.0 };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if eval(m1)?.kappa < eval(m2)?.kappa {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let refined = eval(0.5 * (lo + hi))?;
    let mut out = if refined.kappa < best.kappa { refined } else { best };
    out.notes.push("alpha minimized over (1, 10]".into());
    Ok(out)
}

/// Lower bound on the Langevin Poincaré constant for the two-mode mixture
/// of `N(±m, ε² I)`: `(ε⁴/(80‖m‖²)) exp(‖m‖²/(64ε²))`.
pub fn ld_lower_bound_bimodal<T: Real>(eps: T, m_norm: T, d: usize) -> Result<LogScalar<T>, TheoryError> {
    positive("eps", eps)?;
    positive("m_norm", m_norm)?;
    if d < 1 {
        return Err(TheoryError::InvalidDimension(d));
    }
    let threshold = m_norm / (T::lit(16.0) * T::from_usize_lossy(d).sqrt());
    if eps > threshold {
        return Err(TheoryError::EpsAboveThreshold { eps: eps.as_f64(), threshold: threshold.as_f64() });
    }
    let m2 = m_norm * m_norm;
    let e2 = eps * eps;
    Ok(LogScalar::from_ln((e2 * e2 / (T::lit(80.0) * m2)).ln() + m2 / (T::lit(64.0) * e2)))
}

/// Order of the single-auxiliary bound:
/// `max{d l_M², (1/τ) d M l_m (M/l_m)^d, (1/ρ)(M/l_m)^d}` without constants.
pub fn reld_order<T: Real>(l_min: T, l_max: T, m: T, d: usize, tau: T, rho: T) -> LogScalar<T> {
    let df = T::from_usize_lossy(d);
    let l = LogScalar::from_real;
    let vol = LogScalar::from_ln(df * (m / l_min).ln());
    let t1 = l(df * l_max * l_max);
    let t2 = l(df * m * l_min / tau) * vol;
    let t3 = vol / l(rho);
    t1.max(t2).max(t3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> LogScalar<f64> {
        LogScalar::one()
    }

    fn unit_inputs(tau: f64, rho: f64) -> ReldBoundInputs<f64> {
        ReldBoundInputs { q: one(), a: one(), big_a: one(), big_q: one(), big_r: 2.0, r: 1.0, d: 2, tau, rho }
    }

    #[test]
    fn reld_worked_example() {
        let b = kappa_reld_bound(unit_inputs(1.0, 1.0)).unwrap();
        let v: Vec<f64> = b.terms.iter().map(|t| t.1.to_real()).collect();
        assert!((v[0] - 171.0).abs() < 1e-10);
        assert!((v[1] - 507.0).abs() < 1e-10);
        assert!((v[2] - 28.0).abs() < 1e-10);
        assert_eq!(b.argmax_term, BindingTerm::Temperature);
        assert!((b.kappa.to_real() - 507.0).abs() < 1e-10);
    }

    #[test]
    fn reld_large_rates_leave_component_term() {
        let b = kappa_reld_bound(unit_inputs(1e12, 1e12)).unwrap();
        assert_eq!(b.argmax_term, BindingTerm::Component);
        assert!((b.kappa.to_real() - 171.0).abs() < 1e-9);
    }

    #[test]
    fn reld_rejects_inverted_radii() {
        let mut inp = unit_inputs(1.0, 1.0);
        inp.big_r = 0.5;
        assert!(matches!(kappa_reld_bound(inp), Err(TheoryError::RadiusOrder { .. })));
        let mut inp = unit_inputs(1.0, 1.0);
        inp.tau = 0.0;
        assert!(kappa_reld_bound(inp).is_err());
    }

    #[test]
    fn reld_one_dimensional_log_factor() {
        let r = 1.5;
        let inp = ReldBoundInputs { big_r: std::f64::consts::E * r, r, d: 1, ..unit_inputs(1.0, 1.0) };
        let b = kappa_reld_bound(inp).unwrap();
        let expect = 3.0 * (57.0 + 14.0 * (std::f64::consts::E * r).powi(2));
        assert!((b.terms[1].1.to_real() / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xi_examples() {
        let x = xi_constants(one(), one(), one(), one(), 1.0, 1.0, 3).unwrap();
        assert!((x.xi_x.to_real() - 28.0).abs() < 1e-12);
        assert!((x.xi_e.to_real() - 7.0).abs() < 1e-12);
        let y = xi_constants(one(), one(), one(), one(), 1.0, 2.0, 2).unwrap();
        assert!((y.xi_y.to_real() - 84.0).abs() < 1e-12);
        assert!(xi_constants(one(), one(), one(), one(), 2.0, 1.0, 2).is_err());
    }

    fn unit_levels(k: usize, two: bool) -> MreldBoundInputs<f64> {
        MreldBoundInputs {
            levels: vec![LevelConstants { q: one(), a: one(), r: 1.0, tau: 1.0 }; k + 1],
            rho: 1.0,
            d: 1,
            two_components: two,
            xi_y: XiYConvention::NextLevel,
        }
    }

    #[test]
    fn mreld_single_step_hand_value() {
        let b = kappa_mreld_bound_default(unit_levels(1, true)).unwrap();
        // D_0 = 3((2αγ + 2γ)·28 + 2) = 1014, E_0 = 3α²γ·7 = 168
        assert!((b.terms[0].1.to_real() - 1014.0).abs() < 1e-9);
        assert!((b.terms[1].1.to_real() - 168.0).abs() < 1e-9);
        assert!((b.kappa.to_real() - 1014.0).abs() < 1e-9);
        assert_eq!(b.argmax_term, BindingTerm::LevelDiffusion { level: 0 });
        assert_eq!(b.variant, BoundVariant::MreldI2);
    }

    #[test]
    fn mreld_long_ladder_uses_inner_sum() {
        // k = 4 is the first level whose h-sum is non-empty: one term (4α)^3.
        let b = kappa_mreld_bound_default(unit_levels(5, false)).unwrap();
        let base: f64 = 8.0;
        let xi_x = 28.0;
        let xi_y = 28.0; // unit radii: the log factor vanishes in d = 1
        let d4 = 3.0 * (base.powi(3) * (32.0 * xi_x + 4.0 * xi_y) + (36.0 * xi_x + 4.0 * xi_y + 2.0));
        let got = b.terms.iter().find(|t| t.0 == BindingTerm::LevelDiffusion { level: 4 }).unwrap().1;
        assert!((got.to_real() / d4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mreld_validation() {
        assert!(kappa_mreld_bound(unit_levels(1, true), 1.0, 2.0).is_err());
        assert!(kappa_mreld_bound(unit_levels(1, true), 3.0, 2.0).is_err());
        assert!(kappa_mreld_bound_default(unit_levels(0, true)).is_err());
        let mut inp = unit_levels(2, true);
        inp.levels[2].r = 0.5;
        assert!(matches!(kappa_mreld_bound_default(inp), Err(TheoryError::RadiusOrder { .. })));
    }

    #[test]
    fn holder_optimum_no_worse_than_default() {
        let inp = unit_levels(3, false);
        let d = kappa_mreld_bound_default(inp.clone()).unwrap();
        let o = optimize_holder(inp).unwrap();
        assert!(o.kappa <= d.kappa);
        let a = o.alpha.unwrap();
        assert!(a > 1.0 && a <= 10.0);
    }

    #[test]
    fn ld_lower_bound_examples() {
        let b = ld_lower_bound_bimodal(0.05f64, 1.0, 1).unwrap();
        assert!((b.to_real() / 4.047e-5 - 1.0).abs() < 1e-3);
        let b = ld_lower_bound_bimodal(0.02f64, 1.0, 1).unwrap();
        assert!((b.ln_abs() - ((1.6e-7f64 / 80.0).ln() + 1.0 / (64.0 * 4e-4))).abs() < 1e-12);
        assert!((b.ln_abs() - 19.01).abs() < 0.05);
        match ld_lower_bound_bimodal(0.1f64, 1.0, 1) {
            Err(TheoryError::EpsAboveThreshold { threshold, .. }) => assert!((threshold - 0.0625).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }
}
