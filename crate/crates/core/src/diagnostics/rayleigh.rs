//! Rayleigh quotients `var(f) / ℰ(f)`: lower bounds on the Poincaré
//! constant for a chosen test function.

use super::quadrature::integrate;
use super::test_function::TestFunction;
use super::{DiagnosticsError, EstimateMethod, GapEstimate};
use crate::densities::{MixtureDensity, Target};
use crate::dynamics::LevelDensity;
use crate::scalar::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Weight of the exchange term in the carré du champ: `½ρ` or `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeConvention {
    #[default]
    Half,
    Full,
}

impl ExchangeConvention {
    fn factor(self) -> f64 {
        match self {
            ExchangeConvention::Half => 0.5,
            ExchangeConvention::Full => 1.0,
        }
    }
}

pub enum Generator<'a, T: Real> {
    /// `Γ(f) = ‖∇f‖²` under `π`.
    Langevin,
    /// `Γ(f) = ‖∇_x f‖² + τ‖∇_y f‖² + cρ s(x, y)(f(y, x) - f(x, y))²` under `π × π^y`.
    ReplicaExchange {
        piy: &'a LevelDensity<T>,
        tau: f64,
        rho: f64,
        convention: ExchangeConvention,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum RayleighEstimator {
    /// Adaptive quadrature, `d = 1` only. Ranges default to the density
    /// support boxes.
    Quadrature1d {
        x_range: Option<(f64, f64)>,
        y_range: Option<(f64, f64)>,
        tol: f64,
    },
    /// Exact sampling of both factors, in 20 batches for the SE.
    MonteCarlo { n: usize, seed: u64 },
}

impl RayleighEstimator {
    pub fn quadrature() -> Self {
        RayleighEstimator::Quadrature1d { x_range: None, y_range: None, tol: 1e-10 }
    }
}

fn eval_log<T: Real, D: Target<T> + ?Sized>(d: &D, x: &[f64]) -> f64 {
    let xt: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
    d.log_density_unchecked(&xt).as_f64()
}

fn default_range<T: Real>(density: &LevelDensity<T>) -> Option<(f64, f64)> {
    match density {
        LevelDensity::Mixture(m) => {
            let (a, b) = m.support_interval();
            Some((a.as_f64(), b.as_f64()))
        }
        LevelDensity::Tempered(t) => {
            let base = t.base();
            let widen = 10.0 * base.max_width().as_f64() / t.beta().as_f64().sqrt();
            let mut half = base.mode_bound().as_f64() + widen;
            if let Some(m) = t.regularizer() {
                half = half.min(base.mode_bound().as_f64() + 12.0 * m.as_f64());
            }
            Some((-half, half))
        }
        LevelDensity::Gaussian(g) => {
            let s = 12.0 * g.scale().as_f64();
            Some((-s, s))
        }
        LevelDensity::Custom(_) => None,
    }
}

/// Normalized density on an interval, by quadrature of `exp(log π - shift)`.
struct Normalized<'a, T: Real> {
    density: &'a dyn Target<T>,
    shift: f64,
    log_z: f64,
}

impl<'a, T: Real> Normalized<'a, T> {
    fn new(density: &'a dyn Target<T>, range: (f64, f64), breaks: &[f64], tol: f64) -> Result<Self, DiagnosticsError> {
        let probe = breaks
            .iter()
            .chain([range.0, range.1, 0.5 * (range.0 + range.1)].iter())
            .map(|&x| eval_log::<T, _>(density, &[x]))
            .fold(f64::NEG_INFINITY, f64::max);
        let shift = if probe.is_finite() { probe } else { 0.0 };
        let z = integrate(|x| (eval_log::<T, _>(density, &[x]) - shift).exp(), range.0, range.1, 0.0, tol, breaks)?;
        if !(z.value > 0.0) {
            return Err(DiagnosticsError::Numerical("density integrates to zero on the range".into()));
        }
        Ok(Self { density, shift, log_z: z.value.ln() })
    }

    fn pdf(&self, x: f64) -> f64 {
        (eval_log::<T, _>(self.density, &[x]) - self.shift - self.log_z).exp()
    }
}

/// `κ̂_f = var(f) / E[Γ(f)]`.
pub fn rayleigh_kappa<T: Real>(
    pi: &MixtureDensity<T>,
    generator: &Generator<'_, T>,
    f: &dyn TestFunction,
    estimator: RayleighEstimator,
) -> Result<GapEstimate, DiagnosticsError> {
    let (num, den, se, n_eff) = match estimator {
        RayleighEstimator::Quadrature1d { x_range, y_range, tol } => {
            let (n, d) = quadrature_terms(pi, generator, f, x_range, y_range, tol)?;
            (n, d, None, None)
        }
        RayleighEstimator::MonteCarlo { n, seed } => {
            let (nu, de, se) = monte_carlo_terms(pi, generator, f, n, seed)?;
            (nu, de, Some(se), Some(n as f64))
        }
    };
    if !(den > 0.0) {
        return Err(DiagnosticsError::ZeroDirichletForm);
    }
    let kappa = num / den;
    let ci = match se {
        Some(s) => (kappa - 1.96 * s, kappa + 1.96 * s),
        None => (kappa, kappa),
    };
    let params = match generator {
        Generator::Langevin => serde_json::json!({"generator": "langevin"}),
        Generator::ReplicaExchange { piy, tau, rho, convention } => serde_json::json!({
            "generator": "replica_exchange",
            "piy": piy.describe(),
            "tau": tau,
            "rho": rho,
            "convention": convention,
        }),
    };
    Ok(GapEstimate {
        kappa_hat: kappa,
        method: EstimateMethod::Rayleigh,
        ci,
        confidence: 0.95,
        se,
        test_function: f.describe(),
        n_effective: n_eff,
        numerator: Some(num),
        denominator: Some(den),
        params: serde_json::json!({"estimator": estimator, "process": params}),
    })
}

fn quadrature_terms<T: Real>(
    pi: &MixtureDensity<T>,
    generator: &Generator<'_, T>,
    f: &dyn TestFunction,
    x_range: Option<(f64, f64)>,
    y_range: Option<(f64, f64)>,
    tol: f64,
) -> Result<(f64, f64), DiagnosticsError> {
    if pi.dim() != 1 {
        return Err(DiagnosticsError::InvalidParameter("quadrature estimator needs d = 1".into()));
    }
    let (a, b) = pi.support_interval();
    let xr = x_range.unwrap_or((a.as_f64(), b.as_f64()));
    let mut breaks: Vec<f64> = pi.modes().iter().map(|m| m[0].as_f64()).collect();
    breaks.push(0.0);
    let px = Normalized::new(pi as &dyn Target<T>, xr, &breaks, tol * 1e-2)?;
    let mut g = [0.0];
    let empty: [f64; 1] = [0.0];

    match generator {
        Generator::Langevin => {
            let mean = integrate(|x| px.pdf(x) * f.eval(&[x], &empty), xr.0, xr.1, tol * 1e-3, tol, &breaks)?.value;
            let var = integrate(|x| px.pdf(x) * (f.eval(&[x], &empty) - mean).powi(2), xr.0, xr.1, tol * 1e-3, tol, &breaks)?.value;
            let den = integrate(
                |x| {
                    f.grad_x(&[x], &empty, &mut g);
                    px.pdf(x) * g[0] * g[0]
                },
                xr.0,
                xr.1,
                tol * 1e-3,
                tol,
                &breaks,
            )?
            .value;
            Ok((var, den))
        }
        Generator::ReplicaExchange { piy, tau, rho, convention } => {
            if piy.dim() != 1 {
                return Err(DiagnosticsError::InvalidParameter("quadrature estimator needs a 1-d auxiliary density".into()));
            }
            let yr = match y_range.or_else(|| default_range(piy)) {
                Some(r) => r,
                None => return Err(DiagnosticsError::InvalidParameter("custom auxiliary density needs an explicit y range".into())),
            };
            let py = Normalized::new(*piy as &dyn Target<T>, yr, &breaks, tol * 1e-2)?;
            // The exchange term needs both densities at both points, so x and
            // y range over the union box.
            let lo = xr.0.min(yr.0);
            let hi = xr.1.max(yr.1);
            macro_rules! nested {
                ($h:expr) => {
                    nested_integral(&mut $h, lo, hi, tol, &breaks)
                };
            }
            let (px, py) = (&px, &py);
            let (var, grad_term) = if f.depends_on_y() {
                let mean = nested!(|x| {
                    let pxx = px.pdf(x);
                    Box::new(move |y: f64| pxx * py.pdf(y) * f.eval(&[x], &[y]))
                })?;
                let var = nested!(|x| {
                    let pxx = px.pdf(x);
                    Box::new(move |y: f64| pxx * py.pdf(y) * (f.eval(&[x], &[y]) - mean).powi(2))
                })?;
                let grad = nested!(|x| {
                    let pxx = px.pdf(x);
                    Box::new(move |y: f64| {
                        let mut gx = [0.0];
                        let mut gy = [0.0];
                        f.grad_x(&[x], &[y], &mut gx);
                        f.grad_y(&[x], &[y], &mut gy);
                        pxx * py.pdf(y) * (gx[0] * gx[0] + tau * gy[0] * gy[0])
                    })
                })?;
                (var, grad)
            } else {
                let mean = integrate(|x| px.pdf(x) * f.eval(&[x], &empty), xr.0, xr.1, tol * 1e-3, tol, &breaks)?.value;
                let var =
                    integrate(|x| px.pdf(x) * (f.eval(&[x], &empty) - mean).powi(2), xr.0, xr.1, tol * 1e-3, tol, &breaks)?.value;
                let grad = integrate(
                    |x| {
                        f.grad_x(&[x], &empty, &mut g);
                        px.pdf(x) * g[0] * g[0]
                    },
                    xr.0,
                    xr.1,
                    tol * 1e-3,
                    tol,
                    &breaks,
                )?
                .value;
                (var, grad)
            };
            // π(x)π^y(y)s(x,y) = min(π(x)π^y(y), π(y)π^y(x)).
            let exchange = nested!(|x| {
                let (pxx, pyx) = (px.pdf(x), py.pdf(x));
                Box::new(move |y: f64| {
                    let w = (pxx * py.pdf(y)).min(px.pdf(y) * pyx);
                    let diff = f.swap_image(&[x], &[y]) - f.eval(&[x], &[y]);
                    w * diff * diff
                })
            })?;
            Ok((var, grad_term + convention.factor() * rho * exchange))
        }
    }
}

/// `∫∫ h(x)(y) dy dx` over the square `[lo, hi]²`. `h(x)` builds the inner
/// integrand, so factors that depend on x alone are computed once per node.
fn nested_integral<'a>(
    h: &mut dyn FnMut(f64) -> Box<dyn Fn(f64) -> f64 + 'a>,
    lo: f64,
    hi: f64,
    tol: f64,
    breaks: &[f64],
) -> Result<f64, DiagnosticsError> {
    let mut err = None;
    let v = integrate(
        |x| {
            let inner = h(x);
            match integrate(inner, lo, hi, tol * 1e-3, tol, breaks) {
                Ok(r) => r.value,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        },
        lo,
        hi,
        tol * 1e-3,
        tol,
        breaks,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v.value),
    }
}

fn monte_carlo_terms<T: Real>(
    pi: &MixtureDensity<T>,
    generator: &Generator<'_, T>,
    f: &dyn TestFunction,
    n: usize,
    seed: u64,
) -> Result<(f64, f64, f64), DiagnosticsError> {
    const BATCHES: usize = 20;
    if n < 10 * BATCHES {
        return Err(DiagnosticsError::InsufficientData(format!("Monte Carlo estimator needs n >= {}", 10 * BATCHES)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let to64 = |v: Vec<Vec<T>>| -> Vec<Vec<f64>> { v.into_iter().map(|p| p.into_iter().map(|c| c.as_f64()).collect()).collect() };
    let xs = to64(pi.sample_exact(&mut rng, n)?);
    let d = pi.dim();
    let ys: Vec<Vec<f64>> = match generator {
        Generator::Langevin => vec![vec![0.0; d]; n],
        Generator::ReplicaExchange { piy, .. } => match piy {
            LevelDensity::Gaussian(g) => to64(g.sample(&mut rng, n)),
            LevelDensity::Mixture(m) => to64(m.sample_exact(&mut rng, n)?),
            _ => {
                return Err(DiagnosticsError::InvalidParameter(
                    "Monte Carlo estimator needs an exactly samplable auxiliary density".into(),
                ))
            }
        },
    };
    let mut fv = Vec::with_capacity(n);
    let mut gam = Vec::with_capacity(n);
    let mut gx = vec![0.0; d];
    let mut gy = vec![0.0; d];
    for (x, y) in xs.iter().zip(&ys) {
        fv.push(f.eval(x, y));
        f.grad_x(x, y, &mut gx);
        let mut g = gx.iter().map(|v| v * v).sum::<f64>();
        if let Generator::ReplicaExchange { piy, tau, rho, convention } = generator {
            f.grad_y(x, y, &mut gy);
            g += tau * gy.iter().map(|v| v * v).sum::<f64>();
            let lr = eval_log::<T, _>(pi, y) + eval_log::<T, _>(*piy, x) - eval_log::<T, _>(pi, x) - eval_log::<T, _>(*piy, y);
            let s = if lr >= 0.0 { 1.0 } else { lr.exp() };
            let diff = f.swap_image(x, y) - f.eval(x, y);
            g += convention.factor() * rho * s * diff * diff;
        }
        gam.push(g);
    }
    let ratio = |fs: &[f64], gs: &[f64]| -> (f64, f64) {
        let m = fs.iter().sum::<f64>() / fs.len() as f64;
        let v = fs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (fs.len() - 1) as f64;
        (v, gs.iter().sum::<f64>() / gs.len() as f64)
    };
    let (num, den) = ratio(&fv, &gam);
    let b = n / BATCHES;
    let rs: Vec<f64> = (0..BATCHES)
        .map(|i| {
            let (v, e) = ratio(&fv[i * b..(i + 1) * b], &gam[i * b..(i + 1) * b]);
            v / e
        })
        .collect();
    let mr = rs.iter().sum::<f64>() / BATCHES as f64;
    let sd = (rs.iter().map(|r| (r - mr).powi(2)).sum::<f64>() / (BATCHES - 1) as f64).sqrt();
    Ok((num, den, sd / (BATCHES as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{make_gaussian_mixture, GaussianReference};
    use crate::diagnostics::test_function::{Coordinate, CustomTestFunction, SmoothedModeIndicator};
    use std::sync::Arc;

    #[test]
    fn linear_function_on_gaussian() {
        for &eps in &[1.0, 0.5, 0.1] {
            let pi = make_gaussian_mixture(&[1.0f64], &[vec![0.0]], &[eps]).unwrap();
            let e = rayleigh_kappa(&pi, &Generator::Langevin, &Coordinate { index: 0 }, RayleighEstimator::quadrature()).unwrap();
            assert!((e.kappa_hat - eps * eps).abs() < 1e-8, "{eps}: {}", e.kappa_hat);
        }
    }

    #[test]
    fn constant_function_rejected() {
        let pi = make_gaussian_mixture(&[1.0f64], &[vec![0.0]], &[1.0]).unwrap();
        let c = CustomTestFunction {
            name: "1".into(),
            f: Arc::new(|_, _| 1.0),
            gx: Arc::new(|_, _, o| o.iter_mut().for_each(|v| *v = 0.0)),
            gy: Arc::new(|_, _, o| o.iter_mut().for_each(|v| *v = 0.0)),
            uses_y: false,
        };
        assert!(matches!(
            rayleigh_kappa(&pi, &Generator::Langevin, &c, RayleighEstimator::quadrature()),
            Err(DiagnosticsError::ZeroDirichletForm)
        ));
    }

    #[test]
    fn quadrature_agrees_with_monte_carlo() {
        let eps = 0.2;
        let pi = make_gaussian_mixture(&[0.5f64, 0.5], &[vec![-1.0], vec![1.0]], &[eps, eps]).unwrap();
        let piy = LevelDensity::Gaussian(GaussianReference::new(1, 2.0).unwrap());
        let gen = Generator::ReplicaExchange { piy: &piy, tau: 5.0, rho: 5.0, convention: ExchangeConvention::Half };
        let f = SmoothedModeIndicator { axis: vec![1.0], center: vec![0.0], width: eps };
        let q = rayleigh_kappa(&pi, &gen, &f, RayleighEstimator::quadrature()).unwrap();
        let m = rayleigh_kappa(&pi, &gen, &f, RayleighEstimator::MonteCarlo { n: 1_000_000, seed: 1 }).unwrap();
        let se = m.se.unwrap();
        assert!((q.kappa_hat - m.kappa_hat).abs() < 3.0 * se, "quad {} mc {} se {}", q.kappa_hat, m.kappa_hat, se);
    }
}
