//! Test functions `f(x, y)` on the (target, auxiliary) product space.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionKind {
    Coordinate,
    ModeIndicatorSmoothed,
    Custom,
}

pub trait TestFunction: Send + Sync {
    fn kind(&self) -> TestFunctionKind;

    fn describe(&self) -> String;

    fn eval(&self, x: &[f64], y: &[f64]) -> f64;

    fn grad_x(&self, x: &[f64], y: &[f64], out: &mut [f64]);

    fn grad_y(&self, x: &[f64], y: &[f64], out: &mut [f64]);

    /// Whether `f` depends on the auxiliary coordinate at all.
    fn depends_on_y(&self) -> bool;

    /// `f(y, x)`, the value after an exchange.
    fn swap_image(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eval(y, x)
    }
}

/// `f(x, y) = x_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate {
    pub index: usize,
}

impl TestFunction for Coordinate {
    fn kind(&self) -> TestFunctionKind {
        TestFunctionKind::Coordinate
    }
    fn describe(&self) -> String {
        format!("x_{}", self.index + 1)
    }
    fn eval(&self, x: &[f64], _y: &[f64]) -> f64 {
        x[self.index]
    }
    fn grad_x(&self, _x: &[f64], _y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[self.index] = 1.0;
    }
    fn grad_y(&self, _x: &[f64], _y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn depends_on_y(&self) -> bool {
        false
    }
}

/// `f(x, y) = tanh(u·(x - c)/ε)`, a smooth stand-in for the indicator of
/// one side of the hyperplane through `c` normal to `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedModeIndicator {
    pub axis: Vec<f64>,
    pub center: Vec<f64>,
    pub width: f64,
}

impl SmoothedModeIndicator {
    /// Axis through modes `a` and `b`, centered at their midpoint.
    pub fn between(a: &[f64], b: &[f64], width: f64) -> Self {
        let diff: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
        let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self {
            axis: diff.iter().map(|v| v / norm).collect(),
            center: a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect(),
            width,
        }
    }

    fn arg(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).zip(&self.axis).map(|((xi, ci), ui)| (xi - ci) * ui).sum::<f64>() / self.width
    }

    /// Value at a single point.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.arg(x).tanh()
    }
}

impl TestFunction for SmoothedModeIndicator {
    fn kind(&self) -> TestFunctionKind {
        TestFunctionKind::ModeIndicatorSmoothed
    }
    fn describe(&self) -> String {
        format!("tanh(u.(x-c)/{}) u={:?} c={:?}", self.width, self.axis, self.center)
    }
    fn eval(&self, x: &[f64], _y: &[f64]) -> f64 {
        self.value(x)
    }
    fn grad_x(&self, x: &[f64], _y: &[f64], out: &mut [f64]) {
        let t = self.arg(x).tanh();
        let s = (1.0 - t * t) / self.width;
        for (o, u) in out.iter_mut().zip(&self.axis) {
            *o = s * u;
        }
    }
    fn grad_y(&self, _x: &[f64], _y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn depends_on_y(&self) -> bool {
        false
    }
}

type Scalar = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type Grad = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;

/// User-supplied closures.
#[derive(Clone)]
pub struct CustomTestFunction {
    pub name: String,
    pub f: Arc<Scalar>,
    pub gx: Arc<Grad>,
    pub gy: Arc<Grad>,
    pub uses_y: bool,
}

impl TestFunction for CustomTestFunction {
    fn kind(&self) -> TestFunctionKind {
        TestFunctionKind::Custom
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.f)(x, y)
    }
    fn grad_x(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        (self.gx)(x, y, out)
    }
    fn grad_y(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        (self.gy)(x, y, out)
    }
    fn depends_on_y(&self) -> bool {
        self.uses_y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_gradient_matches_differences() {
        let f = SmoothedModeIndicator::between(&[-1.0, 0.0], &[1.0, 0.5], 0.3);
        let x = [0.1, 0.2];
        let mut g = [0.0; 2];
        f.grad_x(&x, &[], &mut g);
        let h = 1e-6;
        for j in 0..2 {
            let mut p = x;
            let mut m = x;
            p[j] += h;
            m[j] -= h;
            let fd = (f.value(&p) - f.value(&m)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-6 * g[j].abs().max(1.0));
        }
        assert!(f.value(&[1.0, 0.5]) > 0.99 && f.value(&[-1.0, 0.0]) < -0.99);
    }
}
