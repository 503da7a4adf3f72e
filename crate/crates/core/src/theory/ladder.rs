//! Temperature / swap-rate schedules.

use super::TheoryError;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Scenario<T> {
    /// `β_k = ε^{2k/K}`, `τ_k = ε^{-2k/K}`, `ρ = ε^{-d/K}` with `ε = l_m`.
    Geometric,
    /// `β_k = l_m^{2k/K}`, `τ_k = ρ = l_m^{-α-d/K}` for `k ≥ 1`.
    FlatTop { alpha: T },
    /// `τ_k = β_k⁻¹ = l_m^{-2k/K}`, `ρ = l_m^{-d/K}`; `d ≤ 2`.
    Synchronized,
    /// `τ_k = β_k⁻¹ = l_m^{-2((d-2)/d)^{K-k}}`, `ρ = l_m^{-2}`; `d ≥ 3`.
    HighDim,
    /// User-supplied arrays.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec<T> {
    pub k: usize,
    pub taus: Vec<T>,
    pub betas: Vec<T>,
    pub rho: T,
    pub m: T,
    pub scenario: Scenario<T>,
}

impl<T: Real> LadderSpec<T> {
    pub fn explicit(taus: Vec<T>, betas: Vec<T>, rho: T, m: T) -> Result<Self, TheoryError> {
        let k = taus.len().saturating_sub(1);
        let schedule = Self { k, taus, betas, rho, m, scenario: Scenario::Explicit };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<(), TheoryError> {
        let bad = |msg: String| Err(TheoryError::MalformedLevels(msg));
        if self.k < 1 {
            return bad("ladder needs K >= 1".into());
        }
        if self.taus.len() != self.k + 1 || self.betas.len() != self.k + 1 {
            return bad(format!(
                "expected {} temperatures and inverse temperatures, got {} and {}",
                self.k + 1,
                self.taus.len(),
                self.betas.len()
            ));
        }
        if self.taus[0] != T::one() {
            return bad(format!("tau_0 must be 1, got {}", self.taus[0]));
        }
        if self.betas[0] != T::one() {
            return bad(format!("beta_0 must be 1, got {}", self.betas[0]));
        }
        for k in 1..=self.k {
            if !(self.taus[k] >= self.taus[k - 1]) || !self.taus[k].is_finite() {
                return bad(format!("tau must be nondecreasing and finite (index {k})"));
            }
            if !(self.betas[k] <= self.betas[k - 1] && self.betas[k] > T::zero()) {
                return bad(format!("beta must be nonincreasing in (0, 1] (index {k})"));
            }
        }
        if !(self.rho > T::zero() && self.rho.is_finite()) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.m > T::zero()) {
            return bad(format!("M must be positive, got {}", self.m));
        }
        Ok(())
    }
}

pub fn build_ladder<T: Real>(scenario: Scenario<T>, l_m: T, d: usize, k: usize, m: T) -> Result<LadderSpec<T>, TheoryError> {
    if !(l_m > T::zero() && l_m < T::one()) {
        return Err(TheoryError::InvalidInput { name: "l_m", value: l_m.as_f64(), reason: "must lie in (0, 1)" });
    }
    if k < 1 {
        return Err(TheoryError::MalformedLevels("ladder needs K >= 1".into()));
    }
    if d < 1 {
        return Err(TheoryError::InvalidDimension(d));
    }
    let kf = T::from_usize_lossy(k);
    let df = T::from_usize_lossy(d);
    let two = T::lit(2.0);
    let pw = |e: T| l_m.powf(e);
    let (taus, betas, rho): (Vec<T>, Vec<T>, T) = match scenario {
        Scenario::Geometric => {
            if k >= 2 && d > 2 {
                return Err(TheoryError::ScenarioDimension { scenario: "geometric with K >= 2", d, requirement: "d <= 2" });
            }
            let betas: Vec<T> = (0..=k).map(|i| pw(two * T::from_usize_lossy(i) / kf)).collect();
            let taus = (0..=k).map(|i| pw(-two * T::from_usize_lossy(i) / kf)).collect();
            (taus, betas, pw(-df / kf))
        }
        Scenario::FlatTop { alpha } => {
            if !(alpha >= T::zero() && alpha <= T::one()) {
                return Err(TheoryError::InvalidInput { name: "alpha", value: alpha.as_f64(), reason: "must lie in [0, 1]" });
            }
            let betas = (0..=k).map(|i| pw(two * T::from_usize_lossy(i) / kf)).collect();
            let top = pw(-alpha - df / kf);
            let taus = (0..=k).map(|i| if i == 0 { T::one() } else { top }).collect();
            (taus, betas, top)
        }
        Scenario::Synchronized => {
            if d > 2 {
                return Err(TheoryError::ScenarioDimension { scenario: "synchronized", d, requirement: "d <= 2" });
            }
            let betas: Vec<T> = (0..=k).map(|i| pw(two * T::from_usize_lossy(i) / kf)).collect();
            let taus = betas.iter().map(|b| b.recip()).collect();
            (taus, betas, pw(-df / kf))
        }
        Scenario::HighDim => {
            if d < 3 {
                return Err(TheoryError::ScenarioDimension { scenario: "high_dim", d, requirement: "d >= 3" });
            }
            let ratio = (df - two) / df;
            let betas: Vec<T> = (0..=k)
                .map(|i| if i == 0 { T::one() } else { pw(two * ratio.powi((k - i) as i32)) })
                .collect();
            let taus = betas.iter().map(|b| b.recip()).collect();
            (taus, betas, pw(-two))
        }
        Scenario::Explicit => {
            return Err(TheoryError::MalformedLevels("explicit ladders are built with LadderSpec::explicit".into()))
        }
    };
    let schedule = LadderSpec { k, taus, betas, rho, m, scenario };
    schedule.validate()?;
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_one_betas() {
        let l = build_ladder(Scenario::FlatTop { alpha: 0.5 }, 0.1f64, 1, 2, 2.0).unwrap();
        let want = [1.0, 0.1, 0.01];
        for (b, w) in l.betas.iter().zip(want) {
            assert!((b - w).abs() < 1e-15);
        }
        assert_eq!(l.taus[0], 1.0);
        assert!((l.rho - 0.1f64.powf(-1.0)).abs() < 1e-12);
        assert_eq!(l.taus[1], l.rho);
    }

    #[test]
    fn scenario_three_betas() {
        let l = build_ladder(Scenario::HighDim, 0.1f64, 3, 2, 2.0).unwrap();
        assert!((l.betas[1] - 0.215_443_469).abs() < 1e-8);
        assert!((l.betas[2] - 0.01).abs() < 1e-15);
        assert!((l.rho - 100.0).abs() < 1e-10);
    }

    #[test]
    fn geometric_single_level() {
        let l = build_ladder(Scenario::Geometric, 0.1f64, 1, 1, 2.0).unwrap();
        assert!((l.taus[1] - 100.0).abs() < 1e-10);
        assert!((l.rho - 10.0).abs() < 1e-12);
        assert!(build_ladder(Scenario::Geometric, 0.1f64, 3, 2, 2.0).is_err());
    }

    #[test]
    fn scenario_dimension_checks() {
        assert!(build_ladder(Scenario::Synchronized, 0.1f64, 3, 2, 1.0).is_err());
        assert!(build_ladder(Scenario::HighDim, 0.1f64, 2, 2, 1.0).is_err());
        assert!(build_ladder(Scenario::Synchronized, 1.0f64, 1, 2, 1.0).is_err());
        assert!(build_ladder(Scenario::FlatTop { alpha: 1.5 }, 0.1f64, 1, 2, 1.0).is_err());
    }

    #[test]
    fn explicit_validation() {
        assert!(LadderSpec::explicit(vec![1.0, 5.0], vec![1.0, 0.2], 3.0, 2.0f64).is_ok());
        assert!(LadderSpec::explicit(vec![2.0, 5.0], vec![1.0, 0.2], 3.0, 2.0f64).is_err());
        assert!(LadderSpec::explicit(vec![1.0, 0.5], vec![1.0, 0.2], 3.0, 2.0f64).is_err());
        assert!(LadderSpec::explicit(vec![1.0, 5.0], vec![1.0, 1.2], 3.0, 2.0f64).is_err());
        assert!(LadderSpec::explicit(vec![1.0, 5.0], vec![1.0], 3.0, 2.0f64).is_err());
        assert!(LadderSpec::explicit(vec![1.0, 5.0], vec![1.0, 0.2], 0.0, 2.0f64).is_err());
    }
}
