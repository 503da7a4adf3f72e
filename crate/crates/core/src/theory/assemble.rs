//! Plugs mixture concavity constants into the ReLD / mReLD bounds.

use super::bounds::{
    kappa_mreld_bound, kappa_reld_bound, optimize_holder, GapBound, LevelConstants, MreldBoundInputs, ReldBoundInputs,
    XiYConvention,
};
use super::certs::{lyapunov_cert_log_concave, tempered_cert};
use super::ladder::LadderSpec;
use super::log_scalar::LogScalar;
use super::piy::{piy_constants, PiYChoice, PiYConstants};
use super::TheoryError;
use crate::densities::Concavity;
use crate::scalar::Real;

/// ReLD bound for a mixture whose components are all `(c, L)`-log-concave.
///
/// Components get `Ly(r, q, a)` from the quadratic certificate; `π^y` gets
/// `(R, Q, A)` from `choice`.
pub fn reld_bound_for_mixture<T: Real>(
    cv: Concavity<T>,
    d: usize,
    m: T,
    tau: T,
    rho: T,
    choice: PiYChoice,
    beta: Option<T>,
) -> Result<(GapBound<T>, PiYConstants<T>), TheoryError> {
    let (_, comp) = lyapunov_cert_log_concave(cv.c, cv.l, d)?;
    let aux = piy_constants(choice, m, d, Some(cv), beta)?;
    let bound = kappa_reld_bound(ReldBoundInputs {
        q: comp.q,
        a: comp.a,
        big_a: aux.a,
        big_q: aux.q,
        big_r: aux.radius(),
        r: comp.r,
        d,
        tau,
        rho,
    })?;
    Ok((bound, aux))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HolderSplit {
    #[default]
    Default,
    Optimized,
}

/// mReLD bound for a ladder on a `(c, L)`-log-concave mixture with minimum
/// weight `p0`.
///
/// Level 0 uses the quadratic certificate, levels `1..K-1` the tempered
/// certificate at `β_k`, and level `K` the regularized auxiliary constants.
/// Intermediate levels are powers of the mixture rather than mixtures of
/// powers, so the result is inflated by `p0^{-2K}` (Holley–Stroock).
pub fn mreld_bound_for_ladder<T: Real>(
    cv: Concavity<T>,
    d: usize,
    p0: T,
    ladder: &LadderSpec<T>,
    two_components: bool,
    split: HolderSplit,
) -> Result<GapBound<T>, TheoryError> {
    ladder.validate()?;
    if !(p0 > T::zero() && p0 <= T::one()) {
        return Err(TheoryError::InvalidInput { name: "p0", value: p0.as_f64(), reason: "must lie in (0, 1]" });
    }
    let k = ladder.k;
    let mut levels = Vec::with_capacity(k + 1);
    let (_, base) = lyapunov_cert_log_concave(cv.c, cv.l, d)?;
    levels.push(LevelConstants { q: base.q, a: base.a, r: base.r, tau: ladder.taus[0] });
    for i in 1..k {
        let t = tempered_cert(cv.c, cv.l, d, ladder.betas[i])?;
        levels.push(LevelConstants { q: t.q, a: t.a, r: t.r2.sqrt(), tau: ladder.taus[i] });
    }
    let top = piy_constants(PiYChoice::GaussianTempered, ladder.m, d, Some(cv), Some(ladder.betas[k]))?;
    levels.push(LevelConstants { q: top.q, a: top.a, r: top.radius(), tau: ladder.taus[k] });
    let inp = MreldBoundInputs { levels, rho: ladder.rho, d, two_components, xi_y: XiYConvention::NextLevel };
    let mut b = match split {
        HolderSplit::Default => kappa_mreld_bound(inp, T::lit(2.0), T::lit(2.0))?,
        HolderSplit::Optimized => optimize_holder(inp)?,
    };
    let factor = LogScalar::from_real(p0).powf(-T::lit(2.0) * T::from_usize_lossy(k));
    b.kappa = b.kappa * factor;
    b.notes.push(format!("multiplied by p0^(-2K) with p0 = {p0}, K = {k}"));
    Ok(b)
}
