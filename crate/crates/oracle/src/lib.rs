//! Every bound re-evaluated from its closed form in 320-bit arithmetic.
//!
//! The reference formulas here are written out term by term (sums over `h`
//! as loops, ball volumes from the Gamma function) and share no code with
//! `rladder-core`. Each check draws random inputs, evaluates both sides and
//! reports the worst log-scale discrepancy
//! `|ln x - ln x_ref| / max(1, |ln x_ref|)`.

// `!(x > 0)` is the NaN-rejecting form of `x <= 0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use astro_float::{BigFloat, Consts, RoundingMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rladder_core::densities::Concavity;
use rladder_core::theory::*;
use std::cell::RefCell;

const P: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;
macro_rules! lib {
    ($w:ident, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => {
                $w.fail(format!("{}: {e}", stringify!($e)));
                continue;
            }
        }
    };
}

/// Agreement required by [`Check::passed`].
pub const TOLERANCE: f64 = 1e-10;

thread_local! {
    static CC: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

#[derive(Clone, Debug)]
struct H(BigFloat);

fn h(v: f64) -> H {
    H(BigFloat::from_f64(v, P))
}

fn hu(v: usize) -> H {
    h(v as f64)
}

impl H {
    fn add(&self, o: &H) -> H {
        H(self.0.add(&o.0, P, RM))
    }
    fn sub(&self, o: &H) -> H {
        H(self.0.sub(&o.0, P, RM))
    }
    fn mul(&self, o: &H) -> H {
        H(self.0.mul(&o.0, P, RM))
    }
    fn div(&self, o: &H) -> H {
        H(self.0.div(&o.0, P, RM))
    }
    fn ln(&self) -> H {
        CC.with(|c| H(self.0.ln(P, RM, &mut c.borrow_mut())))
    }
    fn exp(&self) -> H {
        CC.with(|c| H(self.0.exp(P, RM, &mut c.borrow_mut())))
    }
    fn sqrt(&self) -> H {
        H(self.0.sqrt(P, RM))
    }
    fn pow(&self, e: &H) -> H {
        self.ln().mul(e).exp()
    }
    fn powi(&self, n: i64) -> H {
        let mut out = h(1.0);
        for _ in 0..n.unsigned_abs() {
            out = out.mul(self);
        }
        if n < 0 {
            h(1.0).div(&out)
        } else {
            out
        }
    }
    fn max(&self, o: &H) -> H {
        if self.0.cmp(&o.0).unwrap_or(0) >= 0 {
            self.clone()
        } else {
            o.clone()
        }
    }
    fn to_f64(&self) -> f64 {
        self.0.to_string().parse().expect("decimal output parses")
    }
}

fn pi() -> H {
    CC.with(|c| H(c.borrow_mut().pi(P, RM)))
}

/// `V_d = π^{d/2} / Γ(d/2 + 1)`.
fn ball_volume(d: usize) -> H {
    let mut gamma = if d.is_multiple_of(2) { h(1.0) } else { pi().sqrt() };
    // Γ(d/2 + 1) = Π (d/2 - j) down to 1 or 1/2
    let mut x = h(d as f64 / 2.0);
    while x.to_f64() > 0.75 {
        gamma = gamma.mul(&x);
        x = x.sub(&h(1.0));
    }
    if d % 2 == 1 {
        gamma = gamma.mul(&h(0.5));
    }
    pi().pow(&h(d as f64 / 2.0)).div(&gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub comparisons: usize,
    pub worst: f64,
    /// Quantity and values at the worst comparison.
    pub worst_at: String,
    /// Library errors on inputs the formula accepts.
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: &'static str, cases: usize) -> Self {
        Self { name, cases, comparisons: 0, worst: 0.0, worst_at: String::new(), failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.worst <= TOLERANCE && self.comparisons > 0
    }

    fn close_ln(&mut self, got_ln: f64, want: &H, what: &str) {
        let want_ln = want.ln().to_f64();
        let err = (got_ln - want_ln).abs() / want_ln.abs().max(1.0);
        self.comparisons += 1;
        if !(err <= self.worst) {
            self.worst = if err.is_nan() { f64::INFINITY } else { err };
            self.worst_at = format!("{what}: ln got {got_ln}, reference {want_ln}");
        }
    }

    fn fail(&mut self, what: String) {
        self.failures.push(what);
    }
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xC0FFEE ^ tag)
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (r.random_range(lo.ln()..hi.ln())).exp()
}

struct Lc {
    r: H,
    q: H,
    a: H,
}

fn oracle_log_concave(c: f64, l: f64, d: usize) -> Lc {
    let (c, l) = (h(c), h(l));
    let dd = hu(d);
    let r = h(3.0).mul(&dd).div(&c).sqrt();
    let q = h(1.0).div(&c).add(&h(9.0).mul(&dd).div(&c).mul(&h(3.0).mul(&dd).mul(&l).div(&c).exp()));
    let a = h(3.0)
        .mul(&dd)
        .mul(&l)
        .div(&h(2.0).mul(&c))
        .exp()
        .mul(&h(4.0).mul(&pi()).div(&h(3.0).mul(&dd)).pow(&h(d as f64 / 2.0)))
        .div(&ball_volume(d));
    Lc { r, q, a }
}

fn oracle_domination(cc: &H, lambda: &H, radius: &H, d: usize) -> H {
    let r2 = radius.mul(radius);
    cc.div(&ball_volume(d).mul(&radius.powi(d as i64)))
        .mul(&lambda.mul(&r2).div(&h(4.0)).exp())
        .mul(&h(4.0).mul(&pi()).div(lambda).pow(&h(d as f64 / 2.0)))
}

fn random_cv(r: &mut ChaCha8Rng) -> (f64, f64, usize) {
    let c = log_uniform(r, 0.1, 100.0);
    let l = c * r.random_range(1.0..4.0);
    (c, l, r.random_range(1..=6))
}

pub fn log_concave_certificate(cases: usize) -> Check {
    let mut w = Check::new("log_concave_certificate", cases);
    let mut r = rng(1);
    for _ in 0..cases {
        let (c, l, d) = random_cv(&mut r);
        let (_, p) = lib!(w, lyapunov_cert_log_concave(c, l, d));
        let o = oracle_log_concave(c, l, d);
        w.close_ln(p.r.ln(), &o.r, "r");
        w.close_ln(p.q.ln_abs(), &o.q, "q");
        w.close_ln(p.a.ln_abs(), &o.a, "a");
    }
    w
}

pub fn domination_from_certificate(cases: usize) -> Check {
    let mut w = Check::new("domination_from_certificate", cases);
    let mut r = rng(2);
    for _ in 0..cases {
        let d = r.random_range(1..=8);
        let lambda = log_uniform(&mut r, 0.01, 100.0);
        let radius = log_uniform(&mut r, 0.1, 10.0);
        let ln_c = r.random_range(0.0..60.0);
        let cert = lib!(w, LyapunovCert::new(lambda, 1.0, vec![0.0; d], radius, LogScalar::from_ln(ln_c)));
        let got = lib!(w, ly_a_from_cert(&cert, d));
        let want = oracle_domination(&h(ln_c).exp(), &h(lambda), &h(radius), d);
        w.close_ln(got.ln_abs(), &want, "a");
    }
    w
}

pub fn tempered_certificate(cases: usize) -> Check {
    let mut w = Check::new("tempered_certificate", cases);
    let mut r = rng(3);
    for _ in 0..cases {
        let (c, l, d) = random_cv(&mut r);
        let beta = r.random_range(0.001..1.0);
        let t = lib!(w, tempered_cert(c, l, d, beta));
        let lambda = h(beta).mul(&h(c));
        let r2 = h(4.0).mul(&hu(d)).div(&lambda);
        let hh = h(2.0).mul(&lambda);
        let cc = h(2.0).mul(&hu(d)).mul(&h(l)).div(&h(c)).exp();
        let q = h(1.0).add(&hh.mul(&r2).mul(&cc).mul(&cc)).div(&lambda);
        let a = oracle_domination(&cc, &lambda, &r2.sqrt(), d);
        w.close_ln(t.lambda.ln(), &lambda, "lambda");
        w.close_ln(t.r2.ln(), &r2, "R^2");
        w.close_ln(t.q.ln_abs(), &q, "q");
        w.close_ln(t.a.ln_abs(), &a, "a");
    }
    w
}

pub fn auxiliary_constants_all_choices(cases: usize) -> Check {
    let mut w = Check::new("auxiliary_constants_all_choices", cases);
    let mut r = rng(4);
    for _ in 0..cases {
        let (c, l, d) = random_cv(&mut r);
        let m = r.random_range(0.5..5.0);
        let cv = Concavity { c, l };
        let (mm, dd, d1) = (h(m * m), hu(d), hu(2 * d + 1));
        let half_d = h(d as f64 / 2.0);
        let vd = ball_volume(d);

        let g = lib!(w, piy_constants(PiYChoice::Gaussian, m, d, None, None));
        w.close_ln(g.r2.ln(), &h(3.0).mul(&mm).mul(&d1), "gaussian R^2");
        let q = h(2.0).mul(&mm).mul(&h(1.0).add(&h(4.5).mul(&d1).mul(&h(12.0).mul(&dd).add(&h(8.0)).exp())));
        w.close_ln(g.q.ln_abs(), &q, "gaussian Q");
        let a = h(2.0).mul(&pi()).div(&h(3.0).mul(&d1)).pow(&half_d).mul(&h(6.0).mul(&dd).add(&h(4.0)).exp()).div(&vd);
        w.close_ln(g.a.ln_abs(), &a, "gaussian A");

        let t = lib!(w, piy_constants(PiYChoice::Tempered, m, d, Some(cv), None));
        let lc2 = h(l).mul(&h(l)).div(&h(c).mul(&h(c)));
        let one_lc2 = h(1.0).add(&lc2);
        let kap = dd.mul(&h(l)).div(&h(c));
        let beta = dd.div(&h(2.0).mul(&mm).mul(&h(c)).add(&h(2.0).mul(&mm).mul(&h(l)).mul(&h(l)).div(&h(c))));
        w.close_ln(t.beta.unwrap().ln(), &beta, "tempered beta");
        w.close_ln(t.r2.ln(), &h(20.0).mul(&mm).mul(&one_lc2), "tempered R^2");
        let q = mm.mul(&one_lc2).mul(&h(4.0).div(&dd).add(&h(100.0).mul(&h(44.0).mul(&kap).exp())));
        w.close_ln(t.q.ln_abs(), &q, "tempered Q");
        let a = h(4.0)
            .mul(&pi())
            .div(&h(5.0).mul(&dd))
            .pow(&half_d)
            .mul(&h(22.0).mul(&kap).add(&h(1.25).mul(&dd)).exp())
            .div(&vd);
        w.close_ln(t.a.ln_abs(), &a, "tempered A");

        let thr = h(1.0).div(&dd.mul(&mm).mul(&h(c)).add(&dd.mul(&mm).mul(&h(l)).mul(&h(l)).div(&h(c))));
        let b = thr.to_f64() * r.random_range(0.01..0.999);
        let gt = lib!(w, piy_constants(PiYChoice::GaussianTempered, m, d, Some(cv), Some(b)));
        w.close_ln(gaussian_tempered_beta_threshold(m, d, cv).ln(), &thr, "gaussian-tempered threshold");
        w.close_ln(gt.r2.ln(), &h(5.0).mul(&mm).mul(&d1), "gaussian-tempered R^2");
        let q = h(2.0).mul(&mm).mul(&h(1.0).add(&h(12.5).mul(&d1).mul(&h(20.0).mul(&dd).add(&h(30.0)).exp())));
        w.close_ln(gt.q.ln_abs(), &q, "gaussian-tempered Q");
        let a = h(8.0).mul(&pi()).div(&h(5.0).mul(&d1)).pow(&half_d).mul(&h(12.0).mul(&dd).add(&h(16.0)).exp()).div(&vd);
        w.close_ln(gt.a.ln_abs(), &a, "gaussian-tempered A");
    }
    w
}

fn ln_factor(ratio: &H, d: usize) -> H {
    if d == 1 {
        ratio.ln()
    } else {
        h(1.0)
    }
}

pub fn single_auxiliary_bound(cases: usize) -> Check {
    let mut w = Check::new("single_auxiliary_bound", cases);
    let mut r = rng(5);
    for _ in 0..cases {
        let d = r.random_range(1..=6);
        let (lq, la, lbq, lba): (f64, f64, f64, f64) =
            (r.random_range(-5.0..40.0), r.random_range(-5.0..40.0), r.random_range(0.0..60.0), r.random_range(0.0..40.0));
        let small_r = log_uniform(&mut r, 0.05, 5.0);
        let big_r = small_r * r.random_range(1.01..20.0);
        let tau = log_uniform(&mut r, 0.01, 1e4);
        let rho = log_uniform(&mut r, 0.01, 1e4);
        let inp = ReldBoundInputs {
            q: LogScalar::from_ln(lq),
            a: LogScalar::from_ln(la),
            big_a: LogScalar::from_ln(lba),
            big_q: LogScalar::from_ln(lbq),
            big_r,
            r: small_r,
            d,
            tau,
            rho,
        };
        let b = lib!(w, kappa_reld_bound(inp));
        let (q, a, ba, bq) = (h(lq).exp(), h(la).exp(), h(lba).exp(), h(lbq).exp());
        let (rr, sr) = (h(big_r), h(small_r));
        let t1 = h(3.0).mul(&h(56.0).mul(&ba).add(&h(1.0))).mul(&q);
        let geom = rr.powi(d as i64 + 1).div(&sr.powi(d as i64 - 1));
        let t2 = h(3.0)
            .div(&h(tau))
            .mul(&h(57.0).mul(&bq).add(&h(14.0).mul(&a).mul(&ba).mul(&geom).mul(&ln_factor(&rr.div(&sr), d))));
        let t3 = h(7.0).mul(&a).mul(&ba).div(&h(rho)).mul(&rr.div(&sr).powi(d as i64));
        for (i, t) in [&t1, &t2, &t3].into_iter().enumerate() {
            w.close_ln(b.terms[i].1.ln_abs(), t, "ReLD term");
        }
        w.close_ln(b.kappa.ln_abs(), &t1.max(&t2).max(&t3), "ReLD kappa");
    }
    w
}

fn oracle_mreld(levels: &[(f64, f64, f64, f64)], rho: f64, d: usize, alpha: f64, gamma: f64, two: bool) -> H {
    // levels: (ln q, ln a, r, tau)
    let q: Vec<H> = levels.iter().map(|l| h(l.0).exp()).collect();
    let a: Vec<H> = levels.iter().map(|l| h(l.1).exp()).collect();
    let r: Vec<H> = levels.iter().map(|l| h(l.2)).collect();
    let kk = levels.len() - 1;
    let xi_x = |k: usize| h(28.0).mul(&q[k]).mul(&a[k + 1]);
    let xi_y = |k: usize| {
        let ratio = r[k + 1].div(&r[k]);
        h(28.0)
            .mul(&q[k + 1])
            .add(&h(7.0).mul(&r[k + 1].powi(d as i64 + 1)).div(&r[k].powi(d as i64 - 1)).mul(&a[k]).mul(&a[k + 1]).mul(&ln_factor(&ratio, d)))
    };
    let xi_e = |k: usize| h(7.0).mul(&r[k + 1].div(&r[k]).powi(d as i64)).mul(&a[k]).mul(&a[k + 1]);
    let (al, ga) = (h(alpha), h(gamma));
    let (base, coef) = if two { (al.clone(), h(2.0).mul(&al).mul(&ga)) } else { (h(4.0).mul(&al), h(8.0).mul(&al).mul(&ga)) };
    let mut best = h(0.0);
    for k in 0..kk {
        let tau = h(levels[k].3);
        let xy_prev = if k == 0 { h(0.0) } else { xi_y(k - 1) };
        let mut diffusion = h(0.0);
        let mut hh = 2i64;
        while hh <= k as i64 - 2 {
            let term = h(3.0)
                .mul(&base.powi(k as i64 - hh + 1))
                .div(&tau)
                .mul(&coef.mul(&xi_x(k)).add(&h(2.0).mul(&ga).mul(&xy_prev)));
            diffusion = diffusion.add(&term);
            hh += 1;
        }
        diffusion = diffusion.add(
            &h(3.0).div(&tau).mul(
                &coef.add(&h(2.0).mul(&ga)).mul(&xi_x(k)).add(&h(2.0).mul(&ga).mul(&xy_prev)).add(&h(2.0).mul(&q[k])),
            ),
        );
        let mut exchange = h(0.0);
        for hh in 0..=k as i64 {
            exchange = exchange.add(&h(3.0).mul(&base.powi(k as i64 - hh + 2)).div(&h(rho)).mul(&ga).mul(&xi_e(k)));
        }
        best = best.max(&diffusion).max(&exchange);
    }
    best
}

pub fn multi_level_bound_both_variants(cases: usize) -> Check {
    let mut w = Check::new("multi_level_bound_both_variants", cases);
    let mut r = rng(6);
    for case in 0..cases {
        let d = r.random_range(1..=4);
        let n = r.random_range(2..=7);
        let mut radius = log_uniform(&mut r, 0.05, 2.0);
        let mut raw = Vec::with_capacity(n);
        for _ in 0..n {
            raw.push((r.random_range(-5.0..40.0), r.random_range(-5.0..30.0), radius, log_uniform(&mut r, 0.5, 1e4)));
            radius *= r.random_range(1.0..4.0);
        }
        let rho = log_uniform(&mut r, 0.01, 1e4);
        let alpha = 1.0 + log_uniform(&mut r, 0.01, 9.0);
        let gamma = alpha / (alpha - 1.0);
        let two = case % 2 == 0;
        let inp = MreldBoundInputs {
            levels: raw.iter().map(|&(q, a, r, tau)| LevelConstants { q: LogScalar::from_ln(q), a: LogScalar::from_ln(a), r, tau }).collect(),
            rho,
            d,
            two_components: two,
            xi_y: XiYConvention::NextLevel,
        };
        let b = lib!(w, kappa_mreld_bound(inp, alpha, gamma));
        w.close_ln(b.kappa.ln_abs(), &oracle_mreld(&raw, rho, d, alpha, gamma, two), "mReLD kappa");
    }
    w
}

pub fn ladder_schedules(cases: usize) -> Check {
    let mut w = Check::new("ladder_schedules", cases);
    let mut r = rng(7);
    for _ in 0..cases {
        let lm = r.random_range(0.01..0.9);
        let k = r.random_range(1..=6);
        let m = 2.0;
        let lh = h(lm);
        let kf = k as f64;
        let check = |w: &mut Check, schedule: &LadderSpec<f64>, taus: Vec<H>, betas: Vec<H>, rho: H| {
            for i in 0..=k {
                w.close_ln(schedule.taus[i].ln(), &taus[i], "tau_k");
                w.close_ln(schedule.betas[i].ln(), &betas[i], "beta_k");
            }
            w.close_ln(schedule.rho.ln(), &rho, "rho");
        };
        let d = r.random_range(1..=2);
        let geo = |s: f64| (0..=k).map(|i| lh.pow(&h(s * i as f64 / kf))).collect::<Vec<_>>();
        let s2 = lib!(w, build_ladder(Scenario::Synchronized, lm, d, k, m));
        check(&mut w, &s2, geo(-2.0), geo(2.0), lh.pow(&h(-(d as f64) / kf)));
        if k == 1 || d <= 2 {
            let t = lib!(w, build_ladder(Scenario::Geometric, lm, d, k, m));
            check(&mut w, &t, geo(-2.0), geo(2.0), lh.pow(&h(-(d as f64) / kf)));
        }
        let alpha = r.random_range(0.0..1.0);
        let s1 = lib!(w, build_ladder(Scenario::FlatTop { alpha }, lm, d, k, m));
        let top = lh.pow(&h(-alpha - d as f64 / kf));
        let taus = (0..=k).map(|i| if i == 0 { h(1.0) } else { top.clone() }).collect();
        check(&mut w, &s1, taus, geo(2.0), top.clone());
        let d3 = r.random_range(3..=8);
        let s3 = lib!(w, build_ladder(Scenario::HighDim, lm, d3, k, m));
        let ratio = h((d3 as f64 - 2.0) / d3 as f64);
        let betas: Vec<H> =
            (0..=k).map(|i| if i == 0 { h(1.0) } else { lh.pow(&h(2.0).mul(&ratio.powi((k - i) as i64))) }).collect();
        let taus = betas.iter().map(|b| h(1.0).div(b)).collect();
        check(&mut w, &s3, taus, betas, lh.pow(&h(-2.0)));
    }
    w
}

pub fn langevin_lower_bound(cases: usize) -> Check {
    let mut w = Check::new("langevin_lower_bound", cases);
    let mut r = rng(8);
    for _ in 0..cases {
        let d = r.random_range(1..=10);
        let m = log_uniform(&mut r, 0.5, 20.0);
        let eps = m / (16.0 * (d as f64).sqrt()) * r.random_range(0.05..1.0);
        let got = lib!(w, ld_lower_bound_bimodal(eps, m, d));
        let (e, mm) = (h(eps), h(m));
        let e2 = e.mul(&e);
        let m2 = mm.mul(&mm);
        let want = e2.mul(&e2).div(&h(80.0).mul(&m2)).mul(&m2.div(&h(64.0).mul(&e2)).exp());
        w.close_ln(got.ln_abs(), &want, "LD lower bound");
    }
    w
}

pub fn assembled_bounds_match_component_oracles(cases: usize) -> Check {
    let mut w = Check::new("assembled_bounds_match_component_oracles", cases);
    let mut r = rng(9);
    for case in 0..cases {
        let (c, l, d) = random_cv(&mut r);
        let m = r.random_range(0.5..4.0);
        let tau = log_uniform(&mut r, 1.0, 1e3);
        let rho = log_uniform(&mut r, 1.0, 1e3);
        let cv = Concavity { c, l };
        let got = reld_bound_for_mixture(cv, d, m, tau, rho, PiYChoice::Gaussian, None);
        let o = oracle_log_concave(c, l, d);
        let (dd, d1, mm) = (hu(d), hu(2 * d + 1), h(m * m));
        let bq = h(2.0).mul(&mm).mul(&h(1.0).add(&h(4.5).mul(&d1).mul(&h(12.0).mul(&dd).add(&h(8.0)).exp())));
        let ba = h(2.0)
            .mul(&pi())
            .div(&h(3.0).mul(&d1))
            .pow(&h(d as f64 / 2.0))
            .mul(&h(6.0).mul(&dd).add(&h(4.0)).exp())
            .div(&ball_volume(d));
        let rr = h(3.0).mul(&mm).mul(&d1).sqrt();
        let t1 = h(3.0).mul(&h(56.0).mul(&ba).add(&h(1.0))).mul(&o.q);
        let geom = rr.powi(d as i64 + 1).div(&o.r.powi(d as i64 - 1));
        let t2 = h(3.0)
            .div(&h(tau))
            .mul(&h(57.0).mul(&bq).add(&h(14.0).mul(&o.a).mul(&ba).mul(&geom).mul(&ln_factor(&rr.div(&o.r), d))));
        let t3 = h(7.0).mul(&o.a).mul(&ba).div(&h(rho)).mul(&rr.div(&o.r).powi(d as i64));
        // The bound needs R >= r; otherwise the library must refuse.
        if rr.to_f64() >= o.r.to_f64() {
            let (b, _) = lib!(w, got);
            w.close_ln(b.kappa.ln_abs(), &t1.max(&t2).max(&t3), &format!("assembled ReLD case {case}"));
        } else {
            if !matches!(got, Err(TheoryError::RadiusOrder { .. })) {
                w.fail(format!("case {case}: R < r accepted"));
            }
        }
    }
    w
}

pub fn log_space_arithmetic(cases: usize) -> Check {
    let mut w = Check::new("log_space_arithmetic", cases);
    let mut r = rng(10);
    let draw = |r: &mut ChaCha8Rng| {
        let ln = r.random_range(-500.0..500.0);
        let neg = r.random_bool(0.5);
        let v = LogScalar::from_ln(ln);
        let hv = h(ln).exp();
        if neg {
            (-v, H(hv.0.neg()))
        } else {
            (v, hv)
        }
    };
    for _ in 0..cases {
        let (a, ha) = draw(&mut r);
        let (b, hb) = draw(&mut r);
        let (c, hc) = draw(&mut r);
        let got = (a + b) * c;
        let want = ha.add(&hb).mul(&hc);
        let want_abs = if want.0.is_negative() { H(want.0.neg()) } else { want.clone() };
        if got.is_positive() != want.0.is_positive() {
            w.fail(format!("sign of ({a:?} + {b:?}) * {c:?}"));
            continue;
        }
        w.close_ln(got.ln_abs(), &want_abs, "(a + b) * c");
    }
    w
}

/// Every check at its default case count, in a fixed order.
pub fn run_all() -> Vec<Check> {
    vec![
        log_concave_certificate(100),
        domination_from_certificate(100),
        tempered_certificate(100),
        auxiliary_constants_all_choices(100),
        single_auxiliary_bound(100),
        multi_level_bound_both_variants(100),
        ladder_schedules(100),
        langevin_lower_bound(100),
        assembled_bounds_match_component_oracles(100),
        log_space_arithmetic(1000),
    ]
}
