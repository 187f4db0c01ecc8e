//! Closed-form optimal parameters and sufficient convergence regions.
//!
//! Every optimum below reduces the quadratic to the one of the optimal GSOR
//! method, so all families share
//! `ρ_opt = (√|μ|max − √|μ|min) / (√|μ|max + √|μ|min)` and `ρ_opt² = 1 − τ₁`.

use std::fmt;

use crate::error::{Error, Result};
use crate::method::{Family, MethodId, MethodParams};
use crate::spectral::{QSign, SpectralBounds};

const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalResult {
    pub params: MethodParams,
    pub rho_opt: f64,
    /// Constraints and choices that shaped the result.
    pub notes: Vec<String>,
    /// Second root of a two-branch formula, when one exists.
    pub alternate: Option<MethodParams>,
}

/// Shared optimal spectral radius.
pub fn optimal_rho(bounds: &SpectralBounds) -> f64 {
    let (lo, hi) = bounds.abs_range();
    (hi.sqrt() - lo.sqrt()) / (hi.sqrt() + lo.sqrt())
}

/// Shared optimal `ω₁` (equivalently `τ₁`).
pub fn optimal_tau1(bounds: &SpectralBounds) -> f64 {
    let (lo, hi) = bounds.abs_range();
    let s = lo.sqrt() + hi.sqrt();
    4.0 * bounds.geometric_mean() / (s * s)
}

fn result(params: MethodParams, bounds: &SpectralBounds, notes: Vec<String>) -> OptimalResult {
    OptimalResult { params, rho_opt: optimal_rho(bounds), notes, alternate: None }
}

fn sign(bounds: &SpectralBounds) -> f64 {
    bounds.q_sign.factor()
}

/// GSOR (`backward = false`) or GBSOR (`backward = true`) optimum for a given `a`.
pub fn optimal_gsor_family(bounds: &SpectralBounds, a: f64, backward: bool) -> Result<OptimalResult> {
    let shift = if backward { 1.0 - a } else { a };
    let g = bounds.geometric_mean();
    // SPD: 1/(shift + g); negative definite: 1/(shift − g)
    let denom = shift + sign(bounds) * g;
    if denom.abs() <= DEGENERACY_TOL {
        return Err(Error::DegenerateA { a, reason: format!("a + sign(Q)·sqrt(mu_min mu_max) vanishes (shift {shift})") });
    }
    let w1 = optimal_tau1(bounds);
    let w2 = 1.0 / denom;
    let params = if backward { MethodParams::gbsor(w1, w2, a) } else { MethodParams::gsor(w1, w2, a) };
    Ok(result(params, bounds, Vec::new()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtrapolatedVariant {
    Gmesor,
    /// `a` is part of the optimum.
    Gesor,
    /// `ω₂` is free.
    Gmebsor { omega2: f64 },
    Gebsor,
}

/// Optima of the extrapolated forward and backward methods.
///
/// `a = None` leaves `a` unpinned: GESOR then returns its own optimal `a`,
/// the other variants use `a = 0`. Pinning `a` for GESOR is infeasible.
pub fn optimal_gmesor_family(
    bounds: &SpectralBounds,
    a: Option<f64>,
    variant: ExtrapolatedVariant,
) -> Result<OptimalResult> {
    let g = bounds.geometric_mean();
    let s = sign(bounds);
    let tau1 = optimal_tau1(bounds);
    match variant {
        ExtrapolatedVariant::Gmesor => {
            let a = a.unwrap_or(0.0);
            let denom = a + s * g;
            if denom.abs() <= DEGENERACY_TOL {
                return Err(Error::DegenerateA { a, reason: "a + sign(Q)·sqrt(mu_min mu_max) vanishes".into() });
            }
            let tau2 = 1.0 / denom;
            Ok(result(MethodParams::gmesor(tau1, tau2, tau2, a), bounds, vec!["omega2 = tau2".into()]))
        }
        ExtrapolatedVariant::Gesor => {
            if let Some(a) = a {
                return Err(Error::Infeasible(format!(
                    "GESOR optimum determines a itself (a_opt = 1/tau - sign(Q)·sqrt(mu_min mu_max)); a = {a} was pinned"
                )));
            }
            let a_opt = 1.0 / tau1 - s * g;
            Ok(result(
                MethodParams::gesor(tau1, tau1, a_opt),
                bounds,
                vec![format!("a_opt = {a_opt}"), "omega2 = tau".into()],
            ))
        }
        ExtrapolatedVariant::Gmebsor { omega2 } => {
            let a = a.unwrap_or(0.0);
            let d = 1.0 - (1.0 - a) * omega2;
            if d.abs() <= DEGENERACY_TOL {
                return Err(Error::DegenerateOmega2 { omega2, reason: format!("(1-a)*omega2 = 1 at a = {a}") });
            }
            let tau2 = s * d / g;
            Ok(result(MethodParams::gmebsor(tau1, tau2, tau1, omega2, a), bounds, vec!["omega1 = tau1".into()]))
        }
        ExtrapolatedVariant::Gebsor => {
            let a = a.unwrap_or(0.0);
            if (1.0 - a).abs() <= DEGENERACY_TOL {
                return Err(Error::DegenerateA { a, reason: "GEBSOR optimum needs a != 1".into() });
            }
            let omega2 = (1.0 - s * tau1 * g) / (1.0 - a);
            Ok(result(MethodParams::gebsor(tau1, tau1, omega2, a), bounds, vec!["omega1 = tau".into()]))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductVariant {
    /// `ω₂` is free.
    Gmpsd { omega2: f64 },
    Simplified,
    Gmpsd3,
    Gmssor,
    Gpsd,
}

/// Feasibility data of the equal-`τ` optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualTauFeasibility {
    pub m: f64,
    pub sigma: f64,
    /// `μ*`, infinite when `μ_max = 1/4`.
    pub mu_star: f64,
    /// `[a₁, a₂]` when the range of `a` is restricted.
    pub a_range: Option<(f64, f64)>,
}

pub fn equal_tau_feasibility(bounds: &SpectralBounds) -> EqualTauFeasibility {
    let (lo, hi) = (bounds.mu_min, bounds.mu_max);
    let s = lo.sqrt() + hi.sqrt();
    let m = 4.0 * lo * hi / (s * s);
    let sigma = 4.0 * (1.0 - m);
    let mu_star = hi / (1.0 - 2.0 * hi.sqrt()).powi(2);
    let restricted = hi > 0.25 && lo >= mu_star && sigma < 0.0;
    let a_range = restricted.then(|| {
        let r = (sigma * (sigma - 4.0)).sqrt();
        (2.0 / (sigma - r), 2.0 / (sigma + r))
    });
    EqualTauFeasibility { m, sigma, mu_star, a_range }
}

/// Optima of the product-preconditioner methods.
pub fn optimal_gmpsd_family(bounds: &SpectralBounds, a: f64, variant: ProductVariant) -> Result<OptimalResult> {
    let g = bounds.geometric_mean();
    let s = sign(bounds);
    let tau1 = optimal_tau1(bounds);
    match variant {
        ProductVariant::Simplified => {
            Ok(result(MethodParams::simplified_gmpsd(tau1, s / g), bounds, vec!["omega2 = 0, omega1 = tau1".into()]))
        }
        ProductVariant::Gmpsd { omega2 } => {
            let d = (1.0 - a * omega2) * (1.0 - (1.0 - a) * omega2);
            if d.abs() <= DEGENERACY_TOL {
                return Err(Error::DegenerateOmega2 { omega2, reason: format!("(1-a*omega2)(1-(1-a)*omega2) = 0 at a = {a}") });
            }
            let tau2 = s * d / g;
            let gap = tau2 - tau1 * omega2;
            if gap.abs() <= DEGENERACY_TOL * tau2.abs().max(1.0) {
                return Err(Error::DegenerateOmega2 { omega2, reason: format!("omega2 = tau2_opt/tau1_opt = {}", tau2 / tau1) });
            }
            let omega1 = tau1 * (tau2 - omega2) / gap;
            Ok(result(MethodParams::gmpsd(tau1, tau2, omega1, omega2, a), bounds, Vec::new()))
        }
        ProductVariant::Gmpsd3 | ProductVariant::Gmssor | ProductVariant::Gpsd => {
            if bounds.q_sign == QSign::NegativeDefinite {
                return Err(Error::Infeasible("equal-tau optimum has no closed form for negative definite Q".into()));
            }
            let f = equal_tau_feasibility(bounds);
            let mut notes = vec![format!("M = {}, sigma = {}", f.m, f.sigma)];
            if let Some((a1, a2)) = f.a_range {
                if !(a1 <= a && a <= a2) {
                    return Err(Error::Infeasible(format!(
                        "mu_max = {} >= 1/4 and mu_min = {} >= mu* = {}, so a must lie in [{a1}, {a2}]; got a = {a}",
                        bounds.mu_max, bounds.mu_min, f.mu_star
                    )));
                }
                notes.push(format!("a restricted to [{a1}, {a2}]"));
            }
            let disc = 1.0 - a * (1.0 - a) * f.sigma;
            if disc < 0.0 {
                return Err(Error::Infeasible(format!("1 - a(1-a)sigma = {disc} < 0")));
            }
            let tau = tau1;
            let branch = |sgn: f64| -> Option<(f64, f64)> {
                let den = 2.0 * (1.0 + sgn * disc.sqrt());
                if den.abs() <= DEGENERACY_TOL {
                    return None;
                }
                let w2 = f.sigma / den;
                if (1.0 - w2).abs() <= DEGENERACY_TOL {
                    return None;
                }
                Some((w2, (tau - w2) / (1.0 - w2)))
            };
            let build = |(w2, w1): (f64, f64)| match variant {
                ProductVariant::Gmpsd3 => MethodParams::gmpsd3(tau, w1, w2, a),
                ProductVariant::Gmssor => {
                    let mut p = MethodParams::gmssor(w1, w2, a);
                    // keep the tie exact rather than recomputed through rounding
                    p.tau1 = tau;
                    p.tau2 = tau;
                    p
                }
                _ => MethodParams::gpsd(tau, w2, a),
            };
            let canonical = branch(1.0).ok_or_else(|| Error::DegenerateOmega2 {
                omega2: 1.0,
                reason: "canonical branch gives omega2 = 1".into(),
            })?;
            notes.push("canonical (+) branch of omega2".into());
            if variant == ProductVariant::Gpsd {
                notes.push(format!(
                    "omega1 = omega2 = {} is imposed by the tie; the optimum of the untied quadratic has omega1 = {}",
                    canonical.0, canonical.1
                ));
            }
            let mut out = result(build(canonical), bounds, notes);
            out.alternate = branch(-1.0).filter(|b| b.0.is_finite()).map(build);
            Ok(out)
        }
    }
}

/// Optimum for any method. `omega2` feeds the variants where it is free.
pub fn optimal(method: MethodId, bounds: &SpectralBounds, a: Option<f64>, omega2: Option<f64>) -> Result<OptimalResult> {
    let a0 = a.unwrap_or(0.0);
    let w2 = omega2.unwrap_or(0.0);
    match method {
        MethodId::Gsor => optimal_gsor_family(bounds, a0, false),
        MethodId::Gbsor => optimal_gsor_family(bounds, a0, true),
        MethodId::Gmesor => optimal_gmesor_family(bounds, a, ExtrapolatedVariant::Gmesor),
        MethodId::Gesor => optimal_gmesor_family(bounds, a, ExtrapolatedVariant::Gesor),
        MethodId::Gmebsor => optimal_gmesor_family(bounds, a, ExtrapolatedVariant::Gmebsor { omega2: w2 }),
        MethodId::Gebsor => optimal_gmesor_family(bounds, a, ExtrapolatedVariant::Gebsor),
        MethodId::Gmpsd => optimal_gmpsd_family(bounds, a0, ProductVariant::Gmpsd { omega2: w2 }),
        MethodId::SimplifiedGmpsd => optimal_gmpsd_family(bounds, a0, ProductVariant::Simplified),
        MethodId::Gmpsd3 => optimal_gmpsd_family(bounds, a0, ProductVariant::Gmpsd3),
        MethodId::Gmssor => optimal_gmpsd_family(bounds, a0, ProductVariant::Gmssor),
        MethodId::Gpsd => optimal_gmpsd_family(bounds, a0, ProductVariant::Gpsd),
        MethodId::SorLike | MethodId::Uzawa | MethodId::Gssor => {
            Err(Error::Infeasible(format!("{method} has no closed-form optimum")))
        }
    }
}

pub fn validate_params(params: &MethodParams) -> Vec<String> {
    params.validate()
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegionVerdict {
    GuaranteedConvergent,
    NotGuaranteed(Vec<String>),
}

impl RegionVerdict {
    pub fn is_guaranteed(&self) -> bool {
        matches!(self, RegionVerdict::GuaranteedConvergent)
    }
}

impl fmt::Display for RegionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionVerdict::GuaranteedConvergent => f.write_str("guaranteed convergent"),
            RegionVerdict::NotGuaranteed(v) => write!(f, "not guaranteed: {}", v.join("; ")),
        }
    }
}

/// Collects strict inequality violations with a shared margin.
struct Constraints {
    margin: f64,
    violated: Vec<String>,
}

impl Constraints {
    fn new(margin: f64) -> Self {
        Self { margin, violated: Vec::new() }
    }

    /// `lo < x < hi`, either side may be infinite.
    fn between(&mut self, lo: f64, x: f64, hi: f64, what: &str) {
        if !(x > lo + self.margin && x < hi - self.margin) {
            self.violated.push(format!("{lo} < {what} = {x} < {hi}"));
        }
    }

    fn holds(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.violated.push(what.into());
        }
    }

    fn ok(&self) -> bool {
        self.violated.is_empty()
    }
}

fn verdict(c: Constraints) -> RegionVerdict {
    if c.ok() {
        RegionVerdict::GuaranteedConvergent
    } else {
        RegionVerdict::NotGuaranteed(c.violated)
    }
}

/// Guaranteed if any of the alternative cases holds.
fn any_case(cases: Vec<(&str, Constraints)>) -> RegionVerdict {
    if cases.iter().any(|(_, c)| c.ok()) {
        return RegionVerdict::GuaranteedConvergent;
    }
    RegionVerdict::NotGuaranteed(
        cases.into_iter().map(|(name, c)| format!("{name}: {}", c.violated.join(", "))).collect(),
    )
}

pub fn convergence_check(params: &MethodParams, bounds: &SpectralBounds) -> Result<RegionVerdict> {
    convergence_check_with_margin(params, bounds, 0.0)
}

pub fn convergence_check_with_margin(params: &MethodParams, bounds: &SpectralBounds, margin: f64) -> Result<RegionVerdict> {
    let violations = params.validate();
    if !violations.is_empty() {
        return Ok(RegionVerdict::NotGuaranteed(violations));
    }
    let not_coded = || {
        Err(Error::RegionNotCoded(format!(
            "{} with a = {} and {:?} Q",
            params.method, params.a, bounds.q_sign
        )))
    };
    let pos = bounds.q_sign == QSign::PositiveDefinite;
    match params.method {
        MethodId::Gsor | MethodId::SorLike | MethodId::Uzawa => Ok(gsor_region(params, bounds, params.a, margin)),
        MethodId::Gbsor => Ok(gsor_region(params, bounds, 1.0 - params.a, margin)),
        MethodId::Gmesor if params.a == 0.0 => Ok(gmesor_region(params, bounds, margin)),
        MethodId::Gesor if params.a == 0.0 => Ok(gesor_region(params, bounds, margin)),
        MethodId::Gmpsd3 if params.a == 0.0 && pos => Ok(gmpsd3_region(params, bounds, margin)),
        MethodId::Gmpsd | MethodId::Gmssor | MethodId::Gpsd | MethodId::Gssor if params.a == 0.0 && pos => {
            Ok(product_region(params, bounds, margin))
        }
        // ω₂ = 0 removes a from the iteration
        MethodId::SimplifiedGmpsd if pos => Ok(product_region(params, bounds, margin)),
        _ => not_coded(),
    }
}

/// Forward-family regions in the splitting shift `s` (`a` for GSOR, `1 − a` for GBSOR).
fn gsor_region(p: &MethodParams, bounds: &SpectralBounds, s: f64, margin: f64) -> RegionVerdict {
    debug_assert_eq!(p.family() == Family::Backward, p.method == MethodId::Gbsor);
    let (w1, w2) = (p.omega1, p.omega2);
    let (lo, hi) = (bounds.mu_min, bounds.mu_max);
    let bound = |mu: f64| 2.0 * (2.0 - w1) / (w1 * mu + 2.0 * s * (2.0 - w1));
    let mut c = Constraints::new(margin);
    if bounds.q_sign == QSign::PositiveDefinite {
        if s == 0.0 {
            c.between(0.0, w1, 2.0, "omega1");
            c.between(0.0, w2, 2.0 * (2.0 - w1) / (w1 * hi), "omega2");
            return verdict(c);
        }
        if s > 0.0 {
            c.between(0.0, w1, 2.0, "omega1");
            c.between(0.0, w2, bound(lo).min(bound(hi)), "omega2");
            return verdict(c);
        }
        let w1_hi = 4.0 * s / (2.0 * s - hi);
        let mut c2 = Constraints::new(margin);
        c2.between(0.0, w1, w1_hi, "omega1");
        c2.between(f64::NEG_INFINITY, w2, bound(hi), "omega2");
        let mut c3 = Constraints::new(margin);
        c3.between(0.0, w1, w1_hi, "omega1");
        c3.between(0.0, w2, f64::INFINITY, "omega2");
        let mut c4 = Constraints::new(margin);
        c4.between(4.0 * s / (2.0 * s - lo), w1, 2.0, "omega1");
        c4.between(0.0, w2, bound(hi), "omega2");
        any_case(vec![("case 2", c2), ("case 3", c3), ("case 4", c4)])
    } else {
        if s == 0.0 {
            c.between(0.0, w1, 2.0, "omega1");
            c.between(2.0 * (2.0 - w1) / (w1 * lo), w2, 0.0, "omega2");
            return verdict(c);
        }
        if s < 0.0 {
            c.between(0.0, w1, 2.0, "omega1");
            c.between(bound(lo), w2, 0.0, "omega2");
            return verdict(c);
        }
        let w1_hi = 4.0 * s / (2.0 * s - lo);
        let mut c2 = Constraints::new(margin);
        c2.between(0.0, w1, w1_hi, "omega1");
        c2.between(bound(lo), w2, f64::INFINITY, "omega2");
        let mut c3 = Constraints::new(margin);
        c3.between(0.0, w1, w1_hi, "omega1");
        c3.between(f64::NEG_INFINITY, w2, 0.0, "omega2");
        let mut c4 = Constraints::new(margin);
        c4.between(4.0 * s / (2.0 * s - hi), w1, 2.0, "omega1");
        c4.between(bound(lo), w2, 0.0, "omega2");
        any_case(vec![("case 2", c2), ("case 3", c3), ("case 4", c4)])
    }
}

fn gmesor_region(p: &MethodParams, bounds: &SpectralBounds, margin: f64) -> RegionVerdict {
    let (t1, t2, w2) = (p.tau1, p.tau2, p.omega2);
    let mut c = Constraints::new(margin);
    c.between(0.0, t1, 2.0, "tau1");
    if bounds.q_sign == QSign::PositiveDefinite {
        let mu = bounds.mu_max;
        c.between(0.0, t2, 4.0 / (t1 * mu), "tau2");
        c.between(t2 - 1.0 / mu, w2, (2.0 - t1) / (t1 * mu) + t2 / 2.0, "omega2");
    } else {
        let mu = bounds.mu_min;
        c.between(4.0 / (t1 * mu), t2, 0.0, "tau2");
        c.between((2.0 - t1) / (t1 * mu) + t2 / 2.0, w2, t2 - 1.0 / mu, "omega2");
    }
    verdict(c)
}

fn gesor_region(p: &MethodParams, bounds: &SpectralBounds, margin: f64) -> RegionVerdict {
    let (t, w2) = (p.tau1, p.omega2);
    let mut c = Constraints::new(margin);
    if bounds.q_sign == QSign::PositiveDefinite {
        let mu = bounds.mu_max;
        let t_hi = if mu <= 1.0 { 2.0 } else { 2.0 / mu.sqrt() };
        c.between(0.0, t, t_hi, "tau");
        c.between(t - 1.0 / mu, w2, (2.0 - t) / (t * mu) + t / 2.0, "omega2");
    } else {
        let mu = bounds.mu_min;
        c.holds(mu > 1.0, format!("mu_min = {mu} > 1"));
        c.between(2.0 / mu.abs().sqrt(), t, 2.0, "tau");
        c.between((2.0 - t) / (t * mu) + t / 2.0, w2, t - 1.0 / mu, "omega2");
    }
    verdict(c)
}

fn gmpsd3_region(p: &MethodParams, bounds: &SpectralBounds, margin: f64) -> RegionVerdict {
    let (t, w1, w2) = (p.tau1, p.omega1, p.omega2);
    let mu = bounds.mu_max;
    let mut c = Constraints::new(margin);
    c.between(0.0, t, 2.0, "tau");
    c.between(f64::NEG_INFINITY, w2, 1.0 - t * t * mu / 4.0, "omega2");
    c.between(
        (t - w2) / (1.0 - w2) - 1.0 / mu,
        w1,
        (2.0 - t) / (t * mu) + (t - 2.0 * w2) / (2.0 * (1.0 - w2)),
        "omega1",
    );
    verdict(c)
}

/// Product-family region at `a = 0`: the stability inequalities of the
/// quadratic, each affine in `μ`, checked at both ends of the spectrum.
fn product_region(p: &MethodParams, bounds: &SpectralBounds, margin: f64) -> RegionVerdict {
    let (t1, t2, w1, w2) = (p.tau1, p.tau2, p.omega1, p.omega2);
    let mut c = Constraints::new(margin);
    c.between(0.0, t1, 2.0, "tau1");
    let d = 1.0 - w2;
    let regime = format!(
        "{}, {}",
        if d > 0.0 { "omega2 < 1" } else { "omega2 > 1" },
        if t1 * w2 - t2 > 0.0 { "tau1*omega2 > tau2" } else { "tau1*omega2 < tau2" }
    );
    for (label, mu) in [("mu_min", bounds.mu_min), ("mu_max", bounds.mu_max)] {
        c.between(0.0, t2 / d, 4.0 / (t1 * mu), &format!("tau2/(1-omega2) at {label}"));
        let lower = t1 * (2.0 * w2 - t2) * mu / (2.0 * d) + t1 - 2.0;
        let upper = t1 + t1 * (w2 - t2) * mu / d;
        let mid = w1 * (t1 * w2 - t2) * mu / d;
        c.between(lower, mid, upper, &format!("omega1 coupling at {label} ({regime})"));
    }
    verdict(c)
}
