//! Method identifiers and their five-parameter realization.
//!
//! Every method is a member of one of three recurrence families and fixes
//! some of `(τ₁, τ₂, ω₁, ω₂, a)` in terms of its free parameters.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    Gsor,
    Gbsor,
    SorLike,
    Gesor,
    Gmesor,
    Gebsor,
    Gmebsor,
    Gmpsd,
    Gmpsd3,
    Gmssor,
    Gpsd,
    Gssor,
    SimplifiedGmpsd,
    Uzawa,
}

/// Preconditioner shape shared by a group of methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `R = 𝒟 − Ωℒ`
    Forward,
    /// `R = 𝒟 − Ω𝒰`
    Backward,
    /// `R = (𝒟 − Ωℒ) 𝒟⁻¹ (𝒟 − Ω𝒰)`
    Product,
}

impl MethodId {
    pub const ALL: [MethodId; 14] = [
        MethodId::Gsor,
        MethodId::Gbsor,
        MethodId::SorLike,
        MethodId::Gesor,
        MethodId::Gmesor,
        MethodId::Gebsor,
        MethodId::Gmebsor,
        MethodId::Gmpsd,
        MethodId::Gmpsd3,
        MethodId::Gmssor,
        MethodId::Gpsd,
        MethodId::Gssor,
        MethodId::SimplifiedGmpsd,
        MethodId::Uzawa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Gsor => "GSOR",
            MethodId::Gbsor => "GBSOR",
            MethodId::SorLike => "SOR-like",
            MethodId::Gesor => "GESOR",
            MethodId::Gmesor => "GMESOR",
            MethodId::Gebsor => "GEBSOR",
            MethodId::Gmebsor => "GMEBSOR",
            MethodId::Gmpsd => "GMPSD",
            MethodId::Gmpsd3 => "GMPSD3",
            MethodId::Gmssor => "GMSSOR",
            MethodId::Gpsd => "GPSD",
            MethodId::Gssor => "GSSOR",
            MethodId::SimplifiedGmpsd => "SimplifiedGMPSD",
            MethodId::Uzawa => "Uzawa",
        }
    }

    pub fn family(self) -> Family {
        match self {
            MethodId::Gsor | MethodId::SorLike | MethodId::Gesor | MethodId::Gmesor | MethodId::Uzawa => {
                Family::Forward
            }
            MethodId::Gbsor | MethodId::Gebsor | MethodId::Gmebsor => Family::Backward,
            MethodId::Gmpsd
            | MethodId::Gmpsd3
            | MethodId::Gmssor
            | MethodId::Gpsd
            | MethodId::Gssor
            | MethodId::SimplifiedGmpsd => Family::Product,
        }
    }

    /// Names of the free parameters, in the order `MethodParams::from_free` takes them.
    pub fn free_params(self) -> &'static [&'static str] {
        match self {
            MethodId::Gsor | MethodId::Gbsor => &["omega1", "omega2", "a"],
            MethodId::SorLike | MethodId::Gssor => &["omega", "a"],
            MethodId::Uzawa => &[],
            MethodId::Gesor => &["tau", "omega2", "a"],
            MethodId::Gmesor => &["tau1", "tau2", "omega2", "a"],
            MethodId::Gebsor | MethodId::Gmpsd3 => &["tau", "omega1", "omega2", "a"],
            MethodId::Gmebsor | MethodId::Gmpsd => &["tau1", "tau2", "omega1", "omega2", "a"],
            MethodId::Gmssor => &["omega1", "omega2", "a"],
            MethodId::Gpsd => &["tau", "omega", "a"],
            MethodId::SimplifiedGmpsd => &["tau1", "tau2"],
        }
    }

    /// Whether `a` enters the iteration at all.
    pub fn uses_a(self) -> bool {
        !matches!(self, MethodId::Uzawa | MethodId::SimplifiedGmpsd)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        let id = match key.as_str() {
            "gsor" => MethodId::Gsor,
            "gbsor" => MethodId::Gbsor,
            "sorlike" => MethodId::SorLike,
            "gesor" => MethodId::Gesor,
            "gmesor" => MethodId::Gmesor,
            "gebsor" => MethodId::Gebsor,
            "gmebsor" => MethodId::Gmebsor,
            "gmpsd" => MethodId::Gmpsd,
            "gmpsd3" => MethodId::Gmpsd3,
            "gmssor" => MethodId::Gmssor,
            "gpsd" => MethodId::Gpsd,
            "gssor" => MethodId::Gssor,
            "simplifiedgmpsd" | "sgmpsd" => MethodId::SimplifiedGmpsd,
            "uzawa" => MethodId::Uzawa,
            _ => return Err(Error::Parse { line: 0, msg: format!("unknown method {s:?}") }),
        };
        Ok(id)
    }
}

/// Full parameter set of a method.
///
/// For forward-family methods `omega1` does not enter the iteration and is
/// stored equal to `tau1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodParams {
    pub method: MethodId,
    pub tau1: f64,
    pub tau2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub a: f64,
}

const TIE_TOL: f64 = 1e-12;

fn tied(x: f64, y: f64) -> bool {
    (x - y).abs() <= TIE_TOL * (1.0 + x.abs().max(y.abs()))
}

impl MethodParams {
    /// Raw parameters with no ties applied. Use `validate` to check them.
    pub fn new(method: MethodId, tau1: f64, tau2: f64, omega1: f64, omega2: f64, a: f64) -> Self {
        Self { method, tau1, tau2, omega1, omega2, a }
    }

    pub fn gsor(omega1: f64, omega2: f64, a: f64) -> Self {
        Self::new(MethodId::Gsor, omega1, omega2, omega1, omega2, a)
    }

    pub fn gbsor(omega1: f64, omega2: f64, a: f64) -> Self {
        Self::new(MethodId::Gbsor, omega1, omega2, omega1, omega2, a)
    }

    pub fn sor_like(omega: f64, a: f64) -> Self {
        Self::new(MethodId::SorLike, omega, omega, omega, omega, a)
    }

    pub fn uzawa() -> Self {
        Self::new(MethodId::Uzawa, 1.0, 1.0, 1.0, 1.0, 0.0)
    }

    pub fn gesor(tau: f64, omega2: f64, a: f64) -> Self {
        Self::new(MethodId::Gesor, tau, tau, tau, omega2, a)
    }

    pub fn gmesor(tau1: f64, tau2: f64, omega2: f64, a: f64) -> Self {
        Self::new(MethodId::Gmesor, tau1, tau2, tau1, omega2, a)
    }

    pub fn gebsor(tau: f64, omega1: f64, omega2: f64, a: f64) -> Self {
        Self::new(MethodId::Gebsor, tau, tau, omega1, omega2, a)
    }

    pub fn gmebsor(tau1: f64, tau2: f64, omega1: f64, omega2: f64, a: f64) -> Self {
        Self::new(MethodId::Gmebsor, tau1, tau2, omega1, omega2, a)
    }

    pub fn gmpsd(tau1: f64, tau2: f64, omega1: f64, omega2: f64, a: f64) -> Self {
        Self::new(MethodId::Gmpsd, tau1, tau2, omega1, omega2, a)
    }

    pub fn gmpsd3(tau: f64, omega1: f64, omega2: f64, a: f64) -> Self {
        Self::new(MethodId::Gmpsd3, tau, tau, omega1, omega2, a)
    }

    pub fn gmssor(omega1: f64, omega2: f64, a: f64) -> Self {
        let w = omega1 + omega2 - omega1 * omega2;
        Self::new(MethodId::Gmssor, w, w, omega1, omega2, a)
    }

    pub fn gpsd(tau: f64, omega: f64, a: f64) -> Self {
        Self::new(MethodId::Gpsd, tau, tau, omega, omega, a)
    }

    pub fn gssor(omega: f64, a: f64) -> Self {
        let w = omega * (2.0 - omega);
        Self::new(MethodId::Gssor, w, w, omega, omega, a)
    }

    pub fn simplified_gmpsd(tau1: f64, tau2: f64) -> Self {
        Self::new(MethodId::SimplifiedGmpsd, tau1, tau2, tau1, 0.0, 0.0)
    }

    /// Builds parameters from the method's free values, in `MethodId::free_params` order.
    pub fn from_free(method: MethodId, v: &[f64]) -> Result<Self> {
        let want = method.free_params().len();
        if v.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: v.len() });
        }
        Ok(match method {
            MethodId::Gsor => Self::gsor(v[0], v[1], v[2]),
            MethodId::Gbsor => Self::gbsor(v[0], v[1], v[2]),
            MethodId::SorLike => Self::sor_like(v[0], v[1]),
            MethodId::Uzawa => Self::uzawa(),
            MethodId::Gesor => Self::gesor(v[0], v[1], v[2]),
            MethodId::Gmesor => Self::gmesor(v[0], v[1], v[2], v[3]),
            MethodId::Gebsor => Self::gebsor(v[0], v[1], v[2], v[3]),
            MethodId::Gmebsor => Self::gmebsor(v[0], v[1], v[2], v[3], v[4]),
            MethodId::Gmpsd => Self::gmpsd(v[0], v[1], v[2], v[3], v[4]),
            MethodId::Gmpsd3 => Self::gmpsd3(v[0], v[1], v[2], v[3]),
            MethodId::Gmssor => Self::gmssor(v[0], v[1], v[2]),
            MethodId::Gpsd => Self::gpsd(v[0], v[1], v[2]),
            MethodId::Gssor => Self::gssor(v[0], v[1]),
            MethodId::SimplifiedGmpsd => Self::simplified_gmpsd(v[0], v[1]),
        })
    }

    /// Same parameters with a different `a`; ties are unaffected.
    pub fn with_a(mut self, a: f64) -> Self {
        if self.method.uses_a() {
            self.a = a;
        }
        self
    }

    pub fn family(&self) -> Family {
        self.method.family()
    }

    /// Scalar multiplying `Q` in the (2,2) block of the preconditioner.
    pub fn q_scale(&self) -> f64 {
        let (a, w2) = (self.a, self.omega2);
        match self.family() {
            Family::Forward => 1.0 - a * w2,
            Family::Backward => 1.0 - (1.0 - a) * w2,
            Family::Product => (1.0 - a * w2) * (1.0 - (1.0 - a) * w2),
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.tau1, self.tau2, self.omega1, self.omega2, self.a]
    }

    /// Every violated nonsingularity or tie constraint. Empty when valid.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let p = self;
        for (name, x) in [("tau1", p.tau1), ("tau2", p.tau2), ("omega1", p.omega1), ("omega2", p.omega2), ("a", p.a)] {
            if !x.is_finite() {
                v.push(format!("{name} = {x} is not finite"));
            }
        }
        if p.tau1 == 0.0 {
            v.push("tau1 = 0".into());
        }
        if p.tau2 == 0.0 {
            v.push("tau2 = 0".into());
        }
        let (a, w2) = (p.a, p.omega2);
        match p.family() {
            Family::Forward => {
                if (1.0 - a * w2).abs() <= TIE_TOL {
                    v.push(format!("a*omega2 = {} must differ from 1", a * w2));
                }
            }
            Family::Backward => {
                if (1.0 - (1.0 - a) * w2).abs() <= TIE_TOL {
                    v.push(format!("(1-a)*omega2 = {} must differ from 1", (1.0 - a) * w2));
                }
            }
            Family::Product => {
                if p.q_scale().abs() <= TIE_TOL {
                    v.push(format!(
                        "(1-a*omega2)(1-(1-a)*omega2) = {} must be nonzero",
                        p.q_scale()
                    ));
                }
            }
        }

        let mut tie = |ok: bool, what: &str| {
            if !ok {
                v.push(format!("{} requires {what}", p.method));
            }
        };
        match p.method {
            MethodId::Gsor | MethodId::Gbsor => {
                tie(tied(p.tau1, p.omega1), "tau1 = omega1");
                tie(tied(p.tau2, p.omega2), "tau2 = omega2");
            }
            MethodId::SorLike => {
                tie(tied(p.tau1, p.tau2) && tied(p.tau1, p.omega2), "tau1 = tau2 = omega2");
            }
            MethodId::Uzawa => {
                tie(tied(p.tau1, 1.0) && tied(p.tau2, 1.0) && tied(p.omega2, 1.0), "tau1 = tau2 = omega2 = 1");
                tie(p.a == 0.0, "a = 0");
            }
            MethodId::Gesor | MethodId::Gebsor | MethodId::Gmpsd3 => tie(tied(p.tau1, p.tau2), "tau1 = tau2"),
            MethodId::Gmesor | MethodId::Gmebsor | MethodId::Gmpsd => {}
            MethodId::Gmssor => {
                let w = p.omega1 + p.omega2 - p.omega1 * p.omega2;
                tie(tied(p.tau1, w) && tied(p.tau2, w), "tau1 = tau2 = omega1 + omega2 - omega1*omega2");
            }
            MethodId::Gpsd => {
                tie(tied(p.tau1, p.tau2), "tau1 = tau2");
                tie(tied(p.omega1, p.omega2), "omega1 = omega2");
            }
            MethodId::Gssor => {
                let w = p.omega1 * (2.0 - p.omega1);
                tie(tied(p.omega1, p.omega2), "omega1 = omega2");
                tie(tied(p.tau1, w) && tied(p.tau2, w), "tau1 = tau2 = omega*(2-omega)");
            }
            MethodId::SimplifiedGmpsd => {
                tie(p.omega2 == 0.0, "omega2 = 0");
                tie(tied(p.omega1, p.tau1), "omega1 = tau1");
            }
        }
        v
    }

    pub fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::ParamViolation(v))
        }
    }
}

impl fmt::Display for MethodParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} tau1={} tau2={} omega1={} omega2={} a={}",
            self.method, self.tau1, self.tau2, self.omega1, self.omega2, self.a
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in MethodId::ALL {
            assert_eq!(id.name().parse::<MethodId>().unwrap(), id);
        }
        assert_eq!("sor_like".parse::<MethodId>().unwrap(), MethodId::SorLike);
        assert_eq!("simplified-gmpsd".parse::<MethodId>().unwrap(), MethodId::SimplifiedGmpsd);
        assert!("sor".parse::<MethodId>().is_err());
    }

    #[test]
    fn constructors_satisfy_their_own_ties() {
        for id in MethodId::ALL {
            let free: Vec<f64> = id.free_params().iter().enumerate().map(|(k, _)| 0.3 + 0.1 * k as f64).collect();
            let p = MethodParams::from_free(id, &free).unwrap();
            assert!(p.validate().is_empty(), "{id}: {:?}", p.validate());
        }
    }

    #[test]
    fn forward_singularity() {
        let v = MethodParams::gmesor(1.0, 0.5, 0.5, 2.0).validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("a*omega2"));
    }

    #[test]
    fn product_singularity_full_determinant() {
        assert!(!MethodParams::gmpsd(1.0, 1.0, 1.0, 2.0, 0.5).validate().is_empty());
        // omega2 = 1/a with a != 1/2 is also singular
        assert!(!MethodParams::gmpsd(1.0, 1.0, 1.0, 0.25, 4.0).validate().is_empty());
        assert!(MethodParams::gmpsd(1.0, 1.0, 1.0, 0.3, 4.0).validate().is_empty());
    }

    #[test]
    fn tie_violation_reported() {
        let p = MethodParams::new(MethodId::Gsor, 1.0, 0.5, 0.9, 0.5, 0.0);
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("tau1 = omega1"));
        assert!(matches!(p.check(), Err(Error::ParamViolation(_))));
    }

    #[test]
    fn zero_tau_rejected() {
        assert!(!MethodParams::gmesor(0.0, 0.5, 0.5, 0.0).validate().is_empty());
    }

    #[test]
    fn q_scale_per_family() {
        assert_eq!(MethodParams::gmesor(1.0, 1.0, 0.5, 0.4).q_scale(), 1.0 - 0.2);
        assert_eq!(MethodParams::gmebsor(1.0, 1.0, 1.0, 0.5, 0.4).q_scale(), 1.0 - 0.3);
        assert!((MethodParams::gmpsd(1.0, 1.0, 1.0, 0.5, 0.4).q_scale() - 0.8 * 0.7).abs() < 1e-15);
    }
}
