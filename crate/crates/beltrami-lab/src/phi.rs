//! Non-decreasing functions Φ:[0,∞]→[0,∞] and their generalized inverse.

use crate::error::{Error, Result};
use crate::num::{r, Real};

/// A non-decreasing Φ, either a builtin closed form or a monotone table with
/// linear interpolation (extrapolated past the end by the last slope).
#[derive(Debug, Clone, PartialEq)]
pub enum PhiFunction<R> {
    /// Φ(t) = exp(α·t)
    Exp { alpha: R },
    /// Φ(t) = exp(α·t^γ), γ > 0
    ExpPow { alpha: R, gamma: R },
    /// Φ(t) = t^p, p > 0
    Power { p: R },
    /// Φ(t) = t·log(1+t)
    TLog1p,
    /// Φ(t) = t
    Identity,
    /// Φ(t) = c
    Constant { c: R },
    /// Monotone sample table (t, Φ(t)).
    Table { points: Vec<(R, R)> },
}

impl<R: Real> PhiFunction<R> {
    /// Build a table Φ after validating monotonicity of the samples.
    pub fn table(points: Vec<(R, R)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("phi table needs at least 2 points".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Domain("phi table abscissae must increase".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Domain("phi table must be non-decreasing".into()));
            }
        }
        Ok(PhiFunction::Table { points })
    }

    pub fn eval(&self, t: R) -> R {
        let t = t.max(R::zero());
        match self {
            PhiFunction::Exp { alpha } => (*alpha * t).exp(),
            PhiFunction::ExpPow { alpha, gamma } => (*alpha * t.powf(*gamma)).exp(),
            PhiFunction::Power { p } => t.powf(*p),
            PhiFunction::TLog1p => t * t.ln_1p(),
            PhiFunction::Identity => t,
            PhiFunction::Constant { c } => *c,
            PhiFunction::Table { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    let prev = points[points.len() - 2];
                    let slope = (last.1 - prev.1) / (last.0 - prev.0);
                    return last.1 + slope * (t - last.0);
                }
                for w in points.windows(2) {
                    if t <= w[1].0 {
                        let s = (t - w[0].0) / (w[1].0 - w[0].0);
                        return w[0].1 + (w[1].1 - w[0].1) * s;
                    }
                }
                last.1
            }
        }
    }

    /// log Φ(t), computed without evaluating Φ where it would overflow.
    pub fn log_eval(&self, t: R) -> R {
        let t = t.max(R::zero());
        match self {
            PhiFunction::Exp { alpha } => *alpha * t,
            PhiFunction::ExpPow { alpha, gamma } => *alpha * t.powf(*gamma),
            PhiFunction::Power { p } => *p * t.ln(),
            PhiFunction::Identity => t.ln(),
            _ => self.eval(t).ln(),
        }
    }

    /// Inverse of H = log Φ: the least t with log Φ(t) ≥ eta. Closed forms
    /// where available, bracketed bisection on `log_eval` otherwise.
    pub fn log_inverse(&self, eta: R) -> R {
        if eta <= self.log_eval(R::zero()) {
            return R::zero();
        }
        match self {
            PhiFunction::Exp { alpha } => eta / *alpha,
            PhiFunction::ExpPow { alpha, gamma } => (eta / *alpha).powf(R::one() / *gamma),
            PhiFunction::Power { p } => (eta / *p).exp(),
            PhiFunction::Identity => eta.exp(),
            PhiFunction::Constant { c } => {
                if eta <= c.ln() {
                    R::zero()
                } else {
                    R::infinity()
                }
            }
            _ => bisect_inverse(|t| self.log_eval(t), eta),
        }
    }

    /// sup{t : Φ(t) = 0}, or 0 when Φ(0) > 0. Used to pick integration lower
    /// bounds for log Φ.
    pub fn zero_threshold(&self) -> R {
        match self {
            PhiFunction::Exp { .. } | PhiFunction::ExpPow { .. } | PhiFunction::Constant { .. } => {
                R::zero()
            }
            PhiFunction::Power { .. } | PhiFunction::Identity | PhiFunction::TLog1p => R::zero(),
            PhiFunction::Table { points } => {
                let mut t0 = R::zero();
                for (t, v) in points {
                    if *v <= R::zero() {
                        t0 = *t;
                    } else {
                        break;
                    }
                }
                t0
            }
        }
    }

    /// Generalized inverse Φ⁻¹(τ) := inf{t : Φ(t) ≥ τ}; ∞ when the superlevel
    /// set is empty. Satisfies Φ⁻¹(Φ(t)) ≤ t.
    pub fn inverse(&self, tau: R) -> R {
        if tau <= self.eval(R::zero()) {
            return R::zero();
        }
        match self {
            PhiFunction::Exp { alpha } => tau.ln() / *alpha,
            PhiFunction::ExpPow { alpha, gamma } => (tau.ln() / *alpha).powf(R::one() / *gamma),
            PhiFunction::Power { p } => tau.powf(R::one() / *p),
            PhiFunction::Identity => tau,
            PhiFunction::Constant { c } => {
                if tau <= *c {
                    R::zero()
                } else {
                    R::infinity()
                }
            }
            PhiFunction::TLog1p => bisect_inverse(|t| self.eval(t), tau),
            PhiFunction::Table { points } => {
                let last = points[points.len() - 1];
                if tau <= last.1 {
                    // first segment whose right value reaches tau
                    for w in points.windows(2) {
                        if w[1].1 >= tau {
                            if w[1].1 == w[0].1 {
                                continue;
                            }
                            let s = (tau - w[0].1) / (w[1].1 - w[0].1);
                            return w[0].0 + (w[1].0 - w[0].0) * s;
                        }
                    }
                    last.0
                } else {
                    let prev = points[points.len() - 2];
                    let slope = (last.1 - prev.1) / (last.0 - prev.0);
                    if slope <= R::zero() {
                        R::infinity()
                    } else {
                        last.0 + (tau - last.1) / slope
                    }
                }
            }
        }
    }
}

fn bisect_inverse<R: Real>(f: impl Fn(R) -> R, tau: R) -> R {
    let mut hi = R::one();
    let mut grow = 0;
    while f(hi) < tau {
        hi = hi + hi;
        grow += 1;
        if grow > 2000 {
            return R::infinity();
        }
    }
    let mut lo = R::zero();
    for _ in 0..200 {
        let mid = (lo + hi) / r(2.0);
        if f(mid) >= tau {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Parse a Φ key such as `exp:alpha=1`, `exp-pow:alpha=1,gamma=0.5`,
/// `power:p=2`, `tlog1p`, `identity`, `const:c=1`.
pub fn parse_phi_key<R: Real>(key: &str) -> Result<PhiFunction<R>> {
    let bad = |msg: &str| Error::Key { key: key.to_string(), msg: msg.to_string() };
    let (name, args) = match key.split_once(':') {
        Some((n, a)) => (n, a),
        None => (key, ""),
    };
    let get = |pname: &str| -> Result<Option<f64>> {
        if args.is_empty() {
            return Ok(None);
        }
        for part in args.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(&format!("malformed parameter `{part}`")))?;
            if k.trim() == pname {
                return v
                    .trim()
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| bad(&format!("parameter `{pname}` is not a number")));
            }
        }
        Ok(None)
    };
    match name {
        "exp" => Ok(PhiFunction::Exp { alpha: r(get("alpha")?.unwrap_or(1.0)) }),
        "exp-pow" => Ok(PhiFunction::ExpPow {
            alpha: r(get("alpha")?.unwrap_or(1.0)),
            gamma: r(get("gamma")?.ok_or_else(|| bad("exp-pow needs gamma="))?),
        }),
        "power" => Ok(PhiFunction::Power { p: r(get("p")?.ok_or_else(|| bad("power needs p="))?) }),
        "tlog1p" => Ok(PhiFunction::TLog1p),
        "identity" => Ok(PhiFunction::Identity),
        "const" => Ok(PhiFunction::Constant { c: r(get("c")?.ok_or_else(|| bad("const needs c="))?) }),
        other => Err(bad(&format!("unknown phi `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_identity() {
        let phi = PhiFunction::<f64>::Identity;
        assert_eq!(phi.inverse(5.0), 5.0);
    }

    #[test]
    fn inverse_constant_empty_superlevel() {
        let phi = PhiFunction::Constant { c: 1.0f64 };
        assert!(phi.inverse(2.0).is_infinite());
        assert_eq!(phi.inverse(0.5), 0.0);
    }

    #[test]
    fn inverse_exp() {
        let phi = PhiFunction::Exp { alpha: 1.0f64 };
        let tau = (2.0f64).exp();
        assert!((phi.inverse(tau) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_of_eval_bounded_by_t() {
        let phis: Vec<PhiFunction<f64>> = vec![
            PhiFunction::Exp { alpha: 0.7 },
            PhiFunction::Power { p: 2.0 },
            PhiFunction::TLog1p,
            PhiFunction::Identity,
            PhiFunction::Constant { c: 3.0 },
            PhiFunction::table(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 5.0)]).unwrap(),
        ];
        for phi in &phis {
            let mut prev = -1.0;
            for i in 0..1000 {
                let t = 0.01 * i as f64;
                let inv = phi.inverse(phi.eval(t));
                assert!(inv <= t + 1e-9, "phi⁻¹(phi({t})) = {inv}");
                // monotone in tau
                let v = phi.inverse(0.02 * i as f64);
                assert!(v >= prev - 1e-12);
                prev = if v.is_finite() { v } else { prev };
            }
        }
    }

    #[test]
    fn table_extrapolates_by_last_slope() {
        let phi = PhiFunction::table(vec![(0.0f64, 0.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        assert!((phi.eval(4.0) - 5.0).abs() < 1e-12);
        assert!((phi.inverse(5.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn parse_keys() {
        assert!(parse_phi_key::<f64>("exp:alpha=2").is_ok());
        assert!(parse_phi_key::<f64>("exp-pow:alpha=1,gamma=0.5").is_ok());
        assert!(parse_phi_key::<f64>("power:p=2").is_ok());
        assert!(parse_phi_key::<f64>("what").is_err());
    }
}
