//! Scalar test fields φ: C → R used by the oscillation and criteria probes.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::MuField;
use crate::num::{r, Real};
use crate::point::ComplexPoint;

/// A real-valued field on the plane.
#[derive(Clone)]
pub enum ScalarField<R> {
    /// φ ≡ c
    Const(R),
    /// φ = log(1/|z|)
    LogInv,
    /// φ = log²(1/|z|)
    LogSqInv,
    /// φ = 1/|z|
    InvAbs,
    /// φ = Re z
    Re,
    /// φ = indicator of the half-plane Re z > 0
    HalfPlane,
    /// φ = K_μ of a field
    KMu(Arc<MuField<R>>),
    /// φ = K^T_μ(·, z0) of a field
    KTangent(Arc<MuField<R>>, ComplexPoint<R>),
    /// arbitrary closure
    Custom(Arc<dyn Fn(Complex<R>) -> R + Send + Sync>),
}

impl<R: Real> ScalarField<R> {
    pub fn eval(&self, z: Complex<R>) -> R {
        match self {
            ScalarField::Const(c) => *c,
            ScalarField::LogInv => {
                let n = z.norm();
                if n == R::zero() {
                    R::infinity()
                } else {
                    (R::one() / n).ln()
                }
            }
            ScalarField::LogSqInv => {
                let n = z.norm();
                if n == R::zero() {
                    R::infinity()
                } else {
                    let l = (R::one() / n).ln();
                    l * l
                }
            }
            ScalarField::InvAbs => {
                let n = z.norm();
                if n == R::zero() {
                    R::infinity()
                } else {
                    R::one() / n
                }
            }
            ScalarField::Re => z.re,
            ScalarField::HalfPlane => {
                if z.re > R::zero() {
                    R::one()
                } else {
                    R::zero()
                }
            }
            ScalarField::KMu(f) => f.k_mu(z),
            ScalarField::KTangent(f, z0) => f.k_tangent(z, *z0).unwrap_or_else(|_| f.k_cap()),
            ScalarField::Custom(f) => f(z),
        }
    }

    pub fn custom(f: impl Fn(Complex<R>) -> R + Send + Sync + 'static) -> Self {
        ScalarField::Custom(Arc::new(f))
    }
}

impl<R: Real> std::fmt::Debug for ScalarField<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ScalarField::Const(_) => "const",
            ScalarField::LogInv => "log-inv",
            ScalarField::LogSqInv => "log-sq-inv",
            ScalarField::InvAbs => "inv-abs",
            ScalarField::Re => "re",
            ScalarField::HalfPlane => "half-plane",
            ScalarField::KMu(_) => "k-mu",
            ScalarField::KTangent(_, _) => "k-tangent",
            ScalarField::Custom(_) => "custom",
        };
        write!(f, "ScalarField({name})")
    }
}

/// Parse a scalar-field key: `const:c=1`, `log-inv`, `log-sq-inv`, `inv-abs`,
/// `re`, `half-plane`, `kmu:<field key>`, `ktangent:<field key>`.
pub fn parse_scalar_key<R: Real>(key: &str) -> Result<ScalarField<R>> {
    let bad = |msg: &str| Error::Key { key: key.to_string(), msg: msg.to_string() };
    if let Some(rest) = key.strip_prefix("kmu:") {
        return Ok(ScalarField::KMu(Arc::new(crate::field::parse_field_key(rest)?)));
    }
    if let Some(rest) = key.strip_prefix("ktangent:") {
        return Ok(ScalarField::KTangent(
            Arc::new(crate::field::parse_field_key(rest)?),
            ComplexPoint::zero(),
        ));
    }
    match key.split_once(':') {
        Some(("const", args)) => {
            let v = args
                .strip_prefix("c=")
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| bad("const needs c=<number>"))?;
            Ok(ScalarField::Const(r(v)))
        }
        None => match key {
            "log-inv" => Ok(ScalarField::LogInv),
            "log-sq-inv" => Ok(ScalarField::LogSqInv),
            "inv-abs" => Ok(ScalarField::InvAbs),
            "re" => Ok(ScalarField::Re),
            "half-plane" => Ok(ScalarField::HalfPlane),
            other => Err(bad(&format!("unknown scalar field `{other}`"))),
        },
        Some((other, _)) => Err(bad(&format!("unknown scalar field `{other}`"))),
    }
}
