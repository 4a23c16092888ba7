//! Integral existence criteria as numeric probes.
//!
//! Every "= ∞" or "o(·)" condition is sampled along a geometric ladder of
//! cutoffs and classified three ways. A bounded ratio counts as holds-like
//! even when it plateaus at a positive level; only sustained growth is
//! fails-like. Traces and fitted slopes are attached so verdicts can be
//! audited.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::MuField;
use crate::num::{r, Real};
use crate::oscillation::disk_mean;
use crate::phi::PhiFunction;
use crate::point::ComplexPoint;
use crate::quad::log_trapezoid;
use crate::scalar::ScalarField;
use crate::spherical::SphericalNormalization;
use crate::verdict::{classify_increments, ratio_probe, CriterionVerdict, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ToZero,
    ToInfinity,
}

/// Default 20-rung dyadic ladder from `start` in the given direction.
pub fn default_ladder<R: Real>(start: R, direction: Direction) -> Vec<R> {
    let factor = match direction {
        Direction::ToZero => r::<R>(0.5),
        Direction::ToInfinity => r::<R>(2.0),
    };
    crate::quad::geometric_ladder(start, factor, 21)
}

/// Shared engine for all divergence conditions: evaluates a cumulative
/// quantity F along the ladder and classifies whether it keeps growing
/// (holds-like), converges (fails-like), or neither. Extends the ladder
/// once, at the same geometric ratio, when the first pass is inconclusive.
pub fn divergence_probe<R: Real>(
    f: impl Fn(R) -> R,
    direction: Direction,
    ladder: &[R],
) -> CriterionVerdict<R> {
    assert!(ladder.len() >= 6, "divergence probe needs at least 6 rungs");
    let ok = match direction {
        Direction::ToZero => ladder.windows(2).all(|w| w[1] < w[0] && w[1] > R::zero()),
        Direction::ToInfinity => ladder.windows(2).all(|w| w[1] > w[0] && w[0] > R::zero()),
    };
    assert!(ok, "ladder must be geometric in the probe direction");

    let eval = |rungs: &[R]| -> (Vec<R>, Option<usize>) {
        let mut values = Vec::with_capacity(rungs.len());
        for &x in rungs {
            let v = f(x);
            if !v.is_finite() {
                values.push(v);
                let i = values.len() - 1;
                return (values, Some(i));
            }
            values.push(v);
        }
        (values, None)
    };

    let (values, bad) = eval(ladder);
    if let Some(i) = bad {
        return CriterionVerdict {
            verdict: Verdict::FailsLike,
            probe_values: values,
            fitted_slope: None,
            notes: vec![format!("non-finite value at ladder rung {i}")],
        };
    }
    let increments: Vec<R> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let (verdict, slope, mut notes) = classify_increments(&increments);
    if verdict != Verdict::Inconclusive {
        return CriterionVerdict { verdict, probe_values: values, fitted_slope: slope, notes };
    }

    let ratio = ladder[ladder.len() - 1] / ladder[ladder.len() - 2];
    let mut extended = ladder.to_vec();
    let mut last = *ladder.last().unwrap();
    for _ in 0..ladder.len() {
        last = last * ratio;
        if !last.is_normal() {
            break;
        }
        extended.push(last);
    }
    let (values, bad) = eval(&extended);
    notes.push("ladder auto-extended once".into());
    if let Some(i) = bad {
        notes.push(format!("non-finite value at extended rung {i}"));
        return CriterionVerdict {
            verdict: Verdict::FailsLike,
            probe_values: values,
            fitted_slope: None,
            notes,
        };
    }
    let increments: Vec<R> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let (verdict, slope, notes2) = classify_increments(&increments);
    notes.extend(notes2);
    CriterionVerdict { verdict, probe_values: values, fitted_slope: slope, notes }
}

/// Mean over `m` angles of a scalar function of position on |z − c| = radius.
fn circle_mean<R: Real>(g: impl Fn(Complex<R>) -> R, c: Complex<R>, radius: R, m: usize) -> R {
    let mut sum = R::zero();
    let mut count = 0usize;
    for j in 0..m {
        let th = r::<R>(2.0 * std::f64::consts::PI * j as f64 / m as f64);
        let v = g(c + Complex::from_polar(radius, th));
        if v.is_finite() {
            sum += v;
            count += 1;
        }
    }
    if count == 0 {
        R::zero()
    } else {
        sum / r(count as f64)
    }
}

const ANGLES: usize = 32;

/// Probes ∫_0^{eps0} dr / (r · k^T(z0, r)) = ∞, where k^T(z0, r) is the
/// circle mean of the tangent dilatation.
pub fn lehto_check<R: Real>(
    field: &MuField<R>,
    z0: Complex<R>,
    eps0: R,
) -> Result<CriterionVerdict<R>> {
    if eps0 <= R::zero() {
        return Err(Error::Domain("lehto_check: eps0 must be positive".into()));
    }
    let p = ComplexPoint::Finite(z0);
    let kt = |rad: R| -> R {
        field
            .circle_mean_kt(p, rad, ANGLES)
            .map(|m| m.value)
            .unwrap_or_else(|_| field.k_cap())
    };
    let floor = R::one() / field.k_cap();
    let f = |eps: R| log_trapezoid(|rr| R::one() / (rr * kt(rr).max(floor)), eps, eps0, 64);
    Ok(divergence_probe(f, Direction::ToZero, &default_ladder(eps0 * r(0.5), Direction::ToZero)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogVariant {
    Log,
    LogLog,
}

/// Probes  ∫_{ε<|z−z0|<eps0} K^T(z,z0) dm/|z−z0|²  =  o(log²(1/ε))
/// (or the iterated-log variant).
pub fn log_scale_check<R: Real>(
    field: &MuField<R>,
    z0: Complex<R>,
    eps0: R,
    variant: LogVariant,
) -> Result<CriterionVerdict<R>> {
    if eps0 <= R::zero() {
        return Err(Error::Domain("log_scale_check: eps0 must be positive".into()));
    }
    let p = ComplexPoint::Finite(z0);
    let kt = |rad: R| -> R {
        field
            .circle_mean_kt(p, rad, ANGLES)
            .map(|m| m.value)
            .unwrap_or_else(|_| field.k_cap())
    };
    // keep the denominator positive on the whole ladder
    let start = match variant {
        LogVariant::Log => eps0.min(r(0.25)),
        LogVariant::LogLog => eps0.min(r(0.03125)),
    };
    let ladder = default_ladder(start, Direction::ToZero);
    let two_pi = R::PI() + R::PI();
    let mut lhs = R::zero();
    let mut hi = eps0;
    let mut ratios = Vec::with_capacity(ladder.len());
    for &eps in &ladder {
        lhs += two_pi * log_trapezoid(|rr| kt(rr) / rr, eps, hi, 64);
        hi = eps;
        let l = (R::one() / eps).ln();
        let denom = match variant {
            LogVariant::Log => l * l,
            LogVariant::LogLog => l.ln() * l.ln(),
        };
        ratios.push(lhs / denom);
    }
    Ok(ratio_probe(&ratios))
}

/// Probes ∫_delta^∞ log Φ(t) dt/t² = ∞.
pub fn phi_divergence_check<R: Real>(
    phi: &PhiFunction<R>,
    delta: R,
) -> Result<CriterionVerdict<R>> {
    let t0 = phi.zero_threshold();
    if delta <= t0 || delta <= R::zero() {
        return Err(Error::Domain("phi_divergence_check: need delta > max(0, t0)".into()));
    }
    if phi.eval(delta) <= R::zero() {
        return Err(Error::Domain("phi_divergence_check: Φ vanishes beyond delta".into()));
    }
    let f = |t_hi: R| log_trapezoid(|t| phi.log_eval(t) / (t * t), delta, t_hi, 64);
    Ok(divergence_probe(
        f,
        Direction::ToInfinity,
        &default_ladder(delta * r(2.0), Direction::ToInfinity),
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Remark11Report<R> {
    /// (condition name, verdict) for each of the six equivalent integrals.
    pub conditions: Vec<(String, CriterionVerdict<R>)>,
    /// True when all six verdicts agree.
    pub consistent: bool,
}

/// Probes the six equivalent divergence conditions on H = log Φ
/// (derivative form, Stieltjes form, dt/t² form, the substitution t ↦ 1/t,
/// and the two inverse-function forms).
pub fn remark11_equivalences<R: Real>(phi: &PhiFunction<R>) -> Result<Remark11Report<R>> {
    let t_star = phi.zero_threshold();
    let delta = (t_star + R::one()).max(r(std::f64::consts::E));
    if phi.eval(delta) <= R::zero() {
        return Err(Error::Domain("remark11_equivalences: Φ vanishes on the probe range".into()));
    }
    let h = |t: R| phi.log_eval(t);
    let dh = |t: R| {
        // H'(t) = 0 below the zero threshold by the completion convention.
        if t <= t_star {
            return R::zero();
        }
        let step = t * r::<R>(1e-6);
        (h(t + step) - h(t - step)) / (step + step)
    };
    let up = default_ladder(delta * r(2.0), Direction::ToInfinity);

    let c1 = divergence_probe(
        |t_hi: R| log_trapezoid(|t| dh(t) / t, delta, t_hi, 64),
        Direction::ToInfinity,
        &up,
    );
    // Lebesgue–Stieltjes sum Σ ΔH / t on a fine log grid.
    let c2 = divergence_probe(
        |t_hi: R| {
            let n = 512usize;
            let (la, lb) = (delta.ln(), t_hi.ln());
            let du = (lb - la) / r::<R>(n as f64);
            let mut s = R::zero();
            for i in 0..n {
                let t_lo = (la + du * r::<R>(i as f64)).exp();
                let t_hi2 = (la + du * r::<R>(i as f64 + 1.0)).exp();
                s += (h(t_hi2) - h(t_lo)) / t_lo;
            }
            s
        },
        Direction::ToInfinity,
        &up,
    );
    let c3 = divergence_probe(
        |t_hi: R| log_trapezoid(|t| h(t) / (t * t), delta, t_hi, 64),
        Direction::ToInfinity,
        &up,
    );
    let c4 = divergence_probe(
        |eps: R| log_trapezoid(|t| h(R::one() / t), eps, R::one() / delta, 64),
        Direction::ToZero,
        &default_ladder(r::<R>(0.5) / delta, Direction::ToZero),
    );
    let eta0 = h(delta).max(r(0.5));
    let c5 = divergence_probe(
        |eta_hi: R| {
            log_trapezoid(|eta| R::one() / phi.log_inverse(eta).max(r(1e-300)), eta0, eta_hi, 64)
        },
        Direction::ToInfinity,
        &default_ladder(eta0 * r(2.0), Direction::ToInfinity),
    );
    let tau0 = phi.eval(delta);
    let c6 = divergence_probe(
        |tau_hi: R| {
            log_trapezoid(|tau| R::one() / (tau * phi.inverse(tau).max(r(1e-300))), tau0, tau_hi, 64)
        },
        Direction::ToInfinity,
        &default_ladder(tau0 * r(4.0), Direction::ToInfinity),
    );

    let conditions: Vec<(String, CriterionVerdict<R>)> = vec![
        ("derivative dt/t".into(), c1),
        ("stieltjes dH/t".into(), c2),
        ("H dt/t^2".into(), c3),
        ("H(1/t) near 0".into(), c4),
        ("d eta / H^{-1}".into(), c5),
        ("d tau / (tau Phi^{-1})".into(), c6),
    ];
    let first = conditions[0].1.verdict;
    let consistent = conditions.iter().all(|(_, v)| v.verdict == first);
    Ok(Remark11Report { conditions, consistent })
}

/// Positive weight families ψ(t) used in the annular type conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PsiFamily<R> {
    /// ψ(t) = 1/t
    InvT,
    /// ψ(t) = 1/(t·log(1/t)), for scales t < 1
    InvTLogInv,
    /// ψ(t) = 1/(t·log(1/t)·log log(1/t)·…), depth ≤ 3 iterations
    IterLog { depth: u32 },
    /// ψ(t) = c
    Const(R),
    /// ψ(t) = t·log t, for scales t > 1
    TLogT,
    /// tabulated, log-linear interpolation
    Table(Vec<(R, R)>),
}

impl<R: Real> PsiFamily<R> {
    pub fn validate(&self) -> Result<()> {
        match self {
            PsiFamily::IterLog { depth } if *depth == 0 || *depth > 3 => {
                Err(Error::Domain("psi iter-log depth must be 1..=3".into()))
            }
            PsiFamily::Const(c) if *c <= R::zero() => {
                Err(Error::Domain("psi const must be positive".into()))
            }
            PsiFamily::Table(pts) if pts.len() < 2 => {
                Err(Error::Domain("psi table needs at least 2 points".into()))
            }
            _ => Ok(()),
        }
    }

    /// ψ(t); log factors are clamped away from 0 so the value stays positive
    /// slightly outside the natural domain of the builtin.
    pub fn eval(&self, t: R) -> R {
        let tiny = r::<R>(1e-12);
        let t = t.max(tiny);
        match self {
            PsiFamily::InvT => R::one() / t,
            PsiFamily::InvTLogInv => R::one() / (t * (R::one() / t).ln().max(tiny)),
            PsiFamily::IterLog { depth } => {
                let mut denom = t;
                let mut l = (R::one() / t).ln().max(tiny);
                for _ in 0..*depth {
                    denom = denom * l;
                    l = l.ln().max(tiny);
                }
                R::one() / denom
            }
            PsiFamily::Const(c) => *c,
            PsiFamily::TLogT => t * t.ln().max(tiny),
            PsiFamily::Table(pts) => {
                let first = pts[0];
                let last = pts[pts.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                for w in pts.windows(2) {
                    if t <= w[1].0 {
                        let s = (t.ln() - w[0].0.ln()) / (w[1].0.ln() - w[0].0.ln());
                        return w[0].1 + (w[1].1 - w[0].1) * s;
                    }
                }
                last.1
            }
        }
        .max(tiny)
    }
}

/// Parse a ψ key: `inv-t`, `inv-t-log`, `iter-log:depth=2`, `const:c=1`,
/// `t-log-t`.
pub fn parse_psi_key<R: Real>(key: &str) -> Result<PsiFamily<R>> {
    let bad = |msg: &str| Error::Key { key: key.to_string(), msg: msg.to_string() };
    let psi = match key.split_once(':') {
        None => match key {
            "inv-t" => PsiFamily::InvT,
            "inv-t-log" => PsiFamily::InvTLogInv,
            "t-log-t" => PsiFamily::TLogT,
            other => return Err(bad(&format!("unknown psi `{other}`"))),
        },
        Some(("iter-log", args)) => {
            let d = args
                .strip_prefix("depth=")
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| bad("iter-log needs depth=<1..3>"))?;
            PsiFamily::IterLog { depth: d }
        }
        Some(("const", args)) => {
            let c = args
                .strip_prefix("c=")
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| bad("const needs c=<number>"))?;
            PsiFamily::Const(r(c))
        }
        Some((other, _)) => return Err(bad(&format!("unknown psi `{other}`"))),
    };
    psi.validate()?;
    Ok(psi)
}

/// Probes ∫_{R0<|z|<R} K_μ(z) ψ²(|z|) dm/|z|⁴ = o(I²(R)) as R → ∞,
/// with I(R) = ∫_{R0}^R ψ(t) dt/t².
pub fn psi_infinity_check<R: Real>(
    field: &MuField<R>,
    psi: &PsiFamily<R>,
    r0: R,
) -> Result<CriterionVerdict<R>> {
    psi.validate()?;
    if r0 <= R::zero() {
        return Err(Error::Domain("psi_infinity_check: R0 must be positive".into()));
    }
    let zero = Complex::new(R::zero(), R::zero());
    let kmean = |rad: R| circle_mean(|z| field.k_mu(z), zero, rad, ANGLES);
    let two_pi = R::PI() + R::PI();
    let ladder = default_ladder(r0 * r(2.0), Direction::ToInfinity);
    let mut lhs = R::zero();
    let mut i_r = R::zero();
    let mut lo = r0;
    let mut ratios = Vec::with_capacity(ladder.len());
    for &hi in &ladder {
        lhs += two_pi
            * log_trapezoid(|rr| kmean(rr) * psi.eval(rr).powi(2) / rr.powi(3), lo, hi, 64);
        i_r += log_trapezoid(|t| psi.eval(t) / (t * t), lo, hi, 64);
        lo = hi;
        if !i_r.is_finite() || i_r <= R::zero() {
            return Err(Error::Domain("psi_infinity_check: I(R) not finite/positive".into()));
        }
        ratios.push(lhs / (i_r * i_r));
    }
    Ok(ratio_probe(&ratios))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfinityTailReport<R> {
    /// R²·∫_{|z|>R} |μ| dS → 0 probe.
    pub lebesgue: CriterionVerdict<R>,
    /// R²·∫_{|z|>R} K_μ dS bounded probe.
    pub strong: CriterionVerdict<R>,
    /// (R²/π)·∫_{|z|>R} K_μ dS compared against the limit 1.
    pub stronger: CriterionVerdict<R>,
    pub stronger_limit: R,
    pub normalization: SphericalNormalization,
    pub notes: Vec<String>,
}

/// ∫_{|z|>R} g dS by radial quadrature with a 1/r³ tail completion; `gbar`
/// is the circle mean of the integrand.
fn spherical_tail<R: Real>(gbar: &impl Fn(R) -> R, from: R, norm: SphericalNormalization) -> R {
    let factor = match norm {
        SphericalNormalization::Unit => R::one(),
        SphericalNormalization::FullArea => r(4.0),
    };
    // Substituting u = 1/(1+r²) turns the integral into π ∫₀^{u0} ḡ du,
    // which the midpoint rule handles exactly for circle-constant ḡ and to
    // O(n⁻²) otherwise, with no truncation of the tail.
    let u0 = R::one() / (R::one() + from * from);
    let n = 512usize;
    let du = u0 / r::<R>(n as f64);
    let mut sum = R::zero();
    for i in 0..n {
        let u = du * r::<R>(i as f64 + 0.5);
        let rr = (R::one() / u - R::one()).max(R::zero()).sqrt();
        sum += gbar(rr);
    }
    factor * R::PI() * sum * du
}

/// The three tail conditions at infinity, probed on R = r0·2^j.
pub fn infinity_tail_checks<R: Real>(
    field: &MuField<R>,
    norm: SphericalNormalization,
    r0: R,
    depth: u32,
) -> Result<InfinityTailReport<R>> {
    if r0 <= R::zero() {
        return Err(Error::Domain("infinity_tail_checks: r0 must be positive".into()));
    }
    let zero = Complex::new(R::zero(), R::zero());
    let mu_bar = |rad: R| circle_mean(|z| field.eval_mu(z).norm(), zero, rad, ANGLES);
    let k_bar = |rad: R| circle_mean(|z| field.k_mu(z), zero, rad, ANGLES);

    let mut a_vals = Vec::new();
    let mut b_vals = Vec::new();
    let mut c_vals = Vec::new();
    for j in 0..=depth {
        let big_r = r0 * r::<R>(2.0f64.powi(j as i32));
        let r_sq = big_r * big_r;
        let mu_tail = spherical_tail(&mu_bar, big_r, norm);
        let k_tail = spherical_tail(&k_bar, big_r, norm);
        if !mu_tail.is_finite() || !k_tail.is_finite() {
            return Err(Error::Domain("infinity_tail_checks: non-integrable tail".into()));
        }
        a_vals.push(r_sq * mu_tail);
        b_vals.push(r_sq * k_tail);
        c_vals.push(r_sq * k_tail / R::PI());
    }

    // (a): o(1/R²), i.e. the scaled tail must decay to 0.
    let a_scale = a_vals.iter().copied().fold(R::zero(), R::max);
    let lebesgue = if a_scale <= r(1e-10) {
        CriterionVerdict {
            verdict: Verdict::HoldsLike,
            probe_values: a_vals,
            fitted_slope: None,
            notes: vec!["tail vanishes identically".into()],
        }
    } else {
        let n = a_vals.len();
        let tail_max = a_vals[n - 3..].iter().copied().fold(R::neg_infinity(), R::max);
        let prev_max = a_vals[..n - 3].iter().copied().fold(R::neg_infinity(), R::max);
        let verdict = if tail_max <= prev_max * r(0.3) {
            Verdict::HoldsLike
        } else if tail_max >= prev_max * r(0.7) {
            Verdict::FailsLike
        } else {
            Verdict::Inconclusive
        };
        CriterionVerdict { verdict, probe_values: a_vals, fitted_slope: None, notes: vec![] }
    };

    // (b): O(1/R²), i.e. the scaled tail stays bounded.
    let strong = ratio_probe(&b_vals);

    // (c): the limit itself, against 1.
    let limit = *c_vals.last().unwrap();
    let mut notes = Vec::new();
    let verdict = if (limit - R::one()).abs() <= r(1e-2) {
        Verdict::HoldsLike
    } else {
        if (limit - r::<R>(4.0)).abs() <= r(4e-2) {
            notes.push(
                "limit is 4, not 1: the two stated normalizations disagree by the area factor 4"
                    .into(),
            );
        }
        Verdict::FailsLike
    };
    let stronger =
        CriterionVerdict { verdict, probe_values: c_vals, fitted_slope: None, notes: notes.clone() };

    Ok(InfinityTailReport {
        lebesgue,
        strong,
        stronger,
        stronger_limit: limit,
        normalization: norm,
        notes,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prop7Report<R> {
    /// Quadrature value of ∫_D Φ(Q) dm (π × disk mean).
    pub premise_integral: R,
    /// False when the quadrature overflowed: the premise fails, which is an
    /// input condition, not a bug.
    pub premise_finite: bool,
    /// The companion divergence condition on Φ.
    pub phi_condition: CriterionVerdict<R>,
    /// Conclusion probe ∫_ε dr/(r·q(r)); absent when the premise failed.
    pub conclusion: Option<CriterionVerdict<R>>,
}

/// Integrability premise + conclusion probe: if ∫_D Φ(Q) dm < ∞ and Φ grows
/// fast enough, then ∫_0 dr/(r q(r)) = ∞ with q the circle mean of Q.
pub fn prop7_check<R: Real>(
    q_field: &ScalarField<R>,
    phi: &PhiFunction<R>,
) -> Result<Prop7Report<R>> {
    let zero = Complex::new(R::zero(), R::zero());
    let q2 = q_field.clone();
    let phi_owned = phi.clone();
    let composed = ScalarField::custom(move |z| {
        let qv = q2.eval(z);
        if qv.is_finite() {
            phi_owned.eval(qv)
        } else {
            R::infinity()
        }
    });
    let mean = disk_mean(&composed, zero, R::one(), 262144)?;
    let premise_finite = mean.value.is_finite() && !mean.flagged;
    let premise_integral = mean.value * R::PI();

    let delta = (phi.zero_threshold() + R::one()).max(R::one());
    let phi_condition = phi_divergence_check(phi, delta)?;

    if !premise_finite {
        return Ok(Prop7Report { premise_integral, premise_finite, phi_condition, conclusion: None });
    }
    let q3 = q_field.clone();
    let qbar = move |rad: R| circle_mean(|z| q3.eval(z), zero, rad, 64).max(r(1e-12));
    // upper cutoff 1/2 keeps the probe focused on the ε → 0 end.
    let f = |eps: R| log_trapezoid(|rr| R::one() / (rr * qbar(rr)), eps, r(0.5), 64);
    let conclusion =
        divergence_probe(f, Direction::ToZero, &default_ladder(r(0.25), Direction::ToZero));
    Ok(Prop7Report {
        premise_integral,
        premise_finite,
        phi_condition,
        conclusion: Some(conclusion),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma3Report<R> {
    /// Per finite probe point: the annular type-condition verdict.
    pub per_point: Vec<(Complex<R>, CriterionVerdict<R>)>,
    /// The condition at infinity, probed through the 1/z substitution.
    pub at_infinity: Option<CriterionVerdict<R>>,
    pub all_hold: bool,
}

/// Per-point probes of the general type condition
/// ∫_{ε<|z−z0|<eps0} K^T(z,z0) ψ²(|z−z0|) dm = o(I²(ε)), I(ε)=∫_ε^{eps0} ψ dt,
/// together with the analogous condition at infinity over R0 < |z| < R with
/// weight dm/|z|⁴ and I(R)=∫ ψ dt/t².
pub fn lemma3_general_check<R: Real>(
    field: &MuField<R>,
    points: &[(ComplexPoint<R>, PsiFamily<R>)],
    eps0: R,
    r0: R,
) -> Result<Lemma3Report<R>> {
    if eps0 <= R::zero() || r0 <= R::zero() {
        return Err(Error::Domain("lemma3_general_check: eps0 and r0 must be positive".into()));
    }
    let two_pi = R::PI() + R::PI();
    let mut per_point = Vec::new();
    let mut at_infinity = None;
    let mut all_hold = true;
    for (p, psi) in points {
        psi.validate()?;
        match p.finite() {
            Some(z0) => {
                let kt = |rad: R| -> R {
                    field
                        .circle_mean_kt(ComplexPoint::Finite(z0), rad, ANGLES)
                        .map(|m| m.value)
                        .unwrap_or_else(|_| field.k_cap())
                };
                let ladder = default_ladder(eps0 * r(0.5), Direction::ToZero);
                let mut lhs = R::zero();
                let mut i_eps = R::zero();
                let mut hi = eps0;
                let mut ratios = Vec::with_capacity(ladder.len());
                for &eps in &ladder {
                    lhs += two_pi
                        * log_trapezoid(|rr| kt(rr) * psi.eval(rr).powi(2) * rr, eps, hi, 64);
                    i_eps += log_trapezoid(|t| psi.eval(t), eps, hi, 64);
                    hi = eps;
                    ratios.push(lhs / (i_eps * i_eps).max(r(1e-300)));
                }
                let v = ratio_probe(&ratios);
                all_hold &= v.verdict == Verdict::HoldsLike;
                per_point.push((z0, v));
            }
            None => {
                let kt0 = |rad: R| -> R {
                    field
                        .circle_mean_kt(ComplexPoint::zero(), rad, ANGLES)
                        .map(|m| m.value)
                        .unwrap_or_else(|_| field.k_cap())
                };
                let ladder = default_ladder(r0 * r(2.0), Direction::ToInfinity);
                let mut lhs = R::zero();
                let mut i_r = R::zero();
                let mut lo = r0;
                let mut ratios = Vec::with_capacity(ladder.len());
                for &hi2 in &ladder {
                    lhs += two_pi
                        * log_trapezoid(
                            |rr| kt0(rr) * psi.eval(rr).powi(2) / rr.powi(3),
                            lo,
                            hi2,
                            64,
                        );
                    i_r += log_trapezoid(|t| psi.eval(t) / (t * t), lo, hi2, 64);
                    lo = hi2;
                    ratios.push(lhs / (i_r * i_r).max(r(1e-300)));
                }
                let v = ratio_probe(&ratios);
                all_hold &= v.verdict == Verdict::HoldsLike;
                at_infinity = Some(v);
            }
        }
    }
    Ok(Lemma3Report { per_point, at_infinity, all_hold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{KProfile, ProfileMode};

    #[test]
    fn divergence_probe_examples() {
        let down = default_ladder(0.5, Direction::ToZero);
        let v = divergence_probe(|e: f64| (1.0 / e).ln(), Direction::ToZero, &down);
        assert_eq!(v.verdict, Verdict::HoldsLike);
        let v = divergence_probe(|e: f64| 1.0 - e, Direction::ToZero, &down);
        assert_eq!(v.verdict, Verdict::FailsLike);
        let up = default_ladder(4.0, Direction::ToInfinity);
        let v = divergence_probe(|t: f64| t.ln().ln(), Direction::ToInfinity, &up);
        assert_eq!(v.verdict, Verdict::HoldsLike);
    }

    #[test]
    fn lehto_examples() {
        let zero = Complex::new(0.0, 0.0);
        let f = MuField::<f64>::zero();
        assert_eq!(lehto_check(&f, zero, 0.5).unwrap().verdict, Verdict::HoldsLike);
        let f = MuField::<f64>::radial_stretch(3.0);
        assert_eq!(lehto_check(&f, zero, 0.5).unwrap().verdict, Verdict::HoldsLike);
        let f = MuField::profile(KProfile::LogSqInv, ProfileMode::Angular);
        assert_eq!(lehto_check(&f, zero, 0.25).unwrap().verdict, Verdict::FailsLike);
    }

    #[test]
    fn log_scale_examples() {
        let zero = Complex::new(0.0, 0.0);
        let f = MuField::<f64>::zero();
        assert_eq!(
            log_scale_check(&f, zero, 0.5, LogVariant::Log).unwrap().verdict,
            Verdict::HoldsLike
        );
        let f = MuField::<f64>::radial_stretch(2.0);
        assert_eq!(
            log_scale_check(&f, zero, 0.5, LogVariant::Log).unwrap().verdict,
            Verdict::HoldsLike
        );
        let f = MuField::profile(KProfile::LogSqInv, ProfileMode::Angular);
        assert_eq!(
            log_scale_check(&f, zero, 0.25, LogVariant::Log).unwrap().verdict,
            Verdict::FailsLike
        );
    }

    #[test]
    fn phi_divergence_examples() {
        let exp = PhiFunction::Exp { alpha: 1.0f64 };
        assert_eq!(phi_divergence_check(&exp, 1.0).unwrap().verdict, Verdict::HoldsLike);
        let sq = PhiFunction::Power { p: 2.0f64 };
        assert_eq!(phi_divergence_check(&sq, 2.0).unwrap().verdict, Verdict::FailsLike);
        let exp_sqrt = PhiFunction::ExpPow { alpha: 1.0f64, gamma: 0.5 };
        assert_eq!(phi_divergence_check(&exp_sqrt, 1.0).unwrap().verdict, Verdict::FailsLike);
    }

    #[test]
    fn remark11_exponential_consistent_holds() {
        let rep = remark11_equivalences(&PhiFunction::Exp { alpha: 1.0f64 }).unwrap();
        assert!(rep.consistent, "verdicts: {:?}", rep.conditions.iter().map(|c| c.1.verdict).collect::<Vec<_>>());
        assert!(rep.conditions.iter().all(|c| c.1.verdict == Verdict::HoldsLike));
    }

    #[test]
    fn remark11_power_consistent_fails() {
        let rep = remark11_equivalences(&PhiFunction::Power { p: 3.0f64 }).unwrap();
        assert!(rep.consistent, "verdicts: {:?}", rep.conditions.iter().map(|c| c.1.verdict).collect::<Vec<_>>());
        assert!(rep.conditions.iter().all(|c| c.1.verdict == Verdict::FailsLike));
    }

    #[test]
    fn remark11_convex_table_consistent() {
        // convex, asymptotically linear table: behaves like Φ(t) ~ c·t.
        let phi = PhiFunction::table(vec![
            (0.0f64, 1.0),
            (1.0, 1.5),
            (2.0, 3.0),
            (4.0, 8.0),
            (8.0, 20.0),
        ])
        .unwrap();
        let rep = remark11_equivalences(&phi).unwrap();
        assert!(rep.consistent, "verdicts: {:?}", rep.conditions.iter().map(|c| c.1.verdict).collect::<Vec<_>>());
    }

    #[test]
    fn psi_infinity_examples() {
        let zero_field = MuField::<f64>::zero();
        let v = psi_infinity_check(&zero_field, &PsiFamily::Const(1.0), 1.0).unwrap();
        assert_eq!(v.verdict, Verdict::HoldsLike);

        let log_field = MuField::profile(KProfile::LogAbs, ProfileMode::Angular);
        let v = psi_infinity_check(&log_field, &PsiFamily::TLogT, 4.0).unwrap();
        assert_eq!(v.verdict, Verdict::HoldsLike);

        let sq_field =
            MuField::profile(KProfile::Power(2.0), ProfileMode::Angular).with_k_cap(1e30);
        let v = psi_infinity_check(&sq_field, &PsiFamily::Const(1.0), 1.0).unwrap();
        assert_eq!(v.verdict, Verdict::FailsLike);
        let v = psi_infinity_check(&sq_field, &PsiFamily::TLogT, 4.0).unwrap();
        assert_eq!(v.verdict, Verdict::FailsLike);
    }

    #[test]
    fn infinity_tail_zero_field() {
        let f = MuField::<f64>::zero();
        let rep = infinity_tail_checks(&f, SphericalNormalization::Unit, 4.0, 8).unwrap();
        assert_eq!(rep.lebesgue.verdict, Verdict::HoldsLike);
        assert_eq!(rep.strong.verdict, Verdict::HoldsLike);
        assert_eq!(rep.stronger.verdict, Verdict::HoldsLike);
        // probe value at every rung equals R²/(1+R²)
        for (j, v) in rep.stronger.probe_values.iter().enumerate() {
            let big_r = 4.0 * 2.0f64.powi(j as i32);
            assert!((v - big_r * big_r / (1.0 + big_r * big_r)).abs() < 1e-6, "rung {j}: {v}");
        }
        assert!((rep.stronger_limit - 1.0).abs() < 1e-3);

        let rep = infinity_tail_checks(&f, SphericalNormalization::FullArea, 4.0, 8).unwrap();
        assert_eq!(rep.stronger.verdict, Verdict::FailsLike);
        assert!((rep.stronger_limit - 4.0).abs() < 4e-3);
        assert!(!rep.notes.is_empty());
    }

    #[test]
    fn infinity_tail_one_plus_inv() {
        // K_μ = 1 + 1/|z| at infinity: both tail conditions hold, limit 1.
        let f = MuField::profile(KProfile::OnePlusInv, ProfileMode::Angular);
        let rep = infinity_tail_checks(&f, SphericalNormalization::Unit, 8.0, 8).unwrap();
        assert_eq!(rep.lebesgue.verdict, Verdict::HoldsLike);
        assert_eq!(rep.strong.verdict, Verdict::HoldsLike);
        assert_eq!(rep.stronger.verdict, Verdict::HoldsLike);
    }

    #[test]
    fn prop7_examples() {
        let one = ScalarField::Const(1.0f64);
        let rep = prop7_check(&one, &PhiFunction::Exp { alpha: 1.0 }).unwrap();
        assert!(rep.premise_finite);
        assert_eq!(rep.conclusion.unwrap().verdict, Verdict::HoldsLike);

        let log = ScalarField::<f64>::LogInv;
        let rep = prop7_check(&log, &PhiFunction::Exp { alpha: 0.5 }).unwrap();
        assert!(rep.premise_finite, "∫ exp(log(1/|z|)/2) dm is finite");
        assert_eq!(rep.conclusion.unwrap().verdict, Verdict::HoldsLike);

        let logsq = ScalarField::<f64>::LogSqInv;
        let rep = prop7_check(&logsq, &PhiFunction::Exp { alpha: 1.0 }).unwrap();
        assert!(!rep.premise_finite, "∫ exp(log²(1/|z|)) dm diverges");
        assert!(rep.conclusion.is_none());
    }

    #[test]
    fn lemma3_examples() {
        let zero_field = MuField::<f64>::zero();
        let pts = vec![
            (ComplexPoint::zero(), PsiFamily::InvT),
            (ComplexPoint::Finite(Complex::new(1.0, 0.0)), PsiFamily::InvT),
            (ComplexPoint::Infinity, PsiFamily::InvT),
        ];
        let rep = lemma3_general_check(&zero_field, &pts, 0.5, 1.0).unwrap();
        assert!(rep.all_hold);
        assert!(rep.at_infinity.is_some());

        let stretch = MuField::<f64>::radial_stretch(4.0);
        let pts = vec![(ComplexPoint::zero(), PsiFamily::InvT)];
        let rep = lemma3_general_check(&stretch, &pts, 0.5, 1.0).unwrap();
        assert!(rep.all_hold);

        // bounded K^T majorant with the log-log weight: ratio → 0.
        let shabat = MuField::<f64>::shabat();
        let pts = vec![(ComplexPoint::zero(), PsiFamily::InvTLogInv)];
        let rep = lemma3_general_check(&shabat, &pts, 0.25, 1.0).unwrap();
        assert!(rep.all_hold);
    }

    #[test]
    fn psi_parse_and_validate() {
        assert!(parse_psi_key::<f64>("inv-t").is_ok());
        assert!(parse_psi_key::<f64>("iter-log:depth=2").is_ok());
        assert!(parse_psi_key::<f64>("iter-log:depth=4").is_err());
        assert!(parse_psi_key::<f64>("const:c=-1").is_err());
        assert!(parse_psi_key::<f64>("nope").is_err());
    }
}
