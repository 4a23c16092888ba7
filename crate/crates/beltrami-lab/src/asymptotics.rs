//! Scale-ladder diagnostics for asymptotic homogeneity, conformality in the
//! senses of Lavrent'iev and Belinskij, the logarithmic property, sparseness,
//! and the explicit spherical distortion bound.

use std::fmt::Write as FmtWrite;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::num::{r, Real};
use crate::oscillation::{disk_mean, maximal_dispersion};
use crate::point::ComplexPoint;
use crate::scalar::ScalarField;
use crate::solver::Mapping;
use crate::spherical::spherical_distance;
use crate::verdict::{CriterionVerdict, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleDirection {
    ToZero,
    ToInfinity,
}

/// Per-scale max error of an asymptotic relation along a dyadic ladder.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ScaleProfile<R> {
    pub direction: ScaleDirection,
    pub scales: Vec<R>,
    pub errors: Vec<R>,
    pub verdict: CriterionVerdict<R>,
    /// Last trusted scale for grid-backed mappings (profiles never extrapolate).
    pub trust_horizon: Option<R>,
}

impl<R: Real> ScaleProfile<R> {
    pub fn csv(&self) -> String {
        let mut out = String::from("scale,error\n");
        for (s, e) in self.scales.iter().zip(&self.errors) {
            let _ = writeln!(out, "{s},{e}");
        }
        out
    }
}

/// Mapping that can be evaluated at arbitrary points: closed-form built-ins,
/// a solved grid (interpolating, never extrapolating), or derived wrappers.
#[derive(Clone)]
pub enum EvaluableMapping<R> {
    Identity,
    /// f(z) = z·|z|^{k−1}
    RadialStretch { k: R },
    /// f(z) = z·(1 − ln|z|) for |z| ≤ 1, with f(0) = 0
    Shabat,
    /// f(z) = z·e^{i√(−ln|z|)} for |z| < 1, identity outside
    LogSpiral,
    Grid(Arc<Mapping<R>>),
    /// g = (f(z0 + ·) − f(z0)) ∘ φ⁻¹ with φ(u) = u + μ0·ū
    BelinskijReduced { inner: Arc<EvaluableMapping<R>>, z0: Complex<R>, mu0: Complex<R> },
    /// f*(ξ) = 1/f(1/ξ): moves the point at infinity to the origin
    Inverted(Arc<EvaluableMapping<R>>),
    /// φ(z) = z + μ0·z̄, the real-linear shear of the Belinskij reduction
    LinearShear { mu0: Complex<R> },
}

impl<R: Real> EvaluableMapping<R> {
    pub fn eval(&self, z: Complex<R>) -> Result<Complex<R>> {
        let zero = Complex::new(R::zero(), R::zero());
        match self {
            EvaluableMapping::Identity => Ok(z),
            EvaluableMapping::RadialStretch { k } => {
                if z == zero {
                    return Ok(zero);
                }
                Ok(z * z.norm().powf(*k - R::one()))
            }
            EvaluableMapping::Shabat => {
                if z == zero {
                    return Ok(zero);
                }
                Ok(z * (R::one() - z.norm().ln()))
            }
            EvaluableMapping::LogSpiral => {
                if z == zero {
                    return Ok(zero);
                }
                let rad = z.norm();
                if rad >= R::one() {
                    return Ok(z);
                }
                let theta = (-rad.ln()).sqrt();
                Ok(z * Complex::from_polar(R::one(), theta))
            }
            EvaluableMapping::Grid(m) => m.eval(z),
            EvaluableMapping::BelinskijReduced { inner, z0, mu0 } => {
                // φ(u) = u + μ0·ū inverts to u = (w − μ0·w̄)/(1 − |μ0|²).
                let denom = R::one() - mu0.norm_sqr();
                let u = (z - *mu0 * z.conj()) / Complex::new(denom, R::zero());
                Ok(inner.eval(*z0 + u)? - inner.eval(*z0)?)
            }
            EvaluableMapping::Inverted(inner) => {
                if z == zero {
                    return Err(Error::Domain("inverted mapping undefined at 0".into()));
                }
                let w = inner.eval(z.inv())?;
                if w == zero {
                    return Err(Error::Domain("inverted mapping hit a zero of f".into()));
                }
                Ok(w.inv())
            }
            EvaluableMapping::LinearShear { mu0 } => Ok(z + *mu0 * z.conj()),
        }
    }

    /// Smallest scale a grid-backed mapping can resolve: below one grid cell
    /// interpolation error dominates any asymptotic signal. None: closed form.
    fn min_trusted_scale(&self) -> Option<R> {
        match self {
            EvaluableMapping::Grid(m) => Some(m.grid.spacing()),
            EvaluableMapping::BelinskijReduced { inner, .. } => inner.min_trusted_scale(),
            EvaluableMapping::Inverted(inner) => inner.min_trusted_scale(),
            _ => None,
        }
    }

    /// Closed-form max homogeneity error over {|ζ| ≤ zeta_max} at scale s,
    /// when one is known. Used as the verdict floor for built-ins.
    pub fn homogeneity_floor(&self, scale: R, zeta_max: R) -> Option<R> {
        match self {
            // μ0 = 0, z0 = 0 reduces g = f; the inner closed form applies
            EvaluableMapping::BelinskijReduced { inner, z0, mu0 }
                if z0.norm() == R::zero() && mu0.norm() == R::zero() =>
            {
                inner.homogeneity_floor(scale, zeta_max)
            }
            EvaluableMapping::Identity => Some(R::zero()),
            // |f(ζz)/f(z) − ζ| = |ζ|·|ln|ζ|| / (1 − ln|z|); max at |ζ| = zeta_max ≥ e⁻¹
            EvaluableMapping::Shabat => {
                Some(zeta_max * zeta_max.ln().abs() / (R::one() - scale.ln()))
            }
            EvaluableMapping::LogSpiral => {
                // error driven by the angle drift √(−ln(s|ζ|)) − √(−ln s)
                let a = (-(scale * zeta_max).ln()).sqrt();
                let b = (-scale.ln()).sqrt();
                Some(zeta_max * (a - b).abs())
            }
            _ => None,
        }
    }

    /// Closed-form value of |ln|f(z)|/ln|z| − 1| at scale s, when known.
    pub fn log_ratio_floor(&self, scale: R) -> Option<R> {
        match self {
            EvaluableMapping::Identity | EvaluableMapping::LogSpiral => Some(R::zero()),
            EvaluableMapping::Shabat => {
                Some((R::one() - scale.ln()).ln() / scale.ln().abs())
            }
            _ => None,
        }
    }
}

/// 64 sample points with |ζ| ≤ 2, including 0, 1, and the circle |ζ| = 2.
pub fn default_zeta_set<R: Real>() -> Vec<Complex<R>> {
    let mut set = vec![Complex::new(R::zero(), R::zero()), Complex::new(R::one(), R::zero())];
    let radii = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
    let per_ring = 10usize;
    let two_pi = R::PI() + R::PI();
    for (k, rad) in radii.iter().enumerate() {
        for j in 0..per_ring {
            // stagger rings so directions don't repeat
            let th = two_pi * (r::<R>(j as f64) + r::<R>(k as f64 * 0.37)) / r::<R>(per_ring as f64);
            set.push(Complex::from_polar(r(*rad), th));
        }
    }
    set.push(Complex::new(R::zero(), r(2.0)));
    set.push(Complex::new(r(-2.0), R::zero()));
    debug_assert_eq!(set.len(), 64);
    set
}

/// Dyadic scale ladder: 2⁻⁴ … 2⁻²⁰ toward zero, 2⁴ … 2²⁰ toward infinity.
pub fn default_scales<R: Real>(direction: ScaleDirection) -> Vec<R> {
    let (start, factor) = match direction {
        ScaleDirection::ToZero => (r::<R>(2f64.powi(-4)), r(0.5)),
        ScaleDirection::ToInfinity => (r::<R>(2f64.powi(4)), r(2.0)),
    };
    crate::quad::geometric_ladder(start, factor, 17)
}

fn check_scales<R: Real>(direction: ScaleDirection, scales: &[R]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::Domain("scale ladder is empty".into()));
    }
    let ok = match direction {
        ScaleDirection::ToZero => scales.windows(2).all(|w| w[1] < w[0]),
        ScaleDirection::ToInfinity => scales.windows(2).all(|w| w[1] > w[0]),
    };
    if !ok {
        return Err(Error::Domain("scales must be strictly monotone in the ladder direction".into()));
    }
    Ok(())
}

const ARG_DIRECTIONS: usize = 16;

fn probe_points<R: Real>(scale: R) -> impl Iterator<Item = Complex<R>> {
    let two_pi = R::PI() + R::PI();
    (0..ARG_DIRECTIONS).map(move |d| {
        Complex::from_polar(scale, two_pi * r::<R>(d as f64) / r::<R>(ARG_DIRECTIONS as f64))
    })
}

/// Verdict for a decaying error profile: exact zeros hold, a known analytic
/// floor is matched within 10×, otherwise the decay rate per decade decides.
fn classify_profile<R: Real>(
    scales: &[R],
    errors: &[R],
    floor: Option<R>,
) -> CriterionVerdict<R> {
    let mut notes = Vec::new();
    if errors.iter().any(|e| !e.is_finite()) {
        return CriterionVerdict {
            verdict: Verdict::Inconclusive,
            probe_values: errors.to_vec(),
            fitted_slope: None,
            notes: vec!["non-finite profile error".into()],
        };
    }
    let last = *errors.last().unwrap();
    if errors.iter().all(|e| *e <= r(1e-12)) {
        return CriterionVerdict {
            verdict: Verdict::HoldsLike,
            probe_values: errors.to_vec(),
            fitted_slope: None,
            notes: vec!["errors identically zero within 1e-12".into()],
        };
    }
    if let Some(fl) = floor {
        let verdict = if last <= fl * r(10.0) + r(1e-12) {
            notes.push(format!("final error {last:.3e} within 10x of analytic floor {fl:.3e}"));
            Verdict::HoldsLike
        } else {
            notes.push(format!("final error {last:.3e} exceeds 10x analytic floor {fl:.3e}"));
            Verdict::FailsLike
        };
        return CriterionVerdict { verdict, probe_values: errors.to_vec(), fitted_slope: None, notes };
    }
    let first = errors[0];
    let decades = (scales[0] / *scales.last().unwrap())
        .abs()
        .ln()
        .abs()
        / r::<R>(std::f64::consts::LN_10);
    let rate = if last > R::zero() && decades > R::zero() {
        (first / last).powf(R::one() / decades)
    } else {
        R::infinity()
    };
    let verdict = if last < first && rate >= r(1.5) {
        notes.push(format!("error decays {rate:.2}x per decade"));
        Verdict::HoldsLike
    } else if rate <= r(1.05) {
        notes.push(format!("error does not decay (rate {rate:.2}x per decade)"));
        Verdict::FailsLike
    } else {
        notes.push(format!("slow decay (rate {rate:.2}x per decade)"));
        Verdict::Inconclusive
    };
    CriterionVerdict { verdict, probe_values: errors.to_vec(), fitted_slope: None, notes }
}

/// Shared ladder walk: per-scale error via `measure`, stopping at the grid
/// trust horizon (out-of-grid probes or interpolation error above the signal).
fn profile_with<R: Real>(
    f: &EvaluableMapping<R>,
    direction: ScaleDirection,
    scales: &[R],
    floor: Option<R>,
    mut measure: impl FnMut(R) -> Result<R>,
) -> Result<ScaleProfile<R>> {
    check_scales(direction, scales)?;
    let min_scale = f.min_trusted_scale();
    let mut kept = Vec::new();
    let mut errors = Vec::new();
    let mut trust_horizon = None;
    for &s in scales {
        if let Some(ms) = min_scale {
            if s < ms {
                trust_horizon = kept.last().copied();
                break;
            }
        }
        match measure(s) {
            Ok(e) => {
                kept.push(s);
                errors.push(e);
            }
            Err(Error::Domain(_)) if min_scale.is_some() => {
                trust_horizon = kept.last().copied();
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(Error::Domain("no trusted scales in the ladder".into()));
    }
    let verdict = classify_profile(&kept, &errors, floor);
    Ok(ScaleProfile { direction, scales: kept, errors, verdict, trust_horizon })
}

pub fn homogeneity_profile<R: Real>(
    f: &EvaluableMapping<R>,
    zeta_set: &[Complex<R>],
    direction: ScaleDirection,
    scales: &[R],
) -> Result<ScaleProfile<R>> {
    let zeta_max = zeta_set.iter().map(|z| z.norm()).fold(R::zero(), R::max);
    let floor = scales.last().and_then(|s| f.homogeneity_floor(*s, zeta_max));
    profile_with(f, direction, scales, floor, |s| {
        let mut worst = R::zero();
        for z in probe_points(s) {
            let fz = f.eval(z)?;
            if fz.norm() == R::zero() {
                return Err(Error::Domain(format!("f vanishes at probe {z}")));
            }
            for zeta in zeta_set {
                let err = (f.eval(*zeta * z)? / fz - *zeta).norm();
                worst = worst.max(err);
            }
        }
        Ok(worst)
    })
}

pub fn lavrentiev_ratio<R: Real>(
    f: &EvaluableMapping<R>,
    direction: ScaleDirection,
    scales: &[R],
) -> Result<ScaleProfile<R>> {
    profile_with(f, direction, scales, None, |s| {
        let mut lo = R::infinity();
        let mut hi = R::zero();
        let two_pi = R::PI() + R::PI();
        let m = 64usize;
        for j in 0..m {
            let z = Complex::from_polar(s, two_pi * r::<R>(j as f64) / r::<R>(m as f64));
            let v = f.eval(z)?.norm();
            if v == R::zero() {
                return Err(Error::Domain(format!("f vanishes at probe {z}")));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        // max/min ≥ 1 always; the profile stores the excess over 1
        Ok(hi / lo - R::one())
    })
}

pub fn angle_modulus_profiles<R: Real>(
    f: &EvaluableMapping<R>,
    zeta_set: &[Complex<R>],
    direction: ScaleDirection,
    scales: &[R],
) -> Result<(ScaleProfile<R>, ScaleProfile<R>)> {
    let measure = |s: R, want_angle: bool| -> Result<R> {
        let mut worst = R::zero();
        for z in probe_points(s) {
            let fz = f.eval(z)?;
            if fz.norm() == R::zero() {
                return Err(Error::Domain(format!("f vanishes at probe {z}")));
            }
            for zeta in zeta_set {
                if zeta.norm() == R::zero() {
                    continue; // arg undefined; modulus relation trivially 0 = |ζ|
                }
                let ratio = f.eval(*zeta * z)? / fz;
                let err = if want_angle {
                    // wrap the angle difference into (−π, π]
                    let mut d = ratio.arg() - zeta.arg();
                    let two_pi = R::PI() + R::PI();
                    while d > R::PI() {
                        d -= two_pi;
                    }
                    while d <= -R::PI() {
                        d += two_pi;
                    }
                    d.abs()
                } else {
                    (ratio.norm() - zeta.norm()).abs()
                };
                worst = worst.max(err);
            }
        }
        Ok(worst)
    };
    let angle = profile_with(f, direction, scales, None, |s| measure(s, true))?;
    let modulus = profile_with(f, direction, scales, None, |s| measure(s, false))?;
    Ok((angle, modulus))
}

pub fn log_ratio_profile<R: Real>(
    f: &EvaluableMapping<R>,
    direction: ScaleDirection,
    scales: &[R],
) -> Result<ScaleProfile<R>> {
    let floor = scales.last().and_then(|s| f.log_ratio_floor(*s));
    profile_with(f, direction, scales, floor, |s| {
        if (s - R::one()).abs() <= r(1e-14) {
            return Err(Error::Domain("log-ratio probe at |z| = 1".into()));
        }
        let mut worst = R::zero();
        for z in probe_points(s) {
            let mag = f.eval(z)?.norm();
            if mag == R::zero() || (mag - R::one()).abs() <= r(1e-300) {
                return Err(Error::Domain(format!("|f| in {{0, 1}} at probe {z}")));
            }
            worst = worst.max((mag.ln() / z.norm().ln() - R::one()).abs());
        }
        Ok(worst)
    })
}

/// Homogeneity of the reduced map g = (f(z0+·) − f(z0)) ∘ φ⁻¹ at 0, plus the
/// tension-ratio profile max_t |A(tρ)/A(ρ) − 1| with A(ρ) = g(ρ)/ρ.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BelinskijReport<R> {
    pub homogeneity: ScaleProfile<R>,
    pub a_ratio: ScaleProfile<R>,
}

pub fn belinskij_test<R: Real>(
    f: &EvaluableMapping<R>,
    mu0: Complex<R>,
    z0: ComplexPoint<R>,
    scales: &[R],
    t_set: &[R],
) -> Result<BelinskijReport<R>> {
    if mu0.norm() >= R::one() {
        return Err(Error::Domain("belinskij_test needs |mu0| < 1".into()));
    }
    let base = match z0.finite() {
        Some(p) => EvaluableMapping::BelinskijReduced {
            inner: Arc::new(f.clone()),
            z0: p,
            mu0,
        },
        None => EvaluableMapping::BelinskijReduced {
            inner: Arc::new(EvaluableMapping::Inverted(Arc::new(f.clone()))),
            z0: Complex::new(R::zero(), R::zero()),
            mu0,
        },
    };
    let zeta = default_zeta_set();
    let homogeneity = homogeneity_profile(&base, &zeta, ScaleDirection::ToZero, scales)?;
    let a_of = |rho: R| -> Result<Complex<R>> {
        let g = base.eval(Complex::new(rho, R::zero()))?;
        Ok(g / Complex::new(rho, R::zero()))
    };
    let a_ratio = profile_with(&base, ScaleDirection::ToZero, scales, None, |rho| {
        let a = a_of(rho)?;
        if a.norm() == R::zero() {
            return Err(Error::Domain("A(rho) = 0".into()));
        }
        let mut worst = R::zero();
        for &t in t_set {
            worst = worst.max((a_of(t * rho)? / a - Complex::new(R::one(), R::zero())).norm());
        }
        Ok(worst)
    })?;
    Ok(BelinskijReport { homogeneity, a_ratio })
}

/// Sparseness characteristic S_Z(ρ) = inf{|z| ≥ ρ} / sup{|z| ≤ ρ} over Z.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SparsenessReport<R> {
    pub rungs: Vec<(R, Option<R>)>,
    pub verdict: CriterionVerdict<R>,
}

pub fn sparseness<R: Real>(points: &[Complex<R>], rho_ladder: &[R]) -> Result<SparsenessReport<R>> {
    if points.is_empty() || rho_ladder.is_empty() {
        return Err(Error::Domain("sparseness needs points and a ladder".into()));
    }
    let moduli: Vec<R> = points.iter().map(|z| z.norm()).collect();
    let mut rungs = Vec::new();
    let mut values = Vec::new();
    let mut notes = Vec::new();
    for &rho in rho_ladder {
        let above = moduli.iter().copied().filter(|m| *m >= rho).fold(R::infinity(), R::min);
        let below = moduli.iter().copied().filter(|m| *m <= rho && *m > R::zero()).fold(R::zero(), R::max);
        if above.is_finite() && below > R::zero() {
            let s = above / below;
            rungs.push((rho, Some(s)));
            values.push(s);
        } else {
            rungs.push((rho, None));
            notes.push(format!("rung {rho:e}: no straddling points, skipped"));
        }
    }
    if values.len() < 4 {
        return Err(Error::Domain("too few straddled rungs for a sparseness verdict".into()));
    }
    // bounded limsup: the supremum over the deep half of the ladder must not
    // outgrow the supremum over the shallow half
    let half = values.len() / 2;
    let sup = |vs: &[R]| vs.iter().copied().fold(R::zero(), R::max);
    let shallow = sup(&values[..half]);
    let deep = sup(&values[half..]);
    let verdict = if deep <= shallow * r(1.5) {
        Verdict::HoldsLike
    } else if deep > shallow * r(2.0) {
        Verdict::FailsLike
    } else {
        Verdict::Inconclusive
    };
    notes.push(format!("sup S over shallow half {shallow:.3e}, deep half {deep:.3e}"));
    let verdict = CriterionVerdict { verdict, probe_values: values, fitted_slope: None, notes };
    Ok(SparsenessReport { rungs, verdict })
}

/// Explicit spherical distortion bound s(f(ζ), f(ζ0)) ≤ (32/Δ)·
/// (log(2ε0/|ζ−ζ0|))^(−1/α0), α0 = 2(q0 + 6d0), probed on D(ζ0, ε0/2).
#[derive(Clone, Debug, serde::Serialize)]
pub struct DistortionReport<R> {
    pub q0: R,
    pub d0: R,
    pub alpha0: R,
    /// (probe, measured spherical distance, bound)
    pub probes: Vec<(Complex<R>, R, R)>,
    pub violations: Vec<Complex<R>>,
    pub holds: bool,
}

pub fn distortion_bound_check<R: Real>(
    f: &EvaluableMapping<R>,
    q: &ScalarField<R>,
    zeta0: Complex<R>,
    eps0: R,
    delta: R,
) -> Result<DistortionReport<R>> {
    if eps0 <= R::zero() || delta <= R::zero() {
        return Err(Error::Domain("eps0 and Delta must be positive".into()));
    }
    let q0_stat = disk_mean(q, zeta0, eps0, 65536)?;
    if !q0_stat.value.is_finite() || q0_stat.flagged {
        return Err(Error::Domain("Q is not integrable on the disk".into()));
    }
    let q0 = q0_stat.value;
    let d0 = maximal_dispersion(q, zeta0, eps0, 12, 16384)?;
    let alpha0 = (q0 + d0 * r(6.0)) * (R::one() + R::one());
    let f0 = ComplexPoint::Finite(f.eval(zeta0)?);

    let mut probes = Vec::new();
    let mut violations = Vec::new();
    let two_pi = R::PI() + R::PI();
    for j in 0..8u32 {
        let rad = eps0 * r::<R>(0.5) * r::<R>(0.5f64.powi(j as i32));
        for a in 0..16usize {
            let th = two_pi * r::<R>(a as f64) / r(16.0);
            let zeta = zeta0 + Complex::from_polar(rad, th);
            let lhs = spherical_distance(ComplexPoint::Finite(f.eval(zeta)?), f0);
            let rhs = r::<R>(32.0) / delta
                * ((eps0 + eps0) / (zeta - zeta0).norm()).ln().powf(-R::one() / alpha0);
            if lhs > rhs {
                violations.push(zeta);
            }
            probes.push((zeta, lhs, rhs));
        }
    }
    let holds = violations.is_empty();
    Ok(DistortionReport { q0, d0, alpha0, probes, violations, holds })
}

/// Equivalent formulations of asymptotic homogeneity, checked independently.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Theorem1Report<R> {
    pub ray: ScaleProfile<R>,
    pub two_point: ScaleProfile<R>,
    pub full: ScaleProfile<R>,
    pub uniform: ScaleProfile<R>,
    pub consistent: bool,
}

pub fn theorem1_suite<R: Real>(
    f: &EvaluableMapping<R>,
    scales: &[R],
) -> Result<Theorem1Report<R>> {
    // ray-restricted: positive real ζ only
    let ray_zeta: Vec<Complex<R>> =
        [0.25, 0.5, 1.0, 2.0].iter().map(|c| Complex::new(r(*c), R::zero())).collect();
    let ray = homogeneity_profile(f, &ray_zeta, ScaleDirection::ToZero, scales)?;

    // two-point relation f(z')/f(z) − z'/z on random pairs with |z'| ≤ δ|z|
    let two_pi = R::PI() + R::PI();
    let two_point_floor = scales.last().and_then(|s| f.homogeneity_floor(*s, r(4.0)));
    let two_point = profile_with(f, ScaleDirection::ToZero, scales, two_point_floor, |s| {
        // same pair set at every scale, so the profile isolates the scale trend
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1e);
        let mut worst = R::zero();
        for &delta in &[1.0, 2.0, 4.0] {
            for _ in 0..16 {
                let z = Complex::from_polar(s, two_pi * r::<R>(rng.gen::<f64>()));
                let zp = Complex::from_polar(
                    s * r::<R>(delta) * r::<R>(rng.gen::<f64>().max(1e-3)),
                    two_pi * r::<R>(rng.gen::<f64>()),
                );
                let fz = f.eval(z)?;
                if fz.norm() == R::zero() {
                    return Err(Error::Domain(format!("f vanishes at probe {z}")));
                }
                worst = worst.max((f.eval(zp)? / fz - zp / z).norm());
            }
        }
        Ok(worst)
    })?;

    let zeta = default_zeta_set();
    let full = homogeneity_profile(f, &zeta, ScaleDirection::ToZero, scales)?;

    // uniformity over the ζ compact: spread of per-ζ errors must also vanish
    let uniform_floor = scales.last().and_then(|s| f.homogeneity_floor(*s, r(2.0)));
    let uniform = profile_with(f, ScaleDirection::ToZero, scales, uniform_floor, |s| {
        let mut lo = R::infinity();
        let mut hi = R::zero();
        for zeta_pt in &zeta {
            let mut per_zeta = R::zero();
            for z in probe_points(s) {
                let fz = f.eval(z)?;
                if fz.norm() == R::zero() {
                    return Err(Error::Domain(format!("f vanishes at probe {z}")));
                }
                per_zeta = per_zeta.max((f.eval(*zeta_pt * z)? / fz - *zeta_pt).norm());
            }
            lo = lo.min(per_zeta);
            hi = hi.max(per_zeta);
        }
        Ok(hi - lo)
    })?;

    let verdicts =
        [ray.verdict.verdict, two_point.verdict.verdict, full.verdict.verdict, uniform.verdict.verdict];
    let consistent = verdicts.iter().all(|v| *v == verdicts[0]);
    Ok(Theorem1Report { ray, two_point, full, uniform, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scales_to_zero() -> Vec<f64> {
        default_scales(ScaleDirection::ToZero)
    }

    #[test]
    fn identity_profiles_are_exact() {
        let f = EvaluableMapping::<f64>::Identity;
        let zeta = default_zeta_set();
        let p = homogeneity_profile(&f, &zeta, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert_eq!(p.verdict.verdict, Verdict::HoldsLike);
        assert!(p.errors.iter().all(|e| *e <= 1e-12));

        let p = lavrentiev_ratio(&f, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert!(p.errors.iter().all(|e| *e <= 1e-12));

        let (a, m) = angle_modulus_profiles(&f, &zeta, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert!(a.errors.iter().all(|e| *e <= 1e-12));
        assert!(m.errors.iter().all(|e| *e <= 1e-12));

        let p = log_ratio_profile(&f, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert!(p.errors.iter().all(|e| *e <= 1e-12));
    }

    #[test]
    fn shabat_homogeneity_matches_closed_form() {
        let f = EvaluableMapping::<f64>::Shabat;
        let zeta = default_zeta_set();
        let p = homogeneity_profile(&f, &zeta, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert_eq!(p.verdict.verdict, Verdict::HoldsLike);
        // error = max |ζ ln|ζ|| / (1 + ln(1/s)); the ζ-set max is at |ζ| = 2
        let ln2 = std::f64::consts::LN_2;
        for (s, e) in p.scales.iter().zip(&p.errors) {
            let expect = 2.0 * ln2 / (1.0 - s.ln());
            assert!((e - expect).abs() <= 1e-9, "scale {s:e}: {e} vs {expect}");
        }
        let last = *p.scales.last().unwrap();
        assert!((last - 2f64.powi(-20)).abs() < 1e-12);
        let expect = 2.0 * ln2 / (1.0 + 20.0 * ln2);
        assert!((p.errors.last().unwrap() - expect).abs() <= 1e-9);
    }

    #[test]
    fn radial_stretch_homogeneity_fails() {
        let f = EvaluableMapping::RadialStretch { k: 2.0f64 };
        let zeta = default_zeta_set();
        let p = homogeneity_profile(&f, &zeta, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert_eq!(p.verdict.verdict, Verdict::FailsLike);
        // |f(ζz)/f(z)| = |ζ|² so the error at ζ = 2 (real) is exactly 2, every scale
        for e in &p.errors {
            assert!(*e >= 2.0 - 1e-12, "error {e}");
        }
        // yet Lavrent'iev conformality holds: |f| constant on circles
        let p = lavrentiev_ratio(&f, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert!(p.errors.iter().all(|e| *e <= 1e-12));
    }

    #[test]
    fn log_spiral_profiles() {
        let f = EvaluableMapping::<f64>::LogSpiral;
        // ratio 1 exactly: the spiral factor is unimodular
        let p = lavrentiev_ratio(&f, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert!(p.errors.iter().all(|e| *e <= 1e-12));

        let zeta = default_zeta_set();
        let (a, m) = angle_modulus_profiles(&f, &zeta, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert!(m.errors.iter().all(|e| *e <= 1e-12));
        // angle error closed form: max over ζ of |√(−ln(s|ζ|)) − √(−ln s)|
        for (s, e) in a.scales.iter().zip(&a.errors) {
            let expect = zeta
                .iter()
                .filter(|z| z.norm() > 0.0 && s * z.norm() < 1.0)
                .map(|z| ((-(s * z.norm()).ln()).sqrt() - (-s.ln()).sqrt()).abs())
                .fold(0.0f64, f64::max);
            assert!((e - expect).abs() <= 1e-9, "scale {s:e}: {e} vs {expect}");
        }
    }

    #[test]
    fn shabat_log_ratio_closed_form() {
        let f = EvaluableMapping::<f64>::Shabat;
        let p = log_ratio_profile(&f, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert_eq!(p.verdict.verdict, Verdict::HoldsLike);
        let ln2 = std::f64::consts::LN_2;
        // ratio − 1 = ln(1 − ln|z|)/ln|z|; at |z| = 2⁻²⁰ this is ≈ 0.195
        let expect = (1.0 + 20.0 * ln2).ln() / (20.0 * ln2);
        assert!((p.errors.last().unwrap() - expect).abs() <= 1e-9);

        let g = EvaluableMapping::RadialStretch { k: 2.0f64 };
        let p = log_ratio_profile(&g, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert_eq!(p.verdict.verdict, Verdict::FailsLike);
        // ln|f| = 2 ln|z| so the per-scale error is exactly 1
        assert!(p.errors.iter().all(|e| (*e - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn belinskij_trivial_and_shabat() {
        // f = φ itself with matching μ0 reduces to the identity
        let mu0 = Complex::new(0.4f64, 0.1);
        let rep = belinskij_test(
            &EvaluableMapping::LinearShear { mu0 },
            mu0,
            ComplexPoint::Finite(Complex::new(0.0, 0.0)),
            &scales_to_zero(),
            &[2.0, 4.0],
        )
        .unwrap();
        assert!(rep.homogeneity.errors.iter().all(|e| *e <= 1e-12));
        assert!(rep.a_ratio.errors.iter().all(|e| *e <= 1e-12));

        let rep = belinskij_test(
            &EvaluableMapping::<f64>::Shabat,
            Complex::new(0.0, 0.0),
            ComplexPoint::Finite(Complex::new(0.0, 0.0)),
            &scales_to_zero(),
            &[2.0, 4.0],
        )
        .unwrap();
        // A(ρ) = 1 − ln ρ; max_t |A(tρ)/A(ρ) − 1| = ln 4/(1 − ln ρ) at t = 4
        let last_rho = *rep.a_ratio.scales.last().unwrap();
        let expect = (4.0f64).ln() / (1.0 - last_rho.ln());
        assert!((rep.a_ratio.errors.last().unwrap() - expect).abs() <= 1e-9);
        assert_eq!(rep.homogeneity.verdict.verdict, Verdict::HoldsLike);
    }

    #[test]
    fn belinskij_radial_stretch_fails() {
        let rep = belinskij_test(
            &EvaluableMapping::RadialStretch { k: 2.0f64 },
            Complex::new(0.0, 0.0),
            ComplexPoint::Finite(Complex::new(0.0, 0.0)),
            &scales_to_zero(),
            &[2.0, 4.0],
        )
        .unwrap();
        assert_eq!(rep.homogeneity.verdict.verdict, Verdict::FailsLike);
    }

    #[test]
    fn sparseness_examples() {
        let ladder: Vec<f64> = crate::quad::geometric_ladder(2f64.powi(-3), 0.5, 43);
        // dyadic set: S ≤ 2 everywhere
        let dyadic: Vec<Complex<f64>> =
            (0..40).map(|n| Complex::new(2f64.powi(-n), 0.0)).collect();
        let rep = sparseness(&dyadic, &ladder).unwrap();
        assert_eq!(rep.verdict.verdict, Verdict::HoldsLike);
        for (_, s) in rep.rungs.iter() {
            if let Some(s) = s {
                assert!(*s <= 2.0 + 1e-12);
            }
        }

        // super-geometric gaps: S blows up
        let sparse: Vec<Complex<f64>> =
            (0..8).map(|n: i32| Complex::new(2f64.powi(-n * n), 0.0)).collect();
        let rep = sparseness(&sparse, &ladder).unwrap();
        assert_eq!(rep.verdict.verdict, Verdict::FailsLike);

        // a (densely sampled) ray to 0: S stays at 1 up to sampling slack
        let ray: Vec<Complex<f64>> = (0..30000)
            .map(|n| Complex::from_polar(0.25 * 0.999f64.powi(n), 0.3))
            .collect();
        let rep = sparseness(&ray, &ladder).unwrap();
        assert_eq!(rep.verdict.verdict, Verdict::HoldsLike);
        for (_, s) in rep.rungs.iter() {
            if let Some(s) = s {
                assert!(*s <= 1.002);
            }
        }
    }

    #[test]
    fn distortion_bound_identity_and_stretch() {
        // Δ from two omitted boundary points ±1 of the unit disk: their
        // chordal distance is 2/√2·… = spherical_distance(1, −1)
        let delta = spherical_distance(
            ComplexPoint::Finite(Complex::new(1.0f64, 0.0)),
            ComplexPoint::Finite(Complex::new(-1.0, 0.0)),
        );
        let rep = distortion_bound_check(
            &EvaluableMapping::Identity,
            &ScalarField::Const(1.0),
            Complex::new(0.0, 0.0),
            0.5,
            delta,
        )
        .unwrap();
        assert!(rep.holds, "violations at {:?}", rep.violations);
        assert!((rep.q0 - 1.0).abs() <= 1e-9);
        assert!(rep.d0 <= 1e-9);
        assert!((rep.alpha0 - 2.0).abs() <= 1e-6);

        let rep = distortion_bound_check(
            &EvaluableMapping::RadialStretch { k: 2.0f64 },
            &ScalarField::Const(2.0),
            Complex::new(0.0, 0.0),
            0.5,
            delta,
        )
        .unwrap();
        assert!(rep.holds, "violations at {:?}", rep.violations);
    }

    #[test]
    fn theorem1_suite_consistency() {
        let scales = scales_to_zero();
        let rep = theorem1_suite(&EvaluableMapping::<f64>::Identity, &scales).unwrap();
        assert!(rep.consistent);
        assert_eq!(rep.full.verdict.verdict, Verdict::HoldsLike);
        assert!(rep.full.errors.iter().all(|e| *e <= 1e-12));

        let rep = theorem1_suite(&EvaluableMapping::<f64>::Shabat, &scales).unwrap();
        assert!(rep.consistent, "shabat: ray {:?} two-point {:?} full {:?} uniform {:?}",
            rep.ray.verdict.verdict, rep.two_point.verdict.verdict,
            rep.full.verdict.verdict, rep.uniform.verdict.verdict);
        assert_eq!(rep.full.verdict.verdict, Verdict::HoldsLike);

        let rep = theorem1_suite(&EvaluableMapping::RadialStretch { k: 2.0f64 }, &scales).unwrap();
        assert!(rep.consistent, "stretch: ray {:?} two-point {:?} full {:?} uniform {:?}",
            rep.ray.verdict.verdict, rep.two_point.verdict.verdict,
            rep.full.verdict.verdict, rep.uniform.verdict.verdict);
        assert_eq!(rep.full.verdict.verdict, Verdict::FailsLike);
    }

    #[test]
    fn grid_backed_profile_stops_at_horizon() {
        // solved k=2 stretch on a coarse grid: the profile must stop before
        // interpolation noise dominates and record the horizon.
        use crate::field::{GridSpec, MuField};
        let f = MuField::radial_stretch(2.0).with_support(1.0);
        let g = GridSpec::new(Complex::new(0.0, 0.0), 4.0, 128).unwrap();
        let m = crate::solver::solve_qc(&f, &g, 1e-8).unwrap();
        let em = EvaluableMapping::Grid(Arc::new(m));
        let p = log_ratio_profile(&em, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        assert!(p.scales.len() < scales_to_zero().len());
        assert!(p.trust_horizon.is_some());
    }

    #[test]
    fn csv_output_shape() {
        let f = EvaluableMapping::<f64>::Identity;
        let p = lavrentiev_ratio(&f, ScaleDirection::ToZero, &scales_to_zero()).unwrap();
        let csv = p.csv();
        assert!(csv.starts_with("scale,error\n"));
        assert_eq!(csv.lines().count(), p.scales.len() + 1);
    }
}
