//! Mean-oscillation diagnostics: disk means, BMO-seminorm estimates from
//! disk families, pointwise finite-mean-oscillation probes, and the explicit
//! dyadic integral bound they imply.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{r, Real};
use crate::quad::log_trapezoid;
use crate::scalar::ScalarField;
use crate::verdict::{CriterionVerdict, Verdict};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Values above this are treated as quadrature overflow and flagged.
const OVERFLOW_GUARD: f64 = 1e12;

/// One disk-quadrature statistic; `excluded` counts cells whose integrand
/// was non-finite or above the overflow guard (singular cells).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiskStat<R> {
    pub value: R,
    pub flagged: bool,
    pub excluded: usize,
}

/// Midpoint rule over the bounding square of D(z0, eps), masked to the disk.
/// The grid side is even, so the disk centre is never a quadrature node and
/// point singularities at z0 are excluded rather than sampled.
fn disk_quadrature<R: Real>(
    f: impl Fn(Complex<R>) -> R,
    z0: Complex<R>,
    eps: R,
    samples: usize,
) -> DiskStat<R> {
    let m = ((samples as f64).sqrt().ceil() as usize).max(8);
    let m = m + m % 2;
    let h = eps * r::<R>(2.0 / m as f64);
    let guard = r::<R>(OVERFLOW_GUARD);
    let mut sum = R::zero();
    let mut count = 0usize;
    let mut excluded = 0usize;
    for iy in 0..m {
        for ix in 0..m {
            let z = Complex::new(
                z0.re - eps + h * r::<R>(ix as f64 + 0.5),
                z0.im - eps + h * r::<R>(iy as f64 + 0.5),
            );
            if (z - z0).norm() > eps {
                continue;
            }
            let v = f(z);
            if v.is_finite() && v.abs() < guard {
                sum += v;
                count += 1;
            } else {
                excluded += 1;
            }
        }
    }
    if count == 0 {
        return DiskStat { value: R::nan(), flagged: true, excluded };
    }
    DiskStat { value: sum / r(count as f64), flagged: excluded > 0, excluded }
}

/// Quadrature mean of φ over the disk D(z0, eps).
pub fn disk_mean<R: Real>(
    phi: &ScalarField<R>,
    z0: Complex<R>,
    eps: R,
    samples: usize,
) -> Result<DiskStat<R>> {
    if eps <= R::zero() {
        return Err(Error::Domain("disk_mean: eps must be positive".into()));
    }
    let samples = samples.max(64);
    Ok(disk_quadrature(|z| phi.eval(z), z0, eps, samples))
}

/// Mean oscillation ⨍ |φ − φ̄| dm over D(z0, eps); always ≥ 0.
pub fn mean_oscillation<R: Real>(
    phi: &ScalarField<R>,
    z0: Complex<R>,
    eps: R,
    samples: usize,
) -> Result<DiskStat<R>> {
    let mean = disk_mean(phi, z0, eps, samples)?;
    if !mean.value.is_finite() {
        return Ok(mean);
    }
    let mut osc = disk_quadrature(|z| (phi.eval(z) - mean.value).abs(), z0, eps, samples.max(64));
    osc.flagged = osc.flagged || mean.flagged;
    osc.excluded += mean.excluded;
    Ok(osc)
}

/// A family of probe disks inside a circular region of interest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiskFamily<R> {
    pub disks: Vec<(Complex<R>, R)>,
}

impl<R: Real> DiskFamily<R> {
    /// Dyadic hierarchy: at level ℓ = 0..levels, disks of radius R0·2^{-ℓ-1}
    /// centred on a lattice with spacing equal to the radius, kept only when
    /// the disk lies inside the region D(center, R0).
    pub fn dyadic_hierarchy(center: Complex<R>, region_radius: R, levels: u32) -> Self {
        let mut disks = Vec::new();
        for level in 0..=levels {
            let rad = region_radius * r::<R>(0.5f64.powi(level as i32 + 1));
            let steps = (region_radius / rad).to_f64().unwrap().ceil() as i64 + 1;
            for iy in -steps..=steps {
                for ix in -steps..=steps {
                    let c = Complex::new(
                        center.re + rad * r::<R>(ix as f64),
                        center.im + rad * r::<R>(iy as f64),
                    );
                    if (c - center).norm() + rad <= region_radius {
                        disks.push((c, rad));
                    }
                }
            }
        }
        DiskFamily { disks }
    }

    /// Random disks inside D(center, R0); reproducible from `seed`.
    pub fn random(center: Complex<R>, region_radius: R, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut disks = Vec::with_capacity(count);
        while disks.len() < count {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            if x * x + y * y >= 1.0 {
                continue;
            }
            let c = Complex::new(
                center.re + region_radius * r::<R>(x),
                center.im + region_radius * r::<R>(y),
            );
            let room = region_radius - (c - center).norm();
            if room <= R::zero() {
                continue;
            }
            let t: f64 = rng.gen_range(0.05..1.0);
            disks.push((c, room * r::<R>(t)));
        }
        DiskFamily { disks }
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty()
    }
}

/// Per-family oscillation trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscillationReport<R> {
    /// (center, radius, disk mean, mean oscillation) per disk.
    pub per_disk: Vec<(Complex<R>, R, R, R)>,
    /// Running supremum of the mean oscillation.
    pub running_sup: Vec<R>,
    pub supremum: R,
    pub maximizing_disk: (Complex<R>, R),
    pub flagged: bool,
}

/// Lower estimate of the BMO seminorm: supremum of the mean oscillation
/// over the family. Monotone in the family.
pub fn bmo_norm_estimate<R: Real>(
    phi: &ScalarField<R>,
    family: &DiskFamily<R>,
    samples: usize,
) -> Result<OscillationReport<R>> {
    if family.is_empty() {
        return Err(Error::Domain("bmo_norm_estimate: empty disk family".into()));
    }
    let mut per_disk = Vec::with_capacity(family.disks.len());
    let mut running_sup = Vec::with_capacity(family.disks.len());
    let mut sup = R::zero();
    let mut best = family.disks[0];
    let mut flagged = false;
    for &(c, rad) in &family.disks {
        let mean = disk_mean(phi, c, rad, samples)?;
        let osc = mean_oscillation(phi, c, rad, samples)?;
        flagged = flagged || osc.flagged;
        if osc.value.is_finite() && osc.value > sup {
            sup = osc.value;
            best = (c, rad);
        }
        per_disk.push((c, rad, mean.value, osc.value));
        running_sup.push(sup);
    }
    Ok(OscillationReport {
        per_disk,
        running_sup,
        supremum: sup,
        maximizing_disk: best,
        flagged,
    })
}

/// sup over r ∈ {r0·2^{-j} : j = 0..depth} of the mean oscillation at z0.
pub fn maximal_dispersion<R: Real>(
    phi: &ScalarField<R>,
    z0: Complex<R>,
    r0: R,
    depth: u32,
    samples: usize,
) -> Result<R> {
    if r0 <= R::zero() {
        return Err(Error::Domain("maximal_dispersion: r0 must be positive".into()));
    }
    let mut sup = R::zero();
    for j in 0..=depth {
        let rad = r0 * r::<R>(0.5f64.powi(j as i32));
        let osc = mean_oscillation(phi, z0, rad, samples)?;
        if osc.value.is_finite() {
            sup = sup.max(osc.value);
        }
    }
    Ok(sup)
}

/// Dyadic ladder of mean-oscillation values at z0, innermost last.
fn dyadic_oscillations<R: Real>(
    phi: &ScalarField<R>,
    z0: Complex<R>,
    r0: R,
    depth: u32,
    samples: usize,
) -> Result<Vec<R>> {
    (0..=depth)
        .map(|j| Ok(mean_oscillation(phi, z0, r0 * r::<R>(0.5f64.powi(j as i32)), samples)?.value))
        .collect()
}

/// Boundedness classifier shared by the pointwise oscillation probes:
/// plateau when the max of the last 6 rungs stays within 1.05× the max of
/// the 6 before, sustained growth when the tail rises by more than 2× per
/// decade of scale.
fn classify_bounded<R: Real>(values: &[R]) -> (Verdict, Vec<String>) {
    let mut notes = Vec::new();
    let finite: Vec<R> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 12 {
        notes.push("too few finite rungs".into());
        return (Verdict::Inconclusive, notes);
    }
    let n = finite.len();
    let last = &finite[n - 6..];
    let prev = &finite[n - 12..n - 6];
    let max_last = last.iter().copied().fold(R::neg_infinity(), R::max);
    let max_prev = prev.iter().copied().fold(R::neg_infinity(), R::max);

    // 6 dyadic rungs ≈ 1.8 decades of scale.
    let decades = 6.0 * std::f64::consts::LN_2 / std::f64::consts::LN_10;
    let growth_gate = r::<R>(2.0f64.powf(decades));
    let tail_monotone = finite[n - 8..].windows(2).all(|w| w[1] >= w[0]);

    if max_last <= max_prev * r(1.05) + r(1e-12) {
        notes.push(format!("plateau: tail max {:.6e} vs prior {:.6e}", max_last, max_prev));
        (Verdict::HoldsLike, notes)
    } else if tail_monotone && max_last > max_prev * growth_gate {
        notes.push(format!("growth > 2x/decade: {:.6e} vs {:.6e}", max_last, max_prev));
        (Verdict::FailsLike, notes)
    } else {
        notes.push("neither plateau nor sustained growth".into());
        (Verdict::Inconclusive, notes)
    }
}

/// Probes finite mean oscillation of φ at z0 on a dyadic radius ladder.
pub fn fmo_test<R: Real>(
    phi: &ScalarField<R>,
    z0: Complex<R>,
    depth: u32,
    samples: usize,
) -> Result<CriterionVerdict<R>> {
    let coarse = disk_mean(phi, z0, r(0.5), samples)?;
    if !coarse.value.is_finite() {
        return Ok(CriterionVerdict {
            verdict: Verdict::FailsLike,
            probe_values: vec![coarse.value],
            fitted_slope: None,
            notes: vec!["coarse disk mean not finite".into()],
        });
    }
    let values = dyadic_oscillations(phi, z0, r(0.5), depth.max(13), samples)?;
    let (verdict, notes) = classify_bounded(&values);
    Ok(CriterionVerdict { verdict, probe_values: values, fitted_slope: None, notes })
}

/// Probes whether z0 is a Lebesgue point: ⨍|φ − φ(z0)| over D(z0, ε) → 0.
pub fn lebesgue_point_test<R: Real>(
    phi: &ScalarField<R>,
    z0: Complex<R>,
    depth: u32,
    samples: usize,
) -> Result<CriterionVerdict<R>> {
    let v0 = phi.eval(z0);
    if !v0.is_finite() {
        return Err(Error::Domain("lebesgue_point_test: φ(z0) is not finite".into()));
    }
    let depth = depth.max(13);
    let mut values = Vec::with_capacity(depth as usize + 1);
    for j in 0..=depth {
        let eps = r::<R>(0.5f64.powi(j as i32 + 1));
        let stat = disk_quadrature(|z| (phi.eval(z) - v0).abs(), z0, eps, samples.max(64));
        values.push(stat.value);
    }
    let finite: Vec<R> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let mut notes = Vec::new();
    let verdict = if finite.len() < 12 {
        notes.push("too few finite rungs".into());
        Verdict::Inconclusive
    } else {
        let n = finite.len();
        let max_last = finite[n - 6..].iter().copied().fold(R::neg_infinity(), R::max);
        let max_prev = finite[n - 12..n - 6].iter().copied().fold(R::neg_infinity(), R::max);
        let scale = finite[0].max(v0.abs()).max(r(1e-300));
        if max_last <= max_prev * r(0.3) || max_last <= scale * r(1e-6) {
            notes.push(format!("tail decays toward 0: {:.6e}", max_last));
            Verdict::HoldsLike
        } else if max_last >= max_prev * r(0.7) && max_last > scale * r(1e-3) {
            notes.push(format!("tail stalls at {:.6e} > 0", max_last));
            Verdict::FailsLike
        } else {
            notes.push("decay trend unclear".into());
            Verdict::Inconclusive
        }
    };
    Ok(CriterionVerdict { verdict, probe_values: values, fitted_slope: None, notes })
}

/// Vanishing-mean-oscillation probe over a region: BMO estimates restricted
/// to radius ≤ δ must decay as δ → 0. Extrapolation only — noted as such.
pub fn vmo_test<R: Real>(
    phi: &ScalarField<R>,
    center: Complex<R>,
    region_radius: R,
    samples: usize,
) -> Result<CriterionVerdict<R>> {
    let family = DiskFamily::dyadic_hierarchy(center, region_radius, 6);
    let mut sup_by_level: Vec<R> = Vec::new();
    for level in 0..=6u32 {
        let rad = region_radius * r::<R>(0.5f64.powi(level as i32 + 1));
        let sub: Vec<(Complex<R>, R)> = family
            .disks
            .iter()
            .copied()
            .filter(|&(_, s)| (s - rad).abs() < rad * r(1e-9))
            .collect();
        let rep = bmo_norm_estimate(phi, &DiskFamily { disks: sub }, samples)?;
        sup_by_level.push(rep.supremum);
    }
    let first = sup_by_level[0].max(r(1e-300));
    let last = *sup_by_level.last().unwrap();
    let mut notes = vec!["extrapolated from finitely many scales".to_string()];
    let verdict = if last <= first * r(0.2) || last <= r(1e-10) {
        Verdict::HoldsLike
    } else if last >= first * r(0.9) && last > r(1e-10) {
        Verdict::FailsLike
    } else {
        Verdict::Inconclusive
    };
    notes.push(format!("level suprema from {:.6e} to {:.6e}", first, last));
    Ok(CriterionVerdict { verdict, probe_values: sup_by_level, fitted_slope: None, notes })
}

/// One rung of the dyadic integral bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundRung<R> {
    pub eps: R,
    pub lhs: R,
    pub rhs: R,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FmoBoundReport<R> {
    pub phi0: R,
    pub dispersion0: R,
    pub c_constant: R,
    pub rungs: Vec<BoundRung<R>>,
    pub all_ok: bool,
}

/// Checks, for every ε in the ladder (each in (0, 1/4)), the bound
///
///   ∫_{ε<|z|<1/2} φ(z) / (|z| log₂(1/|z|))² dm(z)  ≤  C · log₂ log₂ (1/ε)
///
/// with C = 4π(φ₀ + 6 d₀), where φ₀ is the mean of φ over D(0,1/2) and d₀
/// its maximal dispersion at 0. Requires φ ≥ 0 and integrable on D(0,1/2).
pub fn fmo_bound_check<R: Real>(
    phi: &ScalarField<R>,
    eps_ladder: &[R],
    samples: usize,
) -> Result<FmoBoundReport<R>> {
    for &eps in eps_ladder {
        if eps <= R::zero() || eps >= r(0.25) {
            return Err(Error::Domain("fmo_bound_check: ladder must lie in (0, 1/4)".into()));
        }
    }
    let phi0 = disk_mean(phi, Complex::new(R::zero(), R::zero()), r(0.5), samples)?;
    if !phi0.value.is_finite() {
        return Err(Error::Domain("fmo_bound_check: φ is not integrable on D(0,1/2)".into()));
    }
    if phi0.value < -r::<R>(1e-12) {
        return Err(Error::Domain("fmo_bound_check: φ must be nonnegative".into()));
    }
    let d0 = maximal_dispersion(phi, Complex::new(R::zero(), R::zero()), r(0.5), 12, samples)?;
    let c = r::<R>(4.0) * R::PI() * (phi0.value + r::<R>(6.0) * d0);

    let two = r::<R>(2.0);
    let log2 = |x: R| x.ln() / two.ln();
    let angles = 128usize;
    let circ_mean = |rad: R| -> R {
        let mut s = R::zero();
        let mut cnt = 0usize;
        for k in 0..angles {
            let th = r::<R>(2.0 * std::f64::consts::PI * (k as f64 + 0.5) / angles as f64);
            let v = phi.eval(Complex::from_polar(rad, th));
            if v.is_finite() {
                s += v;
                cnt += 1;
            }
        }
        if cnt == 0 {
            R::zero()
        } else {
            s / r(cnt as f64)
        }
    };

    let mut rungs = Vec::with_capacity(eps_ladder.len());
    let mut all_ok = true;
    for &eps in eps_ladder {
        // dm = r dr dθ: angular mean × 2π, radial weight 1/(r log₂²(1/r)).
        let lhs = r::<R>(2.0) * R::PI()
            * log_trapezoid(
                |rad| circ_mean(rad) / (rad * log2(R::one() / rad).powi(2)),
                eps,
                r(0.5),
                128,
            );
        let rhs = c * log2(log2(R::one() / eps));
        let ok = lhs <= rhs * (R::one() + r(1e-9));
        all_ok &= ok;
        rungs.push(BoundRung { eps, lhs, rhs, ok });
    }
    Ok(FmoBoundReport { phi0: phi0.value, dispersion0: d0, c_constant: c, rungs, all_ok })
}
