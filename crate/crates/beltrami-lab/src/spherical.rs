//! Spherical (chordal) metric and spherical-area integrals on the extended
//! plane.
//!
//! The chordal distance is s(z,ζ) = |z−ζ|/(√(1+|z|²)√(1+|ζ|²)) with
//! s(z,∞) = 1/√(1+|z|²). The spherical area element is dS = 4 dm/(1+|z|²)²;
//! a `unit` normalization without the factor 4 is also provided (the two
//! appear inconsistently in the infinity-tail conditions, so both are kept).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{r, Real};
use crate::point::ComplexPoint;
use crate::quad::{lin_trapezoid, log_trapezoid};

/// Chordal distance between extended-plane points; symmetric, in [0,1].
pub fn spherical_distance<R: Real>(z: ComplexPoint<R>, w: ComplexPoint<R>) -> R {
    match (z.finite(), w.finite()) {
        (Some(a), Some(b)) => {
            (a - b).norm() / ((R::one() + a.norm_sqr()).sqrt() * (R::one() + b.norm_sqr()).sqrt())
        }
        (Some(a), None) | (None, Some(a)) => R::one() / (R::one() + a.norm_sqr()).sqrt(),
        (None, None) => R::zero(),
    }
}

/// Max pairwise chordal distance over a point set (≥ 2 points).
pub fn spherical_diameter<R: Real>(points: &[ComplexPoint<R>]) -> Result<R> {
    if points.len() < 2 {
        return Err(Error::Domain("spherical_diameter needs at least 2 points".into()));
    }
    let mut best = R::zero();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(spherical_distance(*a, *b));
        }
    }
    Ok(best)
}

/// Normalization of the spherical area element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphericalNormalization {
    /// dS = 4 dm/(1+|z|²)²
    FullArea,
    /// dS = dm/(1+|z|²)²
    Unit,
}

/// Result of a spherical-area quadrature over an annulus.
#[derive(Debug, Clone, Copy)]
pub struct AreaIntegral<R> {
    /// Integral truncated at `r_max` (equals the full value for finite R2).
    pub truncated: R,
    /// Tail-extrapolated value when R2 = ∞ and a power-law fit succeeded.
    pub extrapolated: Option<R>,
    /// Truncation radius actually used.
    pub r_max: R,
    /// Set when an overflow guard tripped or the tail did not decay.
    pub flagged: bool,
}

impl<R: Real> AreaIntegral<R> {
    /// Extrapolated value when available, otherwise the truncated one.
    pub fn value(&self) -> R {
        self.extrapolated.unwrap_or(self.truncated)
    }
}

/// Quadrature controls for [`spherical_area_integral`].
#[derive(Debug, Clone, Copy)]
pub struct AreaQuadOpts {
    pub angular_samples: usize,
    pub radial_nodes_per_decade: usize,
    /// Truncation radius for improper upper limits; defaults to 10³ times the
    /// larger of 1 and R1.
    pub r_max: Option<f64>,
    pub overflow_guard: f64,
}

impl Default for AreaQuadOpts {
    fn default() -> Self {
        AreaQuadOpts {
            angular_samples: 64,
            radial_nodes_per_decade: 256,
            r_max: None,
            overflow_guard: 1e12,
        }
    }
}

/// ∫ g·dS over the annulus {R1 < |z| < R2}, R2 possibly infinite.
///
/// Improper upper limits are truncated at `r_max` and the tail is
/// extrapolated assuming the power-law decay observed over the last decade
/// of the radial profile; both values are reported.
pub fn spherical_area_integral<R: Real>(
    g: impl Fn(Complex<R>) -> R,
    r1: R,
    r2: R,
    normalization: SphericalNormalization,
    opts: &AreaQuadOpts,
) -> Result<AreaIntegral<R>> {
    if r1 < R::zero() || r2 <= r1 {
        return Err(Error::Domain("annulus requires 0 <= R1 < R2".into()));
    }
    let factor = match normalization {
        SphericalNormalization::FullArea => r::<R>(4.0),
        SphericalNormalization::Unit => R::one(),
    };
    let m = opts.angular_samples.max(8);
    let two_pi = R::PI() + R::PI();
    // radial profile F(r) = w(r)·r·⟨g⟩_θ(r), so that ∫ = 2π ∫ F(r) dr
    let profile = |rad: R| -> R {
        let mut sum = R::zero();
        for j in 0..m {
            let theta = two_pi * r::<R>(j as f64) / r::<R>(m as f64);
            sum += g(Complex::from_polar(rad, theta));
        }
        let mean = sum / r::<R>(m as f64);
        let w = factor / ((R::one() + rad * rad) * (R::one() + rad * rad));
        mean * w * rad
    };

    let improper = r2.is_infinite();
    let r_max = if improper {
        r(opts.r_max.unwrap_or_else(|| 1e3 * r1.to_f64().unwrap_or(0.0).max(1.0)))
    } else {
        r2
    };

    let mut total = R::zero();
    // linear rule near the origin, log-spaced beyond
    let split = R::one().min(r_max).max(r1);
    if r1 < split {
        total += lin_trapezoid(profile, r1, split, 2048) * two_pi;
    }
    if split < r_max {
        total += log_trapezoid(profile, split, r_max, opts.radial_nodes_per_decade) * two_pi;
    }

    let mut flagged = !total.is_finite() || total.abs() > r(opts.overflow_guard);
    let mut extrapolated = None;
    if improper && !flagged {
        // fit F ~ C·r^{-p} over the last decade; tail = 2π F(Rmax)·Rmax/(p−1)
        let a = r_max / r(10.0);
        let fa = profile(a);
        let fb = profile(r_max);
        if fb > R::zero() && fa > fb {
            let p = (fa / fb).ln() / (r_max / a).ln();
            if p > r(1.01) {
                let tail = two_pi * fb * r_max / (p - R::one());
                extrapolated = Some(total + tail);
            } else {
                flagged = true;
            }
        } else if fb.abs() > R::zero() {
            flagged = true;
        } else {
            extrapolated = Some(total);
        }
    }

    Ok(AreaIntegral { truncated: total, extrapolated, r_max, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type P = ComplexPoint<f64>;
    fn pt(re: f64, im: f64) -> P {
        ComplexPoint::new(re, im)
    }

    #[test]
    fn distance_values() {
        assert!((spherical_distance(pt(0.0, 0.0), P::Infinity) - 1.0).abs() < 1e-15);
        assert!((spherical_distance(pt(0.0, 0.0), pt(1.0, 0.0)) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(spherical_distance(pt(1.0, 0.0), pt(1.0, 0.0)), 0.0);
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let random_pt = |rng: &mut ChaCha8Rng| -> P {
            if rng.gen_bool(0.05) {
                P::Infinity
            } else {
                pt(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0))
            }
        };
        for _ in 0..10_000 {
            let a = random_pt(&mut rng);
            let b = random_pt(&mut rng);
            let c = random_pt(&mut rng);
            let ab = spherical_distance(a, b);
            let bc = spherical_distance(b, c);
            let ac = spherical_distance(a, c);
            assert!((ab - spherical_distance(b, a)).abs() < 1e-15);
            assert!(ab <= 1.0 + 1e-15 && ab >= 0.0);
            assert!(ac <= ab + bc + 1e-12, "triangle: {ac} > {ab}+{bc}");
        }
    }

    #[test]
    fn diameter_examples() {
        let inf = P::Infinity;
        assert!((spherical_diameter(&[pt(0.0, 0.0), inf]).unwrap() - 1.0).abs() < 1e-15);
        assert!(
            (spherical_diameter(&[pt(0.0, 0.0), pt(1.0, 0.0)]).unwrap() - 1.0 / 2f64.sqrt()).abs()
                < 1e-15
        );
        assert!((spherical_diameter(&[pt(0.0, 0.0), pt(1.0, 0.0), inf]).unwrap() - 1.0).abs() < 1e-15);
        assert!(spherical_diameter(&[pt(0.0, 0.0)]).is_err());
    }

    #[test]
    fn area_of_tail_annulus() {
        // g≡1, (R,∞), full-area → 4π/(1+R²)
        for big_r in [0.5, 2.0, 10.0] {
            let v = spherical_area_integral(
                |_z| 1.0f64,
                big_r,
                f64::INFINITY,
                SphericalNormalization::FullArea,
                &AreaQuadOpts::default(),
            )
            .unwrap();
            let expect = 4.0 * std::f64::consts::PI / (1.0 + big_r * big_r);
            let err = (v.value() - expect).abs() / expect;
            assert!(err < 1e-3, "R={big_r}: rel err {err}");
        }
    }

    #[test]
    fn total_spherical_area() {
        let v = spherical_area_integral(
            |_z| 1.0f64,
            0.0,
            f64::INFINITY,
            SphericalNormalization::FullArea,
            &AreaQuadOpts::default(),
        )
        .unwrap();
        let expect = 4.0 * std::f64::consts::PI;
        assert!((v.value() - expect).abs() / expect < 1e-3);
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let v = spherical_area_integral(
            |_z| 0.0f64,
            0.0,
            f64::INFINITY,
            SphericalNormalization::Unit,
            &AreaQuadOpts::default(),
        )
        .unwrap();
        assert_eq!(v.value(), 0.0);
        assert!(!v.flagged);
    }

    #[test]
    fn non_integrable_tail_is_flagged() {
        let v = spherical_area_integral(
            |z: num_complex::Complex<f64>| (1.0 + z.norm_sqr()).powi(2),
            1.0,
            f64::INFINITY,
            SphericalNormalization::Unit,
            &AreaQuadOpts::default(),
        )
        .unwrap();
        assert!(v.flagged);
    }
}
