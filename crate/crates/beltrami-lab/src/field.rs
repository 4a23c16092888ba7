//! Complex coefficients μ and the pointwise dilatation quantities.
//!
//! A [`MuField`] is the single source of truth for every dilatation quantity:
//! the quotient K_μ = (1+|μ|)/(1−|μ|), the tangent quotient K^T_μ(z,z₀) and
//! its circle means. Values of |μ| are clamped strictly below 1 and K values
//! are capped; both guards keep counters so degenerate evaluations are
//! reported rather than silently absorbed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{r, Real};
use crate::point::ComplexPoint;

/// |μ| is clamped to this value (1 − 2⁻⁴⁰).
pub fn mu_clamp<R: Real>() -> R {
    R::one() - r::<R>(2f64.powi(-40))
}

/// Default cap for dilatation quotients.
pub const K_CAP_DEFAULT: f64 = 1e8;

/// Square grid specification: n×n samples over [center±half_width]².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<R> {
    pub center: Complex<R>,
    pub half_width: R,
    pub n: usize,
}

impl<R: Real> GridSpec<R> {
    pub fn new(center: Complex<R>, half_width: R, n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Domain(format!(
                "grid n must be a power of two >= 16, got {n}"
            )));
        }
        if half_width <= R::zero() {
            return Err(Error::Domain("half_width must be positive".into()));
        }
        Ok(GridSpec { center, half_width, n })
    }

    /// Grid spacing 2·half_width/n.
    pub fn spacing(&self) -> R {
        (self.half_width + self.half_width) / r(self.n as f64)
    }

    /// Grid node at indices (ix, iy); periodic layout, right/top edge excluded.
    pub fn node(&self, ix: usize, iy: usize) -> Complex<R> {
        let h = self.spacing();
        Complex::new(
            self.center.re - self.half_width + r::<R>(ix as f64) * h,
            self.center.im - self.half_width + r::<R>(iy as f64) * h,
        )
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Radial dilatation profile K(r) ≥ 1 used by the composable builtin family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KProfile<R> {
    /// K(r) = k.
    Const(R),
    /// K(r) = max(1, log(1/r)).
    LogInv,
    /// K(r) = max(1, log²(1/r)).
    LogSqInv,
    /// K(r) = 1 + 1/r.
    OnePlusInv,
    /// K(r) = max(1, r^p).
    Power(R),
    /// K(r) = max(1, log r).
    LogAbs,
}

impl<R: Real> KProfile<R> {
    pub fn eval(&self, radius: R) -> R {
        let one = R::one();
        if radius <= R::zero() {
            // K at the origin is taken as the (possibly infinite) limit; the
            // caller-side clamp on |μ| bounds it in practice.
            return match self {
                KProfile::Const(k) => *k,
                KProfile::LogInv | KProfile::LogSqInv | KProfile::OnePlusInv => R::infinity(),
                KProfile::Power(p) => {
                    if *p < R::zero() {
                        R::infinity()
                    } else {
                        one
                    }
                }
                KProfile::LogAbs => one,
            };
        }
        match self {
            KProfile::Const(k) => *k,
            KProfile::LogInv => one.max((one / radius).ln()),
            KProfile::LogSqInv => {
                let l = (one / radius).ln();
                one.max(l * l)
            }
            KProfile::OnePlusInv => one + one / radius,
            KProfile::Power(p) => one.max(radius.powf(*p)),
            KProfile::LogAbs => one.max(radius.ln()),
        }
    }
}

/// How a radial profile is realized as a complex coefficient.
///
/// `Radial` uses μ(z) = ((K−1)/(K+1))·z/z̄, the coefficient of the radial
/// stretch f(z)=z|z|^{K−1}, for which K^T(·,0) = 1/K. `Angular` flips the
/// sign, giving K^T(·,0) = K.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMode {
    Radial,
    Angular,
}

/// The kinds of complex coefficient supported.
#[derive(Debug, Clone)]
pub enum MuKind<R> {
    /// μ ≡ 0.
    Zero,
    /// μ(z) = ((k−1)/(k+1))·z/z̄, the coefficient of f(z) = z|z|^{k−1}.
    RadialStretch { k: R },
    /// Coefficient of the Shabat mapping w = z(1−ln|z|): μ = −(z/z̄)/(1−2ln|z|).
    Shabat,
    /// Coefficient of the winding map f(z) = z·e^{i√(−ln|z|)} on |z|<1.
    LogSpiral,
    /// User-composable radial profile K(r).
    Profile { profile: KProfile<R>, mode: ProfileMode },
    /// Grid-sampled μ with bilinear interpolation; 0 outside the grid.
    Grid { samples: Vec<Complex<R>>, spec: GridSpec<R> },
    /// μ_n truncation: original value where |μ| ≤ 1−1/n, 0 elsewhere.
    Truncated { inner: Box<MuField<R>>, level: u32 },
}

/// An immutable complex coefficient with evaluation guards.
#[derive(Debug)]
pub struct MuField<R> {
    kind: MuKind<R>,
    /// μ evaluates to 0 for |z| > support_radius; `None` means unbounded.
    support_radius: Option<R>,
    k_cap: R,
    clamp_count: AtomicU64,
    cap_count: AtomicU64,
}

impl<R: Clone> Clone for MuField<R> {
    fn clone(&self) -> Self {
        MuField {
            kind: self.kind.clone(),
            support_radius: self.support_radius.clone(),
            k_cap: self.k_cap.clone(),
            clamp_count: AtomicU64::new(self.clamp_count.load(Ordering::Relaxed)),
            cap_count: AtomicU64::new(self.cap_count.load(Ordering::Relaxed)),
        }
    }
}

impl<R: Real> MuField<R> {
    pub fn new(kind: MuKind<R>) -> Self {
        MuField {
            kind,
            support_radius: None,
            k_cap: r(K_CAP_DEFAULT),
            clamp_count: AtomicU64::new(0),
            cap_count: AtomicU64::new(0),
        }
    }

    pub fn zero() -> Self {
        MuField::new(MuKind::Zero)
    }

    pub fn radial_stretch(k: R) -> Self {
        MuField::new(MuKind::RadialStretch { k })
    }

    pub fn shabat() -> Self {
        MuField::new(MuKind::Shabat)
    }

    pub fn log_spiral() -> Self {
        MuField::new(MuKind::LogSpiral)
    }

    pub fn profile(profile: KProfile<R>, mode: ProfileMode) -> Self {
        MuField::new(MuKind::Profile { profile, mode })
    }

    pub fn grid(samples: Vec<Complex<R>>, spec: GridSpec<R>) -> Result<Self> {
        if samples.len() != spec.len() {
            return Err(Error::Format(format!(
                "grid field expects {} samples, got {}",
                spec.len(),
                samples.len()
            )));
        }
        Ok(MuField::new(MuKind::Grid { samples, spec }))
    }

    /// Restrict the coefficient to |z| ≤ radius (0 outside).
    pub fn with_support(mut self, radius: R) -> Self {
        self.support_radius = Some(radius);
        self
    }

    pub fn with_k_cap(mut self, cap: R) -> Self {
        self.k_cap = cap;
        self
    }

    pub fn support_radius(&self) -> Option<R> {
        self.support_radius
    }

    pub fn k_cap(&self) -> R {
        self.k_cap
    }

    pub fn kind(&self) -> &MuKind<R> {
        &self.kind
    }

    /// Number of evaluations where |μ| had to be clamped below 1.
    pub fn clamp_count(&self) -> u64 {
        self.clamp_count.load(Ordering::Relaxed)
    }

    /// Number of evaluations where a dilatation quotient hit the cap.
    pub fn cap_count(&self) -> u64 {
        self.cap_count.load(Ordering::Relaxed)
    }

    /// μ_n truncation of the approximation scheme (kept as a wrapper so it
    /// is idempotent for n' ≥ n).
    pub fn truncate(&self, n: u32) -> Result<MuField<R>> {
        if n < 2 {
            return Err(Error::Domain(format!("truncation level must be >= 2, got {n}")));
        }
        let mut f = MuField::new(MuKind::Truncated { inner: Box::new(self.clone()), level: n });
        f.support_radius = self.support_radius;
        f.k_cap = self.k_cap;
        Ok(f)
    }

    /// Truncation level if this is a truncated field.
    pub fn truncation_level(&self) -> Option<u32> {
        match &self.kind {
            MuKind::Truncated { level, .. } => Some(*level),
            _ => None,
        }
    }

    fn eval_raw(&self, z: Complex<R>) -> Complex<R> {
        let zero = Complex::new(R::zero(), R::zero());
        let rad = z.norm();
        match &self.kind {
            MuKind::Zero => zero,
            MuKind::RadialStretch { k } => {
                if rad == R::zero() {
                    return zero;
                }
                let c = (*k - R::one()) / (*k + R::one());
                z / z.conj() * c
            }
            MuKind::Shabat => {
                if rad == R::zero() {
                    return zero;
                }
                let denom = R::one() - (R::one() + R::one()) * rad.ln();
                if denom == R::zero() {
                    // singular circle |z| = √e; the clamp takes over
                    return z / z.conj() * -mu_clamp::<R>();
                }
                z / z.conj() * (-R::one() / denom)
            }
            MuKind::LogSpiral => {
                if rad <= R::zero() || rad >= R::one() {
                    return zero;
                }
                // f = z e^{iθ(r)}, θ(r) = √(−ln r); μ = (z/z̄)·ia/(1+ia)
                // with a = rθ'(r)/2 = −1/(4√(−ln r)).
                let a = -R::one() / (r::<R>(4.0) * (-rad.ln()).sqrt());
                let ia = Complex::new(R::zero(), a);
                let one = Complex::new(R::one(), R::zero());
                z / z.conj() * (ia / (one + ia))
            }
            MuKind::Profile { profile, mode } => {
                if rad == R::zero() {
                    return zero;
                }
                let k = profile.eval(rad);
                let c = if k.is_finite() { (k - R::one()) / (k + R::one()) } else { R::one() };
                let c = match mode {
                    ProfileMode::Radial => c,
                    ProfileMode::Angular => -c,
                };
                z / z.conj() * c
            }
            MuKind::Grid { samples, spec } => {
                let h = spec.spacing();
                let fx = (z.re - (spec.center.re - spec.half_width)) / h;
                let fy = (z.im - (spec.center.im - spec.half_width)) / h;
                let nmax = r::<R>((spec.n - 1) as f64);
                if fx < R::zero() || fy < R::zero() || fx > nmax || fy > nmax {
                    return zero;
                }
                let ix = fx.floor().to_usize().unwrap_or(0).min(spec.n - 2);
                let iy = fy.floor().to_usize().unwrap_or(0).min(spec.n - 2);
                let tx = fx - r::<R>(ix as f64);
                let ty = fy - r::<R>(iy as f64);
                let at = |i: usize, j: usize| samples[j * spec.n + i];
                let one = R::one();
                at(ix, iy) * ((one - tx) * (one - ty))
                    + at(ix + 1, iy) * (tx * (one - ty))
                    + at(ix, iy + 1) * ((one - tx) * ty)
                    + at(ix + 1, iy + 1) * (tx * ty)
            }
            MuKind::Truncated { inner, level } => {
                let v = inner.eval_mu(z);
                let threshold = R::one() - R::one() / r::<R>(*level as f64);
                if v.norm() <= threshold {
                    v
                } else {
                    zero
                }
            }
        }
    }

    /// Evaluate μ(z) at a finite point, with support restriction and clamp.
    pub fn eval_mu(&self, z: Complex<R>) -> Complex<R> {
        if let Some(s) = self.support_radius {
            if z.norm() > s {
                return Complex::new(R::zero(), R::zero());
            }
        }
        let v = self.eval_raw(z);
        let n = v.norm();
        let clamp = mu_clamp::<R>();
        if n >= clamp || !n.is_finite() {
            self.clamp_count.fetch_add(1, Ordering::Relaxed);
            if n.is_finite() && n > R::zero() {
                v / Complex::new(n, R::zero()) * clamp
            } else {
                Complex::new(clamp, R::zero())
            }
        } else {
            v
        }
    }

    /// Evaluate μ at an extended-plane point; ∞ is a domain error.
    pub fn eval_mu_at(&self, z: ComplexPoint<R>) -> Result<Complex<R>> {
        match z.finite() {
            Some(z) => Ok(self.eval_mu(z)),
            None => Err(Error::Domain("eval_mu at infinity".into())),
        }
    }

    /// Dilatation quotient K_μ(z) = (1+|μ|)/(1−|μ|), capped at `k_cap`.
    pub fn k_mu(&self, z: Complex<R>) -> R {
        let m = self.eval_mu(z).norm();
        let k = (R::one() + m) / (R::one() - m);
        if k > self.k_cap || !k.is_finite() {
            self.cap_count.fetch_add(1, Ordering::Relaxed);
            self.k_cap
        } else {
            k
        }
    }

    /// Tangent dilatation quotient K^T_μ(z, z₀).
    ///
    /// For z₀ = ∞ the convention K^T_μ(ζ,∞) := K^T_μ(1/ζ, 0) applies.
    pub fn k_tangent(&self, z: Complex<R>, z0: ComplexPoint<R>) -> Result<R> {
        let zero = Complex::new(R::zero(), R::zero());
        let (w, base) = match z0.finite() {
            Some(p) => {
                if z == p {
                    return Err(Error::Domain("k_tangent requires z != z0".into()));
                }
                (z, p)
            }
            None => {
                if z == zero {
                    return Err(Error::Domain("k_tangent at infinity requires z != 0".into()));
                }
                (Complex::new(R::one(), R::zero()) / z, zero)
            }
        };
        let d = w - base;
        if d == zero {
            return Err(Error::Domain("k_tangent requires z != z0".into()));
        }
        let mu = self.eval_mu(w);
        let q = d.conj() / d;
        let num = (Complex::new(R::one(), R::zero()) - q * mu).norm_sqr();
        let den = R::one() - mu.norm_sqr();
        let kt = num / den;
        let lo = R::one() / self.k_cap;
        if !kt.is_finite() || kt > self.k_cap {
            self.cap_count.fetch_add(1, Ordering::Relaxed);
            Ok(self.k_cap)
        } else if kt < lo {
            self.cap_count.fetch_add(1, Ordering::Relaxed);
            Ok(lo)
        } else {
            Ok(kt)
        }
    }

    /// Integral mean of K^T(·, z₀) over the circle |z−z₀| = radius, by the
    /// trapezoidal rule on `m` equispaced angles.
    pub fn circle_mean_kt(&self, z0: ComplexPoint<R>, radius: R, m: usize) -> Result<CircleMean<R>> {
        self.circle_mean_kt_offset(z0, radius, m, R::zero())
    }

    /// Same as [`circle_mean_kt`](Self::circle_mean_kt) with the quadrature
    /// nodes rotated by `offset` radians.
    pub fn circle_mean_kt_offset(
        &self,
        z0: ComplexPoint<R>,
        radius: R,
        m: usize,
        offset: R,
    ) -> Result<CircleMean<R>> {
        if radius <= R::zero() {
            return Err(Error::Domain("circle_mean_kt requires r > 0".into()));
        }
        if m < 8 {
            return Err(Error::Domain("circle_mean_kt requires m >= 8".into()));
        }
        let base = z0
            .finite()
            .ok_or_else(|| Error::Domain("circle_mean_kt requires finite z0".into()))?;
        let mut sum = R::zero();
        let mut flagged = false;
        let two_pi = R::PI() + R::PI();
        for j in 0..m {
            let theta = two_pi * r::<R>(j as f64) / r::<R>(m as f64) + offset;
            let z = base + Complex::from_polar(radius, theta);
            let kt = self.k_tangent(z, z0)?;
            if !kt.is_finite() {
                flagged = true;
                continue;
            }
            sum += kt;
        }
        let value = (sum / r::<R>(m as f64)).max(R::one() / self.k_cap);
        Ok(CircleMean { value, flagged })
    }
}

/// Result of a circle-mean quadrature.
#[derive(Debug, Clone, Copy)]
pub struct CircleMean<R> {
    pub value: R,
    /// True when some integrand sample was non-finite even after capping.
    pub flagged: bool,
}

/// Parse a builtin field key such as `radial-stretch:k=2.0` or
/// `kprofile:kind=log-sq-inv,mode=angular,support=1`.
pub fn parse_field_key<R: Real>(key: &str) -> Result<MuField<R>> {
    let bad = |msg: &str| Error::Key { key: key.to_string(), msg: msg.to_string() };
    let (name, args) = match key.split_once(':') {
        Some((n, a)) => (n, a),
        None => (key, ""),
    };
    let mut params: Vec<(&str, &str)> = Vec::new();
    if !args.is_empty() {
        for part in args.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(&format!("malformed parameter `{part}`")))?;
            params.push((k.trim(), v.trim()));
        }
    }
    let take_f = |params: &[(&str, &str)], name: &str| -> Result<Option<f64>> {
        for (k, v) in params {
            if *k == name {
                return v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| bad(&format!("parameter `{name}` is not a number")));
            }
        }
        Ok(None)
    };
    let known = |params: &[(&str, &str)], allowed: &[&str]| -> Result<()> {
        for (k, _) in params {
            if !allowed.contains(k) {
                return Err(bad(&format!("unknown parameter `{k}`")));
            }
        }
        Ok(())
    };

    let mut field = match name {
        "zero" => {
            known(&params, &["support"])?;
            MuField::zero()
        }
        "radial-stretch" => {
            known(&params, &["k", "support"])?;
            let k = take_f(&params, "k")?.ok_or_else(|| bad("radial-stretch needs k="))?;
            if k < 1.0 {
                return Err(bad("radial-stretch needs k >= 1"));
            }
            MuField::radial_stretch(r(k))
        }
        "shabat" => {
            known(&params, &["support"])?;
            MuField::shabat()
        }
        "log-spiral" => {
            known(&params, &["support"])?;
            MuField::log_spiral()
        }
        "kprofile" => {
            known(&params, &["kind", "mode", "k", "p", "support"])?;
            let kind = params
                .iter()
                .find(|(k, _)| *k == "kind")
                .map(|(_, v)| *v)
                .ok_or_else(|| bad("kprofile needs kind="))?;
            let profile = match kind {
                "const" => {
                    let k = take_f(&params, "k")?.ok_or_else(|| bad("kprofile const needs k="))?;
                    KProfile::Const(r(k))
                }
                "log-inv" => KProfile::LogInv,
                "log-sq-inv" => KProfile::LogSqInv,
                "one-plus-inv" => KProfile::OnePlusInv,
                "power" => {
                    let p = take_f(&params, "p")?.ok_or_else(|| bad("kprofile power needs p="))?;
                    KProfile::Power(r(p))
                }
                "log-abs" => KProfile::LogAbs,
                other => return Err(bad(&format!("unknown kprofile kind `{other}`"))),
            };
            let mode = match params.iter().find(|(k, _)| *k == "mode").map(|(_, v)| *v) {
                None | Some("radial") => ProfileMode::Radial,
                Some("angular") => ProfileMode::Angular,
                Some(other) => return Err(bad(&format!("unknown mode `{other}`"))),
            };
            MuField::profile(profile, mode)
        }
        other => return Err(bad(&format!("unknown field `{other}`"))),
    };
    if let Some(s) = take_f(&params, "support")? {
        if s <= 0.0 {
            return Err(bad("support must be positive"));
        }
        field = field.with_support(r(s));
    }
    Ok(field)
}

const MU_GRID_MAGIC: &[u8; 8] = b"MUGRID01";

/// Write a grid-sampled μ to the documented binary format.
///
/// Layout (little-endian): magic `MUGRID01`, u32 n, f64 center_re, f64
/// center_im, f64 half_width, then n² samples as f64 pairs (re, im),
/// row-major with the imaginary axis outer (iy = 0..n from bottom) and the
/// real axis inner (ix = 0..n from left).
pub fn save_grid_field<R: Real>(path: &Path, samples: &[Complex<R>], spec: &GridSpec<R>) -> Result<()> {
    if samples.len() != spec.len() {
        return Err(Error::Format("sample count does not match grid spec".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MU_GRID_MAGIC)?;
    w.write_all(&(spec.n as u32).to_le_bytes())?;
    for v in [spec.center.re, spec.center.im, spec.half_width] {
        w.write_all(&v.to_f64().unwrap().to_le_bytes())?;
    }
    for s in samples {
        w.write_all(&s.re.to_f64().unwrap().to_le_bytes())?;
        w.write_all(&s.im.to_f64().unwrap().to_le_bytes())?;
    }
    Ok(())
}

/// Load a grid μ from the binary format (auto-detected by magic) or from the
/// CSV variant: a header line `n,center_re,center_im,half_width` followed by
/// n² lines `re,im` in the same row-major order.
pub fn load_grid_field<R: Real>(path: &Path) -> Result<MuField<R>> {
    let mut f = File::open(path)?;
    let mut magic = [0u8; 8];
    let got = f.read(&mut magic)?;
    if got == 8 && &magic == MU_GRID_MAGIC {
        let mut buf4 = [0u8; 4];
        f.read_exact(&mut buf4)?;
        let n = u32::from_le_bytes(buf4) as usize;
        let mut buf8 = [0u8; 8];
        let mut next = || -> Result<f64> {
            f.read_exact(&mut buf8)?;
            Ok(f64::from_le_bytes(buf8))
        };
        let cre = next()?;
        let cim = next()?;
        let hw = next()?;
        let spec = GridSpec::new(Complex::new(r(cre), r(cim)), r(hw), n)?;
        let mut samples = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            let mut pair = [0u8; 16];
            f.read_exact(&mut pair)?;
            let re = f64::from_le_bytes(pair[..8].try_into().unwrap());
            let im = f64::from_le_bytes(pair[8..].try_into().unwrap());
            samples.push(Complex::new(r(re), r(im)));
        }
        return MuField::grid(samples, spec);
    }
    // CSV fallback
    let rdr = BufReader::new(File::open(path)?);
    let mut lines = rdr.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty grid CSV".into()))??;
    let parts: Vec<&str> = header.split(',').map(|s| s.trim()).collect();
    if parts.len() != 4 {
        return Err(Error::Format("grid CSV header must be n,center_re,center_im,half_width".into()));
    }
    let n: usize = parts[0]
        .parse()
        .map_err(|_| Error::Format("bad n in grid CSV header".into()))?;
    let nums: Vec<f64> = parts[1..]
        .iter()
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Format("bad number in grid CSV header".into()))?;
    let spec = GridSpec::new(Complex::new(r(nums[0]), r(nums[1])), r(nums[2]), n)?;
    let mut samples = Vec::with_capacity(n * n);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::Format("grid CSV row must be re,im".into()))?;
        let re: f64 = a.trim().parse().map_err(|_| Error::Format("bad re".into()))?;
        let im: f64 = b.trim().parse().map_err(|_| Error::Format("bad im".into()))?;
        samples.push(Complex::new(r(re), r(im)));
    }
    MuField::grid(samples, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    #[test]
    fn eval_mu_zero_field() {
        let f = MuField::<f64>::zero();
        assert_eq!(f.eval_mu(C::new(0.3, 0.1)), C::new(0.0, 0.0));
    }

    #[test]
    fn eval_mu_radial_stretch() {
        // symbolic differentiation of f(z)=z|z|^{k−1} gives μ=((k−1)/(k+1))·z/z̄
        let f = MuField::radial_stretch(2.0);
        let v = f.eval_mu(C::new(1.0, 0.0));
        assert!((v - C::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_mu_shabat_at_inv_e() {
        // w = z(1−ln|z|) gives μ = −(z/z̄)/(1−2ln|z|); at |z|=e⁻¹, |μ| = 1/3
        let f = MuField::<f64>::shabat();
        let z = C::from_polar((-1.0f64).exp(), 0.7);
        let v = f.eval_mu(z);
        assert!((v.norm() - 1.0 / 3.0).abs() < 1e-14);
        let expected = z / z.conj() * (-1.0 / 3.0);
        assert!((v - expected).norm() < 1e-14);
    }

    #[test]
    fn eval_mu_at_infinity_is_domain_error() {
        let f = MuField::<f64>::zero();
        assert!(f.eval_mu_at(ComplexPoint::Infinity).is_err());
    }

    #[test]
    fn clamp_counts() {
        let f = MuField::<f64>::shabat();
        // |z| = √e is the singular circle
        let z = C::from_polar(0.5f64.exp(), 0.3);
        let v = f.eval_mu(z);
        assert!(v.norm() < 1.0);
        assert!(f.clamp_count() > 0);
    }

    #[test]
    fn k_mu_values() {
        let f = MuField::<f64>::zero();
        assert_eq!(f.k_mu(C::new(0.2, 0.0)), 1.0);
        let f = MuField::radial_stretch(2.0);
        for z in [C::new(0.5, 0.2), C::new(-1.0, 3.0), C::new(0.0, 0.01)] {
            assert!((f.k_mu(z) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn k_tangent_radial_stretch_is_inverse_k() {
        let k = 3.5;
        let f = MuField::radial_stretch(k);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let z = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if z.norm() < 1e-6 {
                continue;
            }
            let kt = f.k_tangent(z, ComplexPoint::zero()).unwrap();
            assert!((kt - 1.0 / k).abs() < 1e-12, "kt={kt}");
        }
    }

    #[test]
    fn k_tangent_rejects_equal_points() {
        let f = MuField::<f64>::zero();
        let z = C::new(1.0, 1.0);
        assert!(f.k_tangent(z, ComplexPoint::from(z)).is_err());
    }

    #[test]
    fn k_tangent_sandwich() {
        // K⁻¹ ≤ K^T ≤ K on random draws, for several fields
        let fields: Vec<MuField<f64>> = vec![
            MuField::radial_stretch(4.0),
            MuField::shabat(),
            MuField::log_spiral(),
            MuField::profile(KProfile::LogInv, ProfileMode::Angular),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in &fields {
            for _ in 0..2500 {
                let z = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let z0 = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                if (z - z0).norm() < 1e-9 || z.norm() < 1e-9 {
                    continue;
                }
                let k = f.k_mu(z);
                let kt = f.k_tangent(z, ComplexPoint::from(z0)).unwrap();
                assert!(kt <= k * (1.0 + 1e-12), "kt={kt} k={k}");
                assert!(kt >= 1.0 / k * (1.0 - 1e-12), "kt={kt} 1/k={}", 1.0 / k);
            }
        }
    }

    #[test]
    fn k_tangent_at_infinity_uses_substitution() {
        let f = MuField::radial_stretch(2.0);
        let z = C::new(0.25, 0.1);
        let at_inf = f.k_tangent(z, ComplexPoint::Infinity).unwrap();
        let direct = f.k_tangent(C::new(1.0, 0.0) / z, ComplexPoint::zero()).unwrap();
        assert_eq!(at_inf, direct);
    }

    #[test]
    fn circle_mean_constant_on_circles() {
        let f = MuField::<f64>::zero();
        for rr in [0.1, 1.0, 10.0] {
            let m = f.circle_mean_kt(ComplexPoint::zero(), rr, 512).unwrap();
            assert!((m.value - 1.0).abs() < 1e-14);
        }
        let f = MuField::<f64>::radial_stretch(3.0);
        for rr in [0.05, 0.3, 0.9] {
            let m = f.circle_mean_kt(ComplexPoint::zero(), rr, 512).unwrap();
            assert!((m.value - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_mean_offset_invariance() {
        let f = MuField::<f64>::shabat();
        let a = f
            .circle_mean_kt_offset(ComplexPoint::zero(), 0.3, 512, 0.0)
            .unwrap()
            .value;
        let b = f
            .circle_mean_kt_offset(ComplexPoint::zero(), 0.3, 512, 0.013)
            .unwrap()
            .value;
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn grid_field_matches_analytic_circle_mean() {
        // sample radial-stretch on a grid and compare circle means
        let k = 3.0;
        let analytic = MuField::radial_stretch(k);
        let spec = GridSpec::new(C::new(0.0, 0.0), 2.0, 256).unwrap();
        let mut samples = Vec::with_capacity(spec.len());
        for iy in 0..spec.n {
            for ix in 0..spec.n {
                samples.push(analytic.eval_mu(spec.node(ix, iy)));
            }
        }
        let grid = MuField::grid(samples, spec).unwrap();
        let a = analytic.circle_mean_kt(ComplexPoint::zero(), 0.5, 512).unwrap().value;
        let g = grid.circle_mean_kt(ComplexPoint::zero(), 0.5, 512).unwrap().value;
        assert!((a - g).abs() < 1e-3, "analytic {a} vs grid {g}");
    }

    #[test]
    fn grid_returns_zero_outside() {
        let spec = GridSpec::new(C::new(0.0, 0.0), 1.0, 16).unwrap();
        let samples = vec![C::new(0.5, 0.0); spec.len()];
        let f = MuField::grid(samples, spec).unwrap();
        assert_eq!(f.eval_mu(C::new(5.0, 0.0)), C::new(0.0, 0.0));
        assert!((f.eval_mu(C::new(0.1, 0.1)) - C::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn truncation_threshold_and_idempotence() {
        // |μ| = 0.9 everywhere, n=5 (threshold 0.8) → 0 everywhere
        let spec = GridSpec::new(C::new(0.0, 0.0), 1.0, 16).unwrap();
        let samples = vec![C::new(0.9, 0.0); spec.len()];
        let f = MuField::grid(samples, spec).unwrap();
        let t5 = f.truncate(5).unwrap();
        assert_eq!(t5.eval_mu(C::new(0.1, 0.2)), C::new(0.0, 0.0));
        let t10 = f.truncate(10).unwrap();
        assert!((t10.eval_mu(C::new(0.1, 0.2)).norm() - 0.9).abs() < 1e-12);
        // idempotent for n' >= n on already-truncated fields
        let tt = t5.truncate(9).unwrap();
        assert_eq!(tt.eval_mu(C::new(0.1, 0.2)), C::new(0.0, 0.0));
    }

    #[test]
    fn truncation_shabat_region_pointwise_oracle() {
        // brute-force check: truncate(4) zeroes exactly where |μ| > 3/4
        let f = MuField::<f64>::shabat();
        let t = f.truncate(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let z = C::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            if z.norm() < 1e-3 {
                continue;
            }
            let m = f.eval_mu(z);
            let tv = t.eval_mu(z);
            if m.norm() <= 0.75 {
                assert_eq!(tv, m);
            } else {
                assert_eq!(tv, C::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn parse_field_keys() {
        assert!(parse_field_key::<f64>("zero").is_ok());
        let f = parse_field_key::<f64>("radial-stretch:k=2.0,support=1").unwrap();
        assert_eq!(f.support_radius(), Some(1.0));
        assert!((f.eval_mu(C::new(0.5, 0.0)).re - 1.0 / 3.0).abs() < 1e-14);
        assert!(parse_field_key::<f64>("kprofile:kind=log-inv,mode=angular").is_ok());
        assert!(parse_field_key::<f64>("nope").is_err());
        assert!(parse_field_key::<f64>("radial-stretch:q=2").is_err());
    }

    #[test]
    fn grid_roundtrip_binary_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GridSpec::new(C::new(0.25, -0.5), 2.0, 16).unwrap();
        let samples: Vec<C> = (0..spec.len())
            .map(|i| C::new(0.001 * i as f64, -0.0005 * i as f64))
            .collect();
        let path = dir.path().join("mu.bin");
        save_grid_field(&path, &samples, &spec).unwrap();
        let loaded = load_grid_field::<f64>(&path).unwrap();
        match loaded.kind() {
            MuKind::Grid { samples: s2, spec: sp2 } => {
                assert_eq!(*sp2, spec);
                assert_eq!(s2, &samples);
            }
            _ => panic!("expected grid kind"),
        }
        // CSV variant
        let csv = dir.path().join("mu.csv");
        let mut text = format!("16,{},{},{}\n", 0.25, -0.5, 2.0);
        for s in &samples {
            text.push_str(&format!("{},{}\n", s.re, s.im));
        }
        std::fs::write(&csv, text).unwrap();
        let loaded = load_grid_field::<f64>(&csv).unwrap();
        match loaded.kind() {
            MuKind::Grid { samples: s2, .. } => {
                for (a, b) in s2.iter().zip(&samples) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
            _ => panic!("expected grid kind"),
        }
    }
}
