//! Quasiconformal solver for ∂̄f = μ·∂f on a periodic grid, plus the
//! truncation scheme that approximates degenerate coefficients by bounded
//! ones and diagnostics for the resulting mapping sequence.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read as IoRead, Write as IoWrite};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{GridSpec, MuField, MuKind};
use crate::num::{r, Real};
use crate::quad::log_trapezoid;
use crate::scalar::ScalarField;
use crate::verdict::{CriterionVerdict, Verdict};

/// Grid mapping with optional derivative fields. Values are row-major,
/// index iy·n + ix, matching `GridSpec::node`.
#[derive(Clone, Debug)]
pub struct Mapping<R> {
    pub grid: GridSpec<R>,
    pub values: Vec<Complex<R>>,
    pub d_f: Option<Vec<Complex<R>>>,
    pub dbar_f: Option<Vec<Complex<R>>>,
    /// Fraction of interior nodes with |∂f|² − |∂̄f|² > 0.
    pub jacobian_positive_fraction: Option<R>,
    /// Grid L¹-mean of |∂̄f − μ·∂f| declared by the solve.
    pub residual: Option<R>,
    pub truncation_level: Option<u32>,
}

impl<R: Real> Mapping<R> {
    pub fn from_fn(grid: GridSpec<R>, f: impl Fn(Complex<R>) -> Complex<R>) -> Self {
        let n = grid.n;
        let mut values = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                values.push(f(grid.node(ix, iy)));
            }
        }
        Mapping {
            grid,
            values,
            d_f: None,
            dbar_f: None,
            jacobian_positive_fraction: None,
            residual: None,
            truncation_level: None,
        }
    }

    /// Bilinear interpolation of f at z; z must lie inside the grid.
    pub fn eval(&self, z: Complex<R>) -> Result<Complex<R>> {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let fx = (z.re - (self.grid.center.re - self.grid.half_width)) / h;
        let fy = (z.im - (self.grid.center.im - self.grid.half_width)) / h;
        let nmax = r::<R>((n - 1) as f64);
        if fx < R::zero() || fy < R::zero() || fx > nmax || fy > nmax {
            return Err(Error::Domain(format!("point {z} outside mapping grid")));
        }
        let ix = fx.floor().to_usize().unwrap_or(0).min(n - 2);
        let iy = fy.floor().to_usize().unwrap_or(0).min(n - 2);
        let tx = fx - r::<R>(ix as f64);
        let ty = fy - r::<R>(iy as f64);
        let at = |i: usize, j: usize| self.values[j * n + i];
        let one = R::one();
        Ok(at(ix, iy) * ((one - tx) * (one - ty))
            + at(ix + 1, iy) * (tx * (one - ty))
            + at(ix, iy + 1) * ((one - tx) * ty)
            + at(ix + 1, iy + 1) * (tx * ty))
    }
}

/// μ_n(z): μ(z) where |μ(z)| ≤ 1 − 1/n, zero elsewhere.
pub fn truncate_mu<R: Real>(field: &MuField<R>, n: u32) -> Result<MuField<R>> {
    field.truncate(n)
}

fn transpose<T: Copy>(data: &mut [T], n: usize) {
    for i in 0..n {
        for j in 0..i {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn fft2<R: Real + FftNum>(data: &mut [Complex<R>], n: usize, fft: &Arc<dyn Fft<R>>) {
    data.par_chunks_mut(n).for_each(|row| fft.process(row));
    transpose(data, n);
    data.par_chunks_mut(n).for_each(|row| fft.process(row));
    transpose(data, n);
}

/// Integer wavenumber of DFT index j on a length-n grid.
fn wavenum<R: Real>(j: usize, n: usize) -> R {
    if j <= n / 2 {
        r(j as f64)
    } else {
        r(j as f64 - n as f64)
    }
}

struct Spectral<R> {
    n: usize,
    fwd: Arc<dyn Fft<R>>,
    inv: Arc<dyn Fft<R>>,
    /// π/half_width: frequency of the first harmonic on period 2·half_width.
    xi_base: R,
}

impl<R: Real + FftNum> Spectral<R> {
    fn new(grid: &GridSpec<R>) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            n: grid.n,
            fwd: planner.plan_fft_forward(grid.n),
            inv: planner.plan_fft_inverse(grid.n),
            xi_base: R::PI() / grid.half_width,
        }
    }

    /// Apply a Fourier multiplier m(κ), κ = ξ_x + i·ξ_y, with m(0) = 0.
    fn multiplier(
        &self,
        src: &[Complex<R>],
        m: impl Fn(Complex<R>) -> Complex<R> + Sync,
    ) -> Vec<Complex<R>> {
        let n = self.n;
        let mut hat = src.to_vec();
        fft2(&mut hat, n, &self.fwd);
        let norm = R::one() / r::<R>((n * n) as f64);
        hat.par_chunks_mut(n).enumerate().for_each(|(jy, row)| {
            let xi_y = self.xi_base * wavenum::<R>(jy, n);
            for (jx, v) in row.iter_mut().enumerate() {
                let kappa = Complex::new(self.xi_base * wavenum::<R>(jx, n), xi_y);
                let f = if kappa.norm_sqr() == R::zero() {
                    Complex::new(R::zero(), R::zero())
                } else {
                    m(kappa)
                };
                *v = *v * f * norm;
            }
        });
        fft2(&mut hat, n, &self.inv);
        hat
    }

    /// Beurling-type transform S = ∂ ∘ ∂̄⁻¹: multiplier conj(κ)/κ.
    fn beurling(&self, src: &[Complex<R>]) -> Vec<Complex<R>> {
        self.multiplier(src, |kappa| kappa.conj() / kappa)
    }

    /// ∂̄⁻¹ with the zero mode pinned to 0: multiplier 2/(iκ).
    fn dbar_inverse(&self, src: &[Complex<R>]) -> Vec<Complex<R>> {
        let two = Complex::new(R::one() + R::one(), R::zero());
        let i = Complex::new(R::zero(), R::one());
        self.multiplier(src, move |kappa| two / (i * kappa))
    }
}

/// Cell-averaged μ samples: s×s midpoint subsamples per grid cell. Averaging
/// tames the jump at the support boundary that a pointwise sample would alias.
fn sample_mu<R: Real>(field: &MuField<R>, grid: &GridSpec<R>, s: usize) -> (Vec<Complex<R>>, R) {
    let n = grid.n;
    let h = grid.spacing();
    let zero = Complex::new(R::zero(), R::zero());
    let mut out = vec![zero; n * n];
    let mut sup = R::zero();
    let weight = R::one() / r::<R>((s * s) as f64);
    let offset = |u: usize| (r::<R>(u as f64 + 0.5) / r::<R>(s as f64) - r::<R>(0.5)) * h;
    for (iy, row) in out.chunks_mut(n).enumerate() {
        for (ix, v) in row.iter_mut().enumerate() {
            let node = grid.node(ix, iy);
            let mut acc = zero;
            for uy in 0..s {
                for ux in 0..s {
                    let m = field.eval_mu(node + Complex::new(offset(ux), offset(uy)));
                    sup = sup.max(m.norm());
                    acc = acc + m;
                }
            }
            *v = acc * weight;
        }
    }
    (out, sup)
}

fn l1_mean_diff<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> R {
    let sum: R = a.iter().zip(b).map(|(x, y)| (*x - *y).norm()).sum();
    sum / r::<R>(a.len() as f64)
}

/// Fixed-point iteration h ← μ·(1 + S h) for ∂̄f = h, ∂f = 1 + S h.
/// Contraction ratio is ess-sup |μ| < 1.
fn solve_qc_seeded<R: Real + FftNum>(
    field: &MuField<R>,
    grid: &GridSpec<R>,
    tol: R,
    seed: Option<Vec<Complex<R>>>,
) -> Result<Mapping<R>> {
    if tol <= R::zero() {
        return Err(Error::Domain("tol must be positive".into()));
    }
    let support = match field.kind() {
        MuKind::Zero => R::zero(),
        _ => field.support_radius().ok_or_else(|| {
            Error::Domain("solve_qc needs a compactly supported field; set a support radius".into())
        })?,
    };
    if grid.half_width < support * r(4.0) {
        return Err(Error::Domain(format!(
            "grid half-width {} must be at least 4x the support radius {}",
            grid.half_width, support
        )));
    }
    let n = grid.n;
    let (mu, q) = sample_mu(field, grid, 4);
    if q >= R::one() - r(1e-9) {
        return Err(Error::Domain(format!(
            "ess-sup |mu| = {q} on the grid; truncate the field before solving"
        )));
    }

    // The affine renormalization below rescales the residual by 1/|f(1)-f(0)|;
    // solve a bit past tol so the declared bound survives it.
    let tol_internal = tol * r(0.25);
    let spectral = Spectral::new(grid);
    let zero = Complex::new(R::zero(), R::zero());
    let one = Complex::new(R::one(), R::zero());
    let mut h = seed.unwrap_or_else(|| vec![zero; n * n]);
    let max_iters = if q > R::zero() {
        let per_decade = -r::<R>(std::f64::consts::LN_10) / q.ln();
        (per_decade.to_f64().unwrap_or(1.0).ceil() as usize * 40).clamp(64, 200_000)
    } else {
        4
    };
    let mut d_f = Vec::new();
    let mut res = R::infinity();
    let mut done = false;
    for _ in 0..max_iters {
        let sh = spectral.beurling(&h);
        d_f = sh.iter().map(|v| one + v).collect::<Vec<_>>();
        let next: Vec<Complex<R>> =
            mu.par_iter().zip(&d_f).map(|(m, p)| *m * *p).collect();
        res = l1_mean_diff(&h, &next);
        if res <= tol_internal {
            // h already satisfies ‖h − μ(1+Sh)‖₁ ≤ tol with the stored ∂f.
            done = true;
            break;
        }
        h = next;
    }
    if !done {
        return Err(Error::Convergence(format!(
            "Neumann iteration stalled at residual {res:e} after {max_iters} iterations \
             (contraction estimate ess-sup |mu| = {q})"
        )));
    }

    let g = spectral.dbar_inverse(&h);
    let mut values: Vec<Complex<R>> = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            values.push(grid.node(ix, iy) + g[iy * n + ix]);
        }
    }
    let mut mapping = Mapping {
        grid: grid.clone(),
        values,
        d_f: Some(d_f),
        dbar_f: Some(h),
        jacobian_positive_fraction: None,
        residual: Some(res),
        truncation_level: field.truncation_level(),
    };

    // Affine post-composition w ↦ (w − f(0))/(f(1) − f(0)) leaves μ unchanged.
    let f0 = mapping.eval(zero)?;
    let f1 = mapping.eval(one)?;
    let a = f1 - f0;
    if a.norm() <= r(1e-12) {
        return Err(Error::Convergence("normalization degenerate: f(1) = f(0)".into()));
    }
    mapping.values.par_iter_mut().for_each(|v| *v = (*v - f0) / a);
    for fld in [mapping.d_f.as_mut(), mapping.dbar_f.as_mut()].into_iter().flatten() {
        fld.par_iter_mut().for_each(|v| *v = *v / a);
    }
    mapping.residual = Some(res / a.norm());
    if mapping.residual.unwrap() > tol {
        return Err(Error::Convergence(format!(
            "residual {:e} exceeds tol after renormalization",
            mapping.residual.unwrap()
        )));
    }
    let mapping = derivatives_and_jacobian(mapping);
    Ok(mapping)
}

pub fn solve_qc<R: Real + FftNum>(
    field: &MuField<R>,
    grid: &GridSpec<R>,
    tol: R,
) -> Result<Mapping<R>> {
    solve_qc_seeded(field, grid, tol, None)
}

/// Fills central-difference derivative fields when absent and records the
/// interior Jacobian positivity fraction. Spectral derivatives from a solve
/// are kept as-is.
pub fn derivatives_and_jacobian<R: Real>(mut m: Mapping<R>) -> Mapping<R> {
    let n = m.grid.n;
    let h = m.grid.spacing();
    if m.d_f.is_none() || m.dbar_f.is_none() {
        let zero = Complex::new(R::zero(), R::zero());
        let mut d_f = vec![zero; n * n];
        let mut dbar_f = vec![zero; n * n];
        let half = Complex::new(r::<R>(0.5) / h, R::zero());
        let i = Complex::new(R::zero(), R::one());
        for iy in 1..n - 1 {
            for ix in 1..n - 1 {
                let at = |i: usize, j: usize| m.values[j * n + i];
                let fx = (at(ix + 1, iy) - at(ix - 1, iy)) * half;
                let fy = (at(ix, iy + 1) - at(ix, iy - 1)) * half;
                let idx = iy * n + ix;
                d_f[idx] = (fx - i * fy) * Complex::new(r(0.5), R::zero());
                dbar_f[idx] = (fx + i * fy) * Complex::new(r(0.5), R::zero());
            }
        }
        m.d_f = Some(d_f);
        m.dbar_f = Some(dbar_f);
    }
    let d_f = m.d_f.as_ref().unwrap();
    let dbar_f = m.dbar_f.as_ref().unwrap();
    let mut positive = 0usize;
    let mut total = 0usize;
    for iy in 1..n - 1 {
        for ix in 1..n - 1 {
            let idx = iy * n + ix;
            total += 1;
            if d_f[idx].norm_sqr() > dbar_f[idx].norm_sqr() {
                positive += 1;
            }
        }
    }
    m.jacobian_positive_fraction = Some(r::<R>(positive as f64) / r::<R>(total as f64));
    m
}

/// Grid L¹-mean of |∂̄f − μ·∂f| with μ sampled at the nodes.
pub fn residual<R: Real>(m: &Mapping<R>, field: &MuField<R>) -> Result<R> {
    let (d_f, dbar_f) = match (&m.d_f, &m.dbar_f) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Domain("residual needs derivative fields; compute them first".into())),
    };
    let n = m.grid.n;
    let mut sum = R::zero();
    for iy in 0..n {
        for ix in 0..n {
            let idx = iy * n + ix;
            let mu = field.eval_mu(m.grid.node(ix, iy));
            sum += (dbar_f[idx] - mu * d_f[idx]).norm();
        }
    }
    Ok(sum / r::<R>((n * n) as f64))
}

/// Truncation ladder with locally-uniform Cauchy diagnostics.
#[derive(Clone, Debug)]
pub struct ApproximationRun<R> {
    pub schedule: Vec<u32>,
    pub mappings: Vec<Mapping<R>>,
    /// Sup-distance between consecutive mappings on the fixed compact sub-grid.
    pub distances: Vec<R>,
    pub converged: bool,
    pub failure: Option<String>,
}

pub fn solve_degenerate<R: Real + FftNum>(
    field: &MuField<R>,
    schedule: &[u32],
    grid: &GridSpec<R>,
    tol: R,
) -> Result<ApproximationRun<R>> {
    if schedule.len() < 3 {
        return Err(Error::Domain("schedule needs at least 3 levels".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("schedule must be strictly increasing".into()));
    }
    // Compact sub-grid: nodes within half the grid radius, thinned to ≤ 33 per axis.
    let n = grid.n;
    let stride = (n / 32).max(1);
    let mut subgrid = Vec::new();
    for iy in (0..n).step_by(stride) {
        for ix in (0..n).step_by(stride) {
            if (grid.node(ix, iy) - grid.center).norm() <= grid.half_width * r(0.5) {
                subgrid.push(iy * n + ix);
            }
        }
    }

    let mut run = ApproximationRun {
        schedule: schedule.to_vec(),
        mappings: Vec::new(),
        distances: Vec::new(),
        converged: false,
        failure: None,
    };
    for &level in schedule {
        let truncated = truncate_mu(field, level)?;
        match solve_qc(&truncated, grid, tol) {
            Ok(m) => {
                if let Some(prev) = run.mappings.last() {
                    let d = subgrid
                        .iter()
                        .map(|&i| (m.values[i] - prev.values[i]).norm())
                        .fold(R::zero(), R::max);
                    run.distances.push(d);
                }
                run.mappings.push(m);
            }
            Err(e) => {
                run.failure = Some(format!("level {level}: {e}"));
                break;
            }
        }
    }
    let l = run.distances.len();
    run.converged = run.failure.is_none()
        && l >= 2
        && run.distances[l - 1] <= run.distances[l - 2]
        && run.distances[l - 1].is_finite();
    Ok(run)
}

/// Capacity-style ring bound: the round-annulus modulus of the image ring,
/// bounded above by U = 2π/log(m2/M1), against ∫ Q·η² dm for the admissible
/// η(t) = 1/(t·log(r2/r1)). U ≤ RHS is the necessary direction only, so a
/// violation is inconclusive rather than fails-like.
pub fn ring_inequality_check<R: Real>(
    m: &Mapping<R>,
    z0: Complex<R>,
    r1: R,
    r2: R,
    q: &ScalarField<R>,
) -> Result<CriterionVerdict<R>> {
    if !(R::zero() < r1 && r1 < r2) {
        return Err(Error::Domain("need 0 < r1 < r2".into()));
    }
    let f0 = m.eval(z0)?;
    let angles = 256usize;
    let two_pi = R::PI() + R::PI();
    let circle_extent = |rad: R, want_max: bool| -> Result<R> {
        let mut best = if want_max { R::neg_infinity() } else { R::infinity() };
        for j in 0..angles {
            let th = two_pi * r::<R>(j as f64) / r::<R>(angles as f64);
            let z = z0 + Complex::from_polar(rad, th);
            let d = (m.eval(z)? - f0).norm();
            best = if want_max { best.max(d) } else { best.min(d) };
        }
        Ok(best)
    };
    let m1 = circle_extent(r1, true)?;
    let m2 = circle_extent(r2, false)?;
    if m2 <= m1 {
        let mut v = CriterionVerdict::inconclusive(
            "image ring not radially separated (min outer <= max inner)",
        );
        v.probe_values = vec![m1, m2];
        return Ok(v);
    }
    let u_bound = two_pi / (m2 / m1).ln();

    let log_ratio = (r2 / r1).ln();
    let circ_mean_q = |rad: R| -> R {
        let samples = 64usize;
        let mut s = R::zero();
        for j in 0..samples {
            let th = two_pi * r::<R>(j as f64) / r::<R>(samples as f64);
            s += q.eval(z0 + Complex::from_polar(rad, th));
        }
        s / r::<R>(samples as f64)
    };
    let rhs = two_pi / (log_ratio * log_ratio)
        * log_trapezoid(|t| circ_mean_q(t) / t, r1, r2, 128);

    let verdict = if u_bound <= rhs * (R::one() + r(1e-2)) + r(1e-12) {
        Verdict::HoldsLike
    } else {
        Verdict::Inconclusive
    };
    Ok(CriterionVerdict {
        verdict,
        probe_values: vec![u_bound, rhs],
        fitted_slope: None,
        notes: vec![format!("capacity bound U = {u_bound:.6e}, weighted area RHS = {rhs:.6e}")],
    })
}

const MAPPING_MAGIC: &[u8; 8] = b"QCMAP01\0";

/// Binary format: magic, n, center, half-width, truncation (-1: none),
/// residual (NaN: none), then n² interleaved (re, im) f64 values.
pub fn save_mapping<R: Real>(m: &Mapping<R>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAPPING_MAGIC)?;
    let f = |x: R| x.to_f64().unwrap_or(f64::NAN);
    w.write_all(&(m.grid.n as u64).to_le_bytes())?;
    w.write_all(&f(m.grid.center.re).to_le_bytes())?;
    w.write_all(&f(m.grid.center.im).to_le_bytes())?;
    w.write_all(&f(m.grid.half_width).to_le_bytes())?;
    let level: i64 = m.truncation_level.map_or(-1, |v| v as i64);
    w.write_all(&level.to_le_bytes())?;
    w.write_all(&m.residual.map_or(f64::NAN, f).to_le_bytes())?;
    for v in &m.values {
        w.write_all(&f(v.re).to_le_bytes())?;
        w.write_all(&f(v.im).to_le_bytes())?;
    }
    Ok(())
}

pub fn load_mapping<R: Real>(path: &Path) -> Result<Mapping<R>> {
    let mut rd = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    rd.read_exact(&mut magic)?;
    if &magic != MAPPING_MAGIC {
        return Err(Error::Format("not a mapping file (bad magic)".into()));
    }
    let mut u64b = [0u8; 8];
    let read_f64 = |rd: &mut BufReader<File>| -> Result<f64> {
        let mut b = [0u8; 8];
        rd.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    rd.read_exact(&mut u64b)?;
    let n = u64::from_le_bytes(u64b) as usize;
    let cre = read_f64(&mut rd)?;
    let cim = read_f64(&mut rd)?;
    let hw = read_f64(&mut rd)?;
    let mut i64b = [0u8; 8];
    rd.read_exact(&mut i64b)?;
    let level = i64::from_le_bytes(i64b);
    let res = read_f64(&mut rd)?;
    let grid = GridSpec::new(Complex::new(r(cre), r(cim)), r(hw), n)?;
    let mut values = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re = read_f64(&mut rd)?;
        let im = read_f64(&mut rd)?;
        values.push(Complex::new(r::<R>(re), r::<R>(im)));
    }
    Ok(Mapping {
        grid,
        values,
        d_f: None,
        dbar_f: None,
        jacobian_positive_fraction: None,
        residual: if res.is_nan() { None } else { Some(r(res)) },
        truncation_level: if level < 0 { None } else { Some(level as u32) },
    })
}

/// CSV rows x,y,re,im for plotting.
pub fn save_mapping_csv<R: Real>(m: &Mapping<R>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,y,re,im")?;
    let n = m.grid.n;
    for iy in 0..n {
        for ix in 0..n {
            let z = m.grid.node(ix, iy);
            let v = m.values[iy * n + ix];
            writeln!(w, "{},{},{},{}", z.re, z.im, v.re, v.im)?;
        }
    }
    Ok(())
}
