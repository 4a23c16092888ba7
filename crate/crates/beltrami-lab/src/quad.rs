//! Shared quadrature helpers (radial/log-radial trapezoid rules).

use crate::num::{r, Real};

/// Trapezoidal integral of `f` over [a, b] in the variable u = ln r, i.e.
/// ∫_a^b f(r) dr with log-spaced nodes. Requires 0 < a ≤ b.
pub fn log_trapezoid<R: Real>(f: impl Fn(R) -> R, a: R, b: R, nodes_per_decade: usize) -> R {
    if b <= a {
        return R::zero();
    }
    let ua = a.ln();
    let ub = b.ln();
    let decades = ((ub - ua) / r::<R>(std::f64::consts::LN_10)).to_f64().unwrap_or(1.0);
    let n = ((decades.abs() * nodes_per_decade as f64).ceil() as usize).max(32);
    let du = (ub - ua) / r::<R>(n as f64);
    let mut sum = R::zero();
    for i in 0..=n {
        let u = ua + du * r::<R>(i as f64);
        let rr = u.exp();
        // ∫ f(r) dr = ∫ f(e^u)·e^u du
        let w = if i == 0 || i == n { r::<R>(0.5) } else { R::one() };
        sum += f(rr) * rr * w;
    }
    sum * du
}

/// Trapezoidal integral of `f` over [a, b] with linearly spaced nodes.
pub fn lin_trapezoid<R: Real>(f: impl Fn(R) -> R, a: R, b: R, n: usize) -> R {
    if b <= a {
        return R::zero();
    }
    let n = n.max(2);
    let h = (b - a) / r::<R>(n as f64);
    let mut sum = (f(a) + f(b)) * r::<R>(0.5);
    for i in 1..n {
        sum += f(a + h * r::<R>(i as f64));
    }
    sum * h
}

/// Cumulative integrals along a monotone ladder of cutoffs.
///
/// Given ladder points p₀, p₁, … (strictly monotone, either direction),
/// returns F[i] = ∫ between p₀ and p_i of `f` dr, accumulated segment by
/// segment with log-spaced nodes. All points must be positive.
pub fn ladder_integrals<R: Real>(
    f: impl Fn(R) -> R,
    ladder: &[R],
    nodes_per_decade: usize,
) -> Vec<R> {
    let mut out = Vec::with_capacity(ladder.len());
    let mut acc = R::zero();
    out.push(R::zero());
    for w in ladder.windows(2) {
        let (a, b) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
        acc += log_trapezoid(&f, a, b, nodes_per_decade);
        out.push(acc);
    }
    out
}

/// A geometric ladder of `count` points starting at `start`, multiplied by
/// `factor` each rung (factor < 1 descends, factor > 1 ascends).
pub fn geometric_ladder<R: Real>(start: R, factor: R, count: usize) -> Vec<R> {
    let mut v = Vec::with_capacity(count);
    let mut x = start;
    for _ in 0..count {
        v.push(x);
        x = x * factor;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_trapezoid_matches_closed_form() {
        // ∫_ε^1 dr/r = ln(1/ε)
        let v = log_trapezoid(|rr: f64| 1.0 / rr, 1e-6, 1.0, 64);
        assert!((v - (1e-6f64).recip().ln()).abs() < 1e-10);
    }

    #[test]
    fn ladder_integrals_accumulate() {
        let ladder = geometric_ladder(1.0f64, 0.5, 10);
        let f = |rr: f64| 1.0 / rr;
        let vals = ladder_integrals(f, &ladder, 64);
        for (i, v) in vals.iter().enumerate() {
            let expect = (1.0f64 / ladder[i]).ln();
            assert!((v - expect).abs() < 1e-9, "rung {i}: {v} vs {expect}");
        }
    }

    #[test]
    fn lin_trapezoid_polynomial() {
        let v = lin_trapezoid(|x: f64| x, 0.0, 2.0, 64);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
