//! Probe-based verdicts for integral divergence and decay conditions.
//!
//! A probe never proves anything: it evaluates a condition on a finite
//! ladder of scales and classifies the trend. The three-way outcome is
//! deliberate — borderline trends stay `Inconclusive`.

use serde::{Deserialize, Serialize};

use crate::num::{r, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsLike,
    FailsLike,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::HoldsLike => "holds-like",
            Verdict::FailsLike => "fails-like",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionVerdict<R> {
    pub verdict: Verdict,
    /// Cumulative integral (or ratio) values along the probe ladder.
    pub probe_values: Vec<R>,
    /// Fitted decay exponent p of the rung increments (d_j ~ j^{-p}), when available.
    pub fitted_slope: Option<R>,
    pub notes: Vec<String>,
}

impl<R: Real> CriterionVerdict<R> {
    pub fn inconclusive(note: impl Into<String>) -> Self {
        CriterionVerdict {
            verdict: Verdict::Inconclusive,
            probe_values: Vec::new(),
            fitted_slope: None,
            notes: vec![note.into()],
        }
    }
}

/// Least-squares slope of ln y against ln x; entries with y ≤ 0 are skipped.
pub fn loglog_slope<R: Real>(xs: &[R], ys: &[R]) -> Option<R> {
    let pts: Vec<(R, R)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > R::zero() && **y > R::zero() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = r::<R>(pts.len() as f64);
    let sx: R = pts.iter().map(|p| p.0).sum();
    let sy: R = pts.iter().map(|p| p.1).sum();
    let sxx: R = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: R = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == R::zero() {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Classifies a sequence of positive rung increments d_1, d_2, … of a
/// cumulative integral taken over a dyadic ladder of scales.
///
/// * geometric decay of the increments (mean successive ratio ≤ 0.8) means the
///   integral converges fast — fails-like for a divergence condition;
/// * otherwise d_j ~ j^{-p} is fitted: p ≤ 1.3 diverges (harmonic and slower),
///   p ≥ 1.7 converges, the band in between is inconclusive.
pub(crate) fn classify_increments<R: Real>(increments: &[R]) -> (Verdict, Option<R>, Vec<String>) {
    let mut notes = Vec::new();
    // Converged to quadrature precision: remaining increments are noise.
    let total: R = increments.iter().copied().sum();
    let scale = total.abs().max(r(1e-300));
    let tail_start = increments.len() * 3 / 4;
    if increments[tail_start..].iter().all(|d| d.abs() <= scale * r(1e-4)) {
        notes.push("tail increments negligible: converged".into());
        return (Verdict::FailsLike, None, notes);
    }
    let pos: Vec<R> = increments.iter().copied().filter(|d| *d > R::zero()).collect();
    if pos.len() < 4 {
        notes.push("too few positive increments".into());
        return (Verdict::Inconclusive, None, notes);
    }
    // Skip the first rungs: boundary effects dominate there.
    let skip = pos.len() / 4;
    let tail = &pos[skip..];
    let ratios: Vec<R> = tail.windows(2).map(|w| w[1] / w[0]).collect();
    let mean_ratio: R = ratios.iter().copied().sum::<R>() / r(ratios.len() as f64);
    if mean_ratio <= r(0.8) {
        notes.push(format!("geometric increment decay, mean ratio {:.3e}", mean_ratio));
        return (Verdict::FailsLike, None, notes);
    }
    let idx: Vec<R> = (0..tail.len()).map(|i| r((skip + i + 1) as f64)).collect();
    match loglog_slope(&idx, tail) {
        Some(s) => {
            let p = -s;
            notes.push(format!("increment decay exponent {:.3}", p));
            let v = if p <= r(1.3) {
                Verdict::HoldsLike
            } else if p >= r(1.7) {
                Verdict::FailsLike
            } else {
                Verdict::Inconclusive
            };
            (v, Some(p), notes)
        }
        None => {
            notes.push("slope fit degenerate".into());
            (Verdict::Inconclusive, None, notes)
        }
    }
}

/// Probes whether ∫ over shrinking annuli diverges as the inner scale → 0.
///
/// `segment(a, b)` evaluates the integral over the annulus scale range
/// (a, b), a < b. `ladder` is strictly decreasing toward 0; rung j contributes
/// the increment over (ladder[j+1], ladder[j]). If the first pass is
/// inconclusive the ladder is extended once, continuing its geometric ratio.
pub fn divergence_probe<R: Real>(
    segment: impl Fn(R, R) -> R,
    ladder: &[R],
) -> CriterionVerdict<R> {
    assert!(ladder.len() >= 6, "divergence probe needs at least 6 rungs");
    assert!(
        ladder.windows(2).all(|w| w[1] < w[0] && w[1] > R::zero()),
        "ladder must be strictly decreasing and positive"
    );

    let eval = |rungs: &[R]| -> (Vec<R>, Vec<R>) {
        let mut increments = Vec::with_capacity(rungs.len() - 1);
        let mut cumulative = Vec::with_capacity(rungs.len() - 1);
        let mut total = R::zero();
        for w in rungs.windows(2) {
            let d = segment(w[1], w[0]);
            total += d;
            increments.push(d);
            cumulative.push(total);
        }
        (increments, cumulative)
    };

    let (increments, cumulative) = eval(ladder);
    let (verdict, slope, mut notes) = classify_increments(&increments);
    if verdict != Verdict::Inconclusive {
        return CriterionVerdict { verdict, probe_values: cumulative, fitted_slope: slope, notes };
    }

    // One automatic extension at the same geometric ratio.
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
    let (increments, cumulative) = eval(&extended);
    let (verdict, slope, notes2) = classify_increments(&increments);
    notes.push("ladder auto-extended once".into());
    notes.extend(notes2);
    CriterionVerdict { verdict, probe_values: cumulative, fitted_slope: slope, notes }
}

/// Classifies a sequence of ratio values sampled along a growing ladder.
///
/// The condition under test requires the ratio to stay controlled; a plateau —
/// approached from above or below — or decay is holds-like, sustained growth
/// is fails-like.
pub fn ratio_probe<R: Real>(ratios: &[R]) -> CriterionVerdict<R> {
    let mut notes = Vec::new();
    let finite: Vec<R> = ratios.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 5 {
        return CriterionVerdict::inconclusive("too few finite ratio samples");
    }
    let tail_len = (finite.len() / 3).max(3);
    let tail = &finite[finite.len() - tail_len..];
    let tail_max = tail.iter().copied().fold(R::neg_infinity(), R::max);
    let tail_min = tail.iter().copied().fold(R::infinity(), R::min);
    let head = finite[finite.len() / 3].max(r(1e-300));

    let idx: Vec<R> = (1..=tail.len()).map(|i| r(i as f64)).collect();
    let slope = loglog_slope(&idx, tail);

    let flat = tail_min > R::zero() && tail_max / tail_min.max(r(1e-300)) < r(1.1);
    let growing = tail_max > head * r(1.5)
        && tail.windows(2).filter(|w| w[1] > w[0]).count() * 2 > tail.len();

    let verdict = if flat || tail_max <= head * r(1.05) {
        notes.push(format!("trailing ratios settle near {:.6e}", tail.last().copied().unwrap()));
        Verdict::HoldsLike
    } else if growing {
        notes.push(format!("trailing ratios grow to {:.6e}", tail_max));
        Verdict::FailsLike
    } else {
        notes.push("no clear plateau or growth".into());
        Verdict::Inconclusive
    };
    CriterionVerdict { verdict, probe_values: ratios.to_vec(), fitted_slope: slope, notes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::log_trapezoid;

    fn dyadic(count: usize) -> Vec<f64> {
        (0..count).map(|j| 0.5f64.powi(j as i32 + 1)).collect()
    }

    #[test]
    fn harmonic_tail_diverges() {
        // ∫ dr/r over (ε, 1/2) grows linearly in the rung index.
        let v = divergence_probe(|a, b| log_trapezoid(|r| 1.0 / r, a, b, 64), &dyadic(12));
        assert_eq!(v.verdict, Verdict::HoldsLike);
    }

    #[test]
    fn log_density_diverges_slowly() {
        // ∫ dr/(r log(1/r)) = log log — increments ~ 1/j.
        let v = divergence_probe(
            |a, b| log_trapezoid(|r| 1.0 / (r * (1.0 / r).ln()), a, b, 64),
            &dyadic(12),
        );
        assert_eq!(v.verdict, Verdict::HoldsLike);
    }

    #[test]
    fn log_square_density_converges() {
        // ∫ dr/(r log²(1/r)) converges: increments ~ 1/j².
        let v = divergence_probe(
            |a, b| log_trapezoid(|r| 1.0 / (r * (1.0 / r).ln().powi(2)), a, b, 64),
            &dyadic(12),
        );
        assert_eq!(v.verdict, Verdict::FailsLike);
    }

    #[test]
    fn geometric_decay_converges() {
        // ∫ dr over (ε, 1/2): increments halve every rung.
        let v = divergence_probe(|a, b| b - a, &dyadic(12));
        assert_eq!(v.verdict, Verdict::FailsLike);
    }

    #[test]
    fn ratio_plateau_from_above_holds() {
        let vals: Vec<f64> = (1..=20).map(|j| 3.14 + 1.0 / j as f64).collect();
        assert_eq!(ratio_probe(&vals).verdict, Verdict::HoldsLike);
    }

    #[test]
    fn ratio_growth_fails() {
        let vals: Vec<f64> = (1..=20).map(|j| (j as f64).sqrt()).collect();
        assert_eq!(ratio_probe(&vals).verdict, Verdict::FailsLike);
    }

    #[test]
    fn ratio_decay_holds() {
        let vals: Vec<f64> = (1..=20).map(|j| 1.0 / j as f64).collect();
        assert_eq!(ratio_probe(&vals).verdict, Verdict::HoldsLike);
    }
}
