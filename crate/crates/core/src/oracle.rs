//! Brute-force reference implementations.
//!
//! Nothing here uses the sorted ball index, prefix sums or log-space
//! accumulation: every ball is rebuilt by scanning all points and every
//! average is a direct sum. Single-threaded.

use crate::error::{check_exponent, Result};
use crate::maxop::ScalarField;
use crate::space::{critical_radii, FiniteMetricMeasureSpace};
use crate::weights::Weight;

fn members(space: &FiniteMetricMeasureSpace, center: usize, radius: f64) -> Vec<usize> {
    (0..space.n()).filter(|&u| space.dist(center, u) < radius).collect()
}

/// `Mf` by a triple loop over centers, critical radii and points.
pub fn maximal_oracle(space: &FiniteMetricMeasureSpace, f: &ScalarField) -> Result<ScalarField> {
    space.check_len(f.len())?;
    let mu = space.measure();
    let mut out = vec![0.0f64; space.n()];
    for c in 0..space.n() {
        for r in critical_radii(space, c) {
            let ball = members(space, c, r);
            let num: f64 = ball.iter().map(|&u| f.values()[u].abs() * mu[u]).sum();
            let den: f64 = ball.iter().map(|&u| mu[u]).sum();
            let avg = num / den;
            for &u in &ball {
                out[u] = out[u].max(avg);
            }
        }
    }
    ScalarField::new(out)
}

/// `[w]_{A_p}` over every (center, critical radius) pair, without deduplication.
pub fn ap_constant_oracle(space: &FiniteMetricMeasureSpace, w: &Weight, p: f64) -> Result<f64> {
    check_exponent(p)?;
    space.check_len(w.len())?;
    let mu = space.measure();
    let wv = w.values();
    let mut best = 0.0f64;
    for c in 0..space.n() {
        for r in critical_radii(space, c) {
            let ball = members(space, c, r);
            let mass: f64 = ball.iter().map(|&u| mu[u]).sum();
            let avg_w: f64 = ball.iter().map(|&u| wv[u] * mu[u]).sum::<f64>() / mass;
            let avg_s: f64 = ball.iter().map(|&u| wv[u].powf(1.0 / (1.0 - p)) * mu[u]).sum::<f64>() / mass;
            best = best.max(avg_w * avg_s.powf(p - 1.0));
        }
    }
    Ok(best)
}

/// Sampled doubling constant: `samples` equispaced radii in `(0, max d(x, .)]`
/// per center, plus the breakpoints `D ∪ D/2` when `include_breakpoints`.
/// Never exceeds the exact value and equals it when breakpoints are
/// included, up to summation-order rounding.
pub fn doubling_oracle(space: &FiniteMetricMeasureSpace, samples: usize, include_breakpoints: bool) -> f64 {
    let mu = space.measure();
    let mass_below =
        |c: usize, r: f64| -> f64 { (0..space.n()).filter(|&u| space.dist(c, u) < r).map(|u| mu[u]).sum() };
    let mut best = 1.0f64;
    for c in 0..space.n() {
        let far = space.row(c).iter().copied().fold(0.0, f64::max);
        let mut radii: Vec<f64> = (1..=samples).map(|j| far * j as f64 / samples as f64).collect();
        if include_breakpoints {
            for d in space.row(c).iter().copied().filter(|&d| d > 0.0) {
                radii.push(d);
                radii.push(0.5 * d);
            }
        }
        for r in radii {
            best = best.max(mass_below(c, 2.0 * r) / mass_below(c, r));
        }
    }
    best
}
