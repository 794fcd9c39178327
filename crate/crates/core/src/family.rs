//! Standard test-function families. All generators are deterministic per seed.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_exponent, Error, Result};
use crate::maxop::ScalarField;
use crate::space::{Ball, FiniteMetricMeasureSpace};
use crate::weights::{ap_constant, Weight};

pub fn singleton_indicators(n: usize) -> Vec<ScalarField> {
    (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            ScalarField::new(v).expect("finite")
        })
        .collect()
}

pub fn ball_indicators(n: usize, balls: &[Ball]) -> Vec<ScalarField> {
    balls
        .iter()
        .map(|b| {
            let mut v = vec![0.0; n];
            for &u in &b.members {
                v[u] = 1.0;
            }
            ScalarField::new(v).expect("finite")
        })
        .collect()
}

/// `(eps + w)^{1/(1-p)} chi_B` for each ball.
pub fn witness_functions(w: &Weight, p: f64, eps: f64, balls: &[Ball]) -> Result<Vec<ScalarField>> {
    check_exponent(p)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let e = 1.0 / (1.0 - p);
    balls
        .iter()
        .map(|b| {
            let mut v = vec![0.0; w.len()];
            for &u in &b.members {
                v[u] = (eps + w.values()[u]).powf(e);
            }
            ScalarField::new(v)
        })
        .collect()
}

/// Uniform `[0, 1)` fields; odd-numbered members are sparse (about 70% zeros).
pub fn random_nonnegative(n: usize, count: usize, seed: u64) -> Vec<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let sparse = k % 2 == 1;
            let mut v: Vec<f64> = (0..n)
                .map(|_| {
                    let x: f64 = rng.random();
                    if sparse && rng.random::<f64>() < 0.7 {
                        0.0
                    } else {
                        x
                    }
                })
                .collect();
            if v.iter().all(|&x| x == 0.0) {
                v[rng.random_range(0..n)] = 1.0;
            }
            ScalarField::new(v).expect("finite")
        })
        .collect()
}

/// Random `±1` fields.
pub fn random_signs(n: usize, count: usize, seed: u64) -> Vec<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            ScalarField::new((0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()).expect("finite")
        })
        .collect()
}

/// Gaussian bumps `exp(-|x - c|^2 / s^2)` centered at evenly spaced points,
/// with width `s` a quarter of the coordinate spread. Needs coordinates.
pub fn smooth_bumps(space: &FiniteMetricMeasureSpace, count: usize) -> Result<Vec<ScalarField>> {
    let coords = space.coords().ok_or_else(|| Error::InvalidParameter("bumps need point coordinates".into()))?;
    let n = space.n();
    let spread = (0..n).map(|i| space.dist(0, i)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let width = 0.25 * spread;
    (0..count)
        .map(|k| {
            let c = &coords[(k * n) / count.max(1)];
            ScalarField::new(
                coords
                    .iter()
                    .map(|x| {
                        let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                        (-d2 / (width * width)).exp()
                    })
                    .collect(),
            )
        })
        .collect()
}

/// The `A_p` witness ball plus, for `centers` evenly spaced centers, the
/// balls made of the first `1, 2, 4, 8, ...` distance groups. Deduplicated.
pub fn representative_balls(space: &FiniteMetricMeasureSpace, w: &Weight, p: f64, centers: usize) -> Result<Vec<Ball>> {
    let mut balls = vec![ap_constant(space, w, p)?.witness];
    let index = space.index();
    let n = space.n();
    let centers = centers.clamp(1, n);
    for k in 0..centers {
        let c = (k * n + n / 2) / centers;
        let view = index.center(c);
        let mut g = 0usize;
        while g < view.group_count() {
            let mut members: Vec<usize> = view.prefix(g).iter().map(|&u| u as usize).collect();
            members.sort_unstable();
            balls.push(Ball { center: c, radius: view.prefix_radius(g), members });
            g = 2 * g + 1;
        }
    }
    let mut seen = HashSet::new();
    balls.retain(|b| seen.insert(b.members.clone()));
    Ok(balls)
}

/// Weight witnesses and indicators of [`representative_balls`], then
/// `random` seeded nonnegative fields.
pub fn standard_family(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    random: usize,
    seed: u64,
) -> Result<Vec<ScalarField>> {
    let balls = representative_balls(space, w, p, 4)?;
    let min_w = w.values().iter().copied().fold(f64::INFINITY, f64::min);
    let mut family = witness_functions(w, p, 1e-6 * min_w, &balls)?;
    family.extend(ball_indicators(space.n(), &balls));
    family.extend(random_nonnegative(space.n(), random, seed));
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{generate, MeasureSpec, SpaceKind};

    #[test]
    fn families_are_deterministic_and_nonzero() {
        let a = random_nonnegative(30, 8, 5);
        assert_eq!(a, random_nonnegative(30, 8, 5));
        assert!(a.iter().all(|f| f.is_nonnegative() && !f.is_zero()));
        assert!(random_signs(10, 3, 1).iter().all(|f| f.values().iter().all(|v| v.abs() == 1.0)));
    }

    #[test]
    fn standard_family_shape() {
        let s = generate(SpaceKind::Grid1dMidpoint { n: 64, a: -1.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        let w = Weight::constant(64, 1.0).unwrap();
        let fam = standard_family(&s, &w, 2.0, 16, 1).unwrap();
        assert!(fam.len() > 16);
        assert!(fam.iter().all(|f| f.is_nonnegative() && !f.is_zero()));
        let bumps = smooth_bumps(&s, 3).unwrap();
        assert_eq!(bumps.len(), 3);
    }
}
