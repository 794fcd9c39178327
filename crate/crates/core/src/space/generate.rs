use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FiniteMetricMeasureSpace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    /// `n` equispaced points on `[a, b]`, endpoints included.
    Grid1d { n: usize, a: f64, b: f64 },
    /// Midpoints of `n` equal cells of `[a, b]`; never hits the cell edges.
    Grid1dMidpoint { n: usize, a: f64, b: f64 },
    /// Integer lattice `nx x ny` with the Euclidean metric.
    Grid2d { nx: usize, ny: usize },
    /// Uniform random points in `[0, 1]^dim`.
    RandomEuclidean { n: usize, dim: usize },
    /// Leaves of a complete tree; distance is the height of the lowest common ancestor.
    Ultrametric { branching: usize, depth: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    #[default]
    Uniform,
    /// Independent uniform masses in `[lo, hi]`.
    Random {
        lo: f64,
        hi: f64,
    },
    Given {
        values: Vec<f64>,
    },
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn uniform_grid(n: usize, start: f64, h: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    // |i - j| * h keeps distance ties exact.
    let dist = (0..n).map(|i| (0..n).map(|j| i.abs_diff(j) as f64 * h).collect()).collect();
    let coords = (0..n).map(|i| vec![start + i as f64 * h]).collect();
    (dist, coords)
}

fn euclidean(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| points.iter().map(|q| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()).collect())
        .collect()
}

/// Builds a space of the given kind. Output is a pure function of
/// `(kind, measure, seed)`; the seed only matters for random kinds/measures.
pub fn generate(kind: SpaceKind, measure: &MeasureSpec, seed: u64) -> Result<FiniteMetricMeasureSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dist, coords) = match kind {
        SpaceKind::Grid1d { n, a, b } => {
            if n < 2 || !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(invalid(format!("grid1d needs n >= 2 and a < b, got n={n}, [{a}, {b}]")));
            }
            let (d, c) = uniform_grid(n, a, (b - a) / (n - 1) as f64);
            (d, Some(c))
        }
        SpaceKind::Grid1dMidpoint { n, a, b } => {
            if n < 2 || !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(invalid(format!("grid1d-midpoint needs n >= 2 and a < b, got n={n}, [{a}, {b}]")));
            }
            let h = (b - a) / n as f64;
            let (d, c) = uniform_grid(n, a + 0.5 * h, h);
            (d, Some(c))
        }
        SpaceKind::Grid2d { nx, ny } => {
            if nx == 0 || ny == 0 || nx * ny < 2 {
                return Err(invalid(format!("grid2d needs at least two points, got {nx}x{ny}")));
            }
            let pts: Vec<Vec<f64>> = (0..ny).flat_map(|j| (0..nx).map(move |i| vec![i as f64, j as f64])).collect();
            (euclidean(&pts), Some(pts))
        }
        SpaceKind::RandomEuclidean { n, dim } => {
            if n < 2 || dim == 0 {
                return Err(invalid(format!("random_euclidean needs n >= 2 and dim >= 1, got n={n}, dim={dim}")));
            }
            let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
            (euclidean(&pts), Some(pts))
        }
        SpaceKind::Ultrametric { branching, depth } => {
            if branching < 2 || depth == 0 {
                return Err(invalid(format!(
                    "ultrametric needs branching >= 2 and depth >= 1, got {branching}, {depth}"
                )));
            }
            let n = branching
                .checked_pow(depth)
                .filter(|&n| n <= 1 << 16)
                .ok_or_else(|| invalid("ultrametric tree too large"))?;
            let height = |mut x: usize, mut y: usize| {
                let mut h = 0u32;
                while x != y {
                    x /= branching;
                    y /= branching;
                    h += 1;
                }
                h as f64
            };
            let d = (0..n).map(|i| (0..n).map(|j| height(i, j)).collect()).collect();
            (d, None)
        }
    };

    let n = dist.len();
    let masses = match measure {
        MeasureSpec::Uniform => vec![1.0; n],
        MeasureSpec::Random { lo, hi } => {
            if !(*lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(invalid(format!("random measure needs 0 < lo <= hi, got [{lo}, {hi}]")));
            }
            (0..n).map(|_| rng.random_range(*lo..=*hi)).collect()
        }
        MeasureSpec::Given { values } => values.clone(),
    };

    let space = FiniteMetricMeasureSpace::new_metric_by_construction(dist, masses)?;
    match coords {
        Some(c) => space.with_coords(c),
        None => Ok(space),
    }
}
