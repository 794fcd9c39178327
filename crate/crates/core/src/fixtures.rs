//! The standard corpus: every generated space used by the equivalence and
//! verification suites, all with at most 128 points.

use crate::error::Result;
use crate::space::{generate, FiniteMetricMeasureSpace, MeasureSpec, SpaceKind};

/// A named corpus entry.
pub struct Fixture {
    pub name: String,
    pub space: FiniteMetricMeasureSpace,
}

/// The two-point space with unit distance and unit masses.
pub fn two_point() -> FiniteMetricMeasureSpace {
    FiniteMetricMeasureSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0])
        .expect("two-point space is valid")
}

fn corpus_kinds() -> Vec<(&'static str, SpaceKind)> {
    vec![
        ("grid1d-3", SpaceKind::Grid1d { n: 3, a: 0.0, b: 1.0 }),
        ("grid1d-16", SpaceKind::Grid1d { n: 16, a: 0.0, b: 1.0 }),
        ("grid1d-64", SpaceKind::Grid1d { n: 64, a: -1.0, b: 1.0 }),
        ("grid1d-midpoint-128", SpaceKind::Grid1dMidpoint { n: 128, a: -1.0, b: 1.0 }),
        ("grid2d-8x8", SpaceKind::Grid2d { nx: 8, ny: 8 }),
        ("grid2d-11x11", SpaceKind::Grid2d { nx: 11, ny: 11 }),
        ("euclidean-16", SpaceKind::RandomEuclidean { n: 16, dim: 2 }),
        ("euclidean-64", SpaceKind::RandomEuclidean { n: 64, dim: 3 }),
        ("euclidean-128", SpaceKind::RandomEuclidean { n: 128, dim: 2 }),
        ("ultrametric-2^5", SpaceKind::Ultrametric { branching: 2, depth: 5 }),
        ("ultrametric-3^4", SpaceKind::Ultrametric { branching: 3, depth: 4 }),
    ]
}

/// Every corpus space, first with uniform and then with random masses.
pub fn standard_corpus() -> Result<Vec<Fixture>> {
    let mut out = vec![Fixture { name: "two-point".into(), space: two_point() }];
    let random = MeasureSpec::Random { lo: 0.1, hi: 10.0 };
    for (seed, (name, kind)) in corpus_kinds().into_iter().enumerate() {
        let seed = seed as u64;
        out.push(Fixture { name: name.into(), space: generate(kind.clone(), &MeasureSpec::Uniform, seed)? });
        out.push(Fixture { name: format!("{name}-random-measure"), space: generate(kind, &random, 100 + seed)? });
    }
    Ok(out)
}

/// `count` seeded random spaces with `8 <= n <= max_n`, cycling through
/// Euclidean dimensions 1 to 3 and random masses.
pub fn random_corpus(count: usize, max_n: usize, seed: u64) -> Result<Vec<Fixture>> {
    let span = max_n.max(8) - 7;
    (0..count)
        .map(|k| {
            let s = seed.wrapping_mul(1_000_003).wrapping_add(k as u64);
            let n = 8 + (s as usize * 7919) % span;
            let dim = 1 + k % 3;
            let space = generate(SpaceKind::RandomEuclidean { n, dim }, &MeasureSpec::Random { lo: 0.2, hi: 5.0 }, s)?;
            Ok(Fixture { name: format!("random-{k}-n{n}-d{dim}"), space })
        })
        .collect()
}
