use super::FiniteMetricMeasureSpace;
use crate::exec::{self, Strategy};

/// Per-center distance-sorted orderings, grouped by exact distance ties.
///
/// For a center `c` the open balls `B(c, r)` are exactly the prefixes
/// "groups `0..=g`" of this ordering: the member set only changes when `r`
/// passes a distance value. Group 0 is always `{c}` (distance 0).
#[derive(Debug, Clone)]
pub struct BallIndex {
    n: usize,
    order: Vec<u32>,
    group_ends: Vec<u32>,
    group_dist: Vec<f64>,
    group_offsets: Vec<usize>,
}

/// Sorted view of the space from one center.
#[derive(Debug, Clone, Copy)]
pub struct CenterView<'a> {
    pub center: usize,
    order: &'a [u32],
    ends: &'a [u32],
    dists: &'a [f64],
}

impl<'a> CenterView<'a> {
    /// Number of distinct distance values from the center (including 0).
    pub fn group_count(&self) -> usize {
        self.ends.len()
    }

    pub fn group(&self, g: usize) -> &'a [u32] {
        let start = if g == 0 { 0 } else { self.ends[g - 1] as usize };
        &self.order[start..self.ends[g] as usize]
    }

    pub fn group_distance(&self, g: usize) -> f64 {
        self.dists[g]
    }

    pub fn group_distances(&self) -> &'a [f64] {
        self.dists
    }

    /// Points in the ball made of groups `0..=g`.
    pub fn prefix(&self, g: usize) -> &'a [u32] {
        &self.order[..self.ends[g] as usize]
    }

    pub fn order(&self) -> &'a [u32] {
        self.order
    }

    /// The critical radius whose open ball is exactly groups `0..=g`.
    pub fn prefix_radius(&self, g: usize) -> f64 {
        if g + 1 < self.dists.len() {
            self.dists[g + 1]
        } else {
            self.dists[self.dists.len() - 1] + 1.0
        }
    }
}

impl BallIndex {
    pub fn build(space: &FiniteMetricMeasureSpace, strategy: Strategy) -> Self {
        let n = space.n();
        let per_center = exec::map_indices(strategy, n, |c| {
            let row = space.row(c);
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_unstable_by(|&a, &b| row[a as usize].total_cmp(&row[b as usize]).then(a.cmp(&b)));
            let mut ends = Vec::new();
            let mut dists = Vec::new();
            for (k, &u) in order.iter().enumerate() {
                let d = row[u as usize];
                if dists.last() != Some(&d) {
                    if !dists.is_empty() {
                        ends.push(k as u32);
                    }
                    dists.push(d);
                }
            }
            ends.push(n as u32);
            (order, ends, dists)
        });

        let mut index = BallIndex {
            n,
            order: Vec::with_capacity(n * n),
            group_ends: Vec::new(),
            group_dist: Vec::new(),
            group_offsets: Vec::with_capacity(n + 1),
        };
        index.group_offsets.push(0);
        for (order, ends, dists) in per_center {
            index.order.extend_from_slice(&order);
            index.group_ends.extend_from_slice(&ends);
            index.group_dist.extend_from_slice(&dists);
            index.group_offsets.push(index.group_ends.len());
        }
        index
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self, c: usize) -> CenterView<'_> {
        let (lo, hi) = (self.group_offsets[c], self.group_offsets[c + 1]);
        CenterView {
            center: c,
            order: &self.order[c * self.n..(c + 1) * self.n],
            ends: &self.group_ends[lo..hi],
            dists: &self.group_dist[lo..hi],
        }
    }

    /// Total number of (center, prefix) pairs, i.e. balls before deduplication.
    pub fn ball_count(&self) -> usize {
        self.group_ends.len()
    }
}
