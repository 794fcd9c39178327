//! Finite metric measure spaces, open balls and the doubling constant.

mod generate;
mod index;

pub use generate::{generate, MeasureSpec, SpaceKind};
pub use index::{BallIndex, CenterView};

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Strategy};

/// Relative slack allowed in the triangle inequality. Distances built from
/// coordinates go through `sqrt` or a product with a non-dyadic spacing and
/// can miss exact subadditivity by an ulp.
pub const TRIANGLE_RTOL: f64 = 1e-12;

/// A finite set of points with a distance matrix and strictly positive point masses.
#[derive(Debug, Clone)]
pub struct FiniteMetricMeasureSpace {
    n: usize,
    dist: Vec<f64>,
    measure: Vec<f64>,
    labels: Option<Vec<String>>,
    coords: Option<Vec<Vec<f64>>>,
    index: OnceLock<BallIndex>,
}

/// On-disk form of a space.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpaceFile {
    pub n: usize,
    pub distances: Vec<Vec<f64>>,
    pub measure: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Shape,
    TooFewPoints,
    NonFinite,
    ZeroDiagonal,
    Symmetry,
    Positivity,
    Measure,
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricViolation {
    pub axiom: Axiom,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MetricValidation {
    Pass,
    Fail(MetricViolation),
}

impl MetricValidation {
    pub fn is_pass(&self) -> bool {
        matches!(self, MetricValidation::Pass)
    }
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} axiom violated at {:?}", self.axiom, self.witness)
    }
}

fn fail(axiom: Axiom, witness: Vec<usize>) -> MetricValidation {
    MetricValidation::Fail(MetricViolation { axiom, witness })
}

fn validate_cheap(dist: &[Vec<f64>], measure: &[f64]) -> MetricValidation {
    let n = dist.len();
    if measure.len() != n {
        return fail(Axiom::Shape, vec![measure.len()]);
    }
    if let Some(i) = dist.iter().position(|row| row.len() != n) {
        return fail(Axiom::Shape, vec![i]);
    }
    if n < 2 {
        return fail(Axiom::TooFewPoints, vec![n]);
    }
    for (i, row) in dist.iter().enumerate() {
        if let Some(j) = row.iter().position(|d| !d.is_finite()) {
            return fail(Axiom::NonFinite, vec![i, j]);
        }
    }
    if let Some(i) = (0..n).find(|&i| dist[i][i] != 0.0) {
        return fail(Axiom::ZeroDiagonal, vec![i]);
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] != dist[j][i] {
                return fail(Axiom::Symmetry, vec![i, j]);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if !(dist[i][j] > 0.0) {
                return fail(Axiom::Positivity, vec![i, j]);
            }
        }
    }
    if let Some(i) = measure.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
        return fail(Axiom::Measure, vec![i]);
    }
    MetricValidation::Pass
}

/// Checks the metric and measure axioms, reporting the first violation with
/// its witnessing indices. The triangle check is `O(n^3)`.
pub fn validate_metric(dist: &[Vec<f64>], measure: &[f64]) -> MetricValidation {
    let cheap = validate_cheap(dist, measure);
    if !cheap.is_pass() {
        return cheap;
    }
    let n = dist.len();
    for i in 0..n {
        let di = &dist[i];
        for j in 0..n {
            let dij = di[j];
            let dj = &dist[j];
            for k in 0..n {
                let rhs = dij + dj[k];
                if di[k] > rhs * (1.0 + TRIANGLE_RTOL) {
                    return fail(Axiom::Triangle, vec![i, j, k]);
                }
            }
        }
    }
    MetricValidation::Pass
}

impl FiniteMetricMeasureSpace {
    /// Builds a space after full validation of the metric axioms.
    pub fn new(dist: Vec<Vec<f64>>, measure: Vec<f64>) -> Result<Self> {
        match validate_metric(&dist, &measure) {
            MetricValidation::Pass => Ok(Self::from_rows(dist, measure)),
            MetricValidation::Fail(v) => Err(Error::InvalidSpace(v.to_string())),
        }
    }

    /// For generators whose construction already guarantees the triangle
    /// inequality; the remaining axioms are still checked.
    pub(crate) fn new_metric_by_construction(dist: Vec<Vec<f64>>, measure: Vec<f64>) -> Result<Self> {
        match validate_cheap(&dist, &measure) {
            MetricValidation::Pass => Ok(Self::from_rows(dist, measure)),
            MetricValidation::Fail(v) => Err(Error::InvalidSpace(v.to_string())),
        }
    }

    fn from_rows(dist: Vec<Vec<f64>>, measure: Vec<f64>) -> Self {
        let n = dist.len();
        FiniteMetricMeasureSpace {
            n,
            dist: dist.into_iter().flatten().collect(),
            measure,
            labels: None,
            coords: None,
            index: OnceLock::new(),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_coords(mut self, coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: coords.len() });
        }
        self.coords = Some(coords);
        Ok(self)
    }

    /// Same points and distances, new masses. The ball index is reused.
    pub fn with_measure(&self, measure: Vec<f64>) -> Result<Self> {
        if measure.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: measure.len() });
        }
        if let Some(i) = measure.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidSpace(format!("measure[{i}] = {} is not positive", measure[i])));
        }
        let mut out = self.clone();
        out.measure = measure;
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn total_mass(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// `mu(E)` for a list of point indices.
    pub fn mass_of(&self, points: &[usize]) -> f64 {
        points.iter().map(|&i| self.measure[i]).sum()
    }

    /// Lazily built distance-sorted index shared by every ball kernel.
    pub fn index(&self) -> &BallIndex {
        self.index.get_or_init(|| BallIndex::build(self, Strategy::default()))
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        }
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.n, got: len })
        }
    }

    pub fn to_file(&self) -> SpaceFile {
        SpaceFile {
            n: self.n,
            distances: (0..self.n).map(|i| self.row(i).to_vec()).collect(),
            measure: self.measure.clone(),
            labels: self.labels.clone(),
            coords: self.coords.clone(),
        }
    }

    pub fn from_file(file: SpaceFile) -> Result<Self> {
        if file.n != file.distances.len() {
            return Err(Error::LengthMismatch { expected: file.n, got: file.distances.len() });
        }
        let mut space = Self::new(file.distances, file.measure)?;
        if let Some(labels) = file.labels {
            space = space.with_labels(labels)?;
        }
        if let Some(coords) = file.coords {
            space = space.with_coords(coords)?;
        }
        Ok(space)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("space serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }
}

/// An open ball `B(center, radius) = {u : d(center, u) < radius}` with its
/// member set (sorted ascending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
}

impl Ball {
    pub fn new(space: &FiniteMetricMeasureSpace, center: usize, radius: f64) -> Result<Self> {
        space.check_index(center)?;
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius {radius} must be positive")));
        }
        let members = space.row(center).iter().enumerate().filter(|(_, &d)| d < radius).map(|(u, _)| u).collect();
        Ok(Ball { center, radius, members })
    }

    /// `tB = B(center, t * radius)`.
    pub fn dilate(&self, space: &FiniteMetricMeasureSpace, t: f64) -> Result<Self> {
        Ball::new(space, self.center, t * self.radius)
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn mass(&self, space: &FiniteMetricMeasureSpace) -> f64 {
        space.mass_of(&self.members)
    }

    pub(crate) fn from_prefix(view: &CenterView<'_>, g: usize) -> Self {
        let mut members: Vec<usize> = view.prefix(g).iter().map(|&u| u as usize).collect();
        members.sort_unstable();
        Ball { center: view.center, radius: view.prefix_radius(g), members }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub balls: Vec<Ball>,
    pub dedup: bool,
}

impl BallFamily {
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// Finds a ball with exactly this member set (sorted).
    pub fn find_set(&self, members: &[usize]) -> Option<&Ball> {
        self.balls.iter().find(|b| b.members == members)
    }
}

/// Sorted distinct positive distances from `center`, plus the local maximum
/// distance + 1 (the radius of the whole-space ball).
pub fn critical_radii(space: &FiniteMetricMeasureSpace, center: usize) -> Vec<f64> {
    let mut d: Vec<f64> = space.row(center).iter().copied().filter(|&x| x > 0.0).collect();
    d.sort_by(f64::total_cmp);
    d.dedup();
    let max = d.last().copied().unwrap_or(0.0);
    d.push(max + 1.0);
    d
}

/// Every distinct member set realizable as an open ball, one `Ball` each
/// (the first center/radius in scan order that realizes it).
pub fn enumerate_distinct_balls(space: &FiniteMetricMeasureSpace) -> BallFamily {
    let index = space.index();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut balls = Vec::new();
    for c in 0..space.n() {
        let view = index.center(c);
        for g in 0..view.group_count() {
            let ball = Ball::from_prefix(&view, g);
            if seen.insert(ball.members.clone()) {
                balls.push(ball);
            }
        }
    }
    BallFamily { balls, dedup: true }
}

/// Supremum of `m(B(x,2r)) / m(B(x,r))` with the witness center and radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub constant: f64,
    pub center: usize,
    pub radius: f64,
}

/// Doubling constant of the point masses `masses` (e.g. `mu` or `w * mu`).
///
/// For fixed `x` both `m(B(x,r))` and `m(B(x,2r))` are left-continuous step
/// functions of `r`, with jumps at the distance set `D` and at `D/2`
/// respectively. Their ratio is therefore constant on every left-open,
/// right-closed interval between consecutive points of `D ∪ D/2` and the
/// supremum is attained at one of those points.
pub fn doubling_with_masses(space: &FiniteMetricMeasureSpace, masses: &[f64], strategy: Strategy) -> DoublingReport {
    let index = space.index();
    let per_center = exec::map_indices(strategy, space.n(), |c| {
        let view = index.center(c);
        let dists = view.group_distances();
        let mut prefix = Vec::with_capacity(dists.len());
        let mut acc = 0.0;
        for g in 0..view.group_count() {
            acc += view.group(g).iter().map(|&u| masses[u as usize]).sum::<f64>();
            prefix.push(acc);
        }
        // mass of {u : d(c,u) < r}
        let mass_below = |r: f64| {
            let k = dists.partition_point(|&d| d < r);
            if k == 0 {
                0.0
            } else {
                prefix[k - 1]
            }
        };
        let mut best = DoublingReport { constant: 1.0, center: c, radius: dists[1] };
        for &d in &dists[1..] {
            for r in [0.5 * d, d] {
                let ratio = mass_below(2.0 * r) / mass_below(r);
                if ratio > best.constant {
                    best = DoublingReport { constant: ratio, center: c, radius: r };
                }
            }
        }
        best
    });
    per_center
        .into_iter()
        .reduce(|a, b| if b.constant > a.constant { b } else { a })
        .expect("space has at least two points")
}

/// The doubling constant `c_mu` of the space's own measure.
pub fn doubling_constant(space: &FiniteMetricMeasureSpace) -> f64 {
    doubling_with_masses(space, space.measure(), Strategy::default()).constant
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> FiniteMetricMeasureSpace {
        FiniteMetricMeasureSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn validate_two_point_passes() {
        assert!(validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[1.0, 1.0]).is_pass());
    }

    #[test]
    fn validate_reports_asymmetry() {
        let v = validate_metric(&[vec![0.0, 1.0], vec![2.0, 0.0]], &[1.0, 1.0]);
        assert_eq!(v, fail(Axiom::Symmetry, vec![0, 1]));
    }

    #[test]
    fn validate_reports_triangle() {
        let d = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let v = validate_metric(&d, &[1.0; 3]);
        assert_eq!(v, fail(Axiom::Triangle, vec![0, 1, 2]));
    }

    #[test]
    fn validate_rejects_repeated_point_and_bad_mass() {
        let d = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert_eq!(validate_metric(&d, &[1.0, 1.0]), fail(Axiom::Positivity, vec![0, 1]));
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(validate_metric(&d, &[1.0, 0.0]), fail(Axiom::Measure, vec![1]));
        assert_eq!(validate_metric(&[vec![0.0]], &[1.0]), fail(Axiom::TooFewPoints, vec![1]));
    }

    #[test]
    fn critical_radii_examples() {
        assert_eq!(critical_radii(&two_point(), 0), vec![1.0, 2.0]);
        let grid = generate(SpaceKind::Grid1d { n: 3, a: 0.0, b: 2.0 }, &MeasureSpec::Uniform, 0).unwrap();
        assert_eq!(critical_radii(&grid, 0), vec![1.0, 2.0, 3.0]);
        for c in 0..3 {
            for r in critical_radii(&grid, c) {
                assert!(Ball::new(&grid, c, r).unwrap().contains(c));
            }
        }
    }

    #[test]
    fn two_point_has_three_balls() {
        let fam = enumerate_distinct_balls(&two_point());
        let mut sets: Vec<_> = fam.balls.iter().map(|b| b.members.clone()).collect();
        sets.sort();
        assert_eq!(sets, vec![vec![0], vec![0, 1], vec![1]]);
        assert!(fam.dedup);
    }

    #[test]
    fn two_point_doubling_is_two() {
        let rep = doubling_with_masses(&two_point(), &[1.0, 1.0], Strategy::Sequential);
        assert_eq!(rep.constant, 2.0);
        assert_eq!(rep.radius, 1.0);
    }

    #[test]
    fn heavy_point_doubling() {
        let s = FiniteMetricMeasureSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1e6]).unwrap();
        assert_eq!(doubling_constant(&s), 1e6 + 1.0);
    }

    #[test]
    fn dilate_and_ball_membership_are_strict() {
        let s = two_point();
        let b = Ball::new(&s, 0, 1.0).unwrap();
        assert_eq!(b.members, vec![0]);
        assert_eq!(b.dilate(&s, 2.0).unwrap().members, vec![0, 1]);
        assert!(Ball::new(&s, 0, 0.0).is_err());
        assert!(Ball::new(&s, 5, 1.0).is_err());
    }

    #[test]
    fn json_round_trip_preserves_space() {
        let s = two_point().with_labels(vec!["a".into(), "b".into()]).unwrap();
        let back = FiniteMetricMeasureSpace::from_json(&s.to_json()).unwrap();
        assert_eq!(back.to_file(), s.to_file());
    }
}
