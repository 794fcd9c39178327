//! Level sets of `Mf`, Whitney-type covers and the truncation `f_t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxop::{maximal, ScalarField};
use crate::space::{doubling_constant, Ball, FiniteMetricMeasureSpace};
use crate::weights::INEQUALITY_RTOL;

/// A subset of the points of a space, stored as sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSet {
    n: usize,
    indices: Vec<usize>,
}

impl PointSet {
    pub fn new(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        if let Some(&i) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        Ok(PointSet { n, indices })
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        PointSet { n: mask.len(), indices: mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect() }
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_everything(&self) -> bool {
        self.indices.len() == self.n
    }

    pub fn universe(&self) -> usize {
        self.n
    }
}

/// `E_t = {x : Mf(x) > t}` from an already computed `Mf`.
pub fn level_set_of(mf: &ScalarField, t: f64) -> PointSet {
    PointSet::from_mask(&mf.values().iter().map(|&v| v > t).collect::<Vec<_>>())
}

/// `E_t = {x : Mf(x) > t}`.
pub fn level_set(space: &FiniteMetricMeasureSpace, f: &ScalarField, t: f64) -> Result<PointSet> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold t = {t} must be positive")));
    }
    Ok(level_set_of(&maximal(space, f)?, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverBall {
    #[serde(flatten)]
    pub ball: Ball,
    /// Chosen in the separated greedy phase rather than the completion sweep.
    pub greedy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCover {
    pub omega: PointSet,
    pub balls: Vec<CoverBall>,
    /// `max_{x in omega} #{i : x in B_i}`.
    pub overlap_max: usize,
}

impl WhitneyCover {
    /// Number of cover balls containing each point of the space.
    pub fn multiplicity(&self) -> Vec<usize> {
        let mut count = vec![0usize; self.omega.universe()];
        for b in &self.balls {
            for &u in &b.ball.members {
                count[u] += 1;
            }
        }
        count
    }
}

/// `dist(x, X \ omega)` for every point (0 off omega).
fn distance_to_complement(space: &FiniteMetricMeasureSpace, inside: &[bool]) -> Vec<f64> {
    (0..space.n())
        .map(|x| {
            if !inside[x] {
                return 0.0;
            }
            space.row(x).iter().zip(inside).filter(|(_, &i)| !i).map(|(&d, _)| d).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Cover of `omega` by balls `B(x_i, r_i)`, `r_i = dist(x_i, X \ omega) / 8`.
///
/// Centers are visited by decreasing `r_x` and kept when `B(x, r_x / 5)` is
/// disjoint from the fifth-radius balls already kept. A completion sweep in
/// index order then adds `B(x, r_x)` for every point still uncovered.
pub fn whitney_cover(space: &FiniteMetricMeasureSpace, omega: &PointSet) -> Result<WhitneyCover> {
    if omega.universe() != space.n() {
        return Err(Error::LengthMismatch { expected: space.n(), got: omega.universe() });
    }
    if omega.is_empty() {
        return Err(Error::InvalidDomain("omega is empty".into()));
    }
    if omega.is_everything() {
        return Err(Error::InvalidDomain("omega is the whole space".into()));
    }
    let inside = omega.mask();
    let radius: Vec<f64> = distance_to_complement(space, &inside).into_iter().map(|d| d / 8.0).collect();

    let mut candidates: Vec<usize> = omega.indices().to_vec();
    candidates.sort_by(|&a, &b| radius[b].total_cmp(&radius[a]).then(a.cmp(&b)));

    let mut balls = Vec::new();
    let mut claimed = vec![false; space.n()];
    for &x in &candidates {
        let fifth = Ball::new(space, x, radius[x] / 5.0)?;
        if fifth.members.iter().all(|&u| !claimed[u]) {
            for &u in &fifth.members {
                claimed[u] = true;
            }
            balls.push(CoverBall { ball: Ball::new(space, x, radius[x])?, greedy: true });
        }
    }

    let mut covered = vec![false; space.n()];
    for b in &balls {
        for &u in &b.ball.members {
            covered[u] = true;
        }
    }
    for &x in omega.indices() {
        if !covered[x] {
            let ball = Ball::new(space, x, radius[x])?;
            for &u in &ball.members {
                covered[u] = true;
            }
            balls.push(CoverBall { ball, greedy: false });
        }
    }

    let mut cover = WhitneyCover { omega: omega.clone(), balls, overlap_max: 0 };
    let mult = cover.multiplicity();
    cover.overlap_max = omega.indices().iter().map(|&x| mult[x]).max().unwrap_or(0);
    Ok(cover)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationResult {
    pub t: f64,
    pub level_set: PointSet,
    pub f_t: ScalarField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<WhitneyCover>,
    /// `Mf` of the input, kept for the bound checks.
    #[serde(skip)]
    pub maximal_f: Option<ScalarField>,
}

/// `f_t = f` off `E_t`; on `E_t`, the largest average of `f` over the cover
/// balls containing the point.
pub fn truncate(space: &FiniteMetricMeasureSpace, f: &ScalarField, t: f64) -> Result<TruncationResult> {
    if !f.is_nonnegative() {
        return Err(Error::InvalidFunction("truncation needs f >= 0".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold t = {t} must be positive")));
    }
    let mf = maximal(space, f)?;
    let level = level_set_of(&mf, t);
    if level.is_everything() {
        return Err(Error::ThresholdTooLow(t));
    }
    if level.is_empty() {
        return Ok(TruncationResult { t, level_set: level, f_t: f.clone(), cover: None, maximal_f: Some(mf) });
    }
    let cover = whitney_cover(space, &level)?;
    let mu = space.measure();
    let mut ft = f.values().to_vec();
    for &x in level.indices() {
        ft[x] = f64::NEG_INFINITY;
    }
    for b in &cover.balls {
        let members = &b.ball.members;
        let avg =
            members.iter().map(|&u| f.values()[u] * mu[u]).sum::<f64>() / members.iter().map(|&u| mu[u]).sum::<f64>();
        for &u in members {
            ft[u] = ft[u].max(avg);
        }
    }
    Ok(TruncationResult { t, level_set: level, f_t: ScalarField::new(ft)?, cover: Some(cover), maximal_f: Some(mf) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `f_t <= t` off `E_t`.
    OffLevel,
    /// `f_t <= c_mu^4 t` on `E_t`.
    OnLevel,
    /// `Mf <= max(1, N) c_mu Mf_t` off `E_t`.
    MaximalDomination,
    /// `int_{B_i} f <= int_{B_i} f_t`.
    BallMass,
    /// `B(x_i, 16 r_i)` meets the complement and has mass `<= c_mu^4 mu(B_i)`.
    EnlargedBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub kind: BoundKind,
    /// Point index, or cover-ball index for the ball checks.
    pub at: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationBoundsReport {
    pub t: f64,
    pub c_mu: f64,
    pub overlap: usize,
    /// `c_mu^4`.
    pub on_level_constant: f64,
    /// `max(1, N) c_mu`.
    pub domination_constant: f64,
    pub max_off_level_ratio: f64,
    pub max_on_level_ratio: f64,
    /// `max_{x notin E_t} Mf(x) / Mf_t(x)`.
    pub max_domination_ratio: f64,
    pub violations: Vec<BoundViolation>,
}

impl TruncationBoundsReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + INEQUALITY_RTOL * rhs.abs()
}

/// Checks both halves of the truncation lemma pointwise, plus the two
/// intermediate facts their proofs rest on.
pub fn check_truncation_bounds(
    space: &FiniteMetricMeasureSpace,
    f: &ScalarField,
    result: &TruncationResult,
) -> Result<TruncationBoundsReport> {
    check_truncation_bounds_with(space, f, result, doubling_constant(space))
}

pub fn check_truncation_bounds_with(
    space: &FiniteMetricMeasureSpace,
    f: &ScalarField,
    result: &TruncationResult,
    c_mu: f64,
) -> Result<TruncationBoundsReport> {
    space.check_len(f.len())?;
    let t = result.t;
    let mf = match &result.maximal_f {
        Some(m) => m.clone(),
        None => maximal(space, f)?,
    };
    let mft = maximal(space, &result.f_t)?;
    let ft = result.f_t.values();
    let overlap = result.cover.as_ref().map_or(0, |c| c.overlap_max);
    let on_level_constant = c_mu.powi(4);
    let domination_constant = overlap.max(1) as f64 * c_mu;

    let mut violations = Vec::new();
    let (mut off_ratio, mut on_ratio, mut dom_ratio) = (0.0f64, 0.0f64, 0.0f64);
    for x in 0..space.n() {
        if result.level_set.contains(x) {
            on_ratio = on_ratio.max(ft[x] / t);
            if exceeds(ft[x], on_level_constant * t) {
                violations.push(BoundViolation {
                    kind: BoundKind::OnLevel,
                    at: x,
                    lhs: ft[x],
                    rhs: on_level_constant * t,
                });
            }
        } else {
            off_ratio = off_ratio.max(ft[x] / t);
            if exceeds(ft[x], t) {
                violations.push(BoundViolation { kind: BoundKind::OffLevel, at: x, lhs: ft[x], rhs: t });
            }
            let (lhs, rhs) = (mf.values()[x], domination_constant * mft.values()[x]);
            if mft.values()[x] > 0.0 {
                dom_ratio = dom_ratio.max(lhs / mft.values()[x]);
            }
            if exceeds(lhs, rhs) {
                violations.push(BoundViolation { kind: BoundKind::MaximalDomination, at: x, lhs, rhs });
            }
        }
    }

    if let Some(cover) = &result.cover {
        let mu = space.measure();
        let inside = result.level_set.mask();
        for (i, b) in cover.balls.iter().enumerate() {
            let members = &b.ball.members;
            let f_mass: f64 = members.iter().map(|&u| f.values()[u] * mu[u]).sum();
            let ft_mass: f64 = members.iter().map(|&u| ft[u] * mu[u]).sum();
            if exceeds(f_mass, ft_mass) {
                violations.push(BoundViolation { kind: BoundKind::BallMass, at: i, lhs: f_mass, rhs: ft_mass });
            }
            let big = b.ball.dilate(space, 16.0)?;
            let meets_complement = big.members.iter().any(|&u| !inside[u]);
            let (lhs, rhs) = (big.mass(space), on_level_constant * b.ball.mass(space));
            if !meets_complement || exceeds(lhs, rhs) {
                violations.push(BoundViolation { kind: BoundKind::EnlargedBall, at: i, lhs, rhs });
            }
        }
    }

    Ok(TruncationBoundsReport {
        t,
        c_mu,
        overlap,
        on_level_constant,
        domination_constant,
        max_off_level_ratio: off_ratio,
        max_on_level_ratio: on_ratio,
        max_domination_ratio: dom_ratio,
        violations,
    })
}

/// Thresholds at the given quantiles of the values of `Mf`. Each threshold is
/// one of the values, hence at least the minimum, so `E_t` is never all of
/// `X`. Non-positive thresholds are dropped and duplicates merged.
pub fn quantile_thresholds(mf: &ScalarField, quantiles: &[f64]) -> Vec<f64> {
    let mut sorted = mf.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = sorted.len().saturating_sub(1);
    let mut out: Vec<f64> = quantiles
        .iter()
        .map(|q| sorted[((q.clamp(0.0, 1.0) * last as f64).floor() as usize).min(last)])
        .filter(|&t| t > 0.0)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
