//! Weights, the Muckenhoupt `A_p` functional and its elementary consequences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::exec::{self, Strategy};
use crate::maxop::{maximal, ScalarField};
use crate::space::{doubling_with_masses, enumerate_distinct_balls, Ball, FiniteMetricMeasureSpace};

/// Relative tolerance for inequalities that hold exactly in real arithmetic.
pub const INEQUALITY_RTOL: f64 = 1e-9;

/// A strictly positive function on the points of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    values: Vec<f64>,
}

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidWeight(format!("w[{i}] = {} is not a positive finite number", values[i])));
        }
        Ok(Weight { values })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Weight::new(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Point masses `w[i] * mu[i]` of the measure `w dmu`.
    pub fn masses(&self, space: &FiniteMetricMeasureSpace) -> Vec<f64> {
        self.values.iter().zip(space.measure()).map(|(w, m)| w * m).collect()
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Weight::new(self.values.iter().map(|v| v * lambda).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weight serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            values: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        Weight::new(raw.values)
    }
}

fn check_weight(space: &FiniteMetricMeasureSpace, w: &Weight) -> Result<()> {
    space.check_len(w.len())
}

/// `w(E) = sum_{i in E} w[i] mu[i]`.
pub fn weight_measure(space: &FiniteMetricMeasureSpace, w: &Weight, set: &[usize]) -> Result<f64> {
    check_weight(space, w)?;
    set.iter().try_fold(0.0, |acc, &i| {
        space.check_index(i)?;
        Ok(acc + w.values[i] * space.measure()[i])
    })
}

/// `sigma = w^{1 - p'} = w^{1/(1-p)}`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    check_exponent(p)?;
    let e = 1.0 / (1.0 - p);
    Weight::new(w.values.iter().map(|v| v.powf(e)).collect())
}

/// `p' = p / (p - 1)`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Running `sum mu_i * exp(v_i)` kept as `(shift, scaled)` with
/// `sum = exp(shift) * scaled`, so very negative or very positive `v_i`
/// (`p` close to 1 gives exponents like `-1e3`) neither under- nor overflow.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    shift: f64,
    scaled: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum { shift: f64::NEG_INFINITY, scaled: 0.0 }
    }

    #[inline]
    fn add(&mut self, log_value: f64, mass: f64) {
        if log_value > self.shift {
            self.scaled = self.scaled * (self.shift - log_value).exp() + mass;
            self.shift = log_value;
        } else {
            self.scaled += mass * (log_value - self.shift).exp();
        }
    }

    /// `ln(sum / total_mass)`.
    fn log_average(&self, total_mass: f64) -> f64 {
        self.shift + (self.scaled / total_mass).ln()
    }
}

/// Best (center, prefix group) of `avg_B(a) * avg_B(b)^power`, in log form.
#[derive(Debug, Clone, Copy)]
struct ScanBest {
    log_value: f64,
    center: usize,
    group: usize,
}

/// Maximizes `avg_B(a) avg_B(b)^power` over all open balls, with `a`, `b`
/// given by their logarithms. The functional depends only on the member set,
/// so the scan over (center, prefix) pairs reaches every distinct ball.
fn functional_scan(
    space: &FiniteMetricMeasureSpace,
    log_a: &[f64],
    log_b: &[f64],
    power: f64,
    strategy: Strategy,
) -> ScanBest {
    let index = space.index();
    let mu = space.measure();
    let per_center = exec::map_indices(strategy, space.n(), |c| {
        let view = index.center(c);
        let (mut sa, mut sb, mut mass) = (LogSum::new(), LogSum::new(), 0.0);
        let mut best = ScanBest { log_value: f64::NEG_INFINITY, center: c, group: 0 };
        for g in 0..view.group_count() {
            for &u in view.group(g) {
                let u = u as usize;
                sa.add(log_a[u], mu[u]);
                sb.add(log_b[u], mu[u]);
                mass += mu[u];
            }
            let v = sa.log_average(mass) + power * sb.log_average(mass);
            if v > best.log_value {
                best = ScanBest { log_value: v, center: c, group: g };
            }
        }
        best
    });
    per_center
        .into_iter()
        .reduce(|a, b| if b.log_value > a.log_value { b } else { a })
        .expect("space has at least two points")
}

/// Value of the `A_p` functional on one ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallValue {
    pub ball: Ball,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub p: f64,
    pub constant: f64,
    pub witness: Ball,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_ball: Option<Vec<BallValue>>,
}

/// `avg_B(w) * (avg_B(w^{1/(1-p)}))^{p-1}` on the member set `members`.
pub fn ap_functional(space: &FiniteMetricMeasureSpace, w: &Weight, p: f64, members: &[usize]) -> Result<f64> {
    check_exponent(p)?;
    check_weight(space, w)?;
    let (mut sa, mut sb, mut mass) = (LogSum::new(), LogSum::new(), 0.0);
    for &u in members {
        space.check_index(u)?;
        let lw = w.values[u].ln();
        let m = space.measure()[u];
        sa.add(lw, m);
        sb.add(lw / (1.0 - p), m);
        mass += m;
    }
    Ok((sa.log_average(mass) + (p - 1.0) * sb.log_average(mass)).exp())
}

/// `[w]_{A_p}` with its witness ball.
pub fn ap_constant(space: &FiniteMetricMeasureSpace, w: &Weight, p: f64) -> Result<ApReport> {
    ap_constant_with(space, w, p, false, Strategy::default())
}

/// `[w]_{A_p}`; `per_ball` also lists the functional on every distinct ball
/// (materializes the deduplicated family, so keep `n` small).
pub fn ap_constant_with(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    per_ball: bool,
    strategy: Strategy,
) -> Result<ApReport> {
    check_exponent(p)?;
    check_weight(space, w)?;
    let log_w: Vec<f64> = w.values.iter().map(|v| v.ln()).collect();
    let log_s: Vec<f64> = log_w.iter().map(|v| v / (1.0 - p)).collect();
    let best = functional_scan(space, &log_w, &log_s, p - 1.0, strategy);
    let witness = Ball::from_prefix(&space.index().center(best.center), best.group);
    let per_ball = if per_ball {
        let family = enumerate_distinct_balls(space);
        Some(
            family
                .balls
                .into_iter()
                .map(|ball| {
                    let value = ap_functional(space, w, p, &ball.members)?;
                    Ok(BallValue { ball, value })
                })
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(ApReport { p, constant: best.log_value.exp(), witness, per_ball })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub ap_constant: f64,
    pub holds: bool,
}

/// `avg_B f <= [w]_{A_p}^{1/p} (w(B)^{-1} int_B f^p w dmu)^{1/p}` for `f >= 0` on `B`.
pub fn weighted_holder_check(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    ball: &Ball,
    f: &ScalarField,
) -> Result<HolderReport> {
    let ap = ap_constant(space, w, p)?.constant;
    weighted_holder_check_with_constant(space, w, p, ap, ball, f)
}

/// As [`weighted_holder_check`] with a precomputed `[w]_{A_p}`.
pub fn weighted_holder_check_with_constant(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    ap: f64,
    ball: &Ball,
    f: &ScalarField,
) -> Result<HolderReport> {
    check_exponent(p)?;
    check_weight(space, w)?;
    space.check_len(f.len())?;
    let mu = space.measure();
    let (mut f_mass, mut mass, mut fp_w, mut w_mass) = (0.0, 0.0, 0.0, 0.0);
    for &u in &ball.members {
        let fu = f.values()[u];
        if fu < 0.0 {
            return Err(Error::InvalidFunction(format!("f[{u}] = {fu} is negative on the ball")));
        }
        f_mass += fu * mu[u];
        mass += mu[u];
        fp_w += fu.powf(p) * w.values[u] * mu[u];
        w_mass += w.values[u] * mu[u];
    }
    let lhs = f_mass / mass;
    let rhs = ap.powf(1.0 / p) * (fp_w / w_mass).powf(1.0 / p);
    let slack = rhs - lhs;
    Ok(HolderReport { lhs, rhs, slack, ap_constant: ap, holds: slack >= -INEQUALITY_RTOL * rhs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDoublingReport {
    pub c_w_measured: f64,
    pub c_mu: f64,
    pub ap_constant: f64,
    /// `c_mu^p [w]_{A_p}`.
    pub bound: f64,
    pub center: usize,
    pub radius: f64,
    pub holds: bool,
}

/// Measures the doubling constant of `w dmu` and compares it with `c_mu^p [w]_{A_p}`.
pub fn weight_doubling_check(space: &FiniteMetricMeasureSpace, w: &Weight, p: f64) -> Result<WeightDoublingReport> {
    check_exponent(p)?;
    check_weight(space, w)?;
    let strategy = Strategy::default();
    let cw = doubling_with_masses(space, &w.masses(space), strategy);
    let c_mu = doubling_with_masses(space, space.measure(), strategy).constant;
    let ap = ap_constant(space, w, p)?.constant;
    let bound = c_mu.powf(p) * ap;
    Ok(WeightDoublingReport {
        c_w_measured: cw.constant,
        c_mu,
        ap_constant: ap,
        bound,
        center: cw.center,
        radius: cw.radius,
        holds: cw.constant <= bound * (1.0 + INEQUALITY_RTOL),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessLevel {
    pub eps: f64,
    /// `max_B avg_B(w) (avg_B((eps + w)^{1/(1-p)}))^{p-1}`.
    pub lower_bound: f64,
    /// `max_B int (M f_B)^p w / int f_B^p w` for `f_B = (eps + w)^{1/(1-p)} chi_B`.
    pub measured_ratio: f64,
    /// Every ball's own lower bound is below that ball's measured ratio.
    pub per_ball_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub p: f64,
    pub ap_constant: f64,
    pub levels: Vec<WitnessLevel>,
    /// `lower_bound` is nondecreasing as `eps` decreases.
    pub monotone: bool,
    /// `lower_bound <= [w]_{A_p}` for every level.
    pub below_ap: bool,
}

impl WitnessReport {
    pub fn holds(&self) -> bool {
        self.monotone && self.below_ap && self.levels.iter().all(|l| l.per_ball_holds)
    }
}

/// Tests the maximal-function lower bound for `[w]_{A_p}` on the witness
/// family `(eps + w)^{1/(1-p)} chi_B`. Costs one maximal function per
/// distinct ball and level; intended for small spaces.
pub fn ap_lower_bound_witness(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    eps_list: &[f64],
) -> Result<WitnessReport> {
    check_exponent(p)?;
    check_weight(space, w)?;
    if let Some(&e) = eps_list.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(format!("eps = {e} must be positive")));
    }
    let ap = ap_constant(space, w, p)?.constant;
    let family = enumerate_distinct_balls(space);
    let mu = space.measure();
    let wv = &w.values;
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));

    let levels = eps_sorted
        .iter()
        .map(|&eps| {
            let g: Vec<f64> = wv.iter().map(|&v| (eps + v).powf(1.0 / (1.0 - p))).collect();
            let per_ball = exec::map_slice(Strategy::default(), &family.balls, |ball| {
                let mut fv = vec![0.0; space.n()];
                let (mut w_mass, mut g_mass, mut mass) = (0.0, 0.0, 0.0);
                for &u in &ball.members {
                    fv[u] = g[u];
                    w_mass += wv[u] * mu[u];
                    g_mass += g[u] * mu[u];
                    mass += mu[u];
                }
                let lower = (w_mass / mass) * (g_mass / mass).powf(p - 1.0);
                let f = ScalarField::new(fv).expect("witness is finite");
                let mf = maximal(space, &f).expect("lengths match");
                let num: f64 = (0..space.n()).map(|i| mf.values()[i].powf(p) * wv[i] * mu[i]).sum();
                let den: f64 = (0..space.n()).map(|i| f.values()[i].powf(p) * wv[i] * mu[i]).sum();
                (lower, num / den)
            });
            let lower_bound = per_ball.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
            let measured_ratio = per_ball.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
            let per_ball_holds = per_ball.iter().all(|&(l, r)| l <= r * (1.0 + INEQUALITY_RTOL));
            WitnessLevel { eps, lower_bound, measured_ratio, per_ball_holds }
        })
        .collect::<Vec<_>>();

    let monotone = levels.windows(2).all(|pair| pair[1].lower_bound >= pair[0].lower_bound * (1.0 - 1e-12));
    let below_ap = levels.iter().all(|l| l.lower_bound <= ap * (1.0 + INEQUALITY_RTOL));
    Ok(WitnessReport { p, ap_constant: ap, levels, monotone, below_ap })
}

/// `w[i] = |x_i|^alpha` on a space with one-dimensional coordinates.
pub fn power_weight(space: &FiniteMetricMeasureSpace, alpha: f64) -> Result<Weight> {
    let coords =
        space.coords().ok_or_else(|| Error::InvalidParameter("power weight needs point coordinates".into()))?;
    let values = coords
        .iter()
        .enumerate()
        .map(|(i, c)| match c.as_slice() {
            [x] if *x != 0.0 => Ok(x.abs().powf(alpha)),
            [_] => Err(Error::InvalidParameter(format!("point {i} sits at the origin"))),
            _ => Err(Error::InvalidParameter(format!("point {i} is not one-dimensional"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Weight::new(values)
}

/// `exp(N(0, sigma^2))` weights, deterministic per seed.
pub fn lognormal_weight(n: usize, sigma: f64, seed: u64) -> Result<Weight> {
    let dist =
        LogNormal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(format!("log-normal sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Weight::new((0..n).map(|_| dist.sample(&mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{generate, MeasureSpec, SpaceKind};

    fn two_point() -> FiniteMetricMeasureSpace {
        FiniteMetricMeasureSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).unwrap()
    }

    fn w14() -> Weight {
        Weight::new(vec![1.0, 4.0]).unwrap()
    }

    #[test]
    fn weight_measure_examples() {
        let s = two_point();
        assert_eq!(weight_measure(&s, &w14(), &[]).unwrap(), 0.0);
        assert_eq!(weight_measure(&s, &w14(), &[0, 1]).unwrap(), 5.0);
        assert!(weight_measure(&s, &w14(), &[2]).is_err());
    }

    #[test]
    fn constant_weight_has_unit_constant() {
        let s = generate(SpaceKind::Grid1d { n: 10, a: 0.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        for p in [1.1, 2.0, 7.5] {
            assert_eq!(ap_constant(&s, &Weight::constant(10, 1.0).unwrap(), p).unwrap().constant, 1.0);
        }
    }

    #[test]
    fn two_point_ap2() {
        let rep = ap_constant_with(&two_point(), &w14(), 2.0, true, Strategy::Sequential).unwrap();
        assert!((rep.constant - 1.5625).abs() < 1e-15);
        assert_eq!(rep.witness.members, vec![0, 1]);
        for bv in rep.per_ball.unwrap() {
            if bv.ball.members.len() == 1 {
                assert!((bv.value - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(ap_constant(&two_point(), &w14(), 1.0).is_err());
        assert!(ap_constant(&two_point(), &w14(), f64::INFINITY).is_err());
        assert!(dual_weight(&w14(), 0.5).is_err());
    }

    #[test]
    fn dual_weight_examples() {
        assert_eq!(dual_weight(&w14(), 2.0).unwrap().values(), &[1.0, 0.25]);
        let back = dual_weight(&dual_weight(&w14(), 3.0).unwrap(), conjugate_exponent(3.0)).unwrap();
        for (a, b) in back.values().iter().zip(w14().values()) {
            assert!((a - b).abs() < 1e-14 * b);
        }
    }

    #[test]
    fn holder_two_point() {
        let s = two_point();
        let ball = Ball::new(&s, 0, 2.0).unwrap();
        let f = ScalarField::new(vec![1.0, 1.0]).unwrap();
        let rep = weighted_holder_check(&s, &w14(), 2.0, &ball, &f).unwrap();
        assert_eq!(rep.lhs, 1.0);
        assert!((rep.rhs - 1.25).abs() < 1e-15);
        assert!(rep.holds);
        let neg = ScalarField::new(vec![-1.0, 1.0]).unwrap();
        assert!(weighted_holder_check(&s, &w14(), 2.0, &ball, &neg).is_err());
    }

    #[test]
    fn doubling_check_two_point() {
        let rep = weight_doubling_check(&two_point(), &w14(), 2.0).unwrap();
        assert_eq!(rep.c_w_measured, 5.0);
        assert_eq!(rep.c_mu, 2.0);
        assert!((rep.bound - 6.25).abs() < 1e-14);
        assert!(rep.holds);
    }

    #[test]
    fn doubling_check_constant_weight() {
        let s = generate(SpaceKind::Grid1d { n: 12, a: 0.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        let rep = weight_doubling_check(&s, &Weight::constant(12, 1.0).unwrap(), 2.0).unwrap();
        assert_eq!(rep.c_w_measured, rep.c_mu);
        assert_eq!(rep.bound, rep.c_mu * rep.c_mu);
    }

    #[test]
    fn witness_on_constant_weight() {
        let s = generate(SpaceKind::Grid1d { n: 6, a: 0.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        let rep = ap_lower_bound_witness(&s, &Weight::constant(6, 1.0).unwrap(), 2.5, &[0.5, 0.1]).unwrap();
        for level in &rep.levels {
            let expected = 1.0 / (1.0 + level.eps);
            assert!((level.lower_bound - expected).abs() < 1e-14);
        }
        assert!(rep.holds());
    }

    #[test]
    fn witness_converges_on_two_point() {
        let eps = [1e-1, 1e-2, 1e-3, 1e-5, 1e-8];
        let rep = ap_lower_bound_witness(&two_point(), &w14(), 2.0, &eps).unwrap();
        assert!(rep.holds());
        let last = rep.levels.last().unwrap().lower_bound;
        assert!((last - 1.5625).abs() < 1e-6);
    }

    #[test]
    fn power_weight_examples() {
        let s = generate(SpaceKind::Grid1dMidpoint { n: 4, a: -1.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        assert_eq!(power_weight(&s, 1.0).unwrap().values(), &[0.75, 0.25, 0.25, 0.75]);
        assert_eq!(power_weight(&s, 0.0).unwrap().values(), &[1.0; 4]);
        let with_origin = generate(SpaceKind::Grid1d { n: 3, a: -1.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        assert!(power_weight(&with_origin, 0.5).is_err());
        assert!(power_weight(&two_point(), 0.5).is_err());
    }

    #[test]
    fn near_one_exponent_stays_finite() {
        let s = generate(SpaceKind::Grid1d { n: 8, a: 0.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        let w = Weight::new((0..8).map(|i| 1.0 + i as f64).collect()).unwrap();
        let rep = ap_constant(&s, &w, 1.001).unwrap();
        assert!(rep.constant.is_finite() && rep.constant >= 1.0);
    }
}
