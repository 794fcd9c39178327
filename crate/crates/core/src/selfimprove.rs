//! Executable form of the `A_p -> A_{p-eps}` self-improvement argument.
//!
//! The pipeline measures the constant `C2` of the level-set inequality
//!
//! ```text
//! int_{X \ E_t} (Mf)^p w  <=  C2 ( int_{X \ E_t} f^p w  +  t^p w(E_t) )
//! ```
//!
//! over a function family, derives `eps` from `C2 eps / (p - eps) <= 1/2`,
//! and then checks the absorbed inequality and the improved `L^{p-eps}`
//! bound literally. All `t`-integrals are evaluated in closed form: `Mf`
//! takes finitely many values, so every level-set function of `t` is a step
//! function and each step integrates a power of `t` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::exec::{self, Strategy};
use crate::maxop::{
    lerner_pointwise_check_with_constant, maximal, maximal_with, norm_ratio, weighted_power_integral, ScalarField,
};
use crate::space::{doubling_constant, FiniteMetricMeasureSpace};
use crate::weights::{ap_constant, Weight, INEQUALITY_RTOL};
use crate::whitney::{quantile_thresholds, truncate};

/// Both sides of the level-set inequality at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstarEvaluation {
    pub t: f64,
    /// `int_{X \ E_t} (Mf)^p w dmu`.
    pub lhs: f64,
    /// `int_{X \ E_t} f^p w dmu + t^p w(E_t)`.
    pub rhs: f64,
    /// `lhs / rhs`, or 0 when both vanish.
    pub ratio: f64,
    pub level_set_size: usize,
    /// Overlap of the Whitney cover of `E_t`, when `E_t` is nonempty.
    pub overlap: Option<usize>,
    /// `int (M f_t)^p w dmu`, the middle term of the chain.
    pub truncated_maximal_integral: f64,
    /// `int f_t^p w dmu`.
    pub truncated_integral: f64,
}

fn ratio_or_zero(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else {
        0.0
    }
}

/// Evaluates the level-set inequality at `t`, building the truncation `f_t`.
pub fn estar_evaluate(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    f: &ScalarField,
    t: f64,
) -> Result<EstarEvaluation> {
    check_exponent(p)?;
    space.check_len(w.len())?;
    let tr = truncate(space, f, t)?;
    let mf = tr.maximal_f.as_ref().expect("truncate keeps Mf");
    let mft = maximal(space, &tr.f_t)?;
    let mu = space.measure();
    let (mut lhs, mut below, mut level_mass) = (0.0, 0.0, 0.0);
    for x in 0..space.n() {
        let wm = w.values()[x] * mu[x];
        if tr.level_set.contains(x) {
            level_mass += wm;
        } else {
            lhs += mf.values()[x].powf(p) * wm;
            below += f.values()[x].powf(p) * wm;
        }
    }
    let rhs = below + t.powf(p) * level_mass;
    Ok(EstarEvaluation {
        t,
        lhs,
        rhs,
        ratio: ratio_or_zero(lhs, rhs),
        level_set_size: tr.level_set.len(),
        overlap: tr.cover.as_ref().map(|c| c.overlap_max),
        truncated_maximal_integral: weighted_power_integral(space, w, mft.values(), p),
        truncated_integral: weighted_power_integral(space, w, tr.f_t.values(), p),
    })
}

/// Smallest admissible constant in the level-set inequality at `(f, t)`.
pub fn estar_constant(space: &FiniteMetricMeasureSpace, w: &Weight, p: f64, f: &ScalarField, t: f64) -> Result<f64> {
    Ok(estar_evaluate(space, w, p, f, t)?.ratio)
}

/// Points sorted by increasing `Mf`, grouped into runs of equal value.
struct Levels {
    order: Vec<usize>,
    /// `(value, end)` with `order[start..end]` the points at that value.
    runs: Vec<(f64, usize)>,
}

impl Levels {
    fn new(mf: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..mf.len()).collect();
        order.sort_by(|&a, &b| mf[a].total_cmp(&mf[b]).then(a.cmp(&b)));
        let mut runs: Vec<(f64, usize)> = Vec::new();
        for (k, &x) in order.iter().enumerate() {
            match runs.last_mut() {
                Some((v, end)) if *v == mf[x] => *end = k + 1,
                _ => runs.push((mf[x], k + 1)),
            }
        }
        Levels { order, runs }
    }

    fn run(&self, k: usize) -> &[usize] {
        let start = if k == 0 { 0 } else { self.runs[k - 1].1 };
        &self.order[start..self.runs[k].1]
    }
}

/// Exact supremum over every admissible `t > 0` of the level-set ratio,
/// returned as `(t, ratio)`.
///
/// Between consecutive values `v_k <= t < v_{k+1}` of `Mf` the set `E_t` is
/// fixed, the left side is constant and the right side grows with `t`, so
/// the supremum over that interval sits at `t = v_k`. For `t` below the
/// smallest value `E_t = X`, which is excluded.
pub fn estar_sup(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    f: &ScalarField,
    mf: &ScalarField,
) -> (f64, f64) {
    let mu = space.measure();
    let levels = Levels::new(mf.values());
    let wm: Vec<f64> = (0..space.n()).map(|x| w.values()[x] * mu[x]).collect();
    let mut level_mass: f64 = wm.iter().sum();
    let (mut lhs, mut below) = (0.0, 0.0);
    let mut best = (0.0, 0.0);
    for k in 0..levels.runs.len() {
        for &x in levels.run(k) {
            lhs += mf.values()[x].powf(p) * wm[x];
            below += f.values()[x].powf(p) * wm[x];
            level_mass -= wm[x];
        }
        let t = levels.runs[k].0;
        if !(t > 0.0) {
            continue;
        }
        let level_mass = if k + 1 == levels.runs.len() { 0.0 } else { level_mass.max(0.0) };
        let r = ratio_or_zero(lhs, below + t.powf(p) * level_mass);
        if r > best.1 {
            best = (t, r);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCakeReport {
    pub p: f64,
    pub eps: f64,
    pub t0: f64,
    /// `int_{t0}^inf t^{-1-eps} int_{X \ E_t} (Mf)^p w dt`, by steps in `t`.
    pub maximal_levels: f64,
    /// `(1/eps) int (Mf)^p max(t0, Mf)^{-eps} w`, pointwise.
    pub maximal_pointwise: f64,
    pub function_levels: f64,
    pub function_pointwise: f64,
    /// `int_{t0}^inf t^{p-1-eps} w(E_t) dt`, by steps in `t`.
    pub level_set_levels: f64,
    /// `int_{E_{t0}} int_{t0}^{Mf} t^{p-1-eps} dt w`, pointwise.
    pub level_set_pointwise: f64,
    pub max_residual: f64,
    pub holds: bool,
}

fn residual(a: f64, b: f64) -> f64 {
    if b != 0.0 {
        (a - b).abs() / b.abs()
    } else {
        a.abs()
    }
}

/// Checks the three Fubini identities of the layer-cake step, computing
/// each side by an independent route.
pub fn layer_cake_identity_check(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    f: &ScalarField,
    p: f64,
    eps: f64,
    t0: f64,
) -> Result<LayerCakeReport> {
    check_exponent(p)?;
    if !(eps > 0.0 && eps < p) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, p)")));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidParameter(format!("t0 = {t0} must be positive")));
    }
    space.check_len(w.len())?;
    let mf = maximal(space, f)?;
    Ok(layer_cake_from_maximal(space, w, f, &mf, p, eps, t0))
}

pub(crate) fn layer_cake_from_maximal(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    f: &ScalarField,
    mf: &ScalarField,
    p: f64,
    eps: f64,
    t0: f64,
) -> LayerCakeReport {
    let mu = space.measure();
    let n = space.n();
    let wm: Vec<f64> = (0..n).map(|x| w.values()[x] * mu[x]).collect();
    let m = mf.values();
    let q = p - eps;

    // int_a^b t^{-1-eps} dt, b may be infinite.
    let decay = |a: f64, b: f64| (a.powf(-eps) - if b.is_finite() { b.powf(-eps) } else { 0.0 }) / eps;
    // int_a^b t^{p-1-eps} dt.
    let growth = |a: f64, b: f64| (b.powf(q) - a.powf(q)) / q;

    let levels = Levels::new(m);
    let runs = levels.runs.len();
    let (mut maximal_levels, mut function_levels, mut level_set_levels) = (0.0, 0.0, 0.0);
    let (mut below_m, mut below_f) = (0.0, 0.0);
    let mut above: f64 = wm.iter().sum();
    // Piece below the smallest value: X \ E_t is empty, E_t = X.
    let first = levels.runs[0].0;
    if t0 < first {
        level_set_levels += above * growth(t0, first);
    }
    for k in 0..runs {
        for &x in levels.run(k) {
            below_m += m[x].powf(p) * wm[x];
            below_f += f.values()[x].abs().powf(p) * wm[x];
            above -= wm[x];
        }
        let lo = levels.runs[k].0.max(t0);
        let hi = if k + 1 < runs { levels.runs[k + 1].0 } else { f64::INFINITY };
        if lo < hi {
            let d = decay(lo, hi);
            maximal_levels += below_m * d;
            function_levels += below_f * d;
            if k + 1 < runs {
                level_set_levels += above.max(0.0) * growth(lo, hi);
            }
        }
    }

    let (mut maximal_pointwise, mut function_pointwise, mut level_set_pointwise) = (0.0, 0.0, 0.0);
    for x in 0..n {
        let cut = t0.max(m[x]).powf(-eps);
        maximal_pointwise += m[x].powf(p) * cut * wm[x];
        function_pointwise += f.values()[x].abs().powf(p) * cut * wm[x];
        if m[x] > t0 {
            level_set_pointwise += growth(t0, m[x]) * wm[x];
        }
    }
    maximal_pointwise /= eps;
    function_pointwise /= eps;

    let max_residual = residual(maximal_levels, maximal_pointwise)
        .max(residual(function_levels, function_pointwise))
        .max(residual(level_set_levels, level_set_pointwise));
    LayerCakeReport {
        p,
        eps,
        t0,
        maximal_levels,
        maximal_pointwise,
        function_levels,
        function_pointwise,
        level_set_levels,
        level_set_pointwise,
        max_residual,
        holds: max_residual <= INEQUALITY_RTOL,
    }
}

/// `eps = safety * min(p - 1, p / (1 + 2 C2))`, the largest `eps <= p - 1`
/// with `C2 eps / (p - eps) <= 1/2`, scaled by `safety`.
pub fn epsilon_from_constants(c2: f64, p: f64, safety: f64) -> Result<f64> {
    check_exponent(p)?;
    if !(c2 > 0.0 && c2.is_finite()) {
        return Err(Error::InvalidParameter(format!("C2 = {c2} must be positive and finite")));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidParameter(format!("safety = {safety} must lie in (0, 1]")));
    }
    Ok(safety * (p - 1.0).min(p / (1.0 + 2.0 * c2)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfImprovementConfig {
    pub p: f64,
    /// Quantiles of `Mf` at which the level-set inequality is also evaluated
    /// with an explicit truncation and Whitney cover.
    pub t_quantiles: Vec<f64>,
    /// Cutoffs `t0` for the absorption checks, as fractions of `max Mf`.
    pub t0_fractions: Vec<f64>,
    pub safety: f64,
    #[serde(skip)]
    pub family: Vec<ScalarField>,
}

impl SelfImprovementConfig {
    pub fn new(p: f64, family: Vec<ScalarField>) -> Self {
        SelfImprovementConfig {
            p,
            t_quantiles: (1..=9).map(|k| k as f64 / 10.0).collect(),
            t0_fractions: vec![1.0, 0.5, 0.25, 0.1, 0.03, 0.01, 1e-3],
            safety: 0.9,
            family,
        }
    }

    pub fn quantile_count(mut self, count: usize) -> Self {
        self.t_quantiles = (1..=count).map(|k| k as f64 / (count + 1) as f64).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionCheck {
    pub t0: f64,
    /// `int (Mf)^p max(t0, Mf)^{-eps} w`.
    pub lhs: f64,
    /// `C2 int f^{p-eps} w + C2 eps/(p-eps) lhs`.
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRow {
    pub index: usize,
    /// `int (Mf)^p w / int f^p w`.
    pub integral_ratio_p: f64,
    /// Supremum over `t` of the level-set ratio, and where it is attained.
    pub estar_sup: f64,
    pub estar_t: f64,
    /// `||Mf|| / ||f||` in `L^{p-eps}(w)`.
    pub norm_ratio_p_minus_eps: f64,
    /// `int (Mf)^{p-eps} w`.
    pub improved_lhs: f64,
    /// `2 C2 int f^{p-eps} w`.
    pub improved_rhs: f64,
    pub holds: bool,
    pub absorption: Vec<AbsorptionCheck>,
    /// The absorbed left side increases to `int (Mf)^{p-eps} w` as `t0 -> 0`.
    pub fatou_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfImprovementReport {
    pub p: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    /// Level-set constant restricted to the quantile thresholds.
    pub c2_quantile_grid: f64,
    #[serde(rename = "N")]
    pub overlap: usize,
    pub c_mu: f64,
    pub epsilon: f64,
    pub final_constant: f64,
    pub ap_p: f64,
    pub ap_p_minus_eps: f64,
    /// `[w]_{A_{p-eps}} <= 2 C2`, the consistency expected from the lemma chain.
    pub ap_consistent: bool,
    /// Smallest relative slack of the pointwise Lerner bound at `p - eps`.
    pub lerner_min_slack_p_minus_eps: f64,
    pub absorption_holds: bool,
    pub fatou_monotone: bool,
    /// `(q, sup_f ||Mf|| / ||f||)` on a grid of `q` in `[p - eps, p]`.
    pub ratio_curve: Vec<(f64, f64)>,
    pub per_function: Vec<FunctionRow>,
}

impl SelfImprovementReport {
    pub fn holds(&self) -> bool {
        self.absorption_holds && self.fatou_monotone && self.per_function.iter().all(|r| r.holds)
    }
}

/// Runs the full pipeline. A family member violating the improved
/// inequality fails the run with that member as witness.
pub fn self_improve(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    config: &SelfImprovementConfig,
) -> Result<SelfImprovementReport> {
    let report = self_improve_report(space, w, config)?;
    if let Some(bad) = report.per_function.iter().find(|r| !r.holds) {
        return Err(Error::ImprovementViolated { index: bad.index, lhs: bad.improved_lhs, rhs: bad.improved_rhs });
    }
    Ok(report)
}

/// As [`self_improve`] but returns the report even when a member fails.
pub fn self_improve_report(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    config: &SelfImprovementConfig,
) -> Result<SelfImprovementReport> {
    let p = config.p;
    check_exponent(p)?;
    space.check_len(w.len())?;
    if let Some(f) = config.family.iter().find(|f| !f.is_nonnegative()) {
        let _ = f;
        return Err(Error::InvalidFunction("self-improvement family must be nonnegative".into()));
    }
    let members: Vec<(usize, &ScalarField)> = config.family.iter().enumerate().filter(|(_, f)| !f.is_zero()).collect();
    if members.is_empty() {
        return Err(Error::EmptyFamily);
    }
    for (_, f) in &members {
        space.check_len(f.len())?;
    }

    let strategy = Strategy::default();
    let maximals: Vec<ScalarField> = exec::map_slice(strategy, &members, |(_, f)| {
        maximal_with(space, f, Strategy::Sequential).expect("lengths checked")
    });

    // (1) measured operator constant at p
    let c1 = norm_ratio(space, w, p, &config.family)?.integral_constant();

    // (2) level-set constant: exact sweep over all t, plus explicit
    // truncations at the quantile thresholds
    let sups: Vec<(f64, f64)> =
        members.iter().zip(&maximals).map(|((_, f), mf)| estar_sup(space, w, p, f, mf)).collect();
    let quantile_evals: Vec<Vec<EstarEvaluation>> = exec::map_indices(strategy, members.len(), |k| {
        quantile_thresholds(&maximals[k], &config.t_quantiles)
            .into_iter()
            .map(|t| estar_evaluate(space, w, p, members[k].1, t).expect("threshold keeps E_t proper"))
            .collect()
    });
    let c2_quantile_grid = quantile_evals.iter().flatten().map(|e| e.ratio).fold(0.0, f64::max);
    let overlap = quantile_evals.iter().flatten().filter_map(|e| e.overlap).max().unwrap_or(0);
    let c2 = sups.iter().map(|s| s.1).fold(c2_quantile_grid, f64::max);

    // (3) absorption choice
    let epsilon = epsilon_from_constants(c2, p, config.safety)?;
    let q = p - epsilon;
    let final_constant = 2.0 * c2;

    // (4) improved inequality, absorption and Fatou checks per member
    let per_function: Vec<FunctionRow> = members
        .iter()
        .zip(&maximals)
        .zip(&sups)
        .map(|(((index, f), mf), &(estar_t, estar_sup))| {
            let fq = weighted_power_integral(space, w, f.values(), q);
            let improved_lhs = weighted_power_integral(space, w, mf.values(), q);
            let improved_rhs = final_constant * fq;
            let integral_ratio_p =
                weighted_power_integral(space, w, mf.values(), p) / weighted_power_integral(space, w, f.values(), p);

            let top = mf.values().iter().copied().fold(0.0, f64::max);
            let bottom = mf.values().iter().copied().fold(f64::INFINITY, f64::min);
            let mut t0s: Vec<f64> = config.t0_fractions.iter().map(|r| r * top).filter(|&t| t > 0.0).collect();
            t0s.push(0.5 * bottom);
            t0s.sort_by(|a, b| b.total_cmp(a));
            let absorption: Vec<AbsorptionCheck> = t0s
                .iter()
                .map(|&t0| {
                    let lhs = layer_cake_from_maximal(space, w, f, mf, p, epsilon, t0).maximal_pointwise * epsilon;
                    let rhs = c2 * fq + c2 * epsilon / q * lhs;
                    AbsorptionCheck { t0, lhs, rhs, holds: lhs <= rhs * (1.0 + INEQUALITY_RTOL) }
                })
                .collect();
            let increasing = absorption.windows(2).all(|a| a[1].lhs >= a[0].lhs * (1.0 - 1e-12));
            let reaches_limit = absorption
                .last()
                .is_some_and(|a| (a.lhs - improved_lhs).abs() <= 1e-12 * improved_lhs.max(f64::MIN_POSITIVE));

            FunctionRow {
                index: *index,
                integral_ratio_p,
                estar_sup,
                estar_t,
                norm_ratio_p_minus_eps: (improved_lhs / fq).powf(1.0 / q),
                improved_lhs,
                improved_rhs,
                holds: improved_lhs <= improved_rhs * (1.0 + INEQUALITY_RTOL),
                absorption,
                fatou_monotone: increasing && reaches_limit,
            }
        })
        .collect();

    // (5) A_p constants and the pointwise bound at the improved exponent
    let ap_p = ap_constant(space, w, p)?.constant;
    let ap_p_minus_eps = ap_constant(space, w, q)?.constant;
    let lerner_min_slack_p_minus_eps = members
        .iter()
        .map(|(_, f)| {
            lerner_pointwise_check_with_constant(space, w, q, ap_p_minus_eps, f).map(|r| r.min_relative_slack)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let ratio_curve = (0..=8)
        .map(|k| {
            let qk = q + epsilon * k as f64 / 8.0;
            let sup = members
                .iter()
                .zip(&maximals)
                .map(|((_, f), mf)| {
                    (weighted_power_integral(space, w, mf.values(), qk)
                        / weighted_power_integral(space, w, f.values(), qk))
                    .powf(1.0 / qk)
                })
                .fold(0.0, f64::max);
            (qk, sup)
        })
        .collect();

    Ok(SelfImprovementReport {
        p,
        c1,
        c2,
        c2_quantile_grid,
        overlap,
        c_mu: doubling_constant(space),
        epsilon,
        final_constant,
        ap_p,
        ap_p_minus_eps,
        ap_consistent: ap_p_minus_eps <= final_constant * (1.0 + INEQUALITY_RTOL),
        lerner_min_slack_p_minus_eps,
        absorption_holds: per_function.iter().all(|r| r.absorption.iter().all(|a| a.holds)),
        fatou_monotone: per_function.iter().all(|r| r.fatou_monotone),
        ratio_curve,
        per_function,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSearch {
    pub epsilon: f64,
    /// Smallest exponent found feasible.
    pub q: f64,
    pub steps: usize,
    pub cap: f64,
}

/// Bisection on `q in (1, p]` for the smallest exponent at which
/// `sup_f int (Mf)^q w / int f^q w <= cap` over the family. Returns `p - q`;
/// 0 when `q = p` itself is infeasible.
///
/// A larger `cap` never gives a smaller result: the two searches agree until
/// the first midpoint where only the larger cap is feasible, after which the
/// larger cap stays at or below that midpoint and the smaller cap above it.
pub fn epsilon_search(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    family: &[ScalarField],
    budget: usize,
    cap: f64,
) -> Result<EpsilonSearch> {
    check_exponent(p)?;
    if budget < 8 {
        return Err(Error::InvalidParameter(format!("bisection budget {budget} is below 8 steps")));
    }
    space.check_len(w.len())?;
    let members: Vec<&ScalarField> = family.iter().filter(|f| !f.is_zero()).collect();
    if members.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let maximals: Vec<ScalarField> = members.iter().map(|f| maximal(space, f)).collect::<Result<_>>()?;
    let feasible = |q: f64| {
        members.iter().zip(&maximals).all(|(f, mf)| {
            let r =
                weighted_power_integral(space, w, mf.values(), q) / weighted_power_integral(space, w, f.values(), q);
            r.is_finite() && r <= cap
        })
    };
    if !feasible(p) {
        return Ok(EpsilonSearch { epsilon: 0.0, q: p, steps: 0, cap });
    }
    let (mut lo, mut hi) = (1.0f64, p);
    for _ in 0..budget {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(EpsilonSearch { epsilon: p - hi, q: hi, steps: budget, cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{generate, MeasureSpec, SpaceKind};

    fn two_point() -> FiniteMetricMeasureSpace {
        FiniteMetricMeasureSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn epsilon_formula() {
        assert_eq!(epsilon_from_constants(1.5, 2.0, 1.0).unwrap(), 0.5);
        assert_eq!(epsilon_from_constants(0.1, 3.0, 1.0).unwrap(), 2.0);
        assert!(epsilon_from_constants(1e12, 2.0, 0.9).unwrap() < 1e-11);
        assert!(epsilon_from_constants(1.0, 2.0, 0.0).is_err());
        assert!(epsilon_from_constants(0.0, 2.0, 0.5).is_err());
        let e = epsilon_from_constants(3.7, 2.5, 0.9).unwrap();
        assert!(3.7 * e / (2.5 - e) <= 0.5);
    }

    #[test]
    fn estar_trivial_cases() {
        let s = generate(SpaceKind::Grid1d { n: 8, a: 0.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        let w = Weight::new((1..=8).map(|i| i as f64).collect()).unwrap();
        assert_eq!(estar_constant(&s, &w, 2.0, &ScalarField::zeros(8), 0.5).unwrap(), 0.0);
        let c = ScalarField::constant(8, 0.3).unwrap();
        assert!((estar_constant(&s, &w, 2.0, &c, 0.5).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn layer_cake_two_point() {
        let s = two_point();
        let w = Weight::constant(2, 1.0).unwrap();
        let f = ScalarField::new(vec![1.0, 0.0]).unwrap();
        let rep = layer_cake_identity_check(&s, &w, &f, 2.0, 0.5, 0.25).unwrap();
        let expected = 2.0 + 0.5 * 2f64.sqrt();
        assert!((rep.maximal_pointwise - expected).abs() < 1e-14);
        assert!((rep.maximal_levels - expected).abs() < 1e-14);
        assert!(rep.holds);
    }

    #[test]
    fn layer_cake_constant_function() {
        let s = generate(SpaceKind::Grid1d { n: 5, a: 0.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        let w = Weight::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let f = ScalarField::constant(5, 0.5).unwrap();
        let (p, eps, t0) = (2.0, 0.3, 0.8);
        let rep = layer_cake_identity_check(&s, &w, &f, p, eps, t0).unwrap();
        let expected = 0.5f64.powf(p) * t0.powf(-eps) * 15.0 / eps;
        assert!((rep.maximal_levels - expected).abs() < 1e-13 * expected);
        assert!(rep.holds);
    }

    #[test]
    fn constant_weight_pipeline() {
        let s = generate(SpaceKind::Grid1d { n: 64, a: 0.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        let w = Weight::constant(64, 1.0).unwrap();
        let family = crate::family::standard_family(&s, &w, 2.0, 16, 11).unwrap();
        let rep = self_improve(&s, &w, &SelfImprovementConfig::new(2.0, family.clone())).unwrap();
        assert!(rep.epsilon > 0.0 && rep.epsilon < 1.0);
        assert_eq!(rep.ap_p_minus_eps, 1.0);
        assert!(rep.holds());
        let search = epsilon_search(&s, &w, 2.0, &family, 20, rep.final_constant).unwrap();
        assert!(search.epsilon + (2.0 - 1.0) / 2f64.powi(20) >= rep.epsilon);
    }

    #[test]
    fn search_rejects_bad_input() {
        let s = two_point();
        let w = Weight::constant(2, 1.0).unwrap();
        assert_eq!(epsilon_search(&s, &w, 2.0, &[ScalarField::zeros(2)], 10, 4.0), Err(Error::EmptyFamily));
        assert!(epsilon_search(&s, &w, 2.0, &[ScalarField::constant(2, 1.0).unwrap()], 4, 4.0).is_err());
    }
}
