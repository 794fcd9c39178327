//! Noncentered and weighted Hardy-Littlewood maximal operators.

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::exec::{self, Strategy};
use crate::space::FiniteMetricMeasureSpace;
use crate::weights::{ap_constant, dual_weight, Weight, INEQUALITY_RTOL};

pub use crate::oracle::maximal_oracle;

/// A real function on the points of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!("f[{i}] = {} is not finite", values[i])));
        }
        Ok(ScalarField { values })
    }

    pub fn zeros(n: usize) -> Self {
        ScalarField { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        ScalarField::new(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("field serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            values: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        ScalarField::new(raw.values)
    }
}

/// `sup_{B ni x} (sum_B v m) / (sum_B m)` for nonnegative `values` and point
/// masses `masses`.
///
/// Per center, one pass over the distance-sorted order gives the average of
/// every prefix ball; a suffix maximum over prefixes then gives, for each
/// point, the best ball at that center that still contains it. Cost is
/// `O(n^2)` on top of the cached `O(n^2 log n)` ball index.
pub fn maximal_with_masses(
    space: &FiniteMetricMeasureSpace,
    masses: &[f64],
    values: &[f64],
    strategy: Strategy,
) -> Vec<f64> {
    let index = space.index();
    let n = space.n();
    exec::max_accumulate(strategy, n, n, Vec::<f64>::new, |c, averages, acc| {
        let view = index.center(c);
        averages.clear();
        let (mut num, mut den) = (0.0, 0.0);
        for g in 0..view.group_count() {
            for &u in view.group(g) {
                let u = u as usize;
                num += values[u] * masses[u];
                den += masses[u];
            }
            averages.push(num / den);
        }
        let mut best = 0.0f64;
        for g in (0..view.group_count()).rev() {
            best = best.max(averages[g]);
            for &u in view.group(g) {
                let slot = &mut acc[u as usize];
                *slot = slot.max(best);
            }
        }
    })
}

fn abs_values(f: &ScalarField) -> Vec<f64> {
    f.values.iter().map(|v| v.abs()).collect()
}

/// Noncentered maximal function `Mf`.
pub fn maximal(space: &FiniteMetricMeasureSpace, f: &ScalarField) -> Result<ScalarField> {
    maximal_with(space, f, Strategy::default())
}

pub fn maximal_with(space: &FiniteMetricMeasureSpace, f: &ScalarField, strategy: Strategy) -> Result<ScalarField> {
    space.check_len(f.len())?;
    let out = maximal_with_masses(space, space.measure(), &abs_values(f), strategy);
    Ok(ScalarField { values: out })
}

/// Weighted maximal function `M^{*,w} f`, averages taken in `w dmu`.
pub fn maximal_weighted(space: &FiniteMetricMeasureSpace, w: &Weight, f: &ScalarField) -> Result<ScalarField> {
    space.check_len(f.len())?;
    space.check_len(w.len())?;
    let out = maximal_with_masses(space, &w.masses(space), &abs_values(f), Strategy::default());
    Ok(ScalarField { values: out })
}

/// `sum_i |v_i|^q w_i mu_i`.
pub fn weighted_power_integral(space: &FiniteMetricMeasureSpace, w: &Weight, values: &[f64], q: f64) -> f64 {
    values.iter().zip(w.values()).zip(space.measure()).map(|((v, wi), m)| v.abs().powf(q) * wi * m).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LernerReport {
    pub p: f64,
    pub ap_constant: f64,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub slack: Vec<f64>,
    /// `min_x (rhs - lhs) / rhs`.
    pub min_relative_slack: f64,
    pub holds: bool,
}

/// Pointwise bound
/// `Mf <= [w]_{A_p}^{1/(p-1)} (M^{*,w}((M^{*,sigma}(f/sigma))^{p-1} / w))^{1/(p-1)}`
/// with `sigma = w^{1/(1-p)}`.
pub fn lerner_pointwise_check(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    f: &ScalarField,
) -> Result<LernerReport> {
    check_exponent(p)?;
    let ap = ap_constant(space, w, p)?.constant;
    lerner_pointwise_check_with_constant(space, w, p, ap, f)
}

pub fn lerner_pointwise_check_with_constant(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    p: f64,
    ap: f64,
    f: &ScalarField,
) -> Result<LernerReport> {
    check_exponent(p)?;
    space.check_len(f.len())?;
    space.check_len(w.len())?;
    let strategy = Strategy::default();
    let sigma = dual_weight(w, p)?;
    let lhs = maximal_with(space, f, strategy)?.into_values();

    let f_over_sigma: Vec<f64> = f.values.iter().zip(sigma.values()).map(|(v, s)| v.abs() / s).collect();
    let inner = maximal_with_masses(space, &sigma.masses(space), &f_over_sigma, strategy);
    let outer_arg: Vec<f64> = inner.iter().zip(w.values()).map(|(m, wi)| m.powf(p - 1.0) / wi).collect();
    let outer = maximal_with_masses(space, &w.masses(space), &outer_arg, strategy);

    let scale = ap.powf(1.0 / (p - 1.0));
    let rhs: Vec<f64> = outer.iter().map(|v| scale * v.powf(1.0 / (p - 1.0))).collect();
    let slack: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
    let min_relative_slack = slack
        .iter()
        .zip(&rhs)
        .map(|(s, r)| {
            if *r > 0.0 {
                s / r
            } else if *s >= 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min);
    Ok(LernerReport {
        p,
        ap_constant: ap,
        lhs,
        rhs,
        slack,
        min_relative_slack,
        holds: min_relative_slack >= -INEQUALITY_RTOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub index: usize,
    pub norm_f: f64,
    pub norm_mf: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRatioReport {
    pub q: f64,
    pub rows: Vec<NormRow>,
    /// Family members skipped because they vanish identically.
    pub skipped: Vec<usize>,
    pub sup_ratio: f64,
}

impl NormRatioReport {
    /// `sup int (Mf)^q w / int |f|^q w`, i.e. `sup_ratio^q`.
    pub fn integral_constant(&self) -> f64 {
        self.sup_ratio.powf(self.q)
    }
}

/// `||Mf||_{L^q(w)} / ||f||_{L^q(w)}` for every nonzero member of `family`.
pub fn norm_ratio(
    space: &FiniteMetricMeasureSpace,
    w: &Weight,
    q: f64,
    family: &[ScalarField],
) -> Result<NormRatioReport> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("norm exponent q = {q} must be in [1, inf)")));
    }
    space.check_len(w.len())?;
    for f in family {
        space.check_len(f.len())?;
    }
    let indexed: Vec<(usize, &ScalarField)> = family.iter().enumerate().collect();
    let rows = exec::map_slice(Strategy::default(), &indexed, |&(index, f)| {
        if f.is_zero() {
            return None;
        }
        let mf = maximal_with_masses(space, space.measure(), &abs_values(f), Strategy::Sequential);
        let norm_f = weighted_power_integral(space, w, f.values(), q).powf(1.0 / q);
        let norm_mf = weighted_power_integral(space, w, &mf, q).powf(1.0 / q);
        Some(NormRow { index, norm_f, norm_mf, ratio: norm_mf / norm_f })
    });
    let skipped: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| r.is_none()).map(|(i, _)| i).collect();
    let rows: Vec<NormRow> = rows.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(NormRatioReport { q, rows, skipped, sup_ratio })
}
