//! Invariant suites. Each suite runs a family of inequalities or identities
//! over a set of cases and records every check with its measured slack.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::family::{random_nonnegative, representative_balls};
use crate::fixtures::{random_corpus, standard_corpus};
use crate::maxop::{lerner_pointwise_check_with_constant, maximal, ScalarField};
use crate::oracle::{ap_constant_oracle, doubling_oracle, maximal_oracle};
use crate::selfimprove::layer_cake_identity_check;
use crate::space::{doubling_constant, FiniteMetricMeasureSpace};
use crate::weights::{
    ap_constant, ap_lower_bound_witness, conjugate_exponent, dual_weight, lognormal_weight, weight_doubling_check,
    weighted_holder_check_with_constant, Weight,
};
use crate::whitney::{check_truncation_bounds_with, quantile_thresholds, truncate};

pub const DUALITY_RTOL: f64 = 1e-9;
pub const LAYER_CAKE_RTOL: f64 = 1e-9;
pub const ORACLE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Duality,
    Holder,
    Lerner,
    Whitney,
    Layercake,
    Oracle,
    Witness,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] =
        [Suite::Duality, Suite::Holder, Suite::Lerner, Suite::Whitney, Suite::Layercake, Suite::Oracle, Suite::Witness];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Holder => "holder",
            Suite::Lerner => "lerner",
            Suite::Whitney => "whitney",
            Suite::Layercake => "layercake",
            Suite::Oracle => "oracle",
            Suite::Witness => "witness",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

/// A space with a weight and test functions.
#[derive(Debug, Clone)]
pub struct Case {
    pub name: String,
    pub space: FiniteMetricMeasureSpace,
    pub weight: Weight,
    pub functions: Vec<ScalarField>,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub p: f64,
    pub seed: u64,
    /// Cases to run on; seeded random cases when `None`.
    pub cases: Option<Vec<Case>>,
    /// Number of seeded random cases.
    pub random_cases: usize,
    /// Single `eps` for the layer-cake suite instead of the default pair.
    pub layer_cake_eps: Option<f64>,
}

impl VerifyConfig {
    pub fn new(p: f64) -> Self {
        VerifyConfig { p, seed: 0, cases: None, random_cases: 12, layer_cake_eps: None }
    }
}

/// One inequality `lhs <= rhs` or identity `lhs = rhs` as measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub case: String,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative slack; negative beyond tolerance means failure.
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub p: f64,
    pub suites: Vec<Suite>,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn min_slack(&self, suite: Suite) -> Option<f64> {
        self.checks.iter().filter(|c| c.suite == suite).map(|c| c.slack).reduce(f64::min)
    }
}

/// Seeded random cases: random Euclidean spaces with `n <= 64`, log-normal
/// weights and four random nonnegative functions each.
pub fn random_cases(count: usize, seed: u64) -> Result<Vec<Case>> {
    random_corpus(count, 64, seed)?
        .into_iter()
        .enumerate()
        .map(|(k, fx)| {
            let s = seed.wrapping_add(7 * k as u64 + 1);
            let n = fx.space.n();
            Ok(Case {
                name: fx.name,
                weight: lognormal_weight(n, 1.0, s)?,
                functions: random_nonnegative(n, 4, s),
                space: fx.space,
            })
        })
        .collect()
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

struct Recorder<'a> {
    suite: Suite,
    case: &'a str,
    out: Vec<CheckOutcome>,
}

impl Recorder<'_> {
    fn inequality(&mut self, check: impl Into<String>, lhs: f64, rhs: f64, rtol: f64) {
        let slack = if rhs != 0.0 {
            (rhs - lhs) / rhs.abs()
        } else if lhs <= 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        self.out.push(CheckOutcome {
            suite: self.suite,
            case: self.case.to_string(),
            check: check.into(),
            lhs,
            rhs,
            slack,
            passed: slack >= -rtol,
        });
    }

    fn identity(&mut self, check: impl Into<String>, lhs: f64, rhs: f64, rtol: f64) {
        let gap = relative_gap(lhs, rhs);
        self.out.push(CheckOutcome {
            suite: self.suite,
            case: self.case.to_string(),
            check: check.into(),
            lhs,
            rhs,
            slack: rtol - gap,
            passed: gap <= rtol,
        });
    }
}

fn run_case(suite: Suite, case: &Case, p: f64, eps: Option<f64>) -> Result<Vec<CheckOutcome>> {
    let mut rec = Recorder { suite, case: &case.name, out: Vec::new() };
    let (space, w) = (&case.space, &case.weight);
    space.check_len(w.len())?;
    match suite {
        Suite::Duality => {
            let ap = ap_constant(space, w, p)?.constant;
            let sigma = dual_weight(w, p)?;
            let dual = ap_constant(space, &sigma, conjugate_exponent(p))?.constant;
            rec.identity("[sigma]_{A_p'} = [w]_{A_p}^{1/(p-1)}", dual, ap.powf(1.0 / (p - 1.0)), DUALITY_RTOL);
        }
        Suite::Holder => {
            let ap = ap_constant(space, w, p)?.constant;
            let balls = representative_balls(space, w, p, 4)?;
            for (k, f) in case.functions.iter().enumerate() {
                let g = ScalarField::new(f.values().iter().map(|v| v.abs()).collect())?;
                for b in &balls {
                    let h = weighted_holder_check_with_constant(space, w, p, ap, b, &g)?;
                    rec.inequality(format!("holder f{k} ball({}, {:.6e})", b.center, b.radius), h.lhs, h.rhs, 1e-9);
                }
            }
            let d = weight_doubling_check(space, w, p)?;
            rec.inequality("c_w <= c_mu^p [w]_{A_p}", d.c_w_measured, d.bound, 1e-9);
        }
        Suite::Lerner => {
            let ap = ap_constant(space, w, p)?.constant;
            for (k, f) in case.functions.iter().enumerate() {
                let r = lerner_pointwise_check_with_constant(space, w, p, ap, f)?;
                let worst = (0..r.lhs.len())
                    .min_by(|&a, &b| (r.slack[a] / r.rhs[a]).total_cmp(&(r.slack[b] / r.rhs[b])))
                    .expect("nonempty space");
                rec.inequality(
                    format!("pointwise Mf <= Lerner bound, f{k} at x{worst}"),
                    r.lhs[worst],
                    r.rhs[worst],
                    1e-9,
                );
            }
        }
        Suite::Whitney => {
            let c_mu = doubling_constant(space);
            for (k, f) in case.functions.iter().enumerate() {
                let f = ScalarField::new(f.values().iter().map(|v| v.abs()).collect())?;
                let mf = maximal(space, &f)?;
                for t in quantile_thresholds(&mf, &[0.5, 0.7, 0.9]) {
                    let tr = match truncate(space, &f, t) {
                        Ok(tr) => tr,
                        Err(Error::ThresholdTooLow(_)) => continue,
                        Err(e) => return Err(e),
                    };
                    let b = check_truncation_bounds_with(space, &f, &tr, c_mu)?;
                    let tag = format!("f{k} t={t:.6e}");
                    rec.inequality(format!("f_t <= t off E_t, {tag}"), b.max_off_level_ratio, 1.0, 1e-9);
                    rec.inequality(
                        format!("f_t <= c_mu^4 t on E_t, {tag}"),
                        b.max_on_level_ratio,
                        b.on_level_constant,
                        1e-9,
                    );
                    rec.inequality(
                        format!("Mf <= max(1,N) c_mu Mf_t off E_t, {tag}"),
                        b.max_domination_ratio,
                        b.domination_constant,
                        1e-9,
                    );
                    rec.inequality(format!("cover ball facts, {tag}"), b.violations.len() as f64, 0.0, 0.0);
                }
            }
        }
        Suite::Layercake => {
            for (k, f) in case.functions.iter().enumerate() {
                let f = ScalarField::new(f.values().iter().map(|v| v.abs()).collect())?;
                if f.is_zero() {
                    continue;
                }
                let top = maximal(space, &f)?.values().iter().copied().fold(0.0, f64::max);
                let eps_list = match eps {
                    Some(e) => vec![e],
                    None => vec![0.05 * (p - 1.0), 0.5 * (p - 1.0)],
                };
                for eps in eps_list {
                    for frac in [1e-3, 0.3, 0.8] {
                        let r = layer_cake_identity_check(space, w, &f, p, eps, frac * top)?;
                        let tag = format!("f{k} eps={eps} t0={:.6e}", frac * top);
                        rec.identity(
                            format!("(Mf)^p levels, {tag}"),
                            r.maximal_levels,
                            r.maximal_pointwise,
                            LAYER_CAKE_RTOL,
                        );
                        rec.identity(
                            format!("f^p levels, {tag}"),
                            r.function_levels,
                            r.function_pointwise,
                            LAYER_CAKE_RTOL,
                        );
                        rec.identity(
                            format!("w(E_t) levels, {tag}"),
                            r.level_set_levels,
                            r.level_set_pointwise,
                            LAYER_CAKE_RTOL,
                        );
                    }
                }
            }
        }
        Suite::Oracle => {
            for (k, f) in case.functions.iter().enumerate() {
                let fast = maximal(space, f)?;
                let slow = maximal_oracle(space, f)?;
                let gap =
                    fast.values().iter().zip(slow.values()).map(|(a, b)| relative_gap(*a, *b)).fold(0.0, f64::max);
                rec.inequality(format!("maximal vs oracle, f{k} (max relative gap)"), gap, ORACLE_RTOL, 0.0);
            }
            rec.identity(
                "ap_constant vs oracle",
                ap_constant(space, w, p)?.constant,
                ap_constant_oracle(space, w, p)?,
                ORACLE_RTOL,
            );
            rec.identity(
                "doubling_constant vs oracle",
                doubling_constant(space),
                doubling_oracle(space, 1000, true),
                ORACLE_RTOL,
            );
        }
        Suite::Witness => {
            if space.n() > 32 {
                return Ok(rec.out);
            }
            let rep = ap_lower_bound_witness(space, w, p, &[1.0, 1e-2, 1e-4, 1e-8])?;
            for l in &rep.levels {
                rec.inequality(format!("L(eps) <= [w]_{{A_p}}, eps={}", l.eps), l.lower_bound, rep.ap_constant, 1e-9);
                rec.inequality(format!("L(eps) <= sup ratio, eps={}", l.eps), l.lower_bound, l.measured_ratio, 1e-9);
            }
            rec.inequality("L(eps) nondecreasing as eps decreases", if rep.monotone { 0.0 } else { 1.0 }, 0.0, 0.0);
        }
        Suite::All => unreachable!("expanded by run_suite"),
    }
    Ok(rec.out)
}

/// Oracle equivalence over the full standard corpus, with a seeded weight
/// and function per space.
fn corpus_oracle_checks(p: f64, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (k, fx) in standard_corpus()?.into_iter().enumerate() {
        let n = fx.space.n();
        let s = seed.wrapping_add(k as u64);
        let case = Case {
            name: format!("corpus:{}", fx.name),
            weight: lognormal_weight(n, 1.0, s)?,
            functions: random_nonnegative(n, 2, s),
            space: fx.space,
        };
        out.extend(run_case(Suite::Oracle, &case, p, None)?);
    }
    Ok(out)
}

/// Runs `suite` (or every suite for [`Suite::All`]) over the configured cases.
/// Without explicit cases the oracle suite also covers the standard corpus.
pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<VerifyReport> {
    check_exponent(config.p)?;
    if let Some(e) = config.layer_cake_eps {
        if !(e > 0.0 && e < config.p) {
            return Err(Error::InvalidParameter(format!("eps = {e} must lie in (0, p)")));
        }
    }
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let generated;
    let cases: &[Case] = match &config.cases {
        Some(c) => c,
        None => {
            generated = random_cases(config.random_cases, config.seed)?;
            &generated
        }
    };
    let mut checks = Vec::new();
    for &s in &suites {
        for case in cases {
            checks.extend(run_case(s, case, config.p, config.layer_cake_eps)?);
        }
        if s == Suite::Oracle && config.cases.is_none() {
            checks.extend(corpus_oracle_checks(config.p, config.seed)?);
        }
    }
    Ok(VerifyReport { p: config.p, suites, checks })
}
