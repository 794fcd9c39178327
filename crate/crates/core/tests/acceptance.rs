//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Wall-clock budgets are part of each
//! criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use muckenhoupt::family::{random_nonnegative, random_signs, standard_family};
use muckenhoupt::fixtures::standard_corpus;
use muckenhoupt::maxop::lerner_pointwise_check_with_constant;
use muckenhoupt::oracle::{ap_constant_oracle, doubling_oracle, maximal_oracle};
use muckenhoupt::selfimprove::self_improve_report;
use muckenhoupt::verify::random_cases;
use muckenhoupt::weights::{
    conjugate_exponent, power_weight, weight_doubling_check, weighted_holder_check_with_constant,
};
use muckenhoupt::whitney::{check_truncation_bounds, quantile_thresholds};
use muckenhoupt::{
    ap_constant, doubling_constant, dual_weight, enumerate_distinct_balls, generate, layer_cake_identity_check,
    maximal, maximal_with, truncate, MeasureSpec, ScalarField, SelfImprovementConfig, SpaceKind, Strategy, Weight,
};

const FROZEN_EPSILON: f64 = 0.10237348902438302;
const FROZEN_C2: f64 = 8.29133854454878;
const REGRESSION_RTOL: f64 = 1e-9;

type Criterion = (&'static str, u64, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn duality() -> Outcome {
    let cases = random_cases(50, 1).expect("cases");
    let mut worst = 0.0f64;
    for case in &cases {
        for p in [1.5, 2.0, 3.0] {
            let ap = ap_constant(&case.space, &case.weight, p).unwrap().constant;
            let sigma = dual_weight(&case.weight, p).unwrap();
            let dual = ap_constant(&case.space, &sigma, conjugate_exponent(p)).unwrap().constant;
            worst = worst.max(rel(dual, ap.powf(1.0 / (p - 1.0))));
        }
    }
    Outcome { passed: worst <= 1e-9, detail: format!("150 checks, max relative gap {worst:.3e}") }
}

fn lerner() -> Outcome {
    let cases = random_cases(20, 2).expect("cases");
    let mut worst = f64::INFINITY;
    for (k, case) in cases.iter().enumerate() {
        let p = [1.5, 2.0, 3.0][k % 3];
        let f = if k % 2 == 0 {
            random_nonnegative(case.space.n(), 1, 50 + k as u64).remove(0)
        } else {
            random_signs(case.space.n(), 1, 50 + k as u64).remove(0)
        };
        let ap = ap_constant(&case.space, &case.weight, p).unwrap().constant;
        let r = lerner_pointwise_check_with_constant(&case.space, &case.weight, p, ap, &f).unwrap();
        worst = worst.min(r.min_relative_slack);
    }
    Outcome { passed: worst >= -1e-9, detail: format!("20 triples, min relative slack {worst:.3e}") }
}

fn holder_and_doubling() -> Outcome {
    let cases = random_cases(100, 3).expect("cases");
    let (mut holder_worst, mut doubling_worst) = (f64::INFINITY, f64::INFINITY);
    for (k, case) in cases.iter().enumerate() {
        let p = [1.5, 2.0, 3.0][k % 3];
        let ap = ap_constant(&case.space, &case.weight, p).unwrap().constant;
        let f = &case.functions[0];
        for ball in &enumerate_distinct_balls(&case.space).balls {
            let h = weighted_holder_check_with_constant(&case.space, &case.weight, p, ap, ball, f).unwrap();
            holder_worst = holder_worst.min(h.slack / h.rhs);
        }
        let d = weight_doubling_check(&case.space, &case.weight, p).unwrap();
        doubling_worst = doubling_worst.min((d.bound * (1.0 + 1e-9) - d.c_w_measured) / d.bound);
    }
    Outcome {
        passed: holder_worst >= -1e-9 && doubling_worst >= 0.0,
        detail: format!(
            "100 triples, Holder min relative slack {holder_worst:.3e}, doubling min relative slack {doubling_worst:.3e}"
        ),
    }
}

fn truncation() -> Outcome {
    let spaces = [
        generate(SpaceKind::Grid1d { n: 64, a: 0.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap(),
        generate(SpaceKind::Grid2d { nx: 8, ny: 8 }, &MeasureSpec::Uniform, 0).unwrap(),
    ];
    let (mut checked, mut failures) = (0usize, 0usize);
    let (mut off, mut on, mut dom) = (0.0f64, 0.0f64, 0.0f64);
    for (s, space) in spaces.iter().enumerate() {
        for f in random_nonnegative(space.n(), 10, 40 + s as u64) {
            let mf = maximal(space, &f).unwrap();
            for t in quantile_thresholds(&mf, &[0.5, 0.7, 0.9]) {
                let tr = truncate(space, &f, t).unwrap();
                let b = check_truncation_bounds(space, &f, &tr).unwrap();
                checked += 1;
                failures += b.violations.len();
                off = off.max(b.max_off_level_ratio);
                on = on.max(b.max_on_level_ratio / b.on_level_constant);
                dom = dom.max(b.max_domination_ratio / b.domination_constant);
            }
        }
    }
    Outcome {
        passed: failures == 0 && checked >= 50,
        detail: format!(
            "{checked} truncations, {failures} violations; worst ratios to bound: off {off:.4}, on {on:.4}, domination {dom:.4}"
        ),
    }
}

fn layer_cake() -> Outcome {
    let cases = random_cases(20, 5).expect("cases");
    let mut worst = 0.0f64;
    for (k, case) in cases.iter().enumerate() {
        let p = [1.5, 2.0, 3.0][k % 3];
        let eps = (p - 1.0) * [0.05, 0.3, 0.8][k % 3];
        let f = &case.functions[k % case.functions.len()];
        let top = maximal(&case.space, f).unwrap().values().iter().copied().fold(0.0, f64::max);
        let t0 = top * [1e-3, 0.2, 0.6, 0.95][k % 4];
        let r = layer_cake_identity_check(&case.space, &case.weight, f, p, eps, t0).unwrap();
        worst = worst.max(r.max_residual);
    }
    Outcome { passed: worst <= 1e-9, detail: format!("20 cases, max relative residual {worst:.3e}") }
}

fn power_weight_classification() -> Outcome {
    let ap_at = |alpha: f64, n: usize| {
        let s = generate(SpaceKind::Grid1dMidpoint { n, a: -1.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
        ap_constant(&s, &power_weight(&s, alpha).unwrap(), 2.0).unwrap().constant
    };
    let inside = ap_at(0.5, 1024) / ap_at(0.5, 256);
    let outside = ap_at(1.5, 1024) / ap_at(1.5, 256);
    Outcome {
        passed: inside <= 1.1 && outside >= 1.5,
        detail: format!("alpha=0.5 factor {inside:.4} (<= 1.1), alpha=1.5 factor {outside:.4} (>= 1.5)"),
    }
}

fn pipeline() -> Outcome {
    let s = generate(SpaceKind::Grid1dMidpoint { n: 256, a: -1.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
    let w = power_weight(&s, 0.5).unwrap();
    let family = standard_family(&s, &w, 2.0, 16, 7).unwrap();
    let r = self_improve_report(&s, &w, &SelfImprovementConfig::new(2.0, family)).unwrap();
    let absorption = r.per_function.iter().flat_map(|f| &f.absorption).all(|a| a.holds);
    let improved = r.per_function.iter().all(|f| f.improved_lhs <= f.improved_rhs);
    let frozen = rel(r.epsilon, FROZEN_EPSILON) <= REGRESSION_RTOL && rel(r.c2, FROZEN_C2) <= REGRESSION_RTOL;
    Outcome {
        passed: r.epsilon > 0.0 && r.epsilon < 1.0 && absorption && improved && frozen,
        detail: format!(
            "eps {:.6}, C2 {:.6}, {} members, absorption {}, improved inequality {}, regression {}",
            r.epsilon,
            r.c2,
            r.per_function.len(),
            absorption,
            improved,
            frozen
        ),
    }
}

fn oracle_equivalence() -> Outcome {
    let corpus = standard_corpus().unwrap();
    let mut worst = 0.0f64;
    for (k, fx) in corpus.iter().enumerate() {
        let n = fx.space.n();
        let w = Weight::new(random_nonnegative(n, 1, 900 + k as u64)[0].values().iter().map(|v| 0.05 + v).collect())
            .unwrap();
        for f in random_nonnegative(n, 2, 700 + k as u64) {
            let fast = maximal(&fx.space, &f).unwrap();
            let slow = maximal_oracle(&fx.space, &f).unwrap();
            for (a, b) in fast.values().iter().zip(slow.values()) {
                worst = worst.max(rel(*a, *b));
            }
        }
        for p in [1.5, 2.0, 3.0] {
            let a = ap_constant(&fx.space, &w, p).unwrap().constant;
            worst = worst.max(rel(a, ap_constant_oracle(&fx.space, &w, p).unwrap()));
        }
        worst = worst.max(rel(doubling_constant(&fx.space), doubling_oracle(&fx.space, 1000, true)));
    }
    Outcome { passed: worst <= 1e-12, detail: format!("{} corpus spaces, max relative gap {worst:.3e}", corpus.len()) }
}

fn performance() -> Outcome {
    let n = 2048;
    let f = ScalarField::new((0..n).map(|i| ((i * 37) % 101) as f64).collect()).unwrap();
    let start = Instant::now();
    let s = generate(SpaceKind::Grid1d { n, a: 0.0, b: 1.0 }, &MeasureSpec::Uniform, 0).unwrap();
    let mf = maximal_with(&s, &f, Strategy::Sequential).unwrap();
    let elapsed = start.elapsed();
    Outcome {
        passed: elapsed <= Duration::from_secs(2) && mf.len() == n,
        detail: format!("grid1d(2048) sequential maximal incl. index build {:.3}s", elapsed.as_secs_f64()),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("duality identity", 10, duality),
        ("Lerner pointwise bound", 20, lerner),
        ("weighted Holder and A_p doubling", 20, holder_and_doubling),
        ("truncation lemma", 30, truncation),
        ("layer-cake exactness", 5, layer_cake),
        ("power-weight classification", 60, power_weight_classification),
        ("self-improvement pipeline", 60, pipeline),
        ("oracle equivalence", 60, oracle_equivalence),
        ("performance gate", 2, performance),
    ];
    let mut all = true;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed().as_secs_f64();
        let within = elapsed <= *budget as f64;
        let passed = outcome.passed && within;
        all &= passed;
        println!(
            "criterion {}: {} {name}: {} [{elapsed:.2}s of {budget}s]",
            k + 1,
            if passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
