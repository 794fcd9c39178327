use proptest::prelude::*;

use muckenhoupt::family::random_nonnegative;
use muckenhoupt::oracle::{ap_constant_oracle, doubling_oracle, maximal_oracle};
use muckenhoupt::selfimprove::{epsilon_search, estar_constant, estar_sup};
use muckenhoupt::weights::{conjugate_exponent, lognormal_weight};
use muckenhoupt::{
    ap_constant, doubling_constant, dual_weight, enumerate_distinct_balls, generate, layer_cake_identity_check,
    maximal, maximal_with, validate_metric, whitney_cover, Ball, FiniteMetricMeasureSpace, MeasureSpec, PointSet,
    ScalarField, SpaceKind, Strategy as Exec, Weight,
};

fn space_strategy() -> impl Strategy<Value = FiniteMetricMeasureSpace> {
    (0usize..4, 2usize..24, 1usize..4, any::<u64>()).prop_map(|(kind, n, dim, seed)| {
        let kind = match kind {
            0 => SpaceKind::RandomEuclidean { n, dim },
            1 => SpaceKind::Grid1d { n, a: 0.0, b: 1.0 },
            2 => SpaceKind::Grid2d { nx: 1 + n % 5, ny: 2 + dim },
            _ => SpaceKind::Ultrametric { branching: 2 + dim % 2, depth: 1 + (n % 3) as u32 },
        };
        generate(kind, &MeasureSpec::Random { lo: 0.1, hi: 10.0 }, seed).unwrap()
    })
}

fn case_strategy() -> impl Strategy<Value = (FiniteMetricMeasureSpace, Weight, ScalarField, ScalarField)> {
    (space_strategy(), any::<u64>()).prop_map(|(s, seed)| {
        let n = s.n();
        let w = lognormal_weight(n, 1.0, seed).unwrap();
        let mut fs = random_nonnegative(n, 2, seed ^ 0x5eed);
        let g = fs.pop().unwrap();
        let f = fs.pop().unwrap();
        (s, w, f, g)
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_spaces_are_metric(s in space_strategy()) {
        let dist: Vec<Vec<f64>> = (0..s.n()).map(|i| s.row(i).to_vec()).collect();
        prop_assert!(validate_metric(&dist, s.measure()).is_pass());
    }

    #[test]
    fn maximal_matches_oracle((s, _w, f, _g) in case_strategy()) {
        let fast = maximal(&s, &f).unwrap();
        let slow = maximal_oracle(&s, &f).unwrap();
        for (a, b) in fast.values().iter().zip(slow.values()) {
            prop_assert!(rel(*a, *b) <= 1e-12);
        }
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise((s, _w, f, _g) in case_strategy()) {
        let a = maximal_with(&s, &f, Exec::Sequential).unwrap();
        let b = maximal_with(&s, &f, Exec::Parallel).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn maximal_is_sublinear_monotone_and_dominating((s, _w, f, g) in case_strategy(), lambda in -5.0f64..5.0) {
        let mf = maximal(&s, &f).unwrap();
        let mg = maximal(&s, &g).unwrap();
        let sum = ScalarField::new(f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect()).unwrap();
        let msum = maximal(&s, &sum).unwrap();
        let scaled = maximal(&s, &ScalarField::new(f.values().iter().map(|v| lambda * v).collect()).unwrap()).unwrap();
        let upper = ScalarField::new(f.values().iter().zip(g.values()).map(|(a, b)| a.max(*b)).collect()).unwrap();
        let mupper = maximal(&s, &upper).unwrap();
        for x in 0..s.n() {
            let (a, b) = (mf.values()[x], mg.values()[x]);
            prop_assert!(msum.values()[x] <= (a + b) * (1.0 + 1e-12));
            prop_assert!(close(scaled.values()[x], lambda.abs() * a, 1e-12));
            prop_assert!(mupper.values()[x] >= a * (1.0 - 1e-12));
            prop_assert!(a >= f.values()[x] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn ap_matches_oracle_and_is_scale_invariant((s, w, _f, _g) in case_strategy(), p in 1.1f64..4.0, lambda in 1e-3f64..1e3) {
        let ap = ap_constant(&s, &w, p).unwrap().constant;
        prop_assert!(ap >= 1.0 - 1e-12);
        prop_assert!(rel(ap, ap_constant_oracle(&s, &w, p).unwrap()) <= 1e-12);
        let scaled = ap_constant(&s, &w.scaled(lambda).unwrap(), p).unwrap().constant;
        prop_assert!(rel(scaled, ap) <= 1e-12);
    }

    #[test]
    fn ap_decreases_in_p((s, w, _f, _g) in case_strategy(), p in 1.1f64..3.0, dq in 0.0f64..2.0) {
        let a = ap_constant(&s, &w, p).unwrap().constant;
        let b = ap_constant(&s, &w, p + dq).unwrap().constant;
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn duality_identity((s, w, _f, _g) in case_strategy(), p in 1.2f64..4.0) {
        let ap = ap_constant(&s, &w, p).unwrap().constant;
        let dual = ap_constant(&s, &dual_weight(&w, p).unwrap(), conjugate_exponent(p)).unwrap().constant;
        prop_assert!(rel(dual, ap.powf(1.0 / (p - 1.0))) <= 1e-9);
    }

    #[test]
    fn every_ball_is_enumerated(s in space_strategy(), c in any::<prop::sample::Index>(), r in 0.0f64..3.0) {
        let family = enumerate_distinct_balls(&s);
        let c = c.index(s.n());
        let ball = Ball::new(&s, c, r.max(1e-9)).unwrap();
        prop_assert!(family.find_set(&ball.members).is_some());
    }

    #[test]
    fn doubling_matches_oracle(s in space_strategy()) {
        let exact = doubling_constant(&s);
        prop_assert!(exact >= 1.0);
        prop_assert!(doubling_oracle(&s, 64, false) <= exact * (1.0 + 1e-12));
        prop_assert!(rel(doubling_oracle(&s, 64, true), exact) <= 1e-12);
    }

    #[test]
    fn whitney_cover_invariants(s in space_strategy(), mask_seed in any::<u64>()) {
        let n = s.n();
        let mut mask: Vec<bool> = (0..n).map(|i| (mask_seed >> (i % 64)) & 1 == 1).collect();
        mask[0] = true;
        mask[n - 1] = false;
        let omega = PointSet::from_mask(&mask);
        let cover = whitney_cover(&s, &omega).unwrap();
        let mult = cover.multiplicity();
        for x in 0..n {
            prop_assert_eq!(mult[x] > 0, mask[x]);
        }
        for b in &cover.balls {
            let to_complement = (0..n).filter(|&u| !mask[u]).map(|u| s.dist(b.ball.center, u)).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(b.ball.radius, to_complement / 8.0);
            prop_assert!(b.ball.members.iter().all(|&u| mask[u]));
        }
        prop_assert_eq!(cover.overlap_max, *mult.iter().max().unwrap());
    }

    #[test]
    fn layer_cake_routes_agree((s, w, f, _g) in case_strategy(), p in 1.2f64..4.0, e in 0.01f64..0.99, frac in 0.001f64..1.5) {
        let top = maximal(&s, &f).unwrap().values().iter().copied().fold(0.0, f64::max);
        let r = layer_cake_identity_check(&s, &w, &f, p, e * (p - 1.0), frac * top).unwrap();
        prop_assert!(r.max_residual <= 1e-9, "{:?}", r);
    }

    #[test]
    fn estar_sweep_dominates_every_threshold((s, w, f, _g) in case_strategy(), p in 1.2f64..3.0, q in 0.05f64..1.0) {
        let mf = maximal(&s, &f).unwrap();
        let (_, sup) = estar_sup(&s, &w, p, &f, &mf);
        let mut sorted = mf.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        let t = sorted[(q * (sorted.len() - 1) as f64) as usize];
        let at_t = estar_constant(&s, &w, p, &f, t).unwrap();
        prop_assert!(at_t <= sup * (1.0 + 1e-12));
    }

    #[test]
    fn epsilon_search_monotone_in_cap((s, w, f, g) in case_strategy(), cap in 1.0f64..50.0, extra in 0.0f64..50.0) {
        let family = vec![f, g];
        let a = epsilon_search(&s, &w, 2.0, &family, 20, cap).unwrap();
        let b = epsilon_search(&s, &w, 2.0, &family, 20, cap + extra).unwrap();
        prop_assert!(b.epsilon >= a.epsilon);
        prop_assert!(b.epsilon < 1.0);
    }
}
