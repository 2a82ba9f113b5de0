mod support;

use opsim_core::formulations::{compute_ptdf, ProblemTemplate};
use opsim_core::opt::Sense;
use opsim_core::sequence::{compute_execution_order, DecisionModelSpec, EmulatorSpec, ModelId, SimulationSequence, Span};
use opsim_core::solver::{BundledSolver, SolveStatus, Solver};
use opsim_core::store::{Layout, MemoryStorage, ResultKey, ResultKind, ResultStore, StoreConfig, MIN_WRITE_BATCH};
use opsim_core::time::{Duration, Timestamp};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::oracle::SmallLp;
use support::ptdf_oracle::{random_network, sensitivity_identity};

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn any_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => any::<f64>(),
        1 => Just(-0.0),
        1 => Just(f64::MIN_POSITIVE / 4.0),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn store_round_trip_is_bit_exact(
        (horizon, comps, written, realized, compress) in (1usize..6, 1usize..5, 1usize..12).prop_flat_map(|(h, c, e)| (
            Just(h),
            Just(c),
            prop::collection::vec(prop::collection::vec(any_value(), h * c), e),
            0..=h,
            any::<bool>(),
        ))
    ) {
        let cfg = StoreConfig { write_batch_min: MIN_WRITE_BATCH, compress: Some(compress), ..Default::default() };
        let key = ResultKey::new("M", ResultKind::Variable, "ActivePower");
        let layout = Layout {
            components: (0..comps).map(|c| format!("c{c}")).collect(),
            horizon,
            resolution: Duration::hours(1),
        };
        let mut store = ResultStore::create(cfg.clone(), MemoryStorage::default()).unwrap();
        store.register_layout(key.clone(), layout).unwrap();
        for (e, data) in written.iter().enumerate() {
            store.write_result(&key, Timestamp(3600 * e as i64), data, realized).unwrap();
        }
        store.close().unwrap();
        let mut reopened = ResultStore::open(cfg, store.into_storage()).unwrap();
        prop_assert_eq!(reopened.keys(), vec![key.clone()]);
        for (e, data) in written.iter().enumerate() {
            let m = reopened.read_result(&key, Timestamp(3600 * e as i64)).unwrap();
            prop_assert_eq!(bits(&m.data), bits(data));
            prop_assert_eq!(m.realized_rows, realized);
        }
    }

    #[test]
    fn execution_counts_follow_intervals(
        inner in prop::sample::select(vec![1i64, 2, 3, 4, 6, 8, 12, 24]),
        days in 1usize..5,
    ) {
        let spec = |name: &str, h: i64, horizon: usize| DecisionModelSpec {
            name: name.into(),
            template: ProblemTemplate::unit_commitment(),
            horizon_steps: horizon,
            resolution: Duration::hours(1),
            interval: Duration::hours(h),
            solver: Default::default(),
            chronology: None,
        };
        let seq = SimulationSequence {
            models: vec![spec("UC", 24, 48), spec("ED", inner, inner as usize)],
            emulator: Some(EmulatorSpec {
                name: "Em".into(),
                template: ProblemTemplate::economic_dispatch(),
                resolution: Duration::hours(1),
                solver: Default::default(),
            }),
            feedforwards: vec![],
            chronology: Default::default(),
        };
        let order = compute_execution_order(&seq, &Span { start: Timestamp(0), steps: days });
        prop_assert_eq!(order.count(ModelId::Decision(0)), days);
        prop_assert_eq!(order.count(ModelId::Decision(1)), days * 24 / inner as usize);
        prop_assert_eq!(order.count(ModelId::Emulator), days * 24);
        let rank = |m: ModelId| match m {
            ModelId::Decision(k) => k,
            ModelId::Emulator => usize::MAX,
        };
        let ex: Vec<_> = order.iter().collect();
        for w in ex.windows(2) {
            prop_assert!((w[0].issue_time, rank(w[0].model)) < (w[1].issue_time, rank(w[1].model)));
        }
    }

    #[test]
    fn lp_optimum_is_feasible_and_no_worse_than_a_known_point(seed in any::<u64>()) {
        // rows are built around x0 so it is feasible by construction
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=8);
        let lb: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..0.0)).collect();
        let ub: Vec<f64> = lb.iter().map(|l| l + rng.gen_range(0.5..8.0)).collect();
        let x0: Vec<f64> = lb.iter().zip(&ub).map(|(l, u)| rng.gen_range(*l..*u)).collect();
        let rows = (0..m)
            .map(|_| {
                let a: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.7) { rng.gen_range(-3.0..3.0) } else { 0.0 }).collect();
                let v: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
                match rng.gen_range(0..3) {
                    0 => (a, Sense::Le, v + rng.gen_range(0.0..2.0)),
                    1 => (a, Sense::Ge, v - rng.gen_range(0.0..2.0)),
                    _ => (a, Sense::Eq, v),
                }
            })
            .collect();
        let lp = SmallLp {
            c: (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect(),
            lb,
            ub,
            rows,
            integral: vec![false; n],
        };
        let c = lp.to_container();
        let r = BundledSolver::default().solve_lp(&c);
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        prop_assert!(c.max_violation(&r.primal) <= 1e-7);
        prop_assert!(r.objective <= c.objective_value(&x0) + 1e-7);
    }

    #[test]
    fn civil_time_round_trips(secs in -2_000_000_000i64..4_000_000_000i64) {
        let t = Timestamp(secs);
        let (y, mo, d, h, mi, s) = t.to_civil();
        prop_assert_eq!(Timestamp::from_civil(y, mo, d, h, mi, s), t);
    }

    #[test]
    fn ptdf_sensitivity_identity_holds(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sys, slack) = random_network(&mut rng, n);
        let ptdf = compute_ptdf(&sys, slack).unwrap();
        let (dev, row_sum) = sensitivity_identity(&sys, &ptdf);
        prop_assert!(dev <= 1e-9, "deviation {}", dev);
        prop_assert!(row_sum <= 1e-9, "row sum {}", row_sum);
        prop_assert!(ptdf.iter().all(|r| r[slack] == 0.0));
    }
}
