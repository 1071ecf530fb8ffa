use brwlab_core::brw::{simulate_brw, OffspringDist, RunConfig};
use brwlab_core::kernel::build_kernel;
use brwlab_core::spectral::{dirichlet_rho, return_series, return_series_with, StrategyChoice, DEFAULT_SUPPORT_CAP};
use brwlab_core::{ArithmeticMode, GraphFamily, Kernel, KernelSpec, VertexAddr};
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn product_kernel(w: Rational64, right: Rational64) -> Kernel {
    build_kernel(
        KernelSpec::Product(vec![
            (KernelSpec::Simple, w),
            (KernelSpec::BiasedLine { right }, Rational64::from_integer(1) - w),
        ]),
        GraphFamily::product(vec![GraphFamily::hom_tree(3).unwrap(), GraphFamily::Line]).unwrap(),
    )
    .unwrap()
}

fn fraction() -> impl Strategy<Value = Rational64> {
    (1i64..10).prop_map(|n| Rational64::new(n, 10))
}

fn vertex() -> impl Strategy<Value = VertexAddr> {
    (proptest::collection::vec(0u8..2, 0..5), 0u8..3, -6i64..6).prop_map(|(rest, first, n)| {
        let mut word = vec![first];
        word.extend(rest);
        VertexAddr::tuple([VertexAddr::word(&word), VertexAddr::Int(n)])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rows_are_stochastic(w in fraction(), right in fraction(), v in vertex()) {
        let k = product_kernel(w, right);
        let row = k.row::<BigRational>(&v).unwrap();
        prop_assert_eq!(row.total(), BigRational::one());
        prop_assert!(row.entries.iter().all(|(_, p)| *p > BigRational::zero()));
    }

    #[test]
    fn strategies_agree_and_stay_probabilities(w in fraction(), right in fraction()) {
        let k = product_kernel(w, right);
        let auto = return_series(&k, 12, ArithmeticMode::Rational).unwrap();
        let raw = return_series_with(&k, &k.origin(), 12, ArithmeticMode::Rational, StrategyChoice::SparseOnly, DEFAULT_SUPPORT_CAP)
            .unwrap();
        let (a, b) = (auto.exact.unwrap(), raw.exact.unwrap());
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a[0], &BigRational::one());
        prop_assert!(a.iter().all(|p| *p >= BigRational::zero() && *p <= BigRational::one()));
    }

    #[test]
    fn dirichlet_grows_with_the_ball(w in fraction(), right in fraction(), r in 1u64..4) {
        let k = product_kernel(w, right);
        let small = dirichlet_rho(&k, r, 100_000).unwrap();
        let large = dirichlet_rho(&k, r + 1, 100_000).unwrap();
        prop_assert!(small.lower <= small.rho + 1e-12 && small.rho <= small.upper + 1e-12);
        prop_assert!(large.rho >= small.rho - 1e-9);
        prop_assert!(large.rho <= 1.0 + 1e-12);
    }

    #[test]
    fn simulation_is_a_function_of_its_seed(seed in any::<u64>(), right in fraction()) {
        let k = product_kernel(Rational64::new(1, 2), right);
        let mu = OffspringDist::new(vec![1, 2], vec![0.8, 0.2]).unwrap();
        let cfg = RunConfig::new(k, mu, 12, seed);
        let a = simulate_brw(&cfg).unwrap();
        let b = simulate_brw(&cfg).unwrap();
        prop_assert_eq!(&a.visited, &b.visited);
        prop_assert_eq!(&a.populations, &b.populations);
        // populations never shrink under an offspring law supported on {1, 2}
        prop_assert!(a.populations.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(a.edges.iter().all(|(x, y)| a.visited.contains_key(x) && a.visited.contains_key(y)));
    }
}
