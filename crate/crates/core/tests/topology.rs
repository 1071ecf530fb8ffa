use std::collections::{BTreeMap, BTreeSet};

use brwlab_core::brw::{
    critical_offspring, simulate_brw, GenerationState, OffspringDist, Retention, RunConfig, TraceRecord,
};
use brwlab_core::kernel::build_kernel;
use brwlab_core::spectral::return_series;
use brwlab_core::topology::*;
use brwlab_core::weight::ArithmeticMode;
use brwlab_core::{Error, GraphFamily, Kernel, KernelSpec, VertexAddr};
use num_rational::Rational64;

fn t3() -> GraphFamily {
    GraphFamily::hom_tree(3).unwrap()
}

fn half_product(a: GraphFamily, b: GraphFamily) -> Kernel {
    let h = Rational64::new(1, 2);
    build_kernel(
        KernelSpec::Product(vec![(KernelSpec::Simple, h), (KernelSpec::Simple, h)]),
        GraphFamily::product(vec![a, b]).unwrap(),
    )
    .unwrap()
}

fn path_trace(lo: i64, hi: i64, finals: &[i64]) -> TraceRecord {
    let visited: BTreeMap<VertexAddr, u32> = (lo..=hi).map(|x| (VertexAddr::Int(x), x.unsigned_abs() as u32)).collect();
    let edges: BTreeSet<(VertexAddr, VertexAddr)> = (lo..hi).map(|x| (VertexAddr::Int(x), VertexAddr::Int(x + 1))).collect();
    TraceRecord {
        origin: VertexAddr::Int(0),
        seed: 0,
        replication: 0,
        visited,
        edges,
        populations: vec![1],
        retention: Retention::FinalOnly,
        states: Vec::new(),
        last: GenerationState {
            generation: 20,
            counts: finals.iter().map(|&x| (VertexAddr::Int(x), 1)).collect(),
            total: finals.len() as u64,
        },
        truncated: false,
        color: None,
    }
}

#[test]
fn ends_of_paths() {
    let one_sided = ends_profile(&GraphFamily::Line, &path_trace(0, 20, &[20]), &[5]).unwrap();
    assert_eq!(one_sided.components, vec![1]);
    let two_sided = ends_profile(&GraphFamily::Line, &path_trace(-20, 20, &[-20, 20]), &[5, 19, 20]).unwrap();
    assert_eq!(two_sided.components, vec![2, 2, 0]);
}

#[test]
fn every_far_final_particle_is_in_a_counted_component() {
    let k = half_product(t3(), GraphFamily::Line);
    let mu = critical_offspring(k.analytic_rho().unwrap()).unwrap();
    for seed in 0..20 {
        let trace = simulate_brw(&RunConfig::new(k.clone(), mu.clone(), 60, seed)).unwrap();
        let radii = [0, 2, 4, 6, 8];
        let profile = ends_profile(k.graph(), &trace, &radii).unwrap();
        for (&r, &c) in radii.iter().zip(&profile.components) {
            let far = trace.last.counts.keys().filter(|v| k.graph().ball_distance(v).unwrap() > r).count() as u64;
            assert!(c <= far);
            assert_eq!(c == 0, far == 0);
        }
    }
}

#[test]
fn purple_is_the_intersection() {
    let k = half_product(t3(), t3());
    let mu = critical_offspring(k.analytic_rho().unwrap()).unwrap();
    let o = k.origin();
    let same = purple_experiment(&k, &mu, &o, &o, 15, 4, 1 << 20).unwrap();
    assert!(same.purple_at(0) >= 1);
    let far = VertexAddr::tuple([VertexAddr::word(&[0, 1]), VertexAddr::word(&[2])]);
    for c in [same, purple_experiment(&k, &mu, &o, &far, 15, 9, 1 << 20).unwrap()] {
        let inter: BTreeSet<String> = c.red.intersection(&c.blue).cloned().collect();
        assert_eq!(inter, c.purple);
        assert!(c.purple_by_horizon.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*c.purple_by_horizon.last().unwrap(), c.purple.len() as u64);
    }
}

fn fiber_last_hit(k: &Kernel, mu: &OffspringDist, generations: u32, seed: u64) -> Option<u32> {
    let mut cfg = RunConfig::new(k.clone(), mu.clone(), generations, seed);
    cfg.retention = Retention::All;
    let trace = simulate_brw(&cfg).unwrap();
    fiber_hit_stats(&trace, 0, &VertexAddr::word(&[])).unwrap().last_hit
}

#[test]
fn fiber_hits() {
    let k = half_product(t3(), GraphFamily::Line);
    let mu = critical_offspring(k.analytic_rho().unwrap()).unwrap();
    let mut cfg = RunConfig::new(k.clone(), mu.clone(), 10, 1);
    cfg.retention = Retention::All;
    let trace = simulate_brw(&cfg).unwrap();
    let stats = fiber_hit_stats(&trace, 0, &VertexAddr::word(&[])).unwrap();
    assert_eq!(stats.hits[0], 0);
    assert!(stats.hits.windows(2).all(|w| w[0] < w[1]));
    cfg.retention = Retention::FinalOnly;
    let trace = simulate_brw(&cfg).unwrap();
    assert!(matches!(fiber_hit_stats(&trace, 0, &VertexAddr::word(&[])), Err(Error::Unavailable(_))));
}

#[test]
fn critical_fiber_hits_stabilise() {
    let k = half_product(t3(), GraphFamily::Line);
    let mu = critical_offspring(k.analytic_rho().unwrap()).unwrap();
    let median = |g: u32| {
        let mut v: Vec<u32> = (0..50).map(|s| fiber_last_hit(&k, &mu, g, s).unwrap()).collect();
        v.sort();
        f64::from(v[25])
    };
    let (m50, m100) = (median(50), median(100));
    assert!(m100 < 1.1 * m50.max(1.0), "{m50} -> {m100}");
}

#[test]
fn recurrent_fiber_is_hit_at_the_end() {
    let k = half_product(t3(), GraphFamily::Line);
    let m = 1.2 / k.analytic_rho().unwrap();
    let mu = OffspringDist::new(vec![1, 2], vec![2.0 - m, m - 1.0]).unwrap();
    for seed in 0..20 {
        assert_eq!(fiber_last_hit(&k, &mu, 50, seed), Some(50));
    }
}

fn lazy_series() -> brwlab_core::spectral::ReturnSeries {
    return_series(&lazy_tree_kernel(), 1500, ArithmeticMode::Float).unwrap()
}

#[test]
fn supercritical_lags() {
    let s = lazy_series();
    let r7 = min_supercritical_lag(Rational64::new(7, 10), &s).unwrap();
    assert!((r7.rho - 0.9296630).abs() < 1e-6);
    assert!(r7.ratio > 1.0 && r7.previous_ratio <= 1.0);
    // direct scan against the rounded radius
    let scan = (1..=1500).find(|&k| s.p(k) > 0.929_662_090_286_615_7f64.powi(k as i32)).unwrap();
    assert_eq!(scan, r7.k);
    assert!(matches!(min_supercritical_lag(Rational64::new(1, 2), &s), Err(Error::Domain(_))));
    let r9 = min_supercritical_lag(Rational64::new(9, 10), &s).unwrap();
    let r6 = min_supercritical_lag(Rational64::new(3, 5), &s).unwrap();
    assert!(r9.k <= r6.k);
    assert_eq!(r9.exact_verified, Some(true));
    // the mirror image bias has the same radius
    assert_eq!(min_supercritical_lag(Rational64::new(1, 10), &s).unwrap().k, r9.k);
}

#[test]
fn embedded_gw_pure_walk() {
    let k = biased_product_kernel(Rational64::new(7, 10)).unwrap();
    let line = EmbeddedLine::Fiber {
        factor: 0,
        vertex: VertexAddr::word(&[]),
    };
    let mut cfg = GwConfig::new(k, OffspringDist::constant(1).unwrap(), line, 1, 10_000, 3);
    cfg.generations = 4;
    let stats = embedded_gw_stats(&cfg).unwrap();
    assert_eq!(stats.reference, 0.5);
    assert!(stats.sequences.iter().all(|s| s[0] == 1 && s[1] <= 1));
    assert!(stats.z.abs() <= 4.0);
}

#[test]
fn embedded_gw_first_moment_and_survival() {
    let s = lazy_series();
    let p = Rational64::new(7, 10);
    let lag = min_supercritical_lag(p, &s).unwrap();
    let k = biased_product_kernel(p).unwrap();
    let mu = critical_offspring(k.analytic_rho().unwrap()).unwrap();
    let line = EmbeddedLine::Fiber {
        factor: 0,
        vertex: VertexAddr::word(&[]),
    };
    let mut cfg = GwConfig::new(k, mu, line, lag.k, 3000, 17);
    cfg.observed_lags = 3;
    let stats = embedded_gw_stats(&cfg).unwrap();
    assert_eq!(stats.route, GwRoute::Lumped);
    assert!((stats.reference - stats.critical_reference).abs() < 1e-9);
    assert!(stats.reference > 1.0);
    assert!(stats.z.abs() <= 3.0, "z = {}", stats.z);
    assert!(stats.survival_interval.0 > 0.0);
    for seq in &stats.sequences {
        assert_eq!(seq[0], 1);
        assert!(seq[..seq.len() - 1].iter().all(|&y| y > 0));
    }
}

#[test]
fn lumped_and_vertex_routes_agree() {
    let p = Rational64::new(9, 10);
    let k = biased_product_kernel(p).unwrap();
    let mu = critical_offspring(k.analytic_rho().unwrap()).unwrap();
    let line = EmbeddedLine::Fiber {
        factor: 0,
        vertex: VertexAddr::word(&[]),
    };
    let mut means = Vec::new();
    for route in [GwRoute::Lumped, GwRoute::Vertex] {
        let mut cfg = GwConfig::new(k.clone(), mu.clone(), line.clone(), 10, 4000, 5);
        cfg.generations = 12;
        cfg.route = Some(route);
        let stats = embedded_gw_stats(&cfg).unwrap();
        assert_eq!(stats.route, route);
        assert!(stats.z.abs() <= 4.0, "{route:?}: z = {}", stats.z);
        means.push((stats.mean_y1, stats.std_error_y1, stats.reference));
    }
    assert!((means[0].2 - means[1].2).abs() < 1e-12);
    let diff = (means[0].0 - means[1].0) / (means[0].1.hypot(means[1].1));
    assert!(diff.abs() <= 4.0);
}

#[test]
fn embedded_gw_on_a_spine() {
    let h = Rational64::new(1, 2);
    let k = build_kernel(
        KernelSpec::Product(vec![(KernelSpec::Simple, h), (KernelSpec::HeightBiased { down: Rational64::new(7, 10) }, h)]),
        GraphFamily::product(vec![t3(), t3()]).unwrap(),
    )
    .unwrap();
    let line = EmbeddedLine::SpineFiber {
        factor: 0,
        vertex: VertexAddr::word(&[]),
        spine_factor: 1,
    };
    let mut cfg = GwConfig::new(k, OffspringDist::new(vec![1, 2], vec![0.9, 0.1]).unwrap(), line, 6, 3000, 2);
    cfg.generations = 8;
    let stats = embedded_gw_stats(&cfg).unwrap();
    assert_eq!(stats.route, GwRoute::Vertex);
    assert!(stats.z.abs() <= 4.0, "z = {}", stats.z);
}
