use std::time::Instant;

use brwlab_core::graph::GraphFamily;
use brwlab_core::kernel::{build_kernel, reversibility_check, KernelSpec};
use brwlab_core::VertexAddr;

fn families() -> Vec<GraphFamily> {
    let t3 = GraphFamily::hom_tree(3).unwrap();
    vec![
        t3.clone(),
        GraphFamily::Line,
        GraphFamily::Hammock,
        GraphFamily::product(vec![t3.clone(), GraphFamily::Line]).unwrap(),
        GraphFamily::product(vec![t3.clone(), t3.clone()]).unwrap(),
        GraphFamily::glue_at_origins(vec![GraphFamily::Line, GraphFamily::Line]).unwrap(),
        GraphFamily::glue(vec![GraphFamily::Hammock, t3], vec![VertexAddr::htree(&[]), VertexAddr::word(&[])]).unwrap(),
    ]
}

#[test]
fn detailed_balance_on_radius_four_balls() {
    for g in families() {
        let start = Instant::now();
        let k = build_kernel(KernelSpec::Simple, g.clone()).unwrap();
        let rep = reversibility_check(&k, 10, 4).unwrap();
        let max_deg = k.graph().ball(4, 1_000_000).unwrap().iter().map(|v| g.degree(v).unwrap()).max().unwrap();
        let min_deg = k.graph().ball(4, 1_000_000).unwrap().iter().map(|v| g.degree(v).unwrap()).min().unwrap();
        assert!(rep.max_ratio_f64() <= max_deg as f64 / min_deg as f64 + 1e-12);
        eprintln!("{g}: ball {} region {} pairs {} C {:.4} in {:?}", rep.ball_size, rep.region_size, rep.pairs_checked, rep.max_ratio_f64(), start.elapsed());
    }
}
