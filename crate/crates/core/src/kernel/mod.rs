//! Random-walk transition kernels.
//!
//! A [`Kernel`] pairs a [`KernelSpec`] with the graph it runs on and hands out
//! finite transition rows. Rows list the source first when the kernel has stay
//! mass, then neighbours in the graph's canonical order.

mod reversibility;

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphFamily, SpineEmbedding, VertexAddr};
use crate::weight::{format_rational, Weight};

pub use reversibility::{reversibility_check, ReversibilityReport};

/// Description of a transition kernel, independent of the graph it is built on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelSpec {
    /// Each neighbour with probability `1/deg`.
    Simple,
    /// Stay with probability `stay`, otherwise step with `base`.
    Lazy { base: Box<KernelSpec>, stay: Rational64 },
    /// Right with probability `right`, left otherwise. Line only.
    BiasedLine { right: Rational64 },
    /// On `T_3`: towards lower height with probability `down`, to each of the two
    /// higher neighbours with `(1 - down) / 2`.
    HeightBiased { down: Rational64 },
    /// Pick coordinate `k` with probability `alpha_k` and step it with its kernel.
    Product(Vec<(KernelSpec, Rational64)>),
}

impl KernelSpec {
    pub fn lazy(base: KernelSpec, stay: Rational64) -> Self {
        KernelSpec::Lazy { base: Box::new(base), stay }
    }

    /// Probability of staying put, identical at every vertex.
    pub fn stay_mass(&self) -> Rational64 {
        match self {
            KernelSpec::Simple | KernelSpec::BiasedLine { .. } | KernelSpec::HeightBiased { .. } => Rational64::zero(),
            KernelSpec::Lazy { base, stay } => stay + (Rational64::one() - stay) * base.stay_mass(),
            KernelSpec::Product(fs) => fs.iter().map(|(k, a)| a * k.stay_mass()).sum(),
        }
    }

    /// True for `Simple` wrapped in any number of `Lazy` layers.
    pub fn is_lazy_simple(&self) -> bool {
        match self {
            KernelSpec::Simple => true,
            KernelSpec::Lazy { base, .. } => base.is_lazy_simple(),
            _ => false,
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Simple => f.write_str("simple"),
            KernelSpec::Lazy { base, stay } => write!(f, "lazy({base}, {})", format_rational(stay)),
            KernelSpec::BiasedLine { right } => write!(f, "biasedline({})", format_rational(right)),
            KernelSpec::HeightBiased { down } => write!(f, "heightbiased({})", format_rational(down)),
            KernelSpec::Product(parts) => {
                f.write_str("product(")?;
                for (i, (k, a)) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {k}@{}", format_rational(a), i + 1)?;
                }
                f.write_str(")")
            }
        }
    }
}

fn open_unit(name: &str, p: &Rational64) -> Result<()> {
    if *p <= Rational64::zero() || *p >= Rational64::one() {
        return Err(Error::config(format!("{name} must lie strictly between 0 and 1, got {p}")));
    }
    Ok(())
}

fn validate_spec(spec: &KernelSpec, graph: &GraphFamily) -> Result<()> {
    match spec {
        KernelSpec::Simple => Ok(()),
        KernelSpec::Lazy { base, stay } => {
            open_unit("stay probability", stay)?;
            validate_spec(base, graph)
        }
        KernelSpec::BiasedLine { right } => {
            open_unit("bias", right)?;
            match graph {
                GraphFamily::Line => Ok(()),
                other => Err(Error::config(format!("biasedline needs the line, got {other}"))),
            }
        }
        KernelSpec::HeightBiased { down } => {
            open_unit("bias", down)?;
            match graph {
                GraphFamily::HomTree { degree: 3 } => Ok(()),
                other => Err(Error::config(format!("heightbiased needs t(3), got {other}"))),
            }
        }
        KernelSpec::Product(parts) => {
            let GraphFamily::Product(factors) = graph else {
                return Err(Error::config(format!("product kernel on non-product graph {graph}")));
            };
            if parts.len() != factors.len() {
                return Err(Error::config(format!(
                    "product kernel has {} coordinates, graph has {}",
                    parts.len(),
                    factors.len()
                )));
            }
            let total: Rational64 = parts.iter().map(|(_, a)| *a).sum();
            if total != Rational64::one() {
                return Err(Error::config(format!("product weights sum to {total}, not 1")));
            }
            for ((k, a), f) in parts.iter().zip(factors) {
                if *a < Rational64::zero() {
                    return Err(Error::config(format!("negative product weight {a}")));
                }
                validate_spec(k, f)?;
            }
            Ok(())
        }
    }
}

/// One row of the transition matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionRow<W> {
    pub source: VertexAddr,
    pub entries: Vec<(VertexAddr, W)>,
}

impl<W: Weight> TransitionRow<W> {
    pub fn total(&self) -> W {
        let mut t = W::zero();
        for (_, p) in &self.entries {
            t.add_assign(p);
        }
        t
    }
}

/// A kernel bound to its graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    spec: KernelSpec,
    graph: GraphFamily,
    embedding: SpineEmbedding,
}

/// Validates `spec` against `graph` and binds them.
pub fn build_kernel(spec: KernelSpec, graph: GraphFamily) -> Result<Kernel> {
    validate_spec(&spec, &graph)?;
    Ok(Kernel {
        spec,
        graph,
        embedding: SpineEmbedding,
    })
}

impl Kernel {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn graph(&self) -> &GraphFamily {
        &self.graph
    }

    pub fn origin(&self) -> VertexAddr {
        self.graph.origin()
    }

    /// The transition row at `v` in arithmetic `W`.
    pub fn row<W: Weight>(&self, v: &VertexAddr) -> Result<TransitionRow<W>> {
        self.graph.validate(v)?;
        let mut entries = Vec::new();
        spec_row(&self.spec, &self.graph, self.embedding, v, &W::one(), &mut entries);
        Ok(TransitionRow {
            source: v.clone(),
            entries,
        })
    }

    pub fn step_distribution(&self, v: &VertexAddr) -> Result<TransitionRow<f64>> {
        self.row(v)
    }

    /// Closed-form spectral radius where one is known.
    pub fn analytic_rho(&self) -> Option<f64> {
        analytic_rho(&self.spec, &self.graph)
    }

    /// Draws one step from `v`, which must already be validated.
    pub fn sample_step<R: Rng + ?Sized>(&self, v: &VertexAddr, rng: &mut R) -> VertexAddr {
        sample_spec(&self.spec, &self.graph, self.embedding, v, rng)
    }
}

/// Appends `scale * row(v)` to `out`, merging stay mass into a leading source entry.
fn spec_row<W: Weight>(
    spec: &KernelSpec,
    graph: &GraphFamily,
    emb: SpineEmbedding,
    v: &VertexAddr,
    scale: &W,
    out: &mut Vec<(VertexAddr, W)>,
) {
    match spec {
        KernelSpec::Simple => {
            let deg = graph.degree_unchecked(v);
            let p = scale.mul(&W::from_frac(1, deg));
            for i in 0..deg {
                out.push((graph.neighbor_at_unchecked(v, i), p.clone()));
            }
        }
        KernelSpec::Lazy { base, stay } => {
            let s = W::from_rational(stay);
            let start = out.len();
            out.push((v.clone(), scale.mul(&s)));
            spec_row(base, graph, emb, v, &scale.mul(&s.complement()), out);
            if out.len() > start + 1 && out[start + 1].0 == *v {
                let (_, extra) = out.remove(start + 1);
                out[start].1.add_assign(&extra);
            }
        }
        KernelSpec::BiasedLine { right } => {
            let VertexAddr::Int(n) = v else { unreachable!() };
            let p = W::from_rational(right);
            out.push((VertexAddr::Int(n + 1), scale.mul(&p)));
            out.push((VertexAddr::Int(n - 1), scale.mul(&p.complement())));
        }
        KernelSpec::HeightBiased { down } => {
            let VertexAddr::Word(w) = v else { unreachable!() };
            let h = height_unchecked(emb, w);
            let p = W::from_rational(down);
            let up = scale.mul(&p.complement().mul(&W::from_frac(1, 2)));
            let down = scale.mul(&p);
            for i in 0..3 {
                let u = graph.neighbor_at_unchecked(v, i);
                let VertexAddr::Word(x) = &u else { unreachable!() };
                let weight = if height_unchecked(emb, x) < h { down.clone() } else { up.clone() };
                out.push((u, weight));
            }
        }
        KernelSpec::Product(parts) => {
            let (GraphFamily::Product(factors), VertexAddr::Tuple(coords)) = (graph, v) else {
                unreachable!()
            };
            let stay = spec.stay_mass();
            if !stay.is_zero() {
                out.push((v.clone(), scale.mul(&W::from_rational(&stay))));
            }
            let mut local = Vec::new();
            for (l, ((k, alpha), f)) in parts.iter().zip(factors).enumerate() {
                if alpha.is_zero() {
                    continue;
                }
                local.clear();
                spec_row(k, f, emb, &coords[l], &scale.mul(&W::from_rational(alpha)), &mut local);
                for (u, p) in local.drain(..) {
                    if u == coords[l] {
                        continue;
                    }
                    let mut t = coords.clone();
                    t[l] = u;
                    out.push((VertexAddr::Tuple(t), p));
                }
            }
        }
    }
}

fn height_unchecked(emb: SpineEmbedding, w: &crate::graph::TreeWord) -> i64 {
    let (label, dist) = emb.nearest_spine(w);
    label + dist as i64
}

fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: &Rational64) -> bool {
    rng.random::<f64>() < *p.numer() as f64 / *p.denom() as f64
}

fn sample_spec<R: Rng + ?Sized>(
    spec: &KernelSpec,
    graph: &GraphFamily,
    emb: SpineEmbedding,
    v: &VertexAddr,
    rng: &mut R,
) -> VertexAddr {
    match spec {
        KernelSpec::Simple => {
            let deg = graph.degree_unchecked(v);
            graph.neighbor_at_unchecked(v, rng.random_range(0..deg))
        }
        KernelSpec::Lazy { base, stay } => {
            if bernoulli(rng, stay) {
                v.clone()
            } else {
                sample_spec(base, graph, emb, v, rng)
            }
        }
        KernelSpec::BiasedLine { right } => {
            let VertexAddr::Int(n) = v else { unreachable!() };
            VertexAddr::Int(if bernoulli(rng, right) { n + 1 } else { n - 1 })
        }
        KernelSpec::HeightBiased { .. } => {
            let mut row = Vec::new();
            spec_row::<f64>(spec, graph, emb, v, &1.0, &mut row);
            let mut x = rng.random::<f64>();
            for (u, p) in &row[..row.len() - 1] {
                if x < *p {
                    return u.clone();
                }
                x -= p;
            }
            row.pop().expect("non-empty row").0
        }
        KernelSpec::Product(parts) => {
            let (GraphFamily::Product(factors), VertexAddr::Tuple(coords)) = (graph, v) else {
                unreachable!()
            };
            let mut x = rng.random::<f64>();
            let mut chosen = parts.len() - 1;
            for (l, (_, a)) in parts.iter().enumerate() {
                let a = *a.numer() as f64 / *a.denom() as f64;
                if x < a {
                    chosen = l;
                    break;
                }
                x -= a;
            }
            while parts[chosen].1.is_zero() {
                chosen -= 1;
            }
            let mut t = coords.clone();
            t[chosen] = sample_spec(&parts[chosen].0, &factors[chosen], emb, &coords[chosen], rng);
            VertexAddr::Tuple(t)
        }
    }
}

fn tree_rho(d: u64) -> f64 {
    2.0 * ((d - 1) as f64).sqrt() / d as f64
}

/// Closed-form spectral radius: `2 sqrt(d-1)/d` on `T_d`, `1` on the line,
/// `2 sqrt(p(1-p))` for a biased line, `s + (1-s) rho` for lazy kernels and the
/// weighted sum for products. `None` for height-biased and hammock kernels.
pub fn analytic_rho(spec: &KernelSpec, graph: &GraphFamily) -> Option<f64> {
    let f = |r: &Rational64| *r.numer() as f64 / *r.denom() as f64;
    match spec {
        KernelSpec::Simple => match graph {
            GraphFamily::HomTree { degree } => Some(tree_rho(u64::from(*degree))),
            GraphFamily::Line => Some(1.0),
            GraphFamily::Product(factors) => {
                // Isotropic walk on a product of regular graphs is the product
                // kernel with weights proportional to factor degrees.
                let total = graph.regular_degree()? as f64;
                factors.iter().try_fold(0.0, |acc, g| {
                    Some(acc + g.regular_degree()? as f64 / total * analytic_rho(&KernelSpec::Simple, g)?)
                })
            }
            GraphFamily::Hammock | GraphFamily::Glued { .. } => None,
        },
        KernelSpec::Lazy { base, stay } => {
            let s = f(stay);
            Some(s + (1.0 - s) * analytic_rho(base, graph)?)
        }
        KernelSpec::BiasedLine { right } => {
            let p = f(right);
            Some(2.0 * (p * (1.0 - p)).sqrt())
        }
        KernelSpec::HeightBiased { .. } => None,
        KernelSpec::Product(parts) => {
            let GraphFamily::Product(factors) = graph else { return None };
            parts.iter().zip(factors).try_fold(0.0, |acc, ((k, a), g)| {
                if a.is_zero() {
                    Some(acc)
                } else {
                    Some(acc + f(a) * analytic_rho(k, g)?)
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::graph::TreeWord;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn t3() -> GraphFamily {
        GraphFamily::hom_tree(3).unwrap()
    }

    fn t3xz() -> GraphFamily {
        GraphFamily::product(vec![t3(), GraphFamily::Line]).unwrap()
    }

    fn product_kernel(a: Rational64, second: KernelSpec) -> Kernel {
        build_kernel(
            KernelSpec::Product(vec![(KernelSpec::Simple, a), (second, Rational64::one() - a)]),
            t3xz(),
        )
        .unwrap()
    }

    fn as_map(row: &TransitionRow<BigRational>) -> Vec<(String, BigRational)> {
        row.entries.iter().map(|(v, p)| (v.to_string(), p.clone())).collect()
    }

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::from_rational(&r(n, d))
    }

    #[test]
    fn lazy_tree_row() {
        let k = build_kernel(KernelSpec::lazy(KernelSpec::Simple, r(1, 2)), t3()).unwrap();
        let v = VertexAddr::word(&[0, 1]);
        let row = k.row::<BigRational>(&v).unwrap();
        assert_eq!(row.entries[0], (v.clone(), big(1, 2)));
        assert_eq!(row.entries.len(), 4);
        assert!(row.entries[1..].iter().all(|(_, p)| *p == big(1, 6)));
    }

    #[test]
    fn fair_coin_product_row() {
        let k = product_kernel(r(1, 2), KernelSpec::Simple);
        let row = k.row::<BigRational>(&k.origin()).unwrap();
        let probs: Vec<_> = row.entries.iter().map(|(_, p)| p.clone()).collect();
        assert_eq!(probs, vec![big(1, 6), big(1, 6), big(1, 6), big(1, 4), big(1, 4)]);
    }

    #[test]
    fn three_fifths_product_is_isotropic() {
        let k = product_kernel(r(3, 5), KernelSpec::Simple);
        let iso = build_kernel(KernelSpec::Simple, t3xz()).unwrap();
        let v = VertexAddr::tuple([VertexAddr::word(&[2, 0]), VertexAddr::Int(-4)]);
        assert_eq!(as_map(&k.row(&v).unwrap()), as_map(&iso.row(&v).unwrap()));
        assert!(k.row::<BigRational>(&v).unwrap().entries.iter().all(|(_, p)| *p == big(1, 5)));
    }

    #[test]
    fn height_biased_row() {
        let k = build_kernel(KernelSpec::HeightBiased { down: r(7, 10) }, t3()).unwrap();
        let row = k.row::<BigRational>(&VertexAddr::word(&[2, 1])).unwrap();
        let mut probs: Vec<_> = row.entries.iter().map(|(_, p)| p.clone()).collect();
        probs.sort();
        assert_eq!(probs, vec![big(3, 20), big(3, 20), big(7, 10)]);
    }

    #[test]
    fn step_distribution_examples() {
        let k = build_kernel(KernelSpec::BiasedLine { right: r(7, 10) }, GraphFamily::Line).unwrap();
        let row = k.row::<BigRational>(&VertexAddr::Int(5)).unwrap();
        assert_eq!(row.entries, vec![(VertexAddr::Int(6), big(7, 10)), (VertexAddr::Int(4), big(3, 10))]);

        let k = build_kernel(KernelSpec::Simple, GraphFamily::Hammock).unwrap();
        let row = k.row::<BigRational>(&VertexAddr::Spine(0)).unwrap();
        assert_eq!(row.entries.len(), 6);
        assert!(row.entries.iter().all(|(_, p)| *p == big(1, 6)));

        let k = build_kernel(KernelSpec::lazy(KernelSpec::Simple, r(1, 2)), GraphFamily::Line).unwrap();
        let row = k.row::<BigRational>(&VertexAddr::Int(0)).unwrap();
        assert_eq!(
            row.entries,
            vec![
                (VertexAddr::Int(0), big(1, 2)),
                (VertexAddr::Int(1), big(1, 4)),
                (VertexAddr::Int(-1), big(1, 4))
            ]
        );
    }

    #[test]
    fn rows_are_deterministic() {
        let k = product_kernel(r(1, 2), KernelSpec::BiasedLine { right: r(7, 10) });
        let v = VertexAddr::tuple([VertexAddr::word(&[1]), VertexAddr::Int(3)]);
        assert_eq!(k.step_distribution(&v).unwrap(), k.step_distribution(&v).unwrap());
    }

    #[test]
    fn configuration_errors() {
        let bad_weights = KernelSpec::Product(vec![(KernelSpec::Simple, r(1, 2)), (KernelSpec::Simple, r(1, 3))]);
        assert!(matches!(build_kernel(bad_weights, t3xz()), Err(Error::Config(_))));
        let arity = KernelSpec::Product(vec![(KernelSpec::Simple, r(1, 1))]);
        assert!(matches!(build_kernel(arity, t3xz()), Err(Error::Config(_))));
        assert!(matches!(
            build_kernel(KernelSpec::BiasedLine { right: r(7, 10) }, t3()),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_kernel(KernelSpec::HeightBiased { down: r(7, 10) }, GraphFamily::Line),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_kernel(KernelSpec::lazy(KernelSpec::Simple, r(1, 1)), t3()),
            Err(Error::Config(_))
        ));
    }

    fn kernels() -> Vec<Kernel> {
        let lazy = |k| KernelSpec::lazy(k, r(1, 2));
        vec![
            build_kernel(KernelSpec::Simple, t3()).unwrap(),
            build_kernel(lazy(KernelSpec::Simple), t3()).unwrap(),
            build_kernel(KernelSpec::Simple, GraphFamily::Line).unwrap(),
            build_kernel(KernelSpec::BiasedLine { right: r(7, 10) }, GraphFamily::Line).unwrap(),
            build_kernel(KernelSpec::HeightBiased { down: r(2, 3) }, t3()).unwrap(),
            build_kernel(KernelSpec::Simple, GraphFamily::Hammock).unwrap(),
            build_kernel(KernelSpec::Simple, t3xz()).unwrap(),
            product_kernel(r(1, 2), KernelSpec::BiasedLine { right: r(7, 10) }),
            build_kernel(
                KernelSpec::Product(vec![(lazy(KernelSpec::Simple), r(1, 3)), (KernelSpec::Simple, r(2, 3))]),
                t3xz(),
            )
            .unwrap(),
            build_kernel(
                KernelSpec::Simple,
                GraphFamily::glue_at_origins(vec![GraphFamily::Hammock, t3()]).unwrap(),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn rows_sum_to_one_and_target_neighbours() {
        for k in kernels() {
            for v in k.graph().ball(4, 100_000).unwrap() {
                let row = k.row::<BigRational>(&v).unwrap();
                assert_eq!(row.total(), BigRational::from_integer(1.into()), "{:?} at {v}", k.spec());
                let fl = k.row::<f64>(&v).unwrap();
                assert!((fl.total() - 1.0).abs() <= 1e-12);
                let ns = k.graph().neighbors(&v).unwrap();
                let mut seen = std::collections::HashSet::new();
                for (i, (u, p)) in row.entries.iter().enumerate() {
                    assert!(*p > BigRational::from_integer(0.into()));
                    assert!(seen.insert(u.clone()), "duplicate target {u}");
                    assert!(ns.contains(u) || (i == 0 && *u == v));
                }
            }
        }
    }

    #[test]
    fn product_stay_mass() {
        let k = product_kernel(r(1, 2), KernelSpec::Simple);
        assert!(k.row::<f64>(&k.origin()).unwrap().entries.iter().all(|(u, _)| *u != k.origin()));
        let k = build_kernel(
            KernelSpec::Product(vec![(KernelSpec::lazy(KernelSpec::Simple, r(1, 2)), r(1, 3)), (KernelSpec::Simple, r(2, 3))]),
            t3xz(),
        )
        .unwrap();
        let row = k.row::<BigRational>(&k.origin()).unwrap();
        assert_eq!(row.entries[0], (k.origin(), big(1, 6)));
    }

    #[test]
    fn height_process_is_a_biased_line() {
        let emb = SpineEmbedding;
        let k = build_kernel(KernelSpec::HeightBiased { down: r(7, 10) }, t3()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let len = rng.random_range(0..12);
            let mut letters = vec![rng.random_range(0..3u8)];
            letters.extend((1..len).map(|_| rng.random_range(0..2u8)));
            let w = TreeWord::from_letters(&letters);
            let h = emb.height(&w).unwrap();
            let (mut down, mut up) = (BigRational::from_integer(0.into()), BigRational::from_integer(0.into()));
            for (u, p) in k.row::<BigRational>(&VertexAddr::Word(w)).unwrap().entries {
                let VertexAddr::Word(x) = u else { unreachable!() };
                match emb.height(&x).unwrap() - h {
                    -1 => down += p,
                    1 => up += p,
                    d => panic!("jump {d}"),
                }
            }
            assert_eq!((down, up), (big(7, 10), big(3, 10)));
        }
    }

    #[test]
    fn analytic_rho_examples() {
        let simple_t3 = build_kernel(KernelSpec::Simple, t3()).unwrap();
        assert!((simple_t3.analytic_rho().unwrap() - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-15);
        let k = product_kernel(r(1, 2), KernelSpec::Simple);
        assert!((k.analytic_rho().unwrap() - 0.971_404_520_791_031_7).abs() < 1e-12);
        let k = product_kernel(r(1, 2), KernelSpec::BiasedLine { right: r(7, 10) });
        assert!((k.analytic_rho().unwrap() - (2f64.sqrt() / 3.0 + 0.21f64.sqrt())).abs() < 1e-15);
        let hb = build_kernel(KernelSpec::HeightBiased { down: r(7, 10) }, t3()).unwrap();
        assert_eq!(hb.analytic_rho(), None);
        let ham = build_kernel(KernelSpec::Simple, GraphFamily::Hammock).unwrap();
        assert_eq!(ham.analytic_rho(), None);
        let lazy = build_kernel(KernelSpec::lazy(KernelSpec::Simple, r(1, 2)), t3()).unwrap();
        assert!((lazy.analytic_rho().unwrap() - (0.5 + 2f64.sqrt() / 3.0)).abs() < 1e-15);
        let iso = build_kernel(KernelSpec::Simple, t3xz()).unwrap();
        let weighted = product_kernel(r(3, 5), KernelSpec::Simple);
        assert!((iso.analytic_rho().unwrap() - weighted.analytic_rho().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn sampling_matches_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in kernels() {
            let v = k.graph().ball(2, 1000).unwrap().pop().unwrap();
            let row = k.row::<f64>(&v).unwrap();
            let n = 40_000;
            let mut counts = vec![0u32; row.entries.len()];
            for _ in 0..n {
                let u = k.sample_step(&v, &mut rng);
                let idx = row.entries.iter().position(|(t, _)| *t == u).expect("sampled a non-target");
                counts[idx] += 1;
            }
            for ((_, p), c) in row.entries.iter().zip(counts) {
                let se = (p * (1.0 - p) / n as f64).sqrt();
                assert!((c as f64 / n as f64 - p).abs() < 5.0 * se + 1e-9, "{:?}", k.spec());
            }
        }
    }
}
