//! Synthetic benchmark generation: a Synthie-style four-class collection of
//! composed Erdos-Renyi seeds with separable attribute pools, plus random
//! graph utilities for property tests.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::graph::{AttributedGraph, GraphCollection};
use crate::hashing::SeedSpec;
use crate::{Error, Result};

/// Parameters of the Synthie-style construction.
#[derive(Debug, Clone)]
pub struct SynthieParams {
    /// Nodes per Erdos-Renyi seed graph.
    pub seed_graph_size: usize,
    pub er_edge_prob: f64,
    /// Fraction of seed edges perturbed (added or deleted) per variant.
    pub perturbation_fraction: f64,
    /// Seeds sampled and connected per composed graph.
    pub seeds_per_graph: usize,
    /// Variants per seed set, and graphs per superclass.
    pub graphs_per_superclass: usize,
    pub attr_dim: usize,
    /// Probability of drawing a seed from the superclass's own seed set.
    pub mix_prob: f64,
    pub seed: SeedSpec,
}

impl Default for SynthieParams {
    fn default() -> Self {
        Self {
            seed_graph_size: 10,
            er_edge_prob: 0.2,
            perturbation_fraction: 0.25,
            seeds_per_graph: 10,
            graphs_per_superclass: 200,
            attr_dim: 15,
            mix_prob: 0.8,
            seed: SeedSpec::new(0),
        }
    }
}

impl SynthieParams {
    fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("er_edge_prob", self.er_edge_prob),
            ("perturbation_fraction", self.perturbation_fraction),
            ("mix_prob", self.mix_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.seed_graph_size == 0
            || self.seeds_per_graph == 0
            || self.graphs_per_superclass == 0
            || self.attr_dim == 0
        {
            return Err(Error::InvalidArgument("sizes must be positive".into()));
        }
        if self.graphs_per_superclass % 2 != 0 {
            return Err(Error::InvalidArgument(
                "graphs_per_superclass must be even for the balanced subclass split".into(),
            ));
        }
        Ok(())
    }
}

/// Erdos-Renyi graph: each of the C(n, 2) possible edges is present
/// independently with probability `p`.
pub fn gen_er_graph(n: usize, p: f64, rng: &mut impl Rng) -> AttributedGraph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    AttributedGraph::new(n, &edges).unwrap()
}

/// Applies round(fraction * |E|) random edit operations, each a coin flip
/// between adding a uniform non-edge and deleting a uniform edge. When the
/// chosen operation is impossible the other is applied instead.
pub fn perturb_edges(g: &AttributedGraph, fraction: f64, rng: &mut impl Rng) -> AttributedGraph {
    let n = g.node_count();
    let ops = (fraction * g.edge_count() as f64).round() as usize;
    let mut edges: Vec<(u32, u32)> = g.edges().to_vec();
    let mut non_edges: Vec<(u32, u32)> = Vec::new();
    {
        let present: std::collections::BTreeSet<(u32, u32)> = edges.iter().copied().collect();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if !present.contains(&(u, v)) {
                    non_edges.push((u, v));
                }
            }
        }
    }
    for _ in 0..ops {
        let mut add = rng.gen_bool(0.5);
        if add && non_edges.is_empty() {
            add = false;
        } else if !add && edges.is_empty() {
            add = true;
        }
        if add {
            if non_edges.is_empty() {
                continue; // n < 2: nothing to do either way
            }
            let i = rng.gen_range(0..non_edges.len());
            edges.push(non_edges.swap_remove(i));
        } else {
            if edges.is_empty() {
                continue;
            }
            let i = rng.gen_range(0..edges.len());
            non_edges.push(edges.swap_remove(i));
        }
    }
    AttributedGraph::new(n, &edges).unwrap()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

/// Two separable pools of attribute vectors: Gaussian mixtures with two
/// unit-covariance clusters each, cluster means on a sphere of radius ~4.
/// The pools sit on opposite sides of a random separating direction so a
/// linear classifier on pooled samples has margin by construction.
pub struct AttributePools {
    means_a: [Vec<f64>; 2],
    means_b: [Vec<f64>; 2],
}

impl AttributePools {
    fn unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
        let raw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        raw.into_iter().map(|x| x / norm).collect()
    }

    pub fn new(dim: usize, rng: &mut impl Rng) -> Self {
        let axis = Self::unit_vector(dim, rng);
        // cluster mean: +-2.5 along the axis plus a radius-3 offset in the
        // orthogonal complement; total norm sqrt(2.5^2 + 3^2) ~ 3.9
        let mean = |sign: f64, rng: &mut _| -> Vec<f64> {
            let raw = Self::unit_vector(dim, rng);
            let along: f64 = raw.iter().zip(&axis).map(|(a, b)| a * b).sum();
            let mut perp: Vec<f64> =
                raw.iter().zip(&axis).map(|(a, b)| a - along * b).collect();
            let pnorm: f64 = perp.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            for x in &mut perp {
                *x *= 3.0 / pnorm;
            }
            perp.iter().zip(&axis).map(|(p, u)| p + sign * 2.5 * u).collect()
        };
        Self {
            means_a: [mean(1.0, rng), mean(1.0, rng)],
            means_b: [mean(-1.0, rng), mean(-1.0, rng)],
        }
    }

    pub fn draw(&self, pool_a: bool, rng: &mut impl Rng) -> Vec<f64> {
        let means = if pool_a { &self.means_a } else { &self.means_b };
        let mean = &means[usize::from(rng.gen_bool(0.5))];
        mean.iter().map(|m| m + rng.sample::<f64, _>(StandardNormal)).collect()
    }
}

/// Composes one graph from sampled seeds: disjoint union, then uniform
/// random inter-seed edges until connected, plus `extra` more.
fn compose(
    seeds: &[&AttributedGraph],
    extra: usize,
    rng: &mut impl Rng,
) -> (AttributedGraph, Vec<usize>) {
    let mut offsets = Vec::with_capacity(seeds.len());
    let mut total = 0usize;
    let mut block_of_node = Vec::new();
    for (bi, s) in seeds.iter().enumerate() {
        offsets.push(total);
        total += s.node_count();
        block_of_node.extend(std::iter::repeat(bi).take(s.node_count()));
    }
    let mut edges = Vec::new();
    for (off, s) in offsets.iter().zip(seeds) {
        for &(u, v) in s.edges() {
            edges.push(((off + u as usize) as u32, (off + v as usize) as u32));
        }
    }
    let mut uf = UnionFind::new(total);
    for &(u, v) in &edges {
        uf.union(u as usize, v as usize);
    }
    let mut components = {
        let mut roots = std::collections::BTreeSet::new();
        for v in 0..total {
            roots.insert(uf.find(v));
        }
        roots.len()
    };
    let inter = |rng: &mut dyn rand::RngCore| loop {
        let u = rng.gen_range(0..total);
        let v = rng.gen_range(0..total);
        if block_of_node[u] != block_of_node[v] {
            return (u.min(v) as u32, u.max(v) as u32);
        }
    };
    while components > 1 {
        let (u, v) = inter(rng);
        if uf.union(u as usize, v as usize) {
            components -= 1;
        }
        edges.push((u, v));
    }
    for _ in 0..extra {
        edges.push(inter(rng));
    }
    (AttributedGraph::new(total, &edges).unwrap(), block_of_node)
}

/// Generates the four-class synthetic collection: two seed sets of perturbed
/// ER variants, graphs composed from mixed seed samples (superclasses C1 and
/// C2), and per-node attributes drawn from pool A or B according to the
/// node's seed origin, with pools swapped for the second subclass.
/// Class labels 0..=3 enumerate C1A, C1B, C2A, C2B.
pub fn gen_synthie(params: &SynthieParams) -> Result<GraphCollection> {
    params.validate()?;
    let mut rng = params.seed.stream_rng(0xda7a_6e4e);

    let base1 = gen_er_graph(params.seed_graph_size, params.er_edge_prob, &mut rng);
    let base2 = gen_er_graph(params.seed_graph_size, params.er_edge_prob, &mut rng);
    let variants = params.graphs_per_superclass;
    let set1: Vec<AttributedGraph> = (0..variants)
        .map(|_| perturb_edges(&base1, params.perturbation_fraction, &mut rng))
        .collect();
    let set2: Vec<AttributedGraph> = (0..variants)
        .map(|_| perturb_edges(&base2, params.perturbation_fraction, &mut rng))
        .collect();

    let pools = AttributePools::new(params.attr_dim, &mut rng);
    let half = params.graphs_per_superclass / 2;
    let mut graphs = Vec::with_capacity(2 * params.graphs_per_superclass);

    for superclass in 0..2 {
        for index in 0..params.graphs_per_superclass {
            let subclass_b = index >= half; // balanced split
            let mut chosen: Vec<&AttributedGraph> = Vec::with_capacity(params.seeds_per_graph);
            let mut origin_is_set1 = Vec::with_capacity(params.seeds_per_graph);
            for _ in 0..params.seeds_per_graph {
                let own = rng.gen_bool(params.mix_prob);
                let from_set1 = (superclass == 0) == own;
                let set = if from_set1 { &set1 } else { &set2 };
                chosen.push(set.choose(&mut rng).unwrap());
                origin_is_set1.push(from_set1);
            }
            let (g, block_of_node) = compose(&chosen, params.seeds_per_graph, &mut rng);
            let attrs: Vec<Vec<f64>> = block_of_node
                .iter()
                .map(|&b| {
                    let pool_a = origin_is_set1[b] != subclass_b;
                    pools.draw(pool_a, &mut rng)
                })
                .collect();
            let class = (superclass * 2 + usize::from(subclass_b)) as i64;
            graphs.push(g.with_attributes(attrs)?.with_class_label(class));
        }
    }
    GraphCollection::new("synthie", graphs)
}

/// Random labeled graph for tests: edge probability `p`, labels uniform in
/// 0..alphabet.
pub fn random_labeled_graph(
    n: usize,
    p: f64,
    alphabet: u64,
    rng: &mut impl Rng,
) -> AttributedGraph {
    let g = gen_er_graph(n, p, rng);
    let labels = (0..n).map(|_| rng.gen_range(0..alphabet)).collect();
    g.with_labels(labels).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn er_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(gen_er_graph(6, 0.0, &mut rng).edge_count(), 0);
        assert_eq!(gen_er_graph(6, 1.0, &mut rng).edge_count(), 15);
    }

    #[test]
    fn er_mean_edge_count_matches_binomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let samples = 10_000;
        let total: usize = (0..samples).map(|_| gen_er_graph(10, 0.2, &mut rng).edge_count()).sum();
        let mean = total as f64 / samples as f64;
        // Binomial(45, 0.2): mean 9, sd of the sample mean
        let se = (45.0 * 0.2 * 0.8 / samples as f64).sqrt();
        assert!((mean - 9.0).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn er_edge_count_chi_square_sanity() {
        // chi-square against Binomial(45, 0.2) over pooled bins
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples = 10_000usize;
        let m = 45u64;
        let p = 0.2f64;
        let mut counts = vec![0usize; m as usize + 1];
        for _ in 0..samples {
            counts[gen_er_graph(10, p, &mut rng).edge_count()] += 1;
        }
        // binomial pmf by recurrence
        let mut pmf = vec![0.0f64; m as usize + 1];
        pmf[0] = (1.0 - p).powi(m as i32);
        for k in 1..=m as usize {
            pmf[k] = pmf[k - 1] * (m as f64 - (k as f64 - 1.0)) / k as f64 * p / (1.0 - p);
        }
        // pool bins with expected count < 5
        let mut chi2 = 0.0;
        let mut dof: i64 = -1;
        let (mut obs_pool, mut exp_pool) = (0.0, 0.0);
        for k in 0..=m as usize {
            obs_pool += counts[k] as f64;
            exp_pool += pmf[k] * samples as f64;
            if exp_pool >= 5.0 {
                chi2 += (obs_pool - exp_pool) * (obs_pool - exp_pool) / exp_pool;
                dof += 1;
                obs_pool = 0.0;
                exp_pool = 0.0;
            }
        }
        if exp_pool > 0.0 {
            chi2 += (obs_pool - exp_pool) * (obs_pool - exp_pool) / exp_pool;
            dof += 1;
        }
        // p-value > 0.001 <=> chi2 below the 0.999 quantile; use the normal
        // approximation chi2_{0.999}(k) ~ k + 3.09*sqrt(2k) + 6
        let dof = dof.max(1) as f64;
        let threshold = dof + 3.09 * (2.0 * dof).sqrt() + 6.0;
        assert!(chi2 < threshold, "chi2 {chi2} over {dof} dof (threshold {threshold})");
    }

    #[test]
    fn perturb_zero_fraction_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = gen_er_graph(8, 0.4, &mut rng);
        let p = perturb_edges(&g, 0.0, &mut rng);
        assert_eq!(g.edges(), p.edges());
    }

    #[test]
    fn perturb_complete_graph_only_deletes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = gen_er_graph(6, 1.0, &mut rng);
        let ops = (0.25 * k.edge_count() as f64).round() as usize;
        let p = perturb_edges(&k, 0.25, &mut rng);
        // first op must be a delete; afterwards adds may restore, so the
        // count can only drop by at most `ops` and must drop by at least one
        assert!(p.edge_count() < k.edge_count());
        assert!(p.edge_count() >= k.edge_count() - ops);
    }

    #[test]
    fn perturb_applies_rounded_operation_count() {
        // deterministic op count: |E| = 40, fraction 0.25 -> 10 operations;
        // verified via edit distance parity on a graph where adds and
        // deletes cannot cancel tracking exactly, so check bounds instead
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut edges = Vec::new();
        let mut count = 0;
        'outer: for u in 0..20u32 {
            for v in (u + 1)..20u32 {
                edges.push((u, v));
                count += 1;
                if count == 40 {
                    break 'outer;
                }
            }
        }
        let g = AttributedGraph::new(20, &edges).unwrap();
        let p = perturb_edges(&g, 0.25, &mut rng);
        let before: std::collections::BTreeSet<_> = g.edges().iter().copied().collect();
        let after: std::collections::BTreeSet<_> = p.edges().iter().copied().collect();
        let sym_diff = before.symmetric_difference(&after).count();
        assert!(sym_diff <= 10, "at most 10 edits, got {sym_diff}");
    }

    fn tiny_params(seed: u64) -> SynthieParams {
        SynthieParams {
            seed_graph_size: 6,
            seeds_per_graph: 4,
            graphs_per_superclass: 10,
            attr_dim: 5,
            seed: SeedSpec::new(seed),
            ..SynthieParams::default()
        }
    }

    #[test]
    fn synthie_shape_and_balance() {
        let c = gen_synthie(&tiny_params(1)).unwrap();
        assert_eq!(c.len(), 20);
        assert_eq!(c.attribute_dim, Some(5));
        let mut per_class = [0usize; 4];
        for g in &c.graphs {
            per_class[g.class_label().unwrap() as usize] += 1;
            assert!(g.is_connected());
        }
        assert_eq!(per_class, [5, 5, 5, 5]);
    }

    #[test]
    fn synthie_is_deterministic() {
        let a = gen_synthie(&tiny_params(9)).unwrap();
        let b = gen_synthie(&tiny_params(9)).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.graphs.iter().zip(&b.graphs) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn attribute_pools_are_linearly_separable() {
        // held-out linear classifier (dense hinge-loss SVM) on pool samples
        use crate::eval::{train_linear_svm, DenseSample};
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pools = AttributePools::new(15, &mut rng);
        let train: Vec<DenseSample> = (0..400)
            .map(|i| {
                let is_a = i % 2 == 0;
                DenseSample { features: pools.draw(is_a, &mut rng), class: usize::from(is_a) }
            })
            .collect();
        let model = train_linear_svm(&train, 1.0, 20, &mut rng).unwrap();
        let mut correct = 0;
        let held_out = 400;
        for i in 0..held_out {
            let is_a = i % 2 == 0;
            let x = pools.draw(is_a, &mut rng);
            if model.predict(&x) == usize::from(is_a) {
                correct += 1;
            }
        }
        let acc = correct as f64 / held_out as f64;
        assert!(acc >= 0.95, "pool separation accuracy {acc}");
    }
}
