//! Brute-force implicit kernels used as ground truth at desk scale, and the
//! Hoeffding-band approximation experiment.

use rand::Rng;

use crate::features::{apsp, INFINITE_DISTANCE};
use crate::graph::{AttributedGraph, GraphCollection};
use crate::hashing::{estimate_collision_kernel, HashMode};
use crate::hgk::{featurize_collection, BaseKernel, HgkConfig, LabelMode};
use crate::{dot, Error, Result};

/// Tabulated kernel values for cross-graph node pairs.
#[derive(Debug, Clone)]
pub struct CrossTable {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CrossTable {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidArgument("table shape mismatch".into()));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn get(&self, u: usize, w: usize) -> f64 {
        debug_assert!(u < self.rows);
        self.values[u * self.cols + w]
    }

    /// Monte-Carlo LSH collision kernel over all attribute pairs of two
    /// graphs; this estimate defines the ground-truth attribute kernel used
    /// by the approximation tests.
    pub fn from_collision_estimates(
        g: &AttributedGraph,
        h: &AttributedGraph,
        r: f64,
        mode: HashMode,
        trials: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let ga = g.attributes().ok_or(Error::MissingAttributes)?;
        let ha = h.attributes().ok_or(Error::MissingAttributes)?;
        let mut values = Vec::with_capacity(ga.len() * ha.len());
        for x in ga {
            for y in ha {
                values.push(estimate_collision_kernel(x, y, r, mode, trials, rng)?);
            }
        }
        Self::new(ga.len(), ha.len(), values)
    }
}

/// Symmetric kernel on node annotations, valued in [0, 1].
#[derive(Debug, Clone)]
pub enum AttributeKernel {
    /// 1 iff the annotations are equal: attribute vectors when present,
    /// discrete labels otherwise.
    Dirac,
    /// Gaussian RBF exp(-gamma ||x - y||^2) on attribute vectors. Mirrors
    /// the usual comparison setup; not part of any equivalence check.
    Rbf { gamma: f64 },
    /// Tabulated values per cross-graph node pair.
    Table(CrossTable),
}

impl AttributeKernel {
    fn eval(&self, g: &AttributedGraph, u: usize, h: &AttributedGraph, w: usize) -> Result<f64> {
        match self {
            AttributeKernel::Dirac => match (g.attributes(), h.attributes()) {
                (Some(ga), Some(ha)) => Ok(f64::from(ga[u] == ha[w])),
                _ => {
                    let lg = g.labels().ok_or(Error::MissingLabels)?;
                    let lh = h.labels().ok_or(Error::MissingLabels)?;
                    Ok(f64::from(lg[u] == lh[w]))
                }
            },
            AttributeKernel::Rbf { gamma } => {
                let ga = g.attributes().ok_or(Error::MissingAttributes)?;
                let ha = h.attributes().ok_or(Error::MissingAttributes)?;
                let sq: f64 = ga[u].iter().zip(&ha[w]).map(|(a, b)| (a - b) * (a - b)).sum();
                Ok((-gamma * sq).exp())
            }
            AttributeKernel::Table(t) => Ok(t.get(u, w)),
        }
    }
}

/// Kernel on shortest-path lengths; always 0 when either input is infinite.
#[derive(Debug, Clone, Copy)]
pub enum DistanceKernel {
    Dirac,
}

impl DistanceKernel {
    pub fn eval(&self, du: u32, dw: u32) -> f64 {
        if du == INFINITE_DISTANCE || dw == INFINITE_DISTANCE {
            return 0.0;
        }
        match self {
            DistanceKernel::Dirac => f64::from(du == dw),
        }
    }
}

/// Implicit shortest-path kernel: the quadruple sum over ordered node pairs
/// (u, v) of G and (w, z) of H of
/// ka(u, w) * ka(v, z) * kd(d_uv, d_wz).
pub fn implicit_sp(
    g: &AttributedGraph,
    h: &AttributedGraph,
    ka: &AttributeKernel,
    kd: &DistanceKernel,
) -> Result<f64> {
    let (ng, nh) = (g.node_count(), h.node_count());
    let mut cross = vec![0.0; ng * nh];
    for u in 0..ng {
        for w in 0..nh {
            cross[u * nh + w] = ka.eval(g, u, h, w)?;
        }
    }
    let dg = apsp(g);
    let dh = apsp(h);
    let mut total = 0.0;
    for u in 0..ng {
        for v in 0..ng {
            if u == v {
                continue;
            }
            for w in 0..nh {
                let kuw = cross[u * nh + w];
                if kuw == 0.0 {
                    continue;
                }
                for z in 0..nh {
                    if w == z {
                        continue;
                    }
                    let kdist = kd.eval(dg[u][v], dh[w][z]);
                    if kdist != 0.0 {
                        total += kuw * cross[v * nh + z] * kdist;
                    }
                }
            }
        }
    }
    Ok(total)
}

/// Tractability caps for the bijection-based WL recursion, which is
/// factorial in node degree.
#[derive(Debug, Clone, Copy)]
pub struct WlOracleCaps {
    pub max_degree: usize,
    pub max_nodes: usize,
}

impl Default for WlOracleCaps {
    fn default() -> Self {
        Self { max_degree: 5, max_nodes: 8 }
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Implicit Weisfeiler-Lehman subtree kernel by exact recursion over
/// neighborhood bijections:
/// k_0 = ka on node annotations; for i > 0,
/// k_i(v, v') = k_{i-1}(v, v') * f(v, v') if a bijection between N(v) and
/// N(v') with k_{i-1} > 0 on every matched pair exists, else 0, where f
/// averages the product of k_{i-1} over matched pairs across all such
/// bijections. The result sums k_i over all cross node pairs and i = 0..=depth.
pub fn implicit_wl_with_caps(
    g: &AttributedGraph,
    h: &AttributedGraph,
    depth: u16,
    ka: &AttributeKernel,
    caps: WlOracleCaps,
) -> Result<f64> {
    let (ng, nh) = (g.node_count(), h.node_count());
    if ng > caps.max_nodes || nh > caps.max_nodes {
        return Err(Error::CapExceeded(format!(
            "node count {} exceeds max_nodes {}",
            ng.max(nh),
            caps.max_nodes
        )));
    }
    let max_deg = (0..ng)
        .map(|v| g.neighbors(v).unwrap().len())
        .chain((0..nh).map(|v| h.neighbors(v).unwrap().len()))
        .max()
        .unwrap_or(0);
    if max_deg > caps.max_degree {
        return Err(Error::CapExceeded(format!(
            "degree {max_deg} exceeds max_degree {}",
            caps.max_degree
        )));
    }

    let mut k = vec![0.0f64; ng * nh];
    for v in 0..ng {
        for vp in 0..nh {
            k[v * nh + vp] = ka.eval(g, v, h, vp)?;
        }
    }
    let mut total: f64 = k.iter().sum();

    for _ in 1..=depth {
        let mut next = vec![0.0f64; ng * nh];
        for v in 0..ng {
            let nv = g.neighbors(v).unwrap();
            for vp in 0..nh {
                let prev = k[v * nh + vp];
                if prev == 0.0 {
                    continue;
                }
                let nvp = h.neighbors(vp).unwrap();
                if nv.len() != nvp.len() {
                    continue; // no bijection exists
                }
                if nv.is_empty() {
                    next[v * nh + vp] = prev; // empty bijection, f = 1
                    continue;
                }
                let right: Vec<usize> = nvp.iter().map(|&w| w as usize).collect();
                let mut sum = 0.0;
                let mut count = 0usize;
                'bijection: for perm in permutations(&right) {
                    let mut product = 1.0;
                    for (&w, &wp) in nv.iter().zip(&perm) {
                        let kw = k[w as usize * nh + wp];
                        if kw == 0.0 {
                            continue 'bijection;
                        }
                        product *= kw;
                    }
                    sum += product;
                    count += 1;
                }
                if count > 0 {
                    next[v * nh + vp] = prev * (sum / count as f64);
                }
            }
        }
        total += next.iter().sum::<f64>();
        k = next;
    }
    Ok(total)
}

pub fn implicit_wl(
    g: &AttributedGraph,
    h: &AttributedGraph,
    depth: u16,
    ka: &AttributeKernel,
) -> Result<f64> {
    implicit_wl_with_caps(g, h, depth, ka, WlOracleCaps::default())
}

/// Count of ordered pair quadruples with matching finite distances. This is
/// the largest value the hashed shortest-path kernel can take for (G, H),
/// used to normalize kernel values into [0, 1] before Hoeffding bounds apply.
pub fn sp_normalizer(g: &AttributedGraph, h: &AttributedGraph) -> f64 {
    let dg = apsp(g);
    let dh = apsp(h);
    let kd = DistanceKernel::Dirac;
    let mut z = 0.0;
    for u in 0..g.node_count() {
        for v in 0..g.node_count() {
            if u == v {
                continue;
            }
            for w in 0..h.node_count() {
                for x in 0..h.node_count() {
                    if w != x {
                        z += kd.eval(dg[u][v], dh[w][x]);
                    }
                }
            }
        }
    }
    z
}

/// Outcome of one approximation-error experiment on a fixed graph pair.
#[derive(Debug, Clone)]
pub struct ApproxReport {
    /// Normalized kernel samples, one per repetition.
    pub samples: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; undefined (flagged as None) for a single
    /// repetition.
    pub std: Option<f64>,
    /// Normalized implicit shortest-path value under the Monte-Carlo
    /// collision kernel.
    pub oracle: f64,
    /// Per lambda: (lambda, empirical exceedance frequency, Hoeffding bound).
    pub exceedances: Vec<(f64, f64, f64)>,
}

impl ApproxReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("repetitions,{}\n", self.samples.len()));
        out.push_str(&format!("mean,{}\n", self.mean));
        match self.std {
            Some(s) => out.push_str(&format!("std,{s}\n")),
            None => out.push_str("std,undefined(single sample)\n"),
        }
        out.push_str(&format!("oracle,{}\n", self.oracle));
        out.push_str("lambda,exceedance,hoeffding_bound\n");
        for (l, f, b) in &self.exceedances {
            out.push_str(&format!("{l},{f},{b}\n"));
        }
        out
    }
}

/// Empirical check of the Hoeffding band for the hashed shortest-path
/// kernel estimate against the implicit oracle. Requires independent hash
/// mode; kernel values are normalized to [0, 1] via [`sp_normalizer`].
pub fn approx_error_experiment(
    g: &AttributedGraph,
    h: &AttributedGraph,
    cfg: &HgkConfig,
    repetitions: usize,
    lambdas: &[f64],
    collision_trials: usize,
    rng: &mut impl Rng,
) -> Result<ApproxReport> {
    if cfg.hash_mode != HashMode::Independent {
        return Err(Error::InvalidArgument(
            "approximation experiment requires independent hash mode".into(),
        ));
    }
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
    }
    let z = sp_normalizer(g, h);
    if z == 0.0 {
        return Err(Error::InvalidArgument(
            "graph pair has no matching finite distances; kernel is identically zero".into(),
        ));
    }

    let table = CrossTable::from_collision_estimates(
        g,
        h,
        cfg.width,
        HashMode::Independent,
        collision_trials,
        rng,
    )?;
    let oracle =
        implicit_sp(g, h, &AttributeKernel::Table(table), &DistanceKernel::Dirac)? / z;

    let collection = GraphCollection::new("pair", vec![g.clone(), h.clone()])?;
    let sp_cfg = HgkConfig {
        base: BaseKernel::Sp,
        label_mode: LabelMode::Cont,
        hash_mode: HashMode::Independent,
        ..*cfg
    };

    let mut samples = Vec::with_capacity(repetitions);
    for rep in 0..repetitions {
        let rep_cfg = HgkConfig { seed: cfg.seed.derive(rep as u64), ..sp_cfg };
        let phi = featurize_collection(&collection, &rep_cfg)?;
        samples.push(dot(&phi[0], &phi[1]) / z);
    }

    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let std = if samples.len() > 1 {
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
            / (samples.len() - 1) as f64;
        Some(var.sqrt())
    } else {
        None
    };

    let exceedances = lambdas
        .iter()
        .map(|&l| {
            let freq = samples.iter().filter(|&&s| (s - oracle).abs() >= l).count() as f64
                / samples.len() as f64;
            let bound = 2.0 * (-2.0 * l * l * cfg.iterations as f64).exp();
            (l, freq, bound)
        })
        .collect();

    Ok(ApproxReport { samples, mean, std, oracle, exceedances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{sp_feature_map, wl_feature_map, WlContext};
    use crate::hashing::SeedSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn labeled(n: usize, edges: &[(u32, u32)], labels: &[u64]) -> AttributedGraph {
        AttributedGraph::new(n, edges).unwrap().with_labels(labels.to_vec()).unwrap()
    }

    #[test]
    fn implicit_sp_matches_explicit_on_p3() {
        let p3 = labeled(3, &[(0, 1), (1, 2)], &[0, 1, 2]);
        let value =
            implicit_sp(&p3, &p3, &AttributeKernel::Dirac, &DistanceKernel::Dirac).unwrap();
        assert_eq!(value, 6.0);
        let fv = sp_feature_map(&p3).unwrap();
        assert_eq!(dot(&fv, &fv), value);
    }

    #[test]
    fn implicit_sp_edgeless_is_zero() {
        let g = labeled(3, &[], &[0, 0, 0]);
        let h = labeled(2, &[(0, 1)], &[0, 0]);
        assert_eq!(
            implicit_sp(&g, &h, &AttributeKernel::Dirac, &DistanceKernel::Dirac).unwrap(),
            0.0
        );
    }

    #[test]
    fn implicit_sp_constant_attribute_kernel() {
        // constant k_A = 1 realized by a table of ones
        let e = labeled(2, &[(0, 1)], &[0, 1]);
        let ones = CrossTable::new(2, 2, vec![1.0; 4]).unwrap();
        let value =
            implicit_sp(&e, &e, &AttributeKernel::Table(ones), &DistanceKernel::Dirac).unwrap();
        assert_eq!(value, 4.0);
    }

    #[test]
    fn implicit_sp_is_symmetric() {
        let g = labeled(4, &[(0, 1), (1, 2), (2, 3)], &[0, 1, 1, 0]);
        let h = labeled(3, &[(0, 1), (1, 2), (2, 0)], &[1, 0, 1]);
        let a = implicit_sp(&g, &h, &AttributeKernel::Dirac, &DistanceKernel::Dirac).unwrap();
        let b = implicit_sp(&h, &g, &AttributeKernel::Dirac, &DistanceKernel::Dirac).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn implicit_wl_depth_zero_counts_matching_pairs() {
        let t = labeled(3, &[(0, 1), (1, 2), (2, 0)], &[1, 1, 1]);
        assert_eq!(implicit_wl(&t, &t, 0, &AttributeKernel::Dirac).unwrap(), 9.0);
    }

    #[test]
    fn mismatched_neighborhood_sizes_contribute_zero() {
        // star center has degree 3, path center degree 2: no bijection
        let star = labeled(4, &[(0, 1), (0, 2), (0, 3)], &[1, 1, 1, 1]);
        let path = labeled(3, &[(0, 1), (1, 2)], &[1, 1, 1]);
        let depth0 =
            implicit_wl(&star, &path, 0, &AttributeKernel::Dirac).unwrap();
        assert_eq!(depth0, 12.0);
        // at depth 1 only leaf-vs-leaf pairs can survive
        let depth1 = implicit_wl(&star, &path, 1, &AttributeKernel::Dirac).unwrap();
        assert!(depth1 < depth0 + 12.0);
    }

    #[test]
    fn caps_are_enforced_with_named_cap() {
        let big = labeled(9, &[], &[0; 9]);
        match implicit_wl(&big, &big, 1, &AttributeKernel::Dirac) {
            Err(Error::CapExceeded(msg)) => assert!(msg.contains("max_nodes")),
            other => panic!("expected CapExceeded, got {other:?}"),
        }
        let hub = labeled(7, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6)], &[0; 7]);
        match implicit_wl(&hub, &hub, 1, &AttributeKernel::Dirac) {
            Err(Error::CapExceeded(msg)) => assert!(msg.contains("max_degree")),
            other => panic!("expected CapExceeded, got {other:?}"),
        }
    }

    #[test]
    fn implicit_wl_equals_explicit_on_random_graphs() {
        // random labeled graphs within caps, depth <= 2, Dirac annotations
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..40 {
            let n = rng.gen_range(2..=6);
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.gen_bool(0.35) {
                        edges.push((u, v));
                    }
                }
            }
            let g = AttributedGraph::new(n, &edges).unwrap();
            let degrees_ok = (0..n).all(|v| g.neighbors(v).unwrap().len() <= 3);
            if !degrees_ok {
                continue;
            }
            let labels: Vec<u64> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let g = g.with_labels(labels).unwrap();
            for depth in 0..=2u16 {
                let implicit = implicit_wl(&g, &g, depth, &AttributeKernel::Dirac).unwrap();
                let mut ctx = WlContext::new();
                let fv = wl_feature_map(&g, depth, &mut ctx).unwrap();
                let explicit = dot(&fv, &fv);
                assert_eq!(implicit, explicit, "trial {trial} depth {depth}");
            }
        }
    }

    #[test]
    fn experiment_rejects_shared_mode_and_flags_single_sample() {
        let g = AttributedGraph::new(2, &[(0, 1)])
            .unwrap()
            .with_attributes(vec![vec![0.0, 0.0], vec![1.0, 0.5]])
            .unwrap();
        let mut cfg = HgkConfig {
            iterations: 5,
            base: BaseKernel::Sp,
            width: 1.0,
            hash_mode: HashMode::Shared,
            label_mode: LabelMode::Cont,
            seed: SeedSpec::new(4),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(
            approx_error_experiment(&g, &g, &cfg, 3, &[0.1], 100, &mut rng).is_err(),
            "shared mode must be refused"
        );
        cfg.hash_mode = HashMode::Independent;
        let report = approx_error_experiment(&g, &g, &cfg, 1, &[1.0], 100, &mut rng).unwrap();
        assert!(report.std.is_none());
        // bounded kernel: values in [0,1], never off by >= 1
        assert_eq!(report.exceedances[0].1, 0.0);
    }

    #[test]
    fn experiment_mean_approaches_oracle() {
        let g = AttributedGraph::new(3, &[(0, 1), (1, 2)])
            .unwrap()
            .with_attributes(vec![vec![0.0, 0.1], vec![0.6, -0.3], vec![1.1, 0.4]])
            .unwrap();
        let h = AttributedGraph::new(3, &[(0, 1), (1, 2), (2, 0)])
            .unwrap()
            .with_attributes(vec![vec![0.1, 0.0], vec![0.5, -0.2], vec![0.9, 0.6]])
            .unwrap();
        let cfg = HgkConfig {
            iterations: 100,
            base: BaseKernel::Sp,
            width: 1.0,
            hash_mode: HashMode::Independent,
            label_mode: LabelMode::Cont,
            seed: SeedSpec::new(21),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let report =
            approx_error_experiment(&g, &h, &cfg, 60, &[0.05, 0.1], 20_000, &mut rng).unwrap();
        let se = report.std.unwrap() / (report.samples.len() as f64).sqrt();
        assert!(
            (report.mean - report.oracle).abs() <= 3.0 * se.max(0.01),
            "mean {} vs oracle {}",
            report.mean,
            report.oracle
        );
    }
}
