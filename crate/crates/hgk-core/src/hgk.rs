//! The hash graph kernel framework: iterated attribute hashing, feature-map
//! concatenation, gram-matrix computation and normalization.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::features::{
    dot, sp_feature_map, wl_feature_map, Block, FeatureKey, FeatureVector, WlContext,
};
use crate::graph::GraphCollection;
use crate::hashing::{HashMode, IterationHasher, SeedSpec};
use crate::{Error, Result};

/// Discrete base kernel evaluated on each hashed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKernel {
    Wl { depth: u16 },
    Sp,
}

/// Whether only hashed attributes feed the base kernel, or discrete labels
/// are combined in as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    Cont,
    LabelCont,
}

/// Framework parameters for one featurization context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HgkConfig {
    pub iterations: u32,
    pub base: BaseKernel,
    pub width: f64,
    pub hash_mode: HashMode,
    pub label_mode: LabelMode,
    pub seed: SeedSpec,
}

impl HgkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be >= 1".into()));
        }
        if !(self.width > 0.0) {
            return Err(Error::InvalidArgument("interval length must be positive".into()));
        }
        Ok(())
    }
}

/// Centers each attribute dimension to mean zero and scales it to unit
/// population variance over all nodes of all graphs. Zero-variance
/// dimensions are centered only.
pub fn standardize_attributes(c: &GraphCollection) -> Result<GraphCollection> {
    let d = c.attribute_dim.ok_or(Error::MissingAttributes)?;
    let mut mean = vec![0.0; d];
    let mut count = 0usize;
    for g in &c.graphs {
        for row in g.attributes().ok_or(Error::MissingAttributes)? {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::MissingAttributes);
    }
    for m in &mut mean {
        *m /= count as f64;
    }
    let mut var = vec![0.0; d];
    for g in &c.graphs {
        for row in g.attributes().unwrap() {
            for k in 0..d {
                let diff = row[k] - mean[k];
                var[k] += diff * diff;
            }
        }
    }
    let scale: Vec<f64> = var
        .iter()
        .map(|v| {
            let sd = (v / count as f64).sqrt();
            if sd > 0.0 {
                1.0 / sd
            } else {
                1.0
            }
        })
        .collect();

    let graphs = c
        .graphs
        .iter()
        .map(|g| {
            let rows = g
                .attributes()
                .unwrap()
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(k, x)| (x - mean[k]) * scale[k])
                        .collect()
                })
                .collect();
            g.clone().with_attributes(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    GraphCollection::new(c.name.clone(), graphs)
}

fn reblock(fv: FeatureVector, block: Block) -> FeatureVector {
    let mut out = FeatureVector::with_capacity(fv.len());
    for (k, w) in fv.iter() {
        out.add(FeatureKey { block, key: k.key }, *w);
    }
    out
}

/// Explicit hash-graph-kernel feature maps for a whole collection:
/// Phi(G) = sqrt(1/I) * concat over iterations of the base feature map of
/// the hashed graph, realized as iteration-prefixed sparse keys. In
/// label+cont mode the WL variant appends one unscaled discrete-label block;
/// the SP variant uses composite (discrete, hashed) node labels per
/// iteration.
///
/// All graphs compared must be featurized in one call so the shared hash
/// functions, label interning, and WL compression contexts agree.
pub fn featurize_collection(c: &GraphCollection, cfg: &HgkConfig) -> Result<Vec<FeatureVector>> {
    cfg.validate()?;
    if c.is_empty() {
        return Err(Error::InvalidArgument("empty collection".into()));
    }
    let dim = c.attribute_dim.ok_or(Error::MissingAttributes)?;
    for g in &c.graphs {
        if g.attributes().is_none() {
            return Err(Error::MissingAttributes);
        }
        if cfg.label_mode == LabelMode::LabelCont && g.labels().is_none() {
            return Err(Error::MissingLabels);
        }
    }

    let factor = (1.0 / cfg.iterations as f64).sqrt();

    // Iterations are independent given derived seeds; each owns its hash
    // function(s), label interner, and WL context.
    let per_iteration: Vec<Vec<FeatureVector>> = (1..=cfg.iterations)
        .into_par_iter()
        .map(|i| iteration_block(c, cfg, i, dim))
        .collect::<Result<_>>()?;

    let mut maps: Vec<FeatureVector> = (0..c.len())
        .map(|gi| {
            let total: usize = per_iteration.iter().map(|blocks| blocks[gi].len()).sum();
            FeatureVector::with_capacity(total)
        })
        .collect();
    for blocks in &per_iteration {
        for (phi, block) in maps.iter_mut().zip(blocks) {
            phi.merge_scaled(block, factor);
        }
    }

    // Discrete WL block of label+cont mode: deterministic, appended once.
    if cfg.label_mode == LabelMode::LabelCont {
        if let BaseKernel::Wl { depth } = cfg.base {
            let mut ctx = WlContext::new();
            for (phi, g) in maps.iter_mut().zip(&c.graphs) {
                let block = reblock(wl_feature_map(g, depth, &mut ctx)?, Block::DiscreteLabels);
                phi.merge(&block);
            }
        }
    }
    Ok(maps)
}

fn iteration_block(
    c: &GraphCollection,
    cfg: &HgkConfig,
    iteration: u32,
    dim: usize,
) -> Result<Vec<FeatureVector>> {
    let hasher = IterationHasher::new(cfg.seed, iteration, cfg.hash_mode, cfg.width, dim)?;
    let raw: Vec<Vec<i64>> = c
        .graphs
        .iter()
        .enumerate()
        .map(|(gi, g)| hasher.hash_labels(g, gi))
        .collect::<Result<_>>()?;

    // Re-intern hash outputs (or composite label pairs for label+cont SP)
    // to a dense alphabet for this iteration.
    let labels: Vec<Vec<u64>> = if cfg.label_mode == LabelMode::LabelCont && cfg.base == BaseKernel::Sp
    {
        let mut alphabet = BTreeSet::new();
        for (g, hashes) in c.graphs.iter().zip(&raw) {
            for (&l, &h) in g.labels().unwrap().iter().zip(hashes) {
                alphabet.insert((l, h));
            }
        }
        let index: BTreeMap<(u64, i64), u64> =
            alphabet.into_iter().enumerate().map(|(i, k)| (k, i as u64)).collect();
        c.graphs
            .iter()
            .zip(&raw)
            .map(|(g, hashes)| {
                g.labels()
                    .unwrap()
                    .iter()
                    .zip(hashes)
                    .map(|(&l, &h)| index[&(l, h)])
                    .collect()
            })
            .collect()
    } else {
        let alphabet: BTreeSet<i64> = raw.iter().flatten().copied().collect();
        let index: BTreeMap<i64, u64> =
            alphabet.into_iter().enumerate().map(|(i, k)| (k, i as u64)).collect();
        raw.iter().map(|hashes| hashes.iter().map(|h| index[h]).collect()).collect()
    };

    let mut ctx = WlContext::new();
    let mut blocks = Vec::with_capacity(c.len());
    for (g, labels) in c.graphs.iter().zip(labels) {
        let hashed = g.relabeled(labels)?;
        let base = match cfg.base {
            BaseKernel::Wl { depth } => wl_feature_map(&hashed, depth, &mut ctx)?,
            BaseKernel::Sp => sp_feature_map(&hashed)?,
        };
        blocks.push(reblock(base, Block::Iteration(iteration)));
    }
    Ok(blocks)
}

/// Symmetric matrix of pairwise kernel values over a graph collection.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n {
            for j in 0..i {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n)
    }

    /// CSV with one full row per graph.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Gram matrix of pairwise dots of explicit feature vectors.
pub fn gram_from_features(features: &[FeatureVector]) -> Result<GramMatrix> {
    if features.is_empty() {
        return Err(Error::InvalidArgument("empty collection".into()));
    }
    let n = features.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| dot(&features[i], &features[j])).collect())
        .collect();
    let mut k = GramMatrix::zeros(n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, value) in row.into_iter().enumerate() {
            k.set(i, i + off, value);
        }
    }
    Ok(k)
}

/// K[i][j] = <Phi(G_i), Phi(G_j)> computed from explicit vectors.
pub fn gram_matrix(c: &GraphCollection, cfg: &HgkConfig) -> Result<GramMatrix> {
    gram_from_features(&featurize_collection(c, cfg)?)
}

/// Cosine normalization K'[i][j] = K[i][j] / sqrt(K[i][i] K[j][j]).
/// Zero-norm rows map to 0 off-diagonal and 1 on the diagonal.
pub fn cosine_normalize(k: &GramMatrix) -> GramMatrix {
    let n = k.size();
    let mut out = GramMatrix::zeros(n);
    let diag: Vec<f64> = (0..n).map(|i| k.get(i, i)).collect();
    for i in 0..n {
        out.set(i, i, 1.0);
        for j in 0..i {
            let denom = (diag[i] * diag[j]).sqrt();
            let value = if denom > 0.0 { k.get(i, j) / denom } else { 0.0 };
            out.set(i, j, value);
        }
    }
    out
}

/// Key -> dense index registry used to serialize feature vectors as
/// `index:value` text. Indices follow the canonical key order over the
/// features the registry was built from.
#[derive(Debug, Clone, Default)]
pub struct FeatureRegistry {
    index: BTreeMap<FeatureKey, u32>,
}

impl FeatureRegistry {
    pub fn build(features: &[FeatureVector]) -> Self {
        let keys: BTreeSet<FeatureKey> =
            features.iter().flat_map(|f| f.iter().map(|(k, _)| *k)).collect();
        let index = keys.into_iter().enumerate().map(|(i, k)| (k, i as u32)).collect();
        Self { index }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Sparse (index, weight) pairs sorted by index. Keys absent from the
    /// registry are dropped.
    pub fn to_indexed(&self, fv: &FeatureVector) -> Vec<(u32, f64)> {
        let mut out: Vec<(u32, f64)> = fv
            .iter()
            .filter_map(|(k, w)| self.index.get(k).map(|&i| (i, *w)))
            .collect();
        out.sort_unstable_by_key(|&(i, _)| i);
        out
    }

    /// One `index:value` line per feature vector.
    pub fn features_to_text(&self, features: &[FeatureVector]) -> String {
        let mut out = String::new();
        for fv in features {
            let cells: Vec<String> =
                self.to_indexed(fv).iter().map(|(i, w)| format!("{i}:{w}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// `key<TAB>index` lines in index order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, i) in &self.index {
            out.push_str(&format!("{k}\t{i}\n"));
        }
        out
    }
}
