//! Explicit feature maps for labeled graphs: Weisfeiler-Lehman subtree and
//! shortest-path, plus sparse feature-vector algebra.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::graph::AttributedGraph;
use crate::{Error, Result};

/// Sentinel for "no path" in distance tables.
pub const INFINITE_DISTANCE: u32 = u32::MAX;

/// Which feature block a key belongs to. Base maps live in `Base`; the hash
/// graph kernel prefixes each iteration's keys with `Iteration(i)` so
/// concatenation stays key-disjoint, and `DiscreteLabels` holds the
/// label-only block of label+cont mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    Base,
    Iteration(u32),
    DiscreteLabels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructureKey {
    /// Count of nodes carrying `label` after `round` refinement rounds.
    Wl { round: u16, label: u64 },
    /// Count of ordered node pairs with labels (source, target) at
    /// shortest-path distance `distance`.
    Sp { source: u64, target: u64, distance: u32 },
}

/// Canonical sparse-feature index: equal structures produce equal keys
/// across graphs and runs within one featurization context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureKey {
    pub block: Block,
    pub key: StructureKey,
}

impl FeatureKey {
    pub fn base(key: StructureKey) -> Self {
        Self { block: Block::Base, key }
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.block {
            Block::Base => {}
            Block::Iteration(i) => write!(f, "i{i}|")?,
            Block::DiscreteLabels => write!(f, "lab|")?,
        }
        match self.key {
            StructureKey::Wl { round, label } => write!(f, "wl:{round}:{label}"),
            StructureKey::Sp { source, target, distance } => {
                write!(f, "sp:{source}:{target}:{distance}")
            }
        }
    }
}

/// Fixed-seed hasher so map iteration order is a function of the inserted
/// keys alone; float accumulations over these maps must reproduce
/// byte-for-byte across runs.
type DeterministicState = std::hash::BuildHasherDefault<std::collections::hash_map::DefaultHasher>;

/// Sparse map from feature keys to real weights; zero entries are absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    weights: HashMap<FeatureKey, f64, DeterministicState>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { weights: HashMap::with_capacity_and_hasher(n, DeterministicState::default()) }
    }

    pub fn add(&mut self, key: FeatureKey, weight: f64) {
        if weight == 0.0 {
            return;
        }
        let entry = self.weights.entry(key).or_insert(0.0);
        *entry += weight;
        if *entry == 0.0 {
            self.weights.remove(&key);
        }
    }

    pub fn get(&self, key: &FeatureKey) -> f64 {
        self.weights.get(key).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FeatureKey, &f64)> {
        self.weights.iter()
    }

    pub fn scale(&mut self, factor: f64) {
        if factor == 0.0 {
            self.weights.clear();
            return;
        }
        for w in self.weights.values_mut() {
            *w *= factor;
        }
    }

    /// Merges `other` into self. Key spaces are expected to be disjoint when
    /// used for block concatenation, but overlaps accumulate.
    pub fn merge(&mut self, other: &FeatureVector) {
        self.merge_scaled(other, 1.0);
    }

    /// Merges `factor * other` into self without materializing a scaled copy.
    pub fn merge_scaled(&mut self, other: &FeatureVector, factor: f64) {
        self.weights.reserve(other.len());
        for (k, w) in other.iter() {
            self.add(*k, *w * factor);
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum()
    }

    /// Drops every WL key with a refinement round greater than `max_round`.
    /// Lets one deep featurization serve shallower depth candidates.
    pub fn truncated_to_wl_round(&self, max_round: u16) -> FeatureVector {
        let weights = self
            .weights
            .iter()
            .filter(|(k, _)| match k.key {
                StructureKey::Wl { round, .. } => round <= max_round,
                StructureKey::Sp { .. } => true,
            })
            .map(|(k, w)| (*k, *w))
            .collect();
        FeatureVector { weights }
    }

    /// Sorted `key<TAB>weight` lines, keys rendered canonically.
    pub fn to_text(&self) -> String {
        let mut entries: Vec<(&FeatureKey, &f64)> = self.weights.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = String::new();
        for (k, w) in entries {
            out.push_str(&format!("{k}\t{w}\n"));
        }
        out
    }
}

/// Sum over shared keys of products of weights.
pub fn dot(u: &FeatureVector, v: &FeatureVector) -> f64 {
    let (small, large) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    small.iter().map(|(k, w)| w * large.get(k)).sum()
}

/// Shared injective relabeling dictionary for Weisfeiler-Lehman refinement.
/// One context must span every graph that will be compared.
#[derive(Debug, Default, Clone)]
pub struct WlContext {
    table: HashMap<(u64, Vec<u64>), u64>,
    next: u64,
}

impl WlContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Injective compression of (old label, sorted neighbor-label multiset).
    pub fn compress(&mut self, label: u64, neighborhood: Vec<u64>) -> u64 {
        let next = &mut self.next;
        *self.table.entry((label, neighborhood)).or_insert_with(|| {
            let id = *next;
            *next += 1;
            id
        })
    }
}

/// WL refinement rounds for one graph: element `i` holds the round-`i`
/// labels (round 0 = input labels).
pub fn wl_rounds(g: &AttributedGraph, depth: u16, ctx: &mut WlContext) -> Result<Vec<Vec<u64>>> {
    let labels = g.labels().ok_or(Error::MissingLabels)?;
    let mut rounds = vec![labels.to_vec()];
    for _ in 0..depth {
        let prev = rounds.last().unwrap();
        let mut next = Vec::with_capacity(prev.len());
        for v in 0..g.node_count() {
            let mut nbr: Vec<u64> =
                g.neighbors(v)?.iter().map(|&w| prev[w as usize]).collect();
            nbr.sort_unstable();
            next.push(ctx.compress(prev[v], nbr));
        }
        rounds.push(next);
    }
    Ok(rounds)
}

/// Weisfeiler-Lehman subtree feature map: for each round `i` in 0..=depth,
/// the histogram of round-`i` labels, in disjoint key spaces per round.
pub fn wl_feature_map(g: &AttributedGraph, depth: u16, ctx: &mut WlContext) -> Result<FeatureVector> {
    let rounds = wl_rounds(g, depth, ctx)?;
    let mut fv = FeatureVector::new();
    for (round, labels) in rounds.iter().enumerate() {
        for &label in labels {
            fv.add(FeatureKey::base(StructureKey::Wl { round: round as u16, label }), 1.0);
        }
    }
    Ok(fv)
}

/// Unweighted all-pairs shortest paths via BFS from every node.
/// `INFINITE_DISTANCE` marks disconnected pairs.
pub fn apsp(g: &AttributedGraph) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let mut table = vec![vec![INFINITE_DISTANCE; n]; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let dist = &mut table[s];
        dist[s] = 0;
        queue.clear();
        queue.push_back(s as u32);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            for &w in g.neighbors(v as usize).unwrap() {
                if dist[w as usize] == INFINITE_DISTANCE {
                    dist[w as usize] = dv + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    table
}

/// Shortest-path feature map: counts ordered pairs (u, v), u != v, with
/// finite distance, keyed by (label(u), label(v), distance).
pub fn sp_feature_map(g: &AttributedGraph) -> Result<FeatureVector> {
    let labels = g.labels().ok_or(Error::MissingLabels)?;
    let dist = apsp(g);
    let mut fv = FeatureVector::new();
    for u in 0..g.node_count() {
        for v in 0..g.node_count() {
            if u == v || dist[u][v] == INFINITE_DISTANCE {
                continue;
            }
            fv.add(
                FeatureKey::base(StructureKey::Sp {
                    source: labels[u],
                    target: labels[v],
                    distance: dist[u][v],
                }),
                1.0,
            );
        }
    }
    Ok(fv)
}
