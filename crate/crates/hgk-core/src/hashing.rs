//! Randomized hash functions mapping real attribute vectors to discrete
//! labels, with deterministic stream derivation.

use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::graph::AttributedGraph;
use crate::{Error, Result};

/// One 2-stable LSH function: a Gaussian random projection shifted by a
/// uniform offset and floored into intervals of width `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct StableHashFunction {
    projection: Vec<f64>,
    offset: f64,
    width: f64,
}

impl StableHashFunction {
    /// Draws a function for `d`-dimensional inputs with interval length `r`:
    /// projection entries i.i.d. standard normal, offset uniform in [0, r).
    pub fn sample(d: usize, r: f64, rng: &mut impl Rng) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("interval length {r} must be positive")));
        }
        let projection = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let offset = rng.sample(Uniform::new(0.0, r));
        Ok(Self { projection, offset, width: r })
    }

    pub fn dim(&self) -> usize {
        self.projection.len()
    }

    /// floor((<projection, x> + offset) / r), floored toward negative
    /// infinity so negative projections bucket correctly.
    pub fn apply(&self, x: &[f64]) -> Result<i64> {
        if x.len() != self.projection.len() {
            return Err(Error::InvalidArgument(format!(
                "input dimension {} does not match projection dimension {}",
                x.len(),
                self.projection.len()
            )));
        }
        let dot: f64 = self.projection.iter().zip(x).map(|(p, v)| p * v).sum();
        Ok(((dot + self.offset) / self.width).floor() as i64)
    }
}

/// How hash functions are drawn within one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashMode {
    /// One function per iteration, applied to every attribute occurrence.
    Shared,
    /// A fresh function per attribute occurrence, drawn from a sub-stream
    /// keyed by (iteration, graph, node).
    Independent,
}

const ITERATION_TAG: u64 = 0x7b1f_0aa3_9c4e_5d21;
const NODE_TAG: u64 = 0x52d9_e6b7_13f8_04c5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic derivation of random streams from one master seed.
/// Identical SeedSpec and config reproduce bit-identical hash outputs;
/// distinct (iteration, graph, node) triples own disjoint streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master: u64,
}

impl SeedSpec {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn iteration_rng(&self, iteration: u32) -> ChaCha8Rng {
        let s = splitmix64(splitmix64(self.master ^ ITERATION_TAG) ^ u64::from(iteration));
        ChaCha8Rng::seed_from_u64(s)
    }

    pub fn node_rng(&self, iteration: u32, graph: usize, node: usize) -> ChaCha8Rng {
        let mut s = splitmix64(self.master ^ NODE_TAG);
        s = splitmix64(s ^ u64::from(iteration));
        s = splitmix64(s ^ graph as u64);
        s = splitmix64(s ^ node as u64);
        ChaCha8Rng::seed_from_u64(s)
    }

    /// Generic derived stream for non-hashing uses (fold shuffles etc.).
    pub fn stream_rng(&self, tag: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(self.master) ^ tag))
    }

    /// Child seed spec with its own disjoint stream space.
    pub fn derive(&self, tag: u64) -> SeedSpec {
        SeedSpec::new(splitmix64(splitmix64(self.master.rotate_left(17)) ^ tag))
    }
}

/// Hashing state for one iteration of the feature-map loop. A fresh hasher
/// (and thus a fresh shared function or fresh node streams) is built per
/// iteration.
#[derive(Debug, Clone)]
pub struct IterationHasher {
    seed: SeedSpec,
    iteration: u32,
    mode: HashMode,
    width: f64,
    shared: Option<StableHashFunction>,
}

impl IterationHasher {
    pub fn new(seed: SeedSpec, iteration: u32, mode: HashMode, width: f64, dim: usize) -> Result<Self> {
        let shared = match mode {
            HashMode::Shared => Some(StableHashFunction::sample(
                dim,
                width,
                &mut seed.iteration_rng(iteration),
            )?),
            HashMode::Independent => {
                if !(width > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "interval length {width} must be positive"
                    )));
                }
                None
            }
        };
        Ok(Self { seed, iteration, mode, width, shared })
    }

    /// Raw hash label of one attribute occurrence.
    pub fn label(&self, graph: usize, node: usize, attr: &[f64]) -> Result<i64> {
        match self.mode {
            HashMode::Shared => self.shared.as_ref().unwrap().apply(attr),
            HashMode::Independent => {
                let mut rng = self.seed.node_rng(self.iteration, graph, node);
                StableHashFunction::sample(attr.len(), self.width, &mut rng)?.apply(attr)
            }
        }
    }

    /// Raw hash labels for every node of `g` (graph index selects the
    /// per-node sub-streams in independent mode).
    pub fn hash_labels(&self, g: &AttributedGraph, graph_index: usize) -> Result<Vec<i64>> {
        let attrs = g.attributes().ok_or(Error::MissingAttributes)?;
        attrs
            .iter()
            .enumerate()
            .map(|(v, a)| self.label(graph_index, v, a))
            .collect()
    }
}

// Signed hash outputs are folded into the unsigned label space bijectively,
// so equal raw hashes give equal labels across graphs without a shared
// interning pass.
pub(crate) fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

/// Returns a labeled copy of `g` where each node's label is the hash of its
/// attribute vector. Attributes are retained.
pub fn hash_graph(
    g: &AttributedGraph,
    mode: HashMode,
    r: f64,
    seed: SeedSpec,
    iteration: u32,
    graph_index: usize,
) -> Result<AttributedGraph> {
    let dim = g.attribute_dim().ok_or(Error::MissingAttributes)?;
    let hasher = IterationHasher::new(seed, iteration, mode, r, dim)?;
    let raw = hasher.hash_labels(g, graph_index)?;
    g.relabeled(raw.into_iter().map(zigzag).collect())
}

/// Monte-Carlo estimate of the collision probability Pr[h1(x) = h2(y)] that
/// defines the induced attribute kernel. In shared mode h1 = h2 per trial;
/// in independent mode two functions are drawn per trial.
pub fn estimate_collision_kernel(
    x: &[f64],
    y: &[f64],
    r: f64,
    mode: HashMode,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("attribute dimensions differ".into()));
    }
    let mut hits = 0usize;
    for _ in 0..trials {
        let h1 = StableHashFunction::sample(x.len(), r, rng)?;
        let collide = match mode {
            HashMode::Shared => h1.apply(x)? == h1.apply(y)?,
            HashMode::Independent => {
                let h2 = StableHashFunction::sample(y.len(), r, rng)?;
                h1.apply(x)? == h2.apply(y)?
            }
        };
        if collide {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Closed-form shared-function collision probability of 2-stable LSH at
/// Euclidean distance `c` with interval length `r`, by numerical quadrature:
/// p(c) = integral_0^r (1/c) phi(t/c) (1 - t/r) * 2 dt with phi the standard
/// normal density. Used as an independent oracle in tests.
pub fn lsh_collision_closed_form(c: f64, r: f64) -> f64 {
    if c == 0.0 {
        return 1.0;
    }
    let phi = |t: f64| (-(t * t) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let f = |t: f64| (2.0 / c) * phi(t / c) * (1.0 - t / r);
    // Simpson's rule on [0, r]
    let n = 20_000;
    let hstep = r / n as f64;
    let mut acc = f(0.0) + f(r);
    for i in 1..n {
        let t = i as f64 * hstep;
        acc += f(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * hstep / 3.0
}
