//! Classification harness: one-vs-rest linear SVM trained by stochastic
//! subgradient descent on explicit features, and repeated stratified
//! cross-validation with inner-fold hyperparameter selection.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::features::FeatureVector;
use crate::graph::GraphCollection;
use crate::hashing::SeedSpec;
use crate::hgk::{
    featurize_collection, standardize_attributes, BaseKernel, FeatureRegistry, HgkConfig,
};
use crate::features::{sp_feature_map, wl_feature_map, WlContext};
use crate::{Error, Result};

/// Dense training sample (used for small attribute-space problems).
#[derive(Debug, Clone)]
pub struct DenseSample {
    pub features: Vec<f64>,
    pub class: usize,
}

/// Sparse training sample: (index, value) pairs sorted by index.
#[derive(Debug, Clone)]
pub struct SparseSample {
    pub features: Vec<(u32, f64)>,
    pub class: usize,
}

/// One-vs-rest linear model over a dense index space.
#[derive(Debug, Clone)]
pub struct SvmModel {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl SvmModel {
    pub fn class_count(&self) -> usize {
        self.weights.len()
    }

    pub fn score_sparse(&self, class: usize, x: &[(u32, f64)]) -> f64 {
        let w = &self.weights[class];
        x.iter().map(|&(i, v)| w[i as usize] * v).sum::<f64>() + self.biases[class]
    }

    pub fn predict_sparse(&self, x: &[(u32, f64)]) -> usize {
        (0..self.class_count())
            .max_by(|&a, &b| {
                self.score_sparse(a, x).partial_cmp(&self.score_sparse(b, x)).unwrap()
            })
            .unwrap()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let sparse: Vec<(u32, f64)> =
            x.iter().enumerate().map(|(i, &v)| (i as u32, v)).collect();
        self.predict_sparse(&sparse)
    }
}

// Pegasos-style binary trainer: hinge loss with regularization 1/(C n),
// weight kept as scale * dense vector so per-step shrinkage is O(1).
fn train_binary(
    samples: &[SparseSample],
    positive: usize,
    dim: usize,
    c: f64,
    epochs: usize,
    rng: &mut impl Rng,
) -> (Vec<f64>, f64) {
    let n = samples.len();
    let lambda = 1.0 / (c * n as f64);
    let mut v = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0usize;
    for _ in 0..epochs {
        order.shuffle(rng);
        for &idx in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let s = &samples[idx];
            let y = if s.class == positive { 1.0 } else { -1.0 };
            let score =
                scale * s.features.iter().map(|&(i, x)| v[i as usize] * x).sum::<f64>() + bias;
            scale *= 1.0 - eta * lambda;
            if scale < 1e-9 {
                for w in &mut v {
                    *w *= scale;
                }
                scale = 1.0;
            }
            if y * score < 1.0 {
                let step = eta * y / scale;
                for &(i, x) in &s.features {
                    v[i as usize] += step * x;
                }
                bias += eta * y * 0.01; // small unregularized intercept step
            }
        }
    }
    (v.into_iter().map(|w| w * scale).collect(), bias)
}

/// Trains one-vs-rest linear SVMs on sparse samples over `dim` indices.
/// Deterministic given the rng state. Errors when fewer than two classes
/// are present.
pub fn train_linear_svm_sparse(
    samples: &[SparseSample],
    dim: usize,
    c: f64,
    epochs: usize,
    rng: &mut impl Rng,
) -> Result<SvmModel> {
    let class_count = samples.iter().map(|s| s.class + 1).max().unwrap_or(0);
    let present: std::collections::BTreeSet<usize> =
        samples.iter().map(|s| s.class).collect();
    if present.len() < 2 {
        return Err(Error::Training(format!(
            "need at least two classes, got {}",
            present.len()
        )));
    }
    let mut weights = Vec::with_capacity(class_count);
    let mut biases = Vec::with_capacity(class_count);
    for class in 0..class_count {
        let (w, b) = train_binary(samples, class, dim, c, epochs, rng);
        weights.push(w);
        biases.push(b);
    }
    Ok(SvmModel { weights, biases })
}

/// Dense-sample convenience wrapper around [`train_linear_svm_sparse`].
pub fn train_linear_svm(
    samples: &[DenseSample],
    c: f64,
    epochs: usize,
    rng: &mut impl Rng,
) -> Result<SvmModel> {
    let dim = samples.first().map(|s| s.features.len()).unwrap_or(0);
    let sparse: Vec<SparseSample> = samples
        .iter()
        .map(|s| SparseSample {
            features: s.features.iter().enumerate().map(|(i, &v)| (i as u32, v)).collect(),
            class: s.class,
        })
        .collect();
    train_linear_svm_sparse(&sparse, dim, c, epochs, rng)
}

/// Cross-validation protocol parameters.
#[derive(Debug, Clone)]
pub struct CvConfig {
    pub folds: usize,
    pub repetitions: usize,
    pub c_grid: Vec<f64>,
    /// Folds of the inner grid-selection loop on the training folds.
    pub inner_folds: usize,
    pub epochs: usize,
    pub seed: SeedSpec,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            repetitions: 10,
            c_grid: (-3..=3).map(|e| 10f64.powi(e)).collect(),
            inner_folds: 5,
            epochs: 20,
            seed: SeedSpec::new(0),
        }
    }
}

/// Aggregated evaluation outcome.
#[derive(Debug, Clone)]
pub struct EvalReport {
    /// Mean held-out accuracy in percent over all folds and repetitions.
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub featurize_secs: f64,
    pub train_secs: f64,
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        format!(
            "accuracy_mean,{}\naccuracy_std,{}\nfeaturize_secs,{}\ntrain_secs,{}\n",
            self.mean_accuracy, self.std_accuracy, self.featurize_secs, self.train_secs
        )
    }
}

/// How graphs are turned into feature vectors inside the harness.
#[derive(Debug, Clone)]
pub enum FeaturizerKind {
    /// Hash graph kernel features; when `depth_grid` is given (WL base
    /// only), the refinement depth is selected by inner CV.
    Hgk { cfg: HgkConfig, depth_grid: Option<Vec<u16>> },
    /// Plain WL subtree features on discrete labels; depth selected from
    /// the grid by inner CV.
    DiscreteWl { depth_grid: Vec<u16> },
    /// Plain shortest-path features on discrete labels.
    DiscreteSp,
}

struct Candidate {
    samples: Vec<Vec<(u32, f64)>>,
    dim: usize,
}

fn indexed_candidate(features: &[FeatureVector]) -> Candidate {
    let registry = FeatureRegistry::build(features);
    Candidate {
        samples: features.iter().map(|f| registry.to_indexed(f)).collect(),
        dim: registry.len(),
    }
}

/// Featurization is label-blind: class labels are never read here.
fn build_candidates(c: &GraphCollection, kind: &FeaturizerKind) -> Result<Vec<Candidate>> {
    match kind {
        FeaturizerKind::Hgk { cfg, depth_grid } => {
            let standardized = standardize_attributes(c)?;
            match (cfg.base, depth_grid) {
                (BaseKernel::Wl { .. }, Some(grid)) => {
                    let max = *grid.iter().max().ok_or_else(|| {
                        Error::InvalidArgument("empty depth grid".into())
                    })?;
                    let deep_cfg = HgkConfig { base: BaseKernel::Wl { depth: max }, ..*cfg };
                    let deep = featurize_collection(&standardized, &deep_cfg)?;
                    Ok(grid
                        .iter()
                        .map(|&h| {
                            let truncated: Vec<FeatureVector> =
                                deep.iter().map(|f| f.truncated_to_wl_round(h)).collect();
                            indexed_candidate(&truncated)
                        })
                        .collect())
                }
                _ => {
                    let features = featurize_collection(&standardized, cfg)?;
                    Ok(vec![indexed_candidate(&features)])
                }
            }
        }
        FeaturizerKind::DiscreteWl { depth_grid } => {
            let max = *depth_grid
                .iter()
                .max()
                .ok_or_else(|| Error::InvalidArgument("empty depth grid".into()))?;
            let mut ctx = WlContext::new();
            let deep: Vec<FeatureVector> = c
                .graphs
                .iter()
                .map(|g| wl_feature_map(g, max, &mut ctx))
                .collect::<Result<_>>()?;
            Ok(depth_grid
                .iter()
                .map(|&h| {
                    let truncated: Vec<FeatureVector> =
                        deep.iter().map(|f| f.truncated_to_wl_round(h)).collect();
                    indexed_candidate(&truncated)
                })
                .collect())
        }
        FeaturizerKind::DiscreteSp => {
            let features: Vec<FeatureVector> =
                c.graphs.iter().map(sp_feature_map).collect::<Result<_>>()?;
            Ok(vec![indexed_candidate(&features)])
        }
    }
}

/// Stratified fold assignment: per-class proportional, fold sizes differing
/// by at most one.
pub fn stratified_folds(classes: &[usize], folds: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in classes.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    let mut assignment = vec![Vec::new(); folds];
    let mut next = 0usize;
    for (_, mut members) in by_class {
        members.shuffle(rng);
        for m in members {
            assignment[next % folds].push(m);
            next += 1;
        }
    }
    assignment
}

fn accuracy(
    model: &SvmModel,
    candidate: &Candidate,
    indices: &[usize],
    classes: &[usize],
) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let correct = indices
        .iter()
        .filter(|&&i| model.predict_sparse(&candidate.samples[i]) == classes[i])
        .count();
    100.0 * correct as f64 / indices.len() as f64
}

fn subset(candidate: &Candidate, indices: &[usize], classes: &[usize]) -> Vec<SparseSample> {
    indices
        .iter()
        .map(|&i| SparseSample { features: candidate.samples[i].clone(), class: classes[i] })
        .collect()
}

/// Repeated stratified k-fold cross-validation with hyperparameters (C and,
/// when a depth grid is given, the WL depth) selected by inner CV on the
/// training folds only.
///
/// Attribute standardization and feature registries are computed over the
/// full collection before splitting, matching the usual protocol of
/// preprocessing before kernel computation; featurization itself never
/// reads class labels.
pub fn cross_validate(
    c: &GraphCollection,
    kind: &FeaturizerKind,
    cv: &CvConfig,
) -> Result<EvalReport> {
    if cv.folds < 2 {
        return Err(Error::InvalidArgument("folds must be >= 2".into()));
    }
    if c.len() < cv.folds {
        return Err(Error::InvalidArgument(format!(
            "{} graphs cannot fill {} folds",
            c.len(),
            cv.folds
        )));
    }
    if cv.c_grid.is_empty() {
        return Err(Error::InvalidArgument("empty C grid".into()));
    }
    let raw_classes: Vec<i64> = c
        .graphs
        .iter()
        .map(|g| {
            g.class_label()
                .ok_or_else(|| Error::InvalidArgument("graph without class label".into()))
        })
        .collect::<Result<_>>()?;
    let alphabet: Vec<i64> = {
        let mut a: Vec<i64> = raw_classes.clone();
        a.sort_unstable();
        a.dedup();
        a
    };
    let classes: Vec<usize> =
        raw_classes.iter().map(|l| alphabet.binary_search(l).unwrap()).collect();

    let featurize_start = Instant::now();
    let candidates = build_candidates(c, kind)?;
    let featurize_secs = featurize_start.elapsed().as_secs_f64();

    let train_start = Instant::now();
    let mut fold_accuracies = Vec::with_capacity(cv.folds * cv.repetitions);
    for rep in 0..cv.repetitions {
        let mut rng = cv.seed.stream_rng(0xcf0d + rep as u64);
        let folds = stratified_folds(&classes, cv.folds, &mut rng);
        for held_out in 0..cv.folds {
            let train_idx: Vec<usize> = (0..cv.folds)
                .filter(|&f| f != held_out)
                .flat_map(|f| folds[f].iter().copied())
                .collect();

            // inner grid selection over (candidate, C)
            let (mut best_key, mut best_score) = ((0usize, cv.c_grid[0]), f64::NEG_INFINITY);
            if candidates.len() > 1 || cv.c_grid.len() > 1 {
                let train_classes: Vec<usize> = train_idx.iter().map(|&i| classes[i]).collect();
                let inner =
                    stratified_folds(&train_classes, cv.inner_folds.max(2), &mut rng);
                for (ci, candidate) in candidates.iter().enumerate() {
                    for &cost in &cv.c_grid {
                        let mut score = 0.0;
                        for inner_fold in &inner {
                            let val_idx: Vec<usize> =
                                inner_fold.iter().map(|&k| train_idx[k]).collect();
                            let fit_idx: Vec<usize> = inner
                                .iter()
                                .filter(|f| !std::ptr::eq(*f, inner_fold))
                                .flat_map(|f| f.iter().map(|&k| train_idx[k]))
                                .collect();
                            let fit = subset(candidate, &fit_idx, &classes);
                            match train_linear_svm_sparse(
                                &fit,
                                candidate.dim,
                                cost,
                                cv.epochs,
                                &mut rng,
                            ) {
                                Ok(model) => {
                                    score += accuracy(&model, candidate, &val_idx, &classes)
                                }
                                Err(Error::Training(_)) => {}
                                Err(e) => return Err(e),
                            }
                        }
                        if score > best_score {
                            best_score = score;
                            best_key = (ci, cost);
                        }
                    }
                }
            }

            let (ci, cost) = best_key;
            let candidate = &candidates[ci];
            let fit = subset(candidate, &train_idx, &classes);
            let model = train_linear_svm_sparse(&fit, candidate.dim, cost, cv.epochs, &mut rng)?;
            fold_accuracies.push(accuracy(&model, candidate, &folds[held_out], &classes));
        }
    }
    let train_secs = train_start.elapsed().as_secs_f64();

    let mean = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    let var = fold_accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>()
        / fold_accuracies.len() as f64;
    Ok(EvalReport {
        mean_accuracy: mean,
        std_accuracy: var.sqrt(),
        fold_accuracies,
        featurize_secs,
        train_secs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AttributedGraph;
    use crate::hashing::HashMode;
    use crate::hgk::LabelMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn svm_separates_one_coordinate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples: Vec<DenseSample> = (0..40)
            .map(|i| {
                let pos = i % 2 == 0;
                DenseSample {
                    features: vec![if pos { 1.0 } else { -1.0 }, 0.3],
                    class: usize::from(pos),
                }
            })
            .collect();
        let model = train_linear_svm(&samples, 1.0, 20, &mut rng).unwrap();
        let correct = samples
            .iter()
            .filter(|s| model.predict(&s.features) == s.class)
            .count();
        assert_eq!(correct, samples.len());
    }

    #[test]
    fn svm_rejects_single_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples: Vec<DenseSample> =
            (0..10).map(|_| DenseSample { features: vec![1.0], class: 0 }).collect();
        assert!(matches!(
            train_linear_svm(&samples, 1.0, 5, &mut rng),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn tiny_c_shrinks_weights() {
        // regularization dominates as C -> 0
        let samples: Vec<DenseSample> = (0..40)
            .map(|i| DenseSample {
                features: vec![if i % 2 == 0 { 2.0 } else { -2.0 }],
                class: i % 2,
            })
            .collect();
        let norm = |c: f64| {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let m = train_linear_svm(&samples, c, 20, &mut rng).unwrap();
            m.weights.iter().flat_map(|w| w.iter().map(|x| x * x)).sum::<f64>()
        };
        assert!(norm(1e-6) < norm(1.0));
    }

    #[test]
    fn four_class_separable_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let centers = [[6.0, 0.0], [-6.0, 0.0], [0.0, 6.0], [0.0, -6.0]];
        let samples: Vec<DenseSample> = (0..200)
            .map(|i| {
                let class = i % 4;
                let jitter: f64 = rng.gen_range(-0.5..0.5);
                DenseSample {
                    features: vec![centers[class][0] + jitter, centers[class][1] - jitter],
                    class,
                }
            })
            .collect();
        let model = train_linear_svm(&samples, 10.0, 30, &mut rng).unwrap();
        let correct =
            samples.iter().filter(|s| model.predict(&s.features) == s.class).count();
        assert!(
            correct as f64 >= 0.99 * samples.len() as f64,
            "training accuracy {}/{}",
            correct,
            samples.len()
        );
    }

    #[test]
    fn stratified_folds_partition_evenly() {
        let classes: Vec<usize> = (0..53).map(|i| i % 3).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let folds = stratified_folds(&classes, 10, &mut rng);
        let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 53);
        let (min, max) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        assert!(max - min <= 1, "sizes {sizes:?}");
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..53).collect::<Vec<_>>());
    }

    fn duplicated_collection() -> GraphCollection {
        let a = AttributedGraph::new(3, &[(0, 1), (1, 2)])
            .unwrap()
            .with_attributes(vec![vec![1.0, 0.0]; 3])
            .unwrap()
            .with_class_label(0);
        let b = AttributedGraph::new(3, &[(0, 1), (1, 2), (2, 0)])
            .unwrap()
            .with_attributes(vec![vec![0.0, 1.0]; 3])
            .unwrap()
            .with_class_label(1);
        let mut graphs = Vec::new();
        for _ in 0..10 {
            graphs.push(a.clone());
            graphs.push(b.clone());
        }
        GraphCollection::new("dup", graphs).unwrap()
    }

    #[test]
    fn duplicated_graphs_reach_full_accuracy() {
        let c = duplicated_collection();
        let kind = FeaturizerKind::Hgk {
            cfg: HgkConfig {
                iterations: 4,
                base: BaseKernel::Sp,
                width: 1.0,
                hash_mode: HashMode::Shared,
                label_mode: LabelMode::Cont,
                seed: SeedSpec::new(7),
            },
            depth_grid: None,
        };
        let cv = CvConfig {
            folds: 5,
            repetitions: 2,
            c_grid: vec![1.0],
            inner_folds: 2,
            epochs: 10,
            seed: SeedSpec::new(1),
        };
        let report = cross_validate(&c, &kind, &cv).unwrap();
        assert_eq!(report.mean_accuracy, 100.0);
    }

    #[test]
    fn random_labels_score_near_chance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let graphs: Vec<AttributedGraph> = (0..60)
            .map(|i| {
                let g = crate::datagen::gen_er_graph(8, 0.3, &mut rng);
                let attrs =
                    (0..8).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
                g.with_attributes(attrs).unwrap().with_class_label((i % 2) as i64)
            })
            .collect();
        let c = GraphCollection::new("noise", graphs).unwrap();
        let kind = FeaturizerKind::Hgk {
            cfg: HgkConfig {
                iterations: 3,
                base: BaseKernel::Sp,
                width: 1.0,
                hash_mode: HashMode::Shared,
                label_mode: LabelMode::Cont,
                seed: SeedSpec::new(3),
            },
            depth_grid: None,
        };
        let cv = CvConfig {
            folds: 5,
            repetitions: 3,
            c_grid: vec![1.0],
            inner_folds: 2,
            epochs: 10,
            seed: SeedSpec::new(2),
        };
        let report = cross_validate(&c, &kind, &cv).unwrap();
        assert!(
            (report.mean_accuracy - 50.0).abs() <= 15.0,
            "chance-level expected, got {}",
            report.mean_accuracy
        );
    }

    #[test]
    fn identical_seeds_reproduce_reports() {
        let c = duplicated_collection();
        let kind = FeaturizerKind::Hgk {
            cfg: HgkConfig {
                iterations: 2,
                base: BaseKernel::Wl { depth: 1 },
                width: 1.0,
                hash_mode: HashMode::Shared,
                label_mode: LabelMode::Cont,
                seed: SeedSpec::new(7),
            },
            depth_grid: Some(vec![0, 1]),
        };
        let cv = CvConfig {
            folds: 4,
            repetitions: 2,
            c_grid: vec![0.1, 10.0],
            inner_folds: 2,
            epochs: 5,
            seed: SeedSpec::new(4),
        };
        let a = cross_validate(&c, &kind, &cv).unwrap();
        let b = cross_validate(&c, &kind, &cv).unwrap();
        assert_eq!(a.fold_accuracies, b.fold_accuracies);
    }

    #[test]
    fn too_few_graphs_for_folds_errors() {
        let c = duplicated_collection();
        let kind = FeaturizerKind::DiscreteSp;
        let cv = CvConfig { folds: 30, ..CvConfig::default() };
        assert!(cross_validate(&c, &kind, &cv).is_err());
    }
}
