//! Python bindings: graph construction, TU-format IO, synthetic benchmark
//! generation, hashed-kernel featurization, gram matrices, and cross
//! validation.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hgk_core::datagen::{gen_synthie as core_gen_synthie, SynthieParams};
use hgk_core::eval::{cross_validate as core_cross_validate, CvConfig, FeaturizerKind};
use hgk_core::graph::{parse_tu_dataset, write_tu_dataset, AttributedGraph, GraphCollection};
use hgk_core::hgk::{
    cosine_normalize, featurize_collection, gram_from_features, standardize_attributes,
};
use hgk_core::{BaseKernel, HashMode, HgkConfig, LabelMode, SeedSpec};

fn err(e: hgk_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Undirected graph with optional discrete labels, continuous attributes,
/// and a class label.
#[pyclass(name = "Graph")]
#[derive(Clone)]
struct PyGraph {
    inner: AttributedGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (node_count, edges, labels=None, attributes=None, class_label=None))]
    fn new(
        node_count: usize,
        edges: Vec<(u32, u32)>,
        labels: Option<Vec<u64>>,
        attributes: Option<Vec<Vec<f64>>>,
        class_label: Option<i64>,
    ) -> PyResult<Self> {
        let mut g = AttributedGraph::new(node_count, &edges).map_err(err)?;
        if let Some(l) = labels {
            g = g.with_labels(l).map_err(err)?;
        }
        if let Some(a) = attributes {
            g = g.with_attributes(a).map_err(err)?;
        }
        if let Some(c) = class_label {
            g = g.with_class_label(c);
        }
        Ok(Self { inner: g })
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn edges(&self) -> Vec<(u32, u32)> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn labels(&self) -> Option<Vec<u64>> {
        self.inner.labels().map(|l| l.to_vec())
    }

    #[getter]
    fn attributes(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.attributes().map(|a| a.to_vec())
    }

    #[getter]
    fn class_label(&self) -> Option<i64> {
        self.inner.class_label()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<u32>> {
        Ok(self.inner.neighbors(v).map_err(err)?.to_vec())
    }

    /// Copy with node degrees as discrete labels; existing labels are kept
    /// unless `force` is set.
    #[pyo3(signature = (force=false))]
    fn labeled_by_degree(&self, force: bool) -> Self {
        Self { inner: self.inner.labeled_by_degree(force) }
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.inner.node_count(), self.inner.edge_count())
    }
}

/// Named list of graphs sharing one attribute dimensionality.
#[pyclass(name = "Collection")]
#[derive(Clone)]
struct PyCollection {
    inner: GraphCollection,
}

#[pymethods]
impl PyCollection {
    #[new]
    fn new(name: String, graphs: Vec<PyGraph>) -> PyResult<Self> {
        let inner = GraphCollection::new(name, graphs.into_iter().map(|g| g.inner).collect())
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn attribute_dim(&self) -> Option<usize> {
        self.inner.attribute_dim
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __getitem__(&self, idx: isize) -> PyResult<PyGraph> {
        let n = self.inner.len() as isize;
        let i = if idx < 0 { idx + n } else { idx };
        if i < 0 || i >= n {
            return Err(PyValueError::new_err(format!("index {idx} out of range for {n} graphs")));
        }
        Ok(PyGraph { inner: self.inner.graphs[i as usize].clone() })
    }

    fn class_labels(&self) -> Vec<Option<i64>> {
        self.inner.class_labels()
    }

    /// Dimension-wise standardization of attributes over the whole
    /// collection.
    fn standardized(&self) -> PyResult<Self> {
        Ok(Self { inner: standardize_attributes(&self.inner).map_err(err)? })
    }

    /// Copy with degree labels on graphs that lack discrete labels.
    fn labeled_by_degree(&self) -> PyResult<Self> {
        let graphs = self.inner.graphs.iter().map(|g| g.labeled_by_degree(false)).collect();
        Ok(Self { inner: GraphCollection::new(self.inner.name.clone(), graphs).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("Collection(name={:?}, graphs={})", self.inner.name, self.inner.len())
    }
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    iterations: u32,
    base: &str,
    wl_depth: u16,
    r: f64,
    hash_mode: &str,
    label_mode: &str,
    seed: u64,
) -> PyResult<HgkConfig> {
    let base = match base {
        "wl" => BaseKernel::Wl { depth: wl_depth },
        "sp" => BaseKernel::Sp,
        other => return Err(PyValueError::new_err(format!("unknown base kernel {other:?}"))),
    };
    let hash_mode = match hash_mode {
        "shared" => HashMode::Shared,
        "independent" => HashMode::Independent,
        other => return Err(PyValueError::new_err(format!("unknown hash mode {other:?}"))),
    };
    let label_mode = match label_mode {
        "cont" => LabelMode::Cont,
        "label-cont" => LabelMode::LabelCont,
        other => return Err(PyValueError::new_err(format!("unknown label mode {other:?}"))),
    };
    Ok(HgkConfig { iterations, base, width: r, hash_mode, label_mode, seed: SeedSpec::new(seed) })
}

/// Load a dataset directory in TU layout.
#[pyfunction]
fn load_tu_dataset(dir: &str, name: &str) -> PyResult<PyCollection> {
    Ok(PyCollection { inner: parse_tu_dataset(dir, name).map_err(err)? })
}

/// Write a collection as a TU-layout dataset directory; returns the file
/// paths written.
#[pyfunction]
fn save_tu_dataset(collection: &PyCollection, dir: &str) -> PyResult<Vec<String>> {
    let files = write_tu_dataset(&collection.inner, dir).map_err(err)?;
    Ok(files.into_iter().map(|p| p.display().to_string()).collect())
}

/// Generate the synthetic attributed 4-class benchmark.
#[pyfunction]
#[pyo3(signature = (
    seed=0,
    seed_graph_size=10,
    er_edge_prob=0.2,
    perturbation_fraction=0.25,
    seeds_per_graph=10,
    graphs_per_superclass=200,
    attr_dim=15,
    mix_prob=0.8,
))]
#[allow(clippy::too_many_arguments)]
fn gen_synthie(
    seed: u64,
    seed_graph_size: usize,
    er_edge_prob: f64,
    perturbation_fraction: f64,
    seeds_per_graph: usize,
    graphs_per_superclass: usize,
    attr_dim: usize,
    mix_prob: f64,
) -> PyResult<PyCollection> {
    let params = SynthieParams {
        seed_graph_size,
        er_edge_prob,
        perturbation_fraction,
        seeds_per_graph,
        graphs_per_superclass,
        attr_dim,
        mix_prob,
        seed: SeedSpec::new(seed),
    };
    Ok(PyCollection { inner: core_gen_synthie(&params).map_err(err)? })
}

/// Hashed-kernel feature maps as dicts keyed by canonical feature strings.
#[pyfunction]
#[pyo3(signature = (
    collection,
    iterations=20,
    base="wl",
    wl_depth=4,
    r=1.0,
    hash_mode="shared",
    label_mode="cont",
    seed=0,
))]
#[allow(clippy::too_many_arguments)]
fn featurize(
    collection: &PyCollection,
    iterations: u32,
    base: &str,
    wl_depth: u16,
    r: f64,
    hash_mode: &str,
    label_mode: &str,
    seed: u64,
) -> PyResult<Vec<std::collections::BTreeMap<String, f64>>> {
    let cfg = build_config(iterations, base, wl_depth, r, hash_mode, label_mode, seed)?;
    let features = featurize_collection(&collection.inner, &cfg).map_err(err)?;
    Ok(features
        .iter()
        .map(|fv| fv.iter().map(|(k, w)| (k.to_string(), *w)).collect())
        .collect())
}

/// Pairwise kernel matrix as nested lists; cosine-normalized unless
/// `normalize` is false.
#[pyfunction]
#[pyo3(signature = (
    collection,
    iterations=20,
    base="wl",
    wl_depth=4,
    r=1.0,
    hash_mode="shared",
    label_mode="cont",
    seed=0,
    normalize=true,
))]
#[allow(clippy::too_many_arguments)]
fn gram(
    collection: &PyCollection,
    iterations: u32,
    base: &str,
    wl_depth: u16,
    r: f64,
    hash_mode: &str,
    label_mode: &str,
    seed: u64,
    normalize: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let cfg = build_config(iterations, base, wl_depth, r, hash_mode, label_mode, seed)?;
    let features = featurize_collection(&collection.inner, &cfg).map_err(err)?;
    let mut k = gram_from_features(&features).map_err(err)?;
    if normalize {
        k = cosine_normalize(&k);
    }
    Ok((0..k.size()).map(|i| (0..k.size()).map(|j| k.get(i, j)).collect()).collect())
}

/// Repeated stratified k-fold cross validation with a linear SVM; returns a
/// dict with mean/std accuracy (percent) and stage timings.
#[pyfunction]
#[pyo3(signature = (
    collection,
    iterations=20,
    base="wl",
    wl_depth=4,
    r=1.0,
    hash_mode="shared",
    label_mode="cont",
    seed=0,
    folds=10,
    repetitions=10,
    inner_folds=5,
    c_grid=vec![0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0],
    epochs=20,
    select_depth=false,
    discrete=false,
))]
#[allow(clippy::too_many_arguments)]
fn cross_validate(
    py: Python<'_>,
    collection: &PyCollection,
    iterations: u32,
    base: &str,
    wl_depth: u16,
    r: f64,
    hash_mode: &str,
    label_mode: &str,
    seed: u64,
    folds: usize,
    repetitions: usize,
    inner_folds: usize,
    c_grid: Vec<f64>,
    epochs: usize,
    select_depth: bool,
    discrete: bool,
) -> PyResult<PyObject> {
    let cfg = build_config(iterations, base, wl_depth, r, hash_mode, label_mode, seed)?;
    let depth_grid: Vec<u16> = (0..=wl_depth).collect();
    let kind = match (discrete, base) {
        (true, "wl") => FeaturizerKind::DiscreteWl { depth_grid },
        (true, _) => FeaturizerKind::DiscreteSp,
        (false, _) => FeaturizerKind::Hgk {
            cfg,
            depth_grid: if select_depth && base == "wl" { Some(depth_grid) } else { None },
        },
    };
    let cv = CvConfig { folds, repetitions, c_grid, inner_folds, epochs, seed: SeedSpec::new(seed) };
    let report = core_cross_validate(&collection.inner, &kind, &cv).map_err(err)?;

    let out = pyo3::types::PyDict::new_bound(py);
    out.set_item("mean_accuracy", report.mean_accuracy)?;
    out.set_item("std_accuracy", report.std_accuracy)?;
    out.set_item("fold_accuracies", report.fold_accuracies)?;
    out.set_item("featurize_secs", report.featurize_secs)?;
    out.set_item("train_secs", report.train_secs)?;
    Ok(out.into())
}

#[pymodule]
fn hgk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyCollection>()?;
    m.add_function(wrap_pyfunction!(load_tu_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(save_tu_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(gen_synthie, m)?)?;
    m.add_function(wrap_pyfunction!(featurize, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    Ok(())
}
