//! Attributed/labeled graph representation and TU-format dataset ingestion.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// Undirected graph with optional discrete node labels and optional
/// real-valued node attributes of a shared dimension.
///
/// Node indices are dense and 0-based. Graphs are immutable after
/// construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    node_count: usize,
    edges: Vec<(u32, u32)>,
    adjacency: Vec<Vec<u32>>,
    labels: Option<Vec<u64>>,
    attributes: Option<Vec<Vec<f64>>>,
    class_label: Option<i64>,
}

impl AttributedGraph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are merged; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn new(node_count: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u as usize >= node_count || v as usize >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u},{v}) out of range for {node_count} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<(u32, u32)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &edges {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Self {
            node_count,
            edges,
            adjacency,
            labels: None,
            attributes: None,
            class_label: None,
        })
    }

    /// Attaches one discrete label per node.
    pub fn with_labels(mut self, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != self.node_count {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Attaches one attribute vector per node; all vectors must share the
    /// same dimension d >= 1.
    pub fn with_attributes(mut self, attributes: Vec<Vec<f64>>) -> Result<Self> {
        if attributes.len() != self.node_count {
            return Err(Error::InvalidGraph(format!(
                "{} attribute rows for {} nodes",
                attributes.len(),
                self.node_count
            )));
        }
        if let Some(first) = attributes.first() {
            let d = first.len();
            if d == 0 {
                return Err(Error::InvalidGraph("zero-dimensional attributes".into()));
            }
            if attributes.iter().any(|a| a.len() != d) {
                return Err(Error::InvalidGraph(
                    "attribute vectors of mixed dimension".into(),
                ));
            }
        }
        self.attributes = Some(attributes);
        Ok(self)
    }

    pub fn with_class_label(mut self, class: i64) -> Self {
        self.class_label = Some(class);
        self
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Undirected edges as (min, max) pairs, sorted and deduplicated.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> Option<&[u64]> {
        self.labels.as_deref()
    }

    pub fn attributes(&self) -> Option<&[Vec<f64>]> {
        self.attributes.as_deref()
    }

    pub fn attribute_dim(&self) -> Option<usize> {
        self.attributes
            .as_ref()
            .and_then(|a| a.first().map(|v| v.len()))
    }

    pub fn class_label(&self) -> Option<i64> {
        self.class_label
    }

    /// Adjacent nodes of `v`, sorted ascending.
    pub fn neighbors(&self, v: usize) -> Result<&[u32]> {
        self.adjacency
            .get(v)
            .map(|n| n.as_slice())
            .ok_or_else(|| Error::InvalidArgument(format!("node index {v} out of range")))
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        Ok(self.neighbors(v)?.len())
    }

    /// Replaces labels if not already present. With `force`, existing labels
    /// are overwritten too.
    pub fn labeled_by_degree(&self, force: bool) -> AttributedGraph {
        let mut g = self.clone();
        if g.labels.is_none() || force {
            g.labels = Some(self.adjacency.iter().map(|n| n.len() as u64).collect());
        }
        g
    }

    /// Returns a copy with the given labels, keeping everything else.
    pub fn relabeled(&self, labels: Vec<u64>) -> Result<AttributedGraph> {
        self.clone().with_labels(labels)
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w as usize);
                }
            }
        }
        count == self.node_count
    }
}

/// A set of graphs compared with one another; all attributed members share
/// one attribute dimension.
#[derive(Debug, Clone)]
pub struct GraphCollection {
    pub graphs: Vec<AttributedGraph>,
    pub attribute_dim: Option<usize>,
    pub name: String,
}

impl GraphCollection {
    pub fn new(name: impl Into<String>, graphs: Vec<AttributedGraph>) -> Result<Self> {
        let mut dim = None;
        for g in &graphs {
            if let Some(d) = g.attribute_dim() {
                match dim {
                    None => dim = Some(d),
                    Some(prev) if prev != d => {
                        return Err(Error::InvalidGraph(format!(
                            "attribute dimensions differ across graphs: {prev} vs {d}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(Self {
            graphs,
            attribute_dim: dim,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn class_labels(&self) -> Vec<Option<i64>> {
        self.graphs.iter().map(|g| g.class_label()).collect()
    }
}

fn open(dir: &Path, name: &str, suffix: &str) -> Result<BufReader<File>> {
    let path = dir.join(format!("{name}_{suffix}.txt"));
    if !path.exists() {
        return Err(Error::MissingFile(path));
    }
    Ok(BufReader::new(File::open(path)?))
}

fn read_lines(dir: &Path, name: &str, suffix: &str) -> Result<Vec<String>> {
    let reader = open(dir, name, suffix)?;
    let mut lines = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim_end_matches('\r');
        if !t.trim().is_empty() {
            lines.push(t.to_string());
        }
    }
    Ok(lines)
}

fn format_err(file: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

/// Loads a dataset in the TU Dortmund benchmark layout: `DS_A.txt`,
/// `DS_graph_indicator.txt`, `DS_graph_labels.txt`, and optionally
/// `DS_node_labels.txt` / `DS_node_attributes.txt`.
///
/// Global 1-based node ids are re-based to dense 0-based indices per graph.
/// Duplicate edges and self-loops are dropped. Discrete node labels are
/// interned to a dense alphabet over the whole collection.
pub fn parse_tu_dataset(dir: impl AsRef<Path>, name: &str) -> Result<GraphCollection> {
    let dir = dir.as_ref();

    let indicator_file = format!("{name}_graph_indicator.txt");
    let indicator: Vec<usize> = read_lines(dir, name, "graph_indicator")?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.trim()
                .parse::<usize>()
                .map_err(|_| format_err(&indicator_file, i + 1, format!("bad graph id {l:?}")))
        })
        .collect::<Result<_>>()?;
    let total_nodes = indicator.len();
    let graph_count = indicator.iter().copied().max().unwrap_or(0);
    for (i, &g) in indicator.iter().enumerate() {
        if g == 0 || g > graph_count {
            return Err(format_err(&indicator_file, i + 1, "graph id out of range"));
        }
    }

    let labels_file = format!("{name}_graph_labels.txt");
    let class_labels: Vec<i64> = read_lines(dir, name, "graph_labels")?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.trim()
                .parse::<i64>()
                .map_err(|_| format_err(&labels_file, i + 1, format!("bad class label {l:?}")))
        })
        .collect::<Result<_>>()?;
    if class_labels.len() != graph_count {
        return Err(Error::InvalidGraph(format!(
            "{} graph labels for {} graphs",
            class_labels.len(),
            graph_count
        )));
    }

    // Per-graph node counts and re-basing offsets.
    let mut sizes = vec![0usize; graph_count];
    for &g in &indicator {
        sizes[g - 1] += 1;
    }
    let mut local_index = vec![0u32; total_nodes];
    let mut next = vec![0u32; graph_count];
    for (i, &g) in indicator.iter().enumerate() {
        local_index[i] = next[g - 1];
        next[g - 1] += 1;
    }

    let edges_file = format!("{name}_A.txt");
    let mut per_graph_edges: Vec<Vec<(u32, u32)>> = vec![Vec::new(); graph_count];
    let mut dropped = 0usize;
    for (i, line) in read_lines(dir, name, "A")?.iter().enumerate() {
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<usize> {
            s.and_then(|t| t.trim().parse::<usize>().ok())
                .ok_or_else(|| format_err(&edges_file, i + 1, format!("bad edge line {line:?}")))
        };
        let u = parse(parts.next())?;
        let v = parse(parts.next())?;
        if u == 0 || u > total_nodes || v == 0 || v > total_nodes {
            return Err(format_err(&edges_file, i + 1, "node id out of range"));
        }
        let (gu, gv) = (indicator[u - 1], indicator[v - 1]);
        if gu != gv {
            return Err(format_err(&edges_file, i + 1, "edge crosses graphs"));
        }
        if u == v {
            dropped += 1;
            continue;
        }
        per_graph_edges[gu - 1].push((local_index[u - 1], local_index[v - 1]));
    }
    if dropped > 0 {
        eprintln!("warning: dropped {dropped} self-loop(s) while parsing {name}");
    }

    // Optional node labels, interned to a dense alphabet across the collection.
    let node_labels_path = dir.join(format!("{name}_node_labels.txt"));
    let node_labels: Option<Vec<u64>> = if node_labels_path.exists() {
        let file = format!("{name}_node_labels.txt");
        let raw: Vec<i64> = read_lines(dir, name, "node_labels")?
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.trim()
                    .parse::<i64>()
                    .map_err(|_| format_err(&file, i + 1, format!("bad node label {l:?}")))
            })
            .collect::<Result<_>>()?;
        if raw.len() != total_nodes {
            return Err(Error::InvalidGraph(format!(
                "{} node labels for {} nodes",
                raw.len(),
                total_nodes
            )));
        }
        let alphabet: Vec<i64> = raw.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        Some(
            raw.iter()
                .map(|l| alphabet.binary_search(l).unwrap() as u64)
                .collect(),
        )
    } else {
        None
    };

    let attrs_path = dir.join(format!("{name}_node_attributes.txt"));
    let node_attrs: Option<Vec<Vec<f64>>> = if attrs_path.exists() {
        let file = format!("{name}_node_attributes.txt");
        let rows: Vec<Vec<f64>> = read_lines(dir, name, "node_attributes")?
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.split(',')
                    .map(|t| {
                        t.trim().parse::<f64>().map_err(|_| {
                            format_err(&file, i + 1, format!("bad attribute value {t:?}"))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        if rows.len() != total_nodes {
            return Err(Error::InvalidGraph(format!(
                "{} attribute rows for {} nodes",
                rows.len(),
                total_nodes
            )));
        }
        if let Some(d) = rows.first().map(|r| r.len()) {
            if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
                return Err(format_err(
                    &file,
                    i + 1,
                    format!("ragged attribute row: {} values, expected {d}", row.len()),
                ));
            }
        }
        Some(rows)
    } else {
        None
    };

    let mut node_of_graph: Vec<Vec<usize>> = vec![Vec::new(); graph_count];
    for (i, &g) in indicator.iter().enumerate() {
        node_of_graph[g - 1].push(i);
    }

    let mut graphs = Vec::with_capacity(graph_count);
    for gi in 0..graph_count {
        let mut g = AttributedGraph::new(sizes[gi], &per_graph_edges[gi])?;
        if let Some(labels) = &node_labels {
            g = g.with_labels(node_of_graph[gi].iter().map(|&n| labels[n]).collect())?;
        }
        if let Some(attrs) = &node_attrs {
            g = g.with_attributes(node_of_graph[gi].iter().map(|&n| attrs[n].clone()).collect())?;
        }
        graphs.push(g.with_class_label(class_labels[gi]));
    }
    GraphCollection::new(name, graphs)
}

/// Writes a collection in the TU layout parsed by [`parse_tu_dataset`].
/// Round-trips up to label interning.
pub fn write_tu_dataset(collection: &GraphCollection, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let name = &collection.name;
    let mut written = Vec::new();

    let mut offsets = Vec::with_capacity(collection.len());
    let mut total = 0usize;
    for g in &collection.graphs {
        offsets.push(total);
        total += g.node_count();
    }

    let mut emit = |suffix: &str, body: String| -> Result<()> {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        let mut w = BufWriter::new(File::create(&path)?);
        w.write_all(body.as_bytes())?;
        written.push(path);
        Ok(())
    };

    let mut edges = String::new();
    for (gi, g) in collection.graphs.iter().enumerate() {
        for &(u, v) in g.edges() {
            let (a, b) = (offsets[gi] + u as usize + 1, offsets[gi] + v as usize + 1);
            edges.push_str(&format!("{a}, {b}\n{b}, {a}\n"));
        }
    }
    emit("A", edges)?;

    let mut indicator = String::new();
    for (gi, g) in collection.graphs.iter().enumerate() {
        for _ in 0..g.node_count() {
            indicator.push_str(&format!("{}\n", gi + 1));
        }
    }
    emit("graph_indicator", indicator)?;

    let mut classes = String::new();
    for g in &collection.graphs {
        classes.push_str(&format!("{}\n", g.class_label().unwrap_or(0)));
    }
    emit("graph_labels", classes)?;

    if collection.graphs.iter().all(|g| g.labels().is_some()) && !collection.is_empty() {
        let mut labels = String::new();
        for g in &collection.graphs {
            for &l in g.labels().unwrap() {
                labels.push_str(&format!("{l}\n"));
            }
        }
        emit("node_labels", labels)?;
    }

    if collection.attribute_dim.is_some()
        && collection.graphs.iter().all(|g| g.attributes().is_some())
    {
        let mut attrs = String::new();
        for g in &collection.graphs {
            for row in g.attributes().unwrap() {
                let line: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
                attrs.push_str(&line.join(", "));
                attrs.push('\n');
            }
        }
        emit("node_attributes", attrs)?;
    }

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> AttributedGraph {
        AttributedGraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn rejects_self_loops_and_bad_indices() {
        assert!(AttributedGraph::new(2, &[(0, 0)]).is_err());
        assert!(AttributedGraph::new(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn merges_duplicate_edges() {
        let g = AttributedGraph::new(2, &[(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn neighbors_basic() {
        let g = triangle();
        assert_eq!(g.neighbors(0).unwrap(), &[1, 2]);
        let single = AttributedGraph::new(1, &[]).unwrap();
        assert!(single.neighbors(0).unwrap().is_empty());
        let path = AttributedGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.neighbors(1).unwrap(), &[0, 2]);
        assert!(path.neighbors(3).is_err());
    }

    #[test]
    fn degree_labels() {
        assert_eq!(triangle().labeled_by_degree(false).labels().unwrap(), &[2, 2, 2]);
        let path = AttributedGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.labeled_by_degree(false).labels().unwrap(), &[1, 2, 1]);
        let isolated = AttributedGraph::new(1, &[]).unwrap();
        assert_eq!(isolated.labeled_by_degree(false).labels().unwrap(), &[0]);
        // existing labels preserved unless forced
        let g = triangle().with_labels(vec![7, 7, 7]).unwrap();
        assert_eq!(g.labeled_by_degree(false).labels().unwrap(), &[7, 7, 7]);
        assert_eq!(g.labeled_by_degree(true).labels().unwrap(), &[2, 2, 2]);
    }

    fn write_dataset(dir: &Path, name: &str, files: &[(&str, &str)]) {
        for (suffix, body) in files {
            std::fs::write(dir.join(format!("{name}_{suffix}.txt")), body).unwrap();
        }
    }

    #[test]
    fn parses_minimal_tu_dataset() {
        let tmp = tempfile::tempdir().unwrap();
        write_dataset(
            tmp.path(),
            "MINI",
            &[
                ("A", "1, 2\n2, 1\n"),
                ("graph_indicator", "1\n1\n2\n"),
                ("graph_labels", "0\n1\n"),
            ],
        );
        let c = parse_tu_dataset(tmp.path(), "MINI").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.graphs[0].node_count(), 2);
        assert_eq!(c.graphs[0].edges(), &[(0, 1)]);
        assert_eq!(c.graphs[1].node_count(), 1);
        assert_eq!(c.graphs[1].edge_count(), 0);
        assert_eq!(c.graphs[0].class_label(), Some(0));
        assert_eq!(c.graphs[1].class_label(), Some(1));
        assert!(c.attribute_dim.is_none());
    }

    #[test]
    fn parses_attributes_and_dedups_edges() {
        let tmp = tempfile::tempdir().unwrap();
        write_dataset(
            tmp.path(),
            "MINI",
            &[
                ("A", "1, 2\n2, 1\n"),
                ("graph_indicator", "1\n1\n2\n"),
                ("graph_labels", "0\n1\n"),
                ("node_attributes", "1.0,2.0\n0.0,0.0\n3.0,1.0\n"),
            ],
        );
        let c = parse_tu_dataset(tmp.path(), "MINI").unwrap();
        assert_eq!(c.attribute_dim, Some(2));
        assert_eq!(c.graphs[0].edges(), &[(0, 1)]);
        assert_eq!(c.graphs[0].attributes().unwrap()[0], vec![1.0, 2.0]);
    }

    #[test]
    fn missing_mandatory_file_names_it() {
        let tmp = tempfile::tempdir().unwrap();
        write_dataset(tmp.path(), "MINI", &[("A", ""), ("graph_indicator", "1\n")]);
        match parse_tu_dataset(tmp.path(), "MINI") {
            Err(Error::MissingFile(p)) => {
                assert!(p.to_string_lossy().contains("MINI_graph_labels.txt"))
            }
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn ragged_attribute_rows_report_line() {
        let tmp = tempfile::tempdir().unwrap();
        write_dataset(
            tmp.path(),
            "MINI",
            &[
                ("A", ""),
                ("graph_indicator", "1\n1\n"),
                ("graph_labels", "0\n"),
                ("node_attributes", "1.0,2.0\n3.0\n"),
            ],
        );
        match parse_tu_dataset(tmp.path(), "MINI") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected Format error, got {other:?}"),
        }
    }

    #[test]
    fn tu_round_trip() {
        let g0 = AttributedGraph::new(3, &[(0, 1), (1, 2)])
            .unwrap()
            .with_labels(vec![0, 1, 0])
            .unwrap()
            .with_attributes(vec![vec![1.0, 2.0], vec![0.5, -1.0], vec![0.0, 0.0]])
            .unwrap()
            .with_class_label(1);
        let g1 = AttributedGraph::new(2, &[(0, 1)])
            .unwrap()
            .with_labels(vec![1, 1])
            .unwrap()
            .with_attributes(vec![vec![3.0, 4.0], vec![5.0, 6.0]])
            .unwrap()
            .with_class_label(0);
        let c = GraphCollection::new("RT", vec![g0, g1]).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        write_tu_dataset(&c, tmp.path()).unwrap();
        let back = parse_tu_dataset(tmp.path(), "RT").unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in c.graphs.iter().zip(&back.graphs) {
            assert_eq!(a.node_count(), b.node_count());
            assert_eq!(a.edges(), b.edges());
            assert_eq!(a.labels(), b.labels());
            assert_eq!(a.attributes(), b.attributes());
            assert_eq!(a.class_label(), b.class_label());
        }
    }
}
