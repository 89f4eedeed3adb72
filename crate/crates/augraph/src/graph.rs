//! Exact finite augmentation graphs.
//!
//! A natural-data distribution plus a per-natural augmentation kernel induce
//! a weighted graph over augmented points: `w[x][x']` is the probability
//! that one random natural point is augmented into both `x` and `x'`,
//! so the weights sum to 1. The graph keeps full provenance (which natural
//! point generates which vertex, with what class label), exposes the joint
//! class posterior per vertex, and derives the normalized adjacency
//! `Ā = D^{-1/2} A D^{-1/2}` and Laplacian `L = I − Ā`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decimal;
use crate::error::{Error, Result};

/// Tolerance for "sums to 1" checks on input distributions.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Tolerance for the total pair-weight mass of a constructed graph.
pub const TOTAL_WEIGHT_TOL: f64 = 1e-10;

/// A finite distribution over natural data points with class labels in `1..=r`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalDistribution {
    items: Vec<NaturalItem>,
    num_classes: usize,
}

/// One natural data point: identifier, probability mass, class label.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalItem {
    pub id: String,
    pub prob: f64,
    pub class: usize,
}

impl NaturalDistribution {
    /// Validate and construct. Items are `(id, probability, class)` with
    /// classes in `1..=num_classes`; probabilities must sum to 1.
    pub fn new(items: Vec<(String, f64, usize)>, num_classes: usize) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::NonStochasticInput(
                "empty natural distribution".into(),
            ));
        }
        let mut seen_class = vec![false; num_classes + 1];
        let mut total = 0.0;
        for (id, p, c) in &items {
            if *p < 0.0 || !p.is_finite() {
                return Err(Error::NonStochasticInput(format!(
                    "natural {id:?} has invalid probability {p}"
                )));
            }
            if *c < 1 || *c > num_classes {
                return Err(Error::NonStochasticInput(format!(
                    "natural {id:?} has class {c} outside 1..={num_classes}"
                )));
            }
            seen_class[*c] = true;
            total += p;
        }
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NonStochasticInput(format!(
                "natural probabilities sum to {total}, not 1"
            )));
        }
        if let Some(c) = (1..=num_classes).find(|&c| !seen_class[c]) {
            return Err(Error::NonStochasticInput(format!(
                "declared class {c} has no natural point"
            )));
        }
        let items = items
            .into_iter()
            .map(|(id, prob, class)| NaturalItem { id, prob, class })
            .collect();
        Ok(Self { items, num_classes })
    }

    pub fn items(&self) -> &[NaturalItem] {
        &self.items
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }
}

/// Conditional augmentation distributions `A(x | x̄)`, one stochastic row
/// per natural point.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationKernel {
    rows: Vec<(String, Vec<(String, f64)>)>,
}

impl AugmentationKernel {
    /// Validate and construct. Each row maps a natural id to its
    /// augmentation support `(vertex_id, conditional probability)` and must
    /// sum to 1.
    pub fn new(rows: Vec<(String, Vec<(String, f64)>)>) -> Result<Self> {
        for (nat, entries) in &rows {
            let mut total = 0.0;
            for (v, p) in entries {
                if *p < 0.0 || !p.is_finite() {
                    return Err(Error::NonStochasticInput(format!(
                        "kernel row {nat:?} has invalid probability {p} for vertex {v:?}"
                    )));
                }
                total += p;
            }
            if (total - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NonStochasticInput(format!(
                    "kernel row {nat:?} sums to {total}, not 1"
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[(String, Vec<(String, f64)>)] {
        &self.rows
    }
}

/// The exact finite augmentation graph with provenance.
#[derive(Debug, Clone)]
pub struct AugmentationGraph {
    vertex_ids: Vec<String>,
    /// Symmetric N×N matrix of pair weights, total mass 1.
    pair_weights: DMatrix<f64>,
    /// Row sums of `pair_weights`; the marginal probability of each vertex.
    vertex_weights: DVector<f64>,
    /// N×r joint mass `Pr[y(x̄)=c and x drawn | per-vertex]`, column c-1.
    class_posterior: DMatrix<f64>,
    num_classes: usize,
    naturals: Vec<NaturalItem>,
    /// Kernel rows reindexed to surviving vertices: per natural,
    /// `(vertex index, conditional probability)`.
    kernel_rows: Vec<Vec<(usize, f64)>>,
    /// Optional per-vertex coordinate payloads (N×d) for parametric maps.
    payloads: Option<DMatrix<f64>>,
}

impl AugmentationGraph {
    /// Build the graph: `w[x][x'] = Σ_x̄ P(x̄)·A(x|x̄)·A(x'|x̄)`.
    ///
    /// Vertices with zero total weight are pruned (the normalization
    /// `D^{-1/2}` is undefined there); fewer than 2 survivors is an error.
    pub fn build(dist: &NaturalDistribution, kernel: &AugmentationKernel) -> Result<Self> {
        // Vertex universe in first-appearance order across kernel rows.
        let mut vertex_ids: Vec<String> = Vec::new();
        let mut index_of = std::collections::HashMap::new();
        let mut row_of_natural = std::collections::HashMap::new();
        for (i, (nat, entries)) in kernel.rows().iter().enumerate() {
            if row_of_natural.insert(nat.clone(), i).is_some() {
                return Err(Error::NonStochasticInput(format!(
                    "duplicate kernel row for natural {nat:?}"
                )));
            }
            for (v, _) in entries {
                if !index_of.contains_key(v) {
                    index_of.insert(v.clone(), vertex_ids.len());
                    vertex_ids.push(v.clone());
                }
            }
        }
        for item in dist.items() {
            if !row_of_natural.contains_key(&item.id) {
                return Err(Error::NonStochasticInput(format!(
                    "no kernel row for natural {:?}",
                    item.id
                )));
            }
        }

        let n_all = vertex_ids.len();
        let r = dist.num_classes();
        let mut w = DMatrix::<f64>::zeros(n_all, n_all);
        let mut posterior = DMatrix::<f64>::zeros(n_all, r);

        for item in dist.items() {
            let row = &kernel.rows()[row_of_natural[&item.id]].1;
            let support: Vec<(usize, f64)> = row.iter().map(|(v, p)| (index_of[v], *p)).collect();
            for (a, &(i, pi)) in support.iter().enumerate() {
                posterior[(i, item.class - 1)] += item.prob * pi;
                // Accumulate (i,j) and (j,i) with the identical product so
                // symmetry is exact in floating point.
                let d = item.prob * pi * pi;
                w[(i, i)] += d;
                for &(j, pj) in &support[a + 1..] {
                    let m = item.prob * pi * pj;
                    w[(i, j)] += m;
                    w[(j, i)] += m;
                }
            }
        }

        // Prune zero-weight vertices.
        let row_sums: Vec<f64> = (0..n_all).map(|i| w.row(i).sum()).collect();
        let keep: Vec<usize> = (0..n_all).filter(|&i| row_sums[i] > 0.0).collect();
        if keep.len() < n_all {
            log::warn!(
                "pruning {} zero-weight vertices out of {}",
                n_all - keep.len(),
                n_all
            );
        }
        if keep.len() < 2 {
            return Err(Error::DegenerateGraph);
        }

        let n = keep.len();
        let mut new_index = vec![usize::MAX; n_all];
        for (new_i, &old_i) in keep.iter().enumerate() {
            new_index[old_i] = new_i;
        }
        let pair_weights = DMatrix::from_fn(n, n, |i, j| w[(keep[i], keep[j])]);
        let class_posterior = DMatrix::from_fn(n, r, |i, c| posterior[(keep[i], c)]);
        let vertex_ids: Vec<String> = keep.iter().map(|&i| vertex_ids[i].clone()).collect();
        let vertex_weights = DVector::from_fn(n, |i, _| pair_weights.row(i).sum());

        let kernel_rows = dist
            .items()
            .iter()
            .map(|item| {
                kernel.rows()[row_of_natural[&item.id]]
                    .1
                    .iter()
                    .filter_map(|(v, p)| {
                        let old = index_of[v];
                        (new_index[old] != usize::MAX).then(|| (new_index[old], *p))
                    })
                    .collect()
            })
            .collect();

        let g = Self {
            vertex_ids,
            pair_weights,
            vertex_weights,
            class_posterior,
            num_classes: r,
            naturals: dist.items().to_vec(),
            kernel_rows,
            payloads: None,
        };
        g.check_invariants()?;
        Ok(g)
    }

    fn check_invariants(&self) -> Result<()> {
        let total = self.total_weight();
        if (total - 1.0).abs() > TOTAL_WEIGHT_TOL {
            return Err(Error::InvariantViolation(format!(
                "pair weights sum to {total}, not 1"
            )));
        }
        let n = self.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.pair_weights[(i, j)] != self.pair_weights[(j, i)] {
                    return Err(Error::InvariantViolation(format!(
                        "pair weights asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        for i in 0..n {
            let row_sum = self.pair_weights.row(i).sum();
            if (row_sum - self.vertex_weights[i]).abs() > STOCHASTIC_TOL {
                return Err(Error::InvariantViolation(format!(
                    "vertex weight {i} disagrees with its row sum"
                )));
            }
            if self.vertex_weights[i] <= 0.0 {
                return Err(Error::ZeroDegree(i));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_ids.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.pair_weights.iter().sum()
    }

    pub fn pair_weights(&self) -> &DMatrix<f64> {
        &self.pair_weights
    }

    pub fn vertex_weights(&self) -> &DVector<f64> {
        &self.vertex_weights
    }

    /// Joint mass `Pr[y(x̄)=c and x]` per vertex; columns indexed by `c-1`.
    pub fn class_posterior(&self) -> &DMatrix<f64> {
        &self.class_posterior
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn naturals(&self) -> &[NaturalItem] {
        &self.naturals
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    /// Kernel row over surviving vertices for the `i`-th natural point.
    pub fn kernel_row(&self, natural_index: usize) -> &[(usize, f64)] {
        &self.kernel_rows[natural_index]
    }

    pub fn natural_index(&self, id: &str) -> Result<usize> {
        self.naturals
            .iter()
            .position(|it| it.id == id)
            .ok_or_else(|| Error::UnknownNatural(id.to_string()))
    }

    pub fn payloads(&self) -> Option<&DMatrix<f64>> {
        self.payloads.as_ref()
    }

    /// Attach per-vertex coordinate payloads (N×d).
    pub fn set_payloads(&mut self, payloads: DMatrix<f64>) -> Result<()> {
        if payloads.nrows() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "payloads have {} rows, graph has {} vertices",
                payloads.nrows(),
                self.len()
            )));
        }
        self.payloads = Some(payloads);
        Ok(())
    }

    /// Draw a natural index from `P` by inverse CDF.
    pub fn sample_natural<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, item) in self.naturals.iter().enumerate() {
            acc += item.prob;
            if u < acc {
                return i;
            }
        }
        self.naturals.len() - 1
    }

    /// Draw a vertex from `A(·|x̄)` for the given natural, by inverse CDF.
    pub fn sample_augmentation<R: Rng>(&self, natural_index: usize, rng: &mut R) -> usize {
        let row = &self.kernel_rows[natural_index];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(v, p) in row {
            acc += p;
            if u < acc {
                return v;
            }
        }
        row.last().expect("kernel row must be nonempty").0
    }

    /// Normalized adjacency and Laplacian for this graph.
    pub fn normalized_matrices(&self) -> NormalizedMatrices {
        NormalizedMatrices::from_graph(self)
    }

    /// Reorder vertices; `perm[new_index] = old_index`.
    fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.len();
        assert_eq!(perm.len(), n);
        let mut inverse = vec![0usize; n];
        for (new_i, &old_i) in perm.iter().enumerate() {
            inverse[old_i] = new_i;
        }
        Self {
            vertex_ids: perm.iter().map(|&o| self.vertex_ids[o].clone()).collect(),
            pair_weights: DMatrix::from_fn(n, n, |i, j| self.pair_weights[(perm[i], perm[j])]),
            vertex_weights: DVector::from_fn(n, |i, _| self.vertex_weights[perm[i]]),
            class_posterior: DMatrix::from_fn(n, self.num_classes, |i, c| {
                self.class_posterior[(perm[i], c)]
            }),
            num_classes: self.num_classes,
            naturals: self.naturals.clone(),
            kernel_rows: self
                .kernel_rows
                .iter()
                .map(|row| row.iter().map(|&(v, p)| (inverse[v], p)).collect())
                .collect(),
            payloads: self
                .payloads
                .as_ref()
                .map(|p| DMatrix::from_fn(n, p.ncols(), |i, d| p[(perm[i], d)])),
        }
    }
}

/// `Ā = D^{-1/2} A D^{-1/2}` and `L = I − Ā`.
#[derive(Debug, Clone)]
pub struct NormalizedMatrices {
    adjacency: DMatrix<f64>,
    laplacian: DMatrix<f64>,
}

impl NormalizedMatrices {
    pub fn from_graph(g: &AugmentationGraph) -> Self {
        let n = g.len();
        let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / g.vertex_weights()[i].sqrt()).collect();
        let mut adjacency = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = g.pair_weights()[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
                adjacency[(i, j)] = v;
                adjacency[(j, i)] = v;
            }
        }
        let mut laplacian = -adjacency.clone();
        for i in 0..n {
            laplacian[(i, i)] += 1.0;
        }
        Self {
            adjacency,
            laplacian,
        }
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn len(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.nrows() == 0
    }
}

// ---------------------------------------------------------------------------
// Graph file format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    version: u32,
    naturals: Vec<NaturalRecord>,
    vertices: Vec<VertexRecord>,
    kernel_rows: Vec<KernelRowRecord>,
    pair_weights: PairWeightsRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex_weights: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NaturalRecord {
    id: String,
    prob: String,
    class: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct VertexRecord {
    id: String,
    natural_sources: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct KernelRowRecord {
    natural: String,
    entries: Vec<(String, String)>,
}

/// Dense rows or upper-triangle triplets, whichever is smaller on disk.
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PairWeightsRecord {
    Dense(Vec<Vec<String>>),
    Triplets(Vec<(usize, usize, String)>),
}

/// Serialize a graph to its structured text format (decimal-string weights,
/// bit-exact round trips).
pub fn serialize_graph(g: &AugmentationGraph) -> Result<Vec<u8>> {
    let n = g.len();
    let naturals = g
        .naturals()
        .iter()
        .map(|it| NaturalRecord {
            id: it.id.clone(),
            prob: decimal::encode(it.prob),
            class: it.class,
        })
        .collect();

    let mut sources: Vec<Vec<String>> = vec![Vec::new(); n];
    for (ni, item) in g.naturals().iter().enumerate() {
        for &(v, _) in g.kernel_row(ni) {
            sources[v].push(item.id.clone());
        }
    }
    let vertices = (0..n)
        .map(|i| VertexRecord {
            id: g.vertex_ids()[i].clone(),
            natural_sources: sources[i].clone(),
            payload: g
                .payloads()
                .map(|p| (0..p.ncols()).map(|d| decimal::encode(p[(i, d)])).collect()),
        })
        .collect();

    let kernel_rows = g
        .naturals()
        .iter()
        .enumerate()
        .map(|(ni, item)| KernelRowRecord {
            natural: item.id.clone(),
            entries: g
                .kernel_row(ni)
                .iter()
                .map(|&(v, p)| (g.vertex_ids()[v].clone(), decimal::encode(p)))
                .collect(),
        })
        .collect();

    let nnz_upper = {
        let mut c = 0usize;
        for i in 0..n {
            for j in i..n {
                if g.pair_weights()[(i, j)] != 0.0 {
                    c += 1;
                }
            }
        }
        c
    };
    let pair_weights = if 3 * nnz_upper <= n * n {
        let mut triplets = Vec::with_capacity(nnz_upper);
        for i in 0..n {
            for j in i..n {
                let w = g.pair_weights()[(i, j)];
                if w != 0.0 {
                    triplets.push((i, j, decimal::encode(w)));
                }
            }
        }
        PairWeightsRecord::Triplets(triplets)
    } else {
        PairWeightsRecord::Dense(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| decimal::encode(g.pair_weights()[(i, j)]))
                        .collect()
                })
                .collect(),
        )
    };

    let file = GraphFile {
        version: 1,
        naturals,
        vertices,
        kernel_rows,
        pair_weights,
        vertex_weights: Some(
            (0..n)
                .map(|i| decimal::encode(g.vertex_weights()[i]))
                .collect(),
        ),
    };
    Ok(serde_json::to_vec_pretty(&file)?)
}

/// Load a graph from its file format.
///
/// The graph is rebuilt from its provenance (naturals + kernel rows) and the
/// stored weights are cross-checked against the rebuild, so a file whose
/// weights disagree with its own kernel is rejected. Stored weights then
/// replace the recomputed ones so round trips are bit-exact.
pub fn deserialize_graph(bytes: &[u8]) -> Result<AugmentationGraph> {
    let file: GraphFile = serde_json::from_slice(bytes)
        .map_err(|e| Error::MalformedPayload(format!("graph file: {e}")))?;
    if file.version != 1 {
        return Err(Error::MalformedPayload(format!(
            "unsupported graph file version {}",
            file.version
        )));
    }
    let n = file.vertices.len();
    if n < 2 {
        return Err(Error::InvariantViolation("fewer than 2 vertices".into()));
    }
    let mut index_of = std::collections::HashMap::new();
    for (i, v) in file.vertices.iter().enumerate() {
        if index_of.insert(v.id.clone(), i).is_some() {
            return Err(Error::MalformedPayload(format!(
                "duplicate vertex id {:?}",
                v.id
            )));
        }
    }

    let num_classes = file
        .naturals
        .iter()
        .map(|r| r.class)
        .max()
        .unwrap_or(0)
        .max(1);
    let mut items = Vec::with_capacity(file.naturals.len());
    for rec in &file.naturals {
        items.push((rec.id.clone(), decimal::decode(&rec.prob)?, rec.class));
    }
    let dist = NaturalDistribution::new(items, num_classes)
        .map_err(|e| Error::InvariantViolation(e.to_string()))?;

    let mut rows = Vec::with_capacity(file.kernel_rows.len());
    for rec in &file.kernel_rows {
        let mut entries = Vec::with_capacity(rec.entries.len());
        for (vid, ps) in &rec.entries {
            if !index_of.contains_key(vid) {
                return Err(Error::MalformedPayload(format!("unknown vertex {vid:?}")));
            }
            entries.push((vid.clone(), decimal::decode(ps)?));
        }
        rows.push((rec.natural.clone(), entries));
    }
    let kernel =
        AugmentationKernel::new(rows).map_err(|e| Error::InvariantViolation(e.to_string()))?;

    let rebuilt = AugmentationGraph::build(&dist, &kernel).map_err(|e| match e {
        Error::NonStochasticInput(m) => Error::InvariantViolation(m),
        other => other,
    })?;
    if rebuilt.len() != n {
        return Err(Error::InvariantViolation(format!(
            "file lists {n} vertices but {} survive the kernel rebuild",
            rebuilt.len()
        )));
    }
    // Reorder the rebuild to the file's vertex order.
    let mut perm = Vec::with_capacity(n);
    for id in rebuilt.vertex_ids() {
        perm.push(*index_of.get(id).ok_or_else(|| {
            Error::InvariantViolation(format!("vertex {id:?} missing from file list"))
        })?);
    }
    let mut order = vec![0usize; n];
    for (built_i, &file_i) in perm.iter().enumerate() {
        order[file_i] = built_i;
    }
    let mut g = rebuilt.permuted(&order);

    // Cross-check stored weights against the rebuild, then adopt them
    // verbatim for bit-exact round trips.
    let mut stored = DMatrix::<f64>::zeros(n, n);
    match &file.pair_weights {
        PairWeightsRecord::Dense(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::MalformedPayload("dense pair_weights shape".into()));
            }
            for (i, row) in rows.iter().enumerate() {
                for (j, s) in row.iter().enumerate() {
                    stored[(i, j)] = decimal::decode(s)?;
                }
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if stored[(i, j)] != stored[(j, i)] {
                        return Err(Error::InvariantViolation(format!(
                            "pair weights asymmetric at ({i},{j})"
                        )));
                    }
                }
            }
        }
        PairWeightsRecord::Triplets(ts) => {
            for (i, j, s) in ts {
                if *i >= n || *j >= n || i > j {
                    return Err(Error::MalformedPayload(format!(
                        "triplet ({i},{j}) out of range or below diagonal"
                    )));
                }
                let w = decimal::decode(s)?;
                stored[(*i, *j)] = w;
                stored[(*j, *i)] = w;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if (stored[(i, j)] - g.pair_weights[(i, j)]).abs() > 1e-9 {
                return Err(Error::InvariantViolation(format!(
                    "stored pair weight ({i},{j}) disagrees with the kernel rebuild: \
                     {} vs {}",
                    stored[(i, j)],
                    g.pair_weights[(i, j)]
                )));
            }
        }
    }
    g.pair_weights = stored;

    g.vertex_weights = match &file.vertex_weights {
        Some(ws) => {
            if ws.len() != n {
                return Err(Error::MalformedPayload("vertex_weights length".into()));
            }
            let ws = decimal::decode_vec(ws)?;
            for (i, &w) in ws.iter().enumerate() {
                if (w - g.pair_weights.row(i).sum()).abs() > STOCHASTIC_TOL {
                    return Err(Error::InvariantViolation(format!(
                        "vertex weight {i} disagrees with its row sum"
                    )));
                }
            }
            DVector::from_vec(ws)
        }
        // Derived field: recompute from the pair weights when absent.
        None => DVector::from_fn(n, |i, _| g.pair_weights.row(i).sum()),
    };

    if file.vertices.iter().any(|v| v.payload.is_some()) {
        let dim = file.vertices[0]
            .payload
            .as_ref()
            .ok_or_else(|| Error::MalformedPayload("payload missing on vertex 0".into()))?
            .len();
        let mut p = DMatrix::<f64>::zeros(n, dim);
        for (i, v) in file.vertices.iter().enumerate() {
            let pl = v
                .payload
                .as_ref()
                .ok_or_else(|| Error::MalformedPayload(format!("payload missing on vertex {i}")))?;
            if pl.len() != dim {
                return Err(Error::MalformedPayload("payload dims inconsistent".into()));
            }
            for (d, s) in pl.iter().enumerate() {
                p[(i, d)] = decimal::decode(s)?;
            }
        }
        g.payloads = Some(p);
    }

    g.check_invariants()?;
    Ok(g)
}

/// Content digest of a serialized graph (hex SHA-256).
pub fn graph_digest(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
pub(crate) mod test_graphs {
    use super::*;

    /// The two-block reference graph: naturals {a,b}, uniform P, uniform
    /// kernels on {x1,x2} and {x3,x4}.
    pub fn g0() -> AugmentationGraph {
        let dist =
            NaturalDistribution::new(vec![("a".into(), 0.5, 1), ("b".into(), 0.5, 2)], 2).unwrap();
        let kernel = AugmentationKernel::new(vec![
            ("a".into(), vec![("x1".into(), 0.5), ("x2".into(), 0.5)]),
            ("b".into(), vec![("x3".into(), 0.5), ("x4".into(), 0.5)]),
        ])
        .unwrap();
        AugmentationGraph::build(&dist, &kernel).unwrap()
    }

    /// One natural point with two equally likely augmentations.
    pub fn single_natural_pair() -> AugmentationGraph {
        let dist = NaturalDistribution::new(vec![("a".into(), 1.0, 1)], 1).unwrap();
        let kernel = AugmentationKernel::new(vec![(
            "a".into(),
            vec![("x1".into(), 0.5), ("x2".into(), 0.5)],
        )])
        .unwrap();
        AugmentationGraph::build(&dist, &kernel).unwrap()
    }

    /// Identity-like graph: each of `n` naturals deterministically maps to
    /// its own vertex, so Ā = I.
    pub fn identity_graph(n: usize) -> AugmentationGraph {
        let dist = NaturalDistribution::new(
            (0..n)
                .map(|i| (format!("n{i}"), 1.0 / n as f64, 1))
                .collect(),
            1,
        )
        .unwrap();
        let kernel = AugmentationKernel::new(
            (0..n)
                .map(|i| (format!("n{i}"), vec![(format!("x{i}"), 1.0)]))
                .collect(),
        )
        .unwrap();
        AugmentationGraph::build(&dist, &kernel).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_graphs::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn g0_weights_match_hand_derivation() {
        let g = g0();
        assert_eq!(g.len(), 4);
        let ix = |id: &str| g.vertex_ids().iter().position(|v| v == id).unwrap();
        let (x1, x2, x3) = (ix("x1"), ix("x2"), ix("x3"));
        assert_abs_diff_eq!(g.pair_weights()[(x1, x2)], 1.0 / 8.0, epsilon = 0.0);
        assert_abs_diff_eq!(g.pair_weights()[(x1, x3)], 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(g.vertex_weights()[x1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(g.total_weight(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn g0_class_posterior_is_pure() {
        let g = g0();
        let ix = |id: &str| g.vertex_ids().iter().position(|v| v == id).unwrap();
        assert_abs_diff_eq!(g.class_posterior()[(ix("x1"), 0)], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(g.class_posterior()[(ix("x1"), 1)], 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(g.class_posterior()[(ix("x4"), 1)], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn single_deterministic_augmentation_is_degenerate() {
        let dist = NaturalDistribution::new(vec![("a".into(), 1.0, 1)], 1).unwrap();
        let kernel = AugmentationKernel::new(vec![("a".into(), vec![("x".into(), 1.0)])]).unwrap();
        match AugmentationGraph::build(&dist, &kernel) {
            Err(Error::DegenerateGraph) => {}
            other => panic!("expected DegenerateGraph, got {other:?}"),
        }
    }

    #[test]
    fn non_stochastic_inputs_rejected() {
        assert!(matches!(
            NaturalDistribution::new(vec![("a".into(), 0.7, 1)], 1),
            Err(Error::NonStochasticInput(_))
        ));
        assert!(matches!(
            AugmentationKernel::new(vec![("a".into(), vec![("x".into(), 0.9)])]),
            Err(Error::NonStochasticInput(_))
        ));
        // Declared class with no representative.
        assert!(matches!(
            NaturalDistribution::new(vec![("a".into(), 1.0, 1)], 2),
            Err(Error::NonStochasticInput(_))
        ));
    }

    /// Brute-force oracle: re-sum w over all (natural, x, x') triples and
    /// compare entrywise with the constructed matrix.
    #[test]
    fn random_instance_matches_triple_sum_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(20240917);
        let n_nat = 5;
        let n_vert = 12;
        let mut probs: Vec<f64> = (0..n_nat).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        // Fix the residual so the sum is exactly 1 within tolerance.
        let s: f64 = probs.iter().sum();
        probs[0] += 1.0 - s;

        let dist = NaturalDistribution::new(
            probs
                .iter()
                .enumerate()
                .map(|(i, &p)| (format!("n{i}"), p, 1 + (i % 2)))
                .collect(),
            2,
        )
        .unwrap();
        let mut rows = Vec::new();
        for i in 0..n_nat {
            let support: Vec<usize> = (0..n_vert).filter(|_| rng.gen_bool(0.5)).collect();
            let support = if support.is_empty() { vec![i] } else { support };
            let mut ps: Vec<f64> = support.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
            let t: f64 = ps.iter().sum();
            ps.iter_mut().for_each(|p| *p /= t);
            let s: f64 = ps.iter().sum();
            ps[0] += 1.0 - s;
            rows.push((
                format!("n{i}"),
                support
                    .iter()
                    .zip(&ps)
                    .map(|(&v, &p)| (format!("x{v}"), p))
                    .collect(),
            ));
        }
        let kernel = AugmentationKernel::new(rows.clone()).unwrap();
        let g = AugmentationGraph::build(&dist, &kernel).unwrap();

        assert_abs_diff_eq!(g.total_weight(), 1.0, epsilon = 1e-12);
        // Oracle: direct per-entry triple sum over the surviving ids.
        for i in 0..g.len() {
            for j in 0..g.len() {
                let (vi, vj) = (&g.vertex_ids()[i], &g.vertex_ids()[j]);
                let mut expected = 0.0;
                for (ni, (_, row)) in rows.iter().enumerate() {
                    let pi = row.iter().find(|(v, _)| v == vi).map_or(0.0, |(_, p)| *p);
                    let pj = row.iter().find(|(v, _)| v == vj).map_or(0.0, |(_, p)| *p);
                    expected += probs[ni] * pi * pj;
                }
                assert_abs_diff_eq!(g.pair_weights()[(i, j)], expected, epsilon = 1e-14);
                assert_eq!(g.pair_weights()[(i, j)], g.pair_weights()[(j, i)]);
            }
        }
    }

    #[test]
    fn g0_normalized_adjacency_is_half_blocks() {
        let g = g0();
        let m = g.normalized_matrices();
        let ix = |id: &str| g.vertex_ids().iter().position(|v| v == id).unwrap();
        let (x1, x2, x3) = (ix("x1"), ix("x2"), ix("x3"));
        assert_abs_diff_eq!(m.adjacency()[(x1, x1)], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m.adjacency()[(x1, x2)], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m.adjacency()[(x1, x3)], 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(m.laplacian()[(x1, x1)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn single_natural_pair_adjacency() {
        let g = single_natural_pair();
        let m = g.normalized_matrices();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(m.adjacency()[(i, j)], 0.5, epsilon = 1e-12);
            }
        }
    }

    /// Ā D^{1/2}·1 = D^{1/2}·1 (the eigenvalue-1 relation), stated per row.
    #[test]
    fn sqrt_weights_are_eigenvector_one() {
        for g in [g0(), single_natural_pair(), identity_graph(5)] {
            let m = g.normalized_matrices();
            let d_half = DVector::from_fn(g.len(), |i, _| g.vertex_weights()[i].sqrt());
            let image = m.adjacency() * &d_half;
            for i in 0..g.len() {
                assert_abs_diff_eq!(image[i], d_half[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn serialization_round_trips_bit_exactly() {
        let g = g0();
        let bytes = serialize_graph(&g).unwrap();
        let g2 = deserialize_graph(&bytes).unwrap();
        assert_eq!(g.vertex_ids(), g2.vertex_ids());
        assert_eq!(g.pair_weights(), g2.pair_weights());
        assert_eq!(g.vertex_weights(), g2.vertex_weights());
        assert_eq!(g.class_posterior(), g2.class_posterior());
        assert_eq!(g.naturals(), g2.naturals());
        for ni in 0..g.naturals().len() {
            assert_eq!(g.kernel_row(ni), g2.kernel_row(ni));
        }
        // Digest is stable across serializations.
        assert_eq!(
            graph_digest(&bytes),
            graph_digest(&serialize_graph(&g2).unwrap())
        );
    }

    #[test]
    fn asymmetric_payload_rejected() {
        let g = g0();
        let bytes = serialize_graph(&g).unwrap();
        let mut file: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        // Flip one off-diagonal entry of the dense form; for the triplet
        // form, inject a below-diagonal triplet instead.
        match file.get_mut("pair_weights").unwrap() {
            serde_json::Value::Object(map) => {
                if let Some(serde_json::Value::Array(ts)) = map.get_mut("triplets") {
                    ts.push(serde_json::json!([1, 0, crate::decimal::encode(0.999)]));
                } else if let Some(serde_json::Value::Array(rows)) = map.get_mut("dense") {
                    rows[0][1] = serde_json::json!(crate::decimal::encode(0.999));
                }
            }
            _ => panic!("unexpected pair_weights shape"),
        }
        let bytes = serde_json::to_vec(&file).unwrap();
        let err = deserialize_graph(&bytes).unwrap_err();
        assert!(
            matches!(
                err,
                Error::InvariantViolation(_) | Error::MalformedPayload(_)
            ),
            "unexpected error {err:?}"
        );
    }

    #[test]
    fn missing_vertex_weights_recomputed() {
        let g = g0();
        let bytes = serialize_graph(&g).unwrap();
        let mut file: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        file.as_object_mut().unwrap().remove("vertex_weights");
        let bytes = serde_json::to_vec(&file).unwrap();
        let g2 = deserialize_graph(&bytes).unwrap();
        for i in 0..g.len() {
            assert_abs_diff_eq!(
                g2.vertex_weights()[i],
                g.vertex_weights()[i],
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn payload_round_trip() {
        let mut g = g0();
        let p = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        g.set_payloads(p.clone()).unwrap();
        let bytes = serialize_graph(&g).unwrap();
        let g2 = deserialize_graph(&bytes).unwrap();
        assert_eq!(g2.payloads().unwrap(), &p);
    }
}
