//! Weighted simple (di)graphs, their adjacency/Laplacian matrices, strong
//! connectivity, and a brute-force irreducibility oracle.
//!
//! Node indices are 0-based in the API; the text file format and all
//! reports use 1-based indices.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::DenseMatrix;

const BRUTE_FORCE_MAX_NODES: usize = 8;
const RANDOM_GENERATION_ATTEMPTS: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("missing header line")]
    MissingHeader,
    #[error("line {line}: malformed header (expected `n m directed|undirected`): {content:?}")]
    BadHeader { line: usize, content: String },
    #[error("line {line}: malformed edge line (expected `i j w`): {content:?}")]
    MalformedEdge { line: usize, content: String },
    #[error("line {line}: edge weight must be strictly positive, got {weight}")]
    NonPositiveWeight { line: usize, weight: f64 },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },
    #[error("line {line}: duplicate edge ({from}, {to})")]
    DuplicateEdge { line: usize, from: usize, to: usize },
    #[error("line {line}: node index {index} out of range 1..={n}")]
    IndexOutOfRange { line: usize, index: usize, n: usize },
    #[error("header declares {expected} edges but file contains {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error("edge ({from}, {to}): weight must be strictly positive and finite, got {weight}")]
    InvalidEdgeWeight { from: usize, to: usize, weight: f64 },
    #[error("edge ({from}, {to}) is a self-loop")]
    SelfLoopEdge { from: usize, to: usize },
    #[error("edge ({from}, {to}) appears more than once")]
    DuplicateEdgePair { from: usize, to: usize },
    #[error("edge ({from}, {to}) references a node outside the graph (n = {n})")]
    EdgeOutOfRange { from: usize, to: usize, n: usize },
    #[error("undirected graph: edge ({from}, {to}) lacks a mirror edge of equal weight")]
    AsymmetricUndirected { from: usize, to: usize },
    #[error("weight range [{lo}, {hi}] is invalid: need 0 < lo <= hi, both finite")]
    InvalidWeightRange { lo: f64, hi: f64 },
    #[error("grid dimensions {rows}x{cols} do not match node count {n}")]
    GridDimensionMismatch { rows: usize, cols: usize, n: usize },
    #[error("diffusivity must be strictly positive and finite, got {value}")]
    InvalidDiffusivity { value: f64 },
    #[error("random generation did not produce a strongly connected graph in {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("brute-force irreducibility requires a square matrix, got {rows}x{cols}")]
    BruteForceNotSquare { rows: usize, cols: usize },
    #[error("brute-force irreducibility supports n <= {max}, got {n}")]
    BruteForceTooLarge { n: usize, max: usize },
}

/// Directed weighted edge, 0-based endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(from: usize, to: usize, weight: f64) -> Self {
        Self { from, to, weight }
    }
}

/// Weighted simple graph. For undirected graphs the edge set is stored
/// closed under reversal, with equal weights on both orientations.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    directed: bool,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Validates and builds a graph. For undirected graphs, `edges` must
    /// already contain both orientations of every edge.
    pub fn new(n: usize, directed: bool, mut edges: Vec<Edge>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut seen = HashSet::new();
        for e in &edges {
            if e.from >= n || e.to >= n {
                return Err(GraphError::EdgeOutOfRange { from: e.from + 1, to: e.to + 1, n });
            }
            if e.from == e.to {
                return Err(GraphError::SelfLoopEdge { from: e.from + 1, to: e.to + 1 });
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(GraphError::InvalidEdgeWeight {
                    from: e.from + 1,
                    to: e.to + 1,
                    weight: e.weight,
                });
            }
            if !seen.insert((e.from, e.to)) {
                return Err(GraphError::DuplicateEdgePair { from: e.from + 1, to: e.to + 1 });
            }
        }
        if !directed {
            let weights: std::collections::HashMap<(usize, usize), u64> =
                edges.iter().map(|e| ((e.from, e.to), e.weight.to_bits())).collect();
            for e in &edges {
                if weights.get(&(e.to, e.from)) != Some(&e.weight.to_bits()) {
                    return Err(GraphError::AsymmetricUndirected { from: e.from + 1, to: e.to + 1 });
                }
            }
        }
        edges.sort_by_key(|e| (e.from, e.to));
        Ok(Self { n, directed, edges })
    }

    /// Builds an undirected graph from one representative per edge,
    /// adding the mirrored orientation automatically.
    pub fn undirected_from_pairs(n: usize, pairs: Vec<Edge>) -> Result<Self, GraphError> {
        let mut edges = Vec::with_capacity(pairs.len() * 2);
        for e in pairs {
            edges.push(e);
            edges.push(Edge::new(e.to, e.from, e.weight));
        }
        Self::new(n, false, edges)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// All stored directed edges (both orientations for undirected graphs).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge count as reported externally: directed edges, or unordered
    /// pairs for undirected graphs.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.edges.len()
        } else {
            self.edges.len() / 2
        }
    }

    /// Weighted adjacency matrix: entry (i, j) is the weight of edge (i, j).
    pub fn adjacency_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            m[(e.from, e.to)] = e.weight;
        }
        m
    }

    /// Graph Laplacian L = D - A with D the diagonal of row sums of A.
    /// Every row of L sums to zero up to rounding.
    pub fn laplacian(&self) -> DenseMatrix {
        let adj = self.adjacency_matrix();
        let degrees = adj.row_sums();
        let mut l = adj.scale(-1.0);
        for i in 0..self.n {
            l[(i, i)] = degrees[i];
        }
        l
    }

    /// True iff every node reaches every other node along directed edges
    /// (ordinary connectedness for undirected graphs). Single Tarjan pass.
    pub fn is_strongly_connected(&self) -> bool {
        let adj: Vec<Vec<usize>> = self.adjacency_list();
        tarjan_scc_count(&adj) == 1
    }

    fn adjacency_list(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.from].push(e.to);
        }
        adj
    }

    /// Graph with every edge reversed. Undirected graphs are unchanged.
    pub fn reversed(&self) -> Self {
        let edges = self.edges.iter().map(|e| Edge::new(e.to, e.from, e.weight)).collect();
        Self::new(self.n, self.directed, edges).expect("reversal preserves validity")
    }
}

struct TarjanState {
    index: usize,
    stack: Vec<usize>,
    on_stack: Vec<bool>,
    idx: Vec<Option<usize>>,
    low: Vec<usize>,
    components: usize,
}

fn tarjan_scc_count(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    let mut state = TarjanState {
        index: 0,
        stack: Vec::new(),
        on_stack: vec![false; n],
        idx: vec![None; n],
        low: vec![0; n],
        components: 0,
    };
    for v in 0..n {
        if state.idx[v].is_none() {
            strongconnect(v, adj, &mut state);
        }
    }
    state.components
}

fn strongconnect(v: usize, adj: &[Vec<usize>], state: &mut TarjanState) {
    state.idx[v] = Some(state.index);
    state.low[v] = state.index;
    state.index += 1;
    state.stack.push(v);
    state.on_stack[v] = true;

    for &w in &adj[v] {
        if state.idx[w].is_none() {
            strongconnect(w, adj, state);
            state.low[v] = state.low[v].min(state.low[w]);
        } else if state.on_stack[w] {
            state.low[v] = state.low[v].min(state.idx[w].unwrap());
        }
    }

    if state.low[v] == state.idx[v].unwrap() {
        state.components += 1;
        loop {
            let w = state.stack.pop().expect("stack underflow");
            state.on_stack[w] = false;
            if w == v {
                break;
            }
        }
    }
}

/// Decides irreducibility by enumerating every permutation similarity and
/// every block split, looking for an all-zero lower-left block. Works on the
/// sparsity pattern only (an entry counts as present iff it is nonzero).
/// Factorial cost, so n is capped at 8.
pub fn is_irreducible_bruteforce(m: &DenseMatrix) -> Result<bool, GraphError> {
    if !m.is_square() {
        return Err(GraphError::BruteForceNotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(GraphError::BruteForceTooLarge { n, max: BRUTE_FORCE_MAX_NODES });
    }
    if n <= 1 {
        return Ok(true);
    }

    let reducible_under = |perm: &[usize]| -> bool {
        // P m P^T has entry (a, b) = m[perm[a]][perm[b]]; the split at k is a
        // witness when the lower-left block (rows k.., cols ..k) is all zero.
        for k in 1..n {
            let mut all_zero = true;
            'block: for a in k..n {
                for b in 0..k {
                    if m[(perm[a], perm[b])] != 0.0 {
                        all_zero = false;
                        break 'block;
                    }
                }
            }
            if all_zero {
                return true;
            }
        }
        false
    };

    Ok(!any_permutation(n, reducible_under))
}

/// Heap's algorithm; stops early when `check` returns true.
fn any_permutation(n: usize, mut check: impl FnMut(&[usize]) -> bool) -> bool {
    let mut perm: Vec<usize> = (0..n).collect();
    if check(&perm) {
        return true;
    }
    let mut counters = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            if check(&perm) {
                return true;
            }
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    false
}

/// Parses the graph text format: header `n m directed|undirected`, then m
/// lines `i j w` with 1-based node indices. Lines starting with `#` and
/// blank lines are skipped. Undirected inputs list each edge once and are
/// symmetrized.
pub fn parse_graph(text: &str) -> Result<WeightedGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(GraphError::MissingHeader)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || GraphError::BadHeader { line: header_line, content: header.to_string() };
    if parts.len() != 3 {
        return Err(bad_header());
    }
    let n: usize = parts[0].parse().map_err(|_| bad_header())?;
    let m: usize = parts[1].parse().map_err(|_| bad_header())?;
    let directed = match parts[2] {
        "directed" => true,
        "undirected" => false,
        _ => return Err(bad_header()),
    };
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }

    let mut edges = Vec::with_capacity(m);
    let mut seen = HashSet::new();
    let mut found = 0usize;
    for (line, content) in lines {
        found += 1;
        let fields: Vec<&str> = content.split_whitespace().collect();
        let malformed = || GraphError::MalformedEdge { line, content: content.to_string() };
        if fields.len() != 3 {
            return Err(malformed());
        }
        let i: usize = fields[0].parse().map_err(|_| malformed())?;
        let j: usize = fields[1].parse().map_err(|_| malformed())?;
        let w: f64 = fields[2].parse().map_err(|_| malformed())?;
        if i < 1 || i > n {
            return Err(GraphError::IndexOutOfRange { line, index: i, n });
        }
        if j < 1 || j > n {
            return Err(GraphError::IndexOutOfRange { line, index: j, n });
        }
        if i == j {
            return Err(GraphError::SelfLoop { line, node: i });
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(GraphError::NonPositiveWeight { line, weight: w });
        }
        let key = if directed { (i, j) } else { (i.min(j), i.max(j)) };
        if !seen.insert(key) {
            return Err(GraphError::DuplicateEdge { line, from: i, to: j });
        }
        edges.push(Edge::new(i - 1, j - 1, w));
    }
    if found != m {
        return Err(GraphError::EdgeCountMismatch { expected: m, found });
    }

    if directed {
        WeightedGraph::new(n, true, edges)
    } else {
        WeightedGraph::undirected_from_pairs(n, edges)
    }
}

/// Renders a graph in the text file format accepted by [`parse_graph`].
/// Undirected edges are written once, smaller index first.
pub fn format_graph(g: &WeightedGraph) -> String {
    let mut out = String::new();
    let written: Vec<&Edge> = if g.directed() {
        g.edges().iter().collect()
    } else {
        g.edges().iter().filter(|e| e.from < e.to).collect()
    };
    out.push_str(&format!(
        "{} {} {}\n",
        g.node_count(),
        written.len(),
        if g.directed() { "directed" } else { "undirected" }
    ));
    for e in written {
        out.push_str(&format!("{} {} {}\n", e.from + 1, e.to + 1, e.weight));
    }
    out
}

/// Graph families used by the generator and the CLI.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphKind {
    Path,
    Cycle,
    Complete,
    Grid { rows: usize, cols: usize },
    /// Path graph with uniform weight equal to the diffusivity, so its
    /// Laplacian equals the 1-D second-difference matrix scaled by that
    /// constant (zero-flux boundaries).
    Diffusion1d { diffusivity: f64 },
    Random,
}

/// Deterministically generates a graph of the requested family. Weights are
/// drawn uniformly from `weight_range` (constant when the range collapses).
/// `Random` draws directed Bernoulli edges until strongly connected.
pub fn generate_graph(
    kind: &GraphKind,
    n: usize,
    seed: u64,
    weight_range: (f64, f64),
) -> Result<WeightedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let (lo, hi) = weight_range;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
        return Err(GraphError::InvalidWeightRange { lo, hi });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| if lo == hi { lo } else { rng.gen_range(lo..=hi) };

    match kind {
        GraphKind::Path => {
            let pairs = (0..n.saturating_sub(1))
                .map(|i| Edge::new(i, i + 1, draw(&mut rng)))
                .collect();
            WeightedGraph::undirected_from_pairs(n, pairs)
        }
        GraphKind::Cycle => {
            let mut pairs: Vec<Edge> =
                (0..n.saturating_sub(1)).map(|i| Edge::new(i, i + 1, draw(&mut rng))).collect();
            // The closing edge only exists for n >= 3; below that a cycle
            // degenerates to the path.
            if n >= 3 {
                pairs.push(Edge::new(n - 1, 0, draw(&mut rng)));
            }
            WeightedGraph::undirected_from_pairs(n, pairs)
        }
        GraphKind::Complete => {
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    pairs.push(Edge::new(i, j, draw(&mut rng)));
                }
            }
            WeightedGraph::undirected_from_pairs(n, pairs)
        }
        GraphKind::Grid { rows, cols } => {
            if rows * cols != n || *rows == 0 || *cols == 0 {
                return Err(GraphError::GridDimensionMismatch { rows: *rows, cols: *cols, n });
            }
            let at = |r: usize, c: usize| r * cols + c;
            let mut pairs = Vec::new();
            for r in 0..*rows {
                for c in 0..*cols {
                    if c + 1 < *cols {
                        pairs.push(Edge::new(at(r, c), at(r, c + 1), draw(&mut rng)));
                    }
                    if r + 1 < *rows {
                        pairs.push(Edge::new(at(r, c), at(r + 1, c), draw(&mut rng)));
                    }
                }
            }
            WeightedGraph::undirected_from_pairs(n, pairs)
        }
        GraphKind::Diffusion1d { diffusivity } => {
            if !(diffusivity.is_finite() && *diffusivity > 0.0) {
                return Err(GraphError::InvalidDiffusivity { value: *diffusivity });
            }
            let pairs = (0..n.saturating_sub(1))
                .map(|i| Edge::new(i, i + 1, *diffusivity))
                .collect();
            WeightedGraph::undirected_from_pairs(n, pairs)
        }
        GraphKind::Random => {
            if n == 1 {
                return WeightedGraph::new(1, true, Vec::new());
            }
            let p = (2.0 * ((n + 1) as f64).ln() / n as f64).min(0.9);
            for _ in 0..RANDOM_GENERATION_ATTEMPTS {
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        if i != j && rng.gen_bool(p) {
                            edges.push(Edge::new(i, j, draw(&mut rng)));
                        }
                    }
                }
                let g = WeightedGraph::new(n, true, edges)?;
                if g.is_strongly_connected() {
                    return Ok(g);
                }
            }
            Err(GraphError::GenerationFailed { attempts: RANDOM_GENERATION_ATTEMPTS })
        }
    }
}
