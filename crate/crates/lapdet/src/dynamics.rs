//! Discretization of the Laplacian flow `ẋ = -Lx` with sampled output,
//! trajectory simulation, and piecewise-constant parameter-varying
//! schedules whose state transition is the ordered product of segment
//! exponentials.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::detect::{
    analyze_transitions, assemble_report, cumulative_powers, certify_detectability,
    DetectError, DetectabilityReport, OutputSpec, RANK_TOL,
};
use crate::graph::{Edge, GraphError, WeightedGraph};
use crate::matfun::{expm, MatfunError};
use crate::matrix::DenseMatrix;

#[derive(Debug, Error)]
pub enum DynError {
    #[error("time step must be strictly positive, got {dt}")]
    NonPositiveDt { dt: f64 },
    #[error("input matrix has {rows} rows but the state dimension is {n}")]
    InputRowsMismatch { rows: usize, n: usize },
    #[error("initial state has length {got}, expected {expected}")]
    StateLengthMismatch { expected: usize, got: usize },
    #[error("need {needed} input vectors, got {got}")]
    NotEnoughInputs { needed: usize, got: usize },
    #[error("input vector {index} has length {got}, expected {expected}")]
    InputLengthMismatch { index: usize, expected: usize, got: usize },
    #[error("schedule must contain at least one segment")]
    EmptySchedule,
    #[error("segment {index}: dwell time must be strictly positive, got {dt}")]
    NonPositiveSegmentDt { index: usize, dt: f64 },
    #[error("segment {index} has {got} nodes, expected {expected}")]
    InconsistentNodeCount { index: usize, expected: usize, got: usize },
    #[error(transparent)]
    Output(#[from] DetectError),
    #[error(transparent)]
    Expm(#[from] MatfunError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schedule JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Sampled linear system `x_{k+1} = A_d x_k + B_d u_k`, `y_k = C x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    /// `e^{-L·dt}`.
    pub a_d: DenseMatrix,
    /// Input map, applied per step as given (zero-width when absent). No
    /// zero-order-hold integration is performed; callers wanting
    /// `∫ e^{-Ls} B ds` supply the integrated matrix themselves.
    pub b_d: DenseMatrix,
    pub c: DenseMatrix,
    pub dt: f64,
}

impl DiscreteSystem {
    pub fn state_dim(&self) -> usize {
        self.a_d.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b_d.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.rows()
    }
}

/// Simulated state/output history. `times`, `states`, and `outputs` have
/// equal lengths: one entry per step, including step 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl Trajectory {
    /// CSV rendering with header `t,x_1..x_n,y_1..y_m`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, Vec::len);
        let m = self.outputs.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x_{i}"));
        }
        for i in 1..=m {
            out.push_str(&format!(",y_{i}"));
        }
        out.push('\n');
        for k in 0..self.times.len() {
            out.push_str(&format!("{}", self.times[k]));
            for v in &self.states[k] {
                out.push_str(&format!(",{v}"));
            }
            for v in &self.outputs[k] {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Discretizes the Laplacian flow of `g` over step `dt`:
/// `A_d = e^{-L·dt}`, `B_d` as supplied, `C` realized from the output spec.
pub fn discretize(
    g: &WeightedGraph,
    dt: f64,
    b: Option<DenseMatrix>,
    out: &OutputSpec,
) -> Result<DiscreteSystem, DynError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(DynError::NonPositiveDt { dt });
    }
    let n = g.node_count();
    let c = out.output_matrix(n)?;
    let b_d = match b {
        Some(b) => {
            if b.rows() != n {
                return Err(DynError::InputRowsMismatch { rows: b.rows(), n });
            }
            b
        }
        None => DenseMatrix::zeros(n, 0),
    };
    let a_d = expm(&g.laplacian().scale(-dt))?.value;
    Ok(DiscreteSystem { a_d, b_d, c, dt })
}

/// Iterates the recursion for `steps` steps, recording the output at every
/// step including step 0. Empty `inputs` means zero input.
pub fn simulate(
    sys: &DiscreteSystem,
    x0: &[f64],
    inputs: &[Vec<f64>],
    steps: usize,
) -> Result<Trajectory, DynError> {
    let n = sys.state_dim();
    let r = sys.input_dim();
    if x0.len() != n {
        return Err(DynError::StateLengthMismatch { expected: n, got: x0.len() });
    }
    if !inputs.is_empty() {
        if inputs.len() < steps {
            return Err(DynError::NotEnoughInputs { needed: steps, got: inputs.len() });
        }
        for (index, u) in inputs.iter().take(steps).enumerate() {
            if u.len() != r {
                return Err(DynError::InputLengthMismatch { index, expected: r, got: u.len() });
            }
        }
    }

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut outputs = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    times.push(0.0);
    outputs.push(sys.c.matvec(&x));
    states.push(x.clone());
    for k in 0..steps {
        let mut next = sys.a_d.matvec(&x);
        if !inputs.is_empty() && r > 0 {
            let bu = sys.b_d.matvec(&inputs[k]);
            for (xi, bi) in next.iter_mut().zip(&bu) {
                *xi += bi;
            }
        }
        x = next;
        times.push((k + 1) as f64 * sys.dt);
        outputs.push(sys.c.matvec(&x));
        states.push(x.clone());
    }
    Ok(Trajectory { times, states, outputs })
}

/// One dwell interval of a piecewise-constant schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct LpvSegment {
    pub graph: WeightedGraph,
    pub dt: f64,
}

/// Ordered piecewise-constant schedule `(L_i, δt_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpvSchedule {
    segments: Vec<LpvSegment>,
}

impl LpvSchedule {
    pub fn new(segments: Vec<LpvSegment>) -> Result<Self, DynError> {
        if segments.is_empty() {
            return Err(DynError::EmptySchedule);
        }
        let n = segments[0].graph.node_count();
        for (index, seg) in segments.iter().enumerate() {
            if !(seg.dt.is_finite() && seg.dt > 0.0) {
                return Err(DynError::NonPositiveSegmentDt { index, dt: seg.dt });
            }
            if seg.graph.node_count() != n {
                return Err(DynError::InconsistentNodeCount {
                    index,
                    expected: n,
                    got: seg.graph.node_count(),
                });
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[LpvSegment] {
        &self.segments
    }

    pub fn node_count(&self) -> usize {
        self.segments[0].graph.node_count()
    }

    pub fn total_span(&self) -> f64 {
        self.segments.iter().map(|s| s.dt).sum()
    }

    /// `e^{-L_i·δt_i}` for every segment, in schedule order.
    pub fn segment_transitions(&self) -> Result<Vec<DenseMatrix>, DynError> {
        self.segments
            .iter()
            .map(|s| Ok(expm(&s.graph.laplacian().scale(-s.dt))?.value))
            .collect()
    }
}

/// State transition across the whole schedule, as the matrix `M` with
/// `x(t_f) = M·x(t_0)`: the earliest segment is applied first, so
/// `M = e^{-L_f·δ_f} ··· e^{-L_0·δ_0}`. Positive and right stochastic when
/// every segment graph is strongly connected.
pub fn lpv_transition(schedule: &LpvSchedule) -> Result<DenseMatrix, DynError> {
    let mut m = DenseMatrix::identity(schedule.node_count());
    for phi in schedule.segment_transitions()? {
        m = &phi * &m;
    }
    Ok(m)
}

/// Detectability of a schedule: the certificate path requires every segment
/// graph to be strongly connected plus a nonzero output row sum; the
/// numeric path treats the schedule as one period, samples the stacked
/// observability map at every segment boundary across `n` periods, and
/// checks that the one-period product contracts the resulting kernel. A
/// single-segment schedule reduces to the time-invariant analysis.
pub fn lpv_detectability(
    schedule: &LpvSchedule,
    out: &OutputSpec,
) -> Result<DetectabilityReport, DynError> {
    let n = schedule.node_count();
    let c = out.output_matrix(n)?;

    let mut certificate_applicable = true;
    let mut certificate_detectable = true;
    for seg in schedule.segments() {
        let (applicable, detectable) = certify_detectability(&seg.graph, out, seg.dt)?;
        certificate_applicable &= applicable;
        certificate_detectable &= detectable;
    }

    let transitions = schedule.segment_transitions()?;
    let f = transitions.len();

    let (analysis, gramian_on_ones, window_p, window_q, context) = if f == 1 {
        let a = &transitions[0];
        let phis = cumulative_powers(a, n);
        let (analysis, gram) = analyze_transitions(&phis, a, &c, RANK_TOL);
        (analysis, gram, n, n, "single-segment schedule: time-invariant analysis".to_string())
    } else {
        let mut monodromy = DenseMatrix::identity(n);
        let mut phis = Vec::with_capacity(n * f + 1);
        phis.push(DenseMatrix::identity(n));
        for _ in 0..n {
            for phi in &transitions {
                let next = phi * phis.last().unwrap();
                phis.push(next);
            }
        }
        for phi in &transitions {
            monodromy = phi * &monodromy;
        }
        let (analysis, gram) = analyze_transitions(&phis, &monodromy, &c, RANK_TOL);
        (
            analysis,
            gram,
            f,
            n * f,
            format!("periodic analysis of a {f}-segment schedule"),
        )
    };

    Ok(assemble_report(
        certificate_applicable,
        certificate_detectable,
        analysis,
        gramian_on_ones,
        window_p,
        window_q,
        &context,
    ))
}

/// One entry of the schedule file: a graph (path to a graph file, or inline
/// edge list with 1-based node indices) and a dwell time.
#[derive(Debug, Deserialize)]
struct ScheduleEntry {
    graph: GraphSource,
    dt: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GraphSource {
    Path(String),
    Inline { n: usize, directed: bool, edges: Vec<(usize, usize, f64)> },
}

/// Parses the JSON schedule format: an array of `{graph, dt}` objects where
/// `graph` is either a graph-file path (resolved against `base_dir`) or an
/// inline `{n, directed, edges}` object with 1-based `[i, j, w]` edges.
pub fn parse_schedule_json(text: &str, base_dir: Option<&Path>) -> Result<LpvSchedule, DynError> {
    let entries: Vec<ScheduleEntry> = serde_json::from_str(text)?;
    let mut segments = Vec::with_capacity(entries.len());
    for (index, entry) in entries.into_iter().enumerate() {
        let graph = match entry.graph {
            GraphSource::Path(p) => {
                let resolved = match base_dir {
                    Some(base) => base.join(&p),
                    None => Path::new(&p).to_path_buf(),
                };
                let text = std::fs::read_to_string(&resolved).map_err(|source| DynError::Io {
                    path: resolved.display().to_string(),
                    source,
                })?;
                crate::graph::parse_graph(&text)?
            }
            GraphSource::Inline { n, directed, edges } => {
                inline_graph(n, directed, &edges, index)?
            }
        };
        segments.push(LpvSegment { graph, dt: entry.dt });
    }
    LpvSchedule::new(segments)
}

fn inline_graph(
    n: usize,
    directed: bool,
    edges: &[(usize, usize, f64)],
    segment: usize,
) -> Result<WeightedGraph, DynError> {
    let mut converted = Vec::with_capacity(edges.len());
    for &(i, j, w) in edges {
        if i < 1 || i > n {
            return Err(DynError::Graph(GraphError::IndexOutOfRange {
                line: segment + 1,
                index: i,
                n,
            }));
        }
        if j < 1 || j > n {
            return Err(DynError::Graph(GraphError::IndexOutOfRange {
                line: segment + 1,
                index: j,
                n,
            }));
        }
        converted.push(Edge::new(i - 1, j - 1, w));
    }
    let g = if directed {
        WeightedGraph::new(n, true, converted)?
    } else {
        WeightedGraph::undirected_from_pairs(n, converted)?
    };
    Ok(g)
}

/// Reads and parses a schedule file, resolving graph paths relative to the
/// file's directory.
pub fn load_schedule(path: &Path) -> Result<LpvSchedule, DynError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| DynError::Io { path: path.display().to_string(), source })?;
    parse_schedule_json(&text, path.parent())
}
