//! Weighted directed communication graphs and their spectral summaries.
//!
//! A graph holds a dense nonnegative adjacency matrix with zero diagonal;
//! entry `a_ij > 0` means agent `i` listens to agent `j`. The Laplacian is
//! `L = D - A` with `D = diag` of the out-degrees. The quantities exposed by
//! [`spectral_summary`] control the distance-to-consensus bound: the radius
//! of the attracting tube around the consensus line is
//! `‖A‖·√N / (2·λ*)`, with `λ*` the smallest nonzero eigenvalue of
//! `Sym(L) = (L + Lᵀ)/2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("adjacency must hold {expected} entries for n={n}, got {got}")]
    BadShape { n: usize, expected: usize, got: usize },
    #[error("weight at ({i}, {j}) must be a finite nonnegative number, got {w}")]
    BadWeight { i: usize, j: usize, w: f64 },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("bipartite parts must satisfy p >= 1 and q >= 1, got p={p}, q={q}")]
    BadBipartite { p: usize, q: usize },
    #[error("connectivity radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("edge probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("edge list line {line}: {msg}")]
    EdgeList { line: usize, msg: String },
}

/// Weighted directed graph on `n >= 2` agents.
///
/// Immutable after construction; out-degrees are cached because the vector
/// field evaluates them on every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    weights: Vec<f64>,
    out_deg: Vec<f64>,
}

impl Graph {
    /// Builds a graph from a row-major `n x n` weight matrix, validating
    /// nonnegativity and the zero diagonal.
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        if weights.len() != n * n {
            return Err(GraphError::BadShape { n, expected: n * n, got: weights.len() });
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[i * n + j];
                if !w.is_finite() || w < 0.0 {
                    return Err(GraphError::BadWeight { i, j, w });
                }
                if i == j && w != 0.0 {
                    return Err(GraphError::SelfLoop(i));
                }
            }
        }
        let out_deg = (0..n)
            .map(|i| weights[i * n..(i + 1) * n].iter().sum())
            .collect();
        Ok(Graph { n, weights, out_deg })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Influence weight `a_ij` of agent `j` on agent `i`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Row-major adjacency matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Out-degrees `d_i = Σ_j a_ij` (row sums).
    pub fn out_degrees(&self) -> &[f64] {
        &self.out_deg
    }

    /// In-degrees `dⁱ = Σ_k a_ki` (column sums).
    pub fn in_degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                deg[j] += self.weights[i * self.n + j];
            }
        }
        deg
    }

    pub fn max_out_degree(&self) -> f64 {
        self.out_deg.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Laplacian `L = D - A`, row-major.
    pub fn laplacian(&self) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                l[i * n + j] = if i == j {
                    self.out_deg[i] - self.weights[i * n + j]
                } else {
                    -self.weights[i * n + j]
                };
            }
        }
        l
    }
}

/// Graph family selector for [`make_graph`]; sizes and kind-specific
/// parameters travel with the variant.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Complete { n: usize },
    CompleteBipartite { p: usize, q: usize },
    Path { n: usize },
    RandomGeometric { n: usize, radius: f64 },
    RandomDirected { n: usize, prob: f64 },
}

/// Builds one of the supported graph families with unit weights.
///
/// Deterministic given the seed: geometric placement draws `n` points
/// uniformly in the unit square and links pairs at Euclidean distance at
/// most `radius`; the directed model links each ordered pair independently
/// with the given probability. The seed is ignored by the deterministic
/// families. Random graphs are *not* resampled when they come out
/// disconnected; callers inspect [`connectivity_class`].
pub fn make_graph(spec: &GraphSpec, seed: u64) -> Result<Graph, GraphError> {
    match *spec {
        GraphSpec::Complete { n } => {
            if n < 2 {
                return Err(GraphError::TooFewNodes(n));
            }
            let mut w = vec![1.0; n * n];
            for i in 0..n {
                w[i * n + i] = 0.0;
            }
            Graph::from_weights(n, w)
        }
        GraphSpec::CompleteBipartite { p, q } => {
            if p < 1 || q < 1 {
                return Err(GraphError::BadBipartite { p, q });
            }
            let n = p + q;
            if n < 2 {
                return Err(GraphError::TooFewNodes(n));
            }
            let mut w = vec![0.0; n * n];
            for i in 0..p {
                for j in p..n {
                    w[i * n + j] = 1.0;
                    w[j * n + i] = 1.0;
                }
            }
            Graph::from_weights(n, w)
        }
        GraphSpec::Path { n } => {
            if n < 2 {
                return Err(GraphError::TooFewNodes(n));
            }
            let mut w = vec![0.0; n * n];
            for i in 0..n - 1 {
                w[i * n + i + 1] = 1.0;
                w[(i + 1) * n + i] = 1.0;
            }
            Graph::from_weights(n, w)
        }
        GraphSpec::RandomGeometric { n, radius } => {
            if n < 2 {
                return Err(GraphError::TooFewNodes(n));
            }
            if !(radius > 0.0) || !radius.is_finite() {
                return Err(GraphError::BadRadius(radius));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let dx = points[i].0 - points[j].0;
                    let dy = points[i].1 - points[j].1;
                    if (dx * dx + dy * dy).sqrt() <= radius {
                        w[i * n + j] = 1.0;
                        w[j * n + i] = 1.0;
                    }
                }
            }
            Graph::from_weights(n, w)
        }
        GraphSpec::RandomDirected { n, prob } => {
            if n < 2 {
                return Err(GraphError::TooFewNodes(n));
            }
            if !(0.0..=1.0).contains(&prob) || !prob.is_finite() {
                return Err(GraphError::BadProbability(prob));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen::<f64>() < prob {
                        w[i * n + j] = 1.0;
                    }
                }
            }
            Graph::from_weights(n, w)
        }
    }
}

/// Parses an edge-list: one `i j w` triple per line with 1-based node ids,
/// `#` starting a comment line. `n` is the largest id seen; unlisted entries
/// stay zero. Duplicate edges are rejected when their weights conflict.
pub fn load_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_id = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(GraphError::EdgeList {
                line: line_no,
                msg: format!("expected `i j w`, got {} fields", fields.len()),
            });
        }
        let parse_id = |s: &str| -> Result<usize, GraphError> {
            let id: usize = s.parse().map_err(|_| GraphError::EdgeList {
                line: line_no,
                msg: format!("invalid node id `{s}`"),
            })?;
            if id == 0 {
                return Err(GraphError::EdgeList {
                    line: line_no,
                    msg: "node ids are 1-based".into(),
                });
            }
            Ok(id)
        };
        let i = parse_id(fields[0])?;
        let j = parse_id(fields[1])?;
        let w: f64 = fields[2].parse().map_err(|_| GraphError::EdgeList {
            line: line_no,
            msg: format!("invalid weight `{}`", fields[2]),
        })?;
        if i == j {
            return Err(GraphError::EdgeList {
                line: line_no,
                msg: format!("self-loop at node {i}"),
            });
        }
        if !w.is_finite() || w <= 0.0 {
            return Err(GraphError::EdgeList {
                line: line_no,
                msg: format!("weight must be positive, got {w}"),
            });
        }
        if let Some(&(_, _, prev)) = edges.iter().find(|&&(a, b, _)| a == i && b == j) {
            if prev != w {
                return Err(GraphError::EdgeList {
                    line: line_no,
                    msg: format!("edge {i}->{j} already has weight {prev}, got {w}"),
                });
            }
            continue;
        }
        edges.push((i, j, w));
        max_id = max_id.max(i).max(j);
    }
    if max_id < 2 {
        return Err(GraphError::TooFewNodes(max_id));
    }
    let n = max_id;
    let mut weights = vec![0.0; n * n];
    for (i, j, w) in edges {
        weights[(i - 1) * n + (j - 1)] = w;
    }
    Graph::from_weights(n, weights)
}

/// Spectral quantities backing the distance-to-consensus bound.
///
/// `lambda_star` is the smallest eigenvalue of `Sym(L)` exceeding the
/// eigensolver tolerance; it is absent for graphs with no connectivity,
/// and then `m_radius = a_norm·√n / (2·lambda_star)` is absent too.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub out_degrees: Vec<f64>,
    pub in_degrees: Vec<f64>,
    pub lambda_star: Option<f64>,
    pub a_norm: f64,
    pub m_radius: Option<f64>,
}

/// Eigenvalues of `Sym(L) = (L + Lᵀ)/2`, sorted ascending, computed by the
/// cyclic Jacobi solver iterated to off-diagonal norm below `tol`.
pub fn sym_laplacian_eigenvalues(g: &Graph, tol: f64) -> Vec<f64> {
    assert!(tol > 0.0 && tol <= 1e-3, "tolerance must lie in (0, 1e-3]");
    let n = g.n();
    let l = g.laplacian();
    let mut sym = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            sym[i * n + j] = 0.5 * (l[i * n + j] + l[j * n + i]);
        }
    }
    linalg::jacobi_eigenvalues(&sym, n, tol)
}

/// Degrees, `λ*`, spectral norm of the adjacency, and the tube radius
/// `‖A‖·√n / (2·λ*)`.
pub fn spectral_summary(g: &Graph, tol: f64) -> SpectralSummary {
    assert!(tol > 0.0 && tol <= 1e-3, "tolerance must lie in (0, 1e-3]");
    let eig = sym_laplacian_eigenvalues(g, tol);
    // Eigenvalues within tol of zero count as zero when picking λ*.
    let lambda_star = eig.iter().copied().find(|&v| v > tol);
    let a_norm = linalg::spectral_norm(g.weights(), g.n(), tol);
    let m_radius = lambda_star.map(|ls| a_norm * (g.n() as f64).sqrt() / (2.0 * ls));
    SpectralSummary {
        out_degrees: g.out_degrees().to_vec(),
        in_degrees: g.in_degrees(),
        lambda_star,
        a_norm,
        m_radius,
    }
}

/// True when out-degree equals in-degree at every node, within `tol`.
pub fn is_weight_balanced(g: &Graph, tol: f64) -> bool {
    assert!(tol > 0.0, "tolerance must be positive");
    g.out_degrees()
        .iter()
        .zip(g.in_degrees())
        .all(|(&o, i)| (o - i).abs() <= tol)
}

/// Connectivity tiers, strongest first. `Connected` means some node is
/// reachable from every other node along directed edges; `WeaklyConnected`
/// ignores edge direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConnectivityClass {
    Disconnected,
    WeaklyConnected,
    Connected,
    StronglyConnected,
}

impl std::fmt::Display for ConnectivityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConnectivityClass::Disconnected => "disconnected",
            ConnectivityClass::WeaklyConnected => "weakly_connected",
            ConnectivityClass::Connected => "connected",
            ConnectivityClass::StronglyConnected => "strongly_connected",
        };
        f.write_str(s)
    }
}

fn reachable(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Strongest applicable connectivity class, using reachability over edges
/// with positive weight.
pub fn connectivity_class(g: &Graph) -> ConnectivityClass {
    let n = g.n();
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut undirected: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if g.weight(i, j) > 0.0 {
                fwd[i].push(j);
                rev[j].push(i);
                undirected[i].push(j);
                undirected[j].push(i);
            }
        }
    }
    let all = |seen: &[bool]| seen.iter().all(|&b| b);
    if all(&reachable(&fwd, 0)) && all(&reachable(&rev, 0)) {
        return ConnectivityClass::StronglyConnected;
    }
    // Reverse reachability from j gives the set of nodes that can reach j.
    if (0..n).any(|j| all(&reachable(&rev, j))) {
        return ConnectivityClass::Connected;
    }
    if all(&reachable(&undirected, 0)) {
        return ConnectivityClass::WeaklyConnected;
    }
    ConnectivityClass::Disconnected
}
