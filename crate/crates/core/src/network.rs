//! Communication graphs, Metropolis mixing matrices and gossip rounds.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::manifold::Mat;

/// Rejection-sampling budget for connected Erdős–Rényi graphs.
pub const ER_MAX_RETRIES: usize = 1000;

/// Tolerance on `W = Wᵀ`, `W·1 = 1`.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Undirected simple graph on `0..n`, edges stored as `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at node {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) out of range for n = {n}"
                )));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Self { n, edges: set })
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one node".into()));
        }
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let adj = self.neighbors();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Edge-list text: first line `n`, then one `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing node count".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad node count {header:?}"),
        })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let mut it = l.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => edges.push((i, j)),
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected `i j`, got {l:?}"),
                    })
                }
            }
        }
        Self::from_edges(n, edges)
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

pub fn gen_ring(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("ring needs n >= 3, got {n}")));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Connected `G(n, p)` by rejection sampling.
pub fn gen_erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("Erdős–Rényi needs n >= 2, got {n}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!("edge probability {p} not in (0, 1]")));
    }
    for _ in 0..ER_MAX_RETRIES {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::from_edges(n, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::NotConnected {
        n,
        p,
        retries: ER_MAX_RETRIES,
    })
}

/// Second-largest singular value of `w`; zero for a `1×1` matrix.
pub fn second_singular(w: &DMatrix<f64>) -> Result<f64> {
    if !w.is_square() {
        return Err(Error::InvalidArgument("mixing matrix must be square".into()));
    }
    if w.nrows() < 2 {
        return Ok(0.0);
    }
    let mut sv: Vec<f64> = w.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let sigma2 = sv[1];
    if !(sigma2 < 1.0 - STOCHASTIC_TOL) {
        return Err(Error::SpectralGapViolation { sigma2 });
    }
    Ok(sigma2)
}

/// Symmetric doubly stochastic gossip matrix aligned with a connected graph.
#[derive(Clone, Debug)]
pub struct MixingMatrix {
    w: DMatrix<f64>,
    sigma2: f64,
    /// Per row: `(j, W_ij)` over `j` with nonzero weight, diagonal included.
    rows: Vec<Vec<(usize, f64)>>,
}

impl MixingMatrix {
    /// Validates the weight assumptions against `graph`.
    pub fn new(w: DMatrix<f64>, graph: &Graph) -> Result<Self> {
        let n = graph.n();
        if w.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", w.nrows(), w.ncols()),
            });
        }
        for i in 0..n {
            let row_sum: f64 = w.row(i).sum();
            if (row_sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidMixing(format!("row {i} sums to {row_sum}")));
            }
            for j in 0..n {
                let wij = w[(i, j)];
                if !(wij >= 0.0) {
                    return Err(Error::InvalidMixing(format!("W[{i},{j}] = {wij} < 0")));
                }
                if (wij - w[(j, i)]).abs() > STOCHASTIC_TOL {
                    return Err(Error::InvalidMixing(format!("W not symmetric at ({i},{j})")));
                }
                if i != j && (wij > 0.0) != graph.has_edge(i, j) {
                    return Err(Error::InvalidMixing(format!(
                        "W[{i},{j}] = {wij} disagrees with the edge set"
                    )));
                }
            }
        }
        let sigma2 = second_singular(&w)?;
        let rows = (0..n)
            .map(|i| (0..n).filter(|&j| w[(i, j)] != 0.0).map(|j| (j, w[(i, j)])).collect())
            .collect();
        Ok(Self { w, sigma2, rows })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    /// Largest deviation from the symmetric / row-stochastic conditions.
    pub fn stochasticity_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max((self.w.row(i).sum() - 1.0).abs());
            for j in 0..n {
                worst = worst.max((self.w[(i, j)] - self.w[(j, i)]).abs());
            }
        }
        worst
    }
}

/// `W_ij = 1/(1 + max(deg_i, deg_j))` on edges, remainder on the diagonal.
pub fn metropolis_weights(graph: &Graph) -> Result<MixingMatrix> {
    if !graph.is_connected() {
        return Err(Error::InvalidArgument(
            "Metropolis weights need a connected graph".into(),
        ));
    }
    let n = graph.n();
    let deg = graph.degrees();
    let mut w = DMatrix::zeros(n, n);
    for (i, j) in graph.edges() {
        let wij = 1.0 / (1.0 + deg[i].max(deg[j]) as f64);
        w[(i, j)] = wij;
        w[(j, i)] = wij;
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
    MixingMatrix::new(w, graph)
}

/// `t` gossip rounds: block `i` of the result is `Σ_j (Wᵗ)_ij X_j`, applied
/// as `t` sequential neighbour-weighted sums.
pub fn mix(w: &MixingMatrix, t: usize, blocks: &[Mat]) -> Result<Vec<Mat>> {
    if blocks.len() != w.n() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} blocks", w.n()),
            found: format!("{} blocks", blocks.len()),
        });
    }
    let mut cur = blocks.to_vec();
    if t == 0 {
        return Ok(cur);
    }
    let (d, r) = blocks[0].shape();
    let mut next = vec![Mat::zeros(d, r); blocks.len()];
    for _ in 0..t {
        for (out, row) in next.iter_mut().zip(&w.rows) {
            out.fill(0.0);
            for &(j, wij) in row {
                *out += &cur[j] * wij;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Euclidean block mean.
pub fn block_mean(blocks: &[Mat]) -> Mat {
    let (d, r) = blocks[0].shape();
    let mut acc = Mat::zeros(d, r);
    for b in blocks {
        acc += b;
    }
    acc / blocks.len() as f64
}

/// Frobenius norm of the stacked matrix.
pub fn stacked_norm(blocks: &[Mat]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

/// `‖X − 1⊗X̂‖` for stacked blocks.
pub fn deviation_from_mean(blocks: &[Mat]) -> f64 {
    let mean = block_mean(blocks);
    blocks.iter().map(|b| (b - &mean).norm_squared()).sum::<f64>().sqrt()
}
