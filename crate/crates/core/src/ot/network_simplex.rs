//! Exact transportation solver: primal network simplex on the complete
//! bipartite graph between sources and sinks.
//!
//! The basis is a spanning tree with `n + m - 1` arcs. Each pivot recomputes
//! node potentials from the tree, enters the first arc (row-major order) with
//! negative reduced cost and removes the lowest-indexed blocking arc on the
//! induced cycle. With this Bland-style choice every run is reproducible and
//! degenerate pivots cannot cycle.

use ndarray::{Array1, Array2, ArrayView2};

use super::cost::CostMatrix;
use super::measure::normalize_marginal;
use crate::error::{Error, Result};

/// Coupling between two marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    coupling: Array2<f64>,
    source_marginal: Array1<f64>,
    target_marginal: Array1<f64>,
}

impl TransportPlan {
    pub(crate) fn new(coupling: Array2<f64>, source: Array1<f64>, target: Array1<f64>) -> Self {
        Self {
            coupling,
            source_marginal: source,
            target_marginal: target,
        }
    }

    pub fn coupling(&self) -> ArrayView2<'_, f64> {
        self.coupling.view()
    }

    pub fn source_marginal(&self) -> &Array1<f64> {
        &self.source_marginal
    }

    pub fn target_marginal(&self) -> &Array1<f64> {
        &self.target_marginal
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coupling[[i, j]]
    }

    /// `sum_ij pi_ij C_ij`.
    pub fn cost_under(&self, cost: ArrayView2<'_, f64>) -> f64 {
        self.coupling
            .iter()
            .zip(cost.iter())
            .map(|(p, c)| p * c)
            .sum()
    }

    pub fn into_coupling(self) -> Array2<f64> {
        self.coupling
    }
}

/// Result of a transport solve.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub plan: TransportPlan,
    pub cost: f64,
    /// `false` for entropic approximations.
    pub exact: bool,
    /// Pivots (exact) or scaling sweeps (approximate) performed.
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolverOptions {
    /// Pivot budget; `None` picks `50 * n * m + 1000`.
    pub max_pivots: Option<usize>,
}

/// Solves `min <pi, C>` over couplings of `a` and `b` exactly.
pub fn solve_transport(a: &[f64], b: &[f64], cost: &CostMatrix) -> Result<TransportSolution> {
    solve_transport_with(a, b, cost, &SolverOptions::default())
}

pub fn solve_transport_with(
    a: &[f64],
    b: &[f64],
    cost: &CostMatrix,
    options: &SolverOptions,
) -> Result<TransportSolution> {
    let a = normalize_marginal(a, "source marginal")?;
    let b = normalize_marginal(b, "target marginal")?;
    if cost.nrows() != a.len() || cost.ncols() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "cost is {}x{} but marginals have lengths {} and {}",
            cost.nrows(),
            cost.ncols(),
            a.len(),
            b.len()
        )));
    }

    // Zero-mass atoms only add degenerate rows/columns; solve without them.
    let rows: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0).collect();
    let cols: Vec<usize> = (0..b.len()).filter(|&j| b[j] > 0.0).collect();
    let ra: Vec<f64> = rows.iter().map(|&i| a[i]).collect();
    let rb: Vec<f64> = cols.iter().map(|&j| b[j]).collect();
    let c = cost.entries();
    let reduced_cost = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| c[[rows[i], cols[j]]]);

    let budget = options
        .max_pivots
        .unwrap_or(50 * rows.len() * cols.len() + 1000);
    let (flows, pivots) = Simplex::new(&ra, &rb, reduced_cost.view()).run(budget)?;

    let mut coupling = Array2::zeros((a.len(), b.len()));
    for (i, j, f) in flows {
        coupling[[rows[i], cols[j]]] = f.max(0.0);
    }
    let plan = TransportPlan::new(coupling, Array1::from(a), Array1::from(b));
    let total = plan.cost_under(c);
    Ok(TransportSolution {
        plan,
        cost: total,
        exact: true,
        iterations: pivots,
    })
}

#[derive(Debug, Clone, Copy)]
struct BasicArc {
    source: usize,
    sink: usize,
    flow: f64,
}

impl BasicArc {
    fn id(&self, m: usize) -> usize {
        self.source * m + self.sink
    }
}

struct Simplex<'a> {
    n: usize,
    m: usize,
    cost: ArrayView2<'a, f64>,
    basis: Vec<BasicArc>,
    // Scratch buffers, rebuilt from `basis` every pivot.
    adjacency: Vec<Vec<usize>>,
    parent_arc: Vec<usize>,
    parent_node: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
    queue: Vec<usize>,
}

const NO_PARENT: usize = usize::MAX;

impl<'a> Simplex<'a> {
    fn new(a: &[f64], b: &[f64], cost: ArrayView2<'a, f64>) -> Self {
        let (n, m) = (a.len(), b.len());
        let nodes = n + m;
        Self {
            n,
            m,
            cost,
            basis: northwest_corner(a, b),
            adjacency: vec![Vec::new(); nodes],
            parent_arc: vec![NO_PARENT; nodes],
            parent_node: vec![NO_PARENT; nodes],
            depth: vec![0; nodes],
            potential: vec![0.0; nodes],
            queue: Vec::with_capacity(nodes),
        }
    }

    /// Basic flows `(row, col, amount)` and the pivot count.
    fn run(mut self, budget: usize) -> Result<(Vec<Flow>, usize)> {
        let scale = self.cost.iter().fold(0.0f64, |acc, &c| acc.max(c));
        let tolerance = 1e-12 * scale;
        let mut pivots = 0;
        loop {
            self.rebuild_tree();
            let Some((i, j)) = self.entering_arc(tolerance) else {
                break;
            };
            if pivots == budget {
                return Err(Error::SolverFailure { pivots });
            }
            self.pivot(i, j);
            pivots += 1;
        }
        let flows = self
            .basis
            .iter()
            .map(|arc| (arc.source, arc.sink, arc.flow))
            .collect();
        Ok((flows, pivots))
    }

    /// Recomputes parents, depths and potentials with node 0 as root.
    fn rebuild_tree(&mut self) {
        let n = self.n;
        for adj in &mut self.adjacency {
            adj.clear();
        }
        for (k, arc) in self.basis.iter().enumerate() {
            self.adjacency[arc.source].push(k);
            self.adjacency[n + arc.sink].push(k);
        }
        self.parent_arc.fill(NO_PARENT);
        self.parent_node.fill(NO_PARENT);
        self.queue.clear();
        self.queue.push(0);
        self.depth[0] = 0;
        self.potential[0] = 0.0;
        let mut head = 0;
        while head < self.queue.len() {
            let node = self.queue[head];
            head += 1;
            for &k in &self.adjacency[node] {
                if k == self.parent_arc[node] {
                    continue;
                }
                let arc = self.basis[k];
                let c = self.cost[[arc.source, arc.sink]];
                let (next, pot) = if node < n {
                    (n + arc.sink, c - self.potential[node])
                } else {
                    (arc.source, c - self.potential[node])
                };
                self.parent_arc[next] = k;
                self.parent_node[next] = node;
                self.depth[next] = self.depth[node] + 1;
                self.potential[next] = pot;
                self.queue.push(next);
            }
        }
        debug_assert_eq!(self.queue.len(), self.n + self.m, "basis is not spanning");
    }

    fn entering_arc(&self, tolerance: f64) -> Option<(usize, usize)> {
        let n = self.n;
        for i in 0..n {
            let u = self.potential[i];
            let row = self.cost.row(i);
            for (j, &c) in row.iter().enumerate() {
                if c - u - self.potential[n + j] < -tolerance {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn pivot(&mut self, source: usize, sink: usize) {
        let n = self.n;
        let m = self.m;
        // Walk both endpoints up to their common ancestor. The cycle pushes
        // flow source -> sink along the entering arc and back through the tree:
        // arcs traversed sink-to-source lose flow.
        let mut a = source;
        let mut b = n + sink;
        let mut decreasing: Vec<usize> = Vec::new();
        let mut increasing: Vec<usize> = Vec::new();
        while a != b {
            if self.depth[a] >= self.depth[b] {
                let k = self.parent_arc[a];
                if a < n {
                    decreasing.push(k);
                } else {
                    increasing.push(k);
                }
                a = self.parent_node[a];
            } else {
                let k = self.parent_arc[b];
                if b >= n {
                    decreasing.push(k);
                } else {
                    increasing.push(k);
                }
                b = self.parent_node[b];
            }
        }

        let mut leaving = decreasing[0];
        for &k in &decreasing[1..] {
            let (fk, fl) = (self.basis[k].flow, self.basis[leaving].flow);
            if fk < fl || (fk == fl && self.basis[k].id(m) < self.basis[leaving].id(m)) {
                leaving = k;
            }
        }
        let theta = self.basis[leaving].flow;
        if theta > 0.0 {
            for &k in &decreasing {
                self.basis[k].flow -= theta;
            }
            for &k in &increasing {
                self.basis[k].flow += theta;
            }
        }
        self.basis[leaving] = BasicArc {
            source,
            sink,
            flow: theta,
        };
    }
}

/// Initial basic feasible solution: a staircase of exactly `n + m - 1` arcs.
type Flow = (usize, usize, f64);

fn northwest_corner(a: &[f64], b: &[f64]) -> Vec<BasicArc> {
    let (n, m) = (a.len(), b.len());
    let mut supply = a.to_vec();
    let mut demand = b.to_vec();
    let mut basis = Vec::with_capacity(n + m - 1);
    let (mut i, mut j) = (0, 0);
    for _ in 0..(n + m - 1) {
        let flow = supply[i].min(demand[j]);
        basis.push(BasicArc {
            source: i,
            sink: j,
            flow,
        });
        supply[i] -= flow;
        demand[j] -= flow;
        if i == n - 1 {
            j += 1;
        } else if j == m - 1 || supply[i] <= demand[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    basis
}
