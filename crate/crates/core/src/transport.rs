//! Transportation problem between two extended probability rows.
//!
//! [`solve`] reduces the problem to a minimum-cost flow on the bipartite
//! network `S -> sources -> sinks -> T` and runs successive shortest paths
//! with node potentials, so every Dijkstra pass works on non-negative
//! reduced costs. Capacities are fractional; there is no integer scaling.
//!
//! [`reference_solve`] is a plain two-phase tableau simplex with Bland's
//! rule. It is slow and only meant to cross-check [`solve`] on small
//! instances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Allowed difference between total supply and total demand.
pub const BALANCE_TOLERANCE: f64 = 1e-9;

/// Supply or demand entries below this are dropped before building the network.
pub const NEGLIGIBLE_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportInstance {
    /// Mass available at each source.
    pub supply: Vec<f64>,
    /// Mass required at each sink.
    pub demand: Vec<f64>,
    /// `cost[i][j]` is the price of moving one unit from source `i` to sink `j`.
    pub cost: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSolution {
    pub objective: f64,
    /// `flow[i][j]` is the mass moved from source `i` to sink `j`.
    pub flow: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("cost matrix is {rows}x{cols}, expected {sources}x{sinks}")]
    Shape {
        sources: usize,
        sinks: usize,
        rows: usize,
        cols: usize,
    },
    #[error("{what}[{index}] = {value} is negative or not finite")]
    BadEntry {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("total supply {supply} differs from total demand {demand}")]
    Unbalanced { supply: f64, demand: f64 },
    #[error("solver stopped after {0} augmentations without reaching optimality")]
    Stalled(usize),
}

impl TransportInstance {
    pub fn new(supply: Vec<f64>, demand: Vec<f64>, cost: Vec<Vec<f64>>) -> Self {
        TransportInstance {
            supply,
            demand,
            cost,
        }
    }

    pub fn check(&self) -> Result<(), TransportError> {
        let (m, n) = (self.supply.len(), self.demand.len());
        let bad_shape = self.cost.len() != m || self.cost.iter().any(|r| r.len() != n);
        if bad_shape {
            return Err(TransportError::Shape {
                sources: m,
                sinks: n,
                rows: self.cost.len(),
                cols: self.cost.first().map_or(0, Vec::len),
            });
        }
        let entries = [("supply", &self.supply), ("demand", &self.demand)];
        for (what, values) in entries {
            if let Some((index, &value)) = values
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
            {
                return Err(TransportError::BadEntry { what, index, value });
            }
        }
        for (i, row) in self.cost.iter().enumerate() {
            if let Some(&value) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(TransportError::BadEntry {
                    what: "cost",
                    index: i,
                    value,
                });
            }
        }
        let supply: f64 = self.supply.iter().sum();
        let demand: f64 = self.demand.iter().sum();
        if (supply - demand).abs() > BALANCE_TOLERANCE {
            return Err(TransportError::Unbalanced { supply, demand });
        }
        Ok(())
    }

    fn objective_of(&self, flow: &[Vec<f64>]) -> f64 {
        self.cost
            .iter()
            .zip(flow)
            .flat_map(|(c, f)| c.iter().zip(f).map(|(c, f)| c * f))
            .sum()
    }
}

/// Minimum-cost transport plan by successive shortest paths.
pub fn solve(instance: &TransportInstance) -> Result<TransportSolution, TransportError> {
    instance.check()?;
    let sources: Vec<usize> = significant(&instance.supply);
    let sinks: Vec<usize> = significant(&instance.demand);
    let cost: Vec<Vec<f64>> = sources
        .iter()
        .map(|&i| sinks.iter().map(|&j| instance.cost[i][j]).collect())
        .collect();
    let mut network = Network::new(
        sources.iter().map(|&i| instance.supply[i]).collect(),
        sinks.iter().map(|&j| instance.demand[j]).collect(),
        cost,
    );
    network.run()?;

    let mut flow = vec![vec![0.0; instance.demand.len()]; instance.supply.len()];
    for (a, &i) in sources.iter().enumerate() {
        for (b, &j) in sinks.iter().enumerate() {
            flow[i][j] = network.flow[a][b];
        }
    }
    Ok(TransportSolution {
        objective: instance.objective_of(&flow),
        flow,
    })
}

fn significant(mass: &[f64]) -> Vec<usize> {
    (0..mass.len())
        .filter(|&i| mass[i] > NEGLIGIBLE_MASS)
        .collect()
}

// Residual capacities at or below this count as empty.
const EMPTY: f64 = 1e-15;

/// Dense bipartite residual network. Node order for Dijkstra is
/// `S, sources…, sinks…, T`; ties in tentative distance go to the lower index.
struct Network {
    supply: Vec<f64>,
    demand: Vec<f64>,
    cost: Vec<Vec<f64>>,
    flow: Vec<Vec<f64>>,
    potential: Vec<f64>,
}

impl Network {
    fn new(supply: Vec<f64>, demand: Vec<f64>, cost: Vec<Vec<f64>>) -> Self {
        let (m, n) = (supply.len(), demand.len());
        Network {
            supply,
            demand,
            cost,
            flow: vec![vec![0.0; n]; m],
            potential: vec![0.0; m + n + 2],
        }
    }

    fn run(&mut self) -> Result<(), TransportError> {
        let (m, n) = (self.supply.len(), self.demand.len());
        let limit = 64 + 8 * (m + 1) * (n + 1);
        for _ in 0..limit {
            match self.shortest_path() {
                Some(path) => self.augment(&path),
                None => return Ok(()),
            }
        }
        Err(TransportError::Stalled(limit))
    }

    fn source_node(&self, a: usize) -> usize {
        1 + a
    }

    fn sink_node(&self, b: usize) -> usize {
        1 + self.supply.len() + b
    }

    /// Returns the node sequence of a shortest `S -> T` path, or `None` when
    /// either side is exhausted.
    fn shortest_path(&mut self) -> Option<Vec<usize>> {
        let (m, n) = (self.supply.len(), self.demand.len());
        let nodes = m + n + 2;
        let (s, t) = (0, nodes - 1);
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        dist[s] = 0.0;

        loop {
            let mut u = usize::MAX;
            for v in 0..nodes {
                if !done[v] && dist[v].is_finite() && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;

            let pu = self.potential[u];
            let mut relax = |v: usize, arc_cost: f64, dist: &mut Vec<f64>| {
                let reduced = (arc_cost + pu - self.potential[v]).max(0.0);
                let candidate = dist[u] + reduced;
                if candidate < dist[v] {
                    dist[v] = candidate;
                    prev[v] = u;
                }
            };
            if u == s {
                for a in 0..m {
                    if self.supply[a] > EMPTY {
                        relax(self.source_node(a), 0.0, &mut dist);
                    }
                }
            } else if u <= m {
                let a = u - 1;
                for b in 0..n {
                    relax(self.sink_node(b), self.cost[a][b], &mut dist);
                }
            } else if u < t {
                let b = u - 1 - m;
                for a in 0..m {
                    if self.flow[a][b] > EMPTY {
                        relax(self.source_node(a), -self.cost[a][b], &mut dist);
                    }
                }
                if self.demand[b] > EMPTY {
                    relax(t, 0.0, &mut dist);
                }
            }
        }

        if !dist[t].is_finite() {
            return None;
        }
        for v in 0..nodes {
            self.potential[v] += dist[v].min(dist[t]);
        }
        let mut path = vec![t];
        let mut v = t;
        while v != s {
            v = prev[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }

    fn augment(&mut self, path: &[usize]) {
        let m = self.supply.len();
        // path = S, src, snk, (src, snk)*, T
        let first = path[1] - 1;
        let last = path[path.len() - 2] - 1 - m;
        let mut delta = self.supply[first].min(self.demand[last]);
        for pair in path[1..path.len() - 1].windows(2) {
            if pair[0] > m {
                // backward arc sink -> source cancels flow
                let (b, a) = (pair[0] - 1 - m, pair[1] - 1);
                delta = delta.min(self.flow[a][b]);
            }
        }

        self.supply[first] = clean(self.supply[first] - delta);
        self.demand[last] = clean(self.demand[last] - delta);
        for pair in path[1..path.len() - 1].windows(2) {
            if pair[0] <= m {
                let (a, b) = (pair[0] - 1, pair[1] - 1 - m);
                self.flow[a][b] += delta;
            } else {
                let (b, a) = (pair[0] - 1 - m, pair[1] - 1);
                self.flow[a][b] = clean(self.flow[a][b] - delta);
            }
        }
    }
}

fn clean(x: f64) -> f64 {
    if x <= EMPTY {
        0.0
    } else {
        x
    }
}

const PIVOT_EPS: f64 = 1e-12;

/// Reference optimum via a two-phase dense tableau simplex.
pub fn reference_solve(instance: &TransportInstance) -> Result<TransportSolution, TransportError> {
    instance.check()?;
    let (m, n) = (instance.supply.len(), instance.demand.len());
    let vars = m * n;
    let rows = m + n;
    let cols = vars + rows + 1;

    // constraint rows: one per source, then one per sink; artificials on the diagonal
    let mut tableau = vec![vec![0.0; cols]; rows];
    for i in 0..m {
        for j in 0..n {
            tableau[i][i * n + j] = 1.0;
            tableau[m + j][i * n + j] = 1.0;
        }
    }
    for r in 0..rows {
        tableau[r][vars + r] = 1.0;
        tableau[r][cols - 1] = if r < m {
            instance.supply[r]
        } else {
            instance.demand[r - m]
        };
    }
    let mut basis: Vec<usize> = (vars..vars + rows).collect();

    let mut phase_one_cost = vec![0.0; vars + rows];
    phase_one_cost[vars..].iter_mut().for_each(|c| *c = 1.0);
    run_simplex(&mut tableau, &mut basis, &phase_one_cost, |_| true);

    // pivot remaining zero-level artificials out where possible
    for r in 0..rows {
        if basis[r] >= vars {
            if let Some(col) = (0..vars).find(|&j| tableau[r][j].abs() > PIVOT_EPS) {
                pivot(&mut tableau, &mut basis, r, col);
            }
        }
    }

    let mut cost = vec![0.0; vars + rows];
    for i in 0..m {
        for j in 0..n {
            cost[i * n + j] = instance.cost[i][j];
        }
    }
    run_simplex(&mut tableau, &mut basis, &cost, |j| j < vars);

    let mut flow = vec![vec![0.0; n]; m];
    for (r, &var) in basis.iter().enumerate() {
        if var < vars {
            flow[var / n][var % n] = tableau[r][cols - 1].max(0.0);
        }
    }
    Ok(TransportSolution {
        objective: instance.objective_of(&flow),
        flow,
    })
}

fn run_simplex(
    tableau: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    may_enter: impl Fn(usize) -> bool,
) {
    let rhs = tableau[0].len() - 1;
    loop {
        // Bland: lowest-index column with negative reduced cost
        let entering = (0..cost.len()).filter(|&j| may_enter(j)).find(|&j| {
            let reduced = cost[j]
                - (0..basis.len())
                    .map(|r| cost[basis[r]] * tableau[r][j])
                    .sum::<f64>();
            reduced < -PIVOT_EPS
        });
        let Some(col) = entering else {
            return;
        };
        let mut leaving: Option<(usize, f64)> = None;
        for r in 0..basis.len() {
            if tableau[r][col] > PIVOT_EPS {
                let ratio = tableau[r][rhs] / tableau[r][col];
                let better = match leaving {
                    None => true,
                    Some((best, best_ratio)) => {
                        ratio < best_ratio - PIVOT_EPS
                            || (ratio <= best_ratio + PIVOT_EPS && basis[r] < basis[best])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
        }
        // the feasible region is bounded, so some row always limits the step
        let (row, _) = leaving.expect("transportation LP is bounded");
        pivot(tableau, basis, row, col);
    }
}

fn pivot(tableau: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = tableau[row][col];
    tableau[row].iter_mut().for_each(|v| *v /= p);
    let pivot_row = tableau[row].clone();
    for (r, line) in tableau.iter_mut().enumerate() {
        if r != row {
            let factor = line[col];
            if factor != 0.0 {
                line.iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(v, p)| *v -= factor * p);
            }
        }
    }
    basis[row] = col;
}
