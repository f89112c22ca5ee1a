//! Discounted behavioural distance between the states of a [`Pts`].
//!
//! Starting from the all-zero matrix, every iteration replaces `d[k][l]` by
//! the optimal transport cost between the extended rows of `s_k` and `s_l`,
//! where moving mass between real states `i, j` costs `c * d[i][j]` and moving
//! it to or from the residual state 0 costs 1. After
//! `n = ⌈log_c(alpha / 2)⌉` iterations the matrix is within `alpha` of the
//! fixed point.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::pts::{Pts, PtsError, StateId};
use crate::transport::{self, TransportError, TransportInstance, NEGLIGIBLE_MASS};

pub const DEFAULT_DISCOUNT: f64 = 0.9;
pub const DEFAULT_ACCURACY: f64 = 0.01;
pub const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("discount must lie in (0, 1), got {0}")]
    Discount(f64),
    #[error("accuracy must lie in (0, 1], got {0}")]
    Accuracy(f64),
    #[error(
        "discount {discount} and accuracy {accuracy} need more than {MAX_ITERATIONS} iterations"
    )]
    TooManyIterations { discount: f64, accuracy: f64 },
    #[error("transport between {k} and {l} failed: {source}")]
    Transport {
        k: StateId,
        l: StateId,
        source: TransportError,
    },
    #[error(transparent)]
    Pts(#[from] PtsError),
}

/// Discount `c` and accuracy `alpha`, with the derived iteration count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceParams {
    #[serde(rename = "c")]
    discount: f64,
    #[serde(rename = "alpha")]
    accuracy: f64,
    iterations: usize,
}

impl DistanceParams {
    pub fn new(discount: f64, accuracy: f64) -> Result<Self, DistanceError> {
        if !(discount > 0.0 && discount < 1.0) {
            return Err(DistanceError::Discount(discount));
        }
        if !(accuracy > 0.0 && accuracy <= 1.0) {
            return Err(DistanceError::Accuracy(accuracy));
        }
        let iterations = iteration_count(discount, accuracy)
            .ok_or(DistanceError::TooManyIterations { discount, accuracy })?;
        Ok(DistanceParams {
            discount,
            accuracy,
            iterations,
        })
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

impl Default for DistanceParams {
    fn default() -> Self {
        DistanceParams::new(DEFAULT_DISCOUNT, DEFAULT_ACCURACY).expect("defaults are valid")
    }
}

/// Smallest `n >= 1` with `c^n <= alpha / 2`, i.e. `⌈ln(alpha/2) / ln(c)⌉`.
fn iteration_count(discount: f64, accuracy: f64) -> Option<usize> {
    let target = accuracy / 2.0;
    let estimate = (target.ln() / discount.ln()).ceil();
    if !estimate.is_finite() || estimate > MAX_ITERATIONS as f64 + 1.0 {
        return None;
    }
    let mut n = (estimate as usize).max(1);
    // the float quotient can land one step off an exact power
    while n > 1 && discount.powi(n as i32 - 1) <= target {
        n -= 1;
    }
    while discount.powi(n as i32) > target {
        n += 1;
    }
    (n <= MAX_ITERATIONS).then_some(n)
}

/// Symmetric `N x N` matrix of distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(size: usize) -> Self {
        DistanceMatrix {
            size,
            values: vec![0.0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, k: StateId, l: StateId) -> f64 {
        self.values[k.position() * self.size + l.position()]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.size.max(1))
    }

    /// Largest entrywise absolute difference.
    pub fn max_difference(&self, other: &DistanceMatrix) -> f64 {
        assert_eq!(self.size, other.size, "matrices of different size");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn at(&self, k: usize, l: usize) -> f64 {
        self.values[k * self.size + l]
    }

    fn set_pair(&mut self, k: usize, l: usize, value: f64) {
        self.values[k * self.size + l] = value;
        self.values[l * self.size + k] = value;
    }

    pub fn to_json(&self, pts: &Pts, params: &DistanceParams) -> String {
        #[derive(Serialize)]
        struct File<'a> {
            format_version: u32,
            labels: &'a [String],
            c: f64,
            alpha: f64,
            iterations: usize,
            d: Vec<Vec<String>>,
        }
        let file = File {
            format_version: 1,
            labels: pts.labels(),
            c: params.discount,
            alpha: params.accuracy,
            iterations: params.iterations,
            d: self
                .rows()
                .map(|row| row.iter().map(f64::to_string).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("distance serialization cannot fail")
    }
}

impl fmt::Display for DistanceMatrix {
    /// Aligned table with four decimals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            writeln!(f, "{}", cells.join("  "))?;
        }
        Ok(())
    }
}

/// Transport costs over `{0, …, N}` for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    size: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn new(previous: &DistanceMatrix, discount: f64) -> Self {
        let size = previous.size + 1;
        let mut values = vec![0.0; size * size];
        for i in 0..size {
            for j in 0..size {
                values[i * size + j] = border_cost(previous, discount, i, j);
            }
        }
        CostMatrix { size, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.size).map(<[f64]>::to_vec).collect()
    }
}

#[inline]
fn border_cost(previous: &DistanceMatrix, discount: f64, i: usize, j: usize) -> f64 {
    match (i, j) {
        (0, 0) => 0.0,
        (0, _) | (_, 0) => 1.0,
        _ => discount * previous.at(i - 1, j - 1),
    }
}

/// One transport evaluation: optimal cost of coupling the extended rows of
/// `s_k` (demand) and `s_l` (supply) under costs derived from `previous`.
pub fn min_value(
    pts: &Pts,
    previous: &DistanceMatrix,
    params: &DistanceParams,
    k: StateId,
    l: StateId,
) -> Result<f64, DistanceError> {
    let cost = CostMatrix::new(previous, params.discount).to_rows();
    let instance = TransportInstance::new(pts.extended_row(l)?, pts.extended_row(k)?, cost);
    transport::solve(&instance)
        .map(|s| s.objective.clamp(0.0, 1.0))
        .map_err(|source| DistanceError::Transport { k, l, source })
}

/// Entries of an extended row that carry non-negligible mass, as
/// `(extended index, probability)`.
fn support(pts: &Pts, state: StateId) -> Result<Vec<(usize, f64)>, PtsError> {
    Ok(pts
        .extended_row(state)?
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > NEGLIGIBLE_MASS)
        .collect())
}

/// Runs the iteration restricted to `pairs` (zero-based positions, `k < l`).
/// Entries outside `pairs` stay zero and must not be needed by them.
struct Engine<'a> {
    supports: Vec<Vec<(usize, f64)>>,
    pairs: Vec<(usize, usize)>,
    discount: f64,
    pts: &'a Pts,
}

impl<'a> Engine<'a> {
    fn new(pts: &'a Pts, discount: f64, pairs: Vec<(usize, usize)>) -> Result<Self, PtsError> {
        let supports = pts
            .states()
            .map(|s| support(pts, s))
            .collect::<Result<_, _>>()?;
        Ok(Engine {
            supports,
            pairs,
            discount,
            pts,
        })
    }

    fn all_pairs(pts: &'a Pts, discount: f64) -> Result<Self, PtsError> {
        let n = pts.len();
        let pairs = (0..n)
            .flat_map(|k| (k + 1..n).map(move |l| (k, l)))
            .collect();
        Engine::new(pts, discount, pairs)
    }

    /// Pairs that the value of `(k, l)` transitively depends on.
    fn closure(pts: &'a Pts, discount: f64, k: usize, l: usize) -> Result<Self, PtsError> {
        let mut engine = Engine::new(pts, discount, Vec::new())?;
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([(k.min(l), k.max(l))]);
        seen.insert((k.min(l), k.max(l)));
        while let Some((a, b)) = queue.pop_front() {
            for &(i, _) in &engine.supports[a] {
                for &(j, _) in &engine.supports[b] {
                    if i == 0 || j == 0 || i == j {
                        continue;
                    }
                    let pair = ((i - 1).min(j - 1), (i - 1).max(j - 1));
                    if seen.insert(pair) {
                        queue.push_back(pair);
                    }
                }
            }
        }
        engine.pairs = seen.into_iter().collect();
        Ok(engine)
    }

    fn step(&self, previous: &DistanceMatrix) -> Result<DistanceMatrix, DistanceError> {
        let values = self
            .pairs
            .par_iter()
            .map(|&(k, l)| self.solve_pair(previous, k, l))
            .collect::<Result<Vec<_>, _>>()?;
        let mut next = DistanceMatrix::zeros(previous.size);
        for (&(k, l), value) in self.pairs.iter().zip(values) {
            next.set_pair(k, l, value);
        }
        Ok(next)
    }

    fn solve_pair(
        &self,
        previous: &DistanceMatrix,
        k: usize,
        l: usize,
    ) -> Result<f64, DistanceError> {
        let demand = &self.supports[k];
        let supply = &self.supports[l];
        let cost = supply
            .iter()
            .map(|&(i, _)| {
                demand
                    .iter()
                    .map(|&(j, _)| border_cost(previous, self.discount, i, j))
                    .collect()
            })
            .collect();
        let instance = TransportInstance::new(
            supply.iter().map(|&(_, p)| p).collect(),
            demand.iter().map(|&(_, p)| p).collect(),
            cost,
        );
        transport::solve(&instance)
            .map(|s| s.objective.clamp(0.0, 1.0))
            .map_err(|source| DistanceError::Transport {
                k: StateId::from_position(k),
                l: StateId::from_position(l),
                source,
            })
    }

    fn run(&self, iterations: usize) -> Result<DistanceMatrix, DistanceError> {
        let mut d = DistanceMatrix::zeros(self.pts.len());
        for _ in 0..iterations {
            d = self.step(&d)?;
        }
        Ok(d)
    }
}

/// Successive iterates `d⁽¹⁾, d⁽²⁾, …` of the full distance matrix.
pub struct Iterates<'a> {
    engine: Result<Engine<'a>, Option<PtsError>>,
    current: DistanceMatrix,
}

impl Iterator for Iterates<'_> {
    type Item = Result<DistanceMatrix, DistanceError>;

    fn next(&mut self) -> Option<Self::Item> {
        let engine = match &mut self.engine {
            Ok(engine) => engine,
            Err(e) => return e.take().map(|e| Err(e.into())),
        };
        match engine.step(&self.current) {
            Ok(next) => {
                self.current = next.clone();
                Some(Ok(next))
            }
            Err(e) => Some(Err(e)),
        }
    }
}

pub fn iterates<'a>(pts: &'a Pts, params: &DistanceParams) -> Iterates<'a> {
    Iterates {
        engine: Engine::all_pairs(pts, params.discount).map_err(Some),
        current: DistanceMatrix::zeros(pts.len()),
    }
}

/// The `n`-th iterate with `n = params.iterations()`.
pub fn distance_matrix(
    pts: &Pts,
    params: &DistanceParams,
) -> Result<DistanceMatrix, DistanceError> {
    Engine::all_pairs(pts, params.discount)?.run(params.iterations)
}

/// Entry `(k, l)` of [`distance_matrix`]. Only the pairs that `(k, l)`
/// depends on are iterated, which gives the same value.
pub fn distance_between(
    pts: &Pts,
    k: StateId,
    l: StateId,
    params: &DistanceParams,
) -> Result<f64, DistanceError> {
    pts.label(k)?;
    pts.label(l)?;
    if k == l {
        return Ok(0.0);
    }
    let d = Engine::closure(pts, params.discount, k.position(), l.position())?
        .run(params.iterations)?;
    Ok(d.get(k, l))
}
