#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stylodist::pts::Pts;
use stylodist::transport::{reference_solve, TransportInstance};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random subprobability row over `n` successors (1-based ids).
pub fn random_row(rng: &mut impl Rng, n: usize) -> Vec<(usize, f64)> {
    if rng.random_bool(0.15) {
        return Vec::new();
    }
    let mut successors: Vec<usize> = (1..=n).collect();
    successors.shuffle(rng);
    let degree = rng.random_range(1..=n);
    successors.truncate(degree);
    successors.sort_unstable();

    let mass = if rng.random_bool(0.5) {
        1.0
    } else {
        rng.random_range(0.1..1.0)
    };
    let coarse = rng.random_bool(0.3);
    let weights: Vec<f64> = (0..degree)
        .map(|_| {
            if coarse {
                rng.random_range(1..4) as f64
            } else {
                rng.random_range(0.05..1.0)
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    successors
        .into_iter()
        .zip(weights)
        .map(|(s, w)| (s, (mass * w / total).min(1.0)))
        .collect()
}

/// About a third of the states loop back to themselves with high
/// probability, which makes the distance iteration converge slowly.
pub fn random_pts(rng: &mut impl Rng, n: usize) -> Pts {
    let labels = (1..=n).map(|i| format!("q{i}")).collect();
    let rows = (1..=n)
        .map(|state| {
            if !rng.random_bool(0.35) {
                return random_row(rng, n);
            }
            let stay = rng.random_range(0.7..0.99);
            let mut row: Vec<(usize, f64)> = random_row(rng, n)
                .into_iter()
                .filter(|&(s, _)| s != state)
                .map(|(s, p)| (s, p * (1.0 - stay)))
                .collect();
            row.push((state, stay));
            row
        })
        .collect();
    Pts::new(labels, rows).expect("generated rows are valid")
}

/// Appends a copy of `state` (1-based) with the same outgoing row.
pub fn with_duplicate(pts: &Pts, state: usize) -> Pts {
    let mut raw = pts.to_raw();
    raw.labels.push(format!("{}'", raw.labels[state - 1]));
    let row = raw.rows[state - 1].clone();
    raw.rows.push(row);
    Pts::try_from(raw).expect("duplicate keeps the system valid")
}

/// Supply and demand are extended rows of random states; costs are uniform
/// in [0, 1] with a free residual-to-residual move.
pub fn random_transport(rng: &mut impl Rng, n: usize) -> TransportInstance {
    let supply = extended(&random_row(rng, n), n);
    let demand = extended(&random_row(rng, n), n);
    let mut cost: Vec<Vec<f64>> = (0..=n)
        .map(|_| (0..=n).map(|_| rng.random_range(0.0..=1.0)).collect())
        .collect();
    cost[0][0] = 0.0;
    TransportInstance::new(supply, demand, cost)
}

/// Dense row with the residual mass at position 0.
pub fn extended(row: &[(usize, f64)], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let mut sum = 0.0;
    for &(s, p) in row {
        out[s] = p;
        sum += p;
    }
    out[0] = (1.0 - sum).max(0.0);
    out
}

/// Straightforward all-pairs iteration on dense matrices with the simplex
/// reference solver, diagonal included.
pub fn naive_distance_matrix(pts: &Pts, discount: f64, iterations: usize) -> Vec<Vec<f64>> {
    let n = pts.len();
    let rows: Vec<Vec<f64>> = pts.states().map(|s| pts.extended_row(s).unwrap()).collect();
    let mut d = vec![vec![0.0; n]; n];
    for _ in 0..iterations {
        let mut cost = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=n {
                cost[i][j] = match (i, j) {
                    (0, 0) => 0.0,
                    (0, _) | (_, 0) => 1.0,
                    _ => discount * d[i - 1][j - 1],
                };
            }
        }
        let mut next = vec![vec![0.0; n]; n];
        for k in 0..n {
            for l in 0..n {
                let inst = TransportInstance::new(rows[l].clone(), rows[k].clone(), cost.clone());
                next[k][l] = reference_solve(&inst).unwrap().objective;
            }
        }
        d = next;
    }
    d
}

pub const SYNTHETIC_ALPHABET: &[char] = &['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];

/// Letter-bigram source with a per-letter end probability.
#[derive(Debug, Clone)]
pub struct BigramGenerator {
    /// `rows[x]` is the distribution over the alphabet followed by "end".
    pub rows: Vec<Vec<f64>>,
    pub start: Vec<f64>,
}

impl BigramGenerator {
    /// Generator `g` of the three-way synthetic setup. Each prefers a
    /// different successor shift, start letter and sentence-end rate.
    pub fn synthetic(g: usize) -> Self {
        let k = SYNTHETIC_ALPHABET.len();
        let end = [0.06, 0.2, 0.45][g];
        let shift = [1, 3, 5][g];
        let rows = (0..k)
            .map(|x| {
                let mut row = vec![0.4 * (1.0 - end) / k as f64; k + 1];
                row[(x + shift) % k] += 0.6 * (1.0 - end);
                row[k] = end;
                row
            })
            .collect();
        let mut start = vec![0.5 / k as f64; k];
        start[2 * g] += 0.5;
        BigramGenerator { rows, start }
    }

    /// Smallest per-letter total-variation distance to `other`.
    pub fn min_total_variation(&self, other: &BigramGenerator) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .map(|(p, q)| 0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// At least `min_chars` characters of text made of complete sentences.
    pub fn generate(&self, rng: &mut impl Rng, min_chars: usize) -> String {
        let k = SYNTHETIC_ALPHABET.len();
        let mut out = String::new();
        while out.len() < min_chars {
            let mut letter = sample(rng, &self.start);
            let mut word_len = 0;
            loop {
                out.push(SYNTHETIC_ALPHABET[letter]);
                word_len += 1;
                let next = sample(rng, &self.rows[letter]);
                if next == k {
                    out.push_str(". ");
                    break;
                }
                if word_len >= 3 && rng.random_bool(0.3) {
                    out.push(' ');
                    word_len = 0;
                }
                letter = next;
            }
        }
        out
    }
}

fn sample(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}
