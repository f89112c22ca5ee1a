//! Coarsest probabilistic bisimulation by signature-based partition refinement.
//!
//! A state's signature is its residual mass together with the total
//! probability it sends into each current block. Blocks are split until all
//! members of every block share a signature. The residual state acts as a
//! fixed singleton block, so states with different termination mass are
//! never related.

use crate::pts::{Pts, PtsError, StateId};

/// Tolerance for comparing probabilities inside signatures.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Blocks are sorted by their smallest member, and each block is sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
    block_of: Vec<usize>,
}

impl Partition {
    fn from_assignment(block_of: &[usize]) -> Self {
        let count = block_of.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (position, &b) in block_of.iter().enumerate() {
            blocks[b].push(StateId::from_position(position));
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = vec![0; block_of.len()];
        for (b, block) in blocks.iter().enumerate() {
            for s in block {
                block_of[s.position()] = b;
            }
        }
        Partition { blocks, block_of }
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, state: StateId) -> usize {
        self.block_of[state.position()]
    }

    /// One line per block, labels joined by commas.
    pub fn render(&self, pts: &Pts) -> String {
        let mut out = String::new();
        for block in &self.blocks {
            let labels: Vec<&str> = block
                .iter()
                .map(|&s| &*pts.labels()[s.position()])
                .collect();
            out.push_str(&labels.join(","));
            out.push('\n');
        }
        out
    }
}

/// Sparse `(block, mass)` pairs sorted by block, followed by the residual.
#[derive(Debug, Clone)]
struct Signature {
    residual: f64,
    mass: Vec<(usize, f64)>,
}

impl Signature {
    fn of(pts: &Pts, state: StateId, block_of: &[usize]) -> Self {
        let mut mass: Vec<(usize, f64)> = Vec::new();
        for &(succ, p) in pts.row(state).expect("state of this system") {
            mass.push((block_of[succ.position()], p));
        }
        mass.sort_by_key(|&(b, _)| b);
        mass.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        Signature {
            residual: pts.residual(state).expect("state of this system").value(),
            mass,
        }
    }

    fn matches(&self, other: &Signature) -> bool {
        if (self.residual - other.residual).abs() > PROBABILITY_TOLERANCE {
            return false;
        }
        let (a, b) = (&self.mass, &other.mass);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let (x, y) = match (a.get(i), b.get(j)) {
                (Some(&(bi, p)), Some(&(bj, q))) if bi == bj => {
                    i += 1;
                    j += 1;
                    (p, q)
                }
                (Some(&(bi, p)), Some(&(bj, _))) if bi < bj => {
                    i += 1;
                    (p, 0.0)
                }
                (Some(&(_, p)), None) => {
                    i += 1;
                    (p, 0.0)
                }
                (_, Some(&(_, q))) => {
                    j += 1;
                    (0.0, q)
                }
                (None, None) => unreachable!(),
            };
            if (x - y).abs() > PROBABILITY_TOLERANCE {
                return false;
            }
        }
        true
    }
}

pub fn coarsest_bisimulation(pts: &Pts) -> Partition {
    let n = pts.len();
    let mut block_of = vec![0usize; n];
    let mut count = 1;
    loop {
        let signatures: Vec<Signature> = pts
            .states()
            .map(|s| Signature::of(pts, s, &block_of))
            .collect();

        // each new block is represented by its first member; states are
        // visited in id order so the split is deterministic
        let mut representatives: Vec<(usize, usize)> = Vec::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let found = representatives
                .iter()
                .find(|&&(old, rep)| old == block_of[s] && signatures[rep].matches(&signatures[s]));
            next[s] = match found {
                Some(&(_, rep)) => next[rep],
                None => {
                    representatives.push((block_of[s], s));
                    representatives.len() - 1
                }
            };
        }
        let next_count = representatives.len();
        block_of = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    Partition::from_assignment(&block_of)
}

pub fn are_bisimilar(pts: &Pts, s: StateId, t: StateId) -> Result<bool, PtsError> {
    pts.label(s)?;
    pts.label(t)?;
    let partition = coarsest_bisimulation(pts);
    Ok(partition.block_of(s) == partition.block_of(t))
}
