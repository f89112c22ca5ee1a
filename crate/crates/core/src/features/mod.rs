//! Transition systems built from text features, and the combination of two
//! such systems through a shared end state.
//!
//! Every builder produces a [`FeaturePts`]: a start state whose row is the
//! distribution of sentence-initial units, one state per observed unit with
//! empirical successor frequencies, and an absorbing end state reached when a
//! sentence (or, for grammar trees, a lexical level) ends.

mod grammar;
mod letters;
mod pos;

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::pts::{Pts, PtsError, StateId};

pub use grammar::{build_grammar_pts, parse_trees, ParseTree};
pub use letters::{build_letter_pts, build_letter_pts_with, DEFAULT_TERMINATORS};
pub use pos::{build_pos_pts, parse_tagged_tsv, TaggedSentence, END_TAG};

pub const START_LABEL: &str = "<start>";
pub const END_LABEL: &str = "<end>";

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("empty input")]
    EmptyInput,
    #[error("no complete sentence (text must contain a sentence terminator)")]
    NoSentence,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Sentence(&'static str),
    #[error("unit {0:?} collides with a reserved state label")]
    ReservedLabel(String),
    #[error("tree {0} has a root without constituents")]
    EmptyRoot(usize),
    #[error("start/end states are not usable: {0}")]
    Anchors(String),
    #[error(transparent)]
    Pts(#[from] PtsError),
}

impl FeatureError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        FeatureError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// A transition system with designated start and end states.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePts {
    pts: Pts,
    start: StateId,
    end: StateId,
}

impl FeaturePts {
    /// Checks that `end` is absorbing, `start` has no incoming transitions,
    /// and `end` is reachable from `start`.
    pub fn new(pts: Pts, start: StateId, end: StateId) -> Result<Self, FeatureError> {
        pts.label(start)?;
        pts.label(end)?;
        if start == end {
            return Err(FeatureError::Anchors("start and end coincide".into()));
        }
        if !pts.row(end)?.is_empty() {
            return Err(FeatureError::Anchors(
                "end state has outgoing transitions".into(),
            ));
        }
        if pts
            .states()
            .any(|s| pts.row(s).unwrap().iter().any(|&(t, _)| t == start))
        {
            return Err(FeatureError::Anchors(
                "start state has incoming transitions".into(),
            ));
        }
        if !reachable(&pts, start, end) {
            return Err(FeatureError::Anchors(
                "end is unreachable from start".into(),
            ));
        }
        Ok(FeaturePts { pts, start, end })
    }

    pub fn pts(&self) -> &Pts {
        &self.pts
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn end(&self) -> StateId {
        self.end
    }

    pub fn into_pts(self) -> Pts {
        self.pts
    }
}

fn reachable(pts: &Pts, from: StateId, to: StateId) -> bool {
    let mut seen = vec![false; pts.len()];
    let mut queue = VecDeque::from([from]);
    seen[from.position()] = true;
    while let Some(s) = queue.pop_front() {
        if s == to {
            return true;
        }
        for &(t, p) in pts.row(s).unwrap() {
            if p > 0.0 && !seen[t.position()] {
                seen[t.position()] = true;
                queue.push_back(t);
            }
        }
    }
    false
}

/// Two systems joined at their end states.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedPts {
    pub pts: Pts,
    pub start_a: StateId,
    pub start_b: StateId,
    pub end: StateId,
}

pub const PREFIX_A: &str = "a/";
pub const PREFIX_B: &str = "b/";

/// Disjoint union of `a` and `b` with the two end states merged. Labels get
/// an `a/` or `b/` prefix so equally named units stay distinct states.
pub fn combine(a: &FeaturePts, b: &FeaturePts) -> CombinedPts {
    let keep_a: Vec<StateId> = a.pts.states().filter(|&s| s != a.end).collect();
    let keep_b: Vec<StateId> = b.pts.states().filter(|&s| s != b.end).collect();
    let end = StateId::from_position(keep_a.len() + keep_b.len());

    let remap = |side: &FeaturePts, kept: &[StateId], offset: usize| {
        let mut map = vec![end; side.pts.len()];
        for (i, s) in kept.iter().enumerate() {
            map[s.position()] = StateId::from_position(offset + i);
        }
        map
    };
    let map_a = remap(a, &keep_a, 0);
    let map_b = remap(b, &keep_b, keep_a.len());

    let mut labels = Vec::with_capacity(end.index());
    let mut rows = Vec::with_capacity(end.index());
    for (side, kept, map, prefix) in [
        (a, &keep_a, &map_a, PREFIX_A),
        (b, &keep_b, &map_b, PREFIX_B),
    ] {
        for &s in kept {
            labels.push(format!("{prefix}{}", side.pts.labels()[s.position()]));
            rows.push(
                side.pts
                    .row(s)
                    .unwrap()
                    .iter()
                    .map(|&(t, p)| (map[t.position()].index(), p))
                    .collect(),
            );
        }
    }
    labels.push(END_LABEL.to_string());
    rows.push(Vec::new());

    // rows were valid before remapping and the labels are distinct by prefix
    let pts = Pts::new(labels, rows).expect("combination of valid systems is valid");
    CombinedPts {
        pts,
        start_a: map_a[a.start.position()],
        start_b: map_b[b.start.position()],
        end,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Start,
    Unit(String),
    End,
}

/// Transition counts between feature units, normalized once at the end.
#[derive(Debug, Default)]
struct Counts {
    edges: BTreeMap<Node, BTreeMap<Node, u64>>,
}

impl Counts {
    fn add(&mut self, from: Node, to: Node) {
        *self.edges.entry(from).or_default().entry(to).or_default() += 1;
    }

    fn into_feature_pts(self) -> Result<FeaturePts, FeatureError> {
        let mut nodes: Vec<Node> = vec![Node::Start, Node::End];
        for (from, succ) in &self.edges {
            nodes.push(from.clone());
            nodes.extend(succ.keys().cloned());
        }
        nodes.sort();
        nodes.dedup();

        let labels: Vec<String> = nodes
            .iter()
            .map(|n| match n {
                Node::Start => Ok(START_LABEL.to_string()),
                Node::End => Ok(END_LABEL.to_string()),
                Node::Unit(u) if u == START_LABEL || u == END_LABEL => {
                    Err(FeatureError::ReservedLabel(u.clone()))
                }
                Node::Unit(u) => Ok(u.clone()),
            })
            .collect::<Result<_, _>>()?;
        let index = |n: &Node| nodes.binary_search(n).expect("node was collected") + 1;

        let rows = nodes
            .iter()
            .map(|n| match self.edges.get(n) {
                None => Vec::new(),
                Some(succ) => {
                    let total: u64 = succ.values().sum();
                    succ.iter()
                        .map(|(to, &count)| (index(to), count as f64 / total as f64))
                        .collect()
                }
            })
            .collect();
        let pts = Pts::new(labels, rows)?;
        let start = StateId::from_position(0);
        let end = StateId::from_position(nodes.len() - 1);
        FeaturePts::new(pts, start, end)
    }
}

/// Adds the start -> u1 -> … -> un -> end chain of one sentence.
fn count_sequence<I>(counts: &mut Counts, units: I)
where
    I: IntoIterator<Item = String>,
{
    let mut previous = Node::Start;
    for unit in units {
        let node = Node::Unit(unit);
        counts.add(previous, node.clone());
        previous = node;
    }
    counts.add(previous, Node::End);
}
