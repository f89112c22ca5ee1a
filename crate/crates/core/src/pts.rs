//! Unlabelled probabilistic transition systems with subprobabilistic rows.
//!
//! States are numbered from 1. Index 0 is reserved for the virtual
//! termination state that absorbs each row's missing mass; it never appears
//! inside a [`Pts`] and only shows up in [`Pts::extended_row`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Identifier of a real state, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(usize);

impl StateId {
    /// Returns `None` for 0, which is reserved for the residual state.
    pub fn new(index: usize) -> Option<Self> {
        (index > 0).then_some(StateId(index))
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// Zero-based position in label and row vectors.
    pub fn position(self) -> usize {
        self.0 - 1
    }

    pub(crate) fn from_position(position: usize) -> Self {
        StateId(position + 1)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Probability mass a state leaves unassigned, `1 - Σ_j π(s_i, s_j)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ResidualMass(f64);

impl ResidualMass {
    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("the state set is empty")]
    NoStates,
    #[error("{} rows given for {} labels", .rows, .labels)]
    RowCountMismatch { labels: usize, rows: usize },
    #[error("duplicate label {label:?} (states {first} and {second})")]
    DuplicateLabel {
        label: String,
        first: usize,
        second: usize,
    },
    #[error("state {state}: probability {probability} to successor {successor} is outside [0, 1]")]
    ProbabilityOutOfRange {
        state: usize,
        successor: usize,
        probability: f64,
    },
    #[error("state {state}: row sum {sum} > 1")]
    RowSumExceedsOne { state: usize, sum: f64 },
    #[error("state {state}: successor {successor} does not exist")]
    DanglingSuccessor { state: usize, successor: usize },
    #[error("state {state}: successor {successor} listed more than once")]
    DuplicateSuccessor { state: usize, successor: usize },
}

/// Outcome of [`RawPts::validate`]. Violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PtsError {
    #[error("invalid transition system: {0}")]
    Invalid(ValidationReport),
    #[error("no state with id {0}")]
    UnknownState(usize),
    #[error("malformed PTS JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0}, expected 1")]
    FormatVersion(u32),
    #[error("state {state}: probability {text:?} is not a decimal number")]
    BadProbability { state: usize, text: String },
}

/// Unchecked transition system data, as read from disk or assembled by hand.
///
/// `rows[i]` lists `(successor, probability)` pairs of state `i + 1`;
/// successors are 1-based.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawPts {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl RawPts {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        RawPts { labels, rows }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.labels.len();
        if n == 0 {
            violations.push(Violation::NoStates);
        }
        if self.rows.len() != n {
            violations.push(Violation::RowCountMismatch {
                labels: n,
                rows: self.rows.len(),
            });
        }

        let mut seen = std::collections::HashMap::new();
        for (i, label) in self.labels.iter().enumerate() {
            if let Some(&first) = seen.get(label.as_str()) {
                violations.push(Violation::DuplicateLabel {
                    label: label.clone(),
                    first,
                    second: i + 1,
                });
            } else {
                seen.insert(label.as_str(), i + 1);
            }
        }

        for (i, row) in self.rows.iter().enumerate() {
            let state = i + 1;
            let mut successors = HashSet::new();
            let mut sum = 0.0;
            for &(successor, probability) in row {
                if !(0.0..=1.0).contains(&probability) {
                    violations.push(Violation::ProbabilityOutOfRange {
                        state,
                        successor,
                        probability,
                    });
                }
                if successor == 0 || successor > n {
                    violations.push(Violation::DanglingSuccessor { state, successor });
                }
                if !successors.insert(successor) {
                    violations.push(Violation::DuplicateSuccessor { state, successor });
                }
                sum += probability;
            }
            if sum > 1.0 + ROW_SUM_TOLERANCE {
                violations.push(Violation::RowSumExceedsOne { state, sum });
            }
        }

        ValidationReport { violations }
    }
}

/// Shorthand for [`RawPts::validate`].
pub fn validate(raw: &RawPts) -> ValidationReport {
    raw.validate()
}

/// A validated probabilistic transition system. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Pts {
    labels: Vec<String>,
    // sorted by successor
    rows: Vec<Vec<(StateId, f64)>>,
}

impl TryFrom<RawPts> for Pts {
    type Error = PtsError;

    fn try_from(raw: RawPts) -> Result<Self, PtsError> {
        let report = raw.validate();
        if !report.is_valid() {
            return Err(PtsError::Invalid(report));
        }
        let rows = raw
            .rows
            .into_iter()
            .map(|row| {
                let mut row: Vec<(StateId, f64)> =
                    row.into_iter().map(|(s, p)| (StateId(s), p)).collect();
                row.sort_by_key(|&(s, _)| s);
                row
            })
            .collect();
        Ok(Pts {
            labels: raw.labels,
            rows,
        })
    }
}

impl Pts {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<(usize, f64)>>) -> Result<Self, PtsError> {
        Pts::try_from(RawPts::new(labels, rows))
    }

    /// Number of real states.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = StateId> + '_ {
        (0..self.labels.len()).map(StateId::from_position)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn state_id(&self, index: usize) -> Result<StateId, PtsError> {
        if index >= 1 && index <= self.len() {
            Ok(StateId(index))
        } else {
            Err(PtsError::UnknownState(index))
        }
    }

    pub fn label(&self, state: StateId) -> Result<&str, PtsError> {
        self.check(state)?;
        Ok(&self.labels[state.position()])
    }

    pub fn find(&self, label: &str) -> Option<StateId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(StateId::from_position)
    }

    /// Outgoing transitions of `state`, sorted by successor.
    pub fn row(&self, state: StateId) -> Result<&[(StateId, f64)], PtsError> {
        self.check(state)?;
        Ok(&self.rows[state.position()])
    }

    pub fn probability(&self, from: StateId, to: StateId) -> Result<f64, PtsError> {
        self.check(to)?;
        let row = self.row(from)?;
        Ok(row
            .binary_search_by_key(&to, |&(s, _)| s)
            .map(|i| row[i].1)
            .unwrap_or(0.0))
    }

    pub fn residual(&self, state: StateId) -> Result<ResidualMass, PtsError> {
        let sum: f64 = self.row(state)?.iter().map(|&(_, p)| p).sum();
        // validation bounds the sum by 1 + tol, so the clamp only absorbs rounding
        Ok(ResidualMass((1.0 - sum).clamp(0.0, 1.0)))
    }

    /// Distribution over `{0, 1, …, N}`: position 0 holds the residual mass,
    /// position `j` the probability of moving to `s_j`.
    pub fn extended_row(&self, state: StateId) -> Result<Vec<f64>, PtsError> {
        let mut out = vec![0.0; self.len() + 1];
        out[0] = self.residual(state)?.value();
        for &(s, p) in self.row(state)? {
            out[s.index()] = p;
        }
        Ok(out)
    }

    pub fn to_raw(&self) -> RawPts {
        RawPts {
            labels: self.labels.clone(),
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|&(s, p)| (s.index(), p)).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = PtsFile {
            format_version: 1,
            labels: self.labels.clone(),
            rows: self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&(s, p)| (s.index(), p.to_string()))
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("PTS serialization cannot fail")
    }

    /// Parses the on-disk JSON format and validates the result.
    pub fn from_json(text: &str) -> Result<Self, PtsError> {
        Pts::try_from(RawPts::from_json(text)?)
    }

    fn check(&self, state: StateId) -> Result<(), PtsError> {
        if state.0 >= 1 && state.0 <= self.len() {
            Ok(())
        } else {
            Err(PtsError::UnknownState(state.0))
        }
    }
}

impl RawPts {
    /// Parses the JSON format without validating the system.
    pub fn from_json(text: &str) -> Result<Self, PtsError> {
        let file: PtsFile = serde_json::from_str(text)?;
        if file.format_version != 1 {
            return Err(PtsError::FormatVersion(file.format_version));
        }
        let rows = file
            .rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .map(|(s, text)| match text.trim().parse::<f64>() {
                        Ok(p) if p.is_finite() => Ok((s, p)),
                        _ => Err(PtsError::BadProbability { state: i + 1, text }),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RawPts {
            labels: file.labels,
            rows,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PtsFile {
    format_version: u32,
    labels: Vec<String>,
    rows: Vec<Vec<(usize, String)>>,
}
