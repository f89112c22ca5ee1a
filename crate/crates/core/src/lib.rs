//! Behavioural distances between states of probabilistic transition systems,
//! and their use for comparing the syntactic behaviour of texts.
//!
//! The pipeline is: build a [`features::FeaturePts`] per text (letters,
//! part-of-speech tags or constituency trees), [`features::combine`] two of
//! them at a shared end state, then measure the distance between their start
//! states with [`distance::distance_between`]. [`classify`] repeats this per
//! category and feature and ranks categories by the Euclidean norm of the
//! resulting vectors.

pub mod bisim;
pub mod classify;
pub mod distance;
pub mod features;
pub mod pts;
pub mod transport;

pub use bisim::{are_bisimilar, coarsest_bisimulation, Partition};
pub use distance::{distance_between, distance_matrix, DistanceMatrix, DistanceParams};
pub use pts::{Pts, RawPts, StateId};
