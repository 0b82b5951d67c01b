//! Mesh patterns on permutations.
pub mod algebra;
pub mod error;
pub mod mahonian;
pub mod mesh;
pub mod perm;
pub mod search;
pub mod stats;

pub use error::{Error, Result};
pub use mesh::{
    avoids, count_occurrences, GroupElement, Host, MeshPattern, OccurrenceWitness, RegionMask,
    Symmetry,
};
pub use perm::{IncreasingBinaryTree, Permutation, Quadrants};
pub use stats::{Statistic, StatisticDescriptor};
