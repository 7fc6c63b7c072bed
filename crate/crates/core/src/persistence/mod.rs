//! Vietoris-Rips persistent homology in dimensions 0 and 1.
//!
//! Simplices enter at the largest pairwise distance among their vertices,
//! using the closed convention `d(i, j) <= eps`. Coefficients are in Z/2.
//! Pairs with `death == birth` carry no information and are never reported.

mod bottleneck;
mod distance;
mod rips;
mod subsample;

pub use bottleneck::bottleneck_distance;
pub use distance::{pairwise_distances, DistanceMatrix};
pub use rips::{rips_filtration, rips_persistence, FilteredSimplex};
pub use subsample::{maxmin_indices, maxmin_subsample};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePair<T> {
    pub dim: usize,
    pub birth: T,
    /// `+inf` for classes that never die inside the filtration.
    pub death: T,
}

impl<T: Real> PersistencePair<T> {
    pub fn persistence(&self) -> T {
        self.death - self.birth
    }

    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }
}

/// Multiset of persistence pairs, kept sorted by `(dim, birth, death)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PersistenceDiagram<T> {
    pairs: Vec<PersistencePair<T>>,
}

impl<T: Real> PersistenceDiagram<T> {
    pub fn new(mut pairs: Vec<PersistencePair<T>>) -> Self {
        pairs.sort_by(cmp_pairs);
        PersistenceDiagram { pairs }
    }

    pub fn pairs(&self) -> &[PersistencePair<T>] {
        &self.pairs
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair<T>> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn count_infinite(&self, dim: usize) -> usize {
        self.in_dim(dim).filter(|p| !p.is_finite()).count()
    }
}

fn cmp_pairs<T: Real>(a: &PersistencePair<T>, b: &PersistencePair<T>) -> Ordering {
    a.dim
        .cmp(&b.dim)
        .then(a.birth.partial_cmp(&b.birth).unwrap_or(Ordering::Equal))
        .then(a.death.partial_cmp(&b.death).unwrap_or(Ordering::Equal))
}

/// Knobs for turning a reconstructed cloud into a diagram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceConfig {
    /// Clouds larger than this are reduced by maxmin subsampling.
    pub n_max: usize,
    pub seed: u64,
    /// Filtration cap; `None` means the largest pairwise distance.
    pub eps_max: Option<f64>,
}

impl Default for PersistenceConfig {
    fn default() -> Self {
        PersistenceConfig {
            n_max: 400,
            seed: 0,
            eps_max: None,
        }
    }
}
