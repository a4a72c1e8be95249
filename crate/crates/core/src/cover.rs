//! Clique covers and coordinate projections between variable sets.

use std::collections::BTreeSet;

use crate::error::{CoverViolation, Error, Result};

/// Ordered list of variable cliques over `{0, .., n-1}`.
///
/// Invariants (checked on construction): every clique is nonempty,
/// strictly increasing and in range; no clique is contained in another;
/// the union is every variable. Clique order is the caller's and is never
/// changed implicitly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueCover {
    n: usize,
    cliques: Vec<Vec<usize>>,
}

impl CliqueCover {
    /// Builds a cover from 1-based cliques, as they appear in files.
    pub fn from_one_based(n: usize, cliques: Vec<Vec<usize>>) -> Result<Self> {
        validate_cover(n, &cliques)?;
        let cliques = cliques
            .into_iter()
            .map(|c| c.into_iter().map(|v| v - 1).collect())
            .collect();
        Ok(CliqueCover { n, cliques })
    }

    /// Builds a cover from 0-based cliques.
    pub fn new(n: usize, cliques: Vec<Vec<usize>>) -> Result<Self> {
        let one_based: Vec<Vec<usize>> = cliques
            .iter()
            .map(|c| c.iter().map(|v| v + 1).collect())
            .collect();
        validate_cover(n, &one_based)?;
        Ok(CliqueCover { n, cliques })
    }

    /// A single clique holding every variable.
    pub fn dense(n: usize) -> Self {
        CliqueCover {
            n,
            cliques: vec![(0..n).collect()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cliques.
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn clique(&self, i: usize) -> Result<&[usize]> {
        self.cliques
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::CliqueIndex {
                index: i,
                count: self.cliques.len(),
            })
    }

    /// Sorted variables shared by cliques `i` and `j`.
    pub fn intersection(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        let a = self.clique(i)?;
        let b = self.clique(j)?;
        Ok(intersect_sorted(a, b))
    }

    /// The same cliques listed in the order `perm` (new position -> old index).
    pub fn reordered(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: perm.len(),
            });
        }
        for &p in perm {
            if p >= self.len() || seen[p] {
                return Err(Error::Invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(CliqueCover {
            n: self.n,
            cliques: perm.iter().map(|&p| self.cliques[p].clone()).collect(),
        })
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.cliques
            .iter()
            .map(|c| c.iter().map(|v| v + 1).collect())
            .collect()
    }
}

pub(crate) fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter()
        .filter(|v| b.binary_search(v).is_ok())
        .copied()
        .collect()
}

pub(crate) fn is_subset_sorted(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}

/// Checks every cover invariant on 1-based cliques and names the first
/// violation found.
pub fn validate_cover(n: usize, cliques: &[Vec<usize>]) -> Result<(), CoverViolation> {
    if n == 0 {
        return Err(CoverViolation::ZeroDimension);
    }
    if cliques.is_empty() {
        return Err(CoverViolation::NoCliques);
    }
    for (i, c) in cliques.iter().enumerate() {
        let clique = i + 1;
        if c.is_empty() {
            return Err(CoverViolation::EmptyClique { clique });
        }
        if c.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoverViolation::NotSorted { clique });
        }
        if let Some(&variable) = c.iter().find(|&&v| v == 0 || v > n) {
            return Err(CoverViolation::OutOfRange {
                clique,
                variable,
                n,
            });
        }
    }
    for (i, a) in cliques.iter().enumerate() {
        for (j, b) in cliques.iter().enumerate() {
            if i != j && is_subset_sorted(a, b) {
                return Err(CoverViolation::Nested {
                    inner: i + 1,
                    outer: j + 1,
                });
            }
        }
    }
    let covered: BTreeSet<usize> = cliques.iter().flatten().copied().collect();
    if let Some(variable) = (1..=n).find(|v| !covered.contains(v)) {
        return Err(CoverViolation::Uncovered { variable });
    }
    Ok(())
}

/// Coordinate projection from the variables `source` onto `target ⊆ source`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    source: Vec<usize>,
    target: Vec<usize>,
    positions: Vec<usize>,
}

impl Projection {
    pub fn new(source: Vec<usize>, target: Vec<usize>) -> Result<Self> {
        let positions = target
            .iter()
            .map(|t| {
                source.iter().position(|s| s == t).ok_or_else(|| {
                    Error::Invalid(format!(
                        "projection target {target:?} not within {source:?}"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Projection {
            source,
            target,
            positions,
        })
    }

    pub fn source(&self) -> &[usize] {
        &self.source
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    /// Positions of the target variables inside the source list.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn apply<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(
            x.len(),
            self.source.len(),
            "point does not match projection source"
        );
        self.positions.iter().map(|&p| x[p]).collect()
    }
}

/// Selects the target coordinates of `x`, in target order.
pub fn project_point<T: Copy>(p: &Projection, x: &[T]) -> Vec<T> {
    p.apply(x)
}
