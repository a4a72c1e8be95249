use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::scalar::Real;

/// Finite weighted sum of Dirac masses on a list of (0-based) variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure<T> {
    variables: Vec<usize>,
    atoms: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Real> AtomicMeasure<T> {
    pub fn new(variables: Vec<usize>, atoms: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: atoms.len(),
                got: weights.len(),
            });
        }
        if let Some(a) = atoms.iter().find(|a| a.len() != variables.len()) {
            return Err(Error::DimensionMismatch {
                expected: variables.len(),
                got: a.len(),
            });
        }
        Ok(AtomicMeasure {
            variables,
            atoms,
            weights,
        })
    }

    pub fn empty(variables: Vec<usize>) -> Self {
        AtomicMeasure {
            variables,
            atoms: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn variables(&self) -> &[usize] {
        &self.variables
    }

    pub fn atoms(&self) -> &[Vec<T>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, &w| a + w)
    }

    /// `sum_l w_l z_l^alpha` for an index over this measure's variables.
    pub fn moment(&self, alpha: &MultiIndex) -> T {
        self.atoms
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (z, &w)| acc + w * alpha.eval(z))
    }

    /// Atoms (with their weights) sorted lexicographically descending by
    /// coordinates: the canonical atom order.
    pub fn sorted(&self) -> Self {
        let mut pairs: Vec<(Vec<T>, T)> = self
            .atoms
            .iter()
            .cloned()
            .zip(self.weights.iter().copied())
            .collect();
        pairs.sort_by(|a, b| cmp_points_desc(&a.0, &b.0));
        let (atoms, weights) = pairs.into_iter().unzip();
        AtomicMeasure {
            variables: self.variables.clone(),
            atoms,
            weights,
        }
    }

    /// Same atoms and weights, attached to a different variable list.
    pub fn relabeled(&self, variables: Vec<usize>) -> Result<Self> {
        Self::new(variables, self.atoms.clone(), self.weights.clone())
    }

    /// Index of the first atom within `tol` of `x` in the max norm.
    pub fn find_atom(&self, x: &[T], tol: T) -> Option<usize> {
        self.atoms.iter().position(|z| inf_dist(z, x) <= tol)
    }

    pub fn to_f64(&self) -> AtomicMeasure<f64> {
        AtomicMeasure {
            variables: self.variables.clone(),
            atoms: self
                .atoms
                .iter()
                .map(|z| z.iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
            weights: self.weights.iter().map(|w| w.to_f64_lossy()).collect(),
        }
    }

    pub fn to_json(&self) -> MeasureJson {
        let m = self.to_f64();
        MeasureJson {
            variables: m.variables.iter().map(|v| v + 1).collect(),
            atoms: m.atoms,
            weights: m.weights,
        }
    }

    pub fn from_json(j: &MeasureJson) -> Result<Self> {
        if j.variables.contains(&0) {
            return Err(Error::Invalid("measure variables are 1-based".into()));
        }
        Self::new(
            j.variables.iter().map(|v| v - 1).collect(),
            j.atoms
                .iter()
                .map(|z| z.iter().map(|&v| T::of(v)).collect())
                .collect(),
            j.weights.iter().map(|&w| T::of(w)).collect(),
        )
    }
}

/// Wire form of a measure: 1-based variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub variables: Vec<usize>,
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

pub(crate) fn inf_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

pub(crate) fn cmp_points_desc<T: Real>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.partial_cmp(x) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// Whether two point sets agree up to `tol` in the max norm, ignoring order.
pub fn same_point_set<T: Real>(a: &[Vec<T>], b: &[Vec<T>], tol: T) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| inf_dist(x, y) <= tol))
        && b.iter().all(|y| a.iter().any(|x| inf_dist(x, y) <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_descending_lex() {
        let mu = AtomicMeasure::new(
            vec![0, 1, 2],
            vec![
                vec![-1.0, 0.0, -1.0],
                vec![1.0, 0.0, -1.0],
                vec![-1.0, 0.0, 1.0],
                vec![1.0, 0.0, 1.0],
            ],
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap()
        .sorted();
        assert_eq!(
            mu.atoms(),
            &[
                vec![1.0, 0.0, 1.0],
                vec![1.0, 0.0, -1.0],
                vec![-1.0, 0.0, 1.0],
                vec![-1.0, 0.0, -1.0],
            ]
        );
        assert_eq!(mu.weights(), &[0.4, 0.2, 0.3, 0.1]);
    }

    #[test]
    fn moments_and_json() {
        let mu = AtomicMeasure::new(vec![0, 1], vec![vec![1.0, 2.0]], vec![0.5]).unwrap();
        assert_eq!(mu.moment(&MultiIndex::new(vec![1, 2])), 2.0);
        let j = mu.to_json();
        assert_eq!(j.variables, vec![1, 2]);
        assert_eq!(AtomicMeasure::<f64>::from_json(&j).unwrap(), mu);
        assert!(AtomicMeasure::<f64>::new(vec![0], vec![vec![1.0, 2.0]], vec![1.0]).is_err());
    }
}
