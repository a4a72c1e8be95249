//! Alternative representing measures on a fixed atom set: weight vectors
//! from a linear program over the moment equations.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::linalg::select_independent_rows;
use crate::measure::{cmp_points_desc, inf_dist};
use crate::moments::SparseMomentVector;
use crate::scalar::Real;
use crate::simplex::{self, LpOutcome};

const ROW_TOL: f64 = 1e-9;

/// `sum_i gamma_i x_i^alpha = y_alpha` for every index of `y`, `gamma >= 0`,
/// reduced to linearly independent rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightLp<T: Real> {
    atoms: Vec<Vec<T>>,
    /// Every moment equation, before reduction.
    full: DMatrix<T>,
    rhs: DVector<T>,
    /// Indices of the rows kept after reduction.
    kept: Vec<usize>,
    rows: Vec<MultiIndex>,
    y_scale: T,
}

impl<T: Real> WeightLp<T> {
    pub fn new(atoms: &[Vec<T>], y: &SparseMomentVector<T>) -> Result<Self> {
        let n = y.cover().n();
        if let Some(a) = atoms.iter().find(|a| a.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.len(),
            });
        }
        let rows: Vec<MultiIndex> = y.iter().map(|(a, _)| a.clone()).collect();
        let full = DMatrix::from_fn(rows.len(), atoms.len(), |i, j| rows[i].eval(&atoms[j]));
        let rhs = DVector::from_iterator(rows.len(), y.iter().map(|(_, v)| v));
        // The mass row goes first so it always survives the reduction.
        let group: Vec<u32> = rows.iter().map(|a| u32::from(!a.is_zero())).collect();
        let scale = full.iter().fold(T::one(), |m, v| m.max(v.abs()));
        let mut kept = select_independent_rows(&full, &group, T::of(ROW_TOL) * scale, atoms.len());
        kept.sort_unstable();
        Ok(WeightLp {
            atoms: atoms.to_vec(),
            full,
            rhs,
            kept,
            rows,
            y_scale: y.max_abs(),
        })
    }

    pub fn atoms(&self) -> &[Vec<T>] {
        &self.atoms
    }

    /// Moment indices of the independent rows.
    pub fn reduced_rows(&self) -> Vec<&MultiIndex> {
        self.kept.iter().map(|&i| &self.rows[i]).collect()
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    /// Largest violation of the full moment equations.
    pub fn residual(&self, gamma: &[T]) -> T {
        let g = DVector::from_column_slice(gamma);
        (&self.full * g - &self.rhs)
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// A basic optimal solution of `min cost'gamma`.
    pub fn solve(&self, cost: &[T], tol: T) -> Result<Vec<T>> {
        let r = self.atoms.len();
        if cost.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: cost.len(),
            });
        }
        let a = DMatrix::from_fn(self.kept.len(), r, |i, j| self.full[(self.kept[i], j)]);
        let b = DVector::from_fn(self.kept.len(), |i, _| self.rhs[self.kept[i]]);
        let c = DVector::from_column_slice(cost);
        let gamma: Vec<T> = match simplex::solve(&a, &b, &c, tol) {
            LpOutcome::Optimal { x, .. } => x.iter().copied().collect(),
            LpOutcome::Infeasible {
                phase_one_objective,
            } => {
                return Err(Error::Infeasible {
                    residual: phase_one_objective.to_f64_lossy(),
                })
            }
            LpOutcome::Unbounded => {
                return Err(Error::Invalid("weight program reported unbounded".into()))
            }
            LpOutcome::Stalled => return Err(Error::Invalid("simplex did not terminate".into())),
        };
        let residual = self.residual(&gamma);
        if residual > T::of(1e-8) * (T::one() + self.y_scale) {
            return Err(Error::Infeasible {
                residual: residual.to_f64_lossy(),
            });
        }
        Ok(gamma)
    }
}

/// A vertex of `{gamma >= 0 : sum_i gamma_i [x_i] = y}` minimizing `cost`.
pub fn solve_weight_lp<T: Real>(
    atoms: &[Vec<T>],
    y: &SparseMomentVector<T>,
    cost: &[T],
    tol: T,
) -> Result<Vec<T>> {
    WeightLp::new(atoms, y)?.solve(cost, tol)
}

/// Distinct vertices found by minimizing `budget` seeded random costs,
/// in canonical order.
pub fn enumerate_extreme_measures<T: Real>(
    atoms: &[Vec<T>],
    y: &SparseMomentVector<T>,
    budget: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    let lp = WeightLp::new(atoms, y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dedup_tol = T::of(1e-8) * (T::one() + y.mass().abs());
    let mut found: Vec<Vec<T>> = Vec::new();
    for _ in 0..budget {
        let cost: Vec<T> = (0..atoms.len())
            .map(|_| T::of(rng.random_range(-1.0..1.0)))
            .collect();
        let gamma = lp.solve(&cost, T::of(1e-12))?;
        if !found.iter().any(|g| inf_dist(g, &gamma) <= dedup_tol) {
            found.push(gamma);
        }
    }
    found.sort_by(|a, b| cmp_points_desc(a, b));
    Ok(found)
}
