//! Sparse moment relaxations of polynomial optimization problems: building
//! the semidefinite program, exchanging it in SDPA format, solving it with a
//! bundled first-order method and running the full certification pipeline.

mod ingest;
mod pipeline;
mod sdpa;
mod solver;

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::certify::d_half;
use crate::cover::CliqueCover;
use crate::error::{Error, Result};
use crate::index::{local_exponents, sparse_exponents, MultiIndex};
use crate::matrices::ConstraintPolynomial;
use crate::moments::{Polynomial, SparseMomentVector};
use crate::scalar::Real;

pub use ingest::{ingest_blocks, ingest_primal, parse_primal_vector, IngestReport};
pub use pipeline::{pipeline, PipelineOptions, PipelineReport, SolutionSource};
pub use sdpa::{emit_sdpa, parse_sdpa};
pub use solver::{solve_sdp_bundled, SolveReport, SolveStatus, SolverOptions, SolverSource};

/// `min sum_i f_i(x_{clique i})` subject to `g >= 0` for every constraint of
/// every clique. Objectives and constraints are written in their clique's
/// local variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PopProblem<T: Real> {
    cover: CliqueCover,
    objectives: Vec<Polynomial<T>>,
    constraints: Vec<Vec<ConstraintPolynomial<T>>>,
}

impl<T: Real> PopProblem<T> {
    pub fn new(
        cover: CliqueCover,
        objectives: Vec<Polynomial<T>>,
        constraints: Vec<Vec<ConstraintPolynomial<T>>>,
    ) -> Result<Self> {
        let m = cover.len();
        if objectives.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: objectives.len(),
            });
        }
        let constraints = if constraints.is_empty() {
            vec![Vec::new(); m]
        } else {
            constraints
        };
        if constraints.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: constraints.len(),
            });
        }
        for (i, clique) in cover.cliques().iter().enumerate() {
            if objectives[i].nvars() != clique.len() {
                return Err(Error::Invalid(format!(
                    "objective {} has {} variables, clique has {}",
                    i + 1,
                    objectives[i].nvars(),
                    clique.len()
                )));
            }
            for g in &constraints[i] {
                if g.clique() != i || g.poly().nvars() != clique.len() {
                    return Err(Error::Invalid(format!(
                        "constraint listed under clique {} does not live on it",
                        i + 1
                    )));
                }
            }
        }
        Ok(PopProblem {
            cover,
            objectives,
            constraints,
        })
    }

    pub fn cover(&self) -> &CliqueCover {
        &self.cover
    }

    pub fn objectives(&self) -> &[Polynomial<T>] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[Vec<ConstraintPolynomial<T>>] {
        &self.constraints
    }

    /// Largest degree among objectives and constraints.
    pub fn degree(&self) -> u32 {
        let f = self.objectives.iter().map(|p| p.degree());
        let g = self.constraints.iter().flatten().map(|g| g.degree());
        f.chain(g).max().unwrap_or(0)
    }

    /// `sum_i f_i(x_{clique i})` at a global point.
    pub fn objective_value(&self, x: &[T]) -> T {
        self.cover
            .cliques()
            .iter()
            .zip(&self.objectives)
            .fold(T::zero(), |acc, (c, f)| {
                let local: Vec<T> = c.iter().map(|&v| x[v]).collect();
                acc + f.eval(&local)
            })
    }

    /// Smallest constraint value at a global point (infinity without constraints).
    pub fn min_constraint(&self, x: &[T]) -> T {
        let mut min = T::of(f64::INFINITY);
        for (c, gs) in self.cover.cliques().iter().zip(&self.constraints) {
            let local: Vec<T> = c.iter().map(|&v| x[v]).collect();
            for g in gs {
                min = min.min(g.eval(&local));
            }
        }
        min
    }

    /// Constraints rewritten in all `n` variables.
    pub fn global_constraints(&self) -> Vec<ConstraintPolynomial<T>> {
        let n = self.cover.n();
        self.cover
            .cliques()
            .iter()
            .zip(&self.constraints)
            .enumerate()
            .flat_map(|(i, (c, gs))| {
                gs.iter()
                    .map(move |g| ConstraintPolynomial::new(i, g.poly().lift(c, n)))
            })
            .collect()
    }

    /// The same problem with cliques permuted: position `p` holds clique `perm[p]`.
    pub fn reordered(&self, perm: &[usize]) -> Result<Self> {
        let cover = self.cover.reordered(perm)?;
        let objectives = perm.iter().map(|&i| self.objectives[i].clone()).collect();
        let constraints = perm
            .iter()
            .enumerate()
            .map(|(p, &i)| {
                self.constraints[i]
                    .iter()
                    .map(|g| ConstraintPolynomial::new(p, g.poly().clone()))
                    .collect()
            })
            .collect();
        PopProblem::new(cover, objectives, constraints)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BlockKind {
    Moment { clique: usize },
    Localizing { clique: usize, constraint: usize },
}

/// One PSD block `sum_k y_k F_k`, stored as the upper-triangular nonzeros
/// `(variable, row, col, coefficient)` sorted by variable, then position.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpBlock<T> {
    pub kind: BlockKind,
    pub size: usize,
    pub entries: Vec<(usize, usize, usize, T)>,
}

impl<T: Real> SdpBlock<T> {
    /// The block matrix at variable values `y` (with `y[0] = 1` by convention).
    pub fn eval(&self, y: &[T]) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for &(k, i, j, c) in &self.entries {
            m[(i, j)] += c * y[k];
            if i != j {
                m[(j, i)] += c * y[k];
            }
        }
        m
    }
}

/// The moment relaxation `min <f, y>` over `y_0 = 1` and PSD blocks.
/// Variable `k` is the moment of `variables[k]`; variable 0 is `y_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpInstance<T> {
    pub cover: CliqueCover,
    pub omega: u32,
    pub variables: Vec<MultiIndex>,
    pub objective: Vec<T>,
    pub blocks: Vec<SdpBlock<T>>,
}

impl<T: Real> SdpInstance<T> {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.variables.binary_search(alpha).ok()
    }

    /// Objective at the moment vector `y` (variable order).
    pub fn objective_at(&self, y: &[T]) -> T {
        self.objective
            .iter()
            .zip(y)
            .fold(T::zero(), |acc, (&c, &v)| acc + c * v)
    }

    /// Values in variable order.
    pub fn values_of(&self, y: &SparseMomentVector<T>) -> Result<Vec<T>> {
        self.variables.iter().map(|a| y.value(a)).collect()
    }

    /// Moment vector from values in variable order.
    pub fn moment_vector(&self, values: &[T]) -> Result<SparseMomentVector<T>> {
        if values.len() != self.variables.len() {
            return Err(Error::DimensionMismatch {
                expected: self.variables.len(),
                got: values.len(),
            });
        }
        SparseMomentVector::from_entries(
            self.cover.clone(),
            self.omega,
            self.variables.iter().cloned().zip(values.iter().copied()),
            false,
        )
    }
}

/// A dense labeled moment block as printed by a solver or in a report: rows and
/// columns indexed by local exponents of one clique.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBlock<T> {
    pub clique: usize,
    pub labels: Vec<MultiIndex>,
    pub rows: Vec<Vec<T>>,
}

/// Builds the order-`omega` relaxation: one moment block per clique and one
/// localizing block per constraint polynomial, over the shared sparse
/// moment variables.
pub fn build_relaxation<T: Real>(pop: &PopProblem<T>, omega: u32) -> Result<SdpInstance<T>> {
    let needed = pop.degree().max(1);
    if 2 * omega < needed {
        return Err(Error::DegreeTooLow { omega, needed });
    }
    let cover = pop.cover().clone();
    let n = cover.n();
    let variables = sparse_exponents(&cover, 2 * omega);
    let index: BTreeMap<&MultiIndex, usize> =
        variables.iter().enumerate().map(|(k, a)| (a, k)).collect();
    let lookup = |a: &MultiIndex| -> Result<usize> {
        index
            .get(a)
            .copied()
            .ok_or_else(|| Error::IndexOutOfPattern {
                alpha: a.exponents().to_vec(),
                bound: 2 * omega,
            })
    };

    let mut objective = vec![T::zero(); variables.len()];
    for (clique, f) in cover.cliques().iter().zip(pop.objectives()) {
        for (a, c) in f.terms() {
            objective[lookup(&a.lift(clique, n))?] += c;
        }
    }

    let block = |kind: BlockKind,
                 clique: &[usize],
                 labels: &[MultiIndex],
                 weight: &[(MultiIndex, T)]|
     -> Result<SdpBlock<T>> {
        let mut acc: BTreeMap<(usize, usize, usize), T> = BTreeMap::new();
        for i in 0..labels.len() {
            for j in i..labels.len() {
                let ab = labels[i].add(&labels[j]);
                for (gamma, c) in weight {
                    let k = lookup(&ab.add(gamma).lift(clique, n))?;
                    *acc.entry((k, i, j)).or_insert_with(T::zero) += *c;
                }
            }
        }
        Ok(SdpBlock {
            kind,
            size: labels.len(),
            entries: acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|((k, i, j), c)| (k, i, j, c))
                .collect(),
        })
    };

    let mut blocks = Vec::new();
    for (i, clique) in cover.cliques().iter().enumerate() {
        let labels = local_exponents(clique.len(), omega);
        let one = [(MultiIndex::zeros(clique.len()), T::one())];
        blocks.push(block(
            BlockKind::Moment { clique: i },
            clique,
            &labels,
            &one,
        )?);
    }
    for (i, clique) in cover.cliques().iter().enumerate() {
        let gs = &pop.constraints()[i];
        if gs.is_empty() {
            continue;
        }
        let shift = d_half(gs);
        let labels = local_exponents(clique.len(), omega - shift);
        for (t, g) in gs.iter().enumerate() {
            let weight: Vec<(MultiIndex, T)> =
                g.poly().terms().map(|(a, c)| (a.clone(), c)).collect();
            blocks.push(block(
                BlockKind::Localizing {
                    clique: i,
                    constraint: t,
                },
                clique,
                &labels,
                &weight,
            )?);
        }
    }
    Ok(SdpInstance {
        cover,
        omega,
        variables,
        objective,
        blocks,
    })
}
