//! Worked instances: a two-clique chain on three variables, a three-clique
//! chain POP on four variables, and a triangle cover that has no
//! running-intersection order. Used by tests and the acceptance suite.

use crate::cover::CliqueCover;
use crate::index::MultiIndex;
use crate::matrices::ConstraintPolynomial;
use crate::measure::AtomicMeasure;
use crate::moments::{Polynomial, SparseMomentVector};
use crate::relax::{LabeledBlock, PopProblem};
use crate::scalar::Real;

fn entries<T: Real>(list: &[([u32; 3], f64)]) -> Vec<(MultiIndex, T)> {
    list.iter()
        .map(|(a, v)| (MultiIndex::new(a.to_vec()), T::of(*v)))
        .collect()
}

/// Cover `{1,2}, {2,3}` on three variables.
pub fn chain_cover() -> CliqueCover {
    CliqueCover::from_one_based(3, vec![vec![1, 2], vec![2, 3]]).expect("valid cover")
}

/// The 25-entry order-2 moment vector on the chain cover, entry by entry.
pub fn example_chain_y<T: Real>() -> SparseMomentVector<T> {
    #[rustfmt::skip]
    let list = [
        ([0, 0, 0], 1.0), ([1, 0, 0], 0.0), ([0, 1, 0], 0.0), ([0, 0, 1], 0.0), ([2, 0, 0], 1.0),
        ([1, 1, 0], 0.0), ([0, 2, 0], 0.0), ([0, 1, 1], 0.0), ([0, 0, 2], 1.0), ([3, 0, 0], 0.0),
        ([2, 1, 0], 0.0), ([1, 2, 0], 0.0), ([0, 3, 0], 0.0), ([0, 2, 1], 0.0), ([0, 1, 2], 0.0),
        ([0, 0, 3], 0.0), ([4, 0, 0], 1.0), ([3, 1, 0], 0.0), ([2, 2, 0], 0.0), ([1, 3, 0], 0.0),
        ([0, 4, 0], 0.0), ([0, 3, 1], 0.0), ([0, 2, 2], 0.0), ([0, 1, 3], 0.0), ([0, 0, 4], 1.0),
    ];
    SparseMomentVector::from_entries(chain_cover(), 2, entries(&list), false)
        .expect("fixture is complete")
}

/// `lambda d(1,0,1) + (1/2 - lambda) d(1,0,-1) + (1/2 - lambda) d(-1,0,1) + lambda d(-1,0,-1)`,
/// a representing measure of [`example_chain_y`] for every `lambda` in `[0, 1/2]`.
pub fn chain_mu_lambda<T: Real>(lambda: T) -> AtomicMeasure<T> {
    let half = T::of(0.5);
    let one = T::one();
    let zero = T::zero();
    AtomicMeasure::new(
        vec![0, 1, 2],
        vec![
            vec![one, zero, one],
            vec![one, zero, -one],
            vec![-one, zero, one],
            vec![-one, zero, -one],
        ],
        vec![lambda, half - lambda, half - lambda, lambda],
    )
    .expect("well-formed measure")
}

/// Cover `{1,2}, {2,3}, {1,3}` on three variables.
pub fn triangle_cover() -> CliqueCover {
    CliqueCover::from_one_based(3, vec![vec![1, 2], vec![2, 3], vec![1, 3]]).expect("valid cover")
}

/// The 31-entry order-2 moment vector on the triangle cover.
pub fn example_triangle_y<T: Real>() -> SparseMomentVector<T> {
    #[rustfmt::skip]
    let list = [
        ([0, 0, 0], 1.0),
        ([1, 0, 0], 0.0), ([0, 1, 0], 0.0), ([0, 0, 1], 0.0), ([2, 0, 0], 1.0), ([1, 1, 0], 1.0),
        ([0, 2, 0], 1.0), ([1, 0, 1], -1.0), ([0, 1, 1], 1.0), ([0, 0, 2], 1.0), ([3, 0, 0], 0.0),
        ([2, 1, 0], 0.0), ([1, 2, 0], 0.0), ([0, 3, 0], 0.0), ([2, 0, 1], 0.0), ([0, 2, 1], 0.0),
        ([1, 0, 2], 0.0), ([0, 1, 2], 0.0), ([0, 0, 3], 0.0), ([4, 0, 0], 1.0), ([3, 1, 0], 1.0),
        ([2, 2, 0], 1.0), ([1, 3, 0], 1.0), ([0, 4, 0], 1.0), ([3, 0, 1], -1.0), ([0, 3, 1], 1.0),
        ([2, 0, 2], 1.0), ([0, 2, 2], 1.0), ([1, 0, 3], -1.0), ([0, 1, 3], 1.0), ([0, 0, 4], 1.0),
    ];
    SparseMomentVector::from_entries(triangle_cover(), 2, entries(&list), false)
        .expect("fixture is complete")
}

/// Cover `{1,2}, {2,3}, {3,4}` on four variables.
pub fn pop_cover() -> CliqueCover {
    CliqueCover::from_one_based(4, vec![vec![1, 2], vec![2, 3], vec![3, 4]]).expect("valid cover")
}

fn local_poly<T: Real>(terms: &[([u32; 2], f64)]) -> Polynomial<T> {
    Polynomial::from_terms(
        2,
        terms
            .iter()
            .map(|(a, c)| (MultiIndex::new(a.to_vec()), T::of(*c))),
    )
}

/// Minimize `(x1^2-1)^2 + (x2^2-1)^2 + x3^2 + (x4^2-1)^2` subject to
/// `3 - x1^2 - x2^2 >= 0`, `3 - x2^2 - x3^2 >= 0`, `3 - x3^2 - x4^2 >= 0`.
pub fn example_pop<T: Real>() -> PopProblem<T> {
    let ball = || local_poly::<T>(&[([0, 0], 3.0), ([2, 0], -1.0), ([0, 2], -1.0)]);
    let objectives = vec![
        local_poly(&[
            ([4, 0], 1.0),
            ([2, 0], -2.0),
            ([0, 4], 1.0),
            ([0, 2], -2.0),
            ([0, 0], 2.0),
        ]),
        local_poly(&[([0, 2], 1.0)]),
        local_poly(&[([0, 4], 1.0), ([0, 2], -2.0), ([0, 0], 1.0)]),
    ];
    let constraints = (0..3)
        .map(|i| vec![ConstraintPolynomial::new(i, ball())])
        .collect();
    PopProblem::new(pop_cover(), objectives, constraints).expect("valid problem")
}

/// The eight global minimizers of [`example_pop`].
pub fn example_pop_minimizers() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 1.0, 0.0, 1.0],
        vec![1.0, 1.0, 0.0, -1.0],
        vec![1.0, -1.0, 0.0, 1.0],
        vec![1.0, -1.0, 0.0, -1.0],
        vec![-1.0, -1.0, 0.0, 1.0],
        vec![-1.0, -1.0, 0.0, -1.0],
        vec![-1.0, 1.0, 0.0, 1.0],
        vec![-1.0, 1.0, 0.0, -1.0],
    ]
}

/// Row/column labels of the published order-3 clique moment matrices:
/// local exponents sorted lexicographically ascending.
pub fn published_labels() -> Vec<MultiIndex> {
    [
        [0, 0],
        [0, 1],
        [0, 2],
        [0, 3],
        [1, 0],
        [1, 1],
        [1, 2],
        [2, 0],
        [2, 1],
        [3, 0],
    ]
    .iter()
    .map(|a| MultiIndex::new(a.to_vec()))
    .collect()
}

#[rustfmt::skip]
const PUBLISHED_M1: [[f64; 10]; 10] = [
    [1., 0., 1., 0., 0., 0., 0., 1., 0., 0.],
    [0., 1., 0., 1., 0., 0., 0., 0., 1., 0.],
    [1., 0., 1., 0., 0., 0., 0., 1., 0., 0.],
    [0., 1., 0., 1., 0., 0., 0., 0., 1., 0.],
    [0., 0., 0., 0., 1., 0., 1., 0., 0., 1.],
    [0., 0., 0., 0., 0., 1., 0., 0., 0., 0.],
    [0., 0., 0., 0., 1., 0., 1., 0., 0., 1.],
    [1., 0., 1., 0., 0., 0., 0., 1., 0., 0.],
    [0., 1., 0., 1., 0., 0., 0., 0., 1., 0.],
    [0., 0., 0., 0., 1., 0., 1., 0., 0., 1.],
];

#[rustfmt::skip]
const PUBLISHED_M2: [[f64; 10]; 10] = [
    [1., 0., 0., 0., 0., 0., 0., 1., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 1., 0., 0., 0., 0., 1.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [1., 0., 0., 0., 0., 0., 0., 1., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 1., 0., 0., 0., 0., 1.],
];

#[rustfmt::skip]
const PUBLISHED_M3: [[f64; 10]; 10] = [
    [1., 0., 1., 0., 0., 0., 0., 0., 0., 0.],
    [0., 1., 0., 1., 0., 0., 0., 0., 0., 0.],
    [1., 0., 1., 0., 0., 0., 0., 0., 0., 0.],
    [0., 1., 0., 1., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
];

/// The three published (rounded) order-3 clique moment matrices of the
/// four-variable POP, with their labels.
pub fn published_pop_matrices<T: Real>() -> Vec<LabeledBlock<T>> {
    [PUBLISHED_M1, PUBLISHED_M2, PUBLISHED_M3]
        .iter()
        .enumerate()
        .map(|(clique, m)| LabeledBlock {
            clique,
            labels: published_labels(),
            rows: m
                .iter()
                .map(|r| r.iter().map(|&v| T::of(v)).collect())
                .collect(),
        })
        .collect()
}
