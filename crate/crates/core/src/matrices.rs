//! Moment, localizing and overlap moment matrices.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::index::{local_exponents, MultiIndex};
use crate::moments::{CliqueSubvector, Polynomial, SparseMomentVector};
use crate::scalar::Real;

/// Symmetric matrix whose rows and columns are labeled by local monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSymMatrix<T: Real> {
    labels: Vec<MultiIndex>,
    data: DMatrix<T>,
}

impl<T: Real> LabeledSymMatrix<T> {
    /// Builds the matrix with entry `(a, b) = f(label_a, label_b)`, evaluated
    /// once per unordered pair.
    pub fn from_fn(
        labels: Vec<MultiIndex>,
        mut f: impl FnMut(&MultiIndex, &MultiIndex) -> Result<T>,
    ) -> Result<Self> {
        let k = labels.len();
        let mut data = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let v = f(&labels[a], &labels[b])?;
                data[(a, b)] = v;
                data[(b, a)] = v;
            }
        }
        Ok(LabeledSymMatrix { labels, data })
    }

    /// Wraps explicit data; the upper triangle is mirrored to the lower one.
    pub fn from_data(labels: Vec<MultiIndex>, data: DMatrix<T>) -> Result<Self> {
        if data.nrows() != labels.len() || data.ncols() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: data.nrows(),
            });
        }
        let mut data = data;
        for a in 0..labels.len() {
            for b in 0..a {
                data[(a, b)] = data[(b, a)];
            }
        }
        Ok(LabeledSymMatrix { labels, data })
    }

    pub fn labels(&self) -> &[MultiIndex] {
        &self.labels
    }

    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, a: usize, b: usize) -> T {
        self.data[(a, b)]
    }

    /// The principal submatrix on labels of degree at most `d`.
    pub fn leading(&self, d: u32) -> LabeledSymMatrix<T> {
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&i| self.labels[i].degree() <= d)
            .collect();
        self.principal(&keep)
    }

    /// The principal submatrix on the given positions.
    pub fn principal(&self, keep: &[usize]) -> LabeledSymMatrix<T> {
        let data = DMatrix::from_fn(keep.len(), keep.len(), |a, b| self.data[(keep[a], keep[b])]);
        LabeledSymMatrix {
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            data,
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> LabeledSymMatrix<T> {
        LabeledSymMatrix {
            labels: self.labels.clone(),
            data: self.data.map(f),
        }
    }

    /// CSV dump with the exponent labels as header row and first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (a, l) in self.labels.iter().enumerate() {
            let _ = write!(out, "{l}");
            for b in 0..self.dim() {
                let _ = write!(out, ",{}", self.data[(a, b)]);
            }
            out.push('\n');
        }
        out
    }
}

/// Block-diagonal matrix kept as its blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal<T: Real> {
    pub blocks: Vec<LabeledSymMatrix<T>>,
}

impl<T: Real> BlockDiagonal<T> {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(LabeledSymMatrix::dim).sum()
    }

    /// Every block PSD; true for zero blocks.
    pub fn is_psd(&self, policy: &crate::certify::RankPolicy<T>) -> bool {
        self.blocks
            .iter()
            .all(|b| crate::certify::psd_check(b, policy))
    }

    pub fn dense(&self) -> DMatrix<T> {
        let k = self.dim();
        let mut out = DMatrix::zeros(k, k);
        let mut off = 0;
        for b in &self.blocks {
            let d = b.dim();
            out.view_mut((off, off), (d, d)).copy_from(b.data());
            off += d;
        }
        out
    }
}

/// One entry `g_{i,j}` of a clique's constraint vector, in the clique's local
/// variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintPolynomial<T: Real> {
    clique: usize,
    poly: Polynomial<T>,
}

impl<T: Real> ConstraintPolynomial<T> {
    /// `clique` is the 0-based index of the clique the polynomial lives on.
    pub fn new(clique: usize, poly: Polynomial<T>) -> Self {
        ConstraintPolynomial { clique, poly }
    }

    pub fn clique(&self) -> usize {
        self.clique
    }

    pub fn poly(&self) -> &Polynomial<T> {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    /// `max(1, ceil(deg / 2))`.
    pub fn d_half(&self) -> u32 {
        self.degree().div_ceil(2).max(1)
    }

    pub fn eval(&self, z: &[T]) -> T {
        self.poly.eval(z)
    }
}

/// Moment matrix of order `d`: entry `(alpha, beta)` is `y[alpha + beta]`.
pub fn moment_matrix<T: Real>(y_sub: &CliqueSubvector<T>, d: u32) -> Result<LabeledSymMatrix<T>> {
    if d > y_sub.omega() {
        return Err(Error::OrderTooHigh {
            order: d,
            needed: 2 * d,
            available: 2 * y_sub.omega(),
        });
    }
    let labels = local_exponents(y_sub.nvars(), d);
    LabeledSymMatrix::from_fn(labels, |a, b| y_sub.value(&a.add(b)))
}

/// Localizing matrix of order `d` for one constraint polynomial, with labels
/// of degree at most `d - g.d_half()`.
pub fn localizing_matrix<T: Real>(
    y_sub: &CliqueSubvector<T>,
    g: &ConstraintPolynomial<T>,
    d: u32,
) -> Result<LabeledSymMatrix<T>> {
    localizing_with_shift(y_sub, g, d, g.d_half())
}

pub(crate) fn localizing_with_shift<T: Real>(
    y_sub: &CliqueSubvector<T>,
    g: &ConstraintPolynomial<T>,
    d: u32,
    shift: u32,
) -> Result<LabeledSymMatrix<T>> {
    if d < shift {
        return Err(Error::BelowConstraintOrder {
            order: d,
            d_half: shift,
        });
    }
    if g.poly().nvars() != y_sub.nvars() {
        return Err(Error::DimensionMismatch {
            expected: y_sub.nvars(),
            got: g.poly().nvars(),
        });
    }
    let labels = local_exponents(y_sub.nvars(), d - shift);
    let terms: Vec<(MultiIndex, T)> = g.poly().terms().map(|(a, c)| (a.clone(), c)).collect();
    LabeledSymMatrix::from_fn(labels, |a, b| {
        let ab = a.add(b);
        let mut acc = T::zero();
        for (gamma, c) in &terms {
            acc += *c * y_sub.value(&ab.add(gamma))?;
        }
        Ok(acc)
    })
}

/// Block-diagonal localizing matrix of a clique's constraint list. Every
/// block uses the clique-level shift `max(1, ceil(max deg / 2))`.
pub fn localizing_block<T: Real>(
    y_sub: &CliqueSubvector<T>,
    constraints: &[ConstraintPolynomial<T>],
    d: u32,
) -> Result<BlockDiagonal<T>> {
    let shift = crate::certify::d_half(constraints);
    let blocks = constraints
        .iter()
        .map(|g| localizing_with_shift(y_sub, g, d, shift))
        .collect::<Result<_>>()?;
    Ok(BlockDiagonal { blocks })
}

/// Moment matrix of order `d` on the variables shared by cliques `i` and `j`.
/// An empty intersection gives the 1x1 matrix `[y_0]`.
pub fn overlap_moment_matrix<T: Real>(
    y: &SparseMomentVector<T>,
    i: usize,
    j: usize,
    d: u32,
) -> Result<LabeledSymMatrix<T>> {
    let vars = y.cover().intersection(i, j)?;
    if d > y.omega() {
        return Err(Error::OrderTooHigh {
            order: d,
            needed: 2 * d,
            available: 2 * y.omega(),
        });
    }
    if vars.is_empty() {
        return LabeledSymMatrix::from_data(
            vec![MultiIndex::new(Vec::new())],
            DMatrix::from_element(1, 1, y.mass()),
        );
    }
    moment_matrix(&y.subvector_on(&vars)?, d)
}
