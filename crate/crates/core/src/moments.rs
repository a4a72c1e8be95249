//! Sparse moment vectors, clique subvectors and the Riesz functional.

use std::collections::BTreeMap;

use crate::cover::{is_subset_sorted, CliqueCover};
use crate::error::{Error, Result};
use crate::index::{local_exponents, sparse_exponents, MultiIndex};
use crate::measure::AtomicMeasure;
use crate::scalar::Real;

/// Polynomial as a map from exponent vectors to coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    nvars: usize,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Real> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        Self::from_terms(nvars, [(MultiIndex::zeros(nvars), c)])
    }

    /// Repeated monomials are summed; zero coefficients are dropped.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (MultiIndex, T)>) -> Self {
        let mut map: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (alpha, c) in terms {
            assert_eq!(alpha.len(), nvars, "term arity does not match polynomial");
            *map.entry(alpha).or_insert_with(T::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Polynomial { nvars, terms: map }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, T)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> T {
        self.terms.get(alpha).copied().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, (a, &c)| acc + c * a.eval(x))
    }

    /// Rewrites a polynomial in the variables `vars` as one in `n` variables.
    pub fn lift(&self, vars: &[usize], n: usize) -> Polynomial<T> {
        Polynomial::from_terms(n, self.terms.iter().map(|(a, &c)| (a.lift(vars, n), c)))
    }

    pub fn scale(&self, s: T) -> Polynomial<T> {
        Polynomial::from_terms(
            self.nvars,
            self.terms.iter().map(|(a, &c)| (a.clone(), c * s)),
        )
    }

    pub fn add(&self, other: &Polynomial<T>) -> Polynomial<T> {
        assert_eq!(self.nvars, other.nvars);
        Polynomial::from_terms(
            self.nvars,
            self.terms()
                .chain(other.terms())
                .map(|(a, c)| (a.clone(), c)),
        )
    }
}

/// Moment vector indexed exactly by the correlatively sparse multi-indices
/// of degree at most `2 * omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMomentVector<T> {
    cover: CliqueCover,
    omega: u32,
    entries: BTreeMap<MultiIndex, T>,
}

impl<T: Real> SparseMomentVector<T> {
    /// Builds the vector from `(alpha, value)` pairs in any order.
    ///
    /// Duplicate keys and indices outside the sparse pattern are errors.
    /// Omitted indices are errors unless `allow_missing_as_zero` is set.
    pub fn from_entries(
        cover: CliqueCover,
        omega: u32,
        entries: impl IntoIterator<Item = (MultiIndex, T)>,
        allow_missing_as_zero: bool,
    ) -> Result<Self> {
        if omega == 0 {
            return Err(Error::Invalid("relaxation order must be at least 1".into()));
        }
        let n = cover.n();
        let bound = 2 * omega;
        let mut map = BTreeMap::new();
        for (alpha, v) in entries {
            if alpha.len() != n {
                return Err(Error::WrongArity {
                    got: alpha.len(),
                    expected: n,
                    alpha: alpha.into_exponents(),
                });
            }
            if !in_pattern(&cover, &alpha, bound) {
                return Err(Error::IndexOutOfPattern {
                    alpha: alpha.into_exponents(),
                    bound,
                });
            }
            if map.contains_key(&alpha) {
                return Err(Error::DuplicateEntry {
                    alpha: alpha.into_exponents(),
                });
            }
            map.insert(alpha, v);
        }
        for alpha in sparse_exponents(&cover, bound) {
            if let std::collections::btree_map::Entry::Vacant(slot) = map.entry(alpha) {
                if !allow_missing_as_zero {
                    return Err(Error::MissingEntry {
                        alpha: slot.into_key().into_exponents(),
                    });
                }
                slot.insert(T::zero());
            }
        }
        Ok(SparseMomentVector {
            cover,
            omega,
            entries: map,
        })
    }

    /// Fills every sparse index with `f(alpha)`.
    pub fn from_fn(cover: CliqueCover, omega: u32, f: impl Fn(&MultiIndex) -> T) -> Result<Self> {
        let idx = sparse_exponents(&cover, 2 * omega);
        let entries: Vec<_> = idx
            .into_iter()
            .map(|a| {
                let v = f(&a);
                (a, v)
            })
            .collect();
        Self::from_entries(cover, omega, entries, false)
    }

    pub fn zeros(cover: CliqueCover, omega: u32) -> Result<Self> {
        Self::from_fn(cover, omega, |_| T::zero())
    }

    /// Moments of an atomic measure on all `n` variables.
    pub fn from_measure(cover: CliqueCover, omega: u32, mu: &AtomicMeasure<T>) -> Result<Self> {
        let n = cover.n();
        if mu.variables() != (0..n).collect::<Vec<_>>().as_slice() {
            return Err(Error::Invalid(
                "measure must be defined on every variable of the cover".into(),
            ));
        }
        Self::from_fn(cover, omega, |alpha| mu.moment(alpha))
    }

    pub fn cover(&self) -> &CliqueCover {
        &self.cover
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<T> {
        self.entries.get(alpha).copied()
    }

    pub fn value(&self, alpha: &MultiIndex) -> Result<T> {
        self.get(alpha).ok_or_else(|| Error::IndexOutOfPattern {
            alpha: alpha.exponents().to_vec(),
            bound: 2 * self.omega,
        })
    }

    /// Entries in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, T)> {
        self.entries.iter().map(|(a, &v)| (a, v))
    }

    pub fn values(&self) -> Vec<T> {
        self.entries.values().copied().collect()
    }

    /// The mass `y_0`.
    pub fn mass(&self) -> T {
        self.entries[&MultiIndex::zeros(self.cover.n())]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| v.is_zero())
    }

    pub fn max_abs(&self) -> T {
        self.entries.values().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Applies `f` to every entry.
    pub fn map_values(&self, f: impl Fn(&MultiIndex, T) -> T) -> Self {
        SparseMomentVector {
            cover: self.cover.clone(),
            omega: self.omega,
            entries: self
                .entries
                .iter()
                .map(|(a, &v)| (a.clone(), f(a, v)))
                .collect(),
        }
    }

    pub fn rounded(&self, decimals: u32) -> Self {
        self.map_values(|_, v| v.round_to(decimals))
    }

    /// The same entries viewed under another cover with the same index set
    /// (typically a reordering of the cliques).
    pub fn with_cover(&self, cover: CliqueCover) -> Result<Self> {
        let idx = sparse_exponents(&cover, 2 * self.omega);
        if cover.n() != self.cover.n()
            || idx.len() != self.entries.len()
            || idx.iter().any(|a| !self.entries.contains_key(a))
        {
            return Err(Error::Invalid(
                "new cover does not induce the same sparse index set".into(),
            ));
        }
        Ok(SparseMomentVector {
            cover,
            omega: self.omega,
            entries: self.entries.clone(),
        })
    }

    /// Dense restriction to the clique `i`, in local variables.
    pub fn clique_subvector(&self, i: usize) -> Result<CliqueSubvector<T>> {
        let clique = self.cover.clique(i)?.to_vec();
        self.subvector_on(&clique)
    }

    /// Dense restriction to any variable set contained in some clique.
    pub fn subvector_on(&self, vars: &[usize]) -> Result<CliqueSubvector<T>> {
        if !self
            .cover
            .cliques()
            .iter()
            .any(|c| is_subset_sorted(vars, c))
        {
            return Err(Error::Invalid(format!(
                "variables {vars:?} are not contained in a single clique"
            )));
        }
        let n = self.cover.n();
        let values = local_exponents(vars.len(), 2 * self.omega)
            .into_iter()
            .map(|local| {
                let v = self.entries[&local.lift(vars, n)];
                (local, v)
            })
            .collect();
        Ok(CliqueSubvector {
            clique: vars.to_vec(),
            omega: self.omega,
            values,
        })
    }
}

fn in_pattern(cover: &CliqueCover, alpha: &MultiIndex, bound: u32) -> bool {
    alpha.degree() <= bound && cover.cliques().iter().any(|c| alpha.is_supported_on(c))
}

/// Evaluates the Riesz functional `L_y(p) = sum_alpha p_alpha y_alpha`.
pub fn riesz_eval<T: Real>(y: &SparseMomentVector<T>, poly: &Polynomial<T>) -> Result<T> {
    if poly.nvars() != y.cover().n() {
        return Err(Error::DimensionMismatch {
            expected: y.cover().n(),
            got: poly.nvars(),
        });
    }
    let mut acc = T::zero();
    for (alpha, c) in poly.terms() {
        acc += c * y.value(alpha)?;
    }
    Ok(acc)
}

/// Dense moment data on a variable set, indexed by local multi-indices of
/// degree at most `2 * omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueSubvector<T> {
    clique: Vec<usize>,
    omega: u32,
    values: BTreeMap<MultiIndex, T>,
}

impl<T: Real> CliqueSubvector<T> {
    /// Builds a subvector from a closure over local multi-indices.
    pub fn from_fn(clique: Vec<usize>, omega: u32, f: impl Fn(&MultiIndex) -> T) -> Self {
        let values = local_exponents(clique.len(), 2 * omega)
            .into_iter()
            .map(|a| {
                let v = f(&a);
                (a, v)
            })
            .collect();
        CliqueSubvector {
            clique,
            omega,
            values,
        }
    }

    /// Moments of a measure given on exactly these variables.
    pub fn from_measure(mu: &AtomicMeasure<T>, omega: u32) -> Self {
        Self::from_fn(mu.variables().to_vec(), omega, |a| mu.moment(a))
    }

    pub fn clique(&self) -> &[usize] {
        &self.clique
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn nvars(&self) -> usize {
        self.clique.len()
    }

    pub fn get(&self, local: &MultiIndex) -> Option<T> {
        self.values.get(local).copied()
    }

    /// Value at a local index; `OrderTooHigh` if its degree exceeds `2 * omega`.
    pub fn value(&self, local: &MultiIndex) -> Result<T> {
        self.get(local).ok_or(Error::OrderTooHigh {
            order: self.omega,
            needed: local.degree(),
            available: 2 * self.omega,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, T)> {
        self.values.iter().map(|(a, &v)| (a, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.values.values().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Restriction to a subset of this subvector's variables.
    pub fn restrict(&self, vars: &[usize]) -> Result<CliqueSubvector<T>> {
        let positions: Vec<usize> =
            vars.iter()
                .map(|v| {
                    self.clique.iter().position(|c| c == v).ok_or_else(|| {
                        Error::Invalid(format!("variable {v} not in {:?}", self.clique))
                    })
                })
                .collect::<Result<_>>()?;
        let k = self.clique.len();
        Ok(Self::from_fn(vars.to_vec(), self.omega, |a| {
            self.values[&a.lift(&positions, k)]
        }))
    }

    /// Entries re-embedded as global multi-indices in `n` variables.
    pub fn embed(&self, n: usize) -> Vec<(MultiIndex, T)> {
        self.values
            .iter()
            .map(|(a, &v)| (a.lift(&self.clique, n), v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn riesz_on_first_example() {
        let y = fixtures::example_chain_y();
        let one = Polynomial::constant(3, 1.0);
        assert_eq!(riesz_eval(&y, &one).unwrap(), 1.0);
        assert_eq!(riesz_eval(&y, &Polynomial::zero(3)).unwrap(), 0.0);
        let p = Polynomial::from_terms(
            3,
            [
                (MultiIndex::new(vec![2, 0, 0]), 1.0),
                (MultiIndex::new(vec![0, 0, 2]), 1.0),
            ],
        );
        assert_eq!(riesz_eval(&y, &p).unwrap(), 2.0);
    }

    #[test]
    fn riesz_rejects_non_sparse_monomial() {
        let y = fixtures::example_chain_y();
        let p = Polynomial::from_terms(3, [(MultiIndex::new(vec![1, 0, 1]), 1.0)]);
        assert!(matches!(
            riesz_eval(&y, &p),
            Err(Error::IndexOutOfPattern { .. })
        ));
        let high = Polynomial::from_terms(3, [(MultiIndex::new(vec![5, 0, 0]), 1.0)]);
        assert!(matches!(
            riesz_eval(&y, &high),
            Err(Error::IndexOutOfPattern { .. })
        ));
    }

    #[test]
    fn clique_subvectors() {
        let y = fixtures::example_chain_y();
        let s = y.clique_subvector(0).unwrap();
        assert_eq!(s.len(), 15);
        assert_eq!(s.get(&MultiIndex::new(vec![4, 0])), Some(1.0));
        let z = SparseMomentVector::<f64>::zeros(y.cover().clone(), 2).unwrap();
        assert!(z.clique_subvector(1).unwrap().iter().all(|(_, v)| v == 0.0));

        let t = fixtures::example_triangle_y();
        let s3 = t.clique_subvector(2).unwrap();
        assert_eq!(s3.clique(), &[0, 2]);
        assert_eq!(s3.get(&MultiIndex::new(vec![1, 1])), Some(-1.0));
    }

    #[test]
    fn construction_errors() {
        let cover = CliqueCover::from_one_based(2, vec![vec![1], vec![2]]).unwrap();
        let dup = vec![
            (MultiIndex::new(vec![0, 0]), 1.0),
            (MultiIndex::new(vec![0, 0]), 1.0),
        ];
        assert!(matches!(
            SparseMomentVector::from_entries(cover.clone(), 1, dup, true),
            Err(Error::DuplicateEntry { .. })
        ));
        let off = vec![(MultiIndex::new(vec![1, 1]), 1.0)];
        assert!(matches!(
            SparseMomentVector::from_entries(cover.clone(), 1, off, true),
            Err(Error::IndexOutOfPattern { .. })
        ));
        let partial = vec![(MultiIndex::new(vec![0, 0]), 1.0)];
        assert!(matches!(
            SparseMomentVector::from_entries(cover.clone(), 1, partial.clone(), false),
            Err(Error::MissingEntry { .. })
        ));
        let y = SparseMomentVector::from_entries(cover, 1, partial, true).unwrap();
        assert_eq!(y.len(), 5);
        assert_eq!(y.mass(), 1.0);
    }

    proptest! {
        #[test]
        fn riesz_is_linear(coefs_p in proptest::collection::vec(-3.0f64..3.0, 25),
                           coefs_q in proptest::collection::vec(-3.0f64..3.0, 25),
                           a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let y = fixtures::example_chain_y();
            let idx = sparse_exponents(y.cover(), 4);
            let p = Polynomial::from_terms(3, idx.iter().cloned().zip(coefs_p));
            let q = Polynomial::from_terms(3, idx.iter().cloned().zip(coefs_q));
            let lhs = riesz_eval(&y, &p.scale(a).add(&q.scale(b))).unwrap();
            let rhs = a * riesz_eval(&y, &p).unwrap() + b * riesz_eval(&y, &q).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn subvector_embeds_back(seed in 0u64..1000) {
            let cover = CliqueCover::from_one_based(4, vec![vec![1, 2], vec![2, 3, 4]]).unwrap();
            let y = SparseMomentVector::<f64>::from_fn(cover, 2, |a| {
                let h = a.exponents().iter().enumerate()
                    .fold(seed, |h, (k, &e)| h.wrapping_mul(31).wrapping_add((k as u64 + 1) * e as u64));
                (h % 97) as f64 - 48.0
            }).unwrap();
            for i in 0..2 {
                let s = y.clique_subvector(i).unwrap();
                let clique = y.cover().clique(i).unwrap().to_vec();
                let expected: Vec<_> = y.iter()
                    .filter(|(a, _)| a.is_supported_on(&clique))
                    .map(|(a, v)| (a.clone(), v))
                    .collect();
                let mut got = s.embed(4);
                got.sort_by(|a, b| a.0.cmp(&b.0));
                prop_assert_eq!(got, expected);
            }
        }
    }
}
