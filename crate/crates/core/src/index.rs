//! Multi-indices and the correlatively sparse index sets built from them.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::cover::CliqueCover;
use crate::scalar::Real;

/// Exponent vector of a monomial.
///
/// Ordered graded-lexicographically: lower total degree first, then
/// lexicographically descending exponents, so that in two variables the
/// order reads `1, x1, x2, x1^2, x1 x2, x2^2, ...`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The exponent of `x_k` (0-based `k`).
    pub fn unit(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn into_exponents(self) -> Vec<u32> {
        self.0
    }

    /// Number of variables.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// 0-based positions with a positive exponent.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(k, _)| k)
            .collect()
    }

    /// True when every positive exponent sits at a position in `vars`.
    pub fn is_supported_on(&self, vars: &[usize]) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(k, &a)| a == 0 || vars.binary_search(&k).is_ok())
    }

    /// Componentwise sum. Panics on length mismatch.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.len(), other.len(), "multi-index length mismatch");
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Keeps only the positions in `vars`, in that order.
    pub fn restrict(&self, vars: &[usize]) -> MultiIndex {
        MultiIndex(vars.iter().map(|&k| self.0[k]).collect())
    }

    /// Places a local index over `vars` into `n` global positions.
    pub fn lift(&self, vars: &[usize], n: usize) -> MultiIndex {
        assert_eq!(
            self.len(),
            vars.len(),
            "local index does not match variables"
        );
        let mut e = vec![0; n];
        for (&k, &a) in vars.iter().zip(&self.0) {
            e[k] = a;
        }
        MultiIndex(e)
    }

    /// Evaluates the monomial `x^alpha`.
    pub fn eval<T: Real>(&self, x: &[T]) -> T {
        assert_eq!(self.len(), x.len(), "point dimension mismatch");
        let mut acc = T::one();
        for (&a, &xi) in self.0.iter().zip(x) {
            if a > 0 {
                acc *= xi.powi(a as i32);
            }
        }
        acc
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// All multi-indices in `nvars` variables of degree at most `bound`, in
/// canonical order.
pub fn local_exponents(nvars: usize, bound: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fill(&mut out, &mut cur, 0, bound);
    out.sort();
    out
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos == cur.len() {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in 0..=left {
        cur[pos] = a;
        fill(out, cur, pos + 1, left - a);
    }
    cur[pos] = 0;
}

/// The correlatively sparse multi-indices of degree at most `degree_bound`:
/// every index supported on some clique, deduplicated, in canonical order.
pub fn sparse_exponents(cover: &CliqueCover, degree_bound: u32) -> Vec<MultiIndex> {
    let n = cover.n();
    let mut set = BTreeSet::new();
    for clique in cover.cliques() {
        for local in local_exponents(clique.len(), degree_bound) {
            set.insert(local.lift(clique, n));
        }
    }
    set.into_iter().collect()
}

/// Binomial coefficient `C(n, k)` for the small sizes used in block counts.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
