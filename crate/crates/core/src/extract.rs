//! Atom extraction from flat moment matrices by simultaneous
//! diagonalization of multiplication operators.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify::{numerical_rank, RankPolicy};
use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::linalg::{nnls, select_independent_rows, sym_eigen};
use crate::matrices::{moment_matrix, ConstraintPolynomial, LabeledSymMatrix};
use crate::measure::AtomicMeasure;
use crate::moments::CliqueSubvector;
use crate::scalar::Real;

const EIGEN_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    pub seed: u64,
    /// Redraws of the random combination when its eigenvalues collide.
    pub max_retries: usize,
    /// Atoms closer than this in the max norm count as one point.
    pub merge_tol: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            seed: 42,
            max_retries: 10,
            merge_tol: 1e-6,
        }
    }
}

/// Extracts the `r`-atomic measure represented by a flat moment matrix.
///
/// The result lives on local variables `0..k`, where `k` is the label
/// length; atoms are in canonical (descending lexicographic) order.
pub fn extract_atoms<T: Real>(
    m: &LabeledSymMatrix<T>,
    r: usize,
    policy: &RankPolicy<T>,
    seed: u64,
) -> Result<AtomicMeasure<T>> {
    extract_with(
        m,
        r,
        policy,
        &ExtractOptions {
            seed,
            ..Default::default()
        },
    )
}

pub fn extract_with<T: Real>(
    m: &LabeledSymMatrix<T>,
    r: usize,
    policy: &RankPolicy<T>,
    opts: &ExtractOptions,
) -> Result<AtomicMeasure<T>> {
    let labels = m.labels();
    let k = labels.first().map_or(0, |a| a.len());
    let local_vars: Vec<usize> = (0..k).collect();
    if r == 0 {
        return Ok(AtomicMeasure::empty(local_vars));
    }
    if labels.is_empty() || !labels[0].is_zero() {
        return Err(Error::ExtractionFailed(
            "first label must be the constant monomial".into(),
        ));
    }
    let data = match policy.round_decimals {
        Some(d) => m.data().map(|v| v.round_to(d)),
        None => m.data().clone(),
    };
    let omega = labels.iter().map(|a| a.degree()).max().unwrap_or(0);
    let big = labels.len();

    let (vals, vecs) = sym_eigen(&data);
    if r > big || vals[r - 1] <= T::zero() {
        return Err(Error::ExtractionFailed(format!(
            "matrix has fewer than {r} positive eigenvalues"
        )));
    }
    let v = DMatrix::from_fn(big, r, |i, j| vecs[(i, j)] * vals[j].sqrt());

    let degrees: Vec<u32> = labels.iter().map(|a| a.degree()).collect();
    let scale = (0..big).fold(T::zero(), |s, i| s.max(v.row(i).norm()));
    let tol = policy.rel_tol.sqrt() * scale;
    let basis = select_independent_rows(&v, &degrees, tol, r);
    if basis.len() < r {
        return Err(Error::ExtractionFailed(format!(
            "found only {} independent basis monomials, need {r}",
            basis.len()
        )));
    }
    if let Some(&b) = basis.iter().find(|&&b| degrees[b] >= omega) {
        return Err(Error::FlatnessViolated {
            degree: degrees[b],
            omega,
        });
    }
    let vb = DMatrix::from_fn(r, r, |i, j| v[(basis[i], j)]);
    let vb_inv = vb
        .try_inverse()
        .ok_or_else(|| Error::ExtractionFailed("singular basis block".into()))?;
    let u = &v * vb_inv;

    let position = |a: &MultiIndex| labels.iter().position(|l| l == a);
    let mut mult = Vec::with_capacity(k);
    for var in 0..k {
        let unit = MultiIndex::unit(k, var);
        let mut nk = DMatrix::zeros(r, r);
        for (s, &b) in basis.iter().enumerate() {
            let shifted = labels[b].add(&unit);
            let row = position(&shifted).ok_or_else(|| {
                Error::ExtractionFailed(format!("monomial {shifted} outside the matrix"))
            })?;
            nk.set_row(s, &u.row(row));
        }
        mult.push(nk);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut atoms = None;
    for attempt in 0..=opts.max_retries {
        let mut c: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = c.iter().sum();
        c.iter_mut().for_each(|x| *x /= total);
        let mut comb = DMatrix::zeros(r, r);
        for (nk, &ck) in mult.iter().zip(&c) {
            comb += nk * T::of(ck);
        }
        let schur = comb.clone().schur();
        let (q, t) = schur.unpack();
        let diag: Vec<T> = (0..r).map(|i| t[(i, i)]).collect();
        let complex =
            (1..r).any(|i| t[(i, i - 1)].abs() > T::of(EIGEN_GAP) * (T::one() + t.norm()));
        let mut sorted = diag.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let close = sorted.windows(2).any(|w| w[1] - w[0] < T::of(EIGEN_GAP));
        if complex || close {
            log::debug!("extraction attempt {attempt}: eigenvalues not separated, redrawing");
            continue;
        }
        let pts: Vec<Vec<T>> = (0..r)
            .map(|j| {
                let qj = q.column(j);
                mult.iter().map(|nk| qj.dot(&(nk * qj))).collect()
            })
            .collect();
        atoms = Some(pts);
        break;
    }
    let atoms = atoms.ok_or_else(|| {
        Error::ExtractionFailed(format!(
            "multiplication operators not separable after {} draws",
            opts.max_retries + 1
        ))
    })?;

    let a = DMatrix::from_fn(big, r, |i, j| labels[i].eval(&atoms[j]));
    let b = DVector::from_fn(big, |i, _| data[(0, i)]);
    let weights = nnls(&a, &b, T::of(1e-14) * (T::one() + data[(0, 0)].abs()));
    let w_tol = policy.rel_tol * data[(0, 0)].abs().max(T::of(1e-300));
    if let Some(min) = weights.iter().copied().reduce(|x, y| x.min(y)) {
        if min <= w_tol {
            return Err(Error::NonPhysicalWeights {
                min_weight: min.to_f64_lossy(),
                tol: w_tol.to_f64_lossy(),
            });
        }
    }
    let mu = AtomicMeasure::new(local_vars, atoms, weights.iter().copied().collect())?.sorted();

    let recon_tol = reconstruction_tol(policy, &data);
    let mut residual = T::zero();
    for i in 0..big {
        for j in i..big {
            let e = mu.moment(&labels[i].add(&labels[j])) - data[(i, j)];
            residual = residual.max(e.abs());
        }
    }
    if residual > recon_tol {
        return Err(Error::ReconstructionFailed {
            residual: residual.to_f64_lossy(),
            tol: recon_tol.to_f64_lossy(),
        });
    }
    Ok(mu)
}

fn reconstruction_tol<T: Real>(policy: &RankPolicy<T>, data: &DMatrix<T>) -> T {
    let base = match policy.round_decimals {
        Some(d) => T::of(1e-6_f64.max(10f64.powi(-(d as i32)))),
        None => T::of(1e-6),
    };
    let max = data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    base * (T::one() + max)
}

/// Extracts the measure of a clique subvector from its order-`omega`
/// moment matrix, at the rank the policy assigns it. The result carries the
/// clique's variables.
pub fn extract_clique<T: Real>(
    y_sub: &CliqueSubvector<T>,
    policy: &RankPolicy<T>,
    opts: &ExtractOptions,
) -> Result<AtomicMeasure<T>> {
    let m = moment_matrix(y_sub, y_sub.omega())?;
    let r = numerical_rank(&m, policy);
    extract_with(&m, r, policy, opts)?.relabeled(y_sub.clique().to_vec())
}

/// Largest `|sum_l w_l z_l^alpha - y_alpha|` over the subvector's indices.
pub fn verify_measure_against_subvector<T: Real>(
    mu: &AtomicMeasure<T>,
    y_sub: &CliqueSubvector<T>,
) -> Result<T> {
    if mu.variables() != y_sub.clique() {
        return Err(Error::Invalid(format!(
            "measure on {:?} checked against subvector on {:?}",
            mu.variables(),
            y_sub.clique()
        )));
    }
    Ok(y_sub
        .iter()
        .fold(T::zero(), |m, (a, v)| m.max((mu.moment(a) - v).abs())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintViolation {
    pub atom: usize,
    pub constraint: usize,
    pub value: f64,
}

/// Constraint values at every atom; `values[atom][constraint]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub values: Vec<Vec<f64>>,
    pub violations: Vec<ConstraintViolation>,
}

impl FeasibilityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates each constraint at each atom and flags values below `-tol`.
/// Constraint polynomials must be written in the measure's variables.
pub fn constraint_feasibility_check<T: Real>(
    mu: &AtomicMeasure<T>,
    constraints: &[ConstraintPolynomial<T>],
    tol: T,
) -> Result<FeasibilityReport> {
    if let Some(g) = constraints
        .iter()
        .find(|g| g.poly().nvars() != mu.variables().len())
    {
        return Err(Error::DimensionMismatch {
            expected: mu.variables().len(),
            got: g.poly().nvars(),
        });
    }
    let mut values = Vec::with_capacity(mu.len());
    let mut violations = Vec::new();
    for (atom, z) in mu.atoms().iter().enumerate() {
        let row: Vec<f64> = constraints
            .iter()
            .map(|g| g.eval(z).to_f64_lossy())
            .collect();
        for (constraint, &value) in row.iter().enumerate() {
            if value < -tol.to_f64_lossy() {
                violations.push(ConstraintViolation {
                    atom,
                    constraint,
                    value,
                });
            }
        }
        values.push(row);
    }
    Ok(FeasibilityReport { values, violations })
}
