//! Numerical rank decisions and the flat-extension certificate.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, sym_singular_values};
use crate::matrices::{
    localizing_block, moment_matrix, overlap_moment_matrix, ConstraintPolynomial, LabeledSymMatrix,
};
use crate::moments::SparseMomentVector;
use crate::rip::RipWitnesses;
use crate::scalar::Real;

/// How numerical ranks and PSD-ness are decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPolicy<T> {
    /// Singular values at or below `rel_tol * sigma_max` count as zero.
    pub rel_tol: T,
    /// Round matrix entries to this many decimals before deciding.
    pub round_decimals: Option<u32>,
}

impl<T: Real> Default for RankPolicy<T> {
    fn default() -> Self {
        RankPolicy {
            rel_tol: T::of(1e-6),
            round_decimals: None,
        }
    }
}

impl<T: Real> RankPolicy<T> {
    pub fn new(rel_tol: T, round_decimals: Option<u32>) -> Result<Self> {
        if !(rel_tol > T::zero() && rel_tol < T::one()) {
            return Err(Error::Invalid(format!(
                "rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        Ok(RankPolicy {
            rel_tol,
            round_decimals,
        })
    }

    fn prepare(&self, m: &DMatrix<T>) -> DMatrix<T> {
        match self.round_decimals {
            Some(d) => m.map(|v| v.round_to(d)),
            None => m.clone(),
        }
    }
}

/// Rank decision with the spectrum around the cut, so borderline calls are
/// visible in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub dim: usize,
    pub sigma_max: f64,
    /// Smallest singular value counted in the rank (0 when rank is 0).
    pub sigma_kept: f64,
    /// Largest singular value cut off (0 when nothing was cut).
    pub sigma_cut: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

pub fn rank_report<T: Real>(m: &LabeledSymMatrix<T>, policy: &RankPolicy<T>) -> RankReport {
    let data = policy.prepare(m.data());
    let sv = sym_singular_values(&data);
    let (eig, _) = sym_eigen(&data);
    let sigma_max = sv.first().copied().unwrap_or_else(T::zero);
    let rank = if sigma_max > T::zero() {
        sv.iter()
            .filter(|&&s| s > policy.rel_tol * sigma_max)
            .count()
    } else {
        0
    };
    RankReport {
        rank,
        dim: m.dim(),
        sigma_max: sigma_max.to_f64_lossy(),
        sigma_kept: if rank > 0 {
            sv[rank - 1].to_f64_lossy()
        } else {
            0.0
        },
        sigma_cut: sv.get(rank).map_or(0.0, |s| s.to_f64_lossy()),
        lambda_min: eig.last().map_or(0.0, |v| v.to_f64_lossy()),
        lambda_max: eig.first().map_or(0.0, |v| v.to_f64_lossy()),
    }
}

/// Number of singular values above `rel_tol * sigma_max`; 0 for the zero matrix.
pub fn numerical_rank<T: Real>(m: &LabeledSymMatrix<T>, policy: &RankPolicy<T>) -> usize {
    rank_report(m, policy).rank
}

/// `lambda_min >= -rel_tol * max(1, lambda_max)`; vacuously true when empty.
pub fn psd_check<T: Real>(m: &LabeledSymMatrix<T>, policy: &RankPolicy<T>) -> bool {
    psd_dense(&policy.prepare(m.data()), policy.rel_tol)
}

pub(crate) fn psd_dense<T: Real>(m: &DMatrix<T>, rel_tol: T) -> bool {
    if m.nrows() == 0 {
        return true;
    }
    let (eig, _) = sym_eigen(m);
    let max = eig[0];
    let min = eig[eig.len() - 1];
    min >= -rel_tol * max.max(T::one())
}

/// `max(1, ceil(d / 2))` with `d` the largest degree in the list; 1 when empty.
pub fn d_half<T: Real>(constraints: &[ConstraintPolynomial<T>]) -> u32 {
    let deg = constraints.iter().map(|g| g.degree()).max().unwrap_or(0);
    deg.div_ceil(2).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliqueFlatness {
    /// 0-based position in the certified clique order.
    pub clique: usize,
    pub d_i: u32,
    pub psd_moment: bool,
    pub psd_localizing: bool,
    pub rank_full: usize,
    pub rank_shifted: usize,
    pub flat: bool,
    pub moment: RankReport,
    pub shifted: RankReport,
    /// Smallest eigenvalue over the localizing blocks (absent without constraints).
    pub localizing_lambda_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapCandidate {
    pub j: usize,
    pub rank_full: usize,
    pub rank_shifted: usize,
    pub flat: bool,
    pub full: RankReport,
    pub shifted: RankReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapFlatness {
    pub clique: usize,
    /// First witness passing the overlap rank condition.
    pub chosen: Option<usize>,
    pub candidates: Vec<OverlapCandidate>,
}

impl OverlapFlatness {
    pub fn chosen_candidate(&self) -> Option<&OverlapCandidate> {
        let j = self.chosen?;
        self.candidates.iter().find(|c| c.j == j)
    }
}

/// Outcome of checking every flat-extension condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessCertificate<T> {
    pub omega: u32,
    pub cliques: Vec<CliqueFlatness>,
    /// One entry per clique after the first.
    pub overlaps: Vec<OverlapFlatness>,
    pub verdict: bool,
    /// `max_i rank M^omega_i`: a lower bound on the number of atoms.
    pub rank_lower_bound_r: usize,
    #[serde(skip)]
    pub policy: RankPolicy<T>,
}

impl<T: Real> FlatnessCertificate<T> {
    /// Parent clique used by assembly: `None` for the first clique.
    pub fn parents(&self) -> Vec<Option<usize>> {
        std::iter::once(None)
            .chain(self.overlaps.iter().map(|o| o.chosen))
            .collect()
    }
}

/// Checks PSD, moment flatness and overlap flatness for every clique of `y`.
///
/// `constraints[i]` lists the constraint polynomials of clique `i` (an empty
/// slice means no constraints anywhere). `witnesses` must come from a
/// successful running-intersection check of `y`'s cover.
pub fn certify<T: Real>(
    y: &SparseMomentVector<T>,
    constraints: &[Vec<ConstraintPolynomial<T>>],
    witnesses: &RipWitnesses,
    policy: &RankPolicy<T>,
) -> Result<FlatnessCertificate<T>> {
    if y.is_zero() {
        return Err(Error::ZeroVector);
    }
    let m = y.cover().len();
    if !constraints.is_empty() && constraints.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: constraints.len(),
        });
    }
    if witnesses.witness.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: witnesses.witness.len(),
        });
    }
    let y = match policy.round_decimals {
        Some(d) => y.rounded(d),
        None => y.clone(),
    };
    let omega = y.omega();
    let none: Vec<ConstraintPolynomial<T>> = Vec::new();

    let mut cliques = Vec::with_capacity(m);
    for i in 0..m {
        let gs = constraints.get(i).unwrap_or(&none);
        let sub = y.clique_subvector(i)?;
        let full = moment_matrix(&sub, omega)?;
        let d_i = d_half(gs);
        let moment = rank_report(&full, policy);
        let psd_moment = psd_check(&full, policy);
        let (psd_localizing, localizing_lambda_min) = if gs.is_empty() {
            (true, None)
        } else if d_i > omega {
            (false, None)
        } else {
            let block = localizing_block(&sub, gs, omega)?;
            let lam = block
                .blocks
                .iter()
                .map(|b| rank_report(b, policy).lambda_min)
                .fold(f64::INFINITY, f64::min);
            (block.is_psd(policy), Some(lam))
        };
        let shifted = if d_i <= omega {
            rank_report(&full.leading(omega - d_i), policy)
        } else {
            // No shifted matrix exists below order zero; flatness cannot hold.
            RankReport {
                rank: usize::MAX,
                ..rank_report(&full.leading(0), policy)
            }
        };
        let flat = d_i <= omega && moment.rank == shifted.rank;
        cliques.push(CliqueFlatness {
            clique: i,
            d_i,
            psd_moment,
            psd_localizing,
            rank_full: moment.rank,
            rank_shifted: shifted.rank,
            flat,
            moment,
            shifted,
            localizing_lambda_min,
        });
    }

    let mut overlaps = Vec::with_capacity(m.saturating_sub(1));
    for i in 1..m {
        let mut candidates = Vec::new();
        let mut chosen = None;
        for &j in &witnesses.witness[i] {
            let full = rank_report(&overlap_moment_matrix(&y, i, j, omega)?, policy);
            let shifted = rank_report(&overlap_moment_matrix(&y, i, j, omega - 1)?, policy);
            let flat = full.rank == shifted.rank;
            candidates.push(OverlapCandidate {
                j,
                rank_full: full.rank,
                rank_shifted: shifted.rank,
                flat,
                full,
                shifted,
            });
            if flat {
                chosen = Some(j);
                break;
            }
        }
        overlaps.push(OverlapFlatness {
            clique: i,
            chosen,
            candidates,
        });
    }

    let verdict = cliques
        .iter()
        .all(|c| c.psd_moment && c.psd_localizing && c.flat)
        && overlaps.iter().all(|o| o.chosen.is_some());
    let rank_lower_bound_r = cliques.iter().map(|c| c.rank_full).max().unwrap_or(0);
    log::debug!("certificate verdict {verdict}, r >= {rank_lower_bound_r}");
    Ok(FlatnessCertificate {
        omega,
        cliques,
        overlaps,
        verdict,
        rank_lower_bound_r,
        policy: *policy,
    })
}

/// Whether the clique subvectors vanish together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ZeroPropagation {
    AllZero,
    AllNonzero,
    /// Some but not all clique subvectors vanish. Impossible for vectors
    /// meeting the rank conditions, so this flags a rank-policy problem.
    Inconsistent {
        zero_cliques: Vec<usize>,
    },
}

/// Classifies clique subvectors as zero when every entry is at most
/// `rel_tol * max|y|`.
pub fn zero_propagation_check<T: Real>(
    y: &SparseMomentVector<T>,
    policy: &RankPolicy<T>,
) -> Result<ZeroPropagation> {
    let scale = y.max_abs();
    let thresh = policy.rel_tol * scale;
    let mut zero_cliques = Vec::new();
    for i in 0..y.cover().len() {
        let sub = y.clique_subvector(i)?;
        if scale.is_zero() || sub.max_abs() <= thresh {
            zero_cliques.push(i);
        }
    }
    Ok(if zero_cliques.is_empty() {
        ZeroPropagation::AllNonzero
    } else if zero_cliques.len() == y.cover().len() {
        ZeroPropagation::AllZero
    } else {
        ZeroPropagation::Inconsistent { zero_cliques }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::index::MultiIndex;
    use crate::moments::{CliqueSubvector, Polynomial};
    use crate::rip::check_rip;

    fn default() -> RankPolicy<f64> {
        RankPolicy::default()
    }

    #[test]
    fn ranks_of_first_example() {
        let y = fixtures::example_chain_y::<f64>();
        let ov = overlap_moment_matrix(&y, 0, 1, 2).unwrap();
        assert_eq!(numerical_rank(&ov, &default()), 1);
        let m1 = moment_matrix(&y.clique_subvector(0).unwrap(), 2).unwrap();
        assert!(psd_check(&m1, &default()));
        assert_eq!(numerical_rank(&m1, &default()), 2);
    }

    #[test]
    fn zero_and_indefinite() {
        let labels = vec![MultiIndex::new(vec![0]), MultiIndex::new(vec![1])];
        let zero = LabeledSymMatrix::from_data(labels.clone(), DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(numerical_rank(&zero, &default()), 0);
        let ind = LabeledSymMatrix::from_data(
            labels,
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        )
        .unwrap();
        assert!(!psd_check(&ind, &default()));
        let empty = LabeledSymMatrix::<f64>::from_data(vec![], DMatrix::zeros(0, 0)).unwrap();
        assert!(psd_check(&empty, &default()));
    }

    #[test]
    fn rank_is_permutation_invariant() {
        let y = fixtures::example_chain_y::<f64>();
        let m = moment_matrix(&y.clique_subvector(1).unwrap(), 2).unwrap();
        let perm = [5, 3, 1, 0, 2, 4];
        let p = m.principal(&perm);
        assert_eq!(
            numerical_rank(&p, &default()),
            numerical_rank(&m, &default())
        );
    }

    #[test]
    fn rounding_policy_changes_rank() {
        let labels = vec![MultiIndex::new(vec![0]), MultiIndex::new(vec![1])];
        let m = LabeledSymMatrix::from_data(
            labels,
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2e-5]),
        )
        .unwrap();
        assert_eq!(numerical_rank(&m, &default()), 2);
        let rounded = RankPolicy::new(1e-6, Some(4)).unwrap();
        assert_eq!(numerical_rank(&m, &rounded), 1);
        assert!(RankPolicy::new(0.0, None).is_err());
    }

    #[test]
    fn half_degrees() {
        let ball = ConstraintPolynomial::new(
            0,
            Polynomial::from_terms(
                2,
                [
                    (MultiIndex::new(vec![0, 0]), 3.0),
                    (MultiIndex::new(vec![2, 0]), -1.0),
                    (MultiIndex::new(vec![0, 2]), -1.0),
                ],
            ),
        );
        assert_eq!(d_half(&[ball]), 1);
        assert_eq!(d_half::<f64>(&[]), 1);
        let quintic = ConstraintPolynomial::new(
            0,
            Polynomial::from_terms(1, [(MultiIndex::new(vec![5]), 1.0)]),
        );
        assert_eq!(d_half(&[quintic]), 3);
    }

    #[test]
    fn certifies_first_example() {
        let y = fixtures::example_chain_y::<f64>();
        let w = check_rip(y.cover()).unwrap();
        let cert = certify(&y, &[], &w, &default()).unwrap();
        assert!(cert.verdict);
        let ranks: Vec<(usize, usize)> = cert
            .cliques
            .iter()
            .map(|c| (c.rank_full, c.rank_shifted))
            .collect();
        assert_eq!(ranks, vec![(2, 2), (2, 2)]);
        let ov = cert.overlaps[0].chosen_candidate().unwrap();
        assert_eq!((ov.rank_full, ov.rank_shifted), (1, 1));
        assert_eq!(cert.rank_lower_bound_r, 2);
        assert_eq!(cert.parents(), vec![None, Some(0)]);
    }

    #[test]
    fn point_mass_is_flat() {
        let cover = crate::cover::CliqueCover::dense(2);
        let y =
            SparseMomentVector::<f64>::from_fn(cover, 1, |a| if a.is_zero() { 1.0 } else { 0.0 })
                .unwrap();
        let w = check_rip(y.cover()).unwrap();
        let cert = certify(&y, &[], &w, &default()).unwrap();
        assert!(cert.verdict);
        assert_eq!(
            (cert.cliques[0].rank_full, cert.cliques[0].rank_shifted),
            (1, 1)
        );
    }

    #[test]
    fn zero_vector_is_rejected() {
        let y = SparseMomentVector::<f64>::zeros(fixtures::chain_cover(), 2).unwrap();
        let w = check_rip(y.cover()).unwrap();
        assert!(matches!(
            certify(&y, &[], &w, &default()),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn zero_propagation() {
        let y = fixtures::example_chain_y::<f64>();
        assert_eq!(
            zero_propagation_check(&y, &default()).unwrap(),
            ZeroPropagation::AllNonzero
        );
        let z = SparseMomentVector::<f64>::zeros(fixtures::chain_cover(), 2).unwrap();
        assert_eq!(
            zero_propagation_check(&z, &default()).unwrap(),
            ZeroPropagation::AllZero
        );
        // Zero every entry supported on clique 1; clique 2 keeps x3^2, x3^4.
        let clique1 = [0usize, 1];
        let broken = y.map_values(|a, v| if a.is_supported_on(&clique1) { 0.0 } else { v });
        assert_eq!(
            zero_propagation_check(&broken, &default()).unwrap(),
            ZeroPropagation::Inconsistent {
                zero_cliques: vec![0]
            }
        );
    }

    #[test]
    fn vanishing_mass_with_psd_and_flat_forces_zero() {
        // Candidates with L(1) = 0 whose order-2 moment matrix is PSD:
        // only the top-degree diagonal moments may be positive. None of them
        // is flat unless it is the zero vector.
        for top in [[4u32, 0], [0, 4], [2, 2]] {
            let sub = CliqueSubvector::from_fn(vec![0, 1], 2, |a| {
                if a.exponents() == top {
                    1.0
                } else {
                    0.0
                }
            });
            let m = moment_matrix(&sub, 2).unwrap();
            let psd = psd_check(&m, &default());
            let flat = numerical_rank(&m, &default()) == numerical_rank(&m.leading(1), &default());
            assert!(!(psd && flat), "nonzero vector {top:?} passed");
        }
        let zero = CliqueSubvector::from_fn(vec![0, 1], 2, |_| 0.0);
        let m = moment_matrix(&zero, 2).unwrap();
        assert!(psd_check(&m, &default()));
        assert_eq!(
            numerical_rank(&m, &default()),
            numerical_rank(&m.leading(1), &default())
        );
    }
}
