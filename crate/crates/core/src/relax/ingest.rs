//! Turning external solver output into moment vectors.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::certify::{psd_dense, RankPolicy};
use crate::cover::CliqueCover;
use crate::error::{Error, Result};
use crate::index::{sparse_exponents, MultiIndex};
use crate::moments::SparseMomentVector;
use crate::scalar::Real;

use super::{LabeledBlock, SdpInstance};

/// Non-fatal findings while ingesting a solution.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    /// 1-based blocks failing the PSD test, with their smallest eigenvalue.
    pub blocks_not_psd: Vec<(usize, f64)>,
    /// Largest disagreement between repeated occurrences of one moment.
    pub max_conflict: f64,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.blocks_not_psd.is_empty()
    }
}

fn check_blocks<T: Real>(
    inst: &SdpInstance<T>,
    values: &[T],
    policy: &RankPolicy<T>,
    report: &mut IngestReport,
) {
    for (b, block) in inst.blocks.iter().enumerate() {
        let m = block.eval(values);
        if !psd_dense(&m, policy.rel_tol) {
            let lam = crate::linalg::sym_eigen(&m)
                .0
                .last()
                .copied()
                .unwrap_or_else(T::zero);
            log::warn!("block {} is not PSD (min eigenvalue {lam})", b + 1);
            report.blocks_not_psd.push((b + 1, lam.to_f64_lossy()));
        }
    }
}

/// Rebuilds `y` from the free coordinates `x_1..x_m` of the SDPA
/// formulation (`y_0 = 1`).
pub fn ingest_primal<T: Real>(
    inst: &SdpInstance<T>,
    free: &[T],
    policy: &RankPolicy<T>,
) -> Result<(SparseMomentVector<T>, IngestReport)> {
    let m = inst.num_variables() - 1;
    if free.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: free.len(),
        });
    }
    let mut values = Vec::with_capacity(m + 1);
    values.push(T::one());
    values.extend_from_slice(free);
    let mut report = IngestReport::default();
    check_blocks(inst, &values, policy, &mut report);
    Ok((inst.moment_vector(&values)?, report))
}

/// Whitespace-separated numbers.
pub fn parse_primal_vector<T: Real>(text: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = line.split(['*', '#']).next().unwrap_or("");
        for tok in body.split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}') {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad number {tok:?}"),
            })?;
            out.push(T::of(v));
        }
    }
    Ok(out)
}

/// Reads moments off dense labeled clique blocks: entry `(a, b)` of the
/// block for clique `i` is the moment of `x^(a+b)` on that clique. Repeated
/// occurrences are averaged and their spread recorded.
pub fn ingest_blocks<T: Real>(
    cover: &CliqueCover,
    omega: u32,
    blocks: &[LabeledBlock<T>],
    policy: &RankPolicy<T>,
) -> Result<(SparseMomentVector<T>, IngestReport)> {
    let n = cover.n();
    let mut seen: BTreeMap<MultiIndex, Vec<T>> = BTreeMap::new();
    let mut report = IngestReport::default();
    for (b, block) in blocks.iter().enumerate() {
        let clique = cover.clique(block.clique)?;
        let k = block.labels.len();
        if block.rows.len() != k || block.rows.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: block.rows.len(),
            });
        }
        if let Some(a) = block.labels.iter().find(|a| a.len() != clique.len()) {
            return Err(Error::WrongArity {
                alpha: a.exponents().to_vec(),
                got: a.len(),
                expected: clique.len(),
            });
        }
        let data = nalgebra::DMatrix::from_fn(k, k, |i, j| block.rows[i][j]);
        if !psd_dense(&data, policy.rel_tol) {
            let lam = crate::linalg::sym_eigen(&data)
                .0
                .last()
                .copied()
                .unwrap_or_else(T::zero);
            log::warn!("input block {} is not PSD (min eigenvalue {lam})", b + 1);
            report.blocks_not_psd.push((b + 1, lam.to_f64_lossy()));
        }
        for i in 0..k {
            for j in 0..k {
                let alpha = block.labels[i].add(&block.labels[j]).lift(clique, n);
                seen.entry(alpha).or_default().push(block.rows[i][j]);
            }
        }
    }
    let mut entries = Vec::with_capacity(seen.len());
    let mut conflict = T::zero();
    for (alpha, vals) in seen {
        let mean = vals.iter().fold(T::zero(), |s, &v| s + v) / T::of(vals.len() as f64);
        for &v in &vals {
            conflict = conflict.max((v - mean).abs());
        }
        entries.push((alpha, mean));
    }
    report.max_conflict = conflict.to_f64_lossy();
    if conflict > T::zero() {
        log::warn!("inconsistent repeated moments (spread {conflict})");
    }
    let pattern = sparse_exponents(cover, 2 * omega);
    let entries: Vec<(MultiIndex, T)> = entries
        .into_iter()
        .filter(|(a, _)| pattern.binary_search(a).is_ok())
        .collect();
    let y = SparseMomentVector::from_entries(cover.clone(), omega, entries, false)?;
    Ok((y, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::matrices::moment_matrix;
    use crate::relax::build_relaxation;

    #[test]
    fn published_blocks_round_trip() {
        let policy = RankPolicy::default();
        let blocks = fixtures::published_pop_matrices::<f64>();
        let (y, report) = ingest_blocks(&fixtures::pop_cover(), 3, &blocks, &policy).unwrap();
        assert_eq!(report.max_conflict, 0.0);
        assert!(report.is_clean());
        assert_eq!(y.len(), 70);
        for block in &blocks {
            let m = moment_matrix(&y.clique_subvector(block.clique).unwrap(), 3).unwrap();
            for (i, a) in block.labels.iter().enumerate() {
                for (j, b) in block.labels.iter().enumerate() {
                    let r = m.labels().iter().position(|l| l == a).unwrap();
                    let c = m.labels().iter().position(|l| l == b).unwrap();
                    assert_eq!(m.get(r, c), block.rows[i][j]);
                }
            }
        }
    }

    #[test]
    fn graded_labels_do_not_fit_published_data() {
        // Reading the printed matrices with graded labels produces
        // contradictory repeated moments.
        let policy = RankPolicy::default();
        let mut blocks = fixtures::published_pop_matrices::<f64>();
        for b in &mut blocks {
            b.labels = crate::index::local_exponents(2, 3);
        }
        let (_, report) = ingest_blocks(&fixtures::pop_cover(), 3, &blocks, &policy).unwrap();
        assert!(report.max_conflict > 0.1);
    }

    #[test]
    fn zero_free_coordinates_give_dirac_at_origin() {
        let inst = build_relaxation(&fixtures::example_pop::<f64>(), 3).unwrap();
        let free = vec![0.0; inst.num_variables() - 1];
        let (y, report) = ingest_primal(&inst, &free, &RankPolicy::default()).unwrap();
        assert_eq!(y.mass(), 1.0);
        assert!(y.iter().skip(1).all(|(_, v)| v == 0.0));
        assert!(report.is_clean());
        assert!(matches!(
            ingest_primal(&inst, &free[1..], &RankPolicy::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn primal_vector_text() {
        let v: Vec<f64> = parse_primal_vector("1 2\n{3, 4.5}\n* comment 9\n").unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.5]);
        assert!(parse_primal_vector::<f64>("1 x").is_err());
    }
}
