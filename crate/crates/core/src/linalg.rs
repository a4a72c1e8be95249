//! Small dense linear-algebra helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

/// Eigenvalues (descending) and matching unit eigenvectors of a symmetric matrix.
pub(crate) fn sym_eigen<T: Real>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

/// Singular values of a symmetric matrix, descending.
pub(crate) fn sym_singular_values<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    let (vals, _) = sym_eigen(m);
    let mut s: Vec<T> = vals.into_iter().map(|v| v.abs()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Projection onto the PSD cone: negative eigenvalues clipped to zero.
pub(crate) fn project_psd<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let eig = m.clone().symmetric_eigen();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > T::zero() {
            let v = eig.eigenvectors.column(k);
            out += v * v.transpose() * lam;
        }
    }
    out
}

/// Nonnegative least squares `min |A x - b|, x >= 0` (Lawson-Hanson active set).
pub(crate) fn nnls<T: Real>(a: &DMatrix<T>, b: &DVector<T>, tol: T) -> DVector<T> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap_or(std::cmp::Ordering::Equal));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let cols: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
            let z_sub = least_squares(&sub, b);
            if z_sub.iter().all(|&v| v > T::zero()) {
                x.fill(T::zero());
                for (c, &k) in cols.iter().enumerate() {
                    x[k] = z_sub[c];
                }
                break;
            }
            // Step back toward the feasible region and drop the blocking indices.
            let mut alpha = T::one();
            for (c, &k) in cols.iter().enumerate() {
                if z_sub[c] <= T::zero() {
                    let denom = x[k] - z_sub[c];
                    if denom > T::zero() {
                        alpha = alpha.min(x[k] / denom);
                    }
                }
            }
            for (c, &k) in cols.iter().enumerate() {
                let xk = x[k];
                x[k] = xk + alpha * (z_sub[c] - xk);
                if x[k] <= tol {
                    x[k] = T::zero();
                    passive[k] = false;
                }
            }
        }
    }
    x
}

/// Minimum-norm least-squares solution via SVD.
pub(crate) fn least_squares<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> DVector<T> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(T::zero(), |m, &s| m.max(s));
    let eps = smax * T::of(1e-12) * T::of(a.nrows().max(a.ncols()) as f64);
    svd.solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Greedy pivoted selection of linearly independent rows: repeatedly takes
/// the row with the largest residual after projecting out the rows already
/// chosen, among rows allowed by `group` in ascending group order. Stops at
/// `limit` rows or when the best residual falls to `tol`.
pub(crate) fn select_independent_rows<T: Real>(
    rows: &DMatrix<T>,
    group: &[u32],
    tol: T,
    limit: usize,
) -> Vec<usize> {
    let (nr, nc) = rows.shape();
    let mut residual = rows.clone();
    let mut chosen = Vec::new();
    let mut groups: Vec<u32> = group.to_vec();
    groups.sort_unstable();
    groups.dedup();
    for g in groups {
        loop {
            if chosen.len() >= limit.min(nc) {
                return chosen;
            }
            let best = (0..nr)
                .filter(|&r| group[r] == g && !chosen.contains(&r))
                .map(|r| (r, residual.row(r).norm()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            let Some((r, norm)) = best else { break };
            if norm <= tol {
                break;
            }
            chosen.push(r);
            let q = residual.row(r).transpose() / norm;
            for k in 0..nr {
                let proj = residual.row(k).dot(&q.transpose());
                let update = q.transpose() * proj;
                let mut row = residual.row_mut(k);
                row -= update;
            }
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_matches_unconstrained_when_positive() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x: DVector<f64> = nnls(&a, &b, 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn nnls_clips_negative_direction() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![-1.0, 2.0]);
        let x: DVector<f64> = nnls(&a, &b, 1e-12);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn psd_projection_clips() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let p: DMatrix<f64> = project_psd(&m);
        assert!((p[(0, 0)] - 1.0).abs() < 1e-12 && p[(1, 1)].abs() < 1e-12);
    }

    #[test]
    fn row_selection_prefers_low_groups() {
        // Rows 0 and 2 are parallel; row 1 is independent but in a later group.
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 2.0, 0.0]);
        let sel = select_independent_rows(&m, &[0, 1, 0], 1e-9, 2);
        assert_eq!(sel, vec![2, 1]);
    }
}
