//! Dense two-phase revised simplex for `min c'x, Ax = b, x >= 0` with
//! Bland's rule. The basis is refactored (LU) every iteration; problems
//! here are tiny.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome<T> {
    Optimal {
        x: DVector<T>,
        basis: Vec<usize>,
    },
    Infeasible {
        phase_one_objective: T,
    },
    Unbounded,
    /// Iteration limit; should not happen with Bland's rule.
    Stalled,
}

struct Tableau<'a, T: Real> {
    a: &'a DMatrix<T>,
    b: &'a DVector<T>,
    tol: T,
}

enum Step<T> {
    Optimal(DVector<T>),
    Unbounded,
    Stalled,
    Singular,
}

impl<T: Real> Tableau<'_, T> {
    fn basis_matrix(&self, basis: &[usize]) -> DMatrix<T> {
        DMatrix::from_fn(self.a.nrows(), basis.len(), |r, c| self.a[(r, basis[c])])
    }

    /// Runs simplex from `basis` over the columns allowed by `allowed`.
    fn run(&self, c: &DVector<T>, basis: &mut [usize], allowed: &dyn Fn(usize) -> bool) -> Step<T> {
        let (m, n) = self.a.shape();
        let max_iters = 50 * (m + n) + 100;
        for _ in 0..max_iters {
            let bm = self.basis_matrix(basis);
            let lu = bm.clone().lu();
            let Some(x_b) = lu.solve(self.b) else {
                return Step::Singular;
            };
            let c_b = DVector::from_fn(m, |i, _| c[basis[i]]);
            let Some(pi) = bm.transpose().lu().solve(&c_b) else {
                return Step::Singular;
            };
            let entering = (0..n).find(|&j| {
                allowed(j) && !basis.contains(&j) && c[j] - self.a.column(j).dot(&pi) < -self.tol
            });
            let Some(q) = entering else {
                let mut x = DVector::zeros(n);
                for (i, &j) in basis.iter().enumerate() {
                    x[j] = x_b[i];
                }
                return Step::Optimal(x);
            };
            let Some(u) = lu.solve(&self.a.column(q).into_owned()) else {
                return Step::Singular;
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..m {
                if u[i] > self.tol {
                    let ratio = x_b[i].max(T::zero()) / u[i];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - self.tol
                                || ((ratio - lr).abs() <= self.tol && basis[i] < basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((p, _)) = leave else {
                return Step::Unbounded;
            };
            basis[p] = q;
        }
        Step::Stalled
    }
}

/// Solves the standard-form LP. `a` should have full row rank.
pub(crate) fn solve<T: Real>(
    a: &DMatrix<T>,
    b: &DVector<T>,
    c: &DVector<T>,
    tol: T,
) -> LpOutcome<T> {
    let (m, n) = a.shape();
    let mut a1 = DMatrix::zeros(m, n + m);
    let mut b1 = b.clone();
    for i in 0..m {
        let sign = if b[i] < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        for j in 0..n {
            a1[(i, j)] = a[(i, j)] * sign;
        }
        a1[(i, n + i)] = T::one();
        b1[i] *= sign;
    }
    let tab = Tableau {
        a: &a1,
        b: &b1,
        tol,
    };
    let c1 = DVector::from_fn(n + m, |j, _| if j >= n { T::one() } else { T::zero() });
    let mut basis: Vec<usize> = (n..n + m).collect();
    let x1 = match tab.run(&c1, &mut basis, &|_| true) {
        Step::Optimal(x) => x,
        Step::Stalled | Step::Singular => return LpOutcome::Stalled,
        Step::Unbounded => return LpOutcome::Stalled,
    };
    let infeas = (n..n + m).fold(T::zero(), |s, j| s + x1[j]);
    let scale = T::one() + b1.iter().fold(T::zero(), |s, v| s.max(v.abs()));
    if infeas > tol.sqrt() * scale {
        return LpOutcome::Infeasible {
            phase_one_objective: infeas,
        };
    }

    // Pivot zero-level artificials out of the basis where possible.
    for p in 0..m {
        if basis[p] < n {
            continue;
        }
        let bm = tab.basis_matrix(&basis);
        let Some(inv) = bm.try_inverse() else {
            return LpOutcome::Stalled;
        };
        let row = inv.row(p) * &a1;
        if let Some(q) = (0..n).find(|&j| !basis.contains(&j) && row[j].abs() > tol.sqrt()) {
            basis[p] = q;
        }
    }

    let c2 = DVector::from_fn(n + m, |j, _| if j < n { c[j] } else { T::zero() });
    let keep_artificial = |j: usize| j < n;
    match tab.run(&c2, &mut basis, &keep_artificial) {
        Step::Optimal(x) => LpOutcome::Optimal {
            x: DVector::from_fn(n, |j, _| x[j].max(T::zero())),
            basis: basis.into_iter().filter(|&j| j < n).collect(),
        },
        Step::Unbounded => LpOutcome::Unbounded,
        Step::Stalled | Step::Singular => LpOutcome::Stalled,
    }
}
