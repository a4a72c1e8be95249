//! Bundled first-order solver: ADMM on `min c'x` subject to
//! `B(x) = X`, `X` PSD, where `B(x) = B_0 + sum_k x_k B_k` stacks every block.
//!
//! Best effort only. Reports whether the residual targets were met and
//! never hides non-convergence.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{project_psd, sym_eigen};
use crate::moments::SparseMomentVector;
use crate::scalar::Real;

use super::SdpInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverSource {
    Bundled,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Relative tolerance on the primal and dual residuals.
    pub tol: f64,
    pub rho: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 20_000,
            tol: 1e-9,
            rho: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T: Real> {
    pub y: SparseMomentVector<T>,
    pub objective: T,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Largest negative eigenvalue magnitude over the blocks at `y`.
    pub cone_distance: f64,
    pub status: SolveStatus,
    pub source: SolverSource,
}

/// Symmetric-vectorization layout: upper triangles with off-diagonals
/// scaled by sqrt(2), blocks concatenated.
struct Layout {
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    len: usize,
}

impl Layout {
    fn new(sizes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut len = 0;
        for &s in &sizes {
            offsets.push(len);
            len += s * (s + 1) / 2;
        }
        Layout {
            offsets,
            sizes,
            len,
        }
    }

    fn pos(&self, b: usize, i: usize, j: usize) -> usize {
        let s = self.sizes[b];
        // Row-major upper triangle.
        self.offsets[b] + i * s + j - i - i * i.saturating_sub(1) / 2
    }

    fn unpack<T: Real>(&self, v: &DVector<T>, b: usize) -> DMatrix<T> {
        let s = self.sizes[b];
        let r2 = T::of(std::f64::consts::SQRT_2);
        let mut m = DMatrix::zeros(s, s);
        for i in 0..s {
            for j in i..s {
                let val = v[self.pos(b, i, j)];
                if i == j {
                    m[(i, i)] = val;
                } else {
                    m[(i, j)] = val / r2;
                    m[(j, i)] = val / r2;
                }
            }
        }
        m
    }

    fn pack<T: Real>(&self, m: &DMatrix<T>, b: usize, out: &mut DVector<T>) {
        let s = self.sizes[b];
        let r2 = T::of(std::f64::consts::SQRT_2);
        for i in 0..s {
            for j in i..s {
                out[self.pos(b, i, j)] = if i == j { m[(i, i)] } else { m[(i, j)] * r2 };
            }
        }
    }
}

fn project<T: Real>(layout: &Layout, v: &DVector<T>) -> DVector<T> {
    let mut out = DVector::zeros(layout.len);
    for b in 0..layout.sizes.len() {
        layout.pack(&project_psd(&layout.unpack(v, b)), b, &mut out);
    }
    out
}

/// Runs ADMM from the origin. The returned report always carries the final
/// iterate; `status` says whether the residual targets were reached.
pub fn solve_sdp_bundled<T: Real>(
    inst: &SdpInstance<T>,
    opts: &SolverOptions,
) -> Result<SolveReport<T>> {
    if opts.max_iters == 0
        || opts.tol.is_nan()
        || opts.tol <= 0.0
        || opts.rho.is_nan()
        || opts.rho <= 0.0
    {
        return Err(Error::Invalid("solver options must be positive".into()));
    }
    let m = inst.num_variables() - 1;
    let layout = Layout::new(inst.blocks.iter().map(|b| b.size).collect());
    let r2 = T::of(std::f64::consts::SQRT_2);
    let mut a = DMatrix::<T>::zeros(layout.len, m);
    let mut b0 = DVector::<T>::zeros(layout.len);
    for (b, block) in inst.blocks.iter().enumerate() {
        for &(k, i, j, c) in &block.entries {
            let v = if i == j { c } else { c * r2 };
            let p = layout.pos(b, i, j);
            if k == 0 {
                b0[p] += v;
            } else {
                a[(p, k - 1)] += v;
            }
        }
    }
    let c = DVector::from_fn(m, |k, _| inst.objective[k + 1]);
    let at = a.transpose();
    let gram = &at * &a;
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Invalid("some moment variable appears in no block".into()))?;

    let tol = T::of(opts.tol);
    let mut rho = T::of(opts.rho);
    let mut x = DVector::<T>::zeros(m);
    let mut big_x = project(&layout, &b0);
    let mut u = DVector::<T>::zeros(layout.len);
    let mut status = SolveStatus::NotConverged;
    let mut iterations = 0;
    let mut r_norm = T::zero();
    let mut s_norm = T::zero();
    let c_norm = c.norm();
    for it in 1..=opts.max_iters {
        iterations = it;
        let rhs = &at * (&big_x - &u - &b0) - &c / rho;
        x = chol.solve(&rhs);
        let bx = &b0 + &a * &x;
        let prev = big_x.clone();
        big_x = project(&layout, &(&bx + &u));
        let r = &bx - &big_x;
        u += &r;
        r_norm = r.norm();
        s_norm = (&at * (&big_x - &prev)).norm() * rho;
        let scale_p = T::one() + bx.norm().max(big_x.norm());
        let scale_d = T::one() + c_norm.max((&at * &u).norm() * rho);
        if r_norm <= tol * scale_p && s_norm <= tol * scale_d {
            status = SolveStatus::Converged;
            break;
        }
        if it % 20 == 0 {
            let pr = r_norm / scale_p;
            let du = s_norm / scale_d;
            if pr > T::of(10.0) * du {
                rho *= T::of(2.0);
                u /= T::of(2.0);
            } else if du > T::of(10.0) * pr {
                rho /= T::of(2.0);
                u *= T::of(2.0);
            }
        }
    }
    if status == SolveStatus::NotConverged {
        log::warn!(
            "bundled solver stopped after {iterations} iterations (primal {:e}, dual {:e})",
            r_norm.to_f64_lossy(),
            s_norm.to_f64_lossy()
        );
    }

    let mut values = Vec::with_capacity(m + 1);
    values.push(T::one());
    values.extend(x.iter().copied());
    let mut cone = 0.0f64;
    for block in &inst.blocks {
        let (eig, _) = sym_eigen(&block.eval(&values));
        if let Some(&min) = eig.last() {
            cone = cone.max((-min).to_f64_lossy());
        }
    }
    Ok(SolveReport {
        objective: inst.objective_at(&values),
        y: inst.moment_vector(&values)?,
        iterations,
        primal_residual: r_norm.to_f64_lossy(),
        dual_residual: s_norm.to_f64_lossy(),
        cone_distance: cone,
        status,
        source: SolverSource::Bundled,
    })
}
