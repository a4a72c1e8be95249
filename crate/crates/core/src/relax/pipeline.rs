//! Relax, solve, certify and recover minimizers.

use crate::assemble::{assemble, verify_global};
use crate::certify::{certify, RankPolicy};
use crate::error::{Error, Result};
use crate::extract::{
    constraint_feasibility_check, extract_clique, ExtractOptions, FeasibilityReport,
};
use crate::measure::AtomicMeasure;
use crate::moments::SparseMomentVector;
use crate::rip::rip_ordered;
use crate::scalar::Real;
use crate::FlatnessCertificate;

use super::{build_relaxation, solve_sdp_bundled, PopProblem, SolveReport, SolverOptions};

#[derive(Debug, Clone)]
pub enum SolutionSource<T: Real> {
    Bundled(SolverOptions),
    /// A moment vector obtained elsewhere (external solver, fixture).
    Provided(SparseMomentVector<T>),
}

#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions<T> {
    pub policy: RankPolicy<T>,
    pub extract: ExtractOptions,
    /// Point-matching tolerance for assembly.
    pub merge_tol: T,
    /// Constraint values above `-feas_tol` count as satisfied.
    pub feas_tol: T,
}

impl<T: Real> Default for PipelineOptions<T> {
    fn default() -> Self {
        PipelineOptions {
            policy: RankPolicy::default(),
            extract: ExtractOptions::default(),
            merge_tol: T::of(1e-6),
            feas_tol: T::of(1e-6),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineReport<T: Real> {
    /// Position -> original clique index of the order that was certified.
    pub clique_order: Vec<usize>,
    pub certificate: FlatnessCertificate<T>,
    /// Relaxation value `<f, y>`: a lower bound on the problem's minimum.
    pub f_omega: T,
    pub solve: Option<SolveReport<T>>,
    pub measure: Option<AtomicMeasure<T>>,
    pub global_residual: Option<T>,
    pub feasibility: Option<FeasibilityReport>,
    /// Objective value at each minimizer (atom of `measure`).
    pub objective_at_minimizers: Vec<T>,
}

impl<T: Real> PipelineReport<T> {
    pub fn minimizers(&self) -> &[Vec<T>] {
        self.measure.as_ref().map_or(&[], |m| m.atoms())
    }
}

/// Solves (or takes) the order-`omega` relaxation, certifies it, and when
/// the certificate holds extracts and assembles the minimizing measure.
pub fn pipeline<T: Real>(
    pop: &PopProblem<T>,
    omega: u32,
    source: SolutionSource<T>,
    opts: &PipelineOptions<T>,
) -> Result<PipelineReport<T>> {
    let inst = build_relaxation(pop, omega)?;
    let (y, solve) = match source {
        SolutionSource::Bundled(so) => {
            let rep = solve_sdp_bundled(&inst, &so)?;
            (rep.y.clone(), Some(rep))
        }
        SolutionSource::Provided(y) => {
            if y.cover() != pop.cover() || y.omega() != omega {
                return Err(Error::Invalid(
                    "solution is not on the problem's cover at this order".into(),
                ));
            }
            (y, None)
        }
    };
    let y = match opts.policy.round_decimals {
        Some(d) => y.rounded(d),
        None => y,
    };
    let f_omega = inst.objective_at(&inst.values_of(&y)?);

    let (cover, witnesses) = rip_ordered(pop.cover())?;
    let order = witnesses.order.clone();
    let pop_r = pop.reordered(&order)?;
    let y_r = y.with_cover(cover.clone())?;
    let certificate = certify(&y_r, pop_r.constraints(), &witnesses, &opts.policy)?;

    let mut report = PipelineReport {
        clique_order: order,
        certificate,
        f_omega,
        solve,
        measure: None,
        global_residual: None,
        feasibility: None,
        objective_at_minimizers: Vec::new(),
    };
    if !report.certificate.verdict {
        log::info!("certificate does not hold; returning the bound only");
        return Ok(report);
    }

    let measures = (0..cover.len())
        .map(|i| extract_clique(&y_r.clique_subvector(i)?, &opts.policy, &opts.extract))
        .collect::<Result<Vec<_>>>()?;
    let mu = assemble(
        &measures,
        &cover,
        &report.certificate.parents(),
        opts.merge_tol,
    )?;
    report.global_residual = Some(verify_global(&mu, &y_r)?);
    report.feasibility = Some(constraint_feasibility_check(
        &mu,
        &pop.global_constraints(),
        opts.feas_tol,
    )?);
    report.objective_at_minimizers = mu.atoms().iter().map(|x| pop.objective_value(x)).collect();
    report.measure = Some(mu);
    Ok(report)
}
