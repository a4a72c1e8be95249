//! JSON wire formats. Variables and cliques are 1-based on the wire.

use serde::{Deserialize, Serialize};

use crate::certify::FlatnessCertificate;
use crate::cover::CliqueCover;
use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::matrices::ConstraintPolynomial;
use crate::moments::{Polynomial, SparseMomentVector};
use crate::relax::PopProblem;
use crate::scalar::Real;

pub use crate::measure::MeasureJson;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub alpha: Vec<u32>,
    pub value: f64,
}

/// `{ "n", "cliques", "omega", "entries": [{"alpha", "value"}] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVectorJson {
    pub n: usize,
    pub cliques: Vec<Vec<usize>>,
    pub omega: u32,
    pub entries: Vec<MomentEntry>,
}

impl MomentVectorJson {
    pub fn from_vector<T: Real>(y: &SparseMomentVector<T>) -> Self {
        MomentVectorJson {
            n: y.cover().n(),
            cliques: y.cover().to_one_based(),
            omega: y.omega(),
            entries: y
                .iter()
                .map(|(a, v)| MomentEntry {
                    alpha: a.exponents().to_vec(),
                    value: v.to_f64_lossy(),
                })
                .collect(),
        }
    }

    pub fn to_vector<T: Real>(&self, allow_missing_as_zero: bool) -> Result<SparseMomentVector<T>> {
        let cover = CliqueCover::from_one_based(self.n, self.cliques.clone())?;
        SparseMomentVector::from_entries(
            cover,
            self.omega,
            self.entries
                .iter()
                .map(|e| (MultiIndex::new(e.alpha.clone()), T::of(e.value))),
            allow_missing_as_zero,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coef: f64,
    pub alpha_local: Vec<u32>,
}

/// A polynomial on one clique's variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliquePolyJson {
    pub clique: usize,
    pub terms: Vec<TermJson>,
}

/// `{ "n", "cliques", "objectives": [...], "constraints": [...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopJson {
    pub n: usize,
    pub cliques: Vec<Vec<usize>>,
    #[serde(default)]
    pub objectives: Vec<CliquePolyJson>,
    #[serde(default)]
    pub constraints: Vec<CliquePolyJson>,
}

/// Constraints alone, for certifying a given moment vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintsJson {
    pub constraints: Vec<CliquePolyJson>,
}

fn clique_poly<T: Real>(p: &CliquePolyJson, cover: &CliqueCover) -> Result<(usize, Polynomial<T>)> {
    if p.clique == 0 || p.clique > cover.len() {
        return Err(Error::CliqueIndex {
            index: p.clique,
            count: cover.len(),
        });
    }
    let i = p.clique - 1;
    let k = cover.clique(i)?.len();
    if let Some(t) = p.terms.iter().find(|t| t.alpha_local.len() != k) {
        return Err(Error::WrongArity {
            alpha: t.alpha_local.clone(),
            got: t.alpha_local.len(),
            expected: k,
        });
    }
    let poly = Polynomial::from_terms(
        k,
        p.terms
            .iter()
            .map(|t| (MultiIndex::new(t.alpha_local.clone()), T::of(t.coef))),
    );
    Ok((i, poly))
}

fn poly_json<T: Real>(clique: usize, p: &Polynomial<T>) -> CliquePolyJson {
    CliquePolyJson {
        clique: clique + 1,
        terms: p
            .terms()
            .map(|(a, c)| TermJson {
                coef: c.to_f64_lossy(),
                alpha_local: a.exponents().to_vec(),
            })
            .collect(),
    }
}

/// Groups constraint polynomials by clique.
pub fn constraints_from_json<T: Real>(
    list: &[CliquePolyJson],
    cover: &CliqueCover,
) -> Result<Vec<Vec<ConstraintPolynomial<T>>>> {
    let mut out = vec![Vec::new(); cover.len()];
    for p in list {
        let (i, poly) = clique_poly(p, cover)?;
        out[i].push(ConstraintPolynomial::new(i, poly));
    }
    Ok(out)
}

impl PopJson {
    pub fn to_problem<T: Real>(&self) -> Result<PopProblem<T>> {
        let cover = CliqueCover::from_one_based(self.n, self.cliques.clone())?;
        let mut objectives: Vec<Polynomial<T>> = cover
            .cliques()
            .iter()
            .map(|c| Polynomial::zero(c.len()))
            .collect();
        for p in &self.objectives {
            let (i, poly) = clique_poly(p, &cover)?;
            objectives[i] = objectives[i].add(&poly);
        }
        let constraints = constraints_from_json(&self.constraints, &cover)?;
        PopProblem::new(cover, objectives, constraints)
    }

    pub fn from_problem<T: Real>(pop: &PopProblem<T>) -> Self {
        PopJson {
            n: pop.cover().n(),
            cliques: pop.cover().to_one_based(),
            objectives: pop
                .objectives()
                .iter()
                .enumerate()
                .filter(|(_, f)| !f.is_zero())
                .map(|(i, f)| poly_json(i, f))
                .collect(),
            constraints: pop
                .constraints()
                .iter()
                .flatten()
                .map(|g| poly_json(g.clique(), g.poly()))
                .collect(),
        }
    }
}

/// Certificate with every clique named by its 1-based index in the input
/// cover (not the certified order).
pub fn certificate_json<T: Real>(
    cert: &FlatnessCertificate<T>,
    order: &[usize],
) -> serde_json::Value {
    let name = |p: usize| order.get(p).copied().unwrap_or(p) + 1;
    let cliques: Vec<serde_json::Value> = cert
        .cliques
        .iter()
        .map(|c| {
            let mut v = serde_json::to_value(c).expect("serializable");
            v["clique"] = name(c.clique).into();
            v
        })
        .collect();
    let overlaps: Vec<serde_json::Value> = cert
        .overlaps
        .iter()
        .map(|o| {
            let candidates: Vec<serde_json::Value> = o
                .candidates
                .iter()
                .map(|c| {
                    let mut v = serde_json::to_value(c).expect("serializable");
                    v["j"] = name(c.j).into();
                    v
                })
                .collect();
            serde_json::json!({
                "clique": name(o.clique),
                "chosen": o.chosen.map(name),
                "candidates": candidates,
            })
        })
        .collect();
    serde_json::json!({
        "omega": cert.omega,
        "verdict": cert.verdict,
        "rank_lower_bound_r": cert.rank_lower_bound_r,
        "order": order.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "rel_tol": cert.policy.rel_tol.to_f64_lossy(),
        "round_decimals": cert.policy.round_decimals,
        "cliques": cliques,
        "overlaps": overlaps,
    })
}
