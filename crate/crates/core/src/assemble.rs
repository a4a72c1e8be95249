//! Gluing clique measures into a global atomic measure.

use crate::cover::{intersect_sorted, CliqueCover, Projection};
use crate::error::{Error, Result};
use crate::measure::{inf_dist, AtomicMeasure};
use crate::moments::SparseMomentVector;
use crate::scalar::Real;

/// Atoms of two measures grouped by their common projection onto the
/// overlap variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalGroups<T> {
    pub overlap: Vec<usize>,
    pub points: Vec<Vec<T>>,
    /// Mass of each overlap point, taken from the partial measure.
    pub masses: Vec<T>,
    /// Atom indices of the partial measure projecting to each point.
    pub partial: Vec<Vec<usize>>,
    /// Atom indices of the incoming measure projecting to each point.
    pub incoming: Vec<Vec<usize>>,
}

impl<T: Real> MarginalGroups<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Merges atoms within `tol` of each other (max norm), summing weights.
/// The surviving point is the first one seen.
fn merge_atoms<T: Real>(points: Vec<(Vec<T>, T)>, tol: T) -> (Vec<Vec<T>>, Vec<T>) {
    let mut atoms: Vec<Vec<T>> = Vec::new();
    let mut weights: Vec<T> = Vec::new();
    for (p, w) in points {
        match atoms.iter().position(|a| inf_dist(a, &p) <= tol) {
            Some(i) => weights[i] += w,
            None => {
                atoms.push(p);
                weights.push(w);
            }
        }
    }
    (atoms, weights)
}

/// Image of `mu` under a coordinate projection, with atoms that coincide
/// after projecting merged.
pub fn pushforward<T: Real>(
    mu: &AtomicMeasure<T>,
    p: &Projection,
    merge_tol: T,
) -> Result<AtomicMeasure<T>> {
    if p.source() != mu.variables() {
        return Err(Error::Invalid(format!(
            "projection source {:?} does not match measure variables {:?}",
            p.source(),
            mu.variables()
        )));
    }
    let points = mu
        .atoms()
        .iter()
        .zip(mu.weights())
        .map(|(z, &w)| (p.apply(z), w))
        .collect();
    let (atoms, weights) = merge_atoms(points, merge_tol);
    Ok(AtomicMeasure::new(p.target().to_vec(), atoms, weights)?.sorted())
}

fn onto<T: Real>(mu: &AtomicMeasure<T>, vars: &[usize], tol: T) -> Result<AtomicMeasure<T>> {
    pushforward(
        mu,
        &Projection::new(mu.variables().to_vec(), vars.to_vec())?,
        tol,
    )
}

fn fmt_point<T: Real>(p: &[T]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(", "))
}

/// Groups the atoms of `partial` and `incoming` by their projections onto
/// `overlap`, checking that both marginals agree point by point and mass
/// by mass.
pub fn match_marginals<T: Real>(
    partial: &AtomicMeasure<T>,
    incoming: &AtomicMeasure<T>,
    overlap: &[usize],
    tol: T,
) -> Result<MarginalGroups<T>> {
    let left = onto(partial, overlap, tol)?;
    let right = onto(incoming, overlap, tol)?;
    let mut problems = Vec::new();
    let mut used = vec![false; right.len()];
    let mut points = Vec::new();
    let mut masses = Vec::new();
    for (v, &theta) in left.atoms().iter().zip(left.weights()) {
        let nearest = right
            .atoms()
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, z)| (k, inf_dist(v, z)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        match nearest {
            Some((k, d)) if d <= tol => {
                used[k] = true;
                let other = right.weights()[k];
                if (theta - other).abs() > tol * (T::one() + theta.abs()) {
                    problems.push(format!(
                        "mass at {} is {theta} on one side and {other} on the other",
                        fmt_point(v)
                    ));
                }
                if theta <= tol {
                    problems.push(format!("degenerate mass {theta} at {}", fmt_point(v)));
                }
                points.push(v.clone());
                masses.push(theta);
            }
            _ => problems.push(format!("overlap atom {} has no partner", fmt_point(v))),
        }
    }
    for (k, z) in right.atoms().iter().enumerate() {
        if !used[k] {
            problems.push(format!("overlap atom {} has no partner", fmt_point(z)));
        }
    }
    if !problems.is_empty() {
        let vars: Vec<usize> = overlap.iter().map(|v| v + 1).collect();
        return Err(Error::MarginalMismatch(format!(
            "marginals on {vars:?} disagree: {}",
            problems.join("; ")
        )));
    }
    let group = |mu: &AtomicMeasure<T>| -> Result<Vec<Vec<usize>>> {
        let p = Projection::new(mu.variables().to_vec(), overlap.to_vec())?;
        Ok(points
            .iter()
            .map(|v| {
                mu.atoms()
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| inf_dist(&p.apply(z), v) <= tol)
                    .map(|(k, _)| k)
                    .collect()
            })
            .collect())
    };
    let partial_groups = group(partial)?;
    let incoming_groups = group(incoming)?;
    Ok(MarginalGroups {
        overlap: overlap.to_vec(),
        points,
        masses,
        partial: partial_groups,
        incoming: incoming_groups,
    })
}

/// Glues one measure per clique into a measure on all variables.
///
/// `parents[i]` is the earlier clique whose overlap with clique `i` is
/// matched (the certificate's choice); `None` after the first clique
/// matches on everything clique `i` shares with its predecessors. A final
/// check compares every clique marginal with its input measure.
pub fn assemble<T: Real>(
    clique_measures: &[AtomicMeasure<T>],
    cover: &CliqueCover,
    parents: &[Option<usize>],
    tol: T,
) -> Result<AtomicMeasure<T>> {
    let m = cover.len();
    if clique_measures.len() != m || parents.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: clique_measures.len().min(parents.len()),
        });
    }
    for (i, mu) in clique_measures.iter().enumerate() {
        if mu.variables() != cover.clique(i)? {
            return Err(Error::Invalid(format!(
                "measure {} is not on clique {}",
                i + 1,
                i + 1
            )));
        }
    }

    let mut partial = clique_measures[0].clone();
    for i in 1..m {
        let clique = cover.clique(i)?;
        let union = partial.variables().to_vec();
        let overlap = match parents[i] {
            Some(j) if j < i => cover.intersection(i, j)?,
            Some(j) => {
                return Err(Error::Invalid(format!(
                    "parent {} of clique {} is not earlier",
                    j + 1,
                    i + 1
                )))
            }
            None => intersect_sorted(clique, &union),
        };
        let incoming = &clique_measures[i];
        let groups = match_marginals(&partial, incoming, &overlap, tol)?;

        let mut vars = union.clone();
        vars.extend_from_slice(clique);
        vars.sort_unstable();
        vars.dedup();
        let from_partial: Vec<Option<usize>> = vars
            .iter()
            .map(|v| union.iter().position(|u| u == v))
            .collect();
        let from_incoming: Vec<usize> = vars
            .iter()
            .map(|v| clique.iter().position(|c| c == v).unwrap_or(usize::MAX))
            .collect();

        let mut points = Vec::new();
        for t in 0..groups.len() {
            let theta = groups.masses[t];
            for &k in &groups.partial[t] {
                for &l in &groups.incoming[t] {
                    let u = &partial.atoms()[k];
                    let z = &incoming.atoms()[l];
                    let w: Vec<T> = (0..vars.len())
                        .map(|c| match from_partial[c] {
                            Some(p) => u[p],
                            None => z[from_incoming[c]],
                        })
                        .collect();
                    points.push((w, partial.weights()[k] * incoming.weights()[l] / theta));
                }
            }
        }
        let (atoms, weights) = merge_atoms(points, tol);
        partial = AtomicMeasure::new(vars, atoms, weights)?;
    }

    let all: Vec<usize> = (0..cover.n()).collect();
    if partial.variables() != all.as_slice() {
        return Err(Error::Invalid("cliques do not cover every variable".into()));
    }
    for (i, mu) in clique_measures.iter().enumerate() {
        let got = onto(&partial, mu.variables(), tol)?;
        let want = onto(mu, mu.variables(), tol)?;
        if let Some(detail) = marginal_difference(&got, &want, tol) {
            return Err(Error::FinalMarginalCheckFailed {
                clique: i + 1,
                detail,
            });
        }
    }
    Ok(partial.sorted())
}

fn marginal_difference<T: Real>(
    got: &AtomicMeasure<T>,
    want: &AtomicMeasure<T>,
    tol: T,
) -> Option<String> {
    let mut problems = Vec::new();
    for (z, &w) in want.atoms().iter().zip(want.weights()) {
        match got.find_atom(z, tol) {
            Some(k) if (got.weights()[k] - w).abs() <= tol * (T::one() + w.abs()) => {}
            Some(k) => problems.push(format!(
                "weight at {} is {} instead of {w}",
                fmt_point(z),
                got.weights()[k]
            )),
            None => problems.push(format!("atom {} missing", fmt_point(z))),
        }
    }
    for z in got.atoms() {
        if want.find_atom(z, tol).is_none() {
            problems.push(format!("unexpected atom {}", fmt_point(z)));
        }
    }
    (!problems.is_empty()).then(|| problems.join("; "))
}

/// Every point whose projection onto each clique is an atom of that
/// clique's measure, found by extending partial assignments clique by
/// clique. Sorted in canonical order.
pub fn maximal_support_set<T: Real>(
    clique_measures: &[AtomicMeasure<T>],
    cover: &CliqueCover,
    tol: T,
) -> Result<Vec<Vec<T>>> {
    let n = cover.n();
    let mut partials: Vec<Vec<Option<T>>> = vec![vec![None; n]];
    for mu in clique_measures {
        if mu.variables().iter().any(|&v| v >= n) {
            return Err(Error::Invalid(format!(
                "measure variables {:?} exceed {n}",
                mu.variables()
            )));
        }
        let mut next = Vec::new();
        for p in &partials {
            for z in mu.atoms() {
                let consistent = mu
                    .variables()
                    .iter()
                    .zip(z)
                    .all(|(&v, &c)| p[v].is_none_or(|x| (x - c).abs() <= tol));
                if consistent {
                    let mut q = p.clone();
                    for (&v, &c) in mu.variables().iter().zip(z) {
                        q[v].get_or_insert(c);
                    }
                    if !next
                        .iter()
                        .any(|o: &Vec<Option<T>>| same_partial(o, &q, tol))
                    {
                        next.push(q);
                    }
                }
            }
        }
        partials = next;
    }
    let mut out: Vec<Vec<T>> = partials
        .into_iter()
        .filter_map(|p| p.into_iter().collect::<Option<Vec<T>>>())
        .collect();
    out.sort_by(|a, b| crate::measure::cmp_points_desc(a, b));
    Ok(out)
}

fn same_partial<T: Real>(a: &[Option<T>], b: &[Option<T>], tol: T) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Some(x), Some(y)) => (*x - *y).abs() <= tol,
        (None, None) => true,
        _ => false,
    })
}

/// Largest `|sum_l w_l x_l^alpha - y_alpha|` over all entries of `y`.
pub fn verify_global<T: Real>(mu: &AtomicMeasure<T>, y: &SparseMomentVector<T>) -> Result<T> {
    let n = y.cover().n();
    if mu.variables().len() != n || mu.variables().iter().enumerate().any(|(i, &v)| i != v) {
        return Err(Error::Invalid(format!(
            "measure is on {:?}, not on all {n} variables",
            mu.variables()
        )));
    }
    Ok(y.iter()
        .fold(T::zero(), |m, (a, v)| m.max((mu.moment(a) - v).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::measure::same_point_set;
    use proptest::prelude::*;

    const TOL: f64 = 1e-6;

    fn measure(vars: &[usize], atoms: &[&[f64]], weights: &[f64]) -> AtomicMeasure<f64> {
        AtomicMeasure::new(
            vars.to_vec(),
            atoms.iter().map(|a| a.to_vec()).collect(),
            weights.to_vec(),
        )
        .unwrap()
    }

    fn chain_measures() -> Vec<AtomicMeasure<f64>> {
        vec![
            measure(&[0, 1], &[&[1.0, 0.0], &[-1.0, 0.0]], &[0.5, 0.5]),
            measure(&[1, 2], &[&[0.0, 1.0], &[0.0, -1.0]], &[0.5, 0.5]),
        ]
    }

    #[test]
    fn pushforward_examples() {
        let mu = measure(&[0, 1], &[&[1.0, 1.0], &[-1.0, -1.0]], &[0.5, 0.5]);
        let p = Projection::new(vec![0, 1], vec![1]).unwrap();
        let img = pushforward(&mu, &p, TOL).unwrap();
        assert_eq!(img.atoms(), &[vec![1.0], vec![-1.0]]);
        assert_eq!(img.weights(), &[0.5, 0.5]);

        let img = pushforward(&chain_measures()[0], &p, TOL).unwrap();
        assert_eq!(img.atoms(), &[vec![0.0]]);
        assert_eq!(img.weights(), &[1.0]);

        let id = Projection::new(vec![0, 1], vec![0, 1]).unwrap();
        assert_eq!(pushforward(&mu, &id, TOL).unwrap(), mu.sorted());
    }

    #[test]
    fn marginal_groups_first_example() {
        let ms = chain_measures();
        let g = match_marginals(&ms[0], &ms[1], &[1], TOL).unwrap();
        assert_eq!(g.points, vec![vec![0.0]]);
        assert_eq!(g.masses, vec![1.0]);
        assert_eq!(g.partial, vec![vec![0, 1]]);
        assert_eq!(g.incoming, vec![vec![0, 1]]);
    }

    #[test]
    fn marginal_groups_two_points() {
        let square = measure(
            &[0, 1],
            &[&[1.0, 1.0], &[1.0, -1.0], &[-1.0, 1.0], &[-1.0, -1.0]],
            &[0.25; 4],
        );
        let line = measure(&[1, 2], &[&[1.0, 0.0], &[-1.0, 0.0]], &[0.5, 0.5]);
        let g = match_marginals(&square, &line, &[1], TOL).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.points, vec![vec![1.0], vec![-1.0]]);
        assert_eq!(g.masses, vec![0.5, 0.5]);
    }

    #[test]
    fn marginal_mismatch() {
        let a = measure(&[0], &[&[1.0], &[-1.0]], &[0.5, 0.5]);
        let b = measure(&[0], &[&[1.0]], &[1.0]);
        let err = match_marginals(&a, &b, &[0], TOL).unwrap_err();
        assert!(matches!(err, Error::MarginalMismatch(_)), "{err}");
    }

    #[test]
    fn assembles_first_example() {
        let cover = fixtures::chain_cover();
        let mu = assemble(&chain_measures(), &cover, &[None, Some(0)], TOL).unwrap();
        let want = fixtures::chain_mu_lambda(0.25);
        assert!(same_point_set(mu.atoms(), want.atoms(), 1e-12));
        assert!(mu.weights().iter().all(|&w| (w - 0.25).abs() < 1e-12));
        let y = fixtures::example_chain_y();
        assert!(verify_global(&mu, &y).unwrap() <= 1e-10);
        let set = maximal_support_set(&chain_measures(), &cover, TOL).unwrap();
        assert!(same_point_set(&set, mu.atoms(), 1e-12));
    }

    #[test]
    fn single_clique() {
        let cover = CliqueCover::dense(2);
        let mu = measure(&[0, 1], &[&[1.0, 2.0], &[3.0, 4.0]], &[0.4, 0.6]);
        assert_eq!(
            assemble(std::slice::from_ref(&mu), &cover, &[None], TOL).unwrap(),
            mu.sorted()
        );
        assert_eq!(
            maximal_support_set(std::slice::from_ref(&mu), &cover, TOL).unwrap(),
            mu.sorted().atoms()
        );
    }

    #[test]
    fn mu_lambda_represents_first_example() {
        let y = fixtures::example_chain_y();
        assert!(verify_global(&fixtures::chain_mu_lambda(0.3), &y).unwrap() <= 1e-10);
        let empty = AtomicMeasure::empty(vec![0, 1, 2]);
        assert_eq!(verify_global(&empty, &y).unwrap(), 1.0);
    }

    fn triangle_measures() -> Vec<AtomicMeasure<f64>> {
        vec![
            measure(&[0, 1], &[&[1.0, 1.0], &[-1.0, -1.0]], &[0.5, 0.5]),
            measure(&[1, 2], &[&[1.0, 1.0], &[-1.0, -1.0]], &[0.5, 0.5]),
            measure(&[0, 2], &[&[1.0, -1.0], &[-1.0, 1.0]], &[0.5, 0.5]),
        ]
    }

    #[test]
    fn triangle_has_no_support() {
        let cover = fixtures::triangle_cover();
        assert!(maximal_support_set(&triangle_measures(), &cover, TOL)
            .unwrap()
            .is_empty());
        let err =
            assemble(&triangle_measures(), &cover, &[None, Some(0), Some(0)], TOL).unwrap_err();
        assert!(
            matches!(err, Error::FinalMarginalCheckFailed { clique: 3, .. }),
            "{err}"
        );
    }

    proptest! {
        #[test]
        fn support_set_is_order_independent(
            xs in prop::collection::vec(prop::collection::vec(-1i32..=1, 3), 1..4),
        ) {
            let pts: Vec<Vec<f64>> = xs.iter().map(|x| x.iter().map(|&v| v as f64).collect()).collect();
            let global = AtomicMeasure::new(vec![0, 1, 2], pts.clone(), vec![1.0; pts.len()]).unwrap();
            let cover = fixtures::chain_cover();
            let ms: Vec<_> = cover
                .cliques()
                .iter()
                .map(|c| onto(&global, c, TOL).unwrap())
                .collect();
            let fwd = maximal_support_set(&ms, &cover, TOL).unwrap();
            let rev_cover = cover.reordered(&[1, 0]).unwrap();
            let rev = maximal_support_set(&[ms[1].clone(), ms[0].clone()], &rev_cover, TOL).unwrap();
            prop_assert_eq!(&fwd, &rev);
            for p in &pts {
                prop_assert!(fwd.iter().any(|q| inf_dist(p, q) <= TOL));
            }
        }
    }
}
