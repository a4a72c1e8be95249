//! Running intersection property: checking a clique order and finding one.

use serde::Serialize;

use crate::cover::{intersect_sorted, is_subset_sorted, CliqueCover};
use crate::error::{Error, Result};

/// Witnesses of the running intersection property for one clique order.
///
/// `witness[i]` lists every `j < i` with
/// `clique_i ∩ (clique_0 ∪ ... ∪ clique_{i-1}) ⊆ clique_j`; `witness[0]`
/// is always empty. Indices are positions in the (possibly reordered) cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RipWitnesses {
    /// Position -> index of the clique in the cover this order was derived from.
    pub order: Vec<usize>,
    pub witness: Vec<Vec<usize>>,
}

impl RipWitnesses {
    /// The first admissible parent for every clique after the first.
    pub fn first_parents(&self) -> Vec<Option<usize>> {
        self.witness.iter().map(|w| w.first().copied()).collect()
    }
}

/// Witness sets for the cover's own order, without failing.
pub(crate) fn witness_sets(cover: &CliqueCover) -> Vec<Vec<usize>> {
    witness_sets_of(cover.cliques())
}

fn witness_sets_of(cliques: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut union: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(cliques.len());
    for (i, c) in cliques.iter().enumerate() {
        if i == 0 {
            out.push(Vec::new());
        } else {
            let shared = intersect_sorted(c, &union);
            out.push(
                (0..i)
                    .filter(|&j| is_subset_sorted(&shared, &cliques[j]))
                    .collect(),
            );
        }
        union.extend_from_slice(c);
        union.sort_unstable();
        union.dedup();
    }
    out
}

/// Checks the running intersection property for the given clique order and
/// records every admissible witness. Fails with the first (0-based) clique
/// that has none.
pub fn check_rip(cover: &CliqueCover) -> Result<RipWitnesses> {
    let witness = witness_sets(cover);
    if let Some(i) = (1..witness.len()).find(|&i| witness[i].is_empty()) {
        return Err(Error::RipFailsAt { clique: i });
    }
    Ok(RipWitnesses {
        order: (0..cover.len()).collect(),
        witness,
    })
}

/// Searches for a clique order satisfying the running intersection property.
///
/// Builds a maximum-weight spanning tree of the clique intersection graph
/// (weights `|clique_i ∩ clique_j|`, ties broken by the lexicographically
/// smaller edge), roots it at the clique holding variable 0 and lists the
/// cliques breadth first. That order satisfies the property iff any order
/// does, so a failed check proves no order exists.
pub fn find_rip_order(cover: &CliqueCover) -> Result<Vec<usize>> {
    let m = cover.len();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            edges.push((cover.intersection(i, j)?.len(), i, j));
        }
    }
    edges.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut adj = vec![Vec::new(); m];
    for &(_, i, j) in &edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
    }

    let root = cover
        .cliques()
        .iter()
        .position(|c| c.first() == Some(&0))
        .unwrap_or(0);
    let mut order = Vec::with_capacity(m);
    let mut seen = vec![false; m];
    let mut queue = std::collections::VecDeque::from([root]);
    seen[root] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }

    match check_rip(&cover.reordered(&order)?) {
        Ok(_) => Ok(order),
        Err(_) => Err(Error::NoOrderExists),
    }
}

/// Reorders the cover if needed and returns it with witnesses whose `order`
/// maps back to the original clique indices.
pub fn rip_ordered(cover: &CliqueCover) -> Result<(CliqueCover, RipWitnesses)> {
    if let Ok(w) = check_rip(cover) {
        return Ok((cover.clone(), w));
    }
    let order = find_rip_order(cover)?;
    let reordered = cover.reordered(&order)?;
    let mut w = check_rip(&reordered)?;
    w.order = order;
    Ok((reordered, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cover(n: usize, cliques: &[&[usize]]) -> CliqueCover {
        CliqueCover::from_one_based(n, cliques.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    fn permutations(m: usize) -> Vec<Vec<usize>> {
        if m == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in permutations(m - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, m - 1);
                out.push(q);
            }
        }
        out
    }

    fn brute_force_exists(c: &CliqueCover) -> bool {
        permutations(c.len())
            .iter()
            .any(|p| check_rip(&c.reordered(p).unwrap()).is_ok())
    }

    #[test]
    fn chain_witnesses() {
        let w = check_rip(&cover(4, &[&[1, 2], &[2, 3], &[3, 4]])).unwrap();
        assert_eq!(w.witness, vec![vec![], vec![0], vec![1]]);
    }

    #[test]
    fn triangle_fails_at_third() {
        let c = cover(3, &[&[1, 2], &[2, 3], &[1, 3]]);
        assert!(matches!(
            check_rip(&c),
            Err(Error::RipFailsAt { clique: 2 })
        ));
        assert!(matches!(find_rip_order(&c), Err(Error::NoOrderExists)));
        assert!(!brute_force_exists(&c));
    }

    #[test]
    fn single_clique_is_vacuous() {
        let w = check_rip(&CliqueCover::dense(3)).unwrap();
        assert_eq!(w.witness, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn reorders_a_chain() {
        let c = cover(4, &[&[2, 3], &[1, 2], &[3, 4]]);
        let order = find_rip_order(&c).unwrap();
        assert_eq!(order, vec![1, 0, 2]);
        assert!(check_rip(&c.reordered(&order).unwrap()).is_ok());
        assert_eq!(permutations(3).len(), 6);
        assert!(brute_force_exists(&c));
    }

    #[test]
    fn disjoint_cliques_any_order() {
        let c = cover(3, &[&[2], &[3], &[1]]);
        let w = check_rip(&c).unwrap();
        assert_eq!(w.witness, vec![vec![], vec![0], vec![0, 1]]);
        assert!(find_rip_order(&c).is_ok());
    }

    #[test]
    fn all_witnesses_are_recorded() {
        // {1,2}, {1,3}, {1,4}: clique 3 meets the union in {1}, inside both predecessors.
        let w = check_rip(&cover(4, &[&[1, 2], &[1, 3], &[1, 4]])).unwrap();
        assert_eq!(w.witness[2], vec![0, 1]);
    }

    #[test]
    fn rip_ordered_maps_back() {
        let c = cover(4, &[&[3, 4], &[2, 3], &[1, 2]]);
        assert!(check_rip(&c).is_ok());
        let (same, w) = rip_ordered(&c).unwrap();
        assert_eq!(same, c);
        assert_eq!(w.order, vec![0, 1, 2]);
        let c2 = cover(4, &[&[1, 2], &[3, 4], &[2, 3]]);
        assert!(check_rip(&c2).is_err());
        let (re, w) = rip_ordered(&c2).unwrap();
        assert!(check_rip(&re).is_ok());
        for (p, &i) in w.order.iter().enumerate() {
            assert_eq!(re.cliques()[p], c2.cliques()[i]);
        }
    }

    fn random_cover(n: usize, masks: &[u8]) -> Option<CliqueCover> {
        let mut cliques: Vec<Vec<usize>> = masks
            .iter()
            .map(|&mask| {
                (1..=n)
                    .filter(|v| mask & (1 << (v - 1)) != 0)
                    .collect::<Vec<_>>()
            })
            .filter(|c| !c.is_empty())
            .collect();
        cliques.sort();
        cliques.dedup();
        let mut keep: Vec<Vec<usize>> = cliques
            .iter()
            .filter(|a| !cliques.iter().any(|b| *a != b && is_subset_sorted(a, b)))
            .cloned()
            .collect();
        for v in 1..=n {
            if !keep.iter().any(|c| c.contains(&v)) {
                keep.push(vec![v]);
            }
        }
        CliqueCover::from_one_based(n, keep).ok()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn agrees_with_brute_force(masks in proptest::collection::vec(1u8..64, 1..=6)) {
            if let Some(c) = random_cover(6, &masks) {
                prop_assume!(c.len() <= 6);
                let found = find_rip_order(&c);
                prop_assert_eq!(found.is_ok(), brute_force_exists(&c));
                if let Ok(order) = found {
                    prop_assert!(check_rip(&c.reordered(&order).unwrap()).is_ok());
                }
            }
        }

        #[test]
        fn witnesses_survive_dropping_last(masks in proptest::collection::vec(1u8..32, 2..=6)) {
            if let Some(c) = random_cover(5, &masks) {
                prop_assume!(c.len() >= 2);
                let full = witness_sets(&c);
                // The shortened list may not cover every variable, so compare raw witness sets.
                let partial = witness_sets_of(&c.cliques()[..c.len() - 1]);
                prop_assert_eq!(&full[..full.len() - 1], &partial[..]);
            }
        }
    }
}
