//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed.
//! A criterion whose published number cannot be reproduced is reported as
//! `FAIL (known)` and does not change the exit status; any other failure does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smk_core::fixtures;
use smk_core::measure::same_point_set;
use smk_core::relax::{ingest_blocks, BlockKind, SolveStatus, SolverOptions};
use smk_core::{
    assemble, build_relaxation, certify, check_rip, emit_sdpa, enumerate_extreme_measures,
    extract_clique, find_rip_order, maximal_support_set, parse_sdpa, rip_ordered,
    solve_sdp_bundled, solve_weight_lp, verify_global, AtomicMeasure, CliqueCover,
    ConstraintPolynomial, Error, ExtractOptions, FlatnessCertificate, RankPolicy,
    SparseMomentVector,
};

type Outcome = Result<String, String>;
type RankPairs = Vec<(usize, usize)>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ranks(cert: &FlatnessCertificate<f64>) -> (RankPairs, RankPairs) {
    let cliques = cert
        .cliques
        .iter()
        .map(|c| (c.rank_full, c.rank_shifted))
        .collect();
    let overlaps = cert
        .overlaps
        .iter()
        .filter_map(|o| o.chosen_candidate())
        .map(|c| (c.rank_full, c.rank_shifted))
        .collect();
    (cliques, overlaps)
}

fn no_constraints(m: usize) -> Vec<Vec<ConstraintPolynomial<f64>>> {
    vec![Vec::new(); m]
}

fn recover(
    y: &SparseMomentVector<f64>,
    cert: &FlatnessCertificate<f64>,
    policy: &RankPolicy<f64>,
) -> Result<(Vec<AtomicMeasure<f64>>, AtomicMeasure<f64>), Error> {
    let opts = ExtractOptions::default();
    let measures = (0..y.cover().len())
        .map(|i| extract_clique(&y.clique_subvector(i)?, policy, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mu = assemble(&measures, y.cover(), &cert.parents(), 1e-6)?;
    Ok((measures, mu))
}

fn weights_all(mu: &AtomicMeasure<f64>, w: f64, tol: f64) -> bool {
    mu.weights().iter().all(|v| (v - w).abs() <= tol)
}

fn criterion_1() -> Outcome {
    let y = fixtures::example_chain_y::<f64>();
    ensure!(y.len() == 25, "{} entries", y.len());
    let policy = RankPolicy::default();
    let (_, w) = rip_ordered(y.cover()).map_err(|e| e.to_string())?;
    let cert = certify(&y, &no_constraints(2), &w, &policy).map_err(|e| e.to_string())?;
    let (c, o) = ranks(&cert);
    ensure!(cert.verdict, "verdict false");
    ensure!(
        c == vec![(2, 2), (2, 2)] && o == vec![(1, 1)],
        "ranks {c:?} overlaps {o:?}"
    );
    let (_, mu) = recover(&y, &cert, &policy).map_err(|e| e.to_string())?;
    let expected: Vec<Vec<f64>> = fixtures::chain_mu_lambda(0.25).atoms().to_vec();
    ensure!(
        same_point_set(mu.atoms(), &expected, 1e-8),
        "atoms {:?}",
        mu.atoms()
    );
    ensure!(weights_all(&mu, 0.25, 1e-10), "weights {:?}", mu.weights());
    let res = verify_global(&mu, &y).map_err(|e| e.to_string())?;
    ensure!(res <= 1e-10, "residual {res:e}");
    Ok(format!(
        "ranks 2/2 2/2, overlap 1/1, 4 atoms of weight 1/4, residual {res:.1e}"
    ))
}

fn criterion_2() -> Outcome {
    let pop = fixtures::example_pop::<f64>();
    let policy = RankPolicy::new(1e-6, Some(4)).map_err(|e| e.to_string())?;
    let blocks = fixtures::published_pop_matrices::<f64>();
    let (y, report) = ingest_blocks(pop.cover(), 3, &blocks, &policy).map_err(|e| e.to_string())?;
    ensure!(report.is_clean(), "ingest report {report:?}");
    let (_, w) = rip_ordered(pop.cover()).map_err(|e| e.to_string())?;
    let cert = certify(&y, pop.constraints(), &w, &policy).map_err(|e| e.to_string())?;
    let (c, o) = ranks(&cert);
    ensure!(cert.verdict, "verdict false; ranks {c:?} overlaps {o:?}");
    let full: Vec<usize> = c.iter().map(|r| r.0).collect();
    let over: Vec<usize> = o.iter().map(|r| r.0).collect();
    ensure!(
        full == vec![4, 2, 2] && over == vec![2, 1],
        "ranks {c:?} overlaps {o:?}"
    );
    let (_, mu) = recover(&y, &cert, &policy).map_err(|e| e.to_string())?;
    ensure!(mu.len() == 8, "{} atoms", mu.len());
    ensure!(
        same_point_set(mu.atoms(), &fixtures::example_pop_minimizers(), 1e-6),
        "atoms {:?}",
        mu.atoms()
    );
    ensure!(weights_all(&mu, 0.125, 1e-6), "weights {:?}", mu.weights());
    // Snap to the nearest integer point and test the constraints exactly.
    for x in mu.atoms() {
        let snapped: Vec<f64> = x.iter().map(|v| v.round()).collect();
        let g = pop.min_constraint(&snapped);
        ensure!(g >= 0.0, "constraint {g} at {snapped:?}");
        ensure!(
            pop.objective_value(&snapped) == 0.0,
            "objective at {snapped:?}"
        );
    }
    Ok("ranks (4,2,2), overlaps (2,1), 8 minimizers of weight 1/8, g >= 0".into())
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

fn criterion_3() -> Outcome {
    let y = fixtures::example_triangle_y::<f64>();
    let cover = y.cover().clone();
    ensure!(
        matches!(find_rip_order(&cover), Err(Error::NoOrderExists)),
        "an order was found"
    );
    let perms = permutations(3);
    let passing = perms
        .iter()
        .filter(|p| check_rip(&cover.reordered(p).expect("permutation")).is_ok())
        .count();
    ensure!(
        perms.len() == 6 && passing == 0,
        "{passing} of {} orders pass",
        perms.len()
    );

    let policy = RankPolicy::default();
    let opts = ExtractOptions::default();
    let expected = [
        vec![vec![1.0, 1.0], vec![-1.0, -1.0]],
        vec![vec![1.0, 1.0], vec![-1.0, -1.0]],
        vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
    ];
    let mut measures = Vec::new();
    for (i, atoms) in expected.iter().enumerate() {
        let sub = y.clique_subvector(i).map_err(|e| e.to_string())?;
        let mu = extract_clique(&sub, &policy, &opts).map_err(|e| e.to_string())?;
        ensure!(
            same_point_set(mu.atoms(), atoms, 1e-8),
            "clique {} atoms {:?}",
            i + 1,
            mu.atoms()
        );
        ensure!(
            weights_all(&mu, 0.5, 1e-8),
            "clique {} weights {:?}",
            i + 1,
            mu.weights()
        );
        measures.push(mu);
    }
    let x = maximal_support_set(&measures, &cover, 1e-6).map_err(|e| e.to_string())?;
    ensure!(x.is_empty(), "maximal support set {x:?}");
    match assemble(&measures, &cover, &[None, Some(0), Some(1)], 1e-6) {
        Err(Error::FinalMarginalCheckFailed { clique, .. }) => Ok(format!(
            "NoOrderExists (0/6 orders), clique measures match, X empty, final check fails at clique {clique}"
        )),
        other => Err(format!("forced assembly gave {other:?}")),
    }
}

fn criterion_4() -> Outcome {
    let y = fixtures::example_chain_y::<f64>();
    let atoms = fixtures::chain_mu_lambda(0.25).atoms().to_vec();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(u, v)| (u - v).abs() <= 1e-8);
    let g1 =
        solve_weight_lp(&atoms, &y, &[1.0, 0.0, 0.0, 0.0], 1e-12).map_err(|e| e.to_string())?;
    ensure!(close(&g1, &[0.0, 0.5, 0.5, 0.0]), "cost 1 gives {g1:?}");
    let g2 =
        solve_weight_lp(&atoms, &y, &[0.0, 1.0, 0.0, 0.0], 1e-12).map_err(|e| e.to_string())?;
    ensure!(close(&g2, &[0.5, 0.0, 0.0, 0.5]), "cost 2 gives {g2:?}");
    let found = enumerate_extreme_measures(&atoms, &y, 20, 42).map_err(|e| e.to_string())?;
    ensure!(found.len() == 2, "{} vertices: {found:?}", found.len());
    ensure!(
        close(&found[0], &[0.5, 0.0, 0.0, 0.5]) && close(&found[1], &[0.0, 0.5, 0.5, 0.0]),
        "vertices {found:?}"
    );
    Ok("(0,1/2,1/2,0) and (1/2,0,0,1/2); budget 20 finds exactly 2".into())
}

fn criterion_5_structure() -> Outcome {
    let inst = build_relaxation(&fixtures::example_pop::<f64>(), 3).map_err(|e| e.to_string())?;
    let sizes = |moment: bool| -> Vec<usize> {
        inst.blocks
            .iter()
            .filter(|b| matches!(b.kind, BlockKind::Moment { .. }) == moment)
            .map(|b| b.size)
            .collect()
    };
    ensure!(
        sizes(true) == vec![10, 10, 10],
        "moment blocks {:?}",
        sizes(true)
    );
    ensure!(
        sizes(false) == vec![6, 6, 6],
        "localizing blocks {:?}",
        sizes(false)
    );
    let text = emit_sdpa(&inst);
    let back = parse_sdpa::<f64>(&text).map_err(|e| e.to_string())?;
    ensure!(back == inst, "parsed instance differs");
    ensure!(emit_sdpa(&back) == text, "re-emitted text differs");
    Ok(format!(
        "3 moment blocks 10x10, 3 localizing blocks 6x6, SDPA round trip exact ({} bytes)",
        text.len()
    ))
}

fn criterion_5_count() -> Outcome {
    let inst = build_relaxation(&fixtures::example_pop::<f64>(), 3).map_err(|e| e.to_string())?;
    let got = inst.num_variables();
    // Three 2-variable cliques of degree <= 6 have 28 moments each; the two
    // single-variable overlaps share 7 each: 3*28 - 2*7 = 70.
    ensure!(
        got == 116,
        "{got} variables, expected 116 (3*28 - 2*7 = 70 by direct count)"
    );
    Ok("116 variables".into())
}

/// A random cover in running-intersection order built as a junction tree,
/// then shuffled.
fn random_cover(rng: &mut ChaCha8Rng) -> CliqueCover {
    let m = rng.random_range(1..=4);
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    let mut n = 0;
    for i in 0..m {
        let mut c: Vec<usize> = Vec::new();
        if i > 0 {
            let parent = &cliques[rng.random_range(0..i)];
            let keep = rng.random_range(0..parent.len().min(2));
            let mut pool = parent.clone();
            for _ in 0..keep {
                let k = rng.random_range(0..pool.len());
                c.push(pool.swap_remove(k));
            }
        }
        let fresh = rng.random_range(1..=(3 - c.len()));
        for _ in 0..fresh {
            c.push(n);
            n += 1;
        }
        c.sort_unstable();
        cliques.push(c);
    }
    for i in (1..cliques.len()).rev() {
        let j = rng.random_range(0..=i);
        cliques.swap(i, j);
    }
    CliqueCover::new(n, cliques).expect("junction tree cliques form a cover")
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> AtomicMeasure<f64> {
    let r = rng.random_range(1..=3);
    let mut atoms: Vec<Vec<f64>> = Vec::new();
    while atoms.len() < r {
        let x: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-2..=2) as f64 * 0.5)
            .collect();
        if !atoms.contains(&x) {
            atoms.push(x);
        }
    }
    let weights = (0..r).map(|_| rng.random_range(0.2..1.0)).collect();
    AtomicMeasure::new((0..n).collect(), atoms, weights).expect("random measure")
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let policy = RankPolicy::default();
    let instances = 250;
    let mut worst = 0.0f64;
    for t in 0..instances {
        let cover = random_cover(&mut rng);
        let mu0 = random_measure(&mut rng, cover.n());
        let ctx = || {
            format!(
                "instance {t}: cover {:?}, atoms {:?}",
                cover.to_one_based(),
                mu0.atoms()
            )
        };
        let (ordered, w) = rip_ordered(&cover).map_err(|e| format!("{}: {e}", ctx()))?;
        let y = SparseMomentVector::from_measure(ordered.clone(), 3, &mu0)
            .map_err(|e| format!("{}: {e}", ctx()))?;
        let cert = certify(&y, &no_constraints(ordered.len()), &w, &policy)
            .map_err(|e| format!("{}: {e}", ctx()))?;
        ensure!(cert.verdict, "{}: verdict false {:?}", ctx(), ranks(&cert));
        let (measures, mu) = recover(&y, &cert, &policy).map_err(|e| format!("{}: {e}", ctx()))?;
        let res = verify_global(&mu, &y).map_err(|e| format!("{}: {e}", ctx()))?;
        ensure!(res <= 1e-6, "{}: residual {res:e}", ctx());
        let x = maximal_support_set(&measures, &ordered, 1e-6).map_err(|e| e.to_string())?;
        ensure!(
            same_point_set(mu.atoms(), &x, 1e-6),
            "{}: support differs from X",
            ctx()
        );
        worst = worst.max(res);
    }
    Ok(format!(
        "{instances} random instances, worst residual {worst:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let inst = build_relaxation(&fixtures::example_pop::<f64>(), 3).map_err(|e| e.to_string())?;
    let rep = solve_sdp_bundled(&inst, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let line = format!(
        "status {:?} after {} iterations, objective {:.2e}, cone distance {:.1e}",
        rep.status, rep.iterations, rep.objective, rep.cone_distance
    );
    ensure!(rep.objective <= 1e-3, "{line}");
    ensure!(rep.cone_distance <= 1e-5, "{line}");
    ensure!(
        rep.status == SolveStatus::Converged || rep.primal_residual > 0.0,
        "{line}"
    );
    Ok(line)
}

struct Criterion {
    id: &'static str,
    run: fn() -> Outcome,
    budget: Option<Duration>,
    known_conflict: bool,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: "1",
            run: criterion_1,
            budget: Some(secs(1)),
            known_conflict: false,
        },
        Criterion {
            id: "2",
            run: criterion_2,
            budget: Some(secs(1)),
            known_conflict: false,
        },
        Criterion {
            id: "3",
            run: criterion_3,
            budget: Some(secs(1)),
            known_conflict: false,
        },
        Criterion {
            id: "4",
            run: criterion_4,
            budget: None,
            known_conflict: false,
        },
        Criterion {
            id: "5",
            run: criterion_5_structure,
            budget: None,
            known_conflict: false,
        },
        Criterion {
            id: "5-count",
            run: criterion_5_count,
            budget: None,
            known_conflict: true,
        },
        Criterion {
            id: "6",
            run: criterion_6,
            budget: Some(secs(60)),
            known_conflict: false,
        },
        Criterion {
            id: "7",
            run: criterion_7,
            budget: None,
            known_conflict: false,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|_| Err("panicked".into()))
            .and_then(|msg| match c.budget {
                Some(b) if start.elapsed() > b => Err(format!(
                    "{msg}; took {:.2?} (budget {b:?})",
                    start.elapsed()
                )),
                _ => Ok(msg),
            });
        let took = start.elapsed();
        match outcome {
            Ok(msg) => println!("criterion {}: PASS ({took:.2?}) {msg}", c.id),
            Err(msg) if c.known_conflict => {
                println!("criterion {}: FAIL (known) ({took:.2?}) {msg}", c.id)
            }
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL ({took:.2?}) {msg}", c.id)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
