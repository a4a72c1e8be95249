//! Batch front end for `smk-core`. Every run produces one JSON report and
//! an exit code: 0 success, 2 valid but uncertified result, 1 error,
//! 64 usage error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use smk_core::io::{
    certificate_json, constraints_from_json, ConstraintsJson, MomentVectorJson, PopJson,
};
use smk_core::relax::{
    ingest_primal, parse_primal_vector, PipelineOptions, SolutionSource, SolveReport, SolveStatus,
    SolverOptions,
};
use smk_core::{
    assemble, build_relaxation, certify, check_rip, emit_sdpa, enumerate_extreme_measures,
    extract_clique, maximal_support_set, pipeline, rip_ordered, solve_sdp_bundled, solve_weight_lp,
    verify_global, verify_measure_against_subvector, CliqueCover, ConstraintPolynomial, Error,
    ExtractOptions, RankPolicy, SparseMomentVector, WeightLp,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNCERTIFIED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "smk",
    version,
    about = "Flatness certificates and minimizer recovery for sparse moment relaxations"
)]
pub struct Cli {
    #[command(flatten)]
    pub knobs: Knobs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Knobs {
    /// Relative singular-value cutoff for numerical rank, in (0, 1).
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub rel_tol: f64,
    /// Round moments to this many decimals before any rank decision.
    #[arg(long = "round", global = true, value_parser = clap::value_parser!(u32).range(0..=15))]
    pub round_decimals: Option<u32>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Distance below which two points count as the same atom.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub merge_tol: f64,
    /// Read absent moment entries as zero instead of failing.
    #[arg(long, global = true)]
    pub allow_missing_as_zero: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Log more (repeatable); `SMK_LOG` takes precedence.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the running intersection property and find a clique order.
    Rip {
        /// Any JSON file with `n` and `cliques` (moment vector or POP).
        #[arg(long)]
        input: PathBuf,
    },
    /// Certify a moment vector.
    Certify {
        #[arg(long)]
        input: PathBuf,
        /// Constraints (a POP file works too).
        #[arg(long)]
        constraints: Option<PathBuf>,
    },
    /// Certify, extract clique measures, assemble and verify.
    ExtractAssemble {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        constraints: Option<PathBuf>,
    },
    /// Weights on a fixed atom set reproducing a moment vector.
    Altmeasure {
        #[arg(long)]
        input: PathBuf,
        /// JSON with an `atoms` list (a measure file works too).
        #[arg(long)]
        atoms: PathBuf,
        /// Comma-separated cost vector, or `random:N` to enumerate vertices.
        #[arg(long)]
        cost: String,
    },
    /// Build the relaxation and write it in SDPA sparse format.
    Relax {
        #[arg(long)]
        pop: PathBuf,
        #[arg(long)]
        omega: u32,
        #[arg(long)]
        sdpa: PathBuf,
    },
    /// Solve the relaxation with the bundled first-order solver.
    Solve {
        #[arg(long)]
        pop: PathBuf,
        #[arg(long)]
        omega: u32,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Relax, solve or ingest, certify and recover minimizers.
    Pipeline {
        #[arg(long)]
        pop: PathBuf,
        #[arg(long)]
        omega: u32,
        /// Moment-vector JSON from an external solve.
        #[arg(long, conflicts_with = "primal")]
        solution: Option<PathBuf>,
        /// Whitespace-separated primal vector in SDPA variable order.
        #[arg(long)]
        primal: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            ..SolverOptions::default()
        }
    }
}

/// Parsed and validated invocation.
#[derive(Debug)]
pub struct RunConfig {
    pub command: Command,
    pub knobs: Knobs,
    pub policy: RankPolicy<f64>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let k = &cli.knobs;
        if !(k.merge_tol > 0.0 && k.merge_tol < 1.0) {
            return Err(format!(
                "--merge-tol must lie in (0, 1), got {}",
                k.merge_tol
            ));
        }
        let policy = RankPolicy::new(k.rel_tol, k.round_decimals).map_err(|e| e.to_string())?;
        Ok(RunConfig {
            command: cli.command,
            knobs: cli.knobs,
            policy,
        })
    }

    fn extract_options(&self) -> ExtractOptions {
        ExtractOptions {
            seed: self.knobs.seed,
            merge_tol: self.knobs.merge_tol,
            ..ExtractOptions::default()
        }
    }

    fn config_json(&self) -> Value {
        json!({
            "rel_tol": self.knobs.rel_tol,
            "round_decimals": self.knobs.round_decimals,
            "seed": self.knobs.seed,
            "merge_tol": self.knobs.merge_tol,
            "allow_missing_as_zero": self.knobs.allow_missing_as_zero,
        })
    }
}

/// Exit code and report of one run.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

/// Parses `argv` (program name first) and runs it. Never panics on bad input.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return Outcome {
                code: if shown { EXIT_OK } else { EXIT_USAGE },
                report: json!({ "status": if shown { "help" } else { "usage_error" }, "message": e.to_string() }),
            };
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            return Outcome {
                code: EXIT_USAGE,
                report: json!({ "status": "usage_error", "message": msg }),
            }
        }
    };
    let mut outcome = match dispatch(&cfg) {
        Ok(o) => o,
        Err(e) => Outcome {
            code: EXIT_ERROR,
            report: json!({ "status": "error", "error": e.to_string() }),
        },
    };
    if let Some(map) = outcome.report.as_object_mut() {
        map.insert("config".into(), cfg.config_json());
    }
    outcome
}

/// Serializes the report deterministically and writes it where asked.
pub fn emit(outcome: &Outcome, output: Option<&Path>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&outcome.report).expect("report is valid JSON") + "\n";
    match output {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Deserialize)]
struct CoverJson {
    n: usize,
    cliques: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct AtomsJson {
    atoms: Vec<Vec<f64>>,
}

fn load_vector(cfg: &RunConfig, path: &Path) -> Result<SparseMomentVector<f64>, Error> {
    let j: MomentVectorJson = read_json(path)?;
    let y = j.to_vector(cfg.knobs.allow_missing_as_zero)?;
    Ok(match cfg.policy.round_decimals {
        Some(d) => y.rounded(d),
        None => y,
    })
}

fn load_constraints(
    path: Option<&PathBuf>,
    cover: &CliqueCover,
) -> Result<Vec<Vec<ConstraintPolynomial<f64>>>, Error> {
    match path {
        Some(p) => {
            let j: ConstraintsJson = read_json(p)?;
            constraints_from_json(&j.constraints, cover)
        }
        None => Ok(vec![Vec::new(); cover.len()]),
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn dispatch(cfg: &RunConfig) -> Result<Outcome, Error> {
    match &cfg.command {
        Command::Rip { input } => cmd_rip(input),
        Command::Certify { input, constraints } => {
            cmd_certify(cfg, input, constraints.as_ref(), false)
        }
        Command::ExtractAssemble { input, constraints } => {
            cmd_certify(cfg, input, constraints.as_ref(), true)
        }
        Command::Altmeasure { input, atoms, cost } => cmd_altmeasure(cfg, input, atoms, cost),
        Command::Relax { pop, omega, sdpa } => cmd_relax(pop, *omega, sdpa),
        Command::Solve { pop, omega, solver } => cmd_solve(pop, *omega, solver),
        Command::Pipeline {
            pop,
            omega,
            solution,
            primal,
            solver,
        } => cmd_pipeline(cfg, pop, *omega, solution.as_ref(), primal.as_ref(), solver),
    }
}

fn cmd_rip(input: &Path) -> Result<Outcome, Error> {
    let j: CoverJson = read_json(input)?;
    let cover = CliqueCover::from_one_based(j.n, j.cliques)?;
    let fails_at = match check_rip(&cover) {
        Err(Error::RipFailsAt { clique }) => Some(clique + 1),
        Err(e) => return Err(e),
        Ok(_) => None,
    };
    match rip_ordered(&cover) {
        Ok((_, w)) => Ok(Outcome {
            code: EXIT_OK,
            report: json!({
                "status": "ok",
                "input_order_fails_at": fails_at,
                "order": one_based(&w.order),
                "witnesses": w.witness.iter().map(|s| one_based(s)).collect::<Vec<_>>(),
            }),
        }),
        Err(Error::NoOrderExists) => Ok(Outcome {
            code: EXIT_UNCERTIFIED,
            report: json!({
                "status": "NoOrderExists",
                "input_order_fails_at": fails_at,
            }),
        }),
        Err(e) => Err(e),
    }
}

fn cmd_certify(
    cfg: &RunConfig,
    input: &Path,
    constraints: Option<&PathBuf>,
    recover: bool,
) -> Result<Outcome, Error> {
    let y = load_vector(cfg, input)?;
    let by_clique = load_constraints(constraints, y.cover())?;
    let (cover, w) = match rip_ordered(y.cover()) {
        Ok(r) => r,
        Err(Error::NoOrderExists) => {
            return Ok(Outcome {
                code: EXIT_UNCERTIFIED,
                report: json!({ "status": "NoOrderExists", "verdict": false }),
            })
        }
        Err(e) => return Err(e),
    };
    let order = w.order.clone();
    let constraints_r: Vec<Vec<ConstraintPolynomial<f64>>> = order
        .iter()
        .enumerate()
        .map(|(p, &i)| {
            by_clique[i]
                .iter()
                .map(|g| ConstraintPolynomial::new(p, g.poly().clone()))
                .collect()
        })
        .collect();
    let y_r = y.with_cover(cover.clone())?;
    let cert = certify(&y_r, &constraints_r, &w, &cfg.policy)?;
    let mut report = json!({
        "status": if cert.verdict { "certified" } else { "not_certified" },
        "verdict": cert.verdict,
        "certificate": certificate_json(&cert, &order),
    });
    if !cert.verdict {
        return Ok(Outcome {
            code: EXIT_UNCERTIFIED,
            report,
        });
    }
    if recover {
        let opts = cfg.extract_options();
        let tol = cfg.knobs.merge_tol;
        let mut measures = Vec::with_capacity(cover.len());
        let mut clique_residuals = Vec::with_capacity(cover.len());
        for i in 0..cover.len() {
            let sub = y_r.clique_subvector(i)?;
            let mu = extract_clique(&sub, &cfg.policy, &opts)?;
            clique_residuals.push(verify_measure_against_subvector(&mu, &sub)?);
            measures.push(mu);
        }
        let mu = assemble(&measures, &cover, &cert.parents(), tol)?;
        let residual = verify_global(&mu, &y_r)?;
        let support = maximal_support_set(&measures, &cover, tol)?;
        let global: Vec<ConstraintPolynomial<f64>> = by_clique
            .iter()
            .enumerate()
            .flat_map(|(i, gs)| {
                let c = y.cover().cliques()[i].clone();
                let n = y.cover().n();
                gs.iter()
                    .map(move |g| ConstraintPolynomial::new(i, g.poly().lift(&c, n)))
            })
            .collect();
        let feasibility = smk_core::constraint_feasibility_check(&mu, &global, tol)?;
        report["clique_measures"] = measures
            .iter()
            .zip(&order)
            .map(|(m, &i)| json!({ "clique": i + 1, "measure": m.to_json() }))
            .collect();
        report["clique_residuals"] = json!(clique_residuals);
        report["measure"] = serde_json::to_value(mu.to_json())?;
        report["global_residual"] = json!(residual);
        report["maximal_support_size"] = json!(support.len());
        report["feasibility"] = serde_json::to_value(&feasibility)?;
    }
    Ok(Outcome {
        code: EXIT_OK,
        report,
    })
}

fn cmd_altmeasure(
    cfg: &RunConfig,
    input: &Path,
    atoms: &Path,
    cost: &str,
) -> Result<Outcome, Error> {
    let y = load_vector(cfg, input)?;
    let a: AtomsJson = read_json(atoms)?;
    let lp = WeightLp::new(&a.atoms, &y)?;
    let reduced: Vec<Vec<u32>> = lp
        .reduced_rows()
        .iter()
        .map(|r| r.exponents().to_vec())
        .collect();
    let mut report = json!({
        "status": "ok",
        "atoms": a.atoms,
        "rank": lp.rank(),
        "reduced_rows": reduced,
    });
    if let Some(n) = cost.strip_prefix("random:") {
        let budget: usize = n
            .parse()
            .map_err(|_| Error::Invalid(format!("bad budget in --cost {cost}")))?;
        let found = enumerate_extreme_measures(&a.atoms, &y, budget, cfg.knobs.seed)?;
        report["budget"] = json!(budget);
        report["vertices"] = json!(found);
    } else {
        let c = cost
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Error::Invalid(format!("bad --cost {cost}")))?;
        let gamma = solve_weight_lp(&a.atoms, &y, &c, 1e-12)?;
        report["cost"] = json!(c);
        report["weights"] = json!(gamma);
        report["residual"] = json!(lp.residual(&gamma));
    }
    Ok(Outcome {
        code: EXIT_OK,
        report,
    })
}

fn cmd_relax(pop: &Path, omega: u32, sdpa: &Path) -> Result<Outcome, Error> {
    let pop = read_json::<PopJson>(pop)?.to_problem::<f64>()?;
    let inst = build_relaxation(&pop, omega)?;
    fs::write(sdpa, emit_sdpa(&inst))?;
    let blocks: Vec<Value> = inst
        .blocks
        .iter()
        .map(|b| json!({ "kind": format!("{:?}", b.kind), "size": b.size }))
        .collect();
    Ok(Outcome {
        code: EXIT_OK,
        report: json!({
            "status": "ok",
            "omega": omega,
            "variables": inst.num_variables(),
            "free_variables": inst.num_variables() - 1,
            "blocks": blocks,
            "sdpa": sdpa.display().to_string(),
        }),
    })
}

fn solve_json(rep: &SolveReport<f64>) -> Value {
    json!({
        "status": format!("{:?}", rep.status),
        "source": rep.source,
        "objective": rep.objective,
        "iterations": rep.iterations,
        "primal_residual": rep.primal_residual,
        "dual_residual": rep.dual_residual,
        "cone_distance": rep.cone_distance,
    })
}

fn cmd_solve(pop: &Path, omega: u32, solver: &SolverArgs) -> Result<Outcome, Error> {
    let pop = read_json::<PopJson>(pop)?.to_problem::<f64>()?;
    let inst = build_relaxation(&pop, omega)?;
    let rep = solve_sdp_bundled(&inst, &solver.options())?;
    let converged = rep.status == SolveStatus::Converged;
    Ok(Outcome {
        code: if converged { EXIT_OK } else { EXIT_UNCERTIFIED },
        report: json!({
            "status": if converged { "converged" } else { "not_converged" },
            "solve": solve_json(&rep),
            "solution": MomentVectorJson::from_vector(&rep.y),
        }),
    })
}

fn cmd_pipeline(
    cfg: &RunConfig,
    pop_path: &Path,
    omega: u32,
    solution: Option<&PathBuf>,
    primal: Option<&PathBuf>,
    solver: &SolverArgs,
) -> Result<Outcome, Error> {
    let pop = read_json::<PopJson>(pop_path)?.to_problem::<f64>()?;
    let mut ingest = None;
    let source = if let Some(path) = solution {
        SolutionSource::Provided(load_vector(cfg, path)?)
    } else if let Some(path) = primal {
        let inst = build_relaxation(&pop, omega)?;
        let free = parse_primal_vector::<f64>(&fs::read_to_string(path)?)?;
        let (y, report) = ingest_primal(&inst, &free, &cfg.policy)?;
        ingest = Some(report);
        SolutionSource::Provided(y)
    } else {
        SolutionSource::Bundled(solver.options())
    };
    let opts = PipelineOptions {
        policy: cfg.policy,
        extract: cfg.extract_options(),
        merge_tol: cfg.knobs.merge_tol,
        feas_tol: 1e-6,
    };
    let rep = pipeline(&pop, omega, source, &opts)?;
    let verdict = rep.certificate.verdict;
    let f = rep.f_omega;
    let gap_tol = 1e-5 * (1.0 + f.abs());
    let max_gap = rep
        .objective_at_minimizers
        .iter()
        .fold(0.0f64, |m, &v| m.max(v - f));
    let mut report = json!({
        "status": if verdict { "certified" } else { "bound_only" },
        "verdict": verdict,
        "f_omega": f,
        "certificate": certificate_json(&rep.certificate, &rep.clique_order),
        "solve": rep.solve.as_ref().map(solve_json),
        "ingest": ingest,
    });
    if let Some(mu) = &rep.measure {
        report["minimizers"] = json!(mu.atoms());
        report["measure"] = serde_json::to_value(mu.to_json())?;
        report["objective_at_minimizers"] = json!(rep.objective_at_minimizers);
        report["max_gap"] = json!(max_gap);
        report["gap_within_tolerance"] = json!(max_gap <= gap_tol);
        report["global_residual"] = json!(rep.global_residual);
        report["feasibility"] = serde_json::to_value(&rep.feasibility)?;
    }
    Ok(Outcome {
        code: if verdict { EXIT_OK } else { EXIT_UNCERTIFIED },
        report,
    })
}
