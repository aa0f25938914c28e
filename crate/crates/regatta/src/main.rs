//! Command-line front end for the pairing-list toolkit.
//!
//! Every subcommand prints a JSON report (with a `schema_version` field) to
//! standard output unless noted otherwise; diagnostics go to standard
//! error. Exit codes: 0 success/feasible/valid, 1 definitive negative
//! (invalid plan, infeasible probe, impossible parameters), 2 usage or
//! input error, 3 budget exhausted with no verdict.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use regatta::analysis;
use regatta::budget::Budget;
use regatta::catalog;
use regatta::core::{LeagueParams, PlanMode, TournamentPlan};
use regatta::modelgen::{
    self,
    lp::{self, ExportFormat},
    solution, Formulation, GenOptions,
};
use regatta::solver::{self, SolveOptions, SolveStatus};
use regatta::transforms;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "regatta",
    version,
    about = "Sailing-league pairing lists: analysis, transforms, exact search, model export"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a plan's structure against the strict or relaxed rules.
    Validate {
        #[command(flatten)]
        input: PlanInput,
        /// Allow skipped flights (0 entries).
        #[arg(long)]
        relaxed: bool,
    },
    /// Pairing counts and utility of a plan.
    Analyze {
        #[command(flatten)]
        input: PlanInput,
        /// Print the pairing matrix as a grid instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Necessary conditions for a perfect pairing list.
    CheckParams {
        teams: u32,
        flights: u32,
        inrace: u32,
    },
    /// Scan nearby parameter triples for candidates that pass all
    /// necessary conditions.
    ScanParams {
        teams: u32,
        flights: u32,
        inrace: u32,
        #[arg(long, default_value_t = 3)]
        dt: u32,
        #[arg(long, default_value_t = 3)]
        df: u32,
        #[arg(long, default_value_t = 2)]
        dr: u32,
        /// Print a tab-separated table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// List bundled plans, or show one by name.
    Catalog {
        name: Option<String>,
        /// Dump the raw plan file instead of JSON.
        #[arg(long)]
        raw: bool,
    },
    /// Remove, append, repeat, or search removals of flights.
    Transform {
        #[command(flatten)]
        input: PlanInput,
        /// Comma-separated 0-based flight indices to remove.
        #[arg(long, value_delimiter = ',')]
        remove: Vec<usize>,
        /// Append the flights of this plan file.
        #[arg(long)]
        add_from_file: Option<PathBuf>,
        /// Concatenate N copies of the plan.
        #[arg(long)]
        repeat: Option<u32>,
        /// Search for the K flights whose removal minimizes utility.
        #[arg(long, value_name = "K")]
        search_removal: Option<usize>,
        #[arg(long, env = "REGATTA_BUDGET_SECS")]
        budget_secs: Option<u64>,
        #[arg(long, env = "REGATTA_SEED", default_value_t = 0)]
        seed: u64,
        /// Write the resulting plan file here (also embedded in the JSON).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact minimization of the utility.
    Solve {
        #[command(flatten)]
        search: SearchArgs,
        /// Write the best plan file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a plan with all pairing counts in [a, b].
    Probe {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        a: u32,
        #[arg(long)]
        b: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best utility plus an exhaustion certificate for every better window.
    ProveOptimal {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extend a plan flight-block by flight-block, minimizing utility
    /// greedily.
    Greedy {
        /// Plan file to extend.
        #[arg(long)]
        prefix: PathBuf,
        /// Total number of flights to reach.
        #[arg(long)]
        flights: u32,
        /// Flights appended and optimized per block.
        #[arg(long, default_value_t = 1)]
        step: u32,
        #[arg(long, env = "REGATTA_BUDGET_SECS")]
        budget_secs: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit an optimization model as LP text.
    ExportModel {
        /// Parameters as T,F,R.
        #[arg(long, value_parser = parse_params)]
        params: LeagueParams,
        /// bqp | ilp-race | ilp-flight
        #[arg(long)]
        formulation: String,
        /// lp | lp-linear
        #[arg(long, default_value = "lp")]
        format: String,
        #[arg(long)]
        symmetry: bool,
        #[arg(long)]
        relax_linearization: bool,
        /// Comma-separated 1-based team ids whose pairing variables become
        /// continuous (flight-level model).
        #[arg(long, value_delimiter = ',')]
        relax_teams: Vec<u32>,
        #[arg(long)]
        relax_one_per_equality: bool,
        #[arg(long)]
        fix_a: Option<u32>,
        #[arg(long)]
        fix_b: Option<u32>,
        /// Write the LP text here; the JSON summary goes to stdout.
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a plan from a solver's solution file.
    ImportSolution {
        /// LP model file previously exported.
        #[arg(long)]
        model: PathBuf,
        /// Solution file of `name value` lines.
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PlanInput {
    /// Plan file path.
    file: Option<PathBuf>,
    /// Bundled plan name (see `catalog`).
    #[arg(long, conflicts_with = "file")]
    builtin: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    /// Parameters as T,F,R.
    #[arg(long, value_parser = parse_params)]
    params: LeagueParams,
    #[arg(long, env = "REGATTA_BUDGET_SECS")]
    budget_secs: Option<u64>,
    #[arg(long)]
    budget_nodes: Option<u64>,
    #[arg(long, env = "REGATTA_THREADS", default_value_t = 1)]
    threads: usize,
    #[arg(long, env = "REGATTA_SEED", default_value_t = 0)]
    seed: u64,
    /// Pin the first flight to the consecutive-blocks partition.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    symmetry: bool,
}

impl SearchArgs {
    fn budget(&self) -> Budget {
        Budget {
            max_nodes: self.budget_nodes,
            max_time: self.budget_secs.map(std::time::Duration::from_secs),
        }
    }

    fn options(&self) -> SolveOptions {
        SolveOptions { symmetry: self.symmetry, threads: self.threads, seed: self.seed }
    }
}

fn parse_params(s: &str) -> Result<LeagueParams, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected T,F,R".into());
    }
    let nums: Vec<u32> = parts
        .iter()
        .map(|p| p.trim().parse().map_err(|_| format!("{p:?} is not a number")))
        .collect::<Result<_, _>>()?;
    LeagueParams::new(nums[0], nums[1], nums[2]).map_err(|e| e.to_string())
}

/// A handler failure carrying its exit code; exit codes for ordinary
/// verdicts are returned directly.
struct Failure {
    code: u8,
    message: String,
}

fn usage(msg: impl ToString) -> Failure {
    Failure { code: 2, message: msg.to_string() }
}

fn negative(msg: impl ToString) -> Failure {
    Failure { code: 1, message: msg.to_string() }
}

impl PlanInput {
    fn load(&self) -> Result<TournamentPlan, Failure> {
        match (&self.file, &self.builtin) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                catalog::parse_plan(&text).map_err(usage)
            }
            (None, Some(name)) => catalog::load_builtin(name).map_err(usage),
            _ => Err(usage("give exactly one of a plan file or --builtin NAME")),
        }
    }
}

fn params_json(p: &LeagueParams) -> serde_json::Value {
    json!({ "teams": p.n_teams(), "flights": p.n_flights(), "inrace": p.n_inrace() })
}

fn emit(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    if let Some(path) = path {
        std::fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Cmd) -> Result<u8, Failure> {
    match cmd {
        Cmd::Validate { input, relaxed } => {
            let plan = input.load()?;
            let mode = if relaxed { PlanMode::Relaxed } else { PlanMode::Strict };
            let report = plan.validate(mode);
            let valid = report.is_valid();
            emit(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "validate",
                "params": params_json(plan.params()),
                "mode": mode,
                "valid": valid,
                "violations": report.violations,
            }));
            Ok(if valid { 0 } else { 1 })
        }
        Cmd::Analyze { input, table } => {
            let plan = input.load()?;
            let matrix = plan.pairing_matrix();
            if table {
                let n = matrix.n_teams();
                for k in 0..n {
                    let row: Vec<String> = (0..n)
                        .map(|l| if k == l { "-".into() } else { matrix.count(k, l).to_string() })
                        .collect();
                    println!("{}", row.join("\t"));
                }
            } else {
                emit(&json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": "analyze",
                    "params": params_json(plan.params()),
                    "mode": plan.mode(),
                    "report": matrix.utility(),
                }));
            }
            Ok(0)
        }
        Cmd::CheckParams { teams, flights, inrace } => {
            let params = LeagueParams::new(teams, flights, inrace).map_err(usage)?;
            let verdict = analysis::check_params(&params);
            let lambda = analysis::lambda_avg(&params);
            let possible =
                verdict.perfect_possible == analysis::PerfectPossible::PassesNecessaryConditions;
            emit(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "check-params",
                "params": params_json(&params),
                "lambda_avg_num": lambda.numer(),
                "lambda_avg_den": lambda.denom(),
                "verdict": verdict,
            }));
            Ok(if possible { 0 } else { 1 })
        }
        Cmd::ScanParams { teams, flights, inrace, dt, df, dr, table } => {
            let base = LeagueParams::new(teams, flights, inrace).map_err(usage)?;
            let rows = analysis::scan_nearby(&base, dt, df, dr);
            if table {
                print!("{}", analysis::scan_table(&rows));
            } else {
                let items: Vec<serde_json::Value> = rows
                    .iter()
                    .map(|(p, lambda)| {
                        json!({
                            "teams": p.n_teams(),
                            "flights": p.n_flights(),
                            "inrace": p.n_inrace(),
                            "lambda": lambda,
                        })
                    })
                    .collect();
                emit(&json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": "scan-params",
                    "base": params_json(&base),
                    "ranges": { "dt": dt, "df": df, "dr": dr },
                    "candidates": items,
                }));
            }
            Ok(0)
        }
        Cmd::Catalog { name, raw } => match name {
            None => {
                emit(&json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": "catalog",
                    "builtins": catalog::BUILTIN_NAMES,
                }));
                Ok(0)
            }
            Some(name) => {
                let source = catalog::builtin_source(&name).map_err(usage)?;
                if raw {
                    print!("{source}");
                } else {
                    let plan = catalog::load_builtin(&name).map_err(usage)?;
                    emit(&json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "catalog",
                        "name": name,
                        "params": params_json(plan.params()),
                        "mode": plan.mode(),
                        "report": plan.utility(),
                        "plan": catalog::serialize_plan(&plan),
                    }));
                }
                Ok(0)
            }
        },
        Cmd::Transform {
            input,
            remove,
            add_from_file,
            repeat,
            search_removal,
            budget_secs,
            seed,
            out,
        } => {
            let plan = input.load()?;
            let before = plan.utility().utility;
            let chosen = usize::from(!remove.is_empty())
                + usize::from(add_from_file.is_some())
                + usize::from(repeat.is_some())
                + usize::from(search_removal.is_some());
            if chosen != 1 {
                return Err(usage(
                    "give exactly one of --remove, --add-from-file, --repeat, --search-removal",
                ));
            }
            let budget = budget_secs.map_or_else(Budget::unlimited, Budget::seconds);
            let (result, k) = if !remove.is_empty() {
                (transforms::remove_flights(&plan, &remove).map_err(usage)?, remove.len() as u32)
            } else if let Some(path) = add_from_file {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                let extra = catalog::parse_plan(&text).map_err(usage)?;
                if extra.params().n_teams() != plan.params().n_teams() {
                    return Err(usage("appended plan has a different team count"));
                }
                let rows: Vec<Vec<u32>> = extra.grid().to_vec();
                let k = rows.len() as u32;
                (transforms::add_flights(&plan, &rows).map_err(usage)?, k)
            } else if let Some(n) = repeat {
                let k = plan.params().n_flights() * n.saturating_sub(1);
                (transforms::repeat(&plan, n).map_err(usage)?, k)
            } else {
                let k = search_removal.expect("one option is set");
                (
                    transforms::best_removal_search(&plan, k, budget, seed).map_err(usage)?,
                    k as u32,
                )
            };
            let bound = transforms::bound_for_change(before, k);
            let text = catalog::serialize_plan(&result);
            write_out(&out, &text)?;
            emit(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "transform",
                "params": params_json(result.params()),
                "utility_before": before,
                "utility_after": result.utility().utility,
                "bound": { "lower": bound.lower, "upper": bound.upper, "k": bound.k },
                "plan": text,
            }));
            Ok(0)
        }
        Cmd::Solve { search, out } => {
            let outcome = solver::solve_exact(&search.params, search.budget(), &search.options())
                .map_err(usage)?;
            finish_search("solve", &search.params, outcome, out)
        }
        Cmd::Probe { search, a, b, out } => {
            let outcome =
                solver::probe_feasibility(&search.params, a, b, search.budget(), &search.options())
                    .map_err(usage)?;
            finish_search("probe", &search.params, outcome, out)
        }
        Cmd::ProveOptimal { search, out } => {
            let outcome =
                solver::prove_optimal_utility(&search.params, search.budget(), &search.options())
                    .map_err(usage)?;
            finish_search("prove-optimal", &search.params, outcome, out)
        }
        Cmd::Greedy { prefix, flights, step, budget_secs, out } => {
            let text = std::fs::read_to_string(&prefix)
                .map_err(|e| usage(format!("cannot read {}: {e}", prefix.display())))?;
            let plan = catalog::parse_plan(&text).map_err(usage)?;
            let budget = budget_secs.map_or_else(Budget::unlimited, Budget::seconds);
            let extended = solver::greedy_extend(&plan, flights, step, budget).map_err(usage)?;
            let text = catalog::serialize_plan(&extended);
            write_out(&out, &text)?;
            emit(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "greedy",
                "params": params_json(extended.params()),
                "report": extended.utility(),
                "plan": text,
            }));
            Ok(0)
        }
        Cmd::ExportModel {
            params,
            formulation,
            format,
            symmetry,
            relax_linearization,
            relax_teams,
            relax_one_per_equality,
            fix_a,
            fix_b,
            out,
        } => {
            let formulation = Formulation::parse(&formulation)
                .ok_or_else(|| usage(format!("unknown formulation {formulation:?}")))?;
            let format = ExportFormat::parse(&format)
                .ok_or_else(|| usage(format!("unknown format {format:?}")))?;
            let opts = GenOptions {
                symmetry_breaking: symmetry,
                relax_linearization,
                relax_teams: relax_teams.into_iter().collect::<BTreeSet<u32>>(),
                relax_one_per_equality,
                fixed_a: fix_a,
                fixed_b: fix_b,
            };
            let model = modelgen::generate(&params, formulation, &opts).map_err(usage)?;
            let text = lp::export_model(&model, format).map_err(usage)?;
            std::fs::write(&out, &text)
                .map_err(|e| usage(format!("cannot write {}: {e}", out.display())))?;
            emit(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "export-model",
                "name": model.name,
                "formulation": model.formulation.as_str(),
                "params": params_json(&params),
                "variables": model.variables.len(),
                "binary": model.count_kind(modelgen::VarKind::Binary),
                "integer": model.count_kind(modelgen::VarKind::Integer),
                "continuous": model.count_kind(modelgen::VarKind::Continuous),
                "constraints": model.constraints.len(),
                "quadratic": model.has_quadratic(),
                "path": out.display().to_string(),
            }));
            Ok(0)
        }
        Cmd::ImportSolution { model, solution, out } => {
            let model_text = std::fs::read_to_string(&model)
                .map_err(|e| usage(format!("cannot read {}: {e}", model.display())))?;
            let model = lp::parse_model(&model_text).map_err(usage)?;
            let sol_text = std::fs::read_to_string(&solution)
                .map_err(|e| usage(format!("cannot read {}: {e}", solution.display())))?;
            let values = solution::parse_solution_text(&sol_text).map_err(usage)?;
            match solution::import_solution(&model, &values).map_err(negative)? {
                solution::ImportOutcome::Plan(plan) => {
                    let text = catalog::serialize_plan(&plan);
                    write_out(&out, &text)?;
                    emit(&json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "import-solution",
                        "outcome": "plan",
                        "params": params_json(plan.params()),
                        "report": plan.utility(),
                        "plan": text,
                    }));
                }
                solution::ImportOutcome::BoundsOnly { a, b } => {
                    emit(&json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": "import-solution",
                        "outcome": "bounds",
                        "a": a,
                        "b": b,
                    }));
                }
            }
            Ok(0)
        }
    }
}

fn finish_search(
    command: &str,
    params: &LeagueParams,
    outcome: solver::SolveOutcome,
    out: Option<PathBuf>,
) -> Result<u8, Failure> {
    let plan_text = outcome.best_plan.as_ref().map(catalog::serialize_plan);
    if let Some(text) = &plan_text {
        write_out(&out, text)?;
    }
    let proof: Vec<[u32; 2]> = outcome.proof.iter().map(|&(a, b)| [a, b]).collect();
    emit(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": params_json(params),
        "status": outcome.status,
        "best_utility": outcome.best_utility,
        "proof": proof,
        "nodes_explored": outcome.nodes_explored,
        "plan": plan_text,
    }));
    Ok(match outcome.status {
        SolveStatus::Optimal | SolveStatus::Feasible => 0,
        SolveStatus::Infeasible => 1,
        SolveStatus::Unknown => 3,
    })
}
