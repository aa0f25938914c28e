//! End-to-end tests of the command-line interface: exit codes, JSON
//! schemas, and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regatta"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("regatta-cli-{}-{name}", std::process::id()))
}

#[test]
fn analyze_builtin_reports_utility() {
    let out = run(&["analyze", "--builtin", "apcl-2021"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["report"]["utility"], 7);
    assert_eq!(v["report"]["lambda_min"], 1);
    assert_eq!(v["report"]["lambda_max"], 8);
}

#[test]
fn check_params_impossible_exits_one() {
    let out = run(&["check-params", "18", "16", "6"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["verdict"]["perfect_possible"], "impossible");
    assert_eq!(v["lambda_avg_num"], 80);
    assert_eq!(v["lambda_avg_den"], 17);

    let out = run(&["check-params", "18", "17", "6"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn validate_exit_codes() {
    let out = run(&["validate", "--builtin", "ppl-8-7-4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["valid"], true);

    // Relaxed plan fails strict validation but passes relaxed.
    let out = run(&["validate", "--builtin", "nr-13-13-3"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["validate", "--builtin", "nr-13-13-3", "--relaxed"]);
    assert_eq!(out.status.code(), Some(0));

    // Empty file: input error.
    let empty = temp_path("empty.plan");
    std::fs::write(&empty, "").unwrap();
    let out = run(&["validate", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flags_exit_two() {
    let out = run(&["analyze", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["not-a-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_params_matches_known_neighborhood() {
    let out = run(&["scan-params", "10", "8", "5"]);
    assert!(out.status.success());
    let v = json_of(&out);
    let triples: Vec<(u64, u64, u64)> = v["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            (
                c["teams"].as_u64().unwrap(),
                c["flights"].as_u64().unwrap(),
                c["inrace"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        triples,
        vec![(8, 7, 4), (9, 8, 3), (10, 9, 5), (12, 11, 3), (12, 11, 4), (12, 11, 6)]
    );
    // Table form has one row per candidate.
    let out = run(&["scan-params", "10", "8", "5", "--table"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 6);
}

#[test]
fn catalog_lists_and_dumps() {
    let out = run(&["catalog"]);
    let v = json_of(&out);
    assert_eq!(v["builtins"].as_array().unwrap().len(), 15);

    let out = run(&["catalog", "ppl-9-8-3"]);
    let v = json_of(&out);
    assert_eq!(v["report"]["utility"], 0);
    assert_eq!(v["params"]["teams"], 9);

    let out = run(&["catalog", "no-such-plan"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn transform_repeat_scales_utility() {
    let out = run(&["transform", "--builtin", "apcl-2021", "--repeat", "6"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["utility_before"], 7);
    assert_eq!(v["utility_after"], 42);
}

#[test]
fn transform_requires_exactly_one_operation() {
    let out = run(&["transform", "--builtin", "apcl-2021"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["transform", "--builtin", "apcl-2021", "--repeat", "2", "--remove", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_probe_exit_codes() {
    let out = run(&["solve", "--params", "4,3,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["best_utility"], 0);

    // Window far above the achievable mass: definitively infeasible.
    let out = run(&["probe", "--params", "4,3,2", "--a", "3", "--b", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["status"], "infeasible");

    // One-node budget cannot reach a verdict.
    let out = run(&["solve", "--params", "6,5,3", "--budget-nodes", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["status"], "unknown");
}

#[test]
fn repeated_invocations_are_byte_identical() {
    for args in [
        vec!["analyze", "--builtin", "best-10-16-5"],
        vec!["solve", "--params", "6,4,3", "--seed", "7"],
        vec!["scan-params", "32", "18", "8"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn env_variables_configure_search() {
    // Environment supplies the seed/threads; flags still win.
    let out = bin()
        .args(["solve", "--params", "4,3,2"])
        .env("REGATTA_SEED", "99")
        .env("REGATTA_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin()
        .args(["solve", "--params", "4,3,2", "--threads", "1", "--seed", "1"])
        .env("REGATTA_SEED", "99")
        .env("REGATTA_THREADS", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["status"], "optimal");
}

#[test]
fn export_then_import_round_trip() {
    let model_path = temp_path("model.lp");
    let out = run(&[
        "export-model",
        "--params",
        "4,1,2",
        "--formulation",
        "bqp",
        "--out",
        model_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["variables"], 10); // 2 races x 4 teams + a + b
    assert_eq!(v["quadratic"], true);
    assert!(model_path.exists());

    let solution_path = temp_path("model.sol");
    std::fs::write(
        &solution_path,
        "# teams 1,2 in race 1; teams 3,4 in race 2\n\
         x_1_1 1\nx_1_2 1\nx_1_3 0\nx_1_4 0\n\
         x_2_1 0\nx_2_2 0\nx_2_3 1\nx_2_4 1\n\
         a 0\nb 1\n",
    )
    .unwrap();
    let plan_path = temp_path("imported.plan");
    let out = run(&[
        "import-solution",
        "--model",
        model_path.to_str().unwrap(),
        "--solution",
        solution_path.to_str().unwrap(),
        "--out",
        plan_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["outcome"], "plan");
    let text = std::fs::read_to_string(&plan_path).unwrap();
    assert!(text.contains("1 1 2 2"));
}

#[test]
fn import_rejects_fractional_binaries() {
    let model_path = temp_path("frac-model.lp");
    run(&[
        "export-model",
        "--params",
        "4,1,2",
        "--formulation",
        "ilp-flight",
        "--out",
        model_path.to_str().unwrap(),
    ]);
    let solution_path = temp_path("frac.sol");
    std::fs::write(
        &solution_path,
        "z_1_2_1 0.5\nz_1_3_1 0\nz_1_3_2 0\nz_1_4_1 0\nz_1_4_2 0\nz_1_4_3 1\na 0\nb 1\n",
    )
    .unwrap();
    let out = run(&[
        "import-solution",
        "--model",
        model_path.to_str().unwrap(),
        "--solution",
        solution_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fractional"));
}

#[test]
fn greedy_extends_from_file() {
    let prefix_path = temp_path("prefix.plan");
    std::fs::write(&prefix_path, "1 1 2 2\n").unwrap();
    let out = run(&[
        "greedy",
        "--prefix",
        prefix_path.to_str().unwrap(),
        "--flights",
        "3",
        "--step",
        "1",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["params"]["flights"], 3);
    assert_eq!(v["report"]["utility"], 0);
}
