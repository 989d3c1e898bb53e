use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_branchlearn"));
    c.env("BRANCHLEARN_WORKERS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn unknown_subcommand_fails_with_usage() {
    let out = run(&["frobnicate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "generate",
        "solve",
        "presolve-optima",
        "train",
        "imitate",
        "evaluate",
        "validate-gradient",
        "replay-episode",
    ] {
        let out = ok(&[sub, "--help"]);
        assert!(out.contains("Usage"), "{sub}");
    }
}

#[test]
fn bad_method_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["evaluate", "--dir", p(dir.path()), "--method", "bogus"]);
    assert!(!out.status.success());
}

#[test]
fn solve_twice_gives_identical_reports_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let inst_dir = dir.path().join("inst");
    ok(&["generate", "--family", "comb-auction", "--size", "enumerable", "--count", "2", "--seed", "3", "--out", p(&inst_dir)]);
    let inst = inst_dir.join("comb-auction-00003.json");
    assert!(inst.exists());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let ep = dir.path().join("ep.json");
    for (out, extra) in [(&a, Some(&ep)), (&b, None)] {
        let mut args = vec!["solve", "--instance", p(&inst), "--brancher", "random", "--seed", "7", "--out", p(out)];
        if let Some(e) = extra {
            args.extend(["--episode", p(e)]);
        }
        ok(&args);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let text = ok(&["replay-episode", "--episode", p(&ep), "--instance", p(&inst)]);
    assert!(text.contains("replay identical"), "{text}");

    // a different instance must be refused
    let other = inst_dir.join("comb-auction-00004.json");
    assert!(!run(&["replay-episode", "--episode", p(&ep), "--instance", p(&other)]).status.success());
}

#[test]
fn pipeline_presolve_train_imitate_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train");
    let valid = dir.path().join("valid");
    ok(&["generate", "--family", "set-cover", "--dims", "10,16", "--count", "4", "--out", p(&train)]);
    ok(&["generate", "--family", "set-cover", "--dims", "10,16", "--count", "2", "--seed", "100", "--out", p(&valid)]);

    // objective-limit training needs optima
    let policy = dir.path().join("rl.json");
    let log = dir.path().join("train.csv");
    let args = [
        "train", "--regime", "tmdp-objlim", "--train-dir", p(&train), "--valid-dir", p(&valid), "--epochs", "3",
        "--instances-per-epoch", "2", "--hidden", "4", "--eval-interval", "2", "--out", p(&policy), "--log", p(&log),
    ];
    assert!(!run(&args).status.success());
    ok(&["presolve-optima", "--dir", p(&train)]);
    let manifest = fs::read_to_string(train.join("manifest.json")).unwrap();
    assert!(manifest.contains("optimum"));
    ok(&args);
    let csv = fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "schema,epoch,samples_cumulative,episodes,skipped_episodes,tuples,mean_episode_nodes,loss,entropy,validation"
    );
    assert_eq!(lines.len(), 5);

    let il = dir.path().join("il.json");
    ok(&["imitate", "--train-dir", p(&train), "--epochs", "2", "--hidden", "4", "--out", p(&il)]);

    let runs = dir.path().join("runs.csv");
    let md = dir.path().join("table.md");
    let il_spec = format!("IL=policy:{}", p(&il));
    let rl_spec = format!("RL=policy:{}", p(&policy));
    let table = ok(&[
        "evaluate", "--dir", p(&valid), "--method", "pseudocost", "--method", &il_spec, "--method", &rl_spec, "--seeds",
        "2", "--runs", p(&runs), "--markdown", p(&md),
    ]);
    assert!(table.contains("| pseudocost (reliability) |"));
    assert!(table.contains("| IL |"));
    assert_eq!(fs::read_to_string(&runs).unwrap().lines().count(), 1 + 2 * 2 * 3);
    assert_eq!(fs::read_to_string(&md).unwrap(), table);
}

#[test]
fn validate_gradient_small_suite() {
    let out = ok(&["validate-gradient", "--mdps", "2", "--episodes", "20000"]);
    assert!(out.contains("checks passed"));
    assert_eq!(out.lines().filter(|l| l.starts_with("mdp")).count(), 4);
}
