use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use hedgeplay::export::read_csv;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hedgeplay"));
    c.env_remove("HEDGEPLAY_DP_CAP");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap()
}

fn number_after(text: &str, label: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(label)).unwrap_or_else(|| panic!("no `{label}` in {text}"));
    line.rsplit(':').next().unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn simulate_reports_example_cycle() {
    let dir = TempDir::new().unwrap();
    let o = run(&["simulate", "--matrix", "1,0;-1,3", "--T", "700", "--policy", "mbr"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("pre-period 9 (1-indexed), period 5"), "{}", stdout(&o));
    let period = json(dir.path().join("period.json"));
    assert_eq!(period["cycle"], serde_json::json!([14, 17, 15, 18, 16]));
    let rows = read_csv(fs::File::open(dir.path().join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 700);
}

#[test]
fn constant_policy_gives_one_row_per_step() {
    let dir = TempDir::new().unwrap();
    let o = run(&["simulate", "--policy", "const-L", "--T", "3"], dir.path());
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.iter().map(|r| r.s).collect::<Vec<_>>(), vec![0, -2, -4]);
}

#[test]
fn scripted_actions_reproduce_the_myopic_run() {
    let dir = TempDir::new().unwrap();
    let mbr_dir = dir.path().join("mbr");
    let o = run(&["simulate", "--matrix", "1,0;-1,3", "--T", "700", "--policy", "mbr"], &mbr_dir);
    assert!(o.status.success());
    let record = json(mbr_dir.join("trajectory.json"));
    let actions = record["actions"].as_str().unwrap();
    // The myopic actions cycle through RLLRL from t = 6.
    let mut script = actions[..5].to_string();
    while script.len() < 700 {
        script.push_str("RLLRL");
    }
    assert_eq!(&script[..700], actions);
    let script_path = dir.path().join("acts.txt");
    fs::write(&script_path, &script[..700]).unwrap();
    let policy = format!("script:{}", script_path.display());
    let script_dir = dir.path().join("script");
    let o = run(&["simulate", "--matrix", "1,0;-1,3", "--T", "700", "--policy", &policy], &script_dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(mbr_dir.join("trajectory.csv")).unwrap(),
        fs::read(script_dir.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn short_script_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("acts.txt");
    fs::write(&path, "LR").unwrap();
    let policy = format!("script:{}", path.display());
    let o = run(&["simulate", "--T", "5", "--policy", &policy], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_dp_example3() {
    let dir = TempDir::new().unwrap();
    let o = run(&["solve", "--matrix", "1,0;-2,7", "--T", "1000", "--method", "dp"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let per_period = number_after(&text, "per-period average payoff");
    assert!((per_period - 0.8941).abs() < 1e-3, "{per_period}");
    assert!(text.contains("game value: 7/10"));
}

#[test]
fn brute_with_one_step_matches_myopic_first_move() {
    let dir = TempDir::new().unwrap();
    let o = run(&["solve", "--method", "brute", "--T", "1"], &dir.path().join("b"));
    assert!(o.status.success());
    let o = run(&["simulate", "--policy", "mbr", "--T", "1"], &dir.path().join("m"));
    assert!(o.status.success());
    let b = json(dir.path().join("b/solution.json"));
    let m = json(dir.path().join("m/trajectory.json"));
    assert_eq!(b["actions"], m["actions"]);
}

#[test]
fn periodic_matches_dp_on_example1() {
    let dir = TempDir::new().unwrap();
    for method in ["dp", "periodic"] {
        let o = run(
            &["solve", "--matrix", "1,0;-1,3", "--T", "700", "--method", method],
            &dir.path().join(method),
        );
        assert!(o.status.success());
    }
    let dp = json(dir.path().join("dp/solution.json"));
    let plan = json(dir.path().join("periodic/solution.json"));
    assert_eq!(dp["actions"], plan["actions"]);
    let p = json(dir.path().join("periodic/plan.json"));
    assert_eq!(p["block"].as_str().unwrap().len(), 5);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| run(args, dir.path()).status.code();
    assert_eq!(code(&["solve", "--method", "brute", "--T", "23"]), Some(3));
    assert_eq!(code(&["solve", "--matrix", "3,4;1,2", "--method", "periodic"]), Some(4));
    assert_eq!(code(&["solve", "--matrix", "1,0;-1,3", "--T", "5", "--method", "periodic"]), Some(4));
    assert_eq!(code(&["analyze", "--matrix", "1,2;1,3"]), Some(2));
    assert_eq!(code(&["simulate", "--matrix", "1,1;1,1"]), Some(2));
    assert_eq!(code(&["simulate", "--eta", "-1"]), Some(2));
    let o = run(&["analyze", "--matrix", "sqrt2,0;1,2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("irrational entries") && err.lines().count() == 1, "{err}");
}

#[test]
fn dp_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = bin()
        .args(["solve", "--T", "300", "--out"])
        .arg(dir.path())
        .env("HEDGEPLAY_DP_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn analyze_landmarks() {
    let dir = TempDir::new().unwrap();
    let o = run(&["analyze", "--matrix", "1,0;-1,3", "--T", "10000"], dir.path());
    assert!(o.status.success());
    let a = json(dir.path().join("analysis.json"));
    assert!((a["s_star"].as_f64().unwrap() - 58.87).abs() < 0.01);
    assert_eq!(a["landmarks"]["t_cross"], 9981);
    assert_eq!(a["landmarks"]["t_d"], 9979);
    assert_eq!(a["landmarks"]["j_star_state"], 57);

    let o = run(&["analyze", "--matrix", "1,0;-2,7"], dir.path());
    assert!(o.status.success());
    assert_eq!(json(dir.path().join("analysis.json"))["T_star"], 10);
}

#[test]
fn verify_default_suite_and_mutant() {
    let dir = TempDir::new().unwrap();
    let o = run(&["verify"], &dir.path().join("clean"));
    assert!(o.status.success(), "{}", stdout(&o));
    let report = fs::read_to_string(dir.path().join("clean/report.jsonl")).unwrap();
    assert_eq!(report.lines().count(), 200 * 14);
    for line in report.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["passed"], true);
    }
    let o = run(&["verify", "--mutate", "transition", "--count", "10"], &dir.path().join("mutant"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bundled_configs_pass() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["example1_verify.json", "example2_verify.json", "example3_verify.json"] {
        let dir = TempDir::new().unwrap();
        let o = bin()
            .arg("replay")
            .arg(configs.join(name))
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(o.status.success(), "{name}: {}", stdout(&o));
    }
}

#[test]
fn replay_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first");
    let o = run(
        &["simulate", "--matrix", "3/2,0;-1,0.5", "--T", "200", "--policy", "stage-nash", "--seed", "9"],
        &first,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let second = dir.path().join("second");
    let o = bin()
        .arg("replay")
        .arg(first.join("run_config.json"))
        .arg("--out")
        .arg(&second)
        .output()
        .unwrap();
    assert!(o.status.success());
    for name in ["trajectory.csv", "trajectory.json", "period.json"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn matrix_file_and_format_selection() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m.txt");
    fs::write(&path, "# example 3\n1, 0\n-2, 7\n").unwrap();
    let out = dir.path().join("o");
    let o = bin()
        .args(["solve", "--T", "50", "--format", "json", "--matrix-file"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("solution.json").exists());
    assert!(!out.join("solution.csv").exists());
    let cfg = json(out.join("run_config.json"));
    assert_eq!(cfg["command"], "solve");
    assert_eq!(cfg["T"], 50);
}
