use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use hedgeplay::analysis::{self, check_ids, Depth, Mutation};
use hedgeplay::dynamics::{upward_crossings, Constant, Myopic, Scripted, StageNash, ZeroThreshold};
use hedgeplay::export::{write_csv, TrajectoryRecord};
use hedgeplay::game::parse_actions;
use hedgeplay::sttg::{brute_force, solve_dp, DEFAULT_DP_CAP};
use hedgeplay::{
    build_periodic_plan, compute_landmarks, detect_period, simulate, Action, Error, GameSpec, OpponentPolicy,
    Regime, Trajectory,
};

use crate::config::{CommandConfig, RunConfig};

pub const DP_CAP_ENV: &str = "HEDGEPLAY_DP_CAP";

/// A failure with a fixed process exit code.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl Exit {
    pub fn err(code: u8, message: impl Into<String>) -> anyhow::Error {
        anyhow::Error::new(Exit {
            code,
            message: message.into(),
        })
    }
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

/// 0 ok, 2 validation, 3 resource, 4 unsupported method, 1 anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Exit>() {
            return e.code;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                e if e.is_validation() => 2,
                Error::ResourceLimit { .. } => 3,
                Error::RegimeMismatch { .. } | Error::HorizonTooShort { .. } => 4,
                _ => 1,
            };
        }
    }
    1
}

fn dp_cap() -> Result<usize> {
    match std::env::var(DP_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Exit::err(2, format!("{DP_CAP_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_DP_CAP),
    }
}

struct Output<'a> {
    dir: &'a Path,
}

impl Output<'_> {
    fn write(&self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn trajectory(&self, cfg: &RunConfig, stem: &str, spec: &GameSpec, source: &str, traj: &Trajectory) -> Result<()> {
        let record = TrajectoryRecord::new(spec, source, traj);
        if cfg.format.csv() {
            let mut buf = Vec::new();
            write_csv(&record.rows, &mut buf)?;
            self.write(&format!("{stem}.csv"), &buf)?;
        }
        if cfg.format.json() {
            self.write(&format!("{stem}.json"), record.to_json_string()?.as_bytes())?;
        }
        Ok(())
    }
}

pub fn execute(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let out = Output { dir: &cfg.out };
    out.write("run_config.json", cfg.to_json().as_bytes())?;
    match &cfg.command {
        CommandConfig::Simulate { policy } => cmd_simulate(cfg, &out, policy),
        CommandConfig::Solve { method } => cmd_solve(cfg, &out, method),
        CommandConfig::Analyze => cmd_analyze(cfg, &out),
        CommandConfig::Verify { depth, mutate, count } => cmd_verify(cfg, &out, depth, mutate.as_deref(), *count),
    }
}

fn make_policy(spec: &GameSpec, name: &str, seed: u64) -> Result<Box<dyn OpponentPolicy>> {
    Ok(match name {
        "mbr" => Box::new(Myopic),
        "zero" => Box::new(ZeroThreshold),
        "const-L" => Box::new(Constant::user(spec, Action::L)),
        "const-R" => Box::new(Constant::user(spec, Action::R)),
        "stage-nash" => Box::new(StageNash::new(seed)),
        other => match other.strip_prefix("script:") {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading script {path}"))?;
                let actions = parse_actions(&text)?;
                Box::new(Scripted::user(spec, &actions))
            }
            None => {
                return Err(Exit::err(
                    2,
                    format!("unknown policy `{other}`; expected mbr, zero, const-L, const-R, stage-nash or script:<path>"),
                ))
            }
        },
    })
}

#[derive(Debug, Serialize)]
struct PeriodSummary {
    /// Reported pre-period: the second upward threshold crossing for the
    /// myopic rule, otherwise the least periodic start (1-based).
    preperiod: usize,
    period: usize,
    least_start: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossing_anchor: Option<usize>,
    cycle: Vec<i64>,
    certified: bool,
}

fn period_summary(spec: &GameSpec, policy: &str, traj: &Trajectory) -> Option<PeriodSummary> {
    let o = spec.orientation();
    let values: Vec<i64> = traj.states.iter().map(|s| o.state_to_user(s.value)).collect();
    let report = detect_period(&values).ok()?;
    let canonical = traj.state_values();
    let anchor = match (policy, spec.s_star()) {
        ("mbr", Ok(s)) => upward_crossings(&canonical, s)
            .get(1)
            .copied()
            .filter(|&t| t >= report.start_time),
        _ => None,
    };
    let preperiod = anchor.unwrap_or(report.start_time);
    let cycle = values[preperiod - 1..(preperiod - 1 + report.period).min(values.len())].to_vec();
    Some(PeriodSummary {
        preperiod,
        period: report.period,
        least_start: report.start_time,
        crossing_anchor: anchor,
        cycle,
        certified: report.certified,
    })
}

fn cmd_simulate(cfg: &RunConfig, out: &Output, policy_name: &str) -> Result<()> {
    let spec = cfg.spec()?;
    let mut policy = make_policy(&spec, policy_name, cfg.seed)?;
    let traj = simulate(&spec, policy.as_mut()).map_err(|e| match e {
        Error::PolicyFault { .. } => Exit::err(2, e.to_string()),
        e => e.into(),
    })?;
    out.trajectory(cfg, "trajectory", &spec, policy_name, &traj)?;
    let period = period_summary(&spec, policy_name, &traj);
    out.json("period.json", &period)?;
    println!("policy: {policy_name}");
    println!("steps: {}", traj.len());
    println!("average payoff: {:.6}", traj.average_payoff());
    match period {
        Some(p) => println!(
            "period report: pre-period {} (1-indexed), period {}, least periodic start {}",
            p.preperiod, p.period, p.least_start
        ),
        None => println!("period report: no period found"),
    }
    Ok(())
}

fn cmd_solve(cfg: &RunConfig, out: &Output, method: &str) -> Result<()> {
    let spec = cfg.spec()?;
    let cap = dp_cap()?;
    let (actions, source) = match method {
        "dp" => (solve_dp(&spec, cap)?.actions, "dp"),
        "brute" => (brute_force(&spec)?.actions, "brute"),
        "periodic" => {
            if spec.regime() != Regime::NoDominant {
                return Err(Exit::err(
                    4,
                    format!(
                        "periodic planner needs a game without dominant actions (regime is {:?}); use --method dp",
                        spec.regime()
                    ),
                ));
            }
            let plan = build_periodic_plan(&spec).map_err(|e| match e {
                Error::HorizonTooShort { .. } => Exit::err(4, format!("{e}; use --method dp")),
                e => e.into(),
            })?;
            out.json("plan.json", &plan.to_json(spec.orientation()))?;
            (plan.expand(), "periodic")
        }
        other => return Err(Exit::err(2, format!("unknown method `{other}`; expected dp, periodic or brute"))),
    };
    let traj = Trajectory::from_actions(&spec, &actions)?;
    out.trajectory(cfg, "solution", &spec, source, &traj)?;
    println!("method: {source}");
    println!("total payoff: {:.9}", traj.total_payoff());
    println!("average payoff: {:.6}", traj.average_payoff());
    if let Ok(t_star) = spec.t_star() {
        if traj.len() > t_star {
            let block: f64 = traj.payoffs[1..1 + t_star].iter().sum();
            println!("per-period average payoff (t = 2..{}): {:.6}", t_star + 1, block / t_star as f64);
        }
    }
    println!("game value: {} ({:.6})", spec.game_value(), spec.game_value_f64());
    Ok(())
}

fn cmd_analyze(cfg: &RunConfig, out: &Output) -> Result<()> {
    let spec = cfg.spec()?;
    let d = spec.deltas();
    let mut report = json!({
        "regime": spec.regime(),
        "delta": d,
        "scale": spec.scale(),
        "eta": spec.eta(),
        "game_value": spec.game_value().to_string(),
    });
    println!("regime: {:?}", spec.regime());
    println!(
        "deltas (scaled): D1={} D2={} d1={} d2={}",
        d.delta1, d.delta2, d.little_delta1, d.little_delta2
    );
    println!("game value: {} ({:.6})", spec.game_value(), spec.game_value_f64());
    match spec.regime() {
        Regime::Degenerate => {
            return Err(Exit::err(
                2,
                "degenerate game: a row or column difference vanishes, so the regime analysis does not apply",
            ))
        }
        Regime::NoDominant => {
            let (s_star, s0_star) = spec.thresholds()?;
            let t_star = spec.t_star()?;
            println!("s*: {s_star:.6}");
            println!("s0*: {s0_star:.6}");
            println!("T*: {t_star}");
            report["s_star"] = json!(s_star);
            report["s0_star"] = json!(s0_star);
            report["T_star"] = json!(t_star);
            match compute_landmarks(&spec) {
                Ok(lm) => {
                    println!(
                        "landmarks: j*={} s_(j*,T)={} t_cross={} t_d={}",
                        lm.j_star, lm.j_star_state, lm.t_cross, lm.t_d
                    );
                    report["landmarks"] = json!({
                        "j_star": lm.j_star,
                        "j_star_state": lm.j_star_state,
                        "t_cross": lm.t_cross,
                        "t_d": lm.t_d,
                        "t_d_closed_form": lm.t_d_closed_form,
                    });
                }
                Err(e) => println!("landmarks: not available ({e})"),
            }
        }
        Regime::XDominant => {
            let t_m = analysis::dominant_x_tail(&spec)?;
            println!("constant R from t_m = {t_m}");
            report["t_m"] = json!(t_m);
        }
        Regime::YDominant => {
            let study = analysis::y_dominant_study(&spec)?;
            println!(
                "dominant action {}: constant play optimal = {} (dp {:.6}, constant {:.6})",
                study.dominant_action, study.constant_is_optimal, study.dp_total, study.constant_total
            );
            report["y_dominant"] = serde_json::to_value(&study)?;
        }
    }
    out.json("analysis.json", &report)
}

fn cmd_verify(cfg: &RunConfig, out: &Output, depth: &str, mutate: Option<&str>, count: usize) -> Result<()> {
    let depth: Depth = depth.parse().map_err(|e: Error| Exit::err(2, e.to_string()))?;
    let mutation = mutate
        .map(|m| m.parse::<Mutation>())
        .transpose()
        .map_err(|e| Exit::err(2, e.to_string()))?;
    let specs = if cfg.matrix.is_some() {
        let spec = cfg.spec()?;
        if spec.regime() != Regime::NoDominant {
            return Err(Exit::err(
                4,
                format!("the check suite needs a game without dominant actions (regime is {:?})", spec.regime()),
            ));
        }
        vec![spec]
    } else {
        analysis::sample_specs(cfg.seed, count, Regime::NoDominant, cfg.horizon)
    };
    let results = analysis::run_suite(&specs, depth, mutation);

    let mut lines = Vec::new();
    for r in &results {
        serde_json::to_writer(&mut lines, r)?;
        lines.push(b'\n');
    }
    out.write("report.jsonl", &lines)?;

    let summary = analysis::summarize(&results);
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "{:<28} {:>6} {:>6}", "check", "pass", "fail")?;
    for (id, pass, fail) in &summary {
        writeln!(w, "{id:<28} {pass:>6} {fail:>6}")?;
    }
    let failed: usize = summary.iter().map(|(_, _, f)| f).sum();
    writeln!(
        w,
        "{} games, {} checks each, {} failures",
        specs.len(),
        check_ids::ALL.len(),
        failed
    )?;
    if failed > 0 {
        return Err(Exit::err(1, format!("{failed} check results failed")));
    }
    Ok(())
}
