//! The `spersuade` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gen::{random_instance, random_persuasion, random_smti, random_typed, DEFAULT_GRID};
use crate::io::{instance_to_json, parse_instance, parse_json, parse_policy, policy_to_json, to_pretty};
use crate::model::{
    bayes_plausible, is_indicative, is_private_indicative, is_stable_policy, policy_utility, Instance, Policy,
};
use crate::oracle::{solve_oracle_public, solve_oracle_restricted};
use crate::rational::{fmt_q, parse_q, Q};
use crate::reductions::{
    persuasion_from_value, persuasion_to_json, persuasion_to_matching, smti_from_value, smti_restrict,
    smti_to_json, smti_to_wsm, wsm_from_value, wsm_to_json, wsm_to_private_persuasion,
};
use crate::typed::{
    expand_typed_policy, typed_instance_from_value, typed_instance_to_json, typed_policy_to_json,
    typed_private_indicative, TypedCaps, TypedInstance, TypedSolution,
};
use crate::worlds::{check_non_degenerate, degeneracy_to_json, perturb, solve_public_small_worlds, WorldsCaps};

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "spersuade", version, about = "Optimal signaling policies for stable matching markets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Input file.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Artifact output file; without it the artifact is embedded in the report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print a short text summary instead of a JSON report.
    #[arg(long)]
    pub human: bool,
    #[arg(long, default_value_t = crate::worlds::DEFAULT_WORLD_CAP)]
    pub max_worlds: usize,
    #[arg(long, default_value_t = 5)]
    pub max_types: usize,
    #[arg(long, default_value_t = 3)]
    pub max_n: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    TypedPublic,
    TypedPrivate,
    WorldsPublic,
    OraclePublic,
    OracleRestricted,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Instance,
    Typed,
    Smti,
    Persuasion,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceKind {
    SmtiRestrict,
    SmtiWsm,
    WsmPrivate,
    PersuasionMatching,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute an optimal policy.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Verify a policy or test non-degeneracy.
    Check {
        #[command(flatten)]
        common: Common,
        /// Policy file to verify against the instance.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long)]
        non_degeneracy: bool,
    },
    /// Generate a random instance.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "instance")]
        kind: GenKind,
        /// Agents per side (receivers for persuasion instances).
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        worlds: usize,
        /// Types per side for typed instances.
        #[arg(long, default_value_t = 2)]
        types: usize,
        #[arg(long, default_value_t = 1)]
        max_size: u64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Add seeded noise to every valuation.
    Perturb {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Transform an instance by one of the constructive reductions.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: ReduceKind,
    },
}

/// Outcome of a command: the report, an optional artifact, and whether all checks passed.
pub struct Outcome {
    pub report: Value,
    pub artifact: Option<Value>,
    pub ok: bool,
    pub human: String,
}

#[derive(Serialize)]
struct Verification {
    stable: bool,
    indicative: Option<bool>,
    bayes_plausible: bool,
    utility: String,
}

#[derive(Serialize)]
struct SolveReport {
    command: &'static str,
    mode: String,
    value: String,
    support: usize,
    guarantee: String,
    non_degeneracy: Option<Value>,
    verification: Option<Verification>,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) => EXIT_PARSE,
        Error::Capacity(_) => EXIT_CAPACITY,
        Error::Precondition(_) => EXIT_PRECONDITION,
        Error::UnreachableSignal(_) | Error::Internal(_) => EXIT_INTERNAL,
    }
}

fn read_json(path: &Option<PathBuf>) -> Result<Value> {
    let path = path.as_ref().ok_or_else(|| Error::input("missing --in"))?;
    parse_json(&read_text(path)?)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))
}

/// With `typed`, private components name type-level orders of that market.
fn verify(inst: &Instance, policy: &Policy, typed: Option<&TypedInstance>) -> Result<Verification> {
    let cert = is_stable_policy(inst, policy)?;
    let indicative = match policy {
        Policy::Public(p) if p.signals.iter().all(|s| s.profile.is_some()) => Some(is_indicative(inst, p)?),
        Policy::Private(p) => Some(match typed {
            Some(ti) => typed_private_indicative(ti, inst, p)?,
            None => is_private_indicative(inst, p)?,
        }),
        Policy::Public(_) => None,
    };
    Ok(Verification {
        stable: cert.stable,
        indicative,
        bayes_plausible: bayes_plausible(inst, policy),
        utility: fmt_q(&policy_utility(inst, policy)),
    })
}

fn verification_ok(v: &Verification) -> bool {
    v.stable && v.bayes_plausible && v.indicative != Some(false)
}

fn typed_caps(c: &Common) -> TypedCaps {
    TypedCaps { types: c.max_types, ..TypedCaps::default() }
}

fn solve(common: &Common, mode: Mode) -> Result<Outcome> {
    let v = read_json(&common.input)?;
    let mode_name = value_name(&mode);
    let (report, artifact) = match mode {
        Mode::TypedPublic | Mode::TypedPrivate => {
            let ti = typed_instance_from_value(&v)?;
            let caps = typed_caps(common);
            let sol: TypedSolution = if mode == Mode::TypedPublic {
                crate::typed::solve_public_typed(&ti, caps)?
            } else {
                crate::typed::solve_private_typed(&ti, caps)?
            };
            let verification = match expand_typed_policy(&ti, &sol.policy, caps.agents) {
                Ok((inst, pol)) => Some(verify(&inst, &pol, Some(&ti))?),
                Err(Error::Capacity(_)) => None,
                Err(e) => return Err(e),
            };
            let report = SolveReport {
                command: "solve",
                mode: mode_name,
                value: fmt_q(&sol.value),
                support: sol.policy.signals.len(),
                guarantee: "optimal".into(),
                non_degeneracy: None,
                verification,
            };
            (report, typed_policy_to_json(&ti, &sol.policy))
        }
        Mode::WorldsPublic => {
            let inst = crate::io::instance_from_value(&v)?;
            if inst.num_worlds() > common.max_worlds {
                return Err(Error::precondition(format!(
                    "{} worlds exceed the cap of {}",
                    inst.num_worlds(),
                    common.max_worlds
                )));
            }
            let caps = WorldsCaps { worlds: common.max_worlds, ..WorldsCaps::default() };
            let sol = solve_public_small_worlds(&inst, caps)?;
            if sol.label() != "optimal" {
                eprintln!("warning: result is {}", sol.label());
            }
            let policy = Policy::Public(sol.policy.clone());
            let report = SolveReport {
                command: "solve",
                mode: mode_name,
                value: fmt_q(&sol.value),
                support: sol.policy.signals.len(),
                guarantee: sol.label().into(),
                non_degeneracy: sol.degeneracy.as_ref().map(|d| degeneracy_to_json(&inst, d)),
                verification: Some(verify(&inst, &policy, None)?),
            };
            (report, policy_to_json(&policy, &inst))
        }
        Mode::OraclePublic | Mode::OracleRestricted => {
            let inst = crate::io::instance_from_value(&v)?;
            if inst.n() > common.max_n {
                return Err(Error::capacity(format!("{} agents per side exceed --max-n {}", inst.n(), common.max_n)));
            }
            let res = if mode == Mode::OraclePublic {
                solve_oracle_public(&inst)?
            } else {
                solve_oracle_restricted(&inst)?
            };
            let policy = Policy::Public(res.policy.clone());
            let report = SolveReport {
                command: "solve",
                mode: mode_name,
                value: fmt_q(&res.value),
                support: res.policy.signals.len(),
                guarantee: "optimal (exhaustive)".into(),
                non_degeneracy: None,
                verification: Some(verify(&inst, &policy, None)?),
            };
            (report, policy_to_json(&policy, &inst))
        }
    };
    let ok = report.verification.as_ref().is_none_or(verification_ok);
    let human = format!(
        "mode {}\nvalue {}\nsignals {}\nguarantee {}\n",
        report.mode, report.value, report.support, report.guarantee
    );
    let report = serde_json::to_value(&report).map_err(|e| Error::internal(e.to_string()))?;
    Ok(Outcome { report, artifact: Some(artifact), ok, human })
}

fn check(common: &Common, policy: &Option<PathBuf>, non_degeneracy: bool) -> Result<Outcome> {
    let path = common.input.as_ref().ok_or_else(|| Error::input("missing --in"))?;
    let inst = parse_instance(&read_text(path)?)?;
    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!("check"));
    let mut ok = true;
    let mut human = String::new();
    if let Some(p) = policy {
        let pol = parse_policy(&read_text(p)?, &inst)?;
        let cert = is_stable_policy(&inst, &pol)?;
        let ver = verify(&inst, &pol, None)?;
        let blocking: Vec<Value> = cert
            .violations
            .iter()
            .map(|v| {
                json!({
                    "signal": v.signal,
                    "pair": [inst.side_a[v.pair.a].clone(), inst.side_b[v.pair.b].clone()],
                })
            })
            .collect();
        let mut verdict = vec![if ver.stable { "stable" } else { "unstable" }];
        match ver.indicative {
            Some(true) => verdict.push("indicative"),
            Some(false) => verdict.push("not indicative"),
            None => {}
        }
        if !ver.bayes_plausible {
            verdict.push("not Bayes-plausible");
        }
        let verdict = verdict.join(", ");
        human.push_str(&format!("policy: {verdict}\n"));
        for b in &blocking {
            human.push_str(&format!("blocking pair {} in signal {}\n", b["pair"], b["signal"]));
        }
        ok &= verification_ok(&ver);
        report.insert(
            "policy".into(),
            json!({ "verdict": verdict, "blocking": blocking, "details": serde_json::to_value(&ver).map_err(|e| Error::internal(e.to_string()))? }),
        );
    }
    if non_degeneracy {
        let d = check_non_degenerate(&inst, crate::worlds::DEFAULT_SUBSET_CAP)?;
        let verdict = if d.is_degenerate() { "degenerate" } else { "non-degenerate" };
        human.push_str(&format!("instance: {verdict}\n"));
        let mut obj = degeneracy_to_json(&inst, &d);
        obj["verdict"] = json!(verdict);
        report.insert("non_degeneracy".into(), obj);
    }
    if policy.is_none() && !non_degeneracy {
        return Err(Error::input("nothing to check: pass --policy or --non-degeneracy"));
    }
    Ok(Outcome { report: Value::Object(report), artifact: None, ok, human })
}

#[allow(clippy::too_many_arguments)]
fn generate(kind: GenKind, n: usize, worlds: usize, types: usize, max_size: u64, grid: i64, seed: u64) -> Result<Outcome> {
    if grid <= 0 {
        return Err(Error::input("--grid must be positive"));
    }
    let artifact = match kind {
        GenKind::Instance => instance_to_json(&random_instance(n, worlds, grid, seed)?),
        GenKind::Typed => typed_instance_to_json(&random_typed(types, types, worlds, max_size, grid, seed)?),
        GenKind::Smti => smti_to_json(&random_smti(n, n, 60, 50, true, seed)?),
        GenKind::Persuasion => persuasion_to_json(&random_persuasion(n, worlds, grid, seed)?),
    };
    let report = json!({ "command": "gen", "kind": value_name(&kind), "seed": seed });
    Ok(Outcome { human: format!("generated {} instance\n", value_name(&kind)), report, artifact: Some(artifact), ok: true })
}

fn perturb_cmd(common: &Common, eps: &str, seed: u64) -> Result<Outcome> {
    let path = common.input.as_ref().ok_or_else(|| Error::input("missing --in"))?;
    let inst = parse_instance(&read_text(path)?)?;
    let eps: Q = parse_q(eps)?;
    let out = perturb(&inst, &eps, seed)?;
    let report = json!({ "command": "perturb", "eps": fmt_q(&eps), "seed": seed });
    Ok(Outcome { human: format!("perturbed with eps {}\n", fmt_q(&eps)), report, artifact: Some(instance_to_json(&out)), ok: true })
}

fn reduce(common: &Common, kind: ReduceKind) -> Result<Outcome> {
    let v = read_json(&common.input)?;
    let mut report = json!({ "command": "reduce", "kind": value_name(&kind) });
    let artifact = match kind {
        ReduceKind::SmtiRestrict => {
            let (out, book) = smti_restrict(&smti_from_value(&v)?)?;
            report["added_a2"] = json!(book.a2);
            report["added_a3"] = json!(book.a3);
            smti_to_json(&out)
        }
        ReduceKind::SmtiWsm => {
            let m = smti_from_value(&v)?;
            let w = smti_to_wsm(&m)?;
            let n = w.n();
            let pad = |names: &[String], p: char| -> Vec<String> {
                let mut out = names.to_vec();
                out.extend((names.len()..n).map(|i| format!("{p}_pad{}", i + 1)));
                out
            };
            wsm_to_json(&pad(&m.a, 'a'), &pad(&m.b, 'b'), &w)
        }
        ReduceKind::WsmPrivate => {
            let w = if v.get("prefs").is_some() {
                smti_to_wsm(&smti_from_value(&v)?)?
            } else {
                wsm_from_value(&v)?.2
            };
            instance_to_json(&wsm_to_private_persuasion(&w)?)
        }
        ReduceKind::PersuasionMatching => instance_to_json(&persuasion_to_matching(&persuasion_from_value(&v)?)?),
    };
    Ok(Outcome { human: format!("reduced by {}\n", value_name(&kind)), report, artifact: Some(artifact), ok: true })
}

/// Runs a parsed command; artifacts go to `--out` or into the report.
pub fn run(cli: &Cli) -> Result<(String, bool)> {
    let (common, outcome) = match &cli.command {
        Command::Solve { common, mode } => (common, solve(common, *mode)?),
        Command::Check { common, policy, non_degeneracy } => (common, check(common, policy, *non_degeneracy)?),
        Command::Gen { common, kind, n, worlds, types, max_size, grid, seed } => {
            (common, generate(*kind, *n, *worlds, *types, *max_size, *grid, *seed)?)
        }
        Command::Perturb { common, eps, seed } => (common, perturb_cmd(common, eps, *seed)?),
        Command::Reduce { common, kind } => (common, reduce(common, *kind)?),
    };
    let Outcome { mut report, artifact, ok, human } = outcome;
    if let Some(a) = artifact {
        match &common.out {
            Some(path) => {
                fs::write(path, to_pretty(&a))
                    .map_err(|e| Error::input(format!("cannot write {}: {e}", path.display())))?;
                report["output"] = json!(path.display().to_string());
            }
            None => report["artifact"] = a,
        }
    }
    report["ok"] = json!(ok);
    let text = if common.human { human } else { to_pretty(&report) };
    Ok((text, ok))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { 0 };
        }
    };
    match run(&cli) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                0
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
