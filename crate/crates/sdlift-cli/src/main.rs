mod builtins;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sdlift::behaviors::{
    attack_simulate, guessing_certificate, verify_decomposition, PdDecomposition,
};
use sdlift::games::{classical_value, game_value, NonlocalGame, Scenario};
use sdlift::lifting::{
    lifted_ghz_game, protocol1, protocol1_reductions, protocol2, protocol2_reduction, protocol3,
    protocol3_reductions, CaseReduction, LiftReport,
};
use sdlift::polytopes::{ns_guessing_lp, pd_membership, theorem3_verify, theorem3_verify_with, PdMembership};
use sdlift::quantum::{lifted_chsh_strategy, lifted_ghz_pd_strategy, parity_game_value};
use sdlift::scalar::{OrderedField, Rational, Surd};
use serde_json::{json, Value};
use std::fmt;
use std::process::ExitCode;

/// Bad invocation: unknown builtin, unreadable input, inconsistent flags.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "sdlift", version, about = "Constraint-system games, symmetric deterministic lifting, and exact certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(clap::Args)]
struct RunFlags {
    /// Arithmetic for linear programs; other commands always compute exactly.
    #[arg(long, value_enum, default_value_t = Mode::Exact, global = true)]
    mode: Mode,
    /// Certificate tolerance in float mode.
    #[arg(long, default_value_t = 1e-9, global = true)]
    tol: f64,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Adversary {
    Classical,
    Ns,
}

#[derive(clap::Args)]
struct Target {
    /// First player's input: a label, or a letter prefix with a 1-based index (r3).
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    /// Third player's input, for three-player scenarios.
    #[arg(long)]
    z: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the canonical JSON of a builtin system or game, or of a system file.
    Build { name: String },
    /// Apply a lifting protocol and check its case reductions.
    Lift {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        protocol: u8,
        input: String,
    },
    /// Classical value, or the value of a behavior.
    Value {
        game: String,
        #[arg(long, conflicts_with = "behavior")]
        classical: bool,
        #[arg(long)]
        behavior: Option<String>,
    },
    /// Partially deterministic decomposition at an input tuple.
    Decompose {
        behavior: String,
        #[command(flatten)]
        at: Target,
    },
    /// Bound the intersection of partially deterministic polytopes by Bell functionals.
    #[command(name = "verify-thm3")]
    VerifyThm3,
    /// Simulate the convex-combination attack on a spot-checking protocol.
    Attack {
        behavior: String,
        #[command(flatten)]
        at: Target,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 100_000)]
        rounds: usize,
    },
    /// Certified guessing probability at an input tuple.
    Guess {
        behavior: String,
        #[command(flatten)]
        at: Target,
        #[arg(long, value_enum)]
        adversary: Adversary,
    },
}

/// Outcome of one command: rendered report plus whether its checks passed.
struct Report {
    text: String,
    json: Value,
    csv: Option<String>,
    passed: bool,
    failure: String,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report { text, json, csv: None, passed: true, failure: String::new() }
    }

    fn check(mut self, passed: bool, failure: impl Into<String>) -> Self {
        if self.passed && !passed {
            self.passed = false;
            self.failure = failure.into();
        }
        self
    }
}

struct Ctx<'a> {
    flags: &'a RunFlags,
    builtin: String,
}

impl Ctx<'_> {
    fn surd(&self, v: &Surd) -> String {
        match self.flags.mode {
            Mode::Exact => v.to_string(),
            Mode::Float => format!("{}", v.to_f64()),
        }
    }

    fn rational(&self, v: &Rational) -> String {
        self.surd(&Surd::rational(v.clone()))
    }

    fn provenance(&self) -> Value {
        json!({
            "builtin": self.builtin,
            "mode": match self.flags.mode { Mode::Exact => "exact", Mode::Float => "float" },
            "tol": match self.flags.mode { Mode::Exact => Value::Null, Mode::Float => json!(self.flags.tol) },
            "caps": {
                "lp_variables": sdlift::lp::DEFAULT_VARIABLE_CAP,
                "vertices": sdlift::polytopes::VERTEX_CAP,
                "search_variables": sdlift::blcs::DEFAULT_SEARCH_CAP,
                "strategies": sdlift::games::DEFAULT_ENUM_CAP.to_string(),
            },
            "seed": self.flags.seed,
            "version": env!("CARGO_PKG_VERSION"),
        })
    }
}

fn resolve_input(sc: &Scenario, player: usize, label: &str) -> Result<usize> {
    if let Some(i) = sc.find_input(player, label) {
        return Ok(i);
    }
    let digits = label.trim_start_matches(|c: char| c.is_ascii_alphabetic());
    if digits.len() < label.len() {
        if let Ok(k) = digits.parse::<usize>() {
            if (1..=sc.num_inputs(player)).contains(&k) {
                return Ok(k - 1);
            }
        }
    }
    Err(UsageError(format!(
        "input `{label}` not found for player {}; labels: {}",
        player + 1,
        sc.inputs[player].join(", ")
    ))
    .into())
}

fn resolve_target(sc: &Scenario, at: &Target) -> Result<Vec<usize>> {
    let labels: Vec<&str> = [Some(at.x.as_str()), Some(at.y.as_str()), at.z.as_deref()].into_iter().flatten().collect();
    if labels.len() != sc.players() {
        bail!(UsageError(format!("scenario has {} players, {} inputs given", sc.players(), labels.len())));
    }
    labels.iter().enumerate().map(|(p, l)| resolve_input(sc, p, l)).collect()
}

fn system_summary(report: &LiftReport) -> String {
    let f = &report.flags;
    let mut s = format!(
        "protocol {}: {} variables, {} constraints, parity {:+}",
        report.protocol,
        report.lifted.num_variables(),
        report.lifted.num_constraints(),
        f.parity
    );
    if f.even_degrees {
        s.push_str(", even degrees");
    }
    if f.arrangement {
        s.push_str(", arrangement");
    }
    s
}

fn cmd_build(ctx: &Ctx, name: &str) -> Result<Report> {
    if builtins::is_game_only(name) {
        let g = builtins::game(name)?;
        let json = game_json(&g);
        let text = format!(
            "{}: {} players, {} input tuples",
            g.name,
            g.scenario.players(),
            g.scenario.num_input_tuples()
        );
        return Ok(Report::ok(text, json!({ "game": json, "provenance": ctx.provenance() })));
    }
    let s = builtins::system(name)?;
    let text = format!(
        "{} variables, {} constraints, parity {:+}",
        s.num_variables(),
        s.num_constraints(),
        s.system_parity()
    );
    let system: Value = serde_json::from_str(&s.to_json())?;
    Ok(Report::ok(text, json!({ "system": system, "provenance": ctx.provenance() })))
}

fn game_json(g: &NonlocalGame) -> Value {
    json!({
        "name": g.name,
        "scenario": serde_json::to_value(&g.scenario).expect("serializable"),
        "dist": g.dist.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "rule": serde_json::to_value(&g.rule).expect("serializable"),
        "side_correlations": serde_json::to_value(&g.side_correlations).expect("serializable"),
    })
}

fn cmd_lift(ctx: &Ctx, protocol: u8, input: &str) -> Result<Report> {
    let (report, reductions) = match protocol {
        1 => {
            let r = protocol1(&builtins::system(input)?)?;
            let red = protocol1_reductions(&r)?;
            (r, red)
        }
        3 => {
            let r = protocol3(&builtins::system(input)?)?;
            let red = protocol3_reductions(&r)?;
            (r, red)
        }
        _ => {
            let game = builtins::game(input)?;
            let r = protocol2(&game)?;
            let copies = r.copies.unwrap_or(0);
            let red = (0..copies).map(|g| protocol2_reduction(&game, &r, g)).collect::<Result<Vec<_>, _>>()?;
            (r, red)
        }
    };
    let failing: Vec<usize> = reductions.iter().filter(|c| !c.ok()).map(|c| c.constraint).collect();
    let text = format!(
        "{}; {}/{} case reductions isomorphic to the input",
        system_summary(&report),
        reductions.len() - failing.len(),
        reductions.len()
    );
    let mut json: Value = serde_json::from_str(&report.to_json())?;
    json["reductions"] = reductions
        .iter()
        .map(|c: &CaseReduction| json!({ "constraint": c.constraint, "case": c.case, "ok": c.ok() }))
        .collect();
    json["provenance"] = ctx.provenance();
    let msg = format!("case reductions failed at constraints {failing:?}");
    Ok(Report::ok(text, json).check(failing.is_empty(), msg))
}

fn cmd_value(ctx: &Ctx, name: &str, classical: bool, behavior: Option<&str>) -> Result<Report> {
    let game = builtins::game(name)?;
    if classical {
        let v = classical_value(&game)?;
        let text = ctx.rational(&v.value);
        let json = json!({
            "game": game.name,
            "classical_value": text,
            "method": format!("{:?}", v.method),
            "witness": v.witness.choice,
            "provenance": ctx.provenance(),
        });
        return Ok(Report::ok(text, json));
    }
    let value = match (behavior, name) {
        (Some(b), _) => game_value(&game, &builtins::behavior(b)?.behavior)?,
        (None, "lifted_chsh") => lifted_chsh_strategy(0, 0)?.1.value,
        (None, "lifted_ghz") => parity_game_value(&lifted_ghz_game(), &lifted_ghz_pd_strategy([0, 0, 0])?)?,
        (None, _) => match builtins::canonical_behavior(name) {
            Some(b) => game_value(&game, &builtins::behavior(b)?.behavior)?,
            None => bail!(UsageError(format!("`{name}` has no builtin quantum behavior; pass --classical or --behavior"))),
        },
    };
    let text = ctx.surd(&value);
    let json = json!({
        "game": game.name,
        "behavior": behavior,
        "value": text,
        "provenance": ctx.provenance(),
    });
    Ok(Report::ok(text, json))
}

/// Closed form when the behavior family has one, else the membership LP.
fn decomposition_at(loaded: &builtins::LoadedBehavior, x: &[usize]) -> Result<std::result::Result<PdDecomposition, Value>> {
    if let Some(d) = loaded.decomposition(x)? {
        return Ok(Ok(d));
    }
    Ok(match pd_membership(&loaded.behavior, x)? {
        PdMembership::Member(d) => Ok(d),
        PdMembership::NonMember(f) => Err(json!({
            "separating_value": f.value_at_behavior.to_string(),
            "support_restricted": f.support_restricted,
            "coefficients": f.coeffs.iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })),
    })
}

fn decomposition_json(ctx: &Ctx, d: &PdDecomposition) -> Value {
    json!({
        "target": d.target,
        "weights": d.weights.iter().map(|w| ctx.surd(w)).collect::<Vec<_>>(),
        "outcomes": d.outcomes,
        "parts": d.parts.iter().map(|p| serde_json::from_str::<Value>(&p.to_json()).expect("valid json")).collect::<Vec<_>>(),
    })
}

fn cmd_decompose(ctx: &Ctx, name: &str, at: &Target) -> Result<Report> {
    let loaded = builtins::behavior(name)?;
    let x = resolve_target(loaded.behavior.scenario(), at)?;
    match decomposition_at(&loaded, &x)? {
        Ok(d) => {
            let r = verify_decomposition(&loaded.behavior, &d)?;
            let text = format!(
                "{} parts deterministic at {:?}; max deviation {}; weights {}",
                d.parts.len(),
                x,
                ctx.surd(&r.max_deviation),
                if r.weights_valid { "valid" } else { "invalid" }
            );
            let json = json!({
                "decomposition": decomposition_json(ctx, &d),
                "verified": r.ok(),
                "max_deviation": ctx.surd(&r.max_deviation),
                "nondeterministic_parts": r.nondeterministic_parts,
                "provenance": ctx.provenance(),
            });
            Ok(Report::ok(text, json).check(r.ok(), "decomposition failed verification"))
        }
        Err(sep) => {
            let text = format!("no partially deterministic decomposition at {x:?}; separating functional attached");
            let json = json!({ "separating_functional": sep, "provenance": ctx.provenance() });
            Ok(Report::ok(text, json).check(false, "behavior lies outside the partially deterministic polytope"))
        }
    }
}

fn cmd_verify_thm3(ctx: &Ctx) -> Result<Report> {
    let (ok, summary, mut json) = match ctx.flags.mode {
        Mode::Exact => {
            let r = theorem3_verify()?;
            (r.ok(), r.summary(), r.to_json())
        }
        Mode::Float => {
            let r = theorem3_verify_with::<f64>(&ctx.flags.tol)?;
            (r.ok(), r.summary(), r.to_json())
        }
    };
    json["provenance"] = ctx.provenance();
    Ok(Report::ok(summary, json).check(ok, "a bound or certificate failed"))
}

fn cmd_attack(ctx: &Ctx, name: &str, at: &Target, gamma: f64, rounds: usize) -> Result<Report> {
    let Some(seed) = ctx.flags.seed else {
        bail!(UsageError("attack is stochastic; pass --seed".into()));
    };
    if !(gamma > 0.0 && gamma < 1.0) {
        bail!(UsageError(format!("--gamma {gamma} must lie strictly between 0 and 1")));
    }
    let loaded = builtins::behavior(name)?;
    let sc = loaded.behavior.scenario().clone();
    let x = resolve_target(&sc, at)?;
    let d = match decomposition_at(&loaded, &x)? {
        Ok(d) => d,
        Err(_) => bail!("no partially deterministic decomposition at {x:?} to attack with"),
    };
    let dist: Vec<Rational> = match &loaded.game {
        Some(g) => g.dist.clone(),
        None => {
            let n = sc.num_input_tuples() as i64;
            vec![sdlift::scalar::rat(1, n); n as usize]
        }
    };
    let t = attack_simulate(&loaded.behavior, &d, &dist, gamma, rounds, seed)?;
    let b = &t.bands;
    let text = format!(
        "guess rate {} over {} generation rounds; {}/{} test-round entries within 4σ (worst {:.2}σ)",
        t.guess_rate(),
        t.generation_rounds,
        b.within,
        b.entries,
        b.worst_sigma
    );
    let json = json!({
        "x_star": t.x_star,
        "gamma": gamma,
        "rounds": rounds,
        "generation_rounds": t.generation_rounds,
        "correct_guesses": t.correct_guesses,
        "guess_rate": t.guess_rate(),
        "bands": { "entries": b.entries, "within": b.within, "worst_sigma": b.worst_sigma },
        "provenance": ctx.provenance(),
    });
    let mut report = Report::ok(text, json)
        .check(t.correct_guesses == t.generation_rounds, "adversary missed a generation-round output")
        .check(b.all_within(), "an empirical test-round frequency left its 4σ band");
    report.csv = Some(format!(
        "# builtin={} mode=exact seed={seed} gamma={gamma} rounds={rounds}\n{}",
        ctx.builtin,
        t.to_csv(&sc)
    ));
    Ok(report)
}

fn cmd_guess(ctx: &Ctx, name: &str, at: &Target, adversary: Adversary) -> Result<Report> {
    let loaded = builtins::behavior(name)?;
    let x = resolve_target(loaded.behavior.scenario(), at)?;
    match adversary {
        Adversary::Classical => {
            let d = match decomposition_at(&loaded, &x)? {
                Ok(d) => d,
                Err(_) => bail!("no partially deterministic decomposition at {x:?}; no classical certificate"),
            };
            let v = guessing_certificate(&loaded.behavior, &x, &d)?;
            let text = format!("{} (certified)", ctx.surd(&v));
            let json = json!({
                "adversary": "classical",
                "x_star": x,
                "value": ctx.surd(&v),
                "certificate": decomposition_json(ctx, &d),
                "provenance": ctx.provenance(),
            });
            Ok(Report::ok(text, json))
        }
        Adversary::Ns => {
            let hint = loaded.decomposition(&x)?;
            let g = ns_guessing_lp(&loaded.behavior, &x, hint.as_ref())?;
            let text = format!("{} (certified)", ctx.surd(&g.value));
            let mut json = g.to_json();
            json["adversary"] = json!("ns");
            json["x_star"] = json!(x);
            json["provenance"] = ctx.provenance();
            Ok(Report::ok(text, json))
        }
    }
}

fn run(cli: &Cli) -> Result<Report> {
    let flags = &cli.run;
    if flags.mode == Mode::Float && !(flags.tol > 0.0) {
        bail!(UsageError(format!("--tol must be positive in float mode, got {}", flags.tol)));
    }
    let builtin = match &cli.command {
        Command::Build { name } => name.clone(),
        Command::Lift { input, .. } => input.clone(),
        Command::Value { game, .. } => game.clone(),
        Command::Decompose { behavior, .. } | Command::Attack { behavior, .. } | Command::Guess { behavior, .. } => {
            behavior.clone()
        }
        Command::VerifyThm3 => "chsh, i3322".into(),
    };
    let ctx = Ctx { flags, builtin };
    match &cli.command {
        Command::Build { name } => cmd_build(&ctx, name),
        Command::Lift { protocol, input } => cmd_lift(&ctx, *protocol, input),
        Command::Value { game, classical, behavior } => cmd_value(&ctx, game, *classical, behavior.as_deref()),
        Command::Decompose { behavior, at } => cmd_decompose(&ctx, behavior, at),
        Command::VerifyThm3 => cmd_verify_thm3(&ctx),
        Command::Attack { behavior, at, gamma, rounds } => cmd_attack(&ctx, behavior, at, *gamma, *rounds),
        Command::Guess { behavior, at, adversary } => cmd_guess(&ctx, behavior, at, *adversary),
    }
}

fn emit(flags: &RunFlags, report: &Report) -> Result<()> {
    let body = match flags.format {
        Format::Text => {
            // Provenance goes to stderr so stdout holds only the result.
            if let Some(p) = report.json.get("provenance") {
                eprintln!("provenance: {p}");
            }
            format!("{}\n", report.text)
        }
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report.json)?),
        Format::Csv => match &report.csv {
            Some(csv) => csv.clone(),
            None => bail!(UsageError("csv output is only available for attack transcripts".into())),
        },
    };
    match &flags.out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|r| emit(&cli.run, &r).map(|()| r));
    match outcome {
        Ok(r) if r.passed => ExitCode::SUCCESS,
        Ok(r) => {
            eprintln!("verification failed: {}", r.failure);
            ExitCode::from(1)
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
