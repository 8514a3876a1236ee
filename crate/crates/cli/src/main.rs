//! `nucleo`: nucleolus and weight-coincidence checks for weighted majority games.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nucleo::experiments::{coincidence_onset, emit_report, run_sequence, Family, RatioPair, ReportFormat, SequenceSpec};
use nucleo::nucleolus::nucleolus_with;
use nucleo::parse::{format_game, parse_game};
use nucleo::theory::{
    coincidence_condition, gap_report, interchangeable_pairs, is_constant_sum, is_homogeneous_rep, l1_distance,
    lemma_bound, normalized_weights, null_players, permits_homogeneous_rep, INTERCHANGE_LIMIT,
};
use nucleo::{Engine, Error, Rational, Representation, SolverOptions};
use serde_json::{json, Value};

mod verify;

#[derive(Parser)]
#[command(name = "nucleo", version, about = "Exact nucleolus of weighted majority games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the nucleolus and its distance to the normalized weights.
    Solve(SolveArgs),
    /// Coincidence condition, distance bound and classifiers.
    Check(CheckArgs),
    /// Structural properties: constant-sum, homogeneity, null and interchangeable players.
    Classify(ClassifyArgs),
    /// Print the rho-replica of a game.
    Replicate(ReplicateArgs),
    /// Run a game sequence and write a convergence report.
    Experiment(ExperimentArgs),
    /// Cross-check the engines on seeded random games.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Input {
    /// Inline game, e.g. "8; 6 4 3 2".
    #[arg(conflicts_with = "file", required_unless_present = "file")]
    game: Option<String>,
    /// Read the game from a file.
    #[arg(long, short)]
    file: Option<PathBuf>,
}

impl Input {
    fn load(&self) -> Result<Representation, Failure> {
        let text = match (&self.game, &self.file) {
            (Some(g), _) => g.clone(),
            (None, Some(path)) => fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?,
            (None, None) => return Err(Failure::input("no game given".into())),
        };
        Ok(parse_game(&text)?)
    }
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Brute,
    Typed,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Auto => Engine::Auto,
            EngineArg::Brute => Engine::Brute,
            EngineArg::Typed => Engine::Typed,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    engine: EngineArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    engine: EngineArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReplicateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    rho: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Eq3,
    Replica,
    Custom,
}

#[derive(Args)]
struct ExperimentArgs {
    family: FamilyArg,
    /// Player range for eq3, e.g. 2..9.
    #[arg(long)]
    n: Option<String>,
    /// Replication range, e.g. 1..4.
    #[arg(long)]
    rho: Option<String>,
    /// Base game for replicas.
    #[arg(long)]
    base: Option<String>,
    /// File with one game per line for the custom family.
    #[arg(long)]
    games: Option<PathBuf>,
    /// Ratio pair `i,j` (players) or `wA,wB` (weights); repeatable.
    #[arg(long = "pair")]
    pairs: Vec<String>,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    engine: EngineArg,
    /// Report path; `-` for standard output. Defaults to `<family>_<range>.<ext>` in --out-dir.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    games: usize,
    /// Largest player count of the generated games.
    #[arg(long, default_value_t = 10)]
    max_n: usize,
}

/// An error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: String) -> Self {
        Failure { code: 2, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TooManyPlayers { .. } | Error::EnumerationLimit { .. } | Error::WeightTooLarge(_) => 3,
            Error::Internal(_) | Error::MalformedProgram(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = SolverOptions::from_env().map_err(Failure::from).and_then(|options| match cli.command {
        Command::Solve(a) => solve(a, &options),
        Command::Check(a) => check(a, &options),
        Command::Classify(a) => classify(a),
        Command::Replicate(a) => replicate(a),
        Command::Experiment(a) => experiment(a, &options),
        Command::Verify(a) => verify::run(a.seed, a.games, a.max_n, &options),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn write_out(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) if path.as_os_str() != "-" => fs::write(path, text)
            .map_err(|e| Failure { code: 1, message: format!("cannot write {}: {e}", path.display()) }),
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure { code: 1, message: e.to_string() })
        }
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Space-separated values; long vectors use `k*v` runs.
fn compact(items: Vec<String>) -> String {
    if items.len() <= 20 {
        return items.join(" ");
    }
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let run = items[i..].iter().take_while(|v| **v == items[i]).count();
        parts.push(if run > 1 { format!("{run}*{}", items[i]) } else { items[i].clone() });
        i += run;
    }
    parts.join(" ")
}

fn fractions(xs: &[Rational]) -> String {
    compact(xs.iter().map(ToString::to_string).collect())
}

fn approx(xs: &[Rational]) -> String {
    compact(xs.iter().map(Rational::approx).collect())
}

fn game_line(rep: &Representation) -> String {
    format!("[{}; {}]", rep.quota(), compact(rep.input_weights().iter().map(ToString::to_string).collect()))
}

fn players(xs: &[usize]) -> String {
    if xs.is_empty() {
        return "none".into();
    }
    xs.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn solve(args: SolveArgs, options: &SolverOptions) -> Result<u8, Failure> {
    let rep = args.input.load()?;
    let res = nucleolus_with(&rep, args.engine.into(), options)?;
    let w_bar = normalized_weights(&rep)?;
    let gap = match gap_report(&rep, &res.x_star) {
        Ok(g) => Some(g),
        Err(Error::DegenerateQuota) => None,
        Err(e) => return Err(e.into()),
    };
    let l1 = l1_distance(&res.x_star, &w_bar);
    let text = match args.output.format {
        Format::Json => to_json(&json!({
            "game": rep,
            "engine": res.engine,
            "stages": res.stages,
            "x_star": res.x_star,
            "w_bar": w_bar,
            "l1_gap": l1,
            "gap_report": gap,
            "levels": res.levels,
        })),
        Format::Csv => {
            let mut s = String::from("player,weight,w_bar,x_star,x_star_approx\n");
            for (i, w) in rep.input_weights().iter().enumerate() {
                s += &format!("{},{},{},{},{}\n", i + 1, w, w_bar[i], res.x_star[i], res.x_star[i].approx());
            }
            s
        }
        Format::Human => {
            let mut s = format!("game     {}\n", game_line(&rep));
            s += &format!("engine   {} ({} stages)\n", res.engine, res.stages);
            s += &format!("x*       {}\n", fractions(&res.x_star));
            s += &format!("x* ≈     {}\n", approx(&res.x_star));
            s += &format!("w̄        {}\n", fractions(&w_bar));
            match &gap {
                Some(g) => {
                    s += &format!("gap      {} (≈ {})\n", g.l1_gap, g.l1_gap.approx());
                    s += &format!("bound    {} ({})\n", g.bound, if g.bound_holds { "holds" } else { "VIOLATED" });
                    s += &format!("delta    {} with w̄(S-) = {}\n", g.delta, g.w_bar_s_minus);
                }
                None => s += &format!("gap      {l1} (bound undefined for q̄ = 1)\n"),
            }
            s += "levels\n";
            for level in &res.levels {
                let shown: Vec<String> = level.coalitions.iter().take(8).map(ToString::to_string).collect();
                let more = level.coalitions.len().saturating_sub(8);
                let tail = if more > 0 { format!(" … (+{more})") } else { String::new() };
                s += &format!("  ε = {}: {}{tail}\n", level.epsilon, shown.join(" "));
            }
            s
        }
    };
    write_out(&args.output.output, &text)?;
    Ok(0)
}

fn optional<T>(r: Result<T, Error>) -> Result<Option<T>, Failure> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateQuota) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn check(args: CheckArgs, options: &SolverOptions) -> Result<u8, Failure> {
    let rep = args.input.load()?;
    let integer = rep.to_integer();
    let coincidence = optional(coincidence_condition(&integer))?;
    let bound = optional(lemma_bound(&rep))?;
    let constant_sum = is_constant_sum(&rep)?;
    let homogeneous = is_homogeneous_rep(&rep);
    let nulls = null_players(&rep);
    let x_star = nucleolus_with(&rep, args.engine.into(), options)?.x_star;
    let w_bar = normalized_weights(&rep)?;
    let coincides = x_star == w_bar;
    let text = match args.output.format {
        Format::Json => to_json(&json!({
            "game": rep,
            "integer_game": integer,
            "coincidence": coincidence,
            "lemma_bound": bound,
            "constant_sum": constant_sum,
            "homogeneous": homogeneous,
            "null_players": nulls.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "x_star": x_star,
            "x_star_equals_w_bar": coincides,
        })),
        Format::Csv => {
            let mut s = String::from("property,value\n");
            if let Some(c) = &coincidence {
                s += &format!("lhs,{}\nrhs,{}\nholds,{}\nreplica_threshold,{}\n", c.lhs, c.rhs, c.holds, c.replica_threshold);
            }
            s += &format!("lemma_bound,{}\n", bound.as_ref().map_or("undefined".into(), ToString::to_string));
            s += &format!("constant_sum,{constant_sum}\nhomogeneous,{homogeneous}\nx_star_equals_w_bar,{coincides}\n");
            s
        }
        Format::Human => {
            let mut s = format!("game          {}\n", game_line(&rep));
            if integer != rep {
                s += &format!("integer form  {}\n", game_line(&integer));
            }
            match &coincidence {
                Some(c) => {
                    s += &format!("condition     min(q̄, 1 − q̄)·m° = {} vs 2t·w₁² = {}: {}\n", c.lhs, c.rhs, if c.holds { "holds" } else { "fails" });
                    s += &format!("              t = {}, m° = {}, w₁ = {}, replica threshold ρ̃ = {}\n", c.t, c.m_circ, c.w1, c.replica_threshold);
                }
                None => s += "condition     undefined (q̄ = 1)\n",
            }
            s += &format!("lemma bound   {}\n", bound.as_ref().map_or("undefined".into(), ToString::to_string));
            s += &format!("constant-sum  {constant_sum}\n");
            s += &format!("homogeneous   {homogeneous}\n");
            s += &format!("null players  {}\n", players(&nulls));
            s += &format!("x*            {}\n", fractions(&x_star));
            s += &format!("x* = w̄        {coincides}\n");
            s
        }
    };
    write_out(&args.output.output, &text)?;
    Ok(0)
}

fn classify(args: ClassifyArgs) -> Result<u8, Failure> {
    let rep = args.input.load()?;
    let constant_sum = is_constant_sum(&rep)?;
    let homogeneous = is_homogeneous_rep(&rep);
    let permits = permits_homogeneous_rep(&rep)?;
    let nulls = null_players(&rep);
    let pairs = if rep.n() <= INTERCHANGE_LIMIT { Some(interchangeable_pairs(&rep)?) } else { None };
    let table = rep.weight_types();
    let text = match args.output.format {
        Format::Json => to_json(&json!({
            "game": rep,
            "t": table.t(),
            "m_circ": table.m_circ(),
            "constant_sum": constant_sum,
            "homogeneous": homogeneous,
            "permits_homogeneous": permits,
            "null_players": nulls.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "interchangeable_pairs": pairs.as_ref().map(|p| p.iter().map(|(i, j)| [i + 1, j + 1]).collect::<Vec<_>>()),
        })),
        Format::Csv => {
            let mut s = String::from("property,value\n");
            s += &format!("t,{}\nm_circ,{}\nconstant_sum,{constant_sum}\nhomogeneous,{homogeneous}\n", table.t(), table.m_circ());
            s += &format!("permits_homogeneous,{}\n", permits.permits);
            s
        }
        Format::Human => {
            let mut s = format!("game                  {}\n", game_line(&rep));
            s += &format!("weight types          t = {}, m° = {}\n", table.t(), table.m_circ());
            s += &format!("constant-sum          {constant_sum}\n");
            s += &format!("homogeneous           {homogeneous}\n");
            match &permits.witness {
                Some(w) => s += &format!("homogeneous form      {}\n", game_line(w)),
                None => s += "homogeneous form      none\n",
            }
            s += &format!("null players          {}\n", players(&nulls));
            match &pairs {
                Some(p) => {
                    let list: Vec<String> = p.iter().map(|(i, j)| format!("{{{},{}}}", i + 1, j + 1)).collect();
                    s += &format!("interchangeable pairs {}\n", if list.is_empty() { "none".into() } else { list.join(" ") });
                }
                None => s += &format!("interchangeable pairs skipped (n > {INTERCHANGE_LIMIT})\n"),
            }
            s
        }
    };
    write_out(&args.output.output, &text)?;
    Ok(0)
}

fn replicate(args: ReplicateArgs) -> Result<u8, Failure> {
    let rep = args.input.load()?;
    if args.rho == 0 {
        return Err(Failure::input("--rho must be at least 1".into()));
    }
    let out = rep.replicate(args.rho)?;
    let text = match args.output.format {
        Format::Json => to_json(&json!(out)),
        Format::Csv => {
            let mut s = String::from("player,weight\n");
            for (i, w) in out.input_weights().iter().enumerate() {
                s += &format!("{},{w}\n", i + 1);
            }
            s
        }
        Format::Human => format!("{}\n", format_game(&out)),
    };
    write_out(&args.output.output, &text)?;
    Ok(0)
}

fn parse_range(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::input(format!("bad range `{text}`; expected a..b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn experiment(args: ExperimentArgs, options: &SolverOptions) -> Result<u8, Failure> {
    let format: ReportFormat = args.format.parse()?;
    let family = match args.family {
        FamilyArg::Eq3 => Family::Eq3,
        FamilyArg::Replica => {
            let base = args.base.as_deref().unwrap_or("5; 4 3 2");
            Family::Replica(parse_game(base)?)
        }
        FamilyArg::Custom => {
            let path = args.games.as_ref().ok_or_else(|| Failure::input("custom family needs --games FILE".into()))?;
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            let games = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(parse_game)
                .collect::<Result<Vec<_>, _>>()?;
            Family::Custom(games)
        }
    };
    let range = match (&family, &args.n, &args.rho) {
        (Family::Eq3, Some(r), _) | (Family::Replica(_), _, Some(r)) => parse_range(r)?,
        (Family::Eq3, None, _) => (2, 9),
        (Family::Replica(_), _, None) => (1, 4),
        (Family::Custom(list), n, _) => match n {
            Some(r) => parse_range(r)?,
            None => (1, list.len()),
        },
    };
    let spec = SequenceSpec::new(family, range.0, range.1)?;
    let pairs = args.pairs.iter().map(|p| p.parse::<RatioPair>()).collect::<Result<Vec<_>, _>>()?;
    let rows = run_sequence(&spec, &pairs, args.engine.into(), options)?;
    let text = emit_report(&rows, format.extension())?;
    let target = args.output.clone().unwrap_or_else(|| args.out_dir.join(spec.file_name(format)));
    write_out(&Some(target.clone()), &text)?;
    let onset = coincidence_onset(&rows).map_or("none".into(), |p| p.to_string());
    let summary = format!("{} rows, coincidence from parameter {onset}", rows.len());
    if target.as_os_str() == "-" {
        eprintln!("{summary}");
    } else {
        println!("wrote {}: {summary}", target.display());
    }
    Ok(0)
}
