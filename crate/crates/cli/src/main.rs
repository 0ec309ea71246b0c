use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use bbp_core::bnb::{solve, HeuristicMode, RunConfig, SolveResult};
use bbp_core::branching::{BranchParams, BranchRule, Side};
use bbp_core::format::{parse_fe, parse_instance, write_instance};
use bbp_core::hull::{figure_data, DEFAULT_PIECE_CAP};
use bbp_core::lp::LpOptions;
use bbp_core::model::{build_graph, from_fe, generate_instance, normalize_box, BbpInstance, Shape};
use bbp_core::oracle::{grid_oracle, DEFAULT_POINT_CAP};
use bbp_core::relax::{build_node_relaxation, BlockEncoding, RelaxOptions, Relaxation};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

/// Global solver for bipartite bilinear programs.
#[derive(Parser)]
#[command(name = "bbp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Branch and bound on an instance file.
    Solve(SolveArgs),
    /// Root relaxation values under both relaxations.
    Root(RootArgs),
    /// Brute-force optimum over a grid in x.
    Oracle(OracleArgs),
    /// Write a random planted instance.
    Generate(GenerateArgs),
    /// Convert a finite-element model-updating input into an instance.
    FromFe(FromFeArgs),
    /// CSV of the curve, named points and cuts of q·u·v + a·u + b·v + c = 0.
    FigureData(FigureArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RelaxArg {
    Mccormick,
    Hull,
}

impl From<RelaxArg> for Relaxation {
    fn from(r: RelaxArg) -> Self {
        match r {
            RelaxArg::Mccormick => Relaxation::McCormick,
            RelaxArg::Hull => Relaxation::Hull,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Vertex,
    Disjunctive,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    X,
    Y,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicArg {
    Improving,
    Every,
    Off,
}

#[derive(Args)]
struct Output {
    /// Write the document here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "hull")]
    relaxation: RelaxArg,
    #[arg(long, default_value = "alg1", value_parser = parse_rule)]
    branch: BranchRule,
    /// Seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 100_000)]
    node_limit: usize,
    #[arg(long, default_value_t = 1e-4)]
    gap_tol: f64,
    #[arg(long = "K", default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 0.01)]
    eps1: f64,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    eps2: f64,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_PIECE_CAP)]
    piece_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_enum, default_value = "vertex")]
    encoding: EncodingArg,
    /// Variable set to branch on.
    #[arg(long, value_enum, default_value = "x")]
    side: SideArg,
    #[arg(long, value_enum, default_value = "improving")]
    heuristic: HeuristicArg,
    /// Write one line per node here.
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct RootArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PIECE_CAP)]
    piece_cap: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    grid: f64,
    /// Refuse grids with more points than this.
    #[arg(long, default_value_t = DEFAULT_POINT_CAP)]
    max_points: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct GenerateArgs {
    /// `n1,n2,rows,terms` with an optional fifth entry for objective terms.
    #[arg(long, value_parser = parse_shape)]
    shape: Shape,
    #[arg(long, default_value_t = 0.02)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct FromFeArgs {
    input: PathBuf,
    /// Perturb eigenvalues and measured shapes before conversion.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, allow_negative_numbers = true)]
    c: f64,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[command(flatten)]
    out: Output,
}

fn parse_rule(s: &str) -> Result<BranchRule, String> {
    s.parse()
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad shape entry `{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [n1, n2, rows, terms] => Ok(Shape::new(n1, n2, rows, terms)),
        [n1, n2, rows, terms, obj] => Ok(Shape { objective_terms: obj, ..Shape::new(n1, n2, rows, terms) }),
        _ => Err("shape takes n1,n2,rows,terms[,objectiveTerms]".into()),
    }
}

/// Input problems: exit code 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!(InputError(e)))
}

fn read(path: &Path) -> Result<String> {
    input(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())))
}

fn load_instance(path: &Path) -> Result<BbpInstance> {
    let text = read(path)?;
    let inst = input(parse_instance(&text).with_context(|| format!("cannot parse {}", path.display())))?;
    let diags = inst.validate();
    if !diags.is_empty() {
        let msg: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return input(Err(anyhow!("invalid instance {}:\n  {}", path.display(), msg.join("\n  "))));
    }
    Ok(inst)
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("documents serialize")
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SolveReport<'a> {
    instance: String,
    status: bbp_core::bnb::Status,
    termination: bbp_core::bnb::Termination,
    primal: Option<f64>,
    dual: f64,
    gap: Option<f64>,
    gap_percent: Option<f64>,
    root_bound: f64,
    nodes: usize,
    wall_time: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    config: &'a RunConfig,
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let config = RunConfig {
        relaxation: a.relaxation.into(),
        encoding: match a.encoding {
            EncodingArg::Vertex => BlockEncoding::Vertex,
            EncodingArg::Disjunctive => BlockEncoding::Disjunctive,
        },
        branch: BranchParams {
            rule: a.branch,
            side: match a.side {
                SideArg::X => Side::X,
                SideArg::Y => Side::Y,
            },
            k: a.k,
            eps1: a.eps1,
            eps2: a.eps2,
            gamma: a.gamma,
        },
        piece_cap: a.piece_cap,
        time_limit: a.time_limit,
        node_limit: a.node_limit,
        gap_tol: a.gap_tol,
        seed: a.seed,
        parallel: a.parallel,
        heuristic: match a.heuristic {
            HeuristicArg::Improving => HeuristicMode::Improving,
            HeuristicArg::Every => HeuristicMode::EveryNode,
            HeuristicArg::Off => HeuristicMode::Off,
        },
        ..RunConfig::default()
    };
    input(config.check().map_err(|e| anyhow!(e)))?;
    let inst = load_instance(&a.instance)?;
    let (norm, scaling) = normalize_box(&inst)?;
    let res: SolveResult = solve(&norm, &config)?;
    let (x, y) = if res.primal.is_some() { scaling.restore(&res.x, &res.y) } else { (Vec::new(), Vec::new()) };
    if let Some(p) = &a.log {
        fs::write(p, res.log_lines()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let report = SolveReport {
        instance: a.instance.display().to_string(),
        status: res.status,
        termination: res.termination,
        primal: res.primal,
        dual: res.dual,
        gap: res.gap,
        gap_percent: res.gap.map(|g| 100.0 * g),
        root_bound: res.root_bound,
        nodes: res.nodes,
        wall_time: res.wall_time,
        x,
        y,
        config: &config,
    };
    emit(&a.out, &to_json(&report))
}

fn cmd_root(a: RootArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let (norm, _) = normalize_box(&inst)?;
    let graph = build_graph(&norm);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for relaxation in [Relaxation::McCormick, Relaxation::Hull] {
        let start = Instant::now();
        let opts = RelaxOptions { relaxation, piece_cap: a.piece_cap, ..RelaxOptions::default() };
        let relax = build_node_relaxation(&norm, &graph, &norm.lower, &norm.upper, &opts);
        let sol = relax.solve(&LpOptions::default())?;
        let time = start.elapsed().as_secs_f64();
        values.push(sol.value);
        rows.push(json!({
            "relaxation": relaxation,
            "value": if sol.feasible { json!(sol.value) } else { json!(null) },
            "feasible": sol.feasible,
            "columns": relax.lp.num_vars(),
            "rows": relax.lp.num_rows(),
            "time": time,
        }));
    }
    let dominance = values[1] >= values[0] - 1e-7;
    let doc = json!({ "instance": a.instance.display().to_string(), "roots": rows, "hullDominates": dominance });
    emit(&a.out, &to_json(&doc))?;
    if !dominance {
        bail!("hull root value {} is below the McCormick value {}", values[1], values[0]);
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let (norm, scaling) = normalize_box(&inst)?;
    let res = grid_oracle(&norm, a.grid, a.max_points)?;
    let (x, y) = if res.value.is_some() { scaling.restore(&res.x, &res.y) } else { (Vec::new(), Vec::new()) };
    let doc = json!({
        "instance": a.instance.display().to_string(),
        "value": res.value,
        "x": x,
        "y": y,
        "gridStep": res.step,
        "points": res.points,
    });
    emit(&a.out, &to_json(&doc))
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let inst = input(generate_instance(&a.shape, a.noise, a.seed).map_err(Into::into))?;
    emit(&a.out, &write_instance(&inst))
}

fn cmd_from_fe(a: FromFeArgs) -> Result<()> {
    let text = read(&a.input)?;
    let fe = input(parse_fe(&text).with_context(|| format!("cannot parse {}", a.input.display())))?;
    let fe = if a.noise > 0.0 { fe.with_noise(a.noise, a.seed) } else { fe };
    let (inst, _) = input(from_fe(&fe).map_err(Into::into))?;
    emit(&a.out, &write_instance(&inst))
}

fn cmd_figure(a: FigureArgs) -> Result<()> {
    let csv = input(figure_data(a.q, a.a, a.b, a.c, a.samples).map_err(Into::into))?;
    emit(&a.out, csv.trim_end())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Root(a) => cmd_root(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Generate(a) => cmd_generate(a),
        Command::FromFe(a) => cmd_from_fe(a),
        Command::FigureData(a) => cmd_figure(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
