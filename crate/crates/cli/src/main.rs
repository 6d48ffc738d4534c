use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use scldpc::codes::{lift, simulate_bec, LiftMode};
use scldpc::de_awgn::{threshold_awgn, AwgnRunConfig, AwgnSearch, QuantConfig};
use scldpc::de_bec::{ieff_sweep, pb_profile, threshold_bec, ScheduleConfig};
use scldpc::distance::{growth_rate, GrowthConfig};
use scldpc::protograph::{build_chain, build_connected, build_custom, ConnectionSpec, Protograph};
use scldpc::Error;

const OUT_DIR_VAR: &str = "SCLDPC_OUT_DIR";

#[derive(Parser, Debug, Serialize)]
#[command(name = "scldpc", version, about = "Spatially coupled LDPC chain and connected-chain analysis")]
struct Cli {
    /// Output directory; defaults to $SCLDPC_OUT_DIR or the current directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Encoding of data files.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Build protographs and write them as JSON plus a base-matrix text file.
    Construct(EnsembleArgs),
    /// BEC or AWGN thresholds for a list of ensembles.
    Threshold(ThresholdArgs),
    /// Update complexity I_eff over a grid of erasure probabilities.
    Sweep(SweepArgs),
    /// Bit erasure probability along a chain or bridge at chosen iterations.
    Profile(ProfileArgs),
    /// Minimum distance growth rates.
    Growth(GrowthArgs),
    /// Lift a protograph to a parity-check matrix in alist format.
    Lift(LiftArgs),
    /// Monte Carlo peeling decoding of a lifted code on the BEC.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false, id = "ensemble")]
struct Selector {
    /// Single coupled chain C(3,6,L).
    #[arg(long)]
    chain: bool,
    /// Two chains joined by two bridges, S(3,6,L).
    #[arg(long)]
    connected: bool,
    /// JSON connection spec or protograph file.
    #[arg(long, value_name = "FILE")]
    custom: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EnsembleArgs {
    #[command(flatten)]
    select: Selector,
    /// Chain lengths, comma separated (ignored with --custom).
    #[arg(short = 'L', long = "length", value_delimiter = ',')]
    lengths: Vec<usize>,
}

#[derive(Args, Debug, Serialize)]
struct ScheduleArgs {
    /// Target bit erasure probability (and skip rule cut-off when selective).
    #[arg(long)]
    pbmax: Option<f64>,
    /// Improvement constraint of the selective schedule; 0 disables it.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Use the selective schedule instead of flooding.
    #[arg(long)]
    selective: bool,
    #[arg(long, default_value_t = 200_000)]
    max_iter: usize,
}

impl ScheduleArgs {
    fn config(&self) -> ScheduleConfig {
        let mut s = if self.selective {
            ScheduleConfig::selective(self.pbmax.unwrap_or(1e-5), self.theta)
        } else {
            let mut f = ScheduleConfig::flooding();
            if let Some(p) = self.pbmax {
                f.pb_max = p;
            }
            f
        };
        s.max_iterations = self.max_iter;
        s
    }
}

#[derive(Args, Debug, Serialize)]
struct ThresholdArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, conflicts_with = "awgn")]
    bec: bool,
    #[arg(long)]
    awgn: bool,
    /// BEC bisection tolerance.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// AWGN grid step.
    #[arg(long, default_value_t = 1.0 / 32.0)]
    delta: f64,
    #[arg(long, default_value_t = 25.0)]
    lmax: f64,
    /// AWGN search bracket in dB, `low:high`.
    #[arg(long, default_value = "0:3")]
    bracket: String,
    #[arg(long, default_value_t = 0.01)]
    tol_db: f64,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Erasure probability grid `start:end:step`.
    #[arg(long)]
    eps: String,
    #[arg(long, default_value_t = 1e-5)]
    pbmax: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Plain flooding instead of the selective schedule.
    #[arg(long)]
    flooding: bool,
}

#[derive(Args, Debug, Serialize)]
struct ProfileArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Slice name: chain0, chain1, bridge0, bridge1.
    #[arg(long, default_value = "chain0")]
    slice: String,
    /// Iterations `start:end:step`.
    #[arg(long, default_value = "1:51:5")]
    iters: String,
    #[arg(long, default_value_t = 0.48)]
    eps: f64,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args, Debug, Serialize)]
struct GrowthArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Also write the sampled r(delta) curve.
    #[arg(long)]
    curve: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Permutation,
    Circulant,
}

#[derive(Args, Debug, Serialize)]
struct LiftArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(short = 'm', long)]
    m: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Permutation)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(short = 'm', long)]
    m: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Permutation)]
    mode: ModeArg,
    /// Erasure probabilities `start:end:step` or a single value.
    #[arg(long)]
    eps: String,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Failure with its exit code.
#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged(_) | Error::Quantization(_) | Error::DegenerateGraph | Error::BadBracket { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn parse_range(s: &str) -> Outcome<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Failure::Config(format!("bad number {t:?} in {s:?}")));
    match parts.as_slice() {
        [x] => Ok(vec![num(x)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(Failure::Config(format!("range {s:?} needs start <= end and a positive step")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| a + i as f64 * step).collect())
        }
        _ => Err(Failure::Config(format!("range {s:?} is not start:end:step"))),
    }
}

fn load_custom(path: &Path) -> Outcome<Protograph> {
    let text = fs::read_to_string(path)?;
    if let Ok(spec) = serde_json::from_str::<ConnectionSpec>(&text) {
        return Ok(build_custom(&spec)?);
    }
    serde_json::from_str::<Protograph>(&text)
        .map_err(|e| Failure::Config(format!("{}: neither a connection spec nor a protograph: {e}", path.display())))
}

fn ensembles(args: &EnsembleArgs) -> Outcome<Vec<(String, Protograph)>> {
    if let Some(path) = &args.select.custom {
        let name = path.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
        return Ok(vec![(name, load_custom(path)?)]);
    }
    if args.lengths.is_empty() {
        return Err(Failure::Config("give at least one length with -L".into()));
    }
    args.lengths
        .iter()
        .map(|&l| {
            if args.select.chain {
                Ok((format!("C(3,6,{l})"), build_chain(3, 6, l)?))
            } else {
                Ok((format!("S(3,6,{l})"), build_connected(l)?))
            }
        })
        .collect()
}

fn rate(g: &Protograph) -> Outcome<(String, f64)> {
    let r = g.design_rate()?;
    Ok((format!("{}/{}", r.numer(), r.denom()), *r.numer() as f64 / *r.denom() as f64))
}

/// Column-named rows written as CSV or as a JSON array of records.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format) -> Outcome<String> {
        match format {
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                Ok(serde_json::to_string_pretty(&records).map_err(|e| Failure::Config(e.to_string()))? + "\n")
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let cell = |v: &Value| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                w.write_record(&self.columns).map_err(|e| Failure::Config(e.to_string()))?;
                for r in &self.rows {
                    w.write_record(r.iter().map(cell)).map_err(|e| Failure::Config(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| Failure::Config(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| Failure::Config(e.to_string()))
            }
        }
    }
}

struct Output {
    dir: PathBuf,
    format: Format,
    manifest: Value,
}

impl Output {
    fn ext(&self) -> &'static str {
        match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    /// Writes `<stem>.<ext>` and its manifest; returns the data path.
    fn table(&self, stem: &str, table: &Table) -> Outcome<PathBuf> {
        let path = self.dir.join(format!("{stem}.{}", self.ext()));
        fs::write(&path, table.render(self.format)?)?;
        self.manifest(stem, std::slice::from_ref(&path))?;
        Ok(path)
    }

    fn manifest(&self, stem: &str, files: &[PathBuf]) -> Outcome<()> {
        let mut m = self.manifest.clone();
        m["outputs"] = json!(files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
        let text = serde_json::to_string_pretty(&m).map_err(|e| Failure::Config(e.to_string()))?;
        fs::write(self.dir.join(format!("{stem}.manifest.json")), text + "\n")?;
        Ok(())
    }
}

/// `S(3,6,24)` becomes `S_3_6_24`.
fn file_stem(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    s.trim_matches('_').split('_').filter(|p| !p.is_empty()).collect::<Vec<_>>().join("_")
}

fn lift_mode(m: ModeArg) -> LiftMode {
    match m {
        ModeArg::Permutation => LiftMode::RandomPermutation,
        ModeArg::Circulant => LiftMode::Circulant,
    }
}

fn run(cli: &Cli, out: &Output) -> Outcome<()> {
    match &cli.command {
        Command::Construct(args) => {
            let mut files = Vec::new();
            for (name, g) in ensembles(args)? {
                let stem = file_stem(&name);
                let json_path = out.dir.join(format!("{stem}.json"));
                fs::write(&json_path, g.to_json()?)?;
                let mut text = Vec::new();
                g.write_base_matrix(&mut text)?;
                let txt_path = out.dir.join(format!("{stem}.txt"));
                fs::write(&txt_path, text)?;
                files.extend([json_path, txt_path]);
                println!("{name}: n_v={} n_c={} rate={}", g.n_v, g.n_c, rate(&g)?.0);
            }
            out.manifest("construct", &files)
        }
        Command::Threshold(args) => {
            if args.bec == args.awgn {
                return Err(Failure::Config("choose exactly one of --bec and --awgn".into()));
            }
            let list = ensembles(&args.ensemble)?;
            let mut t = Table::new(&["ensemble", "rate", "channel", "threshold"]);
            for (name, g) in &list {
                let (rs, _) = rate(g)?;
                let (channel, value) = if args.bec {
                    ("bec", threshold_bec::<f64>(g, &args.schedule.config(), args.tol)?)
                } else {
                    let b = bracket(&args.bracket)?;
                    let search = AwgnSearch { low_db: b.0, high_db: b.1, tol_db: args.tol_db, run: AwgnRunConfig::default() };
                    let q = QuantConfig { delta: args.delta, l_max: args.lmax };
                    ("awgn_ebn0_db", threshold_awgn::<f64>(g, &q, &search)?)
                };
                println!("{name} rate={rs} {channel}={value:.4}");
                t.push(vec![json!(name), json!(rs), json!(channel), json!(value)]);
            }
            out.table("threshold", &t).map(|_| ())
        }
        Command::Sweep(args) => {
            let grid = parse_range(&args.eps)?;
            let sched = if args.flooding {
                ScheduleConfig { pb_max: args.pbmax, ..ScheduleConfig::flooding() }
            } else {
                ScheduleConfig::selective(args.pbmax, args.theta)
            };
            let mut t = Table::new(&["ensemble", "eps", "i_eff", "converged", "iterations"]);
            for (name, g) in ensembles(&args.ensemble)? {
                for p in ieff_sweep::<f64>(&g, &grid, &sched)? {
                    t.push(vec![json!(name), json!(p.eps), json!(p.i_eff), json!(p.converged), json!(p.iterations)]);
                }
            }
            out.table("sweep", &t).map(|_| ())
        }
        Command::Profile(args) => {
            let iters: Vec<usize> = parse_range(&args.iters)?.into_iter().map(|x| x.round() as usize).collect();
            let mut t = Table::new(&["ensemble", "slice", "position", "index", "iteration", "pb"]);
            for (name, g) in ensembles(&args.ensemble)? {
                let vars = g.slice(&args.slice)?;
                for (it, pb) in pb_profile::<f64>(&g, args.eps, &args.schedule.config(), &args.slice, &iters)? {
                    for (i, p) in pb.into_iter().enumerate() {
                        let pos = g.node_meta.variables[vars[i]].position;
                        t.push(vec![json!(name), json!(args.slice), json!(pos), json!(i), json!(it), json!(p)]);
                    }
                }
            }
            out.table("profile", &t).map(|_| ())
        }
        Command::Growth(args) => {
            let cfg = GrowthConfig::default();
            let mut t = Table::new(&["ensemble", "rate", "delta_min"]);
            let mut curve = Table::new(&["ensemble", "delta", "r"]);
            for (name, g) in ensembles(&args.ensemble)? {
                let shape = growth_rate::<f64>(&g, &cfg)?;
                let (rs, _) = rate(&g)?;
                match shape.delta_min {
                    Some(d) => println!("{name} rate={rs} delta_min={d:.4}"),
                    None => println!("{name} rate={rs} delta_min=none"),
                }
                t.push(vec![json!(name), json!(rs), json!(shape.delta_min)]);
                for (d, r) in shape.delta_grid.iter().zip(&shape.r_values) {
                    curve.push(vec![json!(name), json!(d), json!(r)]);
                }
            }
            out.table("growth", &t)?;
            if args.curve {
                out.table("growth_curve", &curve)?;
            }
            Ok(())
        }
        Command::Lift(args) => {
            let mut files = Vec::new();
            for (name, g) in ensembles(&args.ensemble)? {
                let code = lift(&g, args.m, lift_mode(args.mode), args.seed)?;
                let path = out.dir.join(format!("{}_m{}.alist", file_stem(&name), args.m));
                let mut buf = Vec::new();
                code.h.write_alist(&mut buf)?;
                fs::write(&path, buf)?;
                files.push(path);
                let w4 = code.h.column_weights().iter().filter(|&&w| w == 4).count();
                println!("{name}: {} x {} parity-check matrix, {w4} weight-4 columns", code.h.n_rows, code.h.n_cols);
            }
            out.manifest("lift", &files)
        }
        Command::Simulate(args) => {
            let grid = parse_range(&args.eps)?;
            let mut t = Table::new(&[
                "ensemble", "eps", "m", "trials", "ber", "ber_ci_low", "ber_ci_high", "fer", "fer_ci_low", "fer_ci_high",
            ]);
            for (name, g) in ensembles(&args.ensemble)? {
                let code = lift(&g, args.m, lift_mode(args.mode), args.seed)?;
                for &eps in &grid {
                    let r = simulate_bec(&code, eps, args.trials, args.seed)?;
                    t.push(vec![
                        json!(name),
                        json!(eps),
                        json!(args.m),
                        json!(args.trials),
                        json!(r.ber),
                        json!(r.ber_ci.0),
                        json!(r.ber_ci.1),
                        json!(r.fer),
                        json!(r.fer_ci.0),
                        json!(r.fer_ci.1),
                    ]);
                }
            }
            out.table("simulate", &t).map(|_| ())
        }
    }
}

fn bracket(s: &str) -> Outcome<(f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Failure::Config(format!("bad bracket {s:?}")));
    match parts.as_slice() {
        [a, b] => Ok((num(a)?, num(b)?)),
        _ => Err(Failure::Config(format!("bracket {s:?} is not low:high"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    let manifest = json!({
        "tool": "scldpc",
        "version": env!("CARGO_PKG_VERSION"),
        "argv": std::env::args().collect::<Vec<_>>(),
        "config": serde_json::to_value(&cli).unwrap_or(Value::Null),
    });
    let out = Output { dir, format: cli.format, manifest };
    match run(&cli, &out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
