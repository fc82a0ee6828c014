//! `ncgrad` command-line front end. Each command writes a JSON report and
//! exits with 0 (pass), 1 (fail, witness written) or 2 (error).

mod config;
mod model;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ncgrad::entfun::{self, MlsiConfig};
use ncgrad::gradest::{
    cge_check, default_t_grid, ge_check, intertwine_check, optimal_k_global, tensor_ge_harness, Candidate, GEReport,
    GeConfig, GeContext, IntertwineConfig, Mode, SearchConfig, GE_TOL,
};
use ncgrad::linalg::json::MatrixJson;
use ncgrad::means::OperatorMean;
use ncgrad::qms::verify_qms;
use ncgrad::transport::{self, SegmentRule, TransportConfig, TransportContext};
use ncgrad::zoo::{self, Model};
use ncgrad::{reproduce, sampling};
use serde::Serialize;
use serde_json::{json, Value};

use config::{parse_param, RunConfig};
use model::{load_model, model_hash};

#[derive(Parser, Debug)]
#[command(name = "ncgrad", version, about = "Gradient estimates for quantum Markov semigroups")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "NCGRAD_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `zoo:<name>` or a model JSON file.
    #[arg(long)]
    model: Option<String>,
    /// Zoo parameter `key=value` (repeatable).
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, String)>,
    #[arg(long)]
    mean: Option<String>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    num_rho: Option<usize>,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ancilla: Option<usize>,
    /// Report path (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Model catalog.
    #[command(subcommand)]
    Zoo(ZooCommand),
    /// Checks that the model is a symmetric quantum Markov semigroup.
    Verify(Common),
    /// GE(K,∞) on sampled densities and times.
    GeCheck(Common),
    /// CGE(K,∞) against an ancilla M_m.
    CgeCheck(Common),
    /// Search for the optimal GE constant.
    OptimalK {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 4000)]
        max_evals: usize,
    },
    /// Intertwining criterion with a candidate family.
    IntertwineCheck {
        #[command(flatten)]
        common: Common,
        /// `identity` (e^{-rate t} id) or `semigroup` (e^{-rate t} ⊕ P_t).
        #[arg(long, default_value = "identity")]
        candidate: String,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
    },
    /// GE for the tensor product with a second model.
    TensorCheck {
        #[command(flatten)]
        common: Common,
        /// Second factor (defaults to the first).
        #[arg(long)]
        model2: Option<String>,
    },
    /// Sampled upper bound on the modified log-Sobolev constant.
    Mlsi(Common),
    /// Decay of the Fisher information along the semigroup.
    FisherDecay {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV (t, entropy, relative entropy, Fisher information).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Upper bound on the transport distance between two densities.
    Transport {
        #[command(flatten)]
        common: Common,
        /// Matrix JSON of the first density (sampled when absent).
        #[arg(long)]
        rho0: Option<PathBuf>,
        /// Matrix JSON of the second density (the fixed-point projection of
        /// the first when absent).
        #[arg(long)]
        rho1: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        segments: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        /// Adds an indicative (non-rigorous) EVI report along the flow from
        /// the first density, with the second as reference point.
        #[arg(long)]
        evi: bool,
    },
    /// Runs every model check and prints a summary table.
    Reproduce {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated check ids (all when absent).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ZooCommand {
    /// Lists the catalog.
    List {
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Writes a model JSON.
    Build {
        name: String,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, String)>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Result of one command.
struct Outcome {
    report: Value,
    /// `None` for purely informational commands.
    pass: Option<bool>,
    witness: Option<Value>,
}

impl Outcome {
    fn checked(report: impl Serialize, pass: bool, witness: Option<Value>) -> Result<Self> {
        Ok(Self { report: serde_json::to_value(report)?, pass: Some(pass), witness })
    }
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let file = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        model: common.model.clone(),
        params: common.params.iter().cloned().collect(),
        mean: common.mean.clone(),
        k: common.k,
        mode: common.mode,
        num_rho: common.num_rho,
        t_grid: common.t_grid.clone(),
        seed: common.seed,
        ancilla: common.ancilla,
        output: common.output.clone(),
    };
    Ok(file.layered(flags))
}

struct Run {
    cfg: RunConfig,
    model: Model,
}

impl Run {
    fn new(common: &Common) -> Result<Self> {
        let cfg = resolve(common)?;
        let spec = cfg.model.clone().ok_or_else(|| anyhow!("no model given (use --model or the config file)"))?;
        let model = load_model(&spec, &cfg.params)?;
        Ok(Self { cfg, model })
    }

    fn mean(&self) -> Result<OperatorMean> {
        Ok(self.cfg.mean.as_deref().unwrap_or("logarithmic").parse()?)
    }

    fn k(&self) -> Result<f64> {
        self.cfg.k.or(self.model.constant).ok_or_else(|| anyhow!("no K given and the model has no known constant"))
    }

    fn mode(&self) -> Mode {
        self.cfg.mode.unwrap_or(self.model.mode)
    }

    fn ge_config(&self) -> Result<GeConfig> {
        let mode = self.mode();
        Ok(GeConfig {
            num_rho: self.cfg.num_rho.unwrap_or(20),
            t_grid: self.cfg.t_grid.clone().unwrap_or_else(default_t_grid),
            seed: self.cfg.seed_for(mode)?,
            mode,
            tensor_split: None,
            tol: GE_TOL,
        })
    }
}

fn ge_outcome(mut rep: GEReport, name: &str) -> Result<Outcome> {
    rep.model = name.to_string();
    let witness = if rep.pass { None } else { rep.witness.as_ref().map(serde_json::to_value).transpose()? };
    let pass = rep.pass;
    Outcome::checked(rep, pass, witness)
}

fn read_matrix(path: &Path) -> Result<ncgrad::linalg::CMat> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m: MatrixJson = serde_json::from_str(&text).with_context(|| format!("parsing matrix {}", path.display()))?;
    Ok(m.to_matrix()?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

/// Drops timing fields so equal runs give equal reports.
fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("runtime_ms");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn witness_path(output: Option<&Path>, command: &str) -> PathBuf {
    match output {
        Some(p) => p.with_extension("witness.json"),
        None => PathBuf::from(format!("{command}-witness.json")),
    }
}

/// Writes the report envelope; returns the exit code.
fn emit(command: &str, run: Option<&Run>, outcome: Outcome, started: Instant) -> Result<u8> {
    let Outcome { mut report, pass, witness } = outcome;
    strip_timing(&mut report);
    let output = run.and_then(|r| r.cfg.output.clone());
    let mut env = serde_json::Map::new();
    env.insert("command".into(), json!(command));
    if let Some(r) = run {
        env.insert("model".into(), json!(r.model.name));
        env.insert("model_hash".into(), json!(model_hash(&r.model)?));
        env.insert("reference".into(), json!(r.model.reference));
        env.insert("constant".into(), json!(r.model.constant));
        env.insert("config".into(), serde_json::to_value(&r.cfg)?);
    }
    env.insert("pass".into(), json!(pass));
    env.insert("report".into(), report);
    env.insert("runtime_ms".into(), json!(started.elapsed().as_millis() as u64));
    write_output(output.as_deref(), &(serde_json::to_string_pretty(&Value::Object(env))? + "\n"))?;
    match pass {
        Some(false) => {
            let path = witness_path(output.as_deref(), command);
            let w = witness.unwrap_or(Value::Null);
            std::fs::write(&path, serde_json::to_string_pretty(&w)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("{command}: FAIL, witness written to {}", path.display());
            Ok(1)
        }
        Some(true) => {
            eprintln!("{command}: PASS");
            Ok(0)
        }
        None => Ok(0),
    }
}

fn run_zoo(cmd: ZooCommand) -> Result<u8> {
    match cmd {
        ZooCommand::List { output } => {
            let list = zoo::catalog();
            for e in &list {
                eprintln!("{:<14} {:<18} K={:<4} {}", e.name, e.params, e.constant, e.reference);
            }
            write_output(output.as_deref(), &(serde_json::to_string_pretty(&list)? + "\n"))?;
        }
        ZooCommand::Build { name, params, n, d, p, output } => {
            let mut map: BTreeMap<String, String> = params.into_iter().collect();
            for (key, v) in [("n", n.map(|x| x.to_string())), ("d", d.map(|x| x.to_string())), ("p", p.map(|x| x.to_string()))] {
                if let Some(v) = v {
                    map.insert(key.into(), v);
                }
            }
            let model = zoo::build(&name, &map)?;
            write_output(output.as_deref(), &(serde_json::to_string_pretty(&model.to_json())? + "\n"))?;
            eprintln!("{}: {}", model.name, model_hash(&model)?);
        }
    }
    Ok(0)
}

fn dispatch(cmd: Command) -> Result<u8> {
    let started = Instant::now();
    let (name, run, outcome) = match cmd {
        Command::Zoo(z) => return run_zoo(z),
        Command::Reproduce { seed, only, output } => {
            let rep = reproduce::reproduce(seed, &only)?;
            eprint!("{}", reproduce::summary_table(&rep));
            let failing: Vec<_> = rep.rows.iter().filter(|r| !r.pass).cloned().collect();
            let witness = (!failing.is_empty()).then(|| serde_json::to_value(&failing)).transpose()?;
            let pass = rep.pass;
            return emit_reproduce(Outcome::checked(&rep, pass, witness)?, output.as_deref(), started);
        }
        Command::Verify(c) => {
            let run = Run::new(&c)?;
            let rep = verify_qms(&run.model.generator, run.cfg.t_grid.as_deref().unwrap_or(&[0.1, 1.0]))?;
            let witness = (!rep.pass).then(|| json!({ "failures": rep.failures }));
            let pass = rep.pass;
            ("verify", run, Outcome::checked(rep, pass, witness)?)
        }
        Command::GeCheck(c) => {
            let run = Run::new(&c)?;
            let rep = ge_check(&run.model.generator, run.mean()?, run.k()?, &run.ge_config()?)?;
            let out = ge_outcome(rep, &run.model.name)?;
            ("ge-check", run, out)
        }
        Command::CgeCheck(c) => {
            let run = Run::new(&c)?;
            let m = run.cfg.ancilla.unwrap_or(2);
            let rep = cge_check(&run.model.generator, run.mean()?, run.k()?, m, &run.ge_config()?)?;
            let out = ge_outcome(rep, &run.model.name)?;
            ("cge-check", run, out)
        }
        Command::TensorCheck { common, model2 } => {
            let run = Run::new(&common)?;
            let other = match &model2 {
                Some(spec) => load_model(spec, &run.cfg.params)?,
                None => run.model.clone(),
            };
            let rep = tensor_ge_harness(&run.model.generator, &other.generator, run.mean()?, run.k()?, &run.ge_config()?)?;
            let label = format!("{} x {}", run.model.name, other.name);
            let out = ge_outcome(rep, &label)?;
            ("tensor-check", run, out)
        }
        Command::OptimalK { common, restarts, max_evals } => {
            let run = Run::new(&common)?;
            let ctx = GeContext::new(&run.model.generator, run.mean()?);
            let cfg = SearchConfig {
                t_grid: run.cfg.t_grid.clone().unwrap_or_else(default_t_grid),
                restarts,
                max_evals,
                seed: run.cfg.seed.unwrap_or(0),
                starts: Vec::new(),
            };
            let rep = optimal_k_global(&ctx, &cfg)?;
            match rep.k_star {
                Some(k) => eprintln!("K* = {k:.9} at t = {:.3e}", rep.t_star),
                None => eprintln!("K* unbounded on every sampled point"),
            }
            // the search infimum can only sit above a proven constant
            let pass = match (rep.k_star, run.model.constant) {
                (Some(k), Some(known)) => Some(k >= known - 1e-6),
                _ => None,
            };
            let report = serde_json::to_value(&rep)?;
            ("optimal-k", run, Outcome { witness: pass.is_some_and(|p| !p).then(|| report.clone()), report, pass })
        }
        Command::IntertwineCheck { common, candidate, rate } => {
            let run = Run::new(&common)?;
            let cand = match candidate.as_str() {
                "identity" => Candidate::ScaledIdentity { rate },
                "semigroup" => Candidate::Semigroup { rate },
                other => bail!("unknown candidate '{other}' (identity or semigroup)"),
            };
            let mut cfg = IntertwineConfig { seed: run.cfg.seed.unwrap_or(0), ..Default::default() };
            if let Some(n) = run.cfg.num_rho {
                cfg.num_rho = n;
            }
            if let Some(t) = &run.cfg.t_grid {
                cfg.t_grid = t.clone();
            }
            let rep = intertwine_check(&run.model.generator, &cand, run.k()?, &cfg)?;
            let pass = rep.pass;
            let witness = (!pass).then(|| serde_json::to_value(&rep)).transpose()?;
            ("intertwine-check", run, Outcome::checked(rep, pass, witness)?)
        }
        Command::Mlsi(c) => {
            let run = Run::new(&c)?;
            let mut cfg = MlsiConfig { seed: run.cfg.seed.unwrap_or(0), ..Default::default() };
            if let Some(n) = run.cfg.num_rho {
                cfg.num_rho = n;
            }
            let rep = entfun::mlsi_estimate(&run.model.generator, &cfg)?;
            eprintln!("MLSI estimate {:.9}", rep.estimate);
            // GE(K,∞) gives the constant 2K
            let k = run.cfg.k.or(run.model.constant);
            let pass = k.map(|k| rep.estimate >= 2.0 * k - 1e-6);
            let report = serde_json::to_value(&rep)?;
            ("mlsi", run, Outcome { witness: pass.is_some_and(|p| !p).then(|| report.clone()), report, pass })
        }
        Command::FisherDecay { common, csv } => {
            let run = Run::new(&common)?;
            let seed = run.cfg.seed.unwrap_or(0);
            let alg = run.model.generator.algebra();
            let samples = (0..run.cfg.num_rho.unwrap_or(30) as u64)
                .map(|i| Ok(sampling::mixed_sample(alg, seed, i, None)?.1.into_inner()))
                .collect::<ncgrad::Result<Vec<_>>>()?;
            let t_grid = run.cfg.t_grid.clone().unwrap_or_else(|| (0..=25).map(|k| 0.2 * k as f64).collect());
            let rep = entfun::fisher_decay_check(&run.model.generator, run.k()?, &samples, &t_grid, GE_TOL)?;
            if let Some(path) = &csv {
                write_trajectories(path, &run.model, &samples, &t_grid)?;
            }
            let pass = rep.pass;
            let witness = if pass {
                None
            } else {
                let worst = rep.points.iter().min_by(|a, b| a.margin.total_cmp(&b.margin));
                let rho = worst.map(|p| MatrixJson::from_matrix(&samples[p.rho_id]));
                Some(json!({ "point": worst, "rho": rho }))
            };
            ("fisher-decay", run, Outcome::checked(rep, pass, witness)?)
        }
        Command::Transport { common, rho0, rho1, segments, iters, evi } => {
            let run = Run::new(&common)?;
            let gen = &run.model.generator;
            let seed = run.cfg.seed.unwrap_or(0);
            let a = match &rho0 {
                Some(p) => read_matrix(p)?,
                None => sampling::wishart(gen.algebra(), &mut sampling::point_rng(seed, 0))?.into_inner(),
            };
            let ctx = TransportContext::new(gen, run.mean()?)?;
            let b = match &rho1 {
                Some(p) => read_matrix(p)?,
                None => ctx.fixed_point_expectation(&a),
            };
            let cfg = TransportConfig { n: segments, iters, seed, rule: SegmentRule::Gauss(4) };
            let path = transport::optimize_path(&ctx, transport::linear_path(&a, &b, segments.max(1)), &cfg)?;
            eprintln!("{}: length {:.9}, energy {:.9}", path.kind, path.length, path.energy);
            let evi = if evi {
                let t_grid = run.cfg.t_grid.clone().unwrap_or_else(|| vec![0.05, 0.2, 0.5, 1.0]);
                Some(transport::evi_indicator(&ctx, &a, &b, run.k()?, &t_grid, 1e-3, &cfg)?)
            } else {
                None
            };
            let report = json!({ "path": path, "evi": evi });
            ("transport", run, Outcome { report, pass: None, witness: None })
        }
    };
    emit(name, Some(&run), outcome, started)
}

fn emit_reproduce(outcome: Outcome, output: Option<&Path>, started: Instant) -> Result<u8> {
    let Outcome { mut report, pass, witness } = outcome;
    strip_timing(&mut report);
    let env = json!({
        "command": "reproduce",
        "pass": pass,
        "report": report,
        "runtime_ms": started.elapsed().as_millis() as u64,
    });
    write_output(output, &(serde_json::to_string_pretty(&env)? + "\n"))?;
    if pass == Some(false) {
        let path = witness_path(output, "reproduce");
        std::fs::write(&path, serde_json::to_string_pretty(&witness.unwrap_or(Value::Null))? + "\n")?;
        eprintln!("reproduce: FAIL, failing rows written to {}", path.display());
        return Ok(1);
    }
    Ok(0)
}

fn write_trajectories(path: &Path, model: &Model, samples: &[ncgrad::linalg::CMat], t_grid: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["rho_id", "t", "entropy", "entropy_fix", "fisher"])?;
    for (i, rho) in samples.iter().enumerate() {
        for row in entfun::trajectory(&model.generator, rho, t_grid)? {
            w.serialize((i, row.t, row.entropy, row.entropy_fix, row.fisher))?;
        }
    }
    Ok(w.flush()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
