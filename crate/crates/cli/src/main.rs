use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use stabent::bounds::{appendix_table, bound_report, BoundReport, StateRef};
use stabent::entropy::{entropy_report, stabilizer_entropy, RenyiIndex};
use stabent::io::{AnyStateFile, StateFile};
use stabent::protocol::{run_protocol_with, BranchState, ProtocolProgram, RunOptions, StateCollection};
use stabent::roof::{collection_min_entropy, extended_purity, OptimizerOptions};
use stabent::spectrum::char_spectrum_with_limit;
use stabent::verify::{run_suite, SuiteOptions};
use stabent::{make_named_state, DensityState, NamedState, PureState};

#[derive(Parser, Debug)]
#[command(name = "stabent", version, about = "Stabilizer entropies, stabilizer protocols and magic-state conversion bounds")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "STABENT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stabilizer purity, entropy, linear entropy and nullity, one JSON line per alpha.
    Entropy {
        #[command(flatten)]
        input: StateArg,
        /// Comma-separated Rényi indices.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        alpha: Vec<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// The characteristic distribution over all Pauli strings.
    Spectrum {
        #[command(flatten)]
        input: StateArg,
        /// Only list entries strictly above this value.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// Largest register accepted.
        #[arg(long, default_value_t = stabent::spectrum::DEFAULT_MAX_QUBITS)]
        max_qubits: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run a stabilizer protocol script on a pure state.
    Protocol {
        #[command(flatten)]
        input: StateArg,
        /// JSON script: an array of step objects.
        #[arg(long)]
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = Report::Branches)]
        report: Report,
        /// Rényi indices for `--report monotones`.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        alpha: Vec<u32>,
        /// Partial traces produce mixed branches instead of forgetful measurements.
        #[arg(long)]
        density_trace_out: bool,
        /// Follow one sampled branch instead of all of them.
        #[arg(long)]
        sample_seed: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Convex-roof extensions of a pure or mixed state.
    Roof {
        #[command(flatten)]
        input: StateArg,
        #[arg(long, default_value_t = 2)]
        alpha: u32,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        /// Also bound the minimum over decompositions.
        #[arg(long)]
        min: bool,
        /// Include the optimal decompositions in the output.
        #[arg(long)]
        certificate: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Conversion-rate and probability bounds.
    Bounds {
        #[arg(long, default_value_t = 2)]
        alpha: u32,
        /// Source state; with `--target`, reports a single row instead of the table.
        #[arg(long, requires = "target")]
        source: Option<String>,
        #[arg(long, requires = "source")]
        target: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        out: OutArg,
    },
    /// Randomized certification suites; exits 1 if any suite fails.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        alpha: Vec<u32>,
        #[command(flatten)]
        out: OutArg,
    },
    /// State-file utilities.
    State {
        #[command(subcommand)]
        command: StateCommand,
    },
}

#[derive(Subcommand, Debug)]
enum StateCommand {
    /// Write a named state as a state file.
    Gen {
        /// T, cs, ccz, ckz:m, cks:m, zeros:n or haar:n:seed.
        #[arg(long)]
        name: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct StateArg {
    /// A state file, or a shorthand: T, cs, ccz, ckz:m, cks:m, zeros:n, haar:n:seed.
    #[arg(long)]
    state: String,
}

#[derive(Args, Debug)]
struct OutArg {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OptimizerArgs {
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Largest decomposition size; defaults to twice the rank.
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl From<&OptimizerArgs> for OptimizerOptions {
    fn from(a: &OptimizerArgs) -> Self {
        OptimizerOptions {
            restarts: a.restarts,
            m_max: a.m_max,
            max_iterations: a.max_iterations,
            seed: a.seed,
            tol: a.tol,
            ..OptimizerOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Report {
    Branches,
    Monotones,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

enum Loaded {
    Pure(PureState),
    Mixed(DensityState),
}

fn load_state(spec: &str) -> Result<Loaded> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        let file: AnyStateFile = serde_json::from_str(&text).with_context(|| format!("parsing state file {spec}"))?;
        return Ok(match file {
            AnyStateFile::Pure(f) => Loaded::Pure(f.into_state()?),
            AnyStateFile::Density(f) => Loaded::Mixed(f.into_state()?),
        });
    }
    let named: NamedState = spec
        .parse()
        .with_context(|| format!("{spec:?} is neither a file nor a state shorthand"))?;
    Ok(Loaded::Pure(make_named_state(&named)?))
}

fn load_pure(spec: &str) -> Result<PureState> {
    match load_state(spec)? {
        Loaded::Pure(s) => Ok(s),
        Loaded::Mixed(_) => bail!("{spec} holds a density matrix; this command needs a pure state"),
    }
}

fn state_ref(spec: &str) -> Result<StateRef> {
    if !Path::new(spec).is_file() {
        if let Ok(named) = spec.parse::<NamedState>() {
            return Ok(named.into());
        }
    }
    Ok(load_pure(spec)?.into())
}

fn emit(out: &OutArg, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cmd_entropy(input: &StateArg, alphas: &[f64]) -> Result<String> {
    let state = load_pure(&input.state)?;
    let mut text = String::new();
    for &a in alphas {
        let report = entropy_report(&state, RenyiIndex::new(a)?)?;
        let mut v = serde_json::to_value(&report)?;
        v["state"] = json!(input.state);
        text += &serde_json::to_string(&v)?;
        text.push('\n');
    }
    Ok(text)
}

fn cmd_spectrum(input: &StateArg, threshold: f64, max_qubits: usize) -> Result<String> {
    let state = load_pure(&input.state)?;
    let spec = char_spectrum_with_limit(&state, max_qubits)?;
    let entries: Vec<Value> = spec
        .support(threshold)
        .into_iter()
        .map(|(p, xi)| json!({ "pauli": p.to_string(), "xi": xi }))
        .collect();
    pretty(&json!({
        "n": spec.num_qubits(),
        "total": spec.total(),
        "entries": entries,
    }))
}

fn branch_monotones(state: &BranchState, alphas: &[u32]) -> Result<Value> {
    let mut m = serde_json::Map::new();
    for &a in alphas {
        let v = match state {
            BranchState::Pure(s) => json!({ "entropy": stabilizer_entropy(s, RenyiIndex::from(a))? }),
            BranchState::Mixed(r) => {
                let single = StateCollection::from_density(r.clone());
                let p = extended_purity(&single, a, &OptimizerOptions::default())?.value;
                json!({
                    "roof_purity_lower_bound": p,
                    "roof_entropy_upper_bound": stabilizer_entropy_from(p, a),
                })
            }
        };
        m.insert(format!("alpha_{a}"), v);
    }
    Ok(Value::Object(m))
}

fn stabilizer_entropy_from(p: f64, a: u32) -> f64 {
    stabent::entropy::entropy_from_purity(p, RenyiIndex::from(a)).max(0.0)
}

fn cmd_protocol(
    input: &StateArg,
    program: &Path,
    report: Report,
    alphas: &[u32],
    density_trace_out: bool,
    sample_seed: Option<u64>,
) -> Result<String> {
    let state = load_pure(&input.state)?;
    let text = fs::read_to_string(program).with_context(|| format!("reading {}", program.display()))?;
    let program = ProtocolProgram::from_json(&text)?;
    let options = RunOptions {
        density_trace_out,
        sample_seed,
        ..RunOptions::default()
    };
    let out = run_protocol_with(&state, &program, &options)?;
    let entries = out
        .entries()
        .iter()
        .map(|e| {
            let mut v = json!({ "weight": e.weight, "state": e.state });
            if matches!(report, Report::Monotones) {
                v["monotones"] = branch_monotones(&e.state, alphas)?;
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    pretty(&json!({
        "num_branches": out.len(),
        "total_weight": out.total_weight(),
        "entries": entries,
        "events": out.events(),
    }))
}

fn cmd_roof(input: &StateArg, alpha: u32, opts: &OptimizerOptions, min: bool, certificate: bool) -> Result<String> {
    let collection = match load_state(&input.state)? {
        Loaded::Pure(s) => StateCollection::from_pure(s),
        Loaded::Mixed(r) => StateCollection::from_density(r),
    };
    let res = extended_purity(&collection, alpha, opts)?;
    let mut v = json!({
        "alpha": alpha,
        "extended_purity": res.value,
        "extended_entropy": stabilizer_entropy_from(res.value, alpha),
        "extended_linear": (1.0 - res.value).max(0.0),
        "trace": res.trace,
    });
    if certificate {
        v["decompositions"] = serde_json::to_value(&res.decompositions)?;
    }
    if min {
        let m = collection_min_entropy(&collection, alpha, opts)?;
        v["min_entropy"] = json!(m.value);
        if certificate {
            v["min_decompositions"] = serde_json::to_value(&m.decompositions)?;
        }
    }
    pretty(&v)
}

fn bounds_text(rows: &[BoundReport]) -> String {
    let header = ["source", "target", "alpha", "rate_bound", "prob_bound", "headline", "backward_lb"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.source.clone(),
                r.target.clone(),
                r.alpha.to_string(),
                format!("{:.12}", r.rate_bound),
                format!("{:.12}", r.prob_bound),
                r.headline.map_or("-".into(), |h| format!("{h:.1}")),
                r.backward_lower_bound.map_or("-".into(), |b| format!("{b:.12}")),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|k| cells.iter().map(|c| c[k].len()).chain([header[k].len()]).max().unwrap_or(0))
        .collect();
    let line = |cols: Vec<&str>| {
        cols.iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
            + "\n"
    };
    let mut text = line(header.to_vec());
    for c in &cells {
        text += &line(c.iter().map(String::as_str).collect());
    }
    text
}

fn cmd_bounds(alpha: u32, source: Option<&str>, target: Option<&str>, format: Format) -> Result<String> {
    let rows = match (source, target) {
        (Some(s), Some(t)) => vec![bound_report(&state_ref(s)?, &state_ref(t)?, alpha)?],
        _ => appendix_table(alpha)?,
    };
    match format {
        Format::Json => pretty(&rows),
        Format::Text => Ok(bounds_text(&rows)),
    }
}

fn cmd_verify(suite: &str, trials: usize, seed: u64, alpha: Vec<u32>) -> Result<(String, bool)> {
    let reports = run_suite(suite, &SuiteOptions { trials, seed, alphas: alpha })?;
    for r in &reports {
        log::info!("{}: {} ({} failures)", r.suite, if r.passed() { "PASS" } else { "FAIL" }, r.failures.len());
    }
    Ok((pretty(&reports)?, reports.iter().all(|r| r.passed())))
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut ok = true;
    match cli.command {
        Command::Entropy { input, alpha, out } => emit(&out, &cmd_entropy(&input, &alpha)?)?,
        Command::Spectrum {
            input,
            threshold,
            max_qubits,
            out,
        } => emit(&out, &cmd_spectrum(&input, threshold, max_qubits)?)?,
        Command::Protocol {
            input,
            program,
            report,
            alpha,
            density_trace_out,
            sample_seed,
            out,
        } => emit(
            &out,
            &cmd_protocol(&input, &program, report, &alpha, density_trace_out, sample_seed)?,
        )?,
        Command::Roof {
            input,
            alpha,
            optimizer,
            min,
            certificate,
            out,
        } => emit(&out, &cmd_roof(&input, alpha, &(&optimizer).into(), min, certificate)?)?,
        Command::Bounds {
            alpha,
            source,
            target,
            format,
            out,
        } => emit(&out, &cmd_bounds(alpha, source.as_deref(), target.as_deref(), format)?)?,
        Command::Verify {
            suite,
            trials,
            seed,
            alpha,
            out,
        } => {
            let (text, passed) = cmd_verify(&suite, trials, seed, alpha)?;
            emit(&out, &text)?;
            ok = passed;
        }
        Command::State {
            command: StateCommand::Gen { name, out },
        } => {
            let named: NamedState = name.parse()?;
            emit(&out, &pretty(&StateFile::from(&make_named_state(&named)?))?)?;
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
