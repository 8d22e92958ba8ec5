//! `pbridge`: simulation, verification, enumeration and DDS tooling.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage, 3 data error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patricia_bridges::bridges::{finite_bridge, rtree_bridge, zigzag_bridge, BinaryCompletion, IntervalZigZag};
use patricia_bridges::didendritic::{check_axioms, dds_from_tree, dds_to_tree, zigzag_dds, DdsJson, FiniteDDS};
use patricia_bridges::kernels::{radix_chain, remy_chain, StepRecord};
use patricia_bridges::rng::{derive_seed, rng_from_seed, DEFAULT_SEED};
use patricia_bridges::stats::{
    backward_kernel_check, bridge_kernel_check, dynkin_gap, height_experiment, kernel_universality,
    neininger_event, neininger_t, persistence_experiment, remy_uniformity, BridgeSampler, ChainSpec,
    ExperimentReport, PersistenceChain, Statistic, EXPERIMENT_DEPTH_CAP,
};
use patricia_bridges::trees::{enumerate_full_trees, patricia_contract, BinaryTree, FullBinaryTree, LabeledTree};
use patricia_bridges::words::SourceMeasure;
use patricia_bridges::Error;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "pbridge", version, about = "Radix, PATRICIA and Rémy chains, their bridges, and didendritic systems")]
struct Cli {
    /// Worker threads for Monte Carlo trials. Does not affect output bytes.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One trajectory of a chain or bridge.
    Simulate(SimulateArgs),
    /// All full binary trees with n leaves.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = TreeFormat::Newick)]
        format: TreeFormat,
    },
    /// Monte Carlo checks against exact values.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Height statistics along independent trajectories.
    Heights {
        /// remy, zigzag-bridge, patricia or patricia:<measure>.
        #[arg(long)]
        chain: String,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// Didendritic system tools.
    Dds {
        #[command(subcommand)]
        action: DdsCommand,
    },
    /// Convert a tree between newick, DOT and JSON.
    Export {
        /// Newick (labels optional) or a comma-separated leaf list.
        #[arg(long)]
        tree: String,
        #[arg(long, value_enum, default_value_t = TreeFormat::Dot)]
        format: TreeFormat,
    },
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// patricia, radix, remy, zigzag-bridge, bridge-from:<tree>,
    /// rtree:interval or rtree:binary:<measure>.
    #[arg(long)]
    chain: String,
    /// fair, harmonic, bernoulli:<p> or prefix:<bits>,<measure>.
    #[arg(long, default_value = "fair")]
    measure: String,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = StepFormat::Jsonl)]
    format: StepFormat,
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Backward sampling from every tree with n leaves against the exact kernel.
    Kernel {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// Rémy chain at n leaves against the uniform law.
    RemyUniform {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// The two conditional probabilities that break Dynkin's criterion.
    Dynkin {
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// Conditional law of step n given step n+1 along a bridge sampler.
    BridgeKernel {
        /// zigzag-bridge, rtree:interval, rtree:binary:<measure>, patricia:<measure> or remy.
        #[arg(long)]
        sampler: String,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// Backward law into each tree with n leaves along several forward chains.
    Universality {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// Frequency of the event behind the harmonic height lower bound.
    Neininger {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Defaults to ⌊√(2n/ln n) − 1⌋.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// Vertices that stay in the trajectory from some time on.
    Persistence {
        /// zigzag-bridge or patricia:<measure>.
        #[arg(long)]
        chain: String,
        #[arg(long, default_value_t = 512)]
        window: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
}

#[derive(Subcommand, Debug)]
enum DdsCommand {
    /// Check the axioms of a system stored as JSON.
    Check { file: PathBuf },
    /// The labeled tree of a system stored as JSON.
    ToTree {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = TreeFormat::Newick)]
        format: TreeFormat,
    },
    /// The system induced by a labeled newick tree.
    FromTree { tree: String },
    /// A random system on labels 1..=n.
    Sample {
        #[arg(long)]
        n: usize,
        /// zigzag, rtree:interval or rtree:binary:<measure>.
        #[arg(long, default_value = "zigzag")]
        model: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StepFormat {
    Jsonl,
    Dot,
    Newick,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TreeFormat {
    Newick,
    Dot,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

/// Output text plus whether every pass flag held.
struct Outcome {
    text: String,
    pass: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, pass: true }
    }
}

fn config_header(config: &Value) -> String {
    format!("# pbridge {}\n", config)
}

fn render_report(config: &Value, report: &ExperimentReport, format: ReportFormat) -> Outcome {
    let text = match format {
        ReportFormat::Json => {
            let v = json!({ "config": config, "report": report });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        ReportFormat::Csv => config_header(config) + &report.to_csv(),
    };
    Outcome {
        text,
        pass: report.pass != Some(false),
    }
}

fn render_tree(t: &FullBinaryTree, format: TreeFormat, name: &str) -> String {
    match format {
        TreeFormat::Newick => t.to_newick(),
        TreeFormat::Dot => t.to_dot(name),
        TreeFormat::Json => t.to_json().to_string(),
    }
}

fn render_labeled(t: &LabeledTree, format: TreeFormat, name: &str) -> String {
    match format {
        TreeFormat::Newick => t.to_newick(),
        TreeFormat::Dot => t.to_dot(name),
        TreeFormat::Json => t.to_json().to_string(),
    }
}

fn simulate(args: &SimulateArgs) -> Result<Outcome, Error> {
    let config = json!({
        "subcommand": "simulate",
        "chain": args.chain,
        "measure": args.measure,
        "steps": args.steps,
        "seed": args.seed,
        "format": format!("{:?}", args.format).to_lowercase(),
    });
    if args.steps == 0 {
        return Err(Error::InvalidArgument("--steps must be at least 1".into()));
    }
    let nu: SourceMeasure = args.measure.parse()?;
    let mut rng = rng_from_seed(args.seed);
    let chain = args.chain.as_str();
    let mut plain: Vec<BinaryTree> = Vec::new();
    let mut labeled: Vec<LabeledTree> = Vec::new();
    match chain {
        "patricia" => {
            plain = radix_chain(&nu, args.steps, args.seed, EXPERIMENT_DEPTH_CAP)?
                .iter()
                .map(|t| patricia_contract(t).map(FullBinaryTree::into_tree))
                .collect::<Result<_, _>>()?
        }
        "radix" => plain = radix_chain(&nu, args.steps, args.seed, EXPERIMENT_DEPTH_CAP)?,
        "remy" => plain = remy_chain(args.steps, &mut rng).into_iter().map(FullBinaryTree::into_tree).collect(),
        "zigzag-bridge" => {
            plain = zigzag_bridge(args.steps, &mut rng)?.into_iter().map(FullBinaryTree::into_tree).collect()
        }
        "rtree:interval" => labeled = rtree_bridge(&IntervalZigZag, args.steps, &mut rng)?,
        _ => {
            if let Some(t) = chain.strip_prefix("bridge-from:") {
                let end: FullBinaryTree = t.parse()?;
                plain = finite_bridge(&end, &mut rng)?.into_iter().map(FullBinaryTree::into_tree).collect();
            } else if let Some(m) = chain.strip_prefix("rtree:binary") {
                let m = m.strip_prefix(':').map(str::parse).transpose()?.unwrap_or_else(|| nu.clone());
                labeled = rtree_bridge(&BinaryCompletion::new(m), args.steps, &mut rng)?;
            } else {
                return Err(Error::InvalidArgument(format!("unknown chain {chain:?}")));
            }
        }
    }
    let mut out = String::new();
    match args.format {
        StepFormat::Jsonl => out.push_str(&format!("{}\n", json!({ "config": config }))),
        _ => out.push_str(&config_header(&config)),
    }
    let steps = plain.len().max(labeled.len());
    for i in 0..steps {
        let n = i + 1;
        match (args.format, plain.get(i), labeled.get(i)) {
            (StepFormat::Jsonl, Some(t), _) => {
                let rec = StepRecord::new(n, t, args.seed, chain);
                out.push_str(&serde_json::to_string(&rec).expect("json"));
            }
            (StepFormat::Jsonl, None, Some(t)) => {
                let rec = StepRecord::labeled(n, t, args.seed, chain);
                out.push_str(&serde_json::to_string(&rec).expect("json"));
            }
            (StepFormat::Dot, Some(t), _) => out.push_str(&t.to_dot(&format!("step_{n}"))),
            (StepFormat::Dot, None, Some(t)) => out.push_str(&t.to_dot(&format!("step_{n}"))),
            (StepFormat::Newick, Some(t), _) => out.push_str(&newick_of_plain(t)),
            (StepFormat::Newick, None, Some(t)) => out.push_str(&t.to_newick()),
            _ => unreachable!("one of the trajectories is non-empty"),
        }
        if !out.ends_with('\n') {
            out.push('\n');
        }
    }
    Ok(Outcome::ok(out))
}

/// Radix trees are not full; their newick form marks unary vertices with a
/// single child.
fn newick_of_plain(t: &BinaryTree) -> String {
    fn go(t: &BinaryTree, v: &patricia_bridges::words::Word, out: &mut String) {
        let kids: Vec<_> = [0, 1].into_iter().map(|b| v.child(b)).filter(|c| t.contains(c)).collect();
        if kids.is_empty() {
            out.push('*');
            return;
        }
        out.push('(');
        for (i, c) in kids.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            go(t, c, out);
        }
        out.push(')');
    }
    let mut out = String::new();
    go(t, &patricia_bridges::words::Word::empty(), &mut out);
    out
}

fn verify(check: &VerifyCommand) -> Result<Outcome, Error> {
    match check {
        VerifyCommand::Kernel { n, draws, seed, format } => {
            let config = json!({"subcommand": "verify kernel", "n": n, "draws": draws, "seed": seed});
            let mut report = ExperimentReport::new("backward-kernel", *draws, *seed).param("n", n);
            let mut pass = true;
            for (i, t) in enumerate_full_trees(*n)?.iter().enumerate() {
                let r = backward_kernel_check(t, *draws, derive_seed(*seed, i as u64))?;
                pass &= r.pass == Some(true);
                let tv = r.get("tv", None).expect("tv");
                report.push(Statistic::new(&format!("tv[{}]", t.to_newick()), tv).band(0.0, 0.01));
            }
            report.pass = Some(pass);
            Ok(render_report(&config, &report, *format))
        }
        VerifyCommand::RemyUniform { n, trials, seed, format } => {
            let config = json!({"subcommand": "verify remy-uniform", "n": n, "trials": trials, "seed": seed});
            Ok(render_report(&config, &remy_uniformity(*n, *trials, *seed)?, *format))
        }
        VerifyCommand::Dynkin { trials, seed, format } => {
            let config = json!({"subcommand": "verify dynkin", "trials": trials, "seed": seed});
            Ok(render_report(&config, &dynkin_gap(*trials, *seed)?, *format))
        }
        VerifyCommand::BridgeKernel { sampler, n_max, trials, seed, format } => {
            let config = json!({"subcommand": "verify bridge-kernel", "sampler": sampler, "n_max": n_max, "trials": trials, "seed": seed});
            let s: BridgeSampler = sampler.parse()?;
            Ok(render_report(&config, &bridge_kernel_check(&s, *n_max, *trials, *seed)?, *format))
        }
        VerifyCommand::Universality { n, trials, seed, format } => {
            let config = json!({"subcommand": "verify universality", "n": n, "trials": trials, "seed": seed});
            let samplers = [
                BridgeSampler::Patricia(SourceMeasure::fair()),
                BridgeSampler::Patricia(SourceMeasure::harmonic()),
                BridgeSampler::Remy,
            ];
            let mut report = ExperimentReport::new("kernel-universality", *trials, *seed).param("n", n);
            let mut pass = true;
            for (i, t) in enumerate_full_trees(*n)?.iter().enumerate() {
                let r = kernel_universality(t, &samplers, *trials, derive_seed(*seed, i as u64))?;
                pass &= r.pass == Some(true);
                for s in r.statistics {
                    report.push(Statistic {
                        name: format!("{}@{}", s.name, t.to_newick()),
                        ..s
                    });
                }
            }
            report.pass = Some(pass);
            Ok(render_report(&config, &report, *format))
        }
        VerifyCommand::Neininger { n, t, trials, seed, format } => {
            let t = t.unwrap_or_else(|| neininger_t(*n));
            let config = json!({"subcommand": "verify neininger", "n": n, "t": t, "trials": trials, "seed": seed});
            let mut r = neininger_event(*n, t, *trials, *seed)?;
            let threshold = 1.0 - (2.0 / (*n as f64).ln()).sqrt();
            let f = r.get("frequency", None).expect("frequency");
            r.push(Statistic::new("threshold", threshold).at(*n));
            r.pass = Some(r.pass == Some(true) && f >= threshold);
            Ok(render_report(&config, &r, *format))
        }
        VerifyCommand::Persistence { chain, window, k, trials, seed, format } => {
            let config = json!({"subcommand": "verify persistence", "chain": chain, "window": window, "k": k, "trials": trials, "seed": seed});
            let c = match chain.as_str() {
                "zigzag-bridge" => PersistenceChain::ZigzagBridge,
                "patricia" => PersistenceChain::Patricia(SourceMeasure::fair()),
                other => match other.strip_prefix("patricia:") {
                    Some(m) => PersistenceChain::Patricia(m.parse()?),
                    None => return Err(Error::InvalidArgument(format!("unknown chain {chain:?}"))),
                },
            };
            Ok(render_report(&config, &persistence_experiment(&c, *window, *k, *trials, *seed)?, *format))
        }
    }
}

fn read_dds(file: &PathBuf) -> Result<FiniteDDS, Error> {
    let text = fs::read_to_string(file).map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?;
    let json: DdsJson = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?;
    FiniteDDS::from_json(&json)
}

fn dds(action: &DdsCommand) -> Result<Outcome, Error> {
    match action {
        DdsCommand::Check { file } => {
            let d = read_dds(file)?;
            let violations = check_axioms(&d);
            let v: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            let text = serde_json::to_string_pretty(&json!({
                "file": file.display().to_string(),
                "classes": d.class_count(),
                "valid": v.is_empty(),
                "violations": v,
            }))
            .expect("json")
                + "\n";
            Ok(Outcome {
                text,
                pass: violations.is_empty(),
            })
        }
        DdsCommand::ToTree { file, format } => {
            let t = dds_to_tree(&read_dds(file)?)?;
            Ok(Outcome::ok(render_labeled(&t, *format, "tree") + "\n"))
        }
        DdsCommand::FromTree { tree } => {
            let t: LabeledTree = tree.parse()?;
            let d = dds_from_tree(&t)?;
            Ok(Outcome::ok(serde_json::to_string_pretty(&d.to_json()).expect("json") + "\n"))
        }
        DdsCommand::Sample { n, model, seed } => {
            let mut rng = rng_from_seed(*seed);
            let d = match model.as_str() {
                "zigzag" => zigzag_dds(*n, &mut rng)?,
                "rtree:interval" => last_dds(rtree_bridge(&IntervalZigZag, *n, &mut rng)?)?,
                other => match other.strip_prefix("rtree:binary") {
                    Some(m) => {
                        let m = m.strip_prefix(':').map(str::parse).transpose()?.unwrap_or_else(SourceMeasure::fair);
                        last_dds(rtree_bridge(&BinaryCompletion::new(m), *n, &mut rng)?)?
                    }
                    None => return Err(Error::InvalidArgument(format!("unknown model {model:?}"))),
                },
            };
            let v = json!({
                "config": {"subcommand": "dds sample", "n": n, "model": model, "seed": seed},
                "system": d.to_json(),
            });
            Ok(Outcome::ok(serde_json::to_string_pretty(&v).expect("json") + "\n"))
        }
    }
}

fn last_dds(path: Vec<LabeledTree>) -> Result<FiniteDDS, Error> {
    dds_from_tree(path.last().ok_or(Error::EmptyInput)?)
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Enumerate { n, format } => {
            let config = json!({"subcommand": "enumerate", "n": n});
            let mut out = config_header(&config);
            for (i, t) in enumerate_full_trees(*n)?.iter().enumerate() {
                out.push_str(&render_tree(t, *format, &format!("tree_{}", i + 1)));
                if !out.ends_with('\n') {
                    out.push('\n');
                }
            }
            Ok(Outcome::ok(out))
        }
        Command::Verify { check } => verify(check),
        Command::Heights { chain, n_list, trials, seed, format } => {
            let config = json!({"subcommand": "heights", "chain": chain, "n_list": n_list, "trials": trials, "seed": seed});
            let spec: ChainSpec = chain.parse()?;
            Ok(render_report(&config, &height_experiment(&spec, n_list, *trials, *seed)?, *format))
        }
        Command::Dds { action } => dds(action),
        Command::Export { tree, format } => {
            let text = match tree.parse::<LabeledTree>() {
                Ok(t) => render_labeled(&t, *format, "tree"),
                Err(_) => render_tree(&tree.parse::<FullBinaryTree>()?, *format, "tree"),
            };
            Ok(Outcome::ok(text + "\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error[InvalidArgument]: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().expect("thread pool");
    }
    match run(&cli) {
        Ok(outcome) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, &outcome.text),
                None => std::io::stdout().lock().write_all(outcome.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error[Io]: {e}");
                return ExitCode::from(3);
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            let usage = matches!(e, Error::InvalidArgument(_));
            ExitCode::from(if usage { 2 } else { 3 })
        }
    }
}
