use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dagsp::basis::{BasisContext, BasisKind};
use dagsp::closure::{capacity_to_unit, distance_to_influence, reflexive_closure};
use dagsp::dynnet::{self, DynNetError, DynamicNetwork, MobilityParams, SirConfig};
use dagsp::experiment::{
    self, ExperimentConfig, ExperimentKind, ExperimentResults, SirExperimentConfig, SyntheticConfig, TRIVIAL_SERIES,
};
use dagsp::learn::{self, LearnError, SampleSet, SolverOptions};
use dagsp::sem::{generate_sem_signal, SemSignalConfig, SignPolicy};
use dagsp::spectral::{frequency_order, total_variation, Filter};
use dagsp::{closure_operator, io as dio, rng, weighted_transitive_closure, Semiring, SemiringKind, WeightedDag};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;

/// Invalid flags or flag combinations.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "dagsp", version, about = "Causal Fourier analysis for signals on weighted DAGs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted transitive closure of a DAG as `row,col,value` triplets.
    Closure(ClosureArgs),
    /// Fourier transform (spectrum) of a signal.
    Ft(SignalArgs),
    /// Signal with the given spectrum.
    Ift(SignalArgs),
    /// Applies a causal filter to a signal.
    Filter(FilterArgs),
    /// Total variation of a signal with respect to every shift.
    Tv(SignalArgs),
    /// Frequencies sorted by total variation.
    FreqOrder(DagArgs),
    /// Signal from a linear structural equation model with sparse causes.
    GenSem(GenSemArgs),
    /// Sparse reconstruction of a signal from random samples.
    Reconstruct(ReconstructArgs),
    /// Time-unrolled contact networks and epidemic simulation.
    Dynnet {
        #[command(subcommand)]
        command: DynnetCommand,
    },
    /// Reconstruction experiments.
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
    /// Rebuilds plot tables from the output of an experiment.
    EmitPlots(EmitPlotsArgs),
}

#[derive(Args)]
struct DagArgs {
    /// Edge list CSV with header `src,dst,weight`.
    #[arg(long)]
    dag: PathBuf,
    /// Node labels, one per line; adds isolated nodes.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "pollution")]
    semiring: SemiringKind,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SignalArgs {
    #[command(flatten)]
    dag: DagArgs,
    /// `node,value` CSV.
    #[arg(long)]
    signal: PathBuf,
}

#[derive(Args)]
struct ClosureArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    semiring: SemiringKind,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write `W` with its unit diagonal.
    #[arg(long)]
    reflexive: bool,
    /// Map distances `d` to influences `exp(-d)` (shortest-path only).
    #[arg(long)]
    to_influence: bool,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    signal: SignalArgs,
    /// Filter coefficients `h_q` as `node,value`.
    #[arg(long, conflicts_with = "response", required_unless_present = "response")]
    coefficients: Option<PathBuf>,
    /// Frequency response `h'_y` as `node,value`.
    #[arg(long)]
    response: Option<PathBuf>,
}

#[derive(Args)]
struct GenSemArgs {
    #[arg(long)]
    dag: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    density: f64,
    /// Cause magnitude range `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1.0, 10.0])]
    range: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    sigma_c: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma_x: f64,
    #[arg(long, value_enum, default_value = "positive")]
    sign: SignArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_signal: PathBuf,
    #[arg(long)]
    out_causes: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Positive,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Lasso,
    Logistic,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    dag: DagArgs,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, default_value = "dag-weighted")]
    basis: BasisKind,
    #[arg(long, value_enum, default_value = "lasso")]
    mode: Mode,
    /// Sample fractions in (0, 1].
    #[arg(long, value_delimiter = ',', default_values_t = [0.2])]
    fraction: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Penalty; defaults to `0.1 ||B_Sᵀ s||_inf` (lasso) or 0.1 (logistic).
    #[arg(long)]
    lambda: Option<f64>,
    /// Decision threshold on `σ(r)` (logistic mode).
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = SolverOptions::default().max_iter)]
    max_iter: usize,
    /// Reconstructed signal of the last fit.
    #[arg(long)]
    out_signal: Option<PathBuf>,
}

#[derive(Args)]
struct ContactArgs {
    /// Contact CSV `t,u,v,distance`; a synthetic walk is used when absent.
    #[arg(long)]
    contacts: Option<PathBuf>,
    /// Keep every h-th time point of the contact file.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Drop contacts farther apart than this.
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long, default_value_t = 60)]
    individuals: usize,
    #[arg(long, default_value_t = 24)]
    time_points: usize,
    #[arg(long, default_value_t = MobilityParams::default().arena)]
    arena: f64,
    #[arg(long, default_value_t = MobilityParams::default().step)]
    step: f64,
    #[arg(long, default_value_t = MobilityParams::default().contact_radius)]
    radius: f64,
    /// Seed of the synthetic walk.
    #[arg(long, default_value_t = 0)]
    walk_seed: u64,
}

impl ContactArgs {
    fn load(&self) -> anyhow::Result<DynamicNetwork> {
        let net = match &self.contacts {
            Some(path) => dynnet::ingest_contacts(path, self.stride, None)?,
            None => dynnet::synth_contacts(
                self.individuals,
                self.time_points,
                &MobilityParams { arena: self.arena, step: self.step, contact_radius: self.radius },
                self.walk_seed,
            ),
        };
        Ok(match self.cutoff {
            Some(eps) => net.with_cutoff(eps),
            None => net,
        })
    }
}

#[derive(Subcommand)]
enum DynnetCommand {
    /// Writes the unrolled DAG as an edge list.
    Unroll {
        #[command(flatten)]
        contacts: ContactArgs,
        /// Unit weights instead of `exp(-d)`.
        #[arg(long)]
        unweighted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulates an SIR epidemic and writes the infection signal.
    Simulate {
        #[command(flatten)]
        contacts: ContactArgs,
        #[arg(long, default_value_t = SirConfig::default().rho)]
        rho: f64,
        #[arg(long, default_value_t = SirConfig::default().eps)]
        eps: f64,
        #[arg(long, default_value_t = SirConfig::default().recovery_delay)]
        recovery: usize,
        #[arg(long, default_value_t = SirConfig::default().initial_infected)]
        initial: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonExperimentArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the full-size configuration instead of the desk-scale one.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    bases: Option<Vec<BasisKind>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Lasso reconstruction of linear-SEM signals on random DAGs.
    Synthetic {
        #[command(flatten)]
        common: CommonExperimentArgs,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        edge_probability: Option<f64>,
    },
    /// Logistic reconstruction of SIR infection signals.
    Sir {
        #[command(flatten)]
        common: CommonExperimentArgs,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        initial: Option<Vec<usize>>,
        #[arg(long)]
        contacts: Option<PathBuf>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        individuals: Option<usize>,
        #[arg(long)]
        time_points: Option<usize>,
    },
}

#[derive(Args)]
struct EmitPlotsArgs {
    /// Directory holding `trials.csv` (and `roc_points.csv` for SIR runs).
    #[arg(long)]
    input: PathBuf,
    /// Defaults to the input directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_config_error(&err) { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

fn is_config_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        if e.is::<ConfigError>() || e.is::<serde_json::Error>() {
            return true;
        }
        if let Some(e) = e.downcast_ref::<dagsp::Error>() {
            return match e {
                dagsp::Error::Config(_) | dagsp::Error::Json(_) => true,
                dagsp::Error::Learn(l) => learn_config(l),
                dagsp::Error::DynNet(d) => dynnet_config(d),
                _ => false,
            };
        }
        if let Some(l) = e.downcast_ref::<LearnError>() {
            return learn_config(l);
        }
        e.downcast_ref::<DynNetError>().is_some_and(dynnet_config)
    })
}

fn learn_config(e: &LearnError) -> bool {
    matches!(e, LearnError::NegativeLambda(_) | LearnError::InvalidFraction(_))
}

fn dynnet_config(e: &DynNetError) -> bool {
    matches!(
        e,
        DynNetError::InvalidConfig(_) | DynNetError::ZeroStride | DynNetError::InitialExceedsPopulation { .. }
    )
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn open(path: &Path) -> anyhow::Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn semiring(kind: SemiringKind) -> anyhow::Result<Semiring> {
    Semiring::from_kind(kind).ok_or_else(|| config_error(format!("semiring `{kind}` has no built-in definition")))
}

fn load_dag(path: &Path, labels: Option<&Path>) -> anyhow::Result<WeightedDag> {
    dio::load_dag(path, labels).with_context(|| format!("loading DAG from {}", path.display()))
}

fn read_node_values(path: &Path, dag: &WeightedDag) -> anyhow::Result<Vec<f64>> {
    dio::read_signal(open(path)?, dag.labels()).with_context(|| format!("reading {}", path.display()))
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Closure(a) => closure(a),
        Command::Ft(a) => spectral(a, SpectralOp::Forward),
        Command::Ift(a) => spectral(a, SpectralOp::Inverse),
        Command::Tv(a) => spectral(a, SpectralOp::Variation),
        Command::Filter(a) => filter(a),
        Command::FreqOrder(a) => freq_order(a),
        Command::GenSem(a) => gen_sem(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Dynnet { command } => dynnet_cmd(command),
        Command::Experiment { command } => experiment_cmd(command),
        Command::EmitPlots(a) => emit_plots(a),
    }
}

fn closure(a: ClosureArgs) -> anyhow::Result<()> {
    let dag = load_dag(&a.input, a.labels.as_deref())?;
    let sr = semiring(a.semiring)?;
    let mut closure = weighted_transitive_closure(&dag, &sr);
    if a.to_influence {
        if a.semiring != SemiringKind::ShortestPath {
            return Err(config_error("--to-influence applies to the shortest-path semiring only"));
        }
        closure = distance_to_influence(&closure)?;
    }
    let out = output(a.out.as_deref())?;
    if a.reflexive {
        if a.semiring == SemiringKind::ShortestPath && !a.to_influence {
            return Err(config_error("a reflexive shortest-path closure needs --to-influence"));
        }
        if a.semiring == SemiringKind::MaxCapacity {
            closure = capacity_to_unit(&closure)?;
        }
        dio::write_operator(&reflexive_closure(&closure)?, out)?;
    } else {
        dio::write_closure(&closure, out)?;
    }
    Ok(())
}

enum SpectralOp {
    Forward,
    Inverse,
    Variation,
}

fn spectral(a: SignalArgs, op: SpectralOp) -> anyhow::Result<()> {
    let dag = load_dag(&a.dag.dag, a.dag.labels.as_deref())?;
    let w = closure_operator(&dag, &semiring(a.dag.semiring)?)?;
    let values = read_node_values(&a.signal, &dag)?;
    let result = match op {
        SpectralOp::Forward => dagsp::spectral::fourier_transform(&values, &w)?.into_inner(),
        SpectralOp::Inverse => dagsp::spectral::inverse_fourier_transform(&values, &w)?.into_inner(),
        SpectralOp::Variation => {
            let tv = total_variation(&values, &w, &dag.poset())?;
            eprintln!("total variation sum: {}", tv.sum);
            tv.per_shift
        }
    };
    dio::write_signal(dag.labels(), &result, output(a.dag.out.as_deref())?)?;
    Ok(())
}

fn filter(a: FilterArgs) -> anyhow::Result<()> {
    let s = &a.signal;
    let dag = load_dag(&s.dag.dag, s.dag.labels.as_deref())?;
    let w = closure_operator(&dag, &semiring(s.dag.semiring)?)?;
    let poset = dag.poset();
    let values = read_node_values(&s.signal, &dag)?;
    let filter = match (&a.coefficients, &a.response) {
        (Some(path), _) => Filter::new(read_node_values(path, &dag)?, &poset)?,
        (None, Some(path)) => Filter::from_response(read_node_values(path, &dag)?, &poset)?,
        (None, None) => return Err(config_error("give --coefficients or --response")),
    };
    let out = filter.apply(&values, &w)?;
    dio::write_signal(dag.labels(), &out, output(s.dag.out.as_deref())?)?;
    Ok(())
}

fn freq_order(a: DagArgs) -> anyhow::Result<()> {
    let dag = load_dag(&a.dag, a.labels.as_deref())?;
    let order = frequency_order(&dag.poset());
    let mut wtr = csv::Writer::from_writer(output(a.out.as_deref())?);
    wtr.write_record(["rank", "node", "stv"])?;
    for (rank, &y) in order.order.iter().enumerate() {
        wtr.write_record([rank.to_string(), dag.label(y).to_string(), order.stv[y].to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn gen_sem(a: GenSemArgs) -> anyhow::Result<()> {
    let dag = load_dag(&a.dag, a.labels.as_deref())?;
    let w = closure_operator(&dag, &Semiring::pollution())?;
    let cfg = SemSignalConfig {
        cause_density: a.density,
        cause_range: (a.range[0], a.range[1]),
        sigma_c: a.sigma_c,
        sigma_x: a.sigma_x,
        sign: match a.sign {
            SignArg::Positive => SignPolicy::Positive,
            SignArg::Random => SignPolicy::Random,
        },
        seed: a.seed,
    };
    let (signal, causes) = generate_sem_signal(&w, &cfg)?;
    dio::write_signal(dag.labels(), &signal, output(Some(&a.out_signal))?)?;
    if let Some(path) = &a.out_causes {
        dio::write_signal(dag.labels(), &causes, output(Some(path))?)?;
    }
    Ok(())
}

fn reconstruct(a: ReconstructArgs) -> anyhow::Result<()> {
    if a.trials == 0 {
        return Err(config_error("--trials must be at least 1"));
    }
    if a.mode == Mode::Logistic && !(a.tau > 0.0 && a.tau < 1.0) {
        return Err(config_error(format!("threshold {} is outside (0, 1)", a.tau)));
    }
    let dag = load_dag(&a.dag.dag, a.dag.labels.as_deref())?;
    let signal = read_node_values(&a.signal, &dag)?;
    let labels: Vec<bool> = signal.iter().map(|&v| v == 1.0).collect();
    if a.mode == Mode::Logistic {
        if let Some(v) = signal.iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(LearnError::NonBinaryLabel(*v).into());
        }
    }
    let mut ctx = BasisContext::new(&dag, &semiring(a.dag.semiring)?)?;
    let basis = ctx.build(a.basis)?;
    let opts = SolverOptions { max_iter: a.max_iter, ..SolverOptions::default() };
    let n = dag.n();

    let mut wtr = csv::Writer::from_writer(output(a.dag.out.as_deref())?);
    wtr.write_record(["fraction", "trial", "rel_error", "auc"])?;
    let mut last = None;
    for (fi, &fraction) in a.fraction.iter().enumerate() {
        for trial in 0..a.trials {
            let idx = learn::sample_nodes(n, fraction, rng::derive(a.seed, &[fi as u64]), trial as u64)?;
            let sample = SampleSet::from_signal(&signal, idx)?;
            let (rel_error, auc, reconstruction) = match a.mode {
                Mode::Lasso => {
                    let lambda = match a.lambda {
                        Some(l) => l,
                        None => learn::default_lasso_lambda(&basis, &sample)?,
                    };
                    let fit = learn::lasso_reconstruct(&basis, &sample, lambda, opts)?;
                    (learn::relative_error(&fit.signal, &signal)?, None, fit.signal.into_inner())
                }
                Mode::Logistic => {
                    let lambda = a.lambda.unwrap_or(learn::DEFAULT_LOGISTIC_LAMBDA);
                    let fit = learn::logistic_sparse_fit(&basis, &sample, lambda, opts)?;
                    let scores: Vec<f64> = fit.signal.iter().map(|&r| learn::sigmoid(r)).collect();
                    let prediction = learn::predict_binary(&fit.signal, a.tau);
                    let auc = learn::roc_auc(&scores, &labels)?.auc;
                    (learn::relative_error(&prediction, &signal)?, Some(auc), prediction.into_inner())
                }
            };
            wtr.write_record([
                fraction.to_string(),
                trial.to_string(),
                rel_error.to_string(),
                auc.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
            last = Some(reconstruction);
        }
    }
    wtr.flush()?;
    if let (Some(path), Some(r)) = (&a.out_signal, last) {
        dio::write_signal(dag.labels(), &r, output(Some(path))?)?;
    }
    Ok(())
}

fn unrolled_labels(net: &DynamicNetwork) -> Vec<String> {
    (0..=net.time_points()).flat_map(|t| (0..net.individuals()).map(move |v| format!("{v}@{t}"))).collect()
}

fn dynnet_cmd(command: DynnetCommand) -> anyhow::Result<()> {
    match command {
        DynnetCommand::Unroll { contacts, unweighted, out } => {
            let net = contacts.load()?;
            let dag = if unweighted { dynnet::unroll(&net) } else { dynnet::influence_dag(&net) };
            dio::write_edge_list(&dag, output(out.as_deref())?)?;
        }
        DynnetCommand::Simulate { contacts, rho, eps, recovery, initial, seed, out } => {
            let net = contacts.load()?;
            let cfg = SirConfig { rho, eps, recovery_delay: recovery, initial_infected: initial, seed };
            let trace = dynnet::sir_simulate(&net, &cfg)?;
            eprintln!("infected node-times: {} of {}", trace.infected_count(), net.unrolled_size());
            dio::write_signal(&unrolled_labels(&net), &trace.signal(), output(out.as_deref())?)?;
        }
    }
    Ok(())
}

fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn experiment_cmd(command: ExperimentCommand) -> anyhow::Result<()> {
    match command {
        ExperimentCommand::Synthetic { common, nodes, edge_probability } => {
            let mut cfg = match &common.config {
                Some(path) => match load_config(path)? {
                    ExperimentConfig::SyntheticSem(c) => c,
                    ExperimentConfig::DynamicSir(_) => return Err(config_error("config describes an SIR experiment")),
                },
                None if common.full_scale => SyntheticConfig::full_scale(),
                None => SyntheticConfig::default(),
            };
            if let Some(v) = common.seed {
                cfg.seed = v;
            }
            if let Some(v) = common.trials {
                cfg.trials = v;
            }
            if let Some(v) = &common.fractions {
                cfg.fractions = v.clone();
            }
            if let Some(v) = &common.bases {
                cfg.bases = v.clone();
            }
            if let Some(v) = common.lambda {
                cfg.lambda = Some(v);
            }
            if let Some(v) = common.max_iter {
                cfg.solver.max_iter = v;
            }
            if let Some(v) = nodes {
                cfg.nodes = v;
            }
            if let Some(v) = edge_probability {
                cfg.edge_probability = v;
            }
            let results = experiment::run_synthetic_experiment(&cfg)?;
            finish_experiment(&ExperimentConfig::SyntheticSem(cfg), &results, &common.out_dir)
        }
        ExperimentCommand::Sir { common, tau, initial, contacts, stride, individuals, time_points } => {
            let mut cfg = match &common.config {
                Some(path) => match load_config(path)? {
                    ExperimentConfig::DynamicSir(c) => c,
                    ExperimentConfig::SyntheticSem(_) => {
                        return Err(config_error("config describes a synthetic experiment"))
                    }
                },
                None if common.full_scale => SirExperimentConfig::full_scale(),
                None => SirExperimentConfig::default(),
            };
            if let Some(v) = common.seed {
                cfg.seed = v;
            }
            if let Some(v) = common.trials {
                cfg.trials = v;
            }
            if let Some(v) = &common.fractions {
                cfg.fractions = v.clone();
            }
            if let Some(v) = &common.bases {
                cfg.bases = v.clone();
            }
            if let Some(v) = common.lambda {
                cfg.lambda = v;
            }
            if let Some(v) = common.max_iter {
                cfg.solver.max_iter = v;
            }
            if let Some(v) = tau {
                cfg.tau = v;
            }
            if let Some(v) = initial {
                cfg.initial_infected = v;
            }
            if let Some(path) = contacts {
                cfg.contacts = Some(experiment::ContactSource { path, stride: 1 });
            }
            if let Some(h) = stride {
                match cfg.contacts.as_mut() {
                    Some(src) => src.stride = h,
                    None => return Err(config_error("--stride needs a contact file")),
                }
            }
            if let Some(v) = individuals {
                cfg.individuals = v;
            }
            if let Some(v) = time_points {
                cfg.time_points = v;
            }
            let results = experiment::run_sir_experiment(&cfg)?;
            finish_experiment(&ExperimentConfig::DynamicSir(cfg), &results, &common.out_dir)
        }
    }
}

fn finish_experiment(cfg: &ExperimentConfig, results: &ExperimentResults, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut text = serde_json::to_string_pretty(cfg)?;
    text.push('\n');
    std::fs::write(dir.join("config.json"), text)?;
    experiment::write_trials(results, BufWriter::new(File::create(dir.join("trials.csv"))?))?;
    if results.kind == ExperimentKind::DynamicSir {
        experiment::write_roc_points(results, BufWriter::new(File::create(dir.join("roc_points.csv"))?))?;
    }
    experiment::emit_plot_data(results, dir)?;
    print_summary(results);
    Ok(())
}

fn print_summary(results: &ExperimentResults) {
    for series in results.series() {
        for fraction in results.fractions() {
            match results.kind {
                ExperimentKind::SyntheticSem => {
                    let s = results.summary(&series, fraction, |r| r.rel_error);
                    println!("{series:<18} fraction {fraction:<5} relative error {:.4} ± {:.4}", s.mean, s.ci_high - s.mean);
                }
                ExperimentKind::DynamicSir => {
                    let auc = results.summary(&series, fraction, |r| r.auc);
                    let acc = results.summary(&series, fraction, |r| r.accuracy);
                    let marker = if series == TRIVIAL_SERIES { " (all negative)" } else { "" };
                    println!(
                        "{series:<18} fraction {fraction:<5} AUC {:.4} ± {:.4}  accuracy {:.4}{marker}",
                        auc.mean,
                        auc.ci_high - auc.mean,
                        acc.mean
                    );
                }
            }
        }
    }
    let unconverged = results.records.iter().filter(|r| !r.converged).count();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} of {} fits hit the iteration limit", results.records.len());
    }
}

fn emit_plots(a: EmitPlotsArgs) -> anyhow::Result<()> {
    let trials = a.input.join("trials.csv");
    let mut results = experiment::read_trials(open(&trials)?).with_context(|| format!("reading {}", trials.display()))?;
    let roc = a.input.join("roc_points.csv");
    if roc.exists() {
        experiment::read_roc_points(&mut results, open(&roc)?)?;
    } else if results.kind == ExperimentKind::DynamicSir {
        bail!("{} is missing", roc.display());
    }
    let dir = a.out_dir.unwrap_or(a.input);
    for path in experiment::emit_plot_data(&results, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}
