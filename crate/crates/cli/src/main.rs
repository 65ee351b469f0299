mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cmdsdml::harness::{
    bench, bench_dataset, profile, run_eval, BenchRow, ExperimentConfig, Method,
};
use cmdsdml::io::{read_matrix, write_matrix, write_table};
use cmdsdml::learner::train_observed;
use cmdsdml::{
    cmds_embed, embed_labels, load_csv, save_csv, synth, train_ldmlr, Dataset64, Model, SplitSpec,
    SquaredDistanceMatrix, SynthSpec,
};

use config::{ConfigFile, NumberList};

/// Metric learning for ordinal labels through classical MDS.
#[derive(Debug, Parser)]
#[command(name = "cmdsdml", version)]
struct Cli {
    /// key=value file with defaults for any hyper-parameter flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print one line per training iteration to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic labelled dataset as CSV.
    Synth(SynthArgs),
    /// Train one method and write the model and its objective trace.
    Train(TrainArgs),
    /// Repeated random-split evaluation with k-NN label prediction.
    Eval(EvalArgs),
    /// Distances from an anchor sample under Euclidean and learned metrics.
    Profile(ProfileArgs),
    /// Per-iteration timing of cMDS-DML against LDMLR.
    Bench(BenchArgs),
    /// Classical MDS of label distances or of a distance matrix.
    Embed(EmbedArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Distinct labels, e.g. 0,1,2.
    #[arg(long)]
    labels: Option<NumberList<f64>>,
    #[arg(long)]
    per_group: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    signal_gap: Option<f64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    distractor_sigma: Option<f64>,
    #[arg(long)]
    distractor_dims: Option<usize>,
    #[arg(long)]
    signal_dims: Option<usize>,
    #[arg(long)]
    label_jitter: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Hyper-parameters shared by `train` and `eval`.
#[derive(Debug, Args)]
struct Hyper {
    /// cmds-dml, ldmlr or euclidean.
    #[arg(long)]
    method: Option<Method>,
    /// Embedding dimension.
    #[arg(long)]
    s: Option<usize>,
    /// Target neighbours per sample (K).
    #[arg(long)]
    k_neighbors: Option<usize>,
    /// Neighbourhood weight; the default depends on the method.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    max_linesearch: Option<usize>,
    /// LDMLR ordinal weight exponent.
    #[arg(long)]
    p: Option<f64>,
    /// LDMLR iteration count.
    #[arg(long)]
    tmax: Option<usize>,
    /// LDMLR gradient step.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Where to write the model.
    #[arg(long)]
    model: PathBuf,
    /// Trace CSV (defaults to the model path with `.trace.csv` appended).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    /// Neighbours used for label prediction.
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    per_label_train: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Project onto this many principal components fitted on each training split.
    #[arg(long)]
    pca_dim: Option<usize>,
    /// Predict the training part instead of the held-out part.
    #[arg(long)]
    test_on_train: bool,
    /// Per-trial CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Row index of the anchor sample.
    #[arg(long, default_value_t = 0)]
    anchor: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Dataset whose leading coordinates are timed; synthetic when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Sample count for synthetic data.
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value = "50,100,150")]
    dims: NumberList<usize>,
    #[arg(long)]
    k_neighbors: Option<usize>,
    /// Iterations per method.
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// Dataset whose labels are embedded.
    #[arg(long, conflicts_with = "edm")]
    data: Option<PathBuf>,
    /// Squared distance matrix in the matrix exchange format.
    #[arg(long)]
    edm: Option<PathBuf>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_data(path: &Path) -> Result<Dataset64> {
    load_csv(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn experiment(hyper: &Hyper, cfg: &ConfigFile) -> Result<ExperimentConfig<f64>> {
    let mut e = ExperimentConfig::<f64>::default();
    if let Some(m) = cfg.pick(hyper.method, "method")? {
        e.method = m;
    }
    let t = &mut e.train;
    let l = &mut e.ldmlr;
    if let Some(v) = cfg.pick(hyper.s, "s")? {
        t.s = v;
    }
    if let Some(v) = cfg.pick(hyper.k_neighbors, "k-neighbors")? {
        t.k = v;
        l.k = v;
    }
    if let Some(v) = cfg.pick(hyper.mu, "mu")? {
        match e.method {
            Method::Ldmlr => l.mu = v,
            _ => t.mu = v,
        }
    }
    if let Some(v) = cfg.pick(hyper.gamma, "gamma")? {
        t.gamma = v;
    }
    if let Some(v) = cfg.pick(hyper.rho, "rho")? {
        t.rho = v;
    }
    if let Some(v) = cfg.pick(hyper.sigma, "sigma")? {
        t.sigma = v;
    }
    if let Some(v) = cfg.pick(hyper.beta, "beta")? {
        t.beta = v;
    }
    if let Some(v) = cfg.pick(hyper.epsilon, "epsilon")? {
        t.epsilon = v;
    }
    if let Some(v) = cfg.pick(hyper.max_iters, "max-iters")? {
        t.max_iters = v;
    }
    if let Some(v) = cfg.pick(hyper.max_linesearch, "max-linesearch")? {
        t.max_linesearch = v;
    }
    if let Some(v) = cfg.pick(hyper.p, "p")? {
        l.p = v;
    }
    if let Some(v) = cfg.pick(hyper.tmax, "tmax")? {
        l.t_max = v;
    }
    if let Some(v) = cfg.pick(hyper.step, "step")? {
        l.step = v;
    }
    Ok(e)
}

fn cmd_synth(a: &SynthArgs, cfg: &ConfigFile) -> Result<()> {
    let mut spec = SynthSpec::benchmark(cfg.pick(a.seed, "seed")?.unwrap_or(0));
    if let Some(v) = cfg.pick(a.labels.clone(), "labels")? {
        spec.labels = v.0;
    }
    macro_rules! set {
        ($field:ident, $key:literal) => {
            if let Some(v) = cfg.pick(a.$field, $key)? {
                spec.$field = v;
            }
        };
    }
    set!(per_group, "per-group");
    set!(dim, "dim");
    set!(signal_gap, "signal-gap");
    set!(noise_sigma, "noise-sigma");
    set!(distractor_sigma, "distractor-sigma");
    set!(distractor_dims, "distractor-dims");
    set!(signal_dims, "signal-dims");
    set!(label_jitter, "label-jitter");
    let data: Dataset64 = synth(&spec)?;
    match &a.out {
        Some(p) => save_csv(&data, p).with_context(|| format!("writing {}", p.display()))?,
        None => cmdsdml::io::write_csv(&data, output(None)?)?,
    }
    Ok(())
}

fn cmd_train(a: &TrainArgs, cfg: &ConfigFile, verbose: bool) -> Result<()> {
    let data = load_data(&a.data)?;
    let e = experiment(&a.hyper, cfg)?;
    let trace_path = a.out.clone().unwrap_or_else(|| {
        let mut p = a.model.clone().into_os_string();
        p.push(".trace.csv");
        p.into()
    });
    let (model, columns, rows): (Model<f64>, &[&str], Vec<Vec<String>>) = match e.method {
        Method::CmdsDml => {
            let mut log = |k: usize, f: f64, g: f64| {
                if verbose {
                    eprintln!("iter {k} objective {f:.6e} grad_norm {g:.3e}");
                }
            };
            let (m, trace) = train_observed(&data, &e.train, &mut log)?;
            if verbose {
                eprintln!(
                    "status {:?} after {} iterations",
                    trace.status,
                    trace.iterations()
                );
            }
            let rows = (0..trace.objective.len())
                .map(|k| {
                    vec![
                        k.to_string(),
                        format!("{:e}", trace.objective[k]),
                        format!("{:e}", trace.grad_norm[k]),
                        trace
                            .steps
                            .get(k)
                            .map(|s| format!("{s:e}"))
                            .unwrap_or_default(),
                    ]
                })
                .collect();
            (
                Model::CmdsDml(m),
                &["iteration", "objective", "grad_norm", "step"],
                rows,
            )
        }
        Method::Ldmlr => {
            let (m, trace) = train_ldmlr(&data, &e.ldmlr)?;
            if verbose {
                for (k, f) in trace.objective.iter().enumerate() {
                    eprintln!("iter {k} objective {f:.6e}");
                }
            }
            let rows = trace
                .objective
                .iter()
                .enumerate()
                .map(|(k, f)| vec![k.to_string(), format!("{f:e}")])
                .collect();
            (Model::Ldmlr(m), &["iteration", "objective"], rows)
        }
        Method::Euclidean => (
            Model::Euclidean(cmdsdml::Euclidean { dim: data.dim() }),
            &["iteration", "objective"],
            Vec::new(),
        ),
    };
    model
        .save(&a.model)
        .with_context(|| format!("writing model {}", a.model.display()))?;
    write_table(output(Some(&trace_path))?, columns, &rows)?;
    Ok(())
}

fn cmd_eval(a: &EvalArgs, cfg: &ConfigFile) -> Result<()> {
    let data = load_data(&a.data)?;
    let mut e = experiment(&a.hyper, cfg)?;
    if let Some(v) = cfg.pick(a.knn_k, "knn-k")? {
        e.knn_k = v;
    }
    if let Some(v) = cfg.pick(a.trials, "trials")? {
        e.trials = v;
    }
    e.split = SplitSpec::new(
        cfg.pick(a.per_label_train, "per-label-train")?
            .unwrap_or(e.split.per_label_train_count),
        cfg.pick(a.seed, "seed")?.unwrap_or(e.split.seed),
    );
    e.pca_dim = cfg.pick(a.pca_dim, "pca-dim")?;
    e.test_on_train = a.test_on_train;
    let (report, trials) = run_eval(&data, &e)?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "method,trials,mae,std,wall_time_s")?;
    writeln!(
        stdout,
        "{},{},{},{},{}",
        e.method, report.trials, report.mae, report.std, report.wall_time_s
    )?;
    if let Some(p) = &a.out {
        let rows: Vec<Vec<String>> = trials
            .iter()
            .map(|t| {
                vec![
                    t.trial.to_string(),
                    t.seed.to_string(),
                    t.mae.to_string(),
                    t.wall_time_s.to_string(),
                ]
            })
            .collect();
        write_table(
            output(Some(p))?,
            &["trial", "seed", "mae", "wall_time_s"],
            &rows,
        )?;
    }
    Ok(())
}

fn cmd_profile(a: &ProfileArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let model = Model::<f64>::load(&a.model)
        .with_context(|| format!("loading model {}", a.model.display()))?;
    let rows: Vec<Vec<String>> = profile(&model, &data, a.anchor)?
        .into_iter()
        .map(|r| {
            vec![
                r.index.to_string(),
                r.label.to_string(),
                r.euclidean.to_string(),
                r.learned.to_string(),
            ]
        })
        .collect();
    write_table(
        output(a.out.as_deref())?,
        &["index", "label", "euclidean", "learned"],
        &rows,
    )?;
    Ok(())
}

fn cmd_bench(a: &BenchArgs, cfg: &ConfigFile) -> Result<()> {
    let k = cfg.pick(a.k_neighbors, "k-neighbors")?.unwrap_or(5);
    let iters = cfg.pick(a.max_iters, "max-iters")?.unwrap_or(10);
    let rows: Vec<BenchRow> = match &a.data {
        Some(p) => bench_dataset(&load_data(p)?, &a.dims.0, k, iters)?,
        None => bench::<f64>(
            a.n,
            &a.dims.0,
            k,
            iters,
            cfg.pick(a.seed, "seed")?.unwrap_or(0),
        )?,
    };
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                r.n.to_string(),
                r.d.to_string(),
                r.iterations.to_string(),
                format!("{:e}", r.seconds_per_iteration),
            ]
        })
        .collect();
    write_table(
        output(a.out.as_deref())?,
        &["method", "n", "d", "iterations", "seconds_per_iteration"],
        &rows,
    )?;
    Ok(())
}

fn cmd_embed(a: &EmbedArgs, cfg: &ConfigFile) -> Result<()> {
    let s = cfg.pick(a.s, "s")?.unwrap_or(3);
    let points = match (&a.data, &a.edm) {
        (Some(p), None) => {
            let data = load_data(p)?;
            let beta = cfg.pick(a.beta, "beta")?.unwrap_or(1.0);
            embed_labels(data.labels(), beta, s)?
        }
        (None, Some(p)) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let d = SquaredDistanceMatrix::new(read_matrix::<f64>(&text)?)?;
            cmds_embed(&d, s)?
        }
        _ => bail!("embed needs exactly one of --data or --edm"),
    };
    write_matrix(points.points(), output(a.out.as_deref())?)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::Synth(a) => cmd_synth(a, &cfg),
        Command::Train(a) => cmd_train(a, &cfg, cli.verbose),
        Command::Eval(a) => cmd_eval(a, &cfg),
        Command::Profile(a) => cmd_profile(a),
        Command::Bench(a) => cmd_bench(a, &cfg),
        Command::Embed(a) => cmd_embed(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
