//! Command-line front end: reads channel and dataset files, runs the
//! inference routines of `latent_idm` and writes JSON reports plus CSV
//! trajectories.

pub mod files;
pub mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use latent_idm::channels::PositivityReport;
use latent_idm::inference::{
    concentration_experiment, idm_bounds, posterior_bounds, prior_bounds, ratio_experiment,
    vacuity_check, ConcentrationPoint, OptimizerConfig, PosteriorBounds, RatioPoint, VacuityReport,
    Verdict,
};
use latent_idm::{
    BoundPair, Chances, Channel, CountVector, Execution, ManifestDataset, Observation, PriorSet,
    QuadratureConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use files::{parse_counts, parse_reals, read_channel, read_dataset, render_dataset, NamedChannel};
use report::{check_output_dir, to_csv, to_json, write_atomic, Provenance, Report, SCHEMA_VERSION};

/// Exit status for an inconclusive vacuity verdict.
pub const EXIT_INCONCLUSIVE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "latent-idm",
    version,
    about = "Predictive bounds for latent categorical data under near-ignorance priors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw latent states from `theta` and write their channel emissions.
    Simulate(SimulateArgs),
    /// Prior and posterior predictive bounds at a single boundary gap.
    Infer(InferArgs),
    /// Closed-form bounds for directly observed outcomes.
    Idm(IdmArgs),
    /// Sweep a ladder of boundary gaps and classify the posterior bounds.
    Vacuity(VacuityArgs),
    /// Concentration experiments on Dirichlet sequences.
    #[command(subcommand)]
    Appendix(AppendixCommand),
}

#[derive(Debug, Subcommand)]
pub enum AppendixCommand {
    /// `E_n(f)` and the mass of the superlevel set of `f`.
    Concentration(ConcentrationArgs),
    /// `E_n(L f) / E_n(L)` for the likelihood of a dataset.
    Ratio(RatioArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Numerics {
    /// Gauss-Legendre nodes per half interval.
    #[arg(long, default_value_t = 256)]
    pub nodes: usize,
    /// Importance-sampling draws (three or more categories).
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 24301)]
    pub seed: u64,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Numerics {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn quadrature(&self) -> Result<QuadratureConfig> {
        let cfg = QuadratureConfig {
            gauss_nodes: self.nodes,
            mc_samples: self.samples,
            seed: self.seed,
            execution: self.execution(),
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn optimizer(&self, ladder: Option<&str>) -> Result<OptimizerConfig> {
        let mut cfg = OptimizerConfig {
            execution: self.execution(),
            ..Default::default()
        };
        if let Some(spec) = ladder {
            cfg.boundary_ladder = parse_list(spec)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn provenance(&self, started: Instant) -> Provenance {
        Provenance {
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            gauss_nodes: self.nodes,
            mc_samples: self.samples,
            execution: if self.sequential {
                "sequential"
            } else {
                "parallel"
            },
            elapsed_seconds: started.elapsed().as_secs_f64(),
        }
    }

    fn check(&self, csv: Option<&Path>) -> Result<()> {
        if let Some(out) = &self.out {
            check_output_dir(out)?;
        }
        if let Some(csv) = csv {
            check_output_dir(csv)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Latent chances, `a:b:c`.
    #[arg(long)]
    pub theta: String,
    /// Number of observations.
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long, default_value_t = 24301)]
    pub seed: u64,
    /// Dataset path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Observed dataset; no observations when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Prior strength.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Counts of the future dataset, `i:j:k`.
    #[arg(long)]
    pub counts: String,
    /// Lower bound on every coordinate of the prior mean.
    #[arg(long, default_value_t = PriorSet::DEFAULT_GAP)]
    pub gap: f64,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Args)]
pub struct IdmArgs {
    /// Channel file; must be an identity channel. Defaults to an identity
    /// channel with symbols `1..k`.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Next outcome as a unit count vector, e.g. `1:0`.
    #[arg(long)]
    pub counts: String,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Args)]
pub struct VacuityArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long)]
    pub counts: String,
    /// Strictly decreasing boundary gaps, comma separated.
    #[arg(long)]
    pub gap_ladder: Option<String>,
    /// CSV path for the ladder.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub counts: String,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Strictly increasing sequence indices, comma separated.
    #[arg(long, default_value = "1,10,100")]
    pub n_list: String,
    /// Vertex the sequence concentrates on; defaults to the category with
    /// the largest count.
    #[arg(long)]
    pub vertex: Option<usize>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub counts: String,
    #[arg(long, default_value = "1,10,100")]
    pub n_list: String,
    #[arg(long)]
    pub vertex: Option<usize>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub numerics: Numerics,
}

fn parse_list<T: std::str::FromStr>(spec: &str) -> Result<Vec<T>> {
    spec.split(',')
        .map(|w| {
            w.trim()
                .parse::<T>()
                .map_err(|_| anyhow::anyhow!("invalid list entry `{w}` in `{spec}`"))
        })
        .collect()
}

fn load_data(path: Option<&Path>, channel: &NamedChannel) -> Result<ManifestDataset> {
    match path {
        Some(p) => read_dataset(p, channel),
        None => Ok(ManifestDataset::empty(channel.channel.kind())),
    }
}

fn future_counts(spec: &str, k: usize) -> Result<CountVector> {
    let counts = CountVector::new(parse_counts(spec)?)?;
    ensure!(
        counts.len() == k,
        "--counts has {} entries but the channel has {k} latent states",
        counts.len()
    );
    Ok(counts)
}

fn default_vertex(counts: &CountVector, vertex: Option<usize>) -> Result<usize> {
    match vertex {
        Some(v) => {
            ensure!(
                v < counts.len(),
                "--vertex {v} out of range for {} categories",
                counts.len()
            );
            Ok(v)
        }
        // first category with the largest count
        None => Ok(counts
            .counts()
            .iter()
            .enumerate()
            .fold(
                (0, 0),
                |best, (i, &c)| if c > best.1 { (i, c) } else { best },
            )
            .0),
    }
}

fn emit_report<I: Serialize, R: Serialize>(
    command: &'static str,
    inputs: I,
    results: R,
    numerics: &Numerics,
    started: Instant,
) -> Result<()> {
    let bytes = to_json(&Report {
        schema_version: SCHEMA_VERSION,
        command,
        inputs,
        results,
        provenance: numerics.provenance(started),
    })?;
    match &numerics.out {
        Some(p) => write_atomic(p, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct ModelInputs<'a> {
    channel_file: Option<&'a Path>,
    data_file: Option<&'a Path>,
    channel: &'a NamedChannel,
    n_observations: usize,
    /// Prior strength, when the command uses one.
    s: Option<f64>,
    counts: &'a [u64],
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let channel = read_channel(&args.channel)?;
    let theta = Chances::new(parse_reals(&args.theta)?).context("--theta")?;
    ensure!(
        theta.len() == channel.k(),
        "--theta has {} entries but the channel has {} latent states",
        theta.len(),
        channel.k()
    );
    if let Some(out) = &args.out {
        check_output_dir(out)?;
    }
    let data = simulate_dataset(&channel.channel, &theta, args.n, args.seed)?;
    let text = render_dataset(&data, &channel);
    match &args.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// IID latent draws from `theta` pushed through the channel; the latent
/// states themselves are discarded.
pub fn simulate_dataset(
    channel: &Channel,
    theta: &Chances,
    n: usize,
    seed: u64,
) -> Result<ManifestDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latent = WeightedIndex::new(theta.values())?;
    let observations: Vec<Observation> = match channel {
        Channel::Identity(_) => (0..n)
            .map(|_| Observation::Symbol(latent.sample(&mut rng)))
            .collect(),
        Channel::Discrete(c) => {
            let rows = c
                .emission()
                .iter()
                .map(WeightedIndex::new)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (0..n)
                .map(|_| Observation::Symbol(rows[latent.sample(&mut rng)].sample(&mut rng)))
                .collect()
        }
        Channel::Gaussian(c) => {
            let normals = c
                .params()
                .iter()
                .map(|p| Normal::new(p.mu, p.sigma))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (0..n)
                .map(|_| Observation::Real(normals[latent.sample(&mut rng)].sample(&mut rng)))
                .collect()
        }
    };
    let kind = channel.kind();
    Ok(ManifestDataset::new(kind, observations)?)
}

#[derive(Debug, Serialize)]
struct InferResults {
    prior: PosteriorBounds,
    posterior: PosteriorBounds,
    positivity: PositivityReport,
}

pub fn infer(args: &InferArgs) -> Result<()> {
    let started = Instant::now();
    let channel = read_channel(&args.channel)?;
    let data = load_data(args.data.as_deref(), &channel)?;
    let counts = future_counts(&args.counts, channel.k())?;
    let prior_set = PriorSet::with_gap(args.s, channel.k(), args.gap)?;
    let q = args.numerics.quadrature()?;
    let o = args.numerics.optimizer(None)?;
    args.numerics.check(None)?;

    let likelihood = channel.channel.compile(&data)?;
    let results = InferResults {
        prior: prior_bounds(&prior_set, &counts, &o)?,
        posterior: posterior_bounds(&prior_set, &likelihood, &counts, &q, &o)?,
        positivity: channel.channel.strict_positivity_report(&data)?,
    };
    #[derive(Serialize)]
    struct Inputs<'a> {
        #[serde(flatten)]
        model: ModelInputs<'a>,
        boundary_gap: f64,
    }
    let inputs = Inputs {
        model: ModelInputs {
            channel_file: Some(&args.channel),
            data_file: args.data.as_deref(),
            channel: &channel,
            n_observations: data.len(),
            s: Some(args.s),
            counts: counts.counts(),
        },
        boundary_gap: args.gap,
    };
    emit_report("infer", inputs, results, &args.numerics, started)
}

pub fn idm(args: &IdmArgs) -> Result<()> {
    let started = Instant::now();
    let counts = CountVector::new(parse_counts(&args.counts)?)?;
    let channel = match &args.channel {
        Some(p) => read_channel(p)?,
        None => NamedChannel::identity(counts.len())?,
    };
    if !matches!(channel.channel, Channel::Identity(_)) {
        bail!("idm needs an identity channel; use `infer` for noisy observations");
    }
    let counts = future_counts(&args.counts, channel.k())?;
    ensure!(
        counts.total() == 1,
        "--counts must name a single next outcome, e.g. 0:1"
    );
    let next = counts.support().next().expect("total is 1");
    let data = load_data(args.data.as_deref(), &channel)?;
    let observed = CountVector::new(data.symbol_counts(channel.k())?)?;
    args.numerics.check(None)?;

    #[derive(Serialize)]
    struct Results {
        observed_counts: Vec<u64>,
        next_outcome: usize,
        bounds: BoundPair,
    }
    let results = Results {
        observed_counts: observed.counts().to_vec(),
        next_outcome: next,
        bounds: idm_bounds(&observed, args.s, next)?,
    };
    let inputs = ModelInputs {
        channel_file: args.channel.as_deref(),
        data_file: args.data.as_deref(),
        channel: &channel,
        n_observations: data.len(),
        s: Some(args.s),
        counts: counts.counts(),
    };
    emit_report("idm", inputs, results, &args.numerics, started)
}

/// Runs the vacuity check; returns the verdict so the caller can set the
/// exit status.
pub fn vacuity(args: &VacuityArgs) -> Result<Verdict> {
    let started = Instant::now();
    let channel = read_channel(&args.channel)?;
    let data = load_data(args.data.as_deref(), &channel)?;
    let counts = future_counts(&args.counts, channel.k())?;
    ensure!(
        counts.total() > 0,
        "--counts must describe a non-empty future dataset"
    );
    let prior_set = PriorSet::new(args.s, channel.k())?;
    let q = args.numerics.quadrature()?;
    let o = args.numerics.optimizer(args.gap_ladder.as_deref())?;
    args.numerics.check(args.csv.as_deref())?;

    let report: VacuityReport =
        vacuity_check(&prior_set, &channel.channel, &data, &counts, &q, &o)?;
    if let Some(csv) = &args.csv {
        let rows: Vec<Vec<f64>> = report
            .ladder_values
            .iter()
            .map(|p| {
                vec![
                    p.gap,
                    p.prior.lower,
                    p.prior.upper,
                    p.posterior.lower,
                    p.posterior.upper,
                    p.posterior.lower_meta.std_error,
                    p.posterior.upper_meta.std_error,
                ]
            })
            .collect();
        let bytes = to_csv(
            &[
                "gap",
                "prior_lower",
                "prior_upper",
                "posterior_lower",
                "posterior_upper",
                "posterior_lower_std_error",
                "posterior_upper_std_error",
            ],
            &rows,
        )?;
        write_atomic(csv, &bytes)?;
    }
    #[derive(Serialize)]
    struct Inputs<'a> {
        #[serde(flatten)]
        model: ModelInputs<'a>,
        gap_ladder: &'a [f64],
    }
    let verdict = report.verdict;
    let inputs = Inputs {
        model: ModelInputs {
            channel_file: Some(&args.channel),
            data_file: args.data.as_deref(),
            channel: &channel,
            n_observations: data.len(),
            s: Some(args.s),
            counts: counts.counts(),
        },
        gap_ladder: &o.boundary_ladder,
    };
    emit_report("vacuity", inputs, report, &args.numerics, started)?;
    Ok(verdict)
}

pub fn concentration(args: &ConcentrationArgs) -> Result<()> {
    let started = Instant::now();
    let counts = CountVector::new(parse_counts(&args.counts)?)?;
    ensure!(
        counts.total() > 0,
        "--counts must describe a non-empty future dataset"
    );
    ensure!(args.delta > 0.0, "--delta must be positive");
    let n_list: Vec<u64> = parse_list(&args.n_list)?;
    let vertex = default_vertex(&counts, args.vertex)?;
    let q = args.numerics.quadrature()?;
    args.numerics.check(args.csv.as_deref())?;

    let traj: Vec<ConcentrationPoint> =
        concentration_experiment(&n_list, &counts, args.delta, vertex, &q)?;
    if let Some(csv) = &args.csv {
        let rows: Vec<Vec<f64>> = traj
            .iter()
            .map(|p| {
                vec![
                    p.n as f64,
                    p.expectation,
                    p.superlevel_mass.value,
                    p.superlevel_mass.std_error,
                ]
            })
            .collect();
        write_atomic(
            csv,
            &to_csv(
                &[
                    "n",
                    "expectation",
                    "superlevel_mass",
                    "superlevel_mass_std_error",
                ],
                &rows,
            )?,
        )?;
    }
    #[derive(Serialize)]
    struct Inputs<'a> {
        counts: &'a [u64],
        delta: f64,
        n_list: &'a [u64],
        vertex: usize,
    }
    let inputs = Inputs {
        counts: counts.counts(),
        delta: args.delta,
        n_list: &n_list,
        vertex,
    };
    #[derive(Serialize)]
    struct Results {
        trajectory: Vec<ConcentrationPoint>,
    }
    emit_report(
        "appendix concentration",
        inputs,
        Results { trajectory: traj },
        &args.numerics,
        started,
    )
}

pub fn ratio(args: &RatioArgs) -> Result<()> {
    let started = Instant::now();
    let channel = read_channel(&args.channel)?;
    let data = load_data(args.data.as_deref(), &channel)?;
    let counts = future_counts(&args.counts, channel.k())?;
    ensure!(
        counts.total() > 0,
        "--counts must describe a non-empty future dataset"
    );
    let n_list: Vec<u64> = parse_list(&args.n_list)?;
    let vertex = default_vertex(&counts, args.vertex)?;
    let q = args.numerics.quadrature()?;
    args.numerics.check(args.csv.as_deref())?;

    let likelihood = channel.channel.compile(&data)?;
    let traj: Vec<RatioPoint> = ratio_experiment(&n_list, &counts, &likelihood, vertex, &q)?;
    if let Some(csv) = &args.csv {
        let rows: Vec<Vec<f64>> = traj
            .iter()
            .map(|p| vec![p.n as f64, p.ratio.value, p.ratio.std_error])
            .collect();
        write_atomic(csv, &to_csv(&["n", "ratio", "ratio_std_error"], &rows)?)?;
    }
    #[derive(Serialize)]
    struct Inputs<'a> {
        #[serde(flatten)]
        model: ModelInputs<'a>,
        n_list: &'a [u64],
        vertex: usize,
    }
    let inputs = Inputs {
        model: ModelInputs {
            channel_file: Some(&args.channel),
            data_file: args.data.as_deref(),
            channel: &channel,
            n_observations: data.len(),
            s: None,
            counts: counts.counts(),
        },
        n_list: &n_list,
        vertex,
    };
    #[derive(Serialize)]
    struct Results {
        trajectory: Vec<RatioPoint>,
    }
    emit_report(
        "appendix ratio",
        inputs,
        Results { trajectory: traj },
        &args.numerics,
        started,
    )
}

/// Runs a parsed command; `Ok(true)` means an inconclusive verdict.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Simulate(a) => simulate(a).map(|_| false),
        Command::Infer(a) => infer(a).map(|_| false),
        Command::Idm(a) => idm(a).map(|_| false),
        Command::Vacuity(a) => vacuity(a).map(|v| v == Verdict::Inconclusive),
        Command::Appendix(AppendixCommand::Concentration(a)) => concentration(a).map(|_| false),
        Command::Appendix(AppendixCommand::Ratio(a)) => ratio(a).map(|_| false),
    }
}

/// Exit status 0 on success, 2 on an inconclusive verdict, 1 on any error
/// (including command-line usage errors).
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_INCONCLUSIVE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
