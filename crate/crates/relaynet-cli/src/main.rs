//! `relaynet` command-line front end.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use output::{emit, num, opt, Report, RunManifest};
use relaynet::acceptance::{self, DEFAULT_SEED};
use relaynet::af::{self, AfParams};
use relaynet::capacity::{ergodic_interval, outage_bound_p1};
use relaynet::coherent::{mutual_information, Protocol, SinrValue};
use relaynet::concentration::sinr_interval;
use relaynet::model::{derive_constants, NetworkConfig};
use relaynet::montecarlo::{self, Ensemble};

const WORKERS_ENV: &str = "RELAYNET_WORKERS";

#[derive(Parser)]
#[command(name = "relaynet", version, about = "Capacity bounds and simulation for large fading relay networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed for all random streams.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads for Monte Carlo loops.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Number of Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Per-trial SINR samples of a coherent protocol.
    SimulateSinr(NetArgs),
    /// Pooled eigenvalues of an AF random-matrix ensemble as an empirical CDF.
    SimulateEsd(EsdArgs),
    /// Finite-size AF capacity estimate.
    SimulateAf(AfMcArgs),
    /// Concentration interval for the SINR over a grid of deviation parameters.
    Bounds(BoundsArgs),
    /// P1 outage bound over a rate grid.
    Outage(OutageArgs),
    /// Ergodic-capacity interval with a Monte Carlo estimate.
    Ergodic(ErgodicArgs),
    /// Tabulated limiting eigenvalue density.
    AfDensity(DensityArgs),
    /// Asymptotic AF capacity over a grid of beta.
    AfCapacity(AfCapArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Args, Serialize)]
struct Channel {
    /// Noise variance.
    #[arg(long, default_value_t = 0.01)]
    sigma2: f64,
    /// Relay power budget.
    #[arg(long = "p-rel", default_value_t = 1.0)]
    p_rel: f64,
}

#[derive(Args, Serialize)]
struct NetArgs {
    #[arg(long, value_parser = parse_protocol)]
    #[serde(serialize_with = "ser_protocol")]
    protocol: Protocol,
    /// Source-destination pairs.
    #[arg(long = "M")]
    m: usize,
    /// Relays.
    #[arg(long = "K")]
    k: usize,
    /// Antennas per v-relay (cooperative protocols).
    #[arg(long = "L", default_value_t = 1)]
    l: usize,
    #[command(flatten)]
    channel: Channel,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum EnsembleArg {
    Lambda,
    T,
    Product,
}

#[derive(Args, Serialize)]
struct EsdArgs {
    #[arg(long, value_enum)]
    ensemble: EnsembleArg,
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "K")]
    k: usize,
    /// Relay amplitude.
    #[arg(long, default_value_t = 1.0)]
    d: f64,
}

#[derive(Args, Serialize)]
struct AfMcArgs {
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "K")]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma2: f64,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    #[arg(long, value_parser = parse_protocol)]
    #[serde(serialize_with = "ser_protocol")]
    protocol: Protocol,
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "K")]
    k: usize,
    /// Grid as `start:stop:step` or a comma list.
    #[arg(long)]
    x: String,
    #[command(flatten)]
    channel: Channel,
}

#[derive(Args, Serialize)]
struct OutageArgs {
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "K")]
    k: usize,
    /// Rate grid in bits per channel use, `start:stop:step` or a comma list.
    #[arg(long)]
    rates: String,
    #[command(flatten)]
    channel: Channel,
}

#[derive(Args, Serialize)]
struct ErgodicArgs {
    #[arg(long, value_parser = parse_protocol)]
    #[serde(serialize_with = "ser_protocol")]
    protocol: Protocol,
    /// Comma list of pair counts.
    #[arg(long = "M", value_delimiter = ',', required = true)]
    m: Vec<usize>,
    /// Comma list of relay counts, one per entry of `--M`.
    #[arg(long = "K", value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long = "L", default_value_t = 1)]
    l: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[command(flatten)]
    channel: Channel,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DensityKind {
    /// Eigenvalues of the AF product matrix.
    Af,
    /// Marchenko-Pastur law of the forward hop.
    Mp,
    /// Eigenvalues of `T`.
    T,
}

#[derive(Args, Serialize)]
struct DensityArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    /// Number of rows.
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long, value_enum, default_value = "af")]
    kind: DensityKind,
}

#[derive(Args, Serialize)]
struct AfCapArgs {
    /// Grid as `start:stop:step` or a comma list.
    #[arg(long = "beta-grid")]
    beta_grid: String,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma2: f64,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Suite {
    Primary,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "primary")]
    suite: Suite,
    /// Comma list of criterion numbers; all when absent.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<usize>,
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse().map_err(|e: relaynet::Error| e.to_string())
}

fn ser_protocol<S: serde::Serializer>(p: &Protocol, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(p.tag())
}

enum CliError {
    Usage(String),
    Lib(relaynet::Error),
    Io(std::io::Error),
    Failed(usize),
}

impl From<relaynet::Error> for CliError {
    fn from(e: relaynet::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(relaynet::Error::Numerical(_)) | CliError::Failed(_) => 3,
            CliError::Lib(_) | CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
            CliError::Io(e) => format!("cannot write output: {e}"),
            CliError::Failed(n) => format!("{n} acceptance criteria failed"),
        }
    }
}

type Res<T> = Result<T, CliError>;

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
fn parse_grid(s: &str) -> Res<Vec<f64>> {
    let bad = || CliError::Usage(format!("cannot parse grid '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse().map_err(|_| bad())).collect::<Res<_>>()?;
        let (start, stop, step) = (v[0], v[1], v[2]);
        if !(step > 0.0) || stop < start {
            return Err(CliError::Usage(format!("grid '{s}' needs step > 0 and stop >= start")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // Round away the drift of repeated steps so 0.1 steps print as 0.3, not 0.30000000000000004.
        let tidy = |v: f64| format!("{v:.12e}").parse::<f64>().unwrap_or(v);
        return Ok((0..n).map(|i| tidy(start + step * i as f64)).collect());
    }
    if parts.len() != 1 {
        return Err(bad());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn network(a: &NetArgs, seed: u64) -> Res<NetworkConfig> {
    let cfg = NetworkConfig::uniform(a.m, a.k, a.channel.sigma2, a.channel.p_rel, seed)?;
    Ok(if a.protocol.is_coop() { cfg.with_groups(a.l)? } else { cfg })
}

fn simulate_sinr(a: &NetArgs, trials: usize, seed: u64) -> Res<Report> {
    let cfg = network(a, seed)?;
    let samples = montecarlo::sinr_samples(&cfg, a.protocol, trials)?;
    let rows = samples
        .iter()
        .enumerate()
        .map(|(i, &s)| vec![i.to_string(), num(s), num(mutual_information(SinrValue { value: s, protocol: a.protocol, m: 0 }))])
        .collect();
    Ok(Report::Csv { header: vec!["trial", "sinr", "rate"], rows })
}

fn simulate_esd(a: &EsdArgs, trials: usize, seed: u64) -> Res<Report> {
    let ensemble = match a.ensemble {
        EnsembleArg::Lambda => Ensemble::Lambda,
        EnsembleArg::T => Ensemble::T,
        EnsembleArg::Product => Ensemble::Product,
    };
    let cdf = montecarlo::esd_samples(ensemble, a.m, a.k, a.d, trials, seed)?;
    let n = cdf.samples().len() as f64;
    let rows = cdf.samples().iter().enumerate().map(|(i, &x)| vec![num(x), num((i + 1) as f64 / n)]).collect();
    Ok(Report::Csv { header: vec!["x", "cdf"], rows })
}

fn simulate_af(a: &AfMcArgs, trials: usize, seed: u64) -> Res<Report> {
    let (c, se) = montecarlo::af_capacity_mc(a.m, a.k, a.d, a.sigma2, trials, seed)?;
    let row = vec![a.m.to_string(), a.k.to_string(), num(a.d), num(a.sigma2), trials.to_string(), num(c), num(se)];
    Ok(Report::Csv { header: vec!["M", "K", "d", "sigma2", "trials", "capacity", "stderr"], rows: vec![row] })
}

fn bounds(a: &BoundsArgs, seed: u64) -> Res<Report> {
    let cfg = NetworkConfig::uniform(a.m, a.k, a.channel.sigma2, a.channel.p_rel, seed)?;
    let gains = derive_constants(&cfg)?;
    let rows = parse_grid(&a.x)?
        .into_iter()
        .map(|x| {
            let i = sinr_interval(a.protocol, a.m, a.k, x, &gains, a.channel.sigma2)?;
            Ok(vec![num(x), num(i.lower), num(i.upper), num(i.fail_prob_bound)])
        })
        .collect::<Res<_>>()?;
    Ok(Report::Csv { header: vec!["x", "L", "U", "fail_bound"], rows })
}

fn outage(a: &OutageArgs, seed: u64) -> Res<Report> {
    let cfg = NetworkConfig::uniform(a.m, a.k, a.channel.sigma2, a.channel.p_rel, seed)?;
    let gains = derive_constants(&cfg)?;
    let rows = parse_grid(&a.rates)?
        .into_iter()
        .map(|r| {
            let b = outage_bound_p1(a.m, a.k, r, &gains, a.channel.sigma2)?;
            Ok(vec![num(r), num(b.x()), opt(b.bound())])
        })
        .collect::<Res<_>>()?;
    Ok(Report::Csv { header: vec!["R", "x", "bound"], rows })
}

fn ergodic(a: &ErgodicArgs, trials: usize, seed: u64) -> Res<Report> {
    if a.m.len() != a.k.len() {
        return Err(CliError::Usage(format!("--M has {} entries but --K has {}", a.m.len(), a.k.len())));
    }
    let mut rows = Vec::new();
    for (&m, &k) in a.m.iter().zip(&a.k) {
        let net = NetArgs { protocol: a.protocol, m, k, l: a.l, channel: a.channel };
        let cfg = network(&net, seed)?;
        let gains = derive_constants(&cfg)?;
        let (n, l) = if a.protocol.is_coop() { (cfg.q(), a.l) } else { (k, 1) };
        let iv = ergodic_interval(a.protocol, m, n, l, a.eps, a.delta, &gains)?;
        let (mc, _) = montecarlo::ergodic_estimate(&cfg, a.protocol, trials)?;
        rows.push(vec![m.to_string(), k.to_string(), num(iv.lower), num(iv.upper), num(mc)]);
    }
    Ok(Report::Csv { header: vec!["M", "K", "lower", "upper", "mc_estimate"], rows })
}

fn af_density(a: &DensityArgs) -> Res<Report> {
    if a.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let p = AfParams::new(a.beta, a.d, 0.01)?;
    // Curves carry the lower support edge on top of the requested interior points.
    let curve = match a.kind {
        DensityKind::Af if a.beta == 1.0 => af::limiting_density_default(&p, a.points)?,
        DensityKind::Af => af::limiting_density_default(&p, a.points - 1)?,
        DensityKind::Mp => af::mp_density(&p, a.points - 1)?,
        DensityKind::T => af::ft_density(&p, a.points - 1)?,
    };
    let rows = curve.grid.iter().zip(&curve.values).map(|(&x, &f)| vec![num(x), num(f)]).collect();
    Ok(Report::Csv { header: vec!["x", "f"], rows })
}

fn af_capacity(a: &AfCapArgs) -> Res<Report> {
    let rows = parse_grid(&a.beta_grid)?
        .into_iter()
        .map(|b| Ok(vec![num(b), num(af::capacity_beta(&AfParams::new(b, a.d, a.sigma2)?)?)]))
        .collect::<Res<_>>()?;
    Ok(Report::Csv { header: vec!["beta", "C"], rows })
}

fn verify(a: &VerifyArgs, seed: u64) -> Res<(Report, usize)> {
    let ids: Vec<usize> = if a.criteria.is_empty() { (1..=12).collect() } else { a.criteria.clone() };
    let mut results = Vec::new();
    let mut failed = 0;
    for id in ids {
        let o = acceptance::run_criterion(id, seed)?;
        eprintln!("{o}");
        failed += usize::from(!o.passed);
        results.push(json!({ "id": o.id, "title": o.title, "passed": o.passed, "detail": o.detail, "seconds": o.elapsed.as_secs_f64() }));
    }
    Ok((Report::Json(json!({ "criteria": results, "failed": failed })), failed))
}

fn run(cli: Cli) -> Res<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let command = std::iter::once("relaynet".to_string()).chain(std::env::args().skip(1)).collect::<Vec<_>>().join(" ");
    let mut config = serde_json::to_value(&cli.command).expect("arguments serialise");
    let trials = cli.trials;
    config["trials"] = json!(trials);
    let manifest = RunManifest::new(command, config, cli.seed);
    let t = |default: usize| trials.unwrap_or(default);
    let mut failed = 0;
    let report = match &cli.command {
        Command::SimulateSinr(a) => simulate_sinr(a, t(10_000), cli.seed)?,
        Command::SimulateEsd(a) => simulate_esd(a, t(10), cli.seed)?,
        Command::SimulateAf(a) => simulate_af(a, t(20), cli.seed)?,
        Command::Bounds(a) => bounds(a, cli.seed)?,
        Command::Outage(a) => outage(a, cli.seed)?,
        Command::Ergodic(a) => ergodic(a, t(2_000), cli.seed)?,
        Command::AfDensity(a) => af_density(a)?,
        Command::AfCapacity(a) => af_capacity(a)?,
        Command::Verify(a) => {
            let (r, f) = verify(a, cli.seed)?;
            failed = f;
            r
        }
    };
    emit(&manifest, &report, cli.out.as_deref()).map_err(CliError::Io)?;
    if failed > 0 {
        return Err(CliError::Failed(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
