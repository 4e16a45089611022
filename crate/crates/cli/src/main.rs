use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use num_complex::Complex64;

use msvou::calibration::{self, CalibConfig, Market, ModelFile, Variant};
use msvou::covswap::{normalized_rate_curve, write_curve_csv};
use msvou::fourier::PricingConfig;
use msvou::mc::{simulate, write_paths_csv, MCConfig};
use msvou::model::DomainGate;
use msvou::quad::QuadConfig;
use msvou::Error;

#[derive(Parser, Debug)]
#[command(name = "msvou", version, about = "OU-Wishart stochastic volatility: pricing, calibration, simulation")]
struct Cli {
    /// Worker threads for pricing and simulation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Price one call on a dollar pair or the cross pair.
    Price(PriceArgs),
    /// Fit a model variant to a quote file.
    Calibrate(CalibrateArgs),
    /// Simulate paths and write them as CSV.
    Simulate(SimulateArgs),
    /// Normalized covariance-swap rate curve as CSV.
    Covswap(CovswapArgs),
    /// Model implied volatilities over a strike/maturity grid as CSV.
    Smile(SmileArgs),
    /// Compare closed-form and quadrature transforms on a grid.
    Mgfcheck(MgfcheckArgs),
}

#[derive(Args, Debug)]
struct MarketArgs {
    /// Parameter file (`key = value`).
    #[arg(long)]
    model: PathBuf,
    /// Overrides `spot1` from the parameter file.
    #[arg(long)]
    spot1: Option<f64>,
    /// Overrides `spot2` from the parameter file.
    #[arg(long)]
    spot2: Option<f64>,
}

#[derive(Args, Debug)]
struct PriceArgs {
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long)]
    pair: String,
    #[arg(long)]
    strike: f64,
    #[arg(long)]
    maturity: f64,
    /// Absolute price tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    /// Quote CSV.
    #[arg(long)]
    quotes: PathBuf,
    /// Calibration config (`key = value`); defaults apply without it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's variant.
    #[arg(long)]
    variant: Option<String>,
    /// Pair names: asset 1, asset 2, cross.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = ["EURUSD".to_string(), "GBPUSD".to_string(), "EURGBP".to_string()])]
    pairs: Vec<String>,
    /// Fitted parameter file.
    #[arg(long)]
    out: PathBuf,
    /// Per-quote report CSV.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    maturity: f64,
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Equally spaced recording times in (0, T].
    #[arg(long, default_value_t = 1)]
    steps: usize,
    #[arg(long)]
    antithetic: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CovswapArgs {
    #[arg(long)]
    model: PathBuf,
    /// First asset (1-based).
    #[arg(long, default_value_t = 1)]
    i: usize,
    /// Second asset (1-based).
    #[arg(long, default_value_t = 2)]
    j: usize,
    /// Maturities as a list `a,b,c` or a range `start:end:count`.
    #[arg(long, default_value = "0.05:10:200")]
    maturities: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SmileArgs {
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long)]
    pair: String,
    /// Strikes as a list or `start:end:count`.
    #[arg(long)]
    strikes: String,
    /// Maturities as a list or `start:end:count`.
    #[arg(long)]
    maturities: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MgfcheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Points per real axis.
    #[arg(long, default_value_t = 7)]
    grid: usize,
    /// Exit with status 1 if the largest relative error exceeds this.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_grid(s: &str, what: &str) -> CliResult<Vec<f64>> {
    let bad = |m: String| Failure::Usage(format!("--{what}: {m}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|e| bad(format!("{e}")))?;
        let b: f64 = parts[1].trim().parse().map_err(|e| bad(format!("{e}")))?;
        let n: usize = parts[2].trim().parse().map_err(|e| bad(format!("{e}")))?;
        return match n {
            0 => Err(bad("count must be positive".into())),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
        };
    }
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| bad(format!("{e}")))?;
    if v.is_empty() {
        return Err(bad("empty grid".into()));
    }
    Ok(v)
}

fn load(path: &Path) -> CliResult<ModelFile> {
    Ok(calibration::load_model(path)?)
}

fn market_of(file: &ModelFile, a: &MarketArgs) -> CliResult<Market> {
    let base = file.market.clone();
    let s1 = a.spot1.or(base.as_ref().map(|m| m.spots[0]));
    let s2 = a.spot2.or(base.as_ref().map(|m| m.spots[1]));
    match (s1, s2) {
        (Some(s1), Some(s2)) => {
            let names = base.map(|m| m.pairs).unwrap_or_else(|| ["EURUSD", "GBPUSD", "EURGBP"].map(String::from));
            Ok(Market::new([&names[0], &names[1], &names[2]], [s1, s2])?)
        }
        _ => Err(Failure::Usage("spots missing: set spot1/spot2 in the parameter file or pass --spot1/--spot2".into())),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Compute(Error::Io(format!("{}: {e}", path.display()))))
}

fn run_price(a: &PriceArgs) -> CliResult<()> {
    let file = load(&a.market.model)?;
    let market = market_of(&file, &a.market)?;
    let cfg = PricingConfig { tol: a.tol, ..PricingConfig::default() };
    let r = calibration::price_option(&file.params, &market, &a.pair, a.strike, a.maturity, &cfg)?;
    println!("price={} quad_error={:e}", r.price, r.quad_error);
    Ok(())
}

fn run_calibrate(a: &CalibrateArgs) -> CliResult<()> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            CalibConfig::parse(&text)?
        }
        None => CalibConfig::new(Variant::A, calibration::default_initial()),
    };
    if let Some(v) = &a.variant {
        cfg.variant = Variant::parse(v).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let reader = BufReader::new(File::open(&a.quotes).map_err(|e| Error::Io(format!("{}: {e}", a.quotes.display())))?);
    let quotes = calibration::read_quotes_csv(reader)?;
    let pairs = [a.pairs[0].as_str(), a.pairs[1].as_str(), a.pairs[2].as_str()];
    let market = Market::from_quotes(pairs, &quotes)?;
    let rep = calibration::calibrate(&cfg, &market, quotes)?;
    calibration::save_model(&ModelFile { params: rep.params.clone(), market: Some(market) }, &a.out)?;
    if let Some(path) = &a.report {
        let mut w = create(path)?;
        rep.write_csv(&mut w)?;
        w.flush()?;
    }
    println!("variant={:?} rmse={} evaluations={} restarts={} seconds={:.3}", rep.variant, rep.rmse, rep.evaluations, rep.restarts, rep.wall_clock.as_secs_f64());
    for (pair, r, n) in &rep.per_pair {
        println!("pair={pair} rmse={r} quotes={n}");
    }
    if !rep.dropped.is_empty() {
        println!("dropped={}", rep.dropped.len());
    }
    Ok(())
}

fn run_simulate(a: &SimulateArgs) -> CliResult<()> {
    if !(a.maturity > 0.0) || a.steps == 0 {
        return Err(Failure::Usage("--maturity must be positive and --steps at least 1".into()));
    }
    let model = load(&a.model)?.params.to_model()?;
    let mut cfg = MCConfig::new(a.paths, a.seed);
    cfg.antithetic = a.antithetic;
    cfg.t_grid = Some((1..=a.steps).map(|k| a.maturity * k as f64 / a.steps as f64).collect());
    let paths = simulate(&model, a.maturity, &cfg)?;
    let mut w = create(&a.out)?;
    write_paths_csv(&paths, &mut w)?;
    w.flush()?;
    println!("paths={} steps={} out={}", paths.records.len(), a.steps, a.out.display());
    Ok(())
}

fn run_covswap(a: &CovswapArgs) -> CliResult<()> {
    if a.i == 0 || a.j == 0 || a.i > 2 || a.j > 2 {
        return Err(Failure::Usage("--i and --j must be 1 or 2".into()));
    }
    let grid = parse_grid(&a.maturities, "maturities")?;
    let model = load(&a.model)?.params.to_model()?;
    let curve = normalized_rate_curve(&model, a.i - 1, a.j - 1, &grid)?;
    let mut w = create(&a.out)?;
    write_curve_csv(&curve, &mut w)?;
    w.flush()?;
    let negative = curve.iter().filter(|c| c.negative).count();
    println!("points={} negative={negative} out={}", curve.len(), a.out.display());
    Ok(())
}

fn run_smile(a: &SmileArgs) -> CliResult<()> {
    let strikes = parse_grid(&a.strikes, "strikes")?;
    let maturities = parse_grid(&a.maturities, "maturities")?;
    let file = load(&a.market.model)?;
    let market = market_of(&file, &a.market)?;
    let cfg = PricingConfig { tol: a.tol, ..PricingConfig::default() };
    let smile = calibration::model_smile(&file.params, &market, &a.pair, &strikes, &maturities, &cfg)?;
    let mut w = create(&a.out)?;
    writeln!(w, "K,T,model_iv")?;
    for (k, t, v) in &smile {
        writeln!(w, "{k},{t},{v}")?;
    }
    w.flush()?;
    println!("points={} out={}", smile.len(), a.out.display());
    Ok(())
}

fn run_mgfcheck(a: &MgfcheckArgs) -> CliResult<()> {
    if a.grid < 2 {
        return Err(Failure::Usage("--grid must be at least 2".into()));
    }
    let p = load(&a.model)?.params;
    let general = p.to_model()?;
    let qc = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-13, ..QuadConfig::default() };
    let axis: Vec<f64> = (0..a.grid).map(|k| -0.5 + 2.0 * k as f64 / (a.grid - 1) as f64).collect();
    let (mut max_err, mut points, mut skipped) = (0.0f64, 0usize, 0usize);
    for &x1 in &axis {
        for &x2 in &axis {
            for &u in &[0.0, 1.5, -4.0] {
                let y = [Complex64::new(x1, u), Complex64::new(x2, 0.5 * u)];
                let closed = match p.log_mgf2_closed(y, a.t) {
                    Ok(v) => v,
                    Err(Error::OutOfStrip(_)) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                let quad = general.log_mgf_with(&y, a.t, DomainGate::Driver, &qc)?;
                let err = ((closed - quad).exp() - 1.0).norm();
                max_err = max_err.max(err);
                points += 1;
            }
        }
    }
    println!("max_rel_error={max_err:e} points={points} skipped={skipped}");
    if max_err > a.tol {
        return Err(Failure::Compute(Error::Numeric(format!("closed form and quadrature differ by {max_err:e} > {:e}", a.tol))));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let res = match &cli.command {
        Command::Price(a) => run_price(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Covswap(a) => run_covswap(a),
        Command::Smile(a) => run_smile(a),
        Command::Mgfcheck(a) => run_mgfcheck(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
