use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pwaff_core::catalog::{self, FixtureMap};
use pwaff_core::entropyest::{estimate, EntropyReport, EstimateConfig};
use pwaff_core::io;
use pwaff_core::pwamap::{
    growth_with_partition, iterate_partition_with, max_multiplicity, GrowthReport, GrowthSeq, PwaMap, DEFAULT_CELL_CAP,
};
use pwaff_core::rates::{entropy_upper_bound, lambda_rates, rho_sampled, BoundReport, RateReport, SampleConfig};
use pwaff_core::skew::{fibred_bounds, FibredBounds, SkewProduct};
use pwaff_core::verify::{plan_for, verify_fixture, FixtureVerdict};

mod output;

use output::{emit, Table};

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_USAGE: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "pwaff",
    version,
    about = "Entropy and expansion rates of piecewise affine maps"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Directory for artifacts (partition exports, CSV series).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Abort when a partition exceeds this many cells.
    #[arg(long, global = true, env = "PWAFF_CELL_CAP", default_value_t = DEFAULT_CELL_CAP)]
    cell_cap: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Iterate the continuity partition and report cell and multiplicity counts.
    Partition {
        /// Map definition file, or a catalog name.
        map: String,
        #[arg(short, long)]
        n: usize,
    },
    /// Expansion rates of the composed linear parts on Z^n.
    Rates {
        map: String,
        #[arg(short, long)]
        n: usize,
        /// Frame sizes for sampled angular rates (default: 1..d).
        #[arg(long, value_delimiter = ',')]
        i: Vec<usize>,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Assembled entropy upper bound with its breakdown.
    Bound {
        map: String,
        #[arg(short, long)]
        n: usize,
    },
    /// Direct covering and separated-set entropy estimate.
    Estimate {
        map: String,
        #[command(flatten)]
        est: EstimateArgs,
    },
    /// Fibred entropy bounds for a skew product.
    SkewBound {
        /// Skew definition file, or a catalog name.
        skew: String,
        /// Base partition level.
        #[arg(short, long)]
        n: usize,
        /// Fibre word length.
        #[arg(short, long)]
        m: usize,
        #[command(flatten)]
        est: EstimateArgs,
    },
    /// Built-in fixtures.
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    /// Check fixtures against their expected values.
    Verify {
        /// Fixture names (default: all).
        names: Vec<String>,
        /// Override the sampling seed of every plan.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    /// List fixture names.
    List,
    /// Print a fixture's definition JSON.
    Export { name: String },
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long, value_delimiter = ',')]
    eps_ladder: Option<Vec<f64>>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points per axis for covering counts.
    #[arg(long)]
    grid: Option<usize>,
    /// Partition level used for the rate bound.
    #[arg(long)]
    rates_n: Option<usize>,
}

impl EstimateArgs {
    fn config(&self, cap: usize) -> anyhow::Result<EstimateConfig> {
        let mut c = EstimateConfig {
            cell_cap: cap,
            ..EstimateConfig::default()
        };
        if let Some(e) = &self.eps_ladder {
            c.eps_ladder = e.clone();
        }
        macro_rules! set {
            ($($f:ident => $g:ident),*) => {$(if let Some(v) = self.$f { c.$g = v; })*};
        }
        set!(n_min => n_min, n_max => n_max, samples => samples, seed => seed, grid => grid_per_axis, rates_n => rates_n);
        c.mult_n = c.rates_n;
        if c.n_max == 0 || c.samples == 0 || c.grid_per_axis == 0 || c.rates_n == 0 {
            bail!(Usage("numeric settings must be positive".into()));
        }
        Ok(c)
    }
}

/// A usage error detected after argument parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<pwaff_core::Error>() {
        Some(pwaff_core::Error::ResourceLimit(_)) => EXIT_RESOURCE,
        Some(pwaff_core::Error::InvalidInput(_)) => EXIT_USAGE,
        Some(_) => EXIT_INVALID,
        None if err.downcast_ref::<std::io::Error>().is_some() => EXIT_USAGE,
        None => EXIT_INVALID,
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.downcast_ref::<std::io::Error>()
        .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.cell_cap == 0 || cli.threads == Some(0) {
        eprintln!("error: --cell-cap and --threads must be positive");
        return ExitCode::from(EXIT_USAGE);
    }
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let cap = cli.cell_cap;
    match &cli.cmd {
        Cmd::Partition { map, n } => cmd_partition(cli, &load_map(map)?, *n),
        Cmd::Rates {
            map,
            n,
            i,
            samples,
            seed,
        } => {
            let cfg = SampleConfig {
                samples: *samples,
                seed: *seed,
                ..SampleConfig::default()
            };
            cmd_rates(cli, &load_map(map)?, *n, i, cfg)
        }
        Cmd::Bound { map, n } => {
            let f = load_map(map)?;
            let (growth, rates) = growth_and_rates(&f, *n, cap)?;
            let b = entropy_upper_bound(&rates, f.dim(), growth.mult_slope());
            emit(cli.format, &b, bound_table(&b))?;
            Ok(0)
        }
        Cmd::Estimate { map, est } => {
            let f = load_map(map)?;
            let r = estimate(&f, &est.config(cap)?)?;
            write_estimate_series(cli, &r)?;
            emit(cli.format, &r, estimate_table(&r))?;
            Ok(0)
        }
        Cmd::SkewBound { skew, n, m, est } => {
            if *n == 0 || *m == 0 {
                bail!(Usage("-n and -m must be positive".into()));
            }
            let sp = load_skew(skew)?;
            let b = fibred_bounds(&sp, *n, *m, &est.config(cap)?)?;
            emit(cli.format, &b, skew_table(&b))?;
            Ok(0)
        }
        Cmd::Catalog { cmd } => cmd_catalog(cli, cmd),
        Cmd::Verify { names, seed } => cmd_verify(cli, names, *seed),
    }
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// A definition file if `arg` names one, otherwise a catalog fixture.
fn load_map(arg: &str) -> anyhow::Result<PwaMap> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(io::parse_map(&read_file(path)?)?);
    }
    match catalog::fixture(arg) {
        Some(fx) => Ok(fx.pwamap()?),
        None => bail!(Usage(format!("{arg}: no such file or catalog fixture"))),
    }
}

fn load_skew(arg: &str) -> anyhow::Result<SkewProduct> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(io::parse_skew(&read_file(path)?)?);
    }
    match catalog::fixture(arg).map(|fx| fx.map) {
        Some(FixtureMap::Skew(sp)) => Ok(sp),
        Some(FixtureMap::Map(_)) => bail!(Usage(format!("{arg} is not a skew product"))),
        None => bail!(Usage(format!("{arg}: no such file or catalog fixture"))),
    }
}

fn check_level(n: usize) -> anyhow::Result<()> {
    if n == 0 {
        bail!(Usage("-n must be positive".into()));
    }
    Ok(())
}

fn growth_and_rates(f: &PwaMap, n: usize, cap: usize) -> anyhow::Result<(GrowthReport, RateReport)> {
    check_level(n)?;
    let (growth, p) = growth_with_partition(f, n, n, cap)?;
    let rates = lambda_rates(&p)?;
    Ok((growth, rates))
}

fn write_artifact(cli: &Cli, name: &str, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PartitionOutput {
    n: usize,
    cells: GrowthSeq,
    mult: GrowthSeq,
}

fn cmd_partition(cli: &Cli, f: &PwaMap, n: usize) -> anyhow::Result<u8> {
    check_level(n)?;
    let mut out = PartitionOutput {
        n,
        cells: GrowthSeq::default(),
        mult: GrowthSeq::default(),
    };
    let mut last = None;
    iterate_partition_with(f, n, cli.cell_cap, |p| {
        let (m, _) = max_multiplicity(p)?;
        eprintln!("n={} cells={} mult={}", p.n, p.len(), m);
        out.cells.push(p.n, p.len() as u64);
        out.mult.push(p.n, m as u64);
        if p.n == n {
            last = Some(p.clone());
        }
        Ok(())
    })?;
    let p = last.expect("level n was visited");
    if cli.out.is_some() {
        let cells = serde_json::to_string_pretty(&io::export_partition(&p))?;
        write_artifact(cli, "partition.json", &cells)?;
        write_artifact(cli, "partition_summary.csv", &partition_table(&out).csv())?;
    }
    emit(cli.format, &out, partition_table(&out))?;
    Ok(0)
}

fn partition_table(out: &PartitionOutput) -> Table {
    let mut t = Table::new(&["n", "cells", "max_mult"]);
    for (c, m) in out.cells.entries.iter().zip(&out.mult.entries) {
        t.row(vec![c.n.to_string(), c.value.to_string(), m.value.to_string()]);
    }
    t
}

#[derive(Serialize)]
struct RatesOutput {
    rates: RateReport,
    bound: BoundReport,
}

fn cmd_rates(cli: &Cli, f: &PwaMap, n: usize, frames: &[usize], cfg: SampleConfig) -> anyhow::Result<u8> {
    check_level(n)?;
    let d = f.dim();
    let frames: Vec<usize> = if frames.is_empty() {
        (1..d).collect()
    } else {
        frames.to_vec()
    };
    if let Some(bad) = frames.iter().find(|&&i| i == 0 || i >= d) {
        bail!(Usage(format!("frame size {bad} is outside 1..{d}")));
    }
    if cfg.samples == 0 {
        bail!(Usage("--samples must be positive".into()));
    }
    let (growth, p) = growth_with_partition(f, n, n, cli.cell_cap)?;
    let mut rates = lambda_rates(&p)?;
    if !frames.is_empty() {
        let mut sampled = vec![f64::NAN; d - 1];
        for &i in &frames {
            sampled[i - 1] = rho_sampled(f, &p, i, cfg)?.value;
        }
        rates.rho_sampled = Some(sampled);
    }
    let bound = entropy_upper_bound(&rates, d, growth.mult_slope());
    let out = RatesOutput { rates, bound };
    emit(cli.format, &out, rates_table(&out))?;
    Ok(0)
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "-".into()
    } else {
        format!("{v:.6}")
    }
}

fn log2(v: f64) -> f64 {
    v / std::f64::consts::LN_2
}

fn rates_table(out: &RatesOutput) -> Table {
    let r = &out.rates;
    let d1 = r.lambda_plus_graded.len().saturating_sub(1);
    let mut head = vec![
        "n".to_string(),
        "lambda_plus".into(),
        "lambda_max".into(),
        "lambda_min".into(),
    ];
    for i in 1..=d1 {
        head.push(format!("rho_hat_{i}"));
        head.push(format!("rho_bound_{i}"));
    }
    head.push("h_bound".into());
    head.push("h_bound_log2".into());
    let mut t = Table::from_strings(head);
    let mut row = vec![
        r.n.to_string(),
        fmt(r.lambda_plus),
        fmt(r.lambda_max),
        fmt(r.lambda_min),
    ];
    for i in 0..d1 {
        let s = r
            .rho_sampled
            .as_ref()
            .and_then(|v| v.get(i).copied())
            .unwrap_or(f64::NAN);
        row.push(fmt(s));
        row.push(fmt(r.rho_bound.get(i).copied().unwrap_or(f64::NAN)));
    }
    row.push(fmt(out.bound.bound));
    row.push(fmt(log2(out.bound.bound)));
    t.row(row);
    t
}

fn bound_table(b: &BoundReport) -> Table {
    let mut t = Table::new(&["term", "value", "log2"]);
    let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
    for (k, v) in [
        ("lambda_plus", b.lambda_plus),
        ("mult_slope", b.mult_slope),
        ("rho_sum", opt(b.rho_sum)),
        ("exponent_spread", opt(b.exponent_spread)),
        ("mult_term", b.mult_term),
        ("bound", b.bound),
    ] {
        t.row(vec![k.to_string(), fmt(v), fmt(log2(v))]);
    }
    t
}

fn estimate_table(r: &EntropyReport) -> Table {
    let mut t = Table::new(&["eps", "covering_slope", "separated_slope", "n_eff"]);
    for rung in &r.ladder {
        t.row(vec![
            rung.eps.to_string(),
            fmt(rung.covering.two_point),
            fmt(rung.separated.two_point),
            rung.covering.n_eff.to_string(),
        ]);
    }
    t.row(vec![
        "headline".into(),
        fmt(r.headline),
        fmt(log2(r.headline)),
        String::new(),
    ]);
    t.row(vec![
        "verdict".into(),
        fmt(r.verdict[0]),
        fmt(r.verdict[1]),
        String::new(),
    ]);
    t
}

/// Count series `(eps, n, covering, separated)`.
fn estimate_series(r: &EntropyReport) -> Table {
    let mut t = Table::new(&["eps", "n", "covering", "separated"]);
    for rung in &r.ladder {
        for (&(n, c), &(_, s)) in rung.covering.counts.iter().zip(&rung.separated.counts) {
            t.row(vec![rung.eps.to_string(), n.to_string(), c.to_string(), s.to_string()]);
        }
    }
    t
}

fn write_estimate_series(cli: &Cli, r: &EntropyReport) -> anyhow::Result<()> {
    write_artifact(cli, "counts.csv", &estimate_series(r).csv())
}

fn skew_table(b: &FibredBounds) -> Table {
    let mut t = Table::new(&["term", "value"]);
    for (k, v) in [
        ("lower", b.lower),
        ("upper", b.upper),
        ("base_entropy", b.base_entropy),
        ("base_entropy_upper", b.base_entropy_upper),
        ("base_mult_slope", b.base_mult_slope),
        ("lambda_plus_fiber", b.fiber.lambda_plus_fiber),
        ("mult_fiber", b.fiber.mult_fiber),
    ] {
        t.row(vec![k.to_string(), fmt(v)]);
    }
    t
}

fn cmd_catalog(cli: &Cli, cmd: &CatalogCmd) -> anyhow::Result<u8> {
    match cmd {
        CatalogCmd::List => {
            let names = catalog::fixture_names();
            match cli.format {
                Format::Json => output::out(&format!("{}\n", serde_json::to_string_pretty(&names)?))?,
                _ => output::out(&names.iter().map(|n| format!("{n}\n")).collect::<String>())?,
            }
        }
        CatalogCmd::Export { name } => {
            let fx = catalog::fixture(name).ok_or_else(|| Usage(format!("unknown fixture {name}")))?;
            let json = match &fx.map {
                FixtureMap::Map(f) => io::map_to_json(f),
                FixtureMap::Skew(sp) => io::skew_to_json(sp),
            };
            write_artifact(cli, &format!("{name}.json"), &json)?;
            output::out(&format!("{json}\n"))?;
        }
    }
    Ok(0)
}

fn cmd_verify(cli: &Cli, names: &[String], seed: Option<u64>) -> anyhow::Result<u8> {
    let names: Vec<String> = if names.is_empty() {
        catalog::fixture_names().into_iter().map(String::from).collect()
    } else {
        names.to_vec()
    };
    let mut fixtures = Vec::new();
    for n in &names {
        fixtures.push(catalog::fixture(n).ok_or_else(|| Usage(format!("unknown fixture {n}")))?);
    }
    let mut verdicts: Vec<FixtureVerdict> = Vec::new();
    for fx in &fixtures {
        let mut plan = plan_for(fx.name);
        plan.estimate.cell_cap = cli.cell_cap;
        if let Some(s) = seed {
            plan.estimate.seed = s;
            plan.rho.seed = s;
        }
        let v = verify_fixture(fx, &plan)?;
        eprintln!("{} {}", fx.name, if v.pass { "pass" } else { "FAIL" });
        verdicts.push(v);
    }
    let mut t = Table::new(&["fixture", "quantity", "expected", "tol", "measured", "upper", "result"]);
    for v in &verdicts {
        for c in &v.checks {
            t.row(vec![
                v.name.clone(),
                serde_json::to_value(c.quantity)?
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
                fmt(c.expected),
                fmt(c.tol),
                fmt(c.measured),
                c.measured_upper.map_or(String::new(), fmt),
                if c.pass { "pass" } else { "FAIL" }.into(),
            ]);
        }
    }
    emit(cli.format, &verdicts, t)?;
    Ok(if verdicts.iter().all(|v| v.pass) { 0 } else { EXIT_FAIL })
}
