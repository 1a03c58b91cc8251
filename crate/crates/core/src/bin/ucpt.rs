use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ucpt::config::{CovKind, ExperimentConfig, NoiseKind, Preset};
use ucpt::experiments::{
    method_comparison, power_experiment, size_experiment, write_json, write_power_csv,
    write_pvalues_csv, write_summary_csv, Method, SizeReport, StripTiming,
};
use ucpt::io::{load_csv, CsvSchema};
use ucpt::{run_cusum_test, run_test, DataMatrix, KernelKind};

#[derive(Parser)]
#[command(name = "ucpt", version, about = "Robust bootstrap change point test for high-dimensional data")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the U-statistic change point test on a CSV matrix.
    Test(TestArgs),
    /// Run the boundary-removed CUSUM test on a CSV matrix.
    Cusum(CusumArgs),
    /// Monte Carlo size study under the null.
    SimulateSize(SimArgs),
    /// Monte Carlo power curves over (theta_max, m).
    SimulatePower(SimArgs),
    /// Linear-kernel test versus CUSUM on shared null datasets.
    Compare(SimArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV file, one observation per row.
    #[arg(long)]
    input: PathBuf,
    /// First line is a header.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The file stores one observation per column.
    #[arg(long)]
    transpose: bool,
}

#[derive(Args)]
struct CommonTestArgs {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates.
    #[arg(long = "bootstrap", short = 'B', default_value_t = 2000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the result as JSON.
    #[arg(long)]
    json: bool,
    /// Omit timing fields from the output.
    #[arg(long)]
    no_timing: bool,
    /// Exit with status 3 when the null is rejected.
    #[arg(long)]
    exit_status: bool,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = KernelKind::Linear)]
    kernel: KernelKind,
    #[command(flatten)]
    common: CommonTestArgs,
}

#[derive(Args)]
struct CusumArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Splits closer than this to either end are not scanned.
    #[arg(long, default_value_t = ucpt::cusum::DEFAULT_BOUNDARY)]
    boundary: usize,
    #[command(flatten)]
    common: CommonTestArgs,
}

#[derive(Args)]
struct SimArgs {
    /// TOML or JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    scenario_id: Option<String>,
    #[arg(long, value_enum)]
    noise: Option<NoiseKind>,
    #[arg(long, value_enum)]
    cov: Option<CovKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_enum)]
    kernel: Option<KernelKind>,
    #[arg(long)]
    boundary: Option<usize>,
    #[arg(long = "bootstrap", short = 'B')]
    bootstrap: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report files (default: current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Omit runtime fields from printed and written reports.
    #[arg(long)]
    no_timing: bool,
}

impl SimArgs {
    fn resolve(&self) -> ucpt::Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let cli = ExperimentConfig {
            preset: self.preset,
            scenario_id: self.scenario_id.clone(),
            noise: self.noise,
            cov: self.cov,
            n: self.n,
            p: self.p,
            kernel: self.kernel,
            boundary: self.boundary,
            b: self.bootstrap,
            reps: self.reps,
            alpha: self.alpha,
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            ..Default::default()
        };
        Ok(file.overlay(&cli).resolved())
    }
}

fn load_input(args: &InputArgs) -> ucpt::Result<DataMatrix> {
    if !args.delimiter.is_ascii() {
        return Err(ucpt::Error::InvalidParameter("delimiter must be an ASCII character".into()));
    }
    let schema = CsvSchema {
        has_header: args.header,
        delimiter: args.delimiter as u8,
        transpose: args.transpose,
    };
    load_csv(&args.input, &schema)
}

fn print_json<T: Serialize>(value: &T) -> ucpt::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn decision(reject: bool) -> &'static str {
    if reject {
        "reject H0 (change point detected)"
    } else {
        "do not reject H0"
    }
}

fn run_test_cmd(args: &TestArgs) -> ucpt::Result<bool> {
    let data = load_input(&args.input)?;
    let c = &args.common;
    let mut result = run_test(&data, &args.kernel, c.alpha, c.bootstrap, c.seed)?;
    if c.no_timing {
        result.elapsed_ms = None;
    }
    if c.json {
        print_json(&result)?;
    } else {
        println!("kernel     {}", result.kernel);
        println!("n x p      {} x {}", result.n, result.p);
        println!("statistic  {:.6}", result.statistic.t_max);
        println!("quantile   {:.6}  (level {}, B = {})", result.quantile, 1.0 - result.alpha, result.b);
        println!("p-value    {:.6}", result.p_value);
        println!("seed       {}", result.seed);
        println!("decision   {}", decision(result.reject));
        if let Some(ms) = result.elapsed_ms {
            println!("elapsed    {ms:.1} ms");
        }
    }
    Ok(result.reject)
}

fn run_cusum_cmd(args: &CusumArgs) -> ucpt::Result<bool> {
    let data = load_input(&args.input)?;
    let c = &args.common;
    let mut result = run_cusum_test(&data, args.boundary, c.alpha, c.bootstrap, c.seed)?;
    if c.no_timing {
        result.elapsed_ms = None;
    }
    if c.json {
        print_json(&result)?;
    } else {
        println!("method     cusum (boundary {})", result.boundary);
        println!("n x p      {} x {}", result.n, result.p);
        println!("statistic  {:.6}", result.statistic);
        println!("quantile   {:.6}  (level {}, B = {})", result.quantile, 1.0 - result.alpha, result.b);
        println!("p-value    {:.6}", result.p_value);
        println!("seed       {}", result.seed);
        println!("decision   {}", decision(result.reject));
        if let Some(ms) = result.elapsed_ms {
            println!("elapsed    {ms:.1} ms");
        }
    }
    Ok(result.reject)
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect()
}

fn out_dir(cfg: &ExperimentConfig) -> ucpt::Result<PathBuf> {
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn print_size(r: &SizeReport) {
    println!(
        "{:<40} {:<12} R={:<5} B={:<5} sup(0,1)={:.4}  sup(0,0.1]={:.4}  R(0.05)={:.4}{}",
        r.scenario_id,
        r.method.to_string(),
        r.p_values.len(),
        r.scenario.b,
        r.uniform_error_full,
        r.uniform_error_01,
        r.rejection_rate(0.05),
        r.runtime_ms.map(|ms| format!("  {ms:.0} ms")).unwrap_or_default()
    );
}

fn wrote(paths: &[&Path]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn simulate_size(args: &SimArgs) -> ucpt::Result<()> {
    let cfg = args.resolve()?;
    let scenario = cfg.null_scenario()?;
    let id = cfg.scenario_label()?;
    let method = Method::Jmb { kernel: cfg.kernel_kind() };
    let mut report = size_experiment(&scenario, &id, method)?;
    if args.no_timing {
        report.strip_timing();
    }
    let dir = out_dir(&cfg)?;
    let stem = format!("{}-{}", file_stem(&id), method);
    let (pv, sm, js) = (
        dir.join(format!("{stem}.pvalues.csv")),
        dir.join(format!("{stem}.summary.csv")),
        dir.join(format!("{stem}.json")),
    );
    write_pvalues_csv(&[&report], &pv)?;
    write_summary_csv(&[&report], &sm)?;
    write_json(&report, &js)?;
    print_size(&report);
    wrote(&[&pv, &sm, &js]);
    Ok(())
}

fn simulate_power(args: &SimArgs) -> ucpt::Result<()> {
    let cfg = args.resolve()?;
    let grid = cfg.power_grid()?;
    let id = cfg.scenario_label()?;
    let method = Method::Jmb { kernel: cfg.kernel_kind() };
    let mut report = power_experiment(&grid, &id, method)?;
    if args.no_timing {
        report.strip_timing();
    }
    let dir = out_dir(&cfg)?;
    let stem = format!("{}-{}", file_stem(&id), method);
    let (csv, js) = (
        dir.join(format!("{stem}.power.csv")),
        dir.join(format!("{stem}.power.json")),
    );
    write_power_csv(&report, &csv)?;
    write_json(&report, &js)?;
    println!("{id} {method} alpha={}", report.alpha);
    println!("{:>10} {:>6} {:>8} {:>6}", "theta_max", "m", "rate", "R");
    for pt in &report.grid {
        let m = pt.m.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
        println!("{:>10.4} {:>6} {:>8.4} {:>6}", pt.theta_max, m, pt.rejection_rate, pt.reps);
    }
    if let Some(ms) = report.runtime_ms {
        println!("runtime {ms:.0} ms");
    }
    wrote(&[&csv, &js]);
    Ok(())
}

fn compare(args: &SimArgs) -> ucpt::Result<()> {
    let cfg = args.resolve()?;
    let scenario = cfg.null_scenario()?;
    let id = cfg.scenario_label()?;
    let mut cmp = method_comparison(&scenario, &id, cfg.boundary_value())?;
    if args.no_timing {
        cmp.strip_timing();
    }
    let dir = out_dir(&cfg)?;
    let stem = format!("{}-compare", file_stem(&id));
    let (pv, sm, js) = (
        dir.join(format!("{stem}.pvalues.csv")),
        dir.join(format!("{stem}.summary.csv")),
        dir.join(format!("{stem}.json")),
    );
    write_pvalues_csv(&[&cmp.jmb, &cmp.cusum], &pv)?;
    write_summary_csv(&[&cmp.jmb, &cmp.cusum], &sm)?;
    write_json(&cmp, &js)?;
    print_size(&cmp.jmb);
    print_size(&cmp.cusum);
    wrote(&[&pv, &sm, &js]);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match &cli.command {
        Command::Test(a) => run_test_cmd(a).map(|reject| (reject, a.common.exit_status)),
        Command::Cusum(a) => run_cusum_cmd(a).map(|reject| (reject, a.common.exit_status)),
        Command::SimulateSize(a) => simulate_size(a).map(|_| (false, false)),
        Command::SimulatePower(a) => simulate_power(a).map(|_| (false, false)),
        Command::Compare(a) => compare(a).map(|_| (false, false)),
    };
    match outcome {
        Ok((true, true)) => ExitCode::from(3),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
