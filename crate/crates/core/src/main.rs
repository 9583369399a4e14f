use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phiid::estimator::Estimator;
use phiid::pipeline::{
    self, load_csv, pair_budget, read_pair_file, run_analysis, run_analysis_pairs, write_pair_file,
    write_results, AnalysisConfig, FcField,
};
use phiid::surrogates::SurrogateConfig;
use phiid::sweep::{self, InputKind, SweepConfig};
use phiid::synthetic::{ar_grid, default_grid_levels, trajectory_matrix};
use phiid::system::{make_system_x, make_system_y, read_tpm, DynamicalSystem};
use phiid::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_ORACLE: u8 = 3;

/// Temporal synergy, redundancy and integrated information of multivariate
/// dynamics, and how they respond to disintegration.
#[derive(Parser, Debug)]
#[command(name = "phiid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact table for the toy systems X and Y and their independent twins;
    /// exits with status 3 if any value is off its reference by more than 1e-9.
    Toy {
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random two-element binary systems: change in synergy under
    /// disintegration, closed-form diagnostic and their discrepancy.
    Sweep(SweepArgs),
    /// Pairwise analysis of a CSV recording against circular-shift surrogates.
    Analyze(AnalyzeArgs),
    /// Simulate a toy system, a TPM file, or the synthetic AR grid to CSV.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lower end of the log-uniform Dirichlet concentration range.
    #[arg(long, default_value_t = 0.1)]
    concentration_min: f64,
    #[arg(long, default_value_t = 10.0)]
    concentration_max: f64,
    /// Past-state distribution of each system.
    #[arg(long, value_enum, default_value_t = InputArg::Stationary)]
    input: InputArg,
    /// JSON-lines results; a CSV mirror is written next to it.
    #[arg(long, default_value = "sweep.jsonl")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InputArg {
    Stationary,
    Uniform,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EstimatorArg {
    Gaussian,
    Discrete,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FcArg {
    Mi,
    Pearson,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// CSV with a header row of channel names.
    #[arg(long)]
    input: PathBuf,
    /// JSON-lines results; a CSV mirror is written next to it.
    #[arg(long, default_value = "analysis.jsonl")]
    out: PathBuf,
    /// Number of channel pairs to sample (default: every pair).
    #[arg(long, conflicts_with = "pair_file")]
    pairs: Option<usize>,
    /// Explicit pairs, one `name_a,name_b` per line.
    #[arg(long)]
    pair_file: Option<PathBuf>,
    /// Circular-shift permutations per pair.
    #[arg(long, default_value_t = 100)]
    surrogates: usize,
    /// Seeds pair sampling and surrogate offsets.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Gaussian)]
    estimator: EstimatorArg,
    /// Bins per channel; required with the discrete estimator.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, default_value_t = 1)]
    lag: usize,
    #[arg(long, default_value_t = 1)]
    min_shift: usize,
    /// Largest circular shift (default: T - 1).
    #[arg(long)]
    max_shift: Option<usize>,
    /// Raise the minimum shift to ceil(0.05 T).
    #[arg(long)]
    shift_guard: bool,
    /// Shift both channels instead of only the second.
    #[arg(long)]
    shift_both: bool,
    /// Functional-connectivity column used in the summary correlations.
    #[arg(long, value_enum, default_value_t = FcArg::Mi)]
    fc: FcArg,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// `x`, `y`, `ar-grid`, or the path of a TPM file.
    #[arg(long)]
    system: String,
    /// Number of samples.
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Past-state distribution the trajectory starts from (TPM files).
    #[arg(long, value_enum, default_value_t = InputArg::Uniform)]
    input: InputArg,
    /// Output CSV; `ar-grid` also writes `<out>.pairs`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Toy { out } => cmd_toy(out.as_deref()),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Argument(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            })
        }
    }
}

fn cmd_toy(out: Option<&Path>) -> Result<ExitCode, Error> {
    let rows = sweep::toy_table()?;
    println!(
        "{:<9} {:>8} {:>8} {:>8} {:>8} {:>10} {:>14}",
        "system", "tmi", "phi_wms", "red_mmi", "syn_mmi", "delta_syn", "closed_form"
    );
    for r in &rows {
        let v = r.values();
        println!(
            "{:<9} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>10.4} {:>14.4}",
            r.system, v[0], v[1], v[2], v[3], v[4], v[5]
        );
    }
    if let Some(path) = out {
        sweep::write_toy_csv(path, &rows)?;
    }
    let bad = sweep::toy_mismatches(&rows, 1e-9);
    if bad.is_empty() {
        println!("all values match their references within 1e-9");
        Ok(ExitCode::SUCCESS)
    } else {
        for (sys, col, got, want) in bad {
            eprintln!("mismatch: {sys} {col} = {got}, expected {want}");
        }
        Ok(ExitCode::from(EXIT_ORACLE))
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode, Error> {
    let cfg = SweepConfig {
        count: a.count,
        seed: a.seed,
        concentration_min: a.concentration_min,
        concentration_max: a.concentration_max,
        input: match a.input {
            InputArg::Stationary => InputKind::Stationary,
            InputArg::Uniform => InputKind::Uniform,
        },
        jobs: a.jobs,
    };
    let (records, s) = sweep::run_sweep(&cfg)?;
    sweep::write_sweep(&a.out, &records, &s)?;
    println!("systems                 {}", s.count);
    println!("delta_syn > 0           {}", s.positive);
    println!("delta_syn < 0           {}", s.negative);
    println!("|delta_syn| <= 1e-9     {}", s.zero);
    println!("delta_syn > +0.01       {}", s.above_threshold);
    println!("delta_syn < -0.01       {}", s.below_threshold);
    println!("delta_syn range         [{:.4}, {:.4}]", s.delta_syn.min, s.delta_syn.max);
    println!(
        "closed-form discrepancy median {:.4}, 5-95% [{:.4}, {:.4}], exact in {}",
        s.discrepancy.median, s.discrepancy.p05, s.discrepancy.p95, s.discrepancy_zero
    );
    println!("argmax-unstable systems {}", s.argmax_unstable);
    if s.stationary_warnings > 0 {
        println!("stationary warnings     {}", s.stationary_warnings);
    }
    println!("wrote {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<ExitCode, Error> {
    let estimator = match (a.estimator, a.bins) {
        (EstimatorArg::Gaussian, None) => Estimator::Gaussian,
        (EstimatorArg::Gaussian, Some(_)) => {
            return Err(Error::Argument("--bins only applies to the discrete estimator".into()))
        }
        (EstimatorArg::Discrete, Some(bins)) => Estimator::Discrete { bins },
        (EstimatorArg::Discrete, None) => {
            return Err(Error::Argument("the discrete estimator needs --bins".into()))
        }
    };
    let cfg = AnalysisConfig {
        estimator,
        lag: a.lag,
        surrogates: SurrogateConfig {
            n_permutations: a.surrogates,
            master_seed: a.seed,
            min_shift: a.min_shift,
            max_shift: a.max_shift,
            shift_both: a.shift_both,
            near_identity_guard: a.shift_guard,
        },
        jobs: a.jobs,
        fc: match a.fc {
            FcArg::Mi => FcField::FcMi,
            FcArg::Pearson => FcField::FcPearson,
        },
    };
    let ts = load_csv(&a.input)?;
    let (outcomes, summary) = match (&a.pair_file, a.pairs) {
        (Some(path), _) => run_analysis_pairs(&ts, &read_pair_file(path, &ts)?, &cfg)?,
        (None, Some(k)) => run_analysis(&ts, k, &cfg, a.seed)?,
        (None, None) => run_analysis(&ts, pair_budget(ts.channel_count()), &cfg, a.seed)?,
    };
    write_results(&a.out, &outcomes, &summary)?;
    println!(
        "pairs analysed {}, failed {}, fraction with delta_tmi > 0: {:.4}",
        summary.pair_count, summary.failed_pairs, summary.fraction_tmi_increase
    );
    println!("{:<12} {:<10} {:>9} {:>11}", "x", "y", "r", "p");
    for c in &summary.correlations {
        let fmt = |v: Option<f64>, f: fn(f64) -> String| v.map_or("n/a".into(), f);
        println!(
            "{:<12} {:<10} {:>9} {:>11}",
            c.x,
            c.y,
            fmt(c.r, |r| format!("{r:.4}")),
            fmt(c.p, |p| format!("{p:.3e}"))
        );
    }
    println!(
        "wrote {} and {}",
        a.out.display(),
        pipeline::csv_mirror_path(&a.out).display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(a: SimulateArgs) -> Result<ExitCode, Error> {
    if a.steps == 0 {
        return Err(Error::Argument("--steps must be at least 1".into()));
    }
    if a.system == "ar-grid" {
        let levels = default_grid_levels();
        let (ts, cells) = ar_grid(&levels, &levels, a.steps, a.seed)?;
        pipeline::write_csv(&ts, &a.out)?;
        let mut pairs_path = a.out.clone().into_os_string();
        pairs_path.push(".pairs");
        let pairs: Vec<_> = cells.iter().map(|c| c.pair).collect();
        write_pair_file(Path::new(&pairs_path), &ts, &pairs)?;
        println!(
            "wrote {} ({} channels x {} samples) and {}",
            a.out.display(),
            ts.channel_count(),
            ts.sample_count(),
            Path::new(&pairs_path).display()
        );
        return Ok(ExitCode::SUCCESS);
    }
    let sys = match a.system.as_str() {
        "x" => make_system_x(),
        "y" => make_system_y(),
        path => DynamicalSystem::with_uniform_input(read_tpm(Path::new(path))?)?,
    };
    let sys = match a.input {
        InputArg::Uniform => sys,
        InputArg::Stationary => sys.with_stationary_input()?,
    };
    let ts = trajectory_matrix(&sys, a.steps, a.seed)?;
    pipeline::write_csv(&ts, &a.out)?;
    println!(
        "wrote {} ({} samples of {} elements)",
        a.out.display(),
        ts.sample_count(),
        ts.channel_count()
    );
    Ok(ExitCode::SUCCESS)
}
