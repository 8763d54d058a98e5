//! `partinv` command-line driver: correlation maps, single recoveries and
//! phase-transition sweeps.

mod parse;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;

use partinv::ensembles::{
    block_correlated_ensemble, gaussian_ensemble, haar_filter_operator, wavelet_tree_operator,
    wavelet_tree_problem, SamplingPattern, BLUR_CENTER, BLUR_OFF_CENTER,
};
use partinv::harness::{
    export_grid_with, mean_squared_error, run_grid, EnsembleSpec, ExportFormat, ExportOptions,
    GridSpec, Method, RunOptions, DEFAULT_TREE_COUNTS, SUCCESS_THRESHOLD,
};
use partinv::linalg::correlation_matrix;
use partinv::render::{matrix_csv, matrix_svg};
use partinv::{LRule, SensingOperator, SolveMethod};

#[derive(Parser, Debug)]
#[command(name = "partinv", version, about = "Sparse recovery with partial inversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write |Phi* Phi| for a structured operator as CSV and SVG.
    Corr(CorrArgs),
    /// Generate one seeded problem and recover it.
    Recover(RecoverArgs),
    /// Sweep a phase-transition grid and write one CSV and SVG per method.
    Phase(PhaseArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CorrEnsemble {
    HaarFilter,
    WaveletTree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EnsembleArg {
    Gaussian,
    Block,
    Wavelet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Partinv,
    Cosamp,
    L1,
    PartinvWavelet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Direct,
    Richardson,
}

impl SolverArg {
    fn method(self) -> SolveMethod {
        match self {
            SolverArg::Direct => SolveMethod::Direct,
            SolverArg::Richardson => SolveMethod::richardson(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            SolverArg::Direct => "direct",
            SolverArg::Richardson => "richardson",
        }
    }
}

#[derive(Args, Debug)]
struct OutDir {
    /// Output directory (created if missing).
    #[arg(long, env = "PARTINV_OUT_DIR", default_value = "partinv-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CorrArgs {
    #[arg(long, value_enum)]
    ensemble: CorrEnsemble,
    /// Signal length for the Haar operator (power of two).
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Comma-separated filter taps for the Haar operator.
    #[arg(long, value_parser = parse::kernel, default_value = "0.1,0.2,0.4,0.2,0.1")]
    kernel: std::vec::Vec<f64>,
    /// Sampling pattern for the wavelet operator, in sixteenths.
    #[arg(long, value_parser = parse::ratio, default_value = "8/16")]
    delta: f64,
    /// Custom 4x4 sampling mask for the wavelet operator: 16 comma-separated
    /// bits, row-major. Overrides `--delta`.
    #[arg(long)]
    mask: Option<String>,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    #[arg(long, value_enum, default_value = "partinv")]
    method: MethodArg,
    /// Defaults to `wavelet` for partinv-wavelet and `gaussian` otherwise.
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
    /// Number of columns for the Gaussian and block ensembles.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// M / N, as a decimal or `p/q`.
    #[arg(long, value_parser = parse::ratio, required_unless_present = "mask")]
    delta: Option<f64>,
    /// Custom 4x4 sampling mask for the wavelet ensemble: 16 comma-separated
    /// bits, row-major. Replaces `--delta`.
    #[arg(long)]
    mask: Option<String>,
    /// K / M for the Gaussian and block ensembles.
    #[arg(long)]
    rho: Option<f64>,
    /// Number of active trees for the wavelet ensemble.
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long = "l-rule", value_parser = parse::l_rule, default_value = "k")]
    l_rule: LRule,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "direct")]
    solver: SolverArg,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    #[arg(long, value_enum)]
    ensemble: EnsembleArg,
    /// Defaults to partinv,cosamp,l1 (partinv-wavelet for the wavelet ensemble).
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Vec<MethodArg>,
    /// Defaults to 100 for the wavelet ensemble and 25 otherwise.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "l-rule", value_parser = parse::l_rule, default_value = "k")]
    l_rule: LRule,
    /// Tree counts for the wavelet grid.
    #[arg(long, value_delimiter = ',')]
    trees: Vec<usize>,
    #[arg(long, value_enum, default_value = "direct")]
    solver: SolverArg,
    /// Record mean runtimes in the CSV (makes reruns differ).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    out: OutDir,
}

/// Usage line of the subcommand named on the command line, if any.
fn usage() -> String {
    let mut cmd = Cli::command();
    let sub = std::env::args().nth(1).unwrap_or_default();
    match cmd.find_subcommand_mut(&sub) {
        Some(sub) => sub.render_usage().to_string().replace("Usage: ", "Usage: partinv "),
        None => cmd.render_usage().to_string(),
    }
}

fn usage_error(message: impl std::fmt::Display) -> ! {
    eprintln!("error: {message}\n\n{}", usage());
    std::process::exit(2)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], written: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    written.push(path.display().to_string());
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn sampling_pattern(delta: Option<f64>, mask: Option<&str>) -> SamplingPattern {
    let made = match (mask, delta) {
        (Some(bits), _) => SamplingPattern::from_bits(bits),
        (None, Some(delta)) => SamplingPattern::for_delta(delta),
        (None, None) => usage_error("--delta or --mask is required"),
    };
    made.unwrap_or_else(|e| usage_error(e))
}

fn cmd_corr(args: CorrArgs) -> Result<()> {
    let (phi, name, params) = match args.ensemble {
        CorrEnsemble::HaarFilter => {
            let phi = haar_filter_operator(args.n, &args.kernel, 2).unwrap_or_else(|e| usage_error(e));
            (phi, "haar-filter", json!({ "n": args.n, "kernel": args.kernel, "decimation": 2 }))
        }
        CorrEnsemble::WaveletTree => {
            let pattern = sampling_pattern(Some(args.delta), args.mask.as_deref());
            let op = wavelet_tree_operator(&pattern, BLUR_CENTER, BLUR_OFF_CENTER)?;
            (op.phi, "wavelet-tree", json!({ "pattern": pattern.to_string() }))
        }
    };
    let corr = correlation_matrix(&phi);
    create_dir(&args.out.out)?;
    let mut written = Vec::new();
    write_file(&args.out.out, &format!("corr_{name}.csv"), matrix_csv(&corr).as_bytes(), &mut written)?;
    write_file(&args.out.out, &format!("corr_{name}.svg"), matrix_svg(&corr).as_bytes(), &mut written)?;
    println!(
        "{}",
        json!({
            "command": "corr",
            "ensemble": name,
            "params": params,
            "rows": phi.rows(),
            "cols": phi.cols(),
            "outputs": written,
        })
    );
    Ok(())
}

fn method_for(arg: MethodArg, l_rule: LRule) -> Method {
    match arg {
        MethodArg::Partinv => Method::PartInv(l_rule),
        MethodArg::Cosamp => Method::CoSaMP,
        MethodArg::L1 => Method::L1,
        MethodArg::PartinvWavelet => Method::PartInvWavelet,
    }
}

fn cmd_recover(args: RecoverArgs) -> Result<()> {
    let ensemble = args.ensemble.unwrap_or(match args.method {
        MethodArg::PartinvWavelet => EnsembleArg::Wavelet,
        _ => EnsembleArg::Gaussian,
    });
    let problem = match ensemble {
        EnsembleArg::Wavelet => {
            let trees = args.trees.unwrap_or_else(|| usage_error("--trees is required for the wavelet ensemble"));
            let pattern = sampling_pattern(args.delta, args.mask.as_deref());
            let op = wavelet_tree_operator(&pattern, BLUR_CENTER, BLUR_OFF_CENTER)?;
            if 21 * trees >= op.phi.rows() {
                usage_error(format!("{trees} trees need K = {} < M = {}", 21 * trees, op.phi.rows()));
            }
            wavelet_tree_problem(&op, trees, args.seed).unwrap_or_else(|e| usage_error(e))
        }
        EnsembleArg::Gaussian | EnsembleArg::Block => {
            let rho = args.rho.unwrap_or_else(|| usage_error("--rho is required for this ensemble"));
            if !(rho > 0.0 && rho < 1.0) {
                usage_error(format!("--rho must lie in (0, 1), got {rho}"));
            }
            if args.mask.is_some() {
                usage_error("--mask applies only to the wavelet ensemble");
            }
            let delta = args.delta.unwrap_or_else(|| usage_error("--delta is required for this ensemble"));
            let m = (delta * args.n as f64).round() as usize;
            let k = (rho * m as f64).round() as usize;
            if !(1 <= k && k < m && m <= args.n) {
                usage_error(format!("need 1 <= K < M <= N, got K={k} M={m} N={}", args.n));
            }
            let made = if ensemble == EnsembleArg::Gaussian {
                gaussian_ensemble(m, args.n, k, args.seed)
            } else {
                block_correlated_ensemble(m, args.n, k, args.seed)
            };
            made.unwrap_or_else(|e| usage_error(e))
        }
    };
    if args.method == MethodArg::PartinvWavelet && problem.partition.is_none() {
        usage_error("partinv-wavelet needs the wavelet ensemble");
    }

    let method = method_for(args.method, args.l_rule);
    let k = problem.sparsity;
    let op = SensingOperator::new(problem.phi.clone());
    let result = method
        .run(&op, &problem.y, k, problem.partition.as_ref(), args.solver.method())
        .unwrap_or_else(|e| usage_error(e));
    let mse = mean_squared_error(&problem.c_true, &result.c_hat);
    let max_error = problem
        .c_true
        .iter()
        .zip(&result.c_hat)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let success = mse < SUCCESS_THRESHOLD;

    println!(
        "{}",
        json!({
            "command": "recover",
            "method": method.id(),
            "ensemble": ensemble_name(ensemble),
            "n": problem.cols(),
            "m": problem.rows(),
            "delta": args.delta,
            "mask": args.mask,
            "rho": args.rho,
            "trees": args.trees,
            "seed": args.seed,
            "solver": args.solver.name(),
        })
    );
    println!("K = {k}");
    println!("iterations = {}", result.iterations);
    println!("halt_reason = {}", result.halt_reason);
    println!("mean_squared_error = {mse:.6e}");
    println!("max_abs_error = {max_error:.6e}");
    println!("flagged = {}", result.flagged);
    println!("success = {success}");
    Ok(())
}

fn ensemble_name(e: EnsembleArg) -> &'static str {
    match e {
        EnsembleArg::Gaussian => "gaussian",
        EnsembleArg::Block => "block",
        EnsembleArg::Wavelet => "wavelet",
    }
}

fn cmd_phase(args: PhaseArgs) -> Result<()> {
    let spec = match args.ensemble {
        EnsembleArg::Gaussian => EnsembleSpec::gaussian(),
        EnsembleArg::Block => EnsembleSpec::block(),
        EnsembleArg::Wavelet => EnsembleSpec::Wavelet,
    };
    let wavelet = args.ensemble == EnsembleArg::Wavelet;
    let method_args = if args.methods.is_empty() {
        if wavelet {
            vec![MethodArg::PartinvWavelet]
        } else {
            vec![MethodArg::Partinv, MethodArg::Cosamp, MethodArg::L1]
        }
    } else {
        args.methods.clone()
    };
    if !wavelet && method_args.contains(&MethodArg::PartinvWavelet) {
        usage_error("partinv-wavelet needs the wavelet ensemble");
    }
    let methods: Vec<Method> = method_args.iter().map(|m| method_for(*m, args.l_rule)).collect();
    let trials = args.trials.unwrap_or(if wavelet { 100 } else { 25 });
    if trials == 0 {
        usage_error("--trials must be positive");
    }
    let grid = if wavelet {
        let trees = if args.trees.is_empty() {
            DEFAULT_TREE_COUNTS.to_vec()
        } else {
            args.trees.clone()
        };
        if trees.iter().any(|t| *t == 0) {
            usage_error("tree counts must be positive");
        }
        GridSpec::wavelet(&trees)
    } else {
        if !args.trees.is_empty() {
            usage_error("--trees only applies to the wavelet ensemble");
        }
        GridSpec::standard()
    };

    let grids = run_grid(
        &spec,
        &methods,
        &grid,
        trials,
        args.seed,
        RunOptions {
            solver: args.solver.method(),
        },
    )?;
    create_dir(&args.out.out)?;
    let options = ExportOptions { timing: args.timing };
    let mut written = Vec::new();
    for g in &grids {
        for format in [ExportFormat::Csv, ExportFormat::Svg] {
            let name = format!("{}_{}.{}", g.ensemble, g.method, format.extension());
            write_file(&args.out.out, &name, &export_grid_with(g, format, options), &mut written)?;
        }
    }
    println!(
        "{}",
        json!({
            "command": "phase",
            "ensemble": spec.id(),
            "ensemble_spec": spec,
            "methods": methods.iter().map(Method::id).collect::<Vec<_>>(),
            "trials": trials,
            "seed": args.seed,
            "solver": args.solver.name(),
            "grid": grid,
            "timing": args.timing,
            "outputs": written,
        })
    );
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        if e.exit_code() != 2 {
            e.exit()
        }
        let _ = e.print();
        eprintln!("\n{}", usage());
        std::process::exit(2)
    });
    match cli.command {
        Command::Corr(args) => cmd_corr(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Phase(args) => cmd_phase(args),
    }
}
