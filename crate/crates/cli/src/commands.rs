//! The four subcommands and their machine-readable reports.
//!
//! Every report embeds the effective configuration and a grid summary;
//! numeric fields serialize through the shortest-roundtrip float form, and
//! all maps are ordered, so identical runs produce byte-identical JSON.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use rarepde::{
    crude_mc, importance_sampling, prefactor_c1, solve_kkt, tail_probability, AsymptoticParams,
    Error as CoreError, Grid, KktSolution, McMethod, McRun, OptimizerOptions, Problem,
    TailEstimate,
};

use crate::config::{MethodChoice, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
struct GridBlock {
    dim: usize,
    n: Vec<usize>,
    bounds: Vec<[f64; 2]>,
    h: Vec<f64>,
    num_nodes: usize,
}

fn grid_block(grid: &Grid) -> GridBlock {
    let dim = grid.dim();
    GridBlock {
        dim,
        n: (0..dim).map(|a| grid.n(a)).collect(),
        bounds: (0..dim)
            .map(|a| {
                let (lo, hi) = grid.bounds(a);
                [lo, hi]
            })
            .collect(),
        h: (0..dim).map(|a| grid.h(a)).collect(),
        num_nodes: grid.num_nodes(),
    }
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    #[serde(rename = "G_at_0")]
    g_at_0: f64,
    #[serde(rename = "K_of_Gprime0")]
    k_of_gprime0: f64,
    c1: f64,
}

#[derive(Debug, Serialize)]
struct SolveReport {
    command: &'static str,
    effective_config: BTreeMap<String, String>,
    grid: GridBlock,
    summary: SolveSummary,
    fields_written: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ResidualBlock {
    constraint: f64,
    fixed_point: f64,
}

#[derive(Debug, Serialize)]
struct SolutionBlock {
    k_star: f64,
    lambda_star: f64,
    residuals: ResidualBlock,
    iterations: usize,
    trust_region_ok: bool,
    holder_norm_xi: f64,
    trust_radius: f64,
    contraction_estimate: Option<f64>,
    delta_trace: Vec<f64>,
}

impl SolutionBlock {
    fn from_solution(sol: &KktSolution) -> SolutionBlock {
        SolutionBlock {
            k_star: sol.k_star,
            lambda_star: sol.lambda_star,
            residuals: ResidualBlock {
                constraint: sol.constraint_residual,
                fixed_point: sol.fixed_point_residual,
            },
            iterations: sol.outer_iterations,
            trust_region_ok: sol.trust_region_ok,
            holder_norm_xi: sol.holder_norm_xi,
            trust_radius: sol.trust_radius,
            contraction_estimate: sol.contraction_estimate,
            delta_trace: sol.delta_trace.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct OptimizeReport {
    command: &'static str,
    effective_config: BTreeMap<String, String>,
    grid: GridBlock,
    solution: SolutionBlock,
    fields_written: Vec<String>,
}

#[derive(Debug, Serialize)]
struct AsymptoticBlock {
    sigma: f64,
    alpha: f64,
    kappa: f64,
    b: f64,
    k_star: f64,
    c1: f64,
    log_probability: f64,
    probability: f64,
    trust_region_ok: bool,
    jitter: f64,
}

impl AsymptoticBlock {
    fn from_estimate(est: &TailEstimate) -> AsymptoticBlock {
        AsymptoticBlock {
            sigma: est.sigma,
            alpha: est.alpha,
            kappa: est.kappa,
            b: est.b,
            k_star: est.k_star,
            c1: est.c1,
            log_probability: est.log_probability,
            probability: est.probability,
            trust_region_ok: est.trust_region_ok,
            jitter: est.jitter,
        }
    }
}

#[derive(Debug, Serialize)]
struct McBlock {
    method: &'static str,
    mean: f64,
    std_error: f64,
    hits: usize,
    n: usize,
    ess: f64,
    log_weight_spread: f64,
    ess_warning: bool,
}

impl McBlock {
    fn from_run(run: &McRun) -> McBlock {
        let est = &run.estimate;
        McBlock {
            method: match est.method {
                McMethod::Crude => "crude",
                McMethod::Importance => "importance",
            },
            mean: est.mean,
            std_error: est.std_error,
            hits: est.hits,
            n: est.n,
            ess: est.ess,
            log_weight_spread: est.log_weight_spread,
            ess_warning: est.ess_warning,
        }
    }
}

#[derive(Debug, Serialize)]
struct EstimateBody {
    kkt: SolutionBlock,
    asymptotic: AsymptoticBlock,
    mc: Vec<McBlock>,
    /// Per-method `mc.mean / asymptotic.probability`; null when the
    /// asymptotic probability underflows.
    ratio: BTreeMap<&'static str, Option<f64>>,
}

#[derive(Debug, Serialize)]
struct EstimateReport {
    command: &'static str,
    effective_config: BTreeMap<String, String>,
    grid: GridBlock,
    #[serde(flatten)]
    body: EstimateBody,
    samples_written: Vec<String>,
}

#[derive(Debug, Serialize)]
struct SweepRun {
    sigma: f64,
    seed: u64,
    #[serde(flatten)]
    body: EstimateBody,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    command: &'static str,
    effective_config: BTreeMap<String, String>,
    grid: GridBlock,
    runs: Vec<SweepRun>,
}

/// Iteration trace emitted when the optimizer fails to converge, so a failed
/// run still leaves a machine-readable diagnosis behind.
#[derive(Debug, Serialize)]
struct ErrorReport {
    command: &'static str,
    effective_config: BTreeMap<String, String>,
    error: ErrorBlock,
}

#[derive(Debug, Serialize)]
struct ErrorBlock {
    kind: &'static str,
    message: String,
    iterations: Option<usize>,
    last_step: Option<f64>,
    contraction_estimate: Option<f64>,
    delta_trace: Vec<f64>,
}

/// What a finished command hands back to `main`.
#[derive(Debug)]
pub struct CommandOutput {
    /// Rendered JSON report (exactly what was written to disk).
    pub json: String,
    /// Path of the report file.
    pub report_path: PathBuf,
}

fn params_for(config: &RunConfig, sigma: f64) -> Result<AsymptoticParams> {
    AsymptoticParams::new(sigma, config.alpha, config.kappa, config.epsilon).map_err(Into::into)
}

fn optimizer_options(config: &RunConfig) -> OptimizerOptions {
    OptimizerOptions {
        tol_lambda: config.tol_lambda,
        tol_xi: config.tol_xi,
        max_outer: config.max_outer,
        ..OptimizerOptions::default()
    }
}

fn render(report: &impl Serialize) -> Result<String> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    Ok(json)
}

fn write_report(dir: &Path, name: &str, json: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, json)?;
    Ok(path)
}

fn write_field_csv(
    dir: &Path,
    name: &str,
    grid: &Grid,
    field: &rarepde::ScalarField,
    written: &mut Vec<String>,
) -> Result<()> {
    let csv = field.to_csv(grid)?;
    fs::write(dir.join(name), csv)?;
    written.push(name.to_string());
    Ok(())
}

/// Deterministic solve at `w = 0`: baseline PDE fields and the prefactor.
pub fn cmd_solve(config: &RunConfig) -> Result<CommandOutput> {
    config.require_positive_kappa("solve")?;
    let problem = config.build_problem()?;
    let c1 = prefactor_c1(problem.k0(), config.kappa)?;
    let dir = PathBuf::from(&config.out_dir);
    fs::create_dir_all(&dir)?;

    let mut fields_written = Vec::new();
    if config.emit_fields {
        let grid = problem.grid();
        if let Some(u0) = problem.u0() {
            write_field_csv(&dir, "u0.csv", grid, u0, &mut fields_written)?;
        }
        if let Some(g0) = problem.g0() {
            write_field_csv(&dir, "g0.csv", grid, g0, &mut fields_written)?;
        }
        write_field_csv(
            &dir,
            "gprime0.csv",
            grid,
            problem.gprime0(),
            &mut fields_written,
        )?;
    }

    let report = SolveReport {
        command: "solve",
        effective_config: config.effective_map(),
        grid: grid_block(problem.grid()),
        summary: SolveSummary {
            g_at_0: problem.g_at_0(),
            k_of_gprime0: problem.k0(),
            c1,
        },
        fields_written,
    };
    let json = render(&report)?;
    let report_path = write_report(&dir, "solve.json", &json)?;
    Ok(CommandOutput { json, report_path })
}

/// Runs the constrained minimizer and reports the solution diagnostics.
/// On non-convergence an error report with the iteration trace is written
/// before the failure propagates.
pub fn cmd_optimize(config: &RunConfig) -> Result<CommandOutput> {
    let problem = config.build_problem()?;
    let params = params_for(config, config.sigma)?;
    let options = optimizer_options(config);
    let dir = PathBuf::from(&config.out_dir);

    let solution = match solve_kkt(&problem, &params, &options) {
        Ok(solution) => solution,
        Err(err) => {
            write_optimizer_failure(config, &dir, "optimize", &err)?;
            return Err(err.into());
        }
    };

    let mut fields_written = Vec::new();
    if config.emit_fields {
        fs::create_dir_all(&dir)?;
        write_field_csv(
            &dir,
            "xi_star.csv",
            problem.grid(),
            &solution.xi_star,
            &mut fields_written,
        )?;
    }

    let report = OptimizeReport {
        command: "optimize",
        effective_config: config.effective_map(),
        grid: grid_block(problem.grid()),
        solution: SolutionBlock::from_solution(&solution),
        fields_written,
    };
    let json = render(&report)?;
    let report_path = write_report(&dir, "optimize.json", &json)?;
    Ok(CommandOutput { json, report_path })
}

fn write_optimizer_failure(
    config: &RunConfig,
    dir: &Path,
    command: &'static str,
    err: &CoreError,
) -> Result<()> {
    let block = match err {
        CoreError::OuterNonConvergence {
            iterations,
            last_step,
            contraction,
            trace,
        } => ErrorBlock {
            kind: "outer_nonconvergence",
            message: err.to_string(),
            iterations: Some(*iterations),
            last_step: finite_or_none(*last_step),
            contraction_estimate: contraction.and_then(finite_or_none),
            delta_trace: trace.clone(),
        },
        CoreError::MultiplierNonConvergence {
            iterations,
            last_residual,
            contraction,
        } => ErrorBlock {
            kind: "multiplier_nonconvergence",
            message: err.to_string(),
            iterations: Some(*iterations),
            last_step: finite_or_none(*last_residual),
            contraction_estimate: contraction.and_then(finite_or_none),
            delta_trace: Vec::new(),
        },
        _ => return Ok(()),
    };
    let report = ErrorReport {
        command,
        effective_config: config.effective_map(),
        error: block,
    };
    let json = render(&report)?;
    write_report(dir, &format!("{command}.json"), &json)?;
    Ok(())
}

fn finite_or_none(value: f64) -> Option<f64> {
    value.is_finite().then_some(value)
}

/// One full estimate at a given sigma: optimizer, tail formula, Monte Carlo.
fn estimate_body(
    config: &RunConfig,
    problem: &Problem,
    sigma: f64,
    seed: u64,
) -> Result<(EstimateBody, Vec<McRun>)> {
    let params = params_for(config, sigma)?;
    let options = optimizer_options(config);
    let solution = solve_kkt(problem, &params, &options)?;
    let tail = tail_probability(problem, &params, &solution)?;

    let mc_config = rarepde::McConfig {
        n: config.mc_n,
        seed,
        workers: config.workers,
    };
    let mut runs = Vec::new();
    match config.method {
        MethodChoice::Crude => runs.push(crude_mc(problem, &params, &mc_config)?),
        MethodChoice::Importance => runs.push(importance_sampling(
            problem,
            &params,
            &solution.xi_star,
            &mc_config,
        )?),
        MethodChoice::Both => {
            runs.push(crude_mc(problem, &params, &mc_config)?);
            runs.push(importance_sampling(
                problem,
                &params,
                &solution.xi_star,
                &mc_config,
            )?);
        }
    }

    let mut ratio = BTreeMap::new();
    let mut mc_blocks = Vec::new();
    for run in &runs {
        let block = McBlock::from_run(run);
        let value = run.estimate.mean / tail.probability;
        ratio.insert(block.method, finite_or_none(value));
        mc_blocks.push(block);
    }

    Ok((
        EstimateBody {
            kkt: SolutionBlock::from_solution(&solution),
            asymptotic: AsymptoticBlock::from_estimate(&tail),
            mc: mc_blocks,
            ratio,
        },
        runs,
    ))
}

fn samples_csv(run: &McRun) -> String {
    let mut out = String::from("index,g_value,hit,log_weight\n");
    for s in &run.samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.index,
            s.g_value,
            u8::from(s.hit),
            s.log_weight
        ));
    }
    out
}

/// Asymptotic tail probability cross-validated against Monte Carlo.
pub fn cmd_estimate(config: &RunConfig) -> Result<CommandOutput> {
    config.require_positive_kappa("estimate")?;
    let problem = config.build_problem()?;
    let dir = PathBuf::from(&config.out_dir);

    let (body, runs) = match estimate_body(config, &problem, config.sigma, config.seed) {
        Ok(result) => result,
        Err(CliError::Core(err)) => {
            write_optimizer_failure(config, &dir, "estimate", &err)?;
            return Err(err.into());
        }
        Err(other) => return Err(other),
    };

    let mut samples_written = Vec::new();
    if config.emit_samples {
        fs::create_dir_all(&dir)?;
        for run in &runs {
            let name = match run.estimate.method {
                McMethod::Crude => "samples_crude.csv",
                McMethod::Importance => "samples_importance.csv",
            };
            fs::write(dir.join(name), samples_csv(run))?;
            samples_written.push(name.to_string());
        }
    }

    let report = EstimateReport {
        command: "estimate",
        effective_config: config.effective_map(),
        grid: grid_block(problem.grid()),
        body,
        samples_written,
    };
    let json = render(&report)?;
    let report_path = write_report(&dir, "estimate.json", &json)?;
    Ok(CommandOutput { json, report_path })
}

/// Repeats `estimate` across `sweep.sigmas`; run `i` uses seed `mc.seed + i`
/// so records are independent but individually reproducible.
pub fn cmd_sweep(config: &RunConfig) -> Result<CommandOutput> {
    config.require_positive_kappa("sweep")?;
    let sigmas = config
        .sweep_sigmas
        .clone()
        .ok_or_else(|| CliError::config("sweep.sigmas", "required for the sweep command"))?;
    let problem = config.build_problem()?;
    let dir = PathBuf::from(&config.out_dir);

    let mut sweep_runs = Vec::new();
    for (index, &sigma) in sigmas.iter().enumerate() {
        let seed = config.seed + index as u64;
        let (body, _) = match estimate_body(config, &problem, sigma, seed) {
            Ok(result) => result,
            Err(CliError::Core(err)) => {
                write_optimizer_failure(config, &dir, "sweep", &err)?;
                return Err(err.into());
            }
            Err(other) => return Err(other),
        };
        sweep_runs.push(SweepRun { sigma, seed, body });
    }

    let report = SweepReport {
        command: "sweep",
        effective_config: config.effective_map(),
        grid: grid_block(problem.grid()),
        runs: sweep_runs,
    };
    let json = render(&report)?;
    let report_path = write_report(&dir, "sweep.json", &json)?;
    Ok(CommandOutput { json, report_path })
}
