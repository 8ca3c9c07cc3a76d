//! Command-line interface to the growth-rate library: reference coupling
//! tables, mean-field solutions, transition thresholds, Monte Carlo and
//! exact-enumeration sweeps, the variational route, and phase-transition
//! curves, rendered as CSV or JSON.
//!
//! Exit status: 0 when every emitted row has status `ok`, 2 when some rows
//! carry a failure marker (overflow, unconverged, failed), 1 on invalid
//! parameters or I/O errors.

mod output;

use clap::{Parser, Subcommand, ValueEnum};
use output::{Cell, Format, Table};
use ougrowth::growth::{explosion_scan, lyapunov_estimate, mc_moments};
use ougrowth::lattice::{density, entropy_per_site, exact_expectation};
use ougrowth::meanfield::{lyapunov_bounds, sigma_threshold, solve_mean_field, transition_beta};
use ougrowth::spectral::{k2_coupling, k_coupling, solve_eigen};
use ougrowth::variational::solve_variational;
use ougrowth::{InitCondition, ScaledParams};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    /// OU driver started in its stationary law.
    Stationary,
    /// OU driver pinned to zero at the first step.
    Zero,
}

impl ModelArg {
    fn init(self) -> InitCondition {
        match self {
            ModelArg::Stationary => InitCondition::Stationary,
            ModelArg::Zero => InitCondition::ZeroStart,
        }
    }

    fn label(self) -> &'static str {
        self.init().label()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CouplingArg {
    /// Mean kernel mass: the lower-bound coupling.
    K,
    /// Largest kernel eigenvalue: the upper-bound coupling.
    Lambda0,
}

impl CouplingArg {
    fn label(self) -> &'static str {
        match self {
            CouplingArg::K => "k",
            CouplingArg::Lambda0 => "lambda0",
        }
    }
}

/// Coupling constant for the chosen bound and model.
fn coupling_value(a: f64, model: InitCondition, choice: CouplingArg) -> Result<f64, String> {
    match choice {
        CouplingArg::K => match model {
            InitCondition::Stationary => k_coupling(a),
            InitCondition::ZeroStart => k2_coupling(a),
        }
        .map_err(|e| e.to_string()),
        CouplingArg::Lambda0 => solve_eigen(a, model)
            .map(|sol| sol.lambda0)
            .map_err(|e| e.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "ougrowth",
    version,
    about = "Growth rate of an OU-driven compounding process: Monte Carlo, exact enumeration, mean-field bounds, and the variational route"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transcendental roots, kernel eigenvalues, and couplings for both models.
    Couplings {
        /// Comma-separated range parameters `a` (empty for header-only output).
        #[arg(long, default_value = "0.1,0.5,1.0,2.0,3.0")]
        a: String,
    },
    /// Mean-field stationary densities and growth rate over an inverse-temperature list.
    Meanfield {
        #[arg(long, default_value_t = 0.025)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Comma-separated beta values; when the exact transition beta falls inside
        /// the listed span it is inserted as an extra row (phase `coexistence`).
        #[arg(long, default_value = "9.0,9.9,10.0,10.03,10.1,10.2,11.0")]
        betas: String,
        #[arg(long, value_enum, default_value_t = ModelArg::Stationary)]
        model: ModelArg,
        /// Which coupling constant drives the scalar problem.
        #[arg(long, value_enum, default_value_t = CouplingArg::K)]
        coupling: CouplingArg,
    },
    /// Transition temperatures and threshold noise amplitudes per mean reversion.
    Thresholds {
        #[arg(long, default_value_t = 0.025)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Number of compounding periods.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Comma-separated mean-reversion rates (empty for header-only output).
        #[arg(long, default_value = "0.01,0.05,0.1,0.2,0.3,0.4,0.5,1.0")]
        gammas: String,
        /// Also detect the explosion sigma by Monte Carlo scan (adds a sigma_exp column).
        #[arg(long)]
        with_mc: bool,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Detection threshold as a multiple of the noise-free terminal value.
        #[arg(long, default_value_t = 10.0)]
        threshold_factor: f64,
        #[arg(long, value_enum, default_value_t = ModelArg::Stationary)]
        model: ModelArg,
    },
    /// Monte Carlo moments of the terminal value over a noise-amplitude sweep.
    Mc {
        #[arg(long, default_value_t = 0.025)]
        rho: f64,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 0.01)]
        tau: f64,
        /// Number of compounding periods (the terminal value is a product of n factors).
        #[arg(long, default_value_t = 99)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated noise amplitudes (empty for header-only output).
        #[arg(
            long,
            default_value = "0.01,0.05,0.10,0.15,0.20,0.25,0.30,0.35,0.40,0.45,0.50"
        )]
        sigmas: String,
        #[arg(long, value_enum, default_value_t = ModelArg::Stationary)]
        model: ModelArg,
    },
    /// Exact enumeration of the expectation, density, and entropy for small n.
    Exact {
        #[arg(long, default_value_t = 0.025)]
        rho: f64,
        #[arg(long, default_value_t = 0.15)]
        sigma: f64,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Comma-separated period counts, each at most 24 (empty for header-only output).
        #[arg(long, default_value = "2,4,8,10")]
        n: String,
        #[arg(long, value_enum, default_value_t = ModelArg::Stationary)]
        model: ModelArg,
    },
    /// Variational density profile, growth rate, and mean-field bounds.
    Variational {
        #[arg(long, default_value_t = 0.025)]
        rho: f64,
        #[arg(long, default_value_t = 5.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, value_enum, default_value_t = ModelArg::Stationary)]
        model: ModelArg,
        #[arg(long, default_value_t = 512)]
        grid_m: usize,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 0.8)]
        damping: f64,
    },
    /// Gas-liquid transition curves (rho, T) for both couplings.
    PhaseCurve {
        /// Comma-separated range parameters (empty for header-only output).
        #[arg(long, default_value = "0.5,1.0,2.0")]
        a: String,
        /// Comma-separated fugacities; rows with rho above e^-2 fail individually.
        #[arg(
            long,
            default_value = "0.002,0.003,0.005,0.008,0.012,0.02,0.03,0.05,0.08,0.1,0.12,0.13"
        )]
        rhos: String,
        #[arg(long, value_enum, default_value_t = ModelArg::Stationary)]
        model: ModelArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let table = match &cli.command {
        Command::Couplings { a } => {
            let a_list = parse_list(a, "a")?;
            require_positive(&a_list, "a")?;
            cmd_couplings(&a_list)
        }
        Command::Meanfield {
            rho,
            a,
            betas,
            model,
            coupling,
        } => cmd_meanfield(*rho, *a, &parse_list(betas, "betas")?, *model, *coupling)?,
        Command::Thresholds {
            rho,
            tau,
            n,
            gammas,
            with_mc,
            paths,
            seed,
            threshold_factor,
            model,
        } => cmd_thresholds(
            *rho,
            *tau,
            *n,
            &parse_list(gammas, "gammas")?,
            *with_mc,
            *paths,
            *seed,
            *threshold_factor,
            *model,
        )?,
        Command::Mc {
            rho,
            gamma,
            tau,
            n,
            paths,
            seed,
            sigmas,
            model,
        } => cmd_mc(
            *rho,
            *gamma,
            *tau,
            *n,
            *paths,
            *seed,
            &parse_list(sigmas, "sigmas")?,
            *model,
        )?,
        Command::Exact {
            rho,
            sigma,
            gamma,
            tau,
            n,
            model,
        } => cmd_exact(
            *rho,
            *sigma,
            *gamma,
            *tau,
            &parse_usize_list(n, "n")?,
            *model,
        )?,
        Command::Variational {
            rho,
            beta,
            a,
            model,
            grid_m,
            max_iter,
            damping,
        } => cmd_variational(*rho, *beta, *a, *model, *grid_m, *max_iter, *damping)?,
        Command::PhaseCurve { a, rhos, model } => {
            let a_list = parse_list(a, "a")?;
            require_positive(&a_list, "a")?;
            cmd_phase_curve(&a_list, &parse_list(rhos, "rhos")?, *model)?
        }
    };
    let rendered = table.render(cli.format);
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| format!("writing {}: {e}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(table.exit_code())
}

/// Comma-separated float list; empty string (or only separators) is the
/// empty list, for header-only output.
fn parse_list(text: &str, flag: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| format!("--{flag}: `{tok}` is not a number"))
        })
        .collect()
}

fn require_positive(list: &[f64], flag: &str) -> Result<(), String> {
    match list.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        Some(bad) => Err(format!("--{flag}: values must be positive, got {bad}")),
        None => Ok(()),
    }
}

fn parse_usize_list(text: &str, flag: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| format!("--{flag}: `{tok}` is not a nonnegative integer"))
        })
        .collect()
}

fn list_value(list: &[f64]) -> Value {
    json!(list)
}

const NAN_ROW: Cell = Cell::Float(f64::NAN);

fn cmd_couplings(a_list: &[f64]) -> Table {
    let mut table = Table {
        command: "couplings",
        columns: vec!["a", "y0", "lambda0", "k", "y0_2", "lambda0_2", "k2", "status"],
        rows: Vec::new(),
        parameters: vec![("a", list_value(a_list))],
    };
    for &a in a_list {
        let solved = (|| -> Result<[f64; 6], String> {
            let st = solve_eigen(a, InitCondition::Stationary).map_err(|e| e.to_string())?;
            let ze = solve_eigen(a, InitCondition::ZeroStart).map_err(|e| e.to_string())?;
            let k = k_coupling(a).map_err(|e| e.to_string())?;
            let k2 = k2_coupling(a).map_err(|e| e.to_string())?;
            Ok([st.y0, st.lambda0, k, ze.y0, ze.lambda0, k2])
        })();
        match solved {
            Ok(vals) => {
                let mut row = vec![Cell::Float(a)];
                row.extend(vals.iter().map(|&v| Cell::Float(v)));
                row.push(Cell::Text("ok"));
                table.push(row);
            }
            Err(_) => {
                let mut row = vec![Cell::Float(a)];
                row.extend(std::iter::repeat_n(NAN_ROW, 6));
                row.push(Cell::Text("failed"));
                table.push(row);
            }
        }
    }
    table
}

fn cmd_meanfield(
    rho: f64,
    a: f64,
    betas: &[f64],
    model: ModelArg,
    coupling: CouplingArg,
) -> Result<Table, String> {
    let k = coupling_value(a, model.init(), coupling)?;
    let mut grid = betas.to_vec();
    // Mark the exact transition when it falls inside the requested span.
    if let (Some(&lo), Some(&hi)) = (
        grid.iter().min_by(|x, y| x.total_cmp(y)),
        grid.iter().max_by(|x, y| x.total_cmp(y)),
    ) {
        if let Ok(beta_cr) = transition_beta(rho, k) {
            let listed = grid.iter().any(|&b| (b - beta_cr).abs() < 1e-12);
            if !listed && lo < beta_cr && beta_cr < hi {
                let at = grid.partition_point(|&b| b < beta_cr);
                grid.insert(at, beta_cr);
            }
        }
    }
    let mut table = Table {
        command: "meanfield",
        columns: vec!["beta", "x1", "x2", "lambda_vdw", "phase", "status"],
        rows: Vec::new(),
        parameters: vec![
            ("rho", json!(rho)),
            ("a", json!(a)),
            ("betas", list_value(betas)),
            ("model", json!(model.label())),
            ("coupling", json!(coupling.label())),
            ("coupling_value", json!(k)),
        ],
    };
    for &beta in &grid {
        let point = solve_mean_field(rho, beta, k).map_err(|e| e.to_string())?;
        table.push(vec![
            Cell::Float(beta),
            Cell::Float(point.x1.unwrap_or(f64::NAN)),
            Cell::Float(point.x2.unwrap_or(f64::NAN)),
            Cell::Float(point.lambda_vdw),
            Cell::Text(point.phase.label()),
            Cell::Text("ok"),
        ]);
    }
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn cmd_thresholds(
    rho: f64,
    tau: f64,
    n: usize,
    gammas: &[f64],
    with_mc: bool,
    paths: usize,
    seed: u64,
    threshold_factor: f64,
    model: ModelArg,
) -> Result<Table, String> {
    let mut columns = vec![
        "gamma",
        "a",
        "t_cr_low",
        "t_cr_hi",
        "sigma_cr_low",
        "sigma_cr_hi",
    ];
    if with_mc {
        columns.push("sigma_exp");
    }
    columns.push("status");
    let mut table = Table {
        command: "thresholds",
        columns,
        rows: Vec::new(),
        parameters: vec![
            ("rho", json!(rho)),
            ("tau", json!(tau)),
            ("n", json!(n)),
            ("gammas", list_value(gammas)),
            ("with_mc", json!(with_mc)),
            ("paths", json!(paths)),
            ("seed", json!(seed)),
            ("threshold_factor", json!(threshold_factor)),
            ("model", json!(model.label())),
        ],
    };
    for &gamma in gammas {
        let a = gamma * tau * n as f64;
        let init = model.init();
        let k_low = match init {
            InitCondition::Stationary => k_coupling(a),
            InitCondition::ZeroStart => k2_coupling(a),
        }
        .map_err(|e| e.to_string())?;
        let k_high = solve_eigen(a, init).map_err(|e| e.to_string())?.lambda0;
        let beta_low = transition_beta(rho, k_low).map_err(|e| e.to_string())?;
        let beta_hi = transition_beta(rho, k_high).map_err(|e| e.to_string())?;
        let sigma_low = sigma_threshold(beta_low, n, tau);
        let mut row = vec![
            Cell::Float(gamma),
            Cell::Float(a),
            Cell::Float(1.0 / beta_low),
            Cell::Float(1.0 / beta_hi),
            Cell::Float(sigma_low),
            Cell::Float(sigma_threshold(beta_hi, n, tau)),
        ];
        if with_mc {
            // Geometric grid bracketing the predicted threshold from below;
            // detections past 2.6x the prediction read as "none".
            let lo = 0.9 * sigma_low;
            let ratio = (2.6f64 / 0.9).powf(1.0 / 15.0);
            let grid: Vec<f64> = (0..16).map(|i| lo * ratio.powi(i)).collect();
            let params =
                ScaledParams::new(rho, grid[0], gamma, tau, n).map_err(|e| e.to_string())?;
            let scan = explosion_scan(&params, init, &grid, paths, seed, threshold_factor)
                .map_err(|e| e.to_string())?;
            row.push(Cell::Float(scan.sigma_exp.unwrap_or(f64::NAN)));
        }
        row.push(Cell::Text("ok"));
        table.push(row);
    }
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc(
    rho: f64,
    gamma: f64,
    tau: f64,
    n: usize,
    paths: usize,
    seed: u64,
    sigmas: &[f64],
    model: ModelArg,
) -> Result<Table, String> {
    let mut table = Table {
        command: "mc",
        columns: vec![
            "sigma", "beta", "mean", "variance", "stderr", "lambda_n", "status",
        ],
        rows: Vec::new(),
        parameters: vec![
            ("rho", json!(rho)),
            ("gamma", json!(gamma)),
            ("tau", json!(tau)),
            ("n", json!(n)),
            ("paths", json!(paths)),
            ("seed", json!(seed)),
            ("sigmas", list_value(sigmas)),
            ("model", json!(model.label())),
        ],
    };
    for &sigma in sigmas {
        let params = ScaledParams::new(rho, sigma, gamma, tau, n).map_err(|e| e.to_string())?;
        let est = mc_moments(&params, model.init(), paths, seed).map_err(|e| e.to_string())?;
        let (lambda, status) = if est.mean.is_finite() {
            (
                lyapunov_estimate(&est, n).map_err(|e| e.to_string())?,
                "ok",
            )
        } else {
            (f64::INFINITY, "overflow")
        };
        table.push(vec![
            Cell::Float(sigma),
            Cell::Float(params.beta()),
            Cell::Float(est.mean),
            Cell::Float(est.variance),
            Cell::Float(est.stderr),
            Cell::Float(lambda),
            Cell::Text(status),
        ]);
    }
    Ok(table)
}

fn cmd_exact(
    rho: f64,
    sigma: f64,
    gamma: f64,
    tau: f64,
    n_list: &[usize],
    model: ModelArg,
) -> Result<Table, String> {
    let mut table = Table {
        command: "exact",
        columns: vec![
            "n", "m_n", "log_m_n", "lambda_n", "density", "entropy", "status",
        ],
        rows: Vec::new(),
        parameters: vec![
            ("rho", json!(rho)),
            ("sigma", json!(sigma)),
            ("gamma", json!(gamma)),
            ("tau", json!(tau)),
            ("n", json!(n_list)),
            ("model", json!(model.label())),
        ],
    };
    for &n in n_list {
        let params = ScaledParams::new(rho, sigma, gamma, tau, n).map_err(|e| e.to_string())?;
        let init = model.init();
        let part = exact_expectation(&params, init).map_err(|e| e.to_string())?;
        let d = density(&params, init).map_err(|e| e.to_string())?;
        let s = entropy_per_site(&params, init).map_err(|e| e.to_string())?;
        table.push(vec![
            Cell::Int(n as u64),
            Cell::Float(part.log_m_n.exp()),
            Cell::Float(part.log_m_n),
            Cell::Float(part.log_m_n / n as f64),
            Cell::Float(d),
            Cell::Float(s),
            Cell::Text("ok"),
        ]);
    }
    Ok(table)
}

fn cmd_variational(
    rho: f64,
    beta: f64,
    a: f64,
    model: ModelArg,
    grid_m: usize,
    max_iter: usize,
    damping: f64,
) -> Result<Table, String> {
    let init = model.init();
    let result = solve_variational(rho, beta, a, init, grid_m, max_iter, damping)
        .map_err(|e| e.to_string())?;
    let bounds = lyapunov_bounds(rho, beta, a, init).map_err(|e| e.to_string())?;
    let status = if result.converged { "ok" } else { "unconverged" };
    let mut table = Table {
        command: "variational",
        columns: vec![
            "x",
            "f",
            "lambda",
            "lower",
            "upper",
            "iterations",
            "converged",
            "residual",
            "near_coexistence",
            "status",
        ],
        rows: Vec::new(),
        parameters: vec![
            ("rho", json!(rho)),
            ("beta", json!(beta)),
            ("a", json!(a)),
            ("model", json!(model.label())),
            ("grid_m", json!(grid_m)),
            ("max_iter", json!(max_iter)),
            ("damping", json!(damping)),
        ],
    };
    let m = result.profile.m();
    for (i, &f) in result.profile.values.iter().enumerate() {
        table.push(vec![
            Cell::Float((i as f64 + 0.5) / m as f64),
            Cell::Float(f),
            Cell::Float(result.lambda_value),
            Cell::Float(bounds.lower),
            Cell::Float(bounds.upper),
            Cell::Int(result.iterations as u64),
            Cell::bool(result.converged),
            Cell::Float(result.residual),
            Cell::bool(result.near_coexistence),
            Cell::Text(status),
        ]);
    }
    Ok(table)
}

fn cmd_phase_curve(a_list: &[f64], rhos: &[f64], model: ModelArg) -> Result<Table, String> {
    let mut table = Table {
        command: "phase-curve",
        columns: vec!["a", "coupling", "rho", "beta_cr", "t_cr", "status"],
        rows: Vec::new(),
        parameters: vec![
            ("a", list_value(a_list)),
            ("rhos", list_value(rhos)),
            ("model", json!(model.label())),
        ],
    };
    for &a in a_list {
        for choice in [CouplingArg::K, CouplingArg::Lambda0] {
            let k = coupling_value(a, model.init(), choice)?;
            for &rho in rhos {
                match transition_beta(rho, k) {
                    Ok(beta_cr) => table.push(vec![
                        Cell::Float(a),
                        Cell::Text(choice.label()),
                        Cell::Float(rho),
                        Cell::Float(beta_cr),
                        Cell::Float(1.0 / beta_cr),
                        Cell::Text("ok"),
                    ]),
                    Err(_) => table.push(vec![
                        Cell::Float(a),
                        Cell::Text(choice.label()),
                        Cell::Float(rho),
                        NAN_ROW,
                        NAN_ROW,
                        Cell::Text("failed"),
                    ]),
                }
            }
        }
    }
    Ok(table)
}
