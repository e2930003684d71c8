//! `tailwalk`: stationary states, scattering, and circuit decompositions of
//! Szegedy walks on tailed graphs.
//!
//! Exit codes: 0 pass, 1 numerical failure, 2 parse/validation error,
//! 3 regime mismatch (e.g. `circuit` on a non-reversible kernel).

mod report;
mod specfile;

use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tailwalk_core::check::run_battery;
use tailwalk_core::circuit::{
    boundary_injections, current_from_wavefunction, decompose_mu, solve_circuit, verify_kirchhoff,
    KIRCHHOFF_TOL,
};
use tailwalk_core::dynamics::{
    format_complex_matrix, stationary_state, DynamicsError, InducedSystem, Method, SolverOptions,
    FIXED_POINT_TOL,
};
use tailwalk_core::graph::cycle_basis;
use tailwalk_core::kernel::find_reversible_measure;
use tailwalk_core::models::{
    closed_form_nonreversible, closed_form_reversible, divergence_scan, make_c3pk, C3PkSpec,
};
use tailwalk_core::scalar::inf_norm_diff;
use tailwalk_core::scattering::{verify_scattering, Regime, ScatteringError};
use tailwalk_core::Complex64;

use report::{fmt_f, regime_name};
use specfile::{parse_method, Instance, ProbValue, RunSpec, SpecError};

#[derive(Parser)]
#[command(name = "tailwalk", version, about = "Szegedy walks on graphs with tails")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Override the solver method: iterate | solve | both
    #[arg(long)]
    method: Option<String>,
    /// Override the iteration convergence tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Override the iteration budget
    #[arg(long)]
    n_max: Option<usize>,
}

#[derive(Args, Clone)]
struct OutArg {
    /// Write the report to a file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the stationary state of a spec file
    Stationary {
        spec: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArg,
        /// Also export the dense internal evolution matrix (`re,im` pairs)
        #[arg(long)]
        dump_epon: Option<PathBuf>,
    },
    /// Compare measured against predicted scattering
    Scatter {
        spec: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Solve the electric circuit and the power decomposition (reversible only)
    Circuit {
        spec: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Triangle-with-path benchmark family: golden comparison or mass scan
    C3pk {
        /// Clockwise probability (decimal or fraction like 1/3)
        #[arg(long)]
        p: String,
        /// Counterclockwise probability
        #[arg(long)]
        q: String,
        /// Escape probability
        #[arg(long)]
        r: String,
        /// Path length
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Comma-separated epsilon values: emit the mass divergence CSV
        #[arg(long)]
        scan_eps: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the whole invariant battery on a spec file
    Check {
        spec: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArg,
    },
}

/// Failures with their process exit codes.
enum CommandError {
    Numerical(String),
    Invalid(String),
    RegimeMismatch(String),
}

impl CommandError {
    fn exit_code(&self) -> u8 {
        match self {
            CommandError::Numerical(_) => 1,
            CommandError::Invalid(_) => 2,
            CommandError::RegimeMismatch(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CommandError::Numerical(m) | CommandError::Invalid(m) | CommandError::RegimeMismatch(m) => m,
        }
    }
}

impl From<SpecError> for CommandError {
    fn from(e: SpecError) -> Self {
        CommandError::Invalid(e.to_string())
    }
}

impl From<DynamicsError> for CommandError {
    fn from(e: DynamicsError) -> Self {
        CommandError::Numerical(e.to_string())
    }
}

impl From<ScatteringError> for CommandError {
    fn from(e: ScatteringError) -> Self {
        CommandError::Numerical(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((text, out, all_pass)) => {
            if let Err(e) = emit(&text, out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(spec_path: &Path, solver: &SolverArgs) -> Result<Instance, CommandError> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| CommandError::Invalid(format!("{}: {e}", spec_path.display())))?;
    let spec = RunSpec::parse(&text)?;
    let mut instance = spec.build()?;
    if let Some(method) = &solver.method {
        instance.solver.method = parse_method(method)?;
    }
    if let Some(tol) = solver.tol {
        instance.solver.tol = tol;
    }
    if let Some(n_max) = solver.n_max {
        instance.solver.n_max = n_max;
    }
    Ok(instance)
}

fn regime_of(instance: &Instance) -> Regime {
    if find_reversible_measure(&instance.tg, &instance.kernel).is_reversible() {
        Regime::Reversible
    } else {
        Regime::NonReversible
    }
}

type CommandOutput = (String, Option<PathBuf>, bool);

fn run(command: Command) -> Result<CommandOutput, CommandError> {
    match command {
        Command::Stationary {
            spec,
            solver,
            out,
            dump_epon,
        } => {
            let instance = load(&spec, &solver)?;
            let report =
                stationary_state(&instance.tg, &instance.kernel, &instance.alpha, &instance.solver)?;
            if let Some(path) = dump_epon {
                let sys = InducedSystem::build(&instance.tg, &instance.kernel, &instance.alpha)?;
                let dense = sys.epon_dense().map(|x| Complex64::new(x, 0.0));
                std::fs::write(&path, format_complex_matrix(&dense))
                    .map_err(|e| CommandError::Invalid(format!("{}: {e}", path.display())))?;
            }
            let pass = report.fixed_point_residual <= FIXED_POINT_TOL
                && report.cross_method_gap.map_or(true, |g| g <= 1e-8);
            let text = report::stationary(&instance.tg, regime_of(&instance), &report);
            Ok((text, out.out, pass))
        }
        Command::Scatter { spec, solver, out } => {
            let instance = load(&spec, &solver)?;
            let report =
                verify_scattering(&instance.tg, &instance.kernel, &instance.alpha, &instance.solver)?;
            let pass = report.passes();
            Ok((report::scattering(&report), out.out, pass))
        }
        Command::Circuit { spec, solver, out } => {
            let instance = load(&spec, &solver)?;
            let verdict = find_reversible_measure(&instance.tg, &instance.kernel);
            let Some(m) = verdict.measure() else {
                return Err(CommandError::RegimeMismatch(
                    "circuit decomposition undefined for non-reversible kernels".into(),
                ));
            };
            let report =
                stationary_state(&instance.tg, &instance.kernel, &instance.alpha, &instance.solver)?;
            let quantum = current_from_wavefunction(&instance.tg, &report.psi, m);
            let injections = boundary_injections(&instance.tg, m, &instance.alpha);
            let classical = solve_circuit(instance.tg.internal(), &m.edge, &injections)
                .map_err(|e| CommandError::Numerical(e.to_string()))?;
            let oracle_gap = inf_norm_diff(&quantum.internal, &classical.current);
            let basis = cycle_basis(instance.tg.internal());
            let kirchhoff = verify_kirchhoff(&instance.tg, &quantum, m, &basis);
            let decomposition = decompose_mu(&instance.tg, &report.psi, m, &quantum);
            let real_inflow = instance.alpha.iter().all(|z| z.im == 0.0);
            let pass = oracle_gap <= 1e-8
                && kirchhoff.kcl <= KIRCHHOFF_TOL
                && kirchhoff.kvl <= KIRCHHOFF_TOL
                && (!real_inflow || decomposition.max_residual_literal <= KIRCHHOFF_TOL);
            let text = report::circuit(
                &instance.tg,
                &quantum,
                &classical,
                oracle_gap,
                &kirchhoff,
                &decomposition,
                &injections,
            );
            Ok((text, out.out, pass))
        }
        Command::C3pk {
            p,
            q,
            r,
            k,
            scan_eps,
            out,
        } => run_c3pk(&p, &q, &r, k, scan_eps.as_deref(), out.out),
        Command::Check { spec, solver, out } => {
            let instance = load(&spec, &solver)?;
            let items = run_battery(&instance.tg, &instance.kernel, &instance.alpha, &instance.solver)?;
            let mut text = String::new();
            let mut all_pass = true;
            for item in &items {
                all_pass &= item.passed;
                let residual = item
                    .residual
                    .map(|r| format!(" residual={}", fmt_f(r)))
                    .unwrap_or_default();
                let _ = writeln!(
                    text,
                    "{} {}{residual} ({})",
                    if item.passed { "PASS" } else { "FAIL" },
                    item.name,
                    item.detail
                );
            }
            Ok((text, out.out, all_pass))
        }
    }
}

fn parse_prob_arg(name: &str, value: &str) -> Result<f64, CommandError> {
    ProbValue::Text(value.to_string())
        .parse(name)
        .map_err(CommandError::from)
}

fn run_c3pk(
    p: &str,
    q: &str,
    r: &str,
    k: usize,
    scan_eps: Option<&str>,
    out: Option<PathBuf>,
) -> Result<CommandOutput, CommandError> {
    let p = parse_prob_arg("--p", p)?;
    let q = parse_prob_arg("--q", q)?;
    let r = parse_prob_arg("--r", r)?;

    if let Some(eps_list) = scan_eps {
        let epsilons: Vec<f64> = eps_list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CommandError::Invalid(format!("bad epsilon `{s}`")))
            })
            .collect::<Result<_, _>>()?;
        let rows = divergence_scan(r, k, &epsilons)?;
        let mut text = String::from("epsilon,M_simulated,M_closed_form\n");
        for row in rows {
            let _ = writeln!(
                text,
                "{},{},{}",
                fmt_f(row.epsilon),
                fmt_f(row.m_simulated),
                fmt_f(row.m_closed_form)
            );
        }
        return Ok((text, out, true));
    }

    let spec = C3PkSpec::new(p, q, r, k).map_err(|e| CommandError::Invalid(e.to_string()))?;
    let inst = make_c3pk(spec);
    let opts = SolverOptions {
        method: Method::DirectSolve,
        ..SolverOptions::default()
    };
    let report = stationary_state(&inst.tg, &inst.kernel, &inst.alpha, &opts)?;
    let closed = if spec.is_reversible() {
        closed_form_reversible(r, k)
    } else {
        closed_form_nonreversible(p, q, r)
    }
    .map_err(|e| CommandError::Invalid(e.to_string()))?;
    let expected = closed.as_arc_field(&inst.labels, inst.tg.internal().arc_count());

    let mut text = String::new();
    let _ = writeln!(
        text,
        "family: triangle-path p={} q={} r={} k={k}",
        fmt_f(p),
        fmt_f(q),
        fmt_f(r)
    );
    let regime = if spec.is_reversible() {
        Regime::Reversible
    } else {
        Regime::NonReversible
    };
    let _ = writeln!(text, "regime: {}", regime_name(regime));
    let g = inst.tg.internal();
    let mut max_gap = 0.0_f64;
    let arc_names: Vec<(String, usize)> = (0..3)
        .map(|i| (format!("b{}", i + 1), inst.labels.b[i]))
        .chain((0..3).map(|i| (format!("b{}_bar", i + 1), inst.labels.b_bar[i])))
        .chain(
            inst.labels
                .path
                .iter()
                .enumerate()
                .map(|(i, &a)| (format!("path[{i}]"), a)),
        )
        .collect();
    for (name, a) in arc_names {
        let simulated = report.psi.internal[a];
        let gap = (simulated - expected[a]).norm();
        max_gap = max_gap.max(gap);
        let _ = writeln!(
            text,
            "arc {name} ({}): simulated {} closed_form {} gap {}",
            specfile::arc_address(g, a),
            report::fmt_c(simulated),
            fmt_f(expected[a].re),
            fmt_f(gap)
        );
    }
    let simulated_mass = tailwalk_core::dynamics::mass(&inst.tg, &report.psi);
    let mass_gap = ((simulated_mass - closed.mass) / closed.mass).abs();
    let _ = writeln!(
        text,
        "mass: simulated {} closed_form {} rel_gap {}",
        fmt_f(simulated_mass),
        fmt_f(closed.mass),
        fmt_f(mass_gap)
    );
    let _ = writeln!(text, "outflow:");
    for (j, z) in report.psi.outflow.iter().enumerate() {
        let _ = writeln!(text, "  tail {j}: {}", report::fmt_c(*z));
    }
    let _ = writeln!(text, "max_abs_gap: {}", fmt_f(max_gap));
    let pass = max_gap <= 1e-8 && mass_gap <= 1e-6;
    Ok((text, out, pass))
}
