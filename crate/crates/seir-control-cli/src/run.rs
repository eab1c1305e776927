//! The three subcommands: `simulate`, `optimize`, `compare`.
//!
//! Precedence for every run: benchmark defaults, then the config file's
//! keys, then command-line flags. All output files land in one directory
//! (`out_dir` key, overridable with `--out`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use seir_control::{
    compare, integrate, solve_direct, solve_fbsm, summarize, ComparisonMetric, ComparisonReport,
    OcpSpec, OptimalSolution, Period, Strategy, SummaryMetrics, Termination, VectorField,
};

use crate::config::{ScenarioConfig, SolverChoice};
use crate::csv_io;
use crate::error::CliError;

/// Simulate an SEIR outbreak and compute optimal intervention schedules.
#[derive(Debug, Parser)]
#[command(name = "seirctl", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the uncontrolled outbreak and report its metrics.
    Simulate(RunArgs),
    /// Solve the configured strategy's optimal-control problem.
    Optimize(RunArgs),
    /// Solve all three strategies and rank them against the free outbreak.
    Compare(RunArgs),
}

/// Built-in scenarios selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// The standard benchmark scenario for this model (also the default).
    Paper,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file with `key = value` lines; unset keys keep their
    /// benchmark values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Start from a named built-in scenario instead of a file.
    #[arg(long, value_enum, conflicts_with = "config")]
    pub preset: Option<Preset>,
    /// Output directory (overrides the config's `out_dir`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Optimizer selection (overrides the config's `solver`).
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    /// Exit successfully even when a solver stops without converging.
    #[arg(long)]
    pub allow_nonconverged: bool,
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

/// Resolves the scenario (defaults -> config file -> flags) and creates
/// the output directory.
fn load_scenario(args: &RunArgs) -> Result<(ScenarioConfig, PathBuf), CliError> {
    // `--preset paper` names the built-in default scenario, so it needs no
    // dedicated handling beyond validation by clap; a config file starts
    // from that same scenario and overlays its keys.
    let mut config = match &args.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(solver) = args.solver {
        config.solver = solver;
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.out_dir));
    std::fs::create_dir_all(&out_dir).map_err(|e| {
        CliError::Usage(format!(
            "cannot create output directory `{}`: {e}",
            out_dir.display()
        ))
    })?;
    Ok((config, out_dir))
}

fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write `{}`: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// simulate

fn cmd_simulate(args: &RunArgs) -> Result<(), CliError> {
    let (config, out_dir) = load_scenario(args)?;
    // Full validation up front so bad configs fail before any work.
    let spec = config.configured_spec()?;
    let trajectory = integrate(
        VectorField::Uncontrolled,
        &spec.params,
        spec.init,
        None,
        spec.grid,
    )?;
    let metrics = summarize(&trajectory, config.threshold)?;

    csv_io::write_trajectory(&out_dir.join("trajectory.csv"), &trajectory)?;
    write_text(&out_dir.join("metrics.txt"), &render_metrics(&metrics, &[]))?;

    let f = metrics.final_state;
    println!(
        "uncontrolled outbreak over {} days ({} steps)",
        spec.params.t_end, spec.grid.n_steps
    );
    println!(
        "final state: S={:.6} E={:.6} I={:.6} R={:.6}",
        f.s, f.e, f.i, f.r
    );
    println!(
        "peak infected: {:.6} at day {:.1}",
        metrics.peak_infected.value, metrics.peak_infected.time
    );
    println!(
        "infectious >= {}: {}",
        config.threshold,
        describe_period(&metrics.infection_period)
    );
    println!("wrote {}", out_dir.join("trajectory.csv").display());
    Ok(())
}

// ---------------------------------------------------------------------------
// optimize

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Engine {
    Direct,
    Sweep,
}

fn engines(choice: SolverChoice) -> &'static [Engine] {
    match choice {
        SolverChoice::Direct => &[Engine::Direct],
        SolverChoice::Sweep => &[Engine::Sweep],
        SolverChoice::Both => &[Engine::Direct, Engine::Sweep],
    }
}

fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Direct => "direct",
        Engine::Sweep => "sweep",
    }
}

fn run_engine(engine: Engine, spec: &OcpSpec) -> Result<OptimalSolution, CliError> {
    let solution = match engine {
        Engine::Direct => solve_direct(spec),
        Engine::Sweep => solve_fbsm(spec),
    }?;
    Ok(solution)
}

fn termination_phrase(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIterations => "hit the iteration budget",
        Termination::Stalled => "stalled in the line search",
    }
}

fn strategy_description(s: Strategy) -> &'static str {
    match s {
        Strategy::Vaccination => "vaccination, penalizing the infectious fraction",
        Strategy::ExposedInfected => "vaccination, penalizing exposed and infectious fractions",
        Strategy::TreatmentEducation => "treatment of the infectious plus an education campaign",
    }
}

/// Converts the list of non-converged runs into the exit policy: an error
/// (exit code 2) unless `--allow-nonconverged` was given.
fn handle_nonconvergence(nonconverged: Vec<String>, allow: bool) -> Result<(), CliError> {
    if nonconverged.is_empty() {
        return Ok(());
    }
    let list = nonconverged.join(", ");
    if allow {
        eprintln!("warning: accepted non-converged solution(s): {list}");
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "optimization did not converge: {list}; output files were still written; \
             rerun with --allow-nonconverged to accept the result"
        )))
    }
}

/// Writes the full artifact set for one solved problem, using `tag` as the
/// file-name suffix.
fn report_solution(
    out_dir: &Path,
    tag: &str,
    solution: &OptimalSolution,
    threshold: f64,
) -> Result<SummaryMetrics, CliError> {
    let metrics = summarize(&solution.trajectory, threshold)?.with_objective(solution.objective);
    csv_io::write_trajectory(
        &out_dir.join(format!("trajectory_{tag}.csv")),
        &solution.trajectory,
    )?;
    csv_io::write_controls(
        &out_dir.join(format!("controls_{tag}.csv")),
        solution.trajectory.grid,
        &solution.controls,
    )?;
    csv_io::write_convergence(
        &out_dir.join(format!("convergence_{tag}.csv")),
        &solution.convergence,
    )?;
    let extras = [
        ("objective", format!("{}", solution.objective)),
        ("converged", solution.convergence.converged().to_string()),
        ("iterations", solution.convergence.iterations.to_string()),
        (
            "termination",
            termination_phrase(solution.convergence.termination).to_string(),
        ),
    ];
    write_text(
        &out_dir.join(format!("metrics_{tag}.txt")),
        &render_metrics(&metrics, &extras),
    )?;
    Ok(metrics)
}

fn cmd_optimize(args: &RunArgs) -> Result<(), CliError> {
    let (config, out_dir) = load_scenario(args)?;
    let strategy = config.strategy()?;
    let spec = config.to_ocp_spec(strategy)?;

    println!("{} — {}", strategy.label(), strategy_description(strategy));
    let mut solved: Vec<(&'static str, OptimalSolution)> = Vec::new();
    let mut nonconverged = Vec::new();
    for &engine in engines(config.solver) {
        let name = engine_name(engine);
        let solution = run_engine(engine, &spec)?;
        let metrics = report_solution(&out_dir, name, &solution, config.threshold)?;
        let iters = solution.convergence.iterations;
        println!(
            "  {name}: J = {:.8}, {} after {iters} iteration{}; final R = {:.6}",
            solution.objective,
            termination_phrase(solution.convergence.termination),
            if iters == 1 { "" } else { "s" },
            metrics.final_state.r,
        );
        if !solution.convergence.converged() {
            nonconverged.push(format!("{} ({name})", strategy.label()));
        }
        solved.push((name, solution));
    }
    if let [(_, a), (_, b)] = &solved[..] {
        let gap = (a.objective - b.objective).abs() / b.objective.abs().max(f64::MIN_POSITIVE);
        println!("  solver agreement: relative objective gap {gap:.2e}");
    }
    println!("wrote solver outputs to {}", out_dir.display());
    handle_nonconvergence(nonconverged, args.allow_nonconverged)
}

// ---------------------------------------------------------------------------
// compare

fn cmd_compare(args: &RunArgs) -> Result<(), CliError> {
    let (config, out_dir) = load_scenario(args)?;
    let specs: Vec<OcpSpec> = Strategy::ALL
        .iter()
        .map(|&s| config.to_ocp_spec(s))
        .collect::<Result<_, _>>()?;

    let free = integrate(
        VectorField::Uncontrolled,
        &specs[0].params,
        specs[0].init,
        None,
        specs[0].grid,
    )?;
    csv_io::write_trajectory(&out_dir.join("trajectory_uncontrolled.csv"), &free)?;
    let mut runs = vec![(
        "uncontrolled".to_string(),
        summarize(&free, config.threshold)?,
    )];

    let engines = engines(config.solver);
    let mut agreement = Vec::new();
    let mut nonconverged = Vec::new();
    for spec in &specs {
        let label = spec.strategy.label();
        // The first engine is the one the report is built from; with
        // `both`, the sweep run serves as an independent cross-check.
        let solution = run_engine(engines[0], spec)?;
        if !solution.convergence.converged() {
            nonconverged.push(format!("{label} ({})", engine_name(engines[0])));
        }
        if let Some(&second) = engines.get(1) {
            let alt = run_engine(second, spec)?;
            if !alt.convergence.converged() {
                nonconverged.push(format!("{label} ({})", engine_name(second)));
            }
            let gap =
                (solution.objective - alt.objective).abs() / alt.objective.abs().max(f64::MIN_POSITIVE);
            agreement.push(format!(
                "{label}: direct J = {:.8}, sweep J = {:.8}, relative gap {gap:.2e}",
                solution.objective, alt.objective
            ));
        }
        let metrics = report_solution(&out_dir, label, &solution, config.threshold)?;
        runs.push((label.to_string(), metrics));
    }

    let report = compare(&runs)?;
    let text = render_comparison(
        &report,
        config.threshold,
        engine_name(engines[0]),
        &agreement,
    );
    write_text(&out_dir.join("comparison.txt"), &text)?;
    print!("{text}");
    println!("wrote comparison to {}", out_dir.join("comparison.txt").display());
    handle_nonconvergence(nonconverged, args.allow_nonconverged)
}

// ---------------------------------------------------------------------------
// rendering

fn describe_period(p: &Period) -> String {
    if p.reached {
        format!("{:.1} days", p.days)
    } else {
        "still above at the horizon".to_string()
    }
}

/// Flat `key = value` metrics file; floats use Rust's shortest
/// round-trip formatting.
fn render_metrics(m: &SummaryMetrics, extras: &[(&str, String)]) -> String {
    let mut out = String::new();
    let f = m.final_state;
    let _ = writeln!(out, "final_s = {}", f.s);
    let _ = writeln!(out, "final_e = {}", f.e);
    let _ = writeln!(out, "final_i = {}", f.i);
    let _ = writeln!(out, "final_r = {}", f.r);
    let _ = writeln!(out, "peak_infected = {}", m.peak_infected.value);
    let _ = writeln!(out, "peak_infected_time = {}", m.peak_infected.time);
    let _ = writeln!(out, "peak_exposed = {}", m.peak_exposed.value);
    let _ = writeln!(out, "peak_exposed_time = {}", m.peak_exposed.time);
    let _ = writeln!(out, "infection_period_days = {}", m.infection_period.days);
    let _ = writeln!(out, "infection_period_reached = {}", m.infection_period.reached);
    let _ = writeln!(out, "exposure_period_days = {}", m.exposure_period.days);
    let _ = writeln!(out, "exposure_period_reached = {}", m.exposure_period.reached);
    for (key, value) in extras {
        let _ = writeln!(out, "{key} = {value}");
    }
    out
}

fn period_cell(p: &Period) -> String {
    if p.reached {
        format!("{:.1} days", p.days)
    } else {
        "> horizon".to_string()
    }
}

fn metric_cell(metric: ComparisonMetric, m: &SummaryMetrics) -> String {
    match metric {
        ComparisonMetric::InfectionPeriod => period_cell(&m.infection_period),
        _ => format!("{:.6}", metric.value_of(m)),
    }
}

fn render_comparison(
    report: &ComparisonReport,
    threshold: f64,
    solver: &str,
    agreement: &[String],
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "strategy comparison ({} runs, threshold {threshold}, {solver} solver)",
        report.rows.len()
    );
    out.push('\n');

    let i_header = format!("I>={threshold}");
    let _ = writeln!(
        out,
        "{:<13} {:>9} {:>9} {:>9} {:>9} {:>9} {:>7} {:>14} {:>11}",
        "run", "final S", "final E", "final I", "final R", "peak I", "at day", i_header, "objective"
    );
    for row in &report.rows {
        let m = &row.metrics;
        let objective = match m.objective {
            Some(j) => format!("{j:.6}"),
            None => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "{:<13} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>7.1} {:>14} {:>11}",
            row.label,
            m.final_state.s,
            m.final_state.e,
            m.final_state.i,
            m.final_state.r,
            m.peak_infected.value,
            m.peak_infected.time,
            period_cell(&m.infection_period),
            objective
        );
    }

    out.push('\n');
    let _ = writeln!(out, "ranking (best first):");
    for metric in ComparisonMetric::ALL {
        let mut rows: Vec<_> = report.rows.iter().collect();
        rows.sort_by(|a, b| {
            let (va, vb) = (metric.value_of(&a.metrics), metric.value_of(&b.metrics));
            let ord = va.partial_cmp(&vb).unwrap_or(std::cmp::Ordering::Equal);
            if metric.lower_is_better() {
                ord
            } else {
                ord.reverse()
            }
        });
        let mut line = format!("  {:<17}", format!("{}:", metric.name()));
        for (k, row) in rows.iter().enumerate() {
            if k > 0 {
                let prev = metric.value_of(&rows[k - 1].metrics);
                let here = metric.value_of(&row.metrics);
                let sep = if prev == here {
                    " = "
                } else if metric.lower_is_better() {
                    " < "
                } else {
                    " > "
                };
                line.push_str(sep);
            } else {
                line.push(' ');
            }
            let _ = write!(line, "{} ({})", row.label, metric_cell(metric, &row.metrics));
        }
        let _ = writeln!(out, "{line}");
    }

    if !agreement.is_empty() {
        out.push('\n');
        let _ = writeln!(out, "solver agreement (direct vs sweep):");
        for line in agreement {
            let _ = writeln!(out, "  {line}");
        }
    }
    out
}
