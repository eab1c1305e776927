//! Acceptance gate for the whole workspace: ten criteria covering the
//! benchmark endpoints, integrator order, both solvers, their agreement,
//! a brute-force oracle, conservation, and the binary's file/exit-code
//! contract. Each test prints one `criterion NN PASS` line (visible with
//! `--nocapture`); a failure anywhere fails `cargo test`.

use std::process::Output;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seir_control::{
    cost, integrate, objective_gradient, solve_direct, solve_fbsm, summarize, ControlValue,
    OcpSpec, OptimalSolution, Strategy, SummaryMetrics, TimeGrid, Trajectory, VectorField,
};

const THRESHOLD: f64 = 0.01;

/// The benchmark free outbreak: 100 days, 1000 steps, no intervention.
fn uncontrolled_benchmark() -> Trajectory {
    let spec = OcpSpec::baseline(Strategy::Vaccination);
    integrate(
        VectorField::Uncontrolled,
        &spec.params,
        spec.init,
        None,
        spec.grid,
    )
    .unwrap()
}

/// The free outbreak on an `n`-step grid (for the order study).
fn uncontrolled_with_steps(n: usize) -> Trajectory {
    let spec = OcpSpec::baseline(Strategy::Vaccination);
    let grid = TimeGrid::from_horizon(spec.params.t_end, n).unwrap();
    integrate(VectorField::Uncontrolled, &spec.params, spec.init, None, grid).unwrap()
}

/// Trajectory of the controlled system under an all-zero schedule.
fn zero_control_run(spec: &OcpSpec) -> Trajectory {
    let zeros = vec![ControlValue::ZERO; spec.grid.n_steps];
    integrate(
        spec.strategy.field(),
        &spec.params,
        spec.init,
        Some(&zeros),
        spec.grid,
    )
    .unwrap()
}

fn benchmark_metrics(sol: &OptimalSolution) -> SummaryMetrics {
    summarize(&sol.trajectory, THRESHOLD)
        .unwrap()
        .with_objective(sol.objective)
}

#[test]
fn criterion_01_uncontrolled_endpoints_match_the_benchmark() {
    let traj = uncontrolled_benchmark();
    let m = summarize(&traj, THRESHOLD).unwrap();
    let f = m.final_state;

    assert!(
        (f.s - 0.173).abs() <= 0.005,
        "S(100) = {} is not 0.173 +/- 0.005",
        f.s
    );
    assert!(
        (f.r - 0.812).abs() <= 0.005,
        "R(100) = {} is not 0.812 +/- 0.005",
        f.r
    );
    assert!(
        (m.peak_infected.value - 0.14).abs() <= 0.005,
        "max I = {} is not 0.14 +/- 0.005",
        m.peak_infected.value
    );
    println!(
        "criterion 01 PASS — uncontrolled S(100)={:.4}, R(100)={:.4}, max I={:.4}",
        f.s, f.r, m.peak_infected.value
    );
}

#[test]
fn criterion_02_uncontrolled_outbreak_outlives_the_window() {
    let traj = uncontrolled_benchmark();
    let m = summarize(&traj, THRESHOLD).unwrap();

    assert!(
        m.final_state.i >= THRESHOLD,
        "I(100) = {} fell below the threshold inside the window",
        m.final_state.i
    );
    assert!(
        !m.infection_period.reached,
        "the infection period should extend beyond t = 100"
    );
    println!(
        "criterion 02 PASS — I stays >= {THRESHOLD} through day 100 (I(100) = {:.4})",
        m.final_state.i
    );
}

#[test]
fn criterion_03_integrator_shows_fourth_order_convergence() {
    // Endpoint errors against a reference 16x finer than the coarser grid;
    // halving the step of a fourth-order method divides the error by ~16.
    let reference = *uncontrolled_with_steps(1600).final_state();
    let endpoint_error = |n: usize| -> f64 {
        let end = *uncontrolled_with_steps(n).final_state();
        end.as_array()
            .iter()
            .zip(reference.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let coarse = endpoint_error(100);
    let fine = endpoint_error(200);
    let ratio = coarse / fine;

    assert!(
        (12.0..=20.0).contains(&ratio),
        "error ratio under step halving is {ratio:.2} (errors {coarse:.3e} / {fine:.3e}), expected within [12, 20]"
    );
    println!("criterion 03 PASS — step-halving error ratio {ratio:.1} (fourth-order regime)");
}

#[test]
fn criterion_04_every_strategy_improves_on_doing_nothing() {
    for strategy in Strategy::ALL {
        let spec = OcpSpec::baseline(strategy);
        let idle = zero_control_run(&spec);
        let idle_cost = cost(strategy, &idle, &spec.weights).unwrap();

        let sol = solve_direct(&spec).unwrap();
        assert!(
            sol.objective <= idle_cost,
            "{}: J = {} exceeds the do-nothing cost {}",
            strategy.label(),
            sol.objective,
            idle_cost
        );
        for (k, u) in sol.controls.iter().enumerate() {
            assert!(
                u.u1 >= 0.0 && u.u1 <= spec.u_max && u.u2 >= 0.0 && u.u2 <= spec.u_max,
                "{}: control sample {k} = ({}, {}) leaves [0, {}]",
                strategy.label(),
                u.u1,
                u.u2,
                spec.u_max
            );
        }
        for w in sol.convergence.objective_history.windows(2) {
            assert!(
                w[1] <= w[0],
                "{}: objective rose from {} to {}",
                strategy.label(),
                w[0],
                w[1]
            );
        }
    }
    println!("criterion 04 PASS — all strategies beat u = 0 with feasible, monotone solves");
}

#[test]
fn criterion_05_strategies_rank_as_expected() {
    let free = summarize(&uncontrolled_benchmark(), THRESHOLD).unwrap();
    let metrics: Vec<SummaryMetrics> = Strategy::ALL
        .iter()
        .map(|&s| benchmark_metrics(&solve_direct(&OcpSpec::baseline(s)).unwrap()))
        .collect();
    let [m1, m2, m3] = metrics[..] else { unreachable!() };

    for (label, m) in ["strategy-1", "strategy-2", "strategy-3"].iter().zip(&metrics) {
        assert!(
            m.peak_infected.value < free.peak_infected.value,
            "{label}: peak I {} is not below the uncontrolled peak {}",
            m.peak_infected.value,
            free.peak_infected.value
        );
    }

    let (r1, r2, r3, rf) = (
        m1.final_state.r,
        m2.final_state.r,
        m3.final_state.r,
        free.final_state.r,
    );
    assert!(
        r3 >= r2 && r2 >= r1 && r1 > rf,
        "final R must satisfy S3 >= S2 >= S1 > uncontrolled, got {r3:.4} / {r2:.4} / {r1:.4} / {rf:.4}"
    );

    let (p1, p2, p3, pf) = (
        m1.infection_period.comparison_key(),
        m2.infection_period.comparison_key(),
        m3.infection_period.comparison_key(),
        free.infection_period.comparison_key(),
    );
    assert!(
        p3 <= p2 && p2 <= p1 && p1 < pf,
        "infection periods must satisfy S3 <= S2 <= S1 < uncontrolled, got {p3} / {p2} / {p1} / {pf}"
    );
    println!(
        "criterion 05 PASS — final R {:.3} >= {:.3} >= {:.3} > {:.3}; periods {:.1} <= {:.1} <= {:.1} days, uncontrolled unresolved",
        r3, r2, r1, rf, p3, p2, p1
    );
}

#[test]
fn criterion_06_adjoint_gradient_matches_finite_differences() {
    // Coarse instance: 20 intervals over 10 days (h = 0.5 keeps every
    // perturbed trial integrable at any feasible control level).
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let eps = 1e-6;
    let mut worst = 0.0f64;

    for strategy in Strategy::ALL {
        let mut spec = OcpSpec::baseline(strategy);
        spec.params.t_end = 10.0;
        spec.grid = TimeGrid::from_horizon(10.0, 20).unwrap();
        let n = spec.grid.n_steps;
        let two = strategy.control_dim() == 2;

        let eval = |schedule: &[ControlValue]| -> f64 {
            let traj = integrate(
                strategy.field(),
                &spec.params,
                spec.init,
                Some(schedule),
                spec.grid,
            )
            .unwrap();
            cost(strategy, &traj, &spec.weights).unwrap()
        };

        for _ in 0..3 {
            let schedule: Vec<ControlValue> = (0..n)
                .map(|_| ControlValue {
                    u1: rng.gen_range(0.0..spec.u_max),
                    u2: if two { rng.gen_range(0.0..spec.u_max) } else { 0.0 },
                })
                .collect();
            let grad = objective_gradient(&spec, &schedule).unwrap();

            // Central differences, matching the gradient's layout: slot k is
            // u1 on interval k; the two-control strategy appends u2 slots.
            let mut err_inf = 0.0f64;
            let mut fd_inf = 0.0f64;
            let mut check = |slot: usize, bump: &dyn Fn(&mut ControlValue, f64)| {
                let mut plus = schedule.clone();
                bump(&mut plus[slot % n], eps);
                let mut minus = schedule.clone();
                bump(&mut minus[slot % n], -eps);
                let fd = (eval(&plus) - eval(&minus)) / (2.0 * eps);
                fd_inf = fd_inf.max(fd.abs());
                err_inf = err_inf.max((grad[slot] - fd).abs());
            };
            for k in 0..n {
                check(k, &|u, d| u.u1 += d);
            }
            if two {
                for k in 0..n {
                    check(n + k, &|u, d| u.u2 += d);
                }
            }

            let rel = err_inf / fd_inf;
            worst = worst.max(rel);
            assert!(
                rel < 1e-4,
                "{}: gradient vs finite differences relative error {rel:.3e}",
                strategy.label()
            );
        }
    }
    println!("criterion 06 PASS — worst gradient/FD relative error {worst:.2e} (< 1e-4)");
}

#[test]
fn criterion_07_both_solvers_agree_on_the_benchmark() {
    let mut worst_gap = 0.0f64;
    let mut worst_l2 = 0.0f64;
    for strategy in Strategy::ALL {
        let spec = OcpSpec::baseline(strategy);
        let d = solve_direct(&spec).unwrap();
        let s = solve_fbsm(&spec).unwrap();
        assert!(d.convergence.converged(), "{}: direct did not converge", strategy.label());
        assert!(s.convergence.converged(), "{}: sweep did not converge", strategy.label());

        let gap = (d.objective - s.objective).abs() / s.objective.abs();
        assert!(
            gap <= 1e-3,
            "{}: objectives disagree, direct {} vs sweep {} (rel {gap:.3e})",
            strategy.label(),
            d.objective,
            s.objective
        );

        let h = spec.grid.h();
        let sq: f64 = d
            .controls
            .iter()
            .zip(&s.controls)
            .map(|(a, b)| h * ((a.u1 - b.u1).powi(2) + (a.u2 - b.u2).powi(2)))
            .sum();
        let l2 = sq.sqrt();
        assert!(
            l2 <= 1e-2,
            "{}: control schedules disagree in L2 by {l2:.3e}",
            strategy.label()
        );
        worst_gap = worst_gap.max(gap);
        worst_l2 = worst_l2.max(l2);
    }
    println!(
        "criterion 07 PASS — objective gap <= {worst_gap:.2e} (tol 1e-3), control L2 gap <= {worst_l2:.2e} (tol 1e-2)"
    );
}

#[test]
fn criterion_08_direct_solver_beats_the_brute_force_lattice() {
    // Coarse instance: 8 intervals over 10 days, vaccination strategy,
    // every control drawn from a 5-level lattice spanning [0, u_max].
    let mut spec = OcpSpec::baseline(Strategy::Vaccination);
    spec.params.t_end = 10.0;
    spec.grid = TimeGrid::from_horizon(10.0, 8).unwrap();

    let sol = solve_direct(&spec).unwrap();

    let levels: Vec<f64> = (0..5).map(|k| spec.u_max * k as f64 / 4.0).collect();
    let mut best = f64::INFINITY;
    let mut schedule = vec![ControlValue::ZERO; 8];
    for combo in 0..5usize.pow(8) {
        let mut c = combo;
        for slot in &mut schedule {
            *slot = ControlValue::single(levels[c % 5]);
            c /= 5;
        }
        let traj = integrate(
            spec.strategy.field(),
            &spec.params,
            spec.init,
            Some(&schedule),
            spec.grid,
        )
        .unwrap();
        best = best.min(cost(spec.strategy, &traj, &spec.weights).unwrap());
    }

    assert!(
        sol.objective <= best + 1e-6,
        "solver objective {} does not reach the lattice optimum {}",
        sol.objective,
        best
    );
    println!(
        "criterion 08 PASS — solver J = {:.6} vs best of 5^8 lattice schedules {:.6}",
        sol.objective, best
    );
}

#[test]
fn criterion_09_population_is_conserved_on_every_run() {
    let mut runs: Vec<(String, Trajectory)> =
        vec![("uncontrolled".into(), uncontrolled_benchmark())];
    for strategy in Strategy::ALL {
        let spec = OcpSpec::baseline(strategy);
        runs.push((format!("{} idle", strategy.label()), zero_control_run(&spec)));
        runs.push((
            format!("{} direct", strategy.label()),
            solve_direct(&spec).unwrap().trajectory,
        ));
        runs.push((
            format!("{} sweep", strategy.label()),
            solve_fbsm(&spec).unwrap().trajectory,
        ));
    }
    // The coarse brute-force instance as well.
    let mut coarse = OcpSpec::baseline(Strategy::Vaccination);
    coarse.params.t_end = 10.0;
    coarse.grid = TimeGrid::from_horizon(10.0, 8).unwrap();
    runs.push(("coarse direct".into(), solve_direct(&coarse).unwrap().trajectory));

    let mut samples = 0usize;
    for (name, traj) in &runs {
        for (k, state) in traj.states.iter().enumerate() {
            let drift = (state.total() - 1.0).abs();
            assert!(
                drift < 1e-8,
                "{name}: |S+E+I+R-1| = {drift:.3e} at node {k}"
            );
            samples += 1;
        }
    }
    println!("criterion 09 PASS — conservation within 1e-8 at all {samples} samples of {} runs", runs.len());
}

// ---------------------------------------------------------------------------
// criterion 10: the binary's file and exit-code contract

fn run_bin(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_seirctl"))
        .args(args)
        .output()
        .expect("failed to launch seirctl")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("binary was killed by a signal")
}

#[test]
fn criterion_10_cli_exit_codes_and_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name);
    let as_str = |p: &std::path::Path| p.to_str().unwrap().to_string();

    // Success path: the benchmark preset simulates cleanly.
    let sim_out = path("sim");
    let out = run_bin(&["simulate", "--preset", "paper", "--out", &as_str(&sim_out)]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // Trajectory CSV: header, LF endings, and a 12-significant-digit
    // round-trip — parsing every value and re-rendering it reproduces the
    // file byte for byte.
    let csv = std::fs::read_to_string(sim_out.join("trajectory.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,S,E,I,R");
    let mut rebuilt = String::from("t,S,E,I,R\n");
    let mut data_rows = 0;
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 5);
        let rendered: Vec<String> = fields.iter().map(|v| format!("{v:.11e}")).collect();
        rebuilt.push_str(&rendered.join(","));
        rebuilt.push('\n');
        data_rows += 1;
    }
    assert_eq!(data_rows, 1001, "expected one row per grid node");
    assert_eq!(rebuilt, csv, "CSV did not round-trip at 12 significant digits");

    // The benchmark endpoint shows up in the file itself.
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((last[1] - 0.173).abs() <= 0.005, "final S = {}", last[1]);
    assert!((last[4] - 0.812).abs() <= 0.005, "final R = {}", last[4]);

    // Usage/config errors exit 1.
    let bad = path("bad.cfg");
    std::fs::write(&bad, "beta = -0.1\n").unwrap();
    let out = run_bin(&["simulate", "--config", &as_str(&bad), "--out", &as_str(&path("b1"))]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));

    let unbalanced = path("unbalanced.cfg");
    std::fs::write(&unbalanced, "s0 = 0.5\n").unwrap(); // fractions sum to 0.62
    let out = run_bin(&["simulate", "--config", &as_str(&unbalanced), "--out", &as_str(&path("b2"))]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum to 1"));

    let out = run_bin(&["simulate", "--no-such-flag"]);
    assert_eq!(exit_code(&out), 1, "unknown flags are usage errors");

    let out = run_bin(&["--help"]);
    assert_eq!(exit_code(&out), 0, "--help is not an error");

    // Numerical failures exit 2: a 100-day step cannot integrate this model.
    let blowup = path("blowup.cfg");
    std::fs::write(&blowup, "t_end = 1000\nn_steps = 10\n").unwrap();
    let out = run_bin(&["simulate", "--config", &as_str(&blowup), "--out", &as_str(&path("b3"))]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // optimize with both solvers: exit 0, two metrics files, objectives
    // agreeing to 1e-3 relative; --allow-nonconverged is accepted.
    let opt_out = path("opt");
    let coarse = path("coarse.cfg");
    std::fs::write(&coarse, "n_steps = 400\n").unwrap();
    let out = run_bin(&[
        "optimize",
        "--config",
        &as_str(&coarse),
        "--solver",
        "both",
        "--out",
        &as_str(&opt_out),
        "--allow-nonconverged",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let objective_of = |name: &str| -> f64 {
        let text = std::fs::read_to_string(opt_out.join(name)).unwrap();
        text.lines()
            .find_map(|l| l.strip_prefix("objective = "))
            .expect("metrics file lists the objective")
            .parse()
            .unwrap()
    };
    let (jd, js) = (objective_of("metrics_direct.txt"), objective_of("metrics_sweep.txt"));
    assert!(
        (jd - js).abs() / js.abs() <= 1e-3,
        "solver objectives disagree: {jd} vs {js}"
    );

    println!("criterion 10 PASS — exit codes 0/1/2 honored; trajectory CSV round-trips at 12 digits");
}
