//! `chemofront` command-line driver.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 when
//! the numerics fail (blow-up, no plateau, no equilibrium root, no front).

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use chemofront::analytic::{equilibrium_radius, steady_state, AnalyticError, AnalyticReport};
use chemofront::field::{cross_section, write_profile_csv};
use chemofront::front::{compare_to_analytic, write_contour_csv, ComparisonReport};
use chemofront::params::{parse_config, RunConfig, Scenario};
use chemofront::scenario::{colony_centers, initial_condition, paper_scale};
use chemofront::solver::{front_speed_1d, run, SolverError, MANIFEST_FILE};
use chemofront::{analytic, Parameters, RunManifest, StateSnapshot};

#[derive(Parser, Debug)]
#[command(name = "chemofront", version, about = "Chemo-repellent front simulations and analyses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a scenario and persist snapshots and a manifest.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<Scenario>,
        /// Nodes per side.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        /// Comma-separated extra snapshot times.
        #[arg(long = "snapshot-times", value_delimiter = ',')]
        snapshot_times: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// 256 nodes per side, and the long horizon for t2.
        #[arg(long = "paper-scale")]
        paper_scale: bool,
    },
    /// Print the analytic report (CSV) for a parameter set.
    Analytic {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "A")]
        a: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Also write `analytic.csv` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a finished run with the analytic solution.
    Compare {
        /// Directory written by `run`.
        #[arg(long)]
        run: PathBuf,
        /// Analytic report to compare against instead of recomputing it.
        #[arg(long)]
        analytic: Option<PathBuf>,
        /// Where `report.csv` and the contours go; defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure the speed of a one-dimensional bistable front.
    Speed1d {
        #[arg(long = "u-star", default_value_t = 0.2)]
        u_star: f64,
        #[arg(long = "delta-c", default_value_t = 0.0)]
        delta_c: f64,
        #[arg(long = "Du", default_value_t = 0.01)]
        du: f64,
        #[arg(long, default_value_t = 60.0)]
        lambda: f64,
        #[arg(long, default_value_t = 3.2)]
        chi0: f64,
        #[arg(long, default_value_t = 3.0)]
        length: f64,
        #[arg(long, default_value_t = 1201)]
        n: usize,
        #[arg(long = "t-measure", default_value_t = 2.0)]
        t_measure: f64,
    },
    /// Tabulate R0 and its stability while one parameter varies.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Number of intervals; `steps + 1` values are evaluated.
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write `sweep.csv` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }

    fn numerical(e: impl Into<anyhow::Error>) -> Self {
        Failure::Numerical(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Run {
            config,
            scenario,
            grid,
            t_end,
            snapshot_times,
            out,
            paper_scale,
        } => cmd_run(config, scenario, grid, t_end, snapshot_times, out, paper_scale),
        Command::Analytic {
            config,
            a,
            omega,
            delta,
            out,
        } => cmd_analytic(config, a, omega, delta, out),
        Command::Compare { run, analytic, out } => cmd_compare(&run, analytic.as_deref(), out),
        Command::Speed1d {
            u_star,
            delta_c,
            du,
            lambda,
            chi0,
            length,
            n,
            t_measure,
        } => {
            let p = Parameters {
                u_star,
                du,
                lambda,
                chi0,
                ..Parameters::table1()
            };
            cmd_speed1d(&p, delta_c, length, n, t_measure)
        }
        Command::Sweep {
            param,
            from,
            to,
            steps,
            config,
            out,
        } => cmd_sweep(&param, from, to, steps, config, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Usage)?;
    parse_config(&text)
        .with_context(|| format!("in {}", path.display()))
        .map_err(Failure::Usage)
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Numerical)
}

fn cmd_run(
    config: Option<PathBuf>,
    scenario: Option<Scenario>,
    grid: Option<usize>,
    t_end: Option<f64>,
    snapshot_times: Option<Vec<f64>>,
    out: Option<PathBuf>,
    paper: bool,
) -> Outcome {
    let mut cfg = match &config {
        Some(path) => load_config(path)?,
        None => RunConfig::for_scenario(scenario.unwrap_or(Scenario::T1)),
    };
    if let (Some(_), Some(sc)) = (&config, scenario) {
        cfg.scenario = sc;
        if let Some(dv) = sc.dv_override() {
            cfg.params.dv = dv;
        }
    }
    if paper {
        let reference = paper_scale(cfg.scenario);
        cfg.grid_n = reference.grid_n;
        cfg.t_end = reference.t_end;
    }
    if let Some(n) = grid {
        cfg.grid_n = n;
    }
    if let Some(t) = t_end {
        cfg.t_end = t;
    }
    if let Some(times) = snapshot_times {
        cfg.snapshot_times = times;
    }
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    cfg.check().map_err(Failure::usage)?;

    let ic = initial_condition(cfg.scenario, cfg.grid_n, &cfg.params);
    let dir = cfg.output_dir.clone();
    let output = run(&cfg, ic, Some(&dir)).map_err(|f| match f.error {
        SolverError::Config(_) | SolverError::GridMismatch { .. } | SolverError::Courant(_) => {
            Failure::usage(f.error)
        }
        other => Failure::numerical(other),
    })?;

    let last = output.final_state();
    for (name, field) in [("u", &last.u), ("v", &last.v), ("c", &last.c)] {
        let profile = cross_section(field, cfg.cross_section.axis, cfg.cross_section.offset)
            .map_err(Failure::usage)?;
        let path = dir.join(format!("cross_section_{name}.csv"));
        let file = File::create(&path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(Failure::Numerical)?;
        write_profile_csv(BufWriter::new(file), &profile)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Numerical)?;
    }
    let m = &output.manifest;
    println!(
        "scenario={} grid_n={} dt={} steps={} t={} wall_time_s={:.2}",
        m.scenario, m.grid_n, m.dt, m.steps, last.t, m.wall_time_s
    );
    println!("output={}", dir.display());
    Ok(())
}

fn analytic_failure(e: AnalyticError) -> Failure {
    Failure::numerical(e)
}

fn cmd_analytic(
    config: Option<PathBuf>,
    a: Option<f64>,
    omega: Option<f64>,
    delta: Option<f64>,
    out: Option<PathBuf>,
) -> Outcome {
    let mut p = match &config {
        Some(path) => load_config(path)?.params,
        None => Parameters::table1(),
    };
    if let Some(a) = a {
        p.a = a;
    }
    if let Some(omega) = omega {
        p.omega = omega;
    }
    if let Some(delta) = delta {
        p.delta = delta;
    }
    let problems = p.validate();
    if !problems.is_empty() {
        return Err(Failure::Usage(anyhow!(problems.join("; "))));
    }
    let report = AnalyticReport::compute(&p).map_err(analytic_failure)?;
    let csv = report.to_csv();
    print!("{csv}");
    if let Some(dir) = out {
        fs::create_dir_all(&dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(Failure::Usage)?;
        write_file(&dir.join("analytic.csv"), &csv)?;
    }
    Ok(())
}

fn cmd_compare(run_dir: &Path, analytic_file: Option<&Path>, out: Option<PathBuf>) -> Outcome {
    let manifest_path = run_dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))
        .map_err(Failure::Usage)?;
    let manifest = RunManifest::from_text(&text)
        .map_err(|e| anyhow!(e))
        .with_context(|| format!("in {}", manifest_path.display()))
        .map_err(Failure::Usage)?;
    let file = manifest
        .final_snapshot_file()
        .ok_or_else(|| Failure::Usage(anyhow!("{} lists no snapshot files", manifest_path.display())))?;
    let snap = StateSnapshot::read_from(&run_dir.join(file))
        .with_context(|| format!("reading {file}"))
        .map_err(Failure::Usage)?;

    let centers = colony_centers(manifest.scenario);
    let mut report = compare_to_analytic(&snap, &manifest.params, &centers).map_err(Failure::numerical)?;
    if let Some(path) = analytic_file {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::Usage)?;
        let reference = AnalyticReport::from_csv(&text)
            .map_err(|e| anyhow!(e))
            .with_context(|| format!("in {}", path.display()))
            .map_err(Failure::Usage)?;
        report = rebase(&report, &reference);
    }

    let dir = out.unwrap_or_else(|| run_dir.to_path_buf());
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::Usage)?;
    let csv = report.to_csv();
    write_file(&dir.join("report.csv"), &csv)?;
    for (k, contour) in report.contours.iter().enumerate() {
        let path = dir.join(format!("contour_{k}.csv"));
        let file = File::create(&path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(Failure::Numerical)?;
        write_contour_csv(BufWriter::new(file), contour)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Numerical)?;
    }
    print!("{csv}");
    Ok(())
}

/// Replaces the analytic column with values from a stored report.
fn rebase(report: &ComparisonReport, reference: &AnalyticReport) -> ComparisonReport {
    let mut out = ComparisonReport {
        rows: Vec::new(),
        contours: report.contours.clone(),
    };
    for row in &report.rows {
        let base = row.metric.split('_').take_while(|s| s.parse::<usize>().is_err()).collect::<Vec<_>>().join("_");
        let analytic = match base.as_str() {
            "plateau_radius" => reference.steady.r1,
            "front_radius" | "front_radius_half_level" => reference.equilibrium.r0,
            "front_level" => reference.equilibrium.u2,
            _ => row.analytic,
        };
        out.push(row.metric.clone(), row.numeric, analytic);
    }
    out
}

fn cmd_speed1d(p: &Parameters, delta_c: f64, length: f64, n: usize, t_measure: f64) -> Outcome {
    let m = front_speed_1d(p, delta_c, length, n, t_measure).map_err(|e| match e {
        SolverError::Analytic(_) | SolverError::Window(_) => Failure::numerical(e),
        other => Failure::usage(other),
    })?;
    let predicted = analytic::nagumo_speed(m.u1, m.u2, p.lambda, p.du);
    println!("speed,predicted,residual,u1,u2");
    println!("{},{},{},{},{}", m.speed, predicted, m.residual, m.u1, m.u2);
    Ok(())
}

fn cmd_sweep(
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Outcome {
    let base = match &config {
        Some(path) => load_config(path)?.params,
        None => Parameters::table1(),
    };
    base.get(param).map_err(|e| Failure::Usage(anyhow!(e)))?;
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(Failure::Usage(anyhow!("need finite --from/--to and --steps ≥ 1")));
    }
    let rows: Vec<String> = (0..=steps)
        .into_par_iter()
        .map(|k| {
            let value = from + (to - from) * k as f64 / steps as f64;
            let mut p = base;
            p.set(param, value).expect("name checked above");
            sweep_row(value, &p)
        })
        .collect();
    let mut csv = format!("{param},R1,R0,root_count,radial_rate,radial_rate_exact,stable,status\n");
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    print!("{csv}");
    if let Some(dir) = out {
        fs::create_dir_all(&dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(Failure::Usage)?;
        write_file(&dir.join("sweep.csv"), &csv)?;
    }
    Ok(())
}

fn sweep_row(value: f64, p: &Parameters) -> String {
    let problems = p.validate();
    if !problems.is_empty() {
        return format!("{value},,,,,,,invalid: {}", problems.join("; ").replace(',', ";"));
    }
    let result = steady_state(p).and_then(|s| Ok((s, equilibrium_radius(p, &s)?)));
    match result {
        Ok((s, search)) => {
            let e = search.primary();
            format!(
                "{value},{},{},{},{},{},{},ok",
                s.r1,
                e.r0,
                search.roots.len(),
                e.radial_rate,
                e.radial_rate_exact,
                e.stable
            )
        }
        Err(e) => format!("{value},,,,,,,{}", e.to_string().replace(',', ";")),
    }
}
