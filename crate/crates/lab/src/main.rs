use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use elex::checks::{equivalence_summary, iso_report, parse_rational, spectral_report};
use elex::config::uniform_times;
use elex::harness::{emit_report, parse_report, run_convergence};
use elex::io::{create, load_initial, load_profile, write_trajectory_csv, x_frames, z_frames, JsonLinesSink};
use elex::{ConvergenceReport, ExperimentConfig, Process, SolverGrid};
use elex_core::elastic::{solve_z, z_init_from, ZParams};
use elex_core::exclusion::simulate_z;
use elex_core::isomorphism::psi_map;
use elex_core::stefan::{solve_stefan, StefanInit, StefanParams, COMPATIBILITY_TOL};
use elex_core::zero_range::{simulate_x, EventSink, StuckPolicy};
use elex_core::{Configuration, ExclusionConfiguration, LatticeParams};

#[derive(Parser)]
#[command(name = "elex", version, about = "Zero-range / elastic exclusion laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the zero-range process and write (time, site, height).
    SimulateX(SimArgs),
    /// Simulate the elastic exclusion process and write (time, site, occupancy).
    SimulateZ(SimArgs),
    /// Solve the free-boundary problem; writes front.csv and profile.csv.
    SolveStefan(StefanArgs),
    /// Solve the fixed-domain nonlinear diffusion; writes z.csv and summary.json.
    SolveZ(SolveZArgs),
    /// Exact generator conjugacy check, as JSON.
    CheckIso(IsoArgs),
    /// Compare the two reference solvers, as JSON.
    CheckEquivalence(EquivArgs),
    /// Residuals of the spectral identities, as JSON.
    VerifySpectral(SpectralArgs),
    /// Convergence study of X (and its projection Y) against the free-boundary solution.
    ConvergeX(ConvergeArgs),
    /// Convergence study of Z against the nonlinear diffusion, with the pushforward test.
    ConvergeZ(ConvergeArgs),
    /// Summarize a report directory written by converge-x / converge-z.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long)]
    t_max: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated observation times; defaults to t-max alone.
    #[arg(long, value_delimiter = ',')]
    obs_times: Vec<f64>,
    /// Named profile, profile CSV (x,u0) or configuration JSON.
    #[arg(long, default_value = "half-step")]
    initial: String,
    #[arg(long)]
    out: PathBuf,
    /// Stream events to this file as JSON lines.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Treat a state with no enabled event as absorbing instead of failing.
    #[arg(long)]
    hold: bool,
}

#[derive(Args)]
struct StefanArgs {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Expected initial front; checked against the profile.
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long, default_value = "half-step")]
    v0: String,
    #[arg(long, default_value_t = 0.25)]
    t_max: f64,
    #[arg(long, default_value_t = 400)]
    grid: usize,
    #[arg(long, default_value_t = 1e-5)]
    dt: f64,
    #[arg(long, default_value_t = 10)]
    frames: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveZArgs {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Profile u0; the initial z is its transform.
    #[arg(long, default_value = "half-step")]
    z0: String,
    #[arg(long, default_value_t = 0.25)]
    t_max: f64,
    #[arg(long, default_value_t = 400)]
    grid: usize,
    #[arg(long, default_value_t = 1e-5)]
    dt: f64,
    #[arg(long, default_value_t = 10)]
    frames: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IsoArgs {
    #[arg(long)]
    n: usize,
    /// Drift rate: integer, p/q or terminating decimal.
    #[arg(long, default_value = "1")]
    a: String,
    /// Negative control: drop leftward exclusion hops.
    #[arg(long)]
    no_left_hops: bool,
}

#[derive(Args)]
struct EquivArgs {
    #[arg(long, default_value = "half-step")]
    profile: String,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.25)]
    t_max: f64,
    #[arg(long, default_value_t = 400)]
    grid: usize,
    #[arg(long, default_value_t = 1e-5)]
    dt: f64,
    #[arg(long, default_value_t = 20)]
    frames: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long, default_value_t = 64)]
    max_n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// JSON file with the experiment configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Comma-separated observation times.
    #[arg(long, value_delimiter = ',')]
    obs_times: Vec<f64>,
    /// Number of equally spaced observation times (used when --obs-times is absent).
    #[arg(long)]
    obs_count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    h_modes: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    /// Exit with status 2 when this statistic does not decrease across the N ladder.
    #[arg(long)]
    check: Option<String>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::SimulateX(a) => simulate(a, false)?,
        Cmd::SimulateZ(a) => simulate(a, true)?,
        Cmd::SolveStefan(a) => stefan(a)?,
        Cmd::SolveZ(a) => z(a)?,
        Cmd::CheckIso(a) => {
            let r = iso_report(a.n, parse_rational(&a.a)?, !a.no_left_hops)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Cmd::CheckEquivalence(a) => {
            let p = load_profile(&a.profile)?;
            let r = equivalence_summary(&p, a.a, a.t_max, a.grid, a.dt, a.frames)?;
            emit_json(&r, a.out.as_deref())?;
        }
        Cmd::VerifySpectral(a) => {
            let r = spectral_report(a.max_n)?;
            emit_json(&r, a.out.as_deref())?;
            if !r.all_pass() {
                return Ok(ExitCode::from(2));
            }
        }
        Cmd::ConvergeX(a) => converge(a, Process::X)?,
        Cmd::ConvergeZ(a) => converge(a, Process::Z)?,
        Cmd::Report(a) => return report(a),
    }
    Ok(ExitCode::SUCCESS)
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}").with_context(|| p.display().to_string())?;
            w.flush().with_context(|| p.display().to_string())?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn simulate(a: SimArgs, z: bool) -> anyhow::Result<()> {
    let times = if a.obs_times.is_empty() { vec![a.t_max] } else { a.obs_times.clone() };
    if times.iter().any(|&t| t > a.t_max) {
        bail!("observation times must not exceed --t-max");
    }
    let c0 = load_initial(&a.initial, a.n)?;
    let params = LatticeParams::new(a.n, a.a)?;
    let policy = if a.hold { StuckPolicy::Hold } else { StuckPolicy::Error };
    let mut sink = match &a.events {
        Some(p) => Some((JsonLinesSink::new(create(p)?), p.clone())),
        None => None,
    };
    let frames = if z {
        let mut none = ();
        let log: &mut dyn EventSink<ExclusionConfiguration> = match sink.as_mut() {
            Some((s, _)) => s,
            None => &mut none,
        };
        let states = simulate_z(psi_map(&c0)?, params, &times, a.seed, policy, log)?;
        z_frames(&times, &states)
    } else {
        let mut none = ();
        let log: &mut dyn EventSink<Configuration> = match sink.as_mut() {
            Some((s, _)) => s,
            None => &mut none,
        };
        let states = simulate_x(c0, params, &times, a.seed, policy, log)?;
        x_frames(&times, &states)
    };
    if let Some((s, p)) = sink {
        let n = s.written();
        s.finish().with_context(|| p.display().to_string())?;
        eprintln!("{n} events written to {}", p.display());
    }
    let column = if z { "occupancy" } else { "height" };
    write_trajectory_csv(create(&a.out)?, column, &frames).with_context(|| a.out.display().to_string())?;
    Ok(())
}

fn stefan(a: StefanArgs) -> anyhow::Result<()> {
    let p = load_profile(&a.v0)?;
    if let Some(s0) = a.s0 {
        if (s0 - p.s0()).abs() > COMPATIBILITY_TOL {
            bail!("--s0 {s0} is incompatible with the profile (its support ends at {})", p.s0());
        }
    }
    let init = StefanInit::from_profile(&p, a.grid)?;
    let sol = solve_stefan(&init, &StefanParams::new(a.a, a.grid, a.dt, a.t_max, a.frames))?;
    std::fs::create_dir_all(&a.out).with_context(|| a.out.display().to_string())?;
    let front = a.out.join("front.csv");
    let mut w = csv::Writer::from_writer(create(&front)?);
    w.write_record(["t", "s"])?;
    for (t, s) in sol.times.iter().zip(&sol.s) {
        w.write_record([t.to_string(), s.to_string()])?;
    }
    w.flush()?;
    let prof = a.out.join("profile.csv");
    let mut w = csv::Writer::from_writer(create(&prof)?);
    w.write_record(["t", "x", "v", "u"])?;
    for k in 0..sol.len() {
        for (x, v) in sol.x_nodes(k).iter().zip(&sol.v[k]) {
            w.write_record([sol.times[k].to_string(), x.to_string(), v.to_string(), (v + 1.0).to_string()])?;
        }
    }
    w.flush()?;
    let worst = (0..sol.len()).map(|k| sol.mass_defect(k).abs()).fold(0.0, f64::max);
    eprintln!("{} frames, final s = {}, max mass defect {worst:e}", sol.len(), sol.s[sol.len() - 1]);
    Ok(())
}

#[derive(serde::Serialize)]
struct ZSummary {
    times: Vec<f64>,
    mass: Vec<f64>,
    boundary: Vec<f64>,
    mass_balance_defect: Vec<f64>,
    flux_residual_left: Vec<f64>,
    flux_residual_right: Vec<f64>,
    value_left: Vec<f64>,
    value_right: Vec<f64>,
    saturated_steps: u64,
    newton_iterations: u64,
    steps: u64,
}

fn z(a: SolveZArgs) -> anyhow::Result<()> {
    let p = load_profile(&a.z0)?;
    let init = StefanInit::from_profile(&p, a.grid)?;
    let sol = solve_z(&z_init_from(&init, a.grid)?, &ZParams::new(a.a, a.grid, a.dt, a.t_max, a.frames))?;
    std::fs::create_dir_all(&a.out).with_context(|| a.out.display().to_string())?;
    let path = a.out.join("z.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["t", "y", "z"])?;
    for k in 0..sol.len() {
        for (j, z) in sol.z[k].iter().enumerate() {
            w.write_record([sol.times[k].to_string(), (j as f64 * sol.h()).to_string(), z.to_string()])?;
        }
    }
    w.flush()?;
    let ks = 0..sol.len();
    let summary = ZSummary {
        times: sol.times.clone(),
        mass: ks.clone().map(|k| sol.mass(k)).collect(),
        boundary: ks.clone().map(|k| sol.boundary(k)).collect(),
        mass_balance_defect: ks.clone().map(|k| sol.mass_balance_defect(k)).collect(),
        flux_residual_left: ks.clone().map(|k| sol.flux_residual_left(k)).collect(),
        flux_residual_right: ks.clone().map(|k| sol.flux_residual_right(k)).collect(),
        value_left: ks.clone().map(|k| sol.value_left(k)).collect(),
        value_right: ks.map(|k| sol.value_right(k)).collect(),
        saturated_steps: sol.saturated_steps,
        newton_iterations: sol.newton_iterations,
        steps: sol.steps,
    };
    if sol.saturated_steps > 0 {
        eprintln!("warning: {} step(s) ended with a cell at the clip value", sol.saturated_steps);
    }
    emit_json(&summary, Some(&a.out.join("summary.json")))
}

fn converge(a: ConvergeArgs, process: Process) -> anyhow::Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_json_file(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.process = match (process, cfg.process) {
        (Process::X, Process::Y) => Process::Y,
        (p, _) => p,
    };
    if !a.n_list.is_empty() {
        cfg.n_list = a.n_list.clone();
    }
    if let Some(x) = a.a {
        cfg.a = x;
    }
    if let Some(x) = &a.profile {
        cfg.profile = x.clone();
    }
    if let Some(x) = a.t_max {
        cfg.t_max = x;
        if a.obs_times.is_empty() && a.obs_count.is_none() {
            cfg.observation_times = uniform_times(x, cfg.observation_times.len().max(1));
        }
    }
    if !a.obs_times.is_empty() {
        cfg.observation_times = a.obs_times.clone();
    } else if let Some(k) = a.obs_count {
        cfg.observation_times = uniform_times(cfg.t_max, k);
    }
    if let Some(x) = a.seed {
        cfg.seed = x;
    }
    if let Some(x) = a.replicas {
        cfg.replicas = x;
    }
    if a.grid.is_some() || a.dt.is_some() {
        cfg.solver = SolverGrid { m: a.grid.unwrap_or(cfg.solver.m), dt: a.dt.unwrap_or(cfg.solver.dt) };
    }
    if let Some(x) = a.h_modes {
        cfg.h_modes = x;
    }
    if let Some(p) = &a.out {
        cfg.output_dir = Some(p.display().to_string());
    }
    let dir = PathBuf::from(cfg.output_dir.clone().unwrap_or_else(|| format!("elex-out/converge-{:?}", cfg.process).to_lowercase()));
    let rep = run_convergence(&cfg)?;
    for p in emit_report(&rep, &dir)? {
        eprintln!("wrote {}", p.display());
    }
    print_summary(&rep);
    Ok(())
}

fn print_summary(rep: &ConvergenceReport) {
    println!("process {:?}, config {}, {} replicas per N", rep.process, &rep.config_hash[..12], rep.seeds.len());
    print!("{:>6}", "N");
    for s in &rep.statistics {
        print!("  {s:>22}");
    }
    println!();
    for &n in &rep.config.n_list {
        print!("{n:>6}");
        for s in &rep.statistics {
            match rep.sup_row(n, s) {
                Some(r) => print!("  {:>11.4e} ± {:<8.1e}", r.mean_of_sup, r.stderr_of_sup.unwrap_or(f64::NAN)),
                None => print!("  {:>22}", "-"),
            }
        }
        println!();
    }
    if !rep.two_sample.is_empty() {
        println!(
            "two-sample tests on <f_1, mu>: {} of {} rejected at family-wise level {}",
            rep.rejections(),
            rep.two_sample.len(),
            elex::harness::TWO_SAMPLE_LEVEL
        );
    }
    for w in rep.warnings() {
        eprintln!("warning: {w}");
    }
}

fn report(a: ReportArgs) -> anyhow::Result<ExitCode> {
    let rep = parse_report(&a.input)?;
    print_summary(&rep);
    if let Some(stat) = a.check {
        if !rep.statistics.contains(&stat) {
            bail!("report has no statistic `{stat}`");
        }
        let t = rep.trend(&stat);
        if !t.decreasing_overall() {
            println!("FAIL: {stat} does not decrease from N = {:?} to N = {:?}", t.n.first(), t.n.last());
            return Ok(ExitCode::from(2));
        }
        println!("ok: {stat} decreases across the N ladder ({})", if t.strictly_decreasing() { "strictly" } else { "with inversions" });
    }
    Ok(ExitCode::SUCCESS)
}
