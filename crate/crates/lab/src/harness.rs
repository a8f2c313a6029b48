//! Convergence studies: particle ensembles against the reference PDE
//! solutions.
//!
//! Reference solutions are computed once per study and shared read-only;
//! replicas run on a rayon pool whose size comes from `ELEX_WORKERS`.
//! Results are collected in replica order and reduced sequentially, so the
//! report is a pure function of the configuration.

use std::path::{Path, PathBuf};

use elex_core::elastic::{solve_z, z_init_from, ZParams};
use elex_core::exclusion::simulate_z;
use elex_core::isomorphism::psi_map;
use elex_core::lattice::{Configuration, LatticeParams};
use elex_core::measure::{l1_distance, measure_distance, mollify_torus, EmpiricalMeasure, GridDensity, Measure};
use elex_core::spectral::{h_distance, DriftMonitor};
use elex_core::stefan::{flatten_frame, solve_stefan, StefanInit, StefanParams, StefanSolution};
use elex_core::testfn::CosineMode;
use elex_core::zero_range::{sample_initial, simulate_x, StuckPolicy, ZeroRangeState};
use elex_core::ExclusionConfiguration;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Process};
use crate::error::{csv_err, io_err, json_err, Error, Result};
use crate::stats::{holm, mean_stderr, welch};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "ELEX_WORKERS";

/// Family-wise level of the two-sample tests.
pub const TWO_SAMPLE_LEVEL: f64 = 0.01;

pub const X_STATS: [&str; 6] = ["d", "l1", "h", "y_d", "y_l1", "s_err"];
pub const Z_STATS: [&str; 6] = ["d", "l1", "h", "psi_d", "psi_l1", "psi_h"];

/// Mollifier width used for the L¹ comparison at lattice size `n`.
pub fn mollifier_width(n: usize) -> f64 {
    (n as f64).powf(-1.0 / 3.0)
}

pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("{WORKERS_ENV}={v} is not a count")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub n: usize,
    pub t: f64,
    pub statistic: String,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub replicas: usize,
}

/// Per-N summary over observation times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupRow {
    pub n: usize,
    pub statistic: String,
    /// `sup_t` of the ensemble mean.
    pub sup_of_mean: f64,
    /// Ensemble mean of the per-replica `sup_t`.
    pub mean_of_sup: f64,
    pub stderr_of_sup: Option<f64>,
    pub replicas: usize,
}

/// Welch test of `⟨f_1, μ⟩` between direct `Z` replicas and `Ψ(X)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleRow {
    pub n: usize,
    pub t: f64,
    pub mean_direct: f64,
    pub mean_pushforward: f64,
    pub t_stat: f64,
    /// `None` when both samples are constant.
    pub df: Option<f64>,
    pub p: f64,
    pub p_holm: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub n: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub process: Process,
    pub config_hash: String,
    pub provenance: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub statistics: Vec<String>,
    pub rows: Vec<StatRow>,
    pub sup: Vec<SupRow>,
    pub two_sample: Vec<TwoSampleRow>,
    pub failures: Vec<Failure>,
}

/// Behaviour of one statistic's `mean_of_sup` along the N ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Trend {
    pub n: Vec<usize>,
    pub values: Vec<f64>,
    /// Consecutive pairs `(N_i, N_{i+1})` where the error did not drop.
    pub inversions: Vec<(usize, usize)>,
}

impl Trend {
    pub fn strictly_decreasing(&self) -> bool {
        self.inversions.is_empty()
    }

    /// The hard check: the largest N beats the smallest.
    pub fn decreasing_overall(&self) -> bool {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => self.values.len() < 2 || b < a,
            _ => false,
        }
    }
}

impl ConvergenceReport {
    pub fn sup_row(&self, n: usize, statistic: &str) -> Option<&SupRow> {
        self.sup.iter().find(|r| r.n == n && r.statistic == statistic)
    }

    pub fn trend(&self, statistic: &str) -> Trend {
        let mut n = Vec::new();
        let mut values = Vec::new();
        for &k in &self.config.n_list {
            if let Some(r) = self.sup_row(k, statistic) {
                n.push(k);
                values.push(r.mean_of_sup);
            }
        }
        let inversions = n.windows(2).zip(values.windows(2)).filter(|(_, v)| v[1] >= v[0]).map(|(k, _)| (k[0], k[1])).collect();
        Trend { n, values, inversions }
    }

    /// Single inversions along the ladder, as human-readable warnings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.statistics {
            for (a, b) in self.trend(s).inversions {
                out.push(format!("{s}: error did not decrease from N = {a} to N = {b}"));
            }
        }
        if !self.failures.is_empty() {
            out.push(format!("{} replica(s) failed; ensembles are incomplete", self.failures.len()));
        }
        out
    }

    pub fn rejections(&self) -> usize {
        self.two_sample.iter().filter(|r| r.rejected).count()
    }
}

fn provenance(hash: &str) -> String {
    format!("elex-{}-cfg-{}", env!("CARGO_PKG_VERSION"), &hash[..12])
}

/// Reference frames at the observation times.
struct Reference {
    times: Vec<f64>,
    /// `u(·, t)` on `[0, 1]`, or `z(·, t)` for the exclusion picture.
    density: Vec<GridDensity>,
    /// `v(·, t)` on `[0, s(t)]`.
    v: Vec<GridDensity>,
    s: Vec<f64>,
}

fn stefan_reference(cfg: &ExperimentConfig, init: &StefanInit) -> Result<StefanSolution> {
    let mut p = StefanParams::new(cfg.a, cfg.solver.m, cfg.solver.dt, cfg.t_max, 0);
    p.record_times = cfg.observation_times.clone();
    Ok(solve_stefan(init, &p)?)
}

fn frame(times: &[f64], t: f64) -> Result<usize> {
    times
        .iter()
        .position(|&x| (x - t).abs() <= 1e-12 * (1.0 + t))
        .ok_or_else(|| Error::Input(format!("reference solution has no frame at t = {t}")))
}

fn x_reference(cfg: &ExperimentConfig, init: &StefanInit) -> Result<Reference> {
    let sol = stefan_reference(cfg, init)?;
    let mut r = Reference { times: cfg.observation_times.clone(), density: Vec::new(), v: Vec::new(), s: Vec::new() };
    for &t in &cfg.observation_times {
        let k = frame(&sol.times, t)?;
        r.density.push(flatten_frame(sol.s[k], &sol.v[k]));
        r.v.push(GridDensity::new(sol.x_nodes(k), sol.v[k].clone()).expect("sorted nodes"));
        r.s.push(sol.s[k]);
    }
    Ok(r)
}

fn z_reference(cfg: &ExperimentConfig, init: &StefanInit) -> Result<Reference> {
    let z0 = z_init_from(init, cfg.solver.m)?;
    let mut p = ZParams::new(cfg.a, cfg.solver.m, cfg.solver.dt, cfg.t_max, 0);
    p.record_times = cfg.observation_times.clone();
    let sol = solve_z(&z0, &p)?;
    let mut r = Reference { times: cfg.observation_times.clone(), density: Vec::new(), v: Vec::new(), s: Vec::new() };
    for &t in &cfg.observation_times {
        let k = frame(&sol.times, t)?;
        r.density.push(GridDensity::uniform(0.0, 1.0, sol.z[k].clone()).expect("finite z"));
        r.s.push(sol.boundary(k));
    }
    Ok(r)
}

/// `d`, mollified L¹ and `h` between an empirical measure and a density.
fn triple(emp: &EmpiricalMeasure, reference: &GridDensity, eps: f64, modes: u32) -> [f64; 3] {
    [
        measure_distance(emp, reference),
        l1_distance(&mollify_torus(emp, eps), &mollify_torus(reference, eps)),
        h_distance(emp, reference, modes),
    ]
}

struct ReplicaOut {
    /// `stats[time][statistic]`.
    stats: Vec<[f64; 6]>,
    f1_direct: Vec<f64>,
    f1_pushforward: Vec<f64>,
}

fn z_measure(z: &ExclusionConfiguration) -> EmpiricalMeasure {
    EmpiricalMeasure::from_weights(z.occupancy().iter().map(|&b| f64::from(b)))
}

fn x_replica(cfg: &ExperimentConfig, r: &Reference, c0: &Configuration, seed: u64) -> Result<ReplicaOut> {
    let n = c0.n();
    let params = LatticeParams::new(n, cfg.a)?;
    let states = simulate_x(c0.clone(), params, &r.times, seed, StuckPolicy::Hold, &mut ())?;
    let eps = mollifier_width(n);
    let mut stats = Vec::with_capacity(states.len());
    for (k, c) in states.iter().enumerate() {
        let emp = EmpiricalMeasure::from_configuration(c);
        let [d, l1, h] = triple(&emp, &r.density[k], eps, cfg.h_modes);
        let y = EmpiricalMeasure::from_weights(c.rho_vector().into_iter().map(f64::from));
        let y_d = measure_distance(&y, &r.v[k]);
        let y_l1 = l1_distance(&mollify_torus(&y, eps), &mollify_torus(&r.v[k], eps));
        let s_err = (c.boundary_s()? - r.s[k]).abs();
        stats.push([d, l1, h, y_d, y_l1, s_err]);
    }
    Ok(ReplicaOut { stats, f1_direct: Vec::new(), f1_pushforward: Vec::new() })
}

fn z_replica(cfg: &ExperimentConfig, r: &Reference, c0: &Configuration, seed: u64) -> Result<ReplicaOut> {
    let n = c0.n();
    let params = LatticeParams::new(n, cfg.a)?;
    let direct = simulate_z(psi_map(c0)?, params, &r.times, seed, StuckPolicy::Hold, &mut ())?;
    // X runs on its own stream of the same seed, independent of the Z stream.
    let xs = simulate_x(c0.clone(), params, &r.times, seed, StuckPolicy::Hold, &mut ())?;
    let eps = mollifier_width(n);
    let f1 = CosineMode(1);
    let mut out = ReplicaOut { stats: Vec::new(), f1_direct: Vec::new(), f1_pushforward: Vec::new() };
    for (k, (z, x)) in direct.iter().zip(&xs).enumerate() {
        let zd = z_measure(z);
        let zp = z_measure(&psi_map(x)?);
        let [d, l1, h] = triple(&zd, &r.density[k], eps, cfg.h_modes);
        let [pd, pl1, ph] = triple(&zp, &r.density[k], eps, cfg.h_modes);
        out.stats.push([d, l1, h, pd, pl1, ph]);
        out.f1_direct.push(zd.pair(&f1));
        out.f1_pushforward.push(zp.pair(&f1));
    }
    Ok(out)
}

/// Dispatches on `cfg.process`: `X` and `Y` share one study (the `y_*`
/// statistics compare `ρ(X)` with `v`), `Z` runs the exclusion study.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    match cfg.process {
        Process::X | Process::Y => run_convergence_x(cfg),
        Process::Z => run_convergence_z(cfg),
    }
}

pub fn run_convergence_x(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    run(cfg, &X_STATS, false)
}

pub fn run_convergence_z(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    run(cfg, &Z_STATS, true)
}

fn run(cfg: &ExperimentConfig, names: &[&str; 6], z: bool) -> Result<ConvergenceReport> {
    let profile = cfg.validate()?;
    let init = StefanInit::from_profile(&profile, cfg.solver.m)?;
    let reference = if z { z_reference(cfg, &init)? } else { x_reference(cfg, &init)? };
    let seeds = cfg.seeds();
    let starts: Vec<Configuration> = cfg.n_list.iter().map(|&n| sample_initial(&profile, n)).collect::<std::result::Result<_, _>>()?;
    let jobs: Vec<(usize, u64)> = (0..cfg.n_list.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let pool = worker_pool()?;
    let outs: Vec<Result<ReplicaOut>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, seed)| if z { z_replica(cfg, &reference, &starts[i], seed) } else { x_replica(cfg, &reference, &starts[i], seed) })
            .collect()
    });

    let hash = cfg.hash();
    let mut rep = ConvergenceReport {
        process: cfg.process,
        provenance: provenance(&hash),
        config_hash: hash,
        config: cfg.clone(),
        seeds: seeds.clone(),
        statistics: names.iter().map(|s| s.to_string()).collect(),
        rows: Vec::new(),
        sup: Vec::new(),
        two_sample: Vec::new(),
        failures: Vec::new(),
    };
    let n_times = reference.times.len();
    let mut pending_tests = Vec::new();
    for (i, &n) in cfg.n_list.iter().enumerate() {
        let mut ok: Vec<&ReplicaOut> = Vec::new();
        for ((_, seed), out) in jobs.iter().zip(&outs).filter(|((j, _), _)| *j == i) {
            match out {
                Ok(o) => ok.push(o),
                Err(e) => rep.failures.push(Failure { n, seed: *seed, error: e.to_string() }),
            }
        }
        if ok.is_empty() {
            continue;
        }
        for (si, name) in names.iter().enumerate() {
            let mut sup_of_mean = f64::NEG_INFINITY;
            for (k, &t) in reference.times.iter().enumerate() {
                let xs: Vec<f64> = ok.iter().map(|o| o.stats[k][si]).collect();
                let (mean, stderr) = mean_stderr(&xs);
                sup_of_mean = sup_of_mean.max(mean);
                rep.rows.push(StatRow { n, t, statistic: name.to_string(), mean, stderr, replicas: xs.len() });
            }
            let sups: Vec<f64> = ok.iter().map(|o| o.stats.iter().map(|s| s[si]).fold(f64::NEG_INFINITY, f64::max)).collect();
            let (mean_of_sup, stderr_of_sup) = mean_stderr(&sups);
            rep.sup.push(SupRow { n, statistic: name.to_string(), sup_of_mean, mean_of_sup, stderr_of_sup, replicas: sups.len() });
        }
        if z {
            for (k, &t) in reference.times.iter().enumerate().take(n_times) {
                let a: Vec<f64> = ok.iter().map(|o| o.f1_direct[k]).collect();
                let b: Vec<f64> = ok.iter().map(|o| o.f1_pushforward[k]).collect();
                if let Some(w) = welch(&a, &b) {
                    pending_tests.push((n, t, mean_stderr(&a).0, mean_stderr(&b).0, w));
                }
            }
        }
    }
    let ps: Vec<f64> = pending_tests.iter().map(|x| x.4.p).collect();
    for ((n, t, ma, mb, w), p_holm) in pending_tests.into_iter().zip(holm(&ps)) {
        rep.two_sample.push(TwoSampleRow {
            n,
            t,
            mean_direct: ma,
            mean_pushforward: mb,
            t_stat: w.t,
            df: w.df.is_finite().then_some(w.df),
            p: w.p,
            p_holm,
            rejected: p_holm < TWO_SAMPLE_LEVEL,
        });
    }
    Ok(rep)
}

pub const ROWS_CSV: &str = "convergence.csv";
pub const SUP_CSV: &str = "sup.csv";
pub const TWO_SAMPLE_CSV: &str = "two_sample.csv";
pub const SUMMARY_JSON: &str = "summary.json";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_table<T>(path: &Path, header: &[&str], rows: &[T], fields: impl Fn(&T) -> Vec<String>) -> Result<()> {
    let mut w = csv::Writer::from_writer(crate::io::create(path)?);
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(fields(r)).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Writes the three CSV tables and the JSON summary into `dir`; returns the
/// paths written.
pub fn emit_report(rep: &ConvergenceReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let rows = dir.join(ROWS_CSV);
    write_table(&rows, &["n", "t", "statistic", "mean", "stderr", "replicas"], &rep.rows, |r| {
        vec![r.n.to_string(), r.t.to_string(), r.statistic.clone(), r.mean.to_string(), opt(r.stderr), r.replicas.to_string()]
    })?;
    let sup = dir.join(SUP_CSV);
    write_table(&sup, &["n", "statistic", "sup_of_mean", "mean_of_sup", "stderr_of_sup", "replicas"], &rep.sup, |r| {
        vec![
            r.n.to_string(),
            r.statistic.clone(),
            r.sup_of_mean.to_string(),
            r.mean_of_sup.to_string(),
            opt(r.stderr_of_sup),
            r.replicas.to_string(),
        ]
    })?;
    let two = dir.join(TWO_SAMPLE_CSV);
    write_table(
        &two,
        &["n", "t", "mean_direct", "mean_pushforward", "t_stat", "df", "p", "p_holm", "rejected"],
        &rep.two_sample,
        |r| {
            vec![
                r.n.to_string(),
                r.t.to_string(),
                r.mean_direct.to_string(),
                r.mean_pushforward.to_string(),
                r.t_stat.to_string(),
                opt(r.df),
                r.p.to_string(),
                r.p_holm.to_string(),
                r.rejected.to_string(),
            ]
        },
    )?;
    let summary = dir.join(SUMMARY_JSON);
    let mut text = serde_json::to_string_pretty(rep).map_err(json_err(&summary))?;
    text.push('\n');
    std::fs::write(&summary, text).map_err(io_err(&summary))?;
    Ok(vec![rows, sup, two, summary])
}

/// Reads back the JSON summary written by [`emit_report`].
pub fn parse_report(dir: &Path) -> Result<ConvergenceReport> {
    let path = dir.join(SUMMARY_JSON);
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(json_err(&path))
}

/// Reads the per-(N, t, statistic) table.
pub fn read_rows_csv(path: &Path) -> Result<Vec<StatRow>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = || Error::Input(format!("{}: malformed row {:?}", path.display(), rec));
        let f = |i: usize| rec.get(i).ok_or_else(bad);
        let num = |i: usize| -> Result<f64> { f(i)?.parse().map_err(|_| bad()) };
        out.push(StatRow {
            n: f(0)?.parse().map_err(|_| bad())?,
            t: num(1)?,
            statistic: f(2)?.to_string(),
            mean: num(3)?,
            stderr: if f(4)?.is_empty() { None } else { Some(num(4)?) },
            replicas: f(5)?.parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// Ensemble mean of `h_N(X_t) + 2 ∫_0^t ⟨X, X⟩_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub n: usize,
    pub t: f64,
    pub mean: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftStudy {
    pub a: f64,
    pub profile: String,
    pub n_list: Vec<usize>,
    /// Observation times; `t = 0` is always added.
    pub times: Vec<f64>,
    pub seed: u64,
    pub replicas: usize,
}

pub fn run_drift(study: &DriftStudy) -> Result<Vec<DriftRow>> {
    let profile = crate::io::load_profile(&study.profile)?;
    let mut times = vec![0.0];
    times.extend(study.times.iter().copied().filter(|&t| t > 0.0));
    let seeds: Vec<u64> = (0..study.replicas as u64).map(|i| elex_core::rng::replica_seed(study.seed, i)).collect();
    let pool = worker_pool()?;
    let mut rows = Vec::new();
    for &n in &study.n_list {
        let c0 = sample_initial(&profile, n)?;
        let params = LatticeParams::new(n, study.a)?;
        let per: Vec<Result<Vec<f64>>> = pool.install(|| {
            seeds
                .par_iter()
                .map(|&seed| {
                    let mut st = ZeroRangeState::new(c0.clone(), params, seed)?.with_policy(StuckPolicy::Hold);
                    let mut mon = DriftMonitor::new(n)?;
                    let mut vals = Vec::with_capacity(times.len());
                    for &t in &times {
                        st.advance_to(t, &mut mon)?;
                        vals.push(mon.sample(st.config()).functional());
                    }
                    Ok(vals)
                })
                .collect()
        });
        let per: Vec<Vec<f64>> = per.into_iter().collect::<Result<_>>()?;
        for (k, &t) in times.iter().enumerate() {
            let xs: Vec<f64> = per.iter().map(|v| v[k]).collect();
            let (mean, stderr) = mean_stderr(&xs);
            rows.push(DriftRow { n, t, mean, stderr });
        }
    }
    Ok(rows)
}

/// `intercept + slope · t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineBound {
    pub intercept: f64,
    pub slope: f64,
}

impl AffineBound {
    pub fn at(&self, t: f64) -> f64 {
        self.intercept + self.slope * t
    }

    /// The smallest affine envelope of the rows at lattice size `n` that
    /// passes through the `t = 0` value, scaled by `slack`.
    pub fn fit(rows: &[DriftRow], n: usize, slack: f64) -> Option<Self> {
        let at_n: Vec<&DriftRow> = rows.iter().filter(|r| r.n == n).collect();
        let start = at_n.iter().find(|r| r.t == 0.0)?.mean;
        let slope = at_n.iter().filter(|r| r.t > 0.0).map(|r| (r.mean - start) / r.t).fold(0.0, f64::max);
        Some(Self { intercept: slack * start, slope: slack * slope })
    }

    pub fn violations<'a>(&self, rows: &'a [DriftRow]) -> Vec<&'a DriftRow> {
        rows.iter().filter(|r| r.mean > self.at(r.t)).collect()
    }
}
