//! Acceptance criteria 1–9. Each criterion prints one `PASS`/`FAIL` line;
//! the test fails if any criterion fails. Oracles are computed here from
//! first principles, not through the code under test.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use elex::checks::{equivalence_summary, iso_report, spectral_report};
use elex::config::SolverGrid;
use elex::harness::{run_drift, AffineBound, DriftStudy};
use elex::{run_convergence_x, run_convergence_z, ExperimentConfig, Process};
use elex_core::elastic::{v_to_z, z_to_v, HermiteDensity};
use elex_core::isomorphism::Rational;
use elex_core::lattice::{Configuration, LatticeParams};
use elex_core::measure::{mollify_torus, EmpiricalMeasure};
use elex_core::profile::Profile;
use elex_core::rng::replica_seed;
use elex_core::spectral::phi_psi_closed_form;
use elex_core::stefan::{flatten_u, positivity_check, solve_stefan, stationary_state, weak_residual, StefanInit, StefanParams};
use elex_core::testfn::CosineMode;
use elex_core::zero_range::{simulate_x, StuckPolicy};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erf;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(limit: Duration, started: Instant) -> (bool, String) {
    let el = started.elapsed();
    (el <= limit, format!("{:.1}s (limit {}s)", el.as_secs_f64(), limit.as_secs()))
}

// --- 1: exact generator conjugacy -------------------------------------------

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut weakest_control = f64::INFINITY;
    for n in 2..=5 {
        for a in 0..=2u64 {
            let a = Rational::integer(a);
            let r = iso_report(n, a, true).expect("iso report");
            worst = worst.max(r.max_discrepancy);
            if n >= 3 {
                let c = iso_report(n, a, false).expect("control report");
                weakest_control = weakest_control.min(c.max_discrepancy);
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(10), t0);
    outcome(
        worst == 0.0 && weakest_control > 0.0 && fast,
        format!("max discrepancy {worst}, smallest control discrepancy {weakest_control}, {time}"),
    )
}

// --- 2: spectral identities ---------------------------------------------------

fn difference_operators(n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let nf = n as f64;
    let mut delta = vec![vec![0.0; n]; n];
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        if i > 0 {
            delta[i][i - 1] = nf * nf;
            delta[i][i] -= nf * nf;
            d[i][i] = nf;
            d[i][i - 1] = -nf;
        }
        if i + 1 < n {
            delta[i][i + 1] = nf * nf;
            delta[i][i] -= nf * nf;
        }
    }
    (delta, d)
}

fn apply(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn basis_oracle(n: usize) -> f64 {
    let nf = n as f64;
    let xs: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64 / (2.0 * nf)).collect();
    let psi: Vec<Vec<f64>> =
        (0..n).map(|k| xs.iter().map(|&x| if k == 0 { 1.0 } else { SQRT_2 * (k as f64 * PI * x).cos() }).collect()).collect();
    let phi: Vec<Vec<f64>> = (0..n).map(|k| xs.iter().map(|&x| SQRT_2 * (k as f64 * PI * (x - 0.5 / nf)).sin()).collect()).collect();
    let lam: Vec<f64> = (0..n).map(|k| 2.0 * nf * (PI * k as f64 / (2.0 * nf)).sin()).collect();
    let (delta, d) = difference_operators(n);
    let mut worst = 0.0f64;
    for k in 0..n {
        let dp = apply(&delta, &psi[k]);
        let fp = apply(&d, &psi[k]);
        for i in 0..n {
            worst = worst.max((dp[i] + lam[k] * lam[k] * psi[k][i]).abs() / (nf * nf));
            if k > 0 {
                worst = worst.max((fp[i] + lam[k] * phi[k][i]).abs() / nf);
            }
        }
        for l in 0..n {
            let g: f64 = psi[k].iter().zip(&psi[l]).map(|(a, b)| a * b).sum::<f64>() / nf;
            worst = worst.max((g - if k == l { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

fn discrete_pairing_oracle(n: usize) -> f64 {
    let nf = n as f64;
    let mut worst = 0.0f64;
    for k in 1..n {
        for j in 0..n {
            let direct: f64 = (0..n)
                .map(|i| {
                    let x = (2 * i + 1) as f64 / (2.0 * nf);
                    let phi = SQRT_2 * (k as f64 * PI * (x - 0.5 / nf)).sin();
                    let psi = if j == 0 { 1.0 } else { SQRT_2 * (j as f64 * PI * x).cos() };
                    phi * psi
                })
                .sum::<f64>()
                / nf;
            worst = worst.max((direct - phi_psi_closed_form(n, k, j).expect("closed form")).abs());
        }
    }
    worst
}

// `2 ∫_0^1 sin(kπx) cos(jπx) dx` from the product-to-sum antiderivative.
fn continuous_pairing_exact(k: u32, j: u32) -> f64 {
    let part = |m: i64| if m == 0 { 0.0 } else { (1.0 - (m as f64 * PI).cos()) / (m as f64 * PI) };
    part(i64::from(k) + i64::from(j)) + part(i64::from(k) - i64::from(j))
}

// The window average of a unit atom at `x0` is the box `1/2ε` on the arc
// `[x0 - ε, x0 + ε]`; its `k`-th Fourier coefficient is
// `e^{-2πikx0} sin(2πkε) / 2πkε`.
fn multiplier_oracle(eps: f64, x0: f64, modes: u32) -> f64 {
    let atom = EmpiricalMeasure::from_atoms(vec![(x0, 1.0)]).expect("atom");
    let k = mollify_torus(&atom, eps);
    let mut worst = 0.0f64;
    for kk in 1..=modes {
        let w = 2.0 * PI * f64::from(kk);
        let mult = (w * eps).sin() / (w * eps);
        worst = worst.max((k.integrate_with(|x| (w * x).cos()) - mult * (w * x0).cos()).abs());
        worst = worst.max((k.integrate_with(|x| (w * x).sin()) - mult * (w * x0).sin()).abs());
    }
    worst
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let rep = spectral_report(64).expect("spectral report");
    let mut detail: Vec<String> = rep.identities.iter().map(|c| format!("{} {:.1e}", c.name, c.max_residual)).collect();
    let basis = (2..=64).map(basis_oracle).fold(0.0, f64::max);
    let discrete = (2..=64).map(discrete_pairing_oracle).fold(0.0, f64::max);
    let mut continuous = 0.0f64;
    for k in 1..=16 {
        for j in 1..=16 {
            let closed = elex_core::spectral::phi_psi_pairing_continuous(k, j).expect("pairing");
            continuous = continuous.max((closed - continuous_pairing_exact(k, j)).abs());
        }
    }
    let example = continuous_pairing_exact(1, 2) + 4.0 / (3.0 * PI);
    let multiplier = [(0.03, 0.1), (0.1, 0.97), (0.25, 0.5)].iter().map(|&(e, x)| multiplier_oracle(e, x, 32)).fold(0.0, f64::max);
    detail.push(format!("oracles: basis {basis:.1e} discrete {discrete:.1e} continuous {continuous:.1e} multiplier {multiplier:.1e}"));
    let (fast, time) = within(Duration::from_secs(30), t0);
    detail.push(time);
    outcome(
        rep.all_pass() && basis <= 1e-12 && discrete <= 1e-12 && continuous <= 1e-8 && example.abs() <= 1e-12 && multiplier <= 1e-10 && fast,
        detail.join(", "),
    )
}

// --- 3: small-N law ------------------------------------------------------------

/// `Ω'_N`: mass `N`, positive on a prefix, zero after.
fn states(n: usize) -> Vec<Vec<u32>> {
    fn rec(left: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            let mut s = cur.clone();
            s.resize(cur.len() + slots, 0);
            out.push(s);
            return;
        }
        if slots == 0 {
            return;
        }
        for h in 1..=left {
            cur.push(h);
            rec(left - h, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n as u32, n, &mut Vec::new(), &mut out);
    out
}

/// Dense generator from the jump and drift rules.
fn generator(n: usize, a: f64, st: &[Vec<u32>]) -> Vec<Vec<f64>> {
    let idx = |s: &Vec<u32>| st.iter().position(|t| t == s).expect("closed state space");
    let nf = n as f64;
    let mut q = vec![vec![0.0; st.len()]; st.len()];
    for (i, s) in st.iter().enumerate() {
        let mut add = |t: Vec<u32>, r: f64| {
            let j = idx(&t);
            if j != i {
                q[i][j] += r;
                q[i][i] -= r;
            }
        };
        for x in 0..n {
            let r = nf * nf * f64::from(s[x].saturating_sub(1));
            if r == 0.0 {
                continue;
            }
            for y in [x.wrapping_sub(1), x + 1] {
                if y < n {
                    let mut t = s.clone();
                    t[x] -= 1;
                    t[y] += 1;
                    add(t, r);
                }
            }
        }
        let mut t = vec![0; n];
        t[0] = s[0] + s[1];
        t[1..n - 1].copy_from_slice(&s[2..n]);
        add(t, a * nf);
    }
    q
}

/// `p0 e^{tQ}` by uniformization.
fn transient_law(q: &[Vec<f64>], p0: &[f64], t: f64) -> Vec<f64> {
    let m = q.len();
    let lam = (0..m).map(|i| -q[i][i]).fold(0.0, f64::max);
    let mut term = p0.to_vec();
    let mut weight = (-lam * t).exp();
    let mut out: Vec<f64> = term.iter().map(|p| weight * p).collect();
    for k in 1..2000 {
        let next: Vec<f64> = (0..m).map(|j| (0..m).map(|i| term[i] * (q[i][j] / lam + if i == j { 1.0 } else { 0.0 })).sum()).collect();
        term = next;
        weight *= lam * t / k as f64;
        for j in 0..m {
            out[j] += weight * term[j];
        }
        if k as f64 > lam * t && weight < 1e-18 {
            break;
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let (n, a, t, replicas) = (3usize, 1.0, 0.1, 100_000u64);
    let st = states(n);
    let q = generator(n, a, &st);
    let start = vec![3, 0, 0];
    let p0: Vec<f64> = st.iter().map(|s| if *s == start { 1.0 } else { 0.0 }).collect();
    let law = transient_law(&q, &p0, t);
    let params = LatticeParams::new(n, a).expect("params");
    let mut counts = vec![0u64; st.len()];
    for i in 0..replicas {
        let c0 = Configuration::admissible(start.clone()).expect("start");
        let out = simulate_x(c0, params, &[t], replica_seed(7, i), StuckPolicy::Hold, &mut ()).expect("simulate");
        let k = st.iter().position(|s| s.as_slice() == out[0].heights()).expect("state in Ω'_N");
        counts[k] += 1;
    }
    let mut chi2 = 0.0;
    let mut bins = 0;
    for (c, p) in counts.iter().zip(&law) {
        let e = p * replicas as f64;
        if e >= 5.0 {
            chi2 += (*c as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    let pval = ChiSquared::new((bins - 1) as f64).expect("df").sf(chi2);
    let (fast, time) = within(Duration::from_secs(120), t0);
    let law_txt: Vec<String> = law.iter().map(|p| format!("{p:.4}")).collect();
    outcome(
        pval > 1e-3 && fast,
        format!("{} states, exact law [{}], chi2 = {chi2:.2} on {} df, p = {pval:.3}, {time}", st.len(), law_txt.join(" "), bins - 1),
    )
}

// --- 4: Stefan solver -------------------------------------------------------

fn similarity_lambda() -> f64 {
    // λ e^{λ²} (1 + erf λ) = 1/√π for unit latent heat and unit jump.
    let g = |l: f64| l * (l * l).exp() * (1.0 + erf(l)) - 1.0 / PI.sqrt();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn weak_records(t_max: f64) -> Vec<f64> {
    let mut r = StefanParams::graded_records(t_max, 1e-7, 0.05, 1e-3);
    r.push(0.1);
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

fn weak_max(m: usize, dt: f64, at: &[f64]) -> f64 {
    let init = StefanInit::from_profile(&Profile::HALF_STEP, m).expect("init");
    let mut p = StefanParams::new(1.0, m, dt, 0.5, 0);
    p.record_times = weak_records(0.5);
    let sol = solve_stefan(&init, &p).expect("solve");
    let u = flatten_u(&sol);
    let mut worst = 0.0f64;
    for &t in at {
        for j in 0..=8 {
            worst = worst.max(weak_residual(&u, &CosineMode(j), t).expect("recorded").abs());
        }
    }
    worst
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let m = 400;
    let init = StefanInit::from_profile(&Profile::HALF_STEP, m).expect("init");
    let mut p = StefanParams::new(1.0, m, 1e-5, 0.5, 0);
    p.record_times = weak_records(0.5);
    let sol = solve_stefan(&init, &p).expect("solve");
    let mass = (0..sol.len()).map(|k| sol.mass_defect(k).abs()).fold(0.0, f64::max);
    let positive = positivity_check(&sol);

    // Drift-free similarity solution, valid while the layer around x = 1/2
    // has not reached x = 0.
    let lam = similarity_lambda();
    let eb = erf(lam);
    let times = [0.0025, 0.005, 0.01];
    let mut p0 = StefanParams::new(0.0, m, 1e-5, 0.01, 0);
    p0.record_times = times.to_vec();
    let sol0 = solve_stefan(&init, &p0).expect("solve a = 0");
    let mut erf_err = 0.0f64;
    for &t in &times {
        let k = sol0.frame_index(t).expect("frame");
        erf_err = erf_err.max((sol0.s[k] - (0.5 + 2.0 * lam * t.sqrt())).abs());
        for (x, v) in sol0.x_nodes(k).iter().zip(&sol0.v[k]) {
            let exact = (eb - erf((x - 0.5) / (2.0 * t.sqrt()))) / (1.0 + eb);
            erf_err = erf_err.max((v - exact).abs());
        }
    }

    let at = [0.1, 0.5];
    let ladder: Vec<f64> = [200usize, 400, 800].iter().map(|&mm| weak_max(mm, 1e-5 * 400.0 / mm as f64, &at)).collect();
    let halving = ladder.windows(2).all(|w| w[0] / w[1] >= 2.0);
    let (fast, time) = within(Duration::from_secs(60), t0);
    outcome(
        mass <= 1e-6 && erf_err <= 1e-3 && ladder[1] <= 5e-3 && halving && positive && fast,
        format!(
            "mass defect {mass:.1e}, erf error {erf_err:.1e}, weak residual M=200/400/800 {:.2e}/{:.2e}/{:.2e}, positivity {positive}, {time}",
            ladder[0], ladder[1], ladder[2]
        ),
    )
}

// --- 5: dual-solver equivalence ----------------------------------------------

fn criterion_5() -> Outcome {
    let t0 = Instant::now();
    let errs: Vec<f64> = [200usize, 400, 800]
        .iter()
        .map(|&m| equivalence_summary(&Profile::HALF_STEP, 1.0, 0.25, m, 1e-5 * 400.0 / m as f64, 25).expect("equivalence").max_sup)
        .collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let (fast, time) = within(Duration::from_secs(120), t0);
    outcome(
        errs[1] <= 5e-3 && ratios.iter().all(|&r| r >= 1.8) && fast,
        format!("sup difference M=200/400/800 {:.2e}/{:.2e}/{:.2e}, ratios {:.2}/{:.2}, {time}", errs[0], errs[1], errs[2], ratios[0], ratios[1]),
    )
}

// --- 6: transform round trips ------------------------------------------------

fn round_trip(s: f64, v: &[f64], m: usize) -> f64 {
    let z = v_to_z(s, v, m).expect("v to z");
    let (s2, v2) = z_to_v(&z, m).expect("z to v");
    let mut worst = (s - s2).abs();
    for (a, b) in v.iter().zip(&v2) {
        worst = worst.max((a - b).abs());
    }
    // τ ∘ υ on a fine grid, and υ(s) = 1 from unit mass.
    let up = HermiteDensity::new(v.iter().map(|&x| s * (1.0 + x)).collect());
    worst = worst.max((up.total() - 1.0).abs());
    for i in 0..=4000 {
        let xi = i as f64 / 4000.0;
        worst = worst.max((up.inverse(up.integral(xi)) - xi).abs());
    }
    worst
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let m = 400;
    let mut cases = Vec::new();
    for amp in [0.25, 0.5, 1.0] {
        let p = Profile::Bump { amp };
        cases.push((format!("bump {amp}"), p.s0(), p.v0_nodes(m)));
    }
    for a in [0.5, 1.0, 2.0] {
        let st = stationary_state(a, m);
        cases.push((format!("stationary a={a}"), st.s0, st.v));
    }
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (name, s, v) in &cases {
        let e = round_trip(*s, v, m);
        worst = worst.max(e);
        detail.push(format!("{name} {e:.1e}"));
    }
    let (fast, time) = within(Duration::from_secs(5), t0);
    detail.push(time);
    outcome(worst <= 1e-6 && fast, detail.join(", "))
}

// --- 7: hydrodynamic convergence ---------------------------------------------

fn ladder_line(rep: &elex::ConvergenceReport, stat: &str) -> (bool, bool, String) {
    let tr = rep.trend(stat);
    let last = *tr.values.last().expect("rows");
    let vals: Vec<String> = tr.n.iter().zip(&tr.values).map(|(n, v)| format!("{n}:{v:.4}")).collect();
    let n_max = *tr.n.last().expect("rows");
    let som = rep.sup_row(n_max, stat).expect("sup row").sup_of_mean;
    (tr.strictly_decreasing(), last <= 0.05, format!("{}, sup-of-mean at {n_max} {som:.4}", vals.join(" ")))
}

fn criterion_7() -> Outcome {
    let t0 = Instant::now();
    let x = run_convergence_x(&ExperimentConfig::default()).expect("X study");
    let z = run_convergence_z(&ExperimentConfig { process: Process::Z, ..ExperimentConfig::default() }).expect("Z study");
    let (xd, xs, xv) = ladder_line(&x, "l1");
    let (zd, zs, zv) = ladder_line(&z, "l1");
    let rejected = z.rejections();
    let tests = z.two_sample.len();
    let clean = x.failures.is_empty() && z.failures.is_empty();
    outcome(
        xd && xs && zd && zs && rejected == 0 && clean,
        format!(
            "X L1 mean-of-sup [{xv}] decreasing {xd} final<=0.05 {xs}; Z L1 mean-of-sup [{zv}] decreasing {zd} final<=0.05 {zs}; two-sample rejections {rejected}/{tests}; {:.0}s",
            t0.elapsed().as_secs_f64()
        ),
    )
}

// --- 8: drift functional -----------------------------------------------------

fn criterion_8() -> Outcome {
    let study = DriftStudy {
        a: 1.0,
        profile: "half-step".into(),
        n_list: vec![32, 64, 128],
        times: vec![0.1, 0.2, 0.3, 0.4, 0.5],
        seed: 11,
        replicas: 200,
    };
    let rows = run_drift(&study).expect("drift study");
    let bound = AffineBound::fit(&rows, 32, 1.25).expect("fit");
    let bad = bound.violations(&rows);
    let at_half: Vec<String> = rows.iter().filter(|r| r.t == 0.5).map(|r| format!("{}:{:.3}", r.n, r.mean)).collect();
    outcome(
        bad.is_empty(),
        format!(
            "bound {:.3} + {:.3} T fitted at N=32, mean at T=0.5 [{}], violations {}",
            bound.intercept,
            bound.slope,
            at_half.join(" "),
            bad.len()
        ),
    )
}

// --- 9: determinism --------------------------------------------------------

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("output dir")
        .map(|e| {
            let p = e.expect("entry").path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).expect("read"))
        })
        .collect();
    files.sort();
    files
}

fn run_bin(args: &[&str], workers: &str) {
    let st = Command::new(env!("CARGO_BIN_EXE_elex")).args(args).env("ELEX_WORKERS", workers).output().expect("spawn elex");
    assert!(st.status.success(), "elex {args:?}: {}", String::from_utf8_lossy(&st.stderr));
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().expect("tempdir");
    let cfg = ExperimentConfig {
        process: Process::Z,
        n_list: vec![16, 32],
        t_max: 0.02,
        observation_times: elex::config::uniform_times(0.02, 4),
        replicas: 30,
        solver: SolverGrid { m: 100, dt: 1e-4 },
        ..ExperimentConfig::default()
    };
    let cfg_path = tmp.path().join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).expect("json")).expect("write config");
    let out = tmp.path().join("out");
    let (c, o) = (cfg_path.to_str().unwrap(), out.to_str().unwrap());
    let mut snaps = Vec::new();
    for workers in ["1", "1", "3"] {
        run_bin(&["converge-z", "--config", c, "--out", o], workers);
        snaps.push(snapshot(&out));
        std::fs::remove_dir_all(&out).expect("clean");
    }
    let traj = tmp.path().join("traj");
    let mut sims = Vec::new();
    for _ in 0..2 {
        let t = traj.to_str().unwrap();
        let csv = format!("{t}/x.csv");
        let ev = format!("{t}/x.jsonl");
        run_bin(&["simulate-x", "--n", "32", "--t-max", "0.05", "--seed", "5", "--out", &csv, "--events", &ev], "1");
        sims.push(snapshot(&traj));
        std::fs::remove_dir_all(&traj).expect("clean");
    }
    let files = snaps[0].len();
    let bytes: usize = snaps[0].iter().map(|(_, b)| b.len()).sum();
    outcome(
        snaps[0] == snaps[1] && snaps[1] == snaps[2] && sims[0] == sims[1] && files == 4,
        format!("converge-z twice plus a 3-worker rerun: {files} files, {bytes} bytes identical; simulate-x trajectories and event logs identical"),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let only: Option<u32> = std::env::var("ELEX_CRITERION").ok().and_then(|v| v.parse().ok());
    let mut failed = Vec::new();
    for (id, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let o = f();
        let line = format!("criterion {id}: {} ({})\n", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        // Bypasses the test harness's capture so the lines always show.
        std::io::stdout().write_all(line.as_bytes()).expect("stdout");
        if !o.pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
