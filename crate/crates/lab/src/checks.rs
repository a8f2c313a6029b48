//! JSON-reportable deterministic checks: generator conjugacy, spectral
//! identities and the dual-solver equivalence.

use std::f64::consts::PI;

use elex_core::elastic::{equivalence_check, solve_z, z_init_from, ZParams};
use elex_core::isomorphism::{exact_conjugacy_check, Rational};
use elex_core::measure::{mollify_torus, EmpiricalMeasure, Measure};
use elex_core::profile::Profile;
use elex_core::quadrature::GaussLegendre;
use elex_core::rng::{seeded, STREAM_INIT};
use elex_core::spectral::{
    antisymmetry_residual, degenerate_pairs, phi_psi_pairing_continuous, phi_psi_pairing_n, trig_sum_identity_check,
    verify_basis_properties, DifferenceOperators, SpectralError,
};
use elex_core::stefan::{solve_stefan, StefanInit, StefanParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parses `p`, `p/q` or a terminating decimal such as `1.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Input(format!("`{s}` is not a non-negative rational"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        return Rational::new(p, q).ok_or_else(bad);
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
        return Rational::new(num, den).ok_or_else(bad);
    }
    Ok(Rational::integer(s.parse().map_err(|_| bad())?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchRecord {
    pub from: Vec<u32>,
    pub to: Vec<u32>,
    pub q_x: f64,
    pub q_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoReport {
    pub n: usize,
    pub a: String,
    pub left_hops: bool,
    pub n_states: usize,
    pub max_discrepancy: f64,
    /// Moves from an image state that leave the image of `Ψ`.
    pub stray_moves: usize,
    pub mismatches: Vec<MismatchRecord>,
}

pub fn iso_report(n: usize, a: Rational, left_hops: bool) -> Result<IsoReport> {
    let r = exact_conjugacy_check(n, a, left_hops)?;
    Ok(IsoReport {
        n,
        a: format!("{}/{}", a.num, a.den),
        left_hops,
        n_states: r.n_states,
        max_discrepancy: r.max_discrepancy(),
        stray_moves: r.stray_moves,
        mismatches: r.mismatches.into_iter().map(|m| MismatchRecord { from: m.from, to: m.to, q_x: m.q_x, q_z: m.q_z }).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &str, cases: usize, max_residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), cases, max_residual, tolerance, pass: max_residual <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub max_n: usize,
    pub identities: Vec<IdentityCheck>,
    /// Pairs `(j, k)` left out of the trigonometric identity, summed over N.
    pub degenerate_pairs_excluded: usize,
}

impl SpectralReport {
    pub fn all_pass(&self) -> bool {
        self.identities.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.identities.iter().find(|c| c.name == name)
    }
}

/// Largest `N` used for the trigonometric identity.
pub const TRIG_MAX_N: usize = 32;
/// Largest mode of the mollifier multiplier check.
pub const MULTIPLIER_MODES: u32 = 32;
/// Largest index of the continuous pairing check.
pub const CONTINUOUS_MAX_INDEX: u32 = 16;

/// `∫_0^1 2 sin(kπx) cos(jπx) dx` by composite Gauss–Legendre.
pub fn continuous_pairing_quadrature(k: u32, j: u32) -> f64 {
    let gl = GaussLegendre::new(20);
    gl.integrate_composite(0.0, 1.0, 64, |x| 2.0 * (f64::from(k) * PI * x).sin() * (f64::from(j) * PI * x).cos())
}

/// Largest deviation of `∫ e^{2πikx} K_ε μ(x) dx` from `sinc(2πkε) μ̂(k)`
/// over `1 ≤ k ≤ modes`, real and imaginary parts.
pub fn multiplier_residual(m: &EmpiricalMeasure, eps: f64, modes: u32) -> f64 {
    let k = mollify_torus(m, eps);
    let mut worst = 0.0f64;
    for kk in 1..=modes {
        let w = 2.0 * PI * f64::from(kk);
        let mult = (w * eps).sin() / (w * eps);
        let re = k.integrate_with(|x| (w * x).cos()) - mult * m.pair_fn(&|x| (w * x).cos());
        let im = k.integrate_with(|x| (w * x).sin()) - mult * m.pair_fn(&|x| (w * x).sin());
        worst = worst.max(re.abs()).max(im.abs());
    }
    worst
}

/// Runs every spectral identity for `2 ≤ N ≤ max_n`.
pub fn spectral_report(max_n: usize) -> Result<SpectralReport> {
    use rand::Rng;
    if max_n < 2 {
        return Err(SpectralError::TooSmall.into());
    }
    let mut rng = seeded(0x5eed, STREAM_INIT);
    let mut out = Vec::new();

    let (mut cases, mut worst) = (0, 0.0f64);
    for n in 2..=max_n {
        worst = worst.max(verify_basis_properties(n, 16, &mut rng)?.max());
        cases += 1;
    }
    out.push(IdentityCheck::new("basis_properties", cases, worst, 1e-12));

    let (mut cases, mut worst) = (0, 0.0f64);
    for n in 2..=max_n {
        let ops = DifferenceOperators::new(n)?;
        let nf = n as f64;
        let mut r = if ops.delta_is_symmetric() { 0.0 } else { f64::INFINITY };
        r = ops.delta_row_sums().iter().fold(r, |w, x| w.max(x.abs() / (nf * nf)));
        for (i, c) in ops.d_column_sums().iter().enumerate() {
            let expect = if i == 0 { -nf } else if i == n - 1 { nf } else { 0.0 };
            r = r.max((c - expect).abs() / nf);
        }
        worst = worst.max(r);
        cases += 1;
    }
    out.push(IdentityCheck::new("operator_structure", cases, worst, 1e-12));

    let (mut cases, mut worst, mut excluded) = (0, 0.0f64, 0);
    for n in 2..=max_n.min(TRIG_MAX_N) {
        excluded += degenerate_pairs(n).len();
        for j in 0..n {
            for k in 0..n {
                for m in 1..=n {
                    match trig_sum_identity_check(n, j, k, m) {
                        Ok(r) => {
                            worst = worst.max(r);
                            cases += 1;
                        }
                        Err(SpectralError::Degenerate) => {}
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }
    out.push(IdentityCheck::new("trig_sum_identity", cases, worst, 1e-10));

    let (mut cases, mut worst) = (0, 0.0f64);
    for n in 2..=max_n {
        for k in 1..n {
            for j in 0..n {
                worst = worst.max(phi_psi_pairing_n(n, k, j)?.residual());
                cases += 1;
            }
        }
    }
    out.push(IdentityCheck::new("phi_psi_discrete", cases, worst, 1e-12));

    let (mut cases, mut worst) = (0, 0.0f64);
    for k in 1..=CONTINUOUS_MAX_INDEX {
        for j in 1..=CONTINUOUS_MAX_INDEX {
            worst = worst.max((phi_psi_pairing_continuous(k, j)? - continuous_pairing_quadrature(k, j)).abs());
            cases += 1;
        }
    }
    out.push(IdentityCheck::new("phi_psi_continuous", cases, worst, 1e-8));

    let (mut cases, mut worst) = (0, 0.0f64);
    for n in 2..=max_n {
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        worst = worst.max(antisymmetry_residual(n, &b)?);
        cases += 1;
    }
    out.push(IdentityCheck::new("antisymmetry", cases, worst, 1e-12));

    let (mut cases, mut worst) = (0, 0.0f64);
    for &eps in &[0.03, 0.1, 0.25] {
        for _ in 0..4 {
            let atoms: Vec<(f64, f64)> = (0..7).map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect();
            let m = EmpiricalMeasure::from_atoms(atoms).expect("finite atoms");
            worst = worst.max(multiplier_residual(&m, eps, MULTIPLIER_MODES));
            cases += 1;
        }
    }
    out.push(IdentityCheck::new("mollifier_multiplier", cases, worst, 1e-10));

    Ok(SpectralReport { max_n, identities: out, degenerate_pairs_excluded: excluded })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceSummary {
    pub a: f64,
    pub m: usize,
    pub dt: f64,
    pub t_max: f64,
    pub times: Vec<f64>,
    pub sup_diff: Vec<f64>,
    pub l1_diff: Vec<f64>,
    pub boundary_diff: Vec<f64>,
    /// `K z_y + a` at `y = 0` (imposed) and at `y = 1` (not imposed).
    pub z_flux_residual_left: Vec<f64>,
    pub z_flux_residual_right: Vec<f64>,
    /// `z(0, t)` (not imposed) and `z(1, t)` (imposed).
    pub z_value_left: Vec<f64>,
    pub z_value_right: Vec<f64>,
    pub v_robin_residual: Vec<f64>,
    pub saturated_steps: u64,
    pub max_sup: f64,
    pub max_l1: f64,
}

/// Solves both pictures from `profile` and compares them at `frames`
/// uniformly spaced times.
pub fn equivalence_summary(profile: &Profile, a: f64, t_max: f64, m: usize, dt: f64, frames: usize) -> Result<EquivalenceSummary> {
    let init = StefanInit::from_profile(profile, m)?;
    let st = solve_stefan(&init, &StefanParams::new(a, m, dt, t_max, frames))?;
    let zs = solve_z(&z_init_from(&init, m)?, &ZParams::new(a, m, dt, t_max, frames))?;
    let rep = equivalence_check(&st, &zs, 0.0)?;
    let idx: Vec<usize> = rep.times.iter().map(|&t| zs.frame_index(t).expect("shared frame")).collect();
    Ok(EquivalenceSummary {
        a,
        m,
        dt,
        t_max,
        z_flux_residual_left: idx.iter().map(|&k| zs.flux_residual_left(k)).collect(),
        z_flux_residual_right: idx.iter().map(|&k| zs.flux_residual_right(k)).collect(),
        z_value_left: idx.iter().map(|&k| zs.value_left(k)).collect(),
        z_value_right: idx.iter().map(|&k| zs.value_right(k)).collect(),
        v_robin_residual: rep.v_robin_residual.clone(),
        saturated_steps: zs.saturated_steps,
        max_sup: rep.max_sup(),
        max_l1: rep.max_l1(),
        times: rep.times,
        sup_diff: rep.sup_diff,
        l1_diff: rep.l1_diff,
        boundary_diff: rep.boundary_diff,
    })
}
