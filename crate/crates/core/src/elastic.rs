//! Fixed-domain nonlinear diffusion `z_t = G(z)_yy` on `[0, 1]`, with
//! `G(z) = z / (1 - z)` and `K = G' = 1 / (1 - z)^2`, and the transforms
//! relating it to the free-boundary picture.
//!
//! At `y = 0` the flux condition `K z_y = -a` injects mass at rate `a`; at
//! `y = 1` the Dirichlet condition `z = 0` absorbs it. Mass therefore obeys
//! `d/dt ∫z = a - outflux`, and `1 - ∫z` tracks the free boundary.
//!
//! The transforms use `υ(x) = x + ∫_0^x v` (a bijection `[0, s] → [0, 1]`)
//! and its inverse `τ(y) = ∫_0^y (1 - z)`. Both are evaluated on piecewise
//! cubic Hermite interpolants, so the round trip is fourth-order accurate
//! on smooth data.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;
use thiserror::Error;

use crate::linalg::solve_tridiagonal;
use crate::quadrature::trapezoid;
use crate::stefan::{step_plan, StefanInit, StefanSolution, DEFAULT_WINDOW};

/// Cap applied after each Newton update.
pub const Z_CAP: f64 = 1.0 - 1e-9;

#[inline]
pub fn g_of(z: f64) -> f64 {
    z / (1.0 - z)
}

#[inline]
pub fn k_of(z: f64) -> f64 {
    let w = 1.0 - z;
    1.0 / (w * w)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZError {
    #[error("invalid parameters: {0}")]
    BadParams(&'static str),
    #[error("Newton iteration failed at t = {time} even after step halving")]
    NewtonFailure { time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum TransformError {
    #[error("profile needs at least two nodes")]
    TooShort,
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("front position {0} outside (0, 1]")]
    BadFront(f64),
    #[error("1 + v is not positive at node {0}, so the map is not monotone")]
    NonMonotone(usize),
    #[error("z = {value} at node {node} is outside [0, 1)")]
    OutOfRange { node: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZParams {
    pub a: f64,
    pub m: usize,
    pub dt: f64,
    pub t_max: f64,
    pub record_times: Vec<f64>,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub initial_halvings: u32,
    pub initial_window: f64,
}

impl ZParams {
    pub fn new(a: f64, m: usize, dt: f64, t_max: f64, frames: usize) -> Self {
        let record_times = (1..=frames).map(|k| t_max * k as f64 / frames as f64).collect();
        Self { a, m, dt, t_max, record_times, newton_tol: 1e-12, max_newton: 30, initial_halvings: 20, initial_window: DEFAULT_WINDOW }
    }

    fn validate(&self) -> Result<(), ZError> {
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(ZError::BadParams("a must be finite and non-negative"));
        }
        if self.m < 4 {
            return Err(ZError::BadParams("need at least 4 grid intervals"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite() && self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(ZError::BadParams("dt must be positive and t_max finite"));
        }
        if self.max_newton == 0 || !(self.newton_tol > 0.0) {
            return Err(ZError::BadParams("Newton controls must be positive"));
        }
        Ok(())
    }
}

/// Frames `(t_k, z_k)` on `y_j = j / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZSolution {
    pub a: f64,
    pub m: usize,
    pub times: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    /// `∫_0^{t_k} outflux` as accounted by the scheme.
    pub exits: Vec<f64>,
    pub steps: u64,
    pub newton_iterations: u64,
    /// Steps after which some cell sat at [`Z_CAP`].
    pub saturated_steps: u64,
}

impl ZSolution {
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn frame_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&x| (x - t).abs() <= 1e-12 * (1.0 + t.abs()))
    }

    pub fn mass(&self, k: usize) -> f64 {
        trapezoid(&self.z[k], self.h())
    }

    /// `1 - ∫z`.
    pub fn boundary(&self, k: usize) -> f64 {
        1.0 - self.mass(k)
    }

    /// `∫z(t) - ∫z(0) - a t + ∫_0^t outflux`; zero up to rounding.
    pub fn mass_balance_defect(&self, k: usize) -> f64 {
        self.mass(k) - self.mass(0) - self.a * self.times[k] + self.exits[k]
    }

    fn g_y(&self, k: usize, left: bool) -> f64 {
        let z = &self.z[k];
        let m = self.m;
        let h = self.h();
        if left {
            (-3.0 * g_of(z[0]) + 4.0 * g_of(z[1]) - g_of(z[2])) / (2.0 * h)
        } else {
            (3.0 * g_of(z[m]) - 4.0 * g_of(z[m - 1]) + g_of(z[m - 2])) / (2.0 * h)
        }
    }

    /// `K z_y + a` at `y = 0` (the imposed flux condition).
    pub fn flux_residual_left(&self, k: usize) -> f64 {
        self.g_y(k, true) + self.a
    }

    /// `K z_y + a` at `y = 1`; not imposed, reported for comparison.
    pub fn flux_residual_right(&self, k: usize) -> f64 {
        self.g_y(k, false) + self.a
    }

    /// `z(0, t)`; not imposed, reported for comparison.
    pub fn value_left(&self, k: usize) -> f64 {
        self.z[k][0]
    }

    /// `z(1, t)` (the imposed Dirichlet condition).
    pub fn value_right(&self, k: usize) -> f64 {
        self.z[k][self.m]
    }

    /// `-G(z)_y` at `y = 1`.
    pub fn outflux(&self, k: usize) -> f64 {
        -self.g_y(k, false)
    }
}

/// Advances `z0` (with `z0[M] = 0`) to `params.t_max`.
pub fn solve_z(z0: &[f64], params: &ZParams) -> Result<ZSolution, ZError> {
    params.validate()?;
    let m = params.m;
    if z0.len() != m + 1 {
        return Err(ZError::BadParams("initial data length must be M + 1"));
    }
    if z0.iter().any(|&x| !(0.0..1.0).contains(&x)) {
        return Err(ZError::BadParams("initial data must lie in [0, 1)"));
    }
    let mut records: Vec<f64> =
        params.record_times.iter().copied().filter(|&t| t > 0.0 && t <= params.t_max).collect();
    records.push(params.t_max);
    records.sort_by(f64::total_cmp);
    records.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);

    let mut z = z0.to_vec();
    z[m] = 0.0;
    let mut sol = ZSolution {
        a: params.a,
        m,
        times: alloc::vec![0.0],
        z: alloc::vec![z.clone()],
        exits: alloc::vec![0.0],
        steps: 0,
        newton_iterations: 0,
        saturated_steps: 0,
    };
    let mut newton = Newton::new(m, params.a);
    let mut plan = step_plan(params.dt, params.initial_halvings, params.initial_window);
    plan.reverse();
    let mut t = 0.0;
    let mut exits = 0.0;
    for &t_rec in &records {
        while t_rec - t > 1e-14 * (1.0 + t_rec) {
            let planned = plan.pop().unwrap_or(params.dt);
            let dt = planned.min(t_rec - t);
            let (its, out) = newton.advance(&mut z, dt, params).ok_or(ZError::NewtonFailure { time: t })?;
            sol.newton_iterations += its as u64;
            sol.steps += 1;
            if z.iter().any(|&x| x >= Z_CAP) {
                sol.saturated_steps += 1;
            }
            exits += out;
            t += dt;
        }
        t = t_rec;
        sol.times.push(t);
        sol.z.push(z.clone());
        sol.exits.push(exits);
    }
    Ok(sol)
}

struct Newton {
    m: usize,
    a: f64,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
}

impl Newton {
    fn new(m: usize, a: f64) -> Self {
        Self { m, a, lower: alloc::vec![0.0; m], diag: alloc::vec![0.0; m], upper: alloc::vec![0.0; m], rhs: alloc::vec![0.0; m] }
    }

    // Advances by dt, halving into substeps when Newton fails. Returns the
    // iteration count and the mass that left through y = 1.
    fn advance(&mut self, z: &mut Vec<f64>, dt: f64, p: &ZParams) -> Option<(usize, f64)> {
        let mut its = 0;
        let mut out = 0.0;
        let mut pending = alloc::vec![dt];
        let mut depth_budget = 1usize << 12;
        while let Some(d) = pending.pop() {
            match self.step(z, d, p) {
                Some((k, o)) => {
                    its += k;
                    out += o;
                }
                None => {
                    if depth_budget == 0 || d < dt * 1e-6 {
                        return None;
                    }
                    depth_budget -= 1;
                    pending.push(0.5 * d);
                    pending.push(0.5 * d);
                }
            }
        }
        Some((its, out))
    }

    fn step(&mut self, z: &mut Vec<f64>, dt: f64, p: &ZParams) -> Option<(usize, f64)> {
        let m = self.m;
        let h = 1.0 / m as f64;
        let old = z.clone();
        let mut cur = z.clone();
        for it in 1..=p.max_newton {
            for j in 0..m {
                let w = if j == 0 { 0.5 * h } else { h };
                let gj = g_of(cur[j]);
                let kj = k_of(cur[j]);
                let gn = g_of(cur[j + 1]);
                let mut r = w * (cur[j] - old[j]) / dt - (gn - gj) / h;
                let mut d = w / dt + kj / h;
                self.lower[j] = 0.0;
                if j == 0 {
                    r -= self.a;
                } else {
                    r += (gj - g_of(cur[j - 1])) / h;
                    d += kj / h;
                    self.lower[j] = -k_of(cur[j - 1]) / h;
                }
                self.diag[j] = d;
                self.upper[j] = if j + 1 < m { -k_of(cur[j + 1]) / h } else { 0.0 };
                self.rhs[j] = -r;
            }
            let delta = solve_tridiagonal(&self.lower, &self.diag, &self.upper, &self.rhs)?;
            let mut big = 0.0f64;
            for (x, dx) in cur.iter_mut().zip(&delta) {
                if !dx.is_finite() {
                    return None;
                }
                let nx = (*x + dx).clamp(0.0, Z_CAP);
                big = big.max((nx - *x).abs());
                *x = nx;
            }
            if big <= p.newton_tol {
                // The flux through the last face, consistent with the discrete balance.
                let out = dt * g_of(cur[m - 1]) / h;
                *z = cur;
                return Some((it, out));
            }
        }
        None
    }
}

/// Piecewise cubic Hermite interpolant of positive nodal data on a uniform
/// grid over `[0, 1]`, with its exact running integral.
#[derive(Debug, Clone)]
pub struct HermiteDensity {
    h: f64,
    g: Vec<f64>,
    d: Vec<f64>,
    cum: Vec<f64>,
}

impl HermiteDensity {
    /// Slopes are centred differences inside and one-sided second-order
    /// differences at the ends.
    pub fn new(g: Vec<f64>) -> Self {
        let m = g.len() - 1;
        assert!(m >= 2);
        let h = 1.0 / m as f64;
        let mut d = alloc::vec![0.0; m + 1];
        d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h);
        d[m] = (3.0 * g[m] - 4.0 * g[m - 1] + g[m - 2]) / (2.0 * h);
        for j in 1..m {
            d[j] = (g[j + 1] - g[j - 1]) / (2.0 * h);
        }
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for j in 0..m {
            let step = 0.5 * h * (g[j] + g[j + 1]) + h * h / 12.0 * (d[j] - d[j + 1]);
            cum.push(cum[j] + step);
        }
        Self { h, g, d, cum }
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn cell(&self, x: f64) -> (usize, f64) {
        let m = self.g.len() - 1;
        let q = (x / self.h).clamp(0.0, m as f64);
        let j = (q.floor() as usize).min(m - 1);
        (j, q - j as f64)
    }

    fn value_in(&self, j: usize, t: f64) -> f64 {
        let (t2, t3) = (t * t, t * t * t);
        self.g[j] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + self.h * self.d[j] * (t3 - 2.0 * t2 + t)
            + self.g[j + 1] * (-2.0 * t3 + 3.0 * t2)
            + self.h * self.d[j + 1] * (t3 - t2)
    }

    fn integral_in(&self, j: usize, t: f64) -> f64 {
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        self.cum[j]
            + self.h
                * (self.g[j] * (0.5 * t4 - t3 + t)
                    + self.h * self.d[j] * (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2)
                    + self.g[j + 1] * (-0.5 * t4 + t3)
                    + self.h * self.d[j + 1] * (0.25 * t4 - t3 / 3.0))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (j, t) = self.cell(x);
        self.value_in(j, t)
    }

    /// `∫_0^x`.
    pub fn integral(&self, x: f64) -> f64 {
        let (j, t) = self.cell(x);
        self.integral_in(j, t)
    }

    /// The `x` with `∫_0^x = y`, clamped to `[0, 1]`.
    pub fn inverse(&self, y: f64) -> f64 {
        let m = self.g.len() - 1;
        if y <= 0.0 {
            return 0.0;
        }
        if y >= self.total() {
            return 1.0;
        }
        let j = (self.cum.partition_point(|&c| c <= y)).saturating_sub(1).min(m - 1);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let width = self.cum[j + 1] - self.cum[j];
        let mut t = if width > 0.0 { ((y - self.cum[j]) / width).clamp(0.0, 1.0) } else { 0.5 };
        for _ in 0..100 {
            let f = self.integral_in(j, t) - y;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            if f.abs() <= 1e-15 * (1.0 + y.abs()) || hi - lo <= 1e-15 {
                break;
            }
            let dfdt = self.h * self.value_in(j, t);
            let newton = t - f / dfdt;
            t = if dfdt > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        (j as f64 + t) * self.h
    }
}

/// `z = v(τ) τ'` sampled at `y_k = k / m_out`, from a free-boundary frame
/// `(s, V)` on its immobilized grid.
pub fn v_to_z(s: f64, v: &[f64], m_out: usize) -> Result<Vec<f64>, TransformError> {
    if v.len() < 2 || m_out == 0 {
        return Err(TransformError::TooShort);
    }
    if !(s.is_finite() && s > 0.0 && s <= 1.0) {
        return Err(TransformError::BadFront(s));
    }
    for (j, &x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(TransformError::NonFinite(j));
        }
        if 1.0 + x <= 0.0 {
            return Err(TransformError::NonMonotone(j));
        }
    }
    let f = HermiteDensity::new(v.iter().map(|&x| s * (1.0 + x)).collect());
    let mut z: Vec<f64> = (0..=m_out)
        .map(|k| {
            let xi = f.inverse(k as f64 / m_out as f64);
            (1.0 - s / f.eval(xi)).clamp(0.0, Z_CAP)
        })
        .collect();
    z[m_out] = 0.0;
    Ok(z)
}

/// `(s, V)` with `s = ∫_0^1 (1 - z)` and `V(ξ_j) = v(s ξ_j)`,
/// `v = z(υ) / (1 - z(υ))`, on `m_out` intervals.
pub fn z_to_v(z: &[f64], m_out: usize) -> Result<(f64, Vec<f64>), TransformError> {
    if z.len() < 2 || m_out == 0 {
        return Err(TransformError::TooShort);
    }
    for (j, &x) in z.iter().enumerate() {
        if !x.is_finite() {
            return Err(TransformError::NonFinite(j));
        }
        if !(0.0..1.0).contains(&x) {
            return Err(TransformError::OutOfRange { node: j, value: x });
        }
    }
    let w = HermiteDensity::new(z.iter().map(|&x| 1.0 - x).collect());
    let s = w.total();
    let mut v: Vec<f64> = (0..=m_out)
        .map(|j| {
            let y = w.inverse(s * j as f64 / m_out as f64);
            (1.0 / w.eval(y) - 1.0).max(0.0)
        })
        .collect();
    v[m_out] = 0.0;
    Ok((s, v))
}

/// Initial data for [`solve_z`] matching a free-boundary initial state.
pub fn z_init_from(init: &StefanInit, m: usize) -> Result<Vec<f64>, TransformError> {
    v_to_z(init.s0, &init.v, m)
}

/// Per-frame comparison between a free-boundary solution mapped into `z`
/// and a direct `z` solution.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub times: Vec<f64>,
    /// `max_j |z_direct - z_mapped|` per frame.
    pub sup_diff: Vec<f64>,
    /// Trapezoid `∫|z_direct - z_mapped|` per frame.
    pub l1_diff: Vec<f64>,
    /// `|s - (1 - ∫z)|` per frame.
    pub boundary_diff: Vec<f64>,
    /// `K z_y + a` at `y = 0` of the direct solution.
    pub z_flux_residual: Vec<f64>,
    /// `v_x + a(v + 1)` at `x = 0` of the free-boundary solution.
    pub v_robin_residual: Vec<f64>,
}

impl EquivalenceReport {
    pub fn max_sup(&self) -> f64 {
        self.sup_diff.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_l1(&self) -> f64 {
        self.l1_diff.iter().copied().fold(0.0, f64::max)
    }
}

/// Compares at every frame time the two solutions share, skipping `t = 0`
/// and times below `t_from`.
pub fn equivalence_check(stefan: &StefanSolution, z: &ZSolution, t_from: f64) -> Result<EquivalenceReport, TransformError> {
    let mut rep = EquivalenceReport {
        times: Vec::new(),
        sup_diff: Vec::new(),
        l1_diff: Vec::new(),
        boundary_diff: Vec::new(),
        z_flux_residual: Vec::new(),
        v_robin_residual: Vec::new(),
    };
    for (kz, &t) in z.times.iter().enumerate() {
        if t <= 0.0 || t < t_from {
            continue;
        }
        let Some(ks) = stefan.frame_index(t) else { continue };
        let mapped = v_to_z(stefan.s[ks], &stefan.v[ks], z.m)?;
        let diff: Vec<f64> = mapped.iter().zip(&z.z[kz]).map(|(a, b)| (a - b).abs()).collect();
        rep.times.push(t);
        rep.sup_diff.push(diff.iter().copied().fold(0.0, f64::max));
        rep.l1_diff.push(trapezoid(&diff, z.h()));
        rep.boundary_diff.push((stefan.s[ks] - z.boundary(kz)).abs());
        rep.z_flux_residual.push(z.flux_residual_left(kz));
        rep.v_robin_residual.push(stefan.robin_residual(ks));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;
    use crate::stefan::{solve_stefan, StefanParams};
    use core::f64::consts::PI;

    #[test]
    fn hermite_integral_and_inverse() {
        let m = 64;
        let g: Vec<f64> = (0..=m).map(|j| 2.0 + (3.0 * j as f64 / m as f64).sin()).collect();
        let hd = HermiteDensity::new(g);
        let exact = |x: f64| 2.0 * x + (1.0 - (3.0 * x).cos()) / 3.0;
        for &x in &[0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!((hd.integral(x) - exact(x)).abs() < 1e-7);
            assert!((hd.inverse(hd.integral(x)) - x).abs() < 1e-13);
        }
    }

    #[test]
    fn transforms_round_trip() {
        let m = 400;
        let amp = 0.8;
        let s = 1.0 / (1.0 + 2.0 * amp / PI);
        let v: Vec<f64> = (0..=m).map(|j| amp * (0.5 * PI * j as f64 / m as f64).cos()).collect();
        let z = v_to_z(s, &v, m).unwrap();
        // Mass of z is ∫v.
        assert!((trapezoid(&z, 1.0 / m as f64) - (1.0 - s)).abs() < 1e-5);
        let (s2, v2) = z_to_v(&z, m).unwrap();
        assert!((s2 - s).abs() < 1e-6);
        let err = v.iter().zip(&v2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "round trip error {err}");
    }

    #[test]
    fn zero_data_stays_zero() {
        let p = ZParams::new(0.0, 32, 1e-3, 0.1, 2);
        let sol = solve_z(&alloc::vec![0.0; 33], &p).unwrap();
        assert!(sol.z.iter().flatten().all(|&x| x == 0.0));
        assert_eq!(sol.boundary(2), 1.0);
    }

    #[test]
    fn influx_balances_mass() {
        let init = crate::stefan::StefanInit::from_profile(&Profile::HALF_STEP, 100).unwrap();
        let z0 = z_init_from(&init, 100).unwrap();
        let sol = solve_z(&z0, &ZParams::new(1.0, 100, 1e-4, 0.2, 4)).unwrap();
        for k in 0..sol.len() {
            assert!(sol.mass_balance_defect(k).abs() < 1e-10, "{}", sol.mass_balance_defect(k));
            assert!(sol.value_right(k) == 0.0);
        }
        let last = sol.len() - 1;
        assert!(sol.flux_residual_left(last).abs() < 1e-2);
        assert!(sol.value_left(last) > 0.1);
    }

    #[test]
    fn agrees_with_free_boundary_solver() {
        let m = 200;
        let init = crate::stefan::StefanInit::from_profile(&Profile::HALF_STEP, m).unwrap();
        let dt = 2e-5;
        let st = solve_stefan(&init, &StefanParams::new(1.0, m, dt, 0.1, 4)).unwrap();
        let zs = solve_z(&z_init_from(&init, m).unwrap(), &ZParams::new(1.0, m, dt, 0.1, 4)).unwrap();
        let rep = equivalence_check(&st, &zs, 0.0).unwrap();
        assert_eq!(rep.times.len(), 4);
        assert!(rep.max_sup() < 1e-2, "{rep:?}");
        assert!(rep.boundary_diff.iter().all(|&d| d < 1e-3), "{rep:?}");
        assert!(rep.max_l1() <= rep.max_sup());
    }

    #[test]
    fn transform_examples_and_rejections() {
        // v ≡ 1 on [0, 1/2] maps to z ≡ 1/2 away from the Dirichlet end.
        let z = v_to_z(0.5, &[1.0; 41], 40).unwrap();
        assert!(z[..40].iter().all(|&x| (x - 0.5).abs() < 1e-14));
        let (s, v) = z_to_v(&[0.5; 41], 40).unwrap();
        assert!((s - 0.5).abs() < 1e-14);
        assert!(v[..40].iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert_eq!(z_to_v(&[0.0; 9], 8).unwrap().0, 1.0);
        assert_eq!(z_to_v(&[0.0, 1.0, 0.0], 2), Err(TransformError::OutOfRange { node: 1, value: 1.0 }));
        assert_eq!(v_to_z(0.5, &[0.0, -1.5, 0.0], 2), Err(TransformError::NonMonotone(1)));
        assert_eq!(v_to_z(0.0, &[0.0, 0.0], 2), Err(TransformError::BadFront(0.0)));
        assert!(matches!(v_to_z(0.5, &[f64::NAN, 0.0], 2), Err(TransformError::NonFinite(0))));
    }
}
