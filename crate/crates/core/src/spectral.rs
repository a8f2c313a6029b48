//! Discrete cosine/sine machinery on `A_N`, the difference operators, the
//! H₋₁-type functional `h_N` and its continuous counterpart.
//!
//! Inner products on `A_N` are `⟨f, g⟩_N = (1/N) Σ f(x) g(x)`. With
//! `ψ_k = √2 cos(kπx)` (`ψ_0 = 1`), `φ_k = √2 sin(kπ(x - 1/2N))` and
//! `λ_k = 2N sin(πk/2N)`:
//!
//! ```text
//! Δ_N ψ_k = -λ_k² ψ_k,   D_N ψ_k = -λ_k φ_k,   ⟨ψ_j, ψ_k⟩_N = δ_jk.
//! ```
//!
//! The pairings `⟨φ_k, ψ_j⟩` have closed forms. With both functions carrying
//! the `√2` normalization they are
//!
//! ```text
//! ⟨φ_k, ψ_j⟩_N = (1/N) cos(πj/2N) [cot(π(j+k)/2N) - cot(π(j-k)/2N)]   (j ≥ 1, j - k odd)
//! ⟨φ_k, ψ_0⟩_N = √2 cot(πk/2N) / N                                     (k odd)
//! ⟨φ_k, ψ_j⟩   = 4k / (π (k² - j²))                                    (continuous, k - j odd)
//! ```
//!
//! On the diagonal `⟨φ_k, ψ_k⟩_N = -sin(πk/2N) = -λ_k / 2N`; off the
//! diagonal the pairing is zero for even `j - k`. The `*_half_normalized` variants return the
//! forms with the factor `√2·√2 = 2` (resp. `√2`) dropped; they differ from
//! direct sums by exactly that factor and are kept for reporting.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;
use rand::Rng;
use thiserror::Error;

use crate::isomorphism::{x_rate_matrix, Rational, StateBijection};
use crate::lattice::{rho, site_position, Configuration};
use crate::linalg::Dense;
use crate::measure::Measure;
use crate::testfn::{CosineMode, TestFunction};
use crate::zero_range::{Action, EventLogEntry, EventSink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("N must be at least 2")]
    TooSmall,
    #[error("index out of range")]
    OutOfRange,
    #[error("degenerate (j, k): a cosecant has a pole")]
    Degenerate,
}

/// `⟨a, b⟩_N`.
pub fn inner(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n
}

/// `Δ_N` (second difference with reflecting corners, scaled by `N²`) and
/// `D_N` (left difference with a zero first row, scaled by `N`).
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceOperators {
    pub n: usize,
    pub delta: Dense,
    pub d: Dense,
}

impl DifferenceOperators {
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        if n < 2 {
            return Err(SpectralError::TooSmall);
        }
        let nf = n as f64;
        let (s2, s1) = (nf * nf, nf);
        let mut delta = Dense::zeros(n);
        let mut d = Dense::zeros(n);
        for i in 0..n {
            let mut diag = 0.0;
            if i > 0 {
                delta.set(i, i - 1, s2);
                diag -= s2;
                d.set(i, i, s1);
                d.set(i, i - 1, -s1);
            }
            if i + 1 < n {
                delta.set(i, i + 1, s2);
                diag -= s2;
            }
            delta.set(i, i, diag);
        }
        Ok(Self { n, delta, d })
    }

    pub fn delta_is_symmetric(&self) -> bool {
        self.delta == self.delta.transpose()
    }

    pub fn delta_row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.delta.get(i, j)).sum()).collect()
    }

    /// Zero except the first (`-N`) and the last (`+N`).
    pub fn d_column_sums(&self) -> Vec<f64> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.d.get(i, j)).sum()).collect()
    }
}

/// `ψ_k`, `φ_k` sampled on `A_N` and `λ_k`, for `k = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    pub n: usize,
    pub psi: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        if n < 2 {
            return Err(SpectralError::TooSmall);
        }
        let nf = n as f64;
        let xs: Vec<f64> = (0..n).map(|i| site_position(n, i)).collect();
        let mut psi = Vec::with_capacity(n);
        let mut phi = Vec::with_capacity(n);
        let mut lambda = Vec::with_capacity(n);
        for k in 0..n {
            let w = k as f64 * PI;
            psi.push(xs.iter().map(|&x| if k == 0 { 1.0 } else { SQRT_2 * (w * x).cos() }).collect());
            phi.push(xs.iter().map(|&x| if k == 0 { 0.0 } else { SQRT_2 * (w * (x - 0.5 / nf)).sin() }).collect());
            lambda.push(2.0 * nf * (PI * k as f64 / (2.0 * nf)).sin());
        }
        Ok(Self { n, psi, phi, lambda })
    }

    /// `b_k = ⟨ψ_k, η⟩_N`.
    pub fn coefficients(&self, eta: &[f64]) -> Vec<f64> {
        self.psi.iter().map(|p| inner(p, eta)).collect()
    }

    pub fn reconstruct(&self, b: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.n];
        for (bk, p) in b.iter().zip(&self.psi) {
            for (o, x) in out.iter_mut().zip(p) {
                *o += bk * x;
            }
        }
        out
    }

    /// `h_N(η) = Σ_{k≥1} ⟨ψ_k, η⟩² / λ_k²`.
    pub fn h(&self, eta: &[f64]) -> f64 {
        (1..self.n)
            .map(|k| {
                let b = inner(&self.psi[k], eta);
                b * b / (self.lambda[k] * self.lambda[k])
            })
            .sum()
    }
}

/// Largest residuals of the five basis properties. The eigen-relations are
/// divided by the operator scales (`N²` for `Δ_N`, `N` for `D_N`); Parseval
/// and reconstruction are relative to the sizes of the random vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisReport {
    pub n: usize,
    pub eigen_delta: f64,
    pub eigen_d: f64,
    pub orthonormality: f64,
    pub parseval: f64,
    pub reconstruction: f64,
}

impl BasisReport {
    pub fn max(&self) -> f64 {
        self.eigen_delta.max(self.eigen_d).max(self.orthonormality).max(self.parseval).max(self.reconstruction)
    }
}

/// Checks the five properties, using `samples` random vectors in `ℕ^{A_N}`
/// drawn from `rng` for Parseval and reconstruction.
pub fn verify_basis_properties<R: Rng + ?Sized>(n: usize, samples: usize, rng: &mut R) -> Result<BasisReport, SpectralError> {
    let ops = DifferenceOperators::new(n)?;
    let basis = SpectralBasis::new(n)?;
    let nf = n as f64;
    let mut rep = BasisReport { n, eigen_delta: 0.0, eigen_d: 0.0, orthonormality: 0.0, parseval: 0.0, reconstruction: 0.0 };
    for k in 0..n {
        let l = basis.lambda[k];
        let dpsi = ops.delta.mul_vec(&basis.psi[k]);
        let fpsi = ops.d.mul_vec(&basis.psi[k]);
        for i in 0..n {
            rep.eigen_delta = rep.eigen_delta.max((dpsi[i] + l * l * basis.psi[k][i]).abs() / (nf * nf));
            rep.eigen_d = rep.eigen_d.max((fpsi[i] + l * basis.phi[k][i]).abs() / nf);
        }
        for j in 0..n {
            let g = inner(&basis.psi[k], &basis.psi[j]);
            let target = if j == k { 1.0 } else { 0.0 };
            rep.orthonormality = rep.orthonormality.max((g - target).abs());
        }
    }
    let draw = |rng: &mut R| -> Vec<f64> { (0..n).map(|_| f64::from(rng.random_range(0..=2 * n as u32))).collect() };
    for _ in 0..samples {
        let e1 = draw(rng);
        let e2 = draw(rng);
        let (b1, b2) = (basis.coefficients(&e1), basis.coefficients(&e2));
        let lhs = inner(&e1, &e2);
        let rhs: f64 = b1.iter().zip(&b2).map(|(x, y)| x * y).sum();
        let scale = (inner(&e1, &e1) * inner(&e2, &e2)).sqrt().max(1.0);
        rep.parseval = rep.parseval.max((lhs - rhs).abs() / scale);
        let back = basis.reconstruct(&b1);
        let big = e1.iter().copied().fold(1.0, f64::max);
        let err = back.iter().zip(&e1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rep.reconstruction = rep.reconstruction.max(err / big);
    }
    Ok(rep)
}

/// `Σ_{i<M} sin(πki/N) cos(πj(2i+1)/2N)`.
pub fn trig_sum_lhs(n: usize, j: usize, k: usize, m: usize) -> f64 {
    let nf = n as f64;
    (0..m)
        .map(|i| (PI * (k * i) as f64 / nf).sin() * (PI * (j * (2 * i + 1)) as f64 / (2.0 * nf)).cos())
        .sum()
}

/// The closed form of [`trig_sum_lhs`] as a pair of cosecant-weighted
/// cosine differences.
pub fn trig_sum_rhs(n: usize, j: usize, k: usize, m: usize) -> Result<f64, SpectralError> {
    check_trig_domain(n, j, k)?;
    let nf = 2.0 * n as f64;
    let (j, k, m) = (j as f64, k as f64, m as f64);
    let csc = |x: f64| 1.0 / x.sin();
    let t1 = 0.25 * csc(PI * (j + k) / nf) * ((PI * (2.0 * j + k) / nf).cos() - (PI * (2.0 * j * m + 2.0 * k * m - k) / nf).cos());
    let t2 = 0.25 * csc(PI * (j - k) / nf) * ((PI * (2.0 * j * m - 2.0 * k * m + k) / nf).cos() - (PI * (2.0 * j - k) / nf).cos());
    Ok(t1 + t2)
}

fn check_trig_domain(n: usize, j: usize, k: usize) -> Result<(), SpectralError> {
    if n < 2 {
        return Err(SpectralError::TooSmall);
    }
    if j >= n || k >= n {
        return Err(SpectralError::OutOfRange);
    }
    if j == k || (j + k) % (2 * n) == 0 {
        return Err(SpectralError::Degenerate);
    }
    Ok(())
}

/// `|LHS - RHS|` of the trigonometric sum identity.
pub fn trig_sum_identity_check(n: usize, j: usize, k: usize, m: usize) -> Result<f64, SpectralError> {
    if m == 0 || m > n {
        return Err(SpectralError::OutOfRange);
    }
    Ok((trig_sum_lhs(n, j, k, m) - trig_sum_rhs(n, j, k, m)?).abs())
}

/// The pairs `(j, k)` excluded from the identity's domain for this `N`.
pub fn degenerate_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..n {
        for k in 0..n {
            if check_trig_domain(n, j, k) == Err(SpectralError::Degenerate) {
                out.push((j, k));
            }
        }
    }
    out
}

/// `⟨φ_k, ψ_j⟩_N` by direct summation over `A_N`.
pub fn phi_psi_direct(n: usize, k: usize, j: usize) -> f64 {
    let nf = n as f64;
    let s: f64 = (0..n)
        .map(|i| {
            let x = site_position(n, i);
            let phi = SQRT_2 * (k as f64 * PI * (x - 0.5 / nf)).sin();
            let psi = if j == 0 { 1.0 } else { SQRT_2 * (j as f64 * PI * x).cos() };
            phi * psi
        })
        .sum();
    s / nf
}

/// Closed form of `⟨φ_k, ψ_j⟩_N`.
pub fn phi_psi_closed_form(n: usize, k: usize, j: usize) -> Result<f64, SpectralError> {
    if n < 2 {
        return Err(SpectralError::TooSmall);
    }
    if k == 0 || k >= n || j >= n {
        return Err(SpectralError::OutOfRange);
    }
    let nf = n as f64;
    let q = PI / (2.0 * nf);
    if j == k {
        return Ok(-(q * k as f64).sin());
    }
    if (j + k) % 2 == 0 {
        return Ok(0.0);
    }
    if j == 0 {
        return Ok(SQRT_2 / ((q * k as f64).tan() * nf));
    }
    let (jf, kf) = (j as f64, k as f64);
    let cot = |x: f64| 1.0 / x.tan();
    Ok((q * jf).cos() * (cot(q * (jf + kf)) - cot(q * (jf - kf))) / nf)
}

/// The discrete closed form with the normalization factor dropped
/// (`1/2N` instead of `1/N` for `j ≥ 1`; no `√2` for `j = 0`).
pub fn phi_psi_half_normalized(n: usize, k: usize, j: usize) -> Result<f64, SpectralError> {
    let full = phi_psi_closed_form(n, k, j)?;
    Ok(if j == 0 { full / SQRT_2 } else { 0.5 * full })
}

/// Direct sum and closed form of `⟨φ_k, ψ_j⟩_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingCheck {
    pub n: usize,
    pub k: usize,
    pub j: usize,
    pub direct: f64,
    pub closed_form: f64,
}

impl PairingCheck {
    pub fn residual(&self) -> f64 {
        (self.direct - self.closed_form).abs()
    }
}

pub fn phi_psi_pairing_n(n: usize, k: usize, j: usize) -> Result<PairingCheck, SpectralError> {
    let closed_form = phi_psi_closed_form(n, k, j)?;
    Ok(PairingCheck { n, k, j, direct: phi_psi_direct(n, k, j), closed_form })
}

/// `⟨φ_k, ψ_j⟩ = ∫_0^1 2 sin(kπx) cos(jπx) dx` for `k, j ≥ 1`: zero when
/// `k - j` is even (including `k = j`), `4k / (π (k² - j²))` otherwise.
pub fn phi_psi_pairing_continuous(k: u32, j: u32) -> Result<f64, SpectralError> {
    if k == 0 || j == 0 {
        return Err(SpectralError::OutOfRange);
    }
    if (k + j) % 2 == 0 {
        return Ok(0.0);
    }
    let (kf, jf) = (f64::from(k), f64::from(j));
    Ok(4.0 * kf / (PI * (kf * kf - jf * jf)))
}

/// `2k / (π (k² - j²))` for odd `k - j`: half of [`phi_psi_pairing_continuous`].
pub fn phi_psi_continuous_half_normalized(k: u32, j: u32) -> Result<f64, SpectralError> {
    Ok(0.5 * phi_psi_pairing_continuous(k, j)?)
}

/// `max |b_k b_j ⟨φ_k, ψ_j⟩/λ_k + b_j b_k ⟨φ_j, ψ_k⟩/λ_j|` over
/// `1 ≤ j, k < N` with `j ≠ k`, using direct sums. (On the diagonal the
/// term is `-b_k² / 2N`, which does not cancel.)
pub fn antisymmetry_residual(n: usize, b: &[f64]) -> Result<f64, SpectralError> {
    let basis = SpectralBasis::new(n)?;
    if b.len() != n {
        return Err(SpectralError::OutOfRange);
    }
    let mut worst = 0.0f64;
    for k in 1..n {
        for j in (1..n).filter(|&j| j != k) {
            let lhs = b[k] * b[j] * inner(&basis.phi[k], &basis.psi[j]) / basis.lambda[k];
            let rhs = b[j] * b[k] * inner(&basis.phi[j], &basis.psi[k]) / basis.lambda[j];
            worst = worst.max((lhs + rhs).abs());
        }
    }
    Ok(worst)
}

/// `h_N` of a configuration.
pub fn h_functional(c: &Configuration) -> f64 {
    let n = c.n().max(2);
    let basis = SpectralBasis::new(n).expect("n >= 2");
    let eta: Vec<f64> = c.heights().iter().map(|&x| f64::from(x)).collect();
    if c.n() < 2 {
        return 0.0;
    }
    basis.h(&eta)
}

/// One sample of the drift functional along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSample {
    pub t: f64,
    pub h: f64,
    /// `∫_0^t ⟨X_s, X_s⟩_N ds`.
    pub l2_integral: f64,
}

impl DriftSample {
    /// `h_N(X_t) + 2 ∫⟨X, X⟩_N`.
    pub fn functional(&self) -> f64 {
        self.h + 2.0 * self.l2_integral
    }
}

/// Event sink accumulating `∫⟨X, X⟩_N dt` exactly between events.
///
/// `Σ η²` is carried as an integer and updated from the last event, which
/// the next holding interval reveals; drift events trigger a full rescan.
#[derive(Debug, Clone)]
pub struct DriftMonitor {
    basis: SpectralBasis,
    t: f64,
    integral: f64,
    sum_sq: Option<u64>,
    last: Option<EventLogEntry>,
}

impl DriftMonitor {
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        Ok(Self { basis: SpectralBasis::new(n)?, t: 0.0, integral: 0.0, sum_sq: None, last: None })
    }

    /// The sample at the current time, for the state `c` the process is in.
    pub fn sample(&self, c: &Configuration) -> DriftSample {
        let eta: Vec<f64> = c.heights().iter().map(|&x| f64::from(x)).collect();
        DriftSample { t: self.t, h: self.basis.h(&eta), l2_integral: self.integral }
    }

    fn update(&mut self, state: &Configuration) -> u64 {
        if let (Some(e), Some(sq)) = (self.last.take(), self.sum_sq) {
            let next = match (e.suppressed, e.action, e.site) {
                (true, _, _) => Some(sq),
                (false, Action::JumpLeft | Action::JumpRight, Some(x)) => {
                    let y = if e.action == Action::JumpLeft { x - 1 } else { x + 1 };
                    // Post-event heights; the source lost one, the target gained one.
                    let hx = u64::from(state.height(x));
                    let hy = u64::from(state.height(y));
                    Some(sq + 2 * hy - 2 * hx - 2)
                }
                _ => None,
            };
            self.sum_sq = next;
        }
        *self.sum_sq.get_or_insert_with(|| state.heights().iter().map(|&h| u64::from(h) * u64::from(h)).sum())
    }
}

impl EventSink<Configuration> for DriftMonitor {
    fn record(&mut self, entry: &EventLogEntry) {
        self.last = Some(*entry);
        if self.sum_sq.is_none() {
            self.last = None;
        }
    }

    fn hold(&mut self, dt: f64, state: &Configuration) {
        let sq = self.update(state);
        self.t += dt;
        self.integral += dt * sq as f64 / state.n() as f64;
    }
}

/// `Σ_{k=1}^{K} ⟨ψ_k, u1 - u2⟩² / k²`.
pub fn h_distance<A: Measure + ?Sized, B: Measure + ?Sized>(u1: &A, u2: &B, modes: u32) -> f64 {
    (1..=modes)
        .map(|k| {
            let f = CosineMode(k);
            let b = u1.pair_fn(&|x| f.value(x)) - u2.pair_fn(&|x| f.value(x));
            b * b / f64::from(k * k)
        })
        .sum()
}

/// Largest `|𝓛⟨f, η⟩ - (⟨Δ_N f, ρ(η)⟩_N - a ⟨D_N f, η⟩_N)|` over all
/// admissible states, with `𝓛` taken from the exact rate matrix and `f`
/// sampled on `A_N`.
pub fn generator_identity_residual<F: Fn(f64) -> f64>(n: usize, a: Rational, f: F) -> Result<f64, SpectralError> {
    let ops = DifferenceOperators::new(n)?;
    let bij = StateBijection::new(n);
    let q = x_rate_matrix(&bij, a);
    let fv: Vec<f64> = (0..n).map(|i| f(site_position(n, i))).collect();
    let lap = ops.delta.mul_vec(&fv);
    let dif = ops.d.mul_vec(&fv);
    let obs: Vec<f64> = bij
        .states
        .iter()
        .map(|c| inner(&fv, &c.heights().iter().map(|&x| f64::from(x)).collect::<Vec<_>>()))
        .collect();
    let mut worst = 0.0f64;
    for (i, c) in bij.states.iter().enumerate() {
        let lhs: f64 = (0..bij.len()).filter(|&j| j != i).map(|j| q.rate(i, j) * (obs[j] - obs[i])).sum();
        let r: Vec<f64> = c.heights().iter().map(|&x| f64::from(rho(x))).collect();
        let e: Vec<f64> = c.heights().iter().map(|&x| f64::from(x)).collect();
        let rhs = inner(&lap, &r) - a.to_f64() * inner(&dif, &e);
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    Ok(worst)
}
