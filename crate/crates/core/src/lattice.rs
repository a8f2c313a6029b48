//! The staggered lattice `A_N = {1/2N, 3/2N, …, (2N-1)/2N}` and occupation
//! vectors over it.
//!
//! Sites are addressed by their index `i ∈ 0..N`; the physical position of
//! site `i` is `(2i + 1) / 2N`.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Errors raised by lattice-level constructors and queries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("lattice size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("drift rate must be finite and non-negative, got {0}")]
    BadDrift(f64),
    #[error("site index {site} outside the lattice of size {n}")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("expected {expected} heights, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("total mass is {total}, expected {expected}")]
    WrongMass { total: u64, expected: u64 },
    #[error("occupied sites are not a contiguous block starting at the left wall (gap at site {gap})")]
    NonContiguous { gap: usize },
    #[error("profile rejected: {0}")]
    BadProfile(&'static str),
}

/// Grid size `N` and drift rate `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    n: usize,
    a: f64,
}

impl LatticeParams {
    pub fn new(n: usize, a: f64) -> Result<Self, LatticeError> {
        if n < 2 {
            return Err(LatticeError::TooSmall(n));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(LatticeError::BadDrift(a));
        }
        Ok(Self { n, a })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Per-direction jump rate multiplier `N²`.
    #[inline]
    pub fn jump_scale(&self) -> f64 {
        (self.n * self.n) as f64
    }

    /// Rate `aN` of the drift event.
    #[inline]
    pub fn drift_rate(&self) -> f64 {
        self.a * self.n as f64
    }

    #[inline]
    pub fn site(&self, i: usize) -> f64 {
        site_position(self.n, i)
    }
}

/// Position `(2i + 1) / 2N` of site `i`.
#[inline]
pub fn site_position(n: usize, i: usize) -> f64 {
    (2 * i + 1) as f64 / (2 * n) as f64
}

/// `ρ(n) = (n - 1) ∨ 0`.
#[inline]
pub fn rho(n: u32) -> u32 {
    n.saturating_sub(1)
}

/// Occupation numbers `η_x` over `A_N`.
///
/// A configuration is *admissible* (an element of `Ω'_N`) when its heights
/// sum to `N` and the positive entries form a contiguous block starting at the
/// first site. Only admissible configurations are produced by the dynamics,
/// but arbitrary height vectors are representable so that test functionals
/// can be paired against them.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    heights: Vec<u32>,
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.heights.iter()).finish()
    }
}

impl Configuration {
    /// Wraps a raw height vector without checking admissibility.
    pub fn new(heights: Vec<u32>) -> Result<Self, LatticeError> {
        if heights.len() < 2 {
            return Err(LatticeError::TooSmall(heights.len()));
        }
        Ok(Self { heights })
    }

    /// Wraps a height vector, rejecting anything outside `Ω'_N`.
    pub fn admissible(heights: Vec<u32>) -> Result<Self, LatticeError> {
        let c = Self::new(heights)?;
        c.check_admissible()?;
        Ok(c)
    }

    /// `η ≡ 1`, the configuration with one particle per site.
    pub fn flat(n: usize) -> Self {
        Self { heights: alloc::vec![1; n] }
    }

    pub(crate) fn from_raw(heights: Vec<u32>) -> Self {
        Self { heights }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.heights.len()
    }

    #[inline]
    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    #[inline]
    pub fn height(&self, i: usize) -> u32 {
        self.heights[i]
    }

    pub(crate) fn heights_mut(&mut self) -> &mut [u32] {
        &mut self.heights
    }

    pub fn into_heights(self) -> Vec<u32> {
        self.heights
    }

    pub fn total(&self) -> u64 {
        self.heights.iter().map(|&h| u64::from(h)).sum()
    }

    /// `Σ_x ρ(η_x)`, the number of particles of the projected process.
    pub fn excess(&self) -> u64 {
        self.heights.iter().map(|&h| u64::from(rho(h))).sum()
    }

    /// `(1/N) Σ_x η_x²`.
    pub fn square_norm(&self) -> f64 {
        let s: u64 = self.heights.iter().map(|&h| u64::from(h) * u64::from(h)).sum();
        s as f64 / self.n() as f64
    }

    pub fn check_admissible(&self) -> Result<(), LatticeError> {
        let n = self.n() as u64;
        let total = self.total();
        if total != n {
            return Err(LatticeError::WrongMass { total, expected: n });
        }
        let b = self.heights.iter().take_while(|&&h| h > 0).count();
        if self.heights[b..].iter().any(|&h| h > 0) {
            return Err(LatticeError::NonContiguous { gap: b });
        }
        Ok(())
    }

    pub fn is_admissible(&self) -> bool {
        self.check_admissible().is_ok()
    }

    /// Index of the first empty site; `N` when every site is occupied.
    ///
    /// This equals the number of occupied sites for admissible
    /// configurations.
    pub fn boundary_index(&self) -> Result<usize, LatticeError> {
        self.check_admissible()?;
        Ok(self.occupied_len())
    }

    #[inline]
    pub(crate) fn occupied_len(&self) -> usize {
        self.heights.iter().take_while(|&&h| h > 0).count()
    }

    /// `S = min{x ∈ A_N : η_x = 0}`, or `(2N+1)/2N` when no site is empty.
    pub fn boundary_s(&self) -> Result<f64, LatticeError> {
        let b = self.boundary_index()?;
        Ok(site_position(self.n(), b))
    }

    /// Entrywise `ρ(η_x)`.
    pub fn rho_vector(&self) -> Vec<u32> {
        self.heights.iter().map(|&h| rho(h)).collect()
    }
}

/// `⟨f, η⟩_N = (1/N) Σ_x f(x) η_x`.
pub fn pair<F: Fn(f64) -> f64>(f: F, c: &Configuration) -> f64 {
    let n = c.n();
    let s: f64 = c
        .heights()
        .iter()
        .enumerate()
        .map(|(i, &h)| f(site_position(n, i)) * f64::from(h))
        .sum();
    s / n as f64
}

/// `(1/N) Σ_x f(x) w_x` for an arbitrary real vector on `A_N`.
pub fn pair_vec<F: Fn(f64) -> f64>(f: F, w: &[f64]) -> f64 {
    let n = w.len();
    let s: f64 = w.iter().enumerate().map(|(i, &h)| f(site_position(n, i)) * h).sum();
    s / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_traits::Float;

    #[test]
    fn rho_values() {
        assert_eq!(rho(0), 0);
        assert_eq!(rho(1), 0);
        assert_eq!(rho(5), 4);
    }

    #[test]
    fn boundary_examples() {
        let c = Configuration::admissible(vec![3, 1, 0, 0]).unwrap();
        assert_eq!(c.boundary_s().unwrap(), 5.0 / 8.0);
        let c = Configuration::admissible(vec![1, 1, 1, 1]).unwrap();
        assert_eq!(c.boundary_s().unwrap(), 9.0 / 8.0);
        let c = Configuration::admissible(vec![2, 0]).unwrap();
        assert_eq!(c.boundary_s().unwrap(), 3.0 / 4.0);
    }

    #[test]
    fn boundary_rejects_gaps_and_wrong_mass() {
        let c = Configuration::new(vec![2, 0, 2, 0]).unwrap();
        assert!(matches!(c.boundary_s(), Err(LatticeError::NonContiguous { .. })));
        let c = Configuration::new(vec![2, 1, 0, 0]).unwrap();
        assert!(matches!(c.boundary_s(), Err(LatticeError::WrongMass { .. })));
        assert!(Configuration::admissible(vec![0, 4, 0, 0]).is_err());
    }

    #[test]
    fn pair_examples() {
        let c = Configuration::admissible(vec![3, 1, 0, 0]).unwrap();
        assert!((pair(|_| 1.0, &c) - 1.0).abs() < 1e-15);
        let c = Configuration::admissible(vec![2, 0]).unwrap();
        let f1 = |x: f64| 2.0.sqrt() * (core::f64::consts::PI * x).cos();
        assert!((pair(f1, &c) - 1.0).abs() < 1e-14);
        let c = Configuration::admissible(vec![0, 2]);
        assert!(c.is_err());
        let c = Configuration::new(vec![0, 2]).unwrap();
        assert!((pair(|x| x, &c) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(LatticeParams::new(1, 0.0).is_err());
        assert!(LatticeParams::new(4, -1.0).is_err());
        assert!(LatticeParams::new(4, f64::NAN).is_err());
        let p = LatticeParams::new(4, 1.5).unwrap();
        assert_eq!(p.jump_scale(), 16.0);
        assert_eq!(p.drift_rate(), 6.0);
        assert_eq!(p.site(0), 1.0 / 8.0);
    }
}
