//! Initial profiles `u0 = 1_{[0, s0)} (1 + v0)` shared by the particle
//! simulators and the reference solvers.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::lattice::LatticeError;
use crate::measure::{GridDensity, Measure};

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `u0 = height` on `[0, 1/height)`.
    Step { height: f64 },
    /// `v0(x) = amp cos(πx / 2s0)` on `[0, s0]` with `s0 = 1 / (1 + 2 amp / π)`.
    Bump { amp: f64 },
    /// Tabulated `u0`; support ends at the last node with positive value.
    Tabulated(GridDensity),
}

impl Profile {
    /// `u0 ≡ 1`.
    pub const FLAT: Profile = Profile::Step { height: 1.0 };
    /// `u0 = 2 · 1_{[0, 1/2)}`, i.e. `v0 = 1_{[0, 1/2)}`.
    pub const HALF_STEP: Profile = Profile::Step { height: 2.0 };

    /// Looks up `flat`, `half-step`, `step:<height>` or `bump:<amp>`.
    pub fn named(name: &str) -> Option<Profile> {
        match name {
            "flat" => return Some(Self::FLAT),
            "half-step" => return Some(Self::HALF_STEP),
            _ => {}
        }
        let (kind, arg) = name.split_once(':')?;
        let x: f64 = arg.parse().ok()?;
        let p = match kind {
            "step" => Profile::Step { height: x },
            "bump" => Profile::Bump { amp: x },
            _ => return None,
        };
        p.validate().ok()?;
        Some(p)
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        match self {
            Profile::Step { height } => {
                if !(height.is_finite() && *height >= 1.0) {
                    return Err(LatticeError::BadProfile("step height must be at least 1"));
                }
            }
            Profile::Bump { amp } => {
                if !(amp.is_finite() && *amp >= 0.0) {
                    return Err(LatticeError::BadProfile("bump amplitude must be non-negative"));
                }
            }
            Profile::Tabulated(g) => {
                let s0 = self.s0();
                if !(s0 > 0.0) {
                    return Err(LatticeError::BadProfile("tabulated profile has empty support"));
                }
                let nodes = g.nodes();
                if nodes[0] != 0.0 || *nodes.last().unwrap() > 1.0 {
                    return Err(LatticeError::BadProfile("tabulated profile must live on [0, 1] starting at 0"));
                }
                for (x, v) in nodes.iter().zip(g.values()) {
                    if *x < s0 && *v < 1.0 - 1e-12 {
                        return Err(LatticeError::BadProfile("u0 must be at least 1 on its support"));
                    }
                }
                if (g.total_mass() - 1.0).abs() > 1e-9 {
                    return Err(LatticeError::BadProfile("u0 must integrate to 1"));
                }
            }
        }
        Ok(())
    }

    /// Right end `s0` of the support.
    pub fn s0(&self) -> f64 {
        match self {
            Profile::Step { height } => 1.0 / height,
            Profile::Bump { amp } => 1.0 / (1.0 + 2.0 * amp / PI),
            Profile::Tabulated(g) => {
                let nodes = g.nodes();
                let vals = g.values();
                match vals.iter().rposition(|&v| v > 0.0) {
                    Some(k) if k + 1 < nodes.len() => nodes[k + 1],
                    Some(k) => nodes[k],
                    None => 0.0,
                }
            }
        }
    }

    pub fn u0(&self, x: f64) -> f64 {
        let s0 = self.s0();
        match self {
            Profile::Tabulated(g) => g.eval(x),
            _ if !(0.0..s0).contains(&x) => 0.0,
            _ => 1.0 + self.v0(x),
        }
    }

    /// `v0 = u0 - 1` on `[0, s0]`. At `s0` the limit from the left.
    pub fn v0(&self, x: f64) -> f64 {
        let s0 = self.s0();
        if x < 0.0 || x > s0 {
            return 0.0;
        }
        match self {
            Profile::Step { height } => height - 1.0,
            Profile::Bump { amp } => amp * (PI * x / (2.0 * s0)).cos(),
            Profile::Tabulated(g) => {
                let x = if x >= s0 { s0 * (1.0 - 1e-15) } else { x };
                (g.eval(x) - 1.0).max(0.0)
            }
        }
    }

    /// `∫_lo^hi u0`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        let s0 = self.s0();
        let prim = |x: f64| -> f64 {
            let x = x.clamp(0.0, s0);
            match self {
                Profile::Step { height } => height * x,
                Profile::Bump { amp } => x + amp * 2.0 * s0 / PI * (PI * x / (2.0 * s0)).sin(),
                Profile::Tabulated(g) => g.mass_in(0.0, x),
            }
        };
        if hi <= lo {
            0.0
        } else {
            prim(hi) - prim(lo)
        }
    }

    /// `v0` at the immobilized nodes `ξ_j = j / m`, `j = 0..=m`, with the
    /// last node pinned to 0.
    pub fn v0_nodes(&self, m: usize) -> Vec<f64> {
        let s0 = self.s0();
        let mut v: Vec<f64> = (0..=m).map(|j| self.v0(s0 * j as f64 / m as f64)).collect();
        v[m] = 0.0;
        v
    }

    /// `u0` as a density with an exact jump at `s0`.
    pub fn to_density(&self, m: usize) -> GridDensity {
        if let Profile::Tabulated(g) = self {
            return g.clone();
        }
        let s0 = self.s0();
        let mut nodes: Vec<f64> = (0..=m).map(|j| s0 * j as f64 / m as f64).collect();
        let mut vals: Vec<f64> = nodes.iter().map(|&x| 1.0 + self.v0(x)).collect();
        if s0 < 1.0 {
            nodes.push(s0);
            vals.push(0.0);
            nodes.push(1.0);
            vals.push(0.0);
        }
        GridDensity::new(nodes, vals).expect("monotone nodes")
    }
}
