//! Space-removing maps between the zero-range picture `X` and the exclusion
//! picture `Z`, and an exact check that they conjugate the two generators.
//!
//! For an admissible `η` with `b` occupied sites, `U(i) = i + Σ_{k≤i} ρ(η_k)`
//! for `i < b`. `Ψ(η)` has vacancies exactly at `U(0) < … < U(b-1) = N-1`
//! and particles everywhere else, so the gap before the `i`-th vacancy holds
//! `ρ(η_i)` particles. `T(y) = y - Σ_{k<y} Z_k` inverts `U`.
//!
//! All maps work with site indices; [`crate::lattice::site_position`]
//! converts to positions in `A_N`.
//!
//! States are enumerated in lexicographic order of their height vectors.
//! Rate matrices carry exact integers: every rate is scaled by the
//! denominator of `a`, so jumps contribute `N² ρ · den` and drift `N · num`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::exclusion::{ExclusionConfiguration, Move};
use crate::lattice::{rho, Configuration, LatticeError};
use crate::zero_range::{apply_drift, apply_jump, Action, EventLogEntry, JumpDir};

/// `U` as a list of site indices, one per occupied site of `η`.
pub fn u_map(c: &Configuration) -> Result<Vec<usize>, LatticeError> {
    let b = c.boundary_index()?;
    let mut acc = 0usize;
    Ok((0..b)
        .map(|i| {
            acc += rho(c.height(i)) as usize;
            i + acc
        })
        .collect())
}

/// `Ψ(η)`.
pub fn psi_map(c: &Configuration) -> Result<ExclusionConfiguration, LatticeError> {
    let n = c.n();
    let mut occ = alloc::vec![1u8; n];
    for p in u_map(c)? {
        occ[p] = 0;
    }
    Ok(ExclusionConfiguration::from_raw(occ))
}

/// `Ψ^{-1}(ζ)`: the `i`-th vacancy with `L` particles before it (since the
/// previous vacancy) becomes a pile of height `L + 1` at site `i`.
pub fn psi_inverse(z: &ExclusionConfiguration) -> Configuration {
    let n = z.n();
    let mut h = alloc::vec![0u32; n];
    let mut run = 0u32;
    let mut i = 0;
    for &b in z.occupancy() {
        if b == 1 {
            run += 1;
        } else {
            h[i] = run + 1;
            i += 1;
            run = 0;
        }
    }
    Configuration::from_raw(h)
}

/// `T(y) = y - Σ_{k<y} Z_k` for a site index `y`.
pub fn t_map(z: &ExclusionConfiguration, y: usize) -> usize {
    let before = z.occupancy()[..y].iter().filter(|&&b| b == 1).count();
    y - before
}

/// All of `Ω'_N` in lexicographic order of height vectors.
pub fn enumerate_states(n: usize) -> Vec<Configuration> {
    let mut out = Vec::new();
    let mut h = alloc::vec![0u32; n];
    fill(&mut h, 0, n as u32, &mut out);
    out.sort();
    out
}

fn fill(h: &mut [u32], i: usize, left: u32, out: &mut Vec<Configuration>) {
    if left == 0 {
        out.push(Configuration::from_raw(h.to_vec()));
        return;
    }
    if i == h.len() {
        return;
    }
    for v in 1..=left {
        h[i] = v;
        fill(h, i + 1, left - v, out);
    }
    h[i] = 0;
}

/// Non-negative rational drift rate `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Option<Self> {
        if den == 0 {
            None
        } else {
            Some(Self { num, den })
        }
    }

    pub fn integer(k: u64) -> Self {
        Self { num: k, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Dense generator matrix with integer entries; the true rates are the
/// entries divided by `scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateMatrix {
    pub dim: usize,
    pub scale: u64,
    entries: Vec<i128>,
}

impl RateMatrix {
    fn zeros(dim: usize, scale: u64) -> Self {
        Self { dim, scale, entries: alloc::vec![0; dim * dim] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.entries[i * self.dim + j]
    }

    fn add(&mut self, i: usize, j: usize, r: i128) {
        if i != j {
            self.entries[i * self.dim + j] += r;
            self.entries[i * self.dim + i] -= r;
        }
    }

    /// Rate from `i` to `j` as a float.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.get(i, j) as f64 / self.scale as f64
    }

    pub fn row_sums_vanish(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).map(|j| self.get(i, j)).sum::<i128>() == 0)
    }
}

/// The map `Ψ` restricted to an enumeration, with its inverse.
#[derive(Debug, Clone)]
pub struct StateBijection {
    pub states: Vec<Configuration>,
    pub images: Vec<ExclusionConfiguration>,
    index_x: BTreeMap<Configuration, usize>,
    index_z: BTreeMap<ExclusionConfiguration, usize>,
}

impl StateBijection {
    pub fn new(n: usize) -> Self {
        let states = enumerate_states(n);
        let images: Vec<_> = states.iter().map(|c| psi_map(c).expect("enumerated states are admissible")).collect();
        let index_x = states.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let index_z = images.iter().cloned().enumerate().map(|(i, z)| (z, i)).collect();
        Self { states, images, index_x, index_z }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of_x(&self, c: &Configuration) -> Option<usize> {
        self.index_x.get(c).copied()
    }

    pub fn index_of_z(&self, z: &ExclusionConfiguration) -> Option<usize> {
        self.index_z.get(z).copied()
    }

    pub fn forward(&self, c: &Configuration) -> Option<&ExclusionConfiguration> {
        self.index_of_x(c).map(|i| &self.images[i])
    }

    pub fn inverse(&self, z: &ExclusionConfiguration) -> Option<&Configuration> {
        self.index_of_z(z).map(|i| &self.states[i])
    }

    /// Both compositions are the identity and the images are distinct.
    pub fn is_bijective(&self) -> bool {
        self.index_z.len() == self.states.len()
            && self.states.iter().all(|c| self.forward(c).and_then(|z| self.inverse(z)) == Some(c))
            && self.images.iter().all(|z| psi_inverse(z) == self.states[self.index_z[z]])
    }
}

/// `Q_X` assembled from [`apply_jump`] and [`apply_drift`].
pub fn x_rate_matrix(bij: &StateBijection, a: Rational) -> RateMatrix {
    let dim = bij.len();
    let n = bij.states.first().map_or(0, |c| c.n());
    let mut q = RateMatrix::zeros(dim, a.den);
    let jump = (n * n) as i128 * i128::from(a.den);
    let drift = n as i128 * i128::from(a.num);
    for (i, c) in bij.states.iter().enumerate() {
        for x in 0..n {
            let w = i128::from(rho(c.height(x)));
            if w == 0 {
                continue;
            }
            for dir in [JumpDir::Left, JumpDir::Right] {
                let d = apply_jump(c, x, dir).expect("site in range");
                let j = bij.index_of_x(&d).expect("jumps preserve admissibility");
                q.add(i, j, jump * w);
            }
        }
        let j = bij.index_of_x(&apply_drift(c)).expect("drift preserves admissibility");
        q.add(i, j, drift);
    }
    q
}

/// `Q_Z` over the `Ψ`-images, optionally without leftward hops. Moves that
/// leave the image set are returned separately.
pub fn z_rate_matrix(bij: &StateBijection, a: Rational, left_hops: bool) -> (RateMatrix, Vec<(usize, ExclusionConfiguration)>) {
    let dim = bij.len();
    let n = bij.images.first().map_or(0, |z| z.n());
    let mut q = RateMatrix::zeros(dim, a.den);
    let mut stray = Vec::new();
    let jump = (n * n) as i128 * i128::from(a.den);
    let drift = n as i128 * i128::from(a.num);
    for (i, z) in bij.images.iter().enumerate() {
        for (action, m) in z.moves() {
            if action == Action::JumpLeft && !left_hops {
                continue;
            }
            let r = match action {
                Action::Drift => drift,
                _ => jump * i128::from(m.weight),
            };
            match bij.index_of_z(&m.config) {
                Some(j) => q.add(i, j, r),
                None => stray.push((i, m.config)),
            }
        }
    }
    (q, stray)
}

/// One transition where `Q_Z ∘ Ψ` and `Q_X` disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub from: Vec<u32>,
    pub to: Vec<u32>,
    pub q_x: f64,
    pub q_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyReport {
    pub n: usize,
    pub a: Rational,
    pub left_hops: bool,
    pub n_states: usize,
    /// `max |Q_Z[Ψη, Ψζ] - Q_X[η, ζ]|` in exact units of `1 / a.den`.
    pub max_discrepancy_scaled: i128,
    pub mismatches: Vec<Mismatch>,
    /// `Z` moves from an image state to a configuration outside the image.
    pub stray_moves: usize,
}

impl ConjugacyReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.max_discrepancy_scaled as f64 / self.a.den as f64
    }

    pub fn is_exact(&self) -> bool {
        self.max_discrepancy_scaled == 0 && self.stray_moves == 0
    }
}

/// Compares `Q_Z` on `Ψ(Ω'_N)` against `Q_X` on `Ω'_N`, entry by entry.
pub fn exact_conjugacy_check(n: usize, a: Rational, left_hops: bool) -> Result<ConjugacyReport, LatticeError> {
    if n < 2 {
        return Err(LatticeError::TooSmall(n));
    }
    let bij = StateBijection::new(n);
    let qx = x_rate_matrix(&bij, a);
    let (qz, stray) = z_rate_matrix(&bij, a, left_hops);
    let mut max = 0i128;
    let mut mismatches = Vec::new();
    for i in 0..bij.len() {
        for j in 0..bij.len() {
            let d = (qz.get(i, j) - qx.get(i, j)).abs();
            if d != 0 {
                max = max.max(d);
                mismatches.push(Mismatch {
                    from: bij.states[i].heights().to_vec(),
                    to: bij.states[j].heights().to_vec(),
                    q_x: qx.rate(i, j),
                    q_z: qz.rate(i, j),
                });
            }
        }
    }
    Ok(ConjugacyReport {
        n,
        a,
        left_hops,
        n_states: bij.len(),
        max_discrepancy_scaled: max,
        mismatches,
        stray_moves: stray.len(),
    })
}

/// The exclusion move that corresponds to an `X` event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZMove {
    HopRight { edge: usize },
    Kill,
    HopLeft { edge: usize },
    Insert,
}

/// Translates an event fired from the `X` state `c` into the move it induces
/// on `Ψ(c)`.
pub fn translate_event(c: &Configuration, e: &EventLogEntry) -> Result<ZMove, LatticeError> {
    let n = c.n();
    let site = match (e.action, e.site) {
        (Action::Drift, _) => return Ok(ZMove::Insert),
        (_, Some(s)) => s,
        (_, None) => return Err(LatticeError::SiteOutOfRange { site: n, n }),
    };
    let u = u_map(c)?;
    let p = *u.get(site).ok_or(LatticeError::SiteOutOfRange { site, n })?;
    Ok(match e.action {
        Action::JumpRight if p == n - 1 => ZMove::Kill,
        Action::JumpRight => ZMove::HopRight { edge: p - 1 },
        _ => ZMove::HopLeft { edge: p - rho(c.height(site)) as usize },
    })
}

pub fn apply_z_move(z: &ExclusionConfiguration, m: ZMove) -> Result<Move, crate::exclusion::ExclusionError> {
    match m {
        ZMove::HopRight { edge } => z.hop_right(edge),
        ZMove::Kill => z.hop_kill(),
        ZMove::HopLeft { edge } => z.hop_left(edge),
        ZMove::Insert => Ok(z.drift_insert()),
    }
}
