//! Direct simulation of the elastic exclusion process `Z_t`.
//!
//! Sites of `A_N` hold at most one particle and the last site is always
//! empty. Every vacancy `p` sees an occupied block of length `L` immediately
//! to its left. At rate `N² L` the right edge of that block steps into `p`
//! (or is removed when `p` is the last site), and at rate `N² L` the left
//! edge of the block steps into the vacancy before it (suppressed when the
//! block touches the left wall). At rate `aN` the first vacancy is filled,
//! pushing the leading block one site to the right; the event is suppressed
//! when the first vacancy is the last site.
//!
//! Rates live in a Fenwick tree indexed by site, holding `L` at vacancy
//! positions and 0 elsewhere; vacancies are tracked in a bitset.

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::fenwick::Fenwick;
use crate::lattice::{LatticeError, LatticeParams};
use crate::rng::{exponential, seeded, ChaCha8Rng, STREAM_Z};
use crate::zero_range::{run_until, Action, Clocked, EventLogEntry, EventSink, SimError, StuckPolicy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExclusionError {
    #[error("lattice size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("occupancy must be 0 or 1, got {value} at site {site}")]
    NotBinary { site: usize, value: u8 },
    #[error("the last site must be empty")]
    LastSiteOccupied,
    #[error("site {0} is not the right edge of a block followed by an interior vacancy")]
    NotRightEdge(usize),
    #[error("site {0} is not the left edge of a block")]
    NotLeftEdge(usize),
    #[error("the particle next to the last site is missing")]
    NothingToKill,
}

/// A 0/1 occupancy vector over `A_N` whose last site is empty.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExclusionConfiguration {
    occ: Vec<u8>,
}

impl core::fmt::Debug for ExclusionConfiguration {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for &b in &self.occ {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Outcome of a single exclusion move: the new state and the rate of the
/// move in units of `N²` (hops) or `aN` (insertion).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub config: ExclusionConfiguration,
    pub weight: u32,
    pub suppressed: bool,
}

impl ExclusionConfiguration {
    pub fn new(occ: Vec<u8>) -> Result<Self, ExclusionError> {
        if occ.len() < 2 {
            return Err(ExclusionError::TooSmall(occ.len()));
        }
        if let Some((site, &value)) = occ.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(ExclusionError::NotBinary { site, value });
        }
        if occ[occ.len() - 1] != 0 {
            return Err(ExclusionError::LastSiteOccupied);
        }
        Ok(Self { occ })
    }

    pub fn empty(n: usize) -> Self {
        Self { occ: alloc::vec![0; n] }
    }

    pub(crate) fn from_raw(occ: Vec<u8>) -> Self {
        Self { occ }
    }

    pub fn n(&self) -> usize {
        self.occ.len()
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occ
    }

    #[inline]
    pub fn is_occupied(&self, i: usize) -> bool {
        self.occ[i] == 1
    }

    pub fn count(&self) -> usize {
        self.occ.iter().filter(|&&b| b == 1).count()
    }

    /// Length of the occupied block ending at `i` (0 if `i` is empty).
    pub fn block_ending_at(&self, i: usize) -> u32 {
        self.occ[..=i].iter().rev().take_while(|&&b| b == 1).count() as u32
    }

    /// Length of the occupied block starting at `i` (0 if `i` is empty).
    pub fn block_starting_at(&self, i: usize) -> u32 {
        self.occ[i..].iter().take_while(|&&b| b == 1).count() as u32
    }

    /// Positions of the vacancies in increasing order.
    pub fn vacancies(&self) -> Vec<usize> {
        self.occ.iter().enumerate().filter(|(_, &b)| b == 0).map(|(i, _)| i).collect()
    }

    /// Moves the particle at `edge` into the empty interior site `edge + 1`.
    pub fn hop_right(&self, edge: usize) -> Result<Move, ExclusionError> {
        let n = self.n();
        if edge + 2 >= n || !self.is_occupied(edge) || self.is_occupied(edge + 1) {
            return Err(ExclusionError::NotRightEdge(edge));
        }
        let weight = self.block_ending_at(edge);
        let mut occ = self.occ.clone();
        occ.swap(edge, edge + 1);
        Ok(Move { config: Self { occ }, weight, suppressed: false })
    }

    /// Removes the particle next to the last site.
    pub fn hop_kill(&self) -> Result<Move, ExclusionError> {
        let n = self.n();
        if !self.is_occupied(n - 2) {
            return Err(ExclusionError::NothingToKill);
        }
        let weight = self.block_ending_at(n - 2);
        let mut occ = self.occ.clone();
        occ[n - 2] = 0;
        Ok(Move { config: Self { occ }, weight, suppressed: false })
    }

    /// Moves the left-edge particle at `edge` into the empty site `edge - 1`.
    /// At the left wall the move is suppressed.
    pub fn hop_left(&self, edge: usize) -> Result<Move, ExclusionError> {
        if edge >= self.n() || !self.is_occupied(edge) || (edge > 0 && self.is_occupied(edge - 1)) {
            return Err(ExclusionError::NotLeftEdge(edge));
        }
        let weight = self.block_starting_at(edge);
        if edge == 0 {
            return Ok(Move { config: self.clone(), weight, suppressed: true });
        }
        let mut occ = self.occ.clone();
        occ.swap(edge - 1, edge);
        Ok(Move { config: Self { occ }, weight, suppressed: false })
    }

    /// Fills the first vacancy; suppressed when that vacancy is the last site.
    pub fn drift_insert(&self) -> Move {
        let mut occ = self.occ.clone();
        let v0 = occ.iter().position(|&b| b == 0).unwrap_or(self.n() - 1);
        let suppressed = v0 + 1 == self.n();
        if !suppressed {
            occ[v0] = 1;
        }
        Move { config: Self { occ }, weight: 1, suppressed }
    }

    /// Block lengths around every vacancy, by direct scan.
    pub fn block_index(&self) -> BlockIndex {
        let entries = self
            .vacancies()
            .into_iter()
            .map(|p| VacancyBlocks {
                site: p,
                left: if p == 0 { 0 } else { self.block_ending_at(p - 1) },
                right: if p + 1 >= self.n() { 0 } else { self.block_starting_at(p + 1) },
            })
            .collect();
        BlockIndex { entries }
    }

    /// Every enabled move with its weight and kind. Insertion is reported with
    /// weight 1 in units of `aN`.
    pub fn moves(&self) -> Vec<(Action, Move)> {
        let n = self.n();
        let mut out = Vec::new();
        for vb in self.block_index().entries {
            if vb.left == 0 {
                continue;
            }
            let p = vb.site;
            let right = if p == n - 1 { self.hop_kill() } else { self.hop_right(p - 1) };
            out.push((Action::JumpRight, right.expect("edge of a block")));
            let left = self.hop_left(p - vb.left as usize).expect("edge of a block");
            out.push((Action::JumpLeft, left));
        }
        out.push((Action::Drift, self.drift_insert()));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VacancyBlocks {
    pub site: usize,
    /// Length of the occupied block ending just before `site`.
    pub left: u32,
    /// Length of the occupied block starting just after `site`.
    pub right: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockIndex {
    pub entries: Vec<VacancyBlocks>,
}

// Vacancy set as a bitset with neighbour queries.
#[derive(Debug, Clone)]
struct VacancySet {
    words: Vec<u64>,
}

impl VacancySet {
    fn new(n: usize) -> Self {
        Self { words: alloc::vec![0; n.div_ceil(64)] }
    }

    #[inline]
    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    /// Smallest vacancy `> i`.
    fn next_after(&self, i: usize) -> Option<usize> {
        let start = i + 1;
        let mut w = start / 64;
        if w >= self.words.len() {
            return None;
        }
        let mut bits = self.words[w] & (!0u64).checked_shl((start % 64) as u32).unwrap_or(0);
        loop {
            if bits != 0 {
                return Some(w * 64 + bits.trailing_zeros() as usize);
            }
            w += 1;
            if w >= self.words.len() {
                return None;
            }
            bits = self.words[w];
        }
    }

    fn first(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
}

/// A running replica of `Z_t`.
#[derive(Debug, Clone)]
pub struct ExclusionState {
    params: LatticeParams,
    config: ExclusionConfiguration,
    vac: VacancySet,
    rates: Fenwick,
    time: f64,
    rng: ChaCha8Rng,
    pending: Option<f64>,
    events: u64,
    policy: StuckPolicy,
}

impl ExclusionState {
    pub fn new(c0: ExclusionConfiguration, params: LatticeParams, seed: u64) -> Result<Self, LatticeError> {
        let n = params.n();
        if c0.n() != n {
            return Err(LatticeError::LengthMismatch { expected: n, got: c0.n() });
        }
        let mut vac = VacancySet::new(n);
        let mut w = alloc::vec![0u64; n];
        let mut run = 0u64;
        for (i, &b) in c0.occupancy().iter().enumerate() {
            if b == 1 {
                run += 1;
            } else {
                vac.insert(i);
                w[i] = run;
                run = 0;
            }
        }
        Ok(Self {
            params,
            config: c0,
            vac,
            rates: Fenwick::from_weights(&w),
            time: 0.0,
            rng: seeded(seed, STREAM_Z),
            pending: None,
            events: 0,
            policy: StuckPolicy::Error,
        })
    }

    pub fn with_policy(mut self, policy: StuckPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Replaces the random source by stream `stream` of `seed`.
    pub fn with_stream(mut self, seed: u64, stream: u64) -> Self {
        self.rng = seeded(seed, stream);
        self.pending = None;
        self
    }

    pub fn config(&self) -> &ExclusionConfiguration {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn total_rate(&self) -> f64 {
        2.0 * self.params.jump_scale() * self.rates.total() as f64 + self.params.drift_rate()
    }

    /// The incremental rate index and vacancy set agree with a rescan.
    pub fn check_index(&self) -> bool {
        let bi = self.config.block_index();
        let n = self.config.n();
        let mut expect = alloc::vec![0u64; n];
        for e in &bi.entries {
            expect[e.site] = u64::from(e.left);
        }
        let vac_ok = (0..n).all(|i| {
            let bit = self.vac.words[i / 64] >> (i % 64) & 1 == 1;
            bit != self.config.is_occupied(i)
        });
        vac_ok && expect == self.rates.weights()
    }

    fn next_time(&mut self) -> Option<f64> {
        if self.pending.is_none() {
            let r = self.total_rate();
            if r > 0.0 {
                self.pending = Some(self.time + exponential(&mut self.rng, r));
            }
        }
        self.pending
    }

    fn occupy(&mut self, i: usize) {
        self.config.occ[i] = 1;
        self.vac.remove(i);
    }

    fn vacate(&mut self, i: usize) {
        self.config.occ[i] = 0;
        self.vac.insert(i);
    }

    fn fire(&mut self, time: f64) -> EventLogEntry {
        self.pending = None;
        self.time = time;
        self.events += 1;
        let n = self.config.n();
        let r = self.total_rate();
        let u: f64 = self.rng.random::<f64>() * r;
        if u < self.params.drift_rate() || self.rates.total() == 0 {
            let v0 = self.vac.first().expect("last site is always vacant");
            if v0 == n - 1 {
                return EventLogEntry { time, action: Action::Drift, site: None, suppressed: true };
            }
            let next = self.vac.next_after(v0).expect("last site is always vacant");
            let lw = self.rates.get(v0);
            self.occupy(v0);
            self.rates.set(v0, 0);
            self.rates.set(next, self.rates.get(next) + lw + 1);
            return EventLogEntry { time, action: Action::Drift, site: None, suppressed: false };
        }
        let k = self.rng.random_range(0..2 * self.rates.total());
        let p = self.rates.find(k / 2);
        let len = self.rates.get(p);
        if k % 2 == 1 {
            // Right edge steps into p, or is removed at the last site.
            let edge = p - 1;
            self.vacate(edge);
            self.rates.set(edge, len - 1);
            self.rates.set(p, 0);
            if p + 1 < n {
                self.occupy(p);
                let q = self.vac.next_after(p).expect("last site is always vacant");
                self.rates.set(q, self.rates.get(q) + 1);
            }
            EventLogEntry { time, action: Action::JumpRight, site: Some(edge), suppressed: false }
        } else {
            let edge = p - len as usize;
            if edge == 0 {
                return EventLogEntry { time, action: Action::JumpLeft, site: Some(0), suppressed: true };
            }
            let prev = edge - 1;
            let prev_w = self.rates.get(prev);
            self.occupy(prev);
            self.vacate(edge);
            self.rates.set(prev, 0);
            self.rates.set(edge, prev_w + 1);
            self.rates.set(p, len - 1);
            EventLogEntry { time, action: Action::JumpLeft, site: Some(edge), suppressed: false }
        }
    }

    pub fn step(&mut self) -> Result<EventLogEntry, SimError> {
        match self.next_time() {
            Some(t) => Ok(self.fire(t)),
            None => Err(SimError::Stuck { time: self.time }),
        }
    }

    pub fn advance_to<K: EventSink<ExclusionConfiguration> + ?Sized>(
        &mut self,
        t: f64,
        sink: &mut K,
    ) -> Result<(), SimError> {
        run_until(self, t, sink)
    }
}

impl Clocked for ExclusionState {
    type State = ExclusionConfiguration;

    fn clock(&self) -> f64 {
        self.time
    }
    fn set_clock(&mut self, t: f64) {
        self.time = t;
    }
    fn next_time(&mut self) -> Option<f64> {
        ExclusionState::next_time(self)
    }
    fn fire(&mut self, t: f64) -> EventLogEntry {
        ExclusionState::fire(self, t)
    }
    fn state(&self) -> &ExclusionConfiguration {
        &self.config
    }
    fn policy(&self) -> StuckPolicy {
        self.policy
    }
}

/// States of one `Z` replica at each observation time.
pub fn simulate_z(
    c0: ExclusionConfiguration,
    params: LatticeParams,
    obs_times: &[f64],
    seed: u64,
    policy: StuckPolicy,
    log: &mut dyn EventSink<ExclusionConfiguration>,
) -> Result<Vec<ExclusionConfiguration>, SimError> {
    crate::zero_range::check_obs_times(obs_times)?;
    let mut st = ExclusionState::new(c0, params, seed)?.with_policy(policy);
    let mut out = Vec::with_capacity(obs_times.len());
    for &t in obs_times {
        st.advance_to(t, log)?;
        out.push(st.config().clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn z(v: &[u8]) -> ExclusionConfiguration {
        ExclusionConfiguration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hop_right_examples() {
        let m = z(&[1, 1, 0, 0]).hop_right(1).unwrap();
        assert_eq!(m.config, z(&[1, 0, 1, 0]));
        assert_eq!(16 * m.weight, 32);
        let m = z(&[0, 1, 0, 0]).hop_right(1).unwrap();
        assert_eq!(m.config, z(&[0, 0, 1, 0]));
        assert_eq!(16 * m.weight, 16);
        assert!(z(&[0, 0, 1, 0]).hop_right(2).is_err());
        assert!(z(&[1, 1, 0, 0]).hop_right(0).is_err());
    }

    #[test]
    fn kill_examples() {
        let m = z(&[0, 0, 1, 0]).hop_kill().unwrap();
        assert_eq!(m.config, z(&[0, 0, 0, 0]));
        assert_eq!(16 * m.weight, 16);
        let c = z(&[1, 1, 1, 0]);
        let m = c.hop_kill().unwrap();
        assert_eq!(m.config, z(&[1, 1, 0, 0]));
        assert_eq!(16 * m.weight, 48);
        assert_eq!(m.config.count() + 1, c.count());
    }

    #[test]
    fn hop_left_examples() {
        let m = z(&[0, 1, 1, 0]).hop_left(1).unwrap();
        assert_eq!(m.config, z(&[1, 0, 1, 0]));
        assert_eq!(16 * m.weight, 32);
        let m = z(&[1, 1, 0, 0]).hop_left(0).unwrap();
        assert!(m.suppressed);
        assert_eq!(m.config, z(&[1, 1, 0, 0]));
        assert_eq!(16 * z(&[0, 0, 1, 0]).hop_left(2).unwrap().weight, 16);
        assert!(z(&[1, 1, 0, 0]).hop_left(1).is_err());
    }

    #[test]
    fn drift_examples() {
        assert_eq!(z(&[0, 1, 0, 0]).drift_insert().config, z(&[1, 1, 0, 0]));
        assert_eq!(z(&[1, 1, 0, 0]).drift_insert().config, z(&[1, 1, 1, 0]));
        let m = z(&[1, 1, 1, 0]).drift_insert();
        assert!(m.suppressed);
        assert_eq!(m.config, z(&[1, 1, 1, 0]));
    }

    #[test]
    fn rejects_bad_configurations() {
        assert!(ExclusionConfiguration::new(vec![1, 1]).is_err());
        assert!(ExclusionConfiguration::new(vec![2, 0]).is_err());
        assert!(ExclusionConfiguration::new(vec![0]).is_err());
    }

    #[test]
    fn stuck_when_empty() {
        let p = LatticeParams::new(5, 0.0).unwrap();
        let mut s = ExclusionState::new(ExclusionConfiguration::empty(5), p, 1).unwrap();
        assert!(matches!(s.step(), Err(SimError::Stuck { .. })));
    }

    #[test]
    fn determinism() {
        let p = LatticeParams::new(12, 1.0).unwrap();
        let c0 = z(&[1, 1, 1, 0, 1, 1, 0, 0, 1, 0, 0, 0]);
        let mut l1 = Vec::new();
        let mut l2 = Vec::new();
        let a = simulate_z(c0.clone(), p, &[0.1], 9, StuckPolicy::Hold, &mut l1).unwrap();
        let b = simulate_z(c0, p, &[0.1], 9, StuckPolicy::Hold, &mut l2).unwrap();
        assert_eq!(a, b);
        assert_eq!(l1, l2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn index_matches_rescan(bits in proptest::collection::vec(0u8..2, 2..140), a in 0.0f64..3.0, seed in any::<u64>()) {
            let mut bits = bits;
            let n = bits.len();
            bits[n - 1] = 0;
            let p = LatticeParams::new(n, a).unwrap();
            let mut s = ExclusionState::new(ExclusionConfiguration::new(bits).unwrap(), p, seed).unwrap();
            prop_assert!(s.check_index());
            for _ in 0..1500 {
                let before = s.config().count();
                let e = match s.step() { Ok(e) => e, Err(_) => break };
                prop_assert!(s.check_index());
                prop_assert!(!s.config().is_occupied(n - 1));
                let after = s.config().count();
                match (e.action, e.suppressed) {
                    (Action::Drift, false) => prop_assert_eq!(after, before + 1),
                    (Action::JumpRight, _) if e.site == Some(n - 2) && after + 1 == before => {}
                    _ => prop_assert_eq!(after, before),
                }
            }
        }
    }
}
