//! Exact event-driven simulation of the zero-range process `X_t`.
//!
//! From a state `η`, a pile at site `x` sends one particle to each neighbour
//! at rate `N² ρ(η_x)`; jumps that would leave `A_N` are suppressed. At rate
//! `aN` the drift map `σ` merges the first two piles and shifts the rest one
//! site to the left.
//!
//! Event selection uses a Fenwick tree over the integer weights `ρ(η_x)`, so
//! sampling and updates cost `O(log N)` and the total rate never accumulates
//! rounding error.

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::fenwick::Fenwick;
use crate::lattice::{rho, site_position, Configuration, LatticeError, LatticeParams};
use crate::profile::Profile;
use crate::rng::{exponential, seeded, ChaCha8Rng, STREAM_X};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JumpDir {
    Left,
    Right,
}

impl JumpDir {
    #[inline]
    pub fn offset(self) -> isize {
        match self {
            JumpDir::Left => -1,
            JumpDir::Right => 1,
        }
    }
}

/// What a clock ring tried to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    JumpLeft,
    JumpRight,
    Drift,
}

/// Event classification for logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    JumpLeft,
    JumpRight,
    Drift,
    Suppressed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventLogEntry {
    pub time: f64,
    pub action: Action,
    /// Source site of a jump; `None` for drift events.
    pub site: Option<usize>,
    /// The clock rang but the map left the state unchanged.
    pub suppressed: bool,
}

impl EventLogEntry {
    pub fn kind(&self) -> EventKind {
        if self.suppressed {
            return EventKind::Suppressed;
        }
        match self.action {
            Action::JumpLeft => EventKind::JumpLeft,
            Action::JumpRight => EventKind::JumpRight,
            Action::Drift => EventKind::Drift,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("no event is enabled at time {time} (all rates vanish)")]
    Stuck { time: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("observation times must be finite, non-negative and non-decreasing")]
    BadObservationTimes,
}

/// What [`ZeroRangeState::advance_to`] does when the total rate is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StuckPolicy {
    /// Return [`SimError::Stuck`].
    #[default]
    Error,
    /// Treat the state as absorbing and hold it.
    Hold,
}

/// Receives events and the holding intervals between them.
pub trait EventSink<S: ?Sized> {
    fn record(&mut self, _entry: &EventLogEntry) {}
    /// The process sits in `state` for `dt` time units.
    fn hold(&mut self, _dt: f64, _state: &S) {}
}

impl<S: ?Sized> EventSink<S> for () {}

impl<S: ?Sized> EventSink<S> for Vec<EventLogEntry> {
    fn record(&mut self, entry: &EventLogEntry) {
        self.push(*entry);
    }
}

/// `η^{x, x±1/N}`; returns `c` unchanged when the target leaves the lattice.
pub fn apply_jump(c: &Configuration, site: usize, dir: JumpDir) -> Result<Configuration, LatticeError> {
    let n = c.n();
    if site >= n {
        return Err(LatticeError::SiteOutOfRange { site, n });
    }
    let mut out = c.clone();
    jump_in_place(out.heights_mut(), site, dir);
    Ok(out)
}

// Returns the target site, or None when suppressed.
fn jump_in_place(h: &mut [u32], site: usize, dir: JumpDir) -> Option<usize> {
    let t = site as isize + dir.offset();
    if t < 0 || t as usize >= h.len() || h[site] == 0 {
        return None;
    }
    let t = t as usize;
    h[site] -= 1;
    h[t] += 1;
    Some(t)
}

/// `σ(η)`: first entry becomes `η_0 + η_1`, the rest shift left, the last
/// entry becomes 0.
pub fn apply_drift(c: &Configuration) -> Configuration {
    let mut out = c.clone();
    drift_in_place(out.heights_mut());
    out
}

fn drift_in_place(h: &mut [u32]) -> bool {
    if h.len() < 2 || h[1..].iter().all(|&x| x == 0) {
        return false;
    }
    h[0] += h[1];
    h.copy_within(2.., 1);
    let last = h.len() - 1;
    h[last] = 0;
    true
}

/// `ρ(η)` over `A_N` together with the boundary `S` and the mass `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct YProjection {
    pub rho: Vec<u32>,
    pub mass: u64,
    pub boundary_s: f64,
}

/// The projection `Y = ρ(X)` with its random boundary.
pub fn project_y(c: &Configuration) -> Result<YProjection, LatticeError> {
    let boundary_s = c.boundary_s()?;
    Ok(YProjection { rho: c.rho_vector(), mass: c.excess(), boundary_s })
}

/// Deterministic rounding of `N ∫_cell u0` followed by a repair step that
/// restores `Σ η = N` and contiguous support.
pub fn sample_initial(u0: &Profile, n: usize) -> Result<Configuration, LatticeError> {
    if n < 2 {
        return Err(LatticeError::TooSmall(n));
    }
    u0.validate()?;
    let nf = n as f64;
    let mut h: Vec<u32> = (0..n)
        .map(|i| {
            let t = nf * u0.mass_in(i as f64 / nf, (i + 1) as f64 / nf);
            if t > 0.0 {
                num_traits::Float::round(t) as u32
            } else {
                0
            }
        })
        .collect();
    // Compact positive piles to the left.
    let mut w = 0;
    for r in 0..n {
        if h[r] > 0 {
            h.swap(w, r);
            w += 1;
        }
    }
    let target = n as u64;
    let mut total: u64 = h.iter().map(|&x| u64::from(x)).sum();
    if total == 0 {
        h[0] = 1;
        total = 1;
    }
    while total != target {
        let (k, _) = h.iter().enumerate().fold((0, 0), |best, (i, &x)| if x > best.1 { (i, x) } else { best });
        if total < target {
            h[k] += 1;
            total += 1;
        } else {
            h[k] -= 1;
            total -= 1;
        }
    }
    Configuration::admissible(h)
}

/// A running replica of `X_t`.
#[derive(Debug, Clone)]
pub struct ZeroRangeState {
    params: LatticeParams,
    config: Configuration,
    time: f64,
    rng: ChaCha8Rng,
    rates: Fenwick,
    pending: Option<f64>,
    sum_sq: u64,
    events: u64,
    policy: StuckPolicy,
}

impl ZeroRangeState {
    pub fn new(c0: Configuration, params: LatticeParams, seed: u64) -> Result<Self, LatticeError> {
        if c0.n() != params.n() {
            return Err(LatticeError::LengthMismatch { expected: params.n(), got: c0.n() });
        }
        c0.check_admissible()?;
        let w: Vec<u64> = c0.heights().iter().map(|&h| u64::from(rho(h))).collect();
        let sum_sq = c0.heights().iter().map(|&h| u64::from(h) * u64::from(h)).sum();
        Ok(Self {
            params,
            config: c0,
            time: 0.0,
            rng: seeded(seed, STREAM_X),
            rates: Fenwick::from_weights(&w),
            pending: None,
            sum_sq,
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

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// `Σ_x η_x²`.
    pub fn sum_sq(&self) -> u64 {
        self.sum_sq
    }

    /// `Σ_x ρ(η_x)`, read from the rate index.
    pub fn excess(&self) -> u64 {
        self.rates.total()
    }

    /// `R = 2N² Σ ρ(η_x) + aN`.
    pub fn total_rate(&self) -> f64 {
        2.0 * self.params.jump_scale() * self.rates.total() as f64 + self.params.drift_rate()
    }

    /// Rate index entries equal `ρ(η_x)` and the cached square sum is exact.
    pub fn check_index(&self) -> bool {
        let ok_w = self.config.heights().iter().zip(self.rates.weights()).all(|(&h, &w)| u64::from(rho(h)) == w);
        let sq: u64 = self.config.heights().iter().map(|&h| u64::from(h) * u64::from(h)).sum();
        ok_w && sq == self.sum_sq && self.rates.total() == self.config.excess()
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

    fn fire(&mut self, time: f64) -> EventLogEntry {
        self.pending = None;
        self.time = time;
        self.events += 1;
        let drift = self.params.drift_rate();
        let r = self.total_rate();
        let u: f64 = self.rng.random::<f64>() * r;
        if u < drift || self.rates.total() == 0 {
            let changed = drift_in_place(self.config.heights_mut());
            if changed {
                let w: Vec<u64> = self.config.heights().iter().map(|&h| u64::from(rho(h))).collect();
                self.rates = Fenwick::from_weights(&w);
                self.sum_sq = self.config.heights().iter().map(|&h| u64::from(h) * u64::from(h)).sum();
            }
            return EventLogEntry { time, action: Action::Drift, site: None, suppressed: !changed };
        }
        let k = self.rng.random_range(0..2 * self.rates.total());
        let site = self.rates.find(k / 2);
        let dir = if k % 2 == 0 { JumpDir::Left } else { JumpDir::Right };
        let action = match dir {
            JumpDir::Left => Action::JumpLeft,
            JumpDir::Right => Action::JumpRight,
        };
        let h = self.config.heights_mut();
        let (hs, ht_old) = (u64::from(h[site]), site.checked_add_signed(dir.offset()).and_then(|t| h.get(t)).copied());
        match jump_in_place(h, site, dir) {
            Some(t) => {
                let ht = u64::from(ht_old.unwrap_or(0));
                self.sum_sq = self.sum_sq + 2 * ht + 2 - 2 * hs;
                let (ns, nt) = (h[site], h[t]);
                self.rates.set(site, u64::from(rho(ns)));
                self.rates.set(t, u64::from(rho(nt)));
                EventLogEntry { time, action, site: Some(site), suppressed: false }
            }
            None => EventLogEntry { time, action, site: Some(site), suppressed: true },
        }
    }

    /// Fires the next event.
    pub fn step(&mut self) -> Result<EventLogEntry, SimError> {
        match self.next_time() {
            Some(t) => Ok(self.fire(t)),
            None => Err(SimError::Stuck { time: self.time }),
        }
    }

    /// Runs the chain up to time `t`, reporting every event and holding
    /// interval to `sink`. The event clock is kept across calls, so the path
    /// does not depend on where observations are taken.
    pub fn advance_to<K: EventSink<Configuration> + ?Sized>(&mut self, t: f64, sink: &mut K) -> Result<(), SimError> {
        run_until(self, t, sink)
    }
}

impl Clocked for ZeroRangeState {
    type State = Configuration;

    fn clock(&self) -> f64 {
        self.time
    }
    fn set_clock(&mut self, t: f64) {
        self.time = t;
    }
    fn next_time(&mut self) -> Option<f64> {
        ZeroRangeState::next_time(self)
    }
    fn fire(&mut self, t: f64) -> EventLogEntry {
        ZeroRangeState::fire(self, t)
    }
    fn state(&self) -> &Configuration {
        &self.config
    }
    fn policy(&self) -> StuckPolicy {
        self.policy
    }
}

/// A continuous-time chain driven by one pending exponential clock.
pub(crate) trait Clocked {
    type State;
    fn clock(&self) -> f64;
    fn set_clock(&mut self, t: f64);
    fn next_time(&mut self) -> Option<f64>;
    fn fire(&mut self, t: f64) -> EventLogEntry;
    fn state(&self) -> &Self::State;
    fn policy(&self) -> StuckPolicy;
}

pub(crate) fn run_until<C, K>(chain: &mut C, t: f64, sink: &mut K) -> Result<(), SimError>
where
    C: Clocked,
    K: EventSink<C::State> + ?Sized,
{
    while chain.clock() < t {
        let now = chain.clock();
        match chain.next_time() {
            None => match chain.policy() {
                StuckPolicy::Error => return Err(SimError::Stuck { time: now }),
                StuckPolicy::Hold => {
                    sink.hold(t - now, chain.state());
                    chain.set_clock(t);
                }
            },
            Some(next) if next > t => {
                sink.hold(t - now, chain.state());
                chain.set_clock(t);
            }
            Some(next) => {
                sink.hold(next - now, chain.state());
                let e = chain.fire(next);
                sink.record(&e);
            }
        }
    }
    Ok(())
}

/// Checks that observation times are usable.
pub fn check_obs_times(times: &[f64]) -> Result<(), SimError> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(SimError::BadObservationTimes);
    }
    Ok(())
}

/// States of one replica at each observation time.
pub fn simulate_x(
    c0: Configuration,
    params: LatticeParams,
    obs_times: &[f64],
    seed: u64,
    policy: StuckPolicy,
    log: &mut dyn EventSink<Configuration>,
) -> Result<Vec<Configuration>, SimError> {
    check_obs_times(obs_times)?;
    let mut st = ZeroRangeState::new(c0, params, seed)?.with_policy(policy);
    let mut out = Vec::with_capacity(obs_times.len());
    for &t in obs_times {
        st.advance_to(t, log)?;
        out.push(st.config().clone());
    }
    Ok(out)
}

/// `S = 1 - M/N + 1/2N` rewritten through the counts.
pub fn boundary_from_mass(n: usize, mass: u64) -> f64 {
    site_position(n, n - mass as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn cfg(h: &[u32]) -> Configuration {
        Configuration::new(h.to_vec()).unwrap()
    }

    #[test]
    fn jump_examples() {
        let c = cfg(&[3, 1, 0, 0]);
        assert_eq!(apply_jump(&c, 0, JumpDir::Right).unwrap(), cfg(&[2, 2, 0, 0]));
        assert_eq!(apply_jump(&c, 0, JumpDir::Left).unwrap(), c);
        let c = cfg(&[2, 2, 0, 0]);
        let d = apply_jump(&c, 1, JumpDir::Right).unwrap();
        assert_eq!(d, cfg(&[2, 1, 1, 0]));
        assert_eq!(c.boundary_s().unwrap(), 5.0 / 8.0);
        assert_eq!(d.boundary_s().unwrap(), 7.0 / 8.0);
        assert!(apply_jump(&c, 4, JumpDir::Right).is_err());
    }

    #[test]
    fn drift_examples() {
        assert_eq!(apply_drift(&cfg(&[2, 1, 1, 0])), cfg(&[3, 1, 0, 0]));
        assert_eq!(apply_drift(&cfg(&[4, 0, 0, 0])), cfg(&[4, 0, 0, 0]));
        assert_eq!(apply_drift(&cfg(&[1, 1, 1, 1])), cfg(&[2, 1, 1, 0]));
    }

    #[test]
    fn projection_examples() {
        let y = project_y(&cfg(&[3, 1, 0, 0])).unwrap();
        assert_eq!(y.rho, vec![2, 0, 0, 0]);
        assert_eq!(y.mass, 2);
        assert_eq!(y.boundary_s, 5.0 / 8.0);
        assert_eq!(y.boundary_s, 1.0 - 2.0 / 4.0 + 1.0 / 8.0);
        let y = project_y(&cfg(&[1, 1, 1, 1])).unwrap();
        assert_eq!(y.mass, 0);
        assert_eq!(y.boundary_s, 9.0 / 8.0);
        assert_eq!(boundary_from_mass(4, 2), 5.0 / 8.0);
    }

    #[test]
    fn sampling_examples() {
        for n in [2, 5, 64] {
            assert_eq!(sample_initial(&Profile::FLAT, n).unwrap(), Configuration::flat(n));
        }
        assert_eq!(sample_initial(&Profile::HALF_STEP, 4).unwrap(), cfg(&[2, 2, 0, 0]));
        for n in [100, 1000] {
            let c = sample_initial(&Profile::Step { height: 3.0 }, n).unwrap();
            let f1 = |x: f64| core::f64::consts::SQRT_2 * num_traits::Float::cos(core::f64::consts::PI * x);
            let exact = 3.0 * core::f64::consts::SQRT_2 * num_traits::Float::sin(core::f64::consts::PI / 3.0)
                / core::f64::consts::PI;
            assert!((crate::lattice::pair(f1, &c) - exact).abs() < 10.0 / n as f64);
        }
    }

    #[test]
    fn stuck_state() {
        let p = LatticeParams::new(4, 0.0).unwrap();
        let mut s = ZeroRangeState::new(Configuration::flat(4), p, 1).unwrap();
        assert!(matches!(s.step(), Err(SimError::Stuck { .. })));
        assert!(matches!(s.advance_to(1.0, &mut ()), Err(SimError::Stuck { .. })));
        let mut s = s.with_policy(StuckPolicy::Hold);
        s.advance_to(1.0, &mut ()).unwrap();
        assert_eq!(s.time(), 1.0);
    }

    #[test]
    fn rates_small_example() {
        let p = LatticeParams::new(2, 0.0).unwrap();
        let s = ZeroRangeState::new(cfg(&[2, 0]), p, 1).unwrap();
        assert_eq!(s.total_rate(), 8.0);
    }

    #[test]
    fn zero_horizon_and_determinism() {
        let p = LatticeParams::new(16, 1.0).unwrap();
        let c0 = sample_initial(&Profile::HALF_STEP, 16).unwrap();
        let out = simulate_x(c0.clone(), p, &[0.0], 5, StuckPolicy::Error, &mut ()).unwrap();
        assert_eq!(out[0], c0);
        let mut l1 = Vec::new();
        let mut l2 = Vec::new();
        let a = simulate_x(c0.clone(), p, &[0.01, 0.05], 5, StuckPolicy::Error, &mut l1).unwrap();
        let b = simulate_x(c0, p, &[0.05], 5, StuckPolicy::Error, &mut l2).unwrap();
        assert_eq!(a[1], b[0]);
        assert_eq!(l1, l2);
        assert!(!l1.is_empty());
        assert!(l1.windows(2).all(|w| w[0].time < w[1].time));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn conservation_and_shape(n in 2usize..24, a in 0.0f64..4.0, seed in any::<u64>()) {
            let p = LatticeParams::new(n, a).unwrap();
            let c0 = sample_initial(&Profile::Step { height: 3.0 }, n).unwrap();
            let mut s = ZeroRangeState::new(c0, p, seed).unwrap();
            for _ in 0..2000 {
                if s.step().is_err() { break; }
                prop_assert!(s.config().is_admissible());
                prop_assert_eq!(s.config().total(), n as u64);
                prop_assert!(s.check_index());
            }
        }
    }
}
