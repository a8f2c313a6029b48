//! Finite measures on `[0, 1]`: atomic (empirical) measures, piecewise-linear
//! densities, window mollifiers on the torus and on the line, and the
//! cosine-family metric.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::lattice::{site_position, Configuration};
use crate::quadrature::GaussLegendre;
use crate::testfn::{CosineMode, TestFunction};

/// Number of cosine modes kept by [`measure_distance`]. The discarded tail is
/// at most `2^-64`.
pub const METRIC_MODES: u32 = 64;

/// Operations shared by atomic measures and densities.
pub trait Measure {
    fn total_mass(&self) -> f64;

    /// `∫ f dμ`. Densities use the trapezoid rule on their own nodes.
    fn pair_fn(&self, f: &dyn Fn(f64) -> f64) -> f64;

    /// `μ([lo, hi])`.
    fn mass_in(&self, lo: f64, hi: f64) -> f64;

    /// Points where the measure (or its density) is not smooth.
    fn breakpoints(&self, out: &mut Vec<f64>);

    fn pair<T: TestFunction>(&self, f: &T) -> f64
    where
        Self: Sized,
    {
        self.pair_fn(&|x| f.value(x))
    }
}

/// `Σ m_i δ_{x_i}` with the atoms sorted by position.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    sites: Vec<f64>,
    masses: Vec<f64>,
    // cum[i] = Σ_{k<i} masses[k]
    cum: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Builds a measure from `(site, mass)` pairs in any order. Negative or
    /// non-finite masses are rejected.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Option<Self> {
        if atoms.iter().any(|&(x, m)| !x.is_finite() || !(m.is_finite() && m >= 0.0)) {
            return None;
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (sites, masses): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
        Some(Self::from_sorted(sites, masses))
    }

    fn from_sorted(sites: Vec<f64>, masses: Vec<f64>) -> Self {
        let mut cum = Vec::with_capacity(masses.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for &m in &masses {
            acc += m;
            cum.push(acc);
        }
        Self { sites, masses, cum }
    }

    /// `μ_η = (1/N) Σ_x η_x δ_x`.
    pub fn from_configuration(c: &Configuration) -> Self {
        Self::from_weights(c.heights().iter().map(|&h| f64::from(h)))
    }

    /// `(1/N) Σ_x w_x δ_x` on `A_N`, where `N` is the number of weights.
    pub fn from_weights<I>(w: I) -> Self
    where
        I: IntoIterator<Item = f64>,
        I::IntoIter: ExactSizeIterator,
    {
        let it = w.into_iter();
        let n = it.len();
        let inv = 1.0 / n as f64;
        let masses: Vec<f64> = it.map(|h| h * inv).collect();
        let sites = (0..n).map(|i| site_position(n, i)).collect();
        Self::from_sorted(sites, masses)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sites.iter().copied().zip(self.masses.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

impl Measure for EmpiricalMeasure {
    fn total_mass(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    fn pair_fn(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        self.atoms().map(|(x, m)| f(x) * m).sum()
    }

    fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        let a = self.sites.partition_point(|&x| x < lo);
        let b = self.sites.partition_point(|&x| x <= hi);
        if b <= a {
            0.0
        } else {
            self.cum[b] - self.cum[a]
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.sites);
    }
}

/// A density that is linear between consecutive nodes and zero outside the
/// node range. Repeated nodes encode jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    nodes: Vec<f64>,
    values: Vec<f64>,
    cum: Vec<f64>,
}

impl GridDensity {
    /// Nodes must be non-decreasing and as many as the values.
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Option<Self> {
        if nodes.len() != values.len() || nodes.len() < 2 {
            return None;
        }
        if nodes.windows(2).any(|w| !(w[1] >= w[0])) || values.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mut cum = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for k in 1..nodes.len() {
            acc += 0.5 * (nodes[k] - nodes[k - 1]) * (values[k] + values[k - 1]);
            cum.push(acc);
        }
        Some(Self { nodes, values, cum })
    }

    /// Samples on the uniform grid `lo + j (hi - lo) / (len - 1)`.
    pub fn uniform(lo: f64, hi: f64, values: Vec<f64>) -> Option<Self> {
        let m = values.len().checked_sub(1)?;
        let h = (hi - lo) / m as f64;
        let nodes = (0..=m).map(|j| if j == m { hi } else { lo + h * j as f64 }).collect();
        Self::new(nodes, values)
    }

    /// Samples a function on the uniform grid with `m` intervals over `[0, 1]`.
    pub fn sample<F: Fn(f64) -> f64>(m: usize, f: F) -> Self {
        let values = (0..=m).map(|j| f(j as f64 / m as f64)).collect();
        Self::uniform(0.0, 1.0, values).expect("finite samples")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    // Index k with nodes[k] <= x < nodes[k + 1]; None outside the range.
    fn segment(&self, x: f64) -> Option<usize> {
        let n = self.nodes.len();
        if x < self.nodes[0] || x > self.nodes[n - 1] {
            return None;
        }
        let k = self.nodes.partition_point(|&t| t <= x);
        Some(k.saturating_sub(1).min(n - 2))
    }

    /// Value at `x`, right-continuous at jumps.
    pub fn eval(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(k) => {
                let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
                if x1 <= x0 {
                    return self.values[k + 1];
                }
                let t = (x - x0) / (x1 - x0);
                self.values[k] + t * (self.values[k + 1] - self.values[k])
            }
        }
    }

    // ∫_{-∞}^{x}
    fn antiderivative(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return 0.0;
        }
        if x >= self.nodes[n - 1] {
            return self.cum[n - 1];
        }
        let k = self.segment(x).unwrap_or(0);
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        let d = x - x0;
        let slope = if x1 > x0 { (self.values[k + 1] - self.values[k]) / (x1 - x0) } else { 0.0 };
        self.cum[k] + d * (self.values[k] + 0.5 * slope * d)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl Measure for GridDensity {
    fn total_mass(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    fn pair_fn(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        let mut prev = (self.nodes[0], f(self.nodes[0]) * self.values[0]);
        for k in 1..self.nodes.len() {
            let x = self.nodes[k];
            let g = f(x) * self.values[k];
            s += 0.5 * (x - prev.0) * (prev.1 + g);
            prev = (x, g);
        }
        s
    }

    fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        self.antiderivative(hi) - self.antiderivative(lo)
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.nodes);
    }
}

impl<M: Measure + ?Sized> Measure for &M {
    fn total_mass(&self) -> f64 {
        (**self).total_mass()
    }
    fn pair_fn(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        (**self).pair_fn(f)
    }
    fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        (**self).mass_in(lo, hi)
    }
    fn breakpoints(&self, out: &mut Vec<f64>) {
        (**self).breakpoints(out)
    }
}

/// Geometry of the window average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wrap {
    /// `0` and `1` identified; output lives on `[0, 1]`.
    Torus,
    /// No identification; output lives on `[-ε, 1 + ε]`.
    Line,
}

/// `x ↦ μ([x - ε, x + ε]) / 2ε`.
#[derive(Debug, Clone)]
pub struct Mollified<M> {
    base: M,
    eps: f64,
    wrap: Wrap,
}

/// `K_ε μ`, the window average on the torus.
pub fn mollify_torus<M: Measure>(m: M, eps: f64) -> Mollified<M> {
    Mollified::new(m, eps, Wrap::Torus)
}

/// `M_ε μ`, the window average on the real line.
pub fn mollify_line<M: Measure>(m: M, eps: f64) -> Mollified<M> {
    Mollified::new(m, eps, Wrap::Line)
}

impl<M: Measure> Mollified<M> {
    pub fn new(base: M, eps: f64, wrap: Wrap) -> Self {
        assert!(eps > 0.0 && eps < 0.5, "mollifier width must lie in (0, 1/2), got {eps}");
        Self { base, eps, wrap }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn wrap(&self) -> Wrap {
        self.wrap
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    /// Interval carrying the output density.
    pub fn domain(&self) -> (f64, f64) {
        match self.wrap {
            Wrap::Torus => (0.0, 1.0),
            Wrap::Line => (-self.eps, 1.0 + self.eps),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = (x - self.eps, x + self.eps);
        let mass = match self.wrap {
            Wrap::Line => self.base.mass_in(lo, hi),
            Wrap::Torus => {
                if lo < 0.0 {
                    self.base.mass_in(lo + 1.0, 1.0) + self.base.mass_in(0.0, hi)
                } else if hi > 1.0 {
                    self.base.mass_in(lo, 1.0) + self.base.mass_in(0.0, hi - 1.0)
                } else {
                    self.base.mass_in(lo, hi)
                }
            }
        };
        mass / (2.0 * self.eps)
    }

    /// Sorted points of the output domain where the density can kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut raw = Vec::new();
        self.base.breakpoints(&mut raw);
        let (lo, hi) = self.domain();
        let mut out = Vec::with_capacity(2 * raw.len() + 2);
        out.push(lo);
        out.push(hi);
        for &b in &raw {
            for c in [b - self.eps, b + self.eps] {
                let c = match self.wrap {
                    Wrap::Torus => c - c.floor(),
                    Wrap::Line => c,
                };
                if c > lo && c < hi {
                    out.push(c);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `∫ g(x) K_ε μ(x) dx` over the output domain, by Gauss–Legendre on
    /// panels between kinks.
    pub fn integrate_with<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        integrate_panels(&self.breakpoints(), |x| g(x) * self.eval(x))
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate_with(|_| 1.0)
    }

    /// Samples on `m + 1` uniform nodes over the output domain.
    pub fn to_grid(&self, m: usize) -> GridDensity {
        let (lo, hi) = self.domain();
        let h = (hi - lo) / m as f64;
        let values = (0..=m).map(|j| self.eval(lo + h * j as f64)).collect();
        GridDensity::uniform(lo, hi, values).expect("finite samples")
    }
}

const PANEL_RULE: usize = 8;
// Panels wider than this are subdivided so oscillatory weights stay resolved.
const MAX_PANEL: f64 = 1.0 / 128.0;

fn integrate_panels<F: Fn(f64) -> f64>(breaks: &[f64], f: F) -> f64 {
    let gl = GaussLegendre::new(PANEL_RULE);
    let mut s = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let pieces = ((b - a) / MAX_PANEL).ceil().max(1.0) as usize;
        s += gl.integrate_composite(a, b, pieces, &f);
    }
    s
}

/// `∫ |p - q|` for two mollified measures sharing a wrap mode.
pub fn l1_distance<A: Measure, B: Measure>(p: &Mollified<A>, q: &Mollified<B>) -> f64 {
    let mut breaks = p.breakpoints();
    breaks.extend(q.breakpoints());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    integrate_panels(&breaks, |x| (p.eval(x) - q.eval(x)).abs())
}

/// `Σ_{j=0}^{J} 2^-j (|⟨f_j, ν⟩ - ⟨f_j, μ⟩| ∧ 1)` over the cosine family.
pub fn measure_distance_truncated<A: Measure + ?Sized, B: Measure + ?Sized>(nu: &A, mu: &B, modes: u32) -> f64 {
    let mut s = 0.0;
    let mut w = 1.0;
    for j in 0..=modes {
        let f = CosineMode(j);
        let d = (nu.pair_fn(&|x| f.value(x)) - mu.pair_fn(&|x| f.value(x))).abs();
        s += w * d.min(1.0);
        w *= 0.5;
    }
    s
}

/// The cosine-family metric truncated at [`METRIC_MODES`].
pub fn measure_distance<A: Measure + ?Sized, B: Measure + ?Sized>(nu: &A, mu: &B) -> f64 {
    measure_distance_truncated(nu, mu, METRIC_MODES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn atom(x: f64) -> EmpiricalMeasure {
        EmpiricalMeasure::from_atoms(vec![(x, 1.0)]).unwrap()
    }

    #[test]
    fn distance_examples() {
        let c = Configuration::admissible(vec![3, 1, 0, 0]).unwrap();
        let mu = EmpiricalMeasure::from_configuration(&c);
        assert_eq!(measure_distance(&mu, &mu), 0.0);

        let (d0, d1) = (atom(0.0), atom(1.0));
        assert!(measure_distance_truncated(&d0, &d1, 0).abs() < 1e-15);
        assert!((measure_distance_truncated(&d0, &d1, 1) - 0.5).abs() < 1e-15);

        let one = GridDensity::sample(100, |_| 1.0);
        let half = GridDensity::sample(100, |_| 0.5);
        assert!((measure_distance(&one, &half) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn torus_window_examples() {
        let one = GridDensity::sample(50, |_| 1.0);
        let k = mollify_torus(&one, 0.2);
        for &x in &[0.0, 0.1, 0.5, 0.93, 1.0] {
            assert!((k.eval(x) - 1.0).abs() < 1e-13);
        }
        let d = mollify_torus(atom(0.5), 0.25);
        assert!((d.eval(0.3) - 2.0).abs() < 1e-15);
        assert!((d.eval(0.7) - 2.0).abs() < 1e-15);
        assert_eq!(d.eval(0.2), 0.0);
        assert_eq!(d.eval(0.8), 0.0);
        // Wraparound: an atom at 0 shows up near 1.
        let w = mollify_torus(atom(0.0), 0.25);
        assert!((w.eval(0.9) - 2.0).abs() < 1e-15);
        assert!((w.total_mass() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn line_window_examples() {
        let m = mollify_line(atom(0.0), 0.25);
        assert_eq!(m.domain(), (-0.25, 1.25));
        assert!((m.eval(-0.2) - 2.0).abs() < 1e-15);
        assert!((m.eval(0.2) - 2.0).abs() < 1e-15);
        assert_eq!(m.eval(0.3), 0.0);
        assert!((m.total_mass() - 1.0).abs() < 1e-13);

        let one = GridDensity::sample(40, |_| 1.0);
        let m = mollify_line(&one, 0.25);
        assert!((m.eval(0.0) - 0.5).abs() < 1e-14);
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_density_jump() {
        let g = GridDensity::new(vec![0.0, 0.5, 0.5, 1.0], vec![2.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.eval(0.25), 2.0);
        assert_eq!(g.eval(0.75), 0.0);
        assert!((g.total_mass() - 1.0).abs() < 1e-15);
        assert!((g.mass_in(0.25, 0.75) - 0.5).abs() < 1e-15);
        assert!((g.pair_fn(&|x| x) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empirical_mass_in_is_closed() {
        let m = EmpiricalMeasure::from_atoms(vec![(0.5, 0.25), (0.25, 0.5), (0.75, 0.25)]).unwrap();
        assert_eq!(m.mass_in(0.25, 0.5), 0.75);
        assert_eq!(m.mass_in(0.3, 0.4), 0.0);
        assert_eq!(m.total_mass(), 1.0);
        assert!(EmpiricalMeasure::from_atoms(vec![(0.5, -1.0)]).is_none());
    }

    #[test]
    fn fourier_multiplier_single_mode() {
        let m = EmpiricalMeasure::from_atoms(vec![(0.13, 0.4), (0.61, 0.6)]).unwrap();
        let eps = 0.07;
        let k = mollify_torus(&m, eps);
        for kk in 1..=32 {
            let w = 2.0 * PI * f64::from(kk);
            let re = k.integrate_with(|x| (w * x).cos());
            let im = k.integrate_with(|x| (w * x).sin());
            let mult = (w * eps).sin() / (w * eps);
            let re0 = m.pair_fn(&|x| (w * x).cos());
            let im0 = m.pair_fn(&|x| (w * x).sin());
            assert!((re - mult * re0).abs() < 1e-10, "k={kk}");
            assert!((im - mult * im0).abs() < 1e-10, "k={kk}");
        }
    }
}
