//! Star-graph geometry, bond-length ensembles and observables.

use crate::fmath as fm;
use alloc::vec::Vec;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    EmptyGraph,
    NonPositiveLength { index: usize, value: f64 },
    NonFiniteLength { index: usize },
    BelowMinLength { index: usize, value: f64, l_min: f64 },
    BadRange { delta_l: f64 },
    BadSplit { v: usize, alpha: usize, bonds: usize },
    BondOutOfRange { bond: usize, bonds: usize },
    BadObservable { bond: usize },
}

impl core::fmt::Display for GraphError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GraphError::EmptyGraph => write!(f, "empty bond-length vector"),
            GraphError::NonPositiveLength { index, value } => {
                write!(f, "bond {index}: non-positive length {value}")
            }
            GraphError::NonFiniteLength { index } => write!(f, "bond {index}: non-finite length"),
            GraphError::BelowMinLength { index, value, l_min } => {
                write!(f, "bond {index}: length {value} below configured minimum {l_min}")
            }
            GraphError::BadRange { delta_l } => write!(f, "negative length spread {delta_l}"),
            GraphError::BadSplit { v, alpha, bonds } => {
                write!(f, "split observable v={v}, alpha={alpha} incompatible with {bonds} bonds")
            }
            GraphError::BondOutOfRange { bond, bonds } => {
                write!(f, "bond index {bond} out of range 1..={bonds}")
            }
            GraphError::BadObservable { bond } => {
                write!(f, "observable on bond {bond} not defined on the full bond")
            }
        }
    }
}

impl core::error::Error for GraphError {}

/// Validation limits for graph construction.
#[derive(Debug, Clone, Copy)]
pub struct GraphConfig {
    /// Hard lower bound on bond lengths (the matrix-element error bound
    /// scales like `1/(k L_min)`, so zero-length bonds are meaningless).
    pub l_min: f64,
    /// Largest denominator checked by the rational-ratio diagnostic.
    pub rational_q_max: u64,
    /// Tolerance of the rational-ratio diagnostic.
    pub rational_tol: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { l_min: 0.5, rational_q_max: 20, rational_tol: 1e-9 }
    }
}

/// A pair of bonds whose length ratio is suspiciously close to a small
/// rational: coincident-pole trouble for the secular solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalRatioWarning {
    pub bond_i: usize,
    pub bond_j: usize,
    pub p: u64,
    pub q: u64,
    pub deviation: f64,
}

/// Metric star graph: `b` bonds meeting at one central vertex.
///
/// Immutable after construction; shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct StarGraph {
    lengths: Vec<f64>,
    total: f64,
}

impl StarGraph {
    /// Validate with the default [`GraphConfig`].
    pub fn new(lengths: Vec<f64>) -> Result<Self, GraphError> {
        Self::with_config(lengths, &GraphConfig::default())
    }

    pub fn with_config(lengths: Vec<f64>, cfg: &GraphConfig) -> Result<Self, GraphError> {
        if lengths.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        for (i, &l) in lengths.iter().enumerate() {
            if !l.is_finite() {
                return Err(GraphError::NonFiniteLength { index: i });
            }
            if l <= 0.0 {
                return Err(GraphError::NonPositiveLength { index: i, value: l });
            }
            if l < cfg.l_min {
                return Err(GraphError::BelowMinLength { index: i, value: l, l_min: cfg.l_min });
            }
        }
        let mut total = 0.0;
        for &l in &lengths {
            total += l;
        }
        Ok(StarGraph { lengths, total })
    }

    #[inline]
    pub fn bond_count(&self) -> usize {
        self.lengths.len()
    }

    #[inline]
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    #[inline]
    pub fn length(&self, bond: usize) -> f64 {
        self.lengths[bond]
    }

    #[inline]
    pub fn total_length(&self) -> f64 {
        self.total
    }

    pub fn max_length(&self) -> f64 {
        self.lengths.iter().cloned().fold(0.0, f64::max)
    }

    pub fn min_length(&self) -> f64 {
        self.lengths.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Classical average of the first-`v` bond indicator:
    /// `sum_{i<v} L_i / sum_j L_j`.
    pub fn classical_average(&self, v: usize) -> f64 {
        let head: f64 = self.lengths[..v].iter().sum();
        head / self.total
    }

    /// Pairwise rational-ratio diagnostic (heuristic stand-in for Q-linear
    /// independence): flags `L_i/L_j` within `tol` of `p/q`, `q <= q_max`.
    ///
    /// Warnings, not errors: commensurate lengths only become fatal when the
    /// solver actually meets coincident poles.
    pub fn independence_warnings(&self, cfg: &GraphConfig) -> Vec<RationalRatioWarning> {
        let mut out = Vec::new();
        let b = self.lengths.len();
        for i in 0..b {
            for j in (i + 1)..b {
                let ratio = self.lengths[i] / self.lengths[j];
                if let Some((p, q, dev)) =
                    best_rational(ratio, cfg.rational_q_max, cfg.rational_tol)
                {
                    out.push(RationalRatioWarning {
                        bond_i: i + 1,
                        bond_j: j + 1,
                        p,
                        q,
                        deviation: dev,
                    });
                }
            }
        }
        out
    }
}

/// Continued-fraction search for `p/q ~ x` with `q <= q_max`; `Some` when a
/// convergent lands within `tol`.
fn best_rational(x: f64, q_max: u64, tol: f64) -> Option<(u64, u64, f64)> {
    let mut a = fm::floor(x);
    let mut frac = x - a;
    let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, a as u64, 1u64);
    for _ in 0..64 {
        let dev = fm::fabs(x - p1 as f64 / q1 as f64);
        if dev <= tol {
            return Some((p1, q1, dev));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / frac;
        a = fm::floor(inv);
        frac = inv - a;
        let p2 = (a as u64).saturating_mul(p1).saturating_add(p0);
        let q2 = (a as u64).saturating_mul(q1).saturating_add(q0);
        if q2 > q_max {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    None
}

/// Draw `alpha*v` i.i.d. lengths uniformly from `[l_bar, l_bar + delta_l]`,
/// reproducibly from `seed`.
///
/// For the large-graph limit keep `v * delta_l` small; the usual recipe is
/// `delta_l = c / v^2` with `c` of order a few times `l_bar`.
pub fn sample_lengths(
    v: usize,
    alpha: usize,
    l_bar: f64,
    delta_l: f64,
    seed: u64,
) -> Result<Vec<f64>, GraphError> {
    if delta_l < 0.0 || !delta_l.is_finite() {
        return Err(GraphError::BadRange { delta_l });
    }
    if l_bar <= 0.0 {
        return Err(GraphError::NonPositiveLength { index: 0, value: l_bar });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = alpha * v;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        // 53-bit uniform in [0,1); bit-stable across platforms.
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        out.push(l_bar + delta_l * u);
    }
    Ok(out)
}

/// Indicator observable of the first `v` of `alpha*v` bonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitObservable {
    pub v: usize,
    pub alpha: usize,
}

impl SplitObservable {
    pub fn new(v: usize, alpha: usize) -> Result<Self, GraphError> {
        if v == 0 || alpha == 0 {
            return Err(GraphError::BadSplit { v, alpha, bonds: 0 });
        }
        Ok(SplitObservable { v, alpha })
    }

    pub fn bonds(&self) -> usize {
        self.v * self.alpha
    }

    pub fn check_compatible(&self, graph: &StarGraph) -> Result<(), GraphError> {
        if self.bonds() != graph.bond_count() {
            return Err(GraphError::BadSplit {
                v: self.v,
                alpha: self.alpha,
                bonds: graph.bond_count(),
            });
        }
        Ok(())
    }

    /// `B_bond`: 1 on bonds `1..=v`, 0 on `v+1..=alpha v` (1-based).
    pub fn indicator_value(&self, bond: usize) -> Result<f64, GraphError> {
        if bond == 0 || bond > self.bonds() {
            return Err(GraphError::BondOutOfRange { bond, bonds: self.bonds() });
        }
        Ok(if bond <= self.v { 1.0 } else { 0.0 })
    }
}

/// One smooth per-bond function, closed under scaling, addition and
/// restriction so arbitrary test observables can be assembled without a
/// plugin mechanism.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothFn {
    Constant(f64),
    /// Coefficients in ascending powers of `x`.
    Polynomial(Vec<f64>),
    /// `amp * cos(freq * x + phase)`.
    CosPacket { amp: f64, freq: f64, phase: f64 },
    /// Piecewise-linear samples `(xs strictly increasing, ys)`.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
    Scaled(f64, alloc::boxed::Box<SmoothFn>),
    Sum(Vec<SmoothFn>),
}

impl SmoothFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SmoothFn::Constant(c) => *c,
            SmoothFn::Polynomial(cs) => {
                let mut acc = 0.0;
                for &c in cs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            }
            SmoothFn::CosPacket { amp, freq, phase } => amp * fm::cos(freq * x + phase),
            SmoothFn::Tabulated { xs, ys } => {
                if xs.is_empty() {
                    return 0.0;
                }
                match xs.binary_search_by(|t| t.partial_cmp(&x).unwrap()) {
                    Ok(i) => ys[i],
                    Err(0) => ys[0],
                    Err(i) if i >= xs.len() => ys[ys.len() - 1],
                    Err(i) => {
                        let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                        ys[i - 1] + t * (ys[i] - ys[i - 1])
                    }
                }
            }
            SmoothFn::Scaled(s, f) => s * f.eval(x),
            SmoothFn::Sum(fs) => fs.iter().map(|f| f.eval(x)).sum(),
        }
    }

    /// `int_0^L f(x) dx`, closed form where available.
    pub fn integral(&self, l: f64) -> f64 {
        match self {
            SmoothFn::Constant(c) => c * l,
            SmoothFn::Polynomial(cs) => {
                let mut acc = 0.0;
                for (n, &c) in cs.iter().enumerate().rev() {
                    acc = acc * l + c / (n as f64 + 1.0);
                }
                acc * l
            }
            SmoothFn::CosPacket { amp, freq, phase } => {
                if fm::fabs(*freq) < 1e-300 {
                    amp * fm::cos(*phase) * l
                } else {
                    amp * (fm::sin(freq * l + phase) - fm::sin(*phase)) / freq
                }
            }
            SmoothFn::Tabulated { xs, ys } => {
                // Trapezoid over the sample grid clipped to [0, l].
                let mut acc = 0.0;
                for w in xs.windows(2).zip(ys.windows(2)) {
                    let (x0, x1) = (w.0[0].max(0.0), w.0[1].min(l));
                    if x1 <= x0 {
                        continue;
                    }
                    let y0 = self.eval(x0);
                    let y1 = self.eval(x1);
                    acc += 0.5 * (y0 + y1) * (x1 - x0);
                }
                acc
            }
            SmoothFn::Scaled(s, f) => s * f.integral(l),
            SmoothFn::Sum(fs) => fs.iter().map(|f| f.integral(l)).sum(),
        }
    }

    /// `true` when the function is defined (finite) across `[0, l]`.
    fn defined_on(&self, l: f64) -> bool {
        match self {
            SmoothFn::Tabulated { xs, .. } => {
                !xs.is_empty() && xs[0] <= 0.0 && *xs.last().unwrap() >= l
            }
            SmoothFn::Scaled(_, f) => f.defined_on(l),
            SmoothFn::Sum(fs) => fs.iter().all(|f| f.defined_on(l)),
            _ => true,
        }
    }
}

/// A vector of per-bond smooth functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothObservable {
    pub per_bond: Vec<SmoothFn>,
}

impl SmoothObservable {
    pub fn new(per_bond: Vec<SmoothFn>, graph: &StarGraph) -> Result<Self, GraphError> {
        if per_bond.len() != graph.bond_count() {
            return Err(GraphError::BadSplit {
                v: per_bond.len(),
                alpha: 1,
                bonds: graph.bond_count(),
            });
        }
        for (i, f) in per_bond.iter().enumerate() {
            if !f.defined_on(graph.length(i)) {
                return Err(GraphError::BadObservable { bond: i + 1 });
            }
        }
        Ok(SmoothObservable { per_bond })
    }

    /// The constant-1 observable (whose matrix element is the norm).
    pub fn ones(graph: &StarGraph) -> Self {
        SmoothObservable {
            per_bond: alloc::vec![SmoothFn::Constant(1.0); graph.bond_count()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_bond_graph() {
        let g = StarGraph::new(vec![1.0]).unwrap();
        assert_eq!(g.bond_count(), 1);
        assert_eq!(g.total_length(), 1.0);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert_eq!(StarGraph::new(vec![]), Err(GraphError::EmptyGraph));
        assert!(matches!(
            StarGraph::new(vec![1.0, -2.0]),
            Err(GraphError::NonPositiveLength { index: 1, .. })
        ));
        assert!(matches!(
            StarGraph::new(vec![1.0, 0.1]),
            Err(GraphError::BelowMinLength { index: 1, .. })
        ));
    }

    #[test]
    fn sqrt2_ratio_is_clean_but_2_is_flagged() {
        let cfg = GraphConfig::default();
        let g = StarGraph::new(vec![1.0, core::f64::consts::SQRT_2]).unwrap();
        assert!(g.independence_warnings(&cfg).is_empty());

        let g = StarGraph::new(vec![1.0, 2.0]).unwrap();
        let warns = g.independence_warnings(&cfg);
        assert_eq!(warns.len(), 1);
        assert_eq!((warns[0].p, warns[0].q), (1, 2));
    }

    #[test]
    fn sampling_is_contained_and_deterministic() {
        let a = sample_lengths(2, 3, 1.0, 0.01, 1).unwrap();
        let b = sample_lengths(2, 3, 1.0, 0.01, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert!(a.iter().all(|&l| (1.0..=1.01).contains(&l)));

        let c = sample_lengths(1, 1, 1.0, 0.0, 7).unwrap();
        assert_eq!(c, vec![1.0]);

        assert!(matches!(
            sample_lengths(1, 1, 1.0, -0.5, 7),
            Err(GraphError::BadRange { .. })
        ));
    }

    #[test]
    fn indicator_values() {
        let obs = SplitObservable::new(2, 3).unwrap();
        assert_eq!(obs.indicator_value(1).unwrap(), 1.0);
        assert_eq!(obs.indicator_value(2).unwrap(), 1.0);
        assert_eq!(obs.indicator_value(3).unwrap(), 0.0);
        assert_eq!(obs.indicator_value(6).unwrap(), 0.0);
        assert!(obs.indicator_value(7).is_err());
        assert!(obs.indicator_value(0).is_err());
    }

    #[test]
    fn classical_average_tends_to_inv_alpha() {
        let lengths = sample_lengths(30, 3, 1.0, 1.0 / 900.0, 5).unwrap();
        let g = StarGraph::new(lengths).unwrap();
        let avg = g.classical_average(30);
        assert!((avg - 1.0 / 3.0).abs() < 1e-3, "avg={avg}");
    }

    #[test]
    fn smooth_fn_algebra() {
        let f = SmoothFn::Sum(vec![
            SmoothFn::Polynomial(vec![0.0, 1.0]),
            SmoothFn::Scaled(2.0, alloc::boxed::Box::new(SmoothFn::Constant(1.5))),
        ]);
        assert!((f.eval(2.0) - 5.0).abs() < 1e-15);
        // int_0^2 (x + 3) dx = 2 + 6
        assert!((f.integral(2.0) - 8.0).abs() < 1e-14);
    }
}
