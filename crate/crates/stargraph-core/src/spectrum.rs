//! Pole enumeration and eigenvalue solving for the secular equation
//! `Z(k) = sum_j tan(k L_j) = 0`.
//!
//! `Z` is strictly increasing between consecutive poles of the tangent
//! lattice (its derivative is `sum_j L_j sec^2(k L_j) > 0`), so every open
//! gap between neighbouring poles carries exactly one root.  The solver
//! walks the merged pole stream, brackets each gap, bisects to a small
//! fraction of the gap and polishes with safeguarded Newton steps, finishing
//! with two Newton steps in double-double `k` so residuals remain meaningful
//! at phases far beyond f64 resolution.

use crate::fmath::{self as fm, CompensatedSum, Dd};
use crate::graph::StarGraph;
use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumError {
    /// Evaluation point closer to a pole than the guard distance.
    PoleProximity { k: f64, bond: usize, distance: f64 },
    /// Two poles closer than the coincidence tolerance (commensurate
    /// lengths); gaps degenerate and the one-root-per-gap contract breaks.
    CoincidentPoles { k: f64, bond_a: usize, bond_b: usize },
    /// Iteration budget exhausted before meeting the residual tolerance.
    NoConvergence { n: u64, k: f64, residual: f64 },
    /// Phase `k * L` beyond the exact-reduction range.
    PhaseRangeExceeded { k: f64 },
    BadRequest,
}

impl core::fmt::Display for SpectrumError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpectrumError::PoleProximity { k, bond, distance } => {
                write!(f, "k={k} within guard distance {distance:e} of a pole of bond {bond}")
            }
            SpectrumError::CoincidentPoles { k, bond_a, bond_b } => {
                write!(f, "coincident poles of bonds {bond_a} and {bond_b} near k={k}")
            }
            SpectrumError::NoConvergence { n, k, residual } => {
                write!(f, "root {n} near k={k} did not converge (residual {residual:e})")
            }
            SpectrumError::PhaseRangeExceeded { k } => {
                write!(f, "phase k*L at k={k} exceeds the exact reduction range")
            }
            SpectrumError::BadRequest => write!(f, "invalid spectrum request"),
        }
    }
}

impl core::error::Error for SpectrumError {}

/// A pole `k = pi (order + 1/2) / L_bond` of the tangent lattice.
/// `bond` is 1-based, matching the observable indexing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub k: f64,
    pub bond: usize,
    pub order: u64,
}

impl Pole {
    #[inline]
    fn at(graph: &StarGraph, bond0: usize, order: u64) -> Pole {
        Pole {
            k: PI * (order as f64 + 0.5) / graph.length(bond0),
            bond: bond0 + 1,
            order,
        }
    }
}

/// One solved root with its bracketing poles and residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueRecord {
    /// 1-based ordinal: the n-th positive root.
    pub n: u64,
    pub k: f64,
    /// Double-double tail of `k` from the final polish.
    pub k_lo: f64,
    pub left_pole: Pole,
    pub right_pole: Pole,
    /// `|Z(k)|` evaluated at the double-double root.
    pub z_residual: f64,
    /// `|Z(k)| / (k Z'(k))`: the root displacement relative to `k`.
    pub rel_residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Bound on the relative residual `|Z|/(k Z')`.
    pub rel_tol: f64,
    /// Bisection refines the gap to this fraction before Newton starts.
    pub bisect_frac: f64,
    /// Evaluation budget per root.
    pub max_iter: usize,
    /// Guard distance (relative to `k`) for the public `secular` entry.
    pub pole_guard: f64,
    /// Relative pole separation below which poles count as coincident.
    pub coincidence_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tol: 1e-11,
            bisect_frac: 1e-6,
            max_iter: 200,
            pole_guard: 1e-12,
            coincidence_tol: 1e-13,
        }
    }
}

/// `(Z, Z')` at `k = k_hi + k_lo`, phases reduced in double-double.
///
/// `sec^2` comes free from `tan` via `1 + tan^2`; the sum of tangents is
/// compensated because the scar states live off cancellations between huge
/// pole-adjacent terms.
pub fn secular_pair(graph: &StarGraph, k_hi: f64, k_lo: f64) -> (f64, f64) {
    let mut z = CompensatedSum::default();
    let mut zp = 0.0;
    for &l in graph.lengths() {
        let (t, _, _) = fm::tan_phase(k_hi, k_lo, l);
        z.add(t);
        zp += l * (1.0 + t * t);
    }
    (z.value(), zp)
}

/// `Z(k)` with the pole-proximity guard of the public contract.
pub fn secular(graph: &StarGraph, k: f64, cfg: &SolverConfig) -> Result<f64, SpectrumError> {
    if k * graph.max_length() > fm::MAX_PHASE {
        return Err(SpectrumError::PhaseRangeExceeded { k });
    }
    let guard = cfg.pole_guard * k.max(1.0);
    let mut z = CompensatedSum::default();
    for (i, &l) in graph.lengths().iter().enumerate() {
        let (t, r, _) = fm::tan_phase(k, 0.0, l);
        let dist = (PI / 2.0 - fm::fabs(r.hi)) / l;
        if dist < guard {
            return Err(SpectrumError::PoleProximity { k, bond: i + 1, distance: dist });
        }
        z.add(t);
    }
    Ok(z.value())
}

/// Number of poles (over all bonds) strictly below `k`.
pub fn pole_count_below(graph: &StarGraph, k: f64) -> u64 {
    let mut n = 0u64;
    for &l in graph.lengths() {
        let x = k * l / PI + 0.5;
        if x > 0.0 {
            n += fm::floor(x) as u64;
        }
    }
    n
}

/// All poles in the open interval `(k_lo, k_hi)`, merged and sorted.
pub fn poles_in(graph: &StarGraph, k_lo: f64, k_hi: f64) -> Result<Vec<Pole>, SpectrumError> {
    if !(k_lo >= 0.0 && k_hi > k_lo) {
        return Err(SpectrumError::BadRequest);
    }
    let mut out = Vec::new();
    for bond0 in 0..graph.bond_count() {
        let l = graph.length(bond0);
        let mut order = fm::floor((k_lo * l / PI + 0.5).max(0.0)) as u64;
        loop {
            let p = Pole::at(graph, bond0, order);
            if p.k >= k_hi {
                break;
            }
            if p.k > k_lo {
                out.push(p);
            }
            order += 1;
        }
    }
    out.sort_by(|a, b| a.k.partial_cmp(&b.k).unwrap());
    Ok(out)
}

/// Index pairs of poles in a sorted slice closer than `rel_tol * k`.
pub fn coincident_pairs(poles: &[Pole], rel_tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 1..poles.len() {
        if poles[i].k - poles[i - 1].k < rel_tol * poles[i].k {
            out.push((i - 1, i));
        }
    }
    out
}

// Merged pole stream over all bonds, in increasing k.
struct PoleStream<'g> {
    graph: &'g StarGraph,
    heap: BinaryHeap<HeapItem>,
}

struct HeapItem {
    k: f64,
    bond0: usize,
    order: u64,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.bond0 == other.bond0
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Min-heap on k (reverse), ties broken by bond for determinism.
        other
            .k
            .partial_cmp(&self.k)
            .unwrap()
            .then_with(|| other.bond0.cmp(&self.bond0))
    }
}

impl<'g> PoleStream<'g> {
    /// Stream of all poles with `k > k_start`.
    fn starting_above(graph: &'g StarGraph, k_start: f64) -> Self {
        let mut heap = BinaryHeap::with_capacity(graph.bond_count());
        for bond0 in 0..graph.bond_count() {
            let l = graph.length(bond0);
            let mut order = fm::floor((k_start * l / PI + 0.5).max(0.0)) as u64;
            let mut p = Pole::at(graph, bond0, order);
            while p.k <= k_start {
                order += 1;
                p = Pole::at(graph, bond0, order);
            }
            heap.push(HeapItem { k: p.k, bond0, order });
        }
        PoleStream { graph, heap }
    }

    fn pop(&mut self) -> Pole {
        let item = self.heap.pop().expect("pole stream never empties");
        let pole = Pole::at(self.graph, item.bond0, item.order);
        self.heap.push(HeapItem {
            k: Pole::at(self.graph, item.bond0, item.order + 1).k,
            bond0: item.bond0,
            order: item.order + 1,
        });
        pole
    }
}

/// First `count` positive roots of `Z`.
pub fn eigenvalues(
    graph: &StarGraph,
    count: usize,
    cfg: &SolverConfig,
) -> Result<Vec<EigenvalueRecord>, SpectrumError> {
    solve_range(graph, 1, count, cfg)
}

/// Roots `n_start ..= n_start+count-1` (1-based ordinals).
///
/// Disjoint ranges give bit-identical records to one serial sweep, so the
/// caller may distribute ranges across threads and concatenate.
pub fn solve_range(
    graph: &StarGraph,
    n_start: u64,
    count: usize,
    cfg: &SolverConfig,
) -> Result<Vec<EigenvalueRecord>, SpectrumError> {
    if count == 0 || n_start == 0 {
        return Err(SpectrumError::BadRequest);
    }
    let mut out = Vec::with_capacity(count);
    // Seed the stream just below pole #n_start, then pop until the running
    // index reaches it (robust to the bisection landing inside a near-tie).
    let (k_seed, mut seen) = if n_start == 1 {
        (0.0, 0)
    } else {
        let k = kth_pole_location(graph, n_start);
        let back = k * (1.0 - 1e-9) - 1e-12;
        (back, pole_count_below(graph, back))
    };
    let mut stream = PoleStream::starting_above(graph, k_seed);
    let mut left = stream.pop();
    seen += 1;
    while seen < n_start {
        left = stream.pop();
        seen += 1;
    }
    for n in n_start..(n_start + count as u64) {
        let right = stream.pop();
        if right.k * graph.max_length() > fm::MAX_PHASE {
            return Err(SpectrumError::PhaseRangeExceeded { k: right.k });
        }
        if right.k - left.k < cfg.coincidence_tol * right.k {
            return Err(SpectrumError::CoincidentPoles {
                k: right.k,
                bond_a: left.bond,
                bond_b: right.bond,
            });
        }
        out.push(solve_gap(graph, n, left, right, cfg)?);
        left = right;
    }
    Ok(out)
}

/// Locate pole #idx (1-based) by bisection on the counting function.
fn kth_pole_location(graph: &StarGraph, idx: u64) -> f64 {
    let mut hi = (idx as f64 + 1.0) * PI / graph.total_length() * 2.0 + PI / graph.min_length();
    while pole_count_below(graph, hi) < idx {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pole_count_below(graph, mid) >= idx {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Bracketed root in the open gap `(left.k, right.k)`; also used by the scar
/// module to trap roots between bunched poles.
pub(crate) fn solve_gap(
    graph: &StarGraph,
    n: u64,
    left: Pole,
    right: Pole,
    cfg: &SolverConfig,
) -> Result<EigenvalueRecord, SpectrumError> {
    let gap = right.k - left.k;
    let mut lo = left.k;
    let mut hi = right.k;
    let mut evals = 0usize;

    // Bisection to a small fraction of the gap.  Z(lo+) = -inf, Z(hi-) = +inf.
    while hi - lo > cfg.bisect_frac * gap && evals < cfg.max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (z, _) = secular_pair(graph, mid, 0.0);
        evals += 1;
        if z < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Safeguarded Newton: fall back to bisection when the step leaves the
    // bracket (Z has poles at both ends, so raw Newton can escape).
    let mut x = 0.5 * (lo + hi);
    loop {
        let (z, zp) = secular_pair(graph, x, 0.0);
        evals += 1;
        if z < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = -z / zp;
        let x_new = x + step;
        let converged = fm::fabs(step) <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x;
        if converged {
            break;
        }
        if evals >= cfg.max_iter {
            let rel = fm::fabs(z) / (x * zp);
            if rel > cfg.rel_tol {
                return Err(SpectrumError::NoConvergence { n, k: x, residual: rel });
            }
            break;
        }
        x = if x_new > lo && x_new < hi { x_new } else { 0.5 * (lo + hi) };
    }

    // Double-double polish: two Newton steps with the residual evaluated at
    // k = x + x_lo.
    let mut x_lo = 0.0;
    let mut z_res = 0.0;
    let mut rel_res = 0.0;
    for _ in 0..3 {
        let (z, zp) = secular_pair(graph, x, x_lo);
        z_res = fm::fabs(z);
        rel_res = z_res / (x * zp);
        if z_res == 0.0 {
            break;
        }
        let d = Dd { hi: x, lo: x_lo }.add_f64(-z / zp);
        x = d.hi;
        x_lo = d.lo;
    }
    if rel_res > cfg.rel_tol {
        return Err(SpectrumError::NoConvergence { n, k: x, residual: rel_res });
    }
    Ok(EigenvalueRecord {
        n,
        k: x,
        k_lo: x_lo,
        left_pole: left,
        right_pole: right,
        z_residual: z_res,
        rel_residual: rel_res,
    })
}

/// `|N(K) - K sum(L)/pi|`, the deviation from the leading Weyl count.
pub fn weyl_deviation(graph: &StarGraph, n_roots: u64, k: f64) -> f64 {
    fm::fabs(n_roots as f64 - k * graph.total_length() / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StarGraph;
    use alloc::vec;

    fn single() -> StarGraph {
        StarGraph::new(vec![1.0]).unwrap()
    }

    #[test]
    fn secular_trivial_values() {
        let g = single();
        let cfg = SolverConfig::default();
        let z = secular(&g, PI / 4.0, &cfg).unwrap();
        assert!((z - 1.0).abs() < 1e-15);
        let z = secular(&g, PI, &cfg).unwrap();
        assert!(z.abs() < 1e-15);
    }

    #[test]
    fn secular_guard_fires_at_pole() {
        let g = single();
        let cfg = SolverConfig::default();
        let err = secular(&g, PI / 2.0, &cfg);
        assert!(matches!(err, Err(SpectrumError::PoleProximity { .. })));
    }

    #[test]
    fn poles_of_unit_bond() {
        let g = single();
        let ps = poles_in(&g, 0.0, 5.0).unwrap();
        assert_eq!(ps.len(), 2);
        assert!((ps[0].k - PI / 2.0).abs() < 1e-15);
        assert!((ps[1].k - 3.0 * PI / 2.0).abs() < 1e-14);
        assert_eq!(ps[0].order, 0);
        assert_eq!(ps[1].order, 1);
    }

    #[test]
    fn poles_of_two_bonds_sorted() {
        let g = StarGraph::new(vec![1.0, 2.0]).unwrap();
        let ps = poles_in(&g, 0.0, 2.5).unwrap();
        let ks: Vec<f64> = ps.iter().map(|p| p.k).collect();
        assert_eq!(ps.len(), 3);
        assert!((ks[0] - PI / 4.0).abs() < 1e-15);
        assert!((ks[1] - PI / 2.0).abs() < 1e-15);
        assert!((ks[2] - 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(ps[0].bond, 2);
        assert_eq!(ps[1].bond, 1);
    }

    #[test]
    fn pole_count_matches_enumeration() {
        let g = StarGraph::new(vec![1.0, core::f64::consts::SQRT_2]).unwrap();
        let count = pole_count_below(&g, 100.0);
        let listed = poles_in(&g, 0.0, 100.0).unwrap().len() as u64;
        assert_eq!(count, listed);
        // Closed form: sum_i floor(100 L_i / pi + 1/2).
        let expect = fm::floor(100.0 / PI + 0.5) as u64
            + fm::floor(100.0 * core::f64::consts::SQRT_2 / PI + 0.5) as u64;
        assert_eq!(count, expect);
    }

    #[test]
    fn single_bond_spectrum_is_n_pi() {
        let g = single();
        let recs = eigenvalues(&g, 3, &SolverConfig::default()).unwrap();
        for (i, r) in recs.iter().enumerate() {
            let exact = PI * (i as f64 + 1.0);
            assert!(
                (r.k - exact).abs() < 1e-10 * exact,
                "n={} k={} want {exact}",
                r.n,
                r.k
            );
        }
    }

    #[test]
    fn two_bond_closed_form_spectrum() {
        // tan a + tan b = sin(a+b)/(cos a cos b): roots at k (1+sqrt2) = n pi.
        let s2 = core::f64::consts::SQRT_2;
        let g = StarGraph::new(vec![1.0, s2]).unwrap();
        let recs = eigenvalues(&g, 5, &SolverConfig::default()).unwrap();
        for r in &recs {
            let exact = r.n as f64 * PI / (1.0 + s2);
            assert!(
                (r.k - exact).abs() < 1e-10 * exact,
                "n={} k={} want {exact}",
                r.n,
                r.k
            );
            assert!(r.rel_residual < 1e-11);
            assert!(r.left_pole.k < r.k && r.k < r.right_pole.k);
        }
    }

    #[test]
    fn dense_scan_agrees_on_three_bonds() {
        // Independent oracle: dense sign scan of Z at step pi/(1000 max L).
        let g = StarGraph::new(vec![1.0, 1.1, 1.23]).unwrap();
        let cfg = SolverConfig::default();
        let recs = eigenvalues(&g, 100, &cfg).unwrap();
        let step = PI / (1000.0 * g.max_length());
        let mut found = Vec::new();
        let mut prev_k = step * 0.5;
        let (mut prev_z, _) = secular_pair(&g, prev_k, 0.0);
        let mut prev_pole_count = pole_count_below(&g, prev_k);
        while found.len() < 100 {
            let k = prev_k + step;
            let pc = pole_count_below(&g, k);
            let (z, _) = secular_pair(&g, k, 0.0);
            // Sign change without an intervening pole = a genuine root.
            if pc == prev_pole_count && prev_z < 0.0 && z >= 0.0 {
                // refine by bisection for the oracle
                let (mut a, mut b) = (prev_k, k);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    let (zm, _) = secular_pair(&g, m, 0.0);
                    if zm < 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                found.push(0.5 * (a + b));
            }
            prev_k = k;
            prev_z = z;
            prev_pole_count = pc;
        }
        for (r, k_oracle) in recs.iter().zip(found.iter()) {
            assert!(
                (r.k - k_oracle).abs() < 1e-8,
                "n={} solver={} scan={}",
                r.n,
                r.k,
                k_oracle
            );
        }
    }

    #[test]
    fn solve_range_matches_full_sweep() {
        let g = StarGraph::new(vec![1.0, 1.1, 1.23]).unwrap();
        let cfg = SolverConfig::default();
        let full = eigenvalues(&g, 60, &cfg).unwrap();
        let part = solve_range(&g, 41, 20, &cfg).unwrap();
        for (a, b) in full[40..].iter().zip(part.iter()) {
            assert_eq!(a.n, b.n);
            assert_eq!(a.k.to_bits(), b.k.to_bits(), "n={}", a.n);
        }
    }

    #[test]
    fn coincident_poles_error_on_commensurate_lengths() {
        let g = StarGraph::new(vec![1.0, 3.0]).unwrap();
        // Alternate poles of bond 2 land exactly on the poles of bond 1.
        let err = eigenvalues(&g, 10, &SolverConfig::default());
        assert!(matches!(err, Err(SpectrumError::CoincidentPoles { .. })), "{err:?}");
    }

    #[test]
    fn weyl_count_within_b_plus_one() {
        let g = StarGraph::new(vec![1.0, core::f64::consts::SQRT_2, 0.77, 1.9]).unwrap();
        let recs = eigenvalues(&g, 500, &SolverConfig::default()).unwrap();
        for r in &recs {
            let dev = weyl_deviation(&g, r.n, r.k);
            assert!(dev <= g.bond_count() as f64 + 1.0, "n={} dev={dev}", r.n);
        }
    }

    #[test]
    fn z_increases_across_gap() {
        let g = StarGraph::new(vec![1.0, core::f64::consts::SQRT_2]).unwrap();
        let recs = eigenvalues(&g, 20, &SolverConfig::default()).unwrap();
        for r in &recs {
            let d = 0.1 * (r.right_pole.k - r.left_pole.k);
            let (z_lo, _) = secular_pair(&g, r.k - d, 0.0);
            let (z_hi, _) = secular_pair(&g, r.k + d, 0.0);
            assert!(z_lo < z_hi);
        }
    }
}
