//! Scarred subsequences: eigenfunctions localising on a pair of bonds.
//!
//! The construction traps a root of `Z` between two bunched poles.  Writing
//! `p_{n,i} = pi (n + 1/2) / L_i`, the signed distance from `p_{n,1}` (bond
//! `i1` relabelled as bond 1) to the nearest pole of bond `i` evolves as the
//! irrational torus translation
//!
//! ```text
//!     delta_{n+1,i} = delta_{n,i} + pi/L_1   (mod pi/L_i),
//! ```
//!
//! and likewise for the distance `eta_{n,i}` to the nearest *node* of bond
//! `i`.  Equidistribution produces infinitely many `n` with
//! `|delta_{n,i2}| <= eps/2` (partner pole bunched) while every other bond
//! has `|eta_{n,j}| <= eps/2` (its poles nearly maximally far).  Between the
//! two bunched poles sits exactly one root; there `sec^2(k L_{i1,2})` blows
//! up like `1/sin^2(eps L)` while all other `sec^2 -> 1`, so the probability
//! mass concentrates on the two target bonds.
//!
//! The forward scan is a deterministic walk of the translation; each hit is
//! re-verified from the closed form before an eigenvalue is trapped.
//! (Ostrowski-type simultaneous-approximation acceleration would find hits
//! faster, but the plain walk maps one-to-one onto the argument above.)

use crate::fmath::{self as fm, Dd};
use crate::graph::StarGraph;
use crate::spectrum::{pole_count_below, solve_gap, Pole, SolverConfig, SpectrumError};
use crate::wavefunction::subset_element_at;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum ScarError {
    /// Bond pair invalid (equal, or out of range).
    BadBonds { i1: usize, i2: usize },
    /// Epsilon outside `(0, pi/(2 max L))`.
    BadEpsilon { epsilon: f64 },
    /// Schedule not strictly decreasing positive.
    BadSchedule,
    /// No sign change inside the bunch (coincident poles or tolerance trouble).
    TrapFailed { n: u64 },
    /// Budget exhausted before completing the schedule; partial results kept.
    BudgetExhausted { certificates: Vec<ScarCertificate> },
    Spectrum(SpectrumError),
}

impl core::fmt::Display for ScarError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ScarError::BadBonds { i1, i2 } => write!(f, "invalid bond pair ({i1}, {i2})"),
            ScarError::BadEpsilon { epsilon } => write!(f, "invalid bunch width {epsilon}"),
            ScarError::BadSchedule => write!(f, "epsilon schedule must be strictly decreasing"),
            ScarError::TrapFailed { n } => write!(f, "no root trapped at torus index {n}"),
            ScarError::BudgetExhausted { certificates } => {
                write!(f, "search budget exhausted after {} certificates", certificates.len())
            }
            ScarError::Spectrum(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ScarError {}

impl From<SpectrumError> for ScarError {
    fn from(e: SpectrumError) -> Self {
        ScarError::Spectrum(e)
    }
}

/// Torus coordinates at index `n`: pole distances for the bunching partner(s)
/// and node distances for the separated bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusState {
    pub n: u64,
    /// `delta_{n,i}` for the bunching bonds (here the single partner `i2`).
    pub delta: Vec<f64>,
    /// `eta_{n,j}` for the separated bonds, in bond order.
    pub eta_dist: Vec<f64>,
}

/// Precomputed translation data for a bond pair on a graph.
#[derive(Debug, Clone)]
pub struct TorusLattice {
    i2: usize,
    /// Non-reference bonds in order: `i2` first, then the separated bonds.
    bonds: Vec<usize>,
    /// `L_i / L_1` per entry of `bonds`.
    ratios: Vec<f64>,
    /// `-1/2` for pole distances (partner), `0` for node distances.
    offsets: Vec<f64>,
    /// `pi / L_i` per entry: converts the unit-torus variable to distance.
    scales: Vec<f64>,
}

impl TorusLattice {
    pub fn new(graph: &StarGraph, i1: usize, i2: usize) -> Result<Self, ScarError> {
        let b = graph.bond_count();
        if i1 == i2 || i1 == 0 || i2 == 0 || i1 > b || i2 > b {
            return Err(ScarError::BadBonds { i1, i2 });
        }
        let l1 = graph.length(i1 - 1);
        let mut bonds = alloc::vec![i2];
        for j in 1..=b {
            if j != i1 && j != i2 {
                bonds.push(j);
            }
        }
        let ratios = bonds.iter().map(|&j| graph.length(j - 1) / l1).collect();
        let offsets = bonds.iter().map(|&j| if j == i2 { -0.5 } else { 0.0 }).collect();
        let scales = bonds.iter().map(|&j| PI / graph.length(j - 1)).collect();
        Ok(TorusLattice { i2, bonds, ratios, offsets, scales })
    }

    /// Unit-torus coordinate of entry `idx` at index `n`, in `[-1/2, 1/2)`:
    /// `frac((n + 1/2) L_i/L_1 + offset_i)`, formed in double-double so the
    /// closed form stays trustworthy at `n ~ 1e7`.
    fn unit_coord(&self, idx: usize, n: u64) -> f64 {
        let x = Dd::mul_f64(n as f64 + 0.5, self.ratios[idx]).add_f64(self.offsets[idx]);
        let m = fm::round(x.hi);
        let r = x.add_f64(-m);
        let mut v = r.value();
        // Round-off at the wrap boundary.
        if v < -0.5 {
            v += 1.0;
        } else if v >= 0.5 {
            v -= 1.0;
        }
        v
    }

    /// Closed-form state at torus index `n`.
    pub fn state_at(&self, n: u64) -> TorusState {
        let mut delta = Vec::new();
        let mut eta = Vec::new();
        for (idx, &bond) in self.bonds.iter().enumerate() {
            let d = self.unit_coord(idx, n) * self.scales[idx];
            if bond == self.i2 {
                delta.push(d);
            } else {
                eta.push(d);
            }
        }
        TorusState { n, delta, eta_dist: eta }
    }

    /// One step of the translation (wrap-around keeps representatives in
    /// `[-pi/(2 L_i), pi/(2 L_i))`).
    pub fn step(&self, state: &TorusState) -> TorusState {
        let mut out = state.clone();
        out.n += 1;
        let mut di = 0;
        let mut ei = 0;
        for (idx, &bond) in self.bonds.iter().enumerate() {
            let period = self.scales[idx]; // pi / L_i
            let step = self.scales[idx] * self.ratios[idx]; // pi / L_1
            let slot = if bond == self.i2 {
                let s = &mut out.delta[di];
                di += 1;
                s
            } else {
                let s = &mut out.eta_dist[ei];
                ei += 1;
                s
            };
            let mut v = *slot + step;
            v -= period * fm::round(v / period);
            if v < -0.5 * period {
                v += period;
            } else if v >= 0.5 * period {
                v -= period;
            }
            *slot = v;
        }
        out
    }
}

/// All torus indices `n` in `[n_start, n_start + budget)` at which the bond
/// pair bunches within `epsilon`: `|delta_{n,i2}| <= eps/2` and
/// `|eta_{n,j}| <= eps/2` for every other bond `j`.
///
/// An empty list just means the budget was too small for this `epsilon`.
pub fn find_bunching(
    graph: &StarGraph,
    i1: usize,
    i2: usize,
    epsilon: f64,
    n_start: u64,
    budget: u64,
) -> Result<Vec<u64>, ScarError> {
    let lat = TorusLattice::new(graph, i1, i2)?;
    if !(epsilon > 0.0 && epsilon < PI / (2.0 * graph.max_length())) {
        return Err(ScarError::BadEpsilon { epsilon });
    }
    let m = lat.bonds.len();
    // Work on the unit torus: thresholds eps L_i / (2 pi).
    let thr: Vec<f64> = (0..m).map(|i| 0.5 * epsilon / lat.scales[i]).collect();
    let steps: Vec<f64> = lat.ratios.iter().map(|r| r - fm::round(*r)).collect();
    let mut ys: Vec<f64> = (0..m).map(|i| lat.unit_coord(i, n_start)).collect();
    let mut hits = Vec::new();
    const RESYNC: u64 = 1 << 20;
    let mut n = n_start;
    let end = n_start.saturating_add(budget);
    while n < end {
        let mut ok = true;
        for i in 0..m {
            if fm::fabs(ys[i]) > thr[i] {
                ok = false;
                break;
            }
        }
        if ok {
            // Re-verify from the closed form before accepting.
            let mut verified = true;
            for i in 0..m {
                if fm::fabs(lat.unit_coord(i, n)) > thr[i] {
                    verified = false;
                    break;
                }
            }
            if verified {
                hits.push(n);
            }
        }
        n += 1;
        if n % RESYNC == 0 {
            for i in 0..m {
                ys[i] = lat.unit_coord(i, n);
            }
        } else {
            for i in 0..m {
                let mut v = ys[i] + steps[i];
                if v >= 0.5 {
                    v -= 1.0;
                } else if v < -0.5 {
                    v += 1.0;
                }
                ys[i] = v;
            }
        }
    }
    Ok(hits)
}

/// Certificate of one trapped, localised eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct ScarCertificate {
    /// Torus index of the bunching event (order of the `i1` pole).
    pub n: u64,
    /// Ordinal of the trapped root in the full spectrum.
    pub n_spectral: u64,
    pub k: f64,
    pub k_lo: f64,
    pub epsilon: f64,
    pub bonds: (usize, usize),
    pub sec2_i1: f64,
    pub sec2_i2: f64,
    pub sec2_max_other: f64,
    /// `sec^2(k L_{i1}) / sec^2(k L_{i2})`; tends to 1 along a scar sequence.
    pub sec2_ratio: f64,
    /// Probability mass on the two target bonds (exact matrix element of the
    /// two-bond indicator).
    pub mass: f64,
    /// `|Z(k)|` at the double-double root.
    pub z_residual: f64,
    pub rel_residual: f64,
}

/// Trap the root between the bunched poles at torus index `n_hit`.
pub fn trap_eigenvalue(
    graph: &StarGraph,
    n_hit: u64,
    i1: usize,
    i2: usize,
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<ScarCertificate, ScarError> {
    let b = graph.bond_count();
    if i1 == i2 || i1 == 0 || i2 == 0 || i1 > b || i2 > b {
        return Err(ScarError::BadBonds { i1, i2 });
    }
    let l1 = graph.length(i1 - 1);
    let l2 = graph.length(i2 - 1);
    let p1 = Pole { k: PI * (n_hit as f64 + 0.5) / l1, bond: i1, order: n_hit };
    let m2 = fm::round(p1.k * l2 / PI - 0.5).max(0.0) as u64;
    let p2 = Pole { k: PI * (m2 as f64 + 0.5) / l2, bond: i2, order: m2 };
    let (left, right) = if p1.k <= p2.k { (p1, p2) } else { (p2, p1) };
    if right.k - left.k < cfg.coincidence_tol * right.k {
        return Err(ScarError::Spectrum(SpectrumError::CoincidentPoles {
            k: right.k,
            bond_a: left.bond,
            bond_b: right.bond,
        }));
    }
    // No other bond may have a pole inside the bunch.
    for (j, &l) in graph.lengths().iter().enumerate() {
        if j + 1 == i1 || j + 1 == i2 {
            continue;
        }
        let nearest = fm::round(p1.k * l / PI - 0.5);
        let pk = PI * (nearest + 0.5) / l;
        if pk > left.k && pk < right.k {
            return Err(ScarError::TrapFailed { n: n_hit });
        }
    }
    let n_spectral = pole_count_below(graph, left.k) + 1;
    let rec = solve_gap(graph, n_spectral, left, right, cfg)
        .map_err(|_| ScarError::TrapFailed { n: n_hit })?;
    if fm::fabs(rec.k - p1.k) > epsilon {
        return Err(ScarError::TrapFailed { n: n_hit });
    }
    let mut sec2_i1 = 0.0;
    let mut sec2_i2 = 0.0;
    let mut sec2_max_other = 0.0_f64;
    for (j, &l) in graph.lengths().iter().enumerate() {
        let (t, _, _) = fm::tan_phase(rec.k, rec.k_lo, l);
        let s2 = 1.0 + t * t;
        if j + 1 == i1 {
            sec2_i1 = s2;
        } else if j + 1 == i2 {
            sec2_i2 = s2;
        } else {
            sec2_max_other = sec2_max_other.max(s2);
        }
    }
    let mass = subset_element_at(graph, rec.k, rec.k_lo, &[i1, i2]).exact;
    Ok(ScarCertificate {
        n: n_hit,
        n_spectral,
        k: rec.k,
        k_lo: rec.k_lo,
        epsilon,
        bonds: (i1, i2),
        sec2_i1,
        sec2_i2,
        sec2_max_other,
        sec2_ratio: sec2_i1 / sec2_i2,
        mass,
        z_residual: rec.z_residual,
        rel_residual: rec.rel_residual,
    })
}

/// One certificate per epsilon in a strictly decreasing schedule, each found
/// beyond the previous hit.
///
/// Within each level the scan keeps collecting hits until `8 x` the index of
/// the first one (capped by the budget) and certifies the tightest, so the
/// localisation mass improves monotonically along the schedule instead of
/// riding the luck of the first marginal hit.
pub fn scar_sequence(
    graph: &StarGraph,
    i1: usize,
    i2: usize,
    eps_schedule: &[f64],
    budget: u64,
    cfg: &SolverConfig,
) -> Result<Vec<ScarCertificate>, ScarError> {
    if eps_schedule.is_empty() || eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ScarError::BadSchedule);
    }
    if eps_schedule[eps_schedule.len() - 1] <= 0.0 {
        return Err(ScarError::BadSchedule);
    }
    let lat = TorusLattice::new(graph, i1, i2)?;
    let mut out: Vec<ScarCertificate> = Vec::new();
    let mut n_prev = 0u64;
    for &eps in eps_schedule {
        let remaining = budget.saturating_sub(n_prev);
        if remaining == 0 {
            return Err(ScarError::BudgetExhausted { certificates: out });
        }
        let hits = find_bunching(graph, i1, i2, eps, n_prev + 1, remaining)?;
        if hits.is_empty() {
            return Err(ScarError::BudgetExhausted { certificates: out });
        }
        let horizon = hits[0].saturating_mul(8).min(n_prev + remaining);
        let quality = |n: u64| -> f64 {
            let mut q = 0.0_f64;
            for idx in 0..lat.bonds.len() {
                let y = fm::fabs(lat.unit_coord(idx, n));
                let thr = 0.5 * eps / lat.scales[idx];
                q = q.max(y / thr);
            }
            q
        };
        let mut best = hits[0];
        let mut best_q = quality(best);
        for &n in hits.iter().skip(1) {
            if n > horizon {
                break;
            }
            let q = quality(n);
            if q < best_q {
                best = n;
                best_q = q;
            }
        }
        out.push(trap_eigenvalue(graph, best, i1, i2, eps, cfg)?);
        n_prev = best;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphConfig, StarGraph};
    use alloc::vec;

    fn test_graph() -> StarGraph {
        StarGraph::new(vec![
            fm::sqrt(17.0),
            fm::sqrt(19.0),
            fm::sqrt(23.0),
            fm::sqrt(29.0),
            fm::sqrt(31.0),
        ])
        .unwrap()
    }

    #[test]
    fn stepping_matches_closed_form() {
        let g = test_graph();
        let lat = TorusLattice::new(&g, 1, 2).unwrap();
        let mut s = lat.state_at(1000);
        for _ in 0..500 {
            s = lat.step(&s);
        }
        let direct = lat.state_at(1500);
        assert_eq!(s.n, direct.n);
        for (a, b) in s.delta.iter().zip(direct.delta.iter()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        for (a, b) in s.eta_dist.iter().zip(direct.eta_dist.iter()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn commensurate_pair_is_fixed_point() {
        // L_i = L_1: the translation is by 0 mod pi/L_i (warning suppressed;
        // equal lengths are legal, only coincident-pole solving is not).
        let cfg = GraphConfig { l_min: 0.1, ..Default::default() };
        let g = StarGraph::with_config(vec![1.0, 1.0, 1.37], &cfg).unwrap();
        let lat = TorusLattice::new(&g, 1, 2).unwrap();
        let s0 = lat.state_at(3);
        let s1 = lat.step(&s0);
        assert!((s0.delta[0] - s1.delta[0]).abs() < 1e-12);
    }

    #[test]
    fn state_bounds_respected() {
        let g = test_graph();
        let lat = TorusLattice::new(&g, 2, 4).unwrap();
        for n in [0u64, 17, 999, 123_456] {
            let s = lat.state_at(n);
            let half2 = PI / (2.0 * g.length(3)); // bond 4 partner
            assert!(s.delta[0].abs() <= half2 * (1.0 + 1e-12));
            for (e, &bond) in s.eta_dist.iter().zip(
                lat.bonds.iter().filter(|&&b| b != 4),
            ) {
                let half = PI / (2.0 * g.length(bond - 1));
                assert!(e.abs() <= half * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn equidistribution_of_partner_distance() {
        // Fraction of time |delta_{n,2}| < w converges to 2 w L_2 / pi.
        let g = test_graph();
        let lat = TorusLattice::new(&g, 1, 2).unwrap();
        let w = 0.05;
        let l2 = g.length(1);
        let mut count = 0u64;
        let total = 1_000_000u64;
        let mut s = lat.state_at(0);
        for _ in 0..total {
            if s.delta[0].abs() < w {
                count += 1;
            }
            s = lat.step(&s);
        }
        let frac = count as f64 / total as f64;
        let expect = 2.0 * w * l2 / PI;
        assert!(
            (frac - expect).abs() < 0.01 * expect,
            "frac={frac} expect={expect}"
        );
    }

    #[test]
    fn two_bond_graph_hit_frequency() {
        // v=2: only the delta condition remains; hit rate ~ eps L_2 / pi.
        let cfg = GraphConfig { l_min: 0.1, ..Default::default() };
        let g = StarGraph::with_config(vec![1.0, fm::sqrt(2.0)], &cfg).unwrap();
        let eps = 0.05;
        let hits = find_bunching(&g, 1, 2, eps, 0, 200_000).unwrap();
        let rate = hits.len() as f64 / 200_000.0;
        let expect = eps * g.length(1) / PI;
        assert!((rate - expect).abs() < 0.2 * expect, "rate={rate} expect={expect}");
    }

    #[test]
    fn hits_reverified_by_pole_distance() {
        let g = test_graph();
        let eps = 0.25;
        let hits = find_bunching(&g, 1, 2, eps, 0, 300_000).unwrap();
        assert!(!hits.is_empty());
        let l1 = g.length(0);
        for &n in hits.iter().take(10) {
            let p1 = PI * (n as f64 + 0.5) / l1;
            // Partner pole within eps/2.
            let l2 = g.length(1);
            let m = fm::round(p1 * l2 / PI - 0.5);
            let p2 = PI * (m + 0.5) / l2;
            assert!((p2 - p1).abs() <= eps / 2.0 + 1e-9, "n={n}");
            // Other bonds: nearest node within eps/2.
            for j in 3..=5 {
                let lj = g.length(j - 1);
                let node = PI * fm::round(p1 * lj / PI) / lj;
                assert!((node - p1).abs() <= eps / 2.0 + 1e-9, "n={n} bond={j}");
            }
        }
    }

    #[test]
    fn epsilon_halving_thins_hits_geometrically() {
        // Product-measure heuristic: rate ~ eps^(v-1); halving eps should cut
        // the count by ~2^4, checked within a factor 3 (soft check).
        let g = test_graph();
        let budget = 3_000_000;
        let h1 = find_bunching(&g, 1, 2, 0.2, 0, budget).unwrap().len() as f64;
        let h2 = find_bunching(&g, 1, 2, 0.1, 0, budget).unwrap().len() as f64;
        assert!(h1 > 40.0, "h1={h1}");
        let ratio = h1 / h2.max(1.0);
        assert!(ratio > 16.0 / 3.0 && ratio < 16.0 * 3.0, "ratio={ratio}");
    }

    #[test]
    fn bad_epsilon_rejected() {
        let g = test_graph();
        assert!(matches!(
            find_bunching(&g, 1, 2, -0.1, 0, 10),
            Err(ScarError::BadEpsilon { .. })
        ));
        assert!(matches!(
            find_bunching(&g, 1, 2, 2.0, 0, 10),
            Err(ScarError::BadEpsilon { .. })
        ));
        assert!(matches!(
            find_bunching(&g, 3, 3, 0.1, 0, 10),
            Err(ScarError::BadBonds { .. })
        ));
    }

    #[test]
    fn trapped_certificate_properties() {
        let g = test_graph();
        let cfg = SolverConfig::default();
        let eps = 0.2;
        let hits = find_bunching(&g, 1, 2, eps, 1, 2_000_000).unwrap();
        assert!(!hits.is_empty());
        let cert = trap_eigenvalue(&g, hits[0], 1, 2, eps, &cfg).unwrap();
        // k strictly between the bunched poles, within eps of p_{n,1}.
        let p1 = PI * (cert.n as f64 + 0.5) / g.length(0);
        assert!((cert.k - p1).abs() <= eps);
        // Both target sec^2 large, others near 1.
        let bound = 1.0 / {
            let s = fm::sin(eps * g.max_length());
            s * s
        };
        assert!(cert.sec2_i1 >= bound * 0.5, "sec2_i1={}", cert.sec2_i1);
        assert!(cert.sec2_i2 >= bound * 0.5, "sec2_i2={}", cert.sec2_i2);
        let other_bound = {
            let c = fm::cos(1.5 * eps * g.max_length());
            1.0 / (c * c)
        };
        assert!(
            cert.sec2_max_other <= other_bound,
            "max_other={} bound={other_bound}",
            cert.sec2_max_other
        );
        assert!(cert.mass > 0.0 && cert.mass <= 1.0);
    }

    #[test]
    fn tan_balance_at_trapped_root() {
        // tan(k L_1) ~ -tan(k L_2), mismatch bounded by the other tangents.
        let g = test_graph();
        let cfg = SolverConfig::default();
        let hits = find_bunching(&g, 1, 2, 0.1, 1, 4_000_000).unwrap();
        let cert = trap_eigenvalue(&g, hits[0], 1, 2, 0.1, &cfg).unwrap();
        let (t1, _, _) = fm::tan_phase(cert.k, cert.k_lo, g.length(0));
        let (t2, _, _) = fm::tan_phase(cert.k, cert.k_lo, g.length(1));
        let mut others = 0.0;
        for j in 3..=5 {
            let (t, _, _) = fm::tan_phase(cert.k, cert.k_lo, g.length(j - 1));
            others += fm::fabs(t);
        }
        assert!(fm::fabs(t1 + t2) <= others + 1e-9, "t1={t1} t2={t2} others={others}");
    }
}
