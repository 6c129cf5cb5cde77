//! Normalised eigenfunctions and diagonal matrix elements.
//!
//! On bond `i` the eigenfunction is `psi_i(x) = A_i cos(k (x - L_i))` with
//! `A_i^2 = 2 sec^2(k L_i) / sum_j L_j sec^2(k L_j)`.  The amplitude sign is
//! fixed by continuity at the centre: `A_i = c sec(k L_i)` with one common
//! `c > 0`, which also makes `sum_i psi_i'(0) = c k Z(k) = 0` automatic at an
//! eigenvalue.
//!
//! For the bond indicator `B` of the first `v` bonds the diagonal matrix
//! element has the closed form
//!
//! ```text
//!   <psi|B|psi> = [ sum_{i<=v} (L_i sec^2(k L_i) + tan(k L_i)/k) ]
//!                 / sum_j L_j sec^2(k L_j),
//! ```
//!
//! whose first part (the "leading term") is the quantity whose spectral
//! distribution the limit law describes; the `tan/k` part is the exact
//! finite-`k` correction, `O(1/(k L_min))` uniformly.

use crate::fmath as fm;
use crate::graph::{SmoothObservable, SplitObservable, StarGraph};
use crate::quad::{self, QuadError};
use crate::spectrum::EigenvalueRecord;
use crate::Complex64;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub enum WavefnError {
    /// Record residual too large to trust the amplitude formula.
    StaleRecord { rel_residual: f64 },
    /// `sum L_j sec^2` not finite even after rescaling.
    UnnormalizableState,
    BondOutOfRange { bond: usize, bonds: usize },
    PositionOutOfRange { x: f64, length: f64 },
    ObservableMismatch,
    Quadrature(QuadError),
}

impl core::fmt::Display for WavefnError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            WavefnError::StaleRecord { rel_residual } => {
                write!(f, "eigenvalue record residual {rel_residual:e} too large")
            }
            WavefnError::UnnormalizableState => write!(f, "sec^2-weighted sums overflow"),
            WavefnError::BondOutOfRange { bond, bonds } => {
                write!(f, "bond {bond} out of range 1..={bonds}")
            }
            WavefnError::PositionOutOfRange { x, length } => {
                write!(f, "position {x} outside [0, {length}]")
            }
            WavefnError::ObservableMismatch => write!(f, "observable incompatible with graph"),
            WavefnError::Quadrature(e) => write!(f, "quadrature failure: {e}"),
        }
    }
}

impl core::error::Error for WavefnError {}

impl From<QuadError> for WavefnError {
    fn from(e: QuadError) -> Self {
        WavefnError::Quadrature(e)
    }
}

/// A normalised eigenfunction bound to its graph.
#[derive(Debug, Clone)]
pub struct Eigenfunction<'g> {
    pub k: f64,
    pub k_lo: f64,
    /// Signed amplitudes `A_i = c sec(k L_i)`.
    pub amplitudes: Vec<f64>,
    graph: &'g StarGraph,
}

const RECORD_TOL: f64 = 1e-8;

/// Build the eigenfunction for a solved record.
pub fn build_eigenfunction<'g>(
    rec: &EigenvalueRecord,
    graph: &'g StarGraph,
) -> Result<Eigenfunction<'g>, WavefnError> {
    if !(rec.rel_residual < RECORD_TOL) {
        return Err(WavefnError::StaleRecord { rel_residual: rec.rel_residual });
    }
    // Factor the largest sec^2 out of the normalisation sum so bunched-pole
    // states (sec^2 ~ 1e20 and beyond) cannot overflow it.
    let b = graph.bond_count();
    let mut sec2 = Vec::with_capacity(b);
    let mut signs = Vec::with_capacity(b);
    let mut max_sec2 = 0.0_f64;
    for &l in graph.lengths() {
        let (t, r, m) = fm::tan_phase(rec.k, rec.k_lo, l);
        let s2 = 1.0 + t * t;
        if !s2.is_finite() {
            return Err(WavefnError::UnnormalizableState);
        }
        // cos(k L) = (-1)^m cos(r), cos(r) >= 0 on the reduced range.
        let parity = if m & 1 == 0 { 1.0 } else { -1.0 };
        signs.push(parity * if fm::cos(r.hi) >= 0.0 { 1.0 } else { -1.0 });
        sec2.push(s2);
        if s2 > max_sec2 {
            max_sec2 = s2;
        }
    }
    let mut denom_scaled = 0.0;
    for (s2, &l) in sec2.iter().zip(graph.lengths()) {
        denom_scaled += l * (s2 / max_sec2);
    }
    if !(denom_scaled.is_finite() && denom_scaled > 0.0) {
        return Err(WavefnError::UnnormalizableState);
    }
    // A_i = sign_i * sqrt(2 (sec2_i/max) / denom_scaled)
    let amplitudes = sec2
        .iter()
        .zip(signs.iter())
        .map(|(&s2, &sg)| sg * fm::sqrt(2.0 * (s2 / max_sec2) / denom_scaled))
        .collect();
    Ok(Eigenfunction { k: rec.k, k_lo: rec.k_lo, amplitudes, graph })
}

impl<'g> Eigenfunction<'g> {
    pub fn graph(&self) -> &'g StarGraph {
        self.graph
    }

    /// `psi_bond(x) = A_bond cos(k (x - L_bond))`, `bond` 1-based.
    pub fn eval_psi(&self, bond: usize, x: f64) -> Result<f64, WavefnError> {
        let b = self.graph.bond_count();
        if bond == 0 || bond > b {
            return Err(WavefnError::BondOutOfRange { bond, bonds: b });
        }
        let l = self.graph.length(bond - 1);
        if !(0.0..=l).contains(&x) {
            return Err(WavefnError::PositionOutOfRange { x, length: l });
        }
        let (_, r, m) = fm::tan_phase(self.k, self.k_lo, x - l);
        let parity = if m & 1 == 0 { 1.0 } else { -1.0 };
        Ok(self.amplitudes[bond - 1] * parity * fm::cos(r.value()))
    }

    /// Defect of the exact normalisation identity
    /// `sum_i A_i^2 (L_i/2 + sin(2 k L_i)/(4k)) = 1`.
    pub fn normalization_defect(&self) -> f64 {
        let mut acc = fm::CompensatedSum::default();
        for (i, &l) in self.graph.lengths().iter().enumerate() {
            let a2 = self.amplitudes[i] * self.amplitudes[i];
            let (t, r, _) = fm::tan_phase(self.k, self.k_lo, l);
            // sin(2kL) = 2 sin(r)cos(r) is parity-free; use the reduced phase.
            let s2 = fm::sin(2.0 * r.value());
            let _ = t;
            acc.add(a2 * (0.5 * l + s2 / (4.0 * self.k)));
        }
        fm::fabs(acc.value() - 1.0)
    }
}

/// Leading and exact indicator matrix elements straight from a record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorElement {
    /// Exact `<psi|B|psi>`, clamped to `[0,1]` (it equals 1 up to the solver
    /// residual when `B` covers the whole graph).
    pub exact: f64,
    /// The sec^2-weighted length ratio (the limit law's variable).
    pub leading: f64,
}

/// Matrix element of the first-`v` bond indicator at `k = k_hi + k_lo`.
pub fn indicator_element_at(
    graph: &StarGraph,
    k_hi: f64,
    k_lo: f64,
    v: usize,
) -> IndicatorElement {
    let mut num_lead = 0.0;
    let mut num_tan = fm::CompensatedSum::default();
    let mut denom = 0.0;
    for (i, &l) in graph.lengths().iter().enumerate() {
        let (t, _, _) = fm::tan_phase(k_hi, k_lo, l);
        let s2 = 1.0 + t * t;
        denom += l * s2;
        if i < v {
            num_lead += l * s2;
            num_tan.add(t);
        }
    }
    let k = k_hi + k_lo;
    let leading = num_lead / denom;
    let exact = (num_lead + num_tan.value() / k) / denom;
    IndicatorElement { exact: exact.clamp(0.0, 1.0), leading }
}

/// As [`indicator_element_at`] but for an arbitrary bond subset (1-based);
/// used for the two-bond localisation mass of scar certificates.
pub fn subset_element_at(
    graph: &StarGraph,
    k_hi: f64,
    k_lo: f64,
    bonds: &[usize],
) -> IndicatorElement {
    let mut num_lead = 0.0;
    let mut num_tan = fm::CompensatedSum::default();
    let mut denom = 0.0;
    for (i, &l) in graph.lengths().iter().enumerate() {
        let (t, _, _) = fm::tan_phase(k_hi, k_lo, l);
        let s2 = 1.0 + t * t;
        denom += l * s2;
        if bonds.contains(&(i + 1)) {
            num_lead += l * s2;
            num_tan.add(t);
        }
    }
    let k = k_hi + k_lo;
    let leading = num_lead / denom;
    let exact = (num_lead + num_tan.value() / k) / denom;
    IndicatorElement { exact: exact.clamp(0.0, 1.0), leading }
}

/// `<psi|B|psi>` for a split observable.
pub fn matrix_element_indicator(
    ef: &Eigenfunction,
    obs: &SplitObservable,
) -> Result<IndicatorElement, WavefnError> {
    obs.check_compatible(ef.graph).map_err(|_| WavefnError::ObservableMismatch)?;
    Ok(indicator_element_at(ef.graph, ef.k, ef.k_lo, obs.v))
}

/// `<psi|f|psi>` for smooth per-bond observables:
/// `sum_i (A_i^2/2) [ int f_i + Re e^{-2ikL_i} int e^{2ikx} f_i(x) dx ]`,
/// with the oscillatory part done by Filon panels (resolution independent of
/// `k`).
pub fn matrix_element_smooth(
    ef: &Eigenfunction,
    obs: &SmoothObservable,
    tol: f64,
) -> Result<f64, WavefnError> {
    if obs.per_bond.len() != ef.graph.bond_count() {
        return Err(WavefnError::ObservableMismatch);
    }
    let k = ef.k + ef.k_lo;
    let mut total = 0.0;
    let bond_tol = tol / ef.graph.bond_count() as f64;
    for (i, f) in obs.per_bond.iter().enumerate() {
        let l = ef.graph.length(i);
        let a2 = ef.amplitudes[i] * ef.amplitudes[i];
        if a2 == 0.0 {
            continue;
        }
        let base = f.integral(l);
        let osc = oscillatory_part(f, k, l, bond_tol)?;
        total += 0.5 * a2 * (base + osc);
    }
    Ok(total)
}

/// `int_0^L cos(2k(x-L)) f(x) dx`.
pub(crate) fn oscillatory_part(
    f: &crate::graph::SmoothFn,
    k: f64,
    l: f64,
    tol: f64,
) -> Result<f64, QuadError> {
    let est = quad::osc_linear(
        |x| Complex64::new(f.eval(x), 0.0),
        0.0,
        l,
        2.0 * k,
        tol,
        600,
    )?;
    // cos(2k(x-L)) = Re[e^{-2ikL} e^{2ikx}]
    let rot = Complex64::from_polar(1.0, -2.0 * k * l);
    Ok((rot * est.value).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{SmoothFn, StarGraph};
    use crate::spectrum::{eigenvalues, SolverConfig};
    use alloc::vec;
    use core::f64::consts::PI;

    fn solve(graph: &StarGraph, count: usize) -> Vec<EigenvalueRecord> {
        eigenvalues(graph, count, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn single_bond_amplitude_squared_is_two() {
        let g = StarGraph::new(vec![1.0]).unwrap();
        let recs = solve(&g, 1); // k = pi
        let ef = build_eigenfunction(&recs[0], &g).unwrap();
        let a2 = ef.amplitudes[0] * ef.amplitudes[0];
        assert!((a2 - 2.0).abs() < 1e-10, "a2={a2}");
        // int_0^1 2 cos^2(pi(x-1)) dx = 1
        assert!(ef.normalization_defect() < 1e-12);
    }

    #[test]
    fn amplitude_ratio_cancels_denominator() {
        let s2 = core::f64::consts::SQRT_2;
        let g = StarGraph::new(vec![1.0, s2]).unwrap();
        let recs = solve(&g, 1); // k = pi/(1+sqrt2)
        let ef = build_eigenfunction(&recs[0], &g).unwrap();
        let k = recs[0].k;
        let ratio = (ef.amplitudes[0] / ef.amplitudes[1]).powi(2);
        let expect = (1.0 + fm::tan(k) * fm::tan(k)) / (1.0 + fm::tan(k * s2) * fm::tan(k * s2));
        assert!((ratio - expect).abs() < 1e-9 * expect, "ratio={ratio} expect={expect}");
    }

    #[test]
    fn normalization_holds_along_spectrum() {
        let g = StarGraph::new(vec![1.0, 1.1, 1.23]).unwrap();
        for rec in solve(&g, 200) {
            let ef = build_eigenfunction(&rec, &g).unwrap();
            assert!(ef.normalization_defect() < 1e-9, "n={}", rec.n);
        }
    }

    #[test]
    fn vertex_value_common_and_end_derivative_zero() {
        let g = StarGraph::new(vec![1.0, 1.1, 1.23]).unwrap();
        let rec = &solve(&g, 8)[7];
        let ef = build_eigenfunction(rec, &g).unwrap();
        let f0 = ef.eval_psi(1, 0.0).unwrap();
        for bond in 2..=3 {
            let fi = ef.eval_psi(bond, 0.0).unwrap();
            assert!((fi - f0).abs() < 1e-10, "bond {bond}: {fi} vs {f0}");
        }
        // x = L: psi = A (cos 0 = 1); numerical derivative vanishes there.
        for bond in 1..=3 {
            let l = g.length(bond - 1);
            let a = ef.eval_psi(bond, l).unwrap();
            assert!((a - ef.amplitudes[bond - 1]).abs() < 1e-12);
            let h = 1e-6;
            let d = (a - ef.eval_psi(bond, l - h).unwrap()) / h;
            assert!(d.abs() < 1e-4 * ef.k, "bond {bond} d={d}");
        }
    }

    #[test]
    fn full_graph_indicator_is_one() {
        let g = StarGraph::new(vec![1.0, 1.3]).unwrap();
        let obs = crate::graph::SplitObservable::new(2, 1).unwrap();
        for rec in solve(&g, 50) {
            let ef = build_eigenfunction(&rec, &g).unwrap();
            let me = matrix_element_indicator(&ef, &obs).unwrap();
            assert!((me.exact - 1.0).abs() < 1e-10, "n={} me={}", rec.n, me.exact);
        }
    }

    #[test]
    fn indicator_matches_direct_quadrature() {
        let g = StarGraph::new(vec![1.0, core::f64::consts::SQRT_2]).unwrap();
        let rec = &solve(&g, 1)[0];
        let ef = build_eigenfunction(rec, &g).unwrap();
        let me = indicator_element_at(&g, rec.k, rec.k_lo, 1);
        // Oracle: adaptive quadrature of |psi_1|^2 over bond 1.
        let (psi2, _) = quad::adaptive_real(
            |x| {
                let p = ef.eval_psi(1, x).unwrap();
                p * p
            },
            0.0,
            1.0,
            1e-12,
            2000,
        )
        .unwrap();
        assert!((me.exact - psi2).abs() < 1e-10, "me={} quad={}", me.exact, psi2);
    }

    #[test]
    fn leading_error_bounded_by_inv_k_lmin() {
        let g = StarGraph::new(vec![1.0, fm::sqrt(1.37), fm::sqrt(0.83), fm::sqrt(1.11)]).unwrap();
        let l_min = g.min_length();
        for rec in solve(&g, 150) {
            let me = indicator_element_at(&g, rec.k, rec.k_lo, 2);
            let bound = 1.0 / (rec.k * l_min);
            assert!(
                (me.exact - me.leading).abs() <= bound * (1.0 + 1e-9),
                "n={} diff={} bound={bound}",
                rec.n,
                (me.exact - me.leading).abs()
            );
        }
    }

    #[test]
    fn smooth_constant_one_gives_norm() {
        let g = StarGraph::new(vec![1.0, 1.1, 1.23]).unwrap();
        let rec = &solve(&g, 30)[29];
        let ef = build_eigenfunction(rec, &g).unwrap();
        let obs = SmoothObservable::ones(&g);
        let me = matrix_element_smooth(&ef, &obs, 1e-10).unwrap();
        assert!((me - 1.0).abs() < 1e-9, "me={me}");
    }

    #[test]
    fn smooth_step_matches_indicator() {
        let g = StarGraph::new(vec![1.0, 1.1, 1.23, 0.97]).unwrap();
        let v = 2;
        for rec in [&solve(&g, 40)[9], &solve(&g, 40)[39]] {
            let ef = build_eigenfunction(rec, &g).unwrap();
            let fs: Vec<SmoothFn> = (0..4)
                .map(|i| SmoothFn::Constant(if i < v { 1.0 } else { 0.0 }))
                .collect();
            let obs = SmoothObservable::new(fs, &g).unwrap();
            let smooth = matrix_element_smooth(&ef, &obs, 1e-10).unwrap();
            let exact = indicator_element_at(&g, rec.k, rec.k_lo, v).exact;
            assert!((smooth - exact).abs() < 1e-9, "smooth={smooth} exact={exact}");
        }
    }

    #[test]
    fn smooth_linear_single_bond() {
        // f(x) = x on L=1 at k=pi: int 2 cos^2(pi(x-1)) x dx = 1/2.
        let g = StarGraph::new(vec![1.0]).unwrap();
        let rec = &solve(&g, 1)[0];
        let ef = build_eigenfunction(rec, &g).unwrap();
        let obs =
            SmoothObservable::new(vec![SmoothFn::Polynomial(vec![0.0, 1.0])], &g).unwrap();
        let me = matrix_element_smooth(&ef, &obs, 1e-10).unwrap();
        assert!((me - 0.5).abs() < 1e-9, "me={me}");
    }

    #[test]
    fn oscillatory_part_decays_like_inv_k() {
        // Riemann-Lebesgue with rate: |osc| * k stays bounded for smooth f.
        let g = StarGraph::new(vec![1.0, 1.29]).unwrap();
        let f = SmoothFn::CosPacket { amp: 1.0, freq: 2.0, phase: 0.3 };
        let mut max_scaled: f64 = 0.0;
        for rec in solve(&g, 300).iter().skip(20) {
            let osc = oscillatory_part(&f, rec.k, 1.0, 1e-11).unwrap();
            max_scaled = max_scaled.max((osc * rec.k).abs());
        }
        assert!(max_scaled < 10.0, "max k*osc = {max_scaled}");
    }

    #[test]
    fn eval_psi_domain_errors() {
        let g = StarGraph::new(vec![1.0]).unwrap();
        let rec = &solve(&g, 1)[0];
        let ef = build_eigenfunction(rec, &g).unwrap();
        assert!(matches!(ef.eval_psi(2, 0.0), Err(WavefnError::BondOutOfRange { .. })));
        assert!(matches!(
            ef.eval_psi(1, 1.5),
            Err(WavefnError::PositionOutOfRange { .. })
        ));
    }
}
