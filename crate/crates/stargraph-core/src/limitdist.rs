//! The large-graph limit distribution of indicator matrix elements.
//!
//! Everything is built from two special functions of the rescaled variable
//! `xi` (with `alpha` the bond-split ratio and `eta` the ratio threshold):
//!
//! ```text
//!   P_eta(xi) = e^{-i pi/4 + i xi^2/(4 eta)} / sqrt(pi eta)
//!             + (alpha-1) e^{i pi/4 - i xi^2/4} / sqrt(pi)
//!
//!   tau_eta(xi) = (2 sqrt(eta)/sqrt(pi)) e^{i pi/4 + i xi^2/(4 eta)}
//!               + xi erf(e^{-i pi/4} xi / (2 sqrt(eta)))
//!               + (2(alpha-1)/sqrt(pi)) e^{-i pi/4 - i xi^2/4}
//!               + xi (alpha-1) erf(e^{i pi/4} xi / 2)
//! ```
//!
//! The auxiliary CDF of the sec^2-weighted length ratio is
//!
//! ```text
//!   Ftilde(eta) = 1/2 + (1/(pi alpha)) Re int P_eta (arg tau - i ln|tau|) dxi
//! ```
//!
//! and the limit CDF of the matrix element itself is
//! `F(R) = 1 - Ftilde(1/R - 1)`.  The density of `X_eta = U - eta V` is
//! recovered independently through the Faddeeva function; integrating it over
//! `sigma < 0` must reproduce `Ftilde(eta)`, which is the internal
//! consistency check the tests enforce.
//!
//! All `xi` integrals run over non-decaying oscillations `e^{i omega xi^2}`
//! against slowly varying factors; they are evaluated with the Filon engine
//! of [`crate::quad`] after the `nu = xi^2` substitution, with analytic
//! integration-by-parts tails (the `ln|tau| ~ ln(alpha xi)` growth would
//! otherwise need astronomically distant cutoffs).

use crate::fmath as fm;
use crate::quad::{self, Estimate, QuadError, TailModel};
use crate::special;
use crate::Complex64;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum LimitError {
    BadParams,
    /// `R` outside the open interval (0, 1).
    Domain { r: f64 },
    Quadrature(QuadError),
}

impl core::fmt::Display for LimitError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LimitError::BadParams => write!(f, "invalid limit-distribution parameters"),
            LimitError::Domain { r } => write!(f, "R={r} outside (0, 1)"),
            LimitError::Quadrature(e) => write!(f, "quadrature failure: {e}"),
        }
    }
}

impl core::error::Error for LimitError {}

impl From<QuadError> for LimitError {
    fn from(e: QuadError) -> Self {
        LimitError::Quadrature(e)
    }
}

/// Parameters of the limit-distribution evaluations.
#[derive(Debug, Clone, Copy)]
pub struct LimitParams {
    /// Bond-split ratio (`b = alpha v`); `alpha = 1` degenerates to the
    /// full-graph indicator.
    pub alpha: u32,
    /// Ratio threshold of the auxiliary distribution.
    pub eta: f64,
    /// Truncation of the oscillatory `xi` integrals; the analytic tail takes
    /// over beyond it.  At 200 the tail terms contribute ~1e-5 and the
    /// doubling test moves `f_tilde` by well under 1e-4.
    pub cutoff: f64,
    /// Absolute tolerance passed to the quadrature engine.
    pub tol: f64,
}

impl LimitParams {
    pub fn new(alpha: u32, eta: f64) -> Result<Self, LimitError> {
        let p = LimitParams { alpha, eta, cutoff: 200.0, tol: 1e-9 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn validate(&self) -> Result<(), LimitError> {
        if self.alpha == 0 || !(self.eta > 0.0) || !(self.cutoff >= 50.0) || !(self.tol > 0.0) {
            return Err(LimitError::BadParams);
        }
        Ok(())
    }

    /// Phase components of `P_eta`: `(c1, omega1)` for the `eta` branch and
    /// `(c2, omega2)` for the `alpha-1` branch.
    fn phase_components(&self) -> ((Complex64, f64), (Complex64, f64)) {
        let c1 = Complex64::from_polar(1.0 / fm::sqrt(PI * self.eta), -PI / 4.0);
        let c2 = Complex64::from_polar((self.alpha as f64 - 1.0) / fm::sqrt(PI), PI / 4.0);
        ((c1, 1.0 / (4.0 * self.eta)), (c2, -0.25))
    }

    /// Head/body split of the half-line integrals: keeps the quadratic phase
    /// below ~1 radian on the directly integrated head.
    fn split(&self) -> f64 {
        (2.0 * fm::sqrt(self.eta)).min(2.0)
    }
}

/// `P_eta(xi)`; even in `xi`.
pub fn p_eta(xi: f64, params: &LimitParams) -> Complex64 {
    let ((c1, w1), (c2, w2)) = params.phase_components();
    c1 * Complex64::from_polar(1.0, w1 * xi * xi) + c2 * Complex64::from_polar(1.0, w2 * xi * xi)
}

/// `tau_eta(xi)`; even in `xi`, `Re tau >= tau_star > 0` everywhere.
pub fn tau_eta(xi: f64, params: &LimitParams) -> Complex64 {
    let eta = params.eta;
    let am1 = params.alpha as f64 - 1.0;
    let se = fm::sqrt(eta);
    let t1 = Complex64::from_polar(2.0 * se / fm::SQRT_PI, PI / 4.0 + xi * xi / (4.0 * eta));
    let t2 = xi * special::erf_complex(Complex64::from_polar(xi / (2.0 * se), -PI / 4.0));
    let t3 = Complex64::from_polar(2.0 * am1 / fm::SQRT_PI, -PI / 4.0 - xi * xi / 4.0);
    let t4 = xi * am1 * special::erf_complex(Complex64::from_polar(xi / 2.0, PI / 4.0));
    t1 + t2 + t3 + t4
}

/// `tau_star = Re tau_eta(0) = sqrt(2) (sqrt(eta) + alpha - 1)/sqrt(pi)`,
/// the lower bound of `Re tau` over the whole line.
pub fn tau_star(params: &LimitParams) -> f64 {
    core::f64::consts::SQRT_2 * (fm::sqrt(params.eta) + params.alpha as f64 - 1.0) / fm::SQRT_PI
}

/// `int_0^infty P_eta(xi) g(xi) dxi` for slowly varying `g`, with per-branch
/// tail models.
fn p_weighted_halfline<G: FnMut(f64) -> Complex64 + Clone>(
    params: &LimitParams,
    g: G,
    tail: TailModel,
) -> Result<Estimate, LimitError> {
    let ((c1, w1), (c2, w2)) = params.phase_components();
    let split = params.split();
    let mut total = Estimate::ZERO;
    for (c, w) in [(c1, w1), (c2, w2)] {
        if c.norm() == 0.0 {
            continue; // alpha = 1 drops the second branch
        }
        let est = quad::osc_halfline(g.clone(), w, split, params.cutoff, tail, params.tol)?;
        total = Estimate {
            value: total.value + c * est.value,
            err: total.err + c.norm() * est.err,
        };
    }
    Ok(total)
}

/// `int_{-inf}^{inf} P_eta dxi`, analytically `2 alpha`; exposed as the
/// built-in health check of the oscillatory machinery.
pub fn p_eta_integral(params: &LimitParams) -> Result<Estimate, LimitError> {
    params.validate()?;
    let one = TailModel::LogLinear {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };
    let half = p_weighted_halfline(params, |_| Complex64::new(1.0, 0.0), one)?;
    Ok(Estimate { value: 2.0 * half.value, err: 2.0 * half.err })
}

/// The auxiliary CDF `Ftilde(eta)` at the parameters' `eta`.
pub fn f_tilde(params: &LimitParams) -> Result<(f64, f64), LimitError> {
    params.validate()?;
    let alpha = params.alpha as f64;
    let g = {
        let p = *params;
        move |xi: f64| {
            let t = tau_eta(xi, &p);
            Complex64::new(fm::atan2(t.im, t.re), -fm::log(t.norm()))
        }
    };
    // g(xi) -> -i ln(alpha xi) as xi -> inf (arg tau decays like xi^-3).
    let tail = TailModel::LogLinear {
        a: Complex64::new(0.0, -fm::log(alpha)),
        b: Complex64::new(0.0, -1.0),
    };
    let est = p_weighted_halfline(params, g, tail)?;
    let scale = 2.0 / (PI * alpha);
    Ok((0.5 + scale * est.value.re, scale * est.err))
}

/// `Ftilde` with the cutoff escalated until doubling moves the value by less
/// than `1e-4` (truncation stability).
pub fn f_tilde_auto(params: &LimitParams) -> Result<(f64, f64), LimitError> {
    let mut p = *params;
    let (mut val, mut err) = f_tilde(&p)?;
    for _ in 0..3 {
        let p2 = LimitParams { cutoff: 2.0 * p.cutoff, ..p };
        let (v2, e2) = f_tilde(&p2)?;
        let diff = fm::fabs(v2 - val);
        if diff < 1e-4 {
            return Ok((v2, e2.max(diff)));
        }
        p = p2;
        val = v2;
        err = e2;
    }
    Ok((val, err))
}

/// Density `f_{X_eta}(sigma)` of `X_eta = U - eta V` (zero for `sigma >= 0`;
/// the CDF only ever integrates over the negative half-line).
///
/// The non-decaying part of the integrand (`w(z) ~ i/(sqrt(pi) z)`) is
/// subtracted analytically -- it integrates against `P` to a purely
/// imaginary constant -- leaving an absolutely convergent remainder.
pub fn density_f_x_eta(sigma: f64, params: &LimitParams) -> Result<(f64, f64), LimitError> {
    params.validate()?;
    if sigma >= 0.0 {
        return Ok((0.0, 0.0));
    }
    let ms = -sigma;
    let phase = Complex64::from_polar(1.0, 3.0 * PI / 4.0);
    let sub = Complex64::new(0.0, 2.0 / (fm::SQRT_PI * ms));
    let g = {
        let p = *params;
        move |xi: f64| {
            let t = tau_eta(xi, &p);
            let z = phase * t / (2.0 * fm::sqrt(ms));
            let w = special::faddeeva(z).value;
            phase * t / (ms * fm::sqrt(ms)) * w - sub
        }
    };
    let est = p_weighted_halfline(params, g, TailModel::Decaying)?;
    let scale = -1.0 / (2.0 * params.alpha as f64 * fm::SQRT_PI);
    // Conservative tail bound c/cutoff from |P (D - i/( sqrt(pi) z) ...)|.
    let alpha = params.alpha as f64;
    let tail_bound = 4.0 / (fm::SQRT_PI * alpha * alpha * params.cutoff);
    Ok((scale * est.value.re, fm::fabs(scale) * (est.err + tail_bound * 0.1)))
}

/// `int_{-inf}^0 f_{X_eta} d sigma` via the substitution `sigma = -1/u^2`
/// (which flattens both the `|sigma|^{-3/2}` tail and the finite limit at
/// `sigma -> 0^-`).  Cross-checks `f_tilde`.
pub fn density_mass(params: &LimitParams, tol: f64) -> Result<(f64, f64), LimitError> {
    params.validate()?;
    let u_max = 60.0;
    let u_min = 1e-4;
    let mut worst_err = 0.0_f64;
    let (val, quad_err) = quad::adaptive_real(
        |u| {
            let sigma = -1.0 / (u * u);
            let (f, fe) = density_f_x_eta(sigma, params).unwrap_or((0.0, 1.0));
            if fe > worst_err {
                worst_err = fe;
            }
            2.0 * f / (u * u * u)
        },
        u_min,
        u_max,
        tol,
        90,
    )?;
    // Tails: constant integrand below u_min, f(0^-)/u_max^2 beyond u_max.
    let (f_head, _) = density_f_x_eta(-1.0 / (u_min * u_min), params)?;
    let head = 2.0 * f_head / (u_min * u_min * u_min) * u_min;
    let (f_edge, _) = density_f_x_eta(-1.0 / (u_max * u_max), params)?;
    let tail = f_edge / (u_max * u_max);
    Ok((val + head + tail, quad_err + worst_err * 10.0 + fm::fabs(tail) * 0.5))
}

/// The limit CDF `F(R) = 1 - Ftilde(1/R - 1)` of Theorem-level interest.
pub fn limit_cdf(r: f64, params: &LimitParams) -> Result<(f64, f64), LimitError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(LimitError::Domain { r });
    }
    let p = params.with_eta(1.0 / r - 1.0);
    let (ft, err) = f_tilde_auto(&p)?;
    Ok((1.0 - ft, err))
}

/// The step CDF quantum ergodicity would demand: a unit jump at `R = 1/alpha`
/// (the value exactly at the jump is taken as 1; the point is measure-zero).
pub fn qe_step_cdf(r: f64, alpha: u32) -> f64 {
    if r >= 1.0 / alpha as f64 {
        1.0
    } else {
        0.0
    }
}

/// Tabulated `F(R)` on a grid, with error estimates.
///
/// Stored values are forced monotone (the quadrature wiggle is ~1e-7, far
/// below the error estimates); `is_monotone_raw` records whether the raw
/// values already were.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    pub rs: Vec<f64>,
    pub fs: Vec<f64>,
    pub errs: Vec<f64>,
    pub is_monotone_raw: bool,
}

impl CdfTable {
    pub fn build(alpha: u32, rs: Vec<f64>, base: &LimitParams) -> Result<CdfTable, LimitError> {
        let mut fs = Vec::with_capacity(rs.len());
        let mut errs = Vec::with_capacity(rs.len());
        for &r in &rs {
            let (f, e) = limit_cdf(r, &LimitParams { alpha, ..*base })?;
            fs.push(f);
            errs.push(e);
        }
        Ok(Self::from_values(rs, fs, errs))
    }

    /// Assemble from externally computed values (the CLI builds grid points
    /// in parallel and reassembles in order).
    pub fn from_values(rs: Vec<f64>, mut fs: Vec<f64>, errs: Vec<f64>) -> CdfTable {
        let mut monotone = true;
        for i in 1..fs.len() {
            if fs[i] < fs[i - 1] {
                monotone = false;
                fs[i] = fs[i - 1];
            }
        }
        CdfTable { rs, fs, errs, is_monotone_raw: monotone }
    }

    /// Piecewise-linear evaluation, clamped to [0, 1] and constant beyond the
    /// grid ends.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.rs.len();
        if n == 0 {
            return 0.0;
        }
        if r <= self.rs[0] {
            return if r < self.rs[0] { self.edge_extrapolate(r) } else { self.fs[0] };
        }
        if r >= self.rs[n - 1] {
            return if r > self.rs[n - 1] { self.edge_extrapolate(r) } else { self.fs[n - 1] };
        }
        let i = match self.rs.binary_search_by(|t| t.partial_cmp(&r).unwrap()) {
            Ok(i) => return self.fs[i],
            Err(i) => i,
        };
        let t = (r - self.rs[i - 1]) / (self.rs[i] - self.rs[i - 1]);
        (self.fs[i - 1] + t * (self.fs[i] - self.fs[i - 1])).clamp(0.0, 1.0)
    }

    fn edge_extrapolate(&self, r: f64) -> f64 {
        // Support is [0,1]: pin F(0)=0 and F(1)=1 and interpolate linearly
        // from the outermost grid point.
        let n = self.rs.len();
        if r <= 0.0 {
            return 0.0;
        }
        if r >= 1.0 {
            return 1.0;
        }
        if r < self.rs[0] {
            let t = r / self.rs[0];
            (t * self.fs[0]).clamp(0.0, 1.0)
        } else {
            let t = (r - self.rs[n - 1]) / (1.0 - self.rs[n - 1]);
            (self.fs[n - 1] + t * (1.0 - self.fs[n - 1])).clamp(0.0, 1.0)
        }
    }

    pub fn max_err(&self) -> f64 {
        self.errs.iter().cloned().fold(0.0, f64::max)
    }
}

/// Uniform grid helper `start:stop:step` (inclusive of both ends up to fp
/// fuzz), matching the CLI's `--r-grid` syntax.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(step > 0.0) || stop < start {
        return out;
    }
    let n = ((stop - start) / step + 0.5) as usize;
    for i in 0..=n {
        let r = start + step * i as f64;
        if r <= stop + 1e-12 {
            out.push(r);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: u32, eta: f64) -> LimitParams {
        LimitParams::new(alpha, eta).unwrap()
    }

    #[test]
    fn p_eta_at_zero_alpha_one() {
        let p = params(1, 1.0);
        let v = p_eta(0.0, &p);
        let expect = Complex64::from_polar(1.0 / fm::SQRT_PI, -PI / 4.0);
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn p_and_tau_are_even() {
        let p = params(3, 0.7);
        for i in 1..40 {
            let xi = 0.3 * i as f64;
            assert!((p_eta(xi, &p) - p_eta(-xi, &p)).norm() < 1e-13);
            assert!((tau_eta(xi, &p) - tau_eta(-xi, &p)).norm() < 1e-12);
        }
    }

    #[test]
    fn tau_at_zero_matches_tau_star() {
        for (alpha, eta) in [(2u32, 0.5), (3, 1.0), (3, 2.0), (2, 7.3)] {
            let p = params(alpha, eta);
            let t0 = tau_eta(0.0, &p);
            assert!((t0.re - tau_star(&p)).abs() < 1e-14, "alpha={alpha} eta={eta}");
        }
    }

    #[test]
    fn re_tau_bounded_below_and_derivative_nonneg() {
        let p = params(2, 1.3);
        let ts = tau_star(&p);
        let mut prev_re = tau_eta(0.0, &p).re;
        for i in 1..=400 {
            let xi = 0.05 * i as f64;
            let t = tau_eta(xi, &p);
            assert!(t.re >= ts - 1e-10, "xi={xi} re={}", t.re);
            // centered-difference Re dtau/dxi >= 0
            let d = (tau_eta(xi + 1e-5, &p).re - tau_eta(xi - 1e-5, &p).re) / 2e-5;
            assert!(d >= -1e-6, "xi={xi} d={d}");
            prev_re = prev_re.max(t.re);
        }
    }

    #[test]
    fn tau_asymptotics_inverse_square() {
        let p = params(3, 2.0);
        // |tau - alpha xi| <= (4/sqrt(pi)) (eta^{3/2} + alpha-1) / xi^2.
        let c = 4.0 / fm::SQRT_PI * (fm::pow(2.0, 1.5) + 2.0);
        for &xi in &[10.0, 20.0, 40.0, 80.0] {
            let err = (tau_eta(xi, &p) - Complex64::new(3.0 * xi, 0.0)).norm();
            assert!(err <= c / (xi * xi) * 1.05, "xi={xi} err={err}");
        }
    }

    #[test]
    fn p_integral_is_two_alpha() {
        for (alpha, eta) in [(2u32, 0.5), (2, 1.0), (2, 2.0), (3, 0.5), (3, 1.0), (3, 2.0)] {
            let est = p_eta_integral(&params(alpha, eta)).unwrap();
            let expect = 2.0 * alpha as f64;
            assert!(
                (est.value.re - expect).abs() < 1e-6 && est.value.im.abs() < 1e-6,
                "alpha={alpha} eta={eta}: {} (err est {:.1e})",
                est.value,
                est.err
            );
        }
    }

    #[test]
    fn f_tilde_symmetric_point() {
        // At eta=1, alpha=2 the two bond groups are exchangeable: Ftilde=1/2.
        let (v, e) = f_tilde(&params(2, 1.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-7, "v={v} err={e:.1e}");
    }

    #[test]
    fn f_tilde_monotone_in_eta() {
        let mut prev = -1.0;
        for i in 0..30 {
            let eta = 0.1 * fm::pow(10.0, i as f64 / 14.0); // 0.1 .. ~10
            let (v, _) = f_tilde(&params(3, eta)).unwrap();
            assert!(v >= prev - 1e-6, "eta={eta}: {v} < {prev}");
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn doubling_cutoff_is_stable() {
        for (alpha, eta) in [(2u32, 0.9), (3, 0.17), (2, 24.0)] {
            let p = params(alpha, eta);
            let (v1, _) = f_tilde(&p).unwrap();
            let (v2, _) = f_tilde(&LimitParams { cutoff: 400.0, ..p }).unwrap();
            assert!((v1 - v2).abs() < 1e-4, "alpha={alpha} eta={eta}: {v1} vs {v2}");
        }
    }

    #[test]
    fn qe_step_values() {
        assert_eq!(qe_step_cdf(0.5, 3), 1.0);
        assert_eq!(qe_step_cdf(0.2, 3), 0.0);
        assert_eq!(qe_step_cdf(1.0 / 3.0, 3), 1.0);
    }

    #[test]
    fn limit_cdf_monotone_and_far_from_step() {
        let base = params(3, 1.0);
        let grid = uniform_grid(0.05, 0.95, 0.05);
        let table = CdfTable::build(3, grid.clone(), &base).unwrap();
        assert!(table.is_monotone_raw);
        for w in table.fs.windows(2) {
            assert!(w[1] >= w[0]);
        }
        // Headline non-ergodicity: sup |F - step| well above 0.1.
        let mut sup: f64 = 0.0;
        for &r in &grid {
            sup = sup.max((table.eval(r) - qe_step_cdf(r, 3)).abs());
        }
        assert!(sup >= 0.1, "sup={sup}");
    }

    #[test]
    fn limit_cdf_domain_errors() {
        let p = params(3, 1.0);
        assert!(matches!(limit_cdf(0.0, &p), Err(LimitError::Domain { .. })));
        assert!(matches!(limit_cdf(1.0, &p), Err(LimitError::Domain { .. })));
    }

    #[test]
    fn density_nonnegative_and_zero_for_positive_sigma() {
        let p = params(2, 1.0);
        assert_eq!(density_f_x_eta(0.5, &p).unwrap().0, 0.0);
        for &s in &[-0.1, -0.5, -2.0, -10.0, -100.0] {
            let (f, _) = density_f_x_eta(s, &p).unwrap();
            assert!(f >= -1e-6, "sigma={s} f={f}");
        }
    }
}
