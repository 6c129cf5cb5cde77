//! Quadrature: adaptive Gauss panels for smooth integrands and Filon-type
//! panels for oscillatory ones.
//!
//! The Filon machinery expands the slowly-varying factor in Legendre
//! polynomials on each panel and integrates the polynomial-times-oscillation
//! exactly through the spherical Bessel moments
//!
//! ```text
//!     int_{-1}^{1} P_n(t) e^{i theta t} dt = 2 i^n j_n(theta),
//! ```
//!
//! so the cost per panel is independent of how many oscillations it spans.
//! Half-line integrals with quadratic phase `exp(i omega xi^2)` are mapped to
//! linear phase by `nu = xi^2` and closed with an integration-by-parts tail.

use crate::fmath as fm;
use crate::Complex64;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadError {
    /// Requested tolerance not reached within the panel budget.
    ToleranceNotMet,
    /// Invalid integration bounds or parameters.
    BadInterval,
}

impl core::fmt::Display for QuadError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QuadError::ToleranceNotMet => write!(f, "quadrature tolerance not met"),
            QuadError::BadInterval => write!(f, "invalid quadrature interval"),
        }
    }
}

impl core::error::Error for QuadError {}

/// Value plus a (heuristic, but deliberately pessimistic) error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: Complex64,
    pub err: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: Complex64::new(0.0, 0.0), err: 0.0 };

    fn add(self, other: Estimate) -> Estimate {
        Estimate { value: self.value + other.value, err: self.err + other.err }
    }
}

// ------------------------------------------------------------------ Gauss

include!("gl_nodes.rs");

fn gauss_pair<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut lo = Complex64::new(0.0, 0.0);
    let mut hi = Complex64::new(0.0, 0.0);
    for i in 0..GL12_X.len() {
        let d = h * GL12_X[i];
        lo += GL12_W[i] * (f(c - d) + f(c + d));
    }
    for i in 0..GL24_X.len() {
        let d = h * GL24_X[i];
        hi += GL24_W[i] * (f(c - d) + f(c + d));
    }
    Estimate { value: hi * h, err: ((hi - lo) * h).norm() }
}

/// Adaptive Gauss quadrature of a smooth complex integrand on `[a, b]`.
pub fn adaptive<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<Estimate, QuadError> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::BadInterval);
    }
    if a == b {
        return Ok(Estimate::ZERO);
    }
    // Worklist of (panel, estimate), refined worst-first.
    let mut panels: Vec<(f64, f64, Estimate)> = Vec::new();
    panels.push((a, b, gauss_pair(&mut f, a, b)));
    for _ in 0..max_panels {
        let total_err: f64 = panels.iter().map(|p| p.2.err).sum();
        if total_err <= tol {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.err.partial_cmp(&y.1 .2.err).unwrap())
            .unwrap();
        let (pa, pb, _) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Panel at floating-point resolution; keep its estimate.
            panels.push((pa, pb, gauss_pair(&mut f, pa, pb)));
            break;
        }
        panels.push((pa, mid, gauss_pair(&mut f, pa, mid)));
        panels.push((mid, pb, gauss_pair(&mut f, mid, pb)));
    }
    let mut out = Estimate::ZERO;
    for p in &panels {
        out = out.add(p.2);
    }
    if out.err > tol * 10.0 + 1e-14 {
        return Err(QuadError::ToleranceNotMet);
    }
    Ok(out)
}

/// Adaptive quadrature of a real integrand.
pub fn adaptive_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<(f64, f64), QuadError> {
    let est = adaptive(|x| Complex64::new(f(x), 0.0), a, b, tol, max_panels)?;
    Ok((est.value.re, est.err))
}

// -------------------------------------------------------- spherical bessel

/// Spherical Bessel functions `j_0..j_n` at `x >= 0`.
///
/// Upward recurrence where stable (`n < x`), Miller's downward recurrence
/// normalised by `j_0` otherwise.
pub(crate) fn spherical_jn(n: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.resize(n + 1, 0.0);
    if x < 1e-10 {
        // j_m(x) ~ x^m / (2m+1)!!
        out[0] = 1.0 - x * x / 6.0;
        let mut fact = 1.0;
        for m in 1..=n {
            fact *= x / (2 * m + 1) as f64;
            out[m] = fact;
        }
        return;
    }
    let (s, c) = fm::sin_cos(x);
    let j0 = s / x;
    out[0] = j0;
    if n == 0 {
        return;
    }
    let j1 = s / (x * x) - c / x;
    out[1] = j1;
    if (n as f64) < x {
        for m in 1..n {
            out[m + 1] = (2 * m + 1) as f64 / x * out[m] - out[m - 1];
        }
        return;
    }
    // Downward recurrence from a safely high order.
    let start = n + 16 + (x as usize);
    let mut jp = 0.0_f64;
    let mut jc = 1e-300_f64;
    for m in (0..start).rev() {
        let jm = (2 * m + 3) as f64 / x * jc - jp;
        jp = jc;
        jc = jm;
        if m <= n {
            out[m] = jc;
        }
        // Re-scale to dodge overflow of the unnormalised recurrence.
        if fm::fabs(jc) > 1e250 {
            let scale = 1e-250;
            jc *= scale;
            jp *= scale;
            for v in out[m.min(n)..].iter_mut() {
                *v *= scale;
            }
        }
    }
    let scale = j0 / out[0];
    for v in out.iter_mut() {
        *v *= scale;
    }
}

// --------------------------------------------------------- Filon-Legendre

const FILON_DEG: usize = 20; // Legendre expansion order per panel
const FILON_PTS: usize = 32; // GL sampling points for the projection

/// Legendre-coefficient projection of complex samples at the GL32 nodes.
fn legendre_coeffs(samples: &[Complex64; FILON_PTS], coeffs: &mut [Complex64]) {
    // P_n at the GL32 nodes, built on the fly (cost is negligible next to the
    // integrand evaluations).
    let mut pn = [[0.0_f64; FILON_PTS]; FILON_DEG + 1];
    let mut nodes = [0.0_f64; FILON_PTS];
    let mut weights = [0.0_f64; FILON_PTS];
    for i in 0..GL32_X.len() {
        nodes[2 * i] = -GL32_X[GL32_X.len() - 1 - i];
        nodes[2 * i + 1] = GL32_X[i];
        weights[2 * i] = GL32_W[GL32_X.len() - 1 - i];
        weights[2 * i + 1] = GL32_W[i];
    }
    for k in 0..FILON_PTS {
        pn[0][k] = 1.0;
        pn[1][k] = nodes[k];
        for m in 1..FILON_DEG {
            pn[m + 1][k] = ((2 * m + 1) as f64 * nodes[k] * pn[m][k] - m as f64 * pn[m - 1][k])
                / (m + 1) as f64;
        }
    }
    for m in 0..=FILON_DEG {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..FILON_PTS {
            acc += weights[k] * pn[m][k] * samples[k];
        }
        coeffs[m] = acc * ((2 * m + 1) as f64 / 2.0);
    }
}

/// GL32 node positions mapped to `[a, b]`, interleaved negative/positive.
pub(crate) fn filon_nodes(a: f64, b: f64, out: &mut [f64; FILON_PTS]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for i in 0..GL32_X.len() {
        out[2 * i] = c - h * GL32_X[GL32_X.len() - 1 - i];
        out[2 * i + 1] = c + h * GL32_X[i];
    }
}

/// `int_a^b g(x) e^{i omega x} dx` from pre-evaluated samples of `g` at the
/// `filon_nodes` of the panel.  Returns the estimate plus a coefficient-decay
/// error indicator.
pub(crate) fn filon_panel_from_samples(
    samples: &[Complex64; FILON_PTS],
    a: f64,
    b: f64,
    omega: f64,
    jn_buf: &mut Vec<f64>,
) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut coeffs = [Complex64::new(0.0, 0.0); FILON_DEG + 1];
    legendre_coeffs(samples, &mut coeffs);
    let theta = omega * h;
    spherical_jn(FILON_DEG, fm::fabs(theta), jn_buf);
    let mut acc = Complex64::new(0.0, 0.0);
    // Moment: int P_m(t) e^{i theta t} dt = 2 i^m j_m(theta), with
    // j_m(-x) = (-1)^m j_m(x) for negative theta.
    let mut ipow = Complex64::new(1.0, 0.0);
    for (m, &cm) in coeffs.iter().enumerate() {
        let jm = jn_buf[m] * if theta < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
        acc += cm * ipow * (2.0 * jm);
        ipow *= Complex64::new(0.0, 1.0);
    }
    // Phase at the panel centre.
    let rot = Complex64::from_polar(1.0, omega * c);
    let tail = coeffs[FILON_DEG].norm() + coeffs[FILON_DEG - 1].norm();
    Estimate { value: rot * acc * h, err: 2.0 * h * tail }
}

/// `int_a^b g(x) e^{i omega x} dx` for smooth slowly-varying `g`.
///
/// Panels split adaptively until the Legendre tail coefficients decay below
/// `tol` (scaled by panel width).
pub fn osc_linear<F: FnMut(f64) -> Complex64>(
    mut g: F,
    a: f64,
    b: f64,
    omega: f64,
    tol: f64,
    max_panels: usize,
) -> Result<Estimate, QuadError> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::BadInterval);
    }
    if a == b {
        return Ok(Estimate::ZERO);
    }
    let mut jn_buf = Vec::new();
    let eval = |f: &mut F, pa: f64, pb: f64, buf: &mut Vec<f64>| {
        let mut xs = [0.0_f64; FILON_PTS];
        filon_nodes(pa, pb, &mut xs);
        let mut samples = [Complex64::new(0.0, 0.0); FILON_PTS];
        for (s, &x) in samples.iter_mut().zip(xs.iter()) {
            *s = f(x);
        }
        filon_panel_from_samples(&samples, pa, pb, omega, buf)
    };
    let mut panels: Vec<(f64, f64, Estimate)> = Vec::new();
    panels.push((a, b, eval(&mut g, a, b, &mut jn_buf)));
    for _ in 0..max_panels {
        let total_err: f64 = panels.iter().map(|p| p.2.err).sum();
        if total_err <= tol {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.err.partial_cmp(&y.1 .2.err).unwrap())
            .unwrap();
        let (pa, pb, _) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            panels.push((pa, pb, eval(&mut g, pa, pb, &mut jn_buf)));
            break;
        }
        panels.push((pa, mid, eval(&mut g, pa, mid, &mut jn_buf)));
        panels.push((mid, pb, eval(&mut g, mid, pb, &mut jn_buf)));
    }
    let mut out = Estimate::ZERO;
    for p in &panels {
        out = out.add(p.2);
    }
    if out.err > tol * 100.0 + 1e-13 {
        return Err(QuadError::ToleranceNotMet);
    }
    Ok(out)
}

// ------------------------------------------------- half-line, phase omega*xi^2

/// Tail model for [`osc_halfline`]: behaviour of the slow factor `g` at and
/// beyond the cutoff.
#[derive(Clone, Copy, Debug)]
pub enum TailModel {
    /// `g(xi) ~ a + b ln(xi)` for `xi >= cutoff`; the tail integral is closed
    /// with a three-term integration-by-parts expansion.
    LogLinear { a: Complex64, b: Complex64 },
    /// `g` decays at the cutoff; a single numeric integration-by-parts
    /// boundary term (with finite-difference derivative) closes the tail.
    Decaying,
}

/// `int_0^infty g(xi) e^{i omega xi^2} dxi` for slowly-varying `g`.
///
/// Head `[0, split]` by adaptive Gauss in `xi`; body `[split^2, cutoff^2]` by
/// Filon panels in `nu = xi^2` (geometric, ratio 1.6); tail beyond the cutoff
/// by integration by parts against the tail model.
pub fn osc_halfline<F: FnMut(f64) -> Complex64>(
    mut g: F,
    omega: f64,
    split: f64,
    cutoff: f64,
    tail: TailModel,
    tol: f64,
) -> Result<Estimate, QuadError> {
    if !(omega != 0.0 && split > 0.0 && cutoff > split) {
        return Err(QuadError::BadInterval);
    }
    let head = adaptive(
        |xi| g(xi) * Complex64::from_polar(1.0, omega * xi * xi),
        0.0,
        split,
        tol * 0.1,
        200,
    )?;

    // Body in nu-space: h(nu) = g(sqrt(nu)) / (2 sqrt(nu)).
    let mut jn_buf = Vec::new();
    let mut body = Estimate::ZERO;
    let mut nu_lo = split * split;
    let nu_end = cutoff * cutoff;
    const RATIO: f64 = 1.6;
    while nu_lo < nu_end {
        let nu_hi = (nu_lo * RATIO).min(nu_end);
        let mut xs = [0.0_f64; FILON_PTS];
        filon_nodes(nu_lo, nu_hi, &mut xs);
        let mut samples = [Complex64::new(0.0, 0.0); FILON_PTS];
        for (s, &nu) in samples.iter_mut().zip(xs.iter()) {
            let xi = fm::sqrt(nu);
            *s = g(xi) / (2.0 * xi);
        }
        let est = filon_panel_from_samples(&samples, nu_lo, nu_hi, omega, &mut jn_buf);
        if est.err > tol * 0.02 && nu_hi - nu_lo > 1e-6 * nu_lo {
            // Halve the panel instead of accepting a poor fit.
            let mid = 0.5 * (nu_lo + nu_hi);
            let mut e_sum = Estimate::ZERO;
            for (qa, qb) in [(nu_lo, mid), (mid, nu_hi)] {
                filon_nodes(qa, qb, &mut xs);
                for (s, &nu) in samples.iter_mut().zip(xs.iter()) {
                    let xi = fm::sqrt(nu);
                    *s = g(xi) / (2.0 * xi);
                }
                e_sum = e_sum.add(filon_panel_from_samples(&samples, qa, qb, omega, &mut jn_buf));
            }
            body = body.add(e_sum);
        } else {
            body = body.add(est);
        }
        nu_lo = nu_hi;
    }

    let tail_est = match tail {
        TailModel::LogLinear { a, b } => {
            let mismatch = (g(cutoff) - (a + b * fm::log(cutoff))).norm();
            let t = ibp_tail_loglinear(a, b, omega, nu_end);
            Estimate {
                value: t.value,
                err: t.err + mismatch / (2.0 * cutoff * fm::fabs(omega)),
            }
        }
        TailModel::Decaying => {
            let h = |gv: Complex64, xi: f64| gv / (2.0 * xi);
            let ha = h(g(cutoff), cutoff);
            let dx = cutoff * 1e-4;
            let hb = h(g(cutoff + dx), cutoff + dx);
            let dh = (hb - ha) / (dx * (2.0 * cutoff + dx)); // d h / d nu
            let iw = Complex64::new(0.0, omega);
            let rot = Complex64::from_polar(1.0, omega * nu_end);
            let t1 = -rot * ha / iw;
            let t2 = rot * dh / (iw * iw);
            Estimate { value: t1 + t2, err: t2.norm() * 2.0 }
        }
    };
    Ok(head.add(body).add(tail_est))
}

/// Three-term IBP tail of `int_A^infty e^{i omega nu} h(nu) dnu` for
/// `h(nu) = (u + w ln nu) / (2 sqrt(nu))` with `u = a`, `w = b/2`.
fn ibp_tail_loglinear(a: Complex64, b: Complex64, omega: f64, nu_a: f64) -> Estimate {
    let u = a;
    let w = b * 0.5;
    let ln = fm::log(nu_a);
    let s = fm::sqrt(nu_a);
    let h0 = (u + w * ln) / (2.0 * s);
    let h1 = (2.0 * w - u - w * ln) / (4.0 * nu_a * s);
    let h2 = (3.0 * u - 8.0 * w + 3.0 * w * ln) / (8.0 * nu_a * nu_a * s);
    let h3 = (-15.0 * u + 46.0 * w - 15.0 * w * ln) / (16.0 * nu_a * nu_a * nu_a * s);
    let iw = Complex64::new(0.0, omega);
    let rot = Complex64::from_polar(1.0, omega * nu_a);
    let value = rot * (-h0 / iw + h1 / (iw * iw) - h2 / (iw * iw * iw));
    let err = h3.norm() * nu_a * 0.52 / (omega * omega * omega).abs();
    Estimate { value, err }
}
