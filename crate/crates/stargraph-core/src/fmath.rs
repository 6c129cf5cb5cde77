//! Scalar float helpers: `libm` re-exports, double-double arithmetic, and
//! extended-precision reduction of phases modulo pi.
//!
//! The secular function is a sum of tangents evaluated at phases `k L_j` that
//! reach ~1e8 radians during scar hunts.  A plain `tan(k * L)` loses the
//! phase to rounding of the product long before `tan` itself is the problem,
//! so products are formed with `fma` and reduced against a 5-chunk split of
//! pi (25 bits per chunk, exact for multiples up to 2^28).

#![allow(clippy::excessive_precision)]

pub use libm::{atan2, cbrt, ceil, cos, cosh, exp, fabs, floor, fmod, hypot, log, log10, pow,
               round, sin, sinh, sqrt, tan, tanh};

pub const SQRT_PI: f64 = 1.7724538509055160272981674833411452;
pub const FRAC_1_SQRT_PI: f64 = 0.5641895835477562869480794515607726;

#[inline]
pub fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

/// Unevaluated double-double value `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: libm::fma(a, b, -p) }
}

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn mul_f64(a: f64, b: f64) -> Self {
        two_prod(a, b)
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let s = two_sum(self.hi, b);
        quick_two_sum(s.hi, s.lo + self.lo)
    }

    #[inline]
    pub fn add(self, other: Dd) -> Self {
        let s = two_sum(self.hi, other.hi);
        quick_two_sum(s.hi, s.lo + self.lo + other.lo)
    }

    #[inline]
    pub fn neg(self) -> Self {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

// pi split into 25-bit chunks: m * PI_CHUNK_i is exact for |m| <= 2^28.
const PI_CHUNKS: [f64; 5] = [
    3.1415926218032837,
    3.1786509424591713e-08,
    1.2246467864107189e-16,
    1.2736634110450565e-24,
    2.165713306476514e-32,
];
const INV_PI: f64 = core::f64::consts::FRAC_1_PI;

/// Largest admissible phase for exact reduction (`m <= 2^28`).
pub const MAX_PHASE: f64 = 8.4e8;

/// Reduce a double-double phase modulo pi: returns `(m, r)` with
/// `phase = m*pi + r` and `r` in roughly `[-pi/2, pi/2]`.
///
/// The returned remainder keeps ~30 significant digits, so tangents stay
/// accurate to a few ulps even within 1e-6 of a pole at phases ~1e8.
#[inline]
pub fn reduce_mod_pi(phase: Dd) -> (i64, Dd) {
    let m = round(phase.hi * INV_PI);
    let mut r = two_sum(phase.hi, -m * PI_CHUNKS[0]);
    for &c in &PI_CHUNKS[1..] {
        r = r.add_f64(-m * c);
    }
    let r = r.add_f64(phase.lo);
    (m as i64, r)
}

/// `tan` of a double-double angle already reduced to `[-pi/2, pi/2]`.
///
/// First-order correction in the tail: `tan(hi+lo) = tan(hi) + lo*sec^2(hi)`.
#[inline]
pub fn tan_dd(r: Dd) -> f64 {
    let t = tan(r.hi);
    t + r.lo * (1.0 + t * t)
}

/// `tan(k * length)` with the phase formed in double-double arithmetic.
///
/// `k = k_hi + k_lo` may itself carry a compensated tail (used when polishing
/// roots beyond f64 resolution).  Also returns the reduced phase and the
/// multiple of pi removed, so callers can derive `sec^2`, pole distances, or
/// the sign of `cos(k L) = (-1)^m cos(r)` without re-reducing.
#[inline]
pub fn tan_phase(k_hi: f64, k_lo: f64, length: f64) -> (f64, Dd, i64) {
    let phase = two_prod(k_hi, length).add(two_prod(k_lo, length));
    let (m, r) = reduce_mod_pi(phase);
    (tan_dd(r), r, m)
}

/// Kahan-Neumaier compensated accumulator for sums with heavy cancellation.
#[derive(Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn reduction_matches_naive_at_small_phase() {
        for i in 1..200 {
            let x = 0.37 * i as f64;
            let (_, r) = reduce_mod_pi(Dd::from_f64(x));
            let naive = x - round(x / PI) * PI;
            assert!(fabs(r.value() - naive) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn reduction_is_exact_at_huge_phase() {
        // phase = (10^7 + 1/2) * pi reduced against its own lattice must land
        // on +pi/2 to double-double accuracy.
        let m = 1.0e7;
        let phase = two_prod(m + 0.5, PI).add_f64((m + 0.5) * 1.2246467991473532e-16);
        let (q, r) = reduce_mod_pi(phase);
        // The half-integer multiple may round either way; the remainder must
        // land on -pi/2 or +pi/2 accordingly.
        assert!(q == 10_000_000 || q == 10_000_001, "q = {q}");
        assert!(fabs(fabs(r.value()) - PI / 2.0) < 3e-16, "r = {:e}", r.value());
    }

    #[test]
    fn tan_phase_near_pole_has_sane_magnitude() {
        // k*L within 1e-9 of a pole: tan must be ~1e9, not garbage.
        let l = 1.2345678901234;
        let target = (1_000_000.0 + 0.5) * PI + 1e-9;
        let k = target / l;
        let (t, _, _) = tan_phase(k, 0.0, l);
        assert!(fabs(t) > 5e8 && fabs(t) < 2e9, "t = {t:e}");
    }

    #[test]
    fn compensated_sum_cancels() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        s.add(1.0);
        s.add(-1e16);
        assert_eq!(s.value(), 1.0);
    }
}
