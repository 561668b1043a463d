//! Certified fixed-point arithmetic for exponential sums.
//!
//! Values are BigInt mantissas at a fixed binary scale together with an
//! error counter in ulps, so every result carries a rigorous enclosure
//! [(m - e)/2^S, (m + e)/2^S]. The only transcendental entry points are
//! cos/sin of 2*pi*x for exact rational x; pi comes from a Machin series
//! with an exact rational truncation bound and the Taylor tails are bounded
//! by their first omitted term.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

use crate::rational::ExactRational;

/// Default mantissa size: comfortably past the 1e-40 certification target.
pub const DEFAULT_BITS: u32 = 192;

/// A value known to lie in [(m - e)/2^S, (m + e)/2^S].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fp {
    pub m: BigInt,
    pub e: BigInt,
}

/// Arithmetic context fixing the binary scale S.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpCtx {
    pub bits: u32,
}

impl FpCtx {
    pub fn new(bits: u32) -> FpCtx {
        assert!(bits >= 32, "need at least 32 bits of scale");
        FpCtx { bits }
    }

    fn one_scaled(&self) -> BigInt {
        BigInt::one() << self.bits
    }

    pub fn zero(&self) -> Fp {
        Fp {
            m: BigInt::zero(),
            e: BigInt::zero(),
        }
    }

    pub fn from_integer(&self, n: i64) -> Fp {
        Fp {
            m: BigInt::from(n) << self.bits,
            e: BigInt::zero(),
        }
    }

    /// Nearest-ulp rounding of an exact rational.
    pub fn from_rational(&self, r: &ExactRational) -> Fp {
        let scaled = r * ExactRational::from_integer(self.one_scaled());
        let m = scaled.round().to_integer();
        Fp {
            m,
            e: BigInt::one(),
        }
    }

    pub fn add(&self, a: &Fp, b: &Fp) -> Fp {
        Fp {
            m: &a.m + &b.m,
            e: &a.e + &b.e,
        }
    }

    pub fn sub(&self, a: &Fp, b: &Fp) -> Fp {
        Fp {
            m: &a.m - &b.m,
            e: &a.e + &b.e,
        }
    }

    pub fn neg(&self, a: &Fp) -> Fp {
        Fp {
            m: -&a.m,
            e: a.e.clone(),
        }
    }

    pub fn mul(&self, a: &Fp, b: &Fp) -> Fp {
        let prod = &a.m * &b.m;
        let m = shift_round(&prod, self.bits);
        // |ab - m| <= |a||e_b| + |b||e_a| + e_a e_b (all at scale 2S) plus
        // one ulp of rounding.
        let err = a.m.magnitude() * b.e.magnitude()
            + b.m.magnitude() * a.e.magnitude()
            + a.e.magnitude() * b.e.magnitude();
        let e = BigInt::from(err >> self.bits) + 2;
        Fp { m, e }
    }

    /// Division by a small positive integer.
    pub fn div_u64(&self, a: &Fp, d: u64) -> Fp {
        let d_big = BigInt::from(d);
        let m = div_round(&a.m, &d_big);
        let e = div_ceil_pos(&a.e, &d_big) + 1;
        Fp { m, e }
    }

    /// Square root of a non-negative value.
    pub fn sqrt(&self, a: &Fp) -> Fp {
        let lo_m = (&a.m - &a.e).max(BigInt::zero());
        let hi_m = &a.m + &a.e;
        let lo = (lo_m << self.bits).sqrt();
        let hi = (hi_m << self.bits).sqrt() + 1;
        let m = (&lo + &hi) / 2;
        let e = (&hi - &lo) / 2 + 1;
        Fp { m, e }
    }

    /// |re + i im| with a two-sided enclosure. The square-root route loses
    /// half the scale near zero, so the hi end also uses the 1-norm bound
    /// |re| + |im|, whichever is tighter.
    pub fn magnitude(&self, re: &Fp, im: &Fp) -> Fp {
        let mag2 = self.add(&self.mul(re, re), &self.mul(im, im));
        let by_sqrt = self.sqrt(&mag2);
        let one_norm_hi = re.m.abs() + &re.e + im.m.abs() + &im.e;
        let sqrt_lo = (&by_sqrt.m - &by_sqrt.e).max(BigInt::zero());
        let sqrt_hi = &by_sqrt.m + &by_sqrt.e;
        let hi = sqrt_hi.min(one_norm_hi);
        let lo = sqrt_lo.min(hi.clone());
        Fp {
            m: (&lo + &hi) / 2,
            e: (&hi - &lo) / 2 + 1,
        }
    }

    /// Exact rational enclosure [lo, hi].
    pub fn to_interval(&self, a: &Fp) -> (ExactRational, ExactRational) {
        let den = self.one_scaled();
        (
            ExactRational::new(&a.m - &a.e, den.clone()),
            ExactRational::new(&a.m + &a.e, den),
        )
    }

    pub fn to_f64(&self, a: &Fp) -> f64 {
        let r = ExactRational::new(a.m.clone(), self.one_scaled());
        r.to_f64().unwrap_or(f64::NAN)
    }

    /// Upper bound on the absolute error as a rational.
    pub fn error_bound(&self, a: &Fp) -> ExactRational {
        ExactRational::new(a.e.clone(), self.one_scaled())
    }

    /// pi at this scale, cached. Machin: pi = 16 atan(1/5) - 4 atan(1/239),
    /// partial sums in exact rationals with the alternating-series bound.
    pub fn pi(&self) -> Fp {
        static CACHE: Lazy<Mutex<HashMap<u32, (BigInt, BigInt)>>> =
            Lazy::new(|| Mutex::new(HashMap::new()));
        if let Some((m, e)) = CACHE.lock().unwrap().get(&self.bits) {
            return Fp {
                m: m.clone(),
                e: e.clone(),
            };
        }
        let (sum5, tail5) = atan_inv(5, self.bits + 8);
        let (sum239, tail239) = atan_inv(239, self.bits + 8);
        let pi_exact = ExactRational::from_integer(BigInt::from(16)) * sum5
            - ExactRational::from_integer(BigInt::from(4)) * sum239;
        let tail = ExactRational::from_integer(BigInt::from(16)) * tail5
            + ExactRational::from_integer(BigInt::from(4)) * tail239;
        let mut v = self.from_rational(&pi_exact);
        // fold the series truncation into the ulp error
        let tail_ulps = (tail * ExactRational::from_integer(self.one_scaled()))
            .ceil()
            .to_integer();
        v.e += tail_ulps;
        CACHE
            .lock()
            .unwrap()
            .insert(self.bits, (v.m.clone(), v.e.clone()));
        v
    }

    /// (cos(2 pi x), sin(2 pi x)) for exact rational x, via exact octant
    /// reduction and Taylor series on [0, pi/4].
    pub fn cis_two_pi(&self, x: &ExactRational) -> (Fp, Fp) {
        // reduce x mod 1 into [0, 1)
        let num = x.numer().mod_floor(x.denom());
        let frac = ExactRational::new(num, x.denom().clone());
        // octant o = floor(8 frac), remainder t in [0, 1/8)
        let eight = ExactRational::from_integer(BigInt::from(8));
        let scaled = &frac * &eight;
        let o = scaled.floor().to_integer().to_u8().unwrap_or(0);
        let t = frac - ExactRational::new(BigInt::from(o), BigInt::from(8));

        let two_pi = {
            let pi = self.pi();
            Fp {
                m: &pi.m << 1,
                e: &pi.e << 1,
            }
        };
        let theta = self.mul(&two_pi, &self.from_rational(&t));
        let (c, s) = self.cos_sin_small(&theta);

        // multiply by cis(o * pi/4)
        let half = self.inv_sqrt2();
        let (rc, rs) = match o {
            0 => return (c, s),
            1 => (half.clone(), half),             // cos, sin of pi/4
            2 => (self.zero(), self.from_integer(1)),
            3 => (self.neg(&half.clone()), half),
            4 => (self.from_integer(-1), self.zero()),
            5 => (self.neg(&half.clone()), self.neg(&half)),
            6 => (self.zero(), self.from_integer(-1)),
            _ => (half.clone(), self.neg(&half)),
        };
        // (c + i s)(rc + i rs)
        let cos = self.sub(&self.mul(&c, &rc), &self.mul(&s, &rs));
        let sin = self.add(&self.mul(&c, &rs), &self.mul(&s, &rc));
        (cos, sin)
    }

    fn inv_sqrt2(&self) -> Fp {
        // sqrt(1/2)
        let half = Fp {
            m: BigInt::one() << (self.bits - 1),
            e: BigInt::zero(),
        };
        self.sqrt(&half)
    }

    /// cos/sin by Taylor series for |theta| <= pi/4 < 1; the alternating
    /// tails are bounded by the first omitted term.
    fn cos_sin_small(&self, theta: &Fp) -> (Fp, Fp) {
        let theta2 = self.mul(theta, theta);
        // sin
        let mut sin = theta.clone();
        let mut term = theta.clone();
        let mut k = 0u64;
        loop {
            term = self.mul(&term, &theta2);
            term = self.div_u64(&term, (2 * k + 2) * (2 * k + 3));
            k += 1;
            if term.m.magnitude() <= term.e.magnitude() || term.m.bits() <= 2 {
                // tail bound: first omitted term
                sin.e += term.m.abs() + term.e.abs() + 1;
                break;
            }
            if k % 2 == 1 {
                sin = self.sub(&sin, &term);
            } else {
                sin = self.add(&sin, &term);
            }
        }
        // cos
        let mut cos = self.from_integer(1);
        let mut term = self.from_integer(1);
        let mut k = 0u64;
        loop {
            term = self.mul(&term, &theta2);
            term = self.div_u64(&term, (2 * k + 1) * (2 * k + 2));
            k += 1;
            if term.m.magnitude() <= term.e.magnitude() || term.m.bits() <= 2 {
                cos.e += term.m.abs() + term.e.abs() + 1;
                break;
            }
            if k % 2 == 1 {
                cos = self.sub(&cos, &term);
            } else {
                cos = self.add(&cos, &term);
            }
        }
        (cos, sin)
    }
}

/// atan(1/x) partial sum (exact rational) and a bound on the truncated tail.
fn atan_inv(x: u64, bits: u32) -> (ExactRational, ExactRational) {
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut term_den = BigInt::from(x);
    let mut sum = ExactRational::zero();
    let mut k = 0u32;
    loop {
        let term = ExactRational::new(BigInt::one(), &term_den * BigInt::from(2 * k + 1));
        if k % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        term_den *= &x2;
        k += 1;
        let next = ExactRational::new(BigInt::one(), &term_den * BigInt::from(2 * k + 1));
        if next <= ExactRational::new(BigInt::one(), BigInt::one() << bits) {
            return (sum, next);
        }
    }
}

fn shift_round(v: &BigInt, bits: u32) -> BigInt {
    let half = BigInt::one() << (bits - 1);
    if v.is_negative() {
        -((-v + half) >> bits)
    } else {
        (v + half) >> bits
    }
}

fn div_round(v: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = v.div_rem(d);
    let twice = BigInt::from(2) * r.abs();
    if &twice >= d {
        if v.is_negative() {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

fn div_ceil_pos(v: &BigInt, d: &BigInt) -> BigInt {
    (v + d - BigInt::one()) / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rational_from_i64;

    fn ctx() -> FpCtx {
        FpCtx::new(DEFAULT_BITS)
    }

    fn assert_encloses(ctx: &FpCtx, v: &Fp, exact: f64) {
        let (lo, hi) = ctx.to_interval(v);
        let lo = lo.to_f64().unwrap();
        let hi = hi.to_f64().unwrap();
        assert!(
            lo - 1e-15 <= exact && exact <= hi + 1e-15,
            "{exact} not in [{lo}, {hi}]"
        );
    }

    #[test]
    fn pi_matches_reference_digits() {
        let c = ctx();
        let pi = c.pi();
        // 50 reference digits
        let reference = "3.14159265358979323846264338327950288419716939937510";
        let (lo, hi) = c.to_interval(&pi);
        let val = crate::rational::to_decimal(&((lo + hi) / rational_from_i64(2, 1)), 50);
        assert_eq!(&val[..40], &reference[..40]);
        let err = c.error_bound(&pi);
        assert!(err < rational_from_i64(1, 1_000_000_000) / rational_from_i64(1 << 30, 1) );
    }

    #[test]
    fn trig_special_values() {
        let c = ctx();
        let tiny = ExactRational::new(BigInt::one(), BigInt::one() << 150);

        // x = 1/4: (0, 1)
        let (cos, sin) = c.cis_two_pi(&rational_from_i64(1, 4));
        let (lo, hi) = c.to_interval(&cos);
        assert!(lo <= ExactRational::zero() && ExactRational::zero() <= hi);
        let (lo, hi) = c.to_interval(&sin);
        assert!(lo <= ExactRational::one() && ExactRational::one() <= hi);
        assert!(c.error_bound(&sin) < tiny);

        // x = 1/3: (-1/2, sqrt(3)/2)
        let (cos, _) = c.cis_two_pi(&rational_from_i64(1, 3));
        let target = rational_from_i64(-1, 2);
        let (lo, hi) = c.to_interval(&cos);
        assert!(lo <= target && target <= hi);

        // x = 1/2: (-1, 0)
        let (cos, sin) = c.cis_two_pi(&rational_from_i64(1, 2));
        let m1 = rational_from_i64(-1, 1);
        let (lo, hi) = c.to_interval(&cos);
        assert!(lo <= m1 && m1 <= hi);
        let (lo, hi) = c.to_interval(&sin);
        assert!(lo <= ExactRational::zero() && ExactRational::zero() <= hi);
    }

    #[test]
    fn trig_agrees_with_f64() {
        let c = ctx();
        for (n, d) in [(1i64, 7i64), (3, 11), (5, 13), (9, 17), (122, 123), (7, 8), (0, 5)] {
            let x = rational_from_i64(n, d);
            let (cos, sin) = c.cis_two_pi(&x);
            let xf = n as f64 / d as f64;
            assert_encloses(&c, &cos, (2.0 * std::f64::consts::PI * xf).cos());
            assert_encloses(&c, &sin, (2.0 * std::f64::consts::PI * xf).sin());
        }
    }

    #[test]
    fn error_bounds_stay_tiny_under_long_products() {
        let c = ctx();
        let (cos, sin) = c.cis_two_pi(&rational_from_i64(1, 97));
        let mut re = c.from_integer(1);
        let mut im = c.zero();
        for _ in 0..97 {
            let nre = c.sub(&c.mul(&re, &cos), &c.mul(&im, &sin));
            let nim = c.add(&c.mul(&re, &sin), &c.mul(&im, &cos));
            re = nre;
            im = nim;
        }
        // after 97 steps we are back at angle 2*pi
        assert_encloses(&c, &re, 1.0);
        assert_encloses(&c, &im, 0.0);
        let budget = ExactRational::new(BigInt::one(), BigInt::one() << 140);
        assert!(c.error_bound(&re) < budget);
    }

    #[test]
    fn sqrt_encloses() {
        let c = ctx();
        let two = c.from_integer(2);
        let s = c.sqrt(&two);
        assert_encloses(&c, &s, std::f64::consts::SQRT_2);
        let z = c.sqrt(&c.zero());
        assert_encloses(&c, &z, 0.0);
    }
}
