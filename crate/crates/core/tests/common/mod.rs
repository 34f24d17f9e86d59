//! Independent oracles for the integration tests. Nothing here calls into
//! the evaluation paths it is used to check.
#![allow(dead_code)]

use bbp_core::numerics::{BigInt, BigUint, FixedReal, Rational};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Integer bounds `(lo, hi)` with `lo <= exp(m 2^-f) 2^p <= hi`, from the
/// Taylor series with every term rounded outward.
pub fn exp_bounds(m: &BigInt, f: u32, p: u32) -> (BigInt, BigInt) {
    let abs_x_ceil = (m.magnitude() >> f) + 1u32;
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    let mut power = BigInt::one();
    let mut fact = BigInt::one();
    let mut i: u64 = 0;
    loop {
        // term_i = m^i / (2^(f i) i!) scaled by 2^p
        let num = &power << p;
        let den = &fact << (f as u64 * i) as usize;
        let (q, r) = num.div_mod_floor(&den);
        let ceil = if r.is_zero() { q.clone() } else { &q + 1 };
        let past_peak = BigUint::from(i) > &abs_x_ceil * 2u32;
        if past_peak && ceil.abs() <= BigInt::one() {
            // geometric remainder, ratio <= 1/2 past the peak
            lo -= 2;
            hi += 2;
            break;
        }
        lo += q;
        hi += ceil;
        i += 1;
        power *= m;
        fact *= BigInt::from(i);
    }
    (lo, hi)
}

/// Whether `log(tau)` lies within the certified interval of `x`, checked as
/// `exp(lower) <= tau <= exp(upper)`.
pub fn log_interval_holds(x: &FixedReal, tau: &Rational) -> bool {
    let p = x.frac_bits() + 64;
    let (lo, _) = exp_bounds(&x.lower_mantissa(), x.frac_bits(), p);
    let (_, hi) = exp_bounds(&x.upper_mantissa(), x.frac_bits(), p);
    let scaled = tau * Rational::from_integer(BigInt::one() << p);
    Rational::from_integer(lo) <= scaled && scaled <= Rational::from_integer(hi)
}

/// Whether `atanh(tau)` lies within the certified interval of `x`:
/// `exp(2 lower) <= (1 + tau) / (1 - tau) <= exp(2 upper)`.
pub fn atanh_interval_holds(x: &FixedReal, tau: &Rational) -> bool {
    let ratio = (Rational::one() + tau) / (Rational::one() - tau);
    let twice = FixedReal::new(x.mantissa() * 2, x.frac_bits(), x.err_ulp() * 2u32);
    log_interval_holds(&twice, &ratio)
}

/// Whether `sqrt(tau)` lies within the certified interval of `x`.
pub fn sqrt_interval_holds(x: &FixedReal, tau: &Rational) -> bool {
    let scale = Rational::from_integer(BigInt::one() << x.frac_bits());
    let lo = Rational::from_integer(x.lower_mantissa()) / &scale;
    let hi = Rational::from_integer(x.upper_mantissa()) / &scale;
    let lo_ok = lo.is_negative() || &lo * &lo <= *tau;
    lo_ok && *tau <= &hi * &hi
}

/// `sum_{r=1..n} 1 / (r 2^r)`, exactly; converges to `log 2` with remainder
/// below `2^-n / (n + 1)`.
pub fn log2_partial_series(n: u32) -> Rational {
    (1..=n)
        .map(|r| Rational::new(BigInt::one(), BigInt::from(r) << r))
        .fold(Rational::zero(), |a, b| a + b)
}

/// `base^exp mod m` by `exp` repeated multiplications.
pub fn modpow_brute(base: &BigInt, exp: u64, m: &BigInt) -> BigInt {
    let b = base.mod_floor(m);
    let mut acc = BigInt::one().mod_floor(m);
    for _ in 0..exp {
        acc = (acc * &b).mod_floor(m);
    }
    acc
}

/// Whether `|x - target| <= err(x) * 2^-F + slack`, exactly.
pub fn within(x: &FixedReal, target: &Rational, slack: &Rational) -> bool {
    let scale = Rational::from_integer(BigInt::one() << x.frac_bits());
    let diff = (x.to_rational() - target).abs();
    diff <= Rational::from_integer(BigInt::from(x.err_ulp().clone())) / scale + slack
}

/// Elements `a + b sqrt(5)` of Q(sqrt 5), multiplied exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadSurd {
    pub a: Rational,
    pub b: Rational,
}

impl QuadSurd {
    pub fn new(a: Rational, b: Rational) -> Self {
        QuadSurd { a, b }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let five = Rational::from_integer(5.into());
        QuadSurd {
            a: &self.a * &o.a + five * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = QuadSurd::new(Rational::one(), Rational::zero());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Bits `n+1 ..= n+count` of `frac(x)`, plus how many of them every point of
/// the error interval of `x` shares.
pub fn oracle_bits(x: &FixedReal, n: u64, count: usize) -> (String, usize) {
    let f = x.frac_bits() as u64;
    assert!(f >= n + count as u64);
    let read = |m: &BigInt| -> String {
        let top = m >> (f - n - count as u64) as usize;
        let window = top.mod_floor(&(BigInt::one() << count));
        format!("{:0>count$}", window.to_str_radix(2))
    };
    let digits = read(x.mantissa());
    let (lo, hi) = (x.lower_mantissa(), x.upper_mantissa());
    // the interval must not straddle a multiple of 2^-n either
    let whole = |m: &BigInt| m >> (f - n) as usize;
    if whole(&lo) != whole(&hi) {
        return (digits, 0);
    }
    let (a, b) = (read(&lo), read(&hi));
    let shared = a.bytes().zip(b.bytes()).take_while(|(p, q)| p == q).count();
    (digits, shared)
}

/// Exact Taylor partial sums of sin and cos at `tau`, with a bound on the
/// omitted remainder of either.
pub fn sin_cos_taylor(tau: &Rational) -> (Rational, Rational, Rational) {
    let mut sin = Rational::zero();
    let mut cos = Rational::zero();
    let mut term = Rational::one();
    let mut i = 0i64;
    let limit = Rational::new(BigInt::one(), BigInt::one() << 300u32);
    loop {
        match i % 4 {
            0 => cos += &term,
            1 => sin += &term,
            2 => cos -= &term,
            _ => sin -= &term,
        }
        i += 1;
        term = term * tau / Rational::from_integer(i.into());
        if Rational::from_integer(i.into()) > tau.abs() * int(2) && term.abs() < limit {
            return (sin, cos, term.abs() * int(2));
        }
    }
}
