//! Square root, logarithm and inverse hyperbolic tangent on [`FixedReal`],
//! plus `pi` and a sine/cosine pair for the verification paths.
//!
//! Each function evaluates at an internal precision `F + guard`, adds up the
//! worst-case truncation error of every step in units of the internal ulp,
//! rounds back to `F` and then adds the error propagated from the input's own
//! bound. No floating point is involved anywhere.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{bit_length, ceil_div, ceil_shr, shr_trunc, FixedReal};
use crate::error::{Error, Result};

/// Guard bits for series-based functions at `frac_bits` of output. The
/// accumulated error is at most a small multiple of the number of series
/// terms, which is linear in the working precision.
fn series_guard(frac_bits: u32) -> u32 {
    2 * (32 - frac_bits.leading_zeros()) + 16
}

/// `2^bits * sum_{i>=0} (+-1)^i z^(2i+1) / (2i+1)` for `z = num / den`,
/// which is `atanh(z)` (or `atan(z)` when `alternating`).
///
/// Requires `0 <= num <= den / 2`. Returns the truncated sum and a bound on
/// its error in ulps.
///
/// With `T_i` the scaled power `z^(2i+1)`, each recurrence step
/// `T_i = floor(T_{i-1} num^2 / den^2)` adds under one ulp, so the error in
/// `T_i` stays below `1 / (1 - z^2) <= 4/3`. Dividing by `2i+1` truncates once
/// more, hence at most 3 ulps per term. Once `T_i` truncates to zero the true
/// remainder is below `(4/3) / (1 - z^2) < 2`.
fn odd_power_series(num: &BigUint, den: &BigUint, bits: u32, alternating: bool) -> (BigInt, u64) {
    debug_assert!(num << 1u32 <= *den);
    let num2 = num * num;
    let den2 = den * den;
    let mut power = (num << bits) / den;
    let mut sum = BigInt::from(power.clone());
    let mut terms = 1u64;
    let mut i = 1u64;
    loop {
        power = power * &num2 / &den2;
        if power.is_zero() {
            break;
        }
        let term = BigInt::from(&power / (2 * i + 1));
        if alternating && i % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        terms += 1;
        i += 1;
    }
    (sum, 3 * terms + 2)
}

/// `log 2 = 2 atanh(1/3)` scaled by `2^bits`, with its error in ulps.
fn ln2_scaled(bits: u32) -> (BigInt, u64) {
    let (v, e) = odd_power_series(&BigUint::one(), &BigUint::from(3u32), bits, false);
    (v << 1u32, 2 * e)
}

/// `log(y / 2^bits)` for a mantissa `y` in `[2^bits, 2^(bits+1))`.
///
/// The argument is reduced in stages. A stage keeps the leading `hi` bits of
/// `y - 1`, call them `c`, and divides `y` by `r = 1 + c 2^-hi` so that the
/// residual drops below `1 + 2^-hi`; `log r = 2 atanh(c / (2^(hi+1) + c))` is
/// a series with small rational ratio. `hi` doubles every stage, and once it
/// reaches `bits` the residual itself is exactly such an `r`.
fn log_near_one(mut y: BigUint, bits: u32) -> (BigInt, u64) {
    let one = BigUint::one() << bits;
    debug_assert!(y >= one && y < (&one << 1u32));
    let mut sum = BigInt::zero();
    let mut err = 0u64;
    let mut hi: u32 = 8;
    loop {
        let u = &y - &one;
        if u.is_zero() {
            break;
        }
        if hi >= bits {
            let den = (&one << 1u32) + &u;
            let (v, e) = odd_power_series(&u, &den, bits, false);
            sum += v << 1u32;
            err += 2 * e;
            break;
        }
        let c = &u >> (bits - hi);
        if !c.is_zero() {
            let den = (BigUint::one() << (hi + 1)) + &c;
            let (v, e) = odd_power_series(&c, &den, bits, false);
            sum += v << 1u32;
            err += 2 * e;
            // y / r never drops below one: c 2^(bits-hi) <= u
            y = (&y << hi) / ((BigUint::one() << hi) + &c);
            err += 1;
        }
        hi = hi.saturating_mul(2);
    }
    (sum, err)
}

/// `log 2` to `frac_bits`.
pub fn fx_ln2(frac_bits: u32) -> FixedReal {
    let guard = series_guard(frac_bits);
    let (v, e) = ln2_scaled(frac_bits + guard);
    round_scaled(v, BigUint::from(e), guard, frac_bits)
}

/// Rounds a value held at `frac_bits + guard` down to `frac_bits`.
fn round_scaled(value: BigInt, err: BigUint, guard: u32, frac_bits: u32) -> FixedReal {
    let (m, inexact) = shr_trunc(&value, guard);
    let mut e = ceil_shr(&err, guard);
    if inexact {
        e += 1u32;
    }
    FixedReal::new(m, frac_bits, e)
}

/// Square root by integer Newton iteration on `mantissa * 2^F`.
pub fn fx_sqrt(x: &FixedReal) -> Result<FixedReal> {
    if x.mantissa().is_negative() {
        return Err(Error::domain("square root of a negative value"));
    }
    let f = x.frac_bits();
    let m = x.mantissa().magnitude();
    let radicand = m << f;
    let root = radicand.sqrt();
    let mut err = BigUint::zero();
    if &root * &root != radicand {
        err += 1u32;
    }
    let e = x.err_ulp();
    if !e.is_zero() {
        // |sqrt(x) - sqrt(v)| <= min(d / sqrt(v), sqrt(d)) for d = |x - v|
        let by_sqrt = (e << f).sqrt() + 1u32;
        let propagated = if root.is_zero() {
            by_sqrt
        } else {
            ceil_div(&(e << f), &root).min(by_sqrt)
        };
        err += propagated;
    }
    Ok(FixedReal::new(BigInt::from(root), f, err))
}

/// Natural logarithm. The input interval must lie strictly above zero.
pub fn fx_log(x: &FixedReal) -> Result<FixedReal> {
    if !x.mantissa().is_positive() {
        return Err(Error::domain("logarithm of a non-positive value"));
    }
    if !x.is_certified_positive() {
        return Err(Error::domain("logarithm argument not certified positive"));
    }
    let f = x.frac_bits();
    let m = x.mantissa().magnitude();
    let guard = series_guard(f);
    let g = f + guard;

    // x = 2^exp2 * y with y in [1, 2)
    let exp2 = bit_length(m) as i64 - 1 - f as i64;
    let lift = guard as i64 - exp2;
    let mut err = BigUint::zero();
    let y = if lift >= 0 {
        m << lift as u64
    } else {
        let y = m >> (-lift) as u64;
        if (&y << (-lift) as u64) != *m {
            err += 1u32;
        }
        y
    };

    let (mut acc, log_err) = log_near_one(y, g);
    err += log_err;
    if exp2 != 0 {
        let (ln2, ln2_err) = ln2_scaled(g);
        acc += ln2 * exp2;
        err += BigUint::from(ln2_err) * exp2.unsigned_abs();
    }

    let mut out = round_scaled(acc, err, guard, f);
    let e = x.err_ulp();
    if !e.is_zero() {
        // |log x - log v| <= d / (v - d)
        let propagated = ceil_div(&(e << f), &(m - e));
        out = FixedReal::new(out.mantissa().clone(), f, out.err_ulp() + propagated);
    }
    Ok(out)
}

/// Inverse hyperbolic tangent. The input interval must lie inside `(-1, 1)`.
///
/// Arguments up to 1/2 in magnitude use the power series directly; larger
/// ones go through `log((1 + x) / (1 - x)) / 2`.
pub fn fx_atanh(x: &FixedReal) -> Result<FixedReal> {
    let f = x.frac_bits();
    let m = x.mantissa().magnitude();
    let e = x.err_ulp();
    let unit = BigUint::one() << f;
    if m + e >= unit {
        return Err(Error::domain("atanh argument not certified inside (-1, 1)"));
    }
    let guard = series_guard(f);
    let g = f + guard;
    let arg = m << guard;
    let (magnitude, err) = if (m << 1u32) <= unit {
        atanh_series(&arg, g)
    } else {
        atanh_by_log(&arg, g)?
    };
    let value = match x.sign() {
        Sign::Minus => -magnitude,
        _ => magnitude,
    };
    let mut out = round_scaled(value, err, guard, f);
    if !e.is_zero() {
        // |atanh x - atanh v| <= d / (1 - (|v| + d)^2)
        let reach = m + e;
        let num = e << (2 * f);
        let den = (BigUint::one() << (2 * f)) - &reach * &reach;
        let propagated = ceil_div(&num, &den);
        out = FixedReal::new(out.mantissa().clone(), f, out.err_ulp() + propagated);
    }
    Ok(out)
}

/// Power series for `0 <= x <= 1/2` given as a mantissa at `bits`.
///
/// `x^2` is truncated once (under 1 ulp); each power step then adds under
/// 2 ulps and shrinks earlier error by `x^2 <= 1/4`, keeping the error in
/// every power below 8/3. With the final division that is under 4 ulps per
/// term, and the remainder after the first vanishing power is under 4.
fn atanh_series(x: &BigUint, bits: u32) -> (BigInt, BigUint) {
    let x2 = (x * x) >> bits;
    let mut power = x.clone();
    let mut sum = BigInt::from(power.clone());
    let mut terms = 1u64;
    let mut i = 1u64;
    loop {
        power = (power * &x2) >> bits;
        if power.is_zero() {
            break;
        }
        sum += BigInt::from(&power / (2 * i + 1));
        terms += 1;
        i += 1;
    }
    (sum, BigUint::from(4 * terms + 4))
}

fn atanh_by_log(x: &BigUint, bits: u32) -> Result<(BigInt, BigUint)> {
    let unit = BigUint::one() << bits;
    let num = &unit + x;
    let den = &unit - x;
    let scaled = &num << bits;
    let (ratio, rem) = scaled.div_rem(&den);
    let ratio_err = if rem.is_zero() { 0u32 } else { 1u32 };
    let ratio = FixedReal::new(BigInt::from(ratio), bits, BigUint::from(ratio_err));
    let log = fx_log(&ratio)?;
    let half = log.div_int(&BigInt::from(2))?;
    Ok((half.mantissa().abs(), half.err_ulp().clone()))
}

/// `pi = 16 atan(1/5) - 4 atan(1/239)`.
pub fn fx_pi(frac_bits: u32) -> FixedReal {
    let guard = series_guard(frac_bits);
    let g = frac_bits + guard;
    let one = BigUint::one();
    let (a, ea) = odd_power_series(&one, &BigUint::from(5u32), g, true);
    let (b, eb) = odd_power_series(&one, &BigUint::from(239u32), g, true);
    let value = (a << 4u32) - (b << 2u32);
    round_scaled(value, BigUint::from(16 * ea + 4 * eb), guard, frac_bits)
}

/// `(sin x, cos x)`.
///
/// Only the identity-verification paths use this. The argument is reduced by
/// the nearest multiple of `pi/2` to `|r| <= pi/4 < 1`, where both Taylor
/// series shrink every term by at least half; the quadrant then selects signs.
pub fn fx_sin_cos(x: &FixedReal) -> (FixedReal, FixedReal) {
    let f = x.frac_bits();
    let int_bits = bit_length(x.mantissa().magnitude()).saturating_sub(f as u64) as u32;
    let guard = series_guard(f) + int_bits + 1;
    let g = f + guard;
    let xg = x.mantissa() << guard;
    let pi = fx_pi(g - 1);
    // pi at g-1 bits is pi/2 at g bits with the same mantissa
    let hp = pi.mantissa();
    let two_hp: BigInt = hp << 1u32;
    let shifted: BigInt = (&xg << 1u32) + hp;
    let quadrant = shifted.div_floor(&two_hp);
    let r = &xg - &quadrant * hp;
    // reduction error, in ulps at g
    let r_err = BigUint::one() + pi.err_ulp() * quadrant.magnitude();

    let (sin, cos, series_err) = sin_cos_series(&r, g);
    let err = series_err + r_err;
    let (s, c) = match quadrant
        .mod_floor(&BigInt::from(4))
        .try_into()
        .unwrap_or(0u8)
    {
        0 => (sin, cos),
        1 => (cos, -sin),
        2 => (-sin, -cos),
        _ => (-cos, sin),
    };
    let propagate = |v: BigInt| {
        let out = round_scaled(v, err.clone(), guard, f);
        // sin and cos are 1-Lipschitz
        FixedReal::new(out.mantissa().clone(), f, out.err_ulp() + x.err_ulp())
    };
    (propagate(s), propagate(c))
}

/// Taylor series for `|r| <= 1` at `bits`. Each term is produced by one
/// multiplication with the truncated `r^2` (under 1 ulp of damage) and one
/// truncating division by `2^bits (2i)(2i +- 1)`; the ratio between terms is
/// at most 1/2, so the error per term stays under 4 ulps and the remainder
/// under 8.
fn sin_cos_series(r: &BigInt, bits: u32) -> (BigInt, BigInt, BigUint) {
    let r2 = (r * r) >> bits;
    let unit = BigInt::one() << bits;

    let mut cos = unit.clone();
    let mut term = unit;
    let mut cos_terms = 1u64;
    let mut k = 1u64;
    loop {
        term = -(term * &r2) / (BigInt::from((2 * k - 1) * (2 * k)) << bits);
        if term.is_zero() {
            break;
        }
        cos += &term;
        cos_terms += 1;
        k += 1;
    }

    let mut sin = r.clone();
    let mut term = r.clone();
    let mut sin_terms = 1u64;
    let mut k = 1u64;
    loop {
        term = -(term * &r2) / (BigInt::from((2 * k) * (2 * k + 1)) << bits);
        if term.is_zero() {
            break;
        }
        sin += &term;
        sin_terms += 1;
        k += 1;
    }
    let err = 4 * cos_terms.max(sin_terms) + 8;
    (sin, cos, BigUint::from(err))
}
