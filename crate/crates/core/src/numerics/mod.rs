//! Exact integer / rational arithmetic and error-tracked fixed-point reals.
//!
//! Integers and rationals come from `num-bigint` / `num-rational`; this module
//! adds [`FixedReal`], the carrier for every real-valued quantity in the
//! crate, and the handful of elementary functions the rest of the crate needs
//! (square root, logarithm, inverse hyperbolic tangent, and a trigonometric
//! pair used only by identity verification).
//!
//! All rounding is truncation toward zero. Every operation returns a value
//! whose `err_ulp` bounds the distance to the exact result.

mod elementary;
mod fixed;
mod modpow;

pub use elementary::{fx_atanh, fx_ln2, fx_log, fx_pi, fx_sin_cos, fx_sqrt};
pub use fixed::{Decimal, FixedReal};
pub use modpow::{modpow, modpow_u64, mulmod_u64};

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational as Rational;

/// Default working precision for 1000-bit targets (88 guard bits).
pub const DEFAULT_FRAC_BITS: u32 = 1088;

/// Truncating right shift of a signed integer (rounds toward zero).
/// The flag reports whether any nonzero bits were discarded.
pub(crate) fn shr_trunc(value: &BigInt, bits: u32) -> (BigInt, bool) {
    use num_traits::Zero;
    if bits == 0 {
        return (value.clone(), false);
    }
    let mag = value.magnitude();
    let shifted = mag >> bits;
    let inexact = (&shifted << bits) != *mag;
    if shifted.is_zero() {
        return (BigInt::zero(), inexact);
    }
    (BigInt::from_biguint(value.sign(), shifted), inexact)
}

/// `ceil(value / 2^bits)`.
pub(crate) fn ceil_shr(value: &BigUint, bits: u32) -> BigUint {
    let shifted = value >> bits;
    if (&shifted << bits) == *value {
        shifted
    } else {
        shifted + 1u32
    }
}

/// `ceil(num / den)` for `den > 0`.
pub(crate) fn ceil_div(num: &BigUint, den: &BigUint) -> BigUint {
    use num_integer::Integer;
    let (q, r) = num.div_rem(den);
    if num_traits::Zero::is_zero(&r) {
        q
    } else {
        q + 1u32
    }
}

/// Number of bits of `x`, zero for zero.
pub(crate) fn bit_length(x: &BigUint) -> u64 {
    x.bits()
}
