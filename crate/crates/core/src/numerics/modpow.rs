use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// `base^exp mod m` by left-to-right square-and-multiply. The result lies in
/// `[0, m)` for any sign of `base`.
pub fn modpow(base: &BigInt, exp: &BigUint, m: &BigInt) -> Result<BigInt> {
    if m < &BigInt::one() {
        return Err(Error::domain("modulus must be at least 1"));
    }
    if m.is_one() {
        return Ok(BigInt::zero());
    }
    let b = base.mod_floor(m);
    let mut acc = BigInt::one();
    for i in (0..exp.bits()).rev() {
        acc = (&acc * &acc) % m;
        if exp.bit(i) {
            acc = (&acc * &b) % m;
        }
    }
    Ok(acc)
}

#[inline]
pub fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Word-sized `base^exp mod m`; `m` must be nonzero. No allocation.
#[inline]
pub fn modpow_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    debug_assert!(m != 0);
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mulmod_u64(result, b, m);
        }
        b = mulmod_u64(b, b, m);
        exp >>= 1;
    }
    result
}
