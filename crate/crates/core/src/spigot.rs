//! Binary digit extraction at arbitrary positions.
//!
//! For a degree-1 formula with base `b = 2^beta` and prefactor `p/q`, the
//! bits of the constant `C` after position `n` are the bits of
//! `frac(2^n C)`, and
//!
//! ```text
//! 2^n C = sum_k sum_j p a_j 2^(n - beta k) / (q (k l + j)).
//! ```
//!
//! Head terms (`beta k <= n`) are reduced exactly: their fractional part is
//! `(p a_j 2^(n - beta k) mod M) / M` with `M = q (k l + j)`, which needs only
//! a modular power. Keeping `q` inside the modulus matters: `frac(x / q)` is
//! not a function of `frac(x)`. Each head fraction is truncated into a
//! `W`-bit accumulator taken mod 1. Tail terms (`beta k > n`) are summed
//! directly at `W` bits until a geometric bound drops below one ulp.
//!
//! Every truncation costs under one ulp, so the total error is at most
//! `head terms + tail terms + 1` ulps of `2^-W`. A leading bit is certified
//! when both ends of that error interval share it.

use std::fmt;
use std::ops::Range;
use std::thread;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::formula::BbpFormula;
use crate::numerics::{modpow, modpow_u64, mulmod_u64};

/// Largest window `extract_bits` accepts.
pub const MAX_WINDOW_BITS: usize = 64;

/// Minimum number of accumulator bits beyond the requested window.
pub const MIN_GUARD_BITS: u32 = 64;

/// Head moduli at or above this use the big-integer path.
const WORD_MODULUS_LIMIT: u64 = 1 << 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Radix {
    Binary,
    Hex,
}

impl Radix {
    pub fn value(self) -> u32 {
        match self {
            Radix::Binary => 2,
            Radix::Hex => 16,
        }
    }

    pub fn bits_per_digit(self) -> usize {
        match self {
            Radix::Binary => 1,
            Radix::Hex => 4,
        }
    }

    pub fn from_value(radix: u32) -> Option<Radix> {
        match radix {
            2 => Some(Radix::Binary),
            16 => Some(Radix::Hex),
            _ => None,
        }
    }
}

/// A run of extracted digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitWindow {
    /// Bit index after the binary point where the window starts: the first
    /// digit covers bits `position + 1 ..`.
    pub position: u64,
    pub digits: String,
    pub radix: Radix,
    /// Leading digits guaranteed correct by the error budget.
    pub certified: usize,
}

impl DigitWindow {
    pub fn is_fully_certified(&self) -> bool {
        self.certified == self.digits.len()
    }

    pub fn certified_digits(&self) -> &str {
        &self.digits[..self.certified]
    }
}

impl fmt::Display for DigitWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pos={} radix={} digits={} certified={}",
            self.position,
            self.radix.value(),
            self.digits,
            self.certified
        )
    }
}

#[derive(Clone, Debug)]
struct PlanTerm {
    /// 1-based position inside a block of `l` terms.
    j: u64,
    /// `p * a_j`
    scaled: BigInt,
    small: Option<i128>,
}

/// A degree-1, power-of-two-base formula prepared for extraction.
#[derive(Clone, Debug)]
pub struct SpigotPlan {
    formula: BbpFormula,
    beta: u32,
    numerator: BigInt,
    denominator: BigInt,
    terms: Vec<PlanTerm>,
    max_scaled: BigUint,
}

impl SpigotPlan {
    pub fn formula(&self) -> &BbpFormula {
        &self.formula
    }

    /// `log2 b`.
    pub fn beta(&self) -> u32 {
        self.beta
    }

    /// Prefactor numerator `p`.
    pub fn numerator_scale(&self) -> &BigInt {
        &self.numerator
    }

    /// Prefactor denominator `q`, folded into every head modulus.
    pub fn denominator_scale(&self) -> &BigInt {
        &self.denominator
    }

    fn length(&self) -> u64 {
        self.formula.length() as u64
    }

    /// Number of head blocks (`beta k <= n`).
    fn head_blocks(&self, n: u64) -> u64 {
        n / self.beta as u64 + 1
    }
}

pub fn build_plan(f: &BbpFormula) -> Result<SpigotPlan> {
    if f.degree() != 1 {
        return Err(Error::UnsupportedDegree(f.degree()));
    }
    let b = f.base().magnitude();
    let beta = b.bits() - 1;
    if !f.base().is_positive() || b != &(BigUint::one() << beta) || beta == 0 {
        return Err(Error::UnsupportedBase(format!(
            "{} is not a power of two",
            f.base()
        )));
    }
    let beta = u32::try_from(beta)
        .map_err(|_| Error::UnsupportedBase("base exponent too large".into()))?;
    let numerator = f.prefactor().numer().clone();
    let denominator = f.prefactor().denom().clone();
    debug_assert!(numerator.gcd(&denominator).is_one() && denominator.is_positive());

    let terms: Vec<PlanTerm> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(idx, a)| {
            let scaled = a * &numerator;
            let small = scaled.to_i128();
            PlanTerm {
                j: idx as u64 + 1,
                scaled,
                small,
            }
        })
        .collect();
    let max_scaled = terms
        .iter()
        .map(|t| t.scaled.magnitude().clone())
        .max()
        .unwrap_or_default();
    Ok(SpigotPlan {
        formula: f.clone(),
        beta,
        numerator,
        denominator,
        terms,
        max_scaled,
    })
}

/// `W`-bit fraction accumulated mod 1; little-endian 64-bit limbs.
#[derive(Clone, Debug)]
struct FracAcc {
    limbs: Vec<u64>,
    scratch: Vec<u64>,
}

impl FracAcc {
    fn new(limbs: usize) -> Self {
        FracAcc {
            limbs: vec![0; limbs],
            scratch: vec![0; limbs],
        }
    }

    /// Adds `floor(r 2^W / m) / 2^W` for `r < m < 2^63`.
    fn add_ratio(&mut self, mut r: u64, m: u64) {
        if r == 0 {
            return;
        }
        let n = self.limbs.len();
        for i in (0..n).rev() {
            let wide = (r as u128) << 64;
            self.scratch[i] = (wide / m as u128) as u64;
            r = (wide % m as u128) as u64;
        }
        let mut carry = false;
        for i in 0..n {
            let (s1, c1) = self.limbs[i].overflowing_add(self.scratch[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            self.limbs[i] = s2;
            carry = c1 || c2;
        }
    }

    /// Adds a `W`-bit value given as little-endian limbs, mod 1.
    fn add_limbs(&mut self, other: &[u64]) {
        let mut carry = false;
        for (i, limb) in self.limbs.iter_mut().enumerate() {
            let o = other.get(i).copied().unwrap_or(0);
            let (s1, c1) = limb.overflowing_add(o);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *limb = s2;
            carry = c1 || c2;
        }
    }

    fn to_biguint(&self) -> BigUint {
        BigUint::from_slice(
            &self
                .limbs
                .iter()
                .flat_map(|l| [*l as u32, (*l >> 32) as u32])
                .collect::<Vec<_>>(),
        )
    }
}

/// `frac(2^n C)` held at `width` bits, with its error bound in ulps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpigotFraction {
    pub value: BigUint,
    pub width: u32,
    pub err_ulp: BigUint,
    pub head_terms: u64,
    pub tail_terms: u64,
}

fn head_chunk(plan: &SpigotPlan, n: u64, ks: Range<u64>, limbs: usize, word: bool) -> FracAcc {
    let mut acc = FracAcc::new(limbs);
    let q = &plan.denominator;
    let l = plan.length();
    let width = limbs as u32 * 64;
    let q_word = q.to_u64().unwrap_or(0);
    for k in ks {
        let e = n - plan.beta as u64 * k;
        for term in &plan.terms {
            let denom = k * l + term.j;
            if word {
                let m = q_word * denom;
                let base = match term.small {
                    Some(v) => v.rem_euclid(m as i128) as u64,
                    None => term
                        .scaled
                        .mod_floor(&BigInt::from(m))
                        .to_u64()
                        .expect("reduced below the modulus"),
                };
                let r = mulmod_u64(base, modpow_u64(2, e, m), m);
                acc.add_ratio(r, m);
            } else {
                let m = q * BigInt::from(denom);
                let r = (&term.scaled
                    * modpow(&BigInt::from(2), &BigUint::from(e), &m)
                        .expect("modulus is positive"))
                .mod_floor(&m);
                let frac = (r.magnitude() << width) / m.magnitude();
                acc.add_limbs(&frac.to_u64_digits());
            }
        }
    }
    acc
}

fn thread_count(requested: usize) -> usize {
    match requested {
        0 => thread::available_parallelism().map_or(1, usize::from),
        t => t,
    }
}

/// Computes `frac(2^n C)` to `width` bits (rounded up to a multiple of 64).
/// The head range is split across `threads` workers (0 = all cores); the
/// result does not depend on the split.
pub fn spigot_fraction(plan: &SpigotPlan, n: u64, width: u32, threads: usize) -> SpigotFraction {
    let limbs = width.div_ceil(64).max(1) as usize;
    let width = limbs as u32 * 64;
    let l = plan.length();
    let blocks = plan.head_blocks(n);

    // q (k l + j) for the last head block bounds every head modulus
    let largest = plan.denominator.magnitude() * BigUint::from(blocks * l);
    let word = largest < BigUint::from(WORD_MODULUS_LIMIT);

    let workers = thread_count(threads).clamp(1, blocks.max(1) as usize);
    let chunk = blocks.div_ceil(workers as u64);
    let ranges: Vec<Range<u64>> = (0..workers as u64)
        .map(|w| (w * chunk).min(blocks)..((w + 1) * chunk).min(blocks))
        .filter(|r| !r.is_empty())
        .collect();
    let mut acc = FracAcc::new(limbs);
    if ranges.len() <= 1 {
        acc = head_chunk(plan, n, 0..blocks, limbs, word);
    } else {
        let parts: Vec<FracAcc> = thread::scope(|s| {
            let handles: Vec<_> = ranges
                .into_iter()
                .map(|r| s.spawn(move || head_chunk(plan, n, r, limbs, word)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("head worker panicked"))
                .collect()
        });
        for part in &parts {
            acc.add_limbs(&part.limbs);
        }
    }
    let head_terms = blocks * plan.terms.len() as u64;

    // tail: |sum_{k >= K}| <= 2 l max|p a| 2^(W + n - beta K) / (q (K l + 1)) ulps
    let q = &plan.denominator;
    let reach = BigInt::from(&plan.max_scaled * (2 * l)) << width;
    let mut tail = BigInt::zero();
    let mut tail_terms = 0u64;
    let mut k = blocks;
    loop {
        let shift = plan.beta as u64 * k - n;
        let bound_den = (q * BigInt::from(k * l + 1)) << shift;
        if reach < bound_den {
            break;
        }
        for term in &plan.terms {
            let den = (q * BigInt::from(k * l + term.j)) << shift;
            tail += (&term.scaled << width) / den;
            tail_terms += 1;
        }
        k += 1;
    }

    let modulus = BigInt::one() << width;
    let total = (BigInt::from(acc.to_biguint()) + tail).mod_floor(&modulus);
    let value = total.to_biguint().expect("reduced mod 2^W");
    SpigotFraction {
        value,
        width,
        err_ulp: BigUint::from(head_terms + tail_terms + 1),
        head_terms,
        tail_terms,
    }
}

/// Accumulator width for a `count`-bit window at position `n`: at least
/// [`MIN_GUARD_BITS`] spare bits, and 32 more than the bit length of the
/// expected error count when that is larger.
pub fn accumulator_width(plan: &SpigotPlan, n: u64, count: usize) -> u32 {
    let terms = plan.head_blocks(n) * plan.terms.len() as u64 + 1;
    let err_bits = 64 - terms.leading_zeros();
    let guard = MIN_GUARD_BITS.max(err_bits + 32);
    (count as u32 + guard).div_ceil(64) * 64
}

/// Bits `n+1 ..= n+count` of the constant's fractional part (`count <= 64`).
pub fn extract_bits(plan: &SpigotPlan, n: u64, count: usize) -> Result<DigitWindow> {
    extract_bits_with_threads(plan, n, count, 0)
}

pub fn extract_bits_with_threads(
    plan: &SpigotPlan,
    n: u64,
    count: usize,
    threads: usize,
) -> Result<DigitWindow> {
    if count == 0 || count > MAX_WINDOW_BITS {
        return Err(Error::invalid(format!(
            "window size must be between 1 and {MAX_WINDOW_BITS} bits, got {count}"
        )));
    }
    let width = accumulator_width(plan, n, count);
    let frac = spigot_fraction(plan, n, width, threads);
    let w = frac.width;

    let bits = &frac.value >> (w - count as u32);
    let digits = format!("{:0>count$}", bits.to_str_radix(2));

    Ok(DigitWindow {
        position: n,
        digits,
        radix: Radix::Binary,
        certified: certified_prefix(&frac.value, &frac.err_ulp, w, count),
    })
}

/// Leading bits of a `width`-bit fraction `value` shared by every point of
/// `[value - err, value + err]`, at most `count`. Zero when the interval
/// wraps around 0 or 1.
fn certified_prefix(value: &BigUint, err: &BigUint, width: u32, count: usize) -> usize {
    let value = BigInt::from(value.clone());
    let err = BigInt::from(err.clone());
    let lo = &value - &err;
    let hi = &value + &err;
    if lo.sign() == Sign::Minus || hi >= (BigInt::one() << width) {
        return 0;
    }
    let xor = lo.magnitude() ^ hi.magnitude();
    let agree = width as u64 - xor.bits();
    (agree as usize).min(count)
}

/// Hex digits starting at hex position `hex_position` (bit `4 * hex_position`),
/// `count <= 16` of them.
pub fn extract_hex(plan: &SpigotPlan, hex_position: u64, count: usize) -> Result<DigitWindow> {
    extract_hex_with_threads(plan, hex_position, count, 0)
}

pub fn extract_hex_with_threads(
    plan: &SpigotPlan,
    hex_position: u64,
    count: usize,
    threads: usize,
) -> Result<DigitWindow> {
    if count == 0 || count * 4 > MAX_WINDOW_BITS {
        return Err(Error::invalid(format!(
            "hex window size must be between 1 and {}, got {count}",
            MAX_WINDOW_BITS / 4
        )));
    }
    let bits = extract_bits_with_threads(plan, 4 * hex_position, 4 * count, threads)?;
    Ok(DigitWindow {
        position: bits.position,
        digits: bits_to_hex(&bits.digits),
        radix: Radix::Hex,
        certified: bits.certified / 4,
    })
}

/// Regroups a binary digit string (length a multiple of 4) into lowercase hex.
pub fn bits_to_hex(bits: &str) -> String {
    bits.as_bytes()
        .chunks(4)
        .map(|nibble| {
            let v = nibble
                .iter()
                .fold(0u32, |acc, b| acc * 2 + u32::from(b - b'0'));
            char::from_digit(v, 16).expect("nibble below 16")
        })
        .collect()
}
