use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{bit_length, ceil_div, ceil_shr, shr_trunc};
use crate::error::{Error, Result};

/// Signed fixed-point real `mantissa * 2^-frac_bits` with a certified bound
/// on its absolute error: the exact quantity it stands for lies within
/// `err_ulp * 2^-frac_bits` of the represented value.
///
/// Values are immutable. Binary operations require both operands to share
/// the same `frac_bits`; mixing precisions is a programming error and panics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedReal {
    mantissa: BigInt,
    frac_bits: u32,
    err_ulp: BigUint,
}

impl FixedReal {
    pub fn new(mantissa: BigInt, frac_bits: u32, err_ulp: BigUint) -> Self {
        FixedReal {
            mantissa,
            frac_bits,
            err_ulp,
        }
    }

    pub fn exact(mantissa: BigInt, frac_bits: u32) -> Self {
        Self::new(mantissa, frac_bits, BigUint::zero())
    }

    pub fn zero(frac_bits: u32) -> Self {
        Self::exact(BigInt::zero(), frac_bits)
    }

    pub fn one(frac_bits: u32) -> Self {
        Self::exact(BigInt::one() << frac_bits, frac_bits)
    }

    pub fn from_integer(value: impl Into<BigInt>, frac_bits: u32) -> Self {
        Self::exact(value.into() << frac_bits, frac_bits)
    }

    /// Truncates `value` to `frac_bits`; the error is 0 when the rational is
    /// exactly representable and 1 ulp otherwise.
    pub fn from_rational(value: &BigRational, frac_bits: u32) -> Self {
        let scaled = value.numer() << frac_bits;
        let (q, r) = scaled.div_rem(value.denom());
        let err = if r.is_zero() { 0u32 } else { 1u32 };
        Self::new(q, frac_bits, BigUint::from(err))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn err_ulp(&self) -> &BigUint {
        &self.err_ulp
    }

    pub fn sign(&self) -> Sign {
        self.mantissa.sign()
    }

    pub fn is_exact(&self) -> bool {
        self.err_ulp.is_zero()
    }

    /// The represented value as an exact rational (ignores the error bound).
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.frac_bits)
    }

    /// Lower end of the certified interval, as a mantissa.
    pub fn lower_mantissa(&self) -> BigInt {
        &self.mantissa - BigInt::from(self.err_ulp.clone())
    }

    /// Upper end of the certified interval, as a mantissa.
    pub fn upper_mantissa(&self) -> BigInt {
        &self.mantissa + BigInt::from(self.err_ulp.clone())
    }

    /// Whether the exact rational `x` lies inside the certified interval.
    pub fn contains(&self, x: &BigRational) -> bool {
        // |m - x 2^F| <= e  <=>  |m d - n 2^F| <= e d
        let d = x.denom();
        let lhs = &self.mantissa * d - (x.numer() << self.frac_bits);
        lhs.magnitude() <= &(&self.err_ulp * d.magnitude())
    }

    /// Number of fractional bits the error bound leaves intact:
    /// `frac_bits - bitlen(err_ulp)`.
    pub fn certified_bits(&self) -> i64 {
        self.frac_bits as i64 - bit_length(&self.err_ulp) as i64
    }

    /// Whether the certified interval lies strictly above zero.
    pub fn is_certified_positive(&self) -> bool {
        self.mantissa.is_positive() && self.mantissa.magnitude() > &self.err_ulp
    }

    pub fn abs(&self) -> Self {
        Self::new(self.mantissa.abs(), self.frac_bits, self.err_ulp.clone())
    }

    /// Re-expresses the value at another precision. Widening is exact;
    /// narrowing truncates and rounds the error bound up.
    pub fn with_frac_bits(&self, frac_bits: u32) -> Self {
        match frac_bits.cmp(&self.frac_bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let d = frac_bits - self.frac_bits;
                Self::new(&self.mantissa << d, frac_bits, &self.err_ulp << d)
            }
            Ordering::Less => {
                let d = self.frac_bits - frac_bits;
                let (m, inexact) = shr_trunc(&self.mantissa, d);
                let mut err = ceil_shr(&self.err_ulp, d);
                if inexact {
                    err += 1u32;
                }
                Self::new(m, frac_bits, err)
            }
        }
    }

    fn check_same_precision(&self, rhs: &Self) {
        assert_eq!(
            self.frac_bits, rhs.frac_bits,
            "FixedReal operands must share frac_bits"
        );
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.check_same_precision(rhs);
        let f = self.frac_bits;
        let product = &self.mantissa * &rhs.mantissa;
        let (m, inexact) = shr_trunc(&product, f);
        // |x1 x2 - v1 v2| <= |v1| e2 + |v2| e1 + e1 e2   (in units of 2^-2F)
        let spread = self.mantissa.magnitude() * &rhs.err_ulp
            + rhs.mantissa.magnitude() * &self.err_ulp
            + &self.err_ulp * &rhs.err_ulp;
        let mut err = ceil_shr(&spread, f);
        if inexact {
            err += 1u32;
        }
        Self::new(m, f, err)
    }

    /// Quotient; fails when the divisor's interval contains zero.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        self.check_same_precision(rhs);
        let f = self.frac_bits;
        let d_mag = rhs.mantissa.magnitude();
        if d_mag <= &rhs.err_ulp {
            return Err(Error::domain("division by a value not certified nonzero"));
        }
        let scaled = &self.mantissa << f;
        let (q, r) = scaled.div_rem(&rhs.mantissa);
        // |x1/x2 - v1/v2| <= (|v2| e1 + |v1| e2) / (|v2| (|v2| - e2))
        let mut err = BigUint::zero();
        if !self.err_ulp.is_zero() || !rhs.err_ulp.is_zero() {
            let num = (d_mag * &self.err_ulp + self.mantissa.magnitude() * &rhs.err_ulp) << f;
            let den = d_mag * (d_mag - &rhs.err_ulp);
            err = ceil_div(&num, &den);
        }
        if !r.is_zero() {
            err += 1u32;
        }
        Ok(Self::new(q, f, err))
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self::new(
            &self.mantissa * k,
            self.frac_bits,
            &self.err_ulp * k.magnitude(),
        )
    }

    pub fn div_int(&self, k: &BigInt) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        let (q, r) = self.mantissa.div_rem(k);
        let mut err = ceil_div(&self.err_ulp, k.magnitude());
        if !r.is_zero() {
            err += 1u32;
        }
        Ok(Self::new(q, self.frac_bits, err))
    }

    /// Multiplies by an exact rational: integer product first, one
    /// truncating division last.
    pub fn mul_rational(&self, r: &BigRational) -> Self {
        self.mul_int(r.numer())
            .div_int(r.denom())
            .expect("rational denominators are nonzero")
    }

    /// Exact multiplication by `2^bits`.
    pub fn mul_pow2(&self, bits: u32) -> Self {
        Self::new(
            &self.mantissa << bits,
            self.frac_bits,
            &self.err_ulp << bits,
        )
    }

    /// Approximate `f64` view, for display only.
    pub fn to_f64(&self) -> f64 {
        let f = self.frac_bits;
        let keep = 64u32;
        let bits = bit_length(self.mantissa.magnitude()) as u32;
        if bits <= keep {
            return self.mantissa.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(f as i32));
        }
        let drop = bits - keep;
        let (m, _) = shr_trunc(&self.mantissa, drop);
        m.to_f64().unwrap_or(f64::NAN) * 2f64.powi(drop as i32 - f as i32)
    }

    /// Decimal expansion truncated toward zero, stopping at the last digit
    /// the error bound can defend (or at `max_digits`, whichever is first).
    pub fn to_decimal(&self, max_digits: usize) -> Decimal {
        let lo = self.lower_mantissa();
        let hi = self.upper_mantissa();
        let (negative, lo, hi) = if !lo.is_negative() {
            (false, lo, hi)
        } else if !hi.is_positive() {
            (true, -hi, -lo)
        } else {
            // interval straddles zero: not even the sign is known
            return Decimal {
                text: "0".to_string(),
                certified_digits: None,
                requested: max_digits,
            };
        };
        let lo = lo.magnitude();
        let hi = hi.magnitude();
        let f = self.frac_bits;
        let int_lo = lo >> f;
        if int_lo != (hi >> f) {
            let mid = self.mantissa.magnitude() >> f;
            return Decimal {
                text: format!("{}{}", if negative { "-" } else { "" }, mid),
                certified_digits: None,
                requested: max_digits,
            };
        }
        let mut digits = String::new();
        let mut lo_frac = lo - (&int_lo << f);
        let mut hi_frac = hi - (&int_lo << f);
        let ten = BigUint::from(10u32);
        for _ in 0..max_digits {
            lo_frac *= &ten;
            hi_frac *= &ten;
            let dl = &lo_frac >> f;
            let dh = &hi_frac >> f;
            if dl != dh {
                break;
            }
            digits.push(char::from(b'0' + dl.to_u8().expect("decimal digit")));
            lo_frac -= &dl << f;
            hi_frac -= &dh << f;
        }
        let mut text = String::new();
        if negative {
            text.push('-');
        }
        text.push_str(&int_lo.to_string());
        if !digits.is_empty() {
            text.push('.');
            text.push_str(&digits);
        }
        Decimal {
            certified_digits: Some(digits.len()),
            text,
            requested: max_digits,
        }
    }
}

/// Output of [`FixedReal::to_decimal`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decimal {
    /// Certified digits only, truncated toward zero.
    pub text: String,
    /// Certified fractional digits; `None` when even the integer part is
    /// uncertain.
    pub certified_digits: Option<usize>,
    pub requested: usize,
}

impl Decimal {
    /// True when fewer digits could be certified than were requested.
    pub fn is_truncated(&self) -> bool {
        self.certified_digits
            .is_none_or(|certified| certified < self.requested)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)?;
        if self.is_truncated() {
            f.write_str("~")?;
        }
        Ok(())
    }
}

impl fmt::Display for FixedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // log10(2) ~ 0.30103
        let digits = (self.frac_bits as usize * 30103) / 100000 + 1;
        let mut dec = self.to_decimal(digits);
        // only complain about digits the precision could have carried
        dec.requested = dec.certified_digits.unwrap_or(0);
        write!(f, "{dec}")
    }
}

impl Add for &FixedReal {
    type Output = FixedReal;

    fn add(self, rhs: &FixedReal) -> FixedReal {
        self.check_same_precision(rhs);
        FixedReal::new(
            &self.mantissa + &rhs.mantissa,
            self.frac_bits,
            &self.err_ulp + &rhs.err_ulp,
        )
    }
}

impl Sub for &FixedReal {
    type Output = FixedReal;

    fn sub(self, rhs: &FixedReal) -> FixedReal {
        self.check_same_precision(rhs);
        FixedReal::new(
            &self.mantissa - &rhs.mantissa,
            self.frac_bits,
            &self.err_ulp + &rhs.err_ulp,
        )
    }
}

impl Neg for &FixedReal {
    type Output = FixedReal;

    fn neg(self) -> FixedReal {
        FixedReal::new(-&self.mantissa, self.frac_bits, self.err_ulp.clone())
    }
}

impl Neg for FixedReal {
    type Output = FixedReal;

    fn neg(self) -> FixedReal {
        FixedReal::new(-self.mantissa, self.frac_bits, self.err_ulp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn from_rational_is_exact_for_dyadics() {
        let x = FixedReal::from_rational(&rat(3, 8), 16);
        assert!(x.is_exact());
        assert_eq!(x.to_rational(), rat(3, 8));

        let third = FixedReal::from_rational(&rat(-1, 3), 16);
        assert_eq!(third.err_ulp(), &BigUint::from(1u32));
        assert!(third.contains(&rat(-1, 3)));
    }

    #[test]
    fn narrowing_rounds_error_up() {
        let x = FixedReal::new(BigInt::from(0b1011_0111), 8, BigUint::from(3u32));
        let y = x.with_frac_bits(4);
        assert_eq!(y.mantissa(), &BigInt::from(0b1011));
        assert_eq!(y.err_ulp(), &BigUint::from(2u32));
        let neg = (-&x).with_frac_bits(4);
        assert_eq!(neg.mantissa(), &BigInt::from(-0b1011));
    }

    #[test]
    fn division_by_uncertain_zero_fails() {
        let one = FixedReal::one(32);
        let fuzzy_zero = FixedReal::new(BigInt::from(2), 32, BigUint::from(2u32));
        assert!(one.div(&fuzzy_zero).is_err());
    }

    #[test]
    fn decimal_stops_at_certified_digit() {
        let x = FixedReal::from_rational(&rat(1, 3), 64);
        let d = x.to_decimal(30);
        assert!(d.text.starts_with("0.333333333333333333"));
        assert!(d.is_truncated());
        assert!(d.to_string().ends_with('~'));

        let exact = FixedReal::from_rational(&rat(-5, 4), 8).to_decimal(2);
        assert_eq!(exact.to_string(), "-1.25");
    }
}
