//! The family of base `2^20 t^40` logarithm formulas.
//!
//! For every nonzero integer `t`
//!
//! ```text
//! sqrt(5) atanh(x(t) sqrt(5)) = 5 / (2^20 t^39) * P(1, 2^20 t^40, 40, A(t)),
//! x(t) = t (1 - t + 2t^2) / (1 - t + 3t^2 - 2t^3 + 4t^4),
//! ```
//!
//! with `a_j = f(j) t^(39-j) sqrt(2^(40-j)) / sqrt(5)` and the period-40
//! weight `f(r) = 4 sin(r pi/5) sin(2 r pi/5) cos(r pi/4)`. At `t = 1` the
//! left side is `3 sqrt(5) log(phi)`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::error::{Error, Result};
use crate::formula::BbpFormula;
use crate::numerics::{fx_atanh, fx_log, fx_pi, fx_sin_cos, fx_sqrt, FixedReal};

/// Length of the family's formulas; also the period of the weight.
pub const PERIOD: usize = 40;

/// Extra working bits used internally by the closed-form evaluations here.
const WORK_GUARD: u32 = 32;

/// Bits of slack the Li1 decomposition check allows below the requested
/// precision.
pub const LI1_GUARD: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightClass {
    Zero,
    /// `sqrt(5)`
    Root5,
    /// `sqrt(5) / sqrt(2)`
    Root5OverRoot2,
}

/// Exact value `sign * class` of the weight `f(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeightValue {
    pub class: WeightClass,
    pub sign: i8,
}

impl WeightValue {
    const ZERO: WeightValue = WeightValue {
        class: WeightClass::Zero,
        sign: 0,
    };

    /// `f(r)^2`, exactly: 0, 5 or 5/2.
    pub fn squared(&self) -> BigRational {
        match self.class {
            WeightClass::Zero => BigRational::zero(),
            WeightClass::Root5 => BigRational::from_integer(5.into()),
            WeightClass::Root5OverRoot2 => BigRational::new(5.into(), 2.into()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.class == WeightClass::Zero
    }
}

/// `4 sin(r pi/5) sin(2 r pi/5)` indexed by `r mod 10`, as a multiple of
/// `sqrt(5)`. Equal to `2 (cos(r pi/5) - cos(3 r pi/5))` and evaluated from
/// `cos(pi/5) = (1 + sqrt5)/4`, `cos(2pi/5) = (sqrt5 - 1)/4`.
const SINE_PAIR_SIGN: [i8; 10] = [0, 1, 1, -1, -1, 0, -1, -1, 1, 1];

/// `cos(r pi/4)` indexed by `r mod 8`: `(sign, is 1/sqrt(2))`.
const COS_QUARTER: [(i8, bool); 8] = [
    (1, false),
    (1, true),
    (0, false),
    (-1, true),
    (-1, false),
    (-1, true),
    (0, false),
    (1, true),
];

/// Exact `f(r)`, table driven on `r mod 10` and `r mod 8` (so period 40).
pub fn weight(r: i64) -> WeightValue {
    let s = SINE_PAIR_SIGN[r.rem_euclid(10) as usize];
    let (c, halved) = COS_QUARTER[r.rem_euclid(8) as usize];
    let sign = s * c;
    if sign == 0 {
        return WeightValue::ZERO;
    }
    let class = if halved {
        WeightClass::Root5OverRoot2
    } else {
        WeightClass::Root5
    };
    WeightValue { class, sign }
}

/// `x(t) = t (1 - t + 2t^2) / (1 - t + 3t^2 - 2t^3 + 4t^4)`, the rational
/// factor in front of `sqrt(5)` inside the inverse hyperbolic tangent.
pub fn lhs_arg(t: &BigInt) -> BigRational {
    let t2 = t * t;
    let t3 = &t2 * t;
    let t4 = &t3 * t;
    let num = t * (BigInt::one() - t + &t2 * 2);
    let den = BigInt::one() - t + &t2 * 3 - &t3 * 2 + &t4 * 4;
    BigRational::new(num, den)
}

/// `a_j` for `j` in `1..=40`: `a_j^2 = f(j)^2 / 5 * t^(2(39-j)) * 2^(40-j)`,
/// with the sign of `f(j)` (`t^(39-j)` carries its own sign).
fn coefficient(j: usize, t: &BigInt) -> Result<BigInt> {
    let w = weight(j as i64);
    if w.is_zero() {
        return Ok(BigInt::zero());
    }
    let t_exp = 39 - j as i64;
    if t_exp < 0 {
        return Err(Error::domain(format!(
            "a_{j} would need a negative power of t"
        )));
    }
    // squared value of the power-of-two part: f^2/5 * 2^(40-j)
    let two_part_sq = w.squared() / BigRational::from_integer(5.into())
        * BigRational::from_integer(BigInt::one() << (40 - j));
    if !two_part_sq.is_integer() {
        return Err(Error::domain(format!("a_{j} is not an integer")));
    }
    let sq = two_part_sq.to_integer();
    let root = sq.sqrt();
    if &root * &root != sq {
        return Err(Error::domain(format!("a_{j} is not an integer")));
    }
    Ok(root * Pow::pow(t, t_exp as u64) * BigInt::from(w.sign))
}

/// One member of the family, fixed by the integer `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyInstance {
    t: BigInt,
    formula: BbpFormula,
    lhs_arg: BigRational,
}

impl FamilyInstance {
    pub fn t(&self) -> &BigInt {
        &self.t
    }

    /// `P(1, 2^20 t^40, 40, A(t))` with prefactor `5 / (2^20 t^39)`.
    pub fn formula(&self) -> &BbpFormula {
        &self.formula
    }

    pub fn lhs_arg(&self) -> &BigRational {
        &self.lhs_arg
    }

    /// The `t = 1` formula rescaled to denote `sqrt(5) log(phi)`:
    /// prefactor `5 / (3 * 2^20)`. Identical to the golden preset.
    pub fn corollary_formula(&self) -> Result<BbpFormula> {
        if !self.t.is_one() {
            return Err(Error::invalid(
                "the sqrt(5) log(phi) normalisation exists only for t = 1",
            ));
        }
        let third = BigRational::new(BigInt::one(), BigInt::from(3));
        self.formula
            .with_prefactor(self.formula.prefactor() * third)?
            .with_label(GOLDEN_LABEL)
    }
}

const GOLDEN_LABEL: &str = "sqrt(5)*log(phi)";

/// Builds the coefficient vector, base and prefactor for `t`.
pub fn family_coeffs(t: &BigInt) -> Result<FamilyInstance> {
    if t.is_zero() {
        return Err(Error::domain("the family is defined for nonzero t only"));
    }
    let coeffs = (1..=PERIOD)
        .map(|j| coefficient(j, t))
        .collect::<Result<Vec<_>>>()?;
    let base = (BigInt::one() << 20u32) * Pow::pow(t, 40u32);
    assert!(base >= BigInt::one() << 20u32);
    let prefactor = BigRational::new(
        BigInt::from(5),
        (BigInt::one() << 20u32) * Pow::pow(t, 39u32),
    );
    let arg = lhs_arg(t);
    // |x sqrt(5)| < 1  <=>  5 x^2 < 1
    if &arg * &arg * BigInt::from(5) >= BigRational::one() {
        return Err(Error::domain(format!(
            "atanh argument for t = {t} is outside (-1, 1)"
        )));
    }
    let formula = BbpFormula::new(1, base, PERIOD, coeffs, prefactor, format!("family t={t}"))?;
    Ok(FamilyInstance {
        t: t.clone(),
        formula,
        lhs_arg: arg,
    })
}

/// `sqrt(5) atanh(x(t) sqrt(5))` to `frac_bits`.
pub fn lhs_value(inst: &FamilyInstance, frac_bits: u32) -> Result<FixedReal> {
    let g = frac_bits + WORK_GUARD;
    let root5 = fx_sqrt(&FixedReal::from_integer(5, g))?;
    let arg = FixedReal::from_rational(&inst.lhs_arg, g).mul(&root5);
    let value = root5.mul(&fx_atanh(&arg)?);
    Ok(value.with_frac_bits(frac_bits))
}

/// `sqrt(5) log((1 + sqrt(5)) / 2)`, computed without any series of the
/// family: square root and logarithm only.
pub fn golden_constant(frac_bits: u32) -> Result<FixedReal> {
    if frac_bits < 64 {
        return Err(Error::invalid(
            "golden_constant needs at least 64 fractional bits",
        ));
    }
    let g = frac_bits + WORK_GUARD;
    let root5 = fx_sqrt(&FixedReal::from_integer(5, g))?;
    let phi = (&root5 + &FixedReal::one(g)).div_int(&BigInt::from(2))?;
    let value = root5.mul(&fx_log(&phi)?);
    Ok(value.with_frac_bits(frac_bits))
}

/// Outcome of [`verify_li1_decomposition`].
#[derive(Clone, Debug)]
pub struct Li1Report {
    pub t: BigInt,
    pub frac_bits: u32,
    /// `Re Li1[q e^(i k pi/20)]` for `k = 1, 7, 9, 17`, `q = 1/(t sqrt 2)`.
    pub terms: [FixedReal; 4],
    /// `atanh(x(t) sqrt(5))`.
    pub closed_form: FixedReal,
    /// `|closed_form - (L1 - L7 + L9 - L17)|`, as computed.
    pub deviation: FixedReal,
    pub passed: bool,
}

impl Li1Report {
    /// `floor(-log2 |deviation|)`, capped by the precision the error bounds
    /// certify.
    pub fn agreement_bits(&self) -> i64 {
        let cap = self.deviation.certified_bits();
        agreement(self.deviation.mantissa().magnitude(), self.frac_bits).min(cap)
    }
}

/// `floor(-log2(d 2^-frac_bits))` for a mantissa difference `d`; zero
/// differences report `frac_bits`.
pub(crate) fn agreement(d: &BigUint, frac_bits: u32) -> i64 {
    if d.is_zero() {
        return frac_bits as i64;
    }
    // ceil(log2 d) = bitlen(d - 1)
    let ceil_log = (d - 1u32).bits() as i64;
    frac_bits as i64 - ceil_log
}

/// Checks `atanh(x(t) sqrt 5) = L1 - L7 + L9 - L17`, where
/// `Lk = Re Li1[q e^(i k pi/20)] = -log(1 - 2 q cos(k pi/20) + q^2) / 2`
/// and `q = 1 / (t sqrt 2)`. Passes when the computed deviation is below
/// `2^-(frac_bits - LI1_GUARD)`.
pub fn verify_li1_decomposition(t: &BigInt, frac_bits: u32) -> Result<Li1Report> {
    if t.is_zero() {
        return Err(Error::domain("q = 1/(t sqrt 2) needs t != 0"));
    }
    let g = frac_bits + WORK_GUARD;
    let root2 = fx_sqrt(&FixedReal::from_integer(2, g))?;
    // 2q = sqrt(2) / t, q^2 = 1 / (2 t^2)
    let two_q = root2.div_int(t)?;
    let q_sq = FixedReal::from_rational(&BigRational::new(BigInt::one(), t * t * 2), g);
    let base = &FixedReal::one(g) + &q_sq;
    let pi_over_20 = fx_pi(g).div_int(&BigInt::from(20))?;

    let re_li1 = |k: i64| -> Result<FixedReal> {
        let (_, cos) = fx_sin_cos(&pi_over_20.mul_int(&BigInt::from(k)));
        let inner = &base - &two_q.mul(&cos);
        let log = fx_log(&inner)?;
        (-log).div_int(&BigInt::from(2))
    };
    let terms_g = [re_li1(1)?, re_li1(7)?, re_li1(9)?, re_li1(17)?];
    let sum = &(&(&terms_g[0] - &terms_g[1]) + &terms_g[2]) - &terms_g[3];

    let root5 = fx_sqrt(&FixedReal::from_integer(5, g))?;
    let arg = FixedReal::from_rational(&lhs_arg(t), g).mul(&root5);
    let closed_g = fx_atanh(&arg)?;

    let deviation = (&closed_g - &sum).abs().with_frac_bits(frac_bits);
    let limit = BigUint::one() << LI1_GUARD;
    let passed = deviation.mantissa().magnitude() < &limit;
    Ok(Li1Report {
        t: t.clone(),
        frac_bits,
        terms: terms_g.map(|x| x.with_frac_bits(frac_bits)),
        closed_form: closed_g.with_frac_bits(frac_bits),
        deviation,
        passed,
    })
}
