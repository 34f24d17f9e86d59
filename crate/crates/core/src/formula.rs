//! The `P(s, b, l, A)` formula model, its text file format and a
//! full-precision evaluator.
//!
//! A formula denotes `prefactor * sum_{k>=0} b^-k sum_{j=1..l} a_j / (k l + j)^s`.
//! The prefactor is part of the object so that a formula names a constant.
//!
//! File format (UTF-8, one field per line, single spaces):
//!
//! ```text
//! bbp 1
//! s 1
//! b 2
//! l 1
//! pre 1/1
//! A 1
//! label 2 log 2
//! ```
//!
//! The `label` line is optional.

use std::fmt::Write as _;
use std::ops::Range;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::{ceil_div, ceil_shr, shr_trunc, FixedReal};

const FORMAT_TAG: &str = "bbp 1";

/// `sqrt(5) log(phi)` as a base-2^20 formula of length 40.
pub const GOLDEN_PRESET: &str = include_str!("../presets/golden.bbp");
/// `2 log 2 = P(1, 2, 1, (1))`.
pub const LOG2_PRESET: &str = include_str!("../presets/log2.bbp");

pub fn golden_preset() -> BbpFormula {
    parse_formula(GOLDEN_PRESET).expect("embedded golden preset is valid")
}

pub fn log2_preset() -> BbpFormula {
    parse_formula(LOG2_PRESET).expect("embedded log2 preset is valid")
}

/// Looks up a built-in preset by name (`golden` or `log2`).
pub fn preset(name: &str) -> Option<BbpFormula> {
    match name {
        "golden" => Some(golden_preset()),
        "log2" => Some(log2_preset()),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BbpFormula {
    degree: u32,
    base: BigInt,
    length: usize,
    coeffs: Vec<BigInt>,
    prefactor: BigRational,
    label: String,
}

impl BbpFormula {
    /// Validates and builds a formula. `length` must equal `coeffs.len()`.
    pub fn new(
        degree: u32,
        base: BigInt,
        length: usize,
        coeffs: Vec<BigInt>,
        prefactor: BigRational,
        label: impl Into<String>,
    ) -> Result<Self> {
        let label = label.into();
        if degree < 1 {
            return Err(Error::validation("s", "degree must be at least 1"));
        }
        if base < BigInt::from(2) {
            return Err(Error::validation("b", "base must be at least 2"));
        }
        if length < 1 {
            return Err(Error::validation("l", "length must be at least 1"));
        }
        if coeffs.len() != length {
            return Err(Error::validation(
                "A",
                format!("expected {length} coefficients, found {}", coeffs.len()),
            ));
        }
        if coeffs.iter().all(Zero::is_zero) {
            return Err(Error::validation("A", "all coefficients are zero"));
        }
        if prefactor.is_zero() {
            return Err(Error::validation("pre", "prefactor must be nonzero"));
        }
        if label.contains(['\n', '\r']) {
            return Err(Error::validation("label", "label must be a single line"));
        }
        Ok(BbpFormula {
            degree,
            base,
            length,
            coeffs,
            prefactor,
            label,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn base(&self) -> &BigInt {
        &self.base
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// `a_1 ..= a_l`, stored zero-based.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn prefactor(&self) -> &BigRational {
        &self.prefactor
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_prefactor(&self, prefactor: BigRational) -> Result<Self> {
        Self::new(
            self.degree,
            self.base.clone(),
            self.length,
            self.coeffs.clone(),
            prefactor,
            self.label.clone(),
        )
    }

    pub fn with_label(&self, label: impl Into<String>) -> Result<Self> {
        Self::new(
            self.degree,
            self.base.clone(),
            self.length,
            self.coeffs.clone(),
            self.prefactor.clone(),
            label,
        )
    }

    fn max_abs_coeff(&self) -> BigUint {
        self.coeffs
            .iter()
            .map(|a| a.magnitude().clone())
            .max()
            .unwrap_or_default()
    }

    /// Upper bound on `|prefactor| * sum_{k >= terms} b^-k sum_j |a_j| / (k l + j)^s`:
    /// `|pre| * max|a_j| * l / (terms*l + 1)^s * b^-terms * b / (b - 1)`.
    pub fn tail_bound(&self, terms: usize) -> BigRational {
        let b = &self.base;
        let num = BigInt::from(self.max_abs_coeff()) * self.length * b;
        let first = BigInt::from(terms * self.length + 1);
        let den = first.pow(self.degree) * Pow::pow(b, terms) * (b - 1);
        self.prefactor.abs() * BigRational::new(num, den)
    }

    /// Smallest number of outer terms whose tail bound is below `2^-frac_bits`.
    pub fn terms_for_precision(&self, frac_bits: u32) -> usize {
        // |p|/q * maxa * l * b / ((K l + 1)^s b^K (b-1)) < 2^-F
        //   <=>  |p| maxa l b 2^F < q (K l + 1)^s b^K (b-1)
        let b = &self.base;
        let lhs =
            (self.prefactor.numer().abs() * BigInt::from(self.max_abs_coeff()) * self.length * b)
                << frac_bits;
        let fixed = self.prefactor.denom() * (b - 1);
        let mut b_pow = BigInt::one();
        let mut k = 0usize;
        loop {
            let first = BigInt::from(k * self.length + 1);
            if lhs < &fixed * first.pow(self.degree) * &b_pow {
                return k;
            }
            b_pow *= b;
            k += 1;
        }
    }

    /// `sum_{k in range} sum_j trunc(a_j 2^bits / (b^k (k l + j)^s))` and the
    /// number of truncated terms (each off by under one ulp).
    pub(crate) fn scaled_partial_sum(&self, bits: u32, range: Range<usize>) -> (BigInt, u64) {
        let mut sum = BigInt::zero();
        let mut inexact = 0u64;
        let mut b_pow = Pow::pow(&self.base, range.start);
        let scale = BigInt::one() << bits;
        for k in range {
            for (idx, a) in self.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let n = BigInt::from(k * self.length + idx + 1);
                let den = &b_pow * n.pow(self.degree);
                let (q, r) = (a * &scale).div_rem(&den);
                sum += q;
                if !r.is_zero() {
                    inexact += 1;
                }
            }
            b_pow *= &self.base;
        }
        (sum, inexact)
    }
}

/// Result of [`eval_p`]. `tail_bound_ulp` is already part of
/// `value.err_ulp()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalResult {
    pub value: FixedReal,
    pub terms_used: usize,
    pub tail_bound_ulp: BigUint,
}

fn partial_guard(nonzero_terms: usize) -> u32 {
    let bits = usize::BITS - nonzero_terms.leading_zeros();
    bits.max(24) + 8
}

/// `prefactor * sum_{k < terms} ...` to `frac_bits`, without any tail
/// allowance: the error bound covers rounding only.
pub fn eval_p_truncated(f: &BbpFormula, frac_bits: u32, terms: usize) -> FixedReal {
    let nonzero = f.coeffs.iter().filter(|a| !a.is_zero()).count();
    let guard = partial_guard(terms.saturating_mul(nonzero));
    let g = frac_bits + guard;
    let (sum, inexact) = f.scaled_partial_sum(g, 0..terms);

    let p = f.prefactor.numer();
    let q = f.prefactor.denom();
    let (scaled, rem) = (sum * p).div_rem(q);
    let mut err = ceil_div(&(BigUint::from(inexact) * p.magnitude()), q.magnitude());
    if !rem.is_zero() {
        err += 1u32;
    }

    let (m, dropped) = shr_trunc(&scaled, guard);
    let mut err = ceil_shr(&err, guard);
    if dropped {
        err += 1u32;
    }
    FixedReal::new(m, frac_bits, err)
}

/// `prefactor * P(s, b, l, A)` to `frac_bits` (at least 64) with a certified
/// error bound, the outer sum cut where the geometric tail drops below one ulp.
pub fn eval_p(f: &BbpFormula, frac_bits: u32) -> Result<EvalResult> {
    if frac_bits < 64 {
        return Err(Error::invalid("eval_p needs at least 64 fractional bits"));
    }
    let terms = f.terms_for_precision(frac_bits);
    let partial = eval_p_truncated(f, frac_bits, terms);
    let tail = BigUint::one();
    let value = FixedReal::new(
        partial.mantissa().clone(),
        frac_bits,
        partial.err_ulp() + &tail,
    );
    Ok(EvalResult {
        value,
        terms_used: terms,
        tail_bound_ulp: tail,
    })
}

/// Canonical text form; `parse_formula(&emit_formula(f)) == f`.
pub fn emit_formula(f: &BbpFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_TAG}");
    let _ = writeln!(out, "s {}", f.degree);
    let _ = writeln!(out, "b {}", f.base);
    let _ = writeln!(out, "l {}", f.length);
    let _ = writeln!(out, "pre {}/{}", f.prefactor.numer(), f.prefactor.denom());
    out.push('A');
    for a in &f.coeffs {
        let _ = write!(out, " {a}");
    }
    out.push('\n');
    if !f.label.is_empty() {
        let _ = writeln!(out, "label {}", f.label);
    }
    out
}

fn expect_field<'a>(lines: &[&'a str], idx: usize, key: &str) -> Result<&'a str> {
    let line_no = idx + 1;
    let line = lines
        .get(idx)
        .ok_or_else(|| Error::parse(line_no, format!("missing `{key}` line")))?;
    match line.split_once(' ') {
        Some((k, rest)) if k == key => Ok(rest),
        _ => Err(Error::parse(line_no, format!("expected `{key} <value>`"))),
    }
}

fn parse_int<T: FromStr>(text: &str, line: usize, what: &str) -> Result<T> {
    let valid = !text.is_empty()
        && text
            .strip_prefix('-')
            .unwrap_or(text)
            .bytes()
            .all(|c| c.is_ascii_digit())
        && text != "-";
    if !valid {
        return Err(Error::parse(
            line,
            format!("{what}: `{text}` is not an integer"),
        ));
    }
    text.parse()
        .map_err(|_| Error::parse(line, format!("{what}: `{text}` out of range")))
}

pub fn parse_formula(text: &str) -> Result<BbpFormula> {
    let lines: Vec<&str> = text.lines().collect();
    match lines.first() {
        None => return Err(Error::parse(1, "empty formula file")),
        Some(&tag) if tag != FORMAT_TAG => {
            return Err(Error::parse(1, format!("expected `{FORMAT_TAG}` header")))
        }
        _ => {}
    }
    let degree: u32 = parse_int(expect_field(&lines, 1, "s")?, 2, "s")?;
    let base: BigInt = parse_int(expect_field(&lines, 2, "b")?, 3, "b")?;
    let length: usize = parse_int(expect_field(&lines, 3, "l")?, 4, "l")?;

    let pre = expect_field(&lines, 4, "pre")?;
    let (num, den) = pre
        .split_once('/')
        .ok_or_else(|| Error::parse(5, "prefactor must be written `<num>/<den>`"))?;
    let num: BigInt = parse_int(num, 5, "prefactor numerator")?;
    let den: BigInt = parse_int(den, 5, "prefactor denominator")?;
    if !den.is_positive() {
        return Err(Error::validation("pre", "denominator must be positive"));
    }
    if !num.gcd(&den).is_one() {
        return Err(Error::validation(
            "pre",
            "prefactor must be a reduced fraction",
        ));
    }
    let prefactor = BigRational::new_raw(num, den);

    let coeff_text = match lines.get(5) {
        Some(line) if *line == "A" => "",
        _ => expect_field(&lines, 5, "A")?,
    };
    let coeffs = if coeff_text.is_empty() {
        Vec::new()
    } else {
        coeff_text
            .split(' ')
            .map(|s| parse_int::<BigInt>(s, 6, "coefficient"))
            .collect::<Result<Vec<_>>>()?
    };

    let mut label = String::new();
    if lines.len() > 6 {
        label = expect_field(&lines, 6, "label")?.to_string();
    }
    if lines.len() > 7 {
        return Err(Error::parse(8, "unexpected trailing content"));
    }
    BbpFormula::new(degree, base, length, coeffs, prefactor, label)
}
