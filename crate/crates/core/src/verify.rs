//! Identity checks. Each compares two independently computed sides at
//! `target + GUARD_BITS` working bits and reports how many fractional bits
//! agree.
//!
//! Report lines have the form
//! `REPORT <subject> passed=<true|false> bits=<int> ms=<int>`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::error::{Error, Result};
use crate::family::{
    agreement, family_coeffs, golden_constant, lhs_value, verify_li1_decomposition,
};
use crate::formula::{eval_p, golden_preset};
use crate::numerics::FixedReal;
use crate::spigot::{build_plan, extract_bits_with_threads};

/// Working bits added on top of every requested target.
pub const GUARD_BITS: u32 = 88;

#[derive(Clone, Debug)]
pub struct VerificationReport {
    /// Single token, no spaces.
    pub subject: String,
    pub lhs: FixedReal,
    pub rhs: FixedReal,
    pub agreement_bits: i64,
    pub threshold: i64,
    /// Result of any secondary consistency check folded into `passed`.
    pub cross_check: Option<bool>,
    pub passed: bool,
    pub elapsed: Duration,
}

impl VerificationReport {
    fn compare(
        subject: String,
        lhs: FixedReal,
        rhs: FixedReal,
        threshold: u32,
        start: Instant,
    ) -> Self {
        let f = lhs.frac_bits();
        let diff = (&lhs - &rhs).mantissa().magnitude().clone();
        let cap = f as i64 - (lhs.err_ulp() + rhs.err_ulp()).bits() as i64;
        let agreement_bits = agreement(&diff, f).min(cap);
        let threshold = threshold as i64;
        VerificationReport {
            subject,
            lhs,
            rhs,
            agreement_bits,
            threshold,
            cross_check: None,
            passed: agreement_bits >= threshold,
            elapsed: start.elapsed(),
        }
    }

    fn with_cross_check(mut self, ok: bool, start: Instant) -> Self {
        self.cross_check = Some(ok);
        self.passed = self.passed && ok;
        self.elapsed = start.elapsed();
        self
    }

    /// The report line without the timing field; stable across runs.
    pub fn summary(&self) -> String {
        format!(
            "REPORT {} passed={} bits={}",
            self.subject, self.passed, self.agreement_bits
        )
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ms={}", self.summary(), self.elapsed.as_millis())
    }
}

/// A report line read back from text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportLine {
    pub subject: String,
    pub passed: bool,
    pub bits: i64,
    pub ms: u64,
}

impl FromStr for ReportLine {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        parse_report_line(line)
    }
}

fn parse_report_line<'a>(line: &'a str) -> Result<ReportLine> {
    let bad = || Error::parse(1, format!("malformed report line `{line}`"));
    let fields: Vec<&str> = line.split(' ').collect();
    let [tag, subject, passed, bits, ms] = fields[..] else {
        return Err(bad());
    };
    if tag != "REPORT" {
        return Err(bad());
    }
    let value =
        |field: &'a str, key: &str| -> Result<&'a str> { field.strip_prefix(key).ok_or_else(bad) };
    Ok(ReportLine {
        subject: subject.to_string(),
        passed: value(passed, "passed=")?.parse().map_err(|_| bad())?,
        bits: value(bits, "bits=")?.parse().map_err(|_| bad())?,
        ms: value(ms, "ms=")?.parse().map_err(|_| bad())?,
    })
}

/// `sqrt(5) atanh(x(t) sqrt 5)` against `eval_p` of the family formula.
pub fn verify_theorem(t: &BigInt, target_bits: u32) -> Result<VerificationReport> {
    let start = Instant::now();
    let f = target_bits + GUARD_BITS;
    let inst = family_coeffs(t)?;
    let lhs = lhs_value(&inst, f)?;
    let rhs = eval_p(inst.formula(), f)?.value;
    Ok(VerificationReport::compare(
        format!("theorem[t={t}]"),
        lhs,
        rhs,
        target_bits,
        start,
    ))
}

/// `sqrt(5) log(phi)` from square root and logarithm against the golden
/// preset's series; the first 64 extracted bits must also match both.
pub fn verify_corollary(target_bits: u32) -> Result<VerificationReport> {
    let start = Instant::now();
    let f = target_bits + GUARD_BITS;
    let formula = golden_preset();
    let oracle = golden_constant(f)?;
    let series = eval_p(&formula, f)?.value;

    let window = extract_bits_with_threads(&build_plan(&formula)?, 0, 64, 1)?;
    let consistent = [&oracle, &series].iter().all(|x| {
        let (bits, certified) = certified_fraction_bits(x, 0, 64);
        let common = certified.min(window.certified);
        bits[..common] == window.digits[..common]
    });
    Ok(
        VerificationReport::compare("corollary".to_string(), oracle, series, target_bits, start)
            .with_cross_check(consistent, start),
    )
}

/// The four-term `Re Li1` decomposition of `atanh(x(t) sqrt 5)`.
pub fn verify_decomposition(t: &BigInt, target_bits: u32) -> Result<VerificationReport> {
    let start = Instant::now();
    let f = target_bits + GUARD_BITS;
    let li1 = verify_li1_decomposition(t, f)?;
    let [l1, l7, l9, l17] = &li1.terms;
    let sum = &(&(l1 - l7) + l9) - l17;
    let passed = li1.passed;
    Ok(VerificationReport::compare(
        format!("decomposition[t={t}]"),
        li1.closed_form,
        sum,
        target_bits,
        start,
    )
    .with_cross_check(passed, start))
}

/// Bits `n+1 ..= n+count` of `frac(x)` read off a fixed-point value, with
/// the number of leading bits its error interval certifies. Needs
/// `x.frac_bits() >= n + count`.
pub fn certified_fraction_bits(x: &FixedReal, n: u64, count: usize) -> (String, usize) {
    let f = x.frac_bits() as u64;
    assert!(
        f >= n + count as u64,
        "not enough fractional bits for the window"
    );
    let window = |m: &BigInt, c: usize| -> BigInt {
        let shifted = m >> (f - n - c as u64) as usize;
        shifted.mod_floor(&(BigInt::one() << c))
    };
    let digits = {
        let v = window(x.mantissa(), count);
        format!("{:0>count$}", v.to_str_radix(2))
    };
    let lo = x.lower_mantissa();
    let hi = x.upper_mantissa();
    let certified = (0..=count)
        .rev()
        .find(|&c| {
            let drop = (f - n - c as u64) as usize;
            (&lo >> drop) == (&hi >> drop)
        })
        .unwrap_or(0);
    (digits, certified)
}
