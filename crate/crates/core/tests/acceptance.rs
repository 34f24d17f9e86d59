//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bbp_core::family::{family_coeffs, golden_constant, verify_li1_decomposition, weight};
use bbp_core::formula::{eval_p, golden_preset, log2_preset};
use bbp_core::numerics::{
    fx_atanh, fx_log, fx_sin_cos, fx_sqrt, modpow, BigInt, BigUint, FixedReal, Rational,
};
use bbp_core::spigot::{build_plan, extract_bits};
use bbp_core::verify::{verify_corollary, verify_decomposition, verify_theorem, GUARD_BITS};
use common::{
    atanh_interval_holds, int, log_interval_holds, modpow_brute, oracle_bits, rat, sin_cos_taylor,
    sqrt_interval_holds, within,
};
use num_traits::{One, Pow, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 1000;

type Check = fn(&mut ChaCha8Rng) -> bool;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn ms(d: Duration) -> u128 {
    d.as_millis()
}

fn theorem_identity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [1i64, 2, 3, 5, -1, -2] {
        let r = verify_theorem(&int(t), 500).unwrap();
        let good = r.passed && r.agreement_bits >= 500 && r.elapsed < Duration::from_secs(30);
        ok &= good;
        parts.push(format!("t={t}:{}b/{}ms", r.agreement_bits, ms(r.elapsed)));
    }
    outcome(ok, parts.join(" "))
}

fn corollary_identity() -> Outcome {
    let r = verify_corollary(1000).unwrap();
    let ok = r.passed
        && r.agreement_bits >= 1000
        && r.cross_check == Some(true)
        && r.elapsed < Duration::from_secs(60);
    outcome(
        ok,
        format!("bits={} ms={}", r.agreement_bits, ms(r.elapsed)),
    )
}

fn decomposition() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let limit = Rational::new(BigInt::one(), BigInt::one() << 190u32);
    for t in [1i64, 2, 5, -2] {
        let r = verify_decomposition(&int(t), 200).unwrap();
        let li1 = verify_li1_decomposition(&int(t), 200 + GUARD_BITS).unwrap();
        // the deviation's whole error interval must sit below 2^-190
        let d = &li1.deviation;
        let scale = Rational::from_integer(BigInt::one() << d.frac_bits());
        let upper =
            Rational::from_integer(d.mantissa().abs() + BigInt::from(d.err_ulp().clone())) / scale;
        let good = r.passed && li1.passed && upper < limit;
        ok &= good;
        parts.push(format!("t={t}:{}b", r.agreement_bits));
    }
    outcome(ok, parts.join(" "))
}

#[rustfmt::skip]
const GOLDEN_VECTOR: [i64; 40] = [
    1 << 19, 0, 1 << 18, 1 << 18, 0, 0, -(1 << 16), 1 << 16, 1 << 15, 0,
    -(1 << 14), -(1 << 14), 1 << 13, 0, 0, -(1 << 12), -(1 << 11), 0, -(1 << 10), 0,
    -(1 << 9), 0, -(1 << 8), -(1 << 8), 0, 0, 1 << 6, -(1 << 6), -(1 << 5), 0,
    1 << 4, 1 << 4, -(1 << 3), 0, 0, 1 << 2, 2, 0, 1, 0,
];

fn coefficient_exactness() -> Outcome {
    let inst = family_coeffs(&int(1)).unwrap();
    let coeffs = inst.formula().coeffs();
    let equal = coeffs.len() == 40
        && coeffs
            .iter()
            .zip(GOLDEN_VECTOR)
            .filter(|(a, e)| **a == int(*e))
            .count()
            == 40;

    let mut sweep_ok = true;
    for t in (-50i64..=50).filter(|&t| t != 0) {
        let tt = int(t);
        let inst = family_coeffs(&tt).unwrap();
        for (idx, (a, e)) in inst
            .formula()
            .coeffs()
            .iter()
            .zip(GOLDEN_VECTOR)
            .enumerate()
        {
            let j = idx + 1;
            if (e == 0) != a.is_zero() {
                sweep_ok = false;
                continue;
            }
            if e == 0 {
                continue;
            }
            // 5 a_j^2 = f(j)^2 t^(2(39-j)) 2^(40-j)
            let lhs = Rational::from_integer(a * a * 5);
            let rhs = weight(j as i64).squared()
                * Rational::from_integer(Pow::pow(&tt, 2 * (39 - j) as u32) << (40 - j));
            sweep_ok &= lhs == rhs;
        }
    }
    outcome(
        equal && sweep_ok,
        format!("vector_equal={equal} sweep_0<|t|<=50={sweep_ok}"),
    )
}

fn spigot_correctness() -> Outcome {
    let plan = build_plan(&golden_preset()).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [0u64, 100, 10_000, 100_000] {
        let start = Instant::now();
        let w = extract_bits(&plan, n, 64).unwrap();
        let elapsed = start.elapsed();
        let oracle = golden_constant((n + 512) as u32).unwrap();
        let (bits, oracle_ok) = oracle_bits(&oracle, n, 64);
        let common = w.certified.min(oracle_ok);
        let good = w.certified == 64
            && oracle_ok == 64
            && w.digits[..common] == bits[..common]
            && (n < 100_000 || elapsed < Duration::from_secs(10));
        ok &= good;
        parts.push(format!("n={n}:{}/{}ms", w.certified, ms(elapsed)));
    }

    let beta = plan.beta() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_00ac);
    let mut coherent = 0;
    for _ in 0..100 {
        let n = rng.gen_range(0u64..200_000);
        let a = extract_bits(&plan, n, 48).unwrap();
        let b = extract_bits(&plan, n + beta as u64, 28).unwrap();
        let shared = a.certified.saturating_sub(beta).min(b.certified);
        if shared == 28 && a.digits[beta..beta + 28] == b.digits[..28] {
            coherent += 1;
        }
    }
    ok &= coherent == 100;
    parts.push(format!("coherent={coherent}/100"));
    outcome(ok, parts.join(" "))
}

fn random_rational(rng: &mut ChaCha8Rng, positive: bool) -> Rational {
    let n = rng.gen_range(1i64..1 << 40);
    let n = if positive || rng.gen() { n } else { -n };
    rat(n, rng.gen_range(1i64..1 << 40))
}

/// A fixed-point value whose error interval contains `tau`, centred off it.
fn noisy(rng: &mut ChaCha8Rng, tau: &Rational, f: u32) -> FixedReal {
    let base = FixedReal::from_rational(tau, f);
    let err = rng.gen_range(0u64..1 << 20);
    let shift = rng.gen_range(-(err as i64)..=err as i64);
    FixedReal::new(
        base.mantissa() + BigInt::from(shift),
        f,
        base.err_ulp() + BigUint::from(err + shift.unsigned_abs()),
    )
}

fn numerics_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_00a6);
    let ops: [(&str, Check); 12] = [
        ("add", |rng| {
            let f = rng.gen_range(64..320);
            let (a, b) = (random_rational(rng, false), random_rational(rng, false));
            (&noisy(rng, &a, f) + &noisy(rng, &b, f)).contains(&(&a + &b))
        }),
        ("sub", |rng| {
            let f = rng.gen_range(64..320);
            let (a, b) = (random_rational(rng, false), random_rational(rng, false));
            (&noisy(rng, &a, f) - &noisy(rng, &b, f)).contains(&(&a - &b))
        }),
        ("mul", |rng| {
            let f = rng.gen_range(64..320);
            let (a, b) = (random_rational(rng, false), random_rational(rng, false));
            noisy(rng, &a, f)
                .mul(&noisy(rng, &b, f))
                .contains(&(&a * &b))
        }),
        ("div", |rng| {
            let f = rng.gen_range(64..320);
            let (a, b) = (random_rational(rng, false), random_rational(rng, false));
            let y = FixedReal::from_rational(&b, f);
            if y.lower_mantissa().signum() != y.upper_mantissa().signum() {
                return true;
            }
            noisy(rng, &a, f).div(&y).unwrap().contains(&(&a / &b))
        }),
        ("mul_int", |rng| {
            let f = rng.gen_range(64..320);
            let a = random_rational(rng, false);
            let k = int(rng.gen_range(-(1i64 << 30)..1 << 30));
            noisy(rng, &a, f)
                .mul_int(&k)
                .contains(&(&a * Rational::from_integer(k)))
        }),
        ("div_int", |rng| {
            let f = rng.gen_range(64..320);
            let a = random_rational(rng, false);
            let k = int(rng.gen_range(1i64..1 << 30));
            noisy(rng, &a, f)
                .div_int(&k)
                .unwrap()
                .contains(&(&a / Rational::from_integer(k)))
        }),
        ("mul_rational", |rng| {
            let f = rng.gen_range(64..320);
            let (a, r) = (random_rational(rng, false), random_rational(rng, false));
            noisy(rng, &a, f).mul_rational(&r).contains(&(&a * &r))
        }),
        ("with_frac_bits", |rng| {
            let f = rng.gen_range(64..320);
            let a = random_rational(rng, false);
            noisy(rng, &a, f)
                .with_frac_bits(rng.gen_range(16..400))
                .contains(&a)
        }),
        ("sqrt", |rng| {
            let f = rng.gen_range(64..320);
            let a = random_rational(rng, true);
            let x = noisy(rng, &a, f);
            if x.lower_mantissa() <= BigInt::zero() {
                return true;
            }
            sqrt_interval_holds(&fx_sqrt(&x).unwrap(), &a)
        }),
        ("log", |rng| {
            let f = rng.gen_range(64..200);
            let a = rat(rng.gen_range(1i64..1 << 24), rng.gen_range(1i64..1 << 24));
            log_interval_holds(&fx_log(&FixedReal::from_rational(&a, f)).unwrap(), &a)
        }),
        ("atanh", |rng| {
            let f = rng.gen_range(64..200);
            let a = rat(rng.gen_range(-(1i64 << 30) + 1..1 << 30), 1 << 30);
            atanh_interval_holds(&fx_atanh(&FixedReal::from_rational(&a, f)).unwrap(), &a)
        }),
        ("sin_cos", |rng| {
            let f = rng.gen_range(64..240);
            let a = rat(rng.gen_range(-(1i64 << 24)..1 << 24), 1 << 20);
            let (s, c) = fx_sin_cos(&FixedReal::from_rational(&a, f));
            let (s_ref, c_ref, rem) = sin_cos_taylor(&a);
            within(&s, &s_ref, &rem) && within(&c, &c_ref, &rem)
        }),
    ];
    let mut violations = 0;
    let mut parts = Vec::new();
    for (name, op) in ops {
        let bad = (0..CASES).filter(|_| !op(&mut rng)).count();
        violations += bad;
        if bad > 0 {
            parts.push(format!("{name}:{bad}"));
        }
    }

    let mut modpow_bad = 0;
    for _ in 0..CASES {
        let base = int(rng.gen_range(-(1i64 << 62)..1 << 62));
        let exp = rng.gen_range(0u64..4000);
        let m = int(rng.gen_range(1i64..i64::MAX)) * int(rng.gen_range(1i64..1 << 16));
        if modpow(&base, &BigUint::from(exp), &m).unwrap() != modpow_brute(&base, exp, &m) {
            modpow_bad += 1;
        }
    }
    let ok = violations == 0 && modpow_bad == 0;
    outcome(
        ok,
        format!(
            "ops={} cases_per_op={CASES} violations={violations} modpow_mismatches={modpow_bad}/{CASES} {}",
            ops.len(),
            parts.join(" ")
        )
        .trim_end()
        .to_string(),
    )
}

fn log2_sanity() -> Outcome {
    let f = 250 + GUARD_BITS;
    let oracle = fx_log(&FixedReal::from_integer(2, f))
        .unwrap()
        .mul_int(&int(2));
    let series = eval_p(&log2_preset(), f).unwrap().value;
    let diff = (&oracle - &series).mantissa().magnitude().clone();
    let bound = oracle.err_ulp() + series.err_ulp();
    let eval_bits = f as i64 - diff.max(bound).bits() as i64;

    let plan = build_plan(&log2_preset()).unwrap();
    let mut spigot_bits = 0;
    for n in (0..256u64).step_by(64) {
        let w = extract_bits(&plan, n, 64).unwrap();
        let (bits, ok) = oracle_bits(&oracle, n, 64);
        let common = w.certified.min(ok);
        if w.digits[..common] != bits[..common] || common < 64 {
            spigot_bits += common;
            break;
        }
        spigot_bits += 64;
    }
    outcome(
        eval_bits >= 250 && spigot_bits >= 250,
        format!("eval_bits={eval_bits} spigot_bits={spigot_bits}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("AC1", "theorem identity", theorem_identity),
        ("AC2", "golden-ratio identity", corollary_identity),
        ("AC3", "Li1 decomposition", decomposition),
        ("AC4", "coefficient exactness", coefficient_exactness),
        ("AC5", "spigot correctness", spigot_correctness),
        ("AC6", "numerics soundness", numerics_soundness),
        ("AC7", "log 2 sanity constant", log2_sanity),
    ];
    let mut failures = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let result = run();
        let status = if result.passed { "PASS" } else { "FAIL" };
        if !result.passed {
            failures += 1;
        }
        println!(
            "{id} {status} {name}: {} ({} ms)",
            result.detail,
            ms(start.elapsed())
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
