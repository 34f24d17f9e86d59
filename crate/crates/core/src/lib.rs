//! Engine for BBP-type formulas
//! `P(s, b, l, A) = sum_k b^-k sum_j a_j / (k l + j)^s`.
//!
//! The crate is layered bottom-up:
//!
//! - [`numerics`]: exact integers and rationals plus [`FixedReal`], a
//!   fixed-point real that carries a certified absolute error bound.
//! - [`formula`]: the [`BbpFormula`] data model, its text file format and a
//!   full-precision evaluator with a rigorous truncation bound.
//! - [`family`]: the 40-term family of logarithm formulas indexed by a
//!   nonzero integer `t`, and the `sqrt(5) log(phi)` special case.
//! - [`spigot`]: binary / hexadecimal digit extraction at arbitrary positions
//!   for degree-1 formulas with a power-of-two base.
//! - [`verify`]: identity checks that compare each formula against an
//!   independently computed closed form.

pub mod error;
pub mod family;
pub mod formula;
pub mod numerics;
pub mod spigot;
pub mod verify;

pub use error::{Error, Result};
pub use family::{FamilyInstance, WeightClass, WeightValue};
pub use formula::{BbpFormula, EvalResult};
pub use numerics::FixedReal;
pub use spigot::{DigitWindow, Radix, SpigotPlan};
pub use verify::VerificationReport;
