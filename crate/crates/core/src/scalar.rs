//! Numeric abstraction shared by distances, scores and simulated costs.
//!
//! Jaccard distances are ratios of small integers, so the pipeline defaults
//! to [`Rational64`] where exactness matters (tie-breaking in clustering,
//! the cost identity in the simulator) and to `f64` elsewhere.

use std::fmt::{Debug, Display};

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// A number usable as a distance, score or simulated duration.
pub trait Scalar:
    Num + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Exact conversion of a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// `num / den`, computed in the scalar type.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    /// Lossy conversion used at reporting boundaries.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses a decimal literal (`12`, `0.01`, `-3.5`). Exact types also
    /// accept `a/b`.
    fn parse_decimal(text: &str) -> Option<Self>;
}

impl Scalar for f32 {
    fn parse_decimal(text: &str) -> Option<Self> {
        text.trim().parse().ok().filter(|v: &f32| v.is_finite())
    }
}

impl Scalar for f64 {
    fn parse_decimal(text: &str) -> Option<Self> {
        text.trim().parse().ok().filter(|v: &f64| v.is_finite())
    }
}

impl Scalar for Rational64 {
    fn parse_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: i64 = num.trim().parse().ok()?;
            let den: i64 = den.trim().parse().ok()?;
            if den == 0 {
                return None;
            }
            return Some(Rational64::new(num, den));
        }
        let (negative, digits) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let scale = 10i64.checked_pow(u32::try_from(frac_part.len()).ok()?)?;
        let int_value: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
        let frac_value: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
        let numer = int_value.checked_mul(scale)?.checked_add(frac_value)?;
        let value = Rational64::new(numer, scale);
        Some(if negative { -value } else { value })
    }
}
