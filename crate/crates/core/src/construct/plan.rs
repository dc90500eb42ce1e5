//! Full-scale parameter arithmetic, done exactly on rationals and never
//! materialized: the splitting factors grow doubly exponentially and are
//! reported symbolically.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::error::{Error, Result};

/// Exact plan for the full-scale regime at a given ε.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperPlan {
    /// α = 1/alpha_den; alpha_den is a multiple of 6.
    pub alpha_den: BigUint,
    /// Number of steps, α⁻²/36 exactly.
    pub steps: BigUint,
    /// Symbolic description of the splitting factors.
    pub x_description: String,
}

impl fmt::Display for PaperPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alpha=1/{}", self.alpha_den)?;
        writeln!(f, "s={}", self.steps)?;
        writeln!(f, "x: {}", self.x_description)
    }
}

/// The ε threshold of the planning regime: ε must be below 10⁻¹³.
fn regime_limit() -> BigRational {
    BigRational::new(1.into(), BigUint::from(10u32).pow(13).into())
}

/// The scaled threshold 2²⁶·10⁴·ε that α must exceed.
fn alpha_threshold(eps: &BigRational) -> BigRational {
    let big: num_bigint::BigInt = (BigUint::from(1u32) << 26u32).into();
    let factor =
        BigRational::from_integer(big) * BigRational::from_integer(10_000.into());
    factor * eps
}

/// Exact plan: α is the minimum value exceeding 2²⁶·10⁴·ε whose inverse
/// is a multiple of 6, and s = α⁻²/36.
pub fn plan_paper_params(eps: &BigRational) -> Result<PaperPlan> {
    if !eps.is_positive() {
        return Err(Error::input("eps must be positive"));
    }
    if *eps >= regime_limit() {
        return Err(Error::regime(
            "planning assumes eps < 1e-13; larger eps admit a single-part answer",
        ));
    }
    let theta = alpha_threshold(eps);
    // Largest m with 1/(6m) > θ, i.e. 6m < 1/θ.
    let inv = theta.recip() / BigRational::from_integer(6.into());
    let mut m = inv.floor().to_integer().to_biguint().expect("positive");
    if BigRational::from_integer((m.clone() * 6u32).into()) * &theta == BigRational::one() {
        // 1/(6m) would equal θ exactly; step down to keep α > θ strict.
        m -= 1u32;
    }
    if m.is_zero() {
        return Err(Error::regime("eps too large for a positive α grid point"));
    }
    let alpha_den = m.clone() * 6u32;
    let steps = m.clone() * m;
    Ok(PaperPlan {
        alpha_den,
        steps,
        x_description: "x_1 = 2^10, x_(i+1) = 2^(x_i / 16)".into(),
    })
}

/// Parse an exact nonnegative rational from decimal ("0.25"), scientific
/// ("1e-14", "2.5e-15") or fraction ("1/144") notation.
pub fn parse_exact_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: BigUint = num
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("bad numerator '{num}'")))?;
        let d: BigUint = den
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("bad denominator '{den}'")))?;
        if d.is_zero() {
            return Err(Error::input("zero denominator"));
        }
        return Ok(BigRational::new(n.into(), d.into()));
    }
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (
            m,
            e.parse::<i64>()
                .map_err(|_| Error::input(format!("bad exponent '{e}'")))?,
        ),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::input("empty number"));
    }
    let digits = format!("{int_part}{frac_part}");
    let value: BigUint = if digits.is_empty() {
        BigUint::zero()
    } else {
        digits
            .parse()
            .map_err(|_| Error::input(format!("bad decimal '{text}'")))?
    };
    let scale = exp - frac_part.len() as i64;
    let ten = BigUint::from(10u32);
    Ok(if scale >= 0 {
        BigRational::from_integer((value * ten.pow(scale as u32)).into())
    } else {
        BigRational::new(value.into(), ten.pow((-scale) as u32).into())
    })
}
