//! Exact tower-function and part-count arithmetic.
//!
//! The values involved outgrow explicit bignums almost immediately: the
//! part-count recursion k_{i+1} = k_i·2^{k_i+1} already produces a number
//! with ~10^40 binary digits at i = 4. Counters therefore hold either an
//! explicit big integer or the exact symbolic form 2^e + a (with e again
//! a counter and a < 2^e). Every operation used here — shifts, small
//! additions, comparison — is closed over that form and exact: no
//! rounding, no overflow.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest exponent that is materialized explicitly (2^20 bits ≈ 128 KiB).
const EXPLICIT_EXP_CAP: u64 = 1 << 20;

/// Exact nonnegative integer, explicit or in the form 2^exp + add.
#[derive(Debug, Clone, PartialEq, Eq)]
enum HugeNat {
    Explicit(BigUint),
    /// 2^exp + add with exp > EXPLICIT_EXP_CAP (as a value) and add < 2^exp.
    Pow2Plus { exp: Box<HugeNat>, add: BigUint },
}

impl HugeNat {
    fn from_u64(v: u64) -> Self {
        HugeNat::Explicit(BigUint::from(v))
    }

    /// 2^e, materialized when e is small enough.
    fn pow2(e: HugeNat) -> Self {
        if let HugeNat::Explicit(ref x) = e {
            if let Ok(small) = u64::try_from(x.clone()) {
                if small <= EXPLICIT_EXP_CAP {
                    return HugeNat::Explicit(BigUint::one() << small);
                }
            }
        }
        HugeNat::Pow2Plus { exp: Box::new(e), add: BigUint::zero() }
    }

    fn add_small(&self, c: &BigUint) -> Result<Self> {
        match self {
            HugeNat::Explicit(x) => Ok(HugeNat::Explicit(x + c)),
            HugeNat::Pow2Plus { exp, add } => {
                let add = add + c;
                if add.bits() > EXPLICIT_EXP_CAP {
                    return Err(Error::capacity("additive part outgrew the symbolic form"));
                }
                Ok(HugeNat::Pow2Plus { exp: exp.clone(), add })
            }
        }
    }

    /// Exponent sum used by shifts: self + other where at least one side
    /// is explicit.
    fn add(&self, other: &HugeNat) -> Result<Self> {
        match (self, other) {
            (HugeNat::Explicit(a), HugeNat::Explicit(b)) => Ok(HugeNat::Explicit(a + b)),
            (HugeNat::Pow2Plus { .. }, HugeNat::Explicit(b)) => self.add_small(b),
            (HugeNat::Explicit(a), HugeNat::Pow2Plus { .. }) => other.add_small(a),
            _ => Err(Error::capacity("sum of two symbolic counters is not representable")),
        }
    }

    /// log2 when the value is an exact power of two.
    fn log2_exact(&self) -> Option<HugeNat> {
        match self {
            HugeNat::Explicit(x) => {
                if x.is_zero() {
                    return None;
                }
                let bits = x.bits();
                if (x >> (bits - 1)) == BigUint::one() && x.trailing_zeros() == Some(bits - 1) {
                    Some(HugeNat::Explicit(BigUint::from(bits - 1)))
                } else {
                    None
                }
            }
            HugeNat::Pow2Plus { exp, add } => {
                if add.is_zero() {
                    Some((**exp).clone())
                } else {
                    None
                }
            }
        }
    }

    /// self · 2^s; supported whenever self is explicit-small or an exact
    /// power of two (the only cases the recursions produce).
    fn shl(&self, s: &HugeNat) -> Result<Self> {
        if let (HugeNat::Explicit(x), HugeNat::Explicit(sh)) = (self, s) {
            if let Ok(sh) = u64::try_from(sh.clone()) {
                if x.bits() + sh <= EXPLICIT_EXP_CAP {
                    return Ok(HugeNat::Explicit(x << sh));
                }
            }
        }
        match self.log2_exact() {
            Some(t) => Ok(HugeNat::pow2(t.add(s)?)),
            None => Err(Error::capacity(
                "shift of a non-power-of-two beyond the explicit range is not representable",
            )),
        }
    }

    fn cmp_exact(&self, other: &HugeNat) -> Ordering {
        match (self, other) {
            (HugeNat::Explicit(a), HugeNat::Explicit(b)) => a.cmp(b),
            (HugeNat::Pow2Plus { exp, add }, HugeNat::Explicit(b)) => {
                // 2^exp + add vs b: if exp ≥ bits(b) then 2^exp > b.
                let bits = HugeNat::Explicit(BigUint::from(b.bits()));
                match exp.cmp_exact(&bits) {
                    Ordering::Less => {
                        // exp < bits(b) ≤ u64 range: materialize exactly.
                        if let HugeNat::Explicit(e) = &**exp {
                            let e = u64::try_from(e.clone()).expect("exp below bit count");
                            let val = (BigUint::one() << e) + add;
                            val.cmp(b)
                        } else {
                            unreachable!("symbolic exponent below an explicit bit count")
                        }
                    }
                    _ => Ordering::Greater,
                }
            }
            (HugeNat::Explicit(_), HugeNat::Pow2Plus { .. }) => other.cmp_exact(self).reverse(),
            (
                HugeNat::Pow2Plus { exp: e1, add: a1 },
                HugeNat::Pow2Plus { exp: e2, add: a2 },
            ) => match e1.cmp_exact(e2) {
                // add < 2^exp, so a smaller exponent decides outright:
                // 2^e1 + a1 < 2^(e1+1) ≤ 2^e2 ≤ 2^e2 + a2.
                Ordering::Less => Ordering::Less,
                Ordering::Greater => Ordering::Greater,
                Ordering::Equal => a1.cmp(a2),
            },
        }
    }
}

impl fmt::Display for HugeNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HugeNat::Explicit(x) => write!(f, "{x}"),
            HugeNat::Pow2Plus { exp, add } => {
                write!(f, "2^({exp})")?;
                if !add.is_zero() {
                    write!(f, "+{add}")?;
                }
                Ok(())
            }
        }
    }
}

/// Exact nonnegative integer counter for tower values and part counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerCounter(HugeNat);

impl TowerCounter {
    pub fn from_u64(v: u64) -> Self {
        TowerCounter(HugeNat::from_u64(v))
    }

    /// The explicit value, when it is materialized.
    pub fn to_biguint(&self) -> Option<&BigUint> {
        match &self.0 {
            HugeNat::Explicit(x) => Some(x),
            HugeNat::Pow2Plus { .. } => None,
        }
    }

    /// self · 2^k for small k (used for the ×4 comparisons).
    pub fn times_pow2(&self, k: u64) -> Result<TowerCounter> {
        Ok(TowerCounter(self.0.shl(&HugeNat::from_u64(k))?))
    }
}

impl PartialOrd for TowerCounter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TowerCounter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_exact(&other.0)
    }
}

impl fmt::Display for TowerCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Maximum admissible tower height. tower(7) is the largest value the
/// part-count comparisons need.
pub const MAX_TOWER_HEIGHT: u64 = 7;

/// Maximum index of the part-count recursion.
pub const MAX_PARTS_INDEX: u64 = 5;

/// Exact tower of twos: T(1) = 2, T(n) = 2^T(n-1).
pub fn tower(n: u64) -> Result<TowerCounter> {
    if n < 1 || n > MAX_TOWER_HEIGHT {
        return Err(Error::capacity(format!(
            "tower height {n} out of the supported range 1..={MAX_TOWER_HEIGHT}"
        )));
    }
    let mut t = HugeNat::from_u64(2);
    for _ in 1..n {
        t = HugeNat::pow2(t);
    }
    Ok(TowerCounter(t))
}

/// Exact part-count bound: k_0 = 1, k_{i+1} = k_i·2^{k_i + 1}.
pub fn parts_bound(i: u64) -> Result<TowerCounter> {
    if i > MAX_PARTS_INDEX {
        return Err(Error::capacity(format!(
            "part-count index {i} out of the supported range 0..={MAX_PARTS_INDEX}"
        )));
    }
    let mut k = HugeNat::from_u64(1);
    for _ in 0..i {
        let shift = k.add_small(&BigUint::one())?;
        k = k.shl(&shift)?;
    }
    Ok(TowerCounter(k))
}

/// Guaranteed tower-height bound ⌈2 + eps⁻²/16⌉ for the refinement
/// iteration.
pub fn tower_height_upper(eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::input("eps must satisfy 0 < eps < 1"));
    }
    Ok((2.0 + eps.powi(-2) / 16.0).ceil() as u64)
}
