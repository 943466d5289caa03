//! Exact points of `R/Z` of the form `r + bφ` with `r` rational, `b` an
//! integer and `φ` the golden ratio.

use std::cmp::Ordering;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

/// Canonical representative: `0 <= r + bφ < 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CirclePoint {
    pub r: Q,
    pub b: i64,
}

fn sign(q: &Q) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// Sign of `x + y√5`.
fn sign_surd(x: Q, y: Q) -> Result<i32> {
    let (sx, sy) = (sign(&x), sign(&y));
    if sy == 0 || sx == sy {
        return Ok(if sx == 0 { sy } else { sx });
    }
    if sx == 0 {
        return Ok(sy);
    }
    // x² vs 5y², cross-multiplied.
    let lhs = (*x.numer() as i128).checked_mul(*x.numer() as i128);
    let lhs = lhs.and_then(|v| v.checked_mul((*y.denom() as i128).pow(2)));
    let rhs = (*y.numer() as i128).checked_mul(*y.numer() as i128 * 5);
    let rhs = rhs.and_then(|v| v.checked_mul((*x.denom() as i128).pow(2)));
    let (lhs, rhs) = lhs.zip(rhs).ok_or_else(|| Error::invalid("circle arithmetic overflow"))?;
    Ok(match lhs.cmp(&rhs) {
        Ordering::Equal => 0,
        Ordering::Greater => sx,
        Ordering::Less => sy,
    })
}

/// Sign of `r + bφ`.
fn sign_golden(r: Q, b: i64) -> Result<i32> {
    let half = Q::new(b, 2);
    sign_surd(r + half, half)
}

fn approx(r: Q, b: i64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64 + b as f64 * 1.618_033_988_749_895
}

/// `floor(r + bφ)`, exactly.
pub fn floor_golden(r: Q, b: i64) -> Result<i64> {
    let mut f = approx(r, b).floor() as i64;
    while sign_golden(r - f, b)? < 0 {
        f -= 1;
    }
    while sign_golden(r - (f + 1), b)? >= 0 {
        f += 1;
    }
    Ok(f)
}

impl CirclePoint {
    pub fn new(r: Q, b: i64) -> Result<Self> {
        let f = floor_golden(r, b)?;
        Ok(CirclePoint { r: r - f, b })
    }

    pub fn zero() -> Self {
        CirclePoint { r: Q::zero(), b: 0 }
    }

    pub fn add(&self, other: &CirclePoint) -> Result<Self> {
        Self::new(self.r + other.r, self.b + other.b)
    }

    pub fn neg(&self) -> Result<Self> {
        Self::new(-self.r, -self.b)
    }

    /// Compares the representative in `[0, 1)` with a rational.
    pub fn cmp_rational(&self, q: Q) -> Result<Ordering> {
        Ok(sign_golden(self.r - q, self.b)?.cmp(&0))
    }

    /// Membership in the half-open arc from `lo` to `hi`, wrapping through 0
    /// when `lo > hi`. `lo == hi` is the empty arc unless both are 0 and 1.
    pub fn in_arc(&self, lo: Q, hi: Q) -> Result<bool> {
        let above = self.cmp_rational(lo)? != Ordering::Less;
        let below = self.cmp_rational(hi)? == Ordering::Less;
        Ok(if lo <= hi { above && below } else { above || below })
    }

    /// Index of the dyadic cell `[j / 2^k, (j + 1) / 2^k)` holding the point.
    pub fn dyadic_cell(&self, k: u32) -> Result<i64> {
        if k > 40 {
            return Err(Error::ResolutionUnreachable { level: k });
        }
        let scale = 1i64 << k;
        floor_golden(self.r * scale, self.b * scale)
    }

    pub fn to_f64(&self) -> f64 {
        approx(self.r, self.b)
    }
}

/// Last convergent of the continued fraction `[a0; a1, ...]`.
pub fn convergent(cf: &[i64]) -> Result<Q> {
    let (mut p, mut q, mut p0, mut q0) = (1i64, 0i64, 0i64, 1i64);
    for &a in cf {
        let np = a.checked_mul(p).and_then(|v| v.checked_add(p0));
        let nq = a.checked_mul(q).and_then(|v| v.checked_add(q0));
        let (np, nq) = np.zip(nq).ok_or_else(|| Error::invalid("continued fraction overflows"))?;
        (p0, q0, p, q) = (p, q, np, nq);
    }
    if q == 0 {
        return Err(Error::invalid("empty continued fraction"));
    }
    Ok(Q::new(p, q))
}
