//! Exact counts of accessible mini-batch configurations.
//!
//! With `N` samples, batch size `B`, `n_B = floor(N / B)` batches per epoch and
//! `n_E` epochs:
//!
//! * one epoch without replacement: `sum_{k=0}^{n_B-1} C(N - kB, B)`
//! * whole run without replacement: `n_E` times the one-epoch count
//! * whole run with batched replacement: `n_E * n_B * C(N, B)`
//!
//! All arithmetic is arbitrary precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("binomial C({n}, {k}) requires 0 <= k <= n")]
    InvalidBinomial { n: u64, k: u64 },
    #[error("invalid count parameters: N={dataset_size}, B={batch_size}, epochs={epochs} (need N >= B >= 1, epochs >= 1)")]
    InvalidParams {
        dataset_size: u64,
        batch_size: u64,
        epochs: u64,
    },
    #[error("ratio index k={k} out of range for N={dataset_size}, B={batch_size} (need N - (k+1)B + 1 >= 1)")]
    RatioOutOfRange {
        dataset_size: u64,
        batch_size: u64,
        k: u64,
    },
}

/// Arbitrary-precision nonnegative count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BigCount(BigUint);

impl BigCount {
    pub fn zero() -> Self {
        Self(BigUint::zero())
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn into_biguint(self) -> BigUint {
        self.0
    }

    /// Number of decimal digits (1 for zero).
    pub fn decimal_digits(&self) -> usize {
        self.0.to_str_radix(10).len()
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        Self(BigUint::from(v))
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        Self(v)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Exact `C(n, k)` by the multiplicative formula; every partial product
/// `C(n - k + i, i)` is an integer, so each division is exact.
pub fn binomial(n: u64, k: u64) -> Result<BigCount, CountError> {
    if k > n {
        return Err(CountError::InvalidBinomial { n, k });
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    Ok(BigCount(acc))
}

/// `N`, `B`, `n_E`, with `n_B = floor(N / B)` derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountParams {
    dataset_size: u64,
    batch_size: u64,
    epochs: u64,
}

impl CountParams {
    pub fn new(dataset_size: u64, batch_size: u64, epochs: u64) -> Result<Self, CountError> {
        if batch_size == 0 || batch_size > dataset_size || epochs == 0 {
            return Err(CountError::InvalidParams {
                dataset_size,
                batch_size,
                epochs,
            });
        }
        Ok(Self {
            dataset_size,
            batch_size,
            epochs,
        })
    }

    pub fn dataset_size(&self) -> u64 {
        self.dataset_size
    }

    pub fn batch_size(&self) -> u64 {
        self.batch_size
    }

    pub fn epochs(&self) -> u64 {
        self.epochs
    }

    pub fn batches_per_epoch(&self) -> u64 {
        self.dataset_size / self.batch_size
    }
}

pub fn configs_one_epoch(p: &CountParams) -> BigCount {
    let (n, b) = (p.dataset_size, p.batch_size);
    let sum = (0..p.batches_per_epoch())
        .map(|k| binomial(n - k * b, b).expect("N - kB >= B for k < n_B").0)
        .sum();
    BigCount(sum)
}

pub fn configs_without(p: &CountParams) -> BigCount {
    BigCount(configs_one_epoch(p).0 * p.epochs)
}

pub fn configs_with(p: &CountParams) -> BigCount {
    let per_draw = binomial(p.dataset_size, p.batch_size).expect("B <= N").0;
    BigCount(per_draw * p.epochs * p.batches_per_epoch())
}

/// A nonnegative rational in lowest terms with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactRatio {
    numerator: BigUint,
    denominator: BigUint,
}

impl ExactRatio {
    /// Panics if `denominator` is zero.
    pub fn new(numerator: BigUint, denominator: BigUint) -> Self {
        assert!(!denominator.is_zero(), "zero denominator");
        let g = numerator.gcd(&denominator);
        Self {
            numerator: numerator / &g,
            denominator: denominator / g,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn is_one(&self) -> bool {
        self.numerator == self.denominator
    }

    /// Lossy; saturates to infinity past the `f64` range.
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        match (self.numerator.to_f64(), self.denominator.to_f64()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            _ => {
                // Drop low bits so both operands fit in an f64.
                let shift = self.numerator.bits().max(self.denominator.bits()).saturating_sub(1000);
                let a = (&self.numerator >> shift).to_f64().unwrap_or(f64::INFINITY);
                let b = (&self.denominator >> shift).to_f64().unwrap_or(f64::INFINITY);
                a / b
            }
        }
    }
}

impl PartialOrd for ExactRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.numerator * &other.denominator).cmp(&(&other.numerator * &self.denominator))
    }
}

impl fmt::Display for ExactRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// `C(N, B) / C(N - kB, B)` in lowest terms.
pub fn config_ratio(dataset_size: u64, batch_size: u64, k: u64) -> Result<ExactRatio, CountError> {
    let out_of_range = CountError::RatioOutOfRange {
        dataset_size,
        batch_size,
        k,
    };
    if batch_size == 0 {
        return Err(out_of_range);
    }
    // need N - (k+1)B >= 0
    let needed = k
        .checked_add(1)
        .and_then(|m| m.checked_mul(batch_size))
        .ok_or_else(|| out_of_range.clone())?;
    if needed > dataset_size {
        return Err(out_of_range);
    }
    let top = binomial(dataset_size, batch_size)?.0;
    let bottom = binomial(dataset_size - k * batch_size, batch_size)?.0;
    Ok(ExactRatio::new(top, bottom))
}
