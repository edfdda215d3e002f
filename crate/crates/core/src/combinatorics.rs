//! Exact multiset counting and the rank/unrank bijection between multisets
//! of `n` values from `[0, 2^m)` and integers `0..C(2^m + n - 1, n)`.
//!
//! Arrange a multiset non-decreasingly as `s_1 <= ... <= s_n`. Shifting
//! `t_i = s_i + (i - 1)` turns it into a strictly increasing `n`-subset of
//! `[0, 2^m + n - 1)`, which the combinatorial number system ranks as
//! `Σ C(t_i, i)` in colex order. Runs of equal values collapse by the
//! hockey-stick identity, so rank and unrank cost depends on the number of
//! distinct values rather than on `n`.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::seqcore::{sort_descending, Params, Sequence, SortedSequence};

/// Upper bound on how many multisets [`enumerate_multisets`] will materialize.
pub const ENUMERATION_GUARD: u64 = 10_000_000;

/// Arbitrary-precision non-negative count. Values that fit in `u128` are
/// held inline, so the small counts that dominate exhaustive sweeps never
/// allocate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BigCount(Repr);

// Invariant: `Big` only holds values above `u128::MAX`. The derived
// orderings then agree with numeric order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    Small(u128),
    Big(BigUint),
}

impl BigCount {
    pub fn zero() -> Self {
        Self(Repr::Small(0))
    }

    pub fn to_biguint(&self) -> BigUint {
        match &self.0 {
            Repr::Small(v) => BigUint::from(*v),
            Repr::Big(v) => v.clone(),
        }
    }

    pub fn into_biguint(self) -> BigUint {
        match self.0 {
            Repr::Small(v) => BigUint::from(v),
            Repr::Big(v) => v,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.to_u128().and_then(|v| u64::try_from(v).ok())
    }

    pub fn to_u128(&self) -> Option<u128> {
        match self.0 {
            Repr::Small(v) => Some(v),
            Repr::Big(_) => None,
        }
    }

    /// Bit length; `0` for zero.
    pub fn bits(&self) -> u64 {
        match &self.0 {
            Repr::Small(v) => (128 - v.leading_zeros()) as u64,
            Repr::Big(v) => v.bits(),
        }
    }

    /// `log2` of the value, accurate to double precision. `-inf` for zero.
    pub fn log2(&self) -> f64 {
        let bits = self.bits();
        if bits == 0 {
            return f64::NEG_INFINITY;
        }
        if bits <= 64 {
            return (self.to_u64().expect("fits in 64 bits") as f64).log2();
        }
        let shift = bits - 64;
        let top = match &self.0 {
            Repr::Small(v) => (v >> shift) as u64,
            Repr::Big(v) => (v >> shift).to_u64().expect("top 64 bits"),
        };
        (top as f64).log2() + shift as f64
    }

    /// `ceil(log2(self))`, i.e. the bits needed to index `self` distinct
    /// values. Zero for counts 0 and 1.
    pub fn ceil_log2(&self) -> u64 {
        match &self.0 {
            Repr::Small(v) if *v <= 1 => 0,
            Repr::Small(v) => (128 - (v - 1).leading_zeros()) as u64,
            Repr::Big(v) => (v - BigUint::one()).bits(),
        }
    }
}

impl Default for BigCount {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        Self(Repr::Small(v as u128))
    }
}

impl From<u128> for BigCount {
    fn from(v: u128) -> Self {
        Self(Repr::Small(v))
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        match v.to_u128() {
            Some(small) => Self(Repr::Small(small)),
            None => Self(Repr::Big(v)),
        }
    }
}

impl PartialEq<u64> for BigCount {
    fn eq(&self, other: &u64) -> bool {
        self.0 == Repr::Small(*other as u128)
    }
}

impl PartialOrd<u64> for BigCount {
    fn partial_cmp(&self, other: &u64) -> Option<std::cmp::Ordering> {
        Some(self.0.cmp(&Repr::Small(*other as u128)))
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => v.fmt(f),
            Repr::Big(v) => v.fmt(f),
        }
    }
}

/// `C(a, b)`, zero when `b > a`.
///
/// Uses the multiplicative formula; every intermediate product divides
/// exactly because after step `i` the accumulator is `C(a - k + i, i)`.
pub fn binomial(a: u128, b: u128) -> BigCount {
    match binom_checked(a, b) {
        Some(v) => BigCount::from(v),
        None => BigCount::from(binom::<BigUint>(a, b)),
    }
}

fn binom_checked(a: u128, b: u128) -> Option<u128> {
    if b > a {
        return Some(0);
    }
    let k = b.min(a - b);
    if k <= 1 {
        return Some(if k == 0 { 1 } else { a });
    }
    let mut acc = 1u128;
    for i in 1..=k {
        acc = acc.checked_mul(a - k + i)? / i;
    }
    Some(acc)
}

/// Number of multisets of size `n` over `2^m` values, `C(2^m + n - 1, n)`.
pub fn multiset_count(p: Params) -> BigCount {
    binomial(p.radix() + p.n() as u128 - 1, p.n() as u128)
}

/// Fixed message width of the rank: `ceil(log2 C)`, at least one bit.
pub fn rank_bit_width(p: Params) -> usize {
    multiset_count(p).ceil_log2().max(1) as usize
}

/// A multiset of `n` values, stored as ascending `(value, multiplicity)`
/// runs. Its canonical arrangement is the non-decreasing one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multiset {
    params: Params,
    runs: Vec<(u64, usize)>,
}

impl Multiset {
    pub fn of(s: &Sequence) -> Self {
        let mut values = s.values().to_vec();
        values.sort_unstable();
        Self::from_sorted(s.params(), &values)
    }

    fn from_sorted(params: Params, values: &[u64]) -> Self {
        let mut runs: Vec<(u64, usize)> = Vec::new();
        for &v in values {
            match runs.last_mut() {
                Some((last, count)) if *last == v => *count += 1,
                _ => runs.push((v, 1)),
            }
        }
        Self { params, runs }
    }

    pub fn params(&self) -> Params {
        self.params
    }

    /// Ascending distinct values with their multiplicities.
    pub fn runs(&self) -> &[(u64, usize)] {
        &self.runs
    }

    /// Values in non-decreasing order.
    pub fn values(&self) -> Vec<u64> {
        self.runs
            .iter()
            .flat_map(|&(v, c)| std::iter::repeat_n(v, c))
            .collect()
    }

    pub fn to_sequence(&self) -> Sequence {
        Sequence::new(self.params, self.values()).expect("multiset values are in range")
    }

    pub fn to_descending(&self) -> SortedSequence {
        sort_descending(&self.to_sequence())
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Rank of a sequence's value multiset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultisetRank {
    params: Params,
    rank: BigCount,
}

impl MultisetRank {
    pub fn new(params: Params, rank: BigCount) -> Result<Self> {
        let count = multiset_count(params);
        if rank >= count {
            return Err(Error::InvalidRank {
                rank: rank.to_string(),
                count: count.to_string(),
            });
        }
        Ok(Self { params, rank })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn rank(&self) -> &BigCount {
        &self.rank
    }
}

/// Exact unsigned arithmetic the rank/unrank routines run on. The narrowest
/// type whose range covers every intermediate is picked per call.
trait Wide:
    Clone
    + Ord
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn lift(x: u128) -> Self;
    fn into_count(self) -> BigCount;
}

impl Wide for u64 {
    fn lift(x: u128) -> Self {
        debug_assert!(x <= u64::MAX as u128);
        x as u64
    }

    fn into_count(self) -> BigCount {
        BigCount::from(self)
    }
}

impl Wide for u128 {
    fn lift(x: u128) -> Self {
        x
    }

    fn into_count(self) -> BigCount {
        BigCount::from(self)
    }
}

impl Wide for BigUint {
    fn lift(x: u128) -> Self {
        BigUint::from(x)
    }

    fn into_count(self) -> BigCount {
        BigCount::from(self)
    }
}

fn binom<T: Wide>(a: u128, b: u128) -> T {
    if b > a {
        return T::zero();
    }
    let k = b.min(a - b);
    match k {
        0 => T::one(),
        1 => T::lift(a),
        _ => {
            let mut acc = T::one();
            for i in 1..=k {
                acc = acc * T::lift(a - k + i) / T::lift(i);
            }
            acc
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tier {
    U64,
    U128,
    Big,
}

/// Every binomial the rank routines evaluate is at most the multiset count,
/// each multiplicative step at most `n` times that, and running rank sums
/// at most twice that.
fn tier(p: Params, count: &BigCount) -> Tier {
    let headroom = p.n().max(2) as u128;
    match count.to_u128() {
        Some(c)
            if c.checked_mul(headroom)
                .is_some_and(|x| x <= u64::MAX as u128) =>
        {
            Tier::U64
        }
        Some(c) if c <= u64::MAX as u128 => Tier::U128,
        _ => Tier::Big,
    }
}

fn rank_runs<T: Wide>(runs: &[(u64, usize)]) -> T {
    // Positions a+1..=b holding value s contribute
    // Σ C(s - 1 + i, i) = C(s + b, b) - C(s + a, a).
    let mut rank = T::zero();
    let mut a = 0u128;
    for &(s, count) in runs {
        let b = a + count as u128;
        let s = s as u128;
        rank = rank + binom::<T>(s + b, b) - binom::<T>(s + a, a);
        a = b;
    }
    rank
}

fn unrank_runs<T: Wide>(params: Params, rank: T) -> Vec<(u64, usize)> {
    let mut rest = rank;
    let mut runs = Vec::new();
    let mut i = params.n() as u128;
    let mut s_hi = params.max_value() as u128;
    while i > 0 {
        // Largest value s with C(s + i - 1, i) <= rest.
        let (mut lo, mut hi) = (0u128, s_hi);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if binom::<T>(mid + i - 1, i) <= rest {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let s = lo;
        if s == 0 {
            // Nothing is smaller than zero: the remaining prefix is all zeros.
            runs.push((0, i as usize));
            break;
        }
        // Longest run of s ending at position i: smallest a with
        // C(s + i, i) - C(s + a, a) <= rest.
        let top = binom::<T>(s + i, i);
        let (mut lo, mut hi) = (0u128, i - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if top.clone() - binom::<T>(s + mid, mid) <= rest {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let a = lo;
        rest = rest - (top - binom::<T>(s + a, a));
        runs.push((s as u64, (i - a) as usize));
        i = a;
        s_hi = s.saturating_sub(1);
    }
    debug_assert!(rest.is_zero());
    runs.reverse();
    runs
}

/// Colex rank of the multiset of `s`. Permutations of `s` share a rank.
pub fn multiset_rank(s: &Sequence) -> MultisetRank {
    rank_of(&Multiset::of(s))
}

/// Colex rank of a multiset.
pub fn rank_of(ms: &Multiset) -> MultisetRank {
    let count = multiset_count(ms.params);
    let rank = match tier(ms.params, &count) {
        Tier::U64 => rank_runs::<u64>(&ms.runs).into_count(),
        Tier::U128 => rank_runs::<u128>(&ms.runs).into_count(),
        Tier::Big => rank_runs::<BigUint>(&ms.runs).into_count(),
    };
    MultisetRank {
        params: ms.params,
        rank,
    }
}

/// Inverse of [`multiset_rank`] on canonical representatives.
pub fn multiset_unrank(params: Params, rank: &BigCount) -> Result<Multiset> {
    let count = multiset_count(params);
    if rank >= &count {
        return Err(Error::InvalidRank {
            rank: rank.to_string(),
            count: count.to_string(),
        });
    }
    let small = || rank.to_u128().expect("rank below a 64-bit count");
    let runs = match tier(params, &count) {
        Tier::U64 => unrank_runs::<u64>(params, u64::lift(small())),
        Tier::U128 => unrank_runs::<u128>(params, small()),
        Tier::Big => unrank_runs::<BigUint>(params, rank.to_biguint()),
    };
    Ok(Multiset { params, runs })
}

/// Every multiset in colex rank order: element `i` has rank `i`.
pub fn enumerate_multisets(p: Params) -> Result<Vec<Multiset>> {
    let count = multiset_count(p);
    let count = match count.to_u64() {
        Some(c) if c <= ENUMERATION_GUARD => c as usize,
        _ => {
            return Err(Error::too_large(
                "multiset enumeration",
                count,
                ENUMERATION_GUARD,
            ))
        }
    };
    let n = p.n();
    let top = p.max_value();
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![0u64; n];
    loop {
        out.push(Multiset::from_sorted(p, &cur));
        // Colex successor: bump the first position that can grow while
        // staying <= its right neighbour, then reset everything before it.
        let Some(j) = (0..n).find(|&j| {
            let next = if j + 1 < n { cur[j + 1] } else { top };
            cur[j] < next
        }) else {
            break;
        };
        cur[j] += 1;
        cur[..j].fill(0);
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}
