//! Reference functions the protocols are checked against: permutation
//! equivalence, social surplus, and the surplus-threshold predicate.
//!
//! All arithmetic is exact. Surplus is accumulated in `u128` with checked
//! operations; anything past that range is reported as out of range rather
//! than wrapped.

use itertools::Itertools;
use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::seqcore::{sort_descending, Params, Sequence};

/// Largest `n` for which [`max_surplus_bruteforce`] enumerates `n!` assignments.
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Website-side OSSI input: slot rates plus a threshold `c < n * 2^(2m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OssiInstance {
    rates: Sequence,
    threshold: u128,
}

impl OssiInstance {
    pub fn new(rates: Sequence, threshold: u128) -> Result<Self> {
        let limit = rates.params().surplus_bound();
        if BigUint::from(threshold) >= limit {
            return Err(Error::ThresholdOutOfRange {
                threshold,
                limit: limit.to_string(),
            });
        }
        Ok(Self { rates, threshold })
    }

    pub fn rates(&self) -> &Sequence {
        &self.rates
    }

    pub fn threshold(&self) -> u128 {
        self.threshold
    }

    pub fn params(&self) -> Params {
        self.rates.params()
    }
}

/// A bijection from bidders to slots, stored zero-based: bidder `i` gets
/// slot `mapping[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    mapping: Vec<usize>,
}

impl Assignment {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &slot in &mapping {
            if slot >= n || std::mem::replace(&mut seen[slot], true) {
                return Err(Error::InvalidAssignment { n, mapping });
            }
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }
}

fn same_params(a: &Sequence, b: &Sequence) -> Result<Params> {
    if a.params() != b.params() {
        return Err(Error::InstanceMismatch(format!(
            "{} vs {}",
            a.params(),
            b.params()
        )));
    }
    Ok(a.params())
}

fn overflow(params: Params) -> Error {
    Error::InstanceMismatch(format!("surplus exceeds 128 bits at {params}"))
}

/// Whether the two value multisets coincide.
pub fn is_permutation(x: &Sequence, y: &Sequence) -> Result<bool> {
    same_params(x, y)?;
    Ok(sort_descending(x) == sort_descending(y))
}

/// `Σ values[i] * rates[σ(i)]`.
pub fn surplus(values: &Sequence, rates: &Sequence, sigma: &Assignment) -> Result<u128> {
    let params = same_params(values, rates)?;
    if sigma.len() != params.n() {
        return Err(Error::InstanceMismatch(format!(
            "assignment over {} slots for n = {}",
            sigma.len(),
            params.n()
        )));
    }
    dot(
        values.values().iter().copied(),
        sigma.mapping.iter().map(|&j| rates.values()[j]),
    )
    .ok_or_else(|| overflow(params))
}

fn dot(a: impl Iterator<Item = u64>, b: impl Iterator<Item = u64>) -> Option<u128> {
    a.zip(b)
        .try_fold(0u128, |acc, (x, y)| acc.checked_add(x as u128 * y as u128))
}

/// Optimal surplus: both sides sorted descending, then paired in order.
pub fn max_surplus(values: &Sequence, rates: &Sequence) -> Result<u128> {
    let params = same_params(values, rates)?;
    let v = sort_descending(values);
    let a = sort_descending(rates);
    dot(v.values().iter().copied(), a.values().iter().copied()).ok_or_else(|| overflow(params))
}

/// Optimal surplus by trying all `n!` assignments.
pub fn max_surplus_bruteforce(values: &Sequence, rates: &Sequence) -> Result<u128> {
    let params = same_params(values, rates)?;
    let n = params.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::too_large(
            "brute-force assignment search",
            n,
            BRUTE_FORCE_MAX_N,
        ));
    }
    let mut best = 0u128;
    for perm in (0..n).permutations(n) {
        let sigma = Assignment { mapping: perm };
        best = best.max(surplus(values, rates, &sigma)?);
    }
    Ok(best)
}

/// `f_OSSI`: is the optimal surplus at least the threshold?
pub fn ossi_predicate(bids: &Sequence, inst: &OssiInstance) -> Result<bool> {
    Ok(max_surplus(bids, &inst.rates)? >= inst.threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: u32, n: usize) -> Params {
        Params::new(m, n).unwrap()
    }

    fn seq(params: Params, values: &[u64]) -> Sequence {
        Sequence::new(params, values.to_vec()).unwrap()
    }

    #[test]
    fn permutation_examples() {
        let q = p(2, 3);
        assert!(is_permutation(&seq(q, &[1, 0, 2]), &seq(q, &[2, 1, 0])).unwrap());
        assert!(!is_permutation(&seq(q, &[0, 0, 1]), &seq(q, &[0, 1, 1])).unwrap());
        let x = seq(q, &[3, 3, 1]);
        assert!(is_permutation(&x, &x).unwrap());
        assert!(matches!(
            is_permutation(&x, &seq(p(3, 3), &[3, 3, 1])),
            Err(Error::InstanceMismatch(_))
        ));
    }

    #[test]
    fn surplus_examples() {
        let q = p(3, 2);
        let v = seq(q, &[3, 1]);
        let a = seq(q, &[1, 4]);
        assert_eq!(surplus(&v, &a, &Assignment::identity(2)).unwrap(), 7);
        let swap = Assignment::new(vec![1, 0]).unwrap();
        assert_eq!(surplus(&v, &a, &swap).unwrap(), 13);
        assert_eq!(surplus(&seq(q, &[0, 0]), &a, &swap).unwrap(), 0);
        assert!(Assignment::new(vec![0, 0]).is_err());
        assert!(Assignment::new(vec![0, 2]).is_err());
    }

    #[test]
    fn max_surplus_examples() {
        let q = p(3, 2);
        assert_eq!(max_surplus(&seq(q, &[3, 1]), &seq(q, &[1, 4])).unwrap(), 13);
        assert_eq!(max_surplus(&seq(q, &[2, 2]), &seq(q, &[3, 1])).unwrap(), 8);
        // 2*2 + 1*1
        assert_eq!(max_surplus(&seq(q, &[1, 2]), &seq(q, &[2, 1])).unwrap(), 5);
    }

    #[test]
    fn brute_force_examples() {
        let q = p(3, 2);
        assert_eq!(
            max_surplus_bruteforce(&seq(q, &[3, 1]), &seq(q, &[1, 4])).unwrap(),
            13
        );
        let q = p(3, 3);
        assert_eq!(
            max_surplus_bruteforce(&seq(q, &[5, 0, 0]), &seq(q, &[1, 1, 1])).unwrap(),
            5
        );
        let q = p(1, 9);
        let z = seq(q, &[0; 9]);
        assert!(matches!(
            max_surplus_bruteforce(&z, &z),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn predicate_examples() {
        let q = p(2, 2);
        let bids = seq(q, &[2, 1]);
        let inst = |c| OssiInstance::new(seq(q, &[3, 2]), c).unwrap();
        assert!(ossi_predicate(&bids, &inst(8)).unwrap());
        assert!(!ossi_predicate(&bids, &inst(9)).unwrap());
        let zero = seq(q, &[0, 0]);
        assert!(ossi_predicate(&zero, &OssiInstance::new(zero.clone(), 0).unwrap()).unwrap());
    }

    #[test]
    fn threshold_bound() {
        let q = p(1, 2);
        let rates = seq(q, &[1, 1]);
        assert!(OssiInstance::new(rates.clone(), 7).is_ok());
        assert!(matches!(
            OssiInstance::new(rates, 8),
            Err(Error::ThresholdOutOfRange { .. })
        ));
    }

    #[test]
    fn surplus_overflow_is_an_error() {
        let q = p(64, 2);
        let big = seq(q, &[u64::MAX, u64::MAX]);
        assert!(max_surplus(&big, &big).is_err());
        let q = p(60, 3);
        let big = seq(q, &[q.max_value(); 3]);
        assert!(max_surplus(&big, &big).is_ok());
    }

    #[test]
    fn rearrangement_exhaustive_small() {
        for (m, n) in [(1u32, 1usize), (1, 2), (1, 3), (2, 2), (2, 3), (1, 4)] {
            let q = p(m, n);
            let count = q.sequence_count().unwrap();
            for i in 0..count {
                let x = Sequence::from_index(q, i).unwrap();
                for j in 0..count {
                    let y = Sequence::from_index(q, j).unwrap();
                    assert_eq!(
                        max_surplus(&x, &y).unwrap(),
                        max_surplus_bruteforce(&x, &y).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn cauchy_schwarz_characterizes_permutations() {
        for (m, n) in [(2u32, 2usize), (2, 3)] {
            let q = p(m, n);
            let count = q.sequence_count().unwrap();
            for i in 0..count {
                let x = Sequence::from_index(q, i).unwrap();
                for j in 0..count {
                    let y = Sequence::from_index(q, j).unwrap();
                    let sx: u128 = x.values().iter().map(|&v| (v * v) as u128).sum();
                    let sy: u128 = y.values().iter().map(|&v| (v * v) as u128).sum();
                    let reaches = max_surplus(&x, &y).unwrap() >= sx.max(sy);
                    assert_eq!(reaches, is_permutation(&x, &y).unwrap(), "{x} / {y}");
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pair(max_n: usize) -> impl Strategy<Value = (Sequence, Sequence)> {
            (1u32..=8, 1..=max_n).prop_flat_map(|(m, n)| {
                let hi = 1u64 << m;
                (
                    prop::collection::vec(0..hi, n),
                    prop::collection::vec(0..hi, n),
                )
                    .prop_map(move |(a, b)| {
                        let q = Params::new(m, n).unwrap();
                        (seq(q, &a), seq(q, &b))
                    })
            })
        }

        proptest! {
            #[test]
            fn sorted_dot_is_optimal((x, y) in pair(6)) {
                prop_assert_eq!(max_surplus(&x, &y).unwrap(), max_surplus_bruteforce(&x, &y).unwrap());
            }

            #[test]
            fn permutation_relation_is_symmetric((x, y) in pair(6)) {
                prop_assert_eq!(is_permutation(&x, &y).unwrap(), is_permutation(&y, &x).unwrap());
                prop_assert!(is_permutation(&x, &x).unwrap());
            }

            #[test]
            fn max_surplus_ignores_order((x, y) in pair(6)) {
                let xr = Sequence::new(x.params(), x.values().iter().rev().copied().collect()).unwrap();
                let ys = sort_descending(&y).to_sequence();
                prop_assert_eq!(max_surplus(&xr, &ys).unwrap(), max_surplus(&x, &y).unwrap());
            }

            #[test]
            fn predicate_monotone_in_threshold((x, y) in pair(4), c in 0u128..(4 << 16)) {
                let bound = x.params().n() as u128 * x.params().radix() * x.params().radix();
                let c = c % bound;
                if ossi_predicate(&x, &OssiInstance::new(y.clone(), c).unwrap()).unwrap() {
                    for lower in [0, c / 2, c.saturating_sub(1)] {
                        prop_assert!(ossi_predicate(&x, &OssiInstance::new(y.clone(), lower).unwrap()).unwrap());
                    }
                }
            }
        }
    }
}
