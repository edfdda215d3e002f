//! Fooling sets and the lower/upper bound sandwich for OSSI.
//!
//! A fooling set of size `k` for `f` forces every deterministic protocol
//! computing `f` to produce `k` distinct transcripts, hence to send at least
//! `log2 k` bits on some input. [`transcript_distinctness`] checks that
//! consequence directly on a protocol.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{enumerate_multisets, multiset_count, rank_bit_width, BigCount};
use crate::engine::{run, worst_case_bits_over, InputDomain, PartyInput, Protocol};
use crate::error::{Error, Result};
use crate::oracles::OssiInstance;
use crate::protocols::{canonical_ossi, sum_sq_width};
use crate::seqcore::{Params, Sequence, Transcript};

/// Largest multiset count [`build_pp_fooling_set`] will materialize.
pub const BUILD_GUARD: u64 = 1_000_000;
/// Largest fooling set [`verify_fooling_set`] will check pairwise.
pub const VERIFY_GUARD: usize = 10_000;
/// Largest number of input pairs [`ossi_bound_report`] will run to measure
/// the upper bound; beyond it the fixed message width is reported.
pub const MEASURE_GUARD: u128 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoolingSet {
    pairs: Vec<(Sequence, Sequence)>,
    target_bit: bool,
    verified: bool,
}

impl FoolingSet {
    pub fn new(pairs: Vec<(Sequence, Sequence)>, target_bit: bool) -> Result<Self> {
        let mut seen: HashMap<&(Sequence, Sequence), usize> = HashMap::new();
        for (i, pair) in pairs.iter().enumerate() {
            if let Some(&first) = seen.get(pair) {
                return Err(Error::DuplicatePair { first, second: i });
            }
            seen.insert(pair, i);
        }
        Ok(Self {
            pairs,
            target_bit,
            verified: false,
        })
    }

    pub fn pairs(&self) -> &[(Sequence, Sequence)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn target_bit(&self) -> bool {
        self.target_bit
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }
}

/// The diagonal `{(γ, γ)}` over all non-decreasing sequences, target 1.
pub fn build_pp_fooling_set(p: Params) -> Result<FoolingSet> {
    let count = multiset_count(p);
    if count > BUILD_GUARD {
        return Err(Error::too_large("PP fooling set", count, BUILD_GUARD));
    }
    let pairs = enumerate_multisets(p)?
        .into_iter()
        .map(|ms| {
            let s = ms.to_sequence();
            (s.clone(), s)
        })
        .collect();
    FoolingSet::new(pairs, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoolingViolation {
    /// `f(x_i, y_i)` differs from the target bit.
    Diagonal { index: usize },
    /// Both `f(x_i, y_j)` and `f(x_j, y_i)` equal the target bit.
    Crossed { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoolingReport {
    pub size: usize,
    pub passed: bool,
    pub counterexample: Option<FoolingViolation>,
}

/// Checks both fooling-set conditions against `f`; on success the set is
/// marked verified.
pub fn verify_fooling_set<F>(fs: &mut FoolingSet, f: F) -> Result<FoolingReport>
where
    F: Fn(&Sequence, &Sequence) -> Result<bool> + Sync,
{
    let k = fs.pairs.len();
    if k > VERIFY_GUARD {
        return Err(Error::too_large(
            "fooling set verification",
            k,
            VERIFY_GUARD,
        ));
    }
    let b = fs.target_bit;
    let pairs = &fs.pairs;
    let diagonal = (0..k)
        .into_par_iter()
        .map(|i| {
            let (x, y) = &pairs[i];
            Ok((f(x, y)? != b).then_some(FoolingViolation::Diagonal { index: i }))
        })
        .find_first(|r: &Result<Option<FoolingViolation>>| !matches!(r, Ok(None)));
    let counterexample = match diagonal {
        Some(r) => r?,
        None => (0..k)
            .into_par_iter()
            .map(|i| {
                let (xi, yi) = &pairs[i];
                for (j, (xj, yj)) in pairs.iter().enumerate().skip(i + 1) {
                    if f(xi, yj)? == b && f(xj, yi)? == b {
                        return Ok(Some(FoolingViolation::Crossed { i, j }));
                    }
                }
                Ok(None)
            })
            .find_first(|r: &Result<Option<FoolingViolation>>| !matches!(r, Ok(None)))
            .transpose()?
            .flatten(),
    };
    let passed = counterexample.is_none();
    fs.verified = passed;
    Ok(FoolingReport {
        size: k,
        passed,
        counterexample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    /// `log2 k`.
    pub bits: f64,
    /// `ceil(log2 k)`.
    pub ceil_bits: u64,
}

/// `log2 |fs|` for a verified fooling set. Sets of size 0 or 1 give 0.
pub fn lower_bound_bits(fs: &FoolingSet) -> Result<LowerBound> {
    if !fs.verified {
        return Err(Error::MustVerifyFirst);
    }
    let k = BigCount::from(fs.pairs.len() as u64);
    Ok(LowerBound {
        bits: k.log2().max(0.0),
        ceil_bits: k.ceil_log2(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub params: Params,
    pub multiset_cnt: BigCount,
    /// `log2 C(2^m + n - 1, n)`.
    pub lower_bound_bits: f64,
    /// Lower bound minus the reduction overhead, clamped at zero.
    pub adjusted_lower_bound_bits: f64,
    pub upper_bound_bits: u64,
    /// Whether `upper_bound_bits` was measured by running the canonical
    /// OSSI protocol rather than read off its message width.
    pub upper_measured: bool,
    /// Exact width of the reduction's sum-of-squares message.
    pub sum_sq_width: u64,
    /// `2 m log2 n`, the overhead term of the loose accounting.
    pub paper_overhead_term: f64,
}

pub const CSV_HEADER: &str =
    "m,n,multiset_count,lower_bits,adjusted_lower_bits,upper_bits,sum_sq_width,paper_overhead_term";

#[derive(Serialize)]
struct BoundRow {
    m: u32,
    n: usize,
    multiset_count: String,
    lower_bits: f64,
    adjusted_lower_bits: f64,
    upper_bits: u64,
    sum_sq_width: u64,
    paper_overhead_term: f64,
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

impl BoundReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{},{},{:.6}",
            self.params.m(),
            self.params.n(),
            self.multiset_cnt,
            self.lower_bound_bits,
            self.adjusted_lower_bound_bits,
            self.upper_bound_bits,
            self.sum_sq_width,
            self.paper_overhead_term
        )
    }

    /// JSON object keyed like the CSV columns. The count is a decimal string
    /// since it routinely exceeds 64 bits; floats carry six decimals.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(BoundRow {
            m: self.params.m(),
            n: self.params.n(),
            multiset_count: self.multiset_cnt.to_string(),
            lower_bits: round6(self.lower_bound_bits),
            adjusted_lower_bits: round6(self.adjusted_lower_bound_bits),
            upper_bits: self.upper_bound_bits,
            sum_sq_width: self.sum_sq_width,
            paper_overhead_term: round6(self.paper_overhead_term),
        })
        .expect("plain struct serializes")
    }

    /// `upper >= ceil(lower) - ceil(overhead)`.
    pub fn is_consistent(&self) -> bool {
        let lower = self.lower_bound_bits.ceil() as i128;
        let overhead = self.paper_overhead_term.ceil() as i128;
        self.upper_bound_bits as i128 >= lower - overhead
    }
}

fn measurement_domain(p: Params) -> Result<Option<InputDomain>> {
    let Some(count) = p.sequence_count() else {
        return Ok(None);
    };
    if count.saturating_mul(count) > MEASURE_GUARD {
        return Ok(None);
    }
    let mut pairs = Vec::with_capacity((count * count) as usize);
    for i in 0..count {
        let rates = Sequence::from_index(p, i)?;
        let inst = PartyInput::Ossi(OssiInstance::new(rates, 0)?);
        for j in 0..count {
            pairs.push((
                inst.clone(),
                PartyInput::Sequence(Sequence::from_index(p, j)?),
            ));
        }
    }
    Ok(Some(InputDomain::Explicit(pairs)))
}

pub fn ossi_bound_report(p: Params) -> Result<BoundReport> {
    let count = multiset_count(p);
    let lower = count.log2();
    let overhead = 2.0 * p.m() as f64 * (p.n() as f64).log2();
    let (upper, measured) = match measurement_domain(p)? {
        Some(domain) => (
            worst_case_bits_over(&canonical_ossi(p), &domain)? as u64,
            true,
        ),
        None => (rank_bit_width(p) as u64, false),
    };
    Ok(BoundReport {
        params: p,
        multiset_cnt: count,
        lower_bound_bits: lower,
        adjusted_lower_bound_bits: (lower - overhead).max(0.0),
        upper_bound_bits: upper,
        upper_measured: measured,
        sum_sq_width: sum_sq_width(p) as u64,
        paper_overhead_term: overhead,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinctnessReport {
    pub runs: usize,
    pub distinct: usize,
    /// First pair of fooling-set indices whose transcripts coincide.
    pub collision: Option<(usize, usize)>,
}

impl DistinctnessReport {
    pub fn passed(&self) -> bool {
        self.collision.is_none()
    }
}

/// Runs `proto` on each pair of the fooling set and checks that no two
/// transcripts coincide.
pub fn transcript_distinctness(
    proto: &dyn Protocol,
    fs: &FoolingSet,
) -> Result<DistinctnessReport> {
    let transcripts = fs
        .pairs
        .par_iter()
        .map(|(x, y)| {
            Ok(run(
                proto,
                &PartyInput::Sequence(x.clone()),
                &PartyInput::Sequence(y.clone()),
            )?
            .transcript)
        })
        .collect::<Result<Vec<Transcript>>>()?;
    let mut first_seen: HashMap<&Transcript, usize> = HashMap::new();
    let mut collision = None;
    for (i, t) in transcripts.iter().enumerate() {
        match first_seen.get(t) {
            Some(&j) => {
                collision.get_or_insert((j, i));
            }
            None => {
                first_seen.insert(t, i);
            }
        }
    }
    Ok(DistinctnessReport {
        runs: transcripts.len(),
        distinct: first_seen.len(),
        collision,
    })
}
