//! Deterministic two-party protocol executor.
//!
//! A [`Protocol`] is a pair of pure functions: who speaks next given the
//! transcript, and what a party does given only its own input and the
//! transcript. [`run`] alternates between them and records every message
//! with its exact width. The engine never hands a party the other party's
//! input, so isolation holds by construction.
//!
//! The cost of a run is the number of bits sent until some party outputs.
//! The final bit that would announce the answer to the other side is not
//! counted.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracles::OssiInstance;
use crate::seqcore::{BitString, Message, Params, PartyRole, Sequence, Transcript};

/// Exhaustive sweeps refuse domains larger than this many input pairs.
pub const SWEEP_GUARD: u64 = 1 << 24;

/// Disagreements kept verbatim in an [`OracleReport`].
pub const REPORTED_DISAGREEMENTS: usize = 100;

/// One party's private input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PartyInput {
    Sequence(Sequence),
    Ossi(OssiInstance),
}

impl PartyInput {
    pub fn params(&self) -> Params {
        match self {
            PartyInput::Sequence(s) => s.params(),
            PartyInput::Ossi(inst) => inst.params(),
        }
    }

    pub fn shape(&self) -> InputShape {
        match self {
            PartyInput::Sequence(_) => InputShape::Sequence,
            PartyInput::Ossi(_) => InputShape::Ossi,
        }
    }

    pub fn as_sequence(&self) -> Option<&Sequence> {
        match self {
            PartyInput::Sequence(s) => Some(s),
            PartyInput::Ossi(_) => None,
        }
    }

    pub fn as_ossi(&self) -> Option<&OssiInstance> {
        match self {
            PartyInput::Ossi(inst) => Some(inst),
            PartyInput::Sequence(_) => None,
        }
    }
}

impl From<Sequence> for PartyInput {
    fn from(s: Sequence) -> Self {
        PartyInput::Sequence(s)
    }
}

impl From<OssiInstance> for PartyInput {
    fn from(inst: OssiInstance) -> Self {
        PartyInput::Ossi(inst)
    }
}

/// Kind of input the Website side expects. Bidders always hold a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputShape {
    Sequence,
    Ossi,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolStep {
    Send(BitString),
    Output(bool),
}

/// A deterministic, stateless two-party protocol.
pub trait Protocol: Send + Sync {
    fn name(&self) -> &str;

    fn params(&self) -> Params;

    fn website_shape(&self) -> InputShape;

    /// Speaking order; a function of the transcript alone.
    fn whose_turn(&self, transcript: &Transcript) -> PartyRole;

    fn next_step(
        &self,
        role: PartyRole,
        input: &PartyInput,
        transcript: &Transcript,
    ) -> Result<ProtocolStep>;

    /// Messages allowed before the run is declared non-terminating.
    fn max_rounds(&self) -> usize {
        default_round_limit(self.params())
    }
}

/// `2 * (m n + 2m + ceil(log2 n))`.
pub fn default_round_limit(p: Params) -> usize {
    let m = p.m() as usize;
    let n = p.n();
    let log_n = n.next_power_of_two().trailing_zeros() as usize;
    2 * (m * n + 2 * m + log_n)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RunResult {
    pub output: bool,
    pub transcript: Transcript,
    pub deciding_party: PartyRole,
}

impl RunResult {
    pub fn total_bits(&self) -> usize {
        self.transcript.total_bits()
    }

    /// `<sender> <width> <bits>` per message, then the summary line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for msg in self.transcript.messages() {
            let _ = writeln!(out, "{} {} {}", msg.sender(), msg.width(), msg.payload());
        }
        let _ = writeln!(
            out,
            "TOTAL {} OUTPUT {} BY {}",
            self.transcript.total_bits(),
            u8::from(self.output),
            self.deciding_party
        );
        out
    }
}

/// Runs `proto` to completion on the given inputs.
pub fn run(proto: &dyn Protocol, website: &PartyInput, bidders: &PartyInput) -> Result<RunResult> {
    for (role, input) in [(PartyRole::Website, website), (PartyRole::Bidders, bidders)] {
        if input.params() != proto.params() {
            return Err(Error::InstanceMismatch(format!(
                "{role} input has {} but {} runs at {}",
                input.params(),
                proto.name(),
                proto.params()
            )));
        }
    }
    let limit = proto.max_rounds();
    let mut transcript = Transcript::new();
    loop {
        let role = proto.whose_turn(&transcript);
        let input = match role {
            PartyRole::Website => website,
            PartyRole::Bidders => bidders,
        };
        match proto.next_step(role, input, &transcript)? {
            ProtocolStep::Output(output) => {
                return Ok(RunResult {
                    output,
                    transcript,
                    deciding_party: role,
                })
            }
            ProtocolStep::Send(payload) => {
                if transcript.len() >= limit {
                    return Err(Error::NonTermination {
                        protocol: proto.name().to_string(),
                        rounds: limit,
                    });
                }
                transcript.push(Message::new(role, payload)?);
            }
        }
    }
}

/// A set of `(website, bidders)` input pairs addressed by index.
#[derive(Debug, Clone)]
pub enum InputDomain {
    /// Every pair of sequences, with the Website side either a bare
    /// sequence or an OSSI instance at every threshold.
    Exhaustive {
        params: Params,
        shape: InputShape,
    },
    Explicit(Vec<(PartyInput, PartyInput)>),
}

impl InputDomain {
    pub fn exhaustive(params: Params, shape: InputShape) -> Result<Self> {
        let domain = InputDomain::Exhaustive { params, shape };
        match domain.checked_len() {
            Some(len) if len <= SWEEP_GUARD => Ok(domain),
            Some(len) => Err(Error::too_large(
                format!("exhaustive sweep at {params}"),
                len,
                SWEEP_GUARD,
            )),
            None => Err(Error::too_large(
                format!("exhaustive sweep at {params}"),
                format!("2^{}", 2 * params.m() as usize * params.n()),
                SWEEP_GUARD,
            )),
        }
    }

    pub fn for_protocol(proto: &dyn Protocol) -> Result<Self> {
        Self::exhaustive(proto.params(), proto.website_shape())
    }

    fn checked_len(&self) -> Option<u64> {
        match self {
            InputDomain::Explicit(pairs) => Some(pairs.len() as u64),
            InputDomain::Exhaustive { params, shape } => {
                let s = u64::try_from(params.sequence_count()?).ok()?;
                let pairs = s.checked_mul(s)?;
                match shape {
                    InputShape::Sequence => Some(pairs),
                    InputShape::Ossi => pairs.checked_mul(threshold_count(*params)?),
                }
            }
        }
    }

    pub fn len(&self) -> u64 {
        self.checked_len()
            .expect("domain size checked at construction")
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pair at `index`. Exhaustive OSSI domains are ordered by rates, then
    /// threshold, then bids.
    pub fn get(&self, index: u64) -> Result<(PartyInput, PartyInput)> {
        match self {
            InputDomain::Explicit(pairs) => pairs
                .get(index as usize)
                .cloned()
                .ok_or_else(|| Error::Malformed(format!("domain index {index} out of range"))),
            InputDomain::Exhaustive { params, shape } => {
                let s = params.sequence_count().expect("checked") as u64;
                let y = Sequence::from_index(*params, (index % s) as u128)?;
                let rest = index / s;
                let website = match shape {
                    InputShape::Sequence => {
                        PartyInput::Sequence(Sequence::from_index(*params, rest as u128)?)
                    }
                    InputShape::Ossi => {
                        let t = threshold_count(*params).expect("checked");
                        let c = rest % t;
                        let x = Sequence::from_index(*params, (rest / t) as u128)?;
                        PartyInput::Ossi(OssiInstance::new(x, c as u128)?)
                    }
                };
                Ok((website, PartyInput::Sequence(y)))
            }
        }
    }
}

fn threshold_count(p: Params) -> Option<u64> {
    let shift = 2 * p.m();
    if shift >= 64 {
        return None;
    }
    (p.n() as u64).checked_mul(1u64 << shift)
}

/// Worst-case bits of `proto` over every input pair at `p`.
pub fn worst_case_bits(proto: &dyn Protocol, p: Params) -> Result<usize> {
    if p != proto.params() {
        return Err(Error::InstanceMismatch(format!(
            "{} runs at {} not {p}",
            proto.name(),
            proto.params()
        )));
    }
    worst_case_bits_over(proto, &InputDomain::for_protocol(proto)?)
}

pub fn worst_case_bits_over(proto: &dyn Protocol, domain: &InputDomain) -> Result<usize> {
    (0..domain.len())
        .into_par_iter()
        .map(|i| {
            let (w, b) = domain.get(i)?;
            Ok(run(proto, &w, &b)?.total_bits())
        })
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub index: u64,
    pub website: PartyInput,
    pub bidders: PartyInput,
    pub protocol_output: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub protocol: String,
    pub checked: u64,
    pub disagreements: u64,
    /// The lowest-indexed disagreements, at most [`REPORTED_DISAGREEMENTS`].
    pub examples: Vec<Disagreement>,
}

impl OracleReport {
    pub fn is_certified(&self) -> bool {
        self.disagreements == 0
    }
}

#[derive(Default)]
struct Tally {
    count: u64,
    first: Vec<(u64, bool)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.count += other.count;
        self.first.extend(other.first);
        self.first.sort_unstable_by_key(|&(i, _)| i);
        self.first.truncate(REPORTED_DISAGREEMENTS);
        self
    }
}

/// Reference function for an oracle check.
pub trait Oracle: Fn(&PartyInput, &PartyInput) -> Result<bool> + Sync {}
impl<F> Oracle for F where F: Fn(&PartyInput, &PartyInput) -> Result<bool> + Sync {}

/// Runs `proto` on every input pair at `p` and compares with `oracle`.
pub fn check_against_oracle(
    proto: &dyn Protocol,
    oracle: &dyn Oracle,
    p: Params,
) -> Result<OracleReport> {
    if p != proto.params() {
        return Err(Error::InstanceMismatch(format!(
            "{} runs at {} not {p}",
            proto.name(),
            proto.params()
        )));
    }
    check_against_oracle_over(proto, oracle, &InputDomain::for_protocol(proto)?)
}

pub fn check_against_oracle_over(
    proto: &dyn Protocol,
    oracle: &dyn Oracle,
    domain: &InputDomain,
) -> Result<OracleReport> {
    let tally = (0..domain.len())
        .into_par_iter()
        .try_fold(Tally::default, |mut acc, i| {
            let (w, b) = domain.get(i)?;
            let got = run(proto, &w, &b)?.output;
            if got != oracle(&w, &b)? {
                acc.count += 1;
                if acc.first.len() < REPORTED_DISAGREEMENTS {
                    acc.first.push((i, got));
                }
            }
            Ok::<_, Error>(acc)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let examples = tally
        .first
        .into_iter()
        .map(|(index, protocol_output)| {
            let (website, bidders) = domain.get(index)?;
            Ok(Disagreement {
                index,
                website,
                bidders,
                protocol_output,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport {
        protocol: proto.name().to_string(),
        checked: domain.len(),
        disagreements: tally.count,
        examples,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectangleReport {
    pub runs: u64,
    /// Pairs of inputs that produced the same transcript and output.
    pub collisions: u64,
    /// Colliding pairs whose crossed inputs ran differently.
    pub violations: Vec<(u64, u64)>,
}

/// Checks that inputs sharing a transcript form a combinatorial rectangle:
/// if `(x1, y1)` and `(x2, y2)` run identically, so do `(x1, y2)` and
/// `(x2, y1)`.
pub fn rectangle_probe(proto: &dyn Protocol, domain: &InputDomain) -> Result<RectangleReport> {
    let results = (0..domain.len())
        .into_par_iter()
        .map(|i| {
            let (w, b) = domain.get(i)?;
            Ok((i, run(proto, &w, &b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut groups: HashMap<&RunResult, Vec<u64>> = HashMap::new();
    for (i, r) in &results {
        groups.entry(r).or_default().push(*i);
    }
    let pairs: Vec<(&RunResult, u64, u64)> = groups
        .iter()
        .flat_map(|(r, members)| {
            members
                .iter()
                .enumerate()
                .flat_map(move |(k, &i)| members[k + 1..].iter().map(move |&j| (*r, i, j)))
        })
        .collect();
    let mut violations = pairs
        .par_iter()
        .map(|&(expected, i, j)| {
            let (wi, bi) = domain.get(i)?;
            let (wj, bj) = domain.get(j)?;
            let ok = run(proto, &wi, &bj)? == *expected && run(proto, &wj, &bi)? == *expected;
            Ok((!ok).then_some((i, j)))
        })
        .filter_map(|r: Result<Option<(u64, u64)>>| r.transpose())
        .collect::<Result<Vec<_>>>()?;
    violations.sort_unstable();
    Ok(RectangleReport {
        runs: results.len() as u64,
        collisions: pairs.len() as u64,
        violations,
    })
}
