//! Integer sequences under a tick-size model, fixed-width bit strings, and
//! the attributed message log that protocol costs are measured on.
//!
//! Every value lives in `[0, 2^m)`. Bit strings are most-significant-bit
//! first throughout.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest supported value width. Values are stored in `u64`.
pub const MAX_M: u32 = 64;

/// Value bit-width `m` and slot count `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Params {
    m: u32,
    n: usize,
}

impl Params {
    pub fn new(m: u32, n: usize) -> Result<Self> {
        if m == 0 || m > MAX_M {
            return Err(Error::InvalidParams(format!(
                "m must be in 1..={MAX_M}, got {m}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest representable value, `2^m - 1`.
    pub fn max_value(&self) -> u64 {
        u64::MAX >> (64 - self.m)
    }

    /// `2^m` as a wide integer.
    pub fn radix(&self) -> u128 {
        1u128 << self.m
    }

    pub fn contains(&self, value: u64) -> bool {
        value <= self.max_value()
    }

    /// Exclusive bound on thresholds and surpluses, `n * 2^(2m)`.
    pub fn surplus_bound(&self) -> BigUint {
        BigUint::from(self.n) << (2 * self.m as usize)
    }

    /// Number of raw sequences, `2^(m n)`, if it fits in a `u128`.
    pub fn sequence_count(&self) -> Option<u128> {
        let bits = (self.m as usize).checked_mul(self.n)?;
        if bits >= 128 {
            None
        } else {
            Some(1u128 << bits)
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, n={})", self.m, self.n)
    }
}

/// Which side of the two-party model a participant sits on.
///
/// In permutation-problem contexts Alice is the Website and Bob the Bidders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartyRole {
    Website,
    Bidders,
}

impl PartyRole {
    pub const ALICE: PartyRole = PartyRole::Website;
    pub const BOB: PartyRole = PartyRole::Bidders;

    pub fn other(self) -> Self {
        match self {
            PartyRole::Website => PartyRole::Bidders,
            PartyRole::Bidders => PartyRole::Website,
        }
    }
}

impl fmt::Display for PartyRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartyRole::Website => "Website",
            PartyRole::Bidders => "Bidders",
        })
    }
}

/// A length-`n` tuple of integers in `[0, 2^m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    params: Params,
    values: Vec<u64>,
}

impl Sequence {
    pub fn new(params: Params, values: Vec<u64>) -> Result<Self> {
        if values.len() != params.n {
            return Err(Error::LengthMismatch {
                expected: params.n,
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, &v)| !params.contains(v))
        {
            return Err(Error::ValueOutOfRange {
                index,
                value,
                m: params.m,
            });
        }
        Ok(Self { params, values })
    }

    /// Parses the comma-separated decimal form, e.g. `3,0,2`.
    pub fn parse(params: Params, text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                u64::from_str(tok).map_err(|e| Error::Parse {
                    input: text.to_string(),
                    reason: format!("{tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(params, values)
    }

    /// The sequence whose bit encoding, read as a big-endian integer, is
    /// `index`. Enumerating `0..2^(mn)` visits every sequence once.
    pub fn from_index(params: Params, index: u128) -> Result<Self> {
        if matches!(params.sequence_count(), Some(count) if index >= count) {
            return Err(Error::InvalidParams(format!(
                "sequence index {index} out of range for {params}"
            )));
        }
        let mut values = vec![0u64; params.n];
        let mut rest = index;
        for slot in values.iter_mut().rev() {
            if rest == 0 {
                break;
            }
            *slot = (rest & params.max_value() as u128) as u64;
            rest >>= params.m;
        }
        Self::new(params, values)
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ v_i^2` as an exact integer.
    pub fn sum_of_squares(&self) -> BigUint {
        self.values
            .iter()
            .map(|&v| {
                let v = BigUint::from(v);
                &v * &v
            })
            .sum()
    }

    pub fn sort_descending(&self) -> SortedSequence {
        sort_descending(self)
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_csv(f, &self.values)
    }
}

fn write_csv(f: &mut fmt::Formatter<'_>, values: &[u64]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// A sequence whose values are non-increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SortedSequence {
    params: Params,
    values: Vec<u64>,
}

impl SortedSequence {
    pub fn params(&self) -> Params {
        self.params
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn to_sequence(&self) -> Sequence {
        Sequence {
            params: self.params,
            values: self.values.clone(),
        }
    }
}

impl fmt::Display for SortedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_csv(f, &self.values)
    }
}

/// Stable descending sort; equal values keep their relative order.
pub fn sort_descending(s: &Sequence) -> SortedSequence {
    let mut values = s.values.clone();
    values.sort_by(|a, b| b.cmp(a));
    SortedSequence {
        params: s.params,
        values,
    }
}

/// A click-through rate `numerator / 2^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TickRate {
    m: u32,
    numerator: u64,
}

impl TickRate {
    pub fn new(m: u32, numerator: u64) -> Result<Self> {
        let params = Params::new(m, 1)?;
        if !params.contains(numerator) {
            return Err(Error::ValueOutOfRange {
                index: 0,
                value: numerator,
                m,
            });
        }
        Ok(Self { m, numerator })
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u128 {
        1u128 << self.m
    }
}

/// The integer tick `a = 2^m * α` for a rate `α`.
pub fn ctr_to_integer(rate: TickRate) -> u64 {
    rate.numerator
}

/// An owned MSB-first bit string.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse {
                    input: s.to_string(),
                    reason: format!("unexpected character {c:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

/// Encodes `value` in exactly `width` bits, most significant first.
pub fn encode_fixed_width(value: &BigUint, width: usize) -> Result<BitString> {
    if value.bits() > width as u64 {
        return Err(Error::EncodingOverflow {
            value: value.to_string(),
            width,
        });
    }
    let bits = (0..width)
        .rev()
        .map(|i| value.bit(i as u64))
        .collect::<Vec<_>>();
    Ok(BitString(bits))
}

pub fn decode_fixed_width(bits: &BitString) -> BigUint {
    let mut acc = BigUint::zero();
    for &b in &bits.0 {
        acc <<= 1u32;
        if b {
            acc += BigUint::one();
        }
    }
    acc
}

pub fn encode_u128(value: u128, width: usize) -> Result<BitString> {
    encode_fixed_width(&BigUint::from(value), width)
}

pub fn decode_u128(bits: &BitString) -> Option<u128> {
    decode_fixed_width(bits).to_u128()
}

/// Concatenation of the `n` fixed-width(`m`) encodings; `m * n` bits.
pub fn sequence_bit_encoding(s: &Sequence) -> BitString {
    let m = s.params.m as usize;
    let mut out = BitString(Vec::with_capacity(m * s.params.n));
    for &v in &s.values {
        // Range is a type invariant.
        let part = encode_fixed_width(&BigUint::from(v), m).expect("value within 2^m");
        out.extend(&part);
    }
    out
}

/// One attributed, fixed-width message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    sender: PartyRole,
    payload: BitString,
}

impl Message {
    pub fn new(sender: PartyRole, payload: BitString) -> Result<Self> {
        if payload.is_empty() {
            return Err(Error::Malformed(format!(
                "{sender} tried to send an empty message"
            )));
        }
        Ok(Self { sender, payload })
    }

    pub fn sender(&self) -> PartyRole {
        self.sender
    }

    pub fn payload(&self) -> &BitString {
        &self.payload
    }

    pub fn width(&self) -> usize {
        self.payload.len()
    }
}

/// Ordered message log with a running bit count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Transcript {
    messages: Vec<Message>,
    total_bits: usize,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, message: Message) {
        self.total_bits += message.width();
        self.messages.push(message);
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    /// Reads message `index`, failing if it has not been sent yet.
    pub fn read(&self, index: usize) -> Result<&Message> {
        self.messages.get(index).ok_or_else(|| {
            Error::Malformed(format!(
                "read of message {index} but only {} sent",
                self.messages.len()
            ))
        })
    }

    /// Like [`read`](Self::read), also checking who sent it.
    pub fn read_from(&self, index: usize, sender: PartyRole) -> Result<&Message> {
        let msg = self.read(index)?;
        if msg.sender != sender {
            return Err(Error::Malformed(format!(
                "message {index} was sent by {}, expected {sender}",
                msg.sender
            )));
        }
        Ok(msg)
    }

    /// The transcript with the first `skip` messages removed.
    pub fn tail(&self, skip: usize) -> Transcript {
        let mut out = Transcript::new();
        for msg in self.messages.iter().skip(skip) {
            out.push(msg.clone());
        }
        out
    }
}
