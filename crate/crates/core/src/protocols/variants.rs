use std::sync::Arc;

use num_bigint::BigUint;

use crate::engine::{InputShape, PartyInput, Protocol, ProtocolStep};
use crate::error::{Error, Result};
use crate::oracles::ossi_predicate;
use crate::seqcore::{decode_u128, encode_fixed_width, Params, PartyRole, Sequence, Transcript};

/// Wraps a protocol and flips its output.
pub struct Negated {
    name: String,
    inner: Arc<dyn Protocol>,
}

impl Negated {
    pub fn new(inner: Arc<dyn Protocol>) -> Self {
        Self {
            name: format!("negated-{}", inner.name()),
            inner,
        }
    }
}

impl Protocol for Negated {
    fn name(&self) -> &str {
        &self.name
    }

    fn params(&self) -> Params {
        self.inner.params()
    }

    fn website_shape(&self) -> InputShape {
        self.inner.website_shape()
    }

    fn whose_turn(&self, t: &Transcript) -> PartyRole {
        self.inner.whose_turn(t)
    }

    fn next_step(
        &self,
        role: PartyRole,
        input: &PartyInput,
        t: &Transcript,
    ) -> Result<ProtocolStep> {
        Ok(match self.inner.next_step(role, input, t)? {
            ProtocolStep::Output(bit) => ProtocolStep::Output(!bit),
            send => send,
        })
    }

    fn max_rounds(&self) -> usize {
        self.inner.max_rounds()
    }
}

/// Website outputs a fixed bit without any communication.
#[derive(Debug, Clone)]
pub struct ConstantOutput {
    params: Params,
    shape: InputShape,
    output: bool,
}

impl ConstantOutput {
    pub fn new(params: Params, shape: InputShape, output: bool) -> Self {
        Self {
            params,
            shape,
            output,
        }
    }
}

impl Protocol for ConstantOutput {
    fn name(&self) -> &str {
        "constant"
    }

    fn params(&self) -> Params {
        self.params
    }

    fn website_shape(&self) -> InputShape {
        self.shape
    }

    fn whose_turn(&self, _: &Transcript) -> PartyRole {
        PartyRole::Website
    }

    fn next_step(&self, _: PartyRole, _: &PartyInput, _: &Transcript) -> Result<ProtocolStep> {
        Ok(ProtocolStep::Output(self.output))
    }
}

/// Correct but wasteful OSSI protocol: Bidders send every bid as its own
/// `m`-bit message, in order, followed by a one-bit end marker.
#[derive(Debug, Clone)]
pub struct PlainBidsOssi {
    params: Params,
}

impl PlainBidsOssi {
    pub fn new(params: Params) -> Self {
        Self { params }
    }
}

impl Protocol for PlainBidsOssi {
    fn name(&self) -> &str {
        "ossi-plain-bids"
    }

    fn params(&self) -> Params {
        self.params
    }

    fn website_shape(&self) -> InputShape {
        InputShape::Ossi
    }

    fn whose_turn(&self, t: &Transcript) -> PartyRole {
        if t.len() <= self.params.n() {
            PartyRole::Bidders
        } else {
            PartyRole::Website
        }
    }

    fn next_step(
        &self,
        role: PartyRole,
        input: &PartyInput,
        t: &Transcript,
    ) -> Result<ProtocolStep> {
        let shape_err = || Error::InputShape {
            protocol: self.name().to_string(),
            role,
        };
        let n = self.params.n();
        match role {
            PartyRole::Bidders => {
                let bids = input.as_sequence().ok_or_else(shape_err)?;
                let bits = match bids.values().get(t.len()) {
                    Some(&v) => encode_fixed_width(&BigUint::from(v), self.params.m() as usize)?,
                    None => "1".parse()?,
                };
                Ok(ProtocolStep::Send(bits))
            }
            PartyRole::Website => {
                let inst = input.as_ossi().ok_or_else(shape_err)?;
                let bids = (0..n)
                    .map(|i| {
                        let msg = t.read_from(i, PartyRole::Bidders)?;
                        decode_u128(msg.payload())
                            .map(|v| v as u64)
                            .ok_or_else(|| Error::Malformed("bid wider than 128 bits".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let bids = Sequence::new(self.params, bids)?;
                Ok(ProtocolStep::Output(ossi_predicate(&bids, inst)?))
            }
        }
    }
}
