use crate::combinatorics::{multiset_rank, multiset_unrank, rank_bit_width, BigCount};
use crate::engine::{InputShape, PartyInput, Protocol, ProtocolStep};
use crate::error::{Error, Result};
use crate::oracles::ossi_predicate;
use crate::seqcore::{
    decode_fixed_width, encode_fixed_width, Params, PartyRole, Sequence, Transcript,
};

use super::{OSSI_CANONICAL, PP_CANONICAL};

fn bidders_first(t: &Transcript) -> PartyRole {
    if t.is_empty() {
        PartyRole::Bidders
    } else {
        PartyRole::Website
    }
}

fn send_rank(params: Params, bids: &Sequence, t: &Transcript) -> Result<ProtocolStep> {
    if !t.is_empty() {
        return Err(Error::Malformed("Bidders asked to speak twice".into()));
    }
    let rank = multiset_rank(bids);
    let bits = encode_fixed_width(&rank.rank().to_biguint(), rank_bit_width(params))?;
    Ok(ProtocolStep::Send(bits))
}

fn received_rank(t: &Transcript) -> Result<BigCount> {
    let msg = t.read_from(0, PartyRole::Bidders)?;
    Ok(decode_fixed_width(msg.payload()).into())
}

fn sequence_input<'a>(name: &str, role: PartyRole, input: &'a PartyInput) -> Result<&'a Sequence> {
    input.as_sequence().ok_or_else(|| Error::InputShape {
        protocol: name.to_string(),
        role,
    })
}

/// Bidders send the rank of their multiset in `ceil(log2 C)` bits; Website
/// compares it with the rank of its own sequence.
#[derive(Debug, Clone)]
pub struct CanonicalPp {
    params: Params,
}

impl CanonicalPp {
    pub fn new(params: Params) -> Self {
        Self { params }
    }
}

impl Protocol for CanonicalPp {
    fn name(&self) -> &str {
        PP_CANONICAL
    }

    fn params(&self) -> Params {
        self.params
    }

    fn website_shape(&self) -> InputShape {
        InputShape::Sequence
    }

    fn whose_turn(&self, t: &Transcript) -> PartyRole {
        bidders_first(t)
    }

    fn next_step(
        &self,
        role: PartyRole,
        input: &PartyInput,
        t: &Transcript,
    ) -> Result<ProtocolStep> {
        let own = sequence_input(self.name(), role, input)?;
        match role {
            PartyRole::Bidders => send_rank(self.params, own, t),
            PartyRole::Website => {
                let theirs = received_rank(t)?;
                Ok(ProtocolStep::Output(multiset_rank(own).rank() == &theirs))
            }
        }
    }
}

/// Same message as [`CanonicalPp`]; Website unranks it to the bid multiset
/// and evaluates the surplus predicate, which only depends on that multiset.
#[derive(Debug, Clone)]
pub struct CanonicalOssi {
    params: Params,
}

impl CanonicalOssi {
    pub fn new(params: Params) -> Self {
        Self { params }
    }
}

impl Protocol for CanonicalOssi {
    fn name(&self) -> &str {
        OSSI_CANONICAL
    }

    fn params(&self) -> Params {
        self.params
    }

    fn website_shape(&self) -> InputShape {
        InputShape::Ossi
    }

    fn whose_turn(&self, t: &Transcript) -> PartyRole {
        bidders_first(t)
    }

    fn next_step(
        &self,
        role: PartyRole,
        input: &PartyInput,
        t: &Transcript,
    ) -> Result<ProtocolStep> {
        match role {
            PartyRole::Bidders => {
                let bids = sequence_input(self.name(), role, input)?;
                send_rank(self.params, bids, t)
            }
            PartyRole::Website => {
                let inst = input.as_ossi().ok_or_else(|| Error::InputShape {
                    protocol: self.name().to_string(),
                    role,
                })?;
                let bids = multiset_unrank(self.params, &received_rank(t)?)?;
                Ok(ProtocolStep::Output(ossi_predicate(
                    &bids.to_sequence(),
                    inst,
                )?))
            }
        }
    }
}
