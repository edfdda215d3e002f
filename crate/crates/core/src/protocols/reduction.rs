//! PP from a single black-box OSSI query.
//!
//! Bob sends `Σ b_i^2`. Alice sets the threshold to
//! `max(Σ a_i^2, Σ b_i^2)` and both run the embedded OSSI protocol with
//! Alice's sequence as the slot rates and Bob's as the bids. The optimal
//! surplus `Σ a*_i b*_i` reaches that threshold exactly when the sorted
//! sequences are equal: below it otherwise by Cauchy-Schwarz.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::engine::{InputShape, PartyInput, Protocol, ProtocolStep};
use crate::error::{Error, Result};
use crate::oracles::OssiInstance;
use crate::seqcore::{
    decode_fixed_width, encode_fixed_width, Params, PartyRole, Sequence, Transcript,
};

use super::{sum_sq_width, PP_VIA_OSSI};

/// The OSSI instance Alice derives locally. The threshold is never sent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionQuery {
    pub derived_instance: OssiInstance,
    pub sum_sq_message_width: usize,
}

impl ReductionQuery {
    pub fn form(alice: &Sequence, bob_sum_sq: &BigUint) -> Result<Self> {
        let params = alice.params();
        let threshold = alice.sum_of_squares().max(bob_sum_sq.clone());
        let threshold = threshold.to_u128().ok_or_else(|| {
            Error::InstanceMismatch(format!("threshold {threshold} exceeds 128 bits"))
        })?;
        Ok(Self {
            derived_instance: OssiInstance::new(alice.clone(), threshold)?,
            sum_sq_message_width: sum_sq_width(params),
        })
    }
}

/// PP protocol: one sum-of-squares message, then the embedded OSSI protocol.
pub struct ReductionPpViaOssi {
    params: Params,
    ossi: Arc<dyn Protocol>,
}

impl ReductionPpViaOssi {
    pub fn new(params: Params, ossi: Arc<dyn Protocol>) -> Result<Self> {
        if ossi.params() != params {
            return Err(Error::InstanceMismatch(format!(
                "embedded {} runs at {}, reduction at {params}",
                ossi.name(),
                ossi.params()
            )));
        }
        if ossi.website_shape() != InputShape::Ossi {
            return Err(Error::InstanceMismatch(format!(
                "embedded {} is not an OSSI protocol",
                ossi.name()
            )));
        }
        Ok(Self { params, ossi })
    }

    pub fn embedded(&self) -> &dyn Protocol {
        self.ossi.as_ref()
    }
}

impl std::fmt::Debug for ReductionPpViaOssi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReductionPpViaOssi")
            .field("params", &self.params)
            .field("ossi", &self.ossi.name())
            .finish()
    }
}

impl Protocol for ReductionPpViaOssi {
    fn name(&self) -> &str {
        PP_VIA_OSSI
    }

    fn params(&self) -> Params {
        self.params
    }

    fn website_shape(&self) -> InputShape {
        InputShape::Sequence
    }

    fn whose_turn(&self, t: &Transcript) -> PartyRole {
        if t.is_empty() {
            PartyRole::Bidders
        } else {
            self.ossi.whose_turn(&t.tail(1))
        }
    }

    fn next_step(
        &self,
        role: PartyRole,
        input: &PartyInput,
        t: &Transcript,
    ) -> Result<ProtocolStep> {
        let own = input.as_sequence().ok_or_else(|| Error::InputShape {
            protocol: self.name().to_string(),
            role,
        })?;
        if t.is_empty() {
            if role != PartyRole::Bidders {
                return Err(Error::Malformed(
                    "Alice spoke before the sum of squares".into(),
                ));
            }
            let bits = encode_fixed_width(&own.sum_of_squares(), sum_sq_width(self.params))?;
            return Ok(ProtocolStep::Send(bits));
        }
        let inner = t.tail(1);
        match role {
            PartyRole::Bidders => self.ossi.next_step(role, input, &inner),
            PartyRole::Website => {
                let bob_sum_sq = decode_fixed_width(t.read_from(0, PartyRole::Bidders)?.payload());
                let query = ReductionQuery::form(own, &bob_sum_sq)?;
                self.ossi
                    .next_step(role, &PartyInput::Ossi(query.derived_instance), &inner)
            }
        }
    }

    fn max_rounds(&self) -> usize {
        1 + self.ossi.max_rounds()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::protocols::CanonicalOssi;

    fn p(m: u32, n: usize) -> Params {
        Params::new(m, n).unwrap()
    }

    fn s(q: Params, v: &[u64]) -> Sequence {
        Sequence::new(q, v.to_vec()).unwrap()
    }

    fn reduce(q: Params, a: &[u64], b: &[u64]) -> crate::engine::RunResult {
        let proto = ReductionPpViaOssi::new(q, Arc::new(CanonicalOssi::new(q))).unwrap();
        run(&proto, &s(q, a).into(), &s(q, b).into()).unwrap()
    }

    #[test]
    fn examples() {
        let q = p(2, 2);
        assert!(reduce(q, &[1, 2], &[2, 1]).output);
        assert!(!reduce(q, &[1, 2], &[2, 2]).output);
        assert!(reduce(q, &[0, 0], &[0, 0]).output);
        assert_eq!(reduce(q, &[1, 2], &[2, 2]).total_bits(), 9);
    }

    #[test]
    fn transcript_layout() {
        // Σb² = 8 in 5 bits, then the rank of {2,2}: t = (2,3), C(2,1)+C(3,2) = 5.
        let r = reduce(p(2, 2), &[1, 2], &[2, 2]);
        assert_eq!(
            r.dump(),
            "Bidders 5 01000\nBidders 4 0101\nTOTAL 9 OUTPUT 0 BY Website\n"
        );
    }

    #[test]
    fn derived_query() {
        let q = p(2, 2);
        let query = ReductionQuery::form(&s(q, &[1, 2]), &BigUint::from(8u32)).unwrap();
        assert_eq!(query.derived_instance.threshold(), 8);
        assert_eq!(query.derived_instance.rates().values(), &[1, 2]);
        assert_eq!(query.sum_sq_message_width, 5);
        let query = ReductionQuery::form(&s(q, &[3, 3]), &BigUint::from(0u32)).unwrap();
        assert_eq!(query.derived_instance.threshold(), 18);
    }

    #[test]
    fn rejects_non_ossi_embedding() {
        let q = p(1, 2);
        assert!(
            ReductionPpViaOssi::new(q, Arc::new(crate::protocols::CanonicalPp::new(q))).is_err()
        );
        assert!(ReductionPpViaOssi::new(q, Arc::new(CanonicalOssi::new(p(2, 2)))).is_err());
    }
}
