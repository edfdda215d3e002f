//! Concrete protocols: the rank-based canonical protocols for PP and OSSI,
//! the sum-of-squares reduction from PP to any OSSI protocol, and a few
//! deliberately degenerate variants used to exercise the checkers.

use std::sync::Arc;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::seqcore::Params;

mod canonical;
mod reduction;
mod variants;

pub use canonical::{CanonicalOssi, CanonicalPp};
pub use reduction::{ReductionPpViaOssi, ReductionQuery};
pub use variants::{ConstantOutput, Negated, PlainBidsOssi};

use crate::engine::Protocol;

pub const PP_CANONICAL: &str = "pp-canonical";
pub const OSSI_CANONICAL: &str = "ossi-canonical";
pub const PP_VIA_OSSI: &str = "pp-via-ossi";

pub const PROTOCOL_NAMES: [&str; 3] = [PP_CANONICAL, OSSI_CANONICAL, PP_VIA_OSSI];

pub fn canonical_pp(p: Params) -> CanonicalPp {
    CanonicalPp::new(p)
}

pub fn canonical_ossi(p: Params) -> CanonicalOssi {
    CanonicalOssi::new(p)
}

pub fn reduction_pp_via_ossi(
    p: Params,
    ossi_proto: Arc<dyn Protocol>,
) -> Result<ReductionPpViaOssi> {
    ReductionPpViaOssi::new(p, ossi_proto)
}

/// Bits needed to send any `Σ b_i^2`: `ceil(log2(n (2^m - 1)^2 + 1))`, at
/// least one.
pub fn sum_sq_width(p: Params) -> usize {
    let top = BigUint::from(p.max_value());
    let max_sum = BigUint::from(p.n()) * &top * &top;
    (max_sum.bits() as usize).max(1)
}

/// Looks up a protocol by its command-line name.
pub fn by_name(name: &str, p: Params) -> Result<Arc<dyn Protocol>> {
    match name {
        PP_CANONICAL => Ok(Arc::new(canonical_pp(p))),
        OSSI_CANONICAL => Ok(Arc::new(canonical_ossi(p))),
        PP_VIA_OSSI => Ok(Arc::new(reduction_pp_via_ossi(
            p,
            Arc::new(canonical_ossi(p)),
        )?)),
        other => Err(Error::Parse {
            input: other.to_string(),
            reason: format!("unknown protocol, expected one of {PROTOCOL_NAMES:?}"),
        }),
    }
}
