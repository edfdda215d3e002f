//! Protocol behaviour through the public API only.

use std::sync::Arc;

use proptest::prelude::*;

use commlab::combinatorics::rank_bit_width;
use commlab::engine::{
    check_against_oracle, rectangle_probe, run, worst_case_bits, InputDomain, InputShape,
    PartyInput, Protocol,
};
use commlab::oracles::{is_permutation, max_surplus, OssiInstance};
use commlab::protocols::{
    by_name, canonical_ossi, canonical_pp, reduction_pp_via_ossi, sum_sq_width, Negated,
    PlainBidsOssi, PROTOCOL_NAMES,
};
use commlab::seqcore::{Params, PartyRole, Sequence};

const SMALL: [(u32, usize); 5] = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3)];

fn p(m: u32, n: usize) -> Params {
    Params::new(m, n).unwrap()
}

fn seq(q: Params, v: &[u64]) -> Sequence {
    Sequence::new(q, v.to_vec()).unwrap()
}

fn pp_oracle(x: &PartyInput, y: &PartyInput) -> commlab::Result<bool> {
    is_permutation(x.as_sequence().unwrap(), y.as_sequence().unwrap())
}

fn ossi_oracle(w: &PartyInput, b: &PartyInput) -> commlab::Result<bool> {
    let inst = w.as_ossi().unwrap();
    Ok(max_surplus(b.as_sequence().unwrap(), inst.rates())? >= inst.threshold())
}

#[test]
fn reduction_is_black_box_over_any_correct_ossi_protocol() {
    for (m, n) in SMALL {
        let q = p(m, n);
        let plain: Arc<dyn Protocol> = Arc::new(PlainBidsOssi::new(q));
        let report = check_against_oracle(plain.as_ref(), &ossi_oracle, q).unwrap();
        assert!(report.is_certified(), "{q}: plain OSSI protocol wrong");

        let reduction = reduction_pp_via_ossi(q, plain).unwrap();
        let report = check_against_oracle(&reduction, &pp_oracle, q).unwrap();
        assert!(report.is_certified(), "{q}: {:?}", report.examples.first());
        // One Σb² message, n bids, the end marker.
        let expected = sum_sq_width(q) + n * m as usize + 1;
        assert_eq!(worst_case_bits(&reduction, q).unwrap(), expected);
    }
}

#[test]
fn canonical_ossi_is_correct() {
    for (m, n) in [(1, 1), (1, 2), (2, 2)] {
        let q = p(m, n);
        let report = check_against_oracle(&canonical_ossi(q), &ossi_oracle, q).unwrap();
        assert!(report.is_certified());
        assert_eq!(
            report.checked,
            (q.sequence_count().unwrap().pow(2) * q.n() as u128 * q.radix().pow(2)) as u64
        );
    }
}

#[test]
fn cost_decomposes_at_every_small_point() {
    for (m, n) in SMALL {
        let q = p(m, n);
        let reduction = reduction_pp_via_ossi(q, Arc::new(canonical_ossi(q))).unwrap();
        let ossi = worst_case_bits(&canonical_ossi(q), q).unwrap();
        assert_eq!(ossi, rank_bit_width(q));
        assert_eq!(
            worst_case_bits(&reduction, q).unwrap(),
            sum_sq_width(q) + ossi
        );
    }
}

#[test]
fn negated_protocol_disagrees_everywhere() {
    let q = p(2, 2);
    let proto = Negated::new(Arc::new(canonical_pp(q)));
    let report = check_against_oracle(&proto, &pp_oracle, q).unwrap();
    assert_eq!(report.checked, 256);
    assert_eq!(report.disagreements, 256);
    assert_eq!(report.examples.len(), 100);
    assert_eq!(report.examples[0].index, 0);
    assert!(report.examples.windows(2).all(|w| w[0].index < w[1].index));
}

#[test]
fn transcripts_partition_inputs_into_rectangles() {
    for (m, n) in [(1, 2), (2, 2)] {
        let q = p(m, n);
        for proto in [
            Arc::new(canonical_pp(q)) as Arc<dyn Protocol>,
            Arc::new(reduction_pp_via_ossi(q, Arc::new(canonical_ossi(q))).unwrap()),
        ] {
            let domain = InputDomain::for_protocol(proto.as_ref()).unwrap();
            let report = rectangle_probe(proto.as_ref(), &domain).unwrap();
            assert_eq!(report.runs, domain.len());
            assert!(report.collisions > 0);
            assert!(
                report.violations.is_empty(),
                "{}: {:?}",
                proto.name(),
                report.violations
            );
        }
    }
}

#[test]
fn named_protocols_run_end_to_end() {
    let q = p(2, 2);
    let x = seq(q, &[1, 2]);
    let y = seq(q, &[2, 1]);
    for name in PROTOCOL_NAMES {
        let proto = by_name(name, q).unwrap();
        let website = match proto.website_shape() {
            InputShape::Sequence => PartyInput::from(x.clone()),
            InputShape::Ossi => PartyInput::from(OssiInstance::new(x.clone(), 4).unwrap()),
        };
        let r = run(proto.as_ref(), &website, &y.clone().into()).unwrap();
        assert!(r.output, "{name}");
        assert_eq!(r.deciding_party, PartyRole::Website);
        assert_eq!(r.transcript.total_bits(), r.total_bits());
    }
    assert!(by_name("pp-fast", q).is_err());
}

proptest! {
    #[test]
    fn reduction_matches_permutation_oracle(
        m in 1u32..=16,
        raw in prop::collection::vec((any::<u64>(), any::<u64>()), 1..7),
        permute in any::<bool>(),
    ) {
        let q = p(m, raw.len());
        let x: Vec<u64> = raw.iter().map(|&(a, _)| a & q.max_value()).collect();
        let y: Vec<u64> = if permute {
            x.iter().rev().copied().collect()
        } else {
            raw.iter().map(|&(_, b)| b & q.max_value()).collect()
        };
        let (x, y) = (seq(q, &x), seq(q, &y));
        let proto = reduction_pp_via_ossi(q, Arc::new(canonical_ossi(q))).unwrap();
        let r = run(&proto, &x.clone().into(), &y.clone().into()).unwrap();
        prop_assert_eq!(r.output, is_permutation(&x, &y).unwrap());
        prop_assert_eq!(r.total_bits(), sum_sq_width(q) + rank_bit_width(q));
        let pp = run(&canonical_pp(q), &x.into(), &y.into()).unwrap();
        prop_assert_eq!(pp.output, r.output);
    }
}
