//! Frozen exhaustive-sweep reports for short homopolymers. A change in the
//! operator construction, the decoding convention, or the sweep itself shows
//! up here as a diff against the checked-in fixtures.

use tetrafold::data::mj_matrix;
use tetrafold::decode::{brute_force, OracleReport};
use tetrafold::hamiltonian::{build_total, HamiltonianWeights, MaskSet, Sequence};

fn sweep_poly_a(l: usize, valid_only: bool) -> OracleReport {
    let seq = Sequence::parse(&"A".repeat(l)).unwrap();
    let h = build_total(
        &seq,
        &HamiltonianWeights::default(),
        &MaskSet::defaults(l),
        mj_matrix(),
    )
    .unwrap();
    brute_force(&h, valid_only).unwrap()
}

fn check(l: usize, fixture: &str) {
    let expected: OracleReport = serde_json::from_str(fixture).unwrap();
    let actual = sweep_poly_a(l, expected.valid_only);
    assert_eq!(actual, expected, "sweep report drifted at L={l}");
}

#[test]
fn poly_a_l3_report_matches_fixture() {
    check(3, include_str!("../data/golden/oracle_poly_a_l3.json"));
}

#[test]
fn poly_a_l4_report_matches_fixture() {
    check(4, include_str!("../data/golden/oracle_poly_a_l4.json"));
}

#[test]
fn poly_a_l5_report_matches_fixture() {
    check(5, include_str!("../data/golden/oracle_poly_a_l5.json"));
}
