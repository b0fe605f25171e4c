//! Seeded generators and the JSON layout are part of the file-format
//! contract: fixtures written by one build must be reproduced by the next.

use crpoint::pairs::{random_pair, MatrixPair};

const FIXTURE: &str = include_str!("fixtures/random_pairs.json");

#[test]
fn random_pairs_are_frozen() {
    let pairs: Vec<MatrixPair> = (0..4).map(|s| random_pair(s, 1.0)).collect();
    assert_eq!(crpoint::json::to_string(&pairs).unwrap(), FIXTURE);
}

#[test]
fn fixture_round_trips_exactly() {
    let parsed: Vec<MatrixPair> = serde_json::from_str(FIXTURE).unwrap();
    for (s, p) in parsed.iter().enumerate() {
        assert_eq!(*p, random_pair(s as u64, 1.0));
    }
}
