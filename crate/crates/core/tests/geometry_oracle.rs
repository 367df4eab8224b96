mod support;

use support::oracle::{crossing_agreement, crust_agreement};

#[test]
fn segment_crossing_matches_dense_sampling() {
    let t = crossing_agreement(1000, 0xC0FFEE);
    assert_eq!(t.disagree, 0, "{t:?}");
    assert!(t.agree >= 950, "{t:?}");
}

#[test]
fn crust_matches_dense_sampling() {
    let t = crust_agreement(1000, 0xBEEF);
    assert_eq!(t.disagree, 0, "{t:?}");
    assert!(t.agree >= 950, "{t:?}");
}
