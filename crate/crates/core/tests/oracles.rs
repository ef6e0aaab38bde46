mod common;

use common::*;
use followup::compare::{logrank, LogrankWeights};
use followup::survival::km_fit;

#[test]
fn km_matches_redistribution_exhaustively() {
    let mut checked = 0;
    for n in 1..=6 {
        for pairs in exhaustive_samples(n) {
            let curve = km_fit(&observed(&pairs)).unwrap();
            for &t in &ORACLE_GRID {
                let want = redistribute_to_the_right(&pairs, t);
                let got = curve.value_at(t);
                assert!(
                    (got - want).abs() < 1e-12,
                    "S({t}) = {got}, oracle {want} for {pairs:?}"
                );
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 6 + 36 + 216 + 1296 + 7776 + 46656);
}

#[test]
fn logrank_matches_hypergeometric_sum() {
    let mut rng = rng(6, 0);
    let mut compared = 0;
    while compared < 500 {
        let n0 = 2 + (compared % 5);
        let n1 = 2 + (compared % 7);
        let control = small_sample(&mut rng, n0, 6);
        let treatment = small_sample(&mut rng, n1, 6);
        let oracle = hypergeometric_logrank(&control, &treatment);
        let got = logrank(&two_arm(&control, &treatment), LogrankWeights::UNWEIGHTED);
        match (oracle, got) {
            (Some(z), Ok(r)) => {
                assert!((r.z - z).abs() < 1e-10, "{} vs {z}", r.z);
                compared += 1;
            }
            (None, Err(_)) => {}
            (o, g) => panic!("oracle {o:?} but logrank {g:?}"),
        }
    }
}
