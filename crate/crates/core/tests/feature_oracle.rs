mod support;

use support::oracle::{check_against_oracle, micro_dataset};

#[test]
fn two_hundred_micro_datasets_match_brute_force() {
    for seed in 0..200 {
        let m = micro_dataset(seed);
        if let Err(e) = check_against_oracle(&m) {
            panic!("seed {seed}: {e}");
        }
    }
}

#[test]
fn micro_datasets_respect_size_bounds() {
    for seed in 0..200 {
        let m = micro_dataset(seed);
        assert!((1..=5).contains(&m.dataset.users.len()));
        assert!((1..=20).contains(&m.dataset.tweets.len()));
        assert!((1..=6).contains(&m.periods));
    }
}
