//! Published worked values, replayed against the library by `influence verify`.
//!
//! Each fixture runs against an [`Implementations`] table of function pointers, so a test
//! can swap one function for a broken variant and watch the matching fixture fail.

use std::collections::BTreeMap;

use crate::annotate::DomainAnnotation;
use crate::evaluate::{metrics, ConfusionTable, MetricsReport};
use crate::features::{
    distribute, followers_friends_relation, normalize_ffr, normalize_max, relativeness_weights, sentiment_score,
    DomainWeightMap,
};
use crate::Result;

#[derive(Clone, Copy)]
pub struct Implementations {
    pub relativeness_weights: fn(&[DomainAnnotation]) -> Option<DomainWeightMap>,
    pub distribute: fn(f64, &DomainWeightMap) -> BTreeMap<String, f64>,
    pub normalize_max: fn(&[f64]) -> Vec<f64>,
    pub sentiment_score: fn(f64, f64) -> f64,
    pub followers_friends_relation: fn(u64, u64, f64) -> f64,
    pub normalize_ffr: fn(&[f64]) -> Vec<f64>,
    pub metrics: fn(&ConfusionTable) -> Result<MetricsReport>,
}

impl Default for Implementations {
    fn default() -> Self {
        Implementations {
            relativeness_weights,
            distribute,
            normalize_max,
            sentiment_score,
            followers_friends_relation,
            normalize_ffr,
            metrics,
        }
    }
}

type Check = fn(&Implementations) -> std::result::Result<(), String>;

pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    check: Check,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Fixture {
    pub fn run(&self, imp: &Implementations) -> FixtureOutcome {
        let result = (self.check)(imp);
        FixtureOutcome {
            name: self.name,
            passed: result.is_ok(),
            detail: result.err().unwrap_or_default(),
        }
    }
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "relativeness-example",
        description: "10 retweets and reply sums +15/-10 spread over domain scores 1, 0.5, 0.5",
        check: relativeness_example,
    },
    Fixture {
        name: "retweet-normalization",
        description: "R = 3831, 962, 627, 604, 398 normalizes to 1, 0.251, 0.164, 0.158, 0.104",
        check: retweet_normalization,
    },
    Fixture {
        name: "reply-normalization",
        description: "P = 1908, 992, 992, 985, 917 normalizes to 1, 0.52, 0.52, 0.516, 0.481",
        check: reply_normalization,
    },
    Fixture {
        name: "sentiment-identity",
        description: "S = SP - |SN| for five published users",
        check: sentiment_identity,
    },
    Fixture {
        name: "followers-friends",
        description: "FF_R raw values and min-max normalized values for five published users",
        check: followers_friends,
    },
    Fixture {
        name: "glm-metrics",
        description: "confusion (1114, 9, 0, 75) gives 99.249 / 0.751 / 99.199 / 100 / 99.598",
        check: glm_metrics,
    },
    Fixture {
        name: "naive-bayes-signature",
        description: "all-positive predictor: precision equals accuracy (92.917), recall 100",
        check: naive_bayes_signature,
    },
];

pub fn run_all(imp: &Implementations) -> Vec<FixtureOutcome> {
    FIXTURES.iter().map(|f| f.run(imp)).collect()
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn expect3(what: &str, got: f64, expected: f64) -> std::result::Result<(), String> {
    if (round3(got) - expected).abs() < 1e-9 {
        Ok(())
    } else {
        Err(format!("{what}: got {got:.6}, expected {expected}"))
    }
}

fn expect_exact(what: &str, got: Option<f64>, expected: f64) -> std::result::Result<(), String> {
    match got {
        Some(g) if g == expected => Ok(()),
        _ => Err(format!("{what}: got {got:?}, expected {expected}")),
    }
}

fn relativeness_example(imp: &Implementations) -> std::result::Result<(), String> {
    let anns = [
        DomainAnnotation::new("Sports", 1.0, true),
        DomainAnnotation::new("Arts", 0.5, true),
        DomainAnnotation::new("Education", 0.5, true),
    ];
    let w = (imp.relativeness_weights)(&anns).ok_or("no weights for a scored tweet")?;
    let cases: [(f64, [f64; 3]); 3] = [
        (10.0, [5.0, 2.5, 2.5]),
        (15.0, [7.5, 3.75, 3.75]),
        (-10.0, [-5.0, -2.5, -2.5]),
    ];
    for (amount, expected) in cases {
        let got = (imp.distribute)(amount, &w);
        for (domain, e) in ["Sports", "Arts", "Education"].iter().zip(expected) {
            expect_exact(&format!("{amount} to {domain}"), got.get(*domain).copied(), e)?;
        }
    }
    Ok(())
}

fn check_normalized(imp: &Implementations, raw: &[f64], published: &[f64]) -> std::result::Result<(), String> {
    let got = (imp.normalize_max)(raw);
    if got.len() != raw.len() {
        return Err(format!("{} values for {} inputs", got.len(), raw.len()));
    }
    for ((r, g), p) in raw.iter().zip(&got).zip(published) {
        expect3(&format!("normalized {r}"), *g, *p)?;
    }
    Ok(())
}

fn retweet_normalization(imp: &Implementations) -> std::result::Result<(), String> {
    check_normalized(
        imp,
        &[3831.0, 962.0, 627.0, 604.0, 398.0],
        &[1.0, 0.251, 0.164, 0.158, 0.104],
    )
}

fn reply_normalization(imp: &Implementations) -> std::result::Result<(), String> {
    check_normalized(
        imp,
        &[1908.0, 992.0, 992.0, 985.0, 917.0],
        &[1.0, 0.52, 0.52, 0.516, 0.481],
    )
}

fn sentiment_identity(imp: &Implementations) -> std::result::Result<(), String> {
    let rows = [
        ("scout2i", 75.198, -13.434, 61.764),
        ("agardnahh", 67.483, -9.570, 57.913),
        ("CodrutTurcanu", 60.068, -7.580, 52.488),
        ("johnjwall", 70.107, -21.318, 48.789),
        ("MLanghans410", 63.303, -16.022, 47.281),
    ];
    for (user, sp, sn, s) in rows {
        expect3(user, (imp.sentiment_score)(sp, sn), s)?;
    }
    Ok(())
}

/// (user, followers, friends, age in years, published FF_R')
const FFR_ROWS: [(&str, u64, u64, f64, f64); 5] = [
    ("michaelfrisby", 4150, 29, 7.0, 1.0),
    ("roseandgrey", 4686, 733, 7.0, 0.972),
    ("brettdetar", 4037, 121, 7.0, 0.966),
    ("captdirectory", 4501, 660, 7.0, 0.953),
    ("kyriiii", 4852, 119, 9.0, 0.927),
];

/// The published normalized values imply an unreported network minimum. Every rounded
/// value `p` confines that minimum `m` to an interval (solving `(v - m) / (M - m) = p ± 0.0005`);
/// this returns the midpoint of the intersection over the non-maximal rows.
pub fn implied_ffr_minimum() -> f64 {
    let raw = |f: u64, r: u64, a: f64| (f as f64 - r as f64) / a;
    let max = raw(FFR_ROWS[0].1, FFR_ROWS[0].2, FFR_ROWS[0].3);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for &(_, f, r, a, p) in &FFR_ROWS[1..] {
        let v = raw(f, r, a);
        let bounds = [p - 0.0005, p + 0.0005].map(|q| (v - q * max) / (1.0 - q));
        lo = lo.max(bounds[0].min(bounds[1]));
        hi = hi.min(bounds[0].max(bounds[1]));
    }
    (lo + hi) / 2.0
}

fn followers_friends(imp: &Implementations) -> std::result::Result<(), String> {
    let raw: Vec<f64> = FFR_ROWS
        .iter()
        .map(|&(_, f, r, a, _)| (imp.followers_friends_relation)(f, r, a))
        .collect();
    let expected_raw = (4150.0 - 29.0) / 7.0;
    if (raw[0] - expected_raw).abs() > 1e-9 {
        return Err(format!("michaelfrisby FF_R: got {}, expected {expected_raw}", raw[0]));
    }
    let equal = (imp.followers_friends_relation)(100, 100, 4.0);
    if (equal - 0.25).abs() > 1e-12 {
        return Err(format!(
            "equal followers and friends: got {equal}, expected 1/age = 0.25"
        ));
    }
    let mut column = raw.clone();
    column.push(implied_ffr_minimum());
    let normalized = (imp.normalize_ffr)(&column);
    if normalized.len() != column.len() {
        return Err(format!("{} values for {} inputs", normalized.len(), column.len()));
    }
    for (&(user, .., p), &g) in FFR_ROWS.iter().zip(&normalized) {
        expect3(user, g, p)?;
    }
    Ok(())
}

fn check_metrics(
    imp: &Implementations,
    ct: ConfusionTable,
    expected: [f64; 5],
) -> std::result::Result<MetricsReport, String> {
    let m = (imp.metrics)(&ct).map_err(|e| e.to_string())?;
    let got = [m.accuracy, m.classification_error, m.precision, m.recall, m.f_score];
    let names = ["accuracy", "classification error", "precision", "recall", "F-measure"];
    for ((name, g), e) in names.iter().zip(got).zip(expected) {
        expect3(name, 100.0 * g, e)?;
    }
    Ok(m)
}

fn glm_metrics(imp: &Implementations) -> std::result::Result<(), String> {
    check_metrics(
        imp,
        ConfusionTable::new(1114, 9, 0, 75),
        [99.249, 0.751, 99.199, 100.0, 99.598],
    )
    .map(|_| ())
}

fn naive_bayes_signature(imp: &Implementations) -> std::result::Result<(), String> {
    let m = check_metrics(
        imp,
        ConfusionTable::new(1115, 85, 0, 0),
        [92.917, 7.083, 92.917, 100.0, 96.328],
    )?;
    if m.precision != m.accuracy || m.recall != 1.0 {
        return Err("all-positive signature broken".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_pass_on_the_library() {
        for o in run_all(&Implementations::default()) {
            assert!(o.passed, "{}: {}", o.name, o.detail);
        }
    }

    #[test]
    fn implied_minimum_is_near_published_rows() {
        let m = implied_ffr_minimum();
        assert!((-272.0..-266.0).contains(&m), "{m}");
    }

    #[test]
    fn tampered_normalization_is_caught() {
        fn by_sum(values: &[f64]) -> Vec<f64> {
            let s: f64 = values.iter().sum();
            values.iter().map(|v| v / s).collect()
        }
        let imp = Implementations {
            normalize_max: by_sum,
            ..Default::default()
        };
        let failed: Vec<&str> = run_all(&imp)
            .into_iter()
            .filter(|o| !o.passed)
            .map(|o| o.name)
            .collect();
        assert_eq!(failed, ["retweet-normalization", "reply-normalization"]);
    }

    #[test]
    fn tampered_sentiment_is_caught() {
        let imp = Implementations {
            sentiment_score: |sp, sn| sp + sn.abs(),
            ..Default::default()
        };
        assert!(!FIXTURES[3].run(&imp).passed);
    }
}
