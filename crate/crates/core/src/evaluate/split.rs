use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.6,
            seed: 0,
            stratified: true,
        }
    }
}

/// Row indices, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class training counts by largest remainder, so the class totals add up to
/// `round(n * fraction)`; each class keeps at least one row on either side.
fn apportion(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let n: usize = class_sizes.iter().sum();
    let target = (n as f64 * fraction).round() as usize;
    let exact: Vec<f64> = class_sizes.iter().map(|&c| c as f64 * fraction).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut remaining = target.saturating_sub(counts.iter().sum());
    for &c in order.iter().cycle().take(order.len() * 2) {
        if remaining == 0 {
            break;
        }
        if counts[c] < class_sizes[c] {
            counts[c] += 1;
            remaining -= 1;
        }
    }
    counts
        .iter()
        .zip(class_sizes)
        .map(|(&t, &size)| t.clamp(1, size - 1))
        .collect()
}

pub fn split_indices(labels: &[bool], spec: &SplitSpec) -> Result<Split> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train_fraction must be in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let groups: Vec<Vec<usize>> = if spec.stratified {
        vec![
            (0..labels.len()).filter(|&i| !labels[i]).collect(),
            (0..labels.len()).filter(|&i| labels[i]).collect(),
        ]
    } else {
        vec![(0..labels.len()).collect()]
    };
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(Error::InvalidData(format!(
            "cannot split: a {} has only {} row(s); at least 2 are needed",
            if spec.stratified { "class" } else { "dataset" },
            g.len()
        )));
    }
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let counts = apportion(&sizes, spec.train_fraction);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (mut group, count) in groups.into_iter().zip(counts) {
        group.shuffle(&mut rng);
        train.extend_from_slice(&group[..count]);
        test.extend_from_slice(&group[count..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

pub fn split(matrix: &FeatureMatrix, spec: &SplitSpec) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let s = split_indices(&matrix.targets()?, spec)?;
    Ok((matrix.subset(&s.train), matrix.subset(&s.test)))
}
