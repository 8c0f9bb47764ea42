//! Gaussian naive Bayes, evaluated in log space.

use serde::{Deserialize, Serialize};

use super::{sigmoid, TrainingData};
use crate::{Error, Result};

/// Variance floor, relative to the largest feature variance of the training data when that
/// exceeds 1.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NaiveBayesParams {
    /// Add-one smoothing of class counts plus a variance floor on every conditional.
    pub laplace_correction: bool,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams {
            laplace_correction: true,
        }
    }
}

/// Index 0 is the non-influencer class, index 1 the influencer class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

fn column_moments(x: &[&Vec<f64>], p: usize) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let mut mean = vec![0.0; p];
    for row in x {
        for (m, v) in mean.iter_mut().zip(row.iter()) {
            *m += v / n;
        }
    }
    let mut var = vec![0.0; p];
    for row in x {
        for ((s, v), m) in var.iter_mut().zip(row.iter()).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    (mean, var)
}

pub fn train_naive_bayes(data: &TrainingData, params: &NaiveBayesParams) -> Result<NaiveBayesModel> {
    let p = data.n_features();
    let n = data.len() as f64;
    let all: Vec<&Vec<f64>> = data.x.iter().collect();
    let (_, total_var) = column_moments(&all, p);
    let floor = VARIANCE_FLOOR * total_var.iter().copied().fold(0.0, f64::max).max(1.0);

    let mut priors = [0.0; 2];
    let mut means: [Vec<f64>; 2] = Default::default();
    let mut variances: [Vec<f64>; 2] = Default::default();
    for class in 0..2 {
        let rows: Vec<&Vec<f64>> = data
            .x
            .iter()
            .zip(&data.y)
            .filter(|(_, &y)| y == (class == 1))
            .map(|(x, _)| x)
            .collect();
        let count = rows.len() as f64;
        priors[class] = if params.laplace_correction {
            (count + 1.0) / (n + 2.0)
        } else {
            count / n
        };
        let (mean, mut var) = column_moments(&rows, p);
        if params.laplace_correction {
            var.iter_mut().for_each(|v| *v += floor);
        } else if let Some(j) = var.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Training(format!(
                "feature {j} has zero variance in class {class}; enable laplace_correction"
            )));
        }
        means[class] = mean;
        variances[class] = var;
    }
    Ok(NaiveBayesModel {
        priors,
        means,
        variances,
    })
}

impl NaiveBayesModel {
    pub fn log_joint(&self, x: &[f64], class: usize) -> f64 {
        let mut lp = self.priors[class].ln();
        for ((v, m), s2) in x.iter().zip(&self.means[class]).zip(&self.variances[class]) {
            lp += -0.5 * (2.0 * std::f64::consts::PI * s2).ln() - (v - m) * (v - m) / (2.0 * s2);
        }
        lp
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let (l0, l1) = (self.log_joint(x, 0), self.log_joint(x, 1));
        if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
            return self.priors[1];
        }
        sigmoid(l1 - l0)
    }

    /// Posterior from the plain product of densities; underflows where the log form does not.
    pub fn predict_proba_direct(&self, x: &[f64]) -> f64 {
        let joint = |c: usize| {
            let mut prod = self.priors[c];
            for ((v, m), s2) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                prod *= (-(v - m) * (v - m) / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt();
            }
            prod
        };
        let (j0, j1) = (joint(0), joint(1));
        j1 / (j0 + j1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(x: Vec<Vec<f64>>, y: Vec<bool>) -> TrainingData {
        TrainingData::new(x, y).unwrap()
    }

    #[test]
    fn symmetric_midpoint_is_one_half() {
        let m = NaiveBayesModel {
            priors: [0.5, 0.5],
            means: [vec![0.0], vec![2.0]],
            variances: [vec![1.0], vec![1.0]],
        };
        assert!((m.predict_proba(&[1.0]) - 0.5).abs() < 1e-15);
        assert!(m.predict_proba(&[1.5]) > 0.5);
    }

    #[test]
    fn separated_by_sign() {
        let d = data(
            vec![vec![-3.0], vec![-2.0], vec![-1.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![false, false, false, true, true, true],
        );
        let m = train_naive_bayes(&d, &NaiveBayesParams::default()).unwrap();
        // class means -2 and 2, equal variances 2/3 (+floor), equal priors
        assert!((m.means[1][0] - 2.0).abs() < 1e-12);
        assert!((m.variances[0][0] - 2.0 / 3.0).abs() < 1e-6);
        for (x, y) in d.x.iter().zip(&d.y) {
            assert_eq!(m.predict_proba(x) > 0.5, *y);
        }
        assert!((m.predict_proba(&[0.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_classes_give_one_half() {
        let d = data(
            vec![vec![1.0, 4.0], vec![2.0, 5.0], vec![1.0, 4.0], vec![2.0, 5.0]],
            vec![true, true, false, false],
        );
        let m = train_naive_bayes(&d, &NaiveBayesParams::default()).unwrap();
        for x in [[0.0, 0.0], [1.5, 4.5], [100.0, -3.0]] {
            assert!((m.predict_proba(&x) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_variance_needs_correction() {
        let d = data(
            vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![5.0, 0.0], vec![6.0, 0.0]],
            vec![false, false, true, true],
        );
        let off = NaiveBayesParams {
            laplace_correction: false,
        };
        assert!(matches!(train_naive_bayes(&d, &off), Err(Error::Training(_))));
        let m = train_naive_bayes(&d, &NaiveBayesParams::default()).unwrap();
        for x in [[0.0, 0.0], [5.5, 3.0], [1.0, -2.0]] {
            assert!(m.predict_proba(&x).is_finite());
        }
        assert_eq!(m.priors, [0.5, 0.5]);
    }

    #[test]
    fn log_space_matches_direct_product() {
        let d = data(
            vec![
                vec![0.1, 3.0, -1.0],
                vec![0.4, 2.5, -0.5],
                vec![0.3, 3.3, -0.9],
                vec![1.2, 1.0, 0.4],
                vec![1.0, 0.7, 0.9],
                vec![1.6, 1.3, 0.2],
                vec![1.1, 0.2, 0.5],
            ],
            vec![false, false, false, true, true, true, true],
        );
        let m = train_naive_bayes(&d, &NaiveBayesParams::default()).unwrap();
        for x in [[0.0, 2.0, 0.0], [1.0, 1.0, 0.0], [0.7, 2.2, -0.2], [0.5, 1.5, 0.1]] {
            assert!((m.predict_proba(&x) - m.predict_proba_direct(&x)).abs() < 1e-10);
        }
        assert!((m.priors.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
