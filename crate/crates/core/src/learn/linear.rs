//! Logistic regression by IRLS and elastic-net GLMs by IRLS with a coordinate-descent inner solve.
//!
//! Both fit on internally standardized features. Coefficients are stored on that scale;
//! [`LinearModel::original_coefficients`] maps them back.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{logistic_loss, sigmoid, Standardizer, TrainingData, TrainingSummary};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Binomial,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Iteratively reweighted least squares.
    #[default]
    Irlsm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    pub solver: Solver,
    pub compute_p_values: bool,
    pub remove_collinear_columns: bool,
    pub add_intercept: bool,
    pub max_iterations: usize,
    /// Convergence when the largest coefficient change falls below this.
    pub tolerance: f64,
    /// Largest absolute coefficient on the standardized scale before the fit is declared
    /// non-convergent (perfect separation).
    pub coefficient_cap: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            solver: Solver::Irlsm,
            compute_p_values: true,
            remove_collinear_columns: true,
            add_intercept: true,
            max_iterations: 100,
            tolerance: 1e-10,
            coefficient_cap: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlmParams {
    pub family: Family,
    pub solver: Solver,
    pub standardization: bool,
    /// Penalty strength.
    pub lambda: f64,
    /// L1 share of the penalty: 0 is ridge, 1 is lasso.
    pub alpha: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub coefficient_cap: f64,
}

impl Default for GlmParams {
    fn default() -> Self {
        GlmParams {
            family: Family::Binomial,
            solver: Solver::Irlsm,
            standardization: true,
            lambda: 1e-2,
            alpha: 0.5,
            max_iterations: 100,
            tolerance: 1e-10,
            coefficient_cap: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub family: Family,
    pub standardizer: Standardizer,
    pub intercept: f64,
    /// One weight per input feature on the standardized scale; dropped columns hold 0.
    pub weights: Vec<f64>,
    pub dropped_columns: Vec<usize>,
    pub lambda: f64,
    pub alpha: f64,
    /// Wald p-values, intercept first; `None` for dropped columns or a singular information
    /// matrix.
    pub p_values: Option<Vec<Option<f64>>>,
}

impl LinearModel {
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        let z = self.standardizer.transform_row(x);
        self.intercept + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let eta = self.linear_predictor(x);
        match self.family {
            Family::Binomial => sigmoid(eta),
            Family::Gaussian => eta.clamp(0.0, 1.0),
        }
    }

    /// Intercept and weights on the raw feature scale.
    pub fn original_coefficients(&self) -> (f64, Vec<f64>) {
        let s = &self.standardizer;
        let weights: Vec<f64> = self.weights.iter().zip(&s.scales).map(|(w, sc)| w / sc).collect();
        let shift: f64 = weights.iter().zip(&s.means).map(|(w, m)| w * m).sum();
        (self.intercept - shift, weights)
    }
}

/// Columns kept after modified Gram-Schmidt on standardized columns: a column is dropped when
/// its residual after projecting out the kept ones is numerically zero.
fn independent_columns(z: &[Vec<f64>]) -> Vec<usize> {
    let n = z.len();
    let p = z.first().map_or(0, Vec::len);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for j in 0..p {
        let mut v: Vec<f64> = z.iter().map(|r| r[j]).collect();
        for q in &basis {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
        let norm2: f64 = v.iter().map(|a| a * a).sum();
        if norm2 > 1e-9 * n as f64 {
            let norm = norm2.sqrt();
            basis.push(v.into_iter().map(|a| a / norm).collect());
            kept.push(j);
        }
    }
    kept
}

struct Design {
    /// Row-major design, intercept column first when present.
    rows: Vec<Vec<f64>>,
}

impl Design {
    fn new(z: &[Vec<f64>], columns: &[usize], intercept: bool) -> Self {
        let rows = z
            .iter()
            .map(|r| {
                let mut row = Vec::with_capacity(columns.len() + 1);
                if intercept {
                    row.push(1.0);
                }
                row.extend(columns.iter().map(|&j| r[j]));
                row
            })
            .collect();
        Design { rows }
    }

    fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    fn eta(&self, beta: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^T W A` for per-row weights `w`.
    fn weighted_gram(&self, w: &[f64]) -> DMatrix<f64> {
        let k = self.width();
        let mut h = DMatrix::zeros(k, k);
        for (r, &wi) in self.rows.iter().zip(w) {
            for a in 0..k {
                for b in 0..=a {
                    h[(a, b)] += wi * r[a] * r[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        h
    }
}

/// Solves `h x = g`, adding a small ridge when `h` is not positive definite.
fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    if let Some(ch) = h.clone().cholesky() {
        return ch.solve(g);
    }
    let k = h.nrows();
    let scale = (h.trace() / k.max(1) as f64).max(1.0);
    let mut ridge = 1e-10 * scale;
    loop {
        let damped = h + DMatrix::identity(k, k) * ridge;
        if let Some(ch) = damped.cholesky() {
            return ch.solve(g);
        }
        ridge *= 10.0;
    }
}

/// Largest `s` in `[0, t]` keeping every coefficient of `beta + s * delta` within `cap`.
fn capped_step(beta: &[f64], delta: &[f64], t: f64, cap: f64) -> (f64, bool) {
    let mut s = t;
    for (b, d) in beta.iter().zip(delta) {
        let next = b + s * d;
        if next.abs() > cap {
            let limit = (cap.copysign(*d) - b) / d;
            s = s.min(limit.max(0.0));
        }
    }
    (s, s < t)
}

fn wald_p_values(h: &DMatrix<f64>, beta: &[f64]) -> Option<Vec<f64>> {
    let inv = h.clone().try_inverse()?;
    Some(
        beta.iter()
            .enumerate()
            .map(|(i, b)| {
                let se = inv[(i, i)].max(0.0).sqrt();
                let z = (b / se).abs();
                statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
            })
            .collect(),
    )
}

fn unpack(design_beta: &[f64], intercept: bool, columns: &[usize], p: usize) -> (f64, Vec<f64>) {
    let (b0, rest) = if intercept {
        (design_beta[0], &design_beta[1..])
    } else {
        (0.0, design_beta)
    };
    let mut weights = vec![0.0; p];
    for (&j, &b) in columns.iter().zip(rest) {
        weights[j] = b;
    }
    (b0, weights)
}

pub fn train_logistic(data: &TrainingData, params: &LogisticParams) -> Result<(LinearModel, TrainingSummary)> {
    let p = data.n_features();
    let standardizer = Standardizer::fit(&data.x);
    let z = standardizer.transform(&data.x);
    let columns = if params.remove_collinear_columns {
        independent_columns(&z)
    } else {
        (0..p).collect()
    };
    let design = Design::new(&z, &columns, params.add_intercept);
    let k = design.width();
    let mut beta = vec![0.0; k];
    let mut eta = design.eta(&beta);
    let mut loss = logistic_loss(&eta, &data.y);
    let mut summary = TrainingSummary {
        loss_history: vec![loss],
        ..Default::default()
    };

    for iter in 0..params.max_iterations {
        summary.iterations = iter + 1;
        let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let w: Vec<f64> = mu.iter().map(|m| m * (1.0 - m)).collect();
        let mut g = DVector::zeros(k);
        for ((r, m), &y) in design.rows.iter().zip(&mu).zip(&data.y) {
            let resid = if y { 1.0 } else { 0.0 } - m;
            for a in 0..k {
                g[a] += r[a] * resid;
            }
        }
        let delta: Vec<f64> = solve_spd(&design.weighted_gram(&w), &g).iter().copied().collect();

        // step halving keeps the loss non-increasing
        let mut t = 1.0;
        let (mut next, mut next_eta, mut next_loss);
        loop {
            next = beta.iter().zip(&delta).map(|(b, d)| b + t * d).collect::<Vec<_>>();
            next_eta = design.eta(&next);
            next_loss = logistic_loss(&next_eta, &data.y);
            if next_loss <= loss || t < 1e-10 {
                break;
            }
            t *= 0.5;
        }
        if next_loss > loss {
            summary.converged = true;
            break;
        }
        let (s, hit_cap) = capped_step(&beta, &delta, t, params.coefficient_cap);
        if hit_cap {
            next = beta.iter().zip(&delta).map(|(b, d)| b + s * d).collect();
            next_eta = design.eta(&next);
            next_loss = logistic_loss(&next_eta, &data.y);
        }
        let change = delta.iter().map(|d| (d * s).abs()).fold(0.0, f64::max);
        beta = next;
        eta = next_eta;
        loss = next_loss;
        summary.loss_history.push(loss);
        if hit_cap {
            let msg = format!(
                "coefficients reached the cap of {} (perfectly separable data?)",
                params.coefficient_cap
            );
            log::warn!("logistic: {msg}");
            summary.warnings.push(msg);
            break;
        }
        if change < params.tolerance {
            summary.converged = true;
            break;
        }
    }
    if !summary.converged && summary.warnings.is_empty() {
        summary
            .warnings
            .push(format!("no convergence within {} iterations", params.max_iterations));
    }
    summary.final_loss = Some(loss);

    let p_values = if params.compute_p_values {
        let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let w: Vec<f64> = mu.iter().map(|m| m * (1.0 - m)).collect();
        wald_p_values(&design.weighted_gram(&w), &beta).map(|pv| {
            let mut out = vec![None; p + 1];
            let mut it = pv.into_iter();
            if params.add_intercept {
                out[0] = it.next();
            }
            for (&j, v) in columns.iter().zip(it) {
                out[j + 1] = Some(v);
            }
            out
        })
    } else {
        None
    };

    let (intercept, weights) = unpack(&beta, params.add_intercept, &columns, p);
    let dropped_columns = (0..p).filter(|j| !columns.contains(j)).collect();
    Ok((
        LinearModel {
            family: Family::Binomial,
            standardizer,
            intercept,
            weights,
            dropped_columns,
            lambda: 0.0,
            alpha: 0.0,
            p_values,
        },
        summary,
    ))
}

fn soft_threshold(v: f64, gamma: f64) -> f64 {
    if v > gamma {
        v - gamma
    } else if v < -gamma {
        v + gamma
    } else {
        0.0
    }
}

struct Penalty {
    lambda: f64,
    alpha: f64,
}

impl Penalty {
    fn value(&self, weights: &[f64]) -> f64 {
        let l2: f64 = weights.iter().map(|w| w * w).sum();
        let l1: f64 = weights.iter().map(|w| w.abs()).sum();
        self.lambda * ((1.0 - self.alpha) / 2.0 * l2 + self.alpha * l1)
    }
}

/// Coordinate descent for `1/2 sum w_i (z_i - b0 - x_i b)^2 + penalty(b)`, starting from
/// `(b0, b)`. The intercept is not penalized.
fn weighted_elastic_net(x: &[Vec<f64>], z: &[f64], w: &[f64], penalty: &Penalty, b0: &mut f64, b: &mut [f64]) {
    let p = b.len();
    let mut resid: Vec<f64> = x
        .iter()
        .zip(z)
        .map(|(r, zi)| zi - *b0 - r.iter().zip(b.iter()).map(|(a, c)| a * c).sum::<f64>())
        .collect();
    let wsum: f64 = w.iter().sum();
    let xw: Vec<f64> = (0..p)
        .map(|j| x.iter().zip(w).map(|(r, wi)| wi * r[j] * r[j]).sum())
        .collect();
    let l1 = penalty.lambda * penalty.alpha;
    let l2 = penalty.lambda * (1.0 - penalty.alpha);
    if l1 == 0.0 {
        // smooth problem: solve the normal equations instead of sweeping, which crawls when
        // near-separable data leaves the weights badly conditioned
        let active: Vec<usize> = (0..p).filter(|&j| xw[j] > 0.0).collect();
        let design = Design::new(x, &active, true);
        let k = design.width();
        let mut h = design.weighted_gram(w);
        let mut g = DVector::zeros(k);
        for ((r, &zi), &wi) in design.rows.iter().zip(z).zip(w) {
            for a in 0..k {
                g[a] += wi * r[a] * zi;
            }
        }
        for a in 1..k {
            h[(a, a)] += l2;
        }
        let beta = solve_spd(&h, &g);
        *b0 = beta[0];
        b.iter_mut().for_each(|v| *v = 0.0);
        for (i, &j) in active.iter().enumerate() {
            b[j] = beta[i + 1];
        }
        return;
    }
    for _sweep in 0..100_000 {
        let mut max_change: f64 = 0.0;
        let shift: f64 = resid.iter().zip(w).map(|(r, wi)| r * wi).sum::<f64>() / wsum;
        *b0 += shift;
        resid.iter_mut().for_each(|r| *r -= shift);
        max_change = max_change.max(shift.abs());
        for j in 0..p {
            if xw[j] == 0.0 {
                continue;
            }
            let grad: f64 = x
                .iter()
                .zip(&resid)
                .zip(w)
                .map(|((r, e), wi)| wi * r[j] * e)
                .sum::<f64>()
                + xw[j] * b[j];
            let new = soft_threshold(grad, l1) / (xw[j] + l2);
            let delta = new - b[j];
            if delta != 0.0 {
                b[j] = new;
                for (e, r) in resid.iter_mut().zip(x) {
                    *e -= delta * r[j];
                }
                max_change = max_change.max(delta.abs() * xw[j].sqrt());
            }
        }
        if max_change < 1e-13 * (1.0 + wsum.sqrt()) {
            break;
        }
    }
}

/// Elastic-net GLM. The objective is the summed loss (negative log-likelihood for the
/// binomial family, half the residual sum of squares for gaussian) plus
/// `lambda * ((1 - alpha) / 2 * |b|_2^2 + alpha * |b|_1)` over the 12 feature weights.
pub fn train_glm_elastic_net(data: &TrainingData, params: &GlmParams) -> Result<(LinearModel, TrainingSummary)> {
    let p = data.n_features();
    let standardizer = if params.standardization {
        Standardizer::fit(&data.x)
    } else {
        Standardizer {
            means: vec![0.0; p],
            scales: vec![1.0; p],
        }
    };
    let x = standardizer.transform(&data.x);
    let y: Vec<f64> = data.y.iter().map(|&y| if y { 1.0 } else { 0.0 }).collect();
    let penalty = Penalty {
        lambda: params.lambda,
        alpha: params.alpha,
    };
    let mut b0 = 0.0;
    let mut b = vec![0.0; p];
    let mut summary = TrainingSummary::default();

    let eta_of = |b0: f64, b: &[f64]| -> Vec<f64> {
        x.iter()
            .map(|r| b0 + r.iter().zip(b).map(|(a, c)| a * c).sum::<f64>())
            .collect()
    };

    match params.family {
        Family::Gaussian => {
            let w = vec![1.0; y.len()];
            weighted_elastic_net(&x, &y, &w, &penalty, &mut b0, &mut b);
            let eta = eta_of(b0, &b);
            let rss: f64 = eta.iter().zip(&y).map(|(e, t)| (t - e) * (t - e)).sum();
            let loss = 0.5 * rss + penalty.value(&b);
            summary.iterations = 1;
            summary.converged = true;
            summary.final_loss = Some(loss);
            summary.loss_history.push(loss);
        }
        Family::Binomial => {
            let objective = |b0: f64, b: &[f64]| logistic_loss(&eta_of(b0, b), &data.y) + penalty.value(b);
            let mut loss = objective(b0, &b);
            summary.loss_history.push(loss);
            for iter in 0..params.max_iterations {
                summary.iterations = iter + 1;
                let eta = eta_of(b0, &b);
                let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
                let w: Vec<f64> = mu.iter().map(|m| (m * (1.0 - m)).max(1e-10)).collect();
                let z: Vec<f64> = eta
                    .iter()
                    .zip(&mu)
                    .zip(&w)
                    .zip(&y)
                    .map(|(((e, m), wi), t)| e + (t - m) / wi)
                    .collect();
                let (mut cb0, mut cb) = (b0, b.clone());
                weighted_elastic_net(&x, &z, &w, &penalty, &mut cb0, &mut cb);

                let old: Vec<f64> = std::iter::once(b0).chain(b.iter().copied()).collect();
                let delta: Vec<f64> = std::iter::once(cb0 - b0)
                    .chain(cb.iter().zip(&b).map(|(c, o)| c - o))
                    .collect();
                let mut t = 1.0;
                let mut next_loss;
                loop {
                    let trial: Vec<f64> = old.iter().zip(&delta).map(|(o, d)| o + t * d).collect();
                    next_loss = objective(trial[0], &trial[1..]);
                    if next_loss <= loss || t < 1e-10 {
                        break;
                    }
                    t *= 0.5;
                }
                if next_loss > loss {
                    summary.converged = true;
                    break;
                }
                let (s, hit_cap) = capped_step(&old, &delta, t, params.coefficient_cap);
                let next: Vec<f64> = old.iter().zip(&delta).map(|(o, d)| o + s * d).collect();
                let change = delta.iter().map(|d| (d * s).abs()).fold(0.0, f64::max);
                b0 = next[0];
                b.copy_from_slice(&next[1..]);
                loss = objective(b0, &b);
                summary.loss_history.push(loss);
                if hit_cap {
                    let msg = format!(
                        "coefficients reached the cap of {} (perfectly separable data?)",
                        params.coefficient_cap
                    );
                    log::warn!("glm: {msg}");
                    summary.warnings.push(msg);
                    break;
                }
                if change < params.tolerance {
                    summary.converged = true;
                    break;
                }
            }
            if !summary.converged && summary.warnings.is_empty() {
                summary
                    .warnings
                    .push(format!("no convergence within {} iterations", params.max_iterations));
            }
            summary.final_loss = Some(loss);
        }
    }
    if !b0.is_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("glm produced non-finite coefficients".into()));
    }
    Ok((
        LinearModel {
            family: params.family,
            standardizer,
            intercept: b0,
            weights: b,
            dropped_columns: Vec::new(),
            lambda: params.lambda,
            alpha: params.alpha,
            p_values: None,
        },
        summary,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(x: Vec<Vec<f64>>, y: Vec<bool>) -> TrainingData {
        TrainingData::new(x, y).unwrap()
    }

    /// Overlapping classes so the maximum-likelihood estimate exists.
    fn noisy(n: usize) -> TrainingData {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let a = ((i * 7919) % 101) as f64 / 50.0 - 1.0;
            let b = ((i * 104_729) % 97) as f64 / 24.0 - 2.0;
            let c = ((i * 31) % 13) as f64;
            let score = 1.5 * a - 0.7 * b + 0.1 * c + (((i * 13) % 7) as f64 - 3.0) * 0.6;
            x.push(vec![a, b, c]);
            y.push(score > 0.3);
        }
        data(x, y)
    }

    #[test]
    fn intercept_only_fits_base_rate() {
        let x = vec![vec![0.0, 0.0]; 10];
        let y = (0..10).map(|i| i < 3).collect();
        let (m, s) = train_logistic(&data(x, y), &LogisticParams::default()).unwrap();
        assert!((m.intercept - (0.3f64 / 0.7).ln()).abs() < 1e-9);
        assert_eq!(m.weights, vec![0.0, 0.0]);
        assert_eq!(m.dropped_columns, vec![0, 1]);
        assert!(s.converged);
    }

    #[test]
    fn symmetric_data_has_zero_intercept() {
        let x = vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0], vec![-0.5], vec![0.5]];
        let y = vec![false, true, false, true, false, true];
        let (m, _) = train_logistic(&data(x, y), &LogisticParams::default()).unwrap();
        assert!(m.intercept.abs() < 1e-8);
    }

    #[test]
    fn separable_data_hits_cap_with_monotone_loss() {
        let d = data(vec![vec![-1.0], vec![1.0]], vec![false, true]);
        let (m, s) = train_logistic(&d, &LogisticParams::default()).unwrap();
        assert!(!s.converged);
        assert!(m.weights[0].abs() <= 30.0 + 1e-9);
        assert!(s.loss_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn logistic_loss_never_increases() {
        let (_, s) = train_logistic(&noisy(80), &LogisticParams::default()).unwrap();
        assert!(s.converged);
        assert!(s.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn collinear_column_is_removed() {
        let base = noisy(60);
        let x = base.x.iter().map(|r| vec![r[0], r[1], 2.0 * r[0] - r[1]]).collect();
        let (m, s) = train_logistic(&data(x, base.y), &LogisticParams::default()).unwrap();
        assert_eq!(m.dropped_columns, vec![2]);
        assert!(s.converged);
        let pv = m.p_values.unwrap();
        assert!(pv[3].is_none() && pv[1].is_some());
        assert!(pv.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn unpenalized_glm_matches_irls() {
        let d = noisy(120);
        let (irls, _) = train_logistic(&d, &LogisticParams::default()).unwrap();
        let (glm, s) = train_glm_elastic_net(
            &d,
            &GlmParams {
                lambda: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(s.converged);
        assert!((irls.intercept - glm.intercept).abs() < 1e-6);
        for (a, b) in irls.weights.iter().zip(&glm.weights) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(s.loss_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn huge_penalty_leaves_intercept_at_base_rate() {
        let d = noisy(50);
        let rate = d.positives() as f64 / d.len() as f64;
        let (m, _) = train_glm_elastic_net(
            &d,
            &GlmParams {
                lambda: 1e6,
                alpha: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.weights.iter().all(|w| *w == 0.0));
        assert!((m.intercept - (rate / (1.0 - rate)).ln()).abs() < 1e-8);
    }

    #[test]
    fn ridge_splits_and_lasso_picks_duplicated_columns() {
        let base = noisy(80);
        let x: Vec<Vec<f64>> = base.x.iter().map(|r| vec![r[0], r[0]]).collect();
        let d = data(x, base.y);
        let fit = |alpha| {
            train_glm_elastic_net(
                &d,
                &GlmParams {
                    lambda: 1.0,
                    alpha,
                    ..Default::default()
                },
            )
            .unwrap()
            .0
        };
        let ridge = fit(0.0);
        assert!((ridge.weights[0] - ridge.weights[1]).abs() < 1e-6);
        assert!(ridge.weights[0] > 0.1);
        let lasso = fit(1.0);
        assert!(lasso.weights[0] > 0.1);
        assert!(lasso.weights[1].abs() < 1e-12);
    }

    #[test]
    fn gaussian_family_is_least_squares() {
        // y = x exactly representable at lambda 0
        let x = vec![vec![0.0], vec![1.0], vec![0.0], vec![1.0]];
        let y = vec![false, true, false, true];
        let (m, _) = train_glm_elastic_net(
            &data(x, y),
            &GlmParams {
                family: Family::Gaussian,
                lambda: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((m.predict_proba(&[1.0]) - 1.0).abs() < 1e-9);
        assert!(m.predict_proba(&[0.0]).abs() < 1e-9);
        assert_eq!(m.predict_proba(&[5.0]), 1.0);
    }

    #[test]
    fn affine_rescaling_leaves_predictions_unchanged() {
        let d = noisy(60);
        let scaled = data(
            d.x.iter()
                .map(|r| vec![1000.0 * r[0] + 7.0, -0.01 * r[1], r[2] + 1e4])
                .collect(),
            d.y.clone(),
        );
        let (a, _) = train_logistic(&d, &LogisticParams::default()).unwrap();
        let (b, _) = train_logistic(&scaled, &LogisticParams::default()).unwrap();
        let (c, _) = train_glm_elastic_net(&d, &GlmParams::default()).unwrap();
        let (e, _) = train_glm_elastic_net(&scaled, &GlmParams::default()).unwrap();
        for (r, s) in d.x.iter().zip(&scaled.x) {
            assert!((a.predict_proba(r) - b.predict_proba(s)).abs() < 1e-6);
            assert!((c.predict_proba(r) - e.predict_proba(s)).abs() < 1e-6);
        }
    }

    #[test]
    fn original_scale_coefficients_reproduce_predictor() {
        let d = noisy(40);
        let (m, _) = train_logistic(&d, &LogisticParams::default()).unwrap();
        let (b0, w) = m.original_coefficients();
        for r in &d.x {
            let eta = b0 + r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            assert!((eta - m.linear_predictor(r)).abs() < 1e-9);
        }
    }
}
