//! Least-squares cost fits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `L' ≈ C · L · log2(nL/δ)`, for one-bit messages.
    Alpha1,
    /// `L' ≈ C · L · (1 + log2(nL/δ)/α)`.
    VariableAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    pub delta: f64,
    pub l: f64,
    pub alpha: f64,
    pub l_prime: f64,
}

impl FitPoint {
    pub fn regressor(&self, model: FitModel) -> f64 {
        let log = (self.n as f64 * self.l / self.delta).log2();
        match model {
            FitModel::Alpha1 => self.l * log,
            FitModel::VariableAlpha => self.l * (1.0 + log / self.alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadFit {
    pub model: FitModel,
    pub c: f64,
    /// `max(y/(C·x), C·x/y)` over the points.
    pub max_residual_ratio: f64,
    /// `y/(C·x)` per point, in input order.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 5 points, got {0}")]
    TooFewPoints(usize),
    #[error("L spans a factor of {0:.1}; need at least 100")]
    NarrowRange(f64),
    #[error("degenerate data")]
    Degenerate,
}

/// Fits `L' = C·x` through the origin.
pub fn fit_overhead(points: &[FitPoint], model: FitModel) -> Result<OverheadFit, FitError> {
    if points.len() < 5 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    let lo = points.iter().map(|p| p.l).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.l).fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo < 100.0 {
        return Err(FitError::NarrowRange(hi / lo));
    }
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), p| {
        let x = p.regressor(model);
        (sxy + x * p.l_prime, sxx + x * x)
    });
    if sxx <= 0.0 || sxy <= 0.0 {
        return Err(FitError::Degenerate);
    }
    let c = sxy / sxx;
    let ratios: Vec<f64> = points.iter().map(|p| p.l_prime / (c * p.regressor(model))).collect();
    let max_residual_ratio = ratios.iter().map(|&r| r.max(1.0 / r)).fold(1.0, f64::max);
    Ok(OverheadFit { model, c, max_residual_ratio, ratios })
}

/// Largest `(L'(T) - L'(0)) / T` over points with `T > 0`; `points` must include `T = 0`.
pub fn marginal_cost(points: &[(u64, f64)]) -> Option<f64> {
    let base = points.iter().find(|(t, _)| *t == 0)?.1;
    points
        .iter()
        .filter(|(t, _)| *t > 0)
        .map(|&(t, lp)| (lp - base) / t as f64)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(c: f64, noise: &[f64]) -> Vec<FitPoint> {
        [16.0, 64.0, 256.0, 1024.0, 4096.0]
            .iter()
            .zip(noise)
            .map(|(&l, &e)| {
                let mut p = FitPoint { n: 2, delta: 0.1, l, alpha: 1.0, l_prime: 0.0 };
                p.l_prime = c * p.regressor(FitModel::Alpha1) * e;
                p
            })
            .collect()
    }

    #[test]
    fn recovers_exact_constant() {
        let f = fit_overhead(&pts(7.5, &[1.0; 5]), FitModel::Alpha1).unwrap();
        assert!((f.c - 7.5).abs() < 1e-9);
        assert!((f.max_residual_ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn residuals_track_noise() {
        let f = fit_overhead(&pts(3.0, &[2.0, 1.0, 1.0, 1.0, 1.0]), FitModel::Alpha1).unwrap();
        assert!(f.max_residual_ratio > 1.9);
    }

    #[test]
    fn preconditions() {
        assert_eq!(fit_overhead(&pts(1.0, &[1.0; 5])[..4], FitModel::Alpha1), Err(FitError::TooFewPoints(4)));
        let mut p = pts(1.0, &[1.0; 5]);
        p[0].l = 1000.0;
        assert!(matches!(fit_overhead(&p, FitModel::Alpha1), Err(FitError::NarrowRange(_))));
    }

    #[test]
    fn marginal() {
        assert_eq!(marginal_cost(&[(0, 10.0), (5, 20.0), (10, 50.0)]), Some(4.0));
        assert_eq!(marginal_cost(&[(5, 20.0)]), None);
    }
}
