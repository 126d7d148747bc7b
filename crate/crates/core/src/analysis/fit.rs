use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ln_f64;
use crate::spectra::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    /// σ_i ≈ c·i^{−κ}
    Power,
    /// σ_i ≈ c·e^{−αi}
    Exponential,
}

/// Least-squares decay fit over an index window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub c: f64,
    /// κ for the power model, α for the exponential one.
    pub rate: f64,
    pub window: (usize, usize),
    /// max |log₁₀ σ_i − log₁₀ model_i| over the window.
    pub residual_log10: f64,
    /// min and max of −ln σ_i / ln i over the window (indices ≥ 2).
    pub exponent_range: Option<(f64, f64)>,
}

impl DecayFit {
    pub fn predict(&self, i: usize) -> f64 {
        let x = i as f64;
        match self.model {
            DecayModel::Power => self.c * x.powf(-self.rate),
            DecayModel::Exponential => self.c * (-self.rate * x).exp(),
        }
    }
}

/// Ordinary least squares y ≈ a + b·x; returns (a, b).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Fits `model` to (index, ln σ) pairs. Needs at least two points.
pub fn fit_points(model: DecayModel, points: &[(usize, f64)]) -> Result<DecayFit> {
    if points.len() < 2 {
        return Err(Error::Invalid("a decay fit needs at least two points".into()));
    }
    let x: Vec<f64> = points
        .iter()
        .map(|&(i, _)| match model {
            DecayModel::Power => (i as f64).ln(),
            DecayModel::Exponential => i as f64,
        })
        .collect();
    let y: Vec<f64> = points.iter().map(|&(_, l)| l).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("cannot fit zero singular values".into()));
    }
    let (a, b) = linear_fit(&x, &y);
    let residual_log10 = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| ((a + b * xi) - yi).abs())
        .fold(0.0, f64::max)
        / std::f64::consts::LN_10;
    let exps: Vec<f64> = points.iter().filter(|(i, _)| *i >= 2).map(|&(i, l)| -l / (i as f64).ln()).collect();
    let exponent_range = (!exps.is_empty()).then(|| {
        (exps.iter().copied().fold(f64::INFINITY, f64::min), exps.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    });
    Ok(DecayFit {
        model,
        c: a.exp(),
        rate: -b,
        window: (points[0].0, points[points.len() - 1].0),
        residual_log10,
        exponent_range,
    })
}

/// [max(3, i_trust/4), i_trust].
pub fn default_window(s: &Spectrum) -> (usize, usize) {
    let hi = s.trust_cutoff;
    ((hi / 4).max(3), hi)
}

/// Fits σ_i over `window` (one-based, inclusive), which must lie inside the
/// trusted range and contain at least four indices.
pub fn fit_decay(s: &Spectrum, model: DecayModel, window: (usize, usize)) -> Result<DecayFit> {
    let (lo, hi) = window;
    if lo < 1 || hi < lo || hi - lo + 1 < 4 {
        return Err(Error::Invalid(format!("fit window {lo}:{hi} must hold at least 4 indices")));
    }
    if hi > s.trust_cutoff {
        return Err(Error::Invalid(format!(
            "fit window {lo}:{hi} reaches past the trusted range 1:{}",
            s.trust_cutoff
        )));
    }
    let points: Vec<(usize, f64)> = (lo..=hi).map(|i| (i, ln_f64(s.sigma(i)))).collect();
    fit_points(model, &points)
}
