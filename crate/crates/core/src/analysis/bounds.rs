use serde::{Deserialize, Serialize};

use super::fit::linear_fit;
use crate::discretize::{hilbert_inverse_exact, left_gram, EXACT_INVERSE_MAX};
use crate::error::{Error, Result};
use crate::numerics::{ln_f64, BigFloat};
use crate::operators::{hs_norm_tail_dha, CompositionSpec};
use crate::spectra::{eigen_sym, hilbert_inverse_norm, tail_sums, Spectrum};

/// Slack in ln units when comparing against a bound fitted to touch a point.
pub const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum BoundForm {
    /// c·i^{−kappa}
    Power { kappa: f64 },
    /// c·e^{−alpha·i}
    Exponential { alpha: f64 },
    /// (c/i)·e^{−alpha·i}
    ExpOverIndex { alpha: f64 },
    /// c·e^{beta·N}, a growth bound over section sizes
    Growth { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    #[serde(flatten)]
    pub form: BoundForm,
    pub c: f64,
    pub direction: Direction,
}

impl BoundSpec {
    pub fn new(form: BoundForm, c: f64, direction: Direction) -> Self {
        Self { form, c, direction }
    }

    /// Upper curve i^{−3/2}, c = 1.
    pub fn three_halves_upper() -> Self {
        Self::new(BoundForm::Power { kappa: 1.5 }, 1.0, Direction::Upper)
    }

    /// Lower curve e^{−1.6 i}, c = 1.
    pub fn exp_lower() -> Self {
        Self::new(BoundForm::Exponential { alpha: 1.6 }, 1.0, Direction::Lower)
    }

    /// Lower curve e^{−2i}/i, c = 1.
    pub fn exp_over_index_lower() -> Self {
        Self::new(BoundForm::ExpOverIndex { alpha: 2.0 }, 1.0, Direction::Lower)
    }

    /// ln of the bound at index (or section size) `i`.
    pub fn ln_value(&self, i: usize) -> f64 {
        let x = i as f64;
        let shape = match self.form {
            BoundForm::Power { kappa } => -kappa * x.ln(),
            BoundForm::Exponential { alpha } => -alpha * x,
            BoundForm::ExpOverIndex { alpha } => -alpha * x - x.ln(),
            BoundForm::Growth { beta } => beta * x,
        };
        self.c.ln() + shape
    }

    pub fn value(&self, i: usize) -> f64 {
        self.ln_value(i).exp()
    }

    /// Same form with c chosen so the curve passes through (i, sigma).
    pub fn fitted_at(&self, i: usize, sigma: f64) -> Self {
        let unit = Self { c: 1.0, ..self.clone() };
        Self { c: (sigma.ln() - unit.ln_value(i)).exp(), ..self.clone() }
    }

    pub fn label(&self) -> String {
        let shape = match self.form {
            BoundForm::Power { kappa } => format!("i^(-{kappa})"),
            BoundForm::Exponential { alpha } => format!("exp(-{alpha} i)"),
            BoundForm::ExpOverIndex { alpha } => format!("exp(-{alpha} i)/i"),
            BoundForm::Growth { beta } => format!("exp({beta} N)"),
        };
        let dir = match self.direction {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        };
        if self.c == 1.0 {
            format!("{dir} {shape}")
        } else {
            format!("{dir} {:.6} * {shape}", self.c)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMargin {
    pub index: usize,
    /// ln σ_i − ln bound_i
    pub margin: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: BoundSpec,
    pub label: String,
    pub margins: Vec<IndexMargin>,
    pub consistent: bool,
    pub violations: Vec<usize>,
}

fn judge(bound: &BoundSpec, index: usize, ln_value: f64) -> IndexMargin {
    let margin = ln_value - bound.ln_value(index);
    let consistent = match bound.direction {
        Direction::Upper => margin <= ROUNDING_SLACK,
        Direction::Lower => margin >= -ROUNDING_SLACK,
    };
    IndexMargin { index, margin, consistent }
}

fn report(bound: &BoundSpec, margins: Vec<IndexMargin>) -> BoundReport {
    let violations: Vec<usize> = margins.iter().filter(|m| !m.consistent).map(|m| m.index).collect();
    BoundReport {
        bound: bound.clone(),
        label: bound.label(),
        consistent: violations.is_empty(),
        violations,
        margins,
    }
}

/// Signed log-margins of the trusted singular values against `b`.
pub fn check_bound(s: &Spectrum, b: &BoundSpec) -> BoundReport {
    let margins = (1..=s.trust_cutoff)
        .map(|i| {
            let l = if s.sigma(i).is_zero() { f64::NEG_INFINITY } else { ln_f64(s.sigma(i)) };
            judge(b, i, l)
        })
        .collect();
    report(b, margins)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToddRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub inverse_norm: f64,
    pub ln_inverse_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToddReport {
    pub rows: Vec<ToddRow>,
    /// margins of ‖H_N⁻¹‖₂ against e^{4N}, c = 1
    pub bound: BoundReport,
    /// smallest c with ‖H_N⁻¹‖₂ ≤ c·e^{4N} on the range
    pub smallest_c: f64,
    pub fit_window: (usize, usize),
    /// slope of ln ‖H_N⁻¹‖₂ against N
    pub growth_exponent: f64,
}

/// Exact inverses of H_N for N in `range`, checked against ‖H_N⁻¹‖₂ ≤ e^{4N}.
/// The growth exponent is fitted over N ≥ 4 inside the range (or the whole
/// range when it is shorter).
pub fn todd_check(range: std::ops::RangeInclusive<usize>, prec: u32) -> Result<ToddReport> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo < 1 || hi > EXACT_INVERSE_MAX || lo > hi {
        return Err(Error::Domain(format!("Todd check needs 1 <= N <= {EXACT_INVERSE_MAX}, got {lo}..={hi}")));
    }
    let mut rows = Vec::new();
    for n in range {
        let norm = hilbert_inverse_norm(&hilbert_inverse_exact(n)?, prec)?;
        rows.push(ToddRow { n, inverse_norm: norm.to_f64(), ln_inverse_norm: ln_f64(&norm) });
    }
    let bound = BoundSpec::new(BoundForm::Growth { beta: 4.0 }, 1.0, Direction::Upper);
    let margins = rows.iter().map(|r| judge(&bound, r.n, r.ln_inverse_norm)).collect();
    let smallest_c = rows.iter().map(|r| (r.ln_inverse_norm - 4.0 * r.n as f64).exp()).fold(0.0, f64::max);
    let fit_lo = if hi - lo >= 2 && hi >= 5 { lo.max(4) } else { lo };
    let fit: Vec<&ToddRow> = rows.iter().filter(|r| r.n >= fit_lo).collect();
    let growth_exponent = if fit.len() >= 2 {
        let x: Vec<f64> = fit.iter().map(|r| r.n as f64).collect();
        let y: Vec<f64> = fit.iter().map(|r| r.ln_inverse_norm).collect();
        linear_fit(&x, &y).1
    } else {
        f64::NAN
    };
    Ok(ToddReport { rows, bound: report(&bound, margins), smallest_c, fit_window: (fit_lo, hi), growth_exponent })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda_min: f64,
    pub bound: f64,
    pub holds: bool,
}

/// λ_min(D_N H_N D_N) ≥ 1/(N²·‖H_N⁻¹‖₂) for each N in `range`, with the
/// inverse computed exactly.
pub fn lower_bound_chain(range: std::ops::RangeInclusive<usize>, prec: u32) -> Result<Vec<ChainRow>> {
    let op: CompositionSpec = "DHa".parse()?;
    let mut rows = Vec::new();
    for n in range {
        let spec = eigen_sym(&left_gram(&op, n)?, prec)?;
        let sigma = spec.sigma(n);
        let lambda = BigFloat::with_val(prec, sigma.square_ref());
        let norm = hilbert_inverse_norm(&hilbert_inverse_exact(n)?, prec)?;
        let bound = BigFloat::with_val(prec, norm * (n * n) as u32).recip();
        rows.push(ChainRow { n, lambda_min: lambda.to_f64(), bound: bound.to_f64(), holds: lambda >= bound });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: usize,
    /// Σ_{i=n+1}^N σ_i²
    pub tail: f64,
    /// Σ_{j≥n+1} 1/(j²(2j−1))
    pub bound: f64,
    pub holds: bool,
    /// Σ_{j≥n+2} 1/(j²(2j−1)), the index shift as printed in the source
    pub shifted_bound: f64,
    pub shifted_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub rows: Vec<TailRow>,
    pub holds: bool,
    pub shifted_failures: Vec<usize>,
    pub series_tail_bound: f64,
}

/// Checks Σ_{i>n} σ_i² ≤ Σ_{j≥n+1} 1/(j²(2j−1)) for every n < N on a left
/// section spectrum of D·Ha. The right side is summed to within `tol`, and a
/// row holds only if the tail is below the series value minus that tolerance.
pub fn tail_bound_check(s: &Spectrum, tol: &BigFloat) -> Result<TailBoundReport> {
    if s.source.operator != "DHa" || s.source.scheme != "left" {
        return Err(Error::Invalid(format!(
            "tail bounds apply to left sections of DHa, got {} / {}",
            s.source.operator, s.source.scheme
        )));
    }
    let prec = tol.prec();
    let tails = tail_sums(s);
    let n = s.len();
    let mut rows = Vec::with_capacity(n);
    let mut worst_tail = BigFloat::new(prec);
    for (k, lhs) in tails.iter().enumerate() {
        let rhs = hs_norm_tail_dha(k as u64 + 1, tol)?;
        let shifted = hs_norm_tail_dha(k as u64 + 2, tol)?;
        if rhs.tail_bound > worst_tail {
            worst_tail = rhs.tail_bound.clone();
        }
        let safe = BigFloat::with_val(prec, &rhs.value - &rhs.tail_bound);
        let safe_shifted = BigFloat::with_val(prec, &shifted.value - &shifted.tail_bound);
        rows.push(TailRow {
            n: k,
            tail: lhs.to_f64(),
            bound: rhs.value.to_f64(),
            holds: *lhs <= safe,
            shifted_bound: shifted.value.to_f64(),
            shifted_holds: *lhs <= safe_shifted,
        });
    }
    Ok(TailBoundReport {
        n,
        holds: rows.iter().all(|r| r.holds),
        shifted_failures: rows.iter().filter(|r| !r.shifted_holds).map(|r| r.n).collect(),
        rows,
        series_tail_bound: worst_tail.to_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseBound {
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    /// (2γ+1)/2, the decay exponent of σ_i implied by the curve
    pub exponent: f64,
    /// (i, c2·i^{−(2γ+1)}) for i = 1..N
    pub curve: Vec<(usize, f64)>,
}

/// Smallest c₁ with T(n) ≤ c₁·n^{−2γ} for 1 ≤ n < N.
pub fn fit_tail_constant(tail: &[BigFloat], gamma: f64) -> f64 {
    tail.iter()
        .enumerate()
        .skip(1)
        .map(|(n, t)| t.to_f64() * (n as f64).powf(2.0 * gamma))
        .fold(0.0, f64::max)
}

/// Turns T(n) ≤ c₁ n^{−2γ} into σ_i² ≤ c₂ i^{−(2γ+1)} with c₂ = c₁·2^{2γ+1},
/// from σ_i² ≤ (2/i)·T(⌊i/2⌋). The tail bound is verified first.
pub fn tail_to_pointwise(tail: &[BigFloat], gamma: f64, c1: f64) -> Result<PointwiseBound> {
    if !(gamma > 0.0 && c1 >= 0.0) {
        return Err(Error::Domain(format!("need gamma > 0 and c1 >= 0, got {gamma}, {c1}")));
    }
    for (n, t) in tail.iter().enumerate().skip(1) {
        let allowed = c1 * (n as f64).powf(-2.0 * gamma);
        if t.to_f64() > allowed * (1.0 + 1e-12) {
            return Err(Error::Contract(format!(
                "tail bound not verified: T({n}) = {:e} exceeds {allowed:e}",
                t.to_f64()
            )));
        }
    }
    let all_zero = tail.iter().all(|t| t.is_zero());
    let c2 = if all_zero { 0.0 } else { c1 * 2f64.powf(2.0 * gamma + 1.0) };
    let curve = (1..=tail.len()).map(|i| (i, c2 * (i as f64).powf(-(2.0 * gamma + 1.0)))).collect();
    Ok(PointwiseBound { gamma, c1, c2, exponent: (2.0 * gamma + 1.0) / 2.0, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::SpectrumSource;

    fn synthetic(f: impl Fn(f64) -> f64, n: usize) -> Spectrum {
        let prec = 128;
        let values = (1..=n).map(|i| BigFloat::with_val(prec, f(i as f64))).collect();
        let src = SpectrumSource { operator: "synthetic".into(), scheme: "none".into(), n, gram_precision: "exact".into() };
        Spectrum::from_singular_values(values, prec, src)
    }

    #[test]
    fn synthetic_bounds() {
        let up = BoundSpec::three_halves_upper();
        assert!(check_bound(&synthetic(|i| i.powi(-2), 20), &up).consistent);
        let r = check_bound(&synthetic(|i| 1.0 / i, 20), &up);
        assert!(!r.consistent);
        assert_eq!(r.violations, (2..=20).collect::<Vec<_>>());
    }

    #[test]
    fn fig2_curve_values() {
        assert!((BoundSpec::exp_over_index_lower().value(1) - 0.1353).abs() < 1e-4);
        assert!((BoundSpec::exp_lower().value(1) - 0.2019).abs() < 1e-4);
        let f = BoundSpec::exp_lower().fitted_at(1, 0.5);
        assert!((f.value(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn todd_small() {
        let r = todd_check(1..=2, 128).unwrap();
        assert!((r.rows[0].inverse_norm - 1.0).abs() < 1e-15);
        assert!((r.rows[1].inverse_norm - 15.2111).abs() < 1e-3);
        assert!(r.bound.consistent);
        assert!(todd_check(0..=3, 128).is_err());
        assert!(todd_check(1..=14, 128).is_err());
    }

    #[test]
    fn pointwise_examples() {
        let prec = 64;
        let tail: Vec<BigFloat> = (0..10).map(|n| BigFloat::with_val(prec, if n == 0 { 2.0 } else { 1.0 / (n * n) as f64 })).collect();
        let p = tail_to_pointwise(&tail, 1.0, 1.0).unwrap();
        assert_eq!(p.c2, 8.0);
        assert_eq!(p.exponent, 1.5);
        assert!((p.curve[1].1 - 1.0).abs() < 1e-15);
        let zeros = vec![BigFloat::new(prec); 5];
        assert_eq!(tail_to_pointwise(&zeros, 1.0, 0.0).unwrap().c2, 0.0);
        assert!(tail_to_pointwise(&tail, 1.0, 0.5).is_err());
    }

    #[test]
    fn tail_check_rejects_other_operators() {
        let s = synthetic(|i| i.powi(-2), 5);
        assert!(tail_bound_check(&s, &BigFloat::with_val(128, 1e-30)).is_err());
    }

    fn dha_left(n: usize, prec: u32) -> Spectrum {
        let op: CompositionSpec = "DHa".parse().unwrap();
        eigen_sym(&left_gram(&op, n).unwrap(), prec).unwrap()
    }

    #[test]
    fn dha_tail_bound_and_index_shift() {
        let s = dha_left(20, 256);
        let r = tail_bound_check(&s, &BigFloat::with_val(256, 1e-30)).unwrap();
        assert!(r.holds);
        assert_eq!(r.rows.len(), 20);
        // the trace alone exceeds the series started one index later
        assert_eq!(r.shifted_failures.first(), Some(&0));
    }

    #[test]
    fn doubling_inequality_on_computed_spectrum() {
        let s = dha_left(20, 256);
        let t = tail_sums(&s);
        for i in 2..=20usize {
            let lhs = BigFloat::with_val(256, s.sigma(i).square_ref()) * i as u32;
            let rhs = BigFloat::with_val(256, &t[i / 2] * 2u32);
            assert!(lhs <= rhs, "i = {i}");
        }
        let c1 = fit_tail_constant(&t, 1.0);
        let p = tail_to_pointwise(&t, 1.0, c1).unwrap();
        for i in (2..=20usize).step_by(2) {
            assert!(s.sigma(i).to_f64().powi(2) <= p.curve[i - 1].1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn chain_and_todd_growth() {
        for row in lower_bound_chain(1..=8, 256).unwrap() {
            assert!(row.holds, "N = {}", row.n);
        }
        let r = todd_check(1..=12, 256).unwrap();
        assert!(r.bound.consistent);
        assert_eq!(r.fit_window, (4, 12));
        assert!(r.growth_exponent > 3.3 && r.growth_exponent < 4.0, "{}", r.growth_exponent);
    }
}
