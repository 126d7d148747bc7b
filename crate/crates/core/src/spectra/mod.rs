//! Singular spectra of assembled Gram matrices, tail sums and trust marks.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::discretize::{GramEntries, GramMatrix, HilbertInverse};
use crate::error::{Error, Result};
use crate::linalg::{FloatMatrix, SymMatrix};
use crate::numerics::{float_from_hex, float_to_hex, log10_f64, working_epsilon, BigFloat, DOUBLE_PRECISION};

mod jacobi;

pub use jacobi::{jacobi, Eigen};

/// Agreement tolerance of `trust_cutoff` when none is given.
pub const DEFAULT_REL_TOL: f64 = 0.05;

/// Where a spectrum came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumSource {
    pub operator: String,
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    /// Arithmetic of the Gram matrix: "exact" or a bit count.
    pub gram_precision: String,
}

/// Singular values σ₁ ≥ … ≥ σ_N ≥ 0 of a discretized operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<BigFloat>,
    pub precision: u32,
    /// Largest i with σ_i > σ₁·2^{−(p−g)}.
    pub trust_cutoff: usize,
    pub source: SpectrumSource,
}

impl Spectrum {
    /// Builds a spectrum from eigenvalues of a Gram matrix (descending, ≥ 0).
    pub fn from_eigenvalues(eigenvalues: &[BigFloat], precision: u32, source: SpectrumSource) -> Self {
        let values: Vec<BigFloat> = eigenvalues.iter().map(|l| BigFloat::with_val(precision, l.sqrt_ref())).collect();
        Self::from_singular_values(values, precision, source)
    }

    pub fn from_singular_values(values: Vec<BigFloat>, precision: u32, source: SpectrumSource) -> Self {
        let trust_cutoff = match values.first() {
            Some(s1) if !s1.is_zero() => {
                let floor = BigFloat::with_val(precision, s1 * working_epsilon(precision));
                values.iter().take_while(|s| **s > floor).count()
            }
            _ => 0,
        };
        Self { values, precision, trust_cutoff, source }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// σ_i, one-based.
    pub fn sigma(&self, i: usize) -> &BigFloat {
        &self.values[i - 1]
    }

    pub fn is_trusted(&self, i: usize) -> bool {
        i >= 1 && i <= self.trust_cutoff
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|x| x.to_f64()).collect()
    }

    pub fn log10(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|x| if x.is_zero() { f64::NEG_INFINITY } else { log10_f64(x) })
            .collect()
    }

    /// CSV with header `index,sigma,log10_sigma,trusted`, 16 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,sigma,log10_sigma,trusted\n");
        for (i, (s, l)) in self.values.iter().zip(self.log10()).enumerate() {
            let _ = writeln!(out, "{},{},{},{}", i + 1, sig16_big(s), sig16(l), self.is_trusted(i + 1));
        }
        out
    }

    pub fn to_json(&self) -> SpectrumFile {
        SpectrumFile {
            schema_version: 1,
            source: self.source.clone(),
            precision: self.precision,
            trust_cutoff: self.trust_cutoff,
            sigma_hex: self.values.iter().map(float_to_hex).collect(),
        }
    }

    pub fn from_json(file: &SpectrumFile) -> Result<Self> {
        let values = file.sigma_hex.iter().map(|s| float_from_hex(s, file.precision)).collect::<Result<Vec<_>>>()?;
        let s = Spectrum::from_singular_values(values, file.precision, file.source.clone());
        if s.trust_cutoff != file.trust_cutoff {
            return Err(Error::Invalid(format!(
                "stored trust cutoff {} disagrees with recomputed {}",
                file.trust_cutoff, s.trust_cutoff
            )));
        }
        Ok(s)
    }
}

/// JSON sidecar of a spectrum; values are bit-exact hex floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub schema_version: u32,
    pub source: SpectrumSource,
    pub precision: u32,
    pub trust_cutoff: usize,
    pub sigma_hex: Vec<String>,
}

/// `x` with 16 significant digits in scientific notation.
pub fn sig16(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.15e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn sig16_big(x: &BigFloat) -> String {
    if x.is_zero() {
        return sig16(0.0);
    }
    let v = x.to_f64();
    if v != 0.0 && v.is_finite() {
        return sig16(v);
    }
    x.to_string_radix(10, Some(16))
}

pub fn source_of(g: &GramMatrix) -> SpectrumSource {
    SpectrumSource {
        operator: g.operator.name().to_string(),
        scheme: g.scheme.short_name().to_string(),
        n: g.n,
        gram_precision: g.precision.to_string(),
    }
}

/// Singular values of the discretized operator: square roots of the Gram
/// eigenvalues. Double-precision matrices go through LAPACK-style dense
/// routines; everything else through Jacobi at `prec` bits.
pub fn eigen_sym(g: &GramMatrix, prec: u32) -> Result<Spectrum> {
    let source = source_of(g);
    match &g.entries {
        GramEntries::Double(m) => {
            let values = eigen_f64(m)?;
            let big: Vec<BigFloat> = values.iter().map(|x| BigFloat::with_val(DOUBLE_PRECISION, *x)).collect();
            Ok(Spectrum::from_eigenvalues(&big, DOUBLE_PRECISION, source))
        }
        _ => {
            let e = jacobi(&g.to_float(prec), prec, false)?;
            Ok(Spectrum::from_eigenvalues(&e.values, prec, source))
        }
    }
}

/// Eigenvalues of a full float matrix after checking symmetry to ε·max|a|.
pub fn eigen_sym_dense(a: &FloatMatrix, prec: u32, want_vectors: bool) -> Result<Eigen> {
    check_symmetric(a)?;
    let sym = SymMatrix::from_fn(a.rows(), |i, j| BigFloat::with_val(prec, a.get(i, j)));
    jacobi(&sym, prec, want_vectors)
}

pub fn check_symmetric(a: &FloatMatrix) -> Result<()> {
    if a.rows() != a.cols() {
        return Err(Error::Invalid(format!("matrix is {}×{}, not square", a.rows(), a.cols())));
    }
    let tol = BigFloat::with_val(a.prec(), a.max_abs() * working_epsilon(a.prec()));
    for i in 0..a.rows() {
        for j in i + 1..a.cols() {
            let gap = BigFloat::with_val(a.prec(), a.get(i, j) - a.get(j, i)).abs();
            if gap > tol {
                return Err(Error::NotSymmetric { row: i, col: j, gap: gap.to_f64() });
            }
        }
    }
    Ok(())
}

/// Descending eigenvalues of a symmetric double matrix, clamped like `jacobi`.
pub fn eigen_f64(m: &SymMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.dim();
    let dense = DMatrix::from_fn(n, n, |i, j| *m.get(i, j));
    let trace: f64 = (0..n).map(|i| *m.get(i, i)).sum();
    let eps = working_epsilon(DOUBLE_PRECISION).to_f64();
    let mut values: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    for (i, v) in values.iter_mut().enumerate() {
        if *v < 0.0 {
            if -*v > eps * trace.abs() {
                return Err(Error::NegativeEigenvalue { index: i + 1, value: *v, floor: eps * trace.abs() });
            }
            *v = 0.0;
        }
    }
    Ok(values)
}

/// T(n) = Σ_{i>n} σ_i² for n = 0..N−1, accumulated from the smallest value up.
pub fn tail_sums(s: &Spectrum) -> Vec<BigFloat> {
    let n = s.len();
    let mut out = vec![BigFloat::new(s.precision); n];
    let mut acc = BigFloat::new(s.precision);
    for i in (0..n).rev() {
        acc += BigFloat::with_val(s.precision, s.values[i].square_ref());
        out[i] = acc.clone();
    }
    out
}

/// Largest i such that |σ_k − σ'_k| ≤ rel_tol·σ_k for every k ≤ i.
pub fn trust_cutoff(s: &Spectrum, cross: &Spectrum, rel_tol: f64) -> usize {
    s.values
        .iter()
        .zip(&cross.values)
        .take_while(|(a, b)| {
            let gap = BigFloat::with_val(s.precision, *a - *b).abs();
            let allowed = BigFloat::with_val(s.precision, *a * rel_tol);
            gap <= allowed
        })
        .count()
}

/// ‖H_N⁻¹‖₂, the largest eigenvalue of the exact integer inverse.
pub fn hilbert_inverse_norm(inv: &HilbertInverse, prec: u32) -> Result<BigFloat> {
    let sym = SymMatrix::from_fn(inv.n, |i, j| BigFloat::with_val(prec, &inv.entries[i][j]));
    let e = jacobi(&sym, prec, false)?;
    Ok(e.values[0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{galerkin_gram, galerkin_gram_f64, hilbert_inverse_exact, left_gram};
    use crate::numerics::BigRational;
    use crate::operators::CompositionSpec;

    fn source() -> SpectrumSource {
        SpectrumSource { operator: "X".into(), scheme: "left".into(), n: 0, gram_precision: "exact".into() }
    }

    fn spec(values: &[f64], prec: u32) -> Spectrum {
        Spectrum::from_singular_values(values.iter().map(|v| BigFloat::with_val(prec, *v)).collect(), prec, source())
    }

    #[test]
    fn tail_sum_examples() {
        let t = tail_sums(&spec(&[1.0], 64));
        assert_eq!(t[0], 1.0);
        let t = tail_sums(&spec(&[1.0, 1.0], 64));
        assert_eq!(t[1], 1.0);
        assert_eq!(t[0], 2.0);
    }

    #[test]
    fn dha_tail_at_zero_is_trace() {
        let prec = 256;
        let op: CompositionSpec = "DHa".parse().unwrap();
        let g = left_gram(&op, 12).unwrap();
        let s = eigen_sym(&g, prec).unwrap();
        let t0 = tail_sums(&s)[0].clone();
        let trace = BigFloat::with_val(prec, &g.trace_exact().unwrap());
        let rel = BigFloat::with_val(prec, (t0 - &trace) / &trace).abs();
        assert!(rel <= working_epsilon(prec) * 4u32);
        for w in tail_sums(&s).windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn diagonal_gram() {
        let m = SymMatrix::from_fn(3, |i, j| {
            if i == j {
                BigRational::from((1, ((i + 1) * (i + 1)) as u32))
            } else {
                BigRational::new()
            }
        });
        let g = GramMatrix {
            operator: "DHa".parse().unwrap(),
            scheme: crate::discretize::Scheme::LeftSection,
            n: 3,
            precision: crate::discretize::Precision::Exact,
            series_tol: None,
            entries: GramEntries::Exact(m),
        };
        let s = eigen_sym(&g, 128).unwrap();
        let v = s.to_f64();
        assert!((v[0] - 1.0).abs() < 1e-30 && (v[1] - 0.5).abs() < 1e-30 && (v[2] - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(s.trust_cutoff, 3);
    }

    #[test]
    fn trust_cutoff_examples() {
        let a = spec(&[1.0, 0.5, 0.25, 0.125, 0.06, 0.03], 64);
        assert_eq!(trust_cutoff(&a, &a, DEFAULT_REL_TOL), 6);
        let b = spec(&[1.0, 0.5, 0.25, 0.125, 0.08, 0.02], 64);
        assert_eq!(trust_cutoff(&a, &b, DEFAULT_REL_TOL), 4);
        let c = spec(&[2.0, 0.5], 64);
        assert_eq!(trust_cutoff(&a, &c, DEFAULT_REL_TOL), 0);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let op: CompositionSpec = "DHa".parse().unwrap();
        let s = eigen_sym(&left_gram(&op, 5).unwrap(), 200).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("index,sigma,log10_sigma,trusted\n"));
        assert_eq!(csv.lines().count(), 6);
        let back = Spectrum::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn double_and_multiprecision_paths_agree() {
        let op: CompositionSpec = "J".parse().unwrap();
        let a = eigen_sym(&galerkin_gram_f64(&op, 40).unwrap(), 0).unwrap();
        let b = eigen_sym(&galerkin_gram(&op, 40, 128).unwrap(), 128).unwrap();
        for i in 1..=40 {
            let (x, y) = (a.sigma(i).to_f64(), b.sigma(i).to_f64());
            assert!((x - y).abs() <= 1e-12 * b.sigma(1).to_f64(), "i={i}: {x} vs {y}");
        }
    }

    #[test]
    fn hilbert_inverse_norm_small() {
        let n1 = hilbert_inverse_norm(&hilbert_inverse_exact(1).unwrap(), 128).unwrap();
        assert_eq!(n1, 1.0);
        // 8 + √52
        let n2 = hilbert_inverse_norm(&hilbert_inverse_exact(2).unwrap(), 128).unwrap();
        assert!((n2.to_f64() - (8.0 + 52f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric_dense() {
        let mut a = FloatMatrix::identity(3, 64);
        a.set(0, 2, BigFloat::with_val(64, 0.5));
        assert!(matches!(eigen_sym_dense(&a, 64, false), Err(Error::NotSymmetric { row: 0, col: 2, .. })));
    }
}
