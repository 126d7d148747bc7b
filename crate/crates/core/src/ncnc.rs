//! Near-null directions and the greedy orthonormal sequence on which an
//! operator acts compactly, in finite truncation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, FloatMatrix};
use crate::numerics::{float_to_hex, working_epsilon, BigFloat};
use crate::spectra::jacobi;

/// Which admissible eigen-direction of the restricted Gram matrix a step takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// The minimizer of ‖T y‖.
    Minimizer,
    /// The eigen-direction with the largest ‖T y‖ still within ε, which
    /// leaves the smallest directions for later, tighter steps.
    #[default]
    Frugal,
}

#[derive(Debug, Clone)]
pub struct NearNull {
    /// Unit vector in the ambient space, first nonzero coordinate positive.
    pub vector: Vec<BigFloat>,
    /// ‖T y‖, computed directly.
    pub residual: BigFloat,
    /// Orthonormal basis of the part of range(Q) orthogonal to `vector`.
    pub complement: FloatMatrix,
}

fn fix_sign(v: &mut [BigFloat], tiny: &BigFloat) {
    if let Some(first) = v.iter().find(|x| BigFloat::with_val(x.prec(), x.abs_ref()) > *tiny) {
        if *first < 0 {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
    }
}

/// Exact minimizer of ‖T y‖ over unit y in range(Q), from the eigenvectors
/// of the restricted Gram matrix (TQ)ᵀ(TQ). Fails with the achievable minimum
/// when it exceeds `eps`.
pub fn near_null_direction(t: &FloatMatrix, q: &FloatMatrix, eps: &BigFloat, prec: u32) -> Result<NearNull> {
    near_null_with(t, q, eps, prec, Selection::Minimizer)
}

pub fn near_null_with(t: &FloatMatrix, q: &FloatMatrix, eps: &BigFloat, prec: u32, how: Selection) -> Result<NearNull> {
    let d = q.cols();
    if d == 0 {
        return Err(Error::Invalid("near-null search needs a subspace of dimension at least 1".into()));
    }
    if t.cols() != q.rows() {
        return Err(Error::Invalid(format!("operator has {} columns but the basis lives in dimension {}", t.cols(), q.rows())));
    }
    let tq = t.matmul(q);
    let e = jacobi(&tq.gram_of_columns(), prec, true)?;
    let v = e.vectors.expect("vectors requested");
    let candidates: Vec<usize> = match how {
        Selection::Minimizer => vec![d - 1],
        Selection::Frugal => {
            let eps2 = BigFloat::with_val(prec, eps.square_ref());
            let first = e.values.iter().position(|l| *l <= eps2).unwrap_or(d - 1);
            (first..d).collect()
        }
    };
    let tiny = working_epsilon(prec);
    let mut best: Option<(usize, Vec<BigFloat>, BigFloat)> = None;
    for &c in &candidates {
        let mut y = q.matvec(&v.column(c));
        fix_sign(&mut y, &tiny);
        let r = norm(&t.matvec(&y), prec);
        let ok = r <= *eps;
        if best.as_ref().map_or(true, |(_, _, b)| r < *b) || ok {
            best = Some((c, y, r));
        }
        if ok {
            break;
        }
    }
    let (chosen, vector, residual) = best.expect("at least one candidate");
    if residual > *eps {
        return Err(Error::Unachievable { requested: eps.to_f64(), achievable: residual.to_f64(), depth: 0 });
    }
    let rest: Vec<Vec<BigFloat>> = (0..d).filter(|&c| c != chosen).map(|c| q.matvec(&v.column(c))).collect();
    let complement = FloatMatrix::from_columns(&rest, q.rows(), prec);
    Ok(NearNull { vector, residual, complement })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcncStep {
    pub n: usize,
    pub r_n: f64,
    pub epsilon_n: f64,
    pub achieved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Increment {
    pub n: usize,
    pub m: usize,
    /// ‖K_n − K_m‖_F
    pub delta: f64,
    /// Σ_{i=n+1}^m r_i
    pub residual_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halt {
    pub step: usize,
    pub requested: f64,
    pub achievable: f64,
}

#[derive(Debug, Clone)]
pub struct NcncTrace {
    pub precision: u32,
    pub selection: Selection,
    /// Columns x_1..x_n.
    pub vectors: FloatMatrix,
    pub residuals: Vec<BigFloat>,
    pub steps: Vec<NcncStep>,
    pub increments: Vec<Increment>,
    /// max |XᵀX − I|
    pub orthonormality_defect: BigFloat,
    pub halted: Option<Halt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcncTraceFile {
    pub schema_version: u32,
    pub precision: u32,
    pub selection: Selection,
    pub depth: usize,
    pub steps: Vec<NcncStep>,
    pub increments: Vec<Increment>,
    pub orthonormality_defect: f64,
    pub halted: Option<Halt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors_hex: Option<Vec<Vec<String>>>,
}

impl NcncTrace {
    pub fn depth(&self) -> usize {
        self.residuals.len()
    }

    /// Error unless at least `k` steps succeeded.
    pub fn require_depth(&self, k: usize) -> Result<()> {
        if self.depth() >= k {
            return Ok(());
        }
        let (requested, achievable) = self.halted.as_ref().map_or((0.0, 0.0), |h| (h.requested, h.achievable));
        Err(Error::Unachievable { requested, achievable, depth: self.depth() })
    }

    pub fn to_json(&self, include_vectors: bool) -> NcncTraceFile {
        NcncTraceFile {
            schema_version: 1,
            precision: self.precision,
            selection: self.selection,
            depth: self.depth(),
            steps: self.steps.clone(),
            increments: self.increments.clone(),
            orthonormality_defect: self.orthonormality_defect.to_f64(),
            halted: self.halted.clone(),
            vectors_hex: include_vectors.then(|| {
                (0..self.vectors.cols()).map(|c| self.vectors.column(c).iter().map(float_to_hex).collect()).collect()
            }),
        }
    }
}

fn pow2_neg(n: usize, prec: u32) -> BigFloat {
    BigFloat::with_val(prec, 1u32) >> n as u32
}

/// Greedy construction with targets ε_n = 2^{−n}: each step restricts T to
/// the orthogonal complement of the vectors found so far and takes an exact
/// eigen-direction with ‖T x‖ ≤ ε_n. Stops at `n_max`, at the dimension, or
/// at the first unreachable target, which is recorded in `halted`.
pub fn build_compact_restriction(t: &FloatMatrix, n_max: usize, prec: u32, how: Selection) -> Result<NcncTrace> {
    let dim = t.cols();
    let mut q = FloatMatrix::identity(dim, prec);
    let mut xs: Vec<Vec<BigFloat>> = Vec::new();
    let mut residuals = Vec::new();
    let mut steps = Vec::new();
    let mut halted = None;
    for n in 1..=n_max.min(dim) {
        let eps = pow2_neg(n, prec);
        match near_null_with(t, &q, &eps, prec, how) {
            Ok(found) => {
                steps.push(NcncStep { n, r_n: found.residual.to_f64(), epsilon_n: eps.to_f64(), achieved: true });
                xs.push(found.vector);
                residuals.push(found.residual);
                q = found.complement;
            }
            Err(Error::Unachievable { requested, achievable, .. }) => {
                steps.push(NcncStep { n, r_n: achievable, epsilon_n: requested, achieved: false });
                halted = Some(Halt { step: n, requested, achievable });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let vectors = FloatMatrix::from_columns(&xs, dim, prec);
    let images: Vec<Vec<BigFloat>> = xs.iter().map(|x| t.matvec(x)).collect();
    let increments = increments(&images, &xs, &residuals, t.rows(), prec);
    let orthonormality_defect = orthonormality_defect(&xs, prec);
    Ok(NcncTrace { precision: prec, selection: how, vectors, residuals, steps, increments, orthonormality_defect, halted })
}

fn increments(images: &[Vec<BigFloat>], xs: &[Vec<BigFloat>], r: &[BigFloat], rows: usize, prec: u32) -> Vec<Increment> {
    let depth = xs.len();
    let cols = xs.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for n in 0..depth {
        let mut acc = FloatMatrix::zeros(rows, cols, prec);
        let mut rsum = BigFloat::new(prec);
        for m in n + 1..=depth {
            let (tx, x) = (&images[m - 1], &xs[m - 1]);
            for i in 0..rows {
                for j in 0..cols {
                    *acc.get_mut(i, j) += BigFloat::with_val(prec, &tx[i] * &x[j]);
                }
            }
            rsum += &r[m - 1];
            out.push(Increment { n, m, delta: acc.frobenius_norm().to_f64(), residual_sum: rsum.to_f64() });
        }
    }
    out
}

fn orthonormality_defect(xs: &[Vec<BigFloat>], prec: u32) -> BigFloat {
    let mut worst = BigFloat::new(prec);
    for (i, a) in xs.iter().enumerate() {
        for (j, b) in xs.iter().enumerate().skip(i) {
            let mut g = dot(a, b, prec);
            if i == j {
                g -= 1u32;
            }
            let g = g.abs();
            if g > worst {
                worst = g;
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactWitness {
    pub depth: usize,
    pub rank: usize,
    /// ‖B‖₂ of the projector onto span(x_1..x_n)
    pub projector_norm: f64,
    /// ‖T·B‖₂ computed
    pub product_norm: f64,
    /// max r_i·√n
    pub norm_bound: f64,
    /// Σ r_i
    pub residual_sum: f64,
    pub holds: bool,
}

/// Spectral norms of B = X Xᵀ and T·B for the first `depth` vectors of the
/// trace (all of them when `None`).
pub fn compact_product_witness(t: &FloatMatrix, trace: &NcncTrace, depth: Option<usize>) -> Result<CompactWitness> {
    let k = depth.unwrap_or(trace.depth());
    if k == 0 || k > trace.depth() {
        return Err(Error::Invalid(format!("witness depth {k} must lie in 1..={}", trace.depth())));
    }
    let prec = trace.precision;
    let cols: Vec<Vec<BigFloat>> = (0..k).map(|c| trace.vectors.column(c)).collect();
    let x = FloatMatrix::from_columns(&cols, trace.vectors.rows(), prec);
    let b = x.matmul(&x.transpose());
    let b_sym = crate::linalg::SymMatrix::from_fn(b.rows(), |i, j| b.get(i, j).clone());
    let b_eig = jacobi(&b_sym, prec, false)?;
    let half = BigFloat::with_val(prec, 0.5);
    let rank = b_eig.values.iter().filter(|l| **l > half).count();
    let tb = t.matmul(&b);
    let tb_eig = jacobi(&tb.gram_of_columns(), prec, false)?;
    let product = BigFloat::with_val(prec, tb_eig.values[0].sqrt_ref());
    let rs = &trace.residuals[..k];
    let rmax = rs.iter().map(BigFloat::to_f64).fold(0.0, f64::max);
    let rsum = rs.iter().fold(BigFloat::new(prec), |a, r| a + r);
    let bound = BigFloat::with_val(prec, (k as u32 as f64).sqrt()) * rs.iter().max_by(|a, b| a.total_cmp(b)).expect("k >= 1");
    Ok(CompactWitness {
        depth: k,
        rank,
        projector_norm: b_eig.values[0].to_f64(),
        product_norm: product.to_f64(),
        norm_bound: rmax * (k as f64).sqrt(),
        residual_sum: rsum.to_f64(),
        holds: product <= bound && product <= rsum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::dha_legendre_section;

    fn diag(values: &[f64], prec: u32) -> FloatMatrix {
        let v: Vec<BigFloat> = values.iter().map(|x| BigFloat::with_val(prec, *x)).collect();
        FloatMatrix::diagonal(&v, prec)
    }

    #[test]
    fn diagonal_near_null() {
        let t = diag(&[1.0, 1e-6], 128);
        let y = near_null_direction(&t, &FloatMatrix::identity(2, 128), &BigFloat::with_val(128, 1e-5), 128).unwrap();
        assert_eq!(y.vector[0].to_f64(), 0.0);
        assert_eq!(y.vector[1].to_f64(), 1.0);
        assert!((y.residual.to_f64() - 1e-6).abs() < 1e-20);
        assert_eq!(y.complement.cols(), 1);
    }

    #[test]
    fn identity_is_well_posed() {
        let t = FloatMatrix::identity(2, 128);
        let err = near_null_direction(&t, &t, &BigFloat::with_val(128, 0.5), 128).unwrap_err();
        match err {
            Error::Unachievable { achievable, .. } => assert!((achievable - 1.0).abs() < 1e-30),
            other => panic!("unexpected {other:?}"),
        }
        let trace = build_compact_restriction(&t, 5, 128, Selection::Frugal).unwrap();
        assert_eq!(trace.depth(), 0);
        assert!(trace.require_depth(1).is_err());
    }

    #[test]
    fn dyadic_diagonal_gives_coordinate_basis() {
        let k = 8;
        let prec = 256;
        let t = diag(&(1..=k).map(|i| 2f64.powi(-(i as i32))).collect::<Vec<_>>(), prec);
        let trace = build_compact_restriction(&t, k, prec, Selection::Frugal).unwrap();
        assert_eq!(trace.depth(), k);
        for n in 1..=k {
            let x = trace.vectors.column(n - 1);
            for (i, xi) in x.iter().enumerate() {
                let expect = if i == n - 1 { 1.0 } else { 0.0 };
                assert!((xi.to_f64().abs() - expect).abs() < 1e-60, "x_{n}[{i}]");
            }
            assert_eq!(trace.steps[n - 1].r_n, 2f64.powi(-(n as i32)));
        }
        // the minimizer takes the smallest directions first and runs out sooner
        let greedy = build_compact_restriction(&t, k, prec, Selection::Minimizer).unwrap();
        assert_eq!(greedy.depth(), 4);
        assert_eq!(greedy.vectors.column(0)[k - 1].to_f64(), 1.0);
    }

    #[test]
    fn witness_on_diagonal() {
        let prec = 128;
        let t = diag(&[1.0, 1e-6], prec);
        let trace = build_compact_restriction(&t, 1, prec, Selection::Minimizer).unwrap();
        let w = compact_product_witness(&t, &trace, None).unwrap();
        assert_eq!(w.rank, 1);
        assert!((w.projector_norm - 1.0).abs() < 1e-30);
        assert!((w.product_norm - 1e-6).abs() < 1e-18);
        assert!(w.holds);
    }

    #[test]
    fn dha_section_invariants() {
        let prec = 256;
        let t = dha_legendre_section(12, prec).unwrap();
        let y = near_null_direction(&t, &FloatMatrix::identity(12, prec), &BigFloat::with_val(prec, 0.5), prec).unwrap();
        assert!(y.residual < 1e-6);
        let trace = build_compact_restriction(&t, 12, prec, Selection::Frugal).unwrap();
        assert!(trace.depth() >= 4);
        for (n, r) in trace.residuals.iter().enumerate() {
            assert!(*r <= pow2_neg(n + 1, prec));
        }
        assert!(trace.orthonormality_defect < BigFloat::with_val(prec, 1u32) >> 200u32);
        for inc in &trace.increments {
            assert!(inc.delta <= inc.residual_sum * (1.0 + 1e-12));
            assert!(inc.residual_sum <= 2f64.powi(-(inc.n as i32)));
        }
        let w = compact_product_witness(&t, &trace, None).unwrap();
        assert!(w.holds);
        assert_eq!(w.rank, trace.depth());
    }
}
