use super::{check_n, hilbert_section};
use crate::error::{Error, Result};
use crate::linalg::FloatMatrix;
use crate::numerics::{BigFloat, BigInt, BigRational};
use crate::operators::ha_on_legendre;

/// Largest section inverted in exact arithmetic.
pub const EXACT_INVERSE_MAX: usize = 13;

/// Exact inverse of a Hilbert section; all entries are integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertInverse {
    pub n: usize,
    pub entries: Vec<Vec<BigInt>>,
}

impl HilbertInverse {
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i - 1][j - 1]
    }

    pub fn to_float(&self, prec: u32) -> FloatMatrix {
        FloatMatrix::from_fn(self.n, self.n, prec, |i, j| BigFloat::with_val(prec, &self.entries[i][j]))
    }
}

fn gauss_jordan_exact(mut a: Vec<Vec<BigRational>>) -> Result<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from(u32::from(i == j))).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| a[r][col] != 0)
            .ok_or_else(|| Error::Contract("singular matrix in exact elimination".into()))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col] == 0 {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let da = BigRational::from(&f * &a[col][j]);
                a[r][j] -= da;
                let di = BigRational::from(&f * &inv[col][j]);
                inv[r][j] -= di;
            }
        }
    }
    Ok(inv)
}

/// Inverts H_N by rational Gauss–Jordan elimination and checks that every
/// entry of the inverse is an integer.
pub fn hilbert_inverse_exact(n: usize) -> Result<HilbertInverse> {
    check_n(n)?;
    if n > EXACT_INVERSE_MAX {
        return Err(Error::Domain(format!(
            "exact Hilbert inversion is limited to N <= {EXACT_INVERSE_MAX}, got {n}"
        )));
    }
    let h = hilbert_section(n)?;
    let a = (1..=n).map(|i| (1..=n).map(|j| h.get(i, j).clone()).collect()).collect();
    let inv = gauss_jordan_exact(a)?;
    let mut entries = Vec::with_capacity(n);
    for (i, row) in inv.into_iter().enumerate() {
        let mut out = Vec::with_capacity(n);
        for (j, q) in row.into_iter().enumerate() {
            if *q.denom() != 1 {
                return Err(Error::Contract(format!(
                    "entry ({}, {}) of the inverse of H_{n} is {q}, not an integer",
                    i + 1,
                    j + 1
                )));
            }
            out.push(q.into_numer_denom().0);
        }
        entries.push(out);
    }
    Ok(HilbertInverse { n, entries })
}

/// Inverse of H_N by Gaussian elimination with partial pivoting in `prec`-bit
/// arithmetic, for sections beyond the exact range.
pub fn hilbert_inverse_float(n: usize, prec: u32) -> Result<FloatMatrix> {
    check_n(n)?;
    let mut a = FloatMatrix::from_fn(n, n, prec, |i, j| {
        BigFloat::with_val(prec, BigRational::from((1u64, (i + j + 1) as u64)))
    });
    let mut inv = FloatMatrix::identity(n, prec);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| {
                let ax = BigFloat::with_val(prec, a.get(x, col).abs_ref());
                let ay = BigFloat::with_val(prec, a.get(y, col).abs_ref());
                ax.partial_cmp(&ay).expect("finite entries")
            })
            .expect("non-empty range");
        if a.get(pivot, col).is_zero() {
            return Err(Error::Contract("singular matrix in float elimination".into()));
        }
        if pivot != col {
            for j in 0..n {
                let t = a.get(col, j).clone();
                a.set(col, j, a.get(pivot, j).clone());
                a.set(pivot, j, t);
                let t = inv.get(col, j).clone();
                inv.set(col, j, inv.get(pivot, j).clone());
                inv.set(pivot, j, t);
            }
        }
        let p = a.get(col, col).clone();
        for j in 0..n {
            *a.get_mut(col, j) /= &p;
            *inv.get_mut(col, j) /= &p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a.get(r, col).clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let da = BigFloat::with_val(prec, &f * a.get(col, j));
                *a.get_mut(r, j) -= da;
                let di = BigFloat::with_val(prec, &f * inv.get(col, j));
                *inv.get_mut(r, j) -= di;
            }
        }
    }
    Ok(inv)
}

/// N×N matrix of D·Ha from the first N Legendre coordinates to the first N
/// moment coordinates: entry (j, i) = (1/j)·∫₀¹ L_i(t) t^{j−1} dt.
///
/// Since t^{j−1} ∈ span(L_1..L_N) for j ≤ N, T·Tᵀ = D_N H_N D_N exactly, so
/// this is a square factor of the left Gram matrix of D·Ha.
pub fn dha_legendre_section(n: usize, prec: u32) -> Result<FloatMatrix> {
    check_n(n)?;
    let m = ha_on_legendre(n, n)?;
    Ok(FloatMatrix::from_fn(n, n, prec, |j, i| {
        let mut v = m.entries[i][j].to_float(prec);
        v /= (j + 1) as u32;
        v
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::left_gram;

    #[test]
    fn small_inverses() {
        let one = hilbert_inverse_exact(1).unwrap();
        assert_eq!(*one.get(1, 1), 1);
        let two = hilbert_inverse_exact(2).unwrap();
        let want = [[4, -6], [-6, 12]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(two.entries[i][j], want[i][j]);
            }
        }
        // integrality is enforced while building, so success is the check
        for n in 1..=EXACT_INVERSE_MAX {
            hilbert_inverse_exact(n).unwrap();
        }
        assert!(hilbert_inverse_exact(EXACT_INVERSE_MAX + 1).is_err());
    }

    #[test]
    fn inverse_times_section_is_identity() {
        let n = 7;
        let inv = hilbert_inverse_exact(n).unwrap();
        let h = hilbert_section(n).unwrap();
        for i in 1..=n {
            for j in 1..=n {
                let mut acc = BigRational::new();
                for k in 1..=n {
                    acc += BigRational::from(inv.get(i, k)) * h.get(k, j);
                }
                assert_eq!(acc, BigRational::from(u32::from(i == j)));
            }
        }
    }

    #[test]
    fn float_inverse_matches_exact() {
        let n = 10;
        let exact = hilbert_inverse_exact(n).unwrap().to_float(300);
        let float = hilbert_inverse_float(n, 300).unwrap();
        let diff = exact.sub(&float).max_abs();
        let scale = exact.max_abs();
        assert!(diff < scale * BigFloat::with_val(300, 1e-60));
    }

    #[test]
    fn legendre_factor_reproduces_left_gram() {
        let n = 9;
        let prec = 256;
        let t = dha_legendre_section(n, prec).unwrap();
        let g = t.transpose().gram_of_columns();
        let want = left_gram(&"DHa".parse().unwrap(), n).unwrap().to_float(prec);
        for i in 0..n {
            for j in 0..n {
                assert!(t.get(i, j).is_zero() || j <= i, "upper entry ({i},{j}) is nonzero");
                let d = BigFloat::with_val(prec, g.get(i, j) - want.get(i, j)).abs();
                assert!(d < 1e-70);
            }
        }
    }
}
