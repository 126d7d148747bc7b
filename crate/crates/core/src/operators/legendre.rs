//! Shifted, L²(0,1)-orthonormal Legendre polynomials in exact arithmetic.
//!
//! L_i is kept as `√r · p(t)` with `p` rational and `r` a positive integer,
//! so inner products and moments stay in ℚ(√r).

use std::cmp::Ordering;

use rug::Integer;

use super::symbolic::Polynomial;
use crate::error::{Error, Result};
use crate::linalg::FloatMatrix;
use crate::numerics::{sum_with_tail, zeta_even, BigFloat, BigRational, SeriesResult};

/// The real number `coeff · √radicand`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    pub coeff: BigRational,
    pub radicand: Integer,
}

impl Surd {
    pub fn rational(q: BigRational) -> Self {
        Self { coeff: q, radicand: Integer::from(1) }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == 0
    }

    /// The exact square coeff²·radicand.
    pub fn square(&self) -> BigRational {
        BigRational::from(self.coeff.square_ref()) * BigRational::from(self.radicand.clone())
    }

    pub fn to_float(&self, prec: u32) -> BigFloat {
        let root = BigFloat::with_val(prec, &self.radicand).sqrt();
        root * BigFloat::with_val(prec, &self.coeff)
    }

    /// Exact comparison of two surds.
    pub fn same_value(&self, other: &Surd) -> bool {
        self.coeff.cmp0() == other.coeff.cmp0() && self.square() == other.square()
    }

    /// Exact ordering via signs and squares.
    pub fn cmp_value(&self, other: &Surd) -> Ordering {
        let (a, b) = (self.coeff.cmp0(), other.coeff.cmp0());
        if a != b {
            return a.cmp(&b);
        }
        let mag = self.square().cmp(&other.square());
        if a == Ordering::Less {
            mag.reverse()
        } else {
            mag
        }
    }
}

/// L_i = √radicand · poly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegendrePolynomial {
    pub index: usize,
    pub poly: Polynomial,
    pub radicand: Integer,
}

impl LegendrePolynomial {
    /// ∫₀¹ L_i L_j dt as an exact surd.
    pub fn inner(&self, other: &LegendrePolynomial) -> Surd {
        let q = self.poly.inner(&other.poly);
        let r = Integer::from(&self.radicand * &other.radicand);
        Surd { coeff: q, radicand: r }
    }

    /// ∫₀¹ L_i(t) t^m dt.
    pub fn moment(&self, m: u32) -> Surd {
        Surd { coeff: self.poly.moment(m), radicand: self.radicand.clone() }
    }

    /// Coefficient of t^d as a surd.
    pub fn coeff(&self, d: usize) -> Surd {
        Surd { coeff: self.poly.coeff(d), radicand: self.radicand.clone() }
    }

    /// True when both represent the same polynomial.
    pub fn same_as(&self, other: &LegendrePolynomial) -> bool {
        let n = self.poly.coeffs().len().max(other.poly.coeffs().len());
        (0..n).all(|d| self.coeff(d).same_value(&other.coeff(d)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegendreBasis {
    pub polys: Vec<LegendrePolynomial>,
}

impl LegendreBasis {
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn get(&self, i: usize) -> &LegendrePolynomial {
        &self.polys[i - 1]
    }

    /// Exact orthonormality: ⟨L_i, L_j⟩ = δ_ij for every pair.
    pub fn is_orthonormal(&self) -> bool {
        for (a, p) in self.polys.iter().enumerate() {
            for q in &self.polys[a..] {
                let ip = p.inner(q);
                let want = if p.index == q.index { BigRational::from(1) } else { BigRational::new() };
                if ip.square() != want || ip.coeff.cmp0() == Ordering::Less {
                    return false;
                }
            }
        }
        true
    }

    /// Change of basis from monomials is lower triangular with positive diagonal.
    pub fn is_triangular_positive(&self) -> bool {
        self.polys
            .iter()
            .all(|p| p.poly.degree() == Some(p.index - 1) && p.poly.coeff(p.index - 1) > 0)
    }

    pub fn agrees_with(&self, other: &LegendreBasis) -> bool {
        self.len() == other.len() && self.polys.iter().zip(&other.polys).all(|(a, b)| a.same_as(b))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("the Legendre basis needs n >= 1".into()));
    }
    Ok(())
}

/// L_i = √(2i−1)·P̃_{i−1} via (n+1)P̃_{n+1} = (2n+1)(2t−1)P̃_n − nP̃_{n−1}.
pub fn legendre_basis(n: usize) -> Result<LegendreBasis> {
    check_n(n)?;
    let two_t_minus_one = Polynomial::from_coeffs(vec![BigRational::from(-1), BigRational::from(2)]);
    let mut prev = Polynomial::zero();
    let mut cur = Polynomial::constant(BigRational::from(1));
    let mut polys = Vec::with_capacity(n);
    for i in 1..=n {
        polys.push(LegendrePolynomial { index: i, poly: cur.clone(), radicand: Integer::from(2 * i - 1) });
        let k = (i - 1) as i64;
        let next = two_t_minus_one
            .mul(&cur)
            .scale(&BigRational::from((2 * k + 1, k + 1)))
            .sub(&prev.scale(&BigRational::from((k, k + 1))));
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(LegendreBasis { polys })
}

/// Exact Gram–Schmidt on 1, t, t², … with rational inner products.
pub fn legendre_basis_gram_schmidt(n: usize) -> Result<LegendreBasis> {
    check_n(n)?;
    // orthogonal, unnormalized q_i with their squared norms
    let mut ortho: Vec<(Polynomial, BigRational)> = Vec::with_capacity(n);
    let mut polys = Vec::with_capacity(n);
    for i in 1..=n {
        let mono = Polynomial::monomial(i - 1, BigRational::from(1));
        let mut q = mono.clone();
        for (prev, norm2) in &ortho {
            let c = BigRational::from(mono.inner(prev) / norm2);
            q = q.sub(&prev.scale(&c));
        }
        let norm2 = q.inner(&q);
        // 1/√(a/b) = √(ab)/a
        let (a, b) = (norm2.numer().clone(), norm2.denom().clone());
        let radicand = Integer::from(&a * &b);
        let (root, rem) = radicand.clone().sqrt_rem(Integer::new());
        let (poly, radicand) = if rem == 0 {
            (q.scale(&BigRational::from((root, a.clone()))), Integer::from(1))
        } else {
            (q.scale(&BigRational::from((Integer::from(1), a.clone()))), radicand)
        };
        polys.push(LegendrePolynomial { index: i, poly, radicand });
        ortho.push((q, norm2));
    }
    Ok(LegendreBasis { polys })
}

/// Exact moments (Ha L_i)_j = ∫₀¹ L_i(t) t^{j−1} dt, rows i = 1..n, columns j = 1..j_max.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegendreMoments {
    pub n: usize,
    pub j_max: usize,
    pub entries: Vec<Vec<Surd>>,
}

impl LegendreMoments {
    pub fn get(&self, i: usize, j: usize) -> &Surd {
        &self.entries[i - 1][j - 1]
    }

    /// Zero whenever j < i.
    pub fn is_upper_triangular(&self) -> bool {
        (1..=self.n).all(|i| (1..i.min(self.j_max + 1)).all(|j| self.get(i, j).is_zero()))
    }

    pub fn to_float(&self, prec: u32) -> FloatMatrix {
        FloatMatrix::from_fn(self.n, self.j_max, prec, |i, j| self.entries[i][j].to_float(prec))
    }
}

pub fn ha_on_legendre(n: usize, j_max: usize) -> Result<LegendreMoments> {
    if j_max == 0 {
        return Err(Error::Domain("ha_on_legendre needs j_max >= 1".into()));
    }
    let basis = legendre_basis(n)?;
    let entries = basis
        .polys
        .iter()
        .map(|p| (0..j_max as u32).map(|m| p.moment(m)).collect())
        .collect();
    Ok(LegendreMoments { n, j_max, entries })
}

/// ln 2 = Σ 1/(j·2^j), remainder after J terms below 1/((J+1)·2^J).
fn ln2_series(tol: &BigFloat) -> Result<SeriesResult> {
    let prec = tol.prec();
    let mut pow = BigFloat::with_val(prec, 1u32);
    sum_with_tail(
        move |j| {
            pow >>= 1i32;
            BigFloat::with_val(prec, &pow / j)
        },
        |big_j| {
            let mut b = BigFloat::with_val(prec, 1u32) >> (big_j.min(i32::MAX as u64) as i32);
            b /= big_j + 1;
            b
        },
        tol,
    )
}

/// ‖D·Ha‖²_HS = Σ_j 1/(j²(2j−1)) = 4·ln 2 − ζ(2), summed at the precision of `tol`.
///
/// The partial fractions 4/(2j−1) − 2/j − 1/j² turn the slowly converging
/// series into the geometric series for ln 2; the returned tail bound is
/// four times that series' bound.
pub fn hs_norm_squared_dha(tol: &BigFloat) -> Result<SeriesResult> {
    let prec = tol.prec();
    let quarter = BigFloat::with_val(prec, tol / 4u32);
    let ln2 = ln2_series(&quarter)?;
    let value = BigFloat::with_val(prec, &ln2.value * 4u32) - zeta_even(2, prec)?;
    let tail_bound = BigFloat::with_val(prec, &ln2.tail_bound * 4u32);
    Ok(SeriesResult { value, terms_used: ln2.terms_used, tail_bound })
}

/// Σ_{j ≥ first} 1/(j²(2j−1)): the full sum minus an exact rational head.
pub fn hs_norm_tail_dha(first: u64, tol: &BigFloat) -> Result<SeriesResult> {
    if first == 0 {
        return Err(Error::Domain("tail index starts at 1".into()));
    }
    let prec = tol.prec();
    let total = hs_norm_squared_dha(tol)?;
    let mut head = BigRational::new();
    for j in 1..first {
        let j = Integer::from(j);
        let den = Integer::from(j.square_ref()) * (Integer::from(&j * 2u32) - 1u32);
        head += BigRational::from((Integer::from(1), den));
    }
    let value = total.value - BigFloat::with_val(prec, &head);
    Ok(SeriesResult { value, ..total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Complete;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from((n, d))
    }

    #[test]
    fn first_polynomials() {
        let b = legendre_basis(3).unwrap();
        assert_eq!(b.get(1).poly, Polynomial::constant(q(1, 1)));
        assert_eq!(b.get(1).radicand, 1);
        // L₂ = √3(2t − 1)
        assert_eq!(b.get(2).poly, Polynomial::from_coeffs(vec![q(-1, 1), q(2, 1)]));
        assert_eq!(b.get(2).radicand, 3);
        let n2 = b.get(2).inner(b.get(2));
        assert_eq!(n2.square(), q(1, 1));
        assert!(b.get(3).moment(0).is_zero());
        assert!(b.get(3).moment(1).is_zero());
    }

    #[test]
    fn both_routes_agree_and_are_orthonormal() {
        let a = legendre_basis(12).unwrap();
        let g = legendre_basis_gram_schmidt(12).unwrap();
        assert!(a.is_orthonormal());
        assert!(g.is_orthonormal());
        assert!(a.agrees_with(&g));
        assert!(a.is_triangular_positive());
        assert!(g.is_triangular_positive());
        assert!(legendre_basis(0).is_err());
    }

    #[test]
    fn moments_match_factorial_oracle() {
        // ⟨P̃_n, t^m⟩ = (m!)² / ((m−n)!(m+n+1)!) for m ≥ n
        let b = legendre_basis(9).unwrap();
        let fact = |k: u32| Integer::factorial(k).complete();
        for n in 0..9u32 {
            let p = &b.get(n as usize + 1).poly;
            for m in 0..12u32 {
                let got = p.moment(m);
                if m < n {
                    assert_eq!(got, 0);
                } else {
                    let want = BigRational::from((fact(m).square(), fact(m - n) * fact(m + n + 1)));
                    assert_eq!(got, want, "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn ha_moments_triangular() {
        let m = ha_on_legendre(12, 15).unwrap();
        assert!(m.is_upper_triangular());
        assert_eq!(m.get(1, 1).square(), q(1, 1));
        assert!(m.get(2, 1).is_zero());
        assert!(m.get(3, 2).is_zero());
        assert!(!m.get(3, 3).is_zero());
    }

    #[test]
    fn surd_ordering() {
        let a = Surd { coeff: q(1, 2), radicand: Integer::from(3) };
        let b = Surd { coeff: q(1, 1), radicand: Integer::from(1) };
        assert_eq!(a.cmp_value(&b), Ordering::Less);
        let na = Surd { coeff: q(-1, 2), radicand: Integer::from(3) };
        assert_eq!(na.cmp_value(&a), Ordering::Less);
        assert!((a.to_float(64).to_f64() - 0.8660254037844386).abs() < 1e-15);
    }

    #[test]
    fn hs_norm_value() {
        let tol = BigFloat::with_val(256, 1e-60);
        let r = hs_norm_squared_dha(&tol).unwrap();
        assert!((r.value.to_f64() - 1.12766).abs() < 1e-5);
        // oracle: 4 ln 2 − π²/6 from MPFR constants
        let ln2 = BigFloat::with_val(256, rug::float::Constant::Log2);
        let oracle = ln2 * 4u32 - zeta_even(2, 256).unwrap();
        let diff = BigFloat::with_val(256, &r.value - &oracle).abs();
        assert!(diff < 1e-58);
        let pi2 = zeta_even(2, 256).unwrap() * 6u32;
        let d_hs = zeta_even(2, 256).unwrap();
        assert!(r.value < d_hs * pi2);
        // head of the series at one term
        let tail2 = hs_norm_tail_dha(2, &tol).unwrap();
        let head = BigFloat::with_val(256, &r.value - &tail2.value);
        assert!((head.to_f64() - 1.0).abs() < 1e-50);
    }
}
