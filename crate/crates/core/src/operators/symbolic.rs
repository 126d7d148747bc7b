//! Exact symbolic images of monomials, unit vectors and −ln t.

use std::fmt;

use rug::Integer;
use rug::ops::Pow;

use super::{Multiplier, OperatorId};
use crate::error::{Error, Result};
use crate::numerics::BigRational;

/// Polynomial with exact rational coefficients, `coeffs[d]` multiplying t^d.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn monomial(degree: usize, coeff: BigRational) -> Self {
        let mut coeffs = vec![BigRational::new(); degree + 1];
        coeffs[degree] = coeff;
        Self::from_coeffs(coeffs)
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, c)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| *c == 0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, d: usize) -> BigRational {
        self.coeffs.get(d).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::from_coeffs((0..n).map(|d| self.coeff(d) + other.coeff(d)).collect())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&BigRational::from(-1)))
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        Polynomial::from_coeffs(self.coeffs.iter().map(|x| BigRational::from(x * c)).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (a, x) in self.coeffs.iter().enumerate() {
            for (b, y) in other.coeffs.iter().enumerate() {
                out[a + b] += BigRational::from(x * y);
            }
        }
        Polynomial::from_coeffs(out)
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::new();
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    /// ∫₀¹ p(t) t^m dt.
    pub fn moment(&self, m: u32) -> BigRational {
        let mut acc = BigRational::new();
        for (d, c) in self.coeffs.iter().enumerate() {
            acc += BigRational::from(c / BigRational::from(d as u32 + m + 1));
        }
        acc
    }

    /// ∫₀¹ p q dt.
    pub fn inner(&self, other: &Polynomial) -> BigRational {
        let mut acc = BigRational::new();
        for (a, x) in self.coeffs.iter().enumerate() {
            for (b, y) in other.coeffs.iter().enumerate() {
                acc += BigRational::from(x * y) / BigRational::from((a + b + 1) as u32);
            }
        }
        acc
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Polynomial {
        let mut out = vec![BigRational::new()];
        for (d, c) in self.coeffs.iter().enumerate() {
            out.push(BigRational::from(c / BigRational::from(d as u32 + 1)));
        }
        Polynomial::from_coeffs(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let mag = BigRational::from(c.abs_ref());
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let (num, den) = (mag.numer(), mag.denom());
            match d {
                0 => write!(f, "{mag}")?,
                _ => {
                    let var = if d == 1 { "t".to_string() } else { format!("t^{d}") };
                    if *num != 1 {
                        write!(f, "{num}")?;
                    }
                    f.write_str(&var)?;
                    if *den != 1 {
                        write!(f, "/{den}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Element of L²(0,1) of the form p(t) + a·(−ln t).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct L2Function {
    pub poly: Polynomial,
    pub neg_log: BigRational,
}

impl L2Function {
    pub fn polynomial(poly: Polynomial) -> Self {
        Self { poly, neg_log: BigRational::new() }
    }

    pub fn monomial(k: u32) -> Self {
        Self::polynomial(Polynomial::monomial(k as usize, BigRational::from(1)))
    }

    pub fn is_polynomial(&self) -> bool {
        self.neg_log == 0
    }

    /// ∫₀¹ f(t) t^{j−1} dt, using ∫₀¹ t^{j−1}(−ln t) dt = 1/j².
    pub fn moment(&self, j: u32) -> BigRational {
        assert!(j >= 1, "moments are indexed from 1");
        let mut m = self.poly.moment(j - 1);
        if self.neg_log != 0 {
            m += BigRational::from(&self.neg_log / BigRational::from(j * j));
        }
        m
    }

    /// Exact L² inner product (∫ t^d(−ln t) = 1/(d+1)², ∫ ln² t = 2).
    pub fn inner(&self, other: &L2Function) -> BigRational {
        let mut acc = self.poly.inner(&other.poly);
        if other.neg_log != 0 {
            acc += log_moment_sum(&self.poly) * &other.neg_log;
        }
        if self.neg_log != 0 {
            acc += log_moment_sum(&other.poly) * &self.neg_log;
        }
        if self.neg_log != 0 && other.neg_log != 0 {
            acc += BigRational::from(&self.neg_log * &other.neg_log) * BigRational::from(2);
        }
        acc
    }
}

fn log_moment_sum(p: &Polynomial) -> BigRational {
    let mut acc = BigRational::new();
    for (d, c) in p.coeffs().iter().enumerate() {
        let n = Integer::from(d + 1);
        acc += BigRational::from(c / BigRational::from(Integer::from(&n * &n)));
    }
    acc
}

impl fmt::Display for L2Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.poly.is_zero(), self.neg_log == 0) {
            (_, true) => write!(f, "{}", self.poly),
            (true, false) if self.neg_log == 1 => f.write_str("-ln t"),
            (true, false) => write!(f, "-({}) ln t", self.neg_log),
            (false, false) => write!(f, "{} - ({}) ln t", self.poly, self.neg_log),
        }
    }
}

/// One term `coeff / (j^j_power · (j + shift)^shift_power)` of a sequence formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqTerm {
    pub coeff: BigRational,
    pub j_power: u32,
    pub shift: u32,
    pub shift_power: u32,
}

impl SeqTerm {
    fn eval(&self, j: u32) -> BigRational {
        let mut den = Integer::from(j).pow(self.j_power);
        den *= Integer::from(j + self.shift).pow(self.shift_power);
        BigRational::from(&self.coeff / BigRational::from(den))
    }
}

/// Element of ℓ², either a closed formula in the index j ≥ 1 or a scaled unit vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sequence {
    Formula(Vec<SeqTerm>),
    Unit { index: u32, value: BigRational },
}

impl Sequence {
    pub fn eval(&self, j: u32) -> BigRational {
        assert!(j >= 1, "sequences are indexed from 1");
        match self {
            Sequence::Formula(terms) => terms.iter().map(|t| t.eval(j)).fold(BigRational::new(), |a, b| a + b),
            Sequence::Unit { index, value } => {
                if *index == j {
                    value.clone()
                } else {
                    BigRational::new()
                }
            }
        }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequence::Unit { index, value } => write!(f, "({value})·e({index})"),
            Sequence::Formula(terms) => {
                let parts: Vec<String> = terms
                    .iter()
                    .map(|t| {
                        let mut den = Vec::new();
                        match t.j_power {
                            0 => {}
                            1 => den.push("j".to_string()),
                            p => den.push(format!("j^{p}")),
                        }
                        match (t.shift_power, t.shift) {
                            (0, _) => {}
                            (1, 0) => den.push("j".into()),
                            (1, s) => den.push(format!("(j+{s})")),
                            (p, s) => den.push(format!("(j+{s})^{p}")),
                        }
                        if den.is_empty() {
                            format!("{}", t.coeff)
                        } else {
                            format!("{}/({})", t.coeff, den.join("·"))
                        }
                    })
                    .collect();
                write!(f, "j ↦ {}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
            }
        }
    }
}

/// Exact image of a monomial (or unit vector) under one catalog operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonomialImage {
    Function(L2Function),
    Sequence(Sequence),
}

impl fmt::Display for MonomialImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonomialImage::Function(x) => write!(f, "{x}"),
            MonomialImage::Sequence(x) => write!(f, "{x}"),
        }
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::from((n, d))
}

/// Image of t^k (for operators on L²) or of the unit vector e^{(k+1)} (for
/// operators on ℓ²) under `op`.
pub fn apply_to_monomial(op: OperatorId, k: u32) -> MonomialImage {
    let kk = k as usize;
    let k1 = i64::from(k) + 1;
    let poly = |p: Polynomial| MonomialImage::Function(L2Function::polynomial(p));
    match op {
        OperatorId::J => poly(Polynomial::monomial(kk + 1, q(1, k1))),
        OperatorId::JStar => {
            poly(Polynomial::constant(q(1, k1)).sub(&Polynomial::monomial(kk + 1, q(1, k1))))
        }
        OperatorId::C => poly(Polynomial::monomial(kk, q(1, k1))),
        OperatorId::CStar if k == 0 => {
            MonomialImage::Function(L2Function { poly: Polynomial::zero(), neg_log: BigRational::from(1) })
        }
        OperatorId::CStar => {
            let c = q(1, i64::from(k));
            poly(Polynomial::constant(c.clone()).sub(&Polynomial::monomial(kk, c)))
        }
        OperatorId::Mult(Multiplier::Identity) => poly(Polynomial::monomial(kk + 1, q(1, 1))),
        OperatorId::Ha => MonomialImage::Sequence(Sequence::Formula(vec![SeqTerm {
            coeff: q(1, 1),
            j_power: 0,
            shift: k,
            shift_power: 1,
        }])),
        OperatorId::HaStar => poly(Polynomial::monomial(kk, q(1, 1))),
        OperatorId::D => MonomialImage::Sequence(Sequence::Unit { index: k + 1, value: q(1, k1) }),
    }
}

/// Applies `op` to an exact image. Supported: polynomial inputs for the L²
/// operators, `Ha` on any `L2Function`, `D` on any sequence and `Ha*` on unit vectors.
pub fn apply(op: OperatorId, x: &MonomialImage) -> Result<MonomialImage> {
    let unsupported = || Error::Unsupported(format!("{} applied to {x}", op.symbol()));
    match (op, x) {
        (OperatorId::Ha, MonomialImage::Function(f)) => {
            let mut terms: Vec<SeqTerm> = f
                .poly
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(d, c)| SeqTerm { coeff: c.clone(), j_power: 0, shift: d as u32, shift_power: 1 })
                .collect();
            if f.neg_log != 0 {
                terms.push(SeqTerm { coeff: f.neg_log.clone(), j_power: 2, shift: 0, shift_power: 0 });
            }
            Ok(MonomialImage::Sequence(Sequence::Formula(terms)))
        }
        (OperatorId::D, MonomialImage::Sequence(s)) => Ok(MonomialImage::Sequence(match s {
            Sequence::Formula(terms) => Sequence::Formula(
                terms.iter().map(|t| SeqTerm { j_power: t.j_power + 1, ..t.clone() }).collect(),
            ),
            Sequence::Unit { index, value } => Sequence::Unit {
                index: *index,
                value: BigRational::from(value / BigRational::from(*index)),
            },
        })),
        (OperatorId::HaStar, MonomialImage::Sequence(Sequence::Unit { index, value })) => Ok(MonomialImage::Function(
            L2Function::polynomial(Polynomial::monomial(*index as usize - 1, value.clone())),
        )),
        (_, MonomialImage::Function(f)) if op.domain() == super::Space::L2 && f.is_polynomial() => {
            // linear combination of monomial images
            let mut acc = L2Function::default();
            for (d, c) in f.poly.coeffs().iter().enumerate() {
                if *c == 0 {
                    continue;
                }
                match apply_to_monomial(op, d as u32) {
                    MonomialImage::Function(g) => {
                        acc.poly = acc.poly.add(&g.poly.scale(c));
                        acc.neg_log += BigRational::from(&g.neg_log * c);
                    }
                    MonomialImage::Sequence(_) => return Err(unsupported()),
                }
            }
            Ok(MonomialImage::Function(acc))
        }
        _ => Err(unsupported()),
    }
}

/// Outcome of the exact check Ha·C* = D·Ha on monomials.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct IdentityReport {
    pub k_max: u32,
    pub j_max: u32,
    pub checks: u64,
}

/// Checks (Ha C* t^k)_j = (D Ha t^k)_j for 0 ≤ k ≤ k_max, 1 ≤ j ≤ j_max in
/// exact arithmetic, and that both equal 1/(j(j+k)) (k ≥ 1) or 1/j² (k = 0).
pub fn verify_dha_identity(k_max: u32, j_max: u32) -> Result<IdentityReport> {
    if k_max < 1 || j_max < 1 {
        return Err(Error::Domain("verify_dha_identity needs k_max, j_max >= 1".into()));
    }
    let mut checks = 0u64;
    for k in 0..=k_max {
        let mono = MonomialImage::Function(L2Function::monomial(k));
        let left = apply(OperatorId::Ha, &apply(OperatorId::CStar, &mono)?)?;
        let right = apply(OperatorId::D, &apply(OperatorId::Ha, &mono)?)?;
        let (MonomialImage::Sequence(left), MonomialImage::Sequence(right)) = (left, right) else {
            return Err(Error::Contract("identity sides are not sequences".into()));
        };
        for j in 1..=j_max {
            let l = left.eval(j);
            let r = right.eval(j);
            let expected = if k == 0 {
                q(1, i64::from(j) * i64::from(j))
            } else {
                q(1, i64::from(j) * i64::from(j + k))
            };
            if l != r || l != expected {
                return Err(Error::IdentityMismatch { k, j, left: l.to_string(), right: r.to_string() });
            }
            checks += 1;
        }
    }
    Ok(IdentityReport { k_max, j_max, checks })
}
