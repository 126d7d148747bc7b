//! Galerkin matrices on the orthonormal basis φ_k = √N·1_{[(k−1)/N, k/N)}.
//!
//! For each catalog operator T, Tφ_k/√N is a Laurent polynomial g_k on its
//! own cell and another one, p_k, to the right of it (zero to the left):
//!
//! | T   | g_k(s)               | p_k(s)        |
//! |-----|----------------------|---------------|
//! | J   | s − a                | h             |
//! | J²  | (s − a)²/2           | h(s − m)      |
//! | M_t J | s(s − a)           | h s           |
//! | C J | (s − a)²/(2s)        | h(1 − m/s)    |
//!
//! with h = 1/N, a = (k−1)h and m = a + h/2. Only C J produces s⁻¹ terms and
//! hence logarithms of l/(l−1) and N/l.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use rug::Integer;

use super::{check_n, GramEntries, GramMatrix, Precision, Scheme};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::numerics::{BigFloat, BigRational, DOUBLE_PRECISION};
use crate::operators::{CompositionSpec, KnownComposition};

fn galerkin_kind(op: &CompositionSpec) -> Result<KnownComposition> {
    match op.kind() {
        Some(k @ (KnownComposition::J | KnownComposition::J2 | KnownComposition::MJ | KnownComposition::CJ)) => Ok(k),
        _ => Err(Error::Unsupported(format!("Galerkin matrices cover J, J2, MJ and CJ, not {op}"))),
    }
}

/// Σ c_n s^n with rational coefficients, n possibly negative.
#[derive(Debug, Clone, Default)]
struct Laurent(BTreeMap<i32, BigRational>);

impl Laurent {
    fn from_terms(terms: &[(i32, BigRational)]) -> Self {
        let mut m = BTreeMap::new();
        for (n, c) in terms {
            if *c != 0 {
                *m.entry(*n).or_insert_with(BigRational::new) += c;
            }
        }
        Laurent(m)
    }

    fn mul(&self, other: &Laurent) -> Laurent {
        let mut m: BTreeMap<i32, BigRational> = BTreeMap::new();
        for (a, x) in &self.0 {
            for (b, y) in &other.0 {
                *m.entry(a + b).or_insert_with(BigRational::new) += BigRational::from(x * y);
            }
        }
        Laurent(m)
    }
}

/// Exact integral: a rational part plus multiples of ln(num/den).
#[derive(Debug, Default)]
struct ExactIntegral {
    rational: BigRational,
    logs: Vec<((u64, u64), BigRational)>,
}

fn pow_frac(num: u64, n_cells: u64, e: i32) -> BigRational {
    let base = BigRational::from((Integer::from(num), Integer::from(n_cells)));
    if e >= 0 {
        let mut r = BigRational::from(1);
        for _ in 0..e {
            r *= &base;
        }
        r
    } else {
        let mut r = BigRational::from(1);
        for _ in 0..(-e) {
            r /= &base;
        }
        r
    }
}

/// ∫_{α/N}^{β/N} f(s) ds.
fn integrate(f: &Laurent, alpha: u64, beta: u64, n_cells: u64, out: &mut ExactIntegral) {
    if alpha == beta {
        return;
    }
    for (&e, c) in &f.0 {
        if *c == 0 {
            continue;
        }
        if e == -1 {
            assert!(alpha > 0, "s⁻¹ integrated up to 0");
            let g = Integer::from(beta).gcd(&Integer::from(alpha));
            let g = g.to_u64().expect("small gcd");
            out.logs.push(((beta / g, alpha / g), c.clone()));
        } else {
            if e < -1 {
                assert!(alpha > 0, "negative power integrated up to 0");
            }
            let diff = pow_frac(beta, n_cells, e + 1) - pow_frac(alpha, n_cells, e + 1);
            out.rational += diff * c / BigRational::from(e + 1);
        }
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::from((n, d))
}

fn pieces_exact(kind: KnownComposition, k: u64, n: u64) -> (Laurent, Laurent) {
    let nn = n as i64;
    let h = q(1, nn);
    let a = q(k as i64 - 1, nn);
    let m = q(2 * k as i64 - 1, 2 * nn);
    let neg = |x: BigRational| -x;
    let sq = |x: &BigRational| BigRational::from(x.square_ref());
    match kind {
        KnownComposition::J => (Laurent::from_terms(&[(1, q(1, 1)), (0, neg(a))]), Laurent::from_terms(&[(0, h)])),
        KnownComposition::J2 => (
            Laurent::from_terms(&[(2, q(1, 2)), (1, neg(a.clone())), (0, sq(&a) / 2u32)]),
            Laurent::from_terms(&[(1, h.clone()), (0, neg(h * m))]),
        ),
        KnownComposition::MJ => {
            (Laurent::from_terms(&[(2, q(1, 1)), (1, neg(a))]), Laurent::from_terms(&[(1, h)]))
        }
        KnownComposition::CJ => (
            Laurent::from_terms(&[(1, q(1, 2)), (0, neg(a.clone())), (-1, sq(&a) / 2u32)]),
            Laurent::from_terms(&[(0, h.clone()), (-1, neg(h * m))]),
        ),
        _ => unreachable!("checked by galerkin_kind"),
    }
}

/// N·⟨Tφ_k/√N, Tφ_l/√N⟩ for k ≤ l (one-based).
fn entry_exact(p: &[(Laurent, Laurent)], k: usize, l: usize, n: u64) -> ExactIntegral {
    let mut out = ExactIntegral::default();
    let (gk, pk) = &p[k - 1];
    let (gl, pl) = &p[l - 1];
    let (al, bl) = ((l - 1) as u64, l as u64);
    if k == l {
        integrate(&gk.mul(gk), al, bl, n, &mut out);
        integrate(&pk.mul(pk), bl, n, n, &mut out);
    } else {
        integrate(&pk.mul(gl), al, bl, n, &mut out);
        integrate(&pk.mul(pl), bl, n, n, &mut out);
    }
    out.rational *= BigRational::from(n);
    for (_, c) in out.logs.iter_mut() {
        *c *= BigRational::from(n);
    }
    out.logs.retain(|(_, c)| *c != 0);
    out
}

/// Galerkin matrix ⟨Tφ_k, Tφ_l⟩. Exact rationals for J, J2 and MJ; CJ
/// involves logarithms and is rounded to `prec` bits.
pub fn galerkin_gram(op: &CompositionSpec, n: usize, prec: u32) -> Result<GramMatrix> {
    check_n(n)?;
    let kind = galerkin_kind(op)?;
    let nn = n as u64;
    let pieces: Vec<_> = (1..=nn).map(|k| pieces_exact(kind, k, nn)).collect();
    let rows: Vec<Vec<ExactIntegral>> = (1..=n)
        .into_par_iter()
        .map(|k| (k..=n).map(|l| entry_exact(&pieces, k, l, nn)).collect())
        .collect();
    let flat: Vec<ExactIntegral> = rows.into_iter().flatten().collect();
    let has_logs = flat.iter().any(|e| !e.logs.is_empty());
    let (precision, entries) = if has_logs {
        let mut logs: HashMap<(u64, u64), BigFloat> = HashMap::new();
        let data = flat
            .into_iter()
            .map(|e| {
                let mut v = BigFloat::with_val(prec, &e.rational);
                for ((num, den), c) in &e.logs {
                    let ln = logs.entry((*num, *den)).or_insert_with(|| {
                        BigFloat::with_val(prec, BigRational::from((*num, *den))).ln()
                    });
                    v += BigFloat::with_val(prec, c) * &*ln;
                }
                v
            })
            .collect();
        (Precision::Bits(prec), GramEntries::Float(SymMatrix::from_packed(n, data).expect("packed length")))
    } else {
        let data = flat.into_iter().map(|e| e.rational).collect();
        (Precision::Exact, GramEntries::Exact(SymMatrix::from_packed(n, data).expect("packed length")))
    };
    Ok(GramMatrix { operator: op.clone(), scheme: Scheme::Galerkin, n, precision, series_tol: None, entries })
}

/// Σ c_n s^n in doubles.
type LaurentF = Vec<(i32, f64)>;

fn mul_f(a: &LaurentF, b: &LaurentF) -> LaurentF {
    let mut out: Vec<(i32, f64)> = Vec::with_capacity(a.len() * b.len());
    for &(ea, ca) in a {
        for &(eb, cb) in b {
            let e = ea + eb;
            match out.iter_mut().find(|(x, _)| *x == e) {
                Some(slot) => slot.1 += ca * cb,
                None => out.push((e, ca * cb)),
            }
        }
    }
    out
}

fn integrate_f(f: &LaurentF, alpha: u64, beta: u64, n_cells: u64) -> f64 {
    if alpha == beta {
        return 0.0;
    }
    let (a, b) = (alpha as f64 / n_cells as f64, beta as f64 / n_cells as f64);
    f.iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|&(e, c)| {
            if e == -1 {
                c * ((beta - alpha) as f64 / alpha as f64).ln_1p()
            } else {
                c * (b.powi(e + 1) - a.powi(e + 1)) / f64::from(e + 1)
            }
        })
        .sum()
}

fn pieces_f(kind: KnownComposition, k: u64, n: u64) -> (LaurentF, LaurentF) {
    let nf = n as f64;
    let h = 1.0 / nf;
    let a = (k - 1) as f64 / nf;
    let m = (2 * k - 1) as f64 / (2.0 * nf);
    let clean = |v: Vec<(i32, f64)>| v.into_iter().filter(|(_, c)| *c != 0.0).collect::<LaurentF>();
    match kind {
        KnownComposition::J => (clean(vec![(1, 1.0), (0, -a)]), vec![(0, h)]),
        KnownComposition::J2 => (clean(vec![(2, 0.5), (1, -a), (0, a * a / 2.0)]), vec![(1, h), (0, -h * m)]),
        KnownComposition::MJ => (clean(vec![(2, 1.0), (1, -a)]), vec![(1, h)]),
        KnownComposition::CJ => (clean(vec![(1, 0.5), (0, -a), (-1, a * a / 2.0)]), vec![(0, h), (-1, -h * m)]),
        _ => unreachable!("checked by galerkin_kind"),
    }
}

/// The Galerkin matrix in IEEE doubles, for large N.
///
/// Entries are accurate to a few ulps of the largest entry, not of each
/// entry: the in-cell integrals of the smallest entries cancel.
pub fn galerkin_gram_f64(op: &CompositionSpec, n: usize) -> Result<GramMatrix> {
    check_n(n)?;
    let kind = galerkin_kind(op)?;
    let nn = n as u64;
    let pieces: Vec<_> = (1..=nn).map(|k| pieces_f(kind, k, nn)).collect();
    let nf = n as f64;
    let data: Vec<f64> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let (gk, pk) = &pieces[k - 1];
            (k..=n)
                .map(|l| {
                    let (gl, pl) = &pieces[l - 1];
                    let (al, bl) = ((l - 1) as u64, l as u64);
                    let v = if k == l {
                        integrate_f(&mul_f(gk, gk), al, bl, nn) + integrate_f(&mul_f(pk, pk), bl, nn, nn)
                    } else {
                        integrate_f(&mul_f(pk, gl), al, bl, nn) + integrate_f(&mul_f(pk, pl), bl, nn, nn)
                    };
                    nf * v
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    Ok(GramMatrix {
        operator: op.clone(),
        scheme: Scheme::Galerkin,
        n,
        precision: Precision::Bits(DOUBLE_PRECISION),
        series_tol: None,
        entries: GramEntries::Double(SymMatrix::from_packed(n, data).expect("packed length")),
    })
}
