use std::collections::HashMap;

use rayon::prelude::*;

use super::{check_n, GramEntries, GramMatrix, Precision, Scheme};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::numerics::{dilog, inverse_square_tail, sum_with_tail, working_epsilon, zeta_even, BigFloat, BigRational};
use crate::operators::{CompositionSpec, KnownComposition};

fn midpoint(k: usize, n: usize, prec: u32) -> BigFloat {
    BigFloat::with_val(prec, BigRational::from(((2 * k - 1) as u64, (2 * n) as u64)))
}

fn check_inputs(op: &CompositionSpec, n: usize, tol: &BigFloat) -> Result<KnownComposition> {
    check_n(n)?;
    let kind = match op.kind() {
        Some(k @ (KnownComposition::DHa | KnownComposition::HaJ)) => k,
        _ => return Err(Error::Unsupported(format!("the right scheme covers DHa and HaJ, not {op}"))),
    };
    let prec = tol.prec();
    let floor = working_epsilon(prec);
    if !(tol.is_finite() && *tol > 0) {
        return Err(Error::Domain(format!("series tolerance must be positive, got {tol}")));
    }
    if *tol < floor {
        return Err(Error::ToleranceUnachievable {
            requested: tol.to_f64(),
            reason: format!("{prec}-bit arithmetic resolves only {:e}", floor.to_f64()),
        });
    }
    Ok(kind)
}

fn wrap(op: &CompositionSpec, n: usize, tol: &BigFloat, m: SymMatrix<BigFloat>) -> GramMatrix {
    GramMatrix {
        operator: op.clone(),
        scheme: Scheme::RightMidpoint,
        n,
        precision: Precision::Bits(tol.prec()),
        series_tol: Some(tol.clone()),
        entries: GramEntries::Float(m),
    }
}

fn packed_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|k| (k..n).map(move |l| (k, l))).collect()
}

/// Gram matrix of midpoint collocation with weights 1/N at t_k = (k − ½)/N,
/// from the dilogarithm closed forms
///
/// * `DHa`: (1/N)·Li₂(t_k t_l)/(t_k t_l)
/// * `HaJ`: (1/N)·[ζ(2) − Li₂(t_k) − Li₂(t_l) + Li₂(t_k t_l)]
///
/// Every dilogarithm is summed to within `tol`, at the precision of `tol`.
pub fn right_gram(op: &CompositionSpec, n: usize, tol: &BigFloat) -> Result<GramMatrix> {
    let kind = check_inputs(op, n, tol)?;
    let prec = tol.prec();
    let t: Vec<BigFloat> = (1..=n).map(|k| midpoint(k, n, prec)).collect();
    let pairs = packed_pairs(n);

    let products: Vec<BigFloat> = pairs.iter().map(|&(k, l)| BigFloat::with_val(prec, &t[k] * &t[l])).collect();
    let li_products = products
        .par_iter()
        .map(|x| dilog(x, tol).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;

    let data: Vec<BigFloat> = match kind {
        KnownComposition::DHa => products
            .iter()
            .zip(&li_products)
            .map(|(x, li)| {
                let mut v = BigFloat::with_val(prec, li / x);
                v /= n as u64;
                v
            })
            .collect(),
        _ => {
            let zeta2 = zeta_even(2, prec)?;
            let li_t = t.iter().map(|x| dilog(x, tol).map(|r| r.value)).collect::<Result<Vec<_>>>()?;
            pairs
                .iter()
                .zip(&li_products)
                .map(|(&(k, l), li)| {
                    let mut v = BigFloat::with_val(prec, &zeta2 - &li_t[k]);
                    v -= &li_t[l];
                    v += li;
                    v /= n as u64;
                    v
                })
                .collect()
        }
    };
    let m = SymMatrix::from_packed(n, data).expect("packed length");
    Ok(wrap(op, n, tol, m))
}

/// Same matrix summed directly as Σ_j c_kj c_lj with the collocation columns
/// c_kj = t_k^{j−1}/j (`DHa`) or (1 − t_k^j)/j (`HaJ`). Geometric tails are
/// majorized; the 1/j² tail of `HaJ` is replaced by its Euler–Maclaurin
/// expansion and only the expansion error is counted against `tol`.
pub fn right_gram_direct(op: &CompositionSpec, n: usize, tol: &BigFloat) -> Result<GramMatrix> {
    let kind = check_inputs(op, n, tol)?;
    let prec = tol.prec();
    let t: Vec<BigFloat> = (1..=n).map(|k| midpoint(k, n, prec)).collect();
    let one = BigFloat::with_val(prec, 1u32);
    let mut cache: HashMap<(usize, usize), BigFloat> = HashMap::new();
    for (k, l) in packed_pairs(n) {
        let v = match kind {
            KnownComposition::DHa => {
                let x = BigFloat::with_val(prec, &t[k] * &t[l]);
                let gap = BigFloat::with_val(prec, &one - &x);
                let mut pow = BigFloat::with_val(prec, 1u32);
                let mut majorant_pow = BigFloat::with_val(prec, 1u32);
                sum_with_tail(
                    |j| {
                        let term = BigFloat::with_val(prec, &pow / (j * j));
                        pow *= &x;
                        term
                    },
                    |big_j| {
                        // Σ_{j>J} x^{j−1}/j² ≤ x^J / ((J+1)²(1−x))
                        if big_j > 0 {
                            majorant_pow *= &x;
                        }
                        let d = (big_j + 1) * (big_j + 1);
                        BigFloat::with_val(prec, &majorant_pow / &gap) / d
                    },
                    tol,
                )?
                .value
            }
            _ => {
                let (a, b) = (&t[k], &t[l]);
                let ga = BigFloat::with_val(prec, &one - a);
                let gb = BigFloat::with_val(prec, &one - b);
                let (mut pa, mut pb) = (a.clone(), b.clone());
                let (mut ma, mut mb) = (a.clone(), b.clone());
                let r = sum_with_tail(
                    |j| {
                        let fa = BigFloat::with_val(prec, &one - &pa);
                        let fb = BigFloat::with_val(prec, &one - &pb);
                        pa *= a;
                        pb *= b;
                        BigFloat::with_val(prec, fa * fb) / (j * j)
                    },
                    |big_j| {
                        if big_j == 0 {
                            return BigFloat::with_val(prec, 2u32);
                        }
                        // ma, mb hold a^{J+1}, b^{J+1}
                        ma *= a;
                        mb *= b;
                        let (_, em) = inverse_square_tail(big_j, prec).expect("J >= 1");
                        let geo = BigFloat::with_val(prec, &ma / &ga) + BigFloat::with_val(prec, &mb / &gb);
                        em + geo / ((big_j + 1) * (big_j + 1))
                    },
                    tol,
                )?;
                let (tail, _) = inverse_square_tail(r.terms_used.max(1), prec)?;
                r.value + tail
            }
        };
        cache.insert((k, l), v / n as u64);
    }
    let m = SymMatrix::from_fn(n, |k, l| cache.remove(&(k, l)).expect("every pair assembled"));
    Ok(wrap(op, n, tol, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ratio;

    fn tol(prec: u32, v: f64) -> BigFloat {
        BigFloat::with_val(prec, v)
    }

    #[test]
    fn dha_n1_value() {
        let op: CompositionSpec = "DHa".parse().unwrap();
        let g = right_gram(&op, 1, &tol(256, 1e-60)).unwrap();
        let v = g.to_float(256);
        // 4·Li₂(1/4) against Σ 4^{−(j−1)}/j² summed by hand
        let mut direct = BigFloat::new(256);
        for j in 1..400u32 {
            direct += BigFloat::with_val(256, BigFloat::with_val(256, 1u32) >> (2 * (j - 1))) / (j * j);
        }
        let diff = BigFloat::with_val(256, v.get(0, 0) - &direct).abs();
        assert!(diff < 1e-58, "{diff}");
        assert!((v.get(0, 0).to_f64() - 1.07061).abs() < 1e-5);
    }

    #[test]
    fn haj_n1_value() {
        let op: CompositionSpec = "HaJ".parse().unwrap();
        let g = right_gram(&op, 1, &tol(256, 1e-60)).unwrap();
        let v = g.to_float(256).get(0, 0).clone();
        // ζ(2) − 2Li₂(1/2) + Li₂(1/4), with Li₂(1/2) = π²/12 − ln²2/2
        let ln2 = BigFloat::with_val(256, rug::float::Constant::Log2);
        let li_half = zeta_even(2, 256).unwrap() / 2u32 - BigFloat::with_val(256, ln2.square_ref()) / 2u32;
        let li_quarter = dilog(&ratio(1, 4, 256), &tol(256, 1e-70)).unwrap().value;
        let want = zeta_even(2, 256).unwrap() - li_half * 2u32 + li_quarter;
        assert!(BigFloat::with_val(256, &v - &want).abs() < 1e-58);
    }

    #[test]
    fn closed_forms_match_direct_series() {
        let t = tol(192, 1e-40);
        let eight_tol = BigFloat::with_val(192, &t * 8u32);
        for name in ["DHa", "HaJ"] {
            let op: CompositionSpec = name.parse().unwrap();
            for n in [1usize, 2, 5] {
                let a = right_gram(&op, n, &t).unwrap().to_float(192);
                let b = right_gram_direct(&op, n, &t).unwrap().to_float(192);
                for k in 0..n {
                    for l in 0..n {
                        let d = BigFloat::with_val(192, a.get(k, l) - b.get(k, l)).abs();
                        assert!(d <= eight_tol, "{name} N={n} ({k},{l}) differs by {d}");
                        assert!(*a.get(k, l) > 0);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let op: CompositionSpec = "DHa".parse().unwrap();
        let err = right_gram(&op, 3, &tol(64, 1e-30)).unwrap_err();
        assert!(matches!(err, Error::ToleranceUnachievable { .. }));
        assert!(right_gram(&"J".parse().unwrap(), 3, &tol(128, 1e-20)).is_err());
        assert!(right_gram(&op, 0, &tol(128, 1e-20)).is_err());
    }
}
