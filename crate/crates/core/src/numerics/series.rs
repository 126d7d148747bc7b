use rug::Assign;

use super::{zeta_even, BigFloat, DEFAULT_TERM_CAP};
use crate::error::{Error, Result};

/// A series value together with the certificate that produced it.
#[derive(Debug, Clone)]
pub struct SeriesResult {
    pub value: BigFloat,
    pub terms_used: u64,
    /// Upper bound on |true sum − value| from the truncated tail.
    pub tail_bound: BigFloat,
}

/// Sums `term(1) + term(2) + …` until `tail_majorant(J) ≤ tol`.
///
/// `term` is called with j = 1, 2, 3, … in order, so it may carry running
/// state (powers, factorials). `tail_majorant(J)` must bound the absolute
/// remainder after J terms; it is consulted before each new term, so a
/// majorant that is already small at J = 0 yields an empty sum.
pub fn sum_with_tail<F, G>(term: F, tail_majorant: G, tol: &BigFloat) -> Result<SeriesResult>
where
    F: FnMut(u64) -> BigFloat,
    G: FnMut(u64) -> BigFloat,
{
    sum_with_tail_capped(term, tail_majorant, tol, DEFAULT_TERM_CAP)
}

pub fn sum_with_tail_capped<F, G>(
    mut term: F,
    mut tail_majorant: G,
    tol: &BigFloat,
    cap: u64,
) -> Result<SeriesResult>
where
    F: FnMut(u64) -> BigFloat,
    G: FnMut(u64) -> BigFloat,
{
    if !(tol.is_finite() && *tol > 0) {
        return Err(Error::Domain(format!("series tolerance must be positive, got {tol}")));
    }
    let prec = tol.prec();
    let mut sum = BigFloat::new(prec);
    let mut j = 0u64;
    loop {
        let bound = tail_majorant(j);
        if bound.is_nan() || bound < 0 {
            return Err(Error::Contract(format!("tail majorant at J = {j} is {bound}")));
        }
        if bound <= *tol {
            return Ok(SeriesResult { value: sum, terms_used: j, tail_bound: bound });
        }
        if j >= cap {
            return Err(Error::NoConvergence {
                what: format!("tail majorant still {} above tolerance {}", bound.to_f64(), tol.to_f64()),
                iterations: j,
            });
        }
        j += 1;
        sum += term(j);
    }
}

/// Li₂(x) = Σ_{j≥1} xʲ/j² for 0 ≤ x ≤ 1, evaluated at the precision of `x`.
///
/// The series is only summed for arguments ≤ 1/2; larger arguments go
/// through Li₂(x) = π²/6 − ln(x)·ln(1−x) − Li₂(1−x).
pub fn dilog(x: &BigFloat, tol: &BigFloat) -> Result<SeriesResult> {
    if x.is_nan() || *x < 0 || *x > 1 {
        return Err(Error::Domain(format!("dilog needs 0 <= x <= 1, got {x}")));
    }
    let prec = x.prec();
    if x.is_zero() {
        return Ok(SeriesResult {
            value: BigFloat::new(prec),
            terms_used: 0,
            tail_bound: BigFloat::new(prec),
        });
    }
    if *x == 1 {
        return Ok(SeriesResult {
            value: zeta_even(2, prec)?,
            terms_used: 0,
            tail_bound: BigFloat::new(prec),
        });
    }
    let half = BigFloat::with_val(prec, 0.5);
    if *x <= half {
        return dilog_series(x, tol);
    }
    let y = BigFloat::with_val(prec, 1u32 - x);
    let inner = dilog_series(&y, tol)?;
    let lnx = BigFloat::with_val(prec, x.ln_ref());
    let lny = BigFloat::with_val(prec, y.ln_ref());
    let mut value = zeta_even(2, prec)?;
    value -= lnx * lny;
    value -= &inner.value;
    Ok(SeriesResult { value, terms_used: inner.terms_used, tail_bound: inner.tail_bound })
}

fn dilog_series(x: &BigFloat, tol: &BigFloat) -> Result<SeriesResult> {
    let prec = x.prec();
    let tol = BigFloat::with_val(prec, tol);
    let one_minus = BigFloat::with_val(prec, 1u32 - x);
    let mut power = BigFloat::with_val(prec, 1u32);
    let mut tail_power = BigFloat::with_val(prec, x);
    sum_with_tail(
        |j| {
            power *= x;
            BigFloat::with_val(prec, &power / (j * j))
        },
        |big_j| {
            // x^{J+1} / ((1−x)(J+1)²)
            if big_j > 0 {
                tail_power *= x;
            }
            let n = big_j + 1;
            let mut b = BigFloat::with_val(prec, &tail_power / &one_minus);
            b /= n;
            b /= n;
            b
        },
        &tol,
    )
}

/// Σ_{j>J} 1/j² by its Euler–Maclaurin expansion, with a certified bound
/// on the error of the truncated expansion (valid for J ≥ 1).
pub fn inverse_square_tail(big_j: u64, prec: u32) -> Result<(BigFloat, BigFloat)> {
    if big_j == 0 {
        return Err(Error::Domain("inverse_square_tail needs J >= 1".into()));
    }
    let x = BigFloat::with_val(prec, big_j);
    let inv = BigFloat::with_val(prec, 1u32 / &x);
    let mut p = inv.clone(); // 1/J^k, advanced as we go
    let mut est = BigFloat::with_val(prec, &p);
    // coefficients of J^{-2}, ..., J^{-9}
    let coeffs: [(i32, u32); 8] = [(-1, 2), (1, 6), (0, 1), (-1, 30), (0, 1), (1, 42), (0, 1), (-1, 30)];
    for (num, den) in coeffs {
        p *= &inv;
        if num != 0 {
            let mut t = BigFloat::with_val(prec, &p / den);
            if num < 0 {
                t = -t;
            }
            est += t;
        }
    }
    p *= &inv;
    p *= &inv; // J^{-11}
    let mut bound = BigFloat::with_val(prec, &p * 5u32);
    bound /= 66u32;
    let mut out = BigFloat::new(prec);
    out.assign(&est);
    Ok((out, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{pi, ratio};
    use proptest::prelude::*;

    fn f(prec: u32, v: f64) -> BigFloat {
        BigFloat::with_val(prec, v)
    }

    #[test]
    fn dilog_endpoints() {
        let tol = f(128, 1e-30);
        let z = dilog(&BigFloat::new(128), &tol).unwrap();
        assert!(z.value.is_zero());
        assert_eq!(z.terms_used, 0);
        let one = dilog(&f(128, 1.0), &tol).unwrap();
        assert_eq!(one.value, zeta_even(2, 128).unwrap());
        assert!((one.value.to_f64() - 1.644934).abs() < 1e-6);
    }

    #[test]
    fn dilog_domain_errors() {
        let tol = f(64, 1e-10);
        assert!(matches!(dilog(&f(64, -0.1), &tol), Err(Error::Domain(_))));
        assert!(matches!(dilog(&f(64, 1.5), &tol), Err(Error::Domain(_))));
    }

    #[test]
    fn dilog_half_matches_direct_series() {
        // oracle: a million terms of the defining series plus the geometric
        // tail bound x^{J+1}/((1-x)(J+1)^2), which at x = 1/2 is negligible
        let prec = 128;
        let x = ratio(1, 2, prec);
        let mut direct = BigFloat::new(prec);
        let mut pw = BigFloat::with_val(prec, 1u32);
        for j in 1u64..=1_000_000 {
            pw *= &x;
            if pw.is_zero() {
                break;
            }
            direct += BigFloat::with_val(prec, &pw / (j * j));
        }
        let tol = f(prec, 1e-35);
        let got = dilog(&x, &tol).unwrap();
        let diff = BigFloat::with_val(prec, &got.value - &direct).abs();
        assert!(diff <= tol, "diff {diff}");
        assert!(got.tail_bound <= tol);
        // classical value π²/12 − ln²2/2 and MPFR's own Li₂
        let ln2 = BigFloat::with_val(prec, x.ln_ref());
        let closed = BigFloat::with_val(prec, pi(prec).square_ref()) / 12u32 - BigFloat::with_val(prec, ln2.square_ref()) / 2u32;
        assert!(BigFloat::with_val(prec, &got.value - &closed).abs() < 1e-35);
        let mpfr = BigFloat::with_val(prec, x.li2_ref());
        assert!(BigFloat::with_val(prec, &got.value - &mpfr).abs() < 1e-35);
    }

    #[test]
    fn dilog_above_half_agrees_with_mpfr() {
        let prec = 256;
        let tol = f(prec, 1e-60);
        for v in [0.51, 0.75, 0.9, 0.999, 0.999999] {
            let x = f(prec, v);
            let got = dilog(&x, &tol).unwrap();
            let reference = BigFloat::with_val(prec, x.li2_ref());
            let d = BigFloat::with_val(prec, &got.value - &reference).abs();
            assert!(d < 4e-60, "x = {v}: {d}");
        }
    }

    #[test]
    fn zeta2_from_engine() {
        let prec = 64;
        let tol = f(prec, 1e-4);
        let r = sum_with_tail(
            |j| BigFloat::with_val(prec, 1u32) / BigFloat::with_val(prec, j * j),
            |jj| BigFloat::with_val(prec, 1u32) / BigFloat::with_val(prec, jj),
            &tol,
        )
        .unwrap();
        let err = (r.value.to_f64() - std::f64::consts::PI.powi(2) / 6.0).abs();
        assert!(err <= 1e-4);
        assert_eq!(r.terms_used, 10_000);
    }

    #[test]
    fn hs_series_from_engine_matches_partial_fractions() {
        let prec = 128;
        let tol = f(prec, 1e-6);
        let r = sum_with_tail(
            |j| {
                let d = BigFloat::with_val(prec, j * j * (2 * j - 1));
                BigFloat::with_val(prec, 1u32) / d
            },
            |jj| {
                if jj == 0 {
                    BigFloat::with_val(prec, f64::INFINITY)
                } else {
                    BigFloat::with_val(prec, 1u32) / BigFloat::with_val(prec, 2 * jj * jj)
                }
            },
            &tol,
        )
        .unwrap();
        // oracle: 1/(j²(2j−1)) = −2/j − 1/j² + 4/(2j−1); summing
        // 4/(2j−1) − 2/j in pairs gives 4 ln 2, the rest is −ζ(2)
        let mut paired = 0.0f64;
        for j in 1..=2_000_000u64 {
            let jf = j as f64;
            paired += 4.0 / (2.0 * jf - 1.0) - 2.0 / jf;
        }
        let oracle_4ln2 = paired + 1.0 / 2_000_000.0; // tail of the paired sum ~ 1/J
        let expected = oracle_4ln2 - std::f64::consts::PI.powi(2) / 6.0;
        assert!((expected - 1.12766).abs() < 1e-5);
        assert!((r.value.to_f64() - expected).abs() < 1e-6 + 1e-9);
    }

    #[test]
    fn zero_series_is_empty() {
        let tol = f(64, 1e-20);
        let r = sum_with_tail(|_| BigFloat::new(64), |_| BigFloat::new(64), &tol).unwrap();
        assert!(r.value.is_zero());
        assert_eq!(r.terms_used, 0);
    }

    #[test]
    fn stalled_majorant_hits_cap() {
        let tol = f(64, 1e-20);
        let r = sum_with_tail_capped(|_| BigFloat::new(64), |_| f(64, 1.0), &tol, 100);
        assert!(matches!(r, Err(Error::NoConvergence { iterations: 100, .. })));
    }

    #[test]
    fn tighter_rerun_is_within_reported_tail() {
        let prec = 128;
        for (x, tol) in [(0.3, 1e-12), (0.45, 1e-20), (0.8, 1e-15)] {
            let xf = f(prec, x);
            let a = dilog(&xf, &f(prec, tol)).unwrap();
            let b = dilog(&xf, &f(prec, tol / 10.0)).unwrap();
            let d = BigFloat::with_val(prec, &a.value - &b.value).abs();
            assert!(d <= a.tail_bound, "x = {x}");
        }
    }

    #[test]
    fn inverse_square_tail_brackets_truth() {
        let prec = 256;
        for big_j in [1u64, 3, 10, 100] {
            let (est, bound) = inverse_square_tail(big_j, prec).unwrap();
            let mut truth = zeta_even(2, prec).unwrap();
            for j in 1..=big_j {
                truth -= BigFloat::with_val(prec, 1u32) / BigFloat::with_val(prec, j * j);
            }
            let d = BigFloat::with_val(prec, &truth - &est).abs();
            assert!(d <= bound, "J = {big_j}: {d} > {bound}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn reflection_identity(x in 0.001f64..0.999) {
            let prec = 192;
            let tol = f(prec, 1e-45);
            let xf = f(prec, x);
            let y = BigFloat::with_val(prec, 1u32 - &xf);
            let a = dilog(&xf, &tol).unwrap().value;
            let b = dilog(&y, &tol).unwrap().value;
            let logs = BigFloat::with_val(prec, xf.ln_ref()) * BigFloat::with_val(prec, y.ln_ref());
            let lhs = a + b + logs;
            let d = (lhs - zeta_even(2, prec).unwrap()).abs();
            prop_assert!(d <= 4e-45);
        }

        #[test]
        fn precision_increase_changes_little(x in 0.0f64..1.0) {
            let tol_lo = f(128, 2f64.powi(-126));
            let tol_hi = f(256, 2f64.powi(-200));
            let lo = dilog(&f(128, x), &tol_lo).unwrap().value;
            let hi = dilog(&f(256, x), &tol_hi).unwrap().value;
            if !hi.is_zero() {
                let rel = BigFloat::with_val(256, &hi - &lo).abs() / hi.clone().abs();
                prop_assert!(rel < 2f64.powi(-120));
            }
        }
    }
}
