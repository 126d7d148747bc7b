//! Scalar arithmetic: exact rationals, p-bit floats, special constants,
//! the dilogarithm and a series engine with certified tail bounds.
//!
//! Rationals and floats are GMP/MPFR values re-exported under the names the
//! rest of the crate uses. Every float carries its own precision; operations
//! round to nearest.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use rug::float::Constant;
use rug::ops::Pow;

use crate::error::{Error, Result};

mod hexfloat;
mod series;

pub use hexfloat::{float_from_hex, float_to_hex};
pub use series::{dilog, inverse_square_tail, sum_with_tail, sum_with_tail_capped, SeriesResult};

pub use rug::Float as BigFloat;
pub use rug::Integer as BigInt;
pub use rug::Rational as BigRational;

/// Working precision used when nothing else is requested.
pub const DEFAULT_PRECISION: u32 = 256;
/// Precision used to reproduce the published figures.
pub const FIGURE_PRECISION: u32 = 512;
/// Guard bits withheld from every convergence or trust threshold.
pub const GUARD_BITS: u32 = 16;
/// Mantissa width of an IEEE double, used to tag the double-precision path.
pub const DOUBLE_PRECISION: u32 = 53;

/// Default cap on the number of terms `sum_with_tail` will add.
pub const DEFAULT_TERM_CAP: u64 = 20_000_000;

static PI_CACHE: OnceLock<RwLock<HashMap<u32, BigFloat>>> = OnceLock::new();

/// π rounded to `prec` bits. Computed once per precision and cached.
pub fn pi(prec: u32) -> BigFloat {
    let cache = PI_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().expect("pi cache poisoned").get(&prec) {
        return v.clone();
    }
    let value = BigFloat::with_val(prec, Constant::Pi);
    // Racing writers insert identical values.
    cache
        .write()
        .expect("pi cache poisoned")
        .entry(prec)
        .or_insert(value)
        .clone()
}

/// ζ(k) for k ∈ {2, 4} from the closed forms π²/6 and π⁴/90.
pub fn zeta_even(k: u32, prec: u32) -> Result<BigFloat> {
    let p = pi(prec);
    match k {
        2 => Ok(BigFloat::with_val(prec, p.square_ref()) / 6u32),
        4 => Ok(BigFloat::with_val(prec, (&p).pow(4u32)) / 90u32),
        _ => Err(Error::Unsupported(format!(
            "zeta_even only covers k = 2 and k = 4, got {k}"
        ))),
    }
}

/// 2^{-(prec - GUARD_BITS)}, the relative threshold used for convergence and trust.
pub fn working_epsilon(prec: u32) -> BigFloat {
    let shift = prec.saturating_sub(GUARD_BITS) as i32;
    BigFloat::with_val(prec, 1u32) >> shift
}

/// Correctly rounded conversion of an exact rational.
pub fn rational_to_float(q: &BigRational, prec: u32) -> BigFloat {
    BigFloat::with_val(prec, q)
}

/// `n / d` rounded to `prec` bits.
pub fn ratio(n: i64, d: i64, prec: u32) -> BigFloat {
    rational_to_float(&BigRational::from((n, d)), prec)
}

/// Natural logarithm of a positive float, converted to f64 without underflow.
pub fn ln_f64(x: &BigFloat) -> f64 {
    BigFloat::with_val(x.prec().max(64), x.ln_ref()).to_f64()
}

/// log10 of a positive float, converted to f64 without underflow.
pub fn log10_f64(x: &BigFloat) -> f64 {
    BigFloat::with_val(x.prec().max(64), x.log10_ref()).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_closed_forms() {
        let z2 = zeta_even(2, 128).unwrap();
        assert!((z2.to_f64() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
        assert!((z2.to_f64() - 1.644934).abs() < 1e-6);
        let z4 = zeta_even(4, 128).unwrap();
        assert!((z4.to_f64() - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-15);
        assert!(matches!(zeta_even(3, 128), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pi_cache_is_stable_across_threads() {
        let handles: Vec<_> = (0..8)
            .map(|_| std::thread::spawn(|| float_to_hex(&pi(333))))
            .collect();
        let first = float_to_hex(&pi(333));
        for h in handles {
            assert_eq!(h.join().unwrap(), first);
        }
    }

    #[test]
    fn epsilon_has_guard_bits() {
        let e = working_epsilon(64);
        assert_eq!(e, BigFloat::with_val(64, 1u32) >> 48i32);
    }

    #[test]
    fn rational_conversion_is_correctly_rounded() {
        let q = BigRational::from((1, 3));
        let f = rational_to_float(&q, 53);
        assert_eq!(f.to_f64(), 1.0 / 3.0);
    }
}
