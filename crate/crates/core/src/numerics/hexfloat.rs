//! Bit-exact text form for p-bit floats: `[-]0x<hex mantissa>p<binary exponent>`.
//!
//! The mantissa is an integer, so `0x3p-2` is 3·2⁻² = 0.75. Precision is not
//! encoded; the reader supplies it and the value must fit.

use rug::Integer;

use super::BigFloat;
use crate::error::{Error, Result};

pub fn float_to_hex(x: &BigFloat) -> String {
    if x.is_zero() {
        return if x.is_sign_negative() { "-0x0p+0".into() } else { "0x0p+0".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    let (mut mant, mut exp) = x.to_integer_exp().expect("finite float");
    // strip trailing zero bits so the text is canonical
    let tz = mant.find_one(0).unwrap_or(0);
    if tz > 0 {
        mant >>= tz;
        exp += tz as i32;
    }
    let sign = if mant < 0 { "-" } else { "" };
    let mag = mant.abs();
    format!("{sign}0x{}p{exp:+}", mag.to_string_radix(16))
}

pub fn float_from_hex(s: &str, prec: u32) -> Result<BigFloat> {
    let bad = || Error::Invalid(format!("malformed hex float {s:?}"));
    let t = s.trim();
    match t {
        "nan" => return Ok(BigFloat::with_val(prec, rug::float::Special::Nan)),
        "inf" => return Ok(BigFloat::with_val(prec, rug::float::Special::Infinity)),
        "-inf" => return Ok(BigFloat::with_val(prec, rug::float::Special::NegInfinity)),
        _ => {}
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let body = body.strip_prefix("0x").ok_or_else(bad)?;
    let (m, e) = body.split_once('p').ok_or_else(bad)?;
    let mant = Integer::from_str_radix(m, 16).map_err(|_| bad())?;
    let exp: i32 = e.parse().map_err(|_| bad())?;
    let bits = mant.significant_bits();
    if bits > prec {
        return Err(Error::Invalid(format!(
            "hex float {s:?} needs {bits} bits but precision is {prec}"
        )));
    }
    let mut f = BigFloat::with_val(prec, mant);
    f <<= exp;
    if neg {
        f = -f;
    }
    Ok(f)
}
