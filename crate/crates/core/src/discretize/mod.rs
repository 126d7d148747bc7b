//! Finite Gram matrices of the catalog operators under three schemes:
//! left finite sections, midpoint collocation on the right, and Galerkin
//! projection onto piecewise constants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::numerics::{float_from_hex, float_to_hex, BigFloat, BigRational, DOUBLE_PRECISION};
use crate::operators::CompositionSpec;

mod galerkin;
mod hilbert;
mod left;
mod right;

pub use galerkin::{galerkin_gram, galerkin_gram_f64};
pub use hilbert::{dha_legendre_section, hilbert_inverse_exact, hilbert_inverse_float, HilbertInverse, EXACT_INVERSE_MAX};
pub use left::{hilbert_section, left_gram, HilbertSection};
pub use right::{right_gram, right_gram_direct};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    LeftSection,
    RightMidpoint,
    Galerkin,
}

impl Scheme {
    pub fn short_name(self) -> &'static str {
        match self {
            Scheme::LeftSection => "left",
            Scheme::RightMidpoint => "right",
            Scheme::Galerkin => "galerkin",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Scheme::LeftSection),
            "right" => Ok(Scheme::RightMidpoint),
            "galerkin" => Ok(Scheme::Galerkin),
            other => Err(Error::Invalid(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Arithmetic an assembled matrix was produced in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precision {
    Exact,
    Bits(u32),
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Exact => f.write_str("exact"),
            Precision::Bits(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GramEntries {
    Exact(SymMatrix<BigRational>),
    Float(SymMatrix<BigFloat>),
    Double(SymMatrix<f64>),
}

/// Symmetric positive semidefinite Gram matrix of a discretized operator.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub operator: CompositionSpec,
    pub scheme: Scheme,
    pub n: usize,
    pub precision: Precision,
    /// Dilogarithm tolerance, right midpoint scheme only.
    pub series_tol: Option<BigFloat>,
    pub entries: GramEntries,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, GramEntries::Exact(_))
    }

    pub fn exact(&self) -> Option<&SymMatrix<BigRational>> {
        match &self.entries {
            GramEntries::Exact(m) => Some(m),
            _ => None,
        }
    }

    /// Entries rounded to `prec` bits.
    pub fn to_float(&self, prec: u32) -> SymMatrix<BigFloat> {
        match &self.entries {
            GramEntries::Exact(m) => m.map(|q| BigFloat::with_val(prec, q)),
            GramEntries::Float(m) => m.map(|x| BigFloat::with_val(prec, x)),
            GramEntries::Double(m) => m.map(|x| BigFloat::with_val(prec, *x)),
        }
    }

    pub fn to_f64(&self) -> SymMatrix<f64> {
        match &self.entries {
            GramEntries::Exact(m) => m.map(|q| q.to_f64()),
            GramEntries::Float(m) => m.map(|x| x.to_f64()),
            GramEntries::Double(m) => m.clone(),
        }
    }

    /// Exact trace when the entries are rational.
    pub fn trace_exact(&self) -> Option<BigRational> {
        self.exact().map(|m| (0..self.n).map(|i| m.get(i, i).clone()).sum())
    }

    /// Leading k×k principal section (the left section of size k for
    /// `LeftSection` matrices).
    pub fn leading(&self, k: usize) -> GramMatrix {
        let entries = match &self.entries {
            GramEntries::Exact(m) => GramEntries::Exact(m.leading(k)),
            GramEntries::Float(m) => GramEntries::Float(m.leading(k)),
            GramEntries::Double(m) => GramEntries::Double(m.leading(k)),
        };
        GramMatrix { n: k, entries, ..self.clone() }
    }

    pub fn to_json(&self) -> GramFile {
        let entries = match &self.entries {
            GramEntries::Exact(m) => m.packed().iter().map(|q| q.to_string()).collect(),
            GramEntries::Float(m) => m.packed().iter().map(float_to_hex).collect(),
            GramEntries::Double(m) => m
                .packed()
                .iter()
                .map(|x| float_to_hex(&BigFloat::with_val(DOUBLE_PRECISION, *x)))
                .collect(),
        };
        let (precision, kind) = match (&self.precision, &self.entries) {
            (Precision::Exact, _) => (serde_json::Value::from("exact"), "rational"),
            (Precision::Bits(p), GramEntries::Double(_)) => (serde_json::Value::from(*p), "double"),
            (Precision::Bits(p), _) => (serde_json::Value::from(*p), "float"),
        };
        GramFile {
            scheme: self.scheme.short_name().into(),
            operator: self.operator.name().into(),
            n: self.n,
            precision,
            series_tol: self.series_tol.as_ref().map(float_to_hex),
            layout: PACKED_LAYOUT.into(),
            entry_kind: kind.into(),
            entries,
        }
    }

    pub fn from_json(file: &GramFile) -> Result<GramMatrix> {
        if file.layout != PACKED_LAYOUT {
            return Err(Error::Invalid(format!("unsupported layout {:?}", file.layout)));
        }
        let operator: CompositionSpec = file.operator.parse()?;
        let scheme: Scheme = file.scheme.parse()?;
        let precision = match &file.precision {
            serde_json::Value::String(s) if s == "exact" => Precision::Exact,
            serde_json::Value::Number(n) => Precision::Bits(
                n.as_u64()
                    .and_then(|p| u32::try_from(p).ok())
                    .ok_or_else(|| Error::Invalid(format!("bad precision {n}")))?,
            ),
            other => return Err(Error::Invalid(format!("bad precision {other}"))),
        };
        let n = file.n;
        let bad_len = || Error::Invalid(format!("expected {} packed entries, got {}", n * (n + 1) / 2, file.entries.len()));
        let entries = match (precision, file.entry_kind.as_str()) {
            (Precision::Exact, "rational") => {
                let data = file
                    .entries
                    .iter()
                    .map(|s| s.parse::<BigRational>().map_err(|_| Error::Invalid(format!("bad rational {s:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                GramEntries::Exact(SymMatrix::from_packed(n, data).ok_or_else(bad_len)?)
            }
            (Precision::Bits(p), "float") => {
                let data = file.entries.iter().map(|s| float_from_hex(s, p)).collect::<Result<Vec<_>>>()?;
                GramEntries::Float(SymMatrix::from_packed(n, data).ok_or_else(bad_len)?)
            }
            (Precision::Bits(_), "double") => {
                let data = file
                    .entries
                    .iter()
                    .map(|s| float_from_hex(s, DOUBLE_PRECISION).map(|x| x.to_f64()))
                    .collect::<Result<Vec<_>>>()?;
                GramEntries::Double(SymMatrix::from_packed(n, data).ok_or_else(bad_len)?)
            }
            (p, k) => return Err(Error::Invalid(format!("entry kind {k:?} does not match precision {p}"))),
        };
        let series_tol = match (&file.series_tol, precision) {
            (Some(s), Precision::Bits(p)) => Some(float_from_hex(s, p)?),
            (Some(_), Precision::Exact) => return Err(Error::Invalid("series_tol on an exact matrix".into())),
            (None, _) => None,
        };
        Ok(GramMatrix { operator, scheme, n, precision, series_tol, entries })
    }
}

const PACKED_LAYOUT: &str = "upper-packed-row-major";

/// On-disk form of a Gram matrix. Rationals serialize as `"p/q"`, floats as
/// hex floats, so a round trip is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramFile {
    pub scheme: String,
    pub operator: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub precision: serde_json::Value,
    pub series_tol: Option<String>,
    pub layout: String,
    pub entry_kind: String,
    pub entries: Vec<String>,
}

/// Assembles the Gram matrix of `op` under `scheme`. `prec` is used by the
/// float schemes; `tol` is the dilogarithm tolerance of the right scheme.
pub fn assemble(op: &CompositionSpec, scheme: Scheme, n: usize, prec: u32, tol: &BigFloat) -> Result<GramMatrix> {
    match scheme {
        Scheme::LeftSection => left_gram(op, n),
        Scheme::RightMidpoint => right_gram(op, n, &BigFloat::with_val(prec, tol)),
        Scheme::Galerkin => galerkin_gram(op, n, prec),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("matrix dimension must be at least 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_exact_and_float() {
        let op: CompositionSpec = "DHa".parse().unwrap();
        let g = left_gram(&op, 4).unwrap();
        let back = GramMatrix::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);

        let tol = BigFloat::with_val(128, 1e-30);
        let r = right_gram(&op, 3, &tol).unwrap();
        let text = serde_json::to_string(&r.to_json()).unwrap();
        let file: GramFile = serde_json::from_str(&text).unwrap();
        assert_eq!(GramMatrix::from_json(&file).unwrap(), r);

        let d = galerkin_gram_f64(&"J".parse().unwrap(), 5).unwrap();
        assert_eq!(GramMatrix::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn json_rejects_mismatches() {
        let op: CompositionSpec = "DHa".parse().unwrap();
        let mut f = left_gram(&op, 3).unwrap().to_json();
        f.entries.pop();
        assert!(GramMatrix::from_json(&f).is_err());
        let mut f = left_gram(&op, 3).unwrap().to_json();
        f.entry_kind = "float".into();
        assert!(GramMatrix::from_json(&f).is_err());
    }

    #[test]
    fn scheme_names() {
        for s in ["left", "right", "galerkin"] {
            assert_eq!(s.parse::<Scheme>().unwrap().to_string(), s);
        }
        assert!("middle".parse::<Scheme>().is_err());
    }
}
