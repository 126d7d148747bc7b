//! Catalog of the operators under study and their exact actions.
//!
//! * `J`, `J*` — integration and its adjoint on L²(0,1)
//! * `C`, `C*` — Cesàro averaging and its adjoint on L²(0,1)
//! * `Ha`, `Ha*` — Hausdorff moment operator L²(0,1) → ℓ² and its adjoint
//! * `D` — the diagonal operator (y_j) ↦ (y_j / j) on ℓ²
//! * `M_t` — multiplication by m(t) = t on L²(0,1)

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod legendre;
mod symbolic;

pub use legendre::{
    ha_on_legendre, hs_norm_squared_dha, hs_norm_tail_dha, legendre_basis, legendre_basis_gram_schmidt,
    LegendreBasis, LegendreMoments, LegendrePolynomial, Surd,
};
pub use symbolic::{
    apply, apply_to_monomial, verify_dha_identity, IdentityReport, L2Function, MonomialImage, Polynomial, SeqTerm,
    Sequence,
};

/// Function space an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    /// L²(0,1)
    L2,
    /// ℓ²
    Ell2,
}

/// Multiplier of a multiplication operator. Only m(t) = t is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Multiplier {
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorId {
    J,
    JStar,
    C,
    CStar,
    D,
    Ha,
    HaStar,
    Mult(Multiplier),
}

impl OperatorId {
    pub fn domain(self) -> Space {
        match self {
            OperatorId::D | OperatorId::HaStar => Space::Ell2,
            _ => Space::L2,
        }
    }

    pub fn codomain(self) -> Space {
        match self {
            OperatorId::D | OperatorId::Ha => Space::Ell2,
            _ => Space::L2,
        }
    }

    pub fn adjoint(self) -> OperatorId {
        match self {
            OperatorId::J => OperatorId::JStar,
            OperatorId::JStar => OperatorId::J,
            OperatorId::C => OperatorId::CStar,
            OperatorId::CStar => OperatorId::C,
            OperatorId::Ha => OperatorId::HaStar,
            OperatorId::HaStar => OperatorId::Ha,
            OperatorId::D => OperatorId::D,
            OperatorId::Mult(m) => OperatorId::Mult(m),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            OperatorId::J => "J",
            OperatorId::JStar => "J*",
            OperatorId::C => "C",
            OperatorId::CStar => "C*",
            OperatorId::D => "D",
            OperatorId::Ha => "Ha",
            OperatorId::HaStar => "Ha*",
            OperatorId::Mult(Multiplier::Identity) => "M_t",
        }
    }
}

/// The compositions the discretizers know how to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KnownComposition {
    /// J
    J,
    /// C·J
    CJ,
    /// J·J
    J2,
    /// M_t·J
    MJ,
    /// Ha·J
    HaJ,
    /// D·Ha (= Ha·C*)
    DHa,
    /// Ha alone; its left Gram matrix is the Hilbert section
    Ha,
}

/// An operator product, factors applied right to left.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionSpec {
    factors: Vec<OperatorId>,
    name: String,
}

impl CompositionSpec {
    pub fn new(factors: Vec<OperatorId>, name: impl Into<String>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Invalid("a composition needs at least one factor".into()));
        }
        for w in factors.windows(2) {
            // w[0] is applied after w[1]
            if w[1].codomain() != w[0].domain() {
                return Err(Error::Invalid(format!(
                    "{} cannot follow {}: {:?} vs {:?}",
                    w[0].symbol(),
                    w[1].symbol(),
                    w[1].codomain(),
                    w[0].domain()
                )));
            }
        }
        Ok(Self { factors, name: name.into() })
    }

    pub fn known(kind: KnownComposition) -> Self {
        use OperatorId::*;
        let (factors, name) = match kind {
            KnownComposition::J => (vec![J], "J"),
            KnownComposition::CJ => (vec![C, J], "CJ"),
            KnownComposition::J2 => (vec![J, J], "J2"),
            KnownComposition::MJ => (vec![Mult(Multiplier::Identity), J], "MJ"),
            KnownComposition::HaJ => (vec![Ha, J], "HaJ"),
            KnownComposition::DHa => (vec![D, Ha], "DHa"),
            KnownComposition::Ha => (vec![Ha], "HN"),
        };
        Self::new(factors, name).expect("catalog compositions are well typed")
    }

    pub fn factors(&self) -> &[OperatorId] {
        &self.factors
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Space {
        self.factors.last().expect("non-empty").domain()
    }

    pub fn codomain(&self) -> Space {
        self.factors[0].codomain()
    }

    /// Matches the factor list against the catalog. `Ha·C*` is reported as
    /// `DHa` since the two operators coincide.
    pub fn kind(&self) -> Option<KnownComposition> {
        use OperatorId::*;
        match self.factors.as_slice() {
            [J] => Some(KnownComposition::J),
            [C, J] => Some(KnownComposition::CJ),
            [J, J] => Some(KnownComposition::J2),
            [Mult(Multiplier::Identity), J] => Some(KnownComposition::MJ),
            [Ha, J] => Some(KnownComposition::HaJ),
            [D, Ha] | [Ha, CStar] => Some(KnownComposition::DHa),
            [Ha] => Some(KnownComposition::Ha),
            _ => None,
        }
    }

    pub fn product_symbol(&self) -> String {
        self.factors.iter().map(|f| f.symbol()).collect::<Vec<_>>().join("·")
    }
}

impl fmt::Display for CompositionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for CompositionSpec {
    type Err = Error;

    /// Accepts the short names `J`, `CJ`, `J2`, `MJ`, `HaJ`, `DHa`, `HaCstar`, `HN`.
    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "J" => KnownComposition::J,
            "CJ" => KnownComposition::CJ,
            "J2" => KnownComposition::J2,
            "MJ" => KnownComposition::MJ,
            "HaJ" => KnownComposition::HaJ,
            "DHa" => KnownComposition::DHa,
            "HaCstar" => {
                return CompositionSpec::new(vec![OperatorId::Ha, OperatorId::CStar], "HaCstar");
            }
            "HN" | "Ha" => KnownComposition::Ha,
            other => return Err(Error::Unsupported(format!("unknown operator {other:?}"))),
        };
        Ok(CompositionSpec::known(kind))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typing_of_compositions() {
        assert!(CompositionSpec::new(vec![OperatorId::D, OperatorId::Ha], "x").is_ok());
        // Ha lands in ℓ², J needs L²
        assert!(CompositionSpec::new(vec![OperatorId::J, OperatorId::Ha], "x").is_err());
        assert!(CompositionSpec::new(vec![], "x").is_err());
        let t: CompositionSpec = "HaCstar".parse().unwrap();
        assert_eq!(t.kind(), Some(KnownComposition::DHa));
        assert_eq!(t.domain(), Space::L2);
        assert_eq!(t.codomain(), Space::Ell2);
    }

    #[test]
    fn short_names_round_trip() {
        for s in ["J", "CJ", "J2", "MJ", "HaJ", "DHa", "HN"] {
            let c: CompositionSpec = s.parse().unwrap();
            assert_eq!(c.name(), s);
            assert!(c.kind().is_some());
        }
        assert!("XY".parse::<CompositionSpec>().is_err());
    }

    #[test]
    fn adjoint_is_an_involution() {
        use OperatorId::*;
        for op in [J, JStar, C, CStar, D, Ha, HaStar, Mult(Multiplier::Identity)] {
            assert_eq!(op.adjoint().adjoint(), op);
            assert_eq!(op.adjoint().domain(), op.codomain());
        }
    }
}
