use rug::Integer;

use super::{check_n, GramEntries, GramMatrix, Precision, Scheme};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::numerics::BigRational;
use crate::operators::{CompositionSpec, KnownComposition};

/// N×N section of the Hilbert matrix, H_ij = 1/(i+j−1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSection {
    pub n: usize,
    pub entries: SymMatrix<BigRational>,
}

impl HilbertSection {
    /// One-based access.
    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        self.entries.get(i - 1, j - 1)
    }
}

fn unit_fraction(d: u64) -> BigRational {
    BigRational::from((Integer::from(1), Integer::from(d)))
}

pub fn hilbert_section(n: usize) -> Result<HilbertSection> {
    check_n(n)?;
    let entries = SymMatrix::from_fn(n, |i, j| unit_fraction((i + j + 1) as u64));
    Ok(HilbertSection { n, entries })
}

/// Exact Gram matrix P_N T T* P_N of the finite section from the left.
///
/// * `DHa`: 1/(i·j·(i+j−1))
/// * `HaJ`: 1/(j(i+1)) − 1/(j(j+1)(i+j+1))
/// * `HN`: the Hilbert section itself
pub fn left_gram(op: &CompositionSpec, n: usize) -> Result<GramMatrix> {
    check_n(n)?;
    let entries = match op.kind() {
        Some(KnownComposition::DHa) => {
            SymMatrix::from_fn(n, |i, j| {
                let (i, j) = ((i + 1) as u64, (j + 1) as u64);
                unit_fraction(i * j * (i + j - 1))
            })
        }
        Some(KnownComposition::HaJ) => {
            let entry = |i: u64, j: u64| unit_fraction(j * (i + 1)) - unit_fraction(j * (j + 1) * (i + j + 1));
            let m = SymMatrix::from_fn(n, |i, j| entry((i + 1) as u64, (j + 1) as u64));
            for i in 0..n {
                for j in i + 1..n {
                    if entry((j + 1) as u64, (i + 1) as u64) != *m.get(i, j) {
                        return Err(Error::NotSymmetric { row: i, col: j, gap: f64::NAN });
                    }
                }
            }
            m
        }
        Some(KnownComposition::Ha) => hilbert_section(n)?.entries,
        _ => {
            return Err(Error::Unsupported(format!(
                "left sections are implemented for DHa, HaJ and HN, not {op}"
            )))
        }
    };
    Ok(GramMatrix {
        operator: op.clone(),
        scheme: Scheme::LeftSection,
        n,
        precision: Precision::Exact,
        series_tol: None,
        entries: GramEntries::Exact(entries),
    })
}
