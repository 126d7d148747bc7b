//! Cyclic two-sided Jacobi in p-bit arithmetic.

use crate::error::{Error, Result};
use crate::linalg::{FloatMatrix, SymMatrix};
use crate::numerics::{working_epsilon, BigFloat};

/// Upper bound on sweeps; quadratic convergence needs far fewer.
const MAX_SWEEPS: u64 = 200;

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Eigenvalues sorted descending, negatives near zero clamped to 0.
    pub values: Vec<BigFloat>,
    /// Column i is the unit eigenvector of `values[i]`, when requested.
    pub vectors: Option<FloatMatrix>,
    pub sweeps: u64,
    /// Frobenius norm of the input.
    pub frobenius: BigFloat,
    pub trace: BigFloat,
}

fn off_norm(a: &[Vec<BigFloat>], prec: u32) -> BigFloat {
    let mut acc = BigFloat::new(prec);
    for (i, row) in a.iter().enumerate() {
        for x in &row[i + 1..] {
            acc += BigFloat::with_val(prec, x.square_ref());
        }
    }
    acc *= 2u32;
    acc.sqrt()
}

/// Eigen-decomposition of a symmetric matrix at precision `prec`.
///
/// Sweeps visit (p, q) pairs row by row. With ε = 2^{−(p−g)}, a pair is
/// skipped when |a_pq| ≤ ε·√|a_pp a_qq| and |a_pq| ≤ ε‖A‖_F/n. A sweep that
/// rotates nothing therefore leaves an off-diagonal Frobenius norm of at most
/// ε‖A‖_F, which is the stopping rule.
/// Eigenvalues below zero are clamped when within ε·trace and rejected otherwise.
pub fn jacobi(a: &SymMatrix<BigFloat>, prec: u32, want_vectors: bool) -> Result<Eigen> {
    let n = a.dim();
    let eps = working_epsilon(prec);
    let mut m: Vec<Vec<BigFloat>> =
        (0..n).map(|i| (0..n).map(|j| BigFloat::with_val(prec, a.get(i, j))).collect()).collect();
    let mut v = want_vectors.then(|| FloatMatrix::identity(n, prec));

    let mut frob = BigFloat::new(prec);
    let mut trace = BigFloat::new(prec);
    for (i, row) in m.iter().enumerate() {
        trace += &row[i];
        for x in row {
            frob += BigFloat::with_val(prec, x.square_ref());
        }
    }
    let frob = frob.sqrt();
    let target = BigFloat::with_val(prec, &eps * &frob);
    let per_entry = BigFloat::with_val(prec, &target / n.max(1) as u32);

    let mut sweeps = 0u64;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].is_zero() {
                    continue;
                }
                let scale = BigFloat::with_val(prec, &m[p][p] * &m[q][q]).abs().sqrt();
                let rel = BigFloat::with_val(prec, &eps * &scale);
                let apq_abs = BigFloat::with_val(prec, m[p][q].abs_ref());
                if apq_abs <= rel && apq_abs <= per_entry {
                    continue;
                }
                rotated = true;
                rotate(&mut m, v.as_mut(), p, q, prec);
            }
        }
        sweeps += 1;
        if !rotated && off_norm(&m, prec) <= target {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence {
                what: format!("Jacobi off-diagonal norm {:e}", off_norm(&m, prec).to_f64()),
                iterations: sweeps,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[y][y].partial_cmp(&m[x][x]).expect("finite eigenvalues"));
    let floor = BigFloat::with_val(prec, &eps * trace.clone().abs());
    let mut values = Vec::with_capacity(n);
    for (rank, &i) in order.iter().enumerate() {
        let lam = m[i][i].clone();
        if lam < 0 {
            let mag = BigFloat::with_val(prec, lam.abs_ref());
            if mag > floor {
                return Err(Error::NegativeEigenvalue { index: rank + 1, value: lam.to_f64(), floor: floor.to_f64() });
            }
            values.push(BigFloat::new(prec));
        } else {
            values.push(lam);
        }
    }
    let vectors = v.map(|vm| FloatMatrix::from_fn(n, n, prec, |r, c| vm.get(r, order[c]).clone()));
    Ok(Eigen { values, vectors, sweeps, frobenius: frob, trace })
}

fn rotate(m: &mut [Vec<BigFloat>], v: Option<&mut FloatMatrix>, p: usize, q: usize, prec: u32) {
    let n = m.len();
    let apq = m[p][q].clone();
    let mut theta = BigFloat::with_val(prec, &m[q][q] - &m[p][p]);
    theta /= BigFloat::with_val(prec, &apq * 2u32);
    let root = (BigFloat::with_val(prec, theta.square_ref()) + 1u32).sqrt();
    let mut t = (BigFloat::with_val(prec, theta.abs_ref()) + &root).recip();
    if theta < 0 {
        t = -t;
    }
    let c = (BigFloat::with_val(prec, t.square_ref()) + 1u32).sqrt().recip();
    let s = BigFloat::with_val(prec, &t * &c);
    let shift = BigFloat::with_val(prec, &t * &apq);
    m[p][p] -= &shift;
    m[q][q] += &shift;
    m[p][q] = BigFloat::new(prec);
    m[q][p] = BigFloat::new(prec);
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = m[r][p].clone();
        let arq = m[r][q].clone();
        let new_rp = BigFloat::with_val(prec, &c * &arp) - BigFloat::with_val(prec, &s * &arq);
        let new_rq = BigFloat::with_val(prec, &s * &arp) + BigFloat::with_val(prec, &c * &arq);
        m[p][r] = new_rp.clone();
        m[r][p] = new_rp;
        m[q][r] = new_rq.clone();
        m[r][q] = new_rq;
    }
    if let Some(v) = v {
        for r in 0..n {
            let vrp = v.get(r, p).clone();
            let vrq = v.get(r, q).clone();
            v.set(r, p, BigFloat::with_val(prec, &c * &vrp) - BigFloat::with_val(prec, &s * &vrq));
            v.set(r, q, BigFloat::with_val(prec, &s * &vrp) + BigFloat::with_val(prec, &c * &vrq));
        }
    }
}
