//! Quaternion SVD through the complex adjoint.
//!
//! Writing `Q = A + B j` with complex `A`, `B` (entry `w + xi + yj + zk` splits
//! into `A = w + xi`, `B = y + zi`), the adjoint
//!
//! ```text
//! chi(Q) = [  A        B     ]
//!          [ -conj(B)  conj(A) ]
//! ```
//!
//! is a `2m x 2n` complex matrix with `chi(Q) phi(v) = phi(Q v)` where
//! `phi(a + b j) = [a; -conj(b)]`. Its singular values come in equal pairs and
//! each pair spans the image of one quaternion line `v H`. Right singular
//! vectors of the adjoint are folded back through `phi^-1`, orthonormalised
//! within each cluster of equal singular values, and the left vectors follow
//! from `u = Q v / sigma`. Null-space columns are completed from the standard
//! basis.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::matrix::{inner, vector_norm, QuaternionMatrix};
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// `a = U diag(singular_values) V^H` with square unitary `U` (rows x rows) and `V` (cols x cols).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSvdResult {
    pub u: QuaternionMatrix,
    pub singular_values: Vec<f64>,
    pub v: QuaternionMatrix,
}

impl QSvdResult {
    /// Rebuilds `U Σ V^H`.
    pub fn reconstruct(&self) -> QuaternionMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        QuaternionMatrix::from_fn(m, n, |r, c| {
            self.singular_values
                .iter()
                .enumerate()
                .fold(Quaternion::ZERO, |acc, (k, &s)| {
                    acc + (self.u[(r, k)] * self.v[(c, k)].conj()).scale(s)
                })
        })
    }
}

/// Relative gap under which adjacent adjoint singular values are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-9;

/// Relative size under which a singular value's vectors come from basis completion.
const NULL_TOL: f64 = 1e-12;

/// Builds the `2m x 2n` complex adjoint of a quaternion matrix.
pub fn complex_adjoint(a: &QuaternionMatrix) -> DMatrix<Complex<f64>> {
    let (m, n) = a.shape();
    DMatrix::from_fn(2 * m, 2 * n, |r, c| {
        let q = a[(r % m, c % n)];
        match (r < m, c < n) {
            (true, true) => Complex::new(q.w, q.x),
            (true, false) => Complex::new(q.y, q.z),
            (false, true) => -Complex::new(q.y, -q.z),
            (false, false) => Complex::new(q.w, -q.x),
        }
    })
}

/// Inverse of `phi`: `[a; c] -> a + b j` with `b = -conj(c)`.
fn fold(top: impl Iterator<Item = Complex<f64>>, bottom: impl Iterator<Item = Complex<f64>>) -> Vec<Quaternion> {
    top.zip(bottom)
        .map(|(a, c)| Quaternion::new(a.re, a.im, -c.re, c.im))
        .collect()
}

/// Removes the components of `v` along each unit vector in `basis`: `v -= u (u^H v)`.
fn project_out(v: &mut [Quaternion], basis: &[Vec<Quaternion>]) {
    for u in basis {
        let coeff = inner(u, v);
        for (vi, &ui) in v.iter_mut().zip(u) {
            *vi -= ui * coeff;
        }
    }
}

fn normalize(v: &mut [Quaternion]) -> f64 {
    let n = vector_norm(v);
    if n > 0.0 {
        for q in v.iter_mut() {
            *q = q.scale(1.0 / n);
        }
    }
    n
}

/// Unit right factor that turns the largest-norm entry of `v` into a positive real.
fn phase_factor(v: &[Quaternion]) -> Quaternion {
    let mut best = Quaternion::ONE;
    let mut best_norm = -1.0;
    for &q in v {
        let n = q.norm();
        if n > best_norm {
            best_norm = n;
            best = q;
        }
    }
    if best_norm > 0.0 {
        best.conj().scale(1.0 / best_norm)
    } else {
        Quaternion::ONE
    }
}

fn right_multiply(v: &mut [Quaternion], f: Quaternion) {
    for q in v.iter_mut() {
        *q = *q * f;
    }
}

/// Greedy Gram-Schmidt: repeatedly accepts the candidate with the largest
/// residual against the accepted set (ties to the lowest index) until `target`
/// vectors are accepted or no residual exceeds `min_residual`.
fn greedy_orthonormal(
    mut candidates: Vec<Vec<Quaternion>>,
    prior: &[Vec<Quaternion>],
    target: usize,
    min_residual: f64,
) -> Vec<Vec<Quaternion>> {
    for c in candidates.iter_mut() {
        project_out(c, prior);
    }
    let mut accepted: Vec<Vec<Quaternion>> = Vec::with_capacity(target);
    let mut used = vec![false; candidates.len()];
    while accepted.len() < target {
        let mut pick = None;
        let mut pick_norm = min_residual;
        for (i, c) in candidates.iter().enumerate() {
            if used[i] {
                continue;
            }
            let n = vector_norm(c);
            if n > pick_norm {
                pick_norm = n;
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        used[i] = true;
        let mut v = std::mem::take(&mut candidates[i]);
        // second pass for numerical orthogonality
        project_out(&mut v, prior);
        project_out(&mut v, &accepted);
        if normalize(&mut v) <= 0.0 {
            continue;
        }
        for (j, c) in candidates.iter_mut().enumerate() {
            if !used[j] {
                project_out(c, std::slice::from_ref(&v));
            }
        }
        accepted.push(v);
    }
    accepted
}

fn standard_basis(dim: usize) -> Vec<Vec<Quaternion>> {
    (0..dim)
        .map(|i| {
            let mut e = vec![Quaternion::ZERO; dim];
            e[i] = Quaternion::ONE;
            e
        })
        .collect()
}

/// Extends an orthonormal set to a full basis of `H^dim`.
fn complete_basis(basis: &mut Vec<Vec<Quaternion>>, dim: usize) -> Result<()> {
    let missing = dim - basis.len();
    if missing == 0 {
        return Ok(());
    }
    let extra = greedy_orthonormal(standard_basis(dim), basis, missing, 1e-8);
    if extra.len() != missing {
        return Err(Error::Numerical(format!(
            "could not complete a unitary basis of dimension {dim}"
        )));
    }
    for mut v in extra {
        let f = phase_factor(&v);
        right_multiply(&mut v, f);
        basis.push(v);
    }
    Ok(())
}

/// Full quaternion SVD. Singular values are descending; each left singular
/// vector is phase-normalised so its largest-norm entry is a positive real, and
/// the paired right vector carries the same unit factor.
pub fn qsvd(a: &QuaternionMatrix) -> Result<QSvdResult> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::Shape(format!("cannot decompose a {m}x{n} matrix")));
    }
    if !a.is_finite() {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    let r = m.min(n);

    let chi = complex_adjoint(a);
    let svd = chi
        .try_svd_unordered(false, true, 5.0 * f64::EPSILON, 1_000_000)
        .ok_or_else(|| Error::Numerical("complex SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("complex SVD returned no right vectors".into()))?;
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let s_max = sv[order[0]];
    let null_tol = NULL_TOL * s_max;
    // adjoint values come in equal pairs at sorted positions 2k, 2k+1
    let sigmas: Vec<f64> = (0..r).map(|k| sv[order[2 * k]]).collect();

    let mut v_cols: Vec<Vec<Quaternion>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < order.len() && v_cols.len() < r {
        if sv[order[start]] <= null_tol {
            break;
        }
        let mut end = start + 1;
        while end < order.len()
            && sv[order[end - 1]] - sv[order[end]] <= CLUSTER_TOL * s_max
            && sv[order[end]] > null_tol
        {
            end += 1;
        }
        let cluster = &order[start..end];
        let target = cluster.len().div_ceil(2).min(r - v_cols.len());
        let candidates: Vec<Vec<Quaternion>> = cluster
            .iter()
            .map(|&idx| {
                let row = v_t.row(idx);
                fold(
                    row.iter().take(n).map(|c| c.conj()),
                    row.iter().skip(n).map(|c| c.conj()),
                )
            })
            .collect();
        v_cols.extend(greedy_orthonormal(candidates, &[], target, 1e-6));
        start = end;
    }

    let mut u_cols: Vec<Vec<Quaternion>> = Vec::with_capacity(m);
    for v in v_cols.iter_mut() {
        let mut u = vec![Quaternion::ZERO; m];
        for (row, out) in u.iter_mut().enumerate() {
            *out = a
                .row(row)
                .iter()
                .zip(v.iter())
                .fold(Quaternion::ZERO, |acc, (&q, &v)| acc + q * v);
        }
        project_out(&mut u, &u_cols);
        project_out(&mut u, &u_cols);
        if normalize(&mut u) <= 0.0 {
            return Err(Error::Numerical("zero left singular vector".into()));
        }
        let f = phase_factor(&u);
        right_multiply(&mut u, f);
        right_multiply(v, f);
        u_cols.push(u);
    }

    complete_basis(&mut u_cols, m)?;
    complete_basis(&mut v_cols, n)?;

    Ok(QSvdResult {
        u: QuaternionMatrix::from_columns(m, &u_cols)?,
        singular_values: sigmas,
        v: QuaternionMatrix::from_columns(n, &v_cols)?,
    })
}

/// The first `p` left singular vectors (`rows x p`).
pub fn truncate(svd: &QSvdResult, p: usize) -> Result<QuaternionMatrix> {
    let available = svd.singular_values.len();
    if p == 0 || p > available {
        return Err(Error::Parameter(format!(
            "p must be in 1..={available}, got {p}"
        )));
    }
    svd.u.leading_columns(p)
}
