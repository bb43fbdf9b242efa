use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Dense row-major quaternion matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct QuaternionMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Quaternion>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Quaternion>,
}

impl TryFrom<RawMatrix> for QuaternionMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        QuaternionMatrix::new(raw.rows, raw.cols, raw.entries)
    }
}

impl QuaternionMatrix {
    /// Builds a matrix from row-major entries, validating the length and finiteness.
    pub fn new(rows: usize, cols: usize, entries: Vec<Quaternion>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|q| !q.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(QuaternionMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuaternionMatrix {
            rows,
            cols,
            entries: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        QuaternionMatrix {
            rows,
            cols,
            entries,
        }
    }

    /// Stacks equal-length row vectors.
    pub fn from_rows(rows: &[Vec<Quaternion>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Shape(format!(
                "row {bad} has length {}, expected {cols}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<Quaternion>]) -> Result<Self> {
        if let Some(bad) = columns.iter().position(|c| c.len() != rows) {
            return Err(Error::Shape(format!(
                "column {bad} has length {}, expected {rows}",
                columns[bad].len()
            )));
        }
        Ok(Self::from_fn(rows, columns.len(), |r, c| columns[c][r]))
    }

    /// Real matrix embedded with zero imaginary parts.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&v| Quaternion::real(v)).collect())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[Quaternion] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Quaternion> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(Quaternion::is_finite)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        QuaternionMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|q| q.scale(s)).collect(),
        }
    }

    pub fn sub(&self, other: &QuaternionMatrix) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "cannot subtract {}x{} from {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        Ok(QuaternionMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    /// Keeps the first `p` columns.
    pub fn leading_columns(&self, p: usize) -> Result<Self> {
        if p > self.cols {
            return Err(Error::Parameter(format!(
                "cannot take {p} columns of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(Self::from_fn(self.rows, p, |r, c| self[(r, c)]))
    }
}

impl Index<(usize, usize)> for QuaternionMatrix {
    type Output = Quaternion;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QuaternionMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        &mut self.entries[r * self.cols + c]
    }
}

/// Matrix product `a * b` with Hamilton products, left factor always on the left.
pub fn matmul(a: &QuaternionMatrix, b: &QuaternionMatrix) -> Result<QuaternionMatrix> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = QuaternionMatrix::zeros(a.rows, b.cols);
    for r in 0..a.rows {
        let a_row = a.row(r);
        let out_row = &mut out.entries[r * b.cols..(r + 1) * b.cols];
        for (k, &a_rk) in a_row.iter().enumerate() {
            if a_rk == Quaternion::ZERO {
                continue;
            }
            for (o, &b_kc) in out_row.iter_mut().zip(b.row(k)) {
                *o += a_rk * b_kc;
            }
        }
    }
    Ok(out)
}

/// Conjugate transpose: `(A^H)[i][j] = conj(A[j][i])`.
pub fn hermitian_transpose(a: &QuaternionMatrix) -> QuaternionMatrix {
    QuaternionMatrix::from_fn(a.cols, a.rows, |r, c| a[(c, r)].conj())
}

/// Quaternion inner product `u^H v`.
pub fn inner(u: &[Quaternion], v: &[Quaternion]) -> Quaternion {
    u.iter()
        .zip(v)
        .fold(Quaternion::ZERO, |acc, (&a, &b)| acc + a.conj() * b)
}

pub fn vector_norm(v: &[Quaternion]) -> f64 {
    v.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// Row vector times matrix: `v * m`.
pub fn row_times(v: &[Quaternion], m: &QuaternionMatrix) -> Result<Vec<Quaternion>> {
    if v.len() != m.rows {
        return Err(Error::Shape(format!(
            "cannot multiply 1x{} by {}x{}",
            v.len(),
            m.rows,
            m.cols
        )));
    }
    let mut out = vec![Quaternion::ZERO; m.cols];
    for (k, &vk) in v.iter().enumerate() {
        for (o, &m_kc) in out.iter_mut().zip(m.row(k)) {
            *o += vk * m_kc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> QuaternionMatrix {
        QuaternionMatrix::from_fn(rows, cols, |_, _| {
            Quaternion::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
        })
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(4, 3, &mut rng);
        assert_eq!(matmul(&a, &QuaternionMatrix::identity(3)).unwrap(), a);
        assert_eq!(matmul(&QuaternionMatrix::identity(4), &a).unwrap(), a);
    }

    #[test]
    fn one_by_one_basis_product() {
        let i = QuaternionMatrix::new(1, 1, vec![Quaternion::I]).unwrap();
        let j = QuaternionMatrix::new(1, 1, vec![Quaternion::J]).unwrap();
        assert_eq!(matmul(&i, &j).unwrap()[(0, 0)], Quaternion::K);
        assert_eq!(matmul(&j, &i).unwrap()[(0, 0)], -Quaternion::K);
    }

    #[test]
    fn real_ones_squared() {
        let ones = QuaternionMatrix::from_real(2, 2, &[1.0; 4]).unwrap();
        let sq = matmul(&ones, &ones).unwrap();
        assert_eq!(sq, QuaternionMatrix::from_real(2, 2, &[2.0; 4]).unwrap());
    }

    #[test]
    fn shape_error_names_both_shapes() {
        let a = QuaternionMatrix::zeros(2, 3);
        let b = QuaternionMatrix::zeros(2, 3);
        let msg = matmul(&a, &b).unwrap_err().to_string();
        assert!(msg.contains("2x3") && msg.contains("by 2x3"), "{msg}");
    }

    #[test]
    fn hermitian_transpose_cases() {
        let row = QuaternionMatrix::new(1, 2, vec![Quaternion::I, Quaternion::J]).unwrap();
        let h = hermitian_transpose(&row);
        assert_eq!(h.shape(), (2, 1));
        assert_eq!(h[(0, 0)], -Quaternion::I);
        assert_eq!(h[(1, 0)], -Quaternion::J);

        let sym = QuaternionMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(hermitian_transpose(&sym), sym);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(3, 5, &mut rng);
        assert_eq!(hermitian_transpose(&hermitian_transpose(&a)), a);
    }

    #[test]
    fn product_order_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(3, 3, &mut rng);
        let b = random(3, 3, &mut rng);
        // (AB)^H = B^H A^H, which only holds with factor order kept.
        let lhs = hermitian_transpose(&matmul(&a, &b).unwrap());
        let rhs = matmul(&hermitian_transpose(&b), &hermitian_transpose(&a)).unwrap();
        assert!(lhs.sub(&rhs).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn json_layout() {
        let m = QuaternionMatrix::new(1, 2, vec![Quaternion::ONE, Quaternion::K]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"rows":1,"cols":2,"entries":[[1.0,0.0,0.0,0.0],[0.0,0.0,0.0,1.0]]}"#
        );
        let back: QuaternionMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<QuaternionMatrix>(r#"{"rows":2,"cols":2,"entries":[]}"#).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let err = QuaternionMatrix::new(1, 1, vec![Quaternion::new(f64::NAN, 0.0, 0.0, 0.0)]);
        assert!(matches!(err, Err(Error::Validation(_))));
    }
}
