use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// `n x p` observation matrix stored row-major: one row per observation.
///
/// Construction rejects non-finite entries, `n < 2` and `p < 1`, so every
/// `DataMatrix` in circulation satisfies those invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    values: Vec<T>,
    n: usize,
    p: usize,
}

impl<T: Scalar> DataMatrix<T> {
    pub fn new(n: usize, p: usize, values: Vec<T>) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("need at least 2 observations, got {n}")));
        }
        if p < 1 {
            return Err(invalid("need at least 1 coordinate"));
        }
        if values.len() != n * p {
            return Err(invalid(format!(
                "expected {} values for a {n}x{p} matrix, got {}",
                n * p,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / p,
                col: pos % p,
            });
        }
        Ok(Self { values, n, p })
    }

    /// Matrix computed from validated inputs (half-sample differences);
    /// allows a single row.
    pub(crate) fn derived(n: usize, p: usize, values: Vec<T>) -> Self {
        debug_assert!(n >= 1 && p >= 1 && values.len() == n * p);
        Self { values, n, p }
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(invalid(format!(
                    "row {i} has {} entries, expected {p}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(n, p, values)
    }

    /// Single-coordinate sample.
    pub fn from_column(column: &[T]) -> Result<Self> {
        Self::new(column.len(), 1, column.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.p)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.p + j]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Applies `f` to every entry, keeping the shape.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.n, self.p, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Plain column means.
    pub fn column_means(&self) -> Vec<T> {
        let mut acc = vec![T::zero(); self.p];
        for row in self.rows() {
            for (a, &x) in acc.iter_mut().zip(row) {
                *a = *a + x;
            }
        }
        let n = T::of_usize(self.n);
        acc.into_iter().map(|a| a / n).collect()
    }

    pub fn cast<U: Scalar>(&self) -> DataMatrix<U> {
        DataMatrix {
            values: self.values.iter().map(|v| U::of(v.as_f64())).collect(),
            n: self.n,
            p: self.p,
        }
    }
}
