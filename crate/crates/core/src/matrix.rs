use crate::error::{Error, Result};
use crate::field::Coefficient;

/// Dense `rows x cols` coefficient matrix, row-major.
///
/// For path constructors the rows are the `d` coordinates and the columns are
/// segments (piecewise-linear) or monomial degrees (polynomial / spline).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Coefficient> CoefMatrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Self::new(nrows, ncols, rows.into_iter().flatten().collect())
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| S::from_i64(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &S {
        &self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: S) {
        self.data[row * self.cols + col] = value;
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn column(&self, col: usize) -> Vec<S> {
        (0..self.rows).map(|r| self.get(r, col).clone()).collect()
    }

    /// Columns `start..end` as a new matrix.
    pub fn column_block(&self, start: usize, end: usize) -> Self {
        let data = (0..self.rows)
            .flat_map(|r| self.data[r * self.cols + start..r * self.cols + end].iter().cloned())
            .collect();
        Self {
            rows: self.rows,
            cols: end - start,
            data,
        }
    }

    /// Column-major copy, i.e. `out[c * rows + r] = self[r][c]`.
    pub fn column_major(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.push(self.get(r, c).clone());
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.cols.max(1)).map(<[S]>::to_vec).collect()
    }

    pub fn map<T: Coefficient>(&self, f: impl Fn(&S) -> T) -> CoefMatrix<T> {
        CoefMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.times(c))
    }

    pub fn to_f64(&self) -> CoefMatrix<f64> {
        self.map(Coefficient::to_f64)
    }
}
