use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A regression dataset: n observations of p predictors plus a response,
/// with stable 1-based observation labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    labels: Vec<usize>,
}

impl Dataset {
    /// Build a dataset with default labels 1..=n. Requires n >= p + 2,
    /// finite values, and unique labels.
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let labels = (1..=x.nrows()).collect();
        Self::with_labels(x, y, labels)
    }

    pub fn with_labels(x: DMatrix<f64>, y: DVector<f64>, labels: Vec<usize>) -> Result<Self> {
        if x.nrows() != y.len() || x.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                x_rows: x.nrows(),
                y_len: y.len(),
            });
        }
        let (n, p) = (x.nrows(), x.ncols());
        if n < p + 2 {
            return Err(Error::TooFewObservations { n, min: p + 2 });
        }
        for i in 0..n {
            for j in 0..p {
                if !x[(i, j)].is_finite() {
                    return Err(Error::NonFinite {
                        row: labels[i],
                        col: format!("x{}", j + 1),
                    });
                }
            }
            if !y[i].is_finite() {
                return Err(Error::NonFinite {
                    row: labels[i],
                    col: "y".to_string(),
                });
            }
        }
        let mut seen = labels.clone();
        seen.sort_unstable();
        for w in seen.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateLabel { label: w[0] });
            }
        }
        Ok(Dataset { x, y, labels })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, pos: usize) -> usize {
        self.labels[pos]
    }

    /// Design matrix with a leading intercept column.
    pub fn design(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n(), self.p() + 1);
        for i in 0..self.n() {
            d[(i, 0)] = 1.0;
            for j in 0..self.p() {
                d[(i, j + 1)] = self.x[(i, j)];
            }
        }
        d
    }

    /// Subset keeping the given row positions (0-based, must be sorted and
    /// distinct); labels carry over.
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        let m = keep.len();
        let mut x = DMatrix::zeros(m, self.p());
        let mut y = DVector::zeros(m);
        let mut labels = Vec::with_capacity(m);
        for (r, &pos) in keep.iter().enumerate() {
            x.row_mut(r).copy_from(&self.x.row(pos));
            y[r] = self.y[pos];
            labels.push(self.labels[pos]);
        }
        Self::with_labels(x, y, labels)
    }

    /// Subset with one row position deleted.
    pub fn delete_one(&self, pos: usize) -> Result<Self> {
        let keep: Vec<usize> = (0..self.n()).filter(|&i| i != pos).collect();
        self.subset(&keep)
    }

    /// Append one observation; the new row gets max(label)+1.
    pub fn push(&self, x_row: &[f64], y: f64) -> Result<Self> {
        assert_eq!(x_row.len(), self.p());
        let n = self.n();
        let mut x = DMatrix::zeros(n + 1, self.p());
        x.view_mut((0, 0), (n, self.p())).copy_from(&self.x);
        for j in 0..self.p() {
            x[(n, j)] = x_row[j];
        }
        let mut yv = DVector::zeros(n + 1);
        yv.rows_mut(0, n).copy_from(&self.y);
        yv[n] = y;
        let mut labels = self.labels.clone();
        labels.push(self.labels.iter().copied().max().unwrap_or(0) + 1);
        Self::with_labels(x, yv, labels)
    }
}
