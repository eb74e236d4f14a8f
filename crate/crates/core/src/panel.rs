//! Return panels and the log-squared transform.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::col_means;
use crate::scalar::Real;

/// `T x p` matrix of raw returns, time on the slow axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel<T> {
    data: Array2<T>,
    labels: Vec<String>,
}

impl<T: Real> ReturnPanel<T> {
    pub fn new(data: Array2<T>, labels: Vec<String>) -> Result<Self> {
        let (n, p) = data.dim();
        if n < 2 {
            return Err(Error::InvalidPanel(format!("need at least 2 observations, got {n}")));
        }
        if p < 1 {
            return Err(Error::InvalidPanel("need at least one asset".into()));
        }
        if labels.len() != p {
            return Err(Error::InvalidPanel(format!("{} labels for {p} columns", labels.len())));
        }
        if let Some(((row, col), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        Ok(Self { data, labels })
    }

    /// Panel with generated labels `a0, a1, ...`.
    pub fn from_data(data: Array2<T>) -> Result<Self> {
        let labels = (0..data.ncols()).map(|i| format!("a{i}")).collect();
        Self::new(data, labels)
    }

    pub fn data(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Sample length.
    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    /// Cross-section dimension.
    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    /// Rows `start..end` as a new panel.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        Self::new(self.data.slice(s![start..end, ..]).to_owned(), self.labels.clone())
    }

    /// Reads the CSV layout: a header of asset labels followed by one row of
    /// returns per period. Empty and non-finite cells are rejected.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let labels: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let p = labels.len();
        let mut values = Vec::new();
        let mut rows = 0;
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != p {
                return Err(Error::Format(format!("row {row} has {} fields, expected {p}", rec.len())));
            }
            for (col, cell) in rec.iter().enumerate() {
                if cell.is_empty() {
                    return Err(Error::Format(format!("empty cell at row {row}, column {col}")));
                }
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::Format(format!("cannot parse {cell:?} at row {row}, column {col}")))?;
                if !v.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
                values.push(T::from_f64(v).ok_or(Error::NonFinite { row, col })?);
            }
            rows += 1;
        }
        let data = Array2::from_shape_vec((rows, p), values).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(data, labels)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.labels)?;
        for row in self.data.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// How exact zero returns are handled before taking logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroPolicy {
    Error,
    /// Replace zeros by half the smallest nonzero absolute return of the column.
    #[default]
    HalfMinNonzero,
}

/// Log-squared returns `y^l` and the mean-subtracted series `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSqPanel<T> {
    pub ylog: Array2<T>,
    pub xcentered: Array2<T>,
    pub colmeans: Array1<T>,
}

/// Lag-stacked regression design: row `k` holds `(x'_{t-1}, ..., x'_{t-m})`
/// for `t = m + k` (zero-based), and the matching response `x_t`.
#[derive(Debug, Clone)]
pub struct LagStack<T> {
    pub regressors: Array2<T>,
    pub responses: Array2<T>,
    pub lags: usize,
}

/// Computes `log(y^2)` column by column and centers it.
pub fn log_square_transform<T: Real>(panel: &ReturnPanel<T>, policy: ZeroPolicy) -> Result<LogSqPanel<T>> {
    let data = panel.data();
    let (n, p) = data.dim();
    let mut ylog = Array2::zeros((n, p));
    for col in 0..p {
        let column = data.column(col);
        let floor = match policy {
            ZeroPolicy::Error => None,
            ZeroPolicy::HalfMinNonzero => column
                .iter()
                .filter(|v| **v != T::zero())
                .map(|v| v.abs())
                .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.min(v))))
                .map(|m| m * T::lit(0.5)),
        };
        for (row, &y) in column.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            let y = if y == T::zero() {
                floor.ok_or(Error::ZeroReturn { row, col })?
            } else {
                y
            };
            ylog[[row, col]] = (y * y).ln();
        }
    }
    Ok(LogSqPanel::from_log_series(ylog))
}

impl<T: Real> LogSqPanel<T> {
    /// Wraps an already log-transformed series and centers it with the
    /// full-sample column means.
    pub fn from_log_series(ylog: Array2<T>) -> Self {
        let colmeans = col_means(ylog.view());
        let xcentered = &ylog - &colmeans.view().insert_axis(Axis(0));
        Self { ylog, xcentered, colmeans }
    }

    pub fn len(&self) -> usize {
        self.ylog.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.ylog.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.ylog.ncols()
    }

    /// First `n` rows, re-centered on their own means.
    pub fn head(&self, n: usize) -> Self {
        Self::from_log_series(self.ylog.slice(s![..n, ..]).to_owned())
    }

    pub fn lag_stack(&self, m: usize) -> Result<LagStack<T>> {
        lag_stack(self.xcentered.view(), m)
    }
}

/// Builds the `(T - m) x (p m)` lagged regressor matrix for a `T x p` series.
pub fn lag_stack<T: Real>(x: ArrayView2<T>, m: usize) -> Result<LagStack<T>> {
    let (n, p) = x.dim();
    if m == 0 {
        return Err(Error::InvalidArgument("lag order must be at least 1".into()));
    }
    if n <= m {
        return Err(Error::InsufficientSample { needed: m, got: n });
    }
    let rows = n - m;
    let mut regressors = Array2::zeros((rows, p * m));
    for r in 0..rows {
        let t = r + m;
        for k in 1..=m {
            regressors.slice_mut(s![r, (k - 1) * p..k * p]).assign(&x.row(t - k));
        }
    }
    let responses = x.slice(s![m.., ..]).to_owned();
    Ok(LagStack { regressors, responses, lags: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::f64::consts::E;

    #[test]
    fn unit_return_has_zero_log() {
        let panel = ReturnPanel::from_data(array![[1.0], [1.0]]).unwrap();
        let lp = log_square_transform(&panel, ZeroPolicy::Error).unwrap();
        assert_eq!(lp.ylog[[0, 0]], 0.0);
    }

    #[test]
    fn symmetric_two_by_two() {
        let panel = ReturnPanel::from_data(array![[E, 1.0], [1.0, E]]).unwrap();
        let lp = log_square_transform(&panel, ZeroPolicy::Error).unwrap();
        let expect_y = array![[2.0, 0.0], [0.0, 2.0]];
        let expect_x = array![[1.0, -1.0], [-1.0, 1.0]];
        for (a, b) in lp.ylog.iter().zip(expect_y.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in lp.xcentered.iter().zip(expect_x.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_replaced_by_half_min_nonzero() {
        // 5 x 2 panel, zero at row 3, column 1 (zero-based)
        let y = array![[0.5, -0.4], [1.2, 0.3], [-0.7, -0.9], [0.2, 0.0], [0.9, 0.25]];
        let panel = ReturnPanel::from_data(y).unwrap();
        let lp = log_square_transform(&panel, ZeroPolicy::HalfMinNonzero).unwrap();
        // smallest nonzero |y| in column 1 is 0.25
        let expect = (0.125f64 * 0.125).ln();
        assert!((lp.ylog[[3, 1]] - expect).abs() < 1e-14);
        assert!((lp.ylog[[0, 1]] - (0.16f64).ln()).abs() < 1e-14);

        let err = log_square_transform(&panel, ZeroPolicy::Error).unwrap_err();
        assert!(matches!(err, Error::ZeroReturn { row: 3, col: 1 }));
    }

    #[test]
    fn non_finite_rejected() {
        let err = ReturnPanel::from_data(array![[1.0], [f64::NAN]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, col: 0 }));
    }

    #[test]
    fn lag_stack_univariate() {
        let lp = LogSqPanel::from_log_series(array![[1.0], [2.0], [3.0], [4.0]]);
        let st = lag_stack(lp.ylog.view(), 2).unwrap();
        assert_eq!(st.regressors, array![[2.0, 1.0], [3.0, 2.0]]);
        assert_eq!(st.responses, array![[3.0], [4.0]]);
        assert!(matches!(lag_stack(lp.ylog.view(), 4), Err(Error::InsufficientSample { .. })));
    }

    #[test]
    fn lag_stack_one_lag_is_leading_rows() {
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let st = lag_stack(x.view(), 1).unwrap();
        assert_eq!(st.regressors, x.slice(s![..2, ..]).to_owned());
    }

    #[test]
    fn csv_round_trip_and_rejections() {
        let text = "A,B\n0.01,-0.02\n0.5e-2,0.03\n";
        let panel: ReturnPanel<f64> = ReturnPanel::read_csv(text.as_bytes()).unwrap();
        assert_eq!(panel.labels(), &["A".to_string(), "B".to_string()]);
        assert_eq!(panel.data()[[1, 0]], 0.005);
        let mut buf = Vec::new();
        panel.write_csv(&mut buf).unwrap();
        let back: ReturnPanel<f64> = ReturnPanel::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, panel);

        assert!(ReturnPanel::<f64>::read_csv("A,B\n0.1,\n0.2,0.3\n".as_bytes()).is_err());
        assert!(ReturnPanel::<f64>::read_csv("A,B\n0.1,NaN\n0.2,0.3\n".as_bytes()).is_err());
    }
}
