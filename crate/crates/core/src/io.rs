//! Dataset ingestion, preprocessing and atomic file output.
//!
//! CSV layout: a header row, then one row per scan. Every column is a
//! series unless its name starts with `x_`, in which case it is the BOLD
//! regressor of the series with the remaining name. Regressors are all or
//! nothing; without them every regressor is 1.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const REGRESSOR_PREFIX: &str = "x_";
pub const DEFAULT_DETREND_K: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `T x m` observations `y_{t,i}`.
    pub series: DMatrix<f64>,
    /// `T x m` BOLD regressors `x_{t,i}`.
    pub regressors: DMatrix<f64>,
    pub labels: Vec<String>,
    /// Seconds between scans.
    pub sampling_interval: f64,
    pub detrended: bool,
    pub standardized: bool,
}

impl Dataset {
    pub fn new(series: DMatrix<f64>, regressors: DMatrix<f64>, labels: Vec<String>, sampling_interval: f64) -> Result<Self> {
        if series.shape() != regressors.shape() {
            return Err(Error::input(format!(
                "series are {:?} but regressors are {:?}",
                series.shape(),
                regressors.shape()
            )));
        }
        if labels.len() != series.ncols() {
            return Err(Error::input("one label per series required"));
        }
        if series.iter().chain(regressors.iter()).any(|v| !v.is_finite()) {
            return Err(Error::input("dataset entries must be finite"));
        }
        if !(sampling_interval > 0.0) {
            return Err(Error::input("sampling interval must be positive"));
        }
        Ok(Self {
            series,
            regressors,
            labels,
            sampling_interval,
            detrended: false,
            standardized: false,
        })
    }

    pub fn horizon(&self) -> usize {
        self.series.nrows()
    }

    pub fn n_series(&self) -> usize {
        self.series.ncols()
    }

    /// Detrend every series with a running-line smoother of `k` neighbours,
    /// then optionally standardize.
    pub fn preprocess(&mut self, k: Option<usize>, standardize_series: bool) -> Result<()> {
        for i in 0..self.n_series() {
            let mut col: Vec<f64> = self.series.column(i).iter().copied().collect();
            if let Some(k) = k {
                col = detrend_running_line(&col, k)?;
            }
            if standardize_series {
                col = standardize(&col)?;
            }
            self.series.set_column(i, &DVector::from_vec(col));
        }
        self.detrended |= k.is_some();
        self.standardized |= standardize_series;
        Ok(())
    }
}

fn data_error(path: &Path, row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Data {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Read a dataset. Rows are numbered from 1 at the first data line (the
/// header is row 0). `NA`, `NaN` and infinities are rejected.
pub fn load_csv(path: impl AsRef<Path>, sampling_interval: f64) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => data_error(path, 0, "", format!("{other:?}")),
        })?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(data_error(path, 0, "", "missing header row"));
    }

    let mut series_cols = Vec::new();
    let mut reg_cols = Vec::new();
    for (k, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(data_error(path, 0, &format!("#{}", k + 1), "empty column name"));
        }
        match name.strip_prefix(REGRESSOR_PREFIX) {
            Some(label) => reg_cols.push((label.to_string(), k)),
            None => series_cols.push((name.clone(), k)),
        }
    }
    if series_cols.is_empty() {
        return Err(data_error(path, 0, "", "no series columns"));
    }
    let reg_index: Option<Vec<usize>> = if reg_cols.is_empty() {
        None
    } else {
        let idx = series_cols
            .iter()
            .map(|(label, _)| {
                reg_cols
                    .iter()
                    .find(|(l, _)| l == label)
                    .map(|&(_, k)| k)
                    .ok_or_else(|| data_error(path, 0, &format!("{REGRESSOR_PREFIX}{label}"), "missing regressor column"))
            })
            .collect::<Result<Vec<_>>>()?;
        if reg_cols.len() != series_cols.len() {
            return Err(data_error(path, 0, "", "regressor columns without matching series"));
        }
        Some(idx)
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row_no = r + 1;
        let record = record.map_err(|e| data_error(path, row_no, "", e.to_string()))?;
        if record.len() != header.len() {
            return Err(data_error(
                path,
                row_no,
                "",
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let values = record
            .iter()
            .zip(&header)
            .map(|(cell, name)| {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| data_error(path, row_no, name, format!("not a number: {cell:?}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(data_error(path, row_no, name, format!("non-finite value {cell:?}")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(data_error(path, 1, "", "no data rows"));
    }

    let horizon = rows.len();
    let m = series_cols.len();
    let series = DMatrix::from_fn(horizon, m, |t, i| rows[t][series_cols[i].1]);
    let regressors = match &reg_index {
        Some(idx) => DMatrix::from_fn(horizon, m, |t, i| rows[t][idx[i]]),
        None => DMatrix::from_element(horizon, m, 1.0),
    };
    let labels = series_cols.into_iter().map(|(l, _)| l).collect();
    Dataset::new(series, regressors, labels, sampling_interval)
}

/// Write series and regressors. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        let mut header = data.labels.clone();
        header.extend(data.labels.iter().map(|l| format!("{REGRESSOR_PREFIX}{l}")));
        out.write_record(&header)?;
        for t in 0..data.horizon() {
            let row = data
                .series
                .row(t)
                .iter()
                .chain(data.regressors.row(t).iter())
                .map(|v| v.to_string())
                .collect::<Vec<_>>();
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    })
}

/// Write through a temporary file in the target directory and rename it
/// into place, so a failed write leaves no partial file behind.
pub fn write_atomic<F>(path: impl AsRef<Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Subtract, at each point, the least-squares line through its `k` nearest
/// time indices evaluated at that point.
pub fn detrend_running_line(series: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if k < 3 || k > n {
        return Err(Error::input(format!("neighbourhood size {k} must lie in [3, {n}]")));
    }
    let half = (k - 1) / 2;
    Ok((0..n)
        .map(|t| {
            let start = t.saturating_sub(half).min(n - k);
            let window = start..start + k;
            let kf = k as f64;
            let mean_x = window.clone().map(|s| s as f64).sum::<f64>() / kf;
            let mean_y = series[window.clone()].iter().sum::<f64>() / kf;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for s in window {
                let dx = s as f64 - mean_x;
                sxy += dx * (series[s] - mean_y);
                sxx += dx * dx;
            }
            let fitted = mean_y + sxy / sxx * (t as f64 - mean_x);
            series[t] - fitted
        })
        .collect())
}

/// Zero mean, unit sample standard deviation.
pub fn standardize(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::input("need at least two points to standardize"));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::input("cannot standardize a constant series"));
    }
    let sd = var.sqrt();
    Ok(series.iter().map(|v| (v - mean) / sd).collect())
}
