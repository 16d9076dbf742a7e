//! Bivariate right-censored dataset: observed times, censoring indicators
//! and the covariate matrix, with CSV ingestion and emission.
//!
//! The file format is RFC 4180 CSV with a header; the columns `time1`,
//! `status1`, `time2`, `status2` are required (status 1 = event observed)
//! and every remaining column is a covariate. Missing cells are rejected.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct BivariateSurvDataset {
    pub times1: Vec<f64>,
    pub status1: Vec<u8>,
    pub times2: Vec<f64>,
    pub status2: Vec<u8>,
    pub covariate_names: Vec<String>,
    /// Raw covariate columns, column-major.
    pub columns: Vec<Vec<f64>>,
    /// Per-column means, fixed at ingestion; linear base-learners operate on
    /// the centered columns and predictions reuse these constants.
    pub col_means: Vec<f64>,
    /// Whether the semi-competing-risks structural constraints are enforced.
    pub scr: bool,
}

impl BivariateSurvDataset {
    pub fn new(
        times1: Vec<f64>,
        status1: Vec<u8>,
        times2: Vec<f64>,
        status2: Vec<u8>,
        covariate_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        scr: bool,
    ) -> Result<Self> {
        let n = times1.len();
        if status1.len() != n || times2.len() != n || status2.len() != n {
            return Err(Error::Dataset("response columns have unequal lengths".into()));
        }
        if n == 0 {
            return Err(Error::Dataset("dataset is empty".into()));
        }
        if covariate_names.len() != columns.len() {
            return Err(Error::Dataset("covariate names do not match columns".into()));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Dataset(format!(
                    "covariate '{}' has {} rows, expected {n}",
                    covariate_names[j],
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|x| !x.is_finite()) {
                return Err(Error::DatasetLine {
                    line: i + 2,
                    message: format!("covariate '{}' is not finite", covariate_names[j]),
                });
            }
        }
        for i in 0..n {
            let line = i + 2; // header is line 1
            for (t, s, what) in
                [(times1[i], status1[i], "1"), (times2[i], status2[i], "2")]
            {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(Error::DatasetLine {
                        line,
                        message: format!("time{what} must be strictly positive, got {t}"),
                    });
                }
                if s > 1 {
                    return Err(Error::DatasetLine {
                        line,
                        message: format!("status{what} must be 0 or 1, got {s}"),
                    });
                }
            }
            if scr {
                if times1[i] > times2[i] {
                    return Err(Error::DatasetLine {
                        line,
                        message: "SCR data requires time1 <= time2".into(),
                    });
                }
                if status2[i] == 0 && status1[i] == 0 && times1[i] != times2[i] {
                    return Err(Error::DatasetLine {
                        line,
                        message:
                            "SCR data with both events censored requires time1 == time2".into(),
                    });
                }
            }
        }
        let col_means = columns
            .iter()
            .map(|c| c.iter().sum::<f64>() / n as f64)
            .collect();
        Ok(BivariateSurvDataset {
            times1,
            status1,
            times2,
            status2,
            covariate_names,
            columns,
            col_means,
            scr,
        })
    }

    pub fn n(&self) -> usize {
        self.times1.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn centered(&self, j: usize, i: usize) -> f64 {
        self.columns[j][i] - self.col_means[j]
    }

    pub fn centered_column(&self, j: usize) -> Vec<f64> {
        let m = self.col_means[j];
        self.columns[j].iter().map(|x| x - m).collect()
    }

    pub fn covariate_index(&self, name: &str) -> Option<usize> {
        self.covariate_names.iter().position(|n| n == name)
    }

    /// Row subset in the given order; means are recomputed for the subset.
    pub fn select(&self, rows: &[usize], scr: bool) -> Result<Self> {
        let take_f = |v: &[f64]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let take_u = |v: &[u8]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
        BivariateSurvDataset::new(
            take_f(&self.times1),
            take_u(&self.status1),
            take_f(&self.times2),
            take_u(&self.status2),
            self.covariate_names.clone(),
            self.columns.iter().map(|c| take_f(c)).collect(),
            scr,
        )
    }

    pub fn read_csv(path: &Path, scr: bool) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
        let headers: Vec<String> =
            reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let required = ["time1", "status1", "time2", "status2"];
        let mut pos = [0usize; 4];
        for (k, name) in required.iter().enumerate() {
            pos[k] = headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::SchemaMismatch(format!("missing required column '{name}'"))
            })?;
        }
        let cov_idx: Vec<usize> = (0..headers.len()).filter(|i| !pos.contains(i)).collect();
        let covariate_names: Vec<String> =
            cov_idx.iter().map(|&i| headers[i].clone()).collect();

        let mut times1 = Vec::new();
        let mut status1 = Vec::new();
        let mut times2 = Vec::new();
        let mut status2 = Vec::new();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); cov_idx.len()];
        for (row_idx, record) in reader.records().enumerate() {
            let record = record?;
            let line = row_idx + 2;
            let field = |i: usize| -> Result<f64> {
                let raw = record.get(i).unwrap_or("").trim();
                if raw.is_empty() {
                    return Err(Error::DatasetLine {
                        line,
                        message: format!("missing value in column '{}'", headers[i]),
                    });
                }
                raw.parse::<f64>().map_err(|_| Error::DatasetLine {
                    line,
                    message: format!("cannot parse '{raw}' in column '{}'", headers[i]),
                })
            };
            let status = |i: usize| -> Result<u8> {
                let v = field(i)?;
                if v == 0.0 {
                    Ok(0)
                } else if v == 1.0 {
                    Ok(1)
                } else {
                    Err(Error::DatasetLine {
                        line,
                        message: format!("status must be 0 or 1, got {v}"),
                    })
                }
            };
            times1.push(field(pos[0])?);
            status1.push(status(pos[1])?);
            times2.push(field(pos[2])?);
            status2.push(status(pos[3])?);
            for (k, &i) in cov_idx.iter().enumerate() {
                columns[k].push(field(i)?);
            }
        }
        BivariateSurvDataset::new(times1, status1, times2, status2, covariate_names, columns, scr)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = vec![
            "time1".to_string(),
            "status1".to_string(),
            "time2".to_string(),
            "status2".to_string(),
        ];
        header.extend(self.covariate_names.iter().cloned());
        writer.write_record(&header)?;
        for i in 0..self.n() {
            let mut row = vec![
                self.times1[i].to_string(),
                self.status1[i].to_string(),
                self.times2[i].to_string(),
                self.status2[i].to_string(),
            ];
            for col in &self.columns {
                row.push(col[i].to_string());
            }
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Deterministic seeded shuffle split into train / tuning / test index sets.
/// Fractions must be nonnegative and sum to 1 (within 1e-9); the test block
/// absorbs rounding.
pub fn split_indices(
    n: usize,
    fractions: [f64; 3],
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let total: f64 = fractions.iter().sum();
    if fractions.iter().any(|&f| f < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions must be nonnegative and sum to 1, got {fractions:?}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_train = ((fractions[0] * n as f64).round() as usize).min(n);
    let n_tune = ((fractions[1] * n as f64).round() as usize).min(n - n_train);
    let train = idx[..n_train].to_vec();
    let tune = idx[n_train..n_train + n_tune].to_vec();
    let test = idx[n_train + n_tune..].to_vec();
    Ok((train, tune, test))
}
