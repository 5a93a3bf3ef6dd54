//! Preprocessing transforms. Each one consumes a dataset and returns a new
//! one with a provenance entry appended.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::stats::{mean, population_std, quantile_linear};
use super::{vocabulary, Cell, Column, ColumnKind, Dataset, IngestError, Result, Transform};
use crate::Scalar;

/// Replaces `area` by `ln(1 + area)`.
pub fn log_transform_area<T: Scalar>(d: Dataset<T>) -> Result<Dataset<T>> {
    let idx = d.column_index("area")?;
    if !d.schema()[idx].kind.is_numeric() {
        return Err(IngestError::NotNumeric("area".into()));
    }
    let (mut schema, mut rows, prov) = d.into_parts();
    for (r, row) in rows.iter_mut().enumerate() {
        let v = row[idx].as_num().expect("numeric cell");
        if v < T::zero() {
            return Err(IngestError::NegativeInput {
                row: r,
                column: "area".into(),
            });
        }
        row[idx] = Cell::Num(v.ln_1p());
    }
    schema[idx].kind = ColumnKind::Decimal;
    Ok(Dataset::from_parts(schema, rows, prov).with_transform(Transform::new("log1p(area)")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnNorm<T> {
    pub column: String,
    pub mean: T,
    /// Population standard deviation.
    pub stddev: T,
}

/// Per-column parameters returned by [`zscore_normalize`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormParams<T> {
    pub columns: Vec<ColumnNorm<T>>,
}

impl<T: Scalar> NormParams<T> {
    pub fn get(&self, column: &str) -> Option<&ColumnNorm<T>> {
        self.columns.iter().find(|c| c.column == column)
    }
}

pub fn zscore_normalize<T: Scalar>(
    d: Dataset<T>,
    columns: &[&str],
) -> Result<(Dataset<T>, NormParams<T>)> {
    let mut params = Vec::with_capacity(columns.len());
    for &name in columns {
        let values = d.numeric_column(name)?;
        let m = mean(&values).ok_or(IngestError::TooFewRows {
            needed: 1,
            found: 0,
        })?;
        let sd = population_std(&values).unwrap_or_else(T::zero);
        if sd <= T::zero() {
            return Err(IngestError::ZeroVariance(name.to_string()));
        }
        params.push(ColumnNorm {
            column: name.to_string(),
            mean: m,
            stddev: sd,
        });
    }
    let d = map_columns(d, &params, |v, p| (v - p.mean) / p.stddev);
    let t = Transform::new("zscore").with("columns", columns.join(","));
    Ok((d.with_transform(t), NormParams { columns: params }))
}

/// Inverse of [`zscore_normalize`] for the columns recorded in `params`.
pub fn denormalize<T: Scalar>(d: Dataset<T>, params: &NormParams<T>) -> Result<Dataset<T>> {
    for p in &params.columns {
        d.numeric_column(&p.column)?;
    }
    let d = map_columns(d, &params.columns, |v, p| v * p.stddev + p.mean);
    let names: Vec<&str> = params.columns.iter().map(|p| p.column.as_str()).collect();
    Ok(d.with_transform(Transform::new("denormalize").with("columns", names.join(","))))
}

fn map_columns<T: Scalar>(
    d: Dataset<T>,
    params: &[ColumnNorm<T>],
    f: impl Fn(T, &ColumnNorm<T>) -> T,
) -> Dataset<T> {
    let idxs: Vec<usize> = params
        .iter()
        .map(|p| d.column_index(&p.column).unwrap())
        .collect();
    let (mut schema, mut rows, prov) = d.into_parts();
    for row in rows.iter_mut() {
        for (&i, p) in idxs.iter().zip(params) {
            let v = row[i].as_num().expect("numeric cell");
            row[i] = Cell::Num(f(v, p));
        }
    }
    for &i in &idxs {
        schema[i].kind = ColumnKind::Decimal;
    }
    Dataset::from_parts(schema, rows, prov)
}

/// Replaces each named categorical column by one 0/1 column per vocabulary
/// token, named `<col>=<token>`, in calendar order.
pub fn one_hot_encode<T: Scalar>(d: Dataset<T>, columns: &[&str]) -> Result<Dataset<T>> {
    let mut d = d;
    for &name in columns {
        d = one_hot_one(d, name)?;
    }
    Ok(d.with_transform(Transform::new("one_hot").with("columns", columns.join(","))))
}

fn one_hot_one<T: Scalar>(d: Dataset<T>, name: &str) -> Result<Dataset<T>> {
    let idx = d.column_index(name)?;
    let vocab = match (d.schema()[idx].kind, vocabulary(name)) {
        (ColumnKind::Categorical, Some(v)) => v,
        _ => return Err(IngestError::NotCategorical(name.to_string())),
    };
    let (schema, rows, prov) = d.into_parts();
    let mut new_schema = schema[..idx].to_vec();
    new_schema.extend(
        vocab
            .iter()
            .map(|t| Column::new(format!("{name}={t}"), ColumnKind::Integer)),
    );
    new_schema.extend_from_slice(&schema[idx + 1..]);

    let mut new_rows = Vec::with_capacity(rows.len());
    for (r, row) in rows.into_iter().enumerate() {
        let token = row[idx].as_cat().expect("categorical cell");
        let hot =
            vocab
                .iter()
                .position(|t| *t == token)
                .ok_or_else(|| IngestError::UnknownToken {
                    row: r,
                    column: name.to_string(),
                    token: token.to_string(),
                })?;
        let mut out = Vec::with_capacity(new_schema.len());
        out.extend_from_slice(&row[..idx]);
        out.extend(
            (0..vocab.len()).map(|k| Cell::Num(if k == hot { T::one() } else { T::zero() })),
        );
        out.extend_from_slice(&row[idx + 1..]);
        new_rows.push(out);
    }
    Ok(Dataset::from_parts(new_schema, new_rows, prov))
}

/// Replaces `month` and `day` (when present and categorical) by their
/// 1-based calendar positions so they take part in correlation analysis.
pub fn calendar_ordinals<T: Scalar>(d: Dataset<T>) -> Result<Dataset<T>> {
    let (mut schema, mut rows, prov) = d.into_parts();
    let mut done = Vec::new();
    for (i, col) in schema.iter_mut().enumerate() {
        let Some(vocab) = vocabulary(&col.name) else {
            continue;
        };
        if col.kind != ColumnKind::Categorical {
            continue;
        }
        for (r, row) in rows.iter_mut().enumerate() {
            let token = row[i].as_cat().expect("categorical cell").to_string();
            let pos = vocab.iter().position(|t| *t == token).ok_or_else(|| {
                IngestError::UnknownToken {
                    row: r,
                    column: col.name.clone(),
                    token: token.clone(),
                }
            })?;
            row[i] = Cell::Num(T::from_count(pos + 1));
        }
        col.kind = ColumnKind::Integer;
        done.push(col.name.clone());
    }
    let t = Transform::new("calendar_ordinals").with("columns", done.join(","));
    Ok(Dataset::from_parts(schema, rows, prov).with_transform(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutlierMethod {
    /// Remove rows with `|v - mean| / stddev > threshold` (default 3.0).
    ZScore,
    /// Remove rows outside `[Q1 - k·IQR, Q3 + k·IQR]` (default k = 1.5).
    Iqr,
}

impl OutlierMethod {
    pub fn default_threshold(self) -> f64 {
        match self {
            OutlierMethod::ZScore => 3.0,
            OutlierMethod::Iqr => 1.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OutlierMethod::ZScore => "zscore",
            OutlierMethod::Iqr => "iqr",
        }
    }
}

pub fn filter_outliers<T: Scalar>(
    d: Dataset<T>,
    column: &str,
    method: OutlierMethod,
    threshold: T,
) -> Result<Dataset<T>> {
    let values = d.numeric_column(column)?;
    let keep: Vec<bool> = if values.is_empty() {
        Vec::new()
    } else {
        match method {
            OutlierMethod::ZScore => {
                let m = mean(&values).unwrap();
                let sd = population_std(&values).unwrap();
                if sd <= T::zero() {
                    return Err(IngestError::ZeroVariance(column.to_string()));
                }
                values
                    .iter()
                    .map(|&v| (v - m).abs() / sd <= threshold)
                    .collect()
            }
            OutlierMethod::Iqr => {
                let q1 = quantile_linear(&values, T::lit(0.25)).unwrap();
                let q3 = quantile_linear(&values, T::lit(0.75)).unwrap();
                let iqr = q3 - q1;
                // inf * 0 would poison the fences with NaN; an infinite
                // multiplier keeps everything even when the spread is zero.
                let reach = if threshold.is_infinite() {
                    threshold
                } else {
                    threshold * iqr
                };
                let (lo, hi) = (q1 - reach, q3 + reach);
                values.iter().map(|&v| !(v < lo || v > hi)).collect()
            }
        }
    };
    let (schema, rows, prov) = d.into_parts();
    let before = rows.len();
    let rows: Vec<_> = rows
        .into_iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(r, _)| r)
        .collect();
    let t = Transform::new("filter_outliers")
        .with("column", column)
        .with("method", method.name())
        .with("threshold", threshold)
        .with("removed", before - rows.len());
    Ok(Dataset::from_parts(schema, rows, prov).with_transform(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleStrategy {
    Oversample,
    Undersample,
}

/// Balances class counts of `label_column` by seeded duplication or deletion.
///
/// Categorical labels use the token as the class; numeric labels are
/// binarized as `value > 0` (e.g. burned vs. unburned area).
pub fn resample<T: Scalar>(
    d: Dataset<T>,
    label_column: &str,
    strategy: ResampleStrategy,
    seed: u64,
) -> Result<Dataset<T>> {
    let idx = d.column_index(label_column)?;
    let mut classes: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (r, row) in d.rows().iter().enumerate() {
        let label = match &row[idx] {
            Cell::Cat(s) => s.clone(),
            Cell::Num(v) => if *v > T::zero() { "positive" } else { "zero" }.to_string(),
        };
        classes.entry(label).or_default().push(r);
    }
    if classes.len() < 2 {
        return Err(IngestError::SingleClass(label_column.to_string()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (schema, rows, prov) = d.into_parts();
    let out_rows = match strategy {
        ResampleStrategy::Oversample => {
            let target = classes.values().map(Vec::len).max().unwrap();
            let mut out = rows.clone();
            for members in classes.values() {
                for _ in members.len()..target {
                    let pick = members[rng.gen_range(0..members.len())];
                    out.push(rows[pick].clone());
                }
            }
            out
        }
        ResampleStrategy::Undersample => {
            let target = classes.values().map(Vec::len).min().unwrap();
            let mut drop = vec![false; rows.len()];
            for members in classes.values() {
                let excess = members.len() - target;
                for k in index::sample(&mut rng, members.len(), excess).into_iter() {
                    drop[members[k]] = true;
                }
            }
            rows.into_iter()
                .zip(drop)
                .filter(|(_, d)| !d)
                .map(|(r, _)| r)
                .collect()
        }
    };
    let t = Transform::new("resample")
        .with("label", label_column)
        .with("strategy", format!("{strategy:?}").to_lowercase())
        .with("seed", seed);
    Ok(Dataset::from_parts(schema, out_rows, prov).with_transform(t))
}
