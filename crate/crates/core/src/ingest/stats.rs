use serde::Serialize;

use super::{Dataset, IngestError, Result};
use crate::Scalar;

/// Running first and second moments (Welford), optionally paired for covariance.
#[derive(Debug, Clone, Copy)]
struct Moments<T> {
    n: usize,
    mean_x: T,
    mean_y: T,
    m2_x: T,
    m2_y: T,
    c_xy: T,
}

impl<T: Scalar> Moments<T> {
    fn new() -> Self {
        Moments {
            n: 0,
            mean_x: T::zero(),
            mean_y: T::zero(),
            m2_x: T::zero(),
            m2_y: T::zero(),
            c_xy: T::zero(),
        }
    }

    fn push(&mut self, x: T, y: T) {
        self.n += 1;
        let n = T::from_count(self.n);
        let dx = x - self.mean_x;
        self.mean_x = self.mean_x + dx / n;
        let dy = y - self.mean_y;
        self.mean_y = self.mean_y + dy / n;
        self.m2_x = self.m2_x + dx * (x - self.mean_x);
        self.m2_y = self.m2_y + dy * (y - self.mean_y);
        self.c_xy = self.c_xy + dx * (y - self.mean_y);
    }
}

pub fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut m = Moments::new();
    values.iter().for_each(|&v| m.push(v, v));
    Some(m.mean_x)
}

/// Population standard deviation (divides by n).
pub fn population_std<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut m = Moments::new();
    values.iter().for_each(|&v| m.push(v, v));
    Some((m.m2_x / T::from_count(m.n)).sqrt())
}

/// Pearson correlation; `None` when either side is constant or fewer than two points.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Option<T> {
    assert_eq!(xs.len(), ys.len(), "pearson over unequal lengths");
    if xs.len() < 2 {
        return None;
    }
    let mut m = Moments::new();
    xs.iter().zip(ys).for_each(|(&x, &y)| m.push(x, y));
    if m.m2_x <= T::zero() || m.m2_y <= T::zero() {
        return None;
    }
    let r = m.c_xy / (m.m2_x.sqrt() * m.m2_y.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

/// Quantile by linear interpolation between order statistics at `(n-1)·p`.
pub fn quantile_linear<T: Scalar>(values: &[T], p: T) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let h = T::from_count(sorted.len() - 1) * p;
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let j = (i + 1).min(sorted.len() - 1);
    Some(sorted[i] + (h - lo) * (sorted[j] - sorted[i]))
}

/// Symmetric matrix of Pearson coefficients over the numeric columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix<T> {
    pub labels: Vec<String>,
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> CorrelationMatrix<T> {
    pub fn get(&self, a: &str, b: &str) -> Option<T> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }

    /// Off-diagonal pairs `(a, b, r)` with `a` before `b` in label order.
    pub fn pairs(&self) -> Vec<(&str, &str, T)> {
        let mut out = Vec::new();
        for i in 0..self.labels.len() {
            for j in i + 1..self.labels.len() {
                out.push((
                    self.labels[i].as_str(),
                    self.labels[j].as_str(),
                    self.values[i][j],
                ));
            }
        }
        out
    }
}

pub fn correlation_matrix<T: Scalar>(d: &Dataset<T>) -> Result<CorrelationMatrix<T>> {
    if d.len() < 2 {
        return Err(IngestError::TooFewRows {
            needed: 2,
            found: d.len(),
        });
    }
    let labels: Vec<String> = d
        .schema()
        .iter()
        .filter(|c| c.kind.is_numeric())
        .map(|c| c.name.clone())
        .collect();
    let columns: Vec<Vec<T>> = labels
        .iter()
        .map(|l| d.numeric_column(l))
        .collect::<Result<_>>()?;
    for (label, col) in labels.iter().zip(&columns) {
        let sd = population_std(col).unwrap_or_else(T::zero);
        if sd <= T::zero() {
            return Err(IngestError::ZeroVariance(label.clone()));
        }
    }
    let k = labels.len();
    let mut values = vec![vec![T::one(); k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = pearson(&columns[i], &columns[j])
                .ok_or_else(|| IngestError::ZeroVariance(labels[i].clone()))?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { labels, values })
}
