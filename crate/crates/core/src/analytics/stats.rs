use std::cmp::Ordering;

use num_traits::Float;
use serde::Serialize;

use super::AnalyticsError;
use crate::Scalar;

/// Q1/Q2/Q3 and interquartile range of a sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Quartiles<S> {
    pub q1: S,
    pub q2: S,
    pub q3: S,
    pub iqr: S,
}

fn sort_checked<S: Scalar>(values: &[S]) -> Result<Vec<S>, AnalyticsError> {
    if values.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    if values.iter().any(|v| v.partial_cmp(v).is_none()) {
        return Err(AnalyticsError::DegenerateInput("unordered value (NaN)".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(v)
}

/// Quantile `num/den` of ascending `sorted` by linear interpolation
/// between closest ranks: `h = (n-1)·p`, `x[⌊h⌋] + (h-⌊h⌋)(x[⌊h⌋+1] - x[⌊h⌋])`.
/// The fractional part is formed as an exact ratio.
pub fn quantile_sorted<S: Scalar>(sorted: &[S], num: u64, den: u64) -> S {
    assert!(!sorted.is_empty() && num <= den && den > 0);
    let scaled = (sorted.len() as u64 - 1) * num;
    let lo = (scaled / den) as usize;
    let rem = scaled % den;
    if rem == 0 || lo + 1 >= sorted.len() {
        return sorted[lo].clone();
    }
    let frac = S::ratio(rem, den);
    let (a, b) = (sorted[lo].clone(), sorted[lo + 1].clone());
    a.clone() + frac * (b - a)
}

pub fn quartiles<S: Scalar>(values: &[S]) -> Result<Quartiles<S>, AnalyticsError> {
    let v = sort_checked(values)?;
    let q1 = quantile_sorted(&v, 1, 4);
    let q2 = quantile_sorted(&v, 1, 2);
    let q3 = quantile_sorted(&v, 3, 4);
    let iqr = q3.clone() - q1.clone();
    Ok(Quartiles { q1, q2, q3, iqr })
}

/// Product-moment correlation of two equally long series.
pub fn pearson<F: Float>(x: &[F], y: &[F]) -> Result<F, AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(AnalyticsError::DegenerateInput("need at least two points".into()));
    }
    let n = F::from(x.len()).expect("length fits");
    let mx = x.iter().fold(F::zero(), |a, &b| a + b) / n;
    let my = y.iter().fold(F::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == F::zero() || syy == F::zero() {
        return Err(AnalyticsError::DegenerateInput("zero variance".into()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-F::one()).min(F::one()))
}

/// Affine rescale onto [0, 1].
pub fn min_max_normalize<S: Scalar>(values: &[S]) -> Result<Vec<S>, AnalyticsError> {
    let v = sort_checked(values)?;
    let (lo, hi) = (v[0].clone(), v[v.len() - 1].clone());
    if hi <= lo {
        return Err(AnalyticsError::DegenerateInput("all values equal".into()));
    }
    let span = hi - lo.clone();
    Ok(values.iter().map(|x| (x.clone() - lo.clone()) / span.clone()).collect())
}
