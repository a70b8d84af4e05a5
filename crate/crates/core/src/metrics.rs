//! Predictive-quality metrics for classification and regression.

use std::f64::consts::PI;
use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};

/// Probabilities below this are clamped before taking logs.
pub const NLPD_FLOOR: f64 = 1e-12;

fn check_probs(probs: &[f64]) -> Result<()> {
    let s: f64 = probs.iter().sum();
    if probs.is_empty() || (s - 1.0).abs() > 1e-9 || probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::domain(format!(
            "probabilities must be non-negative and sum to 1 (sum = {s})"
        )));
    }
    Ok(())
}

/// −ln p_true with p_true floored at `NLPD_FLOOR`. The flag reports whether
/// the floor was applied.
pub fn nlpd_class_flagged(probs: &[f64], true_class: usize) -> Result<(f64, bool)> {
    check_probs(probs)?;
    let p = *probs
        .get(true_class)
        .ok_or_else(|| Error::domain(format!("class index {true_class} out of range")))?;
    let clamped = p < NLPD_FLOOR;
    Ok((-p.max(NLPD_FLOOR).ln(), clamped))
}

pub fn nlpd_class(probs: &[f64], true_class: usize) -> Result<f64> {
    Ok(nlpd_class_flagged(probs, true_class)?.0)
}

/// −ln((c/(c−1))(1 − max p)) for a sample from a class the model does not
/// know; zero at the uniform prediction over the c known classes.
pub fn nlpd_mod(probs: &[f64], c: usize) -> Result<f64> {
    if c < 2 {
        return Err(Error::domain(format!("modified NLPD needs c >= 2, got {c}")));
    }
    check_dims(c, probs.len())?;
    check_probs(probs)?;
    let max = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = probs.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == min {
        return Ok(0.0);
    }
    let rest = (1.0 - max).max(NLPD_FLOOR);
    let cf = c as f64;
    Ok(-(cf / (cf - 1.0) * rest).ln())
}

pub fn nlpd_gaussian(mean: f64, std: f64, y: f64) -> Result<f64> {
    if !(std > 0.0) {
        return Err(Error::domain(format!("standard deviation must be positive, got {std}")));
    }
    let z = (y - mean) / std;
    Ok(0.5 * (2.0 * PI * std * std).ln() + 0.5 * z * z)
}

/// Mann–Whitney AUC with ties counted as one half.
pub fn auc_binary(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_dims(scores.len(), labels.len())?;
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::domain("labels must be 0 or 1"));
    }
    let n1 = labels.iter().filter(|&&l| l == 1).count();
    let n0 = labels.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::domain("AUC needs both classes present"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::domain("scores contain NaN"));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of mid-ranks (1-based) of the positives.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            if labels[k] == 1 {
                rank_sum += mid;
            }
        }
        i = j + 1;
    }
    let (n0, n1) = (n0 as f64, n1 as f64);
    Ok((rank_sum - n1 * (n1 + 1.0) / 2.0) / (n0 * n1))
}

/// Unweighted mean of one-vs-rest AUCs over the c classes.
pub fn auc_macro(probs: ArrayView2<f64>, labels: &[usize], c: usize) -> Result<f64> {
    check_dims(probs.nrows(), labels.len())?;
    check_dims(c, probs.ncols())?;
    let mut total = 0.0;
    for k in 0..c {
        if !labels.contains(&k) {
            return Err(Error::domain(format!("class {k} has no samples")));
        }
        let bin: Vec<u8> = labels.iter().map(|&l| u8::from(l == k)).collect();
        total += auc_binary(&probs.column(k).to_vec(), &bin)?;
    }
    Ok(total / c as f64)
}

pub fn predictive_entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

pub fn bernoulli_std(p: f64) -> f64 {
    (p * (1.0 - p)).max(0.0).sqrt()
}

pub fn accuracy(probs: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    check_dims(probs.nrows(), labels.len())?;
    if labels.is_empty() {
        return Err(Error::domain("accuracy of an empty set"));
    }
    let correct = probs
        .rows()
        .into_iter()
        .zip(labels)
        .filter(|(r, &l)| argmax(&r.to_vec()) == l)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Index of the largest entry; the first one wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Fixed-width histogram over `[lo, hi]`. Bins are left-closed and
/// right-open except the last, which is closed. Values outside the range,
/// and NaN, go to the sentinels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn edges(&self) -> Vec<(f64, f64)> {
        let n = self.counts.len();
        let w = (self.hi - self.lo) / n as f64;
        (0..n)
            .map(|i| {
                let right = if i + 1 == n { self.hi } else { self.lo + w * (i + 1) as f64 };
                (self.lo + w * i as f64, right)
            })
            .collect()
    }

    /// CSV with columns bin_left, bin_right, count.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows: Vec<[f64; 3]> = self
            .edges()
            .into_iter()
            .zip(&self.counts)
            .map(|((l, r), &c)| [l, r, c as f64])
            .collect();
        crate::io::write_csv_rows(path, &["bin_left", "bin_right", "count"], rows)
    }
}

pub fn histogram(values: &[f64], n_bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if n_bins == 0 {
        return Err(Error::domain("histogram needs at least one bin"));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::domain(format!("invalid histogram range [{lo}, {hi}]")));
    }
    let mut h = Histogram {
        lo,
        hi,
        counts: vec![0; n_bins],
        underflow: 0,
        overflow: 0,
    };
    let w = (hi - lo) / n_bins as f64;
    for &v in values {
        if v < lo {
            h.underflow += 1;
        } else if v > hi || v.is_nan() {
            h.overflow += 1;
        } else {
            let b = (((v - lo) / w) as usize).min(n_bins - 1);
            h.counts[b] += 1;
        }
    }
    Ok(h)
}

/// Average of [`nlpd_mod`] over the rows of an n × c probability matrix.
pub fn mean_nlpd_mod(probs: ArrayView2<f64>) -> Result<f64> {
    if probs.nrows() == 0 {
        return Err(Error::domain("modified NLPD of an empty set"));
    }
    let c = probs.ncols();
    let mut total = 0.0;
    for row in probs.rows() {
        total += nlpd_mod(&row.to_vec(), c)?;
    }
    Ok(total / probs.nrows() as f64)
}

/// Summary of a probabilistic classifier on a labelled set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub n: usize,
    pub accuracy: f64,
    pub mean_nlpd: f64,
    /// Number of samples whose true-class probability hit the floor.
    pub nlpd_clamped: usize,
    pub macro_auc: Option<f64>,
    /// Mean modified NLPD, filled in only for samples of unknown classes.
    pub mean_nlpd_mod: Option<f64>,
    pub mean_entropy: f64,
    pub class_counts: Vec<usize>,
}

/// Builds a report from an n × c probability matrix. AUC is omitted when a
/// class is absent from `labels`.
pub fn classification_report(probs: ArrayView2<f64>, labels: &[usize]) -> Result<MetricReport> {
    check_dims(probs.nrows(), labels.len())?;
    let c = probs.ncols();
    let mut total = 0.0;
    let mut clamped = 0;
    let mut entropy = 0.0;
    let mut class_counts = vec![0; c];
    for (row, &l) in probs.rows().into_iter().zip(labels) {
        let p = row.to_vec();
        let (v, flag) = nlpd_class_flagged(&p, l)?;
        total += v;
        clamped += usize::from(flag);
        entropy += predictive_entropy(&p);
        class_counts[l] += 1;
    }
    let n = labels.len();
    let macro_auc = if class_counts.iter().all(|&k| k > 0) {
        Some(auc_macro(probs, labels, c)?)
    } else {
        None
    };
    Ok(MetricReport {
        n,
        accuracy: accuracy(probs, labels)?,
        mean_nlpd: total / n as f64,
        nlpd_clamped: clamped,
        macro_auc,
        mean_nlpd_mod: None,
        mean_entropy: entropy / n as f64,
        class_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn nlpd_examples() {
        assert_eq!(nlpd_class(&[1.0, 0.0], 0).unwrap(), 0.0);
        let e1 = (-1.0f64).exp();
        assert!((nlpd_class(&[e1, 1.0 - e1], 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((nlpd_class(&[0.9, 0.1], 0).unwrap() - 0.105_360_515_657_826_3).abs() < 1e-15);
        let (v, flag) = nlpd_class_flagged(&[1.0, 0.0], 1).unwrap();
        assert!(flag && (v - 27.631_021_115_928_547).abs() < 1e-12);
        assert!(nlpd_class(&[0.5, 0.5], 2).is_err());
        assert!(nlpd_class(&[0.5, 0.6], 0).is_err());
    }

    #[test]
    fn nlpd_mod_examples() {
        let v = nlpd_mod(&[0.62, 0.1, 0.1, 0.1, 0.08], 5).unwrap();
        assert!((v - (-(1.25f64 * 0.38).ln())).abs() < 1e-14);
        assert!((v - 0.744).abs() < 1e-3);
        let conf = nlpd_mod(&[1.0, 0.0, 0.0], 3).unwrap();
        assert!((conf - (-(1.5f64 * 1e-12).ln())).abs() < 1e-12);
        assert!(conf > 27.0);
        assert!(nlpd_mod(&[1.0], 1).is_err());
    }

    #[test]
    fn gaussian_nlpd_examples() {
        let s = 1.0 / (2.0 * PI).sqrt();
        assert!(nlpd_gaussian(0.3, s, 0.3).unwrap().abs() < 1e-15);
        let base = nlpd_gaussian(1.0, 0.4, 1.0).unwrap();
        assert!((nlpd_gaussian(1.0, 0.4, 1.4).unwrap() - base - 0.5).abs() < 1e-14);
        assert!((nlpd_gaussian(0.0, 1.0, 2.0).unwrap() - 2.918_938_533_204_672_7).abs() < 1e-14);
        assert!(nlpd_gaussian(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_binary(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc_binary(&[0.3; 6], &[0, 1, 0, 1, 1, 0]).unwrap(), 0.5);
        assert_eq!(auc_binary(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert!(auc_binary(&[0.1, 0.2], &[1, 1]).is_err());
    }

    #[test]
    fn macro_auc_examples() {
        let p = array![[0.8, 0.2], [0.3, 0.7], [0.6, 0.4], [0.45, 0.55]];
        let labels = [0, 1, 1, 0];
        let m = auc_macro(p.view(), &labels, 2).unwrap();
        let b = auc_binary(&[0.2, 0.7, 0.4, 0.55], &[0, 1, 1, 0]).unwrap();
        assert!((m - b).abs() < 1e-15);
        let perfect = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(auc_macro(perfect.view(), &[0, 1, 2], 3).unwrap(), 1.0);
        let uniform = array![[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]];
        assert_eq!(auc_macro(uniform.view(), &[0, 1, 1], 2).unwrap(), 0.5);
        assert!(auc_macro(uniform.view(), &[0, 0, 0], 2).is_err());
    }

    #[test]
    fn entropy_and_bernoulli() {
        assert_eq!(predictive_entropy(&[0.0, 1.0, 0.0]), 0.0);
        assert!((predictive_entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-15);
        assert!((predictive_entropy(&[0.5, 0.25, 0.25]) - 1.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(bernoulli_std(0.0), 0.0);
        assert_eq!(bernoulli_std(1.0), 0.0);
        assert_eq!(bernoulli_std(0.5), 0.5);
        assert!((bernoulli_std(0.9) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[0.0, 0.5, 1.0], 2, (0.0, 1.0)).unwrap();
        // 0.5 sits on the shared edge and belongs to the right bin.
        assert_eq!(h.counts, vec![1, 2]);
        let h = histogram(&[0.3, 0.3, 0.3], 4, (0.0, 1.0)).unwrap();
        assert_eq!(h.counts, vec![0, 3, 0, 0]);
        let h = histogram(&[], 3, (0.0, 1.0)).unwrap();
        assert_eq!(h.counts, vec![0, 0, 0]);
        let h = histogram(&[-1.0, 2.0, f64::NAN], 3, (0.0, 1.0)).unwrap();
        assert_eq!((h.underflow, h.overflow), (1, 2));
        assert!(histogram(&[1.0], 0, (0.0, 1.0)).is_err());
    }

    #[test]
    fn report_fields() {
        let p = array![[0.9, 0.1], [0.2, 0.8], [0.6, 0.4], [0.0, 1.0]];
        let r = classification_report(p.view(), &[0, 1, 1, 0]).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.nlpd_clamped, 1);
        assert_eq!(r.class_counts, vec![2, 2]);
        assert!(r.macro_auc.is_some());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"mean_nlpd\""));
    }
}
