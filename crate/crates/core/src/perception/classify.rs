//! z-scored, Fisher-weighted k-nearest-neighbour classifier.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub labels: Vec<String>,
    pub k: usize,
    pub mean: Vec<f64>,
    /// Per-dimension standard deviation; constant dimensions get 1.
    pub std: Vec<f64>,
    /// Per-dimension weight `sqrt(between / within)` class variance, so
    /// uninformative dimensions do not swamp the metric.
    pub weight: Vec<f64>,
    samples: Vec<(Vec<f64>, usize)>,
}

impl KnnModel {
    /// Fits normalisation statistics and stores the normalised samples.
    ///
    /// `labels` fixes the label order used for tie-breaking; every sample
    /// label must index into it.
    pub fn train(samples: &[(Vec<f64>, usize)], labels: Vec<String>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if labels.len() < 2 {
            return Err(Error::InsufficientData(format!("need at least 2 classes, got {}", labels.len())));
        }
        let dim = samples.first().map(|s| s.0.len()).unwrap_or(0);
        if samples.iter().any(|s| s.0.len() != dim || s.1 >= labels.len()) {
            return Err(Error::Parameter("inconsistent feature length or label".into()));
        }
        let mut counts = vec![0usize; labels.len()];
        for s in samples {
            counts[s.1] += 1;
        }
        if let Some((c, &n)) = counts.iter().enumerate().find(|(_, &n)| n < k) {
            return Err(Error::InsufficientData(format!(
                "class {:?} has {n} samples, fewer than k = {k}",
                labels[c]
            )));
        }
        let n = samples.len() as f64;
        let mut mean = vec![0.0; dim];
        for (v, _) in samples {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; dim];
        for (v, _) in samples {
            for d in 0..dim {
                std[d] += (v[d] - mean[d]).powi(2);
            }
        }
        for s in &mut std {
            *s = (*s / n).sqrt();
            if !(*s > 1e-12) {
                *s = 1.0;
            }
        }
        let weight = fisher_weights(samples, &mean, &std, labels.len());
        let mut model = KnnModel {
            labels,
            k,
            mean,
            std,
            weight,
            samples: Vec::new(),
        };
        model.samples = samples.iter().map(|(v, l)| (model.normalize(v), *l)).collect();
        Ok(model)
    }

    pub fn normalize(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .zip(&self.weight)
            .map(|(((x, m), s), w)| w * (x - m) / s)
            .collect()
    }

    /// Majority label among the `k` nearest training samples (Euclidean in
    /// weighted z-scored space). Distance ties keep the earlier sample; vote ties go
    /// to the lowest label index.
    pub fn classify(&self, v: &[f64]) -> usize {
        let q = self.normalize(v);
        let mut d: Vec<(f64, usize)> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, (s, _))| (s.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(d.len());
        d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.labels.len()];
        for &(_, i) in &d[..k] {
            votes[self.samples[i].1] += 1;
        }
        let best = *votes.iter().max().unwrap_or(&0);
        votes.iter().position(|&v| v == best).unwrap_or(0)
    }
}

/// Largest Fisher ratio a dimension may carry; bounds zero-spread classes.
const MAX_FISHER: f64 = 1e4;

fn fisher_weights(samples: &[(Vec<f64>, usize)], mean: &[f64], std: &[f64], classes: usize) -> Vec<f64> {
    let dim = mean.len();
    let n = samples.len() as f64;
    let mut count = vec![0.0; classes];
    let mut cmean = vec![vec![0.0; dim]; classes];
    for (v, l) in samples {
        count[*l] += 1.0;
        for d in 0..dim {
            cmean[*l][d] += v[d];
        }
    }
    for (m, c) in cmean.iter_mut().zip(&count) {
        if *c > 0.0 {
            m.iter_mut().for_each(|x| *x /= c);
        }
    }
    (0..dim)
        .map(|d| {
            let var = std[d] * std[d];
            let between: f64 = (0..classes).map(|c| count[c] * (cmean[c][d] - mean[d]).powi(2)).sum::<f64>() / n;
            let within: f64 = samples.iter().map(|(v, l)| (v[d] - cmean[*l][d]).powi(2)).sum::<f64>() / n;
            if between <= 1e-12 * var.max(1e-300) {
                return 0.0;
            }
            (between / within.max(between / MAX_FISHER)).sqrt()
        })
        .collect()
}

pub fn confusion_matrix(truth: &[usize], pred: &[usize], classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0usize; classes]; classes];
    for (&t, &p) in truth.iter().zip(pred) {
        m[t][p] += 1;
    }
    m
}

/// `(correct, total)`.
pub fn accuracy(truth: &[usize], pred: &[usize]) -> (usize, usize) {
    let correct = truth.iter().zip(pred).filter(|(a, b)| a == b).count();
    (correct, truth.len().min(pred.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn separated_clusters() {
        let s: Vec<(Vec<f64>, usize)> = (0..10)
            .map(|i| (vec![i as f64 * 0.01, 100.0], 0))
            .chain((0..10).map(|i| (vec![5.0 + i as f64 * 0.01, 100.0], 1)))
            .collect();
        let m = KnnModel::train(&s, labels(), 3).unwrap();
        for (v, l) in &s {
            assert_eq!(m.classify(v), *l);
        }
        assert_eq!(m.std[1], 1.0);
    }

    #[test]
    fn vote_tie_goes_to_lowest_label() {
        let s = vec![(vec![1.0], 1), (vec![-1.0], 0)];
        let m = KnnModel::train(&s, labels(), 1).unwrap();
        let m2 = KnnModel { k: 2, ..m };
        assert_eq!(m2.classify(&[0.0]), 0);
    }

    #[test]
    fn insufficient_data() {
        let s = vec![(vec![1.0], 0), (vec![2.0], 0), (vec![3.0], 1)];
        assert!(matches!(KnnModel::train(&s, labels(), 2), Err(Error::InsufficientData(_))));
        assert!(KnnModel::train(&s, vec!["only".into()], 1).is_err());
    }

    #[test]
    fn confusion_and_accuracy() {
        let m = confusion_matrix(&[0, 1, 1], &[0, 1, 0], 2);
        assert_eq!(m, vec![vec![1, 0], vec![1, 1]]);
        assert_eq!(accuracy(&[0, 1, 1], &[0, 1, 0]), (2, 3));
    }
}
