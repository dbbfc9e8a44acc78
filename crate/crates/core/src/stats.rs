//! Sample statistics for Monte Carlo validation: means with standard
//! errors, batch means for weighted estimators and Kolmogorov-Smirnov
//! distances.

use crate::error::{Error, Result};

/// Point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Distance to a reference value in units of the standard error.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.value == reference {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - reference).abs() / self.std_error
        }
    }
}

/// Sample mean and standard error of the mean for i.i.d. draws.
pub fn mean_se(xs: &[f64]) -> Result<Estimate> {
    if xs.is_empty() {
        return Err(Error::Data("mean of an empty sample".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok(Estimate { value: mean, std_error: 0.0 });
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate { value: mean, std_error: (var / n).sqrt() })
}

/// Ratio estimator `sum(w x) / sum(w)` with a batch-means standard error,
/// as needed for Radon-Nikodym-weighted expectations.
pub fn weighted_mean_se(xs: &[f64], ws: &[f64], n_batches: usize) -> Result<Estimate> {
    if xs.len() != ws.len() {
        return Err(Error::Data("weights and samples differ in length".into()));
    }
    if xs.is_empty() || n_batches < 2 {
        return Err(Error::Data("weighted mean needs samples and at least 2 batches".into()));
    }
    let n = xs.len();
    let batches = n_batches.min(n);
    let mut batch_values = Vec::with_capacity(batches);
    for b in 0..batches {
        let lo = b * n / batches;
        let hi = (b + 1) * n / batches;
        let sw: f64 = ws[lo..hi].iter().sum();
        let swx: f64 = xs[lo..hi].iter().zip(&ws[lo..hi]).map(|(x, w)| x * w).sum();
        if sw == 0.0 {
            return Err(Error::Data("a weight batch sums to zero".into()));
        }
        batch_values.push(swx / sw);
    }
    let est = mean_se(&batch_values)?;
    // full-sample ratio as the point estimate, batch spread as the error
    let sw: f64 = ws.iter().sum();
    let swx: f64 = xs.iter().zip(ws).map(|(x, w)| x * w).sum();
    Ok(Estimate { value: swx / sw, std_error: est.std_error })
}

/// Kolmogorov-Smirnov statistic `sup |F_n - F|` against a reference CDF.
/// Sorts the sample in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Data("KS statistic of an empty sample".into()));
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// Asymptotic critical value of the KS statistic at significance `alpha`:
/// `sqrt(-ln(alpha / 2) / 2) / sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    ((-(alpha / 2.0).ln()) / 2.0).sqrt() / (n as f64).sqrt()
}

/// Sample covariance of two series.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Data("covariance needs two equally long samples".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    Ok(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0))
}

/// Standard error of the sample covariance, from the i.i.d. spread of the
/// centered products.
pub fn covariance_se(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    Ok(mean_se(&prods)?.std_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::norm_cdf;

    #[test]
    fn mean_and_error() {
        let e = mean_se(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((e.value - 2.5).abs() < 1e-15);
        // sample var = 5/3, se = sqrt(5/12)
        assert!((e.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!(mean_se(&[]).is_err());
    }

    #[test]
    fn weighted_mean_constant_weights_reduces_to_mean() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let ws = [2.0; 8];
        let e = weighted_mean_se(&xs, &ws, 4).unwrap();
        assert!((e.value - 4.5).abs() < 1e-15);
        assert!(e.std_error > 0.0);
    }

    #[test]
    fn ks_on_uniform_grid() {
        // perfectly spaced quantiles of U(0,1): D = 1/(2n)
        let n = 100;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&mut xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.005).abs() < 1e-12);
        assert!(d < ks_critical(n, 0.01));
    }

    #[test]
    fn ks_detects_wrong_law() {
        let n = 2000;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        // uniform sample against a standard normal law
        let d = ks_statistic(&mut xs, norm_cdf).unwrap();
        assert!(d > ks_critical(n, 0.01));
    }

    #[test]
    fn covariance_basics() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [2.0, 4.0, 6.0];
        assert!((covariance(&xs, &ys).unwrap() - 2.0).abs() < 1e-15);
        assert!(covariance_se(&xs, &ys).unwrap() > 0.0);
    }
}
