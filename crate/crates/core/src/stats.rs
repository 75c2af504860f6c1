//! Small statistics toolkit: batch means, least squares, Kolmogorov-Smirnov.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(mean: f64, se: f64) -> Self {
        Estimate { mean, se }
    }

    pub fn rel_se(&self) -> f64 {
        if self.mean == 0.0 {
            f64::INFINITY
        } else {
            (self.se / self.mean).abs()
        }
    }

    pub fn scale(self, k: f64) -> Self {
        Estimate {
            mean: self.mean * k,
            se: self.se * k.abs(),
        }
    }

    /// Product of independent estimates, first-order error propagation.
    pub fn product(parts: &[Estimate]) -> Estimate {
        let mean: f64 = parts.iter().map(|e| e.mean).product();
        let rel2: f64 = parts.iter().map(|e| e.rel_se().powi(2)).sum();
        Estimate {
            mean,
            se: mean.abs() * rel2.sqrt(),
        }
    }
}

pub const DEFAULT_BATCHES: usize = 20;

/// Mean with a batch-means standard error.
pub fn batch_means(samples: &[f64], batches: usize) -> Estimate {
    let n = samples.len();
    if n == 0 {
        return Estimate::new(f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let b = batches.clamp(2, n.max(2));
    if n < b {
        return Estimate::new(mean, f64::NAN);
    }
    let size = n / b;
    let means: Vec<f64> = (0..b)
        .map(|k| samples[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    Estimate::new(mean, (var / b as f64).sqrt())
}

/// Combine per-batch means (equal batch sizes) into an estimate.
pub fn from_batch_means(means: &[f64]) -> Estimate {
    let b = means.len();
    let m = means.iter().sum::<f64>() / b as f64;
    if b < 2 {
        return Estimate::new(m, f64::NAN);
    }
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    Estimate::new(m, (var / b as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Ordinary least squares y = intercept + slope x.
pub fn linfit(xs: &[f64], ys: &[f64]) -> LinFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_se = if xs.len() > 2 {
        (resid / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LinFit {
        slope,
        intercept,
        slope_se,
    }
}

/// Weighted least squares with weights 1/sigma^2.
pub fn linfit_weighted(xs: &[f64], ys: &[f64], sigmas: &[f64]) -> LinFit {
    let w: Vec<f64> = sigmas.iter().map(|s| 1.0 / (s * s).max(1e-300)).collect();
    let sw: f64 = w.iter().sum();
    let mx = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(&w).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(&w)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    LinFit {
        slope,
        intercept: my - slope * mx,
        slope_se: (1.0 / sxx).sqrt(),
    }
}

/// Two-sided one-sample KS statistic against a continuous CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = linfit(&xs, &ys);
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-12);
    }

    #[test]
    fn batch_means_of_constant() {
        let e = batch_means(&[3.0; 400], 20);
        assert_eq!(e.mean, 3.0);
        assert_eq!(e.se, 0.0);
    }

    #[test]
    fn ks_uniform_grid_passes() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&mut xs, |x| x);
        assert!(d <= 0.0005 + 1e-12);
        assert!(ks_pvalue(d, 1000) > 0.99);
        assert!(ks_pvalue(0.1, 1000) < 1e-6);
    }
}
