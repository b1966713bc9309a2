//! One-dimensional Gaussian mixture fitting by expectation-maximization.
//!
//! Deterministic: components are initialized on feature quantiles, so a fit
//! depends only on the data and the requested component count.

/// Fitted mixture parameters.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub weights: Vec<f64>,
    /// False when the iteration cap was hit before the log-likelihood
    /// settled; the best-so-far parameters are still returned.
    pub converged: bool,
}

pub const MAX_ITERATIONS: usize = 100;
pub const LOG_LIKELIHOOD_TOL: f64 = 1e-6;
pub const VARIANCE_FLOOR: f64 = 1e-8;

fn log_normal(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (var * std::f64::consts::TAU).ln() - d * d / (2.0 * var)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + terms.iter().map(|&t| (t - m).exp()).sum::<f64>().ln()
}

/// Fit an `m`-component mixture to scalar features.
pub fn fit(features: &[f64], m: usize) -> GmmFit {
    assert!(m >= 1);
    assert!(!features.is_empty());
    let n = features.len();

    // Quantile initialization.
    let mut sorted = features.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mean_all = features.iter().sum::<f64>() / n as f64;
    let var_all = (features.iter().map(|&x| (x - mean_all).powi(2)).sum::<f64>() / n as f64)
        .max(VARIANCE_FLOOR);
    let mut means: Vec<f64> = (0..m)
        .map(|j| {
            let q = (j as f64 + 0.5) / m as f64;
            sorted[((q * n as f64) as usize).min(n - 1)]
        })
        .collect();
    let mut variances = vec![var_all; m];
    let mut weights = vec![1.0 / m as f64; m];

    let mut prev_ll = f64::NEG_INFINITY;
    let mut converged = false;
    let mut resp = vec![0.0f64; m];
    let mut sums = vec![0.0f64; m];
    let mut sq_sums = vec![0.0f64; m];
    let mut counts = vec![0.0f64; m];

    for _ in 0..MAX_ITERATIONS {
        sums.iter_mut().for_each(|v| *v = 0.0);
        sq_sums.iter_mut().for_each(|v| *v = 0.0);
        counts.iter_mut().for_each(|v| *v = 0.0);
        let mut ll = 0.0;
        for &x in features {
            for j in 0..m {
                resp[j] = weights[j].max(1e-300).ln() + log_normal(x, means[j], variances[j]);
            }
            let norm = log_sum_exp(&resp);
            ll += norm;
            for j in 0..m {
                let r = (resp[j] - norm).exp();
                counts[j] += r;
                sums[j] += r * x;
                sq_sums[j] += r * x * x;
            }
        }
        for j in 0..m {
            if counts[j] > 1e-12 {
                let mu = sums[j] / counts[j];
                means[j] = mu;
                variances[j] = (sq_sums[j] / counts[j] - mu * mu).max(VARIANCE_FLOOR);
                weights[j] = counts[j] / n as f64;
            } else {
                // Starved component; keep its parameters, zero its weight.
                weights[j] = 0.0;
            }
        }
        let mean_ll = ll / n as f64;
        if (mean_ll - prev_ll).abs() < LOG_LIKELIHOOD_TOL {
            converged = true;
            break;
        }
        prev_ll = mean_ll;
    }

    GmmFit {
        means,
        variances,
        weights,
        converged,
    }
}

/// Hard assignment by maximum responsibility; ties go to the lowest index.
pub fn assign(features: &[f64], fit: &GmmFit) -> Vec<u32> {
    let m = fit.means.len();
    features
        .iter()
        .map(|&x| {
            let mut best = 0usize;
            let mut best_score = f64::NEG_INFINITY;
            for j in 0..m {
                if fit.weights[j] <= 0.0 {
                    continue;
                }
                let score =
                    fit.weights[j].ln() + log_normal(x, fit.means[j], fit.variances[j]);
                if score > best_score {
                    best_score = score;
                    best = j;
                }
            }
            best as u32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_two_well_separated_modes() {
        let mut data = Vec::new();
        for i in 0..500 {
            data.push(-2.0 + 0.01 * ((i * 37 % 100) as f64 / 100.0 - 0.5));
            data.push(3.0 + 0.01 * ((i * 53 % 100) as f64 / 100.0 - 0.5));
        }
        let fit = fit(&data, 2);
        assert!(fit.converged);
        let mut means = fit.means.clone();
        means.sort_by(f64::total_cmp);
        assert!((means[0] + 2.0).abs() < 0.05);
        assert!((means[1] - 3.0).abs() < 0.05);
        let labels = assign(&data, &fit);
        for (i, &x) in data.iter().enumerate() {
            let low = fit.means[labels[i] as usize] < 0.0;
            assert_eq!(low, x < 0.0);
        }
    }

    #[test]
    fn constant_data_collapses() {
        let data = vec![0.7; 200];
        let fit = fit(&data, 3);
        let labels = assign(&data, &fit);
        // All samples land in one component.
        assert!(labels.iter().all(|&l| l == labels[0]));
    }

    #[test]
    fn single_component_matches_moments() {
        let data: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let fit = fit(&data, 1);
        let mean = data.iter().sum::<f64>() / 100.0;
        assert!((fit.means[0] - mean).abs() < 1e-9);
        assert!((fit.weights[0] - 1.0).abs() < 1e-12);
    }
}
