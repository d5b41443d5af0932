//! Kolmogorov-Smirnov tests with asymptotic p-values.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    /// Supremum distance between the distribution functions.
    pub statistic: f64,
    /// Effective sample size, `n` or `nm/(n+m)`.
    pub n_eff: f64,
    pub p_value: f64,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi-transformed series, fast for small λ.
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let sum: f64 = (1..=20)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (-j * j * c).exp()
            })
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted_finite(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::InsufficientSample("empty KS sample".into()));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidSample("NaN in KS sample".into()));
    }
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    Ok(s)
}

/// One-sample test against a continuous distribution function.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult> {
    let s = sorted_finite(sample)?;
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        n_eff: n,
        p_value: kolmogorov_survival(n.sqrt() * d),
    })
}

/// Two-sample test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let (a, b) = (sorted_finite(a)?, sorted_finite(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    Ok(KsResult {
        statistic: d,
        n_eff,
        p_value: kolmogorov_survival(n_eff.sqrt() * d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, uniform_open};

    #[test]
    fn survival_function_values() {
        // Standard tabulated critical values.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_survival(1.2238) - 0.10).abs() < 1e-4);
        // Both series agree where they meet.
        let below = kolmogorov_survival(1.0 - 1e-12);
        let above = kolmogorov_survival(1.0);
        assert!((below - above).abs() < 1e-10);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn uniform_sample_passes_and_shifted_fails() {
        let mut rng = stream(5, "ks", 0);
        let s: Vec<f64> = (0..5000).map(|_| uniform_open(&mut rng)).collect();
        let ok = ks_one_sample(&s, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(ok.p_value > 0.01);
        let bad = ks_one_sample(&s, |x| (x - 0.1).clamp(0.0, 1.0)).unwrap();
        assert!(bad.p_value < 1e-6);
    }

    #[test]
    fn two_sample_distance() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        let r = ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert_eq!(r.n_eff, 1.0);
    }
}
