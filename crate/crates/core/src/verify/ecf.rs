//! Empirical characteristic functions and their z-scores.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Sample mean of `exp(i<θ, x>)` with the combined standard error of its
/// real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcfEstimate {
    pub theta: Vec<f64>,
    pub value: Complex64,
    pub stderr: f64,
    pub n: usize,
}

fn ecf_from_phases(theta: &[f64], phases: impl Iterator<Item = f64> + Clone, n: usize) -> EcfEstimate {
    let nf = n as f64;
    let (mut sc, mut ss) = (0.0, 0.0);
    for p in phases.clone() {
        sc += p.cos();
        ss += p.sin();
    }
    let (mc, ms) = (sc / nf, ss / nf);
    let (mut vc, mut vs) = (0.0, 0.0);
    for p in phases {
        vc += (p.cos() - mc).powi(2);
        vs += (p.sin() - ms).powi(2);
    }
    EcfEstimate {
        theta: theta.to_vec(),
        value: Complex64::new(mc, ms),
        stderr: ((vc + vs) / nf / nf).sqrt(),
        n,
    }
}

/// ECF of vector samples at `theta`.
pub fn ecf(samples: &[Vec<f64>], theta: &[f64]) -> Result<EcfEstimate> {
    if samples.is_empty() {
        return Err(Error::InsufficientSample("empty ECF sample".into()));
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != theta.len()) {
        return Err(Error::InvalidParams(format!(
            "sample dimension {} does not match theta dimension {}",
            bad.len(),
            theta.len()
        )));
    }
    let phases = samples
        .iter()
        .map(|x| x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>());
    Ok(ecf_from_phases(theta, phases, samples.len()))
}

/// ECF of a scalar sample.
pub fn ecf_scalar(samples: &[f64], theta: f64) -> Result<EcfEstimate> {
    if samples.is_empty() {
        return Err(Error::InsufficientSample("empty ECF sample".into()));
    }
    Ok(ecf_from_phases(&[theta], samples.iter().map(|x| x * theta), samples.len()))
}

/// `(|ecf - cf| - bias)^+ / sqrt(stderr^2 + extra^2)`; a zero denominator
/// gives 0 when the excess is 0 and infinity otherwise.
pub fn z_score(estimate: &EcfEstimate, target: Complex64, bias: f64, extra_stderr: f64) -> f64 {
    let excess = ((estimate.value - target).norm() - bias).max(0.0);
    let se = estimate.stderr.hypot(extra_stderr);
    if excess == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        excess / se
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;
    use std::f64::consts::PI;

    #[test]
    fn trivial_cases() {
        let e = ecf(&[vec![1.0, 2.0], vec![3.0, -1.0]], &[0.0, 0.0]).unwrap();
        assert_eq!(e.value, Complex64::new(1.0, 0.0));
        assert_eq!(e.stderr, 0.0);
        let e = ecf(&[vec![0.3, 0.7]], &[1.0, 2.0]).unwrap();
        assert!((e.value - Complex64::from_polar(1.0, 1.7)).norm() < 1e-15);
        assert!(ecf(&[], &[1.0]).is_err());
        assert!(ecf(&[vec![1.0]], &[1.0, 2.0]).is_err());
    }

    fn two_point_sample(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = stream(seed, "two-point", 0);
        (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn two_point_law_cancels_at_pi() {
        let s = two_point_sample(1, 100_000);
        let e = ecf_scalar(&s, PI).unwrap();
        assert!(e.value.norm() <= 3.0 * e.stderr, "{} vs {}", e.value, e.stderr);
        assert!(e.stderr <= (2.0 / e.n as f64).sqrt());
    }

    #[test]
    fn z_machinery_is_calibrated() {
        // The exact CF of the fair two-point law on {0, 1} is (1 + e^{iθ})/2.
        let grid = [0.5, 1.0, 2.0, PI];
        let passes = (0..100)
            .filter(|&seed| {
                let s = two_point_sample(seed, 2_000);
                grid.iter().all(|&t| {
                    let e = ecf_scalar(&s, t).unwrap();
                    let cf = (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, t)) / 2.0;
                    z_score(&e, cf, 0.0, 0.0) <= 4.0
                })
            })
            .count();
        assert!(passes >= 95, "{passes} of 100 seeds passed");
    }

    #[test]
    fn z_score_edges() {
        let e = ecf_scalar(&[0.0], 1.0).unwrap();
        assert_eq!(z_score(&e, Complex64::new(1.0, 0.0), 0.0, 0.0), 0.0);
        assert_eq!(z_score(&e, Complex64::new(0.0, 0.0), 0.0, 0.0), f64::INFINITY);
        assert_eq!(z_score(&e, Complex64::new(0.0, 0.0), 2.0, 0.0), 0.0);
    }
}
