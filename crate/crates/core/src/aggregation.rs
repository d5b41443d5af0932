//! Contemporaneous and temporal aggregation of independent copies.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{stationary_tail_constant, ModelParams};
use crate::error::{Error, Result};
use crate::heavy_tail::{imm_mean, power_sum, zeta_tail, ParetoIntLaw};
use crate::rng::stream;
use crate::sim::{auto_burn_in, AggregateSampler, PathEnsemble};

/// Centering applied to every copy before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CenteringMode {
    /// `E(X_0 1{X_0 ≤ a})`, estimated as `c_hat`.
    Truncated { a: f64, c_hat: f64 },
    None,
    /// Full mean `E X_0`, finite for `α > 1`.
    Mean { mu: f64 },
}

impl CenteringMode {
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        match *self {
            CenteringMode::Truncated { a, c_hat } => {
                if !(a > 0.0) || !c_hat.is_finite() {
                    return Err(Error::Centering(format!(
                        "truncated centering needs a > 0 and a finite center, got a = {a}, center = {c_hat}"
                    )));
                }
            }
            CenteringMode::Mean { mu } => {
                if params.alpha() <= 1.0 {
                    return Err(Error::Centering(format!(
                        "mean centering needs alpha > 1, got {}",
                        params.alpha()
                    )));
                }
                if !mu.is_finite() {
                    return Err(Error::Centering("mean must be finite".into()));
                }
            }
            CenteringMode::None => {}
        }
        Ok(())
    }

    /// Per-copy center value.
    pub fn center(&self) -> f64 {
        match *self {
            CenteringMode::Truncated { c_hat, .. } => c_hat,
            CenteringMode::None => 0.0,
            CenteringMode::Mean { mu } => mu,
        }
    }

    pub fn descriptor(&self) -> String {
        match *self {
            CenteringMode::Truncated { a, c_hat } => format!("truncated(a={a:e};c={c_hat:e})"),
            CenteringMode::None => "none".into(),
            CenteringMode::Mean { mu } => format!("mean({mu:e})"),
        }
    }
}

/// Centered and scaled aggregate on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateSeries {
    pub t_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub scaling: f64,
    pub centering: CenteringMode,
}

impl AggregateSeries {
    /// CSV with columns `t, v0.., scaling, centering`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let dim = self.values.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((0..dim).map(|j| format!("v{j}")));
        header.push("scaling".into());
        header.push("centering".into());
        writeln!(out, "{}", header.join(","))?;
        let desc = self.centering.descriptor();
        for (t, v) in self.t_grid.iter().zip(&self.values) {
            let mut cells = vec![format!("{t}")];
            cells.extend(v.iter().map(|x| format!("{x:e}")));
            cells.push(format!("{:e}", self.scaling));
            cells.push(desc.clone());
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Sample average of `x 1{x ≤ a}`.
pub fn truncated_mean_estimate(sample: &[f64], a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidParams(format!("threshold must be positive, got {a}")));
    }
    if sample.is_empty() {
        return Err(Error::InsufficientSample("empty sample".into()));
    }
    Ok(sample.iter().filter(|&&x| x <= a).sum::<f64>() / sample.len() as f64)
}

/// `E X_0 = ζ(α)/(1 - m)` for `α > 1`.
pub fn stationary_mean(params: &ModelParams) -> Result<f64> {
    Ok(imm_mean(&ParetoIntLaw::from(params))? / (1.0 - params.m_xi()))
}

/// How the truncated mean `E(X_0 1{X_0 ≤ a})` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMethod {
    /// Plain sample average over an independent stationary sample.
    Empirical,
    /// Sample average below a threshold `x_0 < a`, stationary tail asymptotics
    /// on `(x_0, a]`.
    Hybrid,
    /// `E X_0` minus the tail asymptotics on `(a, ∞)`; needs `α > 1`.
    MeanMinusTail,
}

impl CenterMethod {
    pub fn default_for(params: &ModelParams) -> Self {
        if params.alpha() > 1.0 {
            CenterMethod::MeanMinusTail
        } else {
            CenterMethod::Hybrid
        }
    }
}

/// Estimated truncated mean with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: CenterMethod,
    /// Threshold below which the sample is used (hybrid only).
    pub split: Option<f64>,
    pub sample_size: usize,
}

/// Split point of the hybrid estimator.
pub fn hybrid_split(a: f64) -> f64 {
    a.powf(2.0 / 3.0).floor().max(1.0)
}

fn mean_and_se(vals: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = vals.clone().sum::<f64>() / nf;
    let var = vals.map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    (mean, (var / nf).sqrt())
}

/// Stationary tail `P(X_0 > y) ≈ c_π (⌊y⌋ + 1)^{-α}` integrated against `x`
/// over `(lo, hi]`, for integers `lo < hi`.
fn tail_first_moment(params: &ModelParams, lo: u64, hi: u64) -> f64 {
    let alpha = params.alpha();
    let c = stationary_tail_constant(params);
    let t = |y: u64| c * (y as f64 + 1.0).powf(-alpha);
    // Σ_{x=lo+1}^{hi} x (T(x-1) - T(x)) = (lo+1)T(lo) - hi T(hi) + Σ_{y=lo+1}^{hi-1} T(y)
    (lo as f64 + 1.0) * t(lo) - hi as f64 * t(hi) + c * power_sum(alpha, lo + 2, hi)
}

/// `E(X_0 1{X_0 ≤ a})` from an independent stationary sample.
pub fn truncated_center(
    params: &ModelParams,
    a: f64,
    sample: &[u64],
    method: CenterMethod,
) -> Result<CenterEstimate> {
    if !(a >= 1.0) {
        return Err(Error::InvalidParams(format!("threshold must be >= 1, got {a}")));
    }
    let big_a = a.floor() as u64;
    match method {
        CenterMethod::MeanMinusTail => {
            let mean = stationary_mean(params)?;
            let alpha = params.alpha();
            let c = stationary_tail_constant(params);
            let tail = (big_a as f64 + 1.0) * c * (big_a as f64 + 1.0).powf(-alpha)
                + c * zeta_tail(alpha, big_a + 2);
            Ok(CenterEstimate {
                value: mean - tail,
                stderr: 0.0,
                method,
                split: None,
                sample_size: 0,
            })
        }
        CenterMethod::Empirical | CenterMethod::Hybrid => {
            if sample.is_empty() {
                return Err(Error::InsufficientSample("empty centering sample".into()));
            }
            let split = match method {
                CenterMethod::Hybrid => (hybrid_split(a) as u64).min(big_a),
                _ => big_a,
            };
            let vals = sample
                .iter()
                .map(move |&x| if x <= split { x as f64 } else { 0.0 });
            let (mean, se) = mean_and_se(vals, sample.len());
            let value = if split < big_a {
                mean + tail_first_moment(params, split, big_a)
            } else {
                mean
            };
            Ok(CenterEstimate {
                value,
                stderr: se,
                method,
                split: (split < big_a).then_some(split as f64),
                sample_size: sample.len(),
            })
        }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParams("time grid must be finite and nonnegative".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("time grid must be increasing".into()));
    }
    Ok(())
}

/// `a_N^{-1} Σ_{j ≤ ⌊Nt⌋} (X^{(j)} - center)` per coordinate, for each `t` in `[0, 1]`.
pub fn copy_partial_sums(
    ensemble: &PathEnsemble,
    t_grid: &[f64],
    a_n: f64,
    centering: CenteringMode,
) -> Result<AggregateSeries> {
    check_grid(t_grid)?;
    if t_grid.iter().any(|t| *t > 1.0) {
        return Err(Error::InvalidParams("copy time grid must lie in [0, 1]".into()));
    }
    if !(a_n > 0.0) {
        return Err(Error::InvalidParams(format!("a_N must be positive, got {a_n}")));
    }
    centering.validate(&ensemble.params)?;
    let n = ensemble.n_rows();
    let width = ensemble.width();
    let center = centering.center();
    let mut acc = vec![0u128; width];
    let mut taken = 0usize;
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let upto = ((n as f64) * t).floor() as usize;
        while taken < upto {
            for (a, &x) in acc.iter_mut().zip(ensemble.row(taken)) {
                *a += u128::from(x);
            }
            taken += 1;
        }
        values.push(
            acc.iter()
                .map(|&s| (s as f64 - upto as f64 * center) / a_n)
                .collect(),
        );
    }
    Ok(AggregateSeries {
        t_grid: t_grid.to_vec(),
        values,
        scaling: a_n,
        centering,
    })
}

/// Same statistic as [`copy_partial_sums`] but for one replication of the
/// whole ensemble, drawn through the aggregate chain: each block of copies
/// `(⌊N t_{i-1}⌋, ⌊N t_i⌋]` is an independent aggregate chain.
pub fn sampled_copy_partial_sums<R: Rng + ?Sized>(
    params: &ModelParams,
    n_copies: u64,
    horizon: usize,
    t_grid: &[f64],
    a_n: f64,
    centering: CenteringMode,
    burn_in: u32,
    rng: &mut R,
) -> Result<AggregateSeries> {
    check_grid(t_grid)?;
    if t_grid.iter().any(|t| *t > 1.0) {
        return Err(Error::InvalidParams("copy time grid must lie in [0, 1]".into()));
    }
    centering.validate(params)?;
    let center = centering.center();
    let mut acc = vec![0u128; horizon + 1];
    let mut taken = 0u64;
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let upto = ((n_copies as f64) * t).floor() as u64;
        if upto > taken {
            let sampler = AggregateSampler::new(params, upto - taken);
            for (a, s) in acc.iter_mut().zip(sampler.path(burn_in, horizon, rng)) {
                *a += s;
            }
            taken = upto;
        }
        values.push(
            acc.iter()
                .map(|&s| (s as f64 - upto as f64 * center) / a_n)
                .collect(),
        );
    }
    Ok(AggregateSeries {
        t_grid: t_grid.to_vec(),
        values,
        scaling: a_n,
        centering,
    })
}

/// `n^{1/α} a_N` for `α ≠ 1`, `n log(n) a_N` for `α = 1`.
pub fn iterated_scaling(alpha: f64, n: u64, a_n: f64) -> f64 {
    let nf = n as f64;
    if alpha == 1.0 {
        nf * nf.ln() * a_n
    } else {
        nf.powf(1.0 / alpha) * a_n
    }
}

/// Centering admissible for the iterated limit in the regime of `α`.
pub fn check_iterated_regime(params: &ModelParams, centering: &CenteringMode) -> Result<()> {
    let a = params.alpha();
    let ok = match centering {
        CenteringMode::Truncated { .. } => a <= 1.0,
        CenteringMode::None => a < 1.0,
        CenteringMode::Mean { .. } => a > 1.0,
    };
    if !ok {
        return Err(Error::Centering(format!(
            "centering {} does not match the alpha = {a} regime (truncated or none below 1, truncated at 1, mean above 1)",
            centering.descriptor()
        )));
    }
    centering.validate(params)
}

/// One replication of `(n^{1/α} a_N)^{-1} Σ_{k=1}^{⌊nt⌋} Σ_{j=1}^N (X_k^{(j)} - center)`
/// (scaling `n log n a_N` at `α = 1`), drawn from stream `replication` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn iterated_aggregate(
    params: &ModelParams,
    n_copies: u64,
    n: u64,
    t_grid: &[f64],
    a_n: f64,
    centering: CenteringMode,
    seed: u64,
    replication: u64,
) -> Result<AggregateSeries> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("time scale n must be >= 2, got {n}")));
    }
    if n_copies == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    check_grid(t_grid)?;
    check_iterated_regime(params, &centering)?;
    let scaling = iterated_scaling(params.alpha(), n, a_n);
    let t_max = t_grid.last().copied().unwrap_or(0.0);
    let horizon = ((n as f64) * t_max).floor() as usize;
    let sampler = AggregateSampler::new(params, n_copies);
    let mut rng = stream(seed, "iterated", replication);
    // S_0 is stationary; the sum starts at k = 1.
    let path = sampler.path(auto_burn_in(params.m_xi()), horizon, &mut rng);
    let center = centering.center() * n_copies as f64;
    let mut values = Vec::with_capacity(t_grid.len());
    let mut acc = 0u128;
    let mut k = 0usize;
    for &t in t_grid {
        let upto = ((n as f64) * t).floor() as usize;
        while k < upto {
            k += 1;
            acc += path[k];
        }
        values.push(vec![(acc as f64 - upto as f64 * center) / scaling]);
    }
    Ok(AggregateSeries {
        t_grid: t_grid.to_vec(),
        values,
        scaling,
        centering,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_ensemble, SimConfig};

    fn p(m: f64, a: f64) -> ModelParams {
        ModelParams::new(m, a).unwrap()
    }

    #[test]
    fn truncated_mean_examples() {
        assert_eq!(truncated_mean_estimate(&[1.0, 2.0, 100.0], 10.0).unwrap(), 1.0);
        assert_eq!(truncated_mean_estimate(&[1.0, 2.0, 3.0], 10.0).unwrap(), 2.0);
    }

    #[test]
    fn centering_rules() {
        assert!(CenteringMode::Mean { mu: 1.0 }.validate(&p(0.5, 1.0)).is_err());
        assert!(CenteringMode::Mean { mu: 1.0 }.validate(&p(0.5, 1.5)).is_ok());
        assert!(CenteringMode::Truncated { a: 0.0, c_hat: 1.0 }.validate(&p(0.5, 1.5)).is_err());
        let none = CenteringMode::None;
        assert!(check_iterated_regime(&p(0.5, 0.5), &none).is_ok());
        assert!(check_iterated_regime(&p(0.5, 1.0), &none).is_err());
        assert!(check_iterated_regime(&p(0.5, 1.5), &none).is_err());
        let tr = CenteringMode::Truncated { a: 10.0, c_hat: 1.0 };
        assert!(check_iterated_regime(&p(0.5, 1.0), &tr).is_ok());
        assert!(check_iterated_regime(&p(0.5, 1.5), &tr).is_err());
    }

    #[test]
    fn scaling_arithmetic() {
        assert_eq!(iterated_scaling(0.5, 100, 1e4), 1e8);
        let s = iterated_scaling(1.0, 1000, 2.0);
        assert!((s - 2000.0 * 1000f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn partial_sum_basics() {
        let params = p(0.5, 1.0);
        let ens = simulate_ensemble(&params, &SimConfig::new(1, 2, 3)).unwrap();
        let s = copy_partial_sums(&ens, &[0.0, 1.0], 1.0, CenteringMode::None).unwrap();
        assert_eq!(s.values[0], vec![0.0; 3]);
        let raw: Vec<f64> = ens.row(0).iter().map(|&v| v as f64).collect();
        assert_eq!(s.values[1], raw);
    }

    #[test]
    fn mean_minus_tail_is_below_mean() {
        let params = p(0.5, 1.5);
        let c = truncated_center(&params, 1e3, &[], CenterMethod::MeanMinusTail).unwrap();
        let mean = stationary_mean(&params).unwrap();
        assert!(c.value < mean && c.value > 0.0);
    }

    #[test]
    fn hybrid_tail_part_matches_direct_sum() {
        let params = p(0.5, 0.5);
        let direct: f64 = {
            let c = stationary_tail_constant(&params);
            let t = |y: u64| c * (y as f64 + 1.0).powf(-0.5);
            (101..=5000u64).map(|x| x as f64 * (t(x - 1) - t(x))).sum()
        };
        let closed = tail_first_moment(&params, 100, 5000);
        assert!((closed - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn iterated_is_reproducible() {
        let params = p(0.5, 0.5);
        let a = iterated_aggregate(&params, 100, 10, &[0.5, 1.0], 10.0, CenteringMode::None, 1, 0)
            .unwrap();
        let b = iterated_aggregate(&params, 100, 10, &[0.5, 1.0], 10.0, CenteringMode::None, 1, 0)
            .unwrap();
        assert_eq!(a, b);
        let c = iterated_aggregate(&params, 100, 10, &[0.5, 1.0], 10.0, CenteringMode::None, 1, 1)
            .unwrap();
        assert_ne!(a, c);
    }
}
