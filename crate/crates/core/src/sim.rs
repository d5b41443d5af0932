//! Simulation of the stationary Galton-Watson process with immigration.
//!
//! Offspring are Bernoulli(`m`), so the offspring sum of a population `x` is
//! one `Binomial(x, m)` draw. Independent copies own independent random
//! streams keyed by copy index.

use std::io::Write;
use std::ops::RangeInclusive;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::ModelParams;
use crate::error::{Error, Result};
use crate::heavy_tail::{imm_sample, ParetoIntLaw};
use crate::rng::{binomial_u128, binomial_u64, stream, uniform_open};

/// Default cap on stored ensemble entries (copies × generations).
pub const DEFAULT_MEMORY_CAP: usize = 1 << 27;

/// Rows above a threshold needed before a conditional law is reported.
pub const MIN_EXCEEDANCES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BurnIn {
    Auto,
    Fixed(u32),
}

/// `max{⌈log 1e-6 / log m⌉, 50}` for `m > 0`, one step for `m = 0`.
pub fn auto_burn_in(m_xi: f64) -> u32 {
    if m_xi == 0.0 {
        return 1;
    }
    let steps = ((1e-6f64).ln() / m_xi.ln()).ceil();
    (steps.min(u32::MAX as f64) as u32).max(50)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_copies: u64,
    /// Generations stored beyond index 0.
    pub horizon: usize,
    pub seed: u64,
    pub burn_in: BurnIn,
}

impl SimConfig {
    pub fn new(n_copies: u64, horizon: usize, seed: u64) -> Self {
        Self {
            n_copies,
            horizon,
            seed,
            burn_in: BurnIn::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_copies == 0 {
            return Err(Error::InvalidParams("n_copies must be at least 1".into()));
        }
        Ok(())
    }

    pub fn burn_in_steps(&self, params: &ModelParams) -> u32 {
        match self.burn_in {
            BurnIn::Auto => auto_burn_in(params.m_xi()),
            BurnIn::Fixed(b) => b,
        }
    }
}

/// One generation: `Binomial(x, m) + ε`, saturating at `u64::MAX`.
pub fn step<R: Rng + ?Sized>(x: u64, params: &ModelParams, law: &ParetoIntLaw, rng: &mut R) -> u64 {
    let survivors = binomial_u64(rng, x, params.m_xi());
    survivors.saturating_add(imm_sample(law, uniform_open(rng)))
}

/// Runs `burn_in` generations from the empty state.
pub fn init_stationary<R: Rng + ?Sized>(
    params: &ModelParams,
    burn_in: u32,
    rng: &mut R,
) -> u64 {
    let law = ParetoIntLaw::from(params);
    let mut x = 0;
    for _ in 0..burn_in {
        x = step(x, params, &law, rng);
    }
    x
}

/// `N` independent stationary paths, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    values: Vec<u64>,
    width: usize,
    pub params: ModelParams,
    pub config: SimConfig,
}

impl PathEnsemble {
    pub fn n_rows(&self) -> usize {
        self.values.len() / self.width
    }

    /// Number of stored generations (`horizon + 1`).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.values.chunks_exact(self.width)
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column_f64(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j] as f64).collect()
    }

    /// CSV with header `X0,...,Xh` and one row per copy.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (0..self.width).map(|j| format!("X{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Simulates `n_copies` independent stationary rows of `horizon + 1` generations.
pub fn simulate_ensemble(params: &ModelParams, config: &SimConfig) -> Result<PathEnsemble> {
    simulate_ensemble_capped(params, config, DEFAULT_MEMORY_CAP, "copy")
}

/// As [`simulate_ensemble`], with an explicit entry cap and stream domain.
pub fn simulate_ensemble_capped(
    params: &ModelParams,
    config: &SimConfig,
    cap: usize,
    domain: &str,
) -> Result<PathEnsemble> {
    config.validate()?;
    let width = config.horizon + 1;
    let entries = (config.n_copies as u128) * width as u128;
    if entries > cap as u128 {
        return Err(Error::Resource(format!(
            "ensemble of {} x {width} entries exceeds the cap of {cap}",
            config.n_copies
        )));
    }
    let law = ParetoIntLaw::from(params);
    let burn = config.burn_in_steps(params);
    let mut values = vec![0u64; entries as usize];
    values
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(i, row)| {
            let mut rng = stream(config.seed, domain, i as u64);
            let mut x = init_stationary(params, burn, &mut rng);
            row[0] = x;
            for slot in row.iter_mut().skip(1) {
                x = step(x, params, &law, &mut rng);
                *slot = x;
            }
        });
    Ok(PathEnsemble {
        values,
        width,
        params: *params,
        config: *config,
    })
}

/// Stationary draws of `X_0` alone.
pub fn stationary_sample(
    params: &ModelParams,
    n: u64,
    seed: u64,
    domain: &str,
) -> Result<Vec<u64>> {
    let config = SimConfig::new(n, 0, seed);
    Ok(simulate_ensemble_capped(params, &config, DEFAULT_MEMORY_CAP, domain)?.values)
}

/// Rows with `X_0 > x`, each divided by `x`.
pub fn conditional_tail_sample(ensemble: &PathEnsemble, x: f64) -> Result<Vec<Vec<f64>>> {
    if !(x > 0.0) {
        return Err(Error::InvalidParams(format!("threshold must be positive, got {x}")));
    }
    let rows: Vec<Vec<f64>> = ensemble
        .rows()
        .filter(|r| r[0] as f64 > x)
        .map(|r| r.iter().map(|v| *v as f64 / x).collect())
        .collect();
    if rows.len() < MIN_EXCEEDANCES {
        return Err(Error::InsufficientExceedances {
            found: rows.len(),
            needed: MIN_EXCEEDANCES,
        });
    }
    Ok(rows)
}

/// One draw of the tail process on a window of lags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProcessDraw {
    pub y0: f64,
    pub k: u64,
    pub ell_min: i64,
    /// `Y_ℓ` for `ℓ = ell_min, ell_min + 1, ...`.
    pub values: Vec<f64>,
}

impl TailProcessDraw {
    pub fn at(&self, ell: i64) -> Option<f64> {
        let idx = ell - self.ell_min;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied()
    }
}

/// `Y_0` Pareto(α) on `[1, ∞)`, `K` geometric with `P(K = k) = m^{αk}(1 - m^α)`,
/// `Y_ℓ = m^ℓ Y_0` forward and `m^ℓ Y_0 1{K ≥ -ℓ}` backward.
pub fn tail_process_draw<R: Rng + ?Sized>(
    params: &ModelParams,
    ell_range: RangeInclusive<i64>,
    rng: &mut R,
) -> TailProcessDraw {
    let alpha = params.alpha();
    let m = params.m_xi();
    let y0 = uniform_open(rng).powf(-1.0 / alpha);
    let q = params.m_pow_alpha();
    let k = if q == 0.0 {
        0
    } else {
        let g = (uniform_open(rng).ln() / q.ln()).floor();
        g.min(u64::MAX as f64) as u64
    };
    let (lo, hi) = (*ell_range.start(), *ell_range.end());
    let values = (lo..=hi)
        .map(|ell| {
            if ell == 0 {
                y0
            } else if m == 0.0 {
                0.0
            } else if ell > 0 {
                m.powi(ell as i32) * y0
            } else if k >= ell.unsigned_abs() {
                m.powi(ell as i32) * y0
            } else {
                0.0
            }
        })
        .collect();
    TailProcessDraw {
        y0,
        k,
        ell_min: lo,
        values,
    }
}

/// Sampler for the sum of `N` independent copies, which is itself a GWI
/// chain: `S_k = Binomial(S_{k-1}, m) + Σ_{j≤N} ε_j`.
///
/// The immigration sum is drawn exactly. Counts of the small values
/// `1..=cutoff` come from sequential conditional binomials; the few values
/// above the cutoff are drawn one by one from the conditional tail.
#[derive(Debug, Clone)]
pub struct AggregateSampler {
    params: ModelParams,
    n_copies: u64,
    cutoff: u64,
    /// `P(ε = v | ε ≥ v)` for `v = 1..=cutoff`.
    hazard: Vec<f64>,
}

impl AggregateSampler {
    pub fn new(params: &ModelParams, n_copies: u64) -> Self {
        let alpha = params.alpha();
        // Balance binomial setups against individual tail draws.
        let cutoff = (alpha * n_copies as f64 / 5.0)
            .powf(1.0 / (1.0 + alpha))
            .round()
            .clamp(1.0, 1e5) as u64;
        let hazard = (1..=cutoff)
            .map(|v| -(-alpha * (1.0 / v as f64).ln_1p()).exp_m1())
            .collect();
        Self {
            params: *params,
            n_copies,
            cutoff,
            hazard,
        }
    }

    pub fn n_copies(&self) -> u64 {
        self.n_copies
    }

    /// `Σ_{j≤N} ε_j`.
    pub fn immigration_sum<R: Rng + ?Sized>(&self, rng: &mut R) -> u128 {
        let mut remaining = self.n_copies;
        let mut sum: u128 = 0;
        for (i, &h) in self.hazard.iter().enumerate() {
            if remaining == 0 {
                return sum;
            }
            let c = binomial_u64(rng, remaining, h);
            sum += (i as u128 + 1) * c as u128;
            remaining -= c;
        }
        let base = (self.cutoff + 1) as f64;
        let inv = -1.0 / self.params.alpha();
        for _ in 0..remaining {
            // ⌊(K+1) U^{-1/α}⌋ has P(· ≥ k) = ((K+1)/k)^α for k ≥ K+1
            sum += (base * uniform_open(rng).powf(inv)).floor() as u128;
        }
        sum
    }

    pub fn step<R: Rng + ?Sized>(&self, s: u128, rng: &mut R) -> u128 {
        binomial_u128(rng, s, self.params.m_xi()) + self.immigration_sum(rng)
    }

    /// `S_0, ..., S_horizon` after `burn_in` generations from zero.
    pub fn path<R: Rng + ?Sized>(&self, burn_in: u32, horizon: usize, rng: &mut R) -> Vec<u128> {
        let mut s = 0u128;
        for _ in 0..burn_in {
            s = self.step(s, rng);
        }
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(s);
        for _ in 0..horizon {
            s = self.step(s, rng);
            out.push(s);
        }
        out
    }
}
