//! Closed-form limit objects of the contemporaneously aggregated process.
//!
//! Every characteristic function is assembled in log space: the exponent is
//! computed first (see the `log_*` functions) and exponentiated last, so the
//! modulus never underflows before the caller asks for it.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{
    integrate, integrate_from_origin, integrate_panels, oscillatory_power_tail, Integral,
    QuadratureConfig,
};

/// Characteristic-function values are plain complex numbers.
pub type ComplexCf = Complex64;

/// Distance from `alpha = 1` under which reports carry a domain warning.
pub const ALPHA_ONE_WARNING_BAND: f64 = 1e-6;

/// Offspring mean and immigration tail index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    m_xi: f64,
    alpha: f64,
}

#[derive(Deserialize)]
struct RawParams {
    m_xi: f64,
    alpha: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.m_xi, raw.alpha)
    }
}

impl ModelParams {
    pub fn new(m_xi: f64, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&m_xi) {
            return Err(Error::InvalidParams(format!(
                "offspring mean m_xi must lie in [0, 1), got {m_xi}"
            )));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParams(format!(
                "tail index alpha must lie in (0, 2), got {alpha}"
            )));
        }
        Ok(Self { m_xi, alpha })
    }

    pub fn m_xi(&self) -> f64 {
        self.m_xi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_alpha_one(&self) -> bool {
        self.alpha == 1.0
    }

    /// `alpha` is not exactly one but close enough that `alpha/(1-alpha)` blows up.
    pub fn near_alpha_one(&self) -> bool {
        self.alpha != 1.0 && (self.alpha - 1.0).abs() < ALPHA_ONE_WARNING_BAND
    }

    /// `m_xi^alpha`, with `0^alpha = 0`.
    pub fn m_pow_alpha(&self) -> f64 {
        self.m_xi.powf(self.alpha)
    }
}

/// The ray directions `v_0, ..., v_k` of the limit Lévy measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableBasis {
    pub k: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl StableBasis {
    pub fn dim(&self) -> usize {
        self.k + 1
    }
}

pub fn basis_vectors(k: usize, params: &ModelParams) -> StableBasis {
    let m = params.m_xi;
    let lead = (1.0 - params.m_pow_alpha()).powf(-1.0 / params.alpha);
    let vectors = (0..=k)
        .map(|j| {
            let scale = if j == 0 { lead } else { 1.0 };
            (0..=k)
                .map(|i| {
                    if i < j {
                        0.0
                    } else {
                        scale * m.powi((i - j) as i32)
                    }
                })
                .collect()
        })
        .collect();
    StableBasis { k, vectors }
}

/// `Γ(2-α) cos(πα/2) / (1-α)` for `α ≠ 1`, `π/2` at `α = 1`.
pub fn c_alpha(alpha: f64) -> f64 {
    if alpha == 1.0 {
        return FRAC_PI_2;
    }
    statrs::function::gamma::gamma(2.0 - alpha) * (PI * alpha / 2.0).cos() / (1.0 - alpha)
}

/// `(sin u - u)/u²`, with a series near the origin.
fn sin_minus_id_over_sq(u: f64) -> f64 {
    if u.abs() < 1e-2 {
        let u2 = u * u;
        u * (-1.0 / 6.0 + u2 * (1.0 / 120.0 - u2 / 5040.0))
    } else {
        (u.sin() - u) / (u * u)
    }
}

/// Numerical value of `∫_1^∞ u⁻² sin u du + ∫_0^1 u⁻² (sin u - u) du`.
pub fn constant_c(quad: &QuadratureConfig) -> Result<f64> {
    let parts = constant_c_parts(quad)?;
    Ok(parts.0 + parts.1)
}

/// The two integrals making up [`constant_c`], outer range first.
pub fn constant_c_parts(quad: &QuadratureConfig) -> Result<(f64, f64)> {
    quad.validate()?;
    let upper = quad.upper_cutoff;
    let mut pts = vec![1.0];
    let mut x = 1.0;
    while x < upper {
        x = (x + PI).min(upper);
        pts.push(x);
    }
    let body = integrate_panels(|u| Complex64::new(u.sin() / (u * u), 0.0), &pts, quad)?;
    let (tail, bound) = oscillatory_power_tail(1.0, 2.0, upper);
    let outer = body.value.re + tail.im;
    let inner = integrate(
        |u| Complex64::new(sin_minus_id_over_sq(u), 0.0),
        0.0,
        1.0,
        quad,
    )?;
    if body.error + bound + inner.error > 1e3 * quad.abs_tol.max(quad.rel_tol) {
        return Err(Error::QuadratureNotConverged {
            estimate: outer + inner.value.re,
            error: body.error + bound + inner.error,
            subdivisions: body.subdivisions + inner.subdivisions,
        });
    }
    Ok((outer, inner.value.re))
}

/// The constant entering the `α = 1` characteristic functions, computed once
/// by quadrature with the default configuration.
pub fn constant_c_default() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        constant_c(&QuadratureConfig::default()).expect("default quadrature for C converges")
    })
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x log x` with `0 log 0 = 0`.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

/// `-C_α |s|^α (1 - i tan(πα/2) sign s)` for `α ≠ 1`: the Lévy exponent of one
/// ray with unit intensity `α u^{-1-α} du` under full (`α > 1`) or no (`α < 1`)
/// compensation.
fn stable_ray_exponent(s: f64, alpha: f64) -> Complex64 {
    if s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mag = c_alpha(alpha) * s.abs().powf(alpha);
    let tan = (PI * alpha / 2.0).tan();
    Complex64::new(-mag, mag * tan * sign(s))
}

/// `-C_1 |s| (1 + i (2/π) sign(s) log|s|)`.
fn cauchy_ray_exponent(s: f64) -> Complex64 {
    if s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let c1 = FRAC_PI_2;
    Complex64::new(-c1 * s.abs(), -c1 * FRAC_2_PI * xlogx(s))
}

fn check_theta(theta: &[f64]) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::InvalidParams("theta must have length k+1 >= 1".into()));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParams("theta must be finite".into()));
    }
    Ok(())
}

/// Log of the characteristic function of the limit law at time one,
/// horizon `k = theta.len() - 1`.
pub fn log_cf_mu(theta: &[f64], params: &ModelParams) -> Result<Complex64> {
    check_theta(theta)?;
    let basis = basis_vectors(theta.len() - 1, params);
    let alpha = params.alpha;
    let weight = 1.0 - params.m_pow_alpha();
    let total: f64 = theta.iter().sum();
    if params.is_alpha_one() {
        let mut expo = Complex64::new(0.0, constant_c_default() * total);
        let mut logs = 0.0;
        for v in &basis.vectors {
            expo += cauchy_ray_exponent(dot(theta, v)) * weight;
            logs += theta.iter().zip(v).map(|(t, x)| t * xlogx(*x)).sum::<f64>();
        }
        expo += Complex64::new(0.0, weight * logs);
        Ok(expo)
    } else {
        let mut expo = Complex64::new(0.0, -alpha / (1.0 - alpha) * total);
        for v in &basis.vectors {
            expo += stable_ray_exponent(dot(theta, v), alpha) * weight;
        }
        Ok(expo)
    }
}

pub fn cf_mu(theta: &[f64], params: &ModelParams) -> Result<ComplexCf> {
    Ok(log_cf_mu(theta, params)?.exp())
}

/// `e^{ix} - 1 - ix`, accurate for small `x`.
fn expm1_i_minus_linear(x: f64) -> Complex64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        Complex64::new(-x2 / 2.0 + x2 * x2 / 24.0, -x2 * x / 6.0 + x2 * x2 * x / 120.0)
    } else {
        let h = (0.5 * x).sin();
        Complex64::new(-2.0 * h * h, x.sin() - x)
    }
}

/// `e^{ix} - 1`, accurate for small `x`.
fn expm1_i(x: f64) -> Complex64 {
    let h = (0.5 * x).sin();
    Complex64::new(-2.0 * h * h, x.sin())
}

/// Lévy integral along one ray `u v` with the coordinatewise `(0,1]`
/// compensator:
/// `∫_0^∞ (e^{i<θ,v>u} - 1 - i u Σ_ℓ θ_ℓ v_ℓ 1{u v_ℓ ≤ 1}) α u^{-1-α} du`.
pub fn ray_levy_integral(
    theta: &[f64],
    v: &[f64],
    alpha: f64,
    quad: &QuadratureConfig,
) -> Result<Integral> {
    let s = dot(theta, v);
    // (breakpoint 1/v_ℓ, weight θ_ℓ v_ℓ)
    let mut comp: Vec<(f64, f64)> = theta
        .iter()
        .zip(v)
        .filter(|(_, &x)| x > 0.0)
        .map(|(t, x)| (1.0 / x, t * x))
        .collect();
    comp.sort_by(|a, b| a.0.total_cmp(&b.0));
    let max_b = comp.last().map_or(0.0, |c| c.0);
    let min_b = comp.first().map_or(f64::INFINITY, |c| c.0);

    let integrand = |u: f64| -> Complex64 {
        let mut drift = 0.0;
        for &(b, w) in &comp {
            if u > b {
                drift += w;
            }
        }
        (expm1_i_minus_linear(s * u) + Complex64::new(0.0, u * drift))
            * (alpha * u.powf(-1.0 - alpha))
    };

    let mut upper = quad.upper_cutoff.max(2.0 * max_b);
    if s != 0.0 {
        upper = upper.max(60.0 / s.abs());
    }

    let mut origin_end = min_b.min(1.0).min(upper);
    if s != 0.0 {
        origin_end = origin_end.min(1.0 / s.abs());
    }
    let mut pts = vec![origin_end];
    for &(b, _) in &comp {
        if b > origin_end && b < upper {
            pts.push(b);
        }
    }
    let mut g = origin_end;
    while g < upper {
        g *= 2.0;
        pts.push(g.min(upper));
    }
    if s != 0.0 {
        let step = PI / s.abs();
        let mut x = origin_end + step;
        while x < upper {
            pts.push(x);
            x += step;
        }
    }
    pts.push(upper);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();

    let head = integrate_from_origin(integrand, origin_end, 1.0 - alpha, quad)?;
    let body = integrate_panels(integrand, &pts, quad)?;
    // Beyond `upper` every compensator is switched off.
    let mut tail = Complex64::new(0.0, 0.0);
    let mut tail_err = 0.0;
    if s != 0.0 {
        tail -= upper.powf(-alpha);
        let (osc, bound) = oscillatory_power_tail(s, 1.0 + alpha, upper);
        tail += osc * alpha;
        tail_err = alpha * bound;
    }
    let mut out = head + body;
    out.value += tail;
    out.error += tail_err;
    Ok(out)
}

/// Log characteristic function of the limit law by direct quadrature of the
/// compensated Lévy integral along each ray.
pub fn log_cf_mu_integral(
    theta: &[f64],
    params: &ModelParams,
    quad: &QuadratureConfig,
) -> Result<Integral> {
    check_theta(theta)?;
    quad.validate()?;
    let basis = basis_vectors(theta.len() - 1, params);
    let weight = 1.0 - params.m_pow_alpha();
    let mut acc = Integral::zero();
    for v in &basis.vectors {
        let r = ray_levy_integral(theta, v, params.alpha, quad)?;
        acc = acc + r;
    }
    acc.value *= weight;
    acc.error *= weight;
    Ok(acc)
}

pub fn cf_mu_integral(
    theta: &[f64],
    params: &ModelParams,
    quad: &QuadratureConfig,
) -> Result<ComplexCf> {
    Ok(log_cf_mu_integral(theta, params, quad)?.value.exp())
}

fn require_alpha_not_one(params: &ModelParams, what: &str) -> Result<()> {
    if params.is_alpha_one() {
        return Err(Error::Domain(format!("{what} is not defined for alpha = 1")));
    }
    Ok(())
}

/// Log characteristic function of the limit law shifted by `α/(1-α)` per
/// coordinate; strictly stable.
pub fn log_cf_shifted_mu(theta: &[f64], params: &ModelParams) -> Result<Complex64> {
    check_theta(theta)?;
    require_alpha_not_one(params, "the shifted limit law")?;
    let basis = basis_vectors(theta.len() - 1, params);
    let weight = 1.0 - params.m_pow_alpha();
    Ok(basis
        .vectors
        .iter()
        .map(|v| stable_ray_exponent(dot(theta, v), params.alpha) * weight)
        .sum())
}

pub fn cf_shifted_mu(theta: &[f64], params: &ModelParams) -> Result<ComplexCf> {
    Ok(log_cf_shifted_mu(theta, params)?.exp())
}

/// Lévy measure of `{x : ‖x‖ > r}`, as `r^{-α} (1-m^α) Σ_j ‖v_j‖^α`.
pub fn levy_mass_above(k: usize, params: &ModelParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParams(format!("radius must be positive, got {r}")));
    }
    let basis = basis_vectors(k, params);
    let alpha = params.alpha;
    let sum: f64 = basis
        .vectors
        .iter()
        .map(|v| dot(v, v).sqrt().powf(alpha))
        .sum();
    Ok(r.powf(-alpha) * (1.0 - params.m_pow_alpha()) * sum)
}

/// Mass of the Lévy measure outside the unit ball, by the geometric-series
/// closed form (no basis vectors involved).
pub fn unit_exterior_mass_closed_form(k: usize, params: &ModelParams) -> f64 {
    let (m, a) = (params.m_xi, params.alpha);
    let ma = params.m_pow_alpha();
    let m2 = m * m;
    let head = (1.0 - m2.powi(k as i32 + 1)).powf(a / 2.0) / (1.0 - ma);
    let rest: f64 = (1..=k)
        .map(|j| (1.0 - m2.powi((k - j + 1) as i32)).powf(a / 2.0))
        .sum();
    (1.0 - ma) / (1.0 - m2).powf(a / 2.0) * (head + rest)
}

/// Limit of `P(X_0 + ... + X_k > x) / P(X_0 > x)`.
pub fn sum_tail_ratio(k: usize, params: &ModelParams) -> f64 {
    let (m, a) = (params.m_xi, params.alpha);
    let ma = params.m_pow_alpha();
    let head = (1.0 - m.powi(k as i32 + 1)).powf(a) / (1.0 - ma);
    let rest: f64 = (1..=k)
        .map(|j| (1.0 - m.powi((k - j + 1) as i32)).powf(a))
        .sum();
    (1.0 - ma) / (1.0 - m).powf(a) * (head + rest)
}

/// Limit of `π((x,∞)) / P(ε > x)`.
pub fn stationary_tail_constant(params: &ModelParams) -> f64 {
    1.0 / (1.0 - params.m_pow_alpha())
}

/// `(1-m^α)/(1-m)^α`, the Lévy intensity factor of the temporal limit.
pub fn z_coefficient(params: &ModelParams) -> f64 {
    (1.0 - params.m_pow_alpha()) / (1.0 - params.m_xi).powf(params.alpha)
}

/// Drift `b_α` of the temporal limit at time one.
pub fn b_alpha(params: &ModelParams) -> Result<f64> {
    require_alpha_not_one(params, "b_alpha")?;
    let a = params.alpha;
    Ok((z_coefficient(params) - 1.0) * a / (1.0 - a))
}

pub fn log_cf_z(theta: f64, params: &ModelParams, shifted: bool) -> Result<Complex64> {
    require_alpha_not_one(params, "the temporal limit characteristic function")?;
    if !theta.is_finite() {
        return Err(Error::InvalidParams("theta must be finite".into()));
    }
    let a = params.alpha;
    let coef = z_coefficient(params);
    let stable = stable_ray_exponent(theta, a) * coef;
    if shifted {
        Ok(stable)
    } else {
        // (0,1]-compensated Lévy integral adds -i coef α/(1-α) θ.
        let drift = b_alpha(params)? - coef * a / (1.0 - a);
        Ok(stable + Complex64::new(0.0, drift * theta))
    }
}

pub fn cf_z(theta: f64, params: &ModelParams, shifted: bool) -> Result<ComplexCf> {
    Ok(log_cf_z(theta, params, shifted)?.exp())
}

/// The characteristic function built from the forward spectral tail process
/// `Θ_ℓ = m^ℓ`:
/// `exp{-∫_0^∞ (e^{iuθΣ_{ℓ≥1}Θ_ℓ} - e^{iuθΣ_{ℓ≥0}Θ_ℓ} + κ(u)) α u^{-α-1} du}`.
///
/// For `α < 1` the compensator `κ` is zero. For `α ∈ (1,2)` the bracket is not
/// integrable at the origin, and `κ(u) = iuθ 1{u ≤ 1}` is the truncated
/// compensator that makes it finite. Each Lévy integral is evaluated in
/// closed form.
pub fn spectral_tail_cf(theta: f64, params: &ModelParams) -> Result<ComplexCf> {
    require_alpha_not_one(params, "the spectral-tail characteristic function")?;
    let (m, a) = (params.m_xi, params.alpha);
    let forward = theta * m / (1.0 - m);
    let full = theta / (1.0 - m);
    // α∫(e^{ixu} - 1 [- ixu]) u^{-1-α} du has the same closed form for both regimes.
    let mut inner = stable_ray_exponent(forward, a) - stable_ray_exponent(full, a);
    if a > 1.0 {
        // (e^{iub}-1-iub) - (e^{iuc}-1-iuc) + iu(b - c) + iuθ1{u≤1}, with c - b = θ,
        // leaves -iuθ 1{u > 1} outside the two compensated integrals.
        inner += Complex64::new(0.0, -theta * a / (a - 1.0));
    }
    Ok((-inner).exp())
}

/// Spectral representation of the shifted temporal limit; valid for `α < 1`.
pub fn cf_z_spectral(theta: f64, params: &ModelParams) -> Result<ComplexCf> {
    if params.alpha >= 1.0 {
        return Err(Error::Domain(
            "the spectral-tail representation holds only for alpha in (0,1)".into(),
        ));
    }
    spectral_tail_cf(theta, params)
}

/// Log characteristic function of the innovations `Y_k - m Y_{k-1}` of the
/// stationary AR(1) limit.
///
/// The drift carries the factor `1 - m`: the innovation pairs with the
/// direction `(-m, 1)`, whose coordinate sum is `1 - m`, so this is the only
/// drift for which the joint law factorizes into past times innovation.
pub fn log_innovation_cf(theta: f64, params: &ModelParams) -> Complex64 {
    let (m, a) = (params.m_xi, params.alpha);
    if params.is_alpha_one() {
        let c = constant_c_default();
        cauchy_ray_exponent(theta) * (1.0 - m)
            + Complex64::new(0.0, theta * (c * (1.0 - m) + xlogx(m)))
    } else {
        stable_ray_exponent(theta, a) * (1.0 - params.m_pow_alpha())
            + Complex64::new(0.0, -a * (1.0 - m) / (1.0 - a) * theta)
    }
}

pub fn innovation_cf(theta: f64, params: &ModelParams) -> ComplexCf {
    log_innovation_cf(theta, params).exp()
}

/// Every closed-form target used by the verification harness is a genuine
/// characteristic function on the given grid: `cf(0) = 1`, `|cf| ≤ 1`,
/// `cf(-θ) = conj cf(θ)`.
pub fn hermitian_target_ok<F>(grid: &[Vec<f64>], cf: F) -> bool
where
    F: Fn(&[f64]) -> Result<Complex64>,
{
    grid.iter().all(|theta| {
        let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
        match (cf(theta), cf(&neg)) {
            (Ok(a), Ok(b)) => {
                let zero = theta.iter().all(|t| *t == 0.0);
                a.norm() <= 1.0 + 1e-12
                    && (a - b.conj()).norm() <= 1e-12
                    && (!zero || (a - Complex64::new(1.0, 0.0)).norm() <= 1e-12)
            }
            _ => false,
        }
    })
}

/// Lévy exponent of one ray with intensity `α u^{-1-α} du`: `-C_α|s|^α(1 - i tan(πα/2) sign s)`
/// for `α ≠ 1`, and the `α = 1` form without drift.
pub fn stable_exponent(s: f64, alpha: f64) -> Complex64 {
    if alpha == 1.0 {
        cauchy_ray_exponent(s)
    } else {
        stable_ray_exponent(s, alpha)
    }
}

/// `α∫_0^∞ (e^{isu} - 1) u^{-1-α} du` by quadrature, `α ∈ (0,1)`; used to
/// cross-check the spectral representation.
pub fn plain_levy_integral(s: f64, alpha: f64, quad: &QuadratureConfig) -> Result<Integral> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("plain Lévy integral needs alpha in (0,1)".into()));
    }
    let f = |u: f64| expm1_i(s * u) * (alpha * u.powf(-1.0 - alpha));
    let upper = quad.upper_cutoff.max(if s != 0.0 { 60.0 / s.abs() } else { 0.0 });
    let origin_end = if s != 0.0 { (1.0 / s.abs()).min(1.0) } else { 1.0 };
    let head = integrate_from_origin(f, origin_end, -alpha, quad)?;
    let mut pts = vec![origin_end];
    if s != 0.0 {
        let step = PI / s.abs();
        let mut x = origin_end + step;
        while x < upper {
            pts.push(x);
            x += step;
        }
    }
    pts.push(upper);
    let body = integrate_panels(f, &pts, quad)?;
    let mut out = head + body;
    out.value -= upper.powf(-alpha);
    if s != 0.0 {
        let (osc, bound) = oscillatory_power_tail(s, 1.0 + alpha, upper);
        out.value += osc * alpha;
        out.error += alpha * bound;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(m: f64, a: f64) -> ModelParams {
        ModelParams::new(m, a).unwrap()
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(ModelParams::new(1.0, 0.5).is_err());
        assert!(ModelParams::new(-0.1, 0.5).is_err());
        assert!(ModelParams::new(0.5, 0.0).is_err());
        assert!(ModelParams::new(0.5, 2.0).is_err());
        assert!(ModelParams::new(0.0, 1.999).is_ok());
        assert!(serde_json::from_str::<ModelParams>(r#"{"m_xi":1.5,"alpha":1.0}"#).is_err());
    }

    #[test]
    fn basis_examples() {
        let b = basis_vectors(1, &p(0.0, 0.7));
        assert_eq!(b.vectors, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let b = basis_vectors(1, &p(0.5, 1.0));
        assert_eq!(b.vectors, vec![vec![2.0, 1.0], vec![0.0, 1.0]]);
        let b = basis_vectors(2, &p(0.5, 1.0));
        assert_eq!(
            b.vectors,
            vec![vec![2.0, 1.0, 0.5], vec![0.0, 1.0, 0.5], vec![0.0, 0.0, 1.0]]
        );
    }

    #[test]
    fn basis_is_triangular_with_unit_diagonal_after_lead() {
        let b = basis_vectors(4, &p(0.3, 1.4));
        for (j, v) in b.vectors.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                if i < j {
                    assert_eq!(*x, 0.0);
                }
            }
            if j > 0 {
                assert_eq!(v[j], 1.0);
            }
            assert!(v[j] > 0.0);
        }
    }

    #[test]
    fn c_alpha_values() {
        assert_abs_diff_eq!(c_alpha(1.0), 1.570_796_326_794_896_6, epsilon = 1e-15);
        assert_abs_diff_eq!(c_alpha(0.5), 1.253_314_137_315_500_3, epsilon = 1e-9);
        assert_abs_diff_eq!(c_alpha(1.5), 2.506_628_274_631_000_5, epsilon = 1e-9);
        for a in [0.1, 0.5, 0.9, 0.999, 1.001, 1.3, 1.9] {
            assert!(c_alpha(a) > 0.0, "C_{a} must be positive");
        }
    }

    #[test]
    fn constant_c_signs_and_range() {
        let (outer, inner) = constant_c_parts(&QuadratureConfig::default()).unwrap();
        assert!(outer > 0.0);
        assert!(inner < 0.0);
        let c = outer + inner;
        assert!(c > 0.0 && c < 1.0);
    }

    #[test]
    fn constant_c_cutoff_insensitive() {
        let lo = constant_c(&QuadratureConfig {
            upper_cutoff: 1e3,
            ..Default::default()
        })
        .unwrap();
        let hi = constant_c(&QuadratureConfig {
            upper_cutoff: 1e6,
            ..Default::default()
        })
        .unwrap();
        assert!((lo - hi).abs() < 1e-3);
    }

    #[test]
    fn cf_mu_at_origin_is_one() {
        for a in [0.5, 1.0, 1.5] {
            let v = cf_mu(&[0.0, 0.0, 0.0], &p(0.4, a)).unwrap();
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn marginal_does_not_depend_on_offspring_mean() {
        for a in [0.5, 1.0, 1.5] {
            let x = cf_mu(&[1.0], &p(0.0, a)).unwrap();
            let y = cf_mu(&[1.0], &p(0.7, a)).unwrap();
            assert!((x - y).norm() < 1e-12, "alpha {a}: {x} vs {y}");
        }
    }

    #[test]
    fn marginal_value_alpha_half() {
        let v = cf_mu(&[1.0], &p(0.0, 0.5)).unwrap();
        let expected =
            (Complex64::new(-c_alpha(0.5), c_alpha(0.5)) - Complex64::new(0.0, 1.0)).exp();
        assert!((v - expected).norm() < 1e-14);
        assert_abs_diff_eq!(v.re, 0.2764, epsilon = 5e-5);
        assert_abs_diff_eq!(v.im, 0.0716, epsilon = 5e-5);
    }

    #[test]
    fn shifted_relation_and_domain() {
        let params = p(0.5, 0.5);
        let th = [0.3, -1.2];
        let lhs = cf_shifted_mu(&th, &params).unwrap();
        let rhs = cf_mu(&th, &params).unwrap()
            * Complex64::new(0.0, 0.5 / 0.5 * (0.3 - 1.2)).exp();
        assert!((lhs - rhs).norm() < 1e-14);
        assert!(matches!(
            cf_shifted_mu(&th, &p(0.5, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn levy_mass_examples() {
        assert_abs_diff_eq!(levy_mass_above(1, &p(0.0, 0.8), 1.0).unwrap(), 2.0, epsilon = 1e-14);
        let golden = levy_mass_above(1, &p(0.5, 1.0), 1.0).unwrap();
        assert_abs_diff_eq!(golden, 1.618_034, epsilon = 1e-6);
        assert_abs_diff_eq!(
            unit_exterior_mass_closed_form(1, &p(0.5, 1.0)),
            golden,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(levy_mass_above(1, &p(0.0, 1.0), 2.0).unwrap(), 1.0, epsilon = 1e-14);
        assert!(levy_mass_above(1, &p(0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn tail_constants() {
        assert_abs_diff_eq!(sum_tail_ratio(0, &p(0.3, 1.2)), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sum_tail_ratio(1, &p(0.0, 0.7)), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sum_tail_ratio(1, &p(0.5, 1.0)), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(stationary_tail_constant(&p(0.0, 1.3)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(stationary_tail_constant(&p(0.5, 1.0)), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(stationary_tail_constant(&p(0.5, 0.5)), 3.414_214, epsilon = 1e-6);
    }

    #[test]
    fn z_constants() {
        let params = p(0.5, 0.5);
        assert_abs_diff_eq!(z_coefficient(&params), 0.414_214, epsilon = 1e-6);
        assert_abs_diff_eq!(b_alpha(&params).unwrap(), -0.585_786, epsilon = 1e-6);
        let zero = p(0.0, 0.5);
        assert_eq!(b_alpha(&zero).unwrap(), 0.0);
        let a = cf_z(0.8, &zero, true).unwrap();
        let b = cf_shifted_mu(&[0.8], &zero).unwrap();
        assert!((a - b).norm() < 1e-14);
        assert!(cf_z(0.8, &p(0.5, 1.0), true).is_err());
        assert_eq!(cf_z(0.0, &params, false).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn unshifted_z_differs_by_the_shift() {
        for a in [0.5, 1.5] {
            let params = p(0.3, a);
            let th = -0.7;
            let s = cf_z(th, &params, true).unwrap();
            let u = cf_z(th, &params, false).unwrap();
            let shift = Complex64::new(0.0, a / (1.0 - a) * th).exp();
            assert!((u * shift - s).norm() < 1e-14);
        }
    }

    #[test]
    fn spectral_matches_shifted_z_below_one() {
        let params = p(0.5, 0.5);
        let a = cf_z_spectral(1.0, &params).unwrap();
        let b = cf_z(1.0, &params, true).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert!(matches!(cf_z_spectral(1.0, &p(0.5, 1.5)), Err(Error::Domain(_))));
        assert_eq!(cf_z_spectral(0.0, &params).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn spectral_expression_fails_above_one() {
        let params = p(0.5, 1.5);
        let a = spectral_tail_cf(1.0, &params).unwrap();
        let b = cf_z(1.0, &params, true).unwrap();
        assert!((a - b).norm() > 1e-3, "gap {}", (a - b).norm());
    }

    #[test]
    fn innovation_at_alpha_one_matches_marginal_when_m_zero() {
        let params = p(0.0, 1.0);
        for th in [-2.0, -0.3, 0.0, 0.5, 1.7] {
            let a = innovation_cf(th, &params);
            let b = cf_mu(&[th], &params).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn innovation_factorization_example() {
        let params = p(0.5, 0.5);
        let theta2 = [0.3, -0.7 - 0.5 * 1.1, 1.1];
        let lhs = cf_mu(&theta2, &params).unwrap();
        let rhs = cf_mu(&[0.3, -0.7], &params).unwrap() * innovation_cf(1.1, &params);
        assert!((lhs - rhs).norm() < 1e-14, "{lhs} vs {rhs}");
    }

    #[test]
    fn hermitian_check_detects_bad_targets() {
        let grid = vec![vec![0.5], vec![0.0]];
        assert!(hermitian_target_ok(&grid, |t| cf_mu(t, &p(0.2, 0.5))));
        assert!(!hermitian_target_ok(&grid, |t| Ok(Complex64::new(1.0, t[0]))));
    }
}
