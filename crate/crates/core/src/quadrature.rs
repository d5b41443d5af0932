//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! The Lévy integrals handled here live on `(0, ∞)`, have an integrable
//! power singularity at the origin and oscillate at infinity. The finite
//! part is integrated adaptively (7-point Gauss / 15-point Kronrod pairs,
//! global bisection of the worst panel), the origin panel is smoothed by a
//! power substitution, and the oscillatory tail beyond the cutoff is
//! supplied by [`oscillatory_power_tail`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and truncation for numerical integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation point for integrals over `(0, ∞)`.
    pub upper_cutoff: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_subdivisions: 400_000,
            upper_cutoff: 1e3,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParams(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if !(self.upper_cutoff > 1.0) || !self.upper_cutoff.is_finite() {
            return Err(Error::InvalidParams(
                "quadrature upper_cutoff must be a finite value > 1".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParams(
                "max_subdivisions must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Value and error estimate of a numerical integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub subdivisions: usize,
}

impl std::ops::Add for Integral {
    type Output = Integral;
    fn add(self, rhs: Integral) -> Integral {
        Integral {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            subdivisions: self.subdivisions + rhs.subdivisions,
        }
    }
}

impl Integral {
    pub fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            subdivisions: 0,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, &x) in XGK[..7].iter().enumerate() {
        let dx = h * x;
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).norm();
    Panel { a, b, value, error }
}

/// Integrates `f` over `[points[0], points[last]]`, seeding the adaptive
/// scheme with one panel per consecutive pair of `points`.
pub fn integrate_panels<F: Fn(f64) -> Complex64>(
    f: F,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    cfg.validate()?;
    if points.len() < 2 {
        return Ok(Integral::zero());
    }
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let p = gk15(&f, w[0], w[1]);
            total += p.value;
            err += p.error;
            heap.push(p);
        }
    }
    let mut subdivisions = heap.len();
    // Panels too narrow to split further keep their error here.
    let mut frozen_err = 0.0;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.norm());
        if err <= tol {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-14 * mid.abs().max(1e-300)
        {
            frozen_err += worst.error;
            continue;
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::QuadratureNotConverged {
                estimate: total.re,
                error: err,
                subdivisions,
            });
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // Re-sum to shed accumulated rounding in the running totals.
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = frozen_err;
    for p in heap.iter() {
        value += p.value;
        error += p.error;
    }
    Ok(Integral {
        value,
        error,
        subdivisions,
    })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    integrate_panels(f, &[a, b], cfg)
}

/// Integrates `f` over `[0, b]` when `f(u) ~ u^order` near the origin
/// (`order > -1`). The substitution `u = b w^p` with `p = 2/(1 + order)`
/// turns the leading behaviour into `w^1`.
pub fn integrate_from_origin<F: Fn(f64) -> Complex64>(
    f: F,
    b: f64,
    order: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if !(order > -1.0) {
        return Err(Error::Domain(format!(
            "non-integrable origin behaviour u^{order}"
        )));
    }
    if b <= 0.0 {
        return Ok(Integral::zero());
    }
    let p = (2.0 / (1.0 + order)).max(1.0);
    let g = move |w: f64| {
        if w <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let u = b * w.powf(p);
        f(u) * (b * p * w.powf(p - 1.0))
    };
    integrate(g, 0.0, 1.0, cfg)
}

/// `∫_U^∞ e^{i s u} u^{-β} du` for `β > 0`, `s ≠ 0`, by the integration-by-parts
/// expansion `-e^{isU}/(is) Σ_n (β)_n (is)^{-n} U^{-β-n}`.
///
/// Returns the value and a bound on the truncation remainder. Accurate once
/// `|s| U` is a few dozen.
pub fn oscillatory_power_tail(s: f64, beta: f64, upper: f64) -> (Complex64, f64) {
    let is = Complex64::new(0.0, s);
    let lead = -Complex64::from_polar(1.0, s * upper) / is * upper.powf(-beta);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    let mut n = 0usize;
    loop {
        let mag = term.norm();
        if mag > last || n > 60 {
            break;
        }
        sum += term;
        last = mag;
        if mag < 1e-18 {
            break;
        }
        term = term * (beta + n as f64) / (is * upper);
        n += 1;
    }
    let value = lead * sum;
    // Remainder is bounded by the first omitted term (alternating-type
    // asymptotic series); use the last magnitude as a conservative bound.
    let remainder = lead.norm() * last;
    (value, remainder)
}
