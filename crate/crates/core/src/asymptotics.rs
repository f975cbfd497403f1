//! Behaviour at the thresholds: the quadratic model of `w₁(0̄, ·)`, the
//! square-root expansion of `Δ_{μ₀}` and the resonance function.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::determinant::Fiber;
use crate::error::{Error, Result};
use crate::lattice::{w1, Channel, SpectralParams, TorusPoint};
use crate::quadrature::{
    integrate_tensor_masked, integrate_tensor_patch_shell, integrate_tensor_with_singularity, SingularityHint,
    TensorIntegrand, TorusRule,
};
use crate::spectral::{threshold_integral, BandEnd, CriticalCouplings};

/// Coefficient of the quadratic model `w₁(0̄, t) ≈ a|t|²`.
pub const QUADRATIC_COEFFICIENT: f64 = 0.625;

/// `32π² / (5√5)`: the threshold expansion prefactor per unit `μ²`.
pub fn expansion_constant() -> f64 {
    32.0 * PI * PI / (5.0 * 5f64.sqrt())
}

/// Roughly uniform unit vectors (Fibonacci sphere).
fn sphere_points(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let u = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let s = (1.0 - u * u).sqrt();
            let phi = golden * i as f64;
            [s * phi.cos(), s * phi.sin(), u]
        })
        .collect()
}

fn ratio_at(r: f64, d: &[f64; 3]) -> f64 {
    let t = TorusPoint::from_canonical([r * d[0], r * d[1], r * d[2]]);
    w1(&TorusPoint::ZERO, &t) / (r * r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormLimit {
    /// Extrapolated `lim_{r→0} max_{|t|=r} w₁(0̄,t)/|t|²`.
    pub limit: f64,
    /// `(radius, max ratio, min ratio)` per radius.
    pub samples: Vec<(f64, f64, f64)>,
    /// Bounds `C₁|t|² ≤ w₁(0̄,t) ≤ C₂|t|²` observed on the largest ball.
    pub c1: f64,
    pub c2: f64,
}

/// Sphere-sampled ratio `w₁(0̄,t)/|t|²`, extrapolated in `r²` to `r = 0`
/// from the two smallest radii.
pub fn quadratic_form_limit(radii: &[f64]) -> Result<QuadraticFormLimit> {
    if radii.len() < 2 {
        return Err(Error::invalid("need at least two radii"));
    }
    if radii.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("radii must be decreasing and lie in (0, 1]"));
    }
    let dirs = sphere_points(2000);
    let samples: Vec<(f64, f64, f64)> = radii
        .iter()
        .map(|&r| {
            let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
            for d in &dirs {
                let q = ratio_at(r, d);
                hi = hi.max(q);
                lo = lo.min(q);
            }
            (r, hi, lo)
        })
        .collect();
    let n = samples.len();
    let (r1, m1, _) = samples[n - 2];
    let (r2, m2, _) = samples[n - 1];
    let limit = (r1 * r1 * m2 - r2 * r2 * m1) / (r1 * r1 - r2 * r2);

    let big = radii[0];
    let (mut c1, mut c2) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 1..=64 {
        let r = big * j as f64 / 64.0;
        for d in &dirs {
            let q = ratio_at(r, d);
            c1 = c1.min(q);
            c2 = c2.max(q);
        }
    }
    for &(_, hi, lo) in &samples {
        c1 = c1.min(lo);
        c2 = c2.max(hi);
    }
    Ok(QuadraticFormLimit { limit, samples, c1, c2 })
}

/// One evaluation of `Δ_{μ₀}` used in a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub k: [f64; 3],
    pub z: f64,
    pub determinant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub end: BandEnd,
    /// Log-log slope of `|Δ|` against the distance of `z` to the threshold.
    pub fitted_exponent: f64,
    /// `Δ/√(2|z − z_th|)` extrapolated to the threshold.
    pub fitted_prefactor: f64,
    /// `±32π²μ₀²/(5√5)`.
    pub reference_prefactor: f64,
    /// Log-log slope of `|Δ|` against `|k − k_th|` at `z = z_th`.
    pub k_exponent: f64,
    /// `Δ/|k − k_th|` at the threshold energy, extrapolated to `k = k_th`.
    pub k_prefactor: f64,
    /// `reference_prefactor·√(6/5)`.
    pub k_reference_prefactor: f64,
    /// Smallest `K` with `|Δ − P√(2|z − z_th|)| ≤ K|z − z_th|` on the probes.
    pub remainder_constant: f64,
    /// Largest deviation of the log-log fit.
    pub fit_residual: f64,
    pub sample_window: Vec<Probe>,
}

/// Least-squares line through `(x, y)`: `(intercept, slope, max |residual|)`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).abs()).fold(0.0, f64::max);
    (intercept, slope, resid)
}

/// Largest log-space deviation accepted in the exponent fits.
const MAX_FIT_RESIDUAL: f64 = 0.05;

/// Fits the square-root behaviour of `Δ_{μ₀}` (γ = 6) at `end`.
///
/// `z_probes` approach the threshold energy from outside the band and
/// `k_probes` approach the threshold point; `tol` is the quadrature
/// tolerance.
pub fn expansion_fit(end: BandEnd, z_probes: &[f64], k_probes: &[TorusPoint], tol: f64) -> Result<ExpansionFit> {
    let (k_th, z_th, sign) = (end.point(), end.energy(), match end {
        BandEnd::Lower => 1.0,
        BandEnd::Upper => -1.0,
    });
    if z_probes.len() < 2 || k_probes.len() < 2 {
        return Err(Error::invalid("need at least two z probes and two k probes"));
    }
    if let Some(z) = z_probes.iter().find(|&&z| !(sign * (z_th - z) > 0.0)) {
        return Err(Error::invalid(format!("z probe {z} is not on the outer side of {z_th}")));
    }
    if let Some(k) = k_probes.iter().find(|k| k.distance(&k_th) == 0.0) {
        return Err(Error::invalid(format!("k probe {:?} coincides with the threshold point", k.coords())));
    }
    let j0 = threshold_integral(tol)?;
    let mu0 = CriticalCouplings::from_threshold_integral(6.0, j0)?.mu_zero;
    let params = SpectralParams::new(6.0, mu0)?;
    let reference = sign * expansion_constant() * mu0 * mu0;
    let mut window = Vec::new();

    let fiber = Fiber::new(&k_th);
    let mut zeta = Vec::new();
    let mut dets = Vec::new();
    for &z in z_probes {
        let d = fiber.determinant(z, &params, tol)?.0;
        window.push(Probe { k: k_th.coords(), z, determinant: d });
        zeta.push((z - z_th).abs());
        dets.push(d);
    }
    let lx: Vec<f64> = zeta.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = dets.iter().map(|d| d.abs().ln()).collect();
    let (_, fitted_exponent, res_z) = line_fit(&lx, &ly);
    let sq: Vec<f64> = zeta.iter().map(|x| x.sqrt()).collect();
    let pre: Vec<f64> = zeta.iter().zip(&dets).map(|(x, d)| d / (2.0 * x).sqrt()).collect();
    let (fitted_prefactor, _, _) = line_fit(&sq, &pre);
    let remainder_constant = zeta
        .iter()
        .zip(&dets)
        .map(|(x, d)| (d - reference * (2.0 * x).sqrt()).abs() / x)
        .fold(0.0, f64::max);

    let mut dist = Vec::new();
    let mut kdets = Vec::new();
    for k in k_probes {
        let d = Fiber::new(k).determinant(z_th, &params, tol)?.0;
        window.push(Probe { k: k.coords(), z: z_th, determinant: d });
        dist.push(k.distance(&k_th));
        kdets.push(d);
    }
    let lkx: Vec<f64> = dist.iter().map(|x| x.ln()).collect();
    let lky: Vec<f64> = kdets.iter().map(|d| d.abs().ln()).collect();
    let (_, k_exponent, res_k) = line_fit(&lkx, &lky);
    let kpre: Vec<f64> = dist.iter().zip(&kdets).map(|(x, d)| d / x).collect();
    let (k_prefactor, _, _) = line_fit(&dist, &kpre);

    let fit_residual = res_z.max(res_k);
    if fit_residual > MAX_FIT_RESIDUAL || dets.iter().chain(&kdets).any(|d| sign * d <= 0.0) {
        return Err(Error::Accuracy {
            reason: format!(
                "probes outside the asymptotic window (exponents {fitted_exponent:.4}, {k_exponent:.4})"
            ),
            value: fit_residual,
            estimate: MAX_FIT_RESIDUAL,
        });
    }
    Ok(ExpansionFit {
        end,
        fitted_exponent,
        fitted_prefactor,
        reference_prefactor: reference,
        k_exponent,
        k_prefactor,
        k_reference_prefactor: reference * (1.2f64).sqrt(),
        remainder_constant,
        fit_residual,
        sample_window: window,
    })
}

/// `f₁(q) = −μ f₀ / (w₁(k_th, q) − z_th)`: the second component of the
/// threshold resonance at `end`.
#[derive(Clone, Copy, Debug)]
pub struct ResonanceFunction {
    pub end: BandEnd,
    pub f0: f64,
    pub mu: f64,
    channel: Channel,
}

impl ResonanceFunction {
    pub fn new(end: BandEnd, f0: f64, mu: f64) -> Result<Self> {
        if f0 == 0.0 || !f0.is_finite() {
            return Err(Error::invalid("f0 must be a nonzero finite constant"));
        }
        Ok(ResonanceFunction { end, f0, mu, channel: Channel::new(&end.point()) })
    }

    pub fn eval(&self, q: &TorusPoint) -> f64 {
        -self.mu * self.f0 / (self.channel.value(q) - self.end.energy())
    }
}

/// `|f₁|^power` assembled from per-axis distances to the threshold energy.
struct ResonancePower<'a> {
    f: &'a ResonanceFunction,
    squared: bool,
}

impl TensorIntegrand for ResonancePower<'_> {
    type Axis = f64;

    fn axis(&self, dim: usize, x: f64) -> f64 {
        let a = &self.f.channel.axes[dim];
        match self.f.end {
            BandEnd::Lower => a.value(x),
            BandEnd::Upper => a.deficit(x),
        }
    }

    fn combine(&self, a: &f64, b: &f64, c: &f64) -> f64 {
        let v = (self.f.mu * self.f.f0).abs() / (a + b + c);
        if self.squared {
            v * v
        } else {
            v
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceNorms {
    pub end: BandEnd,
    pub mu: f64,
    pub l1_value: f64,
    pub deltas: Vec<f64>,
    /// `∫_{T³ ∖ U_δ} |f₁|²` per δ.
    pub truncated_l2_values: Vec<f64>,
    /// Log-log slope of the truncated norms against `1/δ`.
    pub divergence_exponent: f64,
}

const RESONANCE_PATCH_RADIUS: f64 = 2.5;
/// Loosest tolerance used for the truncated norms, which only feed a slope.
const TRUNCATED_NORM_TOL: f64 = 1e-7;

/// `L₁` norm and truncated `L₂` norms of `f₁` (f₀ = 1, μ = μ₀).
///
/// The truncated norms are computed to `max(tol, 1e-7)`.
pub fn resonance_norms(end: BandEnd, deltas: &[f64], tol: f64) -> Result<ResonanceNorms> {
    if deltas.len() < 2 {
        return Err(Error::invalid("need at least two radii"));
    }
    if deltas.iter().any(|d| !(*d > 0.0 && *d <= 1.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("radii must be decreasing and lie in (0, 1]"));
    }
    let mu = CriticalCouplings::from_threshold_integral(6.0, threshold_integral(tol)?)?.mu_zero;
    let f = ResonanceFunction::new(end, 1.0, mu)?;
    let center = end.point();
    let rule = TorusRule::default();
    let hint = SingularityHint::new(center, QUADRATIC_COEFFICIENT)?;
    let l1 = integrate_tensor_with_singularity(
        &ResonancePower { f: &f, squared: false },
        &hint,
        RESONANCE_PATCH_RADIUS,
        tol,
        &rule,
    )?;
    let sq = ResonancePower { f: &f, squared: true };
    let l2_tol = tol.max(TRUNCATED_NORM_TOL);
    let outer = integrate_tensor_masked(&sq, &center, RESONANCE_PATCH_RADIUS, l2_tol, &rule)?;
    let mut truncated = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let shell = integrate_tensor_patch_shell(&sq, &center, d, RESONANCE_PATCH_RADIUS, l2_tol)?;
        truncated.push(outer.value + shell.value);
    }
    let x: Vec<f64> = deltas.iter().map(|d| (1.0 / d).ln()).collect();
    let y: Vec<f64> = truncated.iter().map(|v| v.ln()).collect();
    let (_, divergence_exponent, _) = line_fit(&x, &y);
    Ok(ResonanceNorms {
        end,
        mu,
        l1_value: l1.value,
        deltas: deltas.to_vec(),
        truncated_l2_values: truncated,
        divergence_exponent,
    })
}
