//! Critical couplings, virtual levels, eigenvalues outside the band and the
//! regime classification at the two thresholds `(0̄; 0)` and `(π̄; 18)`.

use serde::{Deserialize, Serialize};

use crate::determinant::{Fiber, Side};
use crate::error::{Error, Result};
use crate::lattice::{torus_grid, SpectralParams, TorusPoint};

/// Default relative tolerance of torus integrals in spectral computations.
pub const DEFAULT_QUAD_TOL: f64 = 1e-7;
/// Default bound on `|Δ|` for virtual levels and root residuals.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;

/// Which threshold of the spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandEnd {
    /// `z = 0` at `k = 0̄`.
    Lower,
    /// `z = 18` at `k = π̄`.
    Upper,
}

impl BandEnd {
    pub fn point(self) -> TorusPoint {
        match self {
            BandEnd::Lower => TorusPoint::ZERO,
            BandEnd::Upper => TorusPoint::PI,
        }
    }

    pub fn energy(self) -> f64 {
        match self {
            BandEnd::Lower => 0.0,
            BandEnd::Upper => 18.0,
        }
    }

    pub fn side(self) -> Side {
        match self {
            BandEnd::Lower => Side::Below,
            BandEnd::Upper => Side::Above,
        }
    }
}

/// `J₀ = I(0̄; 0) = ∫ dt / w₁(0̄, t)`.
pub fn threshold_integral(tol: f64) -> Result<f64> {
    Ok(Fiber::new(&TorusPoint::ZERO).integral(0.0, tol)?.value)
}

/// The couplings at which virtual levels appear.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCouplings {
    pub gamma: f64,
    /// `√γ / √J₀`, defined for `γ > 0`.
    pub mu_left: Option<f64>,
    /// `√(12 − γ) / √J₀`, defined for `γ < 12`.
    pub mu_right: Option<f64>,
    /// `√6 / √J₀`.
    pub mu_zero: f64,
}

impl CriticalCouplings {
    /// Couplings for `γ` given `J₀`.
    pub fn from_threshold_integral(gamma: f64, j0: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be finite, got {gamma}")));
        }
        if !(j0 > 0.0 && j0.is_finite()) {
            return Err(Error::Internal(format!("threshold integral must be positive, got {j0}")));
        }
        let s = j0.sqrt();
        Ok(CriticalCouplings {
            gamma,
            mu_left: (gamma > 0.0).then(|| gamma.sqrt() / s),
            mu_right: (gamma < 12.0).then(|| (12.0 - gamma).sqrt() / s),
            mu_zero: 6f64.sqrt() / s,
        })
    }

    /// Critical coupling at `end`, if defined.
    pub fn at(&self, end: BandEnd) -> Option<f64> {
        match end {
            BandEnd::Lower => self.mu_left,
            BandEnd::Upper => self.mu_right,
        }
    }
}

pub fn critical_couplings(gamma: f64, tol: f64) -> Result<CriticalCouplings> {
    CriticalCouplings::from_threshold_integral(gamma, threshold_integral(tol)?)
}

/// `Δ_μ` at the threshold of `end`.
pub fn threshold_determinant(end: BandEnd, params: &SpectralParams, quad_tol: f64) -> Result<f64> {
    Ok(Fiber::new(&end.point()).determinant(end.energy(), params, quad_tol)?.0)
}

/// True iff `|Δ_μ|` at the threshold of `end` is at most `tol`.
///
/// The threshold integral itself is computed to [`DEFAULT_QUAD_TOL`] or
/// `tol`, whichever is tighter.
pub fn virtual_level_check(end: BandEnd, params: &SpectralParams, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    match end {
        BandEnd::Lower if params.gamma == 0.0 => {
            return Err(Error::invalid("virtual levels at z = 0 require γ ≠ 0"));
        }
        BandEnd::Upper if params.gamma == 12.0 => {
            return Err(Error::invalid("virtual levels at z = 18 require γ ≠ 12"));
        }
        _ => {}
    }
    let d = threshold_determinant(end, params, tol.min(DEFAULT_QUAD_TOL))?;
    Ok(d.abs() <= tol)
}

/// Knobs of [`find_eigenvalue_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    /// Relative tolerance of each determinant evaluation.
    pub quad_tol: f64,
    /// Required `|Δ|` at the reported root.
    pub residual_tol: f64,
    /// Edge probe offset relative to `max(1, |edge|)`.
    pub edge_offset: f64,
    /// Bracket width at which refinement may stop.
    pub interval_tol: f64,
    /// Bracket expansion gives up beyond `|z| = max_abs_z`.
    pub max_abs_z: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            quad_tol: DEFAULT_QUAD_TOL,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            edge_offset: 1e-8,
            interval_tol: 1e-10,
            max_abs_z: 1e6,
        }
    }
}

/// Outcome of an eigenvalue search on one side of the band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub side: Side,
    pub eigenvalue: Option<f64>,
    /// `|Δ|` at the reported root, or at the edge probe when there is none.
    pub residual: f64,
    /// Final bracket; both ends equal the edge probe when there is no root.
    pub bracket: (f64, f64),
    /// `Δ` at the edge probe. Its sign certifies absence of a root.
    pub edge_determinant: f64,
    pub evaluations: usize,
}

pub fn find_eigenvalue(k: &TorusPoint, params: &SpectralParams, side: Side, tol: f64) -> Result<EigenReport> {
    find_eigenvalue_with(k, params, side, &RootOptions { residual_tol: tol, ..RootOptions::default() })
}

/// Locates the zero of `z ↦ Δ_μ(k; z)` below or above the band.
///
/// `Δ` is strictly decreasing in `z` on each side, tends to `+∞` as
/// `z → −∞` and to `−∞` as `z → +∞`. Below the band a root exists iff
/// `Δ < 0` at the edge probe, above it iff `Δ > 0`. The root is bracketed by
/// doubling steps away from the edge and refined by false position
/// (Illinois variant) with bisection steps whenever the bracket fails to
/// shrink fast enough.
pub fn find_eigenvalue_with(
    k: &TorusPoint,
    params: &SpectralParams,
    side: Side,
    opts: &RootOptions,
) -> Result<EigenReport> {
    if !(opts.residual_tol > 0.0 && opts.quad_tol > 0.0 && opts.edge_offset > 0.0 && opts.interval_tol > 0.0) {
        return Err(Error::invalid(format!("invalid root options {opts:?}")));
    }
    let fiber = Fiber::new(k);
    let edges = fiber.edges();
    let mut evaluations = 0usize;
    let mut det = |z: f64| -> Result<f64> {
        evaluations += 1;
        Ok(fiber.determinant(z, params, opts.quad_tol)?.0)
    };
    // s = +1 below the band, −1 above: s·Δ > 0 far from the band.
    let (edge, s) = match side {
        Side::Below => (edges.bottom, 1.0),
        Side::Above => (edges.top, -1.0),
    };
    let eta = opts.edge_offset * edge.abs().max(1.0);
    let z_edge = edge - s * eta;
    let d_edge = det(z_edge)?;
    if s * d_edge >= 0.0 {
        let eigenvalue = (d_edge == 0.0).then_some(z_edge);
        return Ok(EigenReport {
            side,
            eigenvalue,
            residual: d_edge.abs(),
            bracket: (z_edge, z_edge),
            edge_determinant: d_edge,
            evaluations,
        });
    }

    // Expand away from the edge until s·Δ > 0.
    let (mut near, mut d_near) = (z_edge, d_edge);
    let mut step = 1.0;
    let (far, d_far) = loop {
        let z = edge - s * step;
        if z.abs() > opts.max_abs_z {
            return Err(Error::Internal(format!(
                "no sign change of the determinant up to z = {z} (k = {:?})",
                k.coords()
            )));
        }
        let d = det(z)?;
        if s * d > 0.0 {
            break (z, d);
        }
        if s * d == 0.0 {
            return Ok(EigenReport {
                side,
                eigenvalue: Some(z),
                residual: 0.0,
                bracket: (z, z),
                edge_determinant: d_edge,
                evaluations,
            });
        }
        near = z;
        d_near = d;
        step *= 2.0;
    };

    // Bracket [a, b] with Δ(a) > 0 > Δ(b) in increasing z.
    let (mut a, mut fa, mut b, mut fb) = if s > 0.0 { (far, d_far, near, d_near) } else { (near, d_near, far, d_far) };
    let mut last_side = 0i8;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for iter in 0..300 {
        if best.1.abs() <= opts.residual_tol && b - a <= opts.interval_tol {
            break;
        }
        let width = b - a;
        let mut z = if iter % 4 == 3 { 0.5 * (a + b) } else { b - fb * (b - a) / (fb - fa) };
        if !(z > a && z < b) {
            z = 0.5 * (a + b);
        }
        if z <= a || z >= b {
            break;
        }
        let fz = det(z)?;
        if fz.abs() < best.1.abs() {
            best = (z, fz);
        }
        if fz == 0.0 {
            a = z;
            b = z;
            break;
        }
        if fz > 0.0 {
            a = z;
            fa = fz;
            if last_side == 1 {
                fb *= 0.5;
            }
            last_side = 1;
        } else {
            b = z;
            fb = fz;
            if last_side == -1 {
                fa *= 0.5;
            }
            last_side = -1;
        }
        // Once the residual is met, finish the interval by bisection.
        if best.1.abs() <= opts.residual_tol && b - a > opts.interval_tol && b - a > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = det(m)?;
            if fm.abs() < best.1.abs() {
                best = (m, fm);
            }
            if fm > 0.0 {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
    }
    if best.1.abs() > opts.residual_tol {
        return Err(Error::Accuracy {
            reason: format!("root residual above {} (bracket [{a}, {b}])", opts.residual_tol),
            value: best.0,
            estimate: best.1.abs(),
        });
    }
    Ok(EigenReport {
        side,
        eigenvalue: Some(best.0),
        residual: best.1.abs(),
        bracket: (a, b),
        edge_determinant: d_edge,
        evaluations,
    })
}

/// Spectrum near the lower threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LowerRegime {
    NoEigenBelow,
    VirtualLevelBelow,
    UniqueEigenBelow,
}

/// Spectrum near the upper threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpperRegime {
    NoEigenAbove,
    VirtualLevelAbove,
    UniqueEigenAbove,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegimeClass {
    pub lower: LowerRegime,
    pub upper: UpperRegime,
}

impl LowerRegime {
    pub fn label(self) -> &'static str {
        match self {
            LowerRegime::NoEigenBelow => "none",
            LowerRegime::VirtualLevelBelow => "virtual",
            LowerRegime::UniqueEigenBelow => "eigen",
        }
    }
}

impl UpperRegime {
    pub fn label(self) -> &'static str {
        match self {
            UpperRegime::NoEigenAbove => "none",
            UpperRegime::VirtualLevelAbove => "virtual",
            UpperRegime::UniqueEigenAbove => "eigen",
        }
    }
}

/// Position of `μ` relative to a critical coupling: −1 below, 0 within the
/// relative band `rel_tol`, +1 above. `None` means the coupling does not
/// exist (the determinant has a fixed sign at the threshold).
fn compare(mu: f64, critical: f64, rel_tol: f64) -> i8 {
    if (mu - critical).abs() <= rel_tol * critical {
        0
    } else if mu < critical {
        -1
    } else {
        1
    }
}

/// Classification given the couplings.
///
/// Lower: `γ ≤ 0` always binds. Upper: `γ ≥ 12` always binds, since
/// `Δ(π̄; 18) = γ − 12 + μ²J₀ > 0` there while `Δ → −∞` as `z → ∞`.
pub fn classify_with(params: &SpectralParams, couplings: &CriticalCouplings, rel_tol: f64) -> RegimeClass {
    let lower = match couplings.mu_left {
        None => LowerRegime::UniqueEigenBelow,
        Some(c) => match compare(params.mu, c, rel_tol) {
            -1 => LowerRegime::NoEigenBelow,
            0 => LowerRegime::VirtualLevelBelow,
            _ => LowerRegime::UniqueEigenBelow,
        },
    };
    let upper = match couplings.mu_right {
        None => UpperRegime::UniqueEigenAbove,
        Some(c) => match compare(params.mu, c, rel_tol) {
            -1 => UpperRegime::NoEigenAbove,
            0 => UpperRegime::VirtualLevelAbove,
            _ => UpperRegime::UniqueEigenAbove,
        },
    };
    RegimeClass { lower, upper }
}

/// Regime of `(γ, μ)`; `tol` is the relative width of the virtual-level
/// band around each critical coupling.
pub fn classify_regime(params: &SpectralParams, tol: f64) -> Result<RegimeClass> {
    let c = critical_couplings(params.gamma, DEFAULT_QUAD_TOL)?;
    Ok(classify_with(params, &c, tol))
}

/// A grid point where the determinant has the wrong sign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepViolation {
    pub index: usize,
    pub k: [f64; 3],
    pub z: f64,
    pub determinant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub grid_size: usize,
    pub z_samples: Vec<f64>,
    pub gamma: f64,
    pub mu: f64,
    pub points_checked: usize,
    /// Smallest `Δ` (below) resp. `−Δ` (above) over all checks.
    pub min_margin: f64,
    pub violations: Vec<SweepViolation>,
}

/// Checks that `Δ > 0` for every `z < 0` and `Δ < 0` for every `z > 18` on
/// the `grid_size³` torus grid.
pub fn sweep_no_eigenvalues(
    grid_size: usize,
    z_samples: &[f64],
    params: &SpectralParams,
    quad_tol: f64,
) -> Result<SweepReport> {
    if grid_size == 0 {
        return Err(Error::invalid("grid size must be at least 1"));
    }
    if let Some(z) = z_samples.iter().find(|z| !(z.is_finite() && (**z < 0.0 || **z > 18.0))) {
        return Err(Error::invalid(format!("sweep samples must lie in (−∞, 0) ∪ (18, ∞), got {z}")));
    }
    let grid = torus_grid(grid_size);
    let check = |(index, k): (usize, &TorusPoint)| -> Result<Vec<(f64, Option<SweepViolation>)>> {
        let fiber = Fiber::new(k);
        z_samples
            .iter()
            .map(|&z| {
                let d = fiber.determinant(z, params, quad_tol)?.0;
                let margin = if z < 0.0 { d } else { -d };
                let v = (margin <= 0.0).then(|| SweepViolation { index, k: k.coords(), z, determinant: d });
                Ok((margin, v))
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<Vec<(f64, Option<SweepViolation>)>>> = {
        use rayon::prelude::*;
        grid.par_iter().enumerate().map(check).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<Vec<(f64, Option<SweepViolation>)>>> = grid.iter().enumerate().map(check).collect();

    let mut min_margin = f64::INFINITY;
    let mut violations = Vec::new();
    let mut points_checked = 0;
    for row in rows {
        for (margin, v) in row? {
            points_checked += 1;
            min_margin = min_margin.min(margin);
            violations.extend(v);
        }
    }
    Ok(SweepReport {
        grid_size,
        z_samples: z_samples.to_vec(),
        gamma: params.gamma,
        mu: params.mu,
        points_checked,
        min_margin,
        violations,
    })
}
