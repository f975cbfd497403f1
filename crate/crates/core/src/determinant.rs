//! The integral `I(k; z) = ∫ dt / (w₁(k,t) − z)` and the determinant
//! `Δ_μ(k; z) = w₀(k) − z − μ² I(k; z)` for real `z` outside the band.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{band_edges, w0, BandEdges, Channel, ChannelExtremum, Extremum, SpectralParams, TorusPoint};
use crate::quadrature::{
    integrate_tensor, integrate_tensor_with_singularity, QuadratureResult, SingularityHint, TensorIntegrand,
    TorusRule,
};

/// Largest patch radius used around a near-singular point.
const MAX_PATCH_RADIUS: f64 = 2.0;
/// Fraction of the distance to the nearest cut plane the patch may occupy.
const PATCH_CUT_MARGIN: f64 = 0.9;
/// Peaks narrower than this are split off into a spherical patch.
const SINGULAR_SCALE: f64 = 0.35;

/// Memo of `I(k; z)` values; `I` does not depend on `(γ, μ)`, so scans and
/// root searches revisit the same points. Results are deterministic, so a
/// cached value is bit-identical to a recomputed one.
type CacheKey = ([u64; 3], u64, u64);
const CACHE_CAPACITY: usize = 1 << 16;

fn cache() -> &'static Mutex<HashMap<CacheKey, QuadratureResult>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, QuadratureResult>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// A quasi-momentum and a real spectral parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub k: TorusPoint,
    pub z: f64,
}

impl SpectralPoint {
    pub fn new(k: TorusPoint, z: f64) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::invalid(format!("spectral parameter must be finite, got {z}")));
        }
        Ok(SpectralPoint { k, z })
    }
}

/// Which side of the band a spectral parameter lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Below,
    Above,
}

/// Everything about `w₁(k, ·)` that does not depend on `z`.
#[derive(Clone, Copy, Debug)]
pub struct Fiber {
    k: TorusPoint,
    edges: BandEdges,
    channel: Channel,
    min: ChannelExtremum,
    max: ChannelExtremum,
}

/// `1/(shift + Σ axis)^power` where the axis records are either channel
/// values (below the band) or deficits `6 − value` (above it).
struct Resolvent<'a> {
    channel: &'a Channel,
    shift: f64,
    deficit: bool,
    squared: bool,
}

impl TensorIntegrand for Resolvent<'_> {
    type Axis = f64;

    #[inline]
    fn axis(&self, dim: usize, x: f64) -> f64 {
        let a = &self.channel.axes[dim];
        if self.deficit {
            a.deficit(x)
        } else {
            a.value(x)
        }
    }

    #[inline]
    fn combine(&self, a: &f64, b: &f64, c: &f64) -> f64 {
        let d = self.shift + a + b + c;
        if self.squared {
            1.0 / (d * d)
        } else {
            1.0 / d
        }
    }
}

impl Fiber {
    pub fn new(k: &TorusPoint) -> Self {
        let channel = Channel::new(k);
        Fiber {
            k: *k,
            edges: band_edges(k),
            channel,
            min: channel.extremum(Extremum::Min),
            max: channel.extremum(Extremum::Max),
        }
    }

    pub fn k(&self) -> &TorusPoint {
        &self.k
    }

    pub fn edges(&self) -> BandEdges {
        self.edges
    }

    /// Side of the band for `z`, or a domain error inside the closed band.
    /// The two thresholds `(0̄; 0)` and `(π̄; 18)` are admitted.
    pub fn side(&self, z: f64) -> Result<Side> {
        if !z.is_finite() {
            return Err(Error::invalid(format!("spectral parameter must be finite, got {z}")));
        }
        if self.k.is_zero() && z == 0.0 {
            return Ok(Side::Below);
        }
        if self.k.is_pi() && z == 18.0 {
            return Ok(Side::Above);
        }
        if z < self.edges.bottom {
            Ok(Side::Below)
        } else if z > self.edges.top {
            Ok(Side::Above)
        } else {
            Err(Error::domain(format!(
                "z = {z} lies in the band [{}, {}] at k = {:?}",
                self.edges.bottom,
                self.edges.top,
                self.k.coords()
            )))
        }
    }

    /// Largest admissible patch radius about `center`.
    fn patch_radius(&self, center: &TorusPoint) -> f64 {
        let c = center.coords();
        let to_cut = (0..3)
            .map(|i| self.channel.axes[i].distance_to_cut(c[i]))
            .fold(f64::INFINITY, f64::min);
        (PATCH_CUT_MARGIN * to_cut).min(MAX_PATCH_RADIUS)
    }

    fn integrate(&self, z: f64, squared: bool, tol: f64) -> Result<QuadratureResult> {
        let side = self.side(z)?;
        let (ext, integrand, sign) = match side {
            Side::Below => (
                &self.min,
                Resolvent { channel: &self.channel, shift: -z, deficit: false, squared },
                1.0,
            ),
            Side::Above => (
                &self.max,
                Resolvent { channel: &self.channel, shift: z - 18.0, deficit: true, squared },
                if squared { 1.0 } else { -1.0 },
            ),
        };
        let gap = match side {
            Side::Below => ext.value - z,
            Side::Above => z - ext.value,
        }
        .max(0.0);
        let rule = TorusRule::default();
        let a = 0.5 * ext.curvature.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let radius = self.patch_radius(&ext.position);
        let near = ext.smooth && a > 0.0 && (gap / a).sqrt() < SINGULAR_SCALE && radius > 0.1;
        let result = if near {
            let hint = SingularityHint::new(ext.position, a)?.with_gap(gap);
            integrate_tensor_with_singularity(&integrand, &hint, radius, tol, &rule)?
        } else {
            if gap == 0.0 {
                return Err(Error::domain(format!("no admissible singular path at k = {:?}, z = {z}", self.k.coords())));
            }
            integrate_tensor(&integrand, tol, &rule)?
        };
        Ok(result.scaled(sign))
    }

    /// `I(k; z)`.
    pub fn integral(&self, z: f64, tol: f64) -> Result<QuadratureResult> {
        let key = (self.k.coords().map(f64::to_bits), z.to_bits(), tol.to_bits());
        if let Some(hit) = cache().lock().ok().and_then(|c| c.get(&key).copied()) {
            return Ok(hit);
        }
        let r = self.integrate(z, false, tol)?;
        if let Ok(mut c) = cache().lock() {
            if c.len() >= CACHE_CAPACITY {
                c.clear();
            }
            c.insert(key, r);
        }
        Ok(r)
    }

    /// `∫ dt / (w₁(k,t) − z)²`, defined strictly outside the band only.
    pub fn second_moment(&self, z: f64, tol: f64) -> Result<QuadratureResult> {
        let strict = z < self.edges.bottom || z > self.edges.top;
        if !strict {
            return Err(Error::domain(format!("z = {z} is not strictly outside the band")));
        }
        self.integrate(z, true, tol)
    }

    /// `Δ_μ(k; z)` with the error estimate inherited from `I`.
    pub fn determinant(&self, z: f64, params: &SpectralParams, tol: f64) -> Result<(f64, f64)> {
        let free = w0(&self.k, params.gamma) - z;
        let mu2 = params.mu * params.mu;
        if mu2 == 0.0 {
            self.side(z)?;
            return Ok((free, 0.0));
        }
        let i = self.integral(z, tol)?;
        Ok((free - mu2 * i.value, mu2 * i.error_estimate))
    }

    /// `∂Δ/∂z = −1 − μ² ∫ dt / (w₁ − z)²`.
    pub fn determinant_z_derivative(&self, z: f64, params: &SpectralParams, tol: f64) -> Result<f64> {
        let mu2 = params.mu * params.mu;
        if mu2 == 0.0 {
            self.second_moment_domain(z)?;
            return Ok(-1.0);
        }
        Ok(-1.0 - mu2 * self.second_moment(z, tol)?.value)
    }

    fn second_moment_domain(&self, z: f64) -> Result<()> {
        if z < self.edges.bottom || z > self.edges.top {
            Ok(())
        } else {
            Err(Error::domain(format!("z = {z} is not strictly outside the band")))
        }
    }
}

/// `I(k; z)` with error estimate.
pub fn lattice_integral(sp: &SpectralPoint, tol: f64) -> Result<QuadratureResult> {
    Fiber::new(&sp.k).integral(sp.z, tol)
}

/// `Δ_μ(k; z)`.
pub fn fredholm_determinant(sp: &SpectralPoint, params: &SpectralParams, tol: f64) -> Result<f64> {
    Ok(fredholm_determinant_with_error(sp, params, tol)?.0)
}

/// `Δ_μ(k; z)` and its error estimate `μ²·err(I)`.
pub fn fredholm_determinant_with_error(sp: &SpectralPoint, params: &SpectralParams, tol: f64) -> Result<(f64, f64)> {
    Fiber::new(&sp.k).determinant(sp.z, params, tol)
}

/// `∂Δ_μ(k; z)/∂z`, always below −1.
pub fn determinant_z_derivative(sp: &SpectralPoint, params: &SpectralParams, tol: f64) -> Result<f64> {
    Fiber::new(&sp.k).determinant_z_derivative(sp.z, params, tol)
}
