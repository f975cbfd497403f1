//! Browser bindings for the interactive demo in `www/`.

use friedrichs::determinant::Fiber;
use friedrichs::lattice::{band_edges as edges, wrap, SpectralParams};
use friedrichs::spectral::{classify_with, threshold_integral, CriticalCouplings, LowerRegime, UpperRegime};
use wasm_bindgen::prelude::*;

fn js_err(e: friedrichs::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[m(k), M(k)]`.
#[wasm_bindgen]
pub fn band_edges(k1: f64, k2: f64, k3: f64) -> Result<Vec<f64>, JsError> {
    edge_pair([k1, k2, k3]).map_err(js_err)
}

fn edge_pair(k: [f64; 3]) -> friedrichs::Result<Vec<f64>> {
    let e = edges(&wrap(k)?);
    Ok(vec![e.bottom, e.top])
}

/// `J₀`, the integral at the bottom threshold.
#[wasm_bindgen]
pub fn threshold(tol: f64) -> Result<f64, JsError> {
    threshold_integral(tol).map_err(js_err)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn determinant_curve(
    k1: f64,
    k2: f64,
    k3: f64,
    gamma: f64,
    mu: f64,
    z_lo: f64,
    z_hi: f64,
    n: usize,
    tol: f64,
) -> Result<Vec<f64>, JsError> {
    curve([k1, k2, k3], gamma, mu, (z_lo, z_hi, n), tol).map_err(js_err)
}

/// `Δ(k; z)` on `n` equally spaced points of `[z_lo, z_hi]`. Points inside
/// the band, or where the quadrature gives up, come back as NaN.
fn curve(k: [f64; 3], gamma: f64, mu: f64, (z_lo, z_hi, n): (f64, f64, usize), tol: f64) -> friedrichs::Result<Vec<f64>> {
    let k = wrap(k)?;
    let params = SpectralParams::new(gamma, mu)?;
    if n < 2 {
        return Err(friedrichs::Error::InvalidArgument("need at least two points".into()));
    }
    let fiber = Fiber::new(&k);
    let h = (z_hi - z_lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let z = z_lo + h * i as f64;
            fiber.determinant(z, &params, tol).map(|(d, _)| d).unwrap_or(f64::NAN)
        })
        .collect())
}

fn code(lower: LowerRegime, upper: UpperRegime) -> u8 {
    let l = match lower {
        LowerRegime::NoEigenBelow => 0,
        LowerRegime::VirtualLevelBelow => 1,
        LowerRegime::UniqueEigenBelow => 2,
    };
    let u = match upper {
        UpperRegime::NoEigenAbove => 0,
        UpperRegime::VirtualLevelAbove => 1,
        UpperRegime::UniqueEigenAbove => 2,
    };
    3 * l + u
}

/// Regime codes `3·lower + upper` (0 none, 1 virtual, 2 eigenvalue) on a
/// grid, μ-major with μ increasing.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn phase_diagram(
    j0: f64,
    gamma_lo: f64,
    gamma_hi: f64,
    n_gamma: usize,
    mu_lo: f64,
    mu_hi: f64,
    n_mu: usize,
    rel_tol: f64,
) -> Result<Vec<u8>, JsError> {
    regime_grid(j0, (gamma_lo, gamma_hi, n_gamma), (mu_lo, mu_hi, n_mu), rel_tol).map_err(js_err)
}

fn regime_grid(
    j0: f64,
    (gamma_lo, gamma_hi, n_gamma): (f64, f64, usize),
    (mu_lo, mu_hi, n_mu): (f64, f64, usize),
    rel_tol: f64,
) -> friedrichs::Result<Vec<u8>> {
    let step = |lo: f64, hi: f64, n: usize| if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let (hg, hm) = (step(gamma_lo, gamma_hi, n_gamma), step(mu_lo, mu_hi, n_mu));
    let mut out = Vec::with_capacity(n_gamma * n_mu);
    for j in 0..n_mu {
        let mu = mu_lo + hm * j as f64;
        for i in 0..n_gamma {
            let gamma = gamma_lo + hg * i as f64;
            let params = SpectralParams::new(gamma, mu)?;
            let cc = CriticalCouplings::from_threshold_integral(gamma, j0)?;
            let r = classify_with(&params, &cc, rel_tol);
            out.push(code(r.lower, r.upper));
        }
    }
    Ok(out)
}
