//! Phase-diagram scans over `(γ, μ)`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::determinant::Side;
use crate::error::{Error, Result};
use crate::lattice::{SpectralParams, TorusPoint};
use crate::spectral::{
    classify_with, find_eigenvalue_with, threshold_integral, CriticalCouplings, RegimeClass, RootOptions,
};

pub const CSV_HEADER: &str = "gamma,mu,regime_lower,regime_upper,z_below,z_above,res_below,res_above";

/// A closed range sampled at `steps` equally spaced points. With one step
/// only `start` is used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) {
            return Err(Error::invalid(format!("range bounds must be finite, got [{start}, {end}]")));
        }
        if steps == 0 {
            return Err(Error::invalid("a range needs at least one step"));
        }
        Ok(Range { start, end, steps })
    }

    pub fn single(x: f64) -> Result<Self> {
        Range::new(x, x, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.end - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.end } else { self.start + h * i as f64 })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub root: RootOptions,
    /// Relative width of the virtual-level band in the classification.
    pub virtual_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { root: RootOptions::default(), virtual_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub gamma: f64,
    pub mu: f64,
    pub regime: RegimeClass,
    pub eigenvalue_below: Option<f64>,
    pub eigenvalue_above: Option<f64>,
    pub residual_below: Option<f64>,
    pub residual_above: Option<f64>,
}

/// Classification and threshold eigenvalues (below at `0̄`, above at `π̄`)
/// for every grid point, γ-major.
pub fn scan(gamma: &Range, mu: &Range, opts: &ScanOptions) -> Result<Vec<ScanRecord>> {
    let j0 = threshold_integral(opts.root.quad_tol)?;
    let mus = mu.values();
    if let Some(m) = mus.iter().find(|m| !(**m >= 0.0)) {
        return Err(Error::invalid(format!("coupling must be non-negative, got {m}")));
    }
    let points: Vec<(f64, f64)> = gamma.values().into_iter().flat_map(|g| mus.iter().map(move |&m| (g, m))).collect();
    let row = |&(g, m): &(f64, f64)| -> Result<ScanRecord> {
        let params = SpectralParams::new(g, m)?;
        let couplings = CriticalCouplings::from_threshold_integral(g, j0)?;
        let regime = classify_with(&params, &couplings, opts.virtual_tol);
        let below = find_eigenvalue_with(&TorusPoint::ZERO, &params, Side::Below, &opts.root)?;
        let above = find_eigenvalue_with(&TorusPoint::PI, &params, Side::Above, &opts.root)?;
        Ok(ScanRecord {
            gamma: g,
            mu: m,
            regime,
            eigenvalue_below: below.eigenvalue,
            eigenvalue_above: above.eigenvalue,
            residual_below: below.eigenvalue.map(|_| below.residual),
            residual_above: above.eigenvalue.map(|_| above.residual),
        })
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<ScanRecord>> = {
        use rayon::prelude::*;
        points.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<ScanRecord>> = points.iter().map(row).collect();
    rows.into_iter().collect()
}

/// 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

pub fn write_csv<W: Write>(records: &[ScanRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_number(r.gamma),
            format_number(r.mu),
            r.regime.lower.label(),
            r.regime.upper.label(),
            optional(r.eigenvalue_below),
            optional(r.eigenvalue_above),
            optional(r.residual_below),
            optional(r.residual_above),
        )?;
    }
    out.flush()
}
