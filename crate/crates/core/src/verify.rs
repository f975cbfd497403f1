//! The verification suite: every threshold, regime and expansion check as a
//! structured, deterministic report.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{expansion_fit, quadratic_form_limit, resonance_norms, QUADRATIC_COEFFICIENT};
use crate::determinant::{Fiber, Side};
use crate::error::{Error, Result};
use crate::lattice::{band_edges, wrap, SpectralParams, TorusPoint};
use crate::quadrature::{integrate_ball, integrate_torus};
use crate::spectral::{
    find_eigenvalue_with, sweep_no_eigenvalues, threshold_integral, virtual_level_check, BandEnd, CriticalCouplings,
    RootOptions,
};

/// All fields are optional in the JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Relative tolerance of every torus integral.
    pub quad_tol: f64,
    /// Bound on `|Δ|` at roots and virtual levels.
    pub residual_tol: f64,
    pub seed: u64,
    pub symmetry_samples: usize,
    pub sweep_grid: usize,
    pub sweep_z: Vec<f64>,
    /// The sweep runs at `μ = sweep_mu_factor·μ₀`.
    pub sweep_mu_factor: f64,
    pub regime_gammas: Vec<f64>,
    /// Multiples of the relevant critical coupling.
    pub regime_factors: Vec<f64>,
    /// Distances of the `z` probes to the threshold energy.
    pub expansion_z: Vec<f64>,
    /// Distances of the `k` probes (along the diagonal) to the threshold point.
    pub expansion_k: Vec<f64>,
    pub resonance_deltas: Vec<f64>,
    pub quadratic_radii: Vec<f64>,
    /// Which criteria to run.
    pub criteria: Vec<u8>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            quad_tol: 1e-9,
            residual_tol: 1e-6,
            seed: 20_240_917,
            symmetry_samples: 20,
            sweep_grid: 11,
            sweep_z: vec![-1.0, -1e-2, 18.0 + 1e-2, 19.0, 23.0],
            sweep_mu_factor: 1.0,
            regime_gammas: vec![-1.0, 0.0, 3.0, 6.0, 9.0, 12.0, 13.0],
            regime_factors: vec![0.5, 1.0, 1.5],
            expansion_z: vec![1e-3, 1e-4, 1e-5, 1e-6],
            expansion_k: vec![1e-3, 3e-3, 1e-2, 3e-2, 1e-1],
            resonance_deltas: (3..=9).map(|j| 2f64.powi(-j)).collect(),
            quadratic_radii: vec![1e-2, 1e-3],
            criteria: (1..=9).collect(),
        }
    }
}

impl VerifyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: VerifyConfig =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("bad configuration: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("quad_tol", self.quad_tol), ("residual_tol", self.residual_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.sweep_grid < 2 {
            return Err(Error::invalid("sweep_grid must be at least 2"));
        }
        if !(self.sweep_mu_factor > 0.0 && self.sweep_mu_factor.is_finite()) {
            return Err(Error::invalid("sweep_mu_factor must be positive"));
        }
        if let Some(c) = self.criteria.iter().find(|c| !(1..=9).contains(*c)) {
            return Err(Error::invalid(format!("unknown criterion {c}")));
        }
        let positive = |v: &[f64]| v.iter().all(|x| *x > 0.0 && x.is_finite());
        if !positive(&self.expansion_z) || !positive(&self.expansion_k) || !positive(&self.resonance_deltas) {
            return Err(Error::invalid("probe distances must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: u8,
    pub check_name: String,
    pub status: Status,
    pub measured: Option<f64>,
    pub expected: Option<f64>,
    /// Absolute tolerance on `|measured − expected|`.
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: VerifyConfig,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status != Status::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

fn close(criterion: u8, name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Check {
    let ok = (measured - expected).abs() <= tolerance;
    Check {
        criterion,
        check_name: name.into(),
        status: if ok { Status::Pass } else { Status::Fail },
        measured: Some(measured),
        expected: Some(expected),
        tolerance: Some(tolerance),
        detail: None,
    }
}

fn flag(criterion: u8, name: impl Into<String>, measured: bool, expected: bool) -> Check {
    let b = |x: bool| if x { 1.0 } else { 0.0 };
    close(criterion, name, b(measured), b(expected), 0.0)
}

fn failed(criterion: u8, name: impl Into<String>, e: &Error) -> Check {
    Check {
        criterion,
        check_name: name.into(),
        status: Status::Error,
        measured: None,
        expected: None,
        tolerance: None,
        detail: Some(e.to_string()),
    }
}

/// Runs `body`, turning an error into a single error check.
fn guarded(criterion: u8, name: &str, body: impl FnOnce() -> Result<Vec<Check>>) -> Vec<Check> {
    body().unwrap_or_else(|e| vec![failed(criterion, name, &e)])
}

/// `k` uniform on the torus, reproducible from `seed`.
pub fn sample_points(seed: u64, n: usize) -> Vec<TorusPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v = [0; 3].map(|_| rng.gen_range(-PI..PI));
            wrap(v).expect("finite sample")
        })
        .collect()
}

struct Suite<'a> {
    cfg: &'a VerifyConfig,
    j0: Option<f64>,
}

impl Suite<'_> {
    fn j0(&mut self) -> Result<f64> {
        if let Some(j) = self.j0 {
            return Ok(j);
        }
        let j = threshold_integral(self.cfg.quad_tol)?;
        self.j0 = Some(j);
        Ok(j)
    }

    fn mu0(&mut self) -> Result<f64> {
        Ok(CriticalCouplings::from_threshold_integral(6.0, self.j0()?)?.mu_zero)
    }

    fn roots(&self) -> RootOptions {
        RootOptions { quad_tol: self.cfg.quad_tol, residual_tol: self.cfg.residual_tol, ..RootOptions::default() }
    }

    fn band(&mut self) -> Vec<Check> {
        let lo = band_edges(&TorusPoint::ZERO);
        let hi = band_edges(&TorusPoint::PI);
        vec![
            close(1, "band_bottom_at_zero", lo.bottom, 0.0, 1e-9),
            close(1, "band_top_at_zero", lo.top, 9.375, 1e-9),
            close(1, "band_bottom_at_pi", hi.bottom, 8.625, 1e-9),
            close(1, "band_top_at_pi", hi.top, 18.0, 1e-9),
        ]
    }

    fn quadrature(&mut self) -> Vec<Check> {
        let mut out = guarded(2, "torus_volume", || {
            let r = integrate_torus(|_| 1.0, self.cfg.quad_tol)?;
            Ok(vec![close(2, "torus_volume", r.value, (2.0 * PI).powi(3), 1e-12)])
        });
        for delta in [0.1, 0.5] {
            let name = format!("ball_inverse_square_{delta}");
            out.extend(guarded(2, &name, || {
                let r = integrate_ball(|t| 1.0 / (t.norm() * t.norm()), &TorusPoint::ZERO, delta, self.cfg.quad_tol)?;
                Ok(vec![close(2, &name, r.value, 4.0 * PI * delta, 1e-9)])
            }));
        }
        out
    }

    fn threshold_symmetry(&mut self) -> Vec<Check> {
        let mut out = guarded(3, "threshold_integral_refinement", || {
            let j = self.j0()?;
            let mut spread = 0.0f64;
            for coarse in [100.0, 10.0] {
                let c = threshold_integral(self.cfg.quad_tol * coarse)?;
                spread = spread.max((c - j).abs() / j);
            }
            Ok(vec![
                flag(3, "threshold_integral_positive", j > 0.0, true),
                close(3, "threshold_integral_refinement", spread, 0.0, 1e-7),
            ])
        });
        out.extend(guarded(3, "shift_identity", || {
            let mut worst = 0.0f64;
            for k in sample_points(self.cfg.seed, self.cfg.symmetry_samples) {
                let a = Fiber::new(&k).integral(0.0, self.cfg.quad_tol)?.value;
                let b = Fiber::new(&k.shift_by_pi()).integral(18.0, self.cfg.quad_tol)?.value;
                worst = worst.max((a + b).abs());
            }
            Ok(vec![close(3, "shift_identity", worst, 0.0, 1e-7)])
        }));
        out
    }

    fn virtual_levels(&mut self) -> Vec<Check> {
        let mut out = guarded(4, "virtual_level_constants", || {
            let mu0 = self.mu0()?;
            let p = SpectralParams::new(6.0, mu0)?;
            let tol = self.cfg.quad_tol;
            let lower = Fiber::new(&TorusPoint::ZERO).determinant(0.0, &p, tol)?.0;
            let upper = Fiber::new(&TorusPoint::PI).determinant(18.0, &p, tol)?.0;
            Ok(vec![
                close(4, "determinant_lower_threshold", lower, 0.0, 1e-9),
                close(4, "determinant_upper_threshold", upper, 0.0, 1e-6),
            ])
        });
        // Corollary (i): γ = 3 at the left critical coupling.
        out.extend(guarded(4, "corollary_i", || {
            let c = CriticalCouplings::from_threshold_integral(3.0, self.j0()?)?;
            let p = SpectralParams::new(3.0, c.mu_left.expect("γ > 0"))?;
            let virt = virtual_level_check(BandEnd::Lower, &p, self.cfg.residual_tol)?;
            let above = find_eigenvalue_with(&TorusPoint::PI, &p, Side::Above, &self.roots())?;
            Ok(vec![
                flag(4, "corollary_i_virtual_level_at_0", virt, true),
                flag(4, "corollary_i_eigenvalue_above_18", above.eigenvalue.is_some(), false),
            ])
        }));
        // Corollary (iii): γ = 9 at the right critical coupling.
        out.extend(guarded(4, "corollary_iii", || {
            let c = CriticalCouplings::from_threshold_integral(9.0, self.j0()?)?;
            let p = SpectralParams::new(9.0, c.mu_right.expect("γ < 12"))?;
            let below = find_eigenvalue_with(&TorusPoint::ZERO, &p, Side::Below, &self.roots())?;
            let virt = virtual_level_check(BandEnd::Upper, &p, self.cfg.residual_tol)?;
            Ok(vec![
                flag(4, "corollary_iii_negative_eigenvalue", below.eigenvalue.is_some(), true),
                flag(4, "corollary_iii_virtual_level_at_18", virt, true),
            ])
        }));
        out
    }

    fn regimes(&mut self) -> Vec<Check> {
        let mut out = Vec::new();
        let gammas = self.cfg.regime_gammas.clone();
        let factors = self.cfg.regime_factors.clone();
        for &g in &gammas {
            for &f in &factors {
                for end in [BandEnd::Lower, BandEnd::Upper] {
                    let tag = match end {
                        BandEnd::Lower => "below",
                        BandEnd::Upper => "above",
                    };
                    let name = format!("regime_{tag}_gamma_{g}_factor_{f}");
                    out.extend(guarded(5, &name, || {
                        let c = CriticalCouplings::from_threshold_integral(g, self.j0()?)?;
                        let threshold = c.at(end).unwrap_or(c.mu_zero);
                        let p = SpectralParams::new(g, f * threshold)?;
                        let found = find_eigenvalue_with(&end.point(), &p, end.side(), &self.roots())?;
                        Ok(vec![flag(5, &name, found.eigenvalue.is_some(), predicted(end, g, f))])
                    }));
                }
            }
        }
        out
    }

    fn sweep(&mut self) -> Vec<Check> {
        guarded(6, "sweep_sign_violations", || {
            let mu = self.cfg.sweep_mu_factor * self.mu0()?;
            let p = SpectralParams::new(6.0, mu)?;
            let r = sweep_no_eigenvalues(self.cfg.sweep_grid, &self.cfg.sweep_z, &p, self.cfg.quad_tol)?;
            Ok(vec![close(6, "sweep_sign_violations", r.violations.len() as f64, 0.0, 0.0)])
        })
    }

    fn expansion(&mut self) -> Vec<Check> {
        let mut out = Vec::new();
        let dir = 1.0 / 3f64.sqrt();
        for end in [BandEnd::Lower, BandEnd::Upper] {
            let tag = match end {
                BandEnd::Lower => "lower",
                BandEnd::Upper => "upper",
            };
            out.extend(guarded(7, &format!("expansion_{tag}"), || {
                let (zs, ks): (Vec<f64>, Vec<TorusPoint>) = match end {
                    BandEnd::Lower => (
                        self.cfg.expansion_z.iter().map(|d| -d).collect(),
                        self.cfg.expansion_k.iter().map(|r| wrap([r * dir; 3])).collect::<Result<_>>()?,
                    ),
                    BandEnd::Upper => (
                        self.cfg.expansion_z.iter().map(|d| 18.0 + d).collect(),
                        self
                            .cfg
                            .expansion_k
                            .iter()
                            .map(|r| Ok(wrap([r * dir; 3])?.shift_by_pi()))
                            .collect::<Result<_>>()?,
                    ),
                };
                let f = expansion_fit(end, &zs, &ks, self.cfg.quad_tol)?;
                Ok(vec![
                    close(7, format!("expansion_{tag}_exponent"), f.fitted_exponent, 0.5, 0.005),
                    close(
                        7,
                        format!("expansion_{tag}_prefactor"),
                        f.fitted_prefactor,
                        f.reference_prefactor,
                        0.02 * f.reference_prefactor.abs(),
                    ),
                    close(
                        7,
                        format!("expansion_{tag}_k_prefactor"),
                        f.k_prefactor,
                        f.k_reference_prefactor,
                        0.02 * f.k_reference_prefactor.abs(),
                    ),
                ])
            }));
        }
        out
    }

    fn resonance(&mut self) -> Vec<Check> {
        let mut out = Vec::new();
        for end in [BandEnd::Lower, BandEnd::Upper] {
            let tag = match end {
                BandEnd::Lower => "lower",
                BandEnd::Upper => "upper",
            };
            out.extend(guarded(8, &format!("resonance_{tag}"), || {
                let j0 = self.j0()?;
                let mu0 = self.mu0()?;
                let r = resonance_norms(end, &self.cfg.resonance_deltas, self.cfg.quad_tol)?;
                Ok(vec![
                    close(8, format!("resonance_{tag}_l1"), r.l1_value, mu0 * j0, 1e-6),
                    close(8, format!("resonance_{tag}_l2_divergence"), r.divergence_exponent, 1.0, 0.05),
                ])
            }));
        }
        out
    }

    fn quadratic(&mut self) -> Vec<Check> {
        guarded(9, "quadratic_model", || {
            let q = quadratic_form_limit(&self.cfg.quadratic_radii)?;
            let &(r, hi, lo) = q.samples.last().expect("at least two radii");
            let worst = (hi - QUADRATIC_COEFFICIENT).abs().max((lo - QUADRATIC_COEFFICIENT).abs());
            Ok(vec![
                close(9, format!("quadratic_ratio_deviation_at_{r}"), worst, 0.0, 1e-5),
                close(9, "quadratic_limit", q.limit, QUADRATIC_COEFFICIENT, 1e-5),
            ])
        })
    }
}

/// Existence of an eigenvalue beyond `end` as the theorems state it, for
/// `μ = factor·(critical coupling)`. At the critical coupling itself there
/// is a virtual level, which is not an eigenvalue.
pub fn predicted(end: BandEnd, gamma: f64, factor: f64) -> bool {
    match end {
        BandEnd::Lower if gamma <= 0.0 => true,
        BandEnd::Upper if gamma >= 12.0 => false,
        _ => factor > 1.0,
    }
}

/// Runs the selected criteria in order.
pub fn run(cfg: &VerifyConfig) -> Result<Report> {
    run_with(cfg, |_, _| {})
}

/// As [`run`], calling `progress(criterion, checks)` after each criterion.
pub fn run_with(cfg: &VerifyConfig, mut progress: impl FnMut(u8, &[Check])) -> Result<Report> {
    cfg.validate()?;
    let mut suite = Suite { cfg, j0: None };
    let mut checks = Vec::new();
    let mut criteria = cfg.criteria.clone();
    criteria.sort_unstable();
    criteria.dedup();
    for c in criteria {
        let part = match c {
            1 => suite.band(),
            2 => suite.quadrature(),
            3 => suite.threshold_symmetry(),
            4 => suite.virtual_levels(),
            5 => suite.regimes(),
            6 => suite.sweep(),
            7 => suite.expansion(),
            8 => suite.resonance(),
            _ => suite.quadratic(),
        };
        progress(c, &part);
        checks.extend(part);
    }
    let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
    Ok(Report { config: cfg.clone(), passed, failed: checks.len() - passed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_fill_missing_fields() {
        let c = VerifyConfig::from_json(r#"{"quad_tol": 1e-8}"#).unwrap();
        assert_eq!(c.quad_tol, 1e-8);
        assert_eq!(c.sweep_grid, 11);
        assert_eq!(VerifyConfig::from_json("{}").unwrap(), VerifyConfig::default());
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(VerifyConfig::from_json(r#"{"quad_tol": 0}"#).is_err());
        assert!(VerifyConfig::from_json(r#"{"sweep_grid": 1}"#).is_err());
        assert!(VerifyConfig::from_json(r#"{"criteria": [10]}"#).is_err());
        assert!(VerifyConfig::from_json(r#"{"unknown": 1}"#).is_err());
    }

    #[test]
    fn seeded_points_are_reproducible() {
        assert_eq!(sample_points(3, 5), sample_points(3, 5));
        assert_ne!(sample_points(3, 5), sample_points(4, 5));
    }

    #[test]
    fn cheap_criteria_pass() {
        let cfg = VerifyConfig { criteria: vec![1, 2, 9], ..VerifyConfig::default() };
        let r = run(&cfg).unwrap();
        assert!(r.all_passed(), "{}", r.to_json());
        assert_eq!(r.checks.len(), 9);
    }
}
