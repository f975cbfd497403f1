//! Integration over T³ with error control.
//!
//! The workhorse is the tensor midpoint rule on `N³` nodes (`N` even, so no
//! node has a coordinate equal to 0 or π). Integrands that are smooth on
//! each octant between the planes `tᵢ ∈ {0, π}` have an error expansion in
//! even powers of `h = 2π/N`, so successive grid doublings are combined by
//! Richardson extrapolation.
//!
//! Integrable point singularities (`|t − c|⁻²` blow-up) are split off with a
//! smooth partition of unity `1 = χ + (1 − χ)` supported on a ball around
//! the singular point: the `(1 − χ)` part is handled on the torus grid and
//! the `χ` part in spherical coordinates, where the `r²` Jacobian removes
//! the singularity.

use std::f64::consts::{PI, TAU};

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{wrap_angle, TorusPoint};

/// Value, error estimate and integrand-call count of a torus integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
}

impl QuadratureResult {
    pub fn scaled(self, c: f64) -> Self {
        QuadratureResult {
            value: c * self.value,
            error_estimate: c.abs() * self.error_estimate,
            evaluations: self.evaluations,
        }
    }

    fn plus(self, other: QuadratureResult) -> Self {
        QuadratureResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

/// Local model `a·|t − center|² + gap` of a vanishing (or nearly vanishing)
/// denominator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityHint {
    pub center: TorusPoint,
    pub quadratic_coefficient: f64,
    /// Offset of the denominator at the center; zero for a true singularity.
    pub gap: f64,
}

impl SingularityHint {
    pub fn new(center: TorusPoint, quadratic_coefficient: f64) -> Result<Self> {
        if !(quadratic_coefficient > 0.0 && quadratic_coefficient.is_finite()) {
            return Err(Error::invalid(format!(
                "quadratic coefficient must be positive, got {quadratic_coefficient}"
            )));
        }
        Ok(SingularityHint { center, quadratic_coefficient, gap: 0.0 })
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = gap.max(0.0);
        self
    }

    /// Length scale on which the integrand varies near the center.
    pub fn inner_scale(&self) -> f64 {
        (self.gap / self.quadratic_coefficient).sqrt()
    }
}

/// Grid schedule of the tensor midpoint rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusRule {
    pub initial: usize,
    pub max: usize,
    /// Highest Richardson order (each order removes one power of `h²`).
    pub max_order: usize,
}

impl Default for TorusRule {
    fn default() -> Self {
        TorusRule { initial: 16, max: 512, max_order: 3 }
    }
}

/// An integrand evaluated on tensor grids through per-axis precomputation.
///
/// `axis(d, x)` is called once per node coordinate and axis; `combine` then
/// produces the integrand value from three per-axis records. Closures over
/// [`TorusPoint`] fit this shape through [`PointFn`].
pub trait TensorIntegrand: Sync {
    type Axis: Copy + Send + Sync;

    fn axis(&self, dim: usize, x: f64) -> Self::Axis;

    fn combine(&self, a: &Self::Axis, b: &Self::Axis, c: &Self::Axis) -> f64;

    /// Pointwise evaluation; `t` need not be canonical.
    fn at(&self, t: [f64; 3]) -> f64 {
        let c = t.map(wrap_angle);
        self.combine(&self.axis(0, c[0]), &self.axis(1, c[1]), &self.axis(2, c[2]))
    }
}

/// Adapts `Fn(&TorusPoint) -> f64` to [`TensorIntegrand`].
pub struct PointFn<F>(pub F);

impl<F: Fn(&TorusPoint) -> f64 + Sync> TensorIntegrand for PointFn<F> {
    type Axis = f64;

    fn axis(&self, _dim: usize, x: f64) -> f64 {
        x
    }

    fn combine(&self, a: &f64, b: &f64, c: &f64) -> f64 {
        (self.0)(&TorusPoint::from_canonical([*a, *b, *c]))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("tolerance must be positive, got {tol}")))
    }
}

/// Midpoint sum on `n³` nodes; returns `(∫f, ∫|f|)` approximations.
fn midpoint_sum<T: TensorIntegrand>(f: &T, n: usize) -> (f64, f64) {
    let h = TAU / n as f64;
    let nodes: Vec<f64> = (0..n).map(|j| -PI + (j as f64 + 0.5) * h).collect();
    let tables: [Vec<T::Axis>; 3] = [0, 1, 2].map(|d| nodes.iter().map(|&x| f.axis(d, x)).collect());

    let slab = |a: &T::Axis| -> (f64, f64) {
        let (mut s, mut l1) = (0.0, 0.0);
        for b in &tables[1] {
            let (mut row, mut row_abs) = (0.0, 0.0);
            for c in &tables[2] {
                let v = f.combine(a, b, c);
                row += v;
                row_abs += v.abs();
            }
            s += row;
            l1 += row_abs;
        }
        (s, l1)
    };

    #[cfg(feature = "parallel")]
    let slabs: Vec<(f64, f64)> = {
        use rayon::prelude::*;
        tables[0].par_iter().map(slab).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let slabs: Vec<(f64, f64)> = tables[0].iter().map(slab).collect();

    let cell = h * h * h;
    let (s, l1) = slabs.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
    (s * cell, l1 * cell)
}

/// Tensor midpoint rule with grid doubling and Richardson extrapolation.
///
/// Stops once the extrapolated value moves by at most `tol` relative to
/// itself (or by a negligible amount relative to `∫|f|`). Fails with
/// [`Error::Accuracy`] when `rule.max` is reached first.
pub fn integrate_tensor<T: TensorIntegrand>(f: &T, tol: f64, rule: &TorusRule) -> Result<QuadratureResult> {
    check_tol(tol)?;
    if rule.initial < 2 || rule.initial % 2 != 0 || rule.max < rule.initial {
        return Err(Error::invalid(format!("invalid torus rule {rule:?}")));
    }
    let mut prev: Vec<f64> = Vec::new();
    let mut n = rule.initial;
    let mut evaluations = 0u64;
    loop {
        let (m, l1) = midpoint_sum(f, n);
        evaluations += (n * n * n) as u64;
        if !m.is_finite() {
            return Err(Error::Accuracy {
                reason: format!("non-finite integrand sum on {n}³ grid"),
                value: m,
                estimate: f64::INFINITY,
            });
        }
        let order = prev.len().min(rule.max_order);
        let mut row = vec![m];
        for o in 1..=order {
            let q = 4f64.powi(o as i32);
            row.push(row[o - 1] + (row[o - 1] - prev[o - 1]) / (q - 1.0));
        }
        let best = row[order];
        if !prev.is_empty() {
            let previous_best = prev[prev.len().min(rule.max_order + 1) - 1];
            let estimate = (best - previous_best).abs();
            if estimate <= tol * best.abs() || estimate <= 1e-14 * l1 {
                return Ok(QuadratureResult { value: best, error_estimate: estimate, evaluations });
            }
            if 2 * n > rule.max {
                return Err(Error::Accuracy {
                    reason: format!("torus rule did not converge by N = {n}"),
                    value: best,
                    estimate,
                });
            }
        }
        prev = row;
        n *= 2;
    }
}

/// [`integrate_tensor`] for a plain closure, with the default grid schedule.
pub fn integrate_torus<F>(f: F, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(&TorusPoint) -> f64 + Sync,
{
    integrate_tensor(&PointFn(f), tol, &TorusRule::default())
}

/// C∞ step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Patch weight χ(r): 1 at the center, 0 from `r = radius` on.
pub fn patch_weight(r: f64, radius: f64) -> f64 {
    smooth_step(1.0 - r / radius)
}

/// `1 − χ(r)`, evaluated directly.
pub fn complement_weight(r: f64, radius: f64) -> f64 {
    smooth_step(r / radius)
}

/// Spherical-coordinate schedule: Gauss–Legendre in `r` on graded panels and
/// in `cos ψ`, trapezoid in φ.
const SPHERE_LEVELS: [(usize, usize, usize); 5] = [(6, 8, 16), (10, 12, 24), (14, 16, 32), (20, 24, 48), (28, 32, 64)];

fn gauss(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(n).expect("degree ≥ 2").as_node_weight_pairs().to_vec()
}

/// Radial panel boundaries on `[r_in, r_out]`.
///
/// With `r_in > 0` panels double in width starting from `r_in` (suited to a
/// `r⁻²` radial profile). With `r_in = 0` panels halve from `r_out` down to
/// `scale`, which resolves `r²/(gap + a r²)`-type profiles.
fn radial_panels(r_in: f64, r_out: f64, scale: f64) -> Vec<f64> {
    let mut b = Vec::new();
    if r_in > 0.0 {
        let mut r = r_in;
        b.push(r);
        while r < r_out {
            r = (2.0 * r).min(r_out);
            if r_out - r < 0.25 * r {
                r = r_out;
            }
            b.push(r);
        }
    } else {
        let floor = scale.max(r_out * 2f64.powi(-60));
        let mut r = r_out;
        b.push(r);
        r *= 0.5;
        b.push(r);
        while r > floor {
            r *= 0.5;
            b.push(r);
        }
        b.push(0.0);
        b.reverse();
    }
    b
}

fn shell_sum<F: Fn(f64, [f64; 3]) -> f64>(
    f: &F,
    center: [f64; 3],
    panels: &[f64],
    (nr, nu, nphi): (usize, usize, usize),
) -> (f64, u64) {
    let rad = gauss(nr);
    let polar = gauss(nu);
    let dphi = TAU / nphi as f64;
    let dirs: Vec<([f64; 3], f64)> = polar
        .iter()
        .flat_map(|&(u, wu)| {
            let s = (1.0 - u * u).sqrt();
            (0..nphi).map(move |j| {
                let phi = (j as f64 + 0.5) * dphi;
                ([s * phi.cos(), s * phi.sin(), u], wu * dphi)
            })
        })
        .collect();
    let mut total = 0.0;
    let mut evals = 0u64;
    for w in panels.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mut panel = 0.0;
        for &(x, wx) in &rad {
            let r = a + half * (x + 1.0);
            let mut shell = 0.0;
            for (d, wd) in &dirs {
                let t = [center[0] + r * d[0], center[1] + r * d[1], center[2] + r * d[2]];
                shell += wd * f(r, t);
            }
            panel += wx * r * r * shell;
            evals += dirs.len() as u64;
        }
        total += half * panel;
    }
    (total, evals)
}

/// `∫ f` over the spherical shell `r_in ≤ |t − center| ≤ r_out`, in
/// spherical coordinates about `center`. `f` receives the radius and the
/// (unwrapped) point. `scale` is the inner length scale used to grade the
/// radial panels when `r_in = 0`.
pub fn integrate_shell<F: Fn(f64, [f64; 3]) -> f64>(
    f: F,
    center: &TorusPoint,
    r_in: f64,
    r_out: f64,
    scale: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    check_tol(tol)?;
    if !(r_in >= 0.0 && r_out > r_in && r_out <= PI) {
        return Err(Error::invalid(format!("invalid shell radii [{r_in}, {r_out}]")));
    }
    let panels = radial_panels(r_in, r_out, scale);
    let c = center.coords();
    let mut previous: Option<f64> = None;
    let mut evaluations = 0;
    let mut estimate = f64::INFINITY;
    let mut value = f64::NAN;
    for level in SPHERE_LEVELS {
        let (v, e) = shell_sum(&f, c, &panels, level);
        evaluations += e;
        if !v.is_finite() {
            return Err(Error::Accuracy {
                reason: "non-finite spherical sum".into(),
                value: v,
                estimate: f64::INFINITY,
            });
        }
        if let Some(p) = previous {
            estimate = (v - p).abs();
            value = v;
            if estimate <= tol * v.abs() || estimate <= 1e-15 * v.abs().max(1e-300) {
                return Ok(QuadratureResult { value, error_estimate: estimate, evaluations });
            }
        }
        previous = Some(v);
    }
    Err(Error::Accuracy { reason: "spherical rule did not converge".into(), value, estimate })
}

/// `∫ f` over the ball `|t − center| < radius`.
pub fn integrate_ball<F: Fn(&TorusPoint) -> f64>(
    f: F,
    center: &TorusPoint,
    radius: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    integrate_shell(|_, t| f(&TorusPoint::from_canonical(t.map(wrap_angle))), center, 0.0, radius, 0.0, tol)
}

/// The `(1 − χ)` part of a split integrand, as a tensor integrand.
struct Complement<'a, T> {
    inner: &'a T,
    center: [f64; 3],
    radius: f64,
}

impl<T: TensorIntegrand> TensorIntegrand for Complement<'_, T> {
    type Axis = (T::Axis, f64);

    fn axis(&self, dim: usize, x: f64) -> Self::Axis {
        let d = wrap_angle(x - self.center[dim]);
        (self.inner.axis(dim, x), d * d)
    }

    fn combine(&self, a: &Self::Axis, b: &Self::Axis, c: &Self::Axis) -> f64 {
        let r2 = a.1 + b.1 + c.1;
        if r2 >= self.radius * self.radius {
            return self.inner.combine(&a.0, &b.0, &c.0);
        }
        let w = complement_weight(r2.sqrt(), self.radius);
        if w == 0.0 {
            0.0
        } else {
            w * self.inner.combine(&a.0, &b.0, &c.0)
        }
    }
}

fn check_patch(radius: f64) -> Result<()> {
    if radius > 0.0 && radius <= PI {
        Ok(())
    } else {
        Err(Error::invalid(format!("patch radius must lie in (0, π], got {radius}")))
    }
}

/// Splits `∫_{T³} f` into a smooth torus part and a spherical patch about
/// `hint.center`, then adds the two (values and error estimates).
pub fn integrate_tensor_with_singularity<T: TensorIntegrand>(
    f: &T,
    hint: &SingularityHint,
    patch_radius: f64,
    tol: f64,
    rule: &TorusRule,
) -> Result<QuadratureResult> {
    check_tol(tol)?;
    check_patch(patch_radius)?;
    let center = hint.center.coords();
    let outer = integrate_tensor(&Complement { inner: f, center, radius: patch_radius }, tol, rule)?;
    let ball = integrate_shell(
        |r, t| {
            let w = patch_weight(r, patch_radius);
            if w == 0.0 {
                0.0
            } else {
                w * f.at(t)
            }
        },
        &hint.center,
        0.0,
        patch_radius,
        hint.inner_scale(),
        tol,
    )?;
    Ok(outer.plus(ball))
}

/// Closure form of [`integrate_tensor_with_singularity`].
pub fn integrate_with_singularity<F>(
    f: F,
    hint: &SingularityHint,
    patch_radius: f64,
    tol: f64,
) -> Result<QuadratureResult>
where
    F: Fn(&TorusPoint) -> f64 + Sync,
{
    integrate_tensor_with_singularity(&PointFn(f), hint, patch_radius, tol, &TorusRule::default())
}

/// The torus part `∫ f·(1 − χ)` of a split about `center`.
pub fn integrate_tensor_masked<T: TensorIntegrand>(
    f: &T,
    center: &TorusPoint,
    patch_radius: f64,
    tol: f64,
    rule: &TorusRule,
) -> Result<QuadratureResult> {
    check_tol(tol)?;
    check_patch(patch_radius)?;
    integrate_tensor(&Complement { inner: f, center: center.coords(), radius: patch_radius }, tol, rule)
}

/// The patch part `∫ f·χ` restricted to `inner ≤ |t − center| ≤ patch_radius`.
pub fn integrate_tensor_patch_shell<T: TensorIntegrand>(
    f: &T,
    center: &TorusPoint,
    inner: f64,
    patch_radius: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    check_patch(patch_radius)?;
    if !(inner > 0.0 && inner < patch_radius) {
        return Err(Error::invalid(format!("excluded radius {inner} must lie in (0, {patch_radius})")));
    }
    integrate_shell(|r, t| patch_weight(r, patch_radius) * f.at(t), center, inner, patch_radius, 0.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::w1_literal;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_and_cosine() {
        let r = integrate_torus(|_| 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r.value, TAU.powi(3), epsilon = 1e-12);
        assert!(r.error_estimate >= 0.0 && r.evaluations > 0);
        let r = integrate_torus(|t| t.coords()[0].cos(), 1e-12).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn midpoint_is_exact_for_constants_on_every_grid() {
        for n in [2, 4, 16, 64] {
            let (s, _) = midpoint_sum(&PointFn(|_: &TorusPoint| 1.0), n);
            assert_abs_diff_eq!(s, TAU.powi(3), epsilon = 1e-11);
        }
    }

    #[test]
    fn ball_integral_of_inverse_square() {
        for delta in [0.1, 0.5] {
            let r = integrate_ball(|t| 1.0 / t.norm().powi(2), &TorusPoint::ZERO, delta, 1e-12).unwrap();
            assert_abs_diff_eq!(r.value, 4.0 * PI * delta, epsilon = 1e-9);
            let r = integrate_ball(|t| 1.0 / (0.625 * t.norm().powi(2)), &TorusPoint::ZERO, delta, 1e-12).unwrap();
            assert_abs_diff_eq!(r.value, 1.6 * 4.0 * PI * delta, epsilon = 1e-9);
        }
    }

    #[test]
    fn partition_weights_sum_to_one() {
        for r in [0.0, 0.01, 0.2, 0.25, 0.49, 0.5, 0.7] {
            assert_abs_diff_eq!(patch_weight(r, 0.5) + complement_weight(r, 0.5), 1.0, epsilon = 1e-15);
        }
        assert_eq!(patch_weight(0.0, 0.5), 1.0);
        assert_eq!(patch_weight(0.5, 0.5), 0.0);
    }

    #[test]
    fn split_agrees_with_plain_rule_for_smooth_integrands() {
        let f = |t: &TorusPoint| 1.0 / (w1_literal(&TorusPoint::ZERO, t) + 1.0);
        let plain = integrate_torus(f, 1e-11).unwrap();
        let hint = SingularityHint::new(TorusPoint::ZERO, 0.625).unwrap();
        let split = integrate_with_singularity(f, &hint, 2.0, 1e-9).unwrap();
        assert!((plain.value - split.value).abs() <= plain.error_estimate + split.error_estimate + 1e-9);
        let off = SingularityHint::new(TorusPoint::new([1.0, -2.0, 0.5]).unwrap(), 1.0).unwrap();
        let split = integrate_with_singularity(f, &off, 1.0, 1e-8).unwrap();
        assert!((plain.value - split.value).abs() <= plain.error_estimate + split.error_estimate + 1e-9);
    }

    #[test]
    fn invalid_arguments() {
        assert!(matches!(integrate_torus(|_| 1.0, 0.0), Err(Error::InvalidArgument(_))));
        let hint = SingularityHint::new(TorusPoint::ZERO, 1.0).unwrap();
        for bad in [0.0, -1.0, 4.0] {
            assert!(matches!(
                integrate_with_singularity(|_| 1.0, &hint, bad, 1e-6),
                Err(Error::InvalidArgument(_))
            ));
        }
        assert!(SingularityHint::new(TorusPoint::ZERO, 0.0).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        // An |t₁|^(-1/2) singularity has an h^(1/2) error term that
        // extrapolation in h² cannot remove.
        let rule = TorusRule { initial: 16, max: 64, max_order: 3 };
        let f = PointFn(|t: &TorusPoint| 1.0 / t.coords()[0].abs().sqrt());
        match integrate_tensor(&f, 1e-12, &rule) {
            Err(Error::Accuracy { estimate, .. }) => assert!(estimate > 0.0),
            other => panic!("expected accuracy failure, got {other:?}"),
        }
    }

    #[test]
    fn positivity() {
        let r = integrate_torus(|t| t.coords()[1].sin().powi(2), 1e-10).unwrap();
        assert!(r.value >= 0.0);
    }
}
