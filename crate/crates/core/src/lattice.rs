//! Dispersion, channel energy and band edges on the torus T³ = (−π, π]³.
//!
//! The channel energy `w1(k, p) = ε(k) + ε((k+p)/2) + ε(p)` needs a
//! determination of the half angle `(kᵢ+pᵢ)/2`, which is only defined
//! modulo π on the torus. Each choice flips the sign of `cos((kᵢ+pᵢ)/2)`,
//! so a determination is a [`BranchFlags`] value per pair `(k, p)`.
//!
//! * [`w1_branch`] evaluates an explicit determination.
//! * [`w1_literal`] halves the canonical representatives in (−π, π].
//! * [`w1`] is the shift-covariant determination used by every integral in
//!   this crate: it coincides with the literal one whenever `|kᵢ| ≤ π/2`
//!   and satisfies `w1(k+π̄, p+π̄) = 18 − w1(k, p)` pointwise.
//!
//! [`band_edges`] takes extrema over both determinations, which bounds
//! every value any of the three functions can produce.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points used by the dense 1-D scan that seeds golden-section refinement.
const SCAN_POINTS: usize = 4096;
/// Bracket width at which golden-section refinement stops.
const GOLDEN_WIDTH: f64 = 1e-12;

/// Maps an angle to its representative in (−π, π]. Values already in range
/// are returned unchanged, which keeps the map idempotent.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// `1 − cos x` without cancellation near `x = 0`.
#[inline]
pub(crate) fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// `1 + cos x` without cancellation near `x = ±π`.
#[inline]
pub(crate) fn one_plus_cos(x: f64) -> f64 {
    let c = (0.5 * x).cos();
    2.0 * c * c
}

/// A point of T³ stored by its canonical coordinates in (−π, π].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint([f64; 3]);

impl TorusPoint {
    /// The origin 0̄.
    pub const ZERO: TorusPoint = TorusPoint([0.0; 3]);
    /// The corner π̄ = (π, π, π).
    pub const PI: TorusPoint = TorusPoint([PI; 3]);

    pub fn new(v: [f64; 3]) -> Result<Self> {
        wrap(v)
    }

    /// Trusts the caller that every coordinate already lies in (−π, π].
    pub(crate) fn from_canonical(v: [f64; 3]) -> Self {
        TorusPoint(v)
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    /// `self + π̄`, wrapped back onto the torus.
    pub fn shift_by_pi(&self) -> TorusPoint {
        TorusPoint(self.0.map(|x| wrap_angle(x + PI)))
    }

    /// Componentwise negation (the map `k ↦ −k` of the torus).
    pub fn negate(&self) -> TorusPoint {
        TorusPoint(self.0.map(|x| wrap_angle(-x)))
    }

    /// Euclidean length of the canonical representative.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Flat-torus distance.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| {
                let d = wrap_angle(a - b);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn is_pi(&self) -> bool {
        self.0.iter().all(|&x| x == PI)
    }
}

/// Reduces each coordinate modulo 2π into (−π, π].
pub fn wrap(v: [f64; 3]) -> Result<TorusPoint> {
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite torus coordinate {bad}")));
    }
    Ok(TorusPoint(v.map(wrap_angle)))
}

/// The uniform `n³` grid with nodes `2πj/n` (wrapped), in lexicographic
/// order. Always contains 0̄; contains π̄ iff `n` is even.
pub fn torus_grid(n: usize) -> Vec<TorusPoint> {
    let axis: Vec<f64> = (0..n).map(|j| wrap_angle(TAU * j as f64 / n as f64)).collect();
    let mut out = Vec::with_capacity(n * n * n);
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                out.push(TorusPoint([a, b, c]));
            }
        }
    }
    out
}

/// Level shift γ and coupling μ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub gamma: f64,
    pub mu: f64,
}

impl SpectralParams {
    /// `mu = 0` is accepted and describes the decoupled operator.
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be finite, got {gamma}")));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::invalid(format!("mu must be finite and non-negative, got {mu}")));
        }
        Ok(SpectralParams { gamma, mu })
    }
}

/// Half-angle determination, one flag per coordinate. A set flag flips the
/// sign of `cos((kᵢ+pᵢ)/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct BranchFlags(pub [bool; 3]);

impl BranchFlags {
    pub const LITERAL: BranchFlags = BranchFlags([false; 3]);

    /// All eight determinations.
    pub fn all() -> impl Iterator<Item = BranchFlags> {
        (0u8..8).map(|bits| BranchFlags([bits & 1 != 0, bits & 2 != 0, bits & 4 != 0]))
    }

    pub fn xor(self, other: BranchFlags) -> BranchFlags {
        BranchFlags([
            self.0[0] ^ other.0[0],
            self.0[1] ^ other.0[1],
            self.0[2] ^ other.0[2],
        ])
    }
}

pub fn epsilon(k: &TorusPoint) -> f64 {
    k.0.iter().map(|&x| one_minus_cos(x)).sum()
}

pub fn w0(k: &TorusPoint, gamma: f64) -> f64 {
    epsilon(k) + gamma
}

#[inline]
fn half_term(k: f64, p: f64, flipped: bool) -> f64 {
    let h = 0.5 * (k + p);
    if flipped {
        one_plus_cos(h)
    } else {
        one_minus_cos(h)
    }
}

#[inline]
fn axis_value(k: f64, p: f64, flipped: bool) -> f64 {
    one_minus_cos(k) + half_term(k, p, flipped) + one_minus_cos(p)
}

/// `6 − axis_value`, evaluated as a sum of non-negative terms.
#[inline]
fn axis_deficit(k: f64, p: f64, flipped: bool) -> f64 {
    one_plus_cos(k) + half_term(k, p, !flipped) + one_plus_cos(p)
}

pub fn w1_branch(k: &TorusPoint, p: &TorusPoint, sigma: BranchFlags) -> f64 {
    (0..3).map(|i| axis_value(k.0[i], p.0[i], sigma.0[i])).sum()
}

pub fn w1_literal(k: &TorusPoint, p: &TorusPoint) -> f64 {
    w1_branch(k, p, BranchFlags::LITERAL)
}

#[inline]
fn is_reflected(k: f64) -> bool {
    !(k > -FRAC_PI_2 && k <= FRAC_PI_2)
}

#[inline]
fn covariant_flag(k: f64, p: f64) -> bool {
    is_reflected(k) && ((k <= 0.0) != (p <= 0.0))
}

/// The determination used by [`w1`].
pub fn covariant_branch(k: &TorusPoint, p: &TorusPoint) -> BranchFlags {
    BranchFlags([0, 1, 2].map(|i| covariant_flag(k.0[i], p.0[i])))
}

/// Channel energy with the shift-covariant half-angle determination.
pub fn w1(k: &TorusPoint, p: &TorusPoint) -> f64 {
    w1_branch(k, p, covariant_branch(k, p))
}

/// Bottom and top of the essential band `[m(k), M(k)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub bottom: f64,
    pub top: f64,
}

impl BandEdges {
    pub fn contains_strictly(&self, z: f64) -> bool {
        z > self.bottom && z < self.top
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    #[inline]
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Extremum::Min => a < b,
            Extremum::Max => a > b,
        }
    }
}

/// Dense scan on `[lo, hi]` followed by golden-section refinement around the
/// best scan node. Returns `(argument, value)`.
pub fn extremum_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, kind: Extremum) -> (f64, f64) {
    let step = (hi - lo) / SCAN_POINTS as f64;
    let mut best = (lo, f(lo));
    let mut best_idx = 0;
    for j in 1..=SCAN_POINTS {
        let x = if j == SCAN_POINTS { hi } else { lo + step * j as f64 };
        let v = f(x);
        if kind.better(v, best.1) {
            best = (x, v);
            best_idx = j;
        }
    }

    let mut a = if best_idx == 0 { lo } else { lo + step * (best_idx - 1) as f64 };
    let mut b = if best_idx == SCAN_POINTS { hi } else { lo + step * (best_idx + 1) as f64 };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_WIDTH {
        if kind.better(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    for (x, v) in [(a, f(a)), (b, f(b)), (c, fc), (d, fd)] {
        if kind.better(v, best.1) {
            best = (x, v);
        }
    }
    best
}

/// `m(k)` and `M(k)` over both half-angle determinations.
///
/// The problem separates by coordinate, so each edge is `ε(k)` plus three
/// 1-D extrema of `half(kᵢ, pᵢ, σᵢ) + 1 − cos pᵢ` over `pᵢ ∈ [−π, π]` and
/// `σᵢ ∈ {0, 1}`.
pub fn band_edges(k: &TorusPoint) -> BandEdges {
    let base = epsilon(k);
    let mut bottom = base;
    let mut top = base;
    for &ki in &k.0 {
        let g = |flip: bool| move |p: f64| half_term(ki, p, flip) + one_minus_cos(p);
        let lo = [false, true]
            .into_iter()
            .map(|s| extremum_1d(g(s), -PI, PI, Extremum::Min).1)
            .fold(f64::INFINITY, f64::min);
        let hi = [false, true]
            .into_iter()
            .map(|s| extremum_1d(g(s), -PI, PI, Extremum::Max).1)
            .fold(f64::NEG_INFINITY, f64::max);
        bottom += lo;
        top += hi;
    }
    BandEdges { bottom, top }
}

/// One coordinate of the covariant channel energy at a fixed quasi-momentum
/// component. Smooth on the circle except at [`ChannelAxis::cut`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelAxis {
    k: f64,
    reflected: bool,
}

/// Extremum of a [`ChannelAxis`] over the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisExtremum {
    pub value: f64,
    pub position: f64,
    /// Extremum sits on the cut, where the axis function is not smooth.
    pub on_cut: bool,
    /// Second derivative at `position` (meaningless when `on_cut`).
    pub curvature: f64,
}

impl ChannelAxis {
    pub fn new(k: f64) -> Self {
        let k = wrap_angle(k);
        ChannelAxis { k, reflected: is_reflected(k) }
    }

    /// π for the literal determination, 0 for the reflected one.
    pub fn cut(&self) -> f64 {
        if self.reflected {
            0.0
        } else {
            PI
        }
    }

    /// Circular distance from `p` to the cut.
    pub fn distance_to_cut(&self, p: f64) -> f64 {
        wrap_angle(p - self.cut()).abs()
    }

    #[inline]
    fn flag(&self, p: f64) -> bool {
        self.reflected && ((self.k <= 0.0) != (p <= 0.0))
    }

    /// Contribution of this coordinate to `w1`, `p` canonical.
    #[inline]
    pub fn value(&self, p: f64) -> f64 {
        axis_value(self.k, p, self.flag(p))
    }

    /// `6 − value(p)` without cancellation.
    #[inline]
    pub fn deficit(&self, p: f64) -> f64 {
        axis_deficit(self.k, p, self.flag(p))
    }

    /// Value along the open arc `cut + s`, `s ∈ (0, 2π)`, extended to the
    /// closed arc by one-sided limits.
    fn arc_value(&self, s: f64) -> f64 {
        let (p, flag) = self.arc_point(s);
        axis_value(self.k, p, flag)
    }

    fn arc_point(&self, s: f64) -> (f64, bool) {
        if self.reflected {
            let (p, nonpositive) = if s <= PI { (s, false) } else { (s - TAU, true) };
            (p, (self.k <= 0.0) != nonpositive)
        } else {
            (s - PI, false)
        }
    }

    pub fn extremum(&self, kind: Extremum) -> AxisExtremum {
        let (s, value) = extremum_1d(|s| self.arc_value(s), 0.0, TAU, kind);
        let (p, flag) = self.arc_point(s);
        let on_cut = s < 1e-9 || s > TAU - 1e-9;
        let h = 0.5 * (self.k + p);
        let sign = if flag { -1.0 } else { 1.0 };
        AxisExtremum {
            value,
            position: wrap_angle(p),
            on_cut,
            curvature: 0.25 * sign * h.cos() + p.cos(),
        }
    }
}

/// The covariant channel energy `w1(k, ·)` for a fixed `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Channel {
    pub axes: [ChannelAxis; 3],
}

/// Extremum of `w1(k, ·)` over T³.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelExtremum {
    pub value: f64,
    pub position: TorusPoint,
    /// Every coordinate of the extremum is an interior, smooth critical point.
    pub smooth: bool,
    /// Diagonal of the Hessian at the extremum.
    pub curvature: [f64; 3],
}

impl Channel {
    pub fn new(k: &TorusPoint) -> Self {
        Channel { axes: k.0.map(ChannelAxis::new) }
    }

    pub fn value(&self, p: &TorusPoint) -> f64 {
        (0..3).map(|i| self.axes[i].value(p.0[i])).sum()
    }

    pub fn extremum(&self, kind: Extremum) -> ChannelExtremum {
        let ext = self.axes.map(|a| a.extremum(kind));
        ChannelExtremum {
            value: ext.iter().map(|e| e.value).sum(),
            position: TorusPoint(ext.map(|e| e.position)),
            smooth: ext.iter().all(|e| !e.on_cut),
            curvature: ext.map(|e| e.curvature),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tp(v: [f64; 3]) -> TorusPoint {
        wrap(v).unwrap()
    }

    #[test]
    fn wrap_examples() {
        let p = tp([3.0 * PI, 0.0, 0.0]).coords();
        assert_abs_diff_eq!(p[0], PI, epsilon = 1e-12);
        assert_eq!(tp([0.0; 3]).coords(), [0.0; 3]);
        assert_eq!(tp([-PI, 0.0, 0.0]).coords(), [PI, 0.0, 0.0]);
        assert!(wrap([f64::NAN, 0.0, 0.0]).is_err());
        assert!(wrap([0.0, f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn epsilon_and_w0_examples() {
        assert_eq!(epsilon(&TorusPoint::ZERO), 0.0);
        assert_abs_diff_eq!(epsilon(&TorusPoint::PI), 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(epsilon(&tp([FRAC_PI_2; 3])), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w0(&TorusPoint::ZERO, 6.0), 6.0);
        assert_abs_diff_eq!(w0(&TorusPoint::PI, 6.0), 12.0, epsilon = 1e-14);
        for g in [-3.0, 0.0, 7.5] {
            assert_abs_diff_eq!(w0(&TorusPoint::PI, g) - w0(&TorusPoint::ZERO, g), 6.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn w1_examples() {
        let (o, c) = (TorusPoint::ZERO, TorusPoint::PI);
        assert_eq!(w1_literal(&o, &o), 0.0);
        assert_abs_diff_eq!(w1_literal(&c, &c), 18.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w1_literal(&o, &c), 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w1_branch(&o, &o, BranchFlags([true; 3])), 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w1(&c, &c), 18.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w1(&o, &c), 9.0, epsilon = 1e-14);
        assert_eq!(BranchFlags::all().count(), 8);
    }

    #[test]
    fn band_edges_at_distinguished_points() {
        let b = band_edges(&TorusPoint::ZERO);
        assert_abs_diff_eq!(b.bottom, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b.top, 9.375, epsilon = 1e-9);
        let b = band_edges(&TorusPoint::PI);
        assert_abs_diff_eq!(b.bottom, 8.625, epsilon = 1e-9);
        assert_abs_diff_eq!(b.top, 18.0, epsilon = 1e-9);
    }

    /// Independent oracle: 10⁵-point scan per coordinate and branch.
    fn dense_edges(k: &TorusPoint) -> (f64, f64) {
        let n = 100_000;
        let (mut lo, mut hi) = (epsilon(k), epsilon(k));
        for &ki in &k.0 {
            let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
            for j in 0..=n {
                let p = -PI + TAU * j as f64 / n as f64;
                for c in [1.0, -1.0] {
                    let v = 1.0 - c * ((ki + p) / 2.0).cos() + 1.0 - p.cos();
                    a = a.min(v);
                    b = b.max(v);
                }
            }
            lo += a;
            hi += b;
        }
        (lo, hi)
    }

    #[test]
    fn band_edges_match_dense_oracle() {
        let k = tp([PI, 0.0, 0.0]);
        let b = band_edges(&k);
        let (lo, hi) = dense_edges(&k);
        assert_abs_diff_eq!(b.bottom, lo, epsilon = 1e-8);
        assert_abs_diff_eq!(b.top, hi, epsilon = 1e-8);
        // Brute force on the 2-argument grid never beats the optimiser.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let k = tp([0, 1, 2].map(|_| rng.gen_range(-PI..PI)));
            let b = band_edges(&k);
            let (lo, hi) = dense_edges(&k);
            assert_abs_diff_eq!(b.bottom, lo, epsilon = 1e-6);
            assert_abs_diff_eq!(b.top, hi, epsilon = 1e-6);
        }
    }

    #[test]
    fn global_band_is_zero_to_eighteen() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in torus_grid(8) {
            let b = band_edges(&k);
            lo = lo.min(b.bottom);
            hi = hi.max(b.top);
        }
        assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, 18.0, epsilon = 1e-9);
    }

    #[test]
    fn covariant_branch_is_literal_near_origin_and_even_at_corner() {
        let p = tp([0.3, -2.9, 1.7]);
        assert_eq!(w1(&TorusPoint::ZERO, &p), w1_literal(&TorusPoint::ZERO, &p));
        let ax = ChannelAxis::new(PI);
        for p in [0.1, 1.0, 2.5, 3.1] {
            assert_abs_diff_eq!(ax.value(p), ax.value(-p), epsilon = 1e-14);
        }
        // Continuous across the torus seam at the corner.
        assert_abs_diff_eq!(ax.value(PI), ax.value(-PI + 1e-12), epsilon = 1e-11);
    }

    #[test]
    fn channel_extrema_at_distinguished_points() {
        let c = Channel::new(&TorusPoint::ZERO);
        let lo = c.extremum(Extremum::Min);
        assert_abs_diff_eq!(lo.value, 0.0, epsilon = 1e-14);
        assert!(lo.smooth);
        assert_abs_diff_eq!(lo.position.norm(), 0.0, epsilon = 1e-6);
        for a in lo.curvature {
            assert_abs_diff_eq!(a, 1.25, epsilon = 1e-9);
        }
        let hi = c.extremum(Extremum::Max);
        assert_abs_diff_eq!(hi.value, 9.0, epsilon = 1e-12);
        assert!(!hi.smooth);

        let c = Channel::new(&TorusPoint::PI);
        let hi = c.extremum(Extremum::Max);
        assert_abs_diff_eq!(hi.value, 18.0, epsilon = 1e-12);
        assert!(hi.smooth);
        assert_abs_diff_eq!(hi.position.distance(&TorusPoint::PI), 0.0, epsilon = 1e-6);
        let lo = c.extremum(Extremum::Min);
        assert_abs_diff_eq!(lo.value, 9.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_in_range(v in prop::array::uniform3(-50.0f64..50.0)) {
            let a = wrap(v).unwrap();
            let b = wrap(a.coords()).unwrap();
            prop_assert_eq!(a, b);
            for (x, y) in a.coords().iter().zip(v.iter()) {
                prop_assert!(*x > -PI && *x <= PI);
                let turns = (y - x) / TAU;
                prop_assert!((turns - turns.round()).abs() < 1e-9);
            }
        }

        #[test]
        fn w1_is_even(k in prop::array::uniform3(-3.1f64..3.1), p in prop::array::uniform3(-3.1f64..3.1)) {
            let (k, p) = (tp(k), tp(p));
            prop_assert!((w1_literal(&k, &p) - w1_literal(&k.negate(), &p.negate())).abs() < 1e-12);
            prop_assert!((w1(&k, &p) - w1(&k.negate(), &p.negate())).abs() < 1e-12);
        }

        #[test]
        fn shift_maps_each_branch_to_its_complement(
            k in prop::array::uniform3(-3.14f64..3.14),
            p in prop::array::uniform3(-3.14f64..3.14),
            bits in 0u8..8,
        ) {
            let (k, p) = (tp(k), tp(p));
            let sigma = BranchFlags([bits & 1 != 0, bits & 2 != 0, bits & 4 != 0]);
            // Each wrap of k+π or p+π shifts the half angle by π.
            let parity = BranchFlags([0, 1, 2].map(|i| (k.coords()[i] > 0.0) != (p.coords()[i] > 0.0)));
            let shifted = w1_branch(&k.shift_by_pi(), &p.shift_by_pi(), sigma);
            let complement = sigma.xor(parity);
            prop_assert!((shifted - (18.0 - w1_branch(&k, &p, complement))).abs() < 1e-11);
        }

        #[test]
        fn covariant_w1_reflects_under_shift(k in prop::array::uniform3(-3.14f64..3.14), p in prop::array::uniform3(-3.14f64..3.14)) {
            let (k, p) = (tp(k), tp(p));
            prop_assume!(k.coords().iter().all(|x| (x.abs() - FRAC_PI_2).abs() > 1e-9));
            let lhs = w1(&k.shift_by_pi(), &p.shift_by_pi());
            prop_assert!((lhs - (18.0 - w1(&k, &p))).abs() < 1e-11);
        }

        #[test]
        fn every_w1_value_lies_in_the_band(k in prop::array::uniform3(-3.14f64..3.14), p in prop::array::uniform3(-3.14f64..3.14)) {
            let (k, p) = (tp(k), tp(p));
            let b = band_edges(&k);
            for v in [w1(&k, &p), w1_literal(&k, &p)] {
                prop_assert!(v >= b.bottom - 1e-12 && v <= b.top + 1e-12);
                prop_assert!((0.0..=18.0).contains(&v));
            }
        }

        #[test]
        fn deficit_complements_value(k in -3.14f64..3.14, p in -3.14f64..3.14) {
            let ax = ChannelAxis::new(k);
            prop_assert!((ax.value(p) + ax.deficit(p) - 6.0).abs() < 1e-13);
        }
    }
}
