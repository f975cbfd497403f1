//! Independent reference values for torus integrals of the channel energy.
//!
//! For `z` outside the range of `w₁(k, ·)`,
//! `1/(w − z) = ∫₀^∞ e^{−s(w − z)} ds`, and since `w₁` is a sum of one
//! function per coordinate the torus integral factorizes:
//! `I(k; z) = ∫₀^∞ e^{−s·gap} Πᵢ Gᵢ(s) ds` with
//! `Gᵢ(s) = ∫ e^{−s(φᵢ(p) − minφᵢ)} dp`. Everything is reduced to 1-D
//! Gauss–Legendre sums on graded panels.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use gauss_quad::GaussLegendre;

fn sin2(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

fn cos2(x: f64) -> f64 {
    let c = (0.5 * x).cos();
    2.0 * c * c
}

/// One coordinate of the channel energy: `1 − cos k + (1 ∓ cos((k+p)/2)) + 1 − cos p`,
/// where the sign flips when `|k| > π/2` and `k`, `p` lie on opposite sides of 0.
pub fn axis_energy(k: f64, p: f64) -> f64 {
    let flip = !(k > -FRAC_PI_2 && k <= FRAC_PI_2) && ((k <= 0.0) != (p <= 0.0));
    let h = 0.5 * (k + p);
    sin2(k) + if flip { cos2(h) } else { sin2(h) } + sin2(p)
}

/// `6 − axis_energy`, without cancellation.
pub fn axis_gap_to_top(k: f64, p: f64) -> f64 {
    let flip = !(k > -FRAC_PI_2 && k <= FRAC_PI_2) && ((k <= 0.0) != (p <= 0.0));
    let h = 0.5 * (k + p);
    cos2(k) + if flip { sin2(h) } else { cos2(h) } + cos2(p)
}

/// Start of the arc `[c, c + 2π]` on which `axis_energy(k, ·)` is smooth.
fn arc_start(k: f64) -> f64 {
    if k > -FRAC_PI_2 && k <= FRAC_PI_2 {
        -PI
    } else {
        0.0
    }
}

/// Canonical representative of an arc coordinate.
fn canon(p: f64) -> f64 {
    if p > PI {
        p - 2.0 * PI
    } else {
        p
    }
}

/// Minimum of `f` on `[a, b]`: dense scan then ternary refinement.
fn minimize(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let n = 20000;
    let mut best = (a, f(a));
    for j in 1..=n {
        let x = a + (b - a) * j as f64 / n as f64;
        let x = if j == n { b } else { x };
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let step = (b - a) / n as f64;
    let (mut lo, mut hi) = ((best.0 - step).max(a), (best.0 + step).min(b));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let x = 0.5 * (lo + hi);
    let v = f(x);
    if v < best.1 {
        (x, v)
    } else {
        best
    }
}

struct Axis {
    /// Arc `[lo, lo + 2π]`; `f` is evaluated at `canon(s)`.
    lo: f64,
    f: Box<dyn Fn(f64) -> f64>,
    min: f64,
    argmin: f64,
    /// Second derivative at an interior minimizer.
    curvature: Option<f64>,
}

impl Axis {
    fn new(f: Box<dyn Fn(f64) -> f64>, lo: f64) -> Self {
        let hi = lo + 2.0 * PI;
        // One-sided limits at the arc ends.
        let eps = 1e-13;
        let g = |s: f64| f(canon(s.clamp(lo + eps, hi - eps)));
        let (x, min) = minimize(&g, lo, hi);
        let curvature = if x - lo > 1e-6 && hi - x > 1e-6 {
            let h = 1e-4;
            Some((g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h))
        } else {
            None
        };
        Axis { lo, f, min, argmin: x, curvature }
    }

    /// Panel boundaries on the arc, graded geometrically towards the minimizer.
    fn panels(&self) -> Vec<f64> {
        let (a, b, c) = (self.lo, self.lo + 2.0 * PI, self.argmin);
        let mut pts = vec![a, b];
        if c > a && c < b {
            pts.push(c);
        }
        for j in 1..=52 {
            let d = (2f64).powi(-j) * 2.0 * PI;
            for x in [c - d, c + d] {
                if x > a && x < b {
                    pts.push(x);
                }
            }
        }
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup();
        pts
    }

    fn g(&self, s: f64, panels: &[f64], rule: &[(f64, f64)]) -> f64 {
        let mut total = 0.0;
        for w in panels.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            let mut acc = 0.0;
            for &(x, wx) in rule {
                let p = canon(mid + half * x);
                acc += wx * (-s * ((self.f)(p) - self.min).max(0.0)).exp();
            }
            total += half * acc;
        }
        total
    }
}

/// `∫_{T³} dt / (w₁(k,t) − z)` for `z` below or above the channel range
/// (including the threshold `z = min` when every minimizer is interior).
pub fn resolvent_integral(k: [f64; 3], z: f64) -> f64 {
    // Every channel value lies in [0, 18]; z must be outside the range.
    let below = z <= 9.0;
    let axes: Vec<Axis> = k
        .iter()
        .map(|&ki| {
            let f: Box<dyn Fn(f64) -> f64> = if below {
                Box::new(move |p| axis_energy(ki, p))
            } else {
                Box::new(move |p| axis_gap_to_top(ki, p))
            };
            Axis::new(f, arc_start(ki))
        })
        .collect();
    let total_min: f64 = axes.iter().map(|a| a.min).sum();
    // Below: w − z = Σφ − z. Above: z − w = (z − 18) + Σ(6 − φ).
    let gap = if below { total_min - z } else { z - 18.0 + total_min };
    assert!(gap >= -1e-12, "oracle needs z outside the channel range (gap {gap})");
    let gap = gap.max(0.0);

    let rule = GaussLegendre::new(16).unwrap().as_node_weight_pairs().to_vec();
    let panels: Vec<Vec<f64>> = axes.iter().map(Axis::panels).collect();
    let (x_lo, x_hi) = (-40.0, 44.0);
    let mut total = 0.0;
    let mut x = x_lo;
    while x < x_hi {
        let (a, b) = (x, x + 0.5);
        let half = 0.25;
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for &(u, wu) in &rule {
            let s = (mid + half * u).exp();
            let prod: f64 = axes.iter().zip(&panels).map(|(ax, p)| ax.g(s, p, &rule)).product();
            acc += wu * s * (-s * gap).exp() * prod;
        }
        total += half * acc;
        x = b;
    }
    // Tail beyond s = e^{x_hi}: Laplace asymptotics of each factor.
    if gap * x_hi.exp() < 50.0 {
        if let Some(c) = axes.iter().map(|a| a.curvature).collect::<Option<Vec<f64>>>() {
            let s0 = x_hi.exp();
            let pref: f64 = c.iter().map(|ci| (2.0 * PI / ci).sqrt()).product();
            // ∫_{s0}^∞ s^{-3/2} e^{-s gap} ds ≈ 2/√s0 for gap·s0 ≪ 1.
            total += pref * 2.0 / s0.sqrt() * (-gap * s0).exp();
        }
    }
    if below {
        total
    } else {
        -total
    }
}

/// Plain midpoint sum of `f` on the `n³` grid `−π + (j + ½)h`.
pub fn midpoint(n: usize, f: impl Fn([f64; 3]) -> f64) -> f64 {
    let h = 2.0 * PI / n as f64;
    let x: Vec<f64> = (0..n).map(|j| -PI + (j as f64 + 0.5) * h).collect();
    let mut s = 0.0;
    for &a in &x {
        for &b in &x {
            for &c in &x {
                s += f([a, b, c]);
            }
        }
    }
    s * h * h * h
}

/// Channel energy assembled from [`axis_energy`].
pub fn channel_energy(k: [f64; 3], t: [f64; 3]) -> f64 {
    (0..3).map(|i| axis_energy(k[i], t[i])).sum()
}
