mod common;

use friedrichs::asymptotics::{expansion_constant, expansion_fit, quadratic_form_limit, resonance_norms};
use friedrichs::lattice::{w1, wrap, TorusPoint};
use friedrichs::spectral::BandEnd;
use friedrichs::Error;

/// Two-term Taylor expansion of `w₁(0̄, t)/|t|²`.
fn taylor_ratio(t: [f64; 3]) -> f64 {
    let r2: f64 = t.iter().map(|x| x * x).sum();
    let r4: f64 = t.iter().map(|x| x.powi(4)).sum();
    0.625 - r4 * (1.0 / 384.0 + 1.0 / 24.0) / r2
}

#[test]
fn ratio_matches_taylor_expansion() {
    for dir in [[1.0f64, 0.0, 0.0], [0.6, 0.8, 0.0], [1.0, -1.0, 1.0], [0.2, 0.3, -0.9]] {
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        for r in [1e-2, 1e-3] {
            let t = dir.map(|x| r * x / n);
            let ratio = w1(&TorusPoint::ZERO, &TorusPoint::new(t).unwrap()) / (r * r);
            assert!((ratio - taylor_ratio(t)).abs() < 1e-8, "{t:?}");
            assert!((ratio - 0.625).abs() < 1e-5);
        }
    }
}

#[test]
fn quadratic_limit() {
    let q = quadratic_form_limit(&[0.5, 0.1, 0.01, 0.001]).unwrap();
    assert!((q.limit - 0.625).abs() < 1e-9);
    assert!(q.c1 > 0.0 && q.c2 <= 0.625 + 1e-12);
}

fn diagonal(radii: &[f64]) -> Vec<TorusPoint> {
    let d = 1.0 / 3f64.sqrt();
    radii.iter().map(|r| wrap([r * d; 3]).unwrap()).collect()
}

const Z: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];
const K: [f64; 5] = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];

#[test]
fn square_root_expansion_at_both_ends() {
    let mu0 = (6.0 / common::resolvent_integral([0.0; 3], 0.0)).sqrt();
    let reference = expansion_constant() * mu0 * mu0;
    let lower = expansion_fit(BandEnd::Lower, &Z.map(|d| -d), &diagonal(&K), 1e-9).unwrap();
    let upper_k: Vec<TorusPoint> = diagonal(&K).iter().map(TorusPoint::shift_by_pi).collect();
    let upper = expansion_fit(BandEnd::Upper, &Z.map(|d| 18.0 + d), &upper_k, 1e-9).unwrap();
    for (f, sign) in [(&lower, 1.0), (&upper, -1.0)] {
        assert!((f.fitted_exponent - 0.5).abs() < 0.005, "{}", f.fitted_exponent);
        assert!((f.fitted_prefactor - sign * reference).abs() < 0.02 * reference, "{}", f.fitted_prefactor);
        let k_ref = sign * reference * 1.2f64.sqrt();
        assert!((f.k_prefactor - k_ref).abs() < 0.02 * reference, "{}", f.k_prefactor);
        assert!((f.k_exponent - 1.0).abs() < 0.05);
        assert!(f.remainder_constant.is_finite());
    }
}

#[test]
fn expansion_rejects_bad_probes() {
    let ks = diagonal(&K);
    assert!(matches!(expansion_fit(BandEnd::Lower, &[0.5, -0.1], &ks, 1e-7), Err(Error::InvalidArgument(_))));
    assert!(matches!(expansion_fit(BandEnd::Lower, &[-0.1], &ks, 1e-7), Err(Error::InvalidArgument(_))));
    let far = expansion_fit(BandEnd::Lower, &[-1e-6, -1e-3, -3.0, -30.0, -300.0], &ks, 1e-7);
    assert!(matches!(far, Err(Error::Accuracy { .. })), "{far:?}");
}

#[test]
fn resonance_is_integrable_but_not_square_integrable() {
    let j0 = common::resolvent_integral([0.0; 3], 0.0);
    let mu0 = (6.0 / j0).sqrt();
    let deltas: Vec<f64> = (3..=9).map(|j| 2f64.powi(-j)).collect();
    let r = resonance_norms(BandEnd::Lower, &deltas, 1e-9).unwrap();
    assert!((r.l1_value - mu0 * j0).abs() < 1e-6, "{} vs {}", r.l1_value, mu0 * j0);
    assert!((r.divergence_exponent - 1.0).abs() < 0.05);
    assert!(r.truncated_l2_values.windows(2).all(|w| w[1] > w[0]));
}
