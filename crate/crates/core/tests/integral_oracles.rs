//! Independent checks of the nested quadrature for `I(w)`.

use std::f64::consts::{PI, TAU};

use lplab_core::transfer::{cq_constant, profile_integral, RadialProfile};
use lplab_core::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain Monte Carlo for `∫_C ∫_0^∞ |φ(z + λ^{-1}w) − φ(z)|^2 dλ dz` with the
/// unit tent (`p = 1`, `q = 2`).
///
/// λ: half uniform on (0, 2), half Pareto(2, 1) on (2, ∞), whose tail matches
/// the `λ^{-2}` decay of the integrand. z: one of the two unit disks
/// `D(0, 1)`, `D(−w/λ, 1)` at random, then uniform in it; the mixture
/// density covers the whole support.
fn monte_carlo(w: Complex64, samples: usize, seed: u64) -> (f64, f64) {
    let tent = |z: Complex64| (1.0 - z.norm()).max(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let lambda = if rng.random::<bool>() {
            2.0 * rng.random::<f64>()
        } else {
            2.0 / (1.0 - rng.random::<f64>())
        };
        let d_lambda = if lambda < 2.0 { 0.25 } else { 1.0 / (lambda * lambda) };
        let shift = w / lambda;
        let center = if rng.random::<bool>() { Complex64::new(0.0, 0.0) } else { -shift };
        let r = rng.random::<f64>().sqrt();
        let z = center + Complex64::from_polar(r, TAU * rng.random::<f64>());
        let cover = usize::from(z.norm() < 1.0) + usize::from((z + shift).norm() < 1.0);
        let d_z = cover as f64 / (2.0 * PI);
        let x = (tent(z + shift) - tent(z)).powi(2) / (d_lambda * d_z);
        sum += x;
        sum2 += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    (mean, ((sum2 / n - mean * mean) / n).sqrt())
}

#[test]
fn quadrature_agrees_with_monte_carlo() {
    let tent = RadialProfile::tent();
    for (k, w) in [Complex64::new(1.0, 0.0), Complex64::from_polar(0.6, 2.0)].into_iter().enumerate() {
        let quad = profile_integral(&tent, 1.0, 2.0, w, 1e-9).unwrap();
        let (mc, se) = monte_carlo(w, 10_000_000, 17 + k as u64);
        assert!(se < 2e-3 * mc, "standard error too large: {se} vs {mc}");
        assert!((quad - mc).abs() <= 4.0 * se, "w = {w}: quadrature {quad}, Monte Carlo {mc} ± {se}");
    }
}

#[test]
fn dilation_rescales_the_constant() {
    // φ₂(z) = φ(z/2): z = 2z' gives a factor 4, u = 2u' a factor 2^{-p}.
    let tent = RadialProfile::tent();
    let wide = tent.dilated(2.0).unwrap();
    for (p, q) in [(1.0, 2.0), (1.0, 4.0), (2.0, 3.0), (0.5, 1.0)] {
        let c = cq_constant(&tent, p, q, 1e-10).unwrap();
        let c2 = cq_constant(&wide, p, q, 1e-10).unwrap();
        let want = 2f64.powf(2.0 - p) * c;
        assert!(((c2 - want) / want).abs() <= 1e-8, "({p}, {q}): {c2} vs {want}");
    }
}

#[test]
fn amplitude_scales_by_the_qth_power() {
    let tent = RadialProfile::tent();
    let tall = tent.scaled(3.0).unwrap();
    for (p, q) in [(1.0, 2.0), (2.0, 3.0)] {
        let c = cq_constant(&tent, p, q, 1e-10).unwrap();
        let c3 = cq_constant(&tall, p, q, 1e-9).unwrap();
        assert!((c3 / (3f64.powf(q) * c) - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn non_tent_profile_obeys_the_scaling_law() {
    let phi = RadialProfile::piecewise_linear(vec![0.0, 0.5, 1.5], vec![1.0, -0.5, 0.0]).unwrap();
    let (p, q) = (1.5, 2.5);
    let c = cq_constant(&phi, p, q, 1e-10).unwrap();
    for m in [0.3, 1.7, 5.0] {
        let w = Complex64::from_polar(m, 0.4 * m);
        let i = profile_integral(&phi, p, q, w, 1e-10).unwrap();
        assert!((i / (c * m.powf(p)) - 1.0).abs() <= 1e-7, "|w| = {m}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn homogeneous_and_rotation_invariant(m in 0.05f64..20.0, theta in 0.0f64..TAU, pq in 0usize..4) {
        let (p, q) = [(1.0, 2.0), (1.0, 4.0), (2.0, 3.0), (0.5, 1.0)][pq];
        let tent = RadialProfile::tent();
        let c = cq_constant(&tent, p, q, 1e-10).unwrap();
        let i = profile_integral(&tent, p, q, Complex64::from_polar(m, theta), 1e-9 * m.powf(p)).unwrap();
        prop_assert!((i / (c * m.powf(p)) - 1.0).abs() <= 1e-7);
    }
}
