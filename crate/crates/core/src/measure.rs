//! Finite measure spaces, permutations of atoms and L_p norms.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, LabError, Result};

/// Default relative tolerance for floating-point equality assertions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative-or-absolute closeness with a single tolerance.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// A bijection of `{0, .., n-1}`; `image[x]` is where `x` is sent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &y in &image {
            if y >= n || seen[y] {
                return Err(LabError::InvalidMap(format!("{image:?} is not a bijection of 0..{n}")));
            }
            seen[y] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &y)| i == y)
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (x, &y) in self.image.iter().enumerate() {
            inv[y] = x;
        }
        Self { image: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            image: other.image.iter().map(|&y| self.image[y]).collect(),
        }
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = LabError;
    fn try_from(image: Vec<usize>) -> Result<Self> {
        Self::new(image)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.image
    }
}

#[derive(Deserialize)]
struct RawSpace {
    atoms: Vec<String>,
    weights: Vec<f64>,
}

/// Finitely many atoms with strictly positive masses.
///
/// Per-atom arrays elsewhere in the crate are index-aligned with `atoms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct FiniteMeasureSpace {
    atoms: Vec<String>,
    weights: Vec<f64>,
}

impl TryFrom<RawSpace> for FiniteMeasureSpace {
    type Error = LabError;
    fn try_from(raw: RawSpace) -> Result<Self> {
        Self::new(raw.atoms, raw.weights)
    }
}

impl FiniteMeasureSpace {
    pub fn new(atoms: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        check_len(atoms.len(), weights.len())?;
        if atoms.is_empty() {
            return Err(LabError::InvalidInput("measure space needs at least one atom".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(LabError::InvalidInput(format!(
                "weight of atom {} must be finite and > 0, got {w}",
                atoms[i]
            )));
        }
        let mut seen = HashSet::new();
        for a in &atoms {
            if !seen.insert(a.as_str()) {
                return Err(LabError::InvalidInput(format!("duplicate atom identifier {a:?}")));
            }
        }
        Ok(Self { atoms, weights })
    }

    /// Atoms named `x0, x1, ..` with the given weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let atoms = (0..weights.len()).map(|i| format!("x{i}")).collect();
        Self::new(atoms, weights)
    }

    /// `n` atoms of mass `1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self, tol: f64) -> bool {
        approx_eq(self.total_mass(), 1.0, tol)
    }

    /// Rescale to total mass one.
    pub fn normalize(&self) -> Self {
        let total = self.total_mass();
        Self {
            atoms: self.atoms.clone(),
            weights: self.weights.iter().map(|w| w / total).collect(),
        }
    }

    /// Same atoms, weights multiplied pointwise by `rho > 0`.
    pub fn reweight(&self, rho: &[f64]) -> Result<Self> {
        check_len(self.len(), rho.len())?;
        Self::new(
            self.atoms.clone(),
            self.weights.iter().zip(rho).map(|(w, r)| w * r).collect(),
        )
    }

    /// Integral of a nonnegative function.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        check_len(self.len(), f.len())?;
        Ok(self.weights.iter().zip(f).map(|(w, v)| w * v).sum())
    }
}

/// Radon–Nikodym derivative of one measure on the atoms against another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFunction {
    values: Vec<f64>,
}

impl DensityFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(LabError::InvalidInput(format!("density values must be > 0, got {v}")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn is_one(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| approx_eq(v, 1.0, tol))
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(LabError::InvalidExponent(format!("p must be finite and > 0, got {p}")))
    }
}

/// `Σ_x μ(x)|f(x)|^p`, the p-th power of the L_p quasi-norm.
pub fn lp_power_sum(f: &[Complex64], space: &FiniteMeasureSpace, p: f64) -> Result<f64> {
    check_exponent(p)?;
    check_len(space.len(), f.len())?;
    Ok(space
        .weights
        .iter()
        .zip(f)
        .map(|(w, v)| w * v.norm().powf(p))
        .sum())
}

/// `(Σ_x μ(x)|f(x)|^p)^{1/p}`.
pub fn lp_norm(f: &[Complex64], space: &FiniteMeasureSpace, p: f64) -> Result<f64> {
    lp_power_sum(f, space, p).map(|s| s.powf(1.0 / p))
}

/// Density of `θ_*μ` with respect to `μ`: `d(x) = μ(θ⁻¹x) / μ(x)`.
pub fn pushforward_density(theta: &Permutation, space: &FiniteMeasureSpace) -> Result<DensityFunction> {
    check_len(space.len(), theta.len())?;
    let inv = theta.inverse();
    Ok(DensityFunction {
        values: (0..space.len())
            .map(|x| space.weight(inv.apply(x)) / space.weight(x))
            .collect(),
    })
}

/// Lift a real vector to complex values.
pub fn complexify(f: &[f64]) -> Vec<Complex64> {
    f.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(v: &[f64]) -> Vec<Complex64> {
        complexify(v)
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let s = FiniteMeasureSpace::from_weights(vec![0.3, 2.0, 1.5]).unwrap();
        assert_eq!(lp_norm(&c(&[0.0; 3]), &s, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_one_on_probability_space() {
        let s = FiniteMeasureSpace::from_weights(vec![0.2, 0.5, 0.3]).unwrap();
        for p in [0.5, 1.0, 2.0, 3.7] {
            assert!((lp_norm(&c(&[1.0; 3]), &s, p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l1_norm_by_enumeration() {
        let s = FiniteMeasureSpace::from_weights(vec![1.0, 1.0]).unwrap();
        let f = c(&[1.0, 2.0]);
        let oracle: f64 = f.iter().map(|z| z.norm()).sum();
        assert_eq!(oracle, 3.0);
        assert!((lp_norm(&f, &s, 1.0).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn norm_errors() {
        let s = FiniteMeasureSpace::uniform(2).unwrap();
        assert!(matches!(lp_norm(&c(&[1.0, 2.0]), &s, 0.0), Err(LabError::InvalidExponent(_))));
        assert!(matches!(lp_norm(&c(&[1.0, 2.0]), &s, -1.0), Err(LabError::InvalidExponent(_))));
        assert!(matches!(lp_norm(&c(&[1.0]), &s, 1.0), Err(LabError::Shape { .. })));
    }

    #[test]
    fn construction_rejects_bad_weights_and_ids() {
        assert!(FiniteMeasureSpace::from_weights(vec![1.0, 0.0]).is_err());
        assert!(FiniteMeasureSpace::from_weights(vec![1.0, -2.0]).is_err());
        assert!(FiniteMeasureSpace::new(vec!["a".into(), "a".into()], vec![1.0, 1.0]).is_err());
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
    }

    #[test]
    fn density_identity_and_swap() {
        let s = FiniteMeasureSpace::from_weights(vec![1.0, 2.0]).unwrap();
        let id = pushforward_density(&Permutation::identity(2), &s).unwrap();
        assert!(id.is_one(0.0));

        let swap = Permutation::new(vec![1, 0]).unwrap();
        let d = pushforward_density(&swap, &s).unwrap();
        assert_eq!(d.values(), &[2.0, 0.5]);

        // ∫ f d(θ_*μ) = ∫ f∘θ dμ, enumerated over indicator functions.
        for a in 0..2 {
            let f: Vec<f64> = (0..2).map(|x| if x == a { 1.0 } else { 0.0 }).collect();
            let lhs: f64 = (0..2).map(|x| s.weight(x) * d.at(x) * f[x]).sum();
            let rhs: f64 = (0..2).map(|x| s.weight(x) * f[swap.apply(x)]).sum();
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn density_on_uniform_space_is_one() {
        let s = FiniteMeasureSpace::uniform(5).unwrap();
        let theta = Permutation::new(vec![3, 0, 4, 1, 2]).unwrap();
        assert!(pushforward_density(&theta, &s).unwrap().is_one(1e-15));
    }

    #[test]
    fn normalize_examples() {
        let s = FiniteMeasureSpace::from_weights(vec![1.0, 1.0]).unwrap().normalize();
        assert_eq!(s.weights(), &[0.5, 0.5]);
        let s = FiniteMeasureSpace::from_weights(vec![2.0, 6.0]).unwrap().normalize();
        assert_eq!(s.weights(), &[0.25, 0.75]);
        let p = FiniteMeasureSpace::from_weights(vec![0.25, 0.75]).unwrap();
        assert_eq!(p.normalize(), p);
    }

    #[test]
    fn json_shape() {
        let s = FiniteMeasureSpace::new(vec!["a".into(), "b".into()], vec![1.0, 2.0]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"atoms":["a","b"],"weights":[1.0,2.0]}"#);
        let back: FiniteMeasureSpace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<FiniteMeasureSpace>(r#"{"atoms":["a"],"weights":[0.0]}"#).is_err());
    }

    fn random_perm(n: usize, rng: &mut impl Rng) -> Permutation {
        use rand::seq::SliceRandom;
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Permutation::new(v).unwrap()
    }

    proptest! {
        #[test]
        fn lamperti_identity_preserves_norm(seed in any::<u64>(), n in 1usize..9, p in 0.3f64..6.0) {
            let mut rng = seeded_rng(seed);
            let s = FiniteMeasureSpace::from_weights((0..n).map(|_| rng.random_range(0.05..3.0)).collect()).unwrap();
            let theta = random_perm(n, &mut rng);
            let f: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
            let d = pushforward_density(&theta, &s).unwrap();
            let inv = theta.inverse();
            let g: Vec<Complex64> = (0..n).map(|x| f[inv.apply(x)] * d.at(x).powf(1.0 / p)).collect();
            let a = lp_norm(&f, &s, p).unwrap();
            let b = lp_norm(&g, &s, p).unwrap();
            prop_assert!(approx_eq(a, b, 1e-12));
        }

        #[test]
        fn density_cocycle_law(seed in any::<u64>(), n in 1usize..9) {
            let mut rng = seeded_rng(seed);
            let s = FiniteMeasureSpace::from_weights((0..n).map(|_| rng.random_range(0.05..3.0)).collect()).unwrap();
            let theta = random_perm(n, &mut rng);
            let rho = random_perm(n, &mut rng);
            let d_comp = pushforward_density(&theta.compose(&rho), &s).unwrap();
            let d_theta = pushforward_density(&theta, &s).unwrap();
            let d_rho = pushforward_density(&rho, &s).unwrap();
            let theta_inv = theta.inverse();
            for x in 0..n {
                // D(θρ) = D(θ) · (D(ρ) ∘ θ⁻¹)
                let rhs = d_theta.at(x) * d_rho.at(theta_inv.apply(x));
                prop_assert!(approx_eq(d_comp.at(x), rhs, 1e-12));
            }
        }

        #[test]
        fn norm_is_homogeneous(seed in any::<u64>(), n in 1usize..9, p in 0.3f64..6.0, lam in -5.0f64..5.0) {
            let mut rng = seeded_rng(seed);
            let s = FiniteMeasureSpace::from_weights((0..n).map(|_| rng.random_range(0.05..3.0)).collect()).unwrap();
            let f: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
            let g: Vec<Complex64> = f.iter().map(|z| z * lam).collect();
            let a = lp_norm(&g, &s, p).unwrap();
            let b = lam.abs() * lp_norm(&f, &s, p).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}
