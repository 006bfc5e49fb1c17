use std::f64::consts::TAU;

use serde::Serialize;

use super::cocycle::{check_cocycle, Cocycle, CoefficientGroup};
use super::NonsingularAction;
use crate::error::{LabError, Result};
use crate::measure::{FiniteMeasureSpace, Permutation};
use crate::quadrature::{integrate, QuadOptions};

/// Fiber of a skew product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fiber {
    /// `Z_N` with counting measure `1/N` per point.
    Cyclic(usize),
    /// The complex plane with Lebesgue measure; only handled pointwise.
    ComplexPlane,
}

/// `σ ⋊ c` on `X × Z_N`, materialized as a [`NonsingularAction`].
///
/// Atom `(x, k)` has index `x·N + k` and weight `μ(x)/N`.
#[derive(Debug, Clone)]
pub struct SkewProductAction {
    base: NonsingularAction,
    fiber: Fiber,
    twist: Cocycle,
    steps: Vec<Vec<usize>>,
    product: NonsingularAction,
}

/// Integer `k` with `angle ≈ 2πk/N`, if within `tol` (in units of `2π/N`).
pub fn grid_index(angle: f64, n: usize, tol: f64) -> Option<usize> {
    let scaled = angle * n as f64 / TAU;
    let k = scaled.round();
    if (scaled - k).abs() <= tol {
        Some((k as i64).rem_euclid(n as i64) as usize)
    } else {
        None
    }
}

/// Skew product of `σ` by a circle cocycle whose values lie on the `N`-th
/// roots of unity: `(x, k) ↦ (gx, k + n(g⁻¹)(x))` with `c = 2πn/N`.
pub fn skew_product(action: &NonsingularAction, c: &Cocycle, n: usize, tol: f64) -> Result<SkewProductAction> {
    c.expect_coeff(CoefficientGroup::Circle)?;
    if n == 0 {
        return Err(LabError::InvalidInput("fiber Z_N needs N ≥ 1".into()));
    }
    let report = check_cocycle(c, action, tol.max(1e-9))?;
    if !report.pass {
        return Err(LabError::InvalidInput(format!(
            "twist is not a cocycle (residual {:e})",
            report.max_residual
        )));
    }
    let mut steps = Vec::with_capacity(c.order());
    for (g, row) in c.values().iter().enumerate() {
        let mut r = Vec::with_capacity(row.len());
        for (x, v) in row.iter().enumerate() {
            r.push(grid_index(v.re, n, tol.max(1e-9)).ok_or_else(|| {
                LabError::NotRepresentable(format!(
                    "angle {} at (g = {}, x = {x}) is not a multiple of 2π/{n}",
                    v.re,
                    action.group().name(g)
                ))
            })?);
        }
        steps.push(r);
    }

    let base_space = action.space();
    let mut atoms = Vec::with_capacity(base_space.len() * n);
    let mut weights = Vec::with_capacity(base_space.len() * n);
    for x in 0..base_space.len() {
        for k in 0..n {
            atoms.push(format!("{}|{k}", base_space.atoms()[x]));
            weights.push(base_space.weight(x) / n as f64);
        }
    }
    let space = FiniteMeasureSpace::new(atoms, weights)?;
    let grp = action.group();
    let mut perms = Vec::with_capacity(grp.order());
    for g in 0..grp.order() {
        let ginv = grp.inv(g);
        let mut image = vec![0; space.len()];
        for x in 0..base_space.len() {
            for k in 0..n {
                image[x * n + k] = action.act(g, x) * n + (k + steps[ginv][x]) % n;
            }
        }
        perms.push(Permutation::new(image)?);
    }
    let product = NonsingularAction::new(grp.clone(), space, perms)?;
    Ok(SkewProductAction {
        base: action.clone(),
        fiber: Fiber::Cyclic(n),
        twist: c.clone(),
        steps,
        product,
    })
}

impl SkewProductAction {
    pub fn action(&self) -> &NonsingularAction {
        &self.product
    }

    pub fn base(&self) -> &NonsingularAction {
        &self.base
    }

    pub fn fiber(&self) -> Fiber {
        self.fiber
    }

    pub fn twist(&self) -> &Cocycle {
        &self.twist
    }

    pub fn fiber_size(&self) -> usize {
        match self.fiber {
            Fiber::Cyclic(n) => n,
            Fiber::ComplexPlane => unreachable!("complex-plane fibers are never materialized"),
        }
    }

    /// Index of `(x, k)` in the product space.
    pub fn index(&self, x: usize, k: usize) -> usize {
        x * self.fiber_size() + k
    }

    /// `(x, k)` for a product index.
    pub fn split(&self, i: usize) -> (usize, usize) {
        let n = self.fiber_size();
        (i / n, i % n)
    }

    /// Twist values as `Z_N` steps, `steps[g][x]`.
    pub fn steps(&self) -> &[Vec<usize>] {
        &self.steps
    }

    /// Number of `(g, x, k)` where `c(g)⊗1 ≠ (σ⋊c)_g(h) − h` in `Z_N`, with
    /// `h(x, k) = k` the fiber coordinate. Zero by construction.
    pub fn coboundary_defects(&self) -> usize {
        let n = self.fiber_size();
        let grp = self.product.group();
        let mut bad = 0;
        for g in 0..grp.order() {
            for i in 0..self.product.space().len() {
                let (x, k) = self.split(i);
                let (_, k_pre) = self.split(self.product.act_inv(g, i));
                if (k_pre + n - k) % n != self.steps[g][x] {
                    bad += 1;
                }
            }
        }
        bad
    }
}

/// The Maharam extension `(x, λ) ↦ (gx, s_g(x)·λ)` on `X × (0, ∞)`.
///
/// The half-line is never discretized; only the per-atom scale factors are
/// stored. With `s_g(x) = μ(x)/μ(gx) = 1/D(g⁻¹)(x)` the extension preserves
/// `μ ⊗ dλ`.
#[derive(Debug, Clone)]
pub struct MaharamDescriptor {
    base: NonsingularAction,
    lambda_scale: Vec<Vec<f64>>,
}

pub fn maharam_extension(action: &NonsingularAction) -> MaharamDescriptor {
    let grp = action.group();
    let lambda_scale = (0..grp.order())
        .map(|g| {
            let d = action.density(grp.inv(g));
            d.values().iter().map(|v| 1.0 / v).collect()
        })
        .collect();
    MaharamDescriptor {
        base: action.clone(),
        lambda_scale,
    }
}

impl MaharamDescriptor {
    pub fn base(&self) -> &NonsingularAction {
        &self.base
    }

    pub fn lambda_scale(&self, g: usize) -> &[f64] {
        &self.lambda_scale[g]
    }

    /// `g·(x, λ)`.
    pub fn act(&self, g: usize, x: usize, lambda: f64) -> (usize, f64) {
        (self.base.act(g, x), self.lambda_scale[g][x] * lambda)
    }

    /// Compare `Σ_x μ(x) ∫_a^b F(g·(x, λ)) dλ` with the same mass computed
    /// after the change of variables `λ' = s_g(x)λ` on the image atoms,
    /// `Σ_x μ(gx) ∫_{s a}^{s b} F(gx, λ') dλ'`. Returns the absolute gap.
    pub fn preservation_residual<F>(&self, g: usize, f: F, a: f64, b: f64) -> Result<f64>
    where
        F: Fn(usize, f64) -> f64,
    {
        let opts = QuadOptions::with_tol(1e-13);
        let mu = self.base.space();
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for x in 0..mu.len() {
            let (y, _) = self.act(g, x, 1.0);
            let s = self.lambda_scale[g][x];
            lhs += mu.weight(x) * integrate(|l| f(y, s * l), a, b, &opts)?.value;
            rhs += mu.weight(y) * integrate(|l| f(y, l), s * a, s * b, &opts)?.value;
        }
        Ok((lhs - rhs).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::cocycle::coboundary;
    use crate::group::{check_action, FiniteGroup};
    use crate::measure::complexify;
    use std::f64::consts::PI;

    fn swap(weights: Vec<f64>) -> NonsingularAction {
        NonsingularAction::new(
            FiniteGroup::cyclic(2).unwrap(),
            FiniteMeasureSpace::from_weights(weights).unwrap(),
            vec![Permutation::identity(2), Permutation::new(vec![1, 0]).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn zero_twist_gives_untwisted_product() {
        let a = swap(vec![1.0, 2.0]);
        let sp = skew_product(&a, &Cocycle::zero(CoefficientGroup::Circle, 2, 2), 3, 1e-12).unwrap();
        let p = sp.action();
        assert!(check_action(p).pass);
        for i in 0..6 {
            let (x, k) = sp.split(i);
            assert_eq!(sp.split(p.act(1, i)), (a.act(1, x), k));
        }
        assert_eq!(sp.coboundary_defects(), 0);
    }

    #[test]
    fn pi_twist_on_one_atom_is_fiber_swap() {
        let a = NonsingularAction::trivial(FiniteGroup::cyclic(2).unwrap(), FiniteMeasureSpace::uniform(1).unwrap());
        let c = Cocycle::from_real(CoefficientGroup::Circle, vec![vec![0.0], vec![PI]]);
        let sp = skew_product(&a, &c, 2, 1e-12).unwrap();
        assert_eq!(sp.action().perm(1).images(), &[1, 0]);
        assert_eq!(sp.action().space().weights(), &[0.5, 0.5]);
        assert!(check_action(sp.action()).pass);
        assert_eq!(sp.coboundary_defects(), 0);
    }

    #[test]
    fn coboundary_twist_is_conjugate_to_untwisted() {
        let n = 4;
        let a = NonsingularAction::new(
            FiniteGroup::cyclic(3).unwrap(),
            FiniteMeasureSpace::from_weights(vec![1.0, 2.0, 3.0]).unwrap(),
            vec![
                Permutation::identity(3),
                Permutation::new(vec![1, 2, 0]).unwrap(),
                Permutation::new(vec![2, 0, 1]).unwrap(),
            ],
        )
        .unwrap();
        let f_steps = [1usize, 3, 2];
        let f: Vec<f64> = f_steps.iter().map(|&k| TAU * k as f64 / n as f64).collect();
        let c = coboundary(CoefficientGroup::Circle, &complexify(&f), &a).unwrap();
        let twisted = skew_product(&a, &c, n, 1e-9).unwrap();
        let plain = skew_product(&a, &Cocycle::zero(CoefficientGroup::Circle, 3, 3), n, 1e-9).unwrap();

        // Φ(x, k) = (x, k − f(x)) intertwines the twisted and untwisted actions.
        let phi = |i: usize| {
            let (x, k) = twisted.split(i);
            twisted.index(x, (k + n - f_steps[x]) % n)
        };
        for g in 0..3 {
            for i in 0..12 {
                assert_eq!(phi(twisted.action().act(g, i)), plain.action().act(g, phi(i)));
            }
        }
        let sizes = |s: &SkewProductAction| {
            let mut v: Vec<usize> = s.action().orbits().iter().map(Vec::len).collect();
            v.sort();
            v
        };
        assert_eq!(sizes(&twisted), sizes(&plain));
    }

    #[test]
    fn off_grid_twist_is_rejected() {
        let a = NonsingularAction::trivial(FiniteGroup::cyclic(2).unwrap(), FiniteMeasureSpace::uniform(1).unwrap());
        let c = Cocycle::from_real(CoefficientGroup::Circle, vec![vec![0.0], vec![PI]]);
        assert!(matches!(skew_product(&a, &c, 3, 1e-9), Err(LabError::NotRepresentable(_))));
    }

    #[test]
    fn maharam_scales() {
        let a = swap(vec![1.0, 2.0]);
        let m = maharam_extension(&a);
        assert_eq!(m.lambda_scale(1), &[0.5, 2.0]);
        assert_eq!(m.lambda_scale(0), &[1.0, 1.0]);
        let mp = maharam_extension(&swap(vec![1.5, 1.5]));
        assert!(mp.lambda_scale(1).iter().all(|&s| s == 1.0));
    }

    #[test]
    fn maharam_preserves_product_measure() {
        let a = swap(vec![1.0, 2.0]);
        let m = maharam_extension(&a);
        let f = |x: usize, l: f64| (1.0 + x as f64) * (-l).exp() * (3.0 * l).sin().powi(2);
        for (lo, hi) in [(0.1, 1.0), (0.5, 4.0), (2.0, 2.5)] {
            assert!(m.preservation_residual(1, f, lo, hi).unwrap() < 1e-12);
        }
    }
}
