//! Lamperti isometries of `ℓ_p(X, μ)`, affine actions built from them, the
//! displacement function `ψ`, and absorption of the phase cocycle into a
//! skew product.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, LabError, Result};
use crate::group::{
    check_cocycle_in, grid_index, per_element, skew_product, Cocycle, CoefficientGroup, FiniteGroup,
    NonsingularAction,
};
use crate::measure::{lp_power_sum, pushforward_density, DensityFunction, FiniteMeasureSpace, Permutation};

/// `(Tf)(x) = D(x)^{1/p} e^{iω(x)} f(θ⁻¹x)` with `D = d θ_*μ / dμ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LampertiIsometry {
    theta: Permutation,
    theta_inv: Permutation,
    phase: Vec<f64>,
    p: f64,
    space: FiniteMeasureSpace,
    density: DensityFunction,
}

impl LampertiIsometry {
    pub fn new(theta: Permutation, phase: Vec<f64>, p: f64, space: FiniteMeasureSpace) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(LabError::InvalidExponent(format!("p must be > 0, got {p}")));
        }
        check_len(space.len(), phase.len())?;
        let density = pushforward_density(&theta, &space)?;
        Ok(Self {
            theta_inv: theta.inverse(),
            theta,
            phase,
            p,
            space,
            density,
        })
    }

    pub fn identity(space: FiniteMeasureSpace, p: f64) -> Result<Self> {
        let n = space.len();
        Self::new(Permutation::identity(n), vec![0.0; n], p, space)
    }

    pub fn theta(&self) -> &Permutation {
        &self.theta
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn density(&self) -> &DensityFunction {
        &self.density
    }

    /// Multiplier at atom `x`: `D(x)^{1/p} e^{iω(x)}`.
    #[inline]
    pub fn multiplier(&self, x: usize) -> Complex64 {
        Complex64::from_polar(self.density.at(x).powf(1.0 / self.p), self.phase[x])
    }

    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.space.len(), f.len())?;
        Ok((0..f.len())
            .map(|x| self.multiplier(x) * f[self.theta_inv.apply(x)])
            .collect())
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(LabError::InvalidExponent(format!(
                "exponent mismatch: {} vs {}",
                self.p, other.p
            )));
        }
        if self.space != other.space {
            return Err(LabError::InvalidInput("isometries live on different spaces".into()));
        }
        Ok(())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let theta = self.theta.compose(&other.theta);
        let phase = (0..self.phase.len())
            .map(|x| self.phase[x] + other.phase[self.theta_inv.apply(x)])
            .collect();
        Self::new(theta, phase, self.p, self.space.clone())
    }

    pub fn inverse(&self) -> Self {
        let phase = (0..self.phase.len())
            .map(|x| -self.phase[self.theta.apply(x)])
            .collect();
        Self::new(self.theta_inv.clone(), phase, self.p, self.space.clone()).expect("valid by construction")
    }

    /// The same permutation and phase acting on `L_q`.
    pub fn with_exponent(&self, q: f64) -> Result<Self> {
        Self::new(self.theta.clone(), self.phase.clone(), q, self.space.clone())
    }

    /// Same map, written against the measure `ν = ρμ`.
    pub fn with_space(&self, space: FiniteMeasureSpace) -> Result<Self> {
        Self::new(self.theta.clone(), self.phase.clone(), self.p, space)
    }

    /// Largest angular gap between two isometries with the same
    /// permutation; infinite when the permutations differ.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.theta != other.theta || self.p != other.p {
            return f64::INFINITY;
        }
        self.phase
            .iter()
            .zip(&other.phase)
            .map(|(a, b)| crate::group::angle_dist(*a, *b))
            .fold(0.0, f64::max)
    }
}

/// `f ↦ L f + t`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub linear: LampertiIsometry,
    pub translation: Vec<Complex64>,
}

impl AffineMap {
    pub fn translation(space: FiniteMeasureSpace, p: f64, t: Vec<Complex64>) -> Result<Self> {
        check_len(space.len(), t.len())?;
        Ok(Self {
            linear: LampertiIsometry::identity(space, p)?,
            translation: t,
        })
    }

    pub fn linear(l: LampertiIsometry) -> Self {
        let n = l.space().len();
        Self {
            linear: l,
            translation: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = self.linear.apply(f)?;
        for (o, t) in out.iter_mut().zip(&self.translation) {
            *o += t;
        }
        Ok(out)
    }

    /// `self ∘ other = (L₁L₂, L₁t₂ + t₁)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let linear = self.linear.compose(&other.linear)?;
        let mut translation = self.linear.apply(&other.translation)?;
        for (o, t) in translation.iter_mut().zip(&self.translation) {
            *o += t;
        }
        Ok(Self { linear, translation })
    }

    /// Image of the origin.
    pub fn origin_image(&self) -> &[Complex64] {
        &self.translation
    }
}

/// Validation residuals of an [`AffineAction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineReport {
    /// Max phase gap in `linear(g)∘linear(h)` vs `linear(gh)`.
    pub homomorphism_residual: f64,
    /// Max of `|c(gh) − c(g) − linear(g)c(h)|`.
    pub cocycle_residual: f64,
}

/// `α_g(f) = ω(g)σ^{p,μ}_g f + c(g)` for a finite group.
#[derive(Debug, Clone)]
pub struct AffineAction {
    action: NonsingularAction,
    phase: Cocycle,
    translation: Vec<Vec<Complex64>>,
    p: f64,
    linear: Vec<LampertiIsometry>,
    report: AffineReport,
}

impl AffineAction {
    /// Validates that the linear part is a homomorphism and that the
    /// translation part is a cocycle for it, both within `tol` (relative
    /// to the size of the translation part).
    pub fn new(
        action: NonsingularAction,
        phase: Cocycle,
        translation: Vec<Vec<Complex64>>,
        p: f64,
        tol: f64,
    ) -> Result<Self> {
        phase.expect_coeff(CoefficientGroup::Circle)?;
        let order = action.group().order();
        check_len(order, phase.order())?;
        check_len(order, translation.len())?;
        for row in &translation {
            check_len(action.space().len(), row.len())?;
        }
        let linear = (0..order)
            .map(|g| {
                LampertiIsometry::new(
                    action.perm(g).clone(),
                    phase.real_at(g),
                    p,
                    action.space().clone(),
                )
            })
            .collect::<Result<Vec<_>>>()?;

        let grp = action.group();
        let mut hom = 0.0f64;
        let mut coc = 0.0f64;
        for g in 0..order {
            for h in 0..order {
                let gh = grp.mul(g, h);
                hom = hom.max(linear[g].compose(&linear[h])?.distance(&linear[gh]));
                let moved = linear[g].apply(&translation[h])?;
                for x in 0..action.space().len() {
                    coc = coc.max((translation[gh][x] - translation[g][x] - moved[x]).norm());
                }
            }
        }
        let scale = translation.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
        let report = AffineReport {
            homomorphism_residual: hom,
            cocycle_residual: coc,
        };
        if hom > tol {
            return Err(LabError::InvalidInput(format!(
                "linear part is not a homomorphism (phase residual {hom:e})"
            )));
        }
        if coc > tol * scale {
            return Err(LabError::InvalidInput(format!(
                "translation part is not a cocycle (residual {coc:e})"
            )));
        }
        Ok(Self {
            action,
            phase,
            translation,
            p,
            linear,
            report,
        })
    }

    /// Zero phase, translation part `c(g) = σ^{p,μ}_g v − v`.
    pub fn from_coboundary(action: NonsingularAction, v: &[Complex64], p: f64) -> Result<Self> {
        let order = action.group().order();
        let phase = Cocycle::zero(CoefficientGroup::Circle, order, action.space().len());
        Self::from_phase_and_coboundary(action, phase, v, p)
    }

    /// Translation part `c(g) = π(g)v − v` for `π(g) = ω(g)σ^{p,μ}_g`.
    pub fn from_phase_and_coboundary(action: NonsingularAction, phase: Cocycle, v: &[Complex64], p: f64) -> Result<Self> {
        check_len(action.space().len(), v.len())?;
        let mut translation = Vec::with_capacity(action.group().order());
        for g in 0..action.group().order() {
            let l = LampertiIsometry::new(action.perm(g).clone(), phase.real_at(g), p, action.space().clone())?;
            let moved = l.apply(v)?;
            translation.push(moved.iter().zip(v).map(|(a, b)| a - b).collect());
        }
        Self::new(action, phase, translation, p, 1e-9)
    }

    pub fn action(&self) -> &NonsingularAction {
        &self.action
    }

    pub fn group(&self) -> &FiniteGroup {
        self.action.group()
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        self.action.space()
    }

    pub fn phase(&self) -> &Cocycle {
        &self.phase
    }

    pub fn translation(&self, g: usize) -> &[Complex64] {
        &self.translation[g]
    }

    pub fn translations(&self) -> &[Vec<Complex64>] {
        &self.translation
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn linear(&self, g: usize) -> &LampertiIsometry {
        &self.linear[g]
    }

    pub fn report(&self) -> AffineReport {
        self.report
    }

    pub fn has_zero_phase(&self, tol: f64) -> bool {
        self.phase
            .values()
            .iter()
            .flatten()
            .all(|w| crate::group::angle_dist(w.re, 0.0) <= tol)
    }

    /// `α_g` as an affine map.
    pub fn map(&self, g: usize) -> AffineMap {
        AffineMap {
            linear: self.linear[g].clone(),
            translation: self.translation[g].clone(),
        }
    }

    pub fn apply(&self, g: usize, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.map(g).apply(f)
    }

    pub fn to_doc(&self) -> AffineActionDoc {
        let grp = self.group();
        let linear = (0..grp.order())
            .map(|g| {
                (
                    grp.name(g).to_string(),
                    LinearDoc {
                        perm: self.action.perm(g).images().to_vec(),
                        phase: self.phase.real_at(g),
                    },
                )
            })
            .collect();
        let translation = (0..grp.order())
            .map(|g| {
                (
                    grp.name(g).to_string(),
                    self.translation[g].iter().map(|z| [z.re, z.im]).collect(),
                )
            })
            .collect();
        AffineActionDoc {
            linear,
            translation,
            p: self.p,
        }
    }

    /// Rebuild from a document; group multiplication and atom weights are
    /// not part of the document and come from `group` and `space`.
    pub fn from_doc(doc: AffineActionDoc, group: FiniteGroup, space: FiniteMeasureSpace, tol: f64) -> Result<Self> {
        let linear = per_element(&group, doc.linear)?;
        let translation = per_element(&group, doc.translation)?;
        let perms = linear
            .iter()
            .map(|l| Permutation::new(l.perm.clone()))
            .collect::<Result<Vec<_>>>()?;
        let phases = linear.into_iter().map(|l| l.phase).collect();
        let action = NonsingularAction::new_checked(group, space, perms)?;
        let translation = translation
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        Self::new(
            action,
            Cocycle::from_real(CoefficientGroup::Circle, phases),
            translation,
            doc.p,
            tol,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDoc {
    pub perm: Vec<usize>,
    pub phase: Vec<f64>,
}

/// `{"linear": {g: {"perm", "phase"}}, "translation": {g: [[re, im]..]}, "p"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineActionDoc {
    pub linear: BTreeMap<String, LinearDoc>,
    pub translation: BTreeMap<String, Vec<[f64; 2]>>,
    pub p: f64,
}

/// `ψ(g) = ‖α_g(0)‖_p^p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplacementFunction {
    pub values: Vec<f64>,
}

impl DisplacementFunction {
    /// Max of `|ψ(e)|` and `|ψ(g⁻¹) − ψ(g)|`.
    pub fn symmetry_residual(&self, group: &FiniteGroup) -> f64 {
        let mut r = self.values[group.identity()].abs();
        for g in 0..group.order() {
            r = r.max((self.values[g] - self.values[group.inv(g)]).abs());
        }
        r
    }
}

pub fn psi(alpha: &AffineAction) -> DisplacementFunction {
    DisplacementFunction {
        values: alpha
            .translation
            .iter()
            .map(|c| lp_power_sum(c, alpha.space(), alpha.p).expect("shapes validated"))
            .collect(),
    }
}

/// Move the phase cocycle (values on the `N`-th roots of unity) into the
/// space: the result lives on `X × Z_N`, has zero phase, and translation
/// `c̃(g)(x, k) = e^{2πik/N} c(g)(x)`, so `ψ` is unchanged.
pub fn absorb_phase(alpha: &AffineAction, n: usize, tol: f64) -> Result<AffineAction> {
    for (g, row) in alpha.phase.values().iter().enumerate() {
        for (x, w) in row.iter().enumerate() {
            if grid_index(w.re, n, tol.max(1e-9)).is_none() {
                return Err(LabError::NotRepresentable(format!(
                    "phase {} at (g = {}, x = {x}) is not a multiple of 2π/{n}",
                    w.re,
                    alpha.group().name(g)
                )));
            }
        }
    }
    let sp = skew_product(&alpha.action, &alpha.phase, n, tol)?;
    let product = sp.action().clone();
    let m = product.space().len();
    let translation = (0..alpha.group().order())
        .map(|g| {
            (0..m)
                .map(|i| {
                    let (x, k) = sp.split(i);
                    let u = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
                    u * alpha.translation[g][x]
                })
                .collect()
        })
        .collect();
    let order = alpha.group().order();
    AffineAction::new(
        product,
        Cocycle::zero(CoefficientGroup::Circle, order, m),
        translation,
        alpha.p,
        tol.max(1e-9),
    )
}

/// Both sides of `‖T(f) − f‖_p^p = ‖(τ_f⁻¹ ∘ T ∘ τ_f)(0)‖_p^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugationReport {
    pub direct: f64,
    pub conjugated: f64,
    pub residual: f64,
}

pub fn conjugation_displacement(t: &LampertiIsometry, f: &[Complex64]) -> Result<ConjugationReport> {
    let space = t.space().clone();
    let p = t.p();
    let tf = t.apply(f)?;
    let diff: Vec<Complex64> = tf.iter().zip(f).map(|(a, b)| a - b).collect();
    let direct = lp_power_sum(&diff, &space, p)?;

    let tau = AffineMap::translation(space.clone(), p, f.to_vec())?;
    let tau_inv = AffineMap::translation(space.clone(), p, f.iter().map(|z| -z).collect())?;
    let conj = tau_inv.compose(&AffineMap::linear(t.clone()))?.compose(&tau)?;
    let conjugated = lp_power_sum(conj.origin_image(), &space, p)?;
    Ok(ConjugationReport {
        direct,
        conjugated,
        residual: (direct - conjugated).abs(),
    })
}

/// Check a Circle-valued cocycle against its action.
pub fn phase_is_cocycle(alpha: &AffineAction, tol: f64) -> Result<bool> {
    Ok(check_cocycle_in(&alpha.phase, CoefficientGroup::Circle, &alpha.action, tol)?.pass)
}
