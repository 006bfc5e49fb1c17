use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::integral::{check_exponents, cq_constant, profile_integral};
use super::profile::RadialProfile;
use crate::error::{LabError, Result};
use crate::group::{maharam_extension, MaharamDescriptor};
use crate::lp::{psi, AffineAction};
use crate::rng::Substreams;

/// `c̃(g)(x, λ) = λ^{-1/p} c(g)(x)` over the Maharam extension.
#[derive(Debug, Clone)]
pub struct TwistedCocycle {
    maharam: MaharamDescriptor,
    c: Vec<Vec<Complex64>>,
    p: f64,
}

/// A point `(x, λ, z)` of `X × (0, ∞) × C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewPoint {
    pub x: usize,
    pub lambda: f64,
    pub z: Complex64,
}

impl TwistedCocycle {
    /// The translation part of `α` must be a cocycle for the phase-free
    /// Lamperti representation.
    pub fn new(alpha: &AffineAction) -> Result<Self> {
        if !alpha.has_zero_phase(1e-12) {
            return Err(LabError::Precondition(
                "linear part carries a nonzero phase cocycle; apply absorb_phase first".into(),
            ));
        }
        Ok(Self {
            maharam: maharam_extension(alpha.action()),
            c: alpha.translations().to_vec(),
            p: alpha.p(),
        })
    }

    pub fn maharam(&self) -> &MaharamDescriptor {
        &self.maharam
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn eval(&self, g: usize, x: usize, lambda: f64) -> Complex64 {
        self.c[g][x] * lambda.powf(-1.0 / self.p)
    }

    /// `|c̃(gh)(x̃) − c̃(g)(x̃) − c̃(h)(g⁻¹x̃)|`.
    pub fn relation_residual(&self, g: usize, h: usize, x: usize, lambda: f64) -> f64 {
        let grp = self.maharam.base().group();
        let (y, mu) = self.maharam.act(grp.inv(g), x, lambda);
        (self.eval(grp.mul(g, h), x, lambda) - self.eval(g, x, lambda) - self.eval(h, y, mu)).norm()
    }

    /// Max relation residual over `samples` draws of `(g, h, x, λ)`.
    pub fn check(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = Substreams::new(seed).stream(0);
        let order = self.maharam.base().group().order();
        let n = self.maharam.base().space().len();
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let (g, h, x) = (rng.random_range(0..order), rng.random_range(0..order), rng.random_range(0..n));
            let lambda = rng.random_range(-7.0f64..7.0).exp();
            let scale = self.c.iter().map(|row| row[x].norm()).fold(1.0, f64::max) * lambda.powf(-1.0 / self.p);
            worst = worst.max(self.relation_residual(g, h, x, lambda) / scale.max(1.0));
        }
        worst
    }
}

/// `g·(x, λ, z) = (gx, s_g(x)λ, z + c̃(g⁻¹)(x, λ))`.
pub fn skew_point_action(tw: &TwistedCocycle, g: usize, pt: SkewPoint) -> Result<SkewPoint> {
    if !(pt.lambda > 0.0 && pt.lambda.is_finite()) {
        return Err(LabError::InvalidInput(format!("λ must be positive, got {}", pt.lambda)));
    }
    let gi = tw.maharam.base().group().inv(g);
    let (x, lambda) = tw.maharam.act(g, pt.x, pt.lambda);
    Ok(SkewPoint {
        x,
        lambda,
        z: pt.z + tw.eval(gi, pt.x, pt.lambda),
    })
}

fn random_point<R: Rng>(rng: &mut R, n: usize, reach: f64) -> SkewPoint {
    SkewPoint {
        x: rng.random_range(0..n),
        lambda: rng.random_range(-7.0f64..7.0).exp(),
        z: Complex64::new(rng.random_range(-reach..reach), rng.random_range(-reach..reach)),
    }
}

/// Max of `|h·(g·y) − (hg)·y|` over sampled `(g, h, y)`.
pub fn group_law_residual(tw: &TwistedCocycle, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = Substreams::new(seed).stream(1);
    let grp = tw.maharam.base().group();
    let n = tw.maharam.base().space().len();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (g, h) = (rng.random_range(0..grp.order()), rng.random_range(0..grp.order()));
        let y = random_point(&mut rng, n, 3.0);
        let a = skew_point_action(tw, h, skew_point_action(tw, g, y)?)?;
        let b = skew_point_action(tw, grp.mul(h, g), y)?;
        if a.x != b.x {
            return Ok(f64::INFINITY);
        }
        let r = (a.lambda - b.lambda).abs() / a.lambda + (a.z - b.z).norm() / a.z.norm().max(1.0);
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `b(g)(y) = h(g⁻¹y) − h(y)` with `h(x, λ, z) = φ(z)`, evaluated by moving
/// the point.
pub fn bump_coboundary(tw: &TwistedCocycle, phi: &RadialProfile, g: usize, y: SkewPoint) -> Result<f64> {
    let gi = tw.maharam.base().group().inv(g);
    let moved = skew_point_action(tw, gi, y)?;
    Ok(phi.eval(moved.z) - phi.eval(y.z))
}

/// Largest of `|b(g)(y) − (φ(z + λ^{-1/p}c(g)(x)) − φ(z))|` and
/// `|b(gh)(y) − b(g)(y) − b(h)(g⁻¹y)|` over sampled points.
pub fn coboundary_spot_check(tw: &TwistedCocycle, phi: &RadialProfile, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = Substreams::new(seed).stream(2);
    let grp = tw.maharam.base().group();
    let n = tw.maharam.base().space().len();
    let reach = 1.5 * phi.radius();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (g, h) = (rng.random_range(0..grp.order()), rng.random_range(0..grp.order()));
        // Keep λ where the shift is comparable to the support.
        let mut y = random_point(&mut rng, n, reach);
        let size = tw.c.iter().map(|row| row[y.x].norm()).fold(0.0, f64::max);
        if size > 0.0 {
            y.lambda = (size / phi.radius()).powf(tw.p) * rng.random_range(-2.0f64..2.0).exp();
        }
        let direct = phi.eval(y.z + tw.eval(g, y.x, y.lambda)) - phi.eval(y.z);
        let b_g = bump_coboundary(tw, phi, g, y)?;
        worst = worst.max((b_g - direct).abs());
        let b_gh = bump_coboundary(tw, phi, grp.mul(g, h), y)?;
        let b_h = bump_coboundary(tw, phi, h, skew_point_action(tw, grp.inv(g), y)?)?;
        worst = worst.max((b_gh - b_g - b_h).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferOptions {
    pub tol: f64,
    /// Rescale `φ` so that `C(q)` becomes 1.
    pub normalize: bool,
    pub spot_checks: usize,
    pub seed: u64,
}

impl Default for TransferOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            normalize: false,
            spot_checks: 1000,
            seed: 0,
        }
    }
}

/// Residual ceiling for the sampled algebraic identities.
pub const SPOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateEntry {
    pub element: String,
    pub psi: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

/// One term `μ(x)·I(c(g)(x))` of the left-hand side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomEntry {
    pub element: String,
    pub atom: usize,
    pub weight: f64,
    pub shift: f64,
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferCertificate {
    pub p: f64,
    pub q: f64,
    pub profile: String,
    pub tol: f64,
    pub normalized: bool,
    pub c_q: f64,
    pub elements: Vec<CertificateEntry>,
    pub atoms: Vec<AtomEntry>,
    pub twist_residual: f64,
    pub group_law_residual: f64,
    pub spot_check_residual: f64,
    pub max_rel_err: f64,
    pub pass: bool,
}

/// `‖b(g)‖_q^q = Σ_x μ(x) I(c(g)(x))` against `C(q)·ψ(g)`.
pub fn transfer_action(
    alpha: &AffineAction,
    q: f64,
    phi: &RadialProfile,
    opts: &TransferOptions,
) -> Result<TransferCertificate> {
    let p = alpha.p();
    check_exponents(p, q)?;
    let tw = TwistedCocycle::new(alpha)?;
    let tol = opts.tol;
    let phi = if opts.normalize {
        let c0 = cq_constant(phi, p, q, tol)?;
        phi.scaled(c0.powf(-1.0 / q))?
    } else {
        phi.clone()
    };
    let rough = cq_constant(&phi, p, q, 1e-3)?;
    let c_q = cq_constant(&phi, p, q, 0.25 * tol * rough)?;

    let grp = alpha.group();
    let space = alpha.space();
    let n = space.len();
    // Each term is asked for relative accuracy tol/2 against its a priori
    // size C(q)|w|^p, so every element sum inherits it.
    let jobs: Vec<(usize, usize)> = (0..grp.order()).flat_map(|g| (0..n).map(move |x| (g, x))).collect();
    let values = jobs
        .par_iter()
        .map(|&(g, x)| {
            let w = alpha.translation(g)[x];
            if w.norm() == 0.0 {
                return Ok(0.0);
            }
            profile_integral(&phi, p, q, w, 0.5 * tol * c_q * w.norm().powf(p))
        })
        .collect::<Result<Vec<f64>>>()?;
    let atoms = jobs
        .iter()
        .zip(&values)
        .map(|(&(g, x), &v)| AtomEntry {
            element: grp.name(g).to_string(),
            atom: x,
            weight: space.weight(x),
            shift: alpha.translation(g)[x].norm(),
            integral: v,
        })
        .collect();
    let psi = psi(alpha);
    let elements: Vec<CertificateEntry> = (0..grp.order())
        .map(|g| {
            let lhs: f64 = (0..n).map(|x| space.weight(x) * values[g * n + x]).sum();
            let rhs = c_q * psi.values[g];
            let rel_err = if lhs == rhs {
                0.0
            } else {
                (lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE)
            };
            CertificateEntry {
                element: grp.name(g).to_string(),
                psi: psi.values[g],
                lhs,
                rhs,
                rel_err,
            }
        })
        .collect();
    let max_rel_err = elements.iter().map(|e| e.rel_err).fold(0.0, f64::max);
    let twist_residual = tw.check(opts.spot_checks, opts.seed);
    let group_law_residual = group_law_residual(&tw, opts.spot_checks, opts.seed)?;
    let spot_check_residual = coboundary_spot_check(&tw, &phi, opts.spot_checks, opts.seed)?;
    let pass = max_rel_err <= tol
        && twist_residual <= SPOT_TOL
        && group_law_residual <= SPOT_TOL
        && spot_check_residual <= SPOT_TOL;
    Ok(TransferCertificate {
        p,
        q,
        profile: phi.name().to_string(),
        tol,
        normalized: opts.normalize,
        c_q,
        elements,
        atoms,
        twist_residual,
        group_law_residual,
        spot_check_residual,
        max_rel_err,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{coboundary, CoefficientGroup, FiniteGroup, NonsingularAction};
    use crate::measure::{complexify, FiniteMeasureSpace, Permutation};
    use crate::random::random_complex;
    use crate::rng::seeded_rng;

    fn swap_action() -> NonsingularAction {
        NonsingularAction::new(
            FiniteGroup::cyclic(2).unwrap(),
            FiniteMeasureSpace::from_weights(vec![1.0, 2.0]).unwrap(),
            vec![Permutation::identity(2), Permutation::new(vec![1, 0]).unwrap()],
        )
        .unwrap()
    }

    fn random_alpha(p: f64, seed: u64) -> AffineAction {
        let mut rng = seeded_rng(seed);
        AffineAction::from_coboundary(swap_action(), &random_complex(2, &mut rng), p).unwrap()
    }

    #[test]
    fn twist_examples() {
        let alpha = random_alpha(1.5, 1);
        let tw = TwistedCocycle::new(&alpha).unwrap();
        for x in 0..2 {
            assert_eq!(tw.eval(1, x, 1.0), alpha.translation(1)[x]);
            let half = tw.eval(1, x, 2f64.powf(1.5));
            assert!((half - alpha.translation(1)[x] / 2.0).norm() < 1e-15);
        }
        assert!(tw.check(1000, 3) <= 1e-9);
        assert!(group_law_residual(&tw, 1000, 3).unwrap() <= 1e-9);
    }

    #[test]
    fn skew_action_basics() {
        let alpha = random_alpha(1.0, 2);
        let tw = TwistedCocycle::new(&alpha).unwrap();
        let y = SkewPoint {
            x: 1,
            lambda: 0.7,
            z: Complex64::new(0.1, -0.2),
        };
        assert_eq!(skew_point_action(&tw, 0, y).unwrap(), y);
        let bad = SkewPoint { lambda: 0.0, ..y };
        assert!(skew_point_action(&tw, 1, bad).is_err());

        let zero = AffineAction::from_coboundary(swap_action(), &complexify(&[0.0, 0.0]), 1.0).unwrap();
        let tz = TwistedCocycle::new(&zero).unwrap();
        assert_eq!(skew_point_action(&tz, 1, y).unwrap().z, y.z);
    }

    #[test]
    fn maharam_twist_needs_zero_phase() {
        let a = swap_action();
        let phase = coboundary(CoefficientGroup::Circle, &complexify(&[0.0, 1.0]), &a).unwrap();
        let alpha = AffineAction::from_phase_and_coboundary(a, phase, &complexify(&[1.0, 0.0]), 1.0).unwrap();
        assert!(matches!(TwistedCocycle::new(&alpha), Err(LabError::Precondition(_))));
        let opts = TransferOptions::default();
        assert!(matches!(
            transfer_action(&alpha, 2.0, &RadialProfile::tent(), &opts),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn zero_cocycle_certificate() {
        let zero = AffineAction::from_coboundary(swap_action(), &complexify(&[0.0, 0.0]), 1.0).unwrap();
        let cert = transfer_action(&zero, 2.0, &RadialProfile::tent(), &TransferOptions::default()).unwrap();
        assert!(cert.pass);
        assert!(cert.elements.iter().all(|e| e.lhs == 0.0 && e.rhs == 0.0));

        let one = NonsingularAction::trivial(FiniteGroup::cyclic(1).unwrap(), FiniteMeasureSpace::uniform(1).unwrap());
        let alpha = AffineAction::from_coboundary(one, &complexify(&[3.0]), 1.0).unwrap();
        assert!(transfer_action(&alpha, 2.0, &RadialProfile::tent(), &TransferOptions::default()).unwrap().pass);
    }

    #[test]
    fn swap_certificate_passes() {
        let alpha = random_alpha(1.0, 5);
        let cert = transfer_action(&alpha, 2.0, &RadialProfile::tent(), &TransferOptions::default()).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!(cert.elements[1].lhs > 0.0);
        assert!(matches!(
            transfer_action(&alpha, 1.0, &RadialProfile::tent(), &TransferOptions::default()),
            Err(LabError::ExponentOrder { .. })
        ));
    }
}
