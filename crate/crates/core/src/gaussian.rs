//! Gaussian lifts of orthogonal cocycles, the absolute-moment constant, and
//! kernels of conditionally negative type.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, LabError, Result};
use crate::group::FiniteGroup;
use crate::measure::Permutation;
use crate::quadrature::{integrate_pieces, QuadOptions};
use crate::random::{random_action, random_orthogonal, random_real};
use crate::rng::Substreams;

/// Draws per substream in the Monte Carlo loops.
pub const BLOCK: usize = 1 << 14;
pub const MIN_SAMPLES: usize = 1000;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
/// Largest |z| accepted by the Monte Carlo checks.
pub const Z_BAND: f64 = 4.0;

/// `E|N(0,1)|^p` by adaptive quadrature of `2∫₀^∞ x^p φ(x) dx`.
pub fn moment_constant(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(LabError::InvalidExponent(format!("p must be > 0, got {p}")));
    }
    let m = p.sqrt().max(1.0);
    let norm = (2.0 / std::f64::consts::PI).sqrt();
    // Work with x^p e^{-x²/2} / m^p e^{-m²/2} so large p does not overflow.
    let log_peak = p * m.ln() - 0.5 * m * m;
    let f = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            (p * x.ln() - 0.5 * x * x - log_peak).exp()
        }
    };
    let pts = [0.0, 0.5 * m, m, m + 2.0, m + 6.0, m + 12.0, m + 40.0];
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-14,
        max_intervals: 4000,
        smooth_endpoints: true,
    };
    let r = integrate_pieces(f, &pts, &opts)?;
    Ok(norm * r.value * log_peak.exp())
}

/// Streaming mean and variance (Welford, merged with Chan's rule).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Welford) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64;
        self.n = n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n.max(1) as f64).sqrt()
    }
}

/// Run `body` on `samples` draws split into blocks of [`BLOCK`], block `b`
/// using substream `b`; accumulators are merged in block order so the
/// result does not depend on the thread count.
pub fn blocked_moments<F>(streams: &Substreams, samples: usize, width: usize, body: F) -> Vec<Welford>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [Welford]) + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    let parts: Vec<Vec<Welford>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = streams.stream(b as u64);
            let mut acc = vec![Welford::default(); width];
            let len = BLOCK.min(samples - b * BLOCK);
            for _ in 0..len {
                body(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut out = vec![Welford::default(); width];
    for part in &parts {
        for (o, w) in out.iter_mut().zip(part) {
            o.merge(w);
        }
    }
    out
}

/// An orthogonal representation on `R^n` with a 1-cocycle for it.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalCocyclePair {
    group: FiniteGroup,
    rep: Vec<DMatrix<f64>>,
    cocycle: Vec<DVector<f64>>,
}

impl OrthogonalCocyclePair {
    pub fn new(group: FiniteGroup, rep: Vec<DMatrix<f64>>, cocycle: Vec<DVector<f64>>, tol: f64) -> Result<Self> {
        check_len(group.order(), rep.len())?;
        check_len(group.order(), cocycle.len())?;
        let n = cocycle.first().map_or(0, |c| c.len());
        for (m, c) in rep.iter().zip(&cocycle) {
            if m.nrows() != n || m.ncols() != n {
                return Err(LabError::Shape {
                    expected: n,
                    actual: m.nrows().max(m.ncols()),
                });
            }
            check_len(n, c.len())?;
            let err = (m.transpose() * m - DMatrix::identity(n, n)).amax();
            if err > tol {
                return Err(LabError::InvalidInput(format!("matrix is not orthogonal (residual {err:e})")));
            }
        }
        let scale = cocycle.iter().map(|c| c.amax()).fold(1.0, f64::max);
        for g in 0..group.order() {
            for h in 0..group.order() {
                let gh = group.mul(g, h);
                let hom = (&rep[g] * &rep[h] - &rep[gh]).amax();
                if hom > tol {
                    return Err(LabError::InvalidInput(format!(
                        "representation fails at ({}, {}) by {hom:e}",
                        group.name(g),
                        group.name(h)
                    )));
                }
                let coc = (&cocycle[gh] - &cocycle[g] - &rep[g] * &cocycle[h]).amax();
                if coc > tol * scale {
                    return Err(LabError::InvalidInput(format!(
                        "cocycle identity fails at ({}, {}) by {coc:e}",
                        group.name(g),
                        group.name(h)
                    )));
                }
            }
        }
        Ok(Self { group, rep, cocycle })
    }

    /// `c(g) = π(g)v − v`.
    pub fn coboundary(group: FiniteGroup, rep: Vec<DMatrix<f64>>, v: DVector<f64>) -> Result<Self> {
        let cocycle = rep.iter().map(|m| m * &v - &v).collect();
        Self::new(group, rep, cocycle, 1e-9)
    }

    /// Permutation matrices of an action on `0..n`.
    pub fn permutation_rep(perms: &[Permutation]) -> Vec<DMatrix<f64>> {
        perms
            .iter()
            .map(|p| {
                let n = p.len();
                let mut m = DMatrix::zeros(n, n);
                for x in 0..n {
                    m[(p.apply(x), x)] = 1.0;
                }
                m
            })
            .collect()
    }

    /// A permutation representation on at most `max_dim` coordinates,
    /// conjugated by a Haar orthogonal matrix, with a random coboundary.
    pub fn random<R: Rng + ?Sized>(group: FiniteGroup, max_dim: usize, rng: &mut R) -> Result<Self> {
        let perms = random_action(&group, max_dim, rng)?;
        let n = perms[0].len();
        let q = random_orthogonal(n, rng);
        let rep = Self::permutation_rep(&perms)
            .into_iter()
            .map(|m| &q * m * q.transpose())
            .collect();
        let v = DVector::from_vec(random_real(n, rng));
        Self::coboundary(group, rep, v)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.cocycle.first().map_or(0, |c| c.len())
    }

    pub fn rep(&self, g: usize) -> &DMatrix<f64> {
        &self.rep[g]
    }

    pub fn cocycle(&self, g: usize) -> &DVector<f64> {
        &self.cocycle[g]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            group: self.group.clone(),
            rep: self.rep.clone(),
            cocycle: self.cocycle.iter().map(|c| c * s).collect(),
        }
    }

    /// `ψ(g) = ‖c(g)‖²`.
    pub fn psi(&self) -> Vec<f64> {
        self.cocycle.iter().map(|c| c.norm_squared()).collect()
    }
}

/// `{"samples", "seed", "p"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub seed: u64,
    pub p: f64,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftEntry {
    pub element: String,
    pub estimate: f64,
    pub target: f64,
    pub stderr: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivarianceEntry {
    pub element: String,
    pub moved: f64,
    pub reference: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftReport {
    pub p: f64,
    pub samples: usize,
    pub seed: u64,
    pub moment_constant: f64,
    pub elements: Vec<LiftEntry>,
    pub equivariance: Vec<EquivarianceEntry>,
    pub pass: bool,
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

fn draw(rng: &mut impl Rng, w: &mut [f64]) {
    for x in w.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
}

/// Estimate `E|⟨c(g), W⟩|^p` for every `g` and compare with
/// `moment_constant(p)·‖c(g)‖^p`; then compare the laws of `⟨π(g)ξ, W⟩` and
/// `⟨ξ, W⟩` through their `p`-th absolute moments on disjoint sample halves.
pub fn gaussian_lift_check(pair: &OrthogonalCocyclePair, p: f64, samples: usize, seed: u64) -> Result<LiftReport> {
    if samples < MIN_SAMPLES {
        return Err(LabError::InsufficientSamples {
            got: samples,
            min: MIN_SAMPLES,
        });
    }
    let cp = moment_constant(p)?;
    let grp = pair.group();
    let order = grp.order();
    let n = pair.dim();
    let root = Substreams::new(seed);

    let cs: Vec<Vec<f64>> = pair.cocycle.iter().map(|c| c.iter().copied().collect()).collect();
    let lift = blocked_moments(&root.child(1), samples, order, |rng, acc| {
        let mut w = vec![0.0; n];
        draw(rng, &mut w);
        for (a, c) in acc.iter_mut().zip(&cs) {
            let s: f64 = c.iter().zip(&w).map(|(x, y)| x * y).sum();
            a.push(s.abs().powf(p));
        }
    });
    let elements = (0..order)
        .map(|g| {
            let target = cp * pair.cocycle[g].norm().powf(p);
            let est = lift[g].mean;
            let se = lift[g].stderr();
            LiftEntry {
                element: grp.name(g).to_string(),
                estimate: est,
                target,
                stderr: se,
                z_score: z_score(est - target, se),
            }
        })
        .collect::<Vec<_>>();

    // Unit test vector ξ drawn from its own substream.
    let mut xi = DVector::from_vec(random_real(n, &mut root.child(2).stream(0)));
    if xi.norm() > 0.0 {
        xi /= xi.norm();
    }
    let moved: Vec<Vec<f64>> = pair.rep.iter().map(|m| (m * &xi).iter().copied().collect()).collect();
    let xi: Vec<f64> = xi.iter().copied().collect();
    let half = samples / 2;
    let lhs = blocked_moments(&root.child(3), half, order, |rng, acc| {
        let mut w = vec![0.0; n];
        draw(rng, &mut w);
        for (a, v) in acc.iter_mut().zip(&moved) {
            let s: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
            a.push(s.abs().powf(p));
        }
    });
    let rhs = blocked_moments(&root.child(4), samples - half, 1, |rng, acc| {
        let mut w = vec![0.0; n];
        draw(rng, &mut w);
        let s: f64 = xi.iter().zip(&w).map(|(x, y)| x * y).sum();
        acc[0].push(s.abs().powf(p));
    });
    let equivariance = (0..order)
        .map(|g| {
            let se = (lhs[g].stderr().powi(2) + rhs[0].stderr().powi(2)).sqrt();
            EquivarianceEntry {
                element: grp.name(g).to_string(),
                moved: lhs[g].mean,
                reference: rhs[0].mean,
                z_score: z_score(lhs[g].mean - rhs[0].mean, se),
            }
        })
        .collect::<Vec<_>>();

    let pass = elements.iter().all(|e| e.z_score.abs() <= Z_BAND)
        && equivariance.iter().all(|e| e.z_score.abs() <= Z_BAND);
    Ok(LiftReport {
        p,
        samples,
        seed,
        moment_constant: cp,
        elements,
        equivariance,
        pass,
    })
}

/// `K_{ij} = ψ(g_i⁻¹ g_j)` over a list of elements.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    elements: Vec<String>,
    values: DMatrix<f64>,
}

impl KernelTable {
    pub fn new(elements: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        check_len(elements.len(), values.nrows())?;
        check_len(elements.len(), values.ncols())?;
        let asym = (&values - values.transpose()).amax();
        if asym > 1e-12 * values.amax().max(1.0) {
            return Err(LabError::InvalidInput(format!("kernel is not symmetric (residual {asym:e})")));
        }
        Ok(Self { elements, values })
    }

    /// Kernel of `ψ` over all of `group`.
    pub fn from_psi(group: &FiniteGroup, psi: &[f64]) -> Result<Self> {
        check_len(group.order(), psi.len())?;
        let n = group.order();
        let values = DMatrix::from_fn(n, n, |i, j| psi[group.mul(group.inv(i), j)]);
        Self::new(group.elements().to_vec(), values)
    }

    pub fn from_pair(pair: &OrthogonalCocyclePair) -> Result<Self> {
        Self::from_psi(pair.group(), &pair.psi())
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CndReport {
    pub pass: bool,
    /// Largest `uᵀKu` over unit mean-zero `u` (eigenvalue on the subspace).
    pub max_form: f64,
    /// Largest `uᵀKu` among the random unit mean-zero trial vectors.
    pub max_random_form: f64,
    pub trials: usize,
    pub tol: f64,
}

/// Orthonormal basis of `{u : Σu = 0}` (Helmert columns).
pub fn mean_zero_basis(n: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            b[(i, k - 1)] = s;
        }
        b[(k, k - 1)] = -(k as f64) * s;
    }
    b
}

/// `uᵀKu ≤ tol` for unit `u` with `Σu = 0`, decided on the compressed
/// matrix `BᵀKB` and probed with `trials` random vectors.
pub fn cnd_check(k: &KernelTable, trials: usize, seed: u64, tol: f64) -> CndReport {
    let n = k.len();
    let max_form = if n < 2 {
        0.0
    } else {
        let b = mean_zero_basis(n);
        let m = b.transpose() * &k.values * &b;
        let m = (&m + m.transpose()) * 0.5;
        SymmetricEigen::new(m).eigenvalues.max()
    };
    let mut max_random_form = f64::NEG_INFINITY;
    if n >= 2 {
        let mut rng = Substreams::new(seed).stream(0);
        for _ in 0..trials {
            let mut u = DVector::from_vec(random_real(n, &mut rng));
            let mean = u.mean();
            u.add_scalar_mut(-mean);
            let norm = u.norm();
            if norm == 0.0 {
                continue;
            }
            u /= norm;
            max_random_form = max_random_form.max((u.transpose() * &k.values * &u)[(0, 0)]);
        }
    }
    if max_random_form == f64::NEG_INFINITY {
        max_random_form = 0.0;
    }
    CndReport {
        pass: max_form <= tol && max_random_form <= tol,
        max_form,
        max_random_form,
        trials,
        tol,
    }
}

/// Entrywise `K^a` for `0 < a ≤ 1`.
pub fn bernstein_power(k: &KernelTable, a: f64) -> Result<KernelTable> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(LabError::InvalidExponent(format!("power must lie in (0, 1], got {a}")));
    }
    let v = &k.values;
    for i in 0..v.nrows() {
        for j in 0..v.ncols() {
            if v[(i, j)] < 0.0 {
                return Err(LabError::NegativeEntry {
                    row: i,
                    col: j,
                    value: v[(i, j)],
                });
            }
        }
    }
    Ok(KernelTable {
        elements: k.elements.clone(),
        values: v.map(|x| if a == 1.0 { x } else { x.powf(a) }),
    })
}
