//! Mazur maps, their scalar inequalities as randomized constant searches,
//! conditional expectations onto partitions, and the finite-scale chain for
//! formal coboundaries.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::error::{check_len, LabError, Result};
use crate::group::NonsingularAction;
use crate::lp::LampertiIsometry;
use crate::measure::{lp_power_sum, FiniteMeasureSpace};
use crate::rng::Substreams;

/// Relative change allowed between a search and its doubled-budget rerun.
pub const STABILITY: f64 = 0.05;
const SEARCH_BLOCK: usize = 4096;

/// `z/|z|`, with `sign(0) = 0`.
#[inline]
pub fn sign(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z / r
    }
}

/// `sign(a)|a|^{p/q}`.
#[inline]
pub fn mazur_scalar(a: Complex64, p: f64, q: f64) -> Complex64 {
    let r = a.norm();
    if r == 0.0 {
        a * 0.0
    } else {
        a * r.powf(p / q - 1.0)
    }
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(LabError::InvalidExponent(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(())
}

fn check_ordered(p: f64, q: f64) -> Result<()> {
    check_pq(p, q)?;
    if p < 1.0 || p > q {
        return Err(LabError::ExponentOrder { p, q });
    }
    Ok(())
}

pub fn mazur_map(f: &[Complex64], p: f64, q: f64) -> Result<Vec<Complex64>> {
    check_pq(p, q)?;
    if p == q {
        return Ok(f.to_vec());
    }
    Ok(f.iter().map(|&a| mazur_scalar(a, p, q)).collect())
}

/// Report of a randomized constant search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantReport {
    pub check: String,
    pub p: f64,
    pub q: f64,
    pub trials: usize,
    pub seed: u64,
    /// Extremum found with `trials` draws.
    pub statistic: f64,
    /// Extremum found with `2·trials` draws.
    pub doubled: f64,
    pub stable: bool,
}

/// Compass search around `x0`; `f` returns `None` off its domain.
pub fn pattern_search<F: Fn(&[f64]) -> Option<f64>>(f: F, x0: &[f64], step: f64, maximize: bool) -> (Vec<f64>, f64) {
    let sgn = if maximize { 1.0 } else { -1.0 };
    let mut x = x0.to_vec();
    let mut best = match f(&x) {
        Some(v) => sgn * v,
        None => return (x, f64::NAN),
    };
    let mut h = step;
    let mut iters = 0;
    while h > 1e-10 && iters < 20_000 {
        iters += 1;
        let mut improved = false;
        for i in 0..x.len() {
            for d in [h, -h] {
                let mut y = x.clone();
                y[i] += d;
                if let Some(v) = f(&y) {
                    if sgn * v > best {
                        best = sgn * v;
                        x = y;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, sgn * best)
}

/// Random search over `dim`-dimensional parameters drawn by `draw`, then
/// pattern-search refinement of the best few candidates.
fn extremum_search<D, F>(draw: D, objective: F, trials: usize, seed: u64, maximize: bool) -> f64
where
    D: Fn(&mut rand_chacha::ChaCha8Rng) -> Vec<f64> + Sync,
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    const KEEP: usize = 2;
    const REFINE: usize = 4;
    let sgn = if maximize { 1.0 } else { -1.0 };
    let streams = Substreams::new(seed);
    let blocks = trials.div_ceil(SEARCH_BLOCK);
    let mut cands: Vec<(f64, Vec<f64>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = streams.stream(b as u64);
            let mut top: Vec<(f64, Vec<f64>)> = Vec::new();
            for _ in 0..SEARCH_BLOCK.min(trials - b * SEARCH_BLOCK) {
                let x = draw(&mut rng);
                if let Some(v) = objective(&x) {
                    if v.is_finite() {
                        top.push((sgn * v, x));
                        top.sort_by(|a, b| b.0.total_cmp(&a.0));
                        top.truncate(KEEP);
                    }
                }
            }
            top
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    cands.truncate(REFINE);
    let refined: Vec<f64> = cands
        .par_iter()
        .map(|(_, x)| sgn * pattern_search(&objective, x, 0.25, maximize).1)
        .collect();
    let best = refined.into_iter().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    sgn * best
}

fn stability_report<S: Fn(usize) -> f64>(check: &str, p: f64, q: f64, trials: usize, seed: u64, search: S) -> ConstantReport {
    let statistic = search(trials);
    let doubled = search(2 * trials);
    let scale = statistic.abs().max(doubled.abs());
    let stable = statistic.is_finite()
        && doubled.is_finite()
        && (scale == 0.0 || (statistic - doubled).abs() <= STABILITY * scale);
    ConstantReport {
        check: check.into(),
        p,
        q,
        trials,
        seed,
        statistic,
        doubled,
        stable,
    }
}

/// Two complex numbers as `(ln|a|, arg a, ln|b|, arg b)`.
fn draw_pair(rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    let span = 1e6f64.ln();
    vec![
        rng.random_range(-span..span),
        rng.random_range(0.0..TAU),
        rng.random_range(-span..span),
        rng.random_range(0.0..TAU),
    ]
}

fn pair_from(x: &[f64]) -> (Complex64, Complex64) {
    (Complex64::from_polar(x[0].exp(), x[1]), Complex64::from_polar(x[2].exp(), x[3]))
}

/// `|M(a) − M(b)| / |a − b|^{p/q}`.
pub fn lipschitz_ratio(a: Complex64, b: Complex64, p: f64, q: f64) -> Option<f64> {
    let d = (a - b).norm();
    if d == 0.0 {
        return None;
    }
    Some((mazur_scalar(a, p, q) - mazur_scalar(b, p, q)).norm() / d.powf(p / q))
}

/// `|a − b| / (|M(a) − M(b)|^{q/p} + |a|^{1−p/q}|M(a) − M(b)|)`.
pub fn hoelder_ratio(a: Complex64, b: Complex64, p: f64, q: f64) -> Option<f64> {
    let d = (a - b).norm();
    if d == 0.0 {
        return None;
    }
    let m = (mazur_scalar(a, p, q) - mazur_scalar(b, p, q)).norm();
    let den = m.powf(q / p) + a.norm().powf(1.0 - p / q) * m;
    if den == 0.0 {
        return None;
    }
    Some(d / den)
}

/// Randomized supremum of [`lipschitz_ratio`].
pub fn check_lipschitz_ineq(p: f64, q: f64, trials: usize, seed: u64) -> Result<ConstantReport> {
    check_ordered(p, q)?;
    let obj = |x: &[f64]| {
        let (a, b) = pair_from(x);
        lipschitz_ratio(a, b, p, q)
    };
    Ok(stability_report("lipschitz", p, q, trials, seed, |t| {
        extremum_search(draw_pair, obj, t, seed, true)
    }))
}

/// Randomized supremum of [`hoelder_ratio`].
pub fn check_hoelder_ineq(p: f64, q: f64, trials: usize, seed: u64) -> Result<ConstantReport> {
    check_ordered(p, q)?;
    let obj = |x: &[f64]| {
        let (a, b) = pair_from(x);
        hoelder_ratio(a, b, p, q)
    };
    Ok(stability_report("hoelder", p, q, trials, seed, |t| {
        extremum_search(draw_pair, obj, t, seed, true)
    }))
}

/// `‖M_{p,q}(f) − z‖_q`.
pub fn mazur_distance(f: &[Complex64], space: &FiniteMeasureSpace, p: f64, q: f64, z: Complex64) -> Result<f64> {
    let m: Vec<Complex64> = mazur_map(f, p, q)?.into_iter().map(|v| v - z).collect();
    Ok(lp_power_sum(&m, space, q)?.powf(1.0 / q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanZeroStatistic {
    /// `min_z ‖M(f) − z‖_q / ‖f‖_p^{p/q}`.
    pub value: f64,
    pub z: [f64; 2],
}

const MEAN_TOL: f64 = 1e-9;
const GRID: usize = 21;

fn require_probability(space: &FiniteMeasureSpace) -> Result<()> {
    if !space.is_probability(1e-9) {
        return Err(LabError::Precondition(format!(
            "expected a probability space, total mass is {}",
            space.total_mass()
        )));
    }
    Ok(())
}

/// Minimize `‖M(f) − z‖_q` over a grid covering `|z| ≤ 2` (in units of
/// `‖f‖_p^{p/q}`), then refine; the objective is convex in `z`.
pub fn mean_zero_statistic(f: &[Complex64], space: &FiniteMeasureSpace, p: f64, q: f64) -> Result<MeanZeroStatistic> {
    check_pq(p, q)?;
    check_len(space.len(), f.len())?;
    require_probability(space)?;
    let mean: Complex64 = f.iter().zip(space.weights()).map(|(v, w)| v * w).sum();
    let scale: f64 = f.iter().zip(space.weights()).map(|(v, w)| v.norm() * w).sum();
    if mean.norm() > MEAN_TOL * scale {
        return Err(LabError::Precondition(format!("f must have mean zero, got {mean}")));
    }
    let norm = lp_power_sum(f, space, p)?.powf(1.0 / p);
    if norm == 0.0 {
        return Err(LabError::InvalidInput("f = 0 has no defined statistic".into()));
    }
    let unit = norm.powf(p / q);
    let m = mazur_map(f, p, q)?;
    let dist = |z: Complex64| -> f64 {
        let d: Vec<Complex64> = m.iter().map(|v| v - z).collect();
        lp_power_sum(&d, space, q).expect("shapes checked").powf(1.0 / q) / unit
    };
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for i in 0..GRID {
        for j in 0..GRID {
            let h = 4.0 / (GRID - 1) as f64;
            let z = Complex64::new(-2.0 + h * i as f64, -2.0 + h * j as f64) * unit;
            let v = dist(z);
            if v < best.0 {
                best = (v, z);
            }
        }
    }
    let starts = [best.1, m.iter().zip(space.weights()).map(|(v, w)| v * w).sum()];
    for s in starts {
        let (x, v) = pattern_search(
            |x| Some(dist(Complex64::new(x[0], x[1]))),
            &[s.re, s.im],
            0.1 * unit,
            false,
        );
        if v < best.0 {
            best = (v, Complex64::new(x[0], x[1]));
        }
    }
    Ok(MeanZeroStatistic {
        value: best.0,
        z: [best.1.re, best.1.im],
    })
}

/// Randomized infimum of [`mean_zero_statistic`] over random mean-zero `f`
/// on random probability spaces with 2 to `max_atoms` atoms.
pub fn mean_zero_lower_bound(p: f64, q: f64, max_atoms: usize, trials: usize, seed: u64) -> Result<ConstantReport> {
    check_pq(p, q)?;
    if p < 1.0 || q < 1.0 {
        return Err(LabError::InvalidExponent(format!("need p, q ≥ 1, got ({p}, {q})")));
    }
    if max_atoms < 2 {
        return Err(LabError::InvalidInput("need at least two atoms".into()));
    }
    // Parameters: atom count n, then n log-weights and n complex values.
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let n = rng.random_range(2..=max_atoms);
        let mut x = vec![n as f64];
        x.extend((0..n).map(|_| rng.random_range(-3.0..3.0)));
        x.extend((0..2 * n).map(|_| rng.random_range(-1.0..1.0)));
        x
    };
    let obj = |x: &[f64]| -> Option<f64> {
        let n = x[0] as usize;
        let w: Vec<f64> = x[1..=n].iter().map(|l| l.clamp(-30.0, 30.0).exp()).collect();
        let space = FiniteMeasureSpace::from_weights(w).ok()?.normalize();
        let raw: Vec<Complex64> = (0..n).map(|i| Complex64::new(x[1 + n + 2 * i], x[2 + n + 2 * i])).collect();
        let mean: Complex64 = raw.iter().zip(space.weights()).map(|(v, w)| v * w).sum();
        let f: Vec<Complex64> = raw.iter().map(|v| v - mean).collect();
        mean_zero_statistic(&f, &space, p, q).ok().map(|s| s.value)
    };
    // The atom count is not a continuous parameter; keep it fixed while refining.
    let obj_fixed = |x: &[f64]| {
        if x[0].fract() != 0.0 {
            None
        } else {
            obj(x)
        }
    };
    Ok(stability_report("mean_zero", p, q, trials, seed, |t| {
        extremum_search(draw, obj_fixed, t, seed, false)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormTransferReport {
    /// `‖M(f) − M(g)‖_q`.
    pub lhs: f64,
    /// `c·‖f − g‖_p^{p/q}`.
    pub rhs: f64,
    pub holds: bool,
}

/// Slack on inequalities whose constant comes from a finite search.
pub const SEARCH_SLACK: f64 = 1e-9;

pub fn norm_transfer_bound(
    f: &[Complex64],
    g: &[Complex64],
    space: &FiniteMeasureSpace,
    p: f64,
    q: f64,
    c: f64,
) -> Result<NormTransferReport> {
    check_len(f.len(), g.len())?;
    let mf = mazur_map(f, p, q)?;
    let mg = mazur_map(g, p, q)?;
    let dm: Vec<Complex64> = mf.iter().zip(&mg).map(|(a, b)| a - b).collect();
    let d: Vec<Complex64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
    let lhs = lp_power_sum(&dm, space, q)?.powf(1.0 / q);
    let rhs = c * lp_power_sum(&d, space, p)?.powf(1.0 / q);
    Ok(NormTransferReport {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + SEARCH_SLACK),
    })
}

/// A partition of `0..n` into blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(LabError::InvalidInput("empty block".into()));
            }
            for &x in block {
                if x >= n || block_of[x] != usize::MAX {
                    return Err(LabError::InvalidInput(format!("atom {x} is out of range or repeated")));
                }
                block_of[x] = b;
            }
        }
        if let Some(x) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(LabError::InvalidInput(format!("atom {x} is not covered")));
        }
        Ok(Self { blocks, block_of })
    }

    pub fn singletons(n: usize) -> Self {
        Self::new((0..n).map(|x| vec![x]).collect(), n).expect("valid")
    }

    pub fn whole(n: usize) -> Self {
        Self::new(vec![(0..n).collect()], n).expect("valid")
    }

    /// Orbits of an action: the invariant algebra.
    pub fn orbits(action: &NonsingularAction) -> Self {
        Self::new(action.orbits(), action.space().len()).expect("orbits partition the atoms")
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }
}

/// `μ`-weighted block averages, broadcast back to atoms.
pub fn conditional_expectation(f: &[Complex64], b: &Partition, space: &FiniteMeasureSpace) -> Result<Vec<Complex64>> {
    check_len(space.len(), f.len())?;
    check_len(space.len(), b.len())?;
    let avg: Vec<Complex64> = b
        .blocks
        .iter()
        .map(|block| {
            let m: f64 = block.iter().map(|&x| space.weight(x)).sum();
            block.iter().map(|&x| f[x] * space.weight(x)).sum::<Complex64>() / m
        })
        .collect();
    Ok((0..f.len()).map(|x| avg[b.block_of[x]]).collect())
}

/// `‖M_{p,q}(T_p f) − T_q(M_{p,q} f)‖_∞`.
pub fn intertwining_check(tp: &LampertiIsometry, tq: &LampertiIsometry, f: &[Complex64]) -> Result<f64> {
    if tp.theta() != tq.theta() {
        return Err(LabError::InvalidInput("isometries use different permutations".into()));
    }
    if tp.phase() != tq.phase() || tp.space() != tq.space() {
        return Err(LabError::InvalidInput("isometries differ beyond their exponent".into()));
    }
    let (p, q) = (tp.p(), tq.p());
    let lhs = mazur_map(&tp.apply(f)?, p, q)?;
    let rhs = tq.apply(&mazur_map(f, p, q)?)?;
    Ok(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormalCoboundaryReport {
    pub check: String,
    pub p: f64,
    pub q: f64,
    pub blocks: usize,
    /// `min_b C_b^q` over blocks where `f − h` is nonzero.
    pub constant: f64,
    /// `min_{h₂} ‖M(f − h) − h₂‖_q^q / ‖f − h‖_p^p` over the grid.
    pub min_ratio: f64,
    pub pass: bool,
}

/// For `σ` measure-preserving and `B` its orbit partition, with
/// `h = E_B f`: check `‖M(f − h) − h₂‖_q^q ≥ C‖f − h‖_p^p` over a
/// `grid × grid` lattice of block values `h₂`.
pub fn formal_coboundary_transfer_check(
    action: &NonsingularAction,
    f: &[Complex64],
    p: f64,
    q: f64,
    grid: usize,
) -> Result<FormalCoboundaryReport> {
    check_ordered(p, q)?;
    if !action.is_measure_preserving(1e-12) {
        return Err(LabError::Precondition("the action must preserve the measure".into()));
    }
    let space = action.space().normalize();
    check_len(space.len(), f.len())?;
    let part = Partition::orbits(action);
    let h = conditional_expectation(f, &part, &space)?;
    let d: Vec<Complex64> = f.iter().zip(&h).map(|(a, b)| a - b).collect();
    let total = lp_power_sum(&d, &space, p)?;
    let mut report = FormalCoboundaryReport {
        check: "formal_coboundary".into(),
        p,
        q,
        blocks: part.blocks.len(),
        constant: 0.0,
        min_ratio: 0.0,
        pass: true,
    };
    if total == 0.0 {
        return Ok(report);
    }
    let md = mazur_map(&d, p, q)?;
    let mut constant = f64::INFINITY;
    let mut min_sum = 0.0;
    let grid = grid.max(2);
    for block in &part.blocks {
        let mass: f64 = block.iter().map(|&x| space.weight(x)).sum();
        let local = FiniteMeasureSpace::from_weights(block.iter().map(|&x| space.weight(x) / mass).collect())?;
        let db: Vec<Complex64> = block.iter().map(|&x| d[x]).collect();
        if db.iter().all(|v| v.norm() == 0.0) {
            continue;
        }
        constant = constant.min(mean_zero_statistic(&db, &local, p, q)?.value.powf(q));
        // The objective separates over blocks, so the product-grid minimum is
        // the sum of per-block minima.
        let mb: Vec<Complex64> = block.iter().map(|&x| md[x]).collect();
        let reach = 2.0 * mb.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut best = f64::INFINITY;
        for i in 0..grid {
            for j in 0..grid {
                let t = |k: usize| -reach + 2.0 * reach * k as f64 / (grid - 1) as f64;
                let z = Complex64::new(t(i), t(j));
                let e: Vec<Complex64> = mb.iter().map(|v| v - z).collect();
                best = best.min(mass * lp_power_sum(&e, &local, q)?);
            }
        }
        min_sum += best;
    }
    report.constant = constant;
    report.min_ratio = min_sum / total;
    report.pass = report.min_ratio >= constant * (1.0 - 1e-12);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::measure::{complexify, lp_norm, Permutation};
    use crate::random::{random_complex, random_permutation, random_weights};
    use crate::rng::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn map_examples() {
        let f = vec![Complex64::new(3.0, -4.0), Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.0)];
        assert_eq!(mazur_map(&f, 2.0, 2.0).unwrap(), f);
        let g = mazur_map(&complexify(&[4.0, 9.0]), 1.0, 2.0).unwrap();
        assert_eq!(g, complexify(&[2.0, 3.0]));
        let m = mazur_map(&f, 1.0, 2.0).unwrap();
        assert_eq!(m[1], Complex64::new(0.0, 0.0));
        assert!((m[0] - Complex64::new(3.0, -4.0) / 5.0 * 5f64.sqrt()).norm() < 1e-15);
        assert_eq!(sign(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn round_trip_and_norm_transport(seed in any::<u64>(), p in 1.0f64..8.0, q in 1.0f64..8.0, n in 1usize..9) {
            let mut rng = seeded_rng(seed);
            let space = FiniteMeasureSpace::from_weights(random_weights(n, 0.1, 10.0, &mut rng)).unwrap();
            let f = random_complex(n, &mut rng);
            let back = mazur_map(&mazur_map(&f, p, q).unwrap(), q, p).unwrap();
            for (a, b) in back.iter().zip(&f) {
                prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
            }
            let lhs = lp_power_sum(&mazur_map(&f, p, q).unwrap(), &space, q).unwrap();
            let rhs = lp_power_sum(&f, &space, p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn scalar_ratios_edge_cases() {
        let a = Complex64::new(1.3, -0.2);
        assert_eq!(lipschitz_ratio(a, a, 1.0, 2.0), None);
        assert_eq!(hoelder_ratio(a, a, 1.0, 2.0), None);
        let r = hoelder_ratio(a, Complex64::new(0.0, 0.0), 1.0, 2.0).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
        assert!(check_lipschitz_ineq(2.0, 1.0, 10, 0).is_err());
    }

    #[test]
    fn identity_exponent_gives_unit_constant() {
        let r = check_lipschitz_ineq(2.0, 2.0, 5000, 1).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-12 && r.stable);
    }

    #[test]
    fn lipschitz_constant_for_one_two() {
        let r = check_lipschitz_ineq(1.0, 2.0, 20_000, 4).unwrap();
        assert!(r.stable, "{r:?}");
        // Attained at b = −a: 2|a|^{1/2} / (2|a|)^{1/2}.
        assert!((r.statistic - 2f64.sqrt()).abs() < 1e-6);
        let h = check_hoelder_ineq(1.0, 2.0, 20_000, 4).unwrap();
        assert!(h.stable && h.statistic.is_finite() && h.statistic >= 0.5);
    }

    #[test]
    fn mean_zero_guard_is_relative() {
        // Centering at a heavy atom leaves only roundoff there; such an f is
        // not mean-zero at its own scale and must be refused.
        let space = FiniteMeasureSpace::from_weights(vec![1.0, 1e-26]).unwrap().normalize();
        let f = complexify(&[1e-16, 1.0]);
        assert!(matches!(
            mean_zero_statistic(&f, &space, 1.0, 2.0),
            Err(LabError::Precondition(_))
        ));
        let tiny = complexify(&[1e-20, -1e-20]);
        let half = FiniteMeasureSpace::uniform(2).unwrap().normalize();
        assert!(mean_zero_statistic(&tiny, &half, 1.0, 2.0).is_ok());
    }

    #[test]
    fn mean_zero_two_atom_case() {
        let space = FiniteMeasureSpace::uniform(2).unwrap().normalize();
        let f = complexify(&[1.0, -1.0]);
        let s = mean_zero_statistic(&f, &space, 2.0, 2.0).unwrap();
        assert!((s.value - 1.0).abs() < 1e-9);
        assert!(s.z[0].abs() < 1e-6 && s.z[1].abs() < 1e-6);
        let s2 = mean_zero_statistic(&complexify(&[2.0, -2.0]), &space, 1.0, 3.0).unwrap();
        let s1 = mean_zero_statistic(&f, &space, 1.0, 3.0).unwrap();
        assert!((s1.value - s2.value).abs() < 1e-9);
        assert!(mazur_distance(&f, &space, 1.0, 3.0, Complex64::new(3.0, 0.0)).unwrap() >= 0.5);
        assert!(matches!(
            mean_zero_statistic(&complexify(&[1.0, 0.0]), &space, 2.0, 2.0),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn conditional_expectation_examples() {
        let space = FiniteMeasureSpace::from_weights(vec![0.1, 0.3, 0.2, 0.4]).unwrap();
        let f = complexify(&[1.0, 2.0, 3.0, 4.0]);
        let one = conditional_expectation(&f, &Partition::whole(4), &space).unwrap();
        assert!(one.iter().all(|v| (v.re - 2.9).abs() < 1e-15));
        let same = conditional_expectation(&f, &Partition::singletons(4), &space).unwrap();
        for (a, c) in same.iter().zip(&f) {
            assert!((a - c).norm() < 1e-15);
        }
        let b = Partition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let e = conditional_expectation(&f, &b, &space).unwrap();
        assert!((e[0].re - (0.1 + 0.6) / 0.4).abs() < 1e-15);
        assert!((e[3].re - (0.6 + 1.6) / 0.6).abs() < 1e-15);
        let ee = conditional_expectation(&e, &b, &space).unwrap();
        for (a, c) in e.iter().zip(&ee) {
            assert!((a - c).norm() < 1e-15);
        }
        assert!(Partition::new(vec![vec![0, 1], vec![1, 2, 3]], 4).is_err());
        assert!(Partition::new(vec![vec![0, 1]], 4).is_err());
    }

    #[test]
    fn intertwining_examples() {
        let mut rng = seeded_rng(6);
        for _ in 0..100 {
            let n = rng.random_range(1..9);
            let space = FiniteMeasureSpace::from_weights(random_weights(n, 0.1, 10.0, &mut rng)).unwrap();
            let phase = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
            let tp = LampertiIsometry::new(random_permutation(n, &mut rng), phase, 1.5, space).unwrap();
            let tq = tp.with_exponent(4.0).unwrap();
            assert!(intertwining_check(&tp, &tq, &random_complex(n, &mut rng)).unwrap() <= 1e-10);
        }
        let space = FiniteMeasureSpace::uniform(3).unwrap();
        let f = random_complex(3, &mut rng);
        let perm = LampertiIsometry::new(Permutation::new(vec![1, 2, 0]).unwrap(), vec![0.0; 3], 1.0, space.clone()).unwrap();
        assert_eq!(intertwining_check(&perm, &perm.with_exponent(2.0).unwrap(), &f).unwrap(), 0.0);
        // With a phase the two sides differ only by rounding in |e^{iω}f|.
        let tp = LampertiIsometry::new(Permutation::new(vec![1, 2, 0]).unwrap(), vec![0.5, 1.0, 2.0], 1.0, space).unwrap();
        let scale = f.iter().map(|v| v.norm()).fold(1.0, f64::max);
        assert!(intertwining_check(&tp, &tp.with_exponent(2.0).unwrap(), &f).unwrap() <= 8.0 * f64::EPSILON * scale);
        let other = LampertiIsometry::identity(FiniteMeasureSpace::uniform(3).unwrap(), 2.0).unwrap();
        assert!(intertwining_check(&tp, &other, &f).is_err());
    }

    fn z3_rotation() -> NonsingularAction {
        let g = FiniteGroup::cyclic(3).unwrap();
        let perms = vec![
            Permutation::identity(3),
            Permutation::new(vec![1, 2, 0]).unwrap(),
            Permutation::new(vec![2, 0, 1]).unwrap(),
        ];
        NonsingularAction::new_checked(g, FiniteMeasureSpace::uniform(3).unwrap().normalize(), perms).unwrap()
    }

    #[test]
    fn formal_coboundary_examples() {
        let a = z3_rotation();
        let mut rng = seeded_rng(12);
        for _ in 0..20 {
            let f = random_complex(3, &mut rng);
            let r = formal_coboundary_transfer_check(&a, &f, 1.0, 2.0, 21).unwrap();
            assert!(r.pass && r.constant > 0.0, "{r:?}");
        }
        let flat = vec![Complex64::new(2.0, 1.0); 3];
        let r = formal_coboundary_transfer_check(&a, &flat, 1.0, 2.0, 21).unwrap();
        assert!(r.pass && r.min_ratio == 0.0);

        let triv = NonsingularAction::trivial(FiniteGroup::cyclic(1).unwrap(), FiniteMeasureSpace::uniform(3).unwrap());
        let r = formal_coboundary_transfer_check(&triv, &random_complex(3, &mut rng), 1.0, 3.0, 21).unwrap();
        assert!(r.pass && r.blocks == 3);

        let ns = a.with_space(FiniteMeasureSpace::from_weights(vec![1.0, 2.0, 3.0]).unwrap()).unwrap();
        assert!(matches!(
            formal_coboundary_transfer_check(&ns, &flat, 1.0, 2.0, 21),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn norm_transfer_examples() {
        let mut rng = seeded_rng(13);
        let c = check_lipschitz_ineq(1.0, 2.0, 20_000, 1).unwrap().statistic;
        let space = FiniteMeasureSpace::from_weights(random_weights(5, 0.1, 10.0, &mut rng)).unwrap();
        let f = random_complex(5, &mut rng);
        let r = norm_transfer_bound(&f, &f, &space, 1.0, 2.0, c).unwrap();
        assert!(r.lhs == 0.0 && r.rhs == 0.0 && r.holds);
        let pos: Vec<Complex64> = f.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
        let zero = vec![Complex64::new(0.0, 0.0); 5];
        let r = norm_transfer_bound(&pos, &zero, &space, 1.0, 2.0, c).unwrap();
        let expect = lp_norm(&pos, &space, 1.0).unwrap().powf(0.5);
        assert!((r.lhs - expect).abs() < 1e-12 && (r.rhs - c * expect).abs() < 1e-12);
    }
}
