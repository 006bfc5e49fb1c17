use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::profile::RadialProfile;
use crate::error::{LabError, Result};
use crate::quadrature::{integrate_pieces, QuadOptions, QuadResult};

const INNER_INTERVALS: usize = 400;
const OUTER_INTERVALS: usize = 2000;
/// Relative accuracy below which inner panels stop refining.
const INNER_REL_FLOOR: f64 = 1e-13;

/// Value and bookkeeping of one `profile_integral` evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralOutcome {
    pub value: f64,
    /// Outer error estimate plus the budget granted to inner integrals.
    pub error: f64,
    /// Profile evaluations, all levels.
    pub evals: usize,
}

pub(crate) fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(LabError::InvalidExponent(format!("p must be > 0, got {p}")));
    }
    if !q.is_finite() {
        return Err(LabError::InvalidExponent(format!("q must be finite, got {q}")));
    }
    if p >= q {
        return Err(LabError::ExponentOrder { p, q });
    }
    Ok(())
}

fn wrap(t: f64) -> f64 {
    (t + PI).rem_euclid(TAU) - PI
}

fn sorted_in(mut pts: Vec<f64>, a: f64, b: f64) -> Vec<f64> {
    pts.retain(|x| x.is_finite() && *x > a && *x < b);
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    let span = b - a;
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * span);
    if let Some(last) = pts.last_mut() {
        *last = b;
    }
    pts
}

/// `J(v) = ∫_C |φ(z+v) − φ(z)|^q dz` split as the integral over the
/// support disk `|z| < R` (polar around 0) plus the part of the shifted
/// disk lying outside it (polar around `−v`, angular part exact).
pub fn overlap_integral(phi: &RadialProfile, v: Complex64, q: f64, abs_tol: f64) -> Result<QuadResult> {
    let s = v.norm();
    let big_r = phi.radius();
    if s == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evals: 0,
            intervals: 0,
            converged: true,
        });
    }
    let alpha = v.arg();
    let crit = phi.critical_radii();
    let fail: RefCell<Option<LabError>> = RefCell::new(None);
    let mut evals = 0usize;

    let t_tol = 2.0 * abs_tol / (3.0 * big_r * big_r);
    let t_opts = QuadOptions {
        abs_tol: t_tol,
        rel_tol: INNER_REL_FLOOR,
        max_intervals: INNER_INTERVALS,
        smooth_endpoints: false,
    };
    let mut inner_evals = 0usize;
    let ring = |r: f64, inner_evals: &mut usize| -> f64 {
        let rs = r * s;
        let mut pts = Vec::with_capacity(2 * crit.len() + 4);
        if rs > 0.0 {
            for &rho in crit.iter().chain(std::iter::once(&r)) {
                // ρ − r is exact when the two are close; ρ² − r² would not be.
                let c = ((rho - r) * (rho + r) - s * s) / (2.0 * rs);
                if c.abs() < 1.0 {
                    let a = c.acos();
                    pts.push(wrap(alpha + a));
                    pts.push(wrap(alpha - a));
                }
            }
            pts.push(wrap(alpha));
            pts.push(wrap(alpha + PI));
        }
        let pts = sorted_in(pts, -PI, PI);
        let g = |t: f64| {
            // ρ² − r² = s² + 2rs·cos(t − α), kept free of cancellation.
            let lift = s * s + 2.0 * rs * (t - alpha).cos();
            let rho = (r * r + lift).max(0.0).sqrt();
            let delta = if r + rho > 0.0 { lift / (r + rho) } else { 0.0 };
            phi.increment(r, rho, delta).abs().powf(q)
        };
        match integrate_pieces(g, &pts, &t_opts).and_then(|res| res.require(t_tol)) {
            Ok(res) => {
                *inner_evals += res.evals;
                res.value
            }
            Err(e) => {
                fail.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };

    let mut r_pts = crit.to_vec();
    r_pts.push(0.5 * s);
    for &rho in crit {
        r_pts.push((rho - s).abs());
        r_pts.push(rho + s);
    }
    let r_pts = sorted_in(r_pts, 0.0, big_r);
    let r_opts = QuadOptions {
        abs_tol: abs_tol / 3.0,
        rel_tol: INNER_REL_FLOOR,
        max_intervals: INNER_INTERVALS,
        smooth_endpoints: true,
    };
    let part1 = integrate_pieces(|r| r * ring(r, &mut inner_evals), &r_pts, &r_opts)?;
    if let Some(e) = fail.borrow_mut().take() {
        return Err(e);
    }
    let part1 = part1.require(r_opts.abs_tol)?;
    evals += part1.evals + inner_evals;

    let outside = |r: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let kappa = ((r - big_r) * (r + big_r) + s * s) / (2.0 * r * s);
        let arc = if kappa >= 1.0 {
            TAU
        } else if kappa <= -1.0 {
            0.0
        } else {
            TAU - 2.0 * kappa.acos()
        };
        r * phi.radial(r).abs().powf(q) * arc
    };
    let mut o_pts = crit.to_vec();
    o_pts.extend([big_r - s, s - big_r, s + big_r]);
    let o_pts = sorted_in(o_pts, 0.0, big_r);
    let part2 = integrate_pieces(outside, &o_pts, &r_opts)?.require(r_opts.abs_tol)?;
    evals += part2.evals;

    Ok(QuadResult {
        value: part1.value + part2.value,
        error: part1.error + part2.error,
        evals,
        intervals: part1.intervals + part2.intervals,
        converged: true,
    })
}

/// Upper bound on `J(s)`: the integrand is at most `min(2M, Ks)^q` on a
/// set of measure at most `2S`.
fn overlap_bound(phi: &RadialProfile, s: f64, q: f64) -> f64 {
    2.0 * phi.support_measure() * (2.0 * phi.sup()).min(phi.lipschitz() * s).powf(q)
}

/// `∫₀^∞ p u^{-p-1} J_bound(u|w|) du` in closed form.
fn integral_bound(phi: &RadialProfile, p: f64, q: f64, w: f64) -> f64 {
    let s2 = 2.0 * phi.support_measure();
    let (k, m) = (phi.lipschitz(), phi.sup());
    let u_star = 2.0 * m / (k * w);
    s2 * (k * w).powf(q) * p * u_star.powf(q - p) / (q - p) + s2 * (2.0 * m).powf(q) * u_star.powf(-p)
}

/// `I(w) = ∫_C ∫₀^∞ |φ(z + λ^{-1/p} w) − φ(z)|^q dλ dz` to absolute
/// accuracy `tol`, for `0 < p < q`.
pub fn profile_integral(phi: &RadialProfile, p: f64, q: f64, w: Complex64, tol: f64) -> Result<f64> {
    profile_integral_detailed(phi, p, q, w, tol).map(|o| o.value)
}

pub fn profile_integral_detailed(
    phi: &RadialProfile,
    p: f64,
    q: f64,
    w: Complex64,
    tol: f64,
) -> Result<IntegralOutcome> {
    check_exponents(p, q)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(LabError::InvalidInput(format!("tolerance must be > 0, got {tol}")));
    }
    let a = w.norm();
    if a == 0.0 {
        return Ok(IntegralOutcome {
            value: 0.0,
            error: 0.0,
            evals: 0,
        });
    }
    if !a.is_finite() {
        return Err(LabError::InvalidInput("w must be finite".into()));
    }
    let big_r = phi.radius();
    // λ^{-1/p} = u; for u ≥ 2R/|w| the two supports are disjoint.
    let u_max = 2.0 * big_r / a;
    let tail = 2.0 * phi.power_integral(q)? * u_max.powf(-p);

    let eta = 0.5 * tol / integral_bound(phi, p, q, a);
    let fail: RefCell<Option<LabError>> = RefCell::new(None);
    let evals = RefCell::new(0usize);
    let g = |u: f64| -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let s = u * a;
        let budget = eta * overlap_bound(phi, s, q);
        match overlap_integral(phi, w * u, q, budget) {
            Ok(res) => {
                *evals.borrow_mut() += res.evals;
                p * u.powf(-p - 1.0) * res.value
            }
            Err(e) => {
                fail.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };

    // Kinks of J(s) sit where two critical circles become tangent.
    let crit = phi.critical_radii();
    let mut s_pts = Vec::new();
    for &r1 in crit {
        for &r2 in crit {
            s_pts.push((r1 - r2).abs());
            s_pts.push(r1 + r2);
        }
    }
    let s_pts = sorted_in(s_pts, 0.0, 2.0 * big_r);
    let u_pts: Vec<f64> = s_pts.iter().map(|s| s / a).collect();
    let u0 = u_pts[1];

    // Near 0 the integrand behaves like u^{q-p-1}; u = u0·t^m removes the
    // singularity.
    let m = (1.0 / (q - p)).max(1.0);
    let opts = QuadOptions {
        abs_tol: 0.25 * tol,
        rel_tol: 0.0,
        max_intervals: OUTER_INTERVALS,
        smooth_endpoints: true,
    };
    let head = integrate_pieces(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let u = u0 * t.powf(m);
            g(u) * m * u0 * t.powf(m - 1.0)
        },
        &[0.0, 1.0],
        &opts,
    )?;
    if let Some(e) = fail.borrow_mut().take() {
        return Err(e);
    }
    let head = head.require(opts.abs_tol)?;
    let body = integrate_pieces(g, &u_pts[1..], &opts)?;
    if let Some(e) = fail.borrow_mut().take() {
        return Err(e);
    }
    let body = body.require(opts.abs_tol)?;
    let evals = evals.into_inner() + head.evals + body.evals;
    Ok(IntegralOutcome {
        value: head.value + body.value + tail,
        error: head.error + body.error + 0.5 * tol,
        evals,
    })
}

/// `C(q) = I(1)`.
pub fn cq_constant(phi: &RadialProfile, p: f64, q: f64, tol: f64) -> Result<f64> {
    profile_integral(phi, p, q, Complex64::new(1.0, 0.0), tol)
}
