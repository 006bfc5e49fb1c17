//! Seeded generators for actions, weights, permutations and orthogonal
//! matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{LabError, Result};
use crate::group::FiniteGroup;
use crate::measure::Permutation;

/// Left multiplication on the cosets `gH`, cosets numbered by first
/// appearance along the element order.
pub fn coset_action(group: &FiniteGroup, subgroup: &[usize]) -> Vec<Permutation> {
    let n = group.order();
    let mut coset_of = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for g in 0..n {
        if coset_of[g] != usize::MAX {
            continue;
        }
        let k = reps.len();
        reps.push(g);
        for &h in subgroup {
            coset_of[group.mul(g, h)] = k;
        }
    }
    (0..n)
        .map(|g| {
            let img = reps.iter().map(|&r| coset_of[group.mul(g, r)]).collect();
            Permutation::new(img).expect("left multiplication permutes cosets")
        })
        .collect()
}

/// Disjoint union of actions on `0..n₁`, `n₁..n₁+n₂`, ...
pub fn disjoint_union(parts: &[Vec<Permutation>]) -> Vec<Permutation> {
    let order = parts.first().map_or(0, |p| p.len());
    (0..order)
        .map(|g| {
            let mut img = Vec::new();
            for part in parts {
                let off = img.len();
                img.extend(part[g].images().iter().map(|&y| y + off));
            }
            Permutation::new(img).expect("union of bijections")
        })
        .collect()
}

/// A random action on at most `max_atoms` points: a union of coset actions
/// whose first orbit is nontrivial, with atoms shuffled.
pub fn random_action<R: Rng + ?Sized>(group: &FiniteGroup, max_atoms: usize, rng: &mut R) -> Result<Vec<Permutation>> {
    let subgroups = group.subgroups();
    let n = group.order();
    let proper: Vec<&Vec<usize>> = subgroups.iter().filter(|h| h.len() < n && n / h.len() <= max_atoms).collect();
    if proper.is_empty() {
        return Err(LabError::Precondition(format!(
            "no nontrivial orbit of a group of order {n} fits in {max_atoms} atoms"
        )));
    }
    let first = proper[rng.random_range(0..proper.len())];
    let mut used = n / first.len();
    let mut parts = vec![coset_action(group, first)];
    loop {
        let fits: Vec<&Vec<usize>> = subgroups.iter().filter(|h| used + n / h.len() <= max_atoms).collect();
        if fits.is_empty() || rng.random_bool(0.4) {
            break;
        }
        let h = fits[rng.random_range(0..fits.len())];
        used += n / h.len();
        parts.push(coset_action(group, h));
    }
    let union = disjoint_union(&parts);
    let relabel = random_permutation(used, rng);
    let inv = relabel.inverse();
    Ok(union.iter().map(|p| relabel.compose(p).compose(&inv)).collect())
}

/// Like [`random_action`] but on exactly `atoms` points, padding with
/// smaller orbits (fixed points always fit).
pub fn random_action_exact<R: Rng + ?Sized>(group: &FiniteGroup, atoms: usize, rng: &mut R) -> Result<Vec<Permutation>> {
    let subgroups = group.subgroups();
    let n = group.order();
    let proper: Vec<&Vec<usize>> = subgroups.iter().filter(|h| h.len() < n && n / h.len() <= atoms).collect();
    if proper.is_empty() {
        return Err(LabError::Precondition(format!(
            "no nontrivial orbit of a group of order {n} fits in {atoms} atoms"
        )));
    }
    let first = proper[rng.random_range(0..proper.len())];
    let mut used = n / first.len();
    let mut parts = vec![coset_action(group, first)];
    while used < atoms {
        let fits: Vec<&Vec<usize>> = subgroups.iter().filter(|h| used + n / h.len() <= atoms).collect();
        let h = fits[rng.random_range(0..fits.len())];
        used += n / h.len();
        parts.push(coset_action(group, h));
    }
    let union = disjoint_union(&parts);
    let relabel = random_permutation(used, rng);
    let inv = relabel.inverse();
    Ok(union.iter().map(|p| relabel.compose(p).compose(&inv)).collect())
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Permutation::new(v).expect("shuffle is a bijection")
}

/// Log-uniform weights in `[lo, hi]`.
pub fn random_weights<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|_| rng.random_range(a..=b).exp()).collect()
}

/// Entries with real and imaginary parts standard normal.
pub fn random_complex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

pub fn random_real<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{check_action, NonsingularAction};
    use crate::measure::FiniteMeasureSpace;
    use crate::rng::seeded_rng;

    #[test]
    fn coset_actions_are_actions() {
        for name in ["Z2", "Z3", "Z4", "S3", "klein"] {
            let g = FiniteGroup::by_name(name).unwrap();
            for h in g.subgroups() {
                let perms = coset_action(&g, &h);
                assert_eq!(perms[0].len(), g.order() / h.len());
                let a = NonsingularAction::new(g.clone(), FiniteMeasureSpace::uniform(perms[0].len()).unwrap(), perms).unwrap();
                assert!(check_action(&a).pass);
                assert_eq!(a.orbits().len(), 1);
            }
        }
    }

    #[test]
    fn random_actions_fit() {
        let mut rng = seeded_rng(1);
        for name in ["Z2", "Z3", "Z4", "S3"] {
            let g = FiniteGroup::by_name(name).unwrap();
            for _ in 0..50 {
                let perms = random_action(&g, 8, &mut rng).unwrap();
                let n = perms[0].len();
                assert!(n <= 8);
                let a = NonsingularAction::new_checked(g.clone(), FiniteMeasureSpace::uniform(n).unwrap(), perms).unwrap();
                assert!(a.orbits().iter().any(|o| o.len() > 1));
            }
        }
        assert!(random_action(&FiniteGroup::by_name("S3").unwrap(), 1, &mut rng).is_err());
        let s3 = FiniteGroup::by_name("S3").unwrap();
        for atoms in 2..9 {
            assert_eq!(random_action_exact(&s3, atoms, &mut rng).unwrap()[0].len(), atoms);
        }
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = seeded_rng(2);
        for n in 1..7 {
            let q = random_orthogonal(n, &mut rng);
            let e = &q.transpose() * &q - DMatrix::identity(n, n);
            assert!(e.amax() < 1e-12);
        }
    }
}
