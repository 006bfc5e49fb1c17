use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::FiniteGroup;
use crate::error::{check_len, LabError, Result};
use crate::measure::{pushforward_density, DensityFunction, FiniteMeasureSpace, Permutation};

/// A group acting on the atoms of a finite measure space by permutations.
///
/// Nothing forces the permutations to preserve the weights; the
/// Radon–Nikodym densities `D(g) = d(σ_g)_*μ / dμ` are precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct NonsingularAction {
    group: FiniteGroup,
    space: FiniteMeasureSpace,
    perm: Vec<Permutation>,
    density: Vec<DensityFunction>,
}

/// Outcome of [`check_action`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActionReport {
    pub pass: bool,
    /// First pair `(g, h)` with `σ_{gh} ≠ σ_g σ_h`, by element name.
    pub violation: Option<(String, String)>,
}

impl NonsingularAction {
    /// Assemble an action; shapes are validated, the homomorphism property
    /// is not (see [`check_action`] and [`NonsingularAction::new_checked`]).
    pub fn new(group: FiniteGroup, space: FiniteMeasureSpace, perm: Vec<Permutation>) -> Result<Self> {
        check_len(group.order(), perm.len())?;
        for p in &perm {
            check_len(space.len(), p.len())?;
        }
        let density = perm
            .iter()
            .map(|p| pushforward_density(p, &space))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            group,
            space,
            perm,
            density,
        })
    }

    /// Like [`NonsingularAction::new`] but rejects non-homomorphisms.
    pub fn new_checked(group: FiniteGroup, space: FiniteMeasureSpace, perm: Vec<Permutation>) -> Result<Self> {
        let a = Self::new(group, space, perm)?;
        let report = check_action(&a);
        match report.violation {
            None => Ok(a),
            Some((g, h)) => Err(LabError::InvalidInput(format!(
                "not an action: σ({g}·{h}) ≠ σ({g})∘σ({h})"
            ))),
        }
    }

    /// Every element acts as the identity.
    pub fn trivial(group: FiniteGroup, space: FiniteMeasureSpace) -> Self {
        let perm = vec![Permutation::identity(space.len()); group.order()];
        Self::new(group, space, perm).expect("shapes agree")
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn perm(&self, g: usize) -> &Permutation {
        &self.perm[g]
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perm
    }

    /// `D(g)`.
    pub fn density(&self, g: usize) -> &DensityFunction {
        &self.density[g]
    }

    /// `σ_g(x)`.
    #[inline]
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.perm[g].apply(x)
    }

    /// `σ_g⁻¹(x)`.
    #[inline]
    pub fn act_inv(&self, g: usize, x: usize) -> usize {
        self.perm[self.group.inv(g)].apply(x)
    }

    pub fn is_measure_preserving(&self, tol: f64) -> bool {
        self.density.iter().all(|d| d.is_one(tol))
    }

    /// Same action, weights replaced.
    pub fn with_space(&self, space: FiniteMeasureSpace) -> Result<Self> {
        Self::new(self.group.clone(), space, self.perm.clone())
    }

    /// Orbits of the action, each sorted, ordered by smallest atom.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.space.len();
        let mut assigned = vec![false; n];
        let mut out = Vec::new();
        for x in 0..n {
            if assigned[x] {
                continue;
            }
            let mut orbit: Vec<usize> = self.perm.iter().map(|p| p.apply(x)).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &y in &orbit {
                assigned[y] = true;
            }
            out.push(orbit);
        }
        out
    }

    /// Relabel atoms: atom `x` becomes atom `relabel(x)`.
    pub fn relabel(&self, relabel: &Permutation) -> Result<Self> {
        check_len(self.space.len(), relabel.len())?;
        let inv = relabel.inverse();
        let n = self.space.len();
        let atoms = (0..n).map(|y| self.space.atoms()[inv.apply(y)].clone()).collect();
        let weights = (0..n).map(|y| self.space.weight(inv.apply(y))).collect();
        let space = FiniteMeasureSpace::new(atoms, weights)?;
        let perm = self
            .perm
            .iter()
            .map(|p| relabel.compose(p).compose(&inv))
            .collect();
        Self::new(self.group.clone(), space, perm)
    }
}

/// Check `σ_e = id` and `σ_{gh} = σ_g ∘ σ_h`, reporting the first failure.
pub fn check_action(action: &NonsingularAction) -> ActionReport {
    let g = &action.group;
    let e = g.identity();
    if !action.perm[e].is_identity() {
        return ActionReport {
            pass: false,
            violation: Some((g.name(e).to_string(), g.name(e).to_string())),
        };
    }
    for a in 0..g.order() {
        for b in 0..g.order() {
            if action.perm[g.mul(a, b)] != action.perm[a].compose(&action.perm[b]) {
                return ActionReport {
                    pass: false,
                    violation: Some((g.name(a).to_string(), g.name(b).to_string())),
                };
            }
        }
    }
    ActionReport {
        pass: true,
        violation: None,
    }
}

impl Serialize for NonsingularAction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct PermMap<'a>(&'a NonsingularAction);
        impl Serialize for PermMap<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.perm.len()))?;
                for (g, p) in self.0.perm.iter().enumerate() {
                    m.serialize_entry(self.0.group.name(g), p.images())?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("group", &self.group)?;
        m.serialize_entry("space", &self.space)?;
        m.serialize_entry("perm", &PermMap(self))?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for NonsingularAction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            group: FiniteGroup,
            space: FiniteMeasureSpace,
            perm: BTreeMap<String, Permutation>,
        }
        let raw = Raw::deserialize(d)?;
        let perm = per_element(&raw.group, raw.perm).map_err(serde::de::Error::custom)?;
        NonsingularAction::new(raw.group, raw.space, perm).map_err(serde::de::Error::custom)
    }
}

/// Reorder a name-keyed map into group element order.
pub(crate) fn per_element<T>(group: &FiniteGroup, mut map: BTreeMap<String, T>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(group.order());
    for name in group.elements() {
        out.push(
            map.remove(name)
                .ok_or_else(|| LabError::InvalidInput(format!("missing entry for group element {name:?}")))?,
        );
    }
    if let Some(extra) = map.keys().next() {
        return Err(LabError::InvalidInput(format!("unknown group element {extra:?}")));
    }
    Ok(out)
}
