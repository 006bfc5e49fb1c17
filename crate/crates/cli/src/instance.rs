//! Random `(action, cocycle)` instances and their JSON documents.

use std::f64::consts::TAU;

use lplab_core::group::{check_action, check_cocycle, coboundary, Cocycle, CoefficientGroup, FiniteGroup, NonsingularAction};
use lplab_core::lp::{AffineAction, AffineActionDoc};
use lplab_core::random::{random_action_exact, random_complex, random_weights};
use lplab_core::rng::seeded_rng;
use lplab_core::{Complex64, FiniteMeasureSpace, LabError};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest space the generator will build.
pub const MAX_ATOMS: usize = 64;

/// Residual tolerance for the validation of generated instances.
pub const INSTANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    MeasurePreserving,
    Nonsingular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranslationKind {
    #[default]
    Random,
    Zero,
}

/// What to generate: `{"group", "kind", "atoms", "weights", "phases", "translation"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub group: String,
    pub kind: InstanceKind,
    /// Defaults to the length of `weights`, else 4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    /// Fixed weights (nonsingular kind only); random log-uniform otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Draw phases on the `N`-th roots of unity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<usize>,
    #[serde(default)]
    pub translation: TranslationKind,
}

impl InstanceSpec {
    pub fn new(group: &str, kind: InstanceKind, atoms: usize) -> Self {
        Self {
            group: group.to_string(),
            kind,
            atoms: Some(atoms),
            weights: None,
            phases: None,
            translation: TranslationKind::Random,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.weights.as_ref().map(Vec::len).or(self.atoms).unwrap_or(4)
    }
}

/// A generated or loaded affine action with its provenance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub kind: InstanceKind,
    pub seed: Option<u64>,
    /// Grid size of the phases, if any are nonzero.
    pub phases: Option<usize>,
    pub alpha: AffineAction,
}

/// On-disk form of an [`Instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub kind: InstanceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<usize>,
    pub group: FiniteGroup,
    pub space: FiniteMeasureSpace,
    pub action: AffineActionDoc,
}

impl Instance {
    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            kind: self.kind,
            seed: self.seed,
            phases: self.phases,
            group: self.alpha.group().clone(),
            space: self.alpha.space().clone(),
            action: self.alpha.to_doc(),
        }
    }

    pub fn from_doc(doc: InstanceDoc) -> lplab_core::Result<Self> {
        let alpha = AffineAction::from_doc(doc.action, doc.group, doc.space, INSTANCE_TOL)?;
        if doc.kind == InstanceKind::MeasurePreserving && !alpha.action().is_measure_preserving(1e-12) {
            return Err(LabError::Precondition(
                "instance is declared measure-preserving but its densities are not 1".into(),
            ));
        }
        Ok(Self {
            kind: doc.kind,
            seed: doc.seed,
            phases: doc.phases,
            alpha,
        })
    }
}

/// A generator of the whole group, if it is cyclic.
fn cyclic_generator(group: &FiniteGroup) -> Option<usize> {
    let n = group.order();
    (0..n).find(|&g| {
        let mut x = g;
        let mut k = 1;
        while x != group.identity() {
            x = group.mul(x, g);
            k += 1;
        }
        k == n
    })
}

/// Phase cocycle on the `N`-th roots of unity: the coboundary of a random
/// grid function plus, for a cyclic group whose order divides `N`, a random
/// character.
fn random_phase<R: Rng + ?Sized>(action: &NonsingularAction, n: usize, rng: &mut R) -> lplab_core::Result<Cocycle> {
    let step = TAU / n as f64;
    let m = action.space().len();
    let f: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(step * rng.random_range(0..n) as f64, 0.0))
        .collect();
    let mut phase = coboundary(CoefficientGroup::Circle, &f, action)?;
    let group = action.group();
    let order = group.order();
    if let Some(gen) = cyclic_generator(group).filter(|_| n % order == 0) {
        let j = rng.random_range(0..order);
        let mut chi = vec![vec![0.0; m]; order];
        let mut x = group.identity();
        for k in 0..order {
            chi[x] = vec![step * ((j * k * (n / order)) % n) as f64; m];
            x = group.mul(x, gen);
        }
        phase = phase.add(&Cocycle::from_real(CoefficientGroup::Circle, chi))?;
    }
    Ok(phase)
}

/// Build a random instance on `spec.atom_count()` atoms for exponent `p`.
///
/// The permutation action is a random disjoint union of coset actions with
/// at least one nontrivial orbit; atoms are relabelled at random. The
/// translation part is a coboundary `π(g)v − v` of a random `v`, which over
/// a finite group exhausts all cocycles. Everything is drawn from the
/// stream `(seed, 0)`.
pub fn generate_random_instance(spec: &InstanceSpec, p: f64, seed: u64) -> lplab_core::Result<Instance> {
    let group = FiniteGroup::by_name(&spec.group)?;
    let atoms = spec.atom_count();
    if atoms == 0 || atoms > MAX_ATOMS {
        return Err(LabError::InvalidInput(format!(
            "atom count {atoms} outside the supported range 1..={MAX_ATOMS}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let perms = random_action_exact(&group, atoms, &mut rng)?;
    let weights = match (&spec.weights, spec.kind) {
        (Some(w), _) => w.clone(),
        (None, InstanceKind::MeasurePreserving) => vec![1.0 / atoms as f64; atoms],
        (None, InstanceKind::Nonsingular) => {
            let w = random_weights(atoms, 0.2, 5.0, &mut rng);
            let total: f64 = w.iter().sum();
            w.iter().map(|x| x / total).collect()
        }
    };
    let space = FiniteMeasureSpace::from_weights(weights)?;
    let action = NonsingularAction::new(group, space, perms)?;
    if let Some((g, h)) = check_action(&action).violation {
        return Err(LabError::InvalidInput(format!("generated map is not an action at ({g}, {h})")));
    }
    if spec.kind == InstanceKind::MeasurePreserving && !action.is_measure_preserving(1e-12) {
        return Err(LabError::Precondition(
            "weights are not invariant under the generated action".into(),
        ));
    }
    let order = action.group().order();
    let phase = match spec.phases {
        Some(n) => random_phase(&action, n, &mut rng)?,
        None => Cocycle::zero(CoefficientGroup::Circle, order, atoms),
    };
    let report = check_cocycle(&phase, &action, INSTANCE_TOL)?;
    if !report.pass {
        return Err(LabError::InvalidInput(format!(
            "generated phase is not a cocycle (residual {:e})",
            report.max_residual
        )));
    }
    let v = match spec.translation {
        TranslationKind::Random => random_complex(atoms, &mut rng),
        TranslationKind::Zero => vec![Complex64::new(0.0, 0.0); atoms],
    };
    let alpha = AffineAction::from_phase_and_coboundary(action, phase, &v, p)?;
    Ok(Instance {
        kind: spec.kind,
        seed: Some(seed),
        phases: spec.phases,
        alpha,
    })
}
