use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::action::per_element;
use super::NonsingularAction;
use crate::error::{check_len, LabError, Result};

/// Abelian group a cocycle takes values in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientGroup {
    /// `(R, +)`
    #[serde(rename = "real")]
    Real,
    /// `(C, +)`
    #[serde(rename = "complex")]
    Complex,
    /// The circle, stored as angles in `[0, 2π)`.
    #[serde(rename = "circle")]
    Circle,
    /// `(R_+^*, ×)`, stored as logarithms.
    #[serde(rename = "logpos")]
    LogPositive,
}

impl CoefficientGroup {
    pub fn label(self) -> &'static str {
        match self {
            Self::Real => "real",
            Self::Complex => "complex",
            Self::Circle => "circle",
            Self::LogPositive => "logpos",
        }
    }

    /// Canonical representative of a value.
    pub fn normalize(self, v: Complex64) -> Complex64 {
        match self {
            Self::Complex => v,
            Self::Real | Self::LogPositive => Complex64::new(v.re, 0.0),
            Self::Circle => Complex64::new(wrap_angle(v.re), 0.0),
        }
    }

    pub fn add(self, a: Complex64, b: Complex64) -> Complex64 {
        self.normalize(a + b)
    }

    pub fn sub(self, a: Complex64, b: Complex64) -> Complex64 {
        self.normalize(a - b)
    }

    /// Invariant metric on the coefficient group.
    pub fn dist(self, a: Complex64, b: Complex64) -> f64 {
        match self {
            Self::Complex => (a - b).norm(),
            Self::Real | Self::LogPositive => (a.re - b.re).abs(),
            Self::Circle => angle_dist(a.re, b.re),
        }
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Quotient metric on `R / 2πZ`.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// A 1-cocycle `c : G → (atoms → A)`, indexed `values[g][x]`.
///
/// Real-like coefficient groups keep their value in the real part.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocycle {
    coeff: CoefficientGroup,
    values: Vec<Vec<Complex64>>,
}

/// Result of [`check_cocycle`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CocycleReport {
    pub pass: bool,
    pub max_residual: f64,
    /// `(g, h, x)` where the residual is largest.
    pub worst: Option<(usize, usize, usize)>,
}

impl Cocycle {
    pub fn new(coeff: CoefficientGroup, values: Vec<Vec<Complex64>>) -> Self {
        let values = values
            .into_iter()
            .map(|row| row.into_iter().map(|v| coeff.normalize(v)).collect())
            .collect();
        Self { coeff, values }
    }

    pub fn from_real(coeff: CoefficientGroup, values: Vec<Vec<f64>>) -> Self {
        Self::new(
            coeff,
            values
                .into_iter()
                .map(|row| row.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zero(coeff: CoefficientGroup, order: usize, atoms: usize) -> Self {
        Self::new(coeff, vec![vec![Complex64::new(0.0, 0.0); atoms]; order])
    }

    pub fn coeff(&self) -> CoefficientGroup {
        self.coeff
    }

    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }

    pub fn at(&self, g: usize) -> &[Complex64] {
        &self.values[g]
    }

    /// Real parts of `c(g)`; for circle coefficients these are the angles.
    pub fn real_at(&self, g: usize) -> Vec<f64> {
        self.values[g].iter().map(|v| v.re).collect()
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn atoms(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Pointwise sum of two cocycles with the same coefficients.
    pub fn add(&self, other: &Cocycle) -> Result<Cocycle> {
        self.expect_coeff(other.coeff)?;
        check_len(self.order(), other.order())?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| self.coeff.add(*x, *y)).collect())
            .collect();
        Ok(Cocycle {
            coeff: self.coeff,
            values,
        })
    }

    pub fn expect_coeff(&self, coeff: CoefficientGroup) -> Result<()> {
        if self.coeff == coeff {
            Ok(())
        } else {
            Err(LabError::CoefficientMismatch {
                expected: coeff.label(),
                actual: self.coeff.label(),
            })
        }
    }

    fn check_shape(&self, action: &NonsingularAction) -> Result<()> {
        check_len(action.group().order(), self.order())?;
        for row in &self.values {
            check_len(action.space().len(), row.len())?;
        }
        Ok(())
    }
}

/// Max over `(g, h, x)` of `d(c(gh)(x), c(g)(x) + c(h)(σ_g⁻¹x))`.
pub fn check_cocycle(c: &Cocycle, action: &NonsingularAction, tol: f64) -> Result<CocycleReport> {
    c.check_shape(action)?;
    let grp = action.group();
    let k = c.coeff;
    let mut max_residual = 0.0f64;
    let mut worst = None;
    for g in 0..grp.order() {
        for h in 0..grp.order() {
            let gh = grp.mul(g, h);
            for x in 0..action.space().len() {
                let rhs = k.add(c.values[g][x], c.values[h][action.act_inv(g, x)]);
                let r = k.dist(c.values[gh][x], rhs);
                if r > max_residual || worst.is_none() {
                    max_residual = max_residual.max(r);
                    worst = Some((g, h, x));
                }
            }
        }
    }
    Ok(CocycleReport {
        pass: max_residual <= tol,
        max_residual,
        worst,
    })
}

/// [`check_cocycle`] after asserting the coefficient group.
pub fn check_cocycle_in(
    c: &Cocycle,
    coeff: CoefficientGroup,
    action: &NonsingularAction,
    tol: f64,
) -> Result<CocycleReport> {
    c.expect_coeff(coeff)?;
    check_cocycle(c, action, tol)
}

/// The coboundary `g ↦ σ_g(f) − f`, i.e. `c(g)(x) = f(σ_g⁻¹x) − f(x)`.
pub fn coboundary(coeff: CoefficientGroup, f: &[Complex64], action: &NonsingularAction) -> Result<Cocycle> {
    check_len(action.space().len(), f.len())?;
    let values = (0..action.group().order())
        .map(|g| {
            (0..f.len())
                .map(|x| coeff.sub(f[action.act_inv(g, x)], f[x]))
                .collect()
        })
        .collect();
    Ok(Cocycle::new(coeff, values))
}

/// The Radon–Nikodym cocycle `log D(g)` in additive form.
pub fn log_density_cocycle(action: &NonsingularAction) -> Cocycle {
    let values = (0..action.group().order())
        .map(|g| action.density(g).values().iter().map(|d| d.ln()).collect())
        .collect();
    Cocycle::from_real(CoefficientGroup::LogPositive, values)
}

/// A scalar, or a `[re, im]` pair for complex coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientValue {
    Scalar(f64),
    Pair([f64; 2]),
}

fn value_json(coeff: CoefficientGroup, v: Complex64) -> CoefficientValue {
    match coeff {
        CoefficientGroup::Complex => CoefficientValue::Pair([v.re, v.im]),
        _ => CoefficientValue::Scalar(v.re),
    }
}

impl Serialize for Cocycle {
    /// `{"coeff": .., "values": [[..]]}` indexed by element position; see
    /// [`Cocycle::to_json_keyed`] for the element-keyed form.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("coeff", &self.coeff)?;
        let rows: Vec<Vec<CoefficientValue>> = self
            .values
            .iter()
            .map(|r| r.iter().map(|v| value_json(self.coeff, *v)).collect())
            .collect();
        m.serialize_entry("values", &rows)?;
        m.end()
    }
}

/// Element-keyed cocycle document: `{"coeff": .., "values": {g: [..]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocycleDoc {
    pub coeff: CoefficientGroup,
    pub values: BTreeMap<String, Vec<CoefficientValue>>,
}

impl Cocycle {
    /// Element-keyed document for the given group.
    pub fn to_doc(&self, group: &super::FiniteGroup) -> CocycleDoc {
        let values = (0..self.order())
            .map(|g| {
                let row = self.values[g].iter().map(|v| value_json(self.coeff, *v)).collect();
                (group.name(g).to_string(), row)
            })
            .collect();
        CocycleDoc {
            coeff: self.coeff,
            values,
        }
    }

    pub fn from_doc(doc: CocycleDoc, group: &super::FiniteGroup) -> Result<Self> {
        let coeff = doc.coeff;
        let rows = per_element(group, doc.values)?;
        let values = rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| match (coeff, v) {
                        (_, CoefficientValue::Scalar(x)) => Ok(Complex64::new(x, 0.0)),
                        (CoefficientGroup::Complex, CoefficientValue::Pair([re, im])) => Ok(Complex64::new(re, im)),
                        (k, CoefficientValue::Pair(_)) => Err(LabError::CoefficientMismatch {
                            expected: k.label(),
                            actual: "complex",
                        }),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Cocycle::new(coeff, values))
    }
}

impl<'de> Deserialize<'de> for Cocycle {
    /// Accepts the positional form written by `Serialize`.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            coeff: CoefficientGroup,
            values: Vec<Vec<CoefficientValue>>,
        }
        let raw = Raw::deserialize(d)?;
        let values = raw
            .values
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| match v {
                        CoefficientValue::Scalar(x) => Complex64::new(x, 0.0),
                        CoefficientValue::Pair([re, im]) => Complex64::new(re, im),
                    })
                    .collect()
            })
            .collect();
        Ok(Cocycle::new(raw.coeff, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::measure::{complexify, FiniteMeasureSpace, Permutation};
    use std::f64::consts::PI;

    fn swap_action(weights: Vec<f64>) -> NonsingularAction {
        NonsingularAction::new(
            FiniteGroup::cyclic(2).unwrap(),
            FiniteMeasureSpace::from_weights(weights).unwrap(),
            vec![Permutation::identity(2), Permutation::new(vec![1, 0]).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn zero_cocycle_passes() {
        let a = swap_action(vec![1.0, 2.0]);
        let r = check_cocycle(&Cocycle::zero(CoefficientGroup::Real, 2, 2), &a, 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn coboundary_of_indicator_under_swap() {
        let a = swap_action(vec![1.0, 1.0]);
        let c = coboundary(CoefficientGroup::Real, &complexify(&[1.0, 0.0]), &a).unwrap();
        assert_eq!(c.real_at(1), vec![-1.0, 1.0]);
        assert_eq!(c.real_at(0), vec![0.0, 0.0]);
        let k = coboundary(CoefficientGroup::Real, &complexify(&[3.5, 3.5]), &a).unwrap();
        assert!(k.values().iter().flatten().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn log_density_is_a_cocycle() {
        let a = swap_action(vec![1.0, 2.0]);
        let c = log_density_cocycle(&a);
        assert!(check_cocycle(&c, &a, 1e-12).unwrap().pass);
        assert!(check_cocycle_in(&c, CoefficientGroup::LogPositive, &a, 1e-12).unwrap().pass);
    }

    #[test]
    fn coefficient_mismatch_is_a_type_error() {
        let a = swap_action(vec![1.0, 2.0]);
        let c = log_density_cocycle(&a);
        assert!(matches!(
            check_cocycle_in(&c, CoefficientGroup::Circle, &a, 1e-12),
            Err(LabError::CoefficientMismatch { .. })
        ));
        assert!(c.add(&Cocycle::zero(CoefficientGroup::Real, 2, 2)).is_err());
    }

    #[test]
    fn non_cocycle_is_flagged() {
        let a = swap_action(vec![1.0, 1.0]);
        let c = Cocycle::from_real(CoefficientGroup::Real, vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        let r = check_cocycle(&c, &a, 1e-9).unwrap();
        assert!(!r.pass);
        assert!((r.max_residual - 2.0).abs() < 1e-15);
    }

    #[test]
    fn circle_values_use_angle_metric() {
        let k = CoefficientGroup::Circle;
        assert!((k.dist(Complex64::new(0.01, 0.0), Complex64::new(TAU - 0.01, 0.0)) - 0.02).abs() < 1e-12);
        let a = swap_action(vec![1.0, 1.0]);
        // π + π = 2π ≡ 0: a Z_2 character.
        let c = Cocycle::from_real(k, vec![vec![0.0, 0.0], vec![PI, PI]]);
        assert!(check_cocycle(&c, &a, 1e-12).unwrap().pass);
    }

    #[test]
    fn json_forms() {
        let g = FiniteGroup::cyclic(2).unwrap();
        let c = Cocycle::new(
            CoefficientGroup::Complex,
            vec![vec![Complex64::new(0.0, 0.0)], vec![Complex64::new(1.0, -2.0)]],
        );
        let doc = serde_json::to_value(c.to_doc(&g)).unwrap();
        assert_eq!(doc["coeff"], "complex");
        assert_eq!(doc["values"]["1"], serde_json::json!([[1.0, -2.0]]));
        let back = Cocycle::from_doc(serde_json::from_value(doc).unwrap(), &g).unwrap();
        assert_eq!(back, c);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Cocycle>(&text).unwrap(), c);
    }
}
