use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measure::Permutation;

/// Largest group order the checks are tuned for; larger inputs only warn.
pub const SUPPORTED_ORDER: usize = 64;

#[derive(Deserialize, Serialize)]
struct RawGroup {
    elements: Vec<String>,
    mult: Vec<Vec<usize>>,
}

/// A finite group given by its full multiplication table.
///
/// `mult[g][h]` is the index of `g·h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGroup", into = "RawGroup")]
pub struct FiniteGroup {
    elements: Vec<String>,
    mult: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl TryFrom<RawGroup> for FiniteGroup {
    type Error = LabError;
    fn try_from(raw: RawGroup) -> Result<Self> {
        Self::new(raw.elements, raw.mult)
    }
}

impl From<FiniteGroup> for RawGroup {
    fn from(g: FiniteGroup) -> Self {
        RawGroup {
            elements: g.elements,
            mult: g.mult,
        }
    }
}

impl FiniteGroup {
    /// Validate a table: closure, associativity, identity, inverses.
    pub fn new(elements: Vec<String>, mult: Vec<Vec<usize>>) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(LabError::InvalidInput("group must have at least one element".into()));
        }
        if n > SUPPORTED_ORDER {
            log::warn!("group of order {n} exceeds the supported envelope of {SUPPORTED_ORDER}");
        }
        let mut names = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            if names.insert(e.as_str(), i).is_some() {
                return Err(LabError::InvalidInput(format!("duplicate group element {e:?}")));
            }
        }
        if mult.len() != n || mult.iter().any(|row| row.len() != n) {
            return Err(LabError::InvalidInput(format!("multiplication table must be {n}x{n}")));
        }
        if mult.iter().flatten().any(|&k| k >= n) {
            return Err(LabError::InvalidInput("multiplication table entry out of range".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        return Err(LabError::InvalidInput(format!(
                            "not associative at ({}, {}, {})",
                            elements[a], elements[b], elements[c]
                        )));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mult[e][g] == g && mult[g][e] == g))
            .ok_or_else(|| LabError::InvalidInput("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| mult[g][h] == identity && mult[h][g] == identity)
                .ok_or_else(|| LabError::InvalidInput(format!("{} has no inverse", elements[g])))?;
            inverse.push(inv);
        }
        Ok(Self {
            elements,
            mult,
            identity,
            inverse,
        })
    }

    /// The cyclic group `Z_n` with elements `"0", .., "n-1"`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidInput("Z_0 is not finite".into()));
        }
        let elements = (0..n).map(|k| k.to_string()).collect();
        let mult = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::new(elements, mult)
    }

    /// The symmetric group on `n` letters, elements in lexicographic order of
    /// their image lists and named in cycle notation.
    pub fn symmetric(n: usize) -> Result<Self> {
        let perms = all_permutations(n);
        Self::from_permutations(&perms)
    }

    /// `Z_2 × Z_2`.
    pub fn klein() -> Result<Self> {
        let elements = ["e", "a", "b", "ab"].iter().map(|s| s.to_string()).collect();
        let mult = (0..4usize).map(|x| (0..4usize).map(|y| x ^ y).collect()).collect();
        Self::new(elements, mult)
    }

    /// A group of permutations closed under composition, multiplied as maps.
    pub fn from_permutations(perms: &[Permutation]) -> Result<Self> {
        let index: HashMap<&Permutation, usize> = perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut mult = Vec::with_capacity(perms.len());
        for a in perms {
            let mut row = Vec::with_capacity(perms.len());
            for b in perms {
                let ab = a.compose(b);
                row.push(*index.get(&ab).ok_or_else(|| {
                    LabError::InvalidInput("permutation set is not closed under composition".into())
                })?);
            }
            mult.push(row);
        }
        Self::new(perms.iter().map(cycle_notation).collect(), mult)
    }

    /// Groups addressable by short names: `Z<n>`, `S<n>` (n ≤ 5), `Z2xZ2`.
    pub fn by_name(name: &str) -> Result<Self> {
        let unsupported = || LabError::UnsupportedGroup(name.to_string());
        if name.eq_ignore_ascii_case("Z2xZ2") || name.eq_ignore_ascii_case("klein") {
            return Self::klein();
        }
        let (head, tail) = name.split_at(name.len().min(1));
        let n: usize = tail.parse().map_err(|_| unsupported())?;
        match head {
            "Z" | "C" if (1..=SUPPORTED_ORDER).contains(&n) => Self::cyclic(n),
            "S" if (1..=5).contains(&n) => Self::symmetric(n),
            _ => Err(unsupported()),
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn name(&self, g: usize) -> &str {
        &self.elements[g]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    #[inline]
    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.mult[g][h]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    /// All subgroups, each as a sorted list of element indices.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut frontier = vec![vec![self.identity]];
        while let Some(h) = frontier.pop() {
            if found.contains(&h) {
                continue;
            }
            for g in 0..n {
                if !h.contains(&g) {
                    let mut gens = h.clone();
                    gens.push(g);
                    let closed = self.closure(&gens);
                    if !found.contains(&closed) && !frontier.contains(&closed) {
                        frontier.push(closed);
                    }
                }
            }
            found.push(h);
        }
        found.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        found
    }

    /// Subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut set = vec![false; self.order()];
        set[self.identity] = true;
        let mut stack: Vec<usize> = vec![self.identity];
        while let Some(a) = stack.pop() {
            for &g in gens {
                let b = self.mul(a, g);
                if !set[b] {
                    set[b] = true;
                    stack.push(b);
                }
            }
        }
        (0..self.order()).filter(|&i| set[i]).collect()
    }
}

fn all_permutations(n: usize) -> Vec<Permutation> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(Permutation::new(prefix.clone()).expect("bijection by construction"));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn cycle_notation(p: &Permutation) -> String {
    let n = p.len();
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] || p.apply(start) == start {
            seen[start] = true;
            continue;
        }
        let mut cyc = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            cyc.push(x.to_string());
            x = p.apply(x);
        }
        cycles.push(format!("({})", cyc.join(" ")));
    }
    if cycles.is_empty() {
        "e".to_string()
    } else {
        cycles.concat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_groups() {
        for (name, order) in [("Z2", 2), ("Z3", 3), ("Z4", 4), ("S3", 6), ("Z2xZ2", 4), ("S4", 24)] {
            let g = FiniteGroup::by_name(name).unwrap();
            assert_eq!(g.order(), order, "{name}");
            for a in 0..order {
                assert_eq!(g.mul(a, g.inv(a)), g.identity());
            }
        }
        assert!(matches!(FiniteGroup::by_name("Q8"), Err(LabError::UnsupportedGroup(_))));
        assert!(matches!(FiniteGroup::by_name("Zx"), Err(LabError::UnsupportedGroup(_))));
    }

    #[test]
    fn s3_is_nonabelian_with_cycle_names() {
        let g = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(g.name(g.identity()), "e");
        assert!(g.elements().iter().any(|e| e == "(0 1 2)"));
        let abelian = (0..6).all(|a| (0..6).all(|b| g.mul(a, b) == g.mul(b, a)));
        assert!(!abelian);
    }

    #[test]
    fn rejects_non_group_tables() {
        let els = vec!["a".to_string(), "b".to_string()];
        assert!(FiniteGroup::new(els.clone(), vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(FiniteGroup::new(els, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn subgroup_lattice_sizes() {
        assert_eq!(FiniteGroup::symmetric(3).unwrap().subgroups().len(), 6);
        assert_eq!(FiniteGroup::cyclic(4).unwrap().subgroups().len(), 3);
        assert_eq!(FiniteGroup::klein().unwrap().subgroups().len(), 5);
    }

    #[test]
    fn json_round_trip() {
        let g = FiniteGroup::cyclic(3).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"elements":["0","1","2"],"mult":[[0,1,2],[1,2,0],[2,0,1]]}"#);
        assert_eq!(serde_json::from_str::<FiniteGroup>(&text).unwrap(), g);
    }
}
