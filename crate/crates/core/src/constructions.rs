//! Generators for the standard instances.
//!
//! Building-set generators (Fulton-MacPherson, Ulyanov, Kapranov) return an
//! ambient space with a validated [`BuildingSet`]. The moduli towers (Keel's
//! construction of `M̄_{0,n+1}` and the spaces `T_{d,n}`) are returned as
//! explicit [`TowerDescription`]s: a base followed by stages of pairwise
//! disjoint centers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{close_under_meet, BuildingSet, ElementDescriptor, LatticeError};
use crate::space::{blow_up, product, proj_bundle, projective_space, SpaceError, SpaceExpr};

/// Largest `n` accepted by the Keel and `T_{d,n}` towers.
pub const MAX_TOWER_N: u32 = 6;
/// Largest number of points for the polydiagonal generators.
pub const MAX_POLYDIAGONAL_N: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("missing space for {0}")]
    MissingAtom(String),
    #[error("invalid tower: {0}")]
    InvalidTower(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

// ---- set partitions ----------------------------------------------------

/// Set partition of `{1..n}` as sorted blocks, sorted by first element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<Vec<u32>>);

impl Partition {
    pub fn new(mut blocks: Vec<Vec<u32>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        Partition(blocks)
    }

    /// The partition of `{1..n}` whose only non-singleton block is `s`.
    pub fn cluster(n: u32, s: &[u32]) -> Self {
        let mut blocks = vec![s.to_vec()];
        blocks.extend((1..=n).filter(|i| !s.contains(i)).map(|i| vec![i]));
        Partition::new(blocks)
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> u32 {
        self.0.iter().map(|b| b.len() as u32).sum()
    }

    /// Finest common coarsening: the intersection of the polydiagonals.
    pub fn join(&self, other: &Partition) -> Partition {
        let n = self.points().max(other.points()) as usize;
        let mut parent: Vec<usize> = (0..=n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for b in self.0.iter().chain(other.0.iter()) {
            for w in b.windows(2) {
                let (x, y) = (find(&mut parent, w[0] as usize), find(&mut parent, w[1] as usize));
                parent[x.max(y)] = x.min(y);
            }
        }
        let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for i in 1..=n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i as u32);
        }
        Partition::new(groups.into_values().collect())
    }

    fn non_singletons(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.0.iter().filter(|b| b.len() >= 2)
    }

    /// `D{1,2}{3,4}`.
    pub fn id(&self) -> String {
        let mut s = String::from("D");
        for b in self.non_singletons() {
            s.push('{');
            s.push_str(&join_nums(b, ","));
            s.push('}');
        }
        s
    }

    /// `Δ_{1,2|3,4}`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.non_singletons().map(|b| join_nums(b, ",")).collect();
        format!("Δ_{{{}}}", parts.join("|"))
    }

    /// Inverse of [`Partition::id`] for partitions of `{1..n}`.
    pub fn parse_id(id: &str, n: u32) -> Option<Partition> {
        let rest = id.strip_prefix('D')?;
        let mut blocks = Vec::new();
        let mut seen = BTreeSet::new();
        for chunk in rest.split('}') {
            if chunk.is_empty() {
                continue;
            }
            let inner = chunk.strip_prefix('{')?;
            let block: Vec<u32> = inner.split(',').map(|x| x.parse().ok()).collect::<Option<_>>()?;
            for &i in &block {
                if i == 0 || i > n || !seen.insert(i) {
                    return None;
                }
            }
            blocks.push(block);
        }
        blocks.extend((1..=n).filter(|i| !seen.contains(i)).map(|i| vec![i]));
        Some(Partition::new(blocks))
    }
}

fn join_nums(xs: &[u32], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

/// All set partitions of `{1..n}`.
pub fn set_partitions(n: u32) -> Vec<Partition> {
    let mut out: Vec<Vec<Vec<u32>>> = vec![vec![]];
    for i in 1..=n {
        let mut next = Vec::new();
        for p in &out {
            for k in 0..p.len() {
                let mut q = p.clone();
                q[k].push(i);
                next.push(q);
            }
            let mut q = p.clone();
            q.push(vec![i]);
            next.push(q);
        }
        out = next;
    }
    out.into_iter().map(Partition::new).collect()
}

/// Subsets of `{1..n}` of size `k`, each sorted, in lexicographic order.
pub fn subsets(n: u32, k: usize) -> Vec<Vec<u32>> {
    fn go(start: u32, n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

// ---- polydiagonal building sets ----------------------------------------

struct Polydiagonals {
    n: u32,
    /// `powers[k]` = `X^k`, built incrementally so sub-expressions are shared.
    powers: Vec<SpaceExpr>,
}

impl Polydiagonals {
    fn new(x: &SpaceExpr, n: u32) -> Result<Self, ConstructionError> {
        if n < 2 {
            return Err(ConstructionError::InvalidParameter(format!("need n >= 2 points, got {n}")));
        }
        if n > MAX_POLYDIAGONAL_N {
            return Err(ConstructionError::Unsupported(format!(
                "polydiagonal arrangements are limited to n <= {MAX_POLYDIAGONAL_N}, got {n}"
            )));
        }
        if x.is_empty() || x.dimension()? == 0 {
            return Err(ConstructionError::InvalidParameter("base must have positive dimension".into()));
        }
        let mut powers = vec![SpaceExpr::point(), x.clone()];
        for k in 2..=n {
            let next = product(&powers[k as usize - 1], x)?;
            powers.push(next);
        }
        Ok(Polydiagonals { n, powers })
    }

    fn ambient(&self) -> SpaceExpr {
        self.powers[self.n as usize].clone()
    }

    fn element(&self, p: &Partition) -> ElementDescriptor {
        ElementDescriptor::new(p.id(), self.powers[p.len()].clone(), p.label()).expect("powers are nonempty")
    }

    fn arrangement(&self, generators: Vec<Partition>) -> Result<crate::lattice::Arrangement, ConstructionError> {
        let descriptors: Vec<ElementDescriptor> = generators.iter().map(|p| self.element(p)).collect();
        let n = self.n;
        let oracle = |a: &ElementDescriptor, b: &ElementDescriptor| {
            let pa = Partition::parse_id(&a.id, n)?;
            let pb = Partition::parse_id(&b.id, n)?;
            Some(self.element(&pa.join(&pb)))
        };
        Ok(close_under_meet(self.ambient(), descriptors, &oracle)?)
    }
}

/// Fulton-MacPherson: the diagonals `Δ_S`, `|S| >= 2`, in `X^n`.
pub fn fm_building_set(x: &SpaceExpr, n: u32) -> Result<(SpaceExpr, BuildingSet), ConstructionError> {
    let pd = Polydiagonals::new(x, n)?;
    let generators: Vec<Partition> = (2..=n as usize)
        .flat_map(|k| subsets(n, k))
        .map(|s| Partition::cluster(n, &s))
        .collect();
    let members = generators.iter().map(Partition::id).collect();
    let arr = pd.arrangement(generators)?;
    Ok((pd.ambient(), BuildingSet::new(arr, members)?))
}

/// Ulyanov: every polydiagonal in `X^n` is a member.
pub fn ulyanov_building_set(x: &SpaceExpr, n: u32) -> Result<(SpaceExpr, BuildingSet), ConstructionError> {
    let pd = Polydiagonals::new(x, n)?;
    let generators: Vec<Partition> = set_partitions(n).into_iter().filter(|p| p.len() < n as usize).collect();
    let members = generators.iter().map(Partition::id).collect();
    let arr = pd.arrangement(generators)?;
    Ok((pd.ambient(), BuildingSet::new(arr, members)?))
}

// ---- Kapranov ------------------------------------------------------------

fn span_id(s: &[u32]) -> String {
    format!("span{{{}}}", join_nums(s, ","))
}

fn parse_span(id: &str) -> Option<Vec<u32>> {
    let inner = id.strip_prefix("span{")?.strip_suffix('}')?;
    inner.split(',').map(|x| x.parse().ok()).collect()
}

/// `M̄_{0,n}` as the blowup of `P^{n-3}` along `n-1` general points and the
/// spans of at most `n-4` of them. Supported for `n` in `{5, 6}`.
pub fn kapranov_m0n(n: u32) -> Result<(SpaceExpr, BuildingSet), ConstructionError> {
    if !(5..=6).contains(&n) {
        return Err(ConstructionError::Unsupported(format!(
            "Kapranov's building set is generated only for n = 5 and n = 6 (got {n}); \
             for n >= 7 spans of disjoint point sets meet outside the span lattice"
        )));
    }
    let ambient = projective_space(n - 3);
    let spaces = [SpaceExpr::point(), projective_space(1)];
    let mut generators = Vec::new();
    for k in 1..=(n - 4) as usize {
        for s in subsets(n - 1, k) {
            let origin = format!("⟨{}⟩", s.iter().map(|i| format!("p{i}")).collect::<Vec<_>>().join(","));
            generators.push(ElementDescriptor::new(span_id(&s), spaces[k - 1].clone(), origin)?);
        }
    }
    let members = generators.iter().map(|e| e.id.clone()).collect();
    let by_id: BTreeMap<String, ElementDescriptor> = generators.iter().map(|e| (e.id.clone(), e.clone())).collect();
    let oracle = |a: &ElementDescriptor, b: &ElementDescriptor| {
        let sa = parse_span(&a.id)?;
        let sb = parse_span(&b.id)?;
        let common: Vec<u32> = sa.iter().copied().filter(|i| sb.contains(i)).collect();
        if common.is_empty() {
            None
        } else {
            by_id.get(&span_id(&common)).cloned()
        }
    };
    let arr = close_under_meet(ambient.clone(), generators.clone(), &oracle)?;
    Ok((ambient, BuildingSet::new(arr, members)?))
}

// ---- towers ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerCenter {
    pub label: String,
    pub space: SpaceExpr,
    pub codim: u32,
    /// Index set the center is attached to; used for the disjointness check.
    pub support: BTreeSet<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerStep {
    pub label: String,
    pub centers: Vec<TowerCenter>,
}

/// A base space followed by stages of blowups along disjoint centers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDescription {
    pub name: String,
    pub base: SpaceExpr,
    pub steps: Vec<TowerStep>,
}

impl TowerDescription {
    pub fn center_count(&self) -> usize {
        self.steps.iter().map(|s| s.centers.len()).sum()
    }

    /// Blows up every center in order.
    pub fn final_space(&self) -> Result<SpaceExpr, ConstructionError> {
        let mut x = self.base.clone();
        for step in &self.steps {
            for c in &step.centers {
                x = blow_up(&x, &c.space, c.codim)?;
            }
        }
        Ok(x)
    }

    /// Dimension bookkeeping and disjointness of the centers in each stage.
    pub fn validate(&self) -> Result<(), ConstructionError> {
        let dim = self.base.dimension()?;
        for step in &self.steps {
            for (i, c) in step.centers.iter().enumerate() {
                if c.codim < 1 || c.space.dimension()? + c.codim != dim {
                    return Err(ConstructionError::InvalidTower(format!(
                        "{}: center {} has inconsistent codimension",
                        step.label, c.label
                    )));
                }
                for d in &step.centers[i + 1..] {
                    if c.support.is_subset(&d.support) || d.support.is_subset(&c.support) {
                        return Err(ConstructionError::InvalidTower(format!(
                            "{}: centers {} and {} are not disjoint",
                            step.label, c.label, d.label
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Spaces `M̄_{0,3}` and `M̄_{0,4}`, enough to start the Keel recursion.
pub fn m0n_seed() -> BTreeMap<u32, SpaceExpr> {
    BTreeMap::from([(3, SpaceExpr::point()), (4, projective_space(1))])
}

/// `M̄_{0,j}` for `3 <= j <= max`, each from the previous Keel tower.
pub fn default_m0_atoms(max: u32) -> Result<BTreeMap<u32, SpaceExpr>, ConstructionError> {
    let mut atoms = m0n_seed();
    for j in 5..=max {
        let tower = keel_tower(j - 1, &atoms)?;
        atoms.insert(j, tower.final_space()?);
    }
    Ok(atoms)
}

fn lookup(atoms: &BTreeMap<u32, SpaceExpr>, j: u32, what: &str) -> Result<SpaceExpr, ConstructionError> {
    atoms
        .get(&j)
        .cloned()
        .ok_or_else(|| ConstructionError::MissingAtom(format!("{what} (j = {j})")))
}

/// Keel's tower for `M̄_{0,n+1}`: the base `M̄_{0,n} x P^1` blown up in
/// `n-3` stages. Stage `k` blows up the (strict transforms of the) loci
/// `D^S`, `S ⊆ {1..n}`, with `|S^c| = k+1`, `|S| >= 2` and at most one of
/// `1, 2, 3` in `S`; each is `M̄_{0,|S|+1} x M̄_{0,|S^c|+1}` of codimension 2.
pub fn keel_tower(n: u32, m0_atoms: &BTreeMap<u32, SpaceExpr>) -> Result<TowerDescription, ConstructionError> {
    if n < 4 {
        return Err(ConstructionError::InvalidParameter(format!("Keel's tower needs n >= 4, got {n}")));
    }
    if n > MAX_TOWER_N {
        return Err(ConstructionError::Unsupported(format!(
            "Keel's tower is limited to n <= {MAX_TOWER_N} (got {n}); certificate size grows too fast beyond that"
        )));
    }
    let base = product(&lookup(m0_atoms, n, "M̄_{0,n}")?, &projective_space(1))?;
    let mut steps = Vec::new();
    for k in 1..=n - 3 {
        let complement = (k + 1) as usize;
        let mut centers = Vec::new();
        for s in subsets(n, n as usize - complement) {
            if s.len() < 2 || s.iter().filter(|&&i| i <= 3).count() > 1 {
                continue;
            }
            let a = lookup(m0_atoms, s.len() as u32 + 1, "M̄_{0,|S|+1}")?;
            let b = lookup(m0_atoms, complement as u32 + 1, "M̄_{0,|S^c|+1}")?;
            centers.push(TowerCenter {
                label: format!("D^{{{}}}", join_nums(&s, ",")),
                space: product(&a, &b)?,
                codim: 2,
                support: s.into_iter().collect(),
            });
        }
        steps.push(TowerStep {
            label: format!("B_{}", k + 1),
            centers,
        });
    }
    let tower = TowerDescription {
        name: format!("M̄_{{0,{}}}", n + 1),
        base,
        steps,
    };
    tower.validate()?;
    Ok(tower)
}

/// `T_{d,n}` for `2 <= n <= m` as final spaces.
pub fn default_t_atoms(d: u32, max: u32) -> Result<BTreeMap<u32, SpaceExpr>, ConstructionError> {
    let mut atoms = BTreeMap::new();
    for n in 2..=max {
        let tower = tdn_tower(d, n, &atoms)?;
        atoms.insert(n, tower.final_space()?);
    }
    Ok(atoms)
}

fn projective_or_point(d: u32) -> SpaceExpr {
    if d == 0 {
        SpaceExpr::point()
    } else {
        projective_space(d)
    }
}

/// Tower for `T_{d,n}`, using `t_atoms[j] = T_{d,j}` for `j < n`.
///
/// `T_{d,2} = P^{d-1}`, `T_{1,3} = P^1` and `T_{1,n} = M̄_{0,n+1}`. Otherwise
/// `T_{d,n}` is a `P^d`-bundle over `T_{d,m}`, `m = n-1`, blown up first
/// along the loci where the new point joins a cluster `S` of size
/// `s = m-1, ..., 2` (each `T_{d,m-s+1} x T_{d,s}`, codimension `d+1`) and
/// then along the `m` sections where it meets a single point.
pub fn tdn_tower(d: u32, n: u32, t_atoms: &BTreeMap<u32, SpaceExpr>) -> Result<TowerDescription, ConstructionError> {
    if d < 1 || n < 2 {
        return Err(ConstructionError::InvalidParameter(format!("T_{{d,n}} needs d >= 1 and n >= 2, got d = {d}, n = {n}")));
    }
    if n > MAX_TOWER_N {
        return Err(ConstructionError::Unsupported(format!(
            "T_{{d,n}} towers are limited to n <= {MAX_TOWER_N} (got {n})"
        )));
    }
    let name = format!("T_{{{d},{n}}}");
    let trivial = |base: SpaceExpr| TowerDescription {
        name: name.clone(),
        base,
        steps: vec![],
    };
    if n == 2 {
        return Ok(trivial(projective_or_point(d - 1)));
    }
    if d == 1 && n == 3 {
        return Ok(trivial(projective_space(1)));
    }
    let t = |j: u32| lookup(t_atoms, j, &format!("T_{{{d},{j}}}"));
    if d == 1 {
        let m0: BTreeMap<u32, SpaceExpr> = (3..=n).map(|j| Ok((j, t(j - 1)?))).collect::<Result<_, ConstructionError>>()?;
        let mut tower = keel_tower(n, &m0)?;
        tower.name = name;
        return Ok(tower);
    }
    let m = n - 1;
    let base = proj_bundle(&t(m)?, d + 1)?;
    let mut steps = Vec::new();
    for s in (1..m).rev() {
        let mut centers = Vec::new();
        for cluster in subsets(m, s as usize) {
            let (space, codim) = if s >= 2 {
                (product(&t(m - s + 1)?, &t(s)?)?, d + 1)
            } else {
                (product(&t(m)?, &SpaceExpr::point())?, d)
            };
            centers.push(TowerCenter {
                label: format!("S={{{}}}", join_nums(&cluster, ",")),
                space,
                codim,
                support: cluster.into_iter().collect(),
            });
        }
        steps.push(TowerStep {
            label: format!("clusters of size {s}"),
            centers,
        });
    }
    let tower = TowerDescription { name, base, steps };
    tower.validate()?;
    Ok(tower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::betti::poincare;
    use crate::space::{atom, Tristate};

    fn x(dim: u32) -> SpaceExpr {
        atom("X", dim, Tristate::True, Tristate::True, None).unwrap()
    }

    #[test]
    fn partition_ids_round_trip() {
        for p in set_partitions(5) {
            assert_eq!(Partition::parse_id(&p.id(), 5), Some(p.clone()));
        }
        assert_eq!(Partition::cluster(4, &[1, 2]).id(), "D{1,2}");
        assert_eq!(Partition::new(vec![vec![3, 4], vec![2, 1]]).label(), "Δ_{1,2|3,4}");
        assert_eq!(Partition::parse_id("D{1,1}", 3), None);
    }

    #[test]
    fn join_merges_overlapping_blocks() {
        let a = Partition::cluster(4, &[1, 2]);
        let b = Partition::cluster(4, &[2, 3]);
        assert_eq!(a.join(&b), Partition::cluster(4, &[1, 2, 3]));
        let c = Partition::cluster(4, &[3, 4]);
        assert_eq!(a.join(&c).id(), "D{1,2}{3,4}");
    }

    #[test]
    fn fm_sizes() {
        let (_, bs) = fm_building_set(&x(1), 3).unwrap();
        assert_eq!((bs.members().len(), bs.arrangement().len()), (4, 4));
        let (_, bs) = fm_building_set(&x(1), 4).unwrap();
        assert_eq!((bs.members().len(), bs.arrangement().len()), (11, 14));
        let d1234 = bs.arrangement().get("D{1,2,3,4}").unwrap();
        assert_eq!(d1234.dim, 1);
    }

    #[test]
    fn ulyanov_sizes() {
        let (_, bs) = ulyanov_building_set(&x(2), 4).unwrap();
        assert_eq!(bs.members().len(), 14);
        let (_, bs) = ulyanov_building_set(&x(2), 2).unwrap();
        assert_eq!(bs.members().len(), 1);
    }

    #[test]
    fn polydiagonal_range() {
        assert!(matches!(fm_building_set(&x(1), 1), Err(ConstructionError::InvalidParameter(_))));
        assert!(matches!(fm_building_set(&x(1), 6), Err(ConstructionError::Unsupported(_))));
        assert!(matches!(fm_building_set(&SpaceExpr::point(), 2), Err(ConstructionError::InvalidParameter(_))));
    }

    #[test]
    fn kapranov_members() {
        let (amb, bs) = kapranov_m0n(5).unwrap();
        assert_eq!(amb.dimension().unwrap(), 2);
        assert_eq!(bs.members().len(), 4);
        let (amb, bs) = kapranov_m0n(6).unwrap();
        assert_eq!(amb.dimension().unwrap(), 3);
        assert_eq!(bs.members().len(), 15);
        assert!(matches!(kapranov_m0n(7), Err(ConstructionError::Unsupported(_))));
        assert!(matches!(kapranov_m0n(4), Err(ConstructionError::Unsupported(_))));
    }

    #[test]
    fn keel_center_counts() {
        let atoms = default_m0_atoms(6).unwrap();
        let counts: Vec<usize> = (4..=6).map(|n| keel_tower(n, &atoms).unwrap().center_count()).collect();
        assert_eq!(counts, vec![3, 10, 25]);
        let t4 = keel_tower(4, &atoms).unwrap();
        assert_eq!(t4.steps.len(), 1);
        assert_eq!(t4.base.dimension().unwrap(), 2);
        assert!(matches!(keel_tower(4, &BTreeMap::new()), Err(ConstructionError::MissingAtom(_))));
        assert!(matches!(keel_tower(7, &atoms), Err(ConstructionError::Unsupported(_))));
    }

    #[test]
    fn tdn_base_cases() {
        let none = BTreeMap::new();
        for d in 1..=5 {
            let t = tdn_tower(d, 2, &none).unwrap();
            assert!(t.steps.is_empty());
            assert_eq!(t.base.dimension().unwrap(), d - 1);
        }
        assert_eq!(tdn_tower(1, 3, &none).unwrap().final_space().unwrap(), projective_space(1));
        let atoms = default_t_atoms(2, 2).unwrap();
        let t23 = tdn_tower(2, 3, &atoms).unwrap();
        assert_eq!(t23.base.dimension().unwrap(), 3);
        assert_eq!(t23.center_count(), 2);
    }

    #[test]
    fn tdn_dimensions() {
        for d in 1..=3 {
            let atoms = default_t_atoms(d, 5).unwrap();
            for (n, s) in &atoms {
                assert_eq!(s.dimension().unwrap(), d * (n - 1) - 1, "T_{{{d},{n}}}");
            }
        }
    }

    #[test]
    fn invalid_tower_is_rejected() {
        let p = projective_space(1);
        let center = TowerCenter {
            label: "c".into(),
            space: SpaceExpr::point(),
            codim: 2,
            support: [1, 2].into(),
        };
        let tower = TowerDescription {
            name: "t".into(),
            base: product(&p, &p).unwrap(),
            steps: vec![TowerStep {
                label: "s".into(),
                centers: vec![center.clone(), center],
            }],
        };
        assert!(matches!(tower.validate(), Err(ConstructionError::InvalidTower(_))));
        assert_eq!(poincare(&tower.final_space().unwrap()).unwrap().to_string(), "1 + 4*t^2 + t^4");
    }
}
