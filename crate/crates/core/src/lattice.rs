//! Arrangements and building sets.
//!
//! An [`Arrangement`] is a finite set of element descriptors closed under a
//! meet (intersection) operation whose values are elements or `Empty`. The
//! inclusion order is derived from the meet: `a <= b` iff `meet(a, b) = a`.
//! Meets are never computed geometrically; generators supply them through a
//! [`MeetOracle`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::space::{SpaceError, SpaceExpr};

/// Upper bound on closure size; oracles that keep inventing elements are cut off.
pub const MAX_ARRANGEMENT_SIZE: usize = 100_000;

pub const EMPTY_MARKER: &str = "∅";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("element `{id}` declares dim {declared} but its space has dim {actual}")]
    DimMismatch { id: String, declared: u32, actual: u32 },
    #[error("duplicate element id `{0}` with differing descriptors")]
    DuplicateId(String),
    #[error("unknown element id `{0}`")]
    UnknownId(String),
    #[error("meet oracle is not commutative on ({a}, {b})")]
    NonCommutative { a: String, b: String },
    #[error("meet of ({a}, {b}) has dim {meet_dim} exceeding min dim {min_dim}")]
    MeetTooLarge { a: String, b: String, meet_dim: u32, min_dim: u32 },
    #[error("meet table has no entry for ({a}, {b})")]
    MissingMeet { a: String, b: String },
    #[error("meet axiom violated on ({a}, {b}): {reason}")]
    Axiom { a: String, b: String, reason: String },
    #[error("declared inclusion relation disagrees with the meet table on ({a}, {b})")]
    LeqMismatch { a: String, b: String },
    #[error("element `{id}` is not a proper subvariety of the ambient (dim {dim} >= {ambient_dim})")]
    NotProper { id: String, dim: u32, ambient_dim: u32 },
    #[error("meet closure exceeded {MAX_ARRANGEMENT_SIZE} elements")]
    TooLarge,
    #[error("inclusion order conflict: `{later}` is contained in `{earlier}` but sorts after it")]
    OrderConflict { earlier: String, later: String },
    #[error("not a building set: {0}")]
    InvalidBuildingSet(Box<ValidationReport>),
}

/// A subvariety of the ambient, up to its abstract isomorphism type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementDescriptor {
    pub id: String,
    pub dim: u32,
    pub space: SpaceExpr,
    pub origin: String,
}

impl ElementDescriptor {
    pub fn new(id: impl Into<String>, space: SpaceExpr, origin: impl Into<String>) -> Result<Self, SpaceError> {
        Ok(ElementDescriptor {
            id: id.into(),
            dim: space.dimension()?,
            space,
            origin: origin.into(),
        })
    }
}

impl<'de> Deserialize<'de> for ElementDescriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            id: String,
            dim: u32,
            space: SpaceExpr,
            origin: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let actual = raw.space.dimension().map_err(serde::de::Error::custom)?;
        if actual != raw.dim {
            return Err(serde::de::Error::custom(LatticeError::DimMismatch {
                id: raw.id,
                declared: raw.dim,
                actual,
            }));
        }
        Ok(ElementDescriptor {
            id: raw.id,
            dim: raw.dim,
            space: raw.space,
            origin: raw.origin,
        })
    }
}

/// Value of a meet: an element id or the empty intersection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeetValue {
    Element(String),
    Empty,
}

impl MeetValue {
    pub fn element(&self) -> Option<&str> {
        match self {
            MeetValue::Element(id) => Some(id),
            MeetValue::Empty => None,
        }
    }
}

impl fmt::Display for MeetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeetValue::Element(id) => f.write_str(id),
            MeetValue::Empty => f.write_str(EMPTY_MARKER),
        }
    }
}

impl From<&str> for MeetValue {
    fn from(s: &str) -> Self {
        if s == EMPTY_MARKER {
            MeetValue::Empty
        } else {
            MeetValue::Element(s.to_string())
        }
    }
}

/// Symmetric meet table keyed on unordered pairs of distinct ids.
/// The diagonal is implicit: `meet(a, a) = a`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeetTable {
    entries: BTreeMap<(String, String), MeetValue>,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl MeetTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: &str, b: &str, value: MeetValue) {
        if a != b {
            self.entries.insert(key(a, b), value);
        }
    }

    pub fn get(&self, a: &str, b: &str) -> Option<MeetValue> {
        if a == b {
            return Some(MeetValue::Element(a.to_string()));
        }
        self.entries.get(&key(a, b)).cloned()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        a == b || self.entries.contains_key(&key(a, b))
    }

    /// `a <= b` (a is contained in b).
    pub fn leq(&self, a: &str, b: &str) -> bool {
        matches!(self.get(a, b), Some(MeetValue::Element(m)) if m == a)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &MeetValue)> {
        self.entries.iter().map(|((a, b), m)| (a.as_str(), b.as_str(), m))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Serialize for MeetTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter().map(|(a, b, m)| [a.to_string(), b.to_string(), m.to_string()]))
    }
}

impl<'de> Deserialize<'de> for MeetTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<[String; 3]>::deserialize(deserializer)?;
        let mut table = MeetTable::new();
        for [a, b, m] in rows {
            if let Some(prev) = table.get(&a, &b) {
                if a != b && prev != MeetValue::from(m.as_str()) {
                    return Err(serde::de::Error::custom(format!("conflicting meet entries for ({a}, {b})")));
                }
            }
            table.insert(&a, &b, MeetValue::from(m.as_str()));
        }
        Ok(table)
    }
}

/// Supplies meets during closure. `None` means the intersection is empty.
pub trait MeetOracle {
    fn meet(&self, a: &ElementDescriptor, b: &ElementDescriptor) -> Option<ElementDescriptor>;
}

impl<F> MeetOracle for F
where
    F: Fn(&ElementDescriptor, &ElementDescriptor) -> Option<ElementDescriptor>,
{
    fn meet(&self, a: &ElementDescriptor, b: &ElementDescriptor) -> Option<ElementDescriptor> {
        self(a, b)
    }
}

/// Meet-closed finite collection of subvarieties of an ambient space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    ambient: SpaceExpr,
    ambient_dim: u32,
    elements: BTreeMap<String, ElementDescriptor>,
    meet: MeetTable,
}

impl Arrangement {
    /// Builds an arrangement from a complete meet table and checks the axioms.
    pub fn from_parts(
        ambient: SpaceExpr,
        elements: impl IntoIterator<Item = ElementDescriptor>,
        meet: MeetTable,
    ) -> Result<Self, LatticeError> {
        let ambient_dim = ambient.dimension()?;
        let mut map = BTreeMap::new();
        for e in elements {
            if let Some(prev) = map.insert(e.id.clone(), e) {
                if map[&prev.id] != prev {
                    return Err(LatticeError::DuplicateId(prev.id));
                }
            }
        }
        let arr = Arrangement {
            ambient,
            ambient_dim,
            elements: map,
            meet,
        };
        arr.check_axioms()?;
        Ok(arr)
    }

    pub fn ambient(&self) -> &SpaceExpr {
        &self.ambient
    }

    pub fn ambient_dim(&self) -> u32 {
        self.ambient_dim
    }

    pub fn elements(&self) -> impl Iterator<Item = &ElementDescriptor> {
        self.elements.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.elements.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ElementDescriptor> {
        self.elements.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.elements.contains_key(id)
    }

    pub fn meet_table(&self) -> &MeetTable {
        &self.meet
    }

    pub fn meet(&self, a: &str, b: &str) -> Option<MeetValue> {
        self.meet.get(a, b)
    }

    pub fn leq(&self, a: &str, b: &str) -> bool {
        self.meet.leq(a, b)
    }

    pub fn codim(&self, id: &str) -> Option<u32> {
        self.get(id).map(|e| self.ambient_dim - e.dim)
    }

    /// Strict inclusion pairs `(a, b)` with `a < b`.
    pub fn leq_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for a in self.ids() {
            for b in self.ids() {
                if a != b && self.leq(a, b) {
                    out.push((a.to_string(), b.to_string()));
                }
            }
        }
        out
    }

    /// Replaces element spaces (ids, dims and meets unchanged).
    pub fn map_spaces<F>(&self, mut f: F) -> Result<Arrangement, LatticeError>
    where
        F: FnMut(&SpaceExpr) -> Result<SpaceExpr, SpaceError>,
    {
        let ambient = f(&self.ambient)?;
        let mut elements = BTreeMap::new();
        for (id, e) in &self.elements {
            let space = f(&e.space)?;
            let dim = space.dimension()?;
            if dim != e.dim {
                return Err(LatticeError::DimMismatch {
                    id: id.clone(),
                    declared: e.dim,
                    actual: dim,
                });
            }
            elements.insert(
                id.clone(),
                ElementDescriptor {
                    id: id.clone(),
                    dim,
                    space,
                    origin: e.origin.clone(),
                },
            );
        }
        Ok(Arrangement {
            ambient_dim: ambient.dimension()?,
            ambient,
            elements,
            meet: self.meet.clone(),
        })
    }

    /// Meet-closure, meet bounds, idempotence, commutativity (by storage)
    /// and associativity.
    pub fn check_axioms(&self) -> Result<(), LatticeError> {
        for e in self.elements.values() {
            let actual = e.space.dimension()?;
            if actual != e.dim {
                return Err(LatticeError::DimMismatch {
                    id: e.id.clone(),
                    declared: e.dim,
                    actual,
                });
            }
            if e.dim >= self.ambient_dim {
                return Err(LatticeError::NotProper {
                    id: e.id.clone(),
                    dim: e.dim,
                    ambient_dim: self.ambient_dim,
                });
            }
        }
        for (a, b, _) in self.meet.iter() {
            for id in [a, b] {
                if !self.contains(id) {
                    return Err(LatticeError::UnknownId(id.to_string()));
                }
            }
        }
        let ids: Vec<&str> = self.ids().collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                let m = self.meet(a, b).ok_or_else(|| LatticeError::MissingMeet {
                    a: a.to_string(),
                    b: b.to_string(),
                })?;
                if let MeetValue::Element(m) = &m {
                    let me = self.get(m).ok_or_else(|| LatticeError::UnknownId(m.clone()))?;
                    let min_dim = self.elements[a].dim.min(self.elements[b].dim);
                    if me.dim > min_dim {
                        return Err(LatticeError::MeetTooLarge {
                            a: a.to_string(),
                            b: b.to_string(),
                            meet_dim: me.dim,
                            min_dim,
                        });
                    }
                    if !self.leq(m, a) || !self.leq(m, b) {
                        return Err(LatticeError::Axiom {
                            a: a.to_string(),
                            b: b.to_string(),
                            reason: format!("meet `{m}` is not below both arguments"),
                        });
                    }
                }
            }
        }
        for &a in &ids {
            for &b in &ids {
                for &c in &ids {
                    let left = match self.meet(a, b) {
                        Some(MeetValue::Element(ab)) => self.meet(&ab, c),
                        other => other,
                    };
                    let right = match self.meet(b, c) {
                        Some(MeetValue::Element(bc)) => self.meet(a, &bc),
                        other => other,
                    };
                    if left != right {
                        return Err(LatticeError::Axiom {
                            a: a.to_string(),
                            b: b.to_string(),
                            reason: format!("meet is not associative with `{c}`"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Ids reachable from `seeds` by repeated nonempty meets.
    pub fn closure_of(&self, seeds: &BTreeSet<String>) -> BTreeSet<String> {
        let mut closed: BTreeSet<String> = seeds.iter().filter(|s| self.contains(s)).cloned().collect();
        loop {
            let mut added = Vec::new();
            for a in &closed {
                for b in &closed {
                    if let Some(MeetValue::Element(m)) = self.meet(a, b) {
                        if !closed.contains(&m) {
                            added.push(m);
                        }
                    }
                }
            }
            if added.is_empty() {
                return closed;
            }
            closed.extend(added);
        }
    }
}

/// Smallest meet-closed collection containing `generators`.
pub fn close_under_meet<O: MeetOracle + ?Sized>(
    ambient: SpaceExpr,
    generators: impl IntoIterator<Item = ElementDescriptor>,
    oracle: &O,
) -> Result<Arrangement, LatticeError> {
    let ambient_dim = ambient.dimension()?;
    let mut elements: BTreeMap<String, ElementDescriptor> = BTreeMap::new();
    let add = |elements: &mut BTreeMap<String, ElementDescriptor>, e: ElementDescriptor| {
        match elements.get(&e.id) {
            Some(prev) if prev.dim != e.dim || prev.space != e.space => Err(LatticeError::DuplicateId(e.id)),
            Some(_) => Ok(false),
            None => {
                elements.insert(e.id.clone(), e);
                Ok(true)
            }
        }
    };
    for g in generators {
        add(&mut elements, g)?;
    }
    let mut meet = MeetTable::new();
    loop {
        let snapshot: Vec<ElementDescriptor> = elements.values().cloned().collect();
        let mut grew = false;
        for (i, a) in snapshot.iter().enumerate() {
            for b in &snapshot[i + 1..] {
                if meet.contains(&a.id, &b.id) {
                    continue;
                }
                let ab = oracle.meet(a, b);
                let ba = oracle.meet(b, a);
                if ab.as_ref().map(|e| &e.id) != ba.as_ref().map(|e| &e.id) {
                    return Err(LatticeError::NonCommutative {
                        a: a.id.clone(),
                        b: b.id.clone(),
                    });
                }
                let value = match ab {
                    None => MeetValue::Empty,
                    Some(m) => {
                        let min_dim = a.dim.min(b.dim);
                        if m.dim > min_dim {
                            return Err(LatticeError::MeetTooLarge {
                                a: a.id.clone(),
                                b: b.id.clone(),
                                meet_dim: m.dim,
                                min_dim,
                            });
                        }
                        let id = m.id.clone();
                        grew |= add(&mut elements, m)?;
                        MeetValue::Element(id)
                    }
                };
                meet.insert(&a.id, &b.id, value);
            }
        }
        if elements.len() > MAX_ARRANGEMENT_SIZE {
            return Err(LatticeError::TooLarge);
        }
        if !grew {
            break;
        }
    }
    let arr = Arrangement {
        ambient,
        ambient_dim,
        elements,
        meet,
    };
    arr.check_axioms()?;
    Ok(arr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// No member contains the element.
    Uncovered,
    /// The minimal members containing the element do not intersect in it.
    Meet,
    /// Codimensions of the minimal members do not add up.
    Transversality,
    /// A declared member is not an element of the arrangement.
    UnknownMember,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub element: String,
    pub kind: ViolationKind,
    pub minimal_members: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codim: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codim_sum: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterated_meet: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementVerdict {
    pub id: String,
    pub member: bool,
    pub ok: bool,
}

/// Outcome of [`is_building_set`]. Transversality is checked combinatorially
/// (codimension additivity plus meet equality).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub transversality: String,
    pub elements: Vec<ElementVerdict>,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return f.write_str("valid building set");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{} ({:?})", v.element, v.kind))
            .collect();
        write!(f, "violations at {}", parts.join(", "))
    }
}

fn minimal_members_containing(arr: &Arrangement, members: &BTreeSet<String>, s: &str) -> Vec<String> {
    let above: Vec<&String> = members.iter().filter(|g| arr.leq(s, g)).collect();
    above
        .iter()
        .filter(|g| !above.iter().any(|h| h != *g && arr.leq(h, g)))
        .map(|g| g.to_string())
        .collect()
}

/// Checks the building-set condition for every non-member element.
pub fn is_building_set(arr: &Arrangement, members: &BTreeSet<String>) -> ValidationReport {
    let mut violations = Vec::new();
    for m in members {
        if !arr.contains(m) {
            violations.push(Violation {
                element: m.clone(),
                kind: ViolationKind::UnknownMember,
                minimal_members: vec![],
                codim: None,
                codim_sum: None,
                iterated_meet: None,
            });
        }
    }
    let mut verdicts = Vec::new();
    for e in arr.elements() {
        let member = members.contains(&e.id);
        if member {
            verdicts.push(ElementVerdict {
                id: e.id.clone(),
                member,
                ok: true,
            });
            continue;
        }
        let minimal = minimal_members_containing(arr, members, &e.id);
        let codim = arr.ambient_dim() - e.dim;
        let mut violation = Violation {
            element: e.id.clone(),
            kind: ViolationKind::Uncovered,
            minimal_members: minimal.clone(),
            codim: Some(codim),
            codim_sum: None,
            iterated_meet: None,
        };
        let ok = if minimal.is_empty() {
            false
        } else {
            let mut acc = MeetValue::Element(minimal[0].clone());
            for g in &minimal[1..] {
                acc = match acc {
                    MeetValue::Element(cur) => arr.meet(&cur, g).unwrap_or(MeetValue::Empty),
                    MeetValue::Empty => MeetValue::Empty,
                };
            }
            let codim_sum: u32 = minimal.iter().filter_map(|g| arr.codim(g)).sum();
            violation.codim_sum = Some(codim_sum);
            violation.iterated_meet = Some(acc.to_string());
            if acc != MeetValue::Element(e.id.clone()) {
                violation.kind = ViolationKind::Meet;
                false
            } else if codim_sum != codim {
                violation.kind = ViolationKind::Transversality;
                false
            } else {
                true
            }
        };
        if !ok {
            violations.push(violation);
        }
        verdicts.push(ElementVerdict {
            id: e.id.clone(),
            member,
            ok,
        });
    }
    ValidationReport {
        valid: violations.is_empty(),
        transversality: "combinatorial".to_string(),
        elements: verdicts,
        violations,
    }
}

/// An arrangement together with a validated generating subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildingSet {
    arrangement: Arrangement,
    members: BTreeSet<String>,
}

impl BuildingSet {
    pub fn new(arrangement: Arrangement, members: BTreeSet<String>) -> Result<Self, LatticeError> {
        let report = is_building_set(&arrangement, &members);
        if !report.valid {
            return Err(LatticeError::InvalidBuildingSet(Box::new(report)));
        }
        Ok(BuildingSet { arrangement, members })
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    pub fn members(&self) -> &BTreeSet<String> {
        &self.members
    }

    /// Ids of all intersections of members.
    pub fn member_closure(&self) -> BTreeSet<String> {
        self.arrangement.closure_of(&self.members)
    }
}

/// Members linearized so that smaller elements come first: ascending
/// dimension, then origin label, then id.
pub fn inclusion_order(bs: &BuildingSet) -> Result<Vec<String>, LatticeError> {
    let arr = bs.arrangement();
    let mut order: Vec<&ElementDescriptor> = bs.members().iter().filter_map(|m| arr.get(m)).collect();
    order.sort_by(|a, b| (a.dim, &a.origin, &a.id).cmp(&(b.dim, &b.origin, &b.id)));
    for (i, earlier) in order.iter().enumerate() {
        for later in &order[i + 1..] {
            if arr.leq(&later.id, &earlier.id) {
                return Err(LatticeError::OrderConflict {
                    earlier: earlier.id.clone(),
                    later: later.id.clone(),
                });
            }
        }
    }
    Ok(order.into_iter().map(|e| e.id.clone()).collect())
}

// JSON: { ambient, elements, leq, meet }, plus optional `members` on input.
#[derive(Serialize, Deserialize)]
struct ArrangementRepr {
    ambient: SpaceExpr,
    elements: Vec<ElementDescriptor>,
    #[serde(default)]
    leq: Vec<[String; 2]>,
    meet: MeetTable,
}

impl Serialize for Arrangement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ArrangementRepr {
            ambient: self.ambient.clone(),
            elements: self.elements.values().cloned().collect(),
            leq: self.leq_pairs().into_iter().map(|(a, b)| [a, b]).collect(),
            meet: self.meet.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Arrangement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = ArrangementRepr::deserialize(deserializer)?;
        let arr = Arrangement::from_parts(repr.ambient, repr.elements, repr.meet).map_err(D::Error::custom)?;
        let declared: BTreeSet<(String, String)> = repr.leq.into_iter().map(|[a, b]| (a, b)).filter(|(a, b)| a != b).collect();
        if !declared.is_empty() {
            let derived: BTreeSet<(String, String)> = arr.leq_pairs().into_iter().collect();
            if let Some((a, b)) = declared.symmetric_difference(&derived).next() {
                return Err(D::Error::custom(LatticeError::LeqMismatch {
                    a: a.clone(),
                    b: b.clone(),
                }));
            }
        }
        Ok(arr)
    }
}
