//! The space calculus.
//!
//! A [`SpaceExpr`] denotes a smooth projective variety assembled from atoms
//! by products, projective bundles and blowups along smooth centers. Each
//! atom carries user-asserted ordinarity and Hodge-Witt facts and optionally
//! a Poincaré polynomial. Expressions are immutable and cheaply cloneable;
//! sub-expressions are shared through [`Arc`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::betti::Poincare;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("empty operand to {0}")]
    EmptyOperand(&'static str),
    #[error("the empty space has no dimension")]
    EmptyDimension,
    #[error("projective bundle fiber rank must be at least 1, got {0}")]
    InvalidRank(u32),
    #[error("blowup codimension must be at least 1, got {0}")]
    InvalidCodim(u32),
    #[error("blowup dimension mismatch: center dim {center} + codim {codim} != ambient dim {ambient}")]
    DimensionMismatch { ambient: u32, center: u32, codim: u32 },
    #[error("Poincaré polynomial of `{name}` has degree {degree}, exceeding 2*dim = {max}")]
    PoincareTooLong { name: String, degree: usize, max: u32 },
    #[error("Poincaré polynomial of `{name}` must have constant term 1")]
    PoincareConstant { name: String },
}

/// Three-valued truth status (strong Kleene connectives).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tristate {
    True,
    False,
    Unknown,
}

impl Tristate {
    pub const ALL: [Tristate; 3] = [Tristate::True, Tristate::False, Tristate::Unknown];

    pub fn and(self, other: Tristate) -> Tristate {
        use Tristate::*;
        match (self, other) {
            (False, _) | (_, False) => False,
            (True, True) => True,
            _ => Unknown,
        }
    }

    pub fn or(self, other: Tristate) -> Tristate {
        use Tristate::*;
        match (self, other) {
            (True, _) | (_, True) => True,
            (False, False) => False,
            _ => Unknown,
        }
    }

    pub fn all<I: IntoIterator<Item = Tristate>>(items: I) -> Tristate {
        items.into_iter().fold(Tristate::True, Tristate::and)
    }

    pub fn is_true(self) -> bool {
        self == Tristate::True
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tristate::True => "true",
            Tristate::False => "false",
            Tristate::Unknown => "unknown",
        }
    }
}

impl From<bool> for Tristate {
    fn from(b: bool) -> Self {
        if b {
            Tristate::True
        } else {
            Tristate::False
        }
    }
}

impl fmt::Display for Tristate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tristate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "t" | "yes" => Ok(Tristate::True),
            "false" | "f" | "no" => Ok(Tristate::False),
            "unknown" | "u" | "?" => Ok(Tristate::Unknown),
            other => Err(format!("not a truth value: `{other}`")),
        }
    }
}

/// Ordinarity and Hodge-Witt facts of an atom.
///
/// Normalized under "ordinary implies Hodge-Witt": `ordinary == True`
/// forces `hodge_witt == True`, and `hodge_witt == False` forces
/// `ordinary == False`. The `*_derived` flags record which value came from
/// the implication rather than from an assertion. An asserted ordinary atom
/// that is also asserted non-Hodge-Witt keeps the ordinary assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PropertyFacts {
    pub ordinary: Tristate,
    pub hodge_witt: Tristate,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ordinary_derived: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub hodge_witt_derived: bool,
}

impl PropertyFacts {
    pub fn new(ordinary: Tristate, hodge_witt: Tristate) -> Self {
        PropertyFacts {
            ordinary,
            hodge_witt,
            ordinary_derived: false,
            hodge_witt_derived: false,
        }
        .normalized()
    }

    pub fn normalized(self) -> Self {
        let (ordinary, hodge_witt) = self.asserted();
        let mut out = PropertyFacts::raw(ordinary, hodge_witt);
        if ordinary.is_true() && !hodge_witt.is_true() {
            out.hodge_witt = Tristate::True;
            out.hodge_witt_derived = true;
        } else if hodge_witt == Tristate::False && ordinary != Tristate::False {
            out.ordinary = Tristate::False;
            out.ordinary_derived = true;
        }
        out
    }

    fn raw(ordinary: Tristate, hodge_witt: Tristate) -> Self {
        PropertyFacts {
            ordinary,
            hodge_witt,
            ordinary_derived: false,
            hodge_witt_derived: false,
        }
    }

    /// The facts as asserted, before normalization filled anything in.
    pub fn asserted(self) -> (Tristate, Tristate) {
        let ordinary = if self.ordinary_derived { Tristate::Unknown } else { self.ordinary };
        let hodge_witt = if self.hodge_witt_derived { Tristate::Unknown } else { self.hodge_witt };
        (ordinary, hodge_witt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceNode {
    Empty,
    Point,
    Atom {
        name: String,
        dim: u32,
        facts: PropertyFacts,
        poincare: Option<Poincare>,
    },
    Product {
        left: SpaceExpr,
        right: SpaceExpr,
    },
    /// Projectivization of a rank `fiber_rank` bundle: fibers are `P^(r-1)`.
    ProjBundle {
        base: SpaceExpr,
        fiber_rank: u32,
    },
    Blowup {
        ambient: SpaceExpr,
        center: SpaceExpr,
        codim: u32,
    },
}

/// Immutable space expression. Equality is structural.
#[derive(Clone, PartialEq, Eq)]
pub struct SpaceExpr(Arc<SpaceNode>);

impl SpaceExpr {
    pub fn empty() -> Self {
        SpaceExpr(Arc::new(SpaceNode::Empty))
    }

    pub fn point() -> Self {
        SpaceExpr(Arc::new(SpaceNode::Point))
    }

    pub fn node(&self) -> &SpaceNode {
        &self.0
    }

    pub(crate) fn node_ptr(&self) -> *const SpaceNode {
        Arc::as_ptr(&self.0)
    }

    pub fn ptr_eq(&self, other: &SpaceExpr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn is_empty(&self) -> bool {
        matches!(*self.0, SpaceNode::Empty)
    }

    pub fn dimension(&self) -> Result<u32, SpaceError> {
        dimension(self)
    }

    /// A blowup along a divisor (codimension 1); geometrically an isomorphism.
    pub fn is_divisorial_blowup(&self) -> bool {
        matches!(*self.0, SpaceNode::Blowup { codim: 1, .. })
    }

    /// Names of all atoms occurring in the expression.
    pub fn atom_names(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.clone()];
        while let Some(s) = stack.pop() {
            if !seen.insert(s.node_ptr() as usize) {
                continue;
            }
            match s.node() {
                SpaceNode::Empty | SpaceNode::Point => {}
                SpaceNode::Atom { name, .. } => {
                    names.insert(name.clone());
                }
                SpaceNode::Product { left, right } => {
                    stack.push(left.clone());
                    stack.push(right.clone());
                }
                SpaceNode::ProjBundle { base, .. } => stack.push(base.clone()),
                SpaceNode::Blowup { ambient, center, .. } => {
                    stack.push(ambient.clone());
                    stack.push(center.clone());
                }
            }
        }
        names
    }

    /// Rebuilds the expression with every atom replaced by `f(atom)`.
    /// Sharing between sub-expressions is preserved.
    pub fn map_atoms<F>(&self, f: &mut F) -> Result<SpaceExpr, SpaceError>
    where
        F: FnMut(&SpaceExpr) -> Result<SpaceExpr, SpaceError>,
    {
        let mut memo = HashMap::new();
        self.map_atoms_memo(f, &mut memo)
    }

    pub(crate) fn map_atoms_memo<F>(
        &self,
        f: &mut F,
        memo: &mut HashMap<*const SpaceNode, (SpaceExpr, SpaceExpr)>,
    ) -> Result<SpaceExpr, SpaceError>
    where
        F: FnMut(&SpaceExpr) -> Result<SpaceExpr, SpaceError>,
    {
        if let Some((_, out)) = memo.get(&self.node_ptr()) {
            return Ok(out.clone());
        }
        let out = match self.node() {
            SpaceNode::Empty | SpaceNode::Point => self.clone(),
            SpaceNode::Atom { .. } => f(self)?,
            SpaceNode::Product { left, right } => {
                product(&left.map_atoms_memo(f, memo)?, &right.map_atoms_memo(f, memo)?)?
            }
            SpaceNode::ProjBundle { base, fiber_rank } => {
                proj_bundle(&base.map_atoms_memo(f, memo)?, *fiber_rank)?
            }
            SpaceNode::Blowup { ambient, center, codim } => blow_up(
                &ambient.map_atoms_memo(f, memo)?,
                &center.map_atoms_memo(f, memo)?,
                *codim,
            )?,
        };
        memo.insert(self.node_ptr(), (self.clone(), out.clone()));
        Ok(out)
    }
}

impl fmt::Debug for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpaceExpr({self})")
    }
}

/// Canonical text form: `pt`, `∅`, atom names, `(A x B)`, `P[r](B)`,
/// `Bl[c](X; Z)`.
impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            SpaceNode::Empty => f.write_str("∅"),
            SpaceNode::Point => f.write_str("pt"),
            SpaceNode::Atom { name, .. } => f.write_str(name),
            SpaceNode::Product { left, right } => write!(f, "({left} x {right})"),
            SpaceNode::ProjBundle { base, fiber_rank } => write!(f, "P[{fiber_rank}]({base})"),
            SpaceNode::Blowup { ambient, center, codim } => {
                write!(f, "Bl[{codim}]({ambient}; {center})")
            }
        }
    }
}

pub fn atom(
    name: &str,
    dim: u32,
    ordinary: Tristate,
    hodge_witt: Tristate,
    poincare: Option<Poincare>,
) -> Result<SpaceExpr, SpaceError> {
    atom_with_facts(name, dim, PropertyFacts::new(ordinary, hodge_witt), poincare)
}

pub fn atom_with_facts(
    name: &str,
    dim: u32,
    facts: PropertyFacts,
    poincare: Option<Poincare>,
) -> Result<SpaceExpr, SpaceError> {
    if let Some(p) = &poincare {
        if let Some(degree) = p.degree() {
            if degree > 2 * dim as usize {
                return Err(SpaceError::PoincareTooLong {
                    name: name.to_string(),
                    degree,
                    max: 2 * dim,
                });
            }
        }
        if p.coeff(0) != num_bigint::BigUint::from(1u32) {
            return Err(SpaceError::PoincareConstant { name: name.to_string() });
        }
    }
    Ok(SpaceExpr(Arc::new(SpaceNode::Atom {
        name: name.to_string(),
        dim,
        facts: facts.normalized(),
        poincare,
    })))
}

/// Projective `d`-space: an ordinary atom named `P<d>`.
pub fn projective_space(d: u32) -> SpaceExpr {
    atom(
        &format!("P{d}"),
        d,
        Tristate::True,
        Tristate::True,
        Some(Poincare::projective(d as usize)),
    )
    .expect("projective space presets are well formed")
}

pub fn product(a: &SpaceExpr, b: &SpaceExpr) -> Result<SpaceExpr, SpaceError> {
    if a.is_empty() || b.is_empty() {
        return Err(SpaceError::EmptyOperand("product"));
    }
    Ok(SpaceExpr(Arc::new(SpaceNode::Product {
        left: a.clone(),
        right: b.clone(),
    })))
}

/// Left-nested `k`-fold self product. `k = 1` returns `x` itself.
pub fn power(x: &SpaceExpr, k: u32) -> Result<SpaceExpr, SpaceError> {
    if k == 0 {
        return Ok(SpaceExpr::point());
    }
    let mut acc = x.clone();
    for _ in 1..k {
        acc = product(&acc, x)?;
    }
    Ok(acc)
}

pub fn proj_bundle(base: &SpaceExpr, fiber_rank: u32) -> Result<SpaceExpr, SpaceError> {
    if fiber_rank < 1 {
        return Err(SpaceError::InvalidRank(fiber_rank));
    }
    if base.is_empty() {
        return Err(SpaceError::EmptyOperand("proj_bundle"));
    }
    Ok(SpaceExpr(Arc::new(SpaceNode::ProjBundle {
        base: base.clone(),
        fiber_rank,
    })))
}

/// Blowup of `ambient` along `center`. An empty center gives `ambient` back.
pub fn blow_up(ambient: &SpaceExpr, center: &SpaceExpr, codim: u32) -> Result<SpaceExpr, SpaceError> {
    if center.is_empty() {
        return Ok(ambient.clone());
    }
    if ambient.is_empty() {
        return Err(SpaceError::EmptyOperand("blow_up"));
    }
    if codim < 1 {
        return Err(SpaceError::InvalidCodim(codim));
    }
    let ambient_dim = ambient.dimension()?;
    let center_dim = center.dimension()?;
    if center_dim + codim != ambient_dim {
        return Err(SpaceError::DimensionMismatch {
            ambient: ambient_dim,
            center: center_dim,
            codim,
        });
    }
    Ok(SpaceExpr(Arc::new(SpaceNode::Blowup {
        ambient: ambient.clone(),
        center: center.clone(),
        codim,
    })))
}

pub fn dimension(s: &SpaceExpr) -> Result<u32, SpaceError> {
    match s.node() {
        SpaceNode::Empty => Err(SpaceError::EmptyDimension),
        SpaceNode::Point => Ok(0),
        SpaceNode::Atom { dim, .. } => Ok(*dim),
        SpaceNode::Product { left, right } => Ok(dimension(left)? + dimension(right)?),
        SpaceNode::ProjBundle { base, fiber_rank } => Ok(dimension(base)? + fiber_rank - 1),
        SpaceNode::Blowup { ambient, .. } => dimension(ambient),
    }
}

// Wire form. Deserialization goes back through the checked constructors.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SpaceRepr {
    Empty,
    Point,
    Atom {
        name: String,
        dim: u32,
        #[serde(flatten)]
        facts: PropertyFacts,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        poincare: Option<Poincare>,
    },
    Product {
        left: SpaceExpr,
        right: SpaceExpr,
    },
    ProjBundle {
        base: SpaceExpr,
        fiber_rank: u32,
    },
    Blowup {
        ambient: SpaceExpr,
        center: SpaceExpr,
        codim: u32,
    },
}

impl Serialize for SpaceExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self.node() {
            SpaceNode::Empty => SpaceRepr::Empty,
            SpaceNode::Point => SpaceRepr::Point,
            SpaceNode::Atom {
                name,
                dim,
                facts,
                poincare,
            } => SpaceRepr::Atom {
                name: name.clone(),
                dim: *dim,
                facts: *facts,
                poincare: poincare.clone(),
            },
            SpaceNode::Product { left, right } => SpaceRepr::Product {
                left: left.clone(),
                right: right.clone(),
            },
            SpaceNode::ProjBundle { base, fiber_rank } => SpaceRepr::ProjBundle {
                base: base.clone(),
                fiber_rank: *fiber_rank,
            },
            SpaceNode::Blowup { ambient, center, codim } => SpaceRepr::Blowup {
                ambient: ambient.clone(),
                center: center.clone(),
                codim: *codim,
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpaceExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SpaceRepr::deserialize(deserializer)?;
        let built = match repr {
            SpaceRepr::Empty => Ok(SpaceExpr::empty()),
            SpaceRepr::Point => Ok(SpaceExpr::point()),
            SpaceRepr::Atom {
                name,
                dim,
                facts,
                poincare,
            } => atom_with_facts(&name, dim, facts, poincare),
            SpaceRepr::Product { left, right } => product(&left, &right),
            SpaceRepr::ProjBundle { base, fiber_rank } => proj_bundle(&base, fiber_rank),
            SpaceRepr::Blowup { ambient, center, codim } => blow_up(&ambient, &center, codim),
        };
        built.map_err(D::Error::custom)
    }
}
