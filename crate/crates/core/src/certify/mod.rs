//! Three-valued ordinarity verdicts with derivation certificates.
//!
//! Every certificate node records a claim, the rule that justifies it and
//! the premises the rule consumed. Leaves are atom facts or the empty/point
//! conventions. Verdicts are evaluated with Kleene connectives, so a
//! `False` premise can settle an "only if" direction even when other facts
//! are unknown.

mod check;
mod explain;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blowup::{BlowupError, BlowupTrace, StageState, TransformCase};
use crate::lattice::{BuildingSet, MeetValue};
use crate::space::{PropertyFacts, SpaceExpr, SpaceNode, Tristate};

pub use check::{check, CheckError};
pub use explain::{explain, BlockingLeaf, CertificateDocument, ExplainFormat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Blowup(#[from] BlowupError),
    #[error("malformed trace: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Ordinary,
    HodgeWitt,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Ordinary => "ordinary",
            Property::HodgeWitt => "hodge_witt",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rule {
    AtomFact,
    EmptyOrdinary,
    PointOrdinary,
    /// `X x Y` is ordinary iff one factor is ordinary and the other
    /// Hodge-Witt. Premises `[ord X, hw Y, ord Y, hw X]`.
    EkedahlProduct,
    /// A projective bundle is ordinary iff its base is.
    IllusieProjBundle,
    /// `Bl_Z X` is ordinary iff `X` and `Z` are.
    IllusieBlowup,
    /// The dominant transform of `Y` is ordinary iff `Y` and `Y ∩ Z` are.
    DominantTransform,
    OrdImpliesHw,
    /// The ambient and every intersection of members are ordinary.
    OrdinaryBuildingSet,
    /// The wonderful compactification is ordinary iff the building set is.
    MainTheorem,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::AtomFact,
        Rule::EmptyOrdinary,
        Rule::PointOrdinary,
        Rule::EkedahlProduct,
        Rule::IllusieProjBundle,
        Rule::IllusieBlowup,
        Rule::DominantTransform,
        Rule::OrdImpliesHw,
        Rule::OrdinaryBuildingSet,
        Rule::MainTheorem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::AtomFact => "ATOM_FACT",
            Rule::EmptyOrdinary => "EMPTY_ORDINARY",
            Rule::PointOrdinary => "POINT_ORDINARY",
            Rule::EkedahlProduct => "EKEDAHL_PRODUCT",
            Rule::IllusieProjBundle => "ILLUSIE_PROJ_BUNDLE",
            Rule::IllusieBlowup => "ILLUSIE_BLOWUP",
            Rule::DominantTransform => "DOMINANT_TRANSFORM",
            Rule::OrdImpliesHw => "ORD_IMPLIES_HW",
            Rule::OrdinaryBuildingSet => "ORDINARY_BUILDING_SET",
            Rule::MainTheorem => "MAIN_THEOREM",
        }
    }

    pub fn is_leaf(self) -> bool {
        matches!(self, Rule::AtomFact | Rule::EmptyOrdinary | Rule::PointOrdinary)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Kleene evaluation of a non-leaf rule on its premise verdicts, in the
/// premise order the certificates use.
pub fn evaluate(rule: Rule, premises: &[Tristate]) -> Tristate {
    match rule {
        Rule::EkedahlProduct => match premises {
            [ox, hy, oy, hx] => ox.and(*hy).or(oy.and(*hx)),
            _ => Tristate::Unknown,
        },
        Rule::OrdImpliesHw => match premises {
            [Tristate::True] => Tristate::True,
            _ => Tristate::Unknown,
        },
        Rule::AtomFact | Rule::EmptyOrdinary | Rule::PointOrdinary => Tristate::True,
        Rule::IllusieProjBundle
        | Rule::IllusieBlowup
        | Rule::DominantTransform
        | Rule::OrdinaryBuildingSet
        | Rule::MainTheorem => Tristate::all(premises.iter().copied()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub subject: String,
    pub property: Property,
    pub verdict: Tristate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomFact {
    pub name: String,
    #[serde(flatten)]
    pub facts: PropertyFacts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: Claim,
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<AtomFact>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<TransformCase>,
    /// Codimension-1 blowup, treated as the identity.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub divisorial: bool,
    #[serde(default)]
    pub premises: Vec<Arc<Certificate>>,
}

impl Certificate {
    fn node(subject: String, property: Property, rule: Rule, premises: Vec<Arc<Certificate>>) -> Self {
        let verdicts: Vec<Tristate> = premises.iter().map(|p| p.verdict()).collect();
        Certificate {
            claim: Claim {
                subject,
                property,
                verdict: evaluate(rule, &verdicts),
            },
            rule,
            atom: None,
            case: None,
            divisorial: false,
            premises,
        }
    }

    pub fn verdict(&self) -> Tristate {
        self.claim.verdict
    }

    /// Unknown nodes reachable from the root through Unknown nodes that
    /// have no Unknown premise of their own, as `(subject, property)`.
    /// Empty unless the root is Unknown.
    pub fn blocking_leaves(&self) -> BTreeSet<(String, Property)> {
        let mut out = BTreeSet::new();
        if self.verdict() != Tristate::Unknown {
            return out;
        }
        let mut seen: BTreeSet<*const Certificate> = BTreeSet::new();
        let mut stack: Vec<&Certificate> = vec![self];
        while let Some(c) = stack.pop() {
            if !seen.insert(c as *const Certificate) {
                continue;
            }
            let unknown: Vec<&Certificate> = c
                .premises
                .iter()
                .map(|p| p.as_ref())
                .filter(|p| p.verdict() == Tristate::Unknown)
                .collect();
            if unknown.is_empty() {
                out.insert((c.claim.subject.clone(), c.claim.property));
            } else {
                stack.extend(unknown);
            }
        }
        out
    }

    /// Number of distinct nodes (shared premises counted once).
    pub fn node_count(&self) -> usize {
        let mut seen: BTreeSet<*const Certificate> = BTreeSet::new();
        let mut stack: Vec<&Certificate> = vec![self];
        while let Some(c) = stack.pop() {
            if seen.insert(c as *const Certificate) {
                stack.extend(c.premises.iter().map(|p| p.as_ref()));
            }
        }
        seen.len()
    }

    /// Rules used anywhere in the tree.
    pub fn rules(&self) -> BTreeSet<Rule> {
        let mut seen: BTreeSet<*const Certificate> = BTreeSet::new();
        let mut rules = BTreeSet::new();
        let mut stack: Vec<&Certificate> = vec![self];
        while let Some(c) = stack.pop() {
            if seen.insert(c as *const Certificate) {
                rules.insert(c.rule);
                stack.extend(c.premises.iter().map(|p| p.as_ref()));
            }
        }
        rules
    }

    /// Names of atoms used as leaves, plus `pt` and `∅` for the convention
    /// leaves.
    pub fn leaf_subjects(&self) -> BTreeSet<String> {
        let mut seen: BTreeSet<*const Certificate> = BTreeSet::new();
        let mut out = BTreeSet::new();
        let mut stack: Vec<&Certificate> = vec![self];
        while let Some(c) = stack.pop() {
            if seen.insert(c as *const Certificate) {
                if c.rule.is_leaf() {
                    out.insert(c.claim.subject.clone());
                }
                stack.extend(c.premises.iter().map(|p| p.as_ref()));
            }
        }
        out
    }
}

/// Memoizing certifier. Sub-expressions shared by pointer are certified
/// once and their certificates are shared in the result.
#[derive(Default)]
pub struct Certifier {
    memo: HashMap<(*const SpaceNode, Property), (SpaceExpr, Arc<Certificate>)>,
}

impl Certifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn space(&mut self, s: &SpaceExpr, property: Property) -> Arc<Certificate> {
        let key = (s.node_ptr(), property);
        if let Some((_, c)) = self.memo.get(&key) {
            return c.clone();
        }
        let cert = Arc::new(match property {
            Property::Ordinary => self.ordinary_uncached(s),
            Property::HodgeWitt => self.hodge_witt_uncached(s),
        });
        self.memo.insert(key, (s.clone(), cert.clone()));
        cert
    }

    pub fn ordinary(&mut self, s: &SpaceExpr) -> Arc<Certificate> {
        self.space(s, Property::Ordinary)
    }

    pub fn hodge_witt(&mut self, s: &SpaceExpr) -> Arc<Certificate> {
        self.space(s, Property::HodgeWitt)
    }

    fn ordinary_uncached(&mut self, s: &SpaceExpr) -> Certificate {
        let subject = s.to_string();
        let ord = Property::Ordinary;
        match s.node() {
            SpaceNode::Empty => Certificate::node(subject, ord, Rule::EmptyOrdinary, vec![]),
            SpaceNode::Point => Certificate::node(subject, ord, Rule::PointOrdinary, vec![]),
            SpaceNode::Atom { name, facts, .. } => atom_leaf(name, *facts, ord),
            SpaceNode::Product { left, right } => {
                let premises = vec![
                    self.ordinary(left),
                    self.hodge_witt(right),
                    self.ordinary(right),
                    self.hodge_witt(left),
                ];
                Certificate::node(subject, ord, Rule::EkedahlProduct, premises)
            }
            SpaceNode::ProjBundle { base, .. } => {
                let premises = vec![self.ordinary(base)];
                Certificate::node(subject, ord, Rule::IllusieProjBundle, premises)
            }
            SpaceNode::Blowup { ambient, center, codim } => {
                if *codim == 1 {
                    let mut c = Certificate::node(subject, ord, Rule::IllusieBlowup, vec![self.ordinary(ambient)]);
                    c.divisorial = true;
                    c
                } else {
                    let premises = vec![self.ordinary(ambient), self.ordinary(center)];
                    Certificate::node(subject, ord, Rule::IllusieBlowup, premises)
                }
            }
        }
    }

    fn hodge_witt_uncached(&mut self, s: &SpaceExpr) -> Certificate {
        if let SpaceNode::Atom { name, facts, .. } = s.node() {
            if !facts.hodge_witt_derived {
                return atom_leaf(name, *facts, Property::HodgeWitt);
            }
        }
        let premise = self.ordinary(s);
        Certificate::node(s.to_string(), Property::HodgeWitt, Rule::OrdImpliesHw, vec![premise])
    }

    /// Conjunction over the ambient and every intersection of members.
    pub fn building_set(&mut self, bs: &BuildingSet) -> Arc<Certificate> {
        let arr = bs.arrangement();
        let mut premises = vec![self.ordinary(arr.ambient())];
        for id in bs.member_closure() {
            if let Some(e) = arr.get(&id) {
                premises.push(self.ordinary(&e.space));
            }
        }
        let members: Vec<&str> = bs.members().iter().map(String::as_str).collect();
        let subject = format!("G = {{{}}} in {}", members.join(", "), arr.ambient());
        Arc::new(Certificate::node(subject, Property::Ordinary, Rule::OrdinaryBuildingSet, premises))
    }

    /// Theorem-level verdict: the building-set certificate under
    /// `MAIN_THEOREM`.
    pub fn wonderful(&mut self, trace: &BlowupTrace) -> Result<Arc<Certificate>, CertifyError> {
        let bs = trace.building_set()?;
        let premise = self.building_set(&bs);
        Ok(Arc::new(Certificate::node(
            trace.final_space.to_string(),
            Property::Ordinary,
            Rule::MainTheorem,
            vec![premise],
        )))
    }

    /// Proof-level verdict: replays the trace stage by stage.
    pub fn trace(&mut self, trace: &BlowupTrace) -> Result<Arc<Certificate>, CertifyError> {
        if trace.stages.len() != trace.order.len() {
            return Err(CertifyError::Malformed(format!(
                "{} stages for {} centers",
                trace.stages.len(),
                trace.order.len()
            )));
        }
        let mut replay = TraceReplay {
            certifier: self,
            trace,
            elements: HashMap::new(),
            ambients: HashMap::new(),
        };
        let n = trace.stages.len();
        let root = replay.ambient(n)?;
        if n == 0 {
            return Ok(root);
        }
        // Rename the root after the final space so both routes agree on it.
        let mut renamed = (*root).clone();
        renamed.claim.subject = trace.final_space.to_string();
        Ok(Arc::new(renamed))
    }
}

fn atom_leaf(name: &str, facts: PropertyFacts, property: Property) -> Certificate {
    let verdict = match property {
        Property::Ordinary => facts.ordinary,
        Property::HodgeWitt => facts.hodge_witt,
    };
    Certificate {
        claim: Claim {
            subject: name.to_string(),
            property,
            verdict,
        },
        rule: Rule::AtomFact,
        atom: Some(AtomFact {
            name: name.to_string(),
            facts,
        }),
        case: None,
        divisorial: false,
        premises: vec![],
    }
}

fn empty_leaf() -> Arc<Certificate> {
    Arc::new(Certificate::node("∅".into(), Property::Ordinary, Rule::EmptyOrdinary, vec![]))
}

struct TraceReplay<'a> {
    certifier: &'a mut Certifier,
    trace: &'a BlowupTrace,
    elements: HashMap<(usize, String), Arc<Certificate>>,
    ambients: HashMap<usize, Arc<Certificate>>,
}

impl TraceReplay<'_> {
    fn stage(&self, k: usize) -> Result<&StageState, CertifyError> {
        self.trace
            .state(k)
            .ok_or_else(|| CertifyError::Malformed(format!("missing stage {k}")))
    }

    fn ambient(&mut self, k: usize) -> Result<Arc<Certificate>, CertifyError> {
        if let Some(c) = self.ambients.get(&k) {
            return Ok(c.clone());
        }
        let cert = if k == 0 {
            let ambient = self.trace.initial.ambient.clone();
            self.certifier.ordinary(&ambient)
        } else {
            let stage = self.stage(k)?;
            let center = stage
                .center
                .clone()
                .ok_or_else(|| CertifyError::Malformed(format!("stage {k} has no center")))?;
            let codim = stage
                .center_codim
                .ok_or_else(|| CertifyError::Malformed(format!("stage {k} has no center codimension")))?;
            let prev = self.ambient(k - 1)?;
            let subject = format!("X_{k}");
            if codim == 1 {
                let mut c = Certificate::node(subject, Property::Ordinary, Rule::IllusieBlowup, vec![prev]);
                c.divisorial = true;
                Arc::new(c)
            } else {
                let z = self.element(k - 1, &center)?;
                Arc::new(Certificate::node(subject, Property::Ordinary, Rule::IllusieBlowup, vec![prev, z]))
            }
        };
        self.ambients.insert(k, cert.clone());
        Ok(cert)
    }

    fn element(&mut self, k: usize, id: &str) -> Result<Arc<Certificate>, CertifyError> {
        let key = (k, id.to_string());
        if let Some(c) = self.elements.get(&key) {
            return Ok(c.clone());
        }
        let stage = self.stage(k)?;
        let e = stage.element(id)?.clone();
        let cert = if k == 0 {
            self.certifier.ordinary(&e.space)
        } else {
            let case = e
                .case
                .ok_or_else(|| CertifyError::Malformed(format!("element `{id}` at stage {k} has no case")))?;
            let center = stage.center.clone().unwrap_or_default();
            let meet = if case == TransformCase::Strict {
                match self.stage(k - 1)?.meet(id, &center)? {
                    MeetValue::Element(m) => Some(m),
                    MeetValue::Empty => {
                        return Err(CertifyError::Malformed(format!(
                            "element `{id}` at stage {k} is strict but misses the center"
                        )))
                    }
                }
            } else {
                None
            };
            let prev = self.element(k - 1, id)?;
            let subject = format!("{id}^({k})");
            let mut divisorial = false;
            let premises = match (case, meet) {
                (TransformCase::Equal | TransformCase::Pullback, _) => vec![prev],
                (TransformCase::Disjoint, _) => vec![prev, empty_leaf()],
                (TransformCase::Strict, _) if e.space.is_divisorial_blowup() => {
                    divisorial = true;
                    vec![prev]
                }
                (TransformCase::Strict, meet) => {
                    let m = self.element(k - 1, &meet.unwrap_or_default())?;
                    vec![prev, m]
                }
            };
            let mut c = Certificate::node(subject, Property::Ordinary, Rule::DominantTransform, premises);
            c.case = Some(case);
            c.divisorial = divisorial;
            Arc::new(c)
        };
        self.elements.insert(key, cert.clone());
        Ok(cert)
    }
}

pub fn certify_space(s: &SpaceExpr) -> Arc<Certificate> {
    Certifier::new().ordinary(s)
}

pub fn certify_property(s: &SpaceExpr, property: Property) -> Arc<Certificate> {
    Certifier::new().space(s, property)
}

pub fn certify_building_set(bs: &BuildingSet) -> Arc<Certificate> {
    Certifier::new().building_set(bs)
}

pub fn certify_wonderful(trace: &BlowupTrace) -> Result<Arc<Certificate>, CertifyError> {
    Certifier::new().wonderful(trace)
}

pub fn certify_trace(trace: &BlowupTrace) -> Result<Arc<Certificate>, CertifyError> {
    Certifier::new().trace(trace)
}
