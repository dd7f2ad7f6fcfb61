//! Dominant transforms and the iterated-blowup driver.
//!
//! Members of a building set are blown up one at a time, smallest first.
//! After each step every element is replaced by its dominant transform and
//! the meet table is rebuilt with the separation rule: two transforms whose
//! old meet lies in the center, while neither of them does, become disjoint.
//! Every case decision is recorded so certificates can replay the trace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{inclusion_order, is_building_set, Arrangement, BuildingSet, LatticeError, MeetTable, MeetValue};
use crate::space::{blow_up, proj_bundle, SpaceError, SpaceExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlowupError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("stage {stage}: meet table has no entry for ({a}, {b})")]
    MissingMeet { stage: usize, a: String, b: String },
    #[error("stage {stage}: unknown element `{id}`")]
    UnknownElement { stage: usize, id: String },
    #[error("out-of-order center `{got}` at stage {stage}, expected `{expected}`")]
    OutOfOrder { stage: usize, expected: String, got: String },
    #[error("center `{0}` is not a member of the building set")]
    NotAMember(String),
    #[error("ambient of the building set does not match the requested space")]
    AmbientMismatch,
    #[error("malformed trace: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformCase {
    /// The element is the center; its transform is the exceptional divisor.
    Equal,
    /// The element lies strictly inside the center; full preimage.
    Pullback,
    /// The element misses the center.
    Disjoint,
    /// Strict transform: the element blown up along its meet with the center.
    Strict,
}

impl fmt::Display for TransformCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformCase::Equal => "equal",
            TransformCase::Pullback => "pullback",
            TransformCase::Disjoint => "disjoint",
            TransformCase::Strict => "strict",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageElement {
    pub id: String,
    /// `None` at stage 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<TransformCase>,
    pub dim: u32,
    pub space: SpaceExpr,
    /// `(stage, id)` pairs from this stage back to stage 0.
    pub origin_chain: Vec<(usize, String)>,
}

/// State `(X_k, S^(k))` after `index` blowups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageState {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_codim: Option<u32>,
    pub ambient: SpaceExpr,
    pub elements: BTreeMap<String, StageElement>,
    pub meet: MeetTable,
}

impl StageState {
    pub fn initial(arr: &Arrangement) -> Self {
        let elements = arr
            .elements()
            .map(|e| {
                (
                    e.id.clone(),
                    StageElement {
                        id: e.id.clone(),
                        case: None,
                        dim: e.dim,
                        space: e.space.clone(),
                        origin_chain: vec![(0, e.id.clone())],
                    },
                )
            })
            .collect();
        StageState {
            index: 0,
            center: None,
            center_codim: None,
            ambient: arr.ambient().clone(),
            elements,
            meet: arr.meet_table().clone(),
        }
    }

    pub fn element(&self, id: &str) -> Result<&StageElement, BlowupError> {
        self.elements.get(id).ok_or_else(|| BlowupError::UnknownElement {
            stage: self.index,
            id: id.to_string(),
        })
    }

    pub fn meet(&self, a: &str, b: &str) -> Result<MeetValue, BlowupError> {
        self.meet.get(a, b).ok_or_else(|| BlowupError::MissingMeet {
            stage: self.index,
            a: a.to_string(),
            b: b.to_string(),
        })
    }

    pub fn ambient_dim(&self) -> Result<u32, BlowupError> {
        Ok(self.ambient.dimension()?)
    }
}

/// Dominant transform of `y` under the blowup of `stage.ambient` along `z`.
pub fn dominant_transform(y: &StageElement, z: &StageElement, stage: &StageState) -> Result<StageElement, BlowupError> {
    let codim = stage.ambient_dim()? - z.dim;
    let (case, space) = if y.id == z.id {
        (TransformCase::Equal, proj_bundle(&z.space, codim)?)
    } else {
        match stage.meet(&y.id, &z.id)? {
            MeetValue::Empty => (TransformCase::Disjoint, y.space.clone()),
            MeetValue::Element(m) if m == y.id => (TransformCase::Pullback, proj_bundle(&y.space, codim)?),
            MeetValue::Element(m) => {
                let meet = stage.element(&m)?;
                (
                    TransformCase::Strict,
                    blow_up(&y.space, &meet.space, y.dim - meet.dim)?,
                )
            }
        }
    };
    let mut origin_chain = Vec::with_capacity(y.origin_chain.len() + 1);
    origin_chain.push((stage.index + 1, y.id.clone()));
    origin_chain.extend(y.origin_chain.iter().cloned());
    Ok(StageElement {
        id: y.id.clone(),
        case: Some(case),
        dim: space.dimension()?,
        space,
        origin_chain,
    })
}

/// Blows up `center` (which must be `schedule[prev.index]`).
pub fn blowup_step(prev: &StageState, center: &str, schedule: &[String]) -> Result<StageState, BlowupError> {
    match schedule.get(prev.index) {
        Some(expected) if expected == center => {}
        Some(expected) => {
            return Err(BlowupError::OutOfOrder {
                stage: prev.index + 1,
                expected: expected.clone(),
                got: center.to_string(),
            })
        }
        None => return Err(BlowupError::NotAMember(center.to_string())),
    }
    let z = prev.element(center)?;
    let codim = prev.ambient_dim()? - z.dim;
    let ambient = blow_up(&prev.ambient, &z.space, codim)?;

    let mut elements = BTreeMap::new();
    for y in prev.elements.values() {
        elements.insert(y.id.clone(), dominant_transform(y, z, prev)?);
    }

    let inside_center = |id: &str| -> Result<bool, BlowupError> { Ok(prev.meet(id, center)? == MeetValue::Element(id.to_string())) };
    let mut meet = MeetTable::new();
    let ids: Vec<&String> = prev.elements.keys().collect();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            let value = match prev.meet(a, b)? {
                MeetValue::Empty => MeetValue::Empty,
                MeetValue::Element(m) => {
                    if inside_center(&m)? && !inside_center(a)? && !inside_center(b)? {
                        MeetValue::Empty
                    } else {
                        MeetValue::Element(m)
                    }
                }
            };
            meet.insert(a, b, value);
        }
    }

    Ok(StageState {
        index: prev.index + 1,
        center: Some(center.to_string()),
        center_codim: Some(codim),
        ambient,
        elements,
        meet,
    })
}

/// Full record of the iterated blowup along a building set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupTrace {
    pub arrangement: Arrangement,
    pub members: BTreeSet<String>,
    /// Blowup order (the inclusion order of the members).
    pub order: Vec<String>,
    pub initial: StageState,
    pub stages: Vec<StageState>,
    pub final_space: SpaceExpr,
    /// Smooth and projective by Li's theorem; recorded, not checked.
    pub smooth_projective: bool,
}

impl BlowupTrace {
    pub fn ambient(&self) -> &SpaceExpr {
        self.arrangement.ambient()
    }

    /// Stage `k`, with `k = 0` the initial state.
    pub fn state(&self, k: usize) -> Option<&StageState> {
        if k == 0 {
            Some(&self.initial)
        } else {
            self.stages.get(k - 1)
        }
    }

    pub fn building_set(&self) -> Result<BuildingSet, BlowupError> {
        Ok(BuildingSet::new(self.arrangement.clone(), self.members.clone())?)
    }

    /// Structural consistency of a (possibly deserialized) trace.
    pub fn check_structure(&self) -> Result<(), BlowupError> {
        let bad = |msg: String| Err(BlowupError::Malformed(msg));
        if self.stages.len() != self.members.len() || self.order.len() != self.members.len() {
            return bad(format!(
                "{} members but {} stages and {} ordered centers",
                self.members.len(),
                self.stages.len(),
                self.order.len()
            ));
        }
        if self.order.iter().cloned().collect::<BTreeSet<_>>() != self.members {
            return bad("blowup order is not a permutation of the members".into());
        }
        if self.initial != StageState::initial(&self.arrangement) {
            return bad("initial stage does not match the arrangement".into());
        }
        let dim0 = self.initial.ambient_dim()?;
        let mut prev = &self.initial;
        for (k, stage) in self.stages.iter().enumerate() {
            let center = &self.order[k];
            if stage.index != k + 1 || stage.center.as_deref() != Some(center.as_str()) {
                return bad(format!("stage {} does not blow up `{center}`", k + 1));
            }
            let z = prev.element(center)?;
            let codim = dim0 - z.dim;
            if stage.center_codim != Some(codim) {
                return bad(format!("stage {} records the wrong center codimension", k + 1));
            }
            if stage.ambient != blow_up(&prev.ambient, &z.space, codim)? {
                return bad(format!("stage {} ambient is not the blowup of the previous one", k + 1));
            }
            if stage.ambient_dim()? != dim0 {
                return bad(format!("stage {} changes the ambient dimension", k + 1));
            }
            if stage.elements.keys().ne(prev.elements.keys()) {
                return bad(format!("stage {} changes the element ids", k + 1));
            }
            for e in stage.elements.values() {
                if e.dim != e.space.dimension()? {
                    return bad(format!("stage {} element `{}` has inconsistent dim", k + 1, e.id));
                }
                if e.case.is_none() {
                    return bad(format!("stage {} element `{}` lacks a transform case", k + 1, e.id));
                }
            }
            prev = stage;
        }
        if self.final_space != prev.ambient {
            return bad("final space is not the last stage ambient".into());
        }
        Ok(())
    }
}

/// Runs the whole construction of the wonderful compactification of
/// `(x, bs)`.
pub fn wonderful(x: &SpaceExpr, bs: &BuildingSet) -> Result<BlowupTrace, BlowupError> {
    let arr = bs.arrangement();
    if arr.ambient() != x {
        return Err(BlowupError::AmbientMismatch);
    }
    let report = is_building_set(arr, bs.members());
    if !report.valid {
        return Err(LatticeError::InvalidBuildingSet(Box::new(report)).into());
    }
    let order = inclusion_order(bs)?;
    let initial = StageState::initial(arr);
    let mut stages: Vec<StageState> = Vec::with_capacity(order.len());
    for center in &order {
        let prev = stages.last().unwrap_or(&initial);
        let next = blowup_step(prev, center, &order)?;
        stages.push(next);
    }
    let final_space = stages.last().unwrap_or(&initial).ambient.clone();
    Ok(BlowupTrace {
        arrangement: arr.clone(),
        members: bs.members().clone(),
        order,
        initial,
        stages,
        final_space,
        smooth_projective: true,
    })
}
