//! Independent re-checker for certificates.
//!
//! Works only from the serialized shape of a certificate. Each rule is
//! re-evaluated as a monotone boolean formula: the verdict must be True
//! exactly when the formula holds with every Unknown premise read as false,
//! and False exactly when it fails with every Unknown read as true. This
//! shares no code with the Kleene evaluator that produced the tree.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{Certificate, Property, Rule};
use crate::blowup::TransformCase;
use crate::space::Tristate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at {path}: {message}")]
pub struct CheckError {
    pub path: String,
    pub message: String,
}

fn formula(rule: Rule, xs: &[bool]) -> bool {
    match rule {
        Rule::EkedahlProduct => (xs[0] && xs[1]) || (xs[2] && xs[3]),
        _ => xs.iter().all(|&b| b),
    }
}

fn bracket(rule: Rule, premises: &[Tristate]) -> Tristate {
    let low: Vec<bool> = premises.iter().map(|t| *t == Tristate::True).collect();
    let high: Vec<bool> = premises.iter().map(|t| *t != Tristate::False).collect();
    if formula(rule, &low) {
        Tristate::True
    } else if !formula(rule, &high) {
        Tristate::False
    } else {
        Tristate::Unknown
    }
}

/// Checks every node of `cert`.
pub fn check(cert: &Certificate) -> Result<(), CheckError> {
    let mut seen = BTreeSet::new();
    check_node(cert, "root".to_string(), &mut seen)
}

fn check_node(c: &Certificate, path: String, seen: &mut BTreeSet<*const Certificate>) -> Result<(), CheckError> {
    if !seen.insert(c as *const Certificate) {
        return Ok(());
    }
    let fail = |message: String| {
        Err(CheckError {
            path: path.clone(),
            message,
        })
    };
    let verdicts: Vec<Tristate> = c.premises.iter().map(|p| p.claim.verdict).collect();
    let props: Vec<Property> = c.premises.iter().map(|p| p.claim.property).collect();
    let ord = Property::Ordinary;
    let hw = Property::HodgeWitt;

    if c.rule != Rule::AtomFact && c.atom.is_some() {
        return fail(format!("{} node carries an atom fact", c.rule));
    }
    if c.case.is_some() && c.rule != Rule::DominantTransform {
        return fail(format!("{} node carries a transform case", c.rule));
    }
    if c.divisorial && !matches!(c.rule, Rule::IllusieBlowup | Rule::DominantTransform) {
        return fail(format!("{} node marked divisorial", c.rule));
    }
    if c.rule != Rule::OrdImpliesHw && c.rule != Rule::AtomFact && c.claim.property != ord {
        return fail(format!("{} only concludes ordinarity", c.rule));
    }

    let expected = match c.rule {
        Rule::AtomFact => {
            if !c.premises.is_empty() {
                return fail("ATOM_FACT leaf with premises".into());
            }
            let Some(atom) = &c.atom else {
                return fail("ATOM_FACT leaf without an atom".into());
            };
            if atom.name != c.claim.subject {
                return fail(format!("atom `{}` does not match subject `{}`", atom.name, c.claim.subject));
            }
            let f = atom.facts;
            if f.ordinary == Tristate::True && f.hodge_witt != Tristate::True {
                return fail("atom facts are not normalized".into());
            }
            if f.hodge_witt == Tristate::False && f.ordinary != Tristate::False {
                return fail("atom facts are not normalized".into());
            }
            match c.claim.property {
                Property::Ordinary => f.ordinary,
                Property::HodgeWitt => {
                    if f.hodge_witt_derived {
                        return fail("derived Hodge-Witt fact used as a leaf".into());
                    }
                    f.hodge_witt
                }
            }
        }
        Rule::EmptyOrdinary | Rule::PointOrdinary => {
            if !c.premises.is_empty() {
                return fail(format!("{} leaf with premises", c.rule));
            }
            Tristate::True
        }
        Rule::EkedahlProduct => {
            if props != [ord, hw, ord, hw] {
                return fail("EKEDAHL_PRODUCT expects premises [ord, hw, ord, hw]".into());
            }
            bracket(c.rule, &verdicts)
        }
        Rule::IllusieProjBundle => {
            if props != [ord] {
                return fail("ILLUSIE_PROJ_BUNDLE expects one ordinarity premise".into());
            }
            bracket(c.rule, &verdicts)
        }
        Rule::IllusieBlowup => {
            let want = if c.divisorial { 1 } else { 2 };
            if props.len() != want || props.iter().any(|p| *p != ord) {
                return fail(format!("ILLUSIE_BLOWUP expects {want} ordinarity premises"));
            }
            bracket(c.rule, &verdicts)
        }
        Rule::DominantTransform => {
            let Some(case) = c.case else {
                return fail("DOMINANT_TRANSFORM without a case".into());
            };
            let want = match case {
                TransformCase::Equal | TransformCase::Pullback => 1,
                TransformCase::Disjoint => 2,
                TransformCase::Strict if c.divisorial => 1,
                TransformCase::Strict => 2,
            };
            if props.len() != want || props.iter().any(|p| *p != ord) {
                return fail(format!("DOMINANT_TRANSFORM ({case}) expects {want} ordinarity premises"));
            }
            if case == TransformCase::Disjoint && c.premises[1].rule != Rule::EmptyOrdinary {
                return fail("disjoint case must cite the empty intersection".into());
            }
            if c.divisorial && case != TransformCase::Strict {
                return fail("only strict transforms can be divisorial".into());
            }
            bracket(c.rule, &verdicts)
        }
        Rule::OrdImpliesHw => {
            if c.claim.property != hw || props != [ord] {
                return fail("ORD_IMPLIES_HW concludes hodge_witt from one ordinarity premise".into());
            }
            if c.premises[0].claim.subject != c.claim.subject {
                return fail("ORD_IMPLIES_HW premise is about a different subject".into());
            }
            if verdicts[0] == Tristate::True {
                Tristate::True
            } else {
                Tristate::Unknown
            }
        }
        Rule::OrdinaryBuildingSet => {
            if props.is_empty() || props.iter().any(|p| *p != ord) {
                return fail("ORDINARY_BUILDING_SET expects ordinarity premises".into());
            }
            bracket(c.rule, &verdicts)
        }
        Rule::MainTheorem => {
            if c.premises.len() != 1 || c.premises[0].rule != Rule::OrdinaryBuildingSet {
                return fail("MAIN_THEOREM expects a single building-set premise".into());
            }
            bracket(c.rule, &verdicts)
        }
    };
    if expected != c.claim.verdict {
        return fail(format!(
            "{} claims {} but premises give {}",
            c.rule, c.claim.verdict, expected
        ));
    }
    for (i, p) in c.premises.iter().enumerate() {
        check_node(p, format!("{path}/{i}"), seen)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::certify_space;
    use crate::space::{atom, product};
    use std::sync::Arc;

    #[test]
    fn tampered_verdict_is_caught() {
        let a = atom("A", 1, Tristate::True, Tristate::Unknown, None).unwrap();
        let b = atom("B", 1, Tristate::Unknown, Tristate::Unknown, None).unwrap();
        let c = certify_space(&product(&a, &b).unwrap());
        assert_eq!(c.claim.verdict, Tristate::Unknown);
        check(&c).unwrap();
        let mut bad = (*c).clone();
        bad.claim.verdict = Tristate::True;
        assert!(check(&bad).is_err());
    }

    #[test]
    fn tampered_atom_fact_is_caught() {
        let a = atom("A", 1, Tristate::False, Tristate::Unknown, None).unwrap();
        let c = certify_space(&a);
        let mut bad = (*c).clone();
        bad.claim.verdict = Tristate::True;
        let err = check(&bad).unwrap_err();
        assert_eq!(err.path, "root");
    }

    #[test]
    fn wrong_premise_shape_is_caught() {
        let a = atom("A", 1, Tristate::True, Tristate::Unknown, None).unwrap();
        let c = certify_space(&product(&a, &a).unwrap());
        let mut bad = (*c).clone();
        bad.premises.swap(0, 1);
        assert!(check(&bad).is_err());
        let mut bad = (*c).clone();
        bad.premises.push(Arc::new((*c).clone()));
        assert!(check(&bad).is_err());
    }
}
