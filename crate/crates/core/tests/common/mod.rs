//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use wonderful::blowup::{wonderful, BlowupTrace};
use wonderful::constructions::{fm_building_set, ulyanov_building_set};
use wonderful::lattice::{Arrangement, BuildingSet, ElementDescriptor};
use wonderful::space::{atom, product, SpaceExpr, Tristate};

pub const TRISTATES: [Tristate; 3] = [Tristate::True, Tristate::False, Tristate::Unknown];

/// Three-valued value of a boolean function by supervaluation: True (False)
/// if every boolean completion of the Unknown inputs gives true (false).
pub fn supervaluate(inputs: &[Tristate], f: impl Fn(&[bool]) -> bool) -> Tristate {
    let unknown: Vec<usize> = (0..inputs.len()).filter(|&i| inputs[i] == Tristate::Unknown).collect();
    let mut seen = BTreeSet::new();
    for mask in 0u32..(1 << unknown.len()) {
        let mut xs: Vec<bool> = inputs.iter().map(|t| *t == Tristate::True).collect();
        for (bit, &i) in unknown.iter().enumerate() {
            xs[i] = mask & (1 << bit) != 0;
        }
        seen.insert(f(&xs));
    }
    match (seen.contains(&true), seen.contains(&false)) {
        (true, false) => Tristate::True,
        (false, true) => Tristate::False,
        _ => Tristate::Unknown,
    }
}

/// All tuples of `k` truth values.
pub fn tristate_tuples(k: usize) -> Vec<Vec<Tristate>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                TRISTATES.iter().map(move |t| {
                    let mut w = v.clone();
                    w.push(*t);
                    w
                })
            })
            .collect();
    }
    out
}

/// Number of set partitions of `{1..n}` with a block of size >= 2, by
/// enumerating restricted growth strings.
pub fn brute_force_polydiagonal_count(n: usize) -> usize {
    fn go(i: usize, n: usize, max: usize, rgs: &mut Vec<usize>, count: &mut usize) {
        if i == n {
            // Some block has two elements iff fewer than n blocks.
            let blocks = rgs.iter().max().map_or(0, |m| m + 1);
            if blocks < n {
                *count += 1;
            }
            return;
        }
        for b in 0..=max.min(n - 1) {
            rgs.push(b);
            go(i + 1, n, if b == max { max + 1 } else { max }, rgs, count);
            rgs.pop();
        }
    }
    let mut count = 0;
    go(0, n, 0, &mut Vec::new(), &mut count);
    count
}

pub fn random_tristate<R: Rng>(rng: &mut R) -> Tristate {
    TRISTATES[rng.gen_range(0..3)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Fm,
    Ulyanov,
}

/// A random FM or Ulyanov instance: `n` in 2..=4, base a single atom or a
/// product of two atoms of total dimension 1..=3, random facts.
pub fn random_instance<R: Rng>(rng: &mut R) -> (String, BlowupTrace) {
    let family = if rng.gen_bool(0.5) { Family::Fm } else { Family::Ulyanov };
    let n = rng.gen_range(2..=4u32);
    let dim = rng.gen_range(1..=3u32);
    let base = if dim >= 2 && rng.gen_bool(0.5) {
        let da = rng.gen_range(1..dim);
        let a = atom("A", da, random_tristate(rng), random_tristate(rng), None).unwrap();
        let b = atom("B", dim - da, random_tristate(rng), random_tristate(rng), None).unwrap();
        product(&a, &b).unwrap()
    } else {
        atom("X", dim, random_tristate(rng), random_tristate(rng), None).unwrap()
    };
    let label = format!("{family:?} n={n} base={base} facts={:?}", base.atom_names());
    (label, trace_for(family, &base, n))
}

pub fn trace_for(family: Family, base: &SpaceExpr, n: u32) -> BlowupTrace {
    let (ambient, bs) = match family {
        Family::Fm => fm_building_set(base, n).unwrap(),
        Family::Ulyanov => ulyanov_building_set(base, n).unwrap(),
    };
    wonderful(&ambient, &bs).unwrap()
}

/// The building set with element `id` replaced by a fresh atom of the same
/// dimension carrying `ordinary = value`.
pub fn poison(bs: &BuildingSet, id: &str, value: Tristate) -> BuildingSet {
    let arr = bs.arrangement();
    let elements: Vec<ElementDescriptor> = arr
        .elements()
        .map(|e| {
            if e.id == id {
                let space = atom("POISON", e.dim, value, Tristate::Unknown, None).unwrap();
                ElementDescriptor::new(e.id.clone(), space, e.origin.clone()).unwrap()
            } else {
                e.clone()
            }
        })
        .collect();
    let poisoned = Arrangement::from_parts(arr.ambient().clone(), elements, arr.meet_table().clone()).unwrap();
    BuildingSet::new(poisoned, bs.members().clone()).unwrap()
}
