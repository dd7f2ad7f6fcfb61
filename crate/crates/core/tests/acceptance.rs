//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_polydiagonal_count, poison, random_instance, supervaluate, trace_for, tristate_tuples, Family};
use wonderful::betti::{poincare, BettiCalculator, Poincare};
use wonderful::blowup::{dominant_transform, wonderful, StageElement, StageState, TransformCase};
use wonderful::certify::{certify_space, certify_trace, certify_wonderful, check, evaluate, Rule};
use wonderful::constructions::{
    default_m0_atoms, default_t_atoms, fm_building_set, kapranov_m0n, keel_tower, tdn_tower, ulyanov_building_set,
    Partition,
};
use wonderful::lattice::{close_under_meet, is_building_set, BuildingSet, ElementDescriptor, MeetTable, MeetValue, ViolationKind};
use wonderful::space::{atom, blow_up, product, proj_bundle, projective_space, SpaceExpr, SpaceNode, Tristate};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const RANDOM_INSTANCES: usize = 240;
const EQUIVALENCE_BUDGET: Duration = Duration::from_secs(5);

fn main_theorem_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let start = Instant::now();
    let mut verdicts = [0usize; 3];
    for i in 0..RANDOM_INSTANCES {
        let (label, trace) = random_instance(&mut rng);
        let theorem = certify_wonderful(&trace).map_err(|e| e.to_string())?;
        let proof = certify_trace(&trace).map_err(|e| e.to_string())?;
        ensure!(
            theorem.verdict() == proof.verdict(),
            "instance {i} ({label}): theorem {} vs trace {}",
            theorem.verdict(),
            proof.verdict()
        );
        ensure!(
            theorem.blocking_leaves() == proof.blocking_leaves(),
            "instance {i} ({label}): blocking leaves differ: {:?} vs {:?}",
            theorem.blocking_leaves(),
            proof.blocking_leaves()
        );
        check(&theorem).map_err(|e| format!("instance {i}: {e}"))?;
        check(&proof).map_err(|e| format!("instance {i}: {e}"))?;
        verdicts[match theorem.verdict() {
            Tristate::True => 0,
            Tristate::False => 1,
            Tristate::Unknown => 2,
        }] += 1;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < EQUIVALENCE_BUDGET, "took {elapsed:?}");
    ensure!(verdicts.iter().all(|&c| c > 0), "verdict mix not exercised: {verdicts:?}");
    Ok(format!(
        "{RANDOM_INSTANCES} instances agree (true/false/unknown = {}/{}/{}) in {:.2?}",
        verdicts[0], verdicts[1], verdicts[2], elapsed
    ))
}

fn iff_poisoning() -> Outcome {
    let p1 = projective_space(1);
    let bases = [p1.clone(), projective_space(2), product(&p1, &p1).unwrap(), projective_space(3)];
    let mut flips = 0;
    for base in &bases {
        for n in 2..=4 {
            let (ambient, bs) = fm_building_set(base, n).map_err(|e| e.to_string())?;
            let trace = wonderful(&ambient, &bs).map_err(|e| e.to_string())?;
            ensure!(
                certify_wonderful(&trace).unwrap().verdict() == Tristate::True,
                "FM n={n} over {base} is not certified"
            );
            for id in bs.arrangement().ids() {
                for (value, expected) in [(Tristate::False, Tristate::False), (Tristate::Unknown, Tristate::Unknown)] {
                    let poisoned = poison(&bs, id, value);
                    let t = wonderful(&ambient, &poisoned).map_err(|e| e.to_string())?;
                    let got = certify_wonderful(&t).unwrap().verdict();
                    ensure!(got == expected, "FM n={n} over {base}: {id} := {value} gives {got}");
                    // Below dimension 2 some members are divisors, which the
                    // blowup sequence passes over by identity.
                    if base.dimension().unwrap() >= 2 {
                        let by_trace = certify_trace(&t).unwrap().verdict();
                        ensure!(by_trace == expected, "trace route, FM n={n} over {base}: {id} := {value} gives {by_trace}");
                    }
                    flips += 1;
                }
            }
        }
    }
    Ok(format!("{flips} single-element flips over 4 bases, n = 2..4"))
}

fn rule_truth_tables() -> Outcome {
    let ekedahl = |x: &[bool]| (x[0] && x[1]) || (x[2] && x[3]);
    let mut rows = 0;
    for t in tristate_tuples(4) {
        let want = supervaluate(&t, ekedahl);
        let got = evaluate(Rule::EkedahlProduct, &t);
        ensure!(got == want, "EKEDAHL_PRODUCT {t:?}: {got} vs {want}");
        rows += 1;
    }
    // Blowups and bundles over atoms, re-checked by the independent checker.
    for t in tristate_tuples(2) {
        let want = supervaluate(&t, |x| x[0] && x[1]);
        ensure!(evaluate(Rule::IllusieBlowup, &t) == want, "ILLUSIE_BLOWUP {t:?}");
        let x = atom("X", 3, t[0], Tristate::Unknown, None).unwrap();
        let z = atom("Z", 1, t[1], Tristate::Unknown, None).unwrap();
        let c = certify_space(&blow_up(&x, &z, 2).unwrap());
        ensure!(c.verdict() == want, "ILLUSIE_BLOWUP over atoms {t:?}: {}", c.verdict());
        check(&c).map_err(|e| e.to_string())?;
        rows += 1;
    }
    for t in tristate_tuples(2) {
        let (base_verdict, claimed) = (t[0], t[1]);
        let base = atom("B", 2, base_verdict, Tristate::Unknown, None).unwrap();
        let mut c = (*certify_space(&proj_bundle(&base, 3).unwrap())).clone();
        ensure!(evaluate(Rule::IllusieProjBundle, &[base_verdict]) == base_verdict, "ILLUSIE_PROJ_BUNDLE {t:?}");
        c.claim.verdict = claimed;
        let accepted = check(&c).is_ok();
        ensure!(
            accepted == (claimed == base_verdict),
            "checker on ILLUSIE_PROJ_BUNDLE ({base_verdict} => {claimed}) accepted = {accepted}"
        );
        rows += 1;
    }
    Ok(format!("{rows} rows (81 product, 9 blowup, 9 bundle)"))
}

fn stage_element(id: &str, space: SpaceExpr) -> StageElement {
    StageElement {
        id: id.into(),
        case: None,
        dim: space.dimension().unwrap(),
        space,
        origin_chain: vec![(0, id.into())],
    }
}

fn dominant_transform_cases() -> Outcome {
    // P^5 with a 3-fold Z; Y a plane inside Z, W a 3-fold meeting Z in a
    // line L, V a plane missing Z.
    let mut meet = MeetTable::new();
    meet.insert("Y", "Z", MeetValue::Element("Y".into()));
    meet.insert("W", "Z", MeetValue::Element("L".into()));
    meet.insert("L", "Z", MeetValue::Element("L".into()));
    meet.insert("V", "Z", MeetValue::Empty);
    let elements = [
        stage_element("Z", projective_space(3)),
        stage_element("Y", projective_space(2)),
        stage_element("W", projective_space(3)),
        stage_element("L", projective_space(1)),
        stage_element("V", projective_space(2)),
    ];
    let stage = StageState {
        index: 0,
        center: None,
        center_codim: None,
        ambient: projective_space(5),
        elements: elements.iter().map(|e| (e.id.clone(), e.clone())).collect(),
        meet,
    };
    let (amb, c) = (5u32, 2u32);
    let z = &elements[0];
    // (id, case, dim, space) expected for each transform case.
    let expected: [(&str, TransformCase, u32, SpaceExpr); 4] = [
        ("Z", TransformCase::Equal, amb - 1, proj_bundle(&z.space, c).unwrap()),
        ("Y", TransformCase::Pullback, 2 + c - 1, proj_bundle(&projective_space(2), c).unwrap()),
        ("V", TransformCase::Disjoint, 2, projective_space(2)),
        ("W", TransformCase::Strict, 3, blow_up(&projective_space(3), &projective_space(1), 2).unwrap()),
    ];
    for (id, case, dim, space) in expected {
        let y = stage.element(id).unwrap();
        let t = dominant_transform(y, z, &stage).map_err(|e| e.to_string())?;
        ensure!(t.case == Some(case), "{id}: case {:?}, expected {case}", t.case);
        ensure!(t.dim == dim, "{id}: dim {}, expected {dim}", t.dim);
        ensure!(t.space == space, "{id}: space {}, expected {space}", t.space);
    }
    // The same cases arise in a generated trace: FM n = 3 over P^2, first
    // blowup along the small diagonal.
    let (ambient, bs) = fm_building_set(&projective_space(2), 3).unwrap();
    let trace = wonderful(&ambient, &bs).unwrap();
    let s1 = &trace.stages[0];
    ensure!(s1.center.as_deref() == Some("D{1,2,3}"), "first center {:?}", s1.center);
    ensure!(s1.elements["D{1,2,3}"].case == Some(TransformCase::Equal), "small diagonal not Equal");
    ensure!(s1.elements["D{1,2,3}"].dim == 5, "exceptional divisor dim {}", s1.elements["D{1,2,3}"].dim);
    ensure!(s1.elements["D{1,2}"].case == Some(TransformCase::Strict), "D12 not Strict");
    let s3 = &trace.stages[2];
    ensure!(
        s3.elements["D{1,2}"].case == Some(TransformCase::Disjoint),
        "D12 should miss D13 after separation, got {:?}",
        s3.elements["D{1,2}"].case
    );
    Ok("equal / pullback / disjoint / strict fixtures and FM n=3 trace".into())
}

fn coeffs(p: &Poincare) -> Vec<u64> {
    p.to_u64_vec().unwrap()
}

fn betti_cross_checks() -> Outcome {
    let kap = |n: u32| -> Result<Poincare, String> {
        let (amb, bs) = kapranov_m0n(n).map_err(|e| e.to_string())?;
        poincare(&wonderful(&amb, &bs).map_err(|e| e.to_string())?.final_space).map_err(|e| e.to_string())
    };
    let k5 = kap(5)?;
    ensure!(coeffs(&k5) == [1, 0, 5, 0, 1], "kapranov 5: {k5}");
    ensure!(k5.to_string() == "1 + 5*t^2 + t^4", "rendering {k5}");
    let k6 = kap(6)?;
    ensure!(coeffs(&k6) == [1, 0, 16, 0, 16, 0, 1], "kapranov 6: {k6}");
    let atoms = default_m0_atoms(5).map_err(|e| e.to_string())?;
    let keel4 = poincare(&keel_tower(4, &atoms).unwrap().final_space().unwrap()).unwrap();
    ensure!(keel4 == k5, "keel 4 {keel4} vs kapranov 5 {k5}");
    let keel5 = poincare(&keel_tower(5, &atoms).unwrap().final_space().unwrap()).unwrap();
    ensure!(keel5 == k6, "keel 5 {keel5} vs kapranov 6 {k6}");
    let (amb, bs) = fm_building_set(&projective_space(2), 2).unwrap();
    let x2 = poincare(&wonderful(&amb, &bs).unwrap().final_space).unwrap();
    ensure!(coeffs(&x2) == [1, 0, 3, 0, 4, 0, 3, 0, 1], "X[2] over P2: {x2}");
    for d in 1..=5u32 {
        let t = tdn_tower(d, 2, &Default::default()).unwrap();
        let p = poincare(&t.final_space().unwrap()).unwrap();
        let want: Vec<u64> = (0..2 * d - 1).map(|i| u64::from(i % 2 == 0)).collect();
        ensure!(coeffs(&p) == want, "T_{{{d},2}}: {p}");
    }
    Ok(format!("M̄_(0,5) = {k5}; M̄_(0,6) = {k6}; P2[2] = {x2}; T_(d,2) for d <= 5"))
}

fn closure_sizes() -> Outcome {
    let x = atom("X", 1, Tristate::True, Tristate::True, None).unwrap();
    let mut sizes = Vec::new();
    for n in 2..=5u32 {
        let (_, bs) = fm_building_set(&x, n).map_err(|e| e.to_string())?;
        let got = bs.arrangement().len();
        let want = brute_force_polydiagonal_count(n as usize);
        ensure!(got == want, "n={n}: closure {got}, enumerator {want}");
        sizes.push(got);
    }
    ensure!(sizes == [1, 4, 14, 51], "sizes {sizes:?}");
    Ok(format!("closure sizes {sizes:?} match brute-force enumeration"))
}

fn building_set_validation() -> Outcome {
    let p1 = projective_space(1);
    let mut checked = 0;
    for base in [p1.clone(), projective_space(2)] {
        for n in 2..=5 {
            let (_, fm) = fm_building_set(&base, n).map_err(|e| e.to_string())?;
            let (_, ul) = ulyanov_building_set(&base, n).map_err(|e| e.to_string())?;
            for bs in [fm, ul] {
                let report = is_building_set(bs.arrangement(), bs.members());
                ensure!(report.valid, "n={n} over {base}: {report}");
                checked += 1;
            }
        }
    }
    // {Δ123, Δ124} in X^4: the meet Δ1234 is not transversal.
    let x = atom("X", 2, Tristate::True, Tristate::True, None).unwrap();
    let mut powers = vec![SpaceExpr::point(), x.clone()];
    for k in 2..=4 {
        powers.push(product(&powers[k - 1], &x).unwrap());
    }
    let element = |p: &Partition| ElementDescriptor::new(p.id(), powers[p.len()].clone(), p.label()).unwrap();
    let gens = [Partition::cluster(4, &[1, 2, 3]), Partition::cluster(4, &[1, 2, 4])];
    let oracle = |a: &ElementDescriptor, b: &ElementDescriptor| {
        let j = Partition::parse_id(&a.id, 4)?.join(&Partition::parse_id(&b.id, 4)?);
        Some(element(&j))
    };
    let arr = close_under_meet(powers[4].clone(), gens.iter().map(element), &oracle).map_err(|e| e.to_string())?;
    let members: BTreeSet<String> = gens.iter().map(Partition::id).collect();
    let report = is_building_set(&arr, &members);
    ensure!(!report.valid, "fixture accepted");
    let v = report
        .violations
        .iter()
        .find(|v| v.element == "D{1,2,3,4}")
        .ok_or_else(|| format!("no violation at D{{1,2,3,4}}: {report}"))?;
    ensure!(v.kind == ViolationKind::Transversality, "violation kind {:?}", v.kind);
    ensure!(BuildingSet::new(arr, members).is_err(), "BuildingSet::new accepted the fixture");
    Ok(format!(
        "{checked} FM/Ulyanov sets valid; {{Δ123, Δ124}} rejected at Δ1234 (codim {} vs {})",
        v.codim.unwrap(),
        v.codim_sum.unwrap()
    ))
}

fn palindromicity() -> Outcome {
    let mut spaces: Vec<(String, SpaceExpr)> = Vec::new();
    let p1 = projective_space(1);
    for base in [p1.clone(), projective_space(2), projective_space(3), product(&p1, &p1).unwrap()] {
        for n in 2..=5 {
            for family in [Family::Fm, Family::Ulyanov] {
                if n == 5 && base.dimension().unwrap() > 2 {
                    continue;
                }
                let t = trace_for(family, &base, n);
                for (k, stage) in std::iter::once(&t.initial).chain(&t.stages).enumerate() {
                    spaces.push((format!("{family:?} n={n} over {base}: X_{k}"), stage.ambient.clone()));
                    for e in stage.elements.values() {
                        spaces.push((format!("{family:?} n={n} over {base}: {}^({k})", e.id), e.space.clone()));
                    }
                }
            }
        }
    }
    for n in [5, 6] {
        let (amb, bs) = kapranov_m0n(n).unwrap();
        spaces.push((format!("kapranov {n}"), wonderful(&amb, &bs).unwrap().final_space));
    }
    let m0 = default_m0_atoms(6).unwrap();
    for n in 4..=6 {
        let tower = keel_tower(n, &m0).unwrap();
        spaces.push((format!("keel {n}"), tower.final_space().unwrap()));
        for c in tower.steps.iter().flat_map(|s| &s.centers) {
            spaces.push((format!("keel {n} center {}", c.label), c.space.clone()));
        }
    }
    for d in 1..=4 {
        let atoms = default_t_atoms(d, 6).unwrap();
        for (n, s) in atoms {
            spaces.push((format!("T_({d},{n})"), s));
        }
    }
    let mut calc = BettiCalculator::new();
    let mut distinct = 0;
    let mut seen = BTreeSet::new();
    for (label, s) in &spaces {
        let p = calc.poincare(s).map_err(|e| e.to_string())?;
        let dim = s.dimension().unwrap() as usize;
        ensure!(p.is_palindromic_of_degree(2 * dim), "{label}: {p} (dim {dim})");
        ensure!(p.coeff(0) == BigUint::from(1u32), "{label}: constant term");
        if seen.insert(p.to_string()) {
            distinct += 1;
        }
    }
    let divisorial = spaces.iter().filter(|(_, s)| matches!(s.node(), SpaceNode::Blowup { codim: 1, .. })).count();
    Ok(format!(
        "{} spaces ({distinct} distinct polynomials, {divisorial} divisorial blowups) palindromic",
        spaces.len()
    ))
}

fn cli_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_wonderful");
    let examples: [(&[&str], i32, Option<&str>); 3] = [
        (&["certify", "fm", "--base", "P2", "--n", "2"], 0, None),
        (&["certify", "fm", "--base", "X", "--n", "2", "--assume", "X:ordinary=false"], 3, None),
        (&["betti", "kapranov", "--n", "5"], 0, Some("1 + 5*t^2 + t^4\n")),
    ];
    for (args, code, text) in examples {
        let runs: Vec<_> = (0..2)
            .map(|_| Command::new(exe).args(args).output().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        for r in &runs {
            ensure!(r.status.code() == Some(code), "{args:?}: exit {:?}", r.status.code());
        }
        ensure!(runs[0].stdout == runs[1].stdout, "{args:?}: outputs differ");
        ensure!(!runs[0].stdout.is_empty(), "{args:?}: empty output");
        if let Some(t) = text {
            ensure!(runs[0].stdout == t.as_bytes(), "{args:?}: {}", String::from_utf8_lossy(&runs[0].stdout));
        } else {
            let v: serde_json::Value = serde_json::from_slice(&runs[0].stdout).map_err(|e| e.to_string())?;
            ensure!(v["schema_version"] == 1, "{args:?}: schema_version");
        }
        let mut inproc = Vec::new();
        let c = wonderful::cli::run(std::iter::once("wonderful").chain(args.iter().copied()), &mut inproc, &mut Vec::new());
        ensure!(c == code && inproc == runs[0].stdout, "{args:?}: in-process run differs");
    }
    Ok("3 CLI examples byte-identical across runs and in-process".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("main-theorem equivalence", main_theorem_equivalence),
        ("iff poisoning", iff_poisoning),
        ("rule truth tables", rule_truth_tables),
        ("dominant-transform cases", dominant_transform_cases),
        ("Betti cross-checks", betti_cross_checks),
        ("combinatorial closure", closure_sizes),
        ("building-set validation", building_set_validation),
        ("palindromicity", palindromicity),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
