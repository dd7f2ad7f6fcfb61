//! Command-line front end.
//!
//! Exit codes: `certify` returns 0/3/4 for True/False/Unknown and
//! `validate` returns 0/3 for valid/invalid. 1 is malformed input, 2 an
//! unsupported parameter range.

use std::collections::{BTreeSet, HashMap};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::betti::{poincare, BettiError, Poincare};
use crate::blowup::{wonderful, BlowupError, BlowupTrace};
use crate::certify::{self, check, explain, Certificate, CertificateDocument, Certifier, ExplainFormat};
use crate::constructions::{
    default_m0_atoms, default_t_atoms, fm_building_set, kapranov_m0n, keel_tower, tdn_tower, ulyanov_building_set,
    ConstructionError, TowerCenter, TowerDescription, TowerStep,
};
use crate::lattice::{is_building_set, Arrangement, BuildingSet, LatticeError};
use crate::space::{atom_with_facts, projective_space, PropertyFacts, SpaceError, SpaceExpr, SpaceNode, Tristate};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Build the blowup trace or tower.
    Build,
    /// Check the building-set condition.
    Validate,
    /// Certify ordinarity of the resulting space.
    Certify,
    /// Poincaré polynomial of the resulting space.
    Betti,
    /// Render a certificate.
    Explain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// Fulton-MacPherson diagonals in X^n.
    Fm,
    /// All polydiagonals in X^n.
    Ulyanov,
    /// Kapranov's points and spans in P^(n-3), giving M̄_{0,n}.
    Kapranov,
    /// Keel's tower for M̄_{0,n+1}.
    Keel,
    /// The tower for T_{d,n}.
    Tdn,
    /// Arrangement, trace, tower or certificate JSON from --input.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    /// Building-set conjunction under the main theorem.
    Theorem,
    /// Stage-by-stage replay of the blowup trace.
    Trace,
}

#[derive(Debug, Parser)]
#[command(name = "wonderful", version, about = "Wonderful compactifications as traced blowups, with ordinarity certificates")]
pub struct RunConfig {
    pub command: Command,
    pub instance: Generator,
    /// Base space for fm/ulyanov: `P<d>` or the name of a generic atom.
    #[arg(long, default_value = "P2")]
    pub base: String,
    /// Dimension of a generic base atom.
    #[arg(long)]
    pub dim: Option<u32>,
    /// Betti numbers of a generic base atom, e.g. `1,0,2,0,1`.
    #[arg(long)]
    pub betti: Option<String>,
    /// Number of points.
    #[arg(long)]
    pub n: Option<u32>,
    /// Dimension d for tdn.
    #[arg(long)]
    pub d: Option<u32>,
    /// Input JSON for the `file` instance.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Override an atom fact: `NAME:ordinary=false`, `NAME:hodge_witt=true`.
    #[arg(long = "assume", value_name = "ATOM:FLAG=VALUE")]
    pub assume: Vec<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Which certificate to produce.
    #[arg(long, value_enum, default_value = "theorem")]
    pub route: Route,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn unsupported(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::Unsupported(m) => CliError::unsupported(format!("unsupported: {m}")),
            other => CliError::input(other.to_string()),
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::input(e.to_string())
            }
        }
    )*};
}

input_error!(SpaceError, LatticeError, BlowupError, BettiError, certify::CertifyError, serde_json::Error, std::io::Error);

/// Instance after parsing and applying assumptions.
enum Instance {
    BuildingSet(BuildingSet),
    Trace(Box<BlowupTrace>),
    Tower(TowerDescription),
    Certificate(Box<Certificate>),
}

#[derive(Serialize, Deserialize)]
struct TraceDocument {
    schema_version: u32,
    trace: BlowupTrace,
}

#[derive(Serialize)]
struct TowerDocument<'a> {
    schema_version: u32,
    tower: &'a TowerDescription,
    final_space: SpaceExpr,
}

#[derive(Deserialize)]
struct TowerInput {
    tower: TowerDescription,
}

#[derive(Deserialize)]
struct ArrangementInput {
    #[serde(flatten)]
    arrangement: Value,
    #[serde(default)]
    members: Option<BTreeSet<String>>,
}

#[derive(Serialize)]
struct ValidateDocument<'a> {
    schema_version: u32,
    report: &'a crate::lattice::ValidationReport,
}

#[derive(Serialize)]
struct BettiDocument {
    schema_version: u32,
    dimension: u32,
    poincare: Poincare,
    text: String,
    palindromic: bool,
}

/// Serializes with keys in sorted order.
fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn parse_json<T: DeserializeOwned>(v: Value) -> Result<T, CliError> {
    Ok(serde_json::from_value(v)?)
}

fn read_json(path: &PathBuf) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    de.disable_recursion_limit();
    let v = Value::deserialize(&mut de)?;
    de.end()?;
    if let Some(version) = v.get("schema_version") {
        if version.as_u64() != Some(SCHEMA_VERSION as u64) {
            return Err(CliError::input(format!("unsupported schema_version {version}")));
        }
    }
    Ok(v)
}

// ---- assumptions -----------------------------------------------------------

struct Assumption {
    atom: String,
    property: certify::Property,
    value: Tristate,
}

fn parse_assumption(s: &str) -> Result<Assumption, CliError> {
    let bad = || CliError::input(format!("malformed assumption `{s}` (expected ATOM:FLAG=VALUE)"));
    let (atom, rest) = s.rsplit_once(':').ok_or_else(bad)?;
    let (flag, value) = rest.split_once('=').ok_or_else(bad)?;
    let property = match flag {
        "ordinary" => certify::Property::Ordinary,
        "hodge_witt" | "hodge-witt" => certify::Property::HodgeWitt,
        other => return Err(CliError::input(format!("unknown flag `{other}` in `{s}`"))),
    };
    let value: Tristate = value.parse().map_err(|e: String| CliError::input(format!("{e} in `{s}`")))?;
    if atom.is_empty() {
        return Err(bad());
    }
    Ok(Assumption {
        atom: atom.to_string(),
        property,
        value,
    })
}

/// Rewrites atoms with overridden facts. One memo is shared across all
/// spaces of an instance so shared sub-expressions stay shared.
struct Rewriter {
    assumptions: Vec<Assumption>,
    memo: HashMap<*const SpaceNode, (SpaceExpr, SpaceExpr)>,
}

impl Rewriter {
    fn apply(&mut self, s: &SpaceExpr) -> Result<SpaceExpr, SpaceError> {
        let assumptions = &self.assumptions;
        let mut f = |a: &SpaceExpr| -> Result<SpaceExpr, SpaceError> {
            let SpaceNode::Atom { name, dim, facts, poincare } = a.node() else {
                return Ok(a.clone());
            };
            let relevant: Vec<&Assumption> = assumptions.iter().filter(|x| &x.atom == name).collect();
            if relevant.is_empty() {
                return Ok(a.clone());
            }
            let (mut ordinary, mut hodge_witt) = facts.asserted();
            for x in relevant {
                match x.property {
                    certify::Property::Ordinary => ordinary = x.value,
                    certify::Property::HodgeWitt => hodge_witt = x.value,
                }
            }
            atom_with_facts(name, *dim, PropertyFacts::new(ordinary, hodge_witt), poincare.clone())
        };
        s.map_atoms_memo(&mut f, &mut self.memo)
    }
}

fn instance_atoms(inst: &Instance) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    match inst {
        Instance::BuildingSet(bs) => {
            names.extend(bs.arrangement().ambient().atom_names());
            for e in bs.arrangement().elements() {
                names.extend(e.space.atom_names());
            }
        }
        Instance::Trace(t) => {
            names.extend(t.ambient().atom_names());
            for e in t.arrangement.elements() {
                names.extend(e.space.atom_names());
            }
        }
        Instance::Tower(t) => {
            names.extend(t.base.atom_names());
            for c in t.steps.iter().flat_map(|s| &s.centers) {
                names.extend(c.space.atom_names());
            }
        }
        Instance::Certificate(_) => {}
    }
    names
}

fn apply_assumptions(inst: Instance, raw: &[String]) -> Result<Instance, CliError> {
    if raw.is_empty() {
        return Ok(inst);
    }
    let assumptions: Vec<Assumption> = raw.iter().map(|s| parse_assumption(s)).collect::<Result<_, _>>()?;
    if matches!(inst, Instance::Certificate(_)) {
        return Err(CliError::input("assumptions cannot be applied to a finished certificate"));
    }
    let names = instance_atoms(&inst);
    for a in &assumptions {
        if !names.contains(&a.atom) {
            let known: Vec<&str> = names.iter().map(String::as_str).collect();
            return Err(CliError::input(format!(
                "assumption refers to unknown atom `{}` (atoms: {})",
                a.atom,
                known.join(", ")
            )));
        }
    }
    let mut rw = Rewriter {
        assumptions,
        memo: HashMap::new(),
    };
    Ok(match inst {
        Instance::BuildingSet(bs) => {
            let arr = bs.arrangement().map_spaces(|s| rw.apply(s))?;
            Instance::BuildingSet(BuildingSet::new(arr, bs.members().clone())?)
        }
        Instance::Trace(t) => {
            let arr = t.arrangement.map_spaces(|s| rw.apply(s))?;
            let bs = BuildingSet::new(arr, t.members.clone())?;
            Instance::Trace(Box::new(wonderful(bs.arrangement().ambient(), &bs)?))
        }
        Instance::Tower(t) => {
            let mut steps = Vec::with_capacity(t.steps.len());
            for step in &t.steps {
                let mut centers = Vec::with_capacity(step.centers.len());
                for c in &step.centers {
                    centers.push(TowerCenter {
                        space: rw.apply(&c.space)?,
                        ..c.clone()
                    });
                }
                steps.push(TowerStep {
                    label: step.label.clone(),
                    centers,
                });
            }
            Instance::Tower(TowerDescription {
                name: t.name.clone(),
                base: rw.apply(&t.base)?,
                steps,
            })
        }
        Instance::Certificate(_) => unreachable!("rejected above"),
    })
}

// ---- instance construction ---------------------------------------------------

fn base_space(cfg: &RunConfig) -> Result<SpaceExpr, CliError> {
    let name = cfg.base.as_str();
    if let Some(d) = name.strip_prefix('P').and_then(|d| d.parse::<u32>().ok()) {
        if cfg.dim.is_some_and(|dim| dim != d) {
            return Err(CliError::input(format!("--dim conflicts with the dimension of {name}")));
        }
        if cfg.betti.is_some() {
            return Err(CliError::input(format!("--betti cannot be given for the preset {name}")));
        }
        return Ok(projective_space(d));
    }
    if name.is_empty() || name == "pt" || name.contains(|c: char| c.is_whitespace() || "()[];:,".contains(c)) {
        return Err(CliError::input(format!("invalid atom name `{name}`")));
    }
    let dim = cfg.dim.unwrap_or(2);
    let poincare = match &cfg.betti {
        None => None,
        Some(list) => {
            let coeffs: Vec<u64> = list
                .split(',')
                .map(|x| x.trim().parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::input(format!("malformed --betti `{list}`: {e}")))?;
            Some(Poincare::from_coeffs(coeffs))
        }
    };
    Ok(atom_with_facts(name, dim, PropertyFacts::new(Tristate::Unknown, Tristate::Unknown), poincare)?)
}

fn require(value: Option<u32>, flag: &str, instance: &str) -> Result<u32, CliError> {
    value.ok_or_else(|| CliError::input(format!("{instance} needs --{flag}")))
}

fn load_instance(cfg: &RunConfig) -> Result<Instance, CliError> {
    Ok(match cfg.instance {
        Generator::Fm => {
            let n = require(cfg.n, "n", "fm")?;
            Instance::BuildingSet(fm_building_set(&base_space(cfg)?, n)?.1)
        }
        Generator::Ulyanov => {
            let n = require(cfg.n, "n", "ulyanov")?;
            Instance::BuildingSet(ulyanov_building_set(&base_space(cfg)?, n)?.1)
        }
        Generator::Kapranov => Instance::BuildingSet(kapranov_m0n(require(cfg.n, "n", "kapranov")?)?.1),
        Generator::Keel => {
            let n = require(cfg.n, "n", "keel")?;
            if n > crate::constructions::MAX_TOWER_N {
                // Surface the range error before building the smaller towers.
                keel_tower(n, &Default::default())?;
            }
            let atoms = default_m0_atoms(n.max(4))?;
            Instance::Tower(keel_tower(n, &atoms)?)
        }
        Generator::Tdn => {
            let d = require(cfg.d, "d", "tdn")?;
            let n = require(cfg.n, "n", "tdn")?;
            if n > crate::constructions::MAX_TOWER_N || d == 0 || n < 2 {
                tdn_tower(d, n, &Default::default())?;
            }
            if d > 16 {
                return Err(CliError::unsupported(format!("unsupported: tdn is limited to d <= 16 (got {d})")));
            }
            let atoms = default_t_atoms(d, n - 1)?;
            Instance::Tower(tdn_tower(d, n, &atoms)?)
        }
        Generator::File => {
            let path = cfg.input.as_ref().ok_or_else(|| CliError::input("file instance needs --input"))?;
            load_file(read_json(path)?)?
        }
    })
}

fn load_file(v: Value) -> Result<Instance, CliError> {
    let Value::Object(map) = &v else {
        return Err(CliError::input("input must be a JSON object"));
    };
    if map.contains_key("certificate") {
        let doc: CertificateDocument = parse_json(v)?;
        return Ok(Instance::Certificate(Box::new(doc.certificate)));
    }
    if map.contains_key("tower") {
        let input: TowerInput = parse_json(v)?;
        input.tower.validate()?;
        return Ok(Instance::Tower(input.tower));
    }
    if map.contains_key("trace") || map.contains_key("stages") {
        let trace: BlowupTrace = match map.get("trace") {
            Some(t) => parse_json(t.clone())?,
            None => parse_json(v)?,
        };
        trace.check_structure()?;
        let bs = trace.building_set()?;
        let replay = wonderful(trace.ambient(), &bs)?;
        if replay != trace {
            return Err(CliError::input("trace does not match a replay of its own arrangement"));
        }
        return Ok(Instance::Trace(Box::new(trace)));
    }
    let input: ArrangementInput = parse_json(v)?;
    let arrangement: Arrangement = parse_json(input.arrangement)?;
    let members = input.members.unwrap_or_else(|| arrangement.ids().map(String::from).collect());
    let report = is_building_set(&arrangement, &members);
    if !report.valid {
        return Err(CliError::input(format!("not a building set: {report}")));
    }
    Ok(Instance::BuildingSet(BuildingSet::new(arrangement, members)?))
}

/// Like [`load_file`] but keeps an invalid building set for `validate`.
fn load_for_validation(cfg: &RunConfig) -> Result<(Arrangement, BTreeSet<String>), CliError> {
    if cfg.instance == Generator::File {
        let path = cfg.input.as_ref().ok_or_else(|| CliError::input("file instance needs --input"))?;
        let v = read_json(path)?;
        if v.get("trace").is_none() && v.get("stages").is_none() && v.get("tower").is_none() && v.get("certificate").is_none() {
            let input: ArrangementInput = parse_json(v)?;
            let arrangement: Arrangement = parse_json(input.arrangement)?;
            let members = input.members.unwrap_or_else(|| arrangement.ids().map(String::from).collect());
            return Ok((arrangement, members));
        }
    }
    match apply_assumptions(load_instance(cfg)?, &cfg.assume)? {
        Instance::BuildingSet(bs) => Ok((bs.arrangement().clone(), bs.members().clone())),
        Instance::Trace(t) => Ok((t.arrangement.clone(), t.members.clone())),
        Instance::Tower(_) | Instance::Certificate(_) => Err(CliError::input("validate needs an arrangement")),
    }
}

fn trace_of(bs: &BuildingSet) -> Result<BlowupTrace, CliError> {
    Ok(wonderful(bs.arrangement().ambient(), bs)?)
}

// ---- commands ------------------------------------------------------------------

/// Output text and exit code.
fn execute(cfg: &RunConfig) -> Result<(String, i32), CliError> {
    let format = cfg.format.unwrap_or(match cfg.command {
        Command::Betti | Command::Explain => Format::Text,
        _ => Format::Json,
    });
    match cfg.command {
        Command::Validate => {
            let (arr, members) = load_for_validation(cfg)?;
            let report = is_building_set(&arr, &members);
            let code = if report.valid { 0 } else { 3 };
            let out = match format {
                Format::Json => to_canonical_json(&ValidateDocument {
                    schema_version: SCHEMA_VERSION,
                    report: &report,
                })?,
                Format::Text => format!("{report}\n"),
            };
            Ok((out, code))
        }
        Command::Build => {
            let inst = apply_assumptions(load_instance(cfg)?, &cfg.assume)?;
            let out = match inst {
                Instance::BuildingSet(bs) => render_trace(&trace_of(&bs)?, format)?,
                Instance::Trace(t) => render_trace(&t, format)?,
                Instance::Tower(t) => render_tower(&t, format)?,
                Instance::Certificate(_) => return Err(CliError::input("build needs an arrangement, trace or tower")),
            };
            Ok((out, 0))
        }
        Command::Betti => {
            let inst = apply_assumptions(load_instance(cfg)?, &cfg.assume)?;
            let space = match inst {
                Instance::BuildingSet(bs) => trace_of(&bs)?.final_space,
                Instance::Trace(t) => t.final_space,
                Instance::Tower(t) => t.final_space()?,
                Instance::Certificate(_) => return Err(CliError::input("betti needs an arrangement, trace or tower")),
            };
            let p = poincare(&space)?;
            let out = match format {
                Format::Text => format!("{p}\n"),
                Format::Json => {
                    let dimension = space.dimension()?;
                    to_canonical_json(&BettiDocument {
                        schema_version: SCHEMA_VERSION,
                        dimension,
                        palindromic: p.is_palindromic_of_degree(2 * dimension as usize),
                        text: p.to_string(),
                        poincare: p,
                    })?
                }
            };
            Ok((out, 0))
        }
        Command::Certify | Command::Explain => {
            let inst = apply_assumptions(load_instance(cfg)?, &cfg.assume)?;
            let cert = match inst {
                Instance::Certificate(c) => {
                    check(&c).map_err(|e| CliError::input(format!("certificate does not check: {e}")))?;
                    c
                }
                Instance::Tower(t) => Box::new((*Certifier::new().ordinary(&t.final_space()?)).clone()),
                Instance::BuildingSet(bs) => Box::new(certify_route(&trace_of(&bs)?, cfg.route)?),
                Instance::Trace(t) => Box::new(certify_route(&t, cfg.route)?),
            };
            let out = match format {
                Format::Json => to_canonical_json(&CertificateDocument::new(&cert))?,
                Format::Text => explain(&cert, ExplainFormat::Text),
            };
            let code = if cfg.command == Command::Explain {
                0
            } else {
                match cert.verdict() {
                    Tristate::True => 0,
                    Tristate::False => 3,
                    Tristate::Unknown => 4,
                }
            };
            Ok((out, code))
        }
    }
}

fn certify_route(trace: &BlowupTrace, route: Route) -> Result<Certificate, CliError> {
    let cert = match route {
        Route::Theorem => certify::certify_wonderful(trace)?,
        Route::Trace => certify::certify_trace(trace)?,
    };
    Ok((*cert).clone())
}

fn render_trace(trace: &BlowupTrace, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => to_canonical_json(&TraceDocument {
            schema_version: SCHEMA_VERSION,
            trace: trace.clone(),
        }),
        Format::Text => {
            let mut out = format!("X_0 = {}\n", trace.ambient());
            for (k, center) in trace.order.iter().enumerate() {
                let stage = &trace.stages[k];
                out.push_str(&format!(
                    "stage {}: blow up {} (codim {})\n",
                    k + 1,
                    center,
                    stage.center_codim.unwrap_or(0)
                ));
            }
            out.push_str(&format!("final = {}\n", trace.final_space));
            Ok(out)
        }
    }
}

fn render_tower(tower: &TowerDescription, format: Format) -> Result<String, CliError> {
    let final_space = tower.final_space()?;
    match format {
        Format::Json => to_canonical_json(&TowerDocument {
            schema_version: SCHEMA_VERSION,
            tower,
            final_space,
        }),
        Format::Text => {
            let mut out = format!("{}: base {}\n", tower.name, tower.base);
            for step in &tower.steps {
                let labels: Vec<&str> = step.centers.iter().map(|c| c.label.as_str()).collect();
                out.push_str(&format!("{}: {} centers: {}\n", step.label, labels.len(), labels.join(" ")));
            }
            Ok(out)
        }
    }
}

/// Parses `args` (including the program name) and runs. Output goes to
/// `out` unless `--output` is given; diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cfg) {
        Ok((text, code)) => {
            let written = match &cfg.output {
                Some(path) => fs::write(path, text.as_bytes()),
                None => out.write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return 1;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
