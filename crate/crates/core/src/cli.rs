//! Command-line front end: JSON documents in, JSON reports and DOT out.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for
//! unreadable input, schema violations and the size guard.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::action::{check_action, check_group, FiniteGroup, SystemAction};
use crate::bratteli::BratteliDiagram;
use crate::correspondence::{BasedCorrespondence, BasisVector, VertexSet};
use crate::crossed::{
    check_inner_identity, check_lambda_isomorphism, crossed_core_bratteli, crossed_faithfulness,
    crossed_system_with, SUITE_SAMPLES,
};
use crate::dr::{dr_system, hom_basis, hom_dim_char, DRSpec, Representation};
use crate::error::{Error, Result};
use crate::fdalg::{permutation_matrix, Mat, Tol, C64};
use crate::kgraph::{self, Edge, KGraphSkeleton, Square};
use crate::prodsys::{diagonal_chain, IndexVector, ProductSystem, DEFAULT_CAP};
use crate::report::{CheckRecord, CheckValue, Report};

/// Largest fiber (crossed fiber for `crossed`) the CLI will materialize.
pub const MAX_FIBER_DIM: usize = 4096;
pub const DEFAULT_CROSSED_CAP: usize = 3;
pub const DEFAULT_LEVELS: usize = 3;
pub const DEFAULT_NMAX: usize = 2;
pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "prodsys", version, about = "Product systems over N^k, group actions and crossed products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the axiom suite matching the document kind.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Build the crossed product system and check it.
    Crossed {
        system: PathBuf,
        action: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Core Bratteli diagram along the diagonal chain, optionally crossed.
    Bratteli {
        system: PathBuf,
        action: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_LEVELS)]
        levels: usize,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Intertwiner dimension grid of a Doplicher-Roberts spec.
    Intertwiners {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NMAX)]
        nmax: usize,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Execute a job document.
    Run {
        job: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonOpts {
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Write DOT output to this file.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Write the JSON report to this file instead of standard output.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Everything a command emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    pub job: String,
    pub command: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

impl JobReport {
    fn new(job: String, command: &str, report: Report, data: Option<Value>) -> Self {
        Self {
            job,
            command: command.into(),
            passed: report.passed(),
            checks: report.checks,
            data,
        }
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(!self.passed)
    }
}

/// Exit code for a failed pipeline.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Schema(_)
        | Error::Sizing(_)
        | Error::Dimension(_)
        | Error::Parent(_)
        | Error::Domain(_)
        | Error::Cap { .. }
        | Error::Chain(_) => 2,
        _ => 1,
    }
}

type Cx = [f64; 2];
type JMat = Vec<Vec<Cx>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupDoc {
    #[allow(dead_code)]
    kind: String,
    order: usize,
    table: Vec<Vec<usize>>,
    #[serde(default)]
    names: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: String,
    range: String,
    source: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KGraphDoc {
    #[allow(dead_code)]
    kind: String,
    vertices: Vec<String>,
    edges: Vec<Vec<EdgeDoc>>,
    #[serde(default)]
    factorizations: Vec<[String; 4]>,
    #[serde(default)]
    cap: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlipDoc {
    colors: [usize; 2],
    matrix: JMat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductSystemDoc {
    #[allow(dead_code)]
    kind: String,
    vertices: Vec<String>,
    generators: Vec<Vec<EdgeDoc>>,
    #[serde(default)]
    flips: Vec<FlipDoc>,
    #[serde(default)]
    cap: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DrDoc {
    #[allow(dead_code)]
    kind: String,
    group: Value,
    /// `representations[i][g]` is `ρ_i(g)`.
    representations: Vec<Vec<JMat>>,
    #[serde(default)]
    cap: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    #[allow(dead_code)]
    kind: String,
    group: Value,
    #[serde(default)]
    system: Option<Value>,
    /// `vertex_perms[g][v]` names the image of vertex `v`.
    vertex_perms: Vec<Vec<String>>,
    /// `unitaries[i][g]` acts on generator `i`.
    #[serde(default)]
    unitaries: Option<Vec<Vec<JMat>>>,
    /// `edge_perms[g][c][e]` is the id of the image of edge `e` of color `c`.
    #[serde(default)]
    edge_perms: Option<Vec<Vec<Vec<String>>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobOptions {
    cap: Option<usize>,
    levels: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
    nmax: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobDoc {
    #[allow(dead_code)]
    kind: String,
    #[serde(default)]
    id: Option<String>,
    command: String,
    #[serde(default)]
    input: Option<Value>,
    #[serde(default)]
    system: Option<Value>,
    #[serde(default)]
    action: Option<Value>,
    #[serde(default)]
    options: JobOptions,
}

/// A parsed document together with the directory its references resolve against.
#[derive(Debug, Clone)]
pub struct Doc {
    pub value: Value,
    pub dir: PathBuf,
}

impl Doc {
    pub fn load(path: &Path) -> Result<Doc> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        Ok(Doc {
            value,
            dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    /// Inline objects resolve in place; strings are paths relative to this document.
    fn resolve(&self, v: &Value) -> Result<Doc> {
        match v {
            Value::String(p) => Doc::load(&self.dir.join(p)),
            Value::Object(_) => Ok(Doc {
                value: v.clone(),
                dir: self.dir.clone(),
            }),
            _ => Err(Error::Schema("a reference must be a path or an inline object".into())),
        }
    }

    pub fn kind(&self) -> Result<&str> {
        self.value
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Schema("missing string field \"kind\"".into()))
    }

    fn parse<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.value.clone()).map_err(|e| Error::Schema(format!("{} document: {e}", self.kind().unwrap_or("?"))))
    }
}

fn complex(c: &Cx) -> C64 {
    C64::new(c[0], c[1])
}

fn matrix(m: &JMat) -> Result<Mat> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::Schema("ragged matrix".into()));
    }
    Ok(Mat::from_fn(rows, cols, |i, j| complex(&m[i][j])))
}

/// Serializes a matrix as rows of `[re, im]` pairs.
pub fn matrix_json(m: &Mat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

fn vertex_set(names: &[String]) -> Result<VertexSet> {
    VertexSet::new(names.iter().cloned()).map_err(|e| Error::Schema(e.to_string()))
}

fn vertex(vs: &VertexSet, name: &str) -> Result<usize> {
    vs.index(name).ok_or_else(|| Error::Schema(format!("unknown vertex \"{name}\"")))
}

pub fn parse_group(doc: &Doc) -> Result<FiniteGroup> {
    if doc.kind()? != "group" {
        return Err(Error::Schema(format!("expected a group document, got \"{}\"", doc.kind()?)));
    }
    let g: GroupDoc = doc.parse()?;
    if g.table.len() != g.order {
        return Err(Error::Schema(format!("order {} but {} table rows", g.order, g.table.len())));
    }
    let group = FiniteGroup::from_table(g.table).map_err(|e| Error::Schema(e.to_string()))?;
    match g.names {
        Some(names) => group.with_names(names).map_err(|e| Error::Schema(e.to_string())),
        None => Ok(group),
    }
}

/// Builds the group from the raw table without validating it, for `validate`.
fn raw_group_report(doc: &Doc) -> Result<Report> {
    let g: GroupDoc = doc.parse()?;
    if g.table.len() != g.order || g.table.iter().any(|r| r.len() != g.order) {
        return Err(Error::Schema(format!("table must be {0}x{0}", g.order)));
    }
    if g.table.iter().flatten().any(|&x| x >= g.order) {
        return Err(Error::Schema("table entries must be element indices".into()));
    }
    match FiniteGroup::from_table(g.table.clone()) {
        Ok(group) => Ok(check_group(&group)),
        Err(e) => {
            let mut r = Report::new();
            r.flag("group", "group axioms", false);
            r.annotate(e.to_string());
            Ok(r)
        }
    }
}

fn edges(vs: &VertexSet, list: &[EdgeDoc]) -> Result<Vec<Edge>> {
    list.iter()
        .map(|e| {
            Ok(Edge {
                id: e.id.clone(),
                range: vertex(vs, &e.range)?,
                source: vertex(vs, &e.source)?,
            })
        })
        .collect()
}

pub fn parse_kgraph(doc: &Doc) -> Result<(KGraphSkeleton, Option<usize>)> {
    let d: KGraphDoc = doc.parse()?;
    let vs = vertex_set(&d.vertices)?;
    let colored: Vec<Vec<Edge>> = d.edges.iter().map(|l| edges(&vs, l)).collect::<Result<_>>()?;
    let mut ids: HashMap<&str, (usize, usize)> = HashMap::new();
    for (c, list) in colored.iter().enumerate() {
        for (i, e) in list.iter().enumerate() {
            if ids.insert(e.id.as_str(), (c, i)).is_some() {
                return Err(Error::Schema(format!("duplicate edge id \"{}\"", e.id)));
            }
        }
    }
    let lookup = |id: &str| ids.get(id).copied().ok_or_else(|| Error::Schema(format!("unknown edge \"{id}\"")));
    let mut squares: BTreeMap<(usize, usize), Vec<Square>> = BTreeMap::new();
    for [e, f, f2, e2] in &d.factorizations {
        let (ci, ie) = lookup(e)?;
        let (cj, jf) = lookup(f)?;
        let (cj2, jf2) = lookup(f2)?;
        let (ci2, ie2) = lookup(e2)?;
        if ci != ci2 || cj != cj2 || ci >= cj {
            return Err(Error::Schema(format!(
                "factorization [{e}, {f}, {f2}, {e2}] must read [e, f, f', e'] with color(e) < color(f)"
            )));
        }
        squares.entry((ci, cj)).or_default().push(Square {
            e: ie,
            f: jf,
            f2: jf2,
            e2: ie2,
        });
    }
    let skel = KGraphSkeleton::new(vs, colored, squares).map_err(|e| Error::Schema(e.to_string()))?;
    Ok((skel, d.cap))
}

fn parse_product_system_doc(doc: &Doc, cap: usize) -> Result<ProductSystem> {
    let d: ProductSystemDoc = doc.parse()?;
    let vs = vertex_set(&d.vertices)?;
    let generators = d
        .generators
        .iter()
        .map(|l| {
            let basis = edges(&vs, l)?
                .into_iter()
                .map(|e| BasisVector {
                    id: e.id,
                    range: e.range,
                    source: e.source,
                })
                .collect();
            BasedCorrespondence::new(vs.clone(), basis)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut flips = BTreeMap::new();
    for f in &d.flips {
        if flips.insert((f.colors[0], f.colors[1]), matrix(&f.matrix)?).is_some() {
            return Err(Error::Schema(format!("flip {:?} given twice", f.colors)));
        }
    }
    ProductSystem::new(vs, generators, flips, cap)
}

pub fn parse_dr(doc: &Doc) -> Result<(DRSpec, Option<usize>)> {
    let d: DrDoc = doc.parse()?;
    let group = parse_group(&doc.resolve(&d.group)?)?;
    let reps = d
        .representations
        .iter()
        .map(|mats| Representation::new(group.clone(), mats.iter().map(matrix).collect::<Result<_>>()?))
        .collect::<Result<Vec<_>>>()?;
    Ok((DRSpec::new(reps)?, d.cap))
}

/// A system document: a product system, a k-graph or a DR spec.
#[derive(Debug)]
pub struct LoadedSystem {
    pub ps: ProductSystem,
    pub kgraph: Option<KGraphSkeleton>,
    pub dr: Option<DRSpec>,
}

pub fn load_system(doc: &Doc, cap: Option<usize>) -> Result<LoadedSystem> {
    match doc.kind()? {
        "product_system" => {
            let d: ProductSystemDoc = doc.parse()?;
            let cap = cap.or(d.cap).unwrap_or(DEFAULT_CAP);
            Ok(LoadedSystem {
                ps: parse_product_system_doc(doc, cap)?,
                kgraph: None,
                dr: None,
            })
        }
        "kgraph" => {
            let (skel, doc_cap) = parse_kgraph(doc)?;
            let ps = kgraph::to_product_system(&skel, cap.or(doc_cap).unwrap_or(DEFAULT_CAP))?;
            Ok(LoadedSystem {
                ps,
                kgraph: Some(skel),
                dr: None,
            })
        }
        "dr" => {
            let (spec, doc_cap) = parse_dr(doc)?;
            let (ps, _) = dr_system(&spec, cap.or(doc_cap).unwrap_or(DEFAULT_CAP), Tol::default())?;
            Ok(LoadedSystem {
                ps,
                kgraph: None,
                dr: Some(spec),
            })
        }
        other => Err(Error::Schema(format!("\"{other}\" is not a system document"))),
    }
}

/// An action document, or the action carried by a DR spec.
pub fn load_action(doc: &Doc, sys: &LoadedSystem) -> Result<SystemAction> {
    match doc.kind()? {
        "dr" => {
            let (spec, _) = parse_dr(doc)?;
            let (ps, act) = dr_system(&spec, sys.ps.cap(), Tol::default())?;
            if ps.generators() != sys.ps.generators() {
                return Err(Error::Parent("the representations do not match the system".into()));
            }
            Ok(act)
        }
        "action" => {
            let d: ActionDoc = doc.parse()?;
            let group = parse_group(&doc.resolve(&d.group)?)?;
            let n = group.order();
            let vs = sys.ps.vertices().clone();
            if d.vertex_perms.len() != n {
                return Err(Error::Schema(format!("{} vertex maps for a group of order {n}", d.vertex_perms.len())));
            }
            let alpha = d
                .vertex_perms
                .iter()
                .map(|row| row.iter().map(|name| vertex(&vs, name)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            match (&d.unitaries, &d.edge_perms) {
                (Some(u), None) => {
                    let w = u
                        .iter()
                        .map(|per_g| per_g.iter().map(matrix).collect::<Result<Vec<_>>>())
                        .collect::<Result<Vec<_>>>()?;
                    SystemAction::new(&sys.ps, group, alpha, w)
                }
                (None, Some(ep)) => {
                    let gens = sys.ps.generators();
                    if ep.len() != n || ep.iter().any(|per_c| per_c.len() != gens.len()) {
                        return Err(Error::Schema("edge_perms must list every color for every element".into()));
                    }
                    let perms = ep
                        .iter()
                        .map(|per_c| {
                            per_c
                                .iter()
                                .enumerate()
                                .map(|(c, images)| {
                                    images
                                        .iter()
                                        .map(|id| {
                                            gens[c]
                                                .basis()
                                                .iter()
                                                .position(|b| &b.id == id)
                                                .ok_or_else(|| Error::Schema(format!("unknown edge \"{id}\" of color {c}")))
                                        })
                                        .collect::<Result<Vec<_>>>()
                                })
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    match &sys.kgraph {
                        Some(skel) => kgraph::graph_action(skel, &sys.ps, group, alpha, perms),
                        None => {
                            let w = (0..gens.len())
                                .map(|c| (0..n).map(|g| permutation_matrix(&perms[g][c])).collect())
                                .collect();
                            SystemAction::new(&sys.ps, group, alpha, w)
                        }
                    }
                }
                _ => Err(Error::Schema("an action needs exactly one of \"unitaries\" and \"edge_perms\"".into())),
            }
        }
        other => Err(Error::Schema(format!("\"{other}\" is not an action document"))),
    }
}

fn guard(dim: usize, what: &str) -> Result<()> {
    if dim > MAX_FIBER_DIM {
        return Err(Error::Sizing(format!(
            "{what} dimension {dim} exceeds the limit {MAX_FIBER_DIM}; lower --cap"
        )));
    }
    Ok(())
}

fn job_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn cmd_validate(doc: &Doc, opts: &CommonOpts, job: String) -> Result<JobReport> {
    let tol = Tol::default();
    let report = match doc.kind()? {
        "group" => raw_group_report(doc)?,
        "kgraph" => {
            let (skel, _) = parse_kgraph(doc)?;
            if let Some(path) = &opts.dot {
                write_file(path, &skel.to_dot(&job))?;
            }
            kgraph::validate(&skel)
        }
        "product_system" => {
            let sys = load_system(doc, opts.cap)?;
            guard(sys.ps.max_fiber_dim(), "fiber")?;
            sys.ps.check_axioms(tol)
        }
        "dr" => {
            let (spec, cap) = parse_dr(doc)?;
            let mut r = spec.check(tol);
            if r.passed() {
                let (ps, act) = dr_system(&spec, opts.cap.or(cap).unwrap_or(DEFAULT_CROSSED_CAP), tol)?;
                guard(ps.max_fiber_dim(), "fiber")?;
                r.extend_prefixed("action.", check_action(&ps, &act, tol));
            }
            r
        }
        "action" => {
            let d: ActionDoc = doc.parse()?;
            let sys_ref = d
                .system
                .as_ref()
                .ok_or_else(|| Error::Schema("validating an action needs a \"system\" reference".into()))?;
            let sys = load_system(&doc.resolve(sys_ref)?, opts.cap)?;
            guard(sys.ps.max_fiber_dim(), "fiber")?;
            match load_action(doc, &sys) {
                Ok(act) => check_action(&sys.ps, &act, tol),
                Err(Error::Rejected(msg)) => {
                    let mut r = Report::new();
                    r.flag("automorphism", "action by graph automorphisms", false);
                    r.annotate(msg);
                    r
                }
                Err(e) => return Err(e),
            }
        }
        "job" => return Err(Error::Schema("use the run command for job documents".into())),
        other => return Err(Error::Schema(format!("unknown kind \"{other}\""))),
    };
    Ok(JobReport::new(job, "validate", report, None))
}

pub fn cmd_crossed(sys_doc: &Doc, act_doc: &Doc, opts: &CommonOpts, job: String) -> Result<JobReport> {
    let tol = Tol::default();
    let cap = opts.cap.unwrap_or(DEFAULT_CROSSED_CAP);
    let sys = load_system(sys_doc, Some(cap))?;
    let act = load_action(act_doc, &sys)?;
    guard(sys.ps.max_fiber_dim() * act.group().order(), "crossed fiber")?;
    let cs = crossed_system_with(&sys.ps, &act, tol, opts.samples.min(SUITE_SAMPLES), opts.seed)?;
    let mut r = Report::new();
    r.extend_prefixed("crossed.", cs.report().clone());
    let k = sys.ps.k();
    let degrees = IndexVector::all_up_to(k, cap);
    let mut seed = opts.seed;
    for p in &degrees {
        for q in &degrees {
            if p.degree() + q.degree() <= cap {
                r.extend(check_inner_identity(&cs, p, q, opts.samples, seed)?);
                seed = seed.wrapping_add(1);
            }
        }
    }
    let base_faithful = sys.ps.is_row_finite_and_faithful();
    for p in &degrees {
        let (_, kernel) = crossed_faithfulness(&cs, p)?;
        let name = format!("faithfulness{p}.kernel_dim");
        let anchor = "faithfulness of the crossed left action";
        if base_faithful {
            r.integer(name, anchor, kernel as i64, kernel == 0);
        } else {
            r.info(name, anchor, CheckValue::Integer(kernel as i64), "base system is not faithful");
        }
    }
    let lambda_samples = opts.samples.min(SUITE_SAMPLES);
    for p in &degrees {
        r.extend(check_lambda_isomorphism(&cs, p, lambda_samples, opts.seed)?);
    }
    Ok(JobReport::new(job, "crossed", r, None))
}

fn diagram_json(d: &BratteliDiagram) -> Value {
    serde_json::to_value(d).expect("diagram serializes")
}

pub fn cmd_bratteli(
    sys_doc: &Doc,
    act_doc: Option<&Doc>,
    levels: usize,
    opts: &CommonOpts,
    job: String,
) -> Result<JobReport> {
    let tol = Tol::default();
    if levels == 0 {
        return Err(Error::Chain("at least one level is needed".into()));
    }
    let probe = load_system(sys_doc, Some(1))?;
    let k = probe.ps.k();
    let cap = opts.cap.unwrap_or(levels * k).max(levels * k);
    let sys = load_system(sys_doc, Some(cap))?;
    let chain = diagonal_chain(k, levels);
    for p in &chain {
        guard(sys.ps.fiber_dim(p), "fiber")?;
    }
    let core = sys.ps.core_bratteli(&chain)?;
    let mut r = Report::new();
    r.flag("core.recursion", "core as an inductive limit", core.check_recursion().is_ok());
    let mut data = serde_json::Map::new();
    data.insert("core".into(), diagram_json(&core));
    let mut dot = core.to_dot(&format!("{job} core"));
    if let Some(ad) = act_doc {
        let act = load_action(ad, &sys)?;
        for p in &chain {
            guard(sys.ps.fiber_dim(p) * act.group().order(), "crossed fiber")?;
        }
        let cs = crossed_system_with(&sys.ps, &act, tol, opts.samples.min(SUITE_SAMPLES), opts.seed)?;
        let crossed = crossed_core_bratteli(&cs, &chain)?;
        r.flag("crossed_core.recursion", "crossed core", crossed.check_recursion().is_ok());
        dot.push_str(&crossed.to_dot(&format!("{job} crossed core")));
        data.insert("crossed_core".into(), diagram_json(&crossed));
    }
    if let Some(path) = &opts.dot {
        write_file(path, &dot)?;
    }
    Ok(JobReport::new(job, "bratteli", r, Some(Value::Object(data))))
}

#[derive(Debug, Serialize)]
struct GridEntry {
    n: Vec<usize>,
    m: Vec<usize>,
    character: Option<usize>,
    basis: usize,
}

pub fn cmd_intertwiners(doc: &Doc, nmax: usize, opts: &CommonOpts, job: String) -> Result<JobReport> {
    let tol = Tol::default();
    if doc.kind()? != "dr" {
        return Err(Error::Schema(format!("expected a dr document, got \"{}\"", doc.kind()?)));
    }
    let (spec, _) = parse_dr(doc)?;
    let cap = opts.cap.unwrap_or(nmax).max(nmax);
    let degrees = IndexVector::all_up_to(spec.k(), nmax);
    let mut grid = Vec::new();
    let mut r = Report::new();
    for n in &degrees {
        for m in &degrees {
            let dim = spec.reps().iter().map(|x| x.dim()).collect::<Vec<_>>();
            let size = |p: &IndexVector| p.0.iter().zip(&dim).map(|(&a, &d)| d.pow(a as u32)).product::<usize>();
            guard(size(n) * size(m), "intertwiner space")?;
            let basis = hom_basis(&spec, n, m, cap, tol)?.len();
            let name = format!("hom{n}{m}");
            let anchor = "intertwiner dimensions";
            match hom_dim_char(&spec, n, m, cap) {
                Ok(c) => {
                    r.integer(name, anchor, c as i64, c == basis);
                    if c != basis {
                        r.annotate(format!("solver finds {basis}"));
                    }
                    grid.push(GridEntry { n: n.0.clone(), m: m.0.clone(), character: Some(c), basis });
                }
                Err(Error::Numerical(msg)) => {
                    r.flag(name, anchor, false);
                    r.annotate(msg);
                    grid.push(GridEntry { n: n.0.clone(), m: m.0.clone(), character: None, basis });
                }
                Err(e) => return Err(e),
            }
        }
    }
    let data = serde_json::to_value(grid).expect("grid serializes");
    Ok(JobReport::new(job, "intertwiners", r, Some(data)))
}

pub fn cmd_run(doc: &Doc, opts: &CommonOpts, fallback: String) -> Result<JobReport> {
    if doc.kind()? != "job" {
        return Err(Error::Schema(format!("expected a job document, got \"{}\"", doc.kind()?)));
    }
    let j: JobDoc = doc.parse()?;
    let o = &j.options;
    let merged = CommonOpts {
        cap: opts.cap.or(o.cap),
        seed: o.seed.unwrap_or(opts.seed),
        samples: o.samples.unwrap_or(opts.samples),
        dot: opts.dot.clone(),
        json: opts.json.clone(),
    };
    let job = j.id.clone().unwrap_or(fallback);
    let field = |v: &Option<Value>, name: &str| -> Result<Doc> {
        doc.resolve(v.as_ref().ok_or_else(|| Error::Schema(format!("job needs \"{name}\"")))?)
    };
    match j.command.as_str() {
        "validate" => cmd_validate(&field(&j.input, "input")?, &merged, job),
        "crossed" => cmd_crossed(&field(&j.system, "system")?, &field(&j.action, "action")?, &merged, job),
        "bratteli" => {
            let act = j.action.as_ref().map(|a| doc.resolve(a)).transpose()?;
            cmd_bratteli(&field(&j.system, "system")?, act.as_ref(), o.levels.unwrap_or(DEFAULT_LEVELS), &merged, job)
        }
        "intertwiners" => cmd_intertwiners(&field(&j.input, "input")?, o.nmax.unwrap_or(DEFAULT_NMAX), &merged, job),
        other => Err(Error::Schema(format!("unknown job command \"{other}\""))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Schema(format!("cannot write {}: {e}", path.display())))
}

fn dispatch(cli: &Cli) -> (Result<JobReport>, Option<PathBuf>) {
    match &cli.command {
        Command::Validate { input, opts } => (
            Doc::load(input).and_then(|d| cmd_validate(&d, opts, job_name(input))),
            opts.json.clone(),
        ),
        Command::Crossed { system, action, opts } => (
            Doc::load(system).and_then(|s| cmd_crossed(&s, &Doc::load(action)?, opts, job_name(system))),
            opts.json.clone(),
        ),
        Command::Bratteli { system, action, levels, opts } => (
            Doc::load(system).and_then(|s| {
                let a = action.as_deref().map(Doc::load).transpose()?;
                cmd_bratteli(&s, a.as_ref(), *levels, opts, job_name(system))
            }),
            opts.json.clone(),
        ),
        Command::Intertwiners { input, nmax, opts } => (
            Doc::load(input).and_then(|d| cmd_intertwiners(&d, *nmax, opts, job_name(input))),
            opts.json.clone(),
        ),
        Command::Run { job, opts } => (
            Doc::load(job).and_then(|d| cmd_run(&d, opts, job_name(job))),
            opts.json.clone(),
        ),
    }
}

fn emit(report: &JobReport, json: Option<&Path>) -> std::result::Result<(), String> {
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    match json {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let (outcome, json) = dispatch(cli);
    let report = match outcome {
        Ok(r) => r,
        Err(Error::Validation(rep)) => {
            let name = match &cli.command {
                Command::Validate { input: p, .. }
                | Command::Crossed { system: p, .. }
                | Command::Bratteli { system: p, .. }
                | Command::Intertwiners { input: p, .. }
                | Command::Run { job: p, .. } => job_name(p),
            };
            eprintln!("validation failed: {}", rep.failures().join("; "));
            JobReport::new(name, "precondition", *rep, None)
        }
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(msg) = emit(&report, json.as_deref()) {
        eprintln!("error: {msg}");
        return 2;
    }
    if !report.passed {
        eprintln!("checks failed: {}", failed_names(&report).join(", "));
    }
    report.exit_code()
}

fn failed_names(r: &JobReport) -> Vec<String> {
    r.checks
        .iter()
        .filter(|c| !c.passed && !c.informational)
        .map(|c| c.name.clone())
        .collect()
}
