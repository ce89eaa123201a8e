//! Finite higher-rank graphs from a colored 1-skeleton and factorization
//! squares, their product systems, and actions by graph automorphisms.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::action::{FiniteGroup, SystemAction};
use crate::correspondence::{BasedCorrespondence, BasisVector, VertexSet};
use crate::error::{Error, Result};
use crate::fdalg::{permutation_matrix, Mat, ONE};
use crate::prodsys::{IndexVector, ProductSystem};
use crate::report::{CheckValue, Report};

/// Cap used by [`validate`]; triple factorizations live in degree `e_i+e_j+e_l`.
pub const VALIDATION_CAP: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub range: usize,
    pub source: usize,
}

/// `ef ↔ f′e′` with `e, e′` of color `i` and `f, f′` of color `j`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Square {
    pub e: usize,
    pub f: usize,
    pub f2: usize,
    pub e2: usize,
}

#[derive(Debug, Clone)]
pub struct KGraphSkeleton {
    vertices: VertexSet,
    edges: Vec<Vec<Edge>>,
    squares: BTreeMap<(usize, usize), Vec<Square>>,
}

/// A normal-form path with its edge ids and endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KPath {
    pub edges: Vec<String>,
    pub range: usize,
    pub source: usize,
}

impl KGraphSkeleton {
    /// Checks indices only; the factorization axioms are left to [`validate`].
    pub fn new(
        vertices: VertexSet,
        edges: Vec<Vec<Edge>>,
        squares: BTreeMap<(usize, usize), Vec<Square>>,
    ) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Domain("a k-graph needs at least one color".into()));
        }
        for (c, list) in edges.iter().enumerate() {
            for e in list {
                if e.range >= vertices.len() || e.source >= vertices.len() {
                    return Err(Error::Parent(format!("edge {} of color {c} has a vertex out of range", e.id)));
                }
            }
        }
        for (&(i, j), list) in &squares {
            if i >= j || j >= edges.len() {
                return Err(Error::Domain(format!("factorizations ({i},{j}) are not for a color pair i<j")));
            }
            for s in list {
                if s.e >= edges[i].len() || s.e2 >= edges[i].len() || s.f >= edges[j].len() || s.f2 >= edges[j].len()
                {
                    return Err(Error::Domain(format!("factorization ({i},{j}) refers to a missing edge")));
                }
            }
        }
        Ok(Self { vertices, edges, squares })
    }

    /// A directed graph, i.e. a 1-graph.
    pub fn one_graph(vertices: VertexSet, edges: Vec<Edge>) -> Result<Self> {
        Self::new(vertices, vec![edges], BTreeMap::new())
    }

    pub fn k(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn edges(&self, color: usize) -> &[Edge] {
        &self.edges[color]
    }

    pub fn squares(&self) -> &BTreeMap<(usize, usize), Vec<Square>> {
        &self.squares
    }

    fn square_name(&self, i: usize, j: usize, s: &Square) -> String {
        format!(
            "{}{} ~ {}{}",
            self.edges[i][s.e].id, self.edges[j][s.f].id, self.edges[j][s.f2].id, self.edges[i][s.e2].id
        )
    }

    fn generator(&self, c: usize) -> Result<BasedCorrespondence> {
        BasedCorrespondence::new(
            self.vertices.clone(),
            self.edges[c]
                .iter()
                .map(|e| BasisVector {
                    id: e.id.clone(),
                    range: e.range,
                    source: e.source,
                })
                .collect(),
        )
    }

    /// `adjacency[v][w]` counts color-`c` edges with range `v` and source `w`.
    pub fn adjacency(&self, c: usize) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut a = vec![vec![0; n]; n];
        for e in &self.edges[c] {
            a[e.range][e.source] += 1;
        }
        a
    }

    /// Every vertex receives an edge of every color.
    pub fn has_no_sources(&self) -> bool {
        self.edges.iter().all(|list| (0..self.vertices.len()).all(|v| list.iter().any(|e| e.range == v)))
    }

    /// The colored 1-skeleton, edges drawn from source to range.
    pub fn to_dot(&self, name: &str) -> String {
        const COLORS: [&str; 6] = ["red", "blue", "darkgreen", "orange", "purple", "brown"];
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", name.replace('"', "\\\""));
        for (v, n) in self.vertices.names().iter().enumerate() {
            let _ = writeln!(out, "  v{v} [label=\"{}\"];", n.replace('"', "\\\""));
        }
        for (c, list) in self.edges.iter().enumerate() {
            for e in list {
                let _ = writeln!(
                    out,
                    "  v{} -> v{} [label=\"{}\", color={}];",
                    e.source,
                    e.range,
                    e.id.replace('"', "\\\""),
                    COLORS[c % COLORS.len()]
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

fn structural_report(skel: &KGraphSkeleton) -> Report {
    let anchor = "factorization rules";
    let mut r = Report::new();
    let k = skel.k();
    for i in 0..k {
        for j in i + 1..k {
            let (ei, ej) = (&skel.edges[i], &skel.edges[j]);
            let empty = Vec::new();
            let list = skel.squares.get(&(i, j)).unwrap_or(&empty);
            let bad = list.iter().find(|s| {
                ei[s.e].source != ej[s.f].range
                    || ej[s.f2].source != ei[s.e2].range
                    || ei[s.e].range != ej[s.f2].range
                    || ej[s.f].source != ei[s.e2].source
            });
            r.flag(format!("factorization({i},{j}).endpoints"), anchor, bad.is_none());
            if let Some(s) = bad {
                r.annotate(format!("square {} breaks endpoints", skel.square_name(i, j, s)));
            }

            let mut left: HashMap<(usize, usize), usize> = HashMap::new();
            let mut right: HashMap<(usize, usize), usize> = HashMap::new();
            for s in list {
                *left.entry((s.e, s.f)).or_default() += 1;
                *right.entry((s.f2, s.e2)).or_default() += 1;
            }
            let mut problem = None;
            'outer: for (a, ea) in ei.iter().enumerate() {
                for (b, fb) in ej.iter().enumerate() {
                    if ea.source == fb.range && left.get(&(a, b)).copied().unwrap_or(0) != 1 {
                        problem = Some(format!("pair {}{} is factored {} times", ea.id, fb.id, left.get(&(a, b)).copied().unwrap_or(0)));
                        break 'outer;
                    }
                    if fb.source == ea.range && right.get(&(b, a)).copied().unwrap_or(0) != 1 {
                        problem = Some(format!("pair {}{} is hit {} times", fb.id, ea.id, right.get(&(b, a)).copied().unwrap_or(0)));
                        break 'outer;
                    }
                }
            }
            if problem.is_none() {
                if let Some(s) = list
                    .iter()
                    .find(|s| ei[s.e].source != ej[s.f].range || ej[s.f2].source != ei[s.e2].range)
                {
                    problem = Some(format!("square {} uses a non-composable pair", skel.square_name(i, j, s)));
                }
            }
            r.flag(format!("factorization({i},{j}).bijective"), anchor, problem.is_none());
            if let Some(p) = problem {
                r.annotate(p);
            }
        }
    }
    r
}

fn build_system(skel: &KGraphSkeleton, cap: usize) -> Result<ProductSystem> {
    let generators = (0..skel.k()).map(|c| skel.generator(c)).collect::<Result<Vec<_>>>()?;
    let mut flips = BTreeMap::new();
    for i in 0..skel.k() {
        for j in i + 1..skel.k() {
            let ij = generators[i].tensor(&generators[j])?;
            let ji = generators[j].tensor(&generators[i])?;
            let mut t = Mat::zeros(ji.pairs.len(), ij.pairs.len());
            for s in skel.squares.get(&(i, j)).map(Vec::as_slice).unwrap_or(&[]) {
                let from = ij.pair_index(s.e, s.f);
                let to = ji.pair_index(s.f2, s.e2);
                if let (Some(a), Some(b)) = (from, to) {
                    t[(b, a)] = ONE;
                }
            }
            flips.insert((i, j), t);
        }
    }
    ProductSystem::new(skel.vertices.clone(), generators, flips, cap)
}

/// Endpoint compatibility and bijectivity of every factorization, and for
/// `k ≥ 3` associativity of the induced flips up to degree [`VALIDATION_CAP`].
pub fn validate(skel: &KGraphSkeleton) -> Report {
    let mut r = structural_report(skel);
    if r.passed() && skel.k() >= 3 {
        match build_system(skel, VALIDATION_CAP) {
            Ok(ps) => {
                let k = skel.k();
                let units: Vec<IndexVector> = (0..k).map(|i| IndexVector::unit(k, i)).collect();
                let mut worst = (0.0f64, None);
                for p in &units {
                    for q in &units {
                        for s in &units {
                            let res = ps.associativity_residual(p, q, s);
                            if res > worst.0 {
                                worst = (res, Some(format!("triple {p}{q}{s}")));
                            }
                        }
                    }
                }
                r.residual("associativity", "triple factorizations", worst.0, 0.0);
                if let (true, Some(note)) = (worst.0 > 0.0, worst.1) {
                    r.annotate(note);
                }
            }
            Err(e) => {
                r.flag("associativity", "triple factorizations", false);
                r.annotate(e.to_string());
            }
        }
    }
    r.info(
        "no_sources",
        "faithfulness of the induced system",
        CheckValue::Flag(skel.has_no_sources()),
        "reported only",
    );
    r
}

/// The product system with generators `C(E_i)` and permutation flips.
pub fn to_product_system(skel: &KGraphSkeleton, cap: usize) -> Result<ProductSystem> {
    let r = validate(skel);
    if !r.passed() {
        return Err(Error::Validation(Box::new(r)));
    }
    build_system(skel, cap)
}

/// Normal-form paths of degree `n`, in the basis order of the fiber.
pub fn paths(skel: &KGraphSkeleton, n: &IndexVector, cap: usize) -> Result<Vec<KPath>> {
    let ps = to_product_system(skel, cap)?;
    let fiber = ps.fiber(n)?;
    let word = n.word();
    Ok(fiber
        .paths
        .iter()
        .map(|key| {
            let (range, source) = ps.endpoints(&word, key);
            let edges = if word.is_empty() {
                Vec::new()
            } else {
                word.iter().zip(key).map(|(&c, &e)| skel.edges[c][e as usize].id.clone()).collect()
            };
            KPath { edges, range, source }
        })
        .collect())
}

fn check_perm(perm: &[usize], n: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&x| x >= n || std::mem::replace(&mut seen[x], true)) {
        return Err(Error::Rejected(format!("{what} is not a permutation of {n} items")));
    }
    Ok(())
}

/// `G` acting by automorphisms: `vertex_perms[g]` and `edge_perms[g][color]`.
pub fn graph_action(
    skel: &KGraphSkeleton,
    ps: &ProductSystem,
    group: FiniteGroup,
    vertex_perms: Vec<Vec<usize>>,
    edge_perms: Vec<Vec<Vec<usize>>>,
) -> Result<SystemAction> {
    let n = group.order();
    let (nv, k) = (skel.vertices.len(), skel.k());
    if vertex_perms.len() != n || edge_perms.len() != n {
        return Err(Error::Rejected(format!("expected permutations for all {n} group elements")));
    }
    for g in 0..n {
        let gname = &group.names()[g];
        check_perm(&vertex_perms[g], nv, &format!("vertex map of {gname}"))?;
        if edge_perms[g].len() != k {
            return Err(Error::Rejected(format!("{gname} needs an edge map for each of {k} colors")));
        }
        for c in 0..k {
            let list = &skel.edges[c];
            check_perm(&edge_perms[g][c], list.len(), &format!("color-{c} edge map of {gname}"))?;
            for (e, edge) in list.iter().enumerate() {
                let img = &list[edge_perms[g][c][e]];
                if img.range != vertex_perms[g][edge.range] || img.source != vertex_perms[g][edge.source] {
                    return Err(Error::Rejected(format!(
                        "{gname} sends edge {} to {} without respecting range and source",
                        edge.id, img.id
                    )));
                }
            }
        }
        for (&(i, j), list) in &skel.squares {
            let (pi, pj) = (&edge_perms[g][i], &edge_perms[g][j]);
            for s in list {
                let moved = Square {
                    e: pi[s.e],
                    f: pj[s.f],
                    f2: pj[s.f2],
                    e2: pi[s.e2],
                };
                if !list.contains(&moved) {
                    return Err(Error::Rejected(format!(
                        "{gname} breaks the factorization square {}",
                        skel.square_name(i, j, s)
                    )));
                }
            }
        }
    }
    for g in 0..n {
        for h in 0..n {
            let gh = group.mul(g, h);
            let compose = |a: &[usize], b: &[usize]| b.iter().map(|&x| a[x]).collect::<Vec<_>>();
            let ok = compose(&vertex_perms[g], &vertex_perms[h]) == vertex_perms[gh]
                && (0..k).all(|c| compose(&edge_perms[g][c], &edge_perms[h][c]) == edge_perms[gh][c]);
            if !ok {
                return Err(Error::Rejected(format!(
                    "the maps of {} and {} do not compose to that of {}",
                    group.names()[g],
                    group.names()[h],
                    group.names()[gh]
                )));
            }
        }
    }
    let w = (0..k)
        .map(|c| (0..n).map(|g| permutation_matrix(&edge_perms[g][c])).collect())
        .collect();
    SystemAction::new(ps, group, vertex_perms, w)
}
