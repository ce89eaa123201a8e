#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::PathBuf;

use prodsys::action::{permutations, FiniteGroup, SystemAction};
use prodsys::cli::{load_action, load_system, Doc, LoadedSystem};
use prodsys::correspondence::{BasedCorrespondence, BasisVector, VertexSet};
use prodsys::fdalg::{Mat, C64};
use prodsys::kgraph::{self, Edge, KGraphSkeleton, Square};
use prodsys::prodsys::{transposition, ProductSystem};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn doc(name: &str) -> Doc {
    Doc::load(&fixture(name)).unwrap()
}

pub fn system(name: &str, cap: usize) -> LoadedSystem {
    load_system(&doc(name), Some(cap)).unwrap()
}

pub fn system_with_action(sys: &str, act: &str, cap: usize) -> (ProductSystem, SystemAction) {
    let s = system(sys, cap);
    let a = load_action(&doc(act), &s).unwrap();
    (s.ps, a)
}

/// A group with its permutation model, used to enumerate actions on small sets.
pub struct TestGroup {
    pub group: FiniteGroup,
    /// One-dimensional characters, `chars[j][g]`.
    pub chars: Vec<Vec<C64>>,
}

pub fn z(n: usize) -> TestGroup {
    let chars = (0..n)
        .map(|j| (0..n).map(|g| C64::from_polar(1.0, TAU * (j * g) as f64 / n as f64)).collect())
        .collect();
    TestGroup { group: FiniteGroup::cyclic(n), chars }
}

pub fn s3() -> TestGroup {
    let sign = permutations(3)
        .iter()
        .map(|p| {
            let inv = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            C64::new(if inv % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
        .collect();
    TestGroup {
        group: FiniteGroup::symmetric(3),
        chars: vec![vec![C64::new(1.0, 0.0); 6], sign],
    }
}

/// All homomorphisms `G → Sym(n)`, as `perm[g]`.
pub fn actions_on(group: &FiniteGroup, n: usize) -> Vec<Vec<Vec<usize>>> {
    let perms = permutations(n);
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(group: &FiniteGroup, perms: &[Vec<usize>], cur: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        let g = cur.len();
        if g == group.order() {
            let ok = (0..g).all(|a| {
                (0..g).all(|b| {
                    let ab = group.mul(a, b);
                    let composed: Vec<usize> = perms[cur[b]].iter().map(|&x| perms[cur[a]][x]).collect();
                    composed == perms[cur[ab]]
                })
            });
            if ok {
                out.push(cur.iter().map(|&i| perms[i].clone()).collect());
            }
            return;
        }
        for i in 0..perms.len() {
            if g == 0 && i != 0 {
                continue;
            }
            cur.push(i);
            rec(group, perms, cur, out);
            cur.pop();
        }
    }
    rec(group, &perms, &mut cur, &mut out);
    out
}

/// Orbits of `G` on `V × V` under a vertex action.
fn pair_orbits(alpha: &[Vec<usize>], nv: usize) -> Vec<Vec<(usize, usize)>> {
    let mut seen = vec![vec![false; nv]; nv];
    let mut out = Vec::new();
    for r in 0..nv {
        for s in 0..nv {
            if seen[r][s] {
                continue;
            }
            let mut orbit = Vec::new();
            for a in alpha {
                let pair = (a[r], a[s]);
                if !seen[pair.0][pair.1] {
                    seen[pair.0][pair.1] = true;
                    orbit.push(pair);
                }
            }
            out.push(orbit);
        }
    }
    out
}

/// Edges as `(range, source)` with a twist character per edge.
struct EdgeSet {
    pairs: Vec<(usize, usize)>,
    twist: Vec<usize>,
}

fn random_edges(rng: &mut ChaCha8Rng, tg: &TestGroup, alpha: &[Vec<usize>], nv: usize) -> Option<EdgeSet> {
    let mut orbits = pair_orbits(alpha, nv);
    orbits.shuffle(rng);
    let mut pairs = Vec::new();
    let mut twist = Vec::new();
    for orbit in orbits {
        if pairs.len() + orbit.len() > 3 {
            continue;
        }
        if !pairs.is_empty() && rng.gen_bool(0.3) {
            continue;
        }
        let chi = rng.gen_range(0..tg.chars.len());
        for &p in &orbit {
            pairs.push(p);
            twist.push(chi);
        }
    }
    let covered = (0..nv).all(|v| pairs.iter().any(|&(r, _)| r == v));
    covered.then_some(EdgeSet { pairs, twist })
}

/// `W_g e = χ(g) e′`, where `e′` carries the moved endpoints.
fn edge_unitaries(tg: &TestGroup, alpha: &[Vec<usize>], edges: &EdgeSet) -> Vec<Mat> {
    let n = edges.pairs.len();
    (0..tg.group.order())
        .map(|g| {
            let mut w = Mat::zeros(n, n);
            for (e, &(r, s)) in edges.pairs.iter().enumerate() {
                let target = edges.pairs.iter().position(|&p| p == (alpha[g][r], alpha[g][s])).unwrap();
                w[(target, e)] = tg.chars[edges.twist[e]][g];
            }
            w
        })
        .collect()
}

fn names(n: usize) -> VertexSet {
    VertexSet::new((0..n).map(|v| format!("v{v}"))).unwrap()
}

pub struct RandomSystem {
    pub ps: ProductSystem,
    pub act: SystemAction,
    pub label: String,
}

/// Seeded random faithful system with a `G`-action; `G` cycles through
/// `ℤ/2, ℤ/3, S_3` and the shape through three families.
pub fn random_faithful(seed: u64, cap: usize) -> RandomSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = match seed % 3 {
        0 => z(2),
        1 => z(3),
        _ => s3(),
    };
    let gname = ["Z2", "Z3", "S3"][(seed % 3) as usize];
    let family = (seed / 3) % 3;
    for _ in 0..1000 {
        let built = match family {
            0 | 1 => multi_vertex(&mut rng, &tg, family == 1, cap),
            _ => one_vertex(&mut rng, &tg, cap),
        };
        if let Some((ps, act, shape)) = built {
            return RandomSystem {
                ps,
                act,
                label: format!("seed {seed}: {gname}, {shape}"),
            };
        }
    }
    panic!("no faithful system for seed {seed}");
}

fn multi_vertex(
    rng: &mut ChaCha8Rng,
    tg: &TestGroup,
    two_colors: bool,
    cap: usize,
) -> Option<(ProductSystem, SystemAction, String)> {
    let nv = rng.gen_range(1..=3);
    let actions = actions_on(&tg.group, nv);
    let alpha = actions.choose(rng)?.clone();
    let edges = random_edges(rng, tg, &alpha, nv)?;
    let vs = names(nv);
    let e0: Vec<Edge> = edges
        .pairs
        .iter()
        .enumerate()
        .map(|(i, &(r, s))| Edge { id: format!("e{i}"), range: r, source: s })
        .collect();
    let mut colors = vec![e0.clone()];
    let mut squares = BTreeMap::new();
    let mut w = vec![edge_unitaries(tg, &alpha, &edges)];
    if two_colors {
        colors.push((0..nv).map(|v| Edge { id: format!("f{v}"), range: v, source: v }).collect());
        let sq = e0
            .iter()
            .enumerate()
            .map(|(i, e)| Square { e: i, f: e.source, f2: e.range, e2: i })
            .collect();
        squares.insert((0, 1), sq);
        w.push(
            (0..tg.group.order())
                .map(|g| prodsys::fdalg::permutation_matrix(&alpha[g]))
                .collect(),
        );
    }
    let skel = KGraphSkeleton::new(vs, colors, squares).ok()?;
    let ps = kgraph::to_product_system(&skel, cap).ok()?;
    let act = SystemAction::new(&ps, tg.group.clone(), alpha, w).ok()?;
    let shape = format!("{nv} vertices, {} edges, k={}", edges.pairs.len(), ps.k());
    Some((ps, act, shape))
}

fn one_vertex(rng: &mut ChaCha8Rng, tg: &TestGroup, cap: usize) -> Option<(ProductSystem, SystemAction, String)> {
    let v = VertexSet::point();
    let mut gens = Vec::new();
    let mut w = Vec::new();
    let mut dims = Vec::new();
    for c in 0..2 {
        let d = rng.gen_range(1..=3);
        let perm = actions_on(&tg.group, d).choose(rng)?.clone();
        let chi = rng.gen_range(0..tg.chars.len());
        w.push(
            (0..tg.group.order())
                .map(|g| prodsys::fdalg::permutation_matrix(&perm[g]) * tg.chars[chi][g])
                .collect::<Vec<_>>(),
        );
        gens.push(
            BasedCorrespondence::new(
                v.clone(),
                (0..d)
                    .map(|e| BasisVector { id: format!("x{c}_{e}"), range: 0, source: 0 })
                    .collect(),
            )
            .ok()?,
        );
        dims.push(d);
    }
    let flips = BTreeMap::from([((0, 1), transposition(dims[0], dims[1]))]);
    let ps = ProductSystem::new(v, gens, flips, cap).ok()?;
    let act = SystemAction::new(&ps, tg.group.clone(), vec![vec![0]; tg.group.order()], w).ok()?;
    Some((ps, act, format!("one vertex, dims {dims:?}")))
}
