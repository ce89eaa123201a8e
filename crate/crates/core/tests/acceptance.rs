//! Acceptance criteria, one line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use prodsys::action::{FiniteGroup, SystemAction};
use prodsys::cli::load_system;
use prodsys::crossed::{
    check_inner_identity, check_lambda_isomorphism, crossed_core_bratteli, crossed_faithfulness, crossed_system,
    reference_core_blocks, CrossedSystem,
};
use prodsys::dr::{hom_basis, hom_dim_char, invariant_core_dim, DRSpec, Representation};
use prodsys::fdalg::{random_vector, Tol, Vector};
use prodsys::prodsys::{one_vertex_system, IndexVector, ProductSystem, DEFAULT_CAP};
use prodsys::CheckValue;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{doc, random_faithful, system, system_with_action};

const EPS: f64 = 1e-9;
const CROSSED_CAP: usize = 3;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:.2?}, limit {limit:?}"))
}

fn iv(v: &[usize]) -> IndexVector {
    IndexVector(v.to_vec())
}

fn crossed_fixtures() -> Vec<(&'static str, CrossedSystem)> {
    [("O_2 x Z/2", "o2.json", "o2_swap.json"), ("2-vertex 2-graph x Z/3", "two_vertex_kgraph.json", "two_vertex_z3.json")]
        .into_iter()
        .map(|(name, s, a)| {
            let (ps, act) = system_with_action(s, a, CROSSED_CAP);
            (name, crossed_system(&ps, &act).unwrap())
        })
        .collect()
}

fn pairs_up_to(k: usize, cap: usize) -> Vec<(IndexVector, IndexVector)> {
    let all = IndexVector::all_up_to(k, cap);
    let mut out = Vec::new();
    for p in &all {
        for q in &all {
            if p.degree() + q.degree() <= cap {
                out.push((p.clone(), q.clone()));
            }
        }
    }
    out
}

fn c1_axiom_suite() -> Outcome {
    let mut lines = Vec::new();
    for name in ["kgraph_2x3.json", "two_vertex_graph.json", "k3_perm.json"] {
        let start = Instant::now();
        let sys = load_system(&doc(name), Some(DEFAULT_CAP)).unwrap();
        let r = sys.ps.check_axioms(Tol::default());
        within(Duration::from_secs(1), start, name)?;
        ensure(r.passed(), || format!("{name}: {:?}", r.failures()))?;
        let worst = r.max_residual("");
        ensure(worst == 0.0, || format!("{name}: permutation flips left residual {worst:e}"))?;
        lines.push(format!("{name} exact in {:.0?}", start.elapsed()));
    }
    Ok(lines.join(", "))
}

fn c2_inner_identity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (name, cs) in crossed_fixtures() {
        for (i, (p, q)) in pairs_up_to(cs.base().k(), CROSSED_CAP).iter().enumerate() {
            let r = check_inner_identity(&cs, p, q, 100, i as u64).unwrap();
            let res = r.max_residual("");
            ensure(r.passed(), || format!("{name} p={p} q={q}: residual {res:e}"))?;
            worst = worst.max(res);
            count += 1;
        }
    }
    within(Duration::from_secs(10), start, "inner identity")?;
    Ok(format!("{count} degree pairs x 100 samples, max residual {worst:.1e}"))
}

fn c3_crossed_product_system() -> Outcome {
    let mut parts = Vec::new();
    for (name, cs) in crossed_fixtures() {
        let r = cs.report();
        ensure(r.passed(), || format!("{name}: {:?}", r.failures()))?;
        for key in ["omega.isometry", "omega.onto", "associativity", "unit_laws"] {
            ensure(r.get(key).is_some_and(|c| c.passed), || format!("{name}: {key} missing or failing"))?;
        }
        let worst = r.max_residual("");
        ensure(worst <= EPS, || format!("{name}: residual {worst:e}"))?;
        parts.push(format!("{name} max residual {worst:.1e}"));
    }
    Ok(parts.join(", "))
}

fn c4_faithfulness() -> Outcome {
    let start = Instant::now();
    for seed in 0..20 {
        let rs = random_faithful(seed, 2);
        ensure(rs.ps.is_row_finite_and_faithful(), || format!("{}: base not faithful", rs.label))?;
        let cs = crossed_system(&rs.ps, &rs.act).map_err(|e| format!("{}: {e}", rs.label))?;
        for p in IndexVector::all_up_to(rs.ps.k(), 2) {
            let (ok, kernel) = crossed_faithfulness(&cs, &p).unwrap();
            ensure(ok, || format!("{}: kernel of dimension {kernel} at p={p}", rs.label))?;
        }
    }
    within(Duration::from_secs(30), start, "20 random systems")?;
    Ok(format!("20 systems over Z/2, Z/3, S_3, kernel 0 for |p| <= 2 in {:.1?}", start.elapsed()))
}

fn c5_lambda() -> Outcome {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut systems = crossed_fixtures();
    let (ps, _) = system_with_action("o2.json", "o2_swap.json", CROSSED_CAP);
    let trivial = SystemAction::trivial(&ps, FiniteGroup::cyclic(2));
    systems.push(("O_2 x Z/2 trivial", crossed_system(&ps, &trivial).unwrap()));
    for (name, cs) in &systems {
        let n = cs.algebra().order();
        for p in IndexVector::all_up_to(cs.base().k(), CROSSED_CAP) {
            let r = check_lambda_isomorphism(cs, &p, 10, 0).unwrap();
            ensure(r.passed(), || format!("{name} p={p}: {:?}", r.failures()))?;
            let rank = r.get(&format!("lambda{p}.rank")).map(|c| c.value.clone());
            let fiber = cs.base().fiber(&p).unwrap();
            let sources = fiber.corr.source_counts();
            let target = sources.iter().map(|c| c * c).sum::<usize>() * n;
            ensure(rank == Some(CheckValue::Integer(target as i64)), || {
                format!("{name} p={p}: rank {rank:?}, expected dim K(Y_p)·|G| = {target}")
            })?;
            worst = worst.max(r.max_residual(""));
            checked += 1;
        }
    }
    Ok(format!("{checked} fibers bijective, max residual {worst:.1e}"))
}

fn sizes(levels: &[prodsys::bratteli::Level]) -> Vec<Vec<usize>> {
    levels.iter().map(|l| l.sizes.clone()).collect()
}

fn c6_core_diagrams() -> Outcome {
    let sys = system("two_vertex_graph.json", 4);
    let skel = sys.kgraph.as_ref().unwrap();
    let chain: Vec<_> = (1..=3).map(|m| iv(&[m])).collect();
    let d = sys.ps.core_bratteli(&chain).unwrap();
    let a = skel.adjacency(0);
    ensure(d.edges.iter().all(|e| e == &a), || format!("1-graph multiplicities {:?} vs adjacency {a:?}", d.edges))?;

    for n in [2, 3] {
        let ps = one_vertex_system(&[n], 3).unwrap();
        let d = ps.core_bratteli(&chain).unwrap();
        ensure(sizes(&d.levels) == vec![vec![n], vec![n * n], vec![n * n * n]], || {
            format!("O_{n} core sizes {:?}", sizes(&d.levels))
        })?;
    }

    let mut compared = 0;
    let mut cases: Vec<(String, CrossedSystem, Vec<IndexVector>)> = Vec::new();
    let (ps, act) = system_with_action("o2.json", "o2_swap.json", 3);
    cases.push(("O_2 x Z/2".into(), crossed_system(&ps, &act).unwrap(), chain.clone()));
    let trivial = SystemAction::trivial(&ps, FiniteGroup::cyclic(2));
    cases.push(("O_2 x Z/2 trivial".into(), crossed_system(&ps, &trivial).unwrap(), chain.clone()));
    let (ps, act) = system_with_action("two_vertex_kgraph.json", "two_vertex_z3.json", 4);
    cases.push(("2-vertex 2-graph x Z/3".into(), crossed_system(&ps, &act).unwrap(), vec![iv(&[1, 1]), iv(&[2, 2])]));
    for (name, cs, chain) in &cases {
        let d = crossed_core_bratteli(cs, chain).map_err(|e| format!("{name}: {e}"))?;
        for (level, p) in d.levels.iter().zip(chain) {
            let mut got = level.sizes.clone();
            got.sort_unstable();
            let reference = reference_core_blocks(cs, p).unwrap();
            ensure(got == reference, || format!("{name} p={p}: blocks {got:?} vs reference {reference:?}"))?;
            compared += 1;
        }
    }
    Ok(format!("adjacency exact, O_2/O_3 sizes, {compared} crossed levels match the reference"))
}

fn c7_doplicher_roberts() -> Outcome {
    let start = Instant::now();
    let s3 = FiniteGroup::symmetric(3);
    let spec = DRSpec::new(vec![Representation::trivial(s3), Representation::sign(3), Representation::standard(3)]).unwrap();
    let (s, ss) = (iv(&[0, 0, 1]), iv(&[0, 0, 2]));
    let h = |a: &IndexVector, b: &IndexVector| hom_dim_char(&spec, a, b, 4).unwrap();
    ensure(h(&s, &s) == 1, || format!("hom(σ,σ) = {}", h(&s, &s)))?;
    ensure(h(&ss, &ss) == 3, || format!("hom(σσ,σσ) = {}", h(&ss, &ss)))?;
    ensure(h(&s, &ss) == 1, || format!("hom(σ,σσ) = {}", h(&s, &ss)))?;
    let grid = IndexVector::all_up_to(3, 2);
    for n in &grid {
        for m in &grid {
            let b = hom_basis(&spec, n, m, 4, Tol::default()).unwrap().len();
            ensure(b == h(n, m), || format!("n={n} m={m}: basis {b}, character {}", h(n, m)))?;
        }
        let (a, b) = invariant_core_dim(&spec, n, 4, Tol::default()).unwrap();
        ensure(a == b, || format!("invariant core at {n}: {a} vs {b}"))?;
    }
    within(Duration::from_secs(5), start, "DR grid")?;
    Ok(format!("{} grid entries, invariant cores agree", grid.len() * grid.len()))
}

fn c8_fowler() -> Outcome {
    let (ok, witness) = one_vertex_system(&[2, 3], 6).unwrap().fowler_injectivity(6).unwrap();
    ensure(ok && witness.is_none(), || format!("(2,3) reported collision {witness:?}"))?;
    let (ok, witness) = one_vertex_system(&[2, 2], 6).unwrap().fowler_injectivity(6).unwrap();
    ensure(!ok && witness == Some((iv(&[1, 0]), iv(&[0, 1]))), || format!("(2,2) witness {witness:?}"))?;
    Ok("(2,3) injective through |p| <= 6, (2,2) collides at (1,0),(0,1)".into())
}

fn c9_trivial_group() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut count = 0;
    for name in ["o2.json", "two_vertex_kgraph.json", "kgraph_2x3.json"] {
        let ps: ProductSystem = system(name, CROSSED_CAP).ps;
        let cs = crossed_system(&ps, &SystemAction::trivial(&ps, FiniteGroup::trivial())).unwrap();
        for (p, q) in pairs_up_to(ps.k(), CROSSED_CAP) {
            let (fp, fq) = (cs.fiber(&p).unwrap(), cs.fiber(&q).unwrap());
            ensure(fp.dim() == ps.fiber_dim(&p), || format!("{name}: dim at {p}"))?;
            ensure(cs.omega(&p, &q).unwrap() == ps.mult_map(&p, &q).unwrap(), || format!("{name}: Ω at {p},{q}"))?;
            let x: Vector = random_vector(&mut rng, fp.dim());
            let y: Vector = random_vector(&mut rng, fq.dim());
            let tensor = ps.fiber_tensor(&p, &q).unwrap();
            let base = ps.mult_map(&p, &q).unwrap() * tensor.simple_tensor(&x, &y);
            ensure(cs.cp_mult(&p, &x, &q, &y).unwrap() == base, || format!("{name}: product at {p},{q}"))?;
            count += 1;
        }
        for p in IndexVector::all_up_to(ps.k(), CROSSED_CAP) {
            let fp = cs.fiber(&p).unwrap();
            let x = random_vector(&mut rng, fp.dim());
            let y = random_vector(&mut rng, fp.dim());
            let base = fp.base().corr.inner_coords(&x, &y);
            ensure(cs.fiber(&p).unwrap().inner(&x, &y).unwrap().as_slice() == base.0.as_slice(), || {
                format!("{name}: inner product at {p}")
            })?;
            let t = fp.theta(&x, &y).unwrap();
            ensure(t == fp.base().corr.theta_coords(&x, &y), || format!("{name}: rank-one at {p}"))?;
            ensure(cs.lambda_map(&p, &t).unwrap() == vec![t.clone()], || format!("{name}: Λ at {p}"))?;
        }
        if ps.k() == 1 {
            let chain: Vec<_> = (1..=CROSSED_CAP).map(|m| iv(&[m])).collect();
            let a = crossed_core_bratteli(&cs, &chain).unwrap();
            let b = ps.core_bratteli(&chain).unwrap();
            ensure(a.edges == b.edges && sizes(&a.levels) == sizes(&b.levels), || format!("{name}: core diagram"))?;
        }
    }
    Ok(format!("{count} degree pairs identical to the base, Λ and cores unchanged"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("product-system axiom suite", c1_axiom_suite),
        ("isometry of the crossed multiplication", c2_inner_identity),
        ("crossed system is a product system", c3_crossed_product_system),
        ("faithfulness preserved", c4_faithfulness),
        ("Λ is a *-isomorphism", c5_lambda),
        ("core diagrams", c6_core_diagrams),
        ("Doplicher-Roberts intertwiners", c7_doplicher_roberts),
        ("Fowler predicate", c8_fowler),
        ("trivial-group degeneracies", c9_trivial_group),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("acceptance {:>2} {tag} {title}: {detail} [{:.2?}]", i + 1, start.elapsed());
    }
    let elapsed = total.elapsed();
    let ok = elapsed < Duration::from_secs(60);
    if !ok {
        failed += 1;
    }
    println!(
        "acceptance 10 {} wall clock of the acceptance workload: {elapsed:.2?} (limit 60s)",
        if ok { "PASS" } else { "FAIL" }
    );
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
