mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prodsys::action::{check_action, FiniteGroup};
use prodsys::crossed::{check_inner_identity, crossed_faithfulness, crossed_system};
use prodsys::dr::{hom_dim_char, DRSpec, Representation};
use prodsys::fdalg::{max_abs_diff, random_vector, vec_max_abs_diff, Mat, Tol};
use prodsys::prodsys::IndexVector;
use prodsys::Report;

use common::{random_faithful, z};

fn degree(k: usize, pick: usize) -> IndexVector {
    let all = IndexVector::all_up_to(k, 2);
    all[pick % all.len()].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn crossed_algebra_laws(seed in 0u64..500, sample in 0u64..1000) {
        let rs = random_faithful(seed, 2);
        let cs = crossed_system(&rs.ps, &rs.act).unwrap();
        let a = cs.algebra();
        prop_assert_eq!(a.dim(), rs.ps.vertices().len() * a.order());
        let mut rng = ChaCha8Rng::seed_from_u64(sample);
        let (f, g, h) = (random_vector(&mut rng, a.dim()), random_vector(&mut rng, a.dim()), random_vector(&mut rng, a.dim()));
        let fg_h = a.ca_mult(&a.ca_mult(&f, &g).unwrap(), &h).unwrap();
        let f_gh = a.ca_mult(&f, &a.ca_mult(&g, &h).unwrap()).unwrap();
        prop_assert!(vec_max_abs_diff(&fg_h, &f_gh) < 1e-12);
        let lhs = a.ca_star(&a.ca_mult(&f, &g).unwrap()).unwrap();
        let rhs = a.ca_mult(&a.ca_star(&g).unwrap(), &a.ca_star(&f).unwrap()).unwrap();
        prop_assert!(vec_max_abs_diff(&lhs, &rhs) < 1e-12);
        prop_assert!(vec_max_abs_diff(&a.ca_star(&a.ca_star(&f).unwrap()).unwrap(), &f) == 0.0);
    }

    #[test]
    fn crossed_fiber_inner_product(seed in 0u64..500, pick in 0usize..6, sample in 0u64..1000) {
        let rs = random_faithful(seed, 2);
        let cs = crossed_system(&rs.ps, &rs.act).unwrap();
        let p = degree(rs.ps.k(), pick);
        let fib = cs.fiber(&p).unwrap();
        prop_assert_eq!(fib.dim(), rs.ps.fiber_dim(&p) * cs.algebra().order());
        let mut rng = ChaCha8Rng::seed_from_u64(sample);
        let z1 = random_vector(&mut rng, fib.dim());
        let z2 = random_vector(&mut rng, fib.dim());
        let f = random_vector(&mut rng, cs.algebra().dim());
        let a = cs.algebra();
        let lhs = fib.inner(&z1, &fib.right(&z2, &f).unwrap()).unwrap();
        let rhs = a.ca_mult(&fib.inner(&z1, &z2).unwrap(), &f).unwrap();
        prop_assert!(vec_max_abs_diff(&lhs, &rhs) < 1e-9);
        let adj = a.ca_star(&fib.inner(&z1, &z2).unwrap()).unwrap();
        prop_assert!(vec_max_abs_diff(&adj, &fib.inner(&z2, &z1).unwrap()) < 1e-9);
    }

    #[test]
    fn crossed_systems_stay_faithful_and_isometric(seed in 0u64..500, pick in 0usize..6, other in 0usize..6) {
        let rs = random_faithful(seed, 2);
        let cs = crossed_system(&rs.ps, &rs.act).unwrap();
        let p = degree(rs.ps.k(), pick);
        let (ok, kernel) = crossed_faithfulness(&cs, &p).unwrap();
        prop_assert!(ok, "{}: kernel {} at {}", rs.label, kernel, p);
        let q = degree(rs.ps.k(), other);
        if p.degree() + q.degree() <= 2 {
            prop_assert!(check_inner_identity(&cs, &p, &q, 5, seed).unwrap().passed());
        }
    }

    #[test]
    fn tau_is_a_group_action(seed in 0u64..500, pick in 0usize..6, g in 0usize..6, h in 0usize..6, sample in 0u64..1000) {
        let rs = random_faithful(seed, 2);
        prop_assert!(check_action(&rs.ps, &rs.act, Tol::default()).passed());
        let n = rs.act.group().order();
        let (g, h) = (g % n, h % n);
        let p = degree(rs.ps.k(), pick);
        let d = rs.ps.fiber_dim(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(sample);
        let t = Mat::from_iterator(d, d, random_vector(&mut rng, d * d).iter().copied());
        let inner = rs.act.tau(&rs.ps, &p, h, &t).unwrap();
        let lhs = rs.act.tau(&rs.ps, &p, g, &inner).unwrap();
        let rhs = rs.act.tau(&rs.ps, &p, rs.act.group().mul(g, h), &t).unwrap();
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn hom_dims_are_symmetric(n in prop::collection::vec(0usize..=1, 3), m in prop::collection::vec(0usize..=1, 3)) {
        let tg = z(3);
        let chars: Vec<Representation> = tg.chars[1..]
            .iter()
            .map(|c| Representation::new(FiniteGroup::cyclic(3), c.iter().map(|&x| Mat::from_element(1, 1, x)).collect()).unwrap())
            .chain([Representation::new(FiniteGroup::cyclic(3), (0..3).map(|g| {
                let mut w = Mat::zeros(2, 2);
                w[(0, 0)] = tg.chars[1][g];
                w[(1, 1)] = tg.chars[2][g];
                w
            }).collect()).unwrap()])
            .collect();
        let spec = DRSpec::new(chars).unwrap();
        let (n, m) = (IndexVector(n), IndexVector(m));
        prop_assert_eq!(hom_dim_char(&spec, &n, &m, 3).unwrap(), hom_dim_char(&spec, &m, &n, 3).unwrap());
    }

    #[test]
    fn reports_round_trip(seed in 0u64..500) {
        let rs = random_faithful(seed, 2);
        let cs = crossed_system(&rs.ps, &rs.act).unwrap();
        let text = serde_json::to_string(cs.report()).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}

