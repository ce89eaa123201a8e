//! Finite groups and their actions on product systems.

use std::collections::HashMap;

use crate::correspondence::{AFunc, BasedCorrespondence};
use crate::error::{Error, Result};
use crate::fdalg::{max_abs_diff, permutation_matrix, unitarity_residual, Mat, Tol, C64, ZERO};
use crate::prodsys::{IndexVector, PathKey, PathVec, ProductSystem, RoutingOrder};
use crate::report::Report;

/// A finite group given by its Cayley table; element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    names: Vec<String>,
}

impl FiniteGroup {
    /// Accepts any square table with entries in range; the group axioms are
    /// left to [`check_group`].
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Dimension("empty Cayley table".into()));
        }
        if table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::Dimension(format!(
                "Cayley table must be {n}x{n} with entries below {n}"
            )));
        }
        let inverse = (0..n)
            .map(|g| (0..n).find(|&h| table[g][h] == 0).unwrap_or(usize::MAX))
            .collect();
        let names = (0..n).map(|g| format!("g{g}")).collect();
        Ok(Self {
            table,
            inverse,
            names,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.order() {
            return Err(Error::Dimension(format!(
                "{} names for a group of order {}",
                names.len(),
                self.order()
            )));
        }
        self.names = names;
        Ok(self)
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(table)
            .expect("cyclic table")
            .with_names((0..n).map(|g| g.to_string()).collect())
            .expect("names")
    }

    /// `S_n` on permutations in lexicographic order (identity first), with
    /// `(gh)(x) = g(h(x))`.
    pub fn symmetric(n: usize) -> Self {
        let perms = permutations(n);
        let index: HashMap<&Vec<usize>, usize> = perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let table = perms
            .iter()
            .map(|g| {
                perms
                    .iter()
                    .map(|h| index[&h.iter().map(|&x| g[x]).collect::<Vec<_>>()])
                    .collect()
            })
            .collect();
        let names = perms
            .iter()
            .map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))
            .collect();
        Self::from_table(table)
            .expect("symmetric table")
            .with_names(names)
            .expect("names")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

pub fn check_group(g: &FiniteGroup) -> Report {
    let anchor = "group axioms";
    let n = g.order();
    let mut r = Report::new();
    let latin = (0..n).all(|a| {
        let mut row = vec![false; n];
        let mut col = vec![false; n];
        for b in 0..n {
            row[g.table[a][b]] = true;
            col[g.table[b][a]] = true;
        }
        row.iter().all(|&x| x) && col.iter().all(|&x| x)
    });
    r.flag("latin_square", anchor, latin);
    let identity = (0..n).all(|a| g.table[0][a] == a && g.table[a][0] == a);
    r.flag("identity_is_0", anchor, identity);
    let mut bad = None;
    'outer: for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)) {
                    bad = Some((a, b, c));
                    break 'outer;
                }
            }
        }
    }
    r.flag("associativity", anchor, bad.is_none());
    if let Some((a, b, c)) = bad {
        r.annotate(format!("fails at ({a},{b},{c})"));
    }
    let inverses = (0..n).all(|a| {
        let h = g.inverse[a];
        h < n && g.table[a][h] == 0 && g.table[h][a] == 0
    });
    r.flag("inverse_table", anchor, inverses);
    r
}

/// Sparse columns of a matrix, `cols[j] = [(i, m[i][j]) ...]`.
type SparseCols = Vec<Vec<(u32, C64)>>;

fn sparse_cols(m: &Mat) -> SparseCols {
    (0..m.ncols())
        .map(|j| {
            (0..m.nrows())
                .filter(|&i| m[(i, j)] != ZERO)
                .map(|i| (i as u32, m[(i, j)]))
                .collect()
        })
        .collect()
}

/// A group action on a product system: vertex permutations `alpha[g]` and
/// generator unitaries `w[i][g]` on `X_i`.
#[derive(Debug, Clone)]
pub struct SystemAction {
    group: FiniteGroup,
    alpha: Vec<Vec<usize>>,
    w: Vec<Vec<Mat>>,
    sparse: Vec<Vec<SparseCols>>,
}

impl SystemAction {
    pub fn new(ps: &ProductSystem, group: FiniteGroup, alpha: Vec<Vec<usize>>, w: Vec<Vec<Mat>>) -> Result<Self> {
        let n = group.order();
        let nv = ps.vertices().len();
        if alpha.len() != n {
            return Err(Error::Dimension(format!("{} vertex permutations for {n} group elements", alpha.len())));
        }
        for (g, perm) in alpha.iter().enumerate() {
            let mut seen = vec![false; nv];
            if perm.len() != nv || perm.iter().any(|&v| v >= nv || std::mem::replace(&mut seen[v], true)) {
                return Err(Error::Domain(format!("alpha for element {g} is not a permutation of the vertices")));
            }
        }
        if w.len() != ps.k() {
            return Err(Error::Dimension(format!("unitaries for {} generators, system has {}", w.len(), ps.k())));
        }
        for (i, wi) in w.iter().enumerate() {
            let d = ps.generators()[i].dim();
            if wi.len() != n || wi.iter().any(|m| m.shape() != (d, d)) {
                return Err(Error::Dimension(format!(
                    "generator {i} needs {n} unitaries of size {d}x{d}"
                )));
            }
        }
        let sparse = w.iter().map(|wi| wi.iter().map(sparse_cols).collect()).collect();
        Ok(Self {
            group,
            alpha,
            w,
            sparse,
        })
    }

    /// Every `W = I`, `α = id`.
    pub fn trivial(ps: &ProductSystem, group: FiniteGroup) -> Self {
        let n = group.order();
        let alpha = vec![(0..ps.vertices().len()).collect(); n];
        let w = ps
            .generators()
            .iter()
            .map(|g| vec![Mat::identity(g.dim(), g.dim()); n])
            .collect();
        Self::new(ps, group, alpha, w).expect("trivial action")
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn alpha(&self, g: usize) -> &[usize] {
        &self.alpha[g]
    }

    pub fn generator_unitary(&self, i: usize, g: usize) -> &Mat {
        &self.w[i][g]
    }

    /// `α_g(a)(v) = a(σ_g⁻¹ v)`.
    pub fn alpha_apply(&self, g: usize, a: &AFunc) -> AFunc {
        let mut out = AFunc::zero(a.len());
        for (v, &gv) in self.alpha[g].iter().enumerate() {
            out.0[gv] = a.0[v];
        }
        out
    }

    /// `W_g` applied factorwise to a vector over the paths of `word`,
    /// keeping composable terms only.
    pub fn apply(&self, ps: &ProductSystem, word: &[usize], g: usize, v: &PathVec) -> PathVec {
        let mut out = PathVec::default();
        if word.is_empty() {
            for (k, &c) in &v.0 {
                *out.0.entry(vec![self.alpha[g][k[0] as usize] as u32]).or_default() += c;
            }
            return out;
        }
        for (key, &c) in &v.0 {
            let mut terms: Vec<(PathKey, C64)> = vec![(Vec::with_capacity(word.len()), c)];
            for (pos, &color) in word.iter().enumerate() {
                let basis = ps.generators()[color].basis();
                let col = &self.sparse[color][g][key[pos] as usize];
                let mut next = Vec::with_capacity(terms.len() * col.len());
                for (prefix, coeff) in &terms {
                    for &(e, t) in col {
                        if let Some(&last) = prefix.last() {
                            let prev = &ps.generators()[word[pos - 1]].basis()[last as usize];
                            if prev.source != basis[e as usize].range {
                                continue;
                            }
                        }
                        let mut k = prefix.clone();
                        k.push(e);
                        next.push((k, coeff * t));
                    }
                }
                terms = next;
            }
            for (k, t) in terms {
                *out.0.entry(k).or_default() += t;
            }
        }
        out
    }

    /// `W^p_g` in the path basis of `Y_p`.
    pub fn fiber_unitary(&self, ps: &ProductSystem, p: &IndexVector, g: usize) -> Result<Mat> {
        let f = ps.fiber(p)?;
        if p.is_zero() {
            return Ok(permutation_matrix(&self.alpha[g]));
        }
        let word = p.word();
        let mut m = Mat::zeros(f.dim(), f.dim());
        for (j, key) in f.paths.iter().enumerate() {
            for (k, c) in self.apply(ps, &word, g, &PathVec::basis(key.clone())).0 {
                if let Some(i) = f.path_index(&k) {
                    m[(i, j)] += c;
                }
            }
        }
        Ok(m)
    }

    /// `τ^p_g(t) = W^p_g t (W^p_g)*`.
    pub fn tau(&self, ps: &ProductSystem, p: &IndexVector, g: usize, t: &Mat) -> Result<Mat> {
        let w = self.fiber_unitary(ps, p, g)?;
        if t.shape() != w.shape() {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, fiber {p} has dimension {}",
                t.nrows(),
                t.ncols(),
                w.nrows()
            )));
        }
        Ok(&w * t * w.adjoint())
    }
}

/// Largest deviation of `ψ(x, y)` from `α_g` applied to the inner product, per basis pair.
fn inner_residual(corr: &BasedCorrespondence, act: &SystemAction, g: usize, w: &Mat) -> f64 {
    let n = corr.dim();
    let mut res = 0.0f64;
    for b in 0..n {
        for c in 0..n {
            let lhs = corr.inner_coords(&w.column(b).into_owned(), &w.column(c).into_owned());
            let e = |i| corr.basis_element(i).coords;
            let rhs = act.alpha_apply(g, &corr.inner_coords(&e(b), &e(c)));
            for (x, y) in lhs.0.iter().zip(&rhs.0) {
                res = res.max((x - y).norm());
            }
        }
    }
    res
}

fn module_residual(corr: &BasedCorrespondence, act: &SystemAction, g: usize, w: &Mat) -> f64 {
    let nv = corr.vertices().len();
    let mut res = 0.0f64;
    for v in 0..nv {
        let a = AFunc::indicator(nv, v);
        let ga = act.alpha_apply(g, &a);
        let (Ok(pa), Ok(pga)) = (corr.phi(&a), corr.phi(&ga)) else {
            return f64::INFINITY;
        };
        // right action by a is the diagonal on sources
        let ra = Mat::from_fn(corr.dim(), corr.dim(), |i, j| {
            if i == j { a.0[corr.basis()[i].source] } else { ZERO }
        });
        let rga = Mat::from_fn(corr.dim(), corr.dim(), |i, j| {
            if i == j { ga.0[corr.basis()[i].source] } else { ZERO }
        });
        res = res.max(max_abs_diff(&(w * pa), &(pga * w)));
        res = res.max(max_abs_diff(&(w * ra), &(rga * w)));
    }
    res
}

pub fn check_action(ps: &ProductSystem, act: &SystemAction, tol: Tol) -> Report {
    let anchor = "action compatibilities";
    let group = act.group();
    let n = group.order();
    let mut r = Report::new();
    r.extend_prefixed("group.", check_group(group));
    if !r.passed() {
        return r;
    }

    let alpha_hom = (0..n).all(|g| {
        (0..n).all(|h| {
            let gh = group.mul(g, h);
            (0..ps.vertices().len()).all(|v| act.alpha[gh][v] == act.alpha[g][act.alpha[h][v]])
        })
    });
    r.flag("alpha.homomorphism", anchor, alpha_hom);

    for i in 0..ps.k() {
        let corr = &ps.generators()[i];
        let mut hom = 0.0f64;
        let mut unit = 0.0f64;
        let mut inner = 0.0f64;
        let mut module = 0.0f64;
        for g in 0..n {
            let wg = &act.w[i][g];
            unit = unit.max(unitarity_residual(wg));
            for h in 0..n {
                hom = hom.max(max_abs_diff(&(wg * &act.w[i][h]), &act.w[i][group.mul(g, h)]));
            }
            inner = inner.max(inner_residual(corr, act, g, wg));
            module = module.max(module_residual(corr, act, g, wg));
        }
        r.residual(format!("X{i}.unitary"), anchor, unit, tol.eps_eq);
        r.residual(format!("X{i}.homomorphism"), anchor, hom, tol.eps_eq);
        r.residual(format!("X{i}.inner_product"), anchor, inner, tol.eps_eq);
        r.residual(format!("X{i}.bimodule"), anchor, module, tol.eps_eq);
    }

    // degrees with a zero part reduce to the bimodule check
    let all: Vec<IndexVector> = IndexVector::all_up_to(ps.k(), ps.cap())
        .into_iter()
        .filter(|p| !p.is_zero())
        .collect();
    let mut mult = 0.0f64;
    let mut worst = None;
    for p in &all {
        for q in &all {
            if p.degree() + q.degree() > ps.cap() {
                continue;
            }
            let res = multiplicativity_residual(ps, act, p, q);
            if res > mult {
                mult = res;
                worst = Some(format!("worst at p={p}, q={q}"));
            }
        }
    }
    r.residual("multiplicativity", anchor, mult, tol.eps_eq);
    if let Some(w) = worst {
        r.annotate(w);
    }
    r
}

/// `max_g ‖W^{p+q}_g M_{p,q} − M_{p,q}(W^p_g ⊗ W^q_g)‖` over the path basis.
pub fn multiplicativity_residual(ps: &ProductSystem, act: &SystemAction, p: &IndexVector, q: &IndexVector) -> f64 {
    let word: Vec<usize> = [p.word(), q.word()].concat();
    let normal = p.add(q).word();
    let mut res = 0.0f64;
    for key in ps.word_paths(&word) {
        let v = PathVec::basis(key);
        let routed = ps.route(&word, v.clone(), RoutingOrder::Leftmost);
        for g in 0..act.group().order() {
            let lhs = act.apply(ps, &normal, g, &routed);
            let rhs = ps.route(&word, act.apply(ps, &word, g, &v), RoutingOrder::Leftmost);
            res = res.max(lhs.max_abs_diff(&rhs));
        }
    }
    res
}

pub fn check_phi_equivariance(ps: &ProductSystem, act: &SystemAction, p: &IndexVector, tol: Tol) -> Result<Report> {
    let f = ps.fiber(p)?;
    let nv = ps.vertices().len();
    let mut res = 0.0f64;
    for g in 0..act.group().order() {
        for v in 0..nv {
            let a = AFunc::indicator(nv, v);
            let lhs = act.tau(ps, p, g, &f.corr.phi(&a)?)?;
            let rhs = f.corr.phi(&act.alpha_apply(g, &a))?;
            res = res.max(max_abs_diff(&lhs, &rhs));
        }
    }
    let mut r = Report::new();
    r.residual(format!("phi_equivariance{p}"), "equivariance of the left action", res, tol.eps_eq);
    Ok(r)
}

/// Permutation unitary on a generator sending basis vector `e` to `perm[e]`.
pub fn edge_permutation(perm: &[usize]) -> Mat {
    permutation_matrix(perm)
}
