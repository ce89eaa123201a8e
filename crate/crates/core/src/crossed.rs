//! Crossed products by finite groups: `A⋊G`, the fibers `Y_p⋊G`, the crossed
//! product system and the isomorphism `Λ: K(Y_p⋊G) → K(Y_p)⋊G`.
//!
//! Elements are `G`-indexed tables stored flat: index `s·n + i` holds
//! coordinate `i` of the value at group element `s`. Haar measure is the
//! counting measure.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::action::{check_action, FiniteGroup, SystemAction};
use crate::bratteli::{BratteliDiagram, Level};
use crate::correspondence::{AFunc, TensorProduct};
use crate::error::{Error, Result};
use crate::fdalg::{
    hermitian_eigen, max_abs, max_abs_diff, random_vector, rank, trace, vec_max_abs_diff, wedderburn,
    Mat, StarAlgebra, Tol, Vector, C64, ONE, ZERO,
};
use crate::prodsys::{check_chain, Fiber, IndexVector, ProductSystem};
use crate::report::Report;

/// Samples per randomized check in the suite attached by [`crossed_system`].
pub const SUITE_SAMPLES: usize = 10;
/// Largest total degree the attached suite visits.
pub const SUITE_DEGREE: usize = 3;

fn permute(perm: &[usize], a: &[C64], out: &mut [C64]) {
    for (v, &gv) in perm.iter().enumerate() {
        out[gv] = a[v];
    }
}

fn check_len(v: &Vector, n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Parent(format!(
            "{what} has {} coordinates, expected {n}",
            v.len()
        )));
    }
    Ok(())
}

/// `C(V)⋊G`.
#[derive(Debug, Clone)]
pub struct CrossedAlgebra {
    nv: usize,
    group: FiniteGroup,
    alpha: Vec<Vec<usize>>,
}

impl CrossedAlgebra {
    pub fn new(nv: usize, act: &SystemAction) -> Self {
        let group = act.group().clone();
        let alpha = (0..group.order()).map(|g| act.alpha(g).to_vec()).collect();
        Self { nv, group, alpha }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn dim(&self) -> usize {
        self.nv * self.order()
    }

    /// `α_s(a)` on coordinates.
    pub fn alpha(&self, s: usize, a: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; a.len()];
        permute(&self.alpha[s], a, &mut out);
        out
    }

    pub fn alpha_perm(&self, s: usize) -> &[usize] {
        &self.alpha[s]
    }

    /// `δ_s^a`.
    pub fn point_mass(&self, s: usize, a: &AFunc) -> Vector {
        let mut f = Vector::zeros(self.dim());
        for v in 0..self.nv {
            f[s * self.nv + v] = a.0[v];
        }
        f
    }

    pub fn value(&self, f: &Vector, s: usize) -> AFunc {
        AFunc(f.rows(s * self.nv, self.nv).iter().copied().collect())
    }

    /// `(f·h)(s) = Σ_t f(t)·α_t(h(t⁻¹s))`.
    pub fn ca_mult(&self, f: &Vector, h: &Vector) -> Result<Vector> {
        check_len(f, self.dim(), "crossed-algebra element")?;
        check_len(h, self.dim(), "crossed-algebra element")?;
        Ok(self.mult_unchecked(f, h))
    }

    fn mult_unchecked(&self, f: &Vector, h: &Vector) -> Vector {
        let (n, nv) = (self.order(), self.nv);
        let mut out = Vector::zeros(self.dim());
        for t in 0..n {
            let perm = &self.alpha[t];
            for u in 0..n {
                let s = self.group.mul(t, u);
                for v in 0..nv {
                    let gv = perm[v];
                    out[s * nv + gv] += f[t * nv + gv] * h[u * nv + v];
                }
            }
        }
        out
    }

    /// `f*(s) = α_s(conj f(s⁻¹))`.
    pub fn ca_star(&self, f: &Vector) -> Result<Vector> {
        check_len(f, self.dim(), "crossed-algebra element")?;
        Ok(self.star_unchecked(f))
    }

    fn star_unchecked(&self, f: &Vector) -> Vector {
        let nv = self.nv;
        let mut out = Vector::zeros(self.dim());
        for s in 0..self.order() {
            let si = self.group.inv(s);
            for v in 0..nv {
                out[s * nv + self.alpha[s][v]] = f[si * nv + v].conj();
            }
        }
        out
    }

    /// Matrix of `h ↦ f·h`; a *-representation since the coordinates are
    /// orthonormal for the trace `f ↦ Σ_v f(e)(v)`.
    pub fn left_regular(&self, f: &Vector) -> Result<Mat> {
        check_len(f, self.dim(), "crossed-algebra element")?;
        let (n, nv) = (self.order(), self.nv);
        let mut m = Mat::zeros(self.dim(), self.dim());
        for t in 0..n {
            for u in 0..n {
                let s = self.group.mul(t, u);
                for v in 0..nv {
                    let gv = self.alpha[t][v];
                    m[(s * nv + gv, u * nv + v)] += f[t * nv + gv];
                }
            }
        }
        Ok(m)
    }

    /// Positivity through the left-regular representation.
    pub fn is_positive(&self, f: &Vector, tol: Tol) -> Result<bool> {
        let l = self.left_regular(f)?;
        let scale = max_abs(&l).max(1.0);
        if max_abs_diff(&l, &l.adjoint()) > tol.eps_eq * scale {
            return Ok(false);
        }
        let (vals, _) = hermitian_eigen(&l);
        Ok(vals.first().map_or(true, |&m| m >= -tol.eps_eq * scale))
    }
}

impl StarAlgebra for CrossedAlgebra {
    fn dim(&self) -> usize {
        CrossedAlgebra::dim(self)
    }

    fn mul(&self, a: &Vector, b: &Vector) -> Vector {
        self.mult_unchecked(a, b)
    }

    fn star(&self, a: &Vector) -> Vector {
        self.star_unchecked(a)
    }

    fn ambient_dim(&self) -> usize {
        CrossedAlgebra::dim(self)
    }

    fn represent(&self, a: &Vector) -> Mat {
        self.left_regular(a).expect("coordinates of this algebra")
    }
}

/// `Y_p⋊G` as a right `A⋊G`-module with left `A⋊G`-action.
#[derive(Debug, Clone)]
pub struct CrossedFiber {
    pub p: IndexVector,
    fiber: Arc<Fiber>,
    alg: CrossedAlgebra,
    w: Vec<Mat>,
}

impl CrossedFiber {
    pub fn base(&self) -> &Fiber {
        &self.fiber
    }

    pub fn algebra(&self) -> &CrossedAlgebra {
        &self.alg
    }

    pub fn unitary(&self, g: usize) -> &Mat {
        &self.w[g]
    }

    pub fn base_dim(&self) -> usize {
        self.fiber.dim()
    }

    pub fn dim(&self) -> usize {
        self.fiber.dim() * self.alg.order()
    }

    fn src(&self, i: usize) -> usize {
        self.fiber.corr.basis()[i].source
    }

    fn rng(&self, i: usize) -> usize {
        self.fiber.corr.basis()[i].range
    }

    /// `δ_s^x`.
    pub fn point_mass(&self, s: usize, x: &Vector) -> Vector {
        let d = self.base_dim();
        let mut z = Vector::zeros(self.dim());
        z.rows_mut(s * d, d).copy_from(x);
        z
    }

    pub fn basis_point_mass(&self, s: usize, b: usize) -> Vector {
        let mut z = Vector::zeros(self.dim());
        z[s * self.base_dim() + b] = ONE;
        z
    }

    pub fn value(&self, z: &Vector, s: usize) -> Vector {
        let d = self.base_dim();
        z.rows(s * d, d).into_owned()
    }

    fn check(&self, z: &Vector) -> Result<()> {
        check_len(z, self.dim(), "crossed-fiber element")
    }

    /// `(fζ)(s) = Σ_t φ(f(t)) W_t ζ(t⁻¹s)`.
    pub fn left(&self, f: &Vector, z: &Vector) -> Result<Vector> {
        check_len(f, self.alg.dim(), "crossed-algebra element")?;
        self.check(z)?;
        let (n, d, nv) = (self.alg.order(), self.base_dim(), self.alg.nv);
        let mut out = Vector::zeros(self.dim());
        for u in 0..n {
            let zu = self.value(z, u);
            if zu.iter().all(|c| *c == ZERO) {
                continue;
            }
            for t in 0..n {
                let s = self.alg.group.mul(t, u);
                let wz = &self.w[t] * &zu;
                for i in 0..d {
                    out[s * d + i] += f[t * nv + self.rng(i)] * wz[i];
                }
            }
        }
        Ok(out)
    }

    /// `(ζf)(s) = Σ_t ζ(t)·α_t(f(t⁻¹s))`.
    pub fn right(&self, z: &Vector, f: &Vector) -> Result<Vector> {
        self.check(z)?;
        check_len(f, self.alg.dim(), "crossed-algebra element")?;
        let (n, d, nv) = (self.alg.order(), self.base_dim(), self.alg.nv);
        let mut out = Vector::zeros(self.dim());
        for t in 0..n {
            for u in 0..n {
                let s = self.alg.group.mul(t, u);
                let fu: Vec<C64> = f.rows(u * nv, nv).iter().copied().collect();
                let a = self.alg.alpha(t, &fu);
                for i in 0..d {
                    out[s * d + i] += z[t * d + i] * a[self.src(i)];
                }
            }
        }
        Ok(out)
    }

    /// `⟨ζ,η⟩(s) = Σ_t α_{t⁻¹}⟨ζ(t), η(ts)⟩`.
    pub fn inner(&self, z: &Vector, y: &Vector) -> Result<Vector> {
        self.check(z)?;
        self.check(y)?;
        let (n, d, nv) = (self.alg.order(), self.base_dim(), self.alg.nv);
        let mut out = Vector::zeros(self.alg.dim());
        let mut local = vec![ZERO; nv];
        for t in 0..n {
            let perm = &self.alg.alpha[self.alg.group.inv(t)];
            for s in 0..n {
                let ts = self.alg.group.mul(t, s);
                local.iter_mut().for_each(|c| *c = ZERO);
                for i in 0..d {
                    local[self.src(i)] += z[t * d + i].conj() * y[ts * d + i];
                }
                for v in 0..nv {
                    out[s * nv + perm[v]] += local[v];
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `Θ_{ζ,η}: ξ ↦ ζ·⟨η,ξ⟩`. Entry `((s,i),(w,j))` is
    /// `Σ_t ζ(t)_i conj(η(w s⁻¹ t)_j)` when `α_{sw⁻¹}` carries `source(j)` to `source(i)`.
    pub fn theta(&self, z: &Vector, y: &Vector) -> Result<Mat> {
        self.check(z)?;
        self.check(y)?;
        let (n, d) = (self.alg.order(), self.base_dim());
        let g = &self.alg.group;
        let mut m = Mat::zeros(self.dim(), self.dim());
        for s in 0..n {
            for w in 0..n {
                let sw = g.mul(s, g.inv(w));
                let ws = g.mul(w, g.inv(s));
                let perm = &self.alg.alpha[sw];
                for t in 0..n {
                    let r = g.mul(ws, t);
                    for i in 0..d {
                        let zi = z[t * d + i];
                        if zi == ZERO {
                            continue;
                        }
                        for j in 0..d {
                            if perm[self.src(j)] == self.src(i) {
                                m[(s * d + i, w * d + j)] += zi * y[r * d + j].conj();
                            }
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// Matrix of `L_f: ζ ↦ fζ`.
    pub fn left_operator(&self, f: &Vector) -> Result<Mat> {
        check_len(f, self.alg.dim(), "crossed-algebra element")?;
        let (n, d, nv) = (self.alg.order(), self.base_dim(), self.alg.nv);
        let g = &self.alg.group;
        let mut m = Mat::zeros(self.dim(), self.dim());
        for s in 0..n {
            for u in 0..n {
                let t = g.mul(s, g.inv(u));
                for i in 0..d {
                    let fi = f[t * nv + self.rng(i)];
                    if fi == ZERO {
                        continue;
                    }
                    for j in 0..d {
                        m[(s * d + i, u * d + j)] += fi * self.w[t][(i, j)];
                    }
                }
            }
        }
        Ok(m)
    }

    /// Triples `(x, c, y)` indexing the rank-ones `Θ_{δ_e^x, δ_c^y}` with
    /// `source(y) = α_c(source(x))`, a basis of `K(Y_p⋊G)`.
    pub fn canonical_basis(&self) -> Vec<(usize, usize, usize)> {
        let d = self.base_dim();
        let mut out = Vec::new();
        for c in 0..self.alg.order() {
            for x in 0..d {
                for y in 0..d {
                    if self.src(y) == self.alg.alpha[c][self.src(x)] {
                        out.push((x, c, y));
                    }
                }
            }
        }
        out
    }
}

/// `K(Y_p)⋊_τ G` as tables of matrices; coordinates run over the matrix
/// units `E_bc` with `source(b) = source(c)` at each group element.
#[derive(Debug, Clone)]
pub struct CompactCrossed {
    d: usize,
    group: FiniteGroup,
    w: Vec<Mat>,
    support: Vec<(usize, usize)>,
}

impl CompactCrossed {
    pub fn new(cf: &CrossedFiber) -> Self {
        let d = cf.base_dim();
        let mut support = Vec::new();
        for b in 0..d {
            for c in 0..d {
                if cf.src(b) == cf.src(c) {
                    support.push((b, c));
                }
            }
        }
        Self {
            d,
            group: cf.alg.group.clone(),
            w: cf.w.clone(),
            support,
        }
    }

    pub fn base_dim(&self) -> usize {
        self.support.len()
    }

    pub fn tau(&self, t: usize, x: &Mat) -> Mat {
        &self.w[t] * x * self.w[t].adjoint()
    }

    /// `(S·S')(s) = Σ_t S(t) τ_t(S'(t⁻¹s))`.
    pub fn mult(&self, a: &[Mat], b: &[Mat]) -> Vec<Mat> {
        let n = self.group.order();
        let mut out = vec![Mat::zeros(self.d, self.d); n];
        for u in 0..n {
            if b[u].iter().all(|c| *c == ZERO) {
                continue;
            }
            for t in 0..n {
                let s = self.group.mul(t, u);
                out[s] += &a[t] * self.tau(t, &b[u]);
            }
        }
        out
    }

    /// `S*(s) = τ_s(S(s⁻¹)*)`.
    pub fn star(&self, a: &[Mat]) -> Vec<Mat> {
        (0..self.group.order())
            .map(|s| self.tau(s, &a[self.group.inv(s)].adjoint()))
            .collect()
    }

    pub fn to_table(&self, v: &Vector) -> Vec<Mat> {
        let k = self.support.len();
        (0..self.group.order())
            .map(|s| {
                let mut m = Mat::zeros(self.d, self.d);
                for (i, &(b, c)) in self.support.iter().enumerate() {
                    m[(b, c)] = v[s * k + i];
                }
                m
            })
            .collect()
    }

    /// Coordinates, together with the largest entry outside the support.
    pub fn from_table(&self, a: &[Mat]) -> (Vector, f64) {
        let k = self.support.len();
        let mut v = Vector::zeros(k * self.group.order());
        let mut off = 0.0f64;
        for (s, m) in a.iter().enumerate() {
            let mut seen = vec![false; self.d * self.d];
            for (i, &(b, c)) in self.support.iter().enumerate() {
                v[s * k + i] = m[(b, c)];
                seen[b * self.d + c] = true;
            }
            for b in 0..self.d {
                for c in 0..self.d {
                    if !seen[b * self.d + c] {
                        off = off.max(m[(b, c)].norm());
                    }
                }
            }
        }
        (v, off)
    }
}

impl StarAlgebra for CompactCrossed {
    fn dim(&self) -> usize {
        self.support.len() * self.group.order()
    }

    fn mul(&self, a: &Vector, b: &Vector) -> Vector {
        self.from_table(&self.mult(&self.to_table(a), &self.to_table(b))).0
    }

    fn star(&self, a: &Vector) -> Vector {
        self.from_table(&self.star(&self.to_table(a))).0
    }

    fn ambient_dim(&self) -> usize {
        self.dim()
    }

    fn represent(&self, a: &Vector) -> Mat {
        let n = self.dim();
        let at = self.to_table(a);
        let mut m = Mat::zeros(n, n);
        for k in 0..n {
            let col = self.from_table(&self.mult(&at, &self.to_table(&self.basis_vector(k)))).0;
            m.set_column(k, &col);
        }
        m
    }
}

/// `K(Y_p⋊G)` in the coordinates of its canonical basis, where
/// `B_(x,c,y) B_(x′,c′,y′) = [y = x′] B_(x,c′c,y′)` and `B_(x,c,y)* = B_(y,c⁻¹,x)`.
pub struct CompactOperators<'a> {
    cs: &'a CrossedSystem,
    p: IndexVector,
    basis: Vec<(usize, usize, usize)>,
    index: HashMap<(usize, usize, usize), usize>,
    by_first: Vec<Vec<usize>>,
    ambient: usize,
}

impl<'a> CompactOperators<'a> {
    pub fn new(cs: &'a CrossedSystem, p: &IndexVector) -> Result<Self> {
        let cf = cs.fiber(p)?;
        let basis = cs.canonical_basis(p)?;
        let index = basis.iter().enumerate().map(|(k, &b)| (b, k)).collect();
        let mut by_first = vec![Vec::new(); cf.base_dim()];
        for (k, &(x, _, _)) in basis.iter().enumerate() {
            by_first[x].push(k);
        }
        Ok(Self {
            cs,
            p: p.clone(),
            basis,
            index,
            by_first,
            ambient: cf.dim(),
        })
    }
}

impl StarAlgebra for CompactOperators<'_> {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn mul(&self, a: &Vector, b: &Vector) -> Vector {
        let g = self.cs.alg.group();
        let mut out = Vector::zeros(self.basis.len());
        for (k, &(x, c, y)) in self.basis.iter().enumerate() {
            if a[k] == ZERO {
                continue;
            }
            for &l in &self.by_first[y] {
                if b[l] == ZERO {
                    continue;
                }
                let (_, c2, y2) = self.basis[l];
                out[self.index[&(x, g.mul(c2, c), y2)]] += a[k] * b[l];
            }
        }
        out
    }

    fn star(&self, a: &Vector) -> Vector {
        let g = self.cs.alg.group();
        let mut out = Vector::zeros(self.basis.len());
        for (k, &(x, c, y)) in self.basis.iter().enumerate() {
            out[self.index[&(y, g.inv(c), x)]] = a[k].conj();
        }
        out
    }

    fn ambient_dim(&self) -> usize {
        self.ambient
    }

    fn represent(&self, a: &Vector) -> Mat {
        self.cs.compose(&self.p, a).expect("coefficients of the canonical basis")
    }
}

type Sparse = Vec<(usize, usize, C64)>;

/// The canonical basis of `K(Y_p⋊G)` with its images under `Λ`.
#[derive(Debug)]
struct LambdaData {
    basis: Vec<(usize, usize, usize)>,
    mats: Vec<Sparse>,
    gram: GramSolver,
    /// `Λ(Θ_{δ_e^x, δ_c^y})` is `Θ_{x, z}` at `s`, stored as `(s, x, z)`.
    images: Vec<(usize, usize, Vector)>,
    kcp: CompactCrossed,
}

#[derive(Debug)]
enum GramSolver {
    Diagonal(Vec<f64>),
    Dense(Mat),
}

/// Per-degree materialized data.
struct MultData {
    m: Mat,
    tensor: TensorProduct,
}

pub struct CrossedSystem {
    ps: ProductSystem,
    act: SystemAction,
    alg: CrossedAlgebra,
    tol: Tol,
    report: Report,
    fibers: Mutex<HashMap<IndexVector, Arc<CrossedFiber>>>,
    mults: Mutex<HashMap<(IndexVector, IndexVector), Arc<MultData>>>,
    lambdas: Mutex<HashMap<IndexVector, Arc<LambdaData>>>,
}

impl std::fmt::Debug for CrossedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CrossedSystem")
            .field("ps", &self.ps)
            .field("group_order", &self.alg.order())
            .field("passed", &self.report.passed())
            .finish()
    }
}

/// Builds `Y⋊G` after checking the base system and the action; the crossed
/// axiom suite (with [`SUITE_SAMPLES`] samples, seed 0) is attached.
pub fn crossed_system(ps: &ProductSystem, act: &SystemAction) -> Result<CrossedSystem> {
    crossed_system_with(ps, act, Tol::default(), SUITE_SAMPLES, 0)
}

pub fn crossed_system_with(
    ps: &ProductSystem,
    act: &SystemAction,
    tol: Tol,
    samples: usize,
    seed: u64,
) -> Result<CrossedSystem> {
    let mut pre = Report::new();
    pre.extend_prefixed("system.", ps.check_axioms(tol));
    pre.extend_prefixed("action.", check_action(ps, act, tol));
    if !pre.passed() {
        return Err(Error::Validation(Box::new(pre)));
    }
    let mut cs = CrossedSystem {
        ps: ps.clone(),
        act: act.clone(),
        alg: CrossedAlgebra::new(ps.vertices().len(), act),
        tol,
        report: Report::new(),
        fibers: Mutex::new(HashMap::new()),
        mults: Mutex::new(HashMap::new()),
        lambdas: Mutex::new(HashMap::new()),
    };
    let suite = crossed_axioms(&cs, samples, seed)?;
    cs.report = suite;
    Ok(cs)
}

impl CrossedSystem {
    pub fn base(&self) -> &ProductSystem {
        &self.ps
    }

    pub fn action(&self) -> &SystemAction {
        &self.act
    }

    pub fn algebra(&self) -> &CrossedAlgebra {
        &self.alg
    }

    pub fn report(&self) -> &Report {
        &self.report
    }

    pub fn cap(&self) -> usize {
        self.ps.cap()
    }

    pub fn tol(&self) -> Tol {
        self.tol
    }

    pub fn fiber(&self, p: &IndexVector) -> Result<Arc<CrossedFiber>> {
        if let Some(f) = self.fibers.lock().expect("fiber cache").get(p) {
            return Ok(f.clone());
        }
        let fiber = self.ps.fiber(p)?;
        let w = (0..self.alg.order())
            .map(|g| self.act.fiber_unitary(&self.ps, p, g))
            .collect::<Result<Vec<_>>>()?;
        let cf = Arc::new(CrossedFiber {
            p: p.clone(),
            fiber,
            alg: self.alg.clone(),
            w,
        });
        self.fibers
            .lock()
            .expect("fiber cache")
            .insert(p.clone(), cf.clone());
        Ok(cf)
    }

    fn mult_data(&self, p: &IndexVector, q: &IndexVector) -> Result<Arc<MultData>> {
        let key = (p.clone(), q.clone());
        if let Some(m) = self.mults.lock().expect("mult cache").get(&key) {
            return Ok(m.clone());
        }
        let data = Arc::new(MultData {
            m: self.ps.mult_map(p, q)?,
            tensor: self.ps.fiber_tensor(p, q)?,
        });
        self.mults
            .lock()
            .expect("mult cache")
            .insert(key, data.clone());
        Ok(data)
    }

    /// `(ζη)(s) = Σ_t M_{p,q}(ζ(t) ⊗ W^q_t η(t⁻¹s))`.
    pub fn cp_mult(&self, p: &IndexVector, z: &Vector, q: &IndexVector, y: &Vector) -> Result<Vector> {
        let (fp, fq) = (self.fiber(p)?, self.fiber(q)?);
        fp.check(z)?;
        fq.check(y)?;
        let data = self.mult_data(p, q)?;
        let fpq = self.fiber(&p.add(q))?;
        let n = self.alg.order();
        let g = &self.alg.group;
        let npairs = data.tensor.pairs.len();
        let mut acc = vec![Vector::zeros(npairs); n];
        for u in 0..n {
            let yu = fq.value(y, u);
            if yu.iter().all(|c| *c == ZERO) {
                continue;
            }
            for t in 0..n {
                let zt = fp.value(z, t);
                if zt.iter().all(|c| *c == ZERO) {
                    continue;
                }
                let wy = &fq.w[t] * &yu;
                acc[g.mul(t, u)] += data.tensor.simple_tensor(&zt, &wy);
            }
        }
        let d = fpq.base_dim();
        let mut out = Vector::zeros(fpq.dim());
        for (s, a) in acc.iter().enumerate() {
            out.rows_mut(s * d, d).copy_from(&(&data.m * a));
        }
        Ok(out)
    }

    /// Columns `Ω(δ_e^x ⊗ δ_u^y)` over composable pairs `(x, y)` and `u ∈ G`,
    /// pair-major.
    pub fn omega(&self, p: &IndexVector, q: &IndexVector) -> Result<Mat> {
        let (fp, fq) = (self.fiber(p)?, self.fiber(q)?);
        let data = self.mult_data(p, q)?;
        let fpq = self.fiber(&p.add(q))?;
        let n = self.alg.order();
        let mut m = Mat::zeros(fpq.dim(), data.tensor.pairs.len() * n);
        for (k, &(x, y)) in data.tensor.pairs.iter().enumerate() {
            for u in 0..n {
                let col = self.cp_mult(p, &fp.basis_point_mass(0, x), q, &fq.basis_point_mass(u, y))?;
                m.set_column(k * n + u, &col);
            }
        }
        Ok(m)
    }

    fn lambda_data(&self, p: &IndexVector) -> Result<Arc<LambdaData>> {
        if let Some(l) = self.lambdas.lock().expect("lambda cache").get(p) {
            return Ok(l.clone());
        }
        let cf = self.fiber(p)?;
        let d = cf.base_dim();
        let g = &self.alg.group;
        let basis = cf.canonical_basis();
        let mut mats = Vec::with_capacity(basis.len());
        let mut images = Vec::with_capacity(basis.len());
        let n = self.alg.order();
        for &(x, c, y) in &basis {
            // Θ_{δ_e^x, δ_c^y} = Σ_s E_{(s,x),(cs,y)}
            let sparse: Sparse = (0..n).map(|s| (s * d + x, g.mul(c, s) * d + y, ONE)).collect();
            mats.push(sparse);
            let s = g.inv(c);
            let mut ey = Vector::zeros(d);
            ey[y] = ONE;
            images.push((s, x, &cf.w[s] * ey));
        }
        let gram = gram_solver(&mats, self.tol)?;
        let data = Arc::new(LambdaData {
            basis,
            mats,
            gram,
            images,
            kcp: CompactCrossed::new(&cf),
        });
        self.lambdas
            .lock()
            .expect("lambda cache")
            .insert(p.clone(), data.clone());
        Ok(data)
    }

    /// Coefficients of `t` against the canonical rank-one basis of `K(Y_p⋊G)`.
    pub fn decompose(&self, p: &IndexVector, t: &Mat) -> Result<Vector> {
        let cf = self.fiber(p)?;
        if t.shape() != (cf.dim(), cf.dim()) {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, Y_p⋊G has dimension {}",
                t.nrows(),
                t.ncols(),
                cf.dim()
            )));
        }
        let data = self.lambda_data(p)?;
        let rhs = Vector::from_iterator(
            data.mats.len(),
            data.mats
                .iter()
                .map(|b| b.iter().map(|&(i, j, v)| v.conj() * t[(i, j)]).sum::<C64>()),
        );
        let coeffs = match &data.gram {
            GramSolver::Diagonal(g) => Vector::from_fn(rhs.len(), |k, _| rhs[k] / g[k]),
            GramSolver::Dense(g) => g
                .clone()
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Decomposition("singular Gram matrix".into()))?,
        };
        let mut recon = Mat::zeros(t.nrows(), t.ncols());
        for (k, b) in data.mats.iter().enumerate() {
            for &(i, j, v) in b {
                recon[(i, j)] += coeffs[k] * v;
            }
        }
        let res = max_abs_diff(&recon, t);
        if res > self.tol.eps_eq * max_abs(t).max(1.0) {
            return Err(Error::Decomposition(format!(
                "operator is not in the span of the rank-one basis (residual {res:e})"
            )));
        }
        Ok(coeffs)
    }

    /// The operator with the given coefficients on the canonical basis.
    pub fn compose(&self, p: &IndexVector, coeffs: &Vector) -> Result<Mat> {
        let cf = self.fiber(p)?;
        let data = self.lambda_data(p)?;
        check_len(coeffs, data.mats.len(), "coefficient vector")?;
        let mut t = Mat::zeros(cf.dim(), cf.dim());
        for (k, b) in data.mats.iter().enumerate() {
            for &(i, j, v) in b {
                t[(i, j)] += coeffs[k] * v;
            }
        }
        Ok(t)
    }

    pub fn canonical_basis(&self, p: &IndexVector) -> Result<Vec<(usize, usize, usize)>> {
        Ok(self.lambda_data(p)?.basis.clone())
    }

    pub fn compact_crossed(&self, p: &IndexVector) -> Result<CompactCrossed> {
        Ok(self.lambda_data(p)?.kcp.clone())
    }

    fn lambda_of_coeffs(&self, p: &IndexVector, coeffs: &Vector) -> Result<Vec<Mat>> {
        let cf = self.fiber(p)?;
        let data = self.lambda_data(p)?;
        let d = cf.base_dim();
        let mut out = vec![Mat::zeros(d, d); self.alg.order()];
        for (k, (s, x, z)) in data.images.iter().enumerate() {
            let c = coeffs[k];
            if c == ZERO {
                continue;
            }
            for j in 0..d {
                if cf.src(j) == cf.src(*x) {
                    out[*s][(*x, j)] += c * z[j].conj();
                }
            }
        }
        Ok(out)
    }

    /// `Λ(T)` as a table `G → K(Y_p)`.
    pub fn lambda_map(&self, p: &IndexVector, t: &Mat) -> Result<Vec<Mat>> {
        let coeffs = self.decompose(p, t)?;
        self.lambda_of_coeffs(p, &coeffs)
    }

    /// `Λ(Θ_{ζ,η})(s) = Σ_r Θ_{ζ(r), W_s η(s⁻¹r)}`, evaluated directly.
    pub fn lambda_rank_one(&self, p: &IndexVector, z: &Vector, y: &Vector) -> Result<Vec<Mat>> {
        let cf = self.fiber(p)?;
        cf.check(z)?;
        cf.check(y)?;
        let g = &self.alg.group;
        let n = self.alg.order();
        let d = cf.base_dim();
        let mut out = vec![Mat::zeros(d, d); n];
        for (s, slot) in out.iter_mut().enumerate() {
            for r in 0..n {
                let zr = cf.value(z, r);
                let yr = cf.value(y, g.mul(g.inv(s), r));
                *slot += cf.fiber.corr.theta_coords(&zr, &(&cf.w[s] * yr));
            }
        }
        Ok(out)
    }

    /// The connecting map `K(Y_p⋊G) → K(Y_{p+d}⋊G)`, `T ↦ Ω(T ⊗ 1)Ω*`,
    /// via the frame `{δ_e^c}` of `Y_d⋊G`.
    pub fn embed(&self, p: &IndexVector, step: &IndexVector, t: &Mat) -> Result<Mat> {
        let coeffs = self.decompose(p, t)?;
        let data = self.lambda_data(p)?;
        let (fp, fd) = (self.fiber(p)?, self.fiber(step)?);
        let fpd = self.fiber(&p.add(step))?;
        let mut out = Mat::zeros(fpd.dim(), fpd.dim());
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (k, &(x, c, y)) in data.basis.iter().enumerate() {
            if coeffs[k].norm() <= 1e-14 * scale {
                continue;
            }
            for b in 0..fd.base_dim() {
                let frame = fd.basis_point_mass(0, b);
                let a = self.cp_mult(p, &fp.basis_point_mass(0, x), step, &frame)?;
                let bb = self.cp_mult(p, &fp.basis_point_mass(c, y), step, &frame)?;
                out += fpd.theta(&a, &bb)? * coeffs[k];
            }
        }
        Ok(out)
    }
}

fn gram_solver(mats: &[Sparse], tol: Tol) -> Result<GramSolver> {
    let mut by_pos: HashMap<(usize, usize), Vec<(usize, C64)>> = HashMap::new();
    for (k, b) in mats.iter().enumerate() {
        for &(i, j, v) in b {
            by_pos.entry((i, j)).or_default().push((k, v));
        }
    }
    if by_pos.values().all(|l| l.len() == 1) {
        let diag = mats
            .iter()
            .map(|b| b.iter().map(|&(_, _, v)| v.norm_sqr()).sum())
            .collect();
        return Ok(GramSolver::Diagonal(diag));
    }
    let n = mats.len();
    let mut g = Mat::zeros(n, n);
    for list in by_pos.values() {
        for &(k, a) in list {
            for &(l, b) in list {
                g[(k, l)] += a.conj() * b;
            }
        }
    }
    let r = rank(&g, tol)?;
    if r != n {
        return Err(Error::Decomposition(format!(
            "rank-one spanning set has rank {r} of {n}"
        )));
    }
    Ok(GramSolver::Dense(g))
}

/// Rank of a column set, splitting it into groups with disjoint supports.
fn block_rank(cols: &[Vec<(usize, C64)>], tol: Tol) -> Result<usize> {
    let mut parent: Vec<usize> = (0..cols.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (k, col) in cols.iter().enumerate() {
        for &(i, _) in col {
            if let Some(&o) = owner.get(&i) {
                let (a, b) = (find(&mut parent, o), find(&mut parent, k));
                parent[a] = b;
            } else {
                owner.insert(i, k);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for k in 0..cols.len() {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(k);
    }
    let mut keys: Vec<_> = groups.keys().copied().collect();
    keys.sort_unstable();
    let mut total = 0;
    for key in keys {
        let members = &groups[&key];
        let mut rows: Vec<usize> = members.iter().flat_map(|&k| cols[k].iter().map(|&(i, _)| i)).collect();
        rows.sort_unstable();
        rows.dedup();
        let idx: HashMap<usize, usize> = rows.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let mut m = Mat::zeros(rows.len(), members.len());
        for (j, &k) in members.iter().enumerate() {
            for &(i, v) in &cols[k] {
                m[(idx[&i], j)] += v;
            }
        }
        total += rank(&m, tol)?;
    }
    Ok(total)
}

fn random_element(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    random_vector(rng, n)
}

/// All `(p, q)` with `|p + q| ≤ cap`.
fn degree_pairs(k: usize, cap: usize, nonzero: bool) -> Vec<(IndexVector, IndexVector)> {
    let all = IndexVector::all_up_to(k, cap);
    let mut out = Vec::new();
    for p in &all {
        for q in &all {
            if p.degree() + q.degree() <= cap && !(nonzero && (p.is_zero() || q.is_zero())) {
                out.push((p.clone(), q.clone()));
            }
        }
    }
    out
}

/// Generic product-system axioms over the noncommutative base `A⋊G`, up to
/// total degree [`SUITE_DEGREE`].
pub fn crossed_axioms(cs: &CrossedSystem, samples: usize, seed: u64) -> Result<Report> {
    let anchor = "crossed product system";
    let tol = cs.tol;
    let mut r = Report::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alg = &cs.alg;
    let k = cs.ps.k();

    let (mut assoc, mut star) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let (f, g, h) = (
            random_element(&mut rng, alg.dim()),
            random_element(&mut rng, alg.dim()),
            random_element(&mut rng, alg.dim()),
        );
        let fg = alg.ca_mult(&f, &g)?;
        assoc = assoc.max(vec_max_abs_diff(&alg.ca_mult(&fg, &h)?, &alg.ca_mult(&f, &alg.ca_mult(&g, &h)?)?));
        let lhs = alg.ca_star(&fg)?;
        let rhs = alg.ca_mult(&alg.ca_star(&g)?, &alg.ca_star(&f)?)?;
        star = star.max(vec_max_abs_diff(&lhs, &rhs));
        star = star.max(vec_max_abs_diff(&alg.ca_star(&alg.ca_star(&f)?)?, &f));
    }
    r.residual("algebra.associativity", anchor, assoc, tol.eps_eq);
    r.residual("algebra.involution", anchor, star, tol.eps_eq);

    let top = cs.cap().min(SUITE_DEGREE);
    let mut iso = 0.0f64;
    let mut onto = true;
    let mut first_bad = None;
    for (p, q) in degree_pairs(k, top, false) {
        iso = iso.max(inner_identity_residual(cs, &p, &q, samples.max(1), &mut rng)?);
        let om = cs.omega(&p, &q)?;
        let cols: Vec<Vec<(usize, C64)>> = (0..om.ncols())
            .map(|c| (0..om.nrows()).filter(|&i| om[(i, c)] != ZERO).map(|i| (i, om[(i, c)])).collect())
            .collect();
        let rk = block_rank(&cols, tol)?;
        let target = cs.fiber(&p.add(&q))?.dim();
        if rk != target && onto {
            onto = false;
            first_bad = Some(format!("rank {rk} of {target} at p={p}, q={q}"));
        }
    }
    r.residual("omega.isometry", anchor, iso, tol.eps_eq);
    r.flag("omega.onto", anchor, onto);
    if let Some(note) = first_bad {
        r.annotate(note);
    }

    let nonzero: Vec<IndexVector> = IndexVector::all_up_to(k, top)
        .into_iter()
        .filter(|p| !p.is_zero())
        .collect();
    let mut assoc = 0.0f64;
    let per_triple = samples.clamp(1, 3);
    for p in &nonzero {
        for q in &nonzero {
            for s in &nonzero {
                if p.degree() + q.degree() + s.degree() > top {
                    continue;
                }
                let (dp, dq, ds) = (cs.fiber(p)?.dim(), cs.fiber(q)?.dim(), cs.fiber(s)?.dim());
                for _ in 0..per_triple {
                    let (z, y, x) = (
                        random_element(&mut rng, dp),
                        random_element(&mut rng, dq),
                        random_element(&mut rng, ds),
                    );
                    let left = cs.cp_mult(&p.add(q), &cs.cp_mult(p, &z, q, &y)?, s, &x)?;
                    let right = cs.cp_mult(p, &z, &q.add(s), &cs.cp_mult(q, &y, s, &x)?)?;
                    assoc = assoc.max(vec_max_abs_diff(&left, &right));
                }
            }
        }
    }
    r.residual("associativity", anchor, assoc, tol.eps_eq);

    let zero = IndexVector::zero(k);
    let mut unit = 0.0f64;
    for p in IndexVector::all_up_to(k, top) {
        let fp = cs.fiber(&p)?;
        for _ in 0..samples.max(1) {
            let f = random_element(&mut rng, alg.dim());
            let z = random_element(&mut rng, fp.dim());
            unit = unit.max(vec_max_abs_diff(&cs.cp_mult(&zero, &f, &p, &z)?, &fp.left(&f, &z)?));
            unit = unit.max(vec_max_abs_diff(&cs.cp_mult(&p, &z, &zero, &f)?, &fp.right(&z, &f)?));
        }
    }
    r.residual("unit_laws", anchor, unit, tol.eps_eq);
    Ok(r)
}

fn inner_identity_residual(
    cs: &CrossedSystem,
    p: &IndexVector,
    q: &IndexVector,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let (fp, fq) = (cs.fiber(p)?, cs.fiber(q)?);
    let fpq = cs.fiber(&p.add(q))?;
    let mut res = 0.0f64;
    for _ in 0..samples {
        let zi = random_element(rng, fp.dim());
        let zj = random_element(rng, fp.dim());
        let yi = random_element(rng, fq.dim());
        let yj = random_element(rng, fq.dim());
        let lhs = fq.inner(&yi, &fq.left(&fp.inner(&zi, &zj)?, &yj)?)?;
        let rhs = fpq.inner(&cs.cp_mult(p, &zi, q, &yi)?, &cs.cp_mult(p, &zj, q, &yj)?)?;
        res = res.max(vec_max_abs_diff(&lhs, &rhs));
    }
    Ok(res)
}

/// Isometry of `Ω_{p,q}` on random pairs:
/// `⟨η_i, ⟨ζ_i,ζ_j⟩·η_j⟩ = ⟨ζ_iη_i, ζ_jη_j⟩`.
pub fn check_inner_identity(
    cs: &CrossedSystem,
    p: &IndexVector,
    q: &IndexVector,
    samples: usize,
    seed: u64,
) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = inner_identity_residual(cs, p, q, samples, &mut rng)?;
    let mut r = Report::new();
    r.residual(
        format!("inner_identity{p}{q}"),
        "isometry of the crossed multiplication",
        res,
        cs.tol.eps_eq,
    );
    Ok(r)
}

/// Kernel dimension of `f ↦ L_f` on `Y_p⋊G`. `L_f` is a right-module map, so
/// it vanishes iff it kills the generators `δ_e^x`.
pub fn crossed_faithfulness(cs: &CrossedSystem, p: &IndexVector) -> Result<(bool, usize)> {
    let cf = cs.fiber(p)?;
    let alg = &cs.alg;
    let d = cf.base_dim();
    let rows = d * cf.dim();
    let mut m = Mat::zeros(rows, alg.dim());
    for k in 0..alg.dim() {
        let f = alg.basis_vector(k);
        for x in 0..d {
            let fz = cf.left(&f, &cf.basis_point_mass(0, x))?;
            m.view_mut((x * cf.dim(), k), (cf.dim(), 1)).copy_from(&fz);
        }
    }
    let kernel = alg.dim() - rank(&m, cs.tol)?;
    Ok((kernel == 0, kernel))
}

fn random_operator(cs: &CrossedSystem, p: &IndexVector, rng: &mut ChaCha8Rng) -> Result<Mat> {
    let n = cs.lambda_data(p)?.mats.len();
    cs.compose(p, &random_element(rng, n))
}

fn table_diff(a: &[Mat], b: &[Mat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max)
}

pub fn check_lambda_isomorphism(cs: &CrossedSystem, p: &IndexVector, samples: usize, seed: u64) -> Result<Report> {
    let anchor = "K(Y_p)⋊G ≅ K(Y_p⋊G)";
    let tol = cs.tol;
    let cf = cs.fiber(p)?;
    let data = cs.lambda_data(p)?;
    let kcp = &data.kcp;
    let target = kcp.base_dim() * cs.alg.order();
    let mut r = Report::new();

    let cols: Vec<Vec<(usize, C64)>> = (0..data.basis.len())
        .map(|k| {
            let mut unit = Vector::zeros(data.basis.len());
            unit[k] = ONE;
            let table = cs.lambda_of_coeffs(p, &unit)?;
            let (v, _) = kcp.from_table(&table);
            Ok((0..v.len()).filter(|&i| v[i] != ZERO).map(|i| (i, v[i])).collect())
        })
        .collect::<Result<_>>()?;
    let rk = block_rank(&cols, tol)?;
    let bijective = rk == target && data.basis.len() == target;
    r.integer(format!("lambda{p}.rank"), anchor, rk as i64, bijective);
    r.annotate(format!("domain dimension {}, target dimension {target}", data.basis.len()));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mult, mut star, mut left, mut off) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let t = random_operator(cs, p, &mut rng)?;
        let u = random_operator(cs, p, &mut rng)?;
        let lt = cs.lambda_map(p, &t)?;
        let lu = cs.lambda_map(p, &u)?;
        let ltu = cs.lambda_map(p, &(&t * &u))?;
        mult = mult.max(table_diff(&ltu, &kcp.mult(&lt, &lu)));
        star = star.max(table_diff(&cs.lambda_map(p, &t.adjoint())?, &kcp.star(&lt)));
        off = off.max(kcp.from_table(&lt).1);

        let f = random_element(&mut rng, cs.alg.dim());
        let lf = cs.lambda_map(p, &cf.left_operator(&f)?)?;
        let expected: Vec<Mat> = (0..cs.alg.order())
            .map(|s| cf.fiber.corr.phi(&cs.alg.value(&f, s)))
            .collect::<Result<_>>()?;
        left = left.max(table_diff(&lf, &expected));
    }
    r.residual(format!("lambda{p}.multiplicative"), anchor, mult, tol.eps_eq);
    r.residual(format!("lambda{p}.involution"), anchor, star, tol.eps_eq);
    r.residual(format!("lambda{p}.left_action"), anchor, left, tol.eps_eq);
    r.residual(format!("lambda{p}.compact_support"), anchor, off, tol.eps_eq);
    Ok(r)
}

/// Block sizes of `(K(Y_p), τ)⋊G` from its left-regular representation.
pub fn reference_core_blocks(cs: &CrossedSystem, p: &IndexVector) -> Result<Vec<usize>> {
    let kcp = cs.compact_crossed(p)?;
    let w = wedderburn(&kcp, cs.tol)?;
    let mut sizes: Vec<usize> = w.blocks.iter().map(|b| b.size).collect();
    sizes.sort_unstable();
    Ok(sizes)
}

/// Bratteli diagram of the crossed core along `chain`: level `m` is the
/// block structure of `K(Y_{p_m}⋊G)` acting on `Y_{p_m}⋊G`.
pub fn crossed_core_bratteli(cs: &CrossedSystem, chain: &[IndexVector]) -> Result<BratteliDiagram> {
    check_chain(chain, cs.ps.k())?;
    let tol = cs.tol;
    let mut decomps = Vec::new();
    for p in chain {
        let alg = CompactOperators::new(cs, p)?;
        decomps.push(wedderburn(&alg, tol)?);
    }
    let levels = chain
        .iter()
        .zip(&decomps)
        .map(|(p, w)| Level {
            index: p.0.clone(),
            labels: w
                .blocks
                .iter()
                .map(|b| format!("M{}x{}", b.size, b.multiplicity))
                .collect(),
            sizes: w.blocks.iter().map(|b| b.size).collect(),
        })
        .collect();
    let mut edges = Vec::new();
    for (m, win) in chain.windows(2).enumerate() {
        let step = win[1].checked_sub(&win[0]).expect("increasing chain");
        let (lo, hi) = (&decomps[m], &decomps[m + 1]);
        let mut e = vec![vec![0usize; hi.blocks.len()]; lo.blocks.len()];
        for (i, bi) in lo.blocks.iter().enumerate() {
            let img = cs.embed(&win[0], &step, &bi.minimal_projection)?;
            for (j, bj) in hi.blocks.iter().enumerate() {
                let x = trace(&(&bj.central_projection * &img)).re / bj.multiplicity as f64;
                let rounded = x.round();
                if (x - rounded).abs() > 1e-6 || rounded < 0.0 {
                    return Err(Error::Numerical(format!(
                        "non-integral multiplicity {x} between levels {m} and {}",
                        m + 1
                    )));
                }
                e[i][j] = rounded as usize;
            }
        }
        edges.push(e);
    }
    let diagram = BratteliDiagram { levels, edges };
    diagram.check_recursion()?;
    Ok(diagram)
}
