//! Product systems over ℕ^k generated by k based correspondences and
//! pairwise flip unitaries.
//!
//! The fiber at `p` is the tensor word `X_1^{⊗p_1} ⊗ … ⊗ X_k^{⊗p_k}`; its basis
//! is the composable paths whose edge colors follow that normal-form word.
//! Multiplication maps route an arbitrary word into normal form through
//! adjacent flips (bubble sort).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bratteli::{BratteliDiagram, Level};
use crate::correspondence::{BasedCorrespondence, BasisVector, TensorProduct, VertexSet};
use crate::error::{Error, Result};
use crate::fdalg::{unitarity_residual, Mat, Tol, C64, ONE};
use crate::report::Report;

pub const DEFAULT_CAP: usize = 6;

/// A degree `p ∈ ℕ^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexVector(pub Vec<usize>);

impl IndexVector {
    pub fn zero(k: usize) -> Self {
        Self(vec![0; k])
    }

    pub fn unit(k: usize, i: usize) -> Self {
        let mut v = vec![0; k];
        v[i] = 1;
        Self(v)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Coordinatewise `self ≤ other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        other
            .le(self)
            .then(|| Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    /// Normal-form color word `1^{p_1} 2^{p_2} …` (0-based colors).
    pub fn word(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat(c).take(n))
            .collect()
    }

    /// All `p` with `|p| ≤ max_degree`, by degree, then with larger leading
    /// coordinates first.
    pub fn all_up_to(k: usize, max_degree: usize) -> Vec<IndexVector> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut cur = vec![0; k];
            compositions(k, d, 0, &mut cur, &mut out);
        }
        out
    }
}

fn compositions(k: usize, remaining: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<IndexVector>) {
    if pos + 1 == k {
        cur[pos] = remaining;
        out.push(IndexVector(cur.clone()));
        return;
    }
    if k == 0 {
        return;
    }
    for x in (0..=remaining).rev() {
        cur[pos] = x;
        compositions(k, remaining - x, pos + 1, cur, out);
    }
}

impl fmt::Display for IndexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Edge indices along a path; for the empty word the single entry is the vertex.
pub type PathKey = Vec<u32>;

/// Sparse vector over the paths of one color word.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathVec(pub HashMap<PathKey, C64>);

impl PathVec {
    pub fn basis(key: PathKey) -> Self {
        Self(HashMap::from([(key, ONE)]))
    }

    fn add(&mut self, key: PathKey, c: C64) {
        *self.0.entry(key).or_default() += c;
    }

    pub fn max_abs_diff(&self, other: &PathVec) -> f64 {
        let mut r: f64 = 0.0;
        for (k, v) in &self.0 {
            r = r.max((v - other.0.get(k).copied().unwrap_or_default()).norm());
        }
        for (k, v) in &other.0 {
            if !self.0.contains_key(k) {
                r = r.max(v.norm());
            }
        }
        r
    }
}

/// Order in which adjacent descents are flipped while routing to normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingOrder {
    Leftmost,
    Rightmost,
    Random(u64),
}

/// Sparse columns of the flip `X_a ⊗ X_b → X_b ⊗ X_a`.
#[derive(Debug, Clone)]
struct SwapMap {
    from: TensorProduct,
    to: TensorProduct,
    cols: Vec<Vec<(usize, C64)>>,
}

/// A materialized fiber `Y_p`.
#[derive(Debug, Clone)]
pub struct Fiber {
    pub p: IndexVector,
    pub corr: BasedCorrespondence,
    pub paths: Vec<PathKey>,
    index: HashMap<PathKey, usize>,
}

impl Fiber {
    pub fn dim(&self) -> usize {
        self.paths.len()
    }

    pub fn path_index(&self, key: &PathKey) -> Option<usize> {
        self.index.get(key).copied()
    }
}

pub struct ProductSystem {
    k: usize,
    vertices: VertexSet,
    generators: Vec<BasedCorrespondence>,
    flips: BTreeMap<(usize, usize), Mat>,
    cap: usize,
    swaps: HashMap<(usize, usize), SwapMap>,
    fibers: Mutex<HashMap<IndexVector, Arc<Fiber>>>,
}

impl Clone for ProductSystem {
    fn clone(&self) -> Self {
        Self {
            k: self.k,
            vertices: self.vertices.clone(),
            generators: self.generators.clone(),
            flips: self.flips.clone(),
            cap: self.cap,
            swaps: self.swaps.clone(),
            fibers: Mutex::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for ProductSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductSystem")
            .field("k", &self.k)
            .field("vertices", &self.vertices)
            .field("generator_dims", &self.generators.iter().map(|g| g.dim()).collect::<Vec<_>>())
            .field("cap", &self.cap)
            .finish()
    }
}

impl ProductSystem {
    /// `flips[(i, j)]` for `i < j` maps the composable pairs of `X_i ⊗ X_j`
    /// to those of `X_j ⊗ X_i`.
    pub fn new(
        vertices: VertexSet,
        generators: Vec<BasedCorrespondence>,
        flips: BTreeMap<(usize, usize), Mat>,
        cap: usize,
    ) -> Result<Self> {
        let k = generators.len();
        if k == 0 {
            return Err(Error::Domain("a product system needs at least one generator".into()));
        }
        if generators.iter().any(|g| g.vertices() != &vertices) {
            return Err(Error::Parent("generators must share the vertex set".into()));
        }
        for &(i, j) in flips.keys() {
            if i >= j || j >= k {
                return Err(Error::Domain(format!("flip ({i},{j}) is not a pair i<j of colors")));
            }
        }
        let mut swaps = HashMap::new();
        for i in 0..k {
            for j in i + 1..k {
                let t = flips
                    .get(&(i, j))
                    .ok_or_else(|| Error::Domain(format!("missing flip for colors ({i},{j})")))?;
                let ij = generators[i].tensor(&generators[j])?;
                let ji = generators[j].tensor(&generators[i])?;
                if t.shape() != (ji.pairs.len(), ij.pairs.len()) {
                    return Err(Error::Dimension(format!(
                        "flip ({i},{j}) must be {}x{}, got {}x{}",
                        ji.pairs.len(),
                        ij.pairs.len(),
                        t.nrows(),
                        t.ncols()
                    )));
                }
                let t_inv = t.adjoint();
                swaps.insert((i, j), sparse_columns(t, ij.clone(), ji.clone()));
                swaps.insert((j, i), sparse_columns(&t_inv, ji, ij));
            }
        }
        Ok(Self {
            k,
            vertices,
            generators,
            flips,
            cap,
            swaps,
            fibers: Mutex::new(HashMap::new()),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn with_cap(&self, cap: usize) -> Self {
        let mut s = self.clone();
        s.cap = cap;
        s
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn generators(&self) -> &[BasedCorrespondence] {
        &self.generators
    }

    pub fn flips(&self) -> &BTreeMap<(usize, usize), Mat> {
        &self.flips
    }

    fn check_cap(&self, degree: usize) -> Result<()> {
        if degree > self.cap {
            return Err(Error::Cap {
                degree,
                cap: self.cap,
            });
        }
        Ok(())
    }

    fn check_k(&self, p: &IndexVector) -> Result<()> {
        if p.k() != self.k {
            return Err(Error::Dimension(format!(
                "index vector {p} has length {}, system has k = {}",
                p.k(),
                self.k
            )));
        }
        Ok(())
    }

    /// `dim Y_p` by counting paths, without materializing the fiber.
    pub fn fiber_dim(&self, p: &IndexVector) -> usize {
        let nv = self.vertices.len();
        let mut counts = vec![1usize; nv]; // paths ending (by range) at each vertex, read right to left
        for &c in p.word().iter().rev() {
            let mut next = vec![0usize; nv];
            for b in self.generators[c].basis() {
                next[b.range] = next[b.range].saturating_add(counts[b.source]);
            }
            counts = next;
        }
        if p.is_zero() {
            return nv;
        }
        counts.iter().fold(0usize, |a, &b| a.saturating_add(b))
    }

    pub fn max_fiber_dim(&self) -> usize {
        IndexVector::all_up_to(self.k, self.cap)
            .iter()
            .map(|p| self.fiber_dim(p))
            .max()
            .unwrap_or(0)
    }

    pub fn fiber(&self, p: &IndexVector) -> Result<Arc<Fiber>> {
        self.check_k(p)?;
        self.check_cap(p.degree())?;
        if let Some(f) = self.fibers.lock().expect("fiber cache").get(p) {
            return Ok(f.clone());
        }
        let fiber = Arc::new(self.materialize(p)?);
        self.fibers
            .lock()
            .expect("fiber cache")
            .insert(p.clone(), fiber.clone());
        Ok(fiber)
    }

    fn materialize(&self, p: &IndexVector) -> Result<Fiber> {
        let word = p.word();
        let paths = self.word_paths(&word);
        let corr = if word.is_empty() {
            BasedCorrespondence::unit(self.vertices.clone())
        } else {
            let basis = paths
                .iter()
                .map(|key| {
                    let (range, source) = self.endpoints(&word, key);
                    BasisVector {
                        id: key
                            .iter()
                            .zip(&word)
                            .map(|(&e, &c)| self.generators[c].basis()[e as usize].id.as_str())
                            .collect::<Vec<_>>()
                            .join("."),
                        range,
                        source,
                    }
                })
                .collect();
            BasedCorrespondence::new(self.vertices.clone(), basis)?
        };
        let index = paths.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Ok(Fiber {
            p: p.clone(),
            corr,
            paths,
            index,
        })
    }

    /// (range, source) of a path over `word`.
    pub fn endpoints(&self, word: &[usize], key: &PathKey) -> (usize, usize) {
        if word.is_empty() {
            let v = key[0] as usize;
            return (v, v);
        }
        let first = &self.generators[word[0]].basis()[key[0] as usize];
        let last = &self.generators[word[word.len() - 1]].basis()[key[key.len() - 1] as usize];
        (first.range, last.source)
    }

    /// Composable paths over an arbitrary color word, lexicographic.
    pub fn word_paths(&self, word: &[usize]) -> Vec<PathKey> {
        if word.is_empty() {
            return (0..self.vertices.len() as u32).map(|v| vec![v]).collect();
        }
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(word.len());
        self.dfs(word, &mut cur, &mut out);
        out
    }

    fn dfs(&self, word: &[usize], cur: &mut PathKey, out: &mut Vec<PathKey>) {
        let pos = cur.len();
        if pos == word.len() {
            out.push(cur.clone());
            return;
        }
        let basis = self.generators[word[pos]].basis();
        let need = (pos > 0).then(|| {
            self.generators[word[pos - 1]].basis()[cur[pos - 1] as usize].source
        });
        for (e, b) in basis.iter().enumerate() {
            if need.map_or(true, |s| b.range == s) {
                cur.push(e as u32);
                self.dfs(word, cur, out);
                cur.pop();
            }
        }
    }

    /// Concatenates paths over two words (unit fibers absorb by endpoint).
    pub fn concat(&self, left_word: &[usize], left: &PathKey, right_word: &[usize], right: &PathKey) -> Option<PathKey> {
        let (_, ls) = self.endpoints(left_word, left);
        let (rr, _) = self.endpoints(right_word, right);
        if ls != rr {
            return None;
        }
        match (left_word.is_empty(), right_word.is_empty()) {
            (true, _) => Some(right.clone()),
            (false, true) => Some(left.clone()),
            (false, false) => {
                let mut k = left.clone();
                k.extend_from_slice(right);
                Some(k)
            }
        }
    }

    fn apply_swap(&self, word: &[usize], pos: usize, v: &PathVec) -> PathVec {
        let map = &self.swaps[&(word[pos], word[pos + 1])];
        let mut out = PathVec::default();
        for (key, &c) in &v.0 {
            let Some(col) = map.from.pair_index(key[pos] as usize, key[pos + 1] as usize) else {
                continue;
            };
            for &(row, t) in &map.cols[col] {
                let (e1, e2) = map.to.pairs[row];
                let mut nk = key.clone();
                nk[pos] = e1 as u32;
                nk[pos + 1] = e2 as u32;
                out.add(nk, c * t);
            }
        }
        out
    }

    /// Sorts `word[range]` into normal form, flipping descents in `order`.
    /// Returns the new word together with the routed vector.
    pub fn route_segment(
        &self,
        word: &[usize],
        range: std::ops::Range<usize>,
        v: PathVec,
        order: RoutingOrder,
    ) -> (Vec<usize>, PathVec) {
        let mut w = word.to_vec();
        let mut v = v;
        let mut rng = match order {
            RoutingOrder::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        loop {
            let descents: Vec<usize> = (range.start..range.end.saturating_sub(1))
                .filter(|&i| w[i] > w[i + 1])
                .collect();
            if descents.is_empty() {
                return (w, v);
            }
            let pos = match order {
                RoutingOrder::Leftmost => descents[0],
                RoutingOrder::Rightmost => descents[descents.len() - 1],
                RoutingOrder::Random(_) => {
                    descents[rng.as_mut().expect("rng").gen_range(0..descents.len())]
                }
            };
            v = self.apply_swap(&w, pos, &v);
            w.swap(pos, pos + 1);
        }
    }

    pub fn route(&self, word: &[usize], v: PathVec, order: RoutingOrder) -> PathVec {
        self.route_segment(word, 0..word.len(), v, order).1
    }

    /// Dense routing matrix from the paths of `word` to the normal-form fiber.
    pub fn routing_matrix(&self, word: &[usize], order: RoutingOrder) -> Result<Mat> {
        let mut p = IndexVector::zero(self.k);
        for &c in word {
            if c >= self.k {
                return Err(Error::Dimension(format!("color {c} out of range")));
            }
            p.0[c] += 1;
        }
        let target = self.fiber(&p)?;
        let src = self.word_paths(word);
        let mut m = Mat::zeros(target.dim(), src.len());
        for (j, key) in src.into_iter().enumerate() {
            let routed = self.route(word, PathVec::basis(key), order);
            for (k, c) in routed.0 {
                if let Some(i) = target.path_index(&k) {
                    m[(i, j)] += c;
                }
            }
        }
        Ok(m)
    }

    /// Balanced tensor product `Y_p ⊗ Y_q` with its pair labels.
    pub fn fiber_tensor(&self, p: &IndexVector, q: &IndexVector) -> Result<TensorProduct> {
        let (fp, fq) = (self.fiber(p)?, self.fiber(q)?);
        fp.corr.tensor(&fq.corr)
    }

    /// The unitary `M_{p,q}: Y_p ⊗ Y_q → Y_{p+q}` in the composable-pair basis.
    pub fn mult_map(&self, p: &IndexVector, q: &IndexVector) -> Result<Mat> {
        self.check_k(p)?;
        self.check_k(q)?;
        self.check_cap(p.degree() + q.degree())?;
        let (fp, fq) = (self.fiber(p)?, self.fiber(q)?);
        let pq = p.add(q);
        let target = self.fiber(&pq)?;
        let tensor = fp.corr.tensor(&fq.corr)?;
        let (wp, wq) = (p.word(), q.word());
        let word: Vec<usize> = wp.iter().chain(&wq).copied().collect();
        let mut m = Mat::zeros(target.dim(), tensor.pairs.len());
        for (col, &(i, j)) in tensor.pairs.iter().enumerate() {
            let key = self
                .concat(&wp, &fp.paths[i], &wq, &fq.paths[j])
                .expect("composable pair");
            let routed = self.route(&word, PathVec::basis(key), RoutingOrder::Leftmost);
            for (k, c) in routed.0 {
                if let Some(row) = target.path_index(&k) {
                    m[(row, col)] += c;
                }
            }
        }
        Ok(m)
    }

    pub fn check_axioms(&self, tol: Tol) -> Report {
        let anchor = "product-system axioms";
        let mut report = Report::new();
        for (&(i, j), t) in &self.flips {
            report.residual(format!("flip({i},{j}).unitary"), anchor, unitarity_residual(t), tol.eps_eq);
            let map = &self.swaps[&(i, j)];
            let mut off = 0.0f64;
            for (col, &(a, b)) in map.from.pairs.iter().enumerate() {
                let src = (
                    self.generators[i].basis()[a].range,
                    self.generators[j].basis()[b].source,
                );
                for (row, &(c, d)) in map.to.pairs.iter().enumerate() {
                    let dst = (
                        self.generators[j].basis()[c].range,
                        self.generators[i].basis()[d].source,
                    );
                    if src != dst {
                        off = off.max(t[(row, col)].norm());
                    }
                }
            }
            report.residual(format!("flip({i},{j}).bigrading"), anchor, off, tol.eps_eq);
        }

        // unit triples reduce to the unit laws below
        let all = IndexVector::all_up_to(self.k, self.cap);
        let nonzero: Vec<&IndexVector> = all.iter().filter(|p| !p.is_zero()).collect();
        let mut assoc = 0.0f64;
        let mut worst = None;
        for p in &nonzero {
            for q in &nonzero {
                for r in &nonzero {
                    if p.degree() + q.degree() + r.degree() > self.cap {
                        continue;
                    }
                    let res = self.associativity_residual(p, q, r);
                    if res > assoc {
                        assoc = res;
                        worst = Some(format!("worst at p={p}, q={q}, r={r}"));
                    }
                }
            }
        }
        report.residual("associativity", anchor, assoc, tol.eps_eq);
        if let Some(w) = worst {
            report.annotate(w);
        }

        let mut unit = 0.0f64;
        for p in &all {
            unit = unit.max(self.unit_law_residual(p));
        }
        report.residual("unit_laws", anchor, unit, tol.eps_eq);
        report
    }

    /// `‖M_{p+q,r}(M_{p,q} ⊗ 1) − M_{p,q+r}(1 ⊗ M_{q,r})‖_max` over the path basis.
    pub fn associativity_residual(&self, p: &IndexVector, q: &IndexVector, r: &IndexVector) -> f64 {
        let word: Vec<usize> = [p.word(), q.word(), r.word()].concat();
        let (lp, lq) = (p.degree(), q.degree());
        let mut res = 0.0f64;
        for key in self.word_paths(&word) {
            let v = PathVec::basis(key);
            let (w1, a) = self.route_segment(&word, 0..lp + lq, v.clone(), RoutingOrder::Leftmost);
            let a = self.route(&w1, a, RoutingOrder::Leftmost);
            let (w2, b) = self.route_segment(&word, lp..word.len(), v, RoutingOrder::Leftmost);
            let b = self.route(&w2, b, RoutingOrder::Leftmost);
            res = res.max(a.max_abs_diff(&b));
        }
        res
    }

    /// Distance of `M_{0,p}` and `M_{p,0}` from the canonical identifications
    /// `a ⊗ x ↦ a·x` and `x ⊗ a ↦ x·a`.
    fn unit_law_residual(&self, p: &IndexVector) -> f64 {
        let zero = IndexVector::zero(self.k);
        let fp = match self.fiber(p) {
            Ok(f) => f,
            Err(_) => return f64::INFINITY,
        };
        let mut res = 0.0f64;
        for (left, right) in [(&zero, p), (p, &zero)] {
            let (Ok(m), Ok(t)) = (self.mult_map(left, right), self.fiber_tensor(left, right)) else {
                return f64::INFINITY;
            };
            let mut expected = Mat::zeros(fp.dim(), t.pairs.len());
            for (col, &(i, j)) in t.pairs.iter().enumerate() {
                let b = if left.is_zero() { j } else { i };
                expected[(b, col)] = ONE;
            }
            res = res.max(crate::fdalg::max_abs_diff(&m, &expected));
        }
        res
    }

    /// Row-finiteness is structural; faithful iff every generator is.
    pub fn is_row_finite_and_faithful(&self) -> bool {
        self.generators.iter().all(BasedCorrespondence::is_faithful)
    }

    /// Injectivity of `p ↦ dim Y_p` over `|p| ≤ n_max` for one-vertex systems,
    /// with the first colliding pair when it fails.
    pub fn fowler_injectivity(&self, n_max: usize) -> Result<(bool, Option<(IndexVector, IndexVector)>)> {
        if self.vertices.len() != 1 {
            return Err(Error::Domain(
                "dimension injectivity is defined for one-vertex systems".into(),
            ));
        }
        self.check_cap(n_max)?;
        let dims: Vec<u128> = self.generators.iter().map(|g| g.dim() as u128).collect();
        let mut seen: HashMap<u128, IndexVector> = HashMap::new();
        for p in IndexVector::all_up_to(self.k, n_max) {
            let d = p
                .0
                .iter()
                .zip(&dims)
                .fold(1u128, |acc, (&e, &b)| acc.saturating_mul(b.saturating_pow(e as u32)));
            if let Some(prev) = seen.get(&d) {
                return Ok((false, Some((prev.clone(), p))));
            }
            seen.insert(d, p);
        }
        Ok((true, None))
    }

    /// Bratteli diagram of the core along a strictly increasing chain: one block
    /// per vertex, sized by the paths with that source.
    pub fn core_bratteli(&self, chain: &[IndexVector]) -> Result<BratteliDiagram> {
        check_chain(chain, self.k)?;
        let mut levels = Vec::new();
        for p in chain {
            let f = self.fiber(p)?;
            levels.push(Level {
                index: p.0.clone(),
                labels: self.vertices.names().to_vec(),
                sizes: f.corr.source_counts(),
            });
        }
        let nv = self.vertices.len();
        let mut edges = Vec::new();
        for w in chain.windows(2) {
            let d = w[1].checked_sub(&w[0]).expect("chain increasing");
            let f = self.fiber(&d)?;
            let mut m = vec![vec![0usize; nv]; nv];
            if d.is_zero() {
                for (v, row) in m.iter_mut().enumerate() {
                    row[v] = 1;
                }
            } else {
                for b in f.corr.basis() {
                    m[b.range][b.source] += 1;
                }
            }
            edges.push(m);
        }
        let diagram = BratteliDiagram { levels, edges };
        diagram.check_recursion()?;
        Ok(diagram)
    }
}

pub(crate) fn check_chain(chain: &[IndexVector], k: usize) -> Result<()> {
    if chain.is_empty() {
        return Err(Error::Chain("empty chain".into()));
    }
    for p in chain {
        if p.k() != k {
            return Err(Error::Chain(format!("index vector {p} has the wrong length")));
        }
    }
    for w in chain.windows(2) {
        if !w[0].le(&w[1]) || w[0] == w[1] {
            return Err(Error::Chain(format!(
                "{} → {} is not strictly increasing coordinatewise",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// The chain `(1,…,1), (2,…,2), …, (L,…,L)`.
pub fn diagonal_chain(k: usize, levels: usize) -> Vec<IndexVector> {
    (1..=levels).map(|m| IndexVector(vec![m; k])).collect()
}

fn sparse_columns(t: &Mat, from: TensorProduct, to: TensorProduct) -> SwapMap {
    let cols = (0..t.ncols())
        .map(|j| {
            (0..t.nrows())
                .filter(|&i| t[(i, j)] != C64::default())
                .map(|i| (i, t[(i, j)]))
                .collect()
        })
        .collect();
    SwapMap { from, to, cols }
}

/// One-vertex system with `dims[i]` loops of color `i` and plain
/// tensor-factor transpositions as flips.
pub fn one_vertex_system(dims: &[usize], cap: usize) -> Result<ProductSystem> {
    let v = VertexSet::point();
    let generators: Vec<BasedCorrespondence> = dims
        .iter()
        .enumerate()
        .map(|(c, &d)| {
            BasedCorrespondence::new(
                v.clone(),
                (0..d)
                    .map(|e| BasisVector {
                        id: format!("x{c}_{e}"),
                        range: 0,
                        source: 0,
                    })
                    .collect(),
            )
        })
        .collect::<Result<_>>()?;
    let mut flips = BTreeMap::new();
    for i in 0..dims.len() {
        for j in i + 1..dims.len() {
            flips.insert((i, j), transposition(dims[i], dims[j]));
        }
    }
    ProductSystem::new(v, generators, flips, cap)
}

/// `a ⊗ b ↦ b ⊗ a` from `ℂ^m ⊗ ℂ^n` to `ℂ^n ⊗ ℂ^m`.
pub fn transposition(m: usize, n: usize) -> Mat {
    let mut t = Mat::zeros(m * n, m * n);
    for a in 0..m {
        for b in 0..n {
            t[(b * m + a, a * n + b)] = ONE;
        }
    }
    t
}
