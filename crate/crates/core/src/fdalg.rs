//! Dense complex linear algebra: Kronecker products, ranks and null spaces,
//! intertwiner spaces and the Wedderburn decomposition of finite-dimensional
//! *-algebras of matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Seed of the random elements drawn by [`wedderburn`]; retry `i` uses `WEDDERBURN_SEED + i`.
pub const WEDDERBURN_SEED: u64 = 0x5eed_0001;
const WEDDERBURN_RETRIES: u64 = 3;

/// Equality and rank tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub eps_eq: f64,
    pub eps_rank: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Self {
            eps_eq: 1e-9,
            eps_rank: 1e-9,
        }
    }
}

impl Tol {
    pub fn new(eps_eq: f64, eps_rank: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(eps_eq) || !ok(eps_rank) {
            return Err(Error::Numerical(format!(
                "tolerances must be positive and finite, got eps_eq={eps_eq}, eps_rank={eps_rank}"
            )));
        }
        Ok(Self { eps_eq, eps_rank })
    }

    /// Singular values strictly between `eps_rank / 1000` and `sqrt(eps_rank)`
    /// (relative to the largest) are treated as ambiguous.
    fn ambiguity_band(&self) -> (f64, f64) {
        (self.eps_rank * 1e-3, self.eps_rank.sqrt())
    }
}

/// Builds a matrix from real row data.
pub fn real_mat(rows: &[Vec<f64>]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    Mat::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
}

pub fn permutation_matrix(perm: &[usize]) -> Mat {
    let n = perm.len();
    let mut m = Mat::zeros(n, n);
    for (src, &dst) in perm.iter().enumerate() {
        m[(dst, src)] = ONE;
    }
    m
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = Mat::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for jj in 0..bc {
                for ii in 0..br {
                    out[(i * br + ii, j * bc + jj)] = x * b[(ii, jj)];
                }
            }
        }
    }
    out
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-norm distance; infinite when shapes differ.
pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn vec_max_abs_diff(a: &Vector, b: &Vector) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_unitary(m: &Mat, tol: Tol) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "unitarity needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(unitarity_residual(m) <= tol.eps_eq)
}

/// `max(‖m*m − I‖, ‖m m* − I‖)` in max norm; infinite for non-square input.
pub fn unitarity_residual(m: &Mat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let id = Mat::identity(m.nrows(), m.ncols());
    let a = m.adjoint();
    max_abs_diff(&(&a * m), &id).max(max_abs_diff(&(m * &a), &id))
}

/// Column-major vectorization.
pub fn vectorize(m: &Mat) -> Vector {
    Vector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize(v: &Vector, rows: usize, cols: usize) -> Mat {
    Mat::from_iterator(rows, cols, v.iter().copied())
}

/// Matrix whose columns are the given vectors.
pub fn columns(vectors: &[Vector], len: usize) -> Mat {
    let mut m = Mat::zeros(len, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

struct Svd {
    values: Vec<f64>,
    u: Option<Mat>,
    v_t: Option<Mat>,
}

fn svd(m: &Mat, want_u: bool, want_v: bool) -> Svd {
    let s = m.clone().svd(want_u, want_v);
    Svd {
        values: s.singular_values.iter().copied().collect(),
        u: s.u,
        v_t: s.v_t,
    }
}

/// Number of singular values above `eps_rank` relative to the largest,
/// failing when one falls inside the ambiguity band.
fn rank_from_values(values: &[f64], tol: Tol) -> Result<usize> {
    let smax = values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    let (lo, hi) = tol.ambiguity_band();
    for &s in values {
        let rel = s / smax;
        if rel > lo && rel < hi {
            return Err(Error::Degeneracy {
                value: s,
                scale: smax,
            });
        }
    }
    Ok(values.iter().filter(|&&s| s / smax > tol.eps_rank).count())
}

pub fn rank(m: &Mat, tol: Tol) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    rank_from_values(&svd(m, false, false).values, tol)
}

/// Orthonormal basis of the null space (right kernel).
pub fn null_space(m: &Mat, tol: Tol) -> Result<Vec<Vector>> {
    let n = m.ncols();
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.nrows() == 0 {
        return Ok((0..n).map(|i| Vector::from_fn(n, |j, _| if i == j { ONE } else { ZERO })).collect());
    }
    // thin SVD only yields a full V when rows >= cols
    let padded;
    let a = if m.nrows() < n {
        padded = {
            let mut p = Mat::zeros(n, n);
            p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let s = svd(a, false, true);
    let r = rank_from_values(&s.values, tol)?;
    let smax = s.values.iter().copied().fold(0.0, f64::max);
    let v_t = s.v_t.expect("requested V");
    let mut out = Vec::new();
    for (i, &sv) in s.values.iter().enumerate() {
        if smax == 0.0 || sv / smax <= tol.eps_rank {
            out.push(v_t.row(i).adjoint());
        }
    }
    debug_assert_eq!(out.len(), n - r);
    Ok(out)
}

/// Orthonormal basis of the column space, as the columns of the result.
pub fn column_space(m: &Mat, tol: Tol) -> Result<Mat> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Ok(Mat::zeros(m.nrows(), 0));
    }
    let s = svd(m, true, false);
    rank_from_values(&s.values, tol)?;
    let smax = s.values.iter().copied().fold(0.0, f64::max);
    let u = s.u.expect("requested U");
    let keep: Vec<usize> = (0..s.values.len())
        .filter(|&i| smax > 0.0 && s.values[i] / smax > tol.eps_rank)
        .collect();
    let mut q = Mat::zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        q.set_column(j, &u.column(i));
    }
    Ok(q)
}

/// Basis of `{T : B_g T = T A_g for all g}`, orthonormal in the Frobenius
/// inner product. Each pair is `(A_g, B_g)` with `A_g` n×n and `B_g` m×m.
pub fn intertwiner_space(pairs: &[(Mat, Mat)], tol: Tol) -> Result<Vec<Mat>> {
    let Some((a0, b0)) = pairs.first() else {
        return Err(Error::Dimension("no representation pairs given".into()));
    };
    let (n, m) = (a0.nrows(), b0.nrows());
    for (a, b) in pairs {
        if a.shape() != (n, n) || b.shape() != (m, m) {
            return Err(Error::Dimension(format!(
                "expected pairs of {n}x{n} and {m}x{m} matrices, got {:?} and {:?}",
                a.shape(),
                b.shape()
            )));
        }
    }
    // vec(B T - T A) = (I_n ⊗ B - Aᵀ ⊗ I_m) vec(T)
    let dim = n * m;
    let mut stacked = Mat::zeros(dim * pairs.len(), dim);
    let id_n = Mat::identity(n, n);
    let id_m = Mat::identity(m, m);
    for (g, (a, b)) in pairs.iter().enumerate() {
        let block = kron(&id_n, b) - kron(&a.transpose(), &id_m);
        stacked.view_mut((g * dim, 0), (dim, dim)).copy_from(&block);
    }
    Ok(null_space(&stacked, tol)?
        .iter()
        .map(|v| unvectorize(v, m, n))
        .collect())
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vecs = Mat::zeros(m.nrows(), order.len());
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &e.eigenvectors.column(i));
    }
    (values, vecs)
}

/// Groups sorted eigenvalues into runs separated by gaps larger than `gap`.
fn cluster(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

pub fn random_vector(rng: &mut impl Rng, len: usize) -> Vector {
    Vector::from_fn(len, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// A finite-dimensional *-algebra in coordinates, together with a faithful
/// *-representation on an ambient Hilbert space.
pub trait StarAlgebra {
    fn dim(&self) -> usize;
    fn mul(&self, a: &Vector, b: &Vector) -> Vector;
    fn star(&self, a: &Vector) -> Vector;
    fn ambient_dim(&self) -> usize;
    fn represent(&self, a: &Vector) -> Mat;

    fn basis_vector(&self, k: usize) -> Vector {
        let mut v = Vector::zeros(self.dim());
        v[k] = ONE;
        v
    }
}

/// The span of a *-closed family of square matrices acting on ℂⁿ.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    n: usize,
    /// Orthonormal (Frobenius) basis, vectorized as columns.
    q: Mat,
    basis: Vec<Mat>,
}

impl MatrixAlgebra {
    pub fn from_span(mats: &[Mat], tol: Tol) -> Result<Self> {
        let n = mats.first().map_or(0, Mat::nrows);
        if mats.is_empty() || n == 0 {
            return Err(Error::Dimension("empty algebra basis".into()));
        }
        if mats.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::Dimension(format!(
                "algebra basis must consist of {n}x{n} matrices"
            )));
        }
        let vecs: Vec<Vector> = mats.iter().map(vectorize).collect();
        let q = column_space(&columns(&vecs, n * n), tol)?;
        let basis = (0..q.ncols())
            .map(|k| unvectorize(&q.column(k).into_owned(), n, n))
            .collect();
        let alg = Self { n, q, basis };
        alg.check_closure(tol)?;
        Ok(alg)
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    /// Coordinates of a matrix against the orthonormal basis.
    pub fn coordinates(&self, m: &Mat) -> Vector {
        self.q.adjoint() * vectorize(m)
    }

    /// Distance of `m` from the span, in max norm.
    pub fn span_residual(&self, m: &Mat) -> f64 {
        let v = vectorize(m);
        let proj = &self.q * (self.q.adjoint() * &v);
        (v - proj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_closure(&self, tol: Tol) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(WEDDERBURN_SEED);
        for _ in 0..2 {
            let a = self.represent(&random_vector(&mut rng, self.dim()));
            let b = self.represent(&random_vector(&mut rng, self.dim()));
            let prod = &a * &b;
            let scale = max_abs(&prod).max(1.0);
            let r = self.span_residual(&prod);
            if r > tol.eps_eq * scale {
                return Err(Error::Algebra(format!(
                    "span is not closed under products (residual {r:e})"
                )));
            }
            let r = self.span_residual(&a.adjoint());
            if r > tol.eps_eq * max_abs(&a).max(1.0) {
                return Err(Error::Algebra(format!(
                    "span is not closed under the adjoint (residual {r:e})"
                )));
            }
        }
        Ok(())
    }
}

impl StarAlgebra for MatrixAlgebra {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn mul(&self, a: &Vector, b: &Vector) -> Vector {
        self.coordinates(&(self.represent(a) * self.represent(b)))
    }

    fn star(&self, a: &Vector) -> Vector {
        self.coordinates(&self.represent(a).adjoint())
    }

    fn ambient_dim(&self) -> usize {
        self.n
    }

    fn represent(&self, a: &Vector) -> Mat {
        unvectorize(&(&self.q * a), self.n, self.n)
    }
}

/// The left-regular representation `x ↦ a·x` of an algebra whose coordinates
/// are orthonormal for a faithful trace.
pub struct LeftRegular<'a, A: StarAlgebra>(pub &'a A);

impl<A: StarAlgebra> StarAlgebra for LeftRegular<'_, A> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn mul(&self, a: &Vector, b: &Vector) -> Vector {
        self.0.mul(a, b)
    }

    fn star(&self, a: &Vector) -> Vector {
        self.0.star(a)
    }

    fn ambient_dim(&self) -> usize {
        self.0.dim()
    }

    fn represent(&self, a: &Vector) -> Mat {
        let d = self.0.dim();
        let mut m = Mat::zeros(d, d);
        for k in 0..d {
            m.set_column(k, &self.0.mul(a, &self.0.basis_vector(k)));
        }
        m
    }
}

/// One simple summand `M_size` of a *-algebra, appearing `multiplicity`
/// times in the ambient representation.
#[derive(Debug, Clone)]
pub struct WedderburnBlock {
    pub size: usize,
    pub multiplicity: usize,
    pub central_projection: Mat,
    pub minimal_projection: Mat,
}

#[derive(Debug, Clone)]
pub struct Wedderburn {
    pub blocks: Vec<WedderburnBlock>,
    pub algebra_dim: usize,
    pub ambient_dim: usize,
}

impl Wedderburn {
    pub fn summary(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.size, b.multiplicity)).collect()
    }
}

/// Block structure `(size, multiplicity)` of the *-algebra spanned by `basis`.
pub fn wedderburn_blocks(basis: &[Mat], tol: Tol) -> Result<Vec<(usize, usize)>> {
    let alg = MatrixAlgebra::from_span(basis, tol)?;
    Ok(wedderburn(&alg, tol)?.summary())
}

/// Artin-Wedderburn decomposition by diagonalizing a random Hermitian central
/// element, then splitting each central summand with a random Hermitian element.
pub fn wedderburn<A: StarAlgebra>(alg: &A, tol: Tol) -> Result<Wedderburn> {
    let mut last = None;
    for attempt in 0..=WEDDERBURN_RETRIES {
        match wedderburn_attempt(alg, tol, WEDDERBURN_SEED + attempt) {
            Ok(w) => return Ok(w),
            Err(e @ (Error::Degeneracy { .. } | Error::Numerical(_))) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn hermitian_part<A: StarAlgebra>(alg: &A, a: &Vector) -> Vector {
    (a + alg.star(a)) * C64::new(0.5, 0.0)
}

fn wedderburn_attempt<A: StarAlgebra>(alg: &A, tol: Tol, seed: u64) -> Result<Wedderburn> {
    let d = alg.dim();
    let n = alg.ambient_dim();
    if d == 0 {
        return Err(Error::Dimension("zero-dimensional algebra".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // center = elements commuting with two random elements (generically generators)
    let gens = [random_vector(&mut rng, d), random_vector(&mut rng, d)];
    let mut system = Mat::zeros(2 * d, d);
    for k in 0..d {
        let e = alg.basis_vector(k);
        for (gi, g) in gens.iter().enumerate() {
            let c = alg.mul(&e, g) - alg.mul(g, &e);
            system.view_mut((gi * d, k), (d, 1)).copy_from(&c);
        }
    }
    let center = null_space(&system, tol)?;
    if center.is_empty() {
        return Err(Error::Algebra("algebra has trivial center (not unital?)".into()));
    }

    let mut h = Vector::zeros(d);
    for c in &center {
        h += c * C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let h = hermitian_part(alg, &h);
    let (values, vecs) = hermitian_eigen(&alg.represent(&h));
    let gap = 1e-8 * values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let groups = cluster(&values, gap);
    if groups.len() != center.len() {
        return Err(Error::Numerical(format!(
            "central element separates {} summands, center has dimension {}",
            groups.len(),
            center.len()
        )));
    }

    let a = hermitian_part(alg, &random_vector(&mut rng, d));
    let a_mat = alg.represent(&a);
    let mut blocks = Vec::new();
    for g in groups {
        let q = vecs.columns(g.start, g.len()).into_owned();
        let compressed = q.adjoint() * &a_mat * &q;
        let (vals, v) = hermitian_eigen(&compressed);
        let gap = 1e-8 * vals.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let sub = cluster(&vals, gap);
        let mult = sub[0].len();
        if sub.iter().any(|s| s.len() != mult) {
            return Err(Error::Numerical(
                "eigenvalue clusters of unequal size inside a simple summand".into(),
            ));
        }
        let first = q.clone() * v.columns(sub[0].start, mult);
        blocks.push(WedderburnBlock {
            size: sub.len(),
            multiplicity: mult,
            central_projection: &q * q.adjoint(),
            minimal_projection: &first * first.adjoint(),
        });
    }

    let dim_sum: usize = blocks.iter().map(|b| b.size * b.size).sum();
    if dim_sum != d {
        return Err(Error::Numerical(format!(
            "block sizes account for dimension {dim_sum}, algebra has dimension {d}"
        )));
    }
    let ambient_sum: usize = blocks.iter().map(|b| b.size * b.multiplicity).sum();
    if ambient_sum != n {
        return Err(Error::Algebra(format!(
            "summands cover {ambient_sum} of {n} ambient dimensions (algebra is not unital on the ambient space)"
        )));
    }

    blocks.sort_by(|x, y| {
        (x.size, x.multiplicity)
            .cmp(&(y.size, y.multiplicity))
            .then_with(|| diag_key(&y.central_projection).cmp(&diag_key(&x.central_projection)))
    });
    Ok(Wedderburn {
        blocks,
        algebra_dim: d,
        ambient_dim: n,
    })
}

fn diag_key(p: &Mat) -> Vec<i64> {
    (0..p.nrows())
        .map(|i| (p[(i, i)].re * 1e6).round() as i64)
        .collect()
}

pub(crate) fn trace(m: &Mat) -> C64 {
    m.diagonal().iter().copied().sum()
}
