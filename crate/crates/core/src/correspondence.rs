//! Based correspondences over `C(V)` for a finite vertex set `V`.
//!
//! A based correspondence has a basis in which every vector carries a range
//! and a source vertex. The inner product is diagonal over sources and the
//! left action is diagonal over ranges, so every operator is compact and the
//! balanced tensor product has the composable pairs as its basis.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdalg::{Mat, Vector, C64, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSet {
    names: Vec<String>,
}

impl VertexSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Domain("vertex set must be nonempty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::Domain(format!("duplicate vertex id {n:?}")));
            }
        }
        Ok(Self { names })
    }

    /// The one-point vertex set, so that `C(V) = ℂ`.
    pub fn point() -> Self {
        Self {
            names: vec!["*".into()],
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// An element of `C(V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AFunc(pub Vec<C64>);

impl AFunc {
    pub fn constant(n: usize, c: C64) -> Self {
        Self(vec![c; n])
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, ONE)
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, ZERO)
    }

    pub fn indicator(n: usize, v: usize) -> Self {
        let mut a = Self::zero(n);
        a.0[v] = ONE;
        a
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn mul(&self, other: &AFunc) -> AFunc {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisVector {
    pub id: String,
    pub range: usize,
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasedCorrespondence {
    vertices: VertexSet,
    basis: Vec<BasisVector>,
}

/// A vector of a based correspondence, in basis coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Element<'a> {
    parent: &'a BasedCorrespondence,
    pub coords: Vector,
}

impl BasedCorrespondence {
    pub fn new(vertices: VertexSet, basis: Vec<BasisVector>) -> Result<Self> {
        let mut ids = std::collections::HashSet::new();
        for b in &basis {
            if !ids.insert(b.id.as_str()) {
                return Err(Error::Domain(format!("duplicate basis id {:?}", b.id)));
            }
            if b.range >= vertices.len() || b.source >= vertices.len() {
                return Err(Error::Domain(format!(
                    "basis vector {:?} references a vertex outside the vertex set",
                    b.id
                )));
            }
        }
        Ok(Self { vertices, basis })
    }

    /// `A` as a correspondence over itself: one basis vector per vertex.
    pub fn unit(vertices: VertexSet) -> Self {
        let basis = vertices
            .names()
            .iter()
            .enumerate()
            .map(|(v, name)| BasisVector {
                id: name.clone(),
                range: v,
                source: v,
            })
            .collect();
        Self { vertices, basis }
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn element(&self, coords: Vector) -> Result<Element<'_>> {
        if coords.len() != self.dim() {
            return Err(Error::Parent(format!(
                "{} coordinates for a correspondence of dimension {}",
                coords.len(),
                self.dim()
            )));
        }
        Ok(Element {
            parent: self,
            coords,
        })
    }

    pub fn basis_element(&self, b: usize) -> Element<'_> {
        let mut coords = Vector::zeros(self.dim());
        coords[b] = ONE;
        Element {
            parent: self,
            coords,
        }
    }

    fn same(&self, x: &Element<'_>) -> Result<()> {
        if x.parent != self {
            return Err(Error::Parent("element belongs to a different correspondence".into()));
        }
        Ok(())
    }

    fn check_afunc(&self, a: &AFunc) -> Result<()> {
        if a.len() != self.vertices.len() {
            return Err(Error::Parent(format!(
                "function on {} vertices applied over {} vertices",
                a.len(),
                self.vertices.len()
            )));
        }
        Ok(())
    }

    /// `⟨x, y⟩(v) = Σ_{source(b) = v} conj(x_b) y_b`.
    pub fn inner_coords(&self, x: &Vector, y: &Vector) -> AFunc {
        let mut out = AFunc::zero(self.vertices.len());
        for (i, b) in self.basis.iter().enumerate() {
            out.0[b.source] += x[i].conj() * y[i];
        }
        out
    }

    pub fn left_coords(&self, a: &AFunc, x: &Vector) -> Vector {
        Vector::from_fn(x.len(), |i, _| a.0[self.basis[i].range] * x[i])
    }

    pub fn right_coords(&self, x: &Vector, a: &AFunc) -> Vector {
        Vector::from_fn(x.len(), |i, _| x[i] * a.0[self.basis[i].source])
    }

    /// Matrix of `z ↦ x⟨y, z⟩`.
    pub fn theta_coords(&self, x: &Vector, y: &Vector) -> Mat {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| {
            if self.basis[i].source == self.basis[j].source {
                x[i] * y[j].conj()
            } else {
                ZERO
            }
        })
    }

    pub fn inner(&self, x: &Element<'_>, y: &Element<'_>) -> Result<AFunc> {
        self.same(x)?;
        self.same(y)?;
        Ok(self.inner_coords(&x.coords, &y.coords))
    }

    pub fn left_act<'a>(&'a self, a: &AFunc, x: &Element<'a>) -> Result<Element<'a>> {
        self.same(x)?;
        self.check_afunc(a)?;
        self.element(self.left_coords(a, &x.coords))
    }

    pub fn right_act<'a>(&'a self, x: &Element<'a>, a: &AFunc) -> Result<Element<'a>> {
        self.same(x)?;
        self.check_afunc(a)?;
        self.element(self.right_coords(&x.coords, a))
    }

    pub fn theta(&self, x: &Element<'_>, y: &Element<'_>) -> Result<Mat> {
        self.same(x)?;
        self.same(y)?;
        Ok(self.theta_coords(&x.coords, &y.coords))
    }

    /// Left action `φ(a) = diag(a(range(b)))`.
    pub fn phi(&self, a: &AFunc) -> Result<Mat> {
        self.check_afunc(a)?;
        let n = self.dim();
        Ok(Mat::from_fn(n, n, |i, j| {
            if i == j {
                a.0[self.basis[i].range]
            } else {
                ZERO
            }
        }))
    }

    /// True iff `φ` is injective: every vertex is the range of a basis vector.
    pub fn is_faithful(&self) -> bool {
        (0..self.vertices.len()).all(|v| self.basis.iter().any(|b| b.range == v))
    }

    /// Number of basis vectors with the given source, per vertex.
    pub fn source_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.vertices.len()];
        for b in &self.basis {
            c[b.source] += 1;
        }
        c
    }

    pub fn range_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.vertices.len()];
        for b in &self.basis {
            c[b.range] += 1;
        }
        c
    }

    /// Norm `max_v ⟨x, x⟩(v)^{1/2}`.
    pub fn norm(&self, x: &Vector) -> f64 {
        self.inner_coords(x, x)
            .0
            .iter()
            .map(|z| z.re)
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// Balanced tensor product; its basis is the composable pairs
    /// `(b, c)` with `source(b) = range(c)` in lexicographic order.
    pub fn tensor(&self, other: &BasedCorrespondence) -> Result<TensorProduct> {
        if self.vertices != other.vertices {
            return Err(Error::Parent("tensor factors live over different vertex sets".into()));
        }
        let mut pairs = Vec::new();
        let mut basis = Vec::new();
        for (i, b) in self.basis.iter().enumerate() {
            for (j, c) in other.basis.iter().enumerate() {
                if b.source == c.range {
                    pairs.push((i, j));
                    basis.push(BasisVector {
                        id: format!("{}|{}", b.id, c.id),
                        range: b.range,
                        source: c.source,
                    });
                }
            }
        }
        let index = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        Ok(TensorProduct {
            corr: BasedCorrespondence {
                vertices: self.vertices.clone(),
                basis,
            },
            pairs,
            index,
        })
    }
}

/// A balanced tensor product together with its pair labels.
#[derive(Debug, Clone)]
pub struct TensorProduct {
    pub corr: BasedCorrespondence,
    pub pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

impl TensorProduct {
    pub fn pair_index(&self, left: usize, right: usize) -> Option<usize> {
        self.index.get(&(left, right)).copied()
    }

    /// Coordinates of `x ⊗ y`.
    pub fn simple_tensor(&self, x: &Vector, y: &Vector) -> Vector {
        Vector::from_fn(self.pairs.len(), |k, _| {
            let (i, j) = self.pairs[k];
            x[i] * y[j]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdalg::{max_abs_diff, I};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bv(id: &str, range: usize, source: usize) -> BasisVector {
        BasisVector {
            id: id.into(),
            range,
            source,
        }
    }

    fn two_vertices() -> VertexSet {
        VertexSet::new(["v1", "v2"]).unwrap()
    }

    #[test]
    fn vertex_ids_unique() {
        assert!(VertexSet::new(["a", "a"]).is_err());
        assert!(VertexSet::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let v = two_vertices();
        let c = BasedCorrespondence::new(v, vec![bv("a", 0, 0), bv("b", 1, 0)]).unwrap();
        let a = c.basis_element(0);
        let b = c.basis_element(1);
        assert_eq!(c.inner(&a, &b).unwrap(), AFunc::zero(2));
        assert_eq!(c.inner(&a, &a).unwrap(), AFunc::indicator(2, 0));

        let x = c.element(Vector::from_vec(vec![ONE, I])).unwrap();
        let y = c.element(Vector::from_vec(vec![ONE, ONE])).unwrap();
        assert_eq!(
            c.inner(&x, &y).unwrap(),
            AFunc(vec![C64::new(1.0, -1.0), ZERO])
        );
    }

    #[test]
    fn mismatched_parents_rejected() {
        let v = VertexSet::point();
        let c1 = BasedCorrespondence::new(v.clone(), vec![bv("a", 0, 0)]).unwrap();
        let c2 = BasedCorrespondence::new(v, vec![bv("a", 0, 0), bv("b", 0, 0)]).unwrap();
        let x = c1.basis_element(0);
        let y = c2.basis_element(0);
        assert!(matches!(c2.inner(&x, &y), Err(Error::Parent(_))));
        assert!(matches!(c1.theta(&x, &y), Err(Error::Parent(_))));
        assert!(matches!(
            c1.left_act(&AFunc::one(2), &x),
            Err(Error::Parent(_))
        ));
    }

    #[test]
    fn module_action_examples() {
        let c = BasedCorrespondence::new(two_vertices(), vec![bv("a", 0, 1), bv("b", 1, 0)]).unwrap();
        let x = c.element(Vector::from_vec(vec![ONE, ONE])).unwrap();
        assert_eq!(c.left_act(&AFunc::one(2), &x).unwrap(), x);
        assert_eq!(c.right_act(&x, &AFunc::one(2)).unwrap(), x);

        let b = c.basis_element(1); // range v2
        let zero = c.left_act(&AFunc::indicator(2, 0), &b).unwrap();
        assert_eq!(zero.coords, Vector::zeros(2));

        let a = AFunc(vec![C64::new(2.0, 0.0), C64::new(0.0, 3.0)]);
        let ax = c.left_act(&a, &x).unwrap();
        assert_eq!(ax.coords, Vector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.0, 3.0)]));
    }

    #[test]
    fn theta_examples() {
        let c = BasedCorrespondence::new(VertexSet::point(), vec![bv("a", 0, 0), bv("b", 0, 0)]).unwrap();
        let e1 = c.basis_element(0);
        let e2 = c.basis_element(1);
        let mut unit = Mat::zeros(2, 2);
        unit[(0, 0)] = ONE;
        assert_eq!(c.theta(&e1, &e1).unwrap(), unit);

        let t = c.theta(&e1, &e2).unwrap();
        let mut expected = Mat::zeros(2, 2);
        expected[(0, 1)] = ONE;
        assert_eq!(t, expected);
        assert_eq!(c.theta(&e2, &e1).unwrap(), t.adjoint());
    }

    #[test]
    fn phi_examples() {
        let c = BasedCorrespondence::new(
            two_vertices(),
            vec![bv("a", 0, 0), bv("b", 0, 1), bv("c", 1, 1)],
        )
        .unwrap();
        assert_eq!(c.phi(&AFunc::one(2)).unwrap(), Mat::identity(3, 3));
        let p = c.phi(&AFunc::indicator(2, 0)).unwrap();
        assert_eq!(p.diagonal().iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 1.0, 0.0]);
        let a = AFunc(vec![C64::new(5.0, 0.0), C64::new(7.0, 0.0)]);
        let d = c.phi(&a).unwrap();
        assert_eq!(d.diagonal().iter().map(|z| z.re).collect::<Vec<_>>(), vec![5.0, 5.0, 7.0]);
    }

    #[test]
    fn faithfulness() {
        let one = BasedCorrespondence::new(VertexSet::point(), vec![bv("a", 0, 0)]).unwrap();
        assert!(one.is_faithful());
        let c = BasedCorrespondence::new(two_vertices(), vec![bv("a", 0, 0), bv("b", 0, 1)]).unwrap();
        assert!(!c.is_faithful());
    }

    #[test]
    fn tensor_examples() {
        let v = two_vertices();
        let x = BasedCorrespondence::new(v.clone(), vec![bv("a", 0, 0), bv("b", 1, 0)]).unwrap();
        let unit = BasedCorrespondence::unit(v.clone());
        let t = x.tensor(&unit).unwrap();
        assert_eq!(t.corr.dim(), x.dim());
        assert_eq!(t.pairs, vec![(0, 0), (1, 0)]);

        let p = VertexSet::point();
        let a = BasedCorrespondence::new(p.clone(), vec![bv("a", 0, 0), bv("b", 0, 0)]).unwrap();
        let b = BasedCorrespondence::new(p, (0..3).map(|i| bv(&format!("c{i}"), 0, 0)).collect()).unwrap();
        assert_eq!(a.tensor(&b).unwrap().corr.dim(), 6);

        // sources of X by vertex (2, 1), ranges of Y by vertex (1, 3)
        let xx = BasedCorrespondence::new(v.clone(), vec![bv("a", 0, 0), bv("b", 1, 0), bv("c", 1, 1)]).unwrap();
        let yy = BasedCorrespondence::new(
            v,
            vec![bv("p", 0, 0), bv("q", 1, 0), bv("r", 1, 1), bv("s", 1, 0)],
        )
        .unwrap();
        assert_eq!(xx.source_counts(), vec![2, 1]);
        assert_eq!(yy.range_counts(), vec![1, 3]);
        assert_eq!(xx.tensor(&yy).unwrap().corr.dim(), 5);
        assert!(xx.tensor(&BasedCorrespondence::unit(VertexSet::point())).is_err());
    }

    #[test]
    fn tensor_associative_up_to_relabeling() {
        let v = two_vertices();
        let x = BasedCorrespondence::new(v.clone(), vec![bv("a", 0, 0), bv("b", 1, 0), bv("c", 0, 1)]).unwrap();
        let y = BasedCorrespondence::new(v, vec![bv("d", 0, 1), bv("e", 1, 1)]).unwrap();
        let left = x.tensor(&y).unwrap().corr.tensor(&x).unwrap().corr;
        let right = x.tensor(&y.tensor(&x).unwrap().corr).unwrap().corr;
        let key = |c: &BasedCorrespondence| {
            let mut k: Vec<_> = c
                .basis()
                .iter()
                .map(|b| (b.id.replace(['(', ')'], ""), b.range, b.source))
                .collect();
            k.sort();
            k
        };
        assert_eq!(key(&left), key(&right));
    }

    fn random_corr() -> impl Strategy<Value = (BasedCorrespondence, u64)> {
        (1usize..=3, 1usize..=5, any::<u64>()).prop_flat_map(|(nv, nb, seed)| {
            proptest::collection::vec((0..nv, 0..nv), nb).prop_map(move |ends| {
                let names: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
                let basis = ends
                    .iter()
                    .enumerate()
                    .map(|(i, &(r, s))| bv(&format!("b{i}"), r, s))
                    .collect();
                (
                    BasedCorrespondence::new(VertexSet::new(names).unwrap(), basis).unwrap(),
                    seed,
                )
            })
        })
    }

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
        crate::fdalg::random_vector(rng, n)
    }

    fn rand_afunc(rng: &mut ChaCha8Rng, n: usize) -> AFunc {
        AFunc(rand_vec(rng, n).iter().copied().collect())
    }

    proptest! {
        #[test]
        fn module_axioms((c, seed) in random_corr()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = c.dim();
            let nv = c.vertices().len();
            let (x, y) = (rand_vec(&mut rng, n), rand_vec(&mut rng, n));
            let a = rand_afunc(&mut rng, nv);
            let lhs = c.inner_coords(&x, &c.right_coords(&y, &a));
            let rhs = c.inner_coords(&x, &y).mul(&a);
            prop_assert!(lhs.0.iter().zip(&rhs.0).all(|(p, q)| (p - q).norm() < 1e-12));
            let lhs = c.inner_coords(&c.right_coords(&x, &a), &y);
            let rhs = a.conj().mul(&c.inner_coords(&x, &y));
            prop_assert!(lhs.0.iter().zip(&rhs.0).all(|(p, q)| (p - q).norm() < 1e-12));
            let xx = c.inner_coords(&x, &x);
            prop_assert!(xx.0.iter().all(|z| z.re >= 0.0 && z.im.abs() < 1e-14));
            prop_assert_eq!(c.phi(&AFunc::one(nv)).unwrap(), Mat::identity(n, n));
        }

        #[test]
        fn cauchy_schwarz((c, seed) in random_corr()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y) = (rand_vec(&mut rng, c.dim()), rand_vec(&mut rng, c.dim()));
            let ip = c.inner_coords(&x, &y).max_abs();
            prop_assert!(ip <= c.norm(&x) * c.norm(&y) + 1e-12);
        }

        #[test]
        fn theta_composition((c, seed) in random_corr()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = c.dim();
            let (x, y, u, v) = (rand_vec(&mut rng, n), rand_vec(&mut rng, n), rand_vec(&mut rng, n), rand_vec(&mut rng, n));
            let lhs = c.theta_coords(&x, &y) * c.theta_coords(&u, &v);
            let xa = c.right_coords(&x, &c.inner_coords(&y, &u));
            prop_assert!(max_abs_diff(&lhs, &c.theta_coords(&xa, &v)) < 1e-9);
        }
    }
}
