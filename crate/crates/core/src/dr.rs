//! Doplicher-Roberts data: unitary representations of a finite group, their
//! tensor powers, intertwiner dimensions and the induced product system.

use crate::action::{permutations, FiniteGroup, SystemAction};
use crate::error::{Error, Result};
use crate::fdalg::{
    intertwiner_space, kron, max_abs_diff, null_space, permutation_matrix, unitarity_residual, Mat, Tol, C64,
};
use crate::prodsys::{one_vertex_system, IndexVector, ProductSystem};
use crate::report::Report;

const INTEGRALITY: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Representation {
    group: FiniteGroup,
    dim: usize,
    mats: Vec<Mat>,
}

impl Representation {
    /// Only shapes are checked here; see [`Representation::check`].
    pub fn new(group: FiniteGroup, mats: Vec<Mat>) -> Result<Self> {
        if mats.len() != group.order() {
            return Err(Error::Dimension(format!(
                "{} matrices for a group of order {}",
                mats.len(),
                group.order()
            )));
        }
        let dim = mats.first().map_or(0, |m| m.nrows());
        if dim == 0 || mats.iter().any(|m| m.shape() != (dim, dim)) {
            return Err(Error::Dimension("representation matrices must be square of one positive size".into()));
        }
        Ok(Self { group, dim, mats })
    }

    pub fn trivial(group: FiniteGroup) -> Self {
        let mats = vec![Mat::identity(1, 1); group.order()];
        Self { group, dim: 1, mats }
    }

    /// Permutation representation of `S_n` on `ℂ^n`.
    pub fn permutation(n: usize) -> Self {
        let mats = permutations(n).iter().map(|p| permutation_matrix(p)).collect();
        Self {
            group: FiniteGroup::symmetric(n),
            dim: n,
            mats,
        }
    }

    pub fn sign(n: usize) -> Self {
        let mats = permutations(n)
            .iter()
            .map(|p| {
                let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
                Mat::from_element(1, 1, C64::new(if inversions % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            })
            .collect();
        Self {
            group: FiniteGroup::symmetric(n),
            dim: 1,
            mats,
        }
    }

    /// The `(n-1)`-dimensional standard representation of `S_n` on the
    /// sum-zero vectors, in an orthonormal basis.
    pub fn standard(n: usize) -> Self {
        let mut u = Mat::zeros(n, n - 1);
        for k in 1..n {
            let norm = ((k * (k + 1)) as f64).sqrt();
            for i in 0..k {
                u[(i, k - 1)] = C64::new(1.0 / norm, 0.0);
            }
            u[(k, k - 1)] = C64::new(-(k as f64) / norm, 0.0);
        }
        let perm = Self::permutation(n);
        let mats = perm.mats.iter().map(|p| u.adjoint() * p * &u).collect();
        Self {
            group: perm.group,
            dim: n - 1,
            mats,
        }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mats(&self) -> &[Mat] {
        &self.mats
    }

    pub fn character(&self) -> Vec<C64> {
        self.mats.iter().map(|m| m.trace()).collect()
    }

    pub fn tensor(&self, other: &Representation) -> Representation {
        Representation {
            group: self.group.clone(),
            dim: self.dim * other.dim,
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| kron(a, b)).collect(),
        }
    }

    /// Homomorphism and unitarity residuals.
    pub fn check(&self, tol: Tol) -> Report {
        let mut hom = 0.0f64;
        let n = self.group.order();
        for g in 0..n {
            for h in 0..n {
                let prod = &self.mats[g] * &self.mats[h];
                hom = hom.max(max_abs_diff(&prod, &self.mats[self.group.mul(g, h)]));
            }
        }
        let unitary = self.mats.iter().map(unitarity_residual).fold(0.0, f64::max);
        let mut r = Report::new();
        r.residual("homomorphism", "representation", hom, tol.eps_eq);
        r.residual("unitary", "representation", unitary, tol.eps_eq);
        r
    }
}

/// Representations `ρ_1, …, ρ_k` of one group.
#[derive(Debug, Clone)]
pub struct DRSpec {
    reps: Vec<Representation>,
}

impl DRSpec {
    pub fn new(reps: Vec<Representation>) -> Result<Self> {
        let Some(first) = reps.first() else {
            return Err(Error::Domain("at least one representation is needed".into()));
        };
        if reps.iter().any(|r| r.group.table() != first.group.table()) {
            return Err(Error::Parent("representations must share one group".into()));
        }
        Ok(Self { reps })
    }

    pub fn k(&self) -> usize {
        self.reps.len()
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.reps[0].group
    }

    pub fn reps(&self) -> &[Representation] {
        &self.reps
    }

    pub fn check(&self, tol: Tol) -> Report {
        let mut r = Report::new();
        for (i, rep) in self.reps.iter().enumerate() {
            r.extend_prefixed(&format!("rho{}.", i + 1), rep.check(tol));
        }
        r
    }

    fn check_degree(&self, n: &IndexVector, cap: usize) -> Result<()> {
        if n.k() != self.k() {
            return Err(Error::Dimension(format!("degree {n} for {} representations", self.k())));
        }
        if n.degree() > cap {
            return Err(Error::Cap { degree: n.degree(), cap });
        }
        Ok(())
    }
}

/// `ρ^n = ρ_1^{⊗n_1} ⊗ … ⊗ ρ_k^{⊗n_k}`.
pub fn tensor_rep(spec: &DRSpec, n: &IndexVector, cap: usize) -> Result<Representation> {
    spec.check_degree(n, cap)?;
    let mut acc = Representation::trivial(spec.group().clone());
    for (i, &ni) in n.0.iter().enumerate() {
        for _ in 0..ni {
            acc = acc.tensor(&spec.reps[i]);
        }
    }
    Ok(acc)
}

fn power_character(spec: &DRSpec, n: &IndexVector) -> Vec<C64> {
    let chars: Vec<Vec<C64>> = spec.reps.iter().map(Representation::character).collect();
    (0..spec.group().order())
        .map(|g| {
            n.0.iter()
                .enumerate()
                .map(|(i, &ni)| chars[i][g].powu(ni as u32))
                .product()
        })
        .collect()
}

/// `dim Hom(ρ^n, ρ^m)` from the character pairing.
pub fn hom_dim_char(spec: &DRSpec, n: &IndexVector, m: &IndexVector, cap: usize) -> Result<usize> {
    spec.check_degree(n, cap)?;
    spec.check_degree(m, cap)?;
    let (cn, cm) = (power_character(spec, n), power_character(spec, m));
    let order = spec.group().order() as f64;
    let x: C64 = cn.iter().zip(&cm).map(|(a, b)| a.conj() * b).sum::<C64>() / order;
    let rounded = x.re.round();
    if (x - C64::new(rounded, 0.0)).norm() > INTEGRALITY || rounded < 0.0 {
        return Err(Error::Numerical(format!(
            "character pairing of {n} and {m} is {x}, not a non-negative integer"
        )));
    }
    Ok(rounded as usize)
}

/// Basis of `{T : ρ^m(g) T = T ρ^n(g)}`.
pub fn hom_basis(spec: &DRSpec, n: &IndexVector, m: &IndexVector, cap: usize, tol: Tol) -> Result<Vec<Mat>> {
    let (rn, rm) = (tensor_rep(spec, n, cap)?, tensor_rep(spec, m, cap)?);
    let pairs: Vec<(Mat, Mat)> = rn.mats.into_iter().zip(rm.mats).collect();
    intertwiner_space(&pairs, tol)
}

/// One-vertex system with generator dimensions `d_i`, tensor-factor
/// transpositions as flips, and `W^{e_i}_g = ρ_i(g)`.
pub fn dr_system(spec: &DRSpec, cap: usize, tol: Tol) -> Result<(ProductSystem, SystemAction)> {
    let r = spec.check(tol);
    if !r.passed() {
        return Err(Error::Validation(Box::new(r)));
    }
    let dims: Vec<usize> = spec.reps.iter().map(|r| r.dim).collect();
    let ps = one_vertex_system(&dims, cap)?;
    let group = spec.group().clone();
    let alpha = vec![vec![0]; group.order()];
    let w = spec.reps.iter().map(|r| r.mats.clone()).collect();
    let act = SystemAction::new(&ps, group, alpha, w)?;
    Ok((ps, act))
}

/// `(dim K(Y_n)^τ, hom_dim_char(n, n))`, the first from the null space of
/// `τ_g − 1` on vectorized operators.
pub fn invariant_core_dim(spec: &DRSpec, n: &IndexVector, cap: usize, tol: Tol) -> Result<(usize, usize)> {
    let rep = tensor_rep(spec, n, cap)?;
    let d = rep.dim;
    let dd = d * d;
    let id = Mat::identity(dd, dd);
    let mut stacked = Mat::zeros(dd * rep.mats.len(), dd);
    for (g, m) in rep.mats.iter().enumerate() {
        // vec(ρ T ρ*) = (conj ρ ⊗ ρ) vec T
        let block = kron(&m.map(|c| c.conj()), m) - &id;
        stacked.view_mut((g * dd, 0), (dd, dd)).copy_from(&block);
    }
    let fixed = null_space(&stacked, tol)?.len();
    Ok((fixed, hom_dim_char(spec, n, n, cap)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{check_action, multiplicativity_residual};
    use crate::fdalg::ONE;

    fn s3() -> DRSpec {
        DRSpec::new(vec![
            Representation::trivial(FiniteGroup::symmetric(3)),
            Representation::sign(3),
            Representation::standard(3),
        ])
        .unwrap()
    }

    fn iv(v: &[usize]) -> IndexVector {
        IndexVector(v.to_vec())
    }

    #[test]
    fn builtin_reps_are_valid() {
        for rep in [Representation::permutation(3), Representation::sign(3), Representation::standard(3), Representation::standard(4)] {
            assert!(rep.check(Tol::default()).passed());
        }
        let chi = Representation::standard(3).character();
        let mut values: Vec<i64> = chi.iter().map(|c| c.re.round() as i64).collect();
        values.sort_unstable();
        assert_eq!(values, vec![-1, -1, 0, 0, 0, 2]);
    }

    #[test]
    fn tensor_powers() {
        let spec = s3();
        assert_eq!(tensor_rep(&spec, &iv(&[0, 0, 0]), 4).unwrap().dim(), 1);
        let s = tensor_rep(&spec, &iv(&[0, 0, 1]), 4).unwrap();
        assert_eq!(s.mats(), spec.reps()[2].mats());
        let n = iv(&[1, 1, 2]);
        let r = tensor_rep(&spec, &n, 4).unwrap();
        assert_eq!(r.dim(), 4);
        let oracle = power_character(&spec, &n);
        for (a, b) in r.character().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(matches!(tensor_rep(&spec, &iv(&[3, 0, 2]), 4), Err(Error::Cap { .. })));
    }

    #[test]
    fn s3_hom_dims() {
        let spec = s3();
        let (z, s, ss) = (iv(&[0, 0, 0]), iv(&[0, 0, 1]), iv(&[0, 0, 2]));
        assert_eq!(hom_dim_char(&spec, &z, &z, 3).unwrap(), 1);
        assert_eq!(hom_dim_char(&spec, &s, &s, 3).unwrap(), 1);
        assert_eq!(hom_dim_char(&spec, &ss, &ss, 3).unwrap(), 3);
        assert_eq!(hom_dim_char(&spec, &s, &ss, 3).unwrap(), 1);
        assert_eq!(hom_dim_char(&spec, &z, &ss, 3).unwrap(), 1);
    }

    #[test]
    fn schur_and_sign_square() {
        let spec = s3();
        let s = iv(&[0, 0, 1]);
        let basis = hom_basis(&spec, &s, &s, 3, Tol::default()).unwrap();
        assert_eq!(basis.len(), 1);
        let t = &basis[0];
        let scalar = t[(0, 0)];
        assert!(max_abs_diff(t, &(Mat::identity(2, 2) * scalar)) < 1e-12);

        let z2 = DRSpec::new(vec![Representation::new(
            FiniteGroup::cyclic(2),
            vec![Mat::identity(1, 1), Mat::from_element(1, 1, -ONE)],
        )
        .unwrap()])
        .unwrap();
        assert_eq!(hom_basis(&z2, &iv(&[2]), &iv(&[0]), 3, Tol::default()).unwrap().len(), 1);
        assert_eq!(hom_basis(&z2, &iv(&[1]), &iv(&[0]), 3, Tol::default()).unwrap().len(), 0);
    }

    #[test]
    fn two_methods_agree_on_grid() {
        let spec = s3();
        let degrees = IndexVector::all_up_to(3, 3);
        for n in &degrees {
            for m in &degrees {
                let c = hom_dim_char(&spec, n, m, 3).unwrap();
                assert_eq!(hom_basis(&spec, n, m, 3, Tol::default()).unwrap().len(), c, "{n} {m}");
                assert_eq!(hom_dim_char(&spec, m, n, 3).unwrap(), c);
            }
        }
    }

    #[test]
    fn corrupted_rep_is_non_integral() {
        let mut mats = Representation::standard(3).mats().to_vec();
        mats[1][(0, 0)] += C64::new(0.3, 0.0);
        let bad = Representation::new(FiniteGroup::symmetric(3), mats).unwrap();
        assert!(!bad.check(Tol::default()).passed());
        let spec = DRSpec::new(vec![bad]).unwrap();
        assert!(matches!(hom_dim_char(&spec, &iv(&[1]), &iv(&[1]), 2), Err(Error::Numerical(_))));
        assert!(matches!(dr_system(&spec, 2, Tol::default()), Err(Error::Validation(_))));
    }

    #[test]
    fn dr_system_action() {
        let spec = s3();
        let (ps, act) = dr_system(&spec, 3, Tol::default()).unwrap();
        assert_eq!(ps.fiber_dim(&iv(&[1, 1, 2])), 4);
        assert!(check_action(&ps, &act, Tol::default()).passed());
        let (p, q) = (iv(&[0, 1, 1]), iv(&[1, 0, 1]));
        assert!(multiplicativity_residual(&ps, &act, &p, &q) < 1e-12);
        // fiber unitaries are the tensor-power representation
        let n = iv(&[0, 1, 2]);
        let r = tensor_rep(&spec, &n, 3).unwrap();
        for g in 0..6 {
            assert!(max_abs_diff(&act.fiber_unitary(&ps, &n, g).unwrap(), &r.mats()[g]) < 1e-12);
        }

        let one = DRSpec::new(vec![Representation::trivial(FiniteGroup::trivial())]).unwrap();
        let (ps, act) = dr_system(&one, 3, Tol::default()).unwrap();
        assert_eq!(ps.fiber_dim(&iv(&[3])), 1);
        assert!(check_action(&ps, &act, Tol::default()).passed());
    }

    #[test]
    fn invariant_core() {
        let spec = s3();
        let tol = Tol::default();
        assert_eq!(invariant_core_dim(&spec, &iv(&[0, 0, 0]), 3, tol).unwrap(), (1, 1));
        assert_eq!(invariant_core_dim(&spec, &iv(&[0, 0, 1]), 3, tol).unwrap(), (1, 1));
        assert_eq!(invariant_core_dim(&spec, &iv(&[0, 0, 2]), 3, tol).unwrap(), (3, 3));
        for n in IndexVector::all_up_to(3, 2) {
            let (a, b) = invariant_core_dim(&spec, &n, 3, tol).unwrap();
            assert_eq!(a, b, "{n}");
        }
    }
}
