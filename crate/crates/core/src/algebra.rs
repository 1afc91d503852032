//! Matrix algebras generated by error operators and their structural
//! subspaces: the Jacobson radical, the common null space and the span of
//! the irreducible invariant subspaces.

use std::collections::HashSet;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    column_space, hcat, hs_inner, nullspace_rel, vcat, CMatrix, Subspace, Tolerance,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("operator set is empty")]
    Empty,
    #[error("operator `{name}` is {rows}×{cols}, expected {dim}×{dim}")]
    WrongShape {
        name: String,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("duplicate operator name `{0}`")]
    DuplicateName(String),
    #[error("operator `{0}` has non-finite entries")]
    NotFinite(String),
    #[error("dimension must be positive")]
    ZeroDimension,
}

/// A named, non-empty list of d×d operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    dim: usize,
    names: Vec<String>,
    ops: Vec<CMatrix>,
}

impl OperatorSet {
    pub fn new(dim: usize, named: Vec<(String, CMatrix)>) -> Result<Self, AlgebraError> {
        if dim == 0 {
            return Err(AlgebraError::ZeroDimension);
        }
        if named.is_empty() {
            return Err(AlgebraError::Empty);
        }
        let mut seen = HashSet::new();
        let mut names = Vec::with_capacity(named.len());
        let mut ops = Vec::with_capacity(named.len());
        for (name, m) in named {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(AlgebraError::WrongShape {
                    name,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    dim,
                });
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(AlgebraError::NotFinite(name));
            }
            if !seen.insert(name.clone()) {
                return Err(AlgebraError::DuplicateName(name));
            }
            names.push(name);
            ops.push(m);
        }
        Ok(Self { dim, names, ops })
    }

    /// Operators named `E0`, `E1`, ...
    pub fn from_matrices(ops: Vec<CMatrix>) -> Result<Self, AlgebraError> {
        let dim = ops.first().map(|m| m.nrows()).ok_or(AlgebraError::Empty)?;
        Self::new(
            dim,
            ops.into_iter()
                .enumerate()
                .map(|(i, m)| (format!("E{i}"), m))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CMatrix)> {
        self.names.iter().map(|s| s.as_str()).zip(self.ops.iter())
    }

    pub fn get(&self, name: &str) -> Option<&CMatrix> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.ops[i])
    }

    /// Σ E†E.
    pub fn gram_sum(&self) -> CMatrix {
        self.ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, e| {
                acc + e.adjoint() * e
            })
    }
}

/// A linear space of d×d matrices closed under multiplication, stored as a
/// trace-orthonormal basis.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    dim: usize,
    generators: Vec<CMatrix>,
    basis: Vec<CMatrix>,
    contains_identity: bool,
    dagger_closed: bool,
    tol: Tolerance,
}

/// Appends the component of `m` orthogonal to `basis` when it is not already
/// (relatively) inside the span. Classical Gram–Schmidt with one
/// re-orthogonalization pass.
fn try_adjoin(basis: &mut Vec<CMatrix>, m: &CMatrix, cutoff: f64) -> bool {
    let norm = m.norm();
    if norm == 0.0 {
        return false;
    }
    let mut res = m.unscale(norm);
    for _ in 0..2 {
        for b in basis.iter() {
            let coef = hs_inner(b, &res);
            res -= b * coef;
        }
    }
    let rn = res.norm();
    if rn <= cutoff {
        return false;
    }
    basis.push(res.unscale(rn));
    true
}

fn span_residual(basis: &[CMatrix], m: &CMatrix) -> f64 {
    let mut res = m.clone();
    for _ in 0..2 {
        for b in basis {
            let coef = hs_inner(b, &res);
            res -= b * coef;
        }
    }
    res.norm()
}

impl MatrixAlgebra {
    /// Algebra generated by arbitrary matrices: adjoins left products by the
    /// generators until the span is closed.
    pub fn generate(dim: usize, generators: &[CMatrix], tol: &Tolerance) -> Self {
        let cutoff = tol.span_cutoff();
        let mut basis: Vec<CMatrix> = Vec::new();
        let normalized: Vec<CMatrix> = generators
            .iter()
            .filter(|g| g.norm() > 0.0)
            .map(|g| g.unscale(g.norm()))
            .collect();
        for g in &normalized {
            try_adjoin(&mut basis, g, cutoff);
        }
        // Every word g_1 g_2 ... g_k is g_1 times a shorter word, so closing
        // under left multiplication by generators closes the span.
        let mut next = 0;
        while next < basis.len() && basis.len() < dim * dim {
            let b = basis[next].clone();
            for g in &normalized {
                try_adjoin(&mut basis, &(g * &b), cutoff);
                if basis.len() == dim * dim {
                    break;
                }
            }
            next += 1;
        }
        Self::from_parts(dim, generators.to_vec(), basis, tol)
    }

    /// Wraps an orthonormal basis already known to span an algebra.
    fn from_parts(
        dim: usize,
        generators: Vec<CMatrix>,
        basis: Vec<CMatrix>,
        tol: &Tolerance,
    ) -> Self {
        let cutoff = tol.span_cutoff();
        let id = CMatrix::identity(dim, dim);
        let contains_identity =
            !basis.is_empty() && span_residual(&basis, &id) <= cutoff * id.norm();
        let dagger_closed = basis
            .iter()
            .all(|b| span_residual(&basis, &b.adjoint()) <= cutoff);
        Self {
            dim,
            generators,
            basis,
            contains_identity,
            dagger_closed,
            tol: *tol,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the algebra as a vector space.
    pub fn algebra_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    pub fn dagger_closed(&self) -> bool {
        self.dagger_closed
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    /// Norm of the component of `m` outside the algebra.
    pub fn residual(&self, m: &CMatrix) -> f64 {
        span_residual(&self.basis, m)
    }

    pub fn contains(&self, m: &CMatrix) -> bool {
        self.residual(m) <= self.tol.span_cutoff() * m.norm().max(1.0)
    }

    /// Largest relative out-of-span component over all basis products.
    pub fn closure_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            for b in &self.basis {
                let p = a * b;
                let n = p.norm();
                if n > 0.0 {
                    worst = worst.max(self.residual(&p) / n);
                }
            }
        }
        worst
    }

    /// Action of the algebra on an invariant subspace, in the subspace's
    /// orthonormal coordinates.
    pub fn restrict(&self, space: &Subspace) -> MatrixAlgebra {
        let k = space.dim();
        let compressed: Vec<CMatrix> = self.basis.iter().map(|b| space.compress(b)).collect();
        let cutoff = self.tol.span_cutoff();
        let mut basis = Vec::new();
        // Basis elements have unit norm, so a compression below the cutoff
        // is rounding noise of an element vanishing on `space`.
        for m in compressed.iter().filter(|m| m.norm() > cutoff) {
            try_adjoin(&mut basis, m, cutoff);
        }
        Self::from_parts(k, compressed, basis, &self.tol)
    }
}

/// Smallest algebra containing the error operators.
pub fn generate_algebra(errs: &OperatorSet, tol: &Tolerance) -> MatrixAlgebra {
    MatrixAlgebra::generate(errs.dim(), errs.operators(), tol)
}

/// 𝒜 + ℂI.
pub fn adjoin_identity(alg: &MatrixAlgebra) -> MatrixAlgebra {
    if alg.contains_identity {
        return alg.clone();
    }
    let mut basis = alg.basis.clone();
    let id = CMatrix::identity(alg.dim, alg.dim);
    try_adjoin(&mut basis, &id, 0.0);
    let mut out = MatrixAlgebra::from_parts(alg.dim, alg.generators.clone(), basis, &alg.tol);
    out.contains_identity = true;
    out
}

/// Algebra generated by the basis and its adjoints.
pub fn dagger_closure(alg: &MatrixAlgebra) -> MatrixAlgebra {
    if alg.dagger_closed {
        return alg.clone();
    }
    let mut gens: Vec<CMatrix> = alg.basis.clone();
    gens.extend(alg.basis.iter().map(|b| b.adjoint()));
    let mut out = MatrixAlgebra::generate(alg.dim, &gens, &alg.tol);
    out.generators = alg.generators.clone();
    out.dagger_closed = true;
    out
}

/// A subspace of matrix space stored as trace-orthonormal matrices.
#[derive(Debug, Clone)]
pub struct MatrixSpace {
    pub dim: usize,
    pub elements: Vec<CMatrix>,
}

impl MatrixSpace {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The elements as columns of vec(·), i.e. a subspace of ℂ^{d²}.
    pub fn as_subspace(&self) -> Subspace {
        let cols: Vec<CMatrix> = self
            .elements
            .iter()
            .map(|e| CMatrix::from_column_slice(e.len(), 1, e.as_slice()))
            .collect();
        let refs: Vec<&CMatrix> = cols.iter().collect();
        if refs.is_empty() {
            return Subspace::zero(self.dim * self.dim);
        }
        Subspace::from_orthonormal(hcat(&refs))
    }

    pub fn residual(&self, m: &CMatrix) -> f64 {
        span_residual(&self.elements, m)
    }
}

/// Jacobson radical as the kernel of the trace form tr(x·y) on the unital
/// closure of `alg`.
pub fn jacobson_radical(alg: &MatrixAlgebra, tol: &Tolerance) -> MatrixSpace {
    let unital = adjoin_identity(alg);
    let n = unital.basis.len();
    let gram = CMatrix::from_fn(n, n, |a, b| {
        trace_product(&unital.basis[a], &unital.basis[b])
    });
    let (_, null) = nullspace_rel(&gram, tol.eps_residual);
    let elements = null
        .basis()
        .column_iter()
        .map(|x| {
            x.iter()
                .zip(&unital.basis)
                .fold(CMatrix::zeros(alg.dim, alg.dim), |acc, (coef, b)| {
                    acc + b * *coef
                })
        })
        .collect();
    MatrixSpace {
        dim: alg.dim,
        elements,
    }
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    // tr(ab) = Σ_ij a_ij b_ji
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Common null space of all elements of the algebra.
pub fn zero_space(alg: &MatrixAlgebra, tol: &Tolerance) -> Subspace {
    common_null_space(alg.dim, &alg.basis, tol.eps_rank)
}

fn common_null_space(dim: usize, ops: &[CMatrix], rel: f64) -> Subspace {
    if ops.is_empty() {
        return Subspace::full(dim);
    }
    let refs: Vec<&CMatrix> = ops.iter().collect();
    nullspace_rel(&vcat(&refs), rel).1
}

/// Null space of the radical, split into the span of irreducible subspaces
/// (where the algebra acts non-trivially) and the common null space.
#[derive(Debug, Clone)]
pub struct SemisimpleSplit {
    /// Common null space of the radical of the unital closure.
    pub radical_null: Subspace,
    /// Span of the irreducible invariant subspaces.
    pub semisimple: Subspace,
    /// Common null space of the (non-unital) algebra.
    pub zero: Subspace,
}

/// `alg` is the algebra generated by the errors, without an adjoined identity;
/// `radical` comes from its unital closure.
pub fn semisimple_span(
    alg: &MatrixAlgebra,
    radical: &MatrixSpace,
    tol: &Tolerance,
) -> SemisimpleSplit {
    let radical_null = common_null_space(alg.dim, &radical.elements, tol.eps_residual);
    let zero = zero_space(alg, tol);
    let semisimple = if alg.contains_identity || zero.dim() == 0 {
        radical_null.clone()
    } else if radical_null.dim() == 0 {
        Subspace::zero(alg.dim)
    } else {
        // 𝒜 restricted to the radical's null space is semisimple, so its unit
        // projects onto the irreducible part along 𝒵: 𝒮 = 𝒜·𝒩.
        let images: Vec<CMatrix> = alg.basis.iter().map(|b| b * radical_null.basis()).collect();
        let refs: Vec<&CMatrix> = images.iter().collect();
        column_space(&hcat(&refs), 1e-10)
    };
    SemisimpleSplit {
        radical_null,
        semisimple,
        zero,
    }
}

/// Radical, zero space and semisimple span of one algebra.
#[derive(Debug, Clone)]
pub struct AlgebraStructure {
    pub radical: MatrixSpace,
    pub zero_space: Subspace,
    pub semisimple_span: Subspace,
    pub radical_null: Subspace,
}

pub fn analyze(alg: &MatrixAlgebra, tol: &Tolerance) -> AlgebraStructure {
    let radical = jacobson_radical(alg, tol);
    let split = semisimple_span(alg, &radical, tol);
    AlgebraStructure {
        radical,
        zero_space: split.zero,
        semisimple_span: split.semisimple,
        radical_null: split.radical_null,
    }
}

/// Invariance of `s` under the algebra: max ‖(I − P)·B·P‖ over the basis.
pub fn is_invariant(alg: &MatrixAlgebra, s: &Subspace, tol: &Tolerance) -> (bool, f64) {
    let residual = invariance_residual(&alg.basis, s);
    (residual <= tol.eps_residual, residual)
}

pub(crate) fn invariance_residual(ops: &[CMatrix], s: &Subspace) -> f64 {
    ops.iter()
        .map(|b| {
            let scale = b.norm().max(f64::MIN_POSITIVE);
            s.leakage(&(b * s.basis())) / scale
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        ginibre, pauli_x, pauli_z, r, rng_from_seed, unit, vectorize, CVector, ONE, ZERO,
    };

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn alg_of(ops: Vec<CMatrix>) -> MatrixAlgebra {
        generate_algebra(&OperatorSet::from_matrices(ops).unwrap(), &tol())
    }

    /// Independent dimension count: rank of all words of length ≤ d² in the
    /// generators, stacked as vectors.
    fn brute_force_dim(gens: &[CMatrix]) -> usize {
        let d = gens[0].nrows();
        let mut words: Vec<CMatrix> = gens.to_vec();
        let mut frontier = gens.to_vec();
        for _ in 0..2 * d {
            let mut next = Vec::new();
            for w in &frontier {
                for g in gens {
                    next.push(g * w);
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }
        let cols: Vec<CMatrix> = words
            .iter()
            .map(|w| CMatrix::from_column_slice(d * d, 1, vectorize(w).as_slice()))
            .collect();
        let refs: Vec<&CMatrix> = cols.iter().collect();
        crate::linalg::rank(&hcat(&refs), 1e-12)
    }

    #[test]
    fn operator_set_validation() {
        assert_eq!(OperatorSet::new(2, vec![]), Err(AlgebraError::Empty));
        let bad = OperatorSet::new(2, vec![("a".into(), CMatrix::identity(3, 3))]);
        assert!(matches!(bad, Err(AlgebraError::WrongShape { .. })));
        let dup = OperatorSet::new(
            2,
            vec![
                ("a".into(), CMatrix::identity(2, 2)),
                ("a".into(), pauli_x()),
            ],
        );
        assert_eq!(dup, Err(AlgebraError::DuplicateName("a".into())));
        let mut nan = CMatrix::identity(2, 2);
        nan[(0, 0)] = r(f64::NAN);
        assert!(matches!(
            OperatorSet::new(2, vec![("n".into(), nan)]),
            Err(AlgebraError::NotFinite(_))
        ));
    }

    #[test]
    fn generation_examples() {
        let a = alg_of(vec![CMatrix::identity(2, 2)]);
        assert_eq!(a.algebra_dim(), 1);
        assert!(a.contains_identity());

        let gens = vec![pauli_x(), pauli_z()];
        let a = alg_of(gens.clone());
        assert_eq!(a.algebra_dim(), 4);
        assert_eq!(brute_force_dim(&gens), 4);

        let a = alg_of(vec![unit(2, 0, 1)]);
        assert_eq!(a.algebra_dim(), 1);
        assert!(!a.contains_identity());
    }

    #[test]
    fn generated_algebras_are_closed() {
        let mut rng = rng_from_seed(4);
        for d in 2..5 {
            let gens = vec![ginibre(d, d, &mut rng), unit(d, 0, d - 1)];
            let a = alg_of(gens.clone());
            assert!(a.closure_defect() < 1e-10);
            assert!(a.algebra_dim() <= d * d);
            assert_eq!(a.algebra_dim(), brute_force_dim(&gens));
        }
    }

    #[test]
    fn identity_adjoinment() {
        let a = alg_of(vec![CMatrix::identity(2, 2)]);
        assert_eq!(adjoin_identity(&a).algebra_dim(), 1);
        let a = adjoin_identity(&alg_of(vec![unit(2, 0, 1)]));
        assert_eq!(a.algebra_dim(), 2);
        assert!(a.contains_identity());
        assert!(a.contains(&unit(2, 0, 1)) && a.contains(&CMatrix::identity(2, 2)));
        let full = alg_of(vec![pauli_x(), pauli_z()]);
        assert_eq!(adjoin_identity(&full).algebra_dim(), 4);
    }

    #[test]
    fn dagger_closure_examples() {
        let a = alg_of(vec![CMatrix::identity(2, 2), pauli_x()]);
        assert!(a.dagger_closed());
        assert_eq!(dagger_closure(&a).algebra_dim(), 2);
        let a = dagger_closure(&alg_of(vec![unit(2, 0, 1)]));
        assert_eq!(a.algebra_dim(), 4);
        assert!(a.dagger_closed());
        let again = dagger_closure(&a);
        assert_eq!(again.algebra_dim(), a.algebra_dim());
    }

    #[test]
    fn radical_examples() {
        let full = alg_of(vec![pauli_x(), pauli_z()]);
        assert!(jacobson_radical(&full, &tol()).is_empty());

        let upper = alg_of(vec![unit(2, 0, 0), unit(2, 0, 1), unit(2, 1, 1)]);
        let rad = jacobson_radical(&upper, &tol());
        assert_eq!(rad.len(), 1);
        assert!(rad.residual(&unit(2, 0, 1)) < 1e-12);

        let diag = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE]));
        let comm = alg_of(vec![CMatrix::identity(2, 2), diag]);
        assert!(jacobson_radical(&comm, &tol()).is_empty());
    }

    #[test]
    fn radical_is_nilpotent_ideal() {
        let mut rng = rng_from_seed(21);
        // block upper triangular with blocks (2, 1) conjugated by a random T
        let d = 3;
        let mask = |i: usize, j: usize| !(i == 2 && j < 2);
        let t = ginibre(d, d, &mut rng) + CMatrix::identity(d, d) * r(3.0);
        let tinv = t.clone().try_inverse().unwrap();
        let gens: Vec<CMatrix> = (0..2)
            .map(|_| {
                let g = ginibre(d, d, &mut rng);
                let g = CMatrix::from_fn(d, d, |i, j| if mask(i, j) { g[(i, j)] } else { ZERO });
                &t * g * &tinv
            })
            .collect();
        let a = alg_of(gens);
        assert_eq!(a.algebra_dim(), 7);
        let rad = jacobson_radical(&a, &tol());
        assert_eq!(rad.len(), 2);
        for x in &rad.elements {
            assert!((x * x * x).norm() < 1e-9);
            for b in a.basis() {
                assert!(rad.residual(&(x * b)) < 1e-9);
                assert!(rad.residual(&(b * x)) < 1e-9);
            }
        }
    }

    #[test]
    fn zero_space_examples() {
        assert_eq!(
            zero_space(&alg_of(vec![CMatrix::identity(2, 2)]), &tol()).dim(),
            0
        );
        let z = zero_space(&alg_of(vec![unit(2, 0, 0)]), &tol());
        assert_eq!(z.dim(), 1);
        assert!(z.basis()[(1, 0)].norm() > 1.0 - 1e-12);
        let z = zero_space(&alg_of(vec![unit(3, 0, 0), unit(3, 0, 1)]), &tol());
        assert_eq!(z.dim(), 1);
        assert!(z.basis()[(2, 0)].norm() > 1.0 - 1e-12);
    }

    #[test]
    fn semisimple_span_examples() {
        let full = alg_of(vec![pauli_x(), pauli_z()]);
        let s = analyze(&full, &tol());
        assert_eq!((s.semisimple_span.dim(), s.zero_space.dim()), (2, 0));

        let upper = alg_of(vec![unit(2, 0, 0), unit(2, 0, 1), unit(2, 1, 1)]);
        let s = analyze(&upper, &tol());
        assert_eq!(s.semisimple_span.dim(), 1);
        assert!(s.semisimple_span.basis()[(0, 0)].norm() > 1.0 - 1e-12);

        // e_01 = |0⟩⟨1| annihilates |0⟩, so 𝒵 = span{|0⟩}; the radical of the
        // unital closure is span{e_01} with null space span{|0⟩} = 𝒵, and no
        // irreducible subspace with non-zero action remains.
        let nil = alg_of(vec![unit(2, 0, 1)]);
        let s = analyze(&nil, &tol());
        assert_eq!(s.radical.len(), 1);
        assert_eq!(s.zero_space.dim(), 1);
        assert!(s.zero_space.basis()[(0, 0)].norm() > 1.0 - 1e-12);
        assert!(s.radical_null.distance(&s.zero_space) < 1e-12);
        assert_eq!(s.semisimple_span.dim(), 0);
    }

    #[test]
    fn semisimple_and_zero_are_invariant() {
        let mut rng = rng_from_seed(8);
        // ℂ^4 = (2-dim block with full action) ⊕ (nilpotent tail) ⊕ zero
        let mut gens = Vec::new();
        for _ in 0..2 {
            let g = ginibre(2, 2, &mut rng);
            let mut m = CMatrix::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(&g);
            m[(0, 2)] = ginibre(1, 1, &mut rng)[(0, 0)];
            gens.push(m);
        }
        let a = alg_of(gens);
        let s = analyze(&a, &tol());
        assert_eq!(s.semisimple_span.dim(), 2);
        assert!(is_invariant(&a, &s.semisimple_span, &tol()).0);
        assert!(is_invariant(&a, &s.zero_space, &tol()).0);
    }

    #[test]
    fn invariance_examples() {
        let full = alg_of(vec![pauli_x(), pauli_z()]);
        let (ok, res) = is_invariant(&full, &Subspace::full(2), &tol());
        assert!(ok && res < 1e-15);

        let diag = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, r(2.0), r(3.0)]));
        let comm = alg_of(vec![diag]);
        let e0 = Subspace::from_orthonormal(CMatrix::identity(3, 1));
        assert!(is_invariant(&comm, &e0, &tol()).0);

        let mut rng = rng_from_seed(2);
        let big = alg_of(vec![ginibre(3, 3, &mut rng), ginibre(3, 3, &mut rng)]);
        let v = Subspace::span_of(&ginibre(3, 1, &mut rng), 1e-12);
        let (ok, res) = is_invariant(&big, &v, &tol());
        assert!(!ok && res > 0.1);
    }
}
