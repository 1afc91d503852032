//! Noiseless subsystems of an error set.
//!
//! The search runs in three stages. The span of the irreducible invariant
//! subspaces is split into isotypic components with a random element of the
//! restricted algebra. Each component is then factorized as multiplicity
//! space ⊗ irreducible space. Finally the factorization is made unitary,
//! either directly (the restricted algebra is †-closed), through the fixed
//! point of the represented channel (the generators are a quantum
//! operation), or by falling back to the †-closed algebra generated by the
//! restriction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    analyze, dagger_closure, generate_algebra, invariance_residual, AlgebraError, MatrixAlgebra,
    OperatorSet,
};
use crate::linalg::{
    column_space, derive_seed, eigh, fit_identity_kron, generalized_eigenspaces, hcat, kron,
    min_eigenvalue, op_norm, partial_trace_second, pd_inv_sqrt, pinv_rel, psd_sqrt,
    random_hermitian_in_span, random_in_span, rng_from_seed, unvectorize, CMatrix, LinalgError,
    Subspace, Tolerance,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiselessError {
    #[error("randomized {stage} failed after {attempts} attempts")]
    RetriesExhausted {
        stage: &'static str,
        attempts: usize,
    },
    #[error("component is not isotypic: {0}")]
    NotIsotypic(String),
    #[error("fixed point is not unique (eigenvalue-1 multiplicity {multiplicity})")]
    NotUniqueFixedPoint { multiplicity: usize },
    #[error("no positive definite fixed point")]
    NoPositiveFixedPoint,
    #[error("U†U is not a Kronecker product (relative residual {residual:e})")]
    NotKroneckerFactorable { residual: f64 },
    #[error(
        "completion I − λΣE†E is not positive semidefinite (min eigenvalue {min_eigenvalue:e})"
    )]
    LambdaTooLarge { min_eigenvalue: f64 },
    #[error("encoding is not an isometry (‖V†V − I‖ = {0:e})")]
    NotIsometry(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("component factorization missing")]
    MissingFactorization,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// ℋ_P = (ℋ_I′ ⊗ ℋ_S) ⊕ ℋ_R given by an isometry from ℂ^N ⊗ ℂ^s into ℋ_P.
///
/// Column `a·s + j` of `embed` is the image of |a⟩_I′ ⊗ |j⟩_S.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemEncoding {
    n: usize,
    s_dim: usize,
    embed: CMatrix,
}

impl SubsystemEncoding {
    pub fn new(
        n: usize,
        s_dim: usize,
        embed: CMatrix,
        tol: &Tolerance,
    ) -> Result<Self, NoiselessError> {
        if n == 0 || s_dim == 0 || embed.ncols() != n * s_dim {
            return Err(NoiselessError::DimensionMismatch(format!(
                "embed has {} columns, expected N·s = {}·{}",
                embed.ncols(),
                n,
                s_dim
            )));
        }
        if embed.nrows() < embed.ncols() {
            return Err(NoiselessError::DimensionMismatch(format!(
                "embed is {}×{}: more columns than rows",
                embed.nrows(),
                embed.ncols()
            )));
        }
        let k = embed.ncols();
        let defect = (embed.adjoint() * &embed - CMatrix::identity(k, k)).norm();
        if defect > tol.eps_residual * (k as f64).sqrt().max(1.0) * 10.0 {
            return Err(NoiselessError::NotIsometry(defect));
        }
        Ok(Self { n, s_dim, embed })
    }

    /// Encoding of a subspace with a one-dimensional cosubsystem.
    pub fn subspace(basis: CMatrix, tol: &Tolerance) -> Result<Self, NoiselessError> {
        let n = basis.ncols();
        Self::new(n, 1, basis, tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s_dim(&self) -> usize {
        self.s_dim
    }

    pub fn dim(&self) -> usize {
        self.embed.nrows()
    }

    pub fn embed(&self) -> &CMatrix {
        &self.embed
    }

    /// Projector Π onto ℋ_I′ ⊗ ℋ_S.
    pub fn projector(&self) -> CMatrix {
        &self.embed * self.embed.adjoint()
    }

    pub fn support(&self) -> Subspace {
        Subspace::from_orthonormal(self.embed.clone())
    }

    /// Column index of |a⟩_I′ ⊗ |j⟩_S.
    pub fn index(&self, a: usize, j: usize) -> usize {
        a * self.s_dim + j
    }
}

/// How a component's unitary factorization was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Restricted algebra is †-closed; canonical factorization.
    Canonical,
    /// Non-unitary factorization corrected by the channel fixed point.
    Unitarized,
    /// Subsystem of the †-closed algebra generated by the restriction.
    ViaDaggerClosure,
    /// Common null space of the errors.
    ZeroSpace,
}

/// One isotypic component 𝒱_k ≅ 𝒥_k ⊗ 𝒮_0k.
#[derive(Debug, Clone)]
pub struct IsotypicComponent {
    pub index: usize,
    pub space: Subspace,
    pub mult_dim: usize,
    pub irrep_dim: usize,
    /// d × (mult·irrep) map from 𝒥 ⊗ 𝒮_0 onto `space`, column `a·irrep + i`.
    pub factorization: Option<CMatrix>,
    pub unitary: bool,
}

impl IsotypicComponent {
    /// Represented image R(A), fitted from A·U = U(I ⊗ R(A)).
    pub fn represent(&self, a: &CMatrix) -> Result<(CMatrix, f64), NoiselessError> {
        let u = self
            .factorization
            .as_ref()
            .ok_or(NoiselessError::MissingFactorization)?;
        Ok(represent(u, a, self.mult_dim, self.irrep_dim))
    }

    /// ‖A·U − U(I ⊗ R(A))‖ / ‖A‖, maximised over `ops`.
    pub fn intertwining_residual(&self, ops: &[CMatrix]) -> Result<f64, NoiselessError> {
        let u = self
            .factorization
            .as_ref()
            .ok_or(NoiselessError::MissingFactorization)?;
        Ok(intertwining_residual(u, ops, self.mult_dim, self.irrep_dim))
    }
}

fn represent(u: &CMatrix, a: &CMatrix, m: usize, n: usize) -> (CMatrix, f64) {
    let local = pinv_rel(u, 1e-13) * a * u;
    fit_identity_kron(&local, m, n)
}

fn intertwining_residual(u: &CMatrix, ops: &[CMatrix], m: usize, n: usize) -> f64 {
    let id = CMatrix::identity(m, m);
    ops.iter()
        .map(|a| {
            let (rep, _) = represent(u, a, m, n);
            let lhs = a * u;
            let rhs = u * kron(&id, &rep);
            (lhs - rhs).norm() / a.norm().max(f64::MIN_POSITIVE) / u.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct SubsystemDecomposition {
    pub components: Vec<IsotypicComponent>,
    pub zero_space: Subspace,
    pub remainder: Subspace,
}

impl SubsystemDecomposition {
    /// Σ mult·irrep + dim 𝒵 + dim remainder.
    pub fn total_dim(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.mult_dim * c.irrep_dim)
            .sum::<usize>()
            + self.zero_space.dim()
            + self.remainder.dim()
    }

    /// Largest |⟨u|v⟩| between unit vectors of different pieces.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut pieces: Vec<&Subspace> = self.components.iter().map(|c| &c.space).collect();
        pieces.push(&self.zero_space);
        pieces.push(&self.remainder);
        let mut worst: f64 = 0.0;
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if pieces[i].dim() > 0 && pieces[j].dim() > 0 {
                    worst = worst.max(op_norm(&(pieces[i].basis().adjoint() * pieces[j].basis())));
                }
            }
        }
        worst
    }
}

/// ρ on 𝒮_0 and ρ′ on 𝒥 with U†U = ρ′ ⊗ ρ, and W = ρ′^{-1/2}, V = ρ^{-1/2}.
#[derive(Debug, Clone)]
pub struct FixedPointPair {
    pub rho: CMatrix,
    pub rho_prime: CMatrix,
    pub w: CMatrix,
    pub v: CMatrix,
}

fn local_algebra_elements(alg: &MatrixAlgebra) -> Vec<CMatrix> {
    alg.basis().to_vec()
}

/// Splits the span of irreducible subspaces into isotypic components.
/// Factorizations are left empty.
pub fn isotypic_components(
    alg: &MatrixAlgebra,
    semisimple: &Subspace,
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<IsotypicComponent>, NoiselessError> {
    if semisimple.dim() == 0 {
        return Ok(vec![]);
    }
    let local = alg.restrict(semisimple);
    for attempt in 0..tol.max_retries {
        let mut rng = rng_from_seed(derive_seed(seed, attempt as u64));
        if let Some(found) = try_isotypic(&local, &mut rng, tol) {
            let mut comps: Vec<IsotypicComponent> = found
                .into_iter()
                .map(|(space, m, n)| IsotypicComponent {
                    index: 0,
                    space: semisimple.embed(&space),
                    mult_dim: m,
                    irrep_dim: n,
                    factorization: None,
                    unitary: false,
                })
                .collect();
            comps.sort_by(|a, b| {
                b.mult_dim
                    .cmp(&a.mult_dim)
                    .then(a.irrep_dim.cmp(&b.irrep_dim))
            });
            for (k, c) in comps.iter_mut().enumerate() {
                c.index = k;
            }
            return Ok(comps);
        }
    }
    Err(NoiselessError::RetriesExhausted {
        stage: "isotypic decomposition",
        attempts: tol.max_retries,
    })
}

/// One randomized attempt; `None` when the draw was not typical.
fn try_isotypic(
    local: &MatrixAlgebra,
    rng: &mut crate::linalg::Rng,
    tol: &Tolerance,
) -> Option<Vec<(Subspace, usize, usize)>> {
    let dim = local.dim();
    let elements = local_algebra_elements(local);
    let x = random_in_span(&elements, rng).ok()?;
    let spaces = generalized_eigenspaces(&x, tol).ok()?;
    // (component space, eigenspace dims seen)
    let mut found: Vec<(Subspace, Vec<usize>)> = Vec::new();
    for g in &spaces {
        let e = g.space.basis();
        let mut blocks: Vec<CMatrix> = vec![e.clone()];
        blocks.extend(elements.iter().map(|b| b * e));
        let refs: Vec<&CMatrix> = blocks.iter().collect();
        let grown = column_space(&hcat(&refs), 1e-10);
        match found.iter_mut().find(|(s, _)| s.distance(&grown) < 1e-6) {
            Some((_, dims)) => dims.push(g.space.dim()),
            None => found.push((grown, vec![g.space.dim()])),
        }
    }
    let total: usize = found.iter().map(|(s, _)| s.dim()).sum();
    if total != dim {
        return None;
    }
    let refs: Vec<&CMatrix> = found.iter().map(|(s, _)| s.basis()).collect();
    if crate::linalg::rank(&hcat(&refs), 1e-10) != dim {
        return None;
    }
    let mut out = Vec::with_capacity(found.len());
    for (space, dims) in found {
        let m = dims[0];
        let n = dims.len();
        if dims.iter().any(|&d| d != m) || m * n != space.dim() {
            return None;
        }
        if invariance_residual(&elements, &space) > tol.eps_residual * 1e2 {
            return None;
        }
        out.push((space, m, n));
    }
    Some(out)
}

/// Fills the factorization U with A·U = U(I ⊗ R(A)).
pub fn factorize_component(
    alg: &MatrixAlgebra,
    comp: &IsotypicComponent,
    seed: u64,
    tol: &Tolerance,
) -> Result<IsotypicComponent, NoiselessError> {
    let local = alg.restrict(&comp.space);
    let (m, n) = (comp.mult_dim, comp.irrep_dim);
    let mut last_err = None;
    for attempt in 0..tol.max_retries {
        let s = derive_seed(seed, attempt as u64);
        let attempt_u = if local.dagger_closed() {
            canonical_factorization(&local, m, n, s, tol)
        } else {
            intertwiner_factorization(&local, m, n, s, tol)
        };
        match attempt_u {
            Ok(u_local) => {
                let u = comp.space.basis() * u_local;
                let res = intertwining_residual(&u, alg.basis(), m, n);
                if res <= tol.eps_residual * 1e2 {
                    let k = m * n;
                    let unitary =
                        (u.adjoint() * &u - CMatrix::identity(k, k)).norm() <= tol.eps_residual;
                    return Ok(IsotypicComponent {
                        factorization: Some(u),
                        unitary,
                        ..comp.clone()
                    });
                }
            }
            Err(e @ NoiselessError::NotIsotypic(_)) => last_err = Some(e),
            Err(_) => {}
        }
    }
    Err(last_err.unwrap_or(NoiselessError::RetriesExhausted {
        stage: "component factorization",
        attempts: tol.max_retries,
    }))
}

/// Two random Hermitian elements of a †-closed algebra acting as I_m ⊗ M_n
/// (up to a unitary): eigenspaces of the first are 𝒥 ⊗ |i⟩ slices, and the
/// blocks of the second between slices fix consistent isometries.
fn canonical_factorization(
    local: &MatrixAlgebra,
    m: usize,
    n: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<CMatrix, NoiselessError> {
    let elements = local_algebra_elements(local);
    let h1 = random_hermitian_in_span(&elements, seed)?;
    let h2 = random_hermitian_in_span(&elements, derive_seed(seed, 1))?;
    let slices = eigh(&h1, tol)?;
    if slices.len() != n || slices.iter().any(|s| s.space.dim() != m) {
        return Err(NoiselessError::RetriesExhausted {
            stage: "Hermitian slicing",
            attempts: 1,
        });
    }
    let e0 = slices[0].space.basis();
    let dim = local.dim();
    let mut u = CMatrix::zeros(dim, m * n);
    for (i, slice) in slices.iter().enumerate() {
        let ei = slice.space.basis();
        let link = if i == 0 {
            CMatrix::identity(m, m)
        } else {
            let block = e0.adjoint() * &h2 * ei;
            let norm = block.norm();
            if norm < 1e-8 * h2.norm() {
                return Err(NoiselessError::RetriesExhausted {
                    stage: "Hermitian slicing",
                    attempts: 1,
                });
            }
            block.scale((m as f64).sqrt() / norm)
        };
        let cols = ei * link.adjoint();
        for a in 0..m {
            u.set_column(a * n + i, &cols.column(a));
        }
    }
    Ok(u)
}

/// Intertwiners between the irreducible subspaces generated by a basis of
/// one eigenspace of a random algebra element.
fn intertwiner_factorization(
    local: &MatrixAlgebra,
    m: usize,
    n: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<CMatrix, NoiselessError> {
    let elements = local_algebra_elements(local);
    let mut rng = rng_from_seed(seed);
    let x = random_in_span(&elements, &mut rng)?;
    let spaces = generalized_eigenspaces(&x, tol)?;
    let eig = spaces
        .iter()
        .find(|g| g.space.dim() == m)
        .ok_or_else(|| NoiselessError::NotIsotypic(format!("no eigenspace of dimension {m}")))?;
    let e = eig.space.basis();
    let w0 = e.columns(0, 1).into_owned();
    let images: Vec<CMatrix> = elements.iter().map(|b| b * &w0).collect();
    let refs: Vec<&CMatrix> = images.iter().collect();
    let stacked = hcat(&refs);
    let svd = crate::linalg::full_svd(&stacked);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let rank = svd.s.iter().filter(|&&s| s > 1e-10 * smax).count();
    if rank != n {
        return Err(NoiselessError::NotIsotypic(format!(
            "irreducible subspace has dimension {rank}, expected {n}"
        )));
    }
    // b_i = Σ_a v_ai/σ_i B_a maps w0 to the i-th left singular vector.
    let dim = local.dim();
    let combos: Vec<CMatrix> = (0..n)
        .map(|i| {
            elements
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(dim, dim), |acc, (a, b)| {
                    acc + b * svd.v[(a, i)]
                })
                .unscale(svd.s[i])
        })
        .collect();
    let mut u = CMatrix::zeros(dim, m * n);
    for j in 0..m {
        let ej = e.columns(j, 1).into_owned();
        for (i, b) in combos.iter().enumerate() {
            u.set_column(j * n + i, &(b * &ej).column(0));
        }
    }
    if crate::linalg::rank(&u, 1e-10) != m * n {
        return Err(NoiselessError::NotIsotypic(
            "irreducible subspaces are not independent".into(),
        ));
    }
    Ok(u)
}

/// Unique trace-one positive fixed point of X ↦ Σ K†XK.
pub fn channel_fixed_point(kraus: &[CMatrix], tol: &Tolerance) -> Result<CMatrix, NoiselessError> {
    let n = kraus
        .first()
        .map(|k| k.nrows())
        .ok_or(LinalgError::EmptyBasis)?;
    let nn = n * n;
    // vec(K† X K) = (Kᵀ ⊗ K†) vec(X) for column-major vec.
    let mut sup = CMatrix::zeros(nn, nn);
    for k in kraus {
        sup += kron(&k.transpose(), &k.adjoint());
    }
    let shifted = &sup - CMatrix::identity(nn, nn);
    let svd = crate::linalg::full_svd(&shifted);
    let threshold = tol.eps_residual * 10.0 * op_norm(&sup).max(1.0);
    let multiplicity = svd.s.iter().filter(|&&s| s <= threshold).count();
    match multiplicity {
        0 => return Err(NoiselessError::NoPositiveFixedPoint),
        1 => {}
        k => return Err(NoiselessError::NotUniqueFixedPoint { multiplicity: k }),
    }
    let v = svd.v.column(nn - 1).into_owned();
    let x = unvectorize(v.as_slice(), n, n);
    let trace = x.trace();
    if trace.norm() < 1e-12 * x.norm() {
        return Err(NoiselessError::NoPositiveFixedPoint);
    }
    let x = x.map(|z| z / trace);
    let rho = (&x + x.adjoint()).scale(0.5);
    if min_eigenvalue(&rho) <= tol.eps_residual {
        return Err(NoiselessError::NoPositiveFixedPoint);
    }
    Ok(rho)
}

/// ‖Σ K†ρK − ρ‖_F.
pub fn fixed_point_residual(kraus: &[CMatrix], rho: &CMatrix) -> f64 {
    let image = kraus
        .iter()
        .fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| {
            acc + k.adjoint() * rho * k
        });
    (image - rho).norm()
}

/// Makes a component's factorization unitary using the fixed point of the
/// represented quantum operation. `kraus` must satisfy Σ K†K = I.
pub fn unitarize(
    comp: &IsotypicComponent,
    kraus: &OperatorSet,
    tol: &Tolerance,
) -> Result<(FixedPointPair, IsotypicComponent), NoiselessError> {
    let u = comp
        .factorization
        .as_ref()
        .ok_or(NoiselessError::MissingFactorization)?;
    let (m, n) = (comp.mult_dim, comp.irrep_dim);
    let images: Vec<CMatrix> = kraus
        .operators()
        .iter()
        .map(|k| represent(u, k, m, n).0)
        .collect();
    let rho = channel_fixed_point(&images, tol)?;
    let gram = u.adjoint() * u;
    let purity = (&rho * &rho).trace().re;
    let rho_prime =
        partial_trace_second(&(&gram * kron(&CMatrix::identity(m, m), &rho)), m, n).unscale(purity);
    let rho_prime = (&rho_prime + rho_prime.adjoint()).scale(0.5);
    let residual = (&gram - kron(&rho_prime, &rho)).norm() / gram.norm();
    if residual > tol.eps_residual * 1e2 || min_eigenvalue(&rho_prime) <= 0.0 {
        return Err(NoiselessError::NotKroneckerFactorable { residual });
    }
    let w = pd_inv_sqrt(&rho_prime);
    let v = pd_inv_sqrt(&rho);
    let unitary_u = u * kron(&w, &v);
    let k = m * n;
    let defect = (unitary_u.adjoint() * &unitary_u - CMatrix::identity(k, k)).norm();
    let updated = IsotypicComponent {
        factorization: Some(unitary_u),
        unitary: defect <= tol.eps_residual,
        ..comp.clone()
    };
    Ok((
        FixedPointPair {
            rho,
            rho_prime,
            w,
            v,
        },
        updated,
    ))
}

/// {√λ·E_i} ∪ {(I − λΣE_i†E_i)^{1/2}}.
pub fn make_cptp(
    errs: &OperatorSet,
    lambda: f64,
    tol: &Tolerance,
) -> Result<OperatorSet, NoiselessError> {
    let d = errs.dim();
    let completion = CMatrix::identity(d, d) - errs.gram_sum().scale(lambda);
    let min = min_eigenvalue(&completion);
    if min < -tol.eps_residual {
        return Err(NoiselessError::LambdaTooLarge {
            min_eigenvalue: min,
        });
    }
    let mut named: Vec<(String, CMatrix)> = errs
        .iter()
        .map(|(name, e)| (name.to_string(), e.scale(lambda.sqrt())))
        .collect();
    let mut name = "completion".to_string();
    while errs.get(&name).is_some() {
        name.push('\'');
    }
    named.push((name, psd_sqrt(&completion)));
    Ok(OperatorSet::new(d, named)?)
}

/// Whether Σ E†E = I within tolerance.
pub fn is_cptp(errs: &OperatorSet, tol: &Tolerance) -> bool {
    let d = errs.dim();
    (errs.gram_sum() - CMatrix::identity(d, d)).norm() <= tol.eps_residual * (d as f64).sqrt()
}

/// Per-operator defects of the noiseless condition.
#[derive(Debug, Clone)]
pub struct NoiselessCheck {
    pub residual: f64,
    pub per_operator: Vec<f64>,
    pub passed: bool,
}

/// Checks E·Π = I_N ⊗ S(E) on the encoded block for every error, with S(E)
/// fitted by partial trace, plus leakage of E·Π out of the encoded block.
pub fn verify_noiseless(
    enc: &SubsystemEncoding,
    errs: &OperatorSet,
    tol: &Tolerance,
) -> NoiselessCheck {
    let v = enc.embed();
    let per_operator: Vec<f64> = errs
        .operators()
        .iter()
        .map(|e| {
            let image = e * v;
            let local = v.adjoint() * &image;
            let (_, fit) = fit_identity_kron(&local, enc.n(), enc.s_dim());
            let leak = (&image - v * &local).norm();
            (fit + leak) / op_norm(e).max(1.0)
        })
        .collect();
    let residual = per_operator.iter().cloned().fold(0.0, f64::max);
    NoiselessCheck {
        residual,
        passed: residual <= tol.eps_residual,
        per_operator,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoiselessOptions {
    pub seed: u64,
    pub tol: Tolerance,
    /// Completes the errors to a quantum operation with this λ before the search.
    pub cptp_lambda: Option<f64>,
}

pub const ZERO_SPACE_CAVEAT: &str =
    "errors in the generated algebra have probability zero on this subspace";

#[derive(Debug, Clone)]
pub struct RankedEncoding {
    pub encoding: SubsystemEncoding,
    /// Isotypic component the encoding lives in; `None` for the zero space.
    pub component: Option<usize>,
    pub provenance: Provenance,
    pub residual: f64,
    pub caveat: Option<&'static str>,
}

#[derive(Debug, Clone)]
pub struct NoiselessReport {
    pub decomposition: SubsystemDecomposition,
    pub encodings: Vec<RankedEncoding>,
    pub algebra_dim: usize,
    pub radical_dim: usize,
    pub generators_cptp: bool,
    pub dagger_closed: bool,
}

impl NoiselessReport {
    pub fn max_n(&self) -> usize {
        self.encodings
            .iter()
            .map(|e| e.encoding.n())
            .max()
            .unwrap_or(0)
    }
}

/// Full search: algebra → radical, 𝒵, 𝒮 → isotypic components →
/// factorization → unitary factorization → verified encodings, ranked by
/// descending N, then ascending cosubsystem dimension, then component index.
pub fn find_noiseless(
    errs: &OperatorSet,
    opts: &NoiselessOptions,
) -> Result<NoiselessReport, NoiselessError> {
    let tol = &opts.tol;
    let gens = match opts.cptp_lambda {
        Some(lambda) => make_cptp(errs, lambda, tol)?,
        None => errs.clone(),
    };
    let cptp = is_cptp(&gens, tol);
    let alg = generate_algebra(&gens, tol);
    let structure = analyze(&alg, tol);
    let raw = isotypic_components(&alg, &structure.semisimple_span, opts.seed, tol)?;

    let mut components = Vec::with_capacity(raw.len());
    let mut encodings = Vec::new();
    for comp in raw {
        let seed_k = derive_seed(opts.seed, 1000 + comp.index as u64);
        let filled = factorize_component(&alg, &comp, seed_k, tol)?;
        let mut candidates: Vec<(SubsystemEncoding, Provenance)> = Vec::new();
        let mut recorded = filled.clone();
        if filled.unitary {
            let u = filled.factorization.clone().expect("filled");
            candidates.push((
                SubsystemEncoding::new(filled.mult_dim, filled.irrep_dim, u, tol)?,
                Provenance::Canonical,
            ));
        } else {
            let mut done = false;
            if cptp {
                if let Ok((_, unit)) = unitarize(&filled, &gens, tol) {
                    if unit.unitary {
                        let u = unit.factorization.clone().expect("filled");
                        candidates.push((
                            SubsystemEncoding::new(unit.mult_dim, unit.irrep_dim, u, tol)?,
                            Provenance::Unitarized,
                        ));
                        recorded = unit;
                        done = true;
                    }
                }
            }
            if !done {
                for enc in dagger_closure_encodings(&alg, &filled, seed_k, tol)? {
                    candidates.push((enc, Provenance::ViaDaggerClosure));
                }
            }
        }
        for (enc, provenance) in candidates {
            let check = verify_noiseless(&enc, errs, tol);
            if check.passed {
                encodings.push(RankedEncoding {
                    encoding: enc,
                    component: Some(recorded.index),
                    provenance,
                    residual: check.residual,
                    caveat: None,
                });
            }
        }
        components.push(recorded);
    }

    let zero = structure.zero_space.clone();
    if zero.dim() > 0 {
        let enc = SubsystemEncoding::subspace(zero.basis().clone(), tol)?;
        let check = verify_noiseless(&enc, errs, tol);
        encodings.push(RankedEncoding {
            encoding: enc,
            component: None,
            provenance: Provenance::ZeroSpace,
            residual: check.residual,
            caveat: Some(ZERO_SPACE_CAVEAT),
        });
    }

    let d = errs.dim();
    let mut covered = zero.clone();
    for c in &components {
        covered = covered.sum(&c.space, 1e-10);
    }
    let remainder = if covered.dim() >= d {
        Subspace::zero(d)
    } else {
        covered.complement()
    };

    encodings.sort_by(|a, b| {
        b.encoding
            .n()
            .cmp(&a.encoding.n())
            .then(a.encoding.s_dim().cmp(&b.encoding.s_dim()))
            .then(
                a.component
                    .unwrap_or(usize::MAX)
                    .cmp(&b.component.unwrap_or(usize::MAX)),
            )
    });

    Ok(NoiselessReport {
        decomposition: SubsystemDecomposition {
            components,
            zero_space: zero,
            remainder,
        },
        encodings,
        algebra_dim: alg.algebra_dim(),
        radical_dim: structure.radical.len(),
        generators_cptp: cptp,
        dagger_closed: alg.dagger_closed(),
    })
}

/// Noiseless subsystems of the †-closed algebra generated by the restriction
/// of `alg` to one isotypic component.
fn dagger_closure_encodings(
    alg: &MatrixAlgebra,
    comp: &IsotypicComponent,
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<SubsystemEncoding>, NoiselessError> {
    let local = dagger_closure(&alg.restrict(&comp.space));
    let full = Subspace::full(local.dim());
    let subs = isotypic_components(&local, &full, seed, tol)?;
    let mut out = Vec::new();
    for (k, sub) in subs.iter().enumerate() {
        let filled = factorize_component(&local, sub, derive_seed(seed, k as u64 + 1), tol)?;
        if let Some(u) = filled.factorization.filter(|_| filled.unitary) {
            out.push(SubsystemEncoding::new(
                sub.mult_dim,
                sub.irrep_dim,
                comp.space.basis() * u,
                tol,
            )?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        ginibre, haar_unitary, pauli_x, pauli_y, pauli_z, r, rng_from_seed, unit, CVector,
    };

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn ops(ms: Vec<CMatrix>) -> OperatorSet {
        OperatorSet::from_matrices(ms).unwrap()
    }

    fn block_plant(blocks: &[Vec<CMatrix>]) -> Vec<CMatrix> {
        // block k: list of matrices B_k; returns ⊕_k B_k for each generator index
        let count = blocks[0].len();
        (0..count)
            .map(|g| {
                let parts: Vec<CMatrix> = blocks.iter().map(|b| b[g].clone()).collect();
                crate::linalg::direct_sum(&parts)
            })
            .collect()
    }

    fn components_of(gens: Vec<CMatrix>, seed: u64) -> Vec<IsotypicComponent> {
        let alg = generate_algebra(&ops(gens), &tol());
        let st = analyze(&alg, &tol());
        isotypic_components(&alg, &st.semisimple_span, seed, &tol()).unwrap()
    }

    #[test]
    fn isotypic_full_matrix_algebra() {
        let c = components_of(vec![pauli_x(), pauli_z()], 1);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].mult_dim, c[0].irrep_dim), (1, 2));
    }

    #[test]
    fn isotypic_repeated_block() {
        let mut rng = rng_from_seed(3);
        let id = CMatrix::identity(2, 2);
        let gens: Vec<CMatrix> = (0..2)
            .map(|_| kron(&id, &ginibre(2, 2, &mut rng)))
            .collect();
        let c = components_of(gens, 2);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].mult_dim, c[0].irrep_dim), (2, 2));
    }

    #[test]
    fn isotypic_two_blocks() {
        let mut rng = rng_from_seed(4);
        let blocks = vec![
            vec![ginibre(2, 2, &mut rng), ginibre(2, 2, &mut rng)],
            vec![ginibre(1, 1, &mut rng), ginibre(1, 1, &mut rng)],
        ];
        let c = components_of(block_plant(&blocks), 5);
        let mut dims: Vec<(usize, usize)> = c.iter().map(|c| (c.mult_dim, c.irrep_dim)).collect();
        dims.sort();
        assert_eq!(dims, vec![(1, 1), (1, 2)]);
    }

    #[test]
    fn factorize_irreducible() {
        let gens = vec![pauli_x(), pauli_z()];
        let alg = generate_algebra(&ops(gens.clone()), &tol());
        let c = &components_of(gens.clone(), 1)[0];
        let f = factorize_component(&alg, c, 9, &tol()).unwrap();
        assert!(f.unitary);
        assert!(f.intertwining_residual(&gens).unwrap() < 1e-12);
    }

    #[test]
    fn factorize_planted_unitary_conjugation() {
        let mut rng = rng_from_seed(12);
        let u0 = haar_unitary(4, &mut rng);
        let id = CMatrix::identity(2, 2);
        let gens: Vec<CMatrix> = (0..2)
            .map(|_| &u0 * kron(&id, &ginibre(2, 2, &mut rng)) * u0.adjoint())
            .collect();
        let alg = generate_algebra(&ops(gens.clone()), &tol());
        let c = &components_of(gens.clone(), 1)[0];
        let f = factorize_component(&alg, c, 3, &tol()).unwrap();
        assert!(f.unitary);
        assert!(f.intertwining_residual(&gens).unwrap() < 1e-9);
    }

    #[test]
    fn factorize_planted_similarity_is_not_unitary() {
        let mut rng = rng_from_seed(13);
        let t = ginibre(4, 4, &mut rng) + CMatrix::identity(4, 4) * r(2.0);
        let tinv = t.clone().try_inverse().unwrap();
        let id = CMatrix::identity(2, 2);
        let gens: Vec<CMatrix> = (0..2)
            .map(|_| &t * kron(&id, &ginibre(2, 2, &mut rng)) * &tinv)
            .collect();
        let alg = generate_algebra(&ops(gens.clone()), &tol());
        assert!(!alg.dagger_closed());
        let c = &components_of(gens.clone(), 1)[0];
        assert_eq!((c.mult_dim, c.irrep_dim), (2, 2));
        let f = factorize_component(&alg, c, 4, &tol()).unwrap();
        assert!(!f.unitary);
        assert!(f.intertwining_residual(&gens).unwrap() < 1e-8);
        let u = f.factorization.unwrap();
        assert_eq!(crate::linalg::rank(&u, 1e-10), 4);
    }

    #[test]
    fn fixed_point_examples() {
        let err = channel_fixed_point(&[CMatrix::identity(2, 2)], &tol()).unwrap_err();
        assert!(matches!(
            err,
            NoiselessError::NotUniqueFixedPoint { multiplicity: 4 }
        ));

        let half = r(0.5);
        let dep: Vec<CMatrix> = vec![CMatrix::identity(2, 2), pauli_x(), pauli_y(), pauli_z()]
            .into_iter()
            .map(|p| p * half)
            .collect();
        let rho = channel_fixed_point(&dep, &tol()).unwrap();
        assert!((rho - CMatrix::identity(2, 2).scale(0.5)).norm() < 1e-12);
    }

    #[test]
    fn fixed_point_planted() {
        // K_i = ρ0^{-1/2} C_i ρ0^{1/2} with Σ C†C = I has fixed point ρ0.
        let mut rng = rng_from_seed(31);
        let a = ginibre(3, 3, &mut rng);
        let rho0 = &a * a.adjoint() + CMatrix::identity(3, 3);
        let rho0 = rho0.unscale(rho0.trace().re);
        let cs: Vec<CMatrix> = (0..3).map(|_| ginibre(3, 3, &mut rng)).collect();
        let s = cs
            .iter()
            .fold(CMatrix::zeros(3, 3), |acc, c| acc + c.adjoint() * c);
        let norm = pd_inv_sqrt(&s);
        let sq = psd_sqrt(&rho0);
        let isq = pd_inv_sqrt(&rho0);
        let kraus: Vec<CMatrix> = cs.iter().map(|c| &isq * c * &norm * &sq).collect();
        let rho = channel_fixed_point(&kraus, &tol()).unwrap();
        assert!((&rho - &rho0).norm() < 1e-9);
        assert!(fixed_point_residual(&kraus, &rho) < 1e-10);
    }

    #[test]
    fn unitarize_already_unitary() {
        let gens = ops(vec![
            CMatrix::identity(2, 2).scale(0.5),
            pauli_x().scale(0.5),
            pauli_y().scale(0.5),
            pauli_z().scale(0.5),
        ]);
        let alg = generate_algebra(&gens, &tol());
        let st = analyze(&alg, &tol());
        let c = &isotypic_components(&alg, &st.semisimple_span, 0, &tol()).unwrap()[0];
        let f = factorize_component(&alg, c, 0, &tol()).unwrap();
        let (pair, u) = unitarize(&f, &gens, &tol()).unwrap();
        assert!(u.unitary);
        let v = &pair.v;
        assert!((v - CMatrix::identity(2, 2) * v[(0, 0)]).norm() < 1e-9);
    }

    #[test]
    fn unitarize_planted_kronecker_gram() {
        // U = P ⊗ Q with U†U = diag(1,2) ⊗ diag(3,1), errors I ⊗ C_i (CPTP).
        let p = CMatrix::from_diagonal(&CVector::from_vec(vec![r(1.0), r(2.0f64.sqrt())]));
        let q = CMatrix::from_diagonal(&CVector::from_vec(vec![r(3.0f64.sqrt()), r(1.0)]));
        let u = kron(&p, &q);
        let half = 0.5;
        let cs = [
            CMatrix::identity(2, 2).scale(half),
            pauli_x().scale(half),
            pauli_y().scale(half),
            pauli_z().scale(half),
        ];
        let id = CMatrix::identity(2, 2);
        // E_i = U (I ⊗ B_i) U^{-1} with B_i = Q^{-1} C_i Q so that E_i = I ⊗ C_i.
        let errs = ops(cs.iter().map(|c| kron(&id, c)).collect());
        let comp = IsotypicComponent {
            index: 0,
            space: Subspace::full(4),
            mult_dim: 2,
            irrep_dim: 2,
            factorization: Some(u.clone()),
            unitary: false,
        };
        let (pair, fixed) = unitarize(&comp, &errs, &tol()).unwrap();
        let rho_ratio = pair.rho[(0, 0)] / pair.rho[(1, 1)];
        assert!((rho_ratio - r(3.0)).norm() < 1e-9);
        let rp_ratio = pair.rho_prime[(1, 1)] / pair.rho_prime[(0, 0)];
        assert!((rp_ratio - r(2.0)).norm() < 1e-9);
        assert!(fixed.unitary);
        // independent oracle: nearest Kronecker product of U†U
        let (a, b, res) = crate::linalg::nearest_kronecker(&(u.adjoint() * &u), 2, 2);
        assert!(res < 1e-12);
        assert!(((a[(1, 1)] / a[(0, 0)]) - r(2.0)).norm() < 1e-12);
        assert!(((b[(0, 0)] / b[(1, 1)]) - r(3.0)).norm() < 1e-12);
    }

    #[test]
    fn make_cptp_examples() {
        let out = make_cptp(&ops(vec![CMatrix::identity(2, 2)]), 0.5, &tol()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for m in out.operators() {
            assert!((m - CMatrix::identity(2, 2).scale(s)).norm() < 1e-12);
        }
        assert!(is_cptp(&out, &tol()));

        let out = make_cptp(&ops(vec![pauli_x()]), 1.0, &tol()).unwrap();
        assert!(out.operators()[1].norm() < 1e-7);

        let out = make_cptp(&ops(vec![unit(2, 0, 1)]), 0.5, &tol()).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![r(1.0), r(s)]));
        assert!((&out.operators()[1] - expected).norm() < 1e-12);

        let err = make_cptp(&ops(vec![pauli_x()]), 2.0, &tol()).unwrap_err();
        assert!(matches!(err, NoiselessError::LambdaTooLarge { .. }));
    }

    #[test]
    fn find_noiseless_identity() {
        let rep = find_noiseless(
            &ops(vec![CMatrix::identity(3, 3)]),
            &NoiselessOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.max_n(), 3);
        assert!(rep.encodings[0].residual < 1e-12);
    }

    #[test]
    fn find_noiseless_pauli_is_trivial() {
        let rep = find_noiseless(
            &ops(vec![
                CMatrix::identity(2, 2),
                pauli_x(),
                pauli_y(),
                pauli_z(),
            ]),
            &NoiselessOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.max_n(), 1);
    }

    #[test]
    fn find_noiseless_reports_zero_space() {
        let rep = find_noiseless(
            &ops(vec![unit(3, 0, 0), unit(3, 0, 1)]),
            &NoiselessOptions::default(),
        )
        .unwrap();
        let z = rep
            .encodings
            .iter()
            .find(|e| e.provenance == Provenance::ZeroSpace)
            .unwrap();
        assert_eq!(z.encoding.n(), 1);
        assert!(z.caveat.is_some());
        assert_eq!(rep.decomposition.total_dim(), 3);
    }

    #[test]
    fn non_dagger_closed_falls_back() {
        let mut rng = rng_from_seed(17);
        let t = ginibre(4, 4, &mut rng) + CMatrix::identity(4, 4) * r(2.0);
        let tinv = t.clone().try_inverse().unwrap();
        let id = CMatrix::identity(2, 2);
        let gens: Vec<CMatrix> = (0..2)
            .map(|_| &t * kron(&id, &ginibre(2, 2, &mut rng)) * &tinv)
            .collect();
        let rep = find_noiseless(&ops(gens), &NoiselessOptions::default()).unwrap();
        assert_eq!(rep.decomposition.components[0].mult_dim, 2);
        for e in &rep.encodings {
            assert_eq!(e.provenance, Provenance::ViaDaggerClosure);
            assert!(e.residual <= 1e-9);
        }
    }

    #[test]
    fn verify_detects_logical_action() {
        let enc = SubsystemEncoding::subspace(CMatrix::identity(2, 2), &tol()).unwrap();
        let ok = verify_noiseless(&enc, &ops(vec![CMatrix::identity(2, 2)]), &tol());
        assert!(ok.passed && ok.residual == 0.0);
        let bad = verify_noiseless(&enc, &ops(vec![pauli_z()]), &tol());
        assert!(!bad.passed && bad.residual > 0.1);
    }

    #[test]
    fn encoding_validation() {
        assert!(SubsystemEncoding::new(2, 1, CMatrix::identity(3, 3), &tol()).is_err());
        assert!(SubsystemEncoding::new(1, 1, CMatrix::from_element(2, 1, r(2.0)), &tol()).is_err());
        let e = SubsystemEncoding::new(1, 2, CMatrix::identity(3, 2), &tol()).unwrap();
        let p = e.projector();
        assert!((&p * &p - &p).norm() < 1e-15);
    }
}
