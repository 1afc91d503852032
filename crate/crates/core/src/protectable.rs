//! Initialization-protectable subsystems.
//!
//! A subsystem I′ of an encoding is protectable when some preparation
//! {R_j} makes it noiseless for the composites E_i·R_j. The decision
//! procedure works on the preimage space 𝒱 (vectors every error maps into
//! the encoded block) and the maps F_ij = ⟨j|_S E_i restricted to 𝒱: a
//! protecting code is an N-dimensional 𝒟 ⊆ 𝒱 on which every F_ij is
//! α_ij times one common isometry.
//!
//! Pruning only ever discards vectors that no protecting code can contain,
//! so a NOT_PROTECTABLE verdict is always backed by exact linear algebra.
//! The remaining search is a matrix-span problem solved by a budgeted
//! local search whose failure is reported as UNDECIDED.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, OperatorSet};
use crate::linalg::{
    column_space, complex_gaussian, derive_seed, eigenvalues, fit_identity_kron, full_svd, ginibre,
    hcat, max_eigenvalue, nullspace_floor, nullspace_rel, op_norm, pd_inv_sqrt, pinv_rel, rank,
    rng_from_seed, unvectorize, vcat, vectorize, CMatrix, CVector, LinalgError, Subspace,
    Tolerance, ONE, ZERO,
};
use crate::noiseless::{verify_noiseless, NoiselessError, SubsystemEncoding};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtectError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rows of the F maps span {row_rank} of {m} dimensions")]
    RowSpanDeficient { row_rank: usize, m: usize },
    #[error("elimination constraints admit only α = 0")]
    InfeasibleConstraints,
    #[error("purification needs an environment of dimension ≥ {needed}, state has rank {rank}")]
    EnvironmentTooSmall { rank: usize, needed: usize },
    #[error("matrices in an orthonormal-columns instance must share one shape")]
    ShapeMismatch,
    #[error(
        "decoder does not preserve encoder {encoder} under error {error} (deviation {deviation:e})"
    )]
    NotPreserving {
        encoder: usize,
        error: usize,
        deviation: f64,
    },
    #[error(transparent)]
    Noiseless(#[from] NoiselessError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The maps F_ij in orthonormal bases of ℋ_I′ and 𝒱.
#[derive(Debug, Clone)]
pub struct FMapFamily {
    n: usize,
    s_dim: usize,
    n_errors: usize,
    v_basis: CMatrix,
    /// F_ij at index i·s_dim + j, each N × M.
    maps: Vec<CMatrix>,
}

impl FMapFamily {
    /// Family given directly by its matrices, with 𝒱 = ℂ^M.
    pub fn from_maps(n: usize, s_dim: usize, maps: Vec<CMatrix>) -> Result<Self, ProtectError> {
        let m = maps.first().map(|f| f.ncols()).unwrap_or(0);
        if s_dim == 0
            || !maps.len().is_multiple_of(s_dim)
            || maps.iter().any(|f| f.shape() != (n, m))
        {
            return Err(ProtectError::DimensionMismatch(format!(
                "expected a multiple of {s_dim} maps of shape {n}×{m}"
            )));
        }
        Ok(Self {
            n,
            s_dim,
            n_errors: maps.len() / s_dim,
            v_basis: CMatrix::identity(m, m),
            maps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.v_basis.ncols()
    }

    pub fn s_dim(&self) -> usize {
        self.s_dim
    }

    pub fn n_errors(&self) -> usize {
        self.n_errors
    }

    pub fn v_basis(&self) -> &CMatrix {
        &self.v_basis
    }

    pub fn v_space(&self) -> Subspace {
        Subspace::from_orthonormal(self.v_basis.clone())
    }

    pub fn maps(&self) -> &[CMatrix] {
        &self.maps
    }

    pub fn get(&self, i: usize, j: usize) -> &CMatrix {
        &self.maps[i * self.s_dim + j]
    }

    /// Family on the subspace of 𝒱 with orthonormal local basis `w` (M × M′).
    pub fn restrict(&self, w: &CMatrix) -> FMapFamily {
        FMapFamily {
            n: self.n,
            s_dim: self.s_dim,
            n_errors: self.n_errors,
            v_basis: &self.v_basis * w,
            maps: self.maps.iter().map(|f| f * w).collect(),
        }
    }

    /// Trace-orthonormal basis of span{F_ij}.
    pub fn span_basis(&self) -> Vec<CMatrix> {
        let (n, m) = (self.n, self.m());
        if self.maps.is_empty() || n * m == 0 {
            return vec![];
        }
        let vecs: Vec<CMatrix> = self
            .maps
            .iter()
            .map(|f| {
                let v = vectorize(f);
                CMatrix::from_column_slice(n * m, 1, v.as_slice())
            })
            .collect();
        let refs: Vec<&CMatrix> = vecs.iter().collect();
        let space = column_space(&hcat(&refs), 1e-10);
        (0..space.dim())
            .map(|k| unvectorize(space.basis().column(k).into_owned().as_slice(), n, m))
            .collect()
    }

    /// Dimension of the span of all rows of all maps.
    pub fn row_rank(&self) -> usize {
        if self.maps.is_empty() {
            return 0;
        }
        let refs: Vec<&CMatrix> = self.maps.iter().collect();
        rank(&vcat(&refs), 1e-10)
    }

    /// max_i ‖E_i V − Σ_j embed·(F_ij ⊗ |j⟩)‖ for the family built from `enc`, `errs`.
    pub fn reconstruction_residual(&self, enc: &SubsystemEncoding, errs: &OperatorSet) -> f64 {
        let s = self.s_dim;
        errs.operators()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let target = e * &self.v_basis;
                let mut coords = CMatrix::zeros(self.n * s, self.m());
                for j in 0..s {
                    let f = self.get(i, j);
                    for a in 0..self.n {
                        coords.set_row(a * s + j, &f.row(a));
                    }
                }
                (target - enc.embed() * coords).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// 𝒱: vectors mapped into the encoded block by every error.
pub fn preimage_space(enc: &SubsystemEncoding, errs: &OperatorSet, tol: &Tolerance) -> Subspace {
    let d = enc.dim();
    let outside = CMatrix::identity(d, d) - enc.projector();
    let blocks: Vec<CMatrix> = errs.operators().iter().map(|e| &outside * e).collect();
    let refs: Vec<&CMatrix> = blocks.iter().collect();
    let stacked = vcat(&refs);
    // Rounding noise in (I − Π)E_i scales with the errors, not with the stack.
    let scale = errs
        .operators()
        .iter()
        .map(|e| e.norm())
        .fold(1.0, f64::max);
    nullspace_floor(&stacked, tol.eps_rank, tol.eps_rank * scale * d as f64).1
}

pub fn build_f_maps(
    enc: &SubsystemEncoding,
    errs: &OperatorSet,
    v: &Subspace,
) -> Result<FMapFamily, ProtectError> {
    if enc.dim() != errs.dim() || v.ambient_dim() != enc.dim() {
        return Err(ProtectError::DimensionMismatch(format!(
            "encoding on ℂ^{}, errors on ℂ^{}, 𝒱 in ℂ^{}",
            enc.dim(),
            errs.dim(),
            v.ambient_dim()
        )));
    }
    let (n, s) = (enc.n(), enc.s_dim());
    let mut maps = Vec::with_capacity(errs.len() * s);
    for e in errs.operators() {
        let coords = enc.embed().adjoint() * e * v.basis();
        for j in 0..s {
            maps.push(CMatrix::from_fn(n, v.dim(), |a, l| coords[(a * s + j, l)]));
        }
    }
    Ok(FMapFamily {
        n,
        s_dim: s,
        n_errors: errs.len(),
        v_basis: v.basis().clone(),
        maps,
    })
}

/// Null space of `g` when its numerical rank is positive but below `n`.
/// Singular values ≤ eps_residual·scale count as zero.
fn deficient_null(g: &CMatrix, n: usize, scale: f64, tol: &Tolerance) -> Option<CMatrix> {
    let m = g.ncols();
    let svd = full_svd(g);
    let cutoff = tol.eps_residual * scale.max(f64::MIN_POSITIVE);
    let r = svd.s.iter().filter(|&&x| x > cutoff).count();
    if r == 0 || r >= n || r >= m {
        return None;
    }
    Some(svd.v.columns(r, m - r).into_owned())
}

/// Why 𝒱 was shrunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneRule {
    /// A map or random span element of rank below N.
    LowRank,
    /// A rank-deficient combination of two maps.
    Pencil,
    /// Two maps whose combined rows are dependent while every combination has full rank.
    RowDependence,
    /// A rank-deficient element forced by having at least M independent maps.
    SpanCount,
}

#[derive(Debug, Clone)]
pub struct PruneStep {
    pub rule: PruneRule,
    pub m_before: usize,
    pub m_after: usize,
}

enum PencilOutcome {
    Deficient(CMatrix),
    FullRank,
    Unknown,
}

/// Searches the pencil A + λB for a rank-deficient element via the
/// generalized eigenvalues of (AΩ, BΩ) for a random Ω.
fn pencil(a: &CMatrix, b: &CMatrix, n: usize, omega: &CMatrix, tol: &Tolerance) -> PencilOutcome {
    let bo = b * omega;
    let ao = a * omega;
    let bsv = full_svd(&bo);
    let scale_b = bsv.s.first().copied().unwrap_or(0.0);
    if scale_b == 0.0 || bsv.s[n - 1] <= 1e-10 * scale_b {
        return PencilOutcome::Unknown;
    }
    let Some(binv) = bo.try_inverse() else {
        return PencilOutcome::Unknown;
    };
    let Ok(lams) = eigenvalues(&(-(binv * ao))) else {
        return PencilOutcome::Unknown;
    };
    let (na, nb) = (a.norm(), b.norm());
    for lam in lams {
        let g = a + b * lam;
        if let Some(null) = deficient_null(&g, n, na + lam.norm() * nb, tol) {
            return PencilOutcome::Deficient(null);
        }
    }
    PencilOutcome::FullRank
}

fn distinct_maps(fam: &FMapFamily) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = Vec::new();
    for f in fam.maps() {
        let nf = f.norm();
        if nf <= 1e-14 {
            continue;
        }
        let unit = f.unscale(nf);
        let dup = out.iter().any(|g| {
            let overlap = crate::linalg::hs_inner(g, &unit).norm();
            (overlap - 1.0).abs() < 1e-12
        });
        if !dup {
            out.push(unit);
        }
    }
    out
}

/// One pruning pass; `None` when no rule applies.
fn prune_once(fam: &FMapFamily, seed: u64, tol: &Tolerance) -> Option<(PruneRule, CMatrix)> {
    let (n, m) = (fam.n(), fam.m());
    let shrinks = |null: &CMatrix| null.ncols() < m;
    let basis = fam.span_basis();
    let maps = distinct_maps(fam);

    for g in maps.iter().chain(basis.iter()) {
        if let Some(null) = deficient_null(g, n, g.norm(), tol) {
            if shrinks(&null) {
                return Some((PruneRule::LowRank, null));
            }
        }
    }

    let mut rng = rng_from_seed(seed);
    for _ in 0..2 {
        if let Ok(x) = crate::linalg::random_in_span(&basis, &mut rng) {
            if let Some(null) = deficient_null(&x, n, x.norm(), tol) {
                if shrinks(&null) {
                    return Some((PruneRule::LowRank, null));
                }
            }
        }
    }

    if n > 1 && basis.len() >= m {
        if let Some(w) = span_count_witness(&basis, n, tol) {
            if let Some(null) = deficient_null(&w.g, n, w.g.norm(), tol) {
                if shrinks(&null) {
                    return Some((PruneRule::SpanCount, null));
                }
            }
        }
    }

    let omega = ginibre(m, n, &mut rng);
    let mut row_dependent: Option<CMatrix> = None;
    for p in 0..maps.len() {
        for q in p + 1..maps.len() {
            match pencil(&maps[p], &maps[q], n, &omega, tol) {
                PencilOutcome::Deficient(null) if shrinks(&null) => {
                    return Some((PruneRule::Pencil, null));
                }
                PencilOutcome::FullRank if row_dependent.is_none() => {
                    // No element of span{A, B} is rank-deficient; if the rows
                    // are still dependent, every code lies in null(A) ∩ null(B).
                    let stacked = vcat(&[&maps[p], &maps[q]]);
                    if let Some(null) = deficient_null(&stacked, 2 * n, stacked.norm(), tol) {
                        if shrinks(&null) {
                            row_dependent = Some(null);
                        }
                    }
                }
                _ => {}
            }
        }
    }
    row_dependent.map(|null| (PruneRule::RowDependence, null))
}

/// Shrinks 𝒱 by every sound rule until none applies.
pub fn prune_low_rank(
    fam: &FMapFamily,
    seed: u64,
    tol: &Tolerance,
) -> (Subspace, FMapFamily, Vec<PruneStep>) {
    let mut current = fam.clone();
    let mut steps = Vec::new();
    let mut round = 0u64;
    while current.m() >= current.n() && current.m() > 0 {
        let Some((rule, null)) = prune_once(&current, derive_seed(seed, round), tol) else {
            break;
        };
        let m_before = current.m();
        current = current.restrict(&null);
        steps.push(PruneStep {
            rule,
            m_before,
            m_after: current.m(),
        });
        round += 1;
    }
    (current.v_space(), current, steps)
}

/// A non-full-rank element G = Σ x_i G_i of a span with at least M
/// independent N × M members, with y·G = 0.
#[derive(Debug, Clone)]
pub struct SpanCountWitness {
    pub g: CMatrix,
    pub combination: CVector,
    pub y: CVector,
}

impl SpanCountWitness {
    pub fn residual(&self) -> f64 {
        (self.y.transpose() * &self.g).norm() / self.g.norm().max(f64::MIN_POSITIVE)
    }
}

fn span_count_witness(basis: &[CMatrix], n: usize, tol: &Tolerance) -> Option<SpanCountWitness> {
    let l = basis.len();
    let m = basis.first()?.ncols();
    if n < 2 || l < m {
        return None;
    }
    let row_matrix = |r: usize| CMatrix::from_fn(l, m, |i, c| basis[i][(r, c)]);
    let combine = |x: &CVector| {
        basis
            .iter()
            .zip(x.iter())
            .fold(CMatrix::zeros(n, m), |acc, (g, &xi)| acc + g * xi)
    };
    let left_null = |a: &CMatrix| -> Option<CVector> {
        // x with xᵀ a = 0
        let svd = full_svd(&a.transpose());
        let last = svd.v.ncols().checked_sub(1)?;
        let x = svd.v.column(last).into_owned();
        ((a.transpose() * &x).norm() <= tol.eps_residual * a.norm().max(1.0)).then_some(x)
    };
    let a1 = row_matrix(0);
    let mut e0 = CVector::zeros(n);
    e0[0] = ONE;
    // Dependent first rows: some combination has a zero first row.
    if let Some(x) = left_null(&a1) {
        return Some(SpanCountWitness {
            g: combine(&x),
            combination: x,
            y: e0,
        });
    }
    let a2 = row_matrix(1);
    let (lam, x) = if let Some(x) = left_null(&a2) {
        (None, x)
    } else {
        let inv = a2.clone().try_inverse()?;
        let lam = eigenvalues(&(-(inv * &a1))).ok()?.into_iter().next()?;
        (Some(lam), left_null(&(&a1 + &a2 * lam))?)
    };
    let mut y = CVector::zeros(n);
    match lam {
        Some(lam) => {
            y[0] = ONE;
            y[1] = lam;
        }
        None => y[1] = ONE,
    }
    Some(SpanCountWitness {
        g: combine(&x),
        combination: x,
        y,
    })
}

/// Repeats the span-count argument until fewer than M independent maps
/// remain or M < N, where no N-dimensional code fits and pruning reports
/// the preimage as too small.
pub fn reduce_span_extm(fam: &FMapFamily, tol: &Tolerance) -> (FMapFamily, Vec<SpanCountWitness>) {
    let mut current = fam.clone();
    let mut witnesses = Vec::new();
    loop {
        let basis = current.span_basis();
        let (n, m) = (current.n(), current.m());
        if n < 2 || m < n || basis.len() < m {
            break;
        }
        let Some(w) = span_count_witness(&basis, n, tol) else {
            break;
        };
        let Some(null) = deficient_null(&w.g, n, w.g.norm(), tol) else {
            break;
        };
        current = current.restrict(&null);
        witnesses.push(w);
    }
    (current, witnesses)
}

/// Restriction of the family to the span of its rows (the orthogonal
/// complement of the common null space).
pub fn restrict_to_row_space(fam: &FMapFamily) -> FMapFamily {
    if fam.maps().is_empty() {
        return fam.restrict(&CMatrix::zeros(fam.m(), 0));
    }
    let refs: Vec<&CMatrix> = fam.maps().iter().collect();
    let stacked = vcat(&refs);
    let row_space = column_space(&stacked.adjoint(), 1e-10);
    fam.restrict(row_space.basis())
}

/// ⟨ψ|_B ρ_AB |ψ⟩_B = p·I problem with the lift back to codes.
#[derive(Debug, Clone)]
pub struct ProjectionInstance {
    pub dim_a: usize,
    pub dim_b: usize,
    pub rho_ab: CMatrix,
    /// Rows L with L·α = 0, α in the coordinates of the span basis.
    pub constraint_rows: CMatrix,
    /// Basis (columns) of the constraint-satisfying α, one per B basis vector.
    pub b_basis: CMatrix,
    pub target: CMatrix,
    /// X_b in 𝒱 coordinates: X(ψ) = Σ_b ψ_b X_b solves G_i X = α_i I.
    pub lift: Vec<CMatrix>,
}

impl ProjectionInstance {
    /// ⟨ψ|_B ρ_AB |ψ⟩_B as an operator on A.
    pub fn project(&self, psi: &CVector) -> CMatrix {
        let (na, nb) = (self.dim_a, self.dim_b);
        CMatrix::from_fn(na, na, |i, k| {
            let mut acc = ZERO;
            for j in 0..nb {
                for l in 0..nb {
                    acc += psi[j].conj() * self.rho_ab[(i * nb + j, k * nb + l)] * psi[l];
                }
            }
            acc
        })
    }

    /// ‖S/p − I‖_F with S the projected operator and p = tr S / dim A; 1 if p ≈ 0.
    pub fn residual(&self, psi: &CVector) -> f64 {
        proportional_to_identity(&self.project(psi))
    }

    /// X(ψ) in 𝒱 coordinates.
    pub fn lift_code(&self, psi: &CVector) -> Option<CMatrix> {
        let first = self.lift.first()?;
        Some(self.lift.iter().zip(psi.iter()).fold(
            CMatrix::zeros(first.nrows(), first.ncols()),
            |acc, (x, &p)| acc + x * p,
        ))
    }
}

fn proportional_to_identity(s: &CMatrix) -> f64 {
    let n = s.nrows();
    let p = s.trace() / Complex64::new(n as f64, 0.0);
    if p.norm() <= 1e-14 * s.norm().max(f64::MIN_POSITIVE) || p.norm() == 0.0 {
        return 1.0;
    }
    (s.map(|z| z / p) - CMatrix::identity(n, n)).norm()
}

/// Staircase re-basing and forward elimination to a pure I-projection problem.
pub fn reduce_to_projection(
    fam: &FMapFamily,
    tol: &Tolerance,
) -> Result<ProjectionInstance, ProtectError> {
    let (n, m) = (fam.n(), fam.m());
    let g = fam.span_basis();
    let k = g.len();
    let row_rank = fam.row_rank();
    if row_rank < m || k == 0 {
        return Err(ProtectError::RowSpanDeficient { row_rank, m });
    }

    // Staircase: block i spans the part of G_i's row space not yet covered.
    let mut remaining = CMatrix::identity(m, m);
    let mut blocks: Vec<CMatrix> = Vec::with_capacity(k);
    for gi in &g {
        let local = gi * &remaining;
        let svd = full_svd(&local);
        let smax = svd.s.first().copied().unwrap_or(0.0);
        let r = svd
            .s
            .iter()
            .filter(|&&x| smax > 0.0 && x > 1e-10 * smax.max(1.0))
            .count();
        let cols = remaining.ncols();
        blocks.push(&remaining * svd.v.columns(0, r));
        remaining = &remaining * svd.v.columns(r, cols - r);
    }
    if remaining.ncols() > 0 {
        return Err(ProtectError::RowSpanDeficient {
            row_rank: m - remaining.ncols(),
            m,
        });
    }

    // g_tilde[i][m] is N_i × N with X_i = Σ_m α_m g_tilde[i][m].
    let id = CMatrix::identity(n, n);
    let mut g_tilde: Vec<Vec<CMatrix>> = Vec::with_capacity(k);
    let mut constraints: Vec<CMatrix> = Vec::new();
    for i in 0..k {
        let gii = &g[i] * &blocks[i];
        let gii_pinv = pinv_rel(&gii, 1e-12);
        let outside = &id - &gii * &gii_pinv;
        let mut row_block = Vec::with_capacity(k);
        let mut constraint = CMatrix::zeros(n * n, k);
        for mm in 0..k {
            let mut h = if i == mm {
                id.clone()
            } else {
                CMatrix::zeros(n, n)
            };
            for (j, blk) in blocks.iter().enumerate().take(i) {
                h -= &g[i] * blk * &g_tilde[j][mm];
            }
            let c = &outside * &h;
            constraint.set_column(mm, &vectorize(&c));
            row_block.push(&gii_pinv * h);
        }
        constraints.push(constraint);
        g_tilde.push(row_block);
    }
    let constraint_rows = if constraints.is_empty() {
        CMatrix::zeros(0, k)
    } else {
        let refs: Vec<&CMatrix> = constraints.iter().collect();
        vcat(&refs)
    };
    let scale = constraint_rows.norm();
    let b_basis = if scale <= tol.eps_residual {
        CMatrix::identity(k, k)
    } else {
        nullspace_rel(&constraint_rows, 1e-10).1.into_basis()
    };
    let r = b_basis.ncols();
    if r == 0 {
        return Err(ProtectError::InfeasibleConstraints);
    }

    // X̃_m = Q·[g_tilde[0][m]; …; g_tilde[k−1][m]] in 𝒱 coordinates.
    let x_tilde: Vec<CMatrix> = (0..k)
        .map(|mm| {
            blocks
                .iter()
                .zip(g_tilde.iter())
                .fold(CMatrix::zeros(m, n), |acc, (blk, row)| acc + blk * &row[mm])
        })
        .collect();
    let lift: Vec<CMatrix> = (0..r)
        .map(|b| {
            x_tilde
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(m, n), |acc, (mm, x)| {
                    acc + x * b_basis[(mm, b)]
                })
        })
        .collect();
    let rho_ab = gram_state(&lift);
    Ok(ProjectionInstance {
        dim_a: n,
        dim_b: r,
        rho_ab,
        constraint_rows,
        b_basis,
        target: CMatrix::identity(n, n),
        lift,
    })
}

/// t·Σ_{bc} X_b†X_c ⊗ |b⟩⟨c| with unit trace, index a·r + b.
fn gram_state(lift: &[CMatrix]) -> CMatrix {
    let r = lift.len();
    let n = lift.first().map(|x| x.ncols()).unwrap_or(0);
    let mut rho = CMatrix::zeros(n * r, n * r);
    for b in 0..r {
        for c in 0..r {
            let block = lift[b].adjoint() * &lift[c];
            for a in 0..n {
                for a2 in 0..n {
                    rho[(a * r + b, a2 * r + c)] = block[(a, a2)];
                }
            }
        }
    }
    let t = rho.trace().re;
    if t > 0.0 {
        rho.unscale_mut(t);
    }
    rho
}

/// Restart and iteration limits of the local search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverBudget {
    pub restarts: usize,
    pub iterations: usize,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            restarts: 64,
            iterations: 2000,
        }
    }
}

/// Find α with Σ α_j M_j having orthonormal columns (up to scale).
#[derive(Debug, Clone)]
pub struct OrthoColumnInstance {
    matrices: Vec<CMatrix>,
    budget: SolverBudget,
}

impl OrthoColumnInstance {
    pub fn new(matrices: Vec<CMatrix>, budget: SolverBudget) -> Result<Self, ProtectError> {
        let shape = matrices
            .first()
            .map(|m| m.shape())
            .ok_or(ProtectError::ShapeMismatch)?;
        if matrices.iter().any(|m| m.shape() != shape) || shape.1 == 0 {
            return Err(ProtectError::ShapeMismatch);
        }
        Ok(Self { matrices, budget })
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn budget(&self) -> SolverBudget {
        self.budget
    }

    pub fn with_budget(mut self, budget: SolverBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn rows(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrices[0].ncols()
    }

    pub fn combine(&self, alpha: &CVector) -> CMatrix {
        self.matrices
            .iter()
            .zip(alpha.iter())
            .fold(CMatrix::zeros(self.rows(), self.cols()), |acc, (m, &a)| {
                acc + m * a
            })
    }

    /// f(α) = ‖u·G − I‖²_F with G = M(α)†M(α) and the optimal scale u.
    pub fn objective(&self, alpha: &CVector) -> f64 {
        let m = self.combine(alpha);
        scaled_defect(&(m.adjoint() * &m))
    }
}

fn scaled_defect(g: &CMatrix) -> f64 {
    let n = g.nrows();
    let t2 = hs_norm_sq(g);
    if t2 == 0.0 {
        return n as f64;
    }
    let u = g.trace().re / t2;
    (g.scale(u) - CMatrix::identity(n, n)).norm_squared()
}

fn hs_norm_sq(g: &CMatrix) -> f64 {
    g.norm_squared()
}

/// Solver threshold on f for a FOUND verdict.
pub const EPS_FOUND: f64 = 1e-18;

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Found {
        alpha: CVector,
        objective: f64,
        restart: usize,
    },
    NotFoundWithinBudget {
        best_objective: f64,
        restarts: usize,
    },
}

impl SolveOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SolveOutcome::Found { .. })
    }
}

/// Multi-start Levenberg–Marquardt on the residual M(α)†M(α) − I over the
/// real and imaginary parts of α, followed by alternating projections
/// between isometries and the span. Restart r draws from derive_seed(seed, r).
pub fn solve_ortho(inst: &OrthoColumnInstance, seed: u64) -> SolveOutcome {
    let budget = inst.budget;
    let mut best = f64::INFINITY;
    if inst.rows() < inst.cols() {
        return SolveOutcome::NotFoundWithinBudget {
            best_objective: inst.cols() as f64,
            restarts: 0,
        };
    }
    let polisher = Polisher::new(inst);
    for restart in 0..budget.restarts {
        let mut rng = rng_from_seed(derive_seed(seed, restart as u64));
        let mut alpha = CVector::from_fn(inst.matrices.len(), |_, _| complex_gaussian(&mut rng));
        normalize_trace(inst, &mut alpha);
        let alpha = levenberg_marquardt(inst, alpha, budget.iterations);
        let alpha = polisher.polish(inst, alpha);
        let f = inst.objective(&alpha);
        if f < EPS_FOUND {
            return SolveOutcome::Found {
                alpha,
                objective: f,
                restart,
            };
        }
        best = best.min(f);
    }
    SolveOutcome::NotFoundWithinBudget {
        best_objective: best,
        restarts: budget.restarts,
    }
}

fn normalize_trace(inst: &OrthoColumnInstance, alpha: &mut CVector) {
    let m = inst.combine(alpha);
    let t = m.norm_squared();
    if t > 0.0 {
        *alpha *= Complex64::new((inst.cols() as f64 / t).sqrt(), 0.0);
    }
}

fn lm_residual(inst: &OrthoColumnInstance, alpha: &CVector) -> (CMatrix, DVector<f64>) {
    let n = inst.cols();
    let m = inst.combine(alpha);
    let g = m.adjoint() * &m - CMatrix::identity(n, n);
    let mut r = DVector::zeros(2 * n * n);
    for (idx, z) in g.iter().enumerate() {
        r[2 * idx] = z.re;
        r[2 * idx + 1] = z.im;
    }
    (m, r)
}

fn levenberg_marquardt(
    inst: &OrthoColumnInstance,
    mut alpha: CVector,
    iterations: usize,
) -> CVector {
    let k = inst.matrices.len();
    let n = inst.cols();
    let i_unit = Complex64::new(0.0, 1.0);
    let (mut m, mut r) = lm_residual(inst, &alpha);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let mut stalled = 0;
    for _ in 0..iterations {
        if cost < 1e-30 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(2 * n * n, 2 * k);
        for (j, mj) in inst.matrices.iter().enumerate() {
            let p = mj.adjoint() * &m;
            let da = &p + p.adjoint();
            let db = (p.adjoint() - &p) * i_unit;
            for (idx, (za, zb)) in da.iter().zip(db.iter()).enumerate() {
                jac[(2 * idx, 2 * j)] = za.re;
                jac[(2 * idx + 1, 2 * j)] = za.im;
                jac[(2 * idx, 2 * j + 1)] = zb.re;
                jac[(2 * idx + 1, 2 * j + 1)] = zb.im;
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let diag_max = (0..2 * k)
            .map(|q| jtj[(q, q)])
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for q in 0..2 * k {
                a[(q, q)] += mu * diag_max;
            }
            let Some(chol) = a.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&jtr));
            let trial = CVector::from_fn(k, |j, _| {
                alpha[j] + Complex64::new(step[2 * j], step[2 * j + 1])
            });
            let (tm, tr) = lm_residual(inst, &trial);
            let tcost = tr.norm_squared();
            if tcost < cost {
                let gain = (cost - tcost) / cost.max(f64::MIN_POSITIVE);
                alpha = trial;
                m = tm;
                r = tr;
                cost = tcost;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                stalled = if gain < 1e-10 { stalled + 1 } else { 0 };
                break;
            }
            mu *= 4.0;
        }
        if !improved || stalled > 25 || mu > 1e12 {
            break;
        }
    }
    alpha
}

/// Alternating projections: nearest isometry (polar factor), then least
/// squares back onto the span.
struct Polisher {
    pinv: CMatrix,
}

impl Polisher {
    fn new(inst: &OrthoColumnInstance) -> Self {
        let rows = inst.rows() * inst.cols();
        let cols: Vec<CMatrix> = inst
            .matrices
            .iter()
            .map(|m| CMatrix::from_column_slice(rows, 1, vectorize(m).as_slice()))
            .collect();
        let refs: Vec<&CMatrix> = cols.iter().collect();
        Self {
            pinv: pinv_rel(&hcat(&refs), 1e-13),
        }
    }

    fn polish(&self, inst: &OrthoColumnInstance, alpha: CVector) -> CVector {
        let mut best_f = inst.objective(&alpha);
        let mut best = alpha;
        if best_f > 1e-6 {
            return best;
        }
        let mut current = best.clone();
        for _ in 0..20 {
            let m = inst.combine(&current);
            let k = m.nrows().min(m.ncols());
            let svd = full_svd(&m);
            let mean = svd.s[..k].iter().sum::<f64>() / k.max(1) as f64;
            let q = (svd.u.columns(0, k) * svd.v.columns(0, k).adjoint()).scale(mean);
            current = CVector::from_column_slice((&self.pinv * vectorize(&q)).as_slice());
            let f = inst.objective(&current);
            if f < best_f {
                best_f = f;
                best = current.clone();
            } else {
                break;
            }
        }
        best
    }
}

/// Purifies ρ_AB with an environment of dimension rank(ρ_AB) and emits
/// (M_j)_{ki} = m_ijk for |ψ⟩_ABE = Σ m_ijk |i⟩|j⟩|k⟩. A projection solution
/// ψ_B corresponds to the coefficients α = conj(ψ_B).
pub fn projection_to_ortho(
    inst: &ProjectionInstance,
    budget: SolverBudget,
) -> Result<OrthoColumnInstance, ProtectError> {
    let (na, nb) = (inst.dim_a, inst.dim_b);
    let rho = (&inst.rho_ab + inst.rho_ab.adjoint()).scale(0.5);
    let eig = rho.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let kept: Vec<usize> = (0..na * nb)
        .filter(|&k| eig.eigenvalues[k] > 1e-12 * lmax.max(f64::MIN_POSITIVE))
        .collect();
    if kept.len() < na {
        return Err(ProtectError::EnvironmentTooSmall {
            rank: kept.len(),
            needed: na,
        });
    }
    let ne = kept.len();
    let matrices = (0..nb)
        .map(|j| {
            CMatrix::from_fn(ne, na, |k, i| {
                let idx = kept[k];
                eig.eigenvectors[(i * nb + j, idx)] * eig.eigenvalues[idx].sqrt()
            })
        })
        .collect();
    OrthoColumnInstance::new(matrices, budget)
}

/// Reverse reduction: the state with ρ_AB = t·tr_E|ψ′⟩⟨ψ′|, m′_ijk = (M′_j)_{ki},
/// t = 1/Σ_j tr(M′_j†M′_j). Coefficients α for M′ correspond to ψ_B = conj(α).
pub fn ortho_to_projection(inst: &OrthoColumnInstance) -> ProjectionInstance {
    let (ne, na) = (inst.rows(), inst.cols());
    let nb = inst.matrices.len();
    let total: f64 = inst.matrices.iter().map(|m| m.norm_squared()).sum();
    let t = if total > 0.0 { 1.0 / total } else { 1.0 };
    // ψ′ as an (A·B) × E matrix; ρ = t·Ψ Ψ†.
    let psi = CMatrix::from_fn(na * nb, ne, |row, k| {
        let (i, j) = (row / nb, row % nb);
        inst.matrices[j][(k, i)]
    });
    let rho_ab = (&psi * psi.adjoint()).scale(t);
    ProjectionInstance {
        dim_a: na,
        dim_b: nb,
        rho_ab,
        constraint_rows: CMatrix::zeros(0, nb),
        b_basis: CMatrix::identity(nb, nb),
        target: CMatrix::identity(na, na),
        lift: vec![],
    }
}

/// Solutions (X, α) of G_i X = α_i I for a basis {G_i} of span{F}, as a
/// list of X parts. Covers families whose rows do not span 𝒱.
pub fn direct_solution_basis(fam: &FMapFamily) -> Vec<CMatrix> {
    let (n, m) = (fam.n(), fam.m());
    let g = fam.span_basis();
    let k = g.len();
    let unknowns = m * n + k;
    if unknowns == 0 {
        return vec![];
    }
    let mut system = CMatrix::zeros((k * n * n).max(1), unknowns);
    let id_n = CMatrix::identity(n, n);
    for (i, gi) in g.iter().enumerate() {
        // vec(G_i X) = (I_N ⊗ G_i) vec X, vec(α_i I) = α_i vec I
        let block = crate::linalg::kron(&id_n, gi);
        let r0 = i * n * n;
        system.view_mut((r0, 0), (n * n, m * n)).copy_from(&block);
        let vid = vectorize(&id_n);
        for q in 0..n * n {
            system[(r0 + q, m * n + i)] = -vid[q];
        }
    }
    let null = nullspace_rel(&system, 1e-12).1;
    (0..null.dim())
        .map(|b| unvectorize(&null.basis().column(b).as_slice()[..m * n], m, n))
        .collect()
}

/// Reasons for a negative verdict; each is an exact linear-algebra fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NotProtectableReason {
    /// dim 𝒱 < N, before or after pruning.
    PreimageTooSmall { stage: String, m: usize, n: usize },
    /// The elimination constraints force α = 0.
    InfeasibleConstraints,
    /// Every candidate code lies in a space of dimension < N.
    SolutionSpanTooSmall { rank: usize, n: usize },
}

impl std::fmt::Display for NotProtectableReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::PreimageTooSmall { stage, m, n } => {
                write!(f, "dim 𝒱 = {m} < N = {n} after {stage}")
            }
            Self::InfeasibleConstraints => write!(f, "elimination constraints force α = 0"),
            Self::SolutionSpanTooSmall { rank, n } => {
                write!(f, "candidate codes span {rank} < N = {n} dimensions")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateResiduals {
    /// max ‖F_ij|_𝒟 − α_ij U‖_F plus leakage of E_i𝒟 out of the encoded block.
    pub proportionality: f64,
    /// ‖U†U − I‖_F together with the orthonormality of the code basis.
    pub isometry: f64,
    /// max(0, λ_max(Σ R†R) − 1).
    pub recovery_excess: f64,
    /// verify_noiseless residual on {E_i R_j}.
    pub noiseless: f64,
}

impl CertificateResiduals {
    pub fn max(&self) -> f64 {
        self.proportionality
            .max(self.isometry)
            .max(self.recovery_excess)
            .max(self.noiseless)
    }
}

#[derive(Debug, Clone)]
pub struct ProtectabilityCertificate {
    /// Code 𝒟 with the basis that U maps to the standard basis of ℋ_I′.
    pub code: Subspace,
    /// U from 𝒟 (in the `code` basis) to ℋ_I′.
    pub isometry: CMatrix,
    /// α_ij at (i, j).
    pub alphas: CMatrix,
    pub recovery: OperatorSet,
    pub residuals: CertificateResiduals,
    /// Every α_ij vanishes: all errors annihilate 𝒟.
    pub degenerate: bool,
}

impl ProtectabilityCertificate {
    /// Recomputes every check from the errors and the encoding.
    pub fn verify(
        &self,
        enc: &SubsystemEncoding,
        errs: &OperatorSet,
        tol: &Tolerance,
    ) -> CertificateResiduals {
        certificate_residuals(
            enc,
            errs,
            self.code.basis(),
            &self.isometry,
            &self.alphas,
            &self.recovery,
            tol,
        )
    }

    pub fn is_valid(&self, tol: &Tolerance) -> bool {
        self.residuals.max() <= 10.0 * tol.eps_residual
    }
}

fn certificate_residuals(
    enc: &SubsystemEncoding,
    errs: &OperatorSet,
    code: &CMatrix,
    u: &CMatrix,
    alphas: &CMatrix,
    recovery: &OperatorSet,
    tol: &Tolerance,
) -> CertificateResiduals {
    let (n, s, d) = (enc.n(), enc.s_dim(), enc.dim());
    let outside = CMatrix::identity(d, d) - enc.projector();
    let mut proportionality: f64 = 0.0;
    for (i, e) in errs.operators().iter().enumerate() {
        let image = e * code;
        let coords = enc.embed().adjoint() * &image;
        let leak = (&outside * &image).norm();
        for j in 0..s {
            let f = CMatrix::from_fn(n, n, |a, b| coords[(a * s + j, b)]);
            let defect = (f - u * alphas[(i, j)]).norm();
            proportionality = proportionality.max((defect + leak) / op_norm(e).max(1.0));
        }
    }
    let isometry = (u.adjoint() * u - CMatrix::identity(n, n)).norm()
        + (code.adjoint() * code - CMatrix::identity(n, n)).norm();
    let recovery_excess = (max_eigenvalue(&recovery.gram_sum()) - 1.0).max(0.0);
    let mut composites = Vec::with_capacity(errs.len() * recovery.len());
    for (ename, e) in errs.iter() {
        for (rname, r) in recovery.iter() {
            composites.push((format!("{ename}·{rname}"), e * r));
        }
    }
    let noiseless = OperatorSet::new(d, composites)
        .map(|set| verify_noiseless(enc, &set, tol).residual)
        .unwrap_or(f64::INFINITY);
    CertificateResiduals {
        proportionality,
        isometry,
        recovery_excess,
        noiseless,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchRoute {
    /// Staircase elimination, purification, orthonormal-columns search.
    Projection,
    /// Linear solution space of G_i X = α_i I searched directly.
    Direct,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Protectable(Box<ProtectabilityCertificate>),
    NotProtectable(NotProtectableReason),
    Undecided {
        best_objective: f64,
        restarts: usize,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Protectable(_) => "PROTECTABLE",
            Verdict::NotProtectable(_) => "NOT_PROTECTABLE",
            Verdict::Undecided { .. } => "UNDECIDED",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtectReport {
    pub verdict: Verdict,
    pub preimage_dim: usize,
    pub pruned_dim: usize,
    pub span_dim: usize,
    pub prune_steps: Vec<PruneStep>,
    pub route: Option<SearchRoute>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ProtectOptions {
    pub seed: u64,
    pub budget: SolverBudget,
    pub tol: Tolerance,
}

/// Full decision procedure for one encoding.
pub fn check_protectable(
    enc: &SubsystemEncoding,
    errs: &OperatorSet,
    opts: &ProtectOptions,
) -> Result<ProtectReport, ProtectError> {
    if enc.dim() != errs.dim() {
        return Err(ProtectError::DimensionMismatch(format!(
            "encoding acts on ℂ^{}, errors on ℂ^{}",
            enc.dim(),
            errs.dim()
        )));
    }
    let tol = &opts.tol;
    let n = enc.n();
    let v = preimage_space(enc, errs, tol);
    let mut report = ProtectReport {
        verdict: Verdict::Undecided {
            best_objective: f64::INFINITY,
            restarts: 0,
        },
        preimage_dim: v.dim(),
        pruned_dim: v.dim(),
        span_dim: 0,
        prune_steps: vec![],
        route: None,
    };
    if v.dim() < n {
        report.verdict = Verdict::NotProtectable(NotProtectableReason::PreimageTooSmall {
            stage: "preimage".into(),
            m: v.dim(),
            n,
        });
        return Ok(report);
    }
    let fam = build_f_maps(enc, errs, &v)?;
    let (_, fam, steps) = prune_low_rank(&fam, derive_seed(opts.seed, 0x9e), tol);
    report.pruned_dim = fam.m();
    report.prune_steps = steps;
    report.span_dim = fam.span_basis().len();
    if fam.m() < n {
        report.verdict = Verdict::NotProtectable(NotProtectableReason::PreimageTooSmall {
            stage: "pruning".into(),
            m: fam.m(),
            n,
        });
        return Ok(report);
    }

    // Candidate codes X = Σ_b β_b lift[b]; `conjugate` marks the projection
    // route, where the solver's α gives β = conj(α).
    let (lift, ortho, conjugate) = match reduce_to_projection(&fam, tol) {
        Ok(proj) => {
            report.route = Some(SearchRoute::Projection);
            match projection_to_ortho(&proj, opts.budget) {
                Ok(ortho) => (proj.lift, ortho, true),
                Err(ProtectError::EnvironmentTooSmall { rank, needed }) => {
                    report.verdict =
                        Verdict::NotProtectable(NotProtectableReason::SolutionSpanTooSmall {
                            rank,
                            n: needed,
                        });
                    return Ok(report);
                }
                Err(e) => return Err(e),
            }
        }
        Err(ProtectError::InfeasibleConstraints) => {
            report.route = Some(SearchRoute::Projection);
            report.verdict = Verdict::NotProtectable(NotProtectableReason::InfeasibleConstraints);
            return Ok(report);
        }
        Err(ProtectError::RowSpanDeficient { .. }) => {
            report.route = Some(SearchRoute::Direct);
            let lift = direct_solution_basis(&fam);
            let span_rank = if lift.is_empty() {
                0
            } else {
                let refs: Vec<&CMatrix> = lift.iter().collect();
                rank(&hcat(&refs), 1e-10)
            };
            if span_rank < n {
                report.verdict =
                    Verdict::NotProtectable(NotProtectableReason::SolutionSpanTooSmall {
                        rank: span_rank,
                        n,
                    });
                return Ok(report);
            }
            let ortho = OrthoColumnInstance::new(lift.clone(), opts.budget)?;
            (lift, ortho, false)
        }
        Err(e) => return Err(e),
    };

    match solve_ortho(&ortho, opts.seed) {
        SolveOutcome::NotFoundWithinBudget {
            best_objective,
            restarts,
        } => {
            report.verdict = Verdict::Undecided {
                best_objective,
                restarts,
            };
        }
        SolveOutcome::Found {
            alpha, objective, ..
        } => {
            let beta = if conjugate {
                alpha.map(|z| z.conj())
            } else {
                alpha
            };
            let x = lift
                .iter()
                .zip(beta.iter())
                .fold(CMatrix::zeros(fam.m(), n), |acc, (l, &b)| acc + l * b);
            let cert = build_certificate(enc, errs, &fam, &x, tol);
            report.verdict = if cert.is_valid(tol) {
                Verdict::Protectable(Box::new(cert))
            } else {
                Verdict::Undecided {
                    best_objective: objective.max(cert.residuals.max()),
                    restarts: 0,
                }
            };
        }
    }
    Ok(report)
}

/// Certificate for a candidate X (𝒱 coordinates, X†X ∝ I).
pub fn build_certificate(
    enc: &SubsystemEncoding,
    errs: &OperatorSet,
    fam: &FMapFamily,
    x: &CMatrix,
    tol: &Tolerance,
) -> ProtectabilityCertificate {
    let (n, s, d) = (enc.n(), enc.s_dim(), enc.dim());
    let raw = fam.v_basis() * x;
    let mut code = &raw * pd_inv_sqrt(&(raw.adjoint() * &raw));
    let alpha_of = |code: &CMatrix| {
        let coords = enc.embed().adjoint() * errs_times(errs, code);
        CMatrix::from_fn(errs.len(), s, |i, j| {
            let block = coords.view((0, i * n), (n * s, n));
            (0..n).map(|a| block[(a * s + j, a)]).sum::<Complex64>() / Complex64::new(n as f64, 0.0)
        })
    };
    let mut alphas = alpha_of(&code);
    let (imax, _) = alphas
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (idx, z)| {
            if z.norm() > bv {
                (idx, z.norm())
            } else {
                (bi, bv)
            }
        });
    let largest = alphas[imax];
    let degenerate = largest.norm() <= tol.eps_residual;
    if !degenerate {
        let phase = largest.conj() / largest.norm();
        code *= phase;
        alphas = alpha_of(&code);
    }
    let u = CMatrix::identity(n, n);
    let mut named = Vec::with_capacity(s + 1);
    for j in 0..s {
        let slice = CMatrix::from_fn(d, n, |row, a| enc.embed()[(row, a * s + j)]);
        named.push((format!("R{j}"), &code * slice.adjoint()));
    }
    named.push((
        "R_complement".to_string(),
        CMatrix::identity(d, d) - enc.projector(),
    ));
    let recovery = OperatorSet::new(d, named).expect("recovery operators share the dimension");
    let residuals = certificate_residuals(enc, errs, &code, &u, &alphas, &recovery, tol);
    ProtectabilityCertificate {
        code: Subspace::from_orthonormal(code),
        isometry: u,
        alphas,
        recovery,
        residuals,
        degenerate,
    }
}

/// [E_0·code | E_1·code | …].
fn errs_times(errs: &OperatorSet, code: &CMatrix) -> CMatrix {
    let images: Vec<CMatrix> = errs.operators().iter().map(|e| e * code).collect();
    let refs: Vec<&CMatrix> = images.iter().collect();
    hcat(&refs)
}

#[derive(Debug, Clone)]
pub struct DetectionCheck {
    pub passed: bool,
    pub residual: f64,
    /// c_O with P·O·P ≈ c_O·P.
    pub coefficients: Vec<Complex64>,
}

/// P·O·P = c_O·P for every operator, with P the projector onto `code`.
pub fn detecting_code_check(ops: &[CMatrix], code: &Subspace, tol: &Tolerance) -> DetectionCheck {
    let b = code.basis();
    let n = code.dim();
    let mut residual: f64 = 0.0;
    let mut coefficients = Vec::with_capacity(ops.len());
    for o in ops {
        let local = b.adjoint() * o * b;
        let c = if n == 0 {
            ZERO
        } else {
            local.trace() / Complex64::new(n as f64, 0.0)
        };
        let defect = (&local - CMatrix::identity(n, n) * c).norm();
        residual = residual.max(defect / op_norm(o).max(1.0));
        coefficients.push(c);
    }
    DetectionCheck {
        passed: residual <= tol.eps_residual,
        residual,
        coefficients,
    }
}

/// {F_p†F_q} over all pairs of maps.
pub fn full_detecting_operators(fam: &FMapFamily) -> Vec<CMatrix> {
    let maps = fam.maps();
    maps.iter()
        .flat_map(|p| maps.iter().map(move |q| p.adjoint() * q))
        .collect()
}

/// {F_p†F_p} ∪ {F_p†F_π(p)} with π the cyclic shift p ↦ p + 1.
pub fn reduced_detecting_operators(fam: &FMapFamily) -> Vec<CMatrix> {
    let maps = fam.maps();
    let count = maps.len();
    let mut out: Vec<CMatrix> = maps.iter().map(|f| f.adjoint() * f).collect();
    if count > 1 {
        out.extend((0..count).map(|p| maps[p].adjoint() * &maps[(p + 1) % count]));
    }
    out
}

#[derive(Debug, Clone)]
pub struct CorrectionCheck {
    pub passed: bool,
    pub residual: f64,
    /// Fit residual for (i, j).
    pub residuals: CMatrix,
    /// g_ij with Π E_i†E_j Π ≈ embed·(I_N ⊗ g_ij)·embed†.
    pub g: Vec<Vec<CMatrix>>,
}

/// Operator error-correction condition on the encoding: every
/// Π E_i†E_j Π acts as I_N ⊗ g_ij on the encoded block.
pub fn verify_error_correcting(
    enc: &SubsystemEncoding,
    errs: &OperatorSet,
    tol: &Tolerance,
) -> CorrectionCheck {
    let images: Vec<CMatrix> = errs.operators().iter().map(|e| e * enc.embed()).collect();
    let norms: Vec<f64> = errs
        .operators()
        .iter()
        .map(|e| op_norm(e).max(1.0))
        .collect();
    let k = errs.len();
    let mut residuals = CMatrix::zeros(k, k);
    let mut g = Vec::with_capacity(k);
    let mut worst: f64 = 0.0;
    for i in 0..k {
        let mut row = Vec::with_capacity(k);
        for j in 0..k {
            let block = images[i].adjoint() * &images[j];
            let (gij, res) = fit_identity_kron(&block, enc.n(), enc.s_dim());
            let rel = res / (norms[i] * norms[j]);
            residuals[(i, j)] = Complex64::new(rel, 0.0);
            worst = worst.max(rel);
            row.push(gij);
        }
        g.push(row);
    }
    CorrectionCheck {
        passed: worst <= tol.eps_residual,
        residual: worst,
        residuals,
        g,
    }
}

#[derive(Debug, Clone)]
pub struct ExtractedSubsystem {
    pub encoding: SubsystemEncoding,
    /// φ′_ij in the basis of the extracted cosubsystem, at [encoder][error].
    pub phi: Vec<Vec<CVector>>,
}

/// Subsystem encoding implied by encoders C_i (d × n_I isometries), errors
/// and a decoder D (isometry from ℂ^d into ℂ^{n_I} ⊗ ℂ^{n_A}) that
/// preserve information: D·E_j·C_i = I ⊗ |φ_ij⟩.
pub fn extract_subsystem_from_decoder(
    encoders: &[CMatrix],
    errs: &OperatorSet,
    decoder: &CMatrix,
    tol: &Tolerance,
) -> Result<ExtractedSubsystem, ProtectError> {
    let d = errs.dim();
    let n_i = encoders.first().map(|c| c.ncols()).ok_or_else(|| {
        ProtectError::DimensionMismatch("at least one encoder is required".into())
    })?;
    if decoder.ncols() != d || n_i == 0 || !decoder.nrows().is_multiple_of(n_i) {
        return Err(ProtectError::DimensionMismatch(format!(
            "decoder is {}×{}, expected (n_I·n_A)×{d} with n_I = {n_i}",
            decoder.nrows(),
            decoder.ncols()
        )));
    }
    if encoders.iter().any(|c| c.shape() != (d, n_i)) {
        return Err(ProtectError::DimensionMismatch(format!(
            "encoders must all be {d}×{n_i}"
        )));
    }
    let n_a = decoder.nrows() / n_i;
    let id_i = CMatrix::identity(n_i, n_i);

    let mut phi_raw = Vec::with_capacity(encoders.len());
    for (ci, c) in encoders.iter().enumerate() {
        let mut row = Vec::with_capacity(errs.len());
        for (ej, e) in errs.operators().iter().enumerate() {
            let image = decoder * e * c;
            // (I ⊗ φ)[a·n_A + x, b] = δ_ab φ_x
            let phi = CVector::from_fn(n_a, |x, _| {
                (0..n_i).map(|a| image[(a * n_a + x, a)]).sum::<Complex64>()
                    / Complex64::new(n_i as f64, 0.0)
            });
            let fit =
                crate::linalg::kron(&id_i, &CMatrix::from_column_slice(n_a, 1, phi.as_slice()));
            let deviation = (&image - fit).norm() / op_norm(e).max(1.0);
            if deviation > tol.eps_residual * 10.0 {
                return Err(ProtectError::NotPreserving {
                    encoder: ci,
                    error: ej,
                    deviation,
                });
            }
            row.push(phi);
        }
        phi_raw.push(row);
    }

    // 𝒮 = {φ : (I − DD†)(|p⟩ ⊗ φ) = 0 for all p}.
    let outside = CMatrix::identity(n_i * n_a, n_i * n_a) - decoder * decoder.adjoint();
    let blocks: Vec<CMatrix> = (0..n_i)
        .map(|p| {
            let ep = CMatrix::from_fn(n_i, 1, |a, _| if a == p { ONE } else { ZERO });
            &outside * crate::linalg::kron(&ep, &CMatrix::identity(n_a, n_a))
        })
        .collect();
    let refs: Vec<&CMatrix> = blocks.iter().collect();
    let s_space = nullspace_floor(&vcat(&refs), 1e-10, 1e-10).1;
    let s = s_space.dim();
    if s == 0 {
        return Err(ProtectError::DimensionMismatch(
            "decoder range contains no product ℋ_I ⊗ φ".into(),
        ));
    }
    let embed = decoder.adjoint() * crate::linalg::kron(&id_i, s_space.basis());
    let encoding = SubsystemEncoding::new(n_i, s, embed, tol)?;
    let phi = phi_raw
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|p| s_space.basis().adjoint() * p)
                .collect()
        })
        .collect();
    Ok(ExtractedSubsystem { encoding, phi })
}
