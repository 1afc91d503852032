//! Dense complex linear algebra with explicit tolerances.
//!
//! Everything here is a thin, tolerance-aware layer over `nalgebra`'s SVD,
//! Hermitian eigensolver and complex Schur form. Rank decisions, eigenvalue
//! clustering and subspace bookkeeping live here so that the algebraic
//! modules never compare floating point numbers against ad hoc constants.

use nalgebra::{linalg::Schur, DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense complex matrix, the concrete form of every operator in the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Deterministic generator used for every randomized draw.
pub type Rng = ChaCha8Rng;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (‖h − h†‖ = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("eigenvalue clusters could not be separated after {attempts} refinements")]
    ClusteringAmbiguous { attempts: usize },
    #[error("empty basis")]
    EmptyBasis,
    #[error("matrix must be square, got {rows}×{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}

/// Numerical thresholds shared by every analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular-value cutoff used for rank decisions.
    pub eps_rank: f64,
    /// Absolute bound on verification residuals.
    pub eps_residual: f64,
    /// Reseeding budget for randomized procedures.
    pub max_retries: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps_rank: 1e-12,
            eps_residual: 1e-9,
            max_retries: 8,
        }
    }
}

impl Tolerance {
    pub fn new(eps_rank: f64, eps_residual: f64, max_retries: usize) -> Result<Self, LinalgError> {
        if !(eps_rank > 0.0 && eps_rank < 1.0) {
            return Err(LinalgError::InvalidTolerance(format!(
                "eps_rank must lie in (0, 1), got {eps_rank}"
            )));
        }
        if !(eps_residual > 0.0 && eps_residual.is_finite()) {
            return Err(LinalgError::InvalidTolerance(format!(
                "eps_residual must be positive, got {eps_residual}"
            )));
        }
        if max_retries == 0 {
            return Err(LinalgError::InvalidTolerance(
                "max_retries must be positive".into(),
            ));
        }
        Ok(Self {
            eps_rank,
            eps_residual,
            max_retries,
        })
    }

    /// Same tolerance with a different residual bound (rank cutoff kept below it).
    pub fn with_residual(eps_residual: f64) -> Self {
        let base = Self::default();
        Self {
            eps_residual,
            eps_rank: base.eps_rank.min(eps_residual * 1e-3),
            ..base
        }
    }

    /// Merge radius for eigenvalues of a matrix with norm `scale`.
    pub fn eps_cluster(&self, scale: f64) -> f64 {
        1e3 * self.eps_residual * scale.max(f64::MIN_POSITIVE)
    }

    /// Relative cutoff for deciding membership of a vector in a span.
    pub(crate) fn span_cutoff(&self) -> f64 {
        10.0 * self.eps_residual
    }
}

/// A linear subspace given by an orthonormal basis (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: CMatrix,
}

impl Subspace {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(basis: CMatrix) -> Self {
        Self {
            ambient_dim: basis.nrows(),
            basis,
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: CMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: CMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Orthonormal basis of the column span of `vectors`, rank decided with
    /// the relative cutoff `rel`.
    pub fn span_of(vectors: &CMatrix, rel: f64) -> Self {
        column_space(vectors, rel)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> CMatrix {
        self.basis
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// ‖basis†·basis − I‖_F.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.dim();
        (self.basis.adjoint() * &self.basis - CMatrix::identity(k, k)).norm()
    }

    pub fn complement(&self) -> Self {
        let d = self.ambient_dim;
        if self.dim() == 0 {
            return Self::full(d);
        }
        let (_, null) = nullspace_rel(&self.basis.adjoint(), 1e-10);
        null
    }

    /// Sum of two subspaces of the same ambient space.
    pub fn sum(&self, other: &Subspace, rel: f64) -> Self {
        let mut m = CMatrix::zeros(self.ambient_dim, self.dim() + other.dim());
        m.columns_mut(0, self.dim()).copy_from(&self.basis);
        m.columns_mut(self.dim(), other.dim())
            .copy_from(&other.basis);
        column_space(&m, rel)
    }

    pub fn intersect(&self, other: &Subspace, rel: f64) -> Self {
        // x = A a = B b  <=>  [A, -B] (a; b) = 0
        let (a, b) = (self.dim(), other.dim());
        if a == 0 || b == 0 {
            return Self::zero(self.ambient_dim);
        }
        let mut m = CMatrix::zeros(self.ambient_dim, a + b);
        m.columns_mut(0, a).copy_from(&self.basis);
        m.columns_mut(a, b).copy_from(&(-&other.basis));
        let (_, null) = nullspace_rel(&m, rel);
        let coeffs = null.basis.rows(0, a).into_owned();
        column_space(&(&self.basis * coeffs), rel)
    }

    /// ‖(I − P)v‖ for every column of `vectors`, maximised.
    pub fn leakage(&self, vectors: &CMatrix) -> f64 {
        let proj = &self.basis * (self.basis.adjoint() * vectors);
        (vectors - proj).norm()
    }

    /// Spectral norm of the difference of the two projectors; zero iff equal.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.dim() != other.dim() {
            return 1.0;
        }
        op_norm(&(self.projector() - other.projector()))
    }

    /// Restricts an operator to coordinates of this subspace: basis†·op·basis.
    pub fn compress(&self, op: &CMatrix) -> CMatrix {
        self.basis.adjoint() * op * &self.basis
    }

    /// Maps subspace coordinates back into the ambient space.
    pub fn embed(&self, local: &Subspace) -> Subspace {
        Subspace::from_orthonormal(&self.basis * local.basis())
    }
}

/// Singular value decomposition with descending singular values and a
/// complete right factor (`v` is cols × cols).
pub(crate) struct FullSvd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub(crate) fn full_svd(m: &CMatrix) -> FullSvd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return FullSvd {
            u: CMatrix::zeros(rows, 0),
            s: vec![],
            v: CMatrix::identity(cols, cols),
        };
    }
    // Pad with zero rows so the thin SVD carries a complete right factor.
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (u, s, v) = match lapack_style_svd(&padded) {
        Some(f) => f,
        None => jacobi_svd(&padded),
    };
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    FullSvd {
        u: CMatrix::from_fn(rows, order.len(), |i, j| u[(i, order[j])]),
        s: order.iter().map(|&i| s[i]).collect(),
        v: CMatrix::from_fn(cols, order.len(), |i, j| v[(i, order[j])]),
    }
}

type RawSvd = (CMatrix, Vec<f64>, CMatrix);

/// nalgebra's bidiagonal SVD, rejected when its factors fail to reproduce
/// the input. The complex path occasionally returns a left factor off by a
/// few percent on rank-deficient input, so the result is always checked.
fn lapack_style_svd(m: &CMatrix) -> Option<RawSvd> {
    let svd = m.clone().svd(true, true);
    let u = svd.u?;
    let vt = svd.v_t?;
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let k = s.len();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let n = m.nrows().max(m.ncols()) as f64;
    let slack = 64.0 * n * f64::EPSILON;
    let sigma = CMatrix::from_fn(k, k, |i, j| if i == j { r(s[i]) } else { ZERO });
    let recon = (&u * sigma * &vt - m).norm() / scale;
    let ortho_u = (u.adjoint() * &u - CMatrix::identity(k, k)).norm();
    let ortho_v = (&vt * vt.adjoint() - CMatrix::identity(k, k)).norm();
    (recon <= slack && ortho_u <= slack && ortho_v <= slack).then(|| (u, s, vt.adjoint()))
}

/// One-sided Jacobi SVD for rows ≥ cols. Slower than the bidiagonal route
/// but accurate to working precision in every singular triple.
fn jacobi_svd(m: &CMatrix) -> RawSvd {
    let (rows, cols) = m.shape();
    debug_assert!(rows >= cols);
    let mut a = m.clone();
    let mut v = CMatrix::identity(cols, cols);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                // Pairs near the underflow range carry no usable phase.
                if g <= f64::EPSILON * alpha.sqrt() * beta.sqrt() || g < 1e-280 {
                    continue;
                }
                rotated = true;
                // Phase-align column q so the pair has a real inner product.
                let phase = (gamma / g).conj();
                let phase = phase / phase.norm();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let x = mat[(i, p)];
                        let y = mat[(i, q)] * phase;
                        mat[(i, p)] = x * cs - y * sn;
                        mat[(i, q)] = x * sn + y * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let s: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let smax = s.iter().copied().fold(0.0, f64::max);
    let mut u = CMatrix::zeros(rows, cols);
    let mut filled = Vec::with_capacity(cols);
    for (j, &sj) in s.iter().enumerate() {
        if sj > smax * f64::EPSILON * rows as f64 && sj > 0.0 {
            u.set_column(j, &(a.column(j) / r(sj)));
            filled.push(j);
        }
    }
    // Zero singular values get an orthonormal completion of the left factor:
    // each step adopts the basis vector with the largest residual.
    let empty: Vec<usize> = (0..cols).filter(|j| !filled.contains(j)).collect();
    for j in empty {
        let q = u.select_columns(&filled);
        let residual = CMatrix::identity(rows, rows) - &q * q.adjoint();
        let best = (0..rows)
            .max_by(|&x, &y| {
                residual
                    .column(x)
                    .norm()
                    .total_cmp(&residual.column(y).norm())
            })
            .expect("rows > 0");
        let mut e = residual.column(best).into_owned();
        e -= &q * (q.adjoint() * &e);
        u.set_column(j, &(&e / r(e.norm())));
        filled.push(j);
    }
    (u, s, v)
}

fn rank_from(s: &[f64], rel: f64, shape: (usize, usize)) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let cutoff = rel * smax * shape.0.max(shape.1) as f64;
    s.iter().filter(|&&x| x > cutoff).count()
}

/// Rank and null space with singular values kept iff σ > rel·σ_max·max(rows, cols).
pub(crate) fn nullspace_rel(m: &CMatrix, rel: f64) -> (usize, Subspace) {
    let cols = m.ncols();
    let svd = full_svd(m);
    let rank = rank_from(&svd.s, rel, m.shape());
    let null = svd.v.columns(rank, cols - rank).into_owned();
    (rank, Subspace::from_orthonormal(null))
}

/// As [`nullspace_rel`], but singular values ≤ `floor` also count as zero.
/// Needed when `m` may be pure rounding noise, where a cutoff relative to
/// σ_max alone would call it full rank.
pub(crate) fn nullspace_floor(m: &CMatrix, rel: f64, floor: f64) -> (usize, Subspace) {
    let cols = m.ncols();
    let svd = full_svd(m);
    let rank = rank_from(&svd.s, rel, m.shape()).min(svd.s.iter().filter(|&&x| x > floor).count());
    let null = svd.v.columns(rank, cols - rank).into_owned();
    (rank, Subspace::from_orthonormal(null))
}

/// Orthonormal basis of the range of `m`.
pub(crate) fn column_space(m: &CMatrix, rel: f64) -> Subspace {
    let rows = m.nrows();
    if m.ncols() == 0 {
        return Subspace::zero(rows);
    }
    let svd = full_svd(m);
    let rank = rank_from(&svd.s, rel, m.shape());
    Subspace::from_orthonormal(svd.u.columns(0, rank).into_owned())
}

/// Numerical rank and the orthogonal complement of the row space.
pub fn rank_and_nullspace(m: &CMatrix, tol: &Tolerance) -> (usize, Subspace) {
    nullspace_rel(m, tol.eps_rank)
}

pub fn rank(m: &CMatrix, rel: f64) -> usize {
    let svd = full_svd(m);
    rank_from(&svd.s, rel, m.shape())
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    full_svd(m).s
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn hermitian_defect(h: &CMatrix) -> f64 {
    (h - h.adjoint()).norm()
}

#[derive(Debug, Clone)]
pub struct EigenSpace {
    pub value: f64,
    pub space: Subspace,
}

fn check_square(m: &CMatrix) -> Result<usize, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Eigen-decomposition of a Hermitian matrix into clustered eigenspaces,
/// eigenvalues ascending.
pub fn eigh(h: &CMatrix, tol: &Tolerance) -> Result<Vec<EigenSpace>, LinalgError> {
    let n = check_square(h)?;
    let scale = h.norm();
    let defect = hermitian_defect(h);
    if defect > tol.eps_residual * scale.max(1.0) {
        return Err(LinalgError::NotHermitian { residual: defect });
    }
    if n == 0 {
        return Ok(vec![]);
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let radius = tol.eps_cluster(scale);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(cl) if eig.eigenvalues[i] - eig.eigenvalues[*cl.last().unwrap()] <= radius => {
                cl.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|cl| {
            let value = cl.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / cl.len() as f64;
            let basis = CMatrix::from_fn(n, cl.len(), |r, k| eig.eigenvectors[(r, cl[k])]);
            EigenSpace {
                value,
                space: Subspace::from_orthonormal(basis),
            }
        })
        .collect())
}

/// Eigenvalues of a square complex matrix from its Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(vec![]);
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

fn cluster_complex(vals: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    // single linkage
    let n = vals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (vals[i] - vals[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        match root_of[root] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[root] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Generalized eigenspace for one eigenvalue cluster.
#[derive(Debug, Clone)]
pub struct GeneralizedEigenspace {
    pub value: Complex64,
    pub space: Subspace,
}

/// Decomposes the ambient space into generalized eigenspaces of `m`, i.e.
/// null spaces of (m − λ)^k for each distinct eigenvalue λ of algebraic
/// multiplicity k. Spaces are sorted by (Re λ, Im λ).
pub fn generalized_eigenspaces(
    m: &CMatrix,
    tol: &Tolerance,
) -> Result<Vec<GeneralizedEigenspace>, LinalgError> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(vec![]);
    }
    let vals = eigenvalues(m)?;
    let scale = m.norm();
    let mut radius = tol.eps_cluster(scale);
    for _ in 0..tol.max_retries {
        if let Some(spaces) = try_generalized(m, &vals, radius, tol) {
            return Ok(spaces);
        }
        radius *= 10.0;
    }
    Err(LinalgError::ClusteringAmbiguous {
        attempts: tol.max_retries,
    })
}

fn try_generalized(
    m: &CMatrix,
    vals: &[Complex64],
    radius: f64,
    tol: &Tolerance,
) -> Option<Vec<GeneralizedEigenspace>> {
    let n = m.nrows();
    let groups = cluster_complex(vals, radius);
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        let k = g.len();
        let lambda = g.iter().map(|&i| vals[i]).sum::<Complex64>() / r(k as f64);
        let shifted = m - CMatrix::identity(n, n) * lambda;
        let mut power = shifted.clone();
        for _ in 1..k {
            power = &power * &shifted;
        }
        let svd = full_svd(&power);
        let space = svd.v.columns(n - k, k).into_owned();
        if k < n {
            let inside = svd.s[n - k];
            let outside = svd.s[n - k - 1];
            if inside > 1e-3 * outside {
                return None;
            }
        }
        out.push(GeneralizedEigenspace {
            value: lambda,
            space: Subspace::from_orthonormal(space),
        });
    }
    // independence of the pieces
    let mut all = CMatrix::zeros(n, n);
    let mut col = 0;
    for g in &out {
        all.columns_mut(col, g.space.dim())
            .copy_from(g.space.basis());
        col += g.space.dim();
    }
    if rank(&all, tol.eps_rank.max(1e-10)) != n {
        return None;
    }
    out.sort_by(|a, b| {
        a.value
            .re
            .partial_cmp(&b.value.re)
            .unwrap()
            .then(a.value.im.partial_cmp(&b.value.im).unwrap())
    });
    Some(out)
}

/// Moore–Penrose inverse with rank decided by `eps_rank`.
pub fn pseudo_inverse(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    pinv_rel(m, tol.eps_rank)
}

pub(crate) fn pinv_rel(m: &CMatrix, rel: f64) -> CMatrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return CMatrix::zeros(cols, rows);
    }
    let svd = full_svd(m);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let cutoff = rel * smax * rows.max(cols) as f64;
    let mut out = CMatrix::zeros(cols, rows);
    for (k, &s) in svd.s.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += (svd.v.column(k) * svd.u.column(k).adjoint()).scale(1.0 / s);
        }
    }
    out
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child seed for stream `index` of a seeded computation.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian (E|z|² = 1).
pub fn complex_gaussian(rng: &mut Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary(n: usize, rng: &mut Rng) -> CMatrix {
    random_isometry(n, n, rng)
}

/// Random isometry (orthonormal columns), rows ≥ cols.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let q = qr.q();
    let rr = qr.r();
    let mut out = q.columns(0, cols).into_owned();
    for j in 0..cols {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = out.column_mut(j);
        col *= phase;
    }
    out
}

/// Random complex-Ginibre combination Σ c_i B_i.
pub fn random_in_span(basis: &[CMatrix], rng: &mut Rng) -> Result<CMatrix, LinalgError> {
    let first = basis.first().ok_or(LinalgError::EmptyBasis)?;
    let mut acc = CMatrix::zeros(first.nrows(), first.ncols());
    for b in basis {
        acc += b * complex_gaussian(rng);
    }
    Ok(acc)
}

/// Σ c_i B_i + (Σ c_i B_i)† with Ginibre coefficients from `seed`.
pub fn random_hermitian_in_span(basis: &[CMatrix], seed: u64) -> Result<CMatrix, LinalgError> {
    let mut rng = rng_from_seed(seed);
    let x = random_in_span(basis, &mut rng)?;
    Ok(&x + x.adjoint())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// f(h) for Hermitian `h` applied through its eigen-decomposition.
pub fn hermitian_map(h: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = h.nrows();
    if n == 0 {
        return h.clone();
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()).scale(f(eig.eigenvalues[k]));
    }
    out
}

pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    if h.nrows() == 0 {
        return vec![];
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn min_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).last().copied().unwrap_or(0.0)
}

/// Matrix square root of a positive semidefinite matrix (negative noise clipped).
pub fn psd_sqrt(h: &CMatrix) -> CMatrix {
    hermitian_map(h, |x| x.max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(h: &CMatrix) -> CMatrix {
    hermitian_map(h, |x| 1.0 / x.sqrt())
}

/// Column-major vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &[Complex64], rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v)
}

/// Hilbert–Schmidt inner product tr(a† b).
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Partial trace over the first factor of a (m·n)×(m·n) matrix on ℂ^m ⊗ ℂ^n.
pub fn partial_trace_first(x: &CMatrix, m: usize, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    for a in 0..m {
        out += x.view((a * n, a * n), (n, n));
    }
    out
}

/// Partial trace over the second factor of a matrix on ℂ^m ⊗ ℂ^n.
pub fn partial_trace_second(x: &CMatrix, m: usize, n: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |a, b| (0..n).map(|i| x[(a * n + i, b * n + i)]).sum())
}

/// Best Frobenius fit of `x` by I_m ⊗ s, returning (s, ‖x − I⊗s‖_F).
pub fn fit_identity_kron(x: &CMatrix, m: usize, n: usize) -> (CMatrix, f64) {
    let s = partial_trace_first(x, m, n).scale(1.0 / m as f64);
    let res = (x - kron(&CMatrix::identity(m, m), &s)).norm();
    (s, res)
}

/// Nearest Kronecker product a ⊗ b (a: m×m, b: n×n) to `x` in Frobenius norm,
/// via the rank-one approximation of the rearranged matrix.
pub fn nearest_kronecker(x: &CMatrix, m: usize, n: usize) -> (CMatrix, CMatrix, f64) {
    // R[(i,j), (k,l)] = x[(i n + k, j n + l)], rows indexed by a's entries.
    let rearranged = CMatrix::from_fn(m * m, n * n, |row, col| {
        let (i, j) = (row / m, row % m);
        let (k, l) = (col / n, col % n);
        x[(i * n + k, j * n + l)]
    });
    let svd = full_svd(&rearranged);
    let s0 = svd.s.first().copied().unwrap_or(0.0);
    let u0 = svd.u.column(0);
    let v0 = svd.v.column(0);
    let a = CMatrix::from_fn(m, m, |i, j| u0[i * m + j] * s0.sqrt());
    let b = CMatrix::from_fn(n, n, |k, l| v0[k * n + l].conj() * s0.sqrt());
    let res = (x - kron(&a, &b)).norm();
    (a, b, res)
}

pub fn hcat(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(*b);
        at += b.ncols();
    }
    out
}

pub fn vcat(blocks: &[&CMatrix]) -> CMatrix {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.rows_mut(at, b.nrows()).copy_from(*b);
        at += b.nrows();
    }
    out
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Matrix unit |i⟩⟨j| of size n.
pub fn unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `op` acting on qubit `k` (0-based, most significant first) of `n` qubits.
pub fn on_qubit(op: &CMatrix, k: usize, n: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for q in 0..n {
        let f = if q == k {
            op.clone()
        } else {
            CMatrix::identity(2, 2)
        };
        out = kron(&out, &f);
    }
    out
}

pub fn basis_vector(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = ONE;
    v
}
