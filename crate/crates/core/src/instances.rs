//! Generators for standard and planted instances.
//!
//! Planted instances carry their ground truth so tests and the `gen`
//! command can check recovered structure against the construction.

use num_complex::Complex64;

use crate::algebra::OperatorSet;
use crate::linalg::{
    basis_vector, direct_sum, ginibre, haar_unitary, kron, on_qubit, pauli_x, pauli_y, pauli_z,
    pd_inv_sqrt, r, random_isometry, rng_from_seed, CMatrix, Rng, Subspace, Tolerance,
};
use crate::noiseless::SubsystemEncoding;

/// Total spin components S_a = ½ Σ_k σ_a^(k) on `n` qubits, plus the identity.
pub fn collective(n: usize) -> OperatorSet {
    let d = 1usize << n;
    let total =
        |p: CMatrix| (0..n).fold(CMatrix::zeros(d, d), |acc, k| acc + on_qubit(&p, k, n)) * r(0.5);
    OperatorSet::new(
        d,
        vec![
            ("Sx".into(), total(pauli_x())),
            ("Sy".into(), total(pauli_y())),
            ("Sz".into(), total(pauli_z())),
            ("I".into(), CMatrix::identity(d, d)),
        ],
    )
    .expect("collective operators share one dimension")
}

/// The 3-qubit bit-flip code in its two standard encodings.
#[derive(Debug, Clone)]
pub struct RepetitionCode {
    /// I, X₁, X₂, X₃.
    pub errors: OperatorSet,
    /// Logical qubit ⊗ 4-dim syndrome space; column a·4 + s is X_s|aaa⟩ (X_0 = I).
    pub logical_syndrome: SubsystemEncoding,
    /// span{|000⟩, |111⟩} with a trivial cosubsystem.
    pub code: SubsystemEncoding,
    pub code_space: Subspace,
    /// 8 × 2 isometry |a⟩ ↦ |aaa⟩.
    pub encoder: CMatrix,
}

pub fn repetition3() -> RepetitionCode {
    let tol = Tolerance::default();
    let flips: Vec<CMatrix> = (0..3).map(|k| on_qubit(&pauli_x(), k, 3)).collect();
    let mut named = vec![("I".to_string(), CMatrix::identity(8, 8))];
    named.extend(
        flips
            .iter()
            .enumerate()
            .map(|(k, x)| (format!("X{}", k + 1), x.clone())),
    );
    let errors = OperatorSet::new(8, named).expect("8-dim operators");

    let encoder = CMatrix::from_columns(&[basis_vector(8, 0), basis_vector(8, 7)]);
    let mut embed = CMatrix::zeros(8, 8);
    for a in 0..2 {
        let logical = encoder.column(a).into_owned();
        for s in 0..4 {
            let col = if s == 0 {
                logical.clone()
            } else {
                &flips[s - 1] * &logical
            };
            embed.set_column(a * 4 + s, &col);
        }
    }
    let logical_syndrome = SubsystemEncoding::new(2, 4, embed, &tol).expect("permutation matrix");
    let code = SubsystemEncoding::subspace(encoder.clone(), &tol).expect("orthonormal code");
    RepetitionCode {
        errors,
        logical_syndrome,
        code_space: Subspace::from_orthonormal(encoder.clone()),
        code,
        encoder,
    }
}

/// Shor's 9-qubit code (trivial cosubsystem) with the single bit-flip errors
/// {I, X₁, …, X₉}.
pub fn shor9_bitflip_sample() -> (OperatorSet, SubsystemEncoding) {
    let n = 9;
    let d = 1usize << n;
    let mut named = vec![("I".to_string(), CMatrix::identity(d, d))];
    for k in 0..n {
        named.push((format!("X{}", k + 1), on_qubit(&pauli_x(), k, n)));
    }
    let errors = OperatorSet::new(d, named).expect("512-dim operators");

    // |0_L⟩ ∝ (|000⟩+|111⟩)^⊗3, |1_L⟩ ∝ (|000⟩−|111⟩)^⊗3
    let block = |sign: f64| {
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[0] = r(1.0 / 2f64.sqrt());
        v[7] = r(sign / 2f64.sqrt());
        CMatrix::from_column_slice(8, 1, &v)
    };
    let logical = |sign: f64| {
        let b = block(sign);
        kron(&kron(&b, &b), &b)
    };
    let basis = crate::linalg::hcat(&[&logical(1.0), &logical(-1.0)]);
    let enc = SubsystemEncoding::subspace(basis, &Tolerance::default()).expect("orthonormal code");
    (errors, enc)
}

/// Noiseless plant: E_i = W(⊕_k I_{m_k} ⊗ B_{k,i})W† with Haar W.
#[derive(Debug, Clone)]
pub struct PlantedNoiseless {
    pub errors: OperatorSet,
    pub mults: Vec<usize>,
    pub irreps: Vec<usize>,
    pub w: CMatrix,
}

impl PlantedNoiseless {
    /// (mult, irrep) pairs sorted like the decomposition: mult descending, irrep ascending.
    pub fn profile(&self) -> Vec<(usize, usize)> {
        let mut p: Vec<(usize, usize)> = self
            .mults
            .iter()
            .copied()
            .zip(self.irreps.iter().copied())
            .collect();
        p.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        p
    }

    pub fn dim(&self) -> usize {
        self.errors.dim()
    }
}

/// Two random generators per block; they generate the full matrix algebra
/// on each irrep with probability one. Blocks must be pairwise
/// inequivalent, which independent Gaussian draws guarantee generically.
pub fn planted_noiseless(
    seed: u64,
    mults: &[usize],
    irreps: &[usize],
    n_ops: usize,
) -> PlantedNoiseless {
    assert_eq!(
        mults.len(),
        irreps.len(),
        "one irrep dimension per multiplicity"
    );
    let mut rng = rng_from_seed(seed);
    let d: usize = mults.iter().zip(irreps).map(|(m, n)| m * n).sum();
    let w = haar_unitary(d, &mut rng);
    let ops: Vec<(String, CMatrix)> = (0..n_ops.max(2))
        .map(|i| {
            let blocks: Vec<CMatrix> = mults
                .iter()
                .zip(irreps)
                .map(|(&m, &n)| kron(&CMatrix::identity(m, m), &ginibre(n, n, &mut rng)))
                .collect();
            (format!("E{i}"), &w * direct_sum(&blocks) * w.adjoint())
        })
        .collect();
    PlantedNoiseless {
        errors: OperatorSet::new(d, ops).expect("planted operators share one dimension"),
        mults: mults.to_vec(),
        irreps: irreps.to_vec(),
        w,
    }
}

/// Kraus operators C_i of a random channel on ℂ^n: Σ C†C = I.
pub fn random_channel(n: usize, count: usize, rng: &mut Rng) -> Vec<CMatrix> {
    let raw: Vec<CMatrix> = (0..count).map(|_| ginibre(n, n, rng)).collect();
    let s = raw
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, c| acc + c.adjoint() * c);
    let norm = pd_inv_sqrt(&s);
    raw.into_iter().map(|c| c * &norm).collect()
}

/// CPTP errors E_i = Y(I_m ⊗ C_i)Y† together with the non-unitary
/// factorization T = Y(P ⊗ Q), for which E_i = T(I ⊗ B_i)T⁻¹ with
/// B_i = Q⁻¹C_iQ.
#[derive(Debug, Clone)]
pub struct PlantedSimilarity {
    pub errors: OperatorSet,
    pub factorization: CMatrix,
    pub mult: usize,
    pub irrep: usize,
}

pub fn planted_similarity(seed: u64, mult: usize, irrep: usize) -> PlantedSimilarity {
    let mut rng = rng_from_seed(seed);
    let d = mult * irrep;
    let y = haar_unitary(d, &mut rng);
    let cs = random_channel(irrep, 3, &mut rng);
    let well_conditioned =
        |k: usize, rng: &mut Rng| ginibre(k, k, rng) * r(0.3) + CMatrix::identity(k, k);
    let p = well_conditioned(mult, &mut rng);
    let q = well_conditioned(irrep, &mut rng);
    let id = CMatrix::identity(mult, mult);
    let ops = cs
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("K{i}"), &y * kron(&id, c) * y.adjoint()))
        .collect();
    PlantedSimilarity {
        errors: OperatorSet::new(d, ops).expect("planted operators share one dimension"),
        factorization: &y * kron(&p, &q),
        mult,
        irrep,
    }
}

/// Protectable plant around a known code 𝒟₀:
/// E_i = embed[(I ⊗ α_i)D₀† + Z_iW†] + (I − Π)J_i(I − D₀D₀† − WW†),
/// so F_ij restricted to 𝒟₀ is α_ij times the identity.
#[derive(Debug, Clone)]
pub struct PlantedProtectable {
    pub errors: OperatorSet,
    pub encoding: SubsystemEncoding,
    pub code: CMatrix,
    /// α_ij at (i, j).
    pub alphas: CMatrix,
}

pub fn planted_protectable(
    seed: u64,
    d: usize,
    n: usize,
    s: usize,
    extra: usize,
    n_errors: usize,
) -> PlantedProtectable {
    assert!(n * s <= d && n + extra <= d, "plant does not fit in ℂ^{d}");
    let tol = Tolerance::default();
    let mut rng = rng_from_seed(seed);
    let embed = random_isometry(d, n * s, &mut rng);
    let frame = random_isometry(d, n + extra, &mut rng);
    let code = frame.columns(0, n).into_owned();
    let w = frame.columns(n, extra).into_owned();
    let outside = CMatrix::identity(d, d) - &embed * embed.adjoint();
    let rest = CMatrix::identity(d, d) - &frame * frame.adjoint();
    let alphas = ginibre(n_errors, s, &mut rng);
    let ops = (0..n_errors)
        .map(|i| {
            let lift = CMatrix::from_fn(n * s, n, |row, col| {
                let (a, j) = (row / s, row % s);
                if a == col {
                    alphas[(i, j)]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let z = ginibre(n * s, extra, &mut rng);
            let junk = ginibre(d, d, &mut rng);
            let e = &embed * (lift * code.adjoint() + z * w.adjoint()) + &outside * junk * &rest;
            (format!("E{i}"), e)
        })
        .collect();
    PlantedProtectable {
        errors: OperatorSet::new(d, ops).expect("planted operators share one dimension"),
        encoding: SubsystemEncoding::new(n, s, embed, &tol).expect("random isometry"),
        code,
        alphas,
    }
}

/// Instances for which no protecting code exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasibleKind {
    /// Generic errors leave 𝒱 smaller than N.
    SmallPreimage,
    /// 𝒱 is 3-dimensional and the two maps [A|0], [B|C] force α = 0.
    ForcedZero,
}

pub fn planted_infeasible(seed: u64, kind: InfeasibleKind) -> (OperatorSet, SubsystemEncoding) {
    let tol = Tolerance::default();
    let mut rng = rng_from_seed(seed);
    match kind {
        InfeasibleKind::SmallPreimage => {
            let d = 6;
            let embed = random_isometry(d, 2, &mut rng);
            let ops = (0..3).map(|_| ginibre(d, d, &mut rng)).collect();
            (
                OperatorSet::from_matrices(ops).expect("square operators"),
                SubsystemEncoding::subspace(embed, &tol).expect("random isometry"),
            )
        }
        InfeasibleKind::ForcedZero => {
            let d = 7;
            let frame = random_isometry(d, 5, &mut rng);
            let embed = frame.columns(0, 2).into_owned();
            let w = frame.columns(2, 3).into_owned();
            let outside = CMatrix::identity(d, d) - &embed * embed.adjoint();
            let rest = CMatrix::identity(d, d) - &w * w.adjoint();
            let a = ginibre(2, 2, &mut rng);
            let b = ginibre(2, 2, &mut rng);
            let c = ginibre(2, 1, &mut rng);
            let mut g1 = CMatrix::zeros(2, 3);
            g1.view_mut((0, 0), (2, 2)).copy_from(&a);
            let mut g2 = CMatrix::zeros(2, 3);
            g2.view_mut((0, 0), (2, 2)).copy_from(&b);
            g2.view_mut((0, 2), (2, 1)).copy_from(&c);
            let ops = [g1, g2]
                .iter()
                .map(|g| &embed * g * w.adjoint() + &outside * ginibre(d, d, &mut rng) * &rest)
                .collect();
            (
                OperatorSet::from_matrices(ops).expect("square operators"),
                SubsystemEncoding::subspace(embed, &tol).expect("orthonormal frame"),
            )
        }
    }
}

/// Errors that only ever write into a 2-dim code: E_i = [G_i; 0] on ℂ⁴ with
/// generic 2×4 blocks G_i. No code exists but nothing prunes it, so the
/// search exhausts its budget.
pub fn budget_exhausting(seed: u64) -> (OperatorSet, SubsystemEncoding) {
    let mut rng = rng_from_seed(seed);
    let ops = (0..2)
        .map(|_| {
            let mut e = CMatrix::zeros(4, 4);
            e.view_mut((0, 0), (2, 4))
                .copy_from(&ginibre(2, 4, &mut rng));
            e
        })
        .collect();
    (
        OperatorSet::from_matrices(ops).expect("square operators"),
        SubsystemEncoding::subspace(CMatrix::identity(4, 2), &Tolerance::default())
            .expect("coordinate code"),
    )
}

/// Block-upper-triangular algebra generators whose radical has dimension q.
///
/// The algebra is {[a·I_k, X; 0, b·I_k]} restricted to X in a q-dimensional
/// space of k × k matrices. The generators are E₀₀ = I ⊕ 0, E₁₁ = 0 ⊕ I and
/// the q nilpotent blocks.
pub fn planted_radical(seed: u64, k: usize, q: usize) -> (OperatorSet, usize) {
    assert!(
        q <= k * k,
        "radical dimension exceeds the off-diagonal block"
    );
    let mut rng = rng_from_seed(seed);
    let d = 2 * k;
    let mut named = Vec::with_capacity(q + 2);
    let mut upper = CMatrix::zeros(d, d);
    upper.view_mut((0, 0), (k, k)).fill_with_identity();
    let mut lower = CMatrix::zeros(d, d);
    lower.view_mut((k, k), (k, k)).fill_with_identity();
    named.push(("P0".to_string(), upper));
    named.push(("P1".to_string(), lower));
    let frame = random_isometry(k * k, q, &mut rng);
    for b in 0..q {
        let x = crate::linalg::unvectorize(frame.column(b).into_owned().as_slice(), k, k);
        let mut n = CMatrix::zeros(d, d);
        n.view_mut((0, k), (k, k)).copy_from(&x);
        named.push((format!("N{b}"), n));
    }
    (
        OperatorSet::new(d, named).expect("planted operators share one dimension"),
        q,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noiseless::verify_noiseless;

    #[test]
    fn collective_spin_algebra() {
        let ops = collective(2);
        let o = ops.operators();
        let (sx, sy, sz) = (&o[0], &o[1], &o[2]);
        let comm = sx * sy - sy * sx;
        assert!((comm - sz * Complex64::new(0.0, 1.0)).norm() < 1e-12);
        // Casimir S² has eigenvalues s(s+1) ∈ {0, 2}
        let casimir = sx * sx + sy * sy + sz * sz;
        let eig = crate::linalg::hermitian_eigenvalues(&casimir);
        assert!(eig
            .iter()
            .all(|&l| l.abs() < 1e-12 || (l - 2.0).abs() < 1e-12));
    }

    #[test]
    fn repetition_encodings() {
        let rc = repetition3();
        let id = OperatorSet::from_matrices(vec![CMatrix::identity(8, 8)]).unwrap();
        assert!(verify_noiseless(&rc.logical_syndrome, &id, &Tolerance::default()).passed);
        assert_eq!(rc.errors.len(), 4);
        // X₂ sends column 0·4+0 = |000⟩ to column 0·4+2
        let img = &rc.errors.operators()[2] * rc.logical_syndrome.embed().column(0);
        assert!((img - rc.logical_syndrome.embed().column(2)).norm() < 1e-15);
    }

    #[test]
    fn planted_protectable_code_has_proportional_maps() {
        let p = planted_protectable(3, 8, 2, 2, 2, 3);
        let s = p.encoding.s_dim();
        for (i, e) in p.errors.operators().iter().enumerate() {
            let coords = p.encoding.embed().adjoint() * e * &p.code;
            for j in 0..s {
                let f = CMatrix::from_fn(2, 2, |a, b| coords[(a * s + j, b)]);
                assert!((f - CMatrix::identity(2, 2) * p.alphas[(i, j)]).norm() < 1e-10);
            }
            let leak = (CMatrix::identity(8, 8) - p.encoding.projector()) * e * &p.code;
            assert!(leak.norm() < 1e-10);
        }
    }

    #[test]
    fn similarity_plant_conjugates_channel() {
        let p = planted_similarity(4, 2, 2);
        let t = &p.factorization;
        let tinv = t.clone().try_inverse().unwrap();
        for e in p.errors.operators() {
            let local = &tinv * e * t;
            let (_, res) = crate::linalg::fit_identity_kron(&local, 2, 2);
            assert!(res < 1e-10);
        }
        let gram = p.errors.gram_sum();
        assert!((gram - CMatrix::identity(4, 4)).norm() < 1e-10);
    }
}
