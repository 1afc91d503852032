//! The two search problems behind protectability, and the maps between them.
//!
//! Projection form: find ψ with ⟨ψ|_B ρ_AB |ψ⟩_B ∝ I_A.
//! Orthonormal-columns form: find α with Σ α_j M_j having orthonormal
//! columns up to scale.
//!
//! A family of maps with a planted common code is reduced to projection
//! form, purified into the columns form, solved there, and the solution is
//! mapped back and lifted to a code.

use num_complex::Complex64;
use subsys::linalg::{
    complex_gaussian, ginibre, random_isometry, rng_from_seed, CMatrix, CVector, Subspace,
    Tolerance,
};
use subsys::protectable::{
    ortho_to_projection, projection_to_ortho, reduce_to_projection, solve_ortho, FMapFamily,
    OrthoColumnInstance, SolveOutcome, SolverBudget,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerance::default();
    let mut rng = rng_from_seed(2024);
    let (n, m) = (2, 4);

    // Each map acts as a multiple of the identity on the planted code and
    // arbitrarily on its complement.
    let code = random_isometry(m, n, &mut rng);
    let perp = Subspace::from_orthonormal(code.clone()).complement();
    let maps: Vec<CMatrix> = (0..3)
        .map(|_| {
            code.adjoint() * complex_gaussian(&mut rng)
                + ginibre(n, m - n, &mut rng) * perp.basis().adjoint()
        })
        .collect();
    let fam = FMapFamily::from_maps(n, 1, maps)?;

    let proj = reduce_to_projection(&fam, &tol)?;
    println!(
        "projection form: dim A = {}, dim B = {}",
        proj.dim_a, proj.dim_b
    );
    let ortho = projection_to_ortho(&proj, SolverBudget::default())?;
    println!(
        "columns form: {} matrices of shape {}×{}",
        ortho.matrices().len(),
        ortho.rows(),
        ortho.cols()
    );

    match solve_ortho(&ortho, 1) {
        SolveOutcome::Found {
            alpha,
            objective,
            restart,
        } => {
            println!("solved on restart {restart}, objective {objective:.1e}");
            // α and ψ are complex conjugates of each other.
            let psi = alpha.map(|z| z.conj());
            println!(
                "projection residual at ψ = conj(α): {:.1e}",
                proj.residual(&psi)
            );
            let x = proj.lift_code(&psi).expect("non-empty lift");
            let g = x.adjoint() * &x;
            let p = g.trace() / Complex64::new(n as f64, 0.0);
            println!(
                "X†X ∝ I defect {:.1e}",
                (g.map(|z| z / p) - CMatrix::identity(n, n)).norm()
            );
            let found = Subspace::span_of(&x, 1e-10);
            println!(
                "lifted code: dimension {}, distance to the planted code {:.1e}",
                found.dim(),
                found.distance(&Subspace::from_orthonormal(code))
            );
        }
        SolveOutcome::NotFoundWithinBudget {
            best_objective,
            restarts,
        } => {
            println!("no solution within {restarts} restarts (best {best_objective:.1e})");
        }
    }

    // The other direction: columns form with a planted isometry in slot 0.
    let q = random_isometry(4, 2, &mut rng);
    let planted = OrthoColumnInstance::new(
        vec![q, ginibre(4, 2, &mut rng), ginibre(4, 2, &mut rng)],
        SolverBudget::default(),
    )?;
    let back = ortho_to_projection(&planted);
    let mut psi = CVector::zeros(3);
    psi[0] = Complex64::new(1.0, 0.0);
    println!(
        "columns → projection: residual of the planted ψ = e₀ is {:.1e}",
        back.residual(&psi)
    );
    Ok(())
}
