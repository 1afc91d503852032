//! Turning a similarity-twisted factorization into a unitary one.
//!
//! When the errors act on a component as Y (A ⊗ I) Y⁻¹ with Y not unitary,
//! the encoded information is still noiseless but the recovery is not a
//! plain partial trace. The fixed point ρ of the associated channel supplies
//! the correcting change of basis: the returned factorization is unitary and
//! ρ is a full-rank stationary state.

use subsys::instances::planted_similarity;
use subsys::linalg::{min_eigenvalue, CMatrix, Subspace, Tolerance};
use subsys::noiseless::{channel_fixed_point, fixed_point_residual, unitarize, IsotypicComponent};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerance::default();
    let plant = planted_similarity(11, 2, 3);
    let k = plant.mult * plant.irrep;
    let t = plant.factorization.clone();
    println!(
        "input factorization ‖T†T − I‖ = {:.3}",
        (t.adjoint() * &t - CMatrix::identity(k, k)).norm()
    );

    let comp = IsotypicComponent {
        index: 0,
        space: Subspace::full(k),
        mult_dim: plant.mult,
        irrep_dim: plant.irrep,
        factorization: Some(t),
        unitary: false,
    };
    let (pair, fixed) = unitarize(&comp, &plant.errors, &tol)?;
    let u = fixed
        .factorization
        .as_ref()
        .expect("unitarize sets the factorization");
    println!(
        "output factorization ‖U†U − I‖ = {:.1e}",
        (u.adjoint() * u - CMatrix::identity(k, k)).norm()
    );

    // The errors restricted to the component define a channel whose fixed point is ρ′ ⊗ ρ.
    let images: Vec<CMatrix> = plant
        .errors
        .operators()
        .iter()
        .map(|e| comp.represent(e).map(|(m, _)| m))
        .collect::<Result<_, _>>()?;
    let rho = channel_fixed_point(&images, &tol)?;
    println!(
        "fixed point: residual {:.1e}, distance to U†U {:.1e}, min eigenvalue {:.3}",
        fixed_point_residual(&images, &rho),
        (&rho - &pair.rho).norm(),
        min_eigenvalue(&rho)
    );
    Ok(())
}
