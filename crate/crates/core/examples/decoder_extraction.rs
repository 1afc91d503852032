//! Reading off the protected subsystem from an encoder and a decoder.
//!
//! If a decoder D maps every corrupted codeword E_j C |ψ⟩ to |ψ⟩ ⊗ |φ_j⟩,
//! the encoders, errors and decoder together define a subsystem encoding
//! in which each error acts on the encoded states as I ⊗ |φ_j⟩. A decoder that mixes up even one
//! syndrome is rejected with the offending error index.

use subsys::instances::repetition3;
use subsys::linalg::{r, CMatrix, Tolerance, ZERO};
use subsys::protectable::{extract_subsystem_from_decoder, ProtectError};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerance::default();
    let rc = repetition3();
    // The syndrome-measuring decoder is the inverse of the logical ⊗ syndrome embedding.
    let decoder = rc.logical_syndrome.embed().adjoint();

    let out = extract_subsystem_from_decoder(
        std::slice::from_ref(&rc.encoder),
        &rc.errors,
        &decoder,
        &tol,
    )?;
    println!(
        "extracted N = {}, cosubsystem dim = {}",
        out.encoding.n(),
        out.encoding.s_dim()
    );
    for (j, name) in rc.errors.names().iter().enumerate() {
        let phi = &out.phi[0][j];
        let peak = phi
            .iter()
            .map(|z| z.norm())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        println!(
            "  {name:>2}: φ concentrated on cosubsystem basis vector {} (weight {:.3})",
            peak.0, peak.1
        );
    }
    // Each corrupted codeword is the logical state tensored with φ_j.
    let (n, s) = (out.encoding.n(), out.encoding.s_dim());
    let worst = rc
        .errors
        .operators()
        .iter()
        .zip(&out.phi[0])
        .map(|(e, phi)| {
            let tensor = CMatrix::from_fn(
                n * s,
                n,
                |row, a| if row / s == a { phi[row % s] } else { ZERO },
            );
            (e * &rc.encoder - out.encoding.embed() * tensor).norm()
        })
        .fold(0.0, f64::max);
    println!("max ‖E_j C − embed(I ⊗ φ_j)‖ = {worst:.1e}");

    // Flip the sign of one decoded row: X₁ now dephases the logical qubit.
    let mut faulty = decoder.clone();
    let row = faulty.row(5) * r(-1.0);
    faulty.set_row(5, &row);
    match extract_subsystem_from_decoder(&[rc.encoder], &rc.errors, &faulty, &tol) {
        Err(ProtectError::NotPreserving {
            error, deviation, ..
        }) => {
            println!(
                "faulty decoder rejected at error {} (deviation {deviation:.3})",
                rc.errors.names()[error]
            )
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
