//! Operator error-correction conditions for a given code.
//!
//! For a code with projector Π the errors are correctable iff every
//! Π E_i† E_j Π factors as I ⊗ g_ij on the code. The check prints the
//! largest fit residual; the 9-qubit example is the slowest (d = 512).
//!
//! Pass `--shor` to include the 9-qubit code.

use subsys::algebra::OperatorSet;
use subsys::instances::{repetition3, shor9_bitflip_sample};
use subsys::linalg::{on_qubit, pauli_z, CMatrix, Tolerance};
use subsys::protectable::verify_error_correcting;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerance::default();
    let rc = repetition3();

    let check = verify_error_correcting(&rc.code, &rc.errors, &tol);
    println!(
        "repetition code, bit flips: passed {} residual {:.1e}",
        check.passed, check.residual
    );

    let phase = OperatorSet::new(
        8,
        vec![
            ("I".into(), CMatrix::identity(8, 8)),
            ("Z1".into(), on_qubit(&pauli_z(), 0, 3)),
        ],
    )?;
    let check = verify_error_correcting(&rc.code, &phase, &tol);
    println!(
        "repetition code, {{I, Z1}}: passed {} residual {:.3}",
        check.passed, check.residual
    );

    // Taking all of ℂ⁸ as logical ⊗ syndrome fails: X₁X₂|000⟩ = X₃|111⟩
    // flips the logical factor. Only the protected code inside it passes.
    let check = verify_error_correcting(&rc.logical_syndrome, &rc.errors, &tol);
    println!(
        "logical ⊗ syndrome on all of ℂ⁸, bit flips: passed {} residual {:.1}",
        check.passed, check.residual
    );

    if std::env::args().any(|a| a == "--shor") {
        let (errs, code) = shor9_bitflip_sample();
        let check = verify_error_correcting(&code, &errs, &tol);
        println!(
            "9-qubit code, single bit flips: passed {} residual {:.1e}",
            check.passed, check.residual
        );
    }
    Ok(())
}
