//! Deciding whether a subsystem can be protected against a set of errors.
//!
//! The 3-qubit bit-flip code written as logical qubit ⊗ syndrome space is
//! protectable against {I, X₁, X₂, X₃}. The check returns a certificate: a
//! code, the coefficients α, and a recovery whose residuals are re-verified
//! from scratch. The same errors with a phase flip added cannot be corrected
//! by any code inside the preimage, and the verdict says why.

use subsys::algebra::OperatorSet;
use subsys::instances::repetition3;
use subsys::linalg::{on_qubit, pauli_z, CMatrix, Tolerance};
use subsys::protectable::{check_protectable, ProtectOptions, Verdict};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerance::default();
    let rc = repetition3();
    let opts = ProtectOptions::default();

    let report = check_protectable(&rc.logical_syndrome, &rc.errors, &opts)?;
    println!(
        "bit flips: {}  (dim 𝒱 {}, route {:?})",
        report.verdict.label(),
        report.preimage_dim,
        report.route
    );
    if let Verdict::Protectable(cert) = &report.verdict {
        let r = cert.verify(&rc.logical_syndrome, &rc.errors, &tol);
        println!(
            "  code dim {}  distance to span{{|000⟩,|111⟩}} {:.1e}",
            cert.code.dim(),
            cert.code.distance(&rc.code_space)
        );
        println!("  |α_ij| (encoder i, error j):");
        for row in cert.alphas.row_iter() {
            println!(
                "    {}",
                row.iter()
                    .map(|z| format!("{:.3}", z.norm()))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
        }
        println!(
            "  residuals: proportionality {:.1e}  isometry {:.1e}  recovery {:.1e}  noiseless {:.1e}",
            r.proportionality, r.isometry, r.recovery_excess, r.noiseless
        );
        println!("  recovery operators: {:?}", cert.recovery.names());
    }

    let mut named: Vec<(String, CMatrix)> = rc
        .errors
        .iter()
        .map(|(n, m)| (n.to_string(), m.clone()))
        .collect();
    named.push(("Z1".into(), on_qubit(&pauli_z(), 0, 3)));
    let with_phase = OperatorSet::new(8, named)?;
    let report = check_protectable(&rc.logical_syndrome, &with_phase, &opts)?;
    match &report.verdict {
        Verdict::NotProtectable(reason) => println!("bit flips + Z1: NOT_PROTECTABLE ({reason})"),
        other => println!("bit flips + Z1: {}", other.label()),
    }
    Ok(())
}
