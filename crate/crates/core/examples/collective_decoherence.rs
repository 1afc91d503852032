//! Noiseless subsystems of n qubits under collective decoherence.
//!
//! The errors are the total spin operators S_x, S_y, S_z. Their algebra
//! splits ℂ^{2^n} into spin sectors; a sector with spin j and multiplicity m
//! carries an m-dimensional noiseless subsystem next to a (2j+1)-dimensional
//! cosubsystem that absorbs the noise.
//!
//! Run with `cargo run --example collective_decoherence -- 4`.

use subsys::instances::collective;
use subsys::noiseless::{find_noiseless, verify_noiseless, NoiselessOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(3);
    let errs = collective(n);
    let opts = NoiselessOptions::default();
    let report = find_noiseless(&errs, &opts)?;

    println!(
        "{n} qubits, d = {}, algebra dim {}, radical dim {}",
        errs.dim(),
        report.algebra_dim,
        report.radical_dim
    );
    println!("  mult  irrep  unitary");
    for c in &report.decomposition.components {
        println!("  {:>4}  {:>5}  {}", c.mult_dim, c.irrep_dim, c.unitary);
    }
    println!(
        "pieces sum to {} (orthogonality defect {:.1e})",
        report.decomposition.total_dim(),
        report.decomposition.orthogonality_defect()
    );

    for e in &report.encodings {
        // Re-check each encoding against the raw error operators.
        let check = verify_noiseless(&e.encoding, &errs, &opts.tol);
        println!(
            "N = {} ⊗ s = {}  verified {}  residual {:.1e}",
            e.encoding.n(),
            e.encoding.s_dim(),
            check.passed,
            check.residual
        );
    }
    println!("largest noiseless subsystem: N = {}", report.max_n());
    Ok(())
}
