//! The three verdicts of the protectability search on planted instances.
//!
//! PROTECTABLE comes with a certificate that is checked independently.
//! NOT_PROTECTABLE comes with a reason that is a proof (the preimage is
//! too small, or the linear constraints force α = 0). UNDECIDED only means
//! the local search ran out of restarts; it never claims infeasibility.

use subsys::instances::{
    budget_exhausting, planted_infeasible, planted_protectable, InfeasibleKind,
};
use subsys::linalg::{Subspace, Tolerance};
use subsys::protectable::{check_protectable, ProtectOptions, SolverBudget, Verdict};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerance::default();
    let opts = ProtectOptions::default();

    for seed in 0..5 {
        let plant = planted_protectable(seed, 6, 2, 2, 2, 3);
        let report = check_protectable(&plant.encoding, &plant.errors, &opts)?;
        let detail = match &report.verdict {
            Verdict::Protectable(cert) => format!(
                "certificate residual {:.1e}, distance to planted code {:.1e}",
                cert.verify(&plant.encoding, &plant.errors, &tol).max(),
                cert.code.distance(&Subspace::span_of(&plant.code, 1e-10))
            ),
            other => other.label().to_string(),
        };
        println!("planted seed {seed}: {} ({detail})", report.verdict.label());
    }

    for kind in [InfeasibleKind::SmallPreimage, InfeasibleKind::ForcedZero] {
        let (errs, enc) = planted_infeasible(1, kind);
        let report = check_protectable(&enc, &errs, &opts)?;
        match &report.verdict {
            Verdict::NotProtectable(reason) => println!("{kind:?}: NOT_PROTECTABLE, {reason}"),
            other => println!("{kind:?}: {}", other.label()),
        }
    }

    let (errs, enc) = budget_exhausting(3);
    let tight = ProtectOptions {
        budget: SolverBudget {
            restarts: 1,
            iterations: 50,
        },
        ..opts
    };
    let report = check_protectable(&enc, &errs, &tight)?;
    if let Verdict::Undecided {
        best_objective,
        restarts,
    } = report.verdict
    {
        println!("generic instance, 1 restart: UNDECIDED after {restarts} restart(s), best objective {best_objective:.2e}");
    } else {
        println!("generic instance, 1 restart: {}", report.verdict.label());
    }
    Ok(())
}
