//! Serializable reports for the command-line driver.
//!
//! Reports hold no timestamps or host data: re-running a command with the
//! recorded seed and tolerances reproduces the report byte for byte.

use std::fmt::Write as _;

use serde::Serialize;

use crate::algebra::OperatorSet;
use crate::io::{matrix_to_json, MatrixJson, NamedMatrix};
use crate::linalg::Tolerance;
use crate::noiseless::{NoiselessReport, Provenance};
use crate::protectable::{
    CertificateResiduals, CorrectionCheck, NotProtectableReason, ProtectReport, PruneRule,
    SearchRoute, SolverBudget, Verdict,
};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunInfo {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub eps_rank: f64,
    pub eps_residual: f64,
    pub max_retries: usize,
}

impl RunInfo {
    pub fn new(command: &str, seed: Option<u64>, tol: &Tolerance) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            seed,
            eps_rank: tol.eps_rank,
            eps_residual: tol.eps_residual,
            max_retries: tol.max_retries,
        }
    }

    fn header(&self, out: &mut String) {
        let _ = write!(out, "{} {} {}", self.tool, self.version, self.command);
        if let Some(seed) = self.seed {
            let _ = write!(out, "  seed={seed}");
        }
        let _ = writeln!(
            out,
            "  eps_rank={:e} eps_residual={:e}",
            self.eps_rank, self.eps_residual
        );
    }
}

fn named(set: &OperatorSet) -> Vec<NamedMatrix> {
    set.iter()
        .map(|(name, m)| NamedMatrix {
            name: name.to_string(),
            matrix: matrix_to_json(m),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentRow {
    pub index: usize,
    pub mult_dim: usize,
    pub irrep_dim: usize,
    pub dim: usize,
    pub unitary: bool,
    pub factorized: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodingRow {
    pub rank: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub s_dim: usize,
    pub component: Option<usize>,
    pub provenance: Provenance,
    pub residual: f64,
    pub caveat: Option<&'static str>,
    pub embed: MatrixJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiselessOutput {
    pub run: RunInfo,
    pub dim: usize,
    pub algebra_dim: usize,
    pub radical_dim: usize,
    pub dagger_closed: bool,
    pub generators_cptp: bool,
    pub components: Vec<ComponentRow>,
    pub zero_space_dim: usize,
    pub remainder_dim: usize,
    pub max_n: usize,
    pub encodings: Vec<EncodingRow>,
}

impl NoiselessOutput {
    pub fn new(run: RunInfo, dim: usize, report: &NoiselessReport) -> Self {
        let d = &report.decomposition;
        Self {
            run,
            dim,
            algebra_dim: report.algebra_dim,
            radical_dim: report.radical_dim,
            dagger_closed: report.dagger_closed,
            generators_cptp: report.generators_cptp,
            components: d
                .components
                .iter()
                .map(|c| ComponentRow {
                    index: c.index,
                    mult_dim: c.mult_dim,
                    irrep_dim: c.irrep_dim,
                    dim: c.space.dim(),
                    unitary: c.unitary,
                    factorized: c.factorization.is_some(),
                })
                .collect(),
            zero_space_dim: d.zero_space.dim(),
            remainder_dim: d.remainder.dim(),
            max_n: report.max_n(),
            encodings: report
                .encodings
                .iter()
                .enumerate()
                .map(|(rank, e)| EncodingRow {
                    rank,
                    n: e.encoding.n(),
                    s_dim: e.encoding.s_dim(),
                    component: e.component,
                    provenance: e.provenance,
                    residual: e.residual,
                    caveat: e.caveat,
                    embed: matrix_to_json(e.encoding.embed()),
                })
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.run.header(&mut out);
        let _ = writeln!(
            out,
            "dim {}  algebra dim {}  radical dim {}  †-closed {}  CPTP {}",
            self.dim, self.algebra_dim, self.radical_dim, self.dagger_closed, self.generators_cptp
        );
        let _ = writeln!(out, "\n  k  mult  irrep  dim  unitary");
        for c in &self.components {
            let _ = writeln!(
                out,
                "{:>3}  {:>4}  {:>5}  {:>3}  {}",
                c.index, c.mult_dim, c.irrep_dim, c.dim, c.unitary
            );
        }
        let _ = writeln!(
            out,
            "zero space dim {}  remainder dim {}",
            self.zero_space_dim, self.remainder_dim
        );
        let _ = writeln!(
            out,
            "\nrank    N  s_dim  component  provenance          residual"
        );
        for e in &self.encodings {
            let comp = e
                .component
                .map(|k| k.to_string())
                .unwrap_or_else(|| "-".into());
            let prov = serde_json::to_value(e.provenance).expect("enum serializes");
            let _ = writeln!(
                out,
                "{:>4} {:>4} {:>6} {:>10}  {:<18} {:.3e}{}",
                e.rank,
                e.n,
                e.s_dim,
                comp,
                prov.as_str().unwrap_or_default(),
                e.residual,
                e.caveat.map(|c| format!("  ({c})")).unwrap_or_default()
            );
        }
        let _ = writeln!(out, "max N {}", self.max_n);
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PruneRow {
    pub rule: PruneRule,
    pub m_before: usize,
    pub m_after: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateOutput {
    pub code: MatrixJson,
    pub isometry: MatrixJson,
    pub alphas: MatrixJson,
    pub recovery: Vec<NamedMatrix>,
    pub residuals: CertificateResiduals,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtectOutput {
    pub run: RunInfo,
    pub budget: SolverBudget,
    pub verdict: &'static str,
    pub reason: Option<NotProtectableReason>,
    pub best_objective: Option<f64>,
    pub restarts: Option<usize>,
    pub preimage_dim: usize,
    pub pruned_dim: usize,
    pub span_dim: usize,
    pub route: Option<SearchRoute>,
    pub prune_steps: Vec<PruneRow>,
    pub certificate: Option<CertificateOutput>,
}

impl ProtectOutput {
    pub fn new(run: RunInfo, budget: SolverBudget, report: &ProtectReport) -> Self {
        let mut out = Self {
            run,
            budget,
            verdict: report.verdict.label(),
            reason: None,
            best_objective: None,
            restarts: None,
            preimage_dim: report.preimage_dim,
            pruned_dim: report.pruned_dim,
            span_dim: report.span_dim,
            route: report.route,
            prune_steps: report
                .prune_steps
                .iter()
                .map(|s| PruneRow {
                    rule: s.rule,
                    m_before: s.m_before,
                    m_after: s.m_after,
                })
                .collect(),
            certificate: None,
        };
        match &report.verdict {
            Verdict::Protectable(cert) => {
                out.certificate = Some(CertificateOutput {
                    code: matrix_to_json(cert.code.basis()),
                    isometry: matrix_to_json(&cert.isometry),
                    alphas: matrix_to_json(&cert.alphas),
                    recovery: named(&cert.recovery),
                    residuals: cert.residuals,
                    degenerate: cert.degenerate,
                })
            }
            Verdict::NotProtectable(reason) => out.reason = Some(reason.clone()),
            Verdict::Undecided {
                best_objective,
                restarts,
            } => {
                out.best_objective = Some(*best_objective);
                out.restarts = Some(*restarts);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.run.header(&mut out);
        let _ = writeln!(out, "verdict {}", self.verdict);
        let _ = writeln!(
            out,
            "dim 𝒱 {}  after pruning {}  span dim {}",
            self.preimage_dim, self.pruned_dim, self.span_dim
        );
        for s in &self.prune_steps {
            let _ = writeln!(out, "  pruned {:?}: {} → {}", s.rule, s.m_before, s.m_after);
        }
        if let Some(reason) = &self.reason {
            let _ = writeln!(out, "reason: {reason}");
        }
        if let (Some(f), Some(r)) = (self.best_objective, self.restarts) {
            let _ = writeln!(
                out,
                "best objective {f:.3e} after {r} restarts (not a proof of infeasibility)"
            );
        }
        if let Some(cert) = &self.certificate {
            let r = &cert.residuals;
            let _ = writeln!(out, "code dimension {}", cert.isometry.len());
            let _ = writeln!(
                out,
                "residuals: proportionality {:.3e}  isometry {:.3e}  recovery excess {:.3e}  noiseless {:.3e}",
                r.proportionality, r.isometry, r.recovery_excess, r.noiseless
            );
            if cert.degenerate {
                let _ = writeln!(out, "all α vanish: every error annihilates the code");
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QecOutput {
    pub run: RunInfo,
    pub passed: bool,
    pub residual: f64,
    pub names: Vec<String>,
    /// Fit residual of Π E_i†E_j Π by I ⊗ g_ij at [i][j].
    pub residuals: Vec<Vec<f64>>,
}

impl QecOutput {
    pub fn new(run: RunInfo, errs: &OperatorSet, check: &CorrectionCheck) -> Self {
        let k = errs.len();
        Self {
            run,
            passed: check.passed,
            residual: check.residual,
            names: errs.names().to_vec(),
            residuals: (0..k)
                .map(|i| (0..k).map(|j| check.residuals[(i, j)].re).collect())
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.run.header(&mut out);
        let _ = writeln!(
            out,
            "{}  max residual {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.residual
        );
        let width = self.names.iter().map(|n| n.len()).max().unwrap_or(1).max(9);
        let _ = write!(out, "{:>width$}", "");
        for n in &self.names {
            let _ = write!(out, " {n:>width$}");
        }
        let _ = writeln!(out);
        for (n, row) in self.names.iter().zip(&self.residuals) {
            let _ = write!(out, "{n:>width$}");
            for v in row {
                let _ = write!(out, " {:>width$.2e}", v);
            }
            let _ = writeln!(out);
        }
        out
    }
}
