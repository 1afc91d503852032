//! Radical of a non-semisimple operator algebra.
//!
//! A planted algebra of block upper-triangular matrices has a nilpotent
//! ideal of known dimension. The radical computation recovers it, and every
//! element is checked to be nilpotent. The quotient by the radical is what
//! the noiseless search decomposes.

use subsys::algebra::{analyze, generate_algebra, jacobson_radical, MatrixAlgebra};
use subsys::instances::planted_radical;
use subsys::linalg::{CMatrix, Tolerance};

fn nilpotency_defect(r: &CMatrix) -> f64 {
    let d = r.nrows();
    let mut p = CMatrix::identity(d, d);
    for _ in 0..d {
        p = &p * r;
    }
    p.norm()
}

fn main() {
    let tol = Tolerance::default();
    for (k, q) in [(2, 1), (3, 4), (4, 9)] {
        let (ops, expected) = planted_radical(7 * k as u64 + q as u64, k, q);
        let alg: MatrixAlgebra = generate_algebra(&ops, &tol);
        let rad = jacobson_radical(&alg, &tol);
        let worst = rad
            .elements
            .iter()
            .map(nilpotency_defect)
            .fold(0.0, f64::max);
        let structure = analyze(&alg, &tol);
        println!(
            "d = {:>2}  algebra dim {:>3}  radical dim {:>2} (planted {expected:>2})  max ‖r^d‖ {worst:.1e}  semisimple span dim {}",
            ops.dim(),
            alg.algebra_dim(),
            rad.elements.len(),
            structure.semisimple_span.dim()
        );
    }
}
