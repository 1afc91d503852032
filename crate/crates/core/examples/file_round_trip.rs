//! JSON files for operator sets and encodings.
//!
//! Complex entries are `[re, im]` pairs in row-major matrices. Writing and
//! reading back reproduces every f64 bit for bit, which is what makes
//! command-line runs replayable.

use subsys::instances::collective;
use subsys::io::{load_encoding, load_operators, save_encoding, save_operators};
use subsys::linalg::Tolerance;
use subsys::noiseless::{find_noiseless, NoiselessOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerance::default();
    let dir = tempfile::tempdir()?;
    let errs = collective(3);
    let ops_path = dir.path().join("collective3.json");
    save_operators(&ops_path, &errs)?;
    let back = load_operators(&ops_path)?;
    let exact = errs
        .operators()
        .iter()
        .zip(back.operators())
        .all(|(a, b)| a == b);
    println!(
        "{} operators written to {}, exact round trip: {exact}",
        back.len(),
        ops_path.display()
    );

    let report = find_noiseless(&back, &NoiselessOptions::default())?;
    let enc = &report.encodings[0].encoding;
    let enc_path = dir.path().join("best_encoding.json");
    save_encoding(&enc_path, enc)?;
    let loaded = load_encoding(&enc_path, &tol)?;
    println!(
        "encoding N = {} s = {} written and reloaded, exact: {}",
        loaded.n(),
        loaded.s_dim(),
        loaded.embed() == enc.embed()
    );

    // Malformed input is reported with its position.
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dim\": 2, \"operators\": [")?;
    if let Err(e) = load_operators(&bad) {
        println!("malformed file: {e}");
    }
    Ok(())
}
