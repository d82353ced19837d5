//! Creation and annihilation operators on the truncated Fock space.
//!
//! ```bash
//! cargo run --example truncated_rep
//! ```

use qisom::rep::{relation_report, TruncatedFock, RELATION_TOL};
use qisom::rewrite::QMatrix;

fn main() -> qisom::Result<()> {
    let q = QMatrix::random_isom(3, 0.8, 11)?;
    let t = TruncatedFock::new(&q, 3)?;
    println!("n = {}, level {}, dimension {}", t.n(), t.level(), t.total_dim());

    let report = relation_report(&t);
    for r in &report.residuals {
        println!("{r:?}");
    }
    // blocks at the top level lose their creations, so the boundary residual is O(1)
    println!(
        "max residual {:.2e} (boundary {:.2e}): {}",
        report.max_residual,
        report.boundary_residual,
        if report.passed(RELATION_TOL) { "PASS" } else { "FAIL" }
    );
    Ok(())
}
