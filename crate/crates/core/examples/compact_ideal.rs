//! Matrix units of the compact ideal built from the vacuum projection.
//!
//! ```bash
//! cargo run --example compact_ideal
//! ```

use qisom::ideal::verify_ideal;
use qisom::rep::TruncatedFock;
use qisom::rewrite::QMatrix;

fn main() -> qisom::Result<()> {
    let q = QMatrix::random_isom(2, 0.6, 8)?;
    let t = TruncatedFock::new(&q, 4)?;
    let (report, _witness) = verify_ideal(&t, 2)?;

    println!("rank p = {} (spectral gap {:.3})", report.rank_p, report.spectral_gap);
    println!("{} matrix units spanning rank {}", report.unit_count, report.span_rank);
    println!(
        "residuals: product {:.1e}, adjoint {:.1e}, orthogonality {:.1e}",
        report.product_residual, report.adjoint_residual, report.orthogonality_residual
    );
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
    Ok(())
}
