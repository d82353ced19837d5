//! Decompose the fixed-point algebra W_k into full matrix blocks.
//!
//! ```bash
//! cargo run --example gicar_blocks
//! ```

use qisom::gicar::{decompose, GicarSpan};
use qisom::rep::TruncatedFock;
use qisom::rewrite::QMatrix;

fn main() -> qisom::Result<()> {
    let q = QMatrix::random_isom(2, 0.7, 5)?;
    let k = 2;
    let t = TruncatedFock::for_filtration(&q, k)?;

    let d = decompose(k, &t)?;
    println!("W_{k}: expected dim {}, represented {}", GicarSpan::expected_dim(2, k), d.represented_dim);
    for b in &d.blocks {
        println!("  block {:<8} M_{}  unit rank {}", b.v.to_string(), b.dim, b.unit_rank);
    }
    println!("orthogonality {:.1e}, partition of unity {:.1e}", d.orthogonality, d.partition);
    Ok(())
}
