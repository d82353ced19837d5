//! Gram blocks of the deformed Fock inner product and their orthonormal frames.
//!
//! ```bash
//! cargo run --example gram
//! ```

use num_complex::Complex64;
use qisom::fock::{form_gram, gram_block, orthonormalize, GramBlock};
use qisom::rewrite::QMatrix;
use qisom::words::OccVector;

fn main() -> qisom::Result<()> {
    let q = QMatrix::two(Complex64::new(0.0, 0.9))?;

    for v in [vec![1, 1], vec![2, 1], vec![2, 2]] {
        let v = OccVector::new(v);
        let g = gram_block(&v, &q)?;
        let c = orthonormalize(&g)?;
        // C^T G conj(C) should be the identity
        let defect = (form_gram(&g.gram, &c) - qisom::linalg::CMatrix::identity(g.dim(), g.dim())).norm();
        println!(
            "v = {v}: dim {}, det {:.3e}, min pivot {:.4}, frame defect {defect:.1e}",
            g.dim(),
            g.determinant().re,
            g.min_pivot
        );
    }

    // det of block (1,1) is 1 - |q_12|^2, so it degenerates as |q_12| -> 1
    for r in [0.5, 0.99, 0.999999] {
        let q = QMatrix::two(Complex64::new(r, 0.0))?;
        let g = GramBlock::compute(&OccVector::new(vec![1, 1]), &q);
        println!("|q_12| = {r}: det {:.2e}, positive = {}", g.determinant().re, g.is_positive());
    }
    Ok(())
}
