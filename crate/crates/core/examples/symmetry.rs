//! Which unitaries preserve the relations: the membership test and torus action.
//!
//! ```bash
//! cargo run --example symmetry
//! ```

use num_complex::Complex64;
use qisom::rewrite::QMatrix;
use qisom::symmetry::{group_axiom_sample, lemma1_test, UnitaryCandidate};

fn main() -> qisom::Result<()> {
    let swap = UnitaryCandidate::permutation(&[1, 0])?;

    // a real q_12 is symmetric under swapping the generators, an imaginary one is not
    for q12 in [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5)] {
        let q = QMatrix::two(q12)?;
        let out = lemma1_test(&swap, &q);
        println!("q_12 = {q12}: swap passes = {}, witness {:?}", out.passed, out.witness);
    }

    let q = QMatrix::random_isom(3, 0.9, 1)?;
    let report = group_axiom_sample(&q, 50, 1);
    println!("{report:#?}");
    Ok(())
}
