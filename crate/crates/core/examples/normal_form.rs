//! Rewrite words in the generators to normal form `c * a_mu a_sigma*`.
//!
//! ```bash
//! cargo run --example normal_form
//! ```

use num_complex::Complex64;
use qisom::rewrite::{normal_form, reduce, IsomQ, QMatrix, Strategy};
use qisom::words::Word;

fn main() -> qisom::Result<()> {
    let q = IsomQ::new(QMatrix::two(Complex64::new(0.3, 0.4))?)?;

    for text in ["a1* a1", "a1* a2", "a2* a1 a1", "a1* a2* a2 a1"] {
        let w: Word = text.parse()?;
        let nf = normal_form(&w, &q)?;
        println!("{text:>16}  ->  {nf}");
    }

    // both reduction orders land on the same normal form
    let w: Word = "a1* a2* a1 a2 a1".parse()?;
    let left = reduce(&w, &q, Strategy::Leftmost)?;
    let right = reduce(&w, &q, Strategy::Rightmost)?;
    println!("leftmost  {} ({} steps)", left.monomial, left.steps);
    println!("rightmost {} ({} steps)", right.monomial, right.steps);
    Ok(())
}
