//! Bratteli diagram of the filtration, numeric against closed form, as DOT.
//!
//! ```bash
//! cargo run --example bratteli > bratteli.dot
//! ```

use qisom::bratteli::{diagram_closed, diagram_numeric};
use qisom::rewrite::QMatrix;

fn main() -> qisom::Result<()> {
    let q = QMatrix::random_isom(2, 0.9, 3)?;
    let numeric = diagram_numeric(&q, 2)?;
    let closed = diagram_closed(2, 2);

    eprintln!("numeric edges agree with closed form: {}", numeric.edges == closed.edges);
    print!("{}", numeric.to_dot());
    Ok(())
}
