//! Writing class labels over the first input entries.
//!
//!     cargo run --example label_embedding

use snnff::dataio::{embed_label, make_negative, make_positive, Dataset};
use snnff::Matrix;

fn main() -> snnff::Result<()> {
    let images = Matrix::from_rows(&[
        [0.9, 0.1, 0.0, 0.4, 0.8, 0.2],
        [0.0, 0.5, 0.3, 0.6, 0.1, 0.7],
    ]);
    let data = Dataset::static_images(images, vec![1, 2], 3)?;
    let batch = data.as_batch();

    let pos = make_positive(&batch, 3)?;
    let neg = make_negative(&batch, &[0, 1], 3)?;
    println!("original:\n{}", show(&batch.inputs));
    println!("positive (true labels 1, 2):\n{}", show(&pos.inputs));
    println!("negative (labels 0, 1):\n{}", show(&neg.inputs));

    // one overlay per candidate label, as used for scoring
    for y in 0..3 {
        let probe = embed_label(&data.batch(&[0]), &[y], 3)?;
        println!("sample 0 with label {y}: {:?}", probe.inputs.row(0));
    }
    Ok(())
}

fn show(m: &Matrix) -> String {
    m.iter_rows().map(|r| format!("  {r:?}\n")).collect()
}
