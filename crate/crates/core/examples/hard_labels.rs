//! Hard negative labels: wrong labels are drawn with probability proportional to
//! the square root of their goodness, and the true label is never drawn.
//!
//!     cargo run --example hard_labels

use snnff::trainer::hard_label_distribution;
use snnff::RngStream;

fn main() {
    let scores = [9.0, 1.0, 25.0, 4.0];
    let truth = 2;
    let p = hard_label_distribution(&scores, truth);

    let mut rng = RngStream::new(0);
    let draws = 20_000;
    let mut counts = [0usize; 4];
    for _ in 0..draws {
        counts[rng.categorical(&p)] += 1;
    }
    println!("label  score  probability  observed");
    for y in 0..scores.len() {
        println!(
            "{y:>5}  {:>5}  {:>11.4}  {:>8.4}",
            scores[y],
            p[y],
            counts[y] as f64 / draws as f64
        );
    }
}
