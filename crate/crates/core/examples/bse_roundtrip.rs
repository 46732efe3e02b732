//! Writes a binned spike-event (BSE1) file and reads it back.
//!
//!     cargo run --example bse_roundtrip

use snnff::dataio::{load_binned_events, synthetic, write_binned_events};

fn main() -> snnff::Result<()> {
    let (train, _) = synthetic::generate("temporal", 7)?;
    let path = std::env::temp_dir().join("snnff-roundtrip.bse");
    write_binned_events(&path, &train)?;
    let back = load_binned_events(&path)?;
    println!(
        "{} samples, {} channels x {} bins, {} classes, {} bytes",
        back.len(),
        back.input_dim,
        back.timesteps,
        back.num_classes,
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0)
    );
    println!("identical after round trip: {}", back == train);
    Ok(())
}
