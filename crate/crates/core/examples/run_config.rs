//! Runs a shipped configuration through the library instead of the binary.
//!
//! cargo run --example run_config -- crates/core/configs/deviations.conf

use qkd_fluct::cli::{run, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/methods.conf").to_string());
    let cfg = RunConfig::parse(&std::fs::read_to_string(&path)?)?;
    let out = run(&cfg)?;
    print!("{}", out.text);
    Ok(())
}
