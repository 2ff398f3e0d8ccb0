//! Runs a TOML config in-process and prints the CSV and the JSON report.
//!
//! `cargo run --example run_config -- examples/configs/bi_seasonal.toml`

use std::path::PathBuf;

use seasonal_ruin::cli::{self, RunConfig};

fn main() -> seasonal_ruin::Result<()> {
    let path: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| {
            concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/configs/bi_seasonal.toml"
            )
            .into()
        })
        .into();
    let cfg = RunConfig::load(&path)?;
    let out = cli::execute(&cfg)?;
    print!("{}", cli::to_csv(&out));
    print!("{}", cli::to_json(&out.report)?);
    Ok(())
}
