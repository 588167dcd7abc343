//! Regenerates the bundled fixture CSVs under `fixtures/`.
//!
//! The generators are fully deterministic, so running this example leaves
//! the committed files unchanged byte for byte.
//!
//! ```text
//! cargo run --release --example generate_fixtures [-- <output-dir>]
//! ```

use std::path::PathBuf;

use quotasim::datasets::fixtures::write_all_fixtures;

fn main() -> quotasim::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let written = write_all_fixtures(&dir)?;
    for path in written {
        let bytes = std::fs::metadata(&path)?.len();
        println!("wrote {} ({bytes} bytes)", path.display());
    }
    Ok(())
}
