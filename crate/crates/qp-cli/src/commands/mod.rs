pub mod diophantine;
pub mod green;
pub mod ids;
pub mod localize;
pub mod msa;

use anyhow::{Context, Result};
use std::path::Path;

/// Write a file, creating parents.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}
