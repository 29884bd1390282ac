use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{Context, Result};
use tim_core::{parse_topology, GeneralizedAllianceSpec, SpecDocument, TopologyMatrix};

/// Reads a file, or standard input when the path is `-`.
pub fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_topology(path: &Path) -> Result<TopologyMatrix> {
    let text = read_text(path)?;
    parse_topology(&text).with_context(|| format!("parsing topology {}", path.display()))
}

pub fn read_spec_document(path: &Path) -> Result<SpecDocument> {
    let text = read_text(path)?;
    SpecDocument::from_json(&text).with_context(|| format!("parsing specification {}", path.display()))
}

/// Loads any spec document as a generalized spec; plain documents lift exactly.
pub fn read_generalized_spec(path: &Path) -> Result<GeneralizedAllianceSpec> {
    let doc = read_spec_document(path)?;
    GeneralizedAllianceSpec::from_document(&doc)
        .with_context(|| format!("loading specification {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
