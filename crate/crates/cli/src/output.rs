//! Output files, each stamped with the tool version and config hash.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TOOL: &str = "depeg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(config_hash: String) -> Provenance {
        Provenance { tool: TOOL.into(), version: VERSION.into(), config_hash }
    }

    /// Comment line for text formats.
    pub fn comment(&self) -> String {
        format!("# {} {} config sha256:{}\n", self.tool, self.version, self.config_hash)
    }
}

/// A JSON output document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Doc<T> {
    pub provenance: Provenance,
    pub result: T,
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, prov: &Provenance, result: &T) -> Result<(), CliError> {
    let doc = Doc { provenance: prov.clone(), result };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Doc<T>, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Core(depeg_core::Error::Parse(format!("{}: {e}", path.display()))))
}

/// CSV with a header row; the provenance goes in two trailing columns.
pub fn write_csv(path: &Path, prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    ensure_parent(path)?;
    let io = |e: csv::Error| CliError::io(path, e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut h: Vec<&str> = header.to_vec();
    h.extend(["tool_version", "config_hash"]);
    w.write_record(&h).map_err(io)?;
    let version = format!("{TOOL} {VERSION}");
    for r in rows {
        let mut r = r.clone();
        r.push(version.clone());
        r.push(prov.config_hash.clone());
        w.write_record(&r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_gets_provenance_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x/y.csv");
        let prov = Provenance::new("ab".into());
        write_csv(&path, &prov, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("a,b,tool_version,config_hash\n1,2,depeg {VERSION},ab\n"));
    }

    #[test]
    fn json_round_trips_with_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let prov = Provenance::new("cd".into());
        write_json(&path, &prov, &vec![1u32, 2]).unwrap();
        let d: Doc<Vec<u32>> = read_json(&path).unwrap();
        assert_eq!((d.provenance, d.result), (prov, vec![1, 2]));
        assert!(matches!(read_json::<u32>(&dir.path().join("none.json")), Err(CliError::Missing(_))));
    }
}
