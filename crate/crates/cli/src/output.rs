//! CSV tables with a provenance line, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Identifies what produced a file: scenario (plus command parameters) hash, seed, version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(scenario_text: &str, params: &str, seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(scenario_text.as_bytes());
        h.update(b"\n--\n");
        h.update(params.as_bytes());
        let hash = h.finalize().iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Provenance { hash, seed }
    }

    pub fn header(&self) -> String {
        format!("# nanotrap {} scenario={} seed={}", env!("CARGO_PKG_VERSION"), self.hash, self.seed)
    }
}

/// Independent sub-seed for a named purpose, stable across platforms.
pub fn sub_seed(seed: u64, purpose: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(purpose.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

/// Scientific notation with 9 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.8e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self, prov: &Provenance) -> String {
        let mut s = prov.header();
        s.push('\n');
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|&v| num(v)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

/// Write via a temporary file in the target directory and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
