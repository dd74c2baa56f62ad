//! Prompt/response cassettes: JSON-lines of
//! `{prompt_sha256, response, model, created_at}`.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub prompt_sha256: String,
    pub response: String,
    pub model: String,
    pub created_at: String,
}

pub fn prompt_hash(prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug)]
pub struct Cassette {
    path: PathBuf,
    entries: HashMap<String, String>,
}

impl Cassette {
    /// Opens a cassette file; a missing file is an empty cassette (record
    /// mode will create it).
    pub fn open(path: &Path) -> std::io::Result<Cassette> {
        let mut entries = HashMap::new();
        if path.exists() {
            let file = std::fs::File::open(path)?;
            for line in BufReader::new(file).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                if let Ok(entry) = serde_json::from_str::<CassetteEntry>(&line) {
                    entries.insert(entry.prompt_sha256, entry.response);
                }
            }
        }
        Ok(Cassette {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn lookup(&self, hash: &str) -> Option<&str> {
        self.entries.get(hash).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends one entry and keeps it visible to later lookups.
    pub fn record(&mut self, prompt: &str, response: &str, model: &str) -> std::io::Result<()> {
        let entry = CassetteEntry {
            prompt_sha256: prompt_hash(prompt),
            response: response.to_string(),
            model: model.to_string(),
            created_at: chrono::Utc::now().to_rfc3339(),
        };
        if let Some(parent) = self.path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        serde_json::to_writer(&mut file, &entry)?;
        file.write_all(b"\n")?;
        self.entries.insert(entry.prompt_sha256, entry.response);
        Ok(())
    }

    /// Writes an entry for a prompt/response pair without a client round trip.
    /// Used to seed replay cassettes.
    pub fn seed(path: &Path, prompt: &str, response: &str, model: &str) -> std::io::Result<()> {
        let mut cassette = Cassette::open(path)?;
        cassette.record(prompt, response, model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_then_lookup_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tape.jsonl");
        let mut cassette = Cassette::open(&path).unwrap();
        cassette.record("prompt one", "response one", "test-model").unwrap();
        cassette.record("prompt two", "response two", "test-model").unwrap();

        let reloaded = Cassette::open(&path).unwrap();
        assert_eq!(reloaded.len(), 2);
        assert_eq!(
            reloaded.lookup(&prompt_hash("prompt one")),
            Some("response one")
        );
        assert_eq!(reloaded.lookup(&prompt_hash("missing")), None);
    }

    #[test]
    fn entries_carry_the_documented_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tape.jsonl");
        Cassette::seed(&path, "p", "r", "m").unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        let entry: CassetteEntry = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(entry.prompt_sha256, prompt_hash("p"));
        assert_eq!(entry.response, "r");
        assert_eq!(entry.model, "m");
        assert!(!entry.created_at.is_empty());
    }
}
