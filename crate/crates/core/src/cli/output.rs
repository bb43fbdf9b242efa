//! Output files that carry their run configuration and a content checksum,
//! plus the per-run manifest.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const RUN_MANIFEST: &str = "run_manifest.json";
const CONFIG_PREFIX: &str = "# config: ";
const CHECKSUM_PREFIX: &str = "# content_sha256: ";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    Ok(sha256_hex(&bytes))
}

/// JSON document `{config, content_sha256, content}`; the checksum covers the
/// compact serialization of `content`.
pub fn json_document<T: Serialize>(config: &Value, content: &T) -> Result<String> {
    let content = serde_json::to_value(content)?;
    let digest = sha256_hex(serde_json::to_string(&content)?.as_bytes());
    let doc = json!({ "config": config, "content_sha256": digest, "content": content });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// CSV body preceded by `# config:` and `# content_sha256:` comment lines.
pub fn csv_document(config: &Value, body: &[u8]) -> Result<Vec<u8>> {
    let mut out = format!(
        "{CONFIG_PREFIX}{}\n{CHECKSUM_PREFIX}{}\n",
        serde_json::to_string(config)?,
        sha256_hex(body)
    )
    .into_bytes();
    out.extend_from_slice(body);
    Ok(out)
}

/// `content` of a JSON document written by `json_document`.
pub fn read_json_content(path: &Path) -> Result<(Value, Value)> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut doc: Value = serde_json::from_str(&text)?;
    let content = doc
        .get_mut("content")
        .map(Value::take)
        .ok_or_else(|| Error::Config(format!("{} has no content section", path.display())))?;
    let expected = doc.get("content_sha256").and_then(Value::as_str).unwrap_or_default();
    if sha256_hex(serde_json::to_string(&content)?.as_bytes()) != expected {
        return Err(Error::Config(format!("{}: content checksum mismatch", path.display())));
    }
    Ok((doc.get("config").cloned().unwrap_or(Value::Null), content))
}

/// Config echoed in the leading comment lines of a CSV output.
pub fn read_csv_config(path: &Path) -> Result<Option<Value>> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    for line in BufReader::new(file).lines() {
        let line = line?;
        match line.strip_prefix(CONFIG_PREFIX) {
            Some(rest) => return Ok(Some(serde_json::from_str(rest)?)),
            None if line.starts_with('#') => continue,
            None => break,
        }
    }
    Ok(None)
}

/// Output directory that tracks every file written during a run.
pub struct OutputDir {
    root: PathBuf,
    config: Value,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, config: Value) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), config, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &Value {
        &self.config
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, content: &T) -> Result<PathBuf> {
        let text = json_document(&self.config, content)?;
        self.write_raw(name, text.as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, body: &[u8]) -> Result<PathBuf> {
        let bytes = csv_document(&self.config, body)?;
        self.write_raw(name, &bytes)
    }

    fn write_raw(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes)?;
        self.record(path.clone());
        Ok(path)
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, path: PathBuf) {
        if !self.written.contains(&path) {
            self.written.push(path);
        }
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Writes `run_manifest.json` listing inputs and outputs with checksums.
    pub fn finish(self, command: &str, inputs: &[PathBuf], summary: Value) -> Result<PathBuf> {
        let entry = |p: &PathBuf, display: String| -> Result<Value> { Ok(json!({ "path": display, "sha256": file_sha256(p)? })) };
        let inputs = inputs
            .iter()
            .map(|p| entry(p, p.display().to_string()))
            .collect::<Result<Vec<_>>>()?;
        let outputs = self
            .written
            .iter()
            .map(|p| {
                let rel = p.strip_prefix(&self.root).unwrap_or(p).display().to_string();
                entry(p, rel)
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = json!({
            "command": command,
            "config": self.config,
            "inputs": inputs,
            "outputs": outputs,
            "summary": summary,
        });
        let path = self.root.join(RUN_MANIFEST);
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), json!({"band": "alpha"})).unwrap();
        let p = out.write_json("a.json", &json!({"x": 1.5})).unwrap();
        let (cfg, content) = read_json_content(&p).unwrap();
        assert_eq!(cfg["band"], "alpha");
        assert_eq!(content["x"], 1.5);

        let c = out.write_csv("b.csv", b"h\n1\n").unwrap();
        assert_eq!(read_csv_config(&c).unwrap().unwrap()["band"], "alpha");
        let text = fs::read_to_string(&c).unwrap();
        assert!(text.ends_with("h\n1\n"));
        assert!(text.contains(&sha256_hex(b"h\n1\n")));

        let m = out.finish("test", &[], json!({})).unwrap();
        let manifest: Value = serde_json::from_str(&fs::read_to_string(m).unwrap()).unwrap();
        assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
        assert_eq!(manifest["outputs"][0]["path"], "a.json");
    }

    #[test]
    fn tampered_content_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), json!({})).unwrap();
        let p = out.write_json("a.json", &json!({"x": 1})).unwrap();
        let text = fs::read_to_string(&p).unwrap().replace("\"x\": 1", "\"x\": 2");
        fs::write(&p, text).unwrap();
        assert!(matches!(read_json_content(&p), Err(Error::Config(_))));
    }
}
