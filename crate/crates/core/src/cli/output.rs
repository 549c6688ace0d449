use crate::error::{Error, Result};
use serde::Serialize;
use std::fs;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

/// Output directory guarded against accidental overwrites.
pub struct OutDir {
    root: PathBuf,
    overwrite: bool,
    written: Vec<String>,
}

impl OutDir {
    pub fn new(root: PathBuf, overwrite: bool) -> Result<Self> {
        fs::create_dir_all(&root)?;
        Ok(OutDir { root, overwrite, written: Vec::new() })
    }

    fn target(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.root.join(name);
        if p.exists() && !self.overwrite {
            return Err(Error::Config(format!(
                "{} exists; pass --overwrite to replace it",
                p.display()
            )));
        }
        self.written.push(name.to_string());
        Ok(p)
    }

    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        let p = self.target(name)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(p)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let p = self.target(name)?;
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        fs::write(p, s)?;
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.target(name)?;
        fs::write(p, body)?;
        Ok(())
    }

    pub fn manifest(mut self, command: &str, args: &[String], schedule_hash: &str) -> Result<()> {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let outputs = std::mem::take(&mut self.written);
        let m = serde_json::json!({
            "command": command,
            "args": args,
            "schedule_hash": schedule_hash,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": timestamp,
            "outputs": outputs,
        });
        self.json("manifest.json", &m)
    }
}
