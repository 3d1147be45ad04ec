//! Output files. Everything but `run.log` is a pure function of the
//! configuration, so re-runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

/// Fixed-width scientific notation with 17 significant digits, enough to
/// round-trip any `f64`.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    outputs: Vec<String>,
    tolerances: Map<String, Value>,
    log: String,
}

impl Artifacts {
    pub fn create(dir: impl AsRef<Path>, hash: String) -> CliResult<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let mut a = Self {
            dir,
            hash,
            outputs: Vec::new(),
            tolerances: Map::new(),
            log: String::new(),
        };
        a.log(&format!("config-hash {}", a.hash));
        Ok(a)
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// Appends a timestamped line to `run.log`.
    pub fn log(&mut self, message: &str) {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        let _ = writeln!(self.log, "{}.{:03} {message}", now.as_secs(), now.subsec_millis());
    }

    /// Records the tolerances a stage actually ran with.
    pub fn tolerances(&mut self, stage: &str, values: Value) {
        self.tolerances.insert(stage.into(), values);
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.into());
        }
        self.log(&format!("wrote {name}"));
        Ok(())
    }

    /// A CSV table headed by the config hash, any extra comment lines and the
    /// column names.
    pub fn csv(&mut self, name: &str, comments: &[String], columns: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
        let mut text = format!("# config-hash: {}\n", self.hash);
        for c in comments {
            let _ = writeln!(text, "# {c}");
        }
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        let io = |e: csv::Error| CliError::config("CsvError", e.to_string());
        writer.write_record(columns).map_err(io)?;
        for row in rows {
            writer.write_record(row.iter().map(|&v| fmt_num(v))).map_err(io)?;
        }
        let body = writer.into_inner().map_err(|e| CliError::config("CsvError", e.to_string()))?;
        text.push_str(&String::from_utf8(body).expect("csv output is UTF-8"));
        self.write(name, text.as_bytes())
    }

    /// A pretty-printed JSON object with a `config_hash` field.
    pub fn json(&mut self, name: &str, mut value: Value) -> CliResult<()> {
        if let Some(obj) = value.as_object_mut() {
            obj.insert("config_hash".into(), Value::String(self.hash.clone()));
        }
        let mut text = serde_json::to_string_pretty(&value).expect("JSON serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Keeps whatever was written and records the failure in `run.log`.
    pub fn abort(mut self, reason: &str) -> CliResult<()> {
        self.log(&format!("failed: {reason}"));
        let path = self.dir.join("run.log");
        fs::write(&path, &self.log).map_err(|e| CliError::io(&path, e))
    }

    /// Writes `manifest.json` and the timestamped `run.log`.
    pub fn finish(mut self, command: &str, inputs: Value) -> CliResult<()> {
        let manifest = json!({
            "command": command,
            "inputs": inputs,
            "tolerances": Value::Object(std::mem::take(&mut self.tolerances)),
            "outputs": self.outputs.clone(),
        });
        self.json("manifest.json", manifest)?;
        self.log("done");
        let path = self.dir.join("run.log");
        fs::write(&path, &self.log).map_err(|e| CliError::io(&path, e))
    }
}

/// `{"x": [...], "y": [...]}` for a tabulated function.
pub fn grid_json(f: &invot_core::GridFunction) -> Value {
    json!({"x": f.x(), "y": f.y()})
}

/// Columns of a grid function as CSV rows.
pub fn grid_rows(f: &invot_core::GridFunction) -> Vec<Vec<f64>> {
    f.x().iter().zip(f.y()).map(|(&x, &y)| vec![x, y]).collect()
}
