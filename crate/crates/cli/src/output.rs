//! Deterministic artifacts: JSON with sorted keys and 17-significant-digit
//! floats, fixed-column CSV, atomic file writes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let value = serde_json::to_value(v)?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => out.push_str(&u.to_string()),
            (_, Some(i)) => out.push_str(&i.to_string()),
            _ => out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], indent + 2);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Writes via a temporary sibling and a rename so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.as_u64().is_none() && n.as_i64().is_none() => format_float(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// CSV with the given column order; each row is serialized and its fields picked by name.
pub fn to_csv<T: Serialize>(columns: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for row in rows {
        let v = serde_json::to_value(row)?;
        let rec: Vec<String> = columns.iter().map(|c| v.get(*c).map(cell).unwrap_or_default()).collect();
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Collects the files of one run and writes the manifest last.
pub struct RunDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(RunDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, columns: &[&str], rows: &[T]) -> Result<()> {
        write_atomic(&self.dir.join(name), to_csv(columns, rows)?.as_bytes())?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        write_atomic(&self.dir.join(name), to_json(v)?.as_bytes())?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, command: &str, parameters: Value, extra: Value) -> Result<()> {
        let manifest = serde_json::json!({
            "tool": "gausslab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "parameters": parameters,
            "files": self.files,
            "results": extra,
        });
        write_atomic(&self.dir.join("manifest.json"), to_json(&manifest)?.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits_and_keys_sort() {
        let v = serde_json::json!({"b": 0.1, "a": [1, -2, 2.5e-300], "c": {"z": true, "y": null}});
        let s = to_json(&v).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("-2"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64().unwrap().to_bits(), 0.1f64.to_bits());
        assert_eq!(back["a"][2].as_f64().unwrap(), 2.5e-300);
    }

    #[test]
    fn csv_uses_fixed_columns() {
        #[derive(Serialize)]
        struct Row {
            x: f64,
            n: usize,
            s: String,
        }
        let s = to_csv(&["n", "x"], &[Row { x: 0.5, n: 3, s: "skip".into() }]).unwrap();
        assert_eq!(s, "n,x\n3,5.0000000000000000e-1\n");
    }
}
