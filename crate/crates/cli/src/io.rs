//! Reading inputs and writing outputs.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::diag::{Diagnostic, Failure};

pub fn display(path: &Path) -> String {
    if path == Path::new("-") {
        "<stdin>".to_owned()
    } else {
        path.display().to_string()
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    let mut bytes = Vec::new();
    let res = if path == Path::new("-") {
        io::stdin().lock().read_to_end(&mut bytes)
    } else {
        File::open(path).and_then(|mut f| f.read_to_end(&mut bytes))
    };
    res.map_err(|e| Diagnostic::new("io", e.to_string()).file(display(path)))?;
    String::from_utf8(bytes).map_err(|e| {
        Diagnostic::new("encoding", "input is not valid UTF-8").file(display(path)).offset(e.utf8_error().valid_up_to()).into()
    })
}

/// One non-blank input line, parsed.
pub struct Record<T> {
    /// 1-based line number.
    pub line: usize,
    pub key: Option<String>,
    pub value: T,
}

/// Parses every non-blank line. With `key`, that field is taken out of each
/// object first and must be a string or a number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path, key: Option<&str>) -> Result<Vec<Record<T>>, Failure> {
    let text = read_text(path)?;
    let file = display(path);
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line = i + 1;
        let at = |kind, msg: String| Diagnostic::new(kind, msg).file(file.clone()).line(line);
        let mut value: Value = match serde_json::from_str(raw) {
            Ok(v) => v,
            Err(e) => {
                errors.push(at("parse", e.to_string()));
                continue;
            }
        };
        let mut id = None;
        if let Some(field) = key {
            match value.as_object_mut().and_then(|m| m.remove(field)) {
                Some(Value::String(s)) => id = Some(s),
                Some(Value::Number(n)) => id = Some(n.to_string()),
                _ => {
                    errors.push(at("parse", format!("missing string or number field {field:?}")));
                    continue;
                }
            }
        }
        match serde_json::from_value(value) {
            Ok(v) => out.push(Record { line, key: id, value: v }),
            Err(e) => errors.push(at("parse", e.to_string())),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Failure(errors))
    }
}

pub struct Output {
    sink: BufWriter<Box<dyn Write>>,
    name: String,
}

impl Output {
    pub fn open(path: Option<&PathBuf>) -> Result<Self, Failure> {
        let (sink, name): (Box<dyn Write>, String) = match path {
            Some(p) => {
                let f = File::create(p).map_err(|e| Diagnostic::new("io", e.to_string()).file(p.display().to_string()))?;
                (Box::new(f), p.display().to_string())
            }
            None => (Box::new(io::stdout()), "<stdout>".to_owned()),
        };
        Ok(Self { sink: BufWriter::new(sink), name })
    }

    pub fn line(&mut self, text: &str) -> Result<(), Failure> {
        writeln!(self.sink, "{text}").map_err(|e| self.io_error(e))
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        self.sink.flush().map_err(|e| self.io_error(e))
    }

    fn io_error(&self, e: io::Error) -> Failure {
        Diagnostic::new("io", e.to_string()).file(self.name.clone()).into()
    }
}
