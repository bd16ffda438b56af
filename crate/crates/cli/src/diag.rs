//! Failures reported on stderr, one JSON object per line.

use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// 1-based line of the input file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<usize>,
    /// Token index or byte offset, depending on `kind`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self { kind, file: None, line: None, element: None, offset: None, message: message.into() }
    }

    pub fn file(mut self, file: impl Into<String>) -> Self {
        self.file = Some(file.into());
        self
    }

    pub fn line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }

    pub fn element(mut self, element: Option<usize>) -> Self {
        self.element = element;
        self
    }

    pub fn offset(mut self, offset: usize) -> Self {
        self.offset = Some(offset);
        self
    }
}

/// A command that did not complete. Exits 2 for flag values out of range,
/// 1 for everything else.
#[derive(Debug)]
pub struct Failure(pub Vec<Diagnostic>);

impl Failure {
    pub fn one(d: Diagnostic) -> Self {
        Failure(vec![d])
    }

    pub fn status(&self) -> u8 {
        if self.0.iter().any(|d| d.kind == "usage") {
            2
        } else {
            1
        }
    }

    pub fn report(&self) {
        let stderr = std::io::stderr();
        let mut err = stderr.lock();
        for d in &self.0 {
            let text = serde_json::to_string(d).unwrap_or_else(|_| format!("{{\"message\":{:?}}}", d.message));
            let _ = writeln!(err, "{text}");
        }
    }
}

impl From<Diagnostic> for Failure {
    fn from(d: Diagnostic) -> Self {
        Failure::one(d)
    }
}
