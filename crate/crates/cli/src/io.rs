// Copyright 2026 The bellnl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//! File input, JSON output and the mapping from failures to exit codes.

use std::path::Path;
use std::process::ExitCode;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NONCONVERGED: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_MALFORMED: u8 = 65;
pub const EXIT_NO_INPUT: u8 = 66;
pub const EXIT_IO: u8 = 74;

/// A structured diagnostic with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub file: Option<String>,
    pub position: Option<(usize, usize)>,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, kind: "validation", message: message.into(), file: None, position: None }
    }

    fn in_file(mut self, path: &Path) -> Self {
        self.file = Some(path.display().to_string());
        self
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "kind": self.kind, "code": self.code, "message": self.message });
        if let Some(f) = &self.file {
            v["file"] = json!(f);
        }
        if let Some((line, column)) = self.position {
            v["line"] = json!(line);
            v["column"] = json!(column);
        }
        json!({ "error": v })
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", self.to_json());
        ExitCode::from(self.code)
    }
}

impl From<bellnl_core::Error> for Failure {
    fn from(e: bellnl_core::Error) -> Self {
        match e {
            bellnl_core::Error::LpFailure(m) => Self {
                code: EXIT_NONCONVERGED,
                kind: "solver",
                message: format!("linear program failed: {m}"),
                file: None,
                position: None,
            },
            other => Self::validation(other.to_string()),
        }
    }
}

/// Syntax errors are malformed input; well-formed JSON violating a schema
/// or an invariant is a validation error.
fn from_json_error(e: serde_json::Error) -> Failure {
    use serde_json::error::Category;
    let (code, kind) = match e.classify() {
        Category::Syntax | Category::Eof => (EXIT_MALFORMED, "malformed_json"),
        Category::Data => (EXIT_VALIDATION, "validation"),
        Category::Io => (EXIT_IO, "io"),
    };
    Failure { code, kind, message: e.to_string(), file: None, position: Some((e.line(), e.column())) }
}

pub fn read_value(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure { code: EXIT_NO_INPUT, kind: "io", message: e.to_string(), file: None, position: None }.in_file(path)
    })?;
    serde_json::from_str(&text).map_err(|e| from_json_error(e).in_file(path))
}

pub fn from_value<T: DeserializeOwned>(value: Value, path: &Path) -> Result<T, Failure> {
    serde_json::from_value(value).map_err(|e| {
        let mut f = from_json_error(e);
        // Positions refer to the parsed value, not the file.
        f.position = None;
        f.in_file(path)
    })
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    from_value(read_value(path)?, path)
}

pub fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("library types serialize to JSON")
}

pub fn emit(value: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize");
    text.push('\n');
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|e| {
            Failure { code: EXIT_IO, kind: "io", message: e.to_string(), file: None, position: None }.in_file(p)
        }),
    }
}
