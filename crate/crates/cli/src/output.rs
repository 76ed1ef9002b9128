use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use nestcode::format::sig9;
use serde::Serializer;

use crate::Failure;

pub fn num(x: f64) -> String {
    sig9(x)
}

pub fn display<T: std::fmt::Display, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

/// Buffered writer to a file or standard output.
pub struct Sink {
    w: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, Failure> {
        let w: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| Failure::io(format!("{}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self { w })
    }

    pub fn line(&mut self, s: &str) -> Result<(), Failure> {
        writeln!(self.w, "{s}").map_err(Failure::io)
    }

    pub fn comment(&mut self, s: &str) -> Result<(), Failure> {
        self.line(&format!("# {s}"))
    }

    /// Metadata lines: tool version, command and the resolved config.
    pub fn header(&mut self, command: &str, config: &serde_json::Value) -> Result<(), Failure> {
        self.comment(&format!("nestcode {} {command}", env!("CARGO_PKG_VERSION")))?;
        self.comment(&format!("config: {config}"))
    }

    pub fn json(&mut self, v: &serde_json::Value) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(v).map_err(Failure::io)?;
        self.line(&text)
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        self.w.flush().map_err(Failure::io)
    }
}
