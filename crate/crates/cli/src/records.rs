//! Line-oriented `key=value` output.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::failure::Failure;

pub type Output = BufWriter<Box<dyn Write>>;

pub fn open_output(path: Option<&Path>) -> Result<Output, Failure> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(
            File::create(p).map_err(|e| Failure::Data(format!("cannot write {}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    Ok(BufWriter::new(sink))
}

pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>, Failure> {
    let file = File::open(path).map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(file)))
}

/// 12 significant digits, so output bytes do not depend on the platform's
/// shortest-representation logic.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

pub fn nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

/// Builder for one record line.
#[derive(Default)]
pub struct Record(String);

impl Record {
    pub fn new(kind: &str) -> Self {
        Record(format!("record={kind}"))
    }

    pub fn field(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        if !self.0.is_empty() {
            self.0.push(' ');
        }
        let _ = write!(self.0, "{key}={value}");
        self
    }

    pub fn write(self, out: &mut impl Write) -> Result<(), Failure> {
        writeln!(out, "{}", self.0).map_err(write_failed)
    }
}

pub fn write_failed(e: io::Error) -> Failure {
    Failure::Data(format!("write failed: {e}"))
}
