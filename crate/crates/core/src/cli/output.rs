//! CSV artifacts with a `#` metadata header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::CliError;

pub fn version() -> &'static str {
    concat!(env!("CARGO_PKG_VERSION"), " (", env!("THINSHELL_GIT_DESCRIBE"), ")")
}

/// Fixed 17-significant-digit formatting so identical runs give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Artifact {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl Artifact {
    pub fn create(dir: &Path, name: &str, command: &str, resolved: &str, columns: &[&str]) -> Result<Self, CliError> {
        let path = dir.join(name);
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut out = BufWriter::new(File::create(&path).map_err(io)?);
        writeln!(out, "# thinshell {}", version()).map_err(io)?;
        writeln!(out, "# command: {command}").map_err(io)?;
        writeln!(out, "# config:").map_err(io)?;
        for line in resolved.lines() {
            writeln!(out, "#   {line}").map_err(io)?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(columns).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(Self { path, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| CliError::Io(format!("{}: {e}", self.path.display())))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer
            .flush()
            .map_err(|e| CliError::Io(format!("{}: {e}", self.path.display())))?;
        Ok(self.path)
    }
}
