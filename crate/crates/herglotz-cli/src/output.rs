use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// Buffered stdout or file.
pub struct Sink {
    inner: BufWriter<Box<dyn Write>>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let w: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?),
            None => Box::new(io::stdout()),
        };
        Ok(Self { inner: BufWriter::new(w) })
    }

    pub fn write_json<T: Serialize>(&mut self, v: &T) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut self.inner, v)?;
        self.inner.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush()?;
        Ok(())
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.inner.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Rows of preformatted cells under a fixed header.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn write_csv(&self, sink: &mut Sink) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
