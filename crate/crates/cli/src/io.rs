//! Small CSV and JSON writers. Floats are written with Rust's shortest
//! round-trip formatting, so re-parsing a column reproduces the exact f64
//! and identical runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use elastic_rays::transforms::{Measurement, TransformKind};

use crate::config::{config_err, Failure};

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| config_err(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json(path: &Path) -> Result<serde_json::Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| config_err(format!("bad JSON in {}: {e}", path.display())))
}

pub struct CsvWriter {
    out: BufWriter<File>,
    path: String,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &str) -> Result<Self, Failure> {
        let file = File::create(path)
            .map_err(|e| config_err(format!("cannot create {}: {e}", path.display())))?;
        let mut w = CsvWriter {
            out: BufWriter::new(file),
            path: path.display().to_string(),
        };
        w.line(header)?;
        Ok(w)
    }

    pub fn line(&mut self, s: &str) -> Result<(), Failure> {
        writeln!(self.out, "{s}").map_err(|e| config_err(format!("write {}: {e}", self.path)))
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        self.out
            .flush()
            .map_err(|e| config_err(format!("flush {}: {e}", self.path)))
    }
}

/// Join f64 columns with shortest round-trip formatting.
pub fn float_row(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("{v}"));
    }
    s
}

pub const DATASET_HEADER: &str = "ray_id,pol,x01,x02,x03,v01,v02,v03,value";

pub fn dataset_row(m: &Measurement) -> String {
    format!(
        "{},{},{}",
        m.ray_id,
        m.pol,
        float_row(&[m.x0[0], m.x0[1], m.x0[2], m.dir[0], m.dir[1], m.dir[2], m.value])
    )
}

/// Parse one dataset row back into a Measurement (transverse rows only).
pub fn parse_dataset_row(line: &str, quad_step: f64, lineno: usize) -> Result<Measurement, Failure> {
    let cols: Vec<&str> = line.split(',').collect();
    if cols.len() != 9 {
        return Err(config_err(format!(
            "dataset line {lineno}: expected 9 columns, got {}",
            cols.len()
        )));
    }
    let f = |i: usize| -> Result<f64, Failure> {
        cols[i]
            .parse::<f64>()
            .map_err(|e| config_err(format!("dataset line {lineno} col {i}: {e}")))
    };
    Ok(Measurement {
        ray_id: cols[0]
            .parse()
            .map_err(|e| config_err(format!("dataset line {lineno} ray_id: {e}")))?,
        kind: TransformKind::Transverse,
        pol: cols[1]
            .parse()
            .map_err(|e| config_err(format!("dataset line {lineno} pol: {e}")))?,
        x0: [f(2)?, f(3)?, f(4)?],
        dir: [f(5)?, f(6)?, f(7)?],
        value: f(8)?,
        quad_step,
    })
}
