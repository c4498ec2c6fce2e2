//! Demonstration CSV format.
//!
//! One file per demonstration, one row per frame:
//!
//! ```text
//! t,glx,gly,glz,grx,gry,grz,rlx,rly,rlz,rrx,rry,rrz,ox,oy,oz,phase
//! ```
//!
//! `g*` are giver hands, `r*` receiver hands, `o*` the object, all in meters;
//! `t` is in seconds; `phase` is one of `reach`, `transfer`, `retreat`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Demonstration, Frame, PhaseLabel, Vec3};
use crate::error::{Error, Result};

pub const HEADER: [&str; 17] = [
    "t", "glx", "gly", "glz", "grx", "gry", "grz", "rlx", "rly", "rlz", "rrx", "rry", "rrz", "ox",
    "oy", "oz", "phase",
];

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Reads and validates a single demonstration file.
pub fn load_demonstration(path: &Path) -> Result<Demonstration> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(parse_err(
            path,
            1,
            format!("unexpected header, expected `{}`", HEADER.join(",")),
        ));
    }

    let mut frames = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut vals = [0.0; 16];
        for (k, v) in vals.iter_mut().enumerate() {
            let field = &record[k];
            *v = field.parse::<f64>().map_err(|_| {
                parse_err(
                    path,
                    line,
                    format!("column {}: bad number {field:?}", HEADER[k]),
                )
            })?;
        }
        let phase: PhaseLabel = record[16]
            .parse()
            .map_err(|e: Error| parse_err(path, line, e.to_string()))?;
        let v3 = |i: usize| Vec3::new(vals[i], vals[i + 1], vals[i + 2]);
        frames.push(Frame {
            t: vals[0],
            giver_left: v3(1),
            giver_right: v3(4),
            receiver_left: v3(7),
            receiver_right: v3(10),
            object: v3(13),
            phase,
        });
    }
    Demonstration::new(frames)
        .map_err(|e| Error::InvalidDemonstration(format!("{}: {e}", path.display())))
}

/// Loads a single file, or every `*.csv` file in a directory in file-name order.
pub fn load_demonstrations(path: &Path) -> Result<Vec<Demonstration>> {
    if path.is_dir() {
        demonstration_files(path)?
            .iter()
            .map(|p| load_demonstration(p))
            .collect()
    } else {
        Ok(vec![load_demonstration(path)?])
    }
}

/// Sorted `*.csv` paths directly inside `dir`.
pub fn demonstration_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let p = entry.path();
        if p.is_file() && p.extension().is_some_and(|x| x == "csv") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Writes a demonstration in the CSV format. Floats use the shortest
/// representation that parses back to the identical value.
pub fn write_demonstration<W: Write>(demo: &Demonstration, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
    w.write_record(HEADER).map_err(to_err)?;
    for f in &demo.frames {
        let mut row: Vec<String> = Vec::with_capacity(17);
        row.push(f.t.to_string());
        for p in [
            &f.giver_left,
            &f.giver_right,
            &f.receiver_left,
            &f.receiver_right,
            &f.object,
        ] {
            row.extend(p.iter().map(|c| c.to_string()));
        }
        row.push(f.phase.as_str().to_string());
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("csv write: {e}")))
}

pub fn save_demonstration(demo: &Demonstration, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_demonstration(demo, std::io::BufWriter::new(file))
}
