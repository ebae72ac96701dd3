use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use cyclereg_core::{PointMatch, ScanId, Vec3};
use serde::Deserialize;

use super::{fmt_f64, FormatError};

pub const MATCH_HEADER: [&str; 8] = ["scan_a", "scan_b", "ax", "ay", "az", "bx", "by", "bz"];

/// One row of a match file.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct MatchRecord {
    pub scan_a: ScanId,
    pub scan_b: ScanId,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl From<MatchRecord> for PointMatch {
    fn from(r: MatchRecord) -> Self {
        PointMatch::new(r.scan_a, r.scan_b, Vec3::new(r.ax, r.ay, r.az), Vec3::new(r.bx, r.by, r.bz))
    }
}

/// Reads a match CSV. Blank lines and `#` comments are skipped. The line
/// numbers reported in errors are 1-based file lines.
pub fn read_matches(path: &Path) -> Result<Vec<PointMatch>, FormatError> {
    let file = File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(FormatError::invalid(path, "empty file, expected header scan_a,scan_b,ax,ay,az,bx,by,bz"));
    }
    if header.iter().ne(MATCH_HEADER) {
        return Err(FormatError::parse(path, 1, format!("header must be {}", MATCH_HEADER.join(","))));
    }
    let mut out = Vec::new();
    let mut raw = csv::StringRecord::new();
    while rdr.read_record(&mut raw).map_err(|e| csv_error(path, e))? {
        let line = raw.position().map(|p| p.line()).unwrap_or(0);
        let rec: MatchRecord = raw.deserialize(Some(&header)).map_err(|e| csv_error(path, e))?;
        let m = PointMatch::from(rec);
        if !(m.p_a.iter().chain(m.p_b.iter()).all(|v| v.is_finite())) {
            return Err(FormatError::parse(path, line, "non-finite coordinate"));
        }
        if m.scan_a == m.scan_b {
            return Err(FormatError::parse(path, line, format!("scan_a and scan_b are both {}", m.scan_a)));
        }
        out.push(m);
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> FormatError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    FormatError::parse(path, line, message)
}

pub fn write_matches(path: &Path, matches: &[PointMatch]) -> Result<(), FormatError> {
    let file = File::create(path).map_err(|e| FormatError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_matches_to(&mut w, matches).map_err(|e| FormatError::io(path, e))
}

pub(crate) fn write_matches_to(w: &mut impl Write, matches: &[PointMatch]) -> std::io::Result<()> {
    writeln!(w, "{}", MATCH_HEADER.join(","))?;
    for m in matches {
        write!(w, "{},{}", m.scan_a, m.scan_b)?;
        for v in m.p_a.iter().chain(m.p_b.iter()) {
            write!(w, ",{}", fmt_f64(*v))?;
        }
        writeln!(w)?;
    }
    w.flush()
}
