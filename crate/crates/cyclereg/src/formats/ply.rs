use std::fs;
use std::io::Write;
use std::path::Path;

use cyclereg_core::Vec3;

use super::{fmt_f64, parse_f64, FormatError};

/// ASCII PLY with a single `vertex` element of `x y z` doubles.
pub fn write_ply(path: &Path, points: &[Vec3]) -> Result<(), FormatError> {
    let mut w = Vec::new();
    let io = |e| FormatError::io(path, e);
    writeln!(w, "ply\nformat ascii 1.0\nelement vertex {}", points.len()).map_err(io)?;
    writeln!(w, "property double x\nproperty double y\nproperty double z\nend_header").map_err(io)?;
    for p in points {
        writeln!(w, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z)).map_err(io)?;
    }
    fs::write(path, w).map_err(io)
}

/// Reads the `x y z` properties of the vertex element. Other properties
/// and elements are skipped.
pub fn read_ply(path: &Path) -> Result<Vec<Vec3>, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(k, l)| ((k + 1) as u64, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(FormatError::parse(path, 1, "missing `ply` magic")),
    }
    // (name, count, properties)
    let mut elements: Vec<(String, usize, Vec<String>)> = Vec::new();
    loop {
        let Some((line, l)) = lines.next() else {
            return Err(FormatError::invalid(path, "header has no end_header"));
        };
        let f: Vec<&str> = l.split_whitespace().collect();
        match f.as_slice() {
            ["end_header"] => break,
            ["format", "ascii", _] => {}
            ["format", other, ..] => return Err(FormatError::parse(path, line, format!("unsupported format {other}"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let n = count.parse().map_err(|_| FormatError::parse(path, line, "bad element count"))?;
                elements.push((name.to_string(), n, Vec::new()));
            }
            ["property", "list", ..] => {
                let Some(e) = elements.last_mut() else { return Err(FormatError::parse(path, line, "property before element")) };
                e.2.push(String::from("<list>"));
            }
            ["property", _, name] => {
                let Some(e) = elements.last_mut() else { return Err(FormatError::parse(path, line, "property before element")) };
                e.2.push(name.to_string());
            }
            _ => return Err(FormatError::parse(path, line, format!("unexpected header line {l:?}"))),
        }
    }
    let mut points = Vec::new();
    for (name, count, props) in &elements {
        let axis = |a: &str| props.iter().position(|p| p == a);
        let idx = if name == "vertex" {
            match (axis("x"), axis("y"), axis("z")) {
                (Some(x), Some(y), Some(z)) => Some([x, y, z]),
                _ => return Err(FormatError::invalid(path, "vertex element lacks x, y, z")),
            }
        } else {
            None
        };
        for _ in 0..*count {
            let Some((line, l)) = lines.next() else {
                return Err(FormatError::invalid(path, format!("file ends inside element {name}")));
            };
            if let Some([x, y, z]) = idx {
                let f: Vec<&str> = l.split_whitespace().collect();
                if f.len() < props.len() {
                    return Err(FormatError::parse(path, line, format!("expected {} values", props.len())));
                }
                points.push(Vec3::new(
                    parse_f64(path, line, f[x], "x")?,
                    parse_f64(path, line, f[y], "y")?,
                    parse_f64(path, line, f[z], "z")?,
                ));
            }
        }
    }
    Ok(points)
}
